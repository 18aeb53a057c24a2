"""Domain abstractions (symbol relabelings), projections and their compositions.

An abstraction is first described symbolically (``DomainMap``, ``Projection``,
``Composite``) and then bound to a concrete domain signature, which yields
index-level maps for states, operators, domains and pair tables.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError
from .psvn import Domain, Operator


@dataclass(frozen=True)
class DomainMap:
    """Relabels symbols; symbols absent from ``mapping`` map to themselves."""

    mapping: tuple  # sorted (source, target) name pairs

    @classmethod
    def of(cls, mapping: dict) -> "DomainMap":
        return cls(tuple(sorted((str(k), str(v)) for k, v in mapping.items())))

    def bind(self, alphabet, state_len, pdoms) -> "BoundAbstraction":
        m = dict(self.mapping)
        unknown = [s for s in m if s not in alphabet]
        if unknown:
            raise ConfigError("symbol-not-in-alphabet", f"abstraction maps unknown symbols {unknown}")
        names = [m.get(s, s) for s in alphabet]
        target = list(dict.fromkeys(names))
        tindex = {s: i for i, s in enumerate(target)}
        sym_map = tuple(tindex[n] for n in names)
        new_pdoms = tuple(frozenset(sym_map[v] for v in d) for d in pdoms)
        return BoundAbstraction(tuple(target), state_len, new_pdoms, sym_map=sym_map, keep=None)


@dataclass(frozen=True)
class Projection:
    keep: tuple

    def bind(self, alphabet, state_len, pdoms) -> "BoundAbstraction":
        keep = tuple(self.keep)
        if any(b <= a for a, b in zip(keep, keep[1:])):
            raise ConfigError("bad-abstraction", "projection positions must be strictly increasing")
        if keep and (keep[0] < 0 or keep[-1] >= state_len):
            raise ConfigError("bad-abstraction", f"projection position outside [0, {state_len})")
        if not keep:
            raise ConfigError("bad-abstraction", "projection keeps no position")
        new_pdoms = tuple(pdoms[i] for i in keep)
        return BoundAbstraction(tuple(alphabet), len(keep), new_pdoms, sym_map=None, keep=keep,
                                source_pdoms=tuple(pdoms))


@dataclass(frozen=True)
class Composite:
    parts: tuple

    def bind(self, alphabet, state_len, pdoms) -> "BoundAbstraction":
        chain = []
        for part in self.parts:
            b = part.bind(alphabet, state_len, pdoms)
            chain.extend(b.chain)
            alphabet, state_len, pdoms = b.alphabet, b.state_len, b.position_domains
        return BoundAbstraction(alphabet, state_len, pdoms, chain=tuple(chain))


IDENTITY = Composite(())


class BoundAbstraction:
    """Abstraction resolved against a concrete alphabet and state length."""

    def __init__(self, alphabet, state_len, pdoms, sym_map=None, keep=None, source_pdoms=None, chain=None):
        self.alphabet = alphabet
        self.state_len = state_len
        self.position_domains = pdoms
        if chain is None:
            chain = ((sym_map, keep, source_pdoms),)
        self.chain = chain
        self._fused = self._fuse()
        self.source_len = None  # set by ``bind``

    def _fuse(self):
        # every chain is equivalent to one projection followed by one relabeling
        sym = None
        keep = None
        for sym_map, kp, _ in self.chain:
            if kp is not None:
                keep = kp if keep is None else tuple(keep[i] for i in kp)
            if sym_map is not None:
                sym = sym_map if sym is None else tuple(sym_map[v] for v in sym)
        return keep, sym

    @property
    def is_identity(self) -> bool:
        keep, sym = self._fused
        if keep is not None and (self.source_len is None or keep != tuple(range(self.source_len))):
            return False
        return sym is None or sym == tuple(range(len(sym)))

    def state(self, s: Sequence[int]) -> tuple:
        keep, sym = self._fused
        if keep is not None:
            s = [s[i] for i in keep]
        if sym is not None:
            return tuple(sym[v] for v in s)
        return tuple(s)

    def states_array(self, arr: np.ndarray) -> np.ndarray:
        keep, sym = self._fused
        if keep is not None:
            arr = arr[:, list(keep)]
        if sym is not None:
            arr = np.asarray(sym, dtype=arr.dtype)[arr]
        return np.ascontiguousarray(arr)

    def operator(self, op: Operator) -> list:
        """Abstract image(s) of ``op``.

        Under projection a right-hand variable can lose every left-hand
        occurrence; the image is then expanded into one operator per value
        the variable could have carried.
        """
        ops = [op]
        for sym_map, keep, src_pdoms in self.chain:
            nxt = []
            for o in ops:
                if sym_map is not None:
                    nxt.append(_relabel_op(o, sym_map))
                else:
                    nxt.extend(_project_op(o, keep, src_pdoms))
            ops = nxt
        return ops

    def domain(self, d: Domain, dedup: bool = True) -> "AbstractDomain":
        ops = []
        seen = set()
        total = 0
        for op in d.operators:
            for a in self.operator(op):
                total += 1
                key = (a.lhs, a.rhs)
                if dedup and key in seen:
                    continue
                seen.add(key)
                ops.append(a)
        dom = Domain(f"{d.name}.abs", tuple(self.alphabet), self.state_len, tuple(self.position_domains),
                     tuple(ops), self.state(d.goal))
        return AbstractDomain(dom, total)

    def pair_image(self, pairs):
        from .mutex import PairTable

        reach = pairs.pairs
        singles = pairs.singles
        for sym_map, keep, _ in self.chain:
            if keep is not None:
                kp = list(keep)
                reach = reach[np.ix_(kp, range(reach.shape[1]), kp, range(reach.shape[3]))]
                singles = singles[kp]
            if sym_map is not None:
                k_old = reach.shape[1]
                k_new = max(sym_map) + 1
                onehot = np.zeros((k_old, k_new), dtype=np.int64)
                onehot[np.arange(k_old), np.asarray(sym_map)] = 1
                r = np.einsum("iajb,ac,bd->icjd", reach.astype(np.int64), onehot, onehot, optimize=True)
                reach = r > 0
                singles = (singles.astype(np.int64) @ onehot) > 0
        return PairTable(singles, reach, pairs.provenance)


@dataclass
class AbstractDomain:
    domain: Domain
    operator_count: int  # images before deduplication


def _relabel_op(op: Operator, sym_map) -> Operator:
    f = lambda c: sym_map[c] if isinstance(c, int) else c
    return Operator(op.label, tuple(map(f, op.lhs)), tuple(map(f, op.rhs)))


def _project_op(op: Operator, keep, src_pdoms) -> list:
    lhs = tuple(op.lhs[i] for i in keep)
    rhs = tuple(op.rhs[i] for i in keep)
    bound = {c for c in lhs if isinstance(c, str)}
    orphans = []
    for c in rhs:
        if isinstance(c, str) and c not in bound and c not in orphans:
            orphans.append(c)
    if not orphans:
        return [Operator(op.label, lhs, rhs)]
    choices = []
    for var in orphans:
        vals = None
        for i, c in enumerate(op.lhs):
            if c == var:
                d = frozenset(src_pdoms[i])
                vals = d if vals is None else vals & d
        choices.append(sorted(vals))
    import itertools

    out = []
    for combo in itertools.product(*choices):
        sub = dict(zip(orphans, combo))
        r = tuple(sub.get(c, c) if isinstance(c, str) else c for c in rhs)
        suffix = "~" + "~".join(str(v) for v in combo)
        out.append(Operator(op.label + suffix, lhs, r))
    return out


# --- module-level API --------------------------------------------------------------


def bind(psi, domain: Domain) -> BoundAbstraction:
    if isinstance(psi, BoundAbstraction):
        return psi
    b = psi.bind(domain.alphabet, domain.state_len, domain.position_domains)
    b.source_len = domain.state_len
    return b


def abstract_state(psi: BoundAbstraction, s) -> tuple:
    return psi.state(s)


def abstract_operator(psi: BoundAbstraction, op: Operator) -> list:
    return psi.operator(op)


def abstract_domain(psi, d: Domain, dedup: bool = True) -> AbstractDomain:
    return bind(psi, d).domain(d, dedup=dedup)


def abstract_pair_image(psi: BoundAbstraction, pairs):
    return psi.pair_image(pairs)


# --- text format -------------------------------------------------------------------


def parse_abstraction(text: str, aliases: Optional[dict] = None):
    """Parse ``map t <- a b c`` / ``keep 0 3 7`` lines into an abstraction.

    ``aliases`` maps symbolic keep targets (e.g. ``"belts 3,4,5"``) to position
    lists; consecutive ``keep`` lines are merged into one projection.
    """
    parts = []
    mapping = {}
    keep: Optional[set] = None

    def flush_map():
        nonlocal mapping
        if mapping:
            parts.append(DomainMap.of(mapping))
            mapping = {}

    def flush_keep():
        nonlocal keep
        if keep is not None:
            parts.append(Projection(tuple(sorted(keep))))
            keep = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "map":
            flush_keep()
            if len(tokens) < 4 or tokens[2] != "<-":
                raise ConfigError("syntax-error", f"line {lineno}: expected 'map <t> <- <src> ...'")
            target = tokens[1]
            for src in tokens[3:]:
                for s in src.split(","):
                    if s:
                        if s in mapping and mapping[s] != target:
                            raise ConfigError("bad-abstraction", f"line {lineno}: {s} mapped twice")
                        mapping[s] = target
        elif tokens[0] == "keep":
            flush_map()
            rest = line[len("keep"):].strip()
            positions = _keep_positions(rest, aliases, lineno)
            keep = set(positions) if keep is None else keep | set(positions)
        else:
            raise ConfigError("syntax-error", f"line {lineno}: unknown directive {tokens[0]!r}")
    flush_map()
    flush_keep()
    if len(parts) == 1:
        return parts[0]
    return Composite(tuple(parts))


def _keep_positions(rest: str, aliases, lineno) -> list:
    tokens = rest.replace(",", " ").split()
    if tokens and all(t.isdigit() for t in tokens):
        return [int(t) for t in tokens]
    if aliases is not None:
        key = " ".join(rest.replace("[", " ").replace("]", " ").split())
        if key in aliases:
            return list(aliases[key])
        resolved = resolve_alias(key, aliases)
        if resolved is not None:
            return resolved
    raise ConfigError("bad-abstraction", f"line {lineno}: cannot resolve keep target {rest!r}")


def resolve_alias(key: str, aliases: dict) -> Optional[list]:
    """Resolve ``"<group> a,b,c"`` against per-item aliases ``"<group> a"``.

    The words ``all`` and ``none`` select every item of the group or nothing.
    """
    words = key.split(None, 1)
    if not words:
        return None
    group = words[0]
    items = words[1].replace(",", " ").split() if len(words) > 1 else []
    members = {k.split(None, 1)[1]: v for k, v in aliases.items()
               if k.split(None, 1)[0] == group and len(k.split(None, 1)) == 2}
    if not members:
        return None
    if items == ["none"]:
        return []
    if items == ["all"]:
        return sorted(p for v in members.values() for p in v)
    out = []
    for it in items:
        if it not in members:
            return None
        out.extend(members[it])
    return sorted(out)
