"""PSVN domains: parsing, printing and operator semantics.

A state is a tuple of symbol indices into ``Domain.alphabet``. Operator sides
are tuples of cells where a cell is an ``int`` (constant symbol index), a
``str`` (variable name) or ``None`` (underscore).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .errors import DomainError, PSVNSyntaxError

Cell = Union[int, str, None]
Pattern = tuple
State = tuple

UNDERSCORE = None

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


@dataclass(frozen=True)
class Operator:
    label: str
    lhs: Pattern
    rhs: Pattern

    def __post_init__(self):
        if len(self.lhs) != len(self.rhs):
            raise DomainError("length-mismatch", f"operator {self.label}: sides differ in length")
        bound = {c for c in self.lhs if isinstance(c, str)}
        for c in self.rhs:
            if isinstance(c, str) and c not in bound:
                raise DomainError(
                    "rhs-variable-unbound", f"operator {self.label}: variable ${c} not on left hand side"
                )

    @property
    def variables(self) -> list[str]:
        seen = []
        for c in self.lhs:
            if isinstance(c, str) and c not in seen:
                seen.append(c)
        return seen


@dataclass(frozen=True)
class Domain:
    name: str
    alphabet: tuple
    state_len: int
    position_domains: tuple
    operators: tuple
    goal: State
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if len(set(self.alphabet)) != len(self.alphabet):
            raise DomainError("duplicate-symbol", "alphabet symbols must be distinct")
        if self.state_len <= 0:
            raise DomainError("length-mismatch", "state length must be positive")
        if len(self.position_domains) != self.state_len:
            raise DomainError("length-mismatch", "one position domain per cell required")
        k = len(self.alphabet)
        for dom in self.position_domains:
            if not dom or any(not 0 <= v < k for v in dom):
                raise DomainError("symbol-not-in-alphabet", "position domain outside alphabet")
        if len(self.goal) != self.state_len:
            raise DomainError("length-mismatch", "goal length differs from state length")
        self.check_state(self.goal)
        for op in self.operators:
            if len(op.lhs) != self.state_len:
                raise DomainError("length-mismatch", f"operator {op.label} has wrong length")
            for c in op.lhs + op.rhs:
                if isinstance(c, int) and not 0 <= c < k:
                    raise DomainError("symbol-not-in-alphabet", f"operator {op.label}")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.alphabet)})

    def symbol(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise DomainError("symbol-not-in-alphabet", f"unknown symbol {name!r}") from None

    def encode(self, names: Iterable[str]) -> State:
        state = tuple(self.symbol(str(n)) for n in names)
        if len(state) != self.state_len:
            raise DomainError("length-mismatch", f"expected {self.state_len} cells, got {len(state)}")
        return state

    def decode(self, state: Sequence[int]) -> tuple:
        return tuple(self.alphabet[v] for v in state)

    def check_state(self, state: Sequence[int]) -> None:
        for i, v in enumerate(state):
            if v not in self.position_domains[i]:
                raise DomainError(
                    "symbol-outside-position-domain",
                    f"cell {i} holds {self.alphabet[v]!r}, not allowed at that position",
                )

    def with_goal(self, goal: State) -> "Domain":
        return Domain(self.name, self.alphabet, self.state_len, self.position_domains, self.operators, tuple(goal))


def match(lhs: Pattern, s: Sequence[int]) -> Optional[dict]:
    binding: dict = {}
    for c, v in zip(lhs, s):
        if c is None:
            continue
        if isinstance(c, str):
            prev = binding.setdefault(c, v)
            if prev != v:
                return None
        elif c != v:
            return None
    return binding


def apply(op: Operator, s: Sequence[int], domain: Optional[Domain] = None) -> Optional[State]:
    """Successor of ``s`` under ``op``, or None when the left hand side does not match.

    With ``domain`` given, a successor cell outside its position domain raises
    ``DomainError('result-symbol-outside-position-domain')``.
    """
    binding = match(op.lhs, s)
    if binding is None:
        return None
    out = []
    for i, c in enumerate(op.rhs):
        if c is None:
            out.append(s[i])
        elif isinstance(c, str):
            out.append(binding[c])
        else:
            out.append(c)
    if domain is not None:
        for i, v in enumerate(out):
            if v not in domain.position_domains[i]:
                raise DomainError(
                    "result-symbol-outside-position-domain",
                    f"operator {op.label} writes {domain.alphabet[v]!r} to cell {i}",
                )
    return tuple(out)


def regress(op: Operator, s_next: Sequence[int], position_domains: Sequence) -> list:
    """All states ``s`` with ``apply(op, s) == s_next``, in ascending symbol order."""
    lhs, rhs = op.lhs, op.rhs
    binding: dict = {}

    def bind(var, v):
        prev = binding.setdefault(var, v)
        return prev == v

    for i, (l, r) in enumerate(zip(lhs, rhs)):
        v = s_next[i]
        if r is None:
            if l is None:
                continue
            if isinstance(l, str):
                if not bind(l, v):
                    return []
            elif l != v:
                return []
        elif isinstance(r, str):
            if not bind(r, v):
                return []
        elif r != v:
            return []

    base = list(s_next)
    free_vars: dict = {}
    free_cells = []
    for i, (l, r) in enumerate(zip(lhs, rhs)):
        if r is None:
            continue
        if l is None:
            free_cells.append(i)
        elif isinstance(l, str):
            if l in binding:
                if binding[l] not in position_domains[i]:
                    return []
                base[i] = binding[l]
            else:
                free_vars.setdefault(l, []).append(i)
        else:
            if l not in position_domains[i]:
                return []
            base[i] = l

    choices = []
    slots = []
    for var, cells in free_vars.items():
        vals = set(position_domains[cells[0]])
        for i in cells[1:]:
            vals &= set(position_domains[i])
        choices.append(sorted(vals))
        slots.append(cells)
    for i in free_cells:
        choices.append(sorted(position_domains[i]))
        slots.append([i])
    if not choices:
        return [tuple(base)]
    out = []
    for combo in itertools.product(*choices):
        for cells, v in zip(slots, combo):
            for i in cells:
                base[i] = v
        out.append(tuple(base))
    return out


# --- text format -----------------------------------------------------------------


def _strip(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def parse_domain(source: str) -> Domain:
    name = None
    alphabet: Optional[list] = None
    length = None
    positions: dict = {}
    raw_ops = []
    goal_tokens = None
    labels = set()

    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = _strip(raw)
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        tokens = line.split()
        key = tokens[0]
        if key == "domain":
            if len(tokens) != 2:
                raise PSVNSyntaxError("expected 'domain <ident>'", lineno, col)
            name = tokens[1]
        elif key == "alphabet":
            if len(tokens) < 2:
                raise PSVNSyntaxError("empty alphabet", lineno, col)
            alphabet = tokens[1:]
            for t in alphabet:
                if t == "_" or t.startswith("$") or t == "=>":
                    raise PSVNSyntaxError(f"reserved token {t!r} in alphabet", lineno, col)
        elif key == "length":
            if len(tokens) != 2 or not tokens[1].isdigit():
                raise PSVNSyntaxError("expected 'length <n>'", lineno, col)
            length = int(tokens[1])
        elif key == "position":
            if len(tokens) < 3 or not tokens[1].isdigit():
                raise PSVNSyntaxError("expected 'position <i> <sym> ...'", lineno, col)
            positions[int(tokens[1])] = (tokens[2:], lineno, col)
        elif key == "op":
            body = line.split(None, 1)[1] if len(tokens) > 1 else ""
            if ":" not in body:
                raise PSVNSyntaxError("expected 'op <label>: <lhs> => <rhs>'", lineno, col)
            label, sides = body.split(":", 1)
            label = label.strip()
            if not label or not _IDENT.match(label):
                raise PSVNSyntaxError(f"bad operator label {label!r}", lineno, col)
            if label in labels:
                raise PSVNSyntaxError(f"duplicate operator label {label!r}", lineno, col)
            labels.add(label)
            parts = sides.split("=>")
            if len(parts) != 2:
                raise PSVNSyntaxError("operator needs exactly one '=>'", lineno, col)
            raw_ops.append((label, parts[0].split(), parts[1].split(), lineno, col))
        elif key == "goal":
            goal_tokens = (tokens[1:], lineno, col)
        else:
            raise PSVNSyntaxError(f"unknown directive {key!r}", lineno, col)

    if name is None:
        raise PSVNSyntaxError("missing 'domain' line", 1, 1)
    if alphabet is None:
        raise PSVNSyntaxError("missing 'alphabet' line", 1, 1)
    if length is None:
        raise PSVNSyntaxError("missing 'length' line", 1, 1)
    if goal_tokens is None:
        raise PSVNSyntaxError("missing 'goal' line", 1, 1)
    if len(set(alphabet)) != len(alphabet):
        raise DomainError("duplicate-symbol", "alphabet symbols must be distinct")
    index = {s: i for i, s in enumerate(alphabet)}

    def sym(tok, lineno, col):
        if tok not in index:
            raise DomainError("symbol-not-in-alphabet", f"line {lineno}: symbol {tok!r} not in alphabet")
        return index[tok]

    full = frozenset(range(len(alphabet)))
    pdoms = [full] * length
    for i, (toks, lineno, col) in positions.items():
        if i >= length:
            raise DomainError("length-mismatch", f"line {lineno}: position {i} beyond length {length}")
        pdoms[i] = frozenset(sym(t, lineno, col) for t in toks)

    def cells(toks, lineno, col, label):
        if len(toks) != length:
            raise DomainError(
                "length-mismatch", f"line {lineno}: operator {label} has {len(toks)} cells, expected {length}"
            )
        out = []
        for t in toks:
            if t == "_":
                out.append(None)
            elif t.startswith("$"):
                if not _IDENT.match(t[1:]):
                    raise PSVNSyntaxError(f"bad variable {t!r}", lineno, col)
                out.append(t[1:])
            else:
                out.append(sym(t, lineno, col))
        return tuple(out)

    ops = []
    for label, ltoks, rtoks, lineno, col in raw_ops:
        ops.append(Operator(label, cells(ltoks, lineno, col, label), cells(rtoks, lineno, col, label)))
    gtoks, lineno, col = goal_tokens
    if len(gtoks) != length:
        raise DomainError("length-mismatch", f"line {lineno}: goal has {len(gtoks)} cells, expected {length}")
    goal = tuple(sym(t, lineno, col) for t in gtoks)
    return Domain(name, tuple(alphabet), length, tuple(pdoms), tuple(ops), goal)


def format_cell(domain: Domain, c: Cell) -> str:
    if c is None:
        return "_"
    if isinstance(c, str):
        return "$" + c
    return domain.alphabet[c]


def format_domain(domain: Domain) -> str:
    lines = [
        f"domain {domain.name}",
        "alphabet " + " ".join(domain.alphabet),
        f"length {domain.state_len}",
    ]
    full = frozenset(range(len(domain.alphabet)))
    for i, dom in enumerate(domain.position_domains):
        if dom != full:
            lines.append(f"position {i} " + " ".join(domain.alphabet[v] for v in sorted(dom)))
    for op in domain.operators:
        lhs = " ".join(format_cell(domain, c) for c in op.lhs)
        rhs = " ".join(format_cell(domain, c) for c in op.rhs)
        lines.append(f"op {op.label}: {lhs} => {rhs}")
    lines.append("goal " + " ".join(domain.decode(domain.goal)))
    return "\n".join(lines) + "\n"


def load_domain(path) -> Domain:
    with open(path, encoding="utf-8") as fh:
        return parse_domain(fh.read())
