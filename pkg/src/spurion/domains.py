"""PSVN generators for the benchmark families.

Each generator returns the PSVN text plus a :class:`Meta` record holding the
symbolic position aliases used by ``keep`` abstraction specs, the default
seed state and a renderer back to the conventional notation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: tuple = ()  # family specific sizes, see FAMILIES
    move_table: Optional[tuple] = None
    options: tuple = ()  # (name, value) pairs

    def option(self, name, default=None):
        return dict(self.options).get(name, default)


@dataclass
class Meta:
    family: str
    aliases: dict = field(default_factory=dict)
    seed: Optional[list] = None  # symbol names; None means the goal
    display_map: dict = field(default_factory=dict)  # symbol -> conventional notation

    def display(self, names) -> list:
        return [self.display_map.get(n, n) for n in names]

    def to_text(self) -> str:
        lines = [f"family {self.family}"]
        if self.seed is not None:
            lines.append("seed " + " ".join(self.seed))
        for name, pos in self.aliases.items():
            lines.append(f"{name}: " + " ".join(str(p) for p in pos))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Meta":
        meta = cls(family="")
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("family "):
                meta.family = line.split(None, 1)[1]
            elif line.startswith("seed "):
                meta.seed = line.split()[1:]
            elif ":" in line:
                name, pos = line.split(":", 1)
                meta.aliases[name.strip()] = [int(p) for p in pos.split()]
        return meta


class _Writer:
    def __init__(self, name, alphabet, length):
        self.name = name
        self.alphabet = list(alphabet)
        self.length = length
        self.positions = {}
        self.ops = []
        self.goal = None

    def op(self, label, lhs: dict, rhs: dict):
        self.ops.append((label, lhs, rhs))

    def text(self) -> str:
        out = [f"domain {self.name}", "alphabet " + " ".join(self.alphabet), f"length {self.length}"]
        full = set(self.alphabet)
        for i in sorted(self.positions):
            if set(self.positions[i]) != full:
                out.append(f"position {i} " + " ".join(self.positions[i]))
        for label, lhs, rhs in self.ops:
            l = " ".join(str(lhs.get(i, "_")) for i in range(self.length))
            r = " ".join(str(rhs.get(i, "_")) for i in range(self.length))
            out.append(f"op {label}: {l} => {r}")
        out.append("goal " + " ".join(self.goal))
        return "\n".join(out) + "\n"


# --- Towers of Hanoi ---------------------------------------------------------------


def _hanoi_check(n, p):
    if n < 1 or p < 3:
        raise ConfigError("unsupported-parameter-combination", "Towers of Hanoi needs >= 1 disk and >= 3 pegs")


def hanoi_pegs(state_pegs, n, p):
    """Normalize a peg-per-disk list (disk 1 first, pegs 1-based)."""
    if len(state_pegs) != n or any(not 1 <= q <= p for q in state_pegs):
        raise ConfigError("bad-state", "expected one peg number per disk")
    return list(state_pegs)


def hanoi_disk(n: int, p: int):
    _hanoi_check(n, p)
    pegs = [str(q) for q in range(1, p + 1)]
    w = _Writer(f"hanoi_disk_{n}x{p}", pegs, n)
    # disk d (0-based index d-1) moves from a to b when no smaller disk sits on a or b
    for d in range(1, n + 1):
        for a, b in itertools.permutations(pegs, 2):
            others = [q for q in pegs if q not in (a, b)]
            # every smaller disk must be on a third peg; enumerate their placements
            for placement in itertools.product(others, repeat=d - 1):
                lhs = {i: placement[i] for i in range(d - 1)}
                lhs[d - 1] = a
                rhs = {d - 1: b}
                tag = "".join(placement)
                w.op(f"d{d}_{a}{b}" + (f"_{tag}" if tag else ""), lhs, rhs)
    w.goal = [pegs[-1]] * n
    meta = Meta("ToH-disk", aliases={f"disks {d}": [d - 1] for d in range(1, n + 1)})
    return w.text(), meta


def hanoi_encode_disk(pegs_of_disk, n, p):
    return [str(q) for q in hanoi_pegs(pegs_of_disk, n, p)]


def hanoi_binary(n: int, p: int):
    _hanoi_check(n, p)
    L = n * p
    w = _Writer(f"hanoi_binary_{n}x{p}", ["0", "1"], L)
    cell = lambda peg, d: peg * n + (d - 1)
    for d in range(1, n + 1):
        for a, b in itertools.permutations(range(p), 2):
            lhs = {cell(a, d): "1", cell(b, d): "0"}
            for e in range(1, d):
                lhs[cell(a, e)] = "0"
                lhs[cell(b, e)] = "0"
            rhs = {cell(a, d): "0", cell(b, d): "1"}
            w.op(f"d{d}_{a + 1}{b + 1}", lhs, rhs)
    goal = ["0"] * L
    for d in range(1, n + 1):
        goal[cell(p - 1, d)] = "1"
    w.goal = goal
    aliases = {f"disks {d}": [cell(q, d) for q in range(p)] for d in range(1, n + 1)}
    aliases.update({f"pegs {q + 1}": [cell(q, d) for d in range(1, n + 1)] for q in range(p)})
    return w.text(), Meta("ToH-binary", aliases=aliases)


def hanoi_encode_binary(pegs_of_disk, n, p):
    out = ["0"] * (n * p)
    for d, q in enumerate(hanoi_pegs(pegs_of_disk, n, p), start=1):
        out[(q - 1) * n + d - 1] = "1"
    return out


def _count(k):
    return f"h{k}"


def hanoi_stack(n: int, p: int, under: bool = True, implied: bool = False, prune: bool = True):
    """Stack representation: per peg a height counter followed by n slots.

    Operators move disk d from the top of peg a (height h) onto peg b
    (height k). Preconditions name the moved disk, the disk below it (when
    ``under``), the destination top disk and the empty destination slot. The
    counter cells use their own symbols ``h0..hn`` so that relabeling disks
    never touches them. ``implied`` adds every non-empty cell that is forced
    by those preconditions in reachable states. ``prune`` drops moves whose
    named disks cannot sit in those cells together in any legal configuration.
    """
    _hanoi_check(n, p)
    disks = [str(d) for d in range(1, n + 1)]
    counts = [_count(k) for k in range(n + 1)]
    L = p * (n + 1)
    w = _Writer(f"hanoi_stack_{n}x{p}", ["0"] + disks + counts, L)
    base = lambda q: q * (n + 1)
    for q in range(p):
        w.positions[base(q)] = counts
        for k in range(1, n + 1):
            w.positions[base(q) + k] = ["0"] + disks
    ops = []
    for a, b in itertools.permutations(range(p), 2):
        for d in range(1, n + 1):
            for h in range(1, n + 1):
                unders = [None] if h == 1 or not under else list(range(d + 1, n + 1))
                if under and h > 1 and not unders:
                    continue
                for u in unders:
                    for k in range(0, n):
                        tops = [None] if k == 0 else list(range(d + 1, n + 1))
                        for e in tops:
                            if prune and not _hanoi_consistent(n, d, h, u, k, e):
                                continue
                            lhs = {base(a): _count(h), base(a) + h: str(d), base(b): _count(k), base(b) + k + 1: "0"}
                            rhs = {base(a): _count(h - 1), base(a) + h: "0", base(b): _count(k + 1),
                                   base(b) + k + 1: str(d)}
                            if u is not None:
                                lhs[base(a) + h - 1] = str(u)
                                rhs[base(a) + h - 1] = str(u)
                            if e is not None:
                                lhs[base(b) + k] = str(e)
                                rhs[base(b) + k] = str(e)
                            label = f"m{a + 1}{b + 1}_d{d}_h{h}_k{k}" + (f"_u{u}" if u else "") + (f"_e{e}" if e else "")
                            ops.append((label, lhs, rhs))
    if implied:
        ops = _hanoi_strengthen(ops, n, p)
    for op in ops:
        w.op(*op)
    goal = []
    for q in range(p):
        if q == p - 1:
            goal += [_count(n)] + [str(d) for d in range(n, 0, -1)]
        else:
            goal += [_count(0)] + ["0"] * n
    w.goal = goal
    aliases = {f"pegs {q + 1}": list(range(base(q), base(q) + n + 1)) for q in range(p)}
    aliases["counts all"] = [base(q) for q in range(p)]
    display = {_count(k): str(k) for k in range(n + 1)}
    return w.text(), Meta("ToH-stack", aliases=aliases, display_map=display)


def _hanoi_consistent(n, d, h, u, k, e):
    """Local counting checks on the named disks of a stack move.

    The h-1 disks under d and the k disks on the destination are all larger
    than d; the disks under u (resp. e) are larger than u (resp. e); u and e
    are different disks. No global feasibility reasoning beyond that.
    """
    if h - 1 + k > n - d:
        return False
    if u is not None and h - 2 > n - u:
        return False
    if e is not None and k - 1 > n - e:
        return False
    return u is None or u != e


def hanoi_encode_stack(pegs_of_disk, n, p):
    pegs = hanoi_pegs(pegs_of_disk, n, p)
    out = []
    for q in range(1, p + 1):
        on = [d for d in range(n, 0, -1) if pegs[d - 1] == q]
        out += [_count(len(on))] + [str(d) for d in on] + ["0"] * (n - len(on))
    return out


def _hanoi_strengthen(ops, n, p):
    """Add the non-empty cells every matching reachable state agrees on."""
    states = [hanoi_encode_stack(list(c), n, p) for c in itertools.product(range(1, p + 1), repeat=n)]
    out = []
    for label, lhs, rhs in ops:
        matching = [s for s in states if all(s[i] == v for i, v in lhs.items())]
        if not matching:
            out.append((label, lhs, rhs))
            continue
        lhs = dict(lhs)
        rhs = dict(rhs)
        for i in range(len(matching[0])):
            if i in lhs:
                continue
            vals = {s[i] for s in matching}
            if len(vals) == 1:
                v = vals.pop()
                if v != "0":
                    lhs[i] = v
                    rhs[i] = v
        out.append((label, lhs, rhs))
    return out


# --- Sliding-tile puzzle ---------------------------------------------------------------


def grid_moves(rows: int, cols: int) -> list:
    """All (blank cell, tile cell) pairs of orthogonally adjacent cells, row-major."""
    out = []
    for p in range(rows * cols):
        r, c = divmod(p, cols)
        for dr, dc in ((-1, 0), (0, -1), (0, 1), (1, 0)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < rows and 0 <= cc < cols:
                out.append((p, rr * cols + cc))
    return out


def _check_moves(moves, N):
    for p, q in moves:
        if not (0 <= p < N and 0 <= q < N) or p == q:
            raise ConfigError("unsupported-parameter-combination", f"bad move ({p}, {q})")


def stp_standard(rows: int, cols: int, move_table=None, name=None):
    """Cell i holds the tile at grid cell i (row-major) or ``B``."""
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ConfigError("unsupported-parameter-combination", "puzzle needs at least two cells")
    N = rows * cols
    moves = list(move_table) if move_table is not None else grid_moves(rows, cols)
    _check_moves(moves, N)
    tiles = [str(t) for t in range(1, N)]
    w = _Writer(name or f"stp_{rows}x{cols}", tiles + ["B"], N)
    for p, q in moves:
        w.op(f"b{p}_{q}", {p: "B", q: "$X"}, {p: "$X", q: "B"})
    w.goal = tiles + ["B"]
    aliases = {f"cells {i}": [i] for i in range(N)}
    aliases.update({f"locations {i + 1}": [i] for i in range(N)})  # 1-based vector positions
    return w.text(), Meta("STP-standard", aliases=aliases)


def stp_dual(rows: int, cols: int, move_table=None, name=None):
    """Component i holds the (1-based) cell of tile i+1; the last one holds the blank's cell."""
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ConfigError("unsupported-parameter-combination", "puzzle needs at least two cells")
    N = rows * cols
    moves = list(move_table) if move_table is not None else grid_moves(rows, cols)
    _check_moves(moves, N)
    cells = [str(c) for c in range(1, N + 1)]
    w = _Writer(name or f"stp_dual_{rows}x{cols}", cells, N)
    for p, q in moves:
        for t in range(N - 1):
            w.op(f"b{p}_{q}_t{t + 1}", {t: cells[q], N - 1: cells[p]}, {t: cells[p], N - 1: cells[q]})
    w.goal = list(cells)
    aliases = {f"tiles {t}": [t - 1] for t in range(1, N)}
    aliases["blank"] = [N - 1]
    aliases["tiles blank"] = [N - 1]
    aliases.update({f"locations {i + 1}": [i] for i in range(N)})
    return w.text(), Meta("STP-dual", aliases=aliases)


def stp_standard_to_dual(layout):
    """Standard layout (cell -> tile name or 'B') to the dual vector of 1-based cells."""
    N = len(layout)
    pos = {str(v): i + 1 for i, v in enumerate(layout)}
    return [str(pos[str(t)]) for t in range(1, N)] + [str(pos["B"])]


def cstp_default_moves(rows: int, cols: int) -> list:
    """Illustrative constrained move set: vertical moves are only allowed in the outer columns
    and in every other inner column. Symmetric, so every move stays invertible."""
    keep = []
    for p, q in grid_moves(rows, cols):
        pr, pc = divmod(p, cols)
        qr, qc = divmod(q, cols)
        if pr != qr and 0 < pc < cols - 1 and pc % 2 == 1:
            continue
        keep.append((p, q))
    return keep


def cstp(rows: int, cols: int, move_table=None):
    moves = list(move_table) if move_table is not None else cstp_default_moves(rows, cols)
    inverse = {(q, p) for p, q in moves}
    if inverse != set(moves):
        raise ConfigError("unsupported-parameter-combination", "constrained moves must be invertible")
    text, meta = stp_standard(rows, cols, moves, name=f"cstp_{rows}x{cols}")
    meta.family = "CSTP"
    return text, meta


# --- Scanalyzer ------------------------------------------------------------------------


def scanalyzer_default_moves(n: int) -> list:
    """Every upper belt rotates with every lower belt; the topmost and bottommost belts
    additionally rotate-and-analyze."""
    half = n // 2
    moves = [("rotate", i, j) for i in range(half) for j in range(half, n)]
    moves.append(("analyze", 0, n - 1))
    return moves


def scanalyzer(n: int, move_table=None):
    """Belt i owns cells 2i (batch name) and 2i+1 (analyzed flag)."""
    if n < 2 or n % 2:
        raise ConfigError("unsupported-parameter-combination", "Scanalyzer needs an even number of belts >= 2")
    moves = list(move_table) if move_table is not None else scanalyzer_default_moves(n)
    batches = [f"b{i}" for i in range(n)]
    w = _Writer(f"scanalyzer_{n}", batches + ["0", "1"], 2 * n)
    for i in range(n):
        w.positions[2 * i] = batches
        w.positions[2 * i + 1] = ["0", "1"]
    for kind, i, j in moves:
        if not (0 <= i < n and 0 <= j < n) or i == j or kind not in ("rotate", "analyze"):
            raise ConfigError("unsupported-parameter-combination", f"bad move {(kind, i, j)}")
        lhs = {2 * i: "$X", 2 * i + 1: "$F", 2 * j: "$Y", 2 * j + 1: "$G"}
        if kind == "rotate":
            rhs = {2 * i: "$Y", 2 * i + 1: "$G", 2 * j: "$X", 2 * j + 1: "$F"}
        else:
            # the batch leaving belt i is analyzed on its way to belt j
            rhs = {2 * i: "$Y", 2 * i + 1: "$G", 2 * j: "$X", 2 * j + 1: "1"}
        w.op(f"{kind}_{i}_{j}", lhs, rhs)
    goal = []
    start = []
    for i in range(n):
        goal += [batches[i], "1"]
        start += [batches[i], "0"]
    w.goal = goal
    aliases = {f"belts {i}": [2 * i] for i in range(n)}
    aliases.update({f"bln_analyzed {i}": [2 * i + 1] for i in range(n)})
    return w.text(), Meta("Scanalyzer-standard", aliases=aliases, seed=start)


# --- Blocks world with table positions -----------------------------------------------


def _blocks(n):
    if not 1 <= n <= 26:
        raise ConfigError("unsupported-parameter-combination", "1..26 blocks supported")
    return [chr(ord("a") + i) for i in range(n)]


def bw_top(n: int, p: int):
    """Cells: hand, the block directly on each table position, the block directly on each block."""
    B = _blocks(n)
    if p < 1:
        raise ConfigError("unsupported-parameter-combination", "need at least one table position")
    L = 1 + p + n
    w = _Writer(f"bw_top_{n}x{p}", ["0"] + B, L)
    on = lambda x: 1 + p + B.index(x)
    for x in B:
        w.positions[on(x)] = ["0"] + [y for y in B if y != x]
    for t in range(p):
        for x in B:
            w.op(f"pick_{x}_t{t + 1}", {0: "0", 1 + t: x, on(x): "0"}, {0: x, 1 + t: "0"})
    for y in B:
        for x in B:
            if x != y:
                w.op(f"pick_{x}_{y}", {0: "0", on(y): x, on(x): "0"}, {0: x, on(y): "0"})
    for t in range(p):
        for x in B:
            w.op(f"put_{x}_t{t + 1}", {0: x, 1 + t: "0"}, {0: "0", 1 + t: x})
    for y in B:
        for x in B:
            if x != y:
                w.op(f"stack_{x}_{y}", {0: x, on(y): "0"}, {0: "0", on(y): x})
    goal = ["0"] * L
    goal[1] = B[0]
    for a, b in zip(B, B[1:]):
        goal[on(a)] = b
    w.goal = goal
    aliases = {"hand": [0]}
    aliases.update({f"tp {t + 1}": [1 + t] for t in range(p)})
    aliases.update({f"on {x}": [on(x)] for x in B})
    return w.text(), Meta("BW-top", aliases=aliases)


def bw_height(n: int, p: int):
    """Cells: hand, then (table position, height, covered flag) per block, then a flag per table position."""
    B = _blocks(n)
    if p < 1:
        raise ConfigError("unsupported-parameter-combination", "need at least one table position")
    L = 1 + 3 * n + p
    nums = [str(v) for v in range(0, max(n, p) + 1)]
    w = _Writer(f"bw_height_{n}x{p}", nums + B, L)
    tp = lambda x: 1 + 3 * B.index(x)
    hg = lambda x: tp(x) + 1
    cv = lambda x: tp(x) + 2
    fl = lambda t: 1 + 3 * n + t
    w.positions[0] = ["0"] + B
    for x in B:
        w.positions[tp(x)] = [str(v) for v in range(p + 1)]
        w.positions[hg(x)] = [str(v) for v in range(n + 1)]
        w.positions[cv(x)] = ["0", "1"]
    for t in range(p):
        w.positions[fl(t)] = ["0", "1"]
    for x in B:
        for t in range(p):
            w.op(f"pick_{x}_t{t + 1}", {0: "0", tp(x): str(t + 1), hg(x): "1", cv(x): "0"},
                 {0: x, tp(x): "0", hg(x): "0", fl(t): "0"})
    for x in B:
        for y in B:
            if x == y:
                continue
            for t in range(p):
                for h in range(2, n + 1):
                    w.op(f"pick_{x}_{y}_t{t + 1}_h{h}",
                         {0: "0", tp(x): str(t + 1), hg(x): str(h), cv(x): "0", tp(y): str(t + 1), hg(y): str(h - 1)},
                         {0: x, tp(x): "0", hg(x): "0", cv(y): "0"})
    for x in B:
        for t in range(p):
            w.op(f"put_{x}_t{t + 1}", {0: x, fl(t): "0"}, {0: "0", tp(x): str(t + 1), hg(x): "1", fl(t): "1"})
    for x in B:
        for y in B:
            if x == y:
                continue
            for t in range(p):
                for h in range(1, n):
                    w.op(f"stack_{x}_{y}_t{t + 1}_h{h}",
                         {0: x, tp(y): str(t + 1), hg(y): str(h), cv(y): "0"},
                         {0: "0", tp(x): str(t + 1), hg(x): str(h + 1), cv(y): "1"})
    goal = ["0"] * L
    for i, x in enumerate(B):
        goal[tp(x)] = "1"
        goal[hg(x)] = str(i + 1)
        goal[cv(x)] = "1" if i < n - 1 else "0"
    goal[fl(0)] = "1"
    w.goal = goal
    aliases = {"hand": [0]}
    aliases.update({f"tp {x}": [tp(x)] for x in B})
    aliases.update({f"hgh {x}": [hg(x)] for x in B})
    aliases.update({f"bln_on {x}": [cv(x)] for x in B})
    aliases.update({f"bln_on_tp {t + 1}": [fl(t)] for t in range(p)})
    return w.text(), Meta("BW-height", aliases=aliases)


def bw_stack(n: int, p: int):
    """Cells: hand, then per table position a block count followed by n slots (bottom first)."""
    B = _blocks(n)
    if p < 1:
        raise ConfigError("unsupported-parameter-combination", "need at least one table position")
    L = 1 + p * (n + 1)
    nums = [str(v) for v in range(n + 1)]
    w = _Writer(f"bw_stack_{n}x{p}", nums + B, L)
    base = lambda t: 1 + t * (n + 1)
    w.positions[0] = ["0"] + B
    for t in range(p):
        w.positions[base(t)] = nums
        for k in range(1, n + 1):
            w.positions[base(t) + k] = ["0"] + B
    for t in range(p):
        for k in range(1, n + 1):
            for x in B:
                w.op(f"pick_{x}_t{t + 1}_k{k}", {0: "0", base(t): str(k), base(t) + k: x},
                     {0: x, base(t): str(k - 1), base(t) + k: "0"})
    for t in range(p):
        for k in range(0, n):
            for x in B:
                w.op(f"put_{x}_t{t + 1}_k{k}", {0: x, base(t): str(k), base(t) + k + 1: "0"},
                     {0: "0", base(t): str(k + 1), base(t) + k + 1: x})
    goal = ["0"] * L
    goal[base(0)] = str(n)
    for i, x in enumerate(B):
        goal[base(0) + 1 + i] = x
    w.goal = goal
    aliases = {"hand": [0]}
    aliases.update({f"tps {t + 1}": list(range(base(t), base(t) + n + 1)) for t in range(p)})
    return w.text(), Meta("BW-stack", aliases=aliases)


def bw_layout(hand, stacks, n, p):
    """Normalize a blocks-world configuration: ``stacks[t]`` lists blocks bottom first."""
    B = _blocks(n)
    if len(stacks) != p:
        raise ConfigError("bad-state", "one stack per table position required")
    seen = [x for s in stacks for x in s] + ([hand] if hand else [])
    if sorted(seen) != B:
        raise ConfigError("bad-state", "every block must appear exactly once")
    return hand, [list(s) for s in stacks]


def bw_encode_top(hand, stacks, n, p):
    hand, stacks = bw_layout(hand, stacks, n, p)
    B = _blocks(n)
    out = [hand or "0"] + ["0"] * (p + n)
    for t, s in enumerate(stacks):
        if s:
            out[1 + t] = s[0]
        for a, b in zip(s, s[1:]):
            out[1 + p + B.index(a)] = b
    return out


def bw_encode_height(hand, stacks, n, p):
    hand, stacks = bw_layout(hand, stacks, n, p)
    B = _blocks(n)
    out = [hand or "0"] + ["0"] * (3 * n + p)
    for t, s in enumerate(stacks):
        for h, x in enumerate(s, start=1):
            i = 1 + 3 * B.index(x)
            out[i] = str(t + 1)
            out[i + 1] = str(h)
            out[i + 2] = "1" if h < len(s) else "0"
        if s:
            out[1 + 3 * n + t] = "1"
    return out


def bw_encode_stack(hand, stacks, n, p):
    hand, stacks = bw_layout(hand, stacks, n, p)
    out = [hand or "0"]
    for s in stacks:
        out += [str(len(s))] + list(s) + ["0"] * (n - len(s))
    return out


# --- dispatch ----------------------------------------------------------------------------

FAMILIES = {
    "ToH-binary": (hanoi_binary, ("disks", "pegs")),
    "ToH-disk": (hanoi_disk, ("disks", "pegs")),
    "ToH-stack": (hanoi_stack, ("disks", "pegs")),
    "BW-top": (bw_top, ("blocks", "positions")),
    "BW-height": (bw_height, ("blocks", "positions")),
    "BW-stack": (bw_stack, ("blocks", "positions")),
    "STP-standard": (stp_standard, ("rows", "cols")),
    "STP-dual": (stp_dual, ("rows", "cols")),
    "Scanalyzer-standard": (scanalyzer, ("belts",)),
    "CSTP": (cstp, ("rows", "cols")),
}

_TAKES_MOVES = {"STP-standard", "STP-dual", "Scanalyzer-standard", "CSTP"}


def generate(spec: GeneratorSpec):
    """PSVN text and metadata for ``spec``."""
    if spec.family not in FAMILIES:
        raise ConfigError("unsupported-parameter-combination", f"unknown family {spec.family!r}")
    fn, names = FAMILIES[spec.family]
    if len(spec.params) != len(names) or any(int(v) <= 0 for v in spec.params):
        raise ConfigError("unsupported-parameter-combination",
                          f"{spec.family} takes positive {', '.join(names)}")
    kwargs = dict(spec.options)
    if spec.move_table is not None:
        if spec.family not in _TAKES_MOVES:
            raise ConfigError("unsupported-parameter-combination", f"{spec.family} takes no move table")
        kwargs["move_table"] = spec.move_table
    text, meta = fn(*(int(v) for v in spec.params), **kwargs)
    return text, meta


def parse_spec(text: str) -> GeneratorSpec:
    """``ToH-stack 9 4`` / ``STP-dual 3 3`` / ``Scanalyzer-standard 6`` plus optional ``key=value`` options."""
    tokens = text.split()
    if not tokens:
        raise ConfigError("bad-generator-spec", "empty generator spec")
    params = []
    options = []
    for t in tokens[1:]:
        if "=" in t:
            k, v = t.split("=", 1)
            options.append((k, {"true": True, "false": False}.get(v.lower(), v)))
        else:
            try:
                params.append(int(t))
            except ValueError:
                raise ConfigError("bad-generator-spec", f"bad parameter {t!r}") from None
    return GeneratorSpec(tokens[0], tuple(params), None, tuple(options))


def is_heavy(spec: GeneratorSpec) -> bool:
    """Presets too large to enumerate on a desktop; the CLI runs them only with ``--heavy``."""
    p = tuple(spec.params)
    if spec.family.startswith(("STP", "CSTP")):
        return p[0] * p[1] >= 12
    if spec.family.startswith("BW"):
        return p[0] >= 12
    if spec.family.startswith("ToH"):
        return p[0] >= 12
    if spec.family.startswith("Scanalyzer"):
        return p[0] >= 10
    return False


# fingerprints: (reachable states, average goal distance or None)
FINGERPRINTS = {
    ("ToH-stack", (9, 4)): (262_144, 29.39),
    ("ToH-disk", (9, 4)): (262_144, 29.39),
    ("ToH-binary", (9, 4)): (262_144, 29.39),
    ("STP-dual", (3, 3)): (181_440, None),
    ("STP-standard", (3, 3)): (181_440, None),
    ("STP-standard", (2, 2)): (12, None),
    ("STP-dual", (2, 2)): (12, None),
    ("Scanalyzer-standard", (6,)): (46_080, 8.34),
    # aspirational: the constrained move sets are only available as drawings
    ("CSTP", (3, 4)): (2_177_280, None),
    ("CSTP", (4, 5)): (1_814_400, None),
}


@dataclass
class ValidationReport:
    family: str
    params: tuple
    states: int
    avg_distance: float
    expected_states: Optional[int]
    expected_avg: Optional[float]

    @property
    def ok(self) -> bool:
        if self.expected_states is not None and self.states != self.expected_states:
            return False
        if self.expected_avg is not None and abs(self.avg_distance - self.expected_avg) > 0.005:
            return False
        return True


def seed_state(domain, meta: Meta):
    return domain.encode(meta.seed) if meta.seed is not None else domain.goal


def validate(spec: GeneratorSpec, raise_on_mismatch: bool = True) -> ValidationReport:
    from .errors import FingerprintMismatch
    from .psvn import parse_domain
    from .reachability import avg_distance, enumerate_states

    text, meta = generate(spec)
    d = parse_domain(text)
    r = enumerate_states(d, seed_state(d, meta))
    avg = avg_distance(r, d.goal)
    exp = FINGERPRINTS.get((spec.family, tuple(spec.params)), (None, None))
    rep = ValidationReport(spec.family, tuple(spec.params), len(r), avg, exp[0], exp[1])
    if raise_on_mismatch and not rep.ok:
        raise FingerprintMismatch(
            f"{spec.family} {spec.params}: {rep.states} states, avg {rep.avg_distance:.4f}; "
            f"expected {exp[0]} states, avg {exp[1]}")
    return rep
