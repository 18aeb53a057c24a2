"""Experiment pipeline: build PDB variants for one abstraction and report on them.

A config is a flat ``key = value`` text file::

    generator   = ToH-stack 9 4          # or: domain = path/to/file.psvn
    abstraction = toh_1789.abs           # or: abstraction_inline = map 1 <- 1,7,8,9
    variants    = ORGN, MTX_EXH, TRUE
    eval        = full                   # full | sampled | none
    samples     = 1000
    rng_seed    = 1
    output      = out/toh_1789

Relative paths resolve against the config file's directory. ``;`` separates
lines inside ``abstraction_inline``.
"""
from __future__ import annotations

import csv
import io
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import metrics
from . import pdb as P
from .abstraction import bind, parse_abstraction
from .domains import Meta, generate, parse_spec, seed_state
from .errors import ConfigError, SearchError
from .mutex import exhaustive_pairs, ground, h2_pairs
from .psvn import Domain, load_domain, parse_domain
from .reachability import enumerate_states
from .search import NO_LIMIT, GraphSearch

CSV_VERSION = 1
CSV_COLUMNS = ("variant", "entries", "size_bytes", "avg_h", "avg_nodes", "mean_ratio_vs_true",
               "pct_improve_vs_orgn", "dominance_ok")
EVAL_MODES = ("full", "sampled", "none")
_ENUMERATING = {P.MTX_EXH, P.TRUE, P.PURE}
_KNOWN_KEYS = {"generator", "domain", "meta", "seed", "abstraction", "abstraction_inline", "variants",
               "eval", "samples", "rng_seed", "output", "threads", "max_nodes", "name"}


@dataclass
class ExperimentConfig:
    generator: Optional[str] = None
    domain: Optional[Path] = None
    meta: Optional[Path] = None
    seed: str = "default"  # default (generator seed, else goal) | goal | explicit symbols
    abstraction: Optional[str] = None  # abstraction text
    variants: tuple = (P.ORGN, P.TRUE)
    eval: str = "full"
    samples: int = 1000
    rng_seed: int = 0
    output: Optional[Path] = None
    threads: int = 1
    max_nodes: int = NO_LIMIT
    name: str = "experiment"

    def validate(self) -> None:
        if (self.generator is None) == (self.domain is None):
            raise ConfigError("bad-config", "give exactly one of 'generator' and 'domain'")
        if self.abstraction is None:
            raise ConfigError("bad-config", "no abstraction given")
        bad = [v for v in self.variants if v not in P.VARIANTS]
        if bad or not self.variants:
            raise ConfigError("bad-config", f"unknown variants {bad}; choose from {', '.join(P.VARIANTS)}")
        if len(set(self.variants)) != len(self.variants):
            raise ConfigError("bad-config", "variant listed twice")
        if self.eval not in EVAL_MODES:
            raise ConfigError("bad-config", f"eval must be one of {', '.join(EVAL_MODES)}")
        if self.samples < 0 or self.threads < 1 or self.max_nodes < 1:
            raise ConfigError("bad-config", "samples must be >= 0, threads and max_nodes >= 1")

    @property
    def needs_enumeration(self) -> bool:
        return self.eval != "none" or bool(_ENUMERATING & set(self.variants))


def _int(key, v):
    try:
        return int(v)
    except ValueError:
        raise ConfigError("bad-config", f"{key} must be an integer, got {v!r}") from None


def parse_config(text: str, base: Optional[Path] = None) -> ExperimentConfig:
    base = Path(base) if base is not None else Path(".")
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("bad-config", f"line {lineno}: expected 'key = value'")
        k, v = (x.strip() for x in line.split("=", 1))
        if k not in _KNOWN_KEYS:
            raise ConfigError("bad-config", f"line {lineno}: unknown key {k!r}")
        if k in raw:
            raise ConfigError("bad-config", f"line {lineno}: {k!r} given twice")
        raw[k] = v
    cfg = ExperimentConfig()
    cfg.generator = raw.get("generator")
    if "domain" in raw:
        cfg.domain = base / raw["domain"]
    if "meta" in raw:
        cfg.meta = base / raw["meta"]
    cfg.seed = raw.get("seed", "default")
    if "abstraction" in raw and "abstraction_inline" in raw:
        raise ConfigError("bad-config", "give one of 'abstraction' and 'abstraction_inline'")
    if "abstraction" in raw:
        path = base / raw["abstraction"]
        try:
            cfg.abstraction = path.read_text()
        except OSError as e:
            raise ConfigError("bad-config", f"cannot read abstraction file {path}: {e}") from None
    elif "abstraction_inline" in raw:
        cfg.abstraction = raw["abstraction_inline"].replace(";", "\n")
    if "variants" in raw:
        cfg.variants = tuple(v.strip().upper() for v in raw["variants"].split(",") if v.strip())
    cfg.eval = raw.get("eval", cfg.eval)
    cfg.samples = _int("samples", raw.get("samples", cfg.samples))
    cfg.rng_seed = _int("rng_seed", raw.get("rng_seed", cfg.rng_seed))
    cfg.threads = _int("threads", raw.get("threads", cfg.threads))
    if "max_nodes" in raw:
        cfg.max_nodes = _int("max_nodes", raw["max_nodes"])
    cfg.name = raw.get("name", cfg.name)
    if "output" in raw:
        cfg.output = base / raw["output"]
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError("bad-config", f"cannot read config {path}: {e}") from None
    return parse_config(text, path.parent)


# --- pipeline ----------------------------------------------------------------------------


@dataclass
class VariantResult:
    variant: str
    entries: int
    size_bytes: int
    avg_h: Optional[float]
    nodes: Optional[list]  # per sampled instance
    start_h: Optional[list]
    ratio_vs_true: Optional[metrics.RatioSummary] = None
    pct_vs_orgn: Optional[Fraction] = None

    @property
    def avg_nodes(self) -> Optional[float]:
        if not self.nodes:
            return None
        return float(Fraction(sum(self.nodes), len(self.nodes)))


@dataclass
class Report:
    config: ExperimentConfig
    domain: Domain
    reachable: Optional[int]
    sample: list  # state indices
    lengths: list  # optimal solution lengths per instance
    rows: list = field(default_factory=list)
    monotone_violations: dict = field(default_factory=dict)

    def row(self, variant: str) -> VariantResult:
        for r in self.rows:
            if r.variant == variant:
                return r
        raise KeyError(variant)


def load_experiment_domain(cfg: ExperimentConfig):
    if cfg.generator is not None:
        text, meta = generate(parse_spec(cfg.generator))
        d = parse_domain(text)
    else:
        d = load_domain(cfg.domain)
        meta = Meta(family="file")
        mp = cfg.meta or cfg.domain.with_suffix(".meta")
        if mp.exists():
            meta = Meta.from_text(mp.read_text())
    if cfg.seed == "default":
        seed = seed_state(d, meta)
    elif cfg.seed == "goal":
        seed = d.goal
    else:
        seed = d.encode(cfg.seed.split())
    return d, meta, tuple(seed)


def _ratio_pairs(nodes, ref):
    # start == goal costs zero expansions under every heuristic; such 0/0 instances are left out
    keep = [i for i, b in enumerate(ref) if b > 0]
    return [nodes[i] for i in keep], [ref[i] for i in keep]


def run(cfg: ExperimentConfig, write: bool = True) -> Report:
    cfg.validate()
    d, meta, seed = load_experiment_domain(cfg)
    psi = bind(parse_abstraction(cfg.abstraction, meta.aliases), d)
    ad = psi.domain(d)
    k = len(d.alphabet)

    r = enumerate_states(d, seed) if cfg.needs_enumeration else None
    abs_states = psi.states_array(r.states) if r is not None else None

    sample, lengths, gs = [], [], None
    if r is not None and cfg.eval != "none" and cfg.samples:
        goal_index = r.index_of(d.goal)
        if goal_index < 0:
            raise SearchError("no-solution", "goal is not reachable from the seed state")
        rng = np.random.default_rng(cfg.rng_seed)
        sample = [int(i) for i in rng.choice(len(r), size=cfg.samples, replace=True)]
        gs = GraphSearch(r, goal_index)

    built = {}
    for v in cfg.variants:
        if v == P.ORGN:
            f = None
        elif v == P.MTX_EXH:
            f = P.MutexFilter(psi.pair_image(exhaustive_pairs(r.states, k)))
        elif v == P.MTX_H2:
            table = h2_pairs(ground(d), seed, d.position_domains, k)
            f = P.MutexFilter(psi.pair_image(table))
        elif v == P.TRUE:
            f = P.StateSet(abs_states)
        else:
            f = P.EdgeSet(abs_states[r.edges.src], abs_states[r.edges.dst])
        built[v] = P.build(ad, f, variant=v, psi=psi)

    report = Report(cfg, d, len(r) if r is not None else None, sample, lengths)
    for v, p in built.items():
        avg, nodes, start_h = None, None, None
        if r is not None and cfg.eval != "none":
            h = P.h_values(p, r.states)
            evaluated = h if cfg.eval == "full" else h[sample]
            if len(evaluated):
                if np.isinf(evaluated).any():
                    raise SearchError("infinite-h-encountered", f"{v}: some evaluated states have no entry")
                avg = float(evaluated.mean())
            if gs is not None:
                hi = np.where(np.isinf(h), -1, h).astype(np.int64)

                def solve(i, hi=hi):
                    return gs.solve(i, hi, max_nodes=cfg.max_nodes)

                with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
                    results = list(ex.map(solve, sample))
                nodes = [x.nodes_expanded for x in results]
                start_h = [int(hi[i]) for i in sample]
                if not lengths:
                    lengths.extend(x.solution_length for x in results)
                elif lengths != [x.solution_length for x in results]:
                    raise SearchError("inconsistent-lengths", f"{v} found different solution lengths")
        report.rows.append(VariantResult(v, p.count, p.size_bytes(), avg, nodes, start_h))

    _compare(report)
    if write:
        write_outputs(report)
    return report


def _compare(report: Report) -> None:
    rows = {x.variant: x for x in report.rows}
    true, orgn = rows.get(P.TRUE), rows.get(P.ORGN)
    for x in report.rows:
        if x.nodes and true is not None and true.nodes:
            a, b = _ratio_pairs(x.nodes, true.nodes)
            if a:
                x.ratio_vs_true = metrics.avg_of_ratios(a, b)
        if x.start_h and orgn is not None and orgn.start_h:
            keep = [i for i, b in enumerate(orgn.start_h) if b > 0]
            if keep:
                x.pct_vs_orgn = metrics.pct_improvement([orgn.start_h[i] for i in keep],
                                                        [x.start_h[i] for i in keep])
    order = [v for v in (P.ORGN, P.MTX_EXH, P.MTX_H2, P.TRUE, P.PURE) if v in rows and rows[v].nodes]
    for hi, lo in zip(order, order[1:]):
        a, b = rows[hi], rows[lo]
        dominated = all(x <= y for x, y in zip(a.start_h, b.start_h))
        bad = sum(1 for x, y in zip(a.nodes, b.nodes) if x < y)
        report.monotone_violations[(hi, lo)] = (bad, dominated)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return metrics.format_ratio(x)


def summary_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for x in report.rows:
        rs = x.ratio_vs_true
        w.writerow([x.variant, x.entries, x.size_bytes, _fmt(x.avg_h), _fmt(x.avg_nodes),
                    _fmt(rs.mean_ratio if rs else None), _fmt(x.pct_vs_orgn),
                    _fmt(rs.dominance_ok if rs else None)])
    return buf.getvalue()


def histogram_text(values, width) -> str:
    return "".join(f"{metrics.format_bucket(b)} {c}\n" for b, c in metrics.histogram(values, width))


def histograms(report: Report) -> dict:
    """File name -> two-column text: per-instance node ratios in unit and 0.1 buckets."""
    rows = {x.variant: x for x in report.rows}
    out = {}
    for ref, width, tag in ((P.TRUE, 1, "vs_true"), (P.ORGN, Fraction(1, 10), "vs_orgn")):
        base = rows.get(ref)
        if base is None or not base.nodes:
            continue
        for x in report.rows:
            if x.variant == ref or not x.nodes:
                continue
            a, b = _ratio_pairs(x.nodes, base.nodes)
            out[f"hist_{x.variant}_{tag}.txt"] = histogram_text([Fraction(p, q) for p, q in zip(a, b)], width)
    return out


def report_text(report: Report) -> str:
    cfg = report.config
    lines = [f"name {cfg.name}", f"csv_version {CSV_VERSION}", f"domain {report.domain.name}",
             f"state_len {report.domain.state_len}", f"operators {len(report.domain.operators)}"]
    if report.reachable is not None:
        lines.append(f"reachable {report.reachable}")
    lines.append(f"samples {len(report.sample)} rng_seed {cfg.rng_seed}")
    if report.lengths:
        lines.append(f"avg_solution_length {metrics.format_ratio(Fraction(sum(report.lengths), len(report.lengths)))}")
    rows = {x.variant: x for x in report.rows}
    if P.ORGN in rows and P.TRUE in rows:
        spurious = rows[P.ORGN].entries - rows[P.TRUE].entries
        ratio = None
        if rows[P.ORGN].avg_nodes is not None and rows[P.TRUE].avg_nodes:
            ratio = Fraction(sum(rows[P.ORGN].nodes), sum(rows[P.TRUE].nodes))
        lines.append(f"spurious {spurious} nonspurious {rows[P.TRUE].entries}")
        if ratio is not None:
            lines.append(f"category {' / '.join(category(spurious, rows[P.TRUE].entries, ratio))}")
    for (hi, lo), (bad, dominated) in report.monotone_violations.items():
        lines.append(f"monotone {hi}>={lo} violations {bad} h_dominance {'yes' if dominated else 'no'}")
    return "\n".join(lines) + "\n"


def write_outputs(report: Report) -> None:
    out = report.config.output
    if out is None:
        return
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = {"summary.csv": summary_csv(report), "report.txt": report_text(report)}
    files.update(histograms(report))
    for name, text in files.items():
        with open(out / name, "w", newline="") as fh:
            fh.write(text)


# --- categorization ----------------------------------------------------------------------


@dataclass
class ClassifyRow:
    spurious: int
    nonspurious: int
    ratio: Fraction  # ORGN nodes / TRUE nodes


def category(spurious: int, nonspurious: int, ratio) -> tuple:
    size = "spurious>=nonspurious" if spurious >= nonspurious else "spurious<nonspurious"
    speed = "IDA* slow" if metrics.exact(ratio) > 2 else "IDA* normal"
    return size, speed


def classify(rows) -> Counter:
    """Count rows per (size, speed) category; slow means strictly more than twice the nodes."""
    return Counter(category(r.spurious, r.nonspurious, r.ratio) for r in rows)
