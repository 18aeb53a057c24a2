"""Command line entry point: ``spurion gen|enumerate|mutex|pdb|solve|experiment``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from . import pdb as P
from .abstraction import bind, parse_abstraction
from .domains import Meta, generate, is_heavy, parse_spec, seed_state, validate
from .errors import ConfigError, SpurionError
from .mutex import exhaustive_pairs, ground, h2_pairs
from .psvn import load_domain, parse_domain
from .reachability import avg_distance, dump, enumerate_states
from .search import ida_star


def _open_domain(arg: str, heavy: bool):
    """A .psvn path (with an optional sibling .meta) or a generator spec such as ``"ToH-stack 9 4"``."""
    path = Path(arg)
    if path.is_file():
        d = load_domain(path)
        mp = path.with_suffix(".meta")
        meta = Meta.from_text(mp.read_text()) if mp.exists() else Meta(family="file")
        return d, meta, None
    spec = parse_spec(arg)
    if is_heavy(spec) and not heavy:
        raise ConfigError("heavy-preset", f"{arg!r} is a heavy preset; pass --heavy to run it")
    text, meta = generate(spec)
    return parse_domain(text), meta, spec


def _seed(d, meta, text):
    if text in (None, "default"):
        return tuple(seed_state(d, meta))
    if text == "goal":
        return tuple(d.goal)
    return tuple(d.encode(text.split()))


def _abstraction(d, meta, path):
    return bind(parse_abstraction(Path(path).read_text(), meta.aliases), d)


def cmd_gen(args):
    spec = parse_spec(args.spec)
    if is_heavy(spec) and not args.heavy:
        raise ConfigError("heavy-preset", f"{args.spec!r} is a heavy preset; pass --heavy to generate it")
    text, meta = generate(spec)
    out = Path(args.output)
    out.write_text(text)
    out.with_suffix(".meta").write_text(meta.to_text())
    print(f"wrote {out} and {out.with_suffix('.meta')}")
    if args.validate:
        rep = validate(spec)
        print(f"reachable {rep.states} avg_distance {rep.avg_distance:.4f} ok")


def cmd_enumerate(args):
    d, meta, _ = _open_domain(args.domain, args.heavy)
    r = enumerate_states(d, _seed(d, meta, args.seed))
    print(f"reachable {len(r)}")
    print(f"edges {len(r.edges)}")
    if r.index_of(d.goal) >= 0:
        print(f"avg_distance {avg_distance(r, d.goal):.4f}")
    if args.dump:
        dump(r, args.dump)


def cmd_mutex(args):
    d, meta, _ = _open_domain(args.domain, args.heavy)
    seed = _seed(d, meta, args.seed)
    k = len(d.alphabet)
    if args.method == "exhaustive":
        table = exhaustive_pairs(enumerate_states(d, seed, with_edges=False).states, k)
    else:
        table = h2_pairs(ground(d), seed, d.position_domains, k)
    text = table.dump(d)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _build(d, meta, psi, variant, seed):
    ad = psi.domain(d)
    k = len(d.alphabet)
    if variant == P.ORGN:
        return P.build(ad, None, variant=variant, psi=psi), None
    if variant == P.MTX_H2:
        table = h2_pairs(ground(d), seed, d.position_domains, k)
        return P.build(ad, P.MutexFilter(psi.pair_image(table)), variant=variant, psi=psi), None
    r = enumerate_states(d, seed)
    if variant == P.MTX_EXH:
        f = P.MutexFilter(psi.pair_image(exhaustive_pairs(r.states, k)))
    elif variant == P.TRUE:
        f = P.StateSet(psi.states_array(r.states))
    else:
        a = psi.states_array(r.states)
        f = P.EdgeSet(a[r.edges.src], a[r.edges.dst])
    return P.build(ad, f, variant=variant, psi=psi), r


def cmd_pdb(args):
    d, meta, _ = _open_domain(args.domain, args.heavy)
    psi = _abstraction(d, meta, args.abstraction)
    seed = _seed(d, meta, args.seed)
    p, r = _build(d, meta, psi, args.variant.upper(), seed)
    print(f"variant {p.variant}")
    print(f"entries {p.count}")
    print(f"size_bytes {p.size_bytes()} ({P.format_size(p.size_bytes())})")
    if args.avg_h:
        r = r or enumerate_states(d, seed, with_edges=False)
        print(f"avg_h {P.avg_h(p, r.states):.4f}")
    if args.output:
        p.save(args.output)


def cmd_solve(args):
    d, meta, _ = _open_domain(args.domain, args.heavy)
    psi = _abstraction(d, meta, args.abstraction)
    if args.pdb:
        p = P.load(args.pdb, psi)
    else:
        p, _ = _build(d, meta, psi, args.variant.upper(), _seed(d, meta, args.seed))
    start = tuple(d.encode(args.start.split()))
    d.check_state(start)
    res = ida_star(d, start, p, psi)
    print(f"solution_length {res.solution_length}")
    print(f"nodes_expanded {res.nodes_expanded}")
    print(f"nodes_generated {res.nodes_generated}")
    print(f"iterations {res.iterations}")


def cmd_experiment(args):
    cfg = harness.load_config(args.config)
    if args.threads:
        cfg.threads = args.threads
    if args.output:
        cfg.output = Path(args.output)
    if cfg.generator is not None and is_heavy(parse_spec(cfg.generator)) and not args.heavy:
        raise ConfigError("heavy-preset", f"{cfg.generator!r} is a heavy preset; pass --heavy to run it")
    report = harness.run(cfg)
    sys.stdout.write(harness.summary_csv(report))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="worker threads (results never depend on it)")
    common.add_argument("--heavy", action="store_true", help="allow presets too large for a desktop")

    ap = argparse.ArgumentParser(prog="spurion",
                                 description="Pattern databases with and without spurious abstract states.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="write a generated domain as .psvn plus .meta")
    g.add_argument("spec", help='generator spec, e.g. "ToH-stack 9 4"')
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--validate", action="store_true", help="check known reachability fingerprints")
    g.set_defaults(fn=cmd_gen)

    def domain_args(p):
        p.add_argument("domain", help="a .psvn file or a generator spec")
        p.add_argument("--seed", default="default", help="'goal', 'default' or the seed state's symbols")

    e = sub.add_parser("enumerate", parents=[common], help="count reachable states")
    domain_args(e)
    e.add_argument("--dump", help="write states and edges to a binary file")
    e.set_defaults(fn=cmd_enumerate)

    m = sub.add_parser("mutex", parents=[common], help="list mutex pairs")
    domain_args(m)
    m.add_argument("--method", choices=("exhaustive", "h2"), default="exhaustive")
    m.add_argument("-o", "--output")
    m.set_defaults(fn=cmd_mutex)

    p = sub.add_parser("pdb", parents=[common], help="build one PDB variant")
    domain_args(p)
    p.add_argument("--abstraction", required=True)
    p.add_argument("--variant", default=P.ORGN, type=str.upper, choices=P.VARIANTS)
    p.add_argument("--avg-h", action="store_true", help="average h over the reachable states")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_pdb)

    s = sub.add_parser("solve", parents=[common], help="solve one instance with IDA*")
    domain_args(s)
    s.add_argument("--abstraction", required=True)
    s.add_argument("--pdb", help="a saved PDB; built on the fly when omitted")
    s.add_argument("--variant", default=P.TRUE, type=str.upper, choices=P.VARIANTS)
    s.add_argument("--start", required=True, help="start state symbols, space separated")
    s.set_defaults(fn=cmd_solve)

    x = sub.add_parser("experiment", parents=[common], help="run a config through the full pipeline")
    x.add_argument("--config", required=True)
    x.add_argument("-o", "--output", help="output directory (overrides the config)")
    x.set_defaults(fn=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return ConfigError.exit_code
    try:
        args.fn(args)
    except SpurionError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return ConfigError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
