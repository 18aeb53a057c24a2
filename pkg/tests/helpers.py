from __future__ import annotations

import numpy as np

from spurion import pdb as P
from spurion.abstraction import bind, parse_abstraction
from spurion.domains import GeneratorSpec, generate, seed_state
from spurion.mutex import exhaustive_pairs, ground, h2_pairs
from spurion.psvn import parse_domain
from spurion.reachability import enumerate_states, goal_distances


def make(family, *params, **options):
    text, meta = generate(GeneratorSpec(family, tuple(params), None, tuple(options.items())))
    return parse_domain(text), meta


def space(family, *params, **options):
    d, meta = make(family, *params, **options)
    r = enumerate_states(d, seed_state(d, meta))
    return d, meta, r


def abstraction(text, d, meta=None):
    return bind(parse_abstraction(text, meta.aliases if meta else None), d)


def build_all(d, psi, r, variants=P.VARIANTS, seed=None):
    """Every requested PDB variant of ``psi`` over the reachable set ``r``."""
    ad = psi.domain(d)
    k = len(d.alphabet)
    img = psi.states_array(r.states)
    out = {}
    for v in variants:
        if v == P.ORGN:
            f = None
        elif v == P.MTX_EXH:
            f = P.MutexFilter(psi.pair_image(exhaustive_pairs(r.states, k)))
        elif v == P.MTX_H2:
            f = P.MutexFilter(psi.pair_image(h2_pairs(ground(d), seed or r.seed, d.position_domains, k)))
        elif v == P.TRUE:
            f = P.StateSet(img)
        else:
            f = P.EdgeSet(img[r.edges.src], img[r.edges.dst])
        out[v] = P.build(ad, f, variant=v, psi=psi)
    return out


def distances(r, d):
    dist = goal_distances(r, d.goal)
    assert (dist >= 0).all()
    return dist


def hvec(p, r):
    h = P.h_values(p, r.states)
    return np.where(np.isinf(h), -1, h).astype(np.int64)
