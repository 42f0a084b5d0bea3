"""Random polynomials for property tests (plain numpy and hypothesis)."""
from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from measos.polyalg import Poly, VarSpace


def random_poly(rng: np.random.Generator, space: VarSpace, max_deg: int = 3,
                n_terms: int = 5) -> Poly:
    terms = {}
    for _ in range(n_terms):
        e = [0] * space.n
        for _ in range(int(rng.integers(0, max_deg + 1))):
            e[int(rng.integers(space.n))] += 1
        terms[tuple(e)] = float(rng.uniform(-2, 2))
    return Poly(space, terms)


def polys(space: VarSpace, max_deg: int = 3, max_terms: int = 5):
    exps = st.lists(st.integers(0, space.n - 1), max_size=max_deg).map(
        lambda idx: tuple(idx.count(k) for k in range(space.n)))
    coeffs = st.floats(-2, 2, allow_nan=False, allow_infinity=False)
    return st.dictionaries(exps, coeffs, max_size=max_terms).map(lambda t: Poly(space, t))
