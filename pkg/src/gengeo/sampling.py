"""Seeded random exact data: polynomials, forms, sections."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from .clifford import GSection
from .scalar import ScalarExpr
from .tensor import Frame, MixedForm, PolyVector, exterior_d


def rng_for(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_coeff(rng: random.Random, bound: int = 3, gaussian: bool = False) -> ScalarExpr:
    re = Fraction(rng.randint(-bound, bound), rng.choice((1, 1, 2)))
    im = Fraction(rng.randint(-bound, bound), rng.choice((1, 1, 2))) if gaussian else 0
    return ScalarExpr(re, im)


def random_poly(rng: random.Random, variables, degree: int = 2, terms: int = 3,
                bound: int = 3, gaussian: bool = False) -> ScalarExpr:
    variables = list(variables)
    out = ScalarExpr(0)
    for _ in range(terms):
        mono = ScalarExpr(1)
        for _ in range(rng.randint(0, degree)):
            if variables:
                mono = mono * rng.choice(variables)
        out = out + random_coeff(rng, bound, gaussian) * mono
    return out


def random_form(rng: random.Random, frame: Frame, p: int, degree: int = 2, terms: int = 2,
                density: float = 0.6, gaussian: bool = False) -> MixedForm:
    coords = frame.chart.coords
    out = {}
    for idx in combinations(range(frame.n), p):
        if rng.random() < density:
            out[idx] = random_poly(rng, coords, degree, terms, gaussian=gaussian)
    return MixedForm(frame, out)


def random_vector(rng: random.Random, frame: Frame, degree: int = 2, terms: int = 2,
                  density: float = 0.7, gaussian: bool = False) -> PolyVector:
    coords = frame.chart.coords
    comps = [random_poly(rng, coords, degree, terms, gaussian=gaussian) if rng.random() < density
             else ScalarExpr(0) for _ in range(frame.n)]
    return PolyVector.vector(frame, comps)


def random_section(rng: random.Random, frame: Frame, degree: int = 2, terms: int = 2,
                   density: float = 0.7, gaussian: bool = False) -> GSection:
    X = random_vector(rng, frame, degree, terms, density, gaussian)
    xi = random_form(rng, frame, 1, degree, terms, density, gaussian)
    return GSection.from_parts(X, xi)


def random_closed_form(rng: random.Random, frame: Frame, p: int, degree: int = 2,
                       terms: int = 2) -> MixedForm:
    """d of a random (p-1)-form, so exactly closed; retried until nonzero."""
    for _ in range(50):
        out = exterior_d(random_form(rng, frame, p - 1, degree + 1, terms, density=0.8))
        if not out.is_zero():
            return out
    return out


def random_mixed_form(rng: random.Random, frame: Frame, degree: int = 1, terms: int = 1,
                      density: float = 0.4, gaussian: bool = False) -> MixedForm:
    out = MixedForm(frame, {})
    for p in range(frame.n + 1):
        out = out + random_form(rng, frame, p, degree, terms, density, gaussian)
    return out
