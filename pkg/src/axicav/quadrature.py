"""Numerical integration on triangles with prescribed polynomial exactness.

Every rule keeps all points strictly inside the reference triangle: the
integrands of the untransformed axisymmetric formulation contain 1/r
factors, and axis-touching triangles must never be sampled at r = 0.
Low degrees use classical symmetric rules with positive weights; higher
degrees fall back to a collapsed (Duffy) tensor-product Gauss rule with
g x g points where 2g - 2 >= D.

Weights are normalized to the reference-triangle measure (they sum to 1/2).
Every constructed rule is verified against the closed-form barycentric
monomial integrals before being returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["QuadratureRule", "rule_for_degree", "integrate", "monomial_integral"]


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (G, 3) barycentric coordinates, strictly interior
    weights: np.ndarray  # (G,), sum = 1/2
    exactness_degree: int

    @property
    def point_count(self) -> int:
        return self.points.shape[0]


def monomial_integral(a: int, b: int, c: int) -> float:
    """Exact integral of lambda1^a lambda2^b lambda3^c over the reference triangle.

    Closed form: a! b! c! / (a + b + c + 2)! times twice the area (= 1).
    """
    return (
        math.factorial(a)
        * math.factorial(b)
        * math.factorial(c)
        / math.factorial(a + b + c + 2)
    )


def _orbit(a: float) -> np.ndarray:
    b = 1.0 - 2.0 * a
    return np.array([[b, a, a], [a, b, a], [a, a, b]])


# Symmetric positive-weight interior rules (weights on the unit-sum convention,
# scaled by 1/2 below).  Degrees 3 and 5 reuse the 6- and 7-point rules.
def _fixed_rule(degree: int):
    third = 1.0 / 3.0
    if degree <= 1:
        return np.array([[third, third, third]]), np.array([1.0])
    if degree == 2:
        return _orbit(1.0 / 6.0), np.full(3, 1.0 / 3.0)
    if degree <= 4:
        pts = np.vstack([_orbit(0.445948490915965), _orbit(0.091576213509771)])
        w = np.concatenate(
            [np.full(3, 0.223381589678011), np.full(3, 0.109951743655322)]
        )
        return pts, w
    if degree == 5:
        pts = np.vstack(
            [
                np.array([[third, third, third]]),
                _orbit(0.470142064105115),
                _orbit(0.101286507323456),
            ]
        )
        w = np.concatenate(
            [[0.225], np.full(3, 0.132394152788506), np.full(3, 0.125939180544827)]
        )
        return pts, w
    return None


def _collapsed_rule(degree: int):
    """Duffy-mapped g x g Gauss-Legendre rule, exact to degree 2g - 2."""
    g = (degree + 3) // 2  # smallest g with 2g - 2 >= degree
    x, w = np.polynomial.legendre.leggauss(g)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    uu, vv = np.meshgrid(u, u, indexing="ij")
    wuu, wvv = np.meshgrid(wu, wu, indexing="ij")
    xs = uu.ravel()
    ys = (vv * (1.0 - uu)).ravel()
    weights = (wuu * wvv * (1.0 - uu)).ravel()
    pts = np.column_stack([1.0 - xs - ys, xs, ys])
    return pts, weights, 2 * g - 2


def _verify(points: np.ndarray, weights: np.ndarray, degree: int) -> None:
    lam = points
    for total in range(degree + 1):
        for b in range(total + 1):
            c = total - b
            approx = np.sum(weights * lam[:, 1] ** b * lam[:, 2] ** c)
            exact = monomial_integral(0, b, c)
            if abs(approx - exact) > 1e-13 * max(abs(exact), 1.0):
                raise AssertionError(
                    f"rule of degree {degree} misses monomial ({b},{c}): "
                    f"{approx} vs {exact}"
                )
    if np.any(points <= 0.0) or np.any(points >= 1.0):
        raise AssertionError("quadrature points must be strictly interior")
    if abs(weights.sum() - 0.5) > 1e-14:
        raise AssertionError("weights must sum to the reference area 1/2")


@lru_cache(maxsize=None)
def rule_for_degree(degree: int) -> QuadratureRule:
    """Return an interior-point rule with exactness_degree >= degree."""
    if degree < 0:
        raise ValueError(f"exactness degree must be >= 0, got {degree}")
    fixed = _fixed_rule(degree)
    if fixed is not None:
        pts, w = fixed
        w = 0.5 * w
        exact_deg = degree if degree != 3 else 4
    else:
        pts, w, exact_deg = _collapsed_rule(degree)
    _verify(pts, w, exact_deg)
    pts.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(points=pts, weights=w, exactness_degree=exact_deg)


def integrate(rule: QuadratureRule, vertices, f) -> float:
    """Integrate f(r, z) over the affine triangle with the given vertices.

    The Jacobian of the affine map is constant; its determinant must be
    nonzero.  Any r dr dz measure weight is part of f by convention.
    """
    v = np.asarray(vertices, dtype=float)
    det = (v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1]) - (v[1, 1] - v[0, 1]) * (
        v[2, 0] - v[0, 0]
    )
    if det == 0.0:
        raise ValueError("degenerate triangle")
    pts = rule.points @ v
    vals = f(pts[:, 0], pts[:, 1])
    return float(np.sum(rule.weights * np.abs(det) * vals))
