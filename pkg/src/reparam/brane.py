"""Diffeomorphism-invariant actions of D-dimensional extended objects.

The generalized velocity of an embedding ``phi: [0,1]^D -> R^m`` is the set
of ``C(m, D)`` Jacobian minors ``omega^Gamma``, one per strictly increasing
index tuple ``Gamma``.  For ``D = 1`` they reduce to the ordinary velocity.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import jet
from .errors import (DegenerateJacobian, DimMismatch, NoConvergence, NonOrientation,
                     NullWorldvolume)
from .jet import Jet2
from .quadrature import box_rule
from .tensor import TensorField, contract_full

log = logging.getLogger(__name__)

NORMALIZATIONS = ("cauchy_binet", "paper")


@dataclass(frozen=True)
class Embedding:
    """``phi`` maps a list of ``D`` parameters to ``m`` target coordinates."""

    D: int
    m: int
    phi: Callable

    def __post_init__(self):
        if not 1 <= self.D <= 3:
            raise ValueError("brane dimension must be 1, 2 or 3")
        if self.m < self.D:
            raise DimMismatch("target dimension smaller than brane dimension")

    def point_and_jacobian(self, z) -> tuple[np.ndarray, np.ndarray]:
        """Target point ``(m, *batch)`` and Jacobian ``(m, D, *batch)``."""
        z = [np.asarray(c, dtype=float) for c in z]
        if len(z) != self.D:
            raise DimMismatch(f"expected {self.D} parameters, got {len(z)}")
        zj = jet.variables(z, order=1)
        out = list(self.phi(zj))
        if len(out) != self.m:
            raise DimMismatch(f"embedding returned {len(out)} coordinates, expected {self.m}")
        shape = np.shape(z[0])
        X = np.zeros((self.m, *shape))
        J = np.zeros((self.m, self.D, *shape))
        for a, c in enumerate(out):
            if isinstance(c, Jet2):
                X[a] = c.value
                J[a] = c.grad
            else:
                X[a] = c
        return X, J

    def compose(self, zeta: Callable) -> "Embedding":
        return Embedding(self.D, self.m, lambda z: self.phi(list(zeta(z))))


def multi_indices(m: int, D: int) -> list[tuple[int, ...]]:
    """Strictly increasing ``D``-tuples in lexicographic order; ``C(m, D)`` of them."""
    return list(itertools.combinations(range(m), D))


def minor(J: np.ndarray, rows: Sequence[int]) -> np.ndarray:
    """Determinant of the rows ``rows`` (any order, repeats allowed) of ``J``."""
    sub = J[list(rows)]  # (D, D, *batch)
    return np.linalg.det(np.moveaxis(sub, (0, 1), (-2, -1)))


def _minors(J: np.ndarray) -> np.ndarray:
    m, D = J.shape[:2]
    return np.stack([minor(J, g) for g in multi_indices(m, D)])


class MinorMap(dict):
    """``Gamma -> omega^Gamma`` with a degeneracy flag."""

    degenerate: bool = False


def jacobian_minors(e: Embedding, z: Sequence[float]) -> MinorMap:
    _, J = e.point_and_jacobian(z)
    out = MinorMap(zip(multi_indices(e.m, e.D), (float(w) for w in _minors(J))))
    if np.linalg.matrix_rank(J) < e.D:
        out.degenerate = True
        log.warning("degenerate Jacobian at z=%s", list(z))
    return out


def _metric_matrix(g: TensorField, X: np.ndarray) -> np.ndarray:
    """Metric components ``(m, m, *batch)`` at target points ``X``."""
    G = g(list(X))
    m = g.dim
    shape = X.shape[1:]
    out = np.zeros((m, m, *shape))
    for a in range(m):
        for b in range(a, m):
            out[a, b] = out[b, a] = jet.value_of(G[a, b])
    return out


def induced_metric(e: Embedding, g: TensorField, z) -> tuple[np.ndarray, float]:
    """Pull-back ``h_ab = g(d_a phi, d_b phi)`` and its determinant."""
    X, J = e.point_and_jacobian(z)
    if np.linalg.matrix_rank(J) < e.D:
        raise DegenerateJacobian(f"rank-deficient Jacobian at z={list(z)}")
    gm = _metric_matrix(g, X)
    h = J.T @ gm @ J
    return h, float(np.linalg.det(h))


def _full_contraction(J: np.ndarray, gm: np.ndarray) -> np.ndarray:
    """``Y^A Y_A`` over all ordered ``D``-tuples ``A`` with index-wise lowering.

    ``J`` is ``(m, D, *batch)`` and ``gm`` ``(m, m, *batch)``.
    """
    m, D = J.shape[:2]
    batch = J.shape[2:]
    Y = np.zeros((m,) * D + batch)
    for A in itertools.product(range(m), repeat=D):
        if len(set(A)) == D:
            Y[A] = minor(J, A)
    low = Y
    for axis in range(D):
        low = _lower_axis(gm, low, axis, D)
    return np.sum(Y * low, axis=tuple(range(D)))


def _lower_axis(gm: np.ndarray, T: np.ndarray, axis: int, D: int) -> np.ndarray:
    letters = "ijk"[:D]
    src = letters[:axis] + "z" + letters[axis + 1:]
    out = letters
    return np.einsum(f"{letters[axis]}z...,{src}...->{out}...", gm, T)


class DNGValue(NamedTuple):
    value: float
    sign: float
    """Sign of the radicand (-1 for timelike sheets in a Lorentzian target)."""


def _dng_from(J: np.ndarray, gm: np.ndarray, normalization: str) -> tuple[np.ndarray, np.ndarray]:
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    rad = _full_contraction(J, gm)
    if normalization == "cauchy_binet":
        rad = rad / math.factorial(J.shape[1])
    return rad, np.sign(rad)


def dng_lagrangian(e: Embedding, g: TensorField, z, normalization: str = "cauchy_binet") -> DNGValue:
    """Dirac-Nambu-Goto density ``sqrt(|Y^Gamma Y_Gamma|)`` at ``z``."""
    X, J = e.point_and_jacobian(z)
    if np.linalg.matrix_rank(J) < e.D:
        raise DegenerateJacobian(f"rank-deficient Jacobian at z={list(z)}")
    rad, sign = _dng_from(J, _metric_matrix(g, X), normalization)
    if abs(rad) < 1e-14:
        raise NullWorldvolume(f"radicand {float(rad):.3g} at z={list(z)}")
    return DNGValue(float(np.sqrt(abs(rad))), float(sign))


@dataclass(frozen=True)
class BraneLagrangian:
    """``A_Gamma omega^Gamma + w * sqrt|G(omega, omega)| + higher terms``.

    ``one_form`` maps a target point to ``C(m, D)`` coefficients in
    :func:`multi_indices` order; ``metric`` is the target metric whose
    index-wise lowering defines the DNG term.  ``higher_terms`` holds
    ``(order, weight, field)`` triples where ``field`` maps a target point to a
    :class:`SymTensor` over the ``C(m, D)``-dimensional omega space.
    """

    one_form: Callable | None = None
    metric: TensorField | None = None
    dng_weight: float = 1.0
    normalization: str = "cauchy_binet"
    higher_terms: tuple = ()

    def __post_init__(self):
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")


def _lagrangian_density(e: Embedding, bl: BraneLagrangian, z) -> np.ndarray:
    X, J = e.point_and_jacobian(z)
    omega = _minors(J)
    total = np.zeros(np.shape(z[0]))
    if bl.one_form is not None:
        A = [np.asarray(c, dtype=float) for c in bl.one_form(list(X))]
        if len(A) != omega.shape[0]:
            raise DimMismatch(f"one-form has {len(A)} coefficients, expected {omega.shape[0]}")
        for a, w in zip(A, omega):
            total = total + a * w
    if bl.metric is not None:
        rad, _ = _dng_from(J, _metric_matrix(bl.metric, X), bl.normalization)
        if np.any(np.abs(rad) < 1e-14):
            raise NullWorldvolume("worldvolume radicand vanishes at a quadrature node")
        total = total + bl.dng_weight * np.sqrt(np.abs(rad))
    for order, weight, fld in bl.higher_terms:
        S = fld(list(X))
        if S.rank != order or S.dim != omega.shape[0]:
            raise DimMismatch("higher brane term has wrong shape")
        s = contract_full(S, list(omega))
        total = total + weight * (s if order == 1 else np.abs(s) ** (1.0 / order) * np.sign(s))
    return total


def brane_action(e: Embedding, bl: BraneLagrangian, panels: int = 2, order: int = 8,
                 refine: int = 0, tol: float | None = None) -> float:
    """Tensor-product Gauss-Legendre action over ``[0, 1]^D``.

    ``refine`` doubles the panel count that many times; with ``tol`` set the
    last two levels must agree to ``tol`` relative or :class:`NoConvergence`
    is raised.
    """
    if panels * order < 2:
        raise ValueError("need at least two nodes per axis")
    prev = None
    S = None
    for level in range(refine + 1):
        nodes, weights = box_rule(e.D, panels * 2**level, order)
        S = float(np.dot(weights, _lagrangian_density(e, bl, list(nodes))))
        if tol is not None and prev is not None and level == refine:
            if abs(S - prev) > tol * max(1.0, abs(S)):
                raise NoConvergence(f"brane action changed by {abs(S - prev):.3g} at level {level}")
        prev = S
    return S


def zeta_jacobian_det(zeta: Callable, D: int, z) -> np.ndarray:
    zj = jet.variables([np.asarray(c, float) for c in z], order=1)
    out = list(zeta(zj))
    J = np.zeros((D, D, *np.shape(z[0])))
    for a, c in enumerate(out):
        if isinstance(c, Jet2):
            J[a] = c.grad
    return np.linalg.det(np.moveaxis(J, (0, 1), (-2, -1)))


class DiffeoResult(NamedTuple):
    S_original: float
    S_pulled: float
    rel_diff: float


def diffeo_test(e: Embedding, bl: BraneLagrangian, zeta: Callable, panels: int = 2,
                order: int = 8, refine: int = 0) -> DiffeoResult:
    """Action of ``e`` versus ``e o zeta`` for a bijection ``zeta`` of the box."""
    for level in range(refine + 1):
        nodes, _ = box_rule(e.D, panels * 2**level, order)
        if np.any(zeta_jacobian_det(zeta, e.D, list(nodes)) <= 0):
            raise NonOrientation("reparametrization Jacobian is not positive")
    S0 = brane_action(e, bl, panels, order, refine)
    S1 = brane_action(e.compose(zeta), bl, panels, order, refine)
    rel = abs(S1 - S0) / max(abs(S0), 1e-300)
    return DiffeoResult(S0, S1, rel)


def pullback_volume_check(e: Embedding, omega_form, z) -> float:
    """``phi^*(Omega) / dz = Omega_Gamma omega^Gamma`` at ``z``.

    ``omega_form`` is either ``C(m, D)`` coefficients or a callable of the
    target point returning them.
    """
    X, J = e.point_and_jacobian(z)
    coeffs = omega_form(list(X)) if callable(omega_form) else omega_form
    coeffs = np.asarray(coeffs, dtype=float)
    w = _minors(J)
    if coeffs.shape[0] != w.shape[0]:
        raise DimMismatch(f"form has {coeffs.shape[0]} coefficients, expected {w.shape[0]}")
    return float(np.dot(coeffs, w))


def packed_brane_metric(g: np.ndarray, D: int, normalization: str = "cauchy_binet") -> np.ndarray:
    """``G_{Gamma Gamma'}`` on omega space from a target metric matrix.

    ``det(g[Gamma, Gamma'])``, times ``D!`` for the paper normalization, so
    that ``omega G omega`` equals the DNG radicand.
    """
    idx = multi_indices(g.shape[0], D)
    G = np.array([[np.linalg.det(g[np.ix_(a, b)]) for b in idx] for a in idx])
    return G * math.factorial(D) if normalization == "paper" else G


def random_embedding(rng: np.random.Generator, D: int, m: int) -> Embedding:
    """Smooth nonlinear map of the box: random affine part plus small sines."""
    A = rng.normal(size=(m, D))
    c = rng.normal(size=m)
    K = rng.normal(scale=0.3, size=(m, D))
    P = rng.uniform(0, 2 * np.pi, size=m)

    def phi(z):
        out = []
        for a in range(m):
            lin = c[a] + sum(A[a, b] * z[b] for b in range(D))
            arg = P[a] + sum(K[a, b] * z[b] for b in range(D))
            out.append(lin + 0.2 * jet.sin(arg))
        return out

    return Embedding(D, m, phi)


def sinusoidal_diffeo(eps: Sequence[float], k: Sequence[int]) -> Callable:
    """Bijection of ``[0, 1]^D`` fixing the boundary faces.

    ``zeta_a = z_a + eps_a / (pi k_a D) * sin(pi k_a z_a) * prod_{b != a} sin(pi z_b)``
    has positive Jacobian for ``eps_a < 1``.
    """
    D = len(eps)

    def zeta(z):
        out = []
        for a in range(D):
            bump = 1.0
            for b in range(D):
                bump = bump * jet.sin(np.pi * (k[a] if b == a else 1) * z[b])
            out.append(z[a] + eps[a] / (np.pi * k[a] * D) * bump)
        return out

    return zeta
