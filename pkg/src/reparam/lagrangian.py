"""First-order homogeneous Lagrangians in canonical form and their identities.

A canonical Lagrangian is a weighted sum of rooted monomials
``c_n * S_n(v,...,v)**(1/n)``, one symmetric tensor field per term, plus an
optional total-derivative term ``v^a d_a Lambda(x)``.  Anything exposing
``dim`` and ``value(x, v)`` (jet-aware) is accepted wherever a Lagrangian is
expected; :class:`Monomial`, :class:`PowerLagrangian` and
:class:`PotentialLagrangian` are the non-canonical variants used for gauge
fixing and the equivalence checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import jet
from .errors import DimMismatch, SignDomain, ZeroLagrangian
from .jet import Jet2
from .tensor import ScalarField, SymTensor, TensorField, contract_full, sorted_indices


@dataclass(frozen=True)
class CanonicalTerm:
    order: int
    weight: float
    field: TensorField

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("term order must be >= 1")
        if self.field.rank != self.order:
            raise DimMismatch(f"order-{self.order} term needs a rank-{self.order} field, "
                              f"got rank {self.field.rank}")

    @property
    def dim(self) -> int:
        return self.field.dim


@dataclass(frozen=True)
class Lagrangian:
    dim: int
    terms: tuple[CanonicalTerm, ...] = ()
    gauge_term: ScalarField | None = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            if t.dim != self.dim:
                raise DimMismatch(f"term of dim {t.dim} in a dim-{self.dim} Lagrangian")
        if self.gauge_term is not None and self.gauge_term.dim != self.dim:
            raise DimMismatch("gauge term dimension differs from Lagrangian")

    def value(self, x, v):
        return eval_lagrangian(self, x, v)

    def orders(self) -> list[int]:
        return [t.order for t in self.terms]

    def term_of_order(self, n: int) -> CanonicalTerm | None:
        for t in self.terms:
            if t.order == n:
                return t
        return None

    def with_gauge_term(self, lam: ScalarField | None) -> "Lagrangian":
        return Lagrangian(self.dim, self.terms, lam)


@dataclass(frozen=True)
class Monomial:
    """Un-rooted ``c_n * S_n(v,...,v)``; homogeneous of degree ``n``."""

    term: CanonicalTerm

    @property
    def dim(self) -> int:
        return self.term.dim

    @property
    def degree(self) -> int:
        return self.term.order

    def value(self, x, v):
        return eval_monomial(self.term, x, v)


@dataclass(frozen=True)
class PowerLagrangian:
    """``base(x, v) ** exponent`` (the L -> L^alpha equivalence)."""

    base: object
    exponent: float

    @property
    def dim(self) -> int:
        return self.base.dim

    def value(self, x, v):
        b = self.base.value(x, v)
        if self.exponent != int(self.exponent) and np.any(jet.value_of(b) <= 0):
            raise SignDomain("non-integer power of a non-positive Lagrangian")
        p = int(self.exponent) if self.exponent == int(self.exponent) else self.exponent
        return b**p


@dataclass(frozen=True)
class VelocityPotential:
    """Covector ``A_mu(x, v)``; ``func(x, v)`` returns ``dim`` components."""

    dim: int
    func: Callable

    def __call__(self, x, v) -> list:
        out = list(self.func(x, v))
        if len(out) != self.dim:
            raise DimMismatch("potential returned wrong number of components")
        return out


@dataclass(frozen=True)
class PotentialLagrangian:
    """``L = v^mu A_mu(x, v)``."""

    potential: VelocityPotential

    @property
    def dim(self) -> int:
        return self.potential.dim

    def value(self, x, v):
        A = self.potential(x, v)
        total = 0.0
        for a, va in zip(A, v):
            total = total + a * va
        return total


def _check_dims(dim: int, x, v) -> None:
    if len(x) != dim or len(v) != dim:
        raise DimMismatch(f"expected {dim} coordinates, got x:{len(x)} v:{len(v)}")


def eval_monomial(t: CanonicalTerm, x, v):
    _check_dims(t.dim, x, v)
    return contract_full(t.field(x), v) * t.weight


def eval_term(t: CanonicalTerm, x, v):
    _check_dims(t.dim, x, v)
    s = contract_full(t.field(x), v)
    if t.order == 1:
        return s * t.weight
    if np.any(jet.value_of(s) <= 0):
        raise SignDomain(f"order-{t.order} radicand is not positive: {jet.value_of(s)}")
    return jet.root(s, t.order) * t.weight


def eval_lagrangian(L: Lagrangian, x, v):
    _check_dims(L.dim, x, v)
    total = 0.0
    for t in L.terms:
        total = total + eval_term(t, x, v)
    if L.gauge_term is not None:
        for g, va in zip(L.gauge_term.grad(x), v):
            total = total + g * va
    return total


# `eval` is the natural name but shadows the builtin inside this module
evaluate = eval_lagrangian


def _v_jet(L, x, v, order: int) -> Jet2:
    x = [float(a) for a in x]
    vj = jet.variables([float(a) for a in v], order=order)
    out = L.value(x, vj)
    if not isinstance(out, Jet2):
        return Jet2.constant(out, len(vj), order)
    return out


def conjugate_momentum(L, x, v) -> np.ndarray:
    """``p_a = dL/dv^a``."""
    return np.asarray(_v_jet(L, x, v, 1).grad, dtype=float)


def hamiltonian(L, x, v) -> float:
    """``h = v . dL/dv - L``."""
    j = _v_jet(L, x, v, 1)
    return float(np.dot(np.asarray(v, float), j.grad) - j.value)


def homogeneity_degree(L, x, v) -> float:
    j = _v_jet(L, x, v, 1)
    vv = np.asarray(v, float)
    if abs(j.value) < 1e-12 * (1.0 + np.linalg.norm(vv)):
        raise ZeroLagrangian(f"|L| = {abs(j.value):.3g} too small to infer a degree")
    return float(np.dot(vv, j.grad) / j.value)


class HessianReport(NamedTuple):
    det: float
    rank: int
    null_residual: float
    """``||M v|| / (||M|| ||v||)``."""
    abs_residual: float


def v_hessian(L, x, v) -> tuple[SymTensor, HessianReport]:
    """Velocity Hessian ``d2L/dv dv`` and a degeneracy report."""
    j = _v_jet(L, x, v, 2)
    M = j.hessian()
    vv = np.asarray(v, float)
    Mv = M @ vv
    norm_M = np.linalg.norm(M)
    abs_res = float(np.linalg.norm(Mv))
    rel = abs_res / (norm_M * np.linalg.norm(vv)) if norm_M > 0 else 0.0
    sv = np.linalg.svd(M, compute_uv=False)
    rank = int(np.sum(sv > 1e-9 * sv[0])) if sv[0] > 0 else 0
    report = HessianReport(float(np.linalg.det(M)), rank, float(rel), abs_res)
    return SymTensor.from_dense(M), report


def source_tensor(t: CanonicalTerm, x, v) -> SymTensor:
    """Matter source of a unit-weight term: ``dL/dS_{a1..an}`` per ordered slot."""
    _check_dims(t.dim, x, v)
    n = t.order
    vv = [float(a) for a in v]
    s = float(contract_full(t.field(x).values(), vv))
    if n == 1:
        coeff = 1.0
    else:
        if s <= 0:
            raise SignDomain(f"order-{n} radicand is not positive: {s}")
        coeff = s ** ((1.0 - n) / n) / n
    comps = []
    for mi in sorted_indices(t.dim, n):
        prod = coeff
        for a in mi:
            prod *= vv[a]
        comps.append(prod)
    return SymTensor(n, t.dim, comps)


def velocity_metric(A: VelocityPotential, x, v) -> SymTensor:
    """``g_ab(x, v) = dA_a/dv^b + dA_b/dv^a``."""
    _check_dims(A.dim, x, v)
    x = [float(a) for a in x]
    vj = jet.variables([float(a) for a in v], order=1)
    comps = A(x, vj)
    m = A.dim
    J = np.zeros((m, m))
    for a, c in enumerate(comps):
        if isinstance(c, Jet2):
            J[a] = c.grad
    return SymTensor.from_dense(J + J.T)
