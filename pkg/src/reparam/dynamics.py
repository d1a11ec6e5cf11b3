"""Gauge-fixed equations of motion, RK4 integration, path actions and checks.

Euler-Lagrange equations of any Lagrangian ``L(x, v)`` are written as

    M a = b,   M = d2L/dv dv,   b = dL/dx - (d2L/dv dx) v

from a single jet evaluation over all ``2m`` phase-space variables.  For a
first-order homogeneous ``L`` the matrix ``M`` annihilates ``v`` and the
parametrization has to be fixed by a gauge, see :class:`GaugeChoice`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import jet
from .errors import (DegeneratePath, GaugeInvalid, NoConvergence, NonFinite, NonMonotone,
                     SignDomain, SingularMetric, SingularSystem)
from .jet import Jet2
from .lagrangian import (CanonicalTerm, Lagrangian, Monomial, eval_monomial, eval_term,
                         hamiltonian)
from .quadrature import gauss_legendre_panels
from .tensor import TensorField, contract_full

log = logging.getLogger(__name__)

COND_LIMIT = 1e8


# -- gauges ---------------------------------------------------------------

@dataclass(frozen=True)
class LagrangianConst:
    """Supplement the equations with ``dL/dtau = 0``."""


@dataclass(frozen=True)
class TermConst:
    """Parametrize so that ``S_n(v,...,v)`` stays constant."""

    n: int


@dataclass(frozen=True)
class ProperTime:
    """Parametrize so that ``g(v, v)`` stays constant (proper time)."""


@dataclass(frozen=True)
class Augmented:
    """Supplement the equations with ``dG/dtau = 0`` for a jet-aware ``G(x, v)``."""

    G: Callable
    name: str = "G"


@dataclass(frozen=True)
class Direct:
    """No gauge: solve ``M a = b`` directly (non-degenerate Lagrangians)."""


GaugeChoice = LagrangianConst | TermConst | ProperTime | Augmented | Direct


@dataclass(frozen=True)
class _FrozenRoot:
    """Gauge-fixed stand-in for a single rooted term plus 1-form terms.

    On ``S_n = s`` the Euler-Lagrange equations of ``c S_n^(1/n)`` equal those
    of ``(c/n) s^(1/n - 1) S_n``; ``s`` is read off the state being solved.
    """

    base: Lagrangian
    n: int

    @property
    def dim(self) -> int:
        return self.base.dim

    def value(self, x, v):
        total = 0.0
        for t in self.base.terms:
            if t.order == self.n:
                xs = [jet.value_of(a) for a in x]
                vs = [jet.value_of(a) for a in v]
                s = float(contract_full(t.field(xs), vs))
                if s <= 0:
                    raise SignDomain(f"order-{self.n} radicand is not positive: {s}")
                scale = t.weight / self.n * s ** (1.0 / self.n - 1.0)
                total = total + contract_full(t.field(x), v) * scale
            else:
                total = total + eval_term(t, x, v)
        if self.base.gauge_term is not None:
            for g, va in zip(self.base.gauge_term.grad(x), v):
                total = total + g * va
        return total


def _unit_monomial(t: CanonicalTerm) -> Callable:
    unit = CanonicalTerm(t.order, 1.0, t.field)
    return lambda x, v: eval_monomial(unit, x, v)


class _Plan(NamedTuple):
    lagrangian: object
    constraint: Callable | None
    gauge_function: Callable


def _plan(L, gauge) -> _Plan:
    """Reduce a gauge choice to a Lagrangian plus optional extra equation."""
    if isinstance(gauge, Direct):
        return _Plan(L, None, lambda x, v: _hamiltonian_jetfree(L, x, v))
    if isinstance(gauge, LagrangianConst):
        return _Plan(L, L.value, L.value)
    if isinstance(gauge, Augmented):
        return _Plan(L, gauge.G, gauge.G)
    if isinstance(gauge, (TermConst, ProperTime)):
        n = 2 if isinstance(gauge, ProperTime) else gauge.n
        if isinstance(L, Monomial):
            if L.degree != n:
                raise GaugeInvalid(f"monomial of degree {L.degree} under TermConst({n})")
            return _Plan(L, None, _unit_monomial(L.term))
        if not isinstance(L, Lagrangian):
            raise GaugeInvalid(f"{type(gauge).__name__} needs a canonical Lagrangian")
        if n < 2:
            raise GaugeInvalid("TermConst needs order >= 2")
        t = L.term_of_order(n)
        if t is None:
            raise GaugeInvalid(f"Lagrangian has no order-{n} term")
        G = _unit_monomial(t)
        others = [u.order for u in L.terms if u is not t]
        if all(o == 1 for o in others):
            return _Plan(_FrozenRoot(L, n), None, G)
        # several rooted terms: no quadratic-equivalent form, keep the
        # original Lagrangian and add dS_n/dtau = 0
        return _Plan(L, G, G)
    raise GaugeInvalid(f"unknown gauge {gauge!r}")


def _hamiltonian_jetfree(L, x, v):
    return hamiltonian(L, [jet.value_of(a) for a in x], [jet.value_of(a) for a in v])


def gauge_function(L, gauge) -> Callable:
    """Scalar ``G(x, v)`` that the gauge holds constant."""
    return _plan(L, gauge).gauge_function


# -- equations of motion ---------------------------------------------------

@dataclass(frozen=True)
class State:
    tau: float
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.v))):
            raise NonFinite(f"non-finite state at tau={self.tau}")


class ELSystem(NamedTuple):
    M: np.ndarray
    b: np.ndarray
    p: np.ndarray
    dLdx: np.ndarray
    L: float


def _phase_jet(f: Callable, x, v, order: int = 2) -> Jet2:
    m = len(x)
    xs = jet.variables([float(a) for a in x], order=order, start=0, k=2 * m)
    vs = jet.variables([float(a) for a in v], order=order, start=m, k=2 * m)
    out = f(xs, vs)
    if not isinstance(out, Jet2):
        out = Jet2.constant(float(out), 2 * m, order)
    return out


def euler_lagrange_system(L, x, v) -> ELSystem:
    """``M``, ``b``, momenta and ``dL/dx`` at ``(x, v)``."""
    m = len(x)
    j = _phase_jet(L.value, x, v)
    H = j.hessian()
    g = j.grad
    vv = np.asarray(v, float)
    M = H[m:, m:]
    C = H[m:, :m]
    b = g[:m] - C @ vv
    return ELSystem(M, b, g[m:].copy(), g[:m].copy(), float(j.value))


def el_residual(L, s: State, a: np.ndarray | None = None) -> float:
    """``||M a - b||``; with ``a=None`` the least-squares minimum."""
    M, b, *_ = euler_lagrange_system(L, s.x, s.v)
    if a is None:
        a = np.linalg.lstsq(M, b, rcond=None)[0]
    return float(np.linalg.norm(M @ a - b))


def _solve_direct(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularSystem(f"velocity Hessian condition {cond:.3g} exceeds {COND_LIMIT:g}")
    return np.linalg.solve(M, b)


def solve_stacked(A: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, float]:
    """Least squares via row-scaled normal equations.

    Returns the solution and a condition estimate of the scaled system (ratio
    of extreme Cholesky pivots).  One step of iterative refinement recovers
    the accuracy lost by squaring.
    """
    norms = np.linalg.norm(A, axis=1)
    scale = np.where(norms > 0, 1.0 / np.where(norms > 0, norms, 1.0), 0.0)
    As = A * scale[:, None]
    rs = rhs * scale
    N = As.T @ As
    try:
        C = np.linalg.cholesky(N)
    except np.linalg.LinAlgError:
        raise SingularSystem("augmented system is rank deficient") from None
    piv = np.abs(np.diag(C))
    cond = float(piv.max() / piv.min()) if piv.min() > 0 else np.inf
    if cond > COND_LIMIT:
        raise SingularSystem(f"augmented system condition estimate {cond:.3g}")

    def chol_solve(y):
        z = np.linalg.solve(C, y)
        return np.linalg.solve(C.T, z)

    a = chol_solve(As.T @ rs)
    a = a + chol_solve(As.T @ (rs - As @ a))
    return a, cond


def assemble_eom(L, gauge, s: State) -> np.ndarray:
    """Acceleration ``dv/dtau`` at ``s`` under ``gauge``."""
    plan = _plan(L, gauge)
    M, b, *_ = euler_lagrange_system(plan.lagrangian, s.x, s.v)
    if plan.constraint is None:
        a = _solve_direct(M, b)
    else:
        cj = _phase_jet(plan.constraint, s.x, s.v, order=1)
        m = len(s.x)
        row = cj.grad[m:]
        rhs = -float(cj.grad[:m] @ s.v)
        a, _ = solve_stacked(np.vstack([M, row]), np.append(b, rhs))
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"non-finite acceleration at tau={s.tau}")
    return a


# -- integration ------------------------------------------------------------

class Monitor(NamedTuple):
    L: float
    h: float
    gvv: float
    gauge_value: float
    drift: float


@dataclass
class Trajectory:
    lagrangian: object
    gauge: object
    samples: list[State] = field(default_factory=list)
    monitors: list[Monitor] = field(default_factory=list)
    error: Exception | None = None

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def tau(self) -> np.ndarray:
        return np.array([s.tau for s in self.samples])

    @property
    def x(self) -> np.ndarray:
        return np.array([s.x for s in self.samples])

    @property
    def v(self) -> np.ndarray:
        return np.array([s.v for s in self.samples])

    def monitor_array(self, name: str) -> np.ndarray:
        return np.array([getattr(mo, name) for mo in self.monitors])


def metric_term(L) -> CanonicalTerm | None:
    if isinstance(L, Lagrangian):
        return L.term_of_order(2)
    if isinstance(L, Monomial) and L.term.order == 2:
        return L.term
    base = getattr(L, "base", None)
    return metric_term(base) if base is not None else None


def _float_value(f, x, v) -> float:
    try:
        return float(f(list(x), list(v)))
    except SignDomain:
        return float("nan")


def _homogeneity(f, x, v) -> float:
    vj = jet.variables([float(a) for a in v], order=1)
    out = f([float(a) for a in x], vj)
    if not isinstance(out, Jet2) or out.value == 0:
        return 1.0
    return float(np.dot(out.grad, v) / out.value)


def integrate(L, gauge, s0: State, step: float, n_steps: int,
              drift_policy: str = "off") -> Trajectory:
    """Classical RK4 on ``(x, v)`` with per-sample monitors.

    A failure after the first step truncates the trajectory and is stored in
    ``Trajectory.error``; a failure at ``s0`` is raised.
    """
    if drift_policy not in ("off", "renormalize"):
        raise ValueError(f"unknown drift policy {drift_policy!r}")
    G = gauge_function(L, gauge)
    gterm = metric_term(L)
    G0 = _float_value(G, s0.x, s0.v)
    degree = _homogeneity(G, s0.x, s0.v) if drift_policy == "renormalize" else 1.0

    def monitor(s: State) -> Monitor:
        x, v = list(s.x), list(s.v)
        try:
            Lv = float(jet.value_of(L.value(x, v)))
            h = hamiltonian(L, x, v)
        except SignDomain:
            Lv = h = float("nan")
        gvv = float(contract_full(gterm.field(x), v)) if gterm is not None else float("nan")
        gv = _float_value(G, x, v)
        drift = (gv - G0) / abs(G0) if G0 != 0 else gv - G0
        return Monitor(Lv, h, gvv, gv, drift)

    traj = Trajectory(L, gauge, [s0], [monitor(s0)])
    accel = lambda x, v, t: assemble_eom(L, gauge, State(t, x, v))
    a0 = accel(s0.x, s0.v, s0.tau)  # raise early if the start is singular
    x, v, t = s0.x.copy(), s0.v.copy(), s0.tau
    h = float(step)
    for i in range(n_steps):
        try:
            k1x, k1v = v, (a0 if i == 0 else accel(x, v, t))
            x2, v2 = x + 0.5 * h * k1x, v + 0.5 * h * k1v
            k2x, k2v = v2, accel(x2, v2, t + 0.5 * h)
            x3, v3 = x + 0.5 * h * k2x, v + 0.5 * h * k2v
            k3x, k3v = v3, accel(x3, v3, t + 0.5 * h)
            x4, v4 = x + h * k3x, v + h * k3v
            k4x, k4v = v4, accel(x4, v4, t + h)
            x = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
            v = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
            t = s0.tau + (i + 1) * h
            if drift_policy == "renormalize":
                gv = _float_value(G, x, v)
                if gv != 0 and G0 / gv > 0:
                    v = v * (G0 / gv) ** (1.0 / degree)
            s = State(t, x, v)
        except (SingularSystem, NonFinite, SignDomain, SingularMetric) as exc:
            log.warning("integration stopped at step %d: %s", i, exc)
            traj.error = exc
            break
        traj.samples.append(s)
        traj.monitors.append(monitor(s))
    return traj


# -- paths and actions --------------------------------------------------------

@dataclass(frozen=True)
class PathCurve:
    """Curve ``tau -> x(tau)`` on ``[a, b]``; ``func`` must be jet-aware."""

    func: Callable
    a: float
    b: float

    def __call__(self, tau):
        return list(self.func(tau))

    def point_and_velocity(self, tau) -> tuple[list, list]:
        (t,) = jet.variables([tau], order=1)
        out = self.func(t)
        xs, vs = [], []
        for c in out:
            if isinstance(c, Jet2):
                xs.append(c.value)
                vs.append(c.grad[0])
            else:
                xs.append(c + 0.0 * np.asarray(tau))
                vs.append(0.0 * np.asarray(tau))
        return xs, vs


def action_of_path(L, path: PathCurve, order: int = 8, max_refine: int = 14,
                   tol: float = 1e-12) -> float:
    """Adaptive composite Gauss-Legendre estimate of ``int L(x, x') dtau``.

    Panels are doubled until successive estimates agree to
    ``tol * max(1, |S|)``.
    """
    prev = None
    for level in range(max_refine + 1):
        nodes, weights = gauss_legendre_panels(path.a, path.b, 2**level, order)
        xs, vs = path.point_and_velocity(nodes)
        vals = jet.value_of(L.value(xs, vs))
        S = float(np.dot(weights, np.broadcast_to(vals, nodes.shape)))
        if prev is not None and abs(S - prev) <= tol * max(1.0, abs(S)):
            return S
        prev = S
    raise NoConvergence(f"action did not converge in {max_refine} refinements")


def reparametrize_path(path: PathCurve, f: Callable, f_domain: tuple[float, float],
                       check_nodes: int = 64) -> PathCurve:
    """``path o f`` on ``f_domain``; ``f`` must be strictly increasing."""
    c, d = f_domain
    nodes, _ = gauss_legendre_panels(c, d, 4, check_nodes // 4)
    (t,) = jet.variables([nodes], order=1)
    out = f(t)
    deriv = out.grad[0] if isinstance(out, Jet2) else np.zeros_like(nodes)
    if np.any(deriv <= 0):
        raise NonMonotone("reparametrization is not strictly increasing")
    return PathCurve(lambda s: path.func(f(s)), c, d)


# -- path comparison -----------------------------------------------------------

def _arc_lengths(traj: Trajectory, arc_field: TensorField | None) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative arc length and per-sample speed (Simpson per interval)."""
    tau, X, V = traj.tau, traj.x, traj.v

    def speed(x, v):
        if arc_field is None:
            return float(np.linalg.norm(v))
        return float(np.sqrt(abs(contract_full(arc_field(list(x)), list(v)))))

    sp = np.array([speed(x, v) for x, v in zip(X, V)])
    s = np.zeros(len(tau))
    for i in range(len(tau) - 1):
        h = tau[i + 1] - tau[i]
        xm = 0.5 * (X[i] + X[i + 1]) + h * (V[i] - V[i + 1]) / 8.0
        vm = 1.5 * (X[i + 1] - X[i]) / h - 0.25 * (V[i] + V[i + 1])
        s[i + 1] = s[i] + h / 6.0 * (sp[i] + 4.0 * speed(xm, vm) + sp[i + 1])
    return s, sp


def _hermite(p0, p1, m0, m1, t):
    t2, t3 = t * t, t * t * t
    return ((2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * m0
            + (-2 * t3 + 3 * t2) * p1 + (t3 - t2) * m1)


def _hermite_deriv(p0, p1, m0, m1, t):
    t2 = t * t
    return (6 * t2 - 6 * t) * p0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * p1 + (3 * t2 - 2 * t) * m1


def _resample(traj: Trajectory, arc_field, sigma: np.ndarray) -> np.ndarray:
    s, sp = _arc_lengths(traj, arc_field)
    total = s[-1]
    if not total > 1e-12:
        raise DegeneratePath(f"total arc length {total:.3g}")
    target = sigma * total
    tau, X, V = traj.tau, traj.x, traj.v
    idx = np.clip(np.searchsorted(s, target, side="right") - 1, 0, len(s) - 2)
    h = tau[idx + 1] - tau[idx]
    s0, s1 = s[idx], s[idx + 1]
    m0, m1 = sp[idx] * h, sp[idx + 1] * h
    theta = np.where(s1 > s0, (target - s0) / np.where(s1 > s0, s1 - s0, 1.0), 0.0)
    for _ in range(4):
        f = _hermite(s0, s1, m0, m1, theta) - target
        df = _hermite_deriv(s0, s1, m0, m1, theta)
        theta = np.clip(theta - np.where(df > 0, f / np.where(df > 0, df, 1.0), 0.0), 0.0, 1.0)
    th = theta[:, None]
    return _hermite(X[idx], X[idx + 1], V[idx] * h[:, None], V[idx + 1] * h[:, None], th)


def match_paths(t1: Trajectory, t2: Trajectory, arc_field: TensorField | None = None,
                n_samples: int = 2001) -> float:
    """Max chart distance between two trajectories matched by normalized arc length.

    ``arc_field`` defaults to the order-2 field of ``t1``'s Lagrangian, else
    the Euclidean chart norm.
    """
    if len(t1) < 2 or len(t2) < 2:
        raise DegeneratePath("trajectories need at least two samples")
    if arc_field is None:
        term = metric_term(t1.lagrangian)
        arc_field = term.field if term is not None else None
    sigma = np.linspace(0.0, 1.0, n_samples)
    P1 = _resample(t1, arc_field, sigma)
    P2 = _resample(t2, arc_field, sigma)
    return float(np.max(np.linalg.norm(P1 - P2, axis=1)))


# -- geometry --------------------------------------------------------------

def christoffel(g: TensorField, x: Sequence[float]) -> np.ndarray:
    """``Gamma[a, b, c]`` = Levi-Civita symbol of the second kind at ``x``."""
    m = g.dim
    xj = jet.variables([float(a) for a in x], order=1)
    G = g(xj)
    gmat = np.zeros((m, m))
    dg = np.zeros((m, m, m))  # dg[r, b, c] = d_r g_bc
    for b in range(m):
        for c in range(b, m):
            comp = G[b, c]
            if isinstance(comp, Jet2):
                gmat[b, c] = gmat[c, b] = comp.value
                dg[:, b, c] = dg[:, c, b] = comp.grad
            else:
                gmat[b, c] = gmat[c, b] = comp
    if abs(np.linalg.det(gmat)) < 1e-300 or np.linalg.cond(gmat) > 1e14:
        raise SingularMetric(f"metric not invertible at {list(x)}")
    ginv = np.linalg.inv(gmat)
    # lowered[r, b, c] = d_c g_rb + d_b g_rc - d_r g_bc
    lowered = np.einsum("crb->rbc", dg) + np.einsum("brc->rbc", dg) - dg
    return 0.5 * np.einsum("ar,rbc->abc", ginv, lowered)


def geodesic_residual(traj: Trajectory, g: TensorField) -> np.ndarray:
    """``||a + Gamma(v, v)|| / (||Gamma(v, v)|| + 1)`` per sample."""
    out = []
    for s in traj.samples:
        a = assemble_eom(traj.lagrangian, traj.gauge, s)
        gvv = np.einsum("abc,b,c->a", christoffel(g, s.x), s.v, s.v)
        out.append(np.linalg.norm(a + gvv) / (np.linalg.norm(gvv) + 1.0))
    return np.array(out)


class ScanResult(NamedTuple):
    slope: float
    speeds: np.ndarray
    differences: np.ndarray
    degenerate: bool


def gauge_insensitivity_scan(L, states: Sequence[State], gauges=None,
                             rounding: float = 1e-13) -> ScanResult:
    """Fit ``log ||a_1 - a_2||`` against ``log |spatial v|``.

    Only spatial acceleration components are compared: along the null
    direction of the Hessian the time component differs at first order.
    The fit is flagged degenerate when every difference sits at rounding
    level, and the slope is then ``nan``.
    """
    g1, g2 = gauges if gauges is not None else (LagrangianConst(), ProperTime())
    speeds, diffs, scales = [], [], []
    for s in states:
        a1 = assemble_eom(L, g1, s)
        a2 = assemble_eom(L, g2, s)
        speeds.append(float(np.linalg.norm(s.v[1:])))
        diffs.append(float(np.linalg.norm(a1[1:] - a2[1:])))
        scales.append(float(max(np.linalg.norm(a1), np.linalg.norm(a2), 1.0)))
    speeds, diffs = np.array(speeds), np.array(diffs)
    if np.all(diffs <= rounding * np.array(scales) * 100):
        return ScanResult(float("nan"), speeds, diffs, True)
    slope = float(np.polyfit(np.log(speeds), np.log(diffs), 1)[0])
    return ScanResult(slope, speeds, diffs, False)
