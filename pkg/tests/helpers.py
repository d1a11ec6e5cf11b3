"""Shared builders for random states and presets used across the test suite."""

import numpy as np

from reparam.backgrounds import PresetSpec, make_preset, sample_phase_point
from reparam.dynamics import State

SN_PARAMS = {"n": 4, "psi_0": 1.0, "psi_1": 0.1, "phi_0": 1.0, "phi_1": 0.05}
COMPOSITE_PARAMS = {"n": 4, "delta": 0.1, "m": 1.0, "psi_0": 1.0, "psi_1": 0.3, "phi_0": 1.0}

CANONICAL_PRESETS = {
    "schwarzschild": {"M": 1.0},
    "uniform_em": {"B": 0.7, "q": 1.3, "m": 1.0},
    "coulomb_em": {"Z": 0.5, "q": -1.0, "m": 2.0},
    "minkowski_plus_sn": COMPOSITE_PARAMS,
    "sn_ansatz": SN_PARAMS,
}


def preset(name, params=None):
    return make_preset(PresetSpec(name, dict(CANONICAL_PRESETS.get(name, {}) if params is None else params)))


def random_state(name, rng, params=None):
    """A random timelike (radicand-positive) state for a preset chart."""
    params = CANONICAL_PRESETS.get(name, {}) if params is None else params
    return State(0.0, *sample_phase_point(name, params, rng))


def circular_orbit(M, r):
    """Equatorial circular geodesic: state at tau=0 and its proper period."""
    ut = 1.0 / np.sqrt(1.0 - 3.0 * M / r)
    uph = np.sqrt(M / r**3) * ut
    return State(0.0, np.array([0.0, r, np.pi / 2, 0.0]), np.array([ut, 0.0, 0.0, uph])), 2 * np.pi / uph


def orbit_roots(M, a, e):
    """Inverse radii of aphelion and perihelion and the third root of the orbit cubic."""
    u1, u2 = 1.0 / (a * (1 + e)), 1.0 / (a * (1 - e))
    return u1, u2, 1.0 / (2 * M) - u1 - u2


def perihelion_state(M, a, e):
    """Equatorial bound geodesic starting at perihelion."""
    u1, u2, _ = orbit_roots(M, a, e)
    inv_l2 = ((u1 + u2) - 2 * M * (u1 * u1 + u1 * u2 + u2 * u2)) / (2 * M)
    ell = 1.0 / np.sqrt(inv_l2)
    E = np.sqrt(ell**2 * (1 - 2 * M * u2) * (inv_l2 + u2 * u2))
    v = np.array([E / (1 - 2 * M * u2), 0.0, 0.0, ell * u2 * u2])
    return State(0.0, np.array([0.0, 1.0 / u2, np.pi / 2, 0.0]), v)


def exact_precession(M, a, e, nodes=64):
    """Per-orbit perihelion advance of a Schwarzschild geodesic by quadrature.

    With u = u1 + (u2 - u1) sin^2(chi) the orbit integral becomes smooth.
    """
    u1, u2, u3 = orbit_roots(M, a, e)
    x, w = np.polynomial.legendre.leggauss(nodes)
    chi = 0.25 * np.pi * (x + 1)
    u = u1 + (u2 - u1) * np.sin(chi) ** 2
    integral = 0.25 * np.pi * np.sum(w * 2.0 / np.sqrt(2 * M * (u3 - u)))
    return 2 * integral - 2 * np.pi


def weak_field_precession(M, a, e):
    return 6 * np.pi * M / (a * (1 - e * e))


def perihelia(traj):
    """``(tau, phi)`` where the radial velocity crosses zero upward (cubic fits)."""
    tau, X, V = traj.tau, traj.x, traj.v
    vr = V[:, 1]
    out = []
    for i in np.nonzero((vr[:-1] < 0) & (vr[1:] >= 0))[0]:
        lo = max(i - 1, 0)
        sl = slice(lo, lo + 4)
        t0 = tau[i]
        cr = np.polyfit(tau[sl] - t0, vr[sl], 3)
        roots = [z.real for z in np.roots(cr) if abs(z.imag) < 1e-12
                 and tau[i] - t0 - 1e-9 <= z.real <= tau[i + 1] - t0 + 1e-9]
        tp = roots[0]
        out.append((t0 + tp, np.polyval(np.polyfit(tau[sl] - t0, X[sl, 3], 3), tp)))
    return out


def measured_precession(M, a, e, steps_per_orbit):
    from reparam.dynamics import TermConst, integrate
    from reparam.lagrangian import Monomial
    _, L = preset("schwarzschild", {"M": M})
    s0 = perihelion_state(M, a, e)
    period = 2 * np.pi * a**1.5 / np.sqrt(M)
    h = period / steps_per_orbit
    traj = integrate(Monomial(L.term_of_order(2)), TermConst(2), s0, h, int(1.6 * steps_per_orbit))
    (_, phi1), *_ = perihelia(traj)
    return phi1 - 2 * np.pi


def inclined_orbit(M, r, inc):
    """Circular geodesic tilted by ``inc``: initial state and exact ``x(tau)``."""
    ut = 1.0 / np.sqrt(1.0 - 3.0 * M / r)
    om = np.sqrt(M / r**3) * ut
    s0 = State(0.0, np.array([0.0, r, np.pi / 2, 0.0]),
               np.array([ut, 0.0, -om * np.sin(inc), om * np.cos(inc)]))

    def exact(tau):
        psi = om * tau
        n = np.array([np.cos(psi), np.sin(psi) * np.cos(inc), np.sin(psi) * np.sin(inc)])
        return np.array([ut * tau, r, np.arccos(n[2]), np.arctan2(n[1], n[0])])

    return s0, exact


def chart_distance(x, y):
    """Euclidean distance between chart points with the last angle taken mod 2 pi."""
    d = np.asarray(x, float) - np.asarray(y, float)
    d[-1] = (d[-1] + np.pi) % (2 * np.pi) - np.pi
    return float(np.linalg.norm(d))
