"""Ready-made interaction-field configurations and 1-form helpers.

Charts:

* ``minkowski``, ``uniform_em``, ``coulomb_em``: Cartesian ``(t, x, y, z)``
  (``minkowski`` accepts ``dim``).
* ``schwarzschild``: static spherical ``(t, r, theta, phi)``; ``r > 2.1 M``
  is enforced on evaluation.  Optional ``q``, ``Z`` add the potential
  ``A_t = Z / r`` coupled with charge ``q``.
* ``sn_ansatz``, ``minkowski_plus_sn``: the two-dimensional ``(t, r)`` chart
  with velocity ``(w, v) = (dt/dtau, dr/dtau)``.  Profiles ``psi``/``phi``
  are polynomials in ``r`` given as ``psi_0, psi_1, ...`` coefficients.

Signature is ``(+, -, -, -)`` throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import jet
from .errors import MissingParam, SingularMetric, UnknownParam, UnknownPreset, ZeroProfile, ZeroVelocity
from .jet import Jet2
from .lagrangian import CanonicalTerm, Lagrangian
from .tensor import ScalarField, SymTensor, TensorField


@dataclass(frozen=True)
class PresetSpec:
    name: str
    params: Mapping[str, float] = field(default_factory=dict)


def _horner(coeffs: Sequence[float], r):
    out = 0.0
    for c in reversed(coeffs):
        out = out * r + c
    return out


@dataclass(frozen=True)
class AnsatzProfiles:
    """Polynomial radial profiles; ``psi[k]`` multiplies ``r**k``."""

    psi: tuple[float, ...]
    phi: tuple[float, ...]

    def psi_at(self, r):
        return _horner(self.psi, r)

    def phi_at(self, r):
        return _horner(self.phi, r)

    def psi_jet(self, r: float) -> tuple[float, float, float]:
        return jet.derivative(self.psi_at, r)

    def phi_jet(self, r: float) -> tuple[float, float, float]:
        return jet.derivative(self.phi_at, r)


def _coeffs(params: Mapping[str, float], prefix: str) -> tuple[float, ...]:
    keys = sorted((k for k in params if k.startswith(prefix + "_")),
                  key=lambda k: int(k.split("_", 1)[1]))
    if not keys:
        raise MissingParam(f"{prefix}_0")
    out = [0.0] * (int(keys[-1].split("_", 1)[1]) + 1)
    for k in keys:
        out[int(k.split("_", 1)[1])] = float(params[k])
    return tuple(out)


def eta(dim: int = 4) -> SymTensor:
    return SymTensor.from_dict(2, dim, {(a, a): (1.0 if a == 0 else -1.0) for a in range(dim)})


def minkowski_field(dim: int = 4) -> TensorField:
    g = eta(dim)
    return TensorField(2, dim, lambda x: g, "g")


def schwarzschild_field(M: float) -> TensorField:
    def g(x):
        r, th = x[1], x[2]
        if np.any(jet.value_of(r) <= 2.1 * M):
            raise SingularMetric(f"r = {jet.value_of(r)} violates horizon guard r > 2.1M")
        f = 1.0 - 2.0 * M / r
        s = jet.sin(th)
        return {(0, 0): f, (1, 1): -1.0 / f, (2, 2): -(r * r), (3, 3): -(r * r) * (s * s)}

    return TensorField(2, 4, g, "g")


def uniform_em_potential(B: float) -> TensorField:
    return TensorField(1, 4, lambda x: {(2,): x[1] * B}, "A")


def coulomb_potential(Z: float) -> TensorField:
    def A(x):
        r = jet.sqrt(x[1] * x[1] + x[2] * x[2] + x[3] * x[3])
        return {(0,): Z / r}

    return TensorField(1, 4, A, "A")


def sn_field(n: int, profiles: AnsatzProfiles) -> TensorField:
    def S(x):
        r = x[1]
        return {(0,) * n: profiles.psi_at(r), (1,) * n: profiles.phi_at(r)}

    return TensorField(n, 2, S, f"S{n}")


_PRESET_PARAMS = {
    "minkowski": ({"m": 1.0, "dim": 4.0}, ()),
    "schwarzschild": ({"m": 1.0, "q": 0.0, "Z": 0.0}, ("M",)),
    "uniform_em": ({"q": 1.0, "m": 1.0}, ("B",)),
    "coulomb_em": ({"q": 1.0, "m": 1.0}, ("Z",)),
    "sn_ansatz": ({"delta": 1.0}, ("n",)),
    "minkowski_plus_sn": ({"m": 1.0}, ("n", "delta")),
}


def _resolve(spec: PresetSpec) -> dict[str, float]:
    if spec.name not in _PRESET_PARAMS:
        raise UnknownPreset(spec.name)
    defaults, required = _PRESET_PARAMS[spec.name]
    profile_keys = spec.name in ("sn_ansatz", "minkowski_plus_sn")
    for k in spec.params:
        is_profile = profile_keys and (k.startswith("psi_") or k.startswith("phi_"))
        if k not in defaults and k not in required and not is_profile:
            raise UnknownParam(f"{spec.name} has no parameter {k!r}")
    for k in required:
        if k not in spec.params:
            raise MissingParam(f"{spec.name} requires {k!r}")
    out = dict(defaults)
    out.update({k: float(v) for k, v in spec.params.items()})
    return out


def ansatz_profiles(params: Mapping[str, float]) -> AnsatzProfiles:
    return AnsatzProfiles(_coeffs(params, "psi"), _coeffs(params, "phi"))


def make_preset(spec: PresetSpec) -> tuple[list[TensorField], Lagrangian]:
    """Fields of a preset and the canonical Lagrangian wiring them together."""
    p = _resolve(spec)
    name = spec.name
    if name == "minkowski":
        dim = int(p["dim"])
        g = minkowski_field(dim)
        return [g], Lagrangian(dim, (CanonicalTerm(2, p["m"], g),))
    if name == "schwarzschild":
        g = schwarzschild_field(p["M"])
        if p["q"] == 0.0:
            return [g], Lagrangian(4, (CanonicalTerm(2, p["m"], g),))
        # charged test particle in the field of a charge Z at the origin
        A = TensorField(1, 4, lambda x: {(0,): p["Z"] / x[1]}, "A")
        return [A, g], Lagrangian(4, (CanonicalTerm(1, p["q"], A), CanonicalTerm(2, p["m"], g)))
    if name in ("uniform_em", "coulomb_em"):
        A = uniform_em_potential(p["B"]) if name == "uniform_em" else coulomb_potential(p["Z"])
        g = minkowski_field(4)
        L = Lagrangian(4, (CanonicalTerm(1, p["q"], A), CanonicalTerm(2, p["m"], g)))
        return [A, g], L
    n = int(p["n"])
    if n != p["n"] or n < 1:
        raise ValueError(f"order n must be a positive integer, got {p['n']}")
    S = sn_field(n, ansatz_profiles(p))
    if name == "sn_ansatz":
        return [S], Lagrangian(2, (CanonicalTerm(n, p["delta"], S),))
    g = minkowski_field(2)
    return [g, S], Lagrangian(2, (CanonicalTerm(2, p["m"], g), CanonicalTerm(n, p["delta"], S)))


def faraday(A: TensorField, x: Sequence[float]) -> np.ndarray:
    """``F_{mu nu} = d_mu A_nu - d_nu A_mu`` at ``x``."""
    xj = jet.variables([float(a) for a in x], order=1)
    comps = A(xj).components
    m = A.dim
    J = np.zeros((m, m))
    for nu, c in enumerate(comps):
        if isinstance(c, Jet2):
            J[:, nu] = c.grad
    return J - J.T


def gauge_transform(A: TensorField, f: ScalarField) -> TensorField:
    """``A + df``."""

    def shifted(x):
        comps = A(x).components
        return SymTensor(1, A.dim, [a + g for a, g in zip(comps, f.grad(x))])

    return TensorField(1, A.dim, shifted, A.name)


def ansatz_accel(n: int, profiles: AnsatzProfiles, w: float, v: float, r: float,
                 as_printed: bool = False) -> tuple[float, float]:
    """Closed-form ``(dv/dtau, dw/dtau)`` for ``L = psi(r) w^n + phi(r) v^n``.

    The radial equation's ``psi'`` term carries ``1/(n(n-1))``, which is what
    the Euler-Lagrange equations of the monomial give and what keeps ``S_n``
    conserved.  ``as_printed=True`` returns the variant with ``1/(n-1)``
    instead, for comparison with the literature form.
    """
    if n > 2 and abs(v) < 1e-12:
        raise ZeroVelocity(f"radial speed {v} too small for order-{n} ansatz")
    psi, dpsi, _ = profiles.psi_jet(r)
    phi, dphi, _ = profiles.phi_jet(r)
    if phi == 0.0 or psi == 0.0:
        raise ZeroProfile(f"psi({r}) = {psi}, phi({r}) = {phi}")
    k = (n - 1) if as_printed else n * (n - 1)
    dv = -v * v * dphi / (n * phi) + w**n * dpsi / (k * phi * v ** (n - 2))
    dw = -w * v * dpsi / ((n - 1) * psi)
    return dv, dw


def sample_phase_point(name: str, params: Mapping[str, float], rng: np.random.Generator
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Random ``(x, v)`` in a preset's chart with positive order-2 radicand.

    The velocity is unit-normalized and then scaled by a factor in
    ``[0.3, 3]``, so homogeneity identities are probed off the mass shell.
    """
    scale = rng.uniform(0.3, 3.0)
    if name == "schwarzschild":
        M = float(params["M"])
        r = rng.uniform(4.0 * M, 30.0 * M)
        th = rng.uniform(0.3, 2.8)
        x = np.array([rng.uniform(-5, 5), r, th, rng.uniform(0, 2 * np.pi)])
        f = 1 - 2 * M / r
        vr, vth, vph = rng.normal(scale=[0.2, 0.02, 0.02])
        spatial = -vr**2 / f - r**2 * vth**2 - r**2 * np.sin(th) ** 2 * vph**2
        vt = np.sqrt((1 - spatial) / f)
        return x, scale * np.array([vt, vr, vth, vph])
    if name in ("uniform_em", "coulomb_em", "minkowski"):
        dim = int(params.get("dim", 4))
        x = rng.uniform(-2, 2, size=dim)
        if name == "coulomb_em":
            x[1:] += np.sign(x[1:]) * 0.5
        u = rng.normal(scale=0.5, size=dim - 1)
        return x, scale * np.concatenate([[np.sqrt(1 + u @ u)], u])
    if name in ("sn_ansatz", "minkowski_plus_sn"):
        r = rng.uniform(0.5, 3.0)
        vr = rng.uniform(-0.8, 0.8)
        w = np.sqrt(1 + vr**2)
        return np.array([rng.uniform(-1, 1), r]), scale * np.array([w, vr])
    raise UnknownPreset(name)
