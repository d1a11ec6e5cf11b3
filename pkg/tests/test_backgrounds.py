import itertools

import numpy as np
import pytest

from reparam import jet
from reparam.backgrounds import (AnsatzProfiles, PresetSpec, ansatz_accel, ansatz_profiles,
                                 coulomb_potential, faraday, gauge_transform, make_preset,
                                 uniform_em_potential)
from reparam.dynamics import State, TermConst, assemble_eom
from reparam.errors import (MissingParam, SingularMetric, UnknownParam, UnknownPreset,
                            ZeroProfile, ZeroVelocity)
from reparam.tensor import ScalarField, TensorField

from helpers import SN_PARAMS


def test_minkowski_preset():
    (g,), L = make_preset(PresetSpec("minkowski"))
    for x in ([0, 0, 0, 0], [3.0, -1.0, 2.0, 7.0]):
        assert np.array_equal(g(x).to_dense(), np.diag([1.0, -1, -1, -1]))
    assert L.orders() == [2]


def test_schwarzschild_gtt():
    (g,), _ = make_preset(PresetSpec("schwarzschild", {"M": 1.0}))
    G = g([0.0, 10.0, np.pi / 2, 0.0]).to_dense()
    assert G[0, 0] == pytest.approx(0.8, rel=1e-15)
    assert G[1, 1] == pytest.approx(-1.25, rel=1e-15)
    with pytest.raises(SingularMetric):
        g([0.0, 2.05, 1.0, 0.0])


def test_schwarzschild_reduces_to_flat_spherical():
    (g,), _ = make_preset(PresetSpec("schwarzschild", {"M": 0.0}))
    rng = np.random.default_rng(0)
    for _ in range(20):
        r, th = rng.uniform(0.5, 20), rng.uniform(0.1, 3.0)
        flat = np.diag([1.0, -1.0, -r * r, -(r * np.sin(th)) ** 2])
        assert np.max(np.abs(g([0.0, r, th, 1.0]).to_dense() - flat)) <= 1e-12


def test_sn_ansatz_components():
    params = {"n": 4, "psi_0": 1.0, "psi_1": 0.1, "phi_0": 1.0}
    (S,), L = make_preset(PresetSpec("sn_ansatz", params))
    T = S([0.0, 2.0])
    assert T[0, 0, 0, 0] == pytest.approx(1.2)
    assert T[1, 1, 1, 1] == 1.0
    for mi in itertools.product(range(2), repeat=4):
        if len(set(mi)) > 1:
            assert T[mi] == 0.0
    assert L.orders() == [4]


def test_preset_errors():
    with pytest.raises(UnknownPreset):
        make_preset(PresetSpec("kerr", {}))
    with pytest.raises(MissingParam):
        make_preset(PresetSpec("schwarzschild", {}))
    with pytest.raises(MissingParam):
        make_preset(PresetSpec("sn_ansatz", {"n": 4, "psi_0": 1.0}))
    with pytest.raises(UnknownParam):
        make_preset(PresetSpec("uniform_em", {"B": 1.0, "E": 2.0}))


def test_composite_preset_wires_weights():
    (g, S), L = make_preset(PresetSpec("minkowski_plus_sn", {"n": 4, "delta": 0.1, "psi_0": 1, "phi_0": 1}))
    assert [(t.order, t.weight) for t in L.terms] == [(2, 1.0), (4, 0.1)]


# -- faraday and gauge transforms -----------------------------------------------

def exact_form():
    # f = x0 * x1 + sin(x2) * x3
    return ScalarField(4, lambda x: x[0] * x[1] + jet.sin(x[2]) * x[3],
                       lambda x: [x[1], x[0], jet.cos(x[2]) * x[3], jet.sin(x[2])])


def test_exact_form_has_no_field_strength():
    f = exact_form()
    A = TensorField(1, 4, lambda x: dict(zip([(0,), (1,), (2,), (3,)], f.grad(x))))
    assert np.allclose(faraday(A, [0.3, -0.2, 1.1, 0.7]), 0.0, atol=1e-15)


def test_uniform_field_strength():
    F = faraday(uniform_em_potential(0.9), [0.1, 0.2, 0.3, 0.4])
    expected = np.zeros((4, 4))
    expected[1, 2], expected[2, 1] = 0.9, -0.9
    assert np.allclose(F, expected, atol=1e-15)


def test_coulomb_field_strength():
    Z = 1.7
    x = np.array([0.2, 0.5, -0.3, 1.1])
    r = np.linalg.norm(x[1:])
    F = faraday(coulomb_potential(Z), x)
    # oracle: central differences of A_0 = Z / r
    h = 1e-6
    for i in range(1, 4):
        e = np.zeros(4)
        e[i] = h
        dA0 = (Z / np.linalg.norm((x + e)[1:]) - Z / np.linalg.norm((x - e)[1:])) / (2 * h)
        assert F[0, i] == pytest.approx(-dA0, rel=1e-8)
        assert F[0, i] == pytest.approx(Z * x[i] / r**3, rel=1e-13)
        assert F[i, 0] == pytest.approx(-Z * x[i] / r**3, rel=1e-13)
    assert np.allclose(F[1:, 1:], 0.0)


def test_gauge_transform_constant_and_shift():
    A = uniform_em_potential(0.5)
    const = ScalarField(4, lambda x: 3.0, lambda x: [0.0, 0.0, 0.0, 0.0])
    x = [0.1, 0.2, 0.3, 0.4]
    assert gauge_transform(A, const)(x).components == A(x).components
    shift = ScalarField(4, lambda x: x[0], lambda x: [1.0, 0.0, 0.0, 0.0])
    Ap = gauge_transform(A, shift)(x)
    assert Ap[0] == A(x)[0] + 1.0


def test_gauge_transform_preserves_faraday():
    rng = np.random.default_rng(2)
    for A in (uniform_em_potential(0.5), coulomb_potential(1.2)):
        Ap = gauge_transform(A, exact_form())
        for _ in range(10):
            x = rng.uniform(0.5, 2.0, size=4)
            assert np.max(np.abs(faraday(Ap, x) - faraday(A, x))) <= 1e-12


# -- closed-form S_n accelerations ------------------------------------------------

def test_ansatz_free_motion():
    flat = AnsatzProfiles((2.0,), (3.0,))
    assert ansatz_accel(4, flat, 1.0, 0.3, 1.0) == (0.0, 0.0)


def test_ansatz_n2_has_no_blowup():
    c = 0.4
    prof = AnsatzProfiles((1.0,), (1.0, c))
    for v in (1e-3, 0.5):
        dv, dw = ansatz_accel(2, prof, 1.0, v, 0.0)
        assert dv == pytest.approx(-v * v * c / 2)
        assert dw == 0.0
    assert ansatz_accel(2, prof, 1.0, 0.0, 0.0) == (0.0, 0.0)


def test_ansatz_second_term_value():
    prof = AnsatzProfiles((1.0, 1.0), (1.0,))  # psi' = 1, psi(0) = phi = 1
    dv, _ = ansatz_accel(4, prof, 1.0, 0.1, 0.0, as_printed=True)
    assert dv == pytest.approx(100.0 / 3.0, rel=1e-13)
    dv, _ = ansatz_accel(4, prof, 1.0, 0.1, 0.0)
    assert dv == pytest.approx(100.0 / 12.0, rel=1e-13)
    a = assemble_eom(make_preset(PresetSpec("sn_ansatz", {"n": 4, "psi_0": 1, "psi_1": 1, "phi_0": 1}))[1],
                     TermConst(4), State(0.0, [0.0, 0.0], [1.0, 0.1]))
    assert a[1] == pytest.approx(dv, rel=1e-12)


def test_ansatz_errors():
    prof = AnsatzProfiles((1.0, 1.0), (1.0,))
    with pytest.raises(ZeroVelocity):
        ansatz_accel(4, prof, 1.0, 0.0, 0.0)
    with pytest.raises(ZeroProfile):
        ansatz_accel(4, AnsatzProfiles((1.0,), (0.0, 1.0)), 1.0, 0.1, 0.0)


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_ansatz_consistency_grid(n):
    params = dict(SN_PARAMS, n=n)
    prof = ansatz_profiles(params)
    _, L = make_preset(PresetSpec("sn_ansatz", params))
    for w, v, r in itertools.product([0.7, 1.0, 1.6], [0.05, 0.4, 1.3], [0.5, 1.5, 3.0]):
        a = assemble_eom(L, TermConst(n), State(0.0, [0.0, r], [w, v]))
        dv, dw = ansatz_accel(n, prof, w, v, r)
        assert a[1] == pytest.approx(dv, rel=1e-9)
        assert a[0] == pytest.approx(dw, rel=1e-9)
