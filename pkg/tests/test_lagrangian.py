import numpy as np
import pytest

from reparam import jet
from reparam.backgrounds import eta, minkowski_field, schwarzschild_field
from reparam.errors import DimMismatch, SignDomain, ZeroLagrangian
from reparam.lagrangian import (CanonicalTerm, Lagrangian, Monomial, VelocityPotential,
                                conjugate_momentum, eval_lagrangian, eval_monomial, eval_term,
                                hamiltonian, homogeneity_degree, source_tensor, v_hessian,
                                velocity_metric)
from reparam.tensor import (ScalarField, SymTensor, TensorField, contract_full, multiplicities,
                            packed_size, sorted_indices)

from helpers import CANONICAL_PRESETS, preset, random_state

ETA = minkowski_field(4)
T0 = [1.0, 0.0, 0.0, 0.0]
ORIGIN = [0.0, 0.0, 0.0, 0.0]


def const_field(rank, dim, entries):
    return TensorField.constant(SymTensor.from_dict(rank, dim, entries))


def sn_ansatz_term(psi, phi, n=4, weight=1.0):
    return CanonicalTerm(n, weight, const_field(n, 2, {(0,) * n: psi, (1,) * n: phi}))


# -- eval_term / eval -------------------------------------------------------

def test_eval_term_examples():
    assert eval_term(CanonicalTerm(2, 1.0, ETA), ORIGIN, T0) == 1.0
    A = const_field(1, 4, {(0,): 0.5})
    assert eval_term(CanonicalTerm(1, 2.0, A), ORIGIN, T0) == 1.0
    assert eval_term(sn_ansatz_term(2.0, 0.0), [0, 1], [1, 0]) == pytest.approx(2**0.25, rel=1e-15)


def test_eval_term_sign_domain_and_dims():
    with pytest.raises(SignDomain):
        eval_term(CanonicalTerm(2, 1.0, ETA), ORIGIN, [0, 1, 0, 0])
    with pytest.raises(SignDomain):
        eval_term(CanonicalTerm(2, 1.0, ETA), ORIGIN, [1, 1, 0, 0])
    with pytest.raises(DimMismatch):
        eval_term(CanonicalTerm(2, 1.0, ETA), ORIGIN, [1, 0, 0])
    with pytest.raises(DimMismatch):
        CanonicalTerm(3, 1.0, ETA)


def test_eval_examples():
    A = const_field(1, 4, {(0,): 1.0})
    L = Lagrangian(4, (CanonicalTerm(1, 1.0, A), CanonicalTerm(2, 1.0, ETA)))
    assert eval_lagrangian(L, ORIGIN, T0) == 2.0
    assert eval_lagrangian(Lagrangian(4), ORIGIN, T0) == 0.0
    lam = ScalarField(4, lambda x: x[0], lambda x: [1.0, 0.0, 0.0, 0.0])
    assert eval_lagrangian(Lagrangian(4, (), lam), ORIGIN, [3, 0, 0, 0]) == 3.0


def test_eval_monomial_examples():
    t = CanonicalTerm(2, 1.0, ETA)
    assert eval_monomial(t, ORIGIN, T0) == 1.0
    assert eval_monomial(t, ORIGIN, [0, 1, 0, 0]) == -1.0
    assert eval_monomial(sn_ansatz_term(1.0, 1.0), [0, 1], [1, 1]) == 2.0


# -- momenta, Hamiltonian, degree ------------------------------------------------

def test_conjugate_momentum_examples():
    quad = Monomial(CanonicalTerm(2, 1.0, ETA))
    assert conjugate_momentum(quad, ORIGIN, T0) == pytest.approx([2, 0, 0, 0])
    root = Lagrangian(4, (CanonicalTerm(2, 1.0, ETA),))
    assert conjugate_momentum(root, ORIGIN, T0) == pytest.approx([1, 0, 0, 0])


@pytest.mark.parametrize("name", sorted(CANONICAL_PRESETS))
def test_euler_identity_p_dot_v_equals_L(name):
    rng = np.random.default_rng(11)
    _, L = preset(name)
    for _ in range(10):
        s = random_state(name, rng)
        p = conjugate_momentum(L, s.x, s.v)
        assert p @ s.v == pytest.approx(eval_lagrangian(L, s.x, s.v), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("name", sorted(CANONICAL_PRESETS))
def test_null_hamiltonian(name):
    rng = np.random.default_rng(5)
    _, L = preset(name)
    for _ in range(100):
        s = random_state(name, rng)
        Lv = eval_lagrangian(L, s.x, s.v)
        assert abs(hamiltonian(L, s.x, s.v)) <= 1e-10 * abs(Lv)


def test_hamiltonian_of_monomials():
    g = schwarzschild_field(1.0)
    x = [0.0, 7.0, 1.0, 0.3]
    v = [1.3, 0.1, 0.01, 0.02]
    S2 = Monomial(CanonicalTerm(2, 1.0, g))
    L2 = eval_monomial(S2.term, x, v)
    assert hamiltonian(S2, x, v) == pytest.approx(L2, rel=1e-12)
    S4 = Monomial(sn_ansatz_term(1.3, 0.7))
    x2, v2 = [0.0, 1.0], [1.1, 0.4]
    assert hamiltonian(S4, x2, v2) == pytest.approx(3 * eval_monomial(S4.term, x2, v2), rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_h_equals_n_minus_one_L(n):
    rng = np.random.default_rng(n)
    S = SymTensor(n, 3, rng.normal(size=packed_size(3, n)))
    term = CanonicalTerm(n, 1.7, TensorField.constant(S))
    mono = Monomial(term)
    for _ in range(100):
        x, v = rng.normal(size=3), rng.normal(size=3)
        L = eval_monomial(term, x, v)
        assert abs(hamiltonian(mono, x, v) - (n - 1) * L) <= 1e-10 * abs(L)


def test_homogeneity_degree():
    rng = np.random.default_rng(8)
    _, L = preset("uniform_em")
    s = random_state("uniform_em", rng)
    assert homogeneity_degree(L, s.x, s.v) == pytest.approx(1.0, rel=1e-12)
    assert homogeneity_degree(Monomial(CanonicalTerm(2, 1.0, ETA)), ORIGIN, [2, 1, 0, 0]) == pytest.approx(2.0)
    assert homogeneity_degree(Monomial(sn_ansatz_term(1, 1)), [0, 1], [1, 0.5]) == pytest.approx(4.0)
    with pytest.raises(ZeroLagrangian):
        homogeneity_degree(Lagrangian(4), ORIGIN, T0)


@pytest.mark.parametrize("alpha", [0.5, 2.0, 7.0])
@pytest.mark.parametrize("name", sorted(CANONICAL_PRESETS))
def test_degree_one_scaling(name, alpha):
    rng = np.random.default_rng(21)
    _, L = preset(name)
    for _ in range(5):
        s = random_state(name, rng)
        base = eval_lagrangian(L, s.x, s.v)
        assert eval_lagrangian(L, s.x, alpha * s.v) == pytest.approx(alpha * base, rel=1e-12)


# -- velocity Hessian ---------------------------------------------------------

@pytest.mark.parametrize("name", sorted(CANONICAL_PRESETS))
def test_hessian_degeneracy(name):
    rng = np.random.default_rng(9)
    _, L = preset(name)
    m = L.dim
    for _ in range(20):
        s = random_state(name, rng)
        M, rep = v_hessian(L, s.x, s.v)
        normM = np.linalg.norm(M.to_dense())
        assert rep.null_residual <= 1e-9
        assert abs(rep.det) <= 1e-9 * normM**m
        assert rep.rank <= m - 1


def test_quadratic_hessian():
    M, rep = v_hessian(Monomial(CanonicalTerm(2, 1.0, ETA)), ORIGIN, [1.0, 0.2, 0.1, 0.0])
    assert np.allclose(M.to_dense(), 2 * eta(4).to_dense())
    assert rep.det == pytest.approx(-16.0)
    assert rep.rank == 4


# -- sources --------------------------------------------------------------------

def test_source_tensor_examples():
    S = source_tensor(CanonicalTerm(2, 1.0, ETA), ORIGIN, T0)
    assert S[0, 0] == pytest.approx(0.5)
    A = const_field(1, 4, {(0,): 3.0, (2,): -1.0})
    v = [1.2, 0.3, -0.4, 0.5]
    assert source_tensor(CanonicalTerm(1, 2.0, A), ORIGIN, v).components == pytest.approx(v)


def field_component_gradient(term, x, v):
    """Jet2 oracle: dL/dS per ordered slot, from derivatives w.r.t. packed components."""
    S = term.field(x).values()
    comps = jet.variables([float(c) for c in S.components], order=1)
    live = TensorField.constant(SymTensor(term.order, term.dim, comps))
    out = eval_term(CanonicalTerm(term.order, 1.0, live), x, v)
    return out.grad / np.array(multiplicities(term.dim, term.order))


@pytest.mark.parametrize("n,dim", [(1, 3), (2, 4), (3, 3), (4, 2)])
def test_source_consistency(n, dim):
    rng = np.random.default_rng(30 + n)
    for _ in range(10):
        # positive radicand: odd ranks need S(v..v) > 0, so flip sign if needed
        S = SymTensor(n, dim, rng.normal(size=packed_size(dim, n)))
        v = rng.normal(size=dim)
        if n > 1 and contract_full(S, v) <= 0:
            S = SymTensor(n, dim, [-c for c in S.components])
            if contract_full(S, v) <= 0:
                continue
        term = CanonicalTerm(n, 1.0, TensorField.constant(S))
        got = np.array(source_tensor(term, np.zeros(dim), v).components)
        want = field_component_gradient(term, np.zeros(dim), v)
        assert np.allclose(got, want, rtol=1e-9, atol=1e-12)


def test_two_metric_sources_are_both_proportional_to_vv():
    rng = np.random.default_rng(40)
    m = 3
    size = packed_size(m, 2)
    for _ in range(10):
        v = rng.normal(size=m)
        hc = rng.normal(size=size)
        gc = rng.normal(size=size)
        if contract_full(SymTensor(2, m, gc), v) <= 0:
            gc = -gc
        jh = jet.variables(hc, order=1, start=0, k=2 * size)
        jg = jet.variables(gc, order=1, start=size, k=2 * size)
        L = contract_full(SymTensor(2, m, jh), v) * contract_full(SymTensor(2, m, jg), v) ** -0.5
        mult = np.array(multiplicities(m, 2))
        dh = L.grad[:size] / mult
        dg = L.grad[size:] / mult
        vv = np.array([v[a] * v[b] for a, b in sorted_indices(m, 2)])
        for src in (dh, dg):
            coef = src @ vv / (vv @ vv)
            assert np.linalg.norm(src - coef * vv) <= 1e-9 * np.linalg.norm(src)


# -- velocity-dependent metric ---------------------------------------------------

def test_velocity_metric_of_velocity_independent_potential():
    A = VelocityPotential(4, lambda x, v: [x[1], 2.0, 0.0, x[0] * x[2]])
    g = velocity_metric(A, [0.3, 0.1, 0.2, 0.4], [1.0, 0.2, 0.3, 0.1])
    assert np.all(g.to_dense() == 0)


def test_velocity_metric_degree_zero_and_one():
    gmat = np.diag([0.8, -1.25, -100.0, -70.0])
    x = [0.0, 10.0, 1.2, 0.0]
    zero = VelocityPotential(4, lambda x, v: [sum(gmat[a, b] * v[b] for b in range(4))
                                               / jet.sqrt(sum(gmat[c, c] * v[c] * v[c] for c in range(4)))
                                               for a in range(4)])
    one = VelocityPotential(4, lambda x, v: [sum(gmat[a, b] * v[b] for b in range(4)) for a in range(4)])
    v = np.array([1.5, 0.1, 0.02, 0.03])
    G0 = velocity_metric(zero, x, v).to_dense()
    assert abs(v @ G0 @ v) <= 1e-10 * np.linalg.norm(G0) * (v @ v)
    G1 = velocity_metric(one, x, v).to_dense()
    assert np.allclose(G1, 2 * gmat)
    assert v @ G1 @ v == pytest.approx(2 * v @ gmat @ v)
