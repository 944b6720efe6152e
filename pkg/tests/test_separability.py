import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carmarkov.car import build_fock, pauli_images, regional_subalgebra
from carmarkov.errors import (
    BadSplit,
    ComponentNotProduct,
    OverlappingRegions,
    ReconstructionFailed,
    UnsupportedSize,
)
from carmarkov.markov import counterexample, hopping_operator
from carmarkov.separability import (
    SeparabilityCertificate,
    certify,
    even_odd_analysis,
    hopping_witness,
    jw_twist_image,
    partial_transpose,
    ppt_min_eigenvalue,
    product_check,
    verify_decomposition,
)
from carmarkov.states import (
    StateDensity,
    mixture,
    product_extension,
    random_state,
    restrict,
    tracial_state,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])


def rho_lambda(rep, lam):
    return StateDensity(rep, rep.identity() + lam * hopping_operator(rep, rep.a(1), rep.a(2)))


@pytest.mark.parametrize("lam", [0.1, 0.5, 1.0])
def test_witness_value(rep2, lam):
    k = hopping_operator(rep2, rep2.a(1), rep2.a(2))
    assert hopping_witness(rho_lambda(rep2, lam), k) == pytest.approx(lam / 8, abs=1e-15)
    assert hopping_witness(tracial_state(rep2), k) == 0


def test_witness_vanishes_on_car_separable_states(rep2):
    k = hopping_operator(rep2, rep2.a(1), rep2.a(2))
    rng = np.random.default_rng(3)
    for trial in range(100):
        parts = []
        for _ in range(3):
            s1, s2 = (int(x) for x in rng.integers(0, 2**31, size=2))
            even_left = rng.random() < 0.5
            a = random_state(rep2, "even" if even_left else "general", s1, region=[1])
            c = random_state(rep2, "general" if even_left else "even", s2, region=[2])
            parts.append(product_extension(a, c))
        w = rng.dirichlet(np.ones(3))
        assert abs(hopping_witness(mixture(parts, w), k)) <= 1e-9


@pytest.mark.parametrize("lam", [0.25, 0.5, 1.0])
def test_jw_image(rep2, lam):
    img = jw_twist_image(rho_lambda(rep2, lam), [1], [2])
    expected = (np.eye(4) - lam * (np.kron(X, X) + np.kron(Y, Y)) / 4) / 4
    np.testing.assert_allclose(img, expected, atol=1e-15)
    assert ppt_min_eigenvalue(img) == pytest.approx((1 - lam / 2) / 4, abs=1e-12)


def test_jw_image_preserves_expectations(rep3):
    phi = random_state(rep3, "general", 2)
    omega = restrict(phi, regional_subalgebra(rep3, [1, 3]))
    img = jw_twist_image(omega, [1], [3])
    sa = pauli_images(rep3, 1)
    sc = pauli_images(rep3, 3, twist=[1])
    paulis = {"I": np.eye(2), "X": X, "Y": Y, "Z": np.diag([1.0, -1.0])}
    for p in paulis:
        for q in paulis:
            lhs = np.trace(img @ np.kron(paulis[p], paulis[q]))
            assert abs(lhs - omega.expect(sa[p] @ sc[q])) <= 1e-12
    np.testing.assert_allclose(jw_twist_image(tracial_state(rep3), [1], [3]), np.eye(4) / 4,
                               atol=1e-15)


def test_jw_image_errors(rep3):
    with pytest.raises(UnsupportedSize):
        jw_twist_image(tracial_state(rep3), [1], [2, 3])
    with pytest.raises(OverlappingRegions):
        jw_twist_image(tracial_state(rep3), [1], [1])


def test_ppt_oracles():
    bell = np.zeros(4, dtype=complex)
    bell[[0, 3]] = 1 / np.sqrt(2)
    assert ppt_min_eigenvalue(np.outer(bell, bell)) == pytest.approx(-0.5, abs=1e-14)
    v = np.kron([1, 0], [np.cos(0.3), np.sin(0.3)])
    assert ppt_min_eigenvalue(np.outer(v, v)) == pytest.approx(0.0, abs=1e-14)
    rho = np.diag(np.arange(1.0, 7.0)) / 21
    np.testing.assert_allclose(partial_transpose(rho, (2, 3)), rho)
    with pytest.raises(BadSplit):
        ppt_min_eigenvalue(np.eye(4), (3, 2))


def test_certificate_chain():
    omega, spec = counterexample(1.0)
    rep = spec.rep
    marginal = restrict(omega, regional_subalgebra(rep, [1, 5]))
    decomposition = [(comp.weight, comp.rho_ac) for comp in spec.components]
    tw = certify(marginal, [1], [5], "twisted", spec.hopping, decomposition)
    assert tw.verdict == "separable"
    assert tw.ppt_min_eigenvalue == pytest.approx(1 / 8, abs=1e-12)
    assert verify_decomposition(tw, marginal)
    car = certify(marginal, [1], [5], "car", spec.hopping, decomposition)
    assert car.verdict == "nonseparable"
    assert car.witness_value == pytest.approx(1 / 8, abs=1e-12)
    with pytest.raises(ComponentNotProduct):
        verify_decomposition(car, marginal)
    assert tw.as_dict()["verdict"] == "separable"


def test_decomposition_failures(rep2):
    t = tracial_state(rep2)
    for pair in ("car", "twisted"):
        cert = certify(t, [1], [2], pair, decomposition=[(1.0, t)])
        assert verify_decomposition(cert, t)
        assert cert.verdict == "separable"
    cert = certify(t, [1], [2], "car", decomposition=[(1.0, rho_lambda(rep2, 1.0))])
    with pytest.raises(ReconstructionFailed):
        verify_decomposition(cert, t)
    assert cert.verdict == "undecided"
    with pytest.raises(ValueError):
        verify_decomposition(SeparabilityCertificate("car", cert.regions, None, None), t)
    with pytest.raises(ValueError):
        certify(t, [1], [2], "spin")


def test_product_check_examples(rep2):
    even_a = random_state(rep2, "even", 1, region=[1])
    prod = product_extension(even_a, random_state(rep2, "general", 2, region=[2]))
    result = product_check(prod, [1], [2])
    assert result.is_product and result.consistent
    assert result.additivity_residual == pytest.approx(0.0, abs=1e-10)
    assert result.analysis.even_verdict in ("A_even", "both_even")
    assert np.abs(result.analysis.a_minus).max() == 0
    hop = product_check(rho_lambda(rep2, 1.0), [1], [2])
    assert not hop.is_product and hop.additivity_residual < 0 and hop.consistent
    with pytest.raises(OverlappingRegions):
        product_check(prod, [1], [1])


def test_even_odd_parts(rep3):
    phi = random_state(rep3, "general", 6)
    an = even_odd_analysis(phi, [1], [2, 3])
    sub = regional_subalgebra(rep3, [1])
    from carmarkov import linalg
    root = linalg.matrix_function(restrict(phi, sub).rho, "sqrt")
    np.testing.assert_allclose(an.a_plus + an.a_minus, root, atol=1e-12)
    for part in (an.a_plus, an.a_minus, an.c_plus, an.c_minus):
        assert np.abs(part - part.conj().T).max() <= 1e-10


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), kind=st.sampled_from(["general", "even", "product"]))
def test_additivity_iff_product(seed, kind):
    rep = build_fock(2)
    if kind == "product":
        rng = np.random.default_rng(seed)
        a = random_state(rep, "even", int(rng.integers(2**31)), region=[1])
        phi = product_extension(a, random_state(rep, "general", int(rng.integers(2**31)),
                                                region=[2]))
    else:
        phi = random_state(rep, kind, seed)
    result = product_check(phi, [1], [2])
    assert result.consistent
    if result.is_product:
        an = result.analysis
        assert min(an.odd_norm_a, an.odd_norm_c) <= 1e-6
        assert an.max_equation_residual <= 1e-6
        assert max(an.sandwich_c, an.sandwich_a) <= 1e-8
