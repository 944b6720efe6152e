import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carmarkov.car import build_fock, regional_subalgebra
from carmarkov.entropy import (
    EntropyReport,
    additivity_residual,
    entropy_hat,
    entropy_vn,
    relative_entropy,
    ssa_hat_residual,
    ssa_residual,
)
from carmarkov.errors import OverlappingRegions, TripleNotCommutingSquare
from carmarkov.markov import hopping_operator
from carmarkov.states import (
    STATE_KINDS,
    StateDensity,
    Triple,
    product_extension,
    random_state,
    regional_triple,
    restrict,
    tracial_state,
    twisted_triple,
)

# eigenvalues of (1 + K)/4 for the two-mode hopping term
RHO_ONE_SPECTRUM = np.array([3 / 8, 1 / 8, 1 / 4, 1 / 4])
S_RHO_ONE = -float(np.sum(RHO_ONE_SPECTRUM * np.log(RHO_ONE_SPECTRUM)))


@pytest.fixture
def rho_one(rep2):
    return StateDensity(rep2, rep2.identity() + hopping_operator(rep2, rep2.a(1), rep2.a(2)))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_tracial_and_pure(n):
    rep = build_fock(n)
    t = tracial_state(rep)
    assert entropy_hat(t) == pytest.approx(0.0, abs=1e-14)
    assert entropy_vn(t) == pytest.approx(n * math.log(2), abs=1e-14)
    p = random_state(rep, "pure", 3)
    assert entropy_vn(p) == pytest.approx(0.0, abs=1e-12)
    assert entropy_hat(p) == pytest.approx(-n * math.log(2), abs=1e-12)


def test_hopping_density_entropy(rho_one):
    assert entropy_vn(rho_one) == pytest.approx(S_RHO_ONE, abs=1e-12)
    assert entropy_hat(rho_one) == pytest.approx(S_RHO_ONE - 2 * math.log(2), abs=1e-12)


@pytest.mark.parametrize("kind", STATE_KINDS)
def test_offset_is_n_log_2(rep3, kind):
    phi = random_state(rep3, kind, 11)
    d = phi.eigenvalues[phi.eigenvalues > 0] / rep3.dim
    s_matrix = -float(np.sum(d * np.log(d)))
    assert entropy_vn(phi) == pytest.approx(s_matrix, abs=1e-10)
    assert s_matrix - entropy_hat(phi) == pytest.approx(3 * math.log(2), abs=1e-10)


def test_entropy_hat_range(rep3):
    for seed in range(10):
        s = entropy_hat(random_state(rep3, "general", seed))
        assert -3 * math.log(2) - 1e-12 <= s <= 1e-12


def test_relative_entropy_examples(rep2, rho_one):
    phi = random_state(rep2, "general", 3)
    assert relative_entropy(phi, phi) == pytest.approx(0.0, abs=1e-12)
    assert relative_entropy(phi, tracial_state(rep2)) == pytest.approx(-entropy_hat(phi),
                                                                      abs=1e-12)
    assert relative_entropy(rho_one, phi) > 0


def test_relative_entropy_support_violation(rep2):
    e0 = np.zeros((4, 4))
    e0[0, 0] = 4
    e1 = np.zeros((4, 4))
    e1[1, 1] = 4
    assert relative_entropy(StateDensity(rep2, e0), StateDensity(rep2, e1)) == math.inf
    # the reverse inclusion is fine: a pure state relative to a faithful one
    assert math.isfinite(relative_entropy(StateDensity(rep2, e0), tracial_state(rep2)))


@pytest.mark.parametrize("kind", STATE_KINDS)
@pytest.mark.parametrize("region", [[1], [2], [1, 3], [2, 3]])
def test_entropy_difference_is_relative_entropy(rep3, kind, region):
    phi = random_state(rep3, kind, 17)
    phi_b = restrict(phi, regional_subalgebra(rep3, region))
    lhs = entropy_hat(phi_b) - entropy_hat(phi)
    assert lhs == pytest.approx(relative_entropy(phi, phi_b), abs=1e-9)


@pytest.mark.parametrize("region", [[1], [2, 3], [1, 3]])
def test_local_and_embedded_entropy_agree(rep3, region):
    sub = regional_subalgebra(rep3, region)
    phi = random_state(rep3, "general", 4)
    phi_b = restrict(phi, sub)
    local = StateDensity(build_fock(len(region)), sub.reduce(phi_b.rho))
    assert entropy_hat(local) == pytest.approx(entropy_hat(phi_b), abs=1e-9)
    assert entropy_vn(local) == pytest.approx(entropy_vn(phi_b), abs=1e-9)


def test_monotonicity_instance(rep3):
    triple = regional_triple(rep3, [1], [2], [3])
    for seed in range(10):
        psi = random_state(rep3, "general", seed)
        psi_bc = restrict(psi, triple.bc)
        lhs = relative_entropy(psi, psi_bc)
        rhs = relative_entropy(restrict(psi, triple.ab), restrict(psi_bc, triple.ab))
        assert lhs >= rhs - 1e-9


def test_ssa_examples(rep3):
    triple = regional_triple(rep3, [1], [2], [3])
    assert ssa_residual(tracial_state(rep3), triple).residual == pytest.approx(0.0, abs=1e-12)
    ab = random_state(rep3, "general", 1, region=[1, 2])
    c = random_state(rep3, "even", 2, region=[3])
    assert ssa_residual(product_extension(ab, c), triple).residual == pytest.approx(0, abs=1e-10)


def test_report_fields(rep3):
    triple = regional_triple(rep3, [1], [2], [3])
    report = ssa_residual(random_state(rep3, "general", 5), triple)
    assert report.residual == report.S_total - report.S_AB - report.S_BC + report.S_B
    assert report.passed
    assert set(report.as_dict()) == {"S_total", "S_AB", "S_BC", "S_B", "residual", "label"}
    assert isinstance(report, EntropyReport)


def test_hat_and_vn_residuals_agree(rep3):
    triple = regional_triple(rep3, [1], [2], [3])
    psi = random_state(rep3, "general", 8)
    assert ssa_hat_residual(psi, triple) == pytest.approx(ssa_residual(psi, triple).residual,
                                                          abs=1e-12)


def test_non_square_rejected(rep3):
    bad = Triple(regional_subalgebra(rep3, [1, 2, 3]), regional_subalgebra(rep3, [1, 2]),
                 regional_subalgebra(rep3, [2, 3]), regional_subalgebra(rep3, []),
                 regional_subalgebra(rep3, [1]), "trivial-B")
    with pytest.raises(TripleNotCommutingSquare):
        ssa_residual(random_state(rep3, "general", 0), bad)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), kind=st.sampled_from(STATE_KINDS))
def test_ssa_holds(seed, kind):
    rep = build_fock(3)
    psi = random_state(rep, kind, seed)
    assert ssa_residual(psi, regional_triple(rep, [1], [2], [3])).residual <= 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_even_states_see_no_twist(seed):
    rep = build_fock(3)
    psi = random_state(rep, "even", seed)
    reg = ssa_residual(psi, regional_triple(rep, [1], [2], [3])).residual
    tw = ssa_residual(psi, twisted_triple(rep, [1], [2], [3])).residual
    assert reg == pytest.approx(tw, abs=1e-9)


def test_additivity_examples(rep2, rho_one):
    a, c = regional_subalgebra(rep2, [1]), regional_subalgebra(rep2, [2])
    assert additivity_residual(tracial_state(rep2), a, c) == pytest.approx(0.0, abs=1e-12)
    assert additivity_residual(rho_one, a, c) == pytest.approx(S_RHO_ONE - 2 * math.log(2),
                                                               abs=1e-12)
    assert S_RHO_ONE - 2 * math.log(2) < 0
    prod = product_extension(random_state(rep2, "even", 1, region=[1]),
                             random_state(rep2, "general", 2, region=[2]))
    assert additivity_residual(prod, a, c) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(OverlappingRegions):
        additivity_residual(rho_one, a, a)


def test_subadditivity(rep3):
    a, c = regional_subalgebra(rep3, [1]), regional_subalgebra(rep3, [2, 3])
    for seed in range(10):
        assert additivity_residual(random_state(rep3, "general", seed), a, c) <= 1e-9
