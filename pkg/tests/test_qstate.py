import cmath
import math

import numpy as np
import pytest

from tbswap.qstate import (
    BELL_BOUND,
    BRANCH_ORDER,
    BellKind,
    BellPhase,
    Entanglement,
    ModeCollisionError,
    PhotonLabel,
    StateError,
    StateVector,
    WavelengthRole,
    bell_decompose,
    bell_state,
    classify_entanglement,
    expectation,
    fidelity_from_visibility,
    fidelity_pure,
    internal_phase,
    ket,
    pair_state,
    project,
    recompose,
    tensor,
    to_vector,
    visibility_from_fidelity,
    werner_state,
)

H = 1 / math.sqrt(2)


def swap_input(delta):
    return tensor(bell_state("phi_plus", delta, "AB"), bell_state("phi_minus", delta, "CD"))


def test_photon_roles():
    assert len(PhotonLabel) == 4
    assert PhotonLabel.A.wavelength_role is WavelengthRole.signal_1550
    assert PhotonLabel.D.wavelength_role is WavelengthRole.signal_1550
    assert PhotonLabel.B.wavelength_role is WavelengthRole.idler_1310
    assert PhotonLabel.C.wavelength_role is WavelengthRole.idler_1310


def test_bell_states():
    s = bell_state("psi_plus", labels="XY")
    assert s.amplitude(X=1, Y=0) == pytest.approx(H)
    assert s.amplitude(X=0, Y=1) == pytest.approx(H)
    p = bell_state("phi_plus", 0.0, "XY")
    assert p.amplitude(X=0, Y=0) == pytest.approx(H)
    assert p.amplitude(X=1, Y=1) == pytest.approx(H)
    # phi-(pi) is phi+(0)
    assert bell_state("phi_minus", math.pi, "XY").distance(p) < 1e-15
    assert bell_state("psi_minus").amplitude(X=0, Y=1) == pytest.approx(-H)


def test_bell_phase_reduced():
    assert BellPhase.make("phi_plus", 5 * math.pi).phase == pytest.approx(math.pi)
    assert BellPhase.make("phi_plus", -0.5).phase == pytest.approx(2 * math.pi - 0.5)
    assert BellPhase.make("psi_minus", 1.0).phase == 0.0


def test_tensor_expansion():
    d = 0.7
    s = swap_input(d)
    e = cmath.exp(1j * d)
    expected = {(0, 0, 0, 0): 0.5, (0, 0, 1, 1): -e / 2, (1, 1, 0, 0): e / 2, (1, 1, 1, 1): -(e**2) / 2}
    assert s.labels == ("A", "B", "C", "D")
    assert len(s) == 4
    for bins, amp in expected.items():
        assert abs(s.amplitude(ket("ABCD", bins)) - amp) < 1e-15
    assert s.norm2() == pytest.approx(1.0, abs=1e-12)


def test_tensor_with_unit_ket_and_collision():
    unit = StateVector.from_kets([({"Z": 0}, 1.0)])
    s = bell_state("psi_plus", labels="AD")
    t = tensor(s, unit)
    assert t.labels == ("A", "D", "Z")
    assert t.amplitude(A=1, D=0, Z=0) == pytest.approx(H)
    with pytest.raises(ModeCollisionError):
        tensor(s, bell_state("phi_plus", labels="DX"))


def test_pruning_and_norm_guard():
    s = StateVector("XY", {(0, 0): 1.0, (1, 1): 1e-16})
    assert len(s) == 1
    big = StateVector("X", {(0,): 2.0})
    with pytest.raises(StateError):
        big.require_physical()
    with pytest.raises(StateError):
        project(big, lambda k: True)


def test_bell_decompose_branches():
    d = 0.9
    br = bell_decompose(swap_input(d))
    assert [b.kind for b in br] == list(BRANCH_ORDER)
    for b in br:
        assert b.amplitude == pytest.approx(0.5, abs=1e-12)
        assert b.state.norm2() == pytest.approx(1.0, abs=1e-12)
    psi_minus = br[3].state
    target = bell_state("psi_plus", labels="AD").scaled(cmath.exp(1j * d))
    assert psi_minus.distance(target) < 1e-12
    assert br[0].state.distance(bell_state("phi_minus", 2 * d, "AD")) < 1e-12
    assert recompose(br).distance(swap_input(d)) < 1e-12


def test_bell_decompose_errors():
    with pytest.raises(StateError):
        bell_decompose(bell_state("phi_plus", labels="AB"))
    bad = tensor(pair_state(1.0, 0.0, "AB"), StateVector.from_kets([({"C": 2, "D": 0}, 1.0)]))
    with pytest.raises(StateError):
        bell_decompose(bad)


def test_delta_robustness():
    a = bell_decompose(swap_input(0.0))
    b = bell_decompose(swap_input(1.3))
    assert fidelity_pure(a[3].state, b[3].state) == pytest.approx(1.0, abs=1e-12)
    shift = (internal_phase(b[0].state) - internal_phase(a[0].state)) % (2 * math.pi)
    assert shift == pytest.approx(2.6, abs=1e-9)


def test_project():
    s = bell_state("psi_minus", labels="AD")
    p, t = project(s, lambda k: k["A"] == 1)
    assert p == pytest.approx(0.5)
    assert t.amplitude(A=1, D=0) == pytest.approx(1.0)
    p0, empty = project(s, lambda k: False)
    assert p0 == 0.0 and empty.is_empty


def test_werner_and_fidelity():
    rho = werner_state(0.8)
    assert np.allclose(rho, rho.conj().T, atol=1e-12)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(rho).min() > -1e-10
    assert expectation(rho, bell_state("psi_plus", labels="AD")) == pytest.approx(0.85)
    assert to_vector(bell_state("psi_plus", labels="AD")) == pytest.approx(np.array([0, H, H, 0]))
    with pytest.raises(StateError):
        werner_state(1.2)


def test_visibility_fidelity_identity():
    assert fidelity_from_visibility(0.80) == pytest.approx(0.85, abs=1e-15)
    assert visibility_from_fidelity(0.85) == pytest.approx(0.80, abs=1e-15)
    with pytest.raises(StateError):
        visibility_from_fidelity(0.2)


def test_classification_strict():
    assert classify_entanglement(BELL_BOUND) is Entanglement.entangled
    assert classify_entanglement(BELL_BOUND + 1e-12) is Entanglement.bell_violating
    assert classify_entanglement(1 / 3) is Entanglement.separable_compatible
    assert classify_entanglement(0.5) is Entanglement.entangled
    assert BellKind("psi_minus") is BellKind.psi_minus
