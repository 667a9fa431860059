"""Complex-amplitude algebra for few-photon time-bin states.

States are stored sparsely: a ket assigns a time-bin index (or, after the
Bell-state analyzer, an occupancy tuple) to each labeled photon mode, and a
:class:`StateVector` maps kets to complex amplitudes. Everything here is
immutable and pure.
"""

from __future__ import annotations

import cmath
import enum
import math
from collections.abc import Callable, Iterable, Iterator, Mapping
from fractions import Fraction
from typing import NamedTuple

import numpy as np

PRUNE = 1e-15
NORM_SLACK = 1e-9
TWO_PI = 2.0 * math.pi
TAU_NS = 1.2


class StateError(ValueError):
    """Invalid operation on a state (bad labels, bad bins, bad ranges)."""


class ModeCollisionError(StateError):
    """Tensor product of two states that share a photon label."""


class WavelengthRole(str, enum.Enum):
    signal_1550 = "signal_1550"
    idler_1310 = "idler_1310"


class PhotonLabel(str, enum.Enum):
    """The four photons of the swapping experiment.

    A and D travel to the analyzers at 1550 nm, B and C meet in the Bell-state
    analyzer at 1310 nm.
    """

    A = "A"
    B = "B"
    C = "C"
    D = "D"

    @property
    def wavelength_role(self) -> WavelengthRole:
        if self in (PhotonLabel.A, PhotonLabel.D):
            return WavelengthRole.signal_1550
        return WavelengthRole.idler_1310


def _label(x) -> str:
    return x.value if isinstance(x, enum.Enum) else str(x)


Ket = dict  # label -> bin index (or occupancy tuple after the beamsplitter)


class StateVector:
    """Finitely supported amplitude map over kets sharing one label set.

    ``labels`` is kept sorted; internally each ket is the tuple of its values
    in label order.
    """

    __slots__ = ("labels", "_amps")

    def __init__(self, labels: Iterable, amps: Mapping[tuple, complex] | None = None):
        labels = tuple(_label(x) for x in labels)
        if len(set(labels)) != len(labels):
            raise StateError(f"duplicate labels {labels}")
        order = sorted(range(len(labels)), key=lambda i: labels[i])
        self.labels: tuple[str, ...] = tuple(labels[i] for i in order)
        clean: dict[tuple, complex] = {}
        for key, amp in (amps or {}).items():
            if len(key) != len(labels):
                raise StateError(f"ket {key} does not match labels {labels}")
            key = tuple(key[i] for i in order)
            clean[key] = clean.get(key, 0j) + complex(amp)
        self._amps = {k: a for k, a in clean.items() if abs(a) >= PRUNE}

    @classmethod
    def from_kets(cls, terms: Iterable[tuple[Mapping, complex]]) -> StateVector:
        terms = list(terms)
        if not terms:
            raise StateError("from_kets needs at least one term (use StateVector.empty)")
        labels = tuple(sorted(_label(k) for k in terms[0][0]))
        amps: dict[tuple, complex] = {}
        for ket, amp in terms:
            ket = {_label(k): v for k, v in ket.items()}
            if set(ket) != set(labels):
                raise StateError(f"ket labels {sorted(ket)} differ from {labels}")
            key = tuple(ket[l] for l in labels)
            amps[key] = amps.get(key, 0j) + amp
        return cls(labels, amps)

    @classmethod
    def empty(cls, labels: Iterable) -> StateVector:
        """Zero vector, the sentinel for a projection with probability 0."""
        return cls(labels, {})

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {a:.6g}" for k, a in sorted(self._amps.items(), key=str))
        return f"StateVector({''.join(self.labels)}; {body})"

    def __len__(self) -> int:
        return len(self._amps)

    def __iter__(self) -> Iterator[tuple[Ket, complex]]:
        return self.items()

    def items(self) -> Iterator[tuple[Ket, complex]]:
        for key, amp in self._amps.items():
            yield dict(zip(self.labels, key)), amp

    def raw_items(self):
        return self._amps.items()

    def amplitude(self, ket: Mapping | None = None, **bins) -> complex:
        ket = {_label(k): v for k, v in (ket or {}).items()} | bins
        if set(ket) != set(self.labels):
            raise StateError(f"ket labels {sorted(ket)} differ from {self.labels}")
        return self._amps.get(tuple(ket[l] for l in self.labels), 0j)

    def require_physical(self) -> StateVector:
        """Raise unless the squared norm lies in (0, 1 + NORM_SLACK].

        Sums and differences of states are allowed to leave that range, so
        the check is applied where a state enters a physical operation.
        """
        n = self.norm2()
        if not 0.0 < n <= 1.0 + NORM_SLACK:
            raise StateError(f"squared norm {n} outside (0, 1]")
        return self

    @property
    def is_empty(self) -> bool:
        return not self._amps

    def norm2(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self._amps.values())

    def scaled(self, factor: complex) -> StateVector:
        return StateVector(self.labels, {k: factor * a for k, a in self._amps.items()})

    def normalized(self) -> StateVector:
        n2 = self.norm2()
        if n2 == 0.0:
            return self
        return self.scaled(1.0 / math.sqrt(n2))

    def relabel(self, mapping: Mapping) -> StateVector:
        mapping = {_label(k): _label(v) for k, v in mapping.items()}
        new = tuple(mapping.get(l, l) for l in self.labels)
        return StateVector(new, dict(self._amps))

    def map_kets(self, fn: Callable[[Ket], Iterable[tuple[Ket, complex]]]) -> StateVector:
        """Linear map defined on kets; ``fn`` returns (ket, coefficient) pairs."""
        out: dict[tuple, complex] = {}
        labels = None
        for ket, amp in self.items():
            for new_ket, coef in fn(ket):
                if labels is None:
                    labels = tuple(sorted(new_ket))
                key = tuple(new_ket[l] for l in labels)
                out[key] = out.get(key, 0j) + amp * coef
        if labels is None:
            return StateVector.empty(self.labels)
        return StateVector(labels, out)

    def _check_same(self, other: StateVector) -> None:
        if self.labels != other.labels:
            raise StateError(f"label mismatch {self.labels} vs {other.labels}")

    def __add__(self, other: StateVector) -> StateVector:
        self._check_same(other)
        amps = dict(self._amps)
        for k, a in other._amps.items():
            amps[k] = amps.get(k, 0j) + a
        return StateVector(self.labels, amps)

    def __sub__(self, other: StateVector) -> StateVector:
        return self + other.scaled(-1.0)

    def inner(self, other: StateVector) -> complex:
        """<self|other>."""
        self._check_same(other)
        return sum((a.conjugate() * other._amps.get(k, 0j) for k, a in self._amps.items()), 0j)

    def distance(self, other: StateVector) -> float:
        """Largest amplitude difference over the union of supports."""
        self._check_same(other)
        keys = set(self._amps) | set(other._amps)
        return max((abs(self._amps.get(k, 0j) - other._amps.get(k, 0j)) for k in keys), default=0.0)


def ket(labels: str, bins: Iterable[int]) -> dict:
    """``ket("AD", (0, 1))`` -> ``{"A": 0, "D": 1}``."""
    bins = tuple(bins)
    if len(labels) != len(bins):
        raise StateError("labels and bins differ in length")
    return dict(zip(labels, bins))


class BellKind(str, enum.Enum):
    phi_plus = "phi_plus"
    phi_minus = "phi_minus"
    psi_plus = "psi_plus"
    psi_minus = "psi_minus"


BRANCH_ORDER = (BellKind.phi_plus, BellKind.phi_minus, BellKind.psi_plus, BellKind.psi_minus)


class BellPhase(NamedTuple):
    kind: BellKind
    phase: float = 0.0

    @classmethod
    def make(cls, kind: BellKind | str, phase: float = 0.0) -> BellPhase:
        kind = BellKind(kind)
        if kind in (BellKind.psi_plus, BellKind.psi_minus):
            phase = 0.0
        return cls(kind, math.fmod(phase, TWO_PI) % TWO_PI)


def bell_state(kind: BellKind | str | BellPhase, delta: float = 0.0, labels: str = "XY") -> StateVector:
    """One of the four Bell states on two photons.

    phi+-(delta) = (|0,0> +- e^{i delta}|1,1>)/sqrt2, psi+- = (|1,0> +- |0,1>)/sqrt2,
    with the first label written first.
    """
    bp = kind if isinstance(kind, BellPhase) else BellPhase.make(kind, delta)
    x, y = labels
    h = 1 / math.sqrt(2)
    if bp.kind is BellKind.phi_plus:
        terms = [((0, 0), h), ((1, 1), h * cmath.exp(1j * bp.phase))]
    elif bp.kind is BellKind.phi_minus:
        terms = [((0, 0), h), ((1, 1), -h * cmath.exp(1j * bp.phase))]
    elif bp.kind is BellKind.psi_plus:
        terms = [((1, 0), h), ((0, 1), h)]
    else:
        terms = [((1, 0), h), ((0, 1), -h)]
    return StateVector.from_kets((ket(x + y, b), a) for b, a in terms)


def tensor(s1: StateVector, s2: StateVector) -> StateVector:
    """Tensor product of states on disjoint photon sets."""
    common = set(s1.labels) & set(s2.labels)
    if common:
        raise ModeCollisionError(f"labels {sorted(common)} appear in both factors")
    labels = s1.labels + s2.labels
    amps = {k1 + k2: a1 * a2 for k1, a1 in s1.raw_items() for k2, a2 in s2.raw_items()}
    return StateVector(labels, amps)


def pair_state(c0: complex, c1: complex, labels: str) -> StateVector:
    """c0|0,0> + c1|1,1> on the two given photons."""
    return StateVector.from_kets([(ket(labels, (0, 0)), c0), (ket(labels, (1, 1)), c1)])


def partial_inner(s: StateVector, bra: StateVector) -> StateVector:
    """Contract ``s`` with <bra| on the bra's labels; returns the remaining photons."""
    missing = set(bra.labels) - set(s.labels)
    if missing:
        raise StateError(f"photons {sorted(missing)} not in state")
    rest = tuple(l for l in s.labels if l not in bra.labels)
    idx_bra = [s.labels.index(l) for l in bra.labels]
    idx_rest = [s.labels.index(l) for l in rest]
    bra_amps = dict(bra.raw_items())
    out: dict[tuple, complex] = {}
    for key, amp in s.raw_items():
        b = bra_amps.get(tuple(key[i] for i in idx_bra))
        if b is None:
            continue
        r = tuple(key[i] for i in idx_rest)
        out[r] = out.get(r, 0j) + b.conjugate() * amp
    return StateVector(rest, out)


class BellBranch(NamedTuple):
    kind: BellKind
    amplitude: float
    state: StateVector


def bell_decompose(s: StateVector, pair: tuple = ("B", "C")) -> list[BellBranch]:
    """Expand a four-photon state in the Bell basis of ``pair``.

    Branches come in the order phi+, phi-, psi+, psi- (phase 0 for the phi
    kinds). The amplitude is real and non-negative; any phase stays inside the
    normalized state of the remaining photons. A branch with zero weight
    carries an empty state.
    """
    pair = tuple(_label(p) for p in pair)
    need = set(pair) | {"A", "B", "C", "D"}
    if not need <= set(s.labels):
        raise StateError(f"bell_decompose needs photons {sorted(need)}, state has {s.labels}")
    s.require_physical()
    for key, _ in s.raw_items():
        if any(v not in (0, 1) for v in key):
            raise StateError(f"bins outside {{0, 1}} in ket {key}")
    branches = []
    for kind in BRANCH_ORDER:
        rest = partial_inner(s, bell_state(kind, 0.0, labels=pair[0] + pair[1]))
        amp = math.sqrt(rest.norm2())
        state = rest.scaled(1.0 / amp) if amp > 0 else rest
        branches.append(BellBranch(kind, amp, state))
    return branches


def recompose(branches: Iterable[BellBranch], pair: tuple = ("B", "C")) -> StateVector:
    """Inverse of :func:`bell_decompose`."""
    total = None
    for br in branches:
        if br.state.is_empty:
            continue
        term = tensor(bell_state(br.kind, 0.0, labels=pair[0] + pair[1]), br.state).scaled(br.amplitude)
        total = term if total is None else total + term
    return total


def project(s: StateVector, pattern: Callable[[Ket], bool]) -> tuple[float, StateVector]:
    """Keep kets matching ``pattern``.

    Returns the probability relative to the input norm and the renormalized
    filtered state (the empty sentinel when nothing survives).
    """
    n_in = s.require_physical().norm2()
    kept = {}
    for k, a in s.raw_items():
        if pattern(dict(zip(s.labels, k))):
            kept[k] = a
    sub = StateVector(s.labels, kept)
    if sub.is_empty or n_in == 0.0:
        return 0.0, StateVector.empty(s.labels)
    return sub.norm2() / n_in, sub.normalized()


def fidelity_pure(s: StateVector, t: StateVector) -> float:
    """|<s|t>|^2; insensitive to global phase."""
    if s.labels != t.labels:
        raise StateError(f"label mismatch {s.labels} vs {t.labels}")
    return min(1.0, abs(s.inner(t)) ** 2)


def internal_phase(s: StateVector) -> float:
    """Phase of the |1,1> amplitude relative to |0,0>, in [0, 2pi)."""
    a = s.amplitude(dict(zip(s.labels, (0, 0))))
    b = s.amplitude(dict(zip(s.labels, (1, 1))))
    if a == 0 or b == 0:
        raise StateError("state has no |0,0>/|1,1> coherence")
    return cmath.phase(b / a) % TWO_PI


# -- two-qubit density matrices -------------------------------------------

_BASIS = ((0, 0), (0, 1), (1, 0), (1, 1))


def to_vector(s: StateVector) -> np.ndarray:
    """Two-photon state as a length-4 array in the lexicographic bin basis."""
    if len(s.labels) != 2:
        raise StateError("to_vector expects a two-photon state")
    v = np.zeros(4, dtype=complex)
    for key, amp in s.raw_items():
        v[_BASIS.index(key)] = amp
    return v


def _psi_plus_vec() -> np.ndarray:
    return to_vector(bell_state(BellKind.psi_plus, labels="AD"))


def werner_state(V: float) -> np.ndarray:
    """V |psi+><psi+| + (1 - V)/4 * 1 in the basis |00>, |01>, |10>, |11>."""
    if not 0.0 <= V <= 1.0:
        raise StateError(f"visibility {V} outside [0, 1]")
    v = _psi_plus_vec()
    rho = V * np.outer(v, v.conj()) + (1.0 - V) / 4.0 * np.eye(4)
    rho.flags.writeable = False
    return rho


def expectation(rho: np.ndarray, s: StateVector) -> float:
    v = to_vector(s)
    return float(np.real(v.conj() @ rho @ v))


def _exact(fn, x: float) -> float:
    # Evaluate on the decimal the float was written as, then round once, so
    # that e.g. V = 0.80 maps to exactly F2 = 0.85.
    return float(fn(Fraction(repr(float(x)))))


def visibility_from_fidelity(F2: float) -> float:
    if not 0.25 <= F2 <= 1.0:
        raise StateError(f"fidelity {F2} outside [1/4, 1]")
    return _exact(lambda f: (4 * f - 1) / 3, F2)


def fidelity_from_visibility(V: float) -> float:
    if not 0.0 <= V <= 1.0:
        raise StateError(f"visibility {V} outside [0, 1]")
    return _exact(lambda v: (3 * v + 1) / 4, V)


class Entanglement(str, enum.Enum):
    separable_compatible = "separable_compatible"
    entangled = "entangled"
    bell_violating = "bell_violating"


PERES_BOUND = 1.0 / 3.0
BELL_BOUND = 1.0 / math.sqrt(2.0)


def classify_entanglement(V: float) -> Entanglement:
    if V > BELL_BOUND:
        return Entanglement.bell_violating
    if V > PERES_BOUND:
        return Entanglement.entangled
    return Entanglement.separable_compatible
