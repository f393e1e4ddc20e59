"""Amplitude estimation: Grover operator, angle readout, coherent function registers.

A state preparation splits |0...0> into cos(theta) |good> + sin(theta) |bad>,
where "good" means every flag qubit reads 0.  The Grover operator rotates the
plane spanned by the two branches by 2*theta, so phase estimation on it reads
theta off the phase register.  Register values are folded through two's
complement so both +-theta branches decode to the same cos(theta).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .statevector import (
    StateVector,
    UnitaryOp,
    _check_capacity,
    measure,
    phase_estimation,
    qpe_forward,
    qpe_inverse,
    register_distribution,
    twos_complement,
)


@dataclass(frozen=True)
class FixedPointFormat:
    """Signed two's-complement fixed point; default covers [-2, 2) with 16 fraction bits."""

    fraction_bits: int = 16
    integer_bits: int = 2  # includes the sign bit

    @property
    def total_bits(self) -> int:
        return self.fraction_bits + self.integer_bits

    @property
    def max_value(self) -> float:
        return (2 ** (self.total_bits - 1) - 1) / 2**self.fraction_bits

    @property
    def min_value(self) -> float:
        return -(2 ** (self.total_bits - 1)) / 2**self.fraction_bits

    def encode(self, value: float) -> tuple[int, bool]:
        """Return (code, saturated); out-of-range values clamp to the end of scale."""
        raw = round(value * 2**self.fraction_bits)
        lo = -(2 ** (self.total_bits - 1))
        hi = 2 ** (self.total_bits - 1) - 1
        saturated = raw < lo or raw > hi
        raw = min(max(raw, lo), hi)
        return raw % 2**self.total_bits, saturated

    def decode(self, code: int) -> float:
        return twos_complement(code, self.total_bits) / 2**self.fraction_bits


DEFAULT_FORMAT = FixedPointFormat()


@dataclass
class StatePrep:
    """A preparation unitary (or just its output state) plus the flag qubits."""

    num_qubits: int
    flag_qubits: tuple[int, ...]
    state: np.ndarray
    unitary: np.ndarray | None = None

    def __post_init__(self):
        self.flag_qubits = tuple(self.flag_qubits)
        self.state = np.asarray(self.state, dtype=complex).ravel()
        if self.state.size != 2**self.num_qubits:
            raise ValueError("state length does not match num_qubits")
        if abs(np.linalg.norm(self.state) - 1.0) > 1e-8:
            raise ValueError("prepared state is not normalized")
        if not self.flag_qubits or any(
            not 0 <= f < self.num_qubits for f in self.flag_qubits
        ):
            raise ValueError(f"invalid flag qubits {self.flag_qubits}")
        if self.unitary is not None:
            U = np.asarray(self.unitary, dtype=complex)
            err = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
            if err > 1e-10:
                raise ValueError(f"preparation is not unitary (deviation {err:.3e})")
            self.unitary = U

    @classmethod
    def from_unitary(cls, unitary: np.ndarray, flag_qubits: Sequence[int]) -> "StatePrep":
        unitary = np.asarray(unitary, dtype=complex)
        k = unitary.shape[0].bit_length() - 1
        return cls(k, tuple(flag_qubits), unitary[:, 0], unitary)

    @classmethod
    def from_state(cls, state: np.ndarray, flag_qubits: Sequence[int],
                   build_unitary: bool = False) -> "StatePrep":
        state = np.asarray(state, dtype=complex).ravel()
        k = state.size.bit_length() - 1
        unitary = _completion_unitary(state) if build_unitary else None
        return cls(k, tuple(flag_qubits), state, unitary)

    def good_mask(self) -> np.ndarray:
        """Boolean mask over basis states where every flag qubit is 0."""
        idx = np.arange(2**self.num_qubits)
        mask = np.ones_like(idx, dtype=bool)
        for f in self.flag_qubits:
            shift = self.num_qubits - 1 - f
            mask &= (idx >> shift) & 1 == 0
        return mask

    @property
    def theta(self) -> float:
        """Rotation angle in [0, pi/2] with cos(theta) the good-branch amplitude."""
        mask = self.good_mask()
        good = np.linalg.norm(self.state[mask])
        bad = np.linalg.norm(self.state[~mask])
        return math.atan2(bad, good)


def _completion_unitary(state: np.ndarray) -> np.ndarray:
    """A unitary whose first column is exactly the given unit vector."""
    d = state.size
    M = np.eye(d, dtype=complex)
    M[:, 0] = state
    Q, _ = np.linalg.qr(M)
    # QR fixes column 0 only up to phase; rotate it back
    phase = np.vdot(Q[:, 0], state)
    Q[:, 0] *= phase / abs(phase)
    return Q


@dataclass
class AmplitudeEstimate:
    """Folded QPE readout of the rotation angle."""

    theta_tilde: float
    n_bits: int
    raw_register: int
    probability_estimate: float = field(init=False)

    def __post_init__(self):
        self.probability_estimate = math.sin(self.theta_tilde) ** 2


def grover_operator(prep: StatePrep) -> UnitaryOp:
    """G = (2|phi><phi| - I) * M with M = -1 on every non-good basis state."""
    phi = prep.state
    d = phi.size
    refl = 2.0 * np.outer(phi, phi.conj()) - np.eye(d)
    signs = np.where(prep.good_mask(), 1.0, -1.0)
    return UnitaryOp(refl * signs[np.newaxis, :])


def fold_register(y: int, n_bits: int) -> float:
    """Map a register outcome to theta_tilde = |y_signed| * pi / 2^n."""
    return abs(twos_complement(y, n_bits)) * math.pi / 2**n_bits


def _plane_rotation(theta: float) -> UnitaryOp:
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return UnitaryOp(np.array([[c, -s], [s, c]], dtype=complex))


def qpe_on_grover_distribution(theta: float, n_bits: int) -> np.ndarray:
    """Exact phase-register distribution of QPE on the Grover operator.

    Computed on the 2-dimensional invariant subspace spanned by the good and
    bad branches, where G acts as the rotation by 2*theta.
    """
    inp = StateVector(1, np.array([math.cos(theta), math.sin(theta)], dtype=complex))
    out = phase_estimation(_plane_rotation(theta), inp, n_bits)
    return register_distribution(out, list(range(n_bits)))


def estimate_theta(prep: StatePrep, n_bits: int, rng: np.random.Generator,
                   repeats: int = 1) -> AmplitudeEstimate:
    """QPE on the Grover operator, measured and folded.

    repeats > 1 (odd) reruns the estimate and reports the median theta_tilde.
    """
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    if repeats < 1 or repeats % 2 == 0:
        raise ValueError("repeats must be odd and >= 1")
    probs = qpe_on_grover_distribution(prep.theta, n_bits)
    outcomes = rng.choice(2**n_bits, size=repeats, p=probs / probs.sum())
    folded = sorted((fold_register(int(y), n_bits), int(y)) for y in outcomes)
    theta_tilde, raw = folded[repeats // 2]
    return AmplitudeEstimate(theta_tilde=theta_tilde, n_bits=n_bits, raw_register=raw)


def estimate_theta_full_circuit(prep: StatePrep, n_bits: int,
                                rng: np.random.Generator) -> AmplitudeEstimate:
    """Same contract as estimate_theta but simulating the full Grover operator."""
    G = grover_operator(prep)
    inp = StateVector(prep.num_qubits, prep.state)
    out = phase_estimation(G, inp, n_bits)
    bits, _ = measure(out, list(range(n_bits)), rng)
    y = int("".join(map(str, bits)), 2)
    return AmplitudeEstimate(theta_tilde=fold_register(y, n_bits), n_bits=n_bits,
                             raw_register=y)


def ae_bits_for_accuracy(epsilon: float) -> int:
    """Phase bits so the grid is below epsilon, plus two bits of success margin."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return max(1, math.ceil(math.log2(math.pi / epsilon)) + 2)


def ae_query_count(n_bits: int, repeats: int = 1) -> int:
    """Controlled-G applications in one QPE pass: 2^n - 1 per repetition."""
    return (2**n_bits - 1) * repeats


def coherent_estimate(prep: StatePrep, f: Callable[[float], float], n_bits: int,
                      fmt: FixedPointFormat = DEFAULT_FORMAT) -> StateVector:
    """QPE, evaluate f(cos theta~) into a fixed-point register, undo the QPE.

    Returns the [phase, system, function] state; for a dyadic angle the result
    is the exact product state |phi>|f(cos theta)>.
    """
    k = prep.num_qubits
    w = fmt.total_bits
    _check_capacity(n_bits + k + w)
    G = grover_operator(prep)
    amps = np.zeros(2 ** (n_bits + k + w), dtype=complex)
    amps[np.arange(2**k) * 2**w] = prep.state
    state = StateVector(n_bits + k + w, amps)
    phase_targets = list(range(n_bits))
    system_targets = list(range(n_bits, n_bits + k))
    state = qpe_forward(state, G, phase_targets, system_targets)
    state = _apply_function_register(state, f, n_bits, k, fmt)
    return qpe_inverse(state, G, phase_targets, system_targets)


def _apply_function_register(state: StateVector, f: Callable[[float], float],
                             n_bits: int, k: int, fmt: FixedPointFormat) -> StateVector:
    """XOR f(cos(pi * y_signed / 2^n)) into the trailing function register."""
    w = fmt.total_bits
    psi = state.amplitudes.reshape(2**n_bits, 2**k, 2**w)
    out = np.empty_like(psi)
    z = np.arange(2**w)
    saturated_at = []
    for y in range(2**n_bits):
        val = f(math.cos(math.pi * twos_complement(y, n_bits) / 2**n_bits))
        code, saturated = fmt.encode(val)
        if saturated:
            saturated_at.append((y, val))
        out[y] = psi[y][:, z ^ code]
    if saturated_at:
        warnings.warn(
            f"function values outside [{fmt.min_value}, {fmt.max_value}] were "
            f"saturated at {len(saturated_at)} register value(s)",
            RuntimeWarning,
            stacklevel=3,
        )
    return StateVector(state.num_qubits, out.reshape(-1))


def parallel_estimate(preps: Sequence[StatePrep], fs: Sequence[Callable[[float], float]],
                      weights: np.ndarray, n_bits: int,
                      fmt: FixedPointFormat = DEFAULT_FORMAT) -> StateVector:
    """Index-controlled coherent_estimate: branch j carries f_j(cos theta~_j).

    Register order is [index, phase, system, function]; weights become the
    index-register amplitudes.
    """
    p = len(preps)
    if p == 0 or len(fs) != p:
        raise ValueError("need one function per state preparation")
    weights = np.asarray(weights, dtype=complex).ravel()
    if weights.size != p:
        raise ValueError("need one weight per branch")
    if abs(np.linalg.norm(weights) - 1.0) > 1e-8:
        raise ValueError("weights must have unit norm")
    widths = {prep.num_qubits for prep in preps}
    if len(widths) != 1:
        raise ValueError(f"state preparations differ in width: {sorted(widths)}")
    if p == 1:
        return coherent_estimate(preps[0], fs[0], n_bits, fmt)
    idx_bits = math.ceil(math.log2(p))
    k = preps[0].num_qubits
    branch_size = 2 ** (n_bits + k + fmt.total_bits)
    _check_capacity(idx_bits + n_bits + k + fmt.total_bits)
    amps = np.zeros(2**idx_bits * branch_size, dtype=complex)
    for j, (prep, f, wj) in enumerate(zip(preps, fs, weights)):
        branch = coherent_estimate(prep, f, n_bits, fmt)
        amps[j * branch_size:(j + 1) * branch_size] = wj * branch.amplitudes
    return StateVector(idx_bits + n_bits + k + fmt.total_bits, amps)
