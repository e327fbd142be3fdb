"""Model builders: drive Hamiltonians, analytic trajectory, effective couplings, gates.

Unit convention: every rate is expressed in units of a reference coupling η
(η = 1 internally) and time in 1/η, so typical inputs are order-1 numbers.
:func:`rate_to_mhz` / :func:`time_to_us` convert to hardware units for the
reference point η = 2π × 10 MHz.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    CAVITY,
    SIGMA_X,
    HilbertSpace,
    annihilation,
    embed,
    matexp,
)

__all__ = [
    "ETA_REFERENCE_MHZ",
    "PhysicalParams",
    "DriveParams",
    "Trajectory",
    "effective_coupling",
    "hamiltonian_h1",
    "hamiltonian_h2",
    "hamiltonian_h1_provider",
    "hamiltonian_h2_provider",
    "default_dt",
    "trajectory",
    "loop_time",
    "pair_coupling_rate",
    "theta_of_schedule",
    "effective_pair_hamiltonian",
    "effective_all_to_all",
    "effective_chain",
    "gate_unitary",
    "bell_target",
    "ghz_target",
    "rate_to_mhz",
    "time_to_us",
]

#: Reference value of η used by the physical-unit helpers: η = 2π × 10 MHz.
ETA_REFERENCE_MHZ = 10.0

# |+⟩⟨-| and |-⟩⟨+| in the computational basis, with |±⟩ = (|0⟩ ± |1⟩)/√2.
PLUS_MINUS = 0.5 * np.array([[1.0, -1.0], [1.0, -1.0]], dtype=complex)
MINUS_PLUS = PLUS_MINUS.conj().T


@dataclass(frozen=True)
class PhysicalParams:
    """Raw hardware rates behind one qubit's effective drive-cavity coupling.

    All four are angular frequencies in a common unit: ``g`` the qubit-cavity
    coupling, ``omega_l`` the classical drive strength, ``delta_big`` the
    drive detuning from the upper level, ``delta_small`` the residual
    two-photon detuning.  The adiabatic elimination behind
    :func:`effective_coupling` is only trustworthy for
    ``delta_big >> delta_small``; construction warns below a 10× ratio.
    """

    g: float
    omega_l: float
    delta_big: float
    delta_small: float = 0.0

    def __post_init__(self) -> None:
        if self.delta_big <= 0:
            raise ValueError(f"delta_big must be positive, got {self.delta_big}")
        if self.delta_big < 10.0 * abs(self.delta_small):
            warnings.warn(
                "delta_big is less than 10x |delta_small|; the effective "
                "coupling formula degrades outside the dispersive regime",
                stacklevel=3,
            )


def effective_coupling(p: PhysicalParams, approximate: bool = False) -> float:
    """Effective drive-cavity coupling η of one qubit.

    Exact branch: (g·Ω_L/2)(1/(Δ+δ) + 1/Δ).  Approximate branch: g·Ω_L/Δ,
    the leading term for δ → 0.

    Raises
    ------
    ValueError
        If a denominator vanishes or turns negative (Δ + δ ≤ 0).
    """
    if approximate:
        return p.g * p.omega_l / p.delta_big
    if p.delta_big + p.delta_small <= 0:
        raise ValueError(
            f"delta_big + delta_small must be positive, got {p.delta_big + p.delta_small}"
        )
    return 0.5 * p.g * p.omega_l * (1.0 / (p.delta_big + p.delta_small) + 1.0 / p.delta_big)


@dataclass(frozen=True)
class DriveParams:
    """Per-qubit drive parameters for the joint qubits-cavity model.

    ``etas[j]``/``phis[j]`` are the effective coupling and drive phase of
    qubit j+1; ``delta`` is the common drive-cavity detuning and ``omega``
    the Rabi strength (used only by the full Hamiltonian including the
    fast-oscillating terms).  All rates in units of η.
    """

    etas: tuple[float, ...]
    phis: tuple[float, ...]
    delta: float
    omega: float = 0.0

    def __init__(
        self,
        etas: Sequence[float],
        phis: Sequence[float],
        delta: float,
        omega: float = 0.0,
    ) -> None:
        object.__setattr__(self, "etas", tuple(float(e) for e in etas))
        object.__setattr__(self, "phis", tuple(float(p) for p in phis))
        object.__setattr__(self, "delta", float(delta))
        object.__setattr__(self, "omega", float(omega))
        if len(self.etas) != len(self.phis):
            raise ValueError(
                f"etas and phis must have equal length, got {len(self.etas)} and {len(self.phis)}"
            )

    @property
    def n_qubits(self) -> int:
        return len(self.etas)


def _check_space(drive: DriveParams, space: HilbertSpace) -> None:
    if drive.n_qubits != space.n_qubits:
        raise ValueError(
            f"drive defines {drive.n_qubits} qubits but space has {space.n_qubits}"
        )
    if space.cavity_dim < 2:
        raise ValueError("drive Hamiltonians need a non-trivial cavity (cavity_dim >= 2)")


def hamiltonian_h2(drive: DriveParams, space: HilbertSpace, t: float) -> np.ndarray:
    """Spin-dependent dipole force Hamiltonian at time ``t``.

    H(t) = Σ_j η_j [a e^{i(δt + φ_j)} + a† e^{-i(δt + φ_j)}] σ_j^x
    """
    _check_space(drive, space)
    a = embed(annihilation(space.cavity_dim), CAVITY, space)
    h = np.zeros((space.dim, space.dim), dtype=complex)
    for j in range(1, space.n_qubits + 1):
        z = drive.etas[j - 1] * np.exp(1j * (drive.delta * t + drive.phis[j - 1]))
        h += (z * a + np.conj(z) * a.conj().T) @ embed(SIGMA_X, j, space)
    return h


def hamiltonian_h1(drive: DriveParams, space: HilbertSpace, t: float) -> np.ndarray:
    """Full drive Hamiltonian at time ``t``, including the Ω-oscillating terms.

    Adds to :func:`hamiltonian_h2` the cross terms
    Σ_j η_j [a e^{i(δt + φ_j)} (e^{iΩt}|+⟩⟨-|_j - e^{-iΩt}|-⟩⟨+|_j) + h.c.]
    that the strong-driving approximation (Ω ≫ δ, η) discards.
    """
    _check_space(drive, space)
    a = embed(annihilation(space.cavity_dim), CAVITY, space)
    h = hamiltonian_h2(drive, space, t)
    for j in range(1, space.n_qubits + 1):
        z = drive.etas[j - 1] * np.exp(1j * (drive.delta * t + drive.phis[j - 1]))
        cross = embed(
            np.exp(1j * drive.omega * t) * PLUS_MINUS
            - np.exp(-1j * drive.omega * t) * MINUS_PLUS,
            j,
            space,
        )
        term = z * (a @ cross)
        h += term + term.conj().T
    return h


def hamiltonian_h2_provider(
    drive: DriveParams, space: HilbertSpace
) -> Callable[[float], np.ndarray]:
    """Closure t ↦ H2(t) with the time-independent operator content precomputed.

    Identical entrywise to :func:`hamiltonian_h2`; this form keeps per-step
    cost at one scalar-matrix multiply-add, which matters inside integrator
    loops.  The returned callable carries a ``max_frequency`` attribute (the
    fastest oscillation present, |δ|) for integrator-step validation.
    """
    _check_space(drive, space)
    a = embed(annihilation(space.cavity_dim), CAVITY, space)
    b = sum(
        drive.etas[j - 1]
        * np.exp(1j * drive.phis[j - 1])
        * (a @ embed(SIGMA_X, j, space))
        for j in range(1, space.n_qubits + 1)
    )
    b = np.asarray(b, dtype=complex)
    bd = b.conj().T.copy()

    def h_of_t(t: float) -> np.ndarray:
        z = np.exp(1j * drive.delta * t)
        return z * b + np.conj(z) * bd

    h_of_t.max_frequency = abs(drive.delta)  # type: ignore[attr-defined]
    return h_of_t


def hamiltonian_h1_provider(
    drive: DriveParams, space: HilbertSpace
) -> Callable[[float], np.ndarray]:
    """Closure t ↦ H1(t); entrywise identical to :func:`hamiltonian_h1`.

    The cross terms oscillate at δ ± Ω, so ``max_frequency`` is |δ| + |Ω|.
    """
    _check_space(drive, space)
    a = embed(annihilation(space.cavity_dim), CAVITY, space)
    b = np.zeros((space.dim, space.dim), dtype=complex)
    c_plus = np.zeros_like(b)
    c_minus = np.zeros_like(b)
    for j in range(1, space.n_qubits + 1):
        w = drive.etas[j - 1] * np.exp(1j * drive.phis[j - 1])
        b += w * (a @ embed(SIGMA_X, j, space))
        c_plus += w * (a @ embed(PLUS_MINUS, j, space))
        c_minus += w * (a @ embed(MINUS_PLUS, j, space))
    bd = b.conj().T.copy()

    def h_of_t(t: float) -> np.ndarray:
        z = np.exp(1j * drive.delta * t)
        zp = np.exp(1j * (drive.delta + drive.omega) * t)
        zm = np.exp(1j * (drive.delta - drive.omega) * t)
        upper = zp * c_plus - zm * c_minus
        return z * b + np.conj(z) * bd + upper + upper.conj().T

    h_of_t.max_frequency = abs(drive.delta) + abs(drive.omega)  # type: ignore[attr-defined]
    return h_of_t


def default_dt(drive: DriveParams, samples_per_cycle: int = 200) -> float:
    """Step size resolving the fastest drive frequency with the given sampling.

    Default: 2π/(200·max(|δ|, |Ω|)).
    """
    fastest = max(abs(drive.delta), abs(drive.omega))
    if fastest <= 0:
        raise ValueError("drive has no oscillation frequency to resolve")
    return 2.0 * math.pi / (samples_per_cycle * fastest)


@dataclass(frozen=True)
class Trajectory:
    """Sampled phase-space loop (x(t), p(t)) of the driven cavity.

    All points lie on the circle of radius √2η/δ centred at (√2η/δ, 0).
    """

    times: np.ndarray = field(repr=False)
    xs: np.ndarray = field(repr=False)
    ps: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        xs = np.asarray(self.xs, dtype=float)
        ps = np.asarray(self.ps, dtype=float)
        if not (times.shape == xs.shape == ps.shape) or times.ndim != 1:
            raise ValueError("times, xs, ps must be 1-D arrays of equal length")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ps", ps)


def trajectory(eta: float, delta: float, times: Sequence[float]) -> Trajectory:
    """Closed-form displacement loop x(t) = √2η(1-cos δt)/δ, p(t) = √2η sin(δt)/δ.

    This is the loop on the positive-x side of phase space; the two σ^x
    eigenstates trace this curve and its point reflection through the origin.
    Under the sign convention of :func:`hamiltonian_h2`, the σ^x = -1
    eigenstate follows the positive-x loop returned here and the σ^x = +1
    eigenstate its negation.  The loop closes at δt = 2nπ.

    Raises
    ------
    ValueError
        If ``delta`` is zero (the drive is resonant and the loop never closes).
    """
    if delta == 0:
        raise ValueError("delta must be nonzero for a closed displacement loop")
    t = np.asarray(times, dtype=float)
    amp = math.sqrt(2.0) * eta / delta
    return Trajectory(times=t, xs=amp * (1.0 - np.cos(delta * t)), ps=amp * np.sin(delta * t))


def loop_time(delta: float, n: int = 1) -> float:
    """Time τ_n = 2nπ/δ after which the displacement loop has closed n times."""
    if delta == 0:
        raise ValueError("delta must be nonzero")
    if n < 1:
        raise ValueError(f"loop count must be >= 1, got {n}")
    return 2.0 * math.pi * n / delta


def pair_coupling_rate(eta: float, delta: float) -> float:
    """Effective qubit-qubit coupling rate λ = 2η²/δ of the closed-loop gate."""
    if delta == 0:
        raise ValueError("delta must be nonzero")
    return 2.0 * eta**2 / delta


def theta_of_schedule(eta: float, delta: float, n: int = 1, phi1: float = 0.0) -> float:
    """Gate angle θ = λ τ_n cos φ₁ = 4nπη² cos(φ₁)/δ² accumulated over n loops.

    θ = π/4 (the maximally entangling point) is reached by δ = 4√n·η at φ₁=0.
    """
    return pair_coupling_rate(eta, delta) * loop_time(delta, n) * math.cos(phi1)


def effective_pair_hamiltonian(lambda_: float, phi1: float) -> np.ndarray:
    """Two-qubit effective Hamiltonian λ cos(φ₁) σ₁^x σ₂^x (4×4, cavity eliminated)."""
    return lambda_ * math.cos(phi1) * np.kron(SIGMA_X, SIGMA_X)


def effective_all_to_all(
    lambda_: float, phis: Sequence[float], space: HilbertSpace
) -> np.ndarray:
    """All-to-all effective Hamiltonian λ Σ_{j<k} cos(φ_j - φ_k) σ_j^x σ_k^x.

    ``space`` must be qubit-only (cavity_dim = 1): the cavity is already
    eliminated in this picture.

    Raises
    ------
    ValueError
        If fewer than two qubits, or the space retains a cavity factor.
    """
    if space.cavity_dim != 1:
        raise ValueError("effective model lives on a qubit-only space (cavity_dim = 1)")
    n = space.n_qubits
    if n < 2 or len(phis) != n:
        raise ValueError(f"need phis for >= 2 qubits, got {len(phis)} phases for N={n}")
    h = np.zeros((space.dim, space.dim), dtype=complex)
    for j in range(1, n + 1):
        xj = embed(SIGMA_X, j, space)
        for k in range(j + 1, n + 1):
            h += lambda_ * math.cos(phis[j - 1] - phis[k - 1]) * (xj @ embed(SIGMA_X, k, space))
    return h


def effective_chain(lambda_prime: float, phis: Sequence[float], n: int) -> np.ndarray:
    """Nearest-neighbour chain λ' Σ_j cos(φ_j - φ_{j+1}) σ_j^x σ_{j+1}^x on n qubits.

    Raises
    ------
    ValueError
        If ``n < 2`` or the phase list length differs from ``n``.
    """
    if n < 2:
        raise ValueError(f"chain needs n >= 2 qubits, got {n}")
    if len(phis) != n:
        raise ValueError(f"need {n} phases, got {len(phis)}")
    space = HilbertSpace(n_qubits=n, cavity_dim=1)
    h = np.zeros((space.dim, space.dim), dtype=complex)
    for j in range(1, n):
        h += (
            lambda_prime
            * math.cos(phis[j - 1] - phis[j])
            * (embed(SIGMA_X, j, space) @ embed(SIGMA_X, j + 1, space))
        )
    return h


def gate_unitary(theta: float, n: int) -> np.ndarray:
    """Collective gate U(θ) = exp[-i(θ/2)(Σ_j σ_j^x)²] on n qubits.

    For n = 2 this equals exp(-iθ σ₁^x σ₂^x) up to the global phase e^{-iθ}
    contributed by the identity part of the square.  θ = π/4 produces
    maximally entangled states from computational basis states.
    """
    if n < 1:
        raise ValueError(f"gate needs n >= 1 qubits, got {n}")
    space = HilbertSpace(n_qubits=n, cavity_dim=1)
    sx_total = np.zeros((space.dim, space.dim), dtype=complex)
    for j in range(1, n + 1):
        sx_total += embed(SIGMA_X, j, space)
    return matexp(-0.5j * theta * (sx_total @ sx_total))


def bell_target() -> np.ndarray:
    """Maximally entangled two-qubit target: gate_unitary(π/4, 2) |00⟩.

    Equals e^{-iπ/4}(|00⟩ - i|11⟩)/√2.  Defining the target through the
    package's own gate keeps every fidelity check free of sign-convention
    choices.
    """
    psi0 = np.zeros(4, dtype=complex)
    psi0[0] = 1.0
    return gate_unitary(math.pi / 4.0, 2) @ psi0


def ghz_target(n: int) -> np.ndarray:
    """N-qubit GHZ-class target: gate_unitary(π/4, n) |0…0⟩.

    Raises
    ------
    ValueError
        If ``n < 2``.
    """
    if n < 2:
        raise ValueError(f"GHZ target needs n >= 2 qubits, got {n}")
    psi0 = np.zeros(2**n, dtype=complex)
    psi0[0] = 1.0
    return gate_unitary(math.pi / 4.0, n) @ psi0


def rate_to_mhz(rate_over_eta: float, eta_mhz: float = ETA_REFERENCE_MHZ) -> float:
    """Convert a rate in units of η to MHz (ordinary frequency) for η = 2π·eta_mhz."""
    return rate_over_eta * eta_mhz


def time_to_us(t_over_inv_eta: float, eta_mhz: float = ETA_REFERENCE_MHZ) -> float:
    """Convert a time in units of 1/η to microseconds for η = 2π·eta_mhz."""
    return t_over_inv_eta / (2.0 * math.pi * eta_mhz)
