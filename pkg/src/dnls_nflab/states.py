"""Truncated phase-space states and the scalar functionals living on them.

A state is a finite collection of complex mode amplitudes q_j indexed by
nonzero integers j with 1 <= |j| <= M.  Mode 0 does not exist: the phase
space consists of zero-mean functions on the circle.
"""

from __future__ import annotations

import json
import math
from typing import Mapping

import numpy as np

TWO_PI = 2.0 * math.pi


def mode_range(M: int) -> list[int]:
    """All admissible modes at truncation M, ascending: -M..-1, 1..M."""
    if M < 1:
        raise ValueError("truncation must be at least 1")
    return list(range(-M, 0)) + list(range(1, M + 1))


class FourierState:
    """Immutable finite-support map mode -> complex amplitude.

    Zero amplitudes are dropped on construction, so support() is exact.
    """

    __slots__ = ("_amp", "truncation")

    def __init__(self, amplitudes: Mapping[int, complex], truncation: int):
        if truncation < 1:
            raise ValueError("truncation must be at least 1")
        amp = {}
        for j, v in amplitudes.items():
            j = int(j)
            if j == 0:
                raise ValueError("mode 0 is not part of the phase space")
            if abs(j) > truncation:
                raise ValueError(f"mode {j} exceeds truncation {truncation}")
            v = complex(v)
            if v != 0:
                amp[j] = v
        self._amp = dict(sorted(amp.items()))
        self.truncation = truncation

    @classmethod
    def zero(cls, truncation: int) -> "FourierState":
        return cls({}, truncation)

    def amplitude(self, j: int) -> complex:
        return self._amp.get(j, 0j)

    def items(self):
        return self._amp.items()

    def support(self) -> tuple[int, ...]:
        return tuple(self._amp)

    def __len__(self) -> int:
        return len(self._amp)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FourierState)
            and self.truncation == other.truncation
            and self._amp == other._amp
        )

    def __repr__(self) -> str:
        return f"FourierState({self._amp}, M={self.truncation})"

    # -- vector view ---------------------------------------------------------

    def to_vector(self) -> np.ndarray:
        """Dense complex vector over mode_range(truncation)."""
        modes = mode_range(self.truncation)
        vec = np.zeros(len(modes), dtype=complex)
        index = {j: i for i, j in enumerate(modes)}
        for j, v in self._amp.items():
            vec[index[j]] = v
        return vec

    @classmethod
    def from_vector(cls, vec: np.ndarray, truncation: int) -> "FourierState":
        modes = mode_range(truncation)
        if len(vec) != len(modes):
            raise ValueError("vector length does not match truncation")
        return cls({j: complex(v) for j, v in zip(modes, vec) if v != 0}, truncation)


# -- scalar functionals -------------------------------------------------------


def sobolev_norm(state: FourierState, s: float) -> float:
    """Weighted l2 norm with weights |j|**(2s); s >= 0."""
    if s < 0:
        raise ValueError("Sobolev index must be nonnegative")
    total = sum(abs(v) ** 2 * abs(j) ** (2.0 * s) for j, v in state.items())
    return math.sqrt(total)


def mass(state: FourierState) -> float:
    return sum(abs(v) ** 2 for _, v in state.items())


def lambda_energy(state: FourierState) -> float:
    """Sum of j*|q_j|**2; sign-indefinite."""
    return sum(j * abs(v) ** 2 for j, v in state.items())


def quartic_energy(state: FourierState) -> float:
    """The quartic part: (1/4pi) * sum over zero-momentum quadruples.

    Evaluated through pair sums A_t = sum_{j+l=t} q_j q_l, which gives the
    manifestly nonnegative form (1/4pi) * sum_t |A_t|**2.
    """
    pair: dict[int, complex] = {}
    items = list(state.items())
    for j, qj in items:
        for l, ql in items:
            pair[j + l] = pair.get(j + l, 0j) + qj * ql
    return sum(abs(a) ** 2 for a in pair.values()) / (4.0 * math.pi)


def hamiltonian_coefficients(state: FourierState) -> float:
    """H evaluated in coefficient space: Lambda + quartic part."""
    return lambda_energy(state) + quartic_energy(state)


def eval_physical(state: FourierState, x) -> complex:
    """Sum of q_j e^{ijx} / sqrt(2 pi); accepts scalar or array x."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=complex)
    for j, v in state.items():
        out += v * np.exp(1j * j * x)
    out /= math.sqrt(TWO_PI)
    if out.shape == ():
        return complex(out)
    return out


def hamiltonian_physical(state: FourierState, quadrature_points: int) -> float:
    """Physical-space H = -i * int u_x conj(u) + (1/2) * int |u|^4.

    Uses uniform trapezoid quadrature, exact for band-limited integrands;
    the quartic term has bandwidth 4M, hence the grid-size precondition.
    """
    M = state.truncation
    if quadrature_points < 4 * M + 1:
        raise ValueError(
            f"need at least {4 * M + 1} quadrature points for truncation {M}"
        )
    N = int(quadrature_points)
    x = np.arange(N) * (TWO_PI / N)
    u = eval_physical(state, x)
    ux = np.zeros(N, dtype=complex)
    for j, v in state.items():
        ux += v * (1j * j) * np.exp(1j * j * x)
    ux /= math.sqrt(TWO_PI)
    w = TWO_PI / N
    momentum_term = -1j * np.sum(ux * np.conj(u)) * w
    quartic_term = 0.5 * np.sum(np.abs(u) ** 4) * w
    if abs(momentum_term.imag) > 1e-10 * (1.0 + abs(momentum_term.real)):
        raise ArithmeticError("momentum integral unexpectedly non-real")
    return float(momentum_term.real + quartic_term)


# -- serialization -------------------------------------------------------------


def state_to_json(state: FourierState) -> str:
    rows = [
        {"j": j, "re": v.real, "im": v.imag} for j, v in state.items()
    ]
    return json.dumps(rows)


def state_from_json(text: str, truncation: int) -> FourierState:
    rows = json.loads(text)
    amp: dict[int, complex] = {}
    for row in rows:
        j = int(row["j"])
        if j == 0:
            raise ValueError("mode 0 rejected")
        if j in amp:
            raise ValueError(f"duplicate mode {j}")
        amp[j] = complex(float(row["re"]), float(row["im"]))
    return FourierState(amp, truncation)
