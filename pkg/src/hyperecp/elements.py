"""Catalog of lossless linear-optical elements and detectors.

Matrix conventions (fixed so that every lowered matrix is real):

* unbalanced beam splitter, reflection coefficient R, T = sqrt(1 - R^2):
  ``[[R, T], [T, -R]]`` applied identically to the H and V modes of the
  two paths; the balanced splitter is the R = 1/sqrt(2) case.
* polarizing beam splitter: identity on the H modes, swap of the V modes
  between the two paths, no reflection phase.
* wave plate, angle theta, acting on (H, V) of one path:
  ``[[cos t, sin t], [sin t, -cos t]]`` so that H -> cos t H + sin t V.
  The fixed plates are WavePlate(pi/4) (polarization Hadamard) and
  WavePlate(pi/2) (bit flip X).
* polarization phase flip: diag(1, -1) on (H, V) of one path.
* spatial phase flip: +1 on every mode of the first path, -1 on every
  mode of the second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import FockError, FockState, ModeRegister, ModeUnitary, apply_unitary


@dataclass(frozen=True)
class BalancedBS:
    """50:50 beam splitter between two paths."""

    path_a: str
    path_b: str


@dataclass(frozen=True)
class UnbalancedBS:
    """Beam splitter with tunable reflection coefficient R in [0, 1]."""

    path_a: str
    path_b: str
    r: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.r <= 1.0:
            raise FockError(f"reflection coefficient {self.r} outside [0, 1]")


@dataclass(frozen=True)
class PBS:
    """Polarizing beam splitter: transmits H, reflects V between paths."""

    path_a: str
    path_b: str


@dataclass(frozen=True)
class WavePlate:
    """Rotates polarization on one path by angle theta."""

    path: str
    theta: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.theta):
            raise FockError("wave plate angle must be finite")


@dataclass(frozen=True)
class HalfWavePlate45:
    """Polarization Hadamard on one path."""

    path: str


@dataclass(frozen=True)
class HalfWavePlate90:
    """Polarization bit flip X on one path."""

    path: str


@dataclass(frozen=True)
class PolPhaseFlip:
    """diag(1, -1) on (H, V) of one path."""

    path: str


@dataclass(frozen=True)
class Delay:
    """Time-delay line; identity on the simulated state."""

    path: str


@dataclass(frozen=True)
class SpatialPhaseFlip:
    """sigma_z on a pair of paths: +1 on the first, -1 on the second."""

    path_a: str
    path_b: str


Element = (
    BalancedBS
    | UnbalancedBS
    | PBS
    | WavePlate
    | HalfWavePlate45
    | HalfWavePlate90
    | PolPhaseFlip
    | Delay
    | SpatialPhaseFlip
)


@dataclass(frozen=True)
class DetectorSpec:
    """Single-photon detector watching one or more spatial paths.

    ``resolving`` selects number resolution; a threshold detector reports
    at most one count.  ``efficiency`` is the probability that an arriving
    photon registers.
    """

    name: str
    paths: tuple[str, ...]
    resolving: bool = False
    efficiency: float = 1.0

    def __post_init__(self) -> None:
        if not self.paths:
            raise FockError(f"detector {self.name!r} watches no paths")
        if not 0.0 <= self.efficiency <= 1.0:
            raise FockError(f"detector efficiency {self.efficiency} outside [0, 1]")

    def mode_indices(self, register: ModeRegister) -> tuple[int, ...]:
        out: list[int] = []
        for p in self.paths:
            out.extend(register.path_indices(p))
        return tuple(out)


def _two_path_unitaries(
    register: ModeRegister, pa: str, pb: str, matrix: np.ndarray
) -> list[ModeUnitary]:
    """The same 2x2 matrix on the H pair and on the V pair of two paths."""
    ah, av = register.path_indices(pa)
    bh, bv = register.path_indices(pb)
    return [
        ModeUnitary((ah, bh), matrix),
        ModeUnitary((av, bv), matrix),
    ]


def lower(element: Element, register: ModeRegister) -> list[ModeUnitary]:
    """Lower an element to mode unitaries on a concrete register."""
    if isinstance(element, BalancedBS):
        r = 1.0 / math.sqrt(2.0)
        m = np.array([[r, r], [r, -r]])
        return _two_path_unitaries(register, element.path_a, element.path_b, m)
    if isinstance(element, UnbalancedBS):
        r = element.r
        t = math.sqrt(max(0.0, 1.0 - r * r))
        m = np.array([[r, t], [t, -r]])
        return _two_path_unitaries(register, element.path_a, element.path_b, m)
    if isinstance(element, PBS):
        _, av = register.path_indices(element.path_a)
        _, bv = register.path_indices(element.path_b)
        swap = np.array([[0.0, 1.0], [1.0, 0.0]])
        return [ModeUnitary((av, bv), swap)]
    if isinstance(element, WavePlate):
        h, v = register.path_indices(element.path)
        c, s = math.cos(element.theta), math.sin(element.theta)
        return [ModeUnitary((h, v), np.array([[c, s], [s, -c]]))]
    if isinstance(element, HalfWavePlate45):
        return lower(WavePlate(element.path, math.pi / 4), register)
    if isinstance(element, HalfWavePlate90):
        return lower(WavePlate(element.path, math.pi / 2), register)
    if isinstance(element, PolPhaseFlip):
        h, v = register.path_indices(element.path)
        return [ModeUnitary((h, v), np.diag([1.0, -1.0]))]
    if isinstance(element, Delay):
        register.path_indices(element.path)
        return []
    if isinstance(element, SpatialPhaseFlip):
        register.path_indices(element.path_a)
        bh, bv = register.path_indices(element.path_b)
        minus = np.array([[-1.0]])
        return [ModeUnitary((bh,), minus), ModeUnitary((bv,), minus)]
    raise FockError(f"unknown element {element!r}")


def apply(state: FockState, element: Element) -> FockState:
    """Apply an element to a state by lowering and folding its unitaries."""
    for u in lower(element, state.register):
        state = apply_unitary(state, u)
    return state
