"""State diagnostics: fidelity, reduced density matrices, entropy.

These certify protocol outputs: a maximally hyperentangled two-photon
state has one bit of entanglement entropy in each degree of freedom of
either photon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import FockError, FockState, inner
from .measurement import WeightedEnsemble

EIGENVALUE_FLOOR = 1e-12


@dataclass(frozen=True)
class ReducedDensity:
    """Hermitian unit-trace matrix over labeled basis states."""

    labels: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (len(self.labels), len(self.labels)):
            raise FockError("matrix shape does not match labels")
        if abs(np.trace(m).real - 1.0) > 1e-10 or abs(np.trace(m).imag) > 1e-10:
            raise FockError(f"trace {np.trace(m)} is not 1")
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise FockError("matrix is not Hermitian")
        if np.linalg.eigvalsh(m).min() < -EIGENVALUE_FLOOR:
            raise FockError("matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)


def fidelity(state: FockState | WeightedEnsemble, target: FockState) -> float:
    """Squared overlap with a pure target; ensemble-weighted for mixtures."""
    if isinstance(state, WeightedEnsemble):
        return float(sum(w * fidelity(s, target) for w, s in state.members))
    f = abs(inner(target, state)) ** 2
    return float(min(1.0, f))


def _dual_rail_amplitudes(
    state: FockState, side_paths: dict[str, tuple[str, str]]
) -> tuple[np.ndarray, tuple[str, ...]]:
    """Amplitude matrix of a two-photon dual-rail state.

    Rows index Alice's (spatial, polarization) value, columns Bob's.
    Raises when any configuration is not one photon per side.
    """
    reg = state.register
    abasis: list[tuple[int, str]] = []
    bbasis: list[tuple[int, str]] = []
    a_paths = side_paths["alice"]
    b_paths = side_paths["bob"]
    index_to_logical: dict[int, tuple[str, int, str]] = {}
    for side, paths, basis in (("alice", a_paths, abasis), ("bob", b_paths, bbasis)):
        for spatial_value, path in enumerate(paths, start=1):
            for pol in ("H", "V"):
                idx = reg.index(path + pol)
                index_to_logical[idx] = (side, spatial_value, pol)
                basis.append((spatial_value, pol))
    dim = len(abasis)
    mat = np.zeros((dim, dim), dtype=complex)
    for cfg, amp in state.items():
        occupied: dict[str, tuple[int, str]] = {}
        for idx, n in cfg.pairs:
            if idx not in index_to_logical:
                raise FockError("photon outside the dual-rail paths")
            if n != 1:
                raise FockError("bunched photons are not a dual-rail state")
            side, spatial_value, pol = index_to_logical[idx]
            if side in occupied:
                raise FockError(f"two photons on the {side} side")
            occupied[side] = (spatial_value, pol)
        if set(occupied) != {"alice", "bob"}:
            raise FockError("configuration is not one photon per side")
        mat[abasis.index(occupied["alice"]), bbasis.index(occupied["bob"])] += amp
    labels = tuple(f"s{sv}{pol}" for sv, pol in bbasis)
    return mat, labels


def reduce_photon(
    state: FockState,
    side: str,
    dof: str,
    alice_paths: tuple[str, str] = ("a1", "a2"),
    bob_paths: tuple[str, str] = ("b1", "b2"),
) -> ReducedDensity:
    """Reduced density matrix of one photon of a dual-rail two-photon state.

    ``side`` is ``"alice"`` or ``"bob"``; ``dof`` is ``"polarization"``,
    ``"spatial"``, or ``"both"`` (2x2, 2x2, or 4x4 output).
    """
    if side not in ("alice", "bob"):
        raise FockError(f"unknown side {side!r}")
    if dof not in ("polarization", "spatial", "both"):
        raise FockError(f"unknown dof {dof!r}")
    mat, labels = _dual_rail_amplitudes(
        state, {"alice": alice_paths, "bob": bob_paths}
    )
    norm = math.sqrt((np.abs(mat) ** 2).sum())
    mat = mat / norm
    if side == "bob":
        rho = mat.conj().T @ mat
    else:
        rho = mat @ mat.conj().T
    if dof == "both":
        return ReducedDensity(labels, rho)
    # basis order is (s1,H), (s1,V), (s2,H), (s2,V): spatial x polarization
    r4 = rho.reshape(2, 2, 2, 2)
    if dof == "polarization":
        rho2 = np.einsum("iaib->ab", r4)
        sub = ("H", "V")
    else:
        rho2 = np.einsum("aibi->ab", r4)
        sub = ("s1", "s2")
    return ReducedDensity(sub, rho2)


def entropy(rd: ReducedDensity) -> float:
    """Von Neumann entropy in bits; eigenvalues below 1e-12 count as zero."""
    vals = np.linalg.eigvalsh(rd.matrix)
    total = 0.0
    for v in vals:
        if v > EIGENVALUE_FLOOR:
            total -= float(v) * math.log2(float(v))
    return total
