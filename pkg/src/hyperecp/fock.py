"""Sparse second-quantized states over labeled optical modes.

A mode is a (spatial path, polarization) pair such as ``a1H``.  States are
stored as a sparse map from occupation configurations to complex amplitudes,
where each configuration lists only its occupied modes as (index, count)
pairs.  Amplitudes multiply *normalized* number kets, i.e. the term
``amp * |n photons in mode m>`` carries no hidden sqrt(n!) factor; all
bosonic combinatorics live inside :func:`apply_unitary`.

States are immutable values: every operation returns a new state, so they
are safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

#: amplitudes with modulus below this are dropped after every operation
PRUNE_THRESHOLD = 1e-12

#: entrywise tolerance for the U^dagger U = 1 unitarity check
UNITARITY_TOL = 1e-12

POLARIZATIONS = ("H", "V")


class FockError(ValueError):
    """Raised for malformed states, labels, or non-unitary matrices."""


@dataclass(frozen=True)
class ModeLabel:
    """One optical mode: a spatial path plus a polarization."""

    spatial: str
    polarization: str

    def __post_init__(self) -> None:
        if self.polarization not in POLARIZATIONS:
            raise FockError(f"polarization must be H or V, got {self.polarization!r}")

    def __str__(self) -> str:
        return f"{self.spatial}{self.polarization}"

    @staticmethod
    def parse(token: str) -> "ModeLabel":
        """Parse a compact token like ``a1H`` or ``b2'V``."""
        if len(token) < 2 or token[-1] not in POLARIZATIONS:
            raise FockError(f"cannot parse mode label {token!r}")
        return ModeLabel(token[:-1], token[-1])


class ModeRegister:
    """Ordered collection of mode labels with stable indices.

    Paths may be appended but never reordered, so indices remain valid for
    the lifetime of any state built on the register.
    """

    def __init__(self, paths: Iterable[str] = ()) -> None:
        self._labels: list[ModeLabel] = []
        self._index: dict[ModeLabel, int] = {}
        self._paths: list[str] = []
        for p in paths:
            self.add_path(p)

    def add_path(self, path: str) -> None:
        """Declare a spatial path, adding its H and V modes."""
        if path in self._paths:
            raise FockError(f"duplicate path {path!r}")
        self._paths.append(path)
        for pol in POLARIZATIONS:
            label = ModeLabel(path, pol)
            self._index[label] = len(self._labels)
            self._labels.append(label)

    @property
    def paths(self) -> tuple[str, ...]:
        return tuple(self._paths)

    @property
    def labels(self) -> tuple[ModeLabel, ...]:
        return tuple(self._labels)

    def __len__(self) -> int:
        return len(self._labels)

    def index(self, label: ModeLabel | str) -> int:
        if isinstance(label, str):
            label = ModeLabel.parse(label)
        try:
            return self._index[label]
        except KeyError:
            raise FockError(f"mode {label} not in register") from None

    def has_path(self, path: str) -> bool:
        return path in self._paths

    def path_indices(self, path: str) -> tuple[int, int]:
        """Indices of the (H, V) modes of one path."""
        if path not in self._paths:
            raise FockError(f"path {path!r} not in register")
        return (self.index(ModeLabel(path, "H")), self.index(ModeLabel(path, "V")))

    def label(self, index: int) -> ModeLabel:
        return self._labels[index]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ModeRegister) and self._labels == other._labels

    def __repr__(self) -> str:
        return f"ModeRegister(paths={list(self._paths)!r})"


@dataclass(frozen=True)
class OccupationConfig:
    """Occupation counts of one basis configuration, sparsely stored.

    ``pairs`` is a tuple of (mode index, count) with counts >= 1, sorted by
    index.  Two configurations are equal iff all counts agree.
    """

    pairs: tuple[tuple[int, int], ...]

    @staticmethod
    def from_dict(occ: dict[int, int]) -> "OccupationConfig":
        items = tuple(sorted((i, n) for i, n in occ.items() if n > 0))
        for i, n in items:
            if n < 0:
                raise FockError("negative occupation")
        return OccupationConfig(items)

    def get(self, index: int) -> int:
        for i, n in self.pairs:
            if i == index:
                return n
        return 0

    def to_dict(self) -> dict[int, int]:
        return dict(self.pairs)

    def total(self) -> int:
        return sum(n for _, n in self.pairs)

    def count_on(self, indices: Iterable[int]) -> int:
        wanted = set(indices)
        return sum(n for i, n in self.pairs if i in wanted)

    def split(self, indices: Iterable[int]) -> tuple["OccupationConfig", "OccupationConfig"]:
        """Split into (restriction to ``indices``, remainder)."""
        wanted = set(indices)
        inside = tuple(p for p in self.pairs if p[0] in wanted)
        outside = tuple(p for p in self.pairs if p[0] not in wanted)
        return OccupationConfig(inside), OccupationConfig(outside)


VACUUM = OccupationConfig(())


@dataclass(frozen=True)
class ModeUnitary:
    """A k x k unitary bound to k register mode indices.

    Semantics: the creation operator on acted mode i maps to
    sum_j U[j, i] x (creation operator on acted mode j).
    """

    modes: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        k = len(self.modes)
        if m.shape != (k, k):
            raise FockError(f"matrix shape {m.shape} does not match {k} modes")
        if len(set(self.modes)) != k:
            raise FockError("duplicate mode indices in unitary")
        dev = np.abs(m.conj().T @ m - np.eye(k)).max()
        if dev > UNITARITY_TOL:
            raise FockError(f"matrix is not unitary (deviation {dev:.3e})")
        object.__setattr__(self, "matrix", m)


class FockState:
    """Sparse superposition of occupation configurations on a register."""

    __slots__ = ("register", "_amps")

    def __init__(
        self,
        register: ModeRegister,
        amplitudes: dict[OccupationConfig, complex],
        prune: bool = True,
    ) -> None:
        self.register = register
        if prune:
            amplitudes = {
                c: a for c, a in amplitudes.items() if abs(a) >= PRUNE_THRESHOLD
            }
        self._amps = amplitudes

    def items(self) -> Iterator[tuple[OccupationConfig, complex]]:
        return iter(self._amps.items())

    def amplitude(self, config: OccupationConfig) -> complex:
        return self._amps.get(config, 0.0)

    def __len__(self) -> int:
        return len(self._amps)

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for a in self._amps.values()))

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def photon_numbers(self) -> set[int]:
        """Set of total photon counts across surviving configurations."""
        return {c.total() for c in self._amps}

    def scaled(self, factor: complex) -> "FockState":
        return FockState(self.register, {c: a * factor for c, a in self._amps.items()})

    def add(self, other: "FockState") -> "FockState":
        if self.register != other.register:
            raise FockError("register mismatch")
        amps = dict(self._amps)
        for c, a in other._amps.items():
            amps[c] = amps.get(c, 0.0) + a
        return FockState(self.register, amps)

    def format_terms(self, digits: int = 6) -> str:
        """Human-readable term list, largest amplitude first."""
        parts = []
        for c, a in sorted(self._amps.items(), key=lambda t: -abs(t[1])):
            labels = []
            for i, n in c.pairs:
                lab = str(self.register.label(i))
                labels.extend([lab] * n)
            ket = " ".join(labels) if labels else "vac"
            if abs(a.imag) < 1e-14:
                amp = f"{a.real:+.{digits}f}"
            else:
                amp = f"({a.real:+.{digits}f}{a.imag:+.{digits}f}j)"
            parts.append(f"{amp} |{ket}>")
        return "  ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"FockState({len(self._amps)} configs, norm={self.norm():.6f})"


def make_state(
    register: ModeRegister,
    terms: Sequence[tuple[complex, Sequence[ModeLabel | str]]],
) -> FockState:
    """Build a state from (amplitude, occupied-mode list) terms.

    Repeated labels inside one term mean multiple photons in that mode; the
    amplitude multiplies the normalized number ket.  Terms with identical
    configurations are summed.
    """
    if not terms:
        raise FockError("empty term list")
    amps: dict[OccupationConfig, complex] = {}
    for amp, labels in terms:
        if not labels:
            raise FockError("term with no modes (vacuum terms are not supported)")
        occ: dict[int, int] = {}
        for lab in labels:
            i = register.index(lab)
            occ[i] = occ.get(i, 0) + 1
        cfg = OccupationConfig.from_dict(occ)
        amps[cfg] = amps.get(cfg, 0.0) + complex(amp)
    return FockState(register, amps)


def _compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """All ways to place n photons into k modes (stars and bars)."""
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def apply_unitary(state: FockState, u: ModeUnitary) -> FockState:
    """Evolve a state through a mode unitary, exactly.

    Each configuration's creation-operator monomial is expanded through the
    substitution a_i^dag -> sum_j U[j,i] a_j^dag with multinomial weights;
    photon number is conserved and the norm is preserved for unitary U.
    """
    k = len(u.modes)
    nmodes = len(state.register)
    for i in u.modes:
        if not 0 <= i < nmodes:
            raise FockError(f"mode index {i} out of range")
    mat = u.matrix
    out: dict[OccupationConfig, complex] = {}
    for config, amp in state.items():
        occ = config.to_dict()
        acted = [occ.pop(i, 0) for i in u.modes]
        if not any(acted):
            out[config] = out.get(config, 0.0) + amp
            continue
        base = amp / math.sqrt(math.prod(math.factorial(n) for n in acted))
        monos: dict[tuple[int, ...], complex] = {(0,) * k: base}
        for col, n in enumerate(acted):
            if n == 0:
                continue
            nxt: dict[tuple[int, ...], complex] = {}
            for exps, coeff in monos.items():
                for r in _compositions(n, k):
                    w = math.factorial(n)
                    amp_w: complex = coeff
                    for j, rj in enumerate(r):
                        if rj:
                            w //= math.factorial(rj)
                            amp_w *= mat[j, col] ** rj
                    if amp_w == 0:
                        continue
                    key = tuple(e + rj for e, rj in zip(exps, r))
                    nxt[key] = nxt.get(key, 0.0) + amp_w * w
            monos = nxt
        for exps, coeff in monos.items():
            if abs(coeff) < PRUNE_THRESHOLD:
                continue
            total_occ = dict(occ)
            for j, e in enumerate(exps):
                if e:
                    total_occ[u.modes[j]] = e
            newamp = coeff * math.sqrt(math.prod(math.factorial(e) for e in exps))
            cfg = OccupationConfig.from_dict(total_occ)
            out[cfg] = out.get(cfg, 0.0) + newamp
    return FockState(state.register, out)


def inner(a: FockState, b: FockState) -> complex:
    """Inner product <a|b>; requires matching registers."""
    if a.register != b.register:
        raise FockError("register mismatch")
    small, big = (a, b) if len(a) <= len(b) else (b, a)
    total = 0.0 + 0.0j
    for cfg, amp in small.items():
        other = big.amplitude(cfg)
        if other:
            if small is a:
                total += amp.conjugate() * other
            else:
                total += other.conjugate() * amp
    return total


def normalize(state: FockState) -> tuple[FockState, float]:
    """Return (unit-norm state, original norm); rejects the zero state."""
    n = state.norm()
    if n < PRUNE_THRESHOLD:
        raise FockError("cannot normalize a (numerically) zero state")
    return state.scaled(1.0 / n), n


def equal_up_to_phase(a: FockState, b: FockState, tol: float = 1e-10) -> bool:
    """True iff the normalized states coincide up to a global phase."""
    an, _ = normalize(a)
    bn, _ = normalize(b)
    return abs(inner(an, bn)) >= 1.0 - tol


def product_state(a: FockState, b: FockState) -> FockState:
    """Tensor product on the concatenation of two disjoint registers."""
    overlap = set(a.register.paths) & set(b.register.paths)
    if overlap:
        raise FockError(f"registers share paths {sorted(overlap)!r}")
    reg = ModeRegister(a.register.paths + b.register.paths)
    offset = len(a.register)
    amps: dict[OccupationConfig, complex] = {}
    for ca, aa in a.items():
        for cb, ab in b.items():
            shifted = tuple((i + offset, n) for i, n in cb.pairs)
            cfg = OccupationConfig(tuple(sorted(ca.pairs + shifted)))
            amps[cfg] = amps.get(cfg, 0.0) + aa * ab
    return FockState(reg, amps)


def haar_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed k x k unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
