"""Detection, branch enumeration, post-selection, and parity classification.

Two measurement primitives are provided:

* :func:`measure` models absorbing single-photon detectors.  Photons on
  watched modes are removed; each branch carries the registered pattern
  and the normalized conditional state on the surviving modes.  Detector
  inefficiency is modeled per photon (binomial thinning), so one arrival
  outcome can split into several observed patterns.

* :func:`project_group_counts` models the ideal non-demolition parity
  check: it projects onto sectors labeled by the total photon number in
  each path group, without localizing photons inside a group, and leaves
  the state intact.  This is the measurement the two-copy concentration
  protocols rely on for their spatial-mode checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .elements import DetectorSpec
from .fock import FockError, FockState, ModeRegister, OccupationConfig

PatternValue = int | tuple[int, ...]


@dataclass(frozen=True)
class DetectionPattern:
    """Registered counts per detector (ints) or count projection (tuples)."""

    entries: tuple[tuple[str, PatternValue], ...]

    @staticmethod
    def from_dict(d: dict[str, PatternValue]) -> "DetectionPattern":
        return DetectionPattern(tuple(sorted(d.items())))

    def to_dict(self) -> dict[str, PatternValue]:
        return dict(self.entries)

    def get(self, name: str) -> PatternValue:
        for k, v in self.entries:
            if k == name:
                return v
        raise KeyError(name)

    def clicks(self, names: Iterable[str] | None = None) -> int:
        """Total registered photons over the named detectors (all if None)."""
        wanted = None if names is None else set(names)
        total = 0
        for k, v in self.entries:
            if isinstance(v, int) and (wanted is None or k in wanted):
                total += v
        return total

    def merged(self, other: "DetectionPattern") -> "DetectionPattern":
        d = self.to_dict()
        for k, v in other.entries:
            if k in d:
                raise FockError(f"duplicate pattern entry {k!r}")
            d[k] = v
        return DetectionPattern.from_dict(d)

    def __str__(self) -> str:
        if not self.entries:
            return "(no detectors)"
        return " ".join(f"{k}={v}" for k, v in self.entries)


EMPTY_PATTERN = DetectionPattern(())


@dataclass
class OutcomeBranch:
    """One exhaustive measurement outcome.

    ``pattern`` holds the observed counts, ``probability`` the absolute
    branch probability, and ``conditional`` the normalized state on the
    undetected modes.  ``arrivals`` records the photons that reached each
    detector before efficiency thinning; ``selected`` is filled in by
    post-selection steps.
    """

    pattern: DetectionPattern
    probability: float
    conditional: FockState
    arrivals: DetectionPattern = EMPTY_PATTERN
    selected: bool | None = None


@dataclass(frozen=True)
class WeightedEnsemble:
    """Mixed state as a weighted list of pure states; weights sum to 1."""

    members: tuple[tuple[float, FockState], ...]

    def __post_init__(self) -> None:
        if self.members:
            total = sum(w for w, _ in self.members)
            if abs(total - 1.0) > 1e-10:
                raise FockError(f"ensemble weights sum to {total}, expected 1")

    @staticmethod
    def pure(state: FockState) -> "WeightedEnsemble":
        return WeightedEnsemble(((1.0, state),))


def _binomial_outcomes(k: int, eta: float) -> list[tuple[int, float]]:
    """(registered count, probability) pairs for k arrivals at efficiency eta."""
    if eta >= 1.0:
        return [(k, 1.0)]
    if eta <= 0.0:
        return [(0, 1.0)]
    out = []
    for r in range(k + 1):
        p = math.comb(k, r) * eta**r * (1.0 - eta) ** (k - r)
        if p > 0.0:
            out.append((r, p))
    return out


def measure(state: FockState, detectors: Sequence[DetectorSpec]) -> list[OutcomeBranch]:
    """Enumerate all detection outcomes of absorbing detectors.

    Branches are keyed by the exact occupation of the watched modes, so
    each conditional stays a pure state; observed patterns repeat across
    branches when inefficiency hides arrivals.  Probabilities sum to the
    squared norm of the input (1 for a normalized state).
    """
    register = state.register
    det_indices: dict[str, tuple[int, ...]] = {}
    seen: set[int] = set()
    for d in detectors:
        idx = d.mode_indices(register)
        if set(idx) & seen:
            raise FockError(f"detector {d.name!r} overlaps another detector")
        seen.update(idx)
        det_indices[d.name] = idx

    watched = tuple(sorted(seen))
    groups: dict[OccupationConfig, dict[OccupationConfig, complex]] = {}
    for config, amp in state.items():
        inside, outside = config.split(watched)
        groups.setdefault(inside, {})[outside] = amp

    branches: list[OutcomeBranch] = []
    for inside, cond_amps in groups.items():
        prob = sum(abs(a) ** 2 for a in cond_amps.values())
        if prob < 1e-30:
            continue
        scale = 1.0 / math.sqrt(prob)
        conditional = FockState(register, {c: a * scale for c, a in cond_amps.items()})
        arrival_counts = {
            d.name: inside.count_on(det_indices[d.name]) for d in detectors
        }
        arrivals = DetectionPattern.from_dict(arrival_counts)
        thinnings: list[tuple[dict[str, int], float]] = [({}, 1.0)]
        for d in detectors:
            k = arrival_counts[d.name]
            nxt = []
            for partial, w in thinnings:
                for r, p in _binomial_outcomes(k, d.efficiency):
                    registered = r if d.resolving else min(r, 1)
                    nxt.append(({**partial, d.name: registered}, w * p))
            thinnings = nxt
        merged: dict[tuple[tuple[str, int], ...], float] = {}
        for observed, w in thinnings:
            key = tuple(sorted(observed.items()))
            merged[key] = merged.get(key, 0.0) + w
        for key, w in merged.items():
            branches.append(
                OutcomeBranch(
                    pattern=DetectionPattern(key),
                    probability=prob * w,
                    conditional=conditional,
                    arrivals=arrivals,
                )
            )
    return branches


def project_group_counts(
    state: FockState, name: str, groups: Sequence[Sequence[str]]
) -> list[OutcomeBranch]:
    """Project onto photon-count sectors of path groups, non-destructively.

    The outcome is the tuple of total counts per group; coherence between
    configurations inside one sector is preserved and no photon is removed.
    """
    register = state.register
    group_indices = []
    for g in groups:
        idx: list[int] = []
        for p in g:
            idx.extend(register.path_indices(p))
        group_indices.append(tuple(idx))

    sectors: dict[tuple[int, ...], dict[OccupationConfig, complex]] = {}
    for config, amp in state.items():
        counts = tuple(config.count_on(idx) for idx in group_indices)
        sectors.setdefault(counts, {})[config] = amp

    branches: list[OutcomeBranch] = []
    for counts, amps in sorted(sectors.items()):
        prob = sum(abs(a) ** 2 for a in amps.values())
        scale = 1.0 / math.sqrt(prob)
        conditional = FockState(register, {c: a * scale for c, a in amps.items()})
        pattern = DetectionPattern.from_dict({name: counts})
        branches.append(
            OutcomeBranch(
                pattern=pattern,
                probability=prob,
                conditional=conditional,
                arrivals=pattern,
            )
        )
    return branches


def post_select(
    branches: Sequence[OutcomeBranch],
    predicate: Callable[[DetectionPattern], bool],
) -> tuple[float, WeightedEnsemble | None]:
    """Keep branches whose pattern satisfies the predicate.

    Returns the total matching probability and the renormalized mixture of
    matching conditionals (None when nothing matches).
    """
    matching = [b for b in branches if predicate(b.pattern)]
    prob = sum(b.probability for b in matching)
    if prob <= 0.0:
        return 0.0, None
    members = tuple((b.probability / prob, b.conditional) for b in matching)
    return prob, WeightedEnsemble(members)


def classify_parity(
    pattern: DetectionPattern, side: str, detector_names: Sequence[str]
) -> str:
    """Classify a parity-check outcome from click counts.

    The polarization check (side ``"alice"``) accepts even parity on
    exactly one click; the spatial check (side ``"bob"``) accepts odd
    parity on exactly one click.  Zero or two clicks reject.
    """
    if side not in ("alice", "bob"):
        raise FockError(f"unknown side {side!r}")
    n = pattern.clicks(detector_names)
    if n != 1:
        return "reject"
    return "even" if side == "alice" else "odd"
