"""Circuit representation, a line-oriented text format, and the runner.

Grammar (one directive per line, ``#`` starts a comment):

    path <name>                          declare a spatial path (adds H, V)
    bs <p> <q>                           balanced beam splitter
    ubs <p> <q> r=<float>                unbalanced beam splitter
    pbs <p> <q>                          polarizing beam splitter
    wp <p> theta=<float>                 wave plate (radians)
    hwp45 <p> | hwp90 <p> | pflip <p>    fixed plates
    sflip <p> <q>                        spatial phase flip (+1 on p, -1 on q)
    delay <p>                            time delay (identity)
    detect <name> <p> [<p> ...] [pnr] [eta=<float>]
    groupcount <name> <p>[,<p>..] ; <p>[,<p>..]
    measure                              fire all detectors declared so far
    select none
    select one-per-side <list> ; <list>
    select counts <name> <int> <int> [...]

``groupcount`` is the non-demolition photon-count projection used by the
parity-check stages; ``select`` clauses combine conjunctively and mark
branches as selected without dropping them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

from .elements import (
    BalancedBS,
    Delay,
    DetectorSpec,
    Element,
    HalfWavePlate45,
    HalfWavePlate90,
    PBS,
    PolPhaseFlip,
    SpatialPhaseFlip,
    UnbalancedBS,
    WavePlate,
    apply,
)
from .fock import FockError, FockState, ModeRegister
from .measurement import (
    DetectionPattern,
    EMPTY_PATTERN,
    OutcomeBranch,
    measure as measure_state,
    project_group_counts,
)


class CircuitParseError(ValueError):
    """Parse failure with a 1-based line number."""

    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class CountProjection:
    """Non-demolition count projection over named path groups."""

    name: str
    groups: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class Measure:
    """Fire every detector declared since the previous measure."""

    detectors: tuple[DetectorSpec, ...]


@dataclass(frozen=True)
class SelectNone:
    """Accept branches with zero registered clicks."""


@dataclass(frozen=True)
class SelectOnePerSide:
    """Accept exactly one registered photon on each side's detectors."""

    side_a: tuple[str, ...]
    side_b: tuple[str, ...]


@dataclass(frozen=True)
class SelectCounts:
    """Accept branches whose count projection equals the given tuple."""

    name: str
    counts: tuple[int, ...]


Select = SelectNone | SelectOnePerSide | SelectCounts
Step = Element | CountProjection | Measure | Select


@dataclass
class CircuitSpec:
    """Ordered program of elements, measurements, and selections."""

    register: ModeRegister
    steps: list[Step] = field(default_factory=list)

    def detectors(self) -> list[DetectorSpec]:
        out: list[DetectorSpec] = []
        for s in self.steps:
            if isinstance(s, Measure):
                out.extend(s.detectors)
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CircuitSpec):
            return NotImplemented
        return self.register == other.register and self.steps == other.steps


def _fmt(x: float) -> str:
    return repr(float(x))


def print_spec(spec: CircuitSpec) -> str:
    """Render a circuit in canonical text form; inverse of :func:`parse`."""
    lines: list[str] = []
    for p in spec.register.paths:
        lines.append(f"path {p}")
    pending: list[DetectorSpec] = []

    def flush_detectors() -> None:
        for d in pending:
            toks = ["detect", d.name, *d.paths]
            if d.resolving:
                toks.append("pnr")
            if d.efficiency != 1.0:
                toks.append(f"eta={_fmt(d.efficiency)}")
            lines.append(" ".join(toks))
        pending.clear()

    for s in spec.steps:
        if isinstance(s, BalancedBS):
            lines.append(f"bs {s.path_a} {s.path_b}")
        elif isinstance(s, UnbalancedBS):
            lines.append(f"ubs {s.path_a} {s.path_b} r={_fmt(s.r)}")
        elif isinstance(s, PBS):
            lines.append(f"pbs {s.path_a} {s.path_b}")
        elif isinstance(s, WavePlate):
            lines.append(f"wp {s.path} theta={_fmt(s.theta)}")
        elif isinstance(s, HalfWavePlate45):
            lines.append(f"hwp45 {s.path}")
        elif isinstance(s, HalfWavePlate90):
            lines.append(f"hwp90 {s.path}")
        elif isinstance(s, PolPhaseFlip):
            lines.append(f"pflip {s.path}")
        elif isinstance(s, SpatialPhaseFlip):
            lines.append(f"sflip {s.path_a} {s.path_b}")
        elif isinstance(s, Delay):
            lines.append(f"delay {s.path}")
        elif isinstance(s, CountProjection):
            body = " ; ".join(",".join(g) for g in s.groups)
            lines.append(f"groupcount {s.name} {body}")
        elif isinstance(s, Measure):
            pending.extend(s.detectors)
            flush_detectors()
            lines.append("measure")
        elif isinstance(s, SelectNone):
            lines.append("select none")
        elif isinstance(s, SelectOnePerSide):
            lines.append(
                f"select one-per-side {','.join(s.side_a)} ; {','.join(s.side_b)}"
            )
        elif isinstance(s, SelectCounts):
            lines.append(f"select counts {s.name} " + " ".join(map(str, s.counts)))
        else:
            raise FockError(f"cannot print step {s!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def _parse_float(lineno: int, token: str, key: str) -> float:
    if not token.startswith(key + "="):
        raise CircuitParseError(lineno, f"expected {key}=<number>, got {token!r}")
    try:
        return float(token[len(key) + 1 :])
    except ValueError:
        raise CircuitParseError(lineno, f"malformed number in {token!r}") from None


def parse(text: str) -> CircuitSpec:
    """Parse circuit text, rejecting invalid programs with line numbers."""
    register = ModeRegister()
    steps: list[Step] = []
    pending: list[DetectorSpec] = []
    detector_names: set[str] = set()
    projection_names: set[str] = set()
    measured_any = False

    def need_path(lineno: int, p: str) -> str:
        if not register.has_path(p):
            raise CircuitParseError(lineno, f"path {p!r} not declared")
        return p

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        op, args = toks[0], toks[1:]

        def expect(n: int) -> None:
            if len(args) != n:
                raise CircuitParseError(
                    lineno, f"{op} expects {n} argument(s), got {len(args)}"
                )

        if op == "path":
            expect(1)
            if register.has_path(args[0]):
                raise CircuitParseError(lineno, f"duplicate path {args[0]!r}")
            register.add_path(args[0])
        elif op == "bs":
            expect(2)
            steps.append(BalancedBS(need_path(lineno, args[0]), need_path(lineno, args[1])))
        elif op == "ubs":
            expect(3)
            r = _parse_float(lineno, args[2], "r")
            if not 0.0 <= r <= 1.0:
                raise CircuitParseError(lineno, f"reflection coefficient {r} outside [0, 1]")
            steps.append(
                UnbalancedBS(need_path(lineno, args[0]), need_path(lineno, args[1]), r)
            )
        elif op == "pbs":
            expect(2)
            steps.append(PBS(need_path(lineno, args[0]), need_path(lineno, args[1])))
        elif op == "wp":
            expect(2)
            theta = _parse_float(lineno, args[1], "theta")
            steps.append(WavePlate(need_path(lineno, args[0]), theta))
        elif op == "hwp45":
            expect(1)
            steps.append(HalfWavePlate45(need_path(lineno, args[0])))
        elif op == "hwp90":
            expect(1)
            steps.append(HalfWavePlate90(need_path(lineno, args[0])))
        elif op == "pflip":
            expect(1)
            steps.append(PolPhaseFlip(need_path(lineno, args[0])))
        elif op == "sflip":
            expect(2)
            steps.append(
                SpatialPhaseFlip(need_path(lineno, args[0]), need_path(lineno, args[1]))
            )
        elif op == "delay":
            expect(1)
            steps.append(Delay(need_path(lineno, args[0])))
        elif op == "detect":
            if len(args) < 2:
                raise CircuitParseError(lineno, "detect expects a name and at least one path")
            name = args[0]
            if name in detector_names:
                raise CircuitParseError(lineno, f"duplicate detector {name!r}")
            paths: list[str] = []
            resolving = False
            efficiency = 1.0
            for tok in args[1:]:
                if tok == "pnr":
                    resolving = True
                elif tok.startswith("eta="):
                    efficiency = _parse_float(lineno, tok, "eta")
                    if not 0.0 <= efficiency <= 1.0:
                        raise CircuitParseError(lineno, f"efficiency {efficiency} outside [0, 1]")
                else:
                    paths.append(need_path(lineno, tok))
            if not paths:
                raise CircuitParseError(lineno, f"detector {name!r} watches no paths")
            detector_names.add(name)
            pending.append(DetectorSpec(name, tuple(paths), resolving, efficiency))
        elif op == "groupcount":
            if len(args) < 2:
                raise CircuitParseError(lineno, "groupcount expects a name and path groups")
            name = args[0]
            if name in projection_names or name in detector_names:
                raise CircuitParseError(lineno, f"duplicate outcome name {name!r}")
            projection_names.add(name)
            body = " ".join(args[1:])
            groups: list[tuple[str, ...]] = []
            for part in body.split(";"):
                g = tuple(p for p in part.replace(",", " ").split() if p)
                if not g:
                    raise CircuitParseError(lineno, "empty path group")
                for p in g:
                    need_path(lineno, p)
                groups.append(g)
            if len(groups) < 2:
                raise CircuitParseError(lineno, "groupcount needs at least two groups")
            steps.append(CountProjection(name, tuple(groups)))
        elif op == "measure":
            expect(0)
            if not pending:
                raise CircuitParseError(lineno, "measure with no pending detectors")
            steps.append(Measure(tuple(pending)))
            pending.clear()
            measured_any = True
        elif op == "select":
            if not args:
                raise CircuitParseError(lineno, "select needs a mode")
            if not measured_any and not projection_names:
                raise CircuitParseError(lineno, "select before any measure or groupcount")
            mode = args[0]
            if mode == "none":
                steps.append(SelectNone())
            elif mode == "one-per-side":
                body = " ".join(args[1:])
                sides = body.split(";")
                if len(sides) != 2:
                    raise CircuitParseError(lineno, "one-per-side expects two ;-separated lists")
                lists = []
                for side in sides:
                    names = tuple(n for n in side.replace(",", " ").split() if n)
                    if not names:
                        raise CircuitParseError(lineno, "empty detector list")
                    for n in names:
                        if n not in detector_names:
                            raise CircuitParseError(lineno, f"unknown detector {n!r}")
                    lists.append(names)
                steps.append(SelectOnePerSide(lists[0], lists[1]))
            elif mode == "counts":
                if len(args) < 3:
                    raise CircuitParseError(lineno, "select counts expects a name and counts")
                name = args[1]
                if name not in projection_names:
                    raise CircuitParseError(lineno, f"unknown groupcount {name!r}")
                try:
                    counts = tuple(int(t) for t in args[2:])
                except ValueError:
                    raise CircuitParseError(lineno, "counts must be integers") from None
                steps.append(SelectCounts(name, counts))
            else:
                raise CircuitParseError(lineno, f"unknown select mode {mode!r}")
        else:
            raise CircuitParseError(lineno, f"unknown directive {op!r}")

    if pending:
        raise CircuitParseError(
            len(text.splitlines()) or 1,
            f"detector {pending[0].name!r} declared but never measured",
        )
    return CircuitSpec(register, steps)


def _evaluate_select(step: Select, pattern: DetectionPattern) -> bool:
    if isinstance(step, SelectNone):
        return pattern.clicks() == 0
    if isinstance(step, SelectOnePerSide):
        return pattern.clicks(step.side_a) == 1 and pattern.clicks(step.side_b) == 1
    if isinstance(step, SelectCounts):
        try:
            return pattern.get(step.name) == step.counts
        except KeyError:
            return False
    raise FockError(f"unknown select step {step!r}")


def run(spec: CircuitSpec, state: FockState) -> list[OutcomeBranch]:
    """Fold a circuit over an input state, returning all final branches.

    Branch probabilities are absolute; ``selected`` is None when the
    circuit contains no select step, otherwise the conjunction of all
    select clauses on that branch's pattern.
    """
    if state.register != spec.register:
        raise FockError("input register does not match circuit register")
    branches = [
        OutcomeBranch(
            pattern=EMPTY_PATTERN,
            probability=1.0,
            conditional=state,
            arrivals=EMPTY_PATTERN,
        )
    ]
    for step in spec.steps:
        if isinstance(step, (SelectNone, SelectOnePerSide, SelectCounts)):
            for b in branches:
                ok = _evaluate_select(step, b.pattern)
                b.selected = ok if b.selected is None else (b.selected and ok)
        elif isinstance(step, CountProjection):
            nxt: list[OutcomeBranch] = []
            for b in branches:
                for sub in project_group_counts(b.conditional, step.name, step.groups):
                    nxt.append(
                        OutcomeBranch(
                            pattern=b.pattern.merged(sub.pattern),
                            probability=b.probability * sub.probability,
                            conditional=sub.conditional,
                            arrivals=b.arrivals.merged(sub.arrivals),
                            selected=b.selected,
                        )
                    )
            branches = nxt
        elif isinstance(step, Measure):
            nxt = []
            for b in branches:
                for sub in measure_state(b.conditional, step.detectors):
                    nxt.append(
                        OutcomeBranch(
                            pattern=b.pattern.merged(sub.pattern),
                            probability=b.probability * sub.probability,
                            conditional=sub.conditional,
                            arrivals=b.arrivals.merged(sub.arrivals),
                            selected=b.selected,
                        )
                    )
            branches = nxt
        else:
            for b in branches:
                b.conditional = apply(b.conditional, step)
    return branches


def selected_probability(branches: Sequence[OutcomeBranch]) -> float:
    return sum(b.probability for b in branches if b.selected)


def load_example(name: str) -> str:
    """Read one of the shipped circuit files (e.g. ``fig1`` or ``fig1.circ``)."""
    if not name.endswith(".circ"):
        name += ".circ"
    return resources.files("hyperecp.data").joinpath(name).read_text(encoding="utf-8")
