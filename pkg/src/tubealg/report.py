"""Problem files, verdict reports and the bundled example corpus.

Problem files and reports are JSON.  Rationals travel as strings ``"p/q"``
so nothing is rounded on the way in or out.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from . import __version__
from .algdep import (DEFAULT_MARGIN, RelationResult, UnderdeterminedError, guess_relation,
                     minimum_order, result_from_dict)
from .expr import ParseError, TaylorError, parse, taylor, to_text
from .linalg import SingularMatrixError
from .obstruction import (InvalidWitnessError, PolarProfile, TubeSpec, Witness, check_witness,
                          derivative_map, hypersurface_first_second_test, levi_minimal_sufficient,
                          obstruction_test, perturbed_family_expr, polar_rigid_test, search_witness)
from .series import Series

PASSES = "PASSES_NECESSARY_CONDITION"
OBSTRUCTED = "OBSTRUCTED_UP_TO_BOUNDS"
DEGENERATE = "NOT_FINITELY_NONDEGENERATE_UP_TO_ORDER"
INPUT_ERROR = "INPUT_ERROR"
NONDEGENERATE = "FINITELY_NONDEGENERATE"

EXIT_CODES = {PASSES: 0, OBSTRUCTED: 0, NONDEGENERATE: 0, INPUT_ERROR: 1, DEGENERATE: 2}

DEFAULT_DEGREE = 6
DEFAULT_MAX_WITNESS_ORDER = 6
DEFAULT_VALIDATE_BUMP = 10


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemFile:
    n: int
    d: int
    mode: str
    phi: tuple[str, ...] = ()
    phi_series: tuple[Mapping, ...] = ()
    witness: Witness | None = None
    bounds: Mapping[str, int] = field(default_factory=dict)
    name: str | None = None

    @property
    def m(self) -> int:
        return self.n - self.d

    @classmethod
    def from_dict(cls, data: Mapping) -> "ProblemFile":
        if not isinstance(data, Mapping):
            raise InputError("problem file must be a JSON object")
        try:
            mode = data.get("mode", "tube")
            if mode not in ("tube", "rigid-polar"):
                raise InputError(f"mode must be 'tube' or 'rigid-polar', got {mode!r}")
            n = data["n"]
            d = data.get("d", 1)
            if not isinstance(n, int) or not isinstance(d, int):
                raise InputError("n and d must be integers")
            if not 1 <= d < n:
                raise InputError(f"need 1 <= d < n, got n={n}, d={d}")
            if n - d > 9:
                raise InputError("at most 9 real variables (y1..y9) are supported")
            if mode == "rigid-polar" and (n, d) != (2, 1):
                raise InputError("rigid-polar problems live in C^2 (n=2, d=1)")
            phi = tuple(data.get("phi", ()))
            series = tuple(data.get("phi_series", ()))
            if bool(phi) == bool(series):
                raise InputError("give exactly one of 'phi' (expressions) or 'phi_series'")
            if len(phi or series) != d:
                raise InputError(f"expected {d} defining function(s), got {len(phi or series)}")
            if any(not isinstance(p, str) for p in phi):
                raise InputError("'phi' entries must be expression strings")
            witness = Witness.from_dict(data["witness"]) if data.get("witness") else None
            bounds = dict(data.get("bounds", {}))
            unknown = set(bounds) - set(_BOUND_KEYS)
            if unknown:
                raise InputError(f"unknown bounds keys: {sorted(unknown)}")
        except KeyError as exc:
            raise InputError(f"missing field {exc.args[0]!r}") from None
        except (TypeError, InvalidWitnessError) as exc:
            raise InputError(str(exc)) from None
        return cls(n, d, mode, phi, series, witness, bounds, data.get("name"))

    def to_dict(self) -> dict:
        out: dict[str, Any] = {}
        if self.name is not None:
            out["name"] = self.name
        out.update({"n": self.n, "d": self.d, "mode": self.mode})
        if self.phi:
            out["phi"] = list(self.phi)
        if self.phi_series:
            out["phi_series"] = [dict(s) for s in self.phi_series]
        if self.witness is not None:
            out["witness"] = self.witness.to_dict()
        if self.bounds:
            out["bounds"] = dict(self.bounds)
        return out

    def expand(self, order: int) -> list[Series]:
        """Defining functions as series of (at most) the requested order."""
        m = self.m
        if self.phi:
            return [taylor(parse(p, m), m, order) for p in self.phi]
        out = []
        for lit in self.phi_series:
            s = Series.from_dict(lit, var_count=m)
            if s.var_count != m:
                raise InputError(f"series literal has {s.var_count} variables, need {m}")
            out.append(s.truncate(order))
        return out


_BOUND_KEYS = ("degree", "order", "margin", "max_witness_order", "validate_bump")


@dataclass(frozen=True)
class RunOptions:
    """Command-line overrides; ``None`` defers to the problem file, then defaults."""

    degree: int | None = None
    order: int | None = None
    margin: int | None = None
    max_witness_order: int | None = None
    validate_bump: int | None = None
    witness: Witness | None = None
    assume_family: bool = False
    first_second: bool = False
    timings: bool = False


_DEFAULTS = {
    "degree": DEFAULT_DEGREE,
    "margin": DEFAULT_MARGIN,
    "max_witness_order": DEFAULT_MAX_WITNESS_ORDER,
    "validate_bump": DEFAULT_VALIDATE_BUMP,
}


def resolve_bounds(m: int, options: RunOptions, hints: Mapping[str, int] | None = None) -> dict:
    hints = hints or {}
    out = {}
    for key in _BOUND_KEYS:
        val = getattr(options, key)
        if val is None:
            val = hints.get(key, _DEFAULTS.get(key))
        out[key] = val
    if out["order"] is None:
        out["order"] = minimum_order(m, out["degree"], out["margin"])
    for key, val in out.items():
        if not isinstance(val, int) or val < 0:
            raise InputError(f"bound {key} must be a nonnegative integer, got {val!r}")
    if out["degree"] < 1 or out["max_witness_order"] < 1:
        raise InputError("degree and max_witness_order must be at least 1")
    need = minimum_order(m, out["degree"], out["margin"])
    if out["order"] < need:
        raise InputError(
            f"order {out['order']} is underdetermined for degree {out['degree']} "
            f"in {m} variable(s): need at least {need}")
    return out


def _grid_to_dicts(grid):
    return [[r.to_dict() for r in row] for row in grid] if grid is not None else None


def _grid_from_dicts(data):
    return [[result_from_dict(r) for r in row] for row in data] if data is not None else None


@dataclass
class Report:
    command: str
    input: dict
    verdict: str
    bounds: dict | None = None
    witness: Witness | None = None
    recentering_constants: list[Fraction] | None = None
    minimality: str | None = None
    assumptions: dict | None = None
    entries: list[list[RelationResult]] | None = None
    first_second: list[list[RelationResult]] | None = None
    message: str = ""
    error: str | None = None
    timings: dict | None = None
    tool: str = f"tubealg {__version__}"

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "tool": self.tool,
            "command": self.command,
            "input": self.input,
            "bounds": self.bounds,
            "witness": self.witness.to_dict() if self.witness else None,
            "recentering_constants": (
                [str(c) for c in self.recentering_constants]
                if self.recentering_constants is not None else None),
            "minimality": self.minimality,
            "assumptions": self.assumptions,
            "entries": _grid_to_dicts(self.entries),
        }
        if self.first_second is not None:
            out["first_second"] = _grid_to_dicts(self.first_second)
        out["verdict"] = self.verdict
        out["message"] = self.message
        if self.error is not None:
            out["error"] = self.error
        if self.timings is not None:
            out["timings"] = self.timings
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping) -> "Report":
        consts = data.get("recentering_constants")
        return cls(
            command=data["command"],
            input=data["input"],
            verdict=data["verdict"],
            bounds=data.get("bounds"),
            witness=Witness.from_dict(data["witness"]) if data.get("witness") else None,
            recentering_constants=[Fraction(c) for c in consts] if consts is not None else None,
            minimality=data.get("minimality"),
            assumptions=data.get("assumptions"),
            entries=_grid_from_dicts(data.get("entries")),
            first_second=_grid_from_dicts(data.get("first_second")),
            message=data.get("message", ""),
            error=data.get("error"),
            timings=data.get("timings"),
            tool=data.get("tool", f"tubealg {__version__}"),
        )

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))


def _verdict_for(grid) -> str:
    return PASSES if all(r.found for row in grid for r in row) else OBSTRUCTED


def _message(verdict: str, bounds: dict) -> str:
    if verdict == PASSES:
        return ("every tested function satisfies a polynomial relation (validated beyond the "
                "search order); the necessary condition for local algebraizability holds at "
                "these bounds")
    if verdict == OBSTRUCTED:
        return (f"no polynomial relation of degree <= {bounds['degree']} found at order "
                f"{bounds['order']}; this is evidence against local algebraizability under "
                "the asserted hypotheses, not a proof")
    if verdict == DEGENERATE:
        return (f"no finite-nondegeneracy witness with multiindex length <= "
                f"{bounds['max_witness_order']}")
    if verdict == NONDEGENERATE:
        return "finite-nondegeneracy witness found"
    return ""


def _input_error(command: str, echo: dict, exc: Exception) -> Report:
    return Report(command=command, input=echo, verdict=INPUT_ERROR,
                  message="input rejected", error=str(exc))


def run(problem: ProblemFile, options: RunOptions = RunOptions(), command: str | None = None) -> Report:
    """Analyse one problem file and return its report (never raises on bad input)."""
    if command is None:
        command = "polar" if problem.mode == "rigid-polar" else "obstruct"
    echo = problem.to_dict()
    try:
        if command == "polar" and problem.mode != "rigid-polar":
            raise InputError("the polar pipeline needs mode 'rigid-polar'")
        if command in ("obstruct", "nondegen") and problem.mode != "tube":
            raise InputError(f"the {command} pipeline needs mode 'tube'; use 'polar'")
        bounds = resolve_bounds(problem.m, options, problem.bounds)
        if command == "polar":
            return _run_polar(problem, options, bounds, echo)
        return _run_tube(problem, options, bounds, echo, command)
    except (InputError, ParseError, TaylorError, InvalidWitnessError, UnderdeterminedError,
            ValueError) as exc:
        return _input_error(command, echo, exc)


def _run_tube(problem, options, bounds, echo, command) -> Report:
    clock = {}
    t0 = time.perf_counter()
    witness = options.witness or problem.witness
    beta_len = max(bounds["max_witness_order"], witness.max_length if witness else 0)
    N, bump = bounds["order"], bounds["validate_bump"]
    need = beta_len + N + bump + 1
    if command == "nondegen":
        need = beta_len + 1
    tube = TubeSpec(problem.n, problem.d, tuple(problem.expand(need)))
    clock["expand"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    if witness is not None:
        check_witness(tube, witness)
    else:
        witness = search_witness(tube, bounds["max_witness_order"])
    clock["witness"] = time.perf_counter() - t1

    minimality = "UNCHECKED"
    if tube.d == 1 and levi_minimal_sufficient(tube):
        minimality = "TRUE"
    assumptions = {
        "family_membership": "ASSERTED" if options.assume_family else "NOT_ASSERTED",
        "minimality_criterion": "nonzero Levi form at 0 (sufficient only)",
    }
    base = dict(command=command, input=echo, bounds=bounds, minimality=minimality,
                assumptions=assumptions)

    if witness is None:
        return Report(verdict=DEGENERATE, message=_message(DEGENERATE, bounds),
                      timings=clock if options.timings else None, **base)

    _, constants = derivative_map(tube, witness, order=1)
    if command == "nondegen":
        return Report(verdict=NONDEGENERATE, witness=witness, recentering_constants=constants,
                      message=_message(NONDEGENERATE, bounds),
                      timings=clock if options.timings else None, **base)

    validate_order = min(N + bump, tube.order - 1 - witness.max_length)
    if validate_order < N:
        raise InputError(
            f"defining functions known to order {tube.order}; need {N + 1 + witness.max_length}")

    t2 = time.perf_counter()
    grid = obstruction_test(tube, witness, bounds["degree"], N, bounds["margin"], validate_order)
    clock["obstruction"] = time.perf_counter() - t2

    first_second = None
    if options.first_second:
        if tube.d != 1:
            raise InputError("--first-second applies to hypersurfaces (d = 1)")
        t3 = time.perf_counter()
        try:
            first_second = hypersurface_first_second_test(
                tube, bounds["degree"], N, bounds["margin"], validate_order)
        except SingularMatrixError:
            raise InputError("Hessian at 0 is singular; first/second test unavailable") from None
        clock["first_second"] = time.perf_counter() - t3

    verdict = _verdict_for(grid)
    return Report(verdict=verdict, witness=witness, recentering_constants=constants,
                  entries=grid, first_second=first_second, message=_message(verdict, bounds),
                  timings=clock if options.timings else None, **base)


def _run_polar(problem, options, bounds, echo) -> Report:
    t0 = time.perf_counter()
    N, bump = bounds["order"], bounds["validate_bump"]
    (phi,) = problem.expand(N + bump + 1)
    if phi.order < N + 1:
        raise InputError(f"profile known to order {phi.order}; need {N + 1}")
    profile = PolarProfile(phi)
    result = polar_rigid_test(profile, bounds["degree"], N, bounds["margin"])
    clock = {"polar": time.perf_counter() - t0}
    hypotheses = "ASSERTED" if options.assume_family else "NOT_ASSERTED"
    if not profile.levi_nondegenerate:
        hypotheses = "UNCHECKED-HYPOTHESES"
    verdict = _verdict_for([[result]])
    return Report(
        command="polar", input=echo, verdict=verdict, bounds=bounds,
        minimality="TRUE" if profile.levi_nondegenerate else "UNCHECKED",
        assumptions={"automorphism_algebra": hypotheses,
                     "levi_nondegenerate_at_0": profile.levi_nondegenerate},
        entries=[[result]], message=_message(verdict, bounds),
        timings=clock if options.timings else None)


def run_guess(data: Mapping, options: RunOptions = RunOptions()) -> Report:
    """Raw relation search on a series given as a literal or an expression."""
    echo = dict(data)
    try:
        if not isinstance(data, Mapping):
            raise InputError("series file must be a JSON object")
        m = data.get("var_count", 1)
        if not isinstance(m, int) or not 1 <= m <= 9:
            raise InputError("var_count must be an integer in 1..9")
        bounds = resolve_bounds(m, options)
        N, bump = bounds["order"], bounds["validate_bump"]
        if "expr" in data:
            f = taylor(parse(data["expr"], m), m, N + bump)
        else:
            f = Series.from_dict(data, var_count=m)
            f = f.truncate(N + bump)
        if f.order < N:
            raise InputError(f"series known to order {f.order}; need {N}")
        result = guess_relation(f, bounds["degree"], N, bounds["margin"])
    except (InputError, ParseError, TaylorError, UnderdeterminedError, ValueError, KeyError) as exc:
        return _input_error("guess", echo, exc)
    verdict = _verdict_for([[result]])
    return Report(command="guess", input=echo, verdict=verdict, bounds=bounds,
                  entries=[[result]], message=_message(verdict, bounds))


# -- bundled corpus -------------------------------------------------------------

def _rational_control(order: int = 120) -> dict:
    # y^2 / (1 - y): coefficients 0, 0, 1, 1, 1, ...
    return {"dense": ["0", "0"] + ["1"] * (order - 1)}


def corpus_problems() -> list[ProblemFile]:
    """Bundled examples: transcendental tubes and profiles plus algebraic controls."""
    def tube(name, texts, n=2, bounds=None):
        return ProblemFile(n=n, d=len(texts), mode="tube", phi=tuple(texts),
                           bounds=bounds or {}, name=name)

    def polar(name, text, bounds=None):
        return ProblemFile(n=2, d=1, mode="rigid-polar", phi=(text,),
                           bounds=bounds or {"degree": 4, "order": 40}, name=name)

    family2 = to_text(perturbed_family_expr(2, ["exp(y1) - 1"]))
    family3 = to_text(perturbed_family_expr(3, ["sin(y2)", "exp(y1) - 1"]))
    return [
        tube("tube-sin-y2", ["sin(y1^2)"]),
        tube("tube-sinh-y2", ["sinh(y1^2)"]),
        tube("tube-exp-exp", ["exp(exp(y1)-1)-1"]),
        tube("family-n2-exp", [family2]),
        tube("family-n3-sin-exp", [family3], 3, bounds={"degree": 2}),
        polar("polar-exp", "exp(y1)-1"),
        polar("polar-sin", "sin(y1)"),
        polar("polar-sinh", "sinh(y1)"),
        polar("polar-control-quadratic", "y1 + y1^2"),
        tube("control-y2", ["y1^2"]),
        tube("control-y2-y6", ["y1^2 + y1^6"], bounds={"degree": 10}),
        ProblemFile(n=2, d=1, mode="tube", phi_series=(_rational_control(),),
                    name="control-rational-series"),
        tube("control-m2-squares", n=3, texts=["y1^2 + y2^2"], bounds={"degree": 2}),
        tube("control-m2-cross-cubic", n=3, texts=["y1*y2 + y1^3"], bounds={"degree": 2}),
        tube("control-m2-cubic", n=3, texts=["y1^2 + y2^2 + y1^3"], bounds={"degree": 3}),
        tube("control-m2-cross-sextic", n=3, texts=["y1*y2 + y1^6"], bounds={"degree": 4}),
        tube("control-m2-quartic", n=3, texts=["y1^2 + y2^2 + y2^4"], bounds={"degree": 5}),
        tube("control-m2-sheared-cubic", n=3, texts=["(y1 + y2)^2 + y2^2 + (y1 + y2)^3"],
             bounds={"degree": 3}),
    ]


def emit_corpus(directory: str | Path) -> list[ProblemFile]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    problems = corpus_problems()
    for p in problems:
        (directory / f"{p.name}.json").write_text(json.dumps(p.to_dict(), indent=2) + "\n")
    return problems


def load_problem(path: str | Path) -> ProblemFile:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    return ProblemFile.from_dict(data)
