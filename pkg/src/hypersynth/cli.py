"""Batch front end: classify a specification, race synthesis against counterexample search, report.

The synthesis side tries bounds strictly in order so a reported state count
is minimal.  The counterexample side walks ``k`` and the strategy bound and
may come back to attempts that ran out of budget.  Both sides work in
rounds whose node budget grows geometrically, which makes the
single-threaded interleaving deterministic.
"""

from __future__ import annotations

import argparse
import json
import sys
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

from . import tsys
from .counterex import (
    CounterStrategy, build_counterexample_problem, candidate_systems, counterexample_at, verify_counterexample,
)
from .formula import AlphabetSpec, Formula, ParseError, PCPInstance, encode_pcp
from .fragments import (
    ExecutionPlan, PlanKind, check_exists_strategy, exists_forall1_reduction, find_exists_model,
    prefix_strategy, route,
)
from .specfile import SpecFile
from .synth import MAX_INPUT_BITS, Interrupted, SolverError, SoundnessError, synthesize_at
from .tsys import Semantics, TransitionSystem, model_check

EXIT_REALIZABLE, EXIT_UNREALIZABLE, EXIT_UNKNOWN, EXIT_ERROR = 0, 1, 2, 3

REALIZABLE = "REALIZABLE"
UNREALIZABLE = "UNREALIZABLE"
UNKNOWN = "UNKNOWN"
CLASSIFIED_ONLY = "CLASSIFIED-ONLY"

BASE_BUDGET = 2_000
GROWTH = 4
MIN_SHARE = 250


@dataclass(frozen=True)
class RunOptions:
    max_bound: int | None = None
    max_k: int | None = None
    cx_max_bound: int | None = None
    solver: str | None = None
    dump_smt: str | None = None
    dot: str | None = None
    out: str | None = None
    single_threaded: bool = False
    timeout: float | None = None
    seed: int = 0
    classify_linear: bool = True


@dataclass
class RunReport:
    spec: str
    verdict: str
    plan: ExecutionPlan | None = None
    bound: int | None = None
    k: int | None = None
    system: TransitionSystem | None = None
    strategy: CounterStrategy | None = None
    architecture: Any = None
    stats: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    artifacts: dict[str, str] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return {REALIZABLE: EXIT_REALIZABLE, UNREALIZABLE: EXIT_UNREALIZABLE}.get(self.verdict, EXIT_UNKNOWN)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"spec": self.spec, "verdict": self.verdict}
        if self.plan is not None:
            out["plan"] = self.plan.kind.value
            out["classification"] = self.plan.verdict.to_json()
        if self.verdict == REALIZABLE:
            out["bound"] = self.bound
            out["states"] = self.system.size
            out["semantics"] = self.system.semantics.value
            out["system"] = tsys.to_json(self.system)
        if self.verdict == UNREALIZABLE:
            s = self.strategy
            out["k"] = s.k
            out["strategy_states"] = s.system.size
            out["selections"] = [list(p) for p in s.problem.selections]
            out["strategy"] = tsys.to_json(s.system)
        if self.architecture is not None:
            out["architecture"] = self.architecture.to_json()
        out["stats"] = self.stats
        out["notes"] = self.notes + (list(self.plan.notes) if self.plan else [])
        out["artifacts"] = self.artifacts
        return out


# ---------------------------------------------------------------------------
# spec loading


def bundled(name: str) -> Path | None:
    """Path of a bundled benchmark, accepting ``name``, ``name.json`` or ``benchmarks/name``."""
    stem = Path(name).name
    if stem.endswith(".json"):
        stem = stem[:-5]
    ref = resources.files("hypersynth") / "benchmarks" / f"{stem}.json"
    return Path(str(ref)) if ref.is_file() else None


def benchmark_names() -> list[str]:
    root = resources.files("hypersynth") / "benchmarks"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_spec(ref: str | Path) -> SpecFile:
    """A specification file, or a PCP instance file encoded on the fly."""
    path = Path(ref)
    if not path.is_file():
        found = bundled(str(ref))
        if found is None:
            raise FileNotFoundError(f"no specification file or bundled benchmark named {ref}")
        path = found
    data = json.loads(path.read_text())
    stem = path.name[:-5] if path.name.endswith(".json") else path.name
    if isinstance(data, dict) and "alpha" in data:
        return pcp_gen(data, data.get("name", stem))
    return SpecFile.from_json(data, stem)


# ---------------------------------------------------------------------------
# the race


WIN, RESOLVED, PAUSED = "win", "resolved", "paused"


class Agenda:
    """Attempts of one side, each run with a node budget until it wins or resolves.

    ``strict`` agendas never skip a paused attempt; others try every
    pending attempt each round, the ``i``-th one with ``budget >> 2i`` nodes.
    """

    def __init__(self, name: str, attempts: list[Callable[[int | None], tuple[str, Any]]], strict: bool):
        self.name = name
        self.pending = list(attempts)
        self.strict = strict
        self.nodes_spent = 0

    @property
    def done(self) -> bool:
        return not self.pending

    def round(self, budget: int | None) -> tuple[str, Any] | None:
        """One pass over pending attempts; a win is returned immediately."""
        keep = []
        for i, attempt in enumerate(self.pending):
            share = budget if budget is None or self.strict else max(budget >> 2 * i, MIN_SHARE)
            status, payload = attempt(share)
            if status == WIN:
                return status, payload
            if status == PAUSED:
                keep.append(attempt)
                if self.strict:
                    keep.extend(self.pending[i + 1:])
                    break
        self.pending = keep
        return None


class _Stop(Exception):
    pass


def _synth_attempts(spec: SpecFile, opts: RunOptions, max_bound: int, cancel, deadline, stats) -> list:
    backend = "external" if opts.solver else "builtin"

    def make(b: int):
        def attempt(budget):
            if cancel.is_set() or (deadline is not None and time.monotonic() > deadline):
                raise _Stop()
            r = synthesize_at(spec, b, backend, opts.solver, True, cancel, deadline, opts.dump_smt, budget)
            stats["synth_nodes"] = stats.get("synth_nodes", 0) + int(r.stats.get("nodes", 0))
            if r.verdict == "realizable":
                return WIN, r
            if r.verdict == "unsat":
                stats["synth_unsat_up_to"] = b
                return RESOLVED, None
            if r.reason in ("cancelled", "deadline reached"):
                raise _Stop()
            return PAUSED, None
        return attempt

    return [make(b) for b in range(1, max_bound + 1)]


def _cx_attempts(f: Formula, spec: SpecFile, ks: range, max_bound: int, opts: RunOptions, cancel, deadline, stats) -> list:
    systems = candidate_systems(spec.inputs, spec.outputs, spec.semantics, seed=opts.seed)
    problems: dict[int, list] = {}

    def subproblems(k: int) -> list:
        if k not in problems:
            problems[k] = build_counterexample_problem(f, k, spec.alphabet, spec.semantics).attempts()
        return problems[k]

    def make(k: int, b: int, i: int):
        def attempt(budget):
            if cancel.is_set() or (deadline is not None and time.monotonic() > deadline):
                raise _Stop()
            p = subproblems(k)[i]
            try:
                found = counterexample_at(p, b, cancel, deadline, budget, systems)
            except Interrupted as e:
                if str(e) in ("cancelled", "deadline reached"):
                    raise _Stop() from None
                return PAUSED, None
            if found is None:
                return RESOLVED, None
            stats["counterexample_nodes"] = stats.get("counterexample_nodes", 0) + int(found.stats.get("nodes", 0))
            return WIN, found
        return attempt

    out = []
    for k in ks:
        count = len(subproblems(k))
        for b in range(1, max_bound + 1):
            out.extend(make(k, b, i) for i in range(count))
    return out


def _drive(agendas: list[Agenda], deadline: float | None) -> list[tuple[str, Any]]:
    """Interleave agendas round by round in one thread."""
    budget = BASE_BUDGET
    while any(not a.done for a in agendas):
        for a in agendas:
            if a.done:
                continue
            try:
                won = a.round(budget)
            except _Stop:
                return []
            if won is not None:
                return [(a.name, won[1])]
        budget *= GROWTH
        if deadline is not None and time.monotonic() > deadline:
            return []
    return []


def _race(agendas: list[Agenda], cancel: threading.Event, deadline: float | None) -> list[tuple[str, Any]]:
    """One thread per agenda; the first win cancels the others."""
    wins: list[tuple[str, Any]] = []
    errors: list[BaseException] = []
    lock = threading.Lock()

    def work(a: Agenda):
        try:
            found = _drive([a], deadline)
        except BaseException as e:  # surfaced in the caller
            with lock:
                errors.append(e)
            cancel.set()
            return
        if found:
            with lock:
                wins.extend(found)
            cancel.set()

    threads = [threading.Thread(target=work, args=(a,), name=a.name, daemon=True) for a in agendas]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    return wins


def run(spec: SpecFile, opts: RunOptions = RunOptions()) -> RunReport:
    """Classify, route, search and verify; never returns an unverified verdict."""
    start = time.monotonic()
    timeout = opts.timeout if opts.timeout is not None else spec.option("timeout")
    deadline = None if timeout is None else start + float(timeout)
    plan = route(spec, try_linear=opts.classify_linear)
    report = RunReport(spec.name, UNKNOWN, plan)
    report.stats["classify_seconds"] = round(time.monotonic() - start, 3)
    max_bound = opts.max_bound or int(spec.option("max_bound", 4))
    max_k = opts.max_k or int(spec.option("max_k", 2))
    cx_bound = opts.cx_max_bound or int(spec.option("cx_max_bound", min(2, max_bound)))

    match plan.kind:
        case PlanKind.EXISTS:
            model = find_exists_model(plan.formula, spec.alphabet)
            if model is None:
                report.notes.append("no lasso model within bounds")
            else:
                system = prefix_strategy(model.traces, spec.inputs, spec.outputs, spec.semantics)
                if not check_exists_strategy(plan.formula, model, system):
                    raise SoundnessError("extracted strategy does not reproduce its witnesses")
                report.verdict, report.system, report.bound = REALIZABLE, system, system.size
        case PlanKind.ARCHITECTURE:
            report.verdict = CLASSIFIED_ONLY
            report.architecture = exists_forall1_reduction(plan.formula, spec.alphabet)
        case PlanKind.UNSUPPORTED:
            report.verdict = CLASSIFIED_ONLY
        case PlanKind.RACE | PlanKind.COUNTEREXAMPLE_ONLY:
            target = plan.formula if plan.kind is PlanKind.RACE else plan.universal_part
            if target is None:
                report.notes.append("nothing to search")
            else:
                _search(spec, plan, target, opts, max_bound, max_k, cx_bound, deadline, report)
    report.stats["seconds"] = round(time.monotonic() - start, 3)
    _write_artifacts(report, opts)
    return report


def _search(spec, plan, target, opts, max_bound, max_k, cx_bound, deadline, report):
    cancel = threading.Event()
    stats = report.stats
    n = max(len(target.prefix), 1)
    agendas = []
    builtin = opts.solver is None
    if plan.kind is PlanKind.RACE:
        if builtin and len(spec.inputs) > MAX_INPUT_BITS:
            report.notes.append(f"synthesis skipped: more than {MAX_INPUT_BITS} inputs")
        else:
            agendas.append(Agenda("synthesis", _synth_attempts(spec, opts, max_bound, cancel, deadline, stats), True))
    if n <= max_k and len(spec.outputs) * n > MAX_INPUT_BITS:
        report.notes.append(f"counterexample search skipped: {n} x {len(spec.outputs)} observed outputs "
                            f"exceed {MAX_INPUT_BITS}")
    elif n <= max_k:
        ks = range(n, min(max_k, MAX_INPUT_BITS // max(len(spec.outputs), 1)) + 1)
        agendas.append(Agenda("counterexample", _cx_attempts(target, spec, ks, cx_bound, opts, cancel, deadline, stats), False))
    else:
        report.notes.append(f"max_k = {max_k} is below the {n} quantified traces")
    if not agendas:
        return
    wins = _drive(agendas, deadline) if opts.single_threaded else _race(agendas, cancel, deadline)
    kinds = {name for name, _ in wins}
    if len(kinds) > 1:
        raise SoundnessError("both a realizing system and a counterexample were found")
    if not wins:
        timed_out = deadline is not None and time.monotonic() > deadline
        report.notes.append("timeout" if timed_out else "bounds exhausted")
        return
    name, payload = wins[0]
    if name == "synthesis":
        report.verdict, report.bound, report.system = REALIZABLE, payload.bound, payload.system
        if any(not model_check(payload.system, g).holds for g in filter(None, [spec.ltl_formula(), *spec.hyper])):
            raise SoundnessError("reported system fails model checking")
    else:
        systems = candidate_systems(spec.inputs, spec.outputs, spec.semantics, seed=opts.seed)
        if not verify_counterexample(payload, target, systems):
            raise SoundnessError("reported counter strategy fails verification")
        report.verdict, report.k, report.bound, report.strategy = UNREALIZABLE, payload.k, payload.bound, payload


def _write_artifacts(report: RunReport, opts: RunOptions):
    artifact = None
    if report.system is not None:
        artifact, dot = tsys.to_json(report.system), tsys.to_dot(report.system, "system")
    elif report.strategy is not None:
        artifact, dot = tsys.to_json(report.strategy.system), tsys.to_dot(report.strategy.system, "strategy")
    elif report.architecture is not None:
        artifact, dot = report.architecture.to_json(), None
    else:
        dot = None
    if opts.out and artifact is not None:
        Path(opts.out).write_text(json.dumps(artifact, indent=2))
        report.artifacts["out"] = opts.out
    if opts.dot and dot is not None:
        Path(opts.dot).write_text(dot)
        report.artifacts["dot"] = opts.dot
    if opts.dump_smt and Path(opts.dump_smt).exists():
        report.artifacts["smt"] = opts.dump_smt


# ---------------------------------------------------------------------------
# other commands


def check(spec: SpecFile, system: TransitionSystem) -> dict:
    """Model check every universal part of the specification."""
    if set(system.inputs) != set(spec.inputs) or set(system.outputs) != set(spec.outputs):
        raise ValueError("system alphabet does not match the specification")
    if system.semantics is not spec.semantics:
        raise ValueError(f"system is {system.semantics.value} but the specification is {spec.semantics.value}")
    results = []
    for f in filter(None, [spec.ltl_formula(), *spec.hyper]):
        if not f.is_universal():
            results.append({"formula": str(f), "holds": None, "note": "not universal; skipped"})
            continue
        v = model_check(system, f)
        entry: dict[str, Any] = {"formula": str(f), "holds": v.holds}
        if not v.holds:
            entry["witness"] = {var: str(t) for var, t in zip(v.variables, v.witnesses)}
        results.append(entry)
    return {"holds": all(r["holds"] is not False for r in results), "results": results}


def pcp_gen(instance: dict | str | Path, name: str = "pcp") -> SpecFile:
    """Specification whose realizability encodes the given correspondence problem."""
    if isinstance(instance, (str, Path)):
        instance = json.loads(Path(instance).read_text())
    try:
        p = PCPInstance(instance["alphabet"], instance["alpha"], instance["beta"])
    except (KeyError, TypeError) as e:
        raise ValueError(f"malformed PCP instance: {e}") from None
    f, alphabet = encode_pcp(p)
    return SpecFile(tuple(sorted(alphabet.inputs)), tuple(sorted(alphabet.outputs)), Semantics.MOORE, (), (f,),
                    {"max_bound": 2, "max_k": 2}, name)


# ---------------------------------------------------------------------------
# argument handling


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypersynth", description="Bounded synthesis for HyperLTL specifications.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="decide realizability of a specification")
    s.add_argument("spec", help="specification file or bundled benchmark name")
    s.add_argument("--max-bound", type=int)
    s.add_argument("--max-k", type=int)
    s.add_argument("--cx-max-bound", type=int, help="largest counter-strategy size")
    s.add_argument("--solver", help="external SMT solver command reading SMT-LIB2 from a file path")
    s.add_argument("--dump-smt", metavar="PATH")
    s.add_argument("--dot", metavar="PATH")
    s.add_argument("--out", metavar="PATH", help="write the system, strategy or architecture as JSON")
    s.add_argument("--single-threaded", action="store_true")
    s.add_argument("--timeout", type=float, metavar="SECS")
    s.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("check", help="model check a system against a specification")
    c.add_argument("spec")
    c.add_argument("system", help="transition system JSON")

    k = sub.add_parser("classify", help="report the decidability class")
    k.add_argument("spec")

    g = sub.add_parser("pcp-gen", help="specification from a PCP instance")
    g.add_argument("instance")
    g.add_argument("--out", metavar="PATH")
    g.add_argument("--name", default="pcp")

    sub.add_parser("list", help="list bundled benchmarks")
    return p


def _emit(obj: dict):
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        match args.command:
            case "synth":
                spec = load_spec(args.spec)
                opts = RunOptions(args.max_bound, args.max_k, args.cx_max_bound, args.solver, args.dump_smt,
                                  args.dot, args.out, args.single_threaded, args.timeout, args.seed)
                report = run(spec, opts)
                _emit(report.to_json())
                return report.exit_code
            case "check":
                spec = load_spec(args.spec)
                system = tsys.from_json(Path(args.system).read_text())
                result = check(spec, system)
                _emit(result)
                return EXIT_REALIZABLE if result["holds"] else EXIT_UNREALIZABLE
            case "classify":
                spec = load_spec(args.spec)
                plan = route(spec)
                _emit({"spec": spec.name, "plan": plan.kind.value, **plan.to_json()})
                return EXIT_REALIZABLE
            case "pcp-gen":
                spec = pcp_gen(args.instance, args.name)
                text = json.dumps(spec.to_json(), indent=2)
                if args.out:
                    Path(args.out).write_text(text)
                    _emit({"spec": spec.name, "written": args.out})
                else:
                    sys.stdout.write(text + "\n")
                return EXIT_REALIZABLE
            case "list":
                _emit({"benchmarks": benchmark_names()})
                return EXIT_REALIZABLE
    except (ParseError, ValueError, FileNotFoundError, SolverError, SoundnessError, OSError, KeyError) as e:
        _emit({"error": type(e).__name__, "message": str(e)})
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
