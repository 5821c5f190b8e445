"""Command-line front end.

A scenario argument is either a built-in name (see ``BUILTIN_NAMES``) or
a path to a ``.ws`` file.

Exit status::

    0  success
    1  diagnostics or domain errors
    2  usage errors
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .dsl import DslError, load
from .errors import WeakstatError
from .sampler import (
    SampleConfig,
    estimate_conditional_state,
    estimate_density,
    estimate_expectations,
    sample_sequential,
    sample_weak,
)
from .scenarios import BUILTIN_NAMES, Scenario, bell_joint_table, builtin, evaluate, is_builtin
from .tomography import build_weak_povm, gell_mann_basis

DEFAULT_EPSILON = 0.05
DEFAULT_SEED = 0
DIGITS = 10
SEED_ENV = "WEAKSTAT_SEED"


class UsageError(Exception):
    pass


def _num(x) -> float | None:
    x = float(x)
    if not math.isfinite(x):
        return None
    return round(x, DIGITS) + 0.0  # also turns -0.0 into 0.0


def _matrix(m: np.ndarray) -> tuple[list, list]:
    m = np.asarray(m)
    return (
        [[_num(v) for v in row] for row in m.real],
        [[_num(v) for v in row] for row in m.imag],
    )


def _event(label: str, value: float, stderr: float | None = None) -> dict:
    v = _num(value)
    return {
        "label": label,
        "value": v,
        "stderr": None if stderr is None else _num(stderr),
        "quasi": v is not None and v < 0,
    }


def _state(label: str, st, prob_stderr: float | None = None) -> dict:
    re, im = _matrix(st.op)
    eig = [_num(v) for v in st.eigenvalues()]
    err = getattr(st, "stderr", None)
    return {
        "label": label,
        "probability": _num(st.preparation_prob),
        "probability_stderr": None if prob_stderr is None else _num(prob_stderr),
        "real": re,
        "imag": im,
        "stderr": None if err is None else [[_num(v) for v in row] for row in err],
        "eigenvalues": eig,
        "min_eigenvalue": eig[0],
        "quasi": eig[0] is not None and eig[0] < 0,
    }


# commands


def _load_scenario(ref: str) -> Scenario:
    if is_builtin(ref):
        return builtin(ref)
    path = Path(ref)
    if not path.is_file():
        raise UsageError(
            f"unknown scenario {ref!r}: not a built-in ({', '.join(BUILTIN_NAMES)}) and not a file"
        )
    text = path.read_text(encoding="utf-8")
    try:
        scenario = load(text, path.stem)
    except DslError as exc:
        exc.source = ref
        raise
    for w in scenario.warnings:
        print(f"{ref}:{w}", file=sys.stderr)
    return scenario


def cmd_exact(scenario: Scenario, args) -> dict:
    rep = evaluate(scenario)
    return {
        "scenario": scenario.name,
        "events": [_event(k, v) for k, v in rep.exact_values.items()],
        "conditional_states": [_state(f"R[{k}]", st) for k, st in rep.conditional_states.items()],
    }


def cmd_bell(scenario: Scenario, args) -> dict:
    rep = bell_joint_table(scenario)
    events = [_event(e.label, e.probability) for e in rep.events]
    events += [_event(k, v) for k, v in rep.exact_values.items()]
    return {
        "scenario": scenario.name,
        "events": events,
        "conditional_states": [_state(f"R[{k}]", st) for k, st in rep.conditional_states.items()],
        "chsh": _num(rep.aggregate),
    }


def _sampling_header(scenario: Scenario, args) -> dict:
    return {"scenario": scenario.name, "epsilon": _num(args.epsilon), "shots": args.shots, "seed": args.seed}


def cmd_sample(scenario: Scenario, args) -> dict:
    basis = gell_mann_basis(scenario.dim)
    povm = build_weak_povm(basis, args.epsilon)
    cfg = SampleConfig(args.shots, args.seed, args.shards)
    counts = sample_weak(scenario.initial, povm, cfg)
    report = estimate_expectations(counts, povm)
    rho = estimate_density(counts, povm, basis)
    out = _sampling_header(scenario, args)
    out["events"] = [_event(f"<{k}>", e.mean, e.stderr) for k, e in report.estimates.items()]
    out["conditional_states"] = [_state("rho", rho)]
    return out


def cmd_tomo(scenario: Scenario, args) -> dict:
    basis = gell_mann_basis(scenario.dim)
    povm = build_weak_povm(basis, args.epsilon)
    cfg = SampleConfig(args.shots, args.seed, args.shards)
    pvm = scenario.final_pvm
    counts = sample_sequential(scenario.initial, povm, list(pvm.values()), cfg, tuple(pvm))
    n = counts.shots
    events, states = [], []
    for k, lab in enumerate(pvm):
        p = counts.counts[:, k].sum() / n
        perr = math.sqrt(p * (1 - p) / n)
        events.append(_event(f"p({lab})", p, perr))
        try:
            st = estimate_conditional_state(counts, povm, basis, lab)
        except WeakstatError as exc:
            print(f"weakstat: warning: {exc}", file=sys.stderr)
            continue
        states.append(_state(f"R[{lab}]", st, perr))
    out = _sampling_header(scenario, args)
    out["events"] = events
    out["conditional_states"] = states
    return out


def cmd_check(args) -> tuple[str, bool]:
    from .selfcheck import run_checks

    results = run_checks()
    lines = [f"{'PASS' if r.ok else 'FAIL'}  {r.name}  {r.detail}" for r in results]
    passed = sum(r.ok for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines) + "\n", passed == len(results)


# rendering


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def _fmt(x) -> str:
    return "nan" if x is None else f"{x:+.{DIGITS}f}"


def render_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "value", "stderr"])

    def row(label, value, stderr=None):
        w.writerow([label, "" if value is None else repr(value), "" if stderr is None else repr(stderr)])

    for e in report["events"]:
        row(e["label"], e["value"], e["stderr"])
    for st in report["conditional_states"]:
        lab = st["label"]
        row(f"{lab}.probability", st["probability"], st["probability_stderr"])
        err = st["stderr"]
        for j, (rrow, irow) in enumerate(zip(st["real"], st["imag"])):
            for k, (re, im) in enumerate(zip(rrow, irow)):
                se = None if err is None else err[j][k]
                row(f"{lab}[{j}][{k}].re", re, se)
                row(f"{lab}[{j}][{k}].im", im, se)
        for j, v in enumerate(st["eigenvalues"]):
            row(f"{lab}.eig[{j}]", v)
    if "chsh" in report:
        row("chsh", report["chsh"])
    return buf.getvalue()


def render_text(report: dict) -> str:
    out = [f"scenario: {report['scenario']}"]
    for key in ("epsilon", "shots", "seed"):
        if key in report:
            out.append(f"{key}: {report[key]}")
    events = report["events"]
    if events:
        width = max(len(e["label"]) for e in events)
        out.append("")
        out.append(f"{'label':<{width}}  {'value':>14}  {'stderr':>14}  quasi")
        for e in events:
            se = "" if e["stderr"] is None else _fmt(e["stderr"])
            out.append(f"{e['label']:<{width}}  {_fmt(e['value']):>14}  {se:>14}  {'quasi' if e['quasi'] else ''}".rstrip())
    for st in report["conditional_states"]:
        out.append("")
        out.append(f"{st['label']}  probability {_fmt(st['probability'])}")
        for rrow, irow in zip(st["real"], st["imag"]):
            cells = [f"{_fmt(re)}{_fmt(im)}i" for re, im in zip(rrow, irow)]
            out.append("  [" + ", ".join(cells) + "]")
        if st["stderr"] is not None:
            for srow in st["stderr"]:
                out.append("  stderr [" + ", ".join(_fmt(v) for v in srow) + "]")
        eig = ", ".join(_fmt(v) for v in st["eigenvalues"])
        out.append(f"  eigenvalues [{eig}]  {'quasi' if st['quasi'] else ''}".rstrip())
    if "chsh" in report:
        out.append("")
        out.append(f"chsh {_fmt(report['chsh'])}")
    return "\n".join(out) + "\n"


RENDER = {"json": render_json, "csv": render_csv, "text": render_text}
COMMANDS = {"exact": cmd_exact, "bell": cmd_bell, "sample": cmd_sample, "tomo": cmd_tomo}


# argument handling


def _positive_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _seed(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {s!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2**64), got {v}")
    return v


def _epsilon(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {s!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"epsilon must be positive, got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--shots", type=_positive_int, help="number of simulated shots")
    common.add_argument(
        "--epsilon", type=_epsilon, default=DEFAULT_EPSILON, help=f"weak strength (default {DEFAULT_EPSILON})"
    )
    common.add_argument(
        "--seed", type=_seed, default=None, help=f"RNG seed (default ${SEED_ENV} or {DEFAULT_SEED})"
    )
    common.add_argument("--format", choices=sorted(RENDER), default="text")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("--shards", type=_positive_int, default=1, help="parallel sampling shards")

    p = argparse.ArgumentParser(prog="weakstat", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (
        ("exact", "exact conditional states and query values"),
        ("sample", "weak-measurement sampling and state reconstruction"),
        ("tomo", "post-selected sampling and conditional-state reconstruction"),
    ):
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("scenario", help="built-in name or .ws file")
    sp = sub.add_parser("bell", parents=[common], help="Bell table and CHSH value")
    sp.add_argument("scenario", nargs="?", default="bell-chsh")
    sub.add_parser("check", parents=[common], help="run the invariant self-test")
    return p


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return DEFAULT_SEED
    try:
        return _seed(env.strip())
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{SEED_ENV}: {exc}") from None


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.seed = _resolve_seed(args)
        if args.command == "check":
            text, ok = cmd_check(args)
            _emit(text, args.output)
            return 0 if ok else 1
        if args.command in ("sample", "tomo") and args.shots is None:
            raise UsageError(f"'{args.command}' requires --shots")
        scenario = _load_scenario(args.scenario)
        report = COMMANDS[args.command](scenario, args)
        _emit(RENDER[args.format](report), args.output)
        return 0
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"weakstat: error: {exc}", file=sys.stderr)
        return 2
    except DslError as exc:
        src = getattr(exc, "source", "<input>")
        for d in exc.diagnostics:
            print(f"{src}:{d}", file=sys.stderr)
        return 1
    except (WeakstatError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"weakstat: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
