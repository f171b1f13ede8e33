"""Command-line front end.

Exit codes: 0 when every check passes, 1 on a verification failure, 2 on
usage, input or file-format errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .composite import derivation_walkthrough, partial_trace_fast, partial_trace_via_embeddings
from .continuum import Grid, gaussian_demo
from .errors import PartraceError
from .fileio import digest, dumps_density, loads_basis, loads_observable, loads_state, read_text, write_text
from .linalg import DEFAULT_TOL
from .measurement import (
    Observable,
    corpus_trial,
    empirical_compare,
    joint_born_probs,
    marginalize,
    born_probs,
    observable_from_matrix,
    pauli_x,
    pauli_z,
    sample_joint,
    verify_marginal_consistency,
)
from .states import validate_density

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.5e}"


@dataclass
class RunReport:
    command: str
    inputs: str
    seeds: list[int] = field(default_factory=list)
    rows: list[tuple[str, ...]] = field(default_factory=list)
    header: tuple[str, ...] = ()
    notes: list[tuple[str, str]] = field(default_factory=list)
    max_deviation: float | None = None
    passed: bool = True
    wall_time: float = 0.0

    def body(self) -> str:
        lines = [f"command: {self.command}", f"inputs: {self.inputs}"]
        if self.seeds:
            lines.append("seed: " + ",".join(str(s) for s in self.seeds))
        if self.rows:
            widths = [max(len(r[k]) for r in [self.header, *self.rows]) for k in range(len(self.header))]
            for r in [self.header, *self.rows]:
                lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip())
        lines.extend(f"{k}: {v}" for k, v in self.notes)
        if self.max_deviation is not None:
            lines.append(f"max_deviation: {fmt(self.max_deviation)}")
        lines.append("result: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "command": self.command,
                "inputs": self.inputs,
                "seeds": self.seeds,
                "passed": self.passed,
                "max_deviation": self.max_deviation,
                "header": list(self.header),
                "rows": [list(r) for r in self.rows],
                "notes": dict(self.notes),
                "wall_time": self.wall_time,
            },
            indent=2,
        ) + "\n"


def _load_state(path: str):
    text = read_text(path)
    return loads_state(text), digest(text.encode())


def _observable(spec: str, dim: int) -> Observable:
    if spec in ("z", "x"):
        if dim != 2:
            raise UsageError(f"shorthand observable {spec!r} needs a 2-dimensional factor, got {dim}")
        return pauli_z() if spec == "z" else pauli_x()
    obs = observable_from_matrix(loads_observable(read_text(spec)))
    if obs.dimension != dim:
        raise UsageError(f"observable in {spec} has dimension {obs.dimension}, factor has {dim}")
    return obs


def _require_bipartite(rho) -> None:
    if rho.nslots != 2:
        raise UsageError(f"expected a bipartite state, got dims {list(rho.dims)}")


def cmd_reduce(args) -> tuple[RunReport, int]:
    rho, dig = _load_state(args.input)
    keep = sorted(set(args.keep))
    if any(not 0 <= k < rho.nslots for k in keep):
        raise UsageError(f"keep slots {keep} out of range for {rho.nslots} subsystems")
    if args.basis == "computational":
        reduced = partial_trace_fast(rho, keep)
    else:
        traced = [k for k in range(rho.nslots) if k not in keep]
        if len(traced) != 1:
            raise UsageError("a basis file needs exactly one traced slot")
        reduced = partial_trace_via_embeddings(rho, traced[0], loads_basis(read_text(args.basis)))
    check = validate_density(reduced, args.tol)
    report = RunReport("reduce", dig)
    report.notes = [
        ("keep", ",".join(str(k) for k in keep)),
        ("dims", ",".join(str(d) for d in reduced.dims)),
        ("trace", fmt(reduced.trace().real)),
        ("purity", fmt(reduced.purity())),
        ("hermitian_residual", fmt(check.hermitian_residual)),
        ("min_eigenvalue", fmt(check.min_eigenvalue)),
        ("trace_residual", fmt(check.trace_residual)),
    ]
    report.passed = check.passed
    text = dumps_density(reduced)
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return report, EXIT_OK if check.passed else EXIT_FAIL


def cmd_verify(args) -> tuple[RunReport, int]:
    rho, dig = (None, "generated-corpus") if args.input is None else _load_state(args.input)
    if rho is not None:
        _require_bipartite(rho)
    trials = args.trials
    if trials < 1:
        raise UsageError("--trials must be >= 1")
    report = RunReport("verify", dig, seeds=[args.seed])
    report.header = ("trial", "seed", "dims", "dev_a", "dev_b", "ok")
    worst = 0.0
    all_ok = True
    for t in range(trials):
        trial = corpus_trial(t, args.seed, rho)
        ra = verify_marginal_consistency(trial.rho, trial.obs_a, trial.obs_b, args.tol, side="a")
        rb = verify_marginal_consistency(trial.rho, trial.obs_a, trial.obs_b, args.tol, side="b")
        ok = ra.passed and rb.passed
        all_ok &= ok
        worst = max(worst, ra.max_deviation, rb.max_deviation)
        report.rows.append(
            (str(t), str(trial.seed), "x".join(map(str, trial.rho.dims)),
             fmt(ra.max_deviation), fmt(rb.max_deviation), "yes" if ok else "NO")
        )
    report.notes = [("trials", str(trials)), ("tol", fmt(args.tol))]
    report.max_deviation = worst
    report.passed = all_ok
    return report, EXIT_OK if all_ok else EXIT_FAIL


def cmd_probs(args) -> tuple[RunReport, int]:
    rho, dig = _load_state(args.input)
    obs = _observable(args.obs, rho.dim)
    dist = born_probs(rho, obs)
    report = RunReport("probs", dig)
    report.header = ("eigenvalue", "probability")
    report.rows = [(fmt(a), fmt(p)) for a, p in zip(dist.outcomes, dist.probs)]
    return report, EXIT_OK


def _joint(args):
    rho, dig = _load_state(args.input)
    _require_bipartite(rho)
    obs_a = _observable(args.obs_a, rho.dims[0])
    obs_b = _observable(args.obs_b, rho.dims[1])
    return joint_born_probs(rho, obs_a, obs_b), dig


def cmd_joint(args) -> tuple[RunReport, int]:
    joint, dig = _joint(args)
    report = RunReport("joint", dig)
    report.header = ("a", "b", "probability")
    report.rows = [
        (fmt(a), fmt(b), fmt(joint.probs[i, j]))
        for i, a in enumerate(joint.outcomes_a) for j, b in enumerate(joint.outcomes_b)
    ]
    pa, pb = marginalize(joint, "a"), marginalize(joint, "b")
    report.notes = [
        ("marginal_a", " ".join(f"{fmt(a)}:{fmt(p)}" for a, p in zip(pa.outcomes, pa.probs))),
        ("marginal_b", " ".join(f"{fmt(b)}:{fmt(p)}" for b, p in zip(pb.outcomes, pb.probs))),
    ]
    return report, EXIT_OK


def cmd_sample(args) -> tuple[RunReport, int]:
    if args.n < 1:
        raise UsageError("-n must be >= 1")
    joint, dig = _joint(args)
    counts = sample_joint(joint, args.n, args.seed)
    checks = [
        ("joint", empirical_compare(counts, joint)),
        ("marginal_a", empirical_compare(counts, marginalize(joint, "a"), "a")),
        ("marginal_b", empirical_compare(counts, marginalize(joint, "b"), "b")),
    ]
    report = RunReport("sample", dig, seeds=[args.seed])
    report.header = ("table", "outcome", "count", "empirical", "reference", "bound_3sigma", "flag")
    flat_counts = counts.counts.reshape(-1)
    for name, dev in checks:
        if name == "joint":
            cnt = flat_counts
        elif name == "marginal_a":
            cnt = counts.counts.sum(axis=1)
        else:
            cnt = counts.counts.sum(axis=0)
        for k, outcome in enumerate(dev.outcomes):
            label = ",".join(fmt(x) for x in outcome) if isinstance(outcome, tuple) else fmt(outcome)
            report.rows.append(
                (name, label, str(int(cnt[k])), fmt(dev.frequencies[k]), fmt(dev.probs[k]),
                 fmt(dev.bounds[k]), "FLAG" if dev.flags[k] else "ok")
            )
    report.notes = [("n", str(args.n))]
    report.max_deviation = max(float(np.max(d.deviations)) for _, d in checks)
    report.passed = all(d.passed for _, d in checks)
    return report, EXIT_OK if report.passed else EXIT_FAIL


def cmd_continuum_demo(args) -> tuple[RunReport, int]:
    grid = Grid(args.lo, args.hi, args.n)
    demo = gaussian_demo(args.s, args.S, grid)
    report = RunReport("continuum-demo", "gaussian")
    report.notes = [
        ("s", fmt(demo.s)),
        ("S", fmt(demo.S)),
        ("grid", f"[{fmt(grid.lo)}, {fmt(grid.hi)}] n={grid.n}"),
        ("sup_error", fmt(demo.sup_error)),
        ("refined_sup_error", fmt(demo.refined_sup_error)),
        ("refinement_ratio", fmt(demo.refinement_ratio)),
        ("population_match", fmt(demo.population_match)),
        ("purity", fmt(demo.purity)),
        ("trace_residual", fmt(demo.trace_residual)),
    ]
    report.max_deviation = demo.sup_error
    report.passed = demo.passed
    return report, EXIT_OK if demo.passed else EXIT_FAIL


def cmd_walkthrough(args) -> tuple[RunReport, int]:
    rho, dig = _load_state(args.input)
    _require_bipartite(rho)
    basis_a = None if args.basis_a == "computational" else loads_basis(read_text(args.basis_a))
    basis_b = None if args.basis_b == "computational" else loads_basis(read_text(args.basis_b))
    steps = derivation_walkthrough(rho, basis_a, basis_b, tol=args.tol)
    report = RunReport("walkthrough", dig)
    report.header = ("step", "populations", "deviation_from_previous")
    for k, (name, val) in enumerate(zip(steps.names, steps.values)):
        dev = "-" if k == 0 else fmt(steps.deviations[k - 1])
        report.rows.append((name, " ".join(fmt(v.real) for v in val), dev))
    report.notes = [(k, fmt(v)) for k, v in steps.identity_residuals.items()]
    report.max_deviation = steps.max_deviation
    report.passed = steps.passed
    return report, EXIT_OK if steps.passed else EXIT_FAIL


def _globals() -> argparse.ArgumentParser:
    # SUPPRESS lets the same flags appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="numerical tolerance (default 1e-10)")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    p.add_argument("--out", default=argparse.SUPPRESS, help="output path (state file for reduce, JSON report otherwise)")
    p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="suppress the report")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _globals()
    parser = argparse.ArgumentParser(prog="partrace", parents=[common], description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", parents=[common], help="partial trace of a state file")
    p.add_argument("input")
    p.add_argument("--keep", type=int, nargs="+", required=True, help="slots to keep")
    p.add_argument("--basis", default="computational", help="'computational' or a basis file for the traced slot")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("verify", parents=[common], help="check reduced-state populations against joint marginals")
    p.add_argument("input", nargs="?")
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("probs", parents=[common], help="Born probabilities of one observable")
    p.add_argument("input")
    p.add_argument("--obs", default="z", help="'z', 'x' or an observable file")
    p.set_defaults(func=cmd_probs)

    for name, func, helptext in [
        ("joint", cmd_joint, "joint distribution of two local observables"),
        ("sample", cmd_sample, "sample the joint distribution and compare with Born probabilities"),
    ]:
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("input")
        p.add_argument("--obs-a", default="z")
        p.add_argument("--obs-b", default="z")
        if name == "sample":
            p.add_argument("-n", type=int, default=100_000)
        p.set_defaults(func=func)

    p = sub.add_parser("continuum-demo", parents=[common], help="two-mode Gaussian marginal on a grid")
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--S", type=float, default=2.0)
    p.add_argument("--lo", type=float, default=-8.0)
    p.add_argument("--hi", type=float, default=8.0)
    p.add_argument("--n", type=int, default=128)
    p.set_defaults(func=cmd_continuum_demo)

    p = sub.add_parser("walkthrough", parents=[common], help="evaluate each step of the derivation")
    p.add_argument("input")
    p.add_argument("--basis-a", default="computational")
    p.add_argument("--basis-b", default="computational")
    p.set_defaults(func=cmd_walkthrough)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    for name, default in [("tol", DEFAULT_TOL), ("seed", 0), ("out", None), ("quiet", False)]:
        if not hasattr(args, name):
            setattr(args, name, default)
    start = time.perf_counter()
    try:
        report, code = args.func(args)
    except (UsageError, PartraceError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report.wall_time = time.perf_counter() - start
    if args.out and args.command != "reduce":
        write_text(args.out, report.to_json())
    state_on_stdout = args.command == "reduce" and not args.out
    if not (args.quiet or state_on_stdout):
        sys.stdout.write(report.body())
        sys.stdout.write(f"wall_time: {report.wall_time:.3f}s\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
