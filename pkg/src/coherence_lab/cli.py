"""``coherence-lab`` command line.

Exit codes: 0 success, 2 parse or validation failure, 3 dimension mismatch,
4 formula and simulation (or closed form and optimizer) disagree by more
than 1e-8, 5 a verification suite failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import serialization
from .channels import preparation_channel
from .errors import DimensionMismatch, ValidationError
from .gluings import LSPGluing, generalized_interference, interference_lsp, interference_sp
from .interferometer import (
    InterferencePattern,
    build_lsp_dilation,
    build_sp_dilation,
    distinguish_demo,
    phase_scan,
)
from .measures import (
    MEASURES,
    maximize_generalized_numeric,
    maximize_lsp_numeric,
    maximize_sp_numeric,
    measure,
)
from .numerics import clamp_spectrum, hermitian_eig
from .states import PureState, basis_state
from .verify import run_checks

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_ORACLE = 4
EXIT_SUITE = 5
ORACLE_TOL = 1e-8
SEED_ENV = "COHERENCE_LAB_SEED"


class UsageError(Exception):
    pass


def _num(x: float) -> str:
    # fixed-point and locale independent; no "-0.000000000000"
    s = f"{x:.12f}"
    return s[1:] if s.startswith("-") and float(s) == 0 else s


def _sci(x: float) -> str:
    return f"{x:.6e}"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _emit(args, text_lines: list[str], doc: dict) -> None:
    if args.format == "json":
        print(json.dumps(doc, indent=1, sort_keys=True))
    else:
        print("\n".join(text_lines))


def _cpair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


# -- measure ----------------------------------------------------------------

def _certificate(rho_a, rho_b, which: str, seed: int):
    """Numeric optimum over a feasible gluing family, from preparation channels of |0>."""
    psi = basis_state(rho_a.dim, 0)
    chan_a = preparation_channel(psi, rho_a)
    chan_b = preparation_channel(psi, rho_b)
    if which == "lsp":
        return maximize_lsp_numeric(chan_a, chan_b, psi, seed=seed)
    if which == "sp":
        return maximize_sp_numeric(chan_a, chan_b, psi, seed=seed)
    return maximize_generalized_numeric(chan_a, chan_b, psi, mode=which[1:], seed=seed)


def cmd_measure(args) -> int:
    rho_a = serialization.read(args.state_a, "state")
    rho_b = serialization.read(args.state_b, "state")
    if rho_a.dim != rho_b.dim:
        raise DimensionMismatch(f"state-a has dimension {rho_a.dim}, state-b {rho_b.dim}")
    value = measure(rho_a, rho_b, args.measure)
    report = _certificate(rho_a, rho_b, args.measure, args.seed)
    diff = abs(value - report.value)
    lines = [
        f"measure: {args.measure}",
        f"value: {_num(value)}",
        f"optimizer value: {_num(report.value)}",
        f"closed form vs optimizer: {_sci(diff)}",
        f"margin over random search: {_sci(report.certificate_gap)}",
    ]
    doc = {
        "measure": args.measure,
        "value": value,
        "optimizer_value": report.value,
        "difference": diff,
        "certificate_gap": report.certificate_gap,
    }
    _emit(args, lines, doc)
    return EXIT_ORACLE if diff > ORACLE_TOL else EXIT_OK


# -- interfere --------------------------------------------------------------

def cmd_interfere(args) -> int:
    gluing = serialization.read(args.gluing, ("gluing_lsp", "gluing_sp"))
    rho = serialization.read(args.input, "state")
    shift = serialization.read(args.shift, "unitary") if args.shift else None
    if rho.dim != gluing.dim:
        raise DimensionMismatch(f"input has dimension {rho.dim}, gluing {gluing.dim}")
    if shift is not None and shift.shape[0] != gluing.dim:
        raise DimensionMismatch(f"shift has dimension {shift.shape[0]}, gluing {gluing.dim}")
    if args.scan is not None and args.scan < 0:
        raise UsageError("--scan must be non-negative")

    if shift is not None:
        f_formula = generalized_interference(gluing, rho.matrix, shift)
    elif isinstance(gluing, LSPGluing):
        f_formula = interference_lsp(gluing, rho.matrix)
    else:
        f_formula = interference_sp(gluing, rho.matrix)

    # p_A is linear in the input, so a mixed input is the spectral mixture of pure runs
    dilation = build_lsp_dilation(gluing) if isinstance(gluing, LSPGluing) else build_sp_dilation(gluing)
    spec = hermitian_eig(rho.matrix)
    weights = clamp_spectrum(spec.values)
    f_sim = 0j
    samples = None
    for k in np.flatnonzero(weights):
        weight, psi = weights[k], PureState(spec.vectors[:, k])
        scan = phase_scan(dilation, psi, shift, args.scan or 0)
        f_sim += weight * scan.pattern.amplitude
        probs = np.array([p for _, p in scan.samples])
        samples = weight * probs if samples is None else samples + weight * probs
    phases = [phi for phi, _ in scan.samples]

    formula = InterferencePattern.from_amplitude(f_formula)
    simulated = InterferencePattern.from_amplitude(f_sim)
    diff = abs(f_formula - f_sim)
    lines = [
        f"formula:    v = {_num(formula.visibility)}  gamma = {_num(formula.phase)}",
        f"simulation: v = {_num(simulated.visibility)}  gamma = {_num(simulated.phase)}",
        f"|F_formula - F_simulation| = {_sci(diff)}",
    ]
    if args.scan:
        lines.append("phi            p_A")
        lines += [f"{_num(phi)} {_num(p)}" for phi, p in zip(phases[3:], samples[3:])]
    doc = {
        "formula": {"visibility": formula.visibility, "phase": formula.phase, "amplitude": _cpair(f_formula)},
        "simulation": {"visibility": simulated.visibility, "phase": simulated.phase, "amplitude": _cpair(f_sim)},
        "difference": diff,
        "samples": [[float(phi), float(p)] for phi, p in zip(phases, samples)],
    }
    _emit(args, lines, doc)
    return EXIT_ORACLE if diff > ORACLE_TOL else EXIT_OK


# -- verify -----------------------------------------------------------------

def cmd_verify(args) -> int:
    if not 2 <= args.dim <= 4:
        raise UsageError(f"--dim must be in 2..4, got {args.dim}")
    if args.trials < 0:
        raise UsageError("--trials must be non-negative")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    results = run_checks(args.dim, args.trials, args.seed, workers=args.workers)

    suites: dict[str, list] = {}
    for r in results:
        suites.setdefault(r.suite, []).append(r)
    failing = [s for s, rs in suites.items() if not all(r.passed for r in rs)]

    def dev(r):
        return "vacuous" if r.deviation is None else _sci(r.deviation)

    width = max(len(r.name) for r in results)
    lines = [f"verify dim={args.dim} trials={args.trials} seed={args.seed}"]
    for suite, rs in suites.items():
        devs = [r.deviation for r in rs if r.deviation is not None]
        worst = _sci(max(devs)) if devs else "vacuous"
        lines.append(f"[{suite}] {'PASS' if suite not in failing else 'FAIL'}  max deviation {worst}")
        for r in rs:
            mark = "ok  " if r.passed else "FAIL"
            lines.append(f"  {mark} {r.name:<{width}}  max deviation {dev(r):>13}  tolerance {_sci(r.tolerance)}")
    if failing:
        lines.append(f"first failing suite: {failing[0]}")
    else:
        lines.append("all suites pass")
    doc = {
        "dim": args.dim,
        "trials": args.trials,
        "seed": args.seed,
        "checks": [
            {"suite": r.suite, "name": r.name, "tolerance": r.tolerance,
             "max_deviation": r.deviation, "passed": r.passed}
            for r in results
        ],
        "first_failing_suite": failing[0] if failing else None,
    }
    _emit(args, lines, doc)
    if failing:
        print(f"error: suite {failing[0]!r} failed", file=sys.stderr)
        return EXIT_SUITE
    return EXIT_OK


# -- distinguish-demo -------------------------------------------------------

def cmd_distinguish_demo(args) -> int:
    r = distinguish_demo()
    verdict = (
        "the interferometer distinguishes two implementations that tomography cannot"
        if r.distinguishes else "no distinction found"
    )
    lines = [
        f"Choi distance of marginal channels: {_sci(r.choi_distance)}",
        f"max visibility, measurement circuit: {_num(r.visibility_measurement)}",
        f"max visibility, phase-kick circuit:  {_num(r.visibility_phase_kick)}",
        f"verdict: {verdict}",
    ]
    doc = {
        "choi_distance": r.choi_distance,
        "visibility_measurement": r.visibility_measurement,
        "visibility_phase_kick": r.visibility_phase_kick,
        "distinguishes": r.distinguishes,
    }
    _emit(args, lines, doc)
    return EXIT_OK


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coherence-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False):
        p.add_argument("--format", choices=("text", "json"), default="text")
        if seed:
            p.add_argument("--seed", type=int, default=None,
                           help=f"random seed (default: ${SEED_ENV} or 0)")

    p = sub.add_parser("measure", help="closed-form measure between two states, with an optimizer certificate")
    p.add_argument("--state-a", required=True)
    p.add_argument("--state-b", required=True)
    p.add_argument("--measure", choices=MEASURES, default="sp")
    common(p, seed=True)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("interfere", help="interference function by formula and by dilation simulation")
    p.add_argument("--gluing", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--shift", default=None, help="unitary applied after channel B")
    p.add_argument("--scan", type=int, default=None, help="extra phase points to print")
    common(p)
    p.set_defaults(func=cmd_interfere)

    p = sub.add_parser("verify", help="run the seeded invariant suites")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    common(p, seed=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("distinguish-demo", help="two dilations of transverse relaxation")
    common(p)
    p.set_defaults(func=cmd_distinguish_demo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        return args.func(args)
    except DimensionMismatch as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except (ValidationError, UsageError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
