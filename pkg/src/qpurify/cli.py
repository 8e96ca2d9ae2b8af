"""Command-line interface.

Subcommands:

  sweep    rate/acceptance table over (gadget, p, d, M) as CSV, with a dense
           simulation twin row wherever the joint dimension fits the cap
  verify   run the built-in cross-validation checks (FAST or FULL)
  costs    ancilla / cSWAP / output bookkeeping table
  zeno     repeated-stabilisation trajectory as CSV
  gadget   one (kind, p, d, M) point as JSON

All CSV output is deterministic byte-for-byte for a fixed command line:
floats are printed with 17 significant digits, rows are sorted on
(gadget, p, d, M) with the infinite-d rows last within each block, and
lines end with a bare newline.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import analytic, permgroup, verify
from .analytic import INFINITE, DepolarisedSpec
from .densmat import DensityMatrix, dense_cap, tensor_power
from .gadgets import GadgetOutcome, apply_group_gadget, run_named_gadget
from .noise import depolarise, random_drift_ensemble
from .zeno import ZenoRun, run_zeno

SWEEP_HEADER = "gadget,p,d,M,ptilde,ratio,accept_prob,source"
COSTS_HEADER = "gadget,M,ancilla_qubits,cswap_count,output_count,extra_gate_count,group_label"
ZENO_HEADER = "step,fidelity,cumulative_accept"

_DEFAULT_P = (1e-1, 1e-2, 1e-3, 1e-4)
_DEFAULT_D = (32.0, math.inf)
_DEFAULT_M = tuple(2**k for k in range(14))
_PANEL_D = (2.0, 8.0, 32.0, 128.0, 512.0, math.inf)

_CONFIG_KEYS = ("gadgets", "p", "d", "m", "out", "jobs")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_d(d: float) -> str:
    return "inf" if math.isinf(d) else str(int(d))


def _parse_d_token(tok: str) -> float:
    tok = tok.strip()
    if tok.lower() == "inf":
        return math.inf
    value = int(tok)
    if value < 2:
        raise ValueError(f"finite d must be >= 2, got {value}")
    return float(value)


def _parse_list(text: str, parse_one, what: str) -> list:
    if text.strip() == "":
        return []
    out = []
    for tok in text.split(","):
        try:
            out.append(parse_one(tok.strip()))
        except ValueError as exc:
            raise SystemExit(f"error: bad {what} value {tok.strip()!r}: {exc}")
    return out


def _parse_p(tok: str) -> float:
    value = float(tok)
    if not 0.0 < value < 1.0:
        raise ValueError("p must lie in (0, 1)")
    return value


def _parse_m(tok: str) -> int:
    value = int(tok)
    if value < 1:
        raise ValueError("M must be >= 1")
    return value


def _read_config(path: str) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SystemExit(f"error: {path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise SystemExit(
                    f"error: {path}:{lineno}: unknown config key {key!r} "
                    f"(known keys: {', '.join(_CONFIG_KEYS)})"
                )
            values[key] = value.strip()
    return values


def _feasible(gadget: str, m: int) -> bool:
    if gadget == "SWAP":
        return m == 2
    if gadget in ("GSG", "RSG"):
        return m & (m - 1) == 0
    return True


def _basis_state(d: int) -> DensityMatrix:
    mat = np.zeros((d, d), dtype=complex)
    mat[0, 0] = 1.0
    return DensityMatrix(mat)


def _dense_rsg(rho: DensityMatrix, depth: int) -> GadgetOutcome:
    # cascade of actual two-register sandwiches, not the pairwise closed form
    current = rho
    accept = 1.0
    for level in range(1, depth + 1):
        step = apply_group_gadget(
            tensor_power(current, 2), permgroup.build_group(permgroup.CYCLIC, 2)
        )
        if step.vanishing:
            return step
        accept *= step.accept_prob ** (2 ** (depth - level))
        current = step.purified
    return GadgetOutcome(purified=current, accept_prob=accept)


def _dense_point(gadget: str, p: float, d: int, m: int) -> tuple:
    """Simulated (ptilde, accept) for one grid point, or None above the cap.

    Every row labelled DENSE really is a register-level average: SWAP runs
    as the two-element cyclic sandwich, ESD as the two-element derangement
    average (undefined at m=1), RSG as a cascade of pairwise sandwiches.
    """
    if d**m > dense_cap():
        return None
    rho0 = _basis_state(d)
    rho = depolarise(rho0, p, d)
    if gadget == "ESD":
        if m == 1:
            return None
        outcome = apply_group_gadget(
            tensor_power(rho, m), permgroup.build_group(permgroup.DERANGEMENT_PAIR, m)
        )
    elif gadget == "SWAP":
        outcome = apply_group_gadget(
            tensor_power(rho, 2), permgroup.build_group(permgroup.CYCLIC, 2)
        )
    elif gadget == "RSG":
        outcome = _dense_rsg(rho, m.bit_length() - 1)
    else:
        outcome = run_named_gadget(gadget, rho, m)
    if outcome.vanishing:
        return None
    return analytic.extract_ptilde(outcome.purified, rho0), outcome.accept_prob


def _sweep_rows(task: tuple) -> list:
    gadget, p, d, m = task
    spec = DepolarisedSpec(p, INFINITE if math.isinf(d) else int(d))
    formula = analytic.depolarised_ptilde(gadget, spec, m)
    rows = [
        (gadget, p, d, m, formula["ptilde"], formula["ptilde"] / p, formula["accept_prob"], "ANALYTIC")
    ]
    if not math.isinf(d):
        dense = _dense_point(gadget, p, int(d), m)
        if dense is not None:
            rows.append((gadget, p, d, m, dense[0], dense[0] / p, dense[1], "DENSE"))
    return rows


def _write_lines(path, lines):
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_sweep(args) -> int:
    config = _read_config(args.config) if args.config else {}

    def resolve(flag_value, key, parse_one, what):
        if flag_value is not None:
            return _parse_list(flag_value, parse_one, what)
        if key in config:
            return _parse_list(config[key], parse_one, what)
        return None

    gadgets_list = resolve(args.gadgets, "gadgets", str, "gadget")
    p_list = resolve(args.p, "p", _parse_p, "p")
    d_list = resolve(args.d, "d", _parse_d_token, "d")
    m_list = resolve(args.m, "m", _parse_m, "M")
    out = args.out if args.out is not None else config.get("out")
    jobs = args.jobs if args.jobs is not None else int(config.get("jobs", 0)) or None
    if jobs is None:
        jobs = min(8, os.cpu_count() or 1)
    if jobs < 1:
        raise SystemExit(f"error: jobs must be >= 1, got {jobs}")

    if gadgets_list is None and p_list is None and d_list is None and m_list is None:
        # default grid: the rate-vs-M panels (several p at d = 32 and inf,
        # plus a d-scan at p = 1e-3); the infinite-d rows trace the full
        # valley, the finite-d dense twins stop at the cap
        tasks = {
            ("CGG", p, d, m) for p in _DEFAULT_P for d in _DEFAULT_D for m in _DEFAULT_M
        }
        tasks |= {("CGG", 1e-3, d, m) for d in _PANEL_D for m in _DEFAULT_M}
    else:
        gadgets_list = gadgets_list if gadgets_list is not None else ["CGG"]
        p_list = p_list if p_list is not None else list(_DEFAULT_P)
        d_list = d_list if d_list is not None else list(_DEFAULT_D)
        m_list = m_list if m_list is not None else list(_DEFAULT_M)
        for g in gadgets_list:
            if g == "SGG":
                raise SystemExit(
                    "error: SGG has no closed-form depolarised rate, so a sweep "
                    "cannot pair it with a formula row; use the gadget subcommand "
                    "for dense SGG points"
                )
            if g not in ("SWAP", "CGG", "GSG", "ESD", "RSG"):
                raise SystemExit(f"error: unknown gadget {g!r}")
        tasks = {
            (g, p, d, m)
            for g in gadgets_list
            for p in p_list
            for d in d_list
            for m in m_list
            if _feasible(g, m)
        }

    ordered = sorted(tasks, key=lambda t: (t[0], t[1], t[2], t[3]))
    lines = [SWEEP_HEADER]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for rows in pool.map(_sweep_rows, ordered):
            for gadget, p, d, m, ptilde, ratio, accept, source in rows:
                lines.append(
                    f"{gadget},{_fmt(p)},{_fmt_d(d)},{m},"
                    f"{_fmt(ptilde)},{_fmt(ratio)},{_fmt(accept)},{source}"
                )
    _write_lines(out, lines)
    return 0


def cmd_verify(args) -> int:
    lines, ok = verify.run_verify(args.level)
    for line in lines:
        print(line)
    return 0 if ok else 1


def cmd_costs(args) -> int:
    m_list = _parse_list(args.m, _parse_m, "M") if args.m is not None else [2, 4, 8, 16, 32, 64]
    reports = []
    for m in sorted(set(m_list)):
        for gadget in permgroup.GADGET_COSTED:
            try:
                reports.append(permgroup.cost_model(gadget, m))
            except ValueError:
                continue  # non-power-of-two m for GSG/RSG rows
    widths = (14, 6, 15, 12, 8, 12)
    print(
        f"{'gadget':<{widths[0]}}{'M':>{widths[1]}}{'ancilla_qubits':>{widths[2]}}"
        f"{'cswap_count':>{widths[3]}}{'outputs':>{widths[4]}}{'extra_gates':>{widths[5]}}  group"
    )
    for r in reports:
        print(
            f"{r.gadget:<{widths[0]}}{r.copies:>{widths[1]}}{r.ancilla_qubits:>{widths[2]}}"
            f"{r.cswap_count:>{widths[3]}}{r.output_count:>{widths[4]}}"
            f"{r.extra_gate_count:>{widths[5]}}  {r.group_label}"
        )
    if args.out:
        lines = [COSTS_HEADER]
        lines += [
            f"{r.gadget},{r.copies},{r.ancilla_qubits},{r.cswap_count},"
            f"{r.output_count},{r.extra_gate_count},{r.group_label}"
            for r in reports
        ]
        _write_lines(args.out, lines)
    return 0


def cmd_zeno(args) -> int:
    if (args.eta is None) == (args.drift_epsilon is None):
        raise SystemExit("error: specify exactly one of --eta or --drift-epsilon")
    rho0 = DensityMatrix(np.full((2, 2), 0.5, dtype=complex))  # |+> on a qubit
    if args.eta is not None:
        run = ZenoRun(steps=args.steps, copies=args.copies, gadget=args.gadget, dephasing_eta=args.eta)
    else:
        drift = random_drift_ensemble(
            args.copies, 2, args.drift_epsilon, args.drift_delta_t, seed=args.seed
        )
        run = ZenoRun(steps=args.steps, copies=args.copies, gadget=args.gadget, drift=drift)
    result = run_zeno(run, rho0)
    if result.flagged:
        print(
            "warning: per-step error estimate exceeds 0.1; the frequent-projection "
            "regime assumption is dubious here",
            file=sys.stderr,
        )
    lines = [ZENO_HEADER]
    lines += [
        f"{row['step']},{_fmt(row['fidelity'])},{_fmt(row['cumulative_accept'])}"
        for row in result.trajectory
    ]
    _write_lines(args.out, lines)
    return 0


def cmd_gadget(args) -> int:
    d = _parse_d_token(args.d)
    if not 0.0 < args.p < 1.0:
        raise SystemExit(f"error: p must lie in (0, 1), got {args.p}")
    if args.m < 1:
        raise SystemExit(f"error: M must be >= 1, got {args.m}")
    known = ("SWAP", "SGG", "CGG", "GSG", "ESD", "RSG")
    if args.kind not in known:
        raise SystemExit(f"error: unknown gadget {args.kind!r}; expected one of {known}")
    if not _feasible(args.kind, args.m):
        raise SystemExit(f"error: {args.kind} cannot run on M={args.m}")

    payload = {"kind": args.kind, "p": args.p, "d": "inf" if math.isinf(d) else int(d), "m": args.m}
    if args.kind == "SGG":
        payload["analytic"] = None
    else:
        spec = DepolarisedSpec(args.p, INFINITE if math.isinf(d) else int(d))
        formula = analytic.depolarised_ptilde(args.kind, spec, args.m)
        payload["analytic"] = {
            "ptilde": formula["ptilde"],
            "ratio": formula["ptilde"] / args.p,
            "accept_prob": formula["accept_prob"],
        }
    payload["dense"] = None
    if not math.isinf(d):
        dense = _dense_point(args.kind, args.p, int(d), args.m)
        if dense is not None:
            payload["dense"] = {
                "ptilde": dense[0],
                "ratio": dense[0] / args.p,
                "accept_prob": dense[1],
            }
    if payload["analytic"] is not None and payload["dense"] is not None:
        payload["max_abs_gap"] = max(
            abs(payload["analytic"][k] - payload["dense"][k])
            for k in ("ptilde", "accept_prob")
        )
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpurify", description="Permutation-gadget purification toolkit."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="rate table over (gadget, p, d, M) as CSV")
    sweep.add_argument("--gadgets", help="comma list of SWAP,CGG,GSG,ESD,RSG (default CGG)")
    sweep.add_argument("--p", help="comma list of input rates in (0,1)")
    sweep.add_argument("--d", help="comma list of local dimensions; 'inf' allowed")
    sweep.add_argument("--m", help="comma list of copy counts; empty string for a header-only CSV")
    sweep.add_argument("--config", help="flat key=value file (keys: gadgets,p,d,m,out,jobs)")
    sweep.add_argument("--out", help="output CSV path (default stdout)")
    sweep.add_argument("--jobs", type=int, help="worker threads (default min(8, cpus))")
    sweep.set_defaults(func=cmd_sweep)

    ver = sub.add_parser("verify", help="run built-in cross-validation checks")
    ver.add_argument("--level", choices=(verify.FAST, verify.FULL), default=verify.FAST)
    ver.set_defaults(func=cmd_verify)

    costs = sub.add_parser("costs", help="gadget resource bookkeeping table")
    costs.add_argument("--m", help="comma list of copy counts (default 2,4,8,16,32,64)")
    costs.add_argument("--out", help="also write the table as CSV to this path")
    costs.set_defaults(func=cmd_costs)

    zen = sub.add_parser("zeno", help="repeated-stabilisation trajectory as CSV")
    zen.add_argument("--steps", type=int, required=True)
    zen.add_argument("--copies", type=int, required=True)
    zen.add_argument("--gadget", default="CGG", choices=("CGG", "GSG", "SGG"))
    zen.add_argument("--eta", type=float, help="per-step dephasing weight in [0, 1/2]")
    zen.add_argument("--drift-epsilon", type=float, help="coherent drift generator norm")
    zen.add_argument("--drift-delta-t", type=float, default=1.0)
    zen.add_argument("--seed", type=int, default=0, help="drift ensemble seed")
    zen.add_argument("--out", help="output CSV path (default stdout)")
    zen.set_defaults(func=cmd_zeno)

    gad = sub.add_parser("gadget", help="one (kind, p, d, M) point as JSON")
    gad.add_argument("--kind", required=True)
    gad.add_argument("--p", type=float, required=True)
    gad.add_argument("--d", required=True, help="local dimension; 'inf' allowed")
    gad.add_argument("--m", type=int, required=True)
    gad.set_defaults(func=cmd_gadget)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
