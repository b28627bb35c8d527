"""Command-line surface: reproducible reports with a replayable manifest.

Subcommands: rw-table, verify, search, validate, simulate, replay.  Every run
writes its payload files plus a ``manifest.json`` recording the command, the
resolved parameters and a sha256 digest per payload.  ``replay`` re-executes
a manifest and confirms the payloads reproduce byte for byte (the manifest
timestamp is excluded from digests).  Exit codes are the machine contract;
human-readable text goes to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from .bcc_rw import build_table, table_to_csv, table_to_json
from .bootstrap import (
    BootstrapConstants,
    Mode,
    SearchSpec,
    Verdict,
    search,
    verify,
)
from .inequality_checks import (
    check_cosine_telescope,
    check_d2k,
    check_d2k_range,
    check_double_derivative_identity,
    check_green_lower,
    check_mu_bound,
    run_all,
)
from .op_sim import SimConfig, exact_dp_1d, exact_two_step, simulate
from .policy import Policy

_EXIT_BY_VERDICT = {Verdict.PASS: 0, Verdict.FAIL: 1, Verdict.DIVERGENT: 2}


def _say(message: str) -> None:
    print(message, file=sys.stderr)


# -- commands: each returns (exit_code, {filename: text payload}) ---------------


def cmd_rw_table(params: dict) -> tuple[int, dict[str, str]]:
    tables = [
        build_table(d, params["nu_max"], params["truncation"], Policy(params["policy"]))
        for d in range(params["d_min"], params["d_max"] + 1)
    ]
    return 0, {
        "rw_table.csv": table_to_csv(tables),
        "rw_table.json": table_to_json(tables),
    }


def cmd_verify(params: dict) -> tuple[int, dict[str, str]]:
    report = verify(
        d=params["d"],
        constants=BootstrapConstants(params["k1"], params["k2"], params["k3"]),
        mode=Mode(params["mode"]),
        policy=Policy(params["policy"]),
        truncation=params["truncation"],
    )
    payload = json.dumps(report.to_json_dict(), indent=2) + "\n"
    return _EXIT_BY_VERDICT[report.verdict], {"verify_report.json": payload}


def cmd_search(params: dict) -> tuple[int, dict[str, str]]:
    spec = SearchSpec(
        d_min=params["d_min"],
        d_max=params["d_max"],
        k1=(params["k1_lo"], params["k1_hi"], params["k1_n"]),
        k2=(params["k2_lo"], params["k2_hi"], params["k2_n"]),
        k3=(params["k3_lo"], params["k3_hi"], params["k3_n"]),
    )
    result = search(spec, Policy(params["policy"]), params["truncation"], keep_points=True)
    _say(f"search finished in {result.elapsed_seconds:.2f}s")
    # Timing stays out of the payload so replay digests are byte-stable.
    summary = {
        "policy": result.policy.value,
        "grid": params,
        "minimal_passing_d": result.minimal_passing_d,
        "per_d": [
            {
                "d": oc.d,
                "divergent": oc.divergent,
                "scanned": oc.scanned,
                "passing_found": oc.passing_found,
                "first_pass": None if oc.first_pass is None else {
                    "K1": oc.first_pass.K1, "K2": oc.first_pass.K2,
                    "K3": oc.first_pass.K3, "g1": oc.first_pass.g1,
                    "g2": oc.first_pass.g2, "g3": oc.first_pass.g3,
                },
                "best": None if oc.best is None else {
                    "K1": oc.best.K1, "K2": oc.best.K2, "K3": oc.best.K3,
                    "g1": oc.best.g1, "g2": oc.best.g2, "g3": oc.best.g3,
                    "max_ratio": oc.best.ratio(),
                },
            }
            for oc in result.per_d
        ],
    }
    def num(value) -> str:
        value = float(value)
        return '"inf"' if value == float("inf") else repr(value)

    lines = []
    for d, k1, k2, k3, g1, g2, g3 in result.points:
        ok = (g1 < k1) & (g2 < k2) & (g3 < k3)
        for i in range(len(k1)):
            verdict = "pass" if ok[i] else "fail"
            lines.append(
                f'{{"d": {d}, "K1": {num(k1[i])}, "K2": {num(k2[i])}, '
                f'"K3": {num(k3[i])}, "g1": {num(g1[i])}, '
                f'"g2": {num(g2[i])}, "g3": {num(g3[i])}, '
                f'"verdict": "{verdict}"}}'
            )
    return 0, {
        "search_summary.json": json.dumps(summary, indent=2) + "\n",
        "search_points.jsonl": "\n".join(lines) + ("\n" if lines else ""),
    }


_CHECK_RUNNERS = {
    "green": lambda a: check_green_lower(a["points"], a["tolerance"]),
    "mu": lambda a: check_mu_bound(a["points"], a["tolerance"]),
    "d2k": lambda a: (
        check_d2k(a["dim"], a["points"], a["samples"], a["seed"], a["tolerance"])
        if a["dim"] is not None
        else check_d2k_range(tuple(range(1, 10)), a["points"], a["samples"],
                             a["seed"], a["tolerance"])
    ),
    "cosine": lambda a: check_cosine_telescope(a["trials"], 8, a["seed"], a["tolerance"]),
    "dderiv": lambda a: check_double_derivative_identity(
        a["dd_trials"], a["seed"], a["tolerance"]
    ),
}


def cmd_validate(params: dict) -> tuple[int, dict[str, str]]:
    selector = params["checks"]
    if selector == "all":
        results = run_all(
            points_per_axis=params["points"],
            d2k_samples=params["samples"],
            telescope_trials=params["trials"],
            dd_trials=params["dd_trials"],
            seed=params["seed"],
            tolerance=params["tolerance"],
        )
    else:
        results = [_CHECK_RUNNERS[selector](params)]
    lines = [json.dumps(r.to_json_dict()) for r in results]
    for r in results:
        status = "pass" if r.passed else "FAIL"
        _say(
            f"{status}  {r.name}: min margin {r.min_margin:.3e} over "
            f"{r.points_checked} points, worst at {r.worst_point}"
        )
    code = 0 if all(r.passed for r in results) else 1
    return code, {"checks.jsonl": "\n".join(lines) + "\n"}


def cmd_simulate(params: dict) -> tuple[int, dict[str, str]]:
    d = params["d"]
    p = params["p"] if params["p"] is not None else params["bond_prob"] * 2.0 ** d
    config = SimConfig(
        d=d,
        p=p,
        t_max=params["t_max"],
        trials=params["trials"],
        seed=params["seed"],
        site_budget=params["site_budget"],
    )
    stats = simulate(config)
    files = {
        "sim_stats.json": json.dumps(stats.to_json_dict(), indent=2) + "\n",
        "two_point.csv": stats.two_point_csv(),
    }
    code = 0
    if params["oracle_check"]:
        rows = []
        worst = 0.0
        for key, (est, _err) in sorted(stats.two_point.items()):
            x, t = key[:-1], key[-1]
            if t != 2:
                continue
            exact = exact_two_step(d, p, x)
            sigma = max(
                (exact * (1.0 - exact) / config.trials) ** 0.5, 1e-12
            )
            z = abs(est - exact) / sigma
            worst = max(worst, z)
            rows.append({"x": list(x), "t": t, "estimate": est, "exact": exact, "z": z})
        dp_rows = []
        if d == 1:
            dp = exact_dp_1d(p, min(config.t_max, 8))
            for (x, t), exact in sorted(dp.items()):
                est, _err = stats.estimate((x,), t)
                sigma = max((exact * (1.0 - exact) / config.trials) ** 0.5, 1e-12)
                z = abs(est - exact) / sigma
                worst = max(worst, z)
                dp_rows.append({"x": [x], "t": t, "estimate": est, "exact": exact, "z": z})
        files["oracle_check.json"] = json.dumps(
            {"two_step": rows, "dp_1d": dp_rows, "worst_z": worst}, indent=2
        ) + "\n"
        if worst > 4.0:
            code = 1
        _say(f"oracle check worst |z| = {worst:.2f} (threshold 4)")
    return code, files


_COMMANDS = {
    "rw-table": cmd_rw_table,
    "verify": cmd_verify,
    "search": cmd_search,
    "validate": cmd_validate,
    "simulate": cmd_simulate,
}


# -- manifest plumbing -----------------------------------------------------------


def _digest(payload: str) -> str:
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _write_outputs(command: str, params: dict, outdir: Path,
                   files: dict[str, str], emit_json: bool) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    digests = {}
    for name, payload in files.items():
        (outdir / name).write_text(payload)
        digests[name] = _digest(payload)
    manifest = {
        "command": command,
        "params": params,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "outputs": digests,
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    if emit_json:
        for name in files:
            if name.endswith(".json"):
                sys.stdout.write(files[name])
                break
    _say(f"wrote {', '.join(sorted(files))} and manifest.json to {outdir}")


def cmd_replay(manifest_path: Path, outdir: Path | None, emit_json: bool) -> int:
    manifest = json.loads(manifest_path.read_text())
    command, params = manifest["command"], manifest["params"]
    if command not in _COMMANDS:
        _say(f"unknown command in manifest: {command}")
        return 2
    code, files = _COMMANDS[command](params)
    mismatches = []
    for name, digest in manifest["outputs"].items():
        fresh = _digest(files.get(name, ""))
        if fresh != digest:
            mismatches.append(name)
    if outdir is not None:
        _write_outputs(command, params, outdir, files, emit_json)
    if mismatches:
        _say(f"replay MISMATCH for {command}: {', '.join(mismatches)}")
        return 1
    _say(f"replay of {command} reproduced {len(files)} payload(s) byte-identically")
    return 0


# -- argument parsing --------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--policy", choices=["fast", "certified"], default="fast")
    common.add_argument("--out", type=Path, default=Path("bccop_out"),
                        help="output directory (default: ./bccop_out)")
    common.add_argument("--json", action="store_true",
                        help="also print the primary JSON report to stdout")

    parser = argparse.ArgumentParser(
        prog="bccop",
        description="Bound-chain verification for oriented percolation on the BCC lattice",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rw-table", parents=[common],
                       help="random-walk series table over a dimension range")
    p.add_argument("--d-min", type=int, default=3)
    p.add_argument("--d-max", type=int, default=10)
    p.add_argument("--nu-max", type=int, default=2)
    p.add_argument("--truncation", type=int, default=500)

    p = sub.add_parser("verify", parents=[common],
                       help="bootstrap verdict at one (d, K) point")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k1", type=float, required=True)
    p.add_argument("--k2", type=float, required=True)
    p.add_argument("--k3", type=float, required=True)
    p.add_argument("--mode", choices=["chained", "replay"], default="chained")
    p.add_argument("--truncation", type=int, default=500)

    p = sub.add_parser("search", parents=[common],
                       help="grid search over (d, K1, K2, K3)")
    p.add_argument("--spec-file", type=Path, required=True,
                   help="flat key-value file: d_min, d_max, k1_lo, k1_hi, k1_n, ...")
    p.add_argument("--truncation", type=int, default=500)

    p = sub.add_parser("validate", parents=[common],
                       help="certify the auxiliary inequalities")
    p.add_argument("--checks", default="all",
                   choices=["all", "green", "mu", "d2k", "cosine", "dderiv"])
    p.add_argument("--dim", type=int, default=None, help="single dimension for d2k")
    p.add_argument("--points", type=int, default=101, help="grid points per axis")
    p.add_argument("--samples", type=int, default=1 << 17,
                   help="quasi-random samples for high-dimension d2k")
    p.add_argument("--trials", type=int, default=1_000_000,
                   help="random trials for the cosine telescope")
    p.add_argument("--dd-trials", type=int, default=10_000,
                   help="random sequences for the double-derivative bound")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-12)

    p = sub.add_parser("simulate", parents=[common],
                       help="Monte Carlo cluster growth")
    p.add_argument("--d", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--p", type=float, default=None,
                       help="percolation parameter (bond probability = p * 2^-d)")
    group.add_argument("--bond-prob", type=float, default=None,
                       help="per-bond probability directly")
    p.add_argument("--t-max", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--site-budget", type=int, default=1_000_000)
    p.add_argument("--oracle-check", action="store_true",
                   help="compare against the exact oracles; exit 1 beyond 4 sigma")

    p = sub.add_parser("replay", parents=[common],
                       help="re-run a manifest and verify byte-identical payloads")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--write", action="store_true",
                   help="also write the regenerated payloads to --out")
    return parser


_PARAM_KEYS = {
    "rw-table": ("d_min", "d_max", "nu_max", "truncation", "policy"),
    "verify": ("d", "k1", "k2", "k3", "mode", "truncation", "policy"),
    "search": ("truncation", "policy"),  # grid axes come from the spec file
    "validate": ("checks", "dim", "points", "samples", "trials", "dd_trials",
                 "seed", "tolerance", "policy"),
    "simulate": ("d", "p", "bond_prob", "t_max", "trials", "seed",
                 "site_budget", "oracle_check", "policy"),
}


def parse_search_spec_file(path: Path) -> dict:
    """Flat key-value search spec: `k = v` / `k: v` lines or a JSON object."""
    text = path.read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        raw = json.loads(text)
    else:
        raw = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            for sep in ("=", ":"):
                if sep in line:
                    key, value = line.split(sep, 1)
                    raw[key.strip()] = value.strip()
                    break
            else:
                raise ValueError(f"unparseable spec line: {line!r}")
    out = {}
    for key in ("d_min", "d_max", "k1_n", "k2_n", "k3_n"):
        out[key] = int(raw[key])
    for key in ("k1_lo", "k1_hi", "k2_lo", "k2_hi", "k3_lo", "k3_hi"):
        out[key] = float(raw[key])
    return out


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "replay":
        outdir = args.out if args.write else None
        return cmd_replay(args.manifest, outdir, args.json)
    params = {key: getattr(args, key) for key in _PARAM_KEYS[args.command]}
    if args.command == "search":
        params.update(parse_search_spec_file(args.spec_file))
    code, files = _COMMANDS[args.command](params)
    _write_outputs(args.command, params, args.out, files, args.json)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
