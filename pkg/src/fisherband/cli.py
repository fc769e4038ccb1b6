"""Command-line front end.

Subcommands:
  figure    write the delay-sweep dataset of a named case or a config file
  accept    run the acceptance suite and emit a JSON verdict
  inspect   dump the metric, connection symbols or geodesic of a model file
  distance  batch-compute distance reports for a CSV of endpoint pairs

A model file is JSON of the form::

    {
      "grid":  {"nu0": 0.25, "bandwidth_B": 0.5, "n_freqs": 1000},
      "noise": {"gamma0": 2.0},          # scalar or per-bin list
      "rho0":  1.0,                      # scalar or per-bin list
      "endpoints": [
        {"alpha": 1.0, "phase_coeffs": [0.0]},
        {"alpha": 1.0, "phase_coeffs": [0.0, -6.2832]}
      ]
    }

All configuration is explicit; no environment variables are consulted and
every output is deterministic given the arguments.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .acceptance import run_acceptance_suite
from .band import NoiseProfile, build_grid, wrap_phase
from .distances import report
from .figures import FIGURE_CASES, ExperimentConfig, run_figure_case, write_figure_csv
from .geodesics import solve_alpha_geodesic
from .metric import christoffel, fisher_matrix
from .models import KnownMagnitudeModel, eval_model


class ModelFileError(ValueError):
    """A model spec file is missing or malforms a required field."""


def _as_array(value, n: int, label: str) -> np.ndarray:
    if np.isscalar(value):
        return np.full(n, float(value))
    arr = np.asarray(value, dtype=float)
    if arr.shape != (n,):
        raise ModelFileError(f"field '{label}' must be a scalar or a list of length {n}")
    return arr


def load_model_file(path):
    """Parse a model spec file into (grid, noise, rho0, endpoint models)."""
    try:
        with open(path) as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise ModelFileError(f"cannot read model file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"model file is not valid JSON (line {exc.lineno}, column {exc.colno})") from exc

    def need(mapping, key, where):
        if not isinstance(mapping, dict) or key not in mapping:
            raise ModelFileError(f"missing field '{where}.{key}'" if where else f"missing field '{key}'")
        return mapping[key]

    grid_spec = need(payload, "grid", "")
    try:
        grid = build_grid(
            float(need(grid_spec, "nu0", "grid")),
            float(need(grid_spec, "bandwidth_B", "grid")),
            int(need(grid_spec, "n_freqs", "grid")),
        )
    except (TypeError, ValueError) as exc:
        raise ModelFileError(f"bad grid specification: {exc}") from exc
    noise = NoiseProfile(_as_array(need(need(payload, "noise", ""), "gamma0", "noise"), grid.n_freqs, "noise.gamma0"))
    rho0 = _as_array(need(payload, "rho0", ""), grid.n_freqs, "rho0")
    endpoints = need(payload, "endpoints", "")
    if not isinstance(endpoints, list) or len(endpoints) != 2:
        raise ModelFileError("field 'endpoints' must list exactly two points")
    models = []
    for k, spec in enumerate(endpoints):
        try:
            models.append(
                KnownMagnitudeModel(
                    rho0,
                    alpha=float(need(spec, "alpha", f"endpoints[{k}]")),
                    phase_coeffs=np.asarray(need(spec, "phase_coeffs", f"endpoints[{k}]"), dtype=float),
                )
            )
        except (TypeError, ValueError) as exc:
            raise ModelFileError(f"bad endpoint {k}: {exc}") from exc
    return grid, noise, rho0, models


def _default_context():
    grid = build_grid(0.25, 0.5, 1000)
    noise = NoiseProfile.flat(2.0, 1000)
    rho0 = np.ones(1000)
    return grid, noise, rho0


def _cmd_figure(args) -> int:
    if args.case in FIGURE_CASES:
        config = FIGURE_CASES[args.case]
    else:
        try:
            with open(args.case) as handle:
                payload = json.load(handle)
            payload.setdefault("case_name", args.case)
            if "btau_sweep" in payload:
                payload["btau_sweep"] = tuple(payload["btau_sweep"])
            config = ExperimentConfig(**payload)
        except OSError:
            known = ", ".join(sorted(FIGURE_CASES))
            print(f"error: '{args.case}' is neither a known case ({known}) nor a readable config file", file=sys.stderr)
            return 2
        except (TypeError, ValueError, json.JSONDecodeError) as exc:
            print(f"error: bad figure config: {exc}", file=sys.stderr)
            return 2
    rows = run_figure_case(config)
    out = args.output or config.output_path or f"figure_{config.case_name}.csv"
    write_figure_csv(out, rows)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def _cmd_accept(args) -> int:
    verdict = run_acceptance_suite(seed=args.seed, scale=args.scale)
    for entry in verdict["criteria"]:
        status = "PASS" if entry["passed"] else "FAIL"
        print(
            f"[{status}] criterion {entry['cid']:2d}: {entry['name']} "
            f"(measured {entry['measured']:.6g}, expected {entry['expected']:.6g} "
            f"+/- {entry['tolerance']:.3g}, {entry['seconds']:.2f}s)"
        )
    if args.output:
        with open(args.output, "w") as handle:
            json.dump(verdict, handle, indent=2)
        print(f"verdict written to {args.output}")
    print("all criteria passed" if verdict["all_passed"] else "some criteria FAILED")
    return 0 if verdict["all_passed"] else 1


def _cmd_inspect(args) -> int:
    try:
        grid, noise, rho0, models = load_model_file(args.model_file)
    except ModelFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    first = models[0]
    if args.subject == "metric":
        payload = fisher_matrix(first, first.xi, grid, noise).to_json_dict()
    elif args.subject == "christoffel":
        payload = christoffel(first, first.xi, grid, noise).to_json_dict()
    else:
        psi1 = eval_model(models[0], models[0].xi, grid).psi
        psi2 = eval_model(models[1], models[1].xi, grid).psi
        geo = solve_alpha_geodesic(
            models[0].alpha, models[1].alpha, psi1, psi2, grid, noise, rho0
        )
        payload = geo.to_json_dict()
    text = json.dumps(payload, indent=2)
    if args.output:
        with open(args.output, "w") as handle:
            handle.write(text + "\n")
        print(f"wrote {args.subject} dump to {args.output}")
    else:
        print(text)
    return 0


def _parse_coeffs(cell: str) -> np.ndarray:
    return np.asarray([float(part) for part in cell.split(";")], dtype=float)


def _cmd_distance(args) -> int:
    if args.model:
        try:
            grid, noise, rho0, _ = load_model_file(args.model)
        except ModelFileError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    else:
        grid, noise, rho0 = _default_context()
    try:
        with open(args.pairs) as handle:
            reader = csv.DictReader(handle)
            required = {"alpha1", "phase_coeffs1", "alpha2", "phase_coeffs2"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                print(
                    f"error: pairs CSV must have columns {sorted(required)}", file=sys.stderr
                )
                return 2
            pairs = list(reader)
    except OSError as exc:
        print(f"error: cannot read pairs CSV: {exc}", file=sys.stderr)
        return 2

    out_rows = []
    for k, row in enumerate(pairs):
        try:
            spectra = []
            for side in ("1", "2"):
                model = KnownMagnitudeModel(
                    rho0,
                    alpha=float(row[f"alpha{side}"]),
                    phase_coeffs=wrap_first(_parse_coeffs(row[f"phase_coeffs{side}"])),
                )
                spectra.append(eval_model(model, model.xi, grid))
        except (TypeError, ValueError) as exc:
            print(f"error: bad pair on row {k + 1}: {exc}", file=sys.stderr)
            return 2
        rep = report(spectra[0], spectra[1], noise, rho0=rho0)
        out_rows.append(
            {
                "alpha1": row["alpha1"],
                "phase_coeffs1": row["phase_coeffs1"],
                "alpha2": row["alpha2"],
                "phase_coeffs2": row["phase_coeffs2"],
                **{k: ("" if v is None else repr(v)) for k, v in rep.to_json_dict().items()},
            }
        )
    out = args.output or "distance_reports.csv"
    fieldnames = list(out_rows[0].keys()) if out_rows else [
        "alpha1", "phase_coeffs1", "alpha2", "phase_coeffs2",
        "d_full", "d_alpha", "omega0", "snr1", "gamma_ratio", "delta", "ratio",
    ]
    with open(out, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(out_rows)
    print(f"wrote {len(out_rows)} reports to {out}")
    return 0


def wrap_first(coeffs: np.ndarray) -> np.ndarray:
    """Wrap the constant phase coefficient into its admissible interval."""
    out = np.array(coeffs, dtype=float)
    out[0] = wrap_phase(out[0])
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fisherband",
        description="Information distances between band-limited signals in Gaussian noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fig = sub.add_parser("figure", help="write a delay-sweep CSV dataset")
    p_fig.add_argument("case", help=f"case name ({', '.join(sorted(FIGURE_CASES))}) or JSON config path")
    p_fig.add_argument("--output", help="output CSV path (default figure_<case>.csv)")
    p_fig.set_defaults(func=_cmd_figure)

    p_acc = sub.add_parser("accept", help="run the acceptance suite")
    p_acc.add_argument("--scale", choices=("smoke", "full"), default="full")
    p_acc.add_argument("--seed", type=int, default=0)
    p_acc.add_argument("--output", help="also write the JSON verdict here")
    p_acc.set_defaults(func=_cmd_accept)

    p_ins = sub.add_parser("inspect", help="dump a metric/connection/geodesic as JSON")
    p_ins.add_argument("subject", choices=("metric", "christoffel", "geodesic"))
    p_ins.add_argument("model_file")
    p_ins.add_argument("--output")
    p_ins.set_defaults(func=_cmd_inspect)

    p_dist = sub.add_parser("distance", help="batch-compute distance reports")
    p_dist.add_argument("pairs", help="CSV with alpha1, phase_coeffs1, alpha2, phase_coeffs2 (';'-separated lists)")
    p_dist.add_argument("--model", help="model JSON file fixing grid/noise/template (default: flat demo band)")
    p_dist.add_argument("--output", help="output CSV path (default distance_reports.csv)")
    p_dist.set_defaults(func=_cmd_distance)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
