"""Command-line interface.

Subcommands: fit, simulate, classify, eeg-prep, eval.  Options may come
from a key=value config file (--config); explicit flags win over the
file, which wins over built-in defaults.  Exit codes: 1 for usage or
parameter problems, 2 for unreadable or malformed data, 3 for numerical
failures during estimation.
"""

import argparse
import csv
import json
import sys
from datetime import datetime, timezone

import numpy as np

from .data_model import load_csv
from .errors import DataError, EstimationError, NumericalError, ParameterError
from .evaluation import projection_distance, trace_correlation
from .kernel_integration import fit_from_dict, fit_to_dict
from .pipeline import eeg_preprocess, fit_sdr, loo_classify
from .simulation import METHODS, model_spec, run_experiment


def _int_list(text):
    return [int(tok) for tok in str(text).split(",") if tok.strip()]


def _str_list(text):
    return [tok.strip() for tok in str(text).split(",") if tok.strip()]


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ParameterError(f"expected a boolean, got {text!r}")


def _now():
    return datetime.now(timezone.utc).isoformat()


def _emit(blob, path):
    text = json.dumps(blob, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_config(path):
    values = {}
    with open(path) as fh:
        for num, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"{path}: line {num}: expected key=value")
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _effective(args, defaults, converters):
    """defaults < config file < explicit flags."""
    eff = dict(defaults)
    if getattr(args, "config", None):
        for key, raw in _load_config(args.config).items():
            if key not in defaults:
                raise ParameterError(f"unknown config key {key!r}")
            conv = converters.get(key, str)
            eff[key] = conv(raw)
    for key in defaults:
        given = getattr(args, key, None)
        if given is not None:
            eff[key] = given
    return eff


def _response(value):
    if value is None:
        raise ParameterError("--response is required (flag or config)")
    text = str(value).strip()
    if text.lstrip("-").isdigit():
        return int(text)
    return text


_FIT_DEFAULTS = {
    "response": None,
    "u": None,
    "dim": None,
    "method": "irp_sdr",
    "n_partitions": 50,
    "seed": 0,
    "n_slices": 5,
    "c_n": None,
    "standardize": False,
}
_FIT_CONVERTERS = {
    "u": _int_list,
    "dim": int,
    "n_partitions": int,
    "seed": int,
    "n_slices": int,
    "c_n": float,
    "standardize": _bool,
}


def _cmd_fit(args):
    eff = _effective(args, _FIT_DEFAULTS, _FIT_CONVERTERS)
    if eff["u"] is None:
        raise ParameterError("--u is required (flag or config)")
    dataset = load_csv(
        args.data, _response(eff["response"]), center=True,
        standardize=eff["standardize"],
    )
    fit = fit_sdr(
        dataset,
        eff["u"],
        method=eff["method"],
        d=eff["dim"],
        n_partitions=eff["n_partitions"],
        seed=eff["seed"],
        n_slices=eff["n_slices"],
        c_n=eff["c_n"],
    )
    _emit(
        {
            "timestamp": _now(),
            "command": "fit",
            "config": {**eff, "data": args.data},
            "fit": fit_to_dict(fit),
        },
        args.output,
    )
    return 0


_SIM_DEFAULTS = {
    "models": ["m1", "m2", "m3", "m4"],
    "methods": list(METHODS),
    "replicates": 100,
    "seed": 0,
    "u_grid": None,
    "n_partitions": 50,
    "n_slices": 5,
    "workers": 1,
    "n_override": None,
    "p_override": None,
    "sigma0": None,
    "record_timing": False,
}
_SIM_CONVERTERS = {
    "models": _str_list,
    "methods": _str_list,
    "replicates": int,
    "seed": int,
    "u_grid": _int_list,
    "n_partitions": int,
    "n_slices": int,
    "workers": int,
    "n_override": int,
    "p_override": int,
    "sigma0": float,
    "record_timing": _bool,
}


def _rows_to_csv(rows, path):
    fields = ["model", "method", "u", "replicate", "rho", "d_hat", "wall_time"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def _cmd_simulate(args):
    eff = _effective(args, _SIM_DEFAULTS, _SIM_CONVERTERS)
    specs = [
        model_spec(name, n=eff["n_override"], p=eff["p_override"], sigma0=eff["sigma0"])
        for name in eff["models"]
    ]
    report = run_experiment(
        specs,
        methods=eff["methods"],
        replicates=eff["replicates"],
        seed=eff["seed"],
        u_grid=eff["u_grid"],
        n_partitions=eff["n_partitions"],
        n_slices=eff["n_slices"],
        workers=eff["workers"],
        record_timing=eff["record_timing"],
    )
    if args.csv:
        _rows_to_csv(report.rows, args.csv)
    _emit(
        {
            "timestamp": _now(),
            "command": "simulate",
            "config": report.config_echo,
            "rows": report.rows,
            "aggregates": report.aggregates,
        },
        args.json,
    )
    return 0


_CLS_DEFAULTS = {
    "response": None,
    "u": None,
    "dim": 1,
    "method": "irp_sdr",
    "n_partitions": 10,
    "seed": 0,
    "n_slices": 5,
    "fixed_basis": False,
    "standardize": True,
}
_CLS_CONVERTERS = {
    "u": _int_list,
    "dim": int,
    "n_partitions": int,
    "seed": int,
    "n_slices": int,
    "fixed_basis": _bool,
    "standardize": _bool,
}


def _cmd_classify(args):
    eff = _effective(args, _CLS_DEFAULTS, _CLS_CONVERTERS)
    if eff["u"] is None:
        raise ParameterError("--u is required (flag or config)")
    dataset = load_csv(args.data, _response(eff["response"]), center=False)
    results = []
    for u in eff["u"]:
        res = loo_classify(
            dataset.y,
            dataset.x,
            u=u,
            d=eff["dim"],
            method=eff["method"],
            n_partitions=eff["n_partitions"],
            seed=eff["seed"],
            n_slices=eff["n_slices"],
            fixed_basis=eff["fixed_basis"],
            standardize=eff["standardize"],
        )
        results.append(
            {
                "u": int(u),
                "accuracy": res.accuracy,
                "n_correct": res.n_correct,
                "n_total": res.n_total,
                "classes": res.classes.tolist(),
                "confusion": res.confusion.tolist(),
                "predictions": res.predictions.tolist(),
            }
        )
    _emit(
        {
            "timestamp": _now(),
            "command": "classify",
            "config": {**eff, "data": args.data},
            "results": results,
        },
        args.output,
    )
    return 0


def _cmd_eeg_prep(args):
    x = np.load(args.input)
    out = eeg_preprocess(x)
    np.save(args.output, out)
    _emit(
        {
            "timestamp": _now(),
            "command": "eeg-prep",
            "input_shape": list(x.shape),
            "output_shape": list(out.shape),
            "output": args.output,
        },
        None,
    )
    return 0


def _cmd_eval(args):
    with open(args.estimate) as fh:
        blob = json.load(fh)
    try:
        fit = fit_from_dict(blob["fit"] if "fit" in blob else blob)
    except KeyError as exc:
        raise DataError(f"{args.estimate}: missing field {exc}") from exc
    truth = np.loadtxt(args.truth, delimiter=",", ndmin=2)
    if args.sigma:
        sigma = np.loadtxt(args.sigma, delimiter=",", ndmin=2)
    else:
        sigma = np.eye(truth.shape[0])
    score = trace_correlation(fit.basis, truth, sigma)
    _emit(
        {
            "timestamp": _now(),
            "command": "eval",
            "trace_correlation": score.rho,
            "projection_distance": projection_distance(fit.basis, truth),
            "dim_est": score.dim_est,
            "dim_true": score.dim_true,
        },
        args.output,
    )
    return 0


def _add_common(sub, *, config=True, output=True):
    if config:
        sub.add_argument("--config", help="key=value file; flags override it")
    if output:
        sub.add_argument("--output", help="JSON output path (default: stdout)")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="irpsdr",
        description="Integrated random-partition sufficient dimension reduction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a central-subspace basis from a CSV")
    fit.add_argument("--data", required=True, help="CSV with response and predictors")
    fit.add_argument("--response", help="response column name, or 0-based index")
    fit.add_argument("--u", type=_int_list, help="envelope size(s), comma separated")
    fit.add_argument("--dim", type=int, help="target dimension (default: selected)")
    fit.add_argument("--method", choices=["irp_sdr", "pca_sdr", "marginal_r1"])
    fit.add_argument("--n-partitions", type=int, help="partitions per block size")
    fit.add_argument("--seed", type=int)
    fit.add_argument("--n-slices", type=int)
    fit.add_argument("--c-n", type=float, help="dimension-selection penalty scale")
    fit.add_argument("--standardize", action="store_const", const=True)
    _add_common(fit)
    fit.set_defaults(func=_cmd_fit)

    sim = sub.add_parser("simulate", help="replicated benchmark on the built-in models")
    sim.add_argument("--models", type=_str_list, help="comma separated, e.g. m1,m4")
    sim.add_argument("--methods", type=_str_list)
    sim.add_argument("--replicates", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--u-grid", type=_int_list, help="envelope sizes (default: n-based)")
    sim.add_argument("--n-partitions", type=int)
    sim.add_argument("--n-slices", type=int)
    sim.add_argument("--workers", type=int, help="parallel processes")
    sim.add_argument("--n-override", type=int, help="replace every model's n")
    sim.add_argument("--p-override", type=int, help="replace every model's p")
    sim.add_argument("--sigma0", type=float, help="noise scale where a model uses one")
    sim.add_argument("--record-timing", action="store_const", const=True,
                     help="fill wall_time (makes output run-dependent)")
    sim.add_argument("--json", help="JSON output path (default: stdout)")
    sim.add_argument("--csv", help="also write the per-replicate rows as CSV")
    sim.add_argument("--config", help="key=value file; flags override it")
    sim.set_defaults(func=_cmd_simulate)

    cls = sub.add_parser("classify", help="leave-one-out LDA on the reduced predictor")
    cls.add_argument("--data", required=True)
    cls.add_argument("--response", help="label column name, or 0-based index")
    cls.add_argument("--u", type=_int_list, help="envelope size(s) to evaluate")
    cls.add_argument("--dim", type=int)
    cls.add_argument("--method", choices=["irp_sdr", "pca_sdr", "marginal_r1"])
    cls.add_argument("--n-partitions", type=int)
    cls.add_argument("--seed", type=int)
    cls.add_argument("--n-slices", type=int)
    cls.add_argument("--fixed-basis", action="store_const", const=True,
                     help="fit the basis once on the full data")
    cls.add_argument("--no-standardize", dest="standardize",
                     action="store_const", const=False)
    _add_common(cls)
    cls.set_defaults(func=_cmd_classify)

    prep = sub.add_parser("eeg-prep", help="median-band features from (n, time, channels)")
    prep.add_argument("--input", required=True, help=".npy array (n, time, channels)")
    prep.add_argument("--output", required=True, help=".npy output (n, channels * 8)")
    prep.set_defaults(func=_cmd_eeg_prep)

    ev = sub.add_parser("eval", help="compare a saved fit against a reference basis")
    ev.add_argument("--estimate", required=True, help="JSON produced by `irpsdr fit`")
    ev.add_argument("--truth", required=True, help="CSV matrix, one basis column per dim")
    ev.add_argument("--sigma", help="CSV covariance for the metric (default: identity)")
    _add_common(ev, config=False)
    ev.set_defaults(func=_cmd_eval)

    return parser


def main(argv=None):
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if not exc.code else 1
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (EstimationError, NumericalError) as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
