"""Command-line front end.

Every subcommand writes a manifest (arguments, package version,
tolerance table) plus machine-readable reports into the output
directory, atomically.  Exit codes: 0 when every verification in the
run passed, 1 when something failed (the report names the premise or
tolerance), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .tolerances import DEFAULT_TOLS, Tolerances


def _out_dir(args) -> Path:
    d = Path(args.out_dir or os.environ.get("WL2LAB_OUT", "out"))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_json(path: Path, payload) -> None:
    tmp = tempfile.NamedTemporaryFile(
        "w", dir=path.parent, prefix=path.name, suffix=".tmp", delete=False
    )
    try:
        json.dump(payload, tmp, sort_keys=True, indent=1)
        tmp.write("\n")
        tmp.flush()
        os.fsync(tmp.fileno())
    finally:
        tmp.close()
    os.replace(tmp.name, path)


def _write_manifest(out: Path, name: str, args, tols: Tolerances) -> None:
    cfg = {k: v for k, v in vars(args).items() if k != "func" and not callable(v)}
    _write_json(
        out / f"{name}_manifest.json",
        {"command": name, "version": __version__, "config": cfg,
         "tolerances": tols.as_dict()},
    )


def _tols_from(args) -> Tolerances:
    tols = DEFAULT_TOLS
    for spec in args.tol or []:
        key, _, val = spec.partition("=")
        if not val:
            raise SystemExit(f"bad --tol '{spec}', expected NAME=VALUE")
        if not hasattr(tols, key):
            raise SystemExit(f"unknown tolerance '{key}'")
        tols = tols.replace(**{key: float(val)})
    return tols


def _weight_from(args):
    from .weights import power_weight, read_weight_csv

    if getattr(args, "weight_csv", None):
        return read_weight_csv(args.weight_csv)
    return power_weight(args.gamma)


# ---------------------------------------------------------------------------
# subcommands


def cmd_weights_check(args) -> int:
    from .weights import check_divergence, doubling_constant, estimate_M, verify_lemma_double

    tols = _tols_from(args)
    out = _out_dir(args)
    _write_manifest(out, "weights_check", args, tols)
    w = _weight_from(args)
    div = check_divergence(w, args.target, args.cap)
    dbl = doubling_constant(w, args.cap, violation_threshold=args.doubling_threshold)
    est = estimate_M(w, args.cap)
    payload = {
        "weight": w.name,
        "divergence": div.as_dict(),
        "doubling": dbl.as_dict(),
        "M_estimate": est.as_dict(),
    }
    failed = []
    if not div.crossed:
        failed.append(f"divergence premise: partial sum stalled at {div.partial_sum_at_cap:.6g}")
    if est.M_est is None:
        failed.append("no polynomial exponent M on the range")
    if est.M_est is not None and args.verify_m is not None:
        rep = verify_lemma_double(w, args.verify_m, args.cap)
        payload["summation_bounds"] = rep.as_dict()
    payload["failed"] = failed
    _write_json(out / "weights_check.json", payload)
    print(json.dumps(payload, sort_keys=True, indent=1))
    return 1 if failed else 0


def cmd_block_build(args) -> int:
    from .blocks import BlockConstructionError, build_block
    from .fourier import write_coeff_csv

    tols = _tols_from(args)
    out = _out_dir(args)
    _write_manifest(out, "block_build", args, tols)
    try:
        block, report = build_block(args.eta, args.m, args.s, args.grid, tols=tols)
    except (BlockConstructionError, ValueError) as exc:
        _write_json(out / "block_report.json", {"error": str(exc)})
        print(f"block construction failed: {exc}", file=sys.stderr)
        return 1
    write_coeff_csv(out / "block_coeffs.csv", block.poly)
    payload = {"eta": args.eta, "M": args.m, "S": args.s,
               "degree": block.degree, "G_build": block.G_build,
               "report": report.as_dict()}
    _write_json(out / "block_report.json", payload)
    print(json.dumps(payload["report"], sort_keys=True, indent=1))
    return 0 if report.accepted else 1


def cmd_localizer_build(args) -> int:
    from .fourier import write_coeff_csv
    from .localizer import LocalizerBuildError, build_localizer

    tols = _tols_from(args)
    out = _out_dir(args)
    _write_manifest(out, "localizer_build", args, tols)
    w = _weight_from(args)
    lines = []
    code = 0
    reports = {}
    for eps in args.eps:
        try:
            loc = build_localizer(w, eps, args.grid, tols=tols)
        except LocalizerBuildError as exc:
            reports[str(eps)] = {"error": str(exc)}
            code = 1
            continue
        if len(args.eps) == 1:
            write_coeff_csv(out / "localizer_coeffs.csv", loc.psi)
        reports[str(eps)] = {"params": loc.params.as_dict(),
                             "report": loc.report.as_dict()}
        lines.append(f"{eps} {loc.report.deleted_arc_len}")
        if not loc.report.all_pass():
            code = 1
    (out / "localizer_arcs.dat").write_text("\n".join(lines) + "\n")
    _write_json(out / "localizer_report.json", reports)
    print(json.dumps(reports, sort_keys=True, indent=1))
    return code


def cmd_baire_run(args) -> int:
    from .baire import BudgetError, CompactSet, run_baire
    from .fourier import CoeffVector, write_coeff_csv
    from .localizer import LocalizerBuildError

    tols = _tols_from(args)
    out = _out_dir(args)
    _write_manifest(out, "baire_run", args, tols)
    w = _weight_from(args)
    G = args.grid
    pts = [k * (G // args.steps) for k in range(args.steps)]
    buds = [args.budget0 * args.budget_geom ** k for k in range(args.steps)]
    try:
        pair, trace = run_baire(
            CoeffVector.delta(0, 1.0), CompactSet.full_circle(G),
            pts, buds, w, G, strict=args.strict, tols=tols,
        )
    except (LocalizerBuildError, BudgetError) as exc:
        _write_json(out / "baire_trace.json", {"error": str(exc)})
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    write_coeff_csv(out / "baire_final_coeffs.csv", pair.f)
    _write_json(out / "baire_support.json",
                {"arcs": [list(a) for a in trace.final_support_arcs]})
    payload = trace.as_dict()
    payload["mean_final"] = [pair.f.at(0).real, pair.f.at(0).imag]
    payload["problems"] = pair.validate(tols)
    _write_json(out / "baire_trace.json", payload)
    print(json.dumps({"total_increment": trace.total_increment,
                      "budget_sum": sum(buds),
                      "steps": len(trace.records),
                      "problems": payload["problems"]}, sort_keys=True, indent=1))
    return 0 if not payload["problems"] else 1


def cmd_appendix_divergence(args) -> int:
    from .thresholds import build_divergent_continuous

    tols = _tols_from(args)
    out = _out_dir(args)
    _write_manifest(out, "appendix_divergence", args, tols)
    w = _weight_from(args)
    wit = build_divergent_continuous(w, J=args.blocks, K=args.fejer)
    payload = wit.as_dict()
    lower = [(j + 1) / 4.0 for j in range(args.blocks)]
    payload["per_block_lower_bound"] = lower
    ok = (
        wit.T0_sup <= 1.0 + 1e-12
        and wit.T0_l2 >= 0.5
        and all(s >= lo - tols.divergence_slack
                for s, lo in zip(wit.weighted_partial_sums, lower))
    )
    payload["passes"] = ok
    _write_json(out / "divergence_report.json", payload)
    (out / "divergence_partials.dat").write_text(
        "\n".join(f"{j + 1} {s}" for j, s in enumerate(wit.weighted_partial_sums))
        + "\n"
    )
    print(json.dumps({"passes": ok, "partials_tail": payload["weighted_partial_sums"][-3:]},
                     sort_keys=True, indent=1))
    return 0 if ok else 1


def cmd_iistrong_build(args) -> int:
    from .thresholds import build_iistrong_weights, phi_builtin

    tols = _tols_from(args)
    out = _out_dir(args)
    _write_manifest(out, "iistrong_build", args, tols)
    phi = phi_builtin(args.phi, p=args.power)
    eps = [2.0 ** -k for k in range(args.stages + 1)]
    spec = build_iistrong_weights(phi, eps, args.stages, stretch=args.stretch,
                                  phi_name=args.phi)
    lam = spec.lam
    vals = lam.values(spec.N_schedule[-1])
    increasing = bool(np.all(np.diff(vals[1:]) > 0))
    nodes_exact = all(
        lam.value(spec.N_schedule[k]) == spec.node_value(k)
        for k in range(1, args.stages + 1)
    )
    halves = all(s >= 0.5 - tols.stage_half_slack for s in spec.stage_sums)
    payload = spec.as_dict()
    payload.update({"increasing": increasing, "nodes_exact": nodes_exact,
                    "stage_sums_at_least_half": halves})
    _write_json(out / "iistrong_report.json", payload)
    print(json.dumps(payload, sort_keys=True, indent=1))
    return 0 if (increasing and nodes_exact and halves) else 1


def cmd_km_test(args) -> int:
    from .fourier import read_coeff_csv
    from .thresholds import km_hypothesis_test

    tols = _tols_from(args)
    out = _out_dir(args)
    _write_manifest(out, "km_test", args, tols)
    S = read_coeff_csv(args.input)
    res = km_hypothesis_test(S, args.n, args.gamma, args.eps, args.grid, tols=tols)
    _write_json(out / "km_report.json", res.as_dict())
    print(json.dumps(res.as_dict(), sort_keys=True, indent=1))
    return 0 if (res.cond1_pass and res.cond2_pass) else 1


def _parse_set(args) -> list[int]:
    if getattr(args, "set_file", None):
        text = Path(args.set_file).read_text()
        return [int(tok) for tok in text.replace(",", " ").split()]
    return [int(tok) for tok in args.set.split(",")]


def cmd_sidon_count(args) -> int:
    from .sidon import count_representations

    out = _out_dir(args)
    _write_manifest(out, "sidon_count", args, DEFAULT_TOLS)
    rep = count_representations(args.n, _parse_set(args))
    _write_json(out / "sidon_count.json", rep.as_dict())
    print(json.dumps(rep.as_dict(), sort_keys=True, indent=1))
    return 0


def cmd_sidon_profile(args) -> int:
    from .sidon import pisier_profile

    out = _out_dir(args)
    _write_manifest(out, "sidon_profile", args, DEFAULT_TOLS)
    prof = pisier_profile(_parse_set(args), args.gamma)
    _write_json(out / "sidon_profile.json", prof.as_dict())
    print(json.dumps(prof.as_dict(), sort_keys=True, indent=1))
    return 0 if prof.passes else 1


# ---------------------------------------------------------------------------


def _add_common(sp):
    sp.add_argument("--out-dir", default=None, help="output directory (env WL2LAB_OUT)")
    sp.add_argument("--tol", action="append", metavar="NAME=VALUE",
                    help="override a tolerance for this run")
    sp.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    sp.add_argument("--parallel", action="store_true",
                    help="accepted for interface compatibility; execution is "
                         "sequential and deterministic either way")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wl2lab")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    w = sub.add_parser("weights", help="weight sequence diagnostics")
    wsub = w.add_subparsers(dest="sub", required=True)
    wc = wsub.add_parser("check")
    wc.add_argument("--gamma", type=float, default=0.5)
    wc.add_argument("--weight-csv", default=None)
    wc.add_argument("--cap", type=int, default=100000)
    wc.add_argument("--target", type=float, default=5.0)
    wc.add_argument("--doubling-threshold", type=float, default=4.0)
    wc.add_argument("--verify-m", type=int, default=None)
    _add_common(wc)
    wc.set_defaults(func=cmd_weights_check)

    b = sub.add_parser("block", help="building-block construction")
    bsub = b.add_subparsers(dest="sub", required=True)
    bb = bsub.add_parser("build")
    bb.add_argument("--eta", type=float, required=True)
    bb.add_argument("--m", type=int, required=True)
    bb.add_argument("--s", type=int, required=True)
    bb.add_argument("--grid", type=int, default=8192)
    _add_common(bb)
    bb.set_defaults(func=cmd_block_build)

    l = sub.add_parser("localizer", help="localizing function construction")
    lsub = l.add_subparsers(dest="sub", required=True)
    lb = lsub.add_parser("build")
    lb.add_argument("--gamma", type=float, default=0.5)
    lb.add_argument("--weight-csv", default=None)
    lb.add_argument("--eps", type=float, nargs="+", required=True)
    lb.add_argument("--grid", type=int, default=16384)
    _add_common(lb)
    lb.set_defaults(func=cmd_localizer_build)

    r = sub.add_parser("baire", help="deletion runs")
    rsub = r.add_subparsers(dest="sub", required=True)
    rr = rsub.add_parser("run")
    rr.add_argument("--gamma", type=float, default=0.5)
    rr.add_argument("--weight-csv", default=None)
    rr.add_argument("--steps", type=int, default=10)
    rr.add_argument("--grid", type=int, default=16384)
    rr.add_argument("--budget0", type=float, default=0.5)
    rr.add_argument("--budget-geom", type=float, default=0.5)
    rr.add_argument("--strict", action="store_true",
                    help="fail instead of recording unmet step budgets")
    _add_common(rr)
    rr.set_defaults(func=cmd_baire_run)

    a = sub.add_parser("appendix", help="divergent continuous function")
    asub = a.add_subparsers(dest="sub", required=True)
    ad = asub.add_parser("divergence")
    ad.add_argument("--gamma", type=float, default=1.0)
    ad.add_argument("--weight-csv", default=None)
    ad.add_argument("--blocks", type=int, default=20)
    ad.add_argument("--fejer", type=int, default=64)
    _add_common(ad)
    ad.set_defaults(func=cmd_appendix_divergence)

    i = sub.add_parser("iistrong", help="stagewise interpolated weights")
    isub = i.add_subparsers(dest="sub", required=True)
    ib = isub.add_parser("build")
    ib.add_argument("--phi", choices=("identity", "power", "xlog"), default="identity")
    ib.add_argument("--power", type=float, default=1.0)
    ib.add_argument("--stages", type=int, default=6)
    ib.add_argument("--stretch", type=int, default=1)
    _add_common(ib)
    ib.set_defaults(func=cmd_iistrong_build)

    k = sub.add_parser("km", help="support-density hypothesis tests")
    ksub = k.add_subparsers(dest="sub", required=True)
    kt = ksub.add_parser("test")
    kt.add_argument("--input", required=True, help="coefficient CSV")
    kt.add_argument("--n", type=int, required=True)
    kt.add_argument("--gamma", type=float, required=True)
    kt.add_argument("--eps", type=float, required=True)
    kt.add_argument("--grid", type=int, default=4096)
    _add_common(kt)
    kt.set_defaults(func=cmd_km_test)

    s = sub.add_parser("sidon", help="representation counting")
    ssub = s.add_subparsers(dest="sub", required=True)
    sc = ssub.add_parser("count")
    sc.add_argument("--set", default=None)
    sc.add_argument("--set-file", default=None)
    sc.add_argument("--n", type=int, required=True)
    _add_common(sc)
    sc.set_defaults(func=cmd_sidon_count)
    sp = ssub.add_parser("profile")
    sp.add_argument("--set", default=None)
    sp.add_argument("--set-file", default=None)
    sp.add_argument("--gamma", type=float, required=True)
    _add_common(sp)
    sp.set_defaults(func=cmd_sidon_profile)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
