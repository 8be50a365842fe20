"""Command-line front end.

Exit status: 0 on success, 2 when a Groebner computation ran out of budget,
1 on any other error.
"""

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .errors import ExpressionSyntaxError, QssrError
from .groebner import Budget
from .network import load_model
from .qss import (QssSplit, affine_subspace_candidates, explicit_reduce_linear,
                  find_qss_critical, implicit_reduce, verify_qss_parameter_value)
from .report import dumps, jsonable, reduced_system_report, write_report

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


def parse_assignments(text):
    """``e0=0,k1=1/2`` -> {name: Fraction}. A bare name means name=1."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" in item:
            name, value = (s.strip() for s in item.split("=", 1))
        else:
            name, value = item, "1"
        try:
            out[name] = Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ExpressionSyntaxError(f"{name}: {value!r} is not an exact rational") from None
    return out


def _read_matrix(path, ring):
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append([ring.parse(e.strip()) for e in line.split(",")])
    return rows


def _read_list(path, ring):
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(ring.parse(line))
    return out


def _budget(args):
    return Budget(args.gb_steps, args.gb_seconds)


def _setup(args):
    odes = load_model(args.model).system()
    split = QssSplit.of(odes, args.qss) if getattr(args, "qss", None) else None
    return odes, split


def _need_split(split):
    if split is None:
        raise QssrError("--qss is required for this command")
    return split


# -- commands -------------------------------------------------------------------------

def cmd_odes(args):
    odes, _ = _setup(args)
    report = {"command": "odes", "status": "ok", "model": odes.name,
              "states": list(odes.states), "parameters": list(odes.parameters),
              "field": {s: str(h) for s, h in zip(odes.states, odes.rhs)},
              "substitutions": {k: str(v) for k, v in odes.substitutions}}
    return report, "\n".join(odes.to_text())


def cmd_qss_reduce(args):
    odes, split = _setup(args)
    split = _need_split(split)
    red = explicit_reduce_linear(odes, split) if args.explicit else implicit_reduce(odes, split)
    lines = [f"{s}' = {f}" for s, f in zip(red.states, red.field)]
    if red.variety:
        lines.append("on " + ", ".join(f"{p} = 0" for p in red.variety))
    if "psi" in red.extras:
        lines += [f"{k} = {v}" for k, v in red.extras["psi"].items()]
    return {"command": "qss reduce", "status": "ok", "reduced": reduced_system_report(red)}, "\n".join(lines)


def cmd_qss_critical(args):
    odes, split = _setup(args)
    split = _need_split(split)
    res = find_qss_critical(odes, _need_split(split), _budget(args))
    report = {"command": "qss critical", "status": res.status, "message": res.message,
              "generators": [str(g) for g in res.generators],
              "conditions": res.conditions(), "steps": res.steps}
    if res.status == "infeasible":
        text = f"infeasible within budget: {res.message}"
    elif res.status == "trivial":
        text = res.message
    else:
        text = "\n".join(" and ".join(b) for b in res.conditions()) or "no QSS-critical parameter value"
    return report, text


def cmd_qss_affine(args):
    odes, split = _setup(args)
    res = affine_subspace_candidates(odes, _need_split(split), args.nonnegative, _budget(args))
    report = {"command": "qss affine", "status": res.status, "message": res.message,
              "gamma_names": res.gamma_names,
              "candidates": [c.text() for c in res.candidates],
              "specializations": [c.text() for c in res.specializations],
              "rank_failures": [c.text() for c in res.rank_failures]}
    lines = []
    for c in res.candidates:
        t = c.text()
        lines.append(" and ".join(t["parameter_conditions"]) or "(no parameter condition)")
        lines.append("    gamma: " + ", ".join(f"{k} = {v}" for k, v in t["gamma"].items()))
    return report, "\n".join(lines) or "no candidates"


def cmd_qss_verify(args):
    odes, split = _setup(args)
    v = verify_qss_parameter_value(odes, _need_split(split), parse_assignments(args.at), _budget(args))
    report = {"command": "qss verify", "status": "ok", "verdict": v}
    text = (f"QSS-critical: {v.is_critical}\nQSS parameter value: {v.is_qss_pv}\n{v.status}"
            + (f"\nfirst failing certificate: {v.first_failing}" if v.first_failing else ""))
    return report, text


def _pq(args, ring):
    if args.P is None and args.mu is None:
        return None, None
    if args.P is None or args.mu is None:
        raise QssrError("--P and --mu must be given together")
    return _read_matrix(args.P, ring), _read_list(args.mu, ring)


def cmd_tf_reduce(args):
    from .tf import (auto_decomposition, fully_singular_check, subspace_gamma, tf_reduce_affine,
                     tf_reduce_general)

    odes, split = _setup(args)
    pstar, rho = parse_assignments(args.at), parse_assignments(args.dir)
    if args.general:
        P, mu = _pq(args, odes.ring)
        if P is None:
            P, mu = auto_decomposition(odes, _need_split(split), pstar)
        red = tf_reduce_general(odes, pstar, rho, P, mu, _budget(args))
    else:
        split = _need_split(split)
        gamma = parse_assignments(args.gamma) if args.gamma else subspace_gamma(odes, split, pstar, _budget(args))
        if gamma is None:
            raise QssrError("no coordinate subspace of the QSS variety carries a singular "
                            "perturbation reduction here; use --general")
        if not fully_singular_check(odes, split, pstar, gamma):
            raise QssrError("h does not vanish on the subspace at this parameter value")
        red = tf_reduce_affine(odes, split, pstar, rho, gamma)
    lines = [f"{s}' = {f}" for s, f in zip(red.states, red.field)]
    lines.append("(slow time; on " + ", ".join(f"{p} = 0" for p in red.variety) + ")")
    return {"command": "tf reduce", "status": "ok", "reduced": reduced_system_report(red)}, "\n".join(lines)


def cmd_consistency(args):
    from .tf import consistency_check

    odes, split = _setup(args)
    P, mu = _pq(args, odes.ring)
    res = consistency_check(odes, _need_split(split), parse_assignments(args.at),
                            parse_assignments(args.dir), P, mu, _budget(args))
    report = {"command": "consistency", "status": "ok", "verdict": res.verdict,
              "route": res.route, "differing": res.differing, "witness": res.witness}
    lines = [res.verdict]
    for x, w in res.witness.items():
        for k, v in jsonable(w).items():
            lines.append(f"  {x} {k}: {v}")
    return report, "\n".join(lines)


def _out_dir(args):
    return Path(args.out) if args.out else None


def cmd_simulate(args):
    from . import numeric

    odes, split = _setup(args)
    params = {k: Fraction(v) for k, v in odes.default_point().items()}
    params.update(parse_assignments(args.at))
    x0 = {k: float(v) for k, v in parse_assignments(args.x0).items()}
    missing = [s for s in odes.states if s not in x0 and (split is None or s in split.slow)]
    if missing:
        raise QssrError(f"--x0 needs values for {', '.join(missing)}")
    if split is not None:
        x0, _ = numeric.project_to_variety(odes, split, params, x0)
    trajs = {"full": numeric.integrate(numeric.NumericSystem.from_odes(odes, params), x0,
                                       args.T, args.rtol, args.atol)}
    if split is not None:
        red = implicit_reduce(odes, split)
        trajs["qss"] = numeric.integrate(numeric.NumericSystem.from_reduced(red, params), x0,
                                         args.T, args.rtol, args.atol)
    out = _out_dir(args)
    files = {}
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        for k, tr in trajs.items():
            tr.to_csv(out / f"{k}.csv")
            files[k] = f"{k}.csv"
    report = {"command": "simulate", "status": "ok", "start": x0, "T": args.T,
              "end": {k: dict(zip(tr.states, tr.values[-1])) for k, tr in trajs.items()},
              "integration_status": {k: tr.status for k, tr in trajs.items()}, "files": files}
    if "qss" in trajs:
        report["sup_difference"] = numeric.compare_trajectories(trajs["full"], trajs["qss"], args.T)
    text = "\n".join(f"{k} at T: " + ", ".join(f"{s} = {v:.10g}" for s, v in zip(tr.states, tr.values[-1]))
                     for k, tr in trajs.items())
    if "sup_difference" in report:
        text += f"\nsup-norm difference: {report['sup_difference']:.6g}"
    return report, text


def cmd_study(args):
    from . import numeric

    odes, split = _setup(args)
    split = _need_split(split)
    P, mu = _pq(args, odes.ring)
    eps = [float(Fraction(e)) for e in args.eps.split(",")]
    anchor = {k: float(v) for k, v in parse_assignments(args.anchor).items()}
    rep = numeric.convergence_study(odes, split, parse_assignments(args.at), parse_assignments(args.dir),
                                    eps, anchor, args.T, args.reduction, args.time_scale,
                                    args.rtol, args.atol, P, mu)
    report = {"command": "study", "status": "ok", **rep.as_dict()}
    lines = [f"eps = {r.eps:<10g} error = {r.error:.6g}  relative = {r.relative_error:.6g}" for r in rep.rows]
    lines.append(f"slope = {rep.slope if rep.slope is None else round(rep.slope, 4)}  ({rep.verdict})")
    return report, "\n".join(lines)


# -- parser -----------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="model file or bundled model name")
    common.add_argument("--qss", help="comma-separated QSS species")
    common.add_argument("--gb-steps", type=int, default=1_000_000, help="Groebner step cap")
    common.add_argument("--gb-seconds", type=float, default=None, help="Groebner wall-clock cap")
    common.add_argument("--out", help="directory for the JSON report and CSV files")
    common.add_argument("--json", action="store_true", help="print the JSON report")

    p = argparse.ArgumentParser(prog="qssr", description="Quasi-steady-state and singular "
                                "perturbation reduction of polynomial ODE systems.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("odes", parents=[common], help="print the ODE system")
    s.set_defaults(func=cmd_odes, report="odes.json")

    q = sub.add_parser("qss", help="classical QSS reduction").add_subparsers(dest="qss_command", required=True)
    s = q.add_parser("reduce", parents=[common], help="reduced system on the QSS variety")
    s.add_argument("--explicit", action="store_true")
    s.set_defaults(func=cmd_qss_reduce, report="qss-reduce.json")
    s = q.add_parser("critical", parents=[common], help="parameter values where the QSS variety can be invariant")
    s.set_defaults(func=cmd_qss_critical, report="qss-critical.json")
    s = q.add_parser("affine", parents=[common], help="invariant coordinate subspaces x2 = gamma")
    s.add_argument("--nonnegative", action="store_true", help="assume all indeterminates >= 0")
    s.set_defaults(func=cmd_qss_affine, report="qss-affine.json")
    s = q.add_parser("verify", parents=[common], help="check one parameter point")
    s.add_argument("--at", required=True, help="parameter point, e.g. e0=0,k1=1")
    s.set_defaults(func=cmd_qss_verify, report="qss-verify.json")

    t = sub.add_parser("tf", help="singular perturbation reduction").add_subparsers(dest="tf_command", required=True)
    s = t.add_parser("reduce", parents=[common], help="lowest order reduction at a critical point")
    s.add_argument("--at", required=True, help="critical parameter point, e.g. e0=0")
    s.add_argument("--dir", required=True, help="perturbation direction, e.g. e0 or k2=1")
    s.add_argument("--general", action="store_true", help="use the general P, mu route")
    s.add_argument("--gamma", help="subspace x2 = gamma (affine case)")
    s.add_argument("--P", help="file with the rows of P, entries comma-separated")
    s.add_argument("--mu", help="file with one component of mu per line")
    s.set_defaults(func=cmd_tf_reduce, report="tf-reduce.json")

    s = sub.add_parser("consistency", parents=[common], help="compare the QSS and singular perturbation reductions")
    s.add_argument("--at", required=True, help="critical parameter point, e.g. k2=0")
    s.add_argument("--dir", required=True, help="perturbation direction, e.g. k2")
    s.add_argument("--P")
    s.add_argument("--mu")
    s.set_defaults(func=cmd_consistency, report="consistency.json")

    s = sub.add_parser("simulate", parents=[common], help="integrate full and reduced systems")
    s.add_argument("--at", default="", help="parameter values; others use model defaults")
    s.add_argument("--x0", required=True, help="initial state, e.g. s=1,c=0")
    s.add_argument("--T", type=float, default=10.0, help="end time")
    s.add_argument("--rtol", type=float, default=1e-8)
    s.add_argument("--atol", type=float, default=1e-10)
    s.set_defaults(func=cmd_simulate, report="simulate.json")

    s = sub.add_parser("study", parents=[common], help="error against the small parameter")
    s.add_argument("--at", required=True, help="critical parameter point")
    s.add_argument("--dir", required=True, help="perturbation direction")
    s.add_argument("--eps", default="0.02,0.01,0.005,0.0025", help="small-parameter values")
    s.add_argument("--anchor", required=True, help="retained-state values, e.g. s=1")
    s.add_argument("--T", type=float, default=20.0, help="end time (slow time by default)")
    s.add_argument("--reduction", choices=["qss", "tf"], default="qss")
    s.add_argument("--time-scale", choices=["slow", "fast"], default="slow")
    s.add_argument("--rtol", type=float, default=1e-10)
    s.add_argument("--atol", type=float, default=1e-12)
    s.add_argument("--P")
    s.add_argument("--mu")
    s.set_defaults(func=cmd_study, report="study.json")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        report, text = args.func(args)
    except QssrError as exc:
        code = getattr(exc, "code", "qssr.error")
        print(f"error [{code}]: {exc}", file=sys.stderr)
        if args.out:
            write_report({"status": "error", "code": code, "message": str(exc)}, Path(args.out) / args.report)
        return EXIT_INFEASIBLE if code == "ideal.infeasible" else EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.out:
        write_report(report, Path(args.out) / args.report)
    print(dumps(report) if args.json else text, end="" if args.json else "\n")
    return EXIT_INFEASIBLE if report.get("status") == "infeasible" else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
