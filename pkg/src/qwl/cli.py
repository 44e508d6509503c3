"""Batch certification front end.

Exit codes: 0 when the verdict is true, 1 when it is false (the report
carries the witnesses), 2 for unreadable input or an invalid spec.
"""

import argparse
import os
import sys

import numpy as np

from . import _kernels, io, numerics
from .choieffros import matrix_units, range_commutant, verify_idempotent
from .condform import canonical_form, classify
from .errors import NotIdempotent, ParseError, QwlError
from .gamma_reference import TABLE
from .qweight import (
    assemble,
    boundary_report,
    certify_q_pure,
    construct_subordinate,
    dyadic_grid,
    parse_grid,
    reduce_to_rank_one,
    skeleton_suite,
    theta_limit,
    trivial_subordinate_check,
    verify_conjugacy_witness,
)
from .superop import is_completely_positive

VERBS = ("check-cp", "canonical", "classify", "choi-effros", "verify-qweight", "skeleton",
         "purity", "subordinate", "reduce", "witness", "gamma-selftest")


def _load(path, parser):
    d = io.load_json(path)
    return parser(d)


def _verdict(ok, report):
    report["verdict"] = bool(ok)
    return (0 if ok else 1), report


# ---------------------------------------------------------------- commands

def cmd_check_cp(args, tol):
    phi = _load(args.input[0], io.parse_superop)
    v = is_completely_positive(phi, tol)
    w = np.linalg.eigvalsh(0.5 * (phi.choi() + phi.choi().conj().T))
    report = {"verb": "check-cp", "min_choi_eigenvalue": float(w[0])}
    if not v:
        report["witness"] = {"vector": v.witness["vector"], "A": v.witness["A"], "f": v.witness["f"],
                             "quadratic_form": v.detail["quadratic_form"]}
    return _verdict(v.ok, report)


def cmd_canonical(args, tol):
    phi = _load(args.input[0], io.parse_superop)
    cf = canonical_form(phi, tol)
    err = float(np.linalg.norm(cf.reassemble().choi() - phi.choi()) / phi.dim_in)
    return 0, {"verb": "canonical", "s": cf.s, "Y": cf.Y, "lambdas": cf.lambdas, "X": cf.X,
               "spectrum": cf.spectrum, "reassembly_error": err}


def cmd_classify(args, tol):
    phi = _load(args.input[0], io.parse_superop)
    c = classify(phi, tol)
    return 0, {"verb": "classify", "class": c.kind.value, "internal_spectrum": c.certificate, "floor": c.floor}


def cmd_choi_effros(args, tol):
    d = io.load_json(args.input[0])
    L = io.parse_superop(d)
    hint = io.parse_matrix(d["hint"], "$.hint", square=True) if isinstance(d, dict) and "hint" in d else None
    v = verify_idempotent(L, tol)
    if not v:
        return _verdict(False, {"verb": "choi-effros", "idempotent_checks": v.detail})
    try:
        st = matrix_units(L, tol, seed=args.seed, hint=hint)
    except NotIdempotent as e:
        return _verdict(False, {"verb": "choi-effros", "error": str(e)})
    report = {"verb": "choi-effros", "F": st.F, "I_o": st.I_o, "P": st.P,
              "factors": [{"q": f.q, "units": f.units.tolist()} for f in st.factors],
              "commutant_basis": range_commutant(st, tol), "warnings": st.warnings}
    return _verdict(True, report)


def cmd_verify_qweight(args, tol):
    spec = _load(args.input[0], io.parse_spec)
    om = assemble(spec, tol)
    rep = boundary_report(om, args.grid)
    ok = all(r["cp"] and r["below_unit"] for r in rep["rows"])
    return _verdict(ok, {"verb": "verify-qweight", "unital": om.unital, "checks": om.checks, "boundary": rep})


def cmd_skeleton(args, tol):
    spec = _load(args.input[0], io.parse_spec)
    om = assemble(spec, tol)
    suite = skeleton_suite(om, args.grid)
    tl = theta_limit(om, args.grid)
    tl.pop("limit_inverse")
    return _verdict(suite["ok"], {"verb": "skeleton", "suite": suite, "theta": tl,
                                  "caveat": "limits are reported as finite-grid diagnostics"})


def _certificate_report(cert):
    return {"condition_i": bool(cert.condition_i), "condition_ii": bool(cert.condition_ii),
            "condition_iii": bool(cert.condition_iii), "q_pure": cert.verdict,
            "witnesses": {k: ({kk: vv for kk, vv in w.items() if kk in ("X", "lambda")} if isinstance(w, dict) else w)
                          for k, w in cert.witnesses.items()}}


def cmd_purity(args, tol):
    spec = _load(args.input[0], io.parse_spec)
    cert = certify_q_pure(assemble(spec, tol), tol)
    return _verdict(cert.verdict, {"verb": "purity", "certificate": _certificate_report(cert)})


def cmd_subordinate(args, tol):
    d = io.load_json(args.input[0])
    spec = io.parse_spec(io._req(d, "omega", "$"), "$.omega")
    psi2 = io.parse_superop(io._req(d, "psi_prime", "$"), "$.psi_prime")
    om = assemble(spec, tol)
    if d.get("eta") is None:
        v = trivial_subordinate_check(om, psi2, tol)
        return _verdict(v.ok, {"verb": "subordinate", "kind": "trivial", "psi_difference_cp": bool(v)})
    eta = io.parse_weights(d["eta"], "$.eta")
    sub = construct_subordinate(om, eta, psi2, args.grid, tol)
    ok = sub.checks["pi_difference_cp"]
    return _verdict(ok, {"verb": "subordinate", "kind": "general", "unital": sub.unital,
                         "spec": io.spec_to_json(sub.spec)})


def cmd_reduce(args, tol):
    spec = _load(args.input[0], io.parse_spec)
    om = assemble(spec, tol)
    eta, cc = reduce_to_rank_one(om, tol)
    big_cert = certify_q_pure(cc.enlarged, tol)
    ok = cc.hyper_maximal and cc.resolvents_differ and cc.corner_acts_as_Z0 and big_cert.verdict
    report = {"verb": "reduce", "s0": cc.s0, "z": cc.z, "Z0": cc.Z0, "gauge_C": cc.gauge_C,
              "hyper_maximal": cc.hyper_maximal, "resolvents_differ": cc.resolvents_differ,
              "corner_acts_as_Z0": cc.corner_acts_as_Z0, "shur_defect": cc.shur_defect,
              "enlarged_certificate": _certificate_report(big_cert)}
    if args.output:
        os.makedirs(args.output, exist_ok=True)
        for name, obj in (("eta.json", io.spec_to_json(eta.spec)), ("enlarged.json", io.spec_to_json(cc.enlarged.spec))):
            with open(os.path.join(args.output, name), "w") as fh:
                fh.write(io.dumps(obj))
        report["written"] = ["eta.json", "enlarged.json"]
    else:
        report["eta"] = io.spec_to_json(eta.spec)
        report["enlarged"] = io.spec_to_json(cc.enlarged.spec)
    return _verdict(ok, report)


def cmd_witness(args, tol):
    d = io.load_json(args.input[0])
    a = assemble(io.parse_spec(io._req(d, "omega1", "$"), "$.omega1"), tol)
    b = assemble(io.parse_spec(io._req(d, "omega2", "$"), "$.omega2"), tol)
    U = io.parse_matrix(io._req(d, "U", "$"), "$.U")
    lam = io._float(d, "lambda", "$")
    h = None
    if d.get("h") is not None:
        h = [[io.parse_atom(at, f"$.h[{k}][{n}]", b.p) for n, at in enumerate(atoms)] for k, atoms in enumerate(d["h"])]
    v = verify_conjugacy_witness(a, b, U, lam, h, tol)
    report = {"verb": "witness"}
    if not v:
        report["detail"] = v.detail
        report["index"] = v.witness
    return _verdict(v.ok, report)


def cmd_gamma_selftest(args, tol):
    rows = []
    worst = 0.0
    for s, x, ref in TABLE:
        got = numerics.upper_incomplete_gamma(s, x)
        rel = abs(got - ref) / abs(ref)
        worst = max(worst, rel)
        rows.append({"s": s, "x": x, "value": got, "reference": ref, "relative_error": rel})
    return _verdict(worst <= 1e-12, {"verb": "gamma-selftest", "backend": _kernels.backend(),
                                     "worst_relative_error": worst, "rows": rows})


COMMANDS = {
    "check-cp": cmd_check_cp, "canonical": cmd_canonical, "classify": cmd_classify,
    "choi-effros": cmd_choi_effros, "verify-qweight": cmd_verify_qweight, "skeleton": cmd_skeleton,
    "purity": cmd_purity, "subordinate": cmd_subordinate, "reduce": cmd_reduce,
    "witness": cmd_witness, "gamma-selftest": cmd_gamma_selftest,
}


# ------------------------------------------------------------------ output

def _text(obj, prefix=""):
    lines = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            key = f"{prefix}{k}"
            if isinstance(v, dict):
                lines.extend(_text(v, key + "."))
            elif isinstance(v, list) and v and isinstance(v[0], dict):
                for n, item in enumerate(v):
                    lines.extend(_text(item, f"{key}[{n}]."))
            else:
                lines.append(f"{key}: {io.dumps(v, indent=0).strip().replace(chr(10), '')}")
    else:
        lines.append(f"{prefix}: {obj}")
    return lines


def render(report, fmt):
    if fmt == "text":
        return "\n".join(_text(io.to_plain(report))) + "\n"
    return io.dumps(report)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--t-grid", default=None, help="start:stop:log:count (default: t = 2^-j, j = 0..14)")
    common.add_argument("--eps-psd", type=float, default=None)
    common.add_argument("--eps-eq", type=float, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("-o", "--output", default=None, help="output file (directory for reduce)")
    parser = argparse.ArgumentParser(prog="qwl", description="Certify completely positive maps and q-weight specs.")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")
    for verb in VERBS:
        p = sub.add_parser(verb, parents=[common])
        if verb != "gamma-selftest":
            p.add_argument("input", nargs=1)
    return parser


def run(argv=None, stdout=None):
    """Parse, dispatch, write the report; returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        tol = numerics.policy_from_env().with_overrides(eps_psd=args.eps_psd, eps_eq=args.eps_eq)
        args.grid = parse_grid(args.t_grid) if args.t_grid else dyadic_grid(14)
        code, report = COMMANDS[args.verb](args, tol)
    except ParseError as e:
        code, report = 2, {"verb": args.verb, "error": "ParseError", "field": e.field, "message": str(e)}
    except (QwlError, ValueError) as e:
        code, report = 2, {"verb": args.verb, "error": type(e).__name__, "message": str(e)}
    text = render(report, args.format)
    if args.output and args.verb != "reduce":
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if code == 2:
        print(f"qwl {args.verb}: {report.get('message')}", file=sys.stderr)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
