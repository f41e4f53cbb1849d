"""Command-line front end.

Subcommands: state, extend, sweep, werner-threshold, lhv, polytope.
States are addressed inline as ``name:key=val,...`` (werner, ch, tiles,
pyramid, maxent, separable) or as a path to a JSON file holding the
matrix format with a "dims" field.  Results are written as JSON/CSV with
12 significant digits; identical argv and seed give byte-identical
output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import extensions, lhv, sdp, states, tensor

EXIT_OK = 0
EXIT_INDETERMINATE = 1
EXIT_USAGE = 2


def _fmt(value):
    """Round floats to 12 significant digits, recursively."""
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if isinstance(value, (np.floating,)):
        return float(f"{float(value):.12g}")
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {k: _fmt(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_fmt(v) for v in value]
    return value


def _dump_json(obj, path: str | None) -> str:
    text = json.dumps(_fmt(obj), sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _check_writable(paths) -> None:
    for path in paths:
        if not path:
            continue
        parent = os.path.dirname(os.path.abspath(path))
        if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
            raise SystemExit(f"output path not writable: {path}")
        if os.path.isdir(path):
            raise SystemExit(f"output path is a directory: {path}")


def _parse_kv(text: str) -> dict:
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise ValueError(f"expected key=value, got {item!r}")
        key, val = item.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def parse_state(spec: str, default_seed: int = 0) -> states.BipartiteState:
    """Inline zoo grammar ``name:key=val,...`` or a JSON file path."""
    name, _, args = spec.partition(":")
    kv = None
    try:
        kv = _parse_kv(args)
    except ValueError:
        kv = None
    key = name.strip().lower().replace("_", "-")
    if kv is not None:
        if key == "werner":
            return states.werner(int(kv.get("d", 2)), float(kv["phi"]))
        if key in ("ch", "choi-horodecki"):
            return states.choi_horodecki(float(kv["alpha"]))
        if key == "tiles":
            return states.upb_state(states.tiles_upb())
        if key == "pyramid":
            return states.upb_state(states.pyramid_upb())
        if key in ("maxent", "max-entangled"):
            return states.max_entangled(int(kv.get("d", 2)))
        if key in ("separable", "random-separable"):
            return states.random_separable(
                int(kv.get("d_a", 3)), int(kv.get("d_b", 3)),
                int(kv.get("k", 4)), int(kv.get("seed", default_seed)))
    with open(spec) as fh:
        data = json.load(fh)
    if "dims" not in data:
        raise ValueError(f"state file {spec} lacks a 'dims' field")
    d_a, d_b = (int(v) for v in data["dims"])
    rho = tensor.matrix_from_json(data)
    state = states.BipartiteState(rho=tensor.hermitize(rho), dims=(d_a, d_b),
                                  label=os.path.basename(spec))
    states.check_state(state)
    return state


def state_to_json(state: states.BipartiteState) -> dict:
    out = tensor.matrix_to_json(state.rho)
    out["dims"] = [state.d_a, state.d_b]
    out["label"] = state.label
    return out


def _parse_shape(text: str, state: states.BipartiteState) -> extensions.ExtensionShape:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"shape must be 's_a,s_b', got {text!r}")
    return extensions.ExtensionShape(state.d_a, state.d_b, int(parts[0]), int(parts[1]))


def _verdict_json(verdict: extensions.ExtensionVerdict) -> dict:
    out = {
        "kind": verdict.kind_label,
        "decision": verdict.decision,
        "optimum": verdict.optimum,
        "solver": {
            "status": verdict.solver_status,
            "gap": verdict.solver_gap,
            "iterations": verdict.solver_iterations,
        },
        "message": verdict.message,
    }
    if verdict.residuals is not None:
        out["residuals"] = verdict.residuals.as_dict()
    if verdict.dual_certificate is not None:
        out["dual_certificate"] = tensor.matrix_to_json(verdict.dual_certificate)
    return out


def certificate_to_json(verdict: extensions.ExtensionVerdict,
                        shape: extensions.ExtensionShape) -> dict:
    out = tensor.matrix_to_json(verdict.certificate)
    out["factor_dims"] = list(shape.factor_dims)
    out["shape"] = {"d_a": shape.d_a, "d_b": shape.d_b, "s_a": shape.s_a, "s_b": shape.s_b}
    out["kind"] = verdict.kind_label
    out["optimum"] = verdict.optimum
    return out


def load_certificate(path: str):
    with open(path) as fh:
        data = json.load(fh)
    sh = data["shape"]
    shape = extensions.ExtensionShape(int(sh["d_a"]), int(sh["d_b"]), int(sh["s_a"]), int(sh["s_b"]))
    return tensor.matrix_from_json(data), shape


def _cmd_state(args) -> int:
    state = parse_state(args.state, args.seed)
    _check_writable([args.out])
    text = _dump_json(state_to_json(state), args.out)
    if not args.out:
        sys.stdout.write(text)
    else:
        print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_extend(args) -> int:
    state = parse_state(args.state, args.seed)
    shape = _parse_shape(args.shape, state)
    _check_writable([args.out, args.certificate_out, args.dump_sdp])
    verdict = extensions.decide(state, shape, args.kind, tol=args.tol,
                                dump_sdp=args.dump_sdp)
    body = _verdict_json(verdict)
    body["state"] = state.label
    body["shape"] = [shape.s_a, shape.s_b]
    text = _dump_json(body, args.out)
    if verdict.certificate is not None and args.certificate_out:
        _dump_json(certificate_to_json(verdict, shape), args.certificate_out)
    print(f"decision={verdict.decision} optimum={verdict.optimum:.12g} kind={verdict.kind_label}")
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK if verdict.decision != extensions.DECISION_INDETERMINATE else EXIT_INDETERMINATE


def _family(args):
    if args.family == "ch":
        return states.choi_horodecki
    if args.family == "werner":
        d = args.d
        return lambda phi: states.werner(d, phi)
    raise ValueError(f"unknown family {args.family!r}")


def _cmd_sweep(args) -> int:
    _check_writable([args.out])
    probe = _family(args)(args.lo)
    shape = _parse_shape(args.shape, probe)
    result = extensions.sweep_threshold(_family(args), shape, args.kind,
                                        args.lo, args.hi, args.res, tol=args.tol)
    lines = ["parameter,optimum,decision"]
    for param, optimum, decision in sorted(result.evaluations):
        lines.append(f"{param:.12g},{optimum:.12g},{decision}")
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    print(f"status={result.status} bracket=[{result.bracket_lo:.12g},{result.bracket_hi:.12g}] "
          f"estimate={result.estimate:.12g}")
    return EXIT_OK if result.status == "ok" else EXIT_INDETERMINATE


def _cmd_werner_threshold(args) -> int:
    parts = args.shape.split(",")
    if len(parts) != 2:
        raise ValueError(f"shape must be 's_a,s_b', got {args.shape!r}")
    s_a, s_b = int(parts[0]), int(parts[1])
    lam, phi_min = extensions.werner_threshold(args.d, s_a, s_b)
    print(f"phi_min = {phi_min:.12g}")
    _check_writable([args.out])
    body = {"d": args.d, "s_a": s_a, "s_b": s_b, "lambda_m": lam, "phi_min": phi_min}
    text = _dump_json(body, args.out)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def load_povms(path: str) -> tuple[lhv.PovmSet, lhv.PovmSet]:
    with open(path) as fh:
        data = json.load(fh)
    sets = []
    for party in ("a", "b"):
        settings = [[tensor.matrix_from_json(e) for e in setting] for setting in data[party]]
        sets.append(lhv.PovmSet(settings))
    return sets[0], sets[1]


def _cmd_lhv(args) -> int:
    state = parse_state(args.state, args.seed)
    shape = _parse_shape(args.shape, state)
    _check_writable([args.out])
    a_povms, b_povms = load_povms(args.povms)
    verdict = extensions.decide(state, shape, args.kind, tol=args.tol)
    if verdict.decision != extensions.DECISION_EXISTS:
        print(f"decision={verdict.decision} optimum={verdict.optimum:.12g}; no LHV model extracted")
        return EXIT_INDETERMINATE
    if a_povms.n_settings == shape.s_a and b_povms.n_settings == shape.s_b:
        model = lhv.lhv_from_extension(verdict.certificate, a_povms, b_povms)
    elif shape.s_a == 1 and b_povms.n_settings == shape.s_b:
        model = lhv.lhv_from_one_sided(verdict.certificate, a_povms, b_povms)
    else:
        raise ValueError(
            f"POVM setting counts ({a_povms.n_settings},{b_povms.n_settings}) do not match "
            f"shape ({shape.s_a},{shape.s_b}); only s_a=1 certificates allow extra Alice settings")
    model.validate()
    quantum = lhv.quantum_probabilities(state, a_povms, b_povms)
    residual = lhv.reconstruct(model).max_difference(quantum)
    body = {
        "state": state.label,
        "shape": [shape.s_a, shape.s_b],
        "weights": [{"m": list(m), "n": list(n), "p": p} for m, n, p in model.entries()],
        "reconstruction_residual": residual,
        "min_weight": float(model.weights.min()),
        "weight_sum": float(model.weights.sum()),
    }
    text = _dump_json(body, args.out)
    if not args.out:
        sys.stdout.write(text)
    else:
        print(f"wrote {args.out} (reconstruction residual {residual:.3g})")
    return EXIT_OK


def _cmd_polytope(args) -> int:
    with open(args.scenario) as fh:
        sc_data = json.load(fh)
    scenario = lhv.MeasurementScenario(tuple(sc_data["outcomes_a"]), tuple(sc_data["outcomes_b"]))
    with open(args.p) as fh:
        p_data = json.load(fh)
    p = lhv.ProbabilityVector(scenario, np.array(p_data["table"], dtype=float))
    p.validate()
    _check_writable([args.out])
    verdict = lhv.polytope_membership(p, solver_tol=args.tol)
    body = verdict.as_dict()
    if verdict.weights is not None:
        body["weights"] = [{"m": list(m), "n": list(n), "p": w}
                           for m, n, w in verdict.weights.entries()]
    text = _dump_json(body, args.out)
    print("inside" if verdict.inside else
          f"outside value={verdict.value:.12g} local_bound={verdict.local_bound:.12g}")
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lhvcert",
        description="Symmetric (quasi-)extension certificates and LHV models "
                    "for bipartite states.")
    parser.add_argument("--seed", type=int, default=0, help="default seed for random zoo states")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("state", help="emit a zoo state as JSON")
    sp.add_argument("--state", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_state)

    sp = sub.add_parser("extend", help="decide (quasi-)extension existence")
    sp.add_argument("--state", required=True)
    sp.add_argument("--shape", required=True, help="s_a,s_b")
    sp.add_argument("--kind", choices=["positive", "decomposable"], default="positive")
    sp.add_argument("--tol", type=float, default=extensions.DEFAULT_SOLVER_TOL)
    sp.add_argument("--certificate-out")
    sp.add_argument("--dump-sdp")
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_extend)

    sp = sub.add_parser("sweep", help="bisect a family's extension threshold")
    sp.add_argument("--family", choices=["ch", "werner"], required=True)
    sp.add_argument("--d", type=int, default=2, help="local dimension for the werner family")
    sp.add_argument("--shape", required=True)
    sp.add_argument("--kind", choices=["positive", "decomposable"], default="positive")
    sp.add_argument("--lo", type=float, required=True)
    sp.add_argument("--hi", type=float, required=True)
    sp.add_argument("--res", type=float, default=0.005)
    sp.add_argument("--tol", type=float, default=extensions.DEFAULT_SOLVER_TOL)
    sp.add_argument("--out", help="CSV output path")
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("werner-threshold", help="analytic Werner extension threshold")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--shape", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_werner_threshold)

    sp = sub.add_parser("lhv", help="extract an LHV model from a certificate")
    sp.add_argument("--state", required=True)
    sp.add_argument("--shape", required=True)
    sp.add_argument("--kind", choices=["positive", "decomposable"], default="positive")
    sp.add_argument("--povms", required=True, help="JSON with per-party POVMs")
    sp.add_argument("--tol", type=float, default=extensions.DEFAULT_SOLVER_TOL)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_lhv)

    sp = sub.add_parser("polytope", help="local polytope membership")
    sp.add_argument("--p", required=True, help="JSON with the probability table")
    sp.add_argument("--scenario", required=True, help="JSON with outcome counts")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_polytope)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE


if __name__ == "__main__":
    sys.exit(main())
