"""Command line front end: ``jstab <command> [options]``.

Exit codes: 0 ok, 2 configuration error, 3 no convergence (the trajectory is
still written), 4 runtime invariant violation.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from . import corpus, criteria, energy, flow, stability
from .bergman import HermitianMetric, MetricError
from .geometry import GeometryError, ModelManifold, MomentPolynomial
from .polyalg import Ideal, PolyAlgError, Polynomial, WeightVector
from .qfield import QNumber, exact_str

__version__ = "0.1.0"
TOOL = "jstab"

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_INVARIANT = 0, 2, 3, 4

CITATIONS = {
    "chow": "twisted Chow weight of a linear-system member",
    "jweight": "J-weight of a test configuration",
    "df": "Donaldson-Futaki invariant",
    "norm": "minimum norm of a test configuration",
    "approx": "rational weights with the same flat limit",
    "balance": "rescaled J-balancing flow",
    "jflow": "J-flow on torus-invariant potentials",
    "energy": "energy functionals on potentials",
    "criteria": "sufficient nefness criteria",
    "xcheck": "asymptotic slope and quantization cross-checks",
}


class ConfigError(ValueError):
    pass


CONFIG_ERRORS = (ConfigError, PolyAlgError, stability.StabilityError, criteria.CriteriaError,
                 energy.EnergyError, json.JSONDecodeError, FileNotFoundError)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, (Fraction, QNumber)):
        return exact_str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def config_hash(config: Dict[str, Any]) -> str:
    text = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def envelope(command: str, config: Dict[str, Any], result: Dict[str, Any]) -> Dict[str, Any]:
    return {
        "meta": {
            "tool": TOOL,
            "version": __version__,
            "configHash": config_hash(config),
            "seed": config.get("seed", 0),
            "quantity": command,
            "citation": CITATIONS[command],
            "config": _jsonable(config),
        },
        "result": _jsonable(result),
    }


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(text: str, path: Optional[str]):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_with_header(csv_text: str, config: Dict[str, Any], command: str) -> str:
    head = f"# {TOOL} {__version__} {command} configHash={config_hash(config)} seed={config.get('seed', 0)}\n"
    return head + csv_text


# ---------------------------------------------------------------------------
# input parsing
# ---------------------------------------------------------------------------

def _read_json(path: str, where: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"{where}: file {path!r} not found")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{where}: invalid JSON in {path!r} ({exc.msg} at line {exc.lineno})")


def load_model(spec: str) -> ModelManifold:
    """A model JSON file or a built-in name (P1, P2, P1xP1)."""
    if spec in ("P1", "P2", "P1xP1"):
        return ModelManifold.create(spec)
    data = _read_json(spec, "--model")
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError("--model: expected an object with key 'kind'")
    try:
        return ModelManifold.from_dict(data)
    except (GeometryError, TypeError, ValueError) as exc:
        raise ConfigError(f"--model: {exc}")


def parse_weights(text: str, d: int) -> WeightVector:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigError("--weights: empty weight vector")
    return WeightVector.of(parts, d)


def load_ideal(spec: str) -> Ideal:
    """An ideal JSON file (list of generators) or a corpus name."""
    if spec in corpus.names():
        return corpus.named(spec)
    data = _read_json(spec, "--ideal")
    if isinstance(data, dict):
        gens, nvars = data.get("generators"), data.get("nvars")
    else:
        gens, nvars = data, None
    if not isinstance(gens, list) or not all(isinstance(g, str) for g in gens):
        raise ConfigError("--ideal: expected a list of polynomial strings")
    if nvars is None and not gens:
        raise ConfigError("--ideal: the zero ideal needs 'nvars'")
    return Ideal.parse(gens, nvars)


def stability_config(args) -> Dict[str, Any]:
    cfg: Dict[str, Any] = {}
    if args.config:
        data = _read_json(args.config, "--config")
        if not isinstance(data, dict):
            raise ConfigError("--config: expected an object")
        unknown = set(data) - {"ideal", "weights", "d", "r", "n", "L2degree", "divisor", "samples", "epsilon"}
        if unknown:
            raise ConfigError(f"--config: unknown keys {sorted(unknown)}")
        cfg.update(data)
    for key in ("ideal", "weights", "d", "r", "n", "L2degree", "divisor", "samples", "epsilon"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if "ideal" not in cfg or "weights" not in cfg:
        raise ConfigError("stability commands need 'ideal' and 'weights'")
    cfg.setdefault("d", 0)
    cfg.setdefault("r", 1)
    cfg.setdefault("L2degree", 1)
    cfg.setdefault("samples", 5)
    return cfg


def _test_configuration(cfg) -> stability.TestConfiguration:
    ideal = cfg["ideal"]
    ideal = load_ideal(ideal) if isinstance(ideal, str) else Ideal.parse(ideal)
    w = cfg["weights"]
    weights = parse_weights(w, int(cfg["d"])) if isinstance(w, str) else WeightVector.of(
        [str(v) for v in w], int(cfg["d"]))
    if len(weights) != ideal.nvars:
        raise ConfigError(f"weights: expected {ideal.nvars} entries, got {len(weights)}")
    return stability.TestConfiguration.create(ideal, weights, r=int(cfg["r"]), n=cfg.get("n"), d=int(cfg["d"]))


def _moment_poly(spec, where) -> Optional[MomentPolynomial]:
    if spec is None:
        return None
    data = _read_json(spec, where) if isinstance(spec, str) and spec.endswith(".json") else json.loads(spec)
    if isinstance(data, dict):
        data = data.get("coeffs")
    try:
        return MomentPolynomial(np.asarray(data, dtype=float))
    except (GeometryError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}")


def _threads() -> int:
    v = os.environ.get("JSTAB_THREADS")
    if v is None:
        return os.cpu_count() or 1
    try:
        return max(1, int(v))
    except ValueError:
        raise ConfigError("JSTAB_THREADS must be an integer")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_stability(args) -> int:
    cfg = stability_config(args)
    cfg["seed"] = args.seed
    tc = _test_configuration(cfg)
    samples = int(cfg["samples"])
    cmd = args.command
    result: Dict[str, Any] = {"weights": str(tc.weights), "n": tc.n, "r": tc.r}
    if cmd == "chow":
        if cfg.get("divisor"):
            g = Polynomial.parse(cfg["divisor"], tc.ideal.nvars)
            result["chowWeight"] = stability.chow_weight(tc, g)
            result["divisor"] = str(g)
        else:
            gv = stability.chow_weight_linear_system(tc, int(cfg["L2degree"]), samples, args.seed)
            result.update(chowWeight=gv.value, counts=gv.counts, samples=gv.samples, skipped=gv.skipped)
    elif cmd == "jweight":
        g = Polynomial.parse(cfg["divisor"], tc.ideal.nvars) if cfg.get("divisor") else "generic"
        result["jWeight"] = stability.j_weight(tc, g, int(cfg["L2degree"]), samples, args.seed)
    elif cmd == "df":
        result["df"] = stability.df_invariant(tc)
        data = stability.weight_polynomials(tc)
        result.update(a0=data.a0, a1=data.a1, b0=data.b0, b1=data.b1)
    elif cmd == "norm":
        result["minimumNorm"] = stability.minimum_norm(tc, samples, args.seed)
    elif cmd == "approx":
        eps = Fraction(str(cfg.get("epsilon", "1/10")))
        approx = stability.rational_approximation(tc, epsilon=eps)
        result.update(approximation=str(approx), initialIdeal=str(
            [str(g) for g in stability.initial_ideal(tc.ideal, approx).generators]))
    _emit(dumps(envelope(cmd, cfg, result)), args.out)
    return EXIT_OK


def cmd_balance(args) -> int:
    model = load_model(args.model)
    psi = _moment_poly(args.psi, "--psi")
    N1 = model.section_count(args.k)
    if args.H0:
        H0 = HermitianMetric.from_json(Path(args.H0).read_text()).matrix
        if H0.shape != (N1, N1):
            raise ConfigError(f"--H0: expected a {N1}x{N1} matrix")
    else:
        rng = np.random.default_rng(args.seed)
        H0 = np.diag(np.exp(rng.normal(0.0, args.perturb, N1))).astype(complex)
    cfg = {"model": model.to_dict(), "k": args.k, "tol": args.tol, "dt": args.dt, "maxSteps": args.max_steps,
           "perturb": args.perturb, "H0": args.H0, "psi": None if psi is None else psi.coeffs.tolist(),
           "seed": args.seed}
    traj = flow.run_balancing_flow(model, args.k, H0, dt=args.dt, tol=args.tol, max_steps=args.max_steps, psi=psi)
    if args.out:
        Path(args.out).write_text(_csv_with_header(traj.to_csv(), cfg, "balance"))
    if args.plot:
        from .plotting import plot_balancing
        plot_balancing(traj, args.plot)
    final = flow.normalize_scale(traj.final)
    result = {"converged": traj.converged, "steps": len(traj.times) - 1, "finalResidual": traj.residuals[-1],
              "finalTime": traj.times[-1], "normalizedDiagonal": [float(v) for v in final.diagonal().real]}
    _emit(dumps(envelope("balance", cfg, result)), args.summary)
    return EXIT_OK if traj.converged else EXIT_NONCONVERGED


def cmd_jflow(args) -> int:
    model = load_model(args.model)
    phi0 = _moment_poly(args.phi0, "--phi0")
    psi = _moment_poly(args.psi, "--psi")
    cfg = {"model": model.to_dict(), "grid": args.grid, "tmax": args.tmax, "tol": args.tol,
           "phi0": None if phi0 is None else phi0.coeffs.tolist(),
           "psi": None if psi is None else psi.coeffs.tolist(), "seed": args.seed}
    problem = flow.JFlowProblem(model, psi)
    grid = flow.make_grid(model, args.grid, phi0)
    traj = flow.run_jflow(problem, grid, args.tmax, tol=args.tol, record_every=args.every)
    if args.out:
        Path(args.out).write_text(_csv_with_header(traj.to_csv(), cfg, "jflow"))
    if args.plot:
        from .plotting import plot_jflow
        plot_jflow(traj, args.plot)
    result = {"converged": traj.converged, "finalTime": traj.times[-1], "finalResidual": traj.residuals[-1],
              "meanValueDefect": problem.mean_value_defect(traj.grid)}
    _emit(dumps(envelope("jflow", cfg, result)), args.summary)
    return EXIT_OK if traj.converged else EXIT_NONCONVERGED


def _potential(spec, model, where) -> energy.Potential:
    data = _read_json(spec, where) if spec.endswith(".json") else json.loads(spec)
    if isinstance(data, dict) and "bergman" in data:
        b = data["bergman"]
        return energy.BergmanPotential(model, int(b["k"]), b["logc"])
    if isinstance(data, dict):
        data = data.get("coeffs")
    return energy.MomentPotential(np.asarray(data, dtype=float))


def cmd_energy(args) -> int:
    model = load_model(args.model)
    phi = _potential(args.phi, model, "--phi")
    psi = _potential(args.psi, model, "--psi") if args.psi else None
    if phi.n != model.n or (psi is not None and psi.n != model.n):
        raise ConfigError("--phi/--psi: number of variables does not match the model")
    chi = energy.Chi.of(model, None, psi)
    cfg = {"model": model.to_dict(), "phi": args.phi, "psi": args.psi, "all": args.all, "seed": args.seed}
    result: Dict[str, Any] = {
        "jhat": energy.j_hat(model, phi, chi),
        "iEnergy": energy.i_energy(model, phi),
        "jAym": energy.j_aym(model, phi),
    }
    if args.all:
        result["mabuchi"] = energy.mabuchi(model, phi)
        rng = np.random.default_rng(args.seed)
        lam = rng.normal(0.0, 1.0, model.section_count(1))
        fam = energy.diverging_family(model, 1, lam, [0, 1, 5, 20, 50])
        rep = energy.coercivity_margin(model, chi, fam)
        result["margins"] = {"gamma": rep.gamma, "margin": rep.margin,
                             "samples": [{"I": i, "value": v} for i, v in rep.samples]}
    _emit(dumps(envelope("energy", cfg, result)), args.out)
    return EXIT_OK


def _class(model: criteria.IntersectionModel, text: Optional[str]):
    if text is None:
        return None
    if text.strip().lower() == "canonical":
        return model.canonical
    return model.cls([p.strip() for p in text.split(",")])


def cmd_criteria(args) -> int:
    if args.fan:
        model = criteria.toric_surface_from_fan(criteria.parse_fan(args.fan), "fan")
    else:
        model = criteria.builtin(args.model or "P1xP1")
    L1 = _class(model, args.L1)
    L2 = _class(model, args.L2)
    cfg = {"model": args.model, "fan": args.fan, "L1": args.L1, "L2": args.L2, "mode": args.mode,
           "klt": not args.no_klt, "seed": args.seed}
    v = criteria.check_criteria(model, L1, L2, args.mode, klt=not args.no_klt)
    result = v.to_dict()
    if model.toric:
        result["selfIntersections"] = list(model.self_intersections)
    _emit(dumps(envelope("criteria", cfg, result)), args.out)
    return EXIT_OK


def _gap_job(job):
    model_dict, k, t, phi0, cells, dt = job
    model = ModelManifold.from_dict(model_dict)
    phi = MomentPolynomial(np.asarray(phi0)) if phi0 is not None else None
    problem = flow.JFlowProblem(model)
    jf = flow.run_jflow(problem, flow.make_grid(model, cells, phi), t, snapshot_times=[t], stop_at_tol=False,
                        record_every=50, tag=flow._tag(model, phi, None))
    bf = flow.run_quantized_flow(model, k, t, phi, None, dt)
    return flow.quantization_gap(model, k, t, bf, jf)


def cmd_xcheck(args) -> int:
    model = load_model(args.model)
    cfg = {"model": model.to_dict(), "A": args.A, "D": args.D, "d": args.d, "r": args.r, "tmax": args.tmax,
           "gap": args.gap, "ks": args.ks, "t": args.t, "grid": args.grid, "seed": args.seed}
    result: Dict[str, Any] = {}
    rows: List[str] = []
    if args.A is not None:
        if model.kind != "P1":
            raise ConfigError("--A/--D slope checks run on P1 models")
        weights = parse_weights(args.A, args.d)
        g = Polynomial.parse(args.D, len(weights))
        res = energy.asymptotic_slope_iaym(model, g, weights, r=args.r, t_max=args.tmax)
        result["slope"] = {"numeric": res.numeric, "algebraic": res.algebraic, "relativeGap": res.gap,
                           "history": list(res.history)}
        rows.append(f"slope   numeric={res.numeric:+.6f}  algebraic={exact_str(res.algebraic)}  gap={res.gap:.2e}")
        if args.plot:
            from .plotting import plot_slope
            plot_slope(res.history, [args.tmax / 4, args.tmax / 2, args.tmax], float(res.algebraic),
                       args.plot + "_slope.png")
    if args.gap:
        ks = [int(k) for k in args.ks.split(",")]
        phi0 = None
        if model.kind in ("P1", "P1xP1"):
            phi0 = _moment_poly(args.phi0, "--phi0")
        jobs = [(model.to_dict(), k, args.t, None if phi0 is None else phi0.coeffs.tolist(), args.grid, args.dt)
                for k in ks]
        workers = min(_threads(), len(jobs))
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                gaps = list(pool.map(_gap_job, jobs))
        else:
            gaps = [_gap_job(j) for j in jobs]
        result["quantizationGap"] = {"ks": ks, "gaps": gaps, "t": args.t,
                                     "decreasing": all(b < a for a, b in zip(gaps, gaps[1:]))}
        rows += [f"gap     k={k:<3d} {v:.6e}" for k, v in zip(ks, gaps)]
        if args.plot:
            from .plotting import plot_gap
            plot_gap(ks, gaps, args.t, args.plot + "_gap.png")
    if not rows:
        raise ConfigError("xcheck needs --A/--D and/or --gap")
    sys.stderr.write("\n".join(rows) + "\n")
    _emit(dumps(envelope("xcheck", cfg, result)), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=TOOL, description="J-stability, balanced metrics and related flows.")
    p.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_help="write JSON here instead of stdout"):
        sp.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        sp.add_argument("--out", help=out_help)

    for name, help_ in (("chow", "twisted Chow weight"), ("jweight", "J-weight"), ("df", "Donaldson-Futaki invariant"),
                        ("norm", "minimum norm"), ("approx", "rational approximation of irrational weights")):
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.add_argument("--config", help="JSON with keys ideal, weights, d, r, n, L2degree, divisor")
        sp.add_argument("--ideal", help="ideal JSON file or corpus name (" + ", ".join(corpus.names()) + ")")
        sp.add_argument("--weights", help='comma separated, e.g. "2,0,-1" or "w,0,-w" with --d 2')
        sp.add_argument("--d", type=int, help="radicand for w = sqrt(d)")
        sp.add_argument("--r", type=int, help="embedding level")
        sp.add_argument("--n", type=int, help="dimension (inferred if omitted)")
        sp.add_argument("--L2degree", type=int, help="degree of the generic divisor")
        sp.add_argument("--divisor", "--D", dest="divisor", help="explicit divisor equation")
        sp.add_argument("--samples", type=int, help="generic samples (default 5)")
        if name == "approx":
            sp.add_argument("--epsilon", help="tolerance (default 1/10)")
        sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("balance", help="run the balancing flow")
    common(sp, "trajectory CSV")
    sp.add_argument("--model", required=True, help="model JSON or P1/P2/P1xP1")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--dt", type=float, default=0.1)
    sp.add_argument("--max-steps", type=int, default=500)
    sp.add_argument("--perturb", type=float, default=0.3, help="spread of the random diagonal start")
    sp.add_argument("--H0", help="initial metric JSON")
    sp.add_argument("--psi", help="chi perturbation: moment polynomial coefficients (JSON)")
    sp.add_argument("--summary", help="write the JSON summary here instead of stdout")
    sp.add_argument("--plot", help="PNG path")
    sp.set_defaults(func=cmd_balance)

    sp = sub.add_parser("jflow", help="run the J-flow")
    common(sp, "trajectory CSV")
    sp.add_argument("--model", required=True)
    sp.add_argument("--grid", type=int, default=64, help="cells per direction")
    sp.add_argument("--tmax", type=float, default=5.0)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--every", type=int, default=10, help="record every n steps")
    sp.add_argument("--phi0", help="initial potential: moment polynomial coefficients (JSON)")
    sp.add_argument("--psi", help="chi perturbation: moment polynomial coefficients (JSON)")
    sp.add_argument("--summary")
    sp.add_argument("--plot")
    sp.set_defaults(func=cmd_jflow)

    sp = sub.add_parser("energy", help="energy functionals of a potential")
    common(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--phi", required=True, help='coefficients JSON, or {"bergman": {"k":..,"logc":[..]}}')
    sp.add_argument("--psi")
    sp.add_argument("--all", action="store_true", help="also Mabuchi and coercivity margins")
    sp.set_defaults(func=cmd_energy)

    sp = sub.add_parser("criteria", help="nefness criteria")
    common(sp)
    sp.add_argument("--model", help="built-in P1, P2 or P1xP1")
    sp.add_argument("--fan", help='toric surface rays, e.g. "1,0;0,1;-1,1;0,-1"')
    sp.add_argument("--L1", required=True)
    sp.add_argument("--L2", help='class or "canonical"')
    sp.add_argument("--mode", required=True, choices=criteria.MODES)
    sp.add_argument("--no-klt", action="store_true")
    sp.set_defaults(func=cmd_criteria)

    sp = sub.add_parser("xcheck", help="slope and quantization cross-checks")
    common(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--A", help="diagonal weights on the sections of L1^r")
    sp.add_argument("--D", default="Z1", help="divisor equation in the section variables")
    sp.add_argument("--d", type=int, default=0)
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--tmax", type=float, default=20.0)
    sp.add_argument("--gap", action="store_true", help="run the quantization-gap sweep")
    sp.add_argument("--ks", default="2,4")
    sp.add_argument("--t", type=float, default=0.5)
    sp.add_argument("--grid", type=int, default=32)
    sp.add_argument("--dt", type=float, default=0.0025)
    sp.add_argument("--phi0")
    sp.add_argument("--plot", help="PNG path prefix")
    sp.set_defaults(func=cmd_xcheck)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CONFIG_ERRORS as exc:
        sys.stderr.write(f"{TOOL} {args.command}: configuration error: {exc}\n")
        return EXIT_CONFIG
    except (MetricError, flow.FlowError) as exc:
        sys.stderr.write(f"{TOOL} {args.command}: invariant violated: {exc}\n")
        return EXIT_INVARIANT
    except GeometryError as exc:
        sys.stderr.write(f"{TOOL} {args.command}: configuration error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
