"""Command line front end: ``choquard {check,solve,constants,moser,tm-probe,fibering}``.

Exit codes: 0 success, 1 a check failed or a run did not converge, 2 the
configuration or the output location is unusable.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import model, moser, riesz, solver
from .config import DEFAULT_SEED, RunConfig, load_config
from .energy import EnergyFunctional, fibering_sign_changes
from .errors import ChoquardError, ConfigurationError, DomainError, FiberingError, NumericError, StagnationError
from .grid import build_log_grid, write_profile_csv
from .svg import write_line_plot

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("choquard")


def _dump_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _prepare_out(cfg: RunConfig) -> Path:
    out = cfg.out_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigurationError(f"output directory {out} is not writable ({exc.strerror})") from None
    _dump_json(out / "config.resolved.json", cfg.resolved())
    return out


def _growth_report(spec: model.ProblemSpec) -> model.GrowthReport:
    return model.check_growth(spec.f, spec.mu)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_check(cfg: RunConfig) -> int:
    out = _prepare_out(cfg)
    adm = model.check_admissible(cfg.problem)
    growth = _growth_report(cfg.problem)
    _dump_json(out / "check.json", {"admissibility": adm.to_dict(), "growth": growth.to_dict()})
    for entry in adm.entries:
        print(f"{'PASS' if entry.passed else 'FAIL'}  {entry.name}  {entry.detail}")
    for entry in growth.entries:
        tag = "PASS" if entry.passed else ("FAIL" if entry.name in growth.mandatory else "info")
        print(f"{tag}  {entry.name}  {entry.detail}")
    return EXIT_OK if adm.passed and growth.passed else EXIT_FAIL


def constants_payload(cfg: RunConfig) -> dict:
    spec = cfg.problem
    mu, b0, nl = spec.mu, spec.b0, spec.f
    payload = {
        "inputs": {"mu": mu, "b0": b0, "alpha0": nl.alpha0, "theta": nl.theta, "q_exp": nl.q_exp, "xi": nl.xi,
                   "V": spec.V.to_dict(), "Q": spec.Q.to_dict()},
        "alpha_TM": model.tm_threshold(mu, b0),
        "c0": model.c0_threshold(mu, b0, nl.alpha0, nl.theta),
        "moser_level_bound": model.moser_level_bound(mu, b0, nl.alpha0),
        "C_mu": riesz.hls_constant(mu),
    }
    ball_grid = build_log_grid(cfg.grid_params[0], 1.0, 2048)
    payload["xi1"] = model.xi1_constant(spec.V, spec.Q, ball_grid)
    if nl.q_exp is not None:
        req = model.xi_requirement(mu, b0, nl.alpha0, nl.theta, nl.q_exp, spec.V, spec.Q, ball_grid)
        payload["xi_requirement"] = req
        if nl.xi is not None:
            payload["xi_meets_requirement"] = bool(nl.xi >= req)
    return payload


def cmd_constants(cfg: RunConfig) -> int:
    out = _prepare_out(cfg)
    try:
        payload = constants_payload(cfg)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _dump_json(out / "constants.json", payload)
    for key in ("alpha_TM", "c0", "moser_level_bound", "C_mu", "xi1", "xi_requirement"):
        if key in payload:
            print(f"{key} = {payload[key]:.12g}")
    return EXIT_OK


def _kernel(cfg: RunConfig, grid):
    return riesz.assemble_kernel(grid, cfg.problem.mu)


def _file_logger(path: Path) -> logging.Handler:
    handler = logging.FileHandler(path, mode="w")
    handler.setFormatter(logging.Formatter("%(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    return handler


def cmd_solve(cfg: RunConfig) -> int:
    out = _prepare_out(cfg)
    spec = cfg.problem
    handler = _file_logger(out / "run.log")
    try:
        log.info("seed %d", cfg.seed)
        grid = cfg.grid()
        kernel = _kernel(cfg, grid)
        init = solver.gaussian_profile(grid, V=spec.V) if cfg.init == "gaussian" else solver.cutoff_profile(grid)
        try:
            sol = solver.solve_ground_state(spec, grid, kernel, init, tol=cfg.tol, max_iter=cfg.max_iter,
                                            seed=cfg.seed, log=log.info)
        except (StagnationError, FiberingError, NumericError) as exc:
            state = getattr(exc, "state", None)
            msg = f"solve failed: {exc}"
            if state is not None:
                dump = out / "state_dump.csv"
                write_profile_csv(dump, grid.nodes, {"u": state})
                msg += f" (state dumped to {dump})"
            log.info(msg)
            print(msg, file=sys.stderr)
            return EXIT_FAIL
        payload = sol.to_dict()
        payload["seed"] = cfg.seed
        payload["ps_bound"] = 2.0 * sol.theta / (sol.theta - 1.0) * sol.energy.J
        payload["level"] = solver.level_report(sol.energy.J, spec).to_dict()
        _dump_json(out / "solution.json", payload)
        conv = riesz.convolve(kernel, grid.function(EnergyFunctional(spec, kernel).source(sol.u.values)))
        write_profile_csv(out / "profile.csv", grid.nodes, {"u": sol.u.values, "convolution": conv.values})
        if cfg.svg:
            write_line_plot(out / "profile.svg", np.log10(grid.nodes),
                            {"u(r)": sol.u.values, "|x|^-mu * QF(u)": conv.values},
                            x_label="log10 r", title=f"J = {sol.energy.J:.6g}")
        log.info("converged=%s iterations=%d J=%.15g residual=%.3e", sol.converged, sol.iterations,
                 sol.energy.J, sol.residual_norm)
        print(f"J = {sol.energy.J:.12g}, residual = {sol.residual_norm:.3e}, iterations = {sol.iterations}")
        if not sol.converged:
            print("not converged", file=sys.stderr)
            return EXIT_FAIL
        return EXIT_OK
    finally:
        log.removeHandler(handler)
        handler.close()


def _tm_rows(cfg: RunConfig, grid):
    rows, summary = [], {}
    for alpha in cfg.alpha_list:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            values = moser.tm_probe(cfg.problem, grid, alpha, cfg.n_list)
        for n, T in zip(cfg.n_list, values):
            rows.append((alpha, n, T))
        summary[repr(alpha)] = {"alpha": alpha, "alpha_over_alpha_TM": alpha / model.tm_threshold(cfg.problem.mu, cfg.problem.b0),
                                "values": values, "growth_indicator": moser.growth_indicator(values),
                                "n_window": [min(cfg.n_list), max(cfg.n_list)]}
    return rows, summary


def _write_tm(out: Path, rows, summary) -> None:
    with (out / "tm_probe.csv").open("w") as fh:
        fh.write("alpha,n,T\n")
        for alpha, n, T in rows:
            fh.write(f"{alpha!r},{n},{T!r}\n")
    _dump_json(out / "tm_probe_summary.json", summary)


def _moser_grid(cfg: RunConfig):
    grid = cfg.grid()
    n_max = max(cfg.n_list)
    if not grid.r_min < 1.0 / n_max:
        raise ConfigurationError(f"grid.r_min={grid.r_min:g} does not reach inside 1/n={1.0 / n_max:g}")
    if grid.r_max < 1.0:
        raise ConfigurationError(f"grid.r_max={grid.r_max:g} must be at least 1 for Moser profiles")
    return grid


def cmd_moser(cfg: RunConfig) -> int:
    grid = _moser_grid(cfg)
    out = _prepare_out(cfg)
    with (out / "moser.csv").open("w") as fh:
        fh.write("n,grad_norm_sq,I_n,delta_n,delta_n_log_n\n")
        for n in cfg.n_list:
            d = moser.moser_diagnostics(n, cfg.problem.V, grid)
            fh.write(f"{n},{d.grad_norm_sq!r},{d.I_n!r},{d.delta_n!r},{d.delta_n_log_n!r}\n")
            print(f"n={n}: grad_norm_sq={d.grad_norm_sq:.8f} I_n={d.I_n:.6e} delta_n={d.delta_n:.6e} "
                  f"delta_n*log n={d.delta_n_log_n:.6f} (limit {d.limit_target:.6f})")
    rows, summary = _tm_rows(cfg, grid)
    _write_tm(out, rows, summary)
    return EXIT_OK


def cmd_tm_probe(cfg: RunConfig) -> int:
    grid = _moser_grid(cfg)
    out = _prepare_out(cfg)
    rows, summary = _tm_rows(cfg, grid)
    _write_tm(out, rows, summary)
    for item in summary.values():
        print(f"alpha={item['alpha']:.6g} ({item['alpha_over_alpha_TM']:.3g} alpha_TM): "
              f"growth indicator {item['growth_indicator']:.6g}")
    return EXIT_OK


def cmd_fibering(cfg: RunConfig) -> int:
    out = _prepare_out(cfg)
    spec = cfg.problem
    grid = cfg.grid()
    kernel = _kernel(cfg, grid)
    u = solver.gaussian_profile(grid, V=spec.V)
    E = EnergyFunctional(spec, kernel)
    try:
        t, J = E.fibering_maximize(u.values)
    except FiberingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    payload = {"t_star": t, "J_at_t_star": J, "nehari_residual": E.nehari(t * u.values),
               "norm_sq_at_t_star": E.inner(t * u.values, t * u.values),
               "slope_sign_changes": fibering_sign_changes(u, spec, kernel)}
    _dump_json(out / "fibering.json", payload)
    print(f"t* = {t:.15g}, J(t* u) = {J:.12g}")
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "solve": cmd_solve,
    "constants": cmd_constants,
    "moser": cmd_moser,
    "tm-probe": cmd_tm_probe,
    "fibering": cmd_fibering,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="choquard", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON run configuration (schema 1)")
    parser.add_argument("--out", default=None, help="output directory (overrides outputs.dir)")
    parser.add_argument("--seed", type=int, default=None, help=f"random seed (default: config seed or {DEFAULT_SEED})")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config).with_overrides(out_dir=args.out, seed=args.seed)
        return COMMANDS[args.command](cfg)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ChoquardError as exc:  # pragma: no cover - defensive
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
