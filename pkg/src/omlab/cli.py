"""Command line driver: one JSON config in, CSV/JSON artifacts plus a run manifest out.

Exit codes: 0 success, 2 invalid config or parameters, 3 a theorem hypothesis
failed validation, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import platform
import sys
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from . import config as C
from .densities import validate_assumptions
from .errors import HypothesisError, NumericalError, SpecError
from .mapest import (LinearGaussian, convergence_rows_to_csv, gaussian_map_closed_form, laplace_identity_map,
                     map_convergence_experiment, multistart_map, posterior_objective, solve_map)
from .measures import draws_to_csv, sample, support_diagnostic
from .om import formal_neg_log_density, gamma_probe, probe_to_csv, sublevel_box
from .shift import kakutani_product, shepp_test, shift_density_generic
from .smallball import (BallSpec, continuity_ratio_check, lemma_suite, mc_ball_mass, om_ratio_experiment,
                        perturbation_taylor_check, quad_ball_mass, ratio_rows_to_csv)
from .weights import Point, gamma_summability_check

COMMANDS = ("validate", "sample", "om-eval", "shift-density", "dichotomy", "small-ball", "om-ratio",
            "continuity-ratio", "gamma-probe", "equicoercivity-box", "map", "map-converge", "lemma-checks")

DEFAULT_R = [0.5, 0.25, 0.125, 0.0625]


def _g(v) -> str:
    return "%.17g" % v


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


class Run:
    """Single writer for the artifacts of one command."""

    def __init__(self, out: Path, cfg: dict, command: str, workers: int):
        self.out, self.cfg, self.command, self.workers = out, cfg, command, workers
        self.seed = int(cfg["seed"])
        self.spec = C.build_measure(cfg)
        out.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        (self.out / name).write_text(text, encoding="utf-8", newline="\n")

    def point(self, key: str, default: Point | None = None) -> Point:
        if key in self.cfg:
            return C.build_point(self.cfg[key], self.spec)
        if default is None:
            raise SpecError(f"this command needs '{key}'")
        return default

    def K(self, default: int | None = None) -> int:
        if "K" in self.cfg:
            return int(self.cfg["K"])
        if default is None:
            raise SpecError("this command needs 'K'")
        return default

    def grid(self, key: str, default=None):
        g = self.cfg.get("grids", {}).get(key, default)
        if g is None:
            raise SpecError(f"this command needs grids.{key}")
        return g

    def n(self, default: int = 100_000) -> int:
        return int(self.cfg.get("mc", {}).get("n", default))


def cmd_validate(run: Run) -> None:
    spec = run.spec
    rep = validate_assumptions(spec.ref)
    summ = gamma_summability_check(spec.gamma, spec.ambient, run.K(1000))
    doc = {"measure": spec.to_dict(), "assumptions": rep.to_dict(), "usable": rep.usable(),
           "gamma_summability": dataclasses.asdict(summ)}
    run.write("validate.json", _json(doc))
    print(f"A2={rep.A2} A4={rep.A4} A5={rep.A5} A6_branch={rep.A6_branch}")


def cmd_sample(run: Run) -> None:
    K, n = run.K(), run.n(10)
    draws = sample(run.spec, K, n, run.seed, run.workers)
    run.write("samples.csv", draws_to_csv(draws))
    if "K" in run.cfg.get("grids", {}):
        rows = support_diagnostic(run.spec, run.grid("K"), n, run.seed, C.build_metric(run.cfg, run.spec),
                                  workers=run.workers)
        lines = ["K,mean,median,q90,max"] + [
            f"{r.K},{_g(r.mean)},{_g(r.median)},{_g(r.q90)},{_g(r.max)}" for r in rows]
        run.write("support.csv", "\n".join(lines) + "\n")


def cmd_om_eval(run: Run) -> None:
    ev = formal_neg_log_density(run.spec, run.point("h"), run.cfg.get("K"))
    run.write("om.json", _json(ev.to_dict()))
    print(_g(ev.value))


def cmd_shift_density(run: Run) -> None:
    ev = shift_density_generic(run.spec, run.point("h"), run.point("x"), run.cfg.get("K"))
    run.write("shift_density.json", _json(ev.to_dict()))
    print(_g(ev.value))


def cmd_dichotomy(run: Run) -> None:
    h = run.point("h")
    K = run.K(1000)
    shepp = shepp_test(run.spec, h, K)
    kak = kakutani_product(run.spec, h, max(K, 2048))
    doc = {"shepp": shepp.to_dict(), "kakutani": kak.to_dict()}
    run.write("dichotomy.json", _json(doc))
    print(f"verdict={shepp.verdict} partial_sum={_g(shepp.partial_sum)} trend={kak.trend}")


def cmd_small_ball(run: Run) -> None:
    K, n = run.K(), run.n()
    center = run.point("h", Point.at_shift())
    metric = C.build_metric(run.cfg, run.spec)
    use_quad = run.cfg.get("quad", K <= 3)
    lines = ["r,K,n,mc,stderr" + (",quad" if use_quad else "")]
    for r in run.grid("r", DEFAULT_R):
        ball = BallSpec(center, float(r), metric, K)
        est = mc_ball_mass(run.spec, ball, n, run.seed, run.workers)
        row = f"{_g(r)},{K},{n},{_g(est.mean)},{_g(est.stderr)}"
        if use_quad:
            row += f",{_g(quad_ball_mass(run.spec, ball))}"
        lines.append(row)
    run.write("small_ball.csv", "\n".join(lines) + "\n")


def _report_ratio(run: Run, rows, name: str) -> None:
    run.write(name, ratio_rows_to_csv(rows))
    last = rows[-1]
    print(f"r={_g(last.r)} est={_g(last.est)} stderr={_g(last.stderr)} predicted={_g(last.predicted)}")


def cmd_om_ratio(run: Run) -> None:
    rows = om_ratio_experiment(run.spec, run.point("h"), run.grid("r", DEFAULT_R), run.K(), run.n(), run.seed,
                               C.build_metric(run.cfg, run.spec), run.workers, run.cfg.get("quad"))
    _report_ratio(run, rows, "om_ratio.csv")


def cmd_continuity_ratio(run: Run) -> None:
    rows = continuity_ratio_check(run.spec, run.point("x_star", Point.at_shift()), run.point("h"),
                                  run.grid("r", DEFAULT_R), run.K(), run.n(), run.seed,
                                  C.build_metric(run.cfg, run.spec), run.workers, run.cfg.get("quad"))
    _report_ratio(run, rows, "continuity_ratio.csv")


def cmd_gamma_probe(run: Run) -> None:
    family = C.build_family(run.cfg, run.spec)
    rows = gamma_probe(family, run.spec, run.point("x"), run.grid("n"))
    run.write("gamma_probe.csv", probe_to_csv(rows))


def cmd_equicoercivity_box(run: Run) -> None:
    K = run.K(10)
    lines = ["t,a,k,lower,upper"]
    for t in run.cfg.get("t", [1.0]):
        box = sublevel_box(run.spec, float(t))
        if box.empty:
            lines.append(f"{_g(t)},nan,0,nan,nan")
            continue
        lo, hi = box.intervals(K)
        lines += [f"{_g(t)},{_g(box.a)},{k + 1},{_g(lo[k])},{_g(hi[k])}" for k in range(K)]
    run.write("box.csv", "\n".join(lines) + "\n")


def _starts(run: Run, K: int) -> list[np.ndarray] | None:
    count = int(run.cfg.get("starts", 1))
    if count <= 1:
        return None
    draws = sample(run.spec, K, count - 1, run.seed, 1)
    return [run.spec.shift_values(K)] + [draws[:, j] for j in range(count - 1)]


def cmd_map(run: Run) -> None:
    K = run.K()
    phi = C.build_problem(run.cfg, run.spec, K)
    J = posterior_objective(run.spec, phi, K)
    method = run.cfg.get("method", "auto")
    starts = _starts(run, K)
    res = multistart_map(J, starts, method=method)[0] if starts else solve_map(J, method)
    doc = {"objective": res.objective, "iterations": res.iterations, "converged": res.converged, "K": K}
    name, p = run.spec.ref.name, run.spec.ref.params.get("p")
    if isinstance(phi, LinearGaussian):
        oracle = None
        if name == "besov" and p == 2.0:
            oracle = gaussian_map_closed_form(run.spec, phi)
        elif name == "besov" and p == 1.0 and phi.A.shape == (K, K) and np.array_equal(phi.A, np.eye(K)):
            oracle = laplace_identity_map(run.spec, phi.y, phi.sigma)
        if oracle is not None:
            doc["closed_form_max_abs_diff"] = float(np.max(np.abs(res.x - oracle)))
    run.write("map.csv", "k,x\n" + "".join(f"{k + 1},{_g(v)}\n" for k, v in enumerate(res.x)))
    run.write("map.json", _json(doc))
    if not res.converged:
        raise NumericalError(f"MAP solver did not converge in {res.iterations} iterations")
    print(f"objective={_g(res.objective)} iterations={res.iterations}")


def cmd_map_converge(run: Run) -> None:
    K = run.K()
    phi = C.build_problem(run.cfg, run.spec, K)
    family = C.build_family(run.cfg, run.spec)
    rows, ref = map_convergence_experiment(family, run.spec, phi, K, run.grid("n"),
                                           run.cfg.get("method", "auto"))
    run.write("map_converge.csv", convergence_rows_to_csv(rows))
    run.write("map_limit.csv", "k,x\n" + "".join(f"{k + 1},{_g(v)}\n" for k, v in enumerate(ref.x)))


def cmd_lemma_checks(run: Run) -> None:
    cases = int(run.cfg.get("cases", 50))
    lines = ["suite,case,label,lhs,rhs,passed"]
    failed = 0
    for kind in ("1d", "besov"):
        for i, (label, chk) in enumerate(lemma_suite(kind, cases, run.seed)):
            lines.append(f"{kind},{i},{label},{_g(chk.lhs)},{_g(chk.rhs)},{int(chk.passed)}")
            failed += not chk.passed
    run.write("lemmas.csv", "\n".join(lines) + "\n")
    tl = ["reference,v,F,zeta,bound"]
    rep = perturbation_taylor_check(run.spec.ref, lambda u: math.exp(-u * u), 0.5, np.linspace(-1, 1, 21))
    tl += [f"{run.spec.ref.name},{_g(r.v)},{_g(r.F)},{_g(r.zeta)},{_g(rep.zeta_bound)}" for r in rep.rows]
    run.write("taylor.csv", "\n".join(tl) + "\n")
    print(f"lemma cases failed: {failed}; taylor bounded: {rep.bounded}")


HANDLERS = {
    "validate": cmd_validate, "sample": cmd_sample, "om-eval": cmd_om_eval,
    "shift-density": cmd_shift_density, "dichotomy": cmd_dichotomy, "small-ball": cmd_small_ball,
    "om-ratio": cmd_om_ratio, "continuity-ratio": cmd_continuity_ratio, "gamma-probe": cmd_gamma_probe,
    "equicoercivity-box": cmd_equicoercivity_box, "map": cmd_map, "map-converge": cmd_map_converge,
    "lemma-checks": cmd_lemma_checks,
}


def _versions() -> dict:
    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"omlab": own, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def execute(command: str, cfg: dict, out: Path, workers: int = 1) -> None:
    run = Run(out, cfg, command, workers)
    manifest = {"command": command, "seed": run.seed, "config_hash": C.config_hash(cfg),
                "versions": _versions(), "config": cfg}
    run.write("manifest.json", _json(manifest))
    run.write("timestamp.txt", datetime.now(timezone.utc).isoformat() + "\n")
    HANDLERS[command](run)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="omlab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, type=Path, help="experiment JSON or a previous manifest.json")
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    ap.add_argument("--workers", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = C.load_config(args.config, args.seed)
        cmd = cfg.get("command")
        if cmd is not None and cmd != args.command:
            raise C.ConfigError(f"config is for {cmd!r}, not {args.command!r}", "/command")
        if args.workers < 1:
            raise SpecError("--workers must be >= 1")
        execute(args.command, cfg, args.out, args.workers)
    except (json.JSONDecodeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except HypothesisError as e:
        print(f"hypothesis failed: {e}", file=sys.stderr)
        return 3
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 4
    except SpecError as e:
        print(f"invalid config: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
