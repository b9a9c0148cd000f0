"""Reproducible experiment driver.

One experiment per invocation:

  brinkbie run --config cfg.json [--out DIR] [--quadrature log-split|fallback]
               [--threads K]

Config is JSON; complex numbers are [re, im] pairs.  Each run writes
<out>/<experiment>.csv (fixed column schema, no timestamps, byte-reproducible)
and <out>/<experiment>.json (summary with slope, residual, rows, config echo
and runtime_seconds).
"""

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, bie2d, geometry, kernels, perturbation
from .special import ResolventParameter

EXPERIMENTS = ("kernels-check", "solver-convergence", "continuity-study",
               "expansion-study", "geometry-check")

DEFAULT_POINTS = [[0.0, 0.0], [0.2, -0.1], [-0.2, 0.15], [0.1, 0.25], [-0.15, -0.2]]
SLOPE_FLOOR = 1e-12   # error rows at/below this are solver noise; slope omitted


class ConfigError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


def fit_slope(pairs):
    """Least-squares slope of log(e) vs log(h) and the RMS fit residual."""
    pairs = [(float(h), float(e)) for h, e in pairs]
    if len(pairs) < 3:
        raise InsufficientDataError("slope fit needs at least 3 data points")
    if any(h <= 0 or e <= 0 for h, e in pairs):
        raise InsufficientDataError("slope fit needs strictly positive data")
    lh = np.log([h for h, _ in pairs])
    le = np.log([e for _, e in pairs])
    A = np.stack([lh, np.ones_like(lh)], axis=1)
    coef, *_ = np.linalg.lstsq(A, le, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - le) ** 2)))
    return float(coef[0]), resid


def parse_curve(spec):
    parts = str(spec).split()
    name = parts[0]
    args = [float(p) for p in parts[1:]]
    if name == "circle":
        return geometry.circle(*(args or [1.0]))
    if name == "ellipse":
        return geometry.ellipse(*(args or [1.0, 0.5]))
    if name == "star":
        if len(args) == 3:
            return geometry.star(args[0], args[1], int(args[2]))
        return geometry.star(*(args or [1.0, 0.3, 3]))
    raise ConfigError(f"unknown curve {name!r}")


def parse_rho(spec):
    parts = str(spec).split()
    name = parts[0]
    if name == "zero":
        return geometry.rho_zero()
    if name == "constant":
        return geometry.rho_constant(float(parts[1]) if len(parts) > 1 else 1.0)
    if name == "cosine":
        k = int(float(parts[1])) if len(parts) > 1 else 1
        a = float(parts[2]) if len(parts) > 2 else 1.0
        return geometry.rho_cosine(k, a)
    raise ConfigError(f"unknown rho {spec!r}")


def parse_boundary_data(spec, lam):
    parts = str(spec).split()
    name = parts[0]
    if name == "stream-poly":
        return bie2d.stream_poly_field()
    if name == "stream-trig":
        return bie2d.stream_trig_field()
    if name == "constant":
        vals = [float(p) for p in parts[1:]] or [1.0, 0.0]
        return bie2d.constant_field(vals)
    if name == "source":
        vals = [float(p) for p in parts[1:]]
        if len(vals) != 4:
            raise ConfigError("source data needs 4 numbers: y0_x y0_y c_x c_y")
        return bie2d.point_source_field(np.array(vals[:2]), np.array(vals[2:]), lam)
    raise ConfigError(f"unknown boundary data {spec!r}")


@dataclass
class ExperimentConfig:
    experiment: str
    curve: str = "circle 1.0"
    rho: str = "constant 1.0"
    lam: complex = 1.0 + 0.0j
    ns: tuple = (64, 128, 256)
    deltas: tuple = (4e-2, 2e-2, 1e-2, 5e-3)
    points: tuple = tuple(map(tuple, DEFAULT_POINTS))
    boundary_data: str = "stream-poly"
    quadrature: str = bie2d.LOG_SPLIT
    out: str = "out"
    threads: int = 1

    @classmethod
    def from_file(cls, path):
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw):
        raw = dict(raw)
        if "experiment" not in raw:
            raise ConfigError("config is missing the 'experiment' field")
        exp = raw.pop("experiment")
        if exp not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {exp!r}; expected one of {EXPERIMENTS}")
        lam_raw = raw.pop("lambda", [1.0, 0.0])
        lam = complex(lam_raw[0], lam_raw[1]) if isinstance(lam_raw, (list, tuple)) \
            else complex(lam_raw)
        kwargs = dict(
            experiment=exp,
            curve=raw.pop("curve", cls.curve),
            rho=raw.pop("rho", cls.rho),
            lam=lam,
            ns=tuple(int(n) for n in raw.pop("N", list(cls.ns))),
            deltas=tuple(float(d) for d in raw.pop("delta", list(cls.deltas))),
            points=tuple(tuple(map(float, p)) for p in raw.pop("points", DEFAULT_POINTS)),
            boundary_data=raw.pop("boundary_data", cls.boundary_data),
            quadrature=raw.pop("quadrature", cls.quadrature),
            out=str(raw.pop("out", cls.out)),
            threads=int(raw.pop("threads", cls.threads)),
        )
        if raw:
            raise ConfigError(f"unknown config fields: {sorted(raw)}")
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def validate(self):
        if self.quadrature not in (bie2d.LOG_SPLIT, bie2d.FALLBACK):
            raise ConfigError(f"unknown quadrature mode {self.quadrature!r}")
        for n in self.ns:
            if n < 16 or n % 2:
                raise ConfigError(f"N values must be even and >= 16, got {n}")
        curve = parse_curve(self.curve)
        rho = parse_rho(self.rho)
        dmax = geometry.delta_max(curve, rho)
        for d in self.deltas:
            if not 0.0 < d < dmax:
                raise ConfigError(
                    f"delta={d:g} outside the admissible range (0, {dmax:g}) "
                    f"for curve {self.curve!r} with rho {self.rho!r}")
        try:
            ResolventParameter(self.lam)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def echo(self):
        return {
            "experiment": self.experiment, "curve": self.curve, "rho": self.rho,
            "lambda": [self.lam.real, self.lam.imag], "N": list(self.ns),
            "delta": list(self.deltas), "points": [list(p) for p in self.points],
            "boundary_data": self.boundary_data, "quadrature": self.quadrature,
            "threads": self.threads, "version": __version__,
        }


@dataclass
class ExperimentResult:
    experiment: str
    columns: list
    rows: list                    # list of tuples, ordered by parameter
    slope: float | None
    residual: float | None
    config: dict
    runtime_seconds: float
    extra: dict = field(default_factory=dict)

    def write(self, outdir):
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        csv_path = outdir / f"{self.experiment}.csv"
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
        summary = {
            "experiment": self.experiment,
            "slope": self.slope,
            "residual": self.residual,
            "rows": [list(r) for r in self.rows],
            "columns": self.columns,
            "config": self.config,
            "runtime_seconds": self.runtime_seconds,
        }
        summary.update(self.extra)
        (outdir / f"{self.experiment}.json").write_text(
            json.dumps(summary, indent=2, default=float))
        return csv_path

    @property
    def errors(self):
        return [row[1] for row in self.rows]


def _ordered_map(fn, args, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, args))
    return [fn(a) for a in args]


def _maybe_slope(pairs):
    clean = [(h, e) for h, e in pairs if e > SLOPE_FLOOR]
    if len(clean) < 3 or len(clean) < len(pairs):
        return None, None
    return fit_slope(clean)


def _run_kernels_check(cfg):
    lam = ResolventParameter(cfg.lam)
    hs = [1e-2, 5e-3, 2.5e-3]
    rows = []
    for h in hs:
        errs = {}
        for dim in (2, 3):
            x0 = np.array([0.7, 0.35, -0.5][:dim])
            worst = 0.0
            for j in range(dim):
                lap = np.zeros(dim, complex)
                g0, _ = kernels.fundamental_tensor(x0, lam, dim)
                for dd in range(dim):
                    e = np.zeros(dim)
                    e[dd] = h
                    gp, _ = kernels.fundamental_tensor(x0 + e, lam, dim)
                    gm, _ = kernels.fundamental_tensor(x0 - e, lam, dim)
                    lap += (gp[:, j] + gm[:, j] - 2 * g0[:, j]) / h ** 2
                gradF = np.zeros(dim, complex)
                for i in range(dim):
                    e = np.zeros(dim)
                    e[i] = h
                    _, fp = kernels.fundamental_tensor(x0 + e, lam, dim)
                    _, fm = kernels.fundamental_tensor(x0 - e, lam, dim)
                    gradF[i] = (fp[j] - fm[j]) / (2 * h)
                worst = max(worst, float(np.abs(-lap + gradF + lam.lam * g0[:, j]).max()))
            errs[dim] = worst
        rows.append((h, errs[2], errs[3]))
    slope2, res2 = fit_slope([(r[0], r[1]) for r in rows])
    slope3, res3 = fit_slope([(r[0], r[2]) for r in rows])

    # closed-form vs definitional stress and analytic gradient vs FD, r = 1
    extra = {}
    for dim in (2, 3):
        x = np.array([0.6, 0.8]) if dim == 2 else np.array([0.6, 0.48, 0.64])
        y = np.zeros(dim)
        hfd = 1e-6
        S = kernels.stress_tensor(x, y, lam, dim)
        worst = 0.0
        _, F = kernels.fundamental_tensor(x - y, lam, dim)
        for i in range(dim):
            for j in range(dim):
                for k in range(dim):
                    ek = np.zeros(dim)
                    ek[k] = hfd
                    ei = np.zeros(dim)
                    ei[i] = hfd
                    dG_k = (kernels.fundamental_tensor(x - y + ek, lam, dim)[0][i, j]
                            - kernels.fundamental_tensor(x - y - ek, lam, dim)[0][i, j]) / (2 * hfd)
                    dG_i = (kernels.fundamental_tensor(x - y + ei, lam, dim)[0][k, j]
                            - kernels.fundamental_tensor(x - y - ei, lam, dim)[0][k, j]) / (2 * hfd)
                    Sdef = -F[j] * (1 if i == k else 0) + dG_k + dG_i
                    worst = max(worst, abs(Sdef - S[i, j, k]) / max(abs(S[i, j, k]), 1e-10))
        extra[f"stress_match_{dim}d"] = worst
        v = np.array([0.3, -0.5, 0.8][:dim])
        Sg = kernels.stress_gradient(x, y, lam, dim, v)
        fd = (kernels.stress_tensor(x + hfd * v, y, lam, dim)
              - kernels.stress_tensor(x - hfd * v, y, lam, dim)) / (2 * hfd)
        extra[f"gradient_match_{dim}d"] = float(np.abs(Sg - fd).max() / np.abs(Sg).max())
    return rows, ["h", "pde_residual_2d", "pde_residual_3d"], slope2, res2, \
        {"pde_slope_3d": slope3, "pde_residual_fit_3d": res3, **extra}


def _run_solver_convergence(cfg):
    lam = ResolventParameter(cfg.lam)
    curve = parse_curve(cfg.curve)
    g = parse_boundary_data(cfg.boundary_data, lam)
    if cfg.boundary_data.split()[0] not in ("source", "constant"):
        raise ConfigError("solver-convergence needs 'source ...' or 'constant ...' "
                          "data with a known interior solution")
    pts = np.asarray(cfg.points, dtype=float)
    uex = g.value(pts)

    def one(n):
        rule = bie2d.QuadratureRule(n)
        phi = bie2d.solve_interior_dirichlet(curve, lam, g, rule, cfg.quadrature)
        u = bie2d.eval_velocity(curve, rule, phi, lam, pts)
        return float(np.abs(u - uex).max() / max(np.abs(uex).max(), 1e-300))

    errs = _ordered_map(one, sorted(cfg.ns), cfg.threads)
    rows = [(n, e) for n, e in zip(sorted(cfg.ns), errs)]
    slope, resid = _maybe_slope([(1.0 / n, e) for n, e in rows])
    return rows, ["N", "relative_error"], slope, resid, {}


def _run_continuity_study(cfg):
    lam = ResolventParameter(cfg.lam)
    curve = parse_curve(cfg.curve)
    rho = parse_rho(cfg.rho)
    g = parse_boundary_data(cfg.boundary_data, lam)
    rule = bie2d.QuadratureRule(max(cfg.ns))
    pts = np.asarray(cfg.points, dtype=float)

    def one(d):
        return perturbation.continuity_gap(curve, rule, rho, lam, g, d, pts,
                                           cfg.quadrature)

    deltas = sorted(cfg.deltas, reverse=True)
    gaps = _ordered_map(one, deltas, cfg.threads)
    rows = list(zip(deltas, gaps))
    slope, resid = _maybe_slope(rows)
    return rows, ["delta", "max_gap"], slope, resid, {}


def _run_expansion_study(cfg):
    lam = ResolventParameter(cfg.lam)
    curve = parse_curve(cfg.curve)
    rho = parse_rho(cfg.rho)
    g = parse_boundary_data(cfg.boundary_data, lam)
    rule = bie2d.QuadratureRule(max(cfg.ns))
    pts = np.asarray(cfg.points, dtype=float)
    first = perturbation.eval_u1(curve, rule, rho, lam, g, pts, cfg.quadrature)
    phi0 = perturbation.phi_recursion(curve, rule, rho, lam, g, 0, cfg.quadrature)
    phi1 = perturbation.phi_recursion(curve, rule, rho, lam, g, 1, cfg.quadrature)

    def one(d):
        pcurve = geometry.PerturbedCurve2D(curve, rho, d)
        gauge = bie2d.gauge_vector(curve, rule)
        phid = bie2d.solve_interior_dirichlet(pcurve, lam, g, rule,
                                              cfg.quadrature, gauge=gauge)
        ud = bie2d.eval_velocity(pcurve, rule, phid, lam, pts)
        field_rem = float(np.abs(ud - first.u0 - d * first.u1).max())
        dens_rem = float(np.abs(phid.values - phi0.values - d * phi1.values).max())
        return field_rem, dens_rem

    deltas = sorted(cfg.deltas, reverse=True)
    rems = _ordered_map(one, deltas, cfg.threads)
    rows = [(d, fr, dr) for d, (fr, dr) in zip(deltas, rems)]
    slope, resid = _maybe_slope([(d, fr) for d, fr, _ in rows])
    dslope, dresid = _maybe_slope([(d, dr) for d, _, dr in rows])
    return rows, ["delta", "field_remainder", "density_remainder"], slope, resid, \
        {"density_slope": dslope, "density_residual": dresid}


def _run_geometry_check(cfg):
    curve = parse_curve(cfg.curve)
    rho = parse_rho(cfg.rho)
    t = np.linspace(0.0, 2.0 * np.pi, 256, endpoint=False)
    fr = geometry.frame(curve, t)
    nu1 = geometry.nu_expansion(curve, rho, t, 1)
    s1 = geometry.sigma_expansion(curve, rho, t, 1)
    s2 = geometry.sigma_expansion(curve, rho, t, 2)

    def one(d):
        pcurve = geometry.PerturbedCurve2D(curve, rho, d)
        _, nut, ratio = geometry.perturbed_frame(pcurve, t)
        nu_rem = float(np.abs(nut - (fr.normal + d * nu1)).max())
        sig_rem = float(np.abs(ratio - (1.0 + d * s1 + d * d * s2)).max())
        return nu_rem, sig_rem

    deltas = sorted(cfg.deltas, reverse=True)
    rems = _ordered_map(one, deltas, cfg.threads)
    rows = [(d, nr, sr) for d, (nr, sr) in zip(deltas, rems)]
    slope, resid = _maybe_slope([(d, nr) for d, nr, _ in rows])
    sslope, sresid = _maybe_slope([(d, sr) for d, _, sr in rows])
    sphere = geometry.SphereSurface(1.0)
    dd = 0.1
    three_term = sum(geometry.sphere_surface_expansion(sphere, n) * dd ** n
                     for n in range(3))
    sphere_err = abs(three_term - (1.0 + dd / sphere.radius) ** 2)
    return rows, ["delta", "normal_remainder", "measure_remainder"], slope, resid, \
        {"measure_slope": sslope, "measure_residual": sresid,
         "sphere_identity_error": sphere_err}


_RUNNERS = {
    "kernels-check": _run_kernels_check,
    "solver-convergence": _run_solver_convergence,
    "continuity-study": _run_continuity_study,
    "expansion-study": _run_expansion_study,
    "geometry-check": _run_geometry_check,
}


def run(cfg):
    """Execute the configured experiment; write CSV + JSON; return the result."""
    cfg.validate()
    t0 = time.perf_counter()
    rows, columns, slope, resid, extra = _RUNNERS[cfg.experiment](cfg)
    result = ExperimentResult(
        experiment=cfg.experiment,
        columns=columns,
        rows=rows,
        slope=slope,
        residual=resid,
        config=cfg.echo(),
        runtime_seconds=time.perf_counter() - t0,
        extra=extra,
    )
    result.write(cfg.out)
    return result


def main(argv=None):
    parser = argparse.ArgumentParser(prog="brinkbie",
                                     description="resolvent-Stokes boundary-integral experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run one experiment from a JSON config")
    runp.add_argument("--config", required=True, help="path to the JSON config")
    runp.add_argument("--out", default=None, help="output directory (overrides config)")
    runp.add_argument("--quadrature", choices=[bie2d.LOG_SPLIT, bie2d.FALLBACK],
                      default=None, help="quadrature mode override")
    runp.add_argument("--threads", type=int, default=None,
                      help="parallel fan-out over the parameter list")
    args = parser.parse_args(argv)

    try:
        cfg = ExperimentConfig.from_file(args.config)
        if args.out is not None:
            cfg.out = args.out
        if args.quadrature is not None:
            cfg.quadrature = args.quadrature
        if args.threads is not None:
            cfg.threads = args.threads
        result = run(cfg)
    except (ConfigError, InsufficientDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    slope_txt = "n/a" if result.slope is None else f"{result.slope:.3f}"
    print(f"{result.experiment}: {len(result.rows)} rows, slope {slope_txt}, "
          f"wrote {Path(cfg.out) / (cfg.experiment + '.csv')} "
          f"({result.runtime_seconds:.2f}s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
