"""Command-line front end: ``construct``, ``verify`` and ``sweep``.

Exit codes: 0 all checks pass, 1 usage or configuration error (JSON on
stderr), 2 a checked bound failed (the failing check names go to stderr).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .constructors import (ASSEMBLY_COLLAR_FRACTION, DEFAULT_C_AMP, PieceSchedule, assemble_multi, block_net_log_decay,
                           critical_log_breakpoints, k_gap_estimate, make_bump,
                           make_critical_staircase, make_locked_coulomb, make_supercritical,
                           schedule_pieces, BumpCertificateInputs)
from .errors import DiracError, ParameterError, PreconditionError
from .potential import BoundaryAngle, EigenTarget, PotentialSegment, PotentialSpec
from .prufer import DEFAULT_TOL, PrueferTrajectory, integrate_prufer
from .verify import (bump_certificate, check_no_eigenvalue_bound, critical_ln_r,
                     critical_tail_series, critical_term_quadrature, fit_decay_exponent,
                     fit_oscillatory_constant, l2_tail_estimate)

SCHEMA_VERSION = 1
MODES = ("supercritical", "critical", "bump", "multi")
SAMPLES_PER_DECADE = 64
MAX_TRAJECTORY_ROWS = 20000
CLOSED_FORM_TOL = 1e-6
CRITICAL_TELESCOPE_TOL = 1e-9
CRITICAL_QUAD_TOL = 1e-6
CRITICAL_TAIL_TOL = 1e-20
# bound on ln(term_n) - (ln n - n^2) for the staircase series, n >= 1
CRITICAL_EXCESS_BOUND = 1.0
MULTI_MIN_ALPHA = 0.75
# non-target net change per piece is below the integration error; allow for it
MONOTONE_SLACK = 1e-8


class ConfigError(ParameterError):
    pass


# -- configuration --------------------------------------------------------------

def _angle(d: dict, key: str = "theta") -> float:
    unit = d.get("angle_unit", "rad")
    if key + "_deg" in d:
        return BoundaryAngle.normalized(float(d[key + "_deg"]), "deg").phi0
    return BoundaryAngle.normalized(float(d.get(key, 0.0)), unit).phi0


def _targets(raw, unit: str) -> tuple[tuple[float, float], ...]:
    out = []
    for t in raw:
        if isinstance(t, dict):
            item = dict(t)
            item.setdefault("angle_unit", unit)
            out.append((float(item["lambda"]), _angle(item)))
        else:
            lam, th = t
            out.append((float(lam), BoundaryAngle.normalized(float(th), unit).phi0))
    lams = [l for l, _ in out]
    if len(set(lams)) != len(lams):
        raise ConfigError(f"repeated target eigenvalues {lams}")
    return tuple(out)


@dataclass(frozen=True)
class RunConfig:
    """Resolved run parameters; angles are stored in radians, folded into [0, pi)."""

    mode: str
    lam: float | None = None
    theta: float = 0.0
    A: float | None = None
    C_amp: float | None = None
    b: float = 0.0
    x0: float | None = None
    x1: float | None = None
    delta: float | None = None
    span: tuple[float, float] | None = None
    n_max: int | None = None
    targets: tuple[tuple[float, float], ...] = ()
    x_start: float = 300.0
    n_blocks: int = 3
    n_targets: int | None = None
    h: str | None = None
    tol: float = DEFAULT_TOL
    seed: int = 0
    expect: str | None = None
    samples_per_decade: int = SAMPLES_PER_DECADE
    n_angles: int = 5
    grid: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict, tol: float | None = None, seed: int | None = None) -> "RunConfig":
        if "schema_version" in d and "config" in d:
            d = d["config"]
        d = dict(d)
        known = {f.name for f in fields(cls)} | {"lambda", "angle_unit", "theta_deg"}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}")
        mode = d.get("mode")
        if mode not in MODES and not d.get("grid"):
            raise ConfigError(f"mode must be one of {list(MODES)}, got {mode!r}")
        unit = d.get("angle_unit", "rad")
        kw = {
            "mode": mode or "supercritical",
            "theta": _angle(d),
            "targets": _targets(d.get("targets", ()), unit),
            "tol": float(d.get("tol", DEFAULT_TOL) if tol is None else tol),
            "seed": int(d.get("seed", 0) if seed is None else seed),
        }
        if d.get("lambda") is not None:
            kw["lam"] = float(d["lambda"])
        for key in ("A", "C_amp", "x0", "x1", "delta", "n_targets", "n_max"):
            if d.get(key) is not None:
                kw[key] = int(d[key]) if key in ("n_targets", "n_max") else float(d[key])
        for key in ("b", "x_start"):
            if key in d:
                kw[key] = float(d[key])
        for key in ("n_blocks", "samples_per_decade", "n_angles"):
            if key in d:
                kw[key] = int(d[key])
        if d.get("span") is not None:
            lo, hi = d["span"]
            kw["span"] = (float(lo), float(hi))
        for key in ("h", "expect"):
            if d.get(key) is not None:
                kw[key] = str(d[key])
        if d.get("grid"):
            kw["grid"] = {k: [float(v) for v in vals] for k, vals in d["grid"].items()}
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    def validate(self):
        if not self.tol > 0.0:
            raise ConfigError("tol must be positive")
        if self.samples_per_decade < 1:
            raise ConfigError("samples_per_decade must be positive")
        if self.span is not None and not self.span[1] > self.span[0] >= 0.0:
            raise ConfigError(f"bad span {self.span}")
        lams = [l for l, _ in self.targets]
        if self.lam is not None and self.lam in lams:
            raise ConfigError(f"lambda {self.lam} repeated among targets")
        if self.h is not None:
            _h_family(self.h)
        if self.grid:
            bad = sorted(set(self.grid) - {"A", "lambda"})
            if bad:
                raise ConfigError(f"unknown grid axes {bad}")
            return
        need = {
            "supercritical": ("lam", "A"),
            "critical": ("lam",),
            "bump": ("lam", "x0", "x1"),
            "multi": (),
        }[self.mode]
        missing = [k for k in need if getattr(self, k) is None]
        if missing:
            raise ConfigError(f"mode {self.mode!r} needs {missing}")
        if self.mode == "supercritical" and not self.A > 0.0:
            raise ConfigError("A must be positive")
        if self.mode == "multi" and not self.targets:
            raise ConfigError("mode 'multi' needs a non-empty targets list")
        if self.expect not in (None, "eigenvalue", "no-eigenvalue"):
            raise ConfigError(f"expect must be 'eigenvalue' or 'no-eigenvalue', got {self.expect!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        d["angle_unit"] = "rad"
        d["targets"] = [{"lambda": l, "theta": th} for l, th in self.targets]
        d["span"] = list(self.span) if self.span is not None else None
        return d

    @property
    def eig_targets(self) -> list[EigenTarget]:
        return [EigenTarget(l, BoundaryAngle(th)) for l, th in self.targets]


def _h_family(spec: str):
    parts = spec.split()
    try:
        if parts[0] == "log" and len(parts) == 1:
            return lambda x: math.log(2.0 + x)
        if parts[0] == "power" and len(parts) == 2:
            p = float(parts[1])
            return lambda x: (1.0 + x) ** p
        if parts[0] == "const" and len(parts) == 2:
            c = float(parts[1])
            return lambda x: c
    except ValueError:
        pass
    raise ConfigError(f"unknown h family {spec!r}; use 'log', 'power p' or 'const c'")


# -- output helpers -------------------------------------------------------------

def _fmt(v) -> str:
    return format(float(v), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, obj) -> None:
    _write_atomic(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: str, columns) -> None:
    lines = [header]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def log_grid(lo: float, hi: float, per_decade: int = SAMPLES_PER_DECADE) -> np.ndarray:
    """Points uniform in ``ln(1+x)``: ``(1+lo) 10^(k/per_decade) - 1``, ending at ``hi``."""
    n = int(math.floor(per_decade * math.log10((1.0 + hi) / (1.0 + lo)) + 1e-9))
    k = np.arange(n + 1)
    x = (1.0 + lo) * 10.0 ** (k / per_decade) - 1.0
    x = x[x < hi]
    return np.concatenate([x, [hi]])


def write_potential_csv(path: Path, pot: PotentialSpec, xs: np.ndarray) -> None:
    V = pot.V(xs)
    phi = pot.phi(xs)
    p, q = pot.pq_at(xs)
    _write_csv(path, "x,V,phi,p,q,envelope", [xs, V, phi, p, q, pot.envelope(xs)])


def write_trajectory_csv(path: Path, traj: PrueferTrajectory,
                         max_rows: int = MAX_TRAJECTORY_ROWS) -> None:
    """Raw samples, thinned by a fixed stride when there are more than ``max_rows``."""
    n = len(traj.x)
    stride = max(1, math.ceil(n / max_rows))
    idx = np.arange(0, n, stride)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    _write_csv(path, "x,lnR,theta", [traj.x[idx], traj.lnR[idx], traj.theta[idx]])


# -- constructions ----------------------------------------------------------------

def _critical_end(n_max: int) -> float:
    a = critical_log_breakpoints(n_max + 1)
    ln_end = a[n_max] if a[n_max] < 700.0 else a[n_max - 1]
    return math.exp(ln_end)


@dataclass
class Construction:
    spec: PotentialSpec
    span: tuple[float, float]
    params: dict
    assembly: object = None


def build(cfg: RunConfig) -> Construction:
    """Resolve the configuration into a potential and its echoed parameters."""
    th = BoundaryAngle(cfg.theta)
    if cfg.mode == "supercritical":
        pot = (make_supercritical(cfg.lam, cfg.A, th) if cfg.A > 0.5
               else make_locked_coulomb(cfg.lam, cfg.A, th, cfg.b))
        span = cfg.span or (0.0, 1000.0)
        expect = cfg.expect or ("eigenvalue" if cfg.A > 0.5 else "no-eigenvalue")
        return Construction(pot, span, {"A": cfg.A, "expect": expect})
    if cfg.mode == "critical":
        n_max = cfg.n_max or 3
        pot = make_critical_staircase(cfg.lam, th, n_max)
        span = cfg.span or (0.0, _critical_end(n_max))
        return Construction(pot, span, {"n_max": n_max,
                                        "log_breakpoints": critical_log_breakpoints(n_max)})
    if cfg.mode == "bump":
        C = cfg.C_amp if cfg.C_amp is not None else DEFAULT_C_AMP
        others = cfg.eig_targets
        K = k_gap_estimate(cfg.lam, [t.lambda_j for t in others], C)
        inputs = BumpCertificateInputs(cfg.x0, cfg.x1, cfg.b, C, K)
        # the lambda solution crosses the zero potential on [0, x0) before the bump
        phi0 = cfg.theta - cfg.lam * cfg.x0
        seg = make_bump(cfg.lam, others, inputs, phi0, cfg.delta)
        pot = PotentialSpec.from_segments([seg])
        span = cfg.span or (0.0, 2.0 * cfg.x1)
        return Construction(pot, span, {"C_amp": C, "K_gap": K, "delta": seg.delta,
                                        "phase_offset": phi0})
    targets = cfg.eig_targets
    C = cfg.C_amp if cfg.C_amp is not None else DEFAULT_C_AMP
    h = _h_family(cfg.h) if cfg.h is not None else None
    sched = schedule_pieces(targets, h=h, x_start=cfg.x_start, n_blocks=cfg.n_blocks,
                            n_targets=cfg.n_targets, C_amp=C, b=cfg.b)
    params = {"C_amp": C, "schedule": sched.to_dict(), "h": cfg.h,
              "targets": [{"lambda": t.lambda_j, "theta": t.theta_j.phi0} for t in targets]}
    span = (0.0, sched.pieces[-1].x_hi)
    if h is not None:
        # envelope only: phases would need integration out to e^(log_x)
        segs = [PotentialSegment.bump(p.x_lo, p.x_hi, p.amplitude, cfg.b,
                                      targets[p.target].lambda_j, 0.0,
                                      ASSEMBLY_COLLAR_FRACTION * (p.x_hi - p.x_lo))
                for p in sched.pieces]
        params["phase_resolved"] = False
        return Construction(PotentialSpec.from_segments(segs), span, params)
    asm = assemble_multi(targets, sched, tol=cfg.tol)
    params.update({"phase_resolved": True, "envelope_constant": asm.envelope_constant,
                   "K_gaps": list(asm.K_gaps)})
    return Construction(asm.spec, span, params, asm)


def manifest(cfg: RunConfig, con: Construction) -> dict:
    return {"schema_version": SCHEMA_VERSION, "config": cfg.to_dict(),
            "construction": con.params, "span": list(con.span)}


def cmd_construct(cfg: RunConfig, out: Path) -> dict:
    con = build(cfg)
    xs = log_grid(con.span[0], con.span[1], cfg.samples_per_decade)
    write_potential_csv(out / "potential.csv", con.spec, xs)
    man = manifest(cfg, con)
    _write_json(out / "manifest.json", man)
    return man


# -- verification ------------------------------------------------------------------

def _fit_dict(fit) -> dict | None:
    if fit is None:
        return None
    return {"alpha": fit.alpha, "residual": fit.residual, "window": list(fit.window),
            "intercept": fit.intercept}


def _verify_supercritical(cfg, con, out):
    expect = con.params["expect"]
    traj = integrate_prufer(con.spec, cfg.lam, BoundaryAngle(cfg.theta), con.span, tol=cfg.tol)
    write_trajectory_csv(out / "trajectory_0.csv", traj)
    l2 = l2_tail_estimate(traj, con.span[0])
    fit = l2.fit or fit_decay_exponent(traj)
    checks = {}
    x_s = con.span[0]
    if cfg.b == 0.0 and x_s == 0.0:
        closed = -cfg.A * np.log1p(traj.x)
        err = float(np.max(np.abs(traj.lnR - closed)))
        checks["closed_form_decay"] = {"value": err, "bound": CLOSED_FORM_TOL,
                                       "passed": err <= CLOSED_FORM_TOL}
    if expect == "eigenvalue":
        checks["l2_converging"] = {"value": l2.verdict, "passed": l2.verdict == "converging"}
    else:
        try:
            cert = check_no_eigenvalue_bound(con.spec, cfg.lam, BoundaryAngle(cfg.theta),
                                             con.span, tol=cfg.tol)
            checks["lower_bound"] = {"value": cert.worst_margin, "amplitude": cert.amplitude,
                                     "exponent": cert.exponent, "passed": cert.passed}
        except PreconditionError as exc:
            checks["lower_bound"] = {"value": str(exc), "passed": False}
        checks["l2_diverging"] = {"value": l2.verdict, "passed": l2.verdict == "diverging"}
    return {"alpha": fit.alpha, "residual": fit.residual, "l2_verdict": l2.verdict,
            "l2_integral": l2.integral, "fit": _fit_dict(fit), "bump_certificates": [],
            "oscillatory_fit": None, "checks": checks}


def _verify_critical(cfg, con, out):
    n_max = con.params["n_max"]
    traj = integrate_prufer(con.spec, cfg.lam, BoundaryAngle(cfg.theta), con.span, tol=cfg.tol)
    write_trajectory_csv(out / "trajectory_0.csv", traj)
    checks = {}
    worst = 0.0
    for n in range(1, n_max + 1):
        a_n = math.exp(n ** 3)
        if a_n > con.span[1]:
            break
        got = traj.value_at(a_n)[0]
        worst = max(worst, abs(got - critical_ln_r(n)) / max(1.0, abs(critical_ln_r(n))))
    checks["telescoping"] = {"value": worst, "bound": CRITICAL_TELESCOPE_TOL,
                             "passed": worst <= CRITICAL_TELESCOPE_TOL}
    terms = critical_tail_series(range(1, 11))
    excess = max(t.excess for t in terms)
    checks["tail_bound"] = {"value": excess, "bound": CRITICAL_EXCESS_BOUND,
                            "passed": excess <= CRITICAL_EXCESS_BOUND}
    head = max(t.ln_term for t in terms)
    tail_terms = critical_tail_series(range(11, 41))
    ln_tail = max(t.ln_term for t in tail_terms) + math.log(len(tail_terms))
    rel_tail = math.exp(ln_tail - head)
    checks["tail_cauchy"] = {"value": rel_tail, "bound": CRITICAL_TAIL_TOL,
                             "passed": rel_tail < CRITICAL_TAIL_TOL}
    quad = max(abs(math.expm1(critical_term_quadrature(n) - terms[n - 1].ln_term))
               for n in (1, 2))
    checks["quadrature_n1_n2"] = {"value": quad, "bound": CRITICAL_QUAD_TOL,
                                  "passed": quad <= CRITICAL_QUAD_TOL}
    fit = fit_decay_exponent(traj, (math.e, con.span[1]))
    verdict = "converging" if checks["tail_cauchy"]["passed"] else "inconclusive"
    return {"alpha": fit.alpha, "residual": fit.residual, "l2_verdict": verdict,
            "fit": _fit_dict(fit), "series": [{"n": t.n, "ln_R_an": t.ln_r_an,
                                               "ln_term": t.ln_term} for t in terms],
            "bump_certificates": [], "oscillatory_fit": None, "checks": checks}


def _verify_bump(cfg, con, out):
    others = cfg.eig_targets
    cert = bump_certificate(con.spec, cfg.lam, others, cfg.x0, cfg.x1, cfg.b,
                            n_angles=cfg.n_angles, seed=cfg.seed, tol=cfg.tol)
    seg = con.spec.segment_at(0.5 * (cfg.x0 + cfg.x1))
    traj = integrate_prufer(con.spec, cfg.lam, BoundaryAngle(cfg.theta), con.span, tol=cfg.tol)
    write_trajectory_csv(out / "trajectory_0.csv", traj)
    for k, t in enumerate(others, start=1):
        tr = integrate_prufer(con.spec, t.lambda_j, t.theta_j, con.span, tol=cfg.tol)
        write_trajectory_csv(out / f"trajectory_{k}.csv", tr)
    window = (cfg.x0, cfg.x1)
    fit = None
    if math.log10((1.0 + cfg.x1) / (1.0 + cfg.x0)) >= 2.0:
        fit = fit_decay_exponent(traj, window)
    osc = {}
    g = cfg.x0 - cfg.b
    for t in others:
        of = fit_oscillatory_constant(cfg.lam, t.lambda_j, [g, 2.0 * g], seg.amplitude,
                                      cfg.b, n_angles=4, reach=0.5)
        osc[repr(t.lambda_j)] = {"gaps": list(of.gaps), "M": of.M, "variation": of.variation}
    checks = {
        "bump_decay_exponent": {"value": cert.decay_ratio_ln,
                                "bound": cert.required_decay_ln + cert.ln_c_cert,
                                "passed": cert.decay_ok},
        "bump_target_growth": {"value": cert.sup_growth_target, "bound": math.log(2.0),
                               "passed": cert.target_ok},
        "bump_others_growth": {"value": max(cert.sup_growth_others.values(), default=0.0),
                               "bound": math.log(2.0), "passed": cert.others_ok},
    }
    slope = cert.decay_ratio_ln / math.log((cfg.x1 - cfg.b) / (cfg.x0 - cfg.b))
    return {"alpha": -slope if fit is None else fit.alpha,
            "residual": None if fit is None else fit.residual,
            "l2_verdict": "inconclusive", "fit": _fit_dict(fit),
            "bump_certificates": [cert.to_dict()], "oscillatory_fit": osc, "checks": checks}


def _endpoint_values(traj: PrueferTrajectory, xs) -> np.ndarray:
    idx = np.searchsorted(traj.x, xs)
    return traj.lnR[np.clip(idx, 0, len(traj.x) - 1)]


def _verify_multi_schedule(cfg, con):
    h = _h_family(cfg.h)
    sched = PieceSchedule.from_dict(con.params["schedule"])
    worst_env = -math.inf
    for p in sched.pieces:
        xs = log_grid(p.x_lo, p.x_hi, cfg.samples_per_decade * 4)
        ratio = con.spec.envelope(xs) * (1.0 + xs) / np.array([h(x) for x in xs])
        worst_env = max(worst_env, float(np.max(ratio)))
    decay = [block_net_log_decay(b) for b in sched.blocks()]
    checks = {
        "schedule_envelope": {"value": worst_env, "bound": 1.0, "passed": worst_env <= 1.0},
        "schedule_block_decay": {"value": max(decay), "bound": 0.0, "passed": max(decay) < 0.0},
    }
    return {"alpha": None, "residual": None, "l2_verdict": "inconclusive",
            "bump_certificates": [], "oscillatory_fit": None, "checks": checks}


def _verify_multi(cfg, con, out):
    if con.assembly is None:
        return _verify_multi_schedule(cfg, con)
    asm = con.assembly
    sched = asm.schedule
    window = (sched.pieces[0].x_lo, sched.pieces[-1].x_hi)
    alphas, verdicts, fits = [], [], []
    for k, traj in enumerate(asm.trajectories):
        write_trajectory_csv(out / f"trajectory_{k}.csv", traj)
        l2 = l2_tail_estimate(traj, window[0])
        fit = l2.fit or fit_decay_exponent(traj, window)
        alphas.append(fit.alpha)
        verdicts.append(l2.verdict)
        fits.append(_fit_dict(fit))
    first_block_end = sched.blocks()[0][-1].x_hi
    ends = np.array([first_block_end] + [p.x_hi for p in sched.pieces if p.x_hi > first_block_end])
    worst_rise = -math.inf
    for traj in asm.trajectories:
        vals = _endpoint_values(traj, ends)
        worst_rise = max(worst_rise, float(np.max(np.diff(vals))) if len(vals) > 1 else -math.inf)
    xs = np.concatenate([log_grid(p.x_lo, p.x_hi, cfg.samples_per_decade * 4)
                         for p in sched.pieces])
    env = float(np.max(asm.spec.envelope(xs) * (1.0 + xs)))
    bound = asm.envelope_constant * (1.0 + 1e-12)
    certs = []
    for i, p in enumerate(sched.pieces):
        tgt = asm.trajectories[p.target]
        lo, hi = _endpoint_values(tgt, [p.x_lo, p.x_hi])
        growth = {}
        for k, traj in enumerate(asm.trajectories[: p.n_active]):
            if k == p.target:
                continue
            m = (traj.x >= p.x_lo) & (traj.x <= p.x_hi)
            growth[repr(asm.targets[k].lambda_j)] = float(np.max(traj.lnR[m]) - traj.lnR[m][0])
        certs.append({"piece": i, "target": p.target, "x_lo": p.x_lo, "x_hi": p.x_hi,
                      "decay_ratio_ln": float(hi - lo),
                      "required_decay_ln": -100.0 * (p.log_hi - p.log_lo),
                      "sup_growth_others": growth})
    checks = {
        "multi_alpha": {"value": min(alphas), "bound": MULTI_MIN_ALPHA,
                        "passed": min(alphas) >= MULTI_MIN_ALPHA},
        "multi_monotone": {"value": worst_rise, "bound": MONOTONE_SLACK, "passed": worst_rise <= MONOTONE_SLACK},
        "multi_envelope": {"value": env, "bound": asm.envelope_constant, "passed": env <= bound},
    }
    return {"alpha": alphas, "residual": [f["residual"] for f in fits], "l2_verdict": verdicts,
            "fit": fits, "bump_certificates": certs, "oscillatory_fit": None, "checks": checks}


_VERIFIERS = {"supercritical": _verify_supercritical, "critical": _verify_critical,
              "bump": _verify_bump, "multi": _verify_multi}


def cmd_verify(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    """Run the mode's checks; returns ``(exit_code, certificate)``."""
    con = build(cfg)
    cert = _VERIFIERS[cfg.mode](cfg, con, out)
    cert = {"schema_version": SCHEMA_VERSION, "mode": cfg.mode, "config": cfg.to_dict(),
            "construction": con.params, **cert}
    _write_json(out / "certificate.json", cert)
    failed = sorted(k for k, v in cert["checks"].items() if not v["passed"])
    return (2 if failed else 0), cert


# -- sweep ----------------------------------------------------------------------------

def sweep_row(A: float, lam: float, theta: float, span, tol: float) -> tuple[float, str]:
    """Locked Coulomb run at one ``(A, lambda)``; errors become the verdict string."""
    try:
        pot = make_locked_coulomb(lam, A, BoundaryAngle(theta))
        traj = integrate_prufer(pot, lam, BoundaryAngle(theta), span, tol=tol)
        l2 = l2_tail_estimate(traj, span[0])
        fit = l2.fit or fit_decay_exponent(traj)
        return fit.alpha, l2.verdict
    except (DiracError, ArithmeticError, ValueError) as exc:
        return math.nan, f"error: {type(exc).__name__}: {exc}".replace(",", ";")


def cmd_sweep(cfg: RunConfig, out: Path, jobs: int = 1) -> list[tuple]:
    grid = cfg.grid or {}
    As = grid.get("A", [])
    lams = grid.get("lambda", [cfg.lam] if cfg.lam is not None else [])
    rows = [(A, lam) for A in As for lam in lams]
    span = cfg.span or (0.0, 1000.0)
    args = [(A, lam, cfg.theta, span, cfg.tol) for A, lam in rows]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(sweep_row, *zip(*args)))
    else:
        results = [sweep_row(*a) for a in args]
    lines = ["A,lambda,alpha,l2_verdict"]
    table = []
    for (A, lam), (alpha, verdict) in zip(rows, results):
        lines.append(f"{_fmt(A)},{_fmt(lam)},{_fmt(alpha)},{verdict}")
        table.append((A, lam, alpha, verdict))
    _write_atomic(out / "summary.csv", "\n".join(lines) + "\n")
    return table


# -- entry point ------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dirac-embed", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("construct", "verify", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration or manifest")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--seed", type=int, default=None)
    return ap


def _error(kind: str, msg: str) -> int:
    sys.stderr.write(json.dumps({"status": "error", "error": kind, "message": msg}) + "\n")
    return 1


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    out = Path(args.out)
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        cfg = RunConfig.from_dict(raw, tol=args.tol, seed=args.seed)
        if args.command == "construct":
            cmd_construct(cfg, out)
            return 0
        if args.command == "sweep":
            cmd_sweep(cfg, out, args.jobs)
            return 0
        code, cert = cmd_verify(cfg, out)
    except (OSError, json.JSONDecodeError) as exc:
        return _error(type(exc).__name__, str(exc))
    except (ParameterError, DiracError, KeyError, TypeError, ValueError) as exc:
        return _error(type(exc).__name__, str(exc))
    if code:
        failed = sorted(k for k, v in cert["checks"].items() if not v["passed"])
        sys.stderr.write(json.dumps({"status": "fail", "failed": failed}) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
