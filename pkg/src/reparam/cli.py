"""Scene-file front end.

    python3 -m reparam simulate scene.ini --out traj.jsonl
    python3 -m reparam diagnose scene.ini --seed 7
    python3 -m reparam brane sheet.ini --dng-normalization paper
    python3 -m reparam sweep sweep.ini --out table.csv

Scenes are INI files.  Every section and key is validated before any
computation and unknown ones are rejected.  Exit codes: 0 success, 1
configuration error, 2 numerical failure or failed check, 3 I/O error.
Reports are JSON on stdout (or ``--out`` for ``diagnose``/``brane``); they
hold no wall-clock data so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import jet
from .backgrounds import (PresetSpec, ansatz_accel, ansatz_profiles, make_preset, minkowski_field,
                          sample_phase_point)
from .brane import (BraneLagrangian, Embedding, brane_action, diffeo_test, dng_lagrangian,
                    induced_metric, multi_indices, random_embedding, sinusoidal_diffeo)
from .dynamics import (Direct, LagrangianConst, ProperTime, State, TermConst,
                       assemble_eom, integrate)
from .errors import (ConfigError, DimMismatch, GaugeInvalid, MissingParam, ReparamError,
                     UnknownParam, UnknownPreset)
from .lagrangian import (CanonicalTerm, Lagrangian, Monomial, conjugate_momentum, hamiltonian,
                         homogeneity_degree, source_tensor, v_hessian)
from .tensor import TensorField, contract_full, multiplicities

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

SCHEMA = {
    "target": None,  # preset name plus preset parameters, checked by make_preset
    "lagrangian": {"orders", "weights", "form", "degree"},
    "gauge": {"name", "n"},
    "initial": {"x0", "v0"},
    "integrate": {"step", "n_steps", "drift_policy"},
    "output": {"path", "format", "emit_monitors"},
    "diagnose": {"states"},
    "sweep": {"variable", "start", "stop", "points", "spacing", "observables", "workers",
              "duration"},
    "embedding": {"preset", "rho", "D", "m"},
    "brane": {"normalization", "dng_weight", "metric", "one_form"},
    "quadrature": {"panels", "order", "refine", "tol"},
    "diffeo": {"maps", "epsilon", "refine"},
}

SECTIONS = {
    "simulate": ({"target", "initial", "integrate"}, {"lagrangian", "gauge", "output"}),
    "diagnose": ({"target"}, {"lagrangian", "diagnose", "output"}),
    "brane": ({"embedding"}, {"brane", "quadrature", "diffeo", "output"}),
    "sweep": ({"target", "initial", "sweep"}, {"lagrangian", "gauge", "integrate", "output"}),
}

OBSERVABLES = ("radial_accel", "accel_norm", "gauge_difference", "richardson_error", "drift")


# -- serialization -------------------------------------------------------------

def fmt(x: float) -> str:
    return format(float(x), ".17g")


def to_json(obj) -> str:
    """Compact JSON with floats at 17 significant digits; NaN becomes null."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, Mapping):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# -- scene parsing -------------------------------------------------------------

@dataclass
class Scene:
    command: str
    text: str
    cfg: configparser.ConfigParser

    def section(self, name: str) -> dict[str, str]:
        return dict(self.cfg[name]) if self.cfg.has_section(name) else {}

    def get(self, section: str, key: str, default=None):
        return self.section(section).get(key, default)


def load_scene(text: str, command: str) -> Scene:
    cfg = configparser.ConfigParser(interpolation=None)
    cfg.optionxform = str  # preset parameters are case sensitive (M vs m)
    try:
        cfg.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed scene: {exc}") from None
    required, optional = SECTIONS[command]
    present = set(cfg.sections())
    if missing := required - present:
        raise ConfigError(f"missing section(s) {sorted(missing)} for {command}")
    if extra := present - required - optional:
        raise ConfigError(f"unknown section(s) {sorted(extra)} for {command}")
    for name in present:
        allowed = SCHEMA[name]
        if allowed is not None and (bad := set(cfg[name]) - allowed):
            raise ConfigError(f"unknown key(s) {sorted(bad)} in [{name}]")
    return Scene(command, text, cfg)


def _float(value: str, what: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{what}: not a number: {value!r}") from None


def _int(value: str, what: str) -> int:
    f = _float(value, what)
    if f != int(f):
        raise ConfigError(f"{what}: not an integer: {value!r}")
    return int(f)


def _floats(value: str, what: str) -> list[float]:
    return [_float(v, what) for v in value.split(",") if v.strip()]


def _choice(value: str, options, what: str) -> str:
    value = value.strip().lower().replace("-", "_")
    if value not in options:
        raise ConfigError(f"{what} must be one of {sorted(options)}, got {value!r}")
    return value


def _bool(value: str, what: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{what}: not a boolean: {value!r}")


def target_params(scene: Scene, overrides: Mapping[str, float] | None = None) -> tuple[str, dict]:
    sec = scene.section("target")
    if "preset" not in sec:
        raise ConfigError("[target] needs a preset")
    name = sec.pop("preset")
    params = {k: _float(v, f"target.{k}") for k, v in sec.items()}
    params.update(overrides or {})
    return name, params


def build_lagrangian(scene: Scene, name: str, params: dict):
    """Preset Lagrangian with ``[lagrangian]`` overrides; returns ``(L, degree)``."""
    try:
        _, L = make_preset(PresetSpec(name, params))
    except (UnknownPreset, UnknownParam, MissingParam, ValueError) as exc:
        raise ConfigError(f"target: {exc}") from None
    sec = scene.section("lagrangian")
    by_order = {t.order: t for t in L.terms}
    orders = [_int(o, "lagrangian.orders") for o in sec.get("orders", "").split(",") if o.strip()]
    orders = orders or [t.order for t in L.terms]
    weights = _floats(sec["weights"], "lagrangian.weights") if "weights" in sec else None
    if weights is not None and len(weights) != len(orders):
        raise ConfigError("lagrangian.weights and lagrangian.orders differ in length")
    terms = []
    for i, n in enumerate(orders):
        if n not in by_order:
            raise ConfigError(f"preset {name!r} has no order-{n} field")
        t = by_order[n]
        terms.append(CanonicalTerm(n, weights[i], t.field) if weights is not None else t)
    form = _choice(sec.get("form", "root"), {"root", "monomial"}, "lagrangian.form")
    if form == "monomial":
        if len(terms) != 1:
            raise ConfigError("monomial form takes exactly one order")
        lag, natural = Monomial(terms[0]), terms[0].order
    else:
        lag, natural = Lagrangian(L.dim, tuple(terms)), 1
    degree = _float(sec["degree"], "lagrangian.degree") if "degree" in sec else natural
    return lag, degree


def build_gauge(scene: Scene):
    sec = scene.section("gauge")
    name = _choice(sec.get("name", "proper_time"),
                   {"proper_time", "term_const", "lagrangian_const", "direct"}, "gauge.name")
    if "n" in sec and name != "term_const":
        raise ConfigError("gauge.n only applies to term_const")
    if name == "term_const":
        if "n" not in sec:
            raise ConfigError("term_const gauge needs n")
        return TermConst(_int(sec["n"], "gauge.n"))
    return {"proper_time": ProperTime(), "lagrangian_const": LagrangianConst(),
            "direct": Direct()}[name]


def build_state(scene: Scene, dim: int, v_spatial: float | None = None) -> State:
    sec = scene.section("initial")
    if "x0" not in sec or "v0" not in sec:
        raise ConfigError("[initial] needs x0 and v0")
    x = np.array(_floats(sec["x0"], "initial.x0"))
    v = np.array(_floats(sec["v0"], "initial.v0"))
    if len(x) != dim or len(v) != dim:
        raise ConfigError(f"initial state must have {dim} components")
    if v_spatial is not None:
        norm = np.linalg.norm(v[1:])
        direction = v[1:] / norm if norm > 0 else np.eye(dim - 1)[0]
        v = np.concatenate([v[:1], v_spatial * direction])
    return State(0.0, x, v)


def _config_hash(scene: Scene, args) -> str:
    h = hashlib.sha256()
    h.update(scene.text.encode())
    flags = {k: getattr(args, k) for k in ("command", "seed", "format", "dng_normalization",
                                           "quadrature_order", "refine")}
    h.update(to_json(flags).encode())
    return h.hexdigest()


def _check(value: float, threshold: float, ok: bool | None = None) -> dict:
    ok = bool(value <= threshold) if ok is None else ok
    return {"value": float(value), "threshold": float(threshold), "pass": ok}


def _report(scene: Scene, args, checks: dict, **extra) -> dict:
    out = {"command": scene.command, "config_sha256": _config_hash(scene, args), "seed": args.seed}
    out.update(extra)
    out["checks"] = checks
    out["pass"] = all(c["pass"] for c in checks.values())
    return out


# -- simulate -------------------------------------------------------------------

def _precheck_ansatz(name: str, params: dict, s0: State) -> None:
    """Surface the closed-form 1/v^(n-2) divergence before integrating."""
    if name != "sn_ansatz":
        return
    n = int(params["n"])
    w, v = s0.v
    ansatz_accel(n, ansatz_profiles(params), w, v, s0.x[1])


def _cyclotron_check(params: dict, traj) -> dict:
    q, m, B = params.get("q", 1.0), params.get("m", 1.0), params["B"]
    s0 = traj.samples[0]
    u = s0.v[1:3] / np.sqrt(s0.v @ np.diag([1.0, -1.0, -1.0, -1.0]) @ s0.v)
    R = m * np.linalg.norm(u) / abs(q * B)
    a0 = assemble_eom(traj.lagrangian, traj.gauge, s0)
    center = s0.x[1:3] + R * a0[1:3] / np.linalg.norm(a0[1:3])
    radius = np.linalg.norm(traj.x[:, 1:3] - center, axis=1)
    return {"orbit_radius": float(np.mean(radius)), "expected_radius": float(R),
            "check": _check(np.max(np.abs(radius - R)), 1e-8)}


def _write_trajectory(traj, path: str, form: str, emit_monitors: bool) -> None:
    m = len(traj.samples[0].x)
    mon_keys = ("L", "h", "gauge_value", "drift") if emit_monitors else ()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if form == "csv":
            cols = ["tau"] + [f"x{i}" for i in range(m)] + [f"v{i}" for i in range(m)] + list(mon_keys)
            fh.write(",".join(cols) + "\n")
        for s, mo in zip(traj.samples, traj.monitors):
            mons = [getattr(mo, k) for k in mon_keys]
            if form == "csv":
                fh.write(",".join(fmt(c) for c in [s.tau, *s.x, *s.v, *mons]) + "\n")
            else:
                rec = {"tau": s.tau, "x": s.x, "v": s.v}
                rec.update(zip(mon_keys, mons))
                fh.write(to_json(rec) + "\n")


def run_simulate(scene: Scene, args) -> tuple[int, dict]:
    name, params = target_params(scene)
    L, degree = build_lagrangian(scene, name, params)
    gauge = build_gauge(scene)
    s0 = build_state(scene, L.dim)
    isec = scene.section("integrate")
    step = _float(isec.get("step", "1e-3"), "integrate.step")
    n_steps = _int(isec.get("n_steps", "1000"), "integrate.n_steps")
    policy = _choice(isec.get("drift_policy", "off"), {"off", "renormalize"}, "integrate.drift_policy")
    osec = scene.section("output")
    path = args.out or osec.get("path")
    if not path:
        raise ConfigError("simulate needs an output path ([output] path or --out)")
    form = _choice(args.format or osec.get("format", "jsonl"), {"jsonl", "csv"}, "output.format")
    emit = _bool(osec.get("emit_monitors", "true"), "output.emit_monitors")

    _precheck_ansatz(name, params, s0)
    traj = integrate(L, gauge, s0, step, n_steps, drift_policy=policy)
    _write_trajectory(traj, path, form, emit)

    h = traj.monitor_array("h")
    Lv = traj.monitor_array("L")
    checks = {"gauge_drift": _check(np.max(np.abs(traj.monitor_array("drift"))), 1e-6)}
    if degree == 1:
        checks["null_hamiltonian"] = _check(np.max(np.abs(h) / (1 + np.abs(Lv))), 1e-10)
    else:
        checks["hamiltonian_drift"] = _check(np.max(np.abs(h - h[0])) / max(abs(h[0]), 1e-300), 1e-8)
    extra = {"samples": len(traj), "tau_end": traj.tau[-1]}
    if name == "uniform_em" and traj.error is None:
        cyc = _cyclotron_check(params, traj)
        checks["cyclotron_radius"] = cyc.pop("check")
        extra.update(cyc)
    if traj.error is not None:
        extra["error"] = f"{type(traj.error).__name__}: {traj.error}"
    report = _report(scene, args, checks, **extra)
    code = EXIT_NUMERIC if traj.error is not None or not report["pass"] else EXIT_OK
    return code, report


# -- diagnose -------------------------------------------------------------------

def _source_residual(L: Lagrangian, x, v) -> float:
    """``n * T.S - S^(1/n)`` per rooted term, relative; ``T`` is the source tensor."""
    worst = 0.0
    for t in L.terms:
        if t.order < 2:
            continue
        T = source_tensor(t, x, v)
        S = t.field(list(x))
        mult = multiplicities(t.dim, t.order)
        dot = sum(m_ * a * b for m_, a, b in zip(mult, T.components, S.values().components))
        root = float(contract_full(S, list(v))) ** (1.0 / t.order)
        worst = max(worst, abs(t.order * dot - root) / max(abs(root), 1e-300))
    return worst


def run_diagnose(scene: Scene, args) -> tuple[int, dict]:
    name, params = target_params(scene)
    L, degree = build_lagrangian(scene, name, params)
    n_states = _int(scene.get("diagnose", "states", "100"), "diagnose.states")
    rng = np.random.default_rng(args.seed)
    worst = {"homogeneity": 0.0, "hamiltonian": 0.0, "hessian_null": 0.0, "source": 0.0}
    max_rank = 0
    min_abs_det = math.inf
    for _ in range(n_states):
        x, v = sample_phase_point(name, params, rng)
        x, v = list(x), list(v)
        Lv = float(jet.value_of(L.value(x, v)))
        worst["homogeneity"] = max(worst["homogeneity"], abs(homogeneity_degree(L, x, v) - degree))
        h = hamiltonian(L, x, v)
        worst["hamiltonian"] = max(worst["hamiltonian"], abs(h - (degree - 1) * Lv) / (1 + abs(Lv)))
        M, rep = v_hessian(L, x, v)
        Md = M.to_dense()
        p = conjugate_momentum(L, x, v)
        null = np.linalg.norm(Md @ v - (degree - 1) * p) / (np.linalg.norm(Md) * np.linalg.norm(v))
        worst["hessian_null"] = max(worst["hessian_null"], null)
        max_rank = max(max_rank, rep.rank)
        min_abs_det = min(min_abs_det, abs(rep.det))
        if isinstance(L, Lagrangian):
            worst["source"] = max(worst["source"], _source_residual(L, x, v))
    checks = {
        "homogeneity_degree": _check(worst["homogeneity"], 1e-9),
        "hamiltonian_identity": _check(worst["hamiltonian"], 1e-10),
        "hessian_null_vector": _check(worst["hessian_null"], 1e-9),
        "source_tensor": _check(worst["source"], 1e-10),
    }
    if degree == 1:
        checks["hessian_rank_deficient"] = _check(max_rank, L.dim - 1)
    report = _report(scene, args, checks, preset=name, states=n_states, declared_degree=degree,
                     max_hessian_rank=max_rank, min_abs_hessian_det=min_abs_det)
    return (EXIT_OK if report["pass"] else EXIT_NUMERIC), report


# -- brane ----------------------------------------------------------------------

def _brane_setup(scene: Scene, args):
    sec = scene.section("embedding")
    preset = _choice(sec.get("preset", ""), {"flat_sheet", "cylinder", "random"}, "embedding.preset")
    rng = np.random.default_rng(args.seed)
    rho = _float(sec.get("rho", "1.0"), "embedding.rho")
    if preset == "flat_sheet":
        e, area = Embedding(2, 4, lambda z: [z[0], z[1], 0.0, 0.0]), 1.0
    elif preset == "cylinder":
        e = Embedding(2, 4, lambda z: [z[0], rho * jet.cos(2 * np.pi * z[1]),
                                       rho * jet.sin(2 * np.pi * z[1]), 0.0])
        area = 2 * np.pi * rho
    else:
        D, m = _int(sec.get("D", "2"), "embedding.D"), _int(sec.get("m", "4"), "embedding.m")
        try:
            e = random_embedding(rng, D, m)
        except (ValueError, DimMismatch) as exc:
            raise ConfigError(f"embedding: {exc}") from None
        area = None
    bsec = scene.section("brane")
    norm = _choice(args.dng_normalization or bsec.get("normalization", "cauchy_binet"),
                   {"cauchy_binet", "paper"}, "brane.normalization")
    metric = _choice(bsec.get("metric", "minkowski"), {"minkowski", "euclidean"}, "brane.metric")
    g = minkowski_field(e.m) if metric == "minkowski" else TensorField(
        2, e.m, lambda x: {(a, a): 1.0 for a in range(e.m)}, "delta")
    weight = _float(bsec.get("dng_weight", "1.0"), "brane.dng_weight")
    one_form = None
    expected = None if area is None else weight * area * math.sqrt(
        math.factorial(e.D) if norm == "paper" else 1.0)
    if "one_form" in bsec:
        coeffs = _floats(bsec["one_form"], "brane.one_form")
        if len(coeffs) != len(multi_indices(e.m, e.D)):
            raise ConfigError(f"brane.one_form needs {len(multi_indices(e.m, e.D))} coefficients")
        one_form = lambda X: coeffs
        if preset == "flat_sheet":
            expected += coeffs[0]
    bl = BraneLagrangian(one_form=one_form, metric=g, dng_weight=weight, normalization=norm)
    return e, bl, g, expected, rng


def run_brane(scene: Scene, args) -> tuple[int, dict]:
    e, bl, g, expected, rng = _brane_setup(scene, args)
    q = scene.section("quadrature")
    panels = _int(q.get("panels", "2"), "quadrature.panels")
    order = args.quadrature_order or _int(q.get("order", "8"), "quadrature.order")
    refine = args.refine if args.refine is not None else _int(q.get("refine", "0"), "quadrature.refine")
    tol = _float(q["tol"], "quadrature.tol") if "tol" in q else None
    d = scene.section("diffeo")
    n_maps = _int(d.get("maps", "5"), "diffeo.maps")
    eps_max = _float(d.get("epsilon", "0.25"), "diffeo.epsilon")
    d_refine = _int(d.get("refine", "3"), "diffeo.refine")

    S = brane_action(e, bl, panels, order, refine, tol)
    checks = {}
    if expected is not None:
        checks["action"] = _check(abs(S - expected), 1e-10)
    cb = 0.0
    for _ in range(100):
        z = list(rng.uniform(0, 1, e.D))
        _, det = induced_metric(e, g, z)
        val = dng_lagrangian(e, g, z, "cauchy_binet")
        cb = max(cb, abs(val.sign * val.value**2 - det) / abs(det))
    checks["cauchy_binet"] = _check(cb, 1e-8)
    diffs = []
    for _ in range(n_maps):
        zeta = sinusoidal_diffeo(rng.uniform(0.2 * eps_max, eps_max, e.D), rng.integers(1, 3, e.D))
        diffs.append(diffeo_test(e, bl, zeta, panels, order, d_refine).rel_diff)
    if diffs:
        checks["diffeo_invariance"] = _check(max(diffs), 1e-6)
    report = _report(scene, args, checks, action=S, expected_action=expected,
                     normalization=bl.normalization, diffeo_rel_diffs=diffs)
    return (EXIT_OK if report["pass"] else EXIT_NUMERIC), report


# -- sweep ------------------------------------------------------------------------

def _sweep_point(scene: Scene, variable: str, value: float, observables, defaults) -> dict:
    overrides = {}
    if variable in ("n", "delta"):
        overrides[variable] = value
    name, params = target_params(scene, overrides)
    L, _ = build_lagrangian(scene, name, params)
    gauge = build_gauge(scene)
    s0 = build_state(scene, L.dim, value if variable == "v0" else None)
    step = value if variable == "step" else defaults["step"]
    row = {variable: value}
    for obs in observables:
        if obs in ("radial_accel", "accel_norm"):
            a = assemble_eom(L, gauge, s0)
            row[obs] = abs(a[1]) if obs == "radial_accel" else np.linalg.norm(a)
        elif obs == "gauge_difference":
            a1 = assemble_eom(L, LagrangianConst(), s0)
            a2 = assemble_eom(L, ProperTime(), s0)
            row[obs] = float(np.linalg.norm(a1[1:] - a2[1:]))
        elif obs == "richardson_error":
            n = max(1, round(defaults["duration"] / step))
            coarse = integrate(L, gauge, s0, step, n)
            fine = integrate(L, gauge, s0, step / 2, 2 * n)
            if coarse.error or fine.error:
                raise coarse.error or fine.error
            a, b = coarse.samples[-1], fine.samples[-1]
            row[obs] = float(np.linalg.norm(np.concatenate([a.x - b.x, a.v - b.v])))
        elif obs == "drift":
            n = max(1, round(defaults["duration"] / step))
            traj = integrate(L, gauge, s0, step, n)
            row[obs] = float(np.max(np.abs(traj.monitor_array("drift"))))
    return row


def run_sweep(scene: Scene, args) -> tuple[int, dict]:
    sec = scene.section("sweep")
    variable = _choice(sec.get("variable", ""), {"v0", "step", "n", "delta"}, "sweep.variable")
    start = _float(sec.get("start", "nan"), "sweep.start")
    stop = _float(sec.get("stop", "nan"), "sweep.stop")
    points = _int(sec.get("points", "10"), "sweep.points")
    spacing = _choice(sec.get("spacing", "log"), {"log", "linear"}, "sweep.spacing")
    if not (math.isfinite(start) and math.isfinite(stop)) or points < 2:
        raise ConfigError("sweep needs finite start, stop and at least two points")
    if spacing == "log" and (start <= 0 or stop <= 0):
        raise ConfigError("log spacing needs positive bounds")
    observables = [_choice(o, set(OBSERVABLES), "sweep.observables")
                   for o in sec.get("observables", "accel_norm").split(",") if o.strip()]
    values = np.geomspace(start, stop, points) if spacing == "log" else np.linspace(start, stop, points)
    if variable == "n":
        values = np.unique(np.round(values))
    isec = scene.section("integrate")
    step = _float(isec.get("step", "1e-3"), "integrate.step")
    n_steps = _int(isec.get("n_steps", "1000"), "integrate.n_steps")
    defaults = {"step": step, "duration": _float(sec.get("duration", str(step * n_steps)),
                                                 "sweep.duration")}
    workers = _int(sec.get("workers", "4"), "sweep.workers")
    path = args.out or scene.get("output", "path")
    if not path:
        raise ConfigError("sweep needs an output path ([output] path or --out)")

    build_gauge(scene)  # validate before spawning workers
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(pool.map(lambda v: _sweep_point(scene, variable, float(v), observables, defaults),
                             values))
    slopes = {}
    for obs in observables:
        ys = np.array([r[obs] for r in rows])
        if spacing == "log" and np.all(ys > 0):
            slopes[obs] = float(np.polyfit(np.log(values), np.log(ys), 1)[0])
        else:
            slopes[obs] = float("nan")
    cols = [variable] + observables + [f"{o}_slope" for o in observables]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for r in rows:
            fh.write(",".join(fmt(c) for c in [r[variable], *(r[o] for o in observables),
                                               *(slopes[o] for o in observables)]) + "\n")
    report = _report(scene, args, {}, variable=variable, points=len(rows), slopes=slopes)
    return EXIT_OK, report


# -- entry point --------------------------------------------------------------------

COMMANDS = {"simulate": run_simulate, "diagnose": run_diagnose, "brane": run_brane,
            "sweep": run_sweep}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reparam", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("scene", help="INI scene file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="trajectory/table path (simulate, sweep) or report path")
    p.add_argument("--format", choices=("jsonl", "csv"))
    p.add_argument("--dng-normalization", choices=("paper", "cauchy-binet"))
    p.add_argument("--quadrature-order", type=int)
    p.add_argument("--refine", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.dng_normalization:
        args.dng_normalization = args.dng_normalization.replace("-", "_")
    if args.seed < 0 or args.seed >= 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        with open(args.scene, encoding="utf-8") as fh:
            text = fh.read()
        scene = load_scene(text, args.command)
        code, report = COMMANDS[args.command](scene, args)
    except (ConfigError, GaugeInvalid, UnknownPreset, UnknownParam, MissingParam) as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ReparamError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    text = to_json(report) + "\n"
    try:
        if args.out and args.command in ("diagnose", "brane"):
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("%s finished in %.3f s", args.command, time.perf_counter() - t0)
    if not report["pass"]:
        print("one or more checks failed", file=sys.stderr)
    return code
