"""Experiment orchestration: config parsing, subcommand dispatch, seeding,
and CSV/JSON emission.

Configuration is a single JSON document; every field can also be set on the
command line, with the command line taking precedence.  Output files embed a
hash of the resolved configuration and the seed, and identical (config,
seed) pairs produce byte-identical files.  Exit codes: 0 pass, 1 validation
failure, 2 numerical failure, 3 hypothesis-check failure.
"""

import argparse
import hashlib
import json
import math
import os
import sys
from multiprocessing import get_context

import numpy as np

from . import __version__
from .decomposition import (BadCollection, DecompositionConfig,
                            GoodCollection, classify_segment, decompose)
from .errors import PressgapError, ValidationError
from .extension import ExtensionConfig, lift_projection, verify_bowen
from .maps import (BUILTIN_MAPS, constant_potential, doubling,
                   geometric_potential, manneville_pomeau, perturbed_doubling,
                   tabulated_map, tabulated_potential, zero_potential)
from .orbits import FullCollection, OrbitSegment
from .pressure import ct_hypothesis_check, gap_report, pressure_at_scale
from .solenoid import (SolenoidSystem, apply_f, attractor_bowen_check,
                       conjugacy_h, fiber_point, fiber_sample,
                       metric_equivalence)
from .specification import glue_base, verify_shadow
from .transfer import build_operator, leading_eigen

DEFAULTS = {
    "map": {"kind": "doubling", "alpha": 0.5, "delta": 0.75},
    "potential": {"kind": "zero", "c": 0.0, "t": 1.0},
    "sigma": 0.9,
    "sigma_grid": None,
    "eps": 1.0 / 32.0,
    "eps_list": None,
    "n_max": 12,
    "grid_size": 1024,
    "a": 2.0,
    "depth": 24,
    "seed": 0,
    "workers": 1,
    "out": None,
    "samples": 200,
    "length_min": 5,
    "length_max": 20,
    "group_size": 3,
    "k_max": 64,
    "lam_s": 0.25,
    "offset": 0.5,
    "cloud_depth": 0,
}

_FLOAT_FIELDS = ("sigma", "eps", "a", "lam_s", "offset")
_INT_FIELDS = ("n_max", "grid_size", "depth", "seed", "workers", "samples",
               "length_min", "length_max", "group_size", "k_max", "cloud_depth")


def fmt(x):
    """17-significant-digit float formatting for bit-stable round trips."""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def config_hash(cfg):
    semantic = {k: v for k, v in cfg.items() if k != "out"}
    canonical = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def build_map(cfg):
    m = cfg["map"]
    kind = m.get("kind", "doubling")
    if kind == "doubling":
        return doubling()
    if kind == "manneville_pomeau":
        return manneville_pomeau(m.get("alpha", 0.5))
    if kind == "perturbed_doubling":
        return perturbed_doubling(m.get("delta", 0.75))
    if kind == "tabulated":
        return tabulated_map(m["values"])
    raise ValidationError("map", f"unknown kind {kind!r}")


def build_potential(cfg, system):
    p = cfg["potential"]
    kind = p.get("kind", "zero")
    if kind == "zero":
        return zero_potential()
    if kind == "constant":
        return constant_potential(p.get("c", 0.0))
    if kind == "geometric":
        return geometric_potential(system, p.get("t", 1.0))
    if kind == "tabulated":
        return tabulated_potential(p["xs"], p["values"],
                                   p["holder_constant"], p["holder_exponent"])
    raise ValidationError("potential", f"unknown kind {kind!r}")


def validate(cfg):
    if not 0.0 < cfg["sigma"] < 1.0:
        raise ValidationError("sigma", f"{cfg['sigma']} outside (0, 1)")
    for s in cfg["sigma_grid"] or []:
        if not 0.0 < s < 1.0:
            raise ValidationError("sigma", f"{s} outside (0, 1)")
    if cfg["a"] <= 1.0:
        raise ValidationError("a", "metric base must exceed 1")
    if cfg["eps"] <= 0.0:
        raise ValidationError("eps", "must be positive")
    for e in cfg["eps_list"] or []:
        if e <= 0.0:
            raise ValidationError("eps", f"{e} must be positive")
    if cfg["n_max"] < 4:
        raise ValidationError("n_max", "need n_max >= 4")
    if cfg["depth"] < 0:
        raise ValidationError("depth", "must be >= 0")
    if cfg["length_min"] < 1 or cfg["length_max"] < cfg["length_min"]:
        raise ValidationError("length_min", "need 1 <= length_min <= length_max")


class Writer:
    """CSV writer with a config-hash/seed header line."""

    def __init__(self, path, cfg, columns):
        self.lines = [f"# pressgap={__version__} config_hash={config_hash(cfg)} "
                      f"seed={cfg['seed']}", ",".join(columns)]
        self.path = path

    def row(self, *values):
        self.lines.append(",".join(fmt(v) for v in values))

    def flush(self):
        text = "\n".join(self.lines) + "\n"
        if self.path:
            with open(self.path, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _eps_values(cfg):
    return cfg["eps_list"] if cfg["eps_list"] else [cfg["eps"]]


def _sigma_values(cfg):
    return cfg["sigma_grid"] if cfg["sigma_grid"] else [cfg["sigma"]]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_pressure(cfg):
    system = build_map(cfg)
    phi = build_potential(cfg, system)
    dec = DecompositionConfig(cfg["sigma"])
    colls = [FullCollection(), GoodCollection(dec), BadCollection(dec)]
    w = Writer(cfg["out"], cfg, ["collection", "sigma", "eps", "rate",
                                 "rate_uncertainty", "limsup_proxy", "empty"])
    for eps in _eps_values(cfg):
        for coll in colls:
            est = pressure_at_scale(system, phi, coll, eps, cfg["n_max"])
            w.row(coll.name, cfg["sigma"], eps, est.rate, est.rate_uncertainty,
                  est.limsup_proxy, int(est.is_empty))
    w.flush()
    return 0


def cmd_decompose(cfg):
    system = build_map(cfg)
    dec = DecompositionConfig(cfg["sigma"])
    rng = np.random.default_rng(cfg["seed"])
    w = Writer(cfg["out"], cfg, ["start", "length", "class", "g_len", "s_len"])
    for _ in range(cfg["samples"]):
        seg = OrbitSegment(float(rng.random()),
                           int(rng.integers(cfg["length_min"], cfg["length_max"] + 1)))
        cls = classify_segment(system, dec, seg)
        d = decompose(system, dec, seg)
        w.row(seg.start, seg.length, cls.value, d.g_len, d.s_len)
    w.flush()
    return 0


def _random_good_segments(system, dec, rng, count, length_range, attempts=4000):
    good = GoodCollection(dec)
    out = []
    for _ in range(attempts):
        if len(out) == count:
            break
        seg = OrbitSegment(float(rng.random()),
                           int(rng.integers(length_range[0], length_range[1] + 1)))
        if good.contains(system, seg.start, seg.length):
            out.append(seg)
    if len(out) < count:
        raise ValidationError("sigma", "could not sample enough good segments")
    return out


def cmd_glue(cfg):
    system = build_map(cfg)
    dec = DecompositionConfig(cfg["sigma"])
    rng = np.random.default_rng(cfg["seed"])
    as_json = bool(cfg["out"] and cfg["out"].endswith(".json"))
    plans = []
    rows = []
    for _ in range(cfg["samples"]):
        segs = _random_good_segments(system, dec, rng, cfg["group_size"],
                                     (cfg["length_min"], cfg["length_max"]))
        plan = glue_base(system, dec, segs, cfg["eps"])
        shadow = verify_shadow(system, plan)
        rows.append((cfg["eps"], plan.tau_cap,
                     max(plan.transition_times) if plan.transition_times else 0,
                     shadow, int(shadow <= cfg["eps"])))
        if as_json:
            d = plan.to_dict()
            d["verified_max"] = shadow
            plans.append(d)
    if as_json:
        doc = {"config_hash": config_hash(cfg), "seed": cfg["seed"], "plans": plans}
        with open(cfg["out"], "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
    else:
        w = Writer(cfg["out"], cfg, ["eps", "tau_cap", "tau_max", "shadow_max", "ok"])
        for r in rows:
            w.row(*r)
        w.flush()
    return 0 if all(r[-1] for r in rows) else 2


def cmd_transfer(cfg):
    system = build_map(cfg)
    phi = build_potential(cfg, system)
    op = build_operator(system, phi, cfg["grid_size"])
    eigen = leading_eigen(op)
    w = Writer(cfg["out"], cfg, ["node", "x", "h", "nu", "density"])
    w.lines[0] += (f" lambda={fmt(eigen.lam)} log_lambda={fmt(eigen.log_lam)}"
                   f" iterations={eigen.iterations} residual={fmt(eigen.residual)}")
    for i in range(op.size):
        w.row(i, op.nodes[i], eigen.eigenfunction[i], eigen.eigenmeasure[i],
              eigen.equilibrium_density[i])
    w.flush()
    return 0


def cmd_extension(cfg):
    system = build_map(cfg)
    phi = build_potential(cfg, system)
    dec = DecompositionConfig(cfg["sigma"])
    ext = ExtensionConfig(cfg["a"], cfg["depth"])
    phi_hat = lift_projection(phi)
    report = verify_bowen(system, ext, dec, phi_hat, cfg["eps"],
                          cfg["samples"], seed=cfg["seed"])
    w = Writer(cfg["out"], cfg, ["sigma", "a", "alpha", "eps", "bound",
                                 "empirical_max", "slack", "within"])
    w.row(dec.sigma, ext.a, phi_hat.holder_exponent, cfg["eps"], report.bound,
          report.empirical_max, report.truncation_slack, int(report.within_bound))
    w.flush()
    return 0 if report.within_bound else 2


def cmd_solenoid(cfg):
    sol = SolenoidSystem(cfg["lam_s"], cfg["offset"])
    dec = DecompositionConfig(cfg["sigma"])
    rng = np.random.default_rng(cfg["seed"])
    # measured fiber contraction on one sampled pair per run
    y = float(rng.random())
    pts = fiber_sample(sol, y, 2)
    d0 = math.hypot(pts[0].disk[0] - pts[1].disk[0], pts[0].disk[1] - pts[1].disk[1])
    fa, fb = apply_f(sol, pts[0]), apply_f(sol, pts[1])
    d1 = math.hypot(fa.disk[0] - fb.disk[0], fa.disk[1] - fb.disk[1])
    contraction = d1 / d0

    depth = max(cfg["depth"], 8)
    p = fiber_point(sol, y, tuple(int(b) for b in rng.integers(0, 2, depth + 1)))
    lhs = conjugacy_h(sol, apply_f(sol, p), depth)
    rhs_coords = (float(sol.base.forward(np.float64(p.theta))),) + \
        conjugacy_h(sol, p, depth).coords[:-1]
    defect = max(abs(a - b) for a, b in zip(lhs.coords, rhs_coords))

    c_low, c_high = metric_equivalence(sol, samples=max(cfg["samples"], 100),
                                       depth=12, seed=cfg["seed"])

    def torus_phi(pt):
        return math.cos(2 * math.pi * pt.theta) + 0.5 * pt.disk[0]

    bowen = attractor_bowen_check(sol, dec, torus_phi,
                                  holder_constant=2 * math.pi, holder_exponent=1.0,
                                  eps=cfg["eps"], n_samples=cfg["samples"],
                                  seed=cfg["seed"])
    w = Writer(cfg["out"], cfg, ["check", "value", "reference"])
    w.row("fiber_contraction", contraction, sol.lam_s)
    w.row("conjugacy_defect", defect, 0.0)
    w.row("metric_equiv_c_low", c_low, c_high)
    w.row("metric_equiv_c_high", c_high, c_high)
    w.row("bowen_empirical_max", bowen.empirical_max, bowen.bound)
    w.row("bowen_two_term_ratio", bowen.two_term_max_ratio, 1.0)
    if cfg["cloud_depth"] > 0:
        for i, pt in enumerate(fiber_sample(sol, y, cfg["cloud_depth"])):
            w.row(f"cloud_{i}", pt.theta,
                  f"{fmt(pt.disk[0])};{fmt(pt.disk[1])};"
                  + "".join(str(b) for b in pt.itinerary))
    w.flush()
    ok = (abs(contraction - sol.lam_s) < 1e-9 and bowen.within_bound)
    return 0 if ok else 2


def _gap_cell(payload):
    cfg, sigma = payload
    system = build_map(cfg)
    phi = build_potential(cfg, system)
    [report] = gap_report(system, phi, [sigma], cfg["eps"], cfg["n_max"])
    return report


def cmd_gap_report(cfg):
    sigmas = _sigma_values(cfg)
    workers = int(os.environ.get("PRESSGAP_WORKERS", cfg["workers"]))
    payloads = [(cfg, s) for s in sigmas]
    if workers > 1 and len(payloads) > 1:
        with get_context("fork").Pool(workers) as pool:
            reports = pool.map(_gap_cell, payloads)
    else:
        reports = [_gap_cell(p) for p in payloads]
    w = Writer(cfg["out"], cfg, ["sigma", "eps", "n_max", "p_full", "p_bad",
                                 "gap", "holds"])
    for rep in reports:
        bad_rate = float("-inf") if rep.p_bad.is_empty else rep.p_bad.rate
        w.row(rep.sigma, cfg["eps"], cfg["n_max"], rep.p_full.rate, bad_rate,
              rep.gap, int(rep.hypothesis_holds))
    w.flush()
    return 0


def cmd_check(cfg):
    system = build_map(cfg)
    phi = build_potential(cfg, system)
    dec = DecompositionConfig(cfg["sigma"])
    rng = np.random.default_rng(cfg["seed"])

    [gap] = gap_report(system, phi, [cfg["sigma"]], cfg["eps"], cfg["n_max"])

    ext = ExtensionConfig(cfg["a"], cfg["depth"])
    phi_hat = lift_projection(phi)
    bowen = verify_bowen(system, ext, dec, phi_hat, cfg["eps"],
                         max(50, cfg["samples"] // 4), seed=cfg["seed"])
    bowen_ok = math.isfinite(bowen.bound) and bowen.within_bound

    spec_ok = True
    for _ in range(3):
        segs = _random_good_segments(system, dec, rng, cfg["group_size"],
                                     (cfg["length_min"], cfg["length_max"]))
        plan = glue_base(system, dec, segs, cfg["eps"])
        shadow = verify_shadow(system, plan)
        spec_ok &= (shadow <= cfg["eps"]
                    and all(t <= plan.tau_cap for t in plan.transition_times))

    report = ct_hypothesis_check(gap, bowen_ok, spec_ok)
    w = Writer(cfg["out"], cfg, ["sigma", "eps", "gap_ok", "bowen_ok",
                                 "specification_ok", "passes", "summary"])
    w.row(report.sigma, report.tested_scale, int(report.gap_ok),
          int(report.bowen_ok), int(report.specification_ok),
          int(report.passes), report.summary().replace(",", ";"))
    w.flush()
    return 0 if report.passes else 3


COMMANDS = {
    "pressure": cmd_pressure,
    "decompose": cmd_decompose,
    "glue": cmd_glue,
    "transfer": cmd_transfer,
    "extension": cmd_extension,
    "solenoid": cmd_solenoid,
    "gap-report": cmd_gap_report,
    "check": cmd_check,
}


def build_parser():
    ap = argparse.ArgumentParser(
        prog="pressgap",
        description="pressure, decomposition, specification, and "
                    "equilibrium-state experiments for expanding circle maps")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON configuration document")
    ap.add_argument("--map", dest="map_kind",
                    choices=sorted(BUILTIN_MAPS) + ["tabulated"])
    ap.add_argument("--alpha", type=float, help="intermittency exponent")
    ap.add_argument("--delta", type=float, help="perturbation amplitude")
    ap.add_argument("--potential", dest="potential_kind",
                    choices=["zero", "constant", "geometric", "tabulated"])
    ap.add_argument("--potential-c", type=float)
    ap.add_argument("--potential-t", type=float)
    ap.add_argument("--sigma", type=float)
    ap.add_argument("--sigma-grid", help="comma-separated thresholds")
    ap.add_argument("--eps", type=float)
    ap.add_argument("--eps-list", help="comma-separated scales")
    ap.add_argument("--n-max", type=int)
    ap.add_argument("--grid-size", type=int)
    ap.add_argument("--a", type=float, help="extension metric base")
    ap.add_argument("--depth", type=int, help="extension truncation depth")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--samples", type=int)
    ap.add_argument("--length-min", type=int)
    ap.add_argument("--length-max", type=int)
    ap.add_argument("--group-size", type=int)
    ap.add_argument("--k-max", type=int)
    ap.add_argument("--lam-s", type=float)
    ap.add_argument("--offset", type=float)
    ap.add_argument("--cloud-depth", type=int)
    ap.add_argument("--out", help="output path (.csv, or .json for glue plans)")
    return ap


def resolve_config(args):
    cfg = json.loads(json.dumps(DEFAULTS))  # deep copy
    if args.config:
        with open(args.config) as fh:
            user = json.load(fh)
        for key, value in user.items():
            if key not in cfg:
                raise ValidationError(key, "unknown configuration field")
            if isinstance(cfg[key], dict) and isinstance(value, dict):
                cfg[key].update(value)
            else:
                cfg[key] = value
    if args.map_kind:
        cfg["map"]["kind"] = args.map_kind
    if args.alpha is not None:
        cfg["map"]["alpha"] = args.alpha
    if args.delta is not None:
        cfg["map"]["delta"] = args.delta
    if args.potential_kind:
        cfg["potential"]["kind"] = args.potential_kind
    if args.potential_c is not None:
        cfg["potential"]["c"] = args.potential_c
    if args.potential_t is not None:
        cfg["potential"]["t"] = args.potential_t
    if args.sigma_grid:
        cfg["sigma_grid"] = [float(v) for v in args.sigma_grid.split(",")]
    if args.eps_list:
        cfg["eps_list"] = [float(v) for v in args.eps_list.split(",")]
    for field in _FLOAT_FIELDS:
        v = getattr(args, field.replace("-", "_"), None)
        if v is not None:
            cfg[field] = float(v)
    for field in _INT_FIELDS:
        v = getattr(args, field.replace("-", "_"), None)
        if v is not None:
            cfg[field] = int(v)
    if args.out:
        cfg["out"] = args.out
    validate(cfg)
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except PressgapError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
