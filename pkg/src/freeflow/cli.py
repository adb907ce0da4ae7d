"""Configuration-driven experiment runner.

One subcommand per library operation family; JSON config in, JSON report and
CSV dumps out. Exit code 0 iff every declared tolerance check passes. Reports
are deterministic for a fixed config and seed (timings live under a separate
key that is excluded from that contract).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from importlib import resources

import numpy as np

from . import domain as dm
from . import fields as fl
from . import flows as fw
from . import potential as pt
from . import transport as tr
from .errors import ConfigInvalid, FreeflowError, MissingSeries, NotConservative

SUBCOMMANDS = (
    "rasterize", "dist", "lipnorm", "reconstruct", "conservativity",
    "spindle", "loopsmear", "beckmann", "kantorovich", "quotient",
    "compare", "vortex-demo", "plot-data",
)


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

def load_config(path):
    """Read a config file; 'fixture:NAME' resolves to a bundled fixture."""
    if isinstance(path, str) and path.startswith("fixture:"):
        name = path.split(":", 1)[1]
        ref = resources.files("freeflow.fixtures").joinpath(f"{name}.json")
        if not ref.is_file():
            raise ConfigInvalid(f"unknown fixture {name!r}")
        raw = ref.read_bytes()
    else:
        if not os.path.exists(path):
            raise ConfigInvalid(f"config file not found: {path}")
        with open(path, "rb") as f:
            raw = f.read()
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigInvalid("config root must be an object")
    return cfg, hashlib.sha256(raw).hexdigest()


def _require(cfg, key, command):
    if key not in cfg:
        raise ConfigInvalid(f"command {command!r} needs a {key!r} block")
    return cfg[key]


def build_domain_from_config(cfg):
    if "domain" not in cfg:
        raise ConfigInvalid("config needs a 'domain' block")
    d = cfg["domain"]
    for key in ("outer", "h"):
        if key not in d:
            raise ConfigInvalid(f"domain block needs {key!r}")
    if float(d["h"]) <= 0:
        raise ConfigInvalid("domain h must be positive")
    spec = dm.DomainSpec.from_json_dict(d)
    return dm.build_domain(spec)


def scalar_source(dom, cfg):
    """Scalar field from a config block."""
    kind = cfg.get("kind")
    if kind == "csv":
        field = fl.load_field_csv(dom, cfg["path"])
        if field.values.ndim != 1:
            raise ConfigInvalid("csv holds a vector field, expected scalar")
        return field
    if kind == "coordinate":
        ax = int(cfg.get("axis", 1)) - 1
        return fl.sample_scalar_field(dom, lambda p: p[:, ax])
    if kind == "linear":
        a = np.asarray(cfg["a"], dtype=float)
        return fl.sample_scalar_field(dom, lambda p: p @ a)
    if kind == "sine":
        amp = float(cfg.get("amplitude", 1.0))
        fx, fy = cfg.get("freq", [1.0, 0.0])
        ph = float(cfg.get("phase", 0.0))
        return fl.sample_scalar_field(
            dom, lambda p: amp * np.sin(np.pi * (fx * p[:, 0] + fy * p[:, 1]) + ph))
    if kind == "distance":
        from scipy.sparse.csgraph import dijkstra
        dist = dijkstra(dom.csr, directed=False, indices=dom.basepoint)
        return fl.GridScalarField(dom, dist)
    raise ConfigInvalid(f"unknown scalar field kind {kind!r}")


def vector_source(dom, cfg):
    """Vector field from a config block."""
    kind = cfg.get("kind")
    if kind == "csv":
        field = fl.load_field_csv(dom, cfg["path"])
        if field.values.ndim != 2:
            raise ConfigInvalid("csv holds a scalar field, expected vector")
        return field
    if kind == "constant":
        v = np.asarray(cfg["v"], dtype=float)
        return fl.GridVectorField(dom, np.tile(v, (dom.n_cells, 1)))
    if kind == "vortex":
        an = fl.vortex_field(tuple(cfg.get("center", (0.0, 0.0))),
                             float(cfg.get("min_radius", 0.5)))
        return fl.sample_vector_field(dom, an)
    if kind == "gradient_of":
        return fl.gradient(scalar_source(dom, cfg["scalar"]))
    if kind == "linear_gradient":
        a = np.asarray(cfg["a"], dtype=float)
        return fl.GridVectorField(dom, np.tile(a, (dom.n_cells, 1)))
    if kind == "sine_gradient":
        amp = float(cfg.get("amplitude", 1.0))
        fx, fy = cfg.get("freq", [1.0, 0.0])
        ph = float(cfg.get("phase", 0.0))

        def g(p):
            arg = np.pi * (fx * p[:, 0] + fy * p[:, 1]) + ph
            gx = amp * np.pi * fx * np.cos(arg)
            gy = amp * np.pi * fy * np.cos(arg)
            return np.stack([gx, gy], axis=1)

        return fl.GridVectorField(dom, g(dom.centers))
    if kind == "spindle":
        sf = fw.spindle_field(dom, fw.SpindleSpec.from_json_dict(cfg))
        return sf.grid_values
    raise ConfigInvalid(f"unknown vector field kind {kind!r}")


def molecule_from_config(dom, cfg):
    if "atoms" not in cfg:
        raise ConfigInvalid("molecule block needs 'atoms'")
    pm = [(tuple(a["p"]), float(a["m"])) for a in cfg["atoms"]]
    return tr.Molecule.from_points(dom, pm,
                                   basepoint_relative=bool(cfg.get("basepoint_relative", False)))


def _result(value, units):
    return {"value": value, "units": units}


def _check(name, value, tol, ok=None):
    if ok is None:
        ok = bool(value <= tol)
    return {"name": name, "value": value, "tol": tol, "pass": bool(ok)}


def dump_flow_csv(sol, path):
    """Carrying arcs as (u, v, x1, y1, x2, y2, flow, cost)."""
    net = sol.network
    dom = net.domain
    with open(path, "w") as f:
        f.write("u,v,x1,y1,x2,y2,flow,cost\n")
        for a in np.flatnonzero(sol.arc_flows > 0):
            u, v = int(net.tails[a]), int(net.heads[a])
            cu = dom.centers[net.node_cells[u]]
            cv = dom.centers[net.node_cells[v]]
            f.write(f"{u},{v},{cu[0]!r},{cu[1]!r},{cv[0]!r},{cv[1]!r},"
                    f"{sol.arc_flows[a]!r},{net.costs[a]!r}\n")


# ---------------------------------------------------------------------------
# subcommand handlers: return (results, checks, artifacts, extras)
# ---------------------------------------------------------------------------

def _cmd_rasterize(dom, cfg, out, opts):
    path = os.path.join(out, "mask.csv")
    dm.dump_mask_csv(dom, path)
    results = {
        "n_interior": _result(int(dom.n_cells), "cells"),
        "n_edges": _result(int(dom.n_edges), "edges"),
        "max_boundary_distance": _result(float(dom.dist_to_boundary.max()), "length"),
    }
    return results, [], {"mask": "mask.csv"}, {}


def _cmd_dist(dom, cfg, out, opts):
    block = _require(cfg, "dist", "dist")
    d, path = dm.intrinsic_distance(dom, block["x"], block["y"])
    with open(os.path.join(out, "path.csv"), "w") as f:
        f.write("x,y\n")
        for p in path.vertices:
            f.write(f"{p[0]!r},{p[1]!r}\n")
    results = {"distance": _result(d, "length"),
               "path_vertices": _result(len(path.vertices), "count"),
               "path_valid": _result(bool(dom.validate_path(path)), "bool")}
    checks = []
    if "expected" in block:
        tol = opts["tol"].get("dist", float(block.get("tol", 2 * dom.h)))
        checks.append(_check("dist_abs_error", abs(d - float(block["expected"])), tol))
    return results, checks, {"path": "path.csv"}, {}


def _cmd_lipnorm(dom, cfg, out, opts):
    block = _require(cfg, "lipnorm", "lipnorm")
    f = scalar_source(dom, block["scalar"])
    pairs = block.get("sample_pairs", "all")
    if pairs != "all":
        pairs = int(pairs)
    loc = pt.lipschitz_norm_local(f)
    glob = pt.lipschitz_norm_global(f, pairs, seed=opts["seed"])
    gsup = pt.grad_sup_dual(f)
    defect = abs(loc - gsup)
    results = {"lip_local": _result(loc, "slope"),
               "lip_global": _result(glob, "slope"),
               "grad_sup": _result(gsup, "slope"),
               "isometry_defect": _result(defect, "slope"),
               "k": _result(None, "none"), "h": _result(dom.h, "length")}
    checks = [_check("global_le_local", glob - loc, opts["tol"].get("lipnorm", 1e-12))]
    fl.dump_field_csv(f, os.path.join(out, "scalar.csv"))
    return results, checks, {"scalar": "scalar.csv"}, {}


def _cmd_conservativity(dom, cfg, out, opts):
    block = _require(cfg, "conservativity", "conservativity")
    g = vector_source(dom, block["field"])
    k = int(block.get("k", max(2, int(round(0.25 / (4 * dom.h))))))
    rep = fl.conservativity_check(g, k)
    results = {
        "max_loop_integral": _result(rep.max_loop_integral, "field*length"),
        "raw_max_loop_integral": _result(rep.raw_max_loop_integral, "field*length"),
        "tol_cons": _result(rep.tol, "field*length"),
        "conservative": _result(rep.conservative, "bool"),
        "n_loops": _result(rep.n_loops, "count"),
        "hole_cycles": _result(rep.hole_cycles_found, "count"),
        "k": _result(k, "none"),
    }
    checks = []
    if "expect_conservative" in block:
        want = bool(block["expect_conservative"])
        checks.append(_check("verdict", 0.0 if rep.conservative == want else 1.0, 0.5,
                             ok=rep.conservative == want))
    return results, checks, {}, {}


def _cmd_reconstruct(dom, cfg, out, opts):
    block = _require(cfg, "reconstruct", "reconstruct")
    g = vector_source(dom, block["field"])
    k = int(block.get("k", max(2, int(round(1.0 / (4 * dom.h))))))
    probes = int(block.get("probe_paths", 10))
    res = pt.reconstruct_potential(g, k=k, probe_paths=probes, seed=opts["seed"])
    fl.dump_field_csv(res.potential, os.path.join(out, "potential.csv"))
    loc = pt.lipschitz_norm_local(res.potential)
    results = {
        "residual": _result(res.residual, "potential"),
        "lip_local": _result(loc, "slope"),
        "k": _result(res.k_used, "none"),
        "h": _result(dom.h, "length"),
        "component_restricted": _result(res.component_restricted, "bool"),
    }
    checks = [_check("residual", res.residual, opts["tol"].get(
        "residual", fl.tol_conservative(dom.h, float(np.nanmax(
            np.where(np.isfinite(res.per_cell_path_length), res.per_cell_path_length, 0.0))),
            g.sup_dual_norm())))]
    if "truth" in block:
        truth = scalar_source(dom, block["truth"])
        base = truth.values[dom.basepoint]
        sup = res.potential.support
        err = float(np.abs(res.potential.values[sup] - (truth.values[sup] - base)).max())
        results["sup_error"] = _result(err, "potential")
        if "sup_error_tol" in block or "sup_error" in opts["tol"]:
            tol = opts["tol"].get("sup_error", float(block.get("sup_error_tol")))
            checks.append(_check("sup_error", err, tol))
    return results, checks, {"potential": "potential.csv"}, {}


def _cmd_spindle(dom, cfg, out, opts):
    block = _require(cfg, "spindle", "spindle")
    spec = fw.SpindleSpec.from_json_dict(block)
    sf = fw.spindle_field(dom, spec)
    fl.dump_field_csv(sf.grid_values, os.path.join(out, "spindle.csv"))
    battery = fl.default_test_battery(dom)
    x = np.asarray(spec.x)[None, :]
    y = np.asarray(spec.y)[None, :]
    worst = max(abs(fl.weak_divergence_pairing(sf.grid_values, tf)
                    - float(tf.value(y)[0] - tf.value(x)[0])) for tf in battery)
    bound = dm.vector_norm(np.asarray(spec.y) - np.asarray(spec.x), dom.norm_id) \
        + spec.psi.slope_bound * spec.epsilon
    results = {
        "l1_norm": _result(sf.l1_norm, "length"),
        "l1_bound": _result(float(bound), "length"),
        "pairing_worst_error": _result(worst, "potential"),
        "support_cells": _result(int(sf.grid_values.support.sum()), "cells"),
        "h": _result(dom.h, "length"),
    }
    checks = [
        _check("pairing", worst, opts["tol"].get("pairing", 1e-2)),
        _check("l1_bound", sf.l1_norm - float(bound), opts["tol"].get("l1_slack", 0.02)),
    ]
    return results, checks, {"field": "spindle.csv"}, {}


def _cmd_loopsmear(dom, cfg, out, opts):
    block = _require(cfg, "loopsmear", "loopsmear")
    loop = dm.PLPath(np.asarray(block["loop"], dtype=float), closed=True)
    k = int(block["k"])
    hs = fw.loop_smear(dom, loop, k)
    fl.dump_field_csv(hs, os.path.join(out, "loopsmear.csv"))
    battery = fl.default_test_battery(dom)
    worst = max(abs(fl.weak_divergence_pairing(hs, tf)) for tf in battery)
    results = {"pairing_worst": _result(worst, "potential"),
               "l1_norm": _result(hs.l1_norm(), "length"),
               "support_cells": _result(int(hs.support.sum()), "cells"),
               "k": _result(k, "none")}
    checks = [_check("divergence_free", worst, opts["tol"].get("pairing", 1e-2))]
    return results, checks, {"field": "loopsmear.csv"}, {}


def _norm_command(dom, cfg, out, opts, which):
    block = _require(cfg, "molecule", which)
    mu = molecule_from_config(dom, block)
    solver = tr.beckmann_norm if which == "beckmann" else tr.kantorovich_norm
    norm, sol = solver(dom, mu, opts["mass_scale"])
    cert = tr.duality_certificate(dom, mu, sol)
    dump_flow_csv(sol, os.path.join(out, f"{which}_arcs.csv"))
    summary = {"norm": norm, "gap": cert.gap, "lip": cert.lip_of_potential,
               "mass_scale": opts["mass_scale"]}
    with open(os.path.join(out, f"{which}_summary.json"), "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
    results = {"norm": _result(norm, "length*mass"),
               "gap": _result(cert.gap, "length*mass"),
               "lip": _result(cert.lip_of_potential, "slope"),
               "atoms": _result(len(mu), "count")}
    checks = [
        _check("duality_gap", cert.gap, opts["tol"].get("gap", 1e-9)),
        _check("dual_lipschitz", cert.lip_of_potential - 1.0, opts["tol"].get("lip", 1e-9)),
    ]
    arts = {"arcs": f"{which}_arcs.csv", "summary": f"{which}_summary.json"}
    return results, checks, arts, {}


def _cmd_quotient(dom, cfg, out, opts):
    block = _require(cfg, "quotient", "quotient")
    g = vector_source(dom, block["field"])
    qr = tr.quotient_norm(dom, g, opts["mass_scale"])
    cert = tr.duality_certificate(dom, qr.mu, qr.flow)
    dump_flow_csv(qr.flow, os.path.join(out, "quotient_arcs.csv"))
    with open(os.path.join(out, "molecule.csv"), "w") as f:
        f.write("cell,cx,cy,mass\n")
        for c, m in qr.mu.atoms:
            f.write(f"{c},{dom.centers[c][0]!r},{dom.centers[c][1]!r},{m!r}\n")
    results = {
        "norm": _result(qr.norm, "length*mass"),
        "grid_l1": _result(qr.grid_l1, "length*mass"),
        "member_cost": _result(qr.member_cost, "length*mass"),
        "atoms": _result(len(qr.mu), "count"),
        "gap": _result(cert.gap, "length*mass"),
        "lip": _result(cert.lip_of_potential, "slope"),
    }
    checks = [
        _check("member_feasibility", qr.norm - qr.member_cost, opts["tol"].get("member", 1e-9)),
        _check("duality_gap", cert.gap, opts["tol"].get("gap", 1e-9)),
    ]
    arts = {"arcs": "quotient_arcs.csv", "molecule": "molecule.csv"}
    return results, checks, arts, {}


def _cmd_compare(dom, cfg, out, opts):
    block = _require(cfg, "molecule", "compare")
    mu = molecule_from_config(dom, block)
    bn, bsol = tr.beckmann_norm(dom, mu, opts["mass_scale"])
    kn, ksol = tr.kantorovich_norm(dom, mu, opts["mass_scale"])
    bcert = tr.duality_certificate(dom, mu, bsol)
    kcert = tr.duality_certificate(dom, mu, ksol)
    dump_flow_csv(bsol, os.path.join(out, "beckmann_arcs.csv"))
    results = {
        "beckmann": _result(bn, "length*mass"),
        "kantorovich": _result(kn, "length*mass"),
        "difference": _result(abs(bn - kn), "length*mass"),
        "beckmann_gap": _result(bcert.gap, "length*mass"),
        "kantorovich_gap": _result(kcert.gap, "length*mass"),
        "beckmann_lip": _result(bcert.lip_of_potential, "slope"),
        "kantorovich_lip": _result(kcert.lip_of_potential, "slope"),
        "atoms": _result(len(mu), "count"),
    }
    tol = opts["tol"].get("equal", 1e-9)
    checks = [
        _check("beckmann_eq_kantorovich", abs(bn - kn), tol),
        _check("beckmann_gap", bcert.gap, opts["tol"].get("gap", 1e-9)),
        _check("kantorovich_gap", kcert.gap, opts["tol"].get("gap", 1e-9)),
        _check("beckmann_lip", bcert.lip_of_potential - 1.0, opts["tol"].get("lip", 1e-9)),
        _check("kantorovich_lip", kcert.lip_of_potential - 1.0, opts["tol"].get("lip", 1e-9)),
    ]
    return results, checks, {"arcs": "beckmann_arcs.csv"}, {}


def _cmd_vortex_demo(dom, cfg, out, opts):
    block = cfg.get("vortex_demo", {})
    k = int(block.get("k", 16))
    center = tuple(block.get("center", (0.0, 0.0)))
    min_radius = float(block.get("min_radius", 0.5))
    g = fl.sample_vector_field(dom, fl.vortex_field(center, min_radius))
    m = fl.make_mollifier(dom, k)
    defect = fl.jacobian_symmetry_defect(g, m)
    rep = fl.conservativity_check(g, k)
    refused = False
    try:
        pt.reconstruct_potential(g, k=k, probe_paths=2, seed=opts["seed"])
    except NotConservative:
        refused = True
    sub_ok = None
    if "subsquare" in block:
        sub = dict(cfg["domain"])
        sub["outer"] = block["subsquare"]
        sub.pop("holes", None)
        sub.pop("basepoint", None)
        sdom = dm.build_domain(dm.DomainSpec.from_json_dict(sub))
        sg = fl.sample_vector_field(sdom, fl.vortex_field(center, min_radius))
        sub_rep = fl.conservativity_check(sg, k)
        sub_ok = sub_rep.conservative
    two_pi = 2.0 * np.pi
    results = {
        "symmetry_defect": _result(defect, "1/length"),
        "hole_loop_integral": _result(rep.max_loop_integral, "field*length"),
        "two_pi": _result(two_pi, "none"),
        "conservative": _result(rep.conservative, "bool"),
        "reconstruction_refused": _result(refused, "bool"),
        "subsquare_conservative": _result(sub_ok, "bool"),
        "k": _result(k, "none"),
    }
    checks = [
        _check("symmetry_defect", defect, opts["tol"].get("defect", 0.05)),
        _check("loop_vs_2pi", abs(rep.max_loop_integral - two_pi),
               opts["tol"].get("loop", 0.05)),
        _check("not_conservative", 0.0 if not rep.conservative else 1.0, 0.5,
               ok=not rep.conservative),
        _check("reconstruction_refused", 0.0 if refused else 1.0, 0.5, ok=refused),
    ]
    if sub_ok is not None:
        checks.append(_check("subsquare_conservative", 0.0 if sub_ok else 1.0, 0.5, ok=sub_ok))
    return results, checks, {}, {}


_HANDLERS = {
    "rasterize": _cmd_rasterize,
    "dist": _cmd_dist,
    "lipnorm": _cmd_lipnorm,
    "conservativity": _cmd_conservativity,
    "reconstruct": _cmd_reconstruct,
    "spindle": _cmd_spindle,
    "loopsmear": _cmd_loopsmear,
    "beckmann": lambda d, c, o, p: _norm_command(d, c, o, p, "beckmann"),
    "kantorovich": lambda d, c, o, p: _norm_command(d, c, o, p, "kantorovich"),
    "quotient": _cmd_quotient,
    "compare": _cmd_compare,
    "vortex-demo": _cmd_vortex_demo,
}


def run(config_path, subcommand, out_dir=".", seed=0, mass_scale=tr.DEFAULT_MASS_SCALE,
        tol_overrides=None):
    """Execute one subcommand; returns (report, exit_code) and writes
    report.json plus artifacts under out_dir."""
    cfg, digest = load_config(config_path)
    os.makedirs(out_dir, exist_ok=True)
    opts = {"seed": int(seed), "mass_scale": int(mass_scale),
            "tol": dict(tol_overrides or {})}
    t0 = time.perf_counter()
    dom = build_domain_from_config(cfg)
    results, checks, artifacts, extras = _HANDLERS[subcommand](dom, cfg, out_dir, opts)
    elapsed = time.perf_counter() - t0
    report = {
        "command": subcommand,
        "config_digest": digest,
        "params": {
            "h": dom.h, "norm": dom.norm_id, "K": dom.spec.K,
            "seed": opts["seed"], "mass_scale": opts["mass_scale"],
            "n_cells": int(dom.n_cells),
        },
        "results": results,
        "checks": checks,
        "artifacts": artifacts,
    }
    report.update(extras)
    ok = all(c["pass"] for c in checks)
    body = json.dumps(report, indent=2, sort_keys=True)
    report["timings"] = {"total_s": elapsed}
    with open(os.path.join(out_dir, "report.json"), "w") as f:
        f.write(json.dumps(report, indent=2, sort_keys=True))
    with open(os.path.join(out_dir, "report_body.json"), "w") as f:
        f.write(body)  # deterministic body (no timings)
    return report, (0 if ok else 1)


def emit_plot_data(report, kind, out_dir="."):
    """Flat CSV for external plotting from a report (dict or path)."""
    if isinstance(report, str):
        with open(report) as f:
            report = json.load(f)
        base = os.path.dirname(os.path.abspath(report.get("_path", ""))) or "."
    artifacts = report.get("artifacts", {})
    if kind == "flow":
        src = artifacts.get("arcs")
        if not src:
            raise MissingSeries("report has no flow arcs artifact")
        return src
    if kind == "field":
        src = artifacts.get("field") or artifacts.get("scalar") or artifacts.get("potential")
        if not src:
            raise MissingSeries("report has no field artifact")
        return src
    if kind == "convergence":
        series = report.get("results", {}).get("convergence")
        if not series:
            raise MissingSeries("report has no convergence series")
        path = os.path.join(out_dir, "convergence.csv")
        with open(path, "w") as f:
            f.write("h,error\n")
            for h, err in series["value"]:
                f.write(f"{h!r},{err!r}\n")
        return path
    raise MissingSeries(f"unknown plot kind {kind!r}")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _parse_tols(pairs):
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise ConfigInvalid(f"--tol expects NAME=VAL, got {item!r}")
        name, val = item.split("=", 1)
        out[name] = float(val)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="freeflow",
        description="Lipschitz potentials, minimal flows and free-space norms "
                    "on rasterized 2-D domains.")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", default=None,
                        help="config JSON path or fixture:NAME")
    parser.add_argument("--out", default="freeflow-out", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--mass-scale", type=int, default=tr.DEFAULT_MASS_SCALE)
    parser.add_argument("--tol", action="append", default=[],
                        metavar="NAME=VAL", help="override a named tolerance")
    parser.add_argument("--report", default=None, help="report path for plot-data")
    parser.add_argument("--kind", default=None, choices=("field", "flow", "convergence"),
                        help="series kind for plot-data")
    args = parser.parse_args(argv)

    try:
        if args.subcommand == "plot-data":
            if not args.report or not args.kind:
                raise ConfigInvalid("plot-data needs --report and --kind")
            path = emit_plot_data(args.report, args.kind, args.out)
            print(json.dumps({"plot_data": path}))
            return 0
        config = args.config
        if config is None:
            if args.subcommand == "vortex-demo":
                config = "fixture:vortex-demo"
            else:
                raise ConfigInvalid("--config is required")
        report, code = run(config, args.subcommand, out_dir=args.out,
                           seed=args.seed, mass_scale=args.mass_scale,
                           tol_overrides=_parse_tols(args.tol))
        print(json.dumps({k: report[k] for k in ("command", "results", "checks")},
                         indent=2, sort_keys=True))
        return code
    except ConfigInvalid as exc:
        print(json.dumps({"error": {"code": exc.code, "message": str(exc)}}))
        return 2
    except FreeflowError as exc:
        print(json.dumps({"error": {"code": exc.code, "message": str(exc)}}))
        return 3


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
