"""Experiment kinds, bundled presets and the sweep runner behind the command line.

A config is a JSON-compatible mapping with a ``kind`` and that kind's
parameters. ``sweep`` lists axes ``{"name": dotted.path, "values": [...]}``;
the cartesian product of all axes is evaluated, each point yielding rows.
"""
from __future__ import annotations

import copy
import itertools
import os
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .diagnostics import analyse, etilde_property_suite, identity_oracle
from .dynamics import ProtocolConfig, joint_final_state
from .errors import ConfigInvalid
from .oscillator import Cat, Coherent, FockSpace, SqueezedDisplaced, prepare_state, state_from_dict
from .phase_space import coherent_approximation, negativity_volume, wigner_of_state
from .predictions import q_factor, squeezed_q, thermal_frequency_split
from .splitting import profile_from_dict, profile_to_dict

UNDEFINED = "undefined"


def _space(cfg) -> FockSpace:
    s = cfg.get("space", {})
    return FockSpace(dim=s.get("dim", 256), kT=s.get("kT", 1.0), hbar_omega=s.get("hbar_omega", 1.0))


def _pair_states(protocol: dict):
    """(psi_i, phi_f) targets from either explicit specs or a named family."""
    if "psi_i" in protocol or "phi_f" in protocol:
        try:
            return state_from_dict(protocol["psi_i"]), state_from_dict(protocol["phi_f"])
        except KeyError as exc:
            raise ConfigInvalid(f"protocol needs both psi_i and phi_f ({exc})") from exc
    fam = protocol.get("family")
    a = protocol.get("alpha")
    if fam is None or a is None:
        raise ConfigInvalid("protocol needs psi_i/phi_f specs or a family with alpha")
    a = float(a)
    if fam == "coherent":
        return Coherent(-a), Coherent(a)
    if fam == "squeezed":
        r = float(protocol.get("r", 0.0))
        return SqueezedDisplaced(-a, r), SqueezedDisplaced(a, r)
    if fam == "cat_symmetric":
        c = Cat.of(a, -a)
        return c, c
    if fam == "cat_one_sided":
        return Cat.of(-a, -(a + 1)), Cat.of(a, a + 1)
    raise ConfigInvalid(f"unknown state family {fam!r}")


def _opt(x):
    return None if x is None else float(x)


# --- kinds ----------------------------------------------------------------------

def run_aqc(cfg, convergence_check=False):
    space = _space(cfg)
    profile = profile_from_dict(cfg["profile"])
    proto = cfg.get("protocol", {})
    psi_i, phi_f = _pair_states(proto)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = analyse(space, profile, psi_i, phi_f, _opt(proto.get("tau")),
                      proto.get("method", "quadrature"), convergence_check)
    row = {k: res.as_dict()[k] for k in ("D", "epsilon", "one_minus_R")}
    row.update(res.as_dict())
    if convergence_check:
        row["convergence_delta"] = max(res.forward.convergence_delta, res.reverse.convergence_delta)
    return [row]


def run_q_inference(cfg, convergence_check=False):
    chi = float(cfg["chi"])
    s = cfg.get("space", {})
    space = FockSpace.from_chi(chi, dim=s.get("dim", 256), hbar_omega=s.get("hbar_omega", 1.0))
    proto = cfg.get("protocol", {})
    a_i, a_f = float(proto["alpha_i"]), float(proto["alpha_f"])
    row = {}
    for name, prof in cfg["profiles"].items():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = analyse(space, profile_from_dict(prof), Coherent(a_i), Coherent(a_f),
                          _opt(proto.get("tau")), proto.get("method", "quadrature"),
                          convergence_check, with_epsilon=False)
        row[f"q_{name}"] = res.q_inferred
    row["q_analytic"] = q_factor(chi)
    return [row]


def run_thermal_split(cfg, convergence_check=False):
    kT = float(cfg.get("kT", 1.0))
    chi = float(cfg["chi"])
    hw_T, thermal, vacuum = thermal_frequency_split(FockSpace(2, kT=kT, hbar_omega=2 * chi * kT))
    return [{"hbar_omega_T": hw_T, "thermal_part": thermal, "vacuum_part": vacuum}]


def run_squeezed_q(cfg, convergence_check=False):
    chi, r = float(cfg["chi"]), float(cfg["r"])
    a_i, a_f = float(cfg["alpha_i"]), float(cfg["alpha_f"])
    axis = cfg.get("axis", "position")
    if axis == "momentum":
        a_i, a_f = 1j * a_i, 1j * a_f
    elif axis != "position":
        raise ConfigInvalid(f"axis must be position or momentum, got {axis!r}")
    return [{"q": squeezed_q(a_i, r, a_f, r, chi, float(cfg.get("hbar_omega", 1.0)))}]


def run_identities(cfg, convergence_check=False):
    res = identity_oracle(int(cfg.get("dim", 64)), float(cfg["m"]), float(cfg["n"]))
    return [{"identity": str(k), "residual": v} for k, v in res.items()]


def run_etilde_suite(cfg, convergence_check=False):
    tol = float(cfg.get("tolerance", 1e-8))
    res = etilde_property_suite(_space(cfg))
    return [{"property": k, "residual": v, "tolerance": tol, "passed": bool(v < tol)}
            for k, v in res.items()]


def wigner_summary(cfg):
    """Evolve the configured state and return (grid, summary dict)."""
    space = _space(cfg)
    proto = cfg.get("protocol", {})
    prepared = state_from_dict(proto["prepared"])
    branch = proto.get("branch", "e")
    tau = _opt(proto.get("tau"))
    if branch == "initial":
        state = prepare_state(space, prepared)
    else:
        cfgp = ProtocolConfig(space, profile_from_dict(cfg["profile"]), prepared, prepared, tau=tau)
        e, g, _ = joint_final_state(cfgp)
        state = {"e": e, "g": g}.get(branch)
        if state is None:
            raise ConfigInvalid(f"branch must be e, g or initial, got {branch!r}")
    grid_cfg = cfg.get("grid", {})
    grid = wigner_of_state(space, state, int(grid_cfg.get("n_points", 512)), _opt(grid_cfg.get("span")))
    approx = wigner_of_state(space, coherent_approximation(space, state),
                             int(grid_cfg.get("n_points", 512)), _opt(grid_cfg.get("span")))
    ops = space.operators
    summary = {"min_value": grid.min_value,
               "negativity_volume": negativity_volume(grid),
               "normalization": grid.normalization(),
               "mean_X": state.expectation(ops.position).real,
               "mean_P": state.expectation(ops.momentum).real,
               "mean_energy": state.expectation(ops.H_B).real,
               "coherent_approx_min_value": approx.min_value,
               "coherent_approx_negativity_volume": negativity_volume(approx)}
    return grid, summary


def grid_rows(grid) -> list[dict]:
    X, P = np.meshgrid(grid.x_axis, grid.p_axis, indexing="ij")
    return [{"x": float(x), "p": float(p), "W": float(w)}
            for x, p, w in zip(X.ravel(), P.ravel(), grid.values.ravel())]


def run_wigner(cfg, convergence_check=False):
    return grid_rows(wigner_summary(cfg)[0])


KINDS = {
    "aqc": run_aqc,
    "q_inference": run_q_inference,
    "thermal_split": run_thermal_split,
    "squeezed_q": run_squeezed_q,
    "identities": run_identities,
    "etilde_suite": run_etilde_suite,
    "wigner": run_wigner,
}


# --- presets -------------------------------------------------------------------

def _flat(E_i, E_f, x_i, x_f):
    return {"kind": "flat_ends", "E_i": E_i, "E_f": E_f, "x_i": x_i, "x_f": x_f}


def _grid(a, b, n):
    return [round(float(v), 12) for v in np.linspace(a, b, n)]


_FIG4_SPACE = {"dim": 256, "kT": 1.0, "hbar_omega": 1.0}
_FIG4_PROFILE = _flat(1.0, 2.0, -4.0, 4.0)
_FIG5_PROFILES = {
    "flat": _flat(1.0, 2.0, -2.0, 2.0),
    "sin": {"kind": "sinusoidal", "E_i": 1.0, "E_f": 2.0, "x_i": -2.0, "x_f": 2.0},
    "linear": {"kind": "linear", "E_i": 1.0, "E_f": 2.0, "x_i": -2.0, "x_f": 2.0},
}

PRESETS = {
    "fig1_thermal_split": {
        "description": "hbar omega_T and its thermal and vacuum parts vs chi (kT = 1)",
        "kind": "thermal_split", "kT": 1.0, "chi": 1.0,
        "sweep": [{"name": "chi", "values": [round(float(v), 12) for v in np.logspace(-2, 1, 31)]}],
    },
    "fig2_squeezed_q": {
        "description": "q = dE~/W_q for squeezed pairs, position and momentum displacements",
        "kind": "squeezed_q", "alpha_i": -2.0, "alpha_f": 1.0, "hbar_omega": 1.0,
        "axis": "position", "r": 0.0, "chi": 0.5,
        "sweep": [{"name": "axis", "values": ["position", "momentum"]},
                  {"name": "r", "values": [-1.0, 0.0, 1.0]},
                  {"name": "chi", "values": _grid(0.02, 3.0, 150)}],
    },
    "fig4_coherent": {
        "description": "D, epsilon and 1-R for coherent pairs alpha_f = -alpha_i",
        "kind": "aqc", "space": dict(_FIG4_SPACE), "profile": dict(_FIG4_PROFILE),
        "protocol": {"family": "coherent", "alpha": 6.0, "tau": None},
        "sweep": [{"name": "protocol.alpha", "values": _grid(1.0, 10.0, 19)}],
    },
    "fig4_squeezed": {
        "description": "D, epsilon and 1-R for squeezed pairs with r = -1 and r = +1",
        "kind": "aqc", "space": {**_FIG4_SPACE, "dim": 384}, "profile": dict(_FIG4_PROFILE),
        "protocol": {"family": "squeezed", "alpha": 6.0, "r": 1.0, "tau": None},
        "sweep": [{"name": "protocol.r", "values": [-1.0, 1.0]},
                  {"name": "protocol.alpha", "values": _grid(1.0, 9.0, 17)}],
    },
    "fig4_cat": {
        "description": "D, epsilon and 1-R for symmetric and one-sided cat pairs",
        "kind": "aqc", "space": dict(_FIG4_SPACE), "profile": dict(_FIG4_PROFILE),
        "protocol": {"family": "cat_symmetric", "alpha": 3.0, "tau": None},
        "sweep": [{"name": "protocol.family", "values": ["cat_symmetric", "cat_one_sided"]},
                  {"name": "protocol.alpha", "values": _grid(1.0, 8.0, 15)}],
    },
    "fig5_potentials": {
        "description": "q inferred from simulated probabilities for three level-shift shapes",
        "kind": "q_inference", "space": {"dim": 256, "hbar_omega": 1.0}, "chi": 0.5,
        "protocol": {"alpha_i": -5.0, "alpha_f": 4.0, "tau": None},
        "profiles": copy.deepcopy(_FIG5_PROFILES),
        "sweep": [{"name": "chi", "values": _grid(0.1, 1.0, 10)}],
    },
    "fig8_wigner": {
        "description": "Wigner function of the excited branch after crossing a steep ramp",
        "kind": "wigner", "space": {"dim": 256, "kT": 1.0, "hbar_omega": 1.0},
        "profile": _flat(1.0, 21.0, -2.0, 2.0),
        "protocol": {"prepared": {"kind": "coherent", "alpha": -9.0}, "branch": "e", "tau": None},
        "grid": {"n_points": 512, "span": None},
    },
    "identities": {
        "description": "residuals of the exponential operator identities 1-6",
        "kind": "identities", "dim": 64, "m": 0.2, "n": 0.1,
        "sweep": [{"name": "m", "values": [-0.3, 0.0, 0.2, 0.3]},
                  {"name": "n", "values": [-0.3, 0.1, 0.3]}],
    },
    "etilde_suite": {
        "description": "effective-potential properties 1-6 on a deterministic state family",
        "kind": "etilde_suite", "space": {"dim": 128, "kT": 1.0, "hbar_omega": 1.0},
        "tolerance": 1e-8,
    },
}


def preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigInvalid(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return copy.deepcopy(PRESETS[name])


# --- config plumbing -----------------------------------------------------------

def _lookup(cfg, path):
    node = cfg
    for key in path.split("."):
        if not isinstance(node, dict) or key not in node:
            raise ConfigInvalid(f"sweep parameter {path!r} does not name a config key")
        node = node[key]
    return node


def set_path(cfg: dict, path: str, value) -> None:
    keys = path.split(".")
    node = cfg
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigInvalid(f"cannot set {path!r}: {key!r} is not a mapping")
    node[keys[-1]] = value


def validate(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigInvalid("config must be a JSON object")
    if cfg.get("kind") not in KINDS:
        raise ConfigInvalid(f"unknown kind {cfg.get('kind')!r}; expected one of {sorted(KINDS)}")
    sweep = cfg.get("sweep", [])
    if not isinstance(sweep, list):
        raise ConfigInvalid("sweep must be a list of axes")
    for ax in sweep:
        if not isinstance(ax, dict) or "name" not in ax or "values" not in ax:
            raise ConfigInvalid(f"sweep axis needs name and values, got {ax!r}")
        if not isinstance(ax["values"], list) or not ax["values"]:
            raise ConfigInvalid(f"sweep axis {ax['name']!r} has no values")
        _lookup(cfg, ax["name"])
    if "profile" in cfg:
        profile_from_dict(cfg["profile"])
    if "space" in cfg:
        _space(cfg)
    return cfg


def sweep_points(cfg: dict) -> list[tuple[dict, dict]]:
    """(axis values, resolved config) for every point, in sweep order."""
    axes = cfg.get("sweep", [])
    base = {k: v for k, v in cfg.items() if k not in ("sweep", "description", "outputs")}
    if not axes:
        return [({}, base)]
    out = []
    for combo in itertools.product(*(ax["values"] for ax in axes)):
        point = copy.deepcopy(base)
        labels = {}
        for ax, val in zip(axes, combo):
            set_path(point, ax["name"], val)
            labels[ax["name"].split(".")[-1]] = val
        out.append((labels, point))
    return out


def _numeric_delta(a: dict, b: dict) -> float:
    worst = 0.0
    for k, v in a.items():
        w = b.get(k)
        if isinstance(v, float) and isinstance(w, float) and np.isfinite(v) and np.isfinite(w):
            worst = max(worst, abs(v - w) / max(abs(v), 1e-300))
    return worst


def evaluate_point(args) -> list[dict]:
    labels, point, convergence_check = args
    fn = KINDS[point["kind"]]
    rows = fn(point, convergence_check=convergence_check)
    if convergence_check and point["kind"] == "q_inference":
        big = copy.deepcopy(point)
        set_path(big, "space.dim", 2 * int(point.get("space", {}).get("dim", 256)))
        delta = max(_numeric_delta(r, s) for r, s in zip(rows, fn(big)))
        for r in rows:
            r["convergence_delta"] = delta
    return [{**labels, **r} for r in rows]


def workers() -> int:
    try:
        n = int(os.environ.get("AQC_WORKERS", "1"))
    except ValueError as exc:
        raise ConfigInvalid("AQC_WORKERS must be an integer") from exc
    return max(1, n)


def run_config(cfg: dict, convergence_check: bool = False) -> list[dict]:
    """Evaluate all sweep points; rows are ordered by sweep index."""
    validate(cfg)
    jobs = [(labels, point, convergence_check) for labels, point in sweep_points(cfg)]
    n = min(workers(), len(jobs))
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            chunks = list(pool.map(evaluate_point, jobs))
    else:
        chunks = [evaluate_point(j) for j in jobs]
    return [row for chunk in chunks for row in chunk]


def resolved(cfg: dict) -> dict:
    """The config with profile and space fields normalized, for the sidecar."""
    out = copy.deepcopy(cfg)
    if "profile" in out:
        out["profile"] = profile_to_dict(profile_from_dict(out["profile"]))
    if "space" in out:
        sp = _space(out)
        out["space"] = {"dim": sp.dim, "kT": sp.kT, "hbar_omega": sp.hbar_omega}
        if out.get("kind") == "q_inference":
            del out["space"]["kT"]  # set by chi at each point
    return out
