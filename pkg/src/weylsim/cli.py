"""Command-line front end: ``weylsim {simulate,lindblad,wrb,fit,vqe,norms}``.

Every command writes a JSON envelope ``{command, config, results, provenance}``.
Running a command with ``--config envelope.json`` replays the recorded
configuration; flags given explicitly override values from the config file.

Exit codes: 0 success, 2 parse errors, 3 validation errors, 4 resource caps.
Errors are reported as a JSON object on stderr.
"""
from __future__ import annotations

import csv
import json
import math
import os
import sys
import time
import warnings
from pathlib import Path
from typing import Dict, List, Optional

import click
import numpy as np

from . import __version__
from .kernels import BACKEND
from .noise import CliffordGate, RotationGate, WeylDiagonalChannel, dephasing, depolarizing, rotation_superop
from .reps import (ArityExceeded, Basis, Circuit, LocalSuperOp, channel_to_superop, circuit_norm_bound,
                   compose_superops, computational_state, embed_superop, observable_to_weyl, pauli_observable,
                   state_from_blocks, state_to_weyl, weyl_observable)
from .weyl_core import SizeLimitExceeded, WeylIndex

EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_RESOURCE = 4


class CLIError(Exception):
    """Error with an exit code and machine-readable location."""

    code = EXIT_VALIDATION

    def __init__(self, message: str, path: Optional[str] = None, field: Optional[str] = None):
        super().__init__(message)
        self.path = path
        self.field = field

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), "path": self.path, "field": self.field,
                "exit_code": self.code}


class ParseError(CLIError):
    code = EXIT_PARSE


class ValidationError(CLIError):
    code = EXIT_VALIDATION


class ResourceError(CLIError):
    code = EXIT_RESOURCE


# ---------------------------------------------------------------------------
# file loading
# ---------------------------------------------------------------------------
def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ParseError(f"file not found: {path}", str(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", str(path))


def parse_complex(x, path=None, field=None) -> complex:
    """A number or an ``[re, im]`` pair."""
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise ParseError(f"expected a number or [re, im] pair, got {x!r}", path, field)


def parse_matrix(x, path=None, field=None) -> np.ndarray:
    """Nested list of numbers or ``[re, im]`` pairs."""
    if not isinstance(x, list) or not x or not all(isinstance(r, list) for r in x):
        raise ParseError("expected a matrix (list of rows)", path, field)
    rows = [[parse_complex(v, path, field) for v in r] for r in x]
    if len({len(r) for r in rows}) != 1:
        raise ParseError("matrix rows have different lengths", path, field)
    return np.array(rows, dtype=complex)


def _require(obj: dict, key: str, path, prefix: str = ""):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"missing field '{prefix}{key}'", str(path), f"{prefix}{key}")
    return obj[key]


def load_weyl_diagonal(path, d: Optional[int] = None) -> WeylDiagonalChannel:
    """Eigenvalue file ``{d, m, eigenvalues: [...]}`` indexed by local code."""
    data = load_json(path)
    dd = int(_require(data, "d", path))
    m = int(data.get("m", 1))
    lam = np.array([parse_complex(v, str(path), "eigenvalues") for v in _require(data, "eigenvalues", path)])
    if d is not None and dd != d:
        raise ValidationError(f"eigenvalue file has d={dd}, expected {d}", str(path), "d")
    try:
        return WeylDiagonalChannel(lam, dd, m, label=f"weyl_diagonal:{Path(path).name}")
    except ValueError as exc:
        raise ValidationError(str(exc), str(path), "eigenvalues")


def layer_from_entry(entry: dict, d: int, basis, path, index: int, base_dir: Path) -> LocalSuperOp:
    """One circuit-file layer ``{kind, support, params}``."""
    pre = f"layers[{index}]."
    kind = _require(entry, "kind", path, pre)
    support = tuple(int(q) for q in _require(entry, "support", path, pre))
    params = entry.get("params", {}) or {}
    m = len(support)
    try:
        if kind == "builtin":
            name = str(_require(params, "name", path, pre + "params."))
            if name == "depolarizing":
                return depolarizing(float(_require(params, "p", path, pre + "params.")), m, d).to_superop(
                    support, basis)
            if name == "dephasing":
                ch = dephasing(float(_require(params, "p", path, pre + "params.")), d, m,
                               int(params.get("target", 0)))
                return ch.to_superop(support, basis)
            if name.startswith("clifford:"):
                return CliffordGate.from_word(name.split(":", 1)[1], d, m).to_superop(support, basis, label=name)
            if name.startswith("rotation_y:"):
                if m != 1:
                    raise ValidationError("rotation_y acts on one qubit", str(path), pre + "support")
                return rotation_superop(RotationGate(float(name.split(":", 1)[1]), support[0], d=d), basis)
            if name.startswith("weyl_diagonal:"):
                ch = load_weyl_diagonal(base_dir / name.split(":", 1)[1], d)
                if ch.m != m:
                    raise ValidationError("eigenvalue file arity does not match the support", str(path),
                                          pre + "support")
                return ch.to_superop(support, basis)
            raise ParseError(f"unknown builtin '{name}'", str(path), pre + "params.name")
        if kind == "kraus":
            ops = [parse_matrix(k, str(path), pre + "params.ops") for k in _require(params, "ops", path, pre + "params.")]
            return channel_to_superop(kraus=ops, support=support, d=d, basis=basis, label=entry.get("label", "kraus"))
        if kind == "matrix":
            if "unitary" in params:
                U = parse_matrix(params["unitary"], str(path), pre + "params.unitary")
                return channel_to_superop(unitary=U, support=support, d=d, basis=basis,
                                          label=entry.get("label", "unitary"))
            S = parse_matrix(_require(params, "superop", path, pre + "params."), str(path), pre + "params.superop")
            return channel_to_superop(superop=S, support=support, d=d, basis=basis,
                                      label=entry.get("label", "superop"))
    except CLIError:
        raise
    except (ArityExceeded, SizeLimitExceeded) as exc:
        raise ResourceError(str(exc), str(path), pre.rstrip("."))
    except (ValueError, KeyError, IndexError) as exc:
        raise ValidationError(str(exc), str(path), pre.rstrip("."))
    raise ParseError(f"unknown layer kind '{kind}'", str(path), pre + "kind")


def load_circuit(path) -> Circuit:
    """Circuit file ``{d, n, basis?, layers: [{kind, support, params}]}``."""
    data = load_json(path)
    d = int(_require(data, "d", path))
    n = int(_require(data, "n", path))
    basis = Basis(data.get("basis", "weyl"))
    layers = _require(data, "layers", path)
    if not isinstance(layers, list):
        raise ParseError("'layers' must be a list", str(path), "layers")
    base = Path(path).parent
    circ = Circuit(d, n, basis=basis)
    for i, entry in enumerate(layers):
        op = layer_from_entry(entry, d, basis, path, i, base)
        if max(op.support) >= n:
            raise ValidationError(f"support {op.support} outside {n} qudits", str(path), f"layers[{i}].support")
        circ.append(op)
    return circ


def load_state(path, d: int, n: int, basis=Basis.WEYL):
    """State file: ``{bits: [...]}``, ``{factors: [matrix, ...]}`` or ``{blocks: [{support, matrix}]}``."""
    data = load_json(path)
    try:
        if "bits" in data:
            st = computational_state([int(b) for b in data["bits"]], d=d, basis=basis)
        elif "factors" in data:
            st = state_to_weyl([parse_matrix(f, str(path), "factors") for f in data["factors"]], basis=basis, d=d)
        elif "blocks" in data:
            blocks = [(tuple(b["support"]), parse_matrix(b["matrix"], str(path), "blocks")) for b in data["blocks"]]
            st = state_from_blocks(blocks, n, d, basis)
        else:
            raise ParseError("state file needs 'bits', 'factors' or 'blocks'", str(path))
    except CLIError:
        raise
    except (ValueError, KeyError) as exc:
        raise ValidationError(str(exc), str(path))
    if st.n != n or st.d != d:
        raise ValidationError(f"state has (d={st.d}, n={st.n}), circuit has (d={d}, n={n})", str(path))
    return st


def load_observable(path, d: int, n: int, basis=Basis.WEYL):
    """Observable file: ``{pauli: "ZIZ"}``, ``{weyl: "10|01"}`` or ``{blocks: [{support, matrix}]}``."""
    data = load_json(path)
    try:
        if "pauli" in data:
            ob = pauli_observable(str(data["pauli"]), basis=basis)
        elif "weyl" in data:
            ob = weyl_observable(WeylIndex.from_string(str(data["weyl"]), d), basis=basis)
        elif "blocks" in data:
            blocks = [(tuple(b["support"]), parse_matrix(b["matrix"], str(path), "blocks")) for b in data["blocks"]]
            ob = observable_to_weyl(blocks, n=n, d=d, basis=basis, check_hermitian=bool(data.get("hermitian", True)))
        else:
            raise ParseError("observable file needs 'pauli', 'weyl' or 'blocks'", str(path))
    except CLIError:
        raise
    except (ValueError, KeyError) as exc:
        raise ValidationError(str(exc), str(path))
    if ob.n != n or ob.d != d:
        raise ValidationError(f"observable has (d={ob.d}, n={ob.n}), circuit has (d={d}, n={n})", str(path))
    return ob


def full_map(entries: List[dict], d: int, n: int, path, field: str, base_dir: Path) -> Optional[LocalSuperOp]:
    """Compose a list of layer entries into one map on all ``n`` qudits."""
    if not entries:
        return None
    total = None
    for i, e in enumerate(entries):
        try:
            op = layer_from_entry(e, d, Basis.WEYL, path, i, base_dir)
        except CLIError as exc:
            exc.field = f"{field}.{exc.field}"
            raise
        total = op if total is None else compose_superops(op, total)
    return embed_superop(total, tuple(range(n)))


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------
def resolve_config(ctx: click.Context, params: dict) -> dict:
    """Merge ``--config`` file values under explicitly given flags."""
    cfg_path = params.pop("config", None)
    if not cfg_path:
        return params
    data = load_json(cfg_path)
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    out = dict(params)
    for key, val in params.items():
        src = ctx.get_parameter_source(key)
        explicit = src is not None and src.name in ("COMMANDLINE", "PROMPT")
        if not explicit and key in data:
            out[key] = data[key]
    for key in data:
        if key not in out:
            raise ValidationError(f"unknown config key '{key}'", str(cfg_path), key)
    return out


def _check_eps_delta(cfg: dict):
    if "eps" in cfg and cfg["eps"] is not None and not cfg["eps"] > 0:
        raise ValidationError("eps must be positive", field="eps")
    if "delta" in cfg and cfg["delta"] is not None and not 0 < cfg["delta"] < 1:
        raise ValidationError("delta must lie in (0, 1)", field="delta")
    if "workers" in cfg and int(cfg["workers"]) < 1:
        raise ValidationError("workers must be at least 1", field="workers")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_envelope(command: str, cfg: dict, results: dict, t0: float, samples=None) -> dict:
    env = {
        "command": command,
        "config": _jsonable({k: v for k, v in cfg.items() if k != "out"}),
        "results": _jsonable(results),
        "provenance": {"seed": cfg.get("seed"), "workers": cfg.get("workers"), "version": __version__,
                       "backend": BACKEND, "wall_time": time.perf_counter() - t0, "samples": _jsonable(samples)},
    }
    text = json.dumps(env, indent=2)
    out = cfg.get("out")
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)
    return env


def run_guarded(fn):
    """Map library exceptions to exit codes and a JSON error object."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return fn()
    except CLIError as exc:
        err = exc
    except (SizeLimitExceeded, ArityExceeded, MemoryError) as exc:
        err = ResourceError(str(exc))
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        err = ValidationError(f"{type(exc).__name__}: {exc}")
    click.echo(json.dumps(err.to_dict()), err=True)
    sys.exit(err.code)


# ---------------------------------------------------------------------------
# decay CSV
# ---------------------------------------------------------------------------
DECAY_COLUMNS = ("m", "re", "im", "abs2", "stderr", "runs")


def emit_decay_csv(record, path) -> None:
    """Write ``m, re(q), im(q), |q|^2, stderr, runs`` with round-trip float formatting."""
    if not record.lengths:
        raise ValueError("record is empty")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DECAY_COLUMNS)
        for m in record.lengths:
            q = record.q_hat(m)
            w.writerow([m, repr(float(q.real)), repr(float(q.imag)), repr(float(abs(q) ** 2)),
                        repr(float(record.stderr(m))), record.runs(m)])


def read_decay_csv(path) -> List[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{"m": int(r["m"]), "re": float(r["re"]), "im": float(r["im"]), "abs2": float(r["abs2"]),
             "stderr": float(r["stderr"]), "runs": int(r["runs"])} for r in rows]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------
def _common(f):
    f = click.option("--config", type=str, default=None, help="JSON config or envelope to replay.")(f)
    f = click.option("--out", type=str, default=None, help="Output path (stdout if omitted).")(f)
    f = click.option("--workers", type=int, default=1, envvar="WEYLSIM_WORKERS", show_default=True)(f)
    f = click.option("--seed", type=int, default=0, envvar="WEYLSIM_SEED", show_default=True)(f)
    return f


@click.group()
@click.version_option(__version__)
def main():
    """Quasiprobability simulation and Weyl benchmarking of noisy qudit circuits."""


@main.command()
@click.option("--circuit", required=False)
@click.option("--state", required=False)
@click.option("--observable", required=False)
@click.option("--eps", type=float, default=0.01, show_default=True)
@click.option("--delta", type=float, default=0.05, show_default=True)
@click.option("--picture", type=click.Choice(["schrodinger", "heisenberg"]), default="schrodinger")
@click.option("--samples", type=int, default=None, help="Override the planned sample count.")
@click.option("--prune/--no-prune", default=False, help="Light-cone pruning (Heisenberg only).")
@_common
@click.pass_context
def simulate(ctx, **params):
    """Estimate tr(E C(rho)) by path sampling."""
    from .pathsampler import estimate

    def go():
        cfg = resolve_config(ctx, params)
        _check_eps_delta(cfg)
        for key in ("circuit", "state", "observable"):
            if not cfg.get(key):
                raise ParseError(f"--{key} is required", field=key)
        t0 = time.perf_counter()
        circ = load_circuit(cfg["circuit"])
        rho = load_state(cfg["state"], circ.d, circ.n, circ.basis)
        E = load_observable(cfg["observable"], circ.d, circ.n, circ.basis)
        est = estimate(circ, rho, E, cfg["eps"], cfg["delta"], seed=cfg["seed"], picture=cfg["picture"],
                       workers=cfg["workers"], samples=cfg["samples"], prune=cfg["prune"])
        res = est.to_dict()
        res["M_B"] = est.plan.M_B
        write_envelope("simulate", cfg, res, t0, est.samples)

    run_guarded(go)


@main.command()
@click.option("--model", required=False, help="{d, n, layers: [{support, t, hamiltonian?, jumps?}]}")
@click.option("--state", required=False)
@click.option("--observable", required=False)
@click.option("--eps", type=float, default=0.01, show_default=True)
@click.option("--delta", type=float, default=1.0 / 3.0, show_default=True)
@click.option("--samples", type=int, default=None)
@_common
@click.pass_context
def lindblad(ctx, **params):
    """Estimate tr(E exp(tL)(rho)) with the Poisson path sampler."""
    from .pathsampler import LindbladLayer, estimate_lindblad, lindbladian_superop

    def go():
        cfg = resolve_config(ctx, params)
        _check_eps_delta(cfg)
        for key in ("model", "state", "observable"):
            if not cfg.get(key):
                raise ParseError(f"--{key} is required", field=key)
        t0 = time.perf_counter()
        path = cfg["model"]
        data = load_json(path)
        d, n = int(_require(data, "d", path)), int(_require(data, "n", path))
        layers = []
        for i, L in enumerate(_require(data, "layers", path)):
            support = tuple(_require(L, "support", path, f"layers[{i}]."))
            H = parse_matrix(L["hamiltonian"], path, f"layers[{i}].hamiltonian") if "hamiltonian" in L else None
            jumps = [parse_matrix(J, path, f"layers[{i}].jumps") for J in L.get("jumps", [])]
            gen = lindbladian_superop(H, jumps, support, d)
            layers.append(LindbladLayer(gen, float(_require(L, "t", path, f"layers[{i}]."))))
        rho = load_state(cfg["state"], d, n)
        E = load_observable(cfg["observable"], d, n)
        est, var = estimate_lindblad(layers, rho, E, cfg["eps"], cfg["delta"], seed=cfg["seed"],
                                     workers=cfg["workers"], samples=cfg["samples"])
        res = est.to_dict()
        res["empirical_variance"] = var
        write_envelope("lindblad", cfg, res, t0, est.samples)

    run_guarded(go)


def load_device(path):
    """Device file ``{d, n, U: [layers], T: [layers], T_W: {p} | {eigenvalues}}``."""
    from .wrb import DeviceModel

    data = load_json(path)
    d, n = int(_require(data, "d", path)), int(_require(data, "n", path))
    base = Path(path).parent
    U = full_map(data.get("U", []), d, n, path, "U", base)
    T = full_map(data.get("T", []), d, n, path, "T", base)
    TW = None
    if data.get("T_W"):
        tw = data["T_W"]
        if "p" in tw:
            TW = depolarizing(float(tw["p"]), int(tw.get("m", 1)), d)
        else:
            lam = [parse_complex(v, str(path), "T_W.eigenvalues") for v in _require(tw, "eigenvalues", path, "T_W.")]
            TW = WeylDiagonalChannel(np.array(lam), d, int(tw.get("m", 1)))
    return DeviceModel(d, n, U, T, TW)


@main.command()
@click.option("--device", required=False)
@click.option("--label", required=False, help='Weyl label "a1..an|b1..bn".')
@click.option("--label2", default=None, help="Column label for offdiag mode.")
@click.option("--mode", type=click.Choice(["diag", "offdiag", "phase"]), default="diag")
@click.option("--eps", type=float, default=0.1, show_default=True)
@click.option("--delta", type=float, default=0.05, show_default=True)
@click.option("--m-list", "m_list", default="1,2,3", show_default=True, help="Lengths for phase estimation.")
@click.option("--l-phase", "l_phase", type=int, default=4000, show_default=True)
@click.option("--csv", "csv_path", default=None, help="Also write the decay data as CSV.")
@_common
@click.pass_context
def wrb(ctx, **params):
    """Weyl randomized benchmarking on a synthetic device."""
    from .wrb import BenchmarkRecord, WRBConfig, adaptive_abs_mu, estimate_phase, offdiagonal_mu

    def go():
        cfg = resolve_config(ctx, params)
        _check_eps_delta(cfg)
        for key in ("device", "label"):
            if not cfg.get(key):
                raise ParseError(f"--{key} is required", field=key)
        t0 = time.perf_counter()
        dev = load_device(cfg["device"])
        try:
            w = WeylIndex.from_string(cfg["label"], dev.d)
        except ValueError as exc:
            raise ParseError(str(exc), field="label")
        if w.n != dev.n:
            raise ValidationError("label size does not match the device", field="label")
        rng = np.random.default_rng(cfg["seed"])
        ms = [int(x) for x in str(cfg["m_list"]).split(",") if x.strip()]
        rec = BenchmarkRecord(w)
        wcfg = WRBConfig(w, 1, runs=1)
        res: Dict[str, object] = {"mode": cfg["mode"]}
        if cfg["mode"] == "diag":
            est = adaptive_abs_mu(dev, wcfg, cfg["eps"], cfg["delta"], rng, record=rec)
            res["mu"] = est.to_dict()
            res["mu_true"] = dev.mu(w)
        elif cfg["mode"] == "phase":
            res["phase"] = estimate_phase(dev, wcfg, ms, cfg["l_phase"], rng, record=rec)
            res["mu_true"] = dev.mu(w)
        else:
            if not cfg.get("label2"):
                raise ParseError("--label2 is required in offdiag mode", field="label2")
            w2 = WeylIndex.from_string(cfg["label2"], dev.d)
            est = offdiagonal_mu(dev, w, w2, wcfg, rng, cfg["eps"], cfg["delta"], ms, cfg["l_phase"])
            res["mu"] = est.to_dict()
            res["entry_true"] = dev.weyl_matrix()[w.code, w2.code]
        if rec.lengths:
            res["record"] = rec.to_dict()
            if cfg.get("csv_path"):
                emit_decay_csv(rec, cfg["csv_path"])
        write_envelope("wrb", cfg, res, t0, sum(rec.runs(m) for m in rec.lengths))

    run_guarded(go)


@main.command()
@click.option("--hypergraph", required=False, help="{n, edges: [[ints]]}")
@click.option("--measurements", required=False, help="{d, mu: [{label, value, u?}]}")
@click.option("--eps", type=float, default=None, help="Per-label accuracy for the stability bound.")
@click.option("--parametrization", type=click.Choice(["anchored", "raw"]), default="anchored")
@_common
@click.pass_context
def fit(ctx, **params):
    """Fit a local Weyl noise model to measured eigenvalues."""
    from .noisefit import (Hypergraph, RankDeficient, anchored_to_model, build_fit, mu_infinity, solve_fit,
                           stability_bound)

    def go():
        cfg = resolve_config(ctx, params)
        _check_eps_delta(cfg)
        for key in ("hypergraph", "measurements"):
            if not cfg.get(key):
                raise ParseError(f"--{key} is required", field=key)
        t0 = time.perf_counter()
        gpath, mpath = cfg["hypergraph"], cfg["measurements"]
        gd = load_json(gpath)
        g = Hypergraph(int(_require(gd, "n", gpath)), [tuple(e) for e in _require(gd, "edges", gpath)])
        md = load_json(mpath)
        d = int(_require(md, "d", mpath))
        meas, us = [], []
        for i, row in enumerate(_require(md, "mu", mpath)):
            w = WeylIndex.from_string(str(_require(row, "label", mpath, f"mu[{i}].")), d)
            meas.append((w, parse_complex(_require(row, "value", mpath, f"mu[{i}]."), mpath, f"mu[{i}].value")))
            us.append(parse_complex(row.get("u", 1.0), mpath, f"mu[{i}].u"))
        prob = build_fit(g, meas, us, d, cfg["parametrization"])
        try:
            f, resid = solve_fit(prob)
        except RankDeficient as exc:
            raise ValidationError(str(exc), mpath, "mu")
        res = {"parameters": dict(zip(prob.column_names, f)), "residual": resid}
        if cfg["parametrization"] == "anchored":
            res["model"] = anchored_to_model(g, d, f).to_dict()
        if cfg.get("eps"):
            mi = mu_infinity(meas)
            res["mu_infinity"] = mi
            res["stability_bound"] = stability_bound(prob, cfg["eps"], mi)
        write_envelope("fit", cfg, res, t0)

    run_guarded(go)


@main.command()
@click.option("--graph", required=False, help="{n, weights: [[i, j, w]]}")
@click.option("--theta", required=False, help="{theta: [[...]]} of shape n x D (or a bare nested list).")
@click.option("--pc", type=float, default=1.0, show_default=True)
@click.option("--py", type=float, default=1.0, show_default=True)
@click.option("--eps", type=float, default=0.02, show_default=True)
@click.option("--delta", type=float, default=0.05, show_default=True)
@click.option("--brick-wall", "brick_wall", is_flag=True, default=False)
@click.option("--samples", type=int, default=None, help="Per-term sample override.")
@_common
@click.pass_context
def vqe(ctx, **params):
    """Estimate the MaxCut energy of the noisy ansatz."""
    from .vqe import AnsatzParams, MaxCutProblem, estimate_energy, sample_complexity

    def go():
        cfg = resolve_config(ctx, params)
        _check_eps_delta(cfg)
        for key in ("graph", "theta"):
            if not cfg.get(key):
                raise ParseError(f"--{key} is required", field=key)
        t0 = time.perf_counter()
        gd = load_json(cfg["graph"])
        n = int(_require(gd, "n", cfg["graph"]))
        weights = {(int(i), int(j)): float(w) for i, j, w in _require(gd, "weights", cfg["graph"])}
        td = load_json(cfg["theta"])
        theta = np.array(td["theta"] if isinstance(td, dict) else td, dtype=float)
        prob = MaxCutProblem(n, weights)
        P = AnsatzParams(theta.reshape(n, -1), cfg["pc"], cfg["py"])
        energy, terms = estimate_energy(prob, P, cfg["eps"], cfg["delta"], seed=cfg["seed"],
                                        workers=cfg["workers"], brick_wall=cfg["brick_wall"],
                                        samples=cfg["samples"])
        comp = sample_complexity(n, P.depth, cfg["eps"], cfg["pc"], cfg["py"], cfg["delta"])
        write_envelope("vqe", cfg, {"energy": energy, "terms": terms, "complexity": comp.to_dict()}, t0,
                       sum(t["samples"] for t in terms))

    run_guarded(go)


@main.command()
@click.option("--circuit", required=False)
@click.option("--state", default=None)
@click.option("--observable", default=None)
@click.option("--picture", type=click.Choice(["schrodinger", "heisenberg"]), default="schrodinger")
@_common
@click.pass_context
def norms(ctx, **params):
    """Per-layer l1->l1 norms and the sampling overhead M_B."""
    from .pathsampler import plan

    def go():
        cfg = resolve_config(ctx, params)
        if not cfg.get("circuit"):
            raise ParseError("--circuit is required", field="circuit")
        t0 = time.perf_counter()
        circ = load_circuit(cfg["circuit"])
        res = {"layer_norms": [op.l1_to_l1_norm() for op in circ.layers], "labels": circ.labels,
               "circuit_norm_bound": circuit_norm_bound(circ)}
        if cfg.get("state") and cfg.get("observable"):
            rho = load_state(cfg["state"], circ.d, circ.n, circ.basis)
            E = load_observable(cfg["observable"], circ.d, circ.n, circ.basis)
            res["M_B"] = plan(circ, rho, E, 1.0, 0.5, picture=cfg["picture"]).M_B
        else:
            res["M_B"] = circuit_norm_bound(circ) ** 2
            res["M_B_note"] = "state and observable norms taken as 1"
        write_envelope("norms", cfg, res, t0)

    run_guarded(go)


if __name__ == "__main__":  # pragma: no cover
    main()
