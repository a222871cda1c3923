"""Configured batch runs: build a model, run dynamics, archive, compare.

A run configuration is a YAML document with a ``model`` section (which
chain and its parameters), a ``dynamics`` section (which solver and its
grid) and an optional ``io`` section (artifact paths, restart source,
comparison target).  Unknown keys are rejected before any computation.

A completed run leaves two artifacts in the output directory: a binary
archive bundling the config text, the record stream and the final
checkpoint, plus the same records as a plain NDJSON text file.  A short
summary (levels or conservation regressions) goes to standard output.
Exit codes: 0 success, 2 configuration problem, 3 numerical failure,
4 input/output failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from .archive import (
    COMPARE_MODES,
    RunArchive,
    compare_runs,
    load_run,
    records_to_ndjson,
    regress_conserved,
    save_run,
)
from .ceom import CeomConfig, ceom_coherent_init, ceom_propagate
from .chain import ChainSpec
from .errors import (
    ConfigError,
    DenseCapExceeded,
    NumericsAbort,
    UnsupportedModelError,
)
from .models import CoupledModel, ExcitonModel, PhononModel
from .observables import make_recorder
from .qcmd import (
    QcmdConfig,
    checkpoint_from_bytes,
    checkpoint_to_bytes,
    qcmd_propagate,
)
from .tdse import (
    PacketSpec,
    TdseConfig,
    bessel_reference,
    initial_coherent,
    initial_fundamental,
    initial_packet,
    propagate,
)
from .tise import TiseConfig, solve_tise
from .tt import DENSE_CAP_DEFAULT, tt_state_from_bytes, tt_to_bytes

MODEL_KINDS = ("exciton", "phonon", "coupled")
DYNAMICS_KINDS = ("tise", "tdse", "qcmd", "ceom")


class _Exit(Exception):
    """Carries a specific exit code past the generic classification."""

    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# configuration schema

_MODEL_KEYS = {
    "exciton": {"kind", "n_site", "periodic", "n_basis",
                "alpha", "beta", "eta"},
    "phonon": {"kind", "n_site", "periodic", "n_basis",
               "mass", "nu", "omg"},
    "coupled": {"kind", "n_site", "periodic", "n_basis",
                "alpha", "beta", "eta", "mass", "nu", "omg",
                "chi", "rho", "sig", "tau"},
}

_DYNAMICS_KEYS = {
    "tise": {"kind", "n_levels", "solver", "eigen", "ranks", "repeats",
             "conv_eps", "e_est", "seed"},
    "tdse": {"kind", "scheme", "t_step", "n_step", "sub_steps", "max_rank",
             "threshold", "renormalize", "initial", "sample_every",
             "bessel_site"},
    "qcmd": {"kind", "scheme", "t_step", "n_step", "sub_steps", "normalize",
             "initial", "sample_every"},
    "ceom": {"kind", "solver", "t_step", "n_step", "sub_steps", "initial",
             "sample_every"},
}

_IO_KEYS = {"output_dir", "archive", "records", "load_file", "compare_to",
            "mode", "keep_densities"}

_INITIAL_KEYS = {
    "fundamental": {"kind", "site"},
    "packet": {"kind", "shape", "center", "width", "momentum"},
    "coherent": {"kind", "displace"},
}


def _mapping(obj, name):
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise ConfigError(f"{name} section must be a mapping")
    return obj


def _check_keys(section, name, allowed):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {name} section")


def _need(section, name, key):
    if key not in section or section[key] is None:
        raise ConfigError(f"{name}.{key} is required")
    return section[key]


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number")
    return float(value)


def _integer(value, name):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer")
    return int(value)


def _boolean(value, name):
    if not isinstance(value, bool):
        raise ConfigError(f"{name} must be true or false")
    return value


def _choice(value, name, allowed):
    if value not in allowed:
        opts = ", ".join(allowed)
        raise ConfigError(f"{name} must be one of {opts}, got {value!r}")
    return value


def _parameter(section, key, required=False, default=0.0):
    """Scalar or per-site list model parameter."""
    if key not in section or section[key] is None:
        if required:
            raise ConfigError(f"model.{key} is required")
        return default, True
    value = section[key]
    if isinstance(value, (list, tuple)):
        return np.asarray([_number(v, f"model.{key}[]") for v in value]), False
    return _number(value, f"model.{key}"), True


def _displace_vector(value, n, name):
    """Displacement as a scalar, an n-vector or a {site: amount} mapping."""
    if isinstance(value, dict):
        vec = np.zeros(n)
        for site, amount in value.items():
            try:
                k = int(site)
            except (TypeError, ValueError):
                raise ConfigError(f"{name}: site {site!r} is not an index")
            if not 0 <= k < n:
                raise ConfigError(f"{name}: site {k} outside the chain")
            vec[k] = _number(amount, f"{name}[{k}]")
        return vec
    if isinstance(value, (list, tuple)):
        if len(value) != n:
            raise ConfigError(f"{name}: expected {n} entries, got {len(value)}")
        return np.asarray([_number(v, f"{name}[]") for v in value])
    return np.full(n, _number(value, name))


def build_model(section):
    """Model instance plus its basis size(s) from the ``model`` section."""
    sec = _mapping(section, "model")
    kind = _choice(_need(sec, "model", "kind"), "model.kind", MODEL_KINDS)
    _check_keys(sec, "model", _MODEL_KEYS[kind])
    n_site = _integer(_need(sec, "model", "n_site"), "model.n_site")
    periodic = _boolean(sec.get("periodic", False), "model.periodic")

    n_basis = sec.get("n_basis")
    if n_basis is not None:
        if kind == "coupled" and isinstance(n_basis, (list, tuple)):
            if len(n_basis) != 2:
                raise ConfigError("model.n_basis must be one size or a pair")
            n_basis = tuple(_integer(v, "model.n_basis[]") for v in n_basis)
        else:
            n_basis = _integer(n_basis, "model.n_basis")

    scalars = []
    if kind == "exciton":
        alpha, s1 = _parameter(sec, "alpha", required=True)
        beta, s2 = _parameter(sec, "beta", required=True)
        eta, s3 = _parameter(sec, "eta")
        scalars = [s1, s2, s3]
        chain = ChainSpec(n_site, periodic=periodic, homogen=all(scalars))
        model = ExcitonModel(chain, alpha, beta, eta)
        n_basis = 2 if n_basis is None else n_basis
    elif kind == "phonon":
        mass, s1 = _parameter(sec, "mass", required=True)
        nu, s2 = _parameter(sec, "nu", required=True)
        omg, s3 = _parameter(sec, "omg", required=True)
        scalars = [s1, s2, s3]
        chain = ChainSpec(n_site, periodic=periodic, homogen=all(scalars))
        model = PhononModel(chain, mass, nu, omg)
        n_basis = 8 if n_basis is None else n_basis
    else:
        values = {}
        for key in ("alpha", "beta", "mass", "nu", "omg"):
            values[key], flat = _parameter(sec, key, required=True)
            scalars.append(flat)
        for key in ("eta", "chi", "rho", "sig", "tau"):
            values[key], flat = _parameter(sec, key)
            scalars.append(flat)
        chain = ChainSpec(n_site, periodic=periodic, homogen=all(scalars))
        model = CoupledModel(chain, **values)
        n_basis = (2, 4) if n_basis is None else n_basis
    return model, n_basis


def _build_initial_section(section):
    sec = _mapping(section, "dynamics.initial")
    kind = _choice(_need(sec, "dynamics.initial", "kind"),
                   "dynamics.initial.kind", tuple(_INITIAL_KEYS))
    _check_keys(sec, "dynamics.initial", _INITIAL_KEYS[kind])
    return kind, sec


def _initial_state(model, n_basis, section):
    """TT start state from the ``dynamics.initial`` section."""
    kind, sec = _build_initial_section(section)
    if kind == "fundamental":
        site = _integer(_need(sec, "dynamics.initial", "site"),
                        "dynamics.initial.site")
        return initial_fundamental(model, site, n_basis), None
    if kind == "packet":
        spec = _packet_spec(sec)
        return initial_packet(model, spec, n_basis), None
    if not isinstance(model, PhononModel):
        raise ConfigError(
            "dynamics.initial.kind coherent requires a phonon model")
    displace = _displace_vector(_need(sec, "dynamics.initial", "displace"),
                                model.chain.n_site,
                                "dynamics.initial.displace")
    psi0, weight = initial_coherent(model, displace, n_basis)
    return psi0, weight


def _packet_spec(sec):
    try:
        return PacketSpec(
            shape=sec.get("shape", "gaussian"),
            center=_integer(_need(sec, "dynamics.initial", "center"),
                            "dynamics.initial.center"),
            width=_number(sec.get("width", 1.0), "dynamics.initial.width"),
            momentum=_number(sec.get("momentum", 0.0),
                             "dynamics.initial.momentum"),
        )
    except ValueError as exc:
        raise ConfigError(f"dynamics.initial: {exc}") from None


def _sample_every(dyn):
    value = _integer(dyn.get("sample_every", 1), "dynamics.sample_every")
    if value < 1:
        raise ConfigError("dynamics.sample_every must be at least 1")
    return value


def _drift_lines(records, names):
    lines = []
    for name in names:
        try:
            slope, intercept, r2 = regress_conserved(records, name)
        except ValueError:
            continue
        lines.append(f"{name} drift: slope {slope:+.6e}/a.u.  "
                     f"intercept {intercept:.12g}  r2 {r2:.6f}")
    return lines


# ---------------------------------------------------------------------------
# restart plumbing

def _load_archive(path, key):
    try:
        return load_run(path)
    except OSError as exc:
        raise _Exit(4, f"{key}: {exc}") from None
    except ValueError as exc:
        raise _Exit(4, f"{key}: {path}: {exc}") from None


def _restart_state(io_sec):
    """(psi0, index0, t0) from the archive named by io.load_file."""
    run = _load_archive(io_sec["load_file"], "io.load_file")
    if not run.checkpoints:
        raise ConfigError("io.load_file: archive has no checkpoint")
    blob = run.checkpoints[-1]
    if blob[:4] != b"WTTC":
        raise ConfigError("io.load_file: checkpoint is not a quantum state")
    timed = [r for r in run.records if r.time is not None]
    if not timed:
        raise ConfigError("io.load_file: archive has no timed records")
    last = timed[-1]
    return tt_state_from_bytes(blob), last.index, last.time


def _restart_classical(io_sec):
    """(index0, t0, a, q, p) from the archive named by io.load_file."""
    run = _load_archive(io_sec["load_file"], "io.load_file")
    if not run.checkpoints:
        raise ConfigError("io.load_file: archive has no checkpoint")
    blob = run.checkpoints[-1]
    if blob[:4] != b"WQCM":
        raise ConfigError("io.load_file: checkpoint is not a classical state")
    return checkpoint_from_bytes(blob)


# ---------------------------------------------------------------------------
# per-kind runners: each returns (records, checkpoints, summary lines)

def _run_tise(model, n_basis, dyn, io_sec, dense_cap):
    try:
        cfg = TiseConfig(
            n_levels=_integer(dyn.get("n_levels", 1), "dynamics.n_levels"),
            solver=dyn.get("solver", "als"),
            eigen=dyn.get("eigen", "dense-hermitian"),
            ranks=_integer(dyn.get("ranks", 8), "dynamics.ranks"),
            repeats=_integer(dyn.get("repeats", 20), "dynamics.repeats"),
            conv_eps=_number(dyn.get("conv_eps", 1e-8), "dynamics.conv_eps"),
            e_est=None if dyn.get("e_est") is None
            else _number(dyn["e_est"], "dynamics.e_est"),
            seed=_integer(dyn.get("seed", 42), "dynamics.seed"),
        )
    except ValueError as exc:
        raise ConfigError(f"dynamics: {exc}") from None
    h = model.to_operator(n_basis)
    result = solve_tise(h, cfg, dense_cap=dense_cap)
    recorder = make_recorder(model, n_basis,
                             keep_densities=io_sec.get("keep_densities",
                                                       False))
    records = [recorder.tise_record(k, result.energies[k], state)
               for k, state in enumerate(result.states)]
    checkpoints = [tt_to_bytes(state) for state in result.states]
    lines = []
    for k in range(result.n_levels):
        note = "" if result.converged[k] else "  (not converged)"
        lines.append(f"level {k}: energy {result.energies[k]:+.12e}  "
                     f"sweeps {result.sweeps[k]}  "
                     f"residual {result.residuals[k]:.3e}{note}")
    return records, checkpoints, lines


def _run_tdse(model, n_basis, dyn, io_sec):
    try:
        cfg = TdseConfig(
            scheme=dyn.get("scheme", "s2"),
            t_step=_number(_need(dyn, "dynamics", "t_step"),
                           "dynamics.t_step"),
            n_step=_integer(_need(dyn, "dynamics", "n_step"),
                            "dynamics.n_step"),
            sub_steps=_integer(dyn.get("sub_steps", 1),
                               "dynamics.sub_steps"),
            max_rank=None if dyn.get("max_rank") is None
            else _integer(dyn["max_rank"], "dynamics.max_rank"),
            threshold=_number(dyn.get("threshold", 0.0),
                              "dynamics.threshold"),
            renormalize=_boolean(dyn.get("renormalize", False),
                                 "dynamics.renormalize"),
        )
    except ValueError as exc:
        raise ConfigError(f"dynamics: {exc}") from None
    every = _sample_every(dyn)

    lines = []
    if io_sec.get("load_file"):
        psi0, index0, t0 = _restart_state(io_sec)
        emit_initial = False
    else:
        psi0, weight = _initial_state(model, n_basis, _need(dyn, "dynamics",
                                                            "initial"))
        index0, t0 = 0, 0.0
        emit_initial = True
        if weight is not None:
            lines.append(f"coherent basis weight {weight:.9f}")

    recorder = make_recorder(model, n_basis, reference=psi0,
                             keep_densities=io_sec.get("keep_densities",
                                                       False))
    records = []
    psi = psi0
    last = index0 + cfg.n_step
    for index, t, psi in propagate(model, psi0, cfg, n_dims=n_basis,
                                   t0=t0, index0=index0,
                                   emit_initial=emit_initial):
        if (index - index0) % every == 0 or index == last:
            records.append(recorder.tdse_record(index, t, psi))
    checkpoints = [tt_to_bytes(psi)]
    lines += _drift_lines(records, ("norm", "energy"))
    site = dyn.get("bessel_site")
    if site is not None:
        lines += _bessel_table(model, records,
                               _integer(site, "dynamics.bessel_site"))
    return records, checkpoints, lines


def _bessel_table(model, records, site):
    if not records or records[0].populations is None:
        raise ConfigError("dynamics.bessel_site requires an exciton run")
    if not 0 <= site < model.chain.n_site:
        raise ConfigError(f"dynamics.bessel_site {site} outside the chain")
    times = np.asarray([r.time for r in records])
    reference = bessel_reference(model, times, site)[:, site]
    lines = ["time        population  free-chain  |diff|"]
    worst = 0.0
    for rec, ref in zip(records, reference):
        pop = float(rec.populations[site])
        diff = abs(pop - ref)
        worst = max(worst, diff)
        lines.append(f"{rec.time:10.1f}  {pop:10.6f}  {ref:10.6f}  {diff:.3e}")
    lines.append(f"largest central-site deviation {worst:.3e}")
    return lines


def _run_qcmd(model, dyn, io_sec):
    if not isinstance(model, CoupledModel):
        raise ConfigError("dynamics.kind qcmd requires a coupled model")
    try:
        cfg = QcmdConfig(
            scheme=dyn.get("scheme", "sm"),
            t_step=_number(_need(dyn, "dynamics", "t_step"),
                           "dynamics.t_step"),
            n_step=_integer(_need(dyn, "dynamics", "n_step"),
                            "dynamics.n_step"),
            sub_steps=_integer(dyn.get("sub_steps", 1),
                               "dynamics.sub_steps"),
            normalize=_boolean(dyn.get("normalize", False),
                               "dynamics.normalize"),
        )
    except ValueError as exc:
        raise ConfigError(f"dynamics: {exc}") from None
    every = _sample_every(dyn)
    n = model.chain.n_site

    if io_sec.get("load_file"):
        index0, t0, a0, q0, p0 = _restart_classical(io_sec)
        emit_initial = False
    else:
        kind, sec = _build_initial_section(_need(dyn, "dynamics", "initial"))
        if kind == "fundamental":
            site = _integer(_need(sec, "dynamics.initial", "site"),
                            "dynamics.initial.site")
            if not 0 <= site < n:
                raise ConfigError(f"dynamics.initial.site {site} outside "
                                  f"the chain of {n} sites")
            a0 = np.zeros(n, dtype=complex)
            a0[site] = 1.0
        elif kind == "packet":
            a0 = _packet_spec(sec).amplitudes(n)
        else:
            raise ConfigError("dynamics.initial.kind coherent is not a "
                              "mean-field amplitude start")
        q0 = p0 = None
        index0, t0 = 0, 0.0
        emit_initial = True

    recorder = make_recorder(model, reference=a0)
    records = []
    final = None
    last = index0 + cfg.n_step
    for index, t, a, q, p in qcmd_propagate(model, a0, q0, p0, cfg,
                                            t0=t0, index0=index0,
                                            emit_initial=emit_initial):
        if (index - index0) % every == 0 or index == last:
            records.append(recorder.qcmd_record(index, t, a, q, p))
        final = (index, t, a, q, p)
    checkpoints = [checkpoint_to_bytes(*final)]
    lines = _drift_lines(records, ("norm", "energy"))
    return records, checkpoints, lines


def _run_ceom(model, dyn, io_sec):
    if not isinstance(model, PhononModel):
        raise ConfigError("dynamics.kind ceom requires a phonon model")
    try:
        cfg = CeomConfig(
            solver=dyn.get("solver", "qe"),
            t_step=_number(_need(dyn, "dynamics", "t_step"),
                           "dynamics.t_step"),
            n_step=_integer(_need(dyn, "dynamics", "n_step"),
                            "dynamics.n_step"),
            sub_steps=_integer(dyn.get("sub_steps", 1),
                               "dynamics.sub_steps"),
        )
    except ValueError as exc:
        raise ConfigError(f"dynamics: {exc}") from None
    every = _sample_every(dyn)
    n = model.chain.n_site

    if io_sec.get("load_file"):
        index0, t0, _, q0, p0 = _restart_classical(io_sec)
        emit_initial = False
    else:
        kind, sec = _build_initial_section(_need(dyn, "dynamics", "initial"))
        if kind != "coherent":
            raise ConfigError("dynamics.initial.kind must be coherent for "
                              "classical runs")
        displace = _displace_vector(
            _need(sec, "dynamics.initial", "displace"), n,
            "dynamics.initial.displace")
        q0, p0 = ceom_coherent_init(model, displace)
        index0, t0 = 0, 0.0
        emit_initial = True

    recorder = make_recorder(model)
    records = []
    final = None
    last = index0 + cfg.n_step
    for index, t, q, p in ceom_propagate(model, q0, p0, cfg, t0=t0,
                                         index0=index0,
                                         emit_initial=emit_initial):
        if (index - index0) % every == 0 or index == last:
            records.append(recorder.ceom_record(index, t, q, p))
        final = (index, t, np.zeros(n, dtype=complex), q, p)
    checkpoints = [checkpoint_to_bytes(*final)]
    lines = _drift_lines(records, ("energy",))
    return records, checkpoints, lines


# ---------------------------------------------------------------------------
# commands

def _load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Exit(4, f"{path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from None
    data = _mapping(data, "top-level")
    _check_keys(data, "top-level", {"model", "dynamics", "io"})
    if "model" not in data:
        raise ConfigError("model section is required")
    if "dynamics" not in data:
        raise ConfigError("dynamics section is required")
    io_sec = _mapping(data.get("io"), "io")
    _check_keys(io_sec, "io", _IO_KEYS)
    return text, data["model"], _mapping(data["dynamics"], "dynamics"), io_sec


def run_config(path, output_dir=None, seed=None, dense_cap=None, echo=print):
    """Execute one run configuration; returns the archive path."""
    text, model_sec, dyn, io_sec = _load_config(path)
    kind = _choice(_need(dyn, "dynamics", "kind"), "dynamics.kind",
                   DYNAMICS_KINDS)
    _check_keys(dyn, "dynamics", _DYNAMICS_KEYS[kind])
    if seed is not None:
        dyn = {**dyn, "seed": seed}
    cap = DENSE_CAP_DEFAULT if dense_cap is None else int(dense_cap)

    model, n_basis = build_model(model_sec)
    if kind == "tise":
        out = _run_tise(model, n_basis, dyn, io_sec, cap)
    elif kind == "tdse":
        out = _run_tdse(model, n_basis, dyn, io_sec)
    elif kind == "qcmd":
        out = _run_qcmd(model, dyn, io_sec)
    else:
        out = _run_ceom(model, dyn, io_sec)
    records, checkpoints, lines = out

    target = Path(output_dir if output_dir is not None
                  else io_sec.get("output_dir", "."))
    try:
        target.mkdir(parents=True, exist_ok=True)
        archive_path = target / io_sec.get("archive", "run.wtra")
        save_run(archive_path, RunArchive(config_text=text, records=records,
                                          checkpoints=checkpoints))
        records_path = target / io_sec.get("records", "records.ndjson")
        records_path.write_text(records_to_ndjson(records), encoding="utf-8")
    except OSError as exc:
        raise _Exit(4, f"writing artifacts: {exc}") from None

    echo(f"run {kind}: {len(records)} records, "
         f"{len(checkpoints)} checkpoints")
    for line in lines:
        echo(line)
    echo(f"archive written to {archive_path}")
    return archive_path


def compare_config(path, output_dir=None, echo=print):
    """Compare the configured run's archive against io.compare_to."""
    text, _, _, io_sec = _load_config(path)
    target = io_sec.get("compare_to")
    if not target:
        raise ConfigError("io.compare_to is required for compare")
    base = Path(output_dir if output_dir is not None
                else io_sec.get("output_dir", "."))
    own = base / io_sec.get("archive", "run.wtra")
    mode = io_sec.get("mode", "state")
    _choice(mode, "io.mode", COMPARE_MODES)
    run_a = _load_archive(own, "io.archive")
    run_b = _load_archive(target, "io.compare_to")
    try:
        distance = compare_runs(run_a, run_b, mode=mode)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    echo(f"compare {mode}: {own} vs {target}")
    echo(f"largest deviation {distance:.6e}")
    return distance


def _classify(exc):
    """Exit code for a failure, or None when it is a genuine bug."""
    if isinstance(exc, _Exit):
        return exc.code
    if isinstance(exc, (NumericsAbort, DenseCapExceeded,
                        np.linalg.LinAlgError, FloatingPointError)):
        return 3
    if isinstance(exc, (ConfigError, UnsupportedModelError, ValueError)):
        return 2
    if isinstance(exc, OSError):
        return 4
    return None


def _sweep_worker(path, output_dir, seed, dense_cap):
    lines = []
    try:
        run_config(path, output_dir, seed, dense_cap, echo=lines.append)
        return 0, lines
    except Exception as exc:
        code = _classify(exc)
        if code is None:
            raise
        return code, lines + [f"error: {exc}"]


def _cmd_run(args):
    if args.sweep is not None:
        return _cmd_sweep(args)
    if args.config is None:
        raise ConfigError("a config path (or --sweep) is required")
    run_config(args.config, args.output_dir, args.seed, args.dense_cap)
    return 0


def _cmd_sweep(args):
    root = Path(args.sweep)
    configs = sorted(root.glob("*.yaml")) + sorted(root.glob("*.yml"))
    if not configs:
        raise _Exit(4, f"--sweep: no .yaml configs under {root}")
    out_root = Path(args.output_dir if args.output_dir is not None
                    else "sweep-out")
    worst = 0
    with ProcessPoolExecutor() as pool:
        futures = [
            pool.submit(_sweep_worker, str(cfg), str(out_root / cfg.stem),
                        args.seed, args.dense_cap)
            for cfg in configs
        ]
        for cfg, future in zip(configs, futures):
            code, lines = future.result()
            worst = max(worst, code)
            status = "ok" if code == 0 else f"exit {code}"
            print(f"[{cfg.stem}] {status}")
            for line in lines:
                print(f"  {line}")
    return worst


def _cmd_compare(args):
    compare_config(args.config, args.output_dir)
    return 0


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="ttchain",
        description="Configured tensor-train chain dynamics runs.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default=None,
                        help="directory for artifacts (overrides io section)")
    common.add_argument("--seed", type=int, default=None,
                        help="override the dynamics seed")
    common.add_argument("--dense-cap", type=int, default=None,
                        help="largest product dimension dense solvers accept")
    sub = parser.add_subparsers(dest="command", required=True)
    runner = sub.add_parser("run", parents=[common],
                            help="execute a run configuration")
    runner.add_argument("config", nargs="?", default=None,
                        help="path to a YAML run configuration")
    runner.add_argument("--sweep", metavar="DIR", default=None,
                        help="run every config in DIR concurrently")
    runner.set_defaults(func=_cmd_run)
    comparer = sub.add_parser("compare", parents=[common],
                              help="compare two archived runs")
    comparer.add_argument("config",
                          help="config whose io section names both archives")
    comparer.set_defaults(func=_cmd_compare)
    return parser.parse_args(argv)


def main(argv=None):
    args = _parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        code = _classify(exc)
        if code is None:
            raise
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
