"""Run archives: config, record stream and final checkpoints in one file.

The container is a small binary envelope: magic, format version, then
three length-prefixed sections.  The first holds the configuration text
that produced the run, the second the observable records as NDJSON (one
JSON object per line), the third the final-state checkpoints as opaque
blobs that keep their own magic.  Everything needed to rerun, resume or
compare a run travels in this one file.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .observables import ObservableRecord
from . import qcmd as _qcmd
from .tt import tt_add, tt_norm, tt_scale, tt_state_from_bytes

_MAGIC = b"WTRA"
_FORMAT_VERSION = 1

_ARRAY_FIELDS = ("qnum", "populations", "r_mean", "r_unc", "p_mean", "p_unc")

COMPARE_MODES = ("state", "populations", "positions", "momenta")


@dataclass
class RunArchive:
    """One completed run: its inputs, measurements and final states."""

    config_text: str = ""
    records: list = field(default_factory=list)
    checkpoints: list = field(default_factory=list)

    @property
    def kind(self):
        return self.records[-1].kind if self.records else None


def record_to_obj(rec):
    obj = {
        "kind": rec.kind,
        "index": rec.index,
        "time": rec.time,
        "energy": rec.energy,
        "energy_parts": dict(rec.energy_parts),
        "norm": rec.norm,
        "acf_re": None if rec.acf is None else float(np.real(rec.acf)),
        "acf_im": None if rec.acf is None else float(np.imag(rec.acf)),
    }
    for name in _ARRAY_FIELDS:
        value = getattr(rec, name)
        obj[name] = None if value is None else np.asarray(value).tolist()
    if rec.densities is not None:
        obj["densities"] = [
            np.stack([rho.real, rho.imag], axis=-1).tolist()
            for rho in rec.densities
        ]
    return obj


def record_from_obj(obj):
    acf = None
    if obj.get("acf_re") is not None:
        acf = complex(obj["acf_re"], obj["acf_im"])
    arrays = {}
    for name in _ARRAY_FIELDS:
        value = obj.get(name)
        arrays[name] = None if value is None else np.asarray(value, dtype=float)
    densities = None
    if obj.get("densities") is not None:
        densities = tuple(
            np.asarray(entry, dtype=float)[..., 0]
            + 1j * np.asarray(entry, dtype=float)[..., 1]
            for entry in obj["densities"]
        )
    return ObservableRecord(
        kind=obj["kind"], index=int(obj["index"]), time=obj.get("time"),
        energy=float(obj["energy"]),
        energy_parts=dict(obj.get("energy_parts") or {}),
        norm=obj.get("norm"), acf=acf, densities=densities, **arrays,
    )


def records_to_ndjson(records):
    return "".join(json.dumps(record_to_obj(r)) + "\n" for r in records)


def records_from_ndjson(text):
    return [
        record_from_obj(json.loads(line))
        for line in text.splitlines()
        if line.strip()
    ]


def run_to_bytes(run):
    config = run.config_text.encode("utf-8")
    records = records_to_ndjson(run.records).encode("utf-8")
    blobs = [bytes(b) for b in run.checkpoints]
    tail = [struct.pack("<Q", len(blobs))]
    for blob in blobs:
        tail.append(struct.pack("<Q", len(blob)))
        tail.append(blob)
    checkpoints = b"".join(tail)
    out = [_MAGIC, struct.pack("<H", _FORMAT_VERSION)]
    for section in (config, records, checkpoints):
        out.append(struct.pack("<Q", len(section)))
        out.append(section)
    return b"".join(out)


def run_from_bytes(data):
    if data[:4] != _MAGIC:
        raise ValueError("not a run archive (bad magic)")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != _FORMAT_VERSION:
        raise ValueError(f"unsupported archive version {version}")
    off = 6
    sections = []
    for _ in range(3):
        (length,) = struct.unpack_from("<Q", data, off)
        off += 8
        sections.append(data[off:off + length])
        if len(sections[-1]) != length:
            raise ValueError("archive ends inside a section")
        off += length
    if off != len(data):
        raise ValueError("archive size does not match its sections")
    config, records, tail = sections
    (count,) = struct.unpack_from("<Q", tail, 0)
    blobs = []
    pos = 8
    for _ in range(count):
        (length,) = struct.unpack_from("<Q", tail, pos)
        pos += 8
        blobs.append(tail[pos:pos + length])
        pos += length
    if pos != len(tail):
        raise ValueError("checkpoint section size does not match its entries")
    return RunArchive(
        config_text=config.decode("utf-8"),
        records=records_from_ndjson(records.decode("utf-8")),
        checkpoints=blobs,
    )


def save_run(path, run):
    with open(path, "wb") as fh:
        fh.write(run_to_bytes(run))


def load_run(path):
    with open(path, "rb") as fh:
        return run_from_bytes(fh.read())


def _checkpoint_distance(blob_a, blob_b):
    if blob_a[:4] != blob_b[:4]:
        raise ValueError("checkpoints come from different run kinds")
    if blob_a[:4] == b"WTTC":
        x = tt_state_from_bytes(blob_a)
        y = tt_state_from_bytes(blob_b)
        return float(tt_norm(tt_add(x, tt_scale(y, -1.0))))
    if blob_a[:4] == b"WQCM":
        _, _, a1, q1, p1 = _qcmd.checkpoint_from_bytes(blob_a)
        _, _, a2, q2, p2 = _qcmd.checkpoint_from_bytes(blob_b)
        return float(max(
            np.max(np.abs(a1 - a2), initial=0.0),
            np.max(np.abs(q1 - q2), initial=0.0),
            np.max(np.abs(p1 - p2), initial=0.0),
        ))
    raise ValueError("unrecognized checkpoint format")


def _series_distance(rec_a, rec_b, name):
    worst = 0.0
    for ra, rb in zip(rec_a, rec_b):
        va, vb = getattr(ra, name), getattr(rb, name)
        if va is None or vb is None:
            raise ValueError(f"one of the runs carries no {name} series")
        worst = max(worst, float(np.max(np.abs(va - vb))))
    return worst


def compare_runs(run_a, run_b, mode="state"):
    """Largest deviation between two archived runs.

    ``state`` compares the final checkpoints, the other modes walk the
    record streams.  The runs must align row for row.
    """
    if mode not in COMPARE_MODES:
        raise ValueError(f"unknown compare mode {mode!r}")
    if mode == "state":
        if len(run_a.checkpoints) != len(run_b.checkpoints):
            raise ValueError("runs carry different numbers of checkpoints")
        if not run_a.checkpoints:
            raise ValueError("runs carry no checkpoints to compare")
        return max(
            _checkpoint_distance(a, b)
            for a, b in zip(run_a.checkpoints, run_b.checkpoints)
        )
    if len(run_a.records) != len(run_b.records):
        raise ValueError("runs carry different numbers of records")
    if not run_a.records:
        raise ValueError("runs carry no records to compare")
    name = {
        "populations": "populations",
        "positions": "r_mean",
        "momenta": "p_mean",
    }[mode]
    return _series_distance(run_a.records, run_b.records, name)


def regress_conserved(records, name="norm"):
    """Least-squares drift line of a conserved scalar: slope, offset, r^2."""
    times, values = [], []
    for rec in records:
        if rec.time is None:
            continue
        if name in ("norm", "energy"):
            value = getattr(rec, name)
        else:
            value = rec.energy_parts.get(name)
        if value is None:
            continue
        times.append(rec.time)
        values.append(value)
    if len(times) < 2:
        raise ValueError(f"need at least two timed records with {name!r}")
    t = np.asarray(times)
    v = np.asarray(values)
    slope, intercept = np.polyfit(t, v, 1)
    resid = v - (slope * t + intercept)
    total = float(np.sum((v - v.mean()) ** 2))
    scale = float(np.max(np.abs(v))) or 1.0
    if total <= len(v) * (1e-14 * scale) ** 2:
        # variance at rounding level: the quantity is flat, the fit is exact
        r2 = 1.0
    else:
        r2 = 1.0 - float(np.sum(resid ** 2)) / total
    return float(slope), float(intercept), float(r2)
