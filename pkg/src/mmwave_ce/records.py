"""Self-describing JSON records for channel realizations, codebooks, and
observation sets, for cross-implementation regression exchange."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .channel import ChannelRealization, ClusterDraw
from .sounding import Codebook, ObservationSet

RECORD_VERSION = 1


def _complex_out(a: np.ndarray) -> dict:
    a = np.asarray(a)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def _complex_in(d: dict) -> np.ndarray:
    return np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)


def _cluster_out(c: ClusterDraw) -> dict:
    return {
        "mean_aoa": c.mean_aoa,
        "mean_aod": c.mean_aod,
        "aoa_shifts": list(c.aoa_shifts),
        "aod_shifts": list(c.aod_shifts),
        "gains_aoa": _complex_out(c.gains_aoa),
        "gains_aod": _complex_out(c.gains_aod),
        "aoa_angles": list(c.aoa_angles),
        "aod_angles": list(c.aod_angles),
        "aoa_bins": None if c.aoa_bins is None else [int(b) for b in c.aoa_bins],
        "aod_bins": None if c.aod_bins is None else [int(b) for b in c.aod_bins],
    }


def _cluster_in(d: dict) -> ClusterDraw:
    return ClusterDraw(
        mean_aoa=d["mean_aoa"],
        mean_aod=d["mean_aod"],
        aoa_shifts=np.asarray(d["aoa_shifts"], dtype=float),
        aod_shifts=np.asarray(d["aod_shifts"], dtype=float),
        gains_aoa=_complex_in(d["gains_aoa"]),
        gains_aod=_complex_in(d["gains_aod"]),
        aoa_angles=np.asarray(d["aoa_angles"], dtype=float),
        aod_angles=np.asarray(d["aod_angles"], dtype=float),
        aoa_bins=None if d["aoa_bins"] is None else np.asarray(d["aoa_bins"], dtype=int),
        aod_bins=None if d["aod_bins"] is None else np.asarray(d["aod_bins"], dtype=int),
    )


def to_record(obj) -> dict:
    """Serialize a supported object into a self-describing JSON-compatible dict."""
    if isinstance(obj, ChannelRealization):
        return {
            "record": "channel_realization",
            "version": RECORD_VERSION,
            "h": _complex_out(obj.h),
            "hv_truth": None if obj.hv_truth is None else _complex_out(obj.hv_truth),
            "clusters": [_cluster_out(c) for c in obj.clusters],
            "p_measured": obj.p_measured,
            "rank_truth": obj.rank_truth,
        }
    if isinstance(obj, Codebook):
        return {
            "record": "codebook",
            "version": RECORD_VERSION,
            "matrix": _complex_out(obj.matrix),
            "scheme": obj.scheme,
            "subarrays": obj.subarrays,
        }
    if isinstance(obj, ObservationSet):
        return {
            "record": "observation_set",
            "version": RECORD_VERSION,
            "omega": [[int(i), int(j)] for i, j in obj.omega],
            "values": _complex_out(obj.values),
            "sigma": obj.sigma,
        }
    raise TypeError(f"no record format for {type(obj).__name__}")


def from_record(d: dict):
    """Inverse of to_record."""
    kind = d.get("record")
    if kind == "channel_realization":
        return ChannelRealization(
            h=_complex_in(d["h"]),
            clusters=[_cluster_in(c) for c in d["clusters"]],
            hv_truth=None if d["hv_truth"] is None else _complex_in(d["hv_truth"]),
            p_measured=d["p_measured"],
            rank_truth=d["rank_truth"],
        )
    if kind == "codebook":
        return Codebook(matrix=_complex_in(d["matrix"]), scheme=d["scheme"], subarrays=d["subarrays"])
    if kind == "observation_set":
        return ObservationSet(
            omega=np.asarray(d["omega"], dtype=int),
            values=_complex_in(d["values"]),
            sigma=d["sigma"],
        )
    raise ValueError(f"unknown record kind {kind!r}")


def save_record(path, obj):
    Path(path).write_text(json.dumps(to_record(obj)))


def load_record(path):
    return from_record(json.loads(Path(path).read_text()))
