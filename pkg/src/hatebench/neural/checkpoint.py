"""Model checkpoints: a zip container with metadata JSON plus raw
little-endian float64 parameter buffers."""

from __future__ import annotations

import json
import zipfile
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..corpus import TokenizerPolicy
from .nets import CnnSpec, FastTextSpec, LstmSpec, NetSpec, build_net
from .training import TrainedNeuralModel, TrainHyper

FORMAT = "hatebench/checkpoint/1"


def _spec_doc(spec: NetSpec) -> dict:
    doc = asdict(spec)
    doc["kind"] = spec.kind
    if isinstance(spec, CnnSpec):
        doc["filter_widths"] = list(spec.filter_widths)
    return doc


def _spec_from_doc(doc: dict) -> NetSpec:
    kind = doc.pop("kind")
    if kind == "cnn":
        doc["filter_widths"] = tuple(doc["filter_widths"])
        return CnnSpec(**doc)
    if kind == "lstm":
        return LstmSpec(**doc)
    if kind == "fasttext":
        return FastTextSpec(**doc)
    raise ValueError(f"unknown model kind {kind!r}")


def save_checkpoint(model: TrainedNeuralModel, path: str | Path) -> None:
    meta = {
        "format": FORMAT,
        "name": model.name,
        "spec": _spec_doc(model.spec),
        "hyper": asdict(model.hyper),
        "policy": asdict(model.policy),
        "history": model.history,
        "vocab": [w for w, _ in sorted(model.vocab.items(), key=lambda kv: kv[1])],
        "params": {
            name: {"shape": list(arr.shape), "dtype": "<f8", "file": f"params/{name}.bin"}
            for name, arr in model.net.params.items()
        },
    }
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("meta.json", json.dumps(meta, sort_keys=True, indent=2))
        for name, arr in model.net.params.items():
            zf.writestr(f"params/{name}.bin", np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path: str | Path) -> TrainedNeuralModel:
    with zipfile.ZipFile(path) as zf:
        meta = json.loads(zf.read("meta.json"))
        if meta.get("format") != FORMAT:
            raise ValueError(f"unknown checkpoint format {meta.get('format')!r}")
        spec = _spec_from_doc(dict(meta["spec"]))
        vocab = {w: i for i, w in enumerate(meta["vocab"])}
        params = {}
        for name, info in meta["params"].items():
            buf = zf.read(info["file"])
            params[name] = np.frombuffer(buf, dtype=info["dtype"]).reshape(info["shape"]).copy()
        net = build_net(spec, vocab, params["embed"])
        for name, arr in params.items():
            net.params[name] = arr
        return TrainedNeuralModel(
            net=net,
            spec=spec,
            hyper=TrainHyper(**meta["hyper"]),
            history=list(meta["history"]),
            name=meta["name"],
            policy=TokenizerPolicy(**meta["policy"]),
        )
