"""Model checkpointing.

A checkpoint is a single canonical-JSON document: configs in plain JSON,
tensors as base64-encoded little-endian float64 in row-major order. The
format is tagged and versioned; anything that does not parse cleanly
raises FormatError rather than producing a half-loaded model.
"""

from __future__ import annotations

import base64
import binascii
import json
import os
import tempfile

import numpy as np

from .a2c import A2CConfig, A2CModel, AdamState
from .env import ACTION_DIM, EnvConfig
from .errors import FormatError, SchemaError
from .nets import MlpParams, PARAM_FIELDS
from .schemas import canonical_json

FORMAT_TAG = "clca-ckpt"
FORMAT_VERSION = 1


def _encode_tensor(arr: np.ndarray) -> dict:
    data = np.ascontiguousarray(arr, dtype="<f8").tobytes()
    return {
        "shape": list(arr.shape),
        "data_b64": base64.b64encode(data).decode("ascii"),
    }


def _decode_tensor(name: str, obj: object) -> np.ndarray:
    if not isinstance(obj, dict) or set(obj) != {"shape", "data_b64"}:
        raise FormatError(f"tensor '{name}': expected shape/data_b64 object")
    shape = obj["shape"]
    if not isinstance(shape, list) or not all(isinstance(s, int) and s >= 0 for s in shape):
        raise FormatError(f"tensor '{name}': bad shape {shape!r}")
    try:
        raw = base64.b64decode(obj["data_b64"], validate=True)
    except (binascii.Error, TypeError) as exc:
        raise FormatError(f"tensor '{name}': invalid base64 data ({exc})") from exc
    count = 1
    for s in shape:
        count *= s
    if len(raw) != count * 8:
        raise FormatError(
            f"tensor '{name}': data length {len(raw)} does not match "
            f"shape {shape} ({count * 8} bytes expected)"
        )
    return np.frombuffer(raw, dtype="<f8").reshape(shape).copy()


def _decode_tensor_map(name: str, obj: object) -> dict[str, np.ndarray]:
    if not isinstance(obj, dict):
        raise FormatError(f"'{name}' must be an object")
    if set(obj) != set(PARAM_FIELDS):
        raise FormatError(
            f"'{name}' keys do not match the parameter set: got {sorted(obj)}"
        )
    return {k: _decode_tensor(f"{name}.{k}", v) for k, v in obj.items()}


def save_checkpoint(model: A2CModel, path: str) -> None:
    doc = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "a2c_config": model.a2c_config.to_dict(),
        "env_config": model.env_config.to_dict(),
        "embed_dim": model.embed_dim,
        "adam": {
            "step": model.adam.step,
            "m": {k: _encode_tensor(v) for k, v in model.adam.m.items()},
            "v": {k: _encode_tensor(v) for k, v in model.adam.v.items()},
        },
        "tensors": {
            k: _encode_tensor(v) for k, v in model.params.as_dict().items()
        },
    }
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(doc))
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path: str) -> A2CModel:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"checkpoint is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("checkpoint must be a JSON object")

    tag = doc.get("format")
    if tag != FORMAT_TAG:
        raise FormatError(f"not a checkpoint file (format tag {tag!r})")
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported checkpoint version {version!r}")

    required = {"a2c_config", "env_config", "embed_dim", "adam", "tensors"}
    missing = required - set(doc)
    if missing:
        raise FormatError(f"checkpoint missing fields {sorted(missing)}")

    try:
        a2c_config = A2CConfig.from_dict(doc["a2c_config"])
        env_config = EnvConfig.from_dict(doc["env_config"])
    except SchemaError as exc:
        raise FormatError(str(exc)) from exc

    embed_dim = doc["embed_dim"]
    if not isinstance(embed_dim, int) or embed_dim < 1:
        raise FormatError(f"bad embed_dim {embed_dim!r}")

    tensors = _decode_tensor_map("tensors", doc["tensors"])
    params = MlpParams(**tensors)
    if params.w1.ndim != 2 or params.w1.shape[1] != embed_dim + ACTION_DIM:
        raise FormatError(
            f"policy input width {params.w1.shape} inconsistent with "
            f"embed_dim {embed_dim}"
        )

    adam_doc = doc["adam"]
    if not isinstance(adam_doc, dict) or set(adam_doc) != {"step", "m", "v"}:
        raise FormatError("'adam' must contain step, m, v")
    step = adam_doc["step"]
    if not isinstance(step, int) or step < 0:
        raise FormatError(f"bad adam step {step!r}")
    adam = AdamState(
        m=_decode_tensor_map("adam.m", adam_doc["m"]),
        v=_decode_tensor_map("adam.v", adam_doc["v"]),
        step=step,
    )
    for name in PARAM_FIELDS:
        if adam.m[name].shape != tensors[name].shape:
            raise FormatError(f"adam.m.{name} shape does not match its tensor")
        if adam.v[name].shape != tensors[name].shape:
            raise FormatError(f"adam.v.{name} shape does not match its tensor")

    return A2CModel(
        params=params,
        adam=adam,
        a2c_config=a2c_config,
        env_config=env_config,
        embed_dim=embed_dim,
    )
