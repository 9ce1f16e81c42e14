"""Model container format.

A file is: the 6-byte magic "MNDBN1", a little-endian uint32 header
length, a compact JSON header with sorted keys, then the raw parameter
payload as little-endian float64 in a fixed order. For a single feature
layer the payload is w (row-major, visible rows), b_vis, a_hid. A network
file stores each layer's section bottom-up in that same order, then the
head's w_out (row-major) and b_out when a head is present.

Because the header is canonical JSON and the payload is raw bits,
save/load round-trips are byte-identical.
"""
from __future__ import annotations

import json
import struct

import numpy as np

from .dbn import Dbn, SoftmaxLayer
from .errors import DataError
from .rbm import Rbm

MAGIC = b"MNDBN1"
FORMAT_VERSION = 1


def _encode_header(header: dict) -> bytes:
    return json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _layer_payload(m: Rbm) -> bytes:
    return b"".join(
        [
            np.ascontiguousarray(m.w, dtype="<f8").tobytes(),
            np.ascontiguousarray(m.b_vis, dtype="<f8").tobytes(),
            np.ascontiguousarray(m.a_hid, dtype="<f8").tobytes(),
        ]
    )


def save_rbm(m: Rbm, path, meta: dict | None = None) -> None:
    header = {
        "kind": "rbm",
        "version": FORMAT_VERSION,
        "n_visible": m.n_visible,
        "n_hidden": m.n_hidden,
        "meta": meta or {},
    }
    blob = _encode_header(header)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(_layer_payload(m))


def save_dbn(d: Dbn, path, meta: dict | None = None) -> None:
    header = {
        "kind": "dbn",
        "version": FORMAT_VERSION,
        "layers": [{"n_visible": m.n_visible, "n_hidden": m.n_hidden} for m in d.layers],
        "head": None
        if d.head is None
        else {"n_features": d.head.w_out.shape[0], "n_classes": d.head.n_classes},
        "meta": meta or {},
    }
    blob = _encode_header(header)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for m in d.layers:
            fh.write(_layer_payload(m))
        if d.head is not None:
            fh.write(np.ascontiguousarray(d.head.w_out, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(d.head.b_out, dtype="<f8").tobytes())


def _read_header(path) -> tuple[dict, bytes]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataError(f"{path}: cannot open ({exc})") from exc
    if len(raw) < len(MAGIC) + 4:
        raise DataError(f"{path}: file too short to hold a header")
    if raw[: len(MAGIC)] != MAGIC:
        raise DataError(f"{path}: bad magic {raw[:len(MAGIC)]!r} (expected {MAGIC!r})")
    (header_len,) = struct.unpack("<I", raw[len(MAGIC) : len(MAGIC) + 4])
    start = len(MAGIC) + 4
    if len(raw) < start + header_len:
        raise DataError(f"{path}: truncated header (need {header_len} bytes)")
    try:
        header = json.loads(raw[start : start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: unreadable header ({exc})") from exc
    return header, raw[start + header_len :]


def _take(payload: bytes, pos: int, shape, path) -> tuple[np.ndarray, int]:
    count = int(np.prod(shape))
    nbytes = count * 8
    if pos + nbytes > len(payload):
        raise DataError(f"{path}: truncated payload at byte {pos} (need {nbytes} more)")
    arr = np.frombuffer(payload[pos : pos + nbytes], dtype="<f8").reshape(shape)
    return arr.astype(float), pos + nbytes


def load_rbm(path) -> tuple[Rbm, dict]:
    header, payload = _read_header(path)
    if header.get("kind") != "rbm":
        raise DataError(f"{path}: expected a single-layer model, found {header.get('kind')!r}")
    i, j = int(header["n_visible"]), int(header["n_hidden"])
    w, pos = _take(payload, 0, (i, j), path)
    b_vis, pos = _take(payload, pos, (i,), path)
    a_hid, pos = _take(payload, pos, (j,), path)
    if pos != len(payload):
        raise DataError(f"{path}: {len(payload) - pos} trailing payload bytes")
    return Rbm(w, b_vis, a_hid), header.get("meta", {})


def load_dbn(path) -> tuple[Dbn, dict]:
    header, payload = _read_header(path)
    if header.get("kind") != "dbn":
        raise DataError(f"{path}: expected a network file, found {header.get('kind')!r}")
    layers = []
    pos = 0
    for spec in header["layers"]:
        i, j = int(spec["n_visible"]), int(spec["n_hidden"])
        w, pos = _take(payload, pos, (i, j), path)
        b_vis, pos = _take(payload, pos, (i,), path)
        a_hid, pos = _take(payload, pos, (j,), path)
        layers.append(Rbm(w, b_vis, a_hid))
    head = None
    if header.get("head"):
        f, c = int(header["head"]["n_features"]), int(header["head"]["n_classes"])
        w_out, pos = _take(payload, pos, (f, c), path)
        b_out, pos = _take(payload, pos, (c,), path)
        head = SoftmaxLayer(w_out, b_out)
    if pos != len(payload):
        raise DataError(f"{path}: {len(payload) - pos} trailing payload bytes")
    return Dbn(layers, head), header.get("meta", {})


def load_model(path):
    """Open either container kind; returns (model, meta)."""
    header, _ = _read_header(path)
    kind = header.get("kind")
    if kind == "rbm":
        return load_rbm(path)
    if kind == "dbn":
        return load_dbn(path)
    raise DataError(f"{path}: unknown model kind {kind!r}")
