"""File formats: graph JSON, weights binary, and clip preprocessing.

Graph files are UTF-8 JSON::

    {
      "schema_version": 1,
      "channel_plan": "base",
      "input_shape": [1, 29, 96, 96],        # optional
      "nodes": [{"id": "...", "kind": "...", ...hyperparameters}, ...],
      "residual_edges": [["src", "dst"], ...]
    }

Weights files are little-endian binary: the magic bytes ``MVSRW1``, a u32
manifest length, a UTF-8 JSON manifest, then the payload. The manifest is::

    {"schema_version": 1,
     "tensors": [{"layer": id, "name": tensor name, "shape": [...],
                  "dtype": "fp32"|"int8", "offset": n, "nbytes": n}, ...]}

Offsets are relative to the payload start and must be non-overlapping and in
bounds. An fp32 tensor's block is its f32 data; an int8 tensor's block is a
f32 scale, an i32 zero point, then the int8 codes.

Clips are 29 grayscale 96x96 frames in [0, 1], produced from 29 RGB frames
of 256x256 by center-cropping rows and columns [80, 176) and applying the
BT.601 luma weights (0.299 R + 0.587 G + 0.114 B) / 255. Frame directories
hold 29 files, lexicographically ordered, each either a binary PPM (P6,
maxval 255) or exactly 256*256*3 raw RGB bytes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PayloadBoundsError, SchemaError, ValidationError
from .graph import KINDS, LayerGraph, LayerSpec, weight_shapes
from .tensor import QuantParams, Tensor

GRAPH_SCHEMA_VERSION = 1
WEIGHTS_SCHEMA_VERSION = 1
WEIGHTS_MAGIC = b"MVSRW1"

FRAME_COUNT = 29
FRAME_SIDE = 256
CROP_SIDE = 96
CROP_OFFSET = (FRAME_SIDE - CROP_SIDE) // 2  # 80


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------


def serialize_graph(graph: LayerGraph) -> str:
    graph.validate()
    doc = {
        "schema_version": GRAPH_SCHEMA_VERSION,
        "channel_plan": graph.channel_plan,
        "nodes": [dict({"id": node_id}, **spec.to_dict()) for node_id, spec in graph.nodes],
        "residual_edges": [list(edge) for edge in graph.residual_edges],
    }
    if graph.input_shape is not None:
        doc["input_shape"] = list(graph.input_shape)
    return json.dumps(doc, indent=2)


def parse_graph(text: str) -> LayerGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"graph file is not valid JSON: {exc}", position=exc.pos) from exc
    if not isinstance(doc, dict):
        raise SchemaError("graph file must hold a JSON object")
    version = doc.get("schema_version")
    if version != GRAPH_SCHEMA_VERSION:
        raise SchemaError(f"unsupported graph schema_version {version!r}")
    nodes = []
    for index, entry in enumerate(doc.get("nodes", [])):
        if not isinstance(entry, dict) or "id" not in entry or "kind" not in entry:
            raise SchemaError(f"node #{index} must have 'id' and 'kind'", position=index)
        node_id = str(entry["id"])
        kind = entry["kind"]
        if kind not in KINDS:
            raise SchemaError(f"node {node_id!r} has unknown kind {kind!r}", node_id=node_id)
        params = {k: v for k, v in entry.items() if k != "id"}
        try:
            spec = LayerSpec(**params)
        except TypeError as exc:
            raise SchemaError(f"node {node_id!r}: {exc}", node_id=node_id) from exc
        except ValueError as exc:
            raise SchemaError(f"node {node_id!r}: {exc}", node_id=node_id) from exc
        nodes.append((node_id, spec))
    edges = []
    for index, edge in enumerate(doc.get("residual_edges", [])):
        if not isinstance(edge, (list, tuple)) or len(edge) != 2:
            raise SchemaError(f"residual edge #{index} must be a [src, dst] pair",
                              position=index)
        edges.append((str(edge[0]), str(edge[1])))
    shape = doc.get("input_shape")
    graph = LayerGraph(
        nodes=nodes,
        residual_edges=edges,
        channel_plan=doc.get("channel_plan", "custom"),
        input_shape=tuple(shape) if shape is not None else None,
    )
    try:
        graph.validate()
    except ValueError as exc:
        raise SchemaError(f"graph is structurally invalid: {exc}") from exc
    return graph


def write_graph(path, graph: LayerGraph):
    Path(path).write_text(serialize_graph(graph), encoding="utf-8")


def read_graph(path) -> LayerGraph:
    return parse_graph(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------


def _tensor_nbytes(tensor: Tensor) -> int:
    if tensor.quant is None:
        return 4 * tensor.data.size
    return 8 + tensor.data.size  # f32 scale + i32 zero point + codes


def serialize_weights(bundle: dict, graph: LayerGraph | None = None) -> bytes:
    """Pack a {node id: {name: Tensor}} bundle; validates against a graph if given."""
    if graph is not None:
        _check_bundle_against_graph(bundle, graph)
    entries = []
    payload = bytearray()
    for node_id, tensors in bundle.items():
        for name, tensor in tensors.items():
            offset = len(payload)
            if tensor.quant is None:
                payload += tensor.data.astype("<f4").tobytes()
            else:
                payload += struct.pack("<f", tensor.quant.scale)
                payload += struct.pack("<i", tensor.quant.zero_point)
                payload += tensor.data.astype("<i1").tobytes()
            entries.append({
                "layer": node_id,
                "name": name,
                "shape": list(tensor.shape),
                "dtype": tensor.dtype,
                "offset": offset,
                "nbytes": _tensor_nbytes(tensor),
            })
    manifest = json.dumps({"schema_version": WEIGHTS_SCHEMA_VERSION,
                           "tensors": entries}).encode("utf-8")
    return WEIGHTS_MAGIC + struct.pack("<I", len(manifest)) + manifest + bytes(payload)


def parse_weights(blob: bytes, graph: LayerGraph | None = None) -> dict:
    """Unpack a weights blob back into a tensor bundle, validating the layout."""
    if len(blob) < len(WEIGHTS_MAGIC) + 4:
        raise SchemaError(f"weights file truncated at byte {len(blob)}", position=len(blob))
    if blob[: len(WEIGHTS_MAGIC)] != WEIGHTS_MAGIC:
        raise SchemaError(f"bad magic {blob[:len(WEIGHTS_MAGIC)]!r}", position=0)
    (manifest_len,) = struct.unpack_from("<I", blob, len(WEIGHTS_MAGIC))
    header_len = len(WEIGHTS_MAGIC) + 4
    if header_len + manifest_len > len(blob):
        raise PayloadBoundsError(
            f"manifest length {manifest_len} overruns file of {len(blob)} bytes",
            position=header_len,
        )
    try:
        manifest = json.loads(blob[header_len : header_len + manifest_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"manifest is not valid JSON: {exc}", position=header_len) from exc
    if manifest.get("schema_version") != WEIGHTS_SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported weights schema_version {manifest.get('schema_version')!r}"
        )
    payload = blob[header_len + manifest_len :]
    bundle: dict = {}
    seen_spans = []
    for index, entry in enumerate(manifest.get("tensors", [])):
        try:
            layer, name = entry["layer"], entry["name"]
            shape = tuple(int(v) for v in entry["shape"])
            dtype, offset, nbytes = entry["dtype"], int(entry["offset"]), int(entry["nbytes"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"manifest entry #{index} malformed: {exc}",
                              position=index) from exc
        count = int(np.prod(shape))
        expected = 4 * count if dtype == "fp32" else 8 + count
        if dtype not in ("fp32", "int8"):
            raise SchemaError(f"tensor {layer}/{name} has unknown dtype {dtype!r}",
                              node_id=layer)
        if nbytes != expected:
            raise SchemaError(
                f"tensor {layer}/{name}: nbytes {nbytes} does not match shape {shape}",
                node_id=layer,
            )
        if offset < 0 or offset + nbytes > len(payload):
            raise PayloadBoundsError(
                f"tensor {layer}/{name} spans [{offset}, {offset + nbytes}) outside "
                f"payload of {len(payload)} bytes",
                position=offset, node_id=layer,
            )
        seen_spans.append((offset, offset + nbytes, f"{layer}/{name}"))
        block = payload[offset : offset + nbytes]
        if dtype == "fp32":
            data = np.frombuffer(block, dtype="<f4").astype(np.float32)
            tensor = Tensor(shape=shape, data=data)
        else:
            (scale,) = struct.unpack_from("<f", block, 0)
            (zero_point,) = struct.unpack_from("<i", block, 4)
            codes = np.frombuffer(block, dtype="<i1", offset=8).astype(np.int8)
            tensor = Tensor(shape=shape, data=codes,
                            quant=QuantParams(float(scale), int(zero_point)))
        bundle.setdefault(layer, {})[name] = tensor
    seen_spans.sort()
    for (_, end_a, name_a), (start_b, _, name_b) in zip(seen_spans, seen_spans[1:]):
        if start_b < end_a:
            raise PayloadBoundsError(f"tensors {name_a} and {name_b} overlap",
                                     position=start_b)
    if graph is not None:
        _check_bundle_against_graph(bundle, graph)
    return bundle


def _check_bundle_against_graph(bundle: dict, graph: LayerGraph):
    ids = dict(graph.nodes)
    for node_id, tensors in bundle.items():
        if node_id not in ids:
            raise SchemaError(f"weights name unknown node {node_id!r}", node_id=node_id)
    for node_id, spec in graph.nodes:
        needed = weight_shapes(spec)
        if not needed:
            continue
        have = bundle.get(node_id, {})
        for name, shape in needed.items():
            if name not in have:
                raise SchemaError(f"node {node_id!r} is missing tensor {name!r}",
                                  node_id=node_id)
            if tuple(have[name].shape) != tuple(shape):
                raise SchemaError(
                    f"node {node_id!r} tensor {name!r}: shape {have[name].shape} "
                    f"does not match the graph's {shape}",
                    node_id=node_id,
                )


def write_weights(path, bundle: dict, graph: LayerGraph | None = None):
    Path(path).write_bytes(serialize_weights(bundle, graph))


def read_weights(path, graph: LayerGraph | None = None) -> dict:
    return parse_weights(Path(path).read_bytes(), graph)


# ---------------------------------------------------------------------------
# clips
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Clip:
    """29 grayscale frames, 96x96, fp32 in [0, 1]."""

    frames: np.ndarray

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float32)
        if frames.shape != (FRAME_COUNT, CROP_SIDE, CROP_SIDE):
            raise ValidationError(
                f"clip must be {FRAME_COUNT}x{CROP_SIDE}x{CROP_SIDE}, got {frames.shape}"
            )
        if frames.min() < 0 or frames.max() > 1:
            raise ValidationError("clip values must lie in [0, 1]")
        object.__setattr__(self, "frames", frames)

    def as_input(self) -> Tensor:
        """The clip as a single-channel (1, 29, 96, 96) network input."""
        return Tensor.from_array(self.frames[None])


def preprocess_clip(raw_frames) -> Clip:
    """Center-crop, grayscale and scale raw RGB frames into a Clip.

    Expects (29, 256, 256, 3) 8-bit frames. The luma dot product is done in
    integers and divided once by 255000, so pure white maps to exactly 1.0.
    """
    raw = np.asarray(raw_frames)
    if raw.ndim != 4 or raw.shape != (FRAME_COUNT, FRAME_SIDE, FRAME_SIDE, 3):
        raise ValidationError(
            f"raw frames must be ({FRAME_COUNT}, {FRAME_SIDE}, {FRAME_SIDE}, 3), "
            f"got {raw.shape}"
        )
    if raw.dtype != np.uint8:
        if np.issubdtype(raw.dtype, np.integer) and raw.min() >= 0 and raw.max() <= 255:
            raw = raw.astype(np.uint8)
        else:
            raise ValidationError(f"raw frames must be 8-bit, got dtype {raw.dtype}")
    crop = raw[:, CROP_OFFSET : CROP_OFFSET + CROP_SIDE,
               CROP_OFFSET : CROP_OFFSET + CROP_SIDE, :].astype(np.int64)
    luma = crop[..., 0] * 299 + crop[..., 1] * 587 + crop[..., 2] * 114
    frames = (luma / 255000.0).astype(np.float32)
    return Clip(frames=np.clip(frames, 0.0, 1.0))


def _parse_ppm(data: bytes, source: str) -> np.ndarray:
    pos = 0

    def token():
        nonlocal pos
        while pos < len(data):
            ch = data[pos : pos + 1]
            if ch == b"#":
                while pos < len(data) and data[pos : pos + 1] != b"\n":
                    pos += 1
            elif ch.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValidationError(f"{source}: truncated PPM header")
        return data[start:pos]

    if token() != b"P6":
        raise ValidationError(f"{source}: not a binary PPM (P6) file")
    width, height, maxval = (int(token()) for _ in range(3))
    pos += 1  # single whitespace byte after maxval
    if (width, height) != (FRAME_SIDE, FRAME_SIDE):
        raise ValidationError(f"{source}: frame is {width}x{height}, "
                              f"expected {FRAME_SIDE}x{FRAME_SIDE}")
    if maxval != 255:
        raise ValidationError(f"{source}: PPM maxval must be 255, got {maxval}")
    body = data[pos : pos + FRAME_SIDE * FRAME_SIDE * 3]
    if len(body) != FRAME_SIDE * FRAME_SIDE * 3:
        raise ValidationError(f"{source}: PPM pixel data truncated")
    return np.frombuffer(body, dtype=np.uint8).reshape(FRAME_SIDE, FRAME_SIDE, 3)


def write_ppm(path, frame: np.ndarray):
    """Write one (256, 256, 3) uint8 frame as binary PPM."""
    frame = np.asarray(frame, dtype=np.uint8)
    header = f"P6\n{frame.shape[1]} {frame.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + frame.tobytes())


def load_clip_dir(path) -> np.ndarray:
    """Read 29 raw RGB frames (PPM or raw bytes) from a directory, sorted by name."""
    directory = Path(path)
    files = sorted(p for p in directory.iterdir() if p.is_file())
    if len(files) != FRAME_COUNT:
        raise ValidationError(
            f"{directory}: expected {FRAME_COUNT} frame files, found {len(files)}"
        )
    frames = []
    raw_len = FRAME_SIDE * FRAME_SIDE * 3
    for p in files:
        data = p.read_bytes()
        if data[:2] == b"P6":
            frames.append(_parse_ppm(data, p.name))
        elif len(data) == raw_len:
            frames.append(np.frombuffer(data, dtype=np.uint8).reshape(FRAME_SIDE, FRAME_SIDE, 3))
        else:
            raise ValidationError(
                f"{p.name}: neither PPM nor {raw_len} bytes of raw 256x256x3 RGB"
            )
    return np.stack(frames)


def write_clip(path, clip: Clip):
    """Store a preprocessed clip as .npy (f32, shape (29, 96, 96))."""
    np.save(path, clip.frames, allow_pickle=False)


def read_clip(path) -> Clip:
    return Clip(frames=np.load(path, allow_pickle=False))
