"""JSON documents for states, channels, gluings and unitaries.

Every document is an envelope::

    {"schema_version": "1", "kind": "<kind>", "payload": {...}}

Complex numbers are ``[re, im]`` pairs and matrices are row-major nested
lists. Floats go through ``json``'s shortest round-trip repr, so a
decode/encode cycle is bit exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channels import KrausChannel
from .errors import ParseError
from .gluings import LSPGluing, SPGluing
from .numerics import check_unitary
from .states import DensityMatrix

SCHEMA_VERSION = "1"
KINDS = ("state", "channel", "gluing_lsp", "gluing_sp", "unitary")

__all__ = [
    "SCHEMA_VERSION",
    "KINDS",
    "DocumentEnvelope",
    "encode",
    "decode",
    "dumps",
    "loads",
    "read",
    "write",
]


@dataclass(frozen=True)
class DocumentEnvelope:
    schema_version: str
    kind: str
    payload: dict

    @classmethod
    def from_dict(cls, doc) -> "DocumentEnvelope":
        if not isinstance(doc, dict):
            raise ParseError("document must be a JSON object")
        missing = {"schema_version", "kind", "payload"} - doc.keys()
        if missing:
            raise ParseError(f"document is missing field(s) {sorted(missing)}")
        if doc["schema_version"] != SCHEMA_VERSION:
            raise ParseError(f"unsupported schema_version {doc['schema_version']!r}; expected {SCHEMA_VERSION!r}")
        if doc["kind"] not in KINDS:
            raise ParseError(f"unknown document kind {doc['kind']!r}; expected one of {KINDS}")
        if not isinstance(doc["payload"], dict):
            raise ParseError("payload must be a JSON object")
        return cls(doc["schema_version"], doc["kind"], doc["payload"])

    def to_dict(self) -> dict:
        return {"schema_version": self.schema_version, "kind": self.kind, "payload": self.payload}


# -- complex arrays ---------------------------------------------------------

def _encode_array(a: np.ndarray):
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_encode_array(x) for x in a]


def _decode_array(obj, ndim: int, what: str) -> np.ndarray:
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: not a rectangular array of [re, im] pairs ({exc})") from None
    if arr.ndim != ndim + 1 or arr.shape[-1] != 2:
        raise ParseError(f"{what}: expected a {ndim}-d array of [re, im] pairs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{what}: non-finite entries")
    return arr[..., 0] + 1j * arr[..., 1]


def _field(payload: dict, key: str, kind: str):
    if key not in payload:
        raise ParseError(f"{kind} payload is missing {key!r}")
    return payload[key]


def _dim(payload: dict, kind: str) -> int:
    d = _field(payload, "dim", kind)
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ParseError(f"{kind} payload has invalid dim {d!r}")
    return d


def _square(payload: dict, kind: str) -> np.ndarray:
    d = _dim(payload, kind)
    m = _decode_array(_field(payload, "matrix", kind), 2, f"{kind}.matrix")
    if m.shape != (d, d):
        raise ParseError(f"{kind}.matrix has shape {m.shape} but dim is {d}")
    return m


def _channel_payload(ch: KrausChannel) -> dict:
    return {"dim": ch.dim, "kraus": _encode_array(ch.kraus)}


def _channel_from(payload, kind: str) -> KrausChannel:
    if not isinstance(payload, dict):
        raise ParseError(f"{kind} must be an object")
    d = _dim(payload, kind)
    ops = _decode_array(_field(payload, "kraus", kind), 3, f"{kind}.kraus")
    if ops.shape[1:] != (d, d) or ops.shape[0] < 1:
        raise ParseError(f"{kind}.kraus has shape {ops.shape} but dim is {d}")
    return KrausChannel(ops)


# -- public API -------------------------------------------------------------

def encode(value, kind: str | None = None) -> dict:
    """Wrap a package value in a document envelope (as a plain dict).

    ``kind`` is inferred except for bare arrays, which default to ``unitary``.
    """
    if isinstance(value, DensityMatrix):
        kind, payload = "state", {"dim": value.dim, "matrix": _encode_array(value.matrix)}
    elif isinstance(value, KrausChannel):
        kind, payload = "channel", _channel_payload(value)
    elif isinstance(value, LSPGluing):
        kind = "gluing_lsp"
        payload = {
            "channel_a": _channel_payload(value.channel_a),
            "channel_b": _channel_payload(value.channel_b),
            "coeff_a": _encode_array(value.coeff_a),
            "coeff_b": _encode_array(value.coeff_b),
        }
    elif isinstance(value, SPGluing):
        kind = "gluing_sp"
        payload = {
            "channel_a": _channel_payload(value.channel_a),
            "channel_b": _channel_payload(value.channel_b),
            "contraction": _encode_array(value.contraction),
        }
    else:
        m = check_unitary(value)
        kind, payload = kind or "unitary", {"dim": m.shape[0], "matrix": _encode_array(m)}
    return DocumentEnvelope(SCHEMA_VERSION, kind, payload).to_dict()


def decode(doc: dict):
    env = DocumentEnvelope.from_dict(doc)
    p, kind = env.payload, env.kind
    if kind == "state":
        return DensityMatrix(_square(p, kind))
    if kind == "unitary":
        return check_unitary(_square(p, kind), "unitary")
    if kind == "channel":
        return _channel_from(p, kind)
    a = _channel_from(_field(p, "channel_a", kind), f"{kind}.channel_a")
    b = _channel_from(_field(p, "channel_b", kind), f"{kind}.channel_b")
    if kind == "gluing_lsp":
        ca = _decode_array(_field(p, "coeff_a", kind), 1, f"{kind}.coeff_a")
        cb = _decode_array(_field(p, "coeff_b", kind), 1, f"{kind}.coeff_b")
        return LSPGluing(a, b, ca, cb)
    c = _decode_array(_field(p, "contraction", kind), 2, f"{kind}.contraction")
    return SPGluing(a, b, c)


def dumps(value, kind: str | None = None) -> str:
    return json.dumps(encode(value, kind), indent=1)


def loads(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return decode(doc)


def read(path, expect: str | tuple[str, ...] | None = None):
    """Load a document, optionally insisting on its kind(s)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from None
    if expect is not None:
        kinds = (expect,) if isinstance(expect, str) else expect
        if isinstance(doc, dict) and doc.get("kind") not in kinds:
            raise ParseError(f"{path}: expected kind {' or '.join(kinds)}, got {doc.get('kind')!r}")
    return decode(doc)


def write(path, value, kind: str | None = None) -> None:
    Path(path).write_text(dumps(value, kind) + "\n")
