import json

import numpy as np
import pytest

from coherence_lab import serialization as ser
from coherence_lab.channels import KrausChannel
from coherence_lab.errors import NotPSD, NotTracePreserving, NotUnitary, ParseError
from coherence_lab.gluings import LSPGluing, SPGluing, random_lsp_gluing, random_sp_gluing
from coherence_lab.states import DensityMatrix, random_density

from conftest import FIXTURES


def arrays_of(value):
    if isinstance(value, DensityMatrix):
        return [value.matrix]
    if isinstance(value, KrausChannel):
        return [value.kraus]
    if isinstance(value, LSPGluing):
        return [value.channel_a.kraus, value.channel_b.kraus, value.coeff_a, value.coeff_b]
    if isinstance(value, SPGluing):
        return [value.channel_a.kraus, value.channel_b.kraus, value.contraction]
    return [value]


@pytest.mark.parametrize("path", sorted(FIXTURES.glob("*.json")), ids=lambda p: p.stem)
def test_fixture_round_trip(path):
    first = ser.read(path)
    text = ser.dumps(first)
    second = ser.loads(text)
    assert type(first) is type(second)
    for x, y in zip(arrays_of(first), arrays_of(second)):
        assert np.array_equal(x, y)
    # re-serializing is a fixed point
    assert ser.dumps(second) == text
    assert json.loads(text) == json.loads(path.read_text())


def test_fixtures_present():
    names = {p.stem for p in FIXTURES.glob("*.json")}
    for required in ("gluing_identity", "gluing_phase_kick", "gluing_lsp_random", "gluing_sp_random",
                     "state_maximally_mixed", "state_zero", "state_plus", "state_diag_07_03",
                     "state_diag_06_04", "unitary_random"):
        assert required in names


def test_random_values_round_trip_bit_exact():
    rng = np.random.default_rng(0)
    for value in (random_density(3, seed=rng), random_lsp_gluing(3, rng), random_sp_gluing(2, rng)):
        again = ser.loads(ser.dumps(value))
        for x, y in zip(arrays_of(value), arrays_of(again)):
            assert np.array_equal(x, y)


def test_envelope_shape():
    doc = ser.encode(DensityMatrix(np.eye(2) / 2))
    assert doc["schema_version"] == "1" and doc["kind"] == "state"
    assert doc["payload"]["dim"] == 2
    assert doc["payload"]["matrix"][0][0] == [0.5, 0.0]


def doc(kind="state", version="1", payload=None):
    if payload is None:
        payload = {"dim": 1, "matrix": [[[1.0, 0.0]]]}
    return {"schema_version": version, "kind": kind, "payload": payload}


@pytest.mark.parametrize("bad", [
    doc(kind="mystery"),
    doc(version="2"),
    {"kind": "state", "payload": {}},
    [1, 2, 3],
    doc(payload={"dim": 2, "matrix": [[[1.0, 0.0]]]}),
    doc(payload={"dim": 1}),
    doc(payload={"dim": 1, "matrix": [[1.0]]}),
    doc(payload={"dim": 0, "matrix": []}),
    doc(payload={"dim": True, "matrix": [[[1.0, 0.0]]]}),
    doc(payload={"dim": 1, "matrix": [[["a", 0.0]]]}),
    doc(kind="channel", payload={"dim": 2, "kraus": [[[[1.0, 0.0]]]]}),
    doc(kind="gluing_lsp", payload={"channel_a": {"dim": 1, "kraus": [[[[1.0, 0.0]]]]}}),
])
def test_malformed_documents(bad):
    with pytest.raises(ParseError):
        ser.decode(bad)


def test_non_finite_rejected():
    with pytest.raises(ParseError):
        ser.loads('{"schema_version": "1", "kind": "state", "payload": {"dim": 1, "matrix": [[[NaN, 0]]]}}')


def test_invalid_json_and_missing_file(tmp_path):
    with pytest.raises(ParseError):
        ser.loads("{not json")
    with pytest.raises(ParseError):
        ser.read(tmp_path / "absent.json")


def test_semantic_validation_is_reported():
    with pytest.raises(NotPSD):
        ser.decode(doc(payload={"dim": 2, "matrix": [[[0.5, 0], [0.6, 0]], [[0.6, 0], [0.5, 0]]]}))
    with pytest.raises(NotTracePreserving):
        ser.decode(doc(kind="channel", payload={"dim": 1, "kraus": [[[[0.5, 0.0]]]]}))
    with pytest.raises(NotUnitary):
        ser.decode(doc(kind="unitary", payload={"dim": 1, "matrix": [[[2.0, 0.0]]]}))


def test_expected_kind(tmp_path):
    path = tmp_path / "s.json"
    ser.write(path, DensityMatrix(np.eye(2) / 2))
    assert isinstance(ser.read(path, "state"), DensityMatrix)
    with pytest.raises(ParseError):
        ser.read(path, ("gluing_lsp", "gluing_sp"))
