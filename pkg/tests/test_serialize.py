import json
import math

import numpy as np
import pytest

from quasivar import (
    Objective,
    QpmSpace,
    canonical_space,
    ekeland_point,
    generate_random_qpm,
    oracle_ekeland_all,
    strong_ekeland_suzuki,
)
from quasivar import serialize
from quasivar.hashing import instance_digest
from quasivar.strong import minimizing_sequence_probe


def test_space_round_trip_full_precision(tmp_path):
    space = generate_random_qpm(6, 3, zero_density=0.3)
    path = tmp_path / "space.json"
    serialize.save_space(path, space)
    back = serialize.load_space(path)
    assert back.points == space.points
    assert np.array_equal(back.matrix, space.matrix)  # bit-exact decimals


def test_implicit_space_round_trip(tmp_path):
    ray = canonical_space("metric_ray", step=0.25)
    path = tmp_path / "ray.json"
    serialize.save_space(path, ray)
    back = serialize.load_space(path)
    assert back.formula == "metric_ray" and back.step == 0.25


def test_space_document_validation():
    with pytest.raises(ValueError, match="matrix"):
        serialize.space_from_dict({"schema_version": 1})


def test_objective_round_trip_with_inf(tmp_path):
    f = Objective.from_values({"a": 1.5, "b": math.inf, "c": 0.0})
    path = tmp_path / "f.json"
    serialize.save_objective(path, f)
    back = serialize.load_objective(path)
    assert back.values == f.values
    assert json.loads(path.read_text())["values"]["b"] == "inf"


def test_sequence_from_indices(three_point):
    space, _ = three_point
    seq = serialize.sequence_from_dict(space, {"indices": [0, 2, 1, 2]})
    assert seq.items == ("a", "c", "b", "c")


def test_sequence_from_formula():
    ray = canonical_space("upper_ray")
    seq = serialize.sequence_from_dict(ray, {"formula": "harmonic", "length": 4})
    assert seq.items == (1.0, 0.5, 1 / 3, 0.25)
    assert seq.generator is not None


def test_certificate_payload_scrubs_inf(three_point):
    space, _ = three_point
    f = Objective.from_values({"a": 3.0, "b": math.inf, "c": 0.0})
    cert = ekeland_point(space, f, 1.0, 1.0, "a")
    payload = serialize.ekeland_certificate_to_dict(cert)
    serialize.dumps_report(payload)  # must not raise on non-finite values
    assert payload["z"] == cert.z


def test_strong_certificate_payload(three_point):
    space, f = three_point
    cert = strong_ekeland_suzuki(space, f, 1.0, "a")
    payload = serialize.strong_certificate_to_dict(cert)
    assert payload["flavor"] == "suzuki"
    assert set(payload["conditions"]) == {"i", "ii", "iii", "iv"}


def test_oracle_payload(three_point):
    space, f = three_point
    result = oracle_ekeland_all(space, f, 1.0, 1.0, "a")
    payload = serialize.oracle_result_to_dict(result)
    assert payload["admissible"] == ["c"]


def test_trace_csv_format(tmp_path, three_point):
    space, f = three_point
    trace = minimizing_sequence_probe(space, f, 1.0, "c", trials=1, horizon=8)[0]
    path = tmp_path / "trace.csv"
    serialize.write_trace_csv(path, trace)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "n,g_value,dist"
    assert len(lines) == 9
    first = lines[1].split(",")
    assert first[0] == "0" and float(first[1]) >= 0.0


def test_reports_deterministic(three_point):
    space, f = three_point
    cert_a = ekeland_point(space, f, 1.0, 1.0, "a")
    cert_b = ekeland_point(space, f, 1.0, 1.0, "a")
    text_a = serialize.dumps_report(serialize.ekeland_certificate_to_dict(cert_a))
    text_b = serialize.dumps_report(serialize.ekeland_certificate_to_dict(cert_b))
    assert text_a == text_b


def test_digest_sensitive_to_instance(three_point):
    space, f = three_point
    base = instance_digest(space, f, {"op": "ekeland", "alpha": 1.0, "x0": "a"})
    other_param = instance_digest(space, f, {"op": "ekeland", "alpha": 2.0, "x0": "a"})
    assert base != other_param
    other_f = Objective.from_values({"a": 3.0, "b": 1.0, "c": 0.25})
    assert base != instance_digest(space, other_f,
                                   {"op": "ekeland", "alpha": 1.0, "x0": "a"})
