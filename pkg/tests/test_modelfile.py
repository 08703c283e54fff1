import json
import random

import pytest
from hypothesis import given, strategies as st

from wspolicy import ServiceModel, parse_model, serialize_model
from wspolicy.errors import ModelSchemaError, ModelSyntaxError

from corpus import travel_agency_bytes, travel_agency_json, travel_agency_model
from randgen import rand_model


def test_parse_corpus_fixture():
    model = parse_model(travel_agency_bytes())
    assert model.model_name == "TravelAgency"
    assert len(model.services) == 1
    (service,) = model.services
    assert [e.name for e in service.endpoints] == ["TravelAgencyEndpoint"]


def test_parse_minimal_document():
    data = b'{"formatVersion": "1.0", "modelName": "m", "targetNamespace": "http://x/"}'
    model = parse_model(data)
    assert model == ServiceModel("m", "http://x/")
    assert model.domains == ()
    assert model.attachments == ()


def test_bad_address_names_offending_path():
    doc = travel_agency_json()
    doc["services"][0]["endpoints"][0]["address"] = "not a uri"
    with pytest.raises(ModelSchemaError) as err:
        parse_model(json.dumps(doc).encode())
    assert err.value.path == "services[0].endpoints[0].address"


def test_unknown_keys_are_rejected():
    doc = travel_agency_json()
    doc["domains"][0]["assertions"][0]["asertion"] = True
    with pytest.raises(ModelSchemaError) as err:
        parse_model(json.dumps(doc).encode())
    assert "asertion" in str(err.value)

    doc = travel_agency_json()
    doc["extra"] = 1
    with pytest.raises(ModelSchemaError):
        parse_model(json.dumps(doc).encode())


def test_missing_required_field():
    with pytest.raises(ModelSchemaError) as err:
        parse_model(b'{"formatVersion": "1.0", "modelName": "m"}')
    assert "targetNamespace" in str(err.value)


def test_unrecognized_format_version():
    with pytest.raises(ModelSchemaError) as err:
        parse_model(b'{"formatVersion": "2.0", "modelName": "m", "targetNamespace": "http://x/"}')
    assert err.value.path == "formatVersion"


def test_malformed_json_reports_position():
    with pytest.raises(ModelSyntaxError) as err:
        parse_model(b'{"formatVersion": "1.0",\n  "modelName" }')
    assert err.value.line == 2


def test_not_utf8():
    with pytest.raises(ModelSyntaxError):
        parse_model(b"\xff\xfe{}")


def test_duplicate_attachment_subject_rejected_at_ingest():
    doc = travel_agency_json()
    doc["attachments"].append(json.loads(json.dumps(doc["attachments"][0])))
    with pytest.raises(ModelSchemaError) as err:
        parse_model(json.dumps(doc).encode())
    assert "pre-merge" in str(err.value)


def test_roundtrip_corpus():
    model = travel_agency_model()
    assert parse_model(serialize_model(model)) == model


def test_serialize_is_canonical_fixed_point():
    first = serialize_model(parse_model(travel_agency_bytes()))
    second = serialize_model(parse_model(first))
    assert first == second


def test_serialize_empty_model_has_only_header_fields():
    data = serialize_model(ServiceModel("m", "http://x/"))
    doc = json.loads(data.decode("utf-8"))
    assert sorted(doc) == ["formatVersion", "modelName", "targetNamespace"]


def test_serialize_deterministic():
    model = travel_agency_model()
    assert serialize_model(model) == serialize_model(model)


def test_roundtrip_random_models():
    rng = random.Random(2718281)
    for _ in range(30):
        model = rand_model(rng)
        assert parse_model(serialize_model(model)) == model


def test_parameter_values_survive_roundtrip_typed():
    doc = travel_agency_json()
    doc["attachments"][0]["policy"]["policy"][0]["assertion"]["parameters"] = [
        {"name": "retries", "value": 3},
        {"name": "ratio", "value": 2.5},
        {"name": "audit", "value": True},
        {"name": "label", "value": "x y"},
    ]
    data = json.dumps(doc).encode()
    model = parse_model(data)
    again = parse_model(serialize_model(model))
    assert again == model
    ref = again.attachments[0].policy.children[0]
    assert ("retries", 3) in ref.parameters
    assert ("ratio", 2.5) in ref.parameters
    assert ("audit", True) in ref.parameters


@given(st.binary(max_size=200))
def test_parser_raises_only_model_errors(data):
    try:
        parse_model(data)
    except (ModelSyntaxError, ModelSchemaError):
        pass
