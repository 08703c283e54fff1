"""Shared fixtures: the TravelAgency corpus and the alias-vocabulary fixtures."""
from __future__ import annotations

import json
from pathlib import Path

from wspolicy import (
    All,
    AssertionDecl,
    AssertionRef,
    DomainSchema,
    ExactlyOne,
    Policy,
    QName,
    SemanticAnnotation,
    ServiceModel,
    parse_model,
)

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

MODEL_NS = "http://emi/TravelAgency.wsdl20"
SEC_NS = "http://emi/ws-semanticsecuritypolicy.xsd"
ONTO = "http://example.org/sec-onto#"
ACME_NS = "http://example.org/acme-security.xsd"


def sp(local: str) -> QName:
    return QName(SEC_NS, local)


def acme(local: str) -> QName:
    return QName(ACME_NS, local)


def travel_agency_bytes() -> bytes:
    return (FIXTURES / "travel_agency.json").read_bytes()


def travel_agency_model() -> ServiceModel:
    return parse_model(travel_agency_bytes())


def travel_agency_json() -> dict:
    """A mutable copy of the fixture document, for building broken variants."""
    return json.loads(travel_agency_bytes().decode("utf-8"))


def model_from_json(doc: dict) -> ServiceModel:
    return parse_model(json.dumps(doc).encode("utf-8"))


def endpoint_policy():
    """The endpoint policy of the corpus: UsernameToken with a nested choice
    between (NoPassword, WssUsernameToken10) and (HashPassword, WssUsernameToken10)."""
    model = travel_agency_model()
    assert len(model.attachments) == 1
    return model.attachments[0].policy


def acme_domain() -> DomainSchema:
    """An alias vocabulary: different QNames, same ontology concepts."""
    return DomainSchema(
        domain_name="acmesecurity",
        target_namespace=ACME_NS,
        prefix="acme",
        assertions=(
            AssertionDecl(
                "HashedPwd", "empty",
                annotation=SemanticAnnotation((ONTO + "HashPassword",)),
            ),
            AssertionDecl(
                "UserToken", "complex",
                nestable_children=("HashedPwd", "Wss10Token"),
                annotation=SemanticAnnotation((ONTO + "UsernameToken",)),
            ),
            AssertionDecl(
                "Wss10Token", "empty",
                annotation=SemanticAnnotation((ONTO + "WssUsernameToken10",)),
            ),
        ),
    )


def acme_requester_policy():
    """A requester wanting hashed passwords, phrased in the alias vocabulary."""
    return Policy(
        AssertionRef(
            acme("UserToken"),
            nested=Policy(
                ExactlyOne(
                    All(AssertionRef(acme("HashedPwd")), AssertionRef(acme("Wss10Token")))
                )
            ),
        )
    )
