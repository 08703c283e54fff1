"""Parsing and serialization of the declarative service-model file.

The format is JSON (UTF-8), version "1.0"; docs/model-format.md is the
normative key reference.  Parsing is strict: unknown keys, missing required
fields and malformed URIs are schema errors naming the offending path.
Serialization is canonical (fixed key order, 2-space indent, named collections
sorted) so parse and serialize invert each other exactly.
"""
from __future__ import annotations

import json
import math
from typing import Any

from .algebra import All, AssertionRef, ExactlyOne, Policy, PolicyExpr
from .errors import ModelSchemaError, ModelSyntaxError
from .model import (
    AssertionDecl,
    AttributeDecl,
    BindingDecl,
    DomainSchema,
    Endpoint,
    ExternalNamespace,
    FaultDecl,
    InterfaceDecl,
    MessageRef,
    OperationDecl,
    PolicyAttachment,
    SemanticAnnotation,
    ServiceDecl,
    ServiceModel,
    SubjectRef,
    SUBJECT_KINDS,
    TYPE_KINDS,
)
from .names import QName, is_absolute_uri, is_ncname

FORMAT_VERSION = "1.0"


def _fail(path: str, message: str):
    raise ModelSchemaError(path, message)


def _require_object(value: Any, path: str, allowed: tuple[str, ...]) -> dict:
    if not isinstance(value, dict):
        _fail(path, f"expected an object, got {type(value).__name__}")
    for key in value:
        if key not in allowed:
            _fail(f"{path}.{key}" if path else key, "unknown key")
    return value


def _require_string(obj: dict, path: str, key: str, required: bool = True) -> str | None:
    if key not in obj:
        if required:
            _fail(path, f"missing required field {key!r}")
        return None
    value = obj[key]
    if not isinstance(value, str):
        _fail(f"{path}.{key}", f"expected a string, got {type(value).__name__}")
    return value


def _require_list(obj: dict, path: str, key: str) -> list:
    value = obj.get(key, [])
    if not isinstance(value, list):
        _fail(f"{path}.{key}", f"expected a list, got {type(value).__name__}")
    return value


def _ncname(obj: dict, path: str, key: str) -> str:
    value = _require_string(obj, path, key)
    if not is_ncname(value):
        _fail(f"{path}.{key}", f"not an NCName: {value!r}")
    return value


def _absolute_uri(obj: dict, path: str, key: str, required: bool = True) -> str | None:
    value = _require_string(obj, path, key, required)
    if value is None:
        return None
    if not is_absolute_uri(value):
        _fail(f"{path}.{key}", f"not an absolute URI: {value!r}")
    return value


def _qname(value: Any, path: str) -> QName:
    obj = _require_object(value, path, ("namespace", "local"))
    namespace = _require_string(obj, path, "namespace")
    local = _require_string(obj, path, "local")
    if not is_ncname(local):
        _fail(f"{path}.local", f"not an NCName: {local!r}")
    return QName(namespace, local)


def _annotation(value: Any, path: str) -> SemanticAnnotation:
    obj = _require_object(value, path, ("modelReference", "loweringSchema", "liftingSchema"))
    refs = obj.get("modelReference")
    if not isinstance(refs, list) or not refs:
        _fail(f"{path}.modelReference", "expected a non-empty list of URIs")
    uris = []
    for i, uri in enumerate(refs):
        if not isinstance(uri, str) or not is_absolute_uri(uri):
            _fail(f"{path}.modelReference[{i}]", f"not an absolute URI: {uri!r}")
        uris.append(uri)
    return SemanticAnnotation(
        model_reference=tuple(uris),
        lowering_schema=_absolute_uri(obj, path, "loweringSchema", required=False),
        lifting_schema=_absolute_uri(obj, path, "liftingSchema", required=False),
    )


def _attribute(value: Any, path: str) -> AttributeDecl:
    obj = _require_object(value, path, ("name", "simpleType", "annotation"))
    name = _ncname(obj, path, "name")
    if "simpleType" not in obj:
        _fail(path, "missing required field 'simpleType'")
    simple_type = _qname(obj["simpleType"], f"{path}.simpleType")
    annotation = None
    if "annotation" in obj:
        annotation = _annotation(obj["annotation"], f"{path}.annotation")
    return AttributeDecl(name, simple_type, annotation)


def _assertion(value: Any, path: str) -> AssertionDecl:
    obj = _require_object(
        value,
        path,
        ("name", "typeKind", "simpleType", "attributes", "nestableChildren", "annotation"),
    )
    name = _ncname(obj, path, "name")
    kind = _require_string(obj, path, "typeKind")
    if kind not in TYPE_KINDS:
        _fail(f"{path}.typeKind", f"expected one of {TYPE_KINDS}, got {kind!r}")
    simple_type = None
    if "simpleType" in obj:
        simple_type = _qname(obj["simpleType"], f"{path}.simpleType")
    attributes = [
        _attribute(item, f"{path}.attributes[{i}]")
        for i, item in enumerate(_require_list(obj, path, "attributes"))
    ]
    nestable = []
    for i, item in enumerate(_require_list(obj, path, "nestableChildren")):
        if not isinstance(item, str) or not is_ncname(item):
            _fail(f"{path}.nestableChildren[{i}]", f"not an NCName: {item!r}")
        nestable.append(item)
    annotation = None
    if "annotation" in obj:
        annotation = _annotation(obj["annotation"], f"{path}.annotation")
    return AssertionDecl(name, kind, simple_type, tuple(attributes), tuple(nestable), annotation)


def _domain(value: Any, path: str) -> DomainSchema:
    obj = _require_object(value, path, ("name", "targetNamespace", "prefix", "assertions"))
    return DomainSchema(
        domain_name=_ncname(obj, path, "name"),
        target_namespace=_absolute_uri(obj, path, "targetNamespace"),
        prefix=_ncname(obj, path, "prefix"),
        assertions=tuple(
            _assertion(item, f"{path}.assertions[{i}]")
            for i, item in enumerate(_require_list(obj, path, "assertions"))
        ),
    )


def _message_ref(value: Any, path: str) -> MessageRef:
    obj = _require_object(value, path, ("name", "elementType"))
    name = _ncname(obj, path, "name")
    if "elementType" not in obj:
        _fail(path, "missing required field 'elementType'")
    return MessageRef(name, _qname(obj["elementType"], f"{path}.elementType"))


def _fault(value: Any, path: str) -> FaultDecl:
    obj = _require_object(value, path, ("name", "elementType"))
    name = _ncname(obj, path, "name")
    element_type = None
    if "elementType" in obj:
        element_type = _qname(obj["elementType"], f"{path}.elementType")
    return FaultDecl(name, element_type)


def _operation(value: Any, path: str) -> OperationDecl:
    obj = _require_object(value, path, ("name", "inputs", "outputs", "faultRefs"))
    name = _ncname(obj, path, "name")
    inputs = [
        _message_ref(item, f"{path}.inputs[{i}]")
        for i, item in enumerate(_require_list(obj, path, "inputs"))
    ]
    outputs = [
        _message_ref(item, f"{path}.outputs[{i}]")
        for i, item in enumerate(_require_list(obj, path, "outputs"))
    ]
    fault_refs = []
    for i, item in enumerate(_require_list(obj, path, "faultRefs")):
        if not isinstance(item, str):
            _fail(f"{path}.faultRefs[{i}]", f"expected a string, got {type(item).__name__}")
        fault_refs.append(item)
    return OperationDecl(name, tuple(inputs), tuple(outputs), tuple(fault_refs))


def _interface(value: Any, path: str) -> InterfaceDecl:
    obj = _require_object(value, path, ("name", "operations", "faults"))
    return InterfaceDecl(
        name=_ncname(obj, path, "name"),
        operations=tuple(
            _operation(item, f"{path}.operations[{i}]")
            for i, item in enumerate(_require_list(obj, path, "operations"))
        ),
        faults=tuple(
            _fault(item, f"{path}.faults[{i}]")
            for i, item in enumerate(_require_list(obj, path, "faults"))
        ),
    )


def _binding(value: Any, path: str) -> BindingDecl:
    obj = _require_object(
        value, path, ("name", "interface", "transportProtocol", "messageEncoding")
    )
    encoding = _require_string(obj, path, "messageEncoding")
    if not encoding:
        _fail(f"{path}.messageEncoding", "must be a non-empty token")
    return BindingDecl(
        name=_ncname(obj, path, "name"),
        interface_ref=_require_string(obj, path, "interface"),
        transport_protocol=_absolute_uri(obj, path, "transportProtocol"),
        message_encoding=encoding,
    )


def _endpoint(value: Any, path: str) -> Endpoint:
    obj = _require_object(value, path, ("name", "binding", "address"))
    return Endpoint(
        name=_ncname(obj, path, "name"),
        binding_ref=_require_string(obj, path, "binding"),
        address=_absolute_uri(obj, path, "address"),
    )


def _service(value: Any, path: str) -> ServiceDecl:
    obj = _require_object(value, path, ("name", "interface", "endpoints"))
    return ServiceDecl(
        name=_ncname(obj, path, "name"),
        interface_ref=_require_string(obj, path, "interface"),
        endpoints=tuple(
            _endpoint(item, f"{path}.endpoints[{i}]")
            for i, item in enumerate(_require_list(obj, path, "endpoints"))
        ),
    )


def _param_value(value: Any, path: str):
    if isinstance(value, bool) or isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        if isinstance(value, float) and not math.isfinite(value):
            _fail(path, "parameter values must be finite")
        return value
    _fail(path, f"expected a string, number or boolean, got {type(value).__name__}")


def parse_policy_expr(value: Any, path: str) -> PolicyExpr:
    """Nested-object policy form: policy / all / exactlyOne / assertion."""
    obj = _require_object(value, path, ("policy", "all", "exactlyOne", "assertion"))
    if len(obj) != 1:
        _fail(path, "expected exactly one of 'policy', 'all', 'exactlyOne', 'assertion'")
    key = next(iter(obj))
    if key in ("policy", "all", "exactlyOne"):
        children = obj[key]
        if not isinstance(children, list):
            _fail(f"{path}.{key}", f"expected a list, got {type(children).__name__}")
        ctor = {"policy": Policy, "all": All, "exactlyOne": ExactlyOne}[key]
        return ctor(
            *(parse_policy_expr(item, f"{path}.{key}[{i}]") for i, item in enumerate(children))
        )
    body = _require_object(
        obj["assertion"], f"{path}.assertion", ("qname", "optional", "parameters", "nested")
    )
    if "qname" not in body:
        _fail(f"{path}.assertion", "missing required field 'qname'")
    qname = _qname(body["qname"], f"{path}.assertion.qname")
    optional = body.get("optional", False)
    if not isinstance(optional, bool):
        _fail(f"{path}.assertion.optional", "expected a boolean")
    parameters = []
    seen_params: set[str] = set()
    for i, item in enumerate(_require_list(body, f"{path}.assertion", "parameters")):
        ppath = f"{path}.assertion.parameters[{i}]"
        pobj = _require_object(item, ppath, ("name", "value"))
        pname = _ncname(pobj, ppath, "name")
        if pname in seen_params:
            _fail(ppath, f"duplicate parameter name {pname!r}")
        seen_params.add(pname)
        if "value" not in pobj:
            _fail(ppath, "missing required field 'value'")
        parameters.append((pname, _param_value(pobj["value"], f"{ppath}.value")))
    nested = None
    if "nested" in body:
        npath = f"{path}.assertion.nested"
        nested_obj = _require_object(body["nested"], npath, ("policy",))
        if "policy" not in nested_obj:
            _fail(npath, "nested policies must use the 'policy' form")
        nested = parse_policy_expr(nested_obj, npath)
    return AssertionRef(qname, optional=optional, parameters=tuple(parameters), nested=nested)


def _attachment(value: Any, path: str) -> PolicyAttachment:
    obj = _require_object(value, path, ("subject", "policy"))
    if "subject" not in obj:
        _fail(path, "missing required field 'subject'")
    spath = f"{path}.subject"
    sobj = _require_object(obj["subject"], spath, ("kind", "path"))
    kind = _require_string(sobj, spath, "kind")
    if kind not in SUBJECT_KINDS:
        _fail(f"{spath}.kind", f"expected one of {SUBJECT_KINDS}, got {kind!r}")
    raw_path = sobj.get("path")
    if not isinstance(raw_path, list) or not all(isinstance(p, str) for p in raw_path):
        _fail(f"{spath}.path", "expected a list of identifiers")
    if "policy" not in obj:
        _fail(path, "missing required field 'policy'")
    policy = parse_policy_expr(obj["policy"], f"{path}.policy")
    if not isinstance(policy, Policy):
        _fail(f"{path}.policy", "an attachment policy must use the 'policy' form at the root")
    return PolicyAttachment(SubjectRef(kind, tuple(raw_path)), policy)


_TOP_KEYS = (
    "formatVersion",
    "modelName",
    "targetNamespace",
    "externalNamespaces",
    "domains",
    "interfaces",
    "bindings",
    "services",
    "attachments",
)


def parse_model(data: bytes) -> ServiceModel:
    """Parse a model document into a fully linked ServiceModel.

    Reference checking is validate_model's job; this only enforces the file
    schema (types, required fields, unknown keys, URI syntax, one attachment
    per subject).
    """
    try:
        text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    except UnicodeDecodeError as exc:
        raise ModelSyntaxError(f"not UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(exc.msg, exc.lineno, exc.colno) from exc

    obj = _require_object(doc, "", _TOP_KEYS)
    version = _require_string(obj, "", "formatVersion")
    if version != FORMAT_VERSION:
        _fail("formatVersion", f"unrecognized version {version!r}, expected {FORMAT_VERSION!r}")

    externals = []
    for i, item in enumerate(_require_list(obj, "", "externalNamespaces")):
        epath = f"externalNamespaces[{i}]"
        eobj = _require_object(item, epath, ("namespace", "prefix"))
        namespace = _absolute_uri(eobj, epath, "namespace")
        prefix = eobj.get("prefix")
        if prefix is not None and (not isinstance(prefix, str) or not is_ncname(prefix)):
            _fail(f"{epath}.prefix", f"not an NCName: {prefix!r}")
        externals.append(ExternalNamespace(namespace, prefix))

    attachments = []
    seen_subjects: set[tuple[str, tuple[str, ...]]] = set()
    for i, item in enumerate(_require_list(obj, "", "attachments")):
        attachment = _attachment(item, f"attachments[{i}]")
        key = (attachment.subject.kind, attachment.subject.path)
        if key in seen_subjects:
            _fail(f"attachments[{i}]",
                  f"second attachment for subject {attachment.subject.path_string()!r}; "
                  "pre-merge policies instead")
        seen_subjects.add(key)
        attachments.append(attachment)

    return ServiceModel(
        model_name=_require_string(obj, "", "modelName"),
        target_namespace=_absolute_uri(obj, "", "targetNamespace"),
        domains=tuple(
            _domain(item, f"domains[{i}]")
            for i, item in enumerate(_require_list(obj, "", "domains"))
        ),
        interfaces=tuple(
            _interface(item, f"interfaces[{i}]")
            for i, item in enumerate(_require_list(obj, "", "interfaces"))
        ),
        bindings=tuple(
            _binding(item, f"bindings[{i}]")
            for i, item in enumerate(_require_list(obj, "", "bindings"))
        ),
        services=tuple(
            _service(item, f"services[{i}]")
            for i, item in enumerate(_require_list(obj, "", "services"))
        ),
        attachments=tuple(attachments),
        external_namespaces=tuple(externals),
    )


def _qname_json(qname: QName) -> dict:
    return {"namespace": qname.namespace, "local": qname.local}


def _annotation_json(annotation: SemanticAnnotation) -> dict:
    out: dict[str, Any] = {"modelReference": list(annotation.model_reference)}
    if annotation.lowering_schema is not None:
        out["loweringSchema"] = annotation.lowering_schema
    if annotation.lifting_schema is not None:
        out["liftingSchema"] = annotation.lifting_schema
    return out


def policy_expr_json(expr: PolicyExpr) -> dict:
    """Inverse of parse_policy_expr."""
    if isinstance(expr, Policy):
        return {"policy": [policy_expr_json(c) for c in expr.children]}
    if isinstance(expr, All):
        return {"all": [policy_expr_json(c) for c in expr.children]}
    if isinstance(expr, ExactlyOne):
        return {"exactlyOne": [policy_expr_json(c) for c in expr.children]}
    assert isinstance(expr, AssertionRef)
    body: dict[str, Any] = {"qname": _qname_json(expr.qname)}
    if expr.optional:
        body["optional"] = True
    if expr.parameters:
        body["parameters"] = [{"name": n, "value": v} for n, v in expr.parameters]
    if expr.nested is not None:
        body["nested"] = policy_expr_json(expr.nested)
    return {"assertion": body}


def _assertion_json(decl: AssertionDecl) -> dict:
    out: dict[str, Any] = {"name": decl.name, "typeKind": decl.type_kind}
    if decl.simple_type is not None:
        out["simpleType"] = _qname_json(decl.simple_type)
    if decl.attributes:
        attrs = []
        for attr in decl.attributes:
            aobj: dict[str, Any] = {"name": attr.name, "simpleType": _qname_json(attr.simple_type)}
            if attr.annotation is not None:
                aobj["annotation"] = _annotation_json(attr.annotation)
            attrs.append(aobj)
        out["attributes"] = attrs
    if decl.nestable_children:
        out["nestableChildren"] = list(decl.nestable_children)
    if decl.annotation is not None:
        out["annotation"] = _annotation_json(decl.annotation)
    return out


def serialize_model(model: ServiceModel) -> bytes:
    """Canonical document bytes; empty collections are omitted entirely."""
    doc: dict[str, Any] = {
        "formatVersion": FORMAT_VERSION,
        "modelName": model.model_name,
        "targetNamespace": model.target_namespace,
    }
    if model.external_namespaces:
        doc["externalNamespaces"] = [
            {"namespace": ext.namespace, **({"prefix": ext.prefix} if ext.prefix else {})}
            for ext in model.external_namespaces
        ]
    if model.domains:
        doc["domains"] = [
            {
                "name": d.domain_name,
                "targetNamespace": d.target_namespace,
                "prefix": d.prefix,
                "assertions": [_assertion_json(a) for a in d.assertions],
            }
            for d in model.domains
        ]
    if model.interfaces:
        doc["interfaces"] = [_interface_json(i) for i in model.interfaces]
    if model.bindings:
        doc["bindings"] = [
            {
                "name": b.name,
                "interface": b.interface_ref,
                "transportProtocol": b.transport_protocol,
                "messageEncoding": b.message_encoding,
            }
            for b in model.bindings
        ]
    if model.services:
        doc["services"] = [
            {
                "name": s.name,
                "interface": s.interface_ref,
                "endpoints": [
                    {"name": e.name, "binding": e.binding_ref, "address": e.address}
                    for e in s.endpoints
                ],
            }
            for s in model.services
        ]
    if model.attachments:
        doc["attachments"] = [
            {
                "subject": {"kind": a.subject.kind, "path": list(a.subject.path)},
                "policy": policy_expr_json(a.policy),
            }
            for a in model.attachments
        ]
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _interface_json(iface: InterfaceDecl) -> dict:
    out: dict[str, Any] = {"name": iface.name}
    if iface.operations:
        ops = []
        for op in iface.operations:
            oobj: dict[str, Any] = {"name": op.name}
            if op.inputs:
                oobj["inputs"] = [
                    {"name": m.name, "elementType": _qname_json(m.element_type)}
                    for m in op.inputs
                ]
            if op.outputs:
                oobj["outputs"] = [
                    {"name": m.name, "elementType": _qname_json(m.element_type)}
                    for m in op.outputs
                ]
            if op.fault_refs:
                oobj["faultRefs"] = list(op.fault_refs)
            ops.append(oobj)
        out["operations"] = ops
    if iface.faults:
        faults = []
        for fault in iface.faults:
            fobj: dict[str, Any] = {"name": fault.name}
            if fault.element_type is not None:
                fobj["elementType"] = _qname_json(fault.element_type)
            faults.append(fobj)
        out["faults"] = faults
    return out
