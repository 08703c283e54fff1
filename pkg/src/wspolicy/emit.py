"""Transformation rules: service models to WSDL 2.0 documents with embedded
policies, and non-functional domains to SAWSDL-annotated XSD files.

All emission is deterministic.  Two pieces of tool metadata ride along in
standard xs:appinfo slots so emitted schemas parse back losslessly: the domain
name and, per complex assertion, the list of assertions admissible inside its
nested policy (the lax wildcard slot cannot express that list).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .algebra import (
    All,
    AssertionRef,
    ExactlyOne,
    Policy,
    PolicyExpr,
    lexical_value,
    normalize,
)
from .errors import GenerationError
from .model import (
    AssertionDecl,
    DomainSchema,
    ServiceModel,
    assertion_vocabulary,
    validate_domain,
    validate_model,
)
from .names import (
    MEP_IN_ONLY,
    MEP_IN_OUT,
    MEP_OUT_ONLY,
    QName,
    SAWSDL_NS,
    WSDL_NS,
    WSP_NS,
    XS_NS,
    is_ncname,
)
from .xmltree import XmlDocument, XmlElement

DOMAIN_NAME_APPINFO = "urn:x-wspolicy:domain-name"
NESTABLE_APPINFO = "urn:x-wspolicy:nestable-assertions"

_BUILTIN_PREFIXES = {WSDL_NS: "wsdl", XS_NS: "xs", WSP_NS: "wsp", SAWSDL_NS: "sawsdl"}


@dataclass(frozen=True)
class EmitOptions:
    """Knobs for file naming and prefix assignment; indentation is fixed."""

    xsd_file_name_pattern: str = "ws-semantic{domain}policy.xsd"
    prefix_table: Mapping[str, str] = field(default_factory=dict)  # URI -> prefix

    def __post_init__(self):
        seen: set[str] = set()
        for uri, prefix in self.prefix_table.items():
            if not is_ncname(prefix):
                raise ValueError(f"prefix for {uri!r} is not an NCName: {prefix!r}")
            if prefix in seen:
                raise ValueError(f"prefix {prefix!r} assigned to more than one namespace")
            seen.add(prefix)

    def xsd_file_name(self, domain: DomainSchema) -> str:
        return self.xsd_file_name_pattern.format(domain=domain.domain_name)


DEFAULT_OPTIONS = EmitOptions()


def _assign_prefixes(
    uris: Iterable[str], preferred: Mapping[str, str]
) -> dict[str, str]:
    """Deterministic prefix -> URI table covering every given namespace."""
    table: dict[str, str] = {}
    taken: set[str] = set()
    for uri in sorted(set(uris)):
        want = preferred.get(uri) or "ns"
        candidate = want
        counter = 0
        while candidate in taken:
            counter += 1
            candidate = f"{want}{counter}"
        table[candidate] = uri
        taken.add(candidate)
    return table


def _preferred_prefixes(model: Optional[ServiceModel], options: EmitOptions) -> dict[str, str]:
    preferred = dict(_BUILTIN_PREFIXES)
    if model is not None:
        preferred[model.target_namespace] = "tns"
        for domain in model.domains:
            preferred.setdefault(domain.target_namespace, domain.prefix)
        for i, ext in enumerate(model.external_namespaces):
            preferred.setdefault(ext.namespace, ext.prefix or f"ns{i}")
    preferred.update(options.prefix_table)
    return preferred


def _el(name: QName, attrs=(), children=()) -> XmlElement:
    return XmlElement(name, attrs, children)


def _xs(local: str) -> QName:
    return QName(XS_NS, local)


def _wsdl(local: str) -> QName:
    return QName(WSDL_NS, local)


def _appinfo(source: str, text: str) -> XmlElement:
    return _el(_xs("annotation"), (), [_el(_xs("appinfo"), [(QName("", "source"), source)], [text])])


def _sawsdl_attrs(decl) -> list[tuple[QName, str]]:
    annotation = decl.annotation
    if annotation is None:
        return []
    attrs = [(QName(SAWSDL_NS, "modelReference"), " ".join(annotation.model_reference))]
    if annotation.lifting_schema is not None:
        attrs.append((QName(SAWSDL_NS, "liftingSchemaMapping"), annotation.lifting_schema))
    if annotation.lowering_schema is not None:
        attrs.append((QName(SAWSDL_NS, "loweringSchemaMapping"), annotation.lowering_schema))
    return attrs


def _assertion_element(decl: AssertionDecl, qname_str) -> XmlElement:
    attrs: list[tuple[QName, str]] = [(QName("", "name"), decl.name)]
    attrs.extend(_sawsdl_attrs(decl))
    children: list[XmlElement] = []
    if decl.type_kind == "simple":
        attrs.append((QName("", "type"), qname_str(decl.simple_type)))
    elif decl.type_kind == "empty":
        children.append(_el(_xs("complexType")))
    else:
        if decl.nestable_children:
            children.append(_appinfo(NESTABLE_APPINFO, " ".join(decl.nestable_children)))
        content: list[XmlElement] = []
        if decl.nestable_children:
            wildcard = _el(
                _xs("any"),
                [
                    (QName("", "minOccurs"), "0"),
                    (QName("", "namespace"), "##other"),
                    (QName("", "processContents"), "lax"),
                ],
            )
            content.append(_el(_xs("sequence"), (), [wildcard]))
        for attr_decl in decl.attributes:
            xs_attr = _el(
                _xs("attribute"),
                [
                    (QName("", "name"), attr_decl.name),
                    (QName("", "type"), qname_str(attr_decl.simple_type)),
                ]
                + _sawsdl_attrs(attr_decl),
            )
            content.append(xs_attr)
        children.append(_el(_xs("complexType"), (), content))
    return _el(_xs("element"), attrs, children)


def emit_domain_xsd(domain: DomainSchema, options: EmitOptions = DEFAULT_OPTIONS) -> XmlDocument:
    """One xs:schema per domain: a top-level element per assertion, each
    carrying its SAWSDL annotation attributes."""
    problems = [d for d in validate_domain(domain) if d.severity == "error"]
    if problems:
        raise GenerationError(
            f"domain {domain.domain_name!r} failed validation: {problems[0]}"
        )

    used = {XS_NS, SAWSDL_NS, domain.target_namespace}
    for decl in domain.assertions:
        if decl.simple_type is not None:
            used.add(decl.simple_type.namespace)
        for attr_decl in decl.attributes:
            used.add(attr_decl.simple_type.namespace)
    used.discard("")
    preferred = dict(_BUILTIN_PREFIXES)
    preferred[domain.target_namespace] = domain.prefix
    preferred.update(options.prefix_table)
    namespaces = _assign_prefixes(used, preferred)
    uri_to_prefix = {uri: prefix for prefix, uri in namespaces.items()}

    def qname_str(qname: QName) -> str:
        if not qname.namespace:
            return qname.local
        return f"{uri_to_prefix[qname.namespace]}:{qname.local}"

    children: list[XmlElement] = [_appinfo(DOMAIN_NAME_APPINFO, domain.domain_name)]
    for decl in domain.assertions:
        children.append(_assertion_element(decl, qname_str))
    root = _el(
        _xs("schema"),
        [
            (QName("", "elementFormDefault"), "qualified"),
            (QName("", "targetNamespace"), domain.target_namespace),
        ],
        children,
    )
    return XmlDocument(root, namespaces)


def policy_namespaces(expr: PolicyExpr) -> set[str]:
    """Namespaces referenced anywhere in a policy tree, nested policies included."""
    out: set[str] = {WSP_NS}
    def walk(node: PolicyExpr):
        if isinstance(node, AssertionRef):
            out.add(node.qname.namespace)
            if node.nested is not None:
                walk(node.nested)
        else:
            for child in node.children:
                walk(child)
    walk(expr)
    out.discard("")
    return out


def policy_qnames(expr: PolicyExpr) -> set[QName]:
    out: set[QName] = set()
    def walk(node: PolicyExpr):
        if isinstance(node, AssertionRef):
            out.add(node.qname)
            if node.nested is not None:
                walk(node.nested)
        else:
            for child in node.children:
                walk(child)
    walk(expr)
    return out


def emit_policy_element(expr: PolicyExpr) -> XmlElement:
    """The wsp:Policy fragment for a policy tree, emitted verbatim.

    Operators map to wsp:Policy / wsp:All / wsp:ExactlyOne, references map to
    elements in their own namespace with parameters as attributes; optional
    flags become wsp:Optional="true" rather than being pre-expanded.
    """
    if not normalize(expr).satisfiable:
        raise GenerationError("refusing to emit an unsatisfiable policy (no alternatives)")
    if not isinstance(expr, Policy):
        expr = Policy(expr)
    return _policy_node(expr)


def _policy_node(expr: PolicyExpr) -> XmlElement:
    if isinstance(expr, AssertionRef):
        attrs: list[tuple[QName, str]] = [
            (QName("", name), lexical_value(value)) for name, value in expr.parameters
        ]
        if expr.optional:
            attrs.append((QName(WSP_NS, "Optional"), "true"))
        children = []
        if expr.nested is not None:
            nested = expr.nested if isinstance(expr.nested, Policy) else Policy(expr.nested)
            children.append(_policy_node(nested))
        return _el(expr.qname, attrs, children)
    local = {Policy: "Policy", All: "All", ExactlyOne: "ExactlyOne"}[type(expr)]
    return _el(QName(WSP_NS, local), (), [_policy_node(child) for child in expr.children])


def policy_document(
    expr: PolicyExpr,
    options: EmitOptions = DEFAULT_OPTIONS,
    prefix_hints: Optional[Mapping[str, str]] = None,
) -> XmlDocument:
    """A standalone document wrapping emit_policy_element's fragment."""
    preferred = dict(_BUILTIN_PREFIXES)
    if prefix_hints:
        preferred.update(prefix_hints)
    preferred.update(options.prefix_table)
    root = emit_policy_element(expr)
    return XmlDocument(root, _assign_prefixes(policy_namespaces(expr), preferred))


def _mep_for(op) -> str:
    if op.inputs and not op.outputs:
        return MEP_IN_ONLY
    if op.outputs and not op.inputs:
        return MEP_OUT_ONLY
    return MEP_IN_OUT


def emit_wsdl(
    model: ServiceModel, options: EmitOptions = DEFAULT_OPTIONS
) -> list[tuple[str, XmlDocument]]:
    """The full file set for a model: one WSDL document plus one XSD per domain.

    The WSDL imports exactly the domains whose assertions appear in attached
    policies; each attachment is embedded as the first wsp:Policy child of its
    subject element.
    """
    problems = [d for d in validate_model(model) if d.severity == "error"]
    if problems:
        raise GenerationError(f"model failed validation: {problems[0]}")
    vocab = assertion_vocabulary(model)

    used_namespaces: set[str] = set()
    for attachment in model.attachments:
        for qname in policy_qnames(attachment.policy):
            if qname not in vocab:
                raise GenerationError(
                    f"policy on {attachment.subject.path_string()} references an "
                    f"assertion declared in no domain: {qname}"
                )
        if not normalize(attachment.policy).satisfiable:
            raise GenerationError(
                f"policy on {attachment.subject.path_string()} is unsatisfiable "
                "(zero alternatives); refusing to emit"
            )
        used_namespaces.update(policy_namespaces(attachment.policy) - {WSP_NS})

    imported = [d for d in model.domains if d.target_namespace in used_namespaces]

    declared = {WSDL_NS, XS_NS, SAWSDL_NS, WSP_NS, model.target_namespace}
    declared.update(d.target_namespace for d in imported)
    for iface in model.interfaces:
        for fault in iface.faults:
            if fault.element_type is not None and fault.element_type.namespace:
                declared.add(fault.element_type.namespace)
        for op in iface.operations:
            for ref in op.inputs + op.outputs:
                if ref.element_type.namespace:
                    declared.add(ref.element_type.namespace)

    namespaces = _assign_prefixes(declared, _preferred_prefixes(model, options))
    uri_to_prefix = {uri: prefix for prefix, uri in namespaces.items()}

    def qname_str(qname: QName) -> str:
        if not qname.namespace:
            return qname.local
        return f"{uri_to_prefix[qname.namespace]}:{qname.local}"

    attached: dict[tuple[str, tuple[str, ...]], PolicyExpr] = {
        (a.subject.kind, a.subject.path): a.policy for a in model.attachments
    }

    def policy_child(kind: str, *path: str) -> list[XmlElement]:
        policy = attached.get((kind, tuple(path)))
        return [emit_policy_element(policy)] if policy is not None else []

    children: list[XmlElement] = []
    if imported:
        imports = [
            _el(
                _xs("import"),
                [
                    (QName("", "namespace"), d.target_namespace),
                    (QName("", "schemaLocation"), options.xsd_file_name(d)),
                ],
            )
            for d in imported
        ]
        children.append(_el(_wsdl("types"), (), imports))

    for iface in model.interfaces:
        iface_children = policy_child("interface", iface.name)
        for fault in iface.faults:
            attrs = [(QName("", "name"), fault.name)]
            if fault.element_type is not None:
                attrs.append((QName("", "element"), qname_str(fault.element_type)))
            iface_children.append(_el(_wsdl("fault"), attrs))
        for op in iface.operations:
            op_children = policy_child("operation", iface.name, op.name)
            for role, refs in (("input", op.inputs), ("output", op.outputs)):
                for ref in refs:
                    op_children.append(
                        _el(
                            _wsdl(role),
                            [
                                (QName("", "element"), qname_str(ref.element_type)),
                                (QName("", "messageLabel"), ref.name),
                            ],
                        )
                    )
            for fault_ref in op.fault_refs:
                op_children.append(_el(_wsdl("outfault"), [(QName("", "ref"), fault_ref)]))
            iface_children.append(
                _el(
                    _wsdl("operation"),
                    [(QName("", "name"), op.name), (QName("", "pattern"), _mep_for(op))],
                    op_children,
                )
            )
        children.append(_el(_wsdl("interface"), [(QName("", "name"), iface.name)], iface_children))

    for binding in model.bindings:
        children.append(
            _el(
                _wsdl("binding"),
                [
                    (QName("", "interface"), binding.interface_ref),
                    (QName("", "name"), binding.name),
                    (QName("", "type"), binding.transport_protocol),
                ],
                policy_child("binding", binding.name),
            )
        )

    for service in model.services:
        service_children = policy_child("service", service.name)
        for ep in service.endpoints:
            service_children.append(
                _el(
                    _wsdl("endpoint"),
                    [
                        (QName("", "address"), ep.address),
                        (QName("", "binding"), ep.binding_ref),
                        (QName("", "name"), ep.name),
                    ],
                    policy_child("endpoint", service.name, ep.name),
                )
            )
        children.append(
            _el(
                _wsdl("service"),
                [(QName("", "interface"), service.interface_ref), (QName("", "name"), service.name)],
                service_children,
            )
        )

    root = _el(
        _wsdl("description"),
        [(QName("", "targetNamespace"), model.target_namespace)],
        children,
    )
    files: list[tuple[str, XmlDocument]] = [
        (f"{model.model_name}.wsdl", XmlDocument(root, namespaces))
    ]
    for domain in model.domains:
        files.append((options.xsd_file_name(domain), emit_domain_xsd(domain, options)))
    return files
