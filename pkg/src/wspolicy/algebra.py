"""WS-Policy operator trees, normal forms, and the intersection algebra.

A policy is a finite tree of operators over assertion references.  ``Policy``
and ``All`` mean "everything below applies together"; ``ExactlyOne`` offers a
choice.  Normalization rewrites any tree into the explicit
choice-of-conjunctions shape: a set of alternatives, each alternative a set of
assertion instances.  Intersection computes the alternatives two normalized
policies have in common, either by exact QName matching (strict) or by shared
semantic-concept URIs taken from the assertion vocabulary (semantic).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Mapping, Optional, Union

from .errors import OracleLimitError, VocabularyError
from .names import QName, normalize_uri

ParamValue = Union[str, int, float, bool]


def lexical_value(value: ParamValue) -> str:
    """XML lexical form of a parameter literal; also the normal-form key."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    return value


class PolicyExpr:
    """Base class for policy tree nodes."""

    __slots__ = ()


class _Operator(PolicyExpr):
    __slots__ = ("children",)

    def __init__(self, *children: PolicyExpr):
        for child in children:
            if not isinstance(child, PolicyExpr):
                raise TypeError(
                    f"operator child must be a PolicyExpr, got {type(child).__name__}"
                )
        self.children: tuple[PolicyExpr, ...] = tuple(children)

    def __eq__(self, other: object) -> bool:
        return type(self) is type(other) and self.children == other.children

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.children))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({', '.join(map(repr, self.children))})"


class Policy(_Operator):
    """Root wrapper node; same meaning as All, emitted as wsp:Policy."""


class All(_Operator):
    pass


class ExactlyOne(_Operator):
    pass


class AssertionRef(PolicyExpr):
    """Reference to one assertion, with optional flag, parameters and an
    optional nested policy tree."""

    __slots__ = ("qname", "optional", "parameters", "nested")

    def __init__(
        self,
        qname: QName,
        optional: bool = False,
        parameters: Iterable[tuple[str, ParamValue]] = (),
        nested: Optional[PolicyExpr] = None,
    ):
        self.qname = qname
        self.optional = bool(optional)
        self.parameters: tuple[tuple[str, ParamValue], ...] = tuple(
            (name, value) for name, value in parameters
        )
        self.nested = nested

    def _key(self):
        return (self.qname, self.optional, self.parameters, self.nested)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, AssertionRef) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        flags = []
        if self.optional:
            flags.append("optional=True")
        if self.parameters:
            flags.append(f"parameters={self.parameters!r}")
        if self.nested is not None:
            flags.append(f"nested={self.nested!r}")
        inner = ", ".join([str(self.qname)] + flags)
        return f"AssertionRef({inner})"


@dataclass(frozen=True)
class AssertionInstance:
    """One assertion occurrence inside an alternative.

    Parameter values are stored in lexical form and sorted by name so equal
    instances compare and hash equal regardless of construction order.
    """

    qname: QName
    parameters: tuple[tuple[str, str], ...] = ()
    nested: Optional["NormalForm"] = None

    def __post_init__(self):
        canon = tuple(
            sorted((name, lexical_value(value)) for name, value in self.parameters)
        )
        object.__setattr__(self, "parameters", canon)

    def sort_key(self):
        # The presence flag keeps the key injective: an absent nested policy
        # must not collide with a present-but-unsatisfiable one.
        nested_key = self.nested.sort_key() if self.nested is not None else ()
        return (
            self.qname.namespace,
            self.qname.local,
            self.parameters,
            self.nested is not None,
            nested_key,
        )


Alternative = tuple[AssertionInstance, ...]


@dataclass(frozen=True)
class NormalForm:
    """Canonical choice-of-conjunctions.

    Alternatives are kept as sorted tuples of unique instances, themselves
    sorted and de-duplicated, so structural equality is canonical equality.
    """

    alternatives: tuple[Alternative, ...] = ()

    def __post_init__(self):
        unique = {
            tuple(sorted(set(alt), key=AssertionInstance.sort_key))
            for alt in self.alternatives
        }
        object.__setattr__(
            self,
            "alternatives",
            tuple(sorted(unique, key=lambda alt: tuple(i.sort_key() for i in alt))),
        )

    @staticmethod
    def of(alternatives: Iterable[Iterable[AssertionInstance]]) -> "NormalForm":
        return NormalForm(tuple(tuple(alt) for alt in alternatives))

    def sort_key(self):
        return tuple(tuple(i.sort_key() for i in alt) for alt in self.alternatives)

    @property
    def satisfiable(self) -> bool:
        return bool(self.alternatives)


class MatchMode(Enum):
    STRICT = "strict"
    SEMANTIC = "semantic"


# An assertion vocabulary maps QName -> declaration; declarations only need an
# ``annotation`` attribute exposing ``model_reference`` (see model.AssertionDecl).
Vocabulary = Mapping[QName, Any]


def expand_optional(expr: PolicyExpr) -> PolicyExpr:
    """Rewrite away every optional flag.

    An optional reference becomes the two-way choice between an alternative
    containing it and an empty alternative; nested policies are rewritten too.
    """
    if isinstance(expr, AssertionRef):
        nested = expand_optional(expr.nested) if expr.nested is not None else None
        base = AssertionRef(expr.qname, optional=False, parameters=expr.parameters, nested=nested)
        if expr.optional:
            return ExactlyOne(All(base), All())
        return base
    ctor = type(expr)
    return ctor(*(expand_optional(child) for child in expr.children))


def _instance_of(ref: AssertionRef) -> AssertionInstance:
    nested = normalize(ref.nested) if ref.nested is not None else None
    return AssertionInstance(ref.qname, ref.parameters, nested)


def _distribute(expr: PolicyExpr) -> list[frozenset[AssertionInstance]]:
    if isinstance(expr, AssertionRef):
        return [frozenset({_instance_of(expr)})]
    if isinstance(expr, ExactlyOne):
        out: list[frozenset[AssertionInstance]] = []
        for child in expr.children:
            out.extend(_distribute(child))
        return out
    # Policy and All take the pairwise union over the children's alternatives.
    acc: list[frozenset[AssertionInstance]] = [frozenset()]
    for child in expr.children:
        child_alts = _distribute(child)
        acc = [a | b for a in acc for b in child_alts]
    return acc


def normalize(expr: PolicyExpr) -> NormalForm:
    """Reduce a policy tree to its canonical set of alternatives.

    ``All()`` contributes the single empty alternative, ``ExactlyOne()``
    contributes no alternative at all (the unsatisfiable policy).
    """
    return NormalForm.of(_distribute(expand_optional(expr)))


ORACLE_LIMIT = 16


def _count_refs(expr: PolicyExpr) -> int:
    if isinstance(expr, AssertionRef):
        return 1 + (_count_refs(expr.nested) if expr.nested is not None else 0)
    return sum(_count_refs(child) for child in expr.children)


def _enumerate(expr: PolicyExpr) -> list[list[AssertionInstance]]:
    if isinstance(expr, AssertionRef):
        nested = enumerate_alternatives_oracle(expr.nested) if expr.nested is not None else None
        instance = AssertionInstance(expr.qname, expr.parameters, nested)
        branches = [[instance]]
        if expr.optional:
            branches.append([])
        return branches
    if isinstance(expr, ExactlyOne):
        out: list[list[AssertionInstance]] = []
        for child in expr.children:
            out.extend(_enumerate(child))
        return out
    combos: list[list[AssertionInstance]] = [[]]
    for child in expr.children:
        child_alts = _enumerate(child)
        combos = [a + b for a in combos for b in child_alts]
    return combos


def enumerate_alternatives_oracle(expr: PolicyExpr) -> NormalForm:
    """Test-scale oracle: enumerate alternatives exhaustively, without the
    optional-flag rewrite or any other shortcut used by normalize.

    Refuses trees with more than ORACLE_LIMIT assertion references.
    """
    count = _count_refs(expr)
    if count > ORACLE_LIMIT:
        raise OracleLimitError(
            f"oracle limited to {ORACLE_LIMIT} assertion references, tree has {count}"
        )
    return NormalForm.of(_enumerate(expr))


def _model_reference_set(decl: Any) -> frozenset[str]:
    annotation = getattr(decl, "annotation", None)
    if annotation is None:
        return frozenset()
    return frozenset(normalize_uri(uri) for uri in annotation.model_reference)


def semantic_match_uris(
    a: QName, b: QName, vocab: Optional[Vocabulary]
) -> tuple[str, ...]:
    """Shared modelReference URIs (normalized, sorted) between two declared
    assertions; raises when either declaration is missing."""
    if vocab is None:
        raise VocabularyError("semantic matching requires an assertion vocabulary")
    for qname in (a, b):
        if qname not in vocab:
            raise VocabularyError(f"no declaration for assertion {qname}")
    return tuple(sorted(_model_reference_set(vocab[a]) & _model_reference_set(vocab[b])))


def assertions_compatible(
    a: AssertionInstance,
    b: AssertionInstance,
    mode: MatchMode = MatchMode.STRICT,
    vocab: Optional[Vocabulary] = None,
) -> bool:
    """Instance compatibility.

    Strict: equal QNames.  Semantic: equal QNames, or the two declarations
    share a modelReference URI (annotations are consulted only for distinct
    QNames).  Either way both must lack nested policies or their nested normal
    forms must intersect non-emptily; parameters never participate.
    """
    if a.qname != b.qname:
        if mode is MatchMode.STRICT:
            return False
        if not semantic_match_uris(a.qname, b.qname, vocab):
            return False
    if (a.nested is None) != (b.nested is None):
        return False
    if a.nested is not None and b.nested is not None:
        if not intersect(a.nested, b.nested, mode, vocab).satisfiable:
            return False
    return True


def alternatives_compatible(
    alt_a: Iterable[AssertionInstance],
    alt_b: Iterable[AssertionInstance],
    mode: MatchMode = MatchMode.STRICT,
    vocab: Optional[Vocabulary] = None,
) -> bool:
    """Every instance on each side must have a compatible partner on the other."""
    alt_a = tuple(alt_a)
    alt_b = tuple(alt_b)
    return all(
        any(assertions_compatible(a, b, mode, vocab) for b in alt_b) for a in alt_a
    ) and all(
        any(assertions_compatible(b, a, mode, vocab) for a in alt_a) for b in alt_b
    )


def intersect(
    p: NormalForm,
    q: NormalForm,
    mode: MatchMode = MatchMode.STRICT,
    vocab: Optional[Vocabulary] = None,
) -> NormalForm:
    """Alternatives acceptable to both policies.

    Each compatible pair of alternatives contributes their union, instances
    kept as-is; an empty result means the policies share no behavior.
    """
    found: list[Alternative] = []
    for alt_a in p.alternatives:
        for alt_b in q.alternatives:
            if alternatives_compatible(alt_a, alt_b, mode, vocab):
                found.append(alt_a + alt_b)
    return NormalForm.of(found)


def merge(p: PolicyExpr, q: PolicyExpr) -> PolicyExpr:
    """Conjunction of two policies; normalizes to the cross-product union."""
    return All(p, q)


def normal_forms_equal(p: NormalForm, q: NormalForm) -> bool:
    """Canonical equality, comparing nested normal forms recursively."""
    return p == q


def denormalize(nf: NormalForm) -> PolicyExpr:
    """Rebuild the explicit choice-of-conjunctions tree for a normal form."""

    def ref_of(instance: AssertionInstance) -> AssertionRef:
        nested = denormalize(instance.nested) if instance.nested is not None else None
        return AssertionRef(instance.qname, parameters=instance.parameters, nested=nested)

    return Policy(
        ExactlyOne(*(All(*(ref_of(i) for i in alt)) for alt in nf.alternatives))
    )
