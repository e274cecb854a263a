"""Dialogue data model: company profiles, scenarios, dialogue records.

All types are frozen dataclasses validated on construction, with
canonical-JSON round-tripping via ``to_dict`` / ``from_dict``. Canonical
here means: sorted keys, no insignificant whitespace, UTF-8.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import SchemaError

TECH_LEVELS = ("low", "medium", "high")
SPEAKERS = ("customer", "representative")
OUTCOMES = ("success", "failure")


def canonical_json(obj) -> str:
    """Deterministic JSON encoding: sorted keys, minimal separators."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _require_str(d: dict, key: str, ctx: str) -> str:
    v = d.get(key)
    if not isinstance(v, str) or not v:
        raise SchemaError(f"{ctx}: field '{key}' must be a non-empty string")
    return v


def _require_str_list(d: dict, key: str, ctx: str) -> list[str]:
    v = d.get(key)
    if not isinstance(v, list) or any(not isinstance(x, str) for x in v):
        raise SchemaError(f"{ctx}: field '{key}' must be a list of strings")
    return list(v)


@dataclass(frozen=True)
class CompanyProfile:
    """Business context that scenario and dialogue templates draw from."""

    company_id: str
    name: str
    sales_goals: str
    product_category: str
    target_audience: str
    product_keywords: tuple[str, ...] = ()

    def __post_init__(self):
        for f in ("company_id", "name", "sales_goals", "product_category", "target_audience"):
            if not getattr(self, f):
                raise SchemaError(f"CompanyProfile: field '{f}' must be non-empty")
        object.__setattr__(self, "product_keywords", tuple(self.product_keywords))

    def to_dict(self) -> dict:
        return {
            "company_id": self.company_id,
            "name": self.name,
            "sales_goals": self.sales_goals,
            "product_category": self.product_category,
            "target_audience": self.target_audience,
            "product_keywords": list(self.product_keywords),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CompanyProfile":
        if not isinstance(d, dict):
            raise SchemaError("CompanyProfile: expected a JSON object")
        ctx = "CompanyProfile"
        return cls(
            company_id=_require_str(d, "company_id", ctx),
            name=_require_str(d, "name", ctx),
            sales_goals=_require_str(d, "sales_goals", ctx),
            product_category=_require_str(d, "product_category", ctx),
            target_audience=_require_str(d, "target_audience", ctx),
            product_keywords=tuple(_require_str_list(d, "product_keywords", ctx))
            if "product_keywords" in d
            else (),
        )


@dataclass(frozen=True)
class Scenario:
    """Customer profile for one simulated conversation."""

    persona: str
    primary_concern: str
    technical_understanding: str
    motivation: str

    def __post_init__(self):
        for f in ("persona", "primary_concern", "motivation"):
            if not getattr(self, f):
                raise SchemaError(f"Scenario: field '{f}' must be non-empty")
        if self.technical_understanding not in TECH_LEVELS:
            raise SchemaError(
                f"Scenario: technical_understanding must be one of {TECH_LEVELS}, "
                f"got {self.technical_understanding!r}"
            )

    def to_dict(self) -> dict:
        return {
            "persona": self.persona,
            "primary_concern": self.primary_concern,
            "technical_understanding": self.technical_understanding,
            "motivation": self.motivation,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        if not isinstance(d, dict):
            raise SchemaError("Scenario: expected a JSON object")
        missing = {"persona", "primary_concern", "technical_understanding", "motivation"} - set(d)
        if missing:
            raise SchemaError(f"Scenario: missing fields {sorted(missing)}")
        ctx = "Scenario"
        return cls(
            persona=_require_str(d, "persona", ctx),
            primary_concern=_require_str(d, "primary_concern", ctx),
            technical_understanding=_require_str(d, "technical_understanding", ctx),
            motivation=_require_str(d, "motivation", ctx),
        )


@dataclass(frozen=True)
class DialogueTurn:
    speaker: str
    message: str

    def __post_init__(self):
        if self.speaker not in SPEAKERS:
            raise SchemaError(f"DialogueTurn: speaker must be one of {SPEAKERS}")
        if not self.message:
            raise SchemaError("DialogueTurn: message must be non-empty")

    def to_dict(self) -> dict:
        return {"speaker": self.speaker, "message": self.message}

    @classmethod
    def from_dict(cls, d: dict) -> "DialogueTurn":
        if not isinstance(d, dict):
            raise SchemaError("DialogueTurn: expected a JSON object")
        return cls(
            speaker=_require_str(d, "speaker", "DialogueTurn"),
            message=_require_str(d, "message", "DialogueTurn"),
        )


@dataclass(frozen=True)
class DialogueRecord:
    """One annotated synthetic conversation.

    Invariants: the conversation is non-empty, opens with the customer,
    and speakers strictly alternate.
    """

    record_id: str
    profile_ref: str
    scenario: Scenario
    conversation: tuple[DialogueTurn, ...]
    outcome: str
    key_points_discussed: tuple[str, ...] = ()
    value_propositions: tuple[str, ...] = ()
    objections_handled: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.record_id:
            raise SchemaError("DialogueRecord: record_id must be non-empty")
        if not self.profile_ref:
            raise SchemaError("DialogueRecord: profile_ref must be non-empty")
        object.__setattr__(self, "conversation", tuple(self.conversation))
        if not self.conversation:
            raise SchemaError("DialogueRecord: conversation must be non-empty")
        if self.conversation[0].speaker != "customer":
            raise SchemaError("DialogueRecord: first turn speaker must be 'customer'")
        for i in range(1, len(self.conversation)):
            if self.conversation[i].speaker == self.conversation[i - 1].speaker:
                raise SchemaError(
                    f"DialogueRecord: speakers must strictly alternate (turn {i})"
                )
        if self.outcome not in OUTCOMES:
            raise SchemaError(f"DialogueRecord: outcome must be one of {OUTCOMES}")
        for f in ("key_points_discussed", "value_propositions", "objections_handled"):
            object.__setattr__(self, f, tuple(getattr(self, f)))

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "profile_ref": self.profile_ref,
            "scenario": self.scenario.to_dict(),
            "conversation": [t.to_dict() for t in self.conversation],
            "outcome": self.outcome,
            "key_points_discussed": list(self.key_points_discussed),
            "value_propositions": list(self.value_propositions),
            "objections_handled": list(self.objections_handled),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DialogueRecord":
        if not isinstance(d, dict):
            raise SchemaError("DialogueRecord: expected a JSON object")
        ctx = "DialogueRecord"
        conv = d.get("conversation")
        if not isinstance(conv, list):
            raise SchemaError(f"{ctx}: field 'conversation' must be a list")
        return cls(
            record_id=_require_str(d, "record_id", ctx),
            profile_ref=_require_str(d, "profile_ref", ctx),
            scenario=Scenario.from_dict(d.get("scenario")),
            conversation=tuple(DialogueTurn.from_dict(t) for t in conv),
            outcome=_require_str(d, "outcome", ctx),
            key_points_discussed=tuple(_require_str_list(d, "key_points_discussed", ctx))
            if "key_points_discussed" in d
            else (),
            value_propositions=tuple(_require_str_list(d, "value_propositions", ctx))
            if "value_propositions" in d
            else (),
            objections_handled=tuple(_require_str_list(d, "objections_handled", ctx))
            if "objections_handled" in d
            else (),
        )


@dataclass
class DialogueDataset:
    """Records plus their derived embeddings (parallel lists)."""

    records: list[DialogueRecord]
    embeddings: list  # list[np.ndarray], parallel to records
    embed_dim: int

    def __post_init__(self):
        if self.embed_dim < 1:
            raise SchemaError("DialogueDataset: embed_dim must be >= 1")
        if len(self.records) != len(self.embeddings):
            raise SchemaError("DialogueDataset: records and embeddings lengths differ")

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class TextProviderSpec:
    """Which text generator to use.

    kind 'builtin_template' is the offline seeded template engine; kind
    'http_chat' talks to an OpenAI-style chat-completions endpoint.
    """

    kind: str
    endpoint: str | None = None
    model_name: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("builtin_template", "http_chat"):
            raise SchemaError(
                f"TextProviderSpec: kind must be builtin_template or http_chat, got {self.kind!r}"
            )

    @property
    def is_builtin(self) -> bool:
        return self.kind == "builtin_template"
