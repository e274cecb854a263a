"""Live-chat response selection.

Builds the chat observation, asks the text provider for k candidate
replies at staggered temperatures, scores each candidate's lexical
feature vector against the policy's action, and returns the argmax.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .embedding import embed_text, tokenize
from .env import ActionVector, HistoryStats, update_history
from .errors import EmptyMessage, PartialCandidates, ProviderUnavailable, SchemaError
from .nets import predict
from .providers import generate_candidate_texts
from .schemas import CompanyProfile, DialogueTurn, TextProviderSpec

DEFAULT_TEMPERATURES = (0.3, 0.7, 1.0, 1.3)
DEFAULT_CONTEXT_TURNS = 6

_LEXICON_FILES = {
    "engagement": "lexicon_engagement.txt",
    "value": "lexicon_value.txt",
    "technical": "lexicon_technical.txt",
    "closing": "lexicon_closing.txt",
}


def _read_lexicon_text(text: str) -> frozenset[str]:
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        words.add(line.lower())
    return frozenset(words)


@dataclass(frozen=True)
class Lexicons:
    """Keyword sets behind the four feature dimensions. One word per line
    in the source files; '#' starts a comment."""

    engagement: frozenset[str]
    value: frozenset[str]
    technical: frozenset[str]
    closing: frozenset[str]

    @classmethod
    def defaults(cls) -> "Lexicons":
        kwargs = {}
        for name, filename in _LEXICON_FILES.items():
            text = (
                resources.files("clca.assets").joinpath(filename).read_text("utf-8")
            )
            kwargs[name] = _read_lexicon_text(text)
        return cls(**kwargs)

    @classmethod
    def from_files(cls, paths: dict[str, str]) -> "Lexicons":
        missing = set(_LEXICON_FILES) - set(paths)
        if missing:
            raise SchemaError(f"lexicon paths missing {sorted(missing)}")
        kwargs = {}
        for name in _LEXICON_FILES:
            with open(paths[name], "r", encoding="utf-8") as fh:
                kwargs[name] = _read_lexicon_text(fh.read())
        return cls(**kwargs)

    def with_product_keywords(self, profile: CompanyProfile) -> "Lexicons":
        extra = set()
        for keyword in profile.product_keywords:
            extra.update(tokenize(keyword))
        if not extra:
            return self
        return replace(self, technical=self.technical | extra)


@dataclass(frozen=True)
class ChatState:
    """One session's conversational state: the transcript so far, the
    running mean of actions predicted in this session, and the company
    profile steering candidate generation."""

    history: tuple[DialogueTurn, ...] = ()
    session_history_stats: HistoryStats = HistoryStats.neutral()
    profile: CompanyProfile | None = None


@dataclass(frozen=True)
class CandidateResponse:
    text: str
    temperature: float
    index: int

    def __post_init__(self):
        if not self.text:
            raise SchemaError("CandidateResponse: text must be non-empty")
        if self.temperature <= 0:
            raise SchemaError("CandidateResponse: temperature must be > 0")


@dataclass(frozen=True)
class FeatureVector:
    engagement: float
    value_proposition: float
    technical_detail: float
    closing: float

    def __post_init__(self):
        for v in self.as_tuple():
            if not 0.0 <= v <= 1.0:
                raise SchemaError("FeatureVector components must be in [0, 1]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (
            self.engagement,
            self.value_proposition,
            self.technical_detail,
            self.closing,
        )

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple())


@dataclass(frozen=True)
class ScoredCandidate:
    candidate: CandidateResponse
    features: FeatureVector
    score: float


@dataclass(frozen=True)
class SelectionConfig:
    k: int = 4
    temperatures: tuple[float, ...] = DEFAULT_TEMPERATURES
    context_turns: int = DEFAULT_CONTEXT_TURNS
    lexicons: Lexicons | None = None

    def __post_init__(self):
        if len(self.temperatures) != self.k:
            raise SchemaError("SelectionConfig: temperatures length must equal k")
        if self.k < 1:
            raise SchemaError("SelectionConfig: k must be >= 1")
        if self.context_turns < 1:
            raise SchemaError("SelectionConfig: context_turns must be >= 1")

    def resolved_lexicons(self) -> Lexicons:
        return self.lexicons if self.lexicons is not None else Lexicons.defaults()


def build_state(chat: ChatState, user_msg: str, embed_dim: int, context_turns: int = DEFAULT_CONTEXT_TURNS) -> np.ndarray:
    """Observation for the incoming message: embedding of the recent
    context plus the new customer line, followed by this session's
    action-history stats."""
    if not user_msg or not user_msg.strip():
        raise EmptyMessage("user message is empty")
    recent = chat.history[-context_turns:] if context_turns else ()
    pieces = [f"{t.speaker}: {t.message}" for t in recent]
    pieces.append(f"customer: {user_msg}")
    embedding = embed_text(" ".join(pieces), embed_dim)
    return np.concatenate([embedding, np.array(chat.session_history_stats.values)])


def generate_candidates(
    provider: TextProviderSpec,
    chat: ChatState,
    user_msg: str,
    config: SelectionConfig,
    seed: int,
) -> list[CandidateResponse]:
    """Exactly k candidates, one per configured temperature.

    If some provider calls fail, raises PartialCandidates carrying the
    survivors (still tagged with their original slots); if all fail,
    ProviderUnavailable.
    """
    outcomes = generate_candidate_texts(
        provider,
        list(chat.history),
        user_msg,
        chat.profile,
        list(config.temperatures),
        seed,
    )
    candidates: list[CandidateResponse] = []
    failures: list[Exception] = []
    for i, out in enumerate(outcomes):
        if isinstance(out, Exception):
            failures.append(out)
        else:
            candidates.append(
                CandidateResponse(text=out, temperature=config.temperatures[i], index=i)
            )
    if not candidates:
        detail = "; ".join(str(f) for f in failures) or "no candidates produced"
        raise ProviderUnavailable(f"all {config.k} candidate calls failed: {detail}")
    if failures:
        raise PartialCandidates(candidates, failures)
    return candidates


def extract_features(text: str, lexicons: Lexicons) -> FeatureVector:
    """Lexical proxies for the four action metrics, each capped at 1.

    Matching is case-insensitive on word boundaries; question marks are
    counted as raw characters; numeric tokens count toward the technical
    dimension.
    """
    tokens = tokenize(text)
    engagement_hits = text.count("?") + sum(1 for t in tokens if t in lexicons.engagement)
    value_hits = sum(1 for t in tokens if t in lexicons.value)
    numeric = sum(1 for t in tokens if t.isdigit())
    technical_hits = numeric + sum(1 for t in tokens if t in lexicons.technical)
    closing_hits = sum(1 for t in tokens if t in lexicons.closing)
    return FeatureVector(
        engagement=min(1.0, engagement_hits / 5),
        value_proposition=min(1.0, value_hits / 4),
        technical_detail=min(1.0, technical_hits / 5),
        closing=min(1.0, closing_hits / 2),
    )


def score(features: FeatureVector, action: ActionVector) -> float:
    """Negative Euclidean distance between the candidate's features and
    the policy's action; 0 is a perfect match."""
    diff = features.as_array() - action.as_array()
    return float(-np.sqrt(np.sum(diff * diff)))


@dataclass(frozen=True)
class SelectionResult:
    response: str
    action: ActionVector
    scored: tuple[ScoredCandidate, ...]
    selected_index: int
    chat: ChatState


def select_response(
    chat: ChatState,
    user_msg: str,
    model,
    provider: TextProviderSpec,
    config: SelectionConfig,
    seed: int,
) -> SelectionResult:
    """One full exchange: observe, predict the action deterministically,
    generate and score candidates, pick the argmax (lowest index on
    ties), and fold both turns plus the predicted action into the chat
    state."""
    obs = build_state(chat, user_msg, model.embed_dim, config.context_turns)
    action_arr = predict(model.params, obs, deterministic=True)
    action = ActionVector.from_values(action_arr)

    try:
        candidates = generate_candidates(provider, chat, user_msg, config, seed)
    except PartialCandidates as exc:
        candidates = exc.candidates

    lexicons = config.resolved_lexicons()
    if chat.profile is not None:
        lexicons = lexicons.with_product_keywords(chat.profile)

    scored = []
    for c in candidates:
        features = extract_features(c.text, lexicons)
        scored.append(ScoredCandidate(c, features, score(features, action)))
    scored = tuple(scored)
    best = 0
    for i in range(1, len(scored)):
        if scored[i].score > scored[best].score:
            best = i

    new_history = chat.history + (
        DialogueTurn(speaker="customer", message=user_msg),
        DialogueTurn(speaker="representative", message=scored[best].candidate.text),
    )
    new_stats = update_history(chat.session_history_stats, action.as_array())
    new_chat = ChatState(
        history=new_history,
        session_history_stats=new_stats,
        profile=chat.profile,
    )
    return SelectionResult(
        response=scored[best].candidate.text,
        action=action,
        scored=scored,
        selected_index=best,
        chat=new_chat,
    )
