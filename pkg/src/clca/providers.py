"""Text generation providers.

Two interchangeable backends produce scenarios, dialogues, and chat
candidate responses:

* ``builtin_template`` - a seeded template-filling engine over the table
  file shipped in ``assets/templates.json``. Pure function of its inputs,
  bit-reproducible everywhere.
* ``http_chat`` - an OpenAI-style chat-completions endpoint. Used when
  real generated text is wanted; never required by tests.
"""

from __future__ import annotations

import json
import os
from functools import lru_cache
from importlib import resources

import requests

from .errors import MalformedProviderOutput, ProviderUnavailable, SchemaError
from .rng import Xoshiro256StarStar
from .schemas import (
    TECH_LEVELS,
    CompanyProfile,
    DialogueRecord,
    DialogueTurn,
    Scenario,
    TextProviderSpec,
)

ENV_BASE_URL = "CLCA_LLM_BASE_URL"
ENV_API_KEY = "CLCA_LLM_API_KEY"
HTTP_TIMEOUT_S = 30.0


@lru_cache(maxsize=1)
def load_templates() -> dict:
    text = resources.files("clca.assets").joinpath("templates.json").read_text("utf-8")
    return json.loads(text)


def _subs(profile: CompanyProfile, scenario: Scenario | None = None, **extra) -> dict:
    keyword = profile.product_keywords[0] if profile.product_keywords else profile.product_category
    m = {
        "company": profile.name,
        "category": profile.product_category,
        "audience": profile.target_audience,
        "goals": profile.sales_goals,
        "keyword": keyword,
    }
    if scenario is not None:
        m.update(
            persona=scenario.persona,
            concern=scenario.primary_concern,
            motivation=scenario.motivation,
        )
    m.update(extra)
    return m


# ---------------------------------------------------------------------------
# Scenario generation


def generate_scenario(
    profile: CompanyProfile, provider: TextProviderSpec, seed: int
) -> Scenario:
    if provider.is_builtin:
        return _builtin_scenario(profile, seed)
    return _http_scenario(profile, provider, seed)


def builtin_scenario_rows(seed: int) -> tuple[int, int, int, int]:
    """Row indices the builtin engine picks for a seed, in draw order:
    (persona, concern, technical level, motivation)."""
    t = load_templates()
    rng = Xoshiro256StarStar(seed)
    return (
        rng.randrange(len(t["personas"])),
        rng.randrange(len(t["concerns"])),
        rng.randrange(len(TECH_LEVELS)),
        rng.randrange(len(t["motivations"])),
    )


def _builtin_scenario(profile: CompanyProfile, seed: int) -> Scenario:
    t = load_templates()
    p_idx, c_idx, tech_idx, m_idx = builtin_scenario_rows(seed)
    subs = _subs(profile)
    return Scenario(
        persona=t["personas"][p_idx].format_map(subs),
        primary_concern=t["concerns"][c_idx],
        technical_understanding=TECH_LEVELS[tech_idx],
        motivation=t["motivations"][m_idx],
    )


def _http_scenario(profile: CompanyProfile, provider: TextProviderSpec, seed: int) -> Scenario:
    messages = [
        {
            "role": "system",
            "content": (
                "You create customer scenarios for sales training. Reply with a "
                "single JSON object with exactly these string fields: persona, "
                "primary_concern, technical_understanding (low|medium|high), "
                "motivation. No other fields, no prose."
            ),
        },
        {
            "role": "user",
            "content": f"Company profile (seed {seed}): "
            + json.dumps(profile.to_dict(), sort_keys=True),
        },
    ]
    content = chat_completion(provider, messages, temperature=0.7)
    obj = _parse_json_object(content)
    expected = {"persona", "primary_concern", "technical_understanding", "motivation"}
    if set(obj) != expected:
        raise MalformedProviderOutput(
            f"scenario object must have exactly fields {sorted(expected)}, "
            f"got {sorted(obj)}",
            raw_text=content,
        )
    try:
        return Scenario.from_dict(obj)
    except SchemaError as exc:
        raise MalformedProviderOutput(str(exc), raw_text=content) from exc


# ---------------------------------------------------------------------------
# Dialogue generation


def generate_dialogue(
    profile: CompanyProfile,
    scenario: Scenario,
    provider: TextProviderSpec,
    seed: int,
    p_success: float = 0.5,
) -> DialogueRecord:
    if provider.is_builtin:
        return _builtin_dialogue(profile, scenario, seed, p_success)
    return _http_dialogue(profile, scenario, provider, seed)


def builtin_dialogue_draws(seed: int, p_success: float = 0.5) -> dict:
    """Replay the builtin engine's seeded draws without composing text.

    Draw order is part of the determinism contract: outcome first, then
    turn count, then one row index per template table in the order below.
    """
    t = load_templates()
    rng = Xoshiro256StarStar(seed)
    return {
        "outcome": "success" if rng.bernoulli(p_success) else "failure",
        "n_turns": 4 + rng.randrange(7),
        "opener": rng.randrange(len(t["customer_openers"])),
        "pitch": rng.randrange(len(t["rep_value_pitches"])),
        "key_point": rng.randrange(len(t["key_points"])),
        "value_prop": rng.randrange(len(t["value_props"])),
        "value_question": rng.randrange(len(t["customer_value_questions"])),
        "tech": rng.randrange(len(t["rep_tech_answers"])),
        "objection": rng.randrange(len(t["objections"])),
        "handling": rng.randrange(len(t["rep_objection_handling"])),
        "close": rng.randrange(len(t["rep_closes"])),
        "closing_reply": rng.randrange(len(t["customer_closing_replies"])),
    }


def _builtin_dialogue(
    profile: CompanyProfile, scenario: Scenario, seed: int, p_success: float
) -> DialogueRecord:
    t = load_templates()
    d = builtin_dialogue_draws(seed, p_success)
    keyword = profile.product_keywords[0] if profile.product_keywords else profile.product_category
    key_point = t["key_points"][d["key_point"]]
    value_prop = t["value_props"][d["value_prop"]]
    objection = t["objections"][d["objection"]]
    subs = _subs(
        profile,
        scenario,
        key_point=key_point,
        value_prop=value_prop,
        objection=objection,
    )

    def customer_line(i: int) -> str:
        if i == 0:
            return t["customer_openers"][d["opener"]].format_map(subs)
        if i == 1:
            return t["customer_value_questions"][d["value_question"]].format_map(subs)
        if i == 2:
            return f"I have to be honest: {objection}."
        rows = t["customer_closing_replies"]
        return rows[(d["closing_reply"] + i - 3) % len(rows)]

    def rep_line(j: int) -> str:
        if j == 0:
            return t["rep_value_pitches"][d["pitch"]].format_map(subs)
        if j == 1:
            return t["rep_tech_answers"][d["tech"]].format_map(subs)
        if j == 2:
            return t["rep_objection_handling"][d["handling"]].format_map(subs)
        rows = t["rep_closes"]
        return rows[(d["close"] + j - 3) % len(rows)]

    turns = []
    for idx in range(d["n_turns"]):
        if idx % 2 == 0:
            turns.append(DialogueTurn("customer", customer_line(idx // 2)))
        else:
            turns.append(DialogueTurn("representative", rep_line(idx // 2)))

    rep_turns = d["n_turns"] // 2
    return DialogueRecord(
        record_id=f"{profile.company_id}-{seed:016x}",
        profile_ref=profile.company_id,
        scenario=scenario,
        conversation=tuple(turns),
        outcome=d["outcome"],
        key_points_discussed=(key_point, keyword) if rep_turns >= 2 else (key_point,),
        value_propositions=(value_prop,),
        objections_handled=(objection,) if rep_turns >= 3 else (),
    )


def _http_dialogue(
    profile: CompanyProfile, scenario: Scenario, provider: TextProviderSpec, seed: int
) -> DialogueRecord:
    messages = [
        {
            "role": "system",
            "content": (
                "You write complete simulated sales conversations as strict JSON: "
                '{"conversation": [{"speaker": "customer"|"representative", '
                '"message": "..."}, ...], "outcome": "success"|"failure", '
                '"key_points_discussed": [...], "value_propositions": [...], '
                '"objections_handled": [...]}. The customer speaks first and '
                "speakers alternate strictly."
            ),
        },
        {
            "role": "user",
            "content": f"Company profile: {json.dumps(profile.to_dict(), sort_keys=True)}\n"
            f"Scenario: {json.dumps(scenario.to_dict(), sort_keys=True)}\n"
            f"Seed: {seed}",
        },
    ]
    content = chat_completion(provider, messages, temperature=0.8)
    obj = _parse_json_object(content)
    obj.setdefault("key_points_discussed", [])
    obj.setdefault("value_propositions", [])
    obj.setdefault("objections_handled", [])
    obj["record_id"] = f"{profile.company_id}-{seed:016x}"
    obj["profile_ref"] = profile.company_id
    obj["scenario"] = scenario.to_dict()
    try:
        return DialogueRecord.from_dict(obj)
    except SchemaError as exc:
        raise MalformedProviderOutput(str(exc), raw_text=content) from exc


# ---------------------------------------------------------------------------
# Chat candidate texts


def boltzmann_pick(n_rows: int, temperature: float, u: float) -> int:
    """Temperature-scaled choice over rows 0..n_rows-1.

    Row weights follow exp(-row / temperature), so low temperatures
    concentrate on the leading rows and high temperatures flatten the
    distribution. `u` is one uniform draw in [0, 1).
    """
    import math

    if temperature <= 0:
        raise ValueError("temperature must be > 0")
    weights = [math.exp(-row / temperature) for row in range(n_rows)]
    total = sum(weights)
    acc = 0.0
    for row, w in enumerate(weights):
        acc += w / total
        if u < acc:
            return row
    return n_rows - 1


def generate_candidate_texts(
    provider: TextProviderSpec,
    history: list[DialogueTurn],
    user_msg: str,
    profile: CompanyProfile,
    temperatures: list[float],
    seed: int,
) -> list[str | Exception]:
    """One candidate text per temperature.

    Failed HTTP calls yield the exception in that slot instead of a
    string, letting the caller decide how to degrade.
    """
    if provider.is_builtin:
        t = load_templates()
        rows = t["chat_responses"]
        subs = _subs(profile)
        rng = Xoshiro256StarStar(seed)
        return [
            rows[boltzmann_pick(len(rows), temp, rng.uniform())].format_map(subs)
            for temp in temperatures
        ]
    messages = [
        {
            "role": "system",
            "content": (
                f"You are a sales representative for {profile.name} "
                f"({profile.product_category}, audience: {profile.target_audience}). "
                "Reply with one short conversational message."
            ),
        }
    ]
    for turn in history:
        role = "user" if turn.speaker == "customer" else "assistant"
        messages.append({"role": role, "content": turn.message})
    messages.append({"role": "user", "content": user_msg})

    out: list[str | Exception] = []
    for temp in temperatures:
        try:
            text = chat_completion(provider, messages, temperature=temp)
            if not text:
                raise MalformedProviderOutput("empty candidate text", raw_text=text)
            out.append(text)
        except (ProviderUnavailable, MalformedProviderOutput) as exc:
            out.append(exc)
    return out


# ---------------------------------------------------------------------------
# HTTP plumbing


def _resolve_endpoint(provider: TextProviderSpec) -> str:
    endpoint = provider.endpoint or os.environ.get(ENV_BASE_URL)
    if not endpoint:
        raise ProviderUnavailable(
            f"http_chat provider needs an endpoint or {ENV_BASE_URL} set"
        )
    return endpoint.rstrip("/")


def chat_completion(
    provider: TextProviderSpec, messages: list[dict], temperature: float
) -> str:
    """POST a chat-completions request and return the reply content."""
    url = f"{_resolve_endpoint(provider)}/chat/completions"
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(ENV_API_KEY)
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    body = {
        "model": provider.model_name or "default",
        "messages": messages,
        "temperature": temperature,
    }
    try:
        resp = requests.post(url, json=body, headers=headers, timeout=HTTP_TIMEOUT_S)
    except requests.RequestException as exc:
        raise ProviderUnavailable(f"request to {url} failed: {exc}") from exc
    if resp.status_code != 200:
        raise ProviderUnavailable(f"{url} returned HTTP {resp.status_code}")
    try:
        payload = resp.json()
        content = payload["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise MalformedProviderOutput(
            f"cannot locate choices[0].message.content: {exc}", raw_text=resp.text
        ) from exc
    if not isinstance(content, str):
        raise MalformedProviderOutput("message content is not a string", raw_text=resp.text)
    return content


def _parse_json_object(content: str) -> dict:
    """Parse provider text as a JSON object, tolerating surrounding prose
    by extracting the outermost braces."""
    text = content.strip()
    if not text.startswith("{"):
        lo, hi = text.find("{"), text.rfind("}")
        if lo == -1 or hi <= lo:
            raise MalformedProviderOutput("no JSON object in reply", raw_text=content)
        text = text[lo : hi + 1]
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedProviderOutput(f"invalid JSON: {exc.msg}", raw_text=content) from exc
    if not isinstance(obj, dict):
        raise MalformedProviderOutput("reply JSON is not an object", raw_text=content)
    return obj
