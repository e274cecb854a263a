"""Dataset persistence: JSONL with one canonical-JSON record per line.

Embeddings are derived data and are recomputed on load, never persisted.
"""

from __future__ import annotations

import json
import os

from .embedding import embed_dialogue
from .errors import GenerationInterrupted, MalformedProviderOutput, ProviderUnavailable, SchemaError
from .providers import generate_dialogue, generate_scenario
from .rng import derive_seed
from .schemas import CompanyProfile, DialogueDataset, DialogueRecord, TextProviderSpec, canonical_json


def build_dataset(records: list[DialogueRecord], embed_dim: int = 64) -> DialogueDataset:
    embeddings = [embed_dialogue(r, embed_dim) for r in records]
    return DialogueDataset(records=list(records), embeddings=embeddings, embed_dim=embed_dim)


def generate_records(
    profile: CompanyProfile,
    n: int,
    provider: TextProviderSpec,
    seed: int,
    p_success: float = 0.5,
) -> list[DialogueRecord]:
    """Generate n scenario+dialogue records with per-record derived seeds.

    Record i uses seed streams 2i (scenario) and 2i+1 (dialogue), so the
    output is a pure function of (profile, n, provider, seed). If the
    provider fails partway, raises GenerationInterrupted carrying the
    records completed so far.
    """
    records: list[DialogueRecord] = []
    for i in range(n):
        try:
            scenario = generate_scenario(profile, provider, derive_seed(seed, 2 * i))
            record = generate_dialogue(
                profile, scenario, provider, derive_seed(seed, 2 * i + 1), p_success
            )
        except (ProviderUnavailable, MalformedProviderOutput) as exc:
            raise GenerationInterrupted(
                f"provider failed after {len(records)} of {n} records: {exc}",
                records,
                exc,
            ) from exc
        records.append(record)
    return records


def save_dataset(dataset: DialogueDataset, path: str) -> None:
    """Write one canonical-JSON record per line, '\\n'-terminated, UTF-8."""
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for record in dataset.records:
            fh.write(canonical_json(record.to_dict()))
            fh.write("\n")
    os.replace(tmp, path)


def load_dataset(path: str, embed_dim: int = 64) -> DialogueDataset:
    """Parse and validate a JSONL dataset, recomputing embeddings.

    Raises SchemaError carrying the 1-based line number of the first
    invalid record. An empty file loads as a zero-record dataset.
    """
    records: list[DialogueRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            try:
                records.append(DialogueRecord.from_dict(obj))
            except SchemaError as exc:
                raise SchemaError(str(exc), line=lineno) from exc
    return build_dataset(records, embed_dim)
