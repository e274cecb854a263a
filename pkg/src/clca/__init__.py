"""Continuous-learning conversational sales agent.

Dialogue dataset generation, a deterministic RL environment over recorded
conversations, a from-scratch advantage actor-critic, and candidate-
response selection for live chat — plus a CLI and HTTP service on top.
"""

from .a2c import (
    A2CConfig,
    A2CModel,
    AdamState,
    RolloutBuffer,
    a2c_loss_and_grads,
    adam_step,
    compute_gae,
    evaluate_policy,
    train,
    uniform_random_actor,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .datasets import build_dataset, generate_records, load_dataset, save_dataset
from .embedding import embed_dialogue, embed_text, fnv1a64, tokenize
from .env import (
    ACTION_DIM,
    ActionVector,
    EnvConfig,
    HistoryStats,
    RewardComponents,
    SalesEnv,
    StepResult,
    aligned_target,
    reward_fn,
)
from .errors import (
    ClcaError,
    DimensionMismatch,
    EmptyDataset,
    EmptyMessage,
    EpisodeFinished,
    FormatError,
    GenerationInterrupted,
    MalformedProviderOutput,
    NonFiniteAction,
    NonFiniteLoss,
    PartialCandidates,
    ProviderUnavailable,
    SchemaError,
)
from .nets import MlpParams, forward_policy, forward_value, init_params, predict
from .providers import generate_dialogue, generate_scenario
from .rng import Xoshiro256StarStar, derive_seed
from .schemas import (
    CompanyProfile,
    DialogueDataset,
    DialogueRecord,
    DialogueTurn,
    Scenario,
    TextProviderSpec,
    canonical_json,
)
from .selection import (
    CandidateResponse,
    ChatState,
    FeatureVector,
    Lexicons,
    ScoredCandidate,
    SelectionConfig,
    SelectionResult,
    build_state,
    extract_features,
    generate_candidates,
    score,
    select_response,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
