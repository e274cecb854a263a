import json

import pytest

from clca.a2c import A2CConfig, A2CModel, AdamState
from clca.checkpoint import save_checkpoint
from clca.datasets import build_dataset, generate_records
from clca.env import ACTION_DIM, EnvConfig
from clca.nets import init_params
from clca.schemas import CompanyProfile, TextProviderSpec

PROFILE = {
    "company_id": "acme-crm",
    "name": "Acme CRM",
    "sales_goals": "expand mid-market subscriptions",
    "product_category": "customer relationship management software",
    "target_audience": "mid-market sales teams",
    "product_keywords": ["pipeline analytics", "lead scoring", "workflow automation"],
}


@pytest.fixture(scope="session")
def profile_dict():
    return dict(PROFILE)


@pytest.fixture(scope="session")
def profile():
    return CompanyProfile.from_dict(PROFILE)


@pytest.fixture(scope="session")
def builtin_provider():
    return TextProviderSpec(kind="builtin_template")


@pytest.fixture(scope="session")
def small_dataset(profile, builtin_provider):
    records = generate_records(profile, 8, builtin_provider, seed=3)
    return build_dataset(records)


@pytest.fixture(scope="session")
def untrained_model(small_dataset):
    """A structurally valid model without any training behind it."""
    obs_dim = small_dataset.embed_dim + ACTION_DIM
    params = init_params(obs_dim, seed=0)
    return A2CModel(
        params=params,
        adam=AdamState.zeros_like(params),
        a2c_config=A2CConfig(),
        env_config=EnvConfig(),
        embed_dim=small_dataset.embed_dim,
    )


@pytest.fixture(scope="session")
def ckpt_path(untrained_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("ckpt") / "model.json"
    save_checkpoint(untrained_model, str(path))
    return str(path)


@pytest.fixture(scope="session")
def profile_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("profile") / "profile.json"
    path.write_text(json.dumps(PROFILE), encoding="utf-8")
    return str(path)
