"""Shared test fixtures."""
import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", suppress_health_check=[HealthCheck.too_slow], deadline=None
)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.register_profile("dev", max_examples=25, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def pipeline_config():
    from biogds.config import PipelineConfig

    config = PipelineConfig.from_file(FIXTURES / "pipeline_config.json")
    for key in PipelineConfig.REQUIRED_INPUTS:
        setattr(config, key, str(FIXTURES / Path(getattr(config, key)).name))
    config.out_dir = ""  # callers write nothing unless they choose a tmp dir
    return config
