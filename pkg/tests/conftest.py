import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prosegraph.backends import FixtureBackend
from prosegraph.decomposition import ComplexityRule
from prosegraph.service import IngestConfig, ingest


@pytest.fixture(scope="session")
def climate_text() -> str:
    return resources.files("prosegraph.data").joinpath("climate_passage.txt").read_text()


@pytest.fixture()
def climate_backend() -> FixtureBackend:
    return FixtureBackend.from_bundled("climate_fixtures.json")


@pytest.fixture(scope="session")
def climate_config() -> IngestConfig:
    # the passage keeps its coarse first-sentence phrase atomic until a later
    # sentence reuses one of its sub-concepts, so sight-based refinement is off
    return IngestConfig(complexity=ComplexityRule(enabled=False))


@pytest.fixture(scope="session")
def climate_bundle(climate_text, climate_config):
    backend = FixtureBackend.from_bundled("climate_fixtures.json")
    return ingest(climate_text, climate_config, backend)
