import os

import pytest

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures", "tiny200")


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def fixture_tweets_path():
    return os.path.join(FIXTURE_DIR, "tweets.jsonl")


@pytest.fixture(scope="session")
def fixture_bundle_dir():
    return os.path.join(FIXTURE_DIR, "bundle")
