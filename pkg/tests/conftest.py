"""Shared fixtures: the full-scale synthetic world is expensive (~30 s of
HMM training), so it is built once per session and reused by the service
tests and the acceptance suite."""

import dataclasses

import pytest

from signtutor.fusion import extract_clusters, split_dataset, train_banks
from signtutor.hmm import TrainConfig
from signtutor.synth import default_spec, generate_synthetic

ACCEPTANCE_SPLIT_SEED = 1
ACCEPTANCE_TRAIN_CONFIG = TrainConfig(n_states=5, max_iters=30, rel_tol=1e-4)


@dataclasses.dataclass
class World:
    data: object
    banks: object
    clusters: object
    train: list
    val: list
    test: list


@pytest.fixture(scope="session")
def acceptance_world():
    data = generate_synthetic(default_spec())
    records = data.records()
    train, val, test = split_dataset(records, seed=ACCEPTANCE_SPLIT_SEED)
    banks = train_banks(train, ACCEPTANCE_TRAIN_CONFIG)
    clusters = extract_clusters(banks, val)
    return World(data, banks, clusters, train, val, test)
