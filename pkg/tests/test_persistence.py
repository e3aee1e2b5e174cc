# tests/test_persistence.py

import json

import numpy as np
import pytest

from src.graph.fixtures import BY_NAME
from src.ncm.model import construct_ncm
from src.utils.config_file import read_settings
from src.utils.seeding import content_hash, derive_seed
from src.utils.state_persistence import StatePersistence


@pytest.fixture
def persistence(quiet_logger):
    return StatePersistence(quiet_logger)


def test_ncm_checkpoint_round_trip(tmp_path, persistence):
    ncm = construct_ncm(BY_NAME['napkin'].graph, hidden=(4, 3), seed=2)
    path = str(tmp_path / 'models' / 'napkin.json')
    assert persistence.save_ncm(ncm, path, {'note': 'test'})
    loaded = persistence.load_ncm(path)
    assert loaded.graph == ncm.graph
    assert loaded.u_blocks == ncm.u_blocks
    for a, b in zip(loaded.parameters(), ncm.parameters()):
        np.testing.assert_array_equal(a.data, b.data)


def test_tampered_checkpoint_is_rejected(tmp_path, persistence, quiet_logger):
    path = str(tmp_path / 'state.json')
    assert persistence.save_state({'weights': [1.0, 2.0]}, path)
    with open(path) as f:
        document = json.load(f)
    document['payload']['weights'][0] = 1.5
    with open(path, 'w') as f:
        json.dump(document, f)
    assert persistence.load_state(path) is None
    assert 'digest mismatch' in quiet_logger.failures()[-1]


def test_other_version_is_rejected(tmp_path, persistence):
    path = str(tmp_path / 'state.json')
    persistence.save_state({'a': 1}, path)
    with open(path) as f:
        document = json.load(f)
    document['version'] = 99
    with open(path, 'w') as f:
        json.dump(document, f)
    assert persistence.load_state(path) is None


def test_missing_or_invalid_files(tmp_path, persistence):
    assert persistence.load_state(str(tmp_path / 'nope.json')) is None
    broken = tmp_path / 'broken.json'
    broken.write_text('{not json')
    assert persistence.load_state(str(broken)) is None
    assert persistence.load_ncm(str(tmp_path / 'nope.json')) is None


def test_payload_that_is_not_a_model(tmp_path, persistence):
    path = str(tmp_path / 'state.json')
    persistence.save_state({'graph': 'X -> Y\n'}, path)
    assert persistence.load_ncm(path) is None


def test_unserialisable_payload_reports_failure(tmp_path, persistence):
    assert not persistence.save_state({'bad': object()}, str(tmp_path / 'x.json'))


def test_seed_derivation_is_stable_and_separating():
    assert derive_seed(0, 'napkin', 1000, 2) == derive_seed(0, 'napkin', 1000, 2)
    assert derive_seed(0, 'napkin', 1000, 2) != derive_seed(0, 'napkin', 1000, 3)
    assert 0 <= derive_seed('x') < 2 ** 64
    assert content_hash({'b': 1, 'a': 2}) == content_hash({'a': 2, 'b': 1})
    assert len(content_hash([1, 2])) == 16


def test_settings_file_errors(tmp_path):
    path = tmp_path / 'bad.cfg'
    path.write_text('epochs 10\n')
    with pytest.raises(ValueError):
        read_settings(str(path))
    path.write_text('# comment only\n\nseed = 4\n')
    assert read_settings(str(path)) == {'seed': '4'}
