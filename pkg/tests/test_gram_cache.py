"""Tests for the on-disk Gram cache."""

import json

import numpy as np
import pytest

from src.basis import gram_hs, make_basis
from src.gram_cache import CACHE_VERSION, GramCache


@pytest.fixture
def cache(tmp_path):
    return GramCache(str(tmp_path / "cache"))


@pytest.fixture
def spec():
    return make_basis("legendre", 4, 2)


def test_cache_initialization(cache):
    assert cache.gram_dir.exists()
    assert cache.manifest == {}


def test_miss_then_hit(cache, spec):
    first = cache.get(spec, 2)
    assert (cache.hits, cache.misses) == (0, 1)
    second = cache(spec, 2)
    assert (cache.hits, cache.misses) == (1, 1)
    assert np.array_equal(first.matrix, second.matrix)
    assert np.array_equal(second.matrix, gram_hs(spec, 2).matrix)


def test_manifest_entry(cache, spec):
    cache.get(spec, 1)
    entry = cache.manifest["legendre_n4_d2_s1"]
    assert entry["version"] == CACHE_VERSION
    assert entry["file"] == "gram/legendre_n4_d2_s1.bin"
    with open(cache.manifest_path) as f:
        assert "legendre_n4_d2_s1" in json.load(f)


def test_cache_persists_across_instances(tmp_path, spec):
    GramCache(str(tmp_path)).get(spec, 2)
    reopened = GramCache(str(tmp_path))
    assert reopened.is_cached(spec, 2)
    assert not reopened.is_cached(spec, 1)
    reopened.get(spec, 2)
    assert reopened.hits == 1


def test_stale_version_is_ignored(cache, spec):
    cache.get(spec, 2)
    cache.manifest["legendre_n4_d2_s2"]["version"] = CACHE_VERSION + 1
    assert cache.get_cached(spec, 2) is None


def test_corrupt_file_is_dropped(cache, spec):
    cache.get(spec, 2)
    path = cache.gram_dir / "legendre_n4_d2_s2.bin"
    path.write_bytes(path.read_bytes()[:-8])
    assert cache.get_cached(spec, 2) is None
    assert "legendre_n4_d2_s2" not in cache.manifest
    # the next lookup rebuilds the entry
    cache.get(spec, 2)
    assert cache.is_cached(spec, 2)


def test_corrupt_manifest_starts_empty(tmp_path):
    (tmp_path / "gram").mkdir()
    (tmp_path / "cache_manifest.json").write_text("{not json")
    assert GramCache(str(tmp_path)).manifest == {}


def test_clear_all(cache, spec, capsys):
    cache.get(spec, 1)
    cache.get(make_basis("fourier", 3, 1), 1)
    assert cache.get_stats()["total_entries"] == 2
    cache.clear_all()
    assert "Cleared all cache entries" in capsys.readouterr().out
    assert cache.manifest == {}
    assert list(cache.gram_dir.glob("*.bin")) == []


def test_get_stats(cache, spec):
    cache.get(spec, 2)
    stats = cache.get_stats()
    assert stats["total_entries"] == 1
    assert stats["valid_entries"] == 1
    assert stats["missing_entries"] == 0
    assert stats["total_size_bytes"] > 8 * spec.kappa**2
    (cache.gram_dir / "legendre_n4_d2_s2.bin").unlink()
    assert cache.get_stats()["missing_entries"] == 1
