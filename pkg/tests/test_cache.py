from __future__ import annotations

import threading

import pytest

from design_gap.cache import HEADER, GapCache, GapCacheRecord, format_real


def rec(t, k, gap, when="2026-01-01T00:00:00Z"):
    return GapCacheRecord(t, k, gap, 1e-12, "dense", 7, "0.1.0", when)


def test_round_trip(tmp_path):
    cache = GapCache(tmp_path / "g.csv")
    records = [rec(2, 2, 0.6000000000000005), rec(3, 4, 0.35278640450004373), rec(2, 1, 1.0)]
    cache.put(*records)
    loaded = cache.load()
    assert set(loaded.values()) == set(records)
    text = (tmp_path / "g.csv").read_text()
    assert text.splitlines()[0] == ",".join(HEADER)
    assert "\r" not in text
    assert "0.60000000000000053" in text


def test_upsert_replaces(tmp_path):
    cache = GapCache(tmp_path / "g.csv")
    cache.put(rec(2, 2, 0.5))
    cache.put(rec(2, 2, 0.6))
    assert len(cache.load()) == 1
    assert cache.get(2, 2).gap == 0.6
    assert cache.lookup(2)(2) == 0.6
    assert cache.lookup(2)(3) is None


def test_missing_file(tmp_path):
    assert GapCache(tmp_path / "none.csv").load() == {}


def test_bad_header(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        GapCache(p).load()


def test_gap_range_enforced():
    with pytest.raises(ValueError):
        rec(2, 2, 2.5)


def test_seventeen_digits_roundtrip():
    for x in (0.1, 1 / 3, 0.43431457505076398, 2.0**-40):
        assert float(format_real(x)) == x


def test_concurrent_writers(tmp_path):
    cache = GapCache(tmp_path / "g.csv")

    def writer(k):
        GapCache(cache.path).put(rec(2, k, 1.0 / k))

    threads = [threading.Thread(target=writer, args=(k,)) for k in range(1, 21)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert sorted(k for _, k in cache.load()) == list(range(1, 21))
