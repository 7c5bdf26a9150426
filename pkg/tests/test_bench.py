from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dctjpeg.augment import AugmentPolicy
from dctjpeg.bench import (
    COST_MODEL, FULL, MINIMAL, WORKERS_ENV, BenchReport, cost_reduction, default_workers,
    measure_augment_latency, measure_decode_latency, measure_pipeline_throughput, theoretical_cost,
)
from dctjpeg.embed import EmbedConfig
from dctjpeg.errors import BadSymbolCount, EmptyCorpus


class TestCostModel:
    def test_minimal_at_ns_32(self):
        # 2*32 + (32 + 64) + 64
        assert theoretical_cost(32, MINIMAL) == 224

    def test_full_at_ns_32(self):
        assert theoretical_cost(32, FULL) == pytest.approx(1813.33, abs=0.01)
        assert cost_reduction(32) == pytest.approx(0.8765, abs=1e-3)

    def test_stage_breakdown(self):
        s = COST_MODEL.stages(10)
        assert s["a_huffman"] == 20 and s["b_rle"] == 74 and s["d_idct"] == 1184
        assert s["f_upsample"] == pytest.approx(512 / 6) and s["g_color_convert"] == 256
        assert COST_MODEL.full_constant == pytest.approx(64 + 64 + 1184 + 64 + 512 / 6 + 256)

    @pytest.mark.parametrize("ns", [0, 65, -1, 64.5])
    def test_out_of_range(self, ns):
        with pytest.raises(BadSymbolCount):
            theoretical_cost(ns)

    def test_bad_path(self):
        with pytest.raises(ValueError):
            theoretical_cost(10, "partial")

    @given(st.floats(1, 64))
    def test_minimal_always_cheaper(self, ns):
        assert theoretical_cost(ns, MINIMAL) < theoretical_cost(ns, FULL)
        assert theoretical_cost(ns, FULL) - theoretical_cost(ns, MINIMAL) == pytest.approx(
            1184 + 64 + 512 / 6 + 256)


def test_empty_corpus():
    with pytest.raises(EmptyCorpus):
        measure_decode_latency([])
    with pytest.raises(EmptyCorpus):
        measure_pipeline_throughput([])


def test_report_json_round_trip(small_corpus):
    r = measure_decode_latency(small_corpus[:4], n=1, warmup=1)
    back = BenchReport.from_json(r.to_json())
    assert back == r
    assert r.images == 4 and r.throughput_ips > 0
    assert set(r.per_stage["decode"]) == {"mean_ms", "p50", "p95"}
    assert {"platform", "cpu_count"} <= set(r.machine)


def test_minimal_decode_is_faster(small_corpus):
    data = small_corpus[:8]
    fast = measure_decode_latency(data, n=2, path=MINIMAL, warmup=2)
    slow = measure_decode_latency(data, n=2, path=FULL, warmup=2)
    assert fast.per_stage["decode"]["mean_ms"] < slow.per_stage["decode"]["mean_ms"]


def test_augment_latency_both_spaces(small_corpus):
    pol = AugmentPolicy.from_names(["brightness", "flip"], 10, seed=3)
    for space in ("dct", "rgb"):
        r = measure_augment_latency(small_corpus[:3], n=1, policy=pol, space=space, warmup=0)
        assert r.config["space"] == space and r.images == 3
    with pytest.raises(ValueError):
        measure_augment_latency(small_corpus[:1], space="hsv", warmup=0)


@pytest.mark.parametrize("workers", [1, 2])
def test_pipeline(corpus, workers):
    entries = [e for e in corpus if e.subsampling == "4:2:0" and e.width % 16 == 0 and e.height % 16 == 0]
    if not entries:
        pytest.skip("no aligned entries")
    pol = AugmentPolicy.from_names(["contrast"], 5)
    r = measure_pipeline_throughput(entries[:4], policy=pol, embed_config=EmbedConfig(patch_size=8),
                                    workers=workers, warmup=1)
    assert r.images == len(entries[:4])
    assert set(r.per_stage) == {"decode", "augment", "layout"}


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert default_workers() == 3
    monkeypatch.delenv(WORKERS_ENV)
    assert default_workers() == 1
