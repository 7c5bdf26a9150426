"""Analytic decode cost model and latency / throughput measurement loops.

Per 8x8 block, the stages of a baseline decode cost:

====  ===============================================  ==========
(a)   Huffman decode of Ns codes to RLE symbols         2 Ns
(b)   RLE expansion to 64 quantized coefficients        Ns + 64
(c)   dequantization                                     64
(d)   inverse DCT                                        882 + 280 + 22
(e)   level shift (+128)                                 64
(f)   chroma upsampling (512 OPs over 6 blocks)          512 / 6
(g)   YCbCr -> RGB (768 OPs over 3 blocks)               768 / 3
====  ===============================================  ==========

The minimal path stops after (c). Measurements follow a plain
accumulate-and-average loop over an in-memory corpus with untimed warm-up
iterations.
"""

from __future__ import annotations

import json
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .augment import AugmentPolicy, apply_plan, sample_plan
from .bitstream import decode_to_dct
from .embed import EmbedConfig, layout_concatenated, layout_grouped, layout_separate
from .errors import BadSymbolCount, EmptyCorpus
from .oracle import full_decode, rgb_augment
from .twopath import rgb_params

MINIMAL = "minimal"
FULL = "full"
WORKERS_ENV = "DCTJPEG_WORKERS"
DEFAULT_WARMUP = 10

IDCT_PARTS = (882, 280, 22)


@dataclass(frozen=True)
class CostModel:
    """OP counts per 8x8 block as functions of the symbol count ``ns``."""

    dequantize: float = 64.0
    idct: float = float(sum(IDCT_PARTS))
    level_shift: float = 64.0
    upsample: float = 512.0 / 6.0
    color_convert: float = 768.0 / 3.0

    @staticmethod
    def huffman(ns: float) -> float:
        return 2.0 * ns

    @staticmethod
    def rle(ns: float) -> float:
        return ns + 64.0

    def stages(self, ns: float) -> dict[str, float]:
        return {
            "a_huffman": self.huffman(ns),
            "b_rle": self.rle(ns),
            "c_dequantize": self.dequantize,
            "d_idct": self.idct,
            "e_level_shift": self.level_shift,
            "f_upsample": self.upsample,
            "g_color_convert": self.color_convert,
        }

    def minimal(self, ns: float) -> float:
        return self.huffman(ns) + self.rle(ns) + self.dequantize

    def full(self, ns: float) -> float:
        return sum(self.stages(ns).values())

    @property
    def full_constant(self) -> float:
        """Ns-independent part of the full path (1717.33...)."""
        return self.full(0.0)


COST_MODEL = CostModel()


def theoretical_cost(ns: float, path: str = MINIMAL, model: CostModel = COST_MODEL) -> float:
    """OPs to decode one block with ``ns`` RLE symbols; fractional, unrounded."""
    if not 1 <= ns <= 64:
        raise BadSymbolCount(f"Ns must be in [1, 64], got {ns}")
    if path == MINIMAL:
        return model.minimal(ns)
    if path == FULL:
        return model.full(ns)
    raise ValueError(f"path must be {MINIMAL!r} or {FULL!r}, got {path!r}")


def cost_reduction(ns: float, model: CostModel = COST_MODEL) -> float:
    """Fraction of OPs saved by the minimal path."""
    return 1.0 - theoretical_cost(ns, MINIMAL, model) / theoretical_cost(ns, FULL, model)


# -- reports ---------------------------------------------------------------------


def machine_descriptor() -> dict:
    return {
        "platform": platform.platform(),
        "processor": platform.processor() or platform.machine(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "cpu_count": os.cpu_count(),
    }


def stage_summary(samples_s) -> dict:
    ms = np.asarray(samples_s, dtype=np.float64) * 1e3
    if ms.size == 0:
        return {"mean_ms": 0.0, "p50": 0.0, "p95": 0.0}
    return {"mean_ms": float(ms.mean()), "p50": float(np.percentile(ms, 50)), "p95": float(np.percentile(ms, 95))}


@dataclass
class BenchReport:
    config: dict
    per_stage: dict
    throughput_ips: float
    machine: dict = field(default_factory=machine_descriptor)
    iterations: int = 0
    images: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> BenchReport:
        return cls(**json.loads(text))


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def _check(corpus) -> list[bytes]:
    corpus = [getattr(c, "data", c) for c in corpus]
    if not corpus:
        raise EmptyCorpus("benchmark corpus is empty")
    return corpus


def _decode(data: bytes, path: str):
    img, _ = decode_to_dct(data)
    if path == FULL:
        return full_decode(img)
    return img


def _timed_loop(corpus, n, warmup, body):
    for i in range(warmup):
        body(corpus[i % len(corpus)])
    samples = []
    clock = time.perf_counter
    for _ in range(n):
        for item in corpus:
            t0 = clock()
            body(item)
            samples.append(clock() - t0)
    return samples


def measure_decode_latency(corpus, n: int = 1, path: str = MINIMAL, warmup: int = DEFAULT_WARMUP) -> BenchReport:
    """Average per-image decode time over ``n`` passes (minimal or full path)."""
    corpus = _check(corpus)
    if path not in (MINIMAL, FULL):
        raise ValueError(f"path must be {MINIMAL!r} or {FULL!r}, got {path!r}")
    samples = _timed_loop(corpus, n, warmup, lambda d: _decode(d, path))
    return BenchReport(
        config={"kind": "decode", "path": path, "n": n, "warmup": warmup, "corpus_size": len(corpus)},
        per_stage={"decode": stage_summary(samples)},
        throughput_ips=len(samples) / sum(samples),
        iterations=n,
        images=len(samples),
    )


def _rgb_apply(rgb, plan):
    for name, params in plan:
        op = "none" if name == "identity" else name
        rgb = rgb_augment(rgb, op, **rgb_params(op, params))
    return rgb


def measure_augment_latency(
    corpus, n: int = 1, policy: AugmentPolicy | None = None, space: str = "dct",
    warmup: int = DEFAULT_WARMUP,
) -> BenchReport:
    """Time only the augmentation; decoding happens before the timed region."""
    corpus = _check(corpus)
    policy = policy or AugmentPolicy([])
    decoded = []
    for d in corpus:
        img, _ = decode_to_dct(d)
        decoded.append((img, full_decode(img) if space == "rgb" else None))
    rng = np.random.default_rng(policy.seed)
    plans = [sample_plan(policy, img.grid_shape, img.chroma_factor, rng) for img, _ in decoded]
    items = list(zip(decoded, plans))
    if space == "dct":
        body = lambda it: apply_plan(it[0][0], it[1])  # noqa: E731
    elif space == "rgb":
        body = lambda it: _rgb_apply(it[0][1], it[1])  # noqa: E731
    else:
        raise ValueError(f"space must be 'dct' or 'rgb', got {space!r}")
    samples = _timed_loop(items, n, warmup, body)
    return BenchReport(
        config={"kind": "augment", "space": space, "n": n, "warmup": warmup,
                "policy": policy.to_dict(), "corpus_size": len(corpus)},
        per_stage={"augment": stage_summary(samples)},
        throughput_ips=len(samples) / sum(samples) if sum(samples) > 0 else float("inf"),
        iterations=n,
        images=len(samples),
    )


def _layout(img, cfg: EmbedConfig):
    if cfg.strategy == "grouped":
        return layout_grouped(img, cfg)
    if cfg.strategy == "separate":
        return layout_separate(img, cfg)
    return layout_concatenated(img, cfg)


def _pipeline_one(args):
    data, stages, policy, cfg, seed = args
    clock = time.perf_counter
    times = {}
    t = clock()
    img, _ = decode_to_dct(data)
    times["decode"] = clock() - t
    if "augment" in stages and policy is not None:
        t = clock()
        plan = sample_plan(policy, img.grid_shape, img.chroma_factor, np.random.default_rng(seed))
        img = apply_plan(img, plan)
        times["augment"] = clock() - t
    if "layout" in stages and cfg is not None:
        t = clock()
        _layout(img, cfg)
        times["layout"] = clock() - t
    return times  # the "to device" step of a training loop is a no-op sink here


def measure_pipeline_throughput(
    corpus, n: int = 1, stages=("decode", "augment", "layout"), policy: AugmentPolicy | None = None,
    embed_config: EmbedConfig | None = None, workers: int | None = None, warmup: int = DEFAULT_WARMUP,
) -> BenchReport:
    """End-to-end decode -> augment -> layout, images per second of wall-clock."""
    corpus = _check(corpus)
    workers = default_workers() if workers is None else workers
    stages = tuple(stages)
    jobs = [(d, stages, policy, embed_config, (policy.seed if policy else 0) + i)
            for _ in range(n) for i, d in enumerate(corpus)]
    for j in jobs[:warmup]:
        _pipeline_one(j)
    t0 = time.perf_counter()
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_pipeline_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_pipeline_one(j) for j in jobs]
    wall = time.perf_counter() - t0
    per_stage = {s: stage_summary([r[s] for r in results if s in r]) for s in ("decode", "augment", "layout")
                 if any(s in r for r in results)}
    return BenchReport(
        config={"kind": "pipeline", "stages": list(stages), "n": n, "warmup": warmup, "workers": workers,
                "policy": policy.to_dict() if policy else None,
                "embed": asdict(embed_config) if embed_config else None, "corpus_size": len(corpus)},
        per_stage=per_stage,
        throughput_ips=len(jobs) / wall,
        iterations=n,
        images=len(jobs),
    )
