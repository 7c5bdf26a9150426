"""Command-line front end: ``dctjpeg {decode,augment,compare,embed,cost,bench}``.

Machine-readable results go to stdout as JSON; progress and tables go to
stderr. Exit codes: 0 on success, 2 for bad usage or unsupported input, 1 for
anything unexpected.
"""

from __future__ import annotations

import argparse
import inspect
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import bench, container
from .augment import DCT_OPS, AugmentPolicy, apply_plan, canonical_name, sample_plan
from .bitstream import decode_to_dct
from .embed import (
    CONCATENATED, GROUPED, PATCH_SIZES, STRATEGIES, EmbedConfig, embed_flops,
    layout_concatenated, layout_grouped, layout_separate, project,
)
from .errors import DctJpegError
from .oracle import full_decode, write_ppm
from .twopath import DEFAULT_PARAMS, compare_op

DEFAULT_SEED = 0


@dataclass
class CliConfig:
    """Parsed command line; ``seed`` is echoed in every JSON result."""

    command: str
    inputs: list[str] = field(default_factory=list)
    output: str | None = None
    seed: int = DEFAULT_SEED
    options: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> CliConfig:
        opts = {k: v for k, v in vars(ns).items() if k not in ("command", "input", "output", "seed", "func")}
        inp = getattr(ns, "input", None)
        return cls(ns.command, [inp] if inp else [], getattr(ns, "output", None), ns.seed, opts)


class UsageError(DctJpegError):
    pass


def _emit(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True, default=_json_default))


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _parse_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"parameters must look like key=value, got {item!r}")
        out[key.strip()] = _parse_value(value.strip())
    return out


def _load_dct(path: str):
    p = Path(path)
    data = p.read_bytes()
    if data[:4] == container.MAGIC:
        return container.loads(data)
    return decode_to_dct(data)[0]


# -- decode ----------------------------------------------------------------------


def _decode_batch_item(args) -> dict:
    try:
        return _decode_one(args)
    except DctJpegError as e:
        return {"input": str(args[0]), "error": f"{type(e).__name__}: {e}"}


def _decode_one(args) -> dict:
    src, dst, mode = args
    img = _load_dct(src)
    if mode == "dct":
        Path(dst).write_bytes(container.dumps(img))
    else:
        Path(dst).write_bytes(write_ppm(full_decode(img)))
    return {"input": str(src), "output": str(dst), "width": img.logical_width,
            "height": img.logical_height, "subsampling": img.subsampling}


def cmd_decode(ns) -> int:
    mode = "dct" if ns.dct else "rgb"
    suffix = ".dctz" if mode == "dct" else ".ppm"
    if ns.dir:
        src_dir, out_dir = Path(ns.dir), Path(ns.output)
        out_dir.mkdir(parents=True, exist_ok=True)
        files = sorted(p for p in src_dir.iterdir() if p.suffix.lower() in (".jpg", ".jpeg"))
        jobs = [(str(p), str(out_dir / (p.stem + suffix)), mode) for p in files]
        workers = ns.workers or bench.default_workers()
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(workers) as pool:
                results = list(pool.map(_decode_batch_item, jobs))
        else:
            results = [_decode_batch_item(j) for j in jobs]
        _emit({"mode": mode, "files": results, "workers": workers, "seed": ns.seed})
        failed = [r for r in results if "error" in r]
        for r in failed:
            print(f"dctjpeg decode: {r['input']}: {r['error']}", file=sys.stderr)
        return 2 if failed else 0
    if not ns.input:
        raise UsageError("decode needs an input file or --dir")
    _emit({"mode": mode, **_decode_one((ns.input, ns.output, mode)), "seed": ns.seed})
    return 0


# -- augment ---------------------------------------------------------------------


def _op_call(name: str, params: dict, seed: int) -> tuple[str, dict]:
    name = canonical_name(name)
    fn = DCT_OPS[name]
    sig = inspect.signature(fn)
    if "rng" in sig.parameters and "rng" not in params and "channel" not in params:
        params = {**params, "rng": seed}
    unknown = set(params) - set(sig.parameters)
    if unknown:
        raise UsageError(f"{name} does not take {sorted(unknown)}")
    return name, params


def cmd_augment(ns) -> int:
    img = _load_dct(ns.input)
    if ns.policy:
        policy = AugmentPolicy.from_json(Path(ns.policy).read_text())
        seed = policy.seed if ns.seed is None else ns.seed
        rng = np.random.default_rng(seed)
        plan = sample_plan(policy, img.grid_shape, img.chroma_factor, rng)
        record = {"policy": policy.to_dict()}
    elif ns.op:
        params = _parse_params(ns.params)
        if ns.t is not None:
            params["t"] = ns.t
        seed = DEFAULT_SEED if ns.seed is None else ns.seed
        plan = [_op_call(ns.op, params, seed)]
        record = {"op": plan[0][0]}
    else:
        raise UsageError("augment needs --op or --policy")
    out = apply_plan(img, plan)
    Path(ns.output).write_bytes(container.dumps(out))
    shown = [[n, {k: v for k, v in p.items() if k != "rng"}] for n, p in plan]
    _emit({**record, "plan": shown, "seed": seed, "output": ns.output,
           "dtype": container.read_header(Path(ns.output).read_bytes())["dtype"]})
    return 0


# -- compare ---------------------------------------------------------------------


def cmd_compare(ns) -> int:
    op = "none" if ns.op in ("none", "identity") else canonical_name(ns.op)
    params = dict(DEFAULT_PARAMS.get(op, {}))
    extra = _parse_params(ns.params)
    if ns.scale is not None:
        extra["scale"] = ns.scale
    if ns.t is not None:
        extra["t"] = ns.t
    if op == "resize" and ("out_w" in extra or "out_h" in extra):
        params.pop("scale", None)
    params.update(extra)
    if op == "chroma_drop" and "channel" not in params:
        params["channel"] = ("cb", "cr")[int(np.random.default_rng(ns.seed).integers(2))]
    img = _load_dct(ns.input)
    report = compare_op(img, op, **params)
    _emit({**report.to_dict(), "op": op, "params": params, "seed": ns.seed})
    return 0


# -- embed / cost / bench --------------------------------------------------------


def _layout(img, cfg):
    if cfg.strategy == GROUPED:
        return layout_grouped(img, cfg)
    if cfg.strategy == CONCATENATED:
        return layout_concatenated(img, cfg)
    return layout_separate(img, cfg)


def cmd_embed(ns) -> int:
    cfg = EmbedConfig(ns.strategy, ns.patch, ns.dim, ns.conversion)
    result = {"config": asdict(cfg), "seed": ns.seed}
    if ns.flops:
        size = ns.image_size
        result["flops"] = embed_flops(cfg, size, "dct")
        result["flops_rgb"] = embed_flops(cfg, size, "rgb")
        result["image_size"] = size
    if ns.input:
        img = _load_dct(ns.input)
        tokens = _layout(img, cfg)
        parts = tokens if isinstance(tokens, tuple) else (tokens,)
        result["tokens"] = [{"layout": t.layout, "shape": list(t.data.shape)} for t in parts]
        emb = project(tokens, cfg, ns.seed)
        result["embedding_shape"] = list(emb.data.shape)
        if ns.output:
            Path(ns.output).write_bytes(container.dumps_patches(tokens))
            result["output"] = ns.output
    elif not ns.flops:
        raise UsageError("embed needs an input file or --flops")
    _emit(result)
    return 0


def cmd_cost(ns) -> int:
    lo = bench.theoretical_cost(ns.ns, bench.MINIMAL)
    hi = bench.theoretical_cost(ns.ns, bench.FULL)
    _emit({"ns": ns.ns, "minimal": lo, "full": hi, "minimal_ops": round(lo), "full_ops": round(hi),
           "reduction": bench.cost_reduction(ns.ns), "stages": bench.COST_MODEL.stages(ns.ns)})
    print(f"Ns={ns.ns:g}: minimal {round(lo)} OPs, full {round(hi)} OPs, "
          f"{100 * bench.cost_reduction(ns.ns):.1f}% fewer", file=sys.stderr)
    return 0


def _bench_corpus(ns):
    if ns.corpus:
        files = sorted(p for p in Path(ns.corpus).iterdir() if p.suffix.lower() in (".jpg", ".jpeg"))
        return [p.read_bytes() for p in files]
    from .corpus import make_square_corpus
    return make_square_corpus(ns.images, ns.size, seed=ns.seed)


def cmd_bench(ns) -> int:
    corpus = _bench_corpus(ns)
    policy = AugmentPolicy.from_json(Path(ns.policy).read_text()) if ns.policy else None
    if ns.kind == "decode":
        reports = [bench.measure_decode_latency(corpus, ns.n, p, ns.warmup) for p in (bench.MINIMAL, bench.FULL)]
        lo, hi = (r.per_stage["decode"]["mean_ms"] for r in reports)
        out = {"minimal": reports[0].to_dict(), "full": reports[1].to_dict(), "speedup": hi / lo}
        print(f"minimal {lo:.2f} ms  full {hi:.2f} ms  speedup {hi / lo:.2f}x", file=sys.stderr)
    elif ns.kind == "augment":
        policy = policy or AugmentPolicy.from_names(("Brightness", "Contrast", "Translate"), 10, seed=ns.seed)
        r = bench.measure_augment_latency(corpus, ns.n, policy, ns.space, ns.warmup)
        out = r.to_dict()
    else:
        cfg = EmbedConfig(ns.strategy, ns.patch, ns.dim)
        r = bench.measure_pipeline_throughput(corpus, ns.n, policy=policy, embed_config=cfg,
                                              workers=ns.workers, warmup=ns.warmup)
        out = r.to_dict()
        print(f"{r.throughput_ips:.1f} images/s", file=sys.stderr)
    out["seed"] = ns.seed
    if ns.output:
        Path(ns.output).write_text(json.dumps(out, sort_keys=True, indent=2, default=_json_default))
    _emit(out)
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dctjpeg", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", help="JPEG -> DCTZ coefficients or PPM pixels")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--dct", action="store_true")
    g.add_argument("--rgb", action="store_true")
    p.add_argument("input", nargs="?")
    p.add_argument("--dir", help="decode every .jpg in this directory into -o DIR")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("augment", help="apply one op or a policy to a DCTZ file")
    p.add_argument("input")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--op")
    g.add_argument("--policy")
    p.add_argument("--t", type=float)
    p.add_argument("--params", nargs="*", metavar="K=V")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("compare", help="PSNR/SSIM of coefficient op vs pixel op")
    p.add_argument("input")
    p.add_argument("--op", required=True)
    p.add_argument("--params", nargs="*", metavar="K=V")
    p.add_argument("--t", type=float)
    p.add_argument("--scale", type=float)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("embed", help="token layout, projection shapes and FLOPs")
    p.add_argument("input", nargs="?")
    p.add_argument("--strategy", choices=STRATEGIES, default=GROUPED)
    p.add_argument("--patch", type=int, choices=PATCH_SIZES, default=16)
    p.add_argument("--dim", type=int, default=192)
    p.add_argument("--conversion", action=argparse.BooleanOptionalAction, default=True,
                   help="combine luma blocks to one p x p DCT block (default on)")
    p.add_argument("--flops", action="store_true")
    p.add_argument("--image-size", type=int, default=224)
    p.add_argument("-o", "--output")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("cost", help="analytic OPs per block")
    p.add_argument("--ns", type=float, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("bench", help="decode / augment / pipeline timings")
    p.add_argument("--kind", choices=("decode", "augment", "pipeline"), default="decode")
    p.add_argument("--corpus", help="directory of JPEGs (default: synthetic corpus)")
    p.add_argument("--images", type=int, default=100)
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--warmup", type=int, default=bench.DEFAULT_WARMUP)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--space", choices=("dct", "rgb"), default="dct")
    p.add_argument("--policy")
    p.add_argument("--strategy", choices=STRATEGIES, default=GROUPED)
    p.add_argument("--patch", type=int, choices=PATCH_SIZES, default=16)
    p.add_argument("--dim", type=int, default=192)
    p.add_argument("-o", "--output")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return ns.func(ns)
    except (DctJpegError, OSError) as e:
        print(f"dctjpeg {ns.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001
        print(f"dctjpeg {ns.command}: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
