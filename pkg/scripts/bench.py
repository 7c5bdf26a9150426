"""Minimal vs full decode latency on a square 4:2:0 corpus.

    python scripts/bench.py --images 1000 --size 512 -o results/decode.json
"""

from __future__ import annotations

import argparse
import json
import sys

from dctjpeg.bench import FULL, MINIMAL, measure_decode_latency
from dctjpeg.corpus import make_square_corpus


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--images", type=int, default=1000)
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("-o", "--output")
    args = ap.parse_args(argv)
    corpus = make_square_corpus(args.images, args.size, seed=args.seed)
    reports = {p: measure_decode_latency(corpus, args.n, p) for p in (MINIMAL, FULL)}
    lo = reports[MINIMAL].per_stage["decode"]["mean_ms"]
    hi = reports[FULL].per_stage["decode"]["mean_ms"]
    print(f"minimal {lo:.2f} ms/image  full {hi:.2f} ms/image  speedup {hi / lo:.2f}x "
          f"({100 * (1 - lo / hi):.1f}% lower latency)", file=sys.stderr)
    out = {p: r.to_dict() for p, r in reports.items()}
    out["speedup"] = hi / lo
    text = json.dumps(out, sort_keys=True, indent=2)
    if args.output:
        with open(args.output, "w") as f:
            f.write(text + "\n")
    print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
