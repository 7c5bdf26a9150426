"""Write the synthetic JPEG corpora to disk.

    python scripts/make_corpus.py mixed out/mixed --n 120
    python scripts/make_corpus.py square out/sq512 --n 1000 --size 512
"""

from __future__ import annotations

import argparse
import sys

from dctjpeg.corpus import make_corpus, make_square_corpus, write_corpus


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("kind", choices=("mixed", "square"))
    ap.add_argument("out")
    ap.add_argument("--n", type=int, default=None)
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--quality", type=int, default=90)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if args.kind == "mixed":
        entries = make_corpus(args.n or 120, seed=args.seed)
    else:
        entries = make_square_corpus(args.n or 1000, args.size, seed=args.seed, quality=args.quality)
    paths = write_corpus(entries, args.out)
    print(f"wrote {len(paths)} files to {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
