"""Coefficient-op vs pixel-op PSNR/SSIM for every augmentation.

    python scripts/compare_ops.py                    # table to stderr, JSON to stdout
    python scripts/compare_ops.py --record tests/data/compare_baseline.json
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from dctjpeg.bitstream import decode_to_dct
from dctjpeg.corpus import regression_images
from dctjpeg.twopath import compare_table


def run(n: int = 8) -> dict:
    return {name: compare_table(decode_to_dct(data)[0]) for name, data in regression_images(n)}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--images", type=int, default=8, help="corpus images besides the astronaut crop")
    ap.add_argument("--record", help="write the results here as the regression baseline")
    args = ap.parse_args(argv)
    table = run(args.images)
    ops = list(next(iter(table.values())))
    print(f"{'op':<16}{'psnr':>9}{'ssim':>8}  (mean over images)", file=sys.stderr)
    for op in ops:
        ps = [r[op]["psnr"] for r in table.values()]
        finite = [p for p in ps if p != "inf"]
        mean_psnr = f"{np.mean(finite):9.2f}" if len(finite) == len(ps) else f"{'inf':>9}"
        print(f"{op:<16}{mean_psnr}{np.mean([r[op]['ssim'] for r in table.values()]):8.4f}", file=sys.stderr)
    text = json.dumps(table, sort_keys=True, indent=1)
    if args.record:
        with open(args.record, "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
