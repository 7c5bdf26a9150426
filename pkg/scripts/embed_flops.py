"""Patch-embedding FLOPs for the ViT-Ti / ViT-S configurations at 224x224."""

from __future__ import annotations

import json
import sys

from dctjpeg.embed import GROUPED, EmbedConfig, embed_flops

MODELS = {"Ti": 192, "S": 384}


def table(image_size: int = 224) -> dict:
    out = {}
    for name, dim in MODELS.items():
        cfg = EmbedConfig(GROUPED, 16, dim, use_sub_block_conversion=True)
        out[f"RGB-{name}"] = embed_flops(cfg, image_size, "rgb")
        out[f"JPEG-{name}"] = embed_flops(cfg, image_size, "dct")
    return out


if __name__ == "__main__":
    t = table()
    for k, v in t.items():
        print(f"{k:<8}{v / 1e6:8.1f}M", file=sys.stderr)
    print(json.dumps(t, sort_keys=True))
