#!/usr/bin/env python3
"""Regenerate the 256x256 natural-image cover corpus under tests/data/covers.

Crops are taken from photographs bundled with scikit-image, scikit-learn and
matplotlib, so the corpus can be rebuilt on any machine with those packages.
"""
import argparse
import os
import random

from PIL import Image
import matplotlib
import skimage
import sklearn

SKI = os.path.join(os.path.dirname(skimage.__file__), "data")
SKL = os.path.join(os.path.dirname(sklearn.__file__), "datasets", "images")
MPL = os.path.join(os.path.dirname(matplotlib.__file__), "mpl-data", "sample_data")

SOURCES = [
    os.path.join(MPL, "grace_hopper.jpg"),
    os.path.join(SKL, "china.jpg"),
    os.path.join(SKL, "flower.jpg"),
] + [os.path.join(SKI, f) for f in (
    "astronaut.png", "brick.png", "camera.png", "cell.png", "chelsea.png",
    "clock_motion.png", "coffee.png", "coins.png", "grass.png", "gravel.png",
    "hubble_deep_field.jpg", "ihc.png", "moon.png", "motorcycle_left.png",
    "motorcycle_right.png", "retina.jpg", "rocket.jpg",
)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "tests", "data", "covers"))
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    rng = random.Random(args.seed)
    images = [Image.open(p).convert("RGB") for p in SOURCES]
    for i in range(args.count):
        im = images[i % len(images)]
        w, h = im.size
        side = int(min(w, h) * rng.uniform(0.55, 1.0))
        x = rng.randint(0, w - side)
        y = rng.randint(0, h - side)
        crop = im.crop((x, y, x + side, y + side)).resize((256, 256), Image.LANCZOS)
        crop.save(os.path.join(args.out, f"cover_{i:02d}.png"), optimize=True)


if __name__ == "__main__":
    main()
