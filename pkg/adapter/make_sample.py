#!/usr/bin/env python3
"""Regenerate data/queue_sample.png: five copies of a public-domain photograph
of a person tiled side by side, standing in for a five-person queue."""

from pathlib import Path

from PIL import Image
from skimage import data

OUT = Path(__file__).parent / "data" / "queue_sample.png"


def main() -> None:
    person = Image.fromarray(data.astronaut()).resize((256, 256), Image.LANCZOS)
    strip = Image.new("RGB", (256 * 5, 256), (255, 255, 255))
    for i in range(5):
        tile = person.transpose(Image.FLIP_LEFT_RIGHT) if i % 2 else person
        strip.paste(tile, (256 * i, 0))
    OUT.parent.mkdir(parents=True, exist_ok=True)
    strip.save(OUT, format="PNG")
    print(f"wrote {OUT} ({strip.width}x{strip.height})")


if __name__ == "__main__":
    main()
