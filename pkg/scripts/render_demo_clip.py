#!/usr/bin/env python3
"""Write the scripted vision demo clip to disk: a frame-directory sequence
(with face-box sidecar) plus glove-training snapshots, ready for
`signtutor train-gloves` and `signtutor extract`.

Usage: python scripts/render_demo_clip.py --out demo/
"""

import argparse
import sys
from pathlib import Path

import numpy as np
from PIL import Image

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from signtutor.ingest import FrameSequence, save_sequence
from signtutor.synth import DemoClipSpec, make_demo_clip


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", required=True)
    ap.add_argument("--frames", type=int, default=60)
    args = ap.parse_args()

    out = Path(args.out)
    clip = make_demo_clip(DemoClipSpec(n_frames=args.frames))
    save_sequence(
        FrameSequence(
            frames=clip.frames, fps=25.0, face_boxes=list(clip.face_boxes), label="demo"
        ),
        out / "sequence",
    )

    snapdir = out / "snapshots"
    snapdir.mkdir(parents=True, exist_ok=True)
    active = [i for i, c in enumerate(clip.left_centers) if c is not None]
    picks = [active[2], active[len(active) // 2], active[-3]]
    for k, i in enumerate(picks):
        Image.fromarray(clip.frames[i]).save(snapdir / f"frame_{k:05d}.png")
        Image.fromarray((clip.left_masks[i] * 255).astype(np.uint8)).save(
            snapdir / f"mask_left_{k:05d}.png"
        )
        Image.fromarray((clip.right_masks[i] * 255).astype(np.uint8)).save(
            snapdir / f"mask_right_{k:05d}.png"
        )
    print(f"wrote {args.frames}-frame sequence to {out / 'sequence'}")
    print(f"wrote {len(picks)} glove-training snapshots to {snapdir}")
    print("next: signtutor train-gloves --snapshots", snapdir, "--out gloves.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
