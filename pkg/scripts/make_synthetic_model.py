#!/usr/bin/env python3
"""Generate the planted-structure synthetic layer dump used by the selftest.

Writes layers/, alignments.tsv, and manifest.json under --out.  Useful for
poking at the pipeline without a real model dump.
"""

import argparse
import json

from layerprobe.synthetic import SyntheticSpec, make_synthetic_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--utts", type=int, default=100)
    parser.add_argument("--frames", type=int, default=1500, help="frames per utterance")
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--seed", type=int, default=20240601)
    args = parser.parse_args()

    spec = SyntheticSpec(
        n_utts=args.utts, frames_per_utt=args.frames, dim=args.dim, seed=args.seed
    )
    manifest = make_synthetic_corpus(args.out, spec)
    print(json.dumps(manifest, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
