#!/usr/bin/env python3
"""Run the three selftest probes on a synthetic dump and print the layer curves.

Generates the corpus under --workdir if it is not already there, then runs
cca_intra, mi_phone, and word_disc, writing curve.csv/report.json per probe
and printing an aligned table of per-layer means and spreads.
"""

import argparse
from pathlib import Path

from layerprobe.pipeline import ExperimentConfig, emit_report, run_experiment
from layerprobe.segments import SamplePlan
from layerprobe.synthetic import SyntheticSpec, make_synthetic_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--workdir", required=True)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, default=11, help="base sample seed")
    args = parser.parse_args()

    workdir = Path(args.workdir)
    corpus_dir = workdir / "corpus"
    if not (corpus_dir / "manifest.json").exists():
        make_synthetic_corpus(corpus_dir, SyntheticSpec())
    layers_root = corpus_dir / "layers"
    alignments = corpus_dir / "alignments.tsv"

    configs = {
        "cca_intra": ExperimentConfig(
            experiment="cca_intra",
            sample_plan=SamplePlan(seed=args.seed, target=15_000, n_sets=4),
            layers_root=layers_root,
        ),
        "mi_phone": ExperimentConfig(
            experiment="mi_phone",
            sample_plan=SamplePlan(
                seed=args.seed + 1, target=12_000, n_sets=4, balancing="per_label_equal"
            ),
            layers_root=layers_root,
            alignments=alignments,
            k=100,
            dev_target=5_000,
            batch_size=8192,
        ),
        "word_disc": ExperimentConfig(
            experiment="word_disc",
            sample_plan=SamplePlan(
                seed=args.seed + 2, target=4_500, n_sets=4, balancing="per_label_equal"
            ),
            layers_root=layers_root,
            alignments=alignments,
            min_dur_s=0.15,
        ),
    }

    reports = {}
    for name, cfg in configs.items():
        reports[name] = run_experiment(cfg, threads=args.threads)
        emit_report(reports[name], workdir / f"out_{name}", cfg.echo(), overwrite=True)
        print(f"{name}: wrote {workdir / f'out_{name}' / 'curve.csv'}")

    names = list(reports)
    print("\nlayer  " + "  ".join(f"{n:>18s}" for n in names))
    n_layers = reports[names[0]].n_layers
    for layer in range(n_layers):
        cells = []
        for n in names:
            r = reports[n]
            cells.append(f"{r.means[layer]:8.4f} +-{r.spreads[layer] / 2:6.4f}")
        print(f"{layer:5d}  " + "  ".join(f"{c:>18s}" for c in cells))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
