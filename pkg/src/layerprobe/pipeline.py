"""Config-driven experiment orchestration and report emission.

Each experiment recipe maps a directory of per-utterance layer dumps (plus
alignments, audio, or embedding tables as needed) to one value per
(layer, sample set), aggregated into a LayerReport and written as curve.csv
plus report.json.  Every random draw derives from (seed, set index), so a
rerun with the same config is bytewise reproducible regardless of thread
count.
"""

from __future__ import annotations

import json
import os
import tempfile
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from jsonschema import ValidationError, validate

from . import __version__
from .cca import cca_similarity
from .cluster_mi import KMeansConfig, mi_probe
from .dsp import FbankConfig, align_streams, log_mel_spectrogram, read_wav
from .errors import AlignmentError, DataError, FormatError, InputError
from .scoring import word_discrimination_ap, word_similarity_eval
from .segments import (
    SamplePlan,
    build_pooled_set,
    draw_sample_sets,
    filter_word_records,
    type_embeddings,
)
from .synthetic import PEAK_LAYER, TROUGH_LAYER, SyntheticSpec, make_synthetic_corpus
from .tensor_io import (
    matrix_shape,
    read_alignments,
    read_embedding_table,
    read_matrix,
    read_wordsim_benchmark,
)

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "LayerReport",
    "load_config",
    "discover_layers",
    "run_experiment",
    "emit_report",
    "load_report",
    "selftest",
]

EXPERIMENTS = (
    "cca_intra",
    "cca_inter",
    "cca_mel",
    "cca_agwe",
    "cca_glove",
    "mi_phone",
    "mi_word",
    "word_disc",
    "word_sim",
)

DEFAULT_K = {"mi_phone": 500, "mi_word": 5000}

# offset added to the sample seed for the dev-set draw stream, keeping it
# disjoint from the train stream without a second config knob
DEV_SEED_OFFSET = 104729

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment", "paths", "sample_plan"],
    "properties": {
        "experiment": {"enum": list(EXPERIMENTS)},
        "paths": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "layers_root": {"type": "string"},
                "layers_root_b": {"type": "string"},
                "alignments": {"type": "string"},
                "audio_root": {"type": "string"},
                "embeddings": {"type": "string"},
                "benchmarks": {"type": "array", "items": {"type": "string"}},
            },
        },
        "sample_plan": {
            "type": "object",
            "additionalProperties": False,
            "required": ["seed", "target"],
            "properties": {
                "seed": {"type": "integer"},
                "target": {"type": "integer", "minimum": 1},
                "n_sets": {"type": "integer", "minimum": 1},
                "balancing": {"enum": ["uniform", "per_label_equal"]},
            },
        },
        "probe": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k": {"type": "integer", "minimum": 1},
                "eps": {"type": "number", "exclusiveMinimum": 0},
                "min_chars": {"type": "integer", "minimum": 0},
                "min_dur_s": {"type": "number", "minimum": 0},
                "dev_target": {"type": "integer", "minimum": 1},
                "batch_size": {"type": "integer", "minimum": 1},
                "iters": {"type": "integer", "minimum": 1},
            },
        },
        "output_dir": {"type": "string"},
        "model_tag": {"type": "string"},
    },
}

REQUIRED_PATHS = {
    "cca_intra": ("layers_root",),
    "cca_inter": ("layers_root", "layers_root_b"),
    "cca_mel": ("layers_root", "audio_root"),
    "cca_agwe": ("layers_root", "alignments", "embeddings"),
    "cca_glove": ("layers_root", "alignments", "embeddings"),
    "mi_phone": ("layers_root", "alignments"),
    "mi_word": ("layers_root", "alignments"),
    "word_disc": ("layers_root", "alignments"),
    "word_sim": ("layers_root", "alignments", "benchmarks"),
}


@dataclass
class ExperimentConfig:
    experiment: str
    sample_plan: SamplePlan
    layers_root: Path | None = None
    layers_root_b: Path | None = None
    alignments: Path | None = None
    audio_root: Path | None = None
    embeddings: Path | None = None
    benchmarks: tuple[Path, ...] = ()
    k: int | None = None
    eps: float = 1e-8
    min_chars: int = 5
    min_dur_s: float = 0.5
    dev_target: int = 2500
    batch_size: int = 1024
    iters: int | None = None
    output_dir: Path | None = None
    model_tag: str = "model"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InputError(f"unknown experiment {self.experiment!r}")
        missing = [
            name
            for name in REQUIRED_PATHS[self.experiment]
            if not getattr(self, name)
        ]
        if missing:
            raise InputError(
                f"{self.experiment} requires paths: {', '.join(missing)}"
            )

    @property
    def resolved_k(self) -> int:
        if self.k is not None:
            return self.k
        return DEFAULT_K.get(self.experiment, 0)

    def echo(self) -> dict:
        return {
            "experiment": self.experiment,
            "paths": {
                "layers_root": str(self.layers_root) if self.layers_root else None,
                "layers_root_b": str(self.layers_root_b) if self.layers_root_b else None,
                "alignments": str(self.alignments) if self.alignments else None,
                "audio_root": str(self.audio_root) if self.audio_root else None,
                "embeddings": str(self.embeddings) if self.embeddings else None,
                "benchmarks": [str(b) for b in self.benchmarks],
            },
            "sample_plan": {
                "seed": self.sample_plan.seed,
                "target": self.sample_plan.target,
                "n_sets": self.sample_plan.n_sets,
                "balancing": self.sample_plan.balancing,
            },
            "probe": {
                "k": self.k,
                "eps": self.eps,
                "min_chars": self.min_chars,
                "min_dur_s": self.min_dur_s,
                "dev_target": self.dev_target,
                "batch_size": self.batch_size,
                "iters": self.iters,
            },
            "model_tag": self.model_tag,
        }


def load_config(path) -> ExperimentConfig:
    """Parse and validate a JSON recipe; relative paths resolve against the file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    try:
        validate(raw, CONFIG_SCHEMA)
    except ValidationError as exc:
        raise FormatError(f"{path}: {exc.message} (at {'/'.join(map(str, exc.path))})") from exc

    base = path.parent

    def resolve(p):
        return (base / p).resolve() if p else None

    paths = raw["paths"]
    plan_raw = raw["sample_plan"]
    probe = raw.get("probe", {})
    return ExperimentConfig(
        experiment=raw["experiment"],
        sample_plan=SamplePlan(
            seed=plan_raw["seed"],
            target=plan_raw["target"],
            n_sets=plan_raw.get("n_sets", 4),
            balancing=plan_raw.get("balancing", "uniform"),
        ),
        layers_root=resolve(paths.get("layers_root")),
        layers_root_b=resolve(paths.get("layers_root_b")),
        alignments=resolve(paths.get("alignments")),
        audio_root=resolve(paths.get("audio_root")),
        embeddings=resolve(paths.get("embeddings")),
        benchmarks=tuple(resolve(b) for b in paths.get("benchmarks", [])),
        k=probe.get("k"),
        eps=probe.get("eps", 1e-8),
        min_chars=probe.get("min_chars", 5),
        min_dur_s=probe.get("min_dur_s", 0.5),
        dev_target=probe.get("dev_target", 2500),
        batch_size=probe.get("batch_size", 1024),
        iters=probe.get("iters"),
        output_dir=resolve(raw.get("output_dir")),
        model_tag=raw.get("model_tag", "model"),
    )


@dataclass(frozen=True)
class LayerSet:
    """A discovered dump: per-utterance directories of layer_<i>.npy files."""

    root: Path
    utt_ids: tuple[str, ...]
    n_layers: int

    def path(self, utt_id: str, layer: int) -> Path:
        return self.root / utt_id / f"layer_{layer}.npy"


def discover_layers(root) -> LayerSet:
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"{root}: not a directory")
    utt_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not utt_dirs:
        raise DataError(f"{root}: no utterance directories found")
    n_layers = None
    for d in utt_dirs:
        indices = set()
        for f in d.glob("layer_*.npy"):
            stem = f.name[len("layer_") : -len(".npy")]
            if stem.isdigit():
                indices.add(int(stem))
        if not indices or indices != set(range(max(indices) + 1)):
            raise FormatError(f"{d}: layer files must be contiguous layer_0..layer_L, got {sorted(indices)}")
        count = max(indices) + 1
        if n_layers is None:
            n_layers = count
        elif n_layers != count:
            raise FormatError(f"{d}: has {count} layers but earlier utterances have {n_layers}")
    return LayerSet(root=root, utt_ids=tuple(d.name for d in utt_dirs), n_layers=n_layers)


def _frame_counts(ls: LayerSet) -> list[int]:
    return [matrix_shape(ls.path(u, 0))[0] for u in ls.utt_ids]


def _sample_rows(counts, target, rng) -> np.ndarray:
    total = int(sum(counts))
    if total <= target:
        if total < target:
            warnings.warn(f"only {total} frames available for target {target}; taking all", stacklevel=2)
        return np.arange(total)
    return np.sort(rng.choice(total, size=target, replace=False))


def _gather_rows(ls: LayerSet, layer: int, counts, selection: np.ndarray) -> np.ndarray:
    """Rows of the virtual concatenated layer matrix at the selected global indices."""
    blocks = []
    offset = 0
    for utt_id, n in zip(ls.utt_ids, counts):
        local = selection[(selection >= offset) & (selection < offset + n)] - offset
        if local.size:
            m = read_matrix(ls.path(utt_id, layer))
            if m.n != n:
                raise AlignmentError(
                    f"{ls.path(utt_id, layer)}: {m.n} rows but layer 0 has {n}"
                )
            blocks.append(m.data[local])
        offset += n
    return np.vstack(blocks)


def _load_matrices(ls: LayerSet, layer: int, utt_ids) -> dict:
    return {u: read_matrix(ls.path(u, layer)) for u in sorted(set(utt_ids))}


def _run_tasks(fn, n_layers: int, n_sets: int, threads: int) -> np.ndarray:
    """Evaluate fn(layer, set) for the full grid, in parallel when asked."""
    values = np.empty((n_layers, n_sets))
    tasks = [(l, s) for s in range(n_sets) for l in range(n_layers)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for (l, s), v in zip(tasks, pool.map(lambda t: fn(*t), tasks)):
                values[l, s] = v
    else:
        for l, s in tasks:
            values[l, s] = fn(l, s)
    return values


@dataclass
class LayerReport:
    """Per-layer metric values across sample sets, plus aggregate curves."""

    metric: str
    model_tag: str
    n_sets: int
    values: list[list[float]]
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_sets < 1:
            raise InputError(f"n_sets must be >= 1, got {self.n_sets}")
        if not self.values or any(len(row) != self.n_sets for row in self.values):
            raise InputError("values must be a non-empty layer x set grid")

    @property
    def n_layers(self) -> int:
        return len(self.values)

    @property
    def means(self) -> list[float]:
        return [float(np.mean(row)) for row in self.values]

    @property
    def spreads(self) -> list[float]:
        return [float(np.max(row) - np.min(row)) for row in self.values]


def _values_report(cfg: ExperimentConfig, values: np.ndarray, extras=None) -> LayerReport:
    return LayerReport(
        metric=cfg.experiment,
        model_tag=cfg.model_tag,
        n_sets=cfg.sample_plan.n_sets,
        values=[[float(v) for v in row] for row in values],
        extras=extras or {},
    )


def _run_cca_intra(cfg: ExperimentConfig, threads: int) -> LayerReport:
    ls = discover_layers(cfg.layers_root)
    counts = _frame_counts(ls)
    plan = cfg.sample_plan
    selections = {
        s: _sample_rows(counts, plan.target, np.random.default_rng((plan.seed, s)))
        for s in range(plan.n_sets)
    }
    refs = {s: _gather_rows(ls, 0, counts, sel) for s, sel in selections.items()}

    def value(layer, s):
        x = refs[s] if layer == 0 else _gather_rows(ls, layer, counts, selections[s])
        return cca_similarity(x, refs[s], cfg.eps)

    return _values_report(cfg, _run_tasks(value, ls.n_layers, plan.n_sets, threads))


def _run_cca_inter(cfg: ExperimentConfig, threads: int) -> LayerReport:
    ls_a = discover_layers(cfg.layers_root)
    ls_b = discover_layers(cfg.layers_root_b)
    if ls_a.utt_ids != ls_b.utt_ids:
        raise AlignmentError("the two dumps cover different utterance sets")
    if ls_a.n_layers != ls_b.n_layers:
        raise AlignmentError(
            f"layer count mismatch: {ls_a.n_layers} vs {ls_b.n_layers}"
        )
    counts = _frame_counts(ls_a)
    counts_b = _frame_counts(ls_b)
    if counts != counts_b:
        raise AlignmentError("per-utterance frame counts differ between the two dumps")
    plan = cfg.sample_plan
    selections = {
        s: _sample_rows(counts, plan.target, np.random.default_rng((plan.seed, s)))
        for s in range(plan.n_sets)
    }

    def value(layer, s):
        a = _gather_rows(ls_a, layer, counts, selections[s])
        b = _gather_rows(ls_b, layer, counts, selections[s])
        return cca_similarity(a, b, cfg.eps)

    return _values_report(cfg, _run_tasks(value, ls_a.n_layers, plan.n_sets, threads))


def _run_cca_mel(cfg: ExperimentConfig, threads: int) -> LayerReport:
    ls = discover_layers(cfg.layers_root)
    counts = _frame_counts(ls)
    fbanks, aligned_counts = [], []
    for utt_id, n in zip(ls.utt_ids, counts):
        wav_path = Path(cfg.audio_root) / f"{utt_id}.wav"
        waveform, rate = read_wav(wav_path)
        fbank = log_mel_spectrogram(waveform, FbankConfig(sample_rate_hz=rate))
        layer0 = read_matrix(ls.path(utt_id, 0))
        if layer0.frame_spec is None:
            raise InputError(f"{ls.path(utt_id, 0)}: missing frame timing sidecar")
        fbank_red, _ = align_streams(fbank, layer0)
        fbanks.append(fbank_red.data)
        aligned_counts.append(fbank_red.n)

    plan = cfg.sample_plan
    selections = {
        s: _sample_rows(aligned_counts, plan.target, np.random.default_rng((plan.seed, s)))
        for s in range(plan.n_sets)
    }
    fbank_all = np.vstack(fbanks)
    offsets = np.cumsum([0] + aligned_counts[:-1])
    refs = {s: fbank_all[sel] for s, sel in selections.items()}

    def gather_layer(layer, selection):
        blocks = []
        for utt_id, off, t in zip(ls.utt_ids, offsets, aligned_counts):
            local = selection[(selection >= off) & (selection < off + t)] - off
            if local.size:
                blocks.append(read_matrix(ls.path(utt_id, layer)).data[:t][local])
        return np.vstack(blocks)

    def value(layer, s):
        return cca_similarity(gather_layer(layer, selections[s]), refs[s], cfg.eps)

    return _values_report(cfg, _run_tasks(value, ls.n_layers, plan.n_sets, threads))


def _word_records(cfg: ExperimentConfig):
    records = [r for r in read_alignments(cfg.alignments) if r.kind == "word"]
    if not records:
        raise DataError(f"{cfg.alignments}: no word records")
    return records


def _phone_records(cfg: ExperimentConfig):
    records = [r for r in read_alignments(cfg.alignments) if r.kind == "phone"]
    if not records:
        raise DataError(f"{cfg.alignments}: no phone records")
    return records


def _split_by_utterance(ls: LayerSet, records):
    """Deterministic 3:1 train/dev split on sorted utterance IDs."""
    dev_utts = set(ls.utt_ids[3::4])
    train = [r for r in records if r.utterance_id not in dev_utts]
    dev = [r for r in records if r.utterance_id in dev_utts]
    if not train or not dev:
        raise DataError("utterance split produced an empty train or dev side")
    return train, dev


def _run_mi(cfg: ExperimentConfig, threads: int) -> LayerReport:
    ls = discover_layers(cfg.layers_root)
    kind = "phone" if cfg.experiment == "mi_phone" else "word"
    records = _phone_records(cfg) if kind == "phone" else _word_records(cfg)
    train_pool, dev_pool = _split_by_utterance(ls, records)
    plan = cfg.sample_plan
    train_sets = draw_sample_sets(train_pool, plan)
    dev_plan = SamplePlan(
        seed=plan.seed + DEV_SEED_OFFSET,
        target=cfg.dev_target,
        n_sets=plan.n_sets,
        balancing="uniform",
    )
    dev_sets = draw_sample_sets(dev_pool, dev_plan)
    k = cfg.resolved_k
    h_labels = [None] * plan.n_sets

    def value(layer, s):
        train_mats = _load_matrices(ls, layer, (r.utterance_id for r in train_sets[s]))
        dev_mats = _load_matrices(ls, layer, (r.utterance_id for r in dev_sets[s]))
        train = build_pooled_set(train_mats, train_sets[s], kind)
        dev = build_pooled_set(dev_mats, dev_sets[s], kind)
        result = mi_probe(
            train,
            dev,
            k,
            KMeansConfig(
                batch_size=cfg.batch_size,
                iters=cfg.iters,
                seed=plan.seed * 10007 + s,
            ),
        )
        h_labels[s] = result.h_label
        return result.mi_nats

    values = _run_tasks(value, ls.n_layers, plan.n_sets, threads)
    return _values_report(cfg, values, extras={"h_label": [float(h) for h in h_labels]})


def _run_word_disc(cfg: ExperimentConfig, threads: int) -> LayerReport:
    ls = discover_layers(cfg.layers_root)
    records = filter_word_records(_word_records(cfg), cfg.min_chars, cfg.min_dur_s)
    if not records:
        raise DataError("no word records survive the length/duration filters")
    sets = draw_sample_sets(records, cfg.sample_plan)

    def value(layer, s):
        mats = _load_matrices(ls, layer, (r.utterance_id for r in sets[s]))
        pooled = build_pooled_set(mats, sets[s], "word")
        return word_discrimination_ap(pooled)["ap"]

    values = _run_tasks(value, ls.n_layers, cfg.sample_plan.n_sets, threads)
    return _values_report(cfg, values)


def _run_word_sim(cfg: ExperimentConfig, threads: int) -> LayerReport:
    ls = discover_layers(cfg.layers_root)
    records = _word_records(cfg)
    benchmarks = [read_wordsim_benchmark(b) for b in cfg.benchmarks]
    sets = draw_sample_sets(records, cfg.sample_plan)

    def value(layer, s):
        mats = _load_matrices(ls, layer, (r.utterance_id for r in sets[s]))
        table = type_embeddings(build_pooled_set(mats, sets[s], "word"))
        rhos = [word_similarity_eval(table, bench)["rho"] for bench in benchmarks]
        return float(np.mean(rhos))

    values = _run_tasks(value, ls.n_layers, cfg.sample_plan.n_sets, threads)
    return _values_report(
        cfg, values, extras={"benchmarks": [b.name for b in benchmarks]}
    )


def _run_cca_embeddings(cfg: ExperimentConfig, threads: int) -> LayerReport:
    ls = discover_layers(cfg.layers_root)
    table = read_embedding_table(cfg.embeddings)

    def lookup(label):
        if label in table:
            return table[label]
        return table.get(label.lower())

    records = [r for r in _word_records(cfg) if lookup(r.label) is not None]
    if not records:
        raise DataError("no word records are covered by the embedding table")
    sets = draw_sample_sets(records, cfg.sample_plan)

    def value(layer, s):
        mats = _load_matrices(ls, layer, (r.utterance_id for r in sets[s]))
        pooled = build_pooled_set(mats, sets[s], "word")
        targets = np.vstack([lookup(label) for label in pooled.labels])
        return cca_similarity(pooled.vectors, targets, cfg.eps)

    values = _run_tasks(value, ls.n_layers, cfg.sample_plan.n_sets, threads)
    return _values_report(cfg, values)


_RUNNERS = {
    "cca_intra": _run_cca_intra,
    "cca_inter": _run_cca_inter,
    "cca_mel": _run_cca_mel,
    "cca_agwe": _run_cca_embeddings,
    "cca_glove": _run_cca_embeddings,
    "mi_phone": _run_mi,
    "mi_word": _run_mi,
    "word_disc": _run_word_disc,
    "word_sim": _run_word_sim,
}


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> LayerReport:
    """Execute one recipe over every (layer, sample set) pair."""
    return _RUNNERS[cfg.experiment](cfg, threads)


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_report(report: LayerReport, out_dir, config_echo=None, overwrite=False) -> dict:
    """Write curve.csv and report.json under out_dir; refuse silent overwrites."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curve_path = out_dir / "curve.csv"
    json_path = out_dir / "report.json"
    if not overwrite:
        for p in (curve_path, json_path):
            if p.exists():
                raise FileExistsError(f"{p} exists; pass overwrite to replace it")

    header = ["layer", "mean", "spread"] + [f"set_{s}" for s in range(report.n_sets)]
    lines = [",".join(header)]
    for layer, row in enumerate(report.values):
        mean = repr(float(np.mean(row)))
        spread = repr(float(np.max(row) - np.min(row)))
        lines.append(",".join([str(layer), mean, spread] + [repr(v) for v in row]))
    _atomic_write(curve_path, "\n".join(lines) + "\n")

    payload = {
        "metric": report.metric,
        "model_tag": report.model_tag,
        "n_sets": report.n_sets,
        "values": report.values,
        "extras": report.extras,
        "config": config_echo,
        "version": __version__,
    }
    _atomic_write(json_path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return {"curve": curve_path, "report": json_path}


def load_report(path) -> LayerReport:
    path = Path(path)
    raw = json.loads(path.read_text())
    return LayerReport(
        metric=raw["metric"],
        model_tag=raw["model_tag"],
        n_sets=raw["n_sets"],
        values=raw["values"],
        extras=raw.get("extras", {}),
    )


SELFTEST_BANDS = {"cca_intra": 0.02, "mi_phone": 0.07, "word_disc": 0.02}


def selftest(workdir, threads: int = 1) -> tuple[bool, list[str], dict]:
    """Generate a synthetic corpus, run three probes, and check planted structure.

    Returns (all_passed, human-readable check lines, reports by experiment).
    """
    workdir = Path(workdir)
    t0 = time.perf_counter()
    corpus = make_synthetic_corpus(workdir / "corpus", SyntheticSpec())
    layers_root = corpus["layers_root"]
    alignments = corpus["alignments"]

    configs = {
        "cca_intra": ExperimentConfig(
            experiment="cca_intra",
            sample_plan=SamplePlan(seed=11, target=15_000, n_sets=4),
            layers_root=Path(layers_root),
        ),
        "mi_phone": ExperimentConfig(
            experiment="mi_phone",
            sample_plan=SamplePlan(
                seed=12, target=12_000, n_sets=4, balancing="per_label_equal"
            ),
            layers_root=Path(layers_root),
            alignments=Path(alignments),
            k=100,
            dev_target=5_000,
            batch_size=8192,
        ),
        "word_disc": ExperimentConfig(
            experiment="word_disc",
            sample_plan=SamplePlan(
                seed=13, target=4_500, n_sets=4, balancing="per_label_equal"
            ),
            layers_root=Path(layers_root),
            alignments=Path(alignments),
            min_dur_s=0.15,
        ),
    }
    reports = {}
    for name, cfg in configs.items():
        reports[name] = run_experiment(cfg, threads=threads)
        emit_report(reports[name], workdir / f"out_{name}", cfg.echo(), overwrite=True)

    elapsed = time.perf_counter() - t0
    checks = []

    cca_means = reports["cca_intra"].means
    got_trough = int(np.argmin(cca_means))
    checks.append((got_trough == TROUGH_LAYER, f"cca_intra minimum at layer {got_trough} (planted {TROUGH_LAYER})"))

    mi_means = reports["mi_phone"].means
    got_peak = int(np.argmax(mi_means))
    checks.append((got_peak == PEAK_LAYER, f"mi_phone maximum at layer {got_peak} (planted {PEAK_LAYER})"))

    for name, band in SELFTEST_BANDS.items():
        worst = max(reports[name].spreads)
        checks.append((worst < band, f"{name} sample-set spread {worst:.4f} < {band}"))

    checks.append((elapsed < 120.0, f"runtime {elapsed:.1f} s < 120 s"))

    lines = [("PASS " if ok else "FAIL ") + msg for ok, msg in checks]
    return all(ok for ok, _ in checks), lines, reports
