"""Bit-depth grid experiment: configuration, synthetic corpus, run loop.

A grid cell is one (signal, coarse bits, fine bits) combination.  For each
cell the harness simulates the two observations, reconstructs with the
dual-branch solver and with the single-branch baseline, and records the
SDR of the raw coarse observation and of both reconstructions, selecting
for each solver the best SDR reached within its iteration budget.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .acquisition import AcquisitionModel, peak_normalize, sdr, simulate_acquisition
from .frames import TfFrame, make_tight_frame
from .quantizers import Quantizer
from .signals import FirFilter, Signal, design_lowpass, pad_to_multiple
from .solvers import SolverConfig, cpa_solve, cva_solve, default_steps
from .wavio import load_wav

__all__ = [
    "ExperimentConfig",
    "GridRow",
    "RESULT_COLUMNS",
    "build_filter",
    "build_frame",
    "padded_length",
    "synth_sparse_signal",
    "synth_corpus",
    "run_grid",
    "write_manifest",
    "read_manifest",
    "taps_digest",
]

logger = logging.getLogger(__name__)

RESULT_COLUMNS = [
    "signal_id",
    "coarse_bits",
    "fine_bits",
    "k",
    "sdr_y2",
    "sdr_cpa",
    "sdr_cva",
    "best_iter",
    "wall_time_s",
]


@dataclass
class ExperimentConfig:
    """Grid experiment settings; mirrors the JSON config file key-for-key."""

    signals: list[str] = field(default_factory=list)
    synth_count: int = 5
    synth_seed: int = 1337
    synth_duration_s: float = 2.0
    synth_rate_hz: int = 16000
    coarse_bits: list[int] = field(default_factory=lambda: list(range(4, 17)))
    fine_bits: list[int] = field(default_factory=lambda: list(range(10, 25)))
    k: int = 4
    filter_taps: int = 129
    filter_beta: float = 8.0
    frame_window: int = 2048
    frame_hop: int = 512
    frame_channels: int = 2048
    rho: float = 1.0
    lam: float | None = None
    max_iters: int = 200
    lambda_table: dict[str, float] = field(default_factory=dict)
    output_dir: str = "grid-results"
    workers: int = 1
    record_timing: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.coarse_bits or not self.fine_bits:
            raise ValueError("coarse_bits and fine_bits must be nonempty")
        for w in [*self.coarse_bits, *self.fine_bits]:
            if not 1 <= int(w) <= 32:
                raise ValueError(f"bit depth {w} outside [1, 32]")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not self.signals and self.synth_count < 1:
            raise ValueError("no input signals: supply paths or synth_count >= 1")
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lam must be positive (or null for the automatic choice)")
        for key in self.lambda_table:
            parts = key.split(",")
            if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
                raise ValueError(
                    f'lambda_table keys must look like "coarse,fine"; got {key!r}'
                )

    def lambda_for(self, coarse: int, fine: int) -> float:
        """l1 weight for a grid cell: per-cell table entry, then the global
        override, then half the coarse quantization step.

        The automatic choice scales the sparsity pressure with the
        quantization noise, which keeps the 200-iteration protocol
        productive across the whole bit-depth grid.
        """
        key = f"{coarse},{fine}"
        if key in self.lambda_table:
            return float(self.lambda_table[key])
        if self.lam is not None:
            return float(self.lam)
        return 2.0 ** (1 - coarse) / 2.0

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(dataclasses.asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


@dataclass
class GridRow:
    signal_id: str
    coarse_bits: int
    fine_bits: int
    k: int
    sdr_y2: float | None
    sdr_cpa: float | None
    sdr_cva: float | None
    best_iter: int | None
    wall_time_s: float | None


def build_filter(k: int, num_taps: int = 129, beta: float = 8.0) -> FirFilter:
    """Anti-aliasing filter for factor ``k``; unit impulse when k == 1."""
    if k == 1:
        return FirFilter(np.array([1.0]))
    return design_lowpass(k, num_taps, beta)


def padded_length(length: int, k: int, hop: int, channels: int) -> int:
    """Smallest admissible signal length >= ``length`` for the pipeline."""
    base = math.lcm(k, hop, channels)
    return ((length + base - 1) // base) * base


def build_frame(signal_len: int, window: int, hop: int, channels: int) -> TfFrame:
    return make_tight_frame(window, hop, channels, signal_len)


def synth_sparse_signal(rng: np.random.Generator, duration_s: float, rate_hz: int) -> Signal:
    """Random sum of 5..20 decaying sinusoids, peak-normalized.

    Frequencies are log-uniform between 60 Hz and 0.45 * rate, amplitudes
    uniform, each component damped with its own exponential envelope, so
    the result is sparse under a time-frequency transform.
    """
    n = int(round(duration_s * rate_hz))
    if n < 1:
        raise ValueError("duration too short for the sample rate")
    t = np.arange(n) / rate_hz
    count = int(rng.integers(5, 21))
    log_lo, log_hi = np.log(60.0), np.log(0.45 * rate_hz)
    freqs = np.exp(rng.uniform(log_lo, log_hi, size=count))
    amps = rng.uniform(0.05, 1.0, size=count)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=count)
    decays = rng.uniform(0.3, 2.0, size=count)
    x = np.zeros(n)
    for a, f, ph, tc in zip(amps, freqs, phases, decays):
        x += a * np.exp(-t / tc) * np.sin(2.0 * np.pi * f * t + ph)
    return peak_normalize(Signal(x, rate_hz))


def synth_corpus(
    count: int, seed: int, duration_s: float, rate_hz: int
) -> list[tuple[str, Signal]]:
    rng = np.random.default_rng(seed)
    return [
        (f"synthetic-{i:03d}", synth_sparse_signal(rng, duration_s, rate_hz))
        for i in range(count)
    ]


def _load_corpus(cfg: ExperimentConfig) -> list[tuple[str, Signal]]:
    corpus: list[tuple[str, Signal]] = []
    for path in cfg.signals:
        p = Path(path)
        if not p.exists():
            raise ValueError(f"input signal not found: {p}")
        corpus.append((p.stem, load_wav(p)))
    if cfg.synth_count >= 1 and not cfg.signals:
        corpus.extend(
            synth_corpus(cfg.synth_count, cfg.synth_seed, cfg.synth_duration_s, cfg.synth_rate_hz)
        )
    return corpus


def _run_cell(
    signal_id: str,
    x_pad: Signal,
    frame: TfFrame,
    fir: FirFilter,
    cfg: ExperimentConfig,
    coarse: int,
    fine: int,
) -> GridRow:
    start = time.perf_counter()
    try:
        model = AcquisitionModel(fir, cfg.k, Quantizer(fine), Quantizer(coarse))
        y1, y2 = simulate_acquisition(x_pad, model)
        lam = cfg.lambda_for(coarse, fine)
        tau, sigma = default_steps(fir)
        cva_cfg = SolverConfig(tau, sigma, rho=cfg.rho, lam=lam, max_iters=cfg.max_iters)
        cpa_cfg = SolverConfig(1.0, 1.0, rho=cfg.rho, lam=lam, max_iters=cfg.max_iters)
        sdr_y2 = sdr(x_pad, y2)
        cva_run = cva_solve(y1, y2, model, frame, cva_cfg, reference=x_pad)
        cpa_run = cpa_solve(y2, model.coarse, frame, cpa_cfg, reference=x_pad)
        elapsed = time.perf_counter() - start
        return GridRow(
            signal_id=signal_id,
            coarse_bits=coarse,
            fine_bits=fine,
            k=cfg.k,
            sdr_y2=sdr_y2,
            sdr_cpa=float(np.max(cpa_run.sdr_trace)),
            sdr_cva=float(np.max(cva_run.sdr_trace)),
            best_iter=cva_run.best_sdr_iter,
            wall_time_s=elapsed if cfg.record_timing else None,
        )
    except ValueError as exc:
        logger.warning(
            "grid cell (%s, coarse=%d, fine=%d) failed: %s", signal_id, coarse, fine, exc
        )
        return GridRow(signal_id, coarse, fine, cfg.k, None, None, None, None, None)


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_results(rows: list[GridRow], path: Path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.signal_id,
                    row.coarse_bits,
                    row.fine_bits,
                    row.k,
                    _format(row.sdr_y2),
                    _format(row.sdr_cpa),
                    _format(row.sdr_cva),
                    _format(row.best_iter),
                    _format(row.wall_time_s),
                ]
            )


def _write_averages(rows: list[GridRow], path: Path) -> None:
    groups: dict[tuple[int, int], list[GridRow]] = {}
    for row in rows:
        groups.setdefault((row.coarse_bits, row.fine_bits), []).append(row)
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["coarse_bits", "fine_bits", "k", "n_signals", "mean_sdr_y2", "mean_sdr_cpa", "mean_sdr_cva"]
        )
        for (coarse, fine), members in sorted(groups.items()):
            done = [r for r in members if r.sdr_cva is not None]
            if done:
                means = [
                    repr(float(np.mean([r.sdr_y2 for r in done]))),
                    repr(float(np.mean([r.sdr_cpa for r in done]))),
                    repr(float(np.mean([r.sdr_cva for r in done]))),
                ]
            else:
                means = ["", "", ""]
            writer.writerow([coarse, fine, members[0].k, len(done), *means])


def run_grid(cfg: ExperimentConfig) -> list[GridRow]:
    """Run the full bit-depth grid and write results.csv / averages.csv.

    Failed cells are kept as rows with empty metric fields.  Rows are
    sorted before writing, so the output is independent of scheduling.
    """
    cfg.validate()
    corpus = _load_corpus(cfg)
    if not corpus:
        raise ValueError("experiment corpus is empty")
    fir = build_filter(cfg.k, cfg.filter_taps, cfg.filter_beta)
    frames: dict[int, TfFrame] = {}

    jobs = []
    for signal_id, x in corpus:
        x = peak_normalize(x)
        target = padded_length(len(x), cfg.k, cfg.frame_hop, cfg.frame_channels)
        x_pad = pad_to_multiple(x, target)
        if target not in frames:
            frames[target] = build_frame(
                target, cfg.frame_window, cfg.frame_hop, cfg.frame_channels
            )
        for coarse in cfg.coarse_bits:
            for fine in cfg.fine_bits:
                jobs.append((signal_id, x_pad, frames[target], coarse, fine))

    def run(job) -> GridRow:
        signal_id, x_pad, frame, coarse, fine = job
        return _run_cell(signal_id, x_pad, frame, fir, cfg, coarse, fine)

    if cfg.workers == 1:
        rows = [run(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(run, jobs))

    rows.sort(key=lambda r: (r.signal_id, r.coarse_bits, r.fine_bits))
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_results(rows, outdir / "results.csv")
    _write_averages(rows, outdir / "averages.csv")
    return rows


def taps_digest(fir: FirFilter) -> str:
    return hashlib.sha256(fir.taps.tobytes()).hexdigest()


def write_manifest(path, manifest: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
