"""
Analysis Runner: ingest → dynamics → embed → acoustics → report.

Per-piece work runs in a process pool; everything that combines pieces runs afterwards in
one process, in piece-id order. A failing piece is logged and left out; it never changes the
numbers computed for other pieces.
"""

from __future__ import annotations

import json
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from utils.run_logger import RunLogger

from .. import __version__
from ..analysis.acoustics import (
    band_frequencies,
    carrier_spectrum,
    check_envelope,
    decimate_envelope,
    demodulate,
    scalogram,
    spectral_slope,
    synthesize,
    write_wav,
    zscore,
)
from ..analysis.dynamics import (
    PieceDynamics,
    build_feature_matrix,
    corpus_dynamics,
    dynamics_table,
    feature_matrix_table,
    learn_sequences,
    symbolize_piece,
)
from ..analysis.embedding import embedding_table, tsne
from ..analysis.rates import detect_troughs, horizontal_rates, rate_density
from ..corpus.csv_reader import write_piece_csv
from ..corpus.manifest import load_piece, read_manifest
from ..corpus.symbolize import symbol_sequence_json
from ..errors import AnalysisError, PipelineError, TooFewCycles
from ..learning.hbsl_model import model_snapshot
from ..schema.core_schema import RowMetadata, Waveform
from ..schema.run_config import RunConfig
from ..schema.schema_config import ALL_DOMAINS, ALL_MEASURES, LearningMode, Stage
from .reports import (
    AcousticSummary,
    OutputWriter,
    RunOutputs,
    band_power_table,
    carrier_peaks_table,
    cycles_table,
    density_table,
    group_report,
    rates_table,
    scalogram_table,
    write_group_report,
)


console = Console()

STATUS_OK = "ok"
STATUS_PARTIAL = "partial"
STATUS_FAILED = "failed"
STATUS_SKIPPED = "skipped"

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2

RUN_LOG = "run_log.jsonl"
RUN_MANIFEST = "run_manifest.json"
ERROR_REPORT = "error_report.json"


class RunReport(BaseModel):
    """Outcome of one run."""
    config_hash: str
    stages: Dict[str, str] = Field(default_factory=dict)
    warnings: List[str] = Field(default_factory=list)
    piece_errors: Dict[str, str] = Field(default_factory=dict)
    wall_time_sec: float = 0.0
    outputs: List[str] = Field(default_factory=list)
    fatal_error: Optional[str] = None

    @property
    def exit_code(self) -> int:
        if self.fatal_error is not None:
            return EXIT_FATAL
        if self.piece_errors or any(s in (STATUS_PARTIAL, STATUS_FAILED) for s in self.stages.values()):
            return EXIT_PARTIAL
        return EXIT_OK


# ============================================================================
# PER-PIECE WORKERS (top level so the process pool can pickle them)
# ============================================================================

def _unexpected(error: Exception) -> str:
    # Any failure stays with its piece
    return f"unexpected {type(error).__name__}: {error}"


def _dynamics_worker(args) -> Tuple[str, Optional[PieceDynamics], Optional[str]]:
    piece, hbsl, rhythm, pitch_mode = args
    try:
        return piece.id, learn_sequences(symbolize_piece(piece, rhythm, pitch_mode), hbsl), None
    except AnalysisError as e:
        return piece.id, None, str(e)
    except Exception as e:
        return piece.id, None, _unexpected(e)


@dataclass
class _AcousticResult:
    summary: AcousticSummary
    scalogram_power: Optional[np.ndarray]
    envelope: Optional[np.ndarray]
    carrier: Optional[np.ndarray]
    note: Optional[str]


def _acoustics_worker(args) -> Tuple[str, Optional[_AcousticResult], Optional[str]]:
    piece, cfg = args
    try:
        wave = zscore(synthesize(piece, cfg.sample_rate))
        full = demodulate(wave, cfg.cutoff, cfg.iterations)
        check_envelope(full)
        frames = decimate_envelope(full, cfg.frame_rate)
        scal = scalogram(frames, cfg.fmin, cfg.fmax, cfg.n_bands)
        spectrum = carrier_spectrum(full)
        note = None
        try:
            stats = horizontal_rates(detect_troughs(frames, cfg.prominence), frames.sample_rate)
            cycles, rates = stats.cycle_lengths, stats.horizontal_rates
        except TooFewCycles as e:
            cycles, rates, note = np.zeros(0), np.zeros(0), str(e)
        summary = AcousticSummary(
            piece_id=piece.id,
            band_means=scal.band_means(),
            carrier=spectrum,
            cycle_lengths=cycles,
            rates=rates,
        )
        return piece.id, _AcousticResult(
            summary=summary,
            scalogram_power=scal.power if cfg.write_scalograms else None,
            envelope=full.envelope if cfg.write_debug_audio else None,
            carrier=full.carrier if cfg.write_debug_audio else None,
            note=note,
        ), None
    except AnalysisError as e:
        return piece.id, None, str(e)
    except Exception as e:
        return piece.id, None, _unexpected(e)


# ============================================================================
# RUNNER
# ============================================================================

class AnalysisRunner:
    """Runs the configured stages and writes everything under config.output_dir."""

    def __init__(self, config: RunConfig, quiet: bool = False) -> None:
        self.config = config
        self.quiet = quiet
        self.outputs = RunOutputs()
        self.dynamics: Dict[str, PieceDynamics] = {}
        self.report = RunReport(config_hash=config.config_hash())
        self.writer: Optional[OutputWriter] = None
        self.run_logger: Optional[RunLogger] = None

    # ------------------------------------------------------------------
    # helpers
    # ------------------------------------------------------------------
    def _say(self, message: str) -> None:
        if not self.quiet:
            console.print(message)

    def _warn(self, stage: Stage, message: str, piece_id: Optional[str] = None) -> None:
        self.report.warnings.append(f"[{stage.value}] {message}")
        if self.run_logger:
            self.run_logger.warning(stage.value, message, piece_id=piece_id)
        self._say(f"[yellow]⚠ {stage.value}: {escape(message)}[/yellow]")

    def _piece_failed(self, stage: Stage, piece_id: str, reason: str) -> None:
        self.report.piece_errors[f"{stage.value}:{piece_id}"] = reason
        self._warn(stage, f"piece {piece_id} excluded: {reason}", piece_id=piece_id)

    def _map(self, worker: Callable, tasks: List) -> List:
        """Apply a per-piece worker, in a process pool when jobs > 1. Results keep task order."""
        if self.config.jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=self.config.jobs) as pool:
                return list(pool.map(worker, tasks))
        return [worker(t) for t in tasks]

    # ------------------------------------------------------------------
    # entry point
    # ------------------------------------------------------------------
    def run(self) -> RunReport:
        start = time.perf_counter()
        out_dir = Path(self.config.output_dir)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            probe = out_dir / ".write_probe"
            probe.write_text("", encoding="utf-8")
            probe.unlink()
        except OSError as e:
            self.report.fatal_error = f"output directory {out_dir} is not writable: {e}"
            self._say(f"[red]✗ {escape(self.report.fatal_error)}[/red]")
            return self.report

        self.writer = OutputWriter(out_dir)
        self.run_logger = RunLogger(str(self.writer.path_for(RUN_LOG)))
        self.run_logger.log_event("run", "started", details={"config_hash": self.report.config_hash})

        stages = {
            Stage.INGEST: self.ingest,
            Stage.DYNAMICS: self.run_dynamics,
            Stage.EMBED: self.embed,
            Stage.ACOUSTICS: self.run_acoustics,
            Stage.REPORT: self.build_reports,
        }
        for stage in Stage:
            self.report.stages[stage.value] = STATUS_SKIPPED
        for stage in self.config.stages:
            self._say(f"[bold cyan]▶ {stage.value}[/bold cyan]")
            try:
                status = stages[stage]()
            except PipelineError as e:
                self.report.stages[stage.value] = STATUS_FAILED
                self.report.fatal_error = f"{stage.value}: {e}"
                self.run_logger.error(stage.value, str(e))
                self._say(f"[red]✗ {stage.value}: {escape(str(e))}[/red]")
                self.writer.write_json(ERROR_REPORT, {"stage": stage.value, "error": str(e), "type": type(e).__name__})
                break
            self.report.stages[stage.value] = status
            self.run_logger.log_event(stage.value, status)

        self.report.wall_time_sec = round(time.perf_counter() - start, 3)
        self.run_logger.log_event("run", "finished", details={"exit_code": self.report.exit_code})
        self.report.outputs = self.writer.sorted_inventory()
        self.writer.write_json(RUN_MANIFEST, self._manifest())
        self._print_summary()
        return self.report

    def _manifest(self) -> Dict:
        versions = {"music_dynamics": __version__, "python": platform.python_version()}
        for package in ("numpy", "scipy", "pandas", "pydantic", "rich"):
            try:
                versions[package] = metadata.version(package)
            except metadata.PackageNotFoundError:
                versions[package] = "unknown"
        return {
            "config_hash": self.report.config_hash,
            "config": self.config.model_dump(mode="json"),
            "versions": versions,
            "stages": self.report.stages,
            "warnings": self.report.warnings,
            "piece_errors": self.report.piece_errors,
            "wall_time_sec": self.report.wall_time_sec,
            "exit_code": self.report.exit_code,
            "outputs": self.report.outputs,
        }

    def _print_summary(self) -> None:
        if self.quiet:
            return
        table = Table(title="Run summary", show_header=True)
        table.add_column("Stage")
        table.add_column("Status")
        colors = {STATUS_OK: "green", STATUS_PARTIAL: "yellow", STATUS_FAILED: "red", STATUS_SKIPPED: "dim"}
        for stage, status in self.report.stages.items():
            table.add_row(stage, f"[{colors[status]}]{status}[/{colors[status]}]")
        console.print(table)
        console.print(f"Outputs: {len(self.report.outputs)} files in {self.config.output_dir}")
        console.print(f"Config hash: {self.report.config_hash[:16]}…  Wall time: {self.report.wall_time_sec:.1f}s")

    # ------------------------------------------------------------------
    # stages
    # ------------------------------------------------------------------
    def ingest(self) -> str:
        try:
            entries = read_manifest(self.config.manifest)
        except (AnalysisError, OSError) as e:
            raise PipelineError(f"cannot read manifest {self.config.manifest}: {e}") from e
        if not entries:
            raise PipelineError(f"manifest {self.config.manifest} lists no pieces")

        status = STATUS_OK
        for entry in entries:
            row_warnings: List[str] = []
            try:
                piece = load_piece(entry, self.config.csv_schema, warnings=row_warnings)
                if not piece.events:
                    raise AnalysisError(f"{entry.path}: no note events")
            except AnalysisError as e:
                self._piece_failed(Stage.INGEST, entry.id, f"{entry.path.name}: {e}")
                status = STATUS_PARTIAL
                continue
            for w in row_warnings:
                self._warn(Stage.INGEST, f"{entry.path.name}: {w}", piece_id=entry.id)
            self.outputs.pieces[piece.id] = piece

        if not self.outputs.pieces:
            raise PipelineError("no piece in the corpus could be loaded")
        for piece_id in sorted(self.outputs.pieces):
            self.writer.write_text(f"pieces/{piece_id}.csv", write_piece_csv(self.outputs.pieces[piece_id]))
        meta = pd.DataFrame(
            [RowMetadata.from_piece(self.outputs.pieces[pid]).model_dump() for pid in sorted(self.outputs.pieces)]
        )
        self.writer.write_csv("pieces/metadata.csv", meta)
        self._say(f"  {len(self.outputs.pieces)} of {len(entries)} pieces loaded")
        return status

    def run_dynamics(self) -> str:
        cfg = self.config
        pieces = [self.outputs.pieces[pid] for pid in sorted(self.outputs.pieces)]
        status = STATUS_OK
        if cfg.hbsl.learning_mode == LearningMode.CORPUS_PRIMED:
            # earlier years feed later ones, so pieces are learned serially
            failures: Dict[str, str] = {}
            self.dynamics = corpus_dynamics(pieces, cfg.hbsl, cfg.rhythm, cfg.pitch_mode, failures=failures)
            for piece_id in sorted(failures):
                self._piece_failed(Stage.DYNAMICS, piece_id, failures[piece_id])
        else:
            tasks = [(p, cfg.hbsl, cfg.rhythm, cfg.pitch_mode) for p in pieces]
            for piece_id, dynamics, error in self._map(_dynamics_worker, tasks):
                if error is not None:
                    self._piece_failed(Stage.DYNAMICS, piece_id, error)
                else:
                    self.dynamics[piece_id] = dynamics
        if len(self.dynamics) < len(pieces):
            status = STATUS_PARTIAL
        if not self.dynamics:
            raise PipelineError("no piece produced dynamics")

        for piece_id in sorted(self.dynamics):
            dyn = self.dynamics[piece_id]
            for domain in ALL_DOMAINS:
                self.writer.write_json(f"symbols/{piece_id}_{domain.value}.json", symbol_sequence_json(dyn.sequences[domain]))
                self.writer.write_json(f"models/{piece_id}_{domain.value}.json", model_snapshot(dyn.results[domain].model))

        corpus = {pid: d.series for pid, d in self.dynamics.items()}
        table = dynamics_table(corpus)
        metadata = {pid: RowMetadata.from_piece(self.outputs.pieces[pid]) for pid in self.dynamics}
        for domain in ALL_DOMAINS:
            for measure in ALL_MEASURES:
                selection = table[(table["domain"] == domain.value) & (table["measure"] == measure.value)]
                self.writer.write_csv(f"dynamics/dynamics_{domain.value}_{measure.value}.csv", selection)
                try:
                    matrix = build_feature_matrix(corpus, domain, measure, metadata, cfg.zscore_rows)
                except AnalysisError as e:
                    self._warn(Stage.DYNAMICS, f"no feature matrix for {domain.value}/{measure.value}: {e}")
                    status = STATUS_PARTIAL
                    continue
                self.writer.write_csv(
                    f"features/features_{domain.value}_{measure.value}.csv", feature_matrix_table(matrix)
                )
        return status

    def embed(self) -> str:
        cfg = self.config
        corpus = {pid: d.series for pid, d in self.dynamics.items()}
        metadata = {pid: RowMetadata.from_piece(self.outputs.pieces[pid]) for pid in self.dynamics}
        status = STATUS_OK
        for measure in ALL_MEASURES:
            points = {}
            for domain in ALL_DOMAINS:
                try:
                    matrix = build_feature_matrix(corpus, domain, measure, metadata, cfg.zscore_rows)
                    points[domain] = tsne(matrix, cfg.tsne)
                except AnalysisError as e:
                    self._warn(Stage.EMBED, f"no embedding for {domain.value}/{measure.value}: {e}")
                    status = STATUS_PARTIAL
            if not points:
                continue
            table = embedding_table(points)
            self.outputs.embeddings[measure.value] = table
            self.writer.write_csv(f"embedding/embedding_{measure.value}.csv", table)
        return status

    def run_acoustics(self) -> str:
        cfg = self.config.acoustics
        pieces = [self.outputs.pieces[pid] for pid in sorted(self.outputs.pieces)]
        status = STATUS_OK
        freqs = band_frequencies(cfg.fmin, cfg.fmax, cfg.n_bands)
        self.outputs.band_frequencies = freqs
        for piece_id, result, error in self._map(_acoustics_worker, [(p, cfg) for p in pieces]):
            if error is not None:
                self._piece_failed(Stage.ACOUSTICS, piece_id, error)
                status = STATUS_PARTIAL
                continue
            if result.note:
                self._warn(Stage.ACOUSTICS, f"piece {piece_id}: {result.note}", piece_id=piece_id)
            self.outputs.acoustics[piece_id] = result.summary
            if result.scalogram_power is not None:
                self.writer.write_csv(f"scalograms/{piece_id}.csv", scalogram_table(freqs, result.scalogram_power))
            if result.envelope is not None:
                for name, samples in (("envelope", result.envelope), ("carrier", result.carrier)):
                    peak = np.max(np.abs(samples)) or 1.0
                    wave = Waveform(sample_rate=cfg.sample_rate, samples=samples / peak)
                    write_wav(self.writer.path_for(f"audio/{piece_id}_{name}.wav"), wave)

        if not self.outputs.acoustics:
            self._warn(Stage.ACOUSTICS, "no piece produced acoustic results")
            return STATUS_PARTIAL

        self.writer.write_csv("acoustics/band_power.csv", band_power_table(self.outputs))
        self.writer.write_csv("acoustics/cycles.csv", cycles_table(self.outputs))
        rates = rates_table(self.outputs)
        self.writer.write_csv("acoustics/rates.csv", rates)
        self.writer.write_csv("acoustics/density.csv", density_table(rate_density(rates["rate"].to_numpy())))
        self.writer.write_csv("acoustics/carrier_peaks.csv", carrier_peaks_table(self.outputs))

        mean_power = np.mean(np.vstack([a.band_means for a in self.outputs.acoustics.values()]), axis=0)
        summary = {"pieces": len(self.outputs.acoustics)}
        try:
            summary["spectral_slope"] = round(spectral_slope(freqs, mean_power), 9)
        except AnalysisError as e:
            self._warn(Stage.ACOUSTICS, f"no spectral slope: {e}")
        self.writer.write_json("acoustics/summary.json", summary)
        return status

    def build_reports(self) -> str:
        status = STATUS_OK
        for key in self.config.group_keys:
            report_warnings: List[str] = []
            tables = group_report(self.outputs, key, warnings=report_warnings)
            for w in report_warnings:
                self._warn(Stage.REPORT, f"{key.value}: {w}")
            if not tables:
                status = STATUS_PARTIAL
                continue
            write_group_report(self.writer, tables, key)
        return status


def write_error_report(path: Path, error: Exception) -> None:
    """Machine-readable report for failures before a runner exists (e.g. bad config)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"error": str(error), "type": type(error).__name__, "key": getattr(error, "key", None)}
    path.write_text(json.dumps(document, sort_keys=True, indent=2) + "\n", encoding="utf-8")
