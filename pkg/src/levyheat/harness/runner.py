"""Run an ExperimentConfig: checks in stage order, outputs, manifest."""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from .checks import STAGES, CheckFailure, RunContext, dependency_order, run_check
from .config import ExperimentConfig
from .plotdata import emit_plotdata

log = logging.getLogger(__name__)

OUT_ENV = "LEVYHEAT_OUT"
DEFAULT_OUT = "levyheat-out"


@dataclass
class CheckRecord:
    name: str
    status: str  # pass | fail | error
    constants: dict = field(default_factory=dict)
    summary: str = ""
    seconds: float = 0.0


@dataclass
class RunManifest:
    config_hash: str
    version: str
    checks: list
    stage_seconds: dict
    threads: int = 1
    tol_scale: float = 1.0
    outputs: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status == "pass" for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def status(self, name) -> str:
        for c in self.checks:
            if c.name == name:
                return c.status
        raise KeyError(name)

    def to_json(self) -> str:
        d = asdict(self)
        d["passed"] = self.passed
        return json.dumps(d, indent=2, sort_keys=True, default=float)


def resolve_out_dir(cli_out=None, config: ExperimentConfig | None = None) -> Path:
    """--out, then the config's output directory, then $LEVYHEAT_OUT, then ./levyheat-out."""
    for cand in (cli_out, config.output_dir if config is not None else None, os.environ.get(OUT_ENV)):
        if cand:
            return Path(cand)
    return Path(DEFAULT_OUT)


def _safe(name):
    return name.replace(".", "_")


def _num(v):
    return f"{v:.17g}" if isinstance(v, (float, np.floating)) else str(v)


def _write_outputs(outcome, directory: Path, formats):
    written = []
    stem = _safe(outcome.name)
    if "csv" in formats:
        p = directory / f"{stem}.constants.csv"
        with open(p, "w") as fh:
            fh.write("constant,value\n")
            for k, v in outcome.constants.items():
                fh.write(f"{k},{_num(v)}\n")
        written.append(p)
        for tname, (header, rows) in outcome.tables.items():
            p = directory / f"{stem}.{tname}.csv"
            with open(p, "w") as fh:
                fh.write(",".join(header) + "\n")
                for row in np.atleast_2d(rows):
                    fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
            written.append(p)
        for i, rep in enumerate(outcome.reports):
            if rep.points:
                p = directory / f"{stem}.points{i or ''}.csv"
                rep.to_csv(p)
                written.append(p)
        for g in outcome.densities:
            p = directory / f"{stem}.{_density_tag(g)}.csv"
            g.to_csv(p)
            written.append(p)
    if "report" in formats:
        for i, rep in enumerate(outcome.reports):
            p = directory / f"{stem}.report{i or ''}.txt"
            p.write_text(rep.to_text())
            written.append(p)
    if "plotdata" in formats:
        pd = directory / "plotdata"
        for g in outcome.densities:
            written += emit_plotdata(g, pd, stem)
        for i, rep in enumerate(outcome.reports):
            written += emit_plotdata(rep, pd, f"{stem}{i or ''}")
        for tname, table in outcome.tables.items():
            written += emit_plotdata(table, pd, f"{stem}.{tname}")
    if "binary" in formats:
        for g in outcome.densities:
            p = directory / f"{stem}.{_density_tag(g)}.lhgd"
            g.to_binary(p)
            written.append(p)
    return written


def _density_tag(g):
    tag = f"t{g.t:.6g}"
    if any(g.derivative_order):
        tag += "_d" + "".join(str(b) for b in g.derivative_order)
    return tag


def run(config: ExperimentConfig, *, out_dir=None, threads: int = 1, tol_scale: float = 1.0,
        write=True) -> RunManifest:
    """Execute all configured checks in stage order and write the requested outputs.

    A check raising an exception is recorded with status ``error`` (its
    message carries the check name) and counts as a failure.
    """
    if int(threads) < 1:
        raise ValueError("threads must be >= 1")
    if not tol_scale > 0:
        raise ValueError("tol_scale must be positive")
    directory = resolve_out_dir(out_dir, config)
    if write:
        directory.mkdir(parents=True, exist_ok=True)
    opts = dict(config.checks)
    executor = ThreadPoolExecutor(max_workers=int(threads)) if int(threads) > 1 else None
    ctx = RunContext(config, executor=executor, tol_scale=tol_scale)
    records, stage_seconds, outputs = [], {s: 0.0 for s in STAGES}, []
    try:
        for name in dependency_order(list(opts)):
            t0 = time.perf_counter()
            try:
                outcome = run_check(name, ctx, opts[name])
            except CheckFailure as exc:
                log.error("%s", exc)
                records.append(CheckRecord(name, "error", {}, str(exc), time.perf_counter() - t0))
                stage_seconds[name.split(".")[0]] += time.perf_counter() - t0
                continue
            stage_seconds[name.split(".")[0]] += outcome.seconds
            log.info("%s", outcome.line())
            consts = {k: float(v) for k, v in outcome.constants.items()}
            records.append(CheckRecord(name, "pass" if outcome.passed else "fail", consts, outcome.summary,
                                       outcome.seconds))
            if write:
                outputs += [str(p.relative_to(directory)) for p in _write_outputs(outcome, directory,
                                                                                  config.formats)]
    finally:
        if executor is not None:
            executor.shutdown()
    manifest = RunManifest(config.config_hash(), __version__, records, stage_seconds, int(threads),
                           float(tol_scale), sorted(outputs))
    if write:
        if "csv" in config.formats:
            with open(directory / "checks.csv", "w") as fh:
                fh.write("check,status\n")
                for r in records:
                    fh.write(f"{r.name},{r.status}\n")
        if "report" in config.formats:
            (directory / "report.txt").write_text(render_report(manifest))
        (directory / "manifest.json").write_text(manifest.to_json())
    return manifest


def render_report(manifest: RunManifest) -> str:
    lines = [f"levyheat {manifest.version}  config {manifest.config_hash[:12]}  "
             f"threads={manifest.threads} tol_scale={manifest.tol_scale:g}"]
    for c in manifest.checks:
        lines.append(f"  [{c.status.upper():5s}] {c.name}: {c.summary}")
    if not manifest.checks:
        lines.append("  (no checks configured)")
    n_ok = sum(c.status == "pass" for c in manifest.checks)
    lines.append(f"{n_ok}/{len(manifest.checks)} checks passed")
    return "\n".join(lines) + "\n"
