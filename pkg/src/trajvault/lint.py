"""Datasheet lint: checks a dataset's metadata and attached analyses.

Missing provenance is an error (unrecoverable after the fact); missing
analyses and licence are warnings (regenerable). Findings are pure data and
come back sorted by rule id.
"""

from __future__ import annotations

import urllib.parse
from dataclasses import dataclass
from typing import Optional

from .core import TrajectoryDataset
from .coverage import CoverageReport
from .stats import DensityCurve, EpisodeReturnSummary, Histogram


@dataclass(frozen=True)
class LintFinding:
    rule_id: str
    severity: str
    message: str
    guideline_ref: str

    def to_json(self) -> dict:
        return {"rule_id": self.rule_id, "severity": self.severity,
                "message": self.message, "guideline_ref": self.guideline_ref}


@dataclass(frozen=True)
class LintAttachments:
    summary: Optional[EpisodeReturnSummary] = None
    histogram: Optional[Histogram] = None
    density: Optional[DensityCurve] = None
    coverage: Optional[CoverageReport] = None


def _url_ok(url: str) -> bool:
    parts = urllib.parse.urlparse(url)
    if parts.scheme in ("http", "https"):
        return bool(parts.netloc)
    if parts.scheme == "file":
        return bool(parts.path)
    return False


def lint_vault(dataset: TrajectoryDataset,
               attached: Optional[LintAttachments] = None) -> list:
    """One finding per violated rule, ordered by rule id; empty list when clean."""
    meta = dataset.meta
    att = attached or LintAttachments()
    findings = []

    if not meta.source:
        findings.append(LintFinding(
            "R0", "info",
            "source is empty; reconsider whether this dataset needs to exist "
            "or whether an existing one serves",
            "Is a new dataset really necessary?"))

    empty_fields = [f for f in ("environment", "scenario", "source", "generation_method")
                    if not getattr(meta, f)]
    if empty_fields:
        findings.append(LintFinding(
            "R1", "error",
            "provenance fields empty: " + ", ".join(empty_fields),
            "Document which environment you used"))

    s = att.summary
    if s is None or s.n_trajectories < 1 or s.n_transitions < 1:
        findings.append(LintFinding(
            "R2", "warning",
            "no episode-return summary attached (need min/mean/max/std plus "
            "transition and trajectory counts)",
            "episode returns min, mean, max"))

    if att.histogram is None and att.density is None:
        findings.append(LintFinding(
            "R3", "warning",
            "no return-distribution artifact attached (histogram or density)",
            "plots of the episode return distribution"))

    if att.coverage is None:
        findings.append(LintFinding(
            "R4", "warning",
            "no coverage report attached",
            "measure of action-space coverage"))

    if not meta.licence:
        findings.append(LintFinding(
            "R5", "warning",
            "no licence recorded",
            "Include a dataset licence."))

    if not meta.download_url or not _url_ok(meta.download_url):
        findings.append(LintFinding(
            "R6", "warning",
            ("download_url missing" if not meta.download_url
             else f"download_url is malformed: {meta.download_url!r}"),
            "Make a download link easily accessible."))

    return sorted(findings, key=lambda f: f.rule_id)
