"""Storage, profiling, and resampling for multi-agent offline-RL trajectory
datasets.

The core object is an immutable columnar :class:`TrajectoryDataset`. Vaults
are its on-disk form: a directory with a binary data file, an episode index,
a JSON metadata document, and a checksum sidecar. Everything else (statistics,
coverage, resampling, lint, synthesis) operates on datasets in memory.
"""

from .core import (AgentSpec, ContinuousActions, DiscreteActions, EpisodeView,
                   FORMAT_VERSION, TrajectoryDataset, VaultMeta, episode_slice,
                   validate)
from .coverage import CoverageReport, coverage_report, coverage_spectrum_points
from .errors import (ChecksumError, DataError, EmptyDatasetError, FetchError,
                     ImportError_, InfeasibleTargetError, InvalidDatasetError,
                     IOFailure, SchemaMismatchError, TrajvaultError, UserError,
                     VaultFormatError, VaultLockedError, VaultNotFoundError)
from .lint import LintAttachments, LintFinding, lint_vault
from .registry import RegistryEntry, registry
from .resample import (SelectionPlan, TargetDistribution, combine,
                       construct_mean_std, match_distributions, replay,
                       subsample_to_target, subsample_transitions, take_episodes)
from .stats import (DensityCurve, EpisodeReturnSummary, Histogram, density,
                    episode_returns, histogram, summarize, summarize_dataset)
from .synth import (BehaviourKnob, DecPomdpSpec, generate, generate_return_pool)
from .vault import (export_foreign, fetch_vault, import_foreign, pack_vault,
                    read_vault, write_vault)

__version__ = "1.0.0"

__all__ = [
    "AgentSpec", "BehaviourKnob", "ChecksumError", "ContinuousActions",
    "CoverageReport", "DataError", "DecPomdpSpec", "DensityCurve",
    "DiscreteActions", "EmptyDatasetError", "EpisodeReturnSummary",
    "EpisodeView", "FORMAT_VERSION", "FetchError", "Histogram", "IOFailure",
    "ImportError_", "InfeasibleTargetError", "InvalidDatasetError",
    "LintAttachments", "LintFinding", "RegistryEntry", "SchemaMismatchError",
    "SelectionPlan", "TargetDistribution", "TrajectoryDataset",
    "TrajvaultError", "UserError", "VaultFormatError", "VaultLockedError",
    "VaultMeta", "VaultNotFoundError", "combine", "construct_mean_std",
    "coverage_report", "coverage_spectrum_points", "density",
    "episode_returns", "episode_slice", "export_foreign", "fetch_vault",
    "generate", "generate_return_pool", "histogram", "import_foreign",
    "lint_vault", "match_distributions", "pack_vault", "read_vault",
    "registry", "replay", "subsample_to_target", "subsample_transitions",
    "summarize", "summarize_dataset", "take_episodes", "validate",
    "write_vault",
]
