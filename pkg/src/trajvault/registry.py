"""Built-in catalogue of known public multi-agent offline-RL datasets.

Transcribed verbatim from the published conversion table (88 datasets across
five source projects). Hosting moves around, so URLs are optional and absent
here; fetch_vault takes explicit URLs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

# (source, environment, scenario, qualities)
_TABLE = (
    ("OG-MARL", "MAMuJoCo", "2halfcheetah", ("good", "medium", "poor")),
    ("OG-MARL", "MAMuJoCo", "2ant", ("good", "medium", "poor")),
    ("OG-MARL", "MAMuJoCo", "4ant", ("good", "medium", "poor")),
    ("OG-MARL", "SMACv1", "2s3z", ("good", "medium", "poor")),
    ("OG-MARL", "SMACv1", "3m", ("good", "medium", "poor")),
    ("OG-MARL", "SMACv1", "3s5z_vs_3s6z", ("good", "medium", "poor")),
    ("OG-MARL", "SMACv1", "5m_vs_6m", ("good", "medium", "poor")),
    ("OG-MARL", "SMACv1", "8m", ("good", "medium", "poor")),
    ("OG-MARL", "SMACv2", "terran_5_vs_5", ("replay",)),
    ("OG-MARL", "SMACv2", "zerg_5_vs_5", ("replay",)),
    ("OMAR", "MAMuJoCo", "2halfcheetah", ("expert", "medium-replay", "medium", "random")),
    ("OMAR", "MPE", "simple-spread", ("expert", "medium-replay", "medium", "random")),
    ("OMAR", "MPE", "simple-tag", ("expert", "medium-replay", "medium", "random")),
    ("OMAR", "MPE", "simple-world", ("expert", "medium-replay", "medium", "random")),
    ("CFCQL", "SMACv1", "2s3z", ("expert", "medium-replay", "medium", "mixed")),
    ("CFCQL", "SMACv1", "3s_vs_5z", ("expert", "medium-replay", "medium", "mixed")),
    ("CFCQL", "SMACv1", "5m_vs_6m", ("expert", "medium-replay", "medium", "mixed")),
    ("CFCQL", "SMACv1", "6h_vs_8z", ("expert", "medium-replay", "medium", "mixed")),
    ("OMIGA", "SMACv1", "corridor", ("good", "medium", "poor")),
    ("OMIGA", "SMACv1", "2c_vs_64zg", ("good", "medium", "poor")),
    ("OMIGA", "SMACv1", "5m_vs_6m", ("good", "medium", "poor")),
    ("OMIGA", "SMACv1", "6h_vs_8z", ("good", "medium", "poor")),
    ("OMIGA", "MAMuJoCo", "2ant", ("expert", "medium-expert", "medium-replay", "medium")),
    ("OMIGA", "MAMuJoCo", "3hopper", ("expert", "medium-expert", "medium-replay", "medium")),
    ("OMIGA", "MAMuJoCo", "6halfcheetah", ("expert", "medium-expert", "medium-replay", "medium")),
    ("AlberDICE", "RWARE", "tiny-2g", ("expert",)),
    ("AlberDICE", "RWARE", "tiny-4g", ("expert",)),
    ("AlberDICE", "RWARE", "tiny-6ag", ("expert",)),
    ("AlberDICE", "RWARE", "small-2ag", ("expert",)),
    ("AlberDICE", "RWARE", "small-4ag", ("expert",)),
    ("AlberDICE", "RWARE", "small-6ag", ("expert",)),
)


@dataclass(frozen=True)
class RegistryEntry:
    source: str
    environment: str
    scenario: str
    quality_label: str
    url: Optional[str] = None

    def to_json(self) -> dict:
        return {"source": self.source, "environment": self.environment,
                "scenario": self.scenario, "quality_label": self.quality_label,
                "url": self.url}


def registry(source: Optional[str] = None, environment: Optional[str] = None,
             scenario: Optional[str] = None,
             quality_label: Optional[str] = None) -> list:
    """The full catalogue, optionally filtered by exact field values."""
    out = []
    for src, env, scen, qualities in _TABLE:
        for q in qualities:
            if source is not None and src != source:
                continue
            if environment is not None and env != environment:
                continue
            if scenario is not None and scen != scenario:
                continue
            if quality_label is not None and q != quality_label:
                continue
            out.append(RegistryEntry(src, env, scen, q))
    return out
