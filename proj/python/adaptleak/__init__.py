"""Python access to the adaptleak core: registry parsing, MI tables, the
clustering attack, mediation and whole experiments."""

import json

from ._adaptleak import (
    AdaptLeakError,
    MitigationState,
    attack as _attack,
    canonical_registry,
    entropy,
    kmeans,
    mi_table,
    mutual_information,
    parse_registry,
    run_experiment as _run_experiment,
    silhouette,
    simulate,
    summarize_report,
)

__all__ = [
    "AdaptLeakError",
    "MitigationState",
    "attack",
    "canonical_registry",
    "entropy",
    "kmeans",
    "mi_table",
    "mutual_information",
    "parse_registry",
    "run_experiment",
    "silhouette",
    "simulate",
    "summarize_report",
]


def attack(series, seed=1, feature_selection=True):
    """Clusters the series' action rows; `series` is a dict from simulate()."""
    text = _attack(series["alphabet"], series["contexts"], series["actions"], series["rows"], seed,
                   feature_selection)
    return json.loads(text)


def run_experiment(config, out_dir=""):
    """Runs an experiment from a config dict and returns the report dict."""
    return json.loads(_run_experiment(json.dumps(config), out_dir))
