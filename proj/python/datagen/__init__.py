"""Python front end for the datagen C++ core."""

import json as _json

from ._datagen import (
    ConfigError,
    DatagenError,
    SchemaError,
    aps,
    answer_format,
    distance_matrix,
    generate,
    group_check,
    ingf,
    remote_clique,
    self_bleu,
    tokenize,
)


def load_dataset(path):
    """Items of a dataset file as plain dicts."""
    return _json.loads(_datagen_load(str(path)))


def report(run_dir):
    return _json.loads(_datagen_report(str(run_dir)))


from ._datagen import load_dataset_json as _datagen_load  # noqa: E402
from ._datagen import report_json as _datagen_report  # noqa: E402

__all__ = [
    "ConfigError",
    "DatagenError",
    "SchemaError",
    "answer_format",
    "aps",
    "distance_matrix",
    "generate",
    "group_check",
    "ingf",
    "load_dataset",
    "remote_clique",
    "report",
    "self_bleu",
    "tokenize",
]
