"""Python bindings for the federated consensus solver."""

import json as _json

from ._core import (
    ConfigError,
    IoError,
    cover_probability,
    cr_count,
    generate,
    kappa_bound,
    lipschitz,
    load_dataset,
    local_grad,
    local_loss,
    next_omega,
    run_json,
)


def run(config):
    """Run one experiment from a config mapping and return the summary fields.

    ``config`` uses the same flat schema as the CLI config files; the
    ``schema_version`` key is filled in when absent.
    """
    doc = dict(config)
    doc.setdefault("schema_version", 1)
    return run_json(_json.dumps(doc))


__all__ = [
    "ConfigError",
    "IoError",
    "cover_probability",
    "cr_count",
    "generate",
    "kappa_bound",
    "lipschitz",
    "load_dataset",
    "local_grad",
    "local_loss",
    "next_omega",
    "run",
    "run_json",
]
