"""TOML experiment configuration.

Schema (all tables optional except [model] and [noise]; defaults in
parentheses):

    [model]      n (required), j_z (1.0), j_x (0.1), h_x (0.1)
    [noise]      gammas (required, list of rates; 0 means ideal-only)
    [zne]        alphas ([1, 1.5, 2]), target ("return_rate" | "loschmidt")
    [evolution]  dt (0.01), t_max (14.0), record_every (1)
    [backend]    kind ("mpdo" | "ed" | "circuit") plus per-kind keys:
                 mpdo: schmidt_cutoff (1e-5), chi_max (200)
                 ed: max_step (0.005)
                 circuit: m_steps (20), p (unset: derived from gamma)
    [run]        seed (0), workers (1), output_dir (unset)

Unknown tables or keys are rejected by name rather than ignored, so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

import tomli

from .experiments import BackendConfig, ExperimentConfig
from .model import HamiltonianParams

_BACKEND_KEYS = {
    "mpdo": {"schmidt_cutoff", "chi_max"},
    "ed": {"max_step"},
    "circuit": {"m_steps", "p"},
}


def _take(table: dict, context: str, required=(), optional=()) -> dict:
    unknown = set(table) - set(required) - set(optional)
    if unknown:
        raise ValueError(f"unknown key {sorted(unknown)[0]!r} in [{context}]")
    missing = [k for k in required if k not in table]
    if missing:
        raise ValueError(f"missing key {missing[0]!r} in [{context}]")
    return dict(table)


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from parsed TOML data, rejecting unknowns."""
    tables = _take(
        raw, "top level", required=("model", "noise"),
        optional=("zne", "evolution", "backend", "run"),
    )

    model = _take(tables["model"], "model", required=("n",), optional=("j_z", "j_x", "h_x"))
    params = HamiltonianParams(**model)

    noise = _take(tables["noise"], "noise", required=("gammas",))
    gammas = tuple(float(g) for g in noise["gammas"])

    zne = _take(tables.get("zne", {}), "zne", optional=("alphas", "target"))
    evolution = _take(
        tables.get("evolution", {}), "evolution", optional=("dt", "t_max", "record_every")
    )

    backend_raw = dict(tables.get("backend", {}))
    kind = backend_raw.pop("kind", "mpdo")
    if kind not in _BACKEND_KEYS:
        raise ValueError(f"unknown backend kind {kind!r} in [backend]")
    allowed = _BACKEND_KEYS[kind]
    unknown = set(backend_raw) - allowed
    if unknown:
        raise ValueError(
            f"unknown key {sorted(unknown)[0]!r} in [backend] for kind {kind!r}"
        )
    backend = BackendConfig(kind=kind, **backend_raw)

    run = _take(tables.get("run", {}), "run", optional=("seed", "workers", "output_dir"))

    kwargs: dict = {"params": params, "gammas": gammas, "backend": backend}
    if "alphas" in zne:
        kwargs["alphas"] = tuple(float(a) for a in zne["alphas"])
    if "target" in zne:
        kwargs["zne_target"] = zne["target"]
    kwargs.update(evolution)
    kwargs.update(run)
    return ExperimentConfig(**kwargs)


def load_config(path: str) -> ExperimentConfig:
    with open(path, "rb") as fh:
        raw = tomli.load(fh)
    try:
        return config_from_dict(raw)
    except (ValueError, TypeError) as exc:
        raise ValueError(f"{path}: {exc}") from exc
