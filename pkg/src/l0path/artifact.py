"""JSON persistence for fitted paths and cross-validation results.

Floats are serialized with Python's shortest exact decimal representation,
so parse(serialize(x)) reproduces every coefficient bit for bit. Artifacts
written with identical inputs and options are byte-identical; wall-clock
timing is therefore only embedded on explicit request.
"""
from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from .cdsolver import FitOptions, Model
from .path import ChainInfo, FitPath

SCHEMA_VERSION = 1


def _model_to_dict(m: Model) -> dict:
    return {
        "lambda": m.lam,
        "beta0": m.beta0,
        "indices": [int(i) for i in m.indices],
        "values": [float(v) for v in m.values],
        "objective": m.objective,
        "support_size": m.support_size,
        "sweeps": m.sweeps,
        "converged": m.converged,
        "termination": m.termination,
    }


def _model_from_dict(d: dict, gamma: float) -> Model:
    return Model(
        beta0=float(d["beta0"]),
        indices=np.asarray(d["indices"], dtype=np.int64),
        values=np.asarray(d["values"], dtype=np.float64),
        lam=float(d["lambda"]),
        gamma=gamma,
        objective=float(d["objective"]),
        sweeps=int(d.get("sweeps", 0)),
        converged=bool(d.get("converged", True)),
        termination=str(d.get("termination", "converged")),
    )


def path_to_dict(path: FitPath, seeds: dict | None = None,
                 timing: dict | None = None, cv: dict | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "cvfit" if cv is not None else "fit",
        "loss": path.loss,
        "penalty": path.kind,
        "gammas": [float(g) for g in path.gammas],
        "paths": [
            {
                "gamma": float(path.gammas[g]),
                "termination": path.chain_info[g].termination
                if path.chain_info else "unknown",
                "models": [_model_to_dict(m) for m in path.models[g]],
            }
            for g in range(path.gammas.size)
        ],
        "options": asdict(path.opts),
        "seeds": seeds or {},
    }
    if cv is not None:
        doc["cv"] = cv
    if timing is not None:
        doc["timing"] = timing
    return doc


def path_from_dict(doc: dict) -> FitPath:
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported artifact schema {doc.get('schema_version')!r}")
    gammas = np.asarray(doc["gammas"], dtype=np.float64)
    models = []
    infos = []
    for block in doc["paths"]:
        g = float(block["gamma"])
        models.append([_model_from_dict(m, g) for m in block["models"]])
        infos.append(ChainInfo(g, block.get("termination", "unknown"),
                               len(block["models"]), 0.0, 0))
    opts_d = dict(doc.get("options") or {})
    known = {f for f in FitOptions.__dataclass_fields__}
    opts = FitOptions(**{k: v for k, v in opts_d.items() if k in known})
    return FitPath(gammas, models, doc["loss"], doc["penalty"], opts, infos)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1)


def save(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))
        fh.write("\n")


def load(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
