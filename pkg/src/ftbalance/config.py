"""Run configuration: strict JSON schema with dot-path overrides."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConstraintError, SchemaError
from .fracstep import StepConfig
from .models import make_model, model_names

_DEFAULTS = {
    "model": {"name": None, "params": {}},
    "datum": {"type": None},
    "eps": None,
    "tau": None,
    "horizon": 1.0,
    "snapshot_times": None,
    "support": None,
    "analyzer": {
        "betas": [0.2, 0.1, 0.05],
        "families": [],
        "indices": [],
        "parity_filter": "any",
    },
    "tolerances": {
        "c1": 10.0,
        "delta_bar": 0.1,
        "delta_fence": 0.5,
        "rho_np": None,
        "jump_max": None,
        "max_events": 10_000_000,
    },
    "sweep": {"levels": [], "sample_times": None},
}

_DATUM_KEYS = {
    "riemann": {"type", "u_left", "u_right", "x0"},
    "staircase": {"type", "xs", "states"},
    "file": {"type", "path"},
}


@dataclass
class RunConfig:
    """Validated run configuration with defaults applied."""

    raw: dict = field(default_factory=dict)

    @property
    def model_name(self):
        return self.raw["model"]["name"]

    @property
    def eps(self):
        return self.raw["eps"]

    @property
    def tau(self):
        return self.raw["tau"]

    @property
    def horizon(self):
        return self.raw["horizon"]

    @property
    def snapshot_times(self):
        times = self.raw["snapshot_times"]
        return [self.horizon] if times is None else list(times)

    @property
    def analyzer(self):
        return self.raw["analyzer"]

    @property
    def tolerances(self):
        return self.raw["tolerances"]

    def make_model(self):
        return make_model(self.raw["model"]["name"], dict(self.raw["model"]["params"]))

    def step_config(self) -> StepConfig:
        tol = self.raw["tolerances"]
        support = self.raw["support"]
        return StepConfig(
            accuracy=self.eps,
            time_step=self.tau,
            horizon=self.horizon,
            c1=tol["c1"],
            delta_bar=tol["delta_bar"],
            delta_fence=tol["delta_fence"],
            rho_np=tol["rho_np"],
            jump_max=tol["jump_max"],
            max_events=tol["max_events"],
            support=tuple(support) if support is not None else None,
        )

    def build_datum(self):
        """Initial datum as a Profile (delayed import keeps layering clean)."""
        from .engine import Profile

        spec = self.raw["datum"]
        if spec["type"] == "riemann":
            x0 = float(spec.get("x0", 0.0))
            return Profile(
                np.array([x0]),
                np.vstack([
                    np.atleast_1d(np.asarray(spec["u_left"], dtype=float)),
                    np.atleast_1d(np.asarray(spec["u_right"], dtype=float)),
                ]),
            )
        if spec["type"] == "staircase":
            return Profile(
                np.asarray(spec["xs"], dtype=float),
                np.atleast_2d(np.asarray(spec["states"], dtype=float)),
            )
        # file: CSV with columns x, u_1..u_N giving the state left of each x,
        # last row gives the rightmost state with its x ignored
        data = np.loadtxt(spec["path"], delimiter=",", skiprows=1, ndmin=2)
        return Profile(data[:-1, 0], data[:, 1:])

    def effective(self) -> dict:
        return copy.deepcopy(self.raw)


def _check_keys(doc, allowed, path):
    for key in doc:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise SchemaError(where, f"unknown key {key!r}")


def _merged(defaults, doc, path):
    if not isinstance(doc, dict):
        raise SchemaError(path or "<root>", "expected an object")
    _check_keys(doc, set(defaults), path)
    out = {}
    for key, default in defaults.items():
        sub_path = f"{path}.{key}" if path else key
        # params and datum carry type-dependent keys validated downstream
        if isinstance(default, dict) and key not in ("params", "datum"):
            out[key] = _merged(default, doc.get(key, {}), sub_path)
        else:
            out[key] = copy.deepcopy(doc.get(key, default))
    return out


def parse_config(document) -> RunConfig:
    """Validate a config document (dict, JSON text, or path to a JSON file)."""
    if isinstance(document, (str, bytes)):
        text = document
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError("<root>", f"invalid JSON: {exc}") from exc
    else:
        doc = document
    # convenient shorthand: "model": "burgers"
    doc = copy.deepcopy(doc)
    if isinstance(doc, dict) and isinstance(doc.get("model"), str):
        doc["model"] = {"name": doc["model"]}
    raw = _merged(_DEFAULTS, doc, "")

    name = raw["model"]["name"]
    if name is None:
        raise SchemaError("model.name", "missing model name")
    if name not in model_names():
        raise SchemaError("model.name", f"unknown model {name!r}; "
                                        f"known: {sorted(model_names())}")
    if not isinstance(raw["model"]["params"], dict):
        raise SchemaError("model.params", "expected an object")

    datum = raw["datum"]
    if datum.get("type") not in _DATUM_KEYS:
        raise SchemaError("datum.type",
                          f"expected one of {sorted(_DATUM_KEYS)}")
    _check_keys(datum, _DATUM_KEYS[datum["type"]], "datum")

    for key in ("eps", "tau"):
        if raw[key] is None:
            raise SchemaError(key, "missing required value")
        if not (isinstance(raw[key], (int, float)) and raw[key] > 0):
            raise SchemaError(key, "must be a positive number")
    if raw["tau"] > raw["eps"]:
        raise ConstraintError(
            f"time step tau={raw['tau']} must not exceed eps={raw['eps']}"
        )
    if not raw["horizon"] > 0:
        raise ConstraintError("horizon must be positive")
    if raw["snapshot_times"] is not None:
        for t in raw["snapshot_times"]:
            if not (0 <= t <= raw["horizon"]):
                raise ConstraintError(
                    f"snapshot time {t} outside [0, {raw['horizon']}]"
                )
    if raw["analyzer"]["parity_filter"] not in ("any", "even-positive", "odd-positive"):
        raise SchemaError("analyzer.parity_filter",
                          "expected any | even-positive | odd-positive")
    return RunConfig(raw=raw)


def apply_overrides(document: dict, overrides) -> dict:
    """Apply KEY=VALUE dot-path overrides to a raw config document."""
    doc = copy.deepcopy(document)
    for item in overrides or []:
        if "=" not in item:
            raise SchemaError("<override>", f"expected KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value  # bare strings stay strings
        node = doc
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise SchemaError(key, "override path crosses a non-object")
        node[parts[-1]] = parsed
    return doc
