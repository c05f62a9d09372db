"""Instance files: a step law, a weight vector, named parameters, and
optional frozen expected values used by the verification suite."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .concentration import WeightVector
from .distributions import DiscreteDistribution
from .errors import DomainError, InputError

_NUMERIC_PARAMS = {
    "tau",
    "kappa",
    "delta",
    "gamma",
    "alpha",
    "theta_max",
    "smoothing_power",
    "a_exp",
    "b_exp",
    "b_n",
}
_INT_PARAMS = {"r", "m", "s", "seed", "n_prime", "rank", "mc_samples"}


def _check_parameters(params: dict) -> dict:
    if not isinstance(params, dict):
        raise InputError("parameters: expected an object")
    out = {}
    for key, value in params.items():
        if key == "constants":
            if not isinstance(value, dict):
                raise InputError("parameters.constants: expected an object")
            out[key] = dict(value)
        elif key in _INT_PARAMS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise InputError(f"parameters.{key}: expected an integer")
            out[key] = value
        elif key in _NUMERIC_PARAMS:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InputError(f"parameters.{key}: expected a number")
            out[key] = float(value)
        else:
            raise InputError(f"parameters: unknown field {key!r}")
    return out


@dataclass(frozen=True)
class InstanceSpec:
    """One parsed problem instance."""

    id: str
    x: DiscreteDistribution
    a: WeightVector
    parameters: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)

    def param(self, name: str, default=None):
        return self.parameters.get(name, default)

    def require(self, *names):
        """Return the named parameters, failing loudly on the first missing one."""
        values = []
        for name in names:
            if name not in self.parameters:
                raise InputError(
                    f"instance {self.id!r}: missing required parameter {name!r}"
                )
            values.append(self.parameters[name])
        return values[0] if len(values) == 1 else values

    @classmethod
    def from_json_obj(cls, obj) -> "InstanceSpec":
        if not isinstance(obj, dict):
            raise InputError("instance: expected a JSON object")
        if "id" not in obj or not isinstance(obj["id"], str) or not obj["id"]:
            raise InputError("instance: missing or empty field 'id'")
        if "distribution" not in obj:
            raise InputError("instance: missing field 'distribution'")
        if "weights" not in obj:
            raise InputError("instance: missing field 'weights'")
        known = {"id", "distribution", "weights", "parameters", "expected"}
        for key in obj:
            if key not in known:
                raise InputError(f"instance: unknown field {key!r}")
        try:
            x = DiscreteDistribution.from_spec(obj["distribution"])
        except DomainError as exc:
            raise InputError(f"instance {obj['id']!r}: distribution: {exc}") from exc
        try:
            a = WeightVector.from_json_obj(obj["weights"])
        except DomainError as exc:
            raise InputError(f"instance {obj['id']!r}: weights: {exc}") from exc
        params = _check_parameters(obj.get("parameters", {}))
        expected = obj.get("expected", {})
        if not isinstance(expected, dict):
            raise InputError(f"instance {obj['id']!r}: expected: expected an object")
        return cls(id=obj["id"], x=x, a=a, parameters=params, expected=expected)

    @classmethod
    def from_path(cls, path) -> "InstanceSpec":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise InputError(f"cannot read instance file {path}: {exc}") from exc
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: malformed JSON: {exc}") from exc
        return cls.from_json_obj(obj)


def load_instances(path) -> list:
    """Load one instance file or every .json file in a directory, sorted by name."""
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix == ".json")
        if not files:
            raise InputError(f"no .json instance files in {path}")
        return [InstanceSpec.from_path(p) for p in files]
    return [InstanceSpec.from_path(path)]


def load_corpus(corpus_dir=None) -> list:
    """Load the named corpus directory, or the bundled one when None."""
    if corpus_dir is not None:
        return load_instances(corpus_dir)
    root = resources.files("anticonc").joinpath("data/corpus")
    specs = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            try:
                obj = json.loads(entry.read_text())
            except json.JSONDecodeError as exc:
                raise InputError(f"{entry.name}: malformed JSON: {exc}") from exc
            specs.append(InstanceSpec.from_json_obj(obj))
    if not specs:
        raise InputError("bundled corpus is empty")
    return specs


__all__ = ["InstanceSpec", "load_corpus", "load_instances"]
