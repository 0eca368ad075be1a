"""The cubature rule container and its JSON persistence."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class CubatureRule:
    """Nodes on the unit sphere with positive weights.

    ``degree`` is the declared (near) algebraic degree of exactness and
    ``moment_residual`` the 2-norm moment mismatch recorded by compression
    (``0.0`` for rules that were built directly).
    """

    nodes: np.ndarray
    weights: np.ndarray
    degree: int
    moment_residual: float = 0.0
    region_area: float | None = None
    compressed: bool = False
    parent_cardinality: int | None = None

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=float).reshape(-1, 3)
        weights = np.ascontiguousarray(self.weights, dtype=float).ravel()
        if len(nodes) != len(weights):
            raise ValueError("nodes and weights differ in length")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.weights)

    def integrate(self, f):
        """Apply the rule to ``f(x, y, z)`` (vectorized over nodes)."""
        x, y, z = self.nodes.T
        return float(self.weights @ np.broadcast_to(f(x, y, z), self.weights.shape))

    def with_(self, **changes):
        return replace(self, **changes)

    def content_hash(self):
        h = hashlib.sha256()
        h.update(str(int(self.degree)).encode())
        h.update(self.nodes.astype("<f8").tobytes())
        h.update(self.weights.astype("<f8").tobytes())
        return h.hexdigest()

    def to_json(self):
        doc = {
            "degree": int(self.degree),
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
            "moment_residual": float(self.moment_residual),
            "region_area": None if self.region_area is None else float(self.region_area),
        }
        if self.compressed:
            doc["compressed"] = True
            doc["parent_cardinality"] = int(self.parent_cardinality)
        return doc

    @classmethod
    def from_json(cls, doc):
        return cls(
            nodes=np.asarray(doc["nodes"], dtype=float),
            weights=np.asarray(doc["weights"], dtype=float),
            degree=int(doc["degree"]),
            moment_residual=float(doc.get("moment_residual", 0.0)),
            region_area=doc.get("region_area"),
            compressed=bool(doc.get("compressed", False)),
            parent_cardinality=doc.get("parent_cardinality"),
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path):
        return cls.from_json(json.loads(Path(path).read_text()))


def concatenate(rules, degree=None, region_area=None):
    return CubatureRule(
        np.concatenate([r.nodes for r in rules]),
        np.concatenate([r.weights for r in rules]),
        degree=rules[0].degree if degree is None else degree,
        region_area=region_area,
    )
