"""Embedding containers, parameter sets and the text dump format."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field

import numpy as np

BACKENDS = ("netmf", "ppr")


@dataclass(frozen=True)
class EmbeddingParams:
    """One point of the embedding parameter grid.

    ``window``, ``negative`` and ``dim`` only matter for the netmf backend;
    a ppr embedding always has one column per node.
    """

    backend: str = "netmf"
    window: int = 5
    negative: int = 1
    dim: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        for name in ("window", "negative", "dim"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")

    def label(self) -> str:
        if self.backend == "ppr":
            return "ppr"
        return f"netmf(T={self.window},b={self.negative},d={self.dim})"

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class PprParams:
    alpha: float = 0.85
    tol: float = 1e-6
    max_iter: int = 100

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class Embedding:
    """Dense node embedding, row ``i`` belongs to node ``i``.

    ``zero_rows`` lists nodes whose row carries no structural information
    (degree-0 nodes); ``unconverged`` lists ppr sources that hit max_iter.
    """

    matrix: np.ndarray
    params: EmbeddingParams | None = None
    zero_rows: list = field(default_factory=list)
    unconverged: list = field(default_factory=list)

    def __post_init__(self):
        self.matrix = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2:
            raise ValueError("embedding matrix must be 2-D")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("embedding contains non-finite entries")

    @property
    def shape(self):
        return self.matrix.shape


def write_embedding(emb: Embedding | np.ndarray, sink) -> None:
    """Header ``n d`` then one row of ``d`` reals per line (shortest round-trip repr)."""
    X = emb.matrix if isinstance(emb, Embedding) else np.asarray(emb, dtype=np.float64)
    n, d = X.shape
    lines = [f"{n} {d}\n"]
    lines.extend(" ".join(repr(x) for x in row) + "\n" for row in X.tolist())
    text = "".join(lines)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sink.write(text)


def read_embedding(source) -> np.ndarray:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty embedding file")
    n, d = (int(x) for x in lines[0].split())
    rows = [[float(x) for x in line.split()] for line in lines[1:] if line.strip()]
    X = np.array(rows, dtype=np.float64).reshape(len(rows), d if rows else 0)
    if X.shape != (n, d):
        raise ValueError(f"header says {n}x{d}, found {X.shape[0]}x{X.shape[1] if X.ndim == 2 else 0}")
    return X
