"""Seedable, portable random streams.

All randomness in the package flows through :func:`derive_rng`: one root seed,
one named child stream per use site.  Streams are numpy ``Generator`` objects
backed by PCG64, whose bit stream is fixed by numpy across platforms, so
reruns with the same root seed are byte-identical.
"""
from __future__ import annotations

import hashlib

import numpy as np


def _tag_entropy(tag: str | int) -> int:
    if isinstance(tag, int):
        return tag & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_rng(root_seed: int, *tags: str | int) -> np.random.Generator:
    """Child PCG64 stream for ``(root_seed, *tags)``.

    Tags name the use site (e.g. ``derive_rng(seed, "world", "train")``);
    distinct tag sequences give statistically independent streams.
    """
    entropy = [int(root_seed) & 0xFFFFFFFFFFFFFFFF] + [_tag_entropy(t) for t in tags]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def categorical(rng: np.random.Generator, probs: np.ndarray, size: int) -> np.ndarray:
    """Sample ``size`` states from one discrete distribution (inverse CDF)."""
    cum = np.cumsum(np.asarray(probs, dtype=np.float64))
    u = rng.random(size)
    states = np.searchsorted(cum, u, side="right")
    return np.minimum(states, len(cum) - 1)


def categorical_rows(rng: np.random.Generator, prob_rows: np.ndarray) -> np.ndarray:
    """One sample per row of a (B, K) matrix of distributions."""
    cum = np.cumsum(np.asarray(prob_rows, dtype=np.float64), axis=1)
    u = rng.random(cum.shape[0])
    states = (cum <= u[:, None]).sum(axis=1)
    return np.minimum(states, cum.shape[1] - 1)
