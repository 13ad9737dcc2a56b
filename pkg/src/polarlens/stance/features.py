"""Node features from text: hashed unigram counts.

Each user's concatenated authored text is tokenized, token counts are
hashed into a fixed number of buckets with a sign hash to keep the
estimator unbiased, and the vector is L2-normalized. The hash is a keyed
blake2b digest, so vectors are stable across processes and platforms.

An externally computed embedding file (JSON Lines of user_id plus an
embedding array) can override the hashed features user by user.
"""

from __future__ import annotations

import hashlib
import json
import re
from typing import IO, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..errors import InvalidArgumentError

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def _hash_token(token: str) -> tuple[int, int]:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=9).digest()
    bucket_bits = int.from_bytes(digest[:8], "little")
    sign = 1 if digest[8] & 1 else -1
    return bucket_bits, sign


def hash_text(text: str, dim: int) -> np.ndarray:
    """Hashed, L2-normalized unigram counts; empty text gives a zero vector."""
    vec = np.zeros(dim, dtype=np.float64)
    for token in _TOKEN_RE.findall(text.lower()):
        bucket_bits, sign = _hash_token(token)
        vec[bucket_bits & (dim - 1)] += sign
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


class HashedTextVectorizer(BaseEstimator, TransformerMixin):
    """Stateless transformer from raw texts to hashed feature rows."""

    def __init__(self, n_features: int = 256):
        self.n_features = n_features

    def fit(self, X, y=None):
        _check_dim(self.n_features)
        return self

    def transform(self, X: Sequence[str]) -> np.ndarray:
        _check_dim(self.n_features)
        return np.vstack([hash_text(text, self.n_features) for text in X])


def _check_dim(dim: int) -> None:
    if dim < 1 or dim & (dim - 1) != 0:
        raise InvalidArgumentError(f"feature dimension must be a power of two, got {dim}")


def extract_features(
    user_texts: Mapping[str, str],
    dim: int = 256,
    external: Mapping[str, np.ndarray] | None = None,
) -> dict[str, np.ndarray]:
    """Feature vector per user; external embeddings override hashed ones."""
    _check_dim(dim)
    if external:
        for user, vec in external.items():
            if len(vec) != dim:
                raise InvalidArgumentError(
                    f"external embedding for {user!r} has dimension {len(vec)}, expected {dim}"
                )
    features = {}
    for user in sorted(user_texts):
        if external and user in external:
            features[user] = np.asarray(external[user], dtype=np.float64)
        else:
            features[user] = hash_text(user_texts[user], dim)
    return features


def read_external_embeddings(fh: IO[str]) -> dict[str, np.ndarray]:
    out = {}
    for line in fh:
        if not line.strip():
            continue
        row = json.loads(line)
        out[row["user_id"]] = np.asarray(row["embedding"], dtype=np.float64)
    return out


def concatenated_texts(tweets) -> dict[str, str]:
    """All authored text per user, joined in corpus order."""
    parts: dict[str, list[str]] = {}
    for tweet in tweets:
        parts.setdefault(tweet.author_id, []).append(tweet.text)
    return {user: " ".join(chunks) for user, chunks in parts.items()}
