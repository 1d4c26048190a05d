"""Record-based path parameter from relative entropies of successive states."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .config import NumericalConfig
from .exceptions import DimensionMismatch, SupportViolation, TooFewSamples
from .quantum import decode_operator, encode_array
from .validation import check_density_operator

__all__ = [
    "RecordSequence",
    "relative_entropy",
    "record_terms",
    "record_partial_sums",
    "record_lambda",
]


@dataclass(frozen=True, eq=False)
class RecordSequence:
    """Density operators ``rho_0 ... rho_K`` of successive records."""

    states: np.ndarray

    def __post_init__(self):
        states = [check_density_operator(s) for s in self.states]
        if len(states) < 2:
            raise TooFewSamples("a record sequence needs at least two states")
        if len({s.shape for s in states}) != 1:
            raise DimensionMismatch("all records must share a dimension")
        object.__setattr__(self, "states", np.array(states))

    def __len__(self):
        return self.states.shape[0]

    def append(self, rho) -> "RecordSequence":
        return RecordSequence(np.concatenate([self.states, [np.asarray(rho, dtype=complex)]]))

    def to_json(self) -> dict:
        return {"states": [encode_array(s) for s in self.states]}

    @classmethod
    def from_json(cls, source) -> "RecordSequence":
        """Accept a parsed document, JSON text or a file path.

        The document is either ``{"states": [...]}`` or a bare list of matrices
        whose entries are ``[re, im]`` pairs.
        """
        if isinstance(source, (str, os.PathLike)):
            if os.path.exists(source):
                with open(source) as fh:
                    source = json.load(fh)
            else:
                source = json.loads(source)
        mats = source["states"] if isinstance(source, dict) else source
        return cls(np.array([decode_operator(m) for m in mats]))


def _spectrum(rho):
    evals, evecs = np.linalg.eigh(rho)
    return np.clip(evals, 0.0, None), evecs


def relative_entropy(rho, sigma, cfg: NumericalConfig | None = None) -> float:
    """Quantum relative entropy ``Tr[rho (ln rho - ln sigma)]`` in nats.

    Eigenvalues below ``eig_cutoff * trace`` count as outside the support.
    Raises :class:`SupportViolation` when ``rho`` has weight where ``sigma``
    has none, i.e. when the states are perfectly distinguishable.
    """
    cfg = cfg or NumericalConfig()
    rho = check_density_operator(rho)
    sigma = check_density_operator(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"states have shapes {rho.shape} and {sigma.shape}")
    p, _ = _spectrum(rho)
    s, v = _spectrum(sigma)
    cutoff = cfg.eig_cutoff
    support = s > cutoff
    # weight of rho in sigma's eigenbasis
    weights = np.real(np.einsum("ji,jk,ki->i", v.conj(), rho, v))
    outside = float(np.sum(weights[~support]))
    if outside > cutoff:
        raise SupportViolation(
            f"rho has weight {outside:.3g} outside the support of sigma: "
            "relative entropy is infinite")
    kept = p > cutoff
    entropy_term = float(np.sum(p[kept] * np.log(p[kept])))
    cross_term = float(np.sum(weights[support] * np.log(s[support])))
    return max(entropy_term - cross_term, 0.0)


def record_terms(seq: RecordSequence, cfg: NumericalConfig | None = None) -> np.ndarray:
    """``D(rho_k || rho_{k-1})`` for ``k = 1 .. K``."""
    terms = []
    for k in range(1, len(seq)):
        try:
            terms.append(relative_entropy(seq.states[k], seq.states[k - 1], cfg))
        except SupportViolation as exc:
            raise SupportViolation(f"record {k}: {exc}", index=k) from exc
    return np.array(terms)


def record_partial_sums(seq: RecordSequence, cfg: NumericalConfig | None = None) -> np.ndarray:
    """Running record parameter after each record, starting at 0."""
    return np.concatenate([[0.0], np.cumsum(record_terms(seq, cfg))])


def record_lambda(seq: RecordSequence, cfg: NumericalConfig | None = None) -> float:
    """Accumulated distinguishability of the record sequence."""
    return float(np.sum(record_terms(seq, cfg)))
