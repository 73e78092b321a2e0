"""Linear-chain CRF: log partition (differentiable), Viterbi, likelihoods.

A lattice holds per-position emission scores, a tag-transition matrix and
begin/end boundary scores.  Path score = begin[y0] + sum of emissions +
sum of transitions + end[y_last].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import autodiff as ad
from .nn.autodiff import Tensor


@dataclass
class TagLattice:
    """Scores may be ndarrays (decoding) or Tensors (training)."""

    emissions: object   # (n, K)
    transitions: object  # (K, K)
    begin: object       # (K,)
    end: object         # (K,)

    def __post_init__(self):
        n, k = _shape(self.emissions)
        if _shape(self.transitions) != (k, k):
            raise ValueError("transition matrix does not match the tag inventory")
        if _shape(self.begin) != (k,) or _shape(self.end) != (k,):
            raise ValueError("boundary scores do not match the tag inventory")

    @property
    def n_positions(self) -> int:
        return _shape(self.emissions)[0]

    @property
    def n_tags(self) -> int:
        return _shape(self.emissions)[1]


def _shape(x):
    return x.data.shape if isinstance(x, Tensor) else np.asarray(x).shape


def _tensors(lattice: TagLattice):
    return (ad.as_tensor(lattice.emissions), ad.as_tensor(lattice.transitions),
            ad.as_tensor(lattice.begin), ad.as_tensor(lattice.end))


def _arrays(lattice: TagLattice):
    def to_np(x):
        return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)

    return (to_np(lattice.emissions), to_np(lattice.transitions),
            to_np(lattice.begin), to_np(lattice.end))


def crf_log_partition(lattice: TagLattice) -> Tensor:
    """log sum over all K^n tag paths of exp(path score), by the forward
    recursion in log space; differentiable in every lattice score."""
    emissions, transitions, begin, end = _tensors(lattice)
    n, k = lattice.n_positions, lattice.n_tags
    if n == 0:
        raise ValueError("empty lattice")
    alpha = ad.add(begin, ad.reshape(ad.narrow(emissions, 0, 0, 1), (k,)))
    for t in range(1, n):
        em_t = ad.reshape(ad.narrow(emissions, 0, t, 1), (k,))
        expanded = ad.add(ad.reshape(alpha, (k, 1)), transitions)
        alpha = ad.add(ad.logsumexp(expanded, axis=0), em_t)
    return ad.logsumexp(ad.add(alpha, end), axis=0)


def path_score(lattice: TagLattice, tags) -> Tensor:
    """Differentiable score of one tag path."""
    emissions, transitions, begin, end = _tensors(lattice)
    n, k = lattice.n_positions, lattice.n_tags
    tags = list(tags)
    if len(tags) != n:
        raise ValueError(f"{len(tags)} tags for {n} positions")
    score = ad.tsum(ad.pick(emissions, tags))
    score = ad.add(score, ad.reshape(ad.narrow(begin, 0, tags[0], 1), ()))
    score = ad.add(score, ad.reshape(ad.narrow(end, 0, tags[-1], 1), ()))
    if n > 1:
        flat = ad.reshape(transitions, (k * k,))
        bigrams = [tags[t - 1] * k + tags[t] for t in range(1, n)]
        score = ad.add(score, ad.tsum(ad.take_rows(ad.reshape(flat, (k * k, 1)), bigrams)))
    return score


def crf_nll(lattice: TagLattice, tags) -> Tensor:
    """Negative log likelihood of the gold path (>= 0)."""
    return ad.sub(crf_log_partition(lattice), path_score(lattice, tags))


def crf_viterbi(lattice: TagLattice) -> list[int]:
    """Highest-scoring tag path; among ties, the lexicographically smallest
    tag-index sequence.

    Runs the max recursion backward with next-tag pointers, then reads the
    path forward: picking the lowest start and following first-argmax
    pointers yields the lexicographically smallest optimum without any
    floating-point equality tests.
    """
    emissions, transitions, begin, end = _arrays(lattice)
    n, k = emissions.shape
    if n == 0:
        raise ValueError("empty lattice")
    beta = np.empty((n, k))
    beta[n - 1] = emissions[n - 1] + end
    pointer = np.zeros((max(n - 1, 0), k), dtype=np.intp)
    for t in range(n - 2, -1, -1):
        options = transitions + beta[t + 1][None, :]  # (k current, k next)
        pointer[t] = np.argmax(options, axis=1)
        beta[t] = emissions[t] + options[np.arange(k), pointer[t]]
    path = [int(np.argmax(begin + beta[0]))]
    for t in range(n - 1):
        path.append(int(pointer[t, path[-1]]))
    return path


def viterbi_score(lattice: TagLattice) -> float:
    emissions, transitions, begin, end = _arrays(lattice)
    return float(path_score(
        TagLattice(emissions, transitions, begin, end), crf_viterbi(lattice)).item())
