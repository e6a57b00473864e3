"""scikit-learn style wrappers.

``MultipartiteSampler`` turns a parameter set into graphs; ``GroupieCounter``
is a stateless transformer from graphs to per-part groupie fractions. Both
follow the usual conventions (constructor only stores parameters, fitted
attributes end in ``_``) so they work with ``clone``, ``get_params`` and
pipelines.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_convention, check_count
from .groupie import degree_profile, groupie_report, threshold_counts
from .model import MultipartiteGraph, PartitionSpec, sample, uniform_spec
from .rng import Seed


def _as_graph_list(X) -> list[MultipartiteGraph]:
    if isinstance(X, MultipartiteGraph):
        return [X]
    graphs = list(X)
    if not graphs:
        raise ValueError("expected at least one graph")
    for g in graphs:
        if not isinstance(g, MultipartiteGraph):
            raise TypeError(f"expected MultipartiteGraph instances, got {type(g).__name__}")
    return graphs


class MultipartiteSampler(BaseEstimator):
    """Draw graphs from a uniform (``p``) or matrix (``edge_prob``) multipartite model.

    Parameters
    ----------
    part_sizes : sequence of int
    p : float, optional
        Common cross-part edge probability. Ignored when ``edge_prob`` is set.
    edge_prob : array-like of shape (k, k), optional
    seed : int
        Root seed; graph ``i`` of :meth:`sample` uses the child seed ``("graph", i)``.
    """

    def __init__(self, part_sizes=(1, 1), p=0.5, edge_prob=None, seed=0):
        self.part_sizes = part_sizes
        self.p = p
        self.edge_prob = edge_prob
        self.seed = seed

    def fit(self, X=None, y=None):
        if self.edge_prob is not None:
            self.spec_ = PartitionSpec(tuple(self.part_sizes), self.edge_prob)
        else:
            self.spec_ = uniform_spec(self.part_sizes, self.p)
        self.seed_ = Seed(self.seed)
        self.n_parts_ = self.spec_.k
        return self

    def sample(self, n_graphs: int = 1) -> list[MultipartiteGraph]:
        check_is_fitted(self, "spec_")
        n_graphs = check_count(n_graphs, "n_graphs")
        return [sample(self.spec_, self.seed_.child("graph", i)) for i in range(n_graphs)]


class GroupieCounter(TransformerMixin, BaseEstimator):
    """Map graphs to per-part groupie fractions (or counts).

    ``transform`` returns an array of shape ``(n_graphs, k)``. With
    ``thresholds=True`` the above/below counts for ``upper``/``lower`` are
    appended as ``2k`` further columns.
    """

    def __init__(self, convention="strict", normalize=True, thresholds=False,
                 upper=np.inf, lower=-np.inf):
        self.convention = convention
        self.normalize = normalize
        self.thresholds = thresholds
        self.upper = upper
        self.lower = lower

    def fit(self, X, y=None):
        graphs = _as_graph_list(X)
        self.convention_ = check_convention(self.convention)
        if float(self.lower) > float(self.upper):
            raise ValueError("lower threshold exceeds upper threshold")
        self.part_sizes_ = graphs[0].part_sizes
        self.n_parts_ = len(self.part_sizes_)
        return self

    def transform(self, X):
        check_is_fitted(self, "part_sizes_")
        graphs = _as_graph_list(X)
        rows = []
        for g in graphs:
            if g.part_sizes != self.part_sizes_:
                raise ValueError(
                    f"graph has parts {list(g.part_sizes)}, fitted on {list(self.part_sizes_)}"
                )
            prof = degree_profile(g)
            rep = groupie_report(g, prof, self.convention_)
            row = list(rep.fractions if self.normalize else rep.counts)
            if self.thresholds:
                tc = threshold_counts(g, prof, self.upper, self.lower)
                row += list(tc.above) + list(tc.below)
            rows.append(row)
        return np.array(rows, dtype=np.float64 if self.normalize else np.int64)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "part_sizes_")
        k = self.n_parts_
        names = [f"groupies_B{i + 1}" for i in range(k)]
        if self.thresholds:
            names += [f"above_B{i + 1}" for i in range(k)] + [f"below_B{i + 1}" for i in range(k)]
        return np.array(names, dtype=object)
