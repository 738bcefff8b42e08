"""scikit-learn style wrappers over the scan functions.

Each row of ``X`` is one shift vector ``b`` (length ``m``). Entries may be
numbers or strings such as ``"1/6"`` and ``"golden"``.
The matrix ``A`` is a constructor parameter, so ``get_params`` and
``clone`` work as usual.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import scalar as sc
from .diophantine import AffineSystem, badness_scan, trajectory_minima
from .lattice import FlowSchedule


def _scalar(x):
    return sc.parse_scalar(x) if isinstance(x, str) else sc.to_scalar(x)


def _rows(X):
    rows = [[_scalar(v) for v in (row if isinstance(row, (list, tuple, np.ndarray)) else [row])] for row in X]
    if not rows:
        raise ValueError("X is empty")
    return rows


def _matrix(A):
    if isinstance(A, str):
        return [[_scalar(v) for v in r.split(",")] for r in A.split(";") if r.strip()]
    return [[_scalar(v) for v in row] for row in A]


class BadnessScanner(TransformerMixin, BaseEstimator):
    """``transform`` maps each ``b`` to ``min_{0<|q|<=Q} |q|^n ||Aq - b||_Z^m``.

    After ``fit`` the full estimates are kept in ``estimates_`` and the
    per-row tail minima in ``tail_minima_``.
    """

    def __init__(self, A="1/3", Q=1000):
        self.A = A
        self.Q = Q

    def fit(self, X, y=None):
        A = _matrix(self.A)
        rows = _rows(X)
        if any(len(r) != len(A) for r in rows):
            raise ValueError(f"each row of X needs {len(A)} entries")
        self.estimates_ = [badness_scan(AffineSystem(A, b), self.Q) for b in rows]
        self.tail_minima_ = np.array([sc.to_float(e.tail_minimum()) for e in self.estimates_])
        self.n_features_in_ = len(A)
        return self

    def transform(self, X):
        A = _matrix(self.A)
        return np.array([[sc.to_float(badness_scan(AffineSystem(A, b), self.Q).min_product)] for b in _rows(X)])

    def fit_transform(self, X, y=None):
        self.fit(X)
        return np.array([[sc.to_float(e.min_product)] for e in self.estimates_])


class TrajectoryScanner(TransformerMixin, BaseEstimator):
    """``transform`` maps each ``b`` to the distances of ``g^l L_A(b) Z^k`` to the origin, ``l = 0..L``."""

    def __init__(self, A="1/3", u="1/2", L=20):
        self.A = A
        self.u = u
        self.L = L

    def _schedule(self, A):
        return FlowSchedule(len(A), len(A[0]), _scalar(self.u))

    def fit(self, X, y=None):
        A = _matrix(self.A)
        self.schedule_ = self._schedule(A)
        self.n_features_in_ = len(A)
        return self

    def transform(self, X):
        A = _matrix(self.A)
        F = self._schedule(A)
        out = []
        for b in _rows(X):
            S = AffineSystem(A, b)
            rep = trajectory_minima(S, F, self.L, exclude_origin=S.b_is_integral())
            out.append([sc.to_float(d) for _, _, d in rep.minima])
        return np.array(out)
