"""scikit-learn adapter: class coordinates in, invariant features out."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import DimensionMismatch
from .invariants import MU_MODES, full_report
from .lattice import Lattice, load_lattice, polarize

FEATURES = ("self_int", "genus", "phi", "mu", "quarter_term", "gengon",
            "max_gonality", "k3_gonality", "k3_clifford")


class GonalityTransformer(TransformerMixin, BaseEstimator):
    """Map rows of integer class coordinates to exact invariants.

    ``fit`` only resolves the lattice and checks the width of ``X``; there is
    nothing to learn. ``transform`` returns an int64 array with one column
    per entry of ``FEATURES``; an unbounded mu is reported as -1, and the
    K3 columns are -1 off the Enriques lattice.
    """

    def __init__(self, lattice: str | Lattice = "enriques_num", mu_mode: str = "kl1_full",
                 ample=None):
        self.lattice = lattice
        self.mu_mode = mu_mode
        self.ample = ample

    def _check_X(self, X) -> np.ndarray:
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.lattice_.rank:
            raise DimensionMismatch(f"expected shape (n, {self.lattice_.rank}), got {X.shape}")
        if not np.issubdtype(X.dtype, np.integer):
            if not np.all(np.equal(np.mod(X, 1), 0)):
                raise ValueError("class coordinates must be integers")
            X = X.astype(np.int64)
        return X

    def fit(self, X, y=None):
        if self.mu_mode not in MU_MODES:
            raise ValueError(f"mu_mode must be one of {MU_MODES}, got {self.mu_mode!r}")
        L = self.lattice
        self.lattice_ = L if isinstance(L, Lattice) else load_lattice(L)
        X = self._check_X(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "lattice_")
        X = self._check_X(X)
        out = np.empty((X.shape[0], len(FEATURES)), dtype=np.int64)
        for i, row in enumerate(X.tolist()):
            rep = full_report(polarize(self.lattice_, row, self.ample), self.mu_mode,
                              with_dm=False)
            out[i] = [-1 if getattr(rep, f) is None else getattr(rep, f) for f in FEATURES]
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(FEATURES, dtype=object)
