"""scikit-learn adapter: descriptor evaluation as a feature transform.

Everything else in this package is function-shaped; this module wraps batch
evaluation in the estimator protocol so descriptor columns can sit inside
Pipelines and grid searches. scikit-learn is an optional dependency pulled
in only when this module is imported.
"""
from __future__ import annotations

from typing import Optional, Union

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .descriptors import DescriptorSpec, evaluate_batch
from .errors import LdescError
from .integrate import IntegratorConfig
from .systems import DiscreteMap2D, FlowSystem, get


class DescriptorTransformer(BaseEstimator, TransformerMixin):
    """Maps rows of initial conditions to a single descriptor column.

    system is a catalog name or an already-built system object. The
    descriptor parameters mirror DescriptorSpec: continuous kinds need tau
    (t0 and, for L_forward, speed apply), MD_p needs p and n and a
    discrete-map system. Rows whose evaluation fails raise instead of
    returning a poisoned column: inside a Pipeline a silent nan row would
    surface as a confusing downstream error.
    """

    def __init__(
        self,
        system: Union[str, FlowSystem, DiscreteMap2D, None] = None,
        kind: str = "M_both",
        tau: Optional[float] = None,
        t0: float = 0.0,
        p: Optional[float] = None,
        n: Optional[int] = None,
        speed: str = "phase",
        rel_tol: float = 1e-9,
        abs_tol: float = 1e-11,
    ):
        self.system = system
        self.kind = kind
        self.tau = tau
        self.t0 = t0
        self.p = p
        self.n = n
        self.speed = speed
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol

    def fit(self, X, y=None):
        if self.system is None:
            raise ValueError("system must be a catalog name or a system object")
        if isinstance(self.system, str):
            self.system_ = get(self.system)
        elif isinstance(self.system, (FlowSystem, DiscreteMap2D)):
            self.system_ = self.system
        else:
            raise TypeError(f"cannot use {type(self.system).__name__} as a system")
        self.spec_ = DescriptorSpec(
            kind=self.kind, tau=self.tau, t0=self.t0, p=self.p, n=self.n,
            speed=self.speed,
        )
        self.config_ = IntegratorConfig(rel_tol=self.rel_tol, abs_tol=self.abs_tol)
        X = check_array(X)
        self._check_width(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "spec_")
        X = check_array(X)
        self._check_width(X)
        values, failures = evaluate_batch(
            self.system_, np.ascontiguousarray(X, dtype=float),
            self.spec_, self.config_,
        )
        if failures:
            row, tag = failures[0]
            raise LdescError(
                f"{len(failures)} of {X.shape[0]} rows failed "
                f"(first: row {row}, {tag})"
            )
        return values[:, None]

    def _check_width(self, X) -> None:
        expected = (
            2 if isinstance(self.system_, DiscreteMap2D)
            else self.system_.dimension
        )
        if X.shape[1] != expected:
            raise ValueError(
                f"{self.system_.name} needs {expected} columns, got {X.shape[1]}"
            )
