"""Log-utility regression with a fixed 16-term quadratic/interaction form.

The response is ``log10(E[u])`` of one neighbourhood; the regressors are
built from the instance descriptors ``M, J, S``, ``t' = log10(t)`` and
``sx' = log10(s_x)``:

    b0, M, J, S, t', sx', t'^2, M^2, J^2, S^2, sx'^2,
    J t', J M, J S, M S, M sx'

Fitting standardizes the non-constant columns, solves the least-squares
problem by QR and maps coefficients back to raw units.
"""

import json
import math
import os

import numpy as np
from scipy.linalg import solve_triangular
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import FitError, ParseError, SingularFitError
from .neighbourhoods import NEIGHBOURHOODS, Neighbourhood

FEATURE_NAMES = ("b0", "M", "J", "S", "t", "sx", "tt", "MM", "JJ", "SS",
                 "sxsx", "Jt", "JM", "JS", "MS", "Msx")
RAW_NAMES = ("M", "J", "S", "t", "s_x")
T_MIN = 1e-3
ALIAS_RTOL = 1e-9


def design_matrix(X, t_min=T_MIN):
    """Map raw rows ``(M, J, S, t, s_x)`` to the 16 model columns."""
    X = check_array(X, dtype=np.float64, ensure_min_samples=0)
    if X.shape[1] != 5:
        raise ValueError(f"expected 5 raw features {RAW_NAMES}, got {X.shape[1]}")
    M, J, S, t, sx = X.T
    if np.any(sx < 1):
        raise ValueError("s_x must be >= 1")
    if np.any(t <= 0):
        raise ValueError("normalized time must be positive")
    tp = np.log10(np.clip(t, t_min, 1.0))
    sxp = np.log10(sx)
    return np.column_stack([
        np.ones_like(M), M, J, S, tp, sxp, tp * tp, M * M, J * J, S * S,
        sxp * sxp, J * tp, J * M, J * S, M * S, M * sxp,
    ])


class UtilityFeatures(TransformerMixin, BaseEstimator):
    """Stateless transformer wrapping :func:`design_matrix`."""

    def __init__(self, t_min=T_MIN):
        self.t_min = t_min

    def fit(self, X, y=None):
        self.n_features_in_ = 5
        return self

    def transform(self, X):
        return design_matrix(X, self.t_min)

    def get_feature_names_out(self, input_features=None):
        return np.asarray(FEATURE_NAMES, dtype=object)


def fit_ols(design, response, names=FEATURE_NAMES, aliased="raise"):
    """Ordinary least squares on a design whose first column is the intercept.

    Parameters
    ----------
    design : ndarray of shape (n_rows, n_columns)
    response : ndarray of shape (n_rows,)
    names : sequence of str
        Column names, used in error messages.
    aliased : {"raise", "drop"}
        What to do with columns that are linear combinations of earlier
        columns. ``"raise"`` raises :class:`SingularFitError`; ``"drop"``
        fixes their coefficients at 0 and fits the rest.

    Returns
    -------
    coef : ndarray of shape (n_columns,)
        Coefficients in raw (unstandardized) units.
    dropped : list of str
        Names of aliased columns (empty unless ``aliased="drop"``).
    """
    X = np.asarray(design, dtype=np.float64)
    y = np.asarray(response, dtype=np.float64)
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError("response length does not match the design")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("design and response must be finite")
    if aliased not in ("raise", "drop"):
        raise ValueError("aliased must be 'raise' or 'drop'")
    if n < p and aliased == "raise":
        raise FitError(f"need at least {p} rows, got {n}")

    mean = X[:, 1:].mean(axis=0)
    scale = X[:, 1:].std(axis=0)
    constant = scale <= ALIAS_RTOL * np.maximum(np.abs(mean), 1.0)
    Z = np.ones_like(X)
    with np.errstate(invalid="ignore", divide="ignore"):
        Z[:, 1:] = np.where(constant, 0.0, (X[:, 1:] - mean) / scale)

    keep = _admit_columns(Z, ~np.concatenate([[False], constant]))
    dropped = [names[k] for k in range(p) if not keep[k]]
    if dropped and aliased == "raise":
        raise SingularFitError(dropped)
    if keep.sum() > n:
        raise FitError(f"need at least {int(keep.sum())} rows, got {n}")

    Q, R = np.linalg.qr(Z[:, keep])
    gamma = solve_triangular(R, Q.T @ y)
    full = np.zeros(p)
    full[keep] = gamma
    coef = np.zeros(p)
    coef[1:] = np.where(keep[1:], full[1:] / np.where(constant, 1.0, scale), 0.0)
    coef[0] = full[0] - float(np.dot(coef[1:], mean))
    return coef, dropped


def _admit_columns(Z, candidate):
    """Walk the columns in order, admitting each one that adds a new
    direction (relative residual above ALIAS_RTOL) to those admitted."""
    n = Z.shape[0]
    tol = ALIAS_RTOL * math.sqrt(n)
    admitted = [0]
    basis = Z[:, [0]] / math.sqrt(n)
    for k in range(1, Z.shape[1]):
        if not candidate[k]:
            continue
        col = Z[:, k]
        resid = col - basis @ (basis.T @ col)
        resid -= basis @ (basis.T @ resid)
        if np.linalg.norm(resid) > tol:
            admitted.append(k)
            basis = np.column_stack([basis, resid / np.linalg.norm(resid)])
    keep = np.zeros(Z.shape[1], dtype=bool)
    keep[admitted] = True
    return keep


class UtilityRegressor(RegressorMixin, BaseEstimator):
    """Least-squares model of ``log10(E[u])`` for one neighbourhood.

    ``fit`` and ``predict`` take raw rows ``(M, J, S, t, s_x)``.

    Parameters
    ----------
    neighbourhood : Neighbourhood or None
    t_min : float, default=1e-3
        Normalized time is clamped to ``[t_min, 1]`` before the log.
    aliased : {"raise", "drop"}, default="raise"
        Handling of aliased model terms, see :func:`fit_ols`.

    Attributes
    ----------
    coef_ : ndarray of shape (16,)
        Coefficients in ``FEATURE_NAMES`` order (``coef_[0]`` is b0).
    n_rows_, rss_, r2_ : fit diagnostics.
    dropped_terms_ : list of str
        Aliased terms fixed at zero.
    n_zero_utility_ : int
        Events skipped because their utility was zero (set by
        :func:`fit_models`).
    """

    def __init__(self, neighbourhood=None, t_min=T_MIN, aliased="raise"):
        self.neighbourhood = neighbourhood
        self.t_min = t_min
        self.aliased = aliased

    def fit(self, X, y):
        design = design_matrix(X, self.t_min)
        y = np.asarray(y, dtype=np.float64)
        if design.shape[0] == 0:
            raise FitError("no rows to fit")
        self.coef_, self.dropped_terms_ = fit_ols(design, y, aliased=self.aliased)
        resid = y - design @ self.coef_
        self.n_rows_ = int(design.shape[0])
        self.rss_ = float(resid @ resid)
        tss = float(((y - y.mean()) ** 2).sum())
        self.r2_ = 1.0 - self.rss_ / tss if tss > 0 else float(self.rss_ == 0.0)
        self.n_features_in_ = 5
        self.n_zero_utility_ = getattr(self, "n_zero_utility_", 0)
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return design_matrix(X, self.t_min) @ self.coef_

    def bind(self, M, J, S):
        """Collapse the model for fixed ``(M, J, S)`` into a quadratic in
        ``t'`` and ``sx'``: returns ``(c0, ct, ctt, csx, csxsx)``."""
        check_is_fitted(self, "coef_")
        b = dict(zip(FEATURE_NAMES, self.coef_.tolist()))
        c0 = (b["b0"] + b["M"] * M + b["J"] * J + b["S"] * S + b["MM"] * M * M
              + b["JJ"] * J * J + b["SS"] * S * S + b["JM"] * J * M
              + b["JS"] * J * S + b["MS"] * M * S)
        return (c0, b["t"] + b["Jt"] * J, b["tt"], b["sx"] + b["Msx"] * M,
                b["sxsx"])

    def to_dict(self):
        check_is_fitted(self, "coef_")
        nb = Neighbourhood(self.neighbourhood)
        return {
            "id": nb.label,
            "beta": dict(zip(FEATURE_NAMES, self.coef_.tolist())),
            "rows": self.n_rows_,
            "rss": self.rss_,
            "r2": self.r2_,
            "zero_utility_rows": self.n_zero_utility_,
            "dropped_terms": list(self.dropped_terms_),
        }

    @classmethod
    def from_dict(cls, data):
        beta = data["beta"]
        missing = [name for name in FEATURE_NAMES if name not in beta]
        if missing:
            raise ParseError(f"model for {data.get('id')!r} lacks terms {missing}")
        model = cls(neighbourhood=Neighbourhood.from_label(data["id"]))
        model.coef_ = np.array([float(beta[name]) for name in FEATURE_NAMES])
        if not np.all(np.isfinite(model.coef_)):
            raise ParseError("model coefficients must be finite")
        model.n_rows_ = int(data["rows"])
        model.rss_ = float(data["rss"])
        model.r2_ = float(data["r2"])
        model.n_zero_utility_ = int(data.get("zero_utility_rows", 0))
        model.dropped_terms_ = list(data.get("dropped_terms", []))
        model.n_features_in_ = 5
        return model


def predict_log_utility(model, M, J, S, t, s_x):
    """Predicted ``log10(E[u])`` at one point; ``t`` is clamped to
    ``[t_min, 1]``."""
    values = (M, J, S, t, s_x)
    if not all(math.isfinite(v) for v in values):
        raise ValueError("features must be finite")
    return float(model.predict(np.array([values], dtype=np.float64))[0])


def raw_features(events, neighbourhood):
    """Raw regressors and response for one neighbourhood.

    Returns ``(X, y, n_zero)`` where events with zero expected utility
    are skipped (their log is undefined) and counted in ``n_zero``.
    """
    nb = Neighbourhood(neighbourhood)
    rows, response = [], []
    n_zero = 0
    for ev in events:
        u = ev.stats_for(nb).expected_utility
        if u > 0:
            rows.append((ev.M, ev.J, ev.S, ev.t, ev.spt))
            response.append(math.log10(u))
        else:
            n_zero += 1
    X = np.array(rows, dtype=np.float64).reshape(-1, 5)
    return X, np.array(response, dtype=np.float64), n_zero


def build_design(events, neighbourhood, t_min=T_MIN):
    """Design matrix (16 columns) and response for one neighbourhood."""
    X, y, _ = raw_features(events, neighbourhood)
    if len(y) == 0:
        raise FitError(f"no positive-utility events for "
                       f"{Neighbourhood(neighbourhood).label}")
    return design_matrix(X, t_min), y


def fit_models(events, aliased="raise", t_min=T_MIN):
    """Fit one :class:`UtilityRegressor` per neighbourhood."""
    events = list(events)
    models = {}
    for nb in NEIGHBOURHOODS:
        X, y, n_zero = raw_features(events, nb)
        if len(y) == 0:
            raise FitError(f"no positive-utility events for {nb.label}")
        model = UtilityRegressor(neighbourhood=nb, t_min=t_min, aliased=aliased)
        model.n_zero_utility_ = n_zero
        models[nb] = model.fit(X, y)
    return models


def save_models(models, destination):
    payload = [models[nb].to_dict() for nb in NEIGHBOURHOODS]
    text = json.dumps(payload, indent=2) + "\n"
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        destination.write(text)
    return text


def load_models(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid model file: {exc.msg}", exc.lineno) from None
    if not isinstance(payload, list):
        raise ParseError("model file must hold a JSON array")
    models = {}
    for item in payload:
        try:
            model = UtilityRegressor.from_dict(item)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad model entry: {exc}") from None
        models[Neighbourhood(model.neighbourhood)] = model
    missing = [nb.label for nb in NEIGHBOURHOODS if nb not in models]
    if missing:
        raise ParseError(f"model file lacks neighbourhoods {missing}")
    return models
