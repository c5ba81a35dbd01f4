"""Input checks shared by the estimator wrapper and the CLI."""

import numpy as np
from sklearn.utils.validation import check_array

from .core import ReachSpec
from .errors import ValidationError


def check_rows(X, d, name="X"):
    """2-d float array of finite rows of length ``d``."""
    try:
        X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_all_finite=True)
    except ValueError as exc:
        raise ValidationError(str(exc), field=name, code="invalid_array") from None
    if X.shape[1] != d:
        raise ValidationError(f"{name} has {X.shape[1]} columns, expected {d}", field=name, code="shape")
    return X


def build_spec(r, alpha=None, beta=None, x0=None, t=1.0):
    """Spec from loose parameters; ``r`` may be an int or a sequence."""
    if isinstance(r, (int, np.integer)) and not isinstance(r, bool):
        r = (int(r),)
    r = tuple(r)
    m = len(r)
    alpha = (-1.0,) * m if alpha is None else tuple(np.ravel(alpha).tolist())
    beta = (1.0,) * m if beta is None else tuple(np.ravel(beta).tolist())
    if x0 is not None:
        x0 = tuple(np.ravel(x0).tolist())
    return ReachSpec.create(r, alpha=alpha, beta=beta, x0=x0, t=t)
