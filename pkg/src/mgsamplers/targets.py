"""Potential-energy targets with gradients and analytic slice intervals.

1D targets evaluate elementwise (scalar in, scalar out; array in, array
out); multivariate targets take a single position vector. ``Target.energy``
and ``Target.grad`` give the uniform vector interface the samplers use.
Built-ins additionally carry an integer kernel code so the compiled
trajectory kernels can evaluate them without python callbacks.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from . import _kernels

_ROOT_RTOL = 1e-12  # relative tolerance for slice-interval root finding


@dataclass(frozen=True)
class Target:
    name: str
    dim: int
    potential: Callable
    gradient: Callable
    lower: np.ndarray
    upper: np.ndarray
    slice_interval: Optional[Callable] = None
    u_min: float = np.nan
    symmetry_center: Optional[float] = None
    kernel_code: int = _kernels.KERNEL_NONE
    kernel_params: np.ndarray = field(default_factory=lambda: _kernels._EMPTY_VECTOR)
    features: np.ndarray = field(default_factory=lambda: _kernels._EMPTY_MATRIX)
    labels: np.ndarray = field(default_factory=lambda: _kernels._EMPTY_VECTOR)

    def energy(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            return float(self.potential(float(x.reshape(-1)[0])))
        return float(self.potential(x))

    def grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            g = self.gradient(float(x.reshape(-1)[0]))
            return np.asarray(g, dtype=float).reshape(1)
        return np.asarray(self.gradient(x), dtype=float)


def _elementwise(f):
    def wrapped(x):
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = f(arr)
        return float(out[0]) if np.ndim(x) == 0 else out

    return wrapped


def exponential_target(theta: float) -> Target:
    """U(x) = x / theta on [0, inf)."""
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")

    @_elementwise
    def u(x):
        return np.where(x < 0, np.inf, x / theta)

    @_elementwise
    def du(x):
        return np.full_like(x, 1.0 / theta)

    def interval(h):
        if h < 0:
            return []
        return [(0.0, theta * h)]

    return Target(
        name="exponential",
        dim=1,
        potential=u,
        gradient=du,
        lower=np.array([0.0]),
        upper=np.array([np.inf]),
        slice_interval=interval,
        u_min=0.0,
        kernel_code=_kernels.KERNEL_EXPONENTIAL,
        kernel_params=np.array([theta]),
    )


def truncated_gaussian_target(theta: float) -> Target:
    """U(x) = theta * x^2 on [0, inf)."""
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")

    @_elementwise
    def u(x):
        return np.where(x < 0, np.inf, theta * x * x)

    @_elementwise
    def du(x):
        return 2.0 * theta * x

    def interval(h):
        if h < 0:
            return []
        return [(0.0, float(np.sqrt(h / theta)))]

    return Target(
        name="truncated_gaussian",
        dim=1,
        potential=u,
        gradient=du,
        lower=np.array([0.0]),
        upper=np.array([np.inf]),
        slice_interval=interval,
        u_min=0.0,
        kernel_code=_kernels.KERNEL_TRUNCATED_GAUSSIAN,
        kernel_params=np.array([theta]),
    )


def gamma_target(r: float, theta: float) -> Target:
    """U(x) = -(r - 1) log x + theta x on (0, inf); requires r > 1."""
    if r <= 1:
        raise ValueError(f"r must exceed 1 for a bounded density, got {r}")
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    mode = (r - 1.0) / theta

    @_elementwise
    def u(x):
        out = np.full(x.shape, np.inf)
        pos = x > 0
        xi = x[pos]
        out[pos] = -(r - 1.0) * np.log(xi) + theta * xi
        return out

    @_elementwise
    def du(x):
        return -(r - 1.0) / x + theta

    u_mode = u(mode)

    def interval(h):
        if h < u_mode:
            return []
        if h == u_mode:
            return [(mode, mode)]

        def g(x):
            return u(x) - h

        lo_bracket = mode
        while g(lo_bracket) < 0:
            lo_bracket /= 2.0
            if lo_bracket < 1e-300:
                break
        hi_bracket = mode + 1.0
        while g(hi_bracket) < 0:
            hi_bracket *= 2.0
        left = optimize.brentq(g, lo_bracket, mode, rtol=_ROOT_RTOL, maxiter=200)
        right = optimize.brentq(g, mode, hi_bracket, rtol=_ROOT_RTOL, maxiter=200)
        return [(float(left), float(right))]

    return Target(
        name="gamma",
        dim=1,
        potential=u,
        gradient=du,
        lower=np.array([0.0]),
        upper=np.array([np.inf]),
        slice_interval=interval,
        u_min=float(u_mode),
        kernel_code=_kernels.KERNEL_GAMMA,
        kernel_params=np.array([r, theta]),
    )


def bimodal_1d_target() -> Target:
    """Quartic double well U(x) = x^4 - 2 x^2; modes at +-1 with U = -1."""

    @_elementwise
    def u(x):
        x2 = x * x
        return x2 * x2 - 2.0 * x2

    @_elementwise
    def du(x):
        return 4.0 * x * x * x - 4.0 * x

    def interval(h):
        # roots of z^2 - 2z - h = 0 in z = x^2
        if h < -1.0:
            return []
        root = np.sqrt(1.0 + h)
        z_hi = 1.0 + root
        z_lo = 1.0 - root
        if z_lo <= 0.0:
            b = float(np.sqrt(z_hi))
            return [(-b, b)]
        inner, outer = float(np.sqrt(z_lo)), float(np.sqrt(z_hi))
        return [(-outer, -inner), (inner, outer)]

    return Target(
        name="bimodal_1d",
        dim=1,
        potential=u,
        gradient=du,
        lower=np.array([-np.inf]),
        upper=np.array([np.inf]),
        slice_interval=interval,
        u_min=-1.0,
        symmetry_center=0.0,
        kernel_code=_kernels.KERNEL_BIMODAL_1D,
    )


def bimodal_2d_target() -> Target:
    """Double well along s = x1 + x2 with a quadratic bowl in d = x1 - x2.

    U = -0.2 s^2 + 0.01 s^4 + 0.4 d^2. With -0.4 d^2 the density would not
    be integrable (exp(+0.4 d^2) blows up along d), so the difference term
    carries a positive sign; runs record this in their manifest.
    """

    def u(x):
        s = x[0] + x[1]
        d = x[0] - x[1]
        return -0.2 * s * s + 0.01 * s ** 4 + 0.4 * d * d

    def du(x):
        s = x[0] + x[1]
        d = x[0] - x[1]
        ds = -0.4 * s + 0.04 * s ** 3
        dd = 0.8 * d
        return np.array([ds + dd, ds - dd])

    return Target(
        name="bimodal_2d",
        dim=2,
        potential=u,
        gradient=du,
        lower=np.array([-np.inf, -np.inf]),
        upper=np.array([np.inf, np.inf]),
        u_min=-1.0,
        symmetry_center=0.0,
        kernel_code=_kernels.KERNEL_BIMODAL_2D,
    )


BIMODAL_2D_SIGN_NOTE = (
    "difference-term sign flipped to +0.4*(x1-x2)^2; "
    "the -0.4 variant has a non-integrable density"
)


@dataclass(frozen=True)
class LabeledDataset:
    """Normalized feature matrix with +-1 labels and an appended bias column."""

    features: np.ndarray
    labels: np.ndarray
    name: str
    dropped_columns: tuple = ()

    @property
    def n_instances(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def _finalize_dataset(features, labels, name):
    """Column-normalize, drop constant columns, append a bias column."""
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if features.size:
        std = features.std(axis=0)
        keep = std > 0
        dropped = tuple(int(i) for i in np.nonzero(~keep)[0])
        if dropped:
            warnings.warn(f"dropping constant feature column(s) {dropped} in {name}")
        features = features[:, keep]
        features = (features - features.mean(axis=0)) / features.std(axis=0)
    else:
        dropped = ()
    bias = np.ones((features.shape[0], 1))
    return LabeledDataset(
        features=np.hstack([features, bias]),
        labels=labels,
        name=name,
        dropped_columns=dropped,
    )


def _coerce_labels(raw, path):
    values = set(np.unique(raw).tolist())
    if values <= {-1.0, 1.0}:
        return np.asarray(raw, dtype=float)
    if values <= {0.0, 1.0}:
        return 2.0 * np.asarray(raw, dtype=float) - 1.0
    raise ValueError(f"{path}: labels must be in {{-1,+1}} or {{0,1}}, found {sorted(values)}")


def load_dataset(path, delimiter=None, label_column=-1, name=None) -> LabeledDataset:
    """Parse a delimited text file into a normalized labeled dataset.

    ``delimiter=None`` autodetects comma versus whitespace. Malformed rows
    are reported with their line numbers; labels may be 0/1 or -1/+1.
    """
    with open(path) as fh:
        lines = fh.readlines()
    rows = []
    errors = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        sep = delimiter
        if sep is None:
            sep = "," if "," in text else None
        parts = text.split(sep)
        try:
            row = [float(v) for v in parts]
        except ValueError:
            errors.append(f"line {lineno}: non-numeric field")
            continue
        if width is None:
            width = len(row)
        elif len(row) != width:
            errors.append(f"line {lineno}: expected {width} fields, got {len(row)}")
            continue
        rows.append(row)
    if errors:
        raise ValueError(f"{path}: " + "; ".join(errors))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array(rows)
    labels = _coerce_labels(data[:, label_column], path)
    features = np.delete(data, label_column % data.shape[1], axis=1)
    return _finalize_dataset(features, labels, name or str(path))


def synthetic_logistic_dataset(n_instances=250, n_features=7, seed=0,
                               name="synthetic_logistic") -> LabeledDataset:
    """Separable-ish synthetic binary dataset for desk-scale posterior runs."""
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n_instances, n_features))
    beta = rng.standard_normal(n_features)
    logits = features @ beta + 0.3 * rng.standard_normal(n_instances)
    labels = np.where(logits > 0, 1.0, -1.0)
    return _finalize_dataset(features, labels, name)


def blr_target(data: LabeledDataset, prior_variance: float = 100.0) -> Target:
    """Logistic-regression negative log posterior with an isotropic prior."""
    if prior_variance <= 0:
        raise ValueError(f"prior_variance must be positive, got {prior_variance}")
    features = np.ascontiguousarray(data.features, dtype=float)
    labels = np.ascontiguousarray(data.labels, dtype=float)
    dim = features.shape[1]

    def u(beta):
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        if beta.shape != (dim,):
            raise ValueError(f"expected beta of shape ({dim},), got {beta.shape}")
        t = labels * (features @ beta)
        loss = float(np.sum(np.logaddexp(0.0, -t)))
        return loss + float(beta @ beta) / (2.0 * prior_variance)

    def du(beta):
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        if beta.shape != (dim,):
            raise ValueError(f"expected beta of shape ({dim},), got {beta.shape}")
        t = labels * (features @ beta)
        # sigmoid(-t), evaluated stably on both tails
        sig = np.where(t > 0, np.exp(-np.logaddexp(0.0, t)), 1.0 / (1.0 + np.exp(np.minimum(t, 0.0))))
        return beta / prior_variance - features.T @ (labels * sig)

    return Target(
        name=f"blr[{data.name}]",
        dim=dim,
        potential=u,
        gradient=du,
        lower=np.full(dim, -np.inf),
        upper=np.full(dim, np.inf),
        kernel_code=_kernels.KERNEL_BLR,
        kernel_params=np.array([prior_variance]),
        features=features,
        labels=labels,
    )
