"""Hot leapfrog trajectory kernels, numba-compiled with a pure-numpy fallback.

Set the environment variable ``MGS_DISABLE_NUMBA=1`` before import to force
the un-jitted numpy path (used for debugging and by the kernel benchmark).
Built-in targets are identified by an integer code so that the whole
trajectory loop can run inside a single compiled function.
"""

import os

import numpy as np


def _flag_set(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes")


NUMBA_ENABLED = not _flag_set("MGS_DISABLE_NUMBA")
if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


# target codes; -1 means "no compiled kernel, use the generic python path"
KERNEL_NONE = -1
KERNEL_EXPONENTIAL = 0
KERNEL_TRUNCATED_GAUSSIAN = 1
KERNEL_GAMMA = 2
KERNEL_BIMODAL_1D = 3
KERNEL_BIMODAL_2D = 4
KERNEL_BLR = 5

_EMPTY_MATRIX = np.empty((0, 0), dtype=np.float64)
_EMPTY_VECTOR = np.empty(0, dtype=np.float64)


@njit(cache=True)
def potential(code, params, features, labels, x):
    if code == 0:  # exponential, U = x / theta on x >= 0
        if x[0] < 0.0:
            return np.inf
        return x[0] / params[0]
    if code == 1:  # truncated gaussian, U = theta * x^2 on x >= 0
        if x[0] < 0.0:
            return np.inf
        return params[0] * x[0] * x[0]
    if code == 2:  # gamma, U = -(r-1) log x + theta x on x > 0
        if x[0] <= 0.0:
            return np.inf
        return -(params[0] - 1.0) * np.log(x[0]) + params[1] * x[0]
    if code == 3:  # 1d quartic double well
        x2 = x[0] * x[0]
        return x2 * x2 - 2.0 * x2
    if code == 4:  # 2d double well in s = x1+x2, bowl in d = x1-x2
        s = x[0] + x[1]
        d = x[0] - x[1]
        return -0.2 * s * s + 0.01 * s * s * s * s + 0.4 * d * d
    if code == 5:  # logistic regression negative log posterior
        acc = 0.0
        for i in range(features.shape[0]):
            t = 0.0
            for j in range(features.shape[1]):
                t += features[i, j] * x[j]
            t *= labels[i]
            if t > 0.0:
                acc += np.log1p(np.exp(-t))
            else:
                acc += -t + np.log1p(np.exp(t))
        pv = params[0]
        for j in range(x.shape[0]):
            acc += x[j] * x[j] / (2.0 * pv)
        return acc
    return np.inf


@njit(cache=True)
def gradient(code, params, features, labels, x, out):
    if code == 0:
        out[0] = 1.0 / params[0]
    elif code == 1:
        out[0] = 2.0 * params[0] * x[0]
    elif code == 2:
        out[0] = -(params[0] - 1.0) / x[0] + params[1]
    elif code == 3:
        out[0] = 4.0 * x[0] * x[0] * x[0] - 4.0 * x[0]
    elif code == 4:
        s = x[0] + x[1]
        d = x[0] - x[1]
        ds = -0.4 * s + 0.04 * s * s * s
        dd = 0.8 * d
        out[0] = ds + dd
        out[1] = ds - dd
    elif code == 5:
        pv = params[0]
        for j in range(x.shape[0]):
            out[j] = x[j] / pv
        for i in range(features.shape[0]):
            t = 0.0
            for j in range(features.shape[1]):
                t += features[i, j] * x[j]
            t *= labels[i]
            if t > 0.0:
                e = np.exp(-t)
                sig = e / (1.0 + e)
            else:
                sig = 1.0 / (1.0 + np.exp(t))
            c = -labels[i] * sig
            for j in range(features.shape[1]):
                out[j] += c * features[i, j]


@njit(cache=True)
def run_trajectory(x0, p0, code, params, features, labels, lower, upper,
                   a, m, eps, n_steps, reflect):
    """Integrate ``n_steps`` generalized leapfrog steps from (x0, p0).

    Returns (x, p, u, ok). ``ok`` is False when the trajectory left the
    support, which forces an MH rejection upstream. Support boundaries are
    handled by mirroring the position and negating the momentum component;
    with ``reflect`` on, any momentum sign flip across a step recoils that
    dimension back to its pre-step state.
    """
    dim = x0.shape[0]
    x = x0.copy()
    p = p0.copy()
    gu = np.empty(dim)
    inv_ma = 1.0 / (m * a)
    expo = 1.0 / a - 1.0
    u_new = potential(code, params, features, labels, x)
    for _ in range(n_steps):
        gradient(code, params, features, labels, x, gu)
        p_half = np.empty(dim)
        for d in range(dim):
            p_half[d] = p[d] - 0.5 * eps * gu[d]
        sign_in = np.empty(dim)
        for d in range(dim):
            sign_in[d] = np.sign(p_half[d])
        x_new = np.empty(dim)
        for d in range(dim):
            if p_half[d] == 0.0:
                v = 0.0
            else:
                v = np.sign(p_half[d]) * inv_ma * np.abs(p_half[d]) ** expo
            x_new[d] = x[d] + eps * v
        # mirror across hard support bounds
        for d in range(dim):
            for _bounce in range(64):
                if x_new[d] < lower[d]:
                    x_new[d] = 2.0 * lower[d] - x_new[d]
                    p_half[d] = -p_half[d]
                elif x_new[d] > upper[d]:
                    x_new[d] = 2.0 * upper[d] - x_new[d]
                    p_half[d] = -p_half[d]
                else:
                    break
        u_new = potential(code, params, features, labels, x_new)
        if not np.isfinite(u_new):
            return x_new, p_half, u_new, False
        gradient(code, params, features, labels, x_new, gu)
        p_new = np.empty(dim)
        for d in range(dim):
            p_new[d] = p_half[d] - 0.5 * eps * gu[d]
        if reflect:
            flipped = False
            for d in range(dim):
                if sign_in[d] * p_new[d] < 0.0:
                    x_new[d] = x[d]
                    p_new[d] = -p[d]
                    flipped = True
            if flipped:
                u_new = potential(code, params, features, labels, x_new)
        x = x_new
        p = p_new
    return x, p, u_new, True
