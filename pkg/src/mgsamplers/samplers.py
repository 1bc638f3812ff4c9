"""Chain drivers: numerical MG-HMC, the analytic MG samplers and a
doubling/shrinking slice-sampling baseline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import _kernels
from .integrator import (
    DIVERGENCE_THRESHOLD,
    IntegratorConfig,
    PhasePoint,
    draw_step_count,
    draw_step_size,
    leapfrog_step,
    resolve_reflection,
)
from .kinetics import KineticParams, kinetic_energy, sample_mg
from .targets import Target

SAMPLER_KINDS = ("mg_hmc", "mg_ss_analytic", "mg_hmc_analytic", "std_slice")

CONDITIONAL_GRID = 4096     # inverse-CDF grid points per interval (a < 1)
REJECTION_CAP = 10 ** 6


@dataclass(frozen=True)
class SamplerConfig:
    sampler_kind: str
    kinetic: KineticParams
    iterations: int
    burn_in: int
    seed: int
    initial_position: np.ndarray
    integrator: Optional[IntegratorConfig] = None

    def __post_init__(self):
        if self.sampler_kind not in SAMPLER_KINDS:
            raise ValueError(f"unknown sampler kind {self.sampler_kind!r}")
        if not (0 <= self.burn_in < self.iterations):
            raise ValueError("burn_in must be smaller than iterations")


@dataclass
class Trace:
    samples: np.ndarray                 # (iterations - burn_in, dim)
    accepted: np.ndarray                # (iterations,) bool
    hamiltonians: np.ndarray            # (iterations,)
    slice_levels: Optional[np.ndarray] = None   # y_t for slice-style kinds
    slice_g: Optional[np.ndarray] = None        # g_t = log f(x_t) - log y_t
    divergences: int = 0
    doubling_cap_hits: int = 0

    @property
    def acceptance_rate(self) -> float:
        return float(self.accepted.mean())


def run_sampler(target: Target, config: SamplerConfig, **kwargs) -> Trace:
    fn = {
        "mg_hmc": run_mg_hmc,
        "mg_ss_analytic": run_mg_ss_analytic,
        "mg_hmc_analytic": run_mg_hmc_analytic,
        "std_slice": run_std_slice,
    }[config.sampler_kind]
    return fn(target, config, **kwargs)


def run_mg_hmc(target: Target, config: SamplerConfig) -> Trace:
    """Numerical MG-HMC: resample momentum, integrate, MH-correct."""
    params = config.kinetic
    icfg = config.integrator
    if icfg is None:
        raise ValueError("mg_hmc requires an IntegratorConfig")
    rng = np.random.default_rng(config.seed)
    dim = target.dim
    x = np.asarray(config.initial_position, dtype=float).reshape(dim).copy()
    u_cur = target.energy(x)
    if not np.isfinite(u_cur):
        raise ValueError(f"initial position {x} is outside the support of {target.name}")
    reflect = resolve_reflection(icfg, params)
    use_kernel = target.kernel_code >= 0
    n = config.iterations
    keep = n - config.burn_in
    samples = np.empty((keep, dim))
    accepted = np.zeros(n, dtype=bool)
    hams = np.empty(n)
    divergences = 0
    for t in range(n):
        p = sample_mg(params, dim, rng)
        h0 = u_cur + kinetic_energy(p, params)
        eps = draw_step_size(icfg, params, t, rng)
        n_steps = draw_step_count(icfg, rng)
        if use_kernel:
            x_new, p_new, u_new, ok = _kernels.run_trajectory(
                x, p, target.kernel_code, target.kernel_params,
                target.features, target.labels, target.lower, target.upper,
                params.a, params.m, eps, n_steps, reflect)
        else:
            state = PhasePoint(x, p, u_cur, kinetic_energy(p, params))
            for _ in range(n_steps):
                state = leapfrog_step(state, target, params, eps, reflect)
                if not state.valid:
                    break
            x_new, p_new, u_new = state.position, state.momentum, state.potential
            ok = state.valid
        h1 = u_new + kinetic_energy(p_new, params) if ok else np.inf
        if ok and abs(h1 - h0) > DIVERGENCE_THRESHOLD:
            divergences += 1
            ok = False
        u_mh = rng.uniform()
        acc = bool(ok and u_mh < np.exp(min(0.0, h0 - h1)))
        if acc:
            x = np.asarray(x_new, dtype=float)
            u_cur = float(u_new)
        accepted[t] = acc
        hams[t] = h1 if acc else h0
        if t >= config.burn_in:
            samples[t - config.burn_in] = x
    return Trace(samples, accepted, hams, divergences=divergences)


def _component_containing(intervals, x, tol=1e-9):
    for lo, hi in intervals:
        if lo - tol <= x <= hi + tol:
            return [(lo, hi)]
    # root-finding jitter can leave x marginally outside; snap to nearest
    return [min(intervals, key=lambda iv: min(abs(x - iv[0]), abs(x - iv[1])))]


def conditional_draw(target: Target, h: float, params: KineticParams, rng,
                     intervals=None) -> float:
    """Exact draw from density proportional to (h - U(x))^(a-1) on the slice.

    a == 1 is uniform on the interval union; a > 1 uses rejection from the
    uniform envelope (density is bounded by (h - U_min)^(a-1)); a < 1 uses a
    gridded inverse CDF after a substitution that bounds the endpoint
    singularity.
    """
    if intervals is None:
        if target.slice_interval is None:
            raise ValueError(f"target {target.name} has no analytic slice interval")
        intervals = target.slice_interval(h)
    if not intervals:
        raise RuntimeError(f"empty slice interval at H={h}")
    a = params.a
    lengths = np.array([hi - lo for lo, hi in intervals], dtype=float)
    total = float(lengths.sum())
    if total <= 0.0:  # level at the energy minimum: degenerate point(s)
        lo, _ = intervals[int(rng.integers(len(intervals)))]
        return float(lo)
    if a == 1.0:
        r = rng.uniform(0.0, total)
        for (lo, hi), length in zip(intervals, lengths):
            if r <= length:
                return float(lo + r)
            r -= length
        return float(intervals[-1][1])
    if a > 1.0:
        if not np.isfinite(target.u_min):
            raise ValueError(f"target {target.name} needs a finite u_min for a > 1 draws")
        log_peak = (a - 1.0) * np.log(h - target.u_min)
        cum = np.cumsum(lengths)
        for _ in range(REJECTION_CAP):
            r = rng.uniform(0.0, total)
            idx = int(np.searchsorted(cum, r))
            idx = min(idx, len(intervals) - 1)
            lo, hi = intervals[idx]
            offset = r - (cum[idx] - lengths[idx])
            x = lo + offset
            w = h - float(target.potential(x))
            if w <= 0.0:
                continue
            if np.log(rng.uniform()) < (a - 1.0) * np.log(w) - log_peak:
                return float(x)
        raise RuntimeError(f"rejection cap reached in conditional_draw (H={h}, a={a})")
    return _inverse_cdf_draw(target, h, a, intervals, rng)


def _inverse_cdf_draw(target, h, a, intervals, rng):
    """Inverse-CDF draw for a < 1 on a per-interval grid.

    Each interval half is reparameterized as x = anchor + span * s^(1/a),
    which turns the (h-U)^(a-1) endpoint divergence into a bounded
    integrand; masses come from the midpoint rule on a fixed grid.
    """
    half_n = CONDITIONAL_GRID // 2
    s_mid = (np.arange(half_n) + 0.5) / half_n
    s_pow = s_mid ** (1.0 / a)
    jac = s_mid ** (1.0 / a - 1.0) / a
    pieces = []
    for lo, hi in intervals:
        if hi - lo <= 0.0:
            continue
        mid = 0.5 * (lo + hi)
        for anchor, other in ((lo, mid), (hi, mid)):
            span = other - anchor
            xs = anchor + span * s_pow
            gap = h - np.asarray(target.potential(xs), dtype=float)
            w = np.where(gap > 0.0, np.abs(gap) ** (a - 1.0), 0.0)
            cells = w * jac * abs(span) / half_n
            pieces.append((anchor, span, cells, float(cells.sum())))
    masses = np.array([p[3] for p in pieces])
    total = float(masses.sum())
    if total <= 0.0:
        raise RuntimeError(f"vanishing conditional mass at H={h}, a={a}")
    r = rng.uniform(0.0, total)
    cum = np.cumsum(masses)
    idx = min(int(np.searchsorted(cum, r)), len(pieces) - 1)
    anchor, span, cells, _ = pieces[idx]
    r_local = r - (cum[idx] - masses[idx])
    cell_cum = np.cumsum(cells)
    j = min(int(np.searchsorted(cell_cum, r_local)), cells.size - 1)
    prev = cell_cum[j - 1] if j > 0 else 0.0
    frac = (r_local - prev) / cells[j] if cells[j] > 0 else 0.5
    s = (j + frac) / half_n
    return float(anchor + span * s ** (1.0 / a))


def _run_analytic(target, config, confine):
    if target.dim != 1 or target.slice_interval is None:
        raise ValueError("analytic samplers need a 1D target with slice_interval")
    params = config.kinetic
    rng = np.random.default_rng(config.seed)
    x = float(np.asarray(config.initial_position, dtype=float).reshape(-1)[0])
    u_x = float(target.potential(x))
    if not np.isfinite(u_x):
        raise ValueError(f"initial position {x} is outside the support of {target.name}")
    n = config.iterations
    keep = n - config.burn_in
    samples = np.empty((keep, 1))
    hams = np.empty(n)
    levels = np.empty(n)
    gs = np.empty(n)
    for t in range(n):
        # g = log f(x) - log y is Gamma(a, 1) by the slice change of variables
        g = rng.gamma(params.a, 1.0)
        h = u_x + g
        intervals = target.slice_interval(h)
        if confine:
            intervals = _component_containing(intervals, x)
        x = conditional_draw(target, h, params, rng, intervals=intervals)
        u_x = float(target.potential(x))
        hams[t] = h
        gs[t] = g
        levels[t] = np.exp(-h)
        if t >= config.burn_in:
            samples[t - config.burn_in, 0] = x
    return Trace(samples, np.ones(n, dtype=bool), hams, slice_levels=levels, slice_g=gs)


def run_mg_ss_analytic(target: Target, config: SamplerConfig) -> Trace:
    """Exact MG slice sampler: draws from every disjoint slice component."""
    return _run_analytic(target, config, confine=False)


def run_mg_hmc_analytic(target: Target, config: SamplerConfig, confine: bool = True) -> Trace:
    """Exact MG-HMC: the conditional draw stays on the connected slice
    component holding the current point (a trajectory cannot jump)."""
    return _run_analytic(target, config, confine=confine)


def _doubling_accept(x0, x1, lo, hi, width, logy, logf):
    """Acceptability check for proposals found under the doubling scheme."""
    d = False
    while hi - lo > 1.1 * width:
        mid = 0.5 * (lo + hi)
        if (x0 < mid) != (x1 < mid):
            d = True
        if x1 < mid:
            hi = mid
        else:
            lo = mid
        if d and logy >= logf(lo) and logy >= logf(hi):
            return False
    return True


def _slice_update_coord(logf, x0, logy, width, max_doublings, rng):
    """Doubling then shrinking update for one coordinate; returns (x, capped)."""
    u = rng.uniform()
    lo = x0 - width * u
    hi = lo + width
    k = max_doublings
    while k > 0 and (logf(lo) > logy or logf(hi) > logy):
        if rng.uniform() < 0.5:
            lo -= hi - lo
        else:
            hi += hi - lo
        k -= 1
    capped = k == 0 and (logf(lo) > logy or logf(hi) > logy)
    lo_bar, hi_bar = lo, hi
    while True:
        x1 = rng.uniform(lo_bar, hi_bar)
        if logf(x1) > logy and _doubling_accept(x0, x1, lo, hi, width, logy, logf):
            return x1, capped
        if x1 < x0:
            lo_bar = x1
        else:
            hi_bar = x1


def run_std_slice(target: Target, config: SamplerConfig, width: float = 1.0,
                  max_doublings: int = 32) -> Trace:
    """Standard slice sampler with doubling and shrinking; coordinate-wise
    in random order for multivariate targets."""
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    rng = np.random.default_rng(config.seed)
    dim = target.dim
    x = np.asarray(config.initial_position, dtype=float).reshape(dim).copy()
    if not np.isfinite(target.energy(x)):
        raise ValueError(f"initial position {x} is outside the support of {target.name}")
    n = config.iterations
    keep = n - config.burn_in
    samples = np.empty((keep, dim))
    hams = np.empty(n)
    levels = np.empty(n)
    cap_hits = 0
    for t in range(n):
        order = rng.permutation(dim)
        logy = np.nan
        for d in order:
            def logf(v, _d=d):
                x_try = x.copy()
                x_try[_d] = v
                return -target.energy(x_try)
            logf_cur = logf(x[d])
            logy = logf_cur + np.log(rng.uniform())
            x[d], capped = _slice_update_coord(logf, x[d], logy, width, max_doublings, rng)
            cap_hits += capped
        hams[t] = -logy
        levels[t] = np.exp(logy)
        if t >= config.burn_in:
            samples[t - config.burn_in] = x
    return Trace(samples, np.ones(n, dtype=bool), hams,
                 slice_levels=levels, doubling_cap_hits=cap_hits)
