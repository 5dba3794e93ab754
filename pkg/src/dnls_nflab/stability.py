"""Long-time stability experiments and the weighted frequency-sum bound.

The analytic half is the bound on the alternating weighted sum

    Omega_s(j_1..j_2r) = j_1|j_1|^2s - j_2|j_2|^2s + ... - j_2r|j_2r|^2s

over zero-momentum tuples, which controls the growth rate of Sobolev norms
along the remainder flow.  The experimental half evolves small random data
to times of order eps^-4 or eps^-6 and reports the worst norm ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .flows import (
    FlowConfig,
    StepBudgetError,
    evolve_vec,
    flow_time_one_vec,
    normal_form_bundle,
    spectral_model,
)
from .states import TWO_PI, FourierState, mode_range, sobolev_norm


def _has_zero_momentum(entries) -> bool:
    return sum((1 if i % 2 == 0 else -1) * v for i, v in enumerate(entries)) == 0


def omega_s(entries, s: float):
    """Alternating sum of j|j|^(2s) over an even-length zero-momentum tuple.

    Exact integer arithmetic whenever 2s is an even integer; float otherwise.
    """
    entries = tuple(int(v) for v in entries)
    if len(entries) % 2 or not entries:
        raise ValueError("need an even-length tuple")
    if any(v == 0 for v in entries):
        raise ValueError("indices must be nonzero")
    if not _has_zero_momentum(entries):
        raise ValueError("tuple must have zero momentum")
    two_s = 2 * s
    if float(two_s).is_integer() and int(two_s) % 2 == 0:
        p = int(two_s)
        return sum(
            (1 if i % 2 == 0 else -1) * v * abs(v) ** p
            for i, v in enumerate(entries)
        )
    return float(
        sum(
            (1 if i % 2 == 0 else -1) * v * abs(v) ** two_s
            for i, v in enumerate(entries)
        )
    )


@dataclass(frozen=True)
class OmegaReport:
    entries: tuple[int, ...]
    s: float
    value: float
    bound: float
    holds: bool


def omega_bound_check(entries, s: float) -> OmegaReport:
    """|Omega_s| <= (2s+1) (2r)^(s+2) j1*^s j2*^s j3*, zero-momentum tuples, s >= 1."""
    if s < 1:
        raise ValueError("bound requires s >= 1")
    val = omega_s(entries, s)
    two_r = len(entries)
    stars = sorted((abs(v) for v in entries), reverse=True)
    bound = (2 * s + 1) * two_r ** (s + 2) * stars[0] ** s * stars[1] ** s * stars[2]
    return OmegaReport(
        entries=tuple(entries),
        s=s,
        value=val,
        bound=bound,
        holds=bool(abs(val) <= bound),
    )


def exhaustive_omega_audit(max_abs: int = 10, s_values=(1, 2, 3)) -> dict:
    """All zero-momentum 6-tuples within max_abs, vectorized, integer exact.

    int64 suffices: the worst products stay far below 2^63 at these sizes.
    """
    values = np.array([v for v in range(-max_abs, max_abs + 1) if v != 0], dtype=np.int64)
    grids = np.meshgrid(values, values, values, values, values, indexing="ij")
    j1, j2, j3, j4, j5 = (g.ravel() for g in grids)
    j6 = j1 - j2 + j3 - j4 + j5
    ok = (j6 != 0) & (np.abs(j6) <= max_abs)
    cols = [c[ok] for c in (j1, j2, j3, j4, j5, j6)]
    arr = np.stack(cols, axis=1)
    stars = np.sort(np.abs(arr), axis=1)[:, ::-1]
    checked = 0
    violations = []
    for s in s_values:
        p = int(2 * s)
        signs = np.array([1, -1, 1, -1, 1, -1], dtype=np.int64)
        val = np.sum(signs * arr * np.abs(arr) ** p, axis=1)
        bound = (
            (2 * s + 1)
            * 6 ** (s + 2)
            * stars[:, 0] ** s
            * stars[:, 1] ** s
            * stars[:, 2]
        )
        bad = np.abs(val) > bound
        checked += len(val)
        for i in np.flatnonzero(bad)[:20]:
            violations.append((tuple(int(v) for v in arr[i]), s))
    return {"checked": checked, "violations": violations, "max_abs": max_abs}


def random_omega_audit(
    n_samples: int,
    max_abs: int = 100,
    r_values=(3, 4, 5),
    s_values=(1, 2, 3),
    seed: int = 0,
) -> dict:
    """Random zero-momentum tuples at larger radii; Python ints, exact."""
    rng = np.random.default_rng(np.random.Philox(key=seed))
    checked = 0
    violations = []
    while checked < n_samples:
        r = int(rng.choice(r_values))
        head = [int(v) for v in rng.integers(-max_abs, max_abs + 1, size=2 * r - 1)]
        if any(v == 0 for v in head):
            continue
        # zero momentum fixes the last (barred) entry
        last = sum((1 if i % 2 == 0 else -1) * v for i, v in enumerate(head))
        if last == 0 or abs(last) > max_abs:
            continue
        entries = tuple(head + [last])
        for s in s_values:
            rep = omega_bound_check(entries, s)
            if not rep.holds:
                violations.append(rep)
        checked += 1
    return {"checked": checked, "violations": violations, "max_abs": max_abs}


# -- experiments ------------------------------------------------------------------------


def hs_random_state(M: int, s: float, eps: float, seed: int) -> FourierState:
    """Random smooth data with exact Sobolev size eps.

    Amplitudes decay like |j|^(-s-1) with uniform random phases, then the
    whole profile is rescaled so the s-norm equals eps.
    """
    rng = np.random.default_rng(np.random.Philox(key=seed))
    modes = mode_range(M)
    phases = rng.uniform(0.0, TWO_PI, size=len(modes))
    amp = {
        j: abs(j) ** (-(s + 1.0)) * np.exp(1j * p)
        for j, p in zip(modes, phases)
    }
    raw = FourierState(amp, M)
    scale = eps / sobolev_norm(raw, s)
    return FourierState({j: v * scale for j, v in amp.items()}, M)


@dataclass(frozen=True)
class StabilityRun:
    s: float
    epsilon: float
    M: int
    horizon_exponent: float = 4.0
    seed: int = 0
    threshold: float = 3.0
    dt: float = 1e-3

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")


@dataclass
class StabilityReport:
    run: StabilityRun
    times: np.ndarray
    norm_ratio: np.ndarray
    mass_drift: np.ndarray
    energy_drift: np.ndarray
    max_ratio: float
    passed: bool
    budget_exhausted: bool = False
    message: str = ""


def stability_ensemble(
    run: StabilityRun,
    seeds: tuple[int, ...],
    nonlinear: bool = True,
    max_steps: int = 20_000_000,
) -> list[StabilityReport]:
    """Evolve one run configuration for several seeds in a single batched
    integration; one report per seed, deterministic in seed order."""
    horizon = run.epsilon ** (-run.horizon_exponent)
    cfg = FlowConfig(
        dt=run.dt,
        t_end=horizon,
        record_interval=max(run.dt, horizon / 2048),
        max_steps=max_steps,
    )
    batch = np.stack(
        [
            hs_random_state(run.M, run.s, run.epsilon, seed).to_vector()
            for seed in seeds
        ]
    )
    try:
        times, channels, _, _ = evolve_vec(
            batch, run.M, cfg, track_s=(run.s,), nonlinear=nonlinear
        )
    except StepBudgetError as exc:
        return [
            StabilityReport(
                run=replace(run, seed=seed),
                times=np.array([]),
                norm_ratio=np.array([]),
                mass_drift=np.array([]),
                energy_drift=np.array([]),
                max_ratio=math.inf,
                passed=False,
                budget_exhausted=True,
                message=str(exc),
            )
            for seed in seeds
        ]
    norms = channels[f"norm_s{run.s:g}"]
    mass = channels["mass"]
    energy = channels["energy"]
    reports = []
    for i, seed in enumerate(seeds):
        ratio = norms[:, i] / run.epsilon
        energy_scale = max(abs(energy[0, i]), 1e-30)
        reports.append(
            StabilityReport(
                run=replace(run, seed=seed),
                times=times,
                norm_ratio=ratio,
                mass_drift=np.abs(mass[:, i] - mass[0, i]),
                energy_drift=np.abs(energy[:, i] - energy[0, i]) / energy_scale,
                max_ratio=float(np.max(ratio)),
                passed=bool(np.max(ratio) <= run.threshold),
            )
        )
    return reports


def stability_sweep(run: StabilityRun, nonlinear: bool = True,
                    max_steps: int = 20_000_000) -> StabilityReport:
    """Evolve random eps-sized data to t = eps^(-horizon_exponent) and report
    the worst Sobolev norm ratio plus conservation drift channels."""
    return stability_ensemble(run, (run.seed,), nonlinear, max_steps)[0]


# -- norm-derivative audit ------------------------------------------------------------------


def norm_derivative_audit(
    M: int = 8,
    s: float = 3.0,
    amplitudes: tuple[float, ...] = (0.4, 0.3, 0.2, 0.15, 0.1),
    seed: int = 11,
    delta: float = 5e-3,
    cfg: FlowConfig | None = None,
) -> dict:
    """Growth rate of the s-norm squared in transformed coordinates.

    For data of size a in the new coordinates, maps through the quartic
    time-1 transform, evolves the truncated equation for +-delta, pulls back,
    and measures the centered difference of the squared norm.  The quadratic
    and quartic normal-form parts commute with every action functional, so
    the rate is controlled by the sextic-and-up remainder: the fitted
    amplitude exponent should be 6 and the fitted constant bounds
    |d/dt ||q||_s^2| / ||q||_s^6.
    """
    cfg = cfg or FlowConfig(dt=0.01, tolerance=1e-13, max_refinements=12)
    nf = normal_form_bundle(M)
    base = hs_random_state(M, s, 1.0, seed)
    base_vec = base.to_vector()
    model = spectral_model(M)
    rows = []
    for a in amplitudes:
        vec_new = a * base_vec
        vec_orig = flow_time_one_vec(nf.F4, vec_new, cfg)
        derivs = {}
        for sign in (+1, -1):
            ecfg = FlowConfig(dt=delta / 8, t_end=sign * delta)
            _, _, moved, _ = evolve_vec(vec_orig, M, ecfg)
            back = flow_time_one_vec(nf.F4, moved, cfg, t_end=-1.0)
            derivs[sign] = float(model.sobolev_sq(back, s))
        rate = (derivs[+1] - derivs[-1]) / (2 * delta)
        norm_s = math.sqrt(float(model.sobolev_sq(vec_new, s)))
        rows.append({"amplitude": a, "rate": abs(rate), "norm_s": norm_s})
    xs = np.log2([r["amplitude"] for r in rows])
    ys = np.log2([max(r["rate"], 1e-300) for r in rows])
    slope = float(np.polyfit(xs, ys, 1)[0])
    c3 = max(r["rate"] / r["norm_s"] ** 6 for r in rows)
    return {"rows": rows, "slope": slope, "C3": c3, "M": M, "s": s, "seed": seed}
