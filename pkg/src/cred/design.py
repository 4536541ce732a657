"""Environment design: Bayesian optimization of the query-worth landscape.

The outer loop searches the box of environment encodings for the setting
whose best counterfactual query is most informative.  The objective is
modeled with a Gaussian process (squared-exponential ARD kernel, prior mean
equal to the observed average) and maximized by upper-confidence-bound
acquisition over random candidates.  Everything is hand-rolled on numpy and
scipy.linalg because the landscape is tiny (tens of observations, at most a
few dozen dimensions) and the experiment harness needs byte-level
reproducibility across platforms.
"""

from __future__ import annotations

import dataclasses
import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .envs import EnvironmentSpec, EnvParamVector, decode_env, default_bounds, design_space
from .queries import PolicyCache, PreferenceQuery, counterfactual_query, mean_belief_query

MAX_JITTER = 1e-4
NOISE_FLOOR = 1e-6
SIGNAL_FLOOR = 1e-8


def _se_ard_kernel(x1: np.ndarray, x2: np.ndarray, length_scales, signal_var) -> np.ndarray:
    z1 = x1 / length_scales
    z2 = x2 / length_scales
    sq = ((z1**2).sum(axis=1)[:, None] + (z2**2).sum(axis=1)[None, :] - 2.0 * z1 @ z2.T)
    return signal_var * np.exp(-0.5 * np.maximum(sq, 0.0))


@dataclass(eq=False)
class GPModel:
    """Gaussian-process regressor over design vectors.

    Immutable by convention: updates go through :func:`with_observation`,
    which returns a new model.  The Cholesky factorization of the kernel
    matrix is computed once on first use.
    """

    x_obs: np.ndarray  # (n, D)
    y_obs: np.ndarray  # (n,)
    length_scales: np.ndarray  # (D,)
    signal_var: float
    noise_var: float = NOISE_FLOOR
    bounds: np.ndarray | None = None  # (D, 2), used for hyperparameter limits

    def __post_init__(self):
        self.x_obs = np.atleast_2d(np.asarray(self.x_obs, dtype=float))
        self.y_obs = np.asarray(self.y_obs, dtype=float).ravel()
        self.length_scales = np.broadcast_to(
            np.asarray(self.length_scales, dtype=float), (self.x_obs.shape[1],)
        ).copy()
        self.signal_var = max(float(self.signal_var), SIGNAL_FLOOR)
        self.noise_var = float(self.noise_var)
        if self.noise_var < 0:
            raise ValueError(f"noise variance must be >= 0, got {self.noise_var}")
        if len(self.x_obs) != len(self.y_obs) or len(self.y_obs) == 0:
            raise ValueError(
                f"need matching non-empty observations, got {self.x_obs.shape} vs {self.y_obs.shape}"
            )
        self._factor = None
        self._alpha = None

    @property
    def n_obs(self) -> int:
        return len(self.y_obs)

    @property
    def prior_mean(self) -> float:
        return float(self.y_obs.mean())

    def _factorize(self):
        if self._factor is not None:
            return
        k = _se_ard_kernel(self.x_obs, self.x_obs, self.length_scales, self.signal_var)
        jitter = 0.0
        while True:
            try:
                self._factor = cho_factor(
                    k + (self.noise_var + jitter) * np.eye(self.n_obs), lower=True
                )
                break
            except LinAlgError:
                jitter = max(jitter * 10.0, 1e-10)
                if jitter > MAX_JITTER:
                    raise LinAlgError(
                        f"kernel matrix not positive definite even with jitter {MAX_JITTER}"
                    ) from None
        self._alpha = cho_solve(self._factor, self.y_obs - self.prior_mean)

    def with_observation(self, x, y: float) -> "GPModel":
        return GPModel(
            np.vstack([self.x_obs, np.asarray(x, dtype=float)[None, :]]),
            np.append(self.y_obs, float(y)),
            self.length_scales,
            self.signal_var,
            self.noise_var,
            self.bounds,
        )

    def with_hyperparams(self, length_scales, signal_var) -> "GPModel":
        return GPModel(self.x_obs, self.y_obs, length_scales, signal_var, self.noise_var, self.bounds)

    def log_marginal_likelihood(self) -> float:
        try:
            self._factorize()
        except LinAlgError:
            return -np.inf
        residual = self.y_obs - self.prior_mean
        log_det = 2.0 * np.log(np.diag(self._factor[0])).sum()
        return float(
            -0.5 * residual @ self._alpha - 0.5 * log_det - 0.5 * self.n_obs * np.log(2 * np.pi)
        )


def gp_posterior(model: GPModel, theta):
    """Posterior (mean, stddev) at one point or a batch of points."""
    values = getattr(theta, "values", theta)
    x = np.atleast_2d(np.asarray(values, dtype=float))
    model._factorize()
    k_star = _se_ard_kernel(model.x_obs, x, model.length_scales, model.signal_var)  # (n, q)
    mean = model.prior_mean + k_star.T @ model._alpha
    solved = cho_solve(model._factor, k_star)  # (n, q)
    var = model.signal_var - np.einsum("nq,nq->q", k_star, solved)
    std = np.sqrt(np.maximum(var, 0.0))
    if np.ndim(values) == 1:
        return float(mean[0]), float(std[0])
    return mean, std


def gp_fit_hyperparams(model: GPModel) -> GPModel:
    """Tune length scales and signal variance by coordinate search on the
    log marginal likelihood; the result never scores below the input model.
    """
    if model.n_obs < 3:
        raise ValueError(f"hyperparameter fitting needs >= 3 observations, got {model.n_obs}")
    widths = (
        model.bounds[:, 1] - model.bounds[:, 0]
        if model.bounds is not None
        else np.maximum(model.x_obs.max(axis=0) - model.x_obs.min(axis=0), 1e-3)
    )
    ls_lo, ls_hi = 1e-2 * widths, 1e2 * widths
    y_var = float(model.y_obs.var())
    sig_lo, sig_hi = SIGNAL_FLOOR, max(10.0 * y_var, 1.0)

    def score(ls, sig):
        return model.with_hyperparams(ls, sig).log_marginal_likelihood()

    starts = [
        (model.length_scales.copy(), model.signal_var),
        (0.5 * widths, max(y_var, SIGNAL_FLOOR)),
        (0.05 * widths, max(y_var, SIGNAL_FLOOR)),
    ]
    best_ls, best_sig = starts[0]
    best_lml = score(best_ls, best_sig)
    incumbent = best_lml
    for ls0, sig0 in starts:
        ls = np.clip(ls0, ls_lo, ls_hi)
        sig = float(np.clip(sig0, sig_lo, sig_hi))
        lml = score(ls, sig)
        for _ in range(8):  # coordinate sweeps
            improved = False
            for j in range(len(ls) + 1):
                for factor in (4.0, 2.0, 0.5, 0.25):
                    if j < len(ls):
                        trial_ls = ls.copy()
                        trial_ls[j] = np.clip(trial_ls[j] * factor, ls_lo[j], ls_hi[j])
                        trial_sig = sig
                    else:
                        trial_ls = ls
                        trial_sig = float(np.clip(sig * factor, sig_lo, sig_hi))
                    trial = score(trial_ls, trial_sig)
                    if trial > lml + 1e-12:
                        ls, sig, lml = trial_ls.copy(), trial_sig, trial
                        improved = True
            if not improved:
                break
        if lml > best_lml:
            best_ls, best_sig, best_lml = ls, sig, lml
    if not np.isfinite(best_lml) or best_lml < incumbent:
        warnings.warn("hyperparameter search failed; keeping previous values", stacklevel=2)
        return model
    return model.with_hyperparams(best_ls, best_sig)


def propose_theta(
    model: GPModel,
    bounds: np.ndarray,
    kappa: float = 2.0,
    n_candidates: int = 2000,
    seed: int | None = None,
    kind: str = "gridworld-patch",
) -> EnvParamVector:
    """UCB argmax over uniform candidates plus a jittered copy of the best
    observed point (sigma = 5% of each box width, clipped to bounds).
    """
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    bounds = np.asarray(bounds, dtype=float)
    rng = np.random.default_rng(seed)
    lo, hi = bounds[:, 0], bounds[:, 1]
    candidates = rng.uniform(lo, hi, size=(n_candidates, len(bounds)))
    incumbent = model.x_obs[int(np.argmax(model.y_obs))]
    jittered = np.clip(incumbent + rng.normal(0.0, 0.05 * (hi - lo)), lo, hi)
    candidates = np.vstack([candidates, jittered])
    mean, std = gp_posterior(model, candidates)
    ucb = mean + kappa * std
    return EnvParamVector(candidates[int(np.argmax(ucb))], kind, bounds)


@dataclass(frozen=True)
class TraceEntry:
    theta: np.ndarray
    info_gain: float
    wall_time: float

    def to_json(self) -> dict:
        return {
            "theta": np.asarray(self.theta, dtype=float).tolist(),
            "info_gain": self.info_gain,
            "wall_time": self.wall_time,
        }


def bayes_opt(
    objective,
    bounds,
    n_iters: int = 15,
    kappa: float = 2.0,
    seed: int | None = None,
    n_init: int = 5,
    n_candidates: int = 2000,
    kind: str = "gridworld-patch",
):
    """Generic maximize-by-BO loop used by :func:`environment_design`.

    ``objective(values) -> float`` or ``(float, payload)``.  The first
    ``n_init`` proposals are uniform; afterwards the GP is refit on every
    observation and the UCB argmax proposed.  Returns
    (best_values, best_f, trace, payloads) with the trace in iteration order.
    """
    if n_iters < 1:
        raise ValueError(f"need n_iters >= 1, got {n_iters}")
    bounds = np.asarray(bounds, dtype=float)
    rng = np.random.default_rng(seed)
    xs, ys, payloads, trace = [], [], [], []
    model = None
    for t in range(n_iters):
        if t < n_init or len(xs) < 3:
            x = rng.uniform(bounds[:, 0], bounds[:, 1])
        else:
            model = GPModel(
                np.array(xs),
                np.array(ys),
                0.3 * (bounds[:, 1] - bounds[:, 0]),
                max(float(np.var(ys)), SIGNAL_FLOOR),
                bounds=bounds,
            )
            model = gp_fit_hyperparams(model)
            x = propose_theta(
                model, bounds, kappa, n_candidates, seed=int(rng.integers(2**63)), kind=kind
            ).values
        started = time.perf_counter()
        out = objective(x)
        f, payload = out if isinstance(out, tuple) else (out, None)
        xs.append(np.asarray(x, dtype=float))
        ys.append(float(f))
        payloads.append(payload)
        trace.append(TraceEntry(xs[-1], float(f), time.perf_counter() - started))
    best = int(np.argmax(ys))
    return xs[best], ys[best], trace, payloads


@dataclass(frozen=True)
class DesignResult:
    """Winner of one environment-design round plus the full search trace."""

    theta: EnvParamVector
    query: PreferenceQuery
    trace: tuple  # of TraceEntry
    fallback: bool = False

    @property
    def best_gain(self) -> float:
        return self.query.info_gain

    def to_json(self) -> dict:
        return {
            "theta": self.theta.values.tolist(),
            "kind": self.theta.kind,
            "query": self.query.to_json(),
            "trace": [entry.to_json() for entry in self.trace],
            "fallback": self.fallback,
        }


def environment_design(
    template: EnvironmentSpec,
    ensemble,
    n_iters: int = 15,
    kappa: float = 2.0,
    seed: int | None = None,
    n_init: int = 5,
    n_candidates: int = 2000,
    n_bootstrap: int = 100,
    m_diverse: int = 8,
    inner: str = "CR",
    epsilon: float = 0.25,
    k_rollouts: int = 100,
    cache: PolicyCache | None = None,
) -> DesignResult:
    """Search the design box for the environment whose best query (from the
    chosen inner generator) is most informative under the current belief.

    `inner` selects the per-candidate query generator: "CR" builds
    counterfactual plan pairs, "MBP" perturbs the mean-belief policy.
    Degenerate counterfactual queries (no two distinct plans) score zero;
    if every iteration degenerates, the result falls back to the template
    environment with a mean-belief query and is flagged.
    """
    if inner not in ("CR", "MBP"):
        raise ValueError(f"unknown inner generator {inner!r}")
    kind = design_space(template).kind
    bounds = default_bounds(kind, len(design_space(template).values))
    if cache is None:
        cache = PolicyCache()
    rng = np.random.default_rng(seed)
    inner_seeds = iter(rng.integers(0, 2**63 - 1, size=n_iters).tolist())

    def objective(values):
        env = decode_env(EnvParamVector(values, kind, bounds), template)
        if inner == "CR":
            query = counterfactual_query(
                env,
                ensemble,
                n_bootstrap=n_bootstrap,
                m_diverse=m_diverse,
                seed=int(next(inner_seeds)),
                cache=cache,
            )
        else:
            query = mean_belief_query(
                env,
                ensemble,
                epsilon=epsilon,
                k=k_rollouts,
                seed=int(next(inner_seeds)),
                cache=cache,
            )
        if query is None:
            return 0.0, None
        return query.info_gain, query

    _, _, trace, payloads = bayes_opt(
        objective,
        bounds,
        n_iters=n_iters,
        kappa=kappa,
        seed=int(rng.integers(2**63)),
        n_init=n_init,
        n_candidates=n_candidates,
        kind=kind,
    )
    usable = [i for i, q in enumerate(payloads) if q is not None]
    if not usable:
        query = mean_belief_query(
            template, ensemble, seed=int(rng.integers(2**63)), cache=cache
        )
        theta = design_space(template)
        return DesignResult(theta=theta, query=query, trace=tuple(trace), fallback=True)
    best = max(usable, key=lambda i: (trace[i].info_gain, -i))
    query = payloads[best]
    if inner == "CR":
        # counterfactual queries routed through the design loop carry the
        # combined-method tag
        query = dataclasses.replace(query, generator="CRED")
    return DesignResult(
        theta=EnvParamVector(trace[best].theta, kind, bounds),
        query=query,
        trace=tuple(trace),
        fallback=False,
    )
