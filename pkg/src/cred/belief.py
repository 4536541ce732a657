"""Posterior over reward weights: likelihood, adaptive MCMC, KDE entropy.

The model is a uniform prior on the unit ball and the softmax preference
likelihood, so the log posterior is a sum of log-sigmoids of signed feature
differences.  Sampling uses a random-walk Metropolis chain whose proposal
covariance adapts to the chain history after burn-in; out-of-ball proposals
are rejected, which preserves the ball-supported target exactly.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit

from .errors import ShapeError

EPS_COV = 1e-6


@dataclass(frozen=True)
class PreferenceRecord:
    """One answered comparison: scaled feature vectors and the chosen label."""

    phi_a: np.ndarray
    phi_b: np.ndarray
    label: int  # +1 prefers A, -1 prefers B
    env_id: str = ""
    iteration: int = -1

    def __post_init__(self):
        phi_a = np.asarray(self.phi_a, dtype=float)
        phi_b = np.asarray(self.phi_b, dtype=float)
        for name, arr in (("phi_a", phi_a), ("phi_b", phi_b)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if phi_a.shape != phi_b.shape or phi_a.ndim != 1:
            raise ShapeError(f"feature shapes differ: {phi_a.shape} vs {phi_b.shape}")
        if self.label not in (+1, -1):
            raise ValueError(f"label must be +1 or -1, got {self.label}")

    @property
    def psi(self) -> np.ndarray:
        return self.phi_a - self.phi_b

    def to_json(self) -> dict:
        return {
            "phi_a": self.phi_a.tolist(),
            "phi_b": self.phi_b.tolist(),
            "label": self.label,
            "env_id": self.env_id,
            "iteration": self.iteration,
        }

    @classmethod
    def from_json(cls, data: dict) -> "PreferenceRecord":
        return cls(
            np.asarray(data["phi_a"], dtype=float),
            np.asarray(data["phi_b"], dtype=float),
            int(data["label"]),
            data.get("env_id", ""),
            int(data.get("iteration", -1)),
        )


def feature_difference(phi_a, phi_b) -> np.ndarray:
    phi_a = np.asarray(phi_a, dtype=float)
    phi_b = np.asarray(phi_b, dtype=float)
    if phi_a.shape != phi_b.shape:
        raise ShapeError(f"feature shapes differ: {phi_a.shape} vs {phi_b.shape}")
    return phi_a - phi_b


def preference_likelihood(w, phi_a, phi_b, label: int) -> float:
    """Softmax probability of the observed label, stable for any argument.

    P(+1 | w) = exp(w @ phi_a) / (exp(w @ phi_a) + exp(w @ phi_b)), which is
    the sigmoid of w @ (phi_a - phi_b); the opposite label gets the
    complementary probability.
    """
    if label not in (+1, -1):
        raise ValueError(f"label must be +1 or -1, got {label}")
    z = label * float(np.asarray(w, dtype=float) @ feature_difference(phi_a, phi_b))
    # Evaluate the small tail directly and its complement as 1 - small, so the
    # two labels' probabilities sum to 1.0 exactly and neither tail underflows
    # to a relative error worse than the sigmoid itself.
    if z < 0:
        return float(expit(z))
    return 1.0 - float(expit(-z))


def log_likelihood_matrix(weights: np.ndarray, records) -> np.ndarray:
    """(n_weights,) array of summed log likelihoods, vectorized over records."""
    weights = np.atleast_2d(np.asarray(weights, dtype=float))
    if not records:
        return np.zeros(len(weights))
    psi = np.stack([r.psi for r in records])  # (R, d)
    labels = np.array([r.label for r in records], dtype=float)  # (R,)
    z = (weights @ psi.T) * labels  # (n, R)
    return log_expit(z).sum(axis=1)


def posterior_logdensity(w, records) -> float:
    """Unnormalized log posterior; -inf outside the unit ball."""
    w = np.asarray(w, dtype=float)
    if np.linalg.norm(w) > 1.0:
        return -np.inf
    return float(log_likelihood_matrix(w[None, :], records)[0])


@dataclass(frozen=True)
class BeliefEnsemble:
    """Thinned post-burn-in MCMC samples plus chain diagnostics."""

    samples: np.ndarray  # (n, d)
    acceptance_rate: float
    seed: int
    burn_in: int
    thin: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def mean(self) -> np.ndarray:
        return self.samples.mean(axis=0)

    def to_json(self) -> dict:
        return {
            "samples": self.samples.tolist(),
            "seed": self.seed,
            "burn_in": self.burn_in,
            "thin": self.thin,
            "acceptance_rate": self.acceptance_rate,
        }

    @classmethod
    def from_json(cls, data: dict) -> "BeliefEnsemble":
        return cls(
            np.asarray(data["samples"], dtype=float),
            float(data["acceptance_rate"]),
            int(data["seed"]),
            int(data["burn_in"]),
            int(data["thin"]),
        )

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json(), f)

    @classmethod
    def load(cls, path) -> "BeliefEnsemble":
        with open(path) as f:
            return cls.from_json(json.load(f))


def adaptive_metropolis(
    records,
    n_samples: int = 200,
    burn_in: int = 2000,
    thin: int = 5,
    seed: int | None = None,
    dim: int | None = None,
    init_scale: float = 0.3,
) -> BeliefEnsemble:
    """Sample the weight posterior with an adapting random-walk chain.

    During burn-in the proposal is an isotropic Gaussian of scale
    ``init_scale``; afterwards its covariance tracks the empirical chain
    covariance scaled by 2.38^2 / d with an ``EPS_COV`` diagonal floor.
    Proposals outside the unit ball are rejected outright.
    """
    if dim is None:
        if not records:
            raise ValueError("dim is required when no records are given")
        dim = len(records[0].psi)
    if thin < 1 or n_samples < 0 or burn_in < 0:
        raise ValueError("need thin >= 1, n_samples >= 0, burn_in >= 0")
    rng = np.random.default_rng(seed)
    total = burn_in + n_samples * thin
    s_d = 2.38**2 / dim

    if records:
        # signed differences folded together so each step is one matvec
        psi_signed = np.stack([r.label * r.psi for r in records])

        def logdensity(w):
            if w @ w > 1.0:
                return -np.inf
            return float(log_expit(psi_signed @ w).sum())

    else:

        def logdensity(w):
            return 0.0 if w @ w <= 1.0 else -np.inf

    x = np.zeros(dim)
    logp = logdensity(x)
    kept = np.empty((n_samples, dim))
    n_kept = 0
    accepted = 0
    # running first/second moments of the whole history, for adaptation
    hist_n = 1
    hist_mean = x.copy()
    hist_m2 = np.zeros((dim, dim))
    chol = None

    for t in range(total):
        if t < burn_in or hist_n < 2 * dim:
            step = init_scale * rng.standard_normal(dim)
        else:
            if chol is None:
                cov = s_d * (hist_m2 / (hist_n - 1) + EPS_COV * np.eye(dim))
                chol = np.linalg.cholesky(cov)
            step = chol @ rng.standard_normal(dim)
        proposal = x + step
        logp_prop = logdensity(proposal)
        if logp_prop > -np.inf and np.log(rng.random()) < logp_prop - logp:
            x, logp = proposal, logp_prop
            accepted += 1
        hist_n += 1
        delta = x - hist_mean
        hist_mean += delta / hist_n
        hist_m2 += np.outer(delta, x - hist_mean)
        if t >= burn_in:
            chol = None  # refresh the adapted covariance next step
            k = t - burn_in
            if (k + 1) % thin == 0:
                kept[n_kept] = x
                n_kept += 1

    rate = accepted / total if total else 0.0
    if total >= 1000 and not 0.05 <= rate <= 0.9:
        warnings.warn(f"chain acceptance rate {rate:.3f} outside [0.05, 0.9]", stacklevel=2)
    return BeliefEnsemble(
        samples=kept[:n_kept],
        acceptance_rate=rate,
        seed=-1 if seed is None else int(seed),
        burn_in=burn_in,
        thin=thin,
    )


def scott_bandwidths(samples: np.ndarray) -> np.ndarray:
    """Per-dimension Scott factors: sigma_hat_j * n^(-1/(d+4))."""
    n, d = samples.shape
    return samples.std(axis=0, ddof=1) * n ** (-1.0 / (d + 4))


DEFAULT_GRID_POINTS = {1: 1024, 2: 128, 3: 32, 4: 16}


def belief_entropy_kde(ensemble, grid_points_per_dim: int | None = None) -> float:
    """Differential entropy (nats) of a Gaussian KDE fit to the samples.

    The density is evaluated on a regular grid over [-1, 1]^d and the entropy
    approximated as -sum p log p * cell volume.  A degenerate ensemble (zero
    spread in some dimension) has no meaningful KDE; that returns -inf with a
    warning.
    """
    samples = getattr(ensemble, "samples", ensemble)
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or len(samples) == 0:
        raise ShapeError(f"expected a non-empty (n, d) sample array, got {samples.shape}")
    n, d = samples.shape
    if grid_points_per_dim is None:
        grid_points_per_dim = DEFAULT_GRID_POINTS.get(d, 12)
    h = scott_bandwidths(samples)
    if n < 2 or np.any(h <= 1e-12):
        warnings.warn("degenerate ensemble: zero spread, entropy undefined", stacklevel=2)
        return -np.inf
    axes = [np.linspace(-1.0, 1.0, grid_points_per_dim)] * d
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([m.ravel() for m in mesh], axis=1)  # (G, d)
    cell = (2.0 / (grid_points_per_dim - 1)) ** d

    norm = 1.0 / (n * np.prod(np.sqrt(2 * np.pi) * h))
    density = np.empty(len(grid))
    chunk = max(1, int(2e7) // max(n, 1))
    for lo in range(0, len(grid), chunk):
        blk = grid[lo : lo + chunk]
        z = (blk[:, None, :] - samples[None, :, :]) / h  # (g, n, d)
        density[lo : lo + chunk] = norm * np.exp(-0.5 * (z**2).sum(axis=2)).sum(axis=1)
    pos = density > 0
    return float(-np.sum(density[pos] * np.log(density[pos])) * cell)
