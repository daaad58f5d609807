"""Two-layer feed-forward classifier trained by Bayesian-regularized Levenberg-Marquardt.

Architecture: ``n_inputs -> n_hidden (logsig) -> 1 (tansig)``. Parameters
live in one flat vector ``theta`` laid out as::

    [W1 (n_hidden x n_inputs, row-major), b1 (n_hidden), W2 (n_hidden), b2]

Training minimises ``F = beta * E_D + alpha * E_W`` where ``E_D`` is the sum
of squared residuals ``t - y`` and ``E_W`` the sum of squared parameters.
After every accepted LM step the evidence-framework (Gauss-Newton
approximation) re-estimates ``alpha``, ``beta`` and the effective number
of parameters ``gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit


class TrainingError(ArithmeticError):
    """Training produced a non-finite objective."""


def logsig(z):
    return expit(z)


def tansig(z):
    # identical to 2 / (1 + exp(-2 z)) - 1 without overflow
    return np.tanh(z)


@dataclass(frozen=True)
class NetworkConfig:
    n_inputs: int
    n_hidden: int = 20
    max_epochs: int = 150
    mu_init: float = 1e-3
    mu_factor: float = 10.0
    mu_max: float = 1e10
    min_grad: float = 1e-7

    def __post_init__(self):
        if self.n_inputs < 1 or self.n_hidden < 1 or self.max_epochs < 1:
            raise ValueError("n_inputs, n_hidden and max_epochs must be positive")

    @property
    def n_params(self) -> int:
        return (self.n_inputs + 1) * self.n_hidden + self.n_hidden + 1


@dataclass
class NetworkState:
    n_inputs: int
    n_hidden: int
    theta: np.ndarray
    alpha: float = 0.0
    beta: float = 1.0
    gamma: float = 0.0
    mu: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        n = (self.n_inputs + 1) * self.n_hidden + self.n_hidden + 1
        if self.theta.shape != (n,):
            raise ValueError(f"theta must have {n} entries, got {self.theta.shape}")

    @property
    def n_params(self) -> int:
        return self.theta.size

    def unpack(self):
        """Views ``(W1, b1, W2, b2)`` into ``theta``."""
        H, I = self.n_hidden, self.n_inputs
        W1 = self.theta[: H * I].reshape(H, I)
        b1 = self.theta[H * I: H * I + H]
        W2 = self.theta[H * I + H: H * I + 2 * H]
        b2 = self.theta[-1]
        return W1, b1, W2, b2


def pack(W1, b1, W2, b2) -> np.ndarray:
    return np.concatenate([np.ravel(W1), np.ravel(b1), np.ravel(W2), np.atleast_1d(b2)]).astype(np.float64)


def init_state(config: NetworkConfig, seed: int = 0) -> NetworkState:
    """Uniform weights in [-0.5, 0.5] scaled by ``1/sqrt(fan_in)``."""
    rng = np.random.default_rng(seed)
    H, I = config.n_hidden, config.n_inputs
    W1 = rng.uniform(-0.5, 0.5, size=(H, I)) / np.sqrt(I)
    b1 = rng.uniform(-0.5, 0.5, size=H) / np.sqrt(I)
    W2 = rng.uniform(-0.5, 0.5, size=H) / np.sqrt(H)
    b2 = rng.uniform(-0.5, 0.5) / np.sqrt(H)
    return NetworkState(I, H, pack(W1, b1, W2, b2), mu=config.mu_init, seed=seed)


def _as_batch(state: NetworkState, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != state.n_inputs:
        raise ValueError(f"expected {state.n_inputs} inputs, got shape {X.shape}")
    return X


def _hidden_output(state, X):
    W1, b1, W2, b2 = state.unpack()
    h = logsig(X @ W1.T + b1)
    return h, tansig(h @ W2 + b2)


def forward(state: NetworkState, X):
    """Network output in (-1, 1); scalar for a single input vector."""
    single = np.ndim(X) == 1
    _, y = _hidden_output(state, _as_batch(state, X))
    return float(y[0]) if single else y


def jacobian(state: NetworkState, X) -> np.ndarray:
    """Jacobian of the residuals ``t - y`` w.r.t. ``theta``, shape ``(n, N)``."""
    X = _as_batch(state, X)
    _, _, W2, _ = state.unpack()
    h, y = _hidden_output(state, X)
    dy = 1.0 - y * y
    delta = dy[:, None] * W2[None, :] * h * (1.0 - h)
    n = X.shape[0]
    dW1 = (delta[:, :, None] * X[:, None, :]).reshape(n, -1)
    J = np.hstack([dW1, delta, dy[:, None] * h, dy[:, None]])
    return -J


def predict_class(state: NetworkState, X):
    """Sign of the output; an output of exactly 0 maps to +1."""
    out = forward(state, X)
    if np.ndim(out) == 0:
        return -1 if out < 0 else 1
    return np.where(out < 0, -1, 1)


@dataclass
class TraceEntry:
    epoch: int
    f_before: float
    f_after: float
    sse: float
    ssw: float
    alpha: float
    beta: float
    gamma: float
    mu: float
    grad_norm: float


@dataclass
class TrainingTrace:
    entries: list[TraceEntry] = field(default_factory=list)
    stop_reason: str = ""

    @property
    def epochs(self) -> int:
        return len(self.entries)


def _objective(state, X, t, alpha, beta):
    _, y = _hidden_output(state, X)
    r = t - y
    sse = float(r @ r)
    ssw = float(state.theta @ state.theta)
    return beta * sse + alpha * ssw, sse, ssw


def train(config: NetworkConfig, X, t, seed: int = 0, state: NetworkState | None = None):
    """Fit the network to targets ``t`` in {-1, +1}.

    Parameters
    ----------
    config : NetworkConfig
    X : array-like, shape (n, n_inputs)
    t : array-like, shape (n,)
    seed : int
        Seeds the initial weights.
    state : NetworkState, optional
        Start from this state instead of a fresh initialisation.

    Returns
    -------
    state : NetworkState
    trace : TrainingTrace
        One entry per accepted step, with the objective before and after
        the step under the hyperparameters that were in force for it.
    """
    X = np.asarray(X, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("training set must be a non-empty 2-D array")
    if X.shape[0] != t.size:
        raise ValueError("inputs and targets differ in length")
    if not np.all(np.isin(t, (-1.0, 1.0))):
        raise ValueError("targets must be -1 or +1")
    if state is None:
        state = init_state(config, seed)
    else:
        state = replace(state, theta=state.theta.copy())
    if state.n_inputs != X.shape[1]:
        raise ValueError("state and data disagree on n_inputs")

    n, N = X.shape[0], state.n_params
    alpha, beta, mu = 0.0, 1.0, config.mu_init
    gamma = float(N)
    trace = TrainingTrace()

    for epoch in range(1, config.max_epochs + 1):
        _, y = _hidden_output(state, X)
        r = t - y
        sse = float(r @ r)
        ssw = float(state.theta @ state.theta)
        f = beta * sse + alpha * ssw
        if not np.isfinite(f):
            raise TrainingError(f"non-finite objective at epoch {epoch}")
        J = jacobian(state, X)
        g = beta * (J.T @ r) + alpha * state.theta
        grad_norm = 2.0 * float(np.linalg.norm(g))
        if grad_norm < config.min_grad:
            trace.stop_reason = "min_grad"
            break

        _, s, Vt = np.linalg.svd(J, full_matrices=False)
        bs2 = beta * s * s
        Vg = Vt @ g
        accepted = False
        while mu <= config.mu_max:
            c = alpha + mu
            # (beta J^T J + c I)^-1 g via the thin SVD of J
            step = -(Vt.T @ (Vg / (bs2 + c)) + (g - Vt.T @ Vg) / c)
            trial = replace(state, theta=state.theta + step)
            f_new, sse_new, ssw_new = _objective(trial, X, t, alpha, beta)
            if np.isfinite(f_new) and f_new < f:
                accepted = True
                break
            mu *= config.mu_factor
        if not accepted:
            trace.stop_reason = "mu_max"
            break

        state = trial
        f_before = f
        mu = max(mu / config.mu_factor, 1e-20)

        # evidence update; gamma = N - alpha tr((beta J^T J + alpha I)^-1)
        if alpha > 0:
            gamma = float(np.sum(bs2 / (bs2 + alpha)))
        else:
            gamma = float(np.count_nonzero(bs2 > 0))
        gamma = min(max(gamma, 0.0), float(N))
        if ssw_new > 0:
            alpha = gamma / (2.0 * ssw_new)
        if n - gamma > 0 and sse_new > 0:
            beta = min((n - gamma) / (2.0 * sse_new), 1e10)

        trace.entries.append(TraceEntry(
            epoch, f_before, f_new, sse_new, ssw_new, alpha, beta, gamma, mu, grad_norm))
    else:
        trace.stop_reason = "max_epochs"

    state.alpha, state.beta, state.gamma, state.mu = alpha, beta, gamma, mu
    state.seed = seed
    return state, trace


def fold_standardization(state: NetworkState, mean, scale) -> NetworkState:
    """Return a state taking raw inputs, for a network trained on ``(x - mean) / scale``."""
    W1, b1, W2, b2 = state.unpack()
    mean = np.asarray(mean, dtype=np.float64)
    scale = np.asarray(scale, dtype=np.float64)
    W1r = W1 / scale
    b1r = b1 - W1r @ mean
    return replace(state, theta=pack(W1r, b1r, W2, b2))


def standardize_fit(X):
    """Per-feature mean and scale; constant features get scale 1."""
    X = np.asarray(X, dtype=np.float64)
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    return mean, scale


def save_model(state: NetworkState, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{state.n_inputs} {state.n_hidden} {state.seed}\n")
        for v in state.theta:
            fh.write(f"{float(v)!r}\n")


def load_model(path) -> NetworkState:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    try:
        n_inputs, n_hidden, seed = (int(v) for v in lines[0].split())
        theta = np.array([float(v) for v in lines[1:]])
    except (IndexError, ValueError):
        raise ValueError(f"malformed model file {path}") from None
    return NetworkState(n_inputs, n_hidden, theta, seed=seed)
