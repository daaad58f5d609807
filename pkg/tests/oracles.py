"""Independent reference implementations used as test oracles.

Plain Python loops over lists and ``math``; nothing here shares code with
the package.
"""

import math


def mean_vector(vectors):
    w = len(vectors[0])
    return [sum(v[q] for v in vectors) / len(vectors) for q in range(w)]


def lambda_direct(xs, ys):
    """Centroid distance over summed mean scatter, straight from the definition."""
    w = len(xs[0])
    mx, my = mean_vector(xs), mean_vector(ys)
    sx = sum(math.sqrt(sum((x[q] - mx[q]) ** 2 for q in range(w))) for x in xs)
    sy = sum(math.sqrt(sum((y[q] - my[q]) ** 2 for q in range(w))) for y in ys)
    scatter = sx / (len(xs) * math.sqrt(w)) + sy / (len(ys) * math.sqrt(w))
    distance = math.sqrt(sum((mx[q] - my[q]) ** 2 for q in range(w))) / math.sqrt(w)
    if scatter < 1e-12:
        return 0.0 if distance < 1e-12 else distance / 1e-12
    return distance / scatter


def dim_direct(X, Y):
    """``{(k, w): lambda}`` for every window, one from-scratch evaluation per cell."""
    m = len(X[0])
    out = {}
    for w in range(1, m + 1):
        for k in range(m - w + 1):
            out[k, w] = lambda_direct([x[k:k + w] for x in X], [y[k:k + w] for y in Y])
    return out


def logsig(z):
    return 1.0 / (1.0 + math.exp(-z))


def tansig(z):
    return 2.0 / (1.0 + math.exp(-2.0 * z)) - 1.0


def net_direct(theta, n_inputs, n_hidden, x):
    """Two-layer network output from the flat parameter layout, scalar loops."""
    W1 = [theta[j * n_inputs:(j + 1) * n_inputs] for j in range(n_hidden)]
    off = n_hidden * n_inputs
    b1 = theta[off:off + n_hidden]
    W2 = theta[off + n_hidden:off + 2 * n_hidden]
    b2 = theta[-1]
    h = [logsig(sum(W1[j][i] * x[i] for i in range(n_inputs)) + b1[j]) for j in range(n_hidden)]
    return tansig(sum(W2[j] * h[j] for j in range(n_hidden)) + b2)


def net_extended(theta, n_inputs, n_hidden, X):
    """Network outputs for the rows of ``X`` evaluated in ``np.longdouble``."""
    import numpy as np
    th = np.asarray(theta, dtype=np.longdouble)
    X = np.asarray(X, dtype=np.longdouble)
    W1 = th[: n_hidden * n_inputs].reshape(n_hidden, n_inputs)
    off = n_hidden * n_inputs
    b1, W2, b2 = th[off:off + n_hidden], th[off + n_hidden:off + 2 * n_hidden], th[-1]
    h = 1 / (1 + np.exp(-(X @ W1.T + b1)))
    return np.tanh(h @ W2 + b2)


def spearman_direct(a, b):
    """Spearman rho via average ranks and Pearson correlation."""
    def ranks(v):
        order = sorted(range(len(v)), key=lambda i: v[i])
        r = [0.0] * len(v)
        i = 0
        while i < len(v):
            j = i
            while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
                j += 1
            for t in range(i, j + 1):
                r[order[t]] = (i + j) / 2.0 + 1
            i = j + 1
        return r
    ra, rb = ranks(a), ranks(b)
    ma, mb = sum(ra) / len(ra), sum(rb) / len(rb)
    cov = sum((x - ma) * (y - mb) for x, y in zip(ra, rb))
    va = sum((x - ma) ** 2 for x in ra)
    vb = sum((y - mb) ** 2 for y in rb)
    return cov / math.sqrt(va * vb)
