"""Synthetic union-of-subspaces data and Monte Carlo checks of the residual
structure left after projecting onto the top left singular directions.

The generator draws k mutually orthogonal signal subspaces (optionally tilted
toward each other with `overlap`), places each cluster's samples inside its
subspace with isotropic per-cluster noise on top, and returns ground truth.
`validate` projects each sampled matrix off its top-m singular basis and
aggregates the residual cross-covariance over trials: the basis is
orthonormal and exactly orthogonal to the residual per trial, the per-cluster
residual diagonal matches the noise energy left outside the union span, and
the off-block / within-block off-diagonal averages shrink with sample size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InfeasibleDims
from .matrix import DataMatrix, validate as validate_matrix
from .spectral import eigendecompose_symmetric

# Signal coordinates default to mean 3 sqrt(c): same-cluster samples then
# correlate positively, the regime the clustering pipeline is built for.
DEFAULT_MEAN_FACTOR = 3.0


@dataclass(frozen=True)
class SubspaceModel:
    """Generator configuration for k noisy clusters in linear subspaces.

    subspace_dims, cluster_sizes, noise_sigmas, signal_min_eig, and (when
    given) signal_mean are per-cluster tuples of length k. signal_min_eig is
    the variance of every signal coordinate, so it is also the smallest
    eigenvalue of the signal covariance. signal_mean is the mean of every
    signal coordinate; None selects DEFAULT_MEAN_FACTOR * sqrt(signal_min_eig).
    overlap in [0, 1) tilts every subspace after the first toward the first
    one; 0 keeps the subspaces mutually orthogonal (projector separation
    exactly 1) and larger values shrink the separation monotonically.
    """

    p: int
    k: int
    subspace_dims: tuple
    cluster_sizes: tuple
    noise_sigmas: tuple
    signal_min_eig: tuple | None = None
    signal_mean: tuple | None = None
    overlap: float = 0.0
    seed: int = 0

    def __post_init__(self):
        dims = tuple(int(d) for d in self.subspace_dims)
        sizes = tuple(int(s) for s in self.cluster_sizes)
        sigmas = tuple(float(s) for s in self.noise_sigmas)
        eigs = (
            tuple(float(c) for c in self.signal_min_eig)
            if self.signal_min_eig is not None
            else (1.0,) * self.k
        )
        means = (
            tuple(float(b) for b in self.signal_mean)
            if self.signal_mean is not None
            else tuple(DEFAULT_MEAN_FACTOR * math.sqrt(c) for c in eigs)
        )
        for nm, t in (("subspace_dims", dims), ("cluster_sizes", sizes),
                      ("noise_sigmas", sigmas), ("signal_min_eig", eigs),
                      ("signal_mean", means)):
            if len(t) != self.k:
                raise ValueError(f"{nm} must have length k={self.k}, got {len(t)}")
        if any(d < 1 for d in dims) or any(s < 1 for s in sizes):
            raise ValueError("subspace_dims and cluster_sizes must be >= 1")
        if any(s < 0 for s in sigmas):
            raise ValueError("noise_sigmas must be non-negative")
        if any(c <= 0 for c in eigs):
            raise ValueError("signal_min_eig must be positive")
        if not (0.0 <= self.overlap < 1.0):
            raise ValueError("overlap must be in [0, 1)")
        if sum(dims) > self.p:
            raise InfeasibleDims(f"sum of subspace dims {sum(dims)} exceeds p={self.p}")
        object.__setattr__(self, "subspace_dims", dims)
        object.__setattr__(self, "cluster_sizes", sizes)
        object.__setattr__(self, "noise_sigmas", sigmas)
        object.__setattr__(self, "signal_min_eig", eigs)
        object.__setattr__(self, "signal_mean", means)

    @property
    def n_total(self) -> int:
        return sum(self.cluster_sizes)

    @property
    def union_dim(self) -> int:
        return sum(self.subspace_dims)


@dataclass(frozen=True)
class SubspaceSample:
    """One draw from a SubspaceModel, columns are observations."""

    y: np.ndarray                  # (p, N) observed columns, signal + noise
    signals: np.ndarray            # (p, N) noiseless signal columns
    labels: np.ndarray             # (N,) cluster index per column
    bases: tuple                   # per-cluster (p, m_i) orthonormal bases
    model: SubspaceModel

    def projectors(self) -> tuple:
        return tuple(b @ b.T for b in self.bases)

    def to_data_matrix(self, name: str = "synthetic-subspaces") -> DataMatrix:
        return validate_matrix(self.y.T, labels=self.labels, name=name)


@dataclass(frozen=True)
class TheoremVerdict:
    """Aggregated residual diagnostics over Monte Carlo trials.

    orthonormality_err / residual_orth_err are worst-case over trials (exact
    algebra, should sit at roundoff). Block statistics come from the
    trial-averaged residual cross-covariance: within_diag_obs holds the
    per-cluster diagonal means, with two predictions per cluster (noise energy
    outside the union span and outside the cluster's own subspace);
    cross_block_max is the largest |mean entry| over cross-cluster blocks,
    cross_entry_rms the RMS cross-block entry, and within_offdiag holds the
    per-cluster RMS of each sample's mean off-diagonal covariance with its
    same-cluster peers (noise-floored at the 1/sqrt(N * trials) scale).
    delta_hat is the smallest projector separation seen across trials.
    """

    orthonormality_err: float
    residual_orth_err: float
    within_diag_obs: tuple
    within_diag_pred_union: tuple
    within_diag_pred_cluster: tuple
    cross_block_max: float
    cross_entry_rms: float
    within_offdiag: tuple
    within_offdiag_max: float
    delta_hat: float
    trials: int
    m: int
    m_union: int

    def to_dict(self) -> dict:
        return {
            "orthonormality_err": self.orthonormality_err,
            "residual_orth_err": self.residual_orth_err,
            "within_diag_obs": list(self.within_diag_obs),
            "within_diag_pred_union": list(self.within_diag_pred_union),
            "within_diag_pred_cluster": list(self.within_diag_pred_cluster),
            "cross_block_max": self.cross_block_max,
            "cross_entry_rms": self.cross_entry_rms,
            "within_offdiag": list(self.within_offdiag),
            "within_offdiag_max": self.within_offdiag_max,
            "delta_hat": self.delta_hat,
            "trials": self.trials,
            "m": self.m,
            "m_union": self.m_union,
        }


def generate(model: SubspaceModel, rng=None) -> SubspaceSample:
    """Draw one dataset from the model.

    Bases come from a QR factorization of a Gaussian matrix (mutually
    orthogonal subspaces), then tilted toward the first basis when
    overlap > 0. Signal coordinates are N(mean_i, c_i I) in basis coordinates
    and noise is N(0, sigma_i^2 I_p) per column.
    """
    if rng is None:
        rng = np.random.default_rng(model.seed)
    bases = _draw_bases(model, rng)
    cols_z = []
    cols_e = []
    labels = []
    for i in range(model.k):
        m_i = model.subspace_dims[i]
        n_i = model.cluster_sizes[i]
        coords = model.signal_mean[i] + math.sqrt(model.signal_min_eig[i]) * (
            rng.standard_normal((m_i, n_i))
        )
        cols_z.append(bases[i] @ coords)
        cols_e.append(model.noise_sigmas[i] * rng.standard_normal((model.p, n_i)))
        labels.extend([i] * n_i)
    signals = np.concatenate(cols_z, axis=1)
    y = signals + np.concatenate(cols_e, axis=1)
    return SubspaceSample(
        y=y,
        signals=signals,
        labels=np.array(labels, dtype=int),
        bases=tuple(bases),
        model=model,
    )


def validate(model: SubspaceModel, m: int, trials: int) -> TheoremVerdict:
    """Monte Carlo residual diagnostics at projection dimension m >= union dim.

    Trial t uses the generator seeded with (model.seed, t), so the verdict is
    deterministic and independent of any execution order.
    """
    if m < model.union_dim:
        raise ValueError(f"m={m} is below the union dimension {model.union_dim}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = model.n_total
    avg = np.zeros((n, n))
    orth_err = 0.0
    resid_err = 0.0
    delta_hat = math.inf
    for t in range(trials):
        sample = generate(model, rng=np.random.default_rng([model.seed, t]))
        u = _top_left_basis(sample.y, m)
        gram = u.T @ u
        orth_err = max(orth_err, float(np.abs(gram - np.eye(m)).max()))
        resid = sample.y - u @ (u.T @ sample.y)
        resid_err = max(resid_err, float(np.abs(u.T @ resid).max()))
        avg += resid.T @ resid
        delta_hat = min(delta_hat, _projector_separation(sample.bases))
    avg /= trials
    return _verdict_from_average(model, avg, m, trials, orth_err, resid_err, delta_hat)


@dataclass(frozen=True)
class DecayRow:
    n: int
    cross_block_max: float
    within_offdiag_max: float


@dataclass(frozen=True)
class DecayStudy:
    """Residual off-diagonal magnitudes as total sample size grows."""

    rows: tuple
    slope: float           # log-log slope of within_offdiag_max vs N
    trials: int

    def to_delimited(self) -> str:
        lines = ["n,cross_block_max,within_offdiag_max"]
        for r in self.rows:
            lines.append(f"{r.n},{r.cross_block_max!r},{r.within_offdiag_max!r}")
        return "\n".join(lines) + "\n"


def error_decay_study(base_model: SubspaceModel, n_grid, trials: int,
                      m: int | None = None) -> DecayStudy:
    """Scale cluster sizes to each total N in the increasing n_grid, rerun
    `validate`, and fit the log-log slope of within_offdiag_max vs N."""
    n_grid = [int(v) for v in n_grid]
    if any(b >= a for a, b in zip(n_grid[1:], n_grid)):
        raise ValueError("n_grid must be strictly increasing")
    if m is None:
        m = base_model.union_dim
    rows = []
    for idx, n in enumerate(n_grid):
        sizes = _scale_sizes(base_model.cluster_sizes, n)
        model_n = replace(
            base_model, cluster_sizes=sizes, seed=base_model.seed + 7919 * (idx + 1)
        )
        verdict = validate(model_n, m, trials)
        rows.append(DecayRow(n=n, cross_block_max=verdict.cross_block_max,
                             within_offdiag_max=verdict.within_offdiag_max))
    ys = [r.within_offdiag_max for r in rows]
    if all(v > 0 for v in ys):
        slope = float(np.polyfit(np.log(n_grid), np.log(ys), 1)[0])
    else:
        slope = math.nan   # noiseless runs measure exact zeros
    return DecayStudy(rows=tuple(rows), slope=slope, trials=trials)


def _draw_bases(model: SubspaceModel, rng) -> list:
    m_all = model.union_dim
    g = rng.standard_normal((model.p, m_all))
    q, r = np.linalg.qr(g)
    q = q * np.where(np.diag(r) < 0.0, -1.0, 1.0)[None, :]
    bases = []
    offset = 0
    for d in model.subspace_dims:
        bases.append(q[:, offset:offset + d].copy())
        offset += d
    if model.overlap > 0.0 and model.k >= 2:
        # Tilt every basis after the first toward the first one; pairwise
        # separation then shrinks monotonically (sqrt(1 - overlap) against
        # the first subspace) and reaches 0 only at overlap = 1.
        a = model.overlap
        ref = bases[0]
        tilted = [ref]
        for b in bases[1:]:
            width = min(b.shape[1], ref.shape[1])
            mix = b.copy()
            mix[:, :width] = (
                math.sqrt(1.0 - a) * b[:, :width] + math.sqrt(a) * ref[:, :width]
            )
            qi, ri = np.linalg.qr(mix)
            qi = qi * np.where(np.diag(ri) < 0.0, -1.0, 1.0)[None, :]
            tilted.append(qi)
        bases = tilted
    return bases


def _projector_separation(bases) -> float:
    worst = math.inf
    for i in range(len(bases)):
        pi = bases[i] @ bases[i].T
        for j in range(i + 1, len(bases)):
            pj = bases[j] @ bases[j].T
            worst = min(worst, float(np.linalg.norm(pi - pj, ord=2)))
    return worst if worst < math.inf else 0.0


def _top_left_basis(y: np.ndarray, m: int) -> np.ndarray:
    """Top-m left singular basis via the smaller of the two Gram matrices."""
    p, n = y.shape
    if m > p:
        raise ValueError(f"m={m} exceeds the ambient dimension {p}")
    if p <= n:
        gram = y @ y.T
        dec = eigendecompose_symmetric((gram + gram.T) / 2.0)
        return dec.u[:, :m].copy()
    gram = y.T @ y
    dec = eigendecompose_symmetric((gram + gram.T) / 2.0)
    lam = dec.lam[:m]
    keep = lam > 1e-12 * max(dec.lam[0], 1e-300)
    u = y @ dec.u[:, :m][:, keep]
    u /= np.sqrt(lam[keep])[None, :]
    if keep.all():
        return u
    # Rank-deficient draw (e.g. noiseless): pad with an orthonormal completion.
    basis, _ = np.linalg.qr(np.concatenate([u, np.eye(p)], axis=1))
    return np.concatenate([u, basis[:, u.shape[1]:m]], axis=1)


def _verdict_from_average(model, avg, m, trials, orth_err, resid_err, delta_hat):
    starts = np.cumsum((0,) + model.cluster_sizes)
    slices = [slice(starts[i], starts[i + 1]) for i in range(model.k)]
    diag = np.diag(avg)
    within_diag_obs = tuple(float(diag[s].mean()) for s in slices)
    pred_union = tuple(
        float(model.noise_sigmas[i] ** 2 * (model.p - model.union_dim))
        for i in range(model.k)
    )
    pred_cluster = tuple(
        float(model.noise_sigmas[i] ** 2 * (model.p - model.subspace_dims[i]))
        for i in range(model.k)
    )
    cross_max = 0.0
    cross_sq_sum = 0.0
    cross_count = 0
    for i in range(model.k):
        for j in range(i + 1, model.k):
            block = avg[slices[i], slices[j]]
            cross_max = max(cross_max, abs(float(block.mean())))
            cross_sq_sum += float((block * block).sum())
            cross_count += block.size
    cross_rms = math.sqrt(cross_sq_sum / cross_count) if cross_count else 0.0
    within = []
    for i, s in enumerate(slices):
        block = avg[s, s]
        n_i = block.shape[0]
        if n_i < 2:
            within.append(0.0)
            continue
        row_means = (block.sum(axis=1) - np.diag(block)) / (n_i - 1)
        within.append(float(np.sqrt((row_means * row_means).mean())))
    return TheoremVerdict(
        orthonormality_err=orth_err,
        residual_orth_err=resid_err,
        within_diag_obs=within_diag_obs,
        within_diag_pred_union=pred_union,
        within_diag_pred_cluster=pred_cluster,
        cross_block_max=cross_max,
        cross_entry_rms=cross_rms,
        within_offdiag=tuple(within),
        within_offdiag_max=max(within),
        delta_hat=delta_hat,
        trials=trials,
        m=m,
        m_union=model.union_dim,
    )


def _scale_sizes(base_sizes, n_total: int) -> tuple:
    """Proportional sizes summing exactly to n_total (largest remainder)."""
    base_total = sum(base_sizes)
    raw = [n_total * s / base_total for s in base_sizes]
    sizes = [max(1, int(v)) for v in raw]
    remainders = sorted(
        range(len(raw)), key=lambda i: raw[i] - int(raw[i]), reverse=True
    )
    idx = 0
    while sum(sizes) < n_total:
        sizes[remainders[idx % len(sizes)]] += 1
        idx += 1
    while sum(sizes) > n_total:
        big = max(range(len(sizes)), key=lambda i: sizes[i])
        sizes[big] -= 1
    return tuple(sizes)
