"""Exact birth-death Metropolis sampling of the interacting models.

The chain state is a point configuration together with the cached grid field
``Phi = G * eta`` and the cached action ``beta * U(eta)``; both caches are
updated incrementally and re-derived from scratch every ``drift_period``
accepted moves.  A drift beyond ``drift_abort`` aborts the run (the caches,
and hence the simulated distribution, would no longer be trustworthy).

Proposals: with probability 1/2 a birth at a uniform point of the window,
accepted with probability ``min(1, p(x, eta) sigma / (n+1))`` where ``p`` is
the conditional intensity and ``sigma`` the total reference mass of the
window; otherwise the death of a uniformly chosen point, accepted with
probability ``min(1, n / (sigma p(x, eta - x)))``.  A death proposed from the
empty configuration is a rejected no-op.  This pair of rates is in detailed
balance with the target for every reference mass and every bounded ``p``.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from . import backend
from .configurations import Configuration
from .interaction import PotentialSpec
from .stats import iact_batch

__all__ = [
    "SamplerConfig",
    "ChainState",
    "Diagnostics",
    "SampleSet",
    "CacheDriftError",
    "init_state",
    "step",
    "run",
    "run_chains",
    "birth_acceptance",
    "death_acceptance",
]


class CacheDriftError(RuntimeError):
    """Incremental caches diverged from a fresh recomputation."""


@dataclasses.dataclass(frozen=True)
class SamplerConfig:
    """Run-length and bookkeeping knobs for one chain."""

    intensity: float = 1.0
    burnin: int = 1000
    thin: int = 5
    drift_period: int = 10000
    drift_abort: float = 1e-6

    def __post_init__(self):
        if self.intensity <= 0:
            raise ValueError("intensity must be positive")
        if self.burnin < 0:
            raise ValueError("burnin must be >= 0")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.drift_period < 1:
            raise ValueError("drift_period must be >= 1")


@dataclasses.dataclass
class Diagnostics:
    steps: int = 0
    birth_proposals: int = 0
    birth_accepts: int = 0
    death_proposals: int = 0
    death_accepts: int = 0
    drift_checks: int = 0
    max_drift: float = 0.0
    iact: float = float("nan")
    ess: float = float("nan")
    backend: str = backend.BACKEND

    @property
    def birth_rate(self) -> float:
        return self.birth_accepts / max(1, self.birth_proposals)

    @property
    def death_rate(self) -> float:
        return self.death_accepts / max(1, self.death_proposals)

    def to_jsonable(self) -> dict:
        return {
            "steps": self.steps,
            "birth_proposals": self.birth_proposals,
            "birth_accepts": self.birth_accepts,
            "death_proposals": self.death_proposals,
            "death_accepts": self.death_accepts,
            "drift_checks": self.drift_checks,
            "max_drift": self.max_drift,
            "iact": self.iact if math.isfinite(self.iact) else None,
            "ess": self.ess if math.isfinite(self.ess) else None,
            "backend": self.backend,
        }


class ChainState:
    """Mutable chain state with incrementally maintained caches."""

    def __init__(self, spec: PotentialSpec, config: SamplerConfig, rng):
        self.spec = spec
        self.config = config
        self.rng = np.random.default_rng(rng)
        space = spec.window.space
        self.dim = space.ambient_dim
        self._capacity = 64
        self.pts = np.zeros((self._capacity, self.dim))
        self.n = 0
        self.phi = np.zeros(spec.grid.nodes.shape[0])
        self.action = 0.0
        self.sigma_total = config.intensity * spec.window.volume
        self.diag = Diagnostics()
        self._accepted_since_check = 0
        self._is_core_model = (
            space.kind == "euclidean" and type(spec.kernel).__name__ == "GaussianKernel"
        )
        vkind, svals, wvals = spec.profile.core_params()
        self._vparams = (int(vkind), np.ascontiguousarray(svals), np.ascontiguousarray(wvals))
        if space.kind == "euclidean":
            self._lo = np.ascontiguousarray(spec.window.bounds[:, 0])
            self._hi = np.ascontiguousarray(spec.window.bounds[:, 1])
        self._nodes = np.ascontiguousarray(spec.grid.nodes)
        self._weights = np.ascontiguousarray(spec.grid.weights)

    def configuration(self) -> Configuration:
        return Configuration(self.pts[: self.n].copy())

    def _ensure_capacity(self, extra: int):
        need = self.n + extra
        if need <= self._capacity:
            return
        while self._capacity < need:
            self._capacity *= 2
        grown = np.zeros((self._capacity, self.dim))
        grown[: self.n] = self.pts[: self.n]
        self.pts = grown

    def advance(self, steps: int):
        """Run ``steps`` proposals, updating state and diagnostics in place."""
        if steps <= 0:
            return
        self._ensure_capacity(steps)
        kind_u = self.rng.random(steps)
        vkind, svals, wvals = self._vparams
        if self._is_core_model:
            pos_u = self.rng.random((steps, self.dim))
            idx_u = self.rng.random(steps)
            acc_u = self.rng.random(steps)
            out = backend.run_block(
                self.pts,
                self.n,
                self.phi,
                self.action,
                self._nodes,
                self._weights,
                vkind,
                self.spec.beta,
                svals,
                wvals,
                self.sigma_total,
                self._lo,
                self._hi,
                kind_u,
                pos_u,
                idx_u,
                acc_u,
            )
        else:
            proposals = self.spec.window.sample_uniform(self.rng, steps)
            idx_u = self.rng.random(steps)
            acc_u = self.rng.random(steps)
            out = _run_block_general(
                self.spec,
                self.pts,
                self.n,
                self.phi,
                self.action,
                self.sigma_total,
                kind_u,
                proposals,
                idx_u,
                acc_u,
            )
        n, action, bp, ba, dp, da = out
        self.n, self.action = n, action
        self.diag.steps += steps
        self.diag.birth_proposals += bp
        self.diag.birth_accepts += ba
        self.diag.death_proposals += dp
        self.diag.death_accepts += da
        self._accepted_since_check += ba + da
        if self._accepted_since_check >= self.config.drift_period:
            self.check_drift()

    def check_drift(self) -> float:
        """Compare caches against a fresh recomputation; refresh them."""
        eta = Configuration(self.pts[: self.n])
        phi_fresh = self.spec.grid_field(eta)
        action_fresh = self.spec.beta * float(
            np.dot(
                self.spec.grid.weights,
                self.spec.profile.value(phi_fresh, self.spec.beta),
            )
        )
        drift = float(np.max(np.abs(self.phi - phi_fresh))) if self.phi.size else 0.0
        drift = max(drift, abs(self.action - action_fresh))
        self.diag.drift_checks += 1
        self.diag.max_drift = max(self.diag.max_drift, drift)
        self._accepted_since_check = 0
        if drift > self.config.drift_abort:
            raise CacheDriftError(
                f"cache drift {drift:.3e} exceeds abort threshold "
                f"{self.config.drift_abort:g}"
            )
        self.phi = phi_fresh
        self.action = action_fresh
        return drift


def _run_block_general(
    spec, pts, n, phi, action, sigma_total, kind_u, proposals, idx_u, acc_u
):
    """Python block driver for models outside the compiled core's scope."""
    weights = spec.grid.weights
    beta = spec.beta
    prof = spec.profile
    births_p = births_a = deaths_p = deaths_a = 0
    for t in range(kind_u.shape[0]):
        if kind_u[t] < 0.5:
            births_p += 1
            x = proposals[t]
            row = spec.kernel.eval_points(spec.grid.nodes, x)[:, 0]
            delta = beta * float(
                np.dot(weights, prof.value(phi + row, beta) - prof.value(phi, beta))
            )
            if acc_u[t] * (n + 1) < math.exp(-delta) * sigma_total:
                pts[n] = x
                phi += row
                action += delta
                n += 1
                births_a += 1
        else:
            deaths_p += 1
            if n == 0:
                continue
            j = min(int(idx_u[t] * n), n - 1)
            row = spec.kernel.eval_points(spec.grid.nodes, pts[j])[:, 0]
            base = phi - row
            delta = beta * float(
                np.dot(weights, prof.value(base + row, beta) - prof.value(base, beta))
            )
            if acc_u[t] * sigma_total * math.exp(-delta) < n:
                pts[j] = pts[n - 1]
                phi -= row
                action -= delta
                n -= 1
                deaths_a += 1
    return n, action, births_p, births_a, deaths_p, deaths_a


def init_state(spec: PotentialSpec, config: SamplerConfig, seed) -> ChainState:
    """Fresh chain started from the empty configuration."""
    return ChainState(spec, config, seed)


def step(state: ChainState) -> ChainState:
    """Advance a single proposal (mutates and returns the state)."""
    state.advance(1)
    return state


@dataclasses.dataclass
class SampleSet:
    """Thinned configurations from one or more chains."""

    points: list
    dim: int
    meta: dict = dataclasses.field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        for p in self.points:
            yield Configuration(p)

    def counts(self) -> np.ndarray:
        return np.array([p.shape[0] for p in self.points], dtype=float)

    def extend(self, other: "SampleSet"):
        self.points.extend(other.points)

    def write_ndjson(self, path):
        with open(path, "w") as fh:
            for p in self.points:
                fh.write(json.dumps({"points": p.tolist()}, sort_keys=True))
                fh.write("\n")

    @staticmethod
    def read_ndjson(path, dim: int) -> "SampleSet":
        points = []
        with open(path) as fh:
            for line in fh:
                data = json.loads(line)
                points.append(np.asarray(data["points"], dtype=float).reshape(-1, dim))
        return SampleSet(points, dim)


def run(
    spec: PotentialSpec, config: SamplerConfig, n_samples: int, seed
) -> tuple[SampleSet, Diagnostics]:
    """Burn in, then record ``n_samples`` configurations ``thin`` steps apart."""
    state = init_state(spec, config, seed)
    state.advance(config.burnin)
    samples = []
    counts = np.empty(n_samples)
    for i in range(n_samples):
        state.advance(config.thin)
        samples.append(state.pts[: state.n].copy())
        counts[i] = state.n
    state.check_drift()
    if n_samples >= 64:
        state.diag.iact = iact_batch(counts)
        state.diag.ess = n_samples / state.diag.iact
    sample_set = SampleSet(samples, state.dim, meta={"seed_entropy": str(seed)})
    return sample_set, state.diag


def _chain_job(args):
    spec, config, n_samples, seed_seq = args
    return run(spec, config, n_samples, seed_seq)


def run_chains(
    spec: PotentialSpec,
    config: SamplerConfig,
    n_samples: int,
    n_chains: int,
    seed,
    workers: int = 1,
) -> tuple[SampleSet, list]:
    """Run independent chains and merge their outputs in chain order.

    Per-chain streams come from ``SeedSequence(seed).spawn``, and the merge
    order is the chain index, so results do not depend on ``workers``.
    """
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(n_chains)
    jobs = [(spec, config, n_samples, child) for child in children]
    if workers > 1 and n_chains > 1:
        import multiprocessing

        with multiprocessing.get_context("spawn").Pool(min(workers, n_chains)) as pool:
            results = pool.map(_chain_job, jobs)
    else:
        results = [_chain_job(j) for j in jobs]
    merged = SampleSet([], spec.window.space.ambient_dim, meta={"chains": n_chains})
    diags = []
    for sample_set, diag in results:
        merged.extend(sample_set)
        diags.append(diag)
    return merged, diags


def birth_acceptance(spec: PotentialSpec, config: SamplerConfig, x, eta) -> float:
    """Acceptance probability of inserting ``x`` into ``eta`` (for audits)."""
    from .interaction import papangelou

    sigma = config.intensity * spec.window.volume
    return min(1.0, papangelou(spec, x, eta) * sigma / (len(eta) + 1))


def death_acceptance(spec: PotentialSpec, config: SamplerConfig, x, eta_minus) -> float:
    """Acceptance probability of removing ``x`` given the rest ``eta_minus``."""
    from .interaction import papangelou

    sigma = config.intensity * spec.window.volume
    n = len(eta_minus) + 1
    return min(1.0, n / (sigma * papangelou(spec, x, eta_minus)))
