"""Seeded generators for the simulation models and scenarios.

Models 1-9 live on 30 equispaced points of [0, 1], Models 10-12 on 150
points of [0, 1] and Models 13-21 on 100 points of [0, pi/3]. A scenario
stacks ``per_group`` curves from each of its models, labelled 0, 1, 2 in
model order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .curves import FunctionalSample, Grid
from .errors import InvalidArgument, NumericalFailure

KL_TERMS = 100


@dataclass(frozen=True)
class GPKernelSpec:
    """Exponential covariance ``scale * exp(-|s - t| / length)``."""

    scale: float
    length: float

    def __post_init__(self):
        if not (self.scale > 0 and self.length > 0):
            raise InvalidArgument("scale and length must be positive")

    def matrix(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.scale * np.exp(-np.abs(t[:, None] - t[None, :]) / self.length)


E_NOISE = GPKernelSpec(0.3, 0.3)
H_NOISE = GPKernelSpec(0.5, 0.2)


def _grid_points(grid):
    return grid.points if isinstance(grid, Grid) else np.asarray(grid, dtype=float)


def gp_cholesky(kernel: GPKernelSpec, grid) -> np.ndarray:
    """Lower Cholesky factor of the kernel matrix, with escalating jitter.

    Jitter starts at ``1e-10 * scale`` and grows tenfold up to ``1e-6 * scale``.
    """
    C = kernel.matrix(_grid_points(grid))
    try:
        return linalg.cholesky(C, lower=True)
    except linalg.LinAlgError:
        pass
    jitter = 1e-10 * kernel.scale
    while jitter <= 1e-6 * kernel.scale * (1 + 1e-9):
        try:
            return linalg.cholesky(C + jitter * np.eye(C.shape[0]), lower=True)
        except linalg.LinAlgError:
            jitter *= 10
    raise NumericalFailure("covariance matrix not positive definite even with jitter")


def sample_gp(mean, kernel: GPKernelSpec, grid, count: int, seed=None) -> np.ndarray:
    """``count`` draws of ``mean + L z`` with ``z`` i.i.d. standard normal."""
    if count < 1:
        raise InvalidArgument("count must be >= 1")
    t = _grid_points(grid)
    mean = np.broadcast_to(np.asarray(mean, dtype=float), t.shape)
    L = gp_cholesky(kernel, t)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, t.size))
    return mean[None, :] + z @ L.T


# ---------------------------------------------------------------- Models 1-9

def grid_1_9() -> Grid:
    return Grid.linspace(0.0, 1.0, 30)


def mean_e1(t):
    t = np.asarray(t, dtype=float)
    return 30.0 * t ** 1.5 * (1.0 - t)


def mean_e1_alt(t):
    t = np.asarray(t, dtype=float)
    return 30.0 * t * (1.0 - t) ** 2


# model id -> (mean function, additive shift, noise kernel, noise multiplier)
_MODELS_1_9 = {
    1: (mean_e1, 0.0, E_NOISE, 1.0),
    2: (mean_e1, 0.5, E_NOISE, 1.0),
    3: (mean_e1, 0.75, E_NOISE, 1.0),
    4: (mean_e1, 1.0, E_NOISE, 1.0),
    5: (mean_e1, 0.0, E_NOISE, 2.0),
    6: (mean_e1, 0.0, E_NOISE, 0.25),
    7: (mean_e1, 0.0, H_NOISE, 1.0),
    8: (mean_e1_alt, 0.0, H_NOISE, 1.0),
    9: (mean_e1_alt, 0.0, E_NOISE, 1.0),
}


def model_mean_1_9(model_id: int, t) -> np.ndarray:
    fn, shift, _, _ = _MODELS_1_9[model_id]
    return fn(t) + shift


def gen_model_1_9(model_id: int, count: int, seed=None) -> FunctionalSample:
    if model_id not in _MODELS_1_9:
        raise InvalidArgument(f"model id must be in 1..9, got {model_id}")
    grid = grid_1_9()
    _, _, kernel, mult = _MODELS_1_9[model_id]
    noise = sample_gp(0.0, kernel, grid, count, seed)
    values = model_mean_1_9(model_id, grid.points)[None, :] + mult * noise
    return FunctionalSample(values, grid)


# -------------------------------------------------------------- Models 10-12

def grid_10_12() -> Grid:
    return Grid.linspace(0.0, 1.0, 150)


def kl_rho(k) -> np.ndarray:
    """KL weights: ``1/(k+1)`` for ``k <= 3``, ``1/(k+1)^2`` afterwards."""
    k = np.asarray(k, dtype=float)
    return np.where(k <= 3, 1.0 / (k + 1), 1.0 / (k + 1) ** 2)


def kl_theta(k: int, t) -> np.ndarray:
    """Orthonormal basis of L2[0, 1]: 1, sqrt2 sin(k pi t) (even k),
    sqrt2 cos((k-1) pi t) (odd k >= 3)."""
    t = np.asarray(t, dtype=float)
    if k == 1:
        return np.ones_like(t)
    if k % 2 == 0:
        return np.sqrt(2.0) * np.sin(k * np.pi * t)
    return np.sqrt(2.0) * np.cos((k - 1) * np.pi * t)


def kl_basis(t, terms: int = KL_TERMS) -> np.ndarray:
    """Matrix of shape ``(terms, len(t))`` with ``theta_k`` in row ``k-1``."""
    return np.vstack([kl_theta(k, t) for k in range(1, terms + 1)])


def kl_pointwise_variance(t, terms: int = KL_TERMS) -> np.ndarray:
    theta = kl_basis(t, terms)
    return (kl_rho(np.arange(1, terms + 1))[:, None] * theta ** 2).sum(axis=0)


def model_mean_10_12(model_id: int, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    base = t * (1.0 - t)
    if model_id == 10:
        return base
    ks = np.arange(1, KL_TERMS + 1)
    w = np.sqrt(kl_rho(ks))[:, None] * kl_basis(t)
    if model_id == 11:
        return base + w[:3].sum(axis=0)
    if model_id == 12:
        return base + w[3:].sum(axis=0)
    raise InvalidArgument(f"model id must be in 10..12, got {model_id}")


def gen_model_10_12(model_id: int, count: int, seed=None) -> FunctionalSample:
    if model_id not in (10, 11, 12):
        raise InvalidArgument(f"model id must be in 10..12, got {model_id}")
    grid = grid_10_12()
    t = grid.points
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, KL_TERMS))
    w = np.sqrt(kl_rho(np.arange(1, KL_TERMS + 1)))[:, None] * kl_basis(t)
    values = model_mean_10_12(model_id, t)[None, :] + z @ w
    return FunctionalSample(values, grid)


# -------------------------------------------------------------- Models 13-21

def grid_13_21() -> Grid:
    return Grid.linspace(0.0, np.pi / 3, 100)


def _m13(t): return np.sin(1.3 * t) / 1.3 + t ** 3 + 0.3
def _m14(t): return np.sin(1.3 * t) / 1.2 + t ** 3 + 1.0
def _m15(t): return np.sin(1.3 * t) / 4.0 + t ** 3 + 0.2
def _m16(t): return np.sin(1.5 * np.pi * t) + np.cos(np.pi * t ** 2) + 1.1
def _m17(t): return np.sin(1.7 * np.pi * t) + np.cos(np.pi * t ** 2) + 1.5
def _m18(t): return np.sin(1.9 * np.pi * t) + np.cos(np.pi * t ** 2) + 2.2
def _m19(t): return np.exp(1.1 * t) / 1.8 - t ** 3
def _m20(t): return np.exp(1.4 * t) / 1.7 - t ** 3
def _m21(t): return np.exp(1.5 * t) / 1.5 - t ** 3


# model id -> (deterministic part, random-level variable: 'a' or 'b')
_MODELS_13_21 = {
    13: (_m13, "a"), 14: (_m14, "a"), 15: (_m15, "a"),
    16: (_m16, "b"), 17: (_m17, "b"), 18: (_m18, "b"),
    19: (_m19, "a"), 20: (_m20, "a"), 21: (_m21, "a"),
}

EPS_MEAN, EPS_SD = 2.0, 0.4


def model_shape_13_21(model_id: int, t) -> np.ndarray:
    """Deterministic part of Models 13-21 (without ``a``/``b`` and ``eps``)."""
    if model_id not in _MODELS_13_21:
        raise InvalidArgument(f"model id must be in 13..21, got {model_id}")
    return _MODELS_13_21[model_id][0](np.asarray(t, dtype=float))


EPS_MODES = ("curve", "point")


def draw_levels_13_21(model_id: int, count: int, rng, eps: str = "curve",
                      m: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Random level (``a`` or ``b``, one per curve) and ``eps`` draws.

    ``eps='curve'`` gives one ``eps`` per curve (shape ``(count,)``);
    ``eps='point'`` one per grid point (shape ``(count, m)``).
    """
    if eps not in EPS_MODES:
        raise InvalidArgument(f"eps must be one of {EPS_MODES}, got {eps!r}")
    var = _MODELS_13_21[model_id][1]
    half = 0.25 if var == "a" else 0.5
    level = rng.uniform(-half, half, size=count)
    size = count if eps == "curve" else (count, m)
    return level, rng.normal(EPS_MEAN, EPS_SD, size=size)


def gen_model_13_21(model_id: int, count: int, seed=None, eps: str = "curve") -> FunctionalSample:
    grid = grid_13_21()
    shape = model_shape_13_21(model_id, grid.points)
    level, e = draw_levels_13_21(model_id, count, np.random.default_rng(seed), eps, grid.m)
    if e.ndim == 1:
        e = e[:, None]
    values = shape[None, :] + level[:, None] + e
    return FunctionalSample(values, grid)


def gen_model(model_id: int, count: int, seed=None, eps: str = "curve") -> FunctionalSample:
    """Draw ``count`` curves of a model; ``eps`` only matters for Models 13-21."""
    if 1 <= model_id <= 9:
        return gen_model_1_9(model_id, count, seed)
    if 10 <= model_id <= 12:
        return gen_model_10_12(model_id, count, seed)
    if 13 <= model_id <= 21:
        return gen_model_13_21(model_id, count, seed, eps)
    raise InvalidArgument(f"unknown model id {model_id}")


def model_grid(model_id: int) -> Grid:
    if 1 <= model_id <= 9:
        return grid_1_9()
    if 10 <= model_id <= 12:
        return grid_10_12()
    if 13 <= model_id <= 21:
        return grid_13_21()
    raise InvalidArgument(f"unknown model id {model_id}")


# ----------------------------------------------------------------- Scenarios

@dataclass(frozen=True)
class ScenarioSpec:
    """A named mixture of models, ``per_group`` curves from each.

    ``default_combo`` is the index combination k-means used for its best
    row on this scenario in the published tables; cluster-count selection
    uses it when no combination is given.
    """

    name: str
    models: tuple
    per_group: int = 50
    default_combo: str = "_.EIHI"

    def __post_init__(self):
        grids = {model_grid(m).m for m in self.models}
        if len(grids) != 1:
            raise InvalidArgument(f"models {self.models} do not share a grid")
        if self.per_group < 1:
            raise InvalidArgument("per_group must be positive")

    @property
    def grid(self) -> Grid:
        return model_grid(self.models[0])

    @property
    def k(self) -> int:
        return len(self.models)

    @property
    def n(self) -> int:
        return self.per_group * len(self.models)


# combination of the best k-means row of each scenario's published table
# (exact or 0.001 ties between _.EIHI and _d.MEI resolved to _d.MEI)
_DEFAULT_COMBOS = {
    "S 1-2": "_d.MEI", "S 1-3": "_d.MEI", "S 1-4": "_d.MEI", "S 1-5": "d.EIHI",
    "S 1-6": "d.EIHI", "S 1-7": "dd2.MEI", "S 1-8": "_dd2.MEI", "S 1-9": "_d2.MEI",
    "S 10-11": "dd2.MEI", "S 10-12": "dd2.EIHIMEI", "S 13-14-15": "_dd2.MEI",
    "S 16-17-18": "_d2.MEI", "S 19-20-21": "dd2.MEI",
}


def _catalog():
    specs = [ScenarioSpec(f"S 1-{i}", (1, i)) for i in range(2, 10)]
    specs += [ScenarioSpec("S 10-11", (10, 11)), ScenarioSpec("S 10-12", (10, 12))]
    specs += [ScenarioSpec(f"S {a}-{a + 1}-{a + 2}", (a, a + 1, a + 2)) for a in (13, 16, 19)]
    return {s.name: ScenarioSpec(s.name, s.models, s.per_group, _DEFAULT_COMBOS[s.name])
            for s in specs}


SCENARIOS = _catalog()


def normalize_scenario_name(name: str) -> str:
    """Accept ``'S 1-4'``, ``'S1-4'``, ``'1-4'`` and ``'s_1-4'`` alike."""
    key = name.strip().upper().replace("_", " ")
    key = key[1:].strip() if key.startswith("S") else key
    return f"S {key}"


def get_scenario(name, per_group: int | None = None) -> ScenarioSpec:
    if isinstance(name, ScenarioSpec):
        spec = name
    else:
        try:
            spec = SCENARIOS[normalize_scenario_name(name)]
        except KeyError:
            raise InvalidArgument(
                f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}") from None
    if per_group is not None:
        spec = ScenarioSpec(spec.name, spec.models, per_group, spec.default_combo)
    return spec


def gen_scenario(spec, seed=None, eps: str = "curve") -> FunctionalSample:
    """Stack the groups of a scenario; group ``g`` gets label ``g``.

    Each group draws from its own child of ``SeedSequence(seed)``.
    """
    spec = get_scenario(spec)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    # same children as root.spawn(), without mutating a caller's SeedSequence
    children = [np.random.SeedSequence(root.entropy, spawn_key=root.spawn_key + (g,),
                                       pool_size=root.pool_size)
                for g in range(len(spec.models))]
    blocks, labels = [], []
    for g, (model_id, ss) in enumerate(zip(spec.models, children)):
        blocks.append(gen_model(model_id, spec.per_group, np.random.default_rng(ss), eps).values)
        labels.append(np.full(spec.per_group, g))
    return FunctionalSample(np.vstack(blocks), spec.grid, np.concatenate(labels))
