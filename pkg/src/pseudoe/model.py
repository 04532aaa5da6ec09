"""Model parameters and score functions.

The score of a triple (i, k, j) is

    phi = logit(F_beta[(f_k . tau_k)(p_i), (g_k . tau_k)(p_j)]) + b_i + b_j + c_k,

where F_beta is the beta-interpolated triple Fermi-Dirac likelihood, f_k the
head translation, g_k the tail scaling and tau_k the time projection.  The
internal `_forward` kernel evaluates batches of triples with numpy and caches
every intermediate the backward pass needs; the scalar `score` path and the
step-by-step composition of the primitive ops must agree with it.

Also here: parameter initialization, node-bias scaling for degree debiasing,
DistMult/TransE reference scorers and the binary checkpoint format.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .geometry import GeometryConfig, Signature
from .likelihood import TfdParams, log1mexp, sigmoid, softplus
from .relmaps import Variant, warn_if_time_not_shared

__all__ = [
    "InitConfig",
    "ModelParams",
    "init",
    "score",
    "score_many",
    "score_tails",
    "probability",
    "scale_node_bias",
    "score_distmult",
    "score_transe",
    "save_checkpoint",
    "load_checkpoint",
    "CHECKPOINT_MAGIC",
]

CHECKPOINT_MAGIC = b"PSEUDOE1"

_VARIANT_CODES = {Variant.MT: 0, Variant.DT: 1, Variant.BOTH: 2}
_VARIANT_FROM_CODE = {v: k for k, v in _VARIANT_CODES.items()}
_SWAP_BIT = 1 << 3


@dataclass(frozen=True)
class InitConfig:
    """Initialization scale and seed."""

    sigma_init: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.sigma_init > 0:
            raise ValueError(f"sigma_init must be positive, got {self.sigma_init}")


@dataclass
class ModelParams:
    """All trainable state plus the fixed geometry/likelihood configuration.

    coords holds one row per entity, time coordinates first (n_t columns)
    then space (n_x).  Relation tables are row-per-relation: rel_u and rel_r
    over the projected 1 + n_x coordinates, rel_h over the n_t time
    coordinates.  Depending on the variant some relation tables are frozen
    at their identity values (MT: rel_u = 0, rel_r = 1; DT: rel_h = 1) and
    never receive gradient.
    """

    coords: np.ndarray
    node_bias: np.ndarray
    rel_u: np.ndarray
    rel_r: np.ndarray
    rel_h: np.ndarray
    rel_c: np.ndarray
    tfd: TfdParams
    geometry: GeometryConfig
    variant: Variant
    swap_transforms: bool = False

    @property
    def n_entities(self) -> int:
        return self.coords.shape[0]

    @property
    def n_relations(self) -> int:
        return self.rel_c.shape[0]

    @property
    def n_t(self) -> int:
        return self.geometry.signature.n_t

    @property
    def n_x(self) -> int:
        return self.geometry.signature.n_x

    def validate(self) -> None:
        sig = self.geometry.signature
        n, n_r = self.n_entities, self.n_relations
        expect = {
            "coords": (n, sig.dim),
            "node_bias": (n,),
            "rel_u": (n_r, 1 + sig.n_x),
            "rel_r": (n_r, 1 + sig.n_x),
            "rel_h": (n_r, sig.n_t),
            "rel_c": (n_r,),
        }
        for name, shape in expect.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
        if self.variant is Variant.DT:
            if sig.n_t != 1:
                raise ValueError("DT variant requires n_t == 1")
            if not np.all(self.rel_h == 1.0):
                raise ValueError("DT variant requires rel_h frozen at 1")
        if self.variant is Variant.MT:
            if not (np.all(self.rel_u == 0.0) and np.all(self.rel_r == 1.0)):
                raise ValueError("MT variant requires rel_u frozen at 0 and rel_r at 1")

    def copy(self) -> "ModelParams":
        """Deep copy of all parameter arrays (configuration is shared, it is immutable)."""
        return replace(
            self,
            coords=self.coords.copy(),
            node_bias=self.node_bias.copy(),
            rel_u=self.rel_u.copy(),
            rel_r=self.rel_r.copy(),
            rel_h=self.rel_h.copy(),
            rel_c=self.rel_c.copy(),
        )


def init(
    n_entities: int,
    n_relations: int,
    geometry: GeometryConfig,
    variant: Variant,
    init_cfg: InitConfig,
    tfd: TfdParams | None = None,
    swap_transforms: bool = False,
) -> ModelParams:
    """Draw fresh parameters: coordinates and translations N(0, sigma^2),
    projections N(0, 1/n_t), scalings exactly 1, biases 0.

    Frozen tables (per variant) start at their identity values instead of
    being sampled.  Deterministic given the seed.
    """
    sig = geometry.signature
    if variant is Variant.DT and sig.n_t != 1:
        raise ValueError("DT variant requires n_t == 1")
    if variant in (Variant.MT, Variant.BOTH):
        warn_if_time_not_shared(sig.n_t, n_relations)
    rng = np.random.default_rng(init_cfg.seed)
    sigma = init_cfg.sigma_init
    coords = rng.normal(0.0, sigma, size=(n_entities, sig.dim))
    if variant is Variant.MT:
        rel_u = np.zeros((n_relations, 1 + sig.n_x))
    else:
        rel_u = rng.normal(0.0, sigma, size=(n_relations, 1 + sig.n_x))
    rel_r = np.ones((n_relations, 1 + sig.n_x))
    if variant is Variant.DT:
        rel_h = np.ones((n_relations, 1))
    else:
        rel_h = rng.normal(0.0, np.sqrt(1.0 / sig.n_t), size=(n_relations, sig.n_t))
    params = ModelParams(
        coords=coords,
        node_bias=np.zeros(n_entities),
        rel_u=rel_u,
        rel_r=rel_r,
        rel_h=rel_h,
        rel_c=np.zeros(n_relations),
        tfd=tfd if tfd is not None else TfdParams(tau1=1.0, tau2=1.0, u=0.0, alpha=0.5, alpha_prime=1.0),
        geometry=geometry,
        variant=variant,
        swap_transforms=swap_transforms,
    )
    params.validate()
    return params


class ForwardCache(NamedTuple):
    """Intermediates of a batched forward pass, consumed by the backward pass."""

    heads: np.ndarray
    rels: np.ndarray
    tails: np.ndarray
    t_head_proj: np.ndarray  # h_k . t_i, per row
    t_tail_proj: np.ndarray  # h_k . t_j, per row
    dt: np.ndarray  # wrapped time displacement
    dx: np.ndarray  # space displacement, (B, n_x)
    sig1: np.ndarray  # sigmoid of the F1 exponent
    sig2: np.ndarray
    sig3: np.ndarray
    sigw: np.ndarray  # sigmoid of the Wick-factor exponent
    log_p: np.ndarray  # interpolated log-likelihood, < 0
    dphi_dlogp: np.ndarray  # 1 / (1 - p)
    phi: np.ndarray  # full score


def _forward(params: ModelParams, heads, rels, tails) -> ForwardCache:
    """Vectorized score of triples (heads[b], rels[b], tails[b])."""
    heads = np.asarray(heads, dtype=np.intp)
    rels = np.asarray(rels, dtype=np.intp)
    tails = np.asarray(tails, dtype=np.intp)
    n_t = params.n_t
    tfd = params.tfd

    t_h = params.coords[heads, :n_t]
    x_h = params.coords[heads, n_t:]
    t_t = params.coords[tails, :n_t]
    x_t = params.coords[tails, n_t:]
    h = params.rel_h[rels]
    u = params.rel_u[rels]
    r = params.rel_r[rels]

    t_head_proj = np.einsum("bi,bi->b", h, t_h)
    t_tail_proj = np.einsum("bi,bi->b", h, t_t)
    if params.swap_transforms:
        dt = r[:, 0] * t_head_proj - (t_tail_proj + u[:, 0])
        dx = r[:, 1:] * x_h - (x_t + u[:, 1:])
    else:
        dt = (t_head_proj + u[:, 0]) - r[:, 0] * t_tail_proj
        dx = (x_h + u[:, 1:]) - r[:, 1:] * x_t
    c = params.geometry.cylinder_circumference
    if c is not None:
        dt = dt - c * np.floor(dt / c + 0.5)

    dx2 = np.einsum("bi,bi->b", dx, dx)
    s2 = -dt * dt + dx2
    s2w = dt * dt + dx2

    z1 = (s2 - tfd.u) / tfd.tau1
    z2 = -tfd.alpha * dt / tfd.tau2
    z3 = tfd.alpha_prime * dt / tfd.tau2
    zw = (s2w - tfd.u) / tfd.tau1
    log_f = np.log(tfd.k_scale) - (softplus(z1) + softplus(z2) + softplus(z3)) / 3.0
    log_fw = -softplus(zw)
    log_p = (1.0 - tfd.beta) * log_f + tfd.beta * log_fw

    phi = (
        log_p
        - log1mexp(log_p)
        + params.node_bias[heads]
        + params.node_bias[tails]
        + params.rel_c[rels]
    )
    return ForwardCache(
        heads=heads,
        rels=rels,
        tails=tails,
        t_head_proj=t_head_proj,
        t_tail_proj=t_tail_proj,
        dt=dt,
        dx=dx,
        sig1=sigmoid(z1),
        sig2=sigmoid(z2),
        sig3=sigmoid(z3),
        sigw=sigmoid(zw),
        log_p=log_p,
        dphi_dlogp=1.0 / (-np.expm1(log_p)),
        phi=phi,
    )


def score_many(params: ModelParams, heads, rels, tails) -> np.ndarray:
    """Scores for parallel arrays of head, relation and tail ids."""
    return _forward(params, heads, rels, tails).phi


def score(params: ModelParams, head: int, rel: int, tail: int) -> float:
    """Score of a single triple."""
    _check_ids(params, head, rel, tail)
    return float(score_many(params, [head], [rel], [tail])[0])


def score_tails(params: ModelParams, head: int, rel: int, tails) -> np.ndarray:
    """Scores of (head, rel, t) for every candidate tail id in ``tails``."""
    tails = np.asarray(tails, dtype=np.intp)
    heads = np.full(tails.shape, head, dtype=np.intp)
    rels = np.full(tails.shape, rel, dtype=np.intp)
    return score_many(params, heads, rels, tails)


def probability(params: ModelParams, head: int, rel: int, tail: int) -> float:
    """Edge probability sigmoid(score), strictly inside (0, 1)."""
    return float(sigmoid(score(params, head, rel, tail)))


def _check_ids(params: ModelParams, head: int, rel: int, tail: int) -> None:
    n, n_r = params.n_entities, params.n_relations
    if not (0 <= head < n and 0 <= tail < n):
        raise IndexError(f"entity id out of range [0, {n}): head={head}, tail={tail}")
    if not 0 <= rel < n_r:
        raise IndexError(f"relation id out of range [0, {n_r}): {rel}")


def scale_node_bias(params: ModelParams, gamma_b: float) -> ModelParams:
    """Return a copy of the model with every node bias multiplied by gamma_b.

    Test-time knob: positive gamma_b beyond 1 favours well-connected nodes,
    negative values push predictions toward poorly-connected ones.  All other
    parameters are untouched and the input model is not modified.
    """
    return replace(params, node_bias=params.node_bias * float(gamma_b))


def score_distmult(x_i, x_r, x_j) -> float:
    """DistMult score: sum_a (x_i)_a (x_r)_a (x_j)_a."""
    x_i, x_r, x_j = (np.asarray(v, dtype=np.float64) for v in (x_i, x_r, x_j))
    if not x_i.shape == x_r.shape == x_j.shape:
        raise ValueError("DistMult requires equal-length vectors")
    return float(np.sum(x_i * x_r * x_j))


def score_transe(x_i, x_r, x_j) -> float:
    """TransE distance |x_i + x_r - x_j|; smaller is better, so rank by its negation."""
    x_i, x_r, x_j = (np.asarray(v, dtype=np.float64) for v in (x_i, x_r, x_j))
    if not x_i.shape == x_r.shape == x_j.shape:
        raise ValueError("TransE requires equal-length vectors")
    return float(np.linalg.norm(x_i + x_r - x_j))


# --- checkpoint format -----------------------------------------------------
#
# Little-endian throughout.  Header: magic "PSEUDOE1", then n_t, n_x, N, n_r
# and the variant tag as uint64 (bit 3 of the tag records swap_transforms),
# then the likelihood parameters (tau1, tau2, u, alpha, alpha_prime, k, beta)
# and the cylinder flag/circumference as float64.  Body: coords row-major,
# node biases, then per relation u_vec, r_diag, h_vec, c_bias.


def save_checkpoint(params: ModelParams, path) -> None:
    """Write the model to ``path``; loading it back is bit-exact."""
    tfd, geo = params.tfd, params.geometry
    tag = _VARIANT_CODES[params.variant] | (_SWAP_BIT if params.swap_transforms else 0)
    c = geo.cylinder_circumference
    header = struct.pack(
        "<8s5Q9d",
        CHECKPOINT_MAGIC,
        geo.signature.n_t,
        geo.signature.n_x,
        params.n_entities,
        params.n_relations,
        tag,
        tfd.tau1,
        tfd.tau2,
        tfd.u,
        tfd.alpha,
        tfd.alpha_prime,
        tfd.k_scale,
        tfd.beta,
        0.0 if c is None else 1.0,
        0.0 if c is None else c,
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(params.coords, dtype="<f8").tobytes())
        f.write(np.ascontiguousarray(params.node_bias, dtype="<f8").tobytes())
        for k in range(params.n_relations):
            f.write(np.ascontiguousarray(params.rel_u[k], dtype="<f8").tobytes())
            f.write(np.ascontiguousarray(params.rel_r[k], dtype="<f8").tobytes())
            f.write(np.ascontiguousarray(params.rel_h[k], dtype="<f8").tobytes())
            f.write(struct.pack("<d", float(params.rel_c[k])))


def load_checkpoint(path) -> ModelParams:
    """Read a model written by :func:`save_checkpoint`."""
    with open(path, "rb") as f:
        blob = f.read()
    head_size = struct.calcsize("<8s5Q9d")
    if len(blob) < head_size or blob[:8] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a model checkpoint (bad magic)")
    (_, n_t, n_x, n, n_r, tag, tau1, tau2, u, alpha, alpha_prime, k_scale, beta, has_c, c) = struct.unpack(
        "<8s5Q9d", blob[:head_size]
    )
    variant = _VARIANT_FROM_CODE.get(tag & ~_SWAP_BIT)
    if variant is None:
        raise ValueError(f"{path}: unknown variant tag {tag}")
    geometry = GeometryConfig(Signature(n_t, n_x), c if has_c else None)
    tfd = TfdParams(tau1=tau1, tau2=tau2, u=u, alpha=alpha, alpha_prime=alpha_prime, beta=beta, k_scale=k_scale)

    body = np.frombuffer(blob[head_size:], dtype="<f8")
    dim = n_t + n_x
    per_rel = 2 * (1 + n_x) + n_t + 1
    expected = n * dim + n + n_r * per_rel
    if body.size != expected:
        raise ValueError(f"{path}: body holds {body.size} values, expected {expected}")
    pos = 0

    def take(count, shape):
        nonlocal pos
        out = body[pos : pos + count].reshape(shape).copy()
        pos += count
        return out

    coords = take(n * dim, (n, dim))
    node_bias = take(n, (n,))
    rel_u = np.empty((n_r, 1 + n_x))
    rel_r = np.empty((n_r, 1 + n_x))
    rel_h = np.empty((n_r, n_t))
    rel_c = np.empty(n_r)
    for k in range(n_r):
        rel_u[k] = take(1 + n_x, (1 + n_x,))
        rel_r[k] = take(1 + n_x, (1 + n_x,))
        rel_h[k] = take(n_t, (n_t,))
        rel_c[k] = take(1, (1,))[0]
    params = ModelParams(
        coords=coords,
        node_bias=node_bias,
        rel_u=rel_u,
        rel_r=rel_r,
        rel_h=rel_h,
        rel_c=rel_c,
        tfd=tfd,
        geometry=geometry,
        variant=variant,
        swap_transforms=bool(tag & _SWAP_BIT),
    )
    params.validate()
    return params
