"""Compact differentiable spectral operator with hand-written reverse mode.

The model predicts the normalized state difference over one macro step:
forward(u) = u + sigma * f_theta((u - mu) / sigma). f_theta lifts the field
pointwise to `channels` channels, applies `num_layers` blocks of
[spectral convolution on the first K rfft modes + pointwise linear + bias,
GELU-like activation], and projects back with a final linear layer that is
zero-initialized, so an untrained model is exactly the identity map.

All parameters live in one flat vector; complex spectral weights are stored
as interleaved (re, im) pairs so the flat vector, its gradient, and Adam's
moment vectors share a single layout. The training path runs in float32 by
default (float64 available; both share this one implementation), with
preallocated workspaces and GEMM-shaped contractions throughout. Gradients
are exact reverse mode; the rfft/irfft adjoints use the half-spectrum weight
vector w = [1, 2, ..., 2, 1]: adjoint(irfft) = (w/n) rfft and
adjoint(rfft) = n irfft(g/w). Along the input-gradient path the two factors
cancel mode-by-mode, so only the spectral weight gradient carries w/n.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import (InvalidArchitecture, NonFiniteLoss, NonFiniteOutput,
                     ShapeMismatch)
from .rng import RandomStream
from .solvers import State

_GELU_ALPHA = 1.702  # x * sigmoid(alpha x), the sigmoid approximation of GELU

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8


@dataclass(frozen=True)
class NormStats:
    """Scalar normalization computed once from the initial dataset."""

    mean: float
    std: float

    def __post_init__(self):
        if not (self.std > 0):
            raise ValueError(f"std must be positive, got {self.std}")


@dataclass(frozen=True)
class Architecture:
    num_points: int
    num_layers: int = 2
    channels: int = 32
    fourier_modes: int = 32
    activation: str = "sigmoid_gelu"

    def __post_init__(self):
        if self.num_layers < 1 or self.channels < 1 or self.fourier_modes < 1:
            raise InvalidArchitecture("layers, channels and modes must be >= 1")
        if self.fourier_modes > self.num_points // 2:
            raise InvalidArchitecture(
                f"fourier_modes {self.fourier_modes} exceeds Nx/2 = {self.num_points // 2}")
        if self.activation != "sigmoid_gelu":
            raise InvalidArchitecture(f"unknown activation {self.activation!r}")


def parameter_count(arch: Architecture) -> int:
    k, c = arch.fourier_modes, arch.channels
    per_layer = 2 * k * c * c + c * c + c
    return arch.num_layers * per_layer + 3 * c + 1


@dataclass(eq=False)
class SurrogateModel:
    parameters: np.ndarray  # flat float64, layout given by _param_views
    architecture: Architecture
    norm: NormStats
    seed_info: str = ""
    train_history: list | None = None

    def __post_init__(self):
        expected = parameter_count(self.architecture)
        if self.parameters.shape != (expected,):
            raise ValueError(
                f"parameter vector has {self.parameters.shape}, expected ({expected},)")


@dataclass(eq=False)
class Committee:
    members: list[SurrogateModel]

    def __post_init__(self):
        if len(self.members) < 1:
            raise ValueError("committee needs at least one member")
        a0 = self.members[0].architecture
        n0 = self.members[0].norm
        for m in self.members[1:]:
            if m.architecture != a0 or m.norm != n0:
                raise ValueError("committee members must share architecture and norm")

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(eq=False)
class TransitionPair:
    input: State
    output: State

    def __post_init__(self):
        if self.input.grid != self.output.grid:
            raise ShapeMismatch("transition pair spans two different grids")


@dataclass(eq=False)
class Dataset:
    pairs: list[TransitionPair]
    norm: NormStats

    def __len__(self):
        return len(self.pairs)

    def input_array(self) -> np.ndarray:
        return np.stack([p.input.values for p in self.pairs])

    def output_array(self) -> np.ndarray:
        return np.stack([p.output.values for p in self.pairs])


def compute_norm_stats(pairs: list[TransitionPair]) -> NormStats:
    """Mean/std over every entry of the stored pairs (inputs and outputs)."""
    stacked = np.concatenate([np.stack([p.input.values for p in pairs]),
                              np.stack([p.output.values for p in pairs])])
    return NormStats(mean=float(stacked.mean()), std=float(stacked.std()))


@dataclass
class TrainConfig:
    epochs: int = 100
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 0
    dtype: str = "float32"  # training arithmetic; parameters persist as float64

    def __post_init__(self):
        if self.epochs < 0 or self.learning_rate <= 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0, learning_rate and batch_size positive")
        if self.dtype not in ("float32", "float64"):
            raise ValueError(f"dtype must be float32 or float64, got {self.dtype}")


# ---------------------------------------------------------------------------
# Parameter layout

def _param_views(theta: np.ndarray, arch: Architecture) -> dict:
    """Views into the flat vector; complex weights view interleaved pairs."""
    k, c, nl = arch.fourier_modes, arch.channels, arch.num_layers
    cplx = np.complex128 if theta.dtype == np.float64 else np.complex64
    spec, pw, bias = [], [], []
    off = 0
    for _ in range(nl):
        n = 2 * k * c * c
        spec.append(theta[off:off + n].view(cplx).reshape(k, c, c)); off += n
        pw.append(theta[off:off + c * c].reshape(c, c)); off += c * c
        bias.append(theta[off:off + c]); off += c
    lift_w = theta[off:off + c]; off += c
    lift_b = theta[off:off + c]; off += c
    proj_w = theta[off:off + c]; off += c
    proj_b = theta[off:off + 1]; off += 1
    assert off == theta.size
    return {"spec": spec, "pw": pw, "bias": bias, "lift_w": lift_w,
            "lift_b": lift_b, "proj_w": proj_w, "proj_b": proj_b}


def init_model(arch: Architecture, norm: NormStats, rng: RandomStream) -> SurrogateModel:
    """Variance-scaled uniform init; final projection zeroed (identity map)."""
    gen = rng.generator
    theta = np.zeros(parameter_count(arch), dtype=np.float64)
    views = _param_views(theta, arch)
    k, c = arch.fourier_modes, arch.channels
    spec_bound = math.sqrt(1.0 / (c * k))
    pw_bound = math.sqrt(1.0 / c)
    for layer in range(arch.num_layers):
        slab = views["spec"][layer].view(np.float64)
        slab[...] = gen.uniform(-spec_bound, spec_bound, slab.shape)
        views["pw"][layer][...] = gen.uniform(-pw_bound, pw_bound, (c, c))
    views["lift_w"][...] = gen.uniform(-1.0, 1.0, c)
    # biases, lift_b, proj_w, proj_b stay zero
    return SurrogateModel(theta, arch, norm, seed_info=repr(rng))


# ---------------------------------------------------------------------------
# Forward/backward engine

class _Workspace:
    """Reusable buffers for one (batch, dtype) shape."""

    _ARRAYS = ("G", "H", "mm", "gh", "tmp", "bcc", "bc1")

    def __init__(self, batch: int, arch: Architecture, dtype):
        c, nx, nl = arch.channels, arch.num_points, arch.num_layers
        nf = nx // 2 + 1
        cplx = np.complex128 if dtype == np.float64 else np.complex64
        shape = (batch, c, nx)
        # G/H tails beyond the first K modes are written once and stay zero.
        self.G = np.zeros((batch, c, nf), cplx)
        self.H = np.zeros((batch, c, nf), cplx)
        self.mm = np.empty(shape, dtype)
        self.gh = np.empty(shape, dtype)
        self.tmp = np.empty(shape, dtype)
        self.bcc = np.empty((batch, c, c), dtype)
        self.bc1 = np.empty((batch, c, 1), dtype)
        self.h = [np.empty(shape, dtype) for _ in range(nl + 1)]
        self.sg = [np.empty(shape, dtype) for _ in range(nl)]
        self.batch = batch

    def view(self, batch: int) -> "_Workspace":
        """Leading-axis slices of every buffer, sharing this allocation."""
        if batch == self.batch:
            return self
        sliced = object.__new__(_Workspace)
        for name in self._ARRAYS:
            setattr(sliced, name, getattr(self, name)[:batch])
        sliced.h = [a[:batch] for a in self.h]
        sliced.sg = [a[:batch] for a in self.sg]
        sliced.batch = batch
        return sliced


class _Engine:
    """dtype-parameterized forward and reverse passes over the flat layout."""

    def __init__(self, arch: Architecture, dtype=np.float32):
        self.arch = arch
        self.dtype = np.dtype(dtype).type
        k, nx = arch.fourier_modes, arch.num_points
        w = np.ones(k)
        w[1:] = 2.0
        if k == nx // 2 + 1:
            w[-1] = 1.0  # Nyquist mode appears once in the half spectrum
        self.wK = (w / nx).astype(dtype)[:, None, None]
        self._local = threading.local()

    def workspace(self, batch: int) -> _Workspace:
        # committee members may train on a thread pool sharing this engine,
        # so scratch buffers must never cross threads. One allocation per
        # thread grows to the largest batch seen and is sliced for smaller
        # ones; pool scoring shrinks the batch by one per pick, and caching
        # per exact size would leak a workspace for every pick.
        full = getattr(self._local, "space", None)
        if full is None or full.batch < batch:
            full = self._local.space = _Workspace(batch, self.arch, self.dtype)
        return full.view(batch)

    def forward(self, views: dict, z: np.ndarray, ws: _Workspace,
                keep_cache: bool) -> tuple[np.ndarray, list | None]:
        arch = self.arch
        k, nx = arch.fourier_modes, arch.num_points
        h = ws.h[0]
        np.multiply(views["lift_w"][:, None], z[:, None, :], out=h)
        h += views["lift_b"][:, None]
        cache = [] if keep_cache else None
        for layer in range(arch.num_layers):
            hf = sfft.rfft(h, axis=-1)
            hkT = np.ascontiguousarray(hf[:, :, :k].transpose(2, 0, 1))
            skT = hkT @ views["spec"][layer]
            ws.G[:, :, :k] = skT.transpose(1, 2, 0)
            pre = sfft.irfft(ws.G, n=nx, axis=-1)
            np.matmul(views["pw"][layer], h, out=ws.mm)
            pre += ws.mm
            pre += views["bias"][layer][:, None]
            sg = ws.sg[layer]
            np.multiply(pre, -_GELU_ALPHA, out=sg)
            np.exp(sg, out=sg)
            sg += 1.0
            np.reciprocal(sg, out=sg)
            if keep_cache:
                cache.append((h, hkT, pre, sg))
            h_next = ws.h[layer + 1]
            np.multiply(pre, sg, out=h_next)
            h = h_next
        out = views["proj_w"] @ h  # (B, Nx)
        out += views["proj_b"]
        return out, cache

    def loss_and_backward(self, views: dict, gviews: dict, z: np.ndarray,
                          target: np.ndarray, ws: _Workspace) -> float:
        """MSE loss over (batch, Nx); writes every gradient view.

        Overflow here surfaces as a non-finite loss that the caller turns
        into NonFiniteLoss, so the transient warnings stay silenced.
        """
        with np.errstate(over="ignore", invalid="ignore"):
            return self._loss_and_backward(views, gviews, z, target, ws)

    def _loss_and_backward(self, views: dict, gviews: dict, z: np.ndarray,
                           target: np.ndarray, ws: _Workspace) -> float:
        arch = self.arch
        k, nx = arch.fourier_modes, arch.num_points
        out, cache = self.forward(views, z, ws, keep_cache=True)
        r = out
        r -= target
        loss = float(np.dot(r.ravel(), r.ravel())) / r.size
        go = r
        go *= self.dtype(2.0 / r.size)
        h_final = ws.h[arch.num_layers]
        np.matmul(h_final, go[:, :, None], out=ws.bc1)
        gviews["proj_w"][...] = ws.bc1[:, :, 0].sum(axis=0)
        gviews["proj_b"][...] = go.sum(dtype=self.dtype)
        gh = ws.gh
        np.multiply(views["proj_w"][:, None], go[:, None, :], out=gh)
        for layer in reversed(range(arch.num_layers)):
            h_in, hkT, pre, sg = cache[layer]
            d = ws.tmp
            np.subtract(self.dtype(1.0), sg, out=d)
            d *= sg
            d *= pre
            d *= self.dtype(_GELU_ALPHA)
            d += sg
            d *= gh
            gpre = d
            gviews["bias"][layer][...] = gpre.sum(axis=(0, 2))
            np.matmul(gpre, h_in.transpose(0, 2, 1), out=ws.bcc)
            gviews["pw"][layer][...] = ws.bcc.sum(axis=0)
            pw_t = np.ascontiguousarray(views["pw"][layer].T)
            np.matmul(pw_t, gpre, out=gh)
            gsf = sfft.rfft(gpre, axis=-1)
            gskT = np.ascontiguousarray(gsf[:, :, :k].transpose(2, 0, 1))
            g_spec = np.conj(hkT).transpose(0, 2, 1) @ gskT
            g_spec *= self.wK
            gviews["spec"][layer][...] = g_spec
            spec_h = np.conj(views["spec"][layer]).transpose(0, 2, 1)
            ghkT = gskT @ spec_h
            ws.H[:, :, :k] = ghkT.transpose(1, 2, 0)
            gh += sfft.irfft(ws.H, n=nx, axis=-1)
        np.matmul(gh, z[:, :, None], out=ws.bc1)
        gviews["lift_w"][...] = ws.bc1[:, :, 0].sum(axis=0)
        gviews["lift_b"][...] = gh.sum(axis=(0, 2))
        return loss


_ENGINES: dict[tuple, _Engine] = {}


def _engine_for(arch: Architecture, dtype) -> _Engine:
    key = (arch, np.dtype(dtype).str)
    eng = _ENGINES.get(key)
    if eng is None:
        eng = _Engine(arch, dtype)
        _ENGINES[key] = eng
    return eng


def _typed_views(model: SurrogateModel, dtype):
    theta = model.parameters
    if np.dtype(dtype) != np.float64:
        theta = theta.astype(dtype)
    return _param_views(theta, model.architecture)


# ---------------------------------------------------------------------------
# Public operations

def forward_values(model: SurrogateModel, u: np.ndarray,
                   dtype=np.float32, check_finite: bool = True) -> np.ndarray:
    """Batched next-state prediction on raw rows (R, Nx) or a single (Nx,).

    check_finite=False lets non-finite values flow through instead of
    raising; rollout scoring uses that to turn a diverged candidate into
    a -inf score rather than an exception.
    """
    arch = model.architecture
    u = np.asarray(u, dtype=np.float64)
    single = u.ndim == 1
    if single:
        u = u[None, :]
    if u.shape[1] != arch.num_points:
        raise ShapeMismatch(f"{u.shape[1]} points vs model's {arch.num_points}")
    mu, sigma = model.norm.mean, model.norm.std
    eng = _engine_for(arch, dtype)
    views = _typed_views(model, dtype)
    with np.errstate(over="ignore", invalid="ignore"):
        z = ((u - mu) / sigma).astype(dtype)
        out, _ = eng.forward(views, z, eng.workspace(z.shape[0]), keep_cache=False)
        result = u + sigma * out.astype(np.float64)
    if check_finite and not np.all(np.isfinite(result)):
        raise NonFiniteOutput("surrogate forward produced non-finite values")
    if single:
        return result[0]
    return result


def forward(model: SurrogateModel, u: State) -> State:
    return State(forward_values(model, u.values), u.grid)


def mean_forward_values(committee: Committee, u: np.ndarray,
                        dtype=np.float32, check_finite: bool = True) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        acc = forward_values(committee.members[0], u, dtype, check_finite)
        for member in committee.members[1:]:
            acc = acc + forward_values(member, u, dtype, check_finite)
        return acc / committee.size


def mean_forward(committee: Committee, u: State) -> State:
    return State(mean_forward_values(committee, u.values), u.grid)


def _batch_arrays(model: SurrogateModel, batch: list[TransitionPair], dtype):
    nx = model.architecture.num_points
    for p in batch:
        if p.input.grid.num_points != nx:
            raise ShapeMismatch("batch pair grid does not match the model")
    mu, sigma = model.norm.mean, model.norm.std
    u_in = np.stack([p.input.values for p in batch])
    u_out = np.stack([p.output.values for p in batch])
    z = ((u_in - mu) / sigma).astype(dtype)
    target = ((u_out - u_in) / sigma).astype(dtype)
    return z, target


def loss_and_gradient(model: SurrogateModel, batch: list[TransitionPair],
                      dtype=np.float64) -> tuple[float, np.ndarray]:
    """Scalar MSE loss on normalized differences and dLoss/dtheta (flat)."""
    if not batch:
        raise ValueError("batch must be non-empty")
    z, target = _batch_arrays(model, batch, dtype)
    eng = _engine_for(model.architecture, dtype)
    views = _typed_views(model, dtype)
    grad = np.zeros(model.parameters.size, dtype=dtype)
    gviews = _param_views(grad, model.architecture)
    loss = eng.loss_and_backward(views, gviews, z, target,
                                 eng.workspace(z.shape[0]))
    return loss, grad.astype(np.float64)


def train(model: SurrogateModel, dataset: Dataset, cfg: TrainConfig,
          *, shuffle_stream: RandomStream | None = None) -> SurrogateModel:
    """Adam over shuffled mini-batches with a cosine learning-rate schedule.

    Returns a new model; the input model is untouched. The schedule anneals
    from cfg.learning_rate at epoch 0 toward zero at cfg.epochs with no
    restarts. Loss history (per-epoch means) is attached to the result.
    """
    if len(dataset) == 0:
        raise ValueError("dataset must be non-empty")
    dtype = np.float32 if cfg.dtype == "float32" else np.float64
    arch = model.architecture
    mu, sigma = model.norm.mean, model.norm.std
    u_in = dataset.input_array()
    u_out = dataset.output_array()
    z_all = ((u_in - mu) / sigma).astype(dtype)
    t_all = ((u_out - u_in) / sigma).astype(dtype)
    n = z_all.shape[0]

    theta = model.parameters.astype(dtype)
    views = _param_views(theta, arch)
    grad = np.zeros_like(theta)
    gviews = _param_views(grad, arch)
    eng = _engine_for(arch, dtype)

    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    step = 0
    stream = shuffle_stream if shuffle_stream is not None else RandomStream(cfg.seed)
    gen = stream.generator
    history: list[float] = []
    denom = np.empty_like(theta)
    update = np.empty_like(theta)

    for epoch in range(cfg.epochs):
        lr = cfg.learning_rate * 0.5 * (1.0 + math.cos(math.pi * epoch / cfg.epochs))
        perm = gen.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            zb = z_all[idx]
            tb = t_all[idx]
            loss = eng.loss_and_backward(views, gviews, zb, tb,
                                         eng.workspace(zb.shape[0]))
            if not math.isfinite(loss):
                raise NonFiniteLoss(
                    f"non-finite loss at epoch {epoch}, batch offset {start}")
            epoch_loss += loss * zb.shape[0]
            step += 1
            # Adam on the flat vectors; views update in place through theta.
            m *= _ADAM_BETA1
            m += (1.0 - _ADAM_BETA1) * grad
            v *= _ADAM_BETA2
            np.multiply(grad, grad, out=update)
            v += (1.0 - _ADAM_BETA2) * update
            bias1 = 1.0 - _ADAM_BETA1 ** step
            bias2 = 1.0 - _ADAM_BETA2 ** step
            np.sqrt(v, out=denom)
            denom /= math.sqrt(bias2)
            denom += _ADAM_EPS
            np.divide(m, denom, out=update)
            update *= dtype(lr / bias1)
            theta -= update
        history.append(epoch_loss / n)

    return SurrogateModel(theta.astype(np.float64), arch, model.norm,
                          seed_info=model.seed_info, train_history=history)


def make_committee(arch: Architecture, norm: NormStats, size: int,
                   rng: RandomStream) -> Committee:
    if size < 2:
        raise ValueError("committee size must be >= 2")
    members = [init_model(arch, norm, rng.child("member", i)) for i in range(size)]
    return Committee(members)


def train_committee(committee: Committee, dataset: Dataset, cfg: TrainConfig,
                    *, threads: int = 1,
                    rng: RandomStream | None = None) -> Committee:
    """Train each member independently with a distinct shuffle stream.

    rng overrides the cfg.seed-derived stream; the round loop passes a
    per-round child so epochs shuffle differently across rounds.
    """
    from .util import ordered_map

    base = rng if rng is not None else RandomStream(cfg.seed)

    def train_one(item):
        idx, member = item
        try:
            return train(member, dataset, cfg,
                         shuffle_stream=base.child("shuffle", idx))
        except NonFiniteLoss as err:
            raise NonFiniteLoss(f"member {idx}: {err}") from err

    members = ordered_map(train_one, list(enumerate(committee.members)), threads)
    return Committee(members)
