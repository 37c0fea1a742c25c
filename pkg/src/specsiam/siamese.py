"""Siamese convolutional network over spectral images.

One base network (two valid convolutions with ReLU, optional 2x2 max pooling,
inverted dropout, then a softmax fully connected head) is shared by both
twins; training minimizes a cosine-distance contrastive loss over same-channel
pairs with L1 kernel regularization, using hand-written reverse-mode gradients
and Adam. Feature vectors live on the probability simplex, so the cosine
distance between twin outputs stays in [0, 1].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import fft as sp_fft

from .classify import LabeledFeatures
from .errors import DataError, NumericalError
from .pairing import PairBatch, batch_iter
from .signals import Dataset, Label
from .spectral import SpectralImage

__all__ = [
    "NetConfig",
    "SiameseModel",
    "init_model",
    "base_forward",
    "cosine_distance",
    "contrastive_loss",
    "batch_loss",
    "gradient",
    "sample_dropout_masks",
    "train",
    "extract_features",
    "pair_accuracy",
    "save_checkpoint",
    "load_checkpoint",
]

KERNEL_SIZES = tuple(range(3, 13))
OUTPUT_DIMS = (2, 4, 6, 8, 10, 12, 14)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class NetConfig:
    """Architecture and training knobs of the base network.

    kernel_size and output_dim are restricted to the architecture grid; the
    remaining rates accept any physical value (their search domains live in
    the tuning search space, which also covers the spectral upper_value).
    """

    kernel_size: int = 5
    conv1_filters: int = 8
    conv2_filters: int = 16
    output_dim: int = 8
    l1_lambda: float = 1e-2
    margin: float = 1.0
    learning_rate: float = 1e-4
    dropout_p: float = 0.5
    epochs: int = 20
    pooling: str = "max2x2"  # "none" | "max2x2"
    distance: str = "cosine"  # "euclidean" exists only for the metric comparison
    seed: int = 0

    def __post_init__(self):
        if self.kernel_size not in KERNEL_SIZES:
            raise DataError(f"kernel_size must be in {KERNEL_SIZES}, got {self.kernel_size}")
        if self.output_dim not in OUTPUT_DIMS:
            raise DataError(f"output_dim must be in {OUTPUT_DIMS}, got {self.output_dim}")
        if self.conv1_filters < 1 or self.conv2_filters < 1:
            raise DataError("filter counts must be >= 1")
        if self.l1_lambda < 0:
            raise DataError("l1_lambda must be non-negative")
        if self.margin <= 0:
            raise DataError("margin must be positive")
        if self.learning_rate < 0:
            raise DataError("learning_rate must be non-negative")
        if not (0.0 <= self.dropout_p < 1.0):
            raise DataError("dropout_p must lie in [0, 1)")
        if self.epochs < 1:
            raise DataError("epochs must be >= 1")
        if self.pooling not in ("none", "max2x2"):
            raise DataError(f"pooling must be 'none' or 'max2x2', got {self.pooling!r}")
        if self.distance not in ("cosine", "euclidean"):
            raise DataError(f"distance must be 'cosine' or 'euclidean', got {self.distance!r}")


@dataclass(frozen=True)
class _ShapePlan:
    conv1_out: tuple[int, int]
    pool1_out: tuple[int, int]
    conv2_out: tuple[int, int]
    pool2_out: tuple[int, int]
    flat_dim: int


def _plan_shapes(config: NetConfig, input_shape: tuple[int, int]) -> _ShapePlan:
    k = config.kernel_size
    pool = config.pooling == "max2x2"

    def conv(h, w):
        return h - k + 1, w - k + 1

    def pooled(h, w):
        return (h // 2, w // 2) if pool else (h, w)

    h, w = input_shape
    c1 = conv(h, w)
    p1 = pooled(*c1)
    c2 = conv(*p1)
    p2 = pooled(*c2)
    for name, (hh, ww) in (("conv1", c1), ("pool1", p1), ("conv2", c2), ("pool2", p2)):
        if hh < 1 or ww < 1:
            raise DataError(
                f"{name} output {hh}x{ww} collapses for {input_shape} input with "
                f"kernel {k} and pooling={config.pooling!r}"
            )
    return _ShapePlan(c1, p1, c2, p2, config.conv2_filters * p2[0] * p2[1])


@dataclass
class SiameseModel:
    """Base-network parameters shared by both twins, plus the dropout rng."""

    config: NetConfig
    input_shape: tuple[int, int]
    conv1_w: np.ndarray  # (C1, 1, k, k)
    conv1_b: np.ndarray  # (C1,)
    conv2_w: np.ndarray  # (C2, C1, k, k)
    conv2_b: np.ndarray  # (C2,)
    fc_w: np.ndarray     # (q, flat_dim)
    fc_b: np.ndarray     # (q,)
    rng: np.random.Generator

    def params(self) -> dict[str, np.ndarray]:
        return {
            "conv1_w": self.conv1_w,
            "conv1_b": self.conv1_b,
            "conv2_w": self.conv2_w,
            "conv2_b": self.conv2_b,
            "fc_w": self.fc_w,
            "fc_b": self.fc_b,
        }

    @property
    def shapes(self) -> _ShapePlan:
        return _plan_shapes(self.config, self.input_shape)


def init_model(config: NetConfig, input_shape: tuple[int, int]) -> SiameseModel:
    """He-initialized convolutions, Glorot fully connected layer, zero biases."""
    plan = _plan_shapes(config, input_shape)
    k = config.kernel_size
    c1, c2, q = config.conv1_filters, config.conv2_filters, config.output_dim
    rng = np.random.default_rng(config.seed)
    conv1_w = rng.normal(0.0, math.sqrt(2.0 / (k * k)), (c1, 1, k, k))
    conv2_w = rng.normal(0.0, math.sqrt(2.0 / (c1 * k * k)), (c2, c1, k, k))
    fc_w = rng.normal(0.0, math.sqrt(2.0 / (plan.flat_dim + q)), (q, plan.flat_dim))
    return SiameseModel(
        config=config,
        input_shape=tuple(input_shape),
        conv1_w=conv1_w,
        conv1_b=np.zeros(c1),
        conv2_w=conv2_w,
        conv2_b=np.zeros(c2),
        fc_w=fc_w,
        fc_b=np.zeros(q),
        rng=rng,
    )


# ---------------------------------------------------------------------------
# layer primitives (batched over axis 0)

# Valid cross-correlation computed in the Fourier domain on planes padded to
# fast composite sizes (ph, pw) >= (H, W). The circular results are then
# alias-free: the first Ho x Wo block of ifft(X * conj(Wf)) is the valid
# correlation, the first k x k block of ifft(X * conj(Df)) is the kernel
# gradient, and the first H x W block of ifft(Df * Wf) is the input gradient
# (the linear full convolution spans exactly Ho + k - 1 = H rows).

def _fft_plane(h: int, wd: int) -> tuple[int, int]:
    return sp_fft.next_fast_len(h), sp_fft.next_fast_len(wd)


def _plane_matmul(a, b):
    """Per-frequency-plane matrix product: (B,M,h,w) x (O,M,h,w) -> (B,O,h,w)."""
    stacked = np.matmul(a.transpose(2, 3, 0, 1), b.transpose(2, 3, 1, 0))
    return stacked.transpose(2, 3, 0, 1)


def _conv_forward(x, w, bias):
    """Returns the conv output plus the cached input spectrum for backward."""
    b, c, h, wd = x.shape
    n_out, _, k, _ = w.shape
    ph, pw = _fft_plane(h, wd)
    xf = sp_fft.rfft2(x, s=(ph, pw), workers=-1)
    wf = sp_fft.rfft2(w, s=(ph, pw), workers=-1)
    yf = _plane_matmul(xf, wf.conj())
    out = sp_fft.irfft2(yf, s=(ph, pw), workers=-1)[:, :, : h - k + 1, : wd - k + 1]
    return out + bias[None, :, None, None], (xf, (h, wd), (ph, pw))


def _conv_dw(fft_cache, dout, k):
    xf, (h, wd), (ph, pw) = fft_cache
    df = sp_fft.rfft2(dout, s=(ph, pw), workers=-1)
    # dwf[o, c] = sum_b conj(df)[b, o] * xf[b, c]: contract over the batch axis
    dwf = _plane_matmul(df.conj().transpose(1, 0, 2, 3), xf.transpose(1, 0, 2, 3))
    return sp_fft.irfft2(dwf, s=(ph, pw), workers=-1)[:, :, :k, :k]


def _conv_dx(dout, w, x_shape):
    _, _, h, wd = x_shape
    ph, pw = _fft_plane(h, wd)
    df = sp_fft.rfft2(dout, s=(ph, pw), workers=-1)
    wf = sp_fft.rfft2(w, s=(ph, pw), workers=-1)
    dxf = _plane_matmul(df, wf.transpose(1, 0, 2, 3))
    return sp_fft.irfft2(dxf, s=(ph, pw), workers=-1)[:, :, :h, :wd]


def _pool_forward(x):
    b, c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    quads = (
        x[:, :, : 2 * h2, : 2 * w2]
        .reshape(b, c, h2, 2, w2, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(b * c * h2 * w2, 4)
    )
    idx = quads.argmax(axis=1)
    rows = np.arange(quads.shape[0])
    out = quads[rows, idx].reshape(b, c, h2, w2)
    return out, (idx, x.shape)


def _pool_backward(dout, cache):
    idx, x_shape = cache
    b, c, h, w = x_shape
    h2, w2 = h // 2, w // 2
    dquads = np.zeros((b * c * h2 * w2, 4))
    dquads[np.arange(dquads.shape[0]), idx] = dout.ravel()
    dx = np.zeros(x_shape)
    dx[:, :, : 2 * h2, : 2 * w2] = (
        dquads.reshape(b, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(b, c, 2 * h2, 2 * w2)
    )
    return dx


def _softmax_rows(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _forward_base(model: SiameseModel, x: np.ndarray, masks):
    """Forward one twin on a (B, H, W) stack; masks is (m1, m2) or None for eval."""
    cfg = model.config
    pool = cfg.pooling == "max2x2"
    keep = 1.0 - cfg.dropout_p
    z1, fft1 = _conv_forward(x[:, None, :, :], model.conv1_w, model.conv1_b)
    r1 = np.maximum(z1, 0.0)
    if pool:
        p1, pc1 = _pool_forward(r1)
    else:
        p1, pc1 = r1, None
    a1 = p1 * masks[0] / keep if masks is not None else p1
    z2, fft2 = _conv_forward(a1, model.conv2_w, model.conv2_b)
    r2 = np.maximum(z2, 0.0)
    if pool:
        p2, pc2 = _pool_forward(r2)
    else:
        p2, pc2 = r2, None
    a2 = p2 * masks[1] / keep if masks is not None else p2
    flat = a2.reshape(a2.shape[0], -1)
    zf = flat @ model.fc_w.T + model.fc_b
    f = _softmax_rows(zf)
    cache = (fft1, z1, pc1, a1.shape, fft2, z2, pc2, flat, f, masks)
    return f, cache


def _backward_base(model: SiameseModel, df: np.ndarray, cache):
    """Gradients of one twin w.r.t. parameters given dLoss/dFeatures."""
    cfg = model.config
    pool = cfg.pooling == "max2x2"
    keep = 1.0 - cfg.dropout_p
    fft1, z1, pc1, a1_shape, fft2, z2, pc2, flat, f, masks = cache
    dzf = f * (df - (f * df).sum(axis=1, keepdims=True))
    g_fc_w = dzf.T @ flat
    g_fc_b = dzf.sum(axis=0)
    da2 = (dzf @ model.fc_w).reshape(z2.shape[0], cfg.conv2_filters, *_out_hw(z2, pool))
    dp2 = da2 * masks[1] / keep if masks is not None else da2
    dr2 = _pool_backward(dp2, pc2) if pool else dp2
    dz2 = dr2 * (z2 > 0)
    g2w = _conv_dw(fft2, dz2, cfg.kernel_size)
    g2b = dz2.sum(axis=(0, 2, 3))
    da1 = _conv_dx(dz2, model.conv2_w, a1_shape)
    dp1 = da1 * masks[0] / keep if masks is not None else da1
    dr1 = _pool_backward(dp1, pc1) if pool else dp1
    dz1 = dr1 * (z1 > 0)
    g1w = _conv_dw(fft1, dz1, cfg.kernel_size)
    g1b = dz1.sum(axis=(0, 2, 3))
    return {
        "conv1_w": g1w,
        "conv1_b": g1b,
        "conv2_w": g2w,
        "conv2_b": g2b,
        "fc_w": g_fc_w,
        "fc_b": g_fc_b,
    }


def _out_hw(z, pool):
    h, w = z.shape[2], z.shape[3]
    return (h // 2, w // 2) if pool else (h, w)


# ---------------------------------------------------------------------------
# distance and loss

def cosine_distance(f1, f2) -> float:
    """1 minus cosine similarity; in [0, 1] for simplex vectors."""
    f1 = np.asarray(f1, dtype=np.float64)
    f2 = np.asarray(f2, dtype=np.float64)
    n1 = np.linalg.norm(f1)
    n2 = np.linalg.norm(f2)
    if n1 == 0.0 or n2 == 0.0:
        raise DataError("cosine distance undefined for a zero vector")
    return float(1.0 - float(f1 @ f2) / (n1 * n2))


def contrastive_loss(y: int, d: float, m: float) -> float:
    """Neighbor pairs pay d^2; non-neighbors pay max(0, m - d)^2."""
    if y == 1:
        return float(d * d)
    gap = max(0.0, m - d)
    return float(gap * gap)


def _pair_distances(fa, fb, metric: str = "cosine"):
    if metric == "euclidean":
        d = np.linalg.norm(fa - fb, axis=1)
        return d, None
    na = np.linalg.norm(fa, axis=1)
    nb = np.linalg.norm(fb, axis=1)
    if np.any(na == 0.0) or np.any(nb == 0.0):
        raise DataError("cosine distance undefined for a zero vector")
    cos = (fa * fb).sum(axis=1) / (na * nb)
    return 1.0 - cos, (na, nb, cos)


def _image_array(obj) -> np.ndarray:
    if isinstance(obj, SpectralImage):
        return obj.magnitudes
    return np.asarray(obj, dtype=np.float64)


def _batch_arrays(batch: PairBatch, images):
    try:
        xa = np.stack([_image_array(images[(p.subject_a, p.channel_index)]) for p in batch.pairs])
        xb = np.stack([_image_array(images[(p.subject_b, p.channel_index)]) for p in batch.pairs])
    except KeyError as exc:
        raise DataError(f"missing spectral image for pair member {exc.args[0]}") from exc
    y = np.array([p.y for p in batch.pairs], dtype=np.float64)
    return xa, xb, y


def _l1_penalty(model: SiameseModel) -> float:
    lam = model.config.l1_lambda
    if lam == 0.0:
        return 0.0
    return lam * (
        np.abs(model.conv1_w).sum() + np.abs(model.conv2_w).sum() + np.abs(model.fc_w).sum()
    )


def _loss_and_grads(model: SiameseModel, xa, xb, y, masks):
    cfg = model.config
    masks_a, masks_b = (masks["a"], masks["b"]) if masks is not None else (None, None)
    fa, cache_a = _forward_base(model, xa, masks_a)
    fb, cache_b = _forward_base(model, xb, masks_b)
    d, _ = _pair_distances(fa, fb, cfg.distance)
    gap = np.maximum(0.0, cfg.margin - d)
    losses = y * d * d + (1.0 - y) * gap * gap
    loss = float(losses.mean()) + _l1_penalty(model)

    n = d.size
    dd = (2.0 * y * d - 2.0 * (1.0 - y) * gap) / n
    if cfg.distance == "euclidean":
        safe = np.where(d > 0.0, d, 1.0)
        unit = np.where(d[:, None] > 0.0, (fa - fb) / safe[:, None], 0.0)
        dfa = dd[:, None] * unit
        dfb = -dfa
    else:
        na = np.linalg.norm(fa, axis=1)
        nb = np.linalg.norm(fb, axis=1)
        cos = 1.0 - d
        dfa = dd[:, None] * (cos[:, None] * fa / (na * na)[:, None] - fb / (na * nb)[:, None])
        dfb = dd[:, None] * (cos[:, None] * fb / (nb * nb)[:, None] - fa / (na * nb)[:, None])
    grads_a = _backward_base(model, dfa, cache_a)
    grads_b = _backward_base(model, dfb, cache_b)
    grads = {k: grads_a[k] + grads_b[k] for k in grads_a}
    lam = cfg.l1_lambda
    if lam != 0.0:
        for name in ("conv1_w", "conv2_w", "fc_w"):
            grads[name] = grads[name] + lam * np.sign(model.params()[name])
    return loss, grads


def sample_dropout_masks(model: SiameseModel, n_pairs: int) -> dict:
    """Draw one set of twin dropout masks from the model rng (shapes per plan)."""
    plan = model.shapes
    cfg = model.config
    p = cfg.dropout_p
    shapes = (
        (n_pairs, cfg.conv1_filters, *plan.pool1_out),
        (n_pairs, cfg.conv2_filters, *plan.pool2_out),
    )

    def draw():
        return tuple(model.rng.random(s) >= p for s in shapes)

    return {"a": draw(), "b": draw()}


def base_forward(model: SiameseModel, image, train_mode: bool = False) -> np.ndarray:
    """Feature vector of one image; softmax output on the simplex.

    Eval mode is deterministic; train mode draws dropout masks from the model
    rng.
    """
    x = _image_array(image)
    if x.shape != tuple(model.input_shape):
        raise DataError(f"image shape {x.shape} does not match model input {model.input_shape}")
    masks = None
    if train_mode and model.config.dropout_p > 0.0:
        m = sample_dropout_masks(model, 1)
        masks = m["a"]
    f, _ = _forward_base(model, x[None], masks)
    if not np.isfinite(f).all():
        raise NumericalError("non-finite activation in forward pass")
    return f[0]


def batch_loss(model: SiameseModel, batch: PairBatch, images, masks=None) -> float:
    """Mean contrastive loss over the batch plus the L1 kernel penalty."""
    xa, xb, y = _batch_arrays(batch, images)
    loss, _ = _loss_and_grads(model, xa, xb, y, masks)
    return loss


def gradient(model: SiameseModel, batch: PairBatch, images, masks=None) -> dict[str, np.ndarray]:
    """Analytic gradients of batch_loss for every parameter tensor.

    Pass pinned masks (from sample_dropout_masks) to differentiate the
    train-mode loss; None differentiates the deterministic eval-mode loss.
    """
    xa, xb, y = _batch_arrays(batch, images)
    _, grads = _loss_and_grads(model, xa, xb, y, masks)
    return grads


# ---------------------------------------------------------------------------
# training

def train(model: SiameseModel, pairs, images, subject_pairs_per_batch: int = 16):
    """Adam training over channel-grouped batches; returns (model, epoch losses).

    The model is updated in place. Batch shuffling and dropout masks derive
    from config.seed and the model rng, so identical seeds reproduce identical
    parameters. Raises NumericalError naming the epoch and batch if the loss
    leaves the finite range.
    """
    if not pairs:
        raise DataError("cannot train on an empty pair list")
    cfg = model.config
    n_channels = _infer_channel_count(pairs)
    adam_m = {k: np.zeros_like(v) for k, v in model.params().items()}
    adam_v = {k: np.zeros_like(v) for k, v in model.params().items()}
    step = 0
    trace = []
    use_dropout = cfg.dropout_p > 0.0
    for epoch in range(cfg.epochs):
        shuffle_seed = np.random.SeedSequence([cfg.seed, epoch]).generate_state(1)[0]
        total_loss = 0.0
        total_pairs = 0
        for batch_index, batch in enumerate(
            batch_iter(pairs, n_channels, subject_pairs_per_batch, shuffle_seed)
        ):
            xa, xb, y = _batch_arrays(batch, images)
            masks = sample_dropout_masks(model, batch.n_pairs) if use_dropout else None
            loss, grads = _loss_and_grads(model, xa, xb, y, masks)
            if not math.isfinite(loss):
                raise NumericalError(
                    f"non-finite loss at epoch {epoch}, batch {batch_index}"
                )
            step += 1
            params = model.params()
            for name, g in grads.items():
                adam_m[name] = ADAM_BETA1 * adam_m[name] + (1.0 - ADAM_BETA1) * g
                adam_v[name] = ADAM_BETA2 * adam_v[name] + (1.0 - ADAM_BETA2) * g * g
                m_hat = adam_m[name] / (1.0 - ADAM_BETA1**step)
                v_hat = adam_v[name] / (1.0 - ADAM_BETA2**step)
                params[name] -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
            total_loss += loss * batch.n_pairs
            total_pairs += batch.n_pairs
        trace.append(total_loss / total_pairs)
    return model, trace


def _infer_channel_count(pairs) -> int:
    first = (pairs[0].subject_a, pairs[0].subject_b)
    return sum(1 for p in pairs if (p.subject_a, p.subject_b) == first)


def extract_features(model: SiameseModel, dataset: Dataset, images) -> LabeledFeatures:
    """Eval-mode feature vectors for every (subject, channel) instance."""
    subject_ids = []
    channels = []
    rows = []
    labels = []
    for rec in dataset.recordings:
        stack = np.stack(
            [_image_array(images[(rec.subject_id, ch)]) for ch in range(dataset.n_channels)]
        )
        f, _ = _forward_base(model, stack, None)
        if not np.isfinite(f).all():
            raise NumericalError(f"non-finite features for subject '{rec.subject_id}'")
        for ch in range(dataset.n_channels):
            subject_ids.append(rec.subject_id)
            channels.append(ch)
            rows.append(f[ch])
            labels.append(1 if rec.label is Label.CASE else 0)
    return LabeledFeatures(
        subject_ids=tuple(subject_ids),
        channels=tuple(channels),
        x=np.array(rows),
        y=np.array(labels, dtype=np.int64),
    )


def pair_accuracy(model: SiameseModel, pairs, images, tau: float = 0.5) -> float:
    """Fraction of pairs where thresholded distance agrees with the neighbor label."""
    if not (0.0 < tau < 1.0):
        raise DataError("tau must lie in (0, 1)")
    pairs = list(pairs)
    if not pairs:
        raise DataError("pair_accuracy of an empty pair set")
    correct = 0
    chunk = 512  # images are stacked one chunk at a time to bound memory
    for lo in range(0, len(pairs), chunk):
        part = PairBatch(tuple(pairs[lo : lo + chunk]), n_channels=1)
        xa, xb, y = _batch_arrays(part, images)
        fa, _ = _forward_base(model, xa, None)
        fb, _ = _forward_base(model, xb, None)
        d, _ = _pair_distances(fa, fb, model.config.distance)
        correct += int(((d < tau) == (y == 1)).sum())
    return correct / len(pairs)


# ---------------------------------------------------------------------------
# checkpoints

CHECKPOINT_FORMAT = "specsiam-siamese"
CHECKPOINT_VERSION = 1


def save_checkpoint(model: SiameseModel, path: str | Path) -> None:
    """Versioned JSON checkpoint: config, parameters, and the dropout rng state."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": {
            "kernel_size": model.config.kernel_size,
            "conv1_filters": model.config.conv1_filters,
            "conv2_filters": model.config.conv2_filters,
            "output_dim": model.config.output_dim,
            "l1_lambda": model.config.l1_lambda,
            "margin": model.config.margin,
            "learning_rate": model.config.learning_rate,
            "dropout_p": model.config.dropout_p,
            "epochs": model.config.epochs,
            "pooling": model.config.pooling,
            "distance": model.config.distance,
            "seed": model.config.seed,
        },
        "input_shape": list(model.input_shape),
        "params": {name: arr.tolist() for name, arr in model.params().items()},
        "rng_state": model.rng.bit_generator.state,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def load_checkpoint(path: str | Path) -> SiameseModel:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"checkpoint not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"checkpoint {path} is not valid JSON: {exc}") from exc
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise DataError(f"{path} is not a siamese checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise DataError(f"unsupported checkpoint version {payload.get('version')}")
    config = NetConfig(**payload["config"])
    params = {name: np.asarray(v, dtype=np.float64) for name, v in payload["params"].items()}
    rng = np.random.default_rng()
    rng.bit_generator.state = payload["rng_state"]
    model = SiameseModel(
        config=config,
        input_shape=tuple(payload["input_shape"]),
        conv1_w=params["conv1_w"],
        conv1_b=params["conv1_b"],
        conv2_w=params["conv2_w"],
        conv2_b=params["conv2_b"],
        fc_w=params["fc_w"],
        fc_b=params["fc_b"],
        rng=rng,
    )
    expected = _plan_shapes(config, model.input_shape)
    if model.fc_w.shape != (config.output_dim, expected.flat_dim):
        raise DataError("checkpoint parameter shapes disagree with its config")
    return model
