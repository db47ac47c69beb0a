"""Multimodal alignment losses on a tiny differentiable encoder/decoder pair.

The encoder is an affine map plus tanh (optionally unit-normalized); the
decoder is a one-step-conditioned autoregressive softmax over a toy
vocabulary. Three losses are composed:

* a cosine loss pulling event embeddings onto image embeddings,
* a token negative log-likelihood conditioned on pooled event embeddings,
* the same NLL conditioned on the event/image average acting as a prior,

with total = 0.5 * lambda1 * (nll_event + nll_prior) + lambda2 * cosine.

All math runs in float64 and every gradient here is derived by hand; the
central-difference checker below is the referee.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DimensionError, EvcapError
from .events import RgbFrame

# Reserved begin-of-sequence token consumed at the first decode step.
BEGIN_TOKEN = 0

Embedding = np.ndarray  # 1-d float64 vector


@dataclass(frozen=True)
class ToyEncoderParams:
    """Affine-plus-tanh frame encoder; optionally projects onto the unit sphere."""

    projection: np.ndarray  # (dim, input_size)
    bias: np.ndarray  # (dim,)
    normalize: bool = True

    def __post_init__(self) -> None:
        proj = np.asarray(self.projection, dtype=np.float64)
        bias = np.asarray(self.bias, dtype=np.float64)
        if proj.ndim != 2 or bias.ndim != 1 or proj.shape[0] != bias.shape[0]:
            raise DimensionError(
                f"projection {proj.shape} and bias {bias.shape} are inconsistent"
            )
        if not (np.isfinite(proj).all() and np.isfinite(bias).all()):
            raise EvcapError("encoder parameters must be finite")
        object.__setattr__(self, "projection", proj)
        object.__setattr__(self, "bias", bias)

    @property
    def dim(self) -> int:
        return self.projection.shape[0]

    @property
    def input_size(self) -> int:
        return self.projection.shape[1]


@dataclass(frozen=True)
class ToyDecoderParams:
    """Softmax decoder: logits = output @ concat(conditioning, prev token embedding)."""

    token_embed: np.ndarray  # (vocab, dim)
    output: np.ndarray  # (vocab, 2 * dim)

    def __post_init__(self) -> None:
        emb = np.asarray(self.token_embed, dtype=np.float64)
        out = np.asarray(self.output, dtype=np.float64)
        if emb.ndim != 2 or out.ndim != 2:
            raise DimensionError("decoder matrices must be 2-d")
        if out.shape != (emb.shape[0], 2 * emb.shape[1]):
            raise DimensionError(
                f"output must be (vocab, 2*dim) = ({emb.shape[0]}, {2 * emb.shape[1]}), "
                f"got {out.shape}"
            )
        if not (np.isfinite(emb).all() and np.isfinite(out).all()):
            raise EvcapError("decoder parameters must be finite")
        object.__setattr__(self, "token_embed", emb)
        object.__setattr__(self, "output", out)

    @property
    def vocab_size(self) -> int:
        return self.token_embed.shape[0]

    @property
    def dim(self) -> int:
        return self.token_embed.shape[1]


@dataclass(frozen=True)
class TokenSeq:
    """An instruction prefix plus the answer tokens scored by the decoder."""

    instruction: tuple[int, ...]
    answer: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.answer) < 1:
            raise DimensionError("answer must hold at least one token")
        if any(t < 0 for t in self.instruction + self.answer):
            raise DimensionError("token ids must be non-negative")


@dataclass(frozen=True)
class AlignConfig:
    lambda1: float = 1.0
    lambda2: float = 1.0
    learning_rate: float = 0.1
    epochs: int = 100
    fuse_mode: str = "mean"  # or "sum"
    cosine_mode: str = "flatten"  # or "per_pair_mean"

    def __post_init__(self) -> None:
        if self.lambda1 < 0 or self.lambda2 < 0 or self.learning_rate < 0:
            raise EvcapError("weights and learning rate must be >= 0")
        if self.fuse_mode not in ("mean", "sum"):
            raise EvcapError(f"unknown fuse_mode {self.fuse_mode!r}")
        if self.cosine_mode not in ("flatten", "per_pair_mean"):
            raise EvcapError(f"unknown cosine_mode {self.cosine_mode!r}")


@dataclass(frozen=True)
class LossBreakdown:
    l_ev_t: float
    l_ev_im_t: float
    l_c: float
    total: float


@dataclass(frozen=True)
class ToyModel:
    """Trainable event encoder + frozen image encoder + trainable decoder."""

    event_encoder: ToyEncoderParams
    image_encoder: ToyEncoderParams
    decoder: ToyDecoderParams


def frame_to_input(frame: RgbFrame) -> np.ndarray:
    """Flatten a frame to float64 values in [0, 1]."""
    return frame.pixels.astype(np.float64).ravel() / 255.0


def _check_tokens(decoder: ToyDecoderParams, seq: TokenSeq) -> None:
    if any(t >= decoder.vocab_size for t in seq.instruction + seq.answer):
        raise DimensionError(
            f"token id out of vocabulary (size {decoder.vocab_size}): {seq}"
        )


# ---------------------------------------------------------------------------
# encoder


def _encode_forward(inputs: np.ndarray, params: ToyEncoderParams):
    """inputs: (count, input_size). Returns embeddings (count, dim) and a cache."""
    if inputs.shape[1] != params.input_size:
        raise DimensionError(
            f"encoder expects inputs of size {params.input_size}, got {inputs.shape[1]}"
        )
    h = np.tanh(inputs @ params.projection.T + params.bias)
    norms = np.linalg.norm(h, axis=1)
    if params.normalize:
        safe = np.where(norms > 0, norms, 1.0)
        emb = h / safe[:, None]
    else:
        emb = h
    return emb, (inputs, h, norms, emb)


def _encode_backward(cache, d_emb: np.ndarray, params: ToyEncoderParams):
    """Push gradients w.r.t. embeddings back to (projection, bias)."""
    inputs, h, norms, emb = cache
    if params.normalize:
        safe = np.where(norms > 0, norms, 1.0)
        # d(h/r)/dh = (I - e e^T) / r applied row-wise; zero-norm rows pass through
        dot = np.sum(emb * d_emb, axis=1, keepdims=True)
        dh = (d_emb - emb * dot) / safe[:, None]
        dh = np.where(norms[:, None] > 0, dh, d_emb)
    else:
        dh = d_emb
    dz = dh * (1.0 - h * h)
    return dz.T @ inputs, dz.sum(axis=0)


def encode(frames: list[RgbFrame], params: ToyEncoderParams) -> list[Embedding]:
    """Embed frames: tanh(projection @ flat + bias), unit-normalized if configured."""
    inputs = np.stack([frame_to_input(f) for f in frames])
    emb, _ = _encode_forward(inputs, params)
    return [emb[i] for i in range(emb.shape[0])]


# ---------------------------------------------------------------------------
# losses


def _stack_pairs(ev, im):
    a = np.stack([np.asarray(v, dtype=np.float64) for v in ev])
    b = np.stack([np.asarray(v, dtype=np.float64) for v in im])
    if a.shape != b.shape:
        raise DimensionError(f"embedding lists disagree: {a.shape} vs {b.shape}")
    return a, b


def _cosine_with_grad(ev, im, mode: str = "flatten"):
    """Returns (loss, d/d_ev rows, d/d_im rows)."""
    a2, b2 = _stack_pairs(ev, im)
    if mode == "flatten":
        a, b = a2.ravel(), b2.ravel()
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na == 0 or nb == 0:
            raise DegenerateInputError("cosine of a zero vector is undefined")
        ah, bh = a / na, b / nb
        s = float(ah @ bh)
        da = (s * ah - bh) / na
        db = (s * bh - ah) / nb
        return 1.0 - s, da.reshape(a2.shape), db.reshape(b2.shape)
    if mode != "per_pair_mean":
        raise EvcapError(f"unknown cosine mode {mode!r}")
    k = a2.shape[0]
    na = np.linalg.norm(a2, axis=1)
    nb = np.linalg.norm(b2, axis=1)
    if (na == 0).any() or (nb == 0).any():
        raise DegenerateInputError("cosine of a zero vector is undefined")
    ah, bh = a2 / na[:, None], b2 / nb[:, None]
    s = np.sum(ah * bh, axis=1)
    loss = float(np.mean(1.0 - s))
    da = (s[:, None] * ah - bh) / (na[:, None] * k)
    db = (s[:, None] * bh - ah) / (nb[:, None] * k)
    return loss, da, db


def cosine_alignment_loss(ev: list[Embedding], im: list[Embedding], mode: str = "flatten") -> float:
    """1 - cosine similarity between the two embedding sets; in [0, 2]."""
    loss, _, _ = _cosine_with_grad(ev, im, mode)
    return loss


def _sequence_nll_with_grad(decoder: ToyDecoderParams, conditioning: np.ndarray, seq: TokenSeq):
    """Returns (loss, d_conditioning, d_token_embed, d_output).

    The instruction is folded into the conditioning vector by summing its
    token embeddings; decoding then walks the answer autoregressively with
    BEGIN_TOKEN feeding the first step.
    """
    _check_tokens(decoder, seq)
    c = np.asarray(conditioning, dtype=np.float64)
    if c.shape != (decoder.dim,):
        raise DimensionError(f"conditioning must have dim {decoder.dim}, got {c.shape}")
    emb, wout = decoder.token_embed, decoder.output
    dim = decoder.dim
    c_eff = c + sum((emb[t] for t in seq.instruction), np.zeros(dim))

    loss = 0.0
    d_c_eff = np.zeros(dim)
    d_emb = np.zeros_like(emb)
    d_out = np.zeros_like(wout)
    prev_ids = (BEGIN_TOKEN,) + seq.answer[:-1]
    for prev, target in zip(prev_ids, seq.answer):
        g = np.concatenate([c_eff, emb[prev]])
        logits = wout @ g
        shifted = logits - logits.max()
        lse = np.log(np.exp(shifted).sum()) + logits.max()
        loss += lse - logits[target]
        d_logits = np.exp(logits - lse)
        d_logits[target] -= 1.0
        d_out += np.outer(d_logits, g)
        dg = wout.T @ d_logits
        d_c_eff += dg[:dim]
        d_emb[prev] += dg[dim:]
    for t in seq.instruction:
        d_emb[t] += d_c_eff
    return float(loss), d_c_eff, d_emb, d_out


def sequence_nll(decoder: ToyDecoderParams, conditioning: Embedding, seq: TokenSeq) -> float:
    """Negative log-likelihood of the answer tokens under the toy decoder."""
    loss, _, _, _ = _sequence_nll_with_grad(decoder, conditioning, seq)
    return loss


def prior_fused_nll(
    decoder: ToyDecoderParams, ev: Embedding, im: Embedding, seq: TokenSeq
) -> float:
    """sequence_nll conditioned on the event/image average."""
    ev = np.asarray(ev, dtype=np.float64)
    im = np.asarray(im, dtype=np.float64)
    if ev.shape != im.shape:
        raise DimensionError(f"embedding shapes disagree: {ev.shape} vs {im.shape}")
    return sequence_nll(decoder, 0.5 * (ev + im), seq)


def total_loss(
    decoder: ToyDecoderParams,
    ev_embeds: list[Embedding],
    im_embeds: list[Embedding],
    seq: TokenSeq,
    config: AlignConfig,
) -> LossBreakdown:
    """Compose the three alignment terms with the configured weights.

    Embedding lists are pooled by mean before conditioning the decoder.
    """
    pooled_ev = np.mean(np.stack(ev_embeds), axis=0)
    pooled_im = np.mean(np.stack(im_embeds), axis=0)
    l_ev_t = sequence_nll(decoder, pooled_ev, seq)
    l_ev_im_t = prior_fused_nll(decoder, pooled_ev, pooled_im, seq)
    l_c = cosine_alignment_loss(ev_embeds, im_embeds, config.cosine_mode)
    total = 0.5 * config.lambda1 * (l_ev_t + l_ev_im_t) + config.lambda2 * l_c
    return LossBreakdown(l_ev_t, l_ev_im_t, l_c, total)


def fuse_embeddings(ev: Embedding, im: Embedding, mode: str = "mean") -> Embedding:
    """Inference-time fusion of the two modalities."""
    ev = np.asarray(ev, dtype=np.float64)
    im = np.asarray(im, dtype=np.float64)
    if ev.shape != im.shape:
        raise DimensionError(f"embedding shapes disagree: {ev.shape} vs {im.shape}")
    if mode == "sum":
        return ev + im
    if mode == "mean":
        return 0.5 * (ev + im)
    raise EvcapError(f"unknown fuse mode {mode!r}")


# ---------------------------------------------------------------------------
# parameter packing, batch gradients, training


def trainable_vector(model: ToyModel) -> np.ndarray:
    """Flatten the trainable parameters (event encoder + decoder)."""
    return np.concatenate(
        [
            model.event_encoder.projection.ravel(),
            model.event_encoder.bias,
            model.decoder.token_embed.ravel(),
            model.decoder.output.ravel(),
        ]
    )


def with_trainable_vector(model: ToyModel, vec: np.ndarray) -> ToyModel:
    """Rebuild the model with trainables taken from a flat vector."""
    enc = model.event_encoder
    dec = model.decoder
    sizes = [enc.projection.size, enc.bias.size, dec.token_embed.size, dec.output.size]
    if vec.shape != (sum(sizes),):
        raise DimensionError(f"expected {sum(sizes)} parameters, got {vec.shape}")
    parts = np.split(np.asarray(vec, dtype=np.float64), np.cumsum(sizes)[:-1])
    return ToyModel(
        ToyEncoderParams(parts[0].reshape(enc.projection.shape), parts[1], enc.normalize),
        model.image_encoder,
        ToyDecoderParams(
            parts[2].reshape(dec.token_embed.shape), parts[3].reshape(dec.output.shape)
        ),
    )


def init_toy_model(
    input_size: int,
    embed_dim: int,
    vocab_size: int,
    seed: int = 0,
    normalize: bool = True,
    scale: float = 0.1,
) -> ToyModel:
    """Seed-deterministic small random initialization."""
    rng = np.random.default_rng(seed)

    def enc() -> ToyEncoderParams:
        return ToyEncoderParams(
            scale * rng.standard_normal((embed_dim, input_size)),
            scale * rng.standard_normal(embed_dim),
            normalize,
        )

    event_enc = enc()
    image_enc = enc()
    decoder = ToyDecoderParams(
        scale * rng.standard_normal((vocab_size, embed_dim)),
        scale * rng.standard_normal((vocab_size, 2 * embed_dim)),
    )
    return ToyModel(event_enc, image_enc, decoder)


DatasetItem = tuple[list[RgbFrame], list[RgbFrame], TokenSeq]


def batch_loss_and_grad(model: ToyModel, dataset: list[DatasetItem], config: AlignConfig):
    """Mean LossBreakdown over the dataset and its gradient w.r.t. trainables."""
    if not dataset:
        raise EvcapError("dataset must be nonempty")
    enc = model.event_encoder
    dec = model.decoder
    n = len(dataset)
    sums = np.zeros(3)
    d_proj = np.zeros_like(enc.projection)
    d_bias = np.zeros_like(enc.bias)
    d_emb = np.zeros_like(dec.token_embed)
    d_out = np.zeros_like(dec.output)
    w_nll = 0.5 * config.lambda1

    for ev_frames, im_frames, seq in dataset:
        ev_in = np.stack([frame_to_input(f) for f in ev_frames])
        ev_emb, cache = _encode_forward(ev_in, enc)
        im_emb, _ = _encode_forward(
            np.stack([frame_to_input(f) for f in im_frames]), model.image_encoder
        )
        k_ev = ev_emb.shape[0]
        pooled_ev = ev_emb.mean(axis=0)
        pooled_im = im_emb.mean(axis=0)

        l1, dc1, de1, do1 = _sequence_nll_with_grad(dec, pooled_ev, seq)
        l2, dc2, de2, do2 = _sequence_nll_with_grad(dec, 0.5 * (pooled_ev + pooled_im), seq)
        lc, dev_c, _ = _cosine_with_grad(ev_emb, im_emb, config.cosine_mode)
        sums += (l1, l2, lc)

        d_emb += w_nll * (de1 + de2)
        d_out += w_nll * (do1 + do2)
        # pooled conditioning: each event embedding sees dpooled / k
        d_pooled = w_nll * (dc1 + 0.5 * dc2)
        d_ev_emb = config.lambda2 * dev_c + d_pooled[None, :] / k_ev
        dp, db = _encode_backward(cache, d_ev_emb, enc)
        d_proj += dp
        d_bias += db

    l_ev_t, l_ev_im_t, l_c = (float(v) for v in sums / n)
    total = 0.5 * config.lambda1 * (l_ev_t + l_ev_im_t) + config.lambda2 * l_c
    grad = np.concatenate([a.ravel() / n for a in (d_proj, d_bias, d_emb, d_out)])
    return LossBreakdown(l_ev_t, l_ev_im_t, l_c, total), grad


def gradient_descent(loss_and_grad, x0: np.ndarray, learning_rate: float, steps: int):
    """Plain fixed-step descent; records the loss seen before each update."""
    x = np.array(x0, dtype=np.float64)
    losses: list[float] = []
    for step in range(steps):
        loss, grad = loss_and_grad(x)
        if not np.isfinite(loss) or not np.isfinite(grad).all():
            raise EvcapError(f"non-finite loss or gradient at step {step}: loss={loss}")
        losses.append(float(loss))
        x = x - learning_rate * grad
    return x, losses


def train_toy(dataset: list[DatasetItem], config: AlignConfig, model: ToyModel):
    """Full-batch descent on the trainables; returns (model, per-step breakdowns)."""
    trajectory: list[LossBreakdown] = []

    def f(vec: np.ndarray):
        breakdown, grad = batch_loss_and_grad(with_trainable_vector(model, vec), dataset, config)
        trajectory.append(breakdown)
        return breakdown.total, grad

    vec, _ = gradient_descent(f, trainable_vector(model), config.learning_rate, config.epochs)
    # gradient_descent evaluates once per step, so the trajectory length matches
    return with_trainable_vector(model, vec), trajectory


def synthetic_alignment_dataset(
    count: int,
    frame_size: int = 4,
    frames_per_item: int = 2,
    vocab_size: int = 12,
    answer_len: int = 3,
    seed: int = 0,
    noise: float = 30.0,
) -> list[DatasetItem]:
    """Seeded toy triples for training and benchmarks.

    Event and image frames of one item perturb the same base pattern, so a
    matched pair is learnably closer than a mismatched one.
    """
    rng = np.random.default_rng(seed)
    items: list[DatasetItem] = []
    for _ in range(count):
        base = rng.uniform(0, 255, size=(frame_size, frame_size, 3))

        def frames() -> list[RgbFrame]:
            return [
                RgbFrame(
                    np.clip(
                        base + rng.normal(0, noise, size=base.shape), 0, 255
                    ).astype(np.uint8)
                )
                for _ in range(frames_per_item)
            ]

        ev_frames, im_frames = frames(), frames()
        seq = TokenSeq(
            (int(rng.integers(0, vocab_size)),),
            tuple(int(t) for t in rng.integers(1, vocab_size, size=answer_len)),
        )
        items.append((ev_frames, im_frames, seq))
    return items


# ---------------------------------------------------------------------------
# gradient verification


def grad_check(evaluator, params: np.ndarray, epsilon: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    evaluator(vec) must return (loss, grad). The per-coordinate error is
    |analytic - fd| / max(1e-12, |analytic| + |fd|).
    """
    if epsilon <= 0:
        raise EvcapError(f"epsilon must be positive, got {epsilon}")
    params = np.asarray(params, dtype=np.float64)
    loss, grad = evaluator(params)
    if not np.isfinite(loss):
        raise EvcapError(f"non-finite loss {loss}")
    worst = 0.0
    for i in range(params.size):
        step = np.zeros_like(params)
        step[i] = epsilon
        f_plus, _ = evaluator(params + step)
        f_minus, _ = evaluator(params - step)
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise EvcapError("non-finite loss during finite differencing")
        fd = (f_plus - f_minus) / (2.0 * epsilon)
        a = grad[i]
        worst = max(worst, abs(a - fd) / max(1e-12, abs(a) + abs(fd)))
    return worst


def cosine_loss_evaluator(count: int, dim: int, mode: str = "flatten"):
    """Evaluator over a flat [ev; im] vector, for grad_check."""

    def evaluate(vec: np.ndarray):
        half = count * dim
        ev = vec[:half].reshape(count, dim)
        im = vec[half:].reshape(count, dim)
        loss, da, db = _cosine_with_grad(ev, im, mode)
        return loss, np.concatenate([da.ravel(), db.ravel()])

    return evaluate


def nll_evaluator(seq: TokenSeq, vocab_size: int, dim: int):
    """Evaluator over [token_embed; output; conditioning], for grad_check."""

    def evaluate(vec: np.ndarray):
        n_emb = vocab_size * dim
        n_out = vocab_size * 2 * dim
        decoder = ToyDecoderParams(
            vec[:n_emb].reshape(vocab_size, dim),
            vec[n_emb : n_emb + n_out].reshape(vocab_size, 2 * dim),
        )
        conditioning = vec[n_emb + n_out :]
        loss, dc, de, do = _sequence_nll_with_grad(decoder, conditioning, seq)
        return loss, np.concatenate([de.ravel(), do.ravel(), dc])

    return evaluate


def total_loss_evaluator(model: ToyModel, dataset: list[DatasetItem], config: AlignConfig):
    """Evaluator over the trainable vector of the full objective."""

    def evaluate(vec: np.ndarray):
        breakdown, grad = batch_loss_and_grad(with_trainable_vector(model, vec), dataset, config)
        return breakdown.total, grad

    return evaluate


# ---------------------------------------------------------------------------
# serialization

_CHECKPOINT_MAGIC = "toy-params v1"


def save_checkpoint(model: ToyModel, path: str) -> None:
    """Text header naming shapes, then all arrays as little-endian float64."""
    fields = [
        ("event_encoder.projection", model.event_encoder.projection),
        ("event_encoder.bias", model.event_encoder.bias),
        ("image_encoder.projection", model.image_encoder.projection),
        ("image_encoder.bias", model.image_encoder.bias),
        ("decoder.token_embed", model.decoder.token_embed),
        ("decoder.output", model.decoder.output),
    ]
    lines = [_CHECKPOINT_MAGIC]
    lines.append(f"event_encoder.normalize {int(model.event_encoder.normalize)}")
    lines.append(f"image_encoder.normalize {int(model.image_encoder.normalize)}")
    for name, arr in fields:
        lines.append(f"{name} {' '.join(str(s) for s in arr.shape)}")
    lines.append("end")
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("ascii"))
        for _, arr in fields:
            fh.write(arr.astype("<f8").tobytes())


def load_checkpoint(path: str) -> ToyModel:
    with open(path, "rb") as fh:
        data = fh.read()
    header_end = data.index(b"end\n") + 4
    lines = data[:header_end].decode("ascii").splitlines()
    if lines[0] != _CHECKPOINT_MAGIC:
        raise EvcapError(f"not a checkpoint: header {lines[0]!r}")
    flags: dict[str, bool] = {}
    shapes: list[tuple[str, tuple[int, ...]]] = []
    for line in lines[1:-1]:
        name, *rest = line.split()
        if name.endswith(".normalize"):
            flags[name] = bool(int(rest[0]))
        else:
            shapes.append((name, tuple(int(v) for v in rest)))
    flat = np.frombuffer(data[header_end:], dtype="<f8")
    arrays: dict[str, np.ndarray] = {}
    offset = 0
    for name, shape in shapes:
        size = int(np.prod(shape)) if shape else 1
        arrays[name] = flat[offset : offset + size].reshape(shape).copy()
        offset += size
    return ToyModel(
        ToyEncoderParams(
            arrays["event_encoder.projection"],
            arrays["event_encoder.bias"],
            flags["event_encoder.normalize"],
        ),
        ToyEncoderParams(
            arrays["image_encoder.projection"],
            arrays["image_encoder.bias"],
            flags["image_encoder.normalize"],
        ),
        ToyDecoderParams(arrays["decoder.token_embed"], arrays["decoder.output"]),
    )


def write_loss_csv(trajectory: list[LossBreakdown], path: str) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "l_ev_t", "l_ev_im_t", "l_c", "total"])
        for epoch, b in enumerate(trajectory):
            writer.writerow([epoch, repr(b.l_ev_t), repr(b.l_ev_im_t), repr(b.l_c), repr(b.total)])
