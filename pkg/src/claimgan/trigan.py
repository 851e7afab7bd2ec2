"""The three-pair adversarial model and its training loop.

Six networks: g_p / g_n map noise to synthetic positive / negative samples,
g_y maps a sample to a class probability, d_p / d_n judge real-vs-synthetic
per class, and d_y judges real-vs-synthetic over the label-weighted mixture.
Per iteration the three discriminators ascend their objectives, then (on
fresh noise) the three generators descend theirs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import LabeledDataset, class_priors
from .metrics import MetricsRecord, precision_recall_f1, similarity_report
from .nets import (
    NeuralNet,
    ParamGrads,
    add_grads,
    backward,
    forward,
    make_optimizer,
    net_init,
    optimizer_step,
    scale_grads,
    zero_grads,
)

NET_NAMES = ("g_p", "g_n", "g_y", "d_p", "d_n", "d_y")

G_Y_LOSS_MODES = ("alg1-line14", "eq4")


def _probs(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise ValueError(f"empty batch for {name}")
    if np.any(v <= 0.0) or np.any(v >= 1.0):
        raise ValueError(f"{name} entries must lie strictly inside (0, 1)")
    return v


def gan_objective(d_real, d_fake) -> float:
    """mean(log D(real)) + mean(log(1 - D(fake))): the two-player bracket
    the per-class discriminators ascend."""
    d_real = _probs(d_real, "d_real")
    d_fake = _probs(d_fake, "d_fake")
    return float(np.log(d_real).mean() + np.log1p(-d_fake).mean())


def d_y_objective(d_on_real_mixed, d_on_gp, d_on_gn, pi_p: float, pi_n: float) -> float:
    """mean(log D_y(x)) + pi_p*mean(log(1-D_y(Gp))) + pi_n*mean(log(1-D_y(Gn)))."""
    if pi_p < 0 or pi_n < 0 or abs(pi_p + pi_n - 1.0) > 1e-9:
        raise ValueError(f"priors ({pi_p}, {pi_n}) must be nonnegative and sum to 1")
    d_real = _probs(d_on_real_mixed, "d_on_real_mixed")
    d_gp = _probs(d_on_gp, "d_on_gp")
    d_gn = _probs(d_on_gn, "d_on_gn")
    return float(
        np.log(d_real).mean()
        + pi_p * np.log1p(-d_gp).mean()
        + pi_n * np.log1p(-d_gn).mean()
    )


def g_p_loss(d_p_on_fake, d_y_on_fake, pi_p: float) -> float:
    """pi_p * mean(-log D_p(Gp(z)) - log D_y(Gp(z))): non-saturating form."""
    d_p = _probs(d_p_on_fake, "d_p_on_fake")
    d_y = _probs(d_y_on_fake, "d_y_on_fake")
    return float(pi_p * (-np.log(d_p) - np.log(d_y)).mean())


def g_n_loss(d_n_on_fake, d_y_on_fake, pi_n: float) -> float:
    """Mirror of g_p_loss with the negative discriminator and prior."""
    return g_p_loss(d_n_on_fake, d_y_on_fake, pi_n)


def g_y_loss(
    d_y_on_gp,
    d_y_on_gn,
    pi_p: float,
    pi_n: float,
    mode: str,
    g_y_on_gp=None,
    g_y_on_gn=None,
) -> float:
    """Label-generator loss, in either of its two stated forms.

    "alg1-line14": -pi_p*mean(log D_y(Gp)) - pi_n*mean(log D_y(Gn)). This
    expression contains no g_y term, so its gradient w.r.t. g_y vanishes.

    "eq4": soft-target form with D_y's judgment t as the target and g_y's
    class probability u as the prediction:
    -sum_c pi_c * mean(t*log(u) + (1-t)*log(1-t)), minimized by g_y.
    """
    if mode not in G_Y_LOSS_MODES:
        raise ValueError(f"unknown g_y loss mode {mode!r}")
    if pi_p < 0 or pi_n < 0 or abs(pi_p + pi_n - 1.0) > 1e-9:
        raise ValueError(f"priors ({pi_p}, {pi_n}) must be nonnegative and sum to 1")
    t_p = _probs(d_y_on_gp, "d_y_on_gp")
    t_n = _probs(d_y_on_gn, "d_y_on_gn")
    if mode == "alg1-line14":
        return float(-pi_p * np.log(t_p).mean() - pi_n * np.log(t_n).mean())
    if g_y_on_gp is None or g_y_on_gn is None:
        raise ValueError("eq4 mode requires g_y outputs on both generated batches")
    u_p = _probs(g_y_on_gp, "g_y_on_gp")
    u_n = _probs(g_y_on_gn, "g_y_on_gn")
    ll = pi_p * (t_p * np.log(u_p) + (1.0 - t_p) * np.log1p(-t_p)).mean()
    ll += pi_n * (t_n * np.log(u_n) + (1.0 - t_n) * np.log1p(-t_n)).mean()
    return float(-ll)


@dataclass
class TriGanModel:
    g_p: NeuralNet
    g_n: NeuralNet
    g_y: NeuralNet
    d_p: NeuralNet
    d_n: NeuralNet
    d_y: NeuralNet
    pi_p: float
    pi_n: float
    noise_dim: int
    sample_dim: int

    def __post_init__(self):
        if self.pi_p < 0 or self.pi_n < 0 or abs(self.pi_p + self.pi_n - 1.0) > 1e-12:
            raise ValueError("priors must be nonnegative and sum to 1")
        for name in ("g_p", "g_n"):
            net = getattr(self, name)
            if net.input_dim != self.noise_dim or net.output_dim != self.sample_dim:
                raise ValueError(f"{name} must map noise_dim -> sample_dim")
        for name in ("g_y", "d_p", "d_n", "d_y"):
            net = getattr(self, name)
            if net.input_dim != self.sample_dim or net.output_dim != 1:
                raise ValueError(f"{name} must map sample_dim -> 1")

    def nets(self) -> dict[str, NeuralNet]:
        return {name: getattr(self, name) for name in NET_NAMES}

    def copy(self) -> "TriGanModel":
        return TriGanModel(
            **{name: getattr(self, name).copy() for name in NET_NAMES},
            pi_p=self.pi_p,
            pi_n=self.pi_n,
            noise_dim=self.noise_dim,
            sample_dim=self.sample_dim,
        )


def build_model(
    sample_dim: int,
    noise_dim: int,
    pi_p: float,
    pi_n: float,
    seed: int,
    hidden: int = 64,
) -> TriGanModel:
    """Default shapes: generators [noise, h, h, sample] with tanh hidden and
    identity output; g_y and the discriminators [sample, h, h, 1] with relu
    hidden and sigmoid output."""
    gen_dims = [noise_dim, hidden, hidden, sample_dim]
    gen_acts = ["tanh", "tanh", "identity"]
    disc_dims = [sample_dim, hidden, hidden, 1]
    disc_acts = ["relu", "relu", "sigmoid"]
    ss = np.random.SeedSequence(seed).spawn(len(NET_NAMES))
    def sub(i):
        return int(ss[i].generate_state(1)[0])
    return TriGanModel(
        g_p=net_init(gen_dims, gen_acts, sub(0)),
        g_n=net_init(gen_dims, gen_acts, sub(1)),
        g_y=net_init(disc_dims, disc_acts, sub(2)),
        d_p=net_init(disc_dims, disc_acts, sub(3)),
        d_n=net_init(disc_dims, disc_acts, sub(4)),
        d_y=net_init(disc_dims, disc_acts, sub(5)),
        pi_p=pi_p,
        pi_n=pi_n,
        noise_dim=noise_dim,
        sample_dim=sample_dim,
    )


@dataclass
class TrainConfig:
    iterations: int
    batch_size: int = 64
    seed: int = 0
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    learning_rates: dict[str, float] = field(default_factory=dict)
    g_y_loss_mode: str = "alg1-line14"
    eval_every: int = 0  # 0 disables checkpoint evaluation
    similarity_sample_cap: int = 20000
    pairing: str = "nearest"

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.eval_every < 0:
            raise ValueError("eval_every must be nonnegative")
        if self.g_y_loss_mode not in G_Y_LOSS_MODES:
            raise ValueError(f"unknown g_y loss mode {self.g_y_loss_mode!r}")
        unknown = set(self.learning_rates) - set(NET_NAMES)
        if unknown:
            raise ValueError(f"learning rates for unknown nets: {sorted(unknown)}")

    def lr_for(self, name: str) -> float:
        return self.learning_rates.get(name, self.learning_rate)


# --- per-update gradient rules -------------------------------------------
#
# Each returns (grads for the net being updated, objective/loss value).
# Discriminator rules carry the prior factor their update line prints;
# d_y's printed leading prior is dropped as a typo (it would rescale the
# whole ascent direction by pi_p for no stated reason).


def d_p_step_grads(model: TriGanModel, x_p, z) -> tuple[ParamGrads, float]:
    fake, _ = forward(model.g_p, z)
    d_real, cache_r = forward(model.d_p, x_p)
    d_fake, cache_f = forward(model.d_p, fake)
    value = gan_objective(d_real, d_fake)
    m = d_real.shape[0]
    g_real, _ = backward(model.d_p, cache_r, 1.0 / (m * d_real))
    g_fake, _ = backward(model.d_p, cache_f, -1.0 / (m * (1.0 - d_fake)))
    return scale_grads(add_grads(g_real, g_fake), model.pi_p), value


def d_n_step_grads(model: TriGanModel, x_n, z) -> tuple[ParamGrads, float]:
    fake, _ = forward(model.g_n, z)
    d_real, cache_r = forward(model.d_n, x_n)
    d_fake, cache_f = forward(model.d_n, fake)
    value = gan_objective(d_real, d_fake)
    m = d_real.shape[0]
    g_real, _ = backward(model.d_n, cache_r, 1.0 / (m * d_real))
    g_fake, _ = backward(model.d_n, cache_f, -1.0 / (m * (1.0 - d_fake)))
    return scale_grads(add_grads(g_real, g_fake), model.pi_n), value


def d_y_step_grads(model: TriGanModel, x, z) -> tuple[ParamGrads, float]:
    fake_p, _ = forward(model.g_p, z)
    fake_n, _ = forward(model.g_n, z)
    d_real, cache_r = forward(model.d_y, x)
    d_gp, cache_p = forward(model.d_y, fake_p)
    d_gn, cache_n = forward(model.d_y, fake_n)
    value = d_y_objective(d_real, d_gp, d_gn, model.pi_p, model.pi_n)
    m = d_real.shape[0]
    g_real, _ = backward(model.d_y, cache_r, 1.0 / (m * d_real))
    g_p_part, _ = backward(model.d_y, cache_p, -model.pi_p / (m * (1.0 - d_gp)))
    g_n_part, _ = backward(model.d_y, cache_n, -model.pi_n / (m * (1.0 - d_gn)))
    return add_grads(add_grads(g_real, g_p_part), g_n_part), value


def g_p_step_grads(model: TriGanModel, z) -> tuple[ParamGrads, float]:
    fake, cache_g = forward(model.g_p, z)
    d_p_out, cache_dp = forward(model.d_p, fake)
    d_y_out, cache_dy = forward(model.d_y, fake)
    loss = g_p_loss(d_p_out, d_y_out, model.pi_p)
    m = fake.shape[0]
    _, into_fake_p = backward(model.d_p, cache_dp, -model.pi_p / (m * d_p_out))
    _, into_fake_y = backward(model.d_y, cache_dy, -model.pi_p / (m * d_y_out))
    grads, _ = backward(model.g_p, cache_g, into_fake_p + into_fake_y)
    return grads, loss


def g_n_step_grads(model: TriGanModel, z) -> tuple[ParamGrads, float]:
    fake, cache_g = forward(model.g_n, z)
    d_n_out, cache_dn = forward(model.d_n, fake)
    d_y_out, cache_dy = forward(model.d_y, fake)
    loss = g_n_loss(d_n_out, d_y_out, model.pi_n)
    m = fake.shape[0]
    _, into_fake_n = backward(model.d_n, cache_dn, -model.pi_n / (m * d_n_out))
    _, into_fake_y = backward(model.d_y, cache_dy, -model.pi_n / (m * d_y_out))
    grads, _ = backward(model.g_n, cache_g, into_fake_n + into_fake_y)
    return grads, loss


def g_y_step_grads(model: TriGanModel, z, mode: str) -> tuple[ParamGrads, float]:
    fake_p, _ = forward(model.g_p, z)
    fake_n, _ = forward(model.g_n, z)
    t_p, _ = forward(model.d_y, fake_p)
    t_n, _ = forward(model.d_y, fake_n)
    if mode == "alg1-line14":
        loss = g_y_loss(t_p, t_n, model.pi_p, model.pi_n, mode)
        # the printed rule contains no g_y term: the gradient is exactly zero
        return zero_grads(model.g_y), loss
    u_p, cache_up = forward(model.g_y, fake_p)
    u_n, cache_un = forward(model.g_y, fake_n)
    loss = g_y_loss(t_p, t_n, model.pi_p, model.pi_n, mode, u_p, u_n)
    m = fake_p.shape[0]
    g_up, _ = backward(model.g_y, cache_up, -model.pi_p * t_p / (m * u_p))
    g_un, _ = backward(model.g_y, cache_un, -model.pi_n * t_n / (m * u_n))
    return add_grads(g_up, g_un), loss


def proposed_step(model, opts, cfg, x_p, x_n, x, z, z2):
    """One training iteration: the three discriminators ascend, then the
    three generators descend on fresh noise; returns the discriminator
    objectives recorded as telemetry."""
    grads, loss_pos = d_p_step_grads(model, x_p, z)
    optimizer_step(model.d_p, grads, opts["d_p"], "ascend")
    grads, loss_neg = d_n_step_grads(model, x_n, z)
    optimizer_step(model.d_n, grads, opts["d_n"], "ascend")
    grads, loss_label = d_y_step_grads(model, x, z)
    optimizer_step(model.d_y, grads, opts["d_y"], "ascend")

    grads, _ = g_p_step_grads(model, z2)
    optimizer_step(model.g_p, grads, opts["g_p"], "descend")
    grads, _ = g_n_step_grads(model, z2)
    optimizer_step(model.g_n, grads, opts["g_n"], "descend")
    grads, _ = g_y_step_grads(model, z2, cfg.g_y_loss_mode)
    optimizer_step(model.g_y, grads, opts["g_y"], "descend")
    return loss_pos, loss_neg, loss_label


def _eval_seed(base_seed: int, run_id: int, iteration: int) -> np.random.Generator:
    return np.random.default_rng([base_seed, run_id, iteration, 0xE7A1])


def train(
    model: TriGanModel,
    data: LabeledDataset,
    cfg: TrainConfig,
    val_data: LabeledDataset | None = None,
    run_id: int = 0,
    step_fn=proposed_step,
) -> tuple[TriGanModel, list[MetricsRecord]]:
    """Run the training loop on a copy of the model.

    One telemetry record per iteration; precision/recall/F1 on val_data and
    similarity scores against the real positives are filled in every
    cfg.eval_every iterations.
    """
    class_priors(data)  # rejects empty or single-class data
    if data.dim != model.sample_dim:
        raise ValueError("dataset dim does not match model sample_dim")
    model = model.copy()
    if cfg.iterations == 0:
        return model, []
    rng = np.random.default_rng(cfg.seed)
    opts = {
        name: make_optimizer(net, cfg.optimizer, cfg.lr_for(name))
        for name, net in model.nets().items()
    }
    pos = data.positives()
    neg = data.negatives()
    allx = data.features
    m = cfg.batch_size
    records: list[MetricsRecord] = []
    for it in range(1, cfg.iterations + 1):
        z = rng.standard_normal((m, model.noise_dim))
        x_p = pos[rng.integers(0, pos.shape[0], m)]
        x_n = neg[rng.integers(0, neg.shape[0], m)]
        x = allx[rng.integers(0, allx.shape[0], m)]
        z2 = rng.standard_normal((m, model.noise_dim))
        loss_pos, loss_neg, loss_label = step_fn(model, opts, cfg, x_p, x_n, x, z, z2)
        rec = MetricsRecord(
            run=run_id, iter=it, loss_pos=loss_pos, loss_neg=loss_neg, loss_label=loss_label
        )
        if cfg.eval_every and it % cfg.eval_every == 0:
            eval_rng = _eval_seed(cfg.seed, run_id, it)
            if val_data is not None and len(val_data):
                preds = classify_batch(model, val_data.features)[1]
                p, r, f1, _ = precision_recall_f1(preds, val_data.labels)
                rec.precision, rec.recall, rec.f1 = p, r, f1
            n_gen = min(cfg.similarity_sample_cap, pos.shape[0])
            z_eval = eval_rng.standard_normal((n_gen, model.noise_dim))
            gen_pos, _ = forward(model.g_p, z_eval)
            rec.cos, rec.man, rec.euc = similarity_report(
                pos,
                gen_pos,
                n_cap=cfg.similarity_sample_cap,
                seed=int(eval_rng.integers(0, 2**32)),
                pairing=cfg.pairing,
            )
        records.append(rec)
    return model, records


def classify(model: TriGanModel, x) -> tuple[float, int]:
    """Class score and hard label for one sample: label 1 iff g_y(x) >= 0.5."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    if x.shape[1] != model.sample_dim:
        raise ValueError(f"sample has {x.shape[1]} features, expected {model.sample_dim}")
    score, _ = forward(model.g_y, x)
    s = float(score[0, 0])
    return s, int(s >= 0.5)


def classify_batch(model: TriGanModel, xs) -> tuple[np.ndarray, np.ndarray]:
    scores, _ = forward(model.g_y, np.asarray(xs, dtype=np.float64))
    scores = scores[:, 0]
    return scores, (scores >= 0.5).astype(np.int64)
