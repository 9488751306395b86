"""Negative sampling, loss functions, Adam, KGE training, and random search.

Losses operate on plausibility values (higher = more plausible), so the
same four objectives apply uniformly to similarity-style and
distance-style scoring functions. All losses are batch sums.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import kge, rng as rngmod
from .errors import DataError, NumericalError

LOSS_KINDS = (
    "pointwise_hinge",
    "pointwise_logistic",
    "pairwise_hinge",
    "pairwise_logistic",
)
POINTWISE = ("pointwise_hinge", "pointwise_logistic")
SAMPLING_MODES = ("LCWA", "sLCWA")


@dataclass(frozen=True)
class LossConfig:
    kind: str
    margin: float = 1.0
    negatives_per_positive: int = 1

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise DataError(f"unknown loss kind {self.kind!r}")
        if self.margin < 0:
            raise DataError(f"margin must be >= 0, got {self.margin}")
        if self.negatives_per_positive < 1:
            raise DataError(
                f"negatives_per_positive must be >= 1, "
                f"got {self.negatives_per_positive}"
            )


# ------------------------------------------------------- negative sampling

def _id_triples(g):
    return {(t.subject, t.predicate, t.object) for t in g.triples}


def sample_negatives(g, positives, eta, mode, rng):
    """Corrupt each positive eta times; no emitted triple is in the graph.

    LCWA replaces the object only; sLCWA replaces the subject or the
    object, chosen uniformly per corruption. Returns an int array of
    shape (len(positives), eta, 3). Raises DataError when a slot has no
    valid corruption (the candidate pool is exhausted).
    """
    if mode not in SAMPLING_MODES:
        raise DataError(f"unknown sampling mode {mode!r}")
    if eta < 1:
        raise DataError(f"eta must be >= 1, got {eta}")
    known = _id_triples(g)
    n_ent = g.num_entities
    positives = [tuple(int(x) for x in t[:3]) for t in positives]
    for t in positives:
        if t not in known:
            raise DataError(f"positive triple {t} is not in the graph")
    out = np.empty((len(positives), eta, 3), dtype=np.intp)
    for i, (s, p, o) in enumerate(positives):
        for j in range(eta):
            out[i, j] = _corrupt_one(known, n_ent, s, p, o, mode, rng)
    return out


def _corrupt_one(known, n_ent, s, p, o, mode, rng):
    for _ in range(n_ent):
        side = "object" if mode == "LCWA" else ("subject", "object")[
            int(rng.integers(2))
        ]
        e = int(rng.integers(n_ent))
        cand = (e, p, o) if side == "subject" else (s, p, e)
        if cand not in known:
            return cand
    # bounded retries exhausted; fall back to enumeration so that the
    # error fires only when no corruption exists at all
    candidates = [(s, p, e) for e in range(n_ent) if (s, p, e) not in known]
    if mode == "sLCWA":
        candidates += [(e, p, o) for e in range(n_ent) if (e, p, o) not in known]
    if not candidates:
        raise DataError(
            f"no negative exists for triple ({s}, {p}, {o}) under {mode}"
        )
    return candidates[int(rng.integers(len(candidates)))]


# ------------------------------------------------------------------ losses

def _sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _pair_diff(pos_scores, neg_scores):
    """neg - pos for every pair: flat negatives pair with every positive,
    a (P, eta) array pairs row i with positive i."""
    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.asarray(neg_scores, dtype=np.float64)
    if neg.ndim == 1:
        return neg[None, :] - pos[:, None]
    if neg.shape[0] != pos.shape[0]:
        raise DataError(
            f"per-positive negatives need {pos.shape[0]} rows, "
            f"got {neg.shape[0]}"
        )
    return neg - pos[:, None]


def loss_pointwise_hinge(scores, labels, margin):
    value, _ = loss_pointwise_hinge_grads(scores, labels, margin)
    return value


def loss_pointwise_hinge_grads(scores, labels, margin):
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    act = margin - y * s
    active = act > 0
    # maximum propagates NaN scores into the value, a boolean mask would
    # silently drop them and hide divergence
    value = float(np.sum(np.maximum(act, 0.0)))
    return value, np.where(active, -y, 0.0)


def loss_pointwise_logistic(scores, labels):
    value, _ = loss_pointwise_logistic_grads(scores, labels)
    return value


def loss_pointwise_logistic_grads(scores, labels):
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    value = float(np.sum(np.logaddexp(0.0, -y * s)))
    return value, -y * _sigmoid(-y * s)


def loss_pairwise_hinge(pos_scores, neg_scores, margin):
    value, _, _ = loss_pairwise_hinge_grads(pos_scores, neg_scores, margin)
    return value


def loss_pairwise_hinge_grads(pos_scores, neg_scores, margin):
    diff = _pair_diff(pos_scores, neg_scores)
    act = margin + diff
    active = act > 0
    value = float(np.sum(np.maximum(act, 0.0)))
    ind = active.astype(np.float64)
    dpos = -ind.sum(axis=1)
    dneg = ind.sum(axis=0) if np.asarray(neg_scores).ndim == 1 else ind
    return value, dpos, dneg


def loss_pairwise_logistic(pos_scores, neg_scores):
    value, _, _ = loss_pairwise_logistic_grads(pos_scores, neg_scores)
    return value


def loss_pairwise_logistic_grads(pos_scores, neg_scores):
    diff = _pair_diff(pos_scores, neg_scores)
    value = float(np.sum(np.logaddexp(0.0, diff)))
    sig = _sigmoid(diff)
    dpos = -sig.sum(axis=1)
    dneg = sig.sum(axis=0) if np.asarray(neg_scores).ndim == 1 else sig
    return value, dpos, dneg


# -------------------------------------------------------------------- Adam

@dataclass
class AdamState:
    m: dict
    v: dict
    t: int = 0

    @classmethod
    def for_params(cls, params):
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
        )


def adam_step(params, grads, state, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update, in place. Returns (params, state)."""
    state.t += 1
    t = state.t
    for key, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient for {key!r}")
        m = state.m[key]
        v = state.v[key]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        params[key] -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return params, state


# ----------------------------------------------------------- training loop

@dataclass
class TrainState:
    epoch: int
    loss_history: list
    adam_moments: AdamState
    rng_seed: int


def relative_loss(state):
    """Final epoch loss normalized by the first epoch's loss."""
    history = state.loss_history
    if len(history) < 1:
        raise DataError("relative loss needs at least one recorded epoch")
    if history[0] == 0.0:
        return 1.0
    return history[-1] / history[0]


def _conv_param_dict(conv):
    return {
        "filters": conv.filters,
        "filter_bias": conv.filter_bias,
        "dense": conv.dense,
        "dense_bias": conv.dense_bias,
    }


def _scores_chunked(config, table, s_ids, p_ids, o_ids, chunk=4096):
    parts = [
        kge.score_batch(
            config, table, s_ids[i : i + chunk], p_ids[i : i + chunk],
            o_ids[i : i + chunk],
        )
        for i in range(0, len(s_ids), chunk)
    ]
    return np.concatenate(parts) if parts else np.zeros(0)


def _batch_loss(config, table, loss, pos, neg):
    """Loss and per-row coefficients dL/dScore for one batch.

    pos is (P, 3); neg is (P, eta, 3). Returns (value, rows, coeff) where
    rows stacks positives then flattened negatives.
    """
    p_flat = pos
    n_flat = neg.reshape(-1, 3)
    sp = _scores_chunked(config, table, p_flat[:, 0], p_flat[:, 1], p_flat[:, 2])
    sn = _scores_chunked(config, table, n_flat[:, 0], n_flat[:, 1], n_flat[:, 2])
    plp = kge.plausibility(config, sp)
    pln = kge.plausibility(config, sn)
    if loss.kind == "pointwise_hinge":
        scores = np.concatenate([plp, pln])
        labels = np.concatenate([np.ones(len(plp)), -np.ones(len(pln))])
        value, d = loss_pointwise_hinge_grads(scores, labels, loss.margin)
        coeff = d
    elif loss.kind == "pointwise_logistic":
        scores = np.concatenate([plp, pln])
        labels = np.concatenate([np.ones(len(plp)), -np.ones(len(pln))])
        value, d = loss_pointwise_logistic_grads(scores, labels)
        coeff = d
    else:
        pln2 = pln.reshape(neg.shape[0], neg.shape[1])
        if loss.kind == "pairwise_hinge":
            value, dp, dn = loss_pairwise_hinge_grads(plp, pln2, loss.margin)
        else:
            value, dp, dn = loss_pairwise_logistic_grads(plp, pln2)
        coeff = np.concatenate([dp, dn.ravel()])
    rows = np.concatenate([p_flat, n_flat])
    coeff = coeff * kge.score_direction(config)
    return value, rows, coeff


def _accumulate_grads(config, table, rows, coeff):
    s, p, o = kge._gather(config, table, rows[:, 0], rows[:, 1], rows[:, 2])
    gs, gp, go, conv = kge.grad_rows(config, s, p, o, coeff)
    g_ent = np.zeros_like(table.entities)
    g_rel = np.zeros_like(table.relations)
    np.add.at(g_ent, rows[:, 0], gs)
    np.add.at(g_ent, rows[:, 2], go)
    np.add.at(g_rel, rows[:, 1], gp)
    grads = {"entities": g_ent, "relations": g_rel}
    if conv is not None:
        grads.update(conv)
    return grads


FULL_BATCH_LIMIT = 4096
MINI_BATCH = 1024


def train_kge(
    g,
    config,
    loss,
    epochs,
    lr,
    seed,
    sampling_mode="sLCWA",
    log_path=None,
):
    """Train embeddings on a literal-free graph; deterministic given seed.

    The loss for each epoch is recorded before that epoch's update, so
    loss_history[0] is the loss of the initial parameters and the
    history has exactly `epochs` entries.
    """
    if g.has_literals():
        raise DataError("training graph must not contain literal objects")
    if g.num_triples < 1:
        raise DataError("training graph has no triples")
    table = kge.init_embeddings(config, g.num_entities, g.num_relations, seed)
    params = {"entities": table.entities, "relations": table.relations}
    if config.conv is not None:
        params.update(_conv_param_dict(config.conv))
    adam = AdamState.for_params(params)
    neg_rng = rngmod.stream(seed, "negatives", config.model)
    batch_rng = rngmod.stream(seed, "batches", config.model)
    positives = np.array(
        [(t.subject, t.predicate, t.object) for t in g.triples], dtype=np.intp
    )
    n = len(positives)
    history = []
    for epoch in range(epochs):
        neg = sample_negatives(
            g, positives, loss.negatives_per_positive, sampling_mode, neg_rng
        )
        epoch_loss, _, _ = _batch_loss(config, table, loss, positives, neg)
        if not np.isfinite(epoch_loss):
            raise NumericalError(f"loss diverged at epoch {epoch}")
        history.append(epoch_loss)
        if n <= FULL_BATCH_LIMIT:
            batches = [np.arange(n)]
        else:
            order = batch_rng.permutation(n)
            batches = [
                order[i : i + MINI_BATCH] for i in range(0, n, MINI_BATCH)
            ]
        for idx in batches:
            _, rows, coeff = _batch_loss(
                config, table, loss, positives[idx], neg[idx]
            )
            grads = _accumulate_grads(config, table, rows, coeff)
            adam_step(params, grads, adam, lr)
    state = TrainState(
        epoch=len(history), loss_history=history, adam_moments=adam,
        rng_seed=seed,
    )
    if log_path is not None:
        save_training_log(state, log_path)
    return table, state


def save_training_log(state, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "relative_loss"])
        first = state.loss_history[0] if state.loss_history else 0.0
        for i, value in enumerate(state.loss_history):
            ratio = 1.0 if first == 0.0 else value / first
            writer.writerow([i, repr(value), repr(ratio)])


# ------------------------------------------------------------ random search

@dataclass(frozen=True)
class HpoSpec:
    loss_kinds: tuple = LOSS_KINDS
    margin_range: tuple = (1, 10)
    bias_range: tuple = (0, 20)
    dimension_range: tuple = (100, 400)
    negatives_range: tuple = (10, 100)
    trials: int = 20
    epochs: int = 100
    lr: float = 1e-3

    def __post_init__(self):
        if self.trials < 1:
            raise DataError(f"trials must be >= 1, got {self.trials}")


@dataclass
class Trial:
    config: object
    loss: LossConfig
    relative_loss: float
    error: str = None


@dataclass
class SearchResult:
    config: object
    loss: LossConfig
    relative_loss: float
    trials: list = field(default_factory=list)


def _draw_trial(model, spec, trial_rng):
    def draw_int(lo_hi):
        return int(trial_rng.integers(lo_hi[0], lo_hi[1] + 1))

    kind = spec.loss_kinds[int(trial_rng.integers(len(spec.loss_kinds)))]
    margin = draw_int(spec.margin_range)
    bias = draw_int(spec.bias_range)
    k = draw_int(spec.dimension_range)
    eta = draw_int(spec.negatives_range)
    config = kge.KgeConfig(model, k=k, bias=float(bias))
    if model in kge.CONV_MODELS:
        config = kge.with_conv(config, seed=draw_int((0, 2**31 - 2)))
    loss = LossConfig(kind, margin=float(margin), negatives_per_positive=eta)
    return config, loss


def random_search(g, model, spec, seed, sampling_mode="sLCWA", log_path=None):
    """Uniform random search; returns the trial with the lowest relative loss."""
    trials = []
    best = None
    for i in range(spec.trials):
        trial_rng = rngmod.stream(seed, "hpo-trial", str(i))
        config, loss = _draw_trial(model, spec, trial_rng)
        try:
            _, state = train_kge(
                g, config, loss, spec.epochs, spec.lr,
                seed=int(trial_rng.integers(2**31)),
                sampling_mode=sampling_mode,
            )
            rl = relative_loss(state)
            trials.append(Trial(config, loss, rl))
        except NumericalError as exc:
            trials.append(Trial(config, loss, float("inf"), error=str(exc)))
            continue
        if best is None or rl < best.relative_loss:
            best = trials[-1]
    if best is None:
        raise NumericalError("all random-search trials diverged")
    if log_path is not None:
        save_hpo_log(trials, log_path)
    return SearchResult(best.config, best.loss, best.relative_loss, trials)


def save_hpo_log(trials, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["trial", "model", "k", "bias", "loss_kind", "margin",
             "negatives", "relative_loss", "error"]
        )
        for i, t in enumerate(trials):
            writer.writerow(
                [i, t.config.model, t.config.k, t.config.bias, t.loss.kind,
                 t.loss.margin, t.loss.negatives_per_positive,
                 repr(t.relative_loss), t.error or ""]
            )
