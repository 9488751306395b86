"""Binary effect classifier: an MLP over (chemical, species, concentration).

Three variants share one architecture and one training engine:
one_hot learns entity representations from scratch, pretrained looks up
frozen embedding rows, and finetune updates embedding copies jointly with
graph-embedding losses. Every hidden layer is dense -> ReLU -> inverted
dropout -> non-affine batch normalization with running statistics.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import kge, rng as rngmod, train as trainmod
from .errors import DataError, NumericalError
from .train import AdamState, LossConfig, adam_step, sample_negatives

EMBEDDING_SOURCES = ("one_hot", "pretrained", "finetune")
BN_EPS = 1e-5
BCE_CLAMP = 1e-7


# ------------------------------------------------------------ configuration

@dataclass(frozen=True)
class MlpConfig:
    embedding_source: str
    k: int = 32
    chem_units: tuple = ()
    species_units: tuple = ()
    kappa_units: tuple = ()
    trunk_units: tuple = (16,)
    dropout_rate: float = 0.2
    norm_momentum: float = 0.99

    def __post_init__(self):
        if self.embedding_source not in EMBEDDING_SOURCES:
            raise DataError(
                f"unknown embedding source {self.embedding_source!r}"
            )
        if self.k < 1:
            raise DataError(f"embedding width must be >= 1, got {self.k}")
        for name in ("chem_units", "species_units", "kappa_units", "trunk_units"):
            units = getattr(self, name)
            object.__setattr__(self, name, tuple(int(u) for u in units))
            if any(u < 1 for u in getattr(self, name)):
                raise DataError(f"{name} entries must be >= 1")
        if len(self.trunk_units) < 1:
            raise DataError("the trunk needs at least one hidden layer")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise DataError(
                f"dropout rate must be in [0, 1), got {self.dropout_rate}"
            )
        if not 0.0 <= self.norm_momentum < 1.0:
            raise DataError("norm momentum must be in [0, 1)")

    @property
    def is_simple(self):
        return (
            not self.chem_units
            and not self.species_units
            and not self.kappa_units
            and len(self.trunk_units) == 1
        )

    def layer_spec(self):
        def fmt(units):
            return "(" + ",".join(str(u) for u in units) + ")"

        return "/".join(
            fmt(u)
            for u in (
                self.chem_units,
                self.species_units,
                self.kappa_units,
                self.trunk_units,
            )
        )


def parse_layer_spec(text):
    parts = text.split("/")
    if len(parts) != 4:
        raise DataError(f"layer spec needs 4 sections, got {text!r}")
    out = []
    for part in parts:
        if not (part.startswith("(") and part.endswith(")")):
            raise DataError(f"malformed layer spec section {part!r}")
        inner = part[1:-1]
        out.append(
            tuple(int(u) for u in inner.split(",")) if inner else ()
        )
    return tuple(out)


@dataclass(frozen=True)
class FtConfig:
    alpha_c: float = 1.0
    alpha_s: float = 1.0
    alpha_mlp: float = 1.0
    lr_scale: float = 0.01
    negatives_per_positive: int = 1
    kge_loss: str = "pointwise_logistic"

    def __post_init__(self):
        for name in ("alpha_c", "alpha_s", "alpha_mlp"):
            if getattr(self, name) < 0:
                raise DataError(f"{name} must be >= 0")
        if not self.lr_scale > 0:
            raise DataError("lr_scale must be positive")


# ----------------------------------------------------------------- weights

@dataclass
class Layer:
    w: np.ndarray
    b: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray

    def copy(self):
        return Layer(
            self.w.copy(), self.b.copy(),
            self.running_mean.copy(), self.running_var.copy(),
        )


@dataclass
class MlpWeights:
    w_c: np.ndarray
    w_s: np.ndarray
    chem: list
    species: list
    kappa: list
    trunk: list
    w_out: np.ndarray
    b_out: np.ndarray

    def copy(self):
        return MlpWeights(
            w_c=self.w_c.copy(),
            w_s=self.w_s.copy(),
            chem=[l.copy() for l in self.chem],
            species=[l.copy() for l in self.species],
            kappa=[l.copy() for l in self.kappa],
            trunk=[l.copy() for l in self.trunk],
            w_out=self.w_out.copy(),
            b_out=self.b_out.copy(),
        )

    def restore_from(self, other):
        """Copy another weight set's values into this one's arrays."""
        self.w_c[...] = other.w_c
        self.w_s[...] = other.w_s
        for mine, theirs in zip(self._all_layers(), other._all_layers()):
            mine.w[...] = theirs.w
            mine.b[...] = theirs.b
            mine.running_mean[...] = theirs.running_mean
            mine.running_var[...] = theirs.running_var
        self.w_out[...] = other.w_out
        self.b_out[...] = other.b_out

    def _all_layers(self):
        return [*self.chem, *self.species, *self.kappa, *self.trunk]

    def param_dict(self, trainable_embeddings=True):
        """Name -> array views for the optimizer; batch-norm statistics are
        state, not parameters, and are excluded."""
        params = {}
        if trainable_embeddings:
            params["w_c"] = self.w_c
            params["w_s"] = self.w_s
        for section, layers in (
            ("chem", self.chem), ("species", self.species),
            ("kappa", self.kappa), ("trunk", self.trunk),
        ):
            for i, layer in enumerate(layers):
                params[f"{section}{i}_w"] = layer.w
                params[f"{section}{i}_b"] = layer.b
        params["w_out"] = self.w_out
        params["b_out"] = self.b_out
        return params

    def parameter_count(self, trainable_embeddings=True):
        return sum(a.size for a in self.param_dict(trainable_embeddings).values())


def _glorot(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _build_section(config, seed, section, units, in_dim):
    layers = []
    for i, out_dim in enumerate(units):
        rng = rngmod.stream(seed, "clf-init", f"{section}{i}")
        layers.append(
            Layer(
                w=_glorot(rng, in_dim, out_dim),
                b=np.zeros(out_dim),
                running_mean=np.zeros(out_dim),
                running_var=np.ones(out_dim),
            )
        )
        in_dim = out_dim
    return layers, in_dim


def build_mlp(config, seed, n_chemicals=None, n_species=None, pretrained=None):
    """Create classifier weights.

    `pretrained` is a (chemical_rows, species_rows) array pair, required
    exactly when embedding_source is not one_hot; one_hot instead needs
    n_chemicals/n_species for the trainable lookup tables.
    """
    if config.embedding_source == "one_hot":
        if pretrained is not None:
            raise DataError("one_hot variant does not take pretrained tables")
        if not n_chemicals or not n_species:
            raise DataError("one_hot variant needs n_chemicals and n_species")
        w_c = _glorot(
            rngmod.stream(seed, "clf-init", "w_c"), n_chemicals, config.k
        )
        w_s = _glorot(
            rngmod.stream(seed, "clf-init", "w_s"), n_species, config.k
        )
    else:
        if pretrained is None:
            raise DataError(
                f"{config.embedding_source} variant needs pretrained tables"
            )
        w_c = np.array(pretrained[0], dtype=np.float64)
        w_s = np.array(pretrained[1], dtype=np.float64)
        for name, arr in (("chemical", w_c), ("species", w_s)):
            if arr.ndim != 2 or arr.shape[1] != config.k:
                raise DataError(
                    f"{name} table width {arr.shape} does not match "
                    f"k={config.k}"
                )
    chem, chem_out = _build_section(config, seed, "chem", config.chem_units, config.k)
    species, species_out = _build_section(
        config, seed, "species", config.species_units, config.k
    )
    kappa, kappa_out = _build_section(config, seed, "kappa", config.kappa_units, 1)
    trunk_in = chem_out + species_out + kappa_out
    trunk, trunk_out = _build_section(config, seed, "trunk", config.trunk_units, trunk_in)
    rng = rngmod.stream(seed, "clf-init", "out")
    return MlpWeights(
        w_c=w_c, w_s=w_s, chem=chem, species=species, kappa=kappa, trunk=trunk,
        w_out=_glorot(rng, trunk_out, 1), b_out=np.zeros(1),
    )


# ------------------------------------------------------------------ forward

def _sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _layer_forward(layer, x, config, train_mode, drop_rng, update_running):
    z = x @ layer.w + layer.b
    a = np.maximum(z, 0.0)
    mask = None
    if train_mode and config.dropout_rate > 0.0:
        keep = 1.0 - config.dropout_rate
        mask = (drop_rng.random(a.shape) >= config.dropout_rate) / keep
        d = a * mask
    else:
        d = a
    if train_mode:
        mean = d.mean(axis=0)
        var = d.var(axis=0)
        if update_running:
            m = config.norm_momentum
            layer.running_mean = m * layer.running_mean + (1 - m) * mean
            layer.running_var = m * layer.running_var + (1 - m) * var
    else:
        mean = layer.running_mean
        var = layer.running_var
    inv = 1.0 / np.sqrt(var + BN_EPS)
    y = (d - mean) * inv
    cache = (x, z, mask, y, inv, train_mode)
    return y, cache


def _layer_backward(layer, g, cache):
    x, z, mask, y, inv, train_mode = cache
    if train_mode:
        # non-affine batch-norm backward with batch statistics
        gd = inv * (
            g - g.mean(axis=0) - y * (g * y).mean(axis=0)
        )
    else:
        gd = g * inv
    ga = gd if mask is None else gd * mask
    gz = ga * (z > 0.0)
    gw = x.T @ gz
    gb = gz.sum(axis=0)
    gx = gz @ layer.w.T
    return gx, gw, gb


def _forward_full(weights, config, c_ids, s_ids, kappa, train_mode,
                  drop_rng=None, update_running=True):
    x_c = weights.w_c[c_ids]
    x_s = weights.w_s[s_ids]
    x_k = np.asarray(kappa, dtype=np.float64)[:, None]
    caches = {"chem": [], "species": [], "kappa": [], "trunk": []}
    for section, layers in (("chem", weights.chem), ("species", weights.species),
                            ("kappa", weights.kappa)):
        x = {"chem": x_c, "species": x_s, "kappa": x_k}[section]
        for layer in layers:
            x, cache = _layer_forward(
                layer, x, config, train_mode, drop_rng, update_running
            )
            caches[section].append(cache)
        caches[section + "_out"] = x
    parts = (caches["chem_out"], caches["species_out"], caches["kappa_out"])
    x = np.concatenate(parts, axis=1)
    caches["concat_widths"] = tuple(p.shape[1] for p in parts)
    for layer in weights.trunk:
        x, cache = _layer_forward(
            layer, x, config, train_mode, drop_rng, update_running
        )
        caches["trunk"].append(cache)
    logit = (x @ weights.w_out + weights.b_out)[:, 0]
    caches["trunk_out"] = x
    yhat = _sigmoid(logit)
    return yhat, caches


def forward(weights, config, c_ids, s_ids, kappa, train_mode=False,
            drop_rng=None):
    """Predicted probabilities for a batch of (chemical, species, kappa)."""
    c_ids = np.asarray(c_ids, dtype=np.intp)
    s_ids = np.asarray(s_ids, dtype=np.intp)
    if train_mode and config.dropout_rate > 0.0 and drop_rng is None:
        raise DataError("train_mode forward needs a dropout rng")
    yhat, _ = _forward_full(
        weights, config, c_ids, s_ids, kappa, train_mode, drop_rng
    )
    return yhat


def bce_loss(yhat, labels):
    """Mean binary cross-entropy with predictions clamped away from 0/1."""
    yhat = np.clip(np.asarray(yhat, dtype=np.float64), BCE_CLAMP, 1 - BCE_CLAMP)
    y = np.asarray(labels, dtype=np.float64)
    return float(-np.mean(y * np.log(yhat) + (1 - y) * np.log(1 - yhat)))


def _backward_full(weights, config, caches, c_ids, s_ids, dlogit,
                   trainable_embeddings):
    grads = {}
    g = dlogit[:, None] @ weights.w_out.T
    grads["w_out"] = caches["trunk_out"].T @ dlogit[:, None]
    grads["b_out"] = np.array([dlogit.sum()])
    for i in range(len(weights.trunk) - 1, -1, -1):
        g, gw, gb = _layer_backward(weights.trunk[i], g, caches["trunk"][i])
        grads[f"trunk{i}_w"] = gw
        grads[f"trunk{i}_b"] = gb
    wc_width, ws_width, _ = caches["concat_widths"]
    g_c = g[:, :wc_width]
    g_s = g[:, wc_width : wc_width + ws_width]
    g_k = g[:, wc_width + ws_width :]
    for section, layers, gsec in (
        ("chem", weights.chem, g_c),
        ("species", weights.species, g_s),
        ("kappa", weights.kappa, g_k),
    ):
        for i in range(len(layers) - 1, -1, -1):
            gsec, gw, gb = _layer_backward(layers[i], gsec, caches[section][i])
            grads[f"{section}{i}_w"] = gw
            grads[f"{section}{i}_b"] = gb
        if section == "chem":
            g_c = gsec
        elif section == "species":
            g_s = gsec
    if trainable_embeddings:
        gwc = np.zeros_like(weights.w_c)
        gws = np.zeros_like(weights.w_s)
        np.add.at(gwc, c_ids, g_c)
        np.add.at(gws, s_ids, g_s)
        grads["w_c"] = gwc
        grads["w_s"] = gws
    return grads


def loss_and_grads(weights, config, c_ids, s_ids, kappa, labels,
                   drop_rng=None, trainable_embeddings=True):
    """Training-mode BCE and exact gradients for every trainable array."""
    c_ids = np.asarray(c_ids, dtype=np.intp)
    s_ids = np.asarray(s_ids, dtype=np.intp)
    y = np.asarray(labels, dtype=np.float64)
    if config.dropout_rate > 0.0 and drop_rng is None:
        raise DataError("training with dropout needs a dropout rng")
    yhat, caches = _forward_full(
        weights, config, c_ids, s_ids, kappa, train_mode=True,
        drop_rng=drop_rng,
    )
    value = bce_loss(yhat, y)
    dlogit = (yhat - y) / len(y)
    grads = _backward_full(
        weights, config, caches, c_ids, s_ids, dlogit, trainable_embeddings
    )
    return value, grads


def predict(weights, config, c_ids, s_ids, kappa, threshold=0.5):
    """Binary labels via the strict rule yhat > threshold, plus raw yhat."""
    yhat = forward(weights, config, c_ids, s_ids, kappa, train_mode=False)
    return (yhat > threshold).astype(int), yhat


# -------------------------------------------------------------- batch prep

def records_to_arrays(records, chem_index, species_index):
    """Map labeled effect records to (c_ids, s_ids, kappa, labels)."""
    c_ids = np.empty(len(records), dtype=np.intp)
    s_ids = np.empty(len(records), dtype=np.intp)
    kappa = np.empty(len(records))
    labels = np.empty(len(records))
    for i, rec in enumerate(records):
        if rec.chemical not in chem_index:
            raise DataError(f"chemical {rec.chemical!r} has no embedding row")
        if rec.species not in species_index:
            raise DataError(f"species {rec.species!r} has no embedding row")
        if rec.label not in (0, 1):
            raise DataError(
                f"record ({rec.chemical}, {rec.species}) is unlabeled"
            )
        c_ids[i] = chem_index[rec.chemical]
        s_ids[i] = species_index[rec.species]
        kappa[i] = rec.concentration
        labels[i] = rec.label
    return c_ids, s_ids, kappa, labels


# ------------------------------------------------------------ training core

DEFAULT_PATIENCE = 10
DEFAULT_BATCH = 256


class _NoExtra:
    """Joint-loss hook used by plain classifier training: contributes nothing."""

    def params(self):
        return {}

    def begin_epoch(self, n):
        return None

    def add_batch(self, grads, start, count):
        return 0.0

    def snapshot(self):
        return None

    def restore(self, snap):
        return None

    def epoch_summary(self, history):
        return None


def _fit(weights, config, train_arrays, val_arrays, epochs, lr, seed,
         patience, batch_size, extra=None):
    extra = extra or _NoExtra()
    c_tr, s_tr, k_tr, y_tr = train_arrays
    c_va, s_va, k_va, y_va = val_arrays
    n = len(y_tr)
    if n == 0:
        raise DataError("training partition is empty")
    if len(y_va) == 0:
        raise DataError("validation partition is empty")
    trainable_emb = config.embedding_source != "pretrained"
    params = weights.param_dict(trainable_embeddings=trainable_emb)
    params.update(extra.params())
    adam = AdamState.for_params(params)
    shuffle_rng = rngmod.stream(seed, "clf-shuffle")
    drop_rng = rngmod.stream(seed, "clf-dropout")
    history = {"train_loss": [], "val_loss": [], "best_epoch": -1,
               "stopped_epoch": -1}
    best_val = np.inf
    best_weights = None
    best_extra = None
    bad = 0
    for epoch in range(epochs):
        order = shuffle_rng.permutation(n)
        extra.begin_epoch(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            value, grads = loss_and_grads(
                weights, config, c_tr[idx], s_tr[idx], k_tr[idx], y_tr[idx],
                drop_rng=drop_rng, trainable_embeddings=trainable_emb,
            )
            extra.add_batch(grads, start, len(idx))
            adam_step(params, grads, adam, lr)
            total += value * len(idx)
        train_loss = total / n
        val_yhat = forward(weights, config, c_va, s_va, k_va, train_mode=False)
        val_loss = bce_loss(val_yhat, y_va)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise NumericalError(f"classifier loss diverged at epoch {epoch}")
        history["train_loss"].append(train_loss)
        history["val_loss"].append(val_loss)
        extra.epoch_summary(history)
        if val_loss < best_val:
            best_val = val_loss
            best_weights = weights.copy()
            best_extra = extra.snapshot()
            history["best_epoch"] = epoch
            bad = 0
        else:
            bad += 1
            if bad >= patience:
                history["stopped_epoch"] = epoch
                break
    if best_weights is not None:
        weights.restore_from(best_weights)
        extra.restore(best_extra)
    return history


def train_classifier(weights, config, splits, chem_index, species_index,
                     epochs, lr=1e-3, seed=0, patience=DEFAULT_PATIENCE,
                     batch_size=DEFAULT_BATCH):
    """Adam on BCE with early stopping on validation loss (restore best)."""
    train_arrays = records_to_arrays(splits.train, chem_index, species_index)
    val_arrays = records_to_arrays(splits.validation, chem_index, species_index)
    return _fit(
        weights, config, train_arrays, val_arrays, epochs, lr, seed,
        patience, batch_size,
    )


# ------------------------------------------------------------- fine-tuning

class _JointKgeExtra:
    """Adds weighted KGE losses over both graphs to each classifier batch.

    The classifier's embedding matrices serve directly as the entity
    tables, so MLP gradients and graph-loss gradients meet in the same
    arrays. Relation tables (and convolution parameters) train alongside.
    """

    def __init__(self, weights, ft, chem_kge, species_kge, seed):
        self.ft = ft
        self.sides = []
        for tag, alpha, (config, table, graph), w_emb in (
            ("chem", ft.alpha_c, chem_kge, weights.w_c),
            ("species", ft.alpha_s, species_kge, weights.w_s),
        ):
            if table.entities.shape != w_emb.shape:
                raise DataError(
                    f"{tag} embedding table shape {table.entities.shape} "
                    f"does not match classifier matrix {w_emb.shape}"
                )
            view = kge.EmbeddingTable(
                entities=w_emb,
                relations=table.relations.copy(),
                representation=table.representation,
            )
            if config.conv is not None:
                config = replace(config, conv=config.conv.copy())
            loss = LossConfig(
                ft.kge_loss,
                negatives_per_positive=ft.negatives_per_positive,
            )
            triples = np.array(
                [(t.subject, t.predicate, t.object) for t in graph.triples],
                dtype=np.intp,
            )
            self.sides.append(
                {
                    "tag": tag, "alpha": alpha, "config": config,
                    "table": view, "graph": graph, "loss": loss,
                    "triples": triples,
                    "triple_rng": rngmod.stream(seed, "ft-triples", tag),
                    "neg_rng": rngmod.stream(seed, "ft-negatives", tag),
                    "epoch_pos": None, "epoch_neg": None, "epoch_loss": 0.0,
                }
            )

    def params(self):
        out = {}
        for side in self.sides:
            out[f"{side['tag']}_relations"] = side["table"].relations
            conv = side["config"].conv
            if conv is not None:
                out[f"{side['tag']}_conv_filters"] = conv.filters
                out[f"{side['tag']}_conv_filter_bias"] = conv.filter_bias
                out[f"{side['tag']}_conv_dense"] = conv.dense
                out[f"{side['tag']}_conv_dense_bias"] = conv.dense_bias
        return out

    def begin_epoch(self, n):
        for side in self.sides:
            picks = side["triple_rng"].integers(len(side["triples"]), size=n)
            pos = side["triples"][picks]
            neg = sample_negatives(
                side["graph"], pos, self.ft.negatives_per_positive,
                "sLCWA", side["neg_rng"],
            )
            side["epoch_pos"] = pos
            side["epoch_neg"] = neg
            side["epoch_loss"] = 0.0

    def add_batch(self, grads, start, count):
        total = 0.0
        for side in self.sides:
            pos = side["epoch_pos"][start : start + count]
            neg = side["epoch_neg"][start : start + count]
            value, rows, coeff = trainmod._batch_loss(
                side["config"], side["table"], side["loss"], pos, neg
            )
            side["epoch_loss"] += value
            alpha = side["alpha"]
            total += alpha * value
            if alpha == 0.0:
                continue
            kge_grads = trainmod._accumulate_grads(
                side["config"], side["table"], rows, coeff
            )
            tag = side["tag"]
            emb_key = "w_c" if tag == "chem" else "w_s"
            if emb_key in grads:
                grads[emb_key] += alpha * kge_grads["entities"]
            grads[f"{tag}_relations"] = alpha * kge_grads["relations"]
            for name in ("filters", "filter_bias", "dense", "dense_bias"):
                if name in kge_grads:
                    grads[f"{tag}_conv_{name}"] = alpha * kge_grads[name]
        return total

    def snapshot(self):
        snap = []
        for side in self.sides:
            conv = side["config"].conv
            snap.append(
                (
                    side["table"].relations.copy(),
                    None if conv is None else conv.copy(),
                )
            )
        return snap

    def restore(self, snap):
        if snap is None:
            return
        for side, (relations, conv) in zip(self.sides, snap):
            side["table"].relations[...] = relations
            if conv is not None:
                live = side["config"].conv
                live.filters[...] = conv.filters
                live.filter_bias[...] = conv.filter_bias
                live.dense[...] = conv.dense
                live.dense_bias[...] = conv.dense_bias

    def epoch_summary(self, history):
        for side in self.sides:
            history.setdefault(f"kge_loss_{side['tag']}", []).append(
                side["epoch_loss"]
            )

    def final_tables(self, weights):
        out = {}
        for side in self.sides:
            emb = weights.w_c if side["tag"] == "chem" else weights.w_s
            out[side["tag"]] = kge.EmbeddingTable(
                entities=emb,
                relations=side["table"].relations,
                representation=side["table"].representation,
            )
        return out


def fine_tune(weights, config, ft, chem_kge, species_kge, splits, epochs,
              lr=1e-3, seed=0, patience=DEFAULT_PATIENCE,
              batch_size=DEFAULT_BATCH):
    """Joint training of classifier and embeddings at lr * lr_scale.

    `weights` must come from the pre-trained baseline (embedding matrices
    initialized from the KGE tables); early stopping watches the
    validation BCE only. Returns (history, tables) with the fine-tuned
    entity/relation tables.
    """
    if weights is None:
        raise DataError("fine-tuning needs pre-trained baseline weights")
    if config.embedding_source != "finetune":
        raise DataError(
            "fine-tuning needs embedding_source='finetune', got "
            f"{config.embedding_source!r}"
        )
    chem_graph = chem_kge[2]
    species_graph = species_kge[2]
    chem_index = chem_graph.entity_ids
    species_index = species_graph.entity_ids
    train_arrays = records_to_arrays(splits.train, chem_index, species_index)
    val_arrays = records_to_arrays(splits.validation, chem_index, species_index)
    extra = _JointKgeExtra(weights, ft, chem_kge, species_kge, seed)
    history = _fit(
        weights, config, train_arrays, val_arrays, epochs, lr * ft.lr_scale,
        seed, patience, batch_size, extra=extra,
    )
    return history, extra.final_tables(weights)


# -------------------------------------------------------------- checkpoints

def _write_array(fh, name, arr):
    dims = " ".join(str(d) for d in arr.shape)
    fh.write(f"array {name} {dims}\n")
    fh.write(" ".join(repr(float(v)) for v in arr.ravel()) + "\n")


def save_classifier(weights, config, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"clf-ckpt 1 {config.embedding_source} {config.k} "
            f"{config.layer_spec()}\n"
        )
        fh.write(f"meta dropout {config.dropout_rate!r}\n")
        fh.write(f"meta momentum {config.norm_momentum!r}\n")
        _write_array(fh, "w_c", weights.w_c)
        _write_array(fh, "w_s", weights.w_s)
        for section, layers in (
            ("chem", weights.chem), ("species", weights.species),
            ("kappa", weights.kappa), ("trunk", weights.trunk),
        ):
            for i, layer in enumerate(layers):
                _write_array(fh, f"{section}{i}_w", layer.w)
                _write_array(fh, f"{section}{i}_b", layer.b)
                _write_array(fh, f"{section}{i}_mean", layer.running_mean)
                _write_array(fh, f"{section}{i}_var", layer.running_var)
        _write_array(fh, "w_out", weights.w_out)
        _write_array(fh, "b_out", weights.b_out)


def load_classifier(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataError(f"{path}: empty checkpoint")
    header = lines[0].split()
    if len(header) != 5 or header[0] != "clf-ckpt":
        raise DataError(f"{path}: bad checkpoint header: {lines[0]!r}")
    if header[1] != "1":
        raise DataError(f"{path}: unsupported checkpoint version {header[1]!r}")
    source = header[2]
    try:
        k = int(header[3])
    except ValueError:
        raise DataError(f"{path}: non-integer width in header") from None
    chem_u, species_u, kappa_u, trunk_u = parse_layer_spec(header[4])
    meta = {"dropout": 0.2, "momentum": 0.99}
    arrays = {}
    idx = 1
    while idx < len(lines):
        parts = lines[idx].split()
        if not parts:
            idx += 1
            continue
        if parts[0] == "meta":
            if parts[1] not in meta:
                raise DataError(f"{path}:{idx + 1}: unknown meta key {parts[1]!r}")
            meta[parts[1]] = float(parts[2])
            idx += 1
        elif parts[0] == "array":
            name = parts[1]
            shape = tuple(int(d) for d in parts[2:])
            if idx + 1 >= len(lines):
                raise DataError(f"{path}: truncated checkpoint at {name!r}")
            values = lines[idx + 1].split()
            size = int(np.prod(shape)) if shape else 1
            if len(values) != size:
                raise DataError(
                    f"{path}: array {name!r} expected {size} values, got "
                    f"{len(values)}"
                )
            try:
                arrays[name] = np.array(
                    [float(v) for v in values], dtype=np.float64
                ).reshape(shape)
            except ValueError:
                raise DataError(f"{path}: non-numeric value in {name!r}") from None
            idx += 2
        else:
            raise DataError(f"{path}:{idx + 1}: unexpected section {parts[0]!r}")
    config = MlpConfig(
        embedding_source=source, k=k, chem_units=chem_u,
        species_units=species_u, kappa_units=kappa_u, trunk_units=trunk_u,
        dropout_rate=meta["dropout"], norm_momentum=meta["momentum"],
    )

    def take(name):
        if name not in arrays:
            raise DataError(f"{path}: checkpoint missing array {name!r}")
        return arrays[name]

    def section(name, units):
        layers = []
        for i in range(len(units)):
            layers.append(
                Layer(
                    w=take(f"{name}{i}_w"), b=take(f"{name}{i}_b"),
                    running_mean=take(f"{name}{i}_mean"),
                    running_var=take(f"{name}{i}_var"),
                )
            )
        return layers

    weights = MlpWeights(
        w_c=take("w_c"), w_s=take("w_s"),
        chem=section("chem", chem_u), species=section("species", species_u),
        kappa=section("kappa", kappa_u), trunk=section("trunk", trunk_u),
        w_out=take("w_out"), b_out=take("b_out"),
    )
    if weights.w_c.shape[1] != k or weights.w_s.shape[1] != k:
        raise DataError(f"{path}: embedding width does not match header k={k}")
    return config, weights
