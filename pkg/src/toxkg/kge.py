"""Embedding storage and the nine triple-scoring models with exact gradients.

Row layouts (column conventions inside a table row):

* real models (DistMult, HolE, TransE, ConvKB, ConvE): width k.
* complex models (ComplEx; RotatE entities): width 2k, interleaved Re/Im.
* RotatE relations and both pRotatE tables store phases only (width k);
  RotatE relation moduli are fixed to 1 structurally.
* HAKE: width 2k, interleaved (modulus, phase).

Scoring polarity: decomposition and convolutional models return
"higher = more plausible"; the geometric models (TransE, RotatE, pRotatE,
HAKE) return distances. ``plausibility`` normalizes direction for losses as
``score`` or ``bias - score``.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError
from .kernels import backend
from .rng import stream

GEOMETRIC_MODELS = frozenset({"transe", "rotate", "protate", "hake"})
CONV_MODELS = frozenset({"convkb", "conve"})

# per-model: (representation, entity width multiplier, relation width multiplier)
_LAYOUT = {
    "distmult": ("real", 1, 1),
    "complex": ("complex", 2, 2),
    "hole": ("real", 1, 1),
    "transe": ("real", 1, 1),
    "rotate": ("complex", 2, 1),
    "protate": ("real", 1, 1),
    "hake": ("modulus-phase", 2, 2),
    "convkb": ("real", 1, 1),
    "conve": ("real", 1, 1),
}

MODEL_NAMES = tuple(_LAYOUT)


def representation_of(model):
    return _LAYOUT[model][0]


def entity_width(model, k):
    return _LAYOUT[model][1] * k


def relation_width(model, k):
    return _LAYOUT[model][2] * k


def is_geometric(model):
    return model in GEOMETRIC_MODELS


def conve_reshape(k):
    """Near-square factorization: rows = largest divisor of k <= sqrt(k)."""
    rows = 1
    for r in range(1, int(math.isqrt(k)) + 1):
        if k % r == 0:
            rows = r
    return rows, k // rows


@dataclass
class ConvParams:
    """Trainable convolution parameters.

    filters: (n_filters, fh, fw); dense: (hidden, out_dim) where hidden is the
    flattened ReLU feature map (C order) and out_dim is 1 for ConvKB, k for
    ConvE. reshape=(rows, cols) is the ConvE image factorization of k.
    """

    filters: np.ndarray
    filter_bias: np.ndarray
    dense: np.ndarray
    dense_bias: np.ndarray
    reshape: tuple = None

    def copy(self):
        return ConvParams(
            self.filters.copy(),
            self.filter_bias.copy(),
            self.dense.copy(),
            self.dense_bias.copy(),
            self.reshape,
        )


def init_conv_params(model, k, seed, n_filters=8, filter_shape=None, reshape=None):
    """Glorot-uniform filters/dense, zero biases. ConvKB filters are fixed at
    1x3 (spanning the [e_sb; e_p; e_ob] columns); ConvE defaults to 3x3
    clamped to the stacked image dimensions."""
    rng = stream(seed, "conv-init", model)
    if model == "convkb":
        fh, fw = 1, 3
        hidden, out_dim = n_filters * k, 1
    elif model == "conve":
        if reshape is None:
            reshape = conve_reshape(k)
        rows, cols = reshape
        if rows * cols != k or rows < 1 or cols < 1:
            raise DataError(f"reshape {reshape} does not factor k={k}")
        fh, fw = filter_shape if filter_shape else (3, 3)
        fh, fw = min(fh, 2 * rows), min(fw, cols)
        oh, ow = 2 * rows - fh + 1, cols - fw + 1
        if oh < 1 or ow < 1:
            raise DataError(f"filter {fh}x{fw} does not fit image {2*rows}x{cols}")
        hidden, out_dim = n_filters * oh * ow, k
    else:
        raise DataError(f"{model} takes no convolution parameters")
    f_limit = math.sqrt(6.0 / (fh * fw + n_filters))
    d_limit = math.sqrt(6.0 / (hidden + out_dim))
    return ConvParams(
        filters=rng.uniform(-f_limit, f_limit, size=(n_filters, fh, fw)),
        filter_bias=np.zeros(n_filters),
        dense=rng.uniform(-d_limit, d_limit, size=(hidden, out_dim)),
        dense_bias=np.zeros(out_dim),
        reshape=reshape if model == "conve" else None,
    )


@dataclass
class KgeConfig:
    """Scoring configuration for one embedding model."""

    model: str
    k: int
    norm_order: int = 2
    bias: float = 0.0
    modulus_constraint: float = 1.0
    conv: ConvParams = None

    def __post_init__(self):
        if self.model not in _LAYOUT:
            raise DataError(f"unknown model {self.model!r}")
        if self.k < 1:
            raise DataError(f"k must be >= 1, got {self.k}")
        if self.norm_order not in (1, 2):
            raise DataError(f"norm_order must be 1 or 2, got {self.norm_order}")
        if self.bias < 0:
            raise DataError(f"bias must be >= 0, got {self.bias}")
        if self.modulus_constraint <= 0:
            raise DataError(
                f"modulus_constraint must be > 0, got {self.modulus_constraint}"
            )

    @property
    def representation(self):
        return representation_of(self.model)


def with_conv(config, seed=0, **kwargs):
    """Return config with freshly initialized conv params when the model
    needs them and none are set."""
    if config.model in CONV_MODELS and config.conv is None:
        return replace(
            config, conv=init_conv_params(config.model, config.k, seed, **kwargs)
        )
    return config


@dataclass
class EmbeddingTable:
    entities: np.ndarray
    relations: np.ndarray
    representation: str

    @property
    def num_entities(self):
        return self.entities.shape[0]

    @property
    def num_relations(self):
        return self.relations.shape[0]

    def copy(self):
        return EmbeddingTable(
            self.entities.copy(), self.relations.copy(), self.representation
        )


def _phase_columns(model, table_kind, width):
    """Boolean mask of which columns hold phases (init range [0, 2pi))."""
    mask = np.zeros(width, dtype=bool)
    if model == "protate":
        mask[:] = True
    elif model == "rotate" and table_kind == "relations":
        mask[:] = True
    elif model == "hake":
        mask[1::2] = True
    return mask


def init_embeddings(config, n_entities, n_relations, seed):
    """Uniform init in [-6/sqrt(k), 6/sqrt(k)] per real coordinate, phases
    uniform in [0, 2pi); deterministic given seed."""
    if n_entities < 1 or n_relations < 1:
        raise DataError("need at least one entity and one relation")
    bound = 6.0 / math.sqrt(config.k)
    rng = stream(seed, "kge-init", config.model)

    def draw(n, width, table_kind):
        u = rng.uniform(size=(n, width))
        phases = _phase_columns(config.model, table_kind, width)
        out = (2.0 * u - 1.0) * bound
        out[:, phases] = u[:, phases] * (2.0 * math.pi)
        return out

    return EmbeddingTable(
        entities=draw(n_entities, entity_width(config.model, config.k), "entities"),
        relations=draw(
            n_relations, relation_width(config.model, config.k), "relations"
        ),
        representation=config.representation,
    )


def _require_conv(config):
    if config.conv is None:
        raise DataError(f"{config.model} requires convolution parameters")
    return config.conv


def score_rows(config, s, p, o):
    """Scores for already-gathered row batches (B, width)."""
    m = config.model
    if m == "distmult":
        return backend.distmult_scores(s, p, o)
    if m == "complex":
        return backend.complex_scores(s, p, o)
    if m == "hole":
        return backend.hole_scores(s, p, o)
    if m == "transe":
        return backend.transe_scores(s, p, o, config.norm_order)
    if m == "rotate":
        return backend.rotate_scores(s, p, o, config.norm_order)
    if m == "protate":
        return backend.protate_scores(
            s, p, o, config.norm_order, config.modulus_constraint
        )
    if m == "hake":
        return backend.hake_scores(s, p, o, config.norm_order)
    cv = _require_conv(config)
    if m == "convkb":
        return backend.convkb_scores(
            s, p, o, cv.filters, cv.filter_bias, cv.dense, cv.dense_bias
        )
    rows, cols = cv.reshape
    return backend.conve_scores(
        s, p, o, cv.filters, cv.filter_bias, cv.dense, cv.dense_bias, rows, cols
    )


def grad_rows(config, s, p, o, coeff):
    """Per-row score gradients scaled by coeff.

    Returns (gs, gp, go, conv_grads) where conv_grads is None for
    non-convolutional models and otherwise a dict with keys filters,
    filter_bias, dense, dense_bias already summed over the batch.
    """
    m = config.model
    if m == "distmult":
        return (*backend.distmult_grads(s, p, o, coeff), None)
    if m == "complex":
        return (*backend.complex_grads(s, p, o, coeff), None)
    if m == "hole":
        return (*backend.hole_grads(s, p, o, coeff), None)
    if m == "transe":
        return (*backend.transe_grads(s, p, o, config.norm_order, coeff), None)
    if m == "rotate":
        return (*backend.rotate_grads(s, p, o, config.norm_order, coeff), None)
    if m == "protate":
        return (
            *backend.protate_grads(
                s, p, o, config.norm_order, config.modulus_constraint, coeff
            ),
            None,
        )
    if m == "hake":
        return (*backend.hake_grads(s, p, o, config.norm_order, coeff), None)
    cv = _require_conv(config)
    if m == "convkb":
        gs, gp, go, gf, gfb, gd, gdb = backend.convkb_grads(
            s, p, o, cv.filters, cv.filter_bias, cv.dense, cv.dense_bias, coeff
        )
    else:
        rows, cols = cv.reshape
        gs, gp, go, gf, gfb, gd, gdb = backend.conve_grads(
            s,
            p,
            o,
            cv.filters,
            cv.filter_bias,
            cv.dense,
            cv.dense_bias,
            rows,
            cols,
            coeff,
        )
    return gs, gp, go, {
        "filters": gf,
        "filter_bias": gfb,
        "dense": gd,
        "dense_bias": gdb,
    }


def _gather(config, table, s_ids, p_ids, o_ids):
    s_ids = np.asarray(s_ids, dtype=np.intp)
    p_ids = np.asarray(p_ids, dtype=np.intp)
    o_ids = np.asarray(o_ids, dtype=np.intp)
    return (
        np.ascontiguousarray(table.entities[s_ids]),
        np.ascontiguousarray(table.relations[p_ids]),
        np.ascontiguousarray(table.entities[o_ids]),
    )


def score_batch(config, table, s_ids, p_ids, o_ids):
    s, p, o = _gather(config, table, s_ids, p_ids, o_ids)
    return score_rows(config, s, p, o)


def score(config, table, triple):
    """Score of one triple (subject id, predicate id, object id)."""
    return float(
        score_batch(config, table, [triple[0]], [triple[1]], [triple[2]])[0]
    )


def plausibility(config, scores):
    """Map raw scores to 'higher = more plausible' for loss functions."""
    if is_geometric(config.model):
        return config.bias - scores
    return scores


def score_direction(config):
    """dPlausibility/dScore: -1 for geometric (distance) models, else +1."""
    return -1.0 if is_geometric(config.model) else 1.0


def _check_model(config, table, expected):
    if config.model != expected:
        raise DataError(f"config is for {config.model!r}, expected {expected!r}")
    if table.representation != config.representation:
        raise DataError(
            f"table representation {table.representation!r} does not match "
            f"{expected!r} ({config.representation!r})"
        )


def _single(expected):
    def op(config, table, triple):
        _check_model(config, table, expected)
        return score(config, table, triple)

    op.__name__ = f"score_{expected}"
    return op


score_distmult = _single("distmult")
score_complex = _single("complex")
score_hole = _single("hole")
score_transe = _single("transe")
score_rotate = _single("rotate")
score_protate = _single("protate")
score_hake = _single("hake")
score_convkb = _single("convkb")
score_conve = _single("conve")


@dataclass
class ScoreGradients:
    """Exact partials of one triple's score, keyed by participating row id.
    Duplicate participants (subject == object) are summed."""

    entity: dict
    relation: dict
    conv: dict = None


def score_gradients(config, table, triple):
    s_id, p_id, o_id = triple[0], triple[1], triple[2]
    s, p, o = _gather(config, table, [s_id], [p_id], [o_id])
    gs, gp, go, conv = grad_rows(config, s, p, o, np.ones(1))
    entity = {s_id: gs[0].copy()}
    if o_id in entity:
        entity[o_id] = entity[o_id] + go[0]
    else:
        entity[o_id] = go[0].copy()
    return ScoreGradients(entity=entity, relation={p_id: gp[0].copy()}, conv=conv)


# ------------------------------------------------------------- checkpoints

def _format_row(values):
    return " ".join(repr(float(v)) for v in values)


def save_checkpoint(config, table, path):
    """Text checkpoint: header line, one row per entity, one per relation,
    then optional meta/conv sections needed to reproduce scores exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"kge-ckpt 1 {config.model} {config.k} {table.num_entities} "
            f"{table.num_relations} {table.representation}\n"
        )
        for row in table.entities:
            fh.write(_format_row(row) + "\n")
        for row in table.relations:
            fh.write(_format_row(row) + "\n")
        fh.write(f"meta norm_order {config.norm_order}\n")
        fh.write(f"meta bias {config.bias!r}\n")
        fh.write(f"meta modulus_constraint {config.modulus_constraint!r}\n")
        if config.conv is not None:
            cv = config.conv
            if cv.reshape is not None:
                fh.write(f"meta reshape {cv.reshape[0]} {cv.reshape[1]}\n")
            for name in ("filters", "filter_bias", "dense", "dense_bias"):
                arr = getattr(cv, name)
                dims = " ".join(str(d) for d in arr.shape)
                fh.write(f"conv {name} {dims}\n")
                fh.write(_format_row(arr.ravel()) + "\n")


def load_checkpoint(path):
    """Load a checkpoint; returns (KgeConfig, EmbeddingTable)."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataError(f"{path}: empty checkpoint")
    header = lines[0].split()
    if len(header) != 7 or header[0] != "kge-ckpt":
        raise DataError(f"{path}: bad checkpoint header: {lines[0]!r}")
    if header[1] != "1":
        raise DataError(f"{path}: unsupported checkpoint version {header[1]!r}")
    model = header[2]
    if model not in _LAYOUT:
        raise DataError(f"{path}: unknown model {model!r}")
    try:
        k, n_ent, n_rel = int(header[3]), int(header[4]), int(header[5])
    except ValueError:
        raise DataError(f"{path}: non-integer sizes in header") from None
    representation = header[6]
    if representation != representation_of(model):
        raise DataError(
            f"{path}: representation {representation!r} does not match {model!r}"
        )

    def parse_row(idx, width):
        if idx >= len(lines):
            raise DataError(f"{path}: truncated checkpoint at line {idx + 1}")
        parts = lines[idx].split()
        if len(parts) != width:
            raise DataError(
                f"{path}:{idx + 1}: expected {width} values, got {len(parts)}"
            )
        try:
            return [float(x) for x in parts]
        except ValueError:
            raise DataError(f"{path}:{idx + 1}: non-numeric value") from None

    e_width, r_width = entity_width(model, k), relation_width(model, k)
    entities = np.array(
        [parse_row(1 + i, e_width) for i in range(n_ent)], dtype=np.float64
    ).reshape(n_ent, e_width)
    relations = np.array(
        [parse_row(1 + n_ent + i, r_width) for i in range(n_rel)], dtype=np.float64
    ).reshape(n_rel, r_width)

    meta = {"norm_order": 2, "bias": 0.0, "modulus_constraint": 1.0}
    reshape = None
    conv_arrays = {}
    idx = 1 + n_ent + n_rel
    while idx < len(lines):
        parts = lines[idx].split()
        if not parts:
            idx += 1
            continue
        if parts[0] == "meta":
            if parts[1] == "reshape":
                reshape = (int(parts[2]), int(parts[3]))
            elif parts[1] in meta:
                meta[parts[1]] = float(parts[2])
            else:
                raise DataError(f"{path}:{idx + 1}: unknown meta key {parts[1]!r}")
            idx += 1
        elif parts[0] == "conv":
            name = parts[1]
            shape = tuple(int(d) for d in parts[2:])
            size = int(np.prod(shape)) if shape else 1
            values = parse_row(idx + 1, size)
            conv_arrays[name] = np.array(values, dtype=np.float64).reshape(shape)
            idx += 2
        else:
            raise DataError(f"{path}:{idx + 1}: unexpected section {parts[0]!r}")

    conv = None
    if model in CONV_MODELS:
        missing = {"filters", "filter_bias", "dense", "dense_bias"} - set(conv_arrays)
        if missing:
            raise DataError(f"{path}: checkpoint missing conv arrays: {missing}")
        conv = ConvParams(
            filters=conv_arrays["filters"],
            filter_bias=conv_arrays["filter_bias"],
            dense=conv_arrays["dense"],
            dense_bias=conv_arrays["dense_bias"],
            reshape=reshape,
        )
    config = KgeConfig(
        model=model,
        k=k,
        norm_order=int(meta["norm_order"]),
        bias=meta["bias"],
        modulus_constraint=meta["modulus_constraint"],
        conv=conv,
    )
    table = EmbeddingTable(
        entities=entities, relations=relations, representation=representation
    )
    return config, table
