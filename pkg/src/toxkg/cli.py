"""Command-line experiment driver.

Binds the triple store, alignment, embedding training, effect-data
pipeline, classifier, and metrics behind a single `toxkg` command with a
structured YAML config. Exit codes: 0 success, 1 usage error, 2 data
error, 3 numerical failure.
"""

import dataclasses
import hashlib
import json
import os
import sys

import click
import numpy as np
import yaml

from . import align as alignmod
from . import classifier as clf
from . import effects as eff
from . import evalmetrics as ev
from . import kge, kgstore
from . import train as trainmod
from .errors import DataError, NumericalError


# ------------------------------------------------------------------ config

def load_config(path):
    """Parse the YAML run config and check file references and bounds."""
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh)
    except FileNotFoundError:
        raise DataError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise DataError(f"{path}: invalid YAML: {exc}") from None
    if not isinstance(cfg, dict):
        raise DataError(f"{path}: config must be a mapping")
    base = os.path.dirname(os.path.abspath(path))
    paths = cfg.get("paths", {})
    if not isinstance(paths, dict):
        raise DataError(f"{path}: 'paths' must be a mapping")
    resolved = {}
    for key, value in paths.items():
        candidate = value if os.path.isabs(value) else os.path.join(base, value)
        if not os.path.exists(candidate):
            raise DataError(f"{path}: paths.{key} does not exist: {value}")
        resolved[key] = candidate
    cfg["paths"] = resolved
    repeats = cfg.get("repeats", 10)
    if not isinstance(repeats, int) or repeats < 1:
        raise DataError(f"{path}: repeats must be an integer >= 1")
    cfg["repeats"] = repeats
    return cfg


def _require_path(cfg, key, purpose):
    paths = cfg.get("paths", {})
    if key not in paths:
        raise DataError(f"config is missing paths.{key} ({purpose})")
    return paths[key]


def _load_graph(path):
    """Load a triple TSV and drop literal-object triples."""
    return kgstore.drop_literals(kgstore.load_triples(path))


def _load_effect_records(cfg):
    """Load effect records, preparing raw experiment rows on the fly."""
    path = _require_path(cfg, "effects", "effect records CSV")
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
    columns = tuple(header.split(","))
    if columns == eff.PREPARED_COLUMNS:
        return eff.load_records(path)
    registry = None
    if "units" in cfg.get("paths", {}):
        registry = eff.load_units(cfg["paths"]["units"])
    return eff.prepare_effects(eff.parse_effects(path), registry)


def _kge_section(cfg, which):
    section = cfg.get("kge", {}).get(which)
    if section is None:
        raise DataError(f"config is missing kge.{which}")
    return section


def _kge_config(section, seed):
    model = section.get("model")
    if model is None:
        raise DataError("kge section is missing 'model'")
    config = kge.KgeConfig(
        model=model,
        k=int(section.get("k", 100)),
        norm_order=int(section.get("norm_order", 2)),
        bias=float(section.get("bias", 0.0)),
        modulus_constraint=float(section.get("modulus_constraint", 1.0)),
    )
    if model in kge.CONV_MODELS:
        conv_args = {}
        if "n_filters" in section:
            conv_args["n_filters"] = int(section["n_filters"])
        if "filter_shape" in section:
            conv_args["filter_shape"] = tuple(section["filter_shape"])
        config = kge.with_conv(config, seed=seed, **conv_args)
    return config


def _loss_config(section):
    loss = section.get("loss", {})
    return trainmod.LossConfig(
        kind=loss.get("kind", "pairwise_logistic"),
        margin=float(loss.get("margin", 1.0)),
        negatives_per_positive=int(loss.get("negatives_per_positive", 1)),
    )


def _mlp_config(cfg, source, k):
    section = cfg.get("classifier", {})
    return clf.MlpConfig(
        embedding_source=source,
        k=k,
        chem_units=tuple(section.get("chem_units", ())),
        species_units=tuple(section.get("species_units", ())),
        kappa_units=tuple(section.get("kappa_units", ())),
        trunk_units=tuple(section.get("trunk_units", (16,))),
        dropout_rate=float(section.get("dropout", 0.2)),
        norm_momentum=float(section.get("norm_momentum", 0.99)),
    )


def _classifier_fit_args(cfg):
    section = cfg.get("classifier", {})
    return {
        "epochs": int(section.get("epochs", 200)),
        "lr": float(section.get("lr", 1e-3)),
        "patience": int(section.get("patience", clf.DEFAULT_PATIENCE)),
        "batch_size": int(section.get("batch_size", clf.DEFAULT_BATCH)),
    }


def _ft_config(cfg):
    section = cfg.get("finetune", {})
    return clf.FtConfig(
        alpha_c=float(section.get("alpha_c", 1.0)),
        alpha_s=float(section.get("alpha_s", 1.0)),
        alpha_mlp=float(section.get("alpha_mlp", 1.0)),
        lr_scale=float(section.get("lr_scale", 0.01)),
        negatives_per_positive=int(section.get("negatives_per_positive", 1)),
    )


def _effective_seed(cfg, seed):
    if seed is not None:
        return seed
    return int(cfg.get("seeds", {}).get("base", 0))


def _split_records(cfg, records, seed):
    strategy = cfg.get("strategy", "i")
    proportions = tuple(cfg.get("proportions", (0.70, 0.15, 0.15)))
    return eff.split_strategy(records, strategy, proportions, seed)


# ------------------------------------------------ phase-separated accessors

def _features(records, chem_index, species_index):
    """Feature arrays (chemical ids, species ids, kappa) without labels."""
    c_ids = np.empty(len(records), dtype=np.intp)
    s_ids = np.empty(len(records), dtype=np.intp)
    kappa = np.empty(len(records))
    for i, r in enumerate(records):
        if r.chemical not in chem_index:
            raise DataError(f"chemical {r.chemical!r} has no embedding row")
        if r.species not in species_index:
            raise DataError(f"species {r.species!r} has no embedding row")
        c_ids[i] = chem_index[r.chemical]
        s_ids[i] = species_index[r.species]
        kappa[i] = r.concentration
    return c_ids, s_ids, kappa


def _labels(records, partition):
    """Label array for one partition; the experiment driver calls this for
    the test partition only after all training has finished."""
    y = np.empty(len(records))
    for i, r in enumerate(records):
        if r.label not in (0, 1):
            raise DataError(f"{partition} record {i} is unlabeled")
        y[i] = r.label
    return y


# ------------------------------------------------------------- CLI plumbing

@click.group(name="toxkg")
def cli():
    """Knowledge-graph embeddings and chemical effect prediction."""


def run(argv=None):
    """Execute the CLI, mapping exceptions onto documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except NumericalError as exc:
        click.echo(f"numerical error: {exc}", err=True)
        return 3
    return 0


def main(argv=None):
    sys.exit(run(argv))


def _ensure_out(out):
    os.makedirs(out, exist_ok=True)
    return out


config_option = click.option(
    "--config", "config_path", required=True,
    type=click.Path(), help="YAML run configuration."
)
seed_option = click.option(
    "--seed", type=int, default=None,
    help="Random seed; overrides seeds.base from the config."
)
out_option = click.option(
    "--out", required=True, type=click.Path(), help="Output directory."
)


# ------------------------------------------------------------ graph tooling

@cli.command()
@click.argument("graph", type=click.Path())
@click.option("--out", type=click.Path(), default=None,
              help="Optional directory for a stats.csv copy.")
def stats(graph, out):
    """Density and entropy statistics of a triple file."""
    g = _load_graph(graph)
    report = kgstore.compute_stats(g)
    click.echo(f"triples {g.num_triples}")
    click.echo(f"entities {g.num_entities}")
    click.echo(f"relations {g.num_relations}")
    for name in kgstore.GraphStats.field_order:
        click.echo(f"{name} {getattr(report, name):.6f}")
    if out is not None:
        _ensure_out(out)
        path = os.path.join(out, "stats.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(kgstore.GraphStats.field_order) + "\n")
            fh.write(
                ",".join(
                    repr(getattr(report, name))
                    for name in kgstore.GraphStats.field_order
                )
                + "\n"
            )
        click.echo(f"wrote {path}")


@cli.command()
@click.argument("graph", type=click.Path())
@click.option("--seeds", "seed_names", required=True,
              help="Comma-separated entity names to crawl from.")
@out_option
def crawl(graph, seed_names, out):
    """Directed crawl: keep triples reachable from seed entities."""
    g = kgstore.load_triples(graph)
    ids = []
    for name in seed_names.split(","):
        name = name.strip()
        if name not in g.entity_ids:
            raise DataError(f"unknown seed entity: {name!r}")
        ids.append(g.entity_ids[name])
    sub = kgstore.directed_crawl(g, ids)
    _ensure_out(out)
    path = os.path.join(out, "crawl.tsv")
    kgstore.save_triples(sub, path)
    click.echo(f"kept {sub.num_triples} of {g.num_triples} triples")
    click.echo(f"wrote {path}")


@cli.command()
@click.argument("fingerprints", type=click.Path())
@click.option("--threshold", type=float, required=True,
              help="Minimum Tanimoto similarity.")
@click.option("--relation", default="similarTo", show_default=True,
              help="Relation name for emitted triples.")
@out_option
def simtriples(fingerprints, threshold, relation, out):
    """Similarity triples from chemical fingerprints (both directions)."""
    fps = kgstore.load_fingerprints(fingerprints)
    pairs = kgstore.similarity_pairs(fps, threshold)
    _ensure_out(out)
    path = os.path.join(out, "similarity.tsv")
    with open(path, "w", encoding="utf-8") as fh:
        for a, b in sorted(pairs):
            fh.write(f"{a}\t{relation}\t{b}\n")
    click.echo(f"emitted {len(pairs)} triples")
    click.echo(f"wrote {path}")


# ---------------------------------------------------------------- alignment

@cli.command(name="align")
@click.argument("source_labels", type=click.Path())
@click.argument("target_labels", type=click.Path())
@click.option("--threshold", type=float, default=0.8, show_default=True)
@click.option("--one-to-one/--no-one-to-one", default=True, show_default=True,
              help="Keep only the best mapping per source and target.")
@out_option
def align_cmd(source_labels, target_labels, threshold, one_to_one, out):
    """Lexical entity alignment between two label vocabularies."""
    src = alignmod.load_labels(source_labels)
    tgt = alignmod.load_labels(target_labels)
    mappings = alignmod.lexical_match(src, tgt, threshold)
    if one_to_one:
        mappings = alignmod.filter_one_to_one(mappings)
    _ensure_out(out)
    path = os.path.join(out, "mappings.tsv")
    alignmod.save_mappings(mappings, path)
    click.echo(f"found {len(mappings)} mappings")
    click.echo(f"wrote {path}")


@cli.command(name="align-eval")
@click.argument("mappings", type=click.Path())
@click.argument("reference", type=click.Path())
def align_eval(mappings, reference):
    """Estimated precision and recall against a reference alignment."""
    found = alignmod.load_mappings(mappings)
    ref = alignmod.load_mappings(reference)
    scores = alignmod.evaluate_alignment(found, ref)
    click.echo(f"mappings {scores.num_mappings}")
    click.echo(f"est_precision {scores.est_precision:.6f}")
    click.echo(f"recall {scores.recall:.6f}")


# --------------------------------------------------------------- effect data

@cli.command(name="prep-effects")
@click.argument("effects_csv", type=click.Path())
@click.option("--units", "units_csv", type=click.Path(), default=None,
              help="Unit registry CSV (unit,multiplier,offset).")
@out_option
def prep_effects(effects_csv, units_csv, out):
    """Convert units, binarize labels, deduplicate, log-normalize."""
    registry = eff.load_units(units_csv) if units_csv else None
    records = eff.prepare_effects(eff.parse_effects(effects_csv), registry)
    _ensure_out(out)
    path = os.path.join(out, "prepared.csv")
    eff.save_records(records, path)
    positives = sum(r.label for r in records)
    click.echo(f"prepared {len(records)} records "
               f"({positives} positive, {len(records) - positives} negative)")
    click.echo(f"wrote {path}")


@cli.command(name="split")
@click.argument("effects_csv", type=click.Path())
@click.option("--strategy", type=click.Choice(eff.STRATEGIES), required=True)
@click.option("--proportions", default="0.70,0.15,0.15", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@out_option
def split_cmd(effects_csv, strategy, proportions, seed, out):
    """Partition prepared effect records into train/validation/test."""
    records = eff.load_records(effects_csv)
    try:
        parts = tuple(float(p) for p in proportions.split(","))
    except ValueError:
        raise DataError(f"invalid proportions: {proportions!r}") from None
    result = eff.split_strategy(records, strategy, parts, seed)
    _ensure_out(out)
    paths = eff.save_split(result, out)
    sizes = result.sizes
    click.echo(
        f"strategy {strategy}: train {sizes[0]}, validation {sizes[1]}, "
        f"test {sizes[2]}, discarded {len(result.discarded)}"
    )
    for name, path in sorted(paths.items()):
        click.echo(f"wrote {path}")


# ------------------------------------------------------------- KGE training

def _train_one_kge(cfg, which, seed, out):
    section = _kge_section(cfg, which)
    graph = _load_graph(_require_path(cfg, f"{which}_graph", "triple TSV"))
    config = _kge_config(section, seed)
    loss = _loss_config(section)
    epochs = int(section.get("epochs", 500))
    lr = float(section.get("lr", 1e-3))
    sampling = section.get("sampling", "sLCWA")
    table, state = trainmod.train_kge(
        graph, config, loss, epochs, lr, seed, sampling_mode=sampling
    )
    ckpt = os.path.join(out, f"kge-{which}.ckpt")
    kge.save_checkpoint(config, table, ckpt)
    log = os.path.join(out, f"kge-{which}-log.csv")
    trainmod.save_training_log(state, log)
    rl = trainmod.relative_loss(state)
    click.echo(f"{which}: {config.model} k={config.k} "
               f"final_loss={state.loss_history[-1]:.6g} relative_loss={rl:.6g}")
    click.echo(f"wrote {ckpt}")
    click.echo(f"wrote {log}")
    return ckpt


@cli.command(name="train-kge")
@config_option
@click.option("--which", type=click.Choice(("chem", "species", "both")),
              default="both", show_default=True)
@seed_option
@out_option
def train_kge_cmd(config_path, which, seed, out):
    """Train graph embeddings for the chemical and/or species graph."""
    cfg = load_config(config_path)
    seed = _effective_seed(cfg, seed)
    _ensure_out(out)
    sides = ("chem", "species") if which == "both" else (which,)
    for side in sides:
        _train_one_kge(cfg, side, seed, out)


@cli.command(name="hpo-kge")
@config_option
@click.option("--which", type=click.Choice(("chem", "species")),
              required=True)
@seed_option
@out_option
def hpo_kge(config_path, which, seed, out):
    """Random hyper-parameter search over embedding configurations."""
    cfg = load_config(config_path)
    seed = _effective_seed(cfg, seed)
    section = _kge_section(cfg, which)
    model = section.get("model")
    if model is None:
        raise DataError(f"config kge.{which} is missing 'model'")
    hpo = cfg.get("hpo", {})
    spec = trainmod.HpoSpec(
        trials=int(hpo.get("trials", 20)),
        epochs=int(hpo.get("epochs", 100)),
        lr=float(hpo.get("lr", 1e-3)),
        dimension_range=tuple(hpo.get("dimension_range", (100, 400))),
        margin_range=tuple(hpo.get("margin_range", (1, 10))),
        bias_range=tuple(hpo.get("bias_range", (0, 20))),
        negatives_range=tuple(hpo.get("negatives_range", (10, 100))),
    )
    graph = _load_graph(_require_path(cfg, f"{which}_graph", "triple TSV"))
    _ensure_out(out)
    log = os.path.join(out, f"hpo-{which}.csv")
    result = trainmod.random_search(
        graph, model, spec, seed,
        sampling_mode=section.get("sampling", "sLCWA"), log_path=log,
    )
    best = result.config
    click.echo(
        f"best trial: k={best.k} bias={best.bias} loss={result.loss.kind} "
        f"margin={result.loss.margin} "
        f"negatives={result.loss.negatives_per_positive} "
        f"relative_loss={result.relative_loss:.6g}"
    )
    click.echo(f"wrote {log}")


# ------------------------------------------------------- classifier training

def _one_hot_indices(records):
    chems = sorted({r.chemical for r in records})
    specs = sorted({r.species for r in records})
    return (
        {name: i for i, name in enumerate(chems)},
        {name: i for i, name in enumerate(specs)},
    )


def _load_kge_side(cfg, which):
    ckpt = _require_path(cfg, f"{which}_checkpoint", "embedding checkpoint")
    config, table = kge.load_checkpoint(ckpt)
    graph = _load_graph(_require_path(cfg, f"{which}_graph", "triple TSV"))
    if table.num_entities != graph.num_entities:
        raise DataError(
            f"{which} checkpoint has {table.num_entities} entities but the "
            f"graph has {graph.num_entities}"
        )
    return config, table, graph


def _save_classifier_bundle(weights, config, chem_index, species_index, path):
    clf.save_classifier(weights, config, path)
    index = {
        "chemicals": sorted(chem_index, key=chem_index.get),
        "species": sorted(species_index, key=species_index.get),
    }
    with open(path + ".index.json", "w", encoding="utf-8") as fh:
        json.dump(index, fh)


def _load_classifier_bundle(path):
    config, weights = clf.load_classifier(path)
    index_path = path + ".index.json"
    if not os.path.exists(index_path):
        raise DataError(f"missing entity index next to checkpoint: {index_path}")
    with open(index_path, encoding="utf-8") as fh:
        index = json.load(fh)
    chem_index = {name: i for i, name in enumerate(index["chemicals"])}
    species_index = {name: i for i, name in enumerate(index["species"])}
    return config, weights, chem_index, species_index


def _save_history(history, path):
    keys = [k for k, v in history.items() if isinstance(v, list)]
    n = len(history["train_loss"])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(["epoch"] + keys) + "\n")
        for i in range(n):
            row = [str(i)] + [repr(history[k][i]) for k in keys]
            fh.write(",".join(row) + "\n")


def _oversampled(split, seed):
    return dataclasses.replace(
        split, train=tuple(eff.oversample(split.train, seed))
    )


@cli.command(name="train-clf")
@config_option
@click.option("--variant", type=click.Choice(("one_hot", "pretrained")),
              required=True)
@seed_option
@out_option
def train_clf(config_path, variant, seed, out):
    """Train the effect classifier (one-hot or frozen embeddings)."""
    cfg = load_config(config_path)
    seed = _effective_seed(cfg, seed)
    records = _load_effect_records(cfg)
    if variant == "one_hot":
        chem_index, species_index = _one_hot_indices(records)
        mlp_cfg = _mlp_config(
            cfg, "one_hot", int(cfg.get("classifier", {}).get("k", 32))
        )
        weights = clf.build_mlp(
            mlp_cfg, seed, n_chemicals=len(chem_index),
            n_species=len(species_index),
        )
    else:
        _, table_c, graph_c = _load_kge_side(cfg, "chem")
        _, table_s, graph_s = _load_kge_side(cfg, "species")
        records = eff.filter_mapped(
            records, graph_c.entity_names, graph_s.entity_names
        )
        chem_index = graph_c.entity_ids
        species_index = graph_s.entity_ids
        mlp_cfg = _mlp_config(cfg, "pretrained", table_c.entities.shape[1])
        weights = clf.build_mlp(
            mlp_cfg, seed, pretrained=(table_c.entities, table_s.entities)
        )
    split = _split_records(cfg, records, seed)
    fit = _classifier_fit_args(cfg)
    history = clf.train_classifier(
        weights, mlp_cfg, _oversampled(split, seed), chem_index,
        species_index, seed=seed, **fit,
    )
    _ensure_out(out)
    ckpt = os.path.join(out, f"clf-{variant}.ckpt")
    _save_classifier_bundle(weights, mlp_cfg, chem_index, species_index, ckpt)
    _save_history(history, os.path.join(out, f"clf-{variant}-log.csv"))
    click.echo(
        f"{variant}: {len(history['train_loss'])} epochs, best epoch "
        f"{history['best_epoch']}, "
        f"val_loss {min(history['val_loss']):.6g}"
    )
    click.echo(f"wrote {ckpt}")


@cli.command(name="finetune")
@config_option
@seed_option
@out_option
def finetune_cmd(config_path, seed, out):
    """Fine-tune embeddings jointly with a pre-trained-variant classifier."""
    cfg = load_config(config_path)
    seed = _effective_seed(cfg, seed)
    baseline = _require_path(cfg, "clf_checkpoint", "baseline classifier")
    base_cfg, weights, chem_index, species_index = _load_classifier_bundle(
        baseline
    )
    if base_cfg.embedding_source != "pretrained":
        raise DataError(
            "fine-tuning starts from a pretrained-variant checkpoint, got "
            f"{base_cfg.embedding_source!r}"
        )
    cfg_c, table_c, graph_c = _load_kge_side(cfg, "chem")
    cfg_s, table_s, graph_s = _load_kge_side(cfg, "species")
    records = eff.filter_mapped(
        _load_effect_records(cfg), graph_c.entity_names, graph_s.entity_names
    )
    split = _split_records(cfg, records, seed)
    ft_cfg = dataclasses.replace(base_cfg, embedding_source="finetune")
    ft = _ft_config(cfg)
    fit = _classifier_fit_args(cfg)
    history, tables = clf.fine_tune(
        weights, ft_cfg, ft, (cfg_c, table_c, graph_c),
        (cfg_s, table_s, graph_s), _oversampled(split, seed),
        seed=seed, **fit,
    )
    _ensure_out(out)
    ckpt = os.path.join(out, "clf-finetune.ckpt")
    _save_classifier_bundle(weights, ft_cfg, chem_index, species_index, ckpt)
    kge.save_checkpoint(
        cfg_c, tables["chem"], os.path.join(out, "kge-chem-ft.ckpt")
    )
    kge.save_checkpoint(
        cfg_s, tables["species"], os.path.join(out, "kge-species-ft.ckpt")
    )
    _save_history(history, os.path.join(out, "clf-finetune-log.csv"))
    click.echo(
        f"finetune: {len(history['train_loss'])} epochs, best epoch "
        f"{history['best_epoch']}, val_loss {min(history['val_loss']):.6g}"
    )
    click.echo(f"wrote {ckpt}")


# ---------------------------------------------------------------- evaluation

def _select_threshold(cfg, weights, mlp_cfg, split, chem_index, species_index):
    """Threshold-search pair (yi_max, tau_max) per the configured source."""
    source = cfg.get("evaluate", {}).get("threshold_source", "validation")
    if source not in ("validation", "test"):
        raise DataError(
            f"evaluate.threshold_source must be validation or test, got "
            f"{source!r}"
        )
    records = split.validation if source == "validation" else split.test
    yhat = clf.forward(
        weights, mlp_cfg, *_features(records, chem_index, species_index)
    )
    return ev.youden_max(yhat, _labels(records, source))


def _evaluate_run(cfg, weights, mlp_cfg, split, chem_index, species_index):
    """Metrics on the test partition; test labels are read only here."""
    tau = float(cfg.get("evaluate", {}).get("tau", 0.5))
    yi_max, tau_max = _select_threshold(
        cfg, weights, mlp_cfg, split, chem_index, species_index
    )
    yhat = clf.forward(
        weights, mlp_cfg, *_features(split.test, chem_index, species_index)
    )
    y = _labels(split.test, "test")
    sens, spec, yi = ev.compute_metrics(ev.confusion(yhat, y, tau))
    if cfg.get("evaluate", {}).get("threshold_source", "validation") == "validation":
        # report the test-set index achieved at the validation-selected
        # threshold rather than the validation value itself
        _, _, yi_max = ev.compute_metrics(ev.confusion(yhat, y, tau_max))
    return ev.MetricsReport(
        sensitivity=sens, specificity=spec, yi=yi,
        yi_max=yi_max, tau_max=tau_max,
    )


@cli.command(name="evaluate")
@config_option
@click.option("--classifier", "clf_path", required=True, type=click.Path(),
              help="Classifier checkpoint to evaluate.")
@seed_option
@out_option
def evaluate_cmd(config_path, clf_path, seed, out):
    """Evaluate a trained classifier on the configured test split."""
    cfg = load_config(config_path)
    mlp_cfg, weights, chem_index, species_index = _load_classifier_bundle(
        clf_path
    )
    records = _load_effect_records(cfg)
    records = [
        r for r in records
        if r.chemical in chem_index and r.species in species_index
    ]
    split = _split_records(cfg, records, _effective_seed(cfg, seed))
    report = _evaluate_run(
        cfg, weights, mlp_cfg, split, chem_index, species_index
    )
    for name in ev.METRIC_FIELDS:
        click.echo(f"{name} {getattr(report, name):.6f}")
    _ensure_out(out)
    path = os.path.join(out, "evaluation.csv")
    agg = ev.aggregate_runs([report])
    ev.save_metrics(
        path, [(mlp_cfg.embedding_source, cfg.get("strategy", "i"), agg)]
    )
    click.echo(f"wrote {path}")


# ------------------------------------------------------------ the experiment

def _experiment_variants(cfg):
    variants = tuple(cfg.get("variants", ("one_hot", "pretrained", "finetune")))
    for v in variants:
        if v not in clf.EMBEDDING_SOURCES:
            raise DataError(f"unknown variant {v!r}")
    return variants


def _prepare_kge_tables(cfg, seed, out):
    """Load embedding checkpoints if configured, else train them once."""
    sides = {}
    paths = cfg.get("paths", {})
    for which in ("chem", "species"):
        if f"{which}_checkpoint" in paths:
            sides[which] = _load_kge_side(cfg, which)
        else:
            ckpt = _train_one_kge(cfg, which, seed, out)
            config, table = kge.load_checkpoint(ckpt)
            graph = _load_graph(
                _require_path(cfg, f"{which}_graph", "triple TSV")
            )
            sides[which] = (config, table, graph)
    return sides


def _run_variant(cfg, variant, records, split, sides, seed):
    """Train one variant and return its test-set metrics report."""
    fit = _classifier_fit_args(cfg)
    if variant == "one_hot":
        chem_index, species_index = _one_hot_indices(records)
        mlp_cfg = _mlp_config(
            cfg, "one_hot", int(cfg.get("classifier", {}).get("k", 32))
        )
        weights = clf.build_mlp(
            mlp_cfg, seed, n_chemicals=len(chem_index),
            n_species=len(species_index),
        )
        clf.train_classifier(
            weights, mlp_cfg, _oversampled(split, seed), chem_index,
            species_index, seed=seed, **fit,
        )
    else:
        cfg_c, table_c, graph_c = sides["chem"]
        cfg_s, table_s, graph_s = sides["species"]
        chem_index = graph_c.entity_ids
        species_index = graph_s.entity_ids
        pt_cfg = _mlp_config(cfg, "pretrained", table_c.entities.shape[1])
        weights = clf.build_mlp(
            pt_cfg, seed, pretrained=(table_c.entities, table_s.entities)
        )
        clf.train_classifier(
            weights, pt_cfg, _oversampled(split, seed), chem_index,
            species_index, seed=seed, **fit,
        )
        mlp_cfg = pt_cfg
        if variant == "finetune":
            mlp_cfg = dataclasses.replace(
                pt_cfg, embedding_source="finetune"
            )
            ft_weights = weights.copy()
            clf.fine_tune(
                ft_weights, mlp_cfg, _ft_config(cfg),
                (cfg_c, table_c, graph_c), (cfg_s, table_s, graph_s),
                _oversampled(split, seed), seed=seed, **fit,
            )
            weights = ft_weights
    return _evaluate_run(
        cfg, weights, mlp_cfg, split, chem_index, species_index
    )


@cli.command(name="run-experiment")
@config_option
@seed_option
@out_option
def run_experiment(config_path, seed, out):
    """Repeated train/evaluate runs for every configured variant."""
    cfg = load_config(config_path)
    seed = _effective_seed(cfg, seed)
    _ensure_out(out)
    variants = _experiment_variants(cfg)
    records = _load_effect_records(cfg)
    needs_kge = any(v != "one_hot" for v in variants)
    sides = None
    if needs_kge:
        sides = _prepare_kge_tables(cfg, seed, out)
        records = eff.filter_mapped(
            records,
            sides["chem"][2].entity_names,
            sides["species"][2].entity_names,
        )
    split = _split_records(cfg, records, seed)
    repeats = cfg["repeats"]
    runs = []
    reports = {v: [] for v in variants}
    for r in range(repeats):
        run_seed = seed + r
        for variant in variants:
            report = _run_variant(cfg, variant, records, split, sides, run_seed)
            reports[variant].append(report)
            runs.append((variant, r, report))
    runs_path = os.path.join(out, "runs.csv")
    with open(runs_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("variant,run," + ",".join(ev.METRIC_FIELDS) + "\n")
        for variant, r, report in runs:
            cells = [variant, str(r)] + [
                repr(getattr(report, name)) for name in ev.METRIC_FIELDS
            ]
            fh.write(",".join(cells) + "\n")
    metrics_path = os.path.join(out, "metrics.csv")
    strategy = cfg.get("strategy", "i")
    ev.save_metrics(
        metrics_path,
        [
            (variant, strategy, ev.aggregate_runs(reports[variant]))
            for variant in variants
        ],
    )
    for variant in variants:
        agg = ev.aggregate_runs(reports[variant])
        click.echo(
            f"{variant}: yi {ev.format_mean_std(*agg['yi'])} "
            f"yi_max {ev.format_mean_std(*agg['yi_max'])}"
        )
    click.echo(f"wrote {runs_path}")
    click.echo(f"wrote {metrics_path}")


def file_digest(path):
    """Hex SHA-256 of a file, for reproducibility checks."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


if __name__ == "__main__":
    main()
