"""Effect-experiment ingestion, normalization, and grouped data splitting.

The pipeline turns raw experiment rows into binary-labeled samples
(chemical, species, log10 concentration in mg/L, label) and produces
train/validation/test splits in which no (chemical, species) pair ever
straddles two partitions.
"""

import csv
import json
import math
import os
import statistics
from dataclasses import dataclass, replace

import numpy as np

from . import rng as rngmod
from .errors import DataError

EFFECT_COLUMNS = ("chemical", "species", "concentration", "unit", "endpoint", "effect")
STRATEGIES = ("i", "ii", "iii", "iv")
MORTALITY_EFFECTS = ("MOR", "MORTALITY")


@dataclass(frozen=True)
class EffectRecord:
    chemical: str
    species: str
    concentration: float
    unit: str
    endpoint: str
    effect: str
    label: int = None


@dataclass(frozen=True)
class UnitEntry:
    unit: str
    multiplier: float
    offset: float = 0.0

    def __post_init__(self):
        if not self.multiplier > 0:
            raise DataError(
                f"unit {self.unit!r} needs a positive multiplier, "
                f"got {self.multiplier}"
            )


DEFAULT_UNITS = {
    e.unit: e
    for e in (
        UnitEntry("mg/L", 1.0),
        UnitEntry("ug/L", 1e-3),
        UnitEntry("µg/L", 1e-3),
        UnitEntry("ng/L", 1e-6),
        UnitEntry("g/L", 1e3),
        UnitEntry("ppm", 1.0),
        UnitEntry("ppb", 1e-3),
    )
}


def load_units(path):
    """Unit registry CSV `unit,multiplier,offset` -> {unit: UnitEntry}."""
    registry = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return registry
        for col in ("unit", "multiplier"):
            if col not in reader.fieldnames:
                raise DataError(f"{path}: missing column {col!r}")
        for i, row in enumerate(reader, start=2):
            try:
                mult = float(row["multiplier"])
                off = float(row.get("offset") or 0.0)
            except ValueError:
                raise DataError(f"{path}:{i}: non-numeric conversion") from None
            registry[row["unit"]] = UnitEntry(row["unit"], mult, off)
    return registry


# ---------------------------------------------------------------- ingestion

def parse_effects(path):
    """Read raw experiment rows; unknown columns are ignored."""
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return records
        missing = [c for c in EFFECT_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise DataError(f"{path}: missing mandatory columns {missing}")
        for i, row in enumerate(reader, start=2):
            try:
                conc = float(row["concentration"])
            except ValueError:
                raise DataError(
                    f"{path}:{i}: non-numeric concentration "
                    f"{row['concentration']!r}"
                ) from None
            records.append(
                EffectRecord(
                    chemical=row["chemical"],
                    species=row["species"],
                    concentration=conc,
                    unit=row["unit"],
                    endpoint=row["endpoint"],
                    effect=row["effect"],
                )
            )
    return records


def convert_units(rec, registry=None):
    """Convert the concentration to mg/L via the unit registry."""
    registry = DEFAULT_UNITS if registry is None else registry
    entry = registry.get(rec.unit)
    if entry is None:
        raise DataError(f"unknown unit {rec.unit!r}")
    value = rec.concentration * entry.multiplier + entry.offset
    return replace(rec, concentration=value, unit="mg/L")


def binarize_label(endpoint, effect):
    """1 for lethal outcomes: LC*/LD* endpoints, NR-LETH, and EC* when the
    recorded effect is mortality. Anything else, unknown included, is 0."""
    ep = (endpoint or "").upper()
    if ep.startswith("LC") or ep.startswith("LD") or ep == "NR-LETH":
        return 1
    if ep.startswith("EC") and (effect or "").upper() in MORTALITY_EFFECTS:
        return 1
    return 0


def binarize_records(records):
    return [
        replace(r, label=binarize_label(r.endpoint, r.effect)) for r in records
    ]


def dedup_median(records):
    """One record per (chemical, species, label) with the median
    concentration; even-sized groups use the mean of the two middle values.
    Keeps the first record of each group for the remaining fields."""
    groups = {}
    order = []
    for rec in records:
        key = (rec.chemical, rec.species, rec.label)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec)
    out = []
    for key in order:
        members = groups[key]
        med = statistics.median(m.concentration for m in members)
        out.append(replace(members[0], concentration=float(med)))
    return out


def log_normalize(rec):
    if not rec.concentration > 0:
        raise DataError(
            f"cannot log-normalize non-positive concentration "
            f"{rec.concentration} for ({rec.chemical}, {rec.species})"
        )
    return replace(
        rec, concentration=math.log10(rec.concentration), unit="log10(mg/L)"
    )


def filter_mapped(records, chemicals, species):
    """Keep only records whose chemical and species have known mappings."""
    chemicals = set(chemicals)
    species = set(species)
    return [
        r for r in records if r.chemical in chemicals and r.species in species
    ]


def prepare_effects(records, registry=None):
    """convert -> binarize -> median-dedup -> log10; deterministic."""
    converted = [convert_units(r, registry) for r in records]
    labeled = binarize_records(converted)
    return [log_normalize(r) for r in dedup_median(labeled)]


# ----------------------------------------------------------------- splitting

@dataclass(frozen=True)
class SplitResult:
    train: tuple
    validation: tuple
    test: tuple
    strategy: str
    discarded: tuple = ()

    @property
    def sizes(self):
        return (len(self.train), len(self.validation), len(self.test))


def _check_proportions(proportions):
    if len(proportions) != 3:
        raise DataError("proportions must have three entries")
    if any(not p > 0 for p in proportions):
        raise DataError(f"proportions must be positive, got {proportions}")
    if abs(sum(proportions) - 1.0) > 1e-9:
        raise DataError(f"proportions must sum to 1, got {proportions}")


def _partition_keys(keys_with_sizes, proportions, rng):
    """Assign whole groups to the partition with the lowest fill ratio.

    An empty partition has ratio 0 and therefore attracts the next group,
    so with at least three groups every partition ends non-empty.
    """
    keys = [k for k, _ in keys_with_sizes]
    sizes = {k: s for k, s in keys_with_sizes}
    total = sum(sizes.values())
    targets = [max(p * total, 1e-12) for p in proportions]
    counts = [0, 0, 0]
    assignment = {}
    for idx in rng.permutation(len(keys)):
        key = keys[int(idx)]
        ratios = [counts[j] / targets[j] for j in range(3)]
        j = int(np.argmin(ratios))
        assignment[key] = j
        counts[j] += sizes[key]
    return assignment


def _grouped_split(records, key_fn, proportions, rng, strategy):
    groups = {}
    for rec in records:
        groups.setdefault(key_fn(rec), 0)
        groups[key_fn(rec)] += 1
    if len(groups) < 3:
        raise DataError(
            f"strategy ({strategy}) needs at least 3 groups to populate "
            f"three partitions, got {len(groups)}"
        )
    assignment = _partition_keys(sorted(groups.items()), proportions, rng)
    parts = ([], [], [])
    for rec in records:
        parts[assignment[key_fn(rec)]].append(rec)
    return parts


def split_strategy(records, strategy, proportions=(0.70, 0.15, 0.15), seed=0):
    """Grouped 70/15/15 split.

    (i) groups by (chemical, species) pair, (ii) by chemical, (iii) by
    species. (iv) partitions chemicals and species independently and
    keeps only records whose chemical block matches their species block;
    everything else is discarded, so both axes are disjoint across
    partitions.
    """
    if strategy not in STRATEGIES:
        raise DataError(f"unknown split strategy {strategy!r}")
    _check_proportions(proportions)
    records = list(records)
    if not records:
        raise DataError("cannot split an empty dataset")
    rng = rngmod.stream(seed, "split", strategy)
    discarded = []
    if strategy == "i":
        parts = _grouped_split(
            records, lambda r: (r.chemical, r.species), proportions, rng, "i"
        )
    elif strategy == "ii":
        parts = _grouped_split(records, lambda r: r.chemical, proportions, rng, "ii")
    elif strategy == "iii":
        parts = _grouped_split(records, lambda r: r.species, proportions, rng, "iii")
    else:
        chem_sizes = {}
        spec_sizes = {}
        for rec in records:
            chem_sizes[rec.chemical] = chem_sizes.get(rec.chemical, 0) + 1
            spec_sizes[rec.species] = spec_sizes.get(rec.species, 0) + 1
        if len(chem_sizes) < 3 or len(spec_sizes) < 3:
            raise DataError(
                "strategy (iv) needs at least 3 chemicals and 3 species, "
                f"got {len(chem_sizes)} and {len(spec_sizes)}"
            )
        chem_part = _partition_keys(sorted(chem_sizes.items()), proportions, rng)
        spec_part = _partition_keys(sorted(spec_sizes.items()), proportions, rng)
        parts = ([], [], [])
        for rec in records:
            pc = chem_part[rec.chemical]
            ps = spec_part[rec.species]
            if pc == ps:
                parts[pc].append(rec)
            else:
                discarded.append(rec)
        if any(len(p) == 0 for p in parts):
            raise DataError(
                "strategy (iv) produced an empty partition; too few groups"
            )
    return SplitResult(
        train=tuple(parts[0]),
        validation=tuple(parts[1]),
        test=tuple(parts[2]),
        strategy=strategy,
        discarded=tuple(discarded),
    )


def oversample(records, seed=0):
    """Append duplicates of minority-class records until |#pos - #neg| <= 1."""
    records = list(records)
    pos = [r for r in records if r.label == 1]
    neg = [r for r in records if r.label == 0]
    if not pos or not neg:
        raise DataError(
            f"oversampling needs both classes, got {len(pos)} lethal and "
            f"{len(neg)} non-lethal"
        )
    if abs(len(pos) - len(neg)) <= 1:
        return records
    minority = pos if len(pos) < len(neg) else neg
    deficit = abs(len(pos) - len(neg))
    rng = rngmod.stream(seed, "oversample")
    picks = rng.integers(len(minority), size=deficit)
    records.extend(minority[int(i)] for i in picks)
    return records


# --------------------------------------------------------------- persistence

PREPARED_COLUMNS = EFFECT_COLUMNS + ("label",)


def save_records(records, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PREPARED_COLUMNS)
        for r in records:
            writer.writerow(
                [r.chemical, r.species, repr(r.concentration), r.unit,
                 r.endpoint, r.effect, "" if r.label is None else r.label]
            )


def load_records(path):
    """Read records written by save_records (labeled or not)."""
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return records
        missing = [c for c in EFFECT_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise DataError(f"{path}: missing mandatory columns {missing}")
        for i, row in enumerate(reader, start=2):
            try:
                conc = float(row["concentration"])
                raw = row.get("label", "")
                label = None if raw in ("", None) else int(raw)
            except ValueError:
                raise DataError(f"{path}:{i}: malformed numeric field") from None
            if label not in (None, 0, 1):
                raise DataError(f"{path}:{i}: label must be 0 or 1, got {label}")
            records.append(
                EffectRecord(
                    chemical=row["chemical"], species=row["species"],
                    concentration=conc, unit=row["unit"],
                    endpoint=row["endpoint"], effect=row["effect"],
                    label=label,
                )
            )
    return records


def save_split(result, out_dir):
    """Write train/validation/test CSVs plus a JSON summary."""
    paths = {}
    for name, part in (
        ("train", result.train),
        ("validation", result.validation),
        ("test", result.test),
    ):
        path = os.path.join(out_dir, f"{name}.csv")
        save_records(part, path)
        paths[name] = path
    total = sum(result.sizes) + len(result.discarded)
    summary = {
        "strategy": result.strategy,
        "sizes": {
            "train": len(result.train),
            "validation": len(result.validation),
            "test": len(result.test),
        },
        "discarded": len(result.discarded),
        "proportions": [
            round(n / max(1, total), 6) for n in result.sizes
        ],
    }
    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths["summary"] = summary_path
    return paths
