"""Baseline lexical alignment between two labeled vocabularies.

Each vocabulary maps an entity name to one or more labels. Matching is
string-based: the confidence of a candidate pair is the maximum Levenshtein
similarity over all label pairs after light preprocessing (lowercasing,
trimming, and removal of abbreviation tokens such as "sp." and "var.").
"""

import csv
from dataclasses import dataclass

from .errors import DataError

ABBREVIATION_TOKENS = frozenset({"sp.", "spp.", "var.", "ssp.", "cf."})


@dataclass(frozen=True, order=True)
class Mapping:
    source: str
    target: str
    confidence: float = 1.0

    def key(self):
        return (self.source, self.target)


@dataclass(frozen=True)
class AlignmentScores:
    num_mappings: int
    recall: float
    est_precision: float


def levenshtein_similarity(a, b):
    """1 - edit_distance/max(len); 1.0 when both strings are empty."""
    if a == b:
        return 1.0
    n = max(len(a), len(b))
    if n == 0:
        return 1.0
    return 1.0 - _edit_distance(a, b) / n


def _edit_distance(a, b):
    # two-row dynamic program over insert/delete/substitute, all cost 1
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[-1]


def preprocess_label(label):
    """Lowercase, trim, and drop abbreviation tokens like "sp." / "var."."""
    tokens = label.lower().strip().split()
    kept = [t for t in tokens if t not in ABBREVIATION_TOKENS]
    return " ".join(kept)


def lexical_match(src, tgt, threshold):
    """Match two name->labels maps; emit a mapping when the best label-pair
    similarity is strictly above threshold."""
    if not 0.0 < threshold <= 1.0:
        raise DataError(f"threshold must be in (0,1], got {threshold}")
    src_labels = {
        name: [preprocess_label(l) for l in labels] for name, labels in src.items()
    }
    tgt_labels = {
        name: [preprocess_label(l) for l in labels] for name, labels in tgt.items()
    }
    mappings = set()
    for s_name, s_labs in src_labels.items():
        for t_name, t_labs in tgt_labels.items():
            confidence = max(
                (levenshtein_similarity(a, b) for a in s_labs for b in t_labs),
                default=0.0,
            )
            if confidence > threshold:
                mappings.add(Mapping(s_name, t_name, confidence))
    return mappings


def filter_one_to_one(mappings):
    """Greedy 1-to-1 filter: highest confidence wins a contested source or
    target; exact ties fall back to lexicographic (source, target) order."""
    used_sources, used_targets, kept = set(), set(), set()
    for m in sorted(mappings, key=lambda m: (-m.confidence, m.source, m.target)):
        if m.source in used_sources or m.target in used_targets:
            continue
        used_sources.add(m.source)
        used_targets.add(m.target)
        kept.add(m)
    return kept


def evaluate_alignment(mappings, ref):
    """Recall against a reference set plus estimated precision over the
    mappings whose source or target occurs in the reference entity sets."""
    if not ref:
        raise DataError("reference mapping set is empty")
    ref_keys = {m.key() for m in ref}
    ref_sources = {m.source for m in ref}
    ref_targets = {m.target for m in ref}
    keys = {m.key() for m in mappings}
    approx = {
        k for k in keys if k[0] in ref_sources or k[1] in ref_targets
    }
    est_precision = len(approx & ref_keys) / len(approx) if approx else 0.0
    recall = len(keys & ref_keys) / len(ref_keys)
    return AlignmentScores(
        num_mappings=len(keys), recall=recall, est_precision=est_precision
    )


def load_mappings(path, default_confidence=1.0):
    """Load mapping TSV `source<TAB>target<TAB>confidence` (confidence
    optional, defaulting to 1.0)."""
    mappings = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) == 2:
                source, target = parts
                confidence = default_confidence
            elif len(parts) == 3:
                source, target = parts[0], parts[1]
                try:
                    confidence = float(parts[2])
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: bad confidence {parts[2]!r}"
                    ) from None
            else:
                raise DataError(
                    f"{path}:{lineno}: expected 2 or 3 tab-separated columns, "
                    f"got {len(parts)}"
                )
            if not 0.0 <= confidence <= 1.0:
                raise DataError(
                    f"{path}:{lineno}: confidence {confidence} outside [0,1]"
                )
            mappings.add(Mapping(source, target, confidence))
    return mappings


def save_mappings(mappings, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        for m in sorted(mappings):
            writer.writerow([m.source, m.target, repr(m.confidence)])


def load_labels(path):
    """Load a vocabulary label file: `entity<TAB>label` lines, one per label;
    repeated entities accumulate labels."""
    labels = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(
                    f"{path}:{lineno}: expected 2 tab-separated columns, "
                    f"got {len(parts)}"
                )
            labels.setdefault(parts[0], []).append(parts[1])
    return labels
