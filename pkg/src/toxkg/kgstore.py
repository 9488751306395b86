"""Triple store: load, index, filter, and analyze knowledge graphs.

Graphs are immutable after construction. Entities and relations get contiguous
integer ids in first-seen order, so a file always loads to the same ids.
Objects may be literals (TSV objects beginning with `"`); literal-tagged
triples are excluded from crawls' frontier and must be dropped before
embedding training.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

from .errors import DataError

SIMILARITY_RELATION = "similarTo"


class Triple(NamedTuple):
    subject: int
    predicate: int
    object: int
    object_is_literal: bool = False


@dataclass(frozen=True)
class KnowledgeGraph:
    """Deduplicated triple set plus bijective name<->id dictionaries.

    entity_names / relation_names map id -> name (position = id);
    literal_values maps literal id -> raw literal text.
    """

    entity_names: tuple = ()
    relation_names: tuple = ()
    literal_values: tuple = ()
    triples: tuple = ()

    @cached_property
    def entity_ids(self):
        return {name: i for i, name in enumerate(self.entity_names)}

    @cached_property
    def relation_ids(self):
        return {name: i for i, name in enumerate(self.relation_names)}

    @cached_property
    def triple_set(self):
        return frozenset(self.triples)

    @property
    def num_entities(self):
        return len(self.entity_names)

    @property
    def num_relations(self):
        return len(self.relation_names)

    @property
    def num_triples(self):
        return len(self.triples)

    def has_literals(self):
        return any(t.object_is_literal for t in self.triples)


def _build(name_triples):
    """Build a graph from (subject, predicate, object, is_literal) name rows."""
    entity_ids, relation_ids, literal_ids = {}, {}, {}
    triples, seen = [], set()
    for subj, pred, obj, is_lit in name_triples:
        s = entity_ids.setdefault(subj, len(entity_ids))
        p = relation_ids.setdefault(pred, len(relation_ids))
        if is_lit:
            o = literal_ids.setdefault(obj, len(literal_ids))
        else:
            o = entity_ids.setdefault(obj, len(entity_ids))
        t = Triple(s, p, o, is_lit)
        if t not in seen:
            seen.add(t)
            triples.append(t)
    return KnowledgeGraph(
        entity_names=tuple(entity_ids),
        relation_names=tuple(relation_ids),
        literal_values=tuple(literal_ids),
        triples=tuple(triples),
    )


def from_name_triples(rows):
    """Graph from (subject, predicate, object) name tuples; objects starting
    with `\"` are literals."""
    return _build(
        (s, p, o, isinstance(o, str) and o.startswith('"')) for s, p, o in rows
    )


def load_triples(path):
    """Load a UTF-8 TSV of subject<TAB>predicate<TAB>object lines."""

    def rows():
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise DataError(
                        f"{path}:{lineno}: expected 3 tab-separated columns, "
                        f"got {len(parts)}"
                    )
                s, p, o = parts
                yield s, p, o, o.startswith('"')

    return _build(rows())


def save_triples(g, path):
    """Write a graph back to triple TSV (inverse of load_triples)."""
    with open(path, "w", encoding="utf-8") as fh:
        for t in g.triples:
            obj = (
                g.literal_values[t.object]
                if t.object_is_literal
                else g.entity_names[t.object]
            )
            fh.write(
                f"{g.entity_names[t.subject]}\t{g.relation_names[t.predicate]}\t{obj}\n"
            )


def drop_literals(g):
    """Remove literal-object triples; dictionaries are rebuilt contiguous."""

    def rows():
        for t in g.triples:
            if not t.object_is_literal:
                yield (
                    g.entity_names[t.subject],
                    g.relation_names[t.predicate],
                    g.entity_names[t.object],
                    False,
                )

    return _build(rows())


def directed_crawl(g, seeds):
    """Subgraph of all triples reachable by following subject->object edges
    from the seed entities. Ids and dictionaries are preserved, so crawling a
    crawl with the same seeds returns the same graph.
    """
    seeds = set(seeds)
    for s in seeds:
        if not (isinstance(s, int) and 0 <= s < g.num_entities):
            raise DataError(f"unknown seed entity id: {s!r}")
    by_subject = {}
    for t in g.triples:
        by_subject.setdefault(t.subject, []).append(t)
    visited = set(seeds)
    frontier = list(seeds)
    included = set()
    while frontier:
        e = frontier.pop()
        for t in by_subject.get(e, ()):
            included.add(t)
            if not t.object_is_literal and t.object not in visited:
                visited.add(t.object)
                frontier.append(t.object)
    return KnowledgeGraph(
        entity_names=g.entity_names,
        relation_names=g.relation_names,
        literal_values=g.literal_values,
        triples=tuple(t for t in g.triples if t in included),
    )


@dataclass(frozen=True)
class Fingerprint:
    """Fixed-length bit set identifying a chemical's structural features.

    Bits are stored as an integer mask; bit index 0 is the most significant
    bit of the first hex digit in the file encoding.
    """

    length: int
    bits: int = 0

    @classmethod
    def from_hex(cls, hexstring):
        try:
            bits = int(hexstring, 16) if hexstring else 0
        except ValueError:
            raise DataError(f"invalid hex bitstring: {hexstring!r}") from None
        return cls(length=4 * len(hexstring), bits=bits)

    @classmethod
    def from_indices(cls, length, indices):
        bits = 0
        for i in indices:
            if not 0 <= i < length:
                raise DataError(f"bit index {i} out of range for length {length}")
            bits |= 1 << (length - 1 - i)
        return cls(length=length, bits=bits)

    def to_hex(self):
        return format(self.bits, f"0{max(1, (self.length + 3) // 4)}x")


def tanimoto(a, b):
    """Jaccard similarity of two equal-length fingerprints; 1 when both empty."""
    if a.length != b.length:
        raise DataError(f"fingerprint length mismatch: {a.length} != {b.length}")
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union


def load_fingerprints(path):
    """Load `entity<TAB>hex-bitstring` lines into a name->Fingerprint map."""
    fps = {}
    length = None
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
            name, hexstring = parts
            if name in fps:
                raise DataError(f"{path}:{lineno}: duplicate entity {name!r}")
            fp = Fingerprint.from_hex(hexstring)
            if length is None:
                length = fp.length
            elif fp.length != length:
                raise DataError(
                    f"{path}:{lineno}: fingerprint length {fp.length} differs "
                    f"from earlier length {length}"
                )
            fps[name] = fp
    return fps


def similarity_pairs(fps, threshold):
    """All ordered key pairs with tanimoto >= threshold (both directions)."""
    if not 0.0 <= threshold <= 1.0:
        raise DataError(f"threshold must be in [0,1], got {threshold}")
    keys = sorted(fps)
    pairs = set()
    for i, a in enumerate(keys):
        for b in keys[i + 1 :]:
            if tanimoto(fps[a], fps[b]) >= threshold:
                pairs.add((a, b))
                pairs.add((b, a))
    return pairs


def emit_similarity_triples(fps, threshold, relation_id=0):
    """Similarity triples over entity-id keyed fingerprints, both directions."""
    return {
        Triple(a, relation_id, b) for a, b in similarity_pairs(fps, threshold)
    }


@dataclass(frozen=True)
class GraphStats:
    """Density and entropy summary of a graph.

    rd: triples per relation; ed: triple endpoints per entity;
    ad: triples over ordered entity pairs; re / ee: relation / entity
    frequency entropies in nats.
    """

    rd: float
    ed: float
    ad: float
    re: float
    ee: float
    num_triples: int = 0
    num_entities: int = 0
    num_relations: int = 0

    field_order = ("rd", "ed", "ad", "re", "ee")


def compute_stats(g):
    """Relation density RD=|T|/|R|, entity degree ED=2|T|/|E|, atomic density
    AD=|T|/(|E|(|E|-1)), and entropies RE, EE of the relation and entity
    frequency distributions (natural log). Literal objects count as endpoints
    of their triple but not as entities.
    """
    nt, ne, nr = g.num_triples, g.num_entities, g.num_relations
    if nt < 1:
        raise DataError("stats are undefined for an empty graph")
    if ne < 2:
        raise DataError("stats require at least 2 entities")
    rel_counts = [0] * nr
    ent_counts = [0] * ne
    for t in g.triples:
        rel_counts[t.predicate] += 1
        ent_counts[t.subject] += 1
        if not t.object_is_literal:
            ent_counts[t.object] += 1

    def entropy(counts):
        total = nt
        return -sum(
            (c / total) * math.log(c / total) for c in counts if c > 0
        )

    return GraphStats(
        rd=nt / nr,
        ed=2 * nt / ne,
        ad=nt / (ne * (ne - 1)),
        re=entropy(rel_counts),
        ee=entropy(ent_counts),
        num_triples=nt,
        num_entities=ne,
        num_relations=nr,
    )
