"""toxkg: knowledge-graph embeddings and binary effect prediction.

Subpackages / modules:
    kgstore     triple store, fingerprints, graph statistics
    align       lexical vocabulary alignment
    kge         embedding models: configs, tables, scoring, gradients, checkpoints
    kernels     score/gradient kernel backends (compiled + numpy)
    train       losses, negative sampling, Adam, KGE training, random search
    effects     effect-data pipeline: parsing, units, labels, dedup, splits
    classifier  MLP effect classifier, pre-trained and fine-tuned variants
    evalmetrics confusion counts, Youden index, explained variance
    cli         command-line interface
"""

__version__ = "0.1.0"
