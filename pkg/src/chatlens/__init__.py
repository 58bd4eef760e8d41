"""chatlens: batch analytics for live-stream chat corpora.

Ingestion, text preprocessing, subword embeddings with lexicon expansion,
collocation mining, Gibbs-sampled topic models with coherence-based model
selection, frequent-pattern mining, and feature-importance analysis, tied
together by the ``chatlens`` command-line pipeline.
"""

__version__ = "0.1.0"
