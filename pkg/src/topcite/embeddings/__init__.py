"""Text and structural embeddings: provider clients with caching, biased
random walks, skip-gram training, feature assembly."""

from .features import (FEATURE_MODES, FeatureMatrix, assemble_features,
                       load_features, save_features)
from .sgns import (SgnsParams, sgns_pair_gradients, sgns_pair_loss,
                   train_sgns, train_sgns_verbose)
from .text import (DEFAULT_TEXT_DIMENSION, DEFAULT_TEXT_MODEL, CacheError,
                   DimensionError, EmbeddingCache, HashingEmbeddingProvider,
                   HttpEmbeddingProvider, ProviderError, TextEmbedding,
                   cosine_similarity, embedding_vectors,
                   fetch_text_embeddings)
from .walks import (CsrAdjacency, WalkParams, generate_walks, graph_to_csr,
                    load_walks, save_walks)

__all__ = [
    "FEATURE_MODES", "FeatureMatrix", "assemble_features", "load_features",
    "save_features", "SgnsParams", "sgns_pair_gradients", "sgns_pair_loss",
    "train_sgns", "train_sgns_verbose", "DEFAULT_TEXT_DIMENSION",
    "DEFAULT_TEXT_MODEL", "CacheError", "DimensionError", "EmbeddingCache",
    "HashingEmbeddingProvider", "HttpEmbeddingProvider", "ProviderError",
    "TextEmbedding", "cosine_similarity", "embedding_vectors",
    "fetch_text_embeddings", "CsrAdjacency", "WalkParams", "generate_walks",
    "graph_to_csr", "load_walks", "save_walks",
]
