"""Silhouette community detection.

Nodes are embedded (NetMF or personalized PageRank), the embedding is
clustered with mini-batch k-means for a range of cluster counts, and the
partition with the highest mean Silhouette is returned.
"""

__version__ = "0.1.0"

from .graph import Graph, Partition, load_edge_list, load_partition, volume, write_edge_list, write_partition
from .embedding import Embedding, EmbeddingParams, PprParams
from .metrics import ari, modularity, nmi

__all__ = [
    "Graph", "Partition", "Embedding", "EmbeddingParams", "PprParams",
    "load_edge_list", "load_partition", "write_edge_list", "write_partition", "volume",
    "nmi", "ari", "modularity",
]
