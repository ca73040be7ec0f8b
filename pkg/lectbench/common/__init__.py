from .errors import (LectError, GraphFormatError, SplitError, DimensionMismatchError, EncoderError,
                     RemoteServiceError, GenerationError, NonFiniteError, DivergenceError, MissingArtifactError)
from .graph import TextAttributedGraph, AugmentedGraph, UNLABELED, canonical_edges
from .split import NodeSplit, build_split
from .adjacency import normalized_adjacency
from .graph_io import load_graph_json, save_graph_json, graph_from_dict
