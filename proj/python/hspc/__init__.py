"""Half-space proximal neighborhoods, exact kNN and small-world index classifiers."""

from ._core import (
    ContractError,
    DataError,
    Dataset,
    DimensionError,
    DisconnectedError,
    EmptyCandidatesError,
    EmptyDatasetError,
    EmptyNeighborhoodError,
    FormatError,
    HspcError,
    Index,
    IndexParams,
    IoError,
    Prediction,
    StaleIndexError,
    build_hsp_graph,
    classify,
    distance,
    experiment_csv,
    generate_synthetic,
    hsp_neighbors,
    knn_search,
    load_dataset,
    load_fvecs,
    run_experiment,
    verify_hsp_graph,
    vote_weights,
    write_fvecs,
)

__version__ = "0.1.0"
