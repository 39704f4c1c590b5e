"""Time-series alignment on multiscale manifolds.

Aligns two sequences of possibly different dimensionality by combining
dynamic time warping with spectral graph embeddings: diffusion-wavelet
trees provide multiscale bases, manifold alignment couples the two
sequences through a correspondence matrix, and the warping loops alternate
joint embedding with DTW until the correspondence stabilizes.
"""

from .align import (
    JointEmbedding,
    MmaResult,
    generalized_eig_pinv,
    loss_ma,
    lra,
    mma,
    mma_solve,
)
from .data import (
    AlignmentPath,
    GENERATOR_KINDS,
    NonNumericCellError,
    RaggedRowError,
    TimeSeries,
    alignment_error,
    gen_synthetic,
    load_timeseries_csv,
    save_timeseries_csv,
    synthetic_with_latent,
)
from .dtw import (
    dtw_align,
    load_path_csv,
    matrix_to_path,
    path_to_matrix,
    save_path_csv,
    validate_dtw_matrix,
)
from .embed import (
    Embedding,
    LinearMap,
    diffusion_tree,
    laplacian_eigenmaps,
    lpp,
    multiscale_eigenmaps,
    multiscale_lpp,
    select_level,
)
from .graph import (
    GraphMatrices,
    JointGraph,
    LowRankReconstruction,
    block_M,
    chain_weights,
    correspondence_laplacian,
    heat_kernel_knn,
    joint_weight,
    knn_edges,
    laplacians,
    low_rank_affinity,
    low_rank_reconstruct,
    top_edges,
)
from .warp import (
    WarpConfig,
    WarpResult,
    curve_warp,
    loss_wow,
    manifold_warp_baseline,
    save_warp_result,
    wamm,
    wow,
)
from .wavelets import (
    DwtLevel,
    WaveletTree,
    build_dwt,
    extended_basis,
    rank_revealing_qr,
    transport_vector,
)

__version__ = "0.1.0"
