"""Fast graph Fourier transforms from involutive graph symmetries."""

from .graph import (
    Bipartition,
    Graph,
    graph_from_laplacian,
    is_bipartite,
    is_k_regular_bipartite,
    laplacian,
    load_graph,
    normalized_laplacian,
    quadratic_form,
    save_graph,
)
from .symmetry import (
    NodePartition,
    involution_count,
    is_involution,
    is_phi_symmetric,
    p_phi,
    partition,
    search_involutions,
    search_involutions_tree,
)
from .decompose import (
    DecompositionResult,
    HaarStage,
    conjugated_laplacian,
    decompose,
    even_odd_components,
    haar_stage,
    haar_stage_matrix,
    split_components,
)
from .spectral import (
    RightHaarFactor,
    Spectrum,
    gft,
    jacobi_eigh,
    reorder_bipartite,
    right_haar_gft,
    right_haar_gft_normalized,
    subspace_distance,
)

from .plan import (
    DenseLeaf,
    FastGftPlan,
    Givens,
    Haar,
    OpCount,
    Permutation,
    PlanNode,
    Scale,
    Strategy,
    apply,
    apply_batch,
    apply_node_major,
    as_dense,
    dense_plan,
    deserialize,
    op_count,
    plan_fast_gft,
    serialize,
)
from .gallery import BENCHMARK_GRAPHS, GalleryEntry, gallery, get_entry
from .baseline import (
    ApproxGftPlan,
    ErrorMetrics,
    GivensLayer,
    delta_error,
    epsilon_error,
    error_metrics,
    haar_plus_approx,
    truncated_jacobi,
)

__version__ = "0.1.0"
