"""Chaotic quantum diffusion on exact statevectors."""

from ._core import (  # noqa: F401
    CostModel,
    DenoiserStack,
    DiffusionConfig,
    Ket,
    NoiseConfig,
    QaeModel,
    Rng,
    Scheme,
    StateEnsemble,
    composed_dephasing_prob,
    decode,
    dephasing_prob,
    diffuse,
    encode,
    evolve,
    execution_time,
    fidelity,
    generate,
    haar_product_state,
    hamiltonian_matrix,
    load_bundle_ensembles,
    mmd,
    moment_distance,
    moment_distance_haar,
    run_forward,
    sample_circular,
    sample_multicluster,
    swap_test_fidelity,
    tensor,
    train_qae,
    trash_loss,
    wasserstein_distance,
)

__all__ = [name for name in dir() if not name.startswith("_")]
