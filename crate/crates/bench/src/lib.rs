//! Benchmark fixtures shared by the criterion targets.

use dilation_core::genlab::{random_instance, sample_random_spec, AlgebraSpec, RandomInstanceSpec};
use dilation_core::{MapInstance, TolerancePolicy};

/// Non-minimal single instance with `k` slots of `M_2` at multiplicity 3.
pub fn reducible_instance(k: usize, seed: u64) -> MapInstance {
    let spec = RandomInstanceSpec {
        seed,
        algebras: vec![AlgebraSpec::Full { n: 2 }; k],
        multiplicities: vec![3; k],
        dim_g: 1,
        dim_h: 1,
        reduce: false,
        pair_multiplicities: None,
    };
    random_instance(&spec, &TolerancePolicy::DEFAULT).expect("fixture spec is valid")
}

/// Minimal pair of the same map reached through different multiplicities.
pub fn minimal_pair(k: usize, seed: u64) -> MapInstance {
    let mut spec = sample_random_spec(seed, k, 2, 6);
    spec.pair_multiplicities = Some(spec.multiplicities.iter().map(|m| m + 1).collect());
    spec.reduce = true;
    random_instance(&spec, &TolerancePolicy::DEFAULT).expect("fixture spec is valid")
}
