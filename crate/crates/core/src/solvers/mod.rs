mod ov;
mod ring;
mod stack;
mod transforms;
mod vmv;

pub use ov::{class_mu, ov_count, ov_count_mod, ov_count_with, ov_decide, CountMethod, OvDecider, OvOutcome, PointSet};
pub use ring::{Boolean, Counting, Exact, GroupRing, Ring};
pub use stack::{
    circuit_factors, depth_d_stack, disjointness_base, disjointness_stack, mf_pipeline, stack_apply, stack_product,
    stack_size, MfCircuit,
};
pub use transforms::{apply_disjointness, mobius_subset, mobius_superset, wht, zeta_subset, zeta_superset};
pub use vmv::{sparse_vmv, Accum, VmvPlan, VmvResult};
