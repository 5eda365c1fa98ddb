mod cover;
mod density;
mod holes;

pub use cover::{
    cover_exponents, cover_size, entropy2, f_degree, f_size, random_cover, CoverCheck, CoverExponents, CoverOptimum,
    CoverOptions, CoveringPlan, WeightType,
};
pub use density::{density_eval, density_sup, exact_sup_two_orbits, DensityPoly, DensitySpec, DensitySup, LogCoeff};
pub use holes::{
    copy_bound, hole_fix, prune_atypical, punch_holes, verify_restricted, GroupElement, HoleFix, PruneResult, Symmetry,
    RETRY_LIMIT,
};
