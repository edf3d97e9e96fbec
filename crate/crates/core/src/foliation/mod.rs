//! Shell foliation of the annulus `1 <= |y| <= ρ`, the cube diffuser, the
//! diffuser parameter solvers, and the size bounds built from them.

mod bounds;
mod cube;
mod leaves;
mod params;

pub use bounds::{
    expander_size_bound, render_markdown, sphere_remark, tarski_piece_bound, BigBound, ChainCheck, Exponent,
    LedgerEntry, PieceBound, SizeBound, SphereRemark, PRECISION,
};
pub use cube::{
    construct_cube, diffuser_check, quarter_turn, tangent_angle, CubeDiffuser, CubeGeometry, DiffuserReport,
    DiffuserRow,
};
pub use leaves::{Bin, ConsistencyReport, Foliation, LeafEstimate, MIN_BIN_SAMPLES};
pub use params::{
    annulus_expander, composed_expander_params, composed_params_with, cube_stacking_expander, delta_constraint,
    lps_gap, lps_product_count_log5, solve_delta, transversal_check, ComposedParams, ExpanderRecipe,
    TransversalReport, WordSetSpec,
};
