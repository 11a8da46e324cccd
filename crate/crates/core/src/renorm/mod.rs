//! Block renormalization for the one-dimensional oriented model.
//!
//! Block events certify that a vertex `(x, m)` connects upward to both
//! `(x, m + 2(M+1))` and `(x + 2k, m + 2(M+1))` using only bonds of length at
//! most `K`. The exploration walks the wedge `{(v, u) : 0 <= v <= u}` in
//! row-major order, testing one block event per visited vertex on edges no
//! earlier step has read, so the accepted set dominates oriented site
//! percolation with parameter `1 - epsilon`.

mod events;
mod explore;
mod params;
mod wedge;

pub use events::{eval_event, nominal_footprint, BlockEvent, EventOutcome, Sign};
pub use explore::{
    block_anchor, estimate_exploration_survival, estimate_site_threshold, explore, explore_sites, site_survival,
    site_threshold_ratio, verify_coupling, CouplingReport, ExplorationState, ExplorationSurvival, SiteExploration,
    Visit, ORIENTED_SITE_THRESHOLD,
};
pub use params::{
    choose_block_params, cutoff_condition, prob_l, prob_s_exact, prob_t_exact, rounds_condition, t_bound_chain,
    BlockParams, BoundChain,
};
pub use wedge::{exterior_boundary, next_vertex, RenormVertex};
