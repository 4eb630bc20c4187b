//! Explicit constructions of proved highway families, checked by direct
//! simulation: the fundamental and harmonic highways of the `L^(2k)R` ants,
//! the mined `L^(2k+1)R` highway, and the widget-assembled `LLRLRL` family
//! with one highway per period `220 + 24n`.

mod l2kr;
mod llrlrl;

pub use l2kr::{
    almost_highway, almost_highway_trace, cycle_trace, elementary_cycle_pattern,
    fundamental_highway, harmonic_highways, harmonic_trace_witness, l2k1r_highway, l2kr_picture,
    AlmostHighway, ElementaryCycle, ParamError,
};
pub use llrlrl::{
    llrlrl_highway, observed_stage_budgets, recover_widgets, recover_widgets_by_mining,
    stage_segmentation, Stage, StageBudgets, Widget, WidgetError, WidgetSet, BUDGET_B1,
    BUDGET_B2, BUDGET_L1, BUDGET_L2, BUDGET_L3, BUDGET_L4, BUDGET_M1, BUDGET_M2,
};

/// `needle` occurs as a factor of the cyclic word `haystack`.
pub fn cyclic_contains(haystack: &[u8], needle: &[u8]) -> bool {
    if needle.len() > haystack.len() {
        return false;
    }
    let doubled: Vec<u8> = haystack.iter().chain(haystack.iter()).copied().collect();
    doubled.windows(needle.len()).any(|w| w == needle)
}
