//! Discrete integral Lipschitz coefficients against counting measures.
//!
//! For base `B` (2 or `L`) and index `m`,
//!
//! ```text
//! coef_m(f) = B^{mα} ( B^{md} · #V_n⁻² · Σ_{x,y ∈ V_n, |x−y| < c0/B^m} (f(x) − f(y))² )^{1/2}
//! ```
//!
//! with `p = 2`. Pairs are found inside symplex neighbourhoods `S_*` at the
//! deepest level `s` with `L^s <= B^m`, never by an all-pairs scan.

mod holder;
mod pairs;
mod report;

pub use holder::hoelder_estimate;
pub use pairs::{cutoff_threshold, PairSearch, CUTOFF_GUARD};
pub use report::{
    equivalence_experiment, norm_report, norm_reports, ExperimentSummary, NormReport, Stability,
    STABILITY_TOLERANCE,
};

use crate::characteristics::DimensionReport;
use crate::energy::VertexFunction;
use crate::error::{FractalError, Result};
use crate::ifs::FractalSystem;

/// Which number plays the role of the dyadic base.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Base {
    /// The dyadic coefficients `a_m`.
    Two,
    /// The coefficients `b_m` in the natural scale `L` of the fractal.
    Scale,
}

impl Base {
    pub fn value(self, system: &FractalSystem) -> f64 {
        match self {
            Base::Two => 2.0,
            Base::Scale => system.scale(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzParams {
    pub alpha: f64,
    /// Dimension `d` of the measure.
    pub d: f64,
    pub c0: f64,
    /// Base used for the norm; both coefficient families are always reported.
    pub base: Base,
}

impl LipschitzParams {
    /// `α = d_w / 2`, `d = d_f`, `c0` from the system, base `L`.
    pub fn natural(system: &FractalSystem, dims: &DimensionReport) -> Self {
        Self {
            alpha: dims.walk / 2.0,
            d: dims.hausdorff,
            c0: system.c0(),
            base: Base::Scale,
        }
    }

    pub fn with_base(self, base: Base) -> Self {
        Self { base, ..self }
    }

    /// `2^{α + d/2}`, the base-change constant between `a_m` and `b_m`.
    pub fn base_change_constant(&self) -> f64 {
        2f64.powf(self.alpha + self.d / 2.0)
    }
}

/// Fraction of the measured neighbour separation trusted when choosing a search level.
pub const SEPARATION_MARGIN: f64 = 0.9;

/// Deepest symplex level whose neighbourhoods `S_*` contain every pair closer
/// than `c0 / B^m`.
///
/// Symplices of `F_s` sharing no vertex are at least `σ / L^s` apart, with `σ`
/// from [`FractalSystem::neighbor_separation`]. When `σ < c0`, as on the
/// gasket, level `m` itself is too fine and a coarser level is used.
pub fn search_level(system: &FractalSystem, base: Base, m: usize) -> usize {
    let log_l = system.scale().ln();
    let log_b = base.value(system).ln();
    let by_base = m as f64 * log_b / log_l;
    let reach = SEPARATION_MARGIN * system.neighbor_separation() / system.c0();
    let by_separation = by_base + reach.ln() / log_l;
    let s = by_base.min(by_separation) + 1e-12;
    if s <= 0.0 {
        0
    } else {
        (s.floor() as usize).min(m)
    }
}

/// Coefficients of several functions sampled on one level, for one base and index.
pub fn coefficients(
    system: &FractalSystem,
    values: &[&[f64]],
    level: usize,
    m: usize,
    base: Base,
    params: &LipschitzParams,
) -> Result<Vec<f64>> {
    if level <= m {
        return Err(FractalError::ResolutionTooCoarse { m, level });
    }
    system.check_level(level)?;
    let search = PairSearch::new(system, level, search_level(system, base, m));
    coefficients_with(&search, values, m, base, params)
}

pub(crate) fn coefficients_with(
    search: &PairSearch<'_>,
    values: &[&[f64]],
    m: usize,
    base: Base,
    params: &LipschitzParams,
) -> Result<Vec<f64>> {
    let level = search.level();
    if level <= m {
        return Err(FractalError::ResolutionTooCoarse { m, level });
    }
    let system = search.system();
    let system_base = base.value(system);
    let cutoff = params.c0 / system_base.powi(m as i32);
    let weight = 1.0 / (system.vertex_count(level) as f64).powi(2);
    let scale_inner = system_base.powf(m as f64 * params.d);
    let scale_outer = system_base.powf(m as f64 * params.alpha);
    Ok(search
        .difference_sums(cutoff, values)
        .into_iter()
        .map(|sum| scale_outer * (scale_inner * weight * sum).sqrt())
        .collect())
}

/// `b_m(f)`, base `L`.
pub fn b_coefficient(
    system: &FractalSystem,
    f: &VertexFunction,
    m: usize,
    params: &LipschitzParams,
) -> Result<f64> {
    Ok(coefficients(system, &[f.values()], f.level(), m, Base::Scale, params)?[0])
}

/// `a_m(f)`, base 2.
pub fn a_coefficient(
    system: &FractalSystem,
    f: &VertexFunction,
    m: usize,
    params: &LipschitzParams,
) -> Result<f64> {
    Ok(coefficients(system, &[f.values()], f.level(), m, Base::Two, params)?[0])
}
