use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use super::{coefficients_with, search_level, Base, LipschitzParams, PairSearch};
use crate::energy::{energy_m, EnergySequence, VertexFunction};
use crate::error::{FractalError, Result};
use crate::function::Sampler;
use crate::harmonic::HarmonicStructure;
use crate::ifs::FractalSystem;
use crate::summation::KahanSum;

/// Relative change of a ratio between levels `n − 1` and `n` still counted as stable.
pub const STABILITY_TOLERANCE: f64 = 0.1;

/// Both norms of one function, computed against the counting measure on `V_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub tag: String,
    /// `(m, b_m)` for `m = 1..=m_max`.
    pub b_values: Vec<(usize, f64)>,
    pub a_values: Vec<(usize, f64)>,
    pub sup_b: f64,
    pub sup_a: f64,
    pub l2_norm: f64,
    /// `‖f‖_2 + sup_m` of the coefficients in the configured base.
    pub lip_norm: f64,
    /// `E^(m_max)`.
    pub dirichlet_energy: f64,
    pub dirichlet_norm: f64,
    /// `None` when the Dirichlet norm vanishes.
    pub ratio: Option<f64>,
    pub energies: EnergySequence,
    /// Approximation level `n`.
    pub level: usize,
    /// Whether `n >= m_max + 3`.
    pub resolution_margin_ok: bool,
}

/// Reports for a batch of functions sharing one pair enumeration per index.
pub fn norm_reports<S: Sampler>(
    system: &FractalSystem,
    hs: &HarmonicStructure,
    functions: &[S],
    params: &LipschitzParams,
    m_max: usize,
    level: usize,
) -> Result<Vec<NormReport>> {
    if level <= m_max {
        return Err(FractalError::ResolutionTooCoarse { m: m_max, level });
    }
    system.check_level(level)?;
    let samples = functions
        .iter()
        .map(|f| f.sample(system, hs, level))
        .collect::<Result<Vec<VertexFunction>>>()?;
    let values: Vec<&[f64]> = samples.iter().map(VertexFunction::values).collect();

    let mut searches: BTreeMap<usize, PairSearch<'_>> = BTreeMap::new();
    // keyed by (search level, base value, m); a_m and b_m coincide when L = 2
    let mut rows: BTreeMap<(usize, u64, usize), Vec<f64>> = BTreeMap::new();
    let mut b_rows = Vec::with_capacity(m_max);
    let mut a_rows = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        for (base, out) in [(Base::Scale, &mut b_rows), (Base::Two, &mut a_rows)] {
            let s = search_level(system, base, m);
            let key = (s, base.value(system).to_bits(), m);
            let row = match rows.entry(key) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => {
                    let search = searches
                        .entry(s)
                        .or_insert_with(|| PairSearch::new(system, level, s));
                    e.insert(coefficients_with(search, &values, m, base, params)?)
                }
            };
            out.push(row.clone());
        }
    }

    let count = system.vertex_count(level) as f64;
    functions
        .iter()
        .zip(&samples)
        .enumerate()
        .map(|(k, (function, sample))| {
            let b_values: Vec<(usize, f64)> = b_rows.iter().enumerate().map(|(i, r)| (i + 1, r[k])).collect();
            let a_values: Vec<(usize, f64)> = a_rows.iter().enumerate().map(|(i, r)| (i + 1, r[k])).collect();
            let sup_b = supremum(&b_values);
            let sup_a = supremum(&a_values);
            let squares: KahanSum = sample.values().iter().map(|v| v * v).collect();
            let l2_norm = (squares.value() / count).sqrt();
            let lip_norm = l2_norm
                + match params.base {
                    Base::Scale => sup_b,
                    Base::Two => sup_a,
                };
            let entries = (0..=m_max)
                .map(|m| Ok((m, energy_m(system, hs, &sample.restrict(system, m)?)?)))
                .collect::<Result<Vec<_>>>()?;
            let energies = EnergySequence::from_entries(function.tag(), entries);
            let dirichlet_energy = energies.limit_estimate.max(0.0);
            let dirichlet_norm = (dirichlet_energy + l2_norm * l2_norm).sqrt();
            let ratio = (dirichlet_norm > 0.0).then(|| lip_norm / dirichlet_norm);
            Ok(NormReport {
                tag: function.tag(),
                b_values,
                a_values,
                sup_b,
                sup_a,
                l2_norm,
                lip_norm,
                dirichlet_energy,
                dirichlet_norm,
                ratio,
                energies,
                level,
                resolution_margin_ok: level >= m_max + 3,
            })
        })
        .collect()
}

pub fn norm_report(
    system: &FractalSystem,
    hs: &HarmonicStructure,
    function: &dyn Sampler,
    params: &LipschitzParams,
    m_max: usize,
    level: usize,
) -> Result<NormReport> {
    Ok(norm_reports(system, hs, &[function], params, m_max, level)?.remove(0))
}

fn supremum(values: &[(usize, f64)]) -> f64 {
    values.iter().map(|v| v.1).fold(0.0, f64::max)
}

/// Ratio of one function at levels `n` and `n − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stability {
    pub tag: String,
    pub ratio: f64,
    pub previous_ratio: f64,
    pub relative_change: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub reports: Vec<NormReport>,
    /// Tags of functions whose ratio is undefined.
    pub excluded: Vec<String>,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    /// `max(max ratio, 1 / min ratio)`.
    pub c_empirical: Option<f64>,
    pub stability: Vec<Stability>,
}

impl ExperimentSummary {
    pub fn all_stable(&self) -> bool {
        self.stability.iter().all(|s| s.stable)
    }
}

/// Runs [`norm_reports`] at levels `n` and `n − 1` and summarizes the ratios.
pub fn equivalence_experiment<S: Sampler>(
    system: &FractalSystem,
    hs: &HarmonicStructure,
    corpus: &[S],
    params: &LipschitzParams,
    m_max: usize,
    level: usize,
) -> Result<ExperimentSummary> {
    if corpus.is_empty() {
        return Err(FractalError::EmptyCorpus);
    }
    let reports = norm_reports(system, hs, corpus, params, m_max, level)?;
    let previous = norm_reports(system, hs, corpus, params, m_max, level - 1)?;

    let mut excluded = Vec::new();
    let mut stability = Vec::new();
    let mut min_ratio: Option<f64> = None;
    let mut max_ratio: Option<f64> = None;
    for (now, before) in reports.iter().zip(&previous) {
        let Some(ratio) = now.ratio else {
            excluded.push(now.tag.clone());
            continue;
        };
        min_ratio = Some(min_ratio.map_or(ratio, |r| r.min(ratio)));
        max_ratio = Some(max_ratio.map_or(ratio, |r| r.max(ratio)));
        let previous_ratio = before.ratio.unwrap_or(f64::NAN);
        let relative_change = (ratio - previous_ratio).abs() / ratio;
        stability.push(Stability {
            tag: now.tag.clone(),
            ratio,
            previous_ratio,
            relative_change,
            stable: relative_change < STABILITY_TOLERANCE,
        });
    }
    let c_empirical = min_ratio.zip(max_ratio).map(|(lo, hi)| hi.max(1.0 / lo));
    Ok(ExperimentSummary {
        reports,
        excluded,
        min_ratio,
        max_ratio,
        c_empirical,
        stability,
    })
}
