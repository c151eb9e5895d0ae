//! Level-`m` Dirichlet energies, harmonic extension, and energy sequences.

use nalgebra::DVector;

use crate::error::{FractalError, Result};
use crate::function::Sampler;
use crate::harmonic::HarmonicStructure;
use crate::ifs::FractalSystem;
use crate::summation::KahanSum;

/// Relative slack allowed when checking `E^(m+1) >= E^(m)`.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Real values indexed by the vertex ids of `V_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    level: usize,
    values: Vec<f64>,
}

impl VertexFunction {
    pub fn new(system: &FractalSystem, level: usize, values: Vec<f64>) -> Result<Self> {
        system.check_level(level)?;
        if values.len() != system.vertex_count(level) {
            return Err(FractalError::IndexMismatch(format!(
                "{} values for #V_{level} = {}",
                values.len(),
                system.vertex_count(level)
            )));
        }
        Ok(Self { level, values })
    }

    pub fn constant(system: &FractalSystem, level: usize, value: f64) -> Result<Self> {
        system.check_level(level)?;
        Self::new(system, level, vec![value; system.vertex_count(level)])
    }

    /// Samples a function of the coordinates at every vertex of `V_m`.
    pub fn from_fn(system: &FractalSystem, level: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        system.check_level(level)?;
        let values = (0..system.vertex_count(level))
            .map(|id| f(system.point(id)))
            .collect();
        Ok(Self { level, values })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Restriction to `V_m`, `m <= level`.
    pub fn restrict(&self, system: &FractalSystem, level: usize) -> Result<Self> {
        if level > self.level {
            return Err(FractalError::LevelMismatch {
                expected: self.level,
                got: level,
            });
        }
        Ok(Self {
            level,
            values: self.values[..system.vertex_count(level)].to_vec(),
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            level: self.level,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.level != other.level {
            return Err(FractalError::LevelMismatch {
                expected: self.level,
                got: other.level,
            });
        }
        Ok(Self {
            level: self.level,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }
}

/// `E^(m)(f, f) = ρ^m Σ_{S ∈ F_m} ½ Σ_{x,y ∈ V(S)} a^(m)_{x,y} (f(x) − f(y))²`.
pub fn energy_m(system: &FractalSystem, hs: &HarmonicStructure, f: &VertexFunction) -> Result<f64> {
    let level = f.level();
    system.check_level(level)?;
    let k = system.boundary_count();
    if hs.matrix.len() != k {
        return Err(FractalError::IndexMismatch(
            "harmonic structure belongs to another system".into(),
        ));
    }
    let a = hs.matrix.entries();
    let values = f.values();
    let mut acc = KahanSum::new();
    for cell in system.cell_table(level).chunks_exact(k) {
        for p in 0..k {
            let fp = values[cell[p] as usize];
            for q in p + 1..k {
                let d = fp - values[cell[q] as usize];
                acc.add(a[(p, q)] * d * d);
            }
        }
    }
    Ok(hs.rho.powi(level as i32) * acc.value())
}

/// `E^(m)(f, g)` by polarization.
pub fn energy_bilinear(
    system: &FractalSystem,
    hs: &HarmonicStructure,
    f: &VertexFunction,
    g: &VertexFunction,
) -> Result<f64> {
    let sum = energy_m(system, hs, &f.add(g)?)?;
    let diff = energy_m(system, hs, &f.add(&g.scaled(-1.0))?)?;
    Ok(0.25 * (sum - diff))
}

/// Extends `f` from `V_m` to `V_n` cell by cell with the energy-minimizing rule.
pub fn harmonic_extension(
    system: &FractalSystem,
    hs: &HarmonicStructure,
    f: &VertexFunction,
    level: usize,
) -> Result<VertexFunction> {
    system.check_level(level)?;
    if level < f.level() {
        return Err(FractalError::LevelMismatch {
            expected: f.level(),
            got: level,
        });
    }
    let k = system.boundary_count();
    let maps = system.map_count();
    let occurrences = system.template_occurrences();
    if hs.extension.nrows() != occurrences.len() || hs.extension.ncols() != k {
        return Err(FractalError::IndexMismatch(
            "extension matrix does not match the system".into(),
        ));
    }
    let mut values = f.values().to_vec();
    for coarse in f.level()..level {
        let old = system.vertex_count(coarse);
        let fine_table = system.cell_table(coarse + 1);
        let mut next = vec![0.0; system.vertex_count(coarse + 1)];
        next[..old].copy_from_slice(&values);
        let mut assigned = vec![false; next.len() - old];
        let mut boundary = DVector::zeros(k);
        for (s, cell) in system.cell_table(coarse).chunks_exact(k).enumerate() {
            for (p, &v) in cell.iter().enumerate() {
                boundary[p] = values[v as usize];
            }
            let interior = &hs.extension * &boundary;
            for (t, &(child, slot)) in occurrences.iter().enumerate() {
                let id = fine_table[((s * maps + child) * k) + slot] as usize;
                let value = interior[t];
                if id < old || assigned[id - old] {
                    check_consistent(id, next[id], value)?;
                } else {
                    next[id] = value;
                    assigned[id - old] = true;
                }
            }
        }
        values = next;
    }
    VertexFunction::new(system, level, values)
}

fn check_consistent(vertex: usize, existing: f64, candidate: f64) -> Result<()> {
    let difference = (existing - candidate).abs();
    if difference > 1e-10 * existing.abs().max(1.0) {
        return Err(FractalError::InconsistentExtension { vertex, difference });
    }
    Ok(())
}

/// `(m, E^(m))` for consecutive levels of one function.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySequence {
    pub tag: String,
    pub entries: Vec<(usize, f64)>,
    pub limit_estimate: f64,
    pub monotone_ok: bool,
}

impl EnergySequence {
    pub fn from_entries(tag: String, entries: Vec<(usize, f64)>) -> Self {
        let monotone_ok = entries
            .windows(2)
            .all(|w| w[1].1 >= w[0].1 - MONOTONE_SLACK * w[0].1.abs().max(1.0));
        let limit_estimate = entries.last().map_or(0.0, |e| e.1);
        Self {
            tag,
            entries,
            limit_estimate,
            monotone_ok,
        }
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.1)
    }
}

/// Evaluates `E^(m)` of a sampled function for `m` in `from..=to`.
pub fn energy_sequence(
    system: &FractalSystem,
    hs: &HarmonicStructure,
    function: &dyn Sampler,
    from: usize,
    to: usize,
) -> Result<EnergySequence> {
    system.check_level(to)?;
    let finest = function.sample(system, hs, to)?;
    let entries = (from..=to)
        .map(|m| Ok((m, energy_m(system, hs, &finest.restrict(system, m)?)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnergySequence::from_entries(function.tag(), entries))
}
