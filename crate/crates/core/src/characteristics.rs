//! Hausdorff, walk and spectral dimensions.

use std::fmt;

use crate::error::{FractalError, Result};
use crate::harmonic::HarmonicStructure;
use crate::ifs::FractalSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionReport {
    pub maps: usize,
    pub scale: f64,
    pub rho: f64,
    /// `log M / log L`
    pub hausdorff: f64,
    /// `log(M ρ) / log L`
    pub walk: f64,
    /// `2 d_f / d_w`
    pub spectral: f64,
}

impl DimensionReport {
    pub fn from_parts(maps: usize, scale: f64, rho: f64) -> Result<Self> {
        if !(rho > 1.0) {
            return Err(FractalError::DegenerateStructure(format!(
                "resistance factor {rho} is not greater than 1"
            )));
        }
        let log_l = scale.ln();
        let hausdorff = (maps as f64).ln() / log_l;
        let walk = (maps as f64 * rho).ln() / log_l;
        Ok(Self {
            maps,
            scale,
            rho,
            hausdorff,
            walk,
            spectral: 2.0 * hausdorff / walk,
        })
    }

    /// `L^{d_w} / L^{d_f}`, which reproduces `ρ`.
    pub fn rho_from_dimensions(&self) -> f64 {
        self.scale.powf(self.walk - self.hausdorff)
    }

    /// `L^{d_w} = M ρ`.
    pub fn walk_scaling(&self) -> f64 {
        self.scale.powf(self.walk)
    }
}

impl fmt::Display for DimensionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "M = {}", self.maps)?;
        writeln!(f, "L = {}", self.scale)?;
        writeln!(f, "rho = {:.12}", self.rho)?;
        writeln!(f, "d_f = {:.12}", self.hausdorff)?;
        writeln!(f, "d_w = {:.12}", self.walk)?;
        write!(f, "d_s = {:.12}", self.spectral)
    }
}

pub fn dimensions(system: &FractalSystem, hs: &HarmonicStructure) -> Result<DimensionReport> {
    DimensionReport::from_parts(system.map_count(), system.scale(), hs.rho)
}
