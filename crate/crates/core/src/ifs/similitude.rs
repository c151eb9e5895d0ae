use nalgebra::{DMatrix, DVector};

use crate::error::{FractalError, Result};

const ORTHOGONALITY_TOL: f64 = 1e-12;

/// A contracting similitude `x -> U x / L + v` of `R^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Similitude {
    scale: f64,
    rotation: DMatrix<f64>,
    translation: DVector<f64>,
}

impl Similitude {
    /// Builds a similitude from a row-major `N x N` orthogonal matrix, a translation, and `L > 1`.
    pub fn new(scale: f64, rotation: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        let n = translation.len();
        if rotation.nrows() != n || rotation.ncols() != n {
            return Err(FractalError::DimensionMismatch {
                expected: n,
                got: rotation.nrows().max(rotation.ncols()),
            });
        }
        if !(scale > 1.0) || !scale.is_finite() {
            return Err(FractalError::InvalidSimilitude(format!(
                "scaling factor must exceed 1, got {scale}"
            )));
        }
        let gram = rotation.transpose() * &rotation;
        let deviation = (gram - DMatrix::<f64>::identity(n, n)).amax();
        if deviation > ORTHOGONALITY_TOL {
            return Err(FractalError::InvalidSimilitude(format!(
                "rotation is not orthogonal (|U^T U - I| = {deviation:e})"
            )));
        }
        Ok(Self {
            scale,
            rotation,
            translation,
        })
    }

    /// Pure scaling `x -> x / L + v`.
    pub fn homothety(scale: f64, translation: &[f64]) -> Result<Self> {
        let n = translation.len();
        Self::new(
            scale,
            DMatrix::identity(n, n),
            DVector::from_column_slice(translation),
        )
    }

    pub fn from_rows(scale: f64, rows: &[Vec<f64>], translation: &[f64]) -> Result<Self> {
        let n = translation.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(FractalError::DimensionMismatch {
                expected: n,
                got: rows.len(),
            });
        }
        let rotation = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::new(scale, rotation, DVector::from_column_slice(translation))
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.translation
    }

    pub fn rotation_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.rotation.row(i).iter().copied().collect())
            .collect()
    }

    /// Evaluates the map at `x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(FractalError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation into a caller buffer; both slices must have length `N`.
    #[inline]
    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        let inv = 1.0 / self.scale;
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate() {
                acc += self.rotation[(i, j)] * xj;
            }
            *o = acc * inv + self.translation[i];
        }
    }

    /// The unique solution of `(I - U/L) x = v`.
    pub fn fixed_point(&self) -> Vec<f64> {
        let n = self.dim();
        let system = DMatrix::<f64>::identity(n, n) - &self.rotation / self.scale;
        // I - U/L has spectral radius of U/L equal to 1/L < 1, so LU never fails here.
        let solution = system
            .lu()
            .solve(&self.translation)
            .expect("I - U/L is invertible for L > 1");
        solution.iter().copied().collect()
    }

    /// Conjugates by an affine similarity `g(x) = s Q x + t`, returning `g ∘ self ∘ g⁻¹`.
    pub fn conjugate(&self, q: &DMatrix<f64>, s: f64, t: &DVector<f64>) -> Result<Self> {
        // g ψ g⁻¹ (x) = Q U Qᵀ x / L + s Q v + t - Q U Qᵀ t / L
        let rotation = q * &self.rotation * q.transpose();
        let translation = q * &self.translation * s + t - &rotation * t / self.scale;
        Self::new(self.scale, rotation, translation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gasket_maps() -> Vec<Similitude> {
        let h = 3f64.sqrt() / 4.0;
        vec![
            Similitude::homothety(2.0, &[0.0, 0.0]).unwrap(),
            Similitude::homothety(2.0, &[0.5, 0.0]).unwrap(),
            Similitude::homothety(2.0, &[0.25, h]).unwrap(),
        ]
    }

    #[test]
    fn evaluates_gasket_maps() {
        let maps = gasket_maps();
        assert_eq!(maps[1].apply(&[0.0, 0.0]).unwrap(), vec![0.5, 0.0]);
        let p = maps[2].apply(&[1.0, 0.0]).unwrap();
        assert!((p[0] - 0.75).abs() < 1e-15);
        assert!((p[1] - 3f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn gasket_fixed_points() {
        let maps = gasket_maps();
        assert_eq!(maps[0].fixed_point(), vec![0.0, 0.0]);
        let x3 = maps[2].fixed_point();
        assert!((x3[0] - 0.5).abs() < 1e-15);
        assert!((x3[1] - 3f64.sqrt() / 2.0).abs() < 1e-15);
        for map in &maps {
            let x = map.fixed_point();
            let image = map.apply(&x).unwrap();
            let err: f64 = x.iter().zip(&image).map(|(a, b)| (a - b).abs()).sum();
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn rotated_fixed_point_has_small_residual() {
        let (s, c) = 0.7f64.sin_cos();
        let map = Similitude::from_rows(3.0, &[vec![c, -s], vec![s, c]], &[0.4, -1.3]).unwrap();
        let x = map.fixed_point();
        let image = map.apply(&x).unwrap();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let residual = x
            .iter()
            .zip(&image)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(residual <= 1e-10 * (1.0 + norm));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            gasket_maps()[0].apply(&[1.0]),
            Err(FractalError::DimensionMismatch { .. })
        ));
        assert!(Similitude::homothety(1.0, &[0.0]).is_err());
        assert!(Similitude::from_rows(2.0, &[vec![1.0, 0.1], vec![0.0, 1.0]], &[0.0, 0.0]).is_err());
    }
}
