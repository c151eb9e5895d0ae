//! Conductivity matrices on finite vertex sets, the reproduction and
//! decimation maps, and the renormalization fixed point that yields the
//! symmetric nondegenerate harmonic structure and the resistance factor `ρ`.

use nalgebra::DMatrix;

use crate::error::{FractalError, Result};
use crate::ifs::{distance, FractalSystem};
use crate::summation::KahanSum;

const INVARIANT_TOL: f64 = 1e-12;

/// Symmetric matrix with nonnegative off-diagonal entries and zero row sums.
///
/// The associated form is `E(f, f) = ½ Σ_{x,y} a_{x,y} (f(x) − f(y))²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductivityMatrix {
    ids: Vec<usize>,
    entries: DMatrix<f64>,
}

impl ConductivityMatrix {
    /// Validates symmetry, off-diagonal signs and zero row sums (to `1e-12` relative).
    pub fn new(ids: Vec<usize>, entries: DMatrix<f64>) -> Result<Self> {
        let n = ids.len();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(FractalError::IndexMismatch(format!(
                "{n} ids for a {}x{} matrix",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let scale = entries.amax().max(1.0);
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                let a = entries[(i, j)];
                row += a;
                if (a - entries[(j, i)]).abs() > INVARIANT_TOL * scale {
                    return Err(FractalError::DegenerateStructure(format!(
                        "conductivity matrix is not symmetric at ({i},{j})"
                    )));
                }
                if i != j && a < -INVARIANT_TOL * scale {
                    return Err(FractalError::DegenerateStructure(format!(
                        "negative conductance {a} at ({i},{j})"
                    )));
                }
            }
            if row.abs() > INVARIANT_TOL * scale * n as f64 {
                return Err(FractalError::DegenerateStructure(format!(
                    "row {i} sums to {row}"
                )));
            }
        }
        Ok(Self { ids, entries })
    }

    /// Builds the matrix from off-diagonal conductances; the diagonal balances each row.
    pub fn from_conductances(ids: Vec<usize>, conductance: impl Fn(usize, usize) -> f64) -> Self {
        let n = ids.len();
        let mut entries = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { conductance(i, j) });
        rebalance_diagonal(&mut entries);
        Self { ids, entries }
    }

    /// All off-diagonal conductances equal to one.
    pub fn unit(ids: Vec<usize>) -> Self {
        Self::from_conductances(ids, |_, _| 1.0)
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            ids: self.ids.clone(),
            entries: &self.entries * factor,
        }
    }

    /// Whether the graph of positive conductances is connected.
    pub fn is_irreducible(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && i != j && self.entries[(i, j)] > 0.0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `½ Σ a_{x,y} (f(x) − f(y))²` with `values[i]` the value at `ids()[i]`.
    pub fn energy(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(FractalError::IndexMismatch(format!(
                "function has {} values, matrix has {} vertices",
                values.len(),
                self.len()
            )));
        }
        let n = self.len();
        let mut acc = KahanSum::new();
        for i in 0..n {
            for j in i + 1..n {
                let d = values[i] - values[j];
                acc.add(self.entries[(i, j)] * d * d);
            }
        }
        Ok(acc.value())
    }
}

fn rebalance_diagonal(entries: &mut DMatrix<f64>) {
    let n = entries.nrows();
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| entries[(i, j)]).sum();
        entries[(i, i)] = -off;
    }
}

/// The form `E^{(0)}_A(f, f)` of a conductivity matrix.
pub fn energy0(a: &ConductivityMatrix, values: &[f64]) -> Result<f64> {
    a.energy(values)
}

/// Lifts a form on `V_0` to `V_1` by summing it over the `M` cells `ψ_i(V_0)`.
pub fn reproduce(system: &FractalSystem, a: &ConductivityMatrix) -> Result<ConductivityMatrix> {
    let k = system.boundary_count();
    if a.len() != k {
        return Err(FractalError::IndexMismatch(format!(
            "matrix on {} vertices, V_0 has {k}",
            a.len()
        )));
    }
    let n = system.vertex_count(1);
    let mut entries = DMatrix::zeros(n, n);
    for cell in system.symplices(1) {
        for (p, &u) in cell.vertices.iter().enumerate() {
            for (q, &w) in cell.vertices.iter().enumerate() {
                entries[(u as usize, w as usize)] += a.get(p, q);
            }
        }
    }
    Ok(ConductivityMatrix {
        ids: (0..n).collect(),
        entries,
    })
}

/// Result of eliminating the interior vertices of a network.
#[derive(Debug, Clone)]
pub struct Decimation {
    /// Trace of the form on the boundary (Schur complement).
    pub matrix: ConductivityMatrix,
    /// Ids of the eliminated vertices, in the row order of `extension`.
    pub interior: Vec<usize>,
    /// Maps boundary values to the energy-minimizing interior values.
    pub extension: DMatrix<f64>,
}

/// Restricts a form to `boundary` by minimizing over the remaining vertices.
///
/// With the Laplacian `Λ = −B` split into boundary and interior blocks, the
/// trace is `Λ_BB − Λ_BI Λ_II⁻¹ Λ_IB` and the minimizer is `−Λ_II⁻¹ Λ_IB f`.
pub fn decimate(b: &ConductivityMatrix, boundary: &[usize]) -> Result<Decimation> {
    let position = |id: usize| b.ids.iter().position(|&x| x == id);
    let bpos: Vec<usize> = boundary
        .iter()
        .map(|&id| {
            position(id).ok_or_else(|| {
                FractalError::IndexMismatch(format!("boundary id {id} not in the network"))
            })
        })
        .collect::<Result<_>>()?;
    let ipos: Vec<usize> = (0..b.len()).filter(|p| !bpos.contains(p)).collect();
    let interior: Vec<usize> = ipos.iter().map(|&p| b.ids[p]).collect();

    let lap = |r: usize, c: usize| -b.entries[(r, c)];
    let l_bb = DMatrix::from_fn(bpos.len(), bpos.len(), |i, j| lap(bpos[i], bpos[j]));
    if ipos.is_empty() {
        let mut entries = -l_bb;
        rebalance_diagonal(&mut entries);
        return Ok(Decimation {
            matrix: ConductivityMatrix {
                ids: boundary.to_vec(),
                entries,
            },
            interior,
            extension: DMatrix::zeros(0, bpos.len()),
        });
    }
    let l_ii = DMatrix::from_fn(ipos.len(), ipos.len(), |i, j| lap(ipos[i], ipos[j]));
    let l_ib = DMatrix::from_fn(ipos.len(), bpos.len(), |i, j| lap(ipos[i], bpos[j]));

    let chol = l_ii.cholesky().ok_or(FractalError::SingularInterior)?;
    let solved = chol.solve(&l_ib);
    let schur = l_bb - l_ib.transpose() * &solved;
    let mut entries = -(&schur + schur.transpose()) * 0.5;
    rebalance_diagonal(&mut entries);
    Ok(Decimation {
        matrix: ConductivityMatrix {
            ids: boundary.to_vec(),
            entries,
        },
        interior,
        extension: -solved,
    })
}

/// Unordered pairs of `V_0` grouped into orbits of the symmetry group.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitClasses {
    /// Class index of the pair `(i, j)`, stored symmetrically; diagonal unused.
    class_of: Vec<Vec<usize>>,
    /// Member pairs `(i, j)` with `i < j`, per class. Class 0 contains a closest pair.
    pub classes: Vec<Vec<(usize, usize)>>,
    /// Euclidean length of the pairs of each class.
    pub lengths: Vec<f64>,
}

impl OrbitClasses {
    /// Orbits of the pairs under the group generated by the permutations.
    pub fn new(system: &FractalSystem, generators: &[Vec<usize>]) -> Self {
        let k = system.boundary_count();
        let pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .collect();
        let index = |i: usize, j: usize| pairs.iter().position(|&p| p == (i.min(j), i.max(j))).unwrap();
        let mut parent: Vec<usize> = (0..pairs.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for g in generators {
            for (p, &(i, j)) in pairs.iter().enumerate() {
                let q = index(g[i], g[j]);
                let (a, b) = (find(&mut parent, p), find(&mut parent, q));
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
        for p in 0..pairs.len() {
            let root = find(&mut parent, p);
            match groups.iter_mut().find(|(r, _)| *r == root) {
                Some((_, members)) => members.push(pairs[p]),
                None => groups.push((root, vec![pairs[p]])),
            }
        }
        let len = |&(i, j): &(usize, usize)| distance(system.point(i), system.point(j));
        let tol = system.c0() * 1e-9;
        groups.sort_by(|a, b| {
            let (la, lb) = (len(&a.1[0]), len(&b.1[0]));
            if (la - lb).abs() <= tol {
                a.1[0].cmp(&b.1[0])
            } else {
                la.total_cmp(&lb)
            }
        });
        let classes: Vec<Vec<(usize, usize)>> = groups.into_iter().map(|(_, m)| m).collect();
        let lengths = classes.iter().map(|m| len(&m[0])).collect();
        let mut class_of = vec![vec![usize::MAX; k]; k];
        for (c, members) in classes.iter().enumerate() {
            for &(i, j) in members {
                class_of[i][j] = c;
                class_of[j][i] = c;
            }
        }
        Self {
            class_of,
            classes,
            lengths,
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, i: usize, j: usize) -> usize {
        self.class_of[i][j]
    }

    /// Per-class averages of the off-diagonal entries.
    pub fn project(&self, a: &ConductivityMatrix) -> Vec<f64> {
        self.classes
            .iter()
            .map(|m| m.iter().map(|&(i, j)| a.get(i, j)).sum::<f64>() / m.len() as f64)
            .collect()
    }

    pub fn assemble(&self, values: &[f64]) -> ConductivityMatrix {
        let k = self.class_of.len();
        ConductivityMatrix::from_conductances((0..k).collect(), |i, j| values[self.class_of(i, j)])
    }
}

/// Stopping rules of the renormalization iteration.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 10_000,
            damping: 0.5,
        }
    }
}

/// The symmetric nondegenerate harmonic structure of a system.
#[derive(Debug, Clone)]
pub struct HarmonicStructure {
    /// NDHS on `V_0`, normalized so the nearest-neighbour class has conductance 1.
    pub matrix: ConductivityMatrix,
    pub rho: f64,
    pub orbits: OrbitClasses,
    pub class_values: Vec<f64>,
    /// Rows: level-1 vertices `#V_0..#V_1`; columns: `V_0`.
    pub extension: DMatrix<f64>,
    /// `(gap, ρ estimate)` per iteration.
    pub trace: Vec<(f64, f64)>,
    /// `‖ρ T(A) − A‖_∞` at the returned structure.
    pub residual: f64,
}

impl HarmonicStructure {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Composite map `T = De ∘ R`.
pub fn renormalize(system: &FractalSystem, a: &ConductivityMatrix) -> Result<Decimation> {
    let lifted = reproduce(system, a)?;
    let boundary: Vec<usize> = (0..system.boundary_count()).collect();
    decimate(&lifted, &boundary)
}

/// Solves `(De ∘ R)(E_A) = E_A / ρ` starting from the unit matrix.
pub fn solve_ndhs(system: &FractalSystem) -> Result<HarmonicStructure> {
    let initial = ConductivityMatrix::unit((0..system.boundary_count()).collect());
    solve_ndhs_from(system, &initial, SolveOptions::default())
}

/// Normalized fixed-point iteration restricted to the symmetry-invariant cone.
pub fn solve_ndhs_from(
    system: &FractalSystem,
    initial: &ConductivityMatrix,
    options: SolveOptions,
) -> Result<HarmonicStructure> {
    let orbits = OrbitClasses::new(system, &system.report().vertex_permutations());
    let mut values = orbits.project(initial);
    if values[0] <= 0.0 {
        return Err(FractalError::DegenerateStructure(
            "initial nearest-neighbour conductance must be positive".into(),
        ));
    }
    let first = values[0];
    values.iter_mut().for_each(|v| *v /= first);

    let mut trace = Vec::new();
    let mut previous_step: Option<Vec<f64>> = None;
    let mut converged = false;
    for _ in 0..options.max_iterations {
        let a = orbits.assemble(&values);
        let image = orbits.project(&renormalize(system, &a)?.matrix);
        if !(image[0] > 0.0) {
            return Err(FractalError::DegenerateStructure(
                "renormalized nearest-neighbour conductance vanished".into(),
            ));
        }
        let rho = values[0] / image[0];
        let step: Vec<f64> = image
            .iter()
            .zip(&values)
            .map(|(t, v)| t / image[0] - v)
            .collect();
        let oscillating = previous_step
            .as_ref()
            .is_some_and(|prev| prev.iter().zip(&step).map(|(p, s)| p * s).sum::<f64>() < 0.0);
        let factor = if oscillating { options.damping } else { 1.0 };
        let mut gap: f64 = 0.0;
        for (v, s) in values.iter_mut().zip(&step) {
            *v += factor * s;
            gap = gap.max((factor * s).abs());
        }
        trace.push((gap, rho));
        previous_step = Some(step);
        if gap < options.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        let last_gap = trace.last().map_or(f64::NAN, |t| t.0);
        return Err(FractalError::NoConvergence {
            iterations: options.max_iterations,
            last_gap,
            trace,
        });
    }

    let matrix = orbits.assemble(&values);
    let decimation = renormalize(system, &matrix)?;
    let image = decimation.matrix.entries();
    let (i, j) = orbits.classes[0][0];
    let rho = matrix.get(i, j) / image[(i, j)];
    let residual = (image * rho - matrix.entries()).amax();
    Ok(HarmonicStructure {
        matrix,
        rho,
        class_values: values,
        orbits,
        extension: decimation.extension,
        trace,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn gasket() -> FractalSystem {
        FractalSystem::build(presets::gasket2_maps(), 2).unwrap()
    }

    #[test]
    fn energy_of_indicator_on_unit_triangle() {
        let a = ConductivityMatrix::unit(vec![0, 1, 2]);
        assert_eq!(energy0(&a, &[1.0, 0.0, 0.0]).unwrap(), 2.0);
        assert_eq!(energy0(&a, &[4.0, 4.0, 4.0]).unwrap(), 0.0);
        assert!(energy0(&a, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn energy_is_quadratic() {
        let a = ConductivityMatrix::from_conductances(vec![0, 1, 2, 3], |i, j| 1.0 + (i + j) as f64);
        let f = [0.3, -1.2, 2.5, 0.7];
        let g: Vec<f64> = f.iter().map(|v| 3.0 * v).collect();
        let (ef, eg) = (a.energy(&f).unwrap(), a.energy(&g).unwrap());
        assert!((eg - 9.0 * ef).abs() < 1e-12 * eg);
    }

    #[test]
    fn validation_catches_broken_matrices() {
        let bad = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, 0.0]);
        assert!(ConductivityMatrix::new(vec![0, 1], bad).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!(ConductivityMatrix::new(vec![0, 1], neg).is_err());
        let ok = DMatrix::from_row_slice(2, 2, &[-2.0, 2.0, 2.0, -2.0]);
        assert!(ConductivityMatrix::new(vec![0, 1], ok).unwrap().is_irreducible());
    }

    #[test]
    fn reproduce_gasket_unit_matrix() {
        let g = gasket();
        let b = reproduce(&g, &ConductivityMatrix::unit(vec![0, 1, 2])).unwrap();
        let e = b.entries();
        let mut unit_edges = 0;
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert!(e[(i, j)] == 0.0 || e[(i, j)] == 1.0);
                    if e[(i, j)] == 1.0 {
                        unit_edges += 1;
                    }
                }
            }
        }
        assert_eq!(unit_edges, 18);
        // corners belong to one cell, midpoints to two
        let diag: Vec<f64> = (0..6).map(|i| e[(i, i)]).collect();
        assert_eq!(&diag[..3], &[-2.0, -2.0, -2.0]);
        assert_eq!(&diag[3..], &[-4.0, -4.0, -4.0]);
        assert!(ConductivityMatrix::new(b.ids().to_vec(), e.clone()).is_ok());
    }

    #[test]
    fn decimate_gasket_gives_three_fifths() {
        let g = gasket();
        let unit = ConductivityMatrix::unit(vec![0, 1, 2]);
        let d = renormalize(&g, &unit).unwrap();
        let expected = unit.scaled(0.6);
        assert!((d.matrix.entries() - expected.entries()).amax() < 1e-12);
        let mid = &d.extension * nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let mut values: Vec<f64> = mid.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        for (v, e) in values.iter().zip([0.2, 0.4, 0.4]) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn decimation_without_interior_is_identity() {
        let a = ConductivityMatrix::from_conductances(vec![0, 1, 2], |i, j| (i + j) as f64 + 0.5);
        let d = decimate(&a, &[0, 1, 2]).unwrap();
        assert!((d.matrix.entries() - a.entries()).amax() < 1e-15);
        assert_eq!(d.extension.nrows(), 0);
    }

    #[test]
    fn isolated_interior_vertex_is_singular() {
        // vertex 2 is not connected to anything
        let a = ConductivityMatrix::from_conductances(vec![0, 1, 2], |i, j| if i + j == 1 { 1.0 } else { 0.0 });
        assert!(matches!(decimate(&a, &[0, 1]), Err(FractalError::SingularInterior)));
    }

    #[test]
    fn gasket_ndhs() {
        let hs = solve_ndhs(&gasket()).unwrap();
        assert!((hs.rho - 5.0 / 3.0).abs() < 1e-12);
        assert_eq!(hs.orbits.len(), 1);
        assert!(hs.residual < 1e-10);
    }

    #[test]
    fn ndhs_ignores_initial_scale() {
        let g = gasket();
        let base = solve_ndhs(&g).unwrap();
        let scaled = solve_ndhs_from(
            &g,
            &ConductivityMatrix::unit(vec![0, 1, 2]).scaled(7.0),
            SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(base.rho, scaled.rho);
        assert!((base.matrix.entries() - scaled.matrix.entries()).amax() < 1e-14);
    }

    #[test]
    fn snowflake_orbit_classes() {
        let s = FractalSystem::build(presets::snowflake_maps(), 1).unwrap();
        let orbits = OrbitClasses::new(&s, &s.report().vertex_permutations());
        assert_eq!(orbits.len(), 3);
        let sizes: Vec<usize> = orbits.classes.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![6, 6, 3]);
        assert!((orbits.lengths[0] - 1.0).abs() < 1e-12);
        assert!((orbits.lengths[1] - 3f64.sqrt()).abs() < 1e-12);
        assert!((orbits.lengths[2] - 2.0).abs() < 1e-12);
    }
}
