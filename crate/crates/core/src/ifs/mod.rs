//! Combinatorial skeleton of a self-similar set generated by similitudes:
//! essential fixed points, the vertex sets `V_m`, the `m`-symplices with
//! their addresses, and neighbour structure.
//!
//! Vertex ids are nested: the ids of `V_m` are `0..#V_m` at every level
//! `n >= m`, so a function sampled on `V_n` restricts to `V_m` by truncation.
//! Within a level, new vertices are numbered in first-encounter order while
//! walking the symplices in lexicographic address order.

mod neighborhood;
mod registry;
mod similitude;
mod validate;

use std::fmt;

pub use neighborhood::SymplexNeighborhood;
pub use similitude::Similitude;
pub use validate::{ConditionCheck, ConditionStatus, Reflection, ValidationReport};

use crate::error::{FractalError, Result};
use registry::{PointRegistry, MAX_DIM};

/// Default cap on `M^m * #V_0`, the number of vertex incidences enumerated at the top level.
pub const DEFAULT_MAX_POINTS: usize = 2_000_000;

/// Levels always built so the finite-depth nesting check (depth 3) has data.
pub const VALIDATION_LEVEL: usize = 4;

/// Relative tolerance of the fixed-point coincidence test.
const FIXED_POINT_TOL: f64 = 1e-9;

/// Tolerances used while building; the default follows the library conventions.
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub max_points: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            max_points: DEFAULT_MAX_POINTS,
        }
    }
}

/// A symplex address `(i_1, ..., i_m)`, zero-based map indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Address(pub Vec<usize>);

impl Address {
    /// Decodes the lexicographic index of a level-`level` symplex.
    pub fn from_index(mut index: usize, level: usize, maps: usize) -> Self {
        let mut digits = vec![0; level];
        for d in digits.iter_mut().rev() {
            *d = index % maps;
            index /= maps;
        }
        Address(digits)
    }

    pub fn to_index(&self, maps: usize) -> usize {
        self.0.iter().fold(0, |acc, &d| acc * maps + d)
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Read-only view of one `m`-symplex.
#[derive(Debug, Clone, Copy)]
pub struct Symplex<'a> {
    pub level: usize,
    pub index: usize,
    /// Vertex ids of `V(S)`, slot `p` holding the image of the `p`-th point of `V_0`.
    pub vertices: &'a [u32],
    maps: usize,
}

impl Symplex<'_> {
    pub fn address(&self) -> Address {
        Address::from_index(self.index, self.level, self.maps)
    }
}

/// Essential fixed points of a family of similitudes.
///
/// Returns the distinct fixed points `x` for which some fixed point `y` and
/// indices `i != j` satisfy `ψ_i(x) = ψ_j(y)`, ordered by the index of the
/// first map fixing them.
pub fn essential_fixed_points(maps: &[Similitude]) -> Result<Vec<Vec<f64>>> {
    let fixed: Vec<Vec<f64>> = maps.iter().map(Similitude::fixed_point).collect();
    let spread = fixed
        .iter()
        .flat_map(|a| fixed.iter().map(move |b| distance(a, b)))
        .fold(0.0, f64::max);
    let tol = FIXED_POINT_TOL * spread.max(1.0);

    let mut distinct: Vec<Vec<f64>> = Vec::new();
    for p in &fixed {
        if !distinct.iter().any(|q| distance(p, q) <= tol) {
            distinct.push(p.clone());
        }
    }

    // images[i][k] = ψ_i(x_k)
    let images: Vec<Vec<Vec<f64>>> = maps
        .iter()
        .map(|m| distinct.iter().map(|x| m.apply(x)).collect::<Result<_>>())
        .collect::<Result<_>>()?;

    let essential: Vec<Vec<f64>> = (0..distinct.len())
        .filter(|&k| {
            (0..maps.len()).any(|i| {
                (0..maps.len()).filter(|&j| j != i).any(|j| {
                    (0..distinct.len()).any(|l| distance(&images[i][k], &images[j][l]) <= tol)
                })
            })
        })
        .map(|k| distinct[k].clone())
        .collect();

    if essential.len() < 2 {
        return Err(FractalError::ConditionViolation {
            condition: 1,
            detail: format!(
                "{} essential fixed point(s); at least 2 are required",
                essential.len()
            ),
        });
    }
    Ok(essential)
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Number of vertices predicted by the recursion `v_{m+1} = M v_m - k_0`.
pub fn closed_form_vertex_count(maps: usize, v0: usize, v1: usize, level: usize) -> u128 {
    let m = maps as i128;
    let k0 = m * v0 as i128 - v1 as i128;
    let lead = (m - 1) * v0 as i128 - k0;
    let value = (m.pow(level as u32) * lead + k0) / (m - 1);
    value as u128
}

/// Largest level whose enumeration stays within the point cap.
pub fn max_enumerable_level(maps: usize, v0: usize, max_points: usize) -> usize {
    let mut level = 0;
    let mut count = v0 as u128;
    while count * maps as u128 <= max_points as u128 {
        count *= maps as u128;
        level += 1;
    }
    level
}

/// A validated self-similar system with its vertex and symplex tables.
#[derive(Debug, Clone)]
pub struct FractalSystem {
    name: String,
    maps: Vec<Similitude>,
    dim: usize,
    scale: f64,
    /// Flattened coordinates of the finest level; `V_m` is a prefix.
    points: Vec<f64>,
    vertex_counts: Vec<usize>,
    /// `cells[m]` holds `M^m * #V_0` vertex ids, one row per symplex.
    cells: Vec<Vec<u32>>,
    c0: f64,
    diameter: f64,
    report: ValidationReport,
    separation: std::sync::OnceLock<f64>,
}

impl FractalSystem {
    /// Builds through `max_level` and rejects systems failing any checked condition.
    pub fn build(maps: Vec<Similitude>, max_level: usize) -> Result<Self> {
        Self::build_with(maps, max_level, BuildOptions::default())
    }

    pub fn build_with(maps: Vec<Similitude>, max_level: usize, options: BuildOptions) -> Result<Self> {
        let system = Self::build_unvalidated(maps, max_level, options)?;
        if let Some(failure) = system.report.first_failure() {
            return Err(failure);
        }
        Ok(system)
    }

    /// Builds the tables and the condition report without rejecting failures.
    pub fn build_unvalidated(
        maps: Vec<Similitude>,
        max_level: usize,
        options: BuildOptions,
    ) -> Result<Self> {
        if maps.len() < 2 {
            return Err(FractalError::InvalidSimilitude(format!(
                "at least 2 maps are required, got {}",
                maps.len()
            )));
        }
        if max_level < 1 {
            return Err(FractalError::InvalidSimilitude(
                "max_level must be at least 1".into(),
            ));
        }
        let dim = maps[0].dim();
        if dim == 0 || dim > MAX_DIM {
            return Err(FractalError::ResourceLimit(format!(
                "ambient dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        let scale = maps[0].scale();
        for m in &maps {
            if m.dim() != dim {
                return Err(FractalError::DimensionMismatch {
                    expected: dim,
                    got: m.dim(),
                });
            }
            if (m.scale() - scale).abs() > 1e-12 {
                return Err(FractalError::InvalidSimilitude(format!(
                    "maps must share one scaling factor ({} vs {})",
                    scale,
                    m.scale()
                )));
            }
        }
        for i in 0..maps.len() {
            for j in 0..i {
                if maps_coincide(&maps[i], &maps[j]) {
                    return Err(FractalError::InvalidSimilitude(format!(
                        "maps {j} and {i} are identical"
                    )));
                }
            }
        }

        let v0 = essential_fixed_points(&maps)?;
        let v0_count = v0.len();
        let built = max_level.max(VALIDATION_LEVEL);
        let incidences = (maps.len() as u128).saturating_pow(built as u32) * v0_count as u128;
        if incidences > options.max_points as u128 {
            return Err(FractalError::ResourceLimit(format!(
                "level {built} needs {incidences} vertex incidences, cap is {}",
                options.max_points
            )));
        }

        let c0 = v0
            .iter()
            .enumerate()
            .flat_map(|(i, a)| v0[..i].iter().map(move |b| distance(a, b)))
            .fold(f64::INFINITY, f64::min);

        let mut points: Vec<f64> = v0.iter().flatten().copied().collect();
        let mut vertex_counts = vec![v0_count];
        let mut cells = vec![(0..v0_count as u32).collect::<Vec<u32>>()];
        let mut buffer = vec![0.0; dim];
        let mut source = vec![0.0; dim];

        for level in 1..=built {
            let tolerance = c0 / (100.0 * scale.powi(level as i32));
            let previous_count = vertex_counts[level - 1];
            let mut registry = PointRegistry::with_points(dim, tolerance, points);
            registry.reserve(previous_count * (maps.len() - 1));
            let parent = &cells[level - 1];
            let mut table = Vec::with_capacity(parent.len() * maps.len());
            let mut hit = vec![false; previous_count];
            // memo[v] = id of ψ_i(x_v) for the map currently being applied
            let mut memo = vec![u32::MAX; previous_count];
            for map in &maps {
                memo.iter_mut().for_each(|m| *m = u32::MAX);
                for &v in parent {
                    let v = v as usize;
                    let id = if memo[v] != u32::MAX {
                        memo[v]
                    } else {
                        source.copy_from_slice(registry.point(v));
                        map.apply_into(&source, &mut buffer);
                        let id = registry.insert(&buffer);
                        memo[v] = id;
                        id
                    };
                    if (id as usize) < previous_count {
                        hit[id as usize] = true;
                    }
                    table.push(id);
                }
            }
            if let Some(missing) = hit.iter().position(|h| !h) {
                return Err(FractalError::DegenerateStructure(format!(
                    "vertex {missing} of V_{} does not reappear in V_{level}",
                    level - 1
                )));
            }
            vertex_counts.push(registry.len());
            points = registry.into_points();
            cells.push(table);
        }

        let diam_level = 3.min(built);
        let diam_points = &points[..vertex_counts[diam_level] * dim];
        let mut diameter: f64 = 0.0;
        for a in diam_points.chunks_exact(dim) {
            for b in diam_points.chunks_exact(dim) {
                diameter = diameter.max(distance(a, b));
            }
        }

        let mut system = Self {
            name: String::new(),
            maps,
            dim,
            scale,
            points,
            vertex_counts,
            cells,
            c0,
            diameter,
            report: ValidationReport::default(),
            separation: std::sync::OnceLock::new(),
        };
        system.report = validate::validate(&system);
        Ok(system)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn maps(&self) -> &[Similitude] {
        &self.maps
    }

    /// `M`, the number of maps.
    pub fn map_count(&self) -> usize {
        self.maps.len()
    }

    /// `N`, the ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `L`, the common scaling factor.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Minimum pairwise distance within `V_0`.
    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// `diam(V_3)`, used as the diameter of the attractor.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    /// Deepest level with vertex and symplex tables.
    pub fn max_level(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level > self.max_level() {
            return Err(FractalError::LevelOverflow {
                requested: level,
                max: self.max_level(),
            });
        }
        Ok(())
    }

    /// `#V_0`, also the number of vertices per symplex.
    pub fn boundary_count(&self) -> usize {
        self.vertex_counts[0]
    }

    /// `#V_m`.
    pub fn vertex_count(&self, level: usize) -> usize {
        self.vertex_counts[level]
    }

    /// `#F_m = M^m`.
    pub fn symplex_count(&self, level: usize) -> usize {
        self.cells[level].len() / self.boundary_count()
    }

    pub fn point(&self, id: usize) -> &[f64] {
        &self.points[id * self.dim..(id + 1) * self.dim]
    }

    /// Flattened coordinates of `V_m`.
    pub fn level_points(&self, level: usize) -> &[f64] {
        &self.points[..self.vertex_counts[level] * self.dim]
    }

    /// Flattened vertex table of level `m`: row `s` is `V(S_s)`.
    pub fn cell_table(&self, level: usize) -> &[u32] {
        &self.cells[level]
    }

    pub fn symplex(&self, level: usize, index: usize) -> Symplex<'_> {
        let k = self.boundary_count();
        Symplex {
            level,
            index,
            vertices: &self.cells[level][index * k..(index + 1) * k],
            maps: self.map_count(),
        }
    }

    pub fn symplices(&self, level: usize) -> impl Iterator<Item = Symplex<'_>> + '_ {
        (0..self.symplex_count(level)).map(move |s| self.symplex(level, s))
    }

    /// Weight of each atom of the normalized counting measure on `V_n`.
    pub fn counting_measure_weight(&self, level: usize) -> f64 {
        1.0 / self.vertex_count(level) as f64
    }

    /// Pairs of distinct `m`-neighbours, each listed once with the smaller id first.
    pub fn neighbor_edges(&self, level: usize) -> Vec<(u32, u32)> {
        let mut edges: Vec<(u32, u32)> = self
            .symplices(level)
            .flat_map(|s| {
                let v = s.vertices;
                (0..v.len()).flat_map(move |p| {
                    (p + 1..v.len()).map(move |q| (v[p].min(v[q]), v[p].max(v[q])))
                })
            })
            .filter(|(a, b)| a != b)
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// All addresses `(i_1..i_m)` under which `id` appears as `ψ_{i_1}∘…∘ψ_{i_m}(x)`, `x ∈ V_0`.
    pub fn point_addresses(&self, level: usize, id: usize) -> Vec<Address> {
        self.symplices(level)
            .filter(|s| s.vertices.iter().any(|&v| v as usize == id))
            .map(|s| s.address())
            .collect()
    }

    /// Ids of `V_n ∩ S` for the level-`m` symplex `index`, sorted.
    pub fn vertices_in_symplex(&self, m: usize, index: usize, n: usize) -> Vec<u32> {
        let k = self.boundary_count();
        let block = self.map_count().pow((n - m) as u32);
        let table = &self.cells[n][index * block * k..(index + 1) * block * k];
        let mut ids = table.to_vec();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// For every level-1 template vertex outside `V_0`, one `(child, slot)` where it occurs.
    pub(crate) fn template_occurrences(&self) -> Vec<(usize, usize)> {
        let k = self.boundary_count();
        let interior = self.vertex_count(1) - k;
        let mut occurrence = vec![(usize::MAX, usize::MAX); interior];
        for (pos, &id) in self.cells[1].iter().enumerate() {
            let id = id as usize;
            if id >= k && occurrence[id - k].0 == usize::MAX {
                occurrence[id - k] = (pos / k, pos % k);
            }
        }
        occurrence
    }
}

fn maps_coincide(a: &Similitude, b: &Similitude) -> bool {
    (a.rotation() - b.rotation()).amax() < 1e-12 && (a.translation() - b.translation()).amax() < 1e-12
}
