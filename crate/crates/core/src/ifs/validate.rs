use std::collections::HashMap;
use std::fmt;

use super::{distance, FractalSystem};
use crate::error::FractalError;

/// Depth `k` of the nesting check `ψ_i(V_k) ∩ ψ_j(V_k) ⊆ ψ_i(V_0) ∩ ψ_j(V_0)`.
pub const NESTING_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum ConditionStatus {
    Passed,
    Failed(String),
    NotChecked(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub condition: u8,
    pub name: &'static str,
    pub status: ConditionStatus,
}

impl ConditionCheck {
    pub fn passed(&self) -> bool {
        self.status == ConditionStatus::Passed
    }
}

/// Reflection in the hyperplane bisecting two points of `V_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reflection {
    /// The `V_0` ids of the bisected segment.
    pub pair: (usize, usize),
    pub normal: Vec<f64>,
    pub midpoint: Vec<f64>,
    /// Induced permutation of `V_0`, when the reflection preserves it.
    pub permutation: Option<Vec<usize>>,
}

impl Reflection {
    fn between(a: &[f64], b: &[f64], pair: (usize, usize)) -> Self {
        let len = distance(a, b);
        Self {
            pair,
            normal: a.iter().zip(b).map(|(x, y)| (y - x) / len).collect(),
            midpoint: a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect(),
            permutation: None,
        }
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let t: f64 = p
            .iter()
            .zip(&self.midpoint)
            .zip(&self.normal)
            .map(|((x, m), n)| (x - m) * n)
            .sum();
        p.iter()
            .zip(&self.normal)
            .map(|(x, n)| x - 2.0 * t * n)
            .collect()
    }
}

/// Pass/fail record of the simple-nested-fractal conditions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<ConditionCheck>,
    pub nesting_depth: usize,
    pub symmetry_generators: Vec<Reflection>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !matches!(c.status, ConditionStatus::Failed(_)))
    }

    pub fn check(&self, condition: u8) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }

    pub fn first_failure(&self) -> Option<FractalError> {
        self.checks.iter().find_map(|c| match &c.status {
            ConditionStatus::Failed(detail) => Some(FractalError::ConditionViolation {
                condition: c.condition,
                detail: detail.clone(),
            }),
            _ => None,
        })
    }

    /// Generators whose permutation of `V_0` is known.
    pub fn vertex_permutations(&self) -> Vec<Vec<usize>> {
        self.symmetry_generators
            .iter()
            .filter_map(|r| r.permutation.clone())
            .collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = match &c.status {
                ConditionStatus::Passed if c.condition == 3 => {
                    format!("pass (verified to depth {})", self.nesting_depth)
                }
                ConditionStatus::Passed => "pass".to_string(),
                ConditionStatus::Failed(d) => format!("FAIL: {d}"),
                ConditionStatus::NotChecked(d) => format!("not checked: {d}"),
            };
            writeln!(f, "condition {} ({}): {}", c.condition, c.name, status)?;
        }
        Ok(())
    }
}

pub(super) fn validate(system: &FractalSystem) -> ValidationReport {
    let v0 = system.boundary_count();
    let mut checks = vec![ConditionCheck {
        condition: 1,
        name: "at least two essential fixed points",
        status: if v0 >= 2 {
            ConditionStatus::Passed
        } else {
            ConditionStatus::Failed(format!("#V_0 = {v0}"))
        },
    }];
    checks.push(ConditionCheck {
        condition: 2,
        name: "open set condition",
        status: ConditionStatus::NotChecked("no finite procedure decides it".into()),
    });
    let depth = NESTING_DEPTH.min(system.max_level() - 1);
    checks.push(ConditionCheck {
        condition: 3,
        name: "nesting",
        status: check_nesting(system, depth),
    });
    checks.push(ConditionCheck {
        condition: 4,
        name: "connectivity",
        status: check_connectivity(system),
    });
    let (symmetry, generators) = check_symmetry(system);
    checks.push(ConditionCheck {
        condition: 5,
        name: "symmetry",
        status: symmetry,
    });
    ValidationReport {
        checks,
        nesting_depth: depth,
        symmetry_generators: generators,
    }
}

/// `ψ_i(V_k)` is the block of level-`k+1` symplices whose address starts with `i`.
fn check_nesting(system: &FractalSystem, depth: usize) -> ConditionStatus {
    let maps = system.map_count();
    let k0 = system.boundary_count();
    let cell_sets: Vec<Vec<u32>> = (0..maps)
        .map(|i| {
            let mut ids = system.symplex(1, i).vertices.to_vec();
            ids.sort_unstable();
            ids
        })
        .collect();
    for k in 0..=depth {
        let level = k + 1;
        let block = system.symplex_count(level) / maps;
        let mut owners: Vec<Vec<u32>> = vec![Vec::new(); system.vertex_count(level)];
        for (pos, &id) in system.cell_table(level).iter().enumerate() {
            let i = (pos / k0 / block) as u32;
            let list = &mut owners[id as usize];
            if list.last() != Some(&i) && !list.contains(&i) {
                list.push(i);
            }
        }
        for (id, list) in owners.iter().enumerate() {
            for (a, &i) in list.iter().enumerate() {
                for &j in &list[a + 1..] {
                    let shared = cell_sets[i as usize].binary_search(&(id as u32)).is_ok()
                        && cell_sets[j as usize].binary_search(&(id as u32)).is_ok();
                    if !shared {
                        return ConditionStatus::Failed(format!(
                            "images under maps {i} and {j} meet at {:?} outside their cells (depth {k})",
                            system.point(id)
                        ));
                    }
                }
            }
        }
    }
    ConditionStatus::Passed
}

fn check_connectivity(system: &FractalSystem) -> ConditionStatus {
    let n = system.vertex_count(1);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for s in system.symplices(1) {
        let first = s.vertices[0] as usize;
        for &v in &s.vertices[1..] {
            let (a, b) = (find(&mut parent, first), find(&mut parent, v as usize));
            parent[a] = b;
        }
    }
    let root = find(&mut parent, 0);
    let components = (0..n).filter(|&v| find(&mut parent, v) == v).count();
    if (0..n).all(|v| find(&mut parent, v) == root) {
        ConditionStatus::Passed
    } else {
        ConditionStatus::Failed(format!("(V_1, E_1) has {components} components"))
    }
}

fn nearest_within(points: &[f64], dim: usize, p: &[f64], tol: f64) -> Option<usize> {
    points
        .chunks_exact(dim)
        .position(|q| distance(p, q) <= tol)
}

fn check_symmetry(system: &FractalSystem) -> (ConditionStatus, Vec<Reflection>) {
    let dim = system.dim();
    let v0 = system.boundary_count();
    let tol0 = system.c0() / 100.0;
    let tol1 = tol0 / system.scale();
    let level0 = system.level_points(0);
    let level1 = system.level_points(1);

    let cells: HashMap<Vec<u32>, usize> = system
        .symplices(1)
        .map(|s| {
            let mut ids = s.vertices.to_vec();
            ids.sort_unstable();
            (ids, s.index)
        })
        .collect();

    let mut generators = Vec::new();
    let mut failure = None;
    for x in 0..v0 {
        for y in x + 1..v0 {
            let mut r = Reflection::between(system.point(x), system.point(y), (x, y));
            r.permutation = (0..v0)
                .map(|p| nearest_within(level0, dim, &r.apply(system.point(p)), tol0))
                .collect();
            if r.permutation.is_none() && failure.is_none() {
                failure = Some(format!("reflection bisecting V_0 points {x},{y} does not preserve V_0"));
            }
            for s in system.symplices(1) {
                let image: Option<Vec<u32>> = s
                    .vertices
                    .iter()
                    .map(|&v| {
                        nearest_within(level1, dim, &r.apply(system.point(v as usize)), tol1)
                            .map(|id| id as u32)
                    })
                    .collect();
                let matched = image.map(|mut ids| {
                    ids.sort_unstable();
                    cells.contains_key(&ids)
                });
                if matched != Some(true) && failure.is_none() {
                    failure = Some(format!(
                        "reflection bisecting V_0 points {x},{y} does not map 1-cell {} onto a 1-cell",
                        s.index
                    ));
                }
            }
            generators.push(r);
        }
    }
    let status = match failure {
        Some(detail) => ConditionStatus::Failed(detail),
        None => ConditionStatus::Passed,
    };
    (status, generators)
}
