use crate::energy::VertexFunction;
use crate::ifs::{distance, FractalSystem};

/// Empirical Hölder constant `max |f(x) − f(y)| / |x − y|^γ`.
///
/// Pairs are sampled per level `k <= n`: the corner vertices of each
/// `S ∈ F_k` against the corners of every symplex in `S_*`.
///
/// # Panics
///
/// If `gamma` is not in `(0, 1)`.
pub fn hoelder_estimate(system: &FractalSystem, f: &VertexFunction, gamma: f64) -> f64 {
    assert!(gamma > 0.0 && gamma < 1.0, "Hölder exponent must lie in (0, 1)");
    let k0 = system.boundary_count();
    let values = f.values();
    let mut best = 0.0f64;
    for level in 0..=f.level() {
        let table = system.cell_table(level);
        let neighborhoods = system.symplex_neighborhoods(level);
        for (s, cell) in table.chunks_exact(k0).enumerate() {
            for &t in neighborhoods.of(s) {
                let other = &table[t as usize * k0..(t as usize + 1) * k0];
                for &x in cell {
                    for &y in other {
                        if x == y {
                            continue;
                        }
                        let r = distance(system.point(x as usize), system.point(y as usize));
                        let diff = (values[x as usize] - values[y as usize]).abs();
                        best = best.max(diff / r.powf(gamma));
                    }
                }
            }
        }
    }
    best
}
