use crate::ifs::FractalSystem;
use crate::summation::KahanSum;

/// Relative guard keeping pairs at exactly the cutoff distance out of the strict inequality.
pub const CUTOFF_GUARD: f64 = 1e-9;

/// Squared-distance threshold implementing `|x − y| < cutoff`.
pub fn cutoff_threshold(cutoff: f64) -> f64 {
    cutoff * cutoff * (1.0 - CUTOFF_GUARD)
}

/// Enumerates ordered pairs of `V_n` closer than a cutoff by scanning, for each
/// symplex `S ∈ F_s`, the points of `S` against the points of `S_*`.
///
/// Each `x` is handled only by its owner, the first symplex (in address order)
/// containing it, so every ordered pair is visited once. Completeness needs
/// `cutoff <= c0 / L^s`.
pub struct PairSearch<'a> {
    system: &'a FractalSystem,
    level: usize,
    search_level: usize,
    members: Vec<Vec<u32>>,
    owner: Vec<u32>,
    neighbors: Vec<Vec<u32>>,
}

impl<'a> PairSearch<'a> {
    pub fn new(system: &'a FractalSystem, level: usize, search_level: usize) -> Self {
        assert!(search_level <= level, "search level must not exceed the point level");
        let count = system.symplex_count(search_level);
        let members: Vec<Vec<u32>> = (0..count)
            .map(|s| system.vertices_in_symplex(search_level, s, level))
            .collect();
        let mut owner = vec![u32::MAX; system.vertex_count(level)];
        for (s, list) in members.iter().enumerate() {
            for &x in list {
                if owner[x as usize] == u32::MAX {
                    owner[x as usize] = s as u32;
                }
            }
        }
        let neighbors = system.symplex_neighborhoods(search_level).neighbors;
        Self {
            system,
            level,
            search_level,
            members,
            owner,
            neighbors,
        }
    }

    pub fn system(&self) -> &'a FractalSystem {
        self.system
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn search_level(&self) -> usize {
        self.search_level
    }

    /// Calls `visit(x, y)` once per ordered pair with `|x − y| < cutoff`, including `x == y`.
    pub fn for_each_pair(&self, cutoff: f64, mut visit: impl FnMut(u32, u32)) {
        let dim = self.system.dim();
        let points = self.system.level_points(self.level);
        let threshold = cutoff_threshold(cutoff);
        let mut stamp = vec![u32::MAX; self.system.vertex_count(self.level)];
        let mut ys: Vec<u32> = Vec::new();
        let mut coords: Vec<f64> = Vec::new();
        for (s, own) in self.members.iter().enumerate() {
            ys.clear();
            coords.clear();
            for &t in &self.neighbors[s] {
                for &y in &self.members[t as usize] {
                    if stamp[y as usize] != s as u32 {
                        stamp[y as usize] = s as u32;
                        ys.push(y);
                        coords.extend_from_slice(&points[y as usize * dim..(y as usize + 1) * dim]);
                    }
                }
            }
            for &x in own {
                if self.owner[x as usize] != s as u32 {
                    continue;
                }
                let px = &points[x as usize * dim..(x as usize + 1) * dim];
                for (&y, py) in ys.iter().zip(coords.chunks_exact(dim)) {
                    let d2: f64 = px.iter().zip(py).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2 < threshold {
                        visit(x, y);
                    }
                }
            }
        }
    }

    /// `Σ (f(x) − f(y))²` over ordered pairs closer than `cutoff`, for several functions.
    ///
    /// `values[k]` holds function `k` on `V_n`.
    pub fn difference_sums(&self, cutoff: f64, values: &[&[f64]]) -> Vec<f64> {
        let k = values.len();
        let n = self.system.vertex_count(self.level);
        // interleave so one pair touches one cache line per endpoint
        let mut packed = vec![0.0; n * k];
        for (j, f) in values.iter().enumerate() {
            assert_eq!(f.len(), n, "function sampled on the wrong level");
            for (i, v) in f.iter().enumerate() {
                packed[i * k + j] = *v;
            }
        }
        let mut sums = vec![KahanSum::new(); k];
        self.for_each_pair(cutoff, |x, y| {
            if x == y {
                return;
            }
            let fx = &packed[x as usize * k..(x as usize + 1) * k];
            let fy = &packed[y as usize * k..(y as usize + 1) * k];
            for ((s, a), b) in sums.iter_mut().zip(fx).zip(fy) {
                let d = a - b;
                s.add(d * d);
            }
        });
        sums.iter().map(KahanSum::value).collect()
    }
}
