use super::{distance, FractalSystem, VALIDATION_LEVEL};

/// Symplex level at which the separation of non-touching symplices is measured.
pub const SEPARATION_LEVEL: usize = 2;

/// For each `S ∈ F_m`, the symplices of `F_m` sharing at least one vertex with `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplexNeighborhood {
    pub level: usize,
    /// `neighbors[s]` is sorted and contains `s`.
    pub neighbors: Vec<Vec<u32>>,
}

impl SymplexNeighborhood {
    pub fn of(&self, symplex: usize) -> &[u32] {
        &self.neighbors[symplex]
    }
}

impl FractalSystem {
    /// Builds `S_*` for every `m`-symplex from the vertex incidence lists.
    pub fn symplex_neighborhoods(&self, level: usize) -> SymplexNeighborhood {
        let k = self.boundary_count();
        let table = self.cell_table(level);
        let mut incidence: Vec<Vec<u32>> = vec![Vec::new(); self.vertex_count(level)];
        for (pos, &v) in table.iter().enumerate() {
            let s = (pos / k) as u32;
            let list = &mut incidence[v as usize];
            if list.last() != Some(&s) {
                list.push(s);
            }
        }
        let neighbors = (0..self.symplex_count(level))
            .map(|s| {
                let mut set: Vec<u32> = table[s * k..(s + 1) * k]
                    .iter()
                    .flat_map(|&v| incidence[v as usize].iter().copied())
                    .collect();
                set.sort_unstable();
                set.dedup();
                set
            })
            .collect();
        SymplexNeighborhood { level, neighbors }
    }

    /// Smallest distance between two `m`-symplices that share no vertex, times `L^m`.
    ///
    /// Measured on the `V_4` points of the symplices of `F_2`, so it slightly
    /// overestimates the distance between the limit sets. Infinite when every
    /// pair of symplices touches.
    pub fn neighbor_separation(&self) -> f64 {
        *self.separation.get_or_init(|| self.measure_separation())
    }

    fn measure_separation(&self) -> f64 {
        let level = SEPARATION_LEVEL;
        let fine = VALIDATION_LEVEL;
        let dim = self.dim();
        let count = self.symplex_count(level);
        let members: Vec<Vec<u32>> = (0..count)
            .map(|s| self.vertices_in_symplex(level, s, fine))
            .collect();
        let boxes: Vec<(Vec<f64>, Vec<f64>)> = members
            .iter()
            .map(|list| {
                let mut lo = vec![f64::INFINITY; dim];
                let mut hi = vec![f64::NEG_INFINITY; dim];
                for &v in list {
                    for (k, &c) in self.point(v as usize).iter().enumerate() {
                        lo[k] = lo[k].min(c);
                        hi[k] = hi[k].max(c);
                    }
                }
                (lo, hi)
            })
            .collect();
        let neighborhoods = self.symplex_neighborhoods(level);
        let mut best = f64::INFINITY;
        for s in 0..count {
            for t in s + 1..count {
                if neighborhoods.of(s).binary_search(&(t as u32)).is_ok() {
                    continue;
                }
                let gap: f64 = (0..dim)
                    .map(|k| {
                        let g = (boxes[t].0[k] - boxes[s].1[k]).max(boxes[s].0[k] - boxes[t].1[k]);
                        g.max(0.0).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt();
                if gap >= best {
                    continue;
                }
                for &x in &members[s] {
                    for &y in &members[t] {
                        best = best.min(distance(self.point(x as usize), self.point(y as usize)));
                    }
                }
            }
        }
        best * self.scale().powi(level as i32)
    }
}

#[cfg(test)]
mod tests {
    use crate::ifs::FractalSystem;
    use crate::presets;

    #[test]
    fn gasket_level_one_neighborhoods_are_complete() {
        let g = FractalSystem::build(presets::gasket2_maps(), 2).unwrap();
        let nb = g.symplex_neighborhoods(1);
        assert_eq!(nb.of(0), &[0, 1, 2]);
        for s in 0..3 {
            assert_eq!(nb.of(s).len(), 3);
        }
    }

    #[test]
    fn snowflake_center_touches_every_outer_cell() {
        let s = FractalSystem::build(presets::snowflake_maps(), 1).unwrap();
        let nb = s.symplex_neighborhoods(1);
        assert_eq!(nb.of(6).len(), 7);
        for outer in 0..6 {
            assert_eq!(nb.of(outer).len(), 4);
        }
    }

    #[test]
    fn gasket_separation_is_below_c0() {
        let g = FractalSystem::build(presets::gasket2_maps(), 4).unwrap();
        // 02 and 21 come within √3/8 of each other
        assert!((g.neighbor_separation() - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn membership_is_reflexive_and_symmetric() {
        let g = FractalSystem::build(presets::gasket3_maps(), 3).unwrap();
        for level in 0..=3 {
            let nb = g.symplex_neighborhoods(level);
            for (s, list) in nb.neighbors.iter().enumerate() {
                assert!(list.contains(&(s as u32)));
                for &t in list {
                    assert!(nb.of(t as usize).contains(&(s as u32)));
                }
            }
        }
    }
}
