use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

const NONE: u32 = u32::MAX;
/// Largest ambient dimension the registry handles.
pub(crate) const MAX_DIM: usize = 8;
/// Grid cell edge, in units of the merge tolerance.
const CELL_FACTOR: f64 = 8.0;

/// Keys are already mixed; hashing them again is wasted work.
#[derive(Default)]
struct PassThrough(u64);

impl Hasher for PassThrough {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, _: &[u8]) {
        unreachable!("only u64 keys are hashed")
    }
    fn write_u64(&mut self, v: u64) {
        self.0 = v;
    }
}

/// Canonicalizes points up to a merge tolerance using a hashed uniform grid.
///
/// Points are assigned dense ids in insertion order. Two points closer than
/// `tolerance` receive the same id.
pub(crate) struct PointRegistry {
    dim: usize,
    tolerance: f64,
    cell: f64,
    heads: HashMap<u64, u32, BuildHasherDefault<PassThrough>>,
    next: Vec<u32>,
    points: Vec<f64>,
}

fn mix(mut h: u64, v: i64) -> u64 {
    h ^= (v as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^ (h >> 31)
}

impl PointRegistry {
    #[cfg(test)]
    pub fn new(dim: usize, tolerance: f64) -> Self {
        Self::with_points(dim, tolerance, Vec::new())
    }

    /// Starts from existing points, which keep their ids. Existing points must
    /// already be pairwise farther apart than `tolerance`.
    pub fn with_points(dim: usize, tolerance: f64, points: Vec<f64>) -> Self {
        assert!(dim <= MAX_DIM, "registry supports at most {MAX_DIM} dimensions");
        let count = points.len() / dim;
        let mut registry = Self {
            dim,
            tolerance,
            cell: tolerance * CELL_FACTOR,
            heads: HashMap::with_capacity_and_hasher(count, Default::default()),
            next: Vec::with_capacity(count),
            points,
        };
        for id in 0..count {
            let key = registry.home_key(id);
            registry.link(key, id as u32);
        }
        registry
    }

    pub fn len(&self) -> usize {
        self.next.len()
    }

    pub fn reserve(&mut self, additional: usize) {
        self.heads.reserve(additional);
        self.next.reserve(additional);
        self.points.reserve(additional * self.dim);
    }

    pub fn point(&self, id: usize) -> &[f64] {
        &self.points[id * self.dim..(id + 1) * self.dim]
    }

    pub fn into_points(self) -> Vec<f64> {
        self.points
    }

    fn home_key(&self, id: usize) -> u64 {
        let p = &self.points[id * self.dim..(id + 1) * self.dim];
        p.iter()
            .fold(0u64, |h, &x| mix(h, (x / self.cell).floor() as i64))
    }

    fn link(&mut self, key: u64, id: u32) {
        let head = self.heads.entry(key).or_insert(NONE);
        self.next.push(*head);
        *head = id;
    }

    /// Returns the id of a registered point within tolerance of `p`, if any.
    pub fn find(&self, p: &[f64]) -> Option<u32> {
        let dim = self.dim;
        let mut base = [0i64; MAX_DIM];
        let mut lo = [0i64; MAX_DIM];
        let mut hi = [0i64; MAX_DIM];
        let margin = self.tolerance / self.cell;
        for d in 0..dim {
            let scaled = p[d] / self.cell;
            let floor = scaled.floor();
            let frac = scaled - floor;
            base[d] = floor as i64;
            lo[d] = if frac < margin { -1 } else { 0 };
            hi[d] = if frac > 1.0 - margin { 1 } else { 0 };
        }
        let tol2 = self.tolerance * self.tolerance;
        // Odometer over the (usually single) candidate cells.
        let mut offset = lo;
        loop {
            let key = (0..dim).fold(0u64, |h, d| mix(h, base[d] + offset[d]));
            if let Some(&head) = self.heads.get(&key) {
                let mut id = head;
                while id != NONE {
                    let q = &self.points[id as usize * dim..(id as usize + 1) * dim];
                    let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2 <= tol2 {
                        return Some(id);
                    }
                    id = self.next[id as usize];
                }
            }
            let mut d = 0;
            loop {
                if d == dim {
                    return None;
                }
                if offset[d] < hi[d] {
                    offset[d] += 1;
                    break;
                }
                offset[d] = lo[d];
                d += 1;
            }
        }
    }

    /// Returns the canonical id of `p`, registering it when new.
    pub fn insert(&mut self, p: &[f64]) -> u32 {
        if let Some(id) = self.find(p) {
            return id;
        }
        let id = self.len() as u32;
        self.points.extend_from_slice(p);
        let key = self.home_key(id as usize);
        self.link(key, id);
        id
    }
}
