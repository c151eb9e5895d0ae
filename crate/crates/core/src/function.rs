//! Samplable functions on the vertex sets, and their text form.
//!
//! Grammar, one function per line in corpus files:
//!
//! * `coord:k` — the `k`-th Euclidean coordinate (zero-based),
//! * `harmonic:v1,v2,...` — harmonic extension of data on `V_m`, where the
//!   number of values equals `#V_m`,
//! * `perturb:<spec>:<vertex>:<delta>` — `<spec>` with `delta` added at one vertex id.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{harmonic_extension, VertexFunction};
use crate::error::{FractalError, Result};
use crate::harmonic::HarmonicStructure;
use crate::ifs::FractalSystem;

/// Anything that can produce consistent samples on every `V_n`.
///
/// Samples at different levels must agree on shared vertices, so the
/// sample on `V_m` is the restriction of the sample on `V_n`.
pub trait Sampler: Sync {
    fn sample(&self, system: &FractalSystem, hs: &HarmonicStructure, level: usize) -> Result<VertexFunction>;
    fn tag(&self) -> String;
}

impl<T: Sampler + ?Sized> Sampler for &T {
    fn sample(&self, system: &FractalSystem, hs: &HarmonicStructure, level: usize) -> Result<VertexFunction> {
        (**self).sample(system, hs, level)
    }

    fn tag(&self) -> String {
        (**self).tag()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Coordinate(usize),
    Harmonic(Vec<f64>),
    Perturb {
        base: Box<FunctionSpec>,
        vertex: usize,
        delta: f64,
    },
}

impl FunctionSpec {
    fn data_level(system: &FractalSystem, len: usize) -> Result<usize> {
        (0..=system.max_level())
            .find(|&m| system.vertex_count(m) == len)
            .ok_or_else(|| {
                FractalError::IndexMismatch(format!("{len} harmonic values match no #V_m"))
            })
    }
}

impl Sampler for FunctionSpec {
    fn sample(&self, system: &FractalSystem, hs: &HarmonicStructure, level: usize) -> Result<VertexFunction> {
        system.check_level(level)?;
        match self {
            FunctionSpec::Coordinate(k) => {
                if *k >= system.dim() {
                    return Err(FractalError::DimensionMismatch {
                        expected: system.dim(),
                        got: k + 1,
                    });
                }
                VertexFunction::from_fn(system, level, |p| p[*k])
            }
            FunctionSpec::Harmonic(values) => {
                let data_level = Self::data_level(system, values.len())?;
                let data = VertexFunction::new(system, data_level, values.clone())?;
                if level >= data_level {
                    harmonic_extension(system, hs, &data, level)
                } else {
                    data.restrict(system, level)
                }
            }
            FunctionSpec::Perturb { base, vertex, delta } => {
                let mut f = base.sample(system, hs, level)?;
                if let Some(v) = f.values_mut().get_mut(*vertex) {
                    *v += delta;
                }
                Ok(f)
            }
        }
    }

    fn tag(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Coordinate(k) => write!(f, "coord:{k}"),
            FunctionSpec::Harmonic(values) => {
                let parts: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
                write!(f, "harmonic:{}", parts.join(","))
            }
            FunctionSpec::Perturb { base, vertex, delta } => {
                write!(f, "perturb:{base}:{vertex}:{delta:?}")
            }
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = FractalError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |what: &str| FractalError::Parse(format!("{what} in function spec `{s}`"));
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad("missing `:`"))?;
        match kind {
            "coord" => rest
                .parse()
                .map(FunctionSpec::Coordinate)
                .map_err(|_| bad("invalid coordinate index")),
            "harmonic" => {
                let values = rest
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad("invalid harmonic value"))?;
                Ok(FunctionSpec::Harmonic(values))
            }
            "perturb" => {
                let mut parts = rest.rsplitn(3, ':');
                let delta = parts.next().and_then(|d| d.parse().ok()).ok_or_else(|| bad("invalid delta"))?;
                let vertex = parts.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("invalid vertex index"))?;
                let base = parts.next().ok_or_else(|| bad("missing base function"))?.parse()?;
                Ok(FunctionSpec::Perturb {
                    base: Box::new(base),
                    vertex,
                    delta,
                })
            }
            other => Err(bad(&format!("unknown kind `{other}`"))),
        }
    }
}

/// A finite linear combination of specs.
#[derive(Debug, Clone, PartialEq)]
pub struct Combination(pub Vec<(f64, FunctionSpec)>);

impl Sampler for Combination {
    fn sample(&self, system: &FractalSystem, hs: &HarmonicStructure, level: usize) -> Result<VertexFunction> {
        let mut total = VertexFunction::constant(system, level, 0.0)?;
        for (c, spec) in &self.0 {
            total = total.add(&spec.sample(system, hs, level)?.scaled(*c))?;
        }
        Ok(total)
    }

    fn tag(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|(c, s)| format!("{c:?}*[{s}]")).collect();
        parts.join("+")
    }
}

/// Reads one spec per line, skipping blanks and `#` comments.
pub fn parse_corpus(text: &str) -> Result<Vec<FunctionSpec>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}

pub fn format_corpus(corpus: &[FunctionSpec]) -> String {
    corpus.iter().map(|s| format!("{s}\n")).collect()
}

/// `count` harmonic extensions of uniform data on `V_0` and `V_1` (alternating),
/// followed by the coordinate functions.
pub fn generate_corpus(system: &FractalSystem, count: usize, seed: u64) -> Vec<FunctionSpec> {
    let harmonic = harmonic_corpus(system, count, seed);
    harmonic
        .into_iter()
        .chain((0..system.dim()).map(FunctionSpec::Coordinate))
        .collect()
}

/// `count` harmonic extensions of uniform `[0, 1)` data on `V_0` and `V_1`, alternating.
pub fn harmonic_corpus(system: &FractalSystem, count: usize, seed: u64) -> Vec<FunctionSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = system.vertex_count(i % 2);
            FunctionSpec::Harmonic((0..n).map(|_| rng.gen::<f64>()).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::solve_ndhs;
    use crate::presets;

    #[test]
    fn parses_each_form() {
        assert_eq!("coord:1".parse::<FunctionSpec>().unwrap(), FunctionSpec::Coordinate(1));
        assert_eq!(
            "harmonic:1,0,0".parse::<FunctionSpec>().unwrap(),
            FunctionSpec::Harmonic(vec![1.0, 0.0, 0.0])
        );
        let p: FunctionSpec = "perturb:harmonic:1,0,0:7:0.5".parse().unwrap();
        assert_eq!(
            p,
            FunctionSpec::Perturb {
                base: Box::new(FunctionSpec::Harmonic(vec![1.0, 0.0, 0.0])),
                vertex: 7,
                delta: 0.5
            }
        );
        let nested: FunctionSpec = "perturb:perturb:coord:0:3:1:4:-2".parse().unwrap();
        assert_eq!(nested.to_string(), "perturb:perturb:coord:0:3:1.0:4:-2.0");
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "coord", "coord:x", "harmonic:1,a", "perturb:coord:0:1", "spline:3"] {
            assert!(bad.parse::<FunctionSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn samples_agree_across_levels() {
        let g = FractalSystem::build(presets::gasket2_maps(), 4).unwrap();
        let hs = solve_ndhs(&g).unwrap();
        let spec: FunctionSpec = "perturb:harmonic:0.3,0.9,0.1:20:1.5".parse().unwrap();
        let fine = spec.sample(&g, &hs, 4).unwrap();
        for level in 0..4 {
            let coarse = spec.sample(&g, &hs, level).unwrap();
            assert_eq!(coarse, fine.restrict(&g, level).unwrap());
        }
    }

    #[test]
    fn corpus_is_seeded() {
        let g = FractalSystem::build(presets::gasket2_maps(), 1).unwrap();
        let a = generate_corpus(&g, 6, 42);
        assert_eq!(a, generate_corpus(&g, 6, 42));
        assert_ne!(a, generate_corpus(&g, 6, 43));
        assert_eq!(a.len(), 8);
        assert_eq!(parse_corpus(&format_corpus(&a)).unwrap(), a);
    }
}
