//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::HashSet;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fel_core::energy::{energy_m, MONOTONE_SLACK};
use fel_core::function::{generate_corpus, harmonic_corpus};
use fel_core::harmonic::{decimate, reproduce, ConductivityMatrix};
use fel_core::ifs::{closed_form_vertex_count, BuildOptions};
use fel_core::lipschitz::{
    coefficients, cutoff_threshold, equivalence_experiment, hoelder_estimate, norm_reports, search_level, Base,
    PairSearch,
};
use fel_core::{
    dimensions, presets, solve_ndhs, FractalSystem, FunctionSpec, HarmonicStructure, LipschitzParams, Sampler,
    Similitude, VertexFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, message: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message.into())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn system(maps: Vec<Similitude>, level: usize) -> (FractalSystem, HarmonicStructure) {
    let s = FractalSystem::build(maps, level).expect("preset builds");
    let hs = solve_ndhs(&s).expect("preset solves");
    (s, hs)
}

fn params(s: &FractalSystem, hs: &HarmonicStructure) -> LipschitzParams {
    LipschitzParams::natural(s, &dimensions(s, hs).unwrap())
}

fn cli_value(text: &str, key: &str) -> Option<f64> {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .and_then(|v| v.parse().ok())
}

fn ndhs_fixed_point() -> Outcome {
    let mut notes = Vec::new();
    for (name, n) in [("gasket2", 2.0), ("gasket3", 3.0)] {
        let start = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_fel"))
            .args(["solve-ndhs", name])
            .output()
            .map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        check(out.status.success(), format!("{name}: exit {:?}", out.status.code()))?;
        let text = String::from_utf8_lossy(&out.stdout);
        let rho = cli_value(&text, "rho").ok_or("no rho printed")?;
        let walk = cli_value(&text, "d_w").ok_or("no d_w printed")?;
        let expected = (n + 3.0) / (n + 1.0);
        check(close(rho, expected, 1e-9), format!("{name}: rho = {rho}, expected {expected}"))?;
        let walk_expected = (n + 3.0).ln() / 2f64.ln();
        check(close(walk, walk_expected, 1e-9), format!("{name}: d_w = {walk}"))?;
        check(elapsed < Duration::from_secs(1), format!("{name}: took {elapsed:?}"))?;
        notes.push(format!("{name} rho={rho:.12} in {:.3}s", elapsed.as_secs_f64()));
    }
    Ok(notes.join(", "))
}

fn dimension_constants() -> Outcome {
    let (g, ghs) = system(presets::gasket2_maps(), 1);
    let gd = dimensions(&g, &ghs).map_err(|e| e.to_string())?;
    check(close(gd.hausdorff, 3f64.ln() / 2f64.ln(), 1e-12), format!("gasket2 d_f = {}", gd.hausdorff))?;
    check(close(gd.spectral, 2.0 * 3f64.ln() / 5f64.ln(), 1e-12), format!("gasket2 d_s = {}", gd.spectral))?;
    check(close(gd.rho_from_dimensions(), gd.rho, 1e-12), "gasket2 rho != L^(d_w - d_f)")?;

    let (s, shs) = system(presets::snowflake_maps(), 1);
    let sd = dimensions(&s, &shs).map_err(|e| e.to_string())?;
    check(close(sd.hausdorff, 7f64.ln() / 3f64.ln(), 1e-12), format!("snowflake d_f = {}", sd.hausdorff))?;
    check(close(sd.rho_from_dimensions(), sd.rho, 1e-12), "snowflake rho != L^(d_w - d_f)")?;
    check(shs.residual <= 1e-10, format!("snowflake residual {:e}", shs.residual))?;
    check(sd.rho > 1.0 && sd.spectral < 2.0, format!("snowflake rho {} d_s {}", sd.rho, sd.spectral))?;
    check(sd.rho * 7.0 > 2.0, "snowflake rho M <= 2")?;
    Ok(format!(
        "gasket2 d_f={:.12} d_s={:.12}; snowflake d_f={:.12} rho={:.12} residual={:.1e}",
        gd.hausdorff, gd.spectral, sd.hausdorff, sd.rho, shs.residual
    ))
}

/// Gradient descent on the interior values of a network form.
fn minimize_interior(b: &ConductivityMatrix, boundary_values: &[f64]) -> f64 {
    let n = b.len();
    let k = boundary_values.len();
    let mut f = vec![0.0; n];
    f[..k].copy_from_slice(boundary_values);
    let step = 0.25 / (0..n).map(|i| -b.get(i, i)).fold(0.0, f64::max);
    for _ in 0..200_000 {
        let mut largest = 0.0f64;
        for i in k..n {
            let grad: f64 = 2.0 * (0..n).map(|j| b.get(i, j) * (f[i] - f[j])).sum::<f64>();
            f[i] -= step * grad;
            largest = largest.max(grad.abs());
        }
        if largest < 1e-12 {
            break;
        }
    }
    b.energy(&f).unwrap()
}

fn decimation_oracle() -> Outcome {
    let (g, _) = system(presets::gasket2_maps(), 1);
    let unit = ConductivityMatrix::unit(vec![0, 1, 2]);
    let b = reproduce(&g, &unit).map_err(|e| e.to_string())?;
    let trace = decimate(&b, &[0, 1, 2]).map_err(|e| e.to_string())?;
    let mut worst_entry = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            worst_entry = worst_entry.max((trace.matrix.get(i, j) - 0.6 * unit.get(i, j)).abs());
        }
    }
    check(worst_entry <= 1e-12, format!("entry error {worst_entry:e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_form = 0.0f64;
    for _ in 0..20 {
        let values: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let schur = trace.matrix.energy(&values).unwrap();
        worst_form = worst_form.max((schur - minimize_interior(&b, &values)).abs());
    }
    check(worst_form <= 1e-10, format!("form error {worst_form:e}"))?;
    Ok(format!("entry error {worst_entry:.1e}, form error {worst_form:.1e} over 20 vectors"))
}

fn vertex_combinatorics() -> Outcome {
    let mut notes = Vec::new();
    for (name, maps) in [
        ("gasket2", presets::gasket2_maps()),
        ("gasket3", presets::gasket3_maps()),
        ("snowflake", presets::snowflake_maps()),
    ] {
        let s = FractalSystem::build_with(maps, 8, BuildOptions { max_points: 40_000_000 })
            .map_err(|e| format!("{name}: {e}"))?;
        let (v0, v1) = (s.vertex_count(0), s.vertex_count(1));
        for m in 0..=8 {
            let expected = closed_form_vertex_count(s.map_count(), v0, v1, m);
            check(s.vertex_count(m) as u128 == expected, format!("{name} #V_{m} = {}", s.vertex_count(m)))?;
            check(s.symplex_count(m) == s.map_count().pow(m as u32), format!("{name} #F_{m}"))?;
        }
        for m in 0..=3 {
            for n in m..=6 {
                for index in 0..s.symplex_count(m) {
                    let inside = s.vertices_in_symplex(m, index, n).len();
                    check(inside == s.vertex_count(n - m), format!("{name} #(V_{n} ∩ S) for S in F_{m}"))?;
                }
            }
        }
        notes.push(format!("{name} #V_8={}", s.vertex_count(8)));
    }
    Ok(notes.join(", "))
}

fn energy_monotonicity() -> Outcome {
    let start = Instant::now();
    let (g, hs) = system(presets::gasket2_maps(), 7);
    let harmonic = harmonic_corpus(&g, 25, 2024);
    let mut rng = ChaCha8Rng::seed_from_u64(2025);
    let perturbed: Vec<FunctionSpec> = harmonic
        .iter()
        .map(|base| FunctionSpec::Perturb {
            base: Box::new(base.clone()),
            vertex: rng.gen_range(g.vertex_count(1)..g.vertex_count(7)),
            delta: rng.gen_range(-1.0..1.0),
        })
        .collect();
    let mut worst_drop = 0.0f64;
    let mut worst_drift = 0.0f64;
    for (i, spec) in harmonic.iter().chain(&perturbed).enumerate() {
        let f = spec.sample(&g, &hs, 7).map_err(|e| e.to_string())?;
        let energies: Vec<f64> = (0..=7)
            .map(|m| energy_m(&g, &hs, &f.restrict(&g, m).unwrap()).unwrap())
            .collect();
        for w in energies.windows(2) {
            worst_drop = worst_drop.max((w[0] - w[1]) / w[0].abs().max(f64::MIN_POSITIVE));
        }
        if i < harmonic.len() {
            let data_level = i % 2;
            let reference = energies[data_level];
            for e in &energies[data_level..] {
                worst_drift = worst_drift.max((e - reference).abs() / reference);
            }
        }
    }
    let elapsed = start.elapsed();
    check(worst_drop <= MONOTONE_SLACK, format!("relative drop {worst_drop:e}"))?;
    check(worst_drift <= 1e-9, format!("harmonic drift {worst_drift:e}"))?;
    check(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!(
        "50 functions, worst drop {:.1e}, harmonic drift {worst_drift:.1e}, {:.1}s",
        worst_drop.max(0.0),
        elapsed.as_secs_f64()
    ))
}

fn pair_enumeration_oracle() -> Outcome {
    let (g, hs) = system(presets::gasket2_maps(), 5);
    let p = params(&g, &hs);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for n in 3..=5 {
        let count = g.vertex_count(n);
        let f: Vec<f64> = (0..count).map(|_| rng.gen()).collect();
        for m in 0..=2 {
            let cutoff = g.c0() / 2f64.powi(m as i32);
            let threshold = cutoff_threshold(cutoff);
            let mut brute = HashSet::new();
            let mut sum = 0.0;
            for x in 0..count {
                for y in 0..count {
                    let d2: f64 = g.point(x).iter().zip(g.point(y)).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2 < threshold {
                        brute.insert((x as u32, y as u32));
                        sum += (f[x] - f[y]).powi(2);
                    }
                }
            }
            let mut fast = HashSet::new();
            PairSearch::new(&g, n, search_level(&g, Base::Scale, m)).for_each_pair(cutoff, |x, y| {
                fast.insert((x, y));
            });
            check(fast == brute, format!("pair sets differ at m={m} n={n}"))?;
            if m >= 1 {
                let scale = 2f64.powf(m as f64 * p.alpha);
                let expected = scale * (2f64.powf(m as f64 * p.d) * sum / (count * count) as f64).sqrt();
                let got = coefficients(&g, &[&f], n, m, Base::Scale, &p).unwrap()[0];
                worst = worst.max((got - expected).abs());
            }
        }
    }
    check(worst <= 1e-12, format!("b_m error {worst:e}"))?;
    Ok(format!("pair sets identical for m<=2, n<=5; worst b_m error {worst:.1e}"))
}

fn base_change() -> Outcome {
    let (s, shs) = system(presets::snowflake_maps(), 4);
    let p = params(&s, &shs);
    let d = p.base_change_constant();
    let corpus = generate_corpus(&s, 10, 77);
    let n = 4;
    let m_max = 2;
    // n(m) = floor(m log L / log 2) covers b_1..b_{m_max}
    let k_max = (m_max as f64 * s.scale().ln() / 2f64.ln()).floor() as usize;
    let samples: Vec<VertexFunction> = corpus.iter().map(|f| f.sample(&s, &shs, n).unwrap()).collect();
    let values: Vec<&[f64]> = samples.iter().map(|f| f.values()).collect();
    let sup = |base: Base, top: usize| {
        let mut best = vec![0.0f64; values.len()];
        for m in 1..=top {
            for (b, v) in best.iter_mut().zip(coefficients(&s, &values, n, m, base, &p).unwrap()) {
                *b = b.max(v);
            }
        }
        best
    };
    let sup_b = sup(Base::Scale, m_max);
    let sup_a = sup(Base::Two, k_max);
    let mut worst: f64 = 0.0;
    for ((tag, b), a) in corpus.iter().map(|f| f.tag()).zip(&sup_b).zip(&sup_a) {
        check(*b <= d * a && *a <= d * b, format!("{tag}: sup b {b}, sup a {a}, D {d}"))?;
        worst = worst.max(b / a).max(a / b);
    }

    let (g, ghs) = system(presets::gasket2_maps(), 5);
    let gp = params(&g, &ghs);
    let reports = norm_reports(&g, &ghs, &generate_corpus(&g, 10, 77), &gp, 3, 5).map_err(|e| e.to_string())?;
    for r in &reports {
        check(r.a_values == r.b_values, format!("gasket2 a_m != b_m for {}", r.tag))?;
    }
    Ok(format!(
        "snowflake D={d:.4}, worst sup ratio {worst:.4}; gasket2 a_m = b_m for {} functions",
        reports.len()
    ))
}

fn norm_equivalence() -> Outcome {
    let start = Instant::now();
    let (g, hs) = system(presets::gasket2_maps(), 8);
    let p = params(&g, &hs);
    let corpus = harmonic_corpus(&g, 20, 1);
    let summary = equivalence_experiment(&g, &hs, &corpus, &p, 6, 8).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let c = summary.c_empirical.ok_or("no ratios")?;
    check(c.is_finite(), "C_empirical not finite")?;
    check(summary.excluded.is_empty(), "functions excluded")?;
    for r in &summary.reports {
        let ratio = r.ratio.unwrap();
        check(ratio >= 1.0 / c && ratio <= c, format!("{} ratio {ratio} outside [1/C, C]", r.tag))?;
    }
    let worst = summary.stability.iter().map(|s| s.relative_change).fold(0.0, f64::max);
    check(summary.all_stable(), format!("ratio changes by {:.1}% from n=7 to n=8", 100.0 * worst))?;
    check(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!(
        "C_empirical={c:.4}, ratios in [{:.4}, {:.4}], worst n=7->8 change {:.2}%, {:.1}s",
        summary.min_ratio.unwrap(),
        summary.max_ratio.unwrap(),
        100.0 * worst,
        elapsed.as_secs_f64()
    ))
}

fn hoelder_stability() -> Outcome {
    let (g, hs) = system(presets::gasket2_maps(), 8);
    let dims = dimensions(&g, &hs).unwrap();
    let gamma = (dims.walk - dims.hausdorff) / 2.0;
    let mut worst = 0.0f64;
    for spec in harmonic_corpus(&g, 20, 1) {
        let at = |n| hoelder_estimate(&g, &spec.sample(&g, &hs, n).unwrap(), gamma);
        let (h6, h8) = (at(6), at(8));
        check(h6.is_finite() && h8.is_finite() && h6 > 0.0, format!("{}: {h6} {h8}", spec.tag()))?;
        let change = (h8 - h6).abs() / h6;
        check(change < 0.2, format!("{}: constant changes by {:.1}%", spec.tag(), 100.0 * change))?;
        worst = worst.max(change);
    }
    Ok(format!("gamma={gamma:.4}, worst n=6->8 change {:.2}% over 20 functions", 100.0 * worst))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("NDHS fixed point, gasket family", ndhs_fixed_point),
        ("dimension constants", dimension_constants),
        ("decimation oracle", decimation_oracle),
        ("vertex combinatorics", vertex_combinatorics),
        ("energy monotonicity and harmonic invariance", energy_monotonicity),
        ("pair-enumeration oracle", pair_enumeration_oracle),
        ("base change between a_m and b_m", base_change),
        ("norm equivalence at desk scale", norm_equivalence),
        ("Hölder diagnostic", hoelder_stability),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", i + 1),
            Err(reason) => {
                failures += 1;
                println!("criterion {} FAIL  {name}: {reason}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
