use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use fel_core::energy::MONOTONE_SLACK;
use fel_core::function::{format_corpus, generate_corpus, parse_corpus};
use fel_core::ifs::DEFAULT_MAX_POINTS;
use fel_core::lipschitz::{equivalence_experiment, norm_report, Base};
use fel_core::{
    dimensions, energy_sequence, presets, solve_ndhs, BuildOptions, FractalDefinition, FractalError, FractalSystem,
    FunctionSpec, HarmonicStructure, LipschitzParams, Sampler,
};

use crate::table::{block, emit, number, optional};
use crate::{render, Command, FractalArg};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Describe { fractal, with_ndhs, export } => describe(&fractal, with_ndhs, export.as_deref()),
        Command::SolveNdhs { fractal, trace } => solve(&fractal, trace.as_deref()),
        Command::Energy { fractal, function, levels, output } => {
            energy(&fractal, &function, levels, output.output.as_deref())
        }
        Command::Lipschitz { fractal, function, mmax, level, base, output } => {
            let base = if base == "2" { Base::Two } else { Base::Scale };
            lipschitz(&fractal, &function, mmax, level, base, output.output.as_deref())
        }
        Command::Equivalence { fractal, corpus, generate_corpus, seed, mmax, level, output } => equivalence(
            &fractal,
            corpus.as_deref(),
            generate_corpus,
            seed,
            (mmax, level),
            output.output.as_deref(),
        ),
        Command::Render { fractal, level, function, output } => {
            let system = load(&fractal, level)?;
            let values = match function {
                Some(spec) => {
                    let hs = solve_ndhs(&system)?;
                    Some(parse_function(&spec)?.sample(&system, &hs, level)?)
                }
                None => None,
            };
            let svg = render::svg(&system, level, values.as_ref())?;
            fs::write(&output, svg).with_context(|| format!("writing {}", output.display()))
        }
    }
}

fn definition(arg: &FractalArg) -> Result<FractalDefinition> {
    if let Some(def) = presets::definition(&arg.fractal) {
        return Ok(def);
    }
    let text = fs::read_to_string(&arg.fractal)
        .with_context(|| format!("`{}` is neither a preset nor a readable file", arg.fractal))?;
    Ok(FractalDefinition::parse(&text)?)
}

fn build_options() -> Result<BuildOptions> {
    let max_points = match std::env::var("FEL_MAX_POINTS") {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("FEL_MAX_POINTS must be a positive integer, got `{v}`"))?,
        Err(_) => DEFAULT_MAX_POINTS,
    };
    Ok(BuildOptions { max_points })
}

fn build_unchecked(arg: &FractalArg, level: usize) -> Result<FractalSystem> {
    let def = definition(arg)?;
    let system = FractalSystem::build_unvalidated(def.similitudes()?, level.max(1), build_options()?)?;
    Ok(system.with_name(def.name))
}

/// Builds through `level` and rejects systems failing a checked condition.
fn load(arg: &FractalArg, level: usize) -> Result<FractalSystem> {
    let system = build_unchecked(arg, level)?;
    match system.report().first_failure() {
        Some(err) => Err(err.into()),
        None => Ok(system),
    }
}

fn parse_function(spec: &str) -> Result<FunctionSpec> {
    Ok(spec.parse()?)
}

fn describe(arg: &FractalArg, with_ndhs: bool, export: Option<&Path>) -> Result<()> {
    let system = build_unchecked(arg, 3)?;
    println!("name = {}", system.name());
    println!("N = {}", system.dim());
    println!("M = {}", system.map_count());
    println!("L = {}", system.scale());
    for m in 0..=3 {
        println!("#V_{m} = {}", system.vertex_count(m));
    }
    println!("c0 = {}", system.c0());
    print!("{}", system.report());
    if let Some(path) = export {
        let text = FractalDefinition::from_system(&system).to_toml();
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(err) = system.report().first_failure() {
        return Err(err.into());
    }
    if with_ndhs {
        let hs = solve_ndhs(&system)?;
        println!("{}", dimensions(&system, &hs)?);
        println!("residual = {:e}", hs.residual);
    }
    Ok(())
}

fn solve(arg: &FractalArg, trace: Option<&Path>) -> Result<()> {
    let system = load(arg, 1)?;
    let hs = match solve_ndhs(&system) {
        Ok(hs) => hs,
        Err(FractalError::NoConvergence { iterations, last_gap, trace: steps }) => {
            if let Some(path) = trace {
                write_trace(path, &steps)?;
            }
            return Err(FractalError::NoConvergence { iterations, last_gap, trace: steps }.into());
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = trace {
        write_trace(path, &hs.trace)?;
    }
    print_structure(&system, &hs)
}

fn write_trace(path: &Path, steps: &[(f64, f64)]) -> Result<()> {
    let rows = steps
        .iter()
        .enumerate()
        .map(|(i, (gap, rho))| vec![(i + 1).to_string(), number(*gap), number(*rho)]);
    emit(Some(path), &block(&["iter", "gap", "rho_estimate"], rows)?)
}

fn print_structure(system: &FractalSystem, hs: &HarmonicStructure) -> Result<()> {
    println!("rho = {}", hs.rho);
    println!("iterations = {}", hs.iterations());
    println!("residual = {:e}", hs.residual);
    for (class, value) in hs.class_values.iter().enumerate() {
        println!("conductance[{class}] = {value}");
    }
    let dims = dimensions(system, hs)?;
    println!("d_f = {}", dims.hausdorff);
    println!("d_w = {}", dims.walk);
    println!("d_s = {}", dims.spectral);
    Ok(())
}

fn energy(arg: &FractalArg, spec: &str, (from, to): (usize, usize), output: Option<&Path>) -> Result<()> {
    let function = parse_function(spec)?;
    let system = load(arg, to)?;
    let hs = solve_ndhs(&system)?;
    let seq = energy_sequence(&system, &hs, &function, from, to)?;
    let mut previous: Option<f64> = None;
    let rows: Vec<Vec<String>> = seq
        .entries
        .iter()
        .map(|&(m, e)| {
            let ok = previous.map_or(true, |p| e >= p - MONOTONE_SLACK * p.abs().max(1.0));
            previous = Some(e);
            vec![m.to_string(), number(e), ok.to_string()]
        })
        .collect();
    emit(output, &block(&["m", "E_m", "monotone_ok"], rows)?)?;
    if !seq.monotone_ok {
        eprintln!("warning: energy sequence of {} decreases", seq.tag);
    }
    Ok(())
}

fn warn_margin(m_max: usize, level: usize) {
    if level < m_max + 3 {
        eprintln!("warning: level {level} is below mmax + 3 = {}; coefficients are coarsely resolved", m_max + 3);
    }
}

fn lipschitz(arg: &FractalArg, spec: &str, m_max: usize, level: usize, base: Base, output: Option<&Path>) -> Result<()> {
    let function = parse_function(spec)?;
    let system = load(arg, level)?;
    let hs = solve_ndhs(&system)?;
    let params = LipschitzParams::natural(&system, &dimensions(&system, &hs)?).with_base(base);
    let report = norm_report(&system, &hs, &function, &params, m_max, level)?;
    let rows = report
        .a_values
        .iter()
        .zip(&report.b_values)
        .map(|(&(m, a), &(_, b))| vec![m.to_string(), number(a), number(b)]);
    emit(output, &block(&["m", "a_m", "b_m"], rows)?)?;
    warn_margin(m_max, level);
    eprintln!(
        "lip_norm = {}, dirichlet_norm = {}, ratio = {}",
        report.lip_norm,
        report.dirichlet_norm,
        report.ratio.map_or("undefined".to_string(), |r| r.to_string())
    );
    Ok(())
}

fn equivalence(
    arg: &FractalArg,
    corpus_path: Option<&Path>,
    generate: Option<usize>,
    seed: u64,
    (m_max, level): (usize, usize),
    output: Option<&Path>,
) -> Result<()> {
    let system = load(arg, level)?;
    let corpus = match generate {
        Some(count) => {
            let corpus = generate_corpus(&system, count, seed);
            if let Some(path) = corpus_path {
                fs::write(path, format_corpus(&corpus)).with_context(|| format!("writing {}", path.display()))?;
            }
            corpus
        }
        None => {
            let path = corpus_path.expect("clap requires a corpus source");
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_corpus(&text)?
        }
    };
    let hs = solve_ndhs(&system)?;
    let params = LipschitzParams::natural(&system, &dimensions(&system, &hs)?);
    let summary = equivalence_experiment(&system, &hs, &corpus, &params, m_max, level)?;

    let rows = summary.reports.iter().map(|r| {
        let stability = summary.stability.iter().find(|s| s.tag == r.tag);
        vec![
            r.tag.clone(),
            number(r.lip_norm),
            number(r.dirichlet_norm),
            optional(r.ratio),
            optional(stability.map(|s| s.previous_ratio)),
            stability.map_or(String::new(), |s| s.stable.to_string()),
        ]
    });
    let mut bytes = block(
        &["tag", "lip_norm", "dirichlet_norm", "ratio", "ratio_previous_level", "stable"],
        rows,
    )?;
    bytes.push(b'\n');
    bytes.extend(block(
        &["min_ratio", "max_ratio", "C_empirical"],
        [vec![
            optional(summary.min_ratio),
            optional(summary.max_ratio),
            optional(summary.c_empirical),
        ]],
    )?);
    emit(output, &bytes)?;

    warn_margin(m_max, level);
    for tag in &summary.excluded {
        eprintln!("excluded (zero Dirichlet norm): {tag}");
    }
    for s in summary.stability.iter().filter(|s| !s.stable) {
        eprintln!("unstable: {} changes by {:.1}% from level {}", s.tag, 100.0 * s.relative_change, level - 1);
    }
    Ok(())
}
