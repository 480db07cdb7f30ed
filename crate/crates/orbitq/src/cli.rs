//! Command-line dispatch: argument parsing, config overrides, subcommand
//! execution, and exit-code mapping.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_grid_flag, GridConfig, RunConfig};
use crate::error::{OrbitqError, Result};
use crate::flows::{
    character_value, integrate_group_path, kappa_action, kappa_direct, kappa_ode_fixed_point,
    find_fixed_point, SweepChain,
};
use crate::liealg::MatrixLieAlgebra;
use crate::numerics::RVec;
use crate::orbit::HyperbolicOrbit;
use crate::report::{
    complex_pair, CharacterSummary, CommandResults, Discrepancy, DoublingSummary, GradingLevel,
    InfcharSummary, KappaSummary, OrbitSummary, PolyTerm, Report, SuiteResult, SweepSummary,
    VerifySummary,
};
use crate::uea::{
    casimir, hc_project, infchar_at_point, infinitesimal_character, levi_cartan,
    root_decomposition, HcStrategy,
};
use crate::verify::run_suites;

#[derive(Debug, Parser)]
#[command(
    name = "orbitq",
    version,
    about = "Geometric quantization data of hyperbolic coadjoint orbits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grading table, nilradical bases, and the modular derivative.
    Orbit(CommonArgs),
    /// Harish-Chandra projection and the infinitesimal character.
    Infchar(CommonArgs),
    /// Holonomy scalar over every applicable route.
    Kappa(CommonArgs),
    /// Character exponent of a stabilizer-valued velocity curve.
    Character(CommonArgs),
    /// Property suites across the built-in catalog.
    Verify(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the sweep grid, as N,S.
    #[arg(long, value_parser = parse_grid_flag)]
    pub grid: Option<(usize, usize)>,
    /// Overrides the modular convention: half or full.
    #[arg(long)]
    pub convention: Option<String>,
    /// Writes the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn exit_code_for(error: &OrbitqError) -> i32 {
    match error {
        OrbitqError::Config(_)
        | OrbitqError::UnknownAlgebra(_)
        | OrbitqError::BasisMismatch { .. } => 2,
        OrbitqError::NotHyperbolic { .. }
        | OrbitqError::NotCentral { .. }
        | OrbitqError::NotFixedPoint { .. }
        | OrbitqError::NotInLevi { .. }
        | OrbitqError::NotCartan { .. }
        | OrbitqError::NotTangent { .. }
        | OrbitqError::BoundaryMismatch { .. }
        | OrbitqError::CrossCheck { .. } => 1,
        _ => 3,
    }
}

/// Run the parsed command line and return (report, exit code). The report
/// is present whenever execution reached a result.
pub fn execute(cli: Cli) -> (Option<Report>, i32) {
    let (name, args) = match &cli.command {
        Command::Orbit(a) => ("orbit", a),
        Command::Infchar(a) => ("infchar", a),
        Command::Kappa(a) => ("kappa", a),
        Command::Character(a) => ("character", a),
        Command::Verify(a) => ("verify", a),
    };
    let config = match load_with_overrides(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return (None, exit_code_for(&e));
        }
    };
    let outcome = match name {
        "orbit" => cmd_orbit(config),
        "infchar" => cmd_infchar(config),
        "kappa" => cmd_kappa(config),
        "character" => cmd_character(config),
        _ => cmd_verify(config),
    };
    match outcome {
        Ok(report) => {
            let code = if report.passed { 0 } else { 1 };
            (Some(report), code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            (None, exit_code_for(&e))
        }
    }
}

pub fn emit(report: &Report, out: Option<&PathBuf>) -> std::io::Result<()> {
    use std::io::Write;
    let json = report.to_json();
    match out {
        Some(path) => std::fs::write(path, json + "\n"),
        None => match writeln!(std::io::stdout(), "{json}") {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            other => other,
        },
    }
}

fn load_with_overrides(args: &CommonArgs) -> Result<RunConfig> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if let Some((n_s, n_t)) = args.grid {
        config.grid = Some(GridConfig { n_s, n_t });
    }
    if let Some(convention) = &args.convention {
        config.delta_convention = Some(convention.clone());
    }
    config.delta_convention()?;
    Ok(config)
}

fn coeff_rows(elements: &[crate::liealg::AlgebraElement]) -> Vec<Vec<f64>> {
    elements.iter().map(|e| e.coeffs.iter().copied().collect()).collect()
}

pub fn cmd_orbit(config: RunConfig) -> Result<Report> {
    let algebra = config.resolve_algebra()?;
    let orbit = config.resolve_orbit(&algebra)?;
    let strictly_graded = !orbit.u_basis.is_empty();
    let verdict = if strictly_graded {
        "strictly graded hyperbolic orbit".to_string()
    } else {
        "not strictly graded; l = g".to_string()
    };
    let grading = orbit
        .grading
        .iter()
        .map(|(eigenvalue, block)| GradingLevel { eigenvalue: *eigenvalue, dim: block.len() })
        .collect();
    let summary = OrbitSummary {
        algebra: algebra.name.clone(),
        dimension: algebra.d,
        verdict,
        grading,
        l_basis: coeff_rows(&orbit.l_basis),
        u_basis: coeff_rows(&orbit.u_basis),
        uminus_basis: coeff_rows(&orbit.uminus_basis),
        delta: orbit.delta_coeffs.iter().copied().collect(),
        killing_normalization: algebra.killing_normalization,
    };
    Ok(Report::new("orbit", config, true, CommandResults::Orbit(summary)))
}

fn strategy_from(config: &RunConfig) -> Result<HcStrategy> {
    match config.infchar.as_ref().and_then(|c| c.strategy.as_deref()) {
        None | Some("symmetrized") => Ok(HcStrategy::Symmetrized),
        Some("normal-ordered") => Ok(HcStrategy::NormalOrdered),
        Some(other) => Err(OrbitqError::Config(format!(
            "strategy must be \"symmetrized\" or \"normal-ordered\", got \"{other}\""
        ))),
    }
}

pub fn cmd_infchar(config: RunConfig) -> Result<Report> {
    let algebra = config.resolve_algebra()?;
    let orbit = config.resolve_orbit(&algebra)?;
    let strategy = strategy_from(&config)?;
    let cartan = levi_cartan(&orbit);
    let roots = root_decomposition(&orbit, &cartan, None)?;
    let (z, element_label) = match config.resolve_uea_element(&algebra)? {
        Some(z) => (z, "custom".to_string()),
        None => (casimir(&algebra)?, "casimir".to_string()),
    };
    let projection = hc_project(&z, &roots, strategy)?;
    let chi = infinitesimal_character(&z, &orbit, &roots, strategy)?;

    let sweep_samples = config.infchar.as_ref().and_then(|c| c.sweep).unwrap_or(0);
    let mut sweep = None;
    if sweep_samples > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed());
        let mut max_deviation = 0.0f64;
        for _ in 0..sweep_samples {
            let a = algebra
                .element(RVec::from_fn(algebra.d, |_, _| rng.random_range(-0.6..0.6)));
            let g = algebra.group_exp(&a);
            let moved = infchar_at_point(&z, &orbit, &roots, &g, strategy)?;
            max_deviation = max_deviation.max((moved - chi).norm());
        }
        sweep = Some(SweepSummary { samples: sweep_samples, max_deviation });
    }

    let polynomial = projection
        .polynomial
        .terms
        .iter()
        .map(|(exponents, coeff)| PolyTerm {
            exponents: exponents.clone(),
            coeff: complex_pair(*coeff),
        })
        .collect();
    let passed = projection.central
        && sweep.as_ref().map_or(true, |s| s.max_deviation < 1e-6);
    let summary = InfcharSummary {
        element: element_label,
        strategy: match strategy {
            HcStrategy::Symmetrized => "symmetrized".into(),
            HcStrategy::NormalOrdered => "normal-ordered".into(),
        },
        central: projection.central,
        centrality_defect: projection.centrality_defect,
        cartan_rank: roots.cartan_basis.len(),
        positive_roots: roots.roots.iter().filter(|r| r.positive).count(),
        polynomial,
        chi: complex_pair(chi),
        sweep,
    };
    Ok(Report::new("infchar", config, passed, CommandResults::Infchar(summary)))
}

fn fixed_point_candidates(
    algebra: &MatrixLieAlgebra,
    orbit: &HyperbolicOrbit,
) -> Vec<crate::liealg::GroupElement> {
    let mut candidates = vec![algebra.group_identity()];
    for basis in &orbit.l_basis {
        candidates.push(algebra.group_exp(&basis.scale(0.5)));
    }
    candidates
}

pub fn cmd_kappa(config: RunConfig) -> Result<Report> {
    let algebra = config.resolve_algebra()?;
    let orbit = config.resolve_orbit(&algebra)?;
    let spec = config.resolve_path(&algebra)?;
    let (n_s, n_t) = config.grid();

    let path = integrate_group_path(&algebra, &spec);
    let direct = kappa_direct(&orbit, &path)?;
    let unit_modulus_defect = (direct.norm() - 1.0).abs();

    let connector = match config.kappa.as_ref().and_then(|k| k.connector.as_ref()) {
        Some(coeffs) => {
            if coeffs.len() != algebra.d {
                return Err(OrbitqError::Config(format!(
                    "connector has {} coefficients, need {}",
                    coeffs.len(),
                    algebra.d
                )));
            }
            Some(algebra.element(RVec::from_iterator(algebra.d, coeffs.iter().copied())))
        }
        None => None,
    };

    let mut kappa_ode = None;
    let mut action = None;
    let mut action_hat = None;
    let mut action_tilde = None;
    let mut discrepancies = Vec::new();
    let mut doubling = None;

    if let Some(anchor) = find_fixed_point(&orbit, &spec, &fixed_point_candidates(&algebra, &orbit))
    {
        let ode = kappa_ode_fixed_point(&orbit, &spec, &anchor)?;
        kappa_ode = Some(ode);
        discrepancies.push(Discrepancy { routes: "direct-ode".into(), value: (direct - ode).norm() });

        let chain =
            SweepChain::new(&orbit, &spec, anchor.clone(), connector.clone(), n_s, n_t)?;
        let (kappa, hat, tilde) = kappa_action(&orbit, &chain)?;
        action = Some(kappa);
        action_hat = Some(hat);
        action_tilde = Some(tilde);
        discrepancies
            .push(Discrepancy { routes: "direct-action".into(), value: (direct - kappa).norm() });
        discrepancies
            .push(Discrepancy { routes: "ode-action".into(), value: (ode - kappa).norm() });

        if config.kappa.as_ref().and_then(|k| k.doubling).unwrap_or(false) {
            let fine_chain =
                SweepChain::new(&orbit, &spec, anchor, connector, 2 * n_s, 2 * n_t)?;
            let (fine_kappa, _, _) = kappa_action(&orbit, &fine_chain)?;
            let coarse_error = (kappa - direct).norm();
            let fine_error = (fine_kappa - direct).norm();
            let improvement =
                if fine_error > 0.0 { coarse_error / fine_error } else { f64::INFINITY };
            doubling = Some(DoublingSummary { coarse_error, fine_error, improvement });
        }
    }

    let agreement_tol = config
        .tolerances
        .as_ref()
        .and_then(|t| t.route_agreement)
        .unwrap_or(1e-3);
    let mut passed = unit_modulus_defect <= 1e-9;
    for d in &discrepancies {
        let tol = if d.routes == "direct-ode" { agreement_tol.min(1e-8) } else { agreement_tol };
        passed = passed && d.value <= tol;
    }
    if let Some(d) = &doubling {
        passed = passed && d.improvement >= 3.0;
    }

    let summary = KappaSummary {
        kappa_direct: complex_pair(direct),
        kappa_ode: kappa_ode.map(complex_pair),
        kappa_action: action.map(complex_pair),
        action_hat,
        action_tilde,
        unit_modulus_defect,
        grid: [n_s, n_t],
        discrepancies,
        doubling,
    };
    Ok(Report::new("kappa", config, passed, CommandResults::Kappa(summary)))
}

pub fn cmd_character(config: RunConfig) -> Result<Report> {
    let algebra = config.resolve_algebra()?;
    let orbit = config.resolve_orbit(&algebra)?;
    let spec = config.resolve_path(&algebra)?;
    let multiplicity = config.character.as_ref().and_then(|c| c.multiplicity).unwrap_or(1);
    let conjugations = config.character.as_ref().and_then(|c| c.conjugations).unwrap_or(5);

    let value = character_value(&orbit, &algebra.group_identity(), &spec, multiplicity)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed());
    let mut max_deviation = 0.0f64;
    for _ in 0..conjugations {
        let a = algebra.element(RVec::from_fn(algebra.d, |_, _| rng.random_range(-0.6..0.6)));
        let moved = character_value(&orbit, &algebra.group_exp(&a), &spec, multiplicity)?;
        max_deviation = max_deviation.max((moved - value).norm());
    }
    let invariance_tol = config
        .tolerances
        .as_ref()
        .and_then(|t| t.invariance)
        .unwrap_or(1e-9);
    let passed = max_deviation <= invariance_tol * (1.0 + value.norm());
    let summary = CharacterSummary {
        value: complex_pair(value),
        multiplicity,
        conjugation_samples: conjugations,
        invariance_max_deviation: max_deviation,
    };
    Ok(Report::new("character", config, passed, CommandResults::Character(summary)))
}

pub fn cmd_verify(config: RunConfig) -> Result<Report> {
    let requested = config.verify.as_ref().and_then(|v| v.suites.clone());
    let tolerance_override = config.tolerances.as_ref().and_then(|t| t.suite);
    let summary = run_suites(requested.as_deref(), config.seed(), tolerance_override)?;
    let passed = summary.all_passed;
    Ok(Report::new("verify", config, passed, CommandResults::Verify(summary)))
}

/// One pass/fail line per suite, for terminal use alongside the JSON.
pub fn suite_lines(summary: &VerifySummary) -> Vec<String> {
    summary.suites.iter().map(format_suite_line).collect()
}

fn format_suite_line(suite: &SuiteResult) -> String {
    format!(
        "{} {}: residual {:.3e} (tolerance {:.1e})",
        if suite.passed { "PASS" } else { "FAIL" },
        suite.name,
        suite.residual,
        suite.tolerance
    )
}
