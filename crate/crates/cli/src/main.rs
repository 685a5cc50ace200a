//! Command-line front end: batch verification suites and the lattice
//! simulator, emitting human-readable summaries on stdout and versioned
//! JSON reports on request.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use diracberg_core::bergmann::{run_track_suite, Fault, FormalismTrack};
use diracberg_core::dynamics::{
    evolve, hamiltonian_comparison, lattice_dispersion_omega, measure_frequency, EvolutionState,
};
use diracberg_core::gamma::{build_gamma_set, run_gamma_suite, Representation};
use diracberg_core::grassmann::run_grassmann_suite;
use diracberg_core::phase::{parse_kv_config, LatticeSpec};
use diracberg_core::quantization::run_quantization_suite;
use diracberg_core::report::{CheckRecord, Report, SCHEMA_VERSION};
use diracberg_core::scalar::{parse_q, Constants, Q};
use diracberg_core::spin::run_spin_suite;

#[derive(Parser)]
#[command(
    name = "diracberg",
    about = "Constrained-Hamiltonian verification and lattice simulation of the Dirac field",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gamma-matrix, Pauli, Grassmann and rotation identity suites.
    VerifyAlgebra(RunOpts),
    /// Full Dirac-Bergmann pipeline per formalism track.
    Bergmann(RunOpts),
    /// RK4 evolution of a lattice plane wave with conservation diagnostics.
    Evolve(RunOpts),
    /// Second-quantization recipe verification on a finite Fock space.
    Quantize(RunOpts),
}

#[derive(Args, Clone)]
struct RunOpts {
    /// Plain-text key = value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Formalism track: spinorial | grassmann-l | grassmann-r | all.
    #[arg(long)]
    track: Option<String>,
    /// Gamma representation: dirac | weyl | majorana | all.
    #[arg(long)]
    rep: Option<String>,
    /// Sites per axis of the 1D lattice.
    #[arg(long)]
    sites: Option<usize>,
    /// Lattice spacing (rational or finite decimal, e.g. 0.5 or 1/2).
    #[arg(long)]
    dx: Option<String>,
    /// Integrator time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Number of integrator steps.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    hbar: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    mass: Option<String>,
    /// Seed for the randomized suites.
    #[arg(long)]
    seed: Option<u64>,
    /// Plane-wave mode number for evolve.
    #[arg(long)]
    k_mode: Option<i64>,
    /// Start evolve from the zero field instead of a plane wave.
    #[arg(long)]
    zero_init: bool,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the plain-text trajectory table here (evolve only).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Negative-control fault: gamma | momentum-sign.
    #[arg(long)]
    inject_fault: Option<String>,
}

/// Resolved run configuration: defaults, overridden by the config file,
/// overridden by flags.
struct RunConfig {
    tracks: Vec<FormalismTrack>,
    reps: Vec<Representation>,
    sites: usize,
    dx: Q,
    dt: f64,
    steps: usize,
    consts: Constants,
    seed: u64,
    k_mode: i64,
    zero_init: bool,
    out: Option<PathBuf>,
    table: Option<PathBuf>,
    fault: Option<String>,
}

fn parse_tracks(s: &str) -> Result<Vec<FormalismTrack>> {
    Ok(match s {
        "spinorial" => vec![FormalismTrack::SpinorialFO],
        "grassmann-l" => vec![FormalismTrack::GrassmannL],
        "grassmann-r" => vec![FormalismTrack::GrassmannR],
        "all" => FormalismTrack::ALL.to_vec(),
        other => bail!("unknown track `{other}` (use spinorial | grassmann-l | grassmann-r | all)"),
    })
}

fn parse_reps(s: &str) -> Result<Vec<Representation>> {
    Ok(match s {
        "dirac" => vec![Representation::Dirac],
        "weyl" => vec![Representation::Weyl],
        "majorana" => vec![Representation::Majorana],
        "all" => Representation::ALL.to_vec(),
        other => bail!("unknown representation `{other}` (use dirac | weyl | majorana | all)"),
    })
}

impl RunConfig {
    fn resolve(opts: &RunOpts, default_sites: usize) -> Result<Self> {
        let kv = match &opts.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                parse_kv_config(&text)?
            }
            None => Default::default(),
        };
        let pick = |flag: &Option<String>, key: &str| -> Option<String> {
            flag.clone().or_else(|| kv.get(key).cloned())
        };
        let tracks = parse_tracks(&pick(&opts.track, "track").unwrap_or_else(|| "all".into()))?;
        let reps = parse_reps(&pick(&opts.rep, "rep").unwrap_or_else(|| "all".into()))?;
        let sites = opts
            .sites
            .or_else(|| kv.get("sites").and_then(|s| s.parse().ok()))
            .unwrap_or(default_sites);
        let dx = parse_q(&pick(&opts.dx, "dx").unwrap_or_else(|| "1".into()))?;
        let dt = opts
            .dt
            .or_else(|| kv.get("dt").and_then(|s| s.parse().ok()))
            .unwrap_or_else(|| 0.02 * diracberg_core::scalar::q_to_f64(&dx));
        let steps = opts
            .steps
            .or_else(|| kv.get("steps").and_then(|s| s.parse().ok()))
            .unwrap_or(1000);
        let hbar = parse_q(&pick(&opts.hbar, "hbar").unwrap_or_else(|| "1".into()))?;
        let c = parse_q(&pick(&opts.c, "c").unwrap_or_else(|| "1".into()))?;
        let mass = parse_q(&pick(&opts.mass, "mass").unwrap_or_else(|| "1".into()))?;
        let seed = opts.seed.or_else(|| kv.get("seed").and_then(|s| s.parse().ok())).unwrap_or(42);
        let k_mode =
            opts.k_mode.or_else(|| kv.get("k_mode").and_then(|s| s.parse().ok())).unwrap_or(1);
        Ok(Self {
            tracks,
            reps,
            sites,
            dx,
            dt,
            steps,
            consts: Constants::new(hbar, c, mass),
            seed,
            k_mode,
            zero_init: opts.zero_init,
            out: opts.out.clone(),
            table: opts.table.clone(),
            fault: opts.inject_fault.clone(),
        })
    }

    fn params_json(&self, command: &str) -> serde_json::Value {
        serde_json::json!({
            "command": command,
            "tracks": self.tracks.iter().map(|t| t.name()).collect::<Vec<_>>(),
            "reps": self.reps.iter().map(|r| r.name()).collect::<Vec<_>>(),
            "sites": self.sites,
            "dx": self.dx.to_string(),
            "dt": self.dt,
            "steps": self.steps,
            "hbar": self.consts.hbar.to_string(),
            "c": self.consts.c.to_string(),
            "mass": self.consts.mass.to_string(),
            "seed": self.seed,
            "k_mode": self.k_mode,
            "zero_init": self.zero_init,
            "fault": self.fault,
        })
    }
}

fn print_summary(checks: &[CheckRecord]) {
    for c in checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {}/{} residual {:.3e}  {}", c.suite, c.identity, c.residual, c.detail);
    }
    let failures = checks.iter().filter(|c| !c.pass).count();
    println!("{} checks, {} failures", checks.len(), failures);
    if let Some(first) = checks.iter().find(|c| !c.pass) {
        println!("first failing identity: {}/{}", first.suite, first.identity);
    }
}

fn write_report(
    cfg: &RunConfig,
    command: &str,
    checks: Vec<CheckRecord>,
    extra: serde_json::Value,
) -> Result<bool> {
    print_summary(&checks);
    let report = Report::new(command, cfg.params_json(command), checks);
    let ok = report.all_pass();
    if let Some(path) = &cfg.out {
        let mut value = serde_json::to_value(&report)?;
        if let serde_json::Value::Object(map) = &mut value {
            map.insert("details".into(), extra);
        }
        fs::write(path, serde_json::to_string_pretty(&value)?)
            .with_context(|| format!("writing report {}", path.display()))?;
        println!("report written to {}", path.display());
    }
    Ok(ok)
}

fn cmd_verify_algebra(cfg: &RunConfig) -> Result<bool> {
    let corrupt = match cfg.fault.as_deref() {
        Some("gamma") => Some((cfg.reps[0], 1, 0, 2)),
        Some(other) => bail!("verify-algebra supports only --inject-fault gamma, got `{other}`"),
        None => None,
    };
    let mut checks = run_gamma_suite(&cfg.reps, corrupt);
    checks.extend(run_grassmann_suite(cfg.seed, 500, 12)?);
    checks.extend(run_spin_suite(&[
        std::f64::consts::FRAC_PI_4,
        std::f64::consts::FRAC_PI_2,
        std::f64::consts::PI,
        2.0 * std::f64::consts::PI,
    ]));
    write_report(cfg, "verify-algebra", checks, serde_json::Value::Null)
}

fn cmd_bergmann(cfg: &RunConfig) -> Result<bool> {
    let lattice = LatticeSpec::line(cfg.sites, cfg.dx.clone());
    let gs = build_gamma_set(cfg.reps[0]);
    let fault = match cfg.fault.as_deref() {
        Some("momentum-sign") => Some(Fault::MomentumSign),
        Some(other) => bail!("bergmann supports only --inject-fault momentum-sign, got `{other}`"),
        None => None,
    };
    let mut checks = Vec::new();
    let mut details = Vec::new();
    for &track in &cfg.tracks {
        let track_checks = run_track_suite(track, &lattice, &gs, &cfg.consts, cfg.seed, 50, fault)?;
        let matrix = diracberg_core::bergmann::constraint_matrix(track, &lattice, &cfg.consts)?;
        let cs = diracberg_core::bergmann::ConstraintSet::build(track, &cfg.consts)?;
        let consistency =
            diracberg_core::bergmann::run_consistency(track, &lattice, &gs, &cfg.consts)?;
        let brackets: Vec<_> = diracberg_core::bergmann::expected_canonical_db(track, &cfg.consts)
            .into_iter()
            .map(|(a, b, value)| {
                serde_json::json!({
                    "pair": format!("{{{}, {}}}", a.label(), b.label()),
                    "delta_coefficient": diracberg_core::scalar::fmt_cq(&value),
                })
            })
            .collect();
        details.push(serde_json::json!({
            "track": track.name(),
            "constraints": {
                "phi": cs.phi(0, 0).to_string(),
                "phibar": cs.phibar(0, 0).to_string(),
            },
            "constraint_matrix": matrix.to_strings(),
            "constraint_matrix_inverse": matrix.inv_to_strings(),
            "multiplier_d0psi": consistency.multiplier_psi[0].to_string(),
            "multiplier_d0psibar": consistency.multiplier_psibar[0].to_string(),
            "canonical_dirac_brackets": brackets,
        }));
        checks.extend(track_checks);
    }
    write_report(cfg, "bergmann", checks, serde_json::Value::Array(details))
}

fn cmd_evolve(cfg: &RunConfig) -> Result<bool> {
    let lattice = LatticeSpec::line(cfg.sites, cfg.dx.clone());
    let gs = build_gamma_set(cfg.reps[0]);
    if cfg.zero_init {
        return cmd_evolve_zero(cfg, lattice, gs);
    }
    let (state, _omega, u, k) = EvolutionState::plane_wave(
        lattice.clone(),
        gs.clone(),
        cfg.consts.clone(),
        cfg.k_mode,
        cfg.dt,
    )?;
    // Frequency measurement on a fresh copy, then the full diagnostics run.
    let mut freq_state = state.clone();
    let measured = measure_frequency(&mut freq_state, k, &u, cfg.steps)?;
    let oracle = lattice_dispersion_omega(k, &cfg.consts, lattice.dx_f64());
    let freq_residual = (measured - oracle).abs() / oracle;

    let mut run_state = state.clone();
    let trajectory = evolve(&mut run_state, cfg.steps)?;
    let comparison =
        hamiltonian_comparison(&run_state.to_field_config(), &lattice, &gs, &cfg.consts)?;

    let checks = vec![
        CheckRecord::new(
            "evolve",
            "dispersion",
            format!("measured {measured:.9} vs lattice oracle {oracle:.9}"),
            freq_residual,
            freq_residual <= 1e-6,
        ),
        CheckRecord::new(
            "evolve",
            "energy_conservation",
            format!("relative drift over {} steps", cfg.steps),
            trajectory.energy_drift,
            trajectory.energy_drift <= 1e-8,
        ),
        CheckRecord::new(
            "evolve",
            "norm_conservation",
            "relative drift".into(),
            trajectory.norm_drift,
            trajectory.norm_drift <= 1e-8,
        ),
        CheckRecord::new(
            "evolve",
            "constraints_on_shell",
            "primary constraints of the reconstructed momenta".into(),
            trajectory.steps.iter().map(|s| s.constraint_residual).fold(0.0, f64::max),
            trajectory.steps.iter().all(|s| s.constraint_residual == 0.0),
        ),
        CheckRecord::new(
            "evolve",
            "hamiltonian_comparison",
            format!(
                "H_R = {:.9}, H_BD = {:.9}, divergence = {:.3e}, H_IZ = {:.9}",
                comparison.h_reduced, comparison.h_bd, comparison.divergence, comparison.h_iz
            ),
            (comparison.h_reduced - comparison.h_bd).abs()
                + (comparison.h_reduced - comparison.h_iz).abs()
                + comparison.divergence,
            (comparison.h_reduced - comparison.h_bd).abs()
                <= 1e-10 * comparison.h_reduced.abs().max(1.0)
                && comparison.divergence <= 1e-10,
        ),
    ];
    println!(
        "conservation summary: energy drift {:.3e}, norm drift {:.3e}",
        trajectory.energy_drift, trajectory.norm_drift
    );
    if let Some(path) = &cfg.table {
        fs::write(path, trajectory.to_table())
            .with_context(|| format!("writing table {}", path.display()))?;
    }
    let sampled: Vec<_> =
        trajectory.steps.iter().step_by((cfg.steps / 200).max(1)).collect();
    let extra = serde_json::json!({
        "k": k,
        "omega_lattice": oracle,
        "omega_measured": measured,
        "final_fields": run_state.to_field_config().to_json_records(),
        "series": sampled,
    });
    write_report(cfg, "evolve", checks, extra)
}

/// Zero initial data: a static trajectory with zero drift.
fn cmd_evolve_zero(
    cfg: &RunConfig,
    lattice: LatticeSpec,
    gs: diracberg_core::gamma::GammaSet,
) -> Result<bool> {
    let mut state = EvolutionState::zero(lattice.clone(), gs.clone(), cfg.consts.clone(), cfg.dt)?;
    let trajectory = evolve(&mut state, cfg.steps)?;
    let static_field = state.to_field_config();
    let comparison = hamiltonian_comparison(&static_field, &lattice, &gs, &cfg.consts)?;
    let checks = vec![
        CheckRecord::new(
            "evolve",
            "static_trajectory",
            "zero initial data stays zero".into(),
            trajectory.energy_drift + trajectory.norm_drift + comparison.h_reduced.abs(),
            trajectory.energy_drift == 0.0
                && trajectory.norm_drift == 0.0
                && comparison.h_reduced == 0.0,
        ),
    ];
    println!("conservation summary: static zero field, drift 0");
    if let Some(path) = &cfg.table {
        fs::write(path, trajectory.to_table())
            .with_context(|| format!("writing table {}", path.display()))?;
    }
    let extra = serde_json::json!({ "series": trajectory.steps });
    write_report(cfg, "evolve", checks, extra)
}

fn cmd_quantize(cfg: &RunConfig) -> Result<bool> {
    let lattice = LatticeSpec::line(cfg.sites, cfg.dx.clone());
    let gs = build_gamma_set(cfg.reps[0]);
    let checks = run_quantization_suite(&lattice, &gs, &cfg.consts, &cfg.tracks)?;
    write_report(cfg, "quantize", checks, serde_json::Value::Null)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::VerifyAlgebra(opts) => {
            RunConfig::resolve(opts, 8).and_then(|cfg| cmd_verify_algebra(&cfg))
        }
        Command::Bergmann(opts) => RunConfig::resolve(opts, 8).and_then(|cfg| cmd_bergmann(&cfg)),
        Command::Evolve(opts) => RunConfig::resolve(opts, 32).and_then(|cfg| cmd_evolve(&cfg)),
        Command::Quantize(opts) => RunConfig::resolve(opts, 2).and_then(|cfg| cmd_quantize(&cfg)),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#} (schema v{SCHEMA_VERSION})");
            ExitCode::from(2)
        }
    }
}
