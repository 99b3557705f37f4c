//! Command implementations behind the `zakharov` binary: simulation runs
//! with diagnostics, conservation audits on a dt ladder, the high-low
//! smoothing/growth scans, and the counting/bilinear/resonance sweeps.
//!
//! Exit-code contract: 0 success, 2 usage or configuration error, 3
//! blow-up, 4 violated acceptance envelope (or a scan without signal).

pub mod config;
pub mod manifest;

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use zakharov::diagnostics::{build_imultiplier, energy_report, hamiltonian, mass};
use zakharov::dynamics::{evolve, IntegratorConfig};
use zakharov::error::Error as LibError;
use zakharov::estimates::{
    bilinear_trial_ratios, count_sweep, resonance_function, resonance_identity_fuzz,
    resonant_frequencies, ResonanceSign,
};
use zakharov::fit::log_log_fit;
use zakharov::highlow::{iterate_highlow, smoothing_scan, HighLowConfig};
use zakharov::state::ZakharovState;
use zakharov::stateio::{write_state, DiagnosticsCsv};

use config::Config;
use manifest::RunManifest;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;
pub const EXIT_ENVELOPE: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn usage(message: String) -> Self {
        CliError {
            message,
            code: EXIT_USAGE,
        }
    }

    pub fn envelope(message: String) -> Self {
        CliError {
            message,
            code: EXIT_ENVELOPE,
        }
    }

    pub fn internal(message: String) -> Self {
        CliError { message, code: 1 }
    }

    pub fn from_lib(err: LibError) -> Self {
        let code = match &err {
            LibError::InvalidInput(_) | LibError::Io(_) | LibError::Format(_) => EXIT_USAGE,
            LibError::BlowUp { .. } => EXIT_BLOWUP,
            LibError::GridMismatch(_, _) => EXIT_USAGE,
            LibError::NumericalIntegrity(_)
            | LibError::InsufficientSignal(_)
            | LibError::BudgetExceeded(_) => EXIT_ENVELOPE,
        };
        CliError {
            message: err.to_string(),
            code,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CommonOpts {
    pub out_dir: PathBuf,
    pub seed_override: Option<u64>,
    pub quiet: bool,
}

impl CommonOpts {
    pub fn new(out_dir: PathBuf) -> Self {
        CommonOpts {
            out_dir,
            seed_override: None,
            quiet: true,
        }
    }

    fn say(&self, line: &str) {
        if !self.quiet {
            println!("{line}");
        }
    }

    fn prepare_dir(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::internal(format!("creating {}: {e}", self.out_dir.display())))
    }
}

/// Output-directory resolution: explicit flag, then the environment
/// override, then `./zakharov-out`.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("ZAKHAROV_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("zakharov-out"))
}

/// Replays an experiment from its manifest: the embedded configuration,
/// the experiment name, and any recorded seed override are restored, so
/// the outputs reproduce the original run byte for byte under one build.
pub fn run_from_manifest(manifest_path: &PathBuf, opts: &CommonOpts) -> Result<(), CliError> {
    let text = std::fs::read_to_string(manifest_path).map_err(|e| {
        CliError::usage(format!("cannot read manifest {}: {e}", manifest_path.display()))
    })?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("malformed manifest: {e}")))?;
    let config: Config = manifest
        .config
        .clone()
        .try_into()
        .map_err(|e| CliError::usage(format!("manifest config does not parse: {e}")))?;
    let opts = CommonOpts {
        seed_override: manifest.seed_override,
        ..opts.clone()
    };
    match manifest.experiment.as_str() {
        "simulate" => run_simulate(&config, &opts).map(|_| ()),
        "conserve" => run_conserve(&config, &opts).map(|_| ()),
        "highlow_scan" => run_highlow_scan(&config, &opts).map(|_| ()),
        "estimates" => run_estimates(&config, &opts).map(|_| ()),
        other => Err(CliError::usage(format!("unknown experiment {other:?} in manifest"))),
    }
}

// ---------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub run_id: String,
    pub rows: usize,
    pub final_time: f64,
    pub final_mass: f64,
    pub max_nonlinear_part_norm: f64,
    pub dt_flagged: bool,
    pub blow_up: bool,
}

pub fn run_simulate(cfg: &Config, opts: &CommonOpts) -> Result<SimulateReport, CliError> {
    let grid = cfg.grid()?;
    let icfg = cfg.integrator()?;
    let data = cfg.require_data()?;
    let sim = cfg
        .simulate
        .as_ref()
        .ok_or_else(|| CliError::usage("missing required section [simulate]".into()))?;
    if sim.t_final < 0.0 {
        return Err(CliError::usage("simulate.t_final must be nonnegative".into()));
    }
    let seed = opts.seed_override.unwrap_or(data.seed);
    let initial = data.build(grid, Some(seed))?;
    let im = build_imultiplier(sim.n_i, data.s.clamp(0.51, 0.99), grid)
        .map_err(CliError::from_lib)?;

    opts.prepare_dir()?;
    let mut manifest = RunManifest::begin("simulate", cfg, seed, opts.seed_override)?;
    manifest.write(&opts.out_dir)?;
    if cfg.dt_flagged() && !opts.quiet {
        eprintln!(
            "note: dt = {} exceeds the accuracy guideline 0.5 (2π/M)² for M = {}",
            icfg.dt,
            grid.num_modes()
        );
    }

    let diag_path = opts.out_dir.join("diagnostics.csv");
    let mut csv = DiagnosticsCsv::create(&diag_path).map_err(CliError::from_lib)?;
    let mut rows = 0usize;
    let mut max_nl = 0.0f64;
    let mut checkpoints = Vec::new();
    let run_id = manifest.run_id.clone();
    let out_dir = opts.out_dir.clone();
    let evolve_result = evolve(&initial, sim.t_final, &icfg, |state| {
        let report = energy_report(state, &initial, &im, data.s, data.beta)?;
        max_nl = max_nl.max(report.nonlinear_part_norm);
        csv.append(&run_id, &report)?;
        if sim.checkpoint_every > 0 && rows.is_multiple_of(sim.checkpoint_every) {
            let path = out_dir.join(format!("checkpoint_{:06}.bin", rows));
            write_state(&path, state)?;
            checkpoints.push(path);
        }
        rows += 1;
        Ok(())
    });
    csv.finish().map_err(CliError::from_lib)?;
    manifest.record_output(&diag_path);
    for path in &checkpoints {
        manifest.record_output(path);
    }

    match evolve_result {
        Ok(final_state) => {
            let state_path = opts.out_dir.join("final_state.bin");
            write_state(&state_path, &final_state).map_err(CliError::from_lib)?;
            manifest.record_output(&state_path);
            let state_csv = opts.out_dir.join("final_state.csv");
            write_attributed_state_csv(&state_csv, &run_id, &final_state)?;
            manifest.record_output(&state_csv);
            manifest.finalize(&opts.out_dir, "ok")?;
            opts.say(&format!(
                "simulate: {} rows to {}, final t = {}",
                rows,
                diag_path.display(),
                final_state.time()
            ));
            Ok(SimulateReport {
                run_id,
                rows,
                final_time: final_state.time(),
                final_mass: mass(final_state.u()),
                max_nonlinear_part_norm: max_nl,
                dt_flagged: cfg.dt_flagged(),
                blow_up: false,
            })
        }
        Err(LibError::BlowUp { time, last_state }) => {
            // Keep the partial diagnostics and the last finite state.
            let state_path = opts.out_dir.join("last_finite_state.bin");
            write_state(&state_path, &last_state).map_err(CliError::from_lib)?;
            manifest.record_output(&state_path);
            manifest.finalize(&opts.out_dir, "blow_up")?;
            Err(CliError {
                message: format!("blow-up detected at t = {time}; partial outputs retained"),
                code: EXIT_BLOWUP,
            })
        }
        Err(other) => Err(CliError::from_lib(other)),
    }
}

// ---------------------------------------------------------------------
// conserve
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ConserveLevel {
    pub dt: f64,
    pub mass_drift: f64,
    pub hamiltonian_drift: f64,
    pub dt_flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConserveReport {
    pub run_id: String,
    pub levels: Vec<ConserveLevel>,
    /// `log2` drift ratios between consecutive dt levels (empty when the
    /// drifts sit at roundoff).
    pub hamiltonian_orders: Vec<f64>,
    pub mass_tol: f64,
    pub passed: bool,
}

pub fn run_conserve(cfg: &Config, opts: &CommonOpts) -> Result<ConserveReport, CliError> {
    let grid = cfg.grid()?;
    let data = cfg.require_data()?;
    let section = cfg
        .conserve
        .as_ref()
        .ok_or_else(|| CliError::usage("missing required section [conserve]".into()))?;
    if section.dt_levels.is_empty() {
        return Err(CliError::usage("conserve.dt_levels must not be empty".into()));
    }
    let seed = opts.seed_override.unwrap_or(data.seed);
    let initial = data.build(grid, Some(seed))?;

    opts.prepare_dir()?;
    let mut manifest = RunManifest::begin("conserve", cfg, seed, opts.seed_override)?;
    manifest.write(&opts.out_dir)?;

    let m0 = mass(initial.u());
    let h0 = hamiltonian(&initial).map_err(CliError::from_lib)?;
    let guideline = 0.5 * (std::f64::consts::TAU / grid.num_modes() as f64).powi(2);

    let mut levels = Vec::new();
    for &dt in &section.dt_levels {
        let icfg = IntegratorConfig::new(dt, cfg.integrator.scheme, cfg.integrator.record_every)
            .map_err(CliError::from_lib)?;
        let mut mass_drift = 0.0f64;
        let mut h_drift = 0.0f64;
        evolve(&initial, section.t_final, &icfg, |state| {
            if m0 > 0.0 {
                mass_drift = mass_drift.max((mass(state.u()) - m0).abs() / m0);
            }
            h_drift = h_drift.max((hamiltonian(state)? - h0).abs());
            Ok(())
        })
        .map_err(CliError::from_lib)?;
        levels.push(ConserveLevel {
            dt,
            mass_drift,
            hamiltonian_drift: h_drift,
            dt_flagged: dt > guideline,
        });
    }

    let csv_path = opts.out_dir.join("conserve.csv");
    let mut text = String::from("run_id,dt,mass_drift,hamiltonian_drift,dt_flagged\n");
    for level in &levels {
        writeln!(
            text,
            "{},{:.17e},{:.17e},{:.17e},{}",
            manifest.run_id, level.dt, level.mass_drift, level.hamiltonian_drift, level.dt_flagged
        )
        .unwrap();
    }
    std::fs::write(&csv_path, text)
        .map_err(|e| CliError::internal(format!("writing conserve.csv: {e}")))?;
    manifest.record_output(&csv_path);

    let mut orders = Vec::new();
    for pair in levels.windows(2) {
        if pair[0].hamiltonian_drift > 1e-14 && pair[1].hamiltonian_drift > 1e-14 {
            orders.push((pair[0].hamiltonian_drift / pair[1].hamiltonian_drift).log2());
        }
    }

    let passed = levels.iter().all(|l| l.mass_drift <= section.mass_tol);
    manifest.finalize(&opts.out_dir, if passed { "ok" } else { "mass_drift" })?;
    let report = ConserveReport {
        run_id: manifest.run_id.clone(),
        levels,
        hamiltonian_orders: orders,
        mass_tol: section.mass_tol,
        passed,
    };
    for level in &report.levels {
        opts.say(&format!(
            "conserve: dt={:.3e} mass_drift={:.3e} h_drift={:.3e}{}",
            level.dt,
            level.mass_drift,
            level.hamiltonian_drift,
            if level.dt_flagged { " [dt flagged]" } else { "" }
        ));
    }
    if !report.passed {
        return Err(CliError::envelope(format!(
            "mass drift exceeded {:.1e}",
            report.mass_tol
        )));
    }
    Ok(report)
}

// ---------------------------------------------------------------------
// highlow-scan
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SmoothingSeedFit {
    pub seed: u64,
    pub slope: f64,
    pub residual_rms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthSummary {
    pub n_hl: i64,
    pub slope: f64,
    pub bound: f64,
    pub max_reconstruction_error: f64,
    pub delta_epsilon_c1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HighlowReport {
    pub run_id: String,
    pub predicted_slope: f64,
    pub measurement_time: f64,
    pub smoothing: Vec<SmoothingSeedFit>,
    pub growth: Option<GrowthSummary>,
    pub warnings: Vec<String>,
}

pub fn run_highlow_scan(cfg: &Config, opts: &CommonOpts) -> Result<HighlowReport, CliError> {
    let section = cfg
        .highlow
        .as_ref()
        .ok_or_else(|| CliError::usage("missing required section [highlow]".into()))?;
    if section.n_hl_list.is_empty() {
        return Err(CliError::usage("highlow.n_hl_list must not be empty".into()));
    }
    if section.seed_list.is_empty() {
        return Err(CliError::usage("highlow.seed_list must not be empty".into()));
    }
    let grid = zakharov::spectral::GridSpec::new(section.m).map_err(CliError::from_lib)?;
    let template_n_hl = *section.n_hl_list.iter().max().unwrap();
    let template = HighLowConfig::from_rule(
        section.s,
        section.beta,
        template_n_hl,
        section.alpha,
        section.gamma,
        section.k,
        section.c1,
        section.epsilon0,
    )
    .map_err(CliError::from_lib)?;
    template.validate_smoothing().map_err(CliError::from_lib)?;
    let t = section.t.unwrap_or(template.delta);
    let icfg = IntegratorConfig::new(section.dt, cfg.integrator.scheme, usize::MAX)
        .map_err(CliError::from_lib)?;

    // The data family: u is an H^s Gaussian tail rescaled to norm K, the
    // wave pair comes from FL draws at (β, C1); both keyed by the seed.
    let data = cfg.data.clone().unwrap_or_else(|| default_scan_data(section));

    opts.prepare_dir()?;
    let seed0 = opts.seed_override.unwrap_or(section.seed_list[0]);
    let mut manifest = RunManifest::begin("highlow_scan", cfg, seed0, opts.seed_override)?;
    manifest.write(&opts.out_dir)?;

    let mut warnings = Vec::new();
    if template.delta_epsilon_check() > 1.0 {
        warnings.push(format!(
            "delta^epsilon0 * C1 = {:.3} exceeds 1; the local-theory smallness is not honored",
            template.delta_epsilon_check()
        ));
    }
    if 2 * template_n_hl > grid.dealias_cutoff() {
        warnings.push(format!(
            "top cutoff {template_n_hl} exceeds half the dealias cutoff {}; its high band is thin",
            grid.dealias_cutoff()
        ));
    }
    for w in &warnings {
        if !opts.quiet {
            eprintln!("warning: {w}");
        }
    }

    let seeds: Vec<u64> = if opts.seed_override.is_some() {
        vec![seed0]
    } else {
        section.seed_list.clone()
    };

    let mut smoothing_rows =
        String::from("run_id,seed,n_hl,remainder_norm,remainder_sup\n");
    let mut fits = Vec::new();
    for &seed in &seeds {
        let u0 = scan_u_field(&data, section, grid, seed)?;
        let (np, nm) = data.wave_pair(grid, seed.wrapping_add(100))?;
        let scan = smoothing_scan(&u0, &np, &nm, &template, &section.n_hl_list, t, &icfg)
            .map_err(CliError::from_lib)?;
        for cell in &scan.cells {
            writeln!(
                smoothing_rows,
                "{},{},{},{:.17e},{:.17e}",
                manifest.run_id, seed, cell.n_hl, cell.remainder_norm, cell.remainder_sup
            )
            .unwrap();
        }
        fits.push(SmoothingSeedFit {
            seed,
            slope: scan.fitted_slope,
            residual_rms: scan.fit_residual_rms,
        });
        opts.say(&format!(
            "smoothing seed {seed}: slope {:.3} (predicted {:.3}), residual {:.3}",
            scan.fitted_slope, scan.predicted_slope, scan.fit_residual_rms
        ));
    }
    let smoothing_path = opts.out_dir.join("smoothing.csv");
    std::fs::write(&smoothing_path, smoothing_rows)
        .map_err(|e| CliError::internal(format!("writing smoothing.csv: {e}")))?;
    manifest.record_output(&smoothing_path);

    // Growth scan with the iteration driver.
    let mut growth = None;
    if !section.t_scan.is_empty() {
        let n_hl_iter = if section.n_hl_iterate > 0 {
            section.n_hl_iterate
        } else {
            section.n_hl_list[0]
        };
        let cfg_iter = HighLowConfig::from_rule(
            section.s,
            section.beta,
            n_hl_iter,
            section.alpha,
            section.gamma,
            section.k,
            section.c1,
            section.epsilon0,
        )
        .map_err(CliError::from_lib)?;
        cfg_iter.validate_iteration().map_err(CliError::from_lib)?;
        let seed = seeds[0];
        let u0 = scan_u_field(&data, section, grid, seed)?;
        let (np, nm) = data.wave_pair(grid, seed.wrapping_add(100))?;

        let mut ledger_rows = String::from(
            "run_id,seed,t_final,interval,t_start,t_end,i_energy_start,i_energy_end,\
             drift_within,absorption_jump,v_norm,m_tilde_norm,nonlinear_part_norm,\
             reconstruction_error\n",
        );
        let mut points = Vec::new();
        let mut worst_recon = 0.0f64;
        for &t_final in &section.t_scan {
            let ledger = iterate_highlow(
                &u0,
                &np,
                &nm,
                t_final,
                &cfg_iter,
                &icfg,
                section.max_intervals,
            )
            .map_err(CliError::from_lib)?;
            if !ledger.complete {
                return Err(CliError::envelope(format!(
                    "interval budget {} exceeded at horizon {t_final}",
                    section.max_intervals
                )));
            }
            for rec in &ledger.intervals {
                writeln!(
                    ledger_rows,
                    "{},{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    manifest.run_id,
                    seed,
                    t_final,
                    rec.index,
                    rec.t_start,
                    rec.t_end,
                    rec.i_energy_start,
                    rec.i_energy_end,
                    rec.drift_within,
                    rec.absorption_jump,
                    rec.v_norm,
                    rec.m_tilde_norm,
                    rec.nonlinear_part_norm,
                    rec.reconstruction_error
                )
                .unwrap();
            }
            worst_recon = worst_recon.max(ledger.max_reconstruction_error());
            points.push((t_final, ledger.final_nonlinear_part_norm()));
        }
        let ledger_path = opts.out_dir.join("ledger.csv");
        std::fs::write(&ledger_path, ledger_rows)
            .map_err(|e| CliError::internal(format!("writing ledger.csv: {e}")))?;
        manifest.record_output(&ledger_path);

        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        let fit = log_log_fit(&xs, &ys).map_err(CliError::from_lib)?;
        let bound = (cfg_iter.alpha * (1.0 - cfg_iter.s) * cfg_iter.gamma)
            .max((0.5 - cfg_iter.beta) * cfg_iter.gamma)
            + 0.5;
        opts.say(&format!(
            "growth: slope {:.3} against bound {:.3}, worst reconstruction {:.2e}",
            fit.slope, bound, worst_recon
        ));
        growth = Some(GrowthSummary {
            n_hl: n_hl_iter,
            slope: fit.slope,
            bound,
            max_reconstruction_error: worst_recon,
            delta_epsilon_c1: cfg_iter.delta_epsilon_check(),
        });
    }

    let report = HighlowReport {
        run_id: manifest.run_id.clone(),
        predicted_slope: section.s - section.beta - 0.5,
        measurement_time: t,
        smoothing: fits,
        growth,
        warnings,
    };
    let summary_path = opts.out_dir.join("summary.json");
    std::fs::write(
        &summary_path,
        serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::internal(format!("summary serialization: {e}")))?,
    )
    .map_err(|e| CliError::internal(format!("writing summary.json: {e}")))?;
    manifest.record_output(&summary_path);
    manifest.finalize(&opts.out_dir, "ok")?;
    Ok(report)
}

fn default_scan_data(section: &config::HighlowSection) -> config::DataSection {
    config::DataSection {
        kind: "fl_deterministic".to_string(),
        s: section.s,
        beta: section.beta,
        c1: section.c1,
        r: 0.0,
        epsilon: 0.05,
        seed: section.seed_list.first().copied().unwrap_or(1),
        kmin: 1,
        u_kmin: 8,
        u_norm: section.k,
        coupling: Default::default(),
        saturated: false,
        k0: 6.0,
        kmax: 16,
        amplitude: 1.0,
    }
}

fn scan_u_field(
    data: &config::DataSection,
    section: &config::HighlowSection,
    grid: zakharov::spectral::GridSpec,
    seed: u64,
) -> Result<zakharov::spectral::SpectralField, CliError> {
    let mut data = data.clone();
    data.s = section.s;
    if data.u_norm <= 0.0 {
        data.u_norm = section.k;
    }
    data.u_field(grid, seed)
}

// ---------------------------------------------------------------------
// estimates
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct EstimatesReport {
    pub run_id: String,
    pub max_count_ratio: f64,
    pub count_envelope: f64,
    pub resonance_cases: u64,
    pub resonance_violations: u64,
    pub identity_cases: u64,
    pub identity_violations: u64,
    pub max_bilinear_ratio: f64,
    pub bilinear_envelope: f64,
    /// Log-log slope of the per-N maximal bilinear ratio for N ≥ 4.
    pub bilinear_slope: Option<f64>,
    pub violations: Vec<String>,
}

pub fn run_estimates(cfg: &Config, opts: &CommonOpts) -> Result<EstimatesReport, CliError> {
    let section = cfg
        .estimates
        .as_ref()
        .ok_or_else(|| CliError::usage("missing required section [estimates]".into()))?;
    if section.n_values.is_empty() || section.l_values.is_empty() {
        return Err(CliError::usage(
            "estimates.n_values and estimates.l_values must not be empty".into(),
        ));
    }
    for &v in section.n_values.iter().chain(&section.l_values) {
        if v < 1 || !(v as u64).is_power_of_two() {
            return Err(CliError::usage(format!("sweep value {v} is not dyadic")));
        }
    }
    let seed = opts.seed_override.unwrap_or(section.seed);

    opts.prepare_dir()?;
    let mut manifest = RunManifest::begin("estimates", cfg, seed, opts.seed_override)?;
    manifest.write(&opts.out_dir)?;
    let mut violations = Vec::new();

    // Counting sweep.
    let cells = count_sweep(&section.n_values, &section.l_values);
    let mut counting_rows = String::from("run_id,n,l,sign1,sign2,k,tau,count,ratio\n");
    let mut max_count_ratio = 0.0f64;
    for cell in &cells {
        writeln!(
            counting_rows,
            "{},{},{},{},{},{},{},{},{:.17e}",
            manifest.run_id,
            cell.n,
            cell.l,
            cell.sign1,
            cell.sign2,
            cell.k,
            cell.tau,
            cell.count,
            cell.ratio
        )
        .unwrap();
        max_count_ratio = max_count_ratio.max(cell.ratio);
    }
    let counting_path = opts.out_dir.join("counting.csv");
    std::fs::write(&counting_path, counting_rows)
        .map_err(|e| CliError::internal(format!("writing counting.csv: {e}")))?;
    manifest.record_output(&counting_path);
    if max_count_ratio > section.count_envelope {
        violations.push(format!(
            "count ratio {max_count_ratio} exceeds the envelope {}",
            section.count_envelope
        ));
    }
    opts.say(&format!(
        "counting: max count/(L·N) = {max_count_ratio} over {} cells",
        cells.len()
    ));

    // Resonance sweeps (exact integer arithmetic).
    let mut resonance_cases = 0u64;
    let mut resonance_violations = 0u64;
    for k1 in 1..=section.k1_max {
        for k1 in [k1, -k1] {
            for sign in ResonanceSign::BOTH {
                let (k0, k2) = resonant_frequencies(k1, sign).map_err(CliError::from_lib)?;
                resonance_cases += 1;
                if resonance_function(k0, k2, sign) != 0 {
                    resonance_violations += 1;
                }
            }
        }
    }
    let (identity_cases, identity_violations) =
        resonance_identity_fuzz(section.fuzz_tuples, seed);
    if resonance_violations > 0 || identity_violations > 0 {
        violations.push(format!(
            "resonance residuals nonzero: {resonance_violations} frequency cases, {identity_violations} identity tuples"
        ));
    }
    let resonance_path = opts.out_dir.join("resonance.csv");
    std::fs::write(
        &resonance_path,
        format!(
            "run_id,check,cases,violations\n{rid},resonant_frequencies,{resonance_cases},{resonance_violations}\n{rid},identity_fuzz,{identity_cases},{identity_violations}\n",
            rid = manifest.run_id
        ),
    )
    .map_err(|e| CliError::internal(format!("writing resonance.csv: {e}")))?;
    manifest.record_output(&resonance_path);

    // Bilinear probes: one row per trial per (N, L).
    let mut bilinear_rows = String::from("run_id,n,l,trial_seed,ratio\n");
    let mut max_bilinear = 0.0f64;
    let mut per_n_max: Vec<(i64, f64)> = Vec::new();
    for &n in &section.n_values {
        let mut best_for_n = 0.0f64;
        for &l in &section.l_values {
            let ratios =
                bilinear_trial_ratios(n, l, section.trials, seed ^ ((n as u64) << 8) ^ l as u64)
                    .map_err(CliError::from_lib)?;
            for (trial, ratio) in ratios.iter().enumerate() {
                writeln!(
                    bilinear_rows,
                    "{},{},{},{},{:.17e}",
                    manifest.run_id, n, l, trial, ratio
                )
                .unwrap();
                max_bilinear = max_bilinear.max(*ratio);
                best_for_n = best_for_n.max(*ratio);
            }
        }
        per_n_max.push((n, best_for_n));
    }
    let bilinear_path = opts.out_dir.join("bilinear.csv");
    std::fs::write(&bilinear_path, bilinear_rows)
        .map_err(|e| CliError::internal(format!("writing bilinear.csv: {e}")))?;
    manifest.record_output(&bilinear_path);
    if max_bilinear > section.ratio_envelope {
        violations.push(format!(
            "bilinear ratio {max_bilinear} exceeds the envelope {}",
            section.ratio_envelope
        ));
    }
    let tail: Vec<(i64, f64)> = per_n_max.iter().copied().filter(|(n, _)| *n >= 4).collect();
    let bilinear_slope = if tail.len() >= 2 {
        let xs: Vec<f64> = tail.iter().map(|(n, _)| *n as f64).collect();
        let ys: Vec<f64> = tail.iter().map(|(_, r)| *r).collect();
        Some(log_log_fit(&xs, &ys).map_err(CliError::from_lib)?.slope)
    } else {
        None
    };
    opts.say(&format!(
        "bilinear: max ratio {max_bilinear:.4}, tail slope {:?}",
        bilinear_slope
    ));

    let report = EstimatesReport {
        run_id: manifest.run_id.clone(),
        max_count_ratio,
        count_envelope: section.count_envelope,
        resonance_cases,
        resonance_violations,
        identity_cases,
        identity_violations,
        max_bilinear_ratio: max_bilinear,
        bilinear_envelope: section.ratio_envelope,
        bilinear_slope,
        violations: violations.clone(),
    };
    let summary_path = opts.out_dir.join("summary.json");
    std::fs::write(
        &summary_path,
        serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::internal(format!("summary serialization: {e}")))?,
    )
    .map_err(|e| CliError::internal(format!("writing summary.json: {e}")))?;
    manifest.record_output(&summary_path);
    manifest.finalize(&opts.out_dir, if violations.is_empty() { "ok" } else { "violated" })?;

    if !violations.is_empty() {
        return Err(CliError::envelope(violations.join("; ")));
    }
    Ok(report)
}

/// Human-readable state export with the run identifier on every row.
fn write_attributed_state_csv(
    path: &std::path::Path,
    run_id: &str,
    state: &ZakharovState,
) -> Result<(), CliError> {
    let grid = state.grid();
    let mut text = String::from("run_id,field,k,re,im\n");
    for (name, f) in [
        ("u", state.u()),
        ("n_plus", state.n_plus()),
        ("n_minus", state.n_minus()),
    ] {
        for k in grid.min_freq()..=grid.max_freq() {
            let c = f.coeff(k);
            writeln!(text, "{run_id},{name},{k},{:.17e},{:.17e}", c.re, c.im).unwrap();
        }
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::internal(format!("writing final_state.csv: {e}")))
}

/// Envelope re-check used by the negative-control test: returns the
/// violation messages a sweep result would trigger.
pub fn counting_envelope_violations(
    cells: &[zakharov::estimates::CountSweepCell],
    envelope: f64,
) -> Vec<String> {
    cells
        .iter()
        .filter(|c| c.ratio > envelope)
        .map(|c| {
            format!(
                "count ratio {} at N={} L={} signs=({},{}) exceeds {envelope}",
                c.ratio, c.n, c.l, c.sign1, c.sign2
            )
        })
        .collect()
}
