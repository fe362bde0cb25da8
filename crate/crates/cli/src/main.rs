//! Command-line driver for the kicked p-spin toolkit.
//!
//! Every subcommand reads a TOML run configuration (see `Config::template`),
//! writes CSV tables plus a `metadata.json` sidecar into the output
//! directory, and refuses to overwrite existing files unless `--force` is
//! given. Exit codes: 0 success, 1 configuration error, 2 numerical
//! failure, 3 I/O error.

mod config;
mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde_json::json;

use pspin_core::algebra::{DensityOperator, SpinAlgebra, StateVector};
use pspin_core::classical::{averaged_correlation, g_measure_from_series, SphereGrid};
use pspin_core::critical::{dqpt_point, gs_critical_point, spinodal_point};
use pspin_core::error::Error as CoreError;
use pspin_core::exec::{with_thread_pool, ExecMode};
use pspin_core::floquet::{
    build_floquet, evolve, run_switching_protocol, DriveMode, ModelParams, SwitchSegment,
};
use pspin_core::otoc::{long_time_stats, otoc_series};
use pspin_core::resonance::validate_effective_spectrum;
use pspin_core::series::{power_spectrum, PowerSpectrum, TimeSeries};
use pspin_core::spectral::{clustering_degeneracy, dos_histogram, eigenphases, spacing_ratio};
use pspin_core::sweep::{g_measure_sweep, otoc_sweep, spacing_ratio_sweep, AxisSpec, GridSpec};

use config::Config;
use output::{conventions, fmt_error, fmt_f64, MetadataBuilder, OutputDir};

/// Top-level failure classes, mapped onto process exit codes.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "pspin",
    version,
    about = "Kicked p-spin simulations: subharmonic response, spectral statistics, OTOCs, and mean-field phase diagrams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides [output].dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Seed recorded in run metadata (overrides the config seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,

    /// Lift the desk-scale size caps.
    #[arg(long, global = true)]
    big: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Stroboscopic record of Sz/S and its power spectrum.
    Evolve,
    /// Eigenphases of U_F^q with spacing ratios, clustering fractions, and
    /// eigenphase histograms.
    Spectrum,
    /// Normalized spacing-ratio map over a (Lambda, alpha) grid.
    Rtilde,
    /// OTOC order parameter: single point, or a map when [sweep] is set.
    Otoc,
    /// Mean-field averaged correlation, spectrum, and subharmonic weight at
    /// the configured parameter point.
    ClassicalSweep,
    /// Mean-field phase diagram G(Lambda, alpha) over a grid.
    PhaseDiagram,
    /// Critical points of the undriven model as one CSV row.
    CriticalPoints {
        /// Interaction order (falls back to model.p from the config).
        #[arg(long)]
        p: Option<u32>,
    },
    /// Empirical sign validation of the q-step effective Hamiltonian.
    ResonanceCheck,
    /// Time-crystal switching protocol over the configured schedule.
    Switch,
}

const CAP_SINGLE_POINT_N: usize = 1024;
const CAP_OTOC_SWEEP_N: usize = 512;
const CAP_GRID_CELLS: usize = 64 * 64;

fn main() {
    let cli = Cli::parse();
    if let Err(failure) = run(cli) {
        eprintln!("error: {}", failure.message());
        std::process::exit(failure.code());
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Evolve => cmd_evolve(&cli),
        Command::Spectrum => cmd_spectrum(&cli),
        Command::Rtilde => cmd_rtilde(&cli),
        Command::Otoc => cmd_otoc(&cli),
        Command::ClassicalSweep => cmd_classical_point(&cli),
        Command::PhaseDiagram => cmd_phase_diagram(&cli),
        Command::CriticalPoints { p } => cmd_critical_points(&cli, p),
        Command::ResonanceCheck => cmd_resonance_check(&cli),
        Command::Switch => cmd_switch(&cli),
    }
}

struct Context {
    config: Config,
    out: OutputDir,
    seed: u64,
    threads: usize,
    big: bool,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self, Failure> {
        let path = cli
            .config
            .as_ref()
            .ok_or_else(|| Failure::Config("this command needs --config <path>".into()))?;
        let config = Config::load(path).map_err(Failure::Config)?;
        let dir = cli
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(&config.output.dir));
        let out = OutputDir::new(dir, cli.force)?;
        Ok(Self {
            seed: cli.seed.unwrap_or(config.seed),
            threads: cli.threads,
            big: cli.big,
            config,
            out,
        })
    }

    fn params(&self) -> Result<ModelParams, Failure> {
        let m = &self.config.model;
        Ok(ModelParams::new(m.p, m.lambda, m.h, m.alpha_b.radians())?)
    }

    fn drive_mode(&self) -> DriveMode {
        match self.config.model.drive.as_str() {
            "exact" => DriveMode::ExactDrive,
            _ => DriveMode::Kicked,
        }
    }

    fn algebra(&self) -> Result<SpinAlgebra, Failure> {
        Ok(SpinAlgebra::new(self.config.system.n)?)
    }

    fn initial_state(&self, algebra: &SpinAlgebra) -> StateVector {
        algebra.coherent_state(
            self.config.dynamics.theta.radians(),
            self.config.dynamics.phi.radians(),
        )
    }

    fn cap(&self, actual: usize, cap: usize, what: &str) -> Result<(), Failure> {
        if actual > cap && !self.big {
            return Err(Failure::Config(format!(
                "{what} = {actual} exceeds the desk-scale cap {cap}; pass --big to proceed"
            )));
        }
        Ok(())
    }

    fn sweep_grid(&self) -> Result<GridSpec, Failure> {
        let sweep = self
            .config
            .sweep
            .as_ref()
            .ok_or_else(|| Failure::Config("this command needs a [sweep] section".into()))?;
        let grid = GridSpec {
            lambda: AxisSpec {
                min: sweep.lambda_min,
                max: sweep.lambda_max,
                count: sweep.lambda_count,
            },
            alpha: AxisSpec {
                min: sweep.alpha_min.radians(),
                max: sweep.alpha_max.radians(),
                count: sweep.alpha_count,
            },
        };
        self.cap(grid.cell_count(), CAP_GRID_CELLS, "sweep cells")?;
        Ok(grid)
    }

    fn metadata(&self, command: &str) -> MetadataBuilder {
        let m = &self.config.model;
        MetadataBuilder::new(command, self.seed, self.threads)
            .field(
                "params",
                json!({
                    "p": m.p,
                    "lambda": m.lambda,
                    "h": m.h,
                    "alpha_b": m.alpha_b.radians(),
                    "alpha_effective": m.alpha_b.radians() + m.h,
                    "drive": m.drive,
                    "n": self.config.system.n,
                }),
            )
            .field("conventions", conventions(&self.config.analysis))
    }
}

fn sz_over_s(algebra: &SpinAlgebra) -> Array2<C64> {
    algebra.sz().mapv(|z| z / C64::new(algebra.spin(), 0.0))
}

fn series_rows(series: &TimeSeries) -> impl Iterator<Item = String> + '_ {
    series
        .values
        .iter()
        .enumerate()
        .map(|(l, v)| format!("{l},{}", fmt_f64(*v)))
}

fn spectrum_rows(spec: &PowerSpectrum) -> impl Iterator<Item = String> + '_ {
    spec.folded_bins()
        .map(|(omega, power)| format!("{},{}", fmt_f64(omega), fmt_f64(power)))
}

fn analyzed_spectrum(
    series: &TimeSeries,
    analysis: &config::AnalysisSection,
) -> Result<PowerSpectrum, Failure> {
    let mut spec = power_spectrum(series, analysis.drop_transient)?;
    if analysis.normalize_spectrum {
        spec.normalize();
    }
    Ok(spec)
}

fn cmd_evolve(cli: &Cli) -> Result<(), Failure> {
    let ctx = Context::new(cli)?;
    let start = Instant::now();
    ctx.cap(ctx.config.system.n, CAP_SINGLE_POINT_N, "system.n")?;
    let algebra = ctx.algebra()?;
    let params = ctx.params()?;
    let u = build_floquet(&params, &algebra, ctx.drive_mode())?;
    let series = evolve(
        &ctx.initial_state(&algebra),
        &u,
        ctx.config.dynamics.t_max,
        &sz_over_s(&algebra),
        "f_Z",
    )?;
    let spec = analyzed_spectrum(&series, &ctx.config.analysis)?;
    let (omega_star, peak) = spec.dominant_frequency(true);

    ctx.out
        .write_csv("evolve.csv", "step,value", series_rows(&series))?;
    ctx.out
        .write_csv("spectrum.csv", "omega,power", spectrum_rows(&spec))?;
    let metadata = ctx
        .metadata("evolve")
        .field("t_max", json!(ctx.config.dynamics.t_max))
        .field("theta", json!(ctx.config.dynamics.theta.radians()))
        .field("phi", json!(ctx.config.dynamics.phi.radians()))
        .field("renormalizations", json!(series.renormalizations))
        .field("dominant_omega", json!(omega_star))
        .field("dominant_power", json!(peak))
        .finish(start.elapsed().as_millis());
    ctx.out.write_metadata(&metadata)?;
    Ok(())
}

fn cmd_spectrum(cli: &Cli) -> Result<(), Failure> {
    let ctx = Context::new(cli)?;
    let start = Instant::now();
    ctx.cap(ctx.config.system.n, CAP_SINGLE_POINT_N, "system.n")?;
    let algebra = ctx.algebra()?;
    let params = ctx.params()?;
    let u = build_floquet(&params, &algebra, ctx.drive_mode())?;

    let mut phase_rows = Vec::new();
    let mut summary_rows = Vec::new();
    let mut dos_rows = Vec::new();
    for &q in &ctx.config.analysis.qs {
        let spectrum = eigenphases(&u, q)?;
        for (i, phase) in spectrum.phases.iter().enumerate() {
            phase_rows.push(format!("{q},{i},{}", fmt_f64(*phase)));
        }
        let stats = spacing_ratio(&spectrum)?;
        let clustering = if q >= 2 {
            clustering_degeneracy(&eigenphases(&u, 1)?, q, ctx.config.analysis.clustering_tol)?
        } else {
            0.0
        };
        let hist = dos_histogram(&spectrum, ctx.config.analysis.dos_bins)?;
        summary_rows.push(format!(
            "{q},{},{},{},{},{}",
            fmt_f64(stats.rbar),
            fmt_f64(stats.rtilde),
            stats.clamped,
            fmt_f64(clustering),
            fmt_f64(hist.max_density()),
        ));
        for (k, d) in hist.density.iter().enumerate() {
            let center = 0.5 * (hist.bin_edges[k] + hist.bin_edges[k + 1]);
            dos_rows.push(format!("{q},{},{}", fmt_f64(center), fmt_f64(*d)));
        }
    }
    ctx.out
        .write_csv("eigenphases.csv", "q,index,phase", phase_rows)?;
    ctx.out.write_csv(
        "spectral_summary.csv",
        "q,rbar,rtilde,clamped,clustering_fraction,dos_max_density",
        summary_rows,
    )?;
    ctx.out
        .write_csv("dos.csv", "q,phase_bin_center,density", dos_rows)?;
    let metadata = ctx
        .metadata("spectrum")
        .field("qs", json!(ctx.config.analysis.qs))
        .finish(start.elapsed().as_millis());
    ctx.out.write_metadata(&metadata)?;
    Ok(())
}

fn cmd_rtilde(cli: &Cli) -> Result<(), Failure> {
    let ctx = Context::new(cli)?;
    let start = Instant::now();
    ctx.cap(ctx.config.system.n, CAP_SINGLE_POINT_N, "system.n")?;
    let grid = ctx.sweep_grid()?;
    let algebra = ctx.algebra()?;
    let p = ctx.config.model.p;

    let rows: Vec<String> = with_thread_pool(ctx.threads, || {
        let mut all = Vec::new();
        for &q in &ctx.config.analysis.qs {
            let sweep = spacing_ratio_sweep(&algebra, p, q, &grid, ExecMode::Parallel);
            all.extend(sweep.into_iter().map(|r| {
                format!(
                    "{},{},{},{},{},{}",
                    r.q,
                    fmt_f64(r.lambda),
                    fmt_f64(r.alpha),
                    fmt_f64(r.rbar),
                    fmt_f64(r.rtilde),
                    fmt_error(&r.error)
                )
            }));
        }
        all
    });
    ctx.out
        .write_csv("rtilde.csv", "q,lambda,alpha,rbar,rtilde,error", rows)?;
    let metadata = ctx
        .metadata("rtilde")
        .field("qs", json!(ctx.config.analysis.qs))
        .field("grid_cells", json!(grid.cell_count()))
        .finish(start.elapsed().as_millis());
    ctx.out.write_metadata(&metadata)?;
    Ok(())
}

fn cmd_otoc(cli: &Cli) -> Result<(), Failure> {
    let ctx = Context::new(cli)?;
    let start = Instant::now();
    let analysis = &ctx.config.analysis;
    let t_max = ctx.config.dynamics.t_max;
    if ctx.config.sweep.is_some() {
        ctx.cap(ctx.config.system.n, CAP_OTOC_SWEEP_N, "system.n (OTOC sweep)")?;
        let grid = ctx.sweep_grid()?;
        let algebra = ctx.algebra()?;
        let rows: Vec<String> = with_thread_pool(ctx.threads, || {
            otoc_sweep(
                &algebra,
                ctx.config.model.p,
                &grid,
                t_max,
                analysis.otoc_burn_in,
                analysis.otoc_threshold,
                ExecMode::Parallel,
            )
            .into_iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{}",
                    fmt_f64(r.lambda),
                    fmt_f64(r.alpha),
                    fmt_f64(r.f_inf),
                    fmt_f64(r.f_inf_stderr),
                    u8::from(r.above_threshold),
                    fmt_error(&r.error)
                )
            })
            .collect()
        });
        ctx.out.write_csv(
            "otoc.csv",
            "lambda,alpha,f_inf,f_inf_stderr,threshold_flag,error",
            rows,
        )?;
        let metadata = ctx
            .metadata("otoc")
            .field("t_max", json!(t_max))
            .field("grid_cells", json!(grid.cell_count()))
            .finish(start.elapsed().as_millis());
        ctx.out.write_metadata(&metadata)?;
    } else {
        ctx.cap(ctx.config.system.n, CAP_SINGLE_POINT_N, "system.n")?;
        let algebra = ctx.algebra()?;
        let params = ctx.params()?;
        let u = build_floquet(&params, &algebra, ctx.drive_mode())?;
        let w = sz_over_s(&algebra);
        let rho = DensityOperator::infinite_temperature(algebra.dim());
        let series = otoc_series(&u, &w, &w, &rho, t_max, ("Z", "Z", "inf-T"))?;
        let stats = long_time_stats(&series, analysis.otoc_burn_in)?;
        ctx.out.write_csv(
            "otoc_series.csv",
            "step,value",
            series
                .values
                .iter()
                .enumerate()
                .map(|(l, v)| format!("{l},{}", fmt_f64(*v))),
        )?;
        ctx.out.write_csv(
            "otoc_summary.csv",
            "lambda,alpha,f_inf,f_inf_stderr,threshold_flag",
            [format!(
                "{},{},{},{},{}",
                fmt_f64(params.lambda),
                fmt_f64(params.alpha()),
                fmt_f64(stats.mean),
                fmt_f64(stats.std_error),
                u8::from(stats.mean.abs() > analysis.otoc_threshold)
            )],
        )?;
        let metadata = ctx
            .metadata("otoc")
            .field("t_max", json!(t_max))
            .field("max_imag_residual", json!(series.max_imag_residual))
            .finish(start.elapsed().as_millis());
        ctx.out.write_metadata(&metadata)?;
    }
    Ok(())
}

fn cmd_classical_point(cli: &Cli) -> Result<(), Failure> {
    let ctx = Context::new(cli)?;
    let start = Instant::now();
    let params = ctx.params()?;
    let classical = &ctx.config.classical;
    let sphere = SphereGrid::fibonacci(classical.sphere_points);
    let series = with_thread_pool(ctx.threads, || {
        averaged_correlation(
            &sphere,
            params.alpha(),
            params.lambda,
            params.p,
            classical.t_max,
            ExecMode::Parallel,
        )
    })?;
    let spec = analyzed_spectrum(&series, &ctx.config.analysis)?;
    let mut g_rows = Vec::new();
    for &q in &ctx.config.analysis.qs {
        let cell = g_measure_from_series(&series, params.alpha(), params.lambda, q)?;
        g_rows.push(format!(
            "{},{},{q},{},{}",
            fmt_f64(cell.lambda),
            fmt_f64(cell.alpha),
            fmt_f64(cell.weight),
            fmt_f64(cell.omega_star)
        ));
    }
    ctx.out.write_csv(
        "classical_correlation.csv",
        "step,value",
        series_rows(&series),
    )?;
    ctx.out.write_csv(
        "classical_spectrum.csv",
        "omega,power",
        spectrum_rows(&spec),
    )?;
    ctx.out
        .write_csv("classical_g.csv", "lambda,alpha,q,g_raw,omega_star", g_rows)?;
    let metadata = ctx
        .metadata("classical-sweep")
        .field("sphere_points", json!(classical.sphere_points))
        .field("t_max", json!(classical.t_max))
        .field("g_normalized", json!(false))
        .finish(start.elapsed().as_millis());
    ctx.out.write_metadata(&metadata)?;
    Ok(())
}

fn cmd_phase_diagram(cli: &Cli) -> Result<(), Failure> {
    let ctx = Context::new(cli)?;
    let start = Instant::now();
    let grid = ctx.sweep_grid()?;
    let classical = &ctx.config.classical;
    let sphere = SphereGrid::fibonacci(classical.sphere_points);
    let rows: Vec<String> = with_thread_pool(ctx.threads, || {
        g_measure_sweep(
            ctx.config.model.p,
            &ctx.config.analysis.qs,
            &grid,
            &sphere,
            classical.t_max,
            ExecMode::Parallel,
        )
        .into_iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{}",
                fmt_f64(r.lambda),
                fmt_f64(r.alpha),
                r.q,
                fmt_f64(r.g),
                fmt_f64(r.omega_star),
                fmt_error(&r.error)
            )
        })
        .collect()
    });
    ctx.out.write_csv(
        "phase_diagram.csv",
        "lambda,alpha,q,g,omega_star,error",
        rows,
    )?;
    let metadata = ctx
        .metadata("phase-diagram")
        .field("sphere_points", json!(classical.sphere_points))
        .field("t_max", json!(classical.t_max))
        .field("grid_cells", json!(grid.cell_count()))
        .field("g_normalized", json!(true))
        .finish(start.elapsed().as_millis());
    ctx.out.write_metadata(&metadata)?;
    Ok(())
}

fn cmd_critical_points(cli: &Cli, p_flag: Option<u32>) -> Result<(), Failure> {
    let start = Instant::now();
    // Works without a config when --p is given.
    let (p, out, seed, threads) = if let Some(p) = p_flag {
        let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        (
            p,
            OutputDir::new(dir, cli.force)?,
            cli.seed.unwrap_or(0),
            cli.threads,
        )
    } else {
        let ctx = Context::new(cli)?;
        (ctx.config.model.p, ctx.out, ctx.seed, ctx.threads)
    };
    if p < 2 {
        return Err(Failure::Config("critical points need p >= 2".into()));
    }
    let (z_spino, w_spino) = spinodal_point(p);
    let (z_gs, w_gs) = gs_critical_point(p);
    let (z_dqpt, w_dqpt, estimate) = if p >= 3 {
        let point = dqpt_point(p)?;
        (point.z, point.w, point.estimate)
    } else {
        (f64::NAN, f64::NAN, None)
    };
    out.write_csv(
        "critical_points.csv",
        "p,z_spino,w_spino,z_gs,w_gs,z_dqpt,w_dqpt",
        [format!(
            "{p},{},{},{},{},{},{}",
            fmt_f64(z_spino),
            fmt_f64(w_spino),
            fmt_f64(z_gs),
            fmt_f64(w_gs),
            fmt_f64(z_dqpt),
            fmt_f64(w_dqpt)
        )],
    )?;
    let mut metadata = MetadataBuilder::new("critical-points", seed, threads).field("p", json!(p));
    if let Some(est) = estimate {
        metadata = metadata.field(
            "dqpt_estimate",
            json!({"z": est.z, "w": est.w, "deviation": est.deviation}),
        );
    }
    out.write_metadata(&metadata.finish(start.elapsed().as_millis()))?;
    Ok(())
}

fn cmd_resonance_check(cli: &Cli) -> Result<(), Failure> {
    let ctx = Context::new(cli)?;
    let start = Instant::now();
    ctx.cap(ctx.config.system.n, CAP_SINGLE_POINT_N, "system.n")?;
    let algebra = ctx.algebra()?;
    let m = &ctx.config.model;
    let mut rows = Vec::new();
    let mut chosen = Vec::new();
    for &q in &ctx.config.analysis.qs {
        let report = validate_effective_spectrum(q, m.p, m.lambda, m.h, &algebra)?;
        chosen.push(json!({"q": q, "sign": report.chosen.label()}));
        rows.push(format!(
            "{q},{},{},{},{},{},{},{},{}",
            m.p,
            fmt_f64(m.lambda),
            fmt_f64(m.h),
            fmt_f64(report.mismatch_minus),
            fmt_f64(report.mismatch_plus),
            report.chosen.label(),
            fmt_f64(report.mismatch_half_lambda),
            fmt_f64(report.scaling_exponent)
        ));
    }
    ctx.out.write_csv(
        "resonance_check.csv",
        "q,p,lambda,h,mismatch_minus,mismatch_plus,chosen_sign,mismatch_half_lambda,scaling_exponent",
        rows,
    )?;
    let metadata = ctx
        .metadata("resonance-check")
        .field("effective_sign", json!(chosen))
        .finish(start.elapsed().as_millis());
    ctx.out.write_metadata(&metadata)?;
    Ok(())
}

fn cmd_switch(cli: &Cli) -> Result<(), Failure> {
    let ctx = Context::new(cli)?;
    let start = Instant::now();
    ctx.cap(ctx.config.system.n, CAP_SINGLE_POINT_N, "system.n")?;
    let switching = ctx
        .config
        .switching
        .as_ref()
        .ok_or_else(|| Failure::Config("switch needs a [switching] section".into()))?;
    let algebra = ctx.algebra()?;
    let params = ctx.params()?;
    let schedule: Vec<SwitchSegment> = switching
        .segments
        .iter()
        .map(|(angle, steps)| SwitchSegment {
            alpha_b: angle.radians(),
            steps: *steps,
        })
        .collect();
    let record = run_switching_protocol(
        &algebra,
        &params,
        &schedule,
        &ctx.initial_state(&algebra),
        &sz_over_s(&algebra),
        "f_Z",
    )?;
    let combined = analyzed_spectrum(&record.series, &ctx.config.analysis)?;
    let mut segment_rows = Vec::new();
    for i in 0..record.segment_count() {
        let seg_series = TimeSeries::new(format!("segment {i}"), record.segment_values(i).to_vec());
        let spec = analyzed_spectrum(&seg_series, &ctx.config.analysis)?;
        for (omega, power) in spec.folded_bins() {
            segment_rows.push(format!("{i},{},{}", fmt_f64(omega), fmt_f64(power)));
        }
    }
    ctx.out.write_csv(
        "switch_series.csv",
        "step,value",
        series_rows(&record.series),
    )?;
    ctx.out.write_csv(
        "switch_spectrum.csv",
        "omega,power",
        spectrum_rows(&combined),
    )?;
    ctx.out.write_csv(
        "switch_segment_spectra.csv",
        "segment,omega,power",
        segment_rows,
    )?;
    let metadata = ctx
        .metadata("switch")
        .field("segment_starts", json!(record.segment_starts))
        .field(
            "schedule",
            json!(schedule
                .iter()
                .map(|s| json!({"alpha_b": s.alpha_b, "steps": s.steps}))
                .collect::<Vec<_>>()),
        )
        .field("final_norm", json!(record.final_norm))
        .field("renormalizations", json!(record.series.renormalizations))
        .finish(start.elapsed().as_millis());
    ctx.out.write_metadata(&metadata)?;
    Ok(())
}
