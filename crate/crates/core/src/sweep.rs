//! Parameter sweeps over `(Lambda, alpha)` grids.
//!
//! Cells are independent work units: each one owns its matrices, failures
//! are recorded in place (NaN values plus an error string) without aborting
//! the sweep, and results are merged in row-major order (`Lambda` outer,
//! `alpha` inner) so reruns are byte-identical regardless of thread count.
//!
//! Sweeps drive the kicked form of the one-period unitary, whose physics
//! depends only on the effective angle `alpha(h)`; the alpha axis therefore
//! scans the effective angle directly.

use crate::algebra::{DensityOperator, SpinAlgebra};
use crate::classical::{g_measure_from_series, SphereGrid};
use crate::error::Result;
use crate::exec::{map_indexed, ExecMode};
use crate::floquet::{build_floquet, DriveMode, ModelParams};
use crate::otoc::{long_time_stats, otoc_series};
use crate::spectral::{eigenphases, spacing_ratio};

/// Inclusive linear axis; `count = 1` collapses to the left endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + i as f64 * step).collect()
    }
}

/// Rectangular `(Lambda, alpha)` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lambda: AxisSpec,
    pub alpha: AxisSpec,
}

impl GridSpec {
    pub fn cell_count(&self) -> usize {
        self.lambda.count * self.alpha.count
    }

    /// Cell coordinates in row-major order, `Lambda` outer.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        let lambdas = self.lambda.values();
        let alphas = self.alpha.values();
        let mut cells = Vec::with_capacity(lambdas.len() * alphas.len());
        for &l in &lambdas {
            for &a in &alphas {
                cells.push((l, a));
            }
        }
        cells
    }
}

/// Row of a spacing-ratio sweep.
#[derive(Debug, Clone)]
pub struct SpacingRow {
    pub q: u32,
    pub lambda: f64,
    pub alpha: f64,
    pub rbar: f64,
    pub rtilde: f64,
    pub error: Option<String>,
}

/// Row of an OTOC order-parameter sweep.
#[derive(Debug, Clone)]
pub struct OtocRow {
    pub lambda: f64,
    pub alpha: f64,
    pub f_inf: f64,
    pub f_inf_stderr: f64,
    pub above_threshold: bool,
    pub error: Option<String>,
}

/// Row of a mean-field subharmonic-weight sweep.
#[derive(Debug, Clone)]
pub struct GMeasureRow {
    pub lambda: f64,
    pub alpha: f64,
    pub q: u32,
    pub g: f64,
    pub omega_star: f64,
    pub error: Option<String>,
}

/// Normalized spacing ratio of the q-th Floquet power over the grid.
pub fn spacing_ratio_sweep(
    algebra: &SpinAlgebra,
    p: u32,
    q: u32,
    grid: &GridSpec,
    mode: ExecMode,
) -> Vec<SpacingRow> {
    let cells = grid.cells();
    map_indexed(mode, cells.len(), |idx| {
        let (lambda, alpha) = cells[idx];
        let run = || -> Result<(f64, f64)> {
            let params = ModelParams::new(p, lambda, 0.0, alpha)?;
            let u = build_floquet(&params, algebra, DriveMode::Kicked)?;
            let spectrum = eigenphases(&u, q)?;
            let stats = spacing_ratio(&spectrum)?;
            Ok((stats.rbar, stats.rtilde))
        };
        match run() {
            Ok((rbar, rtilde)) => SpacingRow {
                q,
                lambda,
                alpha,
                rbar,
                rtilde,
                error: None,
            },
            Err(e) => SpacingRow {
                q,
                lambda,
                alpha,
                rbar: f64::NAN,
                rtilde: f64::NAN,
                error: Some(e.to_string()),
            },
        }
    })
}

/// Long-time OTOC average (`W = V = Sz/S`, infinite-temperature state) over
/// the grid, thresholded into the binary order parameter.
pub fn otoc_sweep(
    algebra: &SpinAlgebra,
    p: u32,
    grid: &GridSpec,
    t_max: usize,
    burn_in: usize,
    threshold: f64,
    mode: ExecMode,
) -> Vec<OtocRow> {
    let cells = grid.cells();
    let w = algebra
        .sz()
        .mapv(|z| z / num_complex::Complex64::new(algebra.spin(), 0.0));
    let rho = DensityOperator::infinite_temperature(algebra.dim());
    map_indexed(mode, cells.len(), |idx| {
        let (lambda, alpha) = cells[idx];
        let run = || -> Result<(f64, f64)> {
            let params = ModelParams::new(p, lambda, 0.0, alpha)?;
            let u = build_floquet(&params, algebra, DriveMode::Kicked)?;
            let series = otoc_series(&u, &w, &w, &rho, t_max, ("Z", "Z", "inf-T"))?;
            let stats = long_time_stats(&series, burn_in)?;
            Ok((stats.mean, stats.std_error))
        };
        match run() {
            Ok((f_inf, stderr)) => OtocRow {
                lambda,
                alpha,
                f_inf,
                f_inf_stderr: stderr,
                above_threshold: f_inf.abs() > threshold,
                error: None,
            },
            Err(e) => OtocRow {
                lambda,
                alpha,
                f_inf: f64::NAN,
                f_inf_stderr: f64::NAN,
                above_threshold: false,
                error: Some(e.to_string()),
            },
        }
    })
}

/// Mean-field subharmonic weight over the grid, one correlation series per
/// cell shared by all `q` values, normalized by the sweep-wide maximum in a
/// second pass.
pub fn g_measure_sweep(
    p: u32,
    qs: &[u32],
    grid: &GridSpec,
    sphere: &SphereGrid,
    t_max: usize,
    mode: ExecMode,
) -> Vec<GMeasureRow> {
    let cells = grid.cells();
    let per_cell: Vec<Vec<GMeasureRow>> = map_indexed(mode, cells.len(), |idx| {
        let (lambda, alpha) = cells[idx];
        // The sweep parallelizes across cells, so each cell evolves its grid
        // sequentially.
        let series = crate::classical::averaged_correlation(
            sphere,
            alpha,
            lambda,
            p,
            t_max,
            ExecMode::Sequential,
        );
        match series {
            Ok(series) => qs
                .iter()
                .map(|&q| match g_measure_from_series(&series, alpha, lambda, q) {
                    Ok(cell) => GMeasureRow {
                        lambda,
                        alpha,
                        q,
                        g: cell.weight,
                        omega_star: cell.omega_star,
                        error: None,
                    },
                    Err(e) => error_row(lambda, alpha, q, e.to_string()),
                })
                .collect(),
            Err(e) => qs
                .iter()
                .map(|&q| error_row(lambda, alpha, q, e.to_string()))
                .collect(),
        }
    });
    let mut rows: Vec<GMeasureRow> = per_cell.into_iter().flatten().collect();
    let max = rows
        .iter()
        .filter(|r| r.error.is_none())
        .map(|r| r.g)
        .fold(0.0f64, f64::max);
    if max > 0.0 {
        for row in &mut rows {
            if row.error.is_none() {
                row.g /= max;
            }
        }
    }
    rows
}

fn error_row(lambda: f64, alpha: f64, q: u32, error: String) -> GMeasureRow {
    GMeasureRow {
        lambda,
        alpha,
        q,
        g: f64::NAN,
        omega_star: f64::NAN,
        error: Some(error),
    }
}
