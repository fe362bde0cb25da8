//! Exact mean-field (thermodynamic-limit) dynamics of the driven p-spin
//! system: the continuous flow of the undriven model, the stroboscopic
//! area-preserving map of the kicked model, linear stability of the polar
//! fixed points, phase-space-averaged correlations, and the subharmonic
//! weight used to chart phase diagrams.
//!
//! The normalized mean spin `(X, Y, Z)` lives on the unit sphere. One kick
//! period is a twist about z by the state-dependent angle
//! `Lambda * Z^(p-1)` followed by a rigid rotation about x by `alpha(h)`:
//!
//! ```text
//! X' = cos(Lambda Z^(p-1)) X - sin(Lambda Z^(p-1)) Y
//! Y' = [sin(Lambda Z^(p-1)) X + cos(Lambda Z^(p-1)) Y] cos(alpha) - sin(alpha) Z
//! Z' = [sin(Lambda Z^(p-1)) X + cos(Lambda Z^(p-1)) Y] sin(alpha) + cos(alpha) Z
//! ```
//!
//! a composition of exact rotations, so the unit norm is preserved
//! identically and the map is area-preserving.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::series::{power_spectrum, TimeSeries};

/// Unit vector on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ClassicalState {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm2 = x * x + y * y + z * z;
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "classical state must be unit norm, |s|^2 = {norm2}"
            )));
        }
        Ok(Self { x, y, z })
    }

    /// Bloch angles matching the coherent-state convention:
    /// `(sin t cos f, sin t sin f, cos t)`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self {
            x: theta.sin() * phi.cos(),
            y: theta.sin() * phi.sin(),
            z: theta.cos(),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn renormalized(&self) -> Self {
        let n = self.norm();
        Self {
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        }
    }

    /// Azimuth `atan2(Y, X)`, the angle entering the semiclassical energy.
    pub fn azimuth(&self) -> f64 {
        self.y.atan2(self.x)
    }
}

/// One application of the kicked-map equations.
pub fn map_step(s: ClassicalState, alpha: f64, lambda: f64, p: u32) -> ClassicalState {
    let twist = lambda * s.z.powi(p as i32 - 1);
    let (st, ct) = twist.sin_cos();
    let x1 = ct * s.x - st * s.y;
    let y1 = st * s.x + ct * s.y;
    let (sa, ca) = alpha.sin_cos();
    ClassicalState {
        x: x1,
        y: y1 * ca - sa * s.z,
        z: y1 * sa + ca * s.z,
    }
}

/// Rigid half-turn about x, the symmetry inherited by even-p models.
pub fn x_half_turn(s: ClassicalState) -> ClassicalState {
    ClassicalState {
        x: s.x,
        y: -s.y,
        z: -s.z,
    }
}

/// Trajectory of the continuous mean-field flow.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub states: Vec<ClassicalState>,
    pub dt: f64,
    /// Worst deviation from the unit sphere seen before renormalization.
    pub max_drift: f64,
}

fn flow_derivative(s: &ClassicalState, h: f64, lambda: f64, p: u32) -> (f64, f64, f64) {
    let zp = lambda * s.z.powi(p as i32 - 1);
    (zp * s.y, h * s.z - zp * s.x, -h * s.y)
}

/// Fixed-step RK4 integration of the undriven flow, renormalizing to the
/// sphere after every step and recording the largest drift.
pub fn integrate_flow(
    start: ClassicalState,
    h: f64,
    lambda: f64,
    p: u32,
    dt: f64,
    steps: usize,
) -> Result<FlowTrajectory> {
    if dt <= 0.0 {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    let mut states = Vec::with_capacity(steps + 1);
    let mut s = start;
    let mut max_drift = 0.0f64;
    states.push(s);
    for _ in 0..steps {
        let k1 = flow_derivative(&s, h, lambda, p);
        let mid1 = offset(&s, &k1, dt / 2.0);
        let k2 = flow_derivative(&mid1, h, lambda, p);
        let mid2 = offset(&s, &k2, dt / 2.0);
        let k3 = flow_derivative(&mid2, h, lambda, p);
        let end = offset(&s, &k3, dt);
        let k4 = flow_derivative(&end, h, lambda, p);
        s = ClassicalState {
            x: s.x + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            y: s.y + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
            z: s.z + dt / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2),
        };
        max_drift = max_drift.max((s.norm() - 1.0).abs());
        s = s.renormalized();
        states.push(s);
    }
    Ok(FlowTrajectory {
        states,
        dt,
        max_drift,
    })
}

fn offset(s: &ClassicalState, k: &(f64, f64, f64), w: f64) -> ClassicalState {
    ClassicalState {
        x: s.x + w * k.0,
        y: s.y + w * k.1,
        z: s.z + w * k.2,
    }
}

/// Analytic tangent map of [`map_step`] at a polar fixed point
/// `X = pole_sign`, in local `(Y, Z)` coordinates. Only `p = 2` keeps a
/// linear trace of the twist; for `p > 2` the kick is higher order in the
/// distance to the pole and the tangent map is the bare x-rotation.
pub fn pole_tangent_matrix(alpha: f64, lambda: f64, p: u32, pole_sign: f64) -> [[f64; 2]; 2] {
    let (sa, ca) = alpha.sin_cos();
    let l = if p == 2 { pole_sign * lambda } else { 0.0 };
    // R(alpha) * [[1, l], [0, 1]]
    [[ca, ca * l - sa], [sa, sa * l + ca]]
}

/// Eigenvalues of the tangent map at the `X = +1` pole, largest magnitude
/// first. For `p = 2` they are `(t +- sqrt(t^2 - 4)) / 2` with
/// `t = 2 cos(alpha) + Lambda sin(alpha)`; for `p > 2` the pole is elliptic
/// with eigenvalues `exp(+-i alpha)`. The `X = -1` pole follows by
/// `Lambda -> -Lambda`.
pub fn tangent_eigenvalues_at_pole(alpha: f64, lambda: f64, p: u32) -> (C64, C64) {
    let m = pole_tangent_matrix(alpha, lambda, p, 1.0);
    let trace = m[0][0] + m[1][1];
    let disc = trace * trace - 4.0;
    if disc >= 0.0 {
        let root = disc.sqrt();
        let a = C64::new((trace + root) / 2.0, 0.0);
        let b = C64::new((trace - root) / 2.0, 0.0);
        if a.norm() >= b.norm() {
            (a, b)
        } else {
            (b, a)
        }
    } else {
        let root = (-disc).sqrt();
        let a = C64::new(trace / 2.0, root / 2.0);
        (a, a.conj())
    }
}

/// Discriminant `t^2 - 4` of the `p = 2` pole tangent map; the pole at
/// `X = +1` is hyperbolic where this is positive.
pub fn pole_discriminant_p2(alpha: f64, lambda: f64) -> f64 {
    let t = 2.0 * alpha.cos() + lambda * alpha.sin();
    t * t - 4.0
}

/// Kick angles at which a resonance condition coincides with a bifurcation
/// of the polar fixed points: `2pi/m` for `m = p, p-2, ...`, augmented with
/// the integer multiples below `pi` (odd-period bifurcations of even-p maps
/// are double, so their doubled angles count as well). Sorted ascending,
/// restricted to `(0, pi]`.
pub fn bifurcation_set(p: u32) -> Vec<f64> {
    assert!(p >= 2, "bifurcation set needs p >= 2");
    let mut base = Vec::new();
    let mut m = p as i64;
    while m >= 1 {
        base.push(2.0 * PI / m as f64);
        m -= 2;
    }
    let mut angles: Vec<f64> = Vec::new();
    for &a in &base {
        if a <= PI + 1e-12 {
            angles.push(a);
        }
        let mut r = 2.0;
        while r * a < PI - 1e-12 {
            angles.push(r * a);
            r += 1.0;
        }
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    angles
}

/// Closed-form boundary curves of the period-doubled phase for `p = 2`,
/// `alpha(Lambda) = pi +- arctan(4 Lambda / (4 - Lambda^2)) / 2`, evaluated
/// through the two-argument arctangent so the curve crosses `Lambda = 2`
/// continuously.
pub fn phase_boundary_p2(lambda: f64) -> (f64, f64) {
    let spread = 0.5 * (4.0 * lambda).atan2(4.0 - lambda * lambda);
    (PI - spread, PI + spread)
}

/// Angles at which the polar fixed points of the `p = 2` map switch between
/// elliptic and hyperbolic (zeros of the tangent-map discriminant flanking
/// `alpha = pi`). The phase-boundary curves of [`phase_boundary_p2`] open at
/// exactly half this window, time being counted in double steps there.
pub fn hyperbolicity_onset_p2(lambda: f64) -> (f64, f64) {
    let spread = (4.0 * lambda).atan2(4.0 - lambda * lambda);
    (PI - spread, PI + spread)
}

/// Heuristic chaos border `Lambda* = exp(p-1) / ((p-1) sin(alpha))`, the
/// coupling at which the strong-chaos Lyapunov estimate changes sign.
pub fn chaos_border(alpha: f64, p: u32) -> Result<f64> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(Error::InvalidParameter(format!(
            "chaos border needs 0 < alpha < pi, got alpha = {alpha}"
        )));
    }
    let s = alpha.sin();
    let pm1 = (p - 1) as f64;
    Ok(pm1.exp() / (pm1 * s))
}

/// Deterministic quasi-uniform covering of the sphere (Fibonacci lattice).
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub points: Vec<ClassicalState>,
}

impl SphereGrid {
    /// `count` points at `z_i = 1 - (2i+1)/count` and golden-angle azimuths.
    pub fn fibonacci(count: usize) -> Self {
        let golden = PI * (3.0 - 5.0f64.sqrt());
        let points = (0..count)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let t = golden * i as f64;
                ClassicalState {
                    x: r * t.cos(),
                    y: r * t.sin(),
                    z,
                }
            })
            .collect();
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Phase-space averaged correlation `C(l) = < Z_l Z_0 >` over the grid,
/// `l = 0..=t_max`.
///
/// Grid points are evolved in fixed-size chunks; the chunk partial sums are
/// then folded in index order, so the result does not depend on the thread
/// schedule.
pub fn averaged_correlation(
    grid: &SphereGrid,
    alpha: f64,
    lambda: f64,
    p: u32,
    t_max: usize,
    mode: ExecMode,
) -> Result<TimeSeries> {
    if t_max < 2 {
        return Err(Error::InvalidParameter("t_max must be >= 2".into()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sphere grid is empty".into()));
    }
    const CHUNK: usize = 256;
    let chunks = grid.points.len().div_ceil(CHUNK);
    let partials: Vec<Vec<f64>> = map_indexed(mode, chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(grid.points.len());
        let mut acc = vec![0.0f64; t_max + 1];
        for &start in &grid.points[lo..hi] {
            let z0 = start.z;
            let mut s = start;
            acc[0] += z0 * z0;
            for l in 1..=t_max {
                s = map_step(s, alpha, lambda, p);
                acc[l] += s.z * z0;
            }
        }
        acc
    });
    let mut values = vec![0.0f64; t_max + 1];
    for part in &partials {
        for (v, p) in values.iter_mut().zip(part.iter()) {
            *v += p;
        }
    }
    let count = grid.points.len() as f64;
    for v in &mut values {
        *v /= count;
    }
    Ok(TimeSeries::new("C_Z", values))
}

/// One cell of a mean-field phase diagram.
#[derive(Debug, Clone, Copy)]
pub struct PhaseDiagramCell {
    pub lambda: f64,
    pub alpha: f64,
    pub q: u32,
    /// Peak weight `|C_omega|^2` if the non-DC argmax sits within one DFT bin
    /// of `2pi/q`, zero otherwise. Unnormalized until a sweep driver divides
    /// by the sweep-wide maximum.
    pub weight: f64,
    pub omega_star: f64,
    pub normalized: bool,
}

/// Subharmonic weight of the averaged response at `omega = 2pi/q`.
pub fn g_measure(
    alpha: f64,
    lambda: f64,
    p: u32,
    q: u32,
    grid: &SphereGrid,
    t_max: usize,
    mode: ExecMode,
) -> Result<PhaseDiagramCell> {
    if q < 2 {
        return Err(Error::InvalidParameter("q must be >= 2".into()));
    }
    let series = averaged_correlation(grid, alpha, lambda, p, t_max, mode)?;
    Ok(g_measure_from_series(&series, alpha, lambda, q)?)
}

/// Evaluate the subharmonic test on an already computed correlation series,
/// letting one grid evolution serve several `q` values.
pub fn g_measure_from_series(
    series: &TimeSeries,
    alpha: f64,
    lambda: f64,
    q: u32,
) -> Result<PhaseDiagramCell> {
    if q < 2 {
        return Err(Error::InvalidParameter("q must be >= 2".into()));
    }
    let spec = power_spectrum(series, 0)?;
    let (omega_star, peak) = spec.dominant_frequency(true);
    let target = 2.0 * PI / q as f64;
    let weight = if (omega_star - target).abs() <= spec.bin_width() {
        peak
    } else {
        0.0
    };
    Ok(PhaseDiagramCell {
        lambda,
        alpha,
        q,
        weight,
        omega_star,
        normalized: false,
    })
}
