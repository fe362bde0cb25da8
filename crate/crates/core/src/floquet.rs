//! Kicked p-spin Hamiltonians, one-period Floquet unitaries, and
//! stroboscopic evolution.
//!
//! Two equivalent-at-small-coupling forms of the one-period operator are
//! provided. The exact-drive form applies the full undriven Hamiltonian
//! between kicks,
//!
//! ```text
//! U = exp(i alpha_B Sx) exp(-i H_p(h)),   H_p = -h Sx - Lambda/(p S^(p-1)) Sz^p
//! ```
//!
//! while the kicked form folds the field into a modified precession angle
//! `alpha(h) = alpha_B + h`,
//!
//! ```text
//! U = exp(i alpha(h) Sx) exp(i Lambda/(p S^(p-1)) Sz^p).
//! ```
//!
//! The `Sz^p` exponential is diagonal and exact; the `Sx` exponential reuses
//! the one-time `Sx` eigendecomposition cached on the [`SpinAlgebra`], since
//! sweeps rebuild the unitary for thousands of angles.

use std::sync::OnceLock;

use ndarray::{Array1, Array2};
use ndarray_linalg::Eig;
use num_complex::Complex64 as C64;

use crate::algebra::{expectation, exp_i_hermitian, SpinAlgebra, StateVector};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Model parameters of the driven p-spin system. The drive period is fixed
/// to `T = 1` throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub p: u32,
    pub lambda: f64,
    pub h: f64,
    pub alpha_b: f64,
}

impl ModelParams {
    pub fn new(p: u32, lambda: f64, h: f64, alpha_b: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParameter(format!(
                "interaction order p must be >= 2, got {p}"
            )));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "interaction strength must be finite and >= 0, got {lambda}"
            )));
        }
        if !h.is_finite() || !alpha_b.is_finite() {
            return Err(Error::InvalidParameter(
                "field strength and kick angle must be finite".into(),
            ));
        }
        Ok(Self {
            p,
            lambda,
            h,
            alpha_b,
        })
    }

    /// Effective kick angle `alpha(h) = alpha_B + h`.
    pub fn alpha(&self) -> f64 {
        self.alpha_b + self.h
    }

    /// Interaction prefactor `Lambda / (p S^(p-1))`.
    pub fn twist_coefficient(&self, spin: f64) -> f64 {
        self.lambda / (self.p as f64 * spin.powi(self.p as i32 - 1))
    }
}

/// Which form of the one-period unitary to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveMode {
    /// `exp(i alpha_B Sx) exp(-i H_p(h))`
    ExactDrive,
    /// `exp(i alpha(h) Sx) exp(i Lambda/(p S^(p-1)) Sz^p)` (the default in
    /// parameter sweeps, which scan `alpha(h)`).
    Kicked,
}

/// Undriven p-spin Hamiltonian `H_p = -h Sx - Lambda/(p S^(p-1)) Sz^p`.
pub fn build_pspin_hamiltonian(params: &ModelParams, algebra: &SpinAlgebra) -> Array2<C64> {
    let k = params.twist_coefficient(algebra.spin());
    let mut h = algebra.sx().mapv(|z| z * C64::new(-params.h, 0.0));
    for i in 0..algebra.dim() {
        let m = algebra.m_value(i);
        h[[i, i]] -= C64::new(k * m.powi(params.p as i32), 0.0);
    }
    h
}

/// One-period Floquet unitary with a lazily computed eigendecomposition.
#[derive(Debug)]
pub struct FloquetOperator {
    pub matrix: Array2<C64>,
    pub params: ModelParams,
    pub mode: DriveMode,
    eigensystem: OnceLock<std::result::Result<EigenSystem, String>>,
}

/// Eigenvectors (columns) and eigenphases of a unitary, in solver order.
/// Phases live in `(-pi, pi]`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub phases: Vec<f64>,
    pub vectors: Array2<C64>,
}

impl FloquetOperator {
    pub fn from_matrix(matrix: Array2<C64>, params: ModelParams, mode: DriveMode) -> Self {
        Self {
            matrix,
            params,
            mode,
            eigensystem: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Diagonalize once and cache. Failures are reported, not swallowed.
    pub fn eigensystem(&self) -> Result<&EigenSystem> {
        self.eigensystem
            .get_or_init(|| {
                self.matrix
                    .eig()
                    .map(|(values, vectors)| EigenSystem {
                        phases: values.iter().map(|z| wrap_phase(z.arg())).collect(),
                        vectors,
                    })
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| Error::Eigensolver(e.clone()))
    }
}

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * std::f64::consts::PI);
    if r > std::f64::consts::PI {
        r - 2.0 * std::f64::consts::PI
    } else {
        r
    }
}

/// Build the one-period unitary for the given parameters.
pub fn build_floquet(
    params: &ModelParams,
    algebra: &SpinAlgebra,
    mode: DriveMode,
) -> Result<FloquetOperator> {
    let matrix = match mode {
        DriveMode::Kicked => {
            let twist = diagonal_twist(params, algebra);
            let rot = algebra.x_rotation(params.alpha());
            scale_columns(&rot, &twist)
        }
        DriveMode::ExactDrive => {
            let h_p = build_pspin_hamiltonian(params, algebra);
            let interaction = exp_i_hermitian(&h_p, -1.0)?;
            algebra.x_rotation(params.alpha_b).dot(&interaction)
        }
    };
    Ok(FloquetOperator::from_matrix(matrix, *params, mode))
}

/// Diagonal of `exp(i Lambda/(p S^(p-1)) Sz^p)`, exact elementwise.
fn diagonal_twist(params: &ModelParams, algebra: &SpinAlgebra) -> Array1<C64> {
    let k = params.twist_coefficient(algebra.spin());
    Array1::from_iter(
        (0..algebra.dim())
            .map(|i| C64::from_polar(1.0, k * algebra.m_value(i).powi(params.p as i32))),
    )
}

/// `A * diag(d)` without materializing the diagonal matrix.
fn scale_columns(a: &Array2<C64>, d: &Array1<C64>) -> Array2<C64> {
    let mut out = a.to_owned();
    for (j, mut col) in out.columns_mut().into_iter().enumerate() {
        let s = d[j];
        col.mapv_inplace(|z| z * s);
    }
    out
}

const NORM_DRIFT_LIMIT: f64 = 1e-8;

/// Stroboscopic evolution: apply `U` repeatedly and record `<O>` at
/// `l = 0..=steps`. The state is renormalized (and the event counted) only
/// if its norm drifts beyond 1e-8.
pub fn evolve(
    state: &StateVector,
    u: &FloquetOperator,
    steps: usize,
    observable: &Array2<C64>,
    label: impl Into<String>,
) -> Result<TimeSeries> {
    let mut s = state.clone();
    evolve_mut(&mut s, u, steps, observable, label)
}

/// Like [`evolve`], but advances the caller's state in place so a protocol
/// can continue from where the previous segment ended.
pub fn evolve_mut(
    state: &mut StateVector,
    u: &FloquetOperator,
    steps: usize,
    observable: &Array2<C64>,
    label: impl Into<String>,
) -> Result<TimeSeries> {
    if steps < 1 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    if u.dim() != state.dim() || observable.nrows() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: u.dim(),
        });
    }
    let mut values = Vec::with_capacity(steps + 1);
    let mut renormalizations = 0usize;
    values.push(expectation(state, observable)?);
    for _ in 0..steps {
        state.amplitudes = u.matrix.dot(&state.amplitudes);
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_DRIFT_LIMIT {
            state.amplitudes.mapv_inplace(|z| z / norm);
            renormalizations += 1;
        }
        values.push(expectation(state, observable)?);
    }
    let mut series = TimeSeries::new(label, values);
    series.renormalizations = renormalizations;
    Ok(series)
}

/// One leg of a switching protocol: drive with `alpha_b` for `steps` kicks.
#[derive(Debug, Clone, Copy)]
pub struct SwitchSegment {
    pub alpha_b: f64,
    pub steps: usize,
}

/// Output of a switching run: the concatenated stroboscopic record plus the
/// step index at which each segment starts.
#[derive(Debug, Clone)]
pub struct SwitchingRecord {
    pub series: TimeSeries,
    pub segment_starts: Vec<usize>,
    pub final_norm: f64,
}

impl SwitchingRecord {
    /// The slice of the record produced by segment `i`, including its
    /// starting sample.
    pub fn segment_values(&self, i: usize) -> &[f64] {
        let start = self.segment_starts[i];
        let end = self
            .segment_starts
            .get(i + 1)
            .copied()
            .unwrap_or(self.series.values.len() - 1);
        &self.series.values[start..=end]
    }

    pub fn segment_count(&self) -> usize {
        self.segment_starts.len()
    }
}

/// Evolve one state through consecutive Floquet operators, quenching the
/// kick angle between segments. The state is carried across boundaries
/// without re-preparation; the unitary is rebuilt per segment while the `Sx`
/// eigenbasis is reused from the algebra cache.
pub fn run_switching_protocol(
    algebra: &SpinAlgebra,
    base: &ModelParams,
    schedule: &[SwitchSegment],
    initial: &StateVector,
    observable: &Array2<C64>,
    label: impl Into<String>,
) -> Result<SwitchingRecord> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter(
            "switching schedule must have at least one segment".into(),
        ));
    }
    for seg in schedule {
        if seg.steps < 1 {
            return Err(Error::InvalidParameter(
                "segment durations must be >= 1".into(),
            ));
        }
        if !seg.alpha_b.is_finite() {
            return Err(Error::InvalidParameter(
                "segment angles must be finite".into(),
            ));
        }
    }
    let mut state = initial.clone();
    let mut values: Vec<f64> = Vec::new();
    let mut segment_starts = Vec::with_capacity(schedule.len());
    let mut renormalizations = 0usize;
    for (i, seg) in schedule.iter().enumerate() {
        let params = ModelParams::new(base.p, base.lambda, base.h, seg.alpha_b)?;
        let u = build_floquet(&params, algebra, DriveMode::Kicked)?;
        let part = evolve_mut(&mut state, &u, seg.steps, observable, "segment")?;
        renormalizations += part.renormalizations;
        if i == 0 {
            segment_starts.push(0);
            values.extend_from_slice(&part.values);
        } else {
            // The boundary sample is shared: the first value of this segment
            // is the last value of the previous one.
            segment_starts.push(values.len() - 1);
            values.extend_from_slice(&part.values[1..]);
        }
    }
    let mut series = TimeSeries::new(label, values);
    series.renormalizations = renormalizations;
    Ok(SwitchingRecord {
        series,
        segment_starts,
        final_norm: state.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{max_abs_diff, unitarity_residual};
    use ndarray::Array2;
    use std::f64::consts::PI;

    fn sz_over_s(algebra: &SpinAlgebra) -> Array2<C64> {
        algebra.sz().mapv(|z| z / C64::new(algebra.spin(), 0.0))
    }

    #[test]
    fn hamiltonian_special_cases() {
        let alg = SpinAlgebra::new(2).unwrap();
        let zero = build_pspin_hamiltonian(&ModelParams::new(2, 0.0, 0.0, 0.0).unwrap(), &alg);
        assert!(zero.iter().all(|z| z.norm() < 1e-15));

        // p=2, h=0, Lambda=1, N=2 (S=1): -Sz^2/2.
        let h = build_pspin_hamiltonian(&ModelParams::new(2, 1.0, 0.0, 0.0).unwrap(), &alg);
        for (i, want) in [-0.5, 0.0, -0.5].iter().enumerate() {
            assert!((h[[i, i]].re - want).abs() < 1e-15);
        }
    }

    #[test]
    fn hamiltonian_spectrum_cross_check() {
        use ndarray_linalg::{Eigh, UPLO};
        let alg = SpinAlgebra::new(64).unwrap();
        let params = ModelParams::new(4, 0.7, 0.1, 0.0).unwrap();
        let h = build_pspin_hamiltonian(&params, &alg);
        let (direct, _) = h.eigh(UPLO::Lower).unwrap();
        // Independent route: diagonalize through the general complex solver.
        let (general, _) = h.eig().unwrap();
        let mut general: Vec<f64> = general.iter().map(|z| z.re).collect();
        general.sort_by(f64::total_cmp);
        for (a, b) in direct.iter().zip(general.iter()) {
            assert!((a - b).abs() < 1e-9 * alg.spin());
        }
    }

    #[test]
    fn rejects_p_below_two() {
        assert!(ModelParams::new(1, 0.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn kicked_with_zero_coupling_is_pure_rotation() {
        let alg = SpinAlgebra::new(16).unwrap();
        let params = ModelParams::new(2, 0.0, 0.0, 0.9).unwrap();
        let u = build_floquet(&params, &alg, DriveMode::Kicked).unwrap();
        let rot = exp_i_hermitian(alg.sx(), 0.9).unwrap();
        assert!(max_abs_diff(&u.matrix, &rot) < 1e-11);
    }

    #[test]
    fn zero_angle_kick_is_diagonal() {
        let alg = SpinAlgebra::new(8).unwrap();
        let params = ModelParams::new(3, 1.3, 0.0, 0.0).unwrap();
        let u = build_floquet(&params, &alg, DriveMode::Kicked).unwrap();
        let k = params.twist_coefficient(alg.spin());
        for i in 0..alg.dim() {
            for j in 0..alg.dim() {
                let want = if i == j {
                    C64::from_polar(1.0, k * alg.m_value(i).powi(3))
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!((u.matrix[[i, j]] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_drive_equals_kicked_at_zero_field() {
        let alg = SpinAlgebra::new(24).unwrap();
        let params = ModelParams::new(2, 0.8, 0.0, 2.0 * PI / 3.0).unwrap();
        let exact = build_floquet(&params, &alg, DriveMode::ExactDrive).unwrap();
        let kicked = build_floquet(&params, &alg, DriveMode::Kicked).unwrap();
        assert!(max_abs_diff(&exact.matrix, &kicked.matrix) < 1e-12);
    }

    #[test]
    fn floquet_is_unitary() {
        let alg = SpinAlgebra::new(32).unwrap();
        for (p, lambda, h, alpha) in [(2, 0.7, 0.1, PI), (4, 2.0, -0.05, PI / 2.0)] {
            let params = ModelParams::new(p, lambda, h, alpha).unwrap();
            for mode in [DriveMode::Kicked, DriveMode::ExactDrive] {
                let u = build_floquet(&params, &alg, mode).unwrap();
                assert!(unitarity_residual(&u.matrix) < 1e-10);
            }
        }
    }

    #[test]
    fn free_rotation_gives_cosine_response() {
        let alg = SpinAlgebra::new(12).unwrap();
        let alpha = 0.77;
        let params = ModelParams::new(2, 0.0, 0.0, alpha).unwrap();
        let u = build_floquet(&params, &alg, DriveMode::Kicked).unwrap();
        let top = alg.dicke_state(0).unwrap();
        let series = evolve(&top, &u, 64, &sz_over_s(&alg), "f_Z").unwrap();
        for (l, v) in series.values.iter().enumerate() {
            assert!(
                (v - (alpha * l as f64).cos()).abs() < 1e-10,
                "step {l}: {v} vs {}",
                (alpha * l as f64).cos()
            );
        }
    }

    #[test]
    fn diagonal_kick_conserves_sz() {
        let alg = SpinAlgebra::new(10).unwrap();
        let params = ModelParams::new(2, 1.9, 0.0, 0.0).unwrap();
        let u = build_floquet(&params, &alg, DriveMode::Kicked).unwrap();
        let state = alg.coherent_state(1.0, 0.3);
        let series = evolve(&state, &u, 50, &sz_over_s(&alg), "f_Z").unwrap();
        let first = series.values[0];
        for v in &series.values {
            assert!((v - first).abs() < 1e-12);
        }
    }

    #[test]
    fn single_segment_schedule_equals_plain_evolve() {
        let alg = SpinAlgebra::new(16).unwrap();
        let params = ModelParams::new(2, 0.7, 0.1, PI).unwrap();
        let obs = sz_over_s(&alg);
        let init = alg.coherent_state(PI / 5.0, 0.0);
        let u = build_floquet(&params, &alg, DriveMode::Kicked).unwrap();
        let direct = evolve(&init, &u, 40, &obs, "f_Z").unwrap();
        let record = run_switching_protocol(
            &alg,
            &params,
            &[SwitchSegment {
                alpha_b: PI,
                steps: 40,
            }],
            &init,
            &obs,
            "f_Z",
        )
        .unwrap();
        assert_eq!(record.series.values.len(), direct.values.len());
        for (a, b) in record.series.values.iter().zip(direct.values.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((record.final_norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn switching_carries_state_across_boundaries() {
        let alg = SpinAlgebra::new(12).unwrap();
        let params = ModelParams::new(4, 0.7, 0.02, PI).unwrap();
        let obs = sz_over_s(&alg);
        let init = alg.dicke_state(0).unwrap();
        let record = run_switching_protocol(
            &alg,
            &params,
            &[
                SwitchSegment {
                    alpha_b: PI,
                    steps: 12,
                },
                SwitchSegment {
                    alpha_b: PI / 2.0,
                    steps: 12,
                },
            ],
            &init,
            &obs,
            "f_Z",
        )
        .unwrap();
        // 12 + 12 kicks plus the initial sample, boundary sample shared.
        assert_eq!(record.series.values.len(), 25);
        assert_eq!(record.segment_starts, vec![0, 12]);
        assert_eq!(record.segment_values(0).len(), 13);
        assert_eq!(record.segment_values(1).len(), 13);
        assert!((record.final_norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn switching_rejects_bad_schedules() {
        let alg = SpinAlgebra::new(4).unwrap();
        let params = ModelParams::new(2, 0.5, 0.0, PI).unwrap();
        let obs = sz_over_s(&alg);
        let init = alg.dicke_state(0).unwrap();
        assert!(run_switching_protocol(&alg, &params, &[], &init, &obs, "x").is_err());
        let zero_len = [SwitchSegment {
            alpha_b: PI,
            steps: 0,
        }];
        assert!(run_switching_protocol(&alg, &params, &zero_len, &init, &obs, "x").is_err());
    }
}
