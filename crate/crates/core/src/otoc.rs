//! Out-of-time-order correlators at infinite temperature.
//!
//! `F(l) = Tr[rho W(l) V W(l) V]` with `W(l) = U^(-l) W U^l` evolved in the
//! Heisenberg picture one kick at a time. The long-time average of `F`
//! serves as the dynamical order parameter separating locked (time-crystal)
//! from unlocked response: it stays finite in the locked phase and averages
//! to zero outside it.
//!
//! Cost note: each step costs two dense matrix products for the Heisenberg
//! update plus the trace contraction, i.e. `O(T_max * (N+1)^3)` overall, so
//! production maps cap `N` around a few hundred.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::algebra::{adjoint, DensityOperator};
use crate::error::{Error, Result};
use crate::floquet::FloquetOperator;

/// OTOC record `F(l)`, `l = 0..=t_max`, together with the worst imaginary
/// residue seen while taking the (analytically real) traces.
#[derive(Debug, Clone)]
pub struct OtocSeries {
    pub values: Vec<f64>,
    pub max_imag_residual: f64,
    pub w_label: String,
    pub v_label: String,
    pub state_label: String,
}

impl OtocSeries {
    pub fn t_max(&self) -> usize {
        self.values.len() - 1
    }
}

/// Long-time average plus a batch-means error bar.
#[derive(Debug, Clone, Copy)]
pub struct LongTimeAverage {
    pub mean: f64,
    /// Standard error from 16 block means over the averaging window.
    pub std_error: f64,
    pub samples: usize,
}

/// Compute `F(l) = Tr[rho W(l) V W(l) V]` for `l = 0..=t_max` by iterating
/// the Heisenberg update `W(l+1) = U^dag W(l) U`.
pub fn otoc_series(
    u: &FloquetOperator,
    w: &Array2<C64>,
    v: &Array2<C64>,
    rho: &DensityOperator,
    t_max: usize,
    labels: (&str, &str, &str),
) -> Result<OtocSeries> {
    let dim = u.dim();
    if w.nrows() != dim || v.nrows() != dim || rho.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: w.nrows().max(v.nrows()).max(rho.dim()),
        });
    }
    if t_max < 1 {
        return Err(Error::InvalidParameter("t_max must be >= 1".into()));
    }
    let u_dag = adjoint(&u.matrix);
    let mut w_t = w.to_owned();
    let mut values = Vec::with_capacity(t_max + 1);
    let mut max_imag = 0.0f64;
    for l in 0..=t_max {
        if l > 0 {
            w_t = u_dag.dot(&w_t).dot(&u.matrix);
        }
        let f = otoc_trace(&w_t, v, rho);
        max_imag = max_imag.max(f.im.abs());
        values.push(f.re);
    }
    Ok(OtocSeries {
        values,
        max_imag_residual: max_imag,
        w_label: labels.0.into(),
        v_label: labels.1.into(),
        state_label: labels.2.into(),
    })
}

/// `Tr[rho (W V)^2]`; the identity-weight shortcut avoids one matrix product
/// for the infinite-temperature state.
fn otoc_trace(w_t: &Array2<C64>, v: &Array2<C64>, rho: &DensityOperator) -> C64 {
    let g = w_t.dot(v);
    match rho.identity_weight() {
        Some(weight) => trace_product(&g, &g) * C64::new(weight, 0.0),
        None => {
            let rg = rho.matrix.dot(&g);
            trace_product(&rg, &g)
        }
    }
}

/// `Tr[A B]` via the elementwise contraction `sum_ij A_ij B_ji`.
fn trace_product(a: &Array2<C64>, b: &Array2<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[[i, j]] * b[[j, i]];
        }
    }
    acc
}

/// Arithmetic mean of `F(l)` over `l in (burn_in, t_max]`.
pub fn long_time_average(series: &OtocSeries, burn_in: usize) -> Result<f64> {
    Ok(long_time_stats(series, burn_in)?.mean)
}

/// Mean and batch-means standard error over `l in (burn_in, t_max]`.
pub fn long_time_stats(series: &OtocSeries, burn_in: usize) -> Result<LongTimeAverage> {
    let t_max = series.t_max();
    if burn_in >= t_max {
        return Err(Error::InvalidParameter(format!(
            "burn_in {burn_in} must be below t_max {t_max}"
        )));
    }
    let window = &series.values[burn_in + 1..];
    let n = window.len();
    let mean = window.iter().sum::<f64>() / n as f64;

    let blocks = 16.min(n);
    let block_len = n / blocks;
    let mut block_means = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let start = b * block_len;
        let end = if b == blocks - 1 { n } else { start + block_len };
        let chunk = &window[start..end];
        block_means.push(chunk.iter().sum::<f64>() / chunk.len() as f64);
    }
    let bm = block_means.iter().sum::<f64>() / blocks as f64;
    let var = block_means
        .iter()
        .map(|x| (x - bm) * (x - bm))
        .sum::<f64>()
        / (blocks.saturating_sub(1).max(1)) as f64;
    Ok(LongTimeAverage {
        mean,
        std_error: (var / blocks as f64).sqrt(),
        samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::SpinAlgebra;
    use crate::floquet::{build_floquet, DriveMode, ModelParams};
    use std::f64::consts::PI;

    fn sz_over_s(algebra: &SpinAlgebra) -> Array2<C64> {
        algebra.sz().mapv(|z| z / C64::new(algebra.spin(), 0.0))
    }

    fn identity_floquet(dim: usize) -> FloquetOperator {
        FloquetOperator::from_matrix(
            Array2::<C64>::eye(dim),
            ModelParams::new(2, 0.0, 0.0, 0.0).unwrap(),
            DriveMode::Kicked,
        )
    }

    #[test]
    fn initial_value_for_spin_one() {
        // N=2 (S=1): F(0) = (1/3) sum_m m^4 over m in {-1,0,1} = 2/3.
        let alg = SpinAlgebra::new(2).unwrap();
        let w = sz_over_s(&alg);
        let rho = DensityOperator::infinite_temperature(3);
        let u = identity_floquet(3);
        let series = otoc_series(&u, &w, &w, &rho, 2, ("Z", "Z", "inf-T")).unwrap();
        assert!((series.values[0] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn identity_evolution_is_constant() {
        let alg = SpinAlgebra::new(6).unwrap();
        let w = sz_over_s(&alg);
        let rho = DensityOperator::infinite_temperature(alg.dim());
        let u = identity_floquet(alg.dim());
        let series = otoc_series(&u, &w, &w, &rho, 10, ("Z", "Z", "inf-T")).unwrap();
        for v in &series.values {
            assert!((v - series.values[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn pure_rotation_is_periodic() {
        // Lambda = 0 and alpha = 2pi/8: W(l) orbits with period 8.
        let alg = SpinAlgebra::new(8).unwrap();
        let params = ModelParams::new(2, 0.0, 0.0, 2.0 * PI / 8.0).unwrap();
        let u = build_floquet(&params, &alg, DriveMode::Kicked).unwrap();
        let w = sz_over_s(&alg);
        let rho = DensityOperator::infinite_temperature(alg.dim());
        let series = otoc_series(&u, &w, &w, &rho, 16, ("Z", "Z", "inf-T")).unwrap();
        for l in 0..=8 {
            assert!(
                (series.values[l] - series.values[l + 8]).abs() < 1e-12,
                "period-8 orbit broken at l={l}"
            );
        }
    }

    #[test]
    fn traces_stay_real() {
        let alg = SpinAlgebra::new(16).unwrap();
        let params = ModelParams::new(2, 0.7, 0.1, PI).unwrap();
        let u = build_floquet(&params, &alg, DriveMode::Kicked).unwrap();
        let w = sz_over_s(&alg);
        let rho = DensityOperator::infinite_temperature(alg.dim());
        let series = otoc_series(&u, &w, &w, &rho, 200, ("Z", "Z", "inf-T")).unwrap();
        assert!(
            series.max_imag_residual < 1e-9,
            "imaginary residue {}",
            series.max_imag_residual
        );
    }

    #[test]
    fn heisenberg_iteration_matches_matrix_power() {
        use crate::algebra::{matrix_power, max_abs_diff};
        let alg = SpinAlgebra::new(64).unwrap();
        let params = ModelParams::new(2, 0.7, 0.1, PI).unwrap();
        let u = build_floquet(&params, &alg, DriveMode::Kicked).unwrap();
        let w = sz_over_s(&alg);
        let u_dag = adjoint(&u.matrix);
        for l in [8u32, 16] {
            let mut iterated = w.clone();
            for _ in 0..l {
                iterated = u_dag.dot(&iterated).dot(&u.matrix);
            }
            let u_l = matrix_power(&u.matrix, l);
            let direct = adjoint(&u_l).dot(&w).dot(&u_l);
            assert!(
                max_abs_diff(&iterated, &direct) < 1e-8,
                "Heisenberg mismatch at l={l}"
            );
        }
    }

    #[test]
    fn commuting_limit_at_l_zero() {
        let alg = SpinAlgebra::new(12).unwrap();
        let w = sz_over_s(&alg);
        let rho = DensityOperator::infinite_temperature(alg.dim());
        let u = identity_floquet(alg.dim());
        let series = otoc_series(&u, &w, &w, &rho, 1, ("Z", "Z", "inf-T")).unwrap();
        // W(0) and V commute: F(0) = Tr[rho (WV)^2] = <(Sz/S)^4>.
        let s = alg.spin();
        let expect: f64 = (0..alg.dim())
            .map(|i| (alg.m_value(i) / s).powi(4))
            .sum::<f64>()
            / alg.dim() as f64;
        assert!((series.values[0] - expect).abs() < 1e-13);
    }

    #[test]
    fn average_examples() {
        let constant = OtocSeries {
            values: vec![0.4; 101],
            max_imag_residual: 0.0,
            w_label: "Z".into(),
            v_label: "Z".into(),
            state_label: "inf-T".into(),
        };
        assert!((long_time_average(&constant, 0).unwrap() - 0.4).abs() < 1e-15);

        // Alternating series over an even horizon averages to zero exactly
        // on l in (0, t_max].
        let alternating = OtocSeries {
            values: (0..=100).map(|l| (PI * l as f64).cos()).collect(),
            max_imag_residual: 0.0,
            w_label: "Z".into(),
            v_label: "Z".into(),
            state_label: "inf-T".into(),
        };
        assert!(long_time_average(&alternating, 0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn stats_reject_bad_burn_in() {
        let series = OtocSeries {
            values: vec![1.0; 10],
            max_imag_residual: 0.0,
            w_label: "Z".into(),
            v_label: "Z".into(),
            state_label: "inf-T".into(),
        };
        assert!(long_time_stats(&series, 9).is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let alg = SpinAlgebra::new(4).unwrap();
        let other = SpinAlgebra::new(6).unwrap();
        let u = identity_floquet(alg.dim());
        let rho = DensityOperator::infinite_temperature(alg.dim());
        let w = sz_over_s(&other);
        assert!(matches!(
            otoc_series(&u, &w, &w, &rho, 4, ("Z", "Z", "inf-T")),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
