//! Collective spin operators, states, and dense-matrix utilities in the
//! (N+1)-dimensional symmetric (Dicke) subspace.
//!
//! Basis order is fixed to `M = S, S-1, ..., -S`; all other modules rely on
//! it. Matrix exponentials of Hermitian generators go through an explicit
//! eigendecomposition, never a series expansion.

use std::sync::OnceLock;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Exact collective spin operators for `N` spin-1/2 particles, restricted to
/// the symmetric subspace spanned by the Dicke states `|S, M>` with `S = N/2`.
#[derive(Debug)]
pub struct SpinAlgebra {
    n: usize,
    spin: f64,
    sx: Array2<C64>,
    sy: Array2<C64>,
    sz: Array2<C64>,
    sx_basis: OnceLock<SxBasis>,
}

/// Cached eigendecomposition of `Sx`, reused for every x-rotation built from
/// the same algebra (the basis change is independent of the rotation angle).
#[derive(Debug, Clone)]
pub struct SxBasis {
    pub values: Array1<f64>,
    pub vectors: Array2<C64>,
}

/// Hermitian eigendecomposition with eigenvectors as honest columns, i.e.
/// `H = V diag(values) V^dag`.
///
/// LAPACK solves the row-major array as its transpose, so the eigenvectors
/// of a complex Hermitian matrix come back conjugated; undo that here once
/// so every caller can rely on the column convention (pinned by a test).
pub fn eigh_columns(h: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let standard = h.as_standard_layout();
    let (values, vectors) = standard.eigh(UPLO::Lower)?;
    Ok((values, vectors.mapv(|z| z.conj())))
}

impl SpinAlgebra {
    /// Build the spin operators from the ladder matrix elements
    /// `<S,M±1|S±|S,M> = sqrt(S(S+1) - M(M±1))`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "particle count N must be at least 1".into(),
            ));
        }
        let dim = n + 1;
        let spin = n as f64 / 2.0;
        let mut sx = Array2::<C64>::zeros((dim, dim));
        let mut sy = Array2::<C64>::zeros((dim, dim));
        let mut sz = Array2::<C64>::zeros((dim, dim));
        for i in 0..dim {
            sz[[i, i]] = C64::new(spin - i as f64, 0.0);
        }
        // S+ has entries on the superdiagonal in this basis order: it raises
        // M, and larger M sits at a smaller index.
        for i in 1..dim {
            let m = spin - i as f64;
            let c = (spin * (spin + 1.0) - m * (m + 1.0)).sqrt();
            sx[[i - 1, i]] += C64::new(c / 2.0, 0.0);
            sx[[i, i - 1]] += C64::new(c / 2.0, 0.0);
            sy[[i - 1, i]] += C64::new(0.0, -c / 2.0);
            sy[[i, i - 1]] += C64::new(0.0, c / 2.0);
        }
        Ok(Self {
            n,
            spin,
            sx,
            sy,
            sz,
            sx_basis: OnceLock::new(),
        })
    }

    pub fn particles(&self) -> usize {
        self.n
    }

    /// Total spin `S = N/2` (half-integer for odd `N`).
    pub fn spin(&self) -> f64 {
        self.spin
    }

    /// Hilbert-space dimension `N + 1`.
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn sx(&self) -> &Array2<C64> {
        &self.sx
    }

    pub fn sy(&self) -> &Array2<C64> {
        &self.sy
    }

    pub fn sz(&self) -> &Array2<C64> {
        &self.sz
    }

    /// `Sz` eigenvalue at basis index `i`, i.e. `M_i = S - i`.
    pub fn m_value(&self, i: usize) -> f64 {
        self.spin - i as f64
    }

    /// Eigendecomposition of `Sx`, computed on first use and cached.
    pub fn sx_basis(&self) -> &SxBasis {
        self.sx_basis.get_or_init(|| {
            let (values, vectors) =
                eigh_columns(&self.sx).expect("Sx is Hermitian by construction");
            SxBasis { values, vectors }
        })
    }

    /// Rotation `exp(i * angle * Sx)` from the cached `Sx` eigenbasis.
    pub fn x_rotation(&self, angle: f64) -> Array2<C64> {
        let basis = self.sx_basis();
        unitary_from_eigen(&basis.values, &basis.vectors, angle)
    }

    /// Spin coherent state `|theta, phi> = exp(-i phi Sz) exp(-i theta Sy) |S, S>`.
    ///
    /// Amplitudes are evaluated in log space so large `N` does not overflow
    /// the binomial weights.
    pub fn coherent_state(&self, theta: f64, phi: f64) -> StateVector {
        let dim = self.dim();
        let half = theta / 2.0;
        let (c, s) = (half.cos().abs(), half.sin().abs());
        // Signs of cos/sin enter through parity of the exponents; for theta
        // outside [0, pi] fold the sign into the amplitude.
        let c_sign: f64 = if half.cos() < 0.0 { -1.0 } else { 1.0 };
        let s_sign: f64 = if half.sin() < 0.0 { -1.0 } else { 1.0 };
        let ln_c = if c > 0.0 { c.ln() } else { f64::NEG_INFINITY };
        let ln_s = if s > 0.0 { s.ln() } else { f64::NEG_INFINITY };

        let mut amps = Array1::<C64>::zeros(dim);
        let mut ln_binom = 0.0; // ln C(N, 0)
        for i in 0..dim {
            if i > 0 {
                ln_binom += ((self.n - i + 1) as f64).ln() - (i as f64).ln();
            }
            // |c_i| = sqrt(C(N, i)) * cos^(N-i) * sin^i, with M_i = S - i.
            let e_cos = (self.n - i) as f64;
            let e_sin = i as f64;
            let mut ln_amp = 0.5 * ln_binom;
            ln_amp += if e_cos > 0.0 { e_cos * ln_c } else { 0.0 };
            ln_amp += if e_sin > 0.0 { e_sin * ln_s } else { 0.0 };
            if ln_amp.is_finite() {
                let sign = c_sign.powi(e_cos as i32) * s_sign.powi(e_sin as i32);
                let m = self.m_value(i);
                let phase = C64::from_polar(1.0, -phi * m);
                amps[i] = phase * sign * ln_amp.exp();
            }
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        amps.mapv_inplace(|z| z / norm);
        StateVector { amplitudes: amps }
    }

    /// Dicke state `|S, M>` for `M = S - index`.
    pub fn dicke_state(&self, index: usize) -> Result<StateVector> {
        if index >= self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: index,
            });
        }
        let mut amps = Array1::<C64>::zeros(self.dim());
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { amplitudes: amps })
    }
}

/// Pure state in the Dicke basis, unit norm.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub amplitudes: Array1<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Array1<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "state norm {norm} deviates from 1 beyond 1e-12"
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn overlap(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Density operator: Hermitian, unit trace.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    pub matrix: Array2<C64>,
    scaled_identity: Option<f64>,
}

impl DensityOperator {
    pub fn new(matrix: Array2<C64>) -> Result<Self> {
        let trace: C64 = matrix.diag().iter().sum();
        if (trace.re - 1.0).abs() > 1e-12 || trace.im.abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "density operator trace {trace} deviates from 1"
            )));
        }
        if hermitian_residual(&matrix) > 1e-12 {
            return Err(Error::InvalidParameter(
                "density operator is not Hermitian to 1e-12".into(),
            ));
        }
        Ok(Self {
            matrix,
            scaled_identity: None,
        })
    }

    /// Infinite-temperature state `rho = I / (N+1)`.
    pub fn infinite_temperature(dim: usize) -> Self {
        let w = 1.0 / dim as f64;
        Self {
            matrix: Array2::eye(dim).mapv(|x: f64| C64::new(x * w, 0.0)),
            scaled_identity: Some(w),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `Some(w)` when this operator is exactly `w * I`, letting traces skip a
    /// matrix product.
    pub fn identity_weight(&self) -> Option<f64> {
        self.scaled_identity
    }
}

/// `<psi|O|psi>` for Hermitian `O`. An imaginary residue beyond
/// `1e-10 * max(1, |Re|)` is reported as an error since it signals a
/// non-Hermitian operator.
pub fn expectation(state: &StateVector, operator: &Array2<C64>) -> Result<f64> {
    if operator.nrows() != state.dim() || operator.ncols() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: operator.nrows(),
        });
    }
    let applied = operator.dot(&state.amplitudes);
    let value: C64 = state
        .amplitudes
        .iter()
        .zip(applied.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    if value.im.abs() > 1e-10 * value.re.abs().max(1.0) {
        return Err(Error::NonHermitian { imag: value.im });
    }
    Ok(value.re)
}

/// Conjugate transpose.
pub fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    let mut a = m.t().to_owned();
    a.mapv_inplace(|z| z.conj());
    a
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_residual(m: &Array2<C64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let d = (m[[i, j]] - m[[j, i]].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// `exp(i c H)` for Hermitian `H`, via eigendecomposition.
pub fn exp_i_hermitian(h: &Array2<C64>, c: f64) -> Result<Array2<C64>> {
    let (values, vectors) = eigh_columns(h)?;
    Ok(unitary_from_eigen(&values, &vectors, c))
}

/// Assemble `V diag(exp(i c lambda)) V^dag` from a Hermitian eigensystem.
pub fn unitary_from_eigen(values: &Array1<f64>, vectors: &Array2<C64>, c: f64) -> Array2<C64> {
    let mut scaled = vectors.to_owned();
    for (k, col) in scaled.columns_mut().into_iter().enumerate() {
        let phase = C64::from_polar(1.0, c * values[k]);
        let mut col = col;
        col.mapv_inplace(|z| z * phase);
    }
    scaled.dot(&adjoint(vectors))
}

/// `U^q` by repeated squaring.
pub fn matrix_power(u: &Array2<C64>, q: u32) -> Array2<C64> {
    let dim = u.nrows();
    let mut result = Array2::<C64>::eye(dim);
    let mut base = u.to_owned();
    let mut exp = q;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result.dot(&base);
        }
        exp >>= 1;
        if exp > 0 {
            base = base.dot(&base);
        }
    }
    result
}

/// Largest entrywise absolute difference between two matrices.
pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise deviation of `U U^dag` from the identity.
pub fn unitarity_residual(u: &Array2<C64>) -> f64 {
    let prod = u.dot(&adjoint(u));
    let eye = Array2::<C64>::eye(u.nrows());
    max_abs_diff(&prod, &eye)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn commutator(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
        a.dot(b) - b.dot(a)
    }

    #[test]
    fn n1_gives_half_paulis() {
        let alg = SpinAlgebra::new(1).unwrap();
        let half = C64::new(0.5, 0.0);
        let sx = array![[C64::new(0.0, 0.0), half], [half, C64::new(0.0, 0.0)]];
        let sy = array![
            [C64::new(0.0, 0.0), C64::new(0.0, -0.5)],
            [C64::new(0.0, 0.5), C64::new(0.0, 0.0)]
        ];
        let sz = array![
            [half, C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), -half]
        ];
        assert!(max_abs_diff(alg.sx(), &sx) < 1e-15);
        assert!(max_abs_diff(alg.sy(), &sy) < 1e-15);
        assert!(max_abs_diff(alg.sz(), &sz) < 1e-15);
    }

    #[test]
    fn n2_sz_diagonal_and_casimir() {
        let alg = SpinAlgebra::new(2).unwrap();
        for (i, want) in [1.0, 0.0, -1.0].iter().enumerate() {
            assert!((alg.sz()[[i, i]].re - want).abs() < 1e-15);
        }
        let casimir = alg.sx().dot(alg.sx()) + alg.sy().dot(alg.sy()) + alg.sz().dot(alg.sz());
        let expect = Array2::<C64>::eye(3).mapv(|z| z * C64::new(2.0, 0.0));
        assert!(max_abs_diff(&casimir, &expect) < 1e-12);
    }

    #[test]
    fn rejects_zero_particles() {
        assert!(SpinAlgebra::new(0).is_err());
    }

    #[test]
    fn commutator_and_casimir_identities() {
        for n in [1usize, 2, 8, 64, 257] {
            let alg = SpinAlgebra::new(n).unwrap();
            let s = alg.spin();
            let s2 = s * s;
            let i_sz = alg.sz().mapv(|z| z * C64::new(0.0, 1.0));
            let i_sx = alg.sx().mapv(|z| z * C64::new(0.0, 1.0));
            let i_sy = alg.sy().mapv(|z| z * C64::new(0.0, 1.0));
            assert!(
                max_abs_diff(&commutator(alg.sx(), alg.sy()), &i_sz) < 1e-12 * s2,
                "[Sx,Sy] != i Sz at N={n}"
            );
            assert!(max_abs_diff(&commutator(alg.sy(), alg.sz()), &i_sx) < 1e-12 * s2);
            assert!(max_abs_diff(&commutator(alg.sz(), alg.sx()), &i_sy) < 1e-12 * s2);

            let casimir =
                alg.sx().dot(alg.sx()) + alg.sy().dot(alg.sy()) + alg.sz().dot(alg.sz());
            let expect =
                Array2::<C64>::eye(n + 1).mapv(|z| z * C64::new(s * (s + 1.0), 0.0));
            assert!(
                max_abs_diff(&casimir, &expect) < 1e-10 * s2,
                "Casimir identity failed at N={n}"
            );
        }
    }

    #[test]
    fn coherent_poles() {
        let alg = SpinAlgebra::new(6).unwrap();
        let top = alg.coherent_state(0.0, 0.0);
        assert!((top.amplitudes[0].re - 1.0).abs() < 1e-14);
        let bottom = alg.coherent_state(PI, 0.0);
        assert!((bottom.amplitudes[6].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coherent_expectations_match_bloch_vector() {
        let alg = SpinAlgebra::new(64).unwrap();
        let s = alg.spin();
        let state = alg.coherent_state(PI / 2.0, 0.0);
        let x = expectation(&state, alg.sx()).unwrap();
        assert!((x / s - 1.0).abs() < 1e-10);

        let (theta, phi) = (1.1, -0.7);
        let state = alg.coherent_state(theta, phi);
        let x = expectation(&state, alg.sx()).unwrap();
        let y = expectation(&state, alg.sy()).unwrap();
        let z = expectation(&state, alg.sz()).unwrap();
        assert!((x - s * theta.sin() * phi.cos()).abs() < 1e-10 * s);
        assert!((y - s * theta.sin() * phi.sin()).abs() < 1e-10 * s);
        assert!((z - s * theta.cos()).abs() < 1e-10 * s);
    }

    #[test]
    fn coherent_normalized_for_random_angles() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let alg = SpinAlgebra::new(33).unwrap();
        for _ in 0..100 {
            let theta: f64 = rng.gen_range(0.0..PI);
            let phi: f64 = rng.gen_range(-PI..PI);
            let state = alg.coherent_state(theta, phi);
            assert!((state.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_matches_rotation_operators() {
        let alg = SpinAlgebra::new(24).unwrap();
        let (theta, phi) = (0.9, 1.3);
        let ry = exp_i_hermitian(alg.sy(), -theta).unwrap();
        let rz = exp_i_hermitian(alg.sz(), -phi).unwrap();
        let top = alg.dicke_state(0).unwrap();
        let rotated = rz.dot(&ry).dot(&top.amplitudes);
        let direct = alg.coherent_state(theta, phi);
        let diff: f64 = rotated
            .iter()
            .zip(direct.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-10, "rotation-built coherent state differs by {diff}");
    }

    #[test]
    fn expectation_on_stretched_state() {
        let alg = SpinAlgebra::new(10).unwrap();
        let top = alg.dicke_state(0).unwrap();
        assert!((expectation(&top, alg.sz()).unwrap() - alg.spin()).abs() < 1e-14);
        assert!(expectation(&top, alg.sx()).unwrap().abs() < 1e-14);
    }

    #[test]
    fn expectation_coherent_z_component() {
        let alg = SpinAlgebra::new(128).unwrap();
        let state = alg.coherent_state(PI / 5.0, 0.0);
        let sz_over_s = alg.sz().mapv(|z| z / C64::new(alg.spin(), 0.0));
        let val = expectation(&state, &sz_over_s).unwrap();
        assert!((val - (PI / 5.0).cos()).abs() < 1e-10);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let alg = SpinAlgebra::new(4).unwrap();
        let state = alg.coherent_state(0.4, 0.2);
        // i*Sz is anti-Hermitian: expectation is purely imaginary.
        let skew = alg.sz().mapv(|z| z * C64::new(0.0, 1.0));
        assert!(matches!(
            expectation(&state, &skew),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn expectation_rejects_dimension_mismatch() {
        let alg = SpinAlgebra::new(4).unwrap();
        let other = SpinAlgebra::new(6).unwrap();
        let state = alg.coherent_state(0.1, 0.0);
        assert!(matches!(
            expectation(&state, other.sz()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn infinite_temperature_density() {
        let rho = DensityOperator::infinite_temperature(5);
        let trace: C64 = rho.matrix.diag().iter().sum();
        assert!((trace.re - 1.0).abs() < 1e-15);
        assert_eq!(rho.identity_weight(), Some(0.2));
    }

    #[test]
    fn matrix_power_matches_iteration() {
        let alg = SpinAlgebra::new(12).unwrap();
        let u = alg.x_rotation(0.7);
        let mut iterated = Array2::<C64>::eye(13);
        for _ in 0..5 {
            iterated = iterated.dot(&u);
        }
        assert!(max_abs_diff(&matrix_power(&u, 5), &iterated) < 1e-12);
    }

    #[test]
    fn eigh_columns_reconstructs_hermitian() {
        // Pins the eigenvector orientation: H = V diag(values) V^dag with
        // eigenvectors as columns.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let n = 9;
        let mut h = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                h[[i, j]] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let h = (&h + &adjoint(&h)).mapv(|z| z / C64::new(2.0, 0.0));
        let (values, vectors) = eigh_columns(&h).unwrap();
        let mut scaled = vectors.clone();
        for (k, mut col) in scaled.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|z| z * C64::new(values[k], 0.0));
        }
        let recon = scaled.dot(&adjoint(&vectors));
        assert!(max_abs_diff(&recon, &h) < 1e-12);
    }

    #[test]
    fn x_rotation_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let alg = SpinAlgebra::new(40).unwrap();
        for _ in 0..5 {
            let angle: f64 = rng.gen_range(-PI..PI);
            assert!(unitarity_residual(&alg.x_rotation(angle)) < 1e-11);
        }
    }
}
