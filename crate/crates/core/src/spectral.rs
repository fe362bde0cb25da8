//! Eigenphase spectra of Floquet operators and their statistics: adjacent
//! spacing ratios, eigenphase histograms, and 2pi/q-pairing detection.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::floquet::{wrap_phase, FloquetOperator};

/// Poisson reference value of the mean adjacent spacing ratio, `2 ln 2 - 1`.
pub const R_POISSON: f64 = 0.386_294_361_119_890_6;

/// Spacings below this are clamped before ratio formation; exact degeneracies
/// occur at symmetry points and would otherwise produce 0/0.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// Sorted eigenphases of `U^q` in `(-pi, pi]`.
#[derive(Debug, Clone)]
pub struct EigenphaseSpectrum {
    pub phases: Vec<f64>,
    /// Which power of the one-period operator the phases belong to.
    pub power: u32,
}

impl EigenphaseSpectrum {
    pub fn from_phases(mut phases: Vec<f64>, power: u32) -> Self {
        for p in &mut phases {
            *p = wrap_phase(*p);
        }
        phases.sort_by(f64::total_cmp);
        Self { phases, power }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// Eigenphases of `U^q`, obtained from a single diagonalization of `U` as
/// `q * mu mod 2pi` (the power shares the eigenvectors, so the matrix power
/// is never rediagonalized).
pub fn eigenphases(u: &FloquetOperator, power: u32) -> Result<EigenphaseSpectrum> {
    if power < 1 {
        return Err(Error::InvalidParameter("power must be >= 1".into()));
    }
    let eig = u.eigensystem()?;
    let phases = eig
        .phases
        .iter()
        .map(|&mu| wrap_phase(power as f64 * mu))
        .collect();
    Ok(EigenphaseSpectrum::from_phases(phases, power))
}

/// Mean adjacent spacing ratio and its Poisson-normalized value.
#[derive(Debug, Clone, Copy)]
pub struct SpacingRatioStats {
    /// Mean of `min(d_j, d_{j+1}) / max(d_j, d_{j+1})` over all cyclic pairs.
    pub rbar: f64,
    /// `rbar / (2 ln 2 - 1)`; values below 1 signal eigenphase clustering.
    pub rtilde: f64,
    /// How many spacings sat below [`DEGENERACY_FLOOR`] and were clamped.
    pub clamped: usize,
}

/// Adjacent spacing ratio with the circular convention: for `n` sorted
/// phases there are `n` gaps (the last one wraps around the circle) and
/// therefore `n` ratios.
pub fn spacing_ratio(spectrum: &EigenphaseSpectrum) -> Result<SpacingRatioStats> {
    let phases = &spectrum.phases;
    let n = phases.len();
    if n < 3 {
        return Err(Error::TooFewValues { needed: 3, got: n });
    }
    let mut clamped = 0usize;
    let mut gaps = Vec::with_capacity(n);
    for j in 0..n - 1 {
        gaps.push(phases[j + 1] - phases[j]);
    }
    gaps.push(2.0 * PI - (phases[n - 1] - phases[0]));
    for g in &mut gaps {
        if *g < DEGENERACY_FLOOR {
            *g = DEGENERACY_FLOOR;
            clamped += 1;
        }
    }
    let mut sum = 0.0;
    for j in 0..n {
        let a = gaps[j];
        let b = gaps[(j + 1) % n];
        sum += a.min(b) / a.max(b);
    }
    let rbar = sum / n as f64;
    Ok(SpacingRatioStats {
        rbar,
        rtilde: rbar / R_POISSON,
        clamped,
    })
}

/// Normalized eigenphase histogram over `(-pi, pi]` (the density integrates
/// to one).
#[derive(Debug, Clone)]
pub struct PhaseHistogram {
    pub bin_edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl PhaseHistogram {
    pub fn max_density(&self) -> f64 {
        self.density.iter().cloned().fold(0.0, f64::max)
    }
}

/// Histogram estimate of the eigenphase density of states.
pub fn dos_histogram(spectrum: &EigenphaseSpectrum, bins: usize) -> Result<PhaseHistogram> {
    if bins < 8 {
        return Err(Error::InvalidParameter(format!(
            "need at least 8 bins, got {bins}"
        )));
    }
    let width = 2.0 * PI / bins as f64;
    let mut counts = vec![0usize; bins];
    for &phase in &spectrum.phases {
        let mut k = ((phase + PI) / width).floor() as isize;
        if k < 0 {
            k = 0;
        }
        let k = (k as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = spectrum.len() as f64;
    let density = counts
        .iter()
        .map(|&c| c as f64 / (total * width))
        .collect();
    let bin_edges = (0..=bins).map(|k| -PI + k as f64 * width).collect();
    Ok(PhaseHistogram { bin_edges, density })
}

/// Fraction of eigenphases that belong to q-tuples mutually separated by
/// `2pi/q` within `tol`, found by greedy matching on the sorted circle.
///
/// For each unused phase (in sorted order) the `q - 1` rotated targets are
/// looked up by binary search; the tuple counts only if every target has an
/// unused phase within `tol`. Deterministic for a given spectrum.
pub fn clustering_degeneracy(spectrum: &EigenphaseSpectrum, q: u32, tol: f64) -> Result<f64> {
    if q < 2 {
        return Err(Error::InvalidParameter("q must be >= 2".into()));
    }
    let phases = &spectrum.phases;
    let n = phases.len();
    if n == 0 {
        return Ok(0.0);
    }
    let step = 2.0 * PI / q as f64;
    let mut used = vec![false; n];
    let mut matched = 0usize;
    for start in 0..n {
        if used[start] {
            continue;
        }
        let mut tuple = vec![start];
        'targets: for j in 1..q {
            let target = wrap_phase(phases[start] + j as f64 * step);
            match nearest_unused(phases, &used, &tuple, target) {
                Some((idx, dist)) if dist <= tol => {
                    tuple.push(idx);
                }
                _ => break 'targets,
            }
        }
        if tuple.len() == q as usize {
            for &idx in &tuple {
                used[idx] = true;
            }
            matched += tuple.len();
        }
    }
    Ok(matched as f64 / n as f64)
}

/// Closest phase to `target` (circular distance) that is neither used nor
/// already part of the candidate tuple. Spectra are at most a few thousand
/// phases, so a linear scan is plenty.
fn nearest_unused(
    phases: &[f64],
    used: &[bool],
    tuple: &[usize],
    target: f64,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (idx, &phase) in phases.iter().enumerate() {
        if used[idx] || tuple.contains(&idx) {
            continue;
        }
        let dist = circular_distance(phase, target);
        if best.map_or(true, |(_, d)| dist < d) {
            best = Some((idx, dist));
        }
    }
    best
}

fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

/// Eigenphases of `U` split by parity under `exp(i pi Sx)`; meaningful for
/// even `p`, where the kick commutes with the half-turn about x. Each
/// eigenvector is assigned by the sign of its parity expectation value.
pub fn parity_resolved_phases(
    u: &FloquetOperator,
    algebra: &crate::algebra::SpinAlgebra,
) -> Result<(EigenphaseSpectrum, EigenphaseSpectrum)> {
    let eig = u.eigensystem()?;
    let parity = algebra.x_rotation(PI);
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for (k, col) in eig.vectors.columns().into_iter().enumerate() {
        let applied = parity.dot(&col);
        let val: num_complex::Complex64 = col
            .iter()
            .zip(applied.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        if val.re >= 0.0 {
            even.push(eig.phases[k]);
        } else {
            odd.push(eig.phases[k]);
        }
    }
    Ok((
        EigenphaseSpectrum::from_phases(even, 1),
        EigenphaseSpectrum::from_phases(odd, 1),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform_spectrum(rng: &mut ChaCha8Rng, n: usize) -> EigenphaseSpectrum {
        let phases: Vec<f64> = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();
        EigenphaseSpectrum::from_phases(phases, 1)
    }

    #[test]
    fn picket_fence_has_unit_ratio() {
        let n = 100;
        let phases: Vec<f64> = (0..n).map(|k| -PI + 2.0 * PI * k as f64 / n as f64).collect();
        let stats = spacing_ratio(&EigenphaseSpectrum::from_phases(phases, 1)).unwrap();
        assert!((stats.rbar - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tight_pairs_drive_ratio_to_zero() {
        let eps = 1e-9;
        let mut phases = Vec::new();
        for k in 0..50 {
            let base = -PI + 2.0 * PI * k as f64 / 50.0;
            phases.push(base);
            phases.push(base + eps);
        }
        let stats = spacing_ratio(&EigenphaseSpectrum::from_phases(phases, 1)).unwrap();
        assert!(stats.rbar < 1e-7, "rbar = {}", stats.rbar);
    }

    #[test]
    fn poisson_sample_matches_reference() {
        // Monte-Carlo oracle: i.i.d. uniform phases on the circle give
        // rbar = 2 ln 2 - 1 in expectation.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 1025;
        let trials = 60;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..trials {
            let r = spacing_ratio(&uniform_spectrum(&mut rng, n)).unwrap().rbar;
            sum += r;
            sum2 += r * r;
        }
        let mean = sum / trials as f64;
        let var = (sum2 / trials as f64 - mean * mean).max(0.0);
        let sigma = (var / trials as f64).sqrt();
        assert!(
            (mean - R_POISSON).abs() < 3.0 * sigma.max(1e-4),
            "rbar = {mean} vs Poisson {R_POISSON} (sigma {sigma})"
        );
        let rtilde = mean / R_POISSON;
        assert!((0.9..1.1).contains(&rtilde));
    }

    #[test]
    fn ratio_invariant_under_circle_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spectrum = uniform_spectrum(&mut rng, 301);
        let base = spacing_ratio(&spectrum).unwrap().rbar;
        for shift in [0.37, 1.9, -2.4] {
            let shifted: Vec<f64> = spectrum.phases.iter().map(|&p| p + shift).collect();
            let stats = spacing_ratio(&EigenphaseSpectrum::from_phases(shifted, 1)).unwrap();
            assert!(
                (stats.rbar - base).abs() < 1e-12,
                "shift {shift}: {} vs {base}",
                stats.rbar
            );
        }
    }

    #[test]
    fn spacing_ratio_needs_three_phases() {
        let spec = EigenphaseSpectrum::from_phases(vec![0.0, 1.0], 1);
        assert!(matches!(
            spacing_ratio(&spec),
            Err(Error::TooFewValues { needed: 3, .. })
        ));
    }

    #[test]
    fn degenerate_spacings_are_clamped_and_counted() {
        let phases = vec![0.0, 0.0, 1.0, 2.0];
        let stats = spacing_ratio(&EigenphaseSpectrum::from_phases(phases, 1)).unwrap();
        assert_eq!(stats.clamped, 1);
        assert!(stats.rbar.is_finite());
    }

    #[test]
    fn dos_identity_concentrates_in_one_bin() {
        let spec = EigenphaseSpectrum::from_phases(vec![0.0; 64], 1);
        let hist = dos_histogram(&spec, 16).unwrap();
        let occupied = hist.density.iter().filter(|&&d| d > 0.0).count();
        assert_eq!(occupied, 1);
        // Density integrates to 1.
        let width = 2.0 * PI / 16.0;
        let integral: f64 = hist.density.iter().map(|d| d * width).sum();
        assert!((integral - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dos_uniform_phases_are_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 40_000;
        let spec = uniform_spectrum(&mut rng, n);
        let bins = 16;
        let hist = dos_histogram(&spec, bins).unwrap();
        // Chi-square against the flat density: expected count per bin n/bins.
        let width = 2.0 * PI / bins as f64;
        let expected = n as f64 / bins as f64;
        let chi2: f64 = hist
            .density
            .iter()
            .map(|&d| {
                let count = d * n as f64 * width;
                (count - expected).powi(2) / expected
            })
            .sum();
        // 15 dof; 99.9th percentile is ~37.7.
        assert!(chi2 < 37.7, "chi2 = {chi2}");
    }

    #[test]
    fn dos_rejects_too_few_bins() {
        let spec = EigenphaseSpectrum::from_phases(vec![0.0, 0.2, 0.4], 1);
        assert!(dos_histogram(&spec, 4).is_err());
    }

    #[test]
    fn exact_triplets_are_fully_clustered() {
        let mut phases = Vec::new();
        for k in 0..10 {
            let base = -2.0 + 0.11 * k as f64;
            phases.push(wrap_phase(base));
            phases.push(wrap_phase(base + 2.0 * PI / 3.0));
            phases.push(wrap_phase(base - 2.0 * PI / 3.0));
        }
        let spec = EigenphaseSpectrum::from_phases(phases, 1);
        let frac = clustering_degeneracy(&spec, 3, 1e-9).unwrap();
        assert!((frac - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_phases_barely_cluster() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let spec = uniform_spectrum(&mut rng, 129);
            let frac = clustering_degeneracy(&spec, 3, 1e-6).unwrap();
            worst = worst.max(frac);
        }
        assert!(worst < 0.05, "uniform phases clustered at {worst}");
    }

    #[test]
    fn partial_tuple_is_not_counted() {
        // Two phases 2pi/3 apart, third vertex missing.
        let spec =
            EigenphaseSpectrum::from_phases(vec![0.0, 2.0 * PI / 3.0], 1);
        let frac = clustering_degeneracy(&spec, 3, 1e-9).unwrap();
        assert_eq!(frac, 0.0);
    }
}
