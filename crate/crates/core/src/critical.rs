//! Critical points of the undriven p-spin family on the semiclassical
//! energy surface
//!
//! ```text
//! E(phi, Z) = -h sqrt(1 - Z^2) cos(phi) - (Lambda/p) Z^p,
//! ```
//!
//! expressed as critical coupling ratios `W = Lambda/h` and magnetization
//! positions `Z`: the spinodal (birth of a metastable ferromagnetic well),
//! the ground-state transition (degeneracy of the two minima), and the
//! dynamical critical point (the ferromagnetic branch reaching the energy of
//! the fully polarized state).
//!
//! Every closed form is backed by [`critical_oracle`], an independent dense
//! scan plus root/ternary polishing of the defining conditions that never
//! touches the closed-form expressions.

use crate::error::{Error, Result};

/// `E(phi, Z; h, Lambda, p)` on the unit sphere.
pub fn semiclassical_energy(phi: f64, z: f64, h: f64, lambda: f64, p: u32) -> Result<f64> {
    if z.abs() > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "|Z| must be <= 1, got {z}"
        )));
    }
    Ok(-h * (1.0 - z * z).sqrt() * phi.cos() - lambda / p as f64 * z.powi(p as i32))
}

/// Critical coupling from the fixed-point relation `W = 1/(Z^(p-2) sqrt(1-Z^2))`.
fn w_from_z(z: f64, p: u32) -> f64 {
    1.0 / (z.powi(p as i32 - 2) * (1.0 - z * z).sqrt())
}

/// Spinodal point `(Z, W)`. For `p = 2` the metastable window closes and the
/// point coincides with the ground-state transition at `(0, 1)` (the general
/// expression degenerates to `0^0` there, so it is special-cased).
pub fn spinodal_point(p: u32) -> (f64, f64) {
    assert!(p >= 2);
    if p == 2 {
        return (0.0, 1.0);
    }
    let pf = p as f64;
    let z = ((pf - 2.0) / (pf - 1.0)).sqrt();
    let w = ((pf - 1.0).powi(p as i32 - 1) / (pf - 2.0).powi(p as i32 - 2)).sqrt();
    (z, w)
}

/// Ground-state critical point `(Z, W)`; `(0, 1)` for `p = 2` where the
/// transition is continuous.
pub fn gs_critical_point(p: u32) -> (f64, f64) {
    assert!(p >= 2);
    if p == 2 {
        return (0.0, 1.0);
    }
    let pf = p as f64;
    let z = (pf * (pf - 2.0)).sqrt() / (pf - 1.0);
    let w = (pf - 1.0).powi(p as i32 - 1) / (pf * (pf - 2.0)).powf((pf - 2.0) / 2.0);
    (z, w)
}

/// Dynamical critical point, with the large-p estimate attached for `p > 6`.
#[derive(Debug, Clone, Copy)]
pub struct DqptPoint {
    pub z: f64,
    pub w: f64,
    /// Arithmetic-mean estimate between the inflection lower bound and the
    /// symmetric-root upper bound, and its deviation from the true root.
    /// Only populated for `p > 6`, where no closed form is used.
    pub estimate: Option<DqptEstimate>,
}

#[derive(Debug, Clone, Copy)]
pub struct DqptEstimate {
    pub z: f64,
    pub w: f64,
    pub deviation: f64,
}

/// Polynomial whose interior root on `(0, 1)` locates the dynamical critical
/// magnetization: `Z^p - p/(p-1) Z^(p-2) + 1/(p-1)`.
pub fn dqpt_polynomial(z: f64, p: u32) -> f64 {
    let pf = p as f64;
    z.powi(p as i32) - pf / (pf - 1.0) * z.powi(p as i32 - 2) + 1.0 / (pf - 1.0)
}

/// Inflection point of [`dqpt_polynomial`], a strict lower bound for the root.
pub fn dqpt_lower_bound(p: u32) -> f64 {
    let pf = p as f64;
    ((pf - 2.0) * (pf - 3.0)).sqrt() / (pf - 1.0)
}

/// Minimum position `Z* = sqrt((p-2)/(p-1))`, a strict upper bound.
pub fn dqpt_upper_bound(p: u32) -> f64 {
    let pf = p as f64;
    ((pf - 2.0) / (pf - 1.0)).sqrt()
}

/// Dynamical critical point `(Z, W)`.
///
/// `p = 3..6` use the known closed-form roots; larger `p` bisects
/// [`dqpt_polynomial`] on the bracket between the inflection point and the
/// polynomial minimum, and also reports the arithmetic-mean estimate of the
/// bracket endpoints together with its deviation from the bisected root.
pub fn dqpt_point(p: u32) -> Result<DqptPoint> {
    if p < 3 {
        return Err(Error::InvalidParameter(
            "dynamical critical point needs p >= 3".into(),
        ));
    }
    let z = match p {
        3 => (3.0f64.sqrt() - 1.0) / 2.0,
        4 => 1.0 / 3.0f64.sqrt(),
        5 => ((5.0 + 4.0 * 5.0f64.sqrt()).sqrt() - 1.0) / 4.0,
        6 => ((1.0 + 21.0f64.sqrt()) / 10.0).sqrt(),
        _ => {
            let lo = dqpt_lower_bound(p);
            let hi = dqpt_upper_bound(p);
            bisect(|z| dqpt_polynomial(z, p), lo, hi, 1e-12)?
        }
    };
    let estimate = (p > 6).then(|| {
        let pf = p as f64;
        // Mean of the inflection lower bound and the symmetric-reflection
        // upper bound 2 Z* - 1.
        let z_est = (2.0 * ((pf - 1.0) * (pf - 2.0)).sqrt()
            + ((pf - 2.0) * (pf - 3.0)).sqrt()
            - (pf - 1.0))
            / (2.0 * (pf - 1.0));
        DqptEstimate {
            z: z_est,
            w: w_from_z(z_est, p),
            deviation: (z_est - z).abs(),
        }
    });
    Ok(DqptPoint {
        z,
        w: w_from_z(z, p),
        estimate,
    })
}

/// Which critical point [`critical_oracle`] should find.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    Spinodal,
    GroundState,
    Dqpt,
}

/// Test-oriented numerical route to the same points: dense scans and
/// bisection/ternary polishing on the defining conditions, no closed forms.
pub fn critical_oracle(p: u32, kind: CriticalKind) -> Result<(f64, f64)> {
    match kind {
        CriticalKind::Spinodal => {
            // The spinodal coupling is the minimum of W(Z) over (0, 1): above
            // it the fixed-point equation has a pair of solutions, below it
            // none.
            let z = ternary_min(|z| w_from_z(z, p), 1e-9, 1.0 - 1e-9, 1e-13);
            Ok((if z < 1e-6 { 0.0 } else { z }, w_from_z(z, p)))
        }
        CriticalKind::GroundState => {
            // Degeneracy of the ferromagnetic branch with the polarized
            // state: sqrt(1-Z^2) + Z^2 / (p sqrt(1-Z^2)) = 1 along the
            // fixed-point family, rearranged into a cancellation-free
            // product (the raw form is quartically flat near Z = 0 and
            // drowns in rounding noise there).
            let f = |z: f64| {
                let u = (1.0 - z * z).sqrt();
                z * z * (1.0 - (p as f64 - 1.0) * u) / (p as f64 * u * (1.0 + u))
            };
            match scan_for_sign_change(&f, 1e-6, 1.0 - 1e-6, 40_000) {
                Some((lo, hi)) => {
                    let z = bisect(f, lo, hi, 1e-13)?;
                    Ok((z, w_from_z(z, p)))
                }
                None => {
                    // No strict crossing: the transition is continuous, the
                    // degeneracy condition only touches zero where the
                    // metastable window closes, which is the spinodal point
                    // itself (the condition is quartically flat there, too
                    // flat to bisect).
                    critical_oracle(p, CriticalKind::Spinodal)
                }
            }
        }
        CriticalKind::Dqpt => {
            if p < 3 {
                return Err(Error::InvalidParameter(
                    "dynamical critical point needs p >= 3".into(),
                ));
            }
            // First interior sign change of the root polynomial, scanning
            // away from the trivial root at Z = 1.
            let f = |z: f64| dqpt_polynomial(z, p);
            let (lo, hi) = scan_for_sign_change(&f, 1e-4, 1.0 - 1e-6, 40_000)
                .ok_or(Error::NoRootInBracket { lo: 0.0, hi: 1.0 })?;
            let z = bisect(f, lo, hi, 1e-13)?;
            Ok((z, w_from_z(z, p)))
        }
    }
}

fn scan_for_sign_change(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Option<(f64, f64)> {
    let step = (hi - lo) / samples as f64;
    let mut prev = f(lo);
    for k in 1..=samples {
        let z = lo + k as f64 * step;
        let val = f(z);
        if prev == 0.0 {
            return Some((lo + (k - 1) as f64 * step, z));
        }
        if prev.signum() != val.signum() {
            return Some((z - step, z));
        }
        prev = val;
    }
    None
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRootInBracket { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn ternary_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}
