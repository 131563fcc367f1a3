//! Harmonic normal modes of the relative and centre-of-mass motion and the
//! stability classes of symmetric states.

use std::f64::consts::FRAC_PI_4;

use crate::equilibria::{asymmetric_state, gm_value, u_crit, vstar, VstarMethod};
use crate::error::{domain, Result};
use crate::units::h;

/// Stability class. `SPlus`, `SZero` and `SMinus` are symmetric states with
/// `v > v*`, `v = v*` and `v < v*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    A,
    SPlus,
    SZero,
    SMinus,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stability::A => "A",
            Stability::SPlus => "S+",
            Stability::SZero => "S0",
            Stability::SMinus => "S-",
        })
    }
}

/// Tolerance on `|G_M − 1|` below which a point counts as on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSet {
    pub omega_hi: f64,
    pub omega_lo: f64,
    /// Rotation of the ρ-like eigenvector out of the ρ axis (A family only).
    pub mixing_angle: Option<f64>,
    pub stability: Stability,
    /// Whether `omega_hi` belongs to the ρ-like mode.
    pub rho_is_hi: bool,
    /// Signed `Ω_z²` of an unstable symmetric state.
    pub unstable_omega_sq: Option<f64>,
}

impl ModeSet {
    pub fn omega_rho(&self) -> f64 {
        if self.rho_is_hi {
            self.omega_hi
        } else {
            self.omega_lo
        }
    }

    pub fn omega_z(&self) -> f64 {
        if self.rho_is_hi {
            self.omega_lo
        } else {
            self.omega_hi
        }
    }
}

/// `(Ω_ρ*, Ω_z*) = (2√(1+u²), v)`
pub fn cm_modes(u: f64, v: f64) -> (f64, f64) {
    (2.0 * (1.0 + u * u).sqrt(), v)
}

/// Hessian `(k_ρρ, k_ρz, k_zz)` of the potential at an A state.
pub fn a_hessian(u: f64, v: f64, p_phi: f64, m: f64) -> Result<(f64, f64, f64)> {
    let st = asymmetric_state(u, v, p_phi, m)?;
    let d2 = 1.0 + u * u - v * v;
    let w = (m + 2.0) * h(m, 2.0 * (m + 4.0), v);
    let a = w * st.rho * st.rho;
    Ok((a + 4.0 * d2, w * st.rho * st.z, (m + 2.0) * v * v - a))
}

pub fn a_modes(u: f64, v: f64, p_phi: f64, m: f64) -> Result<ModeSet> {
    let st = asymmetric_state(u, v, p_phi, m)?;
    let (krr, krz, kzz) = a_hessian(u, v, p_phi, m)?;
    let uu = 1.0 + u * u;
    let d2 = uu - v * v;
    let hv = h(m, 2.0 * (m + 4.0), v);
    let delta_sq = 16.0 * (2.0 + m) * hv * d2.sqrt() * p_phi.abs();
    let split = 4.0 * uu - (6.0 + m) * v * v;
    let hi_sq = 0.5 * (4.0 * uu + (m - 2.0) * v * v + (split * split + delta_sq).sqrt());
    let det = 4.0 * (m + 2.0) * d2 * hv * st.z * st.z;
    let lo_sq = det / hi_sq;
    let phi = if krz == 0.0 {
        0.0
    } else if krr == kzz {
        FRAC_PI_4 * krz.signum()
    } else {
        0.5 * (2.0 * krz / (krr - kzz)).atan()
    };
    Ok(ModeSet {
        omega_hi: hi_sq.sqrt(),
        omega_lo: lo_sq.max(0.0).sqrt(),
        mixing_angle: Some(phi),
        stability: Stability::A,
        rho_is_hi: krr >= kzz,
        unstable_omega_sq: None,
    })
}

/// Modes of the symmetric state with momentum `p_phi`, `Ω_z = √(v² − v*²)`
/// and `Ω_ρ = √(4(1+u²) + (M−2)v*²)`.
pub fn s_modes(u: f64, v: f64, p_phi: f64, m: f64) -> Result<ModeSet> {
    let vs = vstar(p_phi, u, m, VstarMethod::Bisect)?;
    let omega_rho = (4.0 * (1.0 + u * u) + (m - 2.0) * vs * vs).sqrt();
    let wz_sq = v * v - vs * vs;
    let on_boundary = (gm_value(p_phi, u, v, m) - 1.0).abs() <= BOUNDARY_TOL;
    let (stability, omega_z, unstable) = if on_boundary {
        (Stability::SZero, wz_sq.max(0.0).sqrt(), None)
    } else if wz_sq > 0.0 {
        (Stability::SPlus, wz_sq.sqrt(), None)
    } else {
        (Stability::SMinus, 0.0, Some(wz_sq))
    };
    let rho_is_hi = omega_rho >= omega_z;
    Ok(ModeSet {
        omega_hi: omega_rho.max(omega_z),
        omega_lo: omega_rho.min(omega_z),
        mixing_angle: None,
        stability,
        rho_is_hi,
        unstable_omega_sq: unstable,
    })
}

/// Family of the stable equilibrium at momentum `p_phi`: A when `G_M < 1`,
/// otherwise a symmetric state, which is then never a saddle.
pub fn classify_state(u: f64, v: f64, p_phi: f64, m: f64) -> Stability {
    let g = gm_value(p_phi, u, v, m);
    if (g - 1.0).abs() <= BOUNDARY_TOL {
        Stability::SZero
    } else if g < 1.0 {
        Stability::A
    } else {
        Stability::SPlus
    }
}

/// Modes of whichever family [`classify_state`] selects.
pub fn modes_at(u: f64, v: f64, p_phi: f64, m: f64) -> Result<ModeSet> {
    match classify_state(u, v, p_phi, m) {
        Stability::A => a_modes(u, v, p_phi, m),
        _ => s_modes(u, v, p_phi, m),
    }
}

/// Leading behaviour of the soft mode at `u = ū ∓ δ`, `ū = u_crit(v, p, M)`:
/// `(√(vV′)·√(2δ), √(vV′)·2√δ)` for the symmetric and asymmetric side.
pub fn lambda_profile(v: f64, p_phi: f64, m: f64, delta_u: f64) -> Result<(f64, f64)> {
    let ubar = u_crit(v, p_phi, m)?;
    if !delta_u.is_finite() {
        return domain("delta_u must be finite");
    }
    let z_m = 4.0 * p_phi * p_phi * h(m, 8.0, v) / (2.0 + m);
    let slope = ubar * v / (v * v + z_m);
    let amp = (v * slope).sqrt();
    let d = delta_u.abs();
    Ok((amp * (2.0 * d).sqrt(), amp * 2.0 * d.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::p_max;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn cm_examples() {
        assert_eq!(cm_modes(0.0, 3.0), (2.0, 3.0));
        let (r, z) = cm_modes(3f64.sqrt(), 4.0);
        assert_relative_eq!(r, 4.0, max_relative = 1e-15);
        assert_eq!(z, 4.0);
    }

    #[test]
    fn a_examples() {
        let ms = a_modes(0.0, 0.5, 0.0, 1.0).unwrap();
        assert_relative_eq!(ms.omega_hi, 3f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(ms.omega_lo, 3f64.sqrt() * 0.5, max_relative = 1e-12);
        assert_eq!(ms.mixing_angle, Some(0.0));
        assert!(ms.rho_is_hi);

        let pm = p_max(6.0, 2.75, 1.0).unwrap();
        let near = a_modes(6.0, 2.75, pm, 1.0).unwrap();
        assert!(near.omega_lo < 1e-6);
    }

    #[test]
    fn s_examples() {
        let pm = p_max(6.0, 3.0, 1.0).unwrap();
        let ms = s_modes(6.0, 4.0, pm, 1.0).unwrap();
        assert_eq!(ms.stability, Stability::SPlus);
        assert_relative_eq!(ms.omega_z(), 7f64.sqrt(), max_relative = 1e-10);
        assert_relative_eq!(ms.omega_rho(), 139f64.sqrt(), max_relative = 1e-10);

        let ms = s_modes(6.0, 3.0, pm, 1.0).unwrap();
        assert_eq!(ms.stability, Stability::SZero);
        assert!(ms.omega_z() < 1e-5);

        let ms = s_modes(2.0, 3.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(ms.omega_z(), 8f64.sqrt(), max_relative = 1e-10);

        let ms = s_modes(6.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(ms.stability, Stability::SMinus);
        assert_eq!(ms.omega_lo, 0.0);
        assert!(ms.unstable_omega_sq.unwrap() < 0.0);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_state(6.0, 2.75, 1.0, 1.0), Stability::A);
        assert_eq!(classify_state(6.0, 4.0, 1.0, 1.0), Stability::SPlus);
        let pm = p_max(6.0, 2.75, 1.0).unwrap();
        assert_eq!(classify_state(6.0, 2.75, pm, 1.0), Stability::SZero);
    }

    #[test]
    fn lambda_examples() {
        let (s, a) = lambda_profile(4.0, 1.0, 1.0, 1e-3).unwrap();
        assert_relative_eq!(a / s, 2f64.sqrt(), max_relative = 1e-14);
        assert_eq!(lambda_profile(4.0, 1.0, 1.0, 0.0).unwrap(), (0.0, 0.0));
        assert!(lambda_profile(0.5, 0.0, 1.0, 1e-3).is_err());
    }

    #[test]
    fn lambda_matches_exact_modes() {
        let (v, p, m, d) = (4.0, 1.0, 1.0, 1e-4);
        let ubar = u_crit(v, p, m).unwrap();
        let (s_approx, a_approx) = lambda_profile(v, p, m, d).unwrap();
        let s_exact = s_modes(ubar - d, v, p, m).unwrap().omega_z();
        let a_exact = a_modes(ubar + d, v, p, m).unwrap().omega_lo;
        assert_relative_eq!(s_exact, s_approx, max_relative = 1e-2);
        assert_relative_eq!(a_exact, a_approx, max_relative = 1e-2);
    }

    proptest! {
        #[test]
        fn p_zero_closed_forms(u in 0.0f64..10.0, frac in 0.05f64..0.95, m in 0.5f64..6.0) {
            let v = frac * (1.0 + u * u).sqrt();
            let d = (1.0 + u * u - v * v).sqrt();
            let ms = a_modes(u, v, 0.0, m).unwrap();
            let (big, small) = if 2.0 * d >= (m + 2.0).sqrt() * v {
                (2.0 * d, (m + 2.0).sqrt() * v)
            } else {
                ((m + 2.0).sqrt() * v, 2.0 * d)
            };
            prop_assert!((ms.omega_hi - big).abs() <= 1e-12 * big);
            prop_assert!((ms.omega_lo - small).abs() <= 1e-12 * big);
            prop_assert!((ms.omega_rho() - 2.0 * d).abs() <= 1e-12 * big);
        }

        #[test]
        fn boundary_mode_continuity(u in 0.5f64..10.0, frac in 0.05f64..0.95, m in 0.5f64..6.0) {
            let v = frac * (1.0 + u * u).sqrt();
            let pm = p_max(u, v, m).unwrap();
            let a = a_modes(u, v, pm, m).unwrap();
            let s = s_modes(u, v, pm, m).unwrap();
            prop_assert!(a.omega_lo < 1e-6);
            prop_assert!((a.omega_hi - s.omega_rho()).abs() < 1e-6 * a.omega_hi);
        }
    }
}
