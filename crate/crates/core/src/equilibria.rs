//! Classical equilibria of the relative motion: the asymmetric (A, `z ≠ 0`)
//! and symmetric (S, `z = 0`) families, the boundary `G_M = 1` between them,
//! and the minimal states.
//!
//! All energies are in units of `E⋄`, momenta in units of `L⋄`.

use crate::error::{domain, Error, FamilyViolation, Result};
use crate::inversion;
use crate::units::{h, scales_from_physical, MaterialSpec, TrapSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    A,
    S,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::A => "A",
            Family::S => "S",
        })
    }
}

/// Off-plane equilibrium; `z` is the `z ≥ 0` member of the `±z` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymmetricState {
    pub p_phi: f64,
    pub rho: f64,
    pub z: f64,
    pub r: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricState {
    pub p_phi: f64,
    pub v_star: f64,
    pub rho: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalState {
    pub p_phi: f64,
    pub rho_sq: f64,
    pub energy: f64,
    pub family: Family,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VstarMethod {
    Bisect,
    /// Cardano/Ferrari solution of the quartic, `M = 1` only.
    ClosedM1,
    /// Truncated inverse series; falls back to bisection outside the
    /// validated domain.
    Series,
}

/// `½(1 + 2/M)`, the prefactor of the trap-plus-interaction energy.
#[inline]
pub(crate) fn core_factor(m: f64) -> f64 {
    0.5 * (1.0 + 2.0 / m)
}

#[inline]
fn sign(p: f64) -> f64 {
    if p < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `d(u, v) = √(1 + u² − v²)`
pub fn deficit(u: f64, v: f64) -> Result<f64> {
    let d2 = 1.0 + u * u - v * v;
    if d2 < 0.0 {
        return Err(Error::OutOfFamily(FamilyViolation::NoDeficit { d_squared: d2 }));
    }
    Ok(d2.sqrt())
}

/// `G_M = h_{M,8}(v) p² − u² + v²`
pub fn gm_value(p_phi: f64, u: f64, v: f64, m: f64) -> f64 {
    h(m, 8.0, v) * p_phi * p_phi - u * u + v * v
}

/// Field at which a state of momentum `p_phi` reaches the boundary.
pub fn u_crit(v: f64, p_phi: f64, m: f64) -> Result<f64> {
    let arg = h(m, 8.0, v) * p_phi * p_phi - 1.0 + v * v;
    if arg < 0.0 {
        return domain(format!("u_crit undefined: h8(v) p² − 1 + v² = {arg} < 0"));
    }
    Ok(arg.sqrt())
}

/// Largest `|p_φ|` of the A family: `d(u, v) h_{M,−4}(v)`.
pub fn p_max(u: f64, v: f64, m: f64) -> Result<f64> {
    Ok(deficit(u, v)? * h(m, -4.0, v))
}

/// `r_A = h_{M,−2}(v)`, the common radius of every A state.
pub fn r_a(v: f64, m: f64) -> f64 {
    h(m, -2.0, v)
}

pub fn asymmetric_state(u: f64, v: f64, p_phi: f64, m: f64) -> Result<AsymmetricState> {
    let d2 = 1.0 + u * u - v * v;
    if !(d2 > 0.0) {
        return Err(Error::OutOfFamily(FamilyViolation::NoDeficit { d_squared: d2 }));
    }
    let d = d2.sqrt();
    let pm = d * h(m, -4.0, v);
    let ap = p_phi.abs();
    if ap > pm {
        return Err(Error::OutOfFamily(FamilyViolation::MomentumTooLarge { p_phi, p_max: pm }));
    }
    let r = r_a(v, m);
    let rho_sq = ap / d;
    let z_sq = (r * r - rho_sq).max(0.0);
    let energy = core_factor(m) * h(m, 2.0 * m, v) + d * ap - u * p_phi;
    Ok(AsymmetricState { p_phi, rho: rho_sq.sqrt(), z: z_sq.sqrt(), r, energy })
}

/// The unique `v* ∈ (0, √(1+u²)]` with `G_M(p_φ, u, v*) = 1`.
pub fn vstar(p_phi: f64, u: f64, m: f64, method: VstarMethod) -> Result<f64> {
    if !(u >= 0.0 && u.is_finite()) {
        return domain(format!("u must be >= 0, got {u}"));
    }
    if !(m > 0.0) {
        return domain(format!("M must be positive, got {m}"));
    }
    match method {
        VstarMethod::Bisect => vstar_bisect(p_phi, u, m),
        VstarMethod::ClosedM1 => {
            if m != 1.0 {
                return Err(Error::MethodMismatch {
                    method: "closed_m1",
                    reason: format!("closed form needs M = 1, got {m}"),
                });
            }
            Ok(vstar_closed_m1(p_phi, u))
        }
        VstarMethod::Series => match inversion::vstar_series_auto(p_phi, u, m) {
            Err(Error::SeriesDomain { .. }) | Err(Error::Divergence { .. }) => vstar_bisect(p_phi, u, m),
            other => other,
        },
    }
}

fn vstar_bisect(p_phi: f64, u: f64, m: f64) -> Result<f64> {
    let target = 1.0 + u * u;
    let top = target.sqrt();
    let p2 = p_phi * p_phi;
    if p2 == 0.0 {
        return Ok(top);
    }
    let f = |v: f64| h(m, 8.0, v) * p2 + v * v - target;
    let (mut lo, mut hi) = (1e-12, top);
    if f(lo) > 0.0 {
        return Err(Error::Convergence(format!("v* below the bracket for p = {p_phi}")));
    }
    for _ in 0..400 {
        let mid = if hi > 4.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed form for `M = 1`: `Z = h_{1,−2}(v*)` solves `(1+u²) Z⁴ − Z − p² = 0`.
fn vstar_closed_m1(p_phi: f64, u: f64) -> f64 {
    let uu = 1.0 + u * u;
    let p2 = p_phi * p_phi;
    let cbrt2 = 2f64.cbrt();
    let q3 = 27.0 * uu + (729.0 * uu * uu + 6912.0 * p2.powi(3) * uu.powi(3)).sqrt();
    let q = q3.cbrt();
    // s = Q/(3·2^{1/3}U) − 4·2^{1/3}p²/Q, rewritten to avoid cancellation
    let c = 12.0 * cbrt2 * cbrt2 * p2 * uu;
    let q2 = q * q;
    let s = 18.0 * q2 / (cbrt2 * (q2 * q2 + q2 * c + c * c));
    let rs = s.sqrt();
    let z = 0.5 * rs + 0.5 * (-s + 2.0 / (rs * uu)).sqrt();
    z.powf(-1.5)
}

pub fn symmetric_state(p_phi: f64, u: f64, m: f64) -> Result<SymmetricState> {
    symmetric_state_with(p_phi, u, m, VstarMethod::Bisect)
}

pub fn symmetric_state_with(p_phi: f64, u: f64, m: f64, method: VstarMethod) -> Result<SymmetricState> {
    let vs = vstar(p_phi, u, m, method)?;
    let d = (1.0 + u * u - vs * vs).max(0.0).sqrt();
    let energy = core_factor(m) * h(m, 2.0 * m, vs) + h(m, -4.0, vs) * d * (d - sign(p_phi) * u);
    Ok(SymmetricState { p_phi, v_star: vs, rho: h(m, -2.0, vs), energy })
}

/// Centre-of-mass equilibrium energy `√(1+u²)|p*| − u p*`.
pub fn cm_equilibrium_energy(p_phi_star: f64, u: f64) -> f64 {
    (1.0 + u * u).sqrt() * p_phi_star.abs() - u * p_phi_star
}

/// The lowest classical state over all `p_φ` at fixed `(u, v)`.
pub fn minimal_state(u: f64, v: f64, m: f64) -> Result<MinimalState> {
    if !(u >= 0.0) {
        return domain(format!("u must be >= 0, got {u}"));
    }
    if !(v > 0.0) {
        return domain(format!("v must be > 0, got {v}"));
    }
    Ok(if v <= 1.0 {
        MinimalState { p_phi: 0.0, rho_sq: 0.0, energy: core_factor(m) * h(m, 2.0 * m, v), family: Family::A }
    } else {
        MinimalState { p_phi: u, rho_sq: 1.0, energy: core_factor(m), family: Family::S }
    })
}

/// `B• = q⋄ B⋄` in Tesla.
pub fn b_bullet(mat: &MaterialSpec, trap: &TrapSpec) -> Result<f64> {
    Ok(scales_from_physical(mat, trap)?.b_bullet_tesla())
}

/// Effective potential of the relative motion,
/// `p²/(2ρ²) + ½(1+u²)ρ² − u p + ½v²z² + r^{−M}/M`.
pub fn reduced_potential(rho: f64, z: f64, p_phi: f64, u: f64, v: f64, m: f64) -> Result<f64> {
    let r2 = rho * rho + z * z;
    if r2 == 0.0 {
        return Err(Error::Singular);
    }
    let centrifugal = if p_phi == 0.0 {
        0.0
    } else if rho == 0.0 {
        return Err(Error::Singular);
    } else {
        p_phi * p_phi / (2.0 * rho * rho)
    };
    Ok(centrifugal + 0.5 * (1.0 + u * u) * rho * rho - u * p_phi + 0.5 * v * v * z * z
        + r2.powf(-0.5 * m) / m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn deficit_examples() {
        assert_eq!(deficit(0.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(deficit(6.0, 2.75).unwrap(), 5.425_633_603_552_68, max_relative = 1e-14);
        assert!(deficit(0.0, 2.0).is_err());
    }

    #[test]
    fn boundary_function_examples() {
        assert_eq!(gm_value(0.0, 3.0, 2.0, 1.0), 4.0 - 9.0);
        assert_relative_eq!(gm_value(1.0, 6.0, 2.75, 1.0), -13.593_400_723_823_4, max_relative = 1e-13);
        let pm = p_max(6.0, 2.75, 1.0).unwrap();
        assert_relative_eq!(gm_value(pm, 6.0, 2.75, 1.0), 1.0, max_relative = 1e-13);
        assert_relative_eq!(u_crit(2.0, 0.0, 1.0).unwrap(), 3f64.sqrt());
        assert_relative_eq!(u_crit(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(u_crit(2.75, 1.0, 1.0).unwrap(), 4.626_726_626_479_74, max_relative = 1e-13);
        assert!(u_crit(0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn p_max_examples() {
        assert_relative_eq!(p_max(3.0, 1.0, 2.0).unwrap(), 3.0, max_relative = 1e-15);
        assert_relative_eq!(p_max(6.0, 2.75, 1.0).unwrap(), 1.408_229_822_068_69, max_relative = 1e-13);
        assert_relative_eq!(p_max(6.0, 3.0, 1.0).unwrap(), 1.222_974_333_769_74, max_relative = 1e-13);
        assert!(p_max(0.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn asymmetric_examples() {
        let s = asymmetric_state(0.3, 0.5, 0.0, 1.0).unwrap();
        assert_eq!(s.rho, 0.0);
        assert_relative_eq!(s.z, 0.5f64.powf(-2.0 / 3.0), max_relative = 1e-14);
        assert_relative_eq!(s.energy, 0.944_940_787_421_155, max_relative = 1e-13);

        let s = asymmetric_state(6.0, 2.75, 1.0, 1.0).unwrap();
        assert_relative_eq!(s.energy, 2.369_917_757_505_06, max_relative = 1e-12);
        assert_relative_eq!(s.rho.hypot(s.z), s.r, max_relative = 1e-14);

        let pm = p_max(6.0, 2.75, 1.0).unwrap();
        let edge = asymmetric_state(6.0, 2.75, pm, 1.0).unwrap();
        assert!(edge.z < 1e-6);
        assert_relative_eq!(edge.rho, edge.r, max_relative = 1e-12);
    }

    #[test]
    fn asymmetric_errors_are_distinguished() {
        assert!(matches!(
            asymmetric_state(0.0, 2.0, 0.1, 1.0),
            Err(Error::OutOfFamily(FamilyViolation::NoDeficit { .. }))
        ));
        assert!(matches!(
            asymmetric_state(6.0, 2.75, 2.0, 1.0),
            Err(Error::OutOfFamily(FamilyViolation::MomentumTooLarge { .. }))
        ));
    }

    #[test]
    fn vstar_examples() {
        for (u, v, m) in [(6.0, 2.75, 1.0), (2.0, 1.5, 3.0), (4.0, 0.7, 0.5)] {
            let pm = p_max(u, v, m).unwrap();
            assert_relative_eq!(vstar(pm, u, m, VstarMethod::Bisect).unwrap(), v, max_relative = 1e-12);
        }
        for u in [0.5, 2.0, 7.0] {
            for m in [1.0, 2.0, 6.0] {
                assert_relative_eq!(vstar(u, u, m, VstarMethod::Bisect).unwrap(), 1.0, max_relative = 1e-12);
            }
        }
        let vs = vstar(1.0, 6.0, 1.0, VstarMethod::Bisect).unwrap();
        assert_relative_eq!(vs, 3.374_276_504_053_57, max_relative = 1e-12);
        assert_relative_eq!(vstar(1.0, 6.0, 1.0, VstarMethod::ClosedM1).unwrap(), vs, max_relative = 1e-12);
        assert_relative_eq!(vstar(1.0, 6.0, 1.0, VstarMethod::Series).unwrap(), vs, max_relative = 1e-8);
        assert!(matches!(vstar(1.0, 6.0, 2.0, VstarMethod::ClosedM1), Err(Error::MethodMismatch { .. })));
        assert!(vstar(1.0, -1.0, 1.0, VstarMethod::Bisect).is_err());
    }

    #[test]
    fn symmetric_examples() {
        let s = symmetric_state(2.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(s.v_star, 1.0, max_relative = 1e-12);
        assert_relative_eq!(s.rho, 1.0, max_relative = 1e-12);
        assert_relative_eq!(s.energy, 1.5, max_relative = 1e-12);

        let pm = p_max(6.0, 3.0, 1.0).unwrap();
        let s = symmetric_state(pm, 6.0, 1.0).unwrap();
        assert_relative_eq!(s.v_star, 3.0, max_relative = 1e-12);
        assert_relative_eq!(s.rho, 0.480_749_856_769_136, max_relative = 1e-11);
        assert_relative_eq!(s.energy, 2.253_651_625_898_69, max_relative = 1e-10);

        let s = symmetric_state(0.0, 3.0, 1.0).unwrap();
        assert_relative_eq!(s.v_star, 10f64.sqrt());
        assert_relative_eq!(s.energy, 1.5 * 10f64.powf(1.0 / 3.0), max_relative = 1e-14);
    }

    #[test]
    fn cm_examples() {
        assert_eq!(cm_equilibrium_energy(0.0, 4.0), 0.0);
        assert_eq!(cm_equilibrium_energy(2.0, 0.0), 2.0);
        assert_relative_eq!(cm_equilibrium_energy(-1.0, 3f64.sqrt()), 2.0 + 3f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn minimal_examples() {
        let s = minimal_state(2.0, 4.0, 1.0).unwrap();
        assert_eq!((s.p_phi, s.rho_sq, s.energy, s.family), (2.0, 1.0, 1.5, Family::S));
        let s = minimal_state(5.0, 0.5, 1.0).unwrap();
        assert_eq!(s.family, Family::A);
        assert_relative_eq!(s.energy, 0.944_940_787_421_155, max_relative = 1e-13);
        for m in [0.5, 1.0, 3.0] {
            let a = minimal_state(1.0, 1.0, m).unwrap().energy;
            let b = minimal_state(1.0, 1.0 + 1e-15, m).unwrap().energy;
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn b_bullet_values() {
        let mat = MaterialSpec::gaas();
        let b1 = b_bullet(&mat, &TrapSpec::coulomb(1.0, 4.0)).unwrap();
        assert_relative_eq!(b1, 0.625_710_302_630_175, max_relative = 1e-9);
        let b2 = b_bullet(&mat, &TrapSpec::coulomb(2.0, 8.0)).unwrap();
        assert_relative_eq!(b2, 1.576_691_162_839_70, max_relative = 1e-9);
        assert_relative_eq!(b2 / b1, 2f64.powf(4.0 / 3.0), max_relative = 1e-12);
    }

    #[test]
    fn potential_matches_state_energies() {
        let s = asymmetric_state(6.0, 2.75, 1.0, 1.0).unwrap();
        let e = reduced_potential(s.rho, s.z, 1.0, 6.0, 2.75, 1.0).unwrap();
        assert_relative_eq!(e, s.energy, max_relative = 1e-12);
        let s = symmetric_state(1.0, 6.0, 1.0).unwrap();
        let e = reduced_potential(s.rho, 0.0, 1.0, 6.0, 4.0, 1.0).unwrap();
        assert_relative_eq!(e, s.energy, max_relative = 1e-12);
        assert!(matches!(reduced_potential(0.0, 0.0, 0.0, 1.0, 1.0, 1.0), Err(Error::Singular)));
        assert!(reduced_potential(0.0, 1.0, 0.0, 1.0, 1.0, 1.0).is_ok());
        assert!(reduced_potential(0.0, 1.0, 0.5, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn fig1_surface_has_two_offplane_minima() {
        let (u, v, p, m) = (6.0, 2.75, 1.0, 1.0);
        let n = 121;
        let at = |i: usize, j: usize| {
            let rho = 0.05 + 0.95 * i as f64 / (n - 1) as f64;
            let z = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
            reduced_potential(rho, z, p, u, v, m).unwrap()
        };
        let mut minima = Vec::new();
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let c = at(i, j);
                let lower = [(0, 1), (2, 1), (1, 0), (1, 2)].iter().all(|&(di, dj)| c < at(i + di - 1, j + dj - 1));
                if lower {
                    minima.push(-1.0 + 2.0 * j as f64 / (n - 1) as f64);
                }
            }
        }
        assert_eq!(minima.len(), 2);
        assert!(minima[0] < 0.0 && minima[1] > 0.0);
    }

    proptest! {
        #[test]
        fn boundary_continuity(u in 0.5f64..10.0, frac in 0.05f64..0.95, m in prop::sample::select(vec![0.5, 1.0, 2.0, 3.0, 6.0])) {
            let v = frac * (1.0 + u * u).sqrt();
            let pm = p_max(u, v, m).unwrap();
            let a = asymmetric_state(u, v, pm, m).unwrap();
            let s = symmetric_state(pm, u, m).unwrap();
            prop_assert!((a.rho - s.rho).abs() < 1e-8);
            prop_assert!(a.z < 1e-6);
            prop_assert!((a.energy - s.energy).abs() < 1e-8);
        }

        #[test]
        fn radius_ratio_identity(u in 0.5f64..10.0, frac in 0.05f64..0.95, pf in 0.0f64..1.0, m in 0.5f64..6.0) {
            let v = frac * (1.0 + u * u).sqrt();
            let p = pf * p_max(u, v, m).unwrap();
            let a = asymmetric_state(u, v, p, m).unwrap();
            let d2 = 1.0 + u * u - v * v;
            let lhs = (a.rho / a.r).powi(4);
            let rhs = (gm_value(p, u, v, m) + u * u - v * v) / d2;
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        #[test]
        fn vstar_monotone(u in 0.0f64..10.0, p in 0.01f64..5.0, dp in 0.01f64..1.0, m in 0.5f64..6.0) {
            let a = vstar(p, u, m, VstarMethod::Bisect).unwrap();
            let b = vstar(p + dp, u, m, VstarMethod::Bisect).unwrap();
            let c = vstar(p, u + dp, m, VstarMethod::Bisect).unwrap();
            prop_assert!(b < a);
            prop_assert!(c > a);
            prop_assert!((gm_value(p, u, a, m) - 1.0).abs() < 1e-10 * (1.0 + u * u));
        }

        #[test]
        fn minimal_energy_is_diamagnetic(u in 0.01f64..10.0, v in 0.1f64..5.0, m in 0.5f64..6.0) {
            let du = 1e-4;
            let e = |u| minimal_state(u, v, m).unwrap().energy;
            prop_assert!(((e(u + du) - e(u - du)) / (2.0 * du)).abs() < 1e-8);
        }
    }
}
