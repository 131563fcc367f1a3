//! The two one-parameter scaling actions that leave the dimensionless model
//! unchanged, and the cross-M display normalisation.

use crate::error::{domain, Result};
use crate::units::{constants, gamma_of, MaterialSpec, TrapSpec};

fn int_pow(a: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() < 64.0 {
        a.powi(e as i32)
    } else {
        a.powf(e)
    }
}

/// Effective-mass/field rescaling by `a`.
///
/// `m* → a² m*`, `B → a² B`, `|g*| → a⁻² |g*|` and `α_M → a⁻ᴹ α_M`. The
/// interaction change is carried by `ε_r` for the Coulomb case and by the
/// `β` override otherwise. `u`, `v`, `q⋄` and `ℰ_S` are invariant; for `a`
/// a power of two they are bit-identical.
pub fn g4_action(
    a: f64,
    mat: &MaterialSpec,
    trap: &TrapSpec,
    b_tesla: f64,
) -> Result<(MaterialSpec, TrapSpec, f64)> {
    if !(a > 0.0 && a.is_finite()) {
        return domain(format!("g4 parameter must be positive, got {a}"));
    }
    let a2 = a * a;
    let mut out_mat = MaterialSpec {
        mass_ratio: mat.mass_ratio * a2,
        epsilon_r: mat.epsilon_r,
        g_star_abs: mat.g_star_abs / a2,
    };
    let mut out_trap = *trap;
    match trap.beta_override {
        Some(b) => out_trap.beta_override = Some(b * int_pow(a, -trap.m)),
        None => out_mat.epsilon_r = mat.epsilon_r * int_pow(a, trap.m),
    }
    Ok((out_mat, out_trap, b_tesla * a2))
}

/// Maps the trap to interaction exponent `target_m` keeping `q⋄` fixed:
/// `β_L = L⁻¹ M^((L+2)/(M+2)) (γ/β)^((M−L)/(M+2)) β`.
pub fn g7_map(target_m: f64, mat: &MaterialSpec, trap: &TrapSpec) -> Result<TrapSpec> {
    if !(target_m > 0.0 && target_m.is_finite()) {
        return domain(format!("target M must be positive, got {target_m}"));
    }
    trap.validate()?;
    if target_m == trap.m {
        return Ok(*trap);
    }
    let (m, l) = (trap.m, target_m);
    let beta = trap.beta(mat)?;
    let gamma = gamma_of(mat, trap.hw_rho);
    let ln_beta_l = -l.ln()
        + (l + 2.0) / (m + 2.0) * m.ln()
        + (m - l) / (m + 2.0) * (gamma.ln() - beta.ln())
        + beta.ln();
    Ok(TrapSpec { m: l, beta_override: Some(ln_beta_l.exp()), ..*trap })
}

/// `β` that gives length unit `l_over_hbar` at exponent `m` and given `γ`;
/// the direct inversion of `L⋄/ħ = (M² β² γᴹ)^(1/(M+2))`.
pub fn beta_for_length(l_over_hbar: f64, gamma: f64, m: f64) -> f64 {
    (0.5 * (m + 2.0) * l_over_hbar.ln() - 0.5 * m * gamma.ln() - m.ln()).exp()
}

/// `g_M = 3/(1 + M/2)` as printed. This gives `g_1 = 2`, not the `g_1 = 1`
/// stated next to it; see [`minimal_band_factor`].
pub fn display_factor(m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return domain(format!("M must be positive, got {m}"));
    }
    Ok(3.0 / (1.0 + m / 2.0))
}

/// `3/(1 + 2/M)`: the factor with `g_1 = 1` that maps the classical minimal
/// energy `½(1 + 2/M)` onto `3/2` for every `M`.
pub fn minimal_band_factor(m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return domain(format!("M must be positive, got {m}"));
    }
    Ok(3.0 / (1.0 + 2.0 / m))
}

/// Coulomb `β = α/ε_r`, exposed for callers building explicit overrides.
pub fn coulomb_beta(epsilon_r: f64) -> f64 {
    constants::FINE_STRUCTURE / epsilon_r
}
