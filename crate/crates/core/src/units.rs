//! Physical inputs, the dimensionless scales derived from them, and the
//! key-value configuration format.
//!
//! Energies are in meV, fields in Tesla. The dimensionless energy unit is
//! `E⋄ = ħω_ρ / q⋄` and the field unit is `B⋄ = 2 m* ω_ρ / e`.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};

/// Frozen CODATA 2018 values.
pub mod constants {
    /// Electron rest energy in meV.
    pub const ELECTRON_REST_ENERGY_MEV: f64 = 510_998.95e3;
    /// Fine-structure constant.
    pub const FINE_STRUCTURE: f64 = 1.0 / 137.035_999_084;
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Elementary charge, C.
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// Electron mass, kg.
    pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
}

/// Auxiliary exponent of the length unit. Every closed-form equilibrium in
/// this crate assumes this value.
pub const S_EXPONENT: f64 = -1.0;

/// `x^(k/(M+2))` with no argument checks; callers guarantee `x > 0`.
#[inline]
pub(crate) fn h(m: f64, k: f64, x: f64) -> f64 {
    x.powf(k / (m + 2.0))
}

/// `h_{M,k}(x) = x^(k/(M+2))`.
pub fn power_scale(m: f64, k: f64, x: f64) -> Result<f64> {
    if !(m > -2.0) {
        return domain(format!("power_scale needs M > -2, got {m}"));
    }
    if !(x > 0.0) {
        return domain(format!("power_scale needs x > 0, got {x}"));
    }
    Ok(h(m, k, x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSpec {
    /// `m*/m_e`
    pub mass_ratio: f64,
    pub epsilon_r: f64,
    /// `|g*|`
    pub g_star_abs: f64,
}

impl MaterialSpec {
    pub fn new(mass_ratio: f64, epsilon_r: f64, g_star_abs: f64) -> Result<Self> {
        let mat = Self { mass_ratio, epsilon_r, g_star_abs };
        mat.validate()?;
        Ok(mat)
    }

    /// Bulk GaAs: `m* = 0.067 m_e`, `ε_r = 12`, `|g*| = 0.3`.
    pub fn gaas() -> Self {
        Self { mass_ratio: 0.067, epsilon_r: 12.0, g_star_abs: 0.3 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("mass_ratio", self.mass_ratio),
            ("epsilon_r", self.epsilon_r),
            ("g_star_abs", self.g_star_abs),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return domain(format!("{name} must be positive, got {x}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSpec {
    /// `ħω_ρ` in meV.
    pub hw_rho: f64,
    /// `ħω_z` in meV.
    pub hw_z: f64,
    /// Interaction exponent.
    pub m: f64,
    /// Dimensionless interaction strength; required unless `m == 1`.
    pub beta_override: Option<f64>,
}

impl TrapSpec {
    pub fn new(hw_rho: f64, hw_z: f64, m: f64, beta_override: Option<f64>) -> Result<Self> {
        let trap = Self { hw_rho, hw_z, m, beta_override };
        trap.validate()?;
        Ok(trap)
    }

    pub fn coulomb(hw_rho: f64, hw_z: f64) -> Self {
        Self { hw_rho, hw_z, m: 1.0, beta_override: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hw_rho > 0.0 && self.hw_rho.is_finite()) {
            return domain(format!("hw_rho must be positive, got {}", self.hw_rho));
        }
        if !(self.hw_z > 0.0 && self.hw_z.is_finite()) {
            return domain(format!("hw_z must be positive, got {}", self.hw_z));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return domain(format!("M must be positive, got {}", self.m));
        }
        match self.beta_override {
            Some(b) if !(b > 0.0 && b.is_finite()) => {
                domain(format!("beta must be positive, got {b}"))
            }
            None if self.m != 1.0 => domain(format!(
                "beta must be given explicitly for M = {} (only the Coulomb value is known)",
                self.m
            )),
            _ => Ok(()),
        }
    }

    /// `v = ω_z/ω_ρ`
    pub fn v(&self) -> f64 {
        self.hw_z / self.hw_rho
    }

    /// Interaction strength: the override if present, else `α/ε_r` (M = 1).
    pub fn beta(&self, mat: &MaterialSpec) -> Result<f64> {
        match self.beta_override {
            Some(b) => Ok(b),
            None if self.m == 1.0 => Ok(constants::FINE_STRUCTURE / mat.epsilon_r),
            None => domain(format!("no interaction strength for M = {}", self.m)),
        }
    }
}

/// Dimensionless scales of one physical system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSet {
    pub beta: f64,
    pub gamma: f64,
    /// `L⋄/ħ`
    pub l_dia_over_hbar: f64,
    /// `q⋄ = ħ/L⋄`
    pub q_dia: f64,
    /// `E⋄` in meV.
    pub e_dia_mev: f64,
    /// `B⋄` in Tesla.
    pub b_dia_tesla: f64,
    /// Zeeman strength `ℰ_S = |g*| q⋄ m*/m_e`, in units of `E⋄`.
    pub e_s: f64,
    pub m: f64,
    pub v: f64,
}

impl ScaleSet {
    pub fn model_point(&self, u: f64) -> Result<ModelPoint> {
        ModelPoint::new(u, self.v, self.m, self.q_dia)
    }

    /// Field increment that advances `L_z` by one `ħ` along the minimal band.
    pub fn b_bullet_tesla(&self) -> f64 {
        self.q_dia * self.b_dia_tesla
    }
}

/// `L⋄/ħ` from `(β, γ, M)`, evaluated as `(M² β² γ^M)^(1/(M+2))`.
pub fn length_unit(beta: f64, gamma: f64, m: f64) -> f64 {
    let gamma_m = if m.fract() == 0.0 && m.abs() < 64.0 {
        gamma.powi(m as i32)
    } else {
        gamma.powf(m)
    };
    let inner = m * m * (beta * beta) * gamma_m;
    if inner.is_finite() && inner > 0.0 {
        inner.powf(1.0 / (m + 2.0))
    } else {
        ((2.0 * m.ln() + 2.0 * beta.ln() + m * gamma.ln()) / (m + 2.0)).exp()
    }
}

/// `γ = m* c² / (2 ħω_ρ)`
pub fn gamma_of(mat: &MaterialSpec, hw_rho: f64) -> f64 {
    mat.mass_ratio * constants::ELECTRON_REST_ENERGY_MEV / (2.0 * hw_rho)
}

/// `B⋄ = 2 m* ω_ρ / e` in Tesla for `ħω_ρ` in meV.
pub fn field_unit(mat: &MaterialSpec, hw_rho: f64) -> f64 {
    const PER_MEV: f64 = constants::ELECTRON_MASS * 1e-3 / constants::HBAR;
    (2.0 * mat.mass_ratio) * PER_MEV * hw_rho
}

pub fn scales_from_physical(mat: &MaterialSpec, trap: &TrapSpec) -> Result<ScaleSet> {
    mat.validate()?;
    trap.validate()?;
    let beta = trap.beta(mat)?;
    let gamma = gamma_of(mat, trap.hw_rho);
    let l = length_unit(beta, gamma, trap.m);
    let q_dia = 1.0 / l;
    Ok(ScaleSet {
        beta,
        gamma,
        l_dia_over_hbar: l,
        q_dia,
        e_dia_mev: trap.hw_rho / q_dia,
        b_dia_tesla: field_unit(mat, trap.hw_rho),
        e_s: mat.g_star_abs * q_dia * mat.mass_ratio,
        m: trap.m,
        v: trap.v(),
    })
}

/// `u = B/B⋄`
pub fn field_to_u(b_tesla: f64, s: &ScaleSet) -> Result<f64> {
    if !(b_tesla >= 0.0) {
        return domain(format!("field must be non-negative, got {b_tesla}"));
    }
    Ok(b_tesla / s.b_dia_tesla)
}

/// `B = u B⋄`
pub fn u_to_field(u: f64, s: &ScaleSet) -> Result<f64> {
    if !(u >= 0.0) {
        return domain(format!("u must be non-negative, got {u}"));
    }
    Ok(u * s.b_dia_tesla)
}

/// `B• / ((m*/m_e · ε_r)^(2/3) (ħω_ρ/meV)^(4/3))` for the Coulomb case,
/// the material-independent prefactor of the minimal-band field step.
pub fn b_bullet_prefactor_coulomb(mat: &MaterialSpec, trap: &TrapSpec) -> Result<f64> {
    if trap.m != 1.0 {
        return domain("the B• prefactor is defined for M = 1 only");
    }
    let s = scales_from_physical(mat, trap)?;
    let norm = (mat.mass_ratio * mat.epsilon_r).powf(2.0 / 3.0) * trap.hw_rho.powf(4.0 / 3.0);
    Ok(s.b_bullet_tesla() / norm)
}

/// Working parameters of the dimensionless model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPoint {
    pub u: f64,
    pub v: f64,
    pub m: f64,
    pub q_dia: f64,
}

impl ModelPoint {
    pub fn new(u: f64, v: f64, m: f64, q_dia: f64) -> Result<Self> {
        if !(u >= 0.0 && u.is_finite()) {
            return domain(format!("u must be >= 0 (apply (p,u) -> (-p,-u) first), got {u}"));
        }
        if !(v > 0.0 && v.is_finite()) {
            return domain(format!("v must be > 0, got {v}"));
        }
        if !(m > 0.0 && m.is_finite()) {
            return domain(format!("M must be > 0, got {m}"));
        }
        if !(q_dia > 0.0 && q_dia.is_finite()) {
            return domain(format!("q_dia must be > 0, got {q_dia}"));
        }
        Ok(Self { u, v, m, q_dia })
    }

    pub fn with_u(&self, u: f64) -> Result<Self> {
        Self::new(u, self.v, self.m, self.q_dia)
    }
}

/// Material and trap read from a key-value file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub material: MaterialSpec,
    pub trap: TrapSpec,
}

const CONFIG_KEYS: [&str; 7] =
    ["m_star_ratio", "epsilon_r", "g_star", "hw_rho_mev", "hw_z_mev", "M", "beta"];

impl FromStr for SystemConfig {
    type Err = Error;

    /// One `key = value` per line; `#` starts a comment. All keys except
    /// `beta` are required.
    fn from_str(text: &str) -> Result<Self> {
        let mut vals: [Option<(f64, usize)>; 7] = [None; 7];
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .or_else(|| body.split_once(':'))
                .ok_or_else(|| Error::Config { line, msg: format!("expected key = value, got {body:?}") })?;
            let key = key.trim();
            let slot = CONFIG_KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::Config { line, msg: format!("unknown key {key:?}") })?;
            if let Some((_, first)) = vals[slot] {
                return Err(Error::Config { line, msg: format!("{key} already set on line {first}") });
            }
            let x: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Config { line, msg: format!("{key}: not a number: {:?}", value.trim()) })?;
            vals[slot] = Some((x, line));
        }
        let last = text.lines().count().max(1);
        let get = |slot: usize| -> Result<(f64, usize)> {
            vals[slot].ok_or_else(|| Error::Config { line: last, msg: format!("missing key {}", CONFIG_KEYS[slot]) })
        };
        let check = |(x, line): (f64, usize), r: Result<()>| r.map(|_| x).map_err(|e| Error::Config { line, msg: e.to_string() });

        let (mr, eps, g) = (get(0)?, get(1)?, get(2)?);
        let material = MaterialSpec { mass_ratio: mr.0, epsilon_r: eps.0, g_star_abs: g.0 };
        for (entry, field) in [(mr, material.mass_ratio), (eps, material.epsilon_r), (g, material.g_star_abs)] {
            check(entry, if field > 0.0 { Ok(()) } else { domain("must be positive") })?;
        }
        let (hr, hz, m) = (get(3)?, get(4)?, get(5)?);
        let trap = TrapSpec { hw_rho: hr.0, hw_z: hz.0, m: m.0, beta_override: vals[6].map(|(b, _)| b) };
        if let Err(e) = trap.validate() {
            let line = vals[6].map(|(_, l)| l).unwrap_or(m.1);
            return Err(Error::Config { line, msg: e.to_string() });
        }
        Ok(SystemConfig { material, trap })
    }
}

impl fmt::Display for SystemConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "m_star_ratio = {}", self.material.mass_ratio)?;
        writeln!(f, "epsilon_r = {}", self.material.epsilon_r)?;
        writeln!(f, "g_star = {}", self.material.g_star_abs)?;
        writeln!(f, "hw_rho_mev = {}", self.trap.hw_rho)?;
        writeln!(f, "hw_z_mev = {}", self.trap.hw_z)?;
        writeln!(f, "M = {}", self.trap.m)?;
        if let Some(b) = self.trap.beta_override {
            writeln!(f, "beta = {b}")?;
        }
        Ok(())
    }
}
