//! Harmonic quantization around the classical equilibria: level energies,
//! additional energies and the ground state as a function of the field.
//!
//! Energies are in units of `E⋄`. Angular momenta are quantized as
//! `p_φ = m q⋄`, `p_φ* = m* q⋄`.

use crate::equilibria::{asymmetric_state, symmetric_state, u_crit, Family};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::modes::{a_modes, classify_state, s_modes, Stability};
use crate::units::{ModelPoint, ScaleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LevelIndex {
    pub k_rho: u32,
    pub k_z: u32,
    pub m: i64,
    pub k_rho_star: u32,
    pub k_z_star: u32,
    pub m_star: i64,
    /// Spin projection, one of `−1, 0, 1`.
    pub m_s: i8,
}

impl LevelIndex {
    /// Lowest antisymmetric level with relative momentum `m`:
    /// all oscillator quanta zero and `M_S = −mod₂(m)`.
    pub fn ground(m: i64) -> Self {
        Self { m, m_s: -(m.rem_euclid(2) as i8), ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelEnergy {
    pub total: f64,
    pub cm_part: f64,
    pub rel_part: f64,
    pub zeeman_part: f64,
    pub family: Family,
}

/// Fock–Darwin ladder of the centre of mass,
/// `[√(1+u²)(|m*| + 2k_ρ* + 1) − u m* + (½ + k_z*) v] q⋄`.
pub fn cm_level_energy(idx: &LevelIndex, u: f64, v: f64, q_dia: f64) -> f64 {
    let ladder = (idx.m_star.unsigned_abs() + 2 * idx.k_rho_star as u64 + 1) as f64;
    ((1.0 + u * u).sqrt() * ladder - u * idx.m_star as f64 + (0.5 + idx.k_z_star as f64) * v) * q_dia
}

/// Classical energy of the selected family at `p = m q⋄` plus the
/// oscillator ladder of its two normal modes.
pub fn relative_level_energy(idx: &LevelIndex, pt: &ModelPoint) -> Result<(f64, Family)> {
    let p = idx.m as f64 * pt.q_dia;
    let (base, modes, family) = match classify_state(pt.u, pt.v, p, pt.m) {
        Stability::A => {
            let st = asymmetric_state(pt.u, pt.v, p, pt.m)?;
            (st.energy, a_modes(pt.u, pt.v, p, pt.m)?, Family::A)
        }
        Stability::SZero | Stability::SMinus => {
            return Err(Error::Unstable(format!("m = {} at u = {} sits on a zero mode", idx.m, pt.u)));
        }
        Stability::SPlus => {
            let st = symmetric_state(p, pt.u, pt.m)?;
            let ms = s_modes(pt.u, pt.v, p, pt.m)?;
            if ms.stability != Stability::SPlus {
                return Err(Error::Unstable(format!("m = {} at u = {} is {}", idx.m, pt.u, ms.stability)));
            }
            (st.energy, ms, Family::S)
        }
    };
    let ladder = modes.omega_rho() * (idx.k_rho as f64 + 0.5) + modes.omega_z() * (idx.k_z as f64 + 0.5);
    Ok((base + pt.q_dia * ladder, family))
}

/// `ℰ_CM + ℰ_X + u ℰ_S M_S`
pub fn total_energy(idx: &LevelIndex, pt: &ModelPoint, e_s: f64) -> Result<LevelEnergy> {
    let (rel, family) = relative_level_energy(idx, pt)?;
    let cm = cm_level_energy(idx, pt.u, pt.v, pt.q_dia);
    let zeeman = pt.u * e_s * idx.m_s as f64;
    Ok(LevelEnergy { total: cm + rel + zeeman, cm_part: cm, rel_part: rel, zeeman_part: zeeman, family })
}

/// `E_add = −ℰ_CM(k* = 0) + ℰ_X + u ℰ_S M_S`
pub fn additional_energy(idx: &LevelIndex, pt: &ModelPoint, e_s: f64) -> Result<f64> {
    let (rel, _) = relative_level_energy(idx, pt)?;
    let cm0 = cm_level_energy(&LevelIndex::default(), pt.u, pt.v, pt.q_dia);
    Ok(-cm0 + rel + pt.u * e_s * idx.m_s as f64)
}

/// Half-width of the window around `u_crit` where the harmonic result is
/// flagged as unreliable.
pub const CRITICAL_WINDOW: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub u: f64,
    pub m: i64,
    pub m_s: i8,
    pub total: f64,
    pub e_add: f64,
    pub family: Family,
    /// `|u − u_crit(v, m q⋄, M)| < 0.05`.
    pub near_critical: bool,
    /// The minimum sits on the last `m` of the window.
    pub at_window_edge: bool,
}

/// `ceil(3u/q⋄) + 20`
pub fn scan_m_max(u: f64, q_dia: f64) -> i64 {
    (3.0 * u / q_dia).ceil() as i64 + 20
}

/// Ground state at one field: minimizes the total energy over
/// `m ∈ [0, m_max]` with `M_S = −mod₂(m)` and no oscillator quanta.
/// Levels on a zero mode are skipped; ties go to the smaller `m`.
pub fn ground_state(pt: &ModelPoint, e_s: f64) -> Result<ScanPoint> {
    let m_max = scan_m_max(pt.u, pt.q_dia);
    let mut best: Option<(LevelIndex, LevelEnergy)> = None;
    for m in 0..=m_max {
        let idx = LevelIndex::ground(m);
        let lev = match total_energy(&idx, pt, e_s) {
            Ok(l) => l,
            Err(Error::Unstable(_)) => continue,
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|(_, b)| lev.total < b.total) {
            best = Some((idx, lev));
        }
    }
    let (idx, lev) = best.ok_or_else(|| Error::Convergence(format!("no stable level at u = {}", pt.u)))?;
    let e_add = additional_energy(&idx, pt, e_s)?;
    let near_critical = u_crit(pt.v, idx.m as f64 * pt.q_dia, pt.m)
        .map(|uc| (pt.u - uc).abs() < CRITICAL_WINDOW)
        .unwrap_or(false);
    Ok(ScanPoint {
        u: pt.u,
        m: idx.m,
        m_s: idx.m_s,
        total: lev.total,
        e_add,
        family: lev.family,
        near_critical,
        at_window_edge: idx.m == m_max,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub points: Vec<ScanPoint>,
    pub warnings: Vec<String>,
}

/// [`ground_state`] over an ascending grid of `u`, evaluated independently
/// per point and returned in grid order.
pub fn ground_state_scan(
    us: &[f64],
    v: f64,
    q_dia: f64,
    m: f64,
    e_s: f64,
    exec: Execution,
) -> Result<ScanReport> {
    if us.windows(2).any(|w| !(w[0] < w[1])) {
        return crate::error::domain("u grid must be strictly ascending");
    }
    let results = exec.map(us, |&u| ModelPoint::new(u, v, m, q_dia).and_then(|pt| ground_state(&pt, e_s)));
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    let warnings = points
        .iter()
        .filter(|p| p.at_window_edge)
        .map(|p| format!("u = {}: minimum at m_max = {}; scan window too small", p.u, p.m))
        .collect();
    Ok(ScanReport { points, warnings })
}

/// A change of the ground-state `m` between two consecutive grid points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub from_m: i64,
    pub to_m: i64,
    /// Field ratio where the two levels cross.
    pub u: f64,
}

/// Transitions along a scan, each located by bisection on the energy
/// difference of the two ground levels involved.
pub fn transitions(points: &[ScanPoint], v: f64, q_dia: f64, m: f64, e_s: f64) -> Result<Vec<Transition>> {
    let mut out = Vec::new();
    for w in points.windows(2) {
        if w[0].m == w[1].m {
            continue;
        }
        let (a, b) = (LevelIndex::ground(w[0].m), LevelIndex::ground(w[1].m));
        let diff = |u: f64| -> Result<f64> {
            let pt = ModelPoint::new(u, v, m, q_dia)?;
            Ok(total_energy(&b, &pt, e_s)?.total - total_energy(&a, &pt, e_s)?.total)
        };
        let (mut lo, mut hi) = (w[0].u, w[1].u);
        let u = match (diff(lo), diff(hi)) {
            (Ok(dl), Ok(dh)) if dl >= 0.0 && dh <= 0.0 => {
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    match diff(mid) {
                        Ok(d) if d > 0.0 => lo = mid,
                        Ok(_) => hi = mid,
                        Err(_) => break,
                    }
                }
                0.5 * (lo + hi)
            }
            _ => 0.5 * (lo + hi),
        };
        out.push(Transition { from_m: w[0].m, to_m: w[1].m, u });
    }
    Ok(out)
}

/// `B = (L_z/ħ) B•` in Tesla.
pub fn momentum_staircase(s: &ScaleSet, lz_over_hbar: u32) -> f64 {
    lz_over_hbar as f64 * s.b_bullet_tesla()
}
