//! Brute-force checks of the analytic results: grid search plus local
//! refinement of the effective potential, finite-difference derivatives and
//! numerical normal modes. Used by the test suite and `twobody verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibria::{asymmetric_state, gm_value, p_max, r_a, reduced_potential, symmetric_state};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::modes::{a_modes, cm_modes, s_modes, Stability};

/// Central-difference gradient; `h = None` uses `1e−5·max(1, |x_i|)`.
pub fn fd_gradient<F, const N: usize>(f: F, x: [f64; N], h: Option<f64>) -> [f64; N]
where
    F: Fn(&[f64; N]) -> f64,
{
    let mut g = [0.0; N];
    for i in 0..N {
        let hi = h.unwrap_or(1e-5 * x[i].abs().max(1.0));
        let (mut a, mut b) = (x, x);
        a[i] += hi;
        b[i] -= hi;
        g[i] = (f(&a) - f(&b)) / (2.0 * hi);
    }
    g
}

/// Central-difference Hessian, symmetric by construction. Without an explicit
/// step, two steps `1e−3·max(1,|x|)` and half that are Richardson-combined.
pub fn fd_hessian<F, const N: usize>(f: F, x: [f64; N], h: Option<f64>) -> [[f64; N]; N]
where
    F: Fn(&[f64; N]) -> f64,
{
    match h {
        Some(h) => central_hessian(&f, x, [h; N]),
        None => {
            let coarse: [f64; N] = std::array::from_fn(|i| 1e-3 * x[i].abs().max(1.0));
            let fine = coarse.map(|s| 0.5 * s);
            let (c, d) = (central_hessian(&f, x, coarse), central_hessian(&f, x, fine));
            std::array::from_fn(|i| std::array::from_fn(|j| (4.0 * d[i][j] - c[i][j]) / 3.0))
        }
    }
}

fn central_hessian<F, const N: usize>(f: &F, x: [f64; N], step: [f64; N]) -> [[f64; N]; N]
where
    F: Fn(&[f64; N]) -> f64,
{
    let mut out = [[0.0; N]; N];
    let f0 = f(&x);
    for i in 0..N {
        let hi = step[i];
        let (mut a, mut b) = (x, x);
        a[i] += hi;
        b[i] -= hi;
        out[i][i] = (f(&a) - 2.0 * f0 + f(&b)) / (hi * hi);
        for j in 0..i {
            let hj = step[j];
            let shifted = |si: f64, sj: f64| {
                let mut y = x;
                y[i] += si * hi;
                y[j] += sj * hj;
                f(&y)
            };
            let v = (shifted(1.0, 1.0) - shifted(1.0, -1.0) - shifted(-1.0, 1.0) + shifted(-1.0, -1.0))
                / (4.0 * hi * hj);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// Eigenvalues of a symmetric 2×2 matrix, larger first.
pub fn eig2(k: [[f64; 2]; 2]) -> [f64; 2] {
    let mean = 0.5 * (k[0][0] + k[1][1]);
    let rad = (0.25 * (k[0][0] - k[1][1]).powi(2) + k[0][1] * k[1][0]).sqrt();
    [mean + rad, mean - rad]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub n_rho: usize,
    /// Upper end of `z` as a multiple of `r_A(v, M)`.
    pub z_over_ra: f64,
    pub n_z: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { rho_lo: 1e-3, rho_hi: 5.0, n_rho: 400, z_over_ra: 3.0, n_z: 400 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleMinimum {
    pub rho: f64,
    pub z: f64,
    pub energy: f64,
    pub grad_norm: f64,
}

/// `V_eff` without the constant `−u p`, evaluated at `(|ρ|, |z|)`; the
/// singular points map to `+∞`.
fn shape(x: &[f64; 2], p: f64, u: f64, v: f64, m: f64) -> f64 {
    reduced_potential(x[0].abs(), x[1].abs(), p, u, v, m).map(|e| e + u * p).unwrap_or(f64::INFINITY)
}

fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    const R: f64 = 0.618_033_988_749_894_9;
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - R * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + R * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Global minimum of `V_eff` over `ρ ≥ 0, z ≥ 0`: coarse grid (log in `ρ`,
/// linear in `z`, `ρ = 0` added when `p = 0`), coordinate-wise golden
/// sections, then Newton steps on finite-difference derivatives.
pub fn minimize_veff(u: f64, v: f64, p: f64, m: f64, grid: &GridSpec) -> Result<OracleMinimum> {
    let f = |x: &[f64; 2]| shape(x, p, u, v, m);
    let ln_lo = grid.rho_lo.ln();
    let ln_step = (grid.rho_hi.ln() - ln_lo) / (grid.n_rho - 1) as f64;
    let mut rhos: Vec<f64> = (0..grid.n_rho).map(|i| (ln_lo + ln_step * i as f64).exp()).collect();
    if p == 0.0 {
        rhos.insert(0, 0.0);
    }
    let z_hi = grid.z_over_ra * r_a(v, m);
    let dz = z_hi / (grid.n_z - 1) as f64;

    let mut best = ([0.0, 0.0], f64::INFINITY);
    for &rho in &rhos {
        for j in 0..grid.n_z {
            let x = [rho, dz * j as f64];
            let e = f(&x);
            if e < best.1 {
                best = (x, e);
            }
        }
    }
    if !best.1.is_finite() {
        return Err(Error::Convergence("no finite grid value".into()));
    }

    let mut x = best.0;
    let mut span = [x[0].max(grid.rho_lo) * (2.0 * ln_step).exp_m1() + grid.rho_lo, 2.0 * dz];
    for _ in 0..60 {
        let prev = x;
        for i in 0..2 {
            let line = |t: f64| {
                let mut y = x;
                y[i] = t;
                f(&y)
            };
            x[i] = golden(line, x[i] - span[i], x[i] + span[i]);
        }
        let moved = (x[0] - prev[0]).abs().max((x[1] - prev[1]).abs());
        span = [span[0].min(4.0 * moved + 1e-9), span[1].min(4.0 * moved + 1e-9)];
        if moved < 1e-12 {
            break;
        }
    }
    x = [x[0].abs(), x[1].abs()];

    for _ in 0..50 {
        let g = fd_gradient(f, x, None);
        if g[0].hypot(g[1]) < 1e-11 {
            break;
        }
        let hm = fd_hessian(f, x, None);
        let det = hm[0][0] * hm[1][1] - hm[0][1] * hm[1][0];
        if !(det > 0.0 && hm[0][0] > 0.0) {
            break;
        }
        let step = [
            -(hm[1][1] * g[0] - hm[0][1] * g[1]) / det,
            -(hm[0][0] * g[1] - hm[1][0] * g[0]) / det,
        ];
        let trial = [(x[0] + step[0]).abs(), (x[1] + step[1]).abs()];
        if !(f(&trial) <= f(&x) + 1e-14 * f(&x).abs()) {
            break;
        }
        let done = step[0].abs().max(step[1].abs()) < 1e-15;
        x = trial;
        if done {
            break;
        }
    }
    let g = fd_gradient(f, x, None);
    let grad_norm = g[0].hypot(g[1]);
    if !(grad_norm < 1e-8) {
        return Err(Error::Convergence(format!("gradient norm {grad_norm:e} at ({}, {})", x[0], x[1])));
    }
    Ok(OracleMinimum { rho: x[0], z: x[1], energy: f(&x) - u * p, grad_norm })
}

/// Signed squared frequencies from the finite-difference Hessian of
/// `V_eff` at `at`, larger first. On the axis (`p = 0`, `ρ = 0`) the radial
/// curvature is multiplied by 4, the `|p| → 0` limit of the centrifugal
/// problem.
pub fn numeric_modes(u: f64, v: f64, p: f64, m: f64, at: [f64; 2]) -> [f64; 2] {
    let f = |x: &[f64; 2]| shape(x, p, u, v, m);
    let mut hm = fd_hessian(f, at, None);
    if p == 0.0 && at[0] == 0.0 {
        hm[0][0] *= 4.0;
    }
    eig2(hm)
}

/// Centre-of-mass potential `p*²/(2ρ²) + ½(1+u²)ρ² − u p* + ½v²z²`.
pub fn cm_potential(rho: f64, z: f64, p_star: f64, u: f64, v: f64) -> f64 {
    p_star * p_star / (2.0 * rho * rho) + 0.5 * (1.0 + u * u) * rho * rho - u * p_star + 0.5 * v * v * z * z
}

/// Frequencies of the centre of mass from the Hessian at its equilibrium
/// `ρ² = |p*|/√(1+u²)`, `z = 0`.
pub fn numeric_cm_modes(u: f64, v: f64, p_star: f64) -> (f64, f64) {
    let rho = (p_star.abs() / (1.0 + u * u).sqrt()).sqrt();
    let hm = fd_hessian(|x: &[f64; 2]| cm_potential(x[0], x[1], p_star, u, v) + u * p_star, [rho, 0.0], None);
    (hm[0][0].sqrt(), hm[1][1].sqrt())
}

/// One sampled parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuple {
    pub u: f64,
    pub v: f64,
    pub p: f64,
    pub m: f64,
}

pub const SAMPLE_MS: [f64; 5] = [0.5, 1.0, 2.0, 3.0, 6.0];

/// Seeded parameter points with `u ∈ [0, 10]`, `v ∈ [0.3, 6]`,
/// `M ∈ {0.5, 1, 2, 3, 6}` and `p` spread over both families. Points within
/// 0.01 of the boundary or with `ρ > 4` are redrawn.
pub fn sample_tuples(seed: u64, n: usize) -> Vec<Tuple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u = rng.random_range(0.0..10.0);
        let v = rng.random_range(0.3..6.0);
        let m = SAMPLE_MS[rng.random_range(0..SAMPLE_MS.len())];
        let scale = p_max(u, v, m).unwrap_or(1.0).max(0.5);
        let p = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..2.0 * scale) };
        let g = gm_value(p, u, v, m);
        if (g - 1.0).abs() < 0.01 {
            continue;
        }
        let rho = if g < 1.0 {
            asymmetric_state(u, v, p, m).map(|s| s.rho)
        } else {
            symmetric_state(p, u, m).map(|s| s.rho)
        };
        match rho {
            Ok(r) if r <= 4.0 => out.push(Tuple { u, v, p, m }),
            _ => continue,
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TupleCheck {
    pub tuple: Tuple,
    pub family: Stability,
    pub d_energy: f64,
    pub d_rho: f64,
    pub d_z: f64,
    /// FD gradient norm at the analytic equilibrium.
    pub analytic_grad: f64,
    /// Largest relative mismatch of the two relative-motion frequencies.
    pub mode_rel: f64,
    pub cm_rel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub energy: f64,
    pub position: f64,
    pub gradient: f64,
    pub mode_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { energy: 1e-8, position: 1e-6, gradient: 1e-6, mode_rel: 1e-5 }
    }
}

impl TupleCheck {
    pub fn equilibrium_ok(&self, tol: &Tolerances) -> bool {
        self.d_energy <= tol.energy && self.d_rho <= tol.position && self.d_z <= tol.position
            && self.analytic_grad <= tol.gradient
    }

    pub fn modes_ok(&self, tol: &Tolerances) -> bool {
        self.mode_rel <= tol.mode_rel && self.cm_rel <= tol.mode_rel
    }
}

/// Compares every analytic quantity at one tuple with its brute-force value.
pub fn check_tuple(t: &Tuple) -> Result<TupleCheck> {
    let Tuple { u, v, p, m } = *t;
    let (family, rho, z, energy, modes) = if gm_value(p, u, v, m) < 1.0 {
        let s = asymmetric_state(u, v, p, m)?;
        (Stability::A, s.rho, s.z, s.energy, a_modes(u, v, p, m)?)
    } else {
        let s = symmetric_state(p, u, m)?;
        let ms = s_modes(u, v, p, m)?;
        (ms.stability, s.rho, 0.0, s.energy, ms)
    };
    let found = minimize_veff(u, v, p, m, &GridSpec::default())?;
    let f = |x: &[f64; 2]| shape(x, p, u, v, m);
    let g = fd_gradient(f, [rho, z], None);
    let analytic_grad = if p == 0.0 && rho == 0.0 { g[1].abs() } else { g[0].hypot(g[1]) };

    let num = numeric_modes(u, v, p, m, [rho, z]);
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
    let mode_rel = rel(modes.omega_hi, num[0].max(0.0).sqrt()).max(rel(modes.omega_lo, num[1].max(0.0).sqrt()));
    let (cr, cz) = cm_modes(u, v);
    let (nr, nz) = numeric_cm_modes(u, v, 1.0);
    Ok(TupleCheck {
        tuple: *t,
        family,
        d_energy: (found.energy - energy).abs(),
        d_rho: (found.rho - rho).abs(),
        d_z: (found.z - z).abs(),
        analytic_grad,
        mode_rel,
        cm_rel: rel(cr, nr).max(rel(cz, nz)),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub checks: Vec<std::result::Result<TupleCheck, String>>,
}

impl SuiteReport {
    pub fn failures(&self, tol: &Tolerances) -> usize {
        self.checks
            .iter()
            .filter(|c| !matches!(c, Ok(c) if c.equilibrium_ok(tol) && c.modes_ok(tol)))
            .count()
    }

    pub fn ok(&self) -> impl Iterator<Item = &TupleCheck> {
        self.checks.iter().filter_map(|c| c.as_ref().ok())
    }

    pub fn max_of(&self, key: impl Fn(&TupleCheck) -> f64) -> f64 {
        self.ok().map(key).fold(0.0, f64::max)
    }
}

pub fn run_suite(seed: u64, n: usize, exec: Execution) -> SuiteReport {
    let tuples = sample_tuples(seed, n);
    let checks = exec.map(&tuples, |t| check_tuple(t).map_err(|e| format!("{t:?}: {e}")));
    SuiteReport { checks }
}
