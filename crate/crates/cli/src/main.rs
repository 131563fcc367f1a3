#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod fmt;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Map, Value};

use twobody_core::equilibria::{p_max, reduced_potential, symmetric_state, vstar, VstarMethod};
use twobody_core::inversion::{f_a_taylor, family_exponent, in_series_domain, invert_series, SeriesBranch};
use twobody_core::modes::{cm_modes, modes_at};
use twobody_core::oracle::{run_suite, Tolerances};
use twobody_core::scaling_groups::{display_factor, g4_action, g7_map};
use twobody_core::spectra::ground_state_scan;
use twobody_core::units::{power_scale, scales_from_physical, MaterialSpec, SystemConfig, TrapSpec};
use twobody_core::{Error, Execution};

use fmt::num;

#[derive(Parser)]
#[command(name = "twobody", version, about = "Two charged particles in a parabolic trap under a magnetic field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the unit system of a configuration as JSON.
    Convert(SystemArgs),
    /// Tabulate the relative-motion potential on a grid.
    Surface(SurfaceArgs),
    /// Symmetric-state energies over (u, p) and the stability contours.
    PhaseDiagram(PhaseArgs),
    /// Ground-state additional energy versus field.
    Eadd(EaddArgs),
    /// Solve for v* with one or all methods.
    Vstar(VstarArgs),
    /// Normal modes at one parameter point.
    Modes(PointArgs),
    /// Coefficients of the inverse series of y(1−y)^a, a = −(M+2)/4.
    Series(SeriesArgs),
    /// Cross-check analytic results against brute-force references.
    #[command(hide = true)]
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SystemArgs {
    /// Key-value config file; overrides the inline flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.067)]
    m_star: f64,
    #[arg(long, default_value_t = 12.0)]
    epsilon_r: f64,
    #[arg(long, default_value_t = 0.3)]
    g_star: f64,
    /// ħω_ρ in meV.
    #[arg(long, required_unless_present = "config")]
    hw_rho: Option<f64>,
    /// ħω_z in meV.
    #[arg(long, required_unless_present = "config")]
    hw_z: Option<f64>,
    #[arg(long = "M", default_value_t = 1.0)]
    m: f64,
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    u: f64,
    #[arg(long)]
    v: f64,
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    #[arg(long = "M", default_value_t = 1.0)]
    m: f64,
}

#[derive(Args)]
struct SurfaceArgs {
    #[command(flatten)]
    point: PointArgs,
    /// `rho:lo:hi:n,z:lo:hi:n`, or `v:lo:hi:n,z:lo:hi:n` with --fig2.
    #[arg(long)]
    grid: String,
    /// Tabulate (v, z, E) at the symmetric radius of --vstar, with p on the boundary.
    #[arg(long, requires = "vstar")]
    fig2: bool,
    #[arg(long)]
    vstar: Option<f64>,
}

#[derive(Args)]
struct PhaseArgs {
    /// `lo:hi:n`
    #[arg(long)]
    u: String,
    /// `lo:hi:n`
    #[arg(long)]
    p: String,
    #[arg(long = "M", default_value_t = 1.0)]
    m: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    vstar_contours: Vec<f64>,
}

#[derive(Args)]
struct EaddArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Field grid `lo:hi:step` in Tesla.
    #[arg(long = "B", default_value = "0:12:0.05")]
    b: String,
    /// Map the trap onto each exponent keeping q⋄ fixed; one block per entry.
    #[arg(long = "map-M", value_delimiter = ',')]
    map_m: Vec<f64>,
    /// Apply the effective-mass/field rescaling with this factor first.
    #[arg(long)]
    g4_a: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Bisect,
    Closed,
    Series,
}

#[derive(Args)]
struct VstarArgs {
    #[arg(long)]
    u: f64,
    #[arg(long)]
    p: f64,
    #[arg(long = "M", default_value_t = 1.0)]
    m: f64,
    #[arg(long, value_enum, default_value = "bisect")]
    method: Method,
    #[arg(long)]
    compare: bool,
}

#[derive(Args)]
struct SeriesArgs {
    #[arg(long = "M")]
    m: f64,
    #[arg(long, default_value_t = 8)]
    terms: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

enum Failure {
    Config(String),
    Domain(String),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Config(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

type Out = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Convert(a) => convert(&a),
        Command::Surface(a) => surface(&a),
        Command::PhaseDiagram(a) => phase_diagram(&a),
        Command::Eadd(a) => eadd(&a),
        Command::Vstar(a) => vstar_cmd(&a),
        Command::Modes(a) => modes_cmd(&a),
        Command::Series(a) => series_cmd(&a),
        Command::Verify(a) => verify(&a),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Verify(text)) => {
            print!("{text}");
            eprintln!("error: verification failed");
            ExitCode::from(4)
        }
    }
}

fn load_system(a: &SystemArgs) -> Result<SystemConfig, Failure> {
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        return text.parse::<SystemConfig>().map_err(|e| Failure::Config(format!("{}: {e}", path.display())));
    }
    let material = MaterialSpec::new(a.m_star, a.epsilon_r, a.g_star).map_err(|e| Failure::Config(e.to_string()))?;
    let (hw_rho, hw_z) = (a.hw_rho.unwrap_or_default(), a.hw_z.unwrap_or_default());
    let trap = TrapSpec::new(hw_rho, hw_z, a.m, a.beta).map_err(|e| Failure::Config(e.to_string()))?;
    Ok(SystemConfig { material, trap })
}

/// `lo:hi:n` with `n ≥ 1` points, endpoints included.
fn linspace(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Config(format!("bad range `{spec}`, expected lo:hi:n"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts[..] else { return Err(bad()) };
    let (lo, hi): (f64, f64) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() || (n > 1 && !(hi > lo)) {
        return Err(bad());
    }
    Ok((0..n).map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect())
}

/// `lo:hi:step`, endpoints included when hit within rounding.
fn stepped(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Config(format!("bad field range `{spec}`, expected lo:hi:step"));
    let vals: Vec<f64> = spec.split(':').map(|s| s.parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let [lo, hi, step] = vals[..] else { return Err(bad()) };
    if !(lo >= 0.0 && hi >= lo && step > 0.0 && hi.is_finite()) {
        return Err(bad());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + step * i as f64).collect())
}

/// `a:lo:hi:n,b:lo:hi:n` with the given axis names.
fn grid2(spec: &str, names: [&str; 2]) -> Result<[Vec<f64>; 2], Failure> {
    let bad = || Failure::Config(format!("bad grid `{spec}`, expected {0}:lo:hi:n,{1}:lo:hi:n", names[0], names[1]));
    let axes: Vec<&str> = spec.split(',').collect();
    let [first, second] = axes[..] else { return Err(bad()) };
    let mut out = [Vec::new(), Vec::new()];
    for (slot, (axis, name)) in out.iter_mut().zip([first, second].into_iter().zip(names)) {
        let rest = axis.strip_prefix(name).and_then(|r| r.strip_prefix(':')).ok_or_else(bad)?;
        *slot = linspace(rest)?;
    }
    Ok(out)
}

fn convert(a: &SystemArgs) -> Out {
    let cfg = load_system(a)?;
    let s = scales_from_physical(&cfg.material, &cfg.trap)?;
    let doc = json!({
        "M": fmt::json(s.m),
        "v": fmt::json(s.v),
        "beta": fmt::json(s.beta),
        "gamma": fmt::json(s.gamma),
        "L_dia_over_hbar": fmt::json(s.l_dia_over_hbar),
        "q_dia": fmt::json(s.q_dia),
        "E_dia_mev": fmt::json(s.e_dia_mev),
        "B_dia_tesla": fmt::json(s.b_dia_tesla),
        "B_bullet_tesla": fmt::json(s.b_bullet_tesla()),
        "E_S": fmt::json(s.e_s),
        "E_S_mev": fmt::json(s.e_s * s.e_dia_mev),
    });
    Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
}

fn surface(a: &SurfaceArgs) -> Out {
    let PointArgs { u, v, p, m } = a.point;
    let exec = Execution::default();
    let mut out = String::new();
    if a.fig2 {
        let vs = a.vstar.expect("clap enforces --vstar");
        let [vs_grid, zs] = grid2(&a.grid, ["v", "z"])?;
        let rho = power_scale(m, -2.0, vs)?;
        let p_b = p_max(u, vs, m)?;
        let rows = exec.map_range(vs_grid.len() * zs.len(), |k| {
            let (vv, z) = (vs_grid[k / zs.len()], zs[k % zs.len()]);
            reduced_potential(rho, z, p_b, u, vv, m).map(|e| fmt::row(&[num(vv), num(z), num(e)]))
        });
        out.push_str("v,z,E\n");
        for r in rows {
            writeln!(out, "{}", r?).unwrap();
        }
    } else {
        let [rhos, zs] = grid2(&a.grid, ["rho", "z"])?;
        let rows = exec.map_range(rhos.len() * zs.len(), |k| {
            let (rho, z) = (rhos[k / zs.len()], zs[k % zs.len()]);
            reduced_potential(rho, z, p, u, v, m).map(|e| fmt::row(&[num(rho), num(z), num(e)]))
        });
        out.push_str("rho,z,E\n");
        for r in rows {
            writeln!(out, "{}", r?).unwrap();
        }
    }
    Ok(out)
}

/// Momentum on the `G_M = 1` surface for a given `v*`, if the field allows it.
fn contour_p(u: f64, vs: f64, m: f64) -> Option<f64> {
    let p2 = (1.0 + u * u - vs * vs) / vs.powf(8.0 / (m + 2.0));
    (p2 >= 0.0).then(|| p2.sqrt())
}

fn phase_diagram(a: &PhaseArgs) -> Out {
    let (us, ps) = (linspace(&a.u)?, linspace(&a.p)?);
    if let Some(bad) = a.vstar_contours.iter().find(|v| !(**v > 0.0)) {
        return Err(Failure::Domain(format!("v* contour values must be positive, got {bad}")));
    }
    let m = a.m;
    let rows = Execution::default().map_range(us.len() * ps.len(), |k| {
        let (u, p) = (us[k / ps.len()], ps[k % ps.len()]);
        symmetric_state(p, u, m).map(|s| fmt::row(&[num(u), num(p), num(s.energy)]))
    });
    let mut out = String::from("u,p,E_S\n");
    for r in rows {
        writeln!(out, "{}", r?).unwrap();
    }
    out.push_str("\ncurve,u,p\n");
    for &vs in &a.vstar_contours {
        for &u in &us {
            if let Some(p) = contour_p(u, vs, m) {
                writeln!(out, "vstar={},{},{}", num(vs), num(u), num(p)).unwrap();
            }
        }
    }
    for &u in &us {
        writeln!(out, "minimal_band,{},{}", num(u), num(u)).unwrap();
    }
    Ok(out)
}

fn eadd(a: &EaddArgs) -> Out {
    let cfg = load_system(&a.system)?;
    let mut fields = stepped(&a.b)?;
    let (mut mat, mut trap) = (cfg.material, cfg.trap);
    if let Some(g) = a.g4_a {
        let (m2, t2, _) = g4_action(g, &mat, &trap, 0.0)?;
        (mat, trap) = (m2, t2);
        fields.iter_mut().for_each(|b| *b *= g * g);
    }
    let mapped = !a.map_m.is_empty();
    let targets = if mapped { a.map_m.clone() } else { vec![trap.m] };
    let mut out = String::from(if mapped {
        "M,g_M,B_tesla,u,m_opt,M_S,E_add_mev,E_add_Edia,gM_E_add\n"
    } else {
        "B_tesla,u,m_opt,M_S,E_add_mev,E_add_Edia\n"
    });
    for target in targets {
        let t = g7_map(target, &mat, &trap)?;
        let s = scales_from_physical(&mat, &t)?;
        let us: Vec<f64> = fields.iter().map(|b| b / s.b_dia_tesla).collect();
        let report = ground_state_scan(&us, s.v, s.q_dia, s.m, s.e_s, Execution::default())?;
        for w in &report.warnings {
            eprintln!("warning: M = {}: {w}", num(target));
        }
        let g = display_factor(target)?;
        for (b, pt) in fields.iter().zip(&report.points) {
            let mut cells = Vec::with_capacity(9);
            if mapped {
                cells.extend([num(target), num(g)]);
            }
            cells.extend([
                num(*b),
                num(pt.u),
                pt.m.to_string(),
                pt.m_s.to_string(),
                num(pt.e_add * s.e_dia_mev),
                num(pt.e_add),
            ]);
            if mapped {
                cells.push(num(g * pt.e_add));
            }
            writeln!(out, "{}", fmt::row(&cells)).unwrap();
        }
    }
    Ok(out)
}

fn vstar_cmd(a: &VstarArgs) -> Out {
    let (p, u, m) = (a.p, a.u, a.m);
    let run = |method: Method| match method {
        Method::Bisect => vstar(p, u, m, VstarMethod::Bisect),
        Method::Closed => vstar(p, u, m, VstarMethod::ClosedM1),
        Method::Series => vstar(p, u, m, VstarMethod::Series),
    };
    let mut doc = Map::new();
    if a.compare {
        let reference = run(Method::Bisect)?;
        doc.insert("bisect".into(), fmt::json(reference));
        for (name, method) in [("closed", Method::Closed), ("series", Method::Series)] {
            match run(method) {
                Ok(x) => {
                    doc.insert(name.into(), fmt::json(x));
                    doc.insert(format!("delta_{name}"), fmt::json(x - reference));
                }
                Err(Error::MethodMismatch { .. }) => {
                    doc.insert(name.into(), Value::Null);
                }
                Err(e) => return Err(e.into()),
            }
        }
        let in_domain = [SeriesBranch::Near, SeriesBranch::Far].into_iter().any(|b| in_series_domain(p, u, m, b));
        doc.insert("series_in_domain".into(), Value::Bool(in_domain));
    } else {
        doc.insert("vstar".into(), fmt::json(run(a.method)?));
    }
    Ok(serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable") + "\n")
}

fn modes_cmd(a: &PointArgs) -> Out {
    let PointArgs { u, v, p, m } = *a;
    let ms = modes_at(u, v, p, m)?;
    let (cr, cz) = cm_modes(u, v);
    let opt = |x: Option<f64>| x.map_or(Value::Null, fmt::json);
    let doc = json!({
        "stability": ms.stability.to_string(),
        "omega_hi": fmt::json(ms.omega_hi),
        "omega_lo": fmt::json(ms.omega_lo),
        "omega_rho": fmt::json(ms.omega_rho()),
        "omega_z": fmt::json(ms.omega_z()),
        "mixing_angle": opt(ms.mixing_angle),
        "unstable_omega_sq": opt(ms.unstable_omega_sq),
        "cm_omega_rho": fmt::json(cr),
        "cm_omega_z": fmt::json(cz),
    });
    Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
}

fn series_cmd(a: &SeriesArgs) -> Out {
    if !(a.m > 0.0) {
        return Err(Failure::Domain(format!("M must be positive, got {}", a.m)));
    }
    if a.terms == 0 {
        return Err(Failure::Domain("need at least one term".into()));
    }
    let mut out = String::from("k,coefficient\n");
    if a.m.fract() == 0.0 && a.m < 1e15 {
        let c = -BigRational::new(BigInt::from(a.m as i64 + 2), BigInt::from(4));
        let inv = invert_series(&f_a_taylor(c, a.terms))?;
        for (k, x) in inv.coeffs.iter().enumerate() {
            writeln!(out, "{},{}", k + 1, x).unwrap();
        }
    } else {
        let inv = invert_series(&f_a_taylor(family_exponent(a.m), a.terms))?;
        for (k, x) in inv.coeffs.iter().enumerate() {
            writeln!(out, "{},{}", k + 1, num(*x)).unwrap();
        }
    }
    Ok(out)
}

fn verify(a: &VerifyArgs) -> Out {
    let tol = Tolerances::default();
    let report = run_suite(a.seed, a.n, Execution::default());
    let mut rows = vec![(
        "oracle",
        report.failures(&tol) == 0,
        format!(
            "{} tuples, max |dE| {}, max mode rel {}",
            report.checks.len(),
            num(report.max_of(|c| c.d_energy)),
            num(report.max_of(|c| c.mode_rel.max(c.cm_rel)))
        ),
    )];
    let mut worst = 0.0f64;
    for i in 0..=20 {
        for j in 0..=20 {
            let (p, u) = (0.25 * i as f64, 0.5 * j as f64);
            let b = vstar(p, u, 1.0, VstarMethod::Bisect)?;
            let c = vstar(p, u, 1.0, VstarMethod::ClosedM1)?;
            worst = worst.max((b - c).abs());
        }
    }
    rows.push(("vstar_closed", worst <= 1e-10, format!("max |closed - bisect| {}", num(worst))));
    let mut worst = 0.0f64;
    for m in [1.0, 3.0, 6.0] {
        for i in 0..=40 {
            let (p, u) = (0.1 * i as f64, 2.0);
            let s = vstar(p, u, m, VstarMethod::Series)?;
            worst = worst.max((s - vstar(p, u, m, VstarMethod::Bisect)?).abs());
        }
    }
    rows.push(("vstar_series", worst <= 1e-8, format!("max |series - bisect| {}", num(worst))));

    let mut out = String::from("check,status,detail\n");
    for (name, ok, detail) in &rows {
        writeln!(out, "{name},{},{detail}", if *ok { "pass" } else { "FAIL" }).unwrap();
    }
    if rows.iter().all(|r| r.1) {
        Ok(out)
    } else {
        Err(Failure::Verify(out))
    }
}
