use std::io::Write;
use std::process::{Command, Output};

use twobody_core::equilibria::gm_value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twobody")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

fn csv(text: &str) -> (Vec<&str>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn fig4b_config() -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "# GaAs dot\nm_star_ratio = 0.067\nepsilon_r = 12\ng_star = 0.3\nhw_rho_mev = 2\nhw_z_mev = 8\nM = 1").unwrap();
    f
}

#[test]
fn convert_reports_scales() {
    let cfg = fig4b_config();
    let doc = json(&["convert", "--config", cfg.path().to_str().unwrap()]);
    assert!((doc["q_dia"].as_f64().unwrap() - 0.68).abs() < 0.01);
    let doc = json(&["convert", "--hw-rho", "1", "--hw-z", "4"]);
    assert!((doc["L_dia_over_hbar"].as_f64().unwrap() - 1.85).abs() < 0.01);
}

#[test]
fn config_errors_exit_2() {
    let out = run(&["convert", "--config", "/definitely/missing.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "m_star_ratio = 0.067\nepsilon_r = twelve").unwrap();
    let out = run(&["convert", "--config", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = run(&["surface", "--u", "1", "--v", "1", "--grid", "rho:0:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_3() {
    assert_eq!(run(&["vstar", "--u=-1", "--p", "1"]).status.code(), Some(3));
    assert_eq!(run(&["surface", "--u", "1", "--v", "1", "--grid", "rho:0:1:2,z:0:1:2"]).status.code(), Some(3));
}

#[test]
fn surface_shows_two_off_plane_minima() {
    let text = stdout(&["surface", "--u", "6", "--v", "2.75", "--p", "1", "--grid", "rho:0.05:1.5:30,z:-1.5:1.5:61"]);
    let (header, rows) = csv(&text);
    assert_eq!(header, ["rho", "z", "E"]);
    assert_eq!(rows.len(), 30 * 61);
    let at = |i: usize, j: usize| rows[i * 61 + j][2];
    let mut minima = Vec::new();
    for i in 1..29 {
        for j in 1..60 {
            let e = at(i, j);
            if e < at(i - 1, j) && e < at(i + 1, j) && e < at(i, j - 1) && e < at(i, j + 1) {
                minima.push(rows[i * 61 + j][1]);
            }
        }
    }
    assert_eq!(minima.len(), 2);
    assert!(minima[0] < 0.0 && minima[1] > 0.0);
}

#[test]
fn fig2_slice_is_flat_in_v_on_the_plane() {
    let text = stdout(&["surface", "--u", "6", "--v", "1", "--fig2", "--vstar", "3", "--grid", "v:0.5:6:12,z:0:0.5:3"]);
    let (header, rows) = csv(&text);
    assert_eq!(header, ["v", "z", "E"]);
    let plane: Vec<f64> = rows.iter().filter(|r| r[1] == 0.0).map(|r| r[2]).collect();
    assert_eq!(plane.len(), 12);
    assert!(plane.iter().all(|&e| e == plane[0]));
}

#[test]
fn phase_diagram_contours_lie_on_the_boundary() {
    let text = stdout(&["phase-diagram", "--u", "0:4:9", "--p", "0:4:5", "--vstar-contours", "1,2"]);
    let (grid, contours) = text.split_once("\n\n").unwrap();
    let (header, rows) = csv(grid);
    assert_eq!(header, ["u", "p", "E_S"]);
    assert_eq!(rows.len(), 45);
    let mut lines = contours.lines();
    assert_eq!(lines.next(), Some("curve,u,p"));
    let mut seen = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let (u, p): (f64, f64) = (cells[1].parse().unwrap(), cells[2].parse().unwrap());
        match cells[0] {
            "minimal_band" | "vstar=1" => assert_eq!(u, p),
            "vstar=2" => {
                assert!((gm_value(p, u, 2.0, 1.0) - 1.0).abs() < 1e-10);
                seen += 1;
            }
            other => panic!("unexpected curve {other}"),
        }
    }
    assert!(seen > 0);
}

#[test]
fn eadd_staircase_and_zero_field() {
    let cfg = fig4b_config();
    let text = stdout(&["eadd", "--config", cfg.path().to_str().unwrap()]);
    let (header, rows) = csv(&text);
    assert_eq!(header, ["B_tesla", "u", "m_opt", "M_S", "E_add_mev", "E_add_Edia"]);
    assert_eq!(rows.len(), 241);
    assert_eq!((rows[0][2], rows[0][3]), (0.0, 0.0));
    assert!(rows.windows(2).all(|w| w[0][2] <= w[1][2]));
    assert!(rows.iter().all(|r| r[3] == -(r[2] % 2.0)));
}

#[test]
fn eadd_map_m_emits_one_block_per_exponent() {
    let text = stdout(&["eadd", "--hw-rho", "0.7913", "--hw-z", "3.1652", "--B", "0:10:1", "--map-M", "1,3,6"]);
    let (header, rows) = csv(&text);
    assert_eq!(header[0], "M");
    assert_eq!(rows.len(), 33);
    for (block, m) in [1.0, 3.0, 6.0].into_iter().enumerate() {
        assert!(rows[block * 11..(block + 1) * 11].iter().all(|r| r[0] == m));
    }
}

#[test]
fn g4_rescaling_keeps_dimensionless_columns() {
    let cfg = fig4b_config();
    let path = cfg.path().to_str().unwrap();
    let base_text = stdout(&["eadd", "--config", path, "--B", "0:12:0.5"]);
    let scaled_text = stdout(&["eadd", "--config", path, "--B", "0:12:0.5", "--g4-a", "2"]);
    let (_, base) = csv(&base_text);
    let (_, scaled) = csv(&scaled_text);
    for (a, b) in base.iter().zip(&scaled) {
        assert_eq!(b[0], 4.0 * a[0]);
        assert_eq!(&a[1..], &b[1..]);
    }
}

#[test]
fn vstar_methods_agree() {
    let doc = json(&["vstar", "--u", "6", "--p", "1", "--M", "1", "--compare"]);
    let b = doc["bisect"].as_f64().unwrap();
    for key in ["closed", "series"] {
        assert!((doc[key].as_f64().unwrap() - b).abs() < 1e-8);
    }
    let doc = json(&["vstar", "--u", "6", "--p", "1", "--M", "3", "--compare"]);
    assert!(doc["closed"].is_null());
}

#[test]
fn series_prints_exact_coefficients() {
    let text = stdout(&["series", "--M", "6", "--terms", "8"]);
    let coeffs: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(coeffs, ["1", "-2", "5", "-14", "42", "-132", "429", "-1430"]);
    assert!(stdout(&["series", "--M", "3", "--terms", "3"]).contains("2,-5/4"));
}

#[test]
fn modes_json() {
    let doc = json(&["modes", "--u", "0", "--v", "0.5", "--M", "1"]);
    assert_eq!(doc["stability"], "A");
    assert!((doc["omega_rho"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-10);
}

#[test]
fn verify_passes_and_output_is_deterministic() {
    let a = stdout(&["verify", "--n", "40"]);
    assert!(a.lines().skip(1).all(|l| l.split(',').nth(1) == Some("pass")), "{a}");
    assert_eq!(a, stdout(&["verify", "--n", "40"]));
}
