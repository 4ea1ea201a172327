//! End-to-end tests that drive the compiled binary: exit codes, CSV shape,
//! flag precedence, and byte-level reproducibility.

use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

const BASE_MODEL: &str = "[model]\n\
rho = 0.9\n\
sigma_eps = 1.0\n\
alpha = 0.5\n\
sigma_nu = 1.0\n\
sigma_eta = 0.5\n\
gamma = 2.0\n";

const SMALL_SIM: &str = "[simulation]\n\
n_agents = 300\n\
horizon = 60\n\
burn_in = 20\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dispersion"))
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Parse the comma-separated floats of a single CSV data row.
fn row_floats(line: &str) -> Vec<f64> {
    line.split(',').map(|f| f.parse().unwrap()).collect()
}

#[test]
fn steady_state_emits_the_closed_form_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.toml", BASE_MODEL);
    let out = run(&["steady-state", "-c", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));

    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "v_star,v_eq,var_theta,var_gap,cov_m_theta"
    );
    let vals = row_floats(lines.next().unwrap());
    assert!((vals[0] - 2.0 / 3.0).abs() < 1e-12, "v_star {}", vals[0]);
    assert!((vals[1] - 1.0 / 3.0).abs() < 1e-12, "v_eq {}", vals[1]);
    assert!((vals[2] - 1.0 / (1.0 - 0.81)).abs() < 1e-12);
    assert_eq!(lines.next(), None);
}

#[test]
fn invalid_alpha_is_a_config_failure_naming_the_field() {
    let dir = TempDir::new().unwrap();
    let bad = BASE_MODEL.replace("alpha = 0.5", "alpha = 2.0");
    let cfg = write_config(&dir, "run.toml", &bad);
    let out = run(&["steady-state", "-c", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("alpha"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.toml", &format!("{BASE_MODEL}sigma_nuu = 1.0\n"));
    let out = run(&["steady-state", "-c", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("sigma_nuu"));
}

#[test]
fn missing_config_file_is_a_config_failure() {
    let out = run(&["steady-state", "-c", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("cannot read config"));
}

#[test]
fn simulate_rejects_horizon_not_beyond_burn_in() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "run.toml",
        &format!("{BASE_MODEL}[simulation]\nn_agents = 100\nhorizon = 50\nburn_in = 50\n"),
    );
    let out = run(&["simulate", "-c", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("burn"));
}

#[test]
fn simulate_is_byte_reproducible_and_echoes_the_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.toml", &format!("{BASE_MODEL}{SMALL_SIM}"));
    let a = run(&["simulate", "-c", cfg.to_str().unwrap()]);
    let b = run(&["simulate", "-c", cfg.to_str().unwrap()]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stderr_str(&a).contains("master_seed = 42"));

    let text = stdout_str(&a);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "time,theta,mean_belief,var_belief,mean_payoff"
    );
    // horizon 60, burn_in 20: snapshots for t = 21..=60.
    assert_eq!(lines.count(), 40);
}

#[test]
fn simulate_seed_flag_overrides_config_and_changes_the_draws() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "run.toml",
        &format!("{BASE_MODEL}{SMALL_SIM}[seed]\nmaster_seed = 7\n"),
    );
    let from_file = run(&["simulate", "-c", cfg.to_str().unwrap()]);
    assert!(stderr_str(&from_file).contains("master_seed = 7"));

    let from_flag = run(&["simulate", "-c", cfg.to_str().unwrap(), "--seed", "99"]);
    assert!(stderr_str(&from_flag).contains("master_seed = 99"));
    assert_ne!(from_file.stdout, from_flag.stdout);

    let again = run(&["simulate", "-c", cfg.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(from_file.stdout, again.stdout);
}

#[test]
fn output_file_holds_exactly_the_stdout_bytes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.toml", &format!("{BASE_MODEL}{SMALL_SIM}"));
    let to_stdout = run(&["simulate", "-c", cfg.to_str().unwrap()]);

    let out_path = dir.path().join("panel.csv");
    let to_file = run(&[
        "simulate",
        "-c",
        cfg.to_str().unwrap(),
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&out_path).unwrap(), to_stdout.stdout);
}

#[test]
fn output_path_from_config_is_used_when_no_flag_is_given() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("from_config.csv");
    let cfg = write_config(
        &dir,
        "run.toml",
        &format!(
            "{BASE_MODEL}{SMALL_SIM}[output]\npath = \"{}\"\nformat = \"csv\"\n",
            out_path.display()
        ),
    );
    let out = run(&["simulate", "-c", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&out_path)
        .unwrap()
        .starts_with("time,theta"));
}

#[test]
fn welfare_emits_grid_rows_and_an_optimum_footer() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "run.toml",
        &format!("{BASE_MODEL}[omega]\nfamily = \"sqrt\"\nscale = 1.0\n"),
    );
    let out = run(&[
        "welfare",
        "-c",
        cfg.to_str().unwrap(),
        "--v-min",
        "0",
        "--v-max",
        "2",
        "--points",
        "5",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "v,misallocation_gap,dispersion_cost,exploration_benefit,W,Y_expected"
    );
    // 5 grid rows plus the optimum footer.
    assert_eq!(lines.len(), 7);
    let footer = lines[6];
    assert!(footer.starts_with("# v_opt="), "footer: {footer}");
    let (v_part, w_part) = footer
        .strip_prefix("# v_opt=")
        .unwrap()
        .split_once(",W_opt=")
        .unwrap();
    // sqrt(scale 1), gamma 2: W(v) = 2 sqrt(v) - v peaks at v = 1, W = 1.
    assert!((v_part.parse::<f64>().unwrap() - 1.0).abs() < 1e-8);
    assert!((w_part.parse::<f64>().unwrap() - 1.0).abs() < 1e-8);
    // Second row is v = 0.5: benefit 2 sqrt(0.5), cost -0.5.
    let vals = row_floats(lines[2]);
    assert!((vals[0] - 0.5).abs() < 1e-15);
    assert!((vals[3] - 2.0 * 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn welfare_without_an_interior_optimum_warns_and_omits_the_footer() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "run.toml",
        &format!("{BASE_MODEL}[omega]\nfamily = \"linear\"\nscale = 1.0\n"),
    );
    let out = run(&["welfare", "-c", cfg.to_str().unwrap(), "--points", "3"]);
    assert!(out.status.success());
    assert!(stderr_str(&out).contains("no interior optimum"));
    assert!(!stdout_str(&out).contains("# v_opt"));
}

#[test]
fn welfare_rejects_degenerate_grids() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.toml", BASE_MODEL);
    let one_point = run(&["welfare", "-c", cfg.to_str().unwrap(), "--points", "1"]);
    assert_eq!(one_point.status.code(), Some(2));

    let inverted = run(&[
        "welfare",
        "-c",
        cfg.to_str().unwrap(),
        "--v-min",
        "2",
        "--v-max",
        "1",
    ]);
    assert_eq!(inverted.status.code(), Some(2));
}

#[test]
fn optimize_reports_the_noise_level_implementing_the_optimum() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "run.toml",
        &format!("{BASE_MODEL}[omega]\nfamily = \"sqrt\"\nscale = 1.0\n"),
    );
    let out = run(&["optimize", "-c", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "v_opt,W_opt,sigma_eta_star");
    let vals = row_floats(lines.next().unwrap());
    // v_opt = 1; sigma_eta* solves v*(sigma) = 1 at alpha 0.5, sigma_nu 1:
    // sigma^2 = 0.75 - 0.25 = 0.5.
    assert!((vals[0] - 1.0).abs() < 1e-8);
    assert!((vals[1] - 1.0).abs() < 1e-8);
    assert!((vals[2] - 0.5f64.sqrt()).abs() < 1e-8);
}

#[test]
fn optimize_below_the_noise_floor_is_infeasible() {
    let dir = TempDir::new().unwrap();
    // sigma_nu 2 pushes the no-experimentation floor to 4/3 > v_opt = 1.
    let body = BASE_MODEL.replace("sigma_nu = 1.0", "sigma_nu = 2.0");
    let cfg = write_config(
        &dir,
        "run.toml",
        &format!("{body}[omega]\nfamily = \"sqrt\"\nscale = 1.0\n"),
    );
    let out = run(&["optimize", "-c", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_str(&out);
    assert!(err.contains("infeasible"), "stderr: {err}");
    assert!(err.contains("signal-noise floor"), "stderr: {err}");
}

#[test]
fn optimize_with_unbounded_welfare_reports_no_optimum() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "run.toml",
        &format!("{BASE_MODEL}[omega]\nfamily = \"linear\"\nscale = 1.0\n"),
    );
    let out = run(&["optimize", "-c", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_str(&out).contains("no interior optimum"));
}

#[test]
fn compare_walks_the_noise_grid_from_the_flag() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.toml", BASE_MODEL);
    let out = run(&[
        "compare",
        "-c",
        cfg.to_str().unwrap(),
        "--sigma-eta-grid",
        "0,0.5",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sigma_eta,v_star,w_star,w_eq,dominates");
    assert_eq!(lines.len(), 3);
    let first = row_floats(&lines[1].replace("true", "1").replace("false", "0"));
    assert_eq!(first[0], 0.0);
    // sigma_eta 0 collapses both regimes, so dominance is impossible.
    assert_eq!(first[4], 0.0);
    let second: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(second[0].parse::<f64>().unwrap(), 0.5);
}

#[test]
fn compare_rejects_a_malformed_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.toml", BASE_MODEL);
    let out = run(&[
        "compare",
        "-c",
        cfg.to_str().unwrap(),
        "--sigma-eta-grid",
        "0,abc",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_emits_one_row_per_cell_and_replication() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "run.toml",
        &format!(
            "{BASE_MODEL}[simulation]\nn_agents = 120\nhorizon = 40\nburn_in = 10\n\
[sweep]\nalpha = [0.3, 0.5]\nsigma_nu = [0.5, 1.0]\nreplications = 2\n"
        ),
    );
    let out = run(&["sweep", "-c", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let err = stderr_str(&out);
    assert!(err.contains("master_seed = 42"));
    assert!(err.contains("4 cells x 2 replications = 8 rows"));

    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "rho,sigma_eps,alpha,sigma_nu,sigma_eta,gamma,replication,\
v_star_analytic,v_eq_analytic,W_star,W_eq,dominates,mc_var_belief,mc_rel_err,error"
    );
    assert_eq!(lines.len(), 9);
    for row in &lines[1..] {
        assert_eq!(row.split(',').count(), 15);
        assert!(row.ends_with(','), "ok row has empty error field: {row}");
    }
}

#[test]
fn sweep_records_per_cell_failures_without_aborting() {
    let dir = TempDir::new().unwrap();
    // alpha 1.9 is valid, alpha 2.5 is not: the bad cell must carry an error
    // while the good cell still produces numbers.
    let cfg = write_config(
        &dir,
        "run.toml",
        &format!(
            "{BASE_MODEL}[simulation]\nn_agents = 60\nhorizon = 30\nburn_in = 5\n\
[sweep]\nalpha = [0.5, 2.5]\n"
        ),
    );
    let out = run(&["sweep", "-c", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    let bad: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(bad[2].parse::<f64>().unwrap(), 2.5);
    assert!(bad[7].is_empty(), "failed cell has no numbers: {}", lines[2]);
    assert!(lines[2].contains("alpha"), "error names the field: {}", lines[2]);
}

#[test]
fn sweep_without_a_sweep_section_is_a_config_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.toml", BASE_MODEL);
    let out = run(&["sweep", "-c", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("sweep"));
}

#[test]
fn sweep_bytes_do_not_depend_on_worker_count() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "run.toml",
        &format!(
            "{BASE_MODEL}[simulation]\nn_agents = 150\nhorizon = 40\nburn_in = 10\n\
[sweep]\nalpha = [0.3, 0.7]\nsigma_eta = [0.2, 0.6]\nreplications = 2\n"
        ),
    );
    let one = run(&["sweep", "-c", cfg.to_str().unwrap(), "--workers", "1"]);
    let eight = run(&["sweep", "-c", cfg.to_str().unwrap(), "--workers", "8"]);
    assert!(one.status.success());
    assert!(eight.status.success());
    assert_eq!(one.stdout, eight.stdout);
}

#[test]
fn tradeoff_curve_reports_its_peak_in_the_footer() {
    let out = run(&["tradeoff"]);
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,benefit,cost,net");
    assert_eq!(lines.len(), 203);
    let footer = lines[202];
    let (x_part, net_part) = footer
        .strip_prefix("# argmax_x=")
        .unwrap()
        .split_once(",net_max=")
        .unwrap();
    assert!((x_part.parse::<f64>().unwrap() - 0.6).abs() < 1e-10);
    assert!((net_part.parse::<f64>().unwrap() - 0.18).abs() < 1e-10);
}
