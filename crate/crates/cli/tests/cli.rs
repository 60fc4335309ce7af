use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use adiabat::experiments::{reproduce_figure, DriveSelector, FrameSelector, Figure};
use adiabat::models::ModelKind;
use adiabat::output::Bundle;
use adiabat::propagator::Method;
use adiabat::schedule::Schedule;
use adiabat_cli::config::DEFAULT_OUTPUT_DIR;
use adiabat_cli::parse_config;
use adiabat_cli::plot::{emit_plot_script, plot_script};

const MINIMAL: &str = "[model]\nkind = spin_sweep\n\n[propagation]\nepsilon = 0.2\nsteps = 20000\n";

fn adiabat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adiabat")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("scenario.conf");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn minimal_config_fills_defaults() {
    let c = parse_config(MINIMAL).unwrap();
    let s = &c.scenario;
    assert_eq!(s.model.kind(), ModelKind::SpinSweep);
    assert_eq!(s.model.schedule("theta"), Some(&Schedule::default_ramp()));
    assert_eq!((s.epsilon(), s.propagation.steps, s.propagation.record_stride), (0.2, 20_000, 5));
    assert_eq!(s.propagation.method, Method::MidpointExponential);
    assert_eq!(s.frames_to_track, vec![FrameSelector::Numeric(0)]);
    assert_eq!((s.frame_points, s.initial_state), (4001, 0));
    assert_eq!(s.drive, DriveSelector::None);
    assert_eq!(c.output_dir, Path::new(DEFAULT_OUTPUT_DIR));
    assert!(c.emit_plots);
    assert_eq!(c.sweep.epsilons, None);
    assert_eq!(c.sweep.orders, vec![0, 1, 2, 3]);
}

#[test]
fn negative_epsilon_is_reported_with_its_line() {
    let e = parse_config("[model]\nkind = spin_sweep\n[propagation]\nepsilon = -0.1\n").unwrap_err();
    assert_eq!(e.0.len(), 1);
    assert_eq!(e.0[0].line, Some(4));
    assert_eq!(e.to_string(), "line 4: epsilon must be > 0, got -0.1");
}

#[test]
fn misspelled_key_is_an_error() {
    let e = parse_config("[model]\nkind = spin_sweep\n[propagation]\nepsilon = 0.2\nepsilonn = 0.3\n").unwrap_err();
    assert_eq!(e.to_string(), "line 5: unknown key `epsilonn` in [propagation]");
}

#[test]
fn all_errors_are_collected() {
    let text = "[model]\nkind = stirap\nfield = 0\n[propagation]\nsteps = 0\nmethod = euler\n[frames]\ntrack = 0, 7, 1a\n[drive]\nkind = magic\n";
    let e = parse_config(text).unwrap_err();
    let lines: Vec<Option<usize>> = e.0.iter().map(|x| x.line).collect();
    assert_eq!(lines, vec![Some(3), Some(5), Some(6), Some(8), Some(8), Some(10), None], "{e}");
    assert!(e.to_string().contains("missing required key `epsilon`"));
}

#[test]
fn schedules_are_configurable() {
    let text = "[model]\nkind = spin_sweep\ntheta = smoothstep\ntheta_order = 1\ntheta_start = 0\ntheta_end = 3\n[propagation]\nepsilon = 0.1\n";
    let c = parse_config(text).unwrap();
    assert_eq!(c.scenario.model.schedule("theta"), Some(&Schedule::Smoothstep { order: 1, start: 0.0, end: 3.0 }));

    let e = parse_config("[model]\nkind = spin_sweep\ntheta = linear\ntheta_end = 3\n[propagation]\nepsilon = 0.1\n").unwrap_err();
    assert_eq!(e.to_string(), "line 3: linear schedule for `theta` needs `theta_start`");

    let e = parse_config("[model]\nkind = spin_sweep\ntheta_width = 3\n[propagation]\nepsilon = 0.1\n").unwrap_err();
    assert_eq!(e.to_string(), "line 3: unknown key `theta_width` in [model]");
}

#[test]
fn sweep_ladders_and_drives_parse() {
    let text = "[model]\nkind = spin_sweep\n[propagation]\nepsilon = 0.1\nmethod = rk4\n[drive]\nkind = counterdiabatic\ninclude_berry = false\n[sweep]\nmin = 0.01\nmax = 0.1\ncount = 5\norders = 0, 3\npause_start = 0.45\npause_end = 0.55\n[output]\ndirectory = results\nemit_plots = false\ndatasets = summary\n";
    let c = parse_config(text).unwrap();
    assert_eq!(c.scenario.drive, DriveSelector::Counterdiabatic { include_berry: false });
    assert_eq!(c.scenario.propagation.method, Method::Rk4);
    let ladder = c.sweep.epsilons.unwrap();
    assert_eq!((ladder.len(), ladder[0], ladder[4]), (5, 0.01, 0.1));
    assert_eq!(c.sweep.orders, vec![0, 3]);
    assert_eq!(c.sweep.pause_window, (0.45, 0.55));
    assert_eq!(c.output_dir, Path::new("results"));
    assert!(!c.emit_plots);
}

#[test]
fn correction_drive_requires_spin_sweep() {
    let e = parse_config("[model]\nkind = landau_zener\n[propagation]\nepsilon = 0.1\n[drive]\nkind = superadiabatic_correction\n")
        .unwrap_err();
    assert_eq!(e.0[0].line, Some(6));
}

#[test]
fn fig3_script_is_a_two_by_three_grid() {
    let s = plot_script(&reproduce_figure(Figure::Fig3).unwrap()).unwrap();
    assert!(s.contains("set multiplot layout 2,3\n"));
    assert_eq!(s.matches("\nplot ").count(), 6);
    for col in ['a', 'b', 'c'] {
        assert!(s.contains(&format!("'fig3{col}_populations.csv'")));
        assert!(s.contains(&format!("'fig3{col}_hamiltonian.csv'")));
    }
}

#[test]
fn fig2_script_has_two_panels() {
    let s = plot_script(&reproduce_figure(Figure::Fig2).unwrap()).unwrap();
    assert!(s.contains("set multiplot layout 1,2\n"));
    assert_eq!(s.matches("\nplot ").count(), 2);
    assert!(s.contains("'fig2_theta.csv'") && s.contains("'fig2_field.csv'"));
}

#[test]
fn empty_bundle_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let err = emit_plot_script(&Bundle { name: "nothing".into(), tables: vec![] }, dir.path()).unwrap_err();
    assert_eq!(err.to_string(), "invalid argument: bundle `nothing` has no tables to plot");
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn simulate_writes_trajectory_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{MINIMAL}[frames]\ntrack = 0, 1\n"));
    let out = dir.path().join("run");
    let o = adiabat(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(text.starts_with(
        "tau,re_psi_0,im_psi_0,re_psi_1,im_psi_1,pop_frame0_0,pop_frame0_1,pop_frame1_0,pop_frame1_1\n"
    ));
    assert!(!text.contains('\r'));
    assert!(fs::read_to_string(out.join("summary.csv")).unwrap().starts_with("final_infidelity,norm_drift,"));
}

#[test]
fn reproduce_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = adiabat(&["reproduce", "fig3", "--out", d.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 8);
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn failures_print_one_categorized_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[model]\nkind = spin_sweep\n[propagation]\nepsilon = -0.1\nepsilonn = 1\n");
    let o = adiabat(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error[config]: line 4: epsilon must be > 0"), "{err}");

    let o = adiabat(&["simulate", "--config", dir.path().join("missing.conf").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error[io]: "));

    let o = adiabat(&["reproduce", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error[usage]: "));
}

#[test]
fn counterdiabatic_sweep_keeps_data_but_refuses_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\nkind = spin_sweep\n[propagation]\nepsilon = 0.1\n[drive]\nkind = counterdiabatic\n[sweep]\nepsilons = 0.02, 0.05, 0.1, 0.2\n",
    );
    let out = dir.path().join("sweep");
    let o = adiabat(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error[fit]: "));
    let rows = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(rows.lines().count(), 5);
}

#[test]
fn every_subcommand_accepts_config_and_out() {
    for sub in ["simulate", "sweep", "smoothness-study", "pause-study", "synthesize-drive", "convergence"] {
        let help = String::from_utf8(adiabat(&[sub, "--help"]).stdout).unwrap();
        assert!(help.contains("--config <PATH>") && help.contains("--out <DIR>"), "{sub}");
    }
    let help = String::from_utf8(adiabat(&["reproduce", "--help"]).stdout).unwrap();
    assert!(help.contains("--config <PATH>") && help.contains("fig2"));
}
