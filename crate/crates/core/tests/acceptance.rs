//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use adiabat::control::{counterdiabatic, drive_strength, superadiabatic_correction_two_level};
use adiabat::experiments::{
    epsilon_sweep, log_ladder, ramp_smoothness_study, reproduce_figure, run_scenario, with_smoothstep, DriveSelector,
    Figure, FrameSelector, Scenario,
};
use adiabat::frames::{
    adiabatic_frame, analytic_superadiabatic_frame, frame_hierarchy, schrieffer_wolff_residual, superadiabatic_frame,
    uniform_grid, DEFAULT_FRAME_POINTS,
};
use adiabat::linalg::{eigh, inner};
use adiabat::models::{ModelKind, ModelSpec};
use adiabat::Result;

type Check = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn spin() -> ModelSpec {
    ModelSpec::preset(ModelKind::SpinSweep)
}

fn min_followed(run: &adiabat::experiments::ScenarioRun, label: &str, n: usize) -> f64 {
    run.record.populations[label].iter().map(|p| p[n]).fold(f64::INFINITY, f64::min)
}

/// Fig. 3(a): dip to 0.80 ± 0.02, recovery to 0.98 ± 0.01, under a second.
fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let run = run_scenario(&Scenario::new(spin(), 0.2))?;
    let elapsed = start.elapsed();
    let f = run.summary.frame("frame0").unwrap();
    let pass = (f.min_population - 0.80).abs() <= 0.02
        && (f.final_population - 0.98).abs() <= 0.01
        && elapsed < Duration::from_secs(1);
    Ok(Outcome {
        pass,
        detail: format!(
            "min adiabatic population {:.5}, final {:.5}, runtime {:.3} s",
            f.min_population,
            f.final_population,
            elapsed.as_secs_f64()
        ),
    })
}

/// H + H_CD keeps the adiabatic population ≥ 1 − 1e-6 at ε ∈ {0.05, 0.2, 1.0}.
fn criterion_2() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for eps in [0.05, 0.2, 1.0] {
        let mut s = Scenario::new(spin(), eps);
        s.drive = DriveSelector::Counterdiabatic { include_berry: true };
        let run = run_scenario(&s)?;
        worst = worst.max(1.0 - min_followed(&run, "frame0", 0));
    }
    Ok(Outcome { pass: worst <= 1e-6, detail: format!("largest adiabatic loss {worst:.3e}") })
}

/// H + H_corr⁽¹⁾ at ε = 0.2: first superadiabatic population ≥ 1 − 1e-5,
/// final adiabatic infidelity ≤ 1e-6.
fn criterion_3() -> Result<Outcome> {
    let mut s = Scenario::new(spin(), 0.2);
    s.drive = DriveSelector::SuperadiabaticCorrection;
    s.frames_to_track = vec![FrameSelector::Numeric(0), FrameSelector::AnalyticFirstOrder];
    let run = run_scenario(&s)?;
    let loss = 1.0 - min_followed(&run, "frame1a", 0);
    let infidelity = run.summary.final_infidelity;
    Ok(Outcome {
        pass: loss <= 1e-5 && infidelity <= 1e-6,
        detail: format!("largest first-superadiabatic loss {loss:.3e}, final infidelity {infidelity:.3e}"),
    })
}

/// Peak ratios from ε = 0.2 to 0.05: H_CD 4.0 ± 0.1, H_corr⁽¹⁾ 13 ± 2.
fn criterion_4() -> Result<Outcome> {
    let m = spin();
    let grid = uniform_grid(DEFAULT_FRAME_POINTS);
    let f = adiabatic_frame(&m, &grid)?;
    let cd = |e| -> Result<f64> { Ok(drive_strength(&counterdiabatic(&f, e, true)?)?.0) };
    let corr = |e| -> Result<f64> { Ok(drive_strength(&superadiabatic_correction_two_level(&m, e, &grid)?)?.0) };
    let r_cd = cd(0.2)? / cd(0.05)?;
    let r_corr = corr(0.2)? / corr(0.05)?;
    Ok(Outcome {
        pass: (r_cd - 4.0).abs() <= 0.1 && (r_corr - 13.0).abs() <= 2.0,
        detail: format!("counterdiabatic ratio {r_cd:.4}, superadiabatic correction ratio {r_corr:.3}"),
    })
}

/// Slope 2.0 ± 0.3 for the linear ramp, ≥ 3.5 and larger for the smooth ramp,
/// slopes non-decreasing in smoothstep order; under 30 s.
fn criterion_5() -> Result<Outcome> {
    let start = Instant::now();
    let base = Scenario::new(spin(), 0.1);
    let ladder = log_ladder(0.01, 0.1, 12);
    let linear = epsilon_sweep(&with_smoothstep(&base, 0)?, &ladder)?.fitted_slope;
    let smooth = epsilon_sweep(&base, &ladder)?.fitted_slope;
    let study = ramp_smoothness_study(&base, &[0, 1, 2, 3], &ladder)?;
    let elapsed = start.elapsed();
    let pass = (linear - 2.0).abs() <= 0.3
        && smooth >= 3.5
        && smooth > linear
        && study.monotone_in_order()
        && elapsed < Duration::from_secs(30);
    let slopes: Vec<String> = study.slopes().iter().map(|s| format!("{s:.3}")).collect();
    Ok(Outcome {
        pass,
        detail: format!(
            "linear {linear:.3}, smooth {smooth:.3}, by order [{}], runtime {:.2} s",
            slopes.join(", "),
            elapsed.as_secs_f64()
        ),
    })
}

/// Frame-1 dip strictly smaller than the adiabatic dip; finals within 1e-3.
fn criterion_6() -> Result<Outcome> {
    let mut s = Scenario::new(spin(), 0.2);
    s.frames_to_track = vec![FrameSelector::Numeric(0), FrameSelector::Numeric(1)];
    let run = run_scenario(&s)?;
    let f0 = run.summary.frame("frame0").unwrap();
    let f1 = run.summary.frame("frame1").unwrap();
    let pass = f1.min_population > f0.min_population && (f1.final_population - f0.final_population).abs() <= 1e-3;
    Ok(Outcome {
        pass,
        detail: format!(
            "adiabatic min {:.5}, frame-1 min {:.5}, final difference {:.2e}",
            f0.min_population,
            f1.min_population,
            (f1.final_population - f0.final_population).abs()
        ),
    })
}

/// Numeric frame 1 against the closed-form states (overlap > 1 − 1e-4 at
/// ε = 0.2), and the finite-difference coupling against θ'/2 (1e-6 relative).
fn criterion_7() -> Result<Outcome> {
    let m = spin();
    let grid = uniform_grid(DEFAULT_FRAME_POINTS);
    let f0 = adiabatic_frame(&m, &grid)?;
    let f1 = superadiabatic_frame(&f0, 0.2)?;
    let fa = analytic_superadiabatic_frame(&m, 0.2, &grid)?;
    let mut deficit: f64 = 0.0;
    for j in 0..grid.len() {
        for n in 0..2 {
            deficit = deficit.max(1.0 - inner(&f1.state(j, n), &fa.state(j, n)).norm());
        }
    }
    let theta = m.schedule("theta").unwrap();
    let peak = 2.1875 * PI / 2.0;
    let mut coupling_error: f64 = 0.0;
    for (j, &t) in grid.iter().enumerate() {
        let exact = theta.derivative(t)? / 2.0;
        coupling_error = coupling_error.max((f0.couplings[j][(0, 1)].norm() - exact).abs() / peak);
    }
    Ok(Outcome {
        pass: deficit < 1e-4 && coupling_error <= 1e-6,
        detail: format!(
            "worst frame-1 overlap deficit {deficit:.3e} (limit 1e-4), coupling error {coupling_error:.3e} of peak (limit 1e-6)"
        ),
    })
}

/// residual(ε/2)/residual(ε) ∈ [0.2, 0.3] at τ = 1/2, ε = 0.1.
fn criterion_8() -> Result<Outcome> {
    let f = adiabatic_frame(&spin(), &uniform_grid(DEFAULT_FRAME_POINTS))?;
    let ratio = schrieffer_wolff_residual(&f, 0.05, 0.5)? / schrieffer_wolff_residual(&f, 0.1, 0.5)?;
    Ok(Outcome { pass: (0.2..=0.3).contains(&ratio), detail: format!("residual ratio {ratio:.4}") })
}

/// Unitarity, completeness, coupling Hermiticity, ramp symmetry, determinism.
fn criterion_9() -> Result<Outcome> {
    let grid = uniform_grid(DEFAULT_FRAME_POINTS);
    let mut norm_drift: f64 = 0.0;
    let mut completeness: f64 = 0.0;
    let mut hermiticity: f64 = 0.0;

    let mut s = Scenario::new(spin(), 0.2);
    s.frames_to_track = vec![
        FrameSelector::Numeric(0),
        FrameSelector::Numeric(1),
        FrameSelector::Numeric(2),
        FrameSelector::AnalyticFirstOrder,
    ];
    let mut runs = vec![run_scenario(&s)?];
    s.drive = DriveSelector::Counterdiabatic { include_berry: true };
    runs.push(run_scenario(&s)?);
    for kind in [ModelKind::LandauZener, ModelKind::Stirap, ModelKind::SapThreeMode] {
        let mut s = Scenario::new(ModelSpec::preset(kind), 0.05);
        s.initial_state = if kind == ModelKind::LandauZener { 0 } else { 1 };
        runs.push(run_scenario(&s)?);
        hermiticity = hermiticity.max(adiabatic_frame(&ModelSpec::preset(kind), &grid)?.coupling_hermiticity_violation());
    }
    hermiticity = hermiticity.max(adiabatic_frame(&spin(), &grid)?.coupling_hermiticity_violation());
    for run in &runs {
        norm_drift = norm_drift.max(run.record.norm_drift);
        for pops in run.record.populations.values() {
            for p in pops {
                completeness = completeness.max((p.iter().sum::<f64>() - 1.0).abs());
            }
        }
    }

    let theta = spin().schedule("theta").cloned().unwrap();
    let mut symmetry: f64 = 0.0;
    for t in uniform_grid(10_000) {
        symmetry = symmetry.max((theta.value(1.0 - t)? - (PI - theta.value(t)?)).abs());
    }

    let csv = |b: &adiabat::output::Bundle| -> Result<Vec<String>> { b.tables.iter().map(|t| t.to_csv_string()).collect() };
    let identical = csv(&reproduce_figure(Figure::Fig3)?)? == csv(&reproduce_figure(Figure::Fig3)?)?;

    let pass = norm_drift < 1e-9 && completeness < 1e-9 && hermiticity < 1e-9 && symmetry < 1e-12 && identical;
    Ok(Outcome {
        pass,
        detail: format!(
            "norm drift {norm_drift:.1e}, completeness {completeness:.1e}, coupling hermiticity {hermiticity:.1e}, \
             ramp symmetry {symmetry:.1e}, repeat runs byte-identical: {identical}"
        ),
    })
}

/// STIRAP transfers level 1 to level 3 above 0.99 fidelity; the dark state
/// has an exactly empty middle level.
fn criterion_10() -> Result<Outcome> {
    let m = ModelSpec::preset(ModelKind::Stirap);
    let mut s = Scenario::new(m.clone(), 0.05);
    s.initial_state = 1;
    let run = run_scenario(&s)?;
    let psi = run.record.final_state().amplitudes();
    let fidelity = psi[2].norm_sqr();
    let start_population = run.record.states[0].amplitudes()[0].norm_sqr();
    let mut middle: f64 = 0.0;
    let mut eigenvalue: f64 = 0.0;
    for t in uniform_grid(DEFAULT_FRAME_POINTS) {
        middle = middle.max(m.stirap_dark_state(t)?[1].abs());
        let eig = eigh(&m.hamiltonian(t)?)?;
        eigenvalue = eigenvalue.max(eig.values[1].abs());
        middle = middle.max(eig.vector(1)[1].norm());
    }
    Ok(Outcome {
        pass: fidelity > 0.99 && middle <= 1e-12 && eigenvalue <= 1e-12,
        detail: format!(
            "level-1 start population {start_population:.6}, level-3 final population {fidelity:.6}, \
             dark-state middle component {middle:.1e}, dark eigenvalue {eigenvalue:.1e}"
        ),
    })
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("1 spin sweep dip and recovery", criterion_1),
        ("2 transitionless driving", criterion_2),
        ("3 first superadiabatic correction", criterion_3),
        ("4 drive strength ratios", criterion_4),
        ("5 infidelity scaling slopes", criterion_5),
        ("6 frame hierarchy dip", criterion_6),
        ("7 closed-form frame and coupling oracles", criterion_7),
        ("8 Schrieffer-Wolff residual scaling", criterion_8),
        ("9 invariant suites", criterion_9),
        ("10 STIRAP transfer and dark state", criterion_10),
    ];
    // Build the shared frame machinery once so the first timed criterion
    // does not pay for thread-pool start-up.
    let _ = frame_hierarchy(&spin(), &uniform_grid(11), 0.2, 1);
    let mut failed = 0;
    for (name, check) in criteria {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error[{}]: {e}", e.category())),
        };
        println!("criterion {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
        failed += usize::from(!pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
