use std::f64::consts::PI;

use adiabat::frames::{adiabatic_frame, frame_hierarchy, schrieffer_wolff_residual, uniform_grid};
use adiabat::linalg::{eigh, inner, unitary_step, ComplexMatrix, StateVector};
use adiabat::models::{ModelKind, ModelSpec};
use adiabat::propagator::{propagate, PropagationConfig};
use adiabat::schedule::Schedule;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn hermitian(dim: usize, entries: &[f64]) -> ComplexMatrix {
    let mut it = entries.iter().copied();
    let mut h = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        h[(i, i)] = C64::new(it.next().unwrap(), 0.0);
        for j in i + 1..dim {
            let z = C64::new(it.next().unwrap(), it.next().unwrap());
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

fn hermitian_strategy(dims: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = ComplexMatrix> {
    dims.prop_flat_map(|n| prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |e| hermitian(n, &e)))
}

fn state_strategy(dim: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec(-1.0..1.0f64, 2 * dim)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            StateVector::new(v.chunks(2).map(|c| C64::new(c[0] / norm, c[1] / norm)).collect())
        })
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn eigh_reconstructs_orthonormal_gauge_fixed_basis(h in hermitian_strategy(1..=6)) {
        let e = eigh(&h).unwrap();
        let n = h.dim();
        prop_assert!((&e.reconstruct() - &h).max_abs() < 1e-10);
        let gram = e.vectors.adjoint().matmul(&e.vectors);
        prop_assert!((&gram - &ComplexMatrix::identity(n)).max_abs() < 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        for k in 0..n {
            let v = e.vector(k);
            let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = v.iter().find(|z| z.norm() == big).unwrap();
            prop_assert!(pivot.im == 0.0 && pivot.re >= 0.0, "{pivot}");
        }
        prop_assert_eq!(eigh(&h).unwrap(), e);
    }

    #[test]
    fn unitary_step_preserves_norm_and_inner_products(
        h in hermitian_strategy(3..=3),
        a in state_strategy(3),
        b in state_strategy(3),
        dt in -5.0..5.0f64,
    ) {
        let ua = unitary_step(&h, dt, &a).unwrap();
        let ub = unitary_step(&h, dt, &b).unwrap();
        prop_assert!((ua.norm() - 1.0).abs() < 1e-12);
        prop_assert!((ua.inner(&ub) - a.inner(&b)).norm() < 1e-12);
        let back = unitary_step(&h, -dt, &ua).unwrap();
        prop_assert!(back.distance(&a) < 1e-12);
    }

    #[test]
    fn ramps_are_point_symmetric(tau in 0.0..=1.0f64, order in 0u8..=3) {
        let smooth = Schedule::default_ramp();
        prop_assert!((smooth.value(1.0 - tau).unwrap() - (PI - smooth.value(tau).unwrap())).abs() < 1e-12);
        let step = Schedule::Smoothstep { order, start: 0.0, end: PI };
        prop_assert!((step.value(1.0 - tau).unwrap() - (PI - step.value(tau).unwrap())).abs() < 1e-12);
        prop_assert!((smooth.derivative(1.0 - tau).unwrap() - smooth.derivative(tau).unwrap()).abs() < 1e-11);
    }

    #[test]
    fn frame_populations_sum_to_one(psi in state_strategy(3), sample in 0usize..101) {
        let f = adiabatic_frame(&ModelSpec::preset(ModelKind::Stirap), &uniform_grid(101)).unwrap();
        let total: f64 = f.populations_at(sample, psi.amplitudes()).iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(config(12))]

    /// Conjugating H by a constant diagonal phase matrix relabels the basis
    /// phases only; frame populations must not change.
    #[test]
    fn frame_populations_are_gauge_independent(phases in prop::collection::vec(0.0..2.0 * PI, 3)) {
        let m = ModelSpec::preset(ModelKind::Stirap);
        let d = ComplexMatrix::from_fn(3, |i, j| if i == j { C64::from_polar(1.0, phases[i]) } else { C64::new(0.0, 0.0) });
        let rotated = |t: f64| d.matmul(&m.hamiltonian(t).unwrap()).matmul(&d.adjoint()).hermitian_part();
        let grid = uniform_grid(401);
        let cfg = PropagationConfig::new(0.2).with_steps(2000).with_record_stride(20);
        let psi0 = StateVector::basis(3, 0);
        let a = propagate(&m, &psi0, &cfg).unwrap();
        let b = propagate(&rotated, &StateVector::new(d.apply(psi0.amplitudes())), &cfg).unwrap();
        let fa = frame_hierarchy(&m, &grid, 0.2, 1).unwrap();
        let fb = frame_hierarchy(&rotated, &grid, 0.2, 1).unwrap();
        for (x, y) in fa.iter().zip(&fb) {
            for ((&tau, sa), sb) in a.tau_grid.iter().zip(&a.states).zip(&b.states) {
                let j = x.sample_index(tau).unwrap();
                let pa = x.populations_at(j, sa.amplitudes());
                let pb = y.populations_at(j, sb.amplitudes());
                for (p, q) in pa.iter().zip(&pb) {
                    prop_assert!((p - q).abs() < 1e-9, "order {} tau {tau}: {p} vs {q}", x.order);
                }
                for k in 0..3 {
                    let overlap = inner(&d.apply(&x.state(j, k)), &y.state(j, k)).norm();
                    prop_assert!(overlap > 1.0 - 1e-9);
                }
            }
        }
    }

    /// Without spectral symmetry the first-order transformation leaves an
    /// off-diagonal residual of second order.
    #[test]
    fn schrieffer_wolff_residual_is_quadratic_for_generic_spectra(
        a in hermitian_strategy(3..=3),
        b in hermitian_strategy(3..=3),
    ) {
        let h = |t: f64| &a + &b.scale_real(t);
        let e = eigh(&h(0.5)).unwrap();
        prop_assume!(e.min_gap() > 0.3);
        let f = adiabatic_frame(&h, &uniform_grid(401)).unwrap();
        let v = &f.couplings[200];
        prop_assume!(v.off_diagonal_norm() > 0.05);
        let eps = 1e-3;
        let ratio = schrieffer_wolff_residual(&f, eps / 2.0, 0.5).unwrap() / schrieffer_wolff_residual(&f, eps, 0.5).unwrap();
        prop_assert!((0.22..=0.28).contains(&ratio), "{ratio}");
    }
}
