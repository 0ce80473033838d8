use approx::assert_abs_diff_eq;
use nalgebra::{Vector3, Vector4};
use proptest::prelude::*;
use steer_core::driver::*;
use steer_core::ident::{predict, DataMode, Dataset};
use steer_core::road::PerceptionErrors;

fn bounded_draw() -> impl Strategy<Value = DriverParams> {
    (
        0.0..0.5f64,
        0.0..0.1f64,
        3.0..5.0f64,
        0.01..0.3f64,
        1.0..5.0f64,
        0.0..1.0f64,
    )
        .prop_map(|(a1, a2, a3, t_p, k_d, k_hg)| DriverParams {
            a1,
            a2,
            a3,
            t_p,
            k_d,
            k_hg,
            ..DriverParams::IDENT_DEFAULT
        })
}

/// Smooth multi-sine input `(e_y, e_θ, φ, T_h)` at time `t`.
fn smooth_input(t: f64, phase: f64) -> [f64; 4] {
    [
        0.3 * (0.7 * t + phase).sin() + 0.1 * (2.3 * t).cos(),
        0.02 * (1.1 * t + 2.0 * phase).sin(),
        0.05 * (0.5 * t).sin() - 0.02 * (3.1 * t + phase).cos(),
        0.8 * (0.9 * t + 0.5).sin(),
    ]
}

fn rk4<const N: usize>(x: [f64; N], t: f64, dt: f64, f: impl Fn(&[f64; N], f64) -> [f64; N]) -> [f64; N] {
    let add = |a: &[f64; N], k: &[f64; N], h: f64| std::array::from_fn(|i| a[i] + h * k[i]);
    let k1 = f(&x, t);
    let k2 = f(&add(&x, &k1, dt / 2.0), t + dt / 2.0);
    let k3 = f(&add(&x, &k2, dt / 2.0), t + dt / 2.0);
    let k4 = f(&add(&x, &k3, dt), t + dt);
    std::array::from_fn(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

#[test]
fn visual_command_superposes() {
    let dp = DriverParams::default();
    let a = PerceptionErrors {
        e_y: 0.4,
        e_theta: -0.03,
    };
    let b = PerceptionErrors {
        e_y: -1.1,
        e_theta: 0.2,
    };
    let sum = PerceptionErrors {
        e_y: a.e_y + b.e_y,
        e_theta: a.e_theta + b.e_theta,
    };
    let lhs = visual_command(&dp, &sum, 0.5 + 0.25);
    let rhs = visual_command(&dp, &a, 0.5) + visual_command(&dp, &b, 0.25);
    assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-15);
}

#[test]
fn pade_step_matches_transfer_function() {
    // Step response of (1 − s t_p/2)/(1 + s t_p/2): 1 − 2 e^{−2t/t_p}.
    let t_p = 0.2;
    let dt = 1e-4;
    let mut z = [0.0];
    for k in 0..5000 {
        let t = k as f64 * dt;
        let (out, _) = pade_delay(1.0, z[0], t_p);
        assert_abs_diff_eq!(out, 1.0 - 2.0 * (-2.0 * t / t_p).exp(), epsilon = 1e-10);
        z = rk4(z, t, dt, |z, _| [pade_delay(1.0, z[0], t_p).1]);
    }
}

#[test]
fn pade_is_all_pass() {
    for k in 0..=400 {
        let omega = 0.1 * 1000f64.powf(k as f64 / 400.0);
        for t_p in [0.01, 0.1, 0.229, 0.5] {
            assert_abs_diff_eq!(pade_frequency_response(omega, t_p).norm(), 1.0, epsilon = 1e-12);
        }
    }
}

#[test]
fn neuromuscular_steady_states() {
    let dp = DriverParams::default();
    // Integrating from zero settles at K_d φ'.
    let mut td = [0.0];
    for k in 0..4000 {
        td = rk4(td, k as f64 * 1e-3, 1e-3, |x, _| {
            [neuromuscular_rate(0.1, 0.1, 0.0, x[0], &dp)]
        });
    }
    assert_abs_diff_eq!(td[0], dp.k_d * 0.1, epsilon = 1e-12);

    let full = DriverParams { k_hg: 1.0, ..dp };
    let mut td = [0.7];
    for k in 0..4000 {
        td = rk4(td, k as f64 * 1e-3, 1e-3, |x, _| {
            [neuromuscular_rate(0.1, 0.1, full.k_d * 0.1, x[0], &full)]
        });
    }
    assert_abs_diff_eq!(td[0], 0.0, epsilon = 1e-12);
}

#[test]
fn state_matrix_eigenvalues() {
    let dp = DriverParams::IDENT_DEFAULT;
    let ev = assemble_state_space(&dp).a.complex_eigenvalues();
    let mut re: Vec<f64> = ev.iter().map(|c| c.re).collect();
    re.sort_by(f64::total_cmp);
    assert_abs_diff_eq!(re[0], -2.0 / dp.t_p, epsilon = 1e-9);
    assert_abs_diff_eq!(re[1], -1.0 / dp.t_nms, epsilon = 1e-9);
    assert_abs_diff_eq!(re[2], 0.0, epsilon = 1e-12);
}

/// Integrates both the scalar cascade and the state-space form over 10 s and
/// returns the largest output difference.
fn cascade_vs_state_space(dp: &DriverParams, phase: f64) -> f64 {
    let ss = assemble_state_space(dp);
    let dt = 1e-3;
    let mut xc = [0.0; 3];
    let mut xs = [0.0; 3];
    let mut worst: f64 = 0.0;
    let cascade = |x: &[f64; 3], t: f64| {
        let u = smooth_input(t, phase);
        let state = DriverState {
            z_int: x[0],
            z_pade: x[1],
            t_d: x[2],
        };
        let err = PerceptionErrors {
            e_y: u[0],
            e_theta: u[1],
        };
        let (d, _) = driver_derivatives(dp, &state, &err, u[2], u[3]);
        [d.z_int, d.z_pade, d.t_d]
    };
    let linear = |x: &[f64; 3], t: f64| {
        let d = ss.derivative(&Vector3::from(*x), &Vector4::from(smooth_input(t, phase)));
        [d[0], d[1], d[2]]
    };
    for k in 0..10_000 {
        let t = k as f64 * dt;
        let u = smooth_input(t, phase);
        let state = DriverState {
            z_int: xc[0],
            z_pade: xc[1],
            t_d: xc[2],
        };
        let err = PerceptionErrors {
            e_y: u[0],
            e_theta: u[1],
        };
        let (_, phi_target) = driver_derivatives(dp, &state, &err, u[2], u[3]);
        let y = ss.output(&Vector3::from(xs), &Vector4::from(u));
        worst = worst.max((y[0] - xc[2]).abs()).max((y[1] - phi_target).abs());
        xc = rk4(xc, t, dt, cascade);
        xs = rk4(xs, t, dt, linear);
    }
    worst
}

#[test]
fn state_space_matches_cascade_on_smooth_input() {
    assert!(cascade_vs_state_space(&DriverParams::IDENT_DEFAULT, 0.3) < 1e-8);
}

fn dataset(inputs: Vec<[f64; 4]>) -> Dataset {
    let n = inputs.len();
    Dataset {
        sample_rate: 120.0,
        mode: DataMode::Haptic,
        inputs,
        outputs: vec![[0.0; 2]; n],
    }
}

#[test]
fn zero_input_keeps_zero_state() {
    let ss = assemble_state_space(&DriverParams::default());
    let d = ss.derivative(&Vector3::zeros(), &Vector4::zeros());
    assert_eq!(d, Vector3::zeros());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn state_space_matches_cascade_for_bounded_draws(dp in bounded_draw(), phase in 0.0..6.0f64) {
        let worst = cascade_vs_state_space(&dp, phase);
        prop_assert!(worst < 1e-8, "max output difference {worst}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn guidance_torque_is_ignored_when_absent(dp in bounded_draw(), phase in 0.0..6.0f64) {
        let inputs: Vec<[f64; 4]> = (0..600)
            .map(|k| {
                let mut u = smooth_input(k as f64 / 120.0, phase);
                u[3] = 0.0;
                u
            })
            .collect();
        let data = dataset(inputs);
        let reference = predict(&DriverParams { k_hg: 0.0, ..dp }, &data);
        for k_hg in [0.25, 0.5, 1.0] {
            prop_assert_eq!(&predict(&DriverParams { k_hg, ..dp }, &data), &reference);
        }
    }

    #[test]
    fn outputs_scale_with_inputs(dp in bounded_draw(), c in -4.0..4.0f64) {
        let inputs: Vec<[f64; 4]> = (0..600).map(|k| smooth_input(k as f64 / 120.0, 1.0)).collect();
        let scaled: Vec<[f64; 4]> = inputs.iter().map(|u| u.map(|v| c * v)).collect();
        let y = predict(&dp, &dataset(inputs));
        let ys = predict(&dp, &dataset(scaled));
        for (a, b) in y.iter().zip(&ys) {
            prop_assert!((b[0] - c * a[0]).abs() <= 1e-9 * (1.0 + a[0].abs()));
            prop_assert!((b[1] - c * a[1]).abs() <= 1e-9 * (1.0 + a[1].abs()));
        }
    }
}
