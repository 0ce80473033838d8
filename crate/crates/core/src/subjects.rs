//! Identified parameters of the 14 experiment subjects, for use as ground
//! truth when generating synthetic data.

use crate::driver::DriverParams;

/// Manual driving: `a1, a2, a3, t_p, K_d`.
pub const MANUAL: [[f64; 5]; 14] = [
    [0.068, 0.029, 3.699, 0.090, 3.774],
    [0.060, 0.015, 3.442, 0.169, 3.506],
    [0.066, 0.019, 3.656, 0.014, 3.861],
    [0.097, 0.019, 3.759, 0.041, 3.809],
    [0.082, 0.011, 3.374, 0.297, 3.646],
    [0.081, 0.009, 3.502, 0.300, 3.674],
    [0.053, 0.023, 3.530, 0.027, 3.759],
    [0.075, 0.026, 3.729, 0.023, 3.947],
    [0.080, 0.016, 3.744, 0.120, 3.649],
    [0.085, 0.014, 3.428, 0.090, 3.732],
    [0.049, 0.029, 3.561, 0.057, 3.856],
    [0.078, 0.029, 3.298, 0.086, 3.794],
    [0.074, 0.015, 3.523, 0.038, 3.719],
    [0.066, 0.020, 3.627, 0.010, 3.981],
];

/// Driving with haptic guidance: `a1, a2, a3, t_p, K_d, K_hg`.
pub const HAPTIC: [[f64; 6]; 14] = [
    [0.100, 0.029, 3.781, 0.034, 3.249, 0.526],
    [0.120, 0.027, 3.650, 0.300, 2.888, 0.393],
    [0.047, 0.025, 3.601, 0.300, 2.781, 0.421],
    [0.085, 0.025, 3.803, 0.184, 3.260, 0.509],
    [0.060, 0.023, 3.637, 0.229, 4.056, 0.926],
    [0.111, 0.048, 3.711, 0.010, 2.300, 0.002],
    [0.053, 0.014, 3.672, 0.300, 3.859, 0.783],
    [0.049, 0.025, 3.692, 0.017, 3.992, 0.971],
    [0.058, 0.014, 3.694, 0.300, 2.492, 0.137],
    [0.067, 0.023, 3.517, 0.124, 3.227, 0.392],
    [0.061, 0.029, 3.566, 0.300, 3.593, 0.615],
    [0.066, 0.033, 3.490, 0.010, 2.387, 0.008],
    [0.086, 0.003, 3.476, 0.046, 2.125, 0.035],
    [0.047, 0.011, 3.620, 0.018, 3.945, 0.858],
];

/// Manual-driving subject `row` (1-based) over `base`; `K_hg` is set to 0.
pub fn manual_subject(row: usize, base: &DriverParams) -> Option<DriverParams> {
    let [a1, a2, a3, t_p, k_d] = *MANUAL.get(row.checked_sub(1)?)?;
    Some(DriverParams {
        a1,
        a2,
        a3,
        t_p,
        k_d,
        k_hg: 0.0,
        ..*base
    })
}

/// Haptic-guidance subject `row` (1-based) over `base`.
pub fn haptic_subject(row: usize, base: &DriverParams) -> Option<DriverParams> {
    let [a1, a2, a3, t_p, k_d, k_hg] = *HAPTIC.get(row.checked_sub(1)?)?;
    Some(DriverParams {
        a1,
        a2,
        a3,
        t_p,
        k_d,
        k_hg,
        ..*base
    })
}
