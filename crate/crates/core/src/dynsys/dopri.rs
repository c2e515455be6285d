//! Adaptive Dormand-Prince 5(4) integration with dense output.

use super::DynsysError;

// Dormand-Prince 5(4) tableau (FSAL).
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Error weights: fifth-order minus embedded fourth-order solution.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output weights for the fourth-order continuous extension.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 10.0;

/// Integrate `dy/dt = f(t, y)` from `t0`, evaluating the dense interpolant at
/// each of the (ascending) `sample_times`. The controller keeps the local
/// error below `abs_tol + rel_tol·|y|` per component.
pub fn integrate_dense<const N: usize, F>(
    f: F,
    t0: f64,
    t_end: f64,
    y0: [f64; N],
    sample_times: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Vec<[f64; N]>, DynsysError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    assert!(t_end > t0, "integration span must be positive");
    let mut out = Vec::with_capacity(sample_times.len());
    let mut next_sample = 0usize;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(t_end - t0, &y, &k1, abs_tol, rel_tol);
    let h_min = (t_end - t0) * 1e-14;

    // Samples that coincide with the start.
    while next_sample < sample_times.len() && sample_times[next_sample] <= t {
        out.push(y);
        next_sample += 1;
    }

    let mut k = [[0.0; N]; 7];
    while t < t_end && next_sample < sample_times.len() {
        if h < h_min {
            return Err(DynsysError::StepFailure { t });
        }
        if t + h > t_end {
            h = t_end - t;
        }

        k[0] = k1;
        for stage in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[stage] = f(t + C[stage] * h, &ys);
        }
        // FSAL: stage 7 evaluated at the candidate next point is k1 of the
        // next step; the b-weights equal row 7 of A.
        let y_new = {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(6) {
                let a = A[6][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            ys
        };

        let mut err_sq = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let scale = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            // Accepted: fill all samples inside (t, t+h] from the dense form.
            let k_next = f(t + h, &y_new);
            k[6] = k_next;
            while next_sample < sample_times.len() && sample_times[next_sample] <= t + h {
                let theta = (sample_times[next_sample] - t) / h;
                out.push(interpolate(&y, &y_new, &k, h, theta));
                next_sample += 1;
            }
            t += h;
            y = y_new;
            k1 = k_next;
            h *= (SAFETY * err.max(1e-10).powf(-0.2)).clamp(MIN_SCALE, MAX_SCALE);
        } else {
            h *= (SAFETY * err.powf(-0.2)).clamp(MIN_SCALE, 1.0);
        }
    }

    if next_sample < sample_times.len() {
        // Remaining samples sit exactly at t_end within rounding.
        while next_sample < sample_times.len() && sample_times[next_sample] <= t + 1e-9 {
            out.push(y);
            next_sample += 1;
        }
        if next_sample < sample_times.len() {
            return Err(DynsysError::StepFailure { t });
        }
    }
    Ok(out)
}

/// Fourth-order dense interpolation at fraction `theta` of the step.
fn interpolate<const N: usize>(
    y: &[f64; N],
    y_new: &[f64; N],
    k: &[[f64; N]; 7],
    h: f64,
    theta: f64,
) -> [f64; N] {
    let mut out = [0.0; N];
    for i in 0..N {
        let ydiff = y_new[i] - y[i];
        let bspl = h * k[0][i] - ydiff;
        let r1 = y[i];
        let r2 = ydiff;
        let r3 = bspl;
        let r4 = ydiff - h * k[6][i] - bspl;
        let mut r5 = 0.0;
        for (j, kj) in k.iter().enumerate() {
            r5 += D[j] * kj[i];
        }
        r5 *= h;
        out[i] = r1 + theta * (r2 + (1.0 - theta) * (r3 + theta * (r4 + (1.0 - theta) * r5)));
    }
    out
}

fn initial_step<const N: usize>(
    span: f64,
    y: &[f64; N],
    dy: &[f64; N],
    abs_tol: f64,
    rel_tol: f64,
) -> f64 {
    let d0 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d1 = dy.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = if d1 > 1e-10 {
        0.01 * (abs_tol + rel_tol * d0) / (abs_tol + rel_tol * d1) * (d0 / d1).max(1e-3)
    } else {
        1e-4 * span
    };
    h.min(span / 10.0).max(span * 1e-10)
}
