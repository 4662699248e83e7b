//! Explicit Runge-Kutta steppers for autonomous systems on fixed-size arrays.

/// One classical fourth-order Runge-Kutta step.
pub(crate) fn rk4_step<const N: usize, F>(f: &F, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k1 = f(y);
    let k2 = f(&axpy(y, h / 2.0, &k1));
    let k3 = f(&axpy(y, h / 2.0, &k2));
    let k4 = f(&axpy(y, h, &k3));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + a * k[i])
}

// Dormand-Prince 5(4) tableau; the system is autonomous so the nodes c_i
// are not needed
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub(crate) struct DoPriStep<const N: usize> {
    pub y: [f64; N],
    /// Derivative at the new point (first stage of the next step).
    pub f_new: [f64; N],
    /// Scaled error norm; the step is acceptable when <= 1.
    pub err: f64,
}

/// One Dormand-Prince step from `y` with derivative `f0` already evaluated.
pub(crate) fn dopri_step<const N: usize, F>(
    f: &F,
    y: &[f64; N],
    f0: &[f64; N],
    h: f64,
    atol: f64,
    rtol: f64,
) -> DoPriStep<N>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k1 = f0;
    let k2 = f(&std::array::from_fn(|i| y[i] + h * A21 * k1[i]));
    let k3 = f(&std::array::from_fn(|i| y[i] + h * (A31 * k1[i] + A32 * k2[i])));
    let k4 = f(&std::array::from_fn(|i| y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])));
    let k5 = f(&std::array::from_fn(|i| y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])));
    let k6 =
        f(&std::array::from_fn(|i| y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])));
    let y_new: [f64; N] =
        std::array::from_fn(|i| y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]));
    let k7 = f(&y_new);

    let mut err: f64 = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
        err = err.max(e.abs() / sc);
    }
    DoPriStep { y: y_new, f_new: k7, err }
}

/// Starting step size heuristic (Hairer, Norsett & Wanner, II.4).
pub(crate) fn initial_step<const N: usize, F>(f: &F, y: &[f64; N], f0: &[f64; N], atol: f64, rtol: f64) -> f64
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let norm = |v: &[f64; N]| -> f64 {
        let s: f64 = (0..N).map(|i| (v[i] / (atol + rtol * y[i].abs())).powi(2)).sum();
        (s / N as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y, h0, f0);
    let f1 = f(&y1);
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1)
}
