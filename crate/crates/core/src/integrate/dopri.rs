//! Dormand–Prince 5(4) embedded pair with Hairer-style error control.

use crate::linalg::Vector;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

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
// fifth-order weights, also the last stage row (FSAL)
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Something carrying the value of `f(t, y)`.
pub(crate) trait Derivative {
    fn derivative(&self) -> &Vector;
}

impl Derivative for Vector {
    fn derivative(&self) -> &Vector {
        self
    }
}

/// Scaled RMS norm `√(mean (vᵢ / (atol + rtol·max(|aᵢ|, |bᵢ|)))²)`.
pub(crate) fn error_norm(v: &Vector, a: &Vector, b: &Vector, atol: f64, rtol: f64) -> f64 {
    let n = v.len().max(1) as f64;
    let mut acc = 0.0;
    for i in 0..v.len() {
        let sk = atol + rtol * a[i].abs().max(b[i].abs());
        let r = v[i] / sk;
        acc += r * r;
    }
    libm::sqrt(acc / n)
}

pub(crate) struct Step<P> {
    pub y: Vector,
    /// Error estimate in the scaled norm; accept when `≤ 1`.
    pub err: f64,
    /// `f(t + h, y)`, reused as the first stage of the next step.
    pub last: P,
}

/// One trial step of size `h` from `(t, y)` with `k1 = f(t, y)`.
pub(crate) fn try_step<P, E, F>(
    f: &mut F,
    t: f64,
    y: &Vector,
    k1: &Vector,
    h: f64,
    atol: f64,
    rtol: f64,
) -> Result<Step<P>, E>
where
    P: Derivative,
    F: FnMut(f64, &Vector) -> Result<P, E>,
{
    let k2 = f(t + C2 * h, &(y + h * A21 * k1))?;
    let k2 = k2.derivative().clone();
    let k3 = f(t + C3 * h, &(y + h * (A31 * k1 + A32 * &k2)))?;
    let k3 = k3.derivative().clone();
    let k4 = f(t + C4 * h, &(y + h * (A41 * k1 + A42 * &k2 + A43 * &k3)))?;
    let k4 = k4.derivative().clone();
    let k5 = f(t + C5 * h, &(y + h * (A51 * k1 + A52 * &k2 + A53 * &k3 + A54 * &k4)))?;
    let k5 = k5.derivative().clone();
    let k6 = f(
        t + h,
        &(y + h * (A61 * k1 + A62 * &k2 + A63 * &k3 + A64 * &k4 + A65 * &k5)),
    )?;
    let k6 = k6.derivative().clone();
    let y_new = y + h * (B1 * k1 + B3 * &k3 + B4 * &k4 + B5 * &k5 + B6 * &k6);
    let last = f(t + h, &y_new)?;
    let k7 = last.derivative();
    let e = h * (E1 * k1 + E3 * &k3 + E4 * &k4 + E5 * &k5 + E6 * &k6 + E7 * k7);
    let err = error_norm(&e, y, &y_new, atol, rtol);
    Ok(Step { y: y_new, err, last })
}

/// Step-size factor after a trial with scaled error `err`.
pub(crate) fn step_factor(err: f64, after_reject: bool) -> f64 {
    let fac = if err == 0.0 { 5.0 } else { 0.9 * libm::pow(err, -0.2) };
    let hi = if after_reject { 1.0 } else { 5.0 };
    fac.clamp(0.2, hi)
}

/// Hairer's starting-step heuristic. `f1` evaluates `f` at the probe
/// point; if it fails, the first guess is used.
pub(crate) fn initial_step<E>(
    f1: impl FnOnce(f64, &Vector) -> Result<Vector, E>,
    t: f64,
    y: &Vector,
    k1: &Vector,
    atol: f64,
    rtol: f64,
    h_max: f64,
) -> f64 {
    let zero = Vector::zeros(y.len());
    let d0 = error_norm(y, y, &zero, atol, rtol);
    let d1 = error_norm(k1, y, &zero, atol, rtol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(h_max);
    let y1 = y + h0 * k1;
    let h1 = match f1(t + h0, &y1) {
        Ok(k2) => {
            let d2 = error_norm(&(k2 - k1), y, &zero, atol, rtol) / h0;
            let dm = d1.max(d2);
            if dm <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                libm::pow(0.01 / dm, 0.2)
            }
        }
        Err(_) => h0,
    };
    (100.0 * h0).min(h1).min(h_max)
}
