//! Quartic factor `G(lambda)` of the characteristic polynomial at the
//! disease-free equilibrium.
//!
//! With `B1 = alpha+mu`, `B2 = gamma2+phi2+mu`, `B3 = gamma3+mu`,
//! `C1 = sigma+eps+mu`, `C2 = sigma`, `C3 = sigma(1-rho)alpha`, `C4 = eps omega`
//! and `D = beta S0`,
//!
//! ```text
//! G(l) = (l+B1)(l+B2)(l+B3)(l+C1) - D [C2 (l+B2)(l+B3) + C3 (l+B3) + C4 (l+B1)(l+B2)]
//!      = l^4 + a1 l^3 + a2 l^2 + a3 l + a4
//! ```
//!
//! and `a4 = G(0) = B1 B2 B3 C1 (1 - R_c)`.

use serde::Serialize;

use crate::model::{control_reproduction_number, ModelParameters};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuarticCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub d: f64,
}

pub fn quartic_coefficients(params: &ModelParameters) -> QuarticCoefficients {
    let b1 = params.e2_exit_rate();
    let b2 = params.i2_exit_rate();
    let b3 = params.a_exit_rate();
    let c1 = params.e1_exit_rate();
    let c2 = params.sigma();
    let c3 = params.sigma() * (1.0 - params.rho()) * params.alpha();
    let c4 = params.epsilon() * params.omega();
    let d = params.beta() * params.s0();

    let a1 = b1 + b2 + b3 + c1;
    let a2 = b1 * b2 + b1 * b3 + b2 * b3 + b1 * c1 + b2 * c1 + b3 * c1 - d * c2 - d * c4;
    let a3 = b1 * b2 * b3 + b1 * b2 * c1 + b1 * b3 * c1 + b2 * b3 * c1
        - d * b2 * c2
        - d * b3 * c2
        - d * c3
        - d * b1 * c4
        - d * b2 * c4;
    let a4 = b1 * b2 * b3 * c1 * (1.0 - control_reproduction_number(params));

    QuarticCoefficients { a1, a2, a3, a4, b1, b2, b3, c1, c2, c3, c4, d }
}

impl QuarticCoefficients {
    /// `a4` from the term-by-term expansion
    /// `B1 B2 B3 C1 - D B2 B3 C2 - D B1 B2 C4 - D B3 C3`.
    pub fn a4_expanded(&self) -> f64 {
        self.b1 * self.b2 * self.b3 * self.c1
            - self.d * self.b2 * self.b3 * self.c2
            - self.d * self.b1 * self.b2 * self.c4
            - self.d * self.b3 * self.c3
    }

    /// Coefficient form, Horner evaluation.
    pub fn eval(&self, l: f64) -> f64 {
        (((l + self.a1) * l + self.a2) * l + self.a3) * l + self.a4
    }

    /// Product form of `G`.
    pub fn eval_product(&self, l: f64) -> f64 {
        let (b1, b2, b3) = (l + self.b1, l + self.b2, l + self.b3);
        b1 * b2 * b3 * (l + self.c1) - self.d * (self.c2 * b2 * b3 + self.c3 * b3 + self.c4 * b1 * b2)
    }

    /// Magnitude of the individual terms of the product form, used to judge
    /// cancellation when comparing the two forms.
    fn product_scale(&self, l: f64) -> f64 {
        let (b1, b2, b3) = ((l + self.b1).abs(), (l + self.b2).abs(), (l + self.b3).abs());
        b1 * b2 * b3 * (l + self.c1).abs() + self.d * (self.c2 * b2 * b3 + self.c3 * b3 + self.c4 * b1 * b2)
    }

    /// Largest relative disagreement between coefficient and product forms
    /// over ten fixed sample points spread across the rate scale.
    pub fn product_form_mismatch(&self) -> f64 {
        let scale = self.a1.max(1e-12);
        // fixed, irregular sample offsets in [-1, 1]
        const SAMPLES: [f64; 10] = [-0.93, -0.71, -0.44, -0.28, -0.05, 0.12, 0.37, 0.58, 0.81, 0.97];
        SAMPLES
            .iter()
            .map(|&u| {
                let l = u * scale;
                (self.eval(l) - self.eval_product(l)).abs() / self.product_scale(l)
            })
            .fold(0.0, f64::max)
    }
}

/// Interval `[lo, hi]` with `G(lo) < 0 < G(hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
}

impl RootBracket {
    /// Bisect down to width `tol`; returns the midpoint.
    pub fn refine(&self, coeffs: &QuarticCoefficients, tol: f64) -> f64 {
        let (mut lo, mut hi) = (self.lo, self.hi);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if coeffs.eval(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Certificate that `G` has a positive real root: exists iff `a4 < 0`, since
/// then `G(0) < 0` and `G(+inf) = +inf`. The bracket's upper end is found by
/// doubling.
pub fn positive_root_certificate(coeffs: &QuarticCoefficients) -> Option<RootBracket> {
    if !(coeffs.a4 < 0.0) {
        return None;
    }
    let mut hi = coeffs.a1.max(1.0);
    while coeffs.eval(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return None;
        }
    }
    Some(RootBracket { lo: 0.0, hi })
}
