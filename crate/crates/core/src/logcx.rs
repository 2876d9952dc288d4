//! Complex values stored as (log-magnitude, argument) so that products with
//! factors like `z^N` at `N ~ 10^6` never leave the representable range.

use num_complex::Complex64;
use std::f64::consts::PI;

/// A complex number kept in log-polar form: `log_mag = ln|w|` (−∞ encodes
/// zero) and `arg ∈ (−π, π]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogComplex {
    pub log_mag: f64,
    pub arg: f64,
}

/// Wrap an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    if a.abs() <= PI {
        // fast path; also keeps +π as is
        if a == -PI {
            return PI;
        }
        return a;
    }
    let two_pi = 2.0 * PI;
    let mut r = a % two_pi;
    if r > PI {
        r -= two_pi;
    } else if r <= -PI {
        r += two_pi;
    }
    r
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex { log_mag: f64::NEG_INFINITY, arg: 0.0 };
    pub const ONE: LogComplex = LogComplex { log_mag: 0.0, arg: 0.0 };

    pub fn new(log_mag: f64, arg: f64) -> Self {
        LogComplex { log_mag, arg: wrap_angle(arg) }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return LogComplex::ZERO;
        }
        LogComplex { log_mag: 0.5 * z.norm_sqr().ln(), arg: z.im.atan2(z.re) }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            LogComplex::ZERO
        } else if x > 0.0 {
            LogComplex { log_mag: x.ln(), arg: 0.0 }
        } else {
            LogComplex { log_mag: (-x).ln(), arg: PI }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    /// Back to rectangular form. Overflows to ±inf when `log_mag > ~709`.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let m = self.log_mag.exp();
        Complex64::new(m * self.arg.cos(), m * self.arg.sin())
    }

    pub fn mul(&self, rhs: &LogComplex) -> LogComplex {
        if self.is_zero() || rhs.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex::new(self.log_mag + rhs.log_mag, self.arg + rhs.arg)
    }

    pub fn div(&self, rhs: &LogComplex) -> LogComplex {
        LogComplex::new(self.log_mag - rhs.log_mag, self.arg - rhs.arg)
    }

    pub fn conj(&self) -> LogComplex {
        LogComplex { log_mag: self.log_mag, arg: wrap_angle(-self.arg) }
    }

    pub fn scale(&self, c: f64) -> LogComplex {
        self.mul(&LogComplex::from_f64(c))
    }

    pub fn neg(&self) -> LogComplex {
        LogComplex::new(self.log_mag, self.arg + PI)
    }

    /// Max-shifted addition: exact to f64 in the shifted frame, immune to
    /// overflow of the raw magnitudes.
    pub fn add(&self, rhs: &LogComplex) -> LogComplex {
        if self.is_zero() {
            return *rhs;
        }
        if rhs.is_zero() {
            return *self;
        }
        let m = self.log_mag.max(rhs.log_mag);
        let a = (self.log_mag - m).exp();
        let b = (rhs.log_mag - m).exp();
        let sum = Complex64::new(
            a * self.arg.cos() + b * rhs.arg.cos(),
            a * self.arg.sin() + b * rhs.arg.sin(),
        );
        if sum.re == 0.0 && sum.im == 0.0 {
            return LogComplex::ZERO;
        }
        let v = LogComplex::from_complex(sum);
        LogComplex { log_mag: v.log_mag + m, arg: v.arg }
    }

    pub fn sub(&self, rhs: &LogComplex) -> LogComplex {
        self.add(&rhs.neg())
    }
}

impl std::ops::Mul for LogComplex {
    type Output = LogComplex;
    fn mul(self, rhs: LogComplex) -> LogComplex {
        LogComplex::mul(&self, &rhs)
    }
}

impl std::ops::Div for LogComplex {
    type Output = LogComplex;
    fn div(self, rhs: LogComplex) -> LogComplex {
        LogComplex::div(&self, &rhs)
    }
}

/// `E(u) = (1 - e^u)/(-u) = Σ_{k≥0} u^k/(k+1)!`, by series. Accurate for
/// `|u| ≤ 0.25`.
fn e_series(u: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..=14 {
        term = term * u / (k as f64 + 1.0);
        sum += term;
        if term.norm_sqr() < 1e-36 {
            break;
        }
    }
    sum
}

/// Stable `log(1 - e^u)` for complex `u` given as (re, im). Three regimes:
/// `Re u` well below 0 (direct), well above 0 (factor out `e^u`), and the
/// strip near the imaginary axis where the series around the zeros of
/// `1 - e^u` takes over.
pub fn log_one_minus_exp(re: f64, im: f64) -> LogComplex {
    const STRIP: f64 = 1e-3;
    if re < -STRIP {
        // |e^u| ≤ e^{-strip}: 1 - e^u is bounded away from 0
        if re < -745.0 {
            // e^u underflows; log(1 - e^u) ≈ -e^u ≈ 0
            return LogComplex::ONE;
        }
        let m = re.exp();
        let t = Complex64::new(m * im.cos(), m * im.sin());
        let w = Complex64::new(1.0 - t.re, -t.im);
        LogComplex::from_complex(w)
    } else if re > STRIP {
        // 1 - e^u = -e^u (1 - e^{-u})
        let inner = log_one_minus_exp(-re, -im);
        LogComplex::new(re + inner.log_mag, im + PI + inner.arg)
    } else {
        // near the axis: reduce im mod 2π; e^u unchanged
        let im_red = wrap_angle(im);
        if im_red.abs() >= 0.1 {
            let m = re.exp();
            let t = Complex64::new(m * im_red.cos(), m * im_red.sin());
            let w = Complex64::new(1.0 - t.re, -t.im);
            LogComplex::from_complex(w)
        } else {
            // u small: 1 - e^u = -u·E(u)
            let u = Complex64::new(re, im_red);
            if u.re == 0.0 && u.im == 0.0 {
                return LogComplex::ZERO;
            }
            let lu = LogComplex::from_complex(u);
            let le = LogComplex::from_complex(e_series(u));
            LogComplex::new(lu.log_mag + le.log_mag, lu.arg + PI + le.arg)
        }
    }
}

/// Stable `log[(1 - e^{n·δ}) / (1 - e^δ)]` for a ring factor with one zero
/// divided out. `δ = log(w/λ)` for the divided zero `λ`; the quotient equals
/// `Σ_{k<n} (w/λ)^k` and tends to `n` as `w → λ`. Requires `|δ| ≤ π` (use the
/// principal log).
pub fn log_ratio_one_minus_exp(n: f64, delta_re: f64, delta_im: f64) -> LogComplex {
    let u_re = n * delta_re;
    let u_im = n * delta_im;
    if u_re.hypot(u_im) < 0.1 {
        // both numerator and denominator near their zero: use E-series
        let u = Complex64::new(u_re, u_im);
        let d = Complex64::new(delta_re, delta_im);
        let le_u = LogComplex::from_complex(e_series(u));
        let le_d = LogComplex::from_complex(e_series(d));
        LogComplex::new(n.ln() + le_u.log_mag - le_d.log_mag, le_u.arg - le_d.arg)
    } else {
        let num = log_one_minus_exp(u_re, u_im);
        let den = log_one_minus_exp(delta_re, delta_im);
        num.div(&den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(u: Complex64) -> LogComplex {
        LogComplex::from_complex(Complex64::new(1.0, 0.0) - u.exp())
    }

    fn close(a: LogComplex, b: LogComplex, tol: f64) -> bool {
        (a.log_mag - b.log_mag).abs() <= tol * (1.0 + a.log_mag.abs())
            && wrap_angle(a.arg - b.arg).abs() <= tol.max(1e-12)
    }

    #[test]
    fn matches_direct_in_safe_region() {
        let cases = [
            Complex64::new(-5.0, 1.3),
            Complex64::new(-0.5, -2.0),
            Complex64::new(-0.002, 3.0),
            Complex64::new(0.5, 0.7),
            Complex64::new(3.0, -1.0),
            Complex64::new(0.0005, 1.7),
        ];
        for u in cases {
            let got = log_one_minus_exp(u.re, u.im);
            let want = direct(u);
            assert!(close(got, want, 1e-12), "u={u}: got {got:?} want {want:?}");
        }
    }

    #[test]
    fn huge_positive_re_no_overflow() {
        // log(1 - e^u) ≈ u + iπ for Re u large
        let got = log_one_minus_exp(5000.0, 0.3);
        assert!((got.log_mag - 5000.0).abs() < 1e-9);
        assert!(wrap_angle(got.arg - (0.3 + PI)).abs() < 1e-9);
    }

    #[test]
    fn near_zero_of_factor() {
        // u = 1e-9·(1+i): 1 - e^u ≈ -u
        let got = log_one_minus_exp(1e-9, 1e-9);
        let r = 1e-9f64 * std::f64::consts::SQRT_2;
        assert!((got.log_mag - r.ln()).abs() < 1e-9);
        // arg(-u) = -π + π/4
        assert!(wrap_angle(got.arg - (PI + PI / 4.0)).abs() < 1e-6);
    }

    #[test]
    fn exact_zero_is_log_zero() {
        let got = log_one_minus_exp(0.0, 0.0);
        assert!(got.is_zero());
        // and on a period
        let got = log_one_minus_exp(0.0, 4.0 * PI);
        assert!(got.is_zero());
    }

    #[test]
    fn punctured_ratio_limit() {
        // (1 - x^n)/(1 - x) → n as x → 1
        for n in [5.0, 1000.0, 250_000.0] {
            let got = log_ratio_one_minus_exp(n, 0.0, 0.0);
            assert!((got.log_mag - n.ln()).abs() < 1e-12, "n={n}");
            assert!(got.arg.abs() < 1e-12);
        }
    }

    #[test]
    fn punctured_ratio_matches_direct() {
        // moderate n so the direct formula is computable
        let n = 37.0;
        for (dre, dim) in [(0.01, 0.02), (-0.03, 0.05), (0.0, 0.11), (0.2, -0.4)] {
            let d = Complex64::new(dre, dim);
            let x = d.exp();
            let want = LogComplex::from_complex(
                (Complex64::new(1.0, 0.0) - (d * n).exp()) / (Complex64::new(1.0, 0.0) - x),
            );
            let got = log_ratio_one_minus_exp(n, dre, dim);
            assert!(close(got, want, 1e-10), "d=({dre},{dim})");
        }
    }

    #[test]
    fn mul_wraps_argument() {
        let a = LogComplex::new(0.0, 3.0);
        let b = LogComplex::new(0.0, 3.0);
        let c = a * b;
        assert!((c.arg - (6.0 - 2.0 * PI)).abs() < 1e-12);
    }
}
