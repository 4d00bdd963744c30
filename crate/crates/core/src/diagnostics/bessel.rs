//! Bessel functions of the first kind by the ascending power series.

use statrs::function::gamma::gamma;
use twofloat::TwoFloat;

/// `J_nu(x) = sum_m (-1)^m (x/2)^(2m+nu) / (m! Gamma(m+nu+1))` for `x >= 0`,
/// `nu >= 0`.
///
/// The series is written as `(x/2)^nu / Gamma(nu+1)` times a sum of term
/// ratios; that sum is accumulated in double-double arithmetic because its
/// terms reach `~e^x` before cancelling down to `O(1)`.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    debug_assert!(x >= 0.0 && nu >= 0.0);
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let half = TwoFloat::from(0.5 * x);
    let q = -(half * half);
    let mut term = TwoFloat::from(1.0);
    let mut sum = term;
    let mut m = 0u32;
    loop {
        m += 1;
        let mf = m as f64;
        term = div_exact(term * q / mf, TwoFloat::new_add(mf, nu));
        sum += term;
        let t = f64::from(term).abs();
        if t <= 1e-34 * f64::from(sum).abs().max(1e-300) || m > 500 {
            break;
        }
    }
    let prefactor = (0.5 * x).powf(nu) / gamma(nu + 1.0);
    prefactor * f64::from(sum)
}

/// `a / b` to double-double accuracy. The library's own double-double
/// quotient rounds its residual in plain `f64`, so divide by the high word
/// and fold the low word in as a first-order correction.
fn div_exact(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q = a / b.hi();
    q - q * (b.lo() / b.hi())
}

/// First positive zero of `J_nu` above `nu` (zeros of `J_nu` exceed `nu`),
/// located by a forward scan and refined by bisection.
pub fn first_zero(nu: f64) -> f64 {
    let step = 0.05;
    let mut a = nu.max(step);
    let mut fa = bessel_j(nu, a);
    let mut b = a + step;
    let mut fb = bessel_j(nu, b);
    while fa.signum() == fb.signum() && fb != 0.0 {
        a = b;
        fa = fb;
        b += step;
        fb = bessel_j(nu, b);
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = bessel_j(nu, mid);
        if fm == 0.0 || (b - a) < 1e-15 * b {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
