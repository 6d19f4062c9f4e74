//! Standard Student t distribution.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const CF_EPS: f64 = 1e-16;
const CF_MAX_ITER: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudentFn {
    Cdf,
    Quantile,
}

pub fn student_dist(kind: StudentFn, arg: f64, dof: f64) -> Result<f64> {
    match kind {
        StudentFn::Cdf => cdf(arg, dof),
        StudentFn::Quantile => quantile(arg, dof),
    }
}

fn check_dof(dof: f64) -> Result<()> {
    if dof > 0.0 && !dof.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!("degrees of freedom must be positive, got {dof}")))
    }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`, with `y = 1 − x` supplied
/// separately to avoid cancellation.
fn reg_inc_beta(x: f64, y: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * y.ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, y) / b
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !(a > 0.0) || !(b > 0.0) {
        return Err(Error::Domain(format!("incomplete beta at x={x}, a={a}, b={b}")));
    }
    Ok(reg_inc_beta(x, 1.0 - x, a, b))
}

/// Cumulative distribution function of the standard Student t with `dof` degrees of freedom.
pub fn cdf(t: f64, dof: f64) -> Result<f64> {
    check_dof(dof)?;
    if t.is_nan() {
        return Err(Error::Domain("t is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 1.0 } else { 0.0 });
    }
    let t2 = t * t;
    let (x, y) = if t2 < dof { (dof / (dof + t2), t2 / (dof + t2)) } else {
        let r = dof / t2;
        (r / (1.0 + r), 1.0 / (1.0 + r))
    };
    let tail = 0.5 * reg_inc_beta(x, y, 0.5 * dof, 0.5);
    Ok(if t > 0.0 { 1.0 - tail } else { tail })
}

/// Density of the standard Student t.
pub fn pdf(t: f64, dof: f64) -> Result<f64> {
    check_dof(dof)?;
    let ln = ln_gamma(0.5 * (dof + 1.0))
        - ln_gamma(0.5 * dof)
        - 0.5 * (dof * std::f64::consts::PI).ln()
        - 0.5 * (dof + 1.0) * (t * t / dof).ln_1p();
    Ok(ln.exp())
}

/// Quantile function: bisection to a narrow bracket, then Newton polishing.
pub fn quantile(u: f64, dof: f64) -> Result<f64> {
    check_dof(dof)?;
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("quantile level must lie in (0, 1), got {u}")));
    }
    if u == 0.5 {
        return Ok(0.0);
    }
    let f = |t: f64| cdf(t, dof).map(|c| c - u);
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while f(lo)? > 0.0 {
        hi = lo;
        lo *= 2.0;
        if lo < -1e300 {
            return Ok(lo);
        }
    }
    while f(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(hi);
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-6 * mid.abs().max(1.0) {
            break;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..50 {
        let g = f(t)?;
        let dens = pdf(t, dof)?;
        if dens <= 0.0 {
            break;
        }
        let next = (t - g / dens).clamp(lo, hi);
        let step = (next - t).abs();
        t = next;
        if step <= 1e-15 * t.abs().max(1e-300) {
            break;
        }
    }
    Ok(t)
}
