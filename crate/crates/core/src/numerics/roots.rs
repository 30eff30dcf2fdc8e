use crate::{Error, Result};

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping when the bracket
/// is narrower than `rtol` relative to its midpoint. Brackets on the positive
/// axis are split geometrically, so decades are covered evenly.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, rtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid(
            "bracket",
            format!("need finite lo < hi, got [{lo}, {hi}]"),
        ));
    }
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NotBracketed {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let geometric = a > 0.0;
    for _ in 0..400 {
        let mid = if geometric { (a * b).sqrt() } else { 0.5 * (a + b) };
        if (b - a) <= rtol * mid.abs() || mid <= a || mid >= b {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(if geometric { (a * b).sqrt() } else { 0.5 * (a + b) })
}
