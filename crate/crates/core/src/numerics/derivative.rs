use crate::Result;

/// A derivative estimate with its Richardson error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub error: f64,
}

/// Central difference at steps `h` and `h/2`, combined by one Richardson
/// step into a fourth-order estimate. The error estimate is `|D(h/2) − D(h)|/3`,
/// which shrinks about fourfold when `h` is halved.
pub fn richardson_central<F>(mut f: F, x: f64, h: f64) -> Result<Derivative>
where
    F: FnMut(f64) -> Result<f64>,
{
    let coarse = (f(x + h)? - f(x - h)?) / (2.0 * h);
    let half = 0.5 * h;
    let fine = (f(x + half)? - f(x - half)?) / h;
    let correction = (fine - coarse) / 3.0;
    Ok(Derivative {
        value: fine + correction,
        error: correction.abs(),
    })
}
