//! Central finite differences with one Richardson extrapolation step.

use crate::error::Result;
use crate::linalg;

/// (f(x+h) - f(x-h)) / 2h for vector-valued f.
pub fn central<F>(f: F, x: f64, h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let fp = f(x + h)?;
    let fm = f(x - h)?;
    Ok(linalg::scale_f64(&linalg::sub(&fp, &fm), 1.0 / (2.0 * h)))
}

/// Richardson-extrapolated central difference over steps h and h/2;
/// the O(h^2) error of the centered stencil cancels.
pub fn richardson<F>(f: F, x: f64, h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Copy,
{
    let d_h = central(f, x, h)?;
    let d_h2 = central(f, x, h / 2.0)?;
    Ok(linalg::sub(&linalg::scale_f64(&d_h2, 4.0 / 3.0), &linalg::scale_f64(&d_h, 1.0 / 3.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_beats_plain_central() {
        let f = |x: f64| -> Result<Vec<f64>> { Ok(vec![x.sin()]) };
        let x = 0.7;
        let h = 1e-3;
        let plain = central(f, x, h).unwrap()[0];
        let rich = richardson(f, x, h).unwrap()[0];
        let exact = x.cos();
        assert!((rich - exact).abs() < (plain - exact).abs());
        assert!((rich - exact).abs() < 1e-12);
    }
}
