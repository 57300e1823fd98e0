//! Small fitting helpers.

/// Ordinary least squares `y ≈ a·x + b`; returns `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Least squares for `y ≈ s·x + b` with the slope fixed; returns `b`.
pub fn intercept_with_slope(x: &[f64], y: &[f64], s: f64) -> f64 {
    x.iter().zip(y).map(|(a, b)| b - s * a).sum::<f64>() / x.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_line() {
        let x = [0.0, 1.0, 2.5, 4.0];
        let y: Vec<f64> = x.iter().map(|v| -3.0 * v + 2.0).collect();
        let (a, b) = linear_fit(&x, &y);
        assert!((a + 3.0).abs() < 1e-14 && (b - 2.0).abs() < 1e-14);
        assert!((intercept_with_slope(&x, &y, -3.0) - 2.0).abs() < 1e-14);
    }
}
