//! Weighted least-squares isotonic regression by pool-adjacent-violators.

/// Returns the non-decreasing sequence `x` minimizing `sum w_i (x_i - y_i)^2`.
///
/// Weights must be positive and the same length as `y`.
pub fn increasing_fit(y: &[f64], w: &[f64]) -> Vec<f64> {
    assert_eq!(y.len(), w.len(), "values and weights differ in length");
    // Each block: (weighted mean, total weight, number of points).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&yi, &wi) in y.iter().zip(w) {
        debug_assert!(wi > 0.0);
        let mut block = (yi, wi, 1usize);
        while let Some(&(mean, weight, count)) = blocks.last() {
            if mean <= block.0 {
                break;
            }
            blocks.pop();
            let total = weight + block.1;
            block = ((mean * weight + block.0 * block.1) / total, total, count + block.2);
        }
        blocks.push(block);
    }
    let mut out = Vec::with_capacity(y.len());
    for (mean, _, count) in blocks {
        out.extend(std::iter::repeat_n(mean, count));
    }
    out
}

/// Non-increasing counterpart of [`increasing_fit`].
pub fn decreasing_fit(y: &[f64], w: &[f64]) -> Vec<f64> {
    let ry: Vec<f64> = y.iter().rev().copied().collect();
    let rw: Vec<f64> = w.iter().rev().copied().collect();
    let mut fit = increasing_fit(&ry, &rw);
    fit.reverse();
    fit
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn already_monotone_is_unchanged() {
        let y = [1.0, 2.0, 2.0, 5.0];
        assert_eq!(increasing_fit(&y, &[1.0; 4]), y.to_vec());
    }

    #[test]
    fn pools_violators() {
        let fit = increasing_fit(&[1.0, 3.0, 2.0, 4.0], &[1.0; 4]);
        assert_eq!(fit, vec![1.0, 2.5, 2.5, 4.0]);
        let fit = increasing_fit(&[3.0, 2.0, 1.0], &[1.0; 3]);
        assert_eq!(fit, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn weights_shift_the_pooled_mean() {
        let fit = decreasing_fit(&[1.0, 4.0], &[3.0, 1.0]);
        assert_eq!(fit, vec![1.75, 1.75]);
    }

    #[test]
    fn decreasing_brute_force_two_points() {
        // Minimizer over the half-plane x0 >= x1 for a violating pair is the
        // weighted mean; compare against a scan.
        let (y, w) = ([0.2, 0.9], [2.0, 1.0]);
        let fit = decreasing_fit(&y, &w);
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=10_000 {
            let c = k as f64 / 10_000.0;
            let loss = w[0] * (c - y[0]).powi(2) + w[1] * (c - y[1]).powi(2);
            if loss < best.0 {
                best = (loss, c);
            }
        }
        assert!((fit[0] - best.1).abs() < 1e-4 && fit[0] == fit[1]);
    }
}
