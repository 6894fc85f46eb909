//! Small numerical building blocks shared by the statistics, optimizer and
//! authentication code.

use crate::error::{invalid, Error, Result};

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sums an iterator with Neumaier compensation, in iteration order.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = NeumaierSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Maximizes a concave function on `[lo, hi]` given its derivative, which must
/// be nonincreasing. Returns the maximizer to within `tol`.
pub fn maximize_concave<F: Fn(f64) -> f64>(deriv: F, lo: f64, hi: f64, tol: f64) -> f64 {
    debug_assert!(lo <= hi);
    if deriv(lo) <= 0.0 {
        return lo;
    }
    if deriv(hi) >= 0.0 {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= tol || m <= a || m >= b {
            break;
        }
        if deriv(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * GK_WEIGHTS[7];
    let mut gauss = fc * GAUSS_WEIGHTS[3];
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
///
/// Stops once the summed error estimate is below `abs_tol`; fails after
/// `max_intervals` subdivisions.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, max_intervals: usize) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(invalid("interval", format!("[{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total_err = neumaier_sum(parts.iter().map(|p| p.3));
        if total_err <= abs_tol {
            break;
        }
        if parts.len() >= max_intervals {
            return Err(Error::Quadrature(format!(
                "error estimate {total_err:.3e} above {abs_tol:.3e} after {max_intervals} intervals"
            )));
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let value = neumaier_sum(parts.iter().map(|p| p.2));
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Quadrature("non-finite integrand".into()))
    }
}

/// Euclidean projection onto `{x : sum(x) = 1, lo <= x_i <= hi}`.
pub fn project_box_simplex(v: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    let n = v.len() as f64;
    if v.is_empty() || lo * n > 1.0 + 1e-12 || hi * n < 1.0 - 1e-12 || lo > hi {
        return Err(invalid(
            "bounds",
            format!("[{lo}, {hi}] cannot hold a simplex point of size {}", v.len()),
        ));
    }
    let total = |s: f64| -> f64 { neumaier_sum(v.iter().map(|&x| (x - s).clamp(lo, hi))) };
    let vmax = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    // total(s) is nonincreasing in s, equal to n*hi at s_lo and n*lo at s_hi.
    let (mut s_lo, mut s_hi) = (vmin - hi, vmax - lo);
    for _ in 0..200 {
        let m = 0.5 * (s_lo + s_hi);
        if m <= s_lo || m >= s_hi {
            break;
        }
        if total(m) > 1.0 {
            s_lo = m;
        } else {
            s_hi = m;
        }
    }
    let s = 0.5 * (s_lo + s_hi);
    let mut x: Vec<f64> = v.iter().map(|&x| (x - s).clamp(lo, hi)).collect();
    // Push the residual into free coordinates so the sum is exact to rounding.
    let resid = 1.0 - neumaier_sum(x.iter().copied());
    let free: Vec<usize> = (0..x.len()).filter(|&i| x[i] > lo && x[i] < hi).collect();
    if !free.is_empty() {
        let share = resid / free.len() as f64;
        for i in free {
            x[i] = (x[i] + share).clamp(lo, hi);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let s = neumaier_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(s, 2.0);
    }

    #[test]
    fn integrate_polynomial_and_exponential() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-12, 100).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        let v = integrate(|x| (-x).exp(), 0.0, 50.0, 1e-12, 200).unwrap();
        assert!((v - (1.0 - (-50.0f64).exp())).abs() < 1e-11);
    }

    #[test]
    fn integrate_reports_failure() {
        assert!(integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-15, 3).is_err());
    }

    #[test]
    fn concave_maximizer_hits_interior_and_bounds() {
        let x = maximize_concave(|x| -2.0 * (x - 0.3), 0.0, 1.0, 1e-14);
        assert!((x - 0.3).abs() < 1e-12);
        assert_eq!(maximize_concave(|x| 1.0 - x, 0.0, 0.5, 1e-12), 0.5);
        assert_eq!(maximize_concave(|x| -1.0 - x, 0.0, 0.5, 1e-12), 0.0);
    }

    #[test]
    fn projection_properties() {
        let x = project_box_simplex(&[0.9, 0.5, -0.3], 0.0, 1.0).unwrap();
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((x[0] - 0.7).abs() < 1e-12 && (x[1] - 0.3).abs() < 1e-12 && x[2] == 0.0);
        let y = project_box_simplex(&[0.25; 4], 0.01, 0.99).unwrap();
        assert!(y.iter().all(|&v| (v - 0.25).abs() < 1e-15));
        assert!(project_box_simplex(&[0.5, 0.5], 0.6, 1.0).is_err());
    }
}
