//! Probability that energy-based beam selection picks the aligned pair.
//!
//! With `L` pairs, the aligned pair's statistic is `chi2_2(lambda)` and the
//! others are central `chi2_2`. The closed form is the alternating sum
//! `sum_k C(L-1, k) (-1)^k exp(-lambda k / (2(k+1))) / (k+1)`, which loses all
//! precision for large `L`. An equivalent positive series is used there:
//! `P_a = sum_j Pois(j; lambda/2) b_j` with `b_j = h_j(1, 1/2, ..., 1/L) / L`,
//! where `h_j` is the complete homogeneous symmetric polynomial.

use statrs::function::gamma::ln_gamma;

use super::ncx2::Ncx2;
use crate::error::{invalid, Result};
use crate::numeric::{integrate, NeumaierSum};

/// Largest term magnitude for which the alternating sum is trusted.
const DIRECT_TERM_LIMIT: f64 = 1e2;
const QUAD_TOL: f64 = 1e-11;
const QUAD_INTERVALS: usize = 2000;
/// Upper integration limit is placed where the aligned law's tail drops below this.
const QUAD_TAIL: f64 = 1e-14;

fn check_pa_args(beam_pairs: usize, lambda: f64) -> Result<()> {
    if beam_pairs == 0 {
        return Err(invalid("beam_pairs", "must be at least 1"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(invalid(
            "lambda",
            format!("must be finite and nonnegative, got {lambda}"),
        ));
    }
    Ok(())
}

fn ln_binomial(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

fn direct_is_safe(beam_pairs: usize) -> bool {
    let n = (beam_pairs - 1) as f64;
    ln_binomial(n, (n / 2.0).floor()) <= DIRECT_TERM_LIMIT.ln()
}

/// Returns `(P_a, dP_a/dlambda)` from the alternating sum.
fn pa_direct(beam_pairs: usize, lambda: f64) -> (f64, f64) {
    let n = (beam_pairs - 1) as f64;
    let mut value = NeumaierSum::new();
    let mut slope = NeumaierSum::new();
    let mut binom = 1.0;
    for k in 0..beam_pairs {
        let k = k as f64;
        let sign = if (k as u64).is_multiple_of(2) { 1.0 } else { -1.0 };
        let rate = k / (2.0 * (k + 1.0));
        let term = sign * binom * (-lambda * rate).exp() / (k + 1.0);
        value.add(term);
        slope.add(-rate * term);
        binom = binom * (n - k) / (k + 1.0);
    }
    (value.value(), slope.value())
}

/// Returns `(P_a, dP_a/dlambda)` from the Poisson-mixture series.
fn pa_series(beam_pairs: usize, lambda: f64) -> (f64, f64) {
    let mu = 0.5 * lambda;
    let terms = (mu + 12.0 * mu.sqrt() + 40.0).ceil() as usize + 1;
    // h[j] for the variables 1, 1/2, ..., 1/L, built one variable at a time.
    let mut h = vec![0.0; terms + 1];
    h[0] = 1.0;
    for i in 1..=beam_pairs {
        let x = 1.0 / i as f64;
        for j in 1..=terms {
            h[j] += x * h[j - 1];
        }
    }
    let scale = 1.0 / beam_pairs as f64;
    let b: Vec<f64> = h.iter().map(|v| v * scale).collect();
    let mut value = NeumaierSum::new();
    let mut slope = NeumaierSum::new();
    for j in 0..terms {
        let w = if mu == 0.0 {
            if j == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (-mu + j as f64 * mu.ln() - ln_gamma(j as f64 + 1.0)).exp()
        };
        value.add(w * b[j]);
        slope.add(0.5 * w * (b[j + 1] - b[j]));
    }
    (value.value(), slope.value())
}

fn pa_and_slope(beam_pairs: usize, lambda: f64) -> Result<(f64, f64)> {
    check_pa_args(beam_pairs, lambda)?;
    if beam_pairs == 1 {
        return Ok((1.0, 0.0));
    }
    let (v, d) = if direct_is_safe(beam_pairs) {
        pa_direct(beam_pairs, lambda)
    } else {
        pa_series(beam_pairs, lambda)
    };
    Ok((v.clamp(0.0, 1.0), d.max(0.0)))
}

/// Alignment probability with `beam_pairs` candidates and aligned-pair
/// noncentrality `lambda`.
pub fn pa_closed_form(beam_pairs: usize, lambda: f64) -> Result<f64> {
    Ok(pa_and_slope(beam_pairs, lambda)?.0)
}

/// `dP_a / dlambda`.
pub fn pa_derivative(beam_pairs: usize, lambda: f64) -> Result<f64> {
    Ok(pa_and_slope(beam_pairs, lambda)?.1)
}

/// `d log P_a / dlambda`.
pub fn grad_log_pa(beam_pairs: usize, lambda: f64) -> Result<f64> {
    let (v, d) = pa_and_slope(beam_pairs, lambda)?;
    Ok(d / v)
}

/// Noncentralities of the four alignment events in the side-lobe model:
/// both main lobes, transmit side lobe only, receive side lobe only, both
/// side lobes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidelobeLambdas {
    pub main: f64,
    pub tx_side: f64,
    pub rx_side: f64,
    pub both_side: f64,
}

impl SidelobeLambdas {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda_main", self.main),
            ("lambda_tx_side", self.tx_side),
            ("lambda_rx_side", self.rx_side),
            ("lambda_both_side", self.both_side),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be finite and nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

/// Misalignment probabilities `[P_ma1, P_ma2, P_ma3]` against the transmit
/// side-lobe, receive side-lobe and double side-lobe competitors.
pub fn misalignment_terms(l_t: usize, l_r: usize, lambdas: &SidelobeLambdas) -> Result<[f64; 3]> {
    if l_t == 0 || l_r == 0 {
        return Err(invalid("codebook", "sizes must be at least 1"));
    }
    lambdas.validate()?;
    let counts = [(l_t - 1) as f64, (l_r - 1) as f64, ((l_t - 1) * (l_r - 1)) as f64];
    let comps = [lambdas.tx_side, lambdas.rx_side, lambdas.both_side];
    let aligned = Ncx2::new(2.0, lambdas.main)?;
    let y_max = aligned.inverse_sf(QUAD_TAIL)?;
    let mut values = [0.0; 3];
    for k in 0..3 {
        if counts[k] == 0.0 {
            continue;
        }
        let m = counts[k];
        let comp2 = Ncx2::new(2.0, comps[k])?;
        let cdf_pow = |y: f64| -> f64 {
            let q = comp2.sf(y).unwrap_or(f64::NAN);
            (m * (-q).ln_1p()).exp()
        };
        let stay = integrate(|y| cdf_pow(y) * aligned.pdf(y), 0.0, y_max, QUAD_TOL, QUAD_INTERVALS)?;
        values[k] = (1.0 - stay).clamp(0.0, 1.0);
    }
    Ok(values)
}

/// Lower bound on the alignment probability under side-lobe leakage.
pub fn pa_lower_bound(l_t: usize, l_r: usize, lambdas: &SidelobeLambdas) -> Result<f64> {
    let terms = misalignment_terms(l_t, l_r, lambdas)?;
    Ok((1.0 - terms.iter().sum::<f64>()).max(0.0))
}

/// Exact alignment probability for arbitrary competitor noncentralities:
/// `P(Y_i > Y_l for all l != i)` with independent `Y_l ~ chi2_2(lambdas[l])`.
pub fn pa_general(lambdas: &[f64], aligned: usize) -> Result<f64> {
    if aligned >= lambdas.len() {
        return Err(invalid(
            "aligned",
            format!("index {aligned} out of range {}", lambdas.len()),
        ));
    }
    let target = Ncx2::new(2.0, lambdas[aligned])?;
    let others = lambdas
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != aligned)
        .map(|(_, &l)| Ncx2::new(2.0, l))
        .collect::<Result<Vec<_>>>()?;
    let y_max = target.inverse_sf(QUAD_TAIL)?;
    let integrand = |y: f64| -> f64 {
        let mut log_cdf = NeumaierSum::new();
        for law in &others {
            log_cdf.add((-law.sf(y).unwrap_or(f64::NAN)).ln_1p());
        }
        log_cdf.value().exp() * target.pdf(y)
    };
    Ok(integrate(integrand, 0.0, y_max, QUAD_TOL, QUAD_INTERVALS)?.clamp(0.0, 1.0))
}

/// Exact alignment probability when competitors come in groups of equal
/// noncentrality, together with its derivative along `lambda_main` when each
/// group's noncentrality moves as `ratio * lambda_main`.
///
/// `groups` holds `(count, lambda, ratio)` triples.
pub fn pa_grouped(lambda_main: f64, groups: &[(usize, f64, f64)]) -> Result<(f64, f64)> {
    let target = Ncx2::new(2.0, lambda_main)?;
    let target4 = Ncx2::new(4.0, lambda_main)?;
    let laws = groups
        .iter()
        .filter(|g| g.0 > 0)
        .map(|&(m, l, r)| Ok((m as f64, Ncx2::new(2.0, l)?, Ncx2::new(4.0, l)?, r)))
        .collect::<Result<Vec<_>>>()?;
    let y_max = target4.inverse_sf(QUAD_TAIL)?;
    let stay = |y: f64| -> (f64, f64) {
        // Returns (prod F_k^m_k, sum_k m_k r_k dF_k / F_k).
        let mut log_prod = 0.0;
        let mut score = 0.0;
        for (m, law2, law4, r) in &laws {
            let q2 = law2.sf(y).unwrap_or(f64::NAN);
            let f = 1.0 - q2;
            log_prod += m * (-q2).ln_1p();
            if f > 0.0 {
                let q4 = law4.sf(y).unwrap_or(f64::NAN);
                score += m * r * 0.5 * (q2 - q4) / f;
            }
        }
        (log_prod.exp(), score)
    };
    let value = integrate(|y| stay(y).0 * target.pdf(y), 0.0, y_max, QUAD_TOL, QUAD_INTERVALS)?;
    let slope = integrate(
        |y| {
            let (prod, score) = stay(y);
            let f1 = target.pdf(y);
            prod * (score * f1 + 0.5 * (target4.pdf(y) - f1))
        },
        0.0,
        y_max,
        QUAD_TOL,
        QUAD_INTERVALS,
    )?;
    Ok((value.clamp(0.0, 1.0), slope))
}

/// Alignment-probability model as a function of the aligned-pair
/// noncentrality alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PaModel {
    /// Ideal patterns: every misaligned pair has zero gain.
    Ideal { beam_pairs: usize },
    /// Side-lobe leakage with fixed competitor-to-main noncentrality ratios.
    Sidelobe {
        l_t: usize,
        l_r: usize,
        tx_ratio: f64,
        rx_ratio: f64,
        both_ratio: f64,
    },
}

impl PaModel {
    /// Competitor noncentralities at aligned-pair noncentrality `lambda`.
    pub fn sidelobe_lambdas(&self, lambda: f64) -> Option<SidelobeLambdas> {
        match *self {
            PaModel::Ideal { .. } => None,
            PaModel::Sidelobe {
                tx_ratio,
                rx_ratio,
                both_ratio,
                ..
            } => Some(SidelobeLambdas {
                main: lambda,
                tx_side: lambda * tx_ratio,
                rx_side: lambda * rx_ratio,
                both_side: lambda * both_ratio,
            }),
        }
    }

    /// `P_a(lambda)`.
    pub fn pa(&self, lambda: f64) -> Result<f64> {
        Ok(self.pa_with_slope(lambda)?.0)
    }

    /// `(P_a, dP_a/dlambda)`.
    pub fn pa_with_slope(&self, lambda: f64) -> Result<(f64, f64)> {
        match *self {
            PaModel::Ideal { beam_pairs } => pa_and_slope(beam_pairs, lambda),
            PaModel::Sidelobe {
                l_t,
                l_r,
                tx_ratio,
                rx_ratio,
                both_ratio,
            } => {
                check_pa_args(l_t * l_r, lambda)?;
                pa_grouped(
                    lambda,
                    &[
                        (l_t - 1, lambda * tx_ratio, tx_ratio),
                        (l_r - 1, lambda * rx_ratio, rx_ratio),
                        ((l_t - 1) * (l_r - 1), lambda * both_ratio, both_ratio),
                    ],
                )
            }
        }
    }

    /// Union lower bound on `P_a(lambda)`; equals `P_a` in the ideal case.
    pub fn pa_bound(&self, lambda: f64) -> Result<f64> {
        match *self {
            PaModel::Ideal { beam_pairs } => pa_closed_form(beam_pairs, lambda),
            PaModel::Sidelobe { l_t, l_r, .. } => {
                let lambdas = self.sidelobe_lambdas(lambda).expect("side-lobe model");
                pa_lower_bound(l_t, l_r, &lambdas)
            }
        }
    }

    /// `d log P_a / dlambda`.
    pub fn grad_log_pa(&self, lambda: f64) -> Result<f64> {
        let (v, d) = self.pa_with_slope(lambda)?;
        Ok(d / v)
    }

    /// Number of beam pairs swept.
    pub fn beam_pairs(&self) -> usize {
        match *self {
            PaModel::Ideal { beam_pairs } => beam_pairs,
            PaModel::Sidelobe { l_t, l_r, .. } => l_t * l_r,
        }
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const PA_TABLE: [(usize, [f64; 4]); 4] = [
        (
            2,
            [
                0.5,
                0.856_747_601_569_904_95,
                0.958_957_500_688_050_6,
                0.996_631_026_500_457_27,
            ],
        ),
        (
            4,
            [
                0.25,
                0.720_779_665_836_044_57,
                0.906_667_058_947_401_93,
                0.991_027_442_210_174_65,
            ],
        ),
        (
            16,
            [
                0.0625,
                0.475_103_048_172_580_73,
                0.768_883_552_644_109_6,
                0.968_897_406_164_170_9,
            ],
        ),
        (
            128,
            [
                0.007_812_5,
                0.214_798_038_176_297_78,
                0.520_135_272_650_531_38,
                0.893_010_784_040_061_26,
            ],
        ),
    ];

    #[test]
    fn closed_form_matches_high_precision_table() {
        for (l, row) in PA_TABLE {
            for (lambda, want) in [0.0, 5.0, 10.0, 20.0].into_iter().zip(row) {
                let got = pa_closed_form(l, lambda).unwrap();
                assert_relative_eq!(got, want, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn both_evaluation_routes_agree() {
        for l in [2, 4, 9] {
            for lambda in [0.0, 0.3, 7.0, 40.0] {
                let (a, da) = pa_direct(l, lambda);
                let (b, db) = pa_series(l, lambda);
                assert!((a - b).abs() < 1e-13, "L={l} lambda={lambda} {a} {b}");
                assert!((da - db).abs() < 1e-12, "L={l} lambda={lambda} {da} {db} {a} {b}");
            }
        }
    }

    #[test]
    fn log_gradient_matches_reference() {
        let cases = [
            (4, 0.1, 0.507_246_133_220_953_72),
            (4, 5.0, 0.081_658_508_799_392_805),
            (4, 20.0, 0.002_173_875_742_976_899_9),
            (128, 0.1, 1.920_113_054_980_330_8),
            (128, 5.0, 0.274_040_302_703_073_64),
            (128, 20.0, 0.020_941_293_485_557_387),
        ];
        for (l, lambda, want) in cases {
            assert_relative_eq!(grad_log_pa(l, lambda).unwrap(), want, max_relative = 1e-10);
        }
    }

    #[test]
    fn single_pair_is_certain() {
        assert_eq!(pa_closed_form(1, 3.0).unwrap(), 1.0);
        assert!(pa_closed_form(0, 3.0).is_err());
        assert!(pa_closed_form(4, -1.0).is_err());
    }

    #[test]
    fn lower_bound_reference_value() {
        let lambdas = SidelobeLambdas {
            main: 20.0,
            tx_side: 2.0,
            rx_side: 2.0,
            both_side: 0.5,
        };
        let terms = misalignment_terms(16, 8, &lambdas).unwrap();
        assert_relative_eq!(terms[0], 0.140_950_619_748_907, max_relative = 1e-8);
        assert_relative_eq!(terms[1], 0.087_673_346_077_041_8, max_relative = 1e-8);
        assert_relative_eq!(terms[2], 0.162_591_515_023_073_45, max_relative = 1e-8);
        let lb = pa_lower_bound(16, 8, &lambdas).unwrap();
        assert_relative_eq!(lb, 0.608_784_519_150_977_8, max_relative = 1e-8);
    }

    #[test]
    fn general_form_reduces_to_closed_form() {
        let mut lambdas = vec![0.0; 16];
        lambdas[5] = 10.0;
        let exact = pa_general(&lambdas, 5).unwrap();
        assert!((exact - pa_closed_form(16, 10.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn sidelobe_slope_matches_finite_difference() {
        let model = PaModel::Sidelobe {
            l_t: 16,
            l_r: 8,
            tx_ratio: 0.1,
            rx_ratio: 0.1,
            both_ratio: 0.01,
        };
        for lambda in [0.5, 5.0, 30.0] {
            let (_, slope) = model.pa_with_slope(lambda).unwrap();
            let h = 1e-4 * lambda;
            let fd = (model.pa(lambda + h).unwrap() - model.pa(lambda - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(slope, fd, max_relative = 1e-5);
        }
    }

    #[test]
    fn grouped_form_sits_between_bound_and_ideal() {
        let model = PaModel::Sidelobe {
            l_t: 16,
            l_r: 8,
            tx_ratio: 0.1,
            rx_ratio: 0.1,
            both_ratio: 0.01,
        };
        for lambda in [0.0, 3.0, 20.0, 60.0] {
            let exact = model.pa(lambda).unwrap();
            assert!(exact > 0.0);
            assert!(model.pa_bound(lambda).unwrap() <= exact + 1e-9);
            assert!(exact <= pa_closed_form(128, lambda).unwrap() + 1e-9);
        }
        let mut lambdas = vec![0.3; 128];
        for (i, l) in lambdas.iter_mut().enumerate() {
            if i / 8 == 2 {
                *l = 3.0;
            }
            if i % 8 == 5 {
                *l = 3.0;
            }
        }
        lambdas[21] = 30.0;
        let (grouped, _) = pa_grouped(30.0, &[(15, 3.0, 0.1), (7, 3.0, 0.1), (105, 0.3, 0.01)]).unwrap();
        assert!((grouped - pa_general(&lambdas, 21).unwrap()).abs() < 1e-9);
    }
}
