//! Uniform linear arrays with mutual coupling, beam codebooks and the
//! single-path channel model.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, invalid, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Draws from `CN(mean, var)`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, mean: Complex64, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    mean + Complex64::new(s * re, s * im)
}

/// Half-wavelength ULA response, entry `k` equal to `exp(j pi k sin(angle))`.
pub fn steering_vector(n_elements: usize, angle: f64) -> Result<CVector> {
    if n_elements == 0 {
        return Err(invalid("n_elements", "must be at least 1"));
    }
    let phase = std::f64::consts::PI * angle.sin();
    Ok(CVector::from_fn(n_elements, |k, _| {
        Complex64::from_polar(1.0, phase * k as f64)
    }))
}

/// Symmetric banded Toeplitz coupling matrix with first row
/// `[c_0, c_1, ..., c_{M-1}, 0, ..., 0]`.
pub fn mc_matrix(coupling: &[Complex64], n_elements: usize) -> Result<CMatrix> {
    if n_elements == 0 {
        return Err(invalid("n_elements", "must be at least 1"));
    }
    if coupling.is_empty() || coupling.len() > n_elements {
        return Err(invalid(
            "coupling",
            format!("needs between 1 and {n_elements} taps, got {}", coupling.len()),
        ));
    }
    Ok(CMatrix::from_fn(n_elements, n_elements, |i, j| {
        coupling.get(i.abs_diff(j)).copied().unwrap_or_default()
    }))
}

/// A ULA together with its coupling vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayModel {
    n_elements: usize,
    coupling_strength: f64,
    coupling: Vec<Complex64>,
}

impl ArrayModel {
    /// Array whose coupling vector is the mean profile `c_m = s / m`.
    pub fn new(n_elements: usize, coupling_taps: usize, coupling_strength: f64) -> Result<Self> {
        if coupling_taps == 0 || coupling_taps > n_elements {
            return Err(invalid(
                "coupling_taps",
                format!("must lie in [1, {n_elements}], got {coupling_taps}"),
            ));
        }
        if !(coupling_strength >= 0.0 && coupling_strength.is_finite()) {
            return Err(invalid("coupling_strength", "must be finite and nonnegative"));
        }
        let coupling = (0..coupling_taps)
            .map(|m| {
                if m == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(coupling_strength / m as f64, 0.0)
                }
            })
            .collect();
        Ok(Self {
            n_elements,
            coupling_strength,
            coupling,
        })
    }

    /// Array without coupling.
    pub fn ideal(n_elements: usize) -> Result<Self> {
        Self::new(n_elements, 1, 0.0)
    }

    /// Array with an explicit coupling vector; the first tap must be 1.
    pub fn with_coupling(n_elements: usize, coupling_strength: f64, coupling: Vec<Complex64>) -> Result<Self> {
        let mut base = Self::new(n_elements, coupling.len().max(1), coupling_strength)?;
        if (coupling[0] - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(invalid("coupling", "first tap must equal 1"));
        }
        base.coupling = coupling;
        Ok(base)
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn coupling(&self) -> &[Complex64] {
        &self.coupling
    }

    pub fn coupling_strength(&self) -> f64 {
        self.coupling_strength
    }

    /// Same array with taps `c_m ~ CN(s / m, s)` for `m >= 1`.
    pub fn sample_coupling<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let s = self.coupling_strength;
        let coupling = (0..self.coupling.len())
            .map(|m| {
                if m == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    complex_normal(rng, Complex64::new(s / m as f64, 0.0), s)
                }
            })
            .collect();
        Self {
            coupling,
            ..self.clone()
        }
    }

    pub fn coupling_matrix(&self) -> CMatrix {
        mc_matrix(&self.coupling, self.n_elements).expect("validated at construction")
    }

    /// Coupled response `C a(angle)`.
    pub fn response(&self, angle: f64) -> CVector {
        let a = steering_vector(self.n_elements, angle).expect("n_elements >= 1");
        &self.coupling_matrix() * a
    }
}

/// Beam pattern `w^H C a(angle)`, or `w^H a(angle)` without coupling.
pub fn beam_pattern(weights: &CVector, coupling: Option<&CMatrix>, angle: f64) -> Result<Complex64> {
    let a = steering_vector(weights.len(), angle)?;
    let a = match coupling {
        Some(c) => {
            check_len(weights.len(), c.nrows())?;
            c * a
        }
        None => a,
    };
    Ok(weights.dotc(&a))
}

/// Sectored codebook: `size` equal angular sectors over `region`, each
/// served by a unit-norm beam steered at the sector centre.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    region: (f64, f64),
    codewords: Vec<CVector>,
}

/// Builds a codebook for an `n_elements` array.
pub fn build_codebook(n_elements: usize, size: usize, region: (f64, f64)) -> Result<Codebook> {
    if size == 0 {
        return Err(invalid("codebook_size", "must be at least 1"));
    }
    if !(region.0 < region.1) {
        return Err(invalid(
            "region",
            format!("empty interval [{}, {}]", region.0, region.1),
        ));
    }
    let width = (region.1 - region.0) / size as f64;
    let norm = 1.0 / (n_elements as f64).sqrt();
    let codewords = (0..size)
        .map(|i| {
            let centre = region.0 + (i as f64 + 0.5) * width;
            steering_vector(n_elements, centre).map(|a| a * Complex64::new(norm, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Codebook { region, codewords })
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codeword(&self, i: usize) -> &CVector {
        &self.codewords[i]
    }

    pub fn codewords(&self) -> &[CVector] {
        &self.codewords
    }

    fn width(&self) -> f64 {
        (self.region.1 - self.region.0) / self.len() as f64
    }

    /// Half-open sector `[lo, hi)`; the last sector is closed.
    pub fn sector(&self, i: usize) -> (f64, f64) {
        let lo = self.region.0 + i as f64 * self.width();
        (lo, lo + self.width())
    }

    /// Index of the sector containing `angle`.
    pub fn sector_of(&self, angle: f64) -> Option<usize> {
        if angle < self.region.0 || angle > self.region.1 {
            return None;
        }
        let i = ((angle - self.region.0) / self.width()).floor() as usize;
        Some(i.min(self.len() - 1))
    }
}

/// Single-path channel `H = alpha (C_r a_r(aoa)) (C_t a_t(aod))^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub gain: Complex64,
    pub aoa: f64,
    pub aod: f64,
    pub rx: ArrayModel,
    pub tx: ArrayModel,
}

impl Channel {
    pub fn matrix(&self) -> CMatrix {
        let ar = self.rx.response(self.aoa);
        let at = self.tx.response(self.aod);
        (ar * at.adjoint()) * self.gain
    }

    /// `|f^H H w|^2` for receive combiner `f` and transmit precoder `w`.
    pub fn effective_gain(&self, f: &CVector, w: &CVector) -> Result<f64> {
        check_len(self.rx.n_elements(), f.len())?;
        check_len(self.tx.n_elements(), w.len())?;
        let rx = f.dotc(&self.rx.response(self.aoa));
        let tx = self.tx.response(self.aod).dotc(w);
        Ok((self.gain * rx * tx).norm_sqr())
    }
}

/// Whether codebook patterns are treated as ideal sectors or leak through
/// side lobes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainMode {
    Ideal,
    Sidelobe,
}

/// Side-lobe gains `(w_T, f_R)` implied by main-lobe gains under a unit
/// average-gain constraint.
pub fn sidelobe_gains(l_t: usize, main_tx: f64, l_r: usize, main_rx: f64) -> Result<(f64, f64)> {
    let one = |l: usize, main: f64, name: &'static str| -> Result<f64> {
        if l < 2 {
            return Err(invalid(name, "side lobes need a codebook of at least 2 beams"));
        }
        let l = l as f64;
        if !(main > 0.0 && main <= l) {
            return Err(invalid(
                name,
                format!("main-lobe gain must lie in (0, {l}], got {main}"),
            ));
        }
        Ok((2.0 - 2.0 * main / l) / (2.0 - 2.0 / l))
    };
    Ok((one(l_t, main_tx, "main_tx")?, one(l_r, main_rx, "main_rx")?))
}

/// Quantized sector gains for a codebook pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainModel {
    pub mode: GainMode,
    pub l_t: usize,
    pub l_r: usize,
    pub main_tx: f64,
    pub main_rx: f64,
    pub side_tx: f64,
    pub side_rx: f64,
}

impl GainModel {
    /// Ideal sectors: main-lobe gains `L_T`, `L_R` and no leakage.
    pub fn ideal(l_t: usize, l_r: usize) -> Result<Self> {
        if l_t == 0 || l_r == 0 {
            return Err(invalid("codebook", "sizes must be at least 1"));
        }
        Ok(Self {
            mode: GainMode::Ideal,
            l_t,
            l_r,
            main_tx: l_t as f64,
            main_rx: l_r as f64,
            side_tx: 0.0,
            side_rx: 0.0,
        })
    }

    /// Main lobes scaled by `eta` with the remaining power in side lobes.
    pub fn sidelobe(l_t: usize, l_r: usize, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(invalid("sidelobe_eta", format!("must lie in (0, 1], got {eta}")));
        }
        let (main_tx, main_rx) = (eta * l_t as f64, eta * l_r as f64);
        let (side_tx, side_rx) = sidelobe_gains(l_t, main_tx, l_r, main_rx)?;
        Ok(Self {
            mode: GainMode::Sidelobe,
            l_t,
            l_r,
            main_tx,
            main_rx,
            side_tx,
            side_rx,
        })
    }

    pub fn from_mode(mode: GainMode, l_t: usize, l_r: usize, eta: f64) -> Result<Self> {
        match mode {
            GainMode::Ideal => Self::ideal(l_t, l_r),
            GainMode::Sidelobe => Self::sidelobe(l_t, l_r, eta),
        }
    }

    pub fn beam_pairs(&self) -> usize {
        self.l_t * self.l_r
    }

    /// Product of transmit and receive gains for a pair.
    pub fn pair_gain(&self, tx_aligned: bool, rx_aligned: bool) -> f64 {
        let t = if tx_aligned { self.main_tx } else { self.side_tx };
        let r = if rx_aligned { self.main_rx } else { self.side_rx };
        t * r
    }

    /// Alignment-probability model as a function of the aligned-pair
    /// noncentrality.
    pub fn pa_model(&self) -> crate::stats::PaModel {
        match self.mode {
            GainMode::Ideal => crate::stats::PaModel::Ideal {
                beam_pairs: self.beam_pairs(),
            },
            GainMode::Sidelobe => {
                let tx_ratio = self.side_tx / self.main_tx;
                let rx_ratio = self.side_rx / self.main_rx;
                crate::stats::PaModel::Sidelobe {
                    l_t: self.l_t,
                    l_r: self.l_r,
                    tx_ratio,
                    rx_ratio,
                    both_ratio: tx_ratio * rx_ratio,
                }
            }
        }
    }
}

/// Quantized effective gain `|alpha|^2 g_tx g_rx` of a beam pair.
pub fn quantized_gain(model: &GainModel, tx_aligned: bool, rx_aligned: bool, alpha_sq: f64) -> f64 {
    alpha_sq * model.pair_gain(tx_aligned, rx_aligned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn steering_vector_entries() {
        let a = steering_vector(4, 0.0).unwrap();
        assert!(a.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let a = steering_vector(3, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((a[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn coupling_matrix_structure() {
        let c = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.2, 0.1),
            Complex64::new(0.05, -0.02),
        ];
        let m = mc_matrix(&c, 5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(m[(i, j)], m[(j, i)]);
                let d = i.abs_diff(j);
                let want = if d < 3 { c[d] } else { Complex64::default() };
                assert_eq!(m[(i, j)], want);
            }
        }
        let id = mc_matrix(&[Complex64::new(1.0, 0.0)], 4).unwrap();
        assert_eq!(id, CMatrix::identity(4, 4));
        assert!(mc_matrix(&c, 2).is_err());
    }

    #[test]
    fn pattern_peaks_at_steering_angle() {
        let w = steering_vector(16, 0.4).unwrap() / Complex64::new(4.0, 0.0);
        let peak = beam_pattern(&w, None, 0.4).unwrap().norm();
        assert!((peak - 4.0).abs() < 1e-12);
        assert!(beam_pattern(&w, None, -0.6).unwrap().norm() < peak);
        let bad = mc_matrix(&[Complex64::new(1.0, 0.0)], 8).unwrap();
        assert!(beam_pattern(&w, Some(&bad), 0.0).is_err());
    }

    #[test]
    fn effective_gain_matches_matrix_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tx = ArrayModel::new(8, 3, 0.3).unwrap().sample_coupling(&mut rng);
        let rx = ArrayModel::new(4, 2, 0.1).unwrap().sample_coupling(&mut rng);
        let ch = Channel {
            gain: Complex64::new(0.7, -0.4),
            aoa: 0.3,
            aod: -0.2,
            rx,
            tx,
        };
        let f = build_codebook(4, 2, (-1.5, 1.5)).unwrap().codeword(1).clone();
        let w = build_codebook(8, 4, (-1.5, 1.5)).unwrap().codeword(1).clone();
        let direct = (f.adjoint() * ch.matrix() * &w)[(0, 0)].norm_sqr();
        assert!((ch.effective_gain(&f, &w).unwrap() - direct).abs() < 1e-12);
        assert!(ch.effective_gain(&w, &w).is_err());
    }

    #[test]
    fn codebook_sectors_partition_region() {
        let cb = build_codebook(8, 4, (-1.0, 1.0)).unwrap();
        assert_eq!(cb.sector_of(-1.0), Some(0));
        assert_eq!(cb.sector_of(-0.5), Some(1));
        assert_eq!(cb.sector_of(1.0), Some(3));
        assert_eq!(cb.sector_of(1.1), None);
        assert!(cb.codewords().iter().all(|w| (w.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn sidelobe_gain_model() {
        let g = GainModel::sidelobe(16, 8, 0.9).unwrap();
        assert!((g.main_tx - 14.4).abs() < 1e-12);
        assert!((g.side_tx - (2.0 - 2.0 * 0.9) / (2.0 - 2.0 / 16.0)).abs() < 1e-12);
        assert!(g.side_tx < g.main_tx && g.side_rx < g.main_rx);
        let ideal = GainModel::ideal(16, 8).unwrap();
        assert_eq!(ideal.pair_gain(false, true), 0.0);
        assert_eq!(quantized_gain(&ideal, true, true, 2.0), 256.0);
        assert!(sidelobe_gains(1, 1.0, 4, 2.0).is_err());
    }
}
