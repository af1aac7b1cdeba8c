//! M-QAM constellation, symbol generation, nearest-neighbor detection, and
//! symbol error rate.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::seed::rng_from;

#[derive(Debug, Error, PartialEq)]
pub enum ModemError {
    #[error("modulation order {0} is not a square power of two")]
    UnsupportedOrder(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Square M-QAM constellation with unit average energy.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    order: usize,
    points: Vec<Complex64>,
}

impl Constellation {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }
}

/// Square grid with per-axis levels {±1, ±3, ..., ±(√M−1)}, row-major index
/// mapping, normalized to unit average energy.
pub fn qam_constellation(order: usize) -> Result<Constellation, ModemError> {
    let side = (order as f64).sqrt().round() as usize;
    if side * side != order || !order.is_power_of_two() || order < 4 {
        return Err(ModemError::UnsupportedOrder(order));
    }
    let mut points = Vec::with_capacity(order);
    for row in 0..side {
        for col in 0..side {
            let re = 2.0 * col as f64 - (side as f64 - 1.0);
            let im = 2.0 * row as f64 - (side as f64 - 1.0);
            points.push(Complex64::new(re, im));
        }
    }
    let energy = points.iter().map(|c| c.norm_sqr()).sum::<f64>() / order as f64;
    let scale = energy.sqrt().recip();
    for p in &mut points {
        *p *= scale;
    }
    Ok(Constellation { order, points })
}

/// Normalized 4th and 6th moments (μ₄, μ₆) of a unit-energy constellation
/// under uniform symbols.
pub fn constellation_moments(c: &Constellation) -> (f64, f64) {
    let m = c.points.len() as f64;
    let e2 = c.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / m;
    let e4 = c.points.iter().map(|p| p.norm_sqr().powi(2)).sum::<f64>() / m;
    let e6 = c.points.iter().map(|p| p.norm_sqr().powi(3)).sum::<f64>() / m;
    (e4 / (e2 * e2), e6 / (e2 * e2 * e2))
}

/// A batch of symbols with consistent index, one-hot, and mapped views.
#[derive(Clone, Debug)]
pub struct SymbolBatch {
    pub indices: Vec<usize>,
    pub mapped: Vec<Complex64>,
    pub order: usize,
}

impl SymbolBatch {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// One-hot row for sample `i`.
    pub fn onehot_row(&self, i: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.order];
        row[self.indices[i]] = 1.0;
        row
    }
}

/// i.i.d. uniform symbol indices, deterministic per seed.
pub fn generate_symbols(seed: u64, c: &Constellation, n: usize) -> SymbolBatch {
    let mut rng = rng_from(seed);
    let indices: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c.order)).collect();
    let mapped = indices.iter().map(|&i| c.point(i)).collect();
    SymbolBatch {
        indices,
        mapped,
        order: c.order,
    }
}

/// Fraction of mismatching positions.
pub fn ser(predicted: &[usize], truth: &[usize]) -> Result<f64, ModemError> {
    if predicted.len() != truth.len() || predicted.is_empty() {
        return Err(ModemError::LengthMismatch(predicted.len(), truth.len()));
    }
    let errors = predicted.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / truth.len() as f64)
}

/// Minimum-Euclidean-distance detection; ties go to the lower index.
pub fn ml_baseline_detect(received: &[Complex64], c: &Constellation) -> Vec<usize> {
    received
        .iter()
        .map(|r| {
            let mut best = 0;
            let mut best_d = (r - c.point(0)).norm_sqr();
            for (i, p) in c.points.iter().enumerate().skip(1) {
                let d = (r - p).norm_sqr();
                if d < best_d {
                    best = i;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

/// Exact symbol error probability of QPSK over AWGN at the given Es/N0.
pub fn qpsk_awgn_ser(es_n0_db: f64) -> f64 {
    let snr = 10f64.powf(es_n0_db / 10.0);
    let q = q_function(snr.sqrt());
    2.0 * q - q * q
}

/// Gaussian tail probability Q(x) = 0.5 erfc(x/√2).
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

// Chebyshev-fit rational approximation, |relative error| < 1.2e-7;
// adequate for the 3-sigma bands it backs.
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let tau = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587
                                        + t * (-0.82215223 + t * 0.17087277)))))))))
            .exp();
    if x >= 0.0 {
        tau
    } else {
        2.0 - tau
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn qpsk_points_and_energy() {
        let c = qam_constellation(4).unwrap();
        let expected = 1.0 / 2f64.sqrt();
        for p in c.points() {
            assert_relative_eq!(p.re.abs(), expected, epsilon = 1e-12);
            assert_relative_eq!(p.im.abs(), expected, epsilon = 1e-12);
        }
        let energy = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / 4.0;
        assert_relative_eq!(energy, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn qam16_scale_is_inverse_sqrt10() {
        // brute force: unnormalized per-axis second moment of {±1,±3} is 5,
        // so the complex energy is 10 and the scale is 1/sqrt(10)
        let c = qam_constellation(16).unwrap();
        let energy = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / 16.0;
        assert_relative_eq!(energy, 1.0, epsilon = 1e-12);
        let max_level = c.points().iter().map(|p| p.re.abs()).fold(0.0, f64::max);
        assert_relative_eq!(max_level, 3.0 / 10f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn non_square_order_rejected() {
        assert_eq!(qam_constellation(8), Err(ModemError::UnsupportedOrder(8)));
        assert_eq!(qam_constellation(2), Err(ModemError::UnsupportedOrder(2)));
    }

    #[test]
    fn moments_16qam_match_modulation_factors() {
        let (mu4, mu6) = constellation_moments(&qam_constellation(16).unwrap());
        assert_relative_eq!(mu4, 1.32, epsilon = 5e-3);
        assert_relative_eq!(mu6, 1.96, epsilon = 5e-3);
    }

    #[test]
    fn moments_qpsk_constant_modulus() {
        let (mu4, mu6) = constellation_moments(&qam_constellation(4).unwrap());
        assert_relative_eq!(mu4, 1.0, epsilon = 1e-12);
        assert_relative_eq!(mu6, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn moments_are_at_least_one() {
        for m in [4, 16, 64] {
            let (mu4, _) = constellation_moments(&qam_constellation(m).unwrap());
            assert!(mu4 >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn onehot_rows() {
        let c = qam_constellation(4).unwrap();
        let batch = SymbolBatch {
            indices: vec![3],
            mapped: vec![c.point(3)],
            order: 4,
        };
        assert_eq!(batch.onehot_row(0), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn symbol_generation_deterministic_and_uniform() {
        let c = qam_constellation(16).unwrap();
        let a = generate_symbols(7, &c, 100_000);
        let b = generate_symbols(7, &c, 100_000);
        assert_eq!(a.indices, b.indices);

        // multinomial 3-sigma check on index frequencies
        let mut counts = vec![0usize; 16];
        for &i in &a.indices {
            counts[i] += 1;
        }
        let n = a.len() as f64;
        let p = 1.0 / 16.0;
        let sigma = (n * p * (1.0 - p)).sqrt();
        for &count in &counts {
            assert!((count as f64 - n * p).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn ser_counting() {
        assert_eq!(ser(&[1, 2, 3], &[1, 2, 3]).unwrap(), 0.0);
        assert_eq!(ser(&[0, 0, 0], &[1, 1, 1]).unwrap(), 1.0);
        assert_eq!(
            ser(&[0, 1, 2, 3, 4, 5, 6, 7], &[0, 1, 2, 3, 0, 0, 0, 0]).unwrap(),
            0.5
        );
        assert!(ser(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn ser_symmetric() {
        let a = [0, 1, 2, 3];
        let b = [0, 2, 2, 0];
        assert_eq!(ser(&a, &b).unwrap(), ser(&b, &a).unwrap());
    }

    #[test]
    fn noiseless_detection_is_exact() {
        let c = qam_constellation(16).unwrap();
        let batch = generate_symbols(11, &c, 1000);
        let detected = ml_baseline_detect(&batch.mapped, &c);
        assert_eq!(detected, batch.indices);
    }

    #[test]
    fn midpoint_ties_go_to_lower_index() {
        let c = qam_constellation(4).unwrap();
        // the origin is equidistant from all four points
        let detected = ml_baseline_detect(&[Complex64::new(0.0, 0.0)], &c);
        assert_eq!(detected, vec![0]);
    }
}
