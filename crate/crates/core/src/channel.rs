//! Stochastic channel models: Gamma-Gamma turbulence for the free-space link,
//! the NLIN-AWGN abstraction for the fiber link, and plain AWGN.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::rng_from;
use crate::special::{ln_gamma, bessel_k, SpecialError};

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("intensity must be positive, got {0}")]
    IntensityDomain(f64),
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("Rytov variance is zero; the turbulence-free limit has no Gamma-Gamma parameters, use an AWGN channel")]
    DegenerateTurbulence,
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Whether the fade multiplies the complex amplitude by I or by sqrt(I).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadeConvention {
    #[default]
    Intensity,
    SqrtIntensity,
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct FsoParams {
    pub alpha: f64,
    pub beta: f64,
    pub es_n0_db: f64,
    #[serde(default)]
    pub fade_on_amplitude: FadeConvention,
}

impl FsoParams {
    /// Strong-turbulence operating point at 0 dB symbol SNR.
    pub fn strong_turbulence_defaults() -> Self {
        FsoParams {
            alpha: 4.2,
            beta: 1.4,
            es_n0_db: 0.0,
            fade_on_amplitude: FadeConvention::Intensity,
        }
    }

    fn validate(&self) -> Result<(), ChannelError> {
        for (name, value) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(value > 0.0) {
                return Err(ChannelError::NonPositive { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct FsoLinkGeometry {
    /// Refractive-index structure parameter, m^(-2/3).
    pub cn2: f64,
    /// Wavelength, meters.
    pub wavelength: f64,
    /// Link distance, meters.
    pub link_length: f64,
}

/// Rytov variance and the Gamma-Gamma shaping/scaling parameters implied by
/// the link geometry.
pub fn rytov_and_gg_params(geom: &FsoLinkGeometry) -> Result<(f64, f64, f64), ChannelError> {
    for (name, value) in [
        ("cn2", geom.cn2),
        ("wavelength", geom.wavelength),
        ("link_length", geom.link_length),
    ] {
        if !(value > 0.0) {
            return Err(ChannelError::NonPositive { name, value });
        }
    }
    let k = 2.0 * std::f64::consts::PI / geom.wavelength;
    let sigma_r2 = 1.23 * geom.cn2 * k.powf(7.0 / 6.0) * geom.link_length.powf(11.0 / 6.0);
    if sigma_r2 == 0.0 {
        return Err(ChannelError::DegenerateTurbulence);
    }
    let alpha = ((0.49 * sigma_r2 / (1.0 + 1.11 * sigma_r2.powf(1.2)).powf(7.0 / 6.0)).exp() - 1.0)
        .recip();
    let beta = ((0.51 * sigma_r2 / (1.0 + 0.69 * sigma_r2.powf(1.2)).powf(5.0 / 6.0)).exp() - 1.0)
        .recip();
    Ok((sigma_r2, alpha, beta))
}

/// Gamma-Gamma intensity pdf,
/// f(I) = 2(αβ)^((α+β)/2) / (Γ(α)Γ(β)) · I^((α+β)/2−1) · K_{α−β}(2√(αβI)), I > 0.
pub fn gg_pdf(i: f64, alpha: f64, beta: f64) -> Result<f64, ChannelError> {
    if !(i > 0.0) {
        return Err(ChannelError::IntensityDomain(i));
    }
    let half_sum = (alpha + beta) / 2.0;
    let k = bessel_k(alpha - beta, 2.0 * (alpha * beta * i).sqrt())?;
    // prefactor in log space so large orders don't overflow
    let log_pre = std::f64::consts::LN_2 + half_sum * (alpha * beta).ln() - ln_gamma(alpha)
        - ln_gamma(beta)
        + (half_sum - 1.0) * i.ln();
    Ok(log_pre.exp() * k)
}

/// Unit-mean Gamma-Gamma intensities: I = X·Y with X ~ Gamma(α, 1/α) and
/// Y ~ Gamma(β, 1/β), independent.
pub fn gg_sample(rng: &mut impl Rng, alpha: f64, beta: f64, n: usize) -> Vec<f64> {
    let gx = Gamma::new(alpha, 1.0 / alpha).expect("alpha > 0");
    let gy = Gamma::new(beta, 1.0 / beta).expect("beta > 0");
    (0..n).map(|_| gx.sample(rng) * gy.sample(rng)).collect()
}

/// Analytic scintillation index Var[I]/E[I]^2 of the Gamma-Gamma law.
pub fn scintillation_index(alpha: f64, beta: f64) -> f64 {
    1.0 / alpha + 1.0 / beta + 1.0 / (alpha * beta)
}

fn complex_awgn(rng: &mut impl Rng, per_component_var: f64) -> Complex64 {
    let sd = per_component_var.sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * sd, im * sd)
}

/// r = I·s + n with I ~ Gamma-Gamma and n complex Gaussian at the configured
/// symbol SNR (unit-energy constellation assumed).
pub fn fso_apply(
    symbols: &[Complex64],
    params: &FsoParams,
    rng: &mut impl Rng,
) -> Result<Vec<Complex64>, ChannelError> {
    params.validate()?;
    let fades = gg_sample(rng, params.alpha, params.beta, symbols.len());
    let per_component_var = 0.5 / 10f64.powf(params.es_n0_db / 10.0);
    Ok(symbols
        .iter()
        .zip(fades)
        .map(|(s, i)| {
            let gain = match params.fade_on_amplitude {
                FadeConvention::Intensity => i,
                FadeConvention::SqrtIntensity => i.sqrt(),
            };
            s * gain + complex_awgn(rng, per_component_var)
        })
        .collect())
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct FiberParams {
    pub n_spans: u32,
    pub span_length_km: f64,
    pub alpha_db_per_km: f64,
    /// Nonlinearity coefficient, 1/W/km. Provenance only; the memoryless
    /// abstraction folds nonlinearity into the chi coefficients.
    pub gamma_nl: f64,
    pub carrier_freq_hz: f64,
    pub planck: f64,
    pub noise_figure_db: f64,
    pub baud_rate_hz: f64,
    pub channel_spacing_hz: f64,
    pub dispersion_ps_nm_km: f64,
    pub beta2: f64,
    pub pre_dispersion_ps2: f64,
    pub launch_power_dbm: f64,
    pub mu4: f64,
    pub mu6: f64,
    /// Constant NLIN coefficient, 1/W^2. Calibrated default, not a measured
    /// value: chosen so the table operating point lands near 17 dB effective SNR.
    #[serde(default = "default_chi1")]
    pub chi1: f64,
    /// Modulation-dependent NLIN coefficient multiplying (mu4 - 2), 1/W^2.
    /// Calibrated default, see `chi1`.
    #[serde(default = "default_chi2")]
    pub chi2: f64,
}

fn default_chi1() -> f64 {
    2000.0
}

fn default_chi2() -> f64 {
    500.0
}

impl FiberParams {
    /// The published 20x100 km dispersion-uncompensated link.
    pub fn table_defaults() -> Self {
        FiberParams {
            n_spans: 20,
            span_length_km: 100.0,
            alpha_db_per_km: 0.2,
            gamma_nl: 1.3,
            carrier_freq_hz: 1.9341e14,
            planck: 6.6261e-34,
            noise_figure_db: 5.0,
            baud_rate_hz: 32e9,
            channel_spacing_hz: 50e9,
            dispersion_ps_nm_km: 16.4640,
            beta2: 21.0,
            pre_dispersion_ps2: 0.0,
            launch_power_dbm: 2.0,
            mu4: 1.32,
            mu6: 1.96,
            chi1: default_chi1(),
            chi2: default_chi2(),
        }
    }

    pub fn launch_power_watts(&self) -> f64 {
        1e-3 * 10f64.powf(self.launch_power_dbm / 10.0)
    }
}

/// ASE and NLIN variances at the launch power, plus the effective SNR seen by
/// the unit-energy constellation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiberNoise {
    pub sigma_ase2: f64,
    pub sigma_nlin2: f64,
    pub sigma_total2: f64,
    pub snr_eff: f64,
}

/// σ²_ASE = n_spans (G−1) h f_c NF B with per-span gain G recovering the span
/// loss; σ²_NLIN = P₀³ (χ₁ + χ₂(μ₄−2)).
pub fn fiber_noise_variance(p: &FiberParams) -> Result<FiberNoise, ChannelError> {
    let p0 = p.launch_power_watts();
    if !(p0 > 0.0) {
        return Err(ChannelError::NonPositive {
            name: "launch_power",
            value: p0,
        });
    }
    let gain = 10f64.powf(p.alpha_db_per_km * p.span_length_km / 10.0);
    let nf = 10f64.powf(p.noise_figure_db / 10.0);
    let sigma_ase2 = p.n_spans as f64 * (gain - 1.0) * p.planck * p.carrier_freq_hz * nf * p.baud_rate_hz;
    let sigma_nlin2 = p0.powi(3) * (p.chi1 + p.chi2 * (p.mu4 - 2.0));
    let sigma_total2 = sigma_ase2 + sigma_nlin2;
    Ok(FiberNoise {
        sigma_ase2,
        sigma_nlin2,
        sigma_total2,
        snr_eff: p0 / sigma_total2,
    })
}

/// r = s + n, n complex Gaussian with total variance 1/SNR_eff.
pub fn fiber_apply(
    symbols: &[Complex64],
    p: &FiberParams,
    rng: &mut impl Rng,
) -> Result<Vec<Complex64>, ChannelError> {
    let noise = fiber_noise_variance(p)?;
    let per_component_var = 0.5 / noise.snr_eff;
    Ok(symbols
        .iter()
        .map(|s| s + complex_awgn(rng, per_component_var))
        .collect())
}

/// Tagged union over the supported channel models.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelModel {
    Fso(FsoParams),
    Fiber(FiberParams),
    Awgn {
        /// Total complex noise variance.
        noise_variance: f64,
    },
}

impl ChannelModel {
    /// Plain AWGN at the given symbol SNR for a unit-energy constellation.
    pub fn awgn_at_es_n0_db(es_n0_db: f64) -> Self {
        ChannelModel::Awgn {
            noise_variance: 10f64.powf(-es_n0_db / 10.0),
        }
    }

    pub fn apply(
        &self,
        symbols: &[Complex64],
        seed: u64,
    ) -> Result<Vec<Complex64>, ChannelError> {
        let mut rng = rng_from(seed);
        match self {
            ChannelModel::Fso(p) => fso_apply(symbols, p, &mut rng),
            ChannelModel::Fiber(p) => fiber_apply(symbols, p, &mut rng),
            ChannelModel::Awgn { noise_variance } => Ok(symbols
                .iter()
                .map(|s| s + complex_awgn(&mut rng, noise_variance / 2.0))
                .collect()),
        }
    }
}
