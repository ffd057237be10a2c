//! MGF-based stochastic network calculus for the per-UE queue.
//!
//! Arrivals are Poisson bits per slot, service is the finite-blocklength
//! throughput of one slot, and the delay tail is controlled through the
//! arrival MGF and the service inverse-MGF at a common QoS exponent.
//! The min-deconvolution of the two processes yields a geometric-series
//! bound on the delay violation probability; on top of the fixed-exponent
//! bound sits an infimum search over the exponent.

use crate::channel::GammaSinrModel;
use crate::error::{Error, Result};
use crate::fbc::{expected_ep, gamma_zero};
use crate::num::golden_max;

/// QoS target: exponent, delay budget in slots, mean arrival rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosSpec {
    /// Per-bit QoS exponent theta.
    pub theta: f64,
    /// Delay threshold d_th in whole slots.
    pub d_th: usize,
    /// Mean Poisson arrival rate in bits per slot.
    pub arrival_rate: f64,
}

impl QosSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(Error::Domain("qos exponent must be positive".into()));
        }
        if !(self.arrival_rate >= 0.0) || !self.arrival_rate.is_finite() {
            return Err(Error::Domain("arrival rate must be non-negative".into()));
        }
        Ok(())
    }
}

/// Normalized QoS exponent: theta scaled from per-bit to per-slot units
/// of the SINR exponent, theta R_CU / ln 2.
pub fn normalized_exponent(theta: f64, r_cu: usize) -> f64 {
    theta * r_cu as f64 / std::f64::consts::LN_2
}

/// Per-UE service description entering the inverse-MGF.
///
/// The fixed-epsilon variant adapts its rate to the channel at a fixed
/// decoding error target; its inverse-MGF is the outage-plus-Laplace
/// closed form, which can exceed one slightly at tiny exponents because
/// the Laplace term integrates over the outage region as well. The
/// fixed-rate variant transmits at a constant rate and is exact.
#[derive(Debug, Clone, PartialEq)]
pub enum ServiceModel {
    FixedEpsilon {
        model: GammaSinrModel,
        eps: f64,
        r_cu: usize,
        /// SINR threshold for the target eps, cached at construction.
        gamma0: f64,
        /// cdf(gamma0), cached at construction.
        outage: f64,
    },
    FixedRate {
        /// Coding rate in bpcu.
        rate: f64,
        /// Expected decoding error probability at that rate.
        expected_ep: f64,
        r_cu: usize,
    },
}

impl ServiceModel {
    /// Fixed-epsilon service: rate adaptation at error target `eps`.
    pub fn fixed_epsilon(model: GammaSinrModel, eps: f64, r_cu: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::Domain(format!("eps {eps} must lie in (0, 0.5)")));
        }
        let gamma0 = gamma_zero(eps, r_cu)?;
        let outage = model.cdf(gamma0)?;
        Ok(ServiceModel::FixedEpsilon { model, eps, r_cu, gamma0, outage })
    }

    /// Fixed-rate service with an externally supplied expected error
    /// probability.
    pub fn fixed_rate(rate: f64, expected_ep: f64, r_cu: usize) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::Domain("rate must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&expected_ep) {
            return Err(Error::Domain("expected_ep must lie in [0, 1]".into()));
        }
        if r_cu < 1 {
            return Err(Error::Domain("blocklength must be at least 1".into()));
        }
        Ok(ServiceModel::FixedRate { rate, expected_ep, r_cu })
    }

    /// Fixed-rate service with the expected error probability computed
    /// from the SINR law.
    pub fn fixed_rate_from_model(model: &GammaSinrModel, rate: f64, r_cu: usize) -> Result<Self> {
        let e = expected_ep(model, rate, r_cu)?;
        ServiceModel::fixed_rate(rate, e, r_cu)
    }

    pub fn r_cu(&self) -> usize {
        match self {
            ServiceModel::FixedEpsilon { r_cu, .. } => *r_cu,
            ServiceModel::FixedRate { r_cu, .. } => *r_cu,
        }
    }
}

/// MGF of one slot's Poisson arrivals, e^{lambda (e^theta - 1)}.
pub fn arrival_mgf(arrival_rate: f64, theta: f64) -> Result<f64> {
    if !(arrival_rate >= 0.0) || !arrival_rate.is_finite() {
        return Err(Error::Domain("arrival rate must be non-negative".into()));
    }
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(Error::Domain("theta must be non-negative".into()));
    }
    let v = (arrival_rate * (theta.exp() - 1.0)).exp();
    if !v.is_finite() {
        return Err(Error::Numeric(format!(
            "arrival MGF overflow at lambda = {arrival_rate}, theta = {theta}"
        )));
    }
    Ok(v)
}

/// Inverse-MGF of one slot's service under the given model.
pub fn service_inv_mgf(service: &ServiceModel, theta: f64) -> Result<f64> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::Domain("theta must be positive".into()));
    }
    Ok(match service {
        ServiceModel::FixedEpsilon { model, eps, r_cu, outage, .. } => {
            let big_theta = normalized_exponent(theta, *r_cu);
            let h = eps + (1.0 - eps) * outage;
            let laplace = (-model.shape * (model.scale * big_theta).ln_1p()).exp();
            h + (1.0 - eps) * laplace
        }
        ServiceModel::FixedRate { rate, expected_ep, r_cu } => {
            let idle = (-theta * *r_cu as f64 * rate).exp();
            idle + (1.0 - idle) * expected_ep
        }
    })
}

/// Min-deconvolution of the arrival and service MGF bounds over the
/// horizon pair (s, t): the direct finite sum over the overlap.
pub fn min_deconv_mgf(
    arrival: impl Fn(f64) -> f64,
    service: impl Fn(f64) -> f64,
    theta: f64,
    s: usize,
    t: usize,
) -> f64 {
    let ma = arrival(theta);
    let ms = service(theta);
    let mut acc = 0.0;
    for u in 0..=s.min(t) {
        acc += ma.powi((t - u) as i32) * ms.powi((s - u) as i32);
    }
    acc
}

/// Geometric closed form that upper-bounds the direct sum when the
/// stability product is below one.
pub fn min_deconv_closed_form(ma: f64, ms: f64, s: usize, t: usize) -> Result<f64> {
    let prod = ma * ms;
    if !(prod < 1.0) {
        return Err(Error::Domain(format!("stability product {prod} must be below 1")));
    }
    let tau = s.saturating_sub(t) as i32;
    let lead = if t >= s {
        ma.powi((t - s) as i32)
    } else {
        // t < s: the (t - s) power of ma becomes a reciprocal.
        ma.powi(-((s - t) as i32))
    };
    Ok(lead * prod.powi(tau) / (1.0 - prod))
}

/// Delay-violation bound at one QoS exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdvpBound {
    /// Bound on P(W >= d_th), clamped to [0, 1].
    pub value: f64,
    /// False when the stability product reached one and the bound is
    /// vacuous.
    pub stable: bool,
    /// Exponent the bound was evaluated at.
    pub theta: f64,
    /// Service inverse-MGF raised to d_th.
    pub numerator: f64,
    /// One minus the stability product.
    pub denominator: f64,
}

fn bound_at(service: &ServiceModel, theta: f64, arrival_rate: f64, d_th: usize) -> SdvpBound {
    let ms = service_inv_mgf(service, theta).expect("validated theta");
    let ma = match arrival_mgf(arrival_rate, theta) {
        Ok(v) => v,
        // MGF overflow means the exponent is far beyond the stable
        // region; report vacuous instead of failing.
        Err(_) => f64::INFINITY,
    };
    let prod = ma * ms;
    let numerator = ms.powi(d_th as i32);
    let denominator = 1.0 - prod;
    if !(prod < 1.0) || !prod.is_finite() {
        return SdvpBound { value: 1.0, stable: false, theta, numerator, denominator };
    }
    SdvpBound {
        value: (numerator / denominator).min(1.0),
        stable: true,
        theta,
        numerator,
        denominator,
    }
}

/// Delay-violation bound at the exponent fixed in `qos`.
pub fn ub_sdvp_at_theta(qos: &QosSpec, service: &ServiceModel) -> Result<SdvpBound> {
    qos.validate()?;
    Ok(bound_at(service, qos.theta, qos.arrival_rate, qos.d_th))
}

const LOG_THETA_LO: f64 = -6.0;
const LOG_THETA_HI: f64 = 2.0;

/// Delay-violation bound minimized over the QoS exponent.
///
/// A coarse scan over log10 theta in [-6, 2] finds the stable basin;
/// golden-section refinement then pins the minimizer to 1e-6 on the log
/// axis. With no stable exponent at all the vacuous bound is returned.
pub fn ub_sdvp_inf(service: &ServiceModel, arrival_rate: f64, d_th: usize) -> Result<SdvpBound> {
    if !(arrival_rate >= 0.0) || !arrival_rate.is_finite() {
        return Err(Error::Domain("arrival rate must be non-negative".into()));
    }
    let n_coarse = 161;
    let step = (LOG_THETA_HI - LOG_THETA_LO) / (n_coarse - 1) as f64;
    let mut best: Option<(f64, SdvpBound)> = None;
    for i in 0..n_coarse {
        let x = LOG_THETA_LO + step * i as f64;
        let b = bound_at(service, 10f64.powf(x), arrival_rate, d_th);
        if b.stable && best.as_ref().map_or(true, |(_, bb)| b.value < bb.value) {
            best = Some((x, b));
        }
    }
    let Some((x_best, coarse)) = best else {
        return Ok(bound_at(service, 10f64.powf(LOG_THETA_LO), arrival_rate, d_th));
    };
    let lo = (x_best - step).max(LOG_THETA_LO);
    let hi = (x_best + step).min(LOG_THETA_HI);
    let refined = golden_max(
        |x| -bound_at(service, 10f64.powf(x), arrival_rate, d_th).value,
        lo,
        hi,
        1e-6,
    )?;
    let candidate = bound_at(service, 10f64.powf(refined.x), arrival_rate, d_th);
    Ok(if candidate.stable && candidate.value <= coarse.value {
        candidate
    } else {
        coarse
    })
}
