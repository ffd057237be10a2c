//! Finite-blocklength coding quantities.
//!
//! Short packets pay a rate penalty against Shannon capacity that scales
//! with the channel dispersion and the inverse Gaussian tail. This module
//! provides the capacity/dispersion pair, the normal-approximation
//! achievable rate with its SINR threshold, the decoding error
//! probability, and its expectation over a Gamma SINR law.

use crate::channel::GammaSinrModel;
use crate::error::{Error, Result};
use crate::num::{bisect_root, integrate};

pub use crate::num::{q_func, q_inv};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// One FBC operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbcPoint {
    /// Instantaneous SINR, linear.
    pub sinr: f64,
    /// Data channel uses R_CU.
    pub blocklength: usize,
    /// Coding rate in bits per channel use.
    pub target_rate: f64,
    /// Decoding error probability target.
    pub target_ep: f64,
}

impl FbcPoint {
    pub fn validate(&self) -> Result<()> {
        if !(self.sinr >= 0.0) || !self.sinr.is_finite() {
            return Err(Error::Domain("sinr must be finite and non-negative".into()));
        }
        if self.blocklength < 1 {
            return Err(Error::Domain("blocklength must be at least 1".into()));
        }
        if !(self.target_rate >= 0.0) || !self.target_rate.is_finite() {
            return Err(Error::Domain("target_rate must be finite and non-negative".into()));
        }
        if !(self.target_ep > 0.0 && self.target_ep < 1.0) {
            return Err(Error::Domain("target_ep must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Achievable rate at this point's SINR and error target.
    pub fn rate(&self) -> Result<f64> {
        self.validate()?;
        achievable_rate(self.sinr, self.target_ep, self.blocklength)
    }

    /// Decoding error probability at this point's SINR and coding rate.
    pub fn ep(&self) -> Result<f64> {
        self.validate()?;
        decoding_ep(self.sinr, self.target_rate, self.blocklength)
    }
}

/// Shannon capacity log2(1 + gamma) in bpcu.
pub fn capacity(gamma: f64) -> f64 {
    (1.0 + gamma).log2()
}

/// Channel dispersion (1 - (1 + gamma)^{-2}) log2(e)^2 in bpcu^2.
pub fn dispersion(gamma: f64) -> f64 {
    let g1 = 1.0 + gamma;
    (1.0 - 1.0 / (g1 * g1)) * LOG2_E * LOG2_E
}

/// Normal-approximation achievable rate in bpcu, clamped at zero below
/// the SINR threshold.
pub fn achievable_rate(gamma: f64, eps: f64, r_cu: usize) -> Result<f64> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("sinr {gamma} must be non-negative")));
    }
    if r_cu < 1 {
        return Err(Error::Domain("blocklength must be at least 1".into()));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let penalty = (dispersion(gamma) / r_cu as f64).sqrt() * q_inv(eps)?;
    Ok((capacity(gamma) - penalty).max(0.0))
}

/// SINR threshold below which the achievable rate is zero: the root of
/// C(gamma) = sqrt(V(gamma)/R_CU) Qinv(eps) on [1e-12, 1e4].
///
/// A root below the bracket floor (eps close to 0.5) is reported as the
/// floor itself, which is zero for every practical purpose.
pub fn gamma_zero(eps: f64, r_cu: usize) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!("eps {eps} must lie in (0, 0.5)")));
    }
    if r_cu < 1 {
        return Err(Error::Domain("blocklength must be at least 1".into()));
    }
    let qi = q_inv(eps)?;
    let g = |gamma: f64| capacity(gamma) - (dispersion(gamma) / r_cu as f64).sqrt() * qi;
    let (lo, hi) = (1e-12, 1e4);
    if g(lo) >= 0.0 {
        return Ok(lo);
    }
    if g(hi) <= 0.0 {
        return Err(Error::Numeric(format!(
            "no SINR threshold inside [{lo:.1e}, {hi:.1e}] for eps = {eps}, R_CU = {r_cu}"
        )));
    }
    bisect_root(g, lo, hi, 1e-12)
}

/// Decoding error probability of a rate-r code at SINR gamma.
///
/// The argument keeps its sign, so rates above capacity give values
/// beyond one half instead of saturating; this is what makes the
/// function strictly decreasing in gamma.
pub fn decoding_ep(gamma: f64, r: f64, r_cu: usize) -> Result<f64> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("sinr {gamma} must be non-negative")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("rate {r} must be non-negative")));
    }
    if r_cu < 1 {
        return Err(Error::Domain("blocklength must be at least 1".into()));
    }
    if gamma == 0.0 {
        // No channel: certain failure at any positive rate, a coin flip
        // in the degenerate zero-rate limit.
        return Ok(if r > 0.0 { 1.0 } else { 0.5 });
    }
    let arg = (r_cu as f64 / dispersion(gamma)).sqrt() * (capacity(gamma) - r);
    Ok(q_func(arg))
}

/// Expectation of the decoding error probability over a Gamma SINR law,
/// by adaptive quadrature over [0, mean + 40 sqrt(shape) scale]. The
/// Gamma tail beyond that point carries less than 1e-14 mass.
pub fn expected_ep(model: &GammaSinrModel, r: f64, r_cu: usize) -> Result<f64> {
    let upper = model.mean() + 40.0 * model.shape.sqrt() * model.scale;
    let f = |x: f64| {
        decoding_ep(x, r, r_cu).expect("interior node") * model.pdf(x).expect("interior node")
    };
    let rough = integrate(&f, 0.0, upper, 1e-10)?;
    // A fixed absolute tolerance is useless when the expectation itself is
    // below 1e-6: argmin searches over pilot length compare neighbouring
    // values whose contrast is purely relative. Re-integrate with a target
    // scaled to the first estimate so small expectations keep about six
    // significant digits. The floor stops the refinement pass from
    // chasing panel splits on expectations so deep that no comparison
    // ever depends on them.
    let value = if rough.value > 0.0 && rough.value < 1e-6 {
        integrate(&f, 0.0, upper, (rough.value * 1e-6).max(1e-40))?.value
    } else {
        rough.value
    };
    Ok(value.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::Distribution;

    #[test]
    fn capacity_and_dispersion_special_values() {
        assert_eq!(capacity(0.0), 0.0);
        assert_eq!(dispersion(0.0), 0.0);
        assert!((capacity(1.0) - 1.0).abs() < 1e-15);
        let v_inf = LOG2_E * LOG2_E;
        assert!((dispersion(1e6) - v_inf).abs() < 1e-6);
        assert!((v_inf - 2.081_368_981_005_607_7).abs() < 1e-12);
    }

    #[test]
    fn rate_at_half_ep_is_capacity() {
        for gamma in [0.3, 1.0, 7.5] {
            let r = achievable_rate(gamma, 0.5, 170).unwrap();
            assert_eq!(r, capacity(gamma));
        }
    }

    #[test]
    fn rate_climbs_to_capacity_with_blocklength() {
        let (gamma, eps) = (10.0, 1e-6);
        let c = capacity(gamma);
        let mut prev = 0.0;
        for r_cu in [50, 100, 200, 400, 800, 1600, 3200, 6400] {
            let r = achievable_rate(gamma, eps, r_cu).unwrap();
            assert!(r > prev && r < c);
            prev = r;
        }
        assert!(c - prev < c - achievable_rate(gamma, eps, 50).unwrap());
    }

    #[test]
    fn threshold_brackets_the_rate_cutoff() {
        for (eps, r_cu) in [(1e-5, 170), (1e-3, 240), (1e-7, 500)] {
            let g0 = gamma_zero(eps, r_cu).unwrap();
            assert_eq!(achievable_rate(g0 - 1e-9, eps, r_cu).unwrap(), 0.0);
            assert!(achievable_rate(g0 + 1e-9, eps, r_cu).unwrap() > 0.0);
        }
    }

    #[test]
    fn threshold_vanishes_as_ep_approaches_half() {
        assert!(gamma_zero(0.499, 170).unwrap() < 1e-6);
        // Close enough to one half the root drops below the bracket
        // floor, which is then reported directly.
        assert!(gamma_zero(0.499_999, 170).unwrap() <= 1e-10);
    }

    #[test]
    fn threshold_decreases_with_blocklength() {
        let mut prev = f64::INFINITY;
        for r_cu in (50..=500).step_by(50) {
            let g0 = gamma_zero(1e-5, r_cu).unwrap();
            assert!(g0 < prev);
            prev = g0;
        }
    }

    #[test]
    fn ep_at_capacity_is_half() {
        for gamma in [0.5, 2.0, 9.0] {
            let e = decoding_ep(gamma, capacity(gamma), 170).unwrap();
            assert!((e - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn ep_handles_dead_channel() {
        assert_eq!(decoding_ep(0.0, 0.2, 170).unwrap(), 1.0);
        assert_eq!(decoding_ep(0.0, 0.0, 170).unwrap(), 0.5);
    }

    #[test]
    fn ep_strictly_decreasing_until_underflow() {
        for (r, r_cu) in [(0.2, 170), (0.9, 240), (2.5, 80)] {
            let mut prev = f64::INFINITY;
            for i in 0..1000 {
                let gamma = 1e-3 + 0.1 * i as f64;
                let e = decoding_ep(gamma, r, r_cu).unwrap();
                // Strictness is only observable between the two rounding
                // plateaus: Q saturates to exactly 1.0 far below capacity
                // and underflows to 0.0 far above it.
                if prev > 1e-290 && prev < 1.0 {
                    assert!(e < prev, "ep not strictly decreasing at gamma = {gamma}");
                } else {
                    assert!(e <= prev);
                }
                prev = e;
            }
        }
    }

    proptest! {
        // Rate and error probability are inverse maps at fixed SINR.
        #[test]
        fn rate_and_ep_invert_each_other(
            gamma in 0.05f64..50.0,
            eps in 1e-9f64..0.4,
            r_cu in 50usize..500,
        ) {
            let rate = achievable_rate(gamma, eps, r_cu).unwrap();
            prop_assume!(rate > 1e-6);
            let back = decoding_ep(gamma, rate, r_cu).unwrap();
            prop_assert!((back - eps).abs() < 1e-8 * eps.max(1e-3));
        }
    }

    #[test]
    fn expected_ep_matches_monte_carlo() {
        let model = GammaSinrModel::new(39.0, 0.012).unwrap();
        let (r, r_cu) = (0.2, 170);
        let analytic = expected_ep(&model, r, r_cu).unwrap();

        let mut rng = crate::rng::substream(99, crate::rng::Purpose::Scratch, 0, 0);
        let gamma = rand_distr::Gamma::new(model.shape, model.scale).unwrap();
        let n = 1_000_000usize;
        let mut sum = 0.0f64;
        let mut sumsq = 0.0f64;
        for _ in 0..n {
            let x: f64 = gamma.sample(&mut rng);
            let e = decoding_ep(x, r, r_cu).unwrap();
            sum += e;
            sumsq += e * e;
        }
        let mean = sum / n as f64;
        let var = (sumsq / n as f64 - mean * mean).max(0.0);
        let se = (var / n as f64).sqrt();
        assert!(
            (analytic - mean).abs() <= 3.0 * se + 1e-12,
            "quadrature {analytic} vs Monte Carlo {mean} (se {se})"
        );
    }

    #[test]
    fn expected_ep_zero_rate_stays_below_half() {
        let model = GammaSinrModel::new(10.0, 0.05).unwrap();
        let e = expected_ep(&model, 0.0, 170).unwrap();
        assert!(e > 0.0 && e <= 0.5);
    }

    #[test]
    fn expected_ep_monotone_in_rate() {
        let model = GammaSinrModel::new(39.0, 0.012).unwrap();
        let mut prev = 0.0;
        for i in 1..=10 {
            let r = 0.1 * i as f64;
            let e = expected_ep(&model, r, 170).unwrap();
            assert!(e > prev);
            prev = e;
        }
    }

    #[test]
    fn point_carrier_validates_and_delegates() {
        let p = FbcPoint { sinr: 2.0, blocklength: 170, target_rate: 0.2, target_ep: 1e-5 };
        p.validate().unwrap();
        assert_eq!(p.rate().unwrap(), achievable_rate(2.0, 1e-5, 170).unwrap());
        assert_eq!(p.ep().unwrap(), decoding_ep(2.0, 0.2, 170).unwrap());
        let bad = FbcPoint { target_ep: 1.0, ..p };
        assert!(bad.validate().is_err());
    }
}
