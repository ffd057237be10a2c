//! Slot-level queue simulation against the analytic delay bound.

use crate::error::{Error, Result};
use crate::fbc::achievable_rate;
use crate::rng::{substream, Purpose};
use crate::snc::ServiceModel;
use rand_distr::{Bernoulli, Distribution, Gamma, Poisson};

/// Marker for a virtual delay the trace was too short to resolve. The
/// true delay is at least `horizon - t`, so any finite threshold test
/// must count it as a violation.
pub const UNRESOLVED_DELAY: u32 = u32::MAX;

/// One simulated queue run.
///
/// `arrivals` and `service` are per-slot bit amounts, `service` being
/// the offered amount before the work-conserving truncation. `delays`
/// holds the virtual delay W(t) for slot boundaries t = warmup,
/// warmup + 1, ..., horizon, in slots.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueTrace {
    pub arrivals: Vec<f64>,
    pub service: Vec<f64>,
    pub delays: Vec<u32>,
    pub horizon: usize,
    pub warmup: usize,
    pub seed: u64,
    /// Arrival rate at or above the mean offered service; delays have
    /// no stationary law and the tail estimate is meaningless.
    pub unstable: bool,
}

fn mean_offered_bits(service: &ServiceModel) -> Result<f64> {
    match service {
        ServiceModel::FixedRate { rate, expected_ep, r_cu } => {
            Ok((1.0 - expected_ep) * rate * *r_cu as f64)
        }
        ServiceModel::FixedEpsilon { model, eps, r_cu, gamma0, .. } => {
            let upper = model.mean() + 40.0 * model.shape.sqrt() * model.scale;
            if upper <= *gamma0 {
                return Ok(0.0);
            }
            let n = 4000;
            let h = (upper - gamma0) / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let x = gamma0 + (i as f64 + 0.5) * h;
                acc += achievable_rate(x, *eps, *r_cu)? * model.pdf(x)?;
            }
            Ok((1.0 - eps) * *r_cu as f64 * acc * h)
        }
    }
}

/// Runs `horizon` slots of a Poisson-arrival, work-conserving queue
/// fed by `service` and records the virtual delay after a 10% warm-up.
///
/// Bits arriving in a slot are eligible for that slot's service, so a
/// lightly loaded queue reports zero delay. W(t) is the smallest w
/// with the cumulative departures at t + w covering the cumulative
/// arrivals at t; when the trace ends first the slot gets
/// [`UNRESOLVED_DELAY`].
pub fn simulate_queue(
    arrival_rate: f64,
    service: &ServiceModel,
    horizon: usize,
    seed: u64,
) -> Result<QueueTrace> {
    if !(arrival_rate >= 0.0) || !arrival_rate.is_finite() {
        return Err(Error::Domain("arrival rate must be non-negative".into()));
    }
    if horizon < 10 {
        return Err(Error::Domain("horizon must cover at least 10 slots".into()));
    }
    let warmup = horizon / 10;

    let mut arr_rng = substream(seed, Purpose::Arrival, 0, 0);
    let arrivals: Vec<f64> = if arrival_rate == 0.0 {
        vec![0.0; horizon]
    } else {
        let pois = Poisson::new(arrival_rate)
            .map_err(|e| Error::Domain(format!("arrival law: {e}")))?;
        (0..horizon).map(|_| pois.sample(&mut arr_rng)).collect()
    };

    let mut coin_rng = substream(seed, Purpose::DecodeCoin, 0, 0);
    let mut sinr_rng = substream(seed, Purpose::SlotSinr, 0, 0);
    let offered: Vec<f64> = match service {
        ServiceModel::FixedRate { rate, expected_ep, r_cu } => {
            let coin = Bernoulli::new(1.0 - expected_ep)
                .map_err(|e| Error::Domain(format!("decode coin: {e}")))?;
            let bits = rate * *r_cu as f64;
            (0..horizon)
                .map(|_| if coin.sample(&mut coin_rng) { bits } else { 0.0 })
                .collect()
        }
        ServiceModel::FixedEpsilon { model, eps, r_cu, gamma0, .. } => {
            let coin = Bernoulli::new(1.0 - eps)
                .map_err(|e| Error::Domain(format!("decode coin: {e}")))?;
            let law = Gamma::new(model.shape, model.scale)
                .map_err(|e| Error::Domain(format!("sinr law: {e}")))?;
            let mut out = Vec::with_capacity(horizon);
            for _ in 0..horizon {
                let gamma = law.sample(&mut sinr_rng);
                let decoded = coin.sample(&mut coin_rng);
                let bits = if gamma <= *gamma0 || !decoded {
                    0.0
                } else {
                    achievable_rate(gamma, *eps, *r_cu)? * *r_cu as f64
                };
                out.push(bits);
            }
            out
        }
    };

    let mut a_cum = vec![0.0f64; horizon + 1];
    let mut d_cum = vec![0.0f64; horizon + 1];
    for t in 0..horizon {
        a_cum[t + 1] = a_cum[t] + arrivals[t];
        // min against the arrivals keeps drained boundaries exactly
        // equal, so the zero-delay comparison below is exact.
        d_cum[t + 1] = (d_cum[t] + offered[t]).min(a_cum[t + 1]);
    }

    let mut delays = Vec::with_capacity(horizon - warmup + 1);
    let mut k = warmup;
    for t in warmup..=horizon {
        if k < t {
            k = t;
        }
        while k <= horizon && d_cum[k] < a_cum[t] {
            k += 1;
        }
        delays.push(if k <= horizon { (k - t) as u32 } else { UNRESOLVED_DELAY });
    }

    let unstable = arrival_rate >= mean_offered_bits(service)?;
    Ok(QueueTrace { arrivals, service: offered, delays, horizon, warmup, seed, unstable })
}

/// Empirical estimate of P(W >= d_th) over the censoring-safe window.
#[derive(Debug, Clone, Copy)]
pub struct ViolationEstimate {
    pub frequency: f64,
    pub violations: usize,
    /// Number of slot boundaries inspected.
    pub window: usize,
}

impl ViolationEstimate {
    /// True when the frequency sits within three binomial standard
    /// errors above `bound`, the slack a finite sample is allowed.
    pub fn dominated_by(&self, bound: f64) -> bool {
        let b = bound.clamp(0.0, 1.0);
        let se = (b * (1.0 - b) / self.window as f64).sqrt();
        self.frequency <= b + 3.0 * se
    }
}

/// Frequency of W(t) >= d_th for t between warm-up and horizon - d_th.
///
/// The window stops early enough that every inspected slot either
/// resolved or is known to exceed the threshold, so truncation cannot
/// bias the estimate downward.
pub fn violation_frequency(trace: &QueueTrace, d_th: usize) -> Result<ViolationEstimate> {
    if d_th < 1 {
        return Err(Error::Domain("delay threshold must be at least one slot".into()));
    }
    if trace.horizon < trace.warmup + d_th {
        return Err(Error::Domain(format!(
            "horizon {} too short for threshold {d_th} after warm-up {}",
            trace.horizon, trace.warmup
        )));
    }
    let last = trace.horizon - d_th;
    let mut violations = 0usize;
    for t in trace.warmup..=last {
        let w = trace.delays[t - trace.warmup];
        if w == UNRESOLVED_DELAY || w as usize >= d_th {
            violations += 1;
        }
    }
    let window = last - trace.warmup + 1;
    Ok(ViolationEstimate { frequency: violations as f64 / window as f64, violations, window })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::GammaSinrModel;
    use crate::snc::ub_sdvp_inf;

    #[test]
    fn zero_arrival_rate_keeps_every_delay_at_zero() {
        let svc = ServiceModel::fixed_rate(0.2, 0.0, 240).unwrap();
        let trace = simulate_queue(0.0, &svc, 2000, 1).unwrap();
        assert!(!trace.unstable);
        assert!(trace.arrivals.iter().all(|a| *a == 0.0));
        assert!(trace.delays.iter().all(|w| *w == 0));
    }

    #[test]
    fn certain_decoding_failure_backlogs_forever() {
        let svc = ServiceModel::fixed_rate(0.3, 1.0, 240).unwrap();
        let trace = simulate_queue(40.0, &svc, 2000, 2).unwrap();
        assert!(trace.unstable);
        assert!(trace.service.iter().all(|s| *s == 0.0));
        assert!(trace.delays.iter().all(|w| *w == UNRESOLVED_DELAY));
    }

    #[test]
    fn overload_sets_the_unstable_flag() {
        let svc = ServiceModel::fixed_rate(0.2, 0.0, 240).unwrap();
        assert!(simulate_queue(48.0, &svc, 1000, 3).unwrap().unstable);
        assert!(!simulate_queue(47.9, &svc, 1000, 3).unwrap().unstable);
    }

    #[test]
    fn departures_trail_arrivals_and_drains_report_zero_wait() {
        let svc = ServiceModel::fixed_rate(0.25, 0.02, 240).unwrap();
        let trace = simulate_queue(20.0, &svc, 5000, 4).unwrap();
        assert!(!trace.unstable);
        let n = trace.horizon;
        let mut a_cum = vec![0.0; n + 1];
        let mut d_cum = vec![0.0; n + 1];
        for t in 0..n {
            a_cum[t + 1] = a_cum[t] + trace.arrivals[t];
            d_cum[t + 1] = (d_cum[t] + trace.service[t]).min(a_cum[t + 1]);
        }
        for t in 0..=n {
            assert!(d_cum[t] <= a_cum[t]);
        }
        let mut drained = 0;
        let mut zeros = 0;
        for t in trace.warmup..=n {
            if d_cum[t] == a_cum[t] {
                drained += 1;
                assert_eq!(trace.delays[t - trace.warmup], 0);
            }
            if trace.delays[t - trace.warmup] == 0 {
                zeros += 1;
            }
        }
        assert!(drained > 0, "a queue at 40% load should drain");
        assert_eq!(drained, zeros);
        // Brute-force the two-pointer result on a sample of slots.
        for t in (trace.warmup..=n).step_by(97) {
            let brute = (t..=n)
                .find(|k| d_cum[*k] >= a_cum[t])
                .map(|k| (k - t) as u32)
                .unwrap_or(UNRESOLVED_DELAY);
            assert_eq!(trace.delays[t - trace.warmup], brute, "slot {t}");
        }
    }

    #[test]
    fn violation_rich_regime_stays_under_the_analytic_bound() {
        let svc = ServiceModel::fixed_rate(0.275, 0.1, 200).unwrap();
        let bound = ub_sdvp_inf(&svc, 40.0, 3).unwrap();
        assert!(bound.stable);
        let trace = simulate_queue(40.0, &svc, 100_000, 5).unwrap();
        assert!(!trace.unstable);
        let est = violation_frequency(&trace, 3).unwrap();
        assert!(est.violations > 0, "regime chosen to produce real violations");
        assert!(
            est.dominated_by(bound.value),
            "empirical {} above bound {}",
            est.frequency,
            bound.value
        );
    }

    #[test]
    fn adapted_rate_service_keeps_a_light_queue_at_zero() {
        let model = GammaSinrModel::new(40.0, 0.025).unwrap();
        let svc = ServiceModel::fixed_epsilon(model, 1e-3, 240).unwrap();
        let trace = simulate_queue(40.0, &svc, 20_000, 6).unwrap();
        assert!(!trace.unstable);
        let est = violation_frequency(&trace, 2).unwrap();
        assert_eq!(est.violations, 0);
    }

    #[test]
    fn adapted_rate_overload_is_flagged() {
        let model = GammaSinrModel::new(40.0, 0.025).unwrap();
        let svc = ServiceModel::fixed_epsilon(model, 1e-3, 240).unwrap();
        assert!(simulate_queue(220.0, &svc, 1000, 7).unwrap().unstable);
    }

    #[test]
    fn same_seed_reproduces_the_trace_exactly() {
        let model = GammaSinrModel::new(40.0, 0.025).unwrap();
        let svc = ServiceModel::fixed_epsilon(model, 1e-2, 240).unwrap();
        let a = simulate_queue(30.0, &svc, 3000, 9).unwrap();
        let b = simulate_queue(30.0, &svc, 3000, 9).unwrap();
        assert_eq!(a, b);
        let c = simulate_queue(30.0, &svc, 3000, 10).unwrap();
        assert_ne!(a.arrivals, c.arrivals);
    }
}
