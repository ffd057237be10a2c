//! Large-scale fading and the Gamma approximation of post-detection SINR.
//!
//! Distances and shadow factors turn into per-UE path gains, channel
//! estimation quality weights, and the shared noise weight of the MMSE
//! detector. On top of those, each UE's post-detection SINR is
//! approximated by a Gamma law whose shape couples the UEs through a
//! scalar fixed point.

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::num::{ln_gamma, reg_lower_gamma};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Large-scale state of the uplink for one placement and one
/// (pilot length, transmit power) operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct UeLargeScale {
    /// UE distances in m.
    pub d_m: Vec<f64>,
    /// Path losses lambda_m, linear.
    pub lambda: Vec<f64>,
    /// Shadow factors beta_m, linear.
    pub beta: Vec<f64>,
    /// Estimation quality delta_m in (0, 1).
    pub delta: Vec<f64>,
    /// Composite gains lambda_m beta_m delta_m.
    pub lambda_hat: Vec<f64>,
    /// Shared noise weight of the detector.
    pub omega: f64,
}

/// Derives path loss, estimation quality, and the shared noise weight
/// from a placement.
pub fn derive_large_scale(
    config: &SystemConfig,
    distances: &[f64],
    shadows: &[f64],
) -> Result<UeLargeScale> {
    config.validate()?;
    let m = config.n_ues;
    if distances.len() != m || shadows.len() != m {
        return Err(Error::Domain(format!(
            "expected {m} distances and shadows, got {} and {}",
            distances.len(),
            shadows.len()
        )));
    }
    for &d in distances {
        if !(d >= config.d_min_m && d <= config.d_max_m) {
            return Err(Error::Domain(format!(
                "distance {d} outside [{}, {}]",
                config.d_min_m, config.d_max_m
            )));
        }
    }
    for &b in shadows {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Domain(format!("shadow factor {b} must be positive")));
        }
    }

    let rho = config.tx_power_w;
    let n_lop = config.pilot_len as f64;
    let lambda: Vec<f64> = distances
        .iter()
        .map(|&d| config.pathloss_const * (d / config.d_min_m).powf(-config.pathloss_exp))
        .collect();
    let delta: Vec<f64> = lambda
        .iter()
        .zip(shadows)
        .map(|(&l, &b)| {
            let p = rho * n_lop * l * b;
            p / (p + 1.0)
        })
        .collect();
    let lambda_hat: Vec<f64> = lambda
        .iter()
        .zip(shadows)
        .zip(&delta)
        .map(|((&l, &b), &dl)| l * b * dl)
        .collect();
    let residual: f64 = lambda
        .iter()
        .zip(shadows)
        .map(|(&l, &b)| l * b / (rho * n_lop * l * b + 1.0))
        .sum();
    let omega = 1.0 / (residual + 1.0 / rho);

    Ok(UeLargeScale {
        d_m: distances.to_vec(),
        lambda,
        beta: shadows.to_vec(),
        delta,
        lambda_hat,
        omega,
    })
}

/// Deterministic placement: UEs equally spaced over [d_min, d_max],
/// a single UE at the midpoint.
pub fn equal_spacing(config: &SystemConfig) -> Vec<f64> {
    let m = config.n_ues;
    if m == 1 {
        return vec![0.5 * (config.d_min_m + config.d_max_m)];
    }
    (0..m)
        .map(|i| {
            config.d_min_m
                + (config.d_max_m - config.d_min_m) * i as f64 / (m - 1) as f64
        })
        .collect()
}

/// Random placement: distances drawn uniformly over [d_min, d_max].
pub fn random_placement<R: Rng>(config: &SystemConfig, rng: &mut R) -> Vec<f64> {
    (0..config.n_ues)
        .map(|_| rng.gen_range(config.d_min_m..=config.d_max_m))
        .collect()
}

/// Shadow factors: all ones when shadow_sigma_db is zero, otherwise
/// log-normal with 10 log10(beta) ~ Normal(0, sigma^2).
pub fn draw_shadows<R: Rng>(config: &SystemConfig, rng: &mut R) -> Vec<f64> {
    if config.shadow_sigma_db == 0.0 {
        return vec![1.0; config.n_ues];
    }
    let normal = Normal::new(0.0, config.shadow_sigma_db).expect("validated sigma");
    (0..config.n_ues)
        .map(|_| 10f64.powf(normal.sample(rng) / 10.0))
        .collect()
}

/// Gamma approximation of one UE's post-detection SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSinrModel {
    /// Shape mu.
    pub shape: f64,
    /// Scale nu.
    pub scale: f64,
    /// Interference coupling term psi of the fit.
    pub psi: f64,
    /// Interference spread term kappa of the fit.
    pub kappa: f64,
}

impl GammaSinrModel {
    /// Wraps an externally chosen shape/scale pair, e.g. for oracle tests.
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() || !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Domain("Gamma shape and scale must be positive".into()));
        }
        Ok(GammaSinrModel { shape, scale, psi: 0.0, kappa: 0.0 })
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 || !x.is_finite() {
            return Err(Error::Domain(format!("pdf argument {x} must be non-negative")));
        }
        if x == 0.0 {
            return Ok(match self.shape {
                s if s > 1.0 => 0.0,
                s if s == 1.0 => 1.0 / self.scale,
                _ => f64::INFINITY,
            });
        }
        let ln_p = (self.shape - 1.0) * x.ln()
            - x / self.scale
            - ln_gamma(self.shape)
            - self.shape * self.scale.ln();
        Ok(ln_p.exp())
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 || !x.is_finite() {
            return Err(Error::Domain(format!("cdf argument {x} must be non-negative")));
        }
        reg_lower_gamma(self.shape, x / self.scale)
    }
}

/// Fits the Gamma SINR model for UE `m`.
///
/// The coupling term psi solves a scalar fixed point; the map is
/// decreasing, so plain iteration alternates around the solution and is
/// damped once that oscillation shows up. kappa then follows in closed
/// form because its defining relation is linear once psi is known.
pub fn fit_gamma_sinr(
    config: &SystemConfig,
    ls: &UeLargeScale,
    m: usize,
) -> Result<GammaSinrModel> {
    let n_ues = config.n_ues;
    if m >= n_ues {
        return Err(Error::Domain(format!("UE index {m} out of range 0..{n_ues}")));
    }
    let n_t = config.n_antennas as f64;
    let omega = ls.omega;
    let lam_hat_m = ls.lambda_hat[m];

    if n_ues == 1 {
        return Ok(GammaSinrModel {
            shape: n_t,
            scale: omega * lam_hat_m,
            psi: 0.0,
            kappa: 0.0,
        });
    }

    let mf = n_ues as f64;
    let others: Vec<f64> = (0..n_ues)
        .filter(|&i| i != m)
        .map(|i| omega * ls.lambda_hat[i])
        .collect();
    let t_of = |psi: f64| -> Vec<f64> {
        others
            .iter()
            .map(|&g| n_t * g * (1.0 - (mf - 1.0) / n_t + (mf - 1.0) / n_t * psi) + 1.0)
            .collect()
    };
    let map = |psi: f64| -> f64 {
        t_of(psi).iter().map(|&t| 1.0 / t).sum::<f64>() / (mf - 1.0)
    };

    let mut psi = 0.0f64;
    let mut prev_delta = 0.0f64;
    let mut damped = false;
    let mut residual = f64::INFINITY;
    for it in 0..10_000 {
        let next = map(psi);
        let delta = next - psi;
        residual = delta.abs();
        if residual < 1e-10 {
            psi = next;
            break;
        }
        if it > 0 && delta * prev_delta < 0.0 {
            damped = true;
        }
        psi = if damped { psi + 0.5 * delta } else { next };
        prev_delta = delta;
        if it == 9_999 {
            return Err(Error::Convergence { what: "gamma sinr fixed point", residual });
        }
    }
    debug_assert!(residual < 1e-10);

    let t = t_of(psi);
    let kappa_num: f64 = others
        .iter()
        .zip(&t)
        .map(|(&g, &ti)| (g * psi + 1.0 / (mf - 1.0)) / (ti * ti))
        .sum();
    let kappa_den: f64 = 1.0
        + others
            .iter()
            .zip(&t)
            .map(|(&g, &ti)| g / (ti * ti))
            .sum::<f64>();
    let kappa = kappa_num / kappa_den;

    let a = n_t - mf + 1.0 + (mf - 1.0) * psi;
    let b = n_t - mf + 1.0 + (mf - 1.0) * kappa;
    let shape = a * a / b;
    let scale = b / a * omega * lam_hat_m;
    if !(shape > 0.0) || !(scale > 0.0) || !shape.is_finite() || !scale.is_finite() {
        return Err(Error::Numeric(format!(
            "degenerate Gamma fit for UE {m}: shape {shape}, scale {scale}"
        )));
    }
    Ok(GammaSinrModel { shape, scale, psi, kappa })
}

/// Fits every UE of the placement.
pub fn fit_all_gamma(config: &SystemConfig, ls: &UeLargeScale) -> Result<Vec<GammaSinrModel>> {
    (0..config.n_ues)
        .map(|m| fit_gamma_sinr(config, ls, m))
        .collect()
}
