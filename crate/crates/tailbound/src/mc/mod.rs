//! Matrix-level validation of the closed forms.
//!
//! The rest of the crate works with two approximations: the Gamma law
//! for the post-detection SINR and the MGF service model of the
//! queue. Here the actual matrices are drawn and the actual queue is
//! run, so both approximations can be measured instead of trusted.

mod queue;

pub use queue::{
    simulate_queue, violation_frequency, QueueTrace, ViolationEstimate, UNRESOLVED_DELAY,
};

use crate::channel::{GammaSinrModel, UeLargeScale};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::par;
use crate::rng::{substream, Purpose};
use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};

type C64 = Complex<f64>;

/// One small-scale draw conditioned through the pilot estimate.
///
/// `d` holds the per-UE conditional-mean columns the detector sees,
/// `e` the estimation error left over, and `g` the Gram-plus-ridge
/// matrix every SINR evaluation goes through.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub d: DMatrix<C64>,
    pub e: DMatrix<C64>,
    pub g: DMatrix<C64>,
    /// Ridge weight 1/omega on the diagonal of `g`.
    pub ridge: f64,
}

fn complex_normal_column<R: Rng>(n: usize, per_entry_var: f64, rng: &mut R) -> DVector<C64> {
    let comp = Normal::new(0.0, (0.5 * per_entry_var).sqrt()).expect("positive variance");
    DVector::from_fn(n, |_, _| C64::new(comp.sample(rng), comp.sample(rng)))
}

/// Draws small-scale fading, runs the pilot estimate, and assembles
/// the detector-side matrices for draw index `draw` of stream `seed`.
///
/// Per UE the raw channel column is unit-variance complex normal and
/// the pilot observation adds noise of variance 1/(rho N_LoP lambda
/// beta) per entry; conditioning on that observation splits the
/// scaled column into the mean `d` and an error of per-entry variance
/// delta/(rho N_LoP).
pub fn draw_channel(
    config: &SystemConfig,
    ls: &UeLargeScale,
    seed: u64,
    draw: u64,
) -> Result<ChannelRealization> {
    config.validate()?;
    let m = config.n_ues;
    let n_t = config.n_antennas;
    if ls.lambda.len() != m {
        return Err(Error::Domain(format!(
            "large-scale state holds {} UEs, config {m}",
            ls.lambda.len()
        )));
    }
    let rho = config.tx_power_w;
    let n_lop = config.pilot_len as f64;
    let mut d = DMatrix::<C64>::zeros(n_t, m);
    let mut e = DMatrix::<C64>::zeros(n_t, m);
    for ue in 0..m {
        let gain = ls.lambda[ue] * ls.beta[ue];
        let delta = ls.delta[ue];
        let mut ch = substream(seed, Purpose::Channel, ue as u64, draw);
        let mut pn = substream(seed, Purpose::PilotNoise, ue as u64, draw);
        let h = complex_normal_column(n_t, 1.0, &mut ch);
        let noise = complex_normal_column(n_t, 1.0 / (rho * n_lop * gain), &mut pn);
        let estimate = &h + &noise;
        let scale = C64::new(gain.sqrt(), 0.0);
        let mean = estimate * (scale * C64::new(delta, 0.0));
        let err = h * scale - &mean;
        d.set_column(ue, &mean);
        e.set_column(ue, &err);
    }
    let ridge = 1.0 / ls.omega;
    let mut g = &d * d.adjoint();
    for i in 0..n_t {
        g[(i, i)] += C64::new(ridge, 0.0);
    }
    Ok(ChannelRealization { d, e, g, ridge })
}

/// Per-UE detector rows together with a conditioning note.
#[derive(Debug, Clone)]
pub struct Detectors {
    /// Row m maximizes UE m's SINR.
    pub rows: DMatrix<C64>,
    /// Set when the Gram matrix looked numerically hostile; results
    /// are still returned.
    pub ill_conditioned: bool,
}

fn cholesky(g: &DMatrix<C64>) -> Result<nalgebra::Cholesky<C64, nalgebra::Dyn>> {
    g.clone()
        .cholesky()
        .ok_or_else(|| Error::Numeric("Gram matrix lost positive definiteness".into()))
}

/// Highest-SINR linear detector per UE, via factorized solves rather
/// than an explicit inverse.
pub fn optimal_detector(real: &ChannelRealization) -> Result<Detectors> {
    let chol = cholesky(&real.g)?;
    let l = chol.l();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..l.nrows() {
        let v = l[(i, i)].re;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    // Squared diagonal spread of the factor tracks the condition
    // number well enough for a warning threshold.
    let ill_conditioned = !(lo > 0.0) || (hi / lo).powi(2) > 1e12;
    let solved = chol.solve(&real.d);
    Ok(Detectors { rows: solved.adjoint(), ill_conditioned })
}

/// SINR of UE `ue` under an arbitrary detector row.
///
/// The denominator removes the UE's own column from the Gram matrix,
/// so whatever the row, signal never leaks into interference.
pub fn detector_sinr(real: &ChannelRealization, ue: usize, row: &DVector<C64>) -> Result<f64> {
    if ue >= real.d.ncols() {
        return Err(Error::Domain(format!("ue {ue} out of range")));
    }
    let d = real.d.column(ue);
    let signal = row.dotc(&d.into_owned());
    let num = signal.norm_sqr();
    let gr = &real.g * row;
    let den = row.dotc(&gr).re - num;
    if !(den > 0.0) {
        return Err(Error::Numeric(format!("interference power {den} must be positive")));
    }
    Ok(num / den)
}

/// Closed-form SINR of every UE at the optimal detector for one draw.
pub fn sinr_at_optimum(real: &ChannelRealization) -> Result<Vec<f64>> {
    let chol = cholesky(&real.g)?;
    let solved = chol.solve(&real.d);
    (0..real.d.ncols())
        .map(|ue| {
            let z = solved.column(ue).dotc(&real.d.column(ue).into_owned()).re;
            if !(z > 0.0 && z < 1.0) {
                return Err(Error::Numeric(format!("quadratic form {z} outside (0, 1)")));
            }
            Ok(z / (1.0 - z))
        })
        .collect()
}

/// Per-UE empirical SINR samples across independent draws.
pub fn empirical_sinr(
    config: &SystemConfig,
    ls: &UeLargeScale,
    n_draws: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if n_draws == 0 {
        return Err(Error::Domain("need at least one draw".into()));
    }
    let per_draw: Vec<Vec<f64>> = par::map_indexed(n_draws, |i| {
        let real = draw_channel(config, ls, seed, i as u64)?;
        sinr_at_optimum(&real)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let m = config.n_ues;
    let mut out = vec![Vec::with_capacity(n_draws); m];
    for draw in per_draw {
        for (ue, v) in draw.into_iter().enumerate() {
            out[ue].push(v);
        }
    }
    Ok(out)
}

/// Agreement report between a sample set and a fitted Gamma law.
#[derive(Debug, Clone, Copy)]
pub struct FitReport {
    pub n: usize,
    /// Kolmogorov-Smirnov statistic against the fitted cdf.
    pub ks: f64,
    /// 95% one-sample KS acceptance threshold, 1.36/sqrt(n).
    pub ks_threshold: f64,
    pub mean_rel_err: f64,
    pub var_rel_err: f64,
}

impl FitReport {
    pub fn accepts(&self) -> bool {
        self.ks < self.ks_threshold
    }
}

/// KS distance and first-two-moment errors of `samples` against
/// `model`.
pub fn validate_gamma_fit(samples: &[f64], model: &GammaSinrModel) -> Result<FitReport> {
    let n = samples.len();
    if n < 1000 {
        return Err(Error::Domain(format!("{n} samples are too few for a stable KS figure")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let mut ks: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = model.cdf(x)?;
        let below = f - i as f64 / n as f64;
        let above = (i + 1) as f64 / n as f64 - f;
        ks = ks.max(below).max(above);
    }
    let mean: f64 = sorted.iter().sum::<f64>() / n as f64;
    let var: f64 = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let model_mean = model.mean();
    let model_var = model.shape * model.scale * model.scale;
    Ok(FitReport {
        n,
        ks,
        ks_threshold: 1.36 / (n as f64).sqrt(),
        mean_rel_err: (mean - model_mean).abs() / model_mean,
        var_rel_err: (var - model_var).abs() / model_var,
    })
}
