//! Self-check suites behind the `validate` subcommand.
//!
//! Each suite cross-examines one slice of the library against an
//! independent oracle: quadrature for the closed-form transform, an
//! exhaustive scan for the pilot search, a dense grid for the power
//! descent, simulated queues for the delay bound, and a KS test for
//! the SINR law. A suite failure is a real regression, not noise; the
//! sample sizes and thresholds are set so that a healthy build passes
//! every seed.

use rand::Rng;
use tailbound::channel::{derive_large_scale, equal_spacing, fit_all_gamma, GammaSinrModel};
use tailbound::config::SystemConfig;
use tailbound::error::Error;
use tailbound::mc::{empirical_sinr, simulate_queue, validate_gamma_fit, violation_frequency};
use tailbound::num::integrate;
use tailbound::optim::{self, EeProblem};
use tailbound::par;
use tailbound::rng::{substream, Purpose};
use tailbound::scenarios::{by_name, random_scenario};
use tailbound::snc::{ub_sdvp_at_theta, ub_sdvp_inf, QosSpec, ServiceModel};

pub const SUITES: [&str; 5] = ["snc", "pilot", "power", "queue", "gamma"];

pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub struct Report {
    pub suites: Vec<SuiteResult>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

fn estr(e: Error) -> String {
    e.to_string()
}

fn outcome(
    name: &'static str,
    run: impl FnOnce() -> Result<(bool, String), String>,
) -> SuiteResult {
    match run() {
        Ok((passed, detail)) => SuiteResult { name, passed, detail },
        Err(e) => SuiteResult { name, passed: false, detail: format!("did not finish: {e}") },
    }
}

/// Runs the named suites, or all of them. Unknown names are an error
/// so a typo cannot masquerade as a pass.
pub fn run(filter: &[String], seed: u64) -> Result<Report, String> {
    let wanted: Vec<&str> = if filter.is_empty() {
        SUITES.to_vec()
    } else {
        let mut v = Vec::new();
        for name in filter {
            let hit = SUITES
                .iter()
                .find(|s| **s == name.as_str())
                .ok_or_else(|| format!("unknown suite `{name}`; expected one of {}", SUITES.join(", ")))?;
            if !v.contains(hit) {
                v.push(*hit);
            }
        }
        v
    };
    let suites = wanted
        .into_iter()
        .map(|name| match name {
            "snc" => snc_suite(seed),
            "pilot" => pilot_suite(seed),
            "power" => power_suite(seed),
            "queue" => queue_suite(seed),
            "gamma" => gamma_suite(seed),
            other => unreachable!("suite list is closed: {other}"),
        })
        .collect();
    Ok(Report { suites })
}

/// Closed-form Laplace transform of the SINR law against adaptive
/// quadrature on random (shape, scale, argument) triples.
fn snc_suite(seed: u64) -> SuiteResult {
    outcome("snc", || {
        let mut worst = 0.0f64;
        for i in 0..30u64 {
            let mut rng = substream(seed, Purpose::Scratch, 9100 + i, 0);
            let shape = rng.gen_range(1.5..80.0);
            let scale = rng.gen_range(0.01..5.0);
            let arg = rng.gen_range(1e-3..50.0);
            let model = GammaSinrModel::new(shape, scale).map_err(estr)?;
            let closed = (-shape * (scale * arg).ln_1p()).exp();
            // Damping by exp(-arg x) turns the integrand into an
            // unnormalized Gamma with scale nu / (1 + nu arg); forty
            // deviations of that law bound the truncation error far
            // below the comparison tolerance.
            let eff_scale = scale / (1.0 + scale * arg);
            let upper = shape * eff_scale + 40.0 * shape.sqrt() * eff_scale;
            let quad = integrate(
                |x| model.pdf(x).unwrap_or(f64::NAN) * (-arg * x).exp(),
                0.0,
                upper,
                (closed * 1e-10).max(1e-300),
            )
            .map_err(estr)?;
            let rel = (quad.value - closed).abs() / closed;
            worst = worst.max(rel);
            if rel > 1e-8 {
                return Ok((
                    false,
                    format!(
                        "triple {i} (shape {shape:.3}, scale {scale:.4}, arg {arg:.4}): relative gap {rel:.3e}"
                    ),
                ));
            }
        }
        Ok((true, format!("30 transform pairs agreed; worst relative gap {worst:.3e}")))
    })
}

/// Golden-section pilot search against the exhaustive scan.
fn pilot_suite(seed: u64) -> SuiteResult {
    outcome("pilot", || {
        let mut max_iters = 0usize;
        for i in 0..3u64 {
            let rs = random_scenario(seed, 90 + i);
            let found = optim::optimize_pilots(&rs.cfg, &rs.distances, &rs.shadows, rs.rho, rs.rate)
                .map_err(estr)?;
            let (n_scan, _) =
                optim::exhaustive_pilots(&rs.cfg, &rs.distances, &rs.shadows, rs.rho, rs.rate)
                    .map_err(estr)?;
            if found.n_star != n_scan {
                return Ok((
                    false,
                    format!("scenario {i}: search settled on {} but the scan found {n_scan}", found.n_star),
                ));
            }
            max_iters = max_iters.max(found.iterations);
        }
        Ok((true, format!("3 searches matched the scan, at most {max_iters} bracket updates")))
    })
}

/// Power descent against a dense efficiency grid sharing its cache.
fn power_suite(seed: u64) -> SuiteResult {
    outcome("power", || {
        let rs = random_scenario(seed, 97);
        let problem =
            EeProblem::new(&rs.cfg, &rs.distances, &rs.shadows, rs.rate, rs.theta).map_err(estr)?;
        let bounds = (0.02, rs.cfg.max_tx_power_w);
        let sol = optim::odisc_with(&problem, bounds, 1e-5, 1e-5, 100).map_err(estr)?;
        for w in sol.trace.windows(2) {
            if w[1].0 < w[0].0 - 1e-12 {
                return Ok((
                    false,
                    format!("ratio estimate fell from {} to {}", w[0].0, w[1].0),
                ));
            }
        }
        let n = 400usize;
        let grid: Vec<Result<f64, String>> = par::map_indexed(n, |i| {
            let rho = bounds.0 + (bounds.1 - bounds.0) * i as f64 / (n - 1) as f64;
            problem.efficiency(rho).map_err(estr)
        });
        let mut best = f64::NEG_INFINITY;
        for v in grid {
            best = best.max(v?);
        }
        // The grid is coarse, so it may sit slightly under the true
        // peak; it must never sit meaningfully above the descent.
        if best > sol.ratio * (1.0 + 1e-3) {
            return Ok((
                false,
                format!("descent stopped at {} but the grid reached {best}", sol.ratio),
            ));
        }
        Ok((
            true,
            format!(
                "descent matched a {n}-point grid (ratio {:.6}, rho* {:.4} W, {} outer steps)",
                sol.ratio, sol.rho_star, sol.iterations
            ),
        ))
    })
}

/// Simulated queues against the delay-violation bound over a grid of
/// exponents, delay budgets, and loads, plus one adapted-rate leg.
fn queue_suite(seed: u64) -> SuiteResult {
    outcome("queue", || {
        let horizon = 200_000usize;
        let thetas = [0.01, 0.03, 0.1];
        let depths = [2usize, 4, 6, 10];
        let mut cells = 0usize;
        let mut informative = 0usize;
        let mut failures: Vec<String> = Vec::new();
        let mut stream = 0u64;
        for ep in [0.02, 0.1] {
            let svc = ServiceModel::fixed_rate(0.275, ep, 200).map_err(estr)?;
            for lam in [36.0, 40.0] {
                let trace =
                    simulate_queue(lam, &svc, horizon, seed.wrapping_add(300 + stream)).map_err(estr)?;
                stream += 1;
                for th in thetas {
                    for d in depths {
                        let b = ub_sdvp_at_theta(
                            &QosSpec { theta: th, d_th: d, arrival_rate: lam },
                            &svc,
                        )
                        .map_err(estr)?;
                        let est = violation_frequency(&trace, d).map_err(estr)?;
                        cells += 1;
                        if b.stable && b.value < 1.0 {
                            informative += 1;
                        }
                        if !est.dominated_by(b.value) {
                            failures.push(format!(
                                "ep {ep} lam {lam} theta {th} d {d}: {:.3e} above {:.3e}",
                                est.frequency, b.value
                            ));
                        }
                    }
                }
                for d in [2usize, 3] {
                    let b = ub_sdvp_inf(&svc, lam, d).map_err(estr)?;
                    let est = violation_frequency(&trace, d).map_err(estr)?;
                    cells += 1;
                    if b.stable && b.value < 1.0 {
                        informative += 1;
                    }
                    if !est.dominated_by(b.value) {
                        failures.push(format!(
                            "ep {ep} lam {lam} tuned exponent d {d}: {:.3e} above {:.3e}",
                            est.frequency, b.value
                        ));
                    }
                }
            }
        }

        let p = by_name("fig4", seed).expect("stock recipe");
        let ls = derive_large_scale(&p.cfg, &p.distances, &p.shadows).map_err(estr)?;
        let models = fit_all_gamma(&p.cfg, &ls).map_err(estr)?;
        let worst = (0..models.len())
            .min_by(|a, b| models[*a].mean().total_cmp(&models[*b].mean()))
            .expect("preset has UEs");
        let svc = ServiceModel::fixed_epsilon(
            models[worst],
            p.target_ep.expect("fig4 pins the error target"),
            p.cfg.data_len(),
        )
        .map_err(estr)?;
        let trace =
            simulate_queue(p.arrival_rate, &svc, horizon, seed.wrapping_add(900)).map_err(estr)?;
        for d in [2usize, 6, 10, 14] {
            let b = ub_sdvp_at_theta(
                &QosSpec { theta: p.theta, d_th: d, arrival_rate: p.arrival_rate },
                &svc,
            )
            .map_err(estr)?;
            let est = violation_frequency(&trace, d).map_err(estr)?;
            cells += 1;
            if b.stable && b.value < 1.0 {
                informative += 1;
            }
            if !est.dominated_by(b.value) {
                failures.push(format!(
                    "adapted rate d {d}: {:.3e} above {:.3e}",
                    est.frequency, b.value
                ));
            }
        }

        if failures.is_empty() {
            Ok((
                true,
                format!("{cells} (theta, d_th, load) cells dominated, {informative} with informative bounds"),
            ))
        } else {
            Ok((false, failures.join("; ")))
        }
    })
}

/// KS test of drawn SINR samples against the fitted law, with a
/// deliberately wrong law as the negative control.
fn gamma_suite(seed: u64) -> SuiteResult {
    outcome("gamma", || {
        let cfg = SystemConfig::baseline();
        let distances = equal_spacing(&cfg);
        let shadows = vec![1.0; cfg.n_ues];
        let ls = derive_large_scale(&cfg, &distances, &shadows).map_err(estr)?;
        let models = fit_all_gamma(&cfg, &ls).map_err(estr)?;
        let draws = empirical_sinr(&cfg, &ls, 1500, seed.wrapping_add(7)).map_err(estr)?;
        let mut worst = 0.0f64;
        for (ue, samples) in draws.iter().enumerate() {
            let rep = validate_gamma_fit(samples, &models[ue]).map_err(estr)?;
            worst = worst.max(rep.ks);
            if !(rep.ks < 0.05) {
                return Ok((
                    false,
                    format!("UE {ue}: KS statistic {:.4} at n {}", rep.ks, rep.n),
                ));
            }
        }
        let mut wrong = models[0];
        wrong.shape *= 2.0;
        let control = validate_gamma_fit(&draws[0], &wrong).map_err(estr)?;
        if control.accepts() {
            return Ok((false, "a doubled shape slipped past the KS test".into()));
        }
        Ok((
            true,
            format!(
                "{} UEs fit with worst KS {worst:.4}; the doubled-shape control was flagged",
                draws.len()
            ),
        ))
    })
}
