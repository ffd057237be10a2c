//! Drives one sweep axis through a scenario and renders the rows.

use serde_json::json;
use tailbound::channel::{derive_large_scale, fit_all_gamma};
use tailbound::error::Error;
use tailbound::optim::{self, EeProblem, EeSolution, PilotSearchResult};
use tailbound::par;
use tailbound::snc::{ub_sdvp_at_theta, ub_sdvp_inf, QosSpec, ServiceModel};

use crate::scenario::Scenario;

/// Numeric payload of one completed row.
#[derive(Debug, Clone)]
pub struct Cells {
    pub per_ue_ep: Vec<f64>,
    pub ep_sum: f64,
    pub n_lop_star: Option<usize>,
    pub ub_sdvp: f64,
    pub ep_ec: f64,
    pub ep_ee: f64,
    pub vartheta_star: Option<f64>,
    pub rho_star: Option<f64>,
    pub iterations: Option<usize>,
    /// Set when --verify-exhaustive found the scan disagreeing with
    /// the golden-section pilot search on this row.
    pub pilot_mismatch: bool,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub sweep: f64,
    pub cells: Result<Cells, String>,
}

pub struct SweepOutput {
    pub rows: Vec<Row>,
    pub verify_ok: bool,
}

fn estr(e: Error) -> String {
    e.to_string()
}

/// Axes that change the pilot-search landscape, forcing a search per
/// row; every other axis shares one search.
fn moves_pilot_search(axis: &str) -> bool {
    matches!(axis, "power" | "antennas" | "bandwidth_khz" | "rate")
}

/// Axes that change the efficiency problem. The power axis is special
/// cased: the descent runs once and rows reuse its evaluation cache.
fn moves_ee_problem(axis: &str) -> bool {
    matches!(axis, "rate" | "theta" | "antennas" | "bandwidth_khz")
}

pub fn run_sweep(sc: &Scenario, verify: bool) -> SweepOutput {
    let axis = sc.sweep.axis.clone();
    let values = sc.sweep.values();

    let mut hoist_mismatch = false;
    let hoisted_pilot: Option<Result<PilotSearchResult, String>> =
        if sc.optimize_pilot && !moves_pilot_search(&axis) {
            let r = optim::optimize_pilots(&sc.cfg, &sc.distances, &sc.shadows, sc.cfg.tx_power_w, sc.rate)
                .map_err(estr);
            if verify {
                if let Ok(res) = &r {
                    match optim::exhaustive_pilots(
                        &sc.cfg,
                        &sc.distances,
                        &sc.shadows,
                        sc.cfg.tx_power_w,
                        sc.rate,
                    ) {
                        Ok((n_scan, _)) => hoist_mismatch = n_scan != res.n_star,
                        Err(_) => hoist_mismatch = true,
                    }
                }
            }
            Some(r)
        } else {
            None
        };

    let power_problem: Option<Result<EeProblem, String>> = if sc.run_odisc && axis == "power" {
        Some(EeProblem::new(&sc.cfg, &sc.distances, &sc.shadows, sc.rate, sc.theta).map_err(estr))
    } else {
        None
    };
    let hoisted_ee: Option<Result<EeSolution, String>> = if sc.run_odisc && !moves_ee_problem(&axis) {
        Some(match &power_problem {
            Some(Ok(p)) => optim::odisc_with(p, sc.power_bounds, sc.eps1, sc.eps2, sc.max_iter).map_err(estr),
            Some(Err(e)) => Err(e.clone()),
            None => optim::odisc(
                &sc.cfg,
                &sc.distances,
                &sc.shadows,
                sc.rate,
                sc.theta,
                sc.power_bounds,
                sc.eps1,
                sc.eps2,
                sc.max_iter,
            )
            .map_err(estr),
        })
    } else {
        None
    };

    let rows: Vec<Row> = par::map_indexed(values.len(), |i| {
        let v = values[i];
        Row {
            sweep: v,
            cells: compute_row(
                sc,
                &axis,
                v,
                hoisted_pilot.as_ref(),
                hoisted_ee.as_ref(),
                power_problem.as_ref(),
                verify,
            ),
        }
    });

    let row_mismatch = rows
        .iter()
        .any(|r| matches!(&r.cells, Ok(c) if c.pilot_mismatch));
    SweepOutput { rows, verify_ok: !(hoist_mismatch || row_mismatch) }
}

fn compute_row(
    sc: &Scenario,
    axis: &str,
    v: f64,
    hoisted_pilot: Option<&Result<PilotSearchResult, String>>,
    hoisted_ee: Option<&Result<EeSolution, String>>,
    power_problem: Option<&Result<EeProblem, String>>,
    verify: bool,
) -> Result<Cells, String> {
    let mut cfg = sc.cfg.clone();
    let mut rate = sc.rate;
    let mut theta = sc.theta;
    let mut arrival = sc.arrival_rate;
    let mut d_th = sc.d_th_slots;
    let mut target = sc.target_ep;
    match axis {
        "pilot" => cfg.pilot_len = v.round() as usize,
        "power" => cfg.tx_power_w = v,
        "antennas" => cfg.n_antennas = v.round() as usize,
        "bandwidth_khz" => {
            let slot = cfg.slot_duration_s;
            cfg = cfg.with_frame(v * 1e3, slot);
        }
        "eps" => target = Some(v),
        "delay_ms" => {
            let slots = (v / (cfg.slot_duration_s * 1e3)).floor();
            if slots < 1.0 {
                return Err(format!("delay {v} ms is shorter than one slot"));
            }
            d_th = slots as usize;
        }
        "rate" => rate = v,
        "theta" => theta = v,
        "arrival" => arrival = v,
        other => return Err(format!("unknown sweep axis `{other}`")),
    }
    if let Some(e) = target {
        if !(e > 0.0 && e < 0.5) {
            return Err(format!("error target {e} outside (0, 0.5)"));
        }
    }
    if !(rate > 0.0 && theta > 0.0 && arrival >= 0.0) {
        return Err(format!("rate {rate}, theta {theta}, arrival {arrival} out of range"));
    }

    let mut n_star: Option<usize> = None;
    let mut pilot_mismatch = false;
    // (throughput, supply power) coming from the shared power problem,
    // which owns both the pilot choice and the throughput on this axis.
    let mut ec_override: Option<(f64, f64)> = None;
    if let (true, Some(pr)) = (axis == "power", power_problem) {
        let p = pr.as_ref().map_err(String::clone)?;
        let (n, e) = p.ep_ec_at(v).map_err(estr)?;
        n_star = Some(n);
        cfg.pilot_len = n;
        ec_override = Some((e, p.total_power_at(v)));
    } else if sc.optimize_pilot {
        let found = match hoisted_pilot {
            Some(Ok(r)) => r.n_star,
            Some(Err(e)) => return Err(e.clone()),
            None => {
                let r = optim::optimize_pilots(&cfg, &sc.distances, &sc.shadows, cfg.tx_power_w, rate)
                    .map_err(estr)?;
                if verify {
                    let (n_scan, _) =
                        optim::exhaustive_pilots(&cfg, &sc.distances, &sc.shadows, cfg.tx_power_w, rate)
                            .map_err(estr)?;
                    pilot_mismatch = n_scan != r.n_star;
                }
                r.n_star
            }
        };
        n_star = Some(found);
        if axis != "pilot" {
            cfg.pilot_len = found;
        }
    }
    cfg.validate().map_err(estr)?;

    let ls = derive_large_scale(&cfg, &sc.distances, &sc.shadows).map_err(estr)?;
    let models = fit_all_gamma(&cfg, &ls).map_err(estr)?;
    let r_cu = cfg.data_len();
    let services: Vec<ServiceModel> = models
        .iter()
        .map(|m| match target {
            Some(e) => ServiceModel::fixed_epsilon(*m, e, r_cu),
            None => ServiceModel::fixed_rate_from_model(m, rate, r_cu),
        })
        .collect::<Result<_, _>>()
        .map_err(estr)?;

    let per_ue_ep: Vec<f64> = services
        .iter()
        .map(|s| match s {
            ServiceModel::FixedEpsilon { eps, outage, .. } => eps + (1.0 - eps) * outage,
            ServiceModel::FixedRate { expected_ep, .. } => *expected_ep,
        })
        .collect();
    let ep_sum: f64 = per_ue_ep.iter().sum();

    // The violation bound is reported for the weakest UE, the one the
    // delay target actually binds on.
    let worst = (0..models.len())
        .min_by(|a, b| models[*a].mean().total_cmp(&models[*b].mean()))
        .expect("validated configs have at least one UE");
    let bound = if sc.inf_theta {
        ub_sdvp_inf(&services[worst], arrival, d_th)
    } else {
        ub_sdvp_at_theta(&QosSpec { theta, d_th, arrival_rate: arrival }, &services[worst])
    }
    .map_err(estr)?;

    let mut ep_ec = 0.0;
    for s in &services {
        ep_ec += optim::ep_ec(s, theta).map_err(estr)?;
    }
    let mut ep_ee = ep_ec / optim::total_power(cfg.tx_power_w, cfg.circuit_power_w, cfg.amp_efficiency);
    if let Some((e, ptot)) = ec_override {
        ep_ec = e;
        ep_ee = e / ptot;
    }

    let mut vartheta_star = None;
    let mut rho_star = None;
    let mut iterations = None;
    match hoisted_ee {
        Some(Ok(sol)) => {
            vartheta_star = Some(sol.ratio);
            rho_star = Some(sol.rho_star);
            iterations = Some(sol.iterations);
        }
        Some(Err(e)) => return Err(e.clone()),
        None if sc.run_odisc => {
            let sol = optim::odisc(
                &cfg,
                &sc.distances,
                &sc.shadows,
                rate,
                theta,
                sc.power_bounds,
                sc.eps1,
                sc.eps2,
                sc.max_iter,
            )
            .map_err(estr)?;
            vartheta_star = Some(sol.ratio);
            rho_star = Some(sol.rho_star);
            iterations = Some(sol.iterations);
            ep_ee = sol.ratio;
        }
        None => {}
    }

    Ok(Cells {
        per_ue_ep,
        ep_sum,
        n_lop_star: n_star,
        ub_sdvp: bound.value,
        ep_ec,
        ep_ee,
        vartheta_star,
        rho_star,
        iterations,
        pilot_mismatch,
    })
}

/// Shortest decimal string that parses back to the same bits: plain
/// notation unless the exponent form is shorter.
fn fmt_f64(x: f64) -> String {
    let plain = format!("{x}");
    let sci = format!("{x:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

/// Quotes a CSV field per RFC 4180 when it needs it.
fn quote_csv(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv_header(n_ues: usize) -> String {
    let mut h = String::from("sweep");
    for i in 1..=n_ues {
        h.push_str(&format!(",ep_{i}"));
    }
    h.push_str(",ep_sum,n_lop_star,ub_sdvp,ep_ec,ep_ee,vartheta_star,rho_star,iterations,seed,error");
    h
}

pub fn to_csv(sc: &Scenario, out: &SweepOutput) -> String {
    let m = sc.cfg.n_ues;
    let mut s = csv_header(m);
    s.push('\n');
    for row in &out.rows {
        let mut f: Vec<String> = Vec::with_capacity(m + 11);
        f.push(fmt_f64(row.sweep));
        match &row.cells {
            Ok(c) => {
                for e in &c.per_ue_ep {
                    f.push(fmt_f64(*e));
                }
                f.push(fmt_f64(c.ep_sum));
                f.push(c.n_lop_star.map(|n| n.to_string()).unwrap_or_default());
                f.push(fmt_f64(c.ub_sdvp));
                f.push(fmt_f64(c.ep_ec));
                f.push(fmt_f64(c.ep_ee));
                f.push(c.vartheta_star.map(fmt_f64).unwrap_or_default());
                f.push(c.rho_star.map(fmt_f64).unwrap_or_default());
                f.push(c.iterations.map(|n| n.to_string()).unwrap_or_default());
                f.push(sc.seed.to_string());
                f.push(String::new());
            }
            Err(e) => {
                f.extend(std::iter::repeat(String::new()).take(m + 8));
                f.push(sc.seed.to_string());
                f.push(quote_csv(e));
            }
        }
        s.push_str(&f.join(","));
        s.push('\n');
    }
    s
}

pub fn to_json(sc: &Scenario, out: &SweepOutput) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = out
        .rows
        .iter()
        .map(|r| match &r.cells {
            Ok(c) => json!({
                "sweep": r.sweep,
                "ep": c.per_ue_ep,
                "ep_sum": c.ep_sum,
                "n_lop_star": c.n_lop_star,
                "ub_sdvp": c.ub_sdvp,
                "ep_ec": c.ep_ec,
                "ep_ee": c.ep_ee,
                "vartheta_star": c.vartheta_star,
                "rho_star": c.rho_star,
                "iterations": c.iterations,
                "error": serde_json::Value::Null,
            }),
            Err(e) => json!({ "sweep": r.sweep, "error": e }),
        })
        .collect();
    json!({
        "scenario": sc.name,
        "axis": sc.sweep.axis,
        "seed": sc.seed,
        "verify_ok": out.verify_ok,
        "rows": rows,
    })
}
