//! Scratch diagnostics for scenario calibration. Not part of the
//! shipped surface; run with `cargo run --example probe -- <what>`.

use tailbound::config::{db_to_linear, SystemConfig};
use tailbound::optim;

fn small_config() -> SystemConfig {
    let mut cfg = SystemConfig::baseline();
    cfg.n_ues = 4;
    cfg.n_antennas = 20;
    cfg.pathloss_const = db_to_linear(-3.0);
    cfg = cfg.with_frame(120e3, 0.5e-3);
    cfg.pilot_len = 20;
    cfg
}

fn spread(cfg: &SystemConfig, d_lo: f64, d_hi: f64) -> Vec<f64> {
    let m = cfg.n_ues;
    if m == 1 {
        return vec![0.5 * (d_lo + d_hi)];
    }
    (0..m)
        .map(|i| d_lo + (d_hi - d_lo) * i as f64 / (m - 1) as f64)
        .collect()
}

struct ScanOut {
    n_eps: usize,
    v_eps: f64,
    n_ec: usize,
    n_ms: usize,
    minima: usize,
    contrast: f64,
}

/// Exhaustive scan over N for one scenario; reports the three argoptima,
/// the local-minima count of the sum-eps curve, and the relative contrast
/// of the two neighbours at its argmin (noise margin for exact search).
fn scan(cfg: &SystemConfig, d: &[f64], s: &[f64], rho: f64, rate: f64, theta: f64) -> ScanOut {
    let lo = cfg.n_ues;
    let hi = cfg.blocklength - 1;
    let rows: Vec<(f64, f64, f64)> = tailbound::par::map_indexed(hi - lo + 1, |i| {
        let n = lo + i;
        let eps = optim::expected_eps_at(cfg, d, s, rho, rate, n).unwrap();
        let r_cu = (cfg.blocklength - n) as f64;
        let idle = (-theta * r_cu * rate).exp();
        let sum_eps: f64 = eps.iter().sum();
        let mut sum_ec = 0.0;
        let mut sum_ms = 0.0;
        for &e in &eps {
            let ms = idle + (1.0 - idle) * e;
            sum_ms += ms;
            sum_ec += -ms.ln() / theta;
        }
        (sum_eps, sum_ec, sum_ms)
    });
    let mut a = (lo, f64::INFINITY);
    let mut b = (lo, f64::NEG_INFINITY);
    let mut c = (lo, f64::INFINITY);
    for (i, &(se, ec, ms)) in rows.iter().enumerate() {
        let n = lo + i;
        if se < a.1 {
            a = (n, se);
        }
        if ec > b.1 {
            b = (n, ec);
        }
        if ms < c.1 {
            c = (n, ms);
        }
    }
    let mut minima = 0;
    for i in 1..rows.len() - 1 {
        if rows[i].0 < rows[i - 1].0 && rows[i].0 < rows[i + 1].0 {
            minima += 1;
        }
    }
    let i = a.0 - lo;
    let mut contrast = f64::INFINITY;
    if i > 0 {
        contrast = contrast.min(rows[i - 1].0 / a.1 - 1.0);
    }
    if i + 1 < rows.len() {
        contrast = contrast.min(rows[i + 1].0 / a.1 - 1.0);
    }
    ScanOut {
        n_eps: a.0,
        v_eps: a.1,
        n_ec: b.0,
        n_ms: c.0,
        minima,
        contrast,
    }
}

fn fig2a_grid() {
    let s = vec![1.0; 12];
    println!("d_hi  mu_db |   N*    sum(N*)    #min  contrast   ec*  ms*");
    for d_hi in [45.0, 50.0, 55.0, 60.0, 65.0, 75.0] {
        for mu_db in [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0] {
            let mut cfg = SystemConfig::baseline();
            cfg.pathloss_const = db_to_linear(mu_db);
            let d = spread(&cfg, 35.0, d_hi);
            let o = scan(&cfg, &d, &s, 0.5, 0.2, 0.2);
            println!(
                "{d_hi:4}  {mu_db:+5.1} | {:4}  {:.3e}  {:3}  {:.2e}  {:4} {:4}",
                o.n_eps, o.v_eps, o.minima, o.contrast, o.n_ec, o.n_ms
            );
        }
    }
}

fn fig3_grid() {
    let s = vec![1.0; 12];
    println!("mu_db  r   | N30  sum30      N50  sum50      drop%  ratio");
    for mu_db in [-7.0, -6.5, -6.0, -5.5, -5.0, -4.5] {
        for rate in [0.2, 0.3, 0.4] {
            let mut cfg = SystemConfig::baseline();
            cfg.pathloss_const = db_to_linear(mu_db);
            let d = spread(&cfg, 35.0, 95.0);
            let o50 = scan(&cfg, &d, &s, 0.5, rate, 0.2);
            let cfg30 = cfg.clone().with_antennas(30);
            let o30 = scan(&cfg30, &d, &s, 0.5, rate, 0.2);
            println!(
                "{mu_db:+5.1}  {rate:.1} | {:4} {:.3e}  {:4} {:.3e}  {:4.0}  {:8.1}",
                o30.n_eps,
                o30.v_eps,
                o50.n_eps,
                o50.v_eps,
                100.0 * (1.0 - o50.n_eps as f64 / o30.n_eps as f64),
                o30.v_eps / o50.v_eps
            );
        }
    }
}

fn fig3_straggler_grid() {
    let s = vec![1.0; 12];
    println!("mu_db  r   | N30  sum30      #m  N50  sum50      #m  drop%  ratio");
    for mu_db in [3.0, 4.0, 5.0, 6.0] {
        for rate in [1.3, 1.5, 1.7, 2.0] {
            let mut cfg = SystemConfig::baseline();
            cfg.pathloss_const = db_to_linear(mu_db);
            let mut d = spread(&cfg, 35.0, 55.0);
            d.truncate(11);
            d.push(95.0);
            let o50 = scan(&cfg, &d, &s, 0.5, rate, 0.2);
            let cfg30 = cfg.clone().with_antennas(30);
            let o30 = scan(&cfg30, &d, &s, 0.5, rate, 0.2);
            println!(
                "{mu_db:+5.1}  {rate:.1} | {:4} {:.3e}  {:2}  {:4} {:.3e}  {:2}  {:4.0}  {:9.1}",
                o30.n_eps,
                o30.v_eps,
                o30.minima,
                o50.n_eps,
                o50.v_eps,
                o50.minima,
                100.0 * (1.0 - o50.n_eps as f64 / o30.n_eps as f64),
                o30.v_eps / o50.v_eps
            );
        }
    }
}

fn crit6_agreement(width: f64) {
    use rand::Rng;
    let mut agree = 0;
    let mut interior = 0;
    let mut total = 0;
    for seed in 0..60u64 {
        let mut rng = tailbound::rng::substream(99, tailbound::rng::Purpose::Scratch, seed, 0);
        let center = rng.gen_range(38.0..80.0);
        let mu_db = rng.gen_range(-5.0..-1.0);
        let rho = rng.gen_range(0.3..1.2);
        let rate = rng.gen_range(0.15..0.35);
        let theta = rng.gen_range(0.1..0.4);
        let n_t = rng.gen_range(40..=60);
        let mut cfg = SystemConfig::baseline().with_antennas(n_t);
        cfg.pathloss_const = db_to_linear(mu_db);
        let d = spread(&cfg, center - 0.5 * width, center + 0.5 * width);
        let s = vec![1.0; cfg.n_ues];
        let o = scan(&cfg, &d, &s, rho, rate, theta);
        total += 1;
        if o.n_ec == o.n_ms {
            agree += 1;
        } else {
            println!(
                "seed {seed}: ec*={} ms*={} (center {center:.1} mu {mu_db:.2} rho {rho:.2} \
                 r {rate:.2} theta {theta:.2} NT {n_t})",
                o.n_ec, o.n_ms
            );
        }
        if o.n_ec > cfg.n_ues && o.n_ec < cfg.blocklength - 1 {
            interior += 1;
        }
    }
    println!("width {width}: agreement {agree}/{total}, interior argmax {interior}/{total}");
}

fn fig2a_fine() {
    let s = vec![1.0; 12];
    println!("d_hi  mu_db |   N*    sum(N*)    #min  contrast   ec*  ms*");
    for d_hi in [53.0, 54.0, 55.0, 56.0, 57.0] {
        for mu_db in [-3.2, -3.0, -2.8] {
            let mut cfg = SystemConfig::baseline();
            cfg.pathloss_const = db_to_linear(mu_db);
            let d = spread(&cfg, 35.0, d_hi);
            let o = scan(&cfg, &d, &s, 0.5, 0.2, 0.2);
            println!(
                "{d_hi:4}  {mu_db:+5.1} | {:4}  {:.3e}  {:3}  {:.2e}  {:4} {:4}",
                o.n_eps, o.v_eps, o.minima, o.contrast, o.n_ec, o.n_ms
            );
        }
    }
}

fn fig2bc_probe() {
    let s = vec![1.0; 12];
    for mu_db in [-2.5, -2.0, -1.5, -1.0, 0.0] {
        let mut cfg = SystemConfig::baseline();
        cfg.pathloss_const = db_to_linear(mu_db);
        cfg = cfg.with_frame(1e6, 0.5e-3);
        let d = spread(&cfg, 35.0, 55.0);
        let t0 = std::time::Instant::now();
        match optim::odisc(&cfg, &d, &s, 0.2, 0.2, (1e-6, 2.0), 1e-5, 1e-5, 100) {
            Ok(sol) => println!(
                "mu {mu_db:+.1}: theta* {:.6} rho* {:.4} iters {} N* {} ({:.1?})",
                sol.ratio,
                sol.rho_star,
                sol.iterations,
                sol.n_lop_star,
                t0.elapsed()
            ),
            Err(e) => println!("mu {mu_db:+.1}: odisc error {e}"),
        }
    }
}

fn fig5_probe() {
    use tailbound::channel::{derive_large_scale, fit_all_gamma};
    use tailbound::snc::{ub_sdvp_inf, ServiceModel};
    let s = vec![1.0; 12];
    let n_lop = 70;
    println!("NT  mu_db | argmin_eps  bound(argmin)  bound(1e-4)  bound(0.2)  stable_frac");
    for n_t in [13usize] {
        for mu_db in [-11.0] {
            let mut cfg = SystemConfig::baseline().with_antennas(n_t).with_frame(1e6, 0.5e-3);
            cfg.pathloss_const = db_to_linear(mu_db);
            cfg = cfg.with_pilot_len(n_lop);
            let d = spread(&cfg, 35.0, 53.0);
            let ls = derive_large_scale(&cfg, &d, &s).unwrap();
            let models = fit_all_gamma(&cfg, &ls).unwrap();
            let r_cu = cfg.blocklength - n_lop;
            // Worst UE has the weakest mean SINR: the last in the spread.
            let worst = models[11];
            let grid: Vec<f64> = (0..40)
                .map(|i| 10f64.powf(-4.0 + 3.301 * i as f64 / 39.0))
                .collect();
            let mut best = (f64::NAN, f64::INFINITY);
            let mut lo_v = f64::NAN;
            let mut hi_v = f64::NAN;
            let mut stable = 0;
            for (i, &eps) in grid.iter().enumerate() {
                let svc = match ServiceModel::fixed_epsilon(worst, eps, r_cu) {
                    Ok(s) => s,
                    Err(_) => continue,
                };
                match ub_sdvp_inf(&svc, 40.0, 10) {
                    Ok(b) => {
                        if b.stable {
                            stable += 1;
                        }
                        println!("  eps {eps:.5}  bound {:.4e}  stable {}", b.value, b.stable);
                        if b.value < best.1 {
                            best = (eps, b.value);
                        }
                        if i == 0 {
                            lo_v = b.value;
                        }
                        if i == 39 {
                            hi_v = b.value;
                        }
                    }
                    Err(e) => println!("  eps {eps:.4}: {e}"),
                }
            }
            println!(
                "{n_t:3}  {mu_db:+6.2} | {:.4}  {:.3e}  {:.3e}  {:.3e}  {}/40",
                best.0, best.1, lo_v, hi_v, stable
            );
        }
    }
}


fn fig6_probe() {
    use rand_distr::{Distribution, StandardNormal};
    use tailbound::channel::{derive_large_scale, fit_all_gamma};
    use tailbound::rng::{substream, Purpose};
    use tailbound::snc::{ub_sdvp_inf, ServiceModel};
    // One fixed 6 dB lognormal shadow draw shared by every cell.
    let master: u64 = std::env::args().nth(2).map(|v| v.parse().unwrap()).unwrap_or(77);
    let mut s = Vec::with_capacity(12);
    for ue in 0..12u64 {
        let mut rng = substream(master, Purpose::Placement, ue, 0);
        let z: f64 = StandardNormal.sample(&mut rng);
        s.push(10f64.powf(6.0 * z / 10.0));
    }
    println!("shadows: {:?}", s.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>());
    print!("mu_db \\ NT |");
    let nts = [16usize, 24, 32, 40, 56, 72, 88, 104];
    for n_t in nts {
        print!(" {n_t:9}");
    }
    println!();
    for mu_db in [6.0, 3.0, 0.0, -3.0] {
        print!("{mu_db:+6.1}     |");
        for n_t in nts {
            let mut cfg = SystemConfig::baseline().with_antennas(n_t).with_frame(1e6, 0.5e-3);
            cfg.pathloss_const = db_to_linear(mu_db);
            cfg = cfg.with_pilot_len(70);
            let d = spread(&cfg, 35.0, 53.0);
            let ls = derive_large_scale(&cfg, &d, &s).unwrap();
            let models = fit_all_gamma(&cfg, &ls).unwrap();
            let r_cu = cfg.blocklength - 70;
            // Weakest mean SINR decides the plotted queue.
            let worst = models
                .iter()
                .copied()
                .min_by(|a, b| a.mean().partial_cmp(&b.mean()).unwrap())
                .unwrap();
            let svc = ServiceModel::fixed_epsilon(worst, 1e-6, r_cu).unwrap();
            let b = ub_sdvp_inf(&svc, 40.0, 10).unwrap();
            print!(" {:9.2e}", b.value);
        }
        println!();
    }
}


fn queue_probe() {
    use tailbound::mc::{simulate_queue, violation_frequency};
    use tailbound::snc::{ub_sdvp_inf, ServiceModel};
    for (lam, rate, ep, r_cu, d_th) in [
        (40.0, 0.275, 0.1, 200usize, 3usize),
        (40.0, 0.275, 0.1, 200, 4),
        (40.0, 0.275, 0.1, 200, 6),
        (44.0, 0.275, 0.1, 200, 3),
        (36.0, 0.275, 0.1, 200, 3),
        (40.0, 0.275, 0.02, 200, 2),
        (50.0, 0.275, 0.02, 200, 2),
    ] {
        let svc = ServiceModel::fixed_rate(rate, ep, r_cu).unwrap();
        let b = ub_sdvp_inf(&svc, lam, d_th).unwrap();
        let mut line = format!(
            "lam={lam} ep={ep} d={d_th} bound={:.3e} stable={} theta*={:.4}",
            b.value, b.stable, b.theta
        );
        for seed in [5u64, 17, 29] {
            let tr = simulate_queue(lam, &svc, 100_000, seed).unwrap();
            let est = violation_frequency(&tr, d_th).unwrap();
            line.push_str(&format!("  s{seed}:{}/{:.3e}", est.violations, est.frequency));
        }
        println!("{line}");
    }
}


fn qmono_probe() {
    use tailbound::fbc;
    use tailbound::num::q_func;
    use tailbound::rng::{substream, Purpose};
    use rand::Rng;
    for t in 0..20u64 {
        let mut rng = substream(1, Purpose::Scratch, 7700 + t, 0);
        let r = rng.gen_range(0.1..2.0);
        let r_cu: usize = rng.gen_range(100..=500);
        let mid = 2f64.powf(r) - 1.0;
        let mut lo = mid;
        let mut hi = mid;
        for _ in 0..3 {
            let s_lo = (fbc::dispersion(lo) / r_cu as f64).sqrt();
            lo = (2f64.powf(r - 6.0 * s_lo) - 1.0).max(0.15 * mid);
            let s_hi = (fbc::dispersion(hi) / r_cu as f64).sqrt();
            hi = 2f64.powf(r + 25.0 * s_hi) - 1.0;
        }
        let n = 1000usize;
        let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
        let mut prev = f64::INFINITY;
        let mut bad = 0;
        for i in 0..n {
            let gamma = lo * ratio.powi(i as i32);
            let ep = fbc::decoding_ep(gamma, r, r_cu).unwrap();
            if !(ep < prev) && bad < 3 {
                let arg = (r_cu as f64 / fbc::dispersion(gamma)).sqrt() * (fbc::capacity(gamma) - r);
                println!("t {t} r {r:.4} rcu {r_cu} i {i} gamma {gamma:.8} arg {arg:.10} prev {prev:.17e} ep {ep:.17e}");
                bad += 1;
            }
            prev = ep;
        }
    }
    println!("--- dense q_func scan for local inversions ---");
    let mut prev = f64::INFINITY;
    let mut count = 0;
    for i in 0..2_000_000 {
        let x = -8.0 + 16.0 * i as f64 / 2_000_000f64;
        let q = q_func(x);
        if !(q < prev) && count < 10 {
            println!("q_func tie/inversion at x {x:.9}: prev {prev:.17e} q {q:.17e}");
            count += 1;
        }
        prev = q;
    }
    println!("scan done, {count} shown");
}

fn main() {
    let what = std::env::args().nth(1).unwrap_or_else(|| "curves".into());
    match what.as_str() {
        "curves" => {
            let cfg = small_config();
            let d = spread(&cfg, cfg.d_min_m, cfg.d_max_m);
            let s = vec![1.0; cfg.n_ues];
            let lo = cfg.n_ues;
            let hi = cfg.blocklength - 1;
            println!("N  sumEps  sumEpEc  sumInvMgf");
            for n in lo..=hi {
                let se = optim::pilot_objective(&cfg, &d, &s, 0.5, 0.2, n).unwrap();
                let ec = optim::sum_ep_ec(&cfg, &d, &s, 0.5, 0.2, 0.2, n).unwrap();
                let ms = optim::sum_service_inv_mgf(&cfg, &d, &s, 0.5, 0.2, 0.2, n).unwrap();
                println!("{n:3}  {se:.6e}  {ec:.6e}  {ms:.6e}");
            }
        }
        "fig2a" => fig2a_grid(),
        "fig3" => fig3_grid(),
        "fig3b" => fig3_straggler_grid(),
        "fig2afine" => fig2a_fine(),
        "fig2bc" => fig2bc_probe(),
        "fig5" => fig5_probe(),
        "fig6" => fig6_probe(),
        "queue" => queue_probe(),
        "qmono" => qmono_probe(),
        "crit6" => crit6_agreement(std::env::args().nth(2).and_then(|v| v.parse().ok()).unwrap_or(4.0)),
        other => eprintln!("unknown probe {other}"),
    }
}
