//! Run descriptions: frozen recipes and flat config files.

use std::collections::{HashMap, HashSet};

use tailbound::channel::equal_spacing;
use tailbound::config::{db_to_linear, SystemConfig};
use tailbound::scenarios::{random_distances, seeded_shadows, Preset, Sweep};

/// Sweepable axes, in the spelling both config files and recipes use.
pub const AXES: [&str; 9] = [
    "pilot",
    "power",
    "antennas",
    "bandwidth_khz",
    "eps",
    "delay_ms",
    "rate",
    "theta",
    "arrival",
];

/// Everything one run needs: the channel geometry, the service knobs,
/// which optimizers are on, and the sweep to drive through them.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub cfg: SystemConfig,
    pub distances: Vec<f64>,
    pub shadows: Vec<f64>,
    pub rate: f64,
    pub theta: f64,
    pub arrival_rate: f64,
    pub d_th_slots: usize,
    pub target_ep: Option<f64>,
    pub inf_theta: bool,
    pub optimize_pilot: bool,
    pub run_odisc: bool,
    pub sweep: Sweep,
    pub seed: u64,
    pub power_bounds: (f64, f64),
    pub eps1: f64,
    pub eps2: f64,
    pub max_iter: usize,
}

impl Scenario {
    pub fn from_preset(p: Preset) -> Self {
        let power_bounds = (0.02, p.cfg.max_tx_power_w);
        Scenario {
            name: p.name.to_string(),
            cfg: p.cfg,
            distances: p.distances,
            shadows: p.shadows,
            rate: p.rate,
            theta: p.theta,
            arrival_rate: p.arrival_rate,
            d_th_slots: p.d_th_slots,
            target_ep: p.target_ep,
            inf_theta: p.inf_theta,
            optimize_pilot: p.optimize_pilot,
            run_odisc: p.run_odisc,
            sweep: p.sweep,
            seed: p.seed,
            power_bounds,
            eps1: 1e-5,
            eps2: 1e-5,
            max_iter: 100,
        }
    }
}

/// key=value lines with # comments. Keys are consumed by the typed
/// getters; anything left over is a typo and rejected by name.
struct Raw {
    order: Vec<String>,
    map: HashMap<String, String>,
    used: HashSet<String>,
}

impl Raw {
    fn parse(text: &str) -> Result<Raw, String> {
        let mut order = Vec::new();
        let mut map = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value, got `{line}`", idx + 1))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if map.insert(key.clone(), value).is_some() {
                return Err(format!("duplicate key `{key}`"));
            }
            order.push(key);
        }
        Ok(Raw { order, map, used: HashSet::new() })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.map.get(key).cloned()
    }

    fn f64_opt(&mut self, key: &str) -> Result<Option<f64>, String> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| format!("key `{key}`: `{v}` is not a number")),
        }
    }

    fn usize_opt(&mut self, key: &str) -> Result<Option<usize>, String> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| format!("key `{key}`: `{v}` is not a whole number")),
        }
    }

    fn u64_opt(&mut self, key: &str) -> Result<Option<u64>, String> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|_| format!("key `{key}`: `{v}` is not a whole number")),
        }
    }

    fn bool_opt(&mut self, key: &str) -> Result<Option<bool>, String> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => match v.as_str() {
                "true" | "yes" | "on" | "1" => Ok(Some(true)),
                "false" | "no" | "off" | "0" => Ok(Some(false)),
                other => Err(format!("key `{key}`: `{other}` is not a boolean")),
            },
        }
    }

    fn require(&mut self, key: &str) -> Result<String, String> {
        self.take(key).ok_or_else(|| format!("missing required key `{key}`"))
    }

    /// Errors on the first key (in file order) no getter asked for.
    fn finish(&self) -> Result<(), String> {
        for key in &self.order {
            if !self.used.contains(key) {
                return Err(format!("unknown key `{key}`"));
            }
        }
        Ok(())
    }
}

/// Builds a scenario from a flat config file. Unset keys fall back to
/// the stock urban macro-cell parameters.
pub fn parse_config(text: &str, name: &str, seed_override: Option<u64>) -> Result<Scenario, String> {
    let mut raw = Raw::parse(text)?;
    let seed = match seed_override {
        Some(s) => {
            raw.take("seed");
            s
        }
        None => raw.u64_opt("seed")?.unwrap_or(1),
    };

    let mut cfg = SystemConfig::baseline();
    if let Some(v) = raw.usize_opt("antennas")? {
        cfg.n_antennas = v;
    }
    if let Some(v) = raw.usize_opt("ues")? {
        cfg.n_ues = v;
    }
    let bw_khz = raw.f64_opt("bandwidth_khz")?.unwrap_or(cfg.bandwidth_hz / 1e3);
    let slot_ms = raw.f64_opt("slot_ms")?.unwrap_or(cfg.slot_duration_s * 1e3);
    if !(bw_khz > 0.0) || !(slot_ms > 0.0) {
        return Err("bandwidth_khz and slot_ms must be positive".into());
    }
    cfg = cfg.with_frame(bw_khz * 1e3, slot_ms * 1e-3);
    if let Some(v) = raw.usize_opt("pilot")? {
        cfg.pilot_len = v;
    }
    if let Some(v) = raw.f64_opt("power")? {
        cfg.tx_power_w = v;
    }
    if let Some(v) = raw.f64_opt("mu_cp_db")? {
        cfg.pathloss_const = db_to_linear(v);
    }
    if let Some(v) = raw.f64_opt("alpha0")? {
        cfg.pathloss_exp = v;
    }
    if let Some(v) = raw.f64_opt("d_min")? {
        cfg.d_min_m = v;
    }
    if let Some(v) = raw.f64_opt("d_max")? {
        cfg.d_max_m = v;
    }
    if let Some(v) = raw.f64_opt("shadow_sigma_db")? {
        cfg.shadow_sigma_db = v;
    }
    if let Some(v) = raw.f64_opt("circuit_power")? {
        cfg.circuit_power_w = v;
    }
    if let Some(v) = raw.f64_opt("amp_efficiency")? {
        cfg.amp_efficiency = v;
    }
    if let Some(v) = raw.f64_opt("max_power")? {
        cfg.max_tx_power_w = v;
    }
    cfg.validate().map_err(|e| e.to_string())?;

    let rate = raw.f64_opt("rate")?.unwrap_or(0.2);
    if !(rate > 0.0) {
        return Err(format!("rate must be positive, got {rate}"));
    }
    let theta = raw.f64_opt("theta")?.unwrap_or(0.2);
    if !(theta > 0.0) {
        return Err(format!("theta must be positive, got {theta}"));
    }
    let arrival_rate = raw.f64_opt("arrival")?.unwrap_or(40.0);
    if !(arrival_rate >= 0.0) {
        return Err(format!("arrival must be nonnegative, got {arrival_rate}"));
    }
    let delay_ms = raw.f64_opt("delay_ms")?.unwrap_or(5.0);
    let slots = (delay_ms / slot_ms).floor();
    if slots < 1.0 {
        return Err(format!("delay_ms {delay_ms} is shorter than one {slot_ms} ms slot"));
    }
    let d_th_slots = slots as usize;
    let target_ep = raw.f64_opt("eps")?;
    if let Some(e) = target_ep {
        if !(e > 0.0 && e < 0.5) {
            return Err(format!("eps must lie in (0, 0.5), got {e}"));
        }
    }

    let placement = raw.take("placement").unwrap_or_else(|| "equal".into());
    let distances = match placement.as_str() {
        "equal" => equal_spacing(&cfg),
        "random" => random_distances(&cfg, seed),
        other => return Err(format!("placement must be equal or random, got `{other}`")),
    };
    let shadows = seeded_shadows(&cfg, seed);

    let optimize_pilot = raw.bool_opt("optimize_pilot")?.unwrap_or(false);
    let run_odisc = raw.bool_opt("odisc")?.unwrap_or(false);
    let inf_theta = raw.bool_opt("inf_theta")?.unwrap_or(false);
    let power_min = raw.f64_opt("power_min")?.unwrap_or(0.02);
    if !(power_min > 0.0 && power_min < cfg.max_tx_power_w) {
        return Err(format!(
            "power_min must lie in (0, {}), got {power_min}",
            cfg.max_tx_power_w
        ));
    }
    let eps1 = raw.f64_opt("eps1")?.unwrap_or(1e-5);
    let eps2 = raw.f64_opt("eps2")?.unwrap_or(1e-5);
    if !(eps1 > 0.0) || !(eps2 > 0.0) {
        return Err("eps1 and eps2 must be positive".into());
    }
    let max_iter = raw.usize_opt("max_iter")?.unwrap_or(100);
    if max_iter == 0 {
        return Err("max_iter must be at least 1".into());
    }

    let sweep = parse_sweep(&raw.require("sweep")?)?;
    raw.finish()?;

    Ok(Scenario {
        name: name.to_string(),
        power_bounds: (power_min, cfg.max_tx_power_w),
        cfg,
        distances,
        shadows,
        rate,
        theta,
        arrival_rate,
        d_th_slots,
        target_ep,
        inf_theta,
        optimize_pilot,
        run_odisc,
        sweep,
        seed,
        eps1,
        eps2,
        max_iter,
    })
}

/// axis:start:stop:step for a linear grid, or
/// axis:start:stop:points:geometric for a ratio-spaced one.
fn parse_sweep(spec: &str) -> Result<Sweep, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let axis = *parts.first().unwrap_or(&"");
    if !AXES.contains(&axis) {
        return Err(format!(
            "unknown sweep axis `{axis}`; expected one of {}",
            AXES.join(", ")
        ));
    }
    let num = |s: &str, what: &str| -> Result<f64, String> {
        s.parse::<f64>()
            .map_err(|_| format!("sweep {what} `{s}` is not a number"))
    };
    match parts.len() {
        4 => {
            let start = num(parts[1], "start")?;
            let stop = num(parts[2], "stop")?;
            let step = num(parts[3], "step")?;
            if !(step > 0.0) {
                return Err(format!("sweep step must be positive, got {step}"));
            }
            if stop < start {
                return Err(format!("sweep stop {stop} precedes start {start}"));
            }
            Ok(Sweep::linear(axis, start, stop, step))
        }
        5 if parts[4] == "geometric" => {
            let start = num(parts[1], "start")?;
            let stop = num(parts[2], "stop")?;
            let points: usize = parts[3]
                .parse()
                .map_err(|_| format!("sweep points `{}` is not a whole number", parts[3]))?;
            if !(start > 0.0 && stop > start) {
                return Err(format!(
                    "geometric sweep needs 0 < start < stop, got {start}..{stop}"
                ));
            }
            if points < 2 {
                return Err(format!("geometric sweep needs at least 2 points, got {points}"));
            }
            Ok(Sweep::geometric(axis, start, stop, points))
        }
        _ => Err(format!(
            "sweep must be axis:start:stop:step or axis:start:stop:points:geometric, got `{spec}`"
        )),
    }
}
