//! System-level parameters shared by every module.

use crate::error::{Error, Result};

/// Static description of the uplink: array geometry, frame split, power
/// model, and large-scale propagation constants. All powers are linear
/// watts and all gains are linear ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Base-station antennas N_T.
    pub n_antennas: usize,
    /// Simultaneously scheduled UEs M.
    pub n_ues: usize,
    /// Bandwidth B in Hz.
    pub bandwidth_hz: f64,
    /// Slot (transmission epoch) duration t_DE in seconds.
    pub slot_duration_s: f64,
    /// Channel uses per slot, N_CU = B * t_DE.
    pub blocklength: usize,
    /// Channel uses spent on pilots, N_LoP.
    pub pilot_len: usize,
    /// Per-UE transmit power rho in W.
    pub tx_power_w: f64,
    /// Path loss at the reference distance d_min, linear.
    pub pathloss_const: f64,
    /// Path loss exponent alpha_0.
    pub pathloss_exp: f64,
    /// Closest UE distance in m.
    pub d_min_m: f64,
    /// Farthest UE distance in m.
    pub d_max_m: f64,
    /// Log-normal shadow standard deviation in dB, 0 disables shadowing.
    pub shadow_sigma_db: f64,
    /// Static circuit power P_c in W.
    pub circuit_power_w: f64,
    /// Power amplifier efficiency phi in (0, 1].
    pub amp_efficiency: f64,
    /// Transmit power ceiling P_max in W.
    pub max_tx_power_w: f64,
}

impl SystemConfig {
    /// Reference parameter set used by the stock scenarios: a 480 kHz
    /// carrier with 0.5 ms slots (240 channel uses), 12 UEs between
    /// 35 m and 95 m, and a 0.5 W / 2 W power model.
    pub fn baseline() -> Self {
        let bandwidth_hz = 480e3;
        let slot_duration_s = 0.5e-3;
        SystemConfig {
            n_antennas: 50,
            n_ues: 12,
            bandwidth_hz,
            slot_duration_s,
            blocklength: blocklength_of(bandwidth_hz, slot_duration_s),
            pilot_len: 70,
            tx_power_w: 0.5,
            pathloss_const: db_to_linear(-12.0),
            pathloss_exp: 2.5,
            d_min_m: 35.0,
            d_max_m: 95.0,
            shadow_sigma_db: 0.0,
            circuit_power_w: 0.5,
            amp_efficiency: 0.5,
            max_tx_power_w: 2.0,
        }
    }

    /// Channel uses left for data, R_CU = N_CU - N_LoP.
    pub fn data_len(&self) -> usize {
        self.blocklength - self.pilot_len
    }

    pub fn with_pilot_len(mut self, n_lop: usize) -> Self {
        self.pilot_len = n_lop;
        self
    }

    pub fn with_tx_power(mut self, rho_w: f64) -> Self {
        self.tx_power_w = rho_w;
        self
    }

    pub fn with_antennas(mut self, n_t: usize) -> Self {
        self.n_antennas = n_t;
        self
    }

    /// Sets bandwidth and slot duration together, recomputing the
    /// blocklength so the frame stays consistent.
    pub fn with_frame(mut self, bandwidth_hz: f64, slot_duration_s: f64) -> Self {
        self.bandwidth_hz = bandwidth_hz;
        self.slot_duration_s = slot_duration_s;
        self.blocklength = blocklength_of(bandwidth_hz, slot_duration_s);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ues < 1 {
            return Err(Error::Config("need at least one UE".into()));
        }
        if self.n_antennas < self.n_ues {
            return Err(Error::Config(format!(
                "n_antennas ({}) must be at least n_ues ({})",
                self.n_antennas, self.n_ues
            )));
        }
        if !(self.bandwidth_hz > 0.0) || !(self.slot_duration_s > 0.0) {
            return Err(Error::Config("bandwidth and slot duration must be positive".into()));
        }
        if self.blocklength < 2 {
            return Err(Error::Config("blocklength must be at least 2".into()));
        }
        if self.pilot_len < self.n_ues {
            return Err(Error::Config(format!(
                "pilot_len ({}) must be at least n_ues ({})",
                self.pilot_len, self.n_ues
            )));
        }
        if self.pilot_len > self.blocklength - 1 {
            return Err(Error::Config(format!(
                "pilot_len ({}) must leave at least one data channel use of {}",
                self.pilot_len, self.blocklength
            )));
        }
        if !(self.tx_power_w > 0.0) {
            return Err(Error::Config("tx_power_w must be positive".into()));
        }
        if !(self.pathloss_const > 0.0) || !(self.pathloss_exp > 0.0) {
            return Err(Error::Config("path loss constants must be positive".into()));
        }
        if !(self.d_min_m > 0.0) || !(self.d_min_m <= self.d_max_m) {
            return Err(Error::Config("need 0 < d_min_m <= d_max_m".into()));
        }
        if self.shadow_sigma_db < 0.0 {
            return Err(Error::Config("shadow_sigma_db must be non-negative".into()));
        }
        if self.circuit_power_w < 0.0 {
            return Err(Error::Config("circuit_power_w must be non-negative".into()));
        }
        if !(self.amp_efficiency > 0.0 && self.amp_efficiency <= 1.0) {
            return Err(Error::Config("amp_efficiency must lie in (0, 1]".into()));
        }
        if !(self.max_tx_power_w > 0.0) {
            return Err(Error::Config("max_tx_power_w must be positive".into()));
        }
        Ok(())
    }
}

/// Channel uses per slot for a bandwidth/duration pair.
pub fn blocklength_of(bandwidth_hz: f64, slot_duration_s: f64) -> usize {
    (bandwidth_hz * slot_duration_s).round() as usize
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
