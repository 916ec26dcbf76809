//! Simulation configuration, loadable from a TOML key/value file.

use serde::{Deserialize, Serialize};

use crate::beamforming::{BfArchitecture, Codebook};
use crate::channel::ChannelParams;
use crate::controller::SelectionPolicy;
use crate::deployment::SimArea;
use crate::error::{Error, Result};
use crate::measurement::{noise_floor_dbm, LinkBudget, MemoryCap, SweepSettings, VarianceDomain};
use crate::scalar::Real;

/// The shipped default configuration file.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../../../../default.config");

/// Tolerance on `phi_ov == t_sig_s / t_per_s`.
pub const OVERHEAD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Real"))]
pub struct SimConfig<T> {
    /// Total system bandwidth, Hz.
    pub w_tot_hz: T,
    pub p_tx_dbm: T,
    /// Receiver noise figure, dB.
    pub nf_db: T,
    /// Carrier frequency, Hz.
    pub f_c_hz: T,
    /// Detection threshold, dB.
    pub tau_db: T,
    /// `[rows, cols]` of the SCell planar array.
    pub bs_array: [usize; 2],
    pub ue_array: [usize; 2],
    pub n_bs_dirs: usize,
    pub n_ue_dirs: usize,
    /// Element pitch in wavelengths.
    pub element_spacing: T,
    /// Density grid, SCells per km^2.
    pub lambda_bs: Vec<T>,
    pub area: SimArea<T>,
    /// Sounding signal duration, s.
    pub t_sig_s: T,
    /// Duration the detection threshold is referenced to, s.
    pub t_ref_s: T,
    /// Sounding overhead; must equal `t_sig_s / t_per_s`.
    pub phi_ov: T,
    /// Sounding period, s.
    pub t_per_s: T,
    /// Extra signal durations for the available-cells curves, s.
    pub t_sig_grid: Vec<T>,
    pub n_trials: usize,
    pub seed: u64,
    pub sweeps_per_trial: usize,
    /// Report-table history length; 0 keeps every sample.
    pub memory_cap: MemoryCap,
    pub variance_domain: VarianceDomain,
    pub bs_architecture: BfArchitecture,
    pub refresh_fading: bool,
    pub channel: ChannelParams<T>,
    pub policy: SelectionPolicy<T>,
}

impl<T: Real> Default for SimConfig<T> {
    fn default() -> Self {
        Self {
            w_tot_hz: T::lit(1e9),
            p_tx_dbm: T::lit(30.0),
            nf_db: T::lit(5.0),
            f_c_hz: T::lit(28e9),
            tau_db: T::lit(-5.0),
            bs_array: [8, 8],
            ue_array: [4, 4],
            n_bs_dirs: 16,
            n_ue_dirs: 8,
            element_spacing: T::lit(0.5),
            lambda_bs: [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0]
                .map(T::lit)
                .to_vec(),
            area: SimArea::default(),
            t_sig_s: T::lit(10e-6),
            t_ref_s: T::lit(10e-6),
            phi_ov: T::lit(0.05),
            t_per_s: T::lit(200e-6),
            t_sig_grid: vec![T::lit(10e-6), T::lit(100e-6)],
            n_trials: 500,
            seed: 1,
            sweeps_per_trial: 10,
            memory_cap: MemoryCap::Bounded(10),
            variance_domain: VarianceDomain::Db,
            bs_architecture: BfArchitecture::Analog,
            refresh_fading: true,
            channel: ChannelParams::default(),
            policy: SelectionPolicy::MaxSinr,
        }
    }
}

fn positive<T: Real>(key: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(
            key,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn finite<T: Real>(key: &str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, "must be finite"))
    }
}

fn at_least_one(key: &str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(Error::config(key, "must be >= 1"))
    }
}

/// Finds the key on the line a TOML error points at.
fn key_at(source: &str, offset: usize) -> Option<String> {
    let start = source[..offset.min(source.len())]
        .rfind('\n')
        .map_or(0, |i| i + 1);
    let line = source[start..].lines().next()?.trim();
    if let Some((key, _)) = line.split_once('=') {
        return Some(key.trim().trim_matches('"').to_string());
    }
    line.strip_prefix('[')
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim().to_string())
}

/// Pulls the field name out of a serde "unknown field `x`" / "missing
/// field `x`" message.
fn key_in_message(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let end = start + message[start..].find('`')?;
    Some(message[start..end].to_string())
}

impl<T: Real> SimConfig<T> {
    /// Parses and validates a TOML document. Keys missing from the document
    /// keep their defaults.
    pub fn from_toml_str(source: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(source).map_err(|e| {
            let message = e.message().trim().to_string();
            let key = key_in_message(&message)
                .or_else(|| e.span().and_then(|s| key_at(source, s.start)))
                .unwrap_or_else(|| "<document>".to_string());
            Error::config(key, message)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        positive("w_tot_hz", self.w_tot_hz)?;
        finite("p_tx_dbm", self.p_tx_dbm)?;
        finite("nf_db", self.nf_db)?;
        positive("f_c_hz", self.f_c_hz)?;
        finite("tau_db", self.tau_db)?;
        at_least_one("bs_array", self.bs_array[0].min(self.bs_array[1]))?;
        at_least_one("ue_array", self.ue_array[0].min(self.ue_array[1]))?;
        at_least_one("n_bs_dirs", self.n_bs_dirs)?;
        at_least_one("n_ue_dirs", self.n_ue_dirs)?;
        positive("element_spacing", self.element_spacing)?;
        if self.lambda_bs.is_empty() {
            return Err(Error::config("lambda_bs", "density grid is empty"));
        }
        if let Some(bad) = self
            .lambda_bs
            .iter()
            .find(|l| !(**l >= T::zero() && l.is_finite()))
        {
            return Err(Error::config(
                "lambda_bs",
                format!("density {bad} must be finite and >= 0"),
            ));
        }
        self.area
            .validate()
            .map_err(|e| Error::config("area", e.to_string()))?;
        positive("t_sig_s", self.t_sig_s)?;
        positive("t_ref_s", self.t_ref_s)?;
        positive("t_per_s", self.t_per_s)?;
        if self.t_sig_s > self.t_per_s {
            return Err(Error::config("t_sig_s", "must not exceed t_per_s"));
        }
        let ratio = self.t_sig_s / self.t_per_s;
        if (self.phi_ov - ratio).abs() > T::lit(OVERHEAD_TOLERANCE) {
            return Err(Error::config(
                "phi_ov",
                format!(
                    "{} is inconsistent with t_sig_s / t_per_s = {ratio}",
                    self.phi_ov
                ),
            ));
        }
        for t in &self.t_sig_grid {
            positive("t_sig_grid", *t)?;
        }
        at_least_one("n_trials", self.n_trials)?;
        at_least_one("sweeps_per_trial", self.sweeps_per_trial)?;
        self.channel.validate()?;
        self.policy.validate()?;
        Ok(())
    }

    pub fn noise_dbm(&self) -> T {
        noise_floor_dbm(self.w_tot_hz, self.nf_db)
    }

    pub fn link_budget(&self, t_sig_s: T) -> LinkBudget<T> {
        LinkBudget {
            p_tx_dbm: self.p_tx_dbm,
            noise_dbm: self.noise_dbm(),
            t_sig_s,
            t_ref_s: self.t_ref_s,
            tau_db: self.tau_db,
        }
    }

    pub fn sweep_settings(&self, t_sig_s: T) -> SweepSettings<T> {
        SweepSettings {
            budget: self.link_budget(t_sig_s),
            memory_cap: self.memory_cap,
            variance_domain: self.variance_domain,
            bs_architecture: self.bs_architecture,
            refresh_fading: self.refresh_fading,
        }
    }

    pub fn ue_codebook(&self) -> Result<Codebook<T>> {
        Codebook::with_spacing(
            self.ue_array[0],
            self.ue_array[1],
            self.n_ue_dirs,
            self.element_spacing,
        )
    }

    pub fn bs_codebook(&self) -> Result<Codebook<T>> {
        Codebook::with_spacing(
            self.bs_array[0],
            self.bs_array[1],
            self.n_bs_dirs,
            self.element_spacing,
        )
    }

    /// `t_sig_s` followed by the grid values not equal to it.
    pub fn signal_durations(&self) -> Vec<T> {
        let mut out = vec![self.t_sig_s];
        for t in &self.t_sig_grid {
            if !out.contains(t) {
                out.push(*t);
            }
        }
        out
    }
}
