//! Per-link propagation: three-state (LOS / NLOS / outage) classification,
//! log-distance pathloss with log-normal shadowing and a clustered
//! multipath structure synthesised from many subpaths.
//!
//! Defaults follow the 28 GHz dense-urban measurement line of work:
//!
//! | state | alpha (dB) | beta | sigma (dB) |
//! |-------|-----------:|-----:|-----------:|
//! | LOS   | 61.4       | 2.0  | 5.8        |
//! | NLOS  | 72.0       | 2.92 | 8.7        |
//!
//! with `p_out(d) = max(0, 1 - exp(-a_out*d + b_out))` and
//! `p_los(d) = (1 - p_out(d)) * exp(-a_los*d)`, `a_los = 1/67.1`,
//! `a_out = 1/30`, `b_out = 5.2`.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::beamforming::Codebook;
use crate::deployment::{distance_m, Point, Scell};
use crate::error::{Error, Result};
use crate::scalar::Real;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Shortest link distance used for propagation; co-located nodes are
/// placed this far apart.
pub const MIN_LINK_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LinkState {
    Los,
    Nlos,
    Outage,
}

/// Log-distance pathloss coefficients for one link state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateParams<T> {
    pub alpha_db: T,
    pub beta: T,
    pub sigma_db: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Real"))]
pub struct PathlossParams<T> {
    pub los: StateParams<T>,
    pub nlos: StateParams<T>,
    /// LOS decay rate, 1/m.
    pub a_los: T,
    /// Outage growth rate, 1/m.
    pub a_out: T,
    pub b_out: T,
}

impl<T: Real> Default for PathlossParams<T> {
    fn default() -> Self {
        Self {
            los: StateParams {
                alpha_db: T::lit(61.4),
                beta: T::lit(2.0),
                sigma_db: T::lit(5.8),
            },
            nlos: StateParams {
                alpha_db: T::lit(72.0),
                beta: T::lit(2.92),
                sigma_db: T::lit(8.7),
            },
            a_los: T::lit(1.0 / 67.1),
            a_out: T::lit(1.0 / 30.0),
            b_out: T::lit(5.2),
        }
    }
}

impl<T: Real> PathlossParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("los", &self.los), ("nlos", &self.nlos)] {
            if !(s.beta > T::zero()) {
                return Err(Error::config(
                    format!("channel.pathloss.{name}.beta"),
                    "must be > 0",
                ));
            }
            if !(s.sigma_db >= T::zero()) {
                return Err(Error::config(
                    format!("channel.pathloss.{name}.sigma_db"),
                    "must be >= 0",
                ));
            }
            if !s.alpha_db.is_finite() {
                return Err(Error::config(
                    format!("channel.pathloss.{name}.alpha_db"),
                    "must be finite",
                ));
            }
        }
        if !(self.a_los >= T::zero()) {
            return Err(Error::config("channel.pathloss.a_los", "must be >= 0"));
        }
        if !(self.a_out >= T::zero()) {
            return Err(Error::config("channel.pathloss.a_out", "must be >= 0"));
        }
        if !self.b_out.is_finite() {
            return Err(Error::config("channel.pathloss.b_out", "must be finite"));
        }
        Ok(())
    }

    pub fn state(&self, state: LinkState) -> Option<&StateParams<T>> {
        match state {
            LinkState::Los => Some(&self.los),
            LinkState::Nlos => Some(&self.nlos),
            LinkState::Outage => None,
        }
    }

    /// `(p_los, p_nlos, p_out)` at distance `d` meters. The three values sum
    /// to one.
    pub fn state_probabilities(&self, d: T) -> (T, T, T) {
        let one = T::one();
        let p_out = (one - (-self.a_out * d + self.b_out).exp())
            .max(T::zero())
            .min(one);
        let p_los = ((one - p_out) * (-self.a_los * d).exp())
            .max(T::zero())
            .min(one - p_out);
        let p_nlos = one - p_out - p_los;
        (p_los, p_nlos, p_out)
    }
}

/// Draws the link state at distance `d` meters.
pub fn sample_link_state<T: Real, R: Rng + ?Sized>(
    d: T,
    params: &PathlossParams<T>,
    rng: &mut R,
) -> Result<LinkState> {
    if !(d > T::zero()) {
        return Err(Error::invalid("distance", "must be > 0"));
    }
    let (p_los, _, p_out) = params.state_probabilities(d);
    let u: f64 = rng.random();
    let p_out = p_out.to_f64_lossless();
    Ok(if u < p_out {
        LinkState::Outage
    } else if u < p_out + p_los.to_f64_lossless() {
        LinkState::Los
    } else {
        LinkState::Nlos
    })
}

/// Pathloss without shadowing, dB.
pub fn median_pathloss_db<T: Real>(
    d: T,
    state: LinkState,
    params: &PathlossParams<T>,
) -> Result<T> {
    let s = params.state(state).ok_or(Error::OutageLink)?;
    Ok(s.alpha_db + T::lit(10.0) * s.beta * d.log10())
}

/// `alpha + 10*beta*log10(d) + X`, `X ~ N(0, sigma^2)`.
pub fn pathloss_db<T: Real, R: Rng + ?Sized>(
    d: T,
    state: LinkState,
    params: &PathlossParams<T>,
    rng: &mut R,
) -> Result<T> {
    if !(d > T::zero()) {
        return Err(Error::invalid("distance", "must be > 0"));
    }
    let median = median_pathloss_db(d, state, params)?;
    let sigma = params.state(state).ok_or(Error::OutageLink)?.sigma_db;
    let x: f64 = StandardNormal.sample(rng);
    Ok(median + sigma * T::lit(x))
}

/// Friis free-space pathloss, dB.
pub fn free_space_pathloss_db<T: Real>(d: T, carrier_hz: T) -> T {
    let four_pi = T::lit(4.0) * T::PI();
    T::lit(20.0) * (four_pi * d * carrier_hz / T::lit(SPEED_OF_LIGHT)).log10()
}

/// Statistics of the cluster / subpath generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Real"))]
pub struct ClusterParams<T> {
    /// Mean of the Poisson cluster count (clamped to at least one).
    pub mean_clusters: T,
    /// Overrides the random cluster count when set.
    #[serde(default)]
    pub fixed_clusters: Option<usize>,
    pub subpaths_per_cluster: usize,
    /// Delay-spread exponent of the cluster power law.
    pub power_decay: T,
    /// Per-cluster power shadowing, dB.
    pub cluster_shadowing_db: T,
    pub bs_az_spread_deg: T,
    pub bs_el_spread_deg: T,
    pub ue_az_spread_deg: T,
    pub ue_el_spread_deg: T,
    /// Standard deviation of non-LOS cluster central elevations.
    pub central_el_spread_deg: T,
}

impl<T: Real> Default for ClusterParams<T> {
    fn default() -> Self {
        Self {
            mean_clusters: T::lit(1.9),
            fixed_clusters: None,
            subpaths_per_cluster: 20,
            power_decay: T::lit(2.8),
            cluster_shadowing_db: T::lit(4.0),
            bs_az_spread_deg: T::lit(10.2),
            bs_el_spread_deg: T::lit(3.0),
            ue_az_spread_deg: T::lit(15.5),
            ue_el_spread_deg: T::lit(6.0),
            central_el_spread_deg: T::lit(5.0),
        }
    }
}

impl<T: Real> ClusterParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_clusters >= T::zero()) {
            return Err(Error::config(
                "channel.clusters.mean_clusters",
                "must be >= 0",
            ));
        }
        if self.fixed_clusters == Some(0) {
            return Err(Error::config(
                "channel.clusters.fixed_clusters",
                "must be >= 1",
            ));
        }
        if self.subpaths_per_cluster == 0 {
            return Err(Error::config(
                "channel.clusters.subpaths_per_cluster",
                "must be >= 1",
            ));
        }
        for (key, v) in [
            ("power_decay", self.power_decay),
            ("cluster_shadowing_db", self.cluster_shadowing_db),
            ("bs_az_spread_deg", self.bs_az_spread_deg),
            ("bs_el_spread_deg", self.bs_el_spread_deg),
            ("ue_az_spread_deg", self.ue_az_spread_deg),
            ("ue_el_spread_deg", self.ue_el_spread_deg),
            ("central_el_spread_deg", self.central_el_spread_deg),
        ] {
            if !(v >= T::zero() && v.is_finite()) {
                return Err(Error::config(
                    format!("channel.clusters.{key}"),
                    "must be finite and >= 0",
                ));
            }
        }
        Ok(())
    }
}

/// Full channel configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Real"))]
pub struct ChannelParams<T> {
    pub pathloss: PathlossParams<T>,
    pub clusters: ClusterParams<T>,
}

impl<T: Real> Default for ChannelParams<T> {
    fn default() -> Self {
        Self {
            pathloss: PathlossParams::default(),
            clusters: ClusterParams::default(),
        }
    }
}

impl<T: Real> ChannelParams<T> {
    pub fn validate(&self) -> Result<()> {
        self.pathloss.validate()?;
        self.clusters.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subpath<T> {
    pub ue_az_offset: T,
    pub ue_el_offset: T,
    pub bs_az_offset: T,
    pub bs_el_offset: T,
    /// Complex amplitude; `|gain|^2` sums to the cluster power fraction.
    pub gain: Complex<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster<T> {
    /// Arrival direction at the UE, radians.
    pub ue_azimuth: T,
    pub ue_elevation: T,
    /// Arrival direction at the SCell, radians.
    pub bs_azimuth: T,
    pub bs_elevation: T,
    pub power_fraction: T,
    pub ue_az_spread: T,
    pub ue_el_spread: T,
    pub bs_az_spread: T,
    pub bs_el_spread: T,
    pub subpaths: Vec<Subpath<T>>,
}

impl<T: Real> Cluster<T> {
    pub fn subpath_angles(&self, s: &Subpath<T>) -> ((T, T), (T, T)) {
        (
            (
                self.ue_azimuth + s.ue_az_offset,
                self.ue_elevation + s.ue_el_offset,
            ),
            (
                self.bs_azimuth + s.bs_az_offset,
                self.bs_elevation + s.bs_el_offset,
            ),
        )
    }
}

/// Geometric bearings of the direct path, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosBearings<T> {
    /// Direction of the SCell seen from the UE.
    pub at_ue: T,
    /// Direction of the UE seen from the SCell.
    pub at_bs: T,
}

fn normal_offset<R: Rng + ?Sized>(spread: f64, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    z * spread
}

fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>() * std::f64::consts::TAU
}

/// Draws the cluster set of a non-outage link.
///
/// Cluster powers follow `U^(r-1) * 10^(-0.1*Z)` normalised to one. For LOS
/// links the strongest cluster is centred on the direct path; every other
/// cluster has a uniform azimuth at both ends.
pub fn sample_clusters<T: Real, R: Rng + ?Sized>(
    state: LinkState,
    los: LosBearings<T>,
    params: &ClusterParams<T>,
    rng: &mut R,
) -> Result<Vec<Cluster<T>>> {
    if state == LinkState::Outage {
        return Err(Error::OutageLink);
    }
    let count = match params.fixed_clusters {
        Some(n) => n,
        None => {
            let mean = params.mean_clusters.to_f64_lossless();
            let n = if mean > 0.0 {
                Poisson::new(mean)
                    .map_err(|e| Error::invalid("mean_clusters", e.to_string()))?
                    .sample(rng) as usize
            } else {
                0
            };
            n.max(1)
        }
    };

    let r = params.power_decay.to_f64_lossless();
    let zeta = params.cluster_shadowing_db.to_f64_lossless();
    let mut raw: Vec<f64> = (0..count)
        .map(|_| {
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            let z = normal_offset(zeta, rng);
            u.powf(r - 1.0) * 10f64.powf(-0.1 * z)
        })
        .collect();
    raw.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = raw.iter().sum();

    let deg = |v: T| v.to_f64_lossless().to_radians();
    let (bs_az, bs_el) = (deg(params.bs_az_spread_deg), deg(params.bs_el_spread_deg));
    let (ue_az, ue_el) = (deg(params.ue_az_spread_deg), deg(params.ue_el_spread_deg));
    let el_central = deg(params.central_el_spread_deg);
    let n_sub = params.subpaths_per_cluster;

    let mut clusters = Vec::with_capacity(count);
    for (c, p) in raw.iter().enumerate() {
        let fraction = p / total;
        let (ue_c, bs_c, ue_elc, bs_elc) = if c == 0 && state == LinkState::Los {
            (
                los.at_ue.to_f64_lossless(),
                los.at_bs.to_f64_lossless(),
                0.0,
                0.0,
            )
        } else {
            let e_ue = normal_offset(el_central, rng);
            let e_bs = normal_offset(el_central, rng);
            (uniform_angle(rng), uniform_angle(rng), e_ue, e_bs)
        };
        let amp = (fraction / n_sub as f64).sqrt();
        let subpaths = (0..n_sub)
            .map(|_| Subpath {
                ue_az_offset: T::lit(normal_offset(ue_az, rng)),
                ue_el_offset: T::lit(normal_offset(ue_el, rng)),
                bs_az_offset: T::lit(normal_offset(bs_az, rng)),
                bs_el_offset: T::lit(normal_offset(bs_el, rng)),
                gain: Complex::from_polar(T::lit(amp), T::lit(uniform_angle(rng))),
            })
            .collect();
        clusters.push(Cluster {
            ue_azimuth: T::lit(ue_c),
            ue_elevation: T::lit(ue_elc),
            bs_azimuth: T::lit(bs_c),
            bs_elevation: T::lit(bs_elc),
            power_fraction: T::lit(fraction),
            ue_az_spread: T::lit(ue_az),
            ue_el_spread: T::lit(ue_el),
            bs_az_spread: T::lit(bs_az),
            bs_el_spread: T::lit(bs_el),
            subpaths,
        });
    }
    Ok(clusters)
}

/// Sampled channel between the UE and one SCell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalLink<T> {
    pub scell_id: u32,
    pub distance_m: T,
    pub state: LinkState,
    /// `None` for outage links.
    pub pathloss_db: Option<T>,
    pub clusters: Vec<Cluster<T>>,
}

impl<T: Real> DirectionalLink<T> {
    pub fn outage(scell_id: u32, distance_m: T) -> Self {
        Self {
            scell_id,
            distance_m,
            state: LinkState::Outage,
            pathloss_db: None,
            clusters: Vec::new(),
        }
    }

    pub fn is_outage(&self) -> bool {
        self.state == LinkState::Outage
    }

    pub fn subpaths(&self) -> impl Iterator<Item = (&Cluster<T>, &Subpath<T>)> {
        self.clusters
            .iter()
            .flat_map(|c| c.subpaths.iter().map(move |s| (c, s)))
    }

    pub fn n_subpaths(&self) -> usize {
        self.clusters.iter().map(|c| c.subpaths.len()).sum()
    }

    /// Redraws every subpath phase. State, pathloss, angles and powers stay
    /// fixed; this is the per-scan small-scale fading refresh.
    pub fn refresh_fading<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for cluster in &mut self.clusters {
            for s in &mut cluster.subpaths {
                let amp = s.gain.norm();
                s.gain = Complex::from_polar(amp, T::lit(uniform_angle(rng)));
            }
        }
    }
}

/// Samples the full link between a UE and an SCell: state, pathloss with
/// shadowing, then clusters. NLOS pathloss is floored at free space.
pub fn sample_link<T: Real, R: Rng + ?Sized>(
    ue: &Point<T>,
    scell: &Scell<T>,
    params: &ChannelParams<T>,
    carrier_hz: T,
    rng: &mut R,
) -> Result<DirectionalLink<T>> {
    let d = distance_m(ue, &scell.position).max(T::lit(MIN_LINK_DISTANCE_M));
    let state = sample_link_state(d, &params.pathloss, rng)?;
    if state == LinkState::Outage {
        return Ok(DirectionalLink::outage(scell.id, d));
    }
    let mut pl = pathloss_db(d, state, &params.pathloss, rng)?;
    if state == LinkState::Nlos {
        pl = pl.max(free_space_pathloss_db(d, carrier_hz));
    }
    let at_ue = ue.bearing_to(&scell.position);
    let los = LosBearings {
        at_ue,
        at_bs: at_ue + T::PI(),
    };
    let clusters = sample_clusters(state, los, &params.clusters, rng)?;
    Ok(DirectionalLink {
        scell_id: scell.id,
        distance_m: d,
        state,
        pathloss_db: Some(pl),
        clusters,
    })
}

/// Linear channel gain seen with UE direction `ue_dir` and SCell direction
/// `bs_dir`:
///
/// `|sum_s g_s * r_ue(theta_s) * r_bs(phi_s)|^2 * 10^(-PL/10)`
///
/// Outage links have zero gain.
pub fn link_gain_linear<T: Real>(
    link: &DirectionalLink<T>,
    ue_dir: usize,
    bs_dir: usize,
    ue_codebook: &Codebook<T>,
    bs_codebook: &Codebook<T>,
) -> Result<T> {
    let ue_steer = ue_codebook.steering(ue_dir)?;
    let bs_steer = bs_codebook.steering(bs_dir)?;
    let Some(pl) = link.pathloss_db else {
        return Ok(T::zero());
    };
    let mut h = Complex::new(T::zero(), T::zero());
    for (cluster, s) in link.subpaths() {
        let ((ua, ue_el), (ba, be)) = cluster.subpath_angles(s);
        let r_ue = ue_codebook.response_unchecked(ue_steer, ua, ue_el);
        let r_bs = bs_codebook.response_unchecked(bs_steer, ba, be);
        h += s.gain * r_ue * r_bs;
    }
    Ok(h.norm_sqr() * (-pl).db_to_linear())
}
