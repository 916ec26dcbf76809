//! Uplink sounding sweeps and per-SCell report tables.
//!
//! The UE transmits its sounding signal through each of its `N_UE`
//! directions in turn. For every UE direction `i` an SCell scans its `N_BS`
//! receive directions, keeps the best SINR and the direction it arrived
//! from, and folds the new value into the running variance of that row.
//!
//! The link budget is noise limited (one UE per trial, no interference):
//!
//! ```text
//! SINR(i, k) = P_tx + 10*log10(G(i, k)) - N0 + 10*log10(T_sig / T_ref)
//! N0         = -174 dBm/Hz + 10*log10(W_tot) + NF
//! ```
//!
//! `T_ref` is the signal duration the detection threshold was calibrated
//! for; longer sounding signals accumulate proportionally more energy.

use std::collections::VecDeque;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::beamforming::{BfArchitecture, Codebook};
use crate::channel::{link_gain_linear, DirectionalLink};
use crate::error::Result;
use crate::scalar::Real;

/// Thermal noise density at room temperature, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

/// `-174 + 10*log10(W) + NF`, dBm.
pub fn noise_floor_dbm<T: Real>(bandwidth_hz: T, noise_figure_db: T) -> T {
    T::lit(THERMAL_NOISE_DBM_HZ) + bandwidth_hz.to_db() + noise_figure_db
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget<T> {
    pub p_tx_dbm: T,
    pub noise_dbm: T,
    pub t_sig_s: T,
    pub t_ref_s: T,
    /// Detection threshold.
    pub tau_db: T,
}

impl<T: Real> LinkBudget<T> {
    /// Gain from integrating the sounding signal over `t_sig` instead of
    /// `t_ref`.
    pub fn energy_bonus_db(&self) -> T {
        (self.t_sig_s / self.t_ref_s).to_db()
    }

    pub fn sinr_db(&self, gain_linear: T) -> T {
        self.p_tx_dbm + gain_linear.to_db() - self.noise_dbm + self.energy_bonus_db()
    }

    pub fn sample(&self, gain_linear: T) -> SinrSample<T> {
        SinrSample::new(self.sinr_db(gain_linear), self.tau_db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSample<T> {
    pub value_db: T,
    pub detected: bool,
}

impl<T: Real> SinrSample<T> {
    pub fn new(value_db: T, tau_db: T) -> Self {
        Self {
            value_db,
            detected: value_db >= tau_db,
        }
    }
}

/// SINR of one (UE direction, SCell direction) pair. Outage links yield an
/// undetected sample at `-inf` dB.
pub fn measure_sinr<T: Real>(
    link: &DirectionalLink<T>,
    ue_dir: usize,
    bs_dir: usize,
    ue_codebook: &Codebook<T>,
    bs_codebook: &Codebook<T>,
    budget: &LinkBudget<T>,
) -> Result<SinrSample<T>> {
    let gain = link_gain_linear(link, ue_dir, bs_dir, ue_codebook, bs_codebook)?;
    Ok(budget.sample(gain))
}

/// How many past detected samples a report-table row keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "usize", into = "usize")]
pub enum MemoryCap {
    Unbounded,
    Bounded(usize),
}

impl From<usize> for MemoryCap {
    fn from(n: usize) -> Self {
        if n == 0 {
            MemoryCap::Unbounded
        } else {
            MemoryCap::Bounded(n)
        }
    }
}

impl From<MemoryCap> for usize {
    fn from(cap: MemoryCap) -> usize {
        match cap {
            MemoryCap::Unbounded => 0,
            MemoryCap::Bounded(n) => n,
        }
    }
}

/// Unit of the values kept in the variance history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceDomain {
    #[default]
    Db,
    Linear,
}

impl VarianceDomain {
    fn map<T: Real>(self, sinr_db: T) -> T {
        match self {
            VarianceDomain::Db => sinr_db,
            VarianceDomain::Linear => sinr_db.db_to_linear(),
        }
    }
}

/// Streaming first and second central moments.
#[derive(Debug, Clone, Copy, Default)]
struct Moments<T> {
    count: usize,
    mean: T,
    m2: T,
}

impl<T: Real> Moments<T> {
    fn push(&mut self, x: T) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / T::from_count(self.count);
        self.m2 += delta * (x - self.mean);
    }

    fn from_values<'a>(values: impl IntoIterator<Item = &'a T>) -> Self {
        let mut m = Self::default();
        for v in values {
            m.push(*v);
        }
        m
    }

    /// Divide-by-count variance.
    fn population_variance(&self) -> Option<T> {
        (self.count > 0).then(|| (self.m2 / T::from_count(self.count)).max(T::zero()))
    }
}

/// One report-table cell: best SINR over SCell directions for a given UE
/// direction, the SCell direction achieving it, and the variance of past
/// maxima.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct RtEntry<T> {
    /// Latest max SINR; `None` when below the detection threshold.
    pub sinr_db: Option<T>,
    pub best_bs_dir: Option<usize>,
    /// Population variance of `history`; `None` while the history is empty.
    pub variance: Option<T>,
    pub history: VecDeque<T>,
    #[serde(skip)]
    moments: Option<Moments<T>>,
}

impl<T: PartialEq> PartialEq for RtEntry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.sinr_db == other.sinr_db
            && self.best_bs_dir == other.best_bs_dir
            && self.variance == other.variance
            && self.history == other.history
    }
}

impl<T: Real> RtEntry<T> {
    pub fn undetected() -> Self {
        Self::default()
    }

    pub fn detected(sinr_db: T, best_bs_dir: usize) -> Self {
        Self {
            sinr_db: Some(sinr_db),
            best_bs_dir: Some(best_bs_dir),
            ..Self::default()
        }
    }

    pub fn is_detected(&self) -> bool {
        self.sinr_db.is_some()
    }

    /// Appends a detected value and recomputes the variance.
    ///
    /// Unbounded memory updates the moments in O(1). Bounded memory evicts
    /// the oldest values beyond the cap and recomputes over what is left.
    pub fn record(&mut self, value: T, cap: MemoryCap) {
        let moments = match cap {
            MemoryCap::Unbounded => {
                let mut m = match self.moments {
                    Some(m) if m.count == self.history.len() => m,
                    _ => Moments::from_values(&self.history),
                };
                self.history.push_back(value);
                m.push(value);
                m
            }
            MemoryCap::Bounded(u) => {
                self.history.push_back(value);
                while self.history.len() > u.max(1) {
                    self.history.pop_front();
                }
                Moments::from_values(&self.history)
            }
        };
        self.moments = Some(moments);
        self.variance = moments.population_variance();
    }

    /// Replaces the latest measurement, keeping history. Detected values
    /// are appended to the history (in `domain` units).
    pub fn merge_scan(&mut self, fresh: &RtEntry<T>, cap: MemoryCap, domain: VarianceDomain) {
        self.sinr_db = fresh.sinr_db;
        self.best_bs_dir = fresh.best_bs_dir;
        if let Some(v) = fresh.sinr_db {
            self.record(domain.map(v), cap);
        }
    }
}

/// Returns `entry` with `new_value` folded into its history.
pub fn update_variance<T: Real>(entry: &RtEntry<T>, new_value: T, cap: MemoryCap) -> RtEntry<T> {
    let mut next = entry.clone();
    next.record(new_value, cap);
    next
}

/// Per-SCell report table; row `i` belongs to UE direction `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable<T> {
    pub scell_id: u32,
    pub rows: Vec<RtEntry<T>>,
}

impl<T: Real> ReportTable<T> {
    pub fn empty(scell_id: u32, n_ue_dirs: usize) -> Self {
        Self {
            scell_id,
            rows: vec![RtEntry::undetected(); n_ue_dirs],
        }
    }

    pub fn detected_count(&self) -> usize {
        self.rows.iter().filter(|e| e.is_detected()).count()
    }

    pub fn any_detected(&self) -> bool {
        self.rows.iter().any(RtEntry::is_detected)
    }
}

/// Picks the max and arg-max (lowest index on ties) over SCell directions.
fn best_of<T: Real>(values: impl IntoIterator<Item = T>, tau_db: T) -> RtEntry<T> {
    let mut best: Option<(usize, T)> = None;
    for (k, v) in values.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    match best {
        Some((k, v)) if v >= tau_db => RtEntry::detected(v, k),
        _ => RtEntry::undetected(),
    }
}

/// Fills one row: max over every SCell direction for UE direction `ue_dir`.
/// Does not touch the history.
pub fn scan_row<T: Real>(
    link: &DirectionalLink<T>,
    ue_dir: usize,
    ue_codebook: &Codebook<T>,
    bs_codebook: &Codebook<T>,
    budget: &LinkBudget<T>,
) -> Result<RtEntry<T>> {
    let samples = (0..bs_codebook.n_directions())
        .map(|k| {
            measure_sinr(link, ue_dir, k, ue_codebook, bs_codebook, budget).map(|s| s.value_db)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(best_of(samples, budget.tau_db))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings<T> {
    pub budget: LinkBudget<T>,
    pub memory_cap: MemoryCap,
    pub variance_domain: VarianceDomain,
    pub bs_architecture: BfArchitecture,
    /// Redraw subpath phases before every sweep after the first.
    pub refresh_fading: bool,
}

/// Work done by one SCell during one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SweepStats {
    pub sinr_evaluations: usize,
    /// Sounding slots consumed: `N_UE*N_BS` for an analog SCell, `N_UE`
    /// for a digital one.
    pub scan_slots: usize,
    pub detected_entries: usize,
}

/// Beam-domain responses of every subpath, cached per link. They depend
/// only on angles, which fading refreshes leave untouched.
#[derive(Debug, Clone)]
struct LinkResponses<T> {
    n_subpaths: usize,
    ue: Vec<Complex<T>>,
    bs: Vec<Complex<T>>,
    linear_pathloss: T,
}

impl<T: Real> LinkResponses<T> {
    fn new(link: &DirectionalLink<T>, ue_cb: &Codebook<T>, bs_cb: &Codebook<T>) -> Self {
        let n_ue = ue_cb.n_directions();
        let n_bs = bs_cb.n_directions();
        let n_subpaths = link.n_subpaths();
        let mut ue = Vec::with_capacity(n_subpaths * n_ue);
        let mut bs = Vec::with_capacity(n_subpaths * n_bs);
        for (cluster, s) in link.subpaths() {
            let ((ua, ue_el), (ba, be)) = cluster.subpath_angles(s);
            ue.extend(
                ue_cb
                    .steerings()
                    .iter()
                    .map(|st| ue_cb.response_unchecked(*st, ua, ue_el)),
            );
            bs.extend(
                bs_cb
                    .steerings()
                    .iter()
                    .map(|st| bs_cb.response_unchecked(*st, ba, be)),
            );
        }
        let linear_pathloss = link
            .pathloss_db
            .map(|pl| (-pl).db_to_linear())
            .unwrap_or(T::zero());
        Self {
            n_subpaths,
            ue,
            bs,
            linear_pathloss,
        }
    }

    /// Linear gains for every (UE direction, SCell direction) pair, row
    /// major in the UE direction.
    fn gains(&self, link: &DirectionalLink<T>, n_ue: usize, n_bs: usize) -> Vec<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut h = vec![zero; n_ue * n_bs];
        for (s, (_, sub)) in link.subpaths().enumerate() {
            let ue = &self.ue[s * n_ue..(s + 1) * n_ue];
            let bs = &self.bs[s * n_bs..(s + 1) * n_bs];
            for (i, r_ue) in ue.iter().enumerate() {
                let a = sub.gain * r_ue;
                for (k, r_bs) in bs.iter().enumerate() {
                    h[i * n_bs + k] += a * r_bs;
                }
            }
        }
        debug_assert_eq!(self.n_subpaths, link.n_subpaths());
        h.into_iter()
            .map(|z| z.norm_sqr() * self.linear_pathloss)
            .collect()
    }
}

/// Repeated sweeps over a fixed set of links within one trial. Owns the
/// links, their cached responses and one report table per SCell.
#[derive(Debug, Clone)]
pub struct SweepSession<T> {
    ue_codebook: Codebook<T>,
    bs_codebook: Codebook<T>,
    settings: SweepSettings<T>,
    links: Vec<DirectionalLink<T>>,
    responses: Vec<LinkResponses<T>>,
    tables: Vec<ReportTable<T>>,
    sweeps_done: usize,
}

impl<T: Real> SweepSession<T> {
    pub fn new(
        links: Vec<DirectionalLink<T>>,
        ue_codebook: Codebook<T>,
        bs_codebook: Codebook<T>,
        settings: SweepSettings<T>,
    ) -> Self {
        let n_ue = ue_codebook.n_directions();
        let responses = links
            .iter()
            .map(|l| LinkResponses::new(l, &ue_codebook, &bs_codebook))
            .collect();
        let tables = links
            .iter()
            .map(|l| ReportTable::empty(l.scell_id, n_ue))
            .collect();
        Self {
            ue_codebook,
            bs_codebook,
            settings,
            links,
            responses,
            tables,
            sweeps_done: 0,
        }
    }

    pub fn links(&self) -> &[DirectionalLink<T>] {
        &self.links
    }

    pub fn tables(&self) -> &[ReportTable<T>] {
        &self.tables
    }

    pub fn into_tables(self) -> Vec<ReportTable<T>> {
        self.tables
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps_done
    }

    /// Latest-scan rows of one link, without touching history.
    pub fn scan_link(&self, index: usize) -> Vec<RtEntry<T>> {
        let n_ue = self.ue_codebook.n_directions();
        let n_bs = self.bs_codebook.n_directions();
        let link = &self.links[index];
        if link.is_outage() {
            return vec![RtEntry::undetected(); n_ue];
        }
        let gains = self.responses[index].gains(link, n_ue, n_bs);
        let budget = &self.settings.budget;
        gains
            .chunks(n_bs)
            .map(|row| best_of(row.iter().map(|g| budget.sinr_db(*g)), budget.tau_db))
            .collect()
    }

    /// One complete sweep: every UE direction against every SCell
    /// direction, for every link. Returns per-SCell work counters.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<SweepStats> {
        if self.sweeps_done > 0 && self.settings.refresh_fading {
            for link in &mut self.links {
                link.refresh_fading(rng);
            }
        }
        let n_ue = self.ue_codebook.n_directions();
        let n_bs = self.bs_codebook.n_directions();
        let scan_slots = match self.settings.bs_architecture {
            BfArchitecture::Analog => n_ue * n_bs,
            BfArchitecture::Digital => n_ue,
        };
        let mut stats = Vec::with_capacity(self.links.len());
        for index in 0..self.links.len() {
            let fresh = self.scan_link(index);
            let table = &mut self.tables[index];
            for (entry, new) in table.rows.iter_mut().zip(&fresh) {
                entry.merge_scan(new, self.settings.memory_cap, self.settings.variance_domain);
            }
            stats.push(SweepStats {
                sinr_evaluations: n_ue * n_bs,
                scan_slots,
                detected_entries: table.detected_count(),
            });
        }
        self.sweeps_done += 1;
        stats
    }
}

/// One sweep over `links` on top of `previous` tables (matched by SCell
/// id; missing tables start empty). Leaves fading untouched.
pub fn full_sweep<T: Real>(
    links: &[DirectionalLink<T>],
    previous: &[ReportTable<T>],
    ue_codebook: &Codebook<T>,
    bs_codebook: &Codebook<T>,
    settings: &SweepSettings<T>,
) -> Vec<ReportTable<T>> {
    let session = SweepSession::new(
        links.to_vec(),
        ue_codebook.clone(),
        bs_codebook.clone(),
        SweepSettings {
            refresh_fading: false,
            ..*settings
        },
    );
    let n_ue = ue_codebook.n_directions();
    (0..links.len())
        .map(|index| {
            let id = links[index].scell_id;
            let mut table = previous
                .iter()
                .find(|t| t.scell_id == id)
                .cloned()
                .unwrap_or_else(|| ReportTable::empty(id, n_ue));
            for (entry, new) in table.rows.iter_mut().zip(session.scan_link(index)) {
                entry.merge_scan(&new, settings.memory_cap, settings.variance_domain);
            }
            table
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_link, ChannelParams};
    use crate::deployment::{Point, Scell};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn budget(t_sig: f64, tau: f64) -> LinkBudget<f64> {
        LinkBudget {
            p_tx_dbm: 30.0,
            noise_dbm: noise_floor_dbm(1e9, 5.0),
            t_sig_s: t_sig,
            t_ref_s: 10e-6,
            tau_db: tau,
        }
    }

    fn settings(t_sig: f64, tau: f64, refresh: bool) -> SweepSettings<f64> {
        SweepSettings {
            budget: budget(t_sig, tau),
            memory_cap: MemoryCap::Bounded(10),
            variance_domain: VarianceDomain::Db,
            bs_architecture: BfArchitecture::Analog,
            refresh_fading: refresh,
        }
    }

    fn codebooks() -> (Codebook<f64>, Codebook<f64>) {
        (
            Codebook::new(4, 4, 8).unwrap(),
            Codebook::new(8, 8, 16).unwrap(),
        )
    }

    fn random_links(seed: u64, n: usize) -> Vec<DirectionalLink<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ue = Point::new(0.0, 0.0);
        (0..n)
            .map(|k| {
                let r = 20.0 + rng.random::<f64>() * 250.0;
                let a = rng.random::<f64>() * std::f64::consts::TAU;
                let scell = Scell {
                    id: k as u32 + 1,
                    position: Point::new(r * a.cos(), r * a.sin()),
                };
                sample_link(&ue, &scell, &ChannelParams::default(), 28e9, &mut rng).unwrap()
            })
            .collect()
    }

    #[test]
    fn noise_floor_from_defaults() {
        let n0 = noise_floor_dbm(1e9f64, 5.0);
        assert!((n0 - -79.0).abs() < 0.01);
        assert_eq!(n0, -79.0);
    }

    #[test]
    fn energy_bonus() {
        assert_eq!(budget(10e-6, -5.0).energy_bonus_db(), 0.0);
        assert!((budget(100e-6, -5.0).energy_bonus_db() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn sample_detection_threshold() {
        assert!(SinrSample::new(-5.0, -5.0).detected);
        assert!(!SinrSample::new(-5.0001, -5.0).detected);
        assert!(!SinrSample::new(f64::NEG_INFINITY, -5.0).detected);
    }

    #[test]
    fn variance_examples() {
        let e = update_variance(&RtEntry::<f64>::undetected(), 7.25, MemoryCap::Unbounded);
        assert_eq!(e.variance, Some(0.0));
        let e = update_variance(&e, 7.25, MemoryCap::Unbounded);
        assert_eq!(e.variance, Some(0.0));

        let mut e = RtEntry::<f64>::undetected();
        assert_eq!(e.variance, None);
        e.record(1.0, MemoryCap::Unbounded);
        e.record(3.0, MemoryCap::Unbounded);
        // E[x^2] - E[x]^2 = 5 - 4
        assert_eq!(e.variance, Some(1.0));

        let mut e = RtEntry::<f64>::undetected();
        for x in [5.0, 1.0, 3.0] {
            e.record(x, MemoryCap::Bounded(2));
        }
        assert_eq!(e.history, VecDeque::from(vec![1.0, 3.0]));
        assert_eq!(e.variance, Some(1.0));
    }

    #[test]
    fn variance_survives_serde_round_trip() {
        let mut e = RtEntry::<f64>::undetected();
        for x in [2.0, 4.0, 9.0] {
            e.record(x, MemoryCap::Unbounded);
        }
        let json = serde_json::to_string(&e).unwrap();
        let mut back: RtEntry<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
        back.record(1.0, MemoryCap::Unbounded);
        e.record(1.0, MemoryCap::Unbounded);
        assert!((back.variance.unwrap() - e.variance.unwrap()).abs() < 1e-12);
        let xs = [2.0, 4.0, 9.0, 1.0];
        let m = xs.iter().sum::<f64>() / 4.0;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 4.0;
        assert!((back.variance.unwrap() - v).abs() < 1e-12);
    }

    #[test]
    fn memory_cap_serde_uses_zero_for_unbounded() {
        assert_eq!(serde_json::to_string(&MemoryCap::Unbounded).unwrap(), "0");
        assert_eq!(
            serde_json::from_str::<MemoryCap>("10").unwrap(),
            MemoryCap::Bounded(10)
        );
    }

    #[test]
    fn scan_row_all_below_threshold_is_undetected() {
        let (ue_cb, bs_cb) = codebooks();
        let mut link = random_links(3, 1).remove(0);
        link.state = crate::channel::LinkState::Los;
        link.pathloss_db = Some(400.0);
        if link.clusters.is_empty() {
            link = random_links(4, 8)
                .into_iter()
                .find(|l| !l.is_outage())
                .unwrap();
            link.pathloss_db = Some(400.0);
        }
        let e = scan_row(&link, 0, &ue_cb, &bs_cb, &budget(10e-6, -5.0)).unwrap();
        assert!(!e.is_detected());
        assert_eq!(e.best_bs_dir, None);
    }

    #[test]
    fn single_detectable_direction_is_argmax() {
        let raw = [-20.0, -8.0, 3.0, -30.0];
        let e = best_of(raw, -5.0);
        assert_eq!(e.best_bs_dir, Some(2));
        assert_eq!(e.sinr_db, Some(3.0));
        let tie = best_of([1.0, 4.0, 4.0], -5.0);
        assert_eq!(tie.best_bs_dir, Some(1));
    }

    #[test]
    fn session_matches_scan_row() {
        let (ue_cb, bs_cb) = codebooks();
        let links = random_links(9, 40);
        let s = settings(10e-6, -5.0, false);
        let session = SweepSession::new(links.clone(), ue_cb.clone(), bs_cb.clone(), s);
        for (index, link) in links.iter().enumerate() {
            let fast = session.scan_link(index);
            for (i, entry) in fast.iter().enumerate() {
                let slow = scan_row(link, i, &ue_cb, &bs_cb, &s.budget).unwrap();
                assert_eq!(entry.best_bs_dir, slow.best_bs_dir);
                match (entry.sinr_db, slow.sinr_db) {
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9),
                    (None, None) => {}
                    other => panic!("detection mismatch {other:?}"),
                }
            }
        }
    }

    #[test]
    fn analog_sweep_counts_128_evaluations() {
        let (ue_cb, bs_cb) = codebooks();
        let mut session = SweepSession::new(
            random_links(1, 5),
            ue_cb.clone(),
            bs_cb.clone(),
            settings(10e-6, -5.0, true),
        );
        let stats = session.sweep(&mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(stats.len(), 5);
        assert!(stats
            .iter()
            .all(|s| s.sinr_evaluations == 128 && s.scan_slots == 128));
        assert!(session.tables().iter().all(|t| t.rows.len() == 8));

        let mut digital = settings(10e-6, -5.0, true);
        digital.bs_architecture = BfArchitecture::Digital;
        let mut session = SweepSession::new(random_links(1, 5), ue_cb, bs_cb, digital);
        let stats = session.sweep(&mut ChaCha8Rng::seed_from_u64(0));
        assert!(stats
            .iter()
            .all(|s| s.sinr_evaluations == 128 && s.scan_slots == 8));
    }

    #[test]
    fn no_links_no_tables() {
        let (ue_cb, bs_cb) = codebooks();
        let tables = full_sweep(&[], &[], &ue_cb, &bs_cb, &settings(10e-6, -5.0, true));
        assert!(tables.is_empty());
    }

    #[test]
    fn frozen_channel_gives_zero_variance() {
        let (ue_cb, bs_cb) = codebooks();
        let links = random_links(5, 30);
        let s = settings(10e-6, -5.0, false);
        let first = full_sweep(&links, &[], &ue_cb, &bs_cb, &s);
        let second = full_sweep(&links, &first, &ue_cb, &bs_cb, &s);
        let mut detected = 0;
        for (a, b) in first.iter().zip(&second) {
            for (x, y) in a.rows.iter().zip(&b.rows) {
                assert_eq!(x.sinr_db, y.sinr_db);
                assert_eq!(x.best_bs_dir, y.best_bs_dir);
                if y.is_detected() {
                    detected += 1;
                    assert_eq!(y.variance, Some(0.0));
                    assert_eq!(y.history.len(), 2);
                }
            }
        }
        assert!(detected > 0);
    }

    #[test]
    fn fading_refresh_populates_variance() {
        let (ue_cb, bs_cb) = codebooks();
        let mut session = SweepSession::new(
            random_links(5, 30),
            ue_cb,
            bs_cb,
            settings(10e-6, -5.0, true),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            session.sweep(&mut rng);
        }
        let positive = session
            .tables()
            .iter()
            .flat_map(|t| &t.rows)
            .filter(|e| e.variance.is_some_and(|v| v > 0.0))
            .count();
        assert!(positive > 0);
        for e in session.tables().iter().flat_map(|t| &t.rows) {
            assert!(e.history.len() <= 10);
        }
    }

    #[test]
    fn raising_tau_never_adds_detections() {
        let (ue_cb, bs_cb) = codebooks();
        let links = random_links(13, 60);
        let mut prev: Option<Vec<bool>> = None;
        for tau in [-15.0, -5.0, 0.0, 10.0, 25.0] {
            let tables = full_sweep(&links, &[], &ue_cb, &bs_cb, &settings(10e-6, tau, false));
            let flags: Vec<bool> = tables
                .iter()
                .flat_map(|t| t.rows.iter().map(|e| e.is_detected()))
                .collect();
            if let Some(p) = &prev {
                assert!(flags.iter().zip(p).all(|(now, before)| !*now || *before));
            }
            prev = Some(flags);
        }
    }

    #[test]
    fn longer_signal_detects_more() {
        let (ue_cb, bs_cb) = codebooks();
        let links = random_links(21, 80);
        let count = |t_sig: f64| -> usize {
            full_sweep(&links, &[], &ue_cb, &bs_cb, &settings(t_sig, -5.0, false))
                .iter()
                .map(ReportTable::detected_count)
                .sum()
        };
        let (short, long) = (count(10e-6), count(100e-6));
        assert!(long > short, "{long} vs {short}");
        assert!(count(30e-6) >= short);
    }

    #[test]
    fn linear_domain_history() {
        let mut e = RtEntry::<f64>::undetected();
        let fresh = RtEntry::detected(10.0, 3);
        e.merge_scan(&fresh, MemoryCap::Unbounded, VarianceDomain::Linear);
        assert!((e.history[0] - 10.0).abs() < 1e-12);
        assert_eq!(e.sinr_db, Some(10.0));
    }

    #[test]
    fn undetected_scan_keeps_history() {
        let mut e = RtEntry::<f64>::undetected();
        e.merge_scan(
            &RtEntry::detected(3.0, 1),
            MemoryCap::Bounded(4),
            VarianceDomain::Db,
        );
        e.merge_scan(
            &RtEntry::undetected(),
            MemoryCap::Bounded(4),
            VarianceDomain::Db,
        );
        assert!(!e.is_detected());
        assert_eq!(e.best_bs_dir, None);
        assert_eq!(e.history.len(), 1);
        assert_eq!(e.variance, Some(0.0));
    }
}
