//! Monte Carlo simulator of uplink-based multi-connectivity for mmWave
//! cellular networks.
//!
//! A UE sweeps directional sounding signals; every mmWave SCell scans its
//! receive directions and keeps a per-UE-direction report table (best SINR,
//! best SCell direction, SINR variance). A central MCell merges the tables,
//! picks the serving SCell and beam pair, and pushes the decision over the
//! backhaul and the legacy link.
//!
//! All model types are generic over [`Real`] (`f32` or `f64`). The aliases
//! at the crate root fix the scalar for the common cases.

// `!(x >= 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamforming;
pub mod channel;
pub mod controller;
pub mod deployment;
mod error;
pub mod experiments;
pub mod initial_access;
pub mod measurement;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Point64 = deployment::Point<f64>;
pub type SimArea64 = deployment::SimArea<f64>;
pub type Deployment64 = deployment::Deployment<f64>;
pub type ChannelParams64 = channel::ChannelParams<f64>;
pub type DirectionalLink64 = channel::DirectionalLink<f64>;
pub type Codebook64 = beamforming::Codebook<f64>;
pub type LinkBudget64 = measurement::LinkBudget<f64>;
pub type RtEntry64 = measurement::RtEntry<f64>;
pub type ReportTable64 = measurement::ReportTable<f64>;
pub type CompleteReportTable64 = controller::CompleteReportTable<f64>;
pub type AttachmentDecision64 = controller::AttachmentDecision<f64>;
pub type SelectionPolicy64 = controller::SelectionPolicy<f64>;
pub type ControlMessage64 = controller::ControlMessage<f64>;
pub type SimConfig64 = experiments::SimConfig<f64>;
pub type Experiment64 = experiments::Experiment<f64>;
pub type TrialResult64 = experiments::TrialResult<f64>;
pub type TrialTrace64 = experiments::TrialTrace<f64>;
pub type CampaignResult64 = experiments::CampaignResult<f64>;

pub type Codebook32 = beamforming::Codebook<f32>;
pub type ReportTable32 = measurement::ReportTable<f32>;
pub type SimConfig32 = experiments::SimConfig<f32>;
pub type Experiment32 = experiments::Experiment<f32>;
