use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use crate::beamforming::Codebook;
use crate::channel::{sample_link, DirectionalLink};
use crate::controller::{
    assemble_crt, emit_commands, handover_decision, AttachmentDecision, Channel,
    CompleteReportTable, ControlMessage, HandoverOutcome,
};
use crate::deployment::{sample_deployment, Deployment};
use crate::error::Result;
use crate::measurement::{ReportTable, SweepSession};
use crate::scalar::Real;

/// Random source of one trial: ChaCha8 seeded with `seed`, on stream
/// `trial_index`. The stream does not depend on the density or the signal
/// duration, so those comparisons use common random numbers.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

/// Operating point of a trial within a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint<T> {
    pub lambda_bs: T,
    pub t_sig_s: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult<T> {
    pub trial_index: u64,
    /// Distance to the selected SCell; `None` when the UE detached.
    pub serving_distance_m: Option<T>,
    /// SCells with at least one detected CRT entry.
    pub n_available: usize,
    pub decision: Option<AttachmentDecision<T>>,
}

/// A control message together with the transport it uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedMessage<T> {
    pub channel: Channel,
    #[serde(flatten)]
    pub message: ControlMessage<T>,
}

impl<T> From<ControlMessage<T>> for RoutedMessage<T> {
    fn from(message: ControlMessage<T>) -> Self {
        Self {
            channel: message.channel(),
            message,
        }
    }
}

/// Everything one trial produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTrace<T> {
    pub seed: u64,
    pub trial_index: u64,
    pub point: DesignPoint<T>,
    pub deployment: Deployment<T>,
    /// Sampled links (final fading state); only in detailed traces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub links: Option<Vec<DirectionalLink<T>>>,
    /// Report tables after every sweep; only in detailed traces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<Vec<Vec<ReportTable<T>>>>,
    pub report_tables: Vec<ReportTable<T>>,
    pub crt: CompleteReportTable<T>,
    pub outcome: HandoverOutcome<T>,
    pub commands: Vec<RoutedMessage<T>>,
    pub result: TrialResult<T>,
}

/// A configuration with its codebooks built once.
#[derive(Debug, Clone)]
pub struct Experiment<T> {
    cfg: SimConfig<T>,
    ue_codebook: Codebook<T>,
    bs_codebook: Codebook<T>,
}

impl<T: Real> Experiment<T> {
    pub fn new(cfg: SimConfig<T>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            ue_codebook: cfg.ue_codebook()?,
            bs_codebook: cfg.bs_codebook()?,
            cfg,
        })
    }

    pub fn config(&self) -> &SimConfig<T> {
        &self.cfg
    }

    pub fn ue_codebook(&self) -> &Codebook<T> {
        &self.ue_codebook
    }

    pub fn bs_codebook(&self) -> &Codebook<T> {
        &self.bs_codebook
    }

    /// First density of the grid at the base signal duration.
    pub fn default_point(&self) -> DesignPoint<T> {
        DesignPoint {
            lambda_bs: self.cfg.lambda_bs[0],
            t_sig_s: self.cfg.t_sig_s,
        }
    }

    pub fn run_trial(&self, point: DesignPoint<T>, trial_index: u64) -> Result<TrialResult<T>> {
        self.trace_trial(point, trial_index, false)
            .map(|t| t.result)
    }

    /// Deployment, link sampling, `sweeps_per_trial` sweeps, CRT assembly
    /// and the attach decision of a UE with no serving SCell.
    pub fn trace_trial(
        &self,
        point: DesignPoint<T>,
        trial_index: u64,
        detailed: bool,
    ) -> Result<TrialTrace<T>> {
        let cfg = &self.cfg;
        let mut rng = trial_rng(cfg.seed, trial_index);
        let deployment = sample_deployment(&mut rng, point.lambda_bs, &cfg.area)?;
        let links = deployment
            .scells
            .iter()
            .map(|c| {
                sample_link(
                    &deployment.ue_position,
                    c,
                    &cfg.channel,
                    cfg.f_c_hz,
                    &mut rng,
                )
            })
            .collect::<Result<Vec<_>>>()?;

        let mut session = SweepSession::new(
            links,
            self.ue_codebook.clone(),
            self.bs_codebook.clone(),
            cfg.sweep_settings(point.t_sig_s),
        );
        let mut sweeps = detailed.then(Vec::new);
        for _ in 0..cfg.sweeps_per_trial {
            session.sweep(&mut rng);
            if let Some(s) = sweeps.as_mut() {
                s.push(session.tables().to_vec());
            }
        }

        let links = detailed.then(|| session.links().to_vec());
        let report_tables = session.into_tables();
        let crt = assemble_crt(&report_tables, cfg.n_ue_dirs)?;
        let outcome = handover_decision(&crt, None, &cfg.policy);
        let commands = emit_commands(&outcome)
            .into_iter()
            .map(RoutedMessage::from)
            .collect();
        let decision = match outcome {
            HandoverOutcome::Handover(d) => Some(d),
            _ => None,
        };
        let result = TrialResult {
            trial_index,
            serving_distance_m: decision.and_then(|d| deployment.distance_to(d.n_id)),
            n_available: crt.available_scells().len(),
            decision,
        };
        Ok(TrialTrace {
            seed: cfg.seed,
            trial_index,
            point,
            deployment,
            links,
            sweeps,
            report_tables,
            crt,
            outcome,
            commands,
            result,
        })
    }
}
