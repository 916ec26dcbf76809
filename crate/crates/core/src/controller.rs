//! MCell-side decisions: complete report table assembly, serving-cell
//! selection, handover and the Phase-3 command fan-out.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{ReportTable, RtEntry};
use crate::scalar::Real;

/// Report tables of every SCell side by side. `rows[i][j]` is the entry for
/// UE direction `i` at the SCell `scell_ids[j]`; columns ascend by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompleteReportTable<T> {
    pub scell_ids: Vec<u32>,
    pub rows: Vec<Vec<RtEntry<T>>>,
}

impl<T: Real> CompleteReportTable<T> {
    pub fn n_ue_dirs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_scells(&self) -> usize {
        self.scell_ids.len()
    }

    pub fn entry(&self, ue_dir: usize, col: usize) -> Option<&RtEntry<T>> {
        self.rows.get(ue_dir).and_then(|r| r.get(col))
    }

    pub fn column_of(&self, scell_id: u32) -> Option<usize> {
        self.scell_ids.iter().position(|&id| id == scell_id)
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = &RtEntry<T>> {
        self.rows.iter().filter_map(move |r| r.get(col))
    }

    /// SCells with at least one detected entry.
    pub fn available_scells(&self) -> Vec<u32> {
        (0..self.n_scells())
            .filter(|&j| self.column(j).any(RtEntry::is_detected))
            .map(|j| self.scell_ids[j])
            .collect()
    }
}

/// Builds the CRT from SCell reports. Columns are sorted by SCell id.
pub fn assemble_crt<T: Real>(
    reports: &[ReportTable<T>],
    n_ue_dirs: usize,
) -> Result<CompleteReportTable<T>> {
    let mut order: Vec<&ReportTable<T>> = reports.iter().collect();
    order.sort_by_key(|r| r.scell_id);
    for w in order.windows(2) {
        if w[0].scell_id == w[1].scell_id {
            return Err(Error::DuplicateScellId(w[0].scell_id));
        }
    }
    for r in &order {
        if r.rows.len() != n_ue_dirs {
            return Err(Error::RowCountMismatch {
                scell_id: r.scell_id,
                expected: n_ue_dirs,
                found: r.rows.len(),
            });
        }
    }
    let rows = (0..n_ue_dirs)
        .map(|i| order.iter().map(|r| r.rows[i].clone()).collect())
        .collect();
    Ok(CompleteReportTable {
        scell_ids: order.iter().map(|r| r.scell_id).collect(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SelectionPolicy<T> {
    #[default]
    MaxSinr,
    MaxSinrHysteresis {
        delta_db: T,
    },
    VariancePenalized {
        weight: T,
    },
}

impl<T: Real> SelectionPolicy<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SelectionPolicy::MaxSinrHysteresis { delta_db } if !(delta_db >= T::zero()) => {
                Err(Error::config("policy.delta_db", "must be >= 0"))
            }
            SelectionPolicy::VariancePenalized { weight } if !(weight >= T::zero()) => {
                Err(Error::config("policy.weight", "must be >= 0"))
            }
            _ => Ok(()),
        }
    }

    /// Selection score of a detected entry; `None` for undetected ones.
    pub fn score(&self, entry: &RtEntry<T>) -> Option<T> {
        let sinr = entry.sinr_db?;
        Some(match *self {
            SelectionPolicy::MaxSinr | SelectionPolicy::MaxSinrHysteresis { .. } => sinr,
            SelectionPolicy::VariancePenalized { weight } => {
                sinr - weight * entry.variance.unwrap_or(T::zero())
            }
        })
    }
}

/// Target SCell and the beam pair to use on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttachmentDecision<T> {
    pub n_id: u32,
    pub d_ue: usize,
    pub d_scell: usize,
    pub sinr_db: T,
    pub variance: Option<T>,
}

/// Best detected entry under `policy`. Ties go to the lower SCell id, then
/// the lower UE direction.
pub fn select_best<T: Real>(
    crt: &CompleteReportTable<T>,
    policy: &SelectionPolicy<T>,
) -> Result<AttachmentDecision<T>> {
    let mut best: Option<(T, usize, usize)> = None;
    for col in 0..crt.n_scells() {
        for (ue_dir, row) in crt.rows.iter().enumerate() {
            let Some(score) = policy.score(&row[col]) else {
                continue;
            };
            if best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, col, ue_dir));
            }
        }
    }
    let (_, col, ue_dir) = best.ok_or(Error::NoCellAvailable)?;
    let entry = &crt.rows[ue_dir][col];
    Ok(AttachmentDecision {
        n_id: crt.scell_ids[col],
        d_ue: ue_dir,
        d_scell: entry
            .best_bs_dir
            .expect("detected entries carry a direction"),
        sinr_db: entry.sinr_db.expect("detected entries carry an SINR"),
        variance: entry.variance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum HandoverOutcome<T> {
    Stay,
    Handover(AttachmentDecision<T>),
    /// No mmWave SCell hears the UE; it stays on the legacy cell only.
    Detach,
}

/// Best score the current serving cell offers in `crt`.
fn serving_score<T: Real>(
    crt: &CompleteReportTable<T>,
    scell_id: u32,
    policy: &SelectionPolicy<T>,
) -> Option<T> {
    let col = crt.column_of(scell_id)?;
    crt.column(col)
        .filter_map(|e| policy.score(e))
        .fold(None, |acc: Option<T>, s| Some(acc.map_or(s, |a| a.max(s))))
}

/// Decides whether the UE should move to another SCell given a fresh CRT.
pub fn handover_decision<T: Real>(
    crt: &CompleteReportTable<T>,
    current: Option<&AttachmentDecision<T>>,
    policy: &SelectionPolicy<T>,
) -> HandoverOutcome<T> {
    let best = match select_best(crt, policy) {
        Ok(best) => best,
        Err(_) => return HandoverOutcome::Detach,
    };
    let Some(current) = current else {
        return HandoverOutcome::Handover(best);
    };
    if best.n_id == current.n_id {
        return HandoverOutcome::Stay;
    }
    match *policy {
        SelectionPolicy::MaxSinrHysteresis { delta_db } => {
            match serving_score(crt, current.n_id, policy) {
                Some(serving) if best.sinr_db - serving < delta_db => HandoverOutcome::Stay,
                _ => HandoverOutcome::Handover(best),
            }
        }
        _ => HandoverOutcome::Handover(best),
    }
}

/// Transport a control message travels over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// Backhaul between base stations.
    X2,
    /// Omnidirectional sub-6 GHz link between MCell and UE.
    Legacy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ControlMessage<T> {
    /// SCell -> MCell report table upload.
    RtReport {
        scell_id: u32,
        table: ReportTable<T>,
    },
    /// MCell -> target SCell: attach the UE using `d_scell`.
    PathSwitchCommand { n_id: u32, d_scell: usize },
    /// MCell -> UE: steer towards `n_id` with `d_ue`.
    UeSteerCommand { d_ue: usize, n_id: u32 },
}

impl<T> ControlMessage<T> {
    pub fn channel(&self) -> Channel {
        match self {
            ControlMessage::RtReport { .. } | ControlMessage::PathSwitchCommand { .. } => {
                Channel::X2
            }
            ControlMessage::UeSteerCommand { .. } => Channel::Legacy,
        }
    }
}

impl<T: Real> ControlMessage<T> {
    pub fn report(table: ReportTable<T>) -> Self {
        ControlMessage::RtReport {
            scell_id: table.scell_id,
            table,
        }
    }
}

/// Builds the CRT from the report uploads in a message log; other messages
/// are ignored.
pub fn crt_from_messages<T: Real>(
    messages: &[ControlMessage<T>],
    n_ue_dirs: usize,
) -> Result<CompleteReportTable<T>> {
    let tables: Vec<ReportTable<T>> = messages
        .iter()
        .filter_map(|m| match m {
            ControlMessage::RtReport { table, .. } => Some(table.clone()),
            _ => None,
        })
        .collect();
    assemble_crt(&tables, n_ue_dirs)
}

/// Phase-3 fan-out. A handover produces exactly one X2 path switch to the
/// target SCell and one legacy steer command to the UE.
pub fn emit_commands<T: Real>(outcome: &HandoverOutcome<T>) -> Vec<ControlMessage<T>> {
    match outcome {
        HandoverOutcome::Handover(d) => vec![
            ControlMessage::PathSwitchCommand {
                n_id: d.n_id,
                d_scell: d.d_scell,
            },
            ControlMessage::UeSteerCommand {
                d_ue: d.d_ue,
                n_id: d.n_id,
            },
        ],
        HandoverOutcome::Stay | HandoverOutcome::Detach => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::MemoryCap;

    fn entry(sinr: f64, dir: usize, history: &[f64]) -> RtEntry<f64> {
        let mut e = RtEntry::undetected();
        for h in history {
            e.record(*h, MemoryCap::Unbounded);
        }
        e.sinr_db = Some(sinr);
        e.best_bs_dir = Some(dir);
        e
    }

    fn table(id: u32, rows: Vec<RtEntry<f64>>) -> ReportTable<f64> {
        ReportTable { scell_id: id, rows }
    }

    fn two_cell_crt(a: f64, b: f64) -> CompleteReportTable<f64> {
        let t1 = table(1, vec![entry(a, 3, &[a]), RtEntry::undetected()]);
        let t2 = table(2, vec![RtEntry::undetected(), entry(b, 5, &[b])]);
        assemble_crt(&[t2, t1], 2).unwrap()
    }

    #[test]
    fn single_report_crt() {
        let t = table(
            4,
            vec![
                entry(1.0, 0, &[1.0]),
                RtEntry::undetected(),
                entry(2.0, 7, &[2.0]),
            ],
        );
        let crt = assemble_crt(std::slice::from_ref(&t), 3).unwrap();
        assert_eq!(crt.scell_ids, vec![4]);
        for i in 0..3 {
            assert_eq!(crt.rows[i], vec![t.rows[i].clone()]);
        }
    }

    #[test]
    fn crt_dimensions_and_order() {
        let reports: Vec<_> = [5u32, 2, 9]
            .iter()
            .map(|&id| table(id, vec![RtEntry::undetected(); 8]))
            .collect();
        let crt = assemble_crt(&reports, 8).unwrap();
        assert_eq!(crt.scell_ids, vec![2, 5, 9]);
        assert_eq!(crt.n_ue_dirs(), 8);
        assert!(crt.rows.iter().all(|r| r.len() == 3));
    }

    #[test]
    fn crt_errors() {
        let a = table(1, vec![RtEntry::undetected(); 8]);
        assert_eq!(
            assemble_crt(&[a.clone(), a.clone()], 8),
            Err(Error::DuplicateScellId(1))
        );
        assert!(matches!(
            assemble_crt(&[a], 4),
            Err(Error::RowCountMismatch { .. })
        ));
    }

    #[test]
    fn empty_crt_has_no_cell() {
        let crt = assemble_crt::<f64>(&[], 8).unwrap();
        assert_eq!(crt.n_ue_dirs(), 8);
        assert_eq!(crt.n_scells(), 0);
        assert_eq!(
            select_best(&crt, &SelectionPolicy::MaxSinr),
            Err(Error::NoCellAvailable)
        );
        assert_eq!(
            handover_decision(&crt, None, &SelectionPolicy::MaxSinr),
            HandoverOutcome::Detach
        );
    }

    #[test]
    fn single_detected_entry_wins_under_every_policy() {
        let t = table(
            3,
            vec![
                RtEntry::undetected(),
                entry(-2.0, 4, &[-9.0, 5.0, -2.0]),
                RtEntry::undetected(),
            ],
        );
        let crt = assemble_crt(&[t], 3).unwrap();
        for p in [
            SelectionPolicy::MaxSinr,
            SelectionPolicy::MaxSinrHysteresis { delta_db: 3.0 },
            SelectionPolicy::VariancePenalized { weight: 10.0 },
        ] {
            let d = select_best(&crt, &p).unwrap();
            assert_eq!((d.n_id, d.d_ue, d.d_scell), (3, 1, 4));
        }
    }

    #[test]
    fn variance_penalty_changes_choice() {
        // Entry A: 10 dB, variance 0. Entry B: 12 dB, variance 49
        // (history {5, 19}: mean 12, E[x^2] = 193, 193 - 144 = 49).
        let a = entry(10.0, 1, &[10.0]);
        let b = entry(12.0, 2, &[5.0, 19.0]);
        assert_eq!(b.variance, Some(49.0));
        let crt = assemble_crt(&[table(1, vec![a]), table(2, vec![b])], 1).unwrap();
        let d = select_best(&crt, &SelectionPolicy::MaxSinr).unwrap();
        assert_eq!(d.n_id, 2);
        let p = SelectionPolicy::VariancePenalized { weight: 0.1 };
        assert!((p.score(&crt.rows[0][1]).unwrap() - 7.1).abs() < 1e-12);
        let d = select_best(&crt, &p).unwrap();
        assert_eq!((d.n_id, d.sinr_db), (1, 10.0));
    }

    #[test]
    fn ties_go_to_lower_id_then_lower_direction() {
        let t1 = table(
            7,
            vec![
                RtEntry::undetected(),
                entry(4.0, 2, &[4.0]),
                entry(4.0, 3, &[4.0]),
            ],
        );
        let t2 = table(
            3,
            vec![
                RtEntry::undetected(),
                RtEntry::undetected(),
                entry(4.0, 9, &[4.0]),
            ],
        );
        let crt = assemble_crt(&[t1, t2], 3).unwrap();
        let d = select_best(&crt, &SelectionPolicy::MaxSinr).unwrap();
        assert_eq!((d.n_id, d.d_ue, d.d_scell), (3, 2, 9));
    }

    #[test]
    fn stay_when_best_is_current() {
        let crt = two_cell_crt(12.0, 10.0);
        let current = select_best(&crt, &SelectionPolicy::MaxSinr).unwrap();
        assert_eq!(
            handover_decision(&crt, Some(&current), &SelectionPolicy::MaxSinr),
            HandoverOutcome::Stay
        );
    }

    #[test]
    fn initial_attach_is_handover() {
        let crt = two_cell_crt(12.0, 10.0);
        match handover_decision(&crt, None, &SelectionPolicy::MaxSinr) {
            HandoverOutcome::Handover(d) => assert_eq!((d.n_id, d.d_ue, d.d_scell), (1, 0, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hysteresis_threshold() {
        let policy = SelectionPolicy::MaxSinrHysteresis { delta_db: 1.0 };
        let current = AttachmentDecision {
            n_id: 1,
            d_ue: 0,
            d_scell: 3,
            sinr_db: 10.0,
            variance: Some(0.0),
        };
        let crt = two_cell_crt(10.0, 10.5);
        assert_eq!(
            handover_decision(&crt, Some(&current), &policy),
            HandoverOutcome::Stay
        );
        let crt = two_cell_crt(10.0, 11.5);
        match handover_decision(&crt, Some(&current), &policy) {
            HandoverOutcome::Handover(d) => assert_eq!(d.n_id, 2),
            other => panic!("{other:?}"),
        }
        // Without hysteresis the 10.5 dB rival already wins.
        let crt = two_cell_crt(10.0, 10.5);
        assert!(matches!(
            handover_decision(&crt, Some(&current), &SelectionPolicy::MaxSinr),
            HandoverOutcome::Handover(_)
        ));
    }

    #[test]
    fn serving_cell_lost_triggers_handover_despite_hysteresis() {
        let policy = SelectionPolicy::MaxSinrHysteresis { delta_db: 50.0 };
        let current = AttachmentDecision {
            n_id: 1,
            d_ue: 0,
            d_scell: 3,
            sinr_db: 10.0,
            variance: None,
        };
        let t1 = table(1, vec![RtEntry::undetected(); 2]);
        let t2 = table(2, vec![RtEntry::undetected(), entry(0.0, 5, &[0.0])]);
        let crt = assemble_crt(&[t1, t2], 2).unwrap();
        assert!(matches!(
            handover_decision(&crt, Some(&current), &policy),
            HandoverOutcome::Handover(_)
        ));
    }

    #[test]
    fn all_undetected_detaches() {
        let crt = assemble_crt(&[table(1, vec![RtEntry::undetected(); 8])], 8).unwrap();
        let current = AttachmentDecision {
            n_id: 1,
            d_ue: 0,
            d_scell: 3,
            sinr_db: 10.0,
            variance: None,
        };
        assert_eq!(
            handover_decision(&crt, Some(&current), &SelectionPolicy::MaxSinr),
            HandoverOutcome::Detach
        );
        assert!(emit_commands(&HandoverOutcome::<f64>::Detach).is_empty());
    }

    #[test]
    fn command_fan_out() {
        let d = AttachmentDecision {
            n_id: 3,
            d_ue: 2,
            d_scell: 7,
            sinr_db: 4.0,
            variance: None,
        };
        let msgs = emit_commands(&HandoverOutcome::Handover(d));
        assert_eq!(
            msgs,
            vec![
                ControlMessage::PathSwitchCommand {
                    n_id: 3,
                    d_scell: 7
                },
                ControlMessage::UeSteerCommand { d_ue: 2, n_id: 3 },
            ]
        );
        assert_eq!(msgs[0].channel(), Channel::X2);
        assert_eq!(msgs[1].channel(), Channel::Legacy);
        assert!(emit_commands(&HandoverOutcome::<f64>::Stay).is_empty());
    }

    #[test]
    fn message_json_field_names() {
        let m: ControlMessage<f64> = ControlMessage::PathSwitchCommand {
            n_id: 3,
            d_scell: 7,
        };
        assert_eq!(
            serde_json::to_string(&m).unwrap(),
            r#"{"type":"path_switch_command","n_id":3,"d_scell":7}"#
        );
        let m: ControlMessage<f64> = ControlMessage::UeSteerCommand { d_ue: 2, n_id: 3 };
        assert_eq!(
            serde_json::to_string(&m).unwrap(),
            r#"{"type":"ue_steer_command","d_ue":2,"n_id":3}"#
        );
    }

    #[test]
    fn crt_from_report_messages() {
        let msgs = vec![
            ControlMessage::report(table(2, vec![entry(1.0, 0, &[1.0])])),
            ControlMessage::PathSwitchCommand {
                n_id: 9,
                d_scell: 0,
            },
            ControlMessage::report(table(1, vec![RtEntry::undetected()])),
        ];
        assert!(msgs
            .iter()
            .filter(|m| matches!(m, ControlMessage::RtReport { .. }))
            .all(|m| m.channel() == Channel::X2));
        let crt = crt_from_messages(&msgs, 1).unwrap();
        assert_eq!(crt.scell_ids, vec![1, 2]);
        assert_eq!(crt.available_scells(), vec![2]);
    }

    #[test]
    fn policy_validation() {
        assert!(SelectionPolicy::MaxSinrHysteresis { delta_db: -1.0 }
            .validate()
            .is_err());
        assert!(SelectionPolicy::VariancePenalized { weight: -0.1 }
            .validate()
            .is_err());
        assert!(SelectionPolicy::VariancePenalized { weight: 0.1 }
            .validate()
            .is_ok());
    }
}
