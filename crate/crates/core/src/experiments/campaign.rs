//! Density sweeps and the curves derived from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::trial::{DesignPoint, Experiment, TrialResult};
use crate::error::Result;
use crate::scalar::Real;

/// Mean of a per-trial quantity with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary<T> {
    pub mean: Option<T>,
    /// `s / sqrt(n)` with the `n - 1` sample deviation; needs two values.
    pub stderr: Option<T>,
    pub n: usize,
}

impl<T: Real> Summary<T> {
    pub fn of(values: &[T]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: None,
                stderr: None,
                n,
            };
        }
        let count = T::from_count(n);
        let mean = values.iter().copied().sum::<T>() / count;
        let stderr = (n >= 2).then(|| {
            let ss = values.iter().map(|v| (*v - mean) * (*v - mean)).sum::<T>();
            (ss / T::from_count(n - 1) / count).sqrt()
        });
        Self {
            mean: Some(mean),
            stderr,
            n,
        }
    }
}

fn by_index<T: Real>(results: &[TrialResult<T>]) -> Vec<&TrialResult<T>> {
    let mut sorted: Vec<&TrialResult<T>> = results.iter().collect();
    sorted.sort_by_key(|r| r.trial_index);
    sorted
}

/// Mean serving distance over the trials that attached. `mean` is `None`
/// when every trial detached.
pub fn mean_serving_distance<T: Real>(results: &[TrialResult<T>]) -> Summary<T> {
    let values: Vec<T> = by_index(results)
        .into_iter()
        .filter_map(|r| r.serving_distance_m)
        .collect();
    Summary::of(&values)
}

/// Fraction of trials that ended without an SCell.
pub fn detach_fraction<T: Real>(results: &[TrialResult<T>]) -> Summary<T> {
    let values: Vec<T> = by_index(results)
        .into_iter()
        .map(|r| {
            if r.decision.is_none() {
                T::one()
            } else {
                T::zero()
            }
        })
        .collect();
    Summary::of(&values)
}

/// Mean number of available SCells, zero-available trials included.
pub fn avg_available_cells<T: Real>(results: &[TrialResult<T>]) -> Summary<T> {
    let values: Vec<T> = by_index(results)
        .into_iter()
        .map(|r| T::from_count(r.n_available))
        .collect();
    Summary::of(&values)
}

pub const METRIC_DISTANCE: &str = "mean_serving_distance_m";
pub const METRIC_DETACH: &str = "detach_fraction";
pub const METRIC_AVAILABLE: &str = "avg_available_cells";

/// Metric name of the available-cells curve at a given signal duration,
/// e.g. `avg_available_cells_tsig_100us`.
pub fn available_metric<T: Real>(t_sig_s: T) -> String {
    let us = t_sig_s.to_f64_lossless() * 1e6;
    let us = (us * 1e6).round() / 1e6;
    format!("{METRIC_AVAILABLE}_tsig_{us}us")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint<T> {
    pub lambda_bs: T,
    pub metric: String,
    pub mean: Option<T>,
    pub stderr: Option<T>,
    pub n_trials: usize,
}

impl<T: Real> CurvePoint<T> {
    fn new(lambda_bs: T, metric: impl Into<String>, s: Summary<T>) -> Self {
        Self {
            lambda_bs,
            metric: metric.into(),
            mean: s.mean,
            stderr: s.stderr,
            n_trials: s.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult<T> {
    pub seed: u64,
    pub n_trials: usize,
    pub points: Vec<CurvePoint<T>>,
}

pub const CSV_HEADER: &str = "lambda_bs,metric,mean,stderr,n_trials";

fn opt<T: Real>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl<T: Real> CampaignResult<T> {
    pub fn curve(&self, metric: &str) -> Vec<&CurvePoint<T>> {
        self.points.iter().filter(|p| p.metric == metric).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.lambda_bs,
                p.metric,
                opt(p.mean),
                opt(p.stderr),
                p.n_trials
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("campaign result serializes")
    }
}

/// Runs `n` trials at `point`, in parallel on the current rayon pool.
/// Results come back in trial-index order whatever the scheduling.
pub fn run_point<T: Real>(
    experiment: &Experiment<T>,
    point: DesignPoint<T>,
    n: usize,
) -> Result<Vec<TrialResult<T>>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| experiment.run_trial(point, i))
        .collect()
}

/// Every density of the grid at every signal duration. Per density the
/// output holds, in order: serving distance and detach fraction at the base
/// duration, available cells at the base duration, then available cells
/// for each duration of `signal_durations()`.
pub fn run_campaign<T: Real>(cfg: &SimConfig<T>) -> Result<CampaignResult<T>> {
    let experiment = Experiment::new(cfg.clone())?;
    let durations = cfg.signal_durations();
    let mut points = Vec::new();
    for &lambda_bs in &cfg.lambda_bs {
        let runs = durations
            .iter()
            .map(|&t_sig_s| {
                run_point(
                    &experiment,
                    DesignPoint { lambda_bs, t_sig_s },
                    cfg.n_trials,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let base = &runs[0];
        points.push(CurvePoint::new(
            lambda_bs,
            METRIC_DISTANCE,
            mean_serving_distance(base),
        ));
        points.push(CurvePoint::new(
            lambda_bs,
            METRIC_DETACH,
            detach_fraction(base),
        ));
        points.push(CurvePoint::new(
            lambda_bs,
            METRIC_AVAILABLE,
            avg_available_cells(base),
        ));
        for (t_sig, results) in durations.iter().zip(&runs) {
            points.push(CurvePoint::new(
                lambda_bs,
                available_metric(*t_sig),
                avg_available_cells(results),
            ));
        }
    }
    Ok(CampaignResult {
        seed: cfg.seed,
        n_trials: cfg.n_trials,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(i: u64, distance: Option<f64>, n_available: usize) -> TrialResult<f64> {
        use crate::controller::AttachmentDecision;
        TrialResult {
            trial_index: i,
            serving_distance_m: distance,
            n_available,
            decision: distance.map(|_| AttachmentDecision {
                n_id: 1,
                d_ue: 0,
                d_scell: 0,
                sinr_db: 3.0,
                variance: None,
            }),
        }
    }

    #[test]
    fn serving_distance_examples() {
        let s = mean_serving_distance(&[result(0, Some(100.0), 1), result(1, Some(200.0), 2)]);
        assert_eq!(s.mean, Some(150.0));
        let s = mean_serving_distance(&[result(0, Some(42.0), 1)]);
        assert_eq!((s.mean, s.stderr, s.n), (Some(42.0), None, 1));
        let mixed = [
            result(0, Some(100.0), 1),
            result(1, None, 0),
            result(2, Some(200.0), 1),
        ];
        assert_eq!(mean_serving_distance(&mixed).mean, Some(150.0));
        let d = detach_fraction(&mixed);
        assert!((d.mean.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(mean_serving_distance(&[result(0, None, 0)]).mean, None);
    }

    #[test]
    fn available_examples() {
        let r = [
            result(0, Some(1.0), 0),
            result(1, Some(1.0), 2),
            result(2, Some(1.0), 4),
        ];
        assert_eq!(avg_available_cells(&r).mean, Some(2.0));
        let zeros = [result(0, None, 0), result(1, None, 0)];
        assert_eq!(avg_available_cells(&zeros).mean, Some(0.0));
    }

    #[test]
    fn standard_error_formula() {
        // values {1, 2, 3, 4}: s^2 = 5/3, se = sqrt(5/12)
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert!((s.stderr.unwrap() - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn aggregation_ignores_order() {
        let mut r: Vec<_> = (0..50)
            .map(|i| {
                result(
                    i,
                    (i % 7 != 0).then_some(10.0 + (i * 37 % 101) as f64 / 3.0),
                    (i % 5) as usize,
                )
            })
            .collect();
        let a = (
            mean_serving_distance(&r),
            avg_available_cells(&r),
            detach_fraction(&r),
        );
        r.reverse();
        r.swap(3, 30);
        let b = (
            mean_serving_distance(&r),
            avg_available_cells(&r),
            detach_fraction(&r),
        );
        assert_eq!(a, b);
    }

    #[test]
    fn metric_names() {
        assert_eq!(available_metric(10e-6), "avg_available_cells_tsig_10us");
        assert_eq!(available_metric(100e-6), "avg_available_cells_tsig_100us");
        assert_eq!(available_metric(2.5e-6), "avg_available_cells_tsig_2.5us");
    }
}
