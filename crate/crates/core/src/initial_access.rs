//! Analytical initial-access delay for uplink- and downlink-based designs.
//!
//! Exhaustive search covers `N_BS * N_UE` direction pairs. A receiver that
//! observes `L` directions per opportunity needs `N_BS * N_UE / L` scans,
//! one every `T_per`, so the access delay is `N_BS * N_UE * T_per / L`.
//! Only the receiver's architecture matters: the SCell in the uplink
//! design, the UE in the downlink design.

use serde::{Deserialize, Serialize};

use crate::beamforming::BfArchitecture;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IaDesign {
    /// SCells transmit synchronization signals, the UE scans.
    DownlinkBased,
    /// The UE transmits random access preambles, SCells scan.
    UplinkBased,
}

impl IaDesign {
    pub const ALL: [IaDesign; 2] = [IaDesign::DownlinkBased, IaDesign::UplinkBased];

    pub fn label(self) -> &'static str {
        match self {
            IaDesign::DownlinkBased => "DL-based",
            IaDesign::UplinkBased => "UL-based",
        }
    }
}

/// Beamforming hardware at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArchitecturePair {
    pub scell: BfArchitecture,
    pub ue: BfArchitecture,
}

impl ArchitecturePair {
    /// The four combinations in (SCell, UE) order: AA, AD, DA, DD.
    pub const ALL: [ArchitecturePair; 4] = [
        ArchitecturePair {
            scell: BfArchitecture::Analog,
            ue: BfArchitecture::Analog,
        },
        ArchitecturePair {
            scell: BfArchitecture::Analog,
            ue: BfArchitecture::Digital,
        },
        ArchitecturePair {
            scell: BfArchitecture::Digital,
            ue: BfArchitecture::Analog,
        },
        ArchitecturePair {
            scell: BfArchitecture::Digital,
            ue: BfArchitecture::Digital,
        },
    ];
}

/// Directions the receiving side observes per scanning opportunity.
pub fn simultaneous_directions(
    design: IaDesign,
    scell: BfArchitecture,
    ue: BfArchitecture,
    n_bs: usize,
    n_ue: usize,
) -> Result<usize> {
    check_counts(n_bs, n_ue)?;
    let (receiver, n_rx) = match design {
        IaDesign::UplinkBased => (scell, n_bs),
        IaDesign::DownlinkBased => (ue, n_ue),
    };
    Ok(match receiver {
        BfArchitecture::Analog => 1,
        BfArchitecture::Digital => n_rx,
    })
}

fn check_counts(n_bs: usize, n_ue: usize) -> Result<()> {
    if n_bs == 0 {
        return Err(Error::invalid("n_bs", "must be >= 1"));
    }
    if n_ue == 0 {
        return Err(Error::invalid("n_ue", "must be >= 1"));
    }
    Ok(())
}

/// Scans needed to cover every direction pair: `n_bs * n_ue / L`.
pub fn scan_count(
    design: IaDesign,
    scell: BfArchitecture,
    ue: BfArchitecture,
    n_bs: usize,
    n_ue: usize,
) -> Result<usize> {
    let l = simultaneous_directions(design, scell, ue, n_bs, n_ue)?;
    Ok(n_bs * n_ue / l)
}

/// Scan count for a hybrid receiver observing `l` directions at once.
/// `l` must lie in `1..=receiver directions`; a partial final scan counts.
pub fn scan_count_hybrid(design: IaDesign, n_bs: usize, n_ue: usize, l: usize) -> Result<usize> {
    check_counts(n_bs, n_ue)?;
    let n_rx = match design {
        IaDesign::UplinkBased => n_bs,
        IaDesign::DownlinkBased => n_ue,
    };
    if l == 0 || l > n_rx {
        return Err(Error::invalid("l", format!("must be in 1..={n_rx}")));
    }
    Ok((n_bs * n_ue).div_ceil(l))
}

/// `scans * t_per`, seconds.
pub fn access_delay<T: Real>(scans: usize, t_per: T) -> Result<T> {
    if !(t_per > T::zero() && t_per.is_finite()) {
        return Err(Error::invalid("t_per", "must be positive"));
    }
    Ok(T::from_count(scans) * t_per)
}

/// Sounding overhead `t_sig / t_per`.
pub fn overhead<T: Real>(t_sig: T, t_per: T) -> Result<T> {
    if !(t_sig > T::zero()) {
        return Err(Error::invalid("t_sig", "must be positive"));
    }
    if !(t_per > T::zero()) {
        return Err(Error::invalid("t_per", "must be positive"));
    }
    if t_sig > t_per {
        return Err(Error::invalid("t_sig", "must not exceed t_per"));
    }
    Ok(t_sig / t_per)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayCell<T> {
    pub design: IaDesign,
    pub simultaneous_directions: usize,
    pub scans: usize,
    pub delay_s: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayRow<T> {
    pub architectures: ArchitecturePair,
    pub downlink: DelayCell<T>,
    pub uplink: DelayCell<T>,
}

/// Full architecture x design comparison, rows in [`ArchitecturePair::ALL`]
/// order.
pub fn delay_table<T: Real>(n_bs: usize, n_ue: usize, t_per: T) -> Result<Vec<DelayRow<T>>> {
    ArchitecturePair::ALL
        .iter()
        .map(|&arch| {
            let cell = |design| -> Result<DelayCell<T>> {
                let l = simultaneous_directions(design, arch.scell, arch.ue, n_bs, n_ue)?;
                let scans = scan_count(design, arch.scell, arch.ue, n_bs, n_ue)?;
                Ok(DelayCell {
                    design,
                    simultaneous_directions: l,
                    scans,
                    delay_s: access_delay(scans, t_per)?,
                })
            };
            Ok(DelayRow {
                architectures: arch,
                downlink: cell(IaDesign::DownlinkBased)?,
                uplink: cell(IaDesign::UplinkBased)?,
            })
        })
        .collect()
}

/// Formats seconds as milliseconds with trailing zeros trimmed
/// (`0.0256` -> `"25.6"`).
pub fn format_ms<T: Real>(seconds: T) -> String {
    let ms = seconds.to_f64_lossless() * 1e3;
    let s = format!("{ms:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}
