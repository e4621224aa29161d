//! Physical-layer arithmetic: modulation by reach, optical-carrier counts and
//! frequency-slice (FS) sizing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("no modulation format reaches {0} km")]
    NoFeasibleModulation(f64),
    #[error("modulation table must be non-empty")]
    EmptyTable,
    #[error("modulation table must have strictly increasing rates and strictly decreasing reaches")]
    UnorderedTable,
    #[error("grid parameters must be positive")]
    InvalidGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationFormat {
    pub name: String,
    pub gbps_per_oc: u64,
    pub reach_km: f64,
}

/// Modulation formats ordered by increasing bit rate (and decreasing reach).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ModulationFormat>", into = "Vec<ModulationFormat>")]
pub struct ModulationTable {
    entries: Vec<ModulationFormat>,
}

impl ModulationTable {
    pub fn new(entries: Vec<ModulationFormat>) -> Result<Self, PhysicsError> {
        if entries.is_empty() {
            return Err(PhysicsError::EmptyTable);
        }
        let ordered = entries
            .windows(2)
            .all(|w| w[0].gbps_per_oc < w[1].gbps_per_oc && w[0].reach_km > w[1].reach_km);
        if !ordered || entries.iter().any(|e| e.gbps_per_oc == 0 || !(e.reach_km > 0.0)) {
            return Err(PhysicsError::UnorderedTable);
        }
        Ok(Self { entries })
    }

    /// DP-BPSK/QPSK/8QAM/16QAM at 32 Gbaud with OSNR-bounded reaches.
    pub fn standard() -> Self {
        let e = |name: &str, gbps_per_oc, reach_km| ModulationFormat {
            name: name.to_string(),
            gbps_per_oc,
            reach_km,
        };
        Self {
            entries: vec![
                e("DP-BPSK", 50, 6300.0),
                e("DP-QPSK", 100, 3500.0),
                e("DP-8QAM", 150, 1200.0),
                e("DP-16QAM", 200, 600.0),
            ],
        }
    }

    pub fn entries(&self) -> &[ModulationFormat] {
        &self.entries
    }

    /// Index of the fastest format whose reach covers `length_km` (inclusive).
    pub fn highest_feasible(&self, length_km: f64) -> Result<usize, PhysicsError> {
        self.entries
            .iter()
            .rposition(|e| e.reach_km >= length_km)
            .ok_or(PhysicsError::NoFeasibleModulation(length_km))
    }

    pub fn get(&self, idx: usize) -> &ModulationFormat {
        &self.entries[idx]
    }

    pub fn fastest(&self) -> &ModulationFormat {
        self.entries.last().expect("table is non-empty")
    }
}

impl TryFrom<Vec<ModulationFormat>> for ModulationTable {
    type Error = PhysicsError;

    fn try_from(v: Vec<ModulationFormat>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<ModulationTable> for Vec<ModulationFormat> {
    fn from(t: ModulationTable) -> Self {
        t.entries
    }
}

/// Spectrum grid of one lane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    /// Total FSs per lane (`F_max`).
    pub fs_per_lane: u32,
    /// FSs occupied by one optical carrier (`F_OC`).
    pub fs_per_oc: u32,
    /// FSs of switching guard band (`F_GB`).
    pub guard_fs: u32,
    pub fs_width_ghz: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            fs_per_lane: 320,
            fs_per_oc: 3,
            guard_fs: 1,
            fs_width_ghz: 12.5,
        }
    }
}

impl GridParams {
    /// Highest FS index (`f_max = F_max - 1`).
    pub fn max_index(&self) -> u32 {
        self.fs_per_lane - 1
    }

    /// Carriers that fit in a whole lane.
    pub fn ocs_per_lane(&self) -> u32 {
        self.fs_per_lane / self.fs_per_oc
    }

    pub fn fs_required(&self, ocs: u32) -> u32 {
        ocs * self.fs_per_oc
    }

    pub fn ghz_to_fs(&self, ghz: f64) -> u32 {
        (ghz / self.fs_width_ghz).round() as u32
    }
}

/// Number of carriers needed to carry `gbps` at `gbps_per_oc` each.
pub fn ocs_required(gbps: u64, gbps_per_oc: u64) -> u32 {
    gbps.div_ceil(gbps_per_oc) as u32
}

/// Modulation table plus grid; the full physics configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Physics {
    pub modulation: ModulationTable,
    #[serde(default)]
    pub grid: GridParams,
}

impl Default for Physics {
    fn default() -> Self {
        Self::standard()
    }
}

impl Physics {
    pub fn standard() -> Self {
        Self {
            modulation: ModulationTable::standard(),
            grid: GridParams::default(),
        }
    }

    /// Fixed-capacity lanes: 320 FS (4 THz) carrying 8 Tbps whatever the path
    /// length, as 80 carriers of 100 Gbps x 4 FS.
    pub fn simplified() -> Self {
        Self::fixed_capacity(
            100,
            GridParams {
                fs_per_oc: 4,
                ..GridParams::default()
            },
        )
    }

    /// A single length-independent format of `gbps_per_oc` on `grid`.
    pub fn fixed_capacity(gbps_per_oc: u64, grid: GridParams) -> Self {
        Self {
            modulation: ModulationTable {
                entries: vec![ModulationFormat {
                    name: "fixed".to_string(),
                    gbps_per_oc,
                    reach_km: f64::MAX,
                }],
            },
            grid,
        }
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        let g = &self.grid;
        if g.fs_per_lane == 0 || g.fs_per_oc == 0 || g.fs_per_oc > g.fs_per_lane || !(g.fs_width_ghz > 0.0) {
            return Err(PhysicsError::InvalidGrid);
        }
        ModulationTable::new(self.modulation.entries.clone()).map(|_| ())
    }

    pub fn highest_feasible_modulation(&self, length_km: f64) -> Result<&ModulationFormat, PhysicsError> {
        self.modulation
            .highest_feasible(length_km)
            .map(|i| self.modulation.get(i))
    }

    /// Traffic a path of `length_km` can carry in `available_fs` contiguous
    /// FSs (no guard band inside a Type I/II spatial channel).
    pub fn supportable_traffic(&self, length_km: f64, available_fs: u32) -> Result<u64, PhysicsError> {
        let m = self.highest_feasible_modulation(length_km)?;
        Ok(self.supportable_with(m.gbps_per_oc, available_fs))
    }

    pub fn supportable_with(&self, gbps_per_oc: u64, available_fs: u32) -> u64 {
        u64::from(available_fs / self.grid.fs_per_oc) * gbps_per_oc
    }
}
