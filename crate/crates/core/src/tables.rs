//! Reference scenarios and published values for the evaluation tables.
//!
//! Each scenario lists how many downloading and uploading STAs use a
//! 24-, 20- and 16-segment receive window.

use serde::Serialize;

use crate::error::Result;
use crate::phy::Standard;
use crate::scenario::Scenario;

pub const WINDOW_SIZES: [u32; 3] = [24, 20, 16];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Published {
    pub analysis_mbps: f64,
    pub simulation_mbps: f64,
    pub simulation_ci_mbps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitPublished {
    pub download: Published,
    pub upload: Published,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub standard: Standard,
    /// Downloaders per window size, in [`WINDOW_SIZES`] order.
    pub downloaders: [u32; 3],
    pub uploaders: [u32; 3],
    pub aggregate: Published,
    pub split: Option<SplitPublished>,
}

impl TableRow {
    pub fn scenario(&self) -> Result<Scenario> {
        let rows: Vec<(u32, u32, u32)> = WINDOW_SIZES
            .iter()
            .zip(self.downloaders.iter().zip(&self.uploaders))
            .map(|(&w, (&d, &u))| (w, d, u))
            .collect();
        Scenario::from_counts(&rows)
    }
}

const fn pub_(analysis_mbps: f64, simulation_mbps: f64, simulation_ci_mbps: f64) -> Published {
    Published { analysis_mbps, simulation_mbps, simulation_ci_mbps }
}

const fn row(standard: Standard, downloaders: [u32; 3], uploaders: [u32; 3], aggregate: Published) -> TableRow {
    TableRow { standard, downloaders, uploaders, aggregate, split: None }
}

const fn split_row(
    standard: Standard,
    downloaders: [u32; 3],
    uploaders: [u32; 3],
    aggregate: Published,
    download: Published,
    upload: Published,
) -> TableRow {
    TableRow { standard, downloaders, uploaders, aggregate, split: Some(SplitPublished { download, upload }) }
}

/// 802.11b aggregate throughput.
pub const TABLE_1: [TableRow; 6] = [
    row(Standard::B11, [1, 2, 3], [4, 2, 3], pub_(4.38, 4.37, 0.01)),
    row(Standard::B11, [2, 1, 3], [4, 2, 3], pub_(4.38, 4.37, 0.01)),
    row(Standard::B5_5, [3, 2, 1], [4, 2, 3], pub_(3.04, 3.04, 0.01)),
    row(Standard::B5_5, [4, 3, 2], [1, 3, 2], pub_(3.04, 3.04, 0.01)),
    row(Standard::B2, [3, 2, 4], [3, 1, 2], pub_(1.5, 1.5, 0.001)),
    row(Standard::B2, [3, 2, 4], [3, 2, 1], pub_(1.5, 1.5, 0.001)),
];

/// 802.11g aggregate throughput with the download/upload split.
pub const TABLE_2: [TableRow; 8] = [
    split_row(Standard::G54, [1, 2, 3], [4, 2, 3], pub_(22.61, 22.5, 0.01), pub_(8.56, 8.51, 0.01), pub_(13.987, 14.055, 0.01)),
    split_row(Standard::G54, [4, 1, 2], [2, 1, 3], pub_(22.61, 22.56, 0.01), pub_(12.68, 12.65, 0.01), pub_(9.935, 9.9127, 0.01)),
    split_row(Standard::G48, [3, 2, 1], [4, 2, 3], pub_(19.68, 19.54, 0.01), pub_(8.074, 8.016, 0.01), pub_(11.524, 11.606, 0.01)),
    split_row(Standard::G48, [4, 3, 2], [1, 3, 4], pub_(19.68, 19.53, 0.01), pub_(11.011, 10.94, 0.01), pub_(8.603, 8.6686, 0.01)),
    split_row(Standard::G36, [3, 2, 1], [4, 2, 3], pub_(14.94, 14.92, 0.01), pub_(6.13, 6.12, 0.01), pub_(8.799, 8.812, 0.01)),
    split_row(Standard::G36, [4, 3, 2], [1, 3, 2], pub_(14.94, 14.92, 0.01), pub_(9.24, 9.23, 0.01), pub_(5.693, 5.701, 0.01)),
    split_row(Standard::G12, [3, 2, 4], [3, 1, 2], pub_(5.16, 5.15, 0.001), pub_(3.027, 3.021, 0.001), pub_(2.127, 2.133, 0.001)),
    split_row(Standard::G12, [3, 2, 1], [3, 2, 4], pub_(5.16, 5.14, 0.001), pub_(2.173, 2.164, 0.001), pub_(2.976, 2.987, 0.001)),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Preset {
    Table1,
    Table2,
    Table3,
}

impl Preset {
    pub fn rows(self) -> &'static [TableRow] {
        match self {
            Preset::Table1 => &TABLE_1,
            Preset::Table2 | Preset::Table3 => &TABLE_2,
        }
    }

    /// Whether the preset reports the download/upload split instead of the aggregate.
    pub fn is_split(self) -> bool {
        self == Preset::Table3
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Table1 => "table1",
            Preset::Table2 => "table2",
            Preset::Table3 => "table3",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_row_matches_connection_list() {
        let s = TABLE_1[0].scenario().unwrap();
        let expect = Scenario::from_windows(&[24, 20, 20, 16, 16, 16], &[24, 24, 24, 24, 20, 20, 16, 16, 16]).unwrap();
        assert_eq!(s, expect);
    }

    #[test]
    fn every_row_builds() {
        for r in TABLE_1.iter().chain(&TABLE_2) {
            let s = r.scenario().unwrap();
            assert!(s.download_window() > 0 && s.upload_window() > 0);
        }
        assert!(TABLE_2.iter().all(|r| r.split.is_some()));
    }
}
