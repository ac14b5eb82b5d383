use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Upload,
    Download,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Upload => "upload",
            Direction::Download => "download",
        })
    }
}

/// One long-lived TCP connection, terminated at its own STA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connection {
    pub direction: Direction,
    /// Maximum advertised receive window, in segments.
    pub max_window_pkts: u32,
}

/// The set of STAs associated with the AP, one TCP connection each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    connections: Vec<Connection>,
}

impl Scenario {
    pub fn new(connections: Vec<Connection>) -> Result<Self> {
        if connections.is_empty() {
            return Err(Error::InvalidScenario("no connections".into()));
        }
        if let Some(i) = connections.iter().position(|c| c.max_window_pkts == 0) {
            return Err(Error::InvalidScenario(format!("connection {i} has a zero window")));
        }
        Ok(Scenario { connections })
    }

    /// Builds a scenario from per-connection download and upload windows.
    pub fn from_windows(downloads: &[u32], uploads: &[u32]) -> Result<Self> {
        let conns = downloads
            .iter()
            .map(|&w| Connection { direction: Direction::Download, max_window_pkts: w })
            .chain(
                uploads
                    .iter()
                    .map(|&w| Connection { direction: Direction::Upload, max_window_pkts: w }),
            )
            .collect();
        Scenario::new(conns)
    }

    /// `(window, downloaders, uploaders)` triples, e.g. one row of the evaluation tables.
    pub fn from_counts(rows: &[(u32, u32, u32)]) -> Result<Self> {
        let mut downloads = Vec::new();
        let mut uploads = Vec::new();
        for &(window, down, up) in rows {
            downloads.extend(std::iter::repeat_n(window, down as usize));
            uploads.extend(std::iter::repeat_n(window, up as usize));
        }
        Scenario::from_windows(&downloads, &uploads)
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    pub fn windows(&self, direction: Direction) -> impl Iterator<Item = u32> + '_ {
        self.connections
            .iter()
            .filter(move |c| c.direction == direction)
            .map(|c| c.max_window_pkts)
    }

    pub fn count(&self, direction: Direction) -> usize {
        self.windows(direction).count()
    }

    pub fn uploaders(&self) -> usize {
        self.count(Direction::Upload)
    }

    pub fn downloaders(&self) -> usize {
        self.count(Direction::Download)
    }

    pub fn window_total(&self, direction: Direction) -> u64 {
        self.windows(direction).map(u64::from).sum()
    }

    pub fn upload_window(&self) -> u64 {
        self.window_total(Direction::Upload)
    }

    pub fn download_window(&self) -> u64 {
        self.window_total(Direction::Download)
    }

    pub fn total_window(&self) -> u64 {
        self.upload_window() + self.download_window()
    }

    /// Fraction of AP transmissions that carry download data.
    pub fn p_download(&self) -> f64 {
        self.download_window() as f64 / self.total_window() as f64
    }

    /// Fraction of AP transmissions that carry TCP-ACKs for uploads.
    pub fn p_upload(&self) -> f64 {
        self.upload_window() as f64 / self.total_window() as f64
    }

    /// Same scenario with every window multiplied by `factor`.
    pub fn scaled(&self, factor: u32) -> Result<Self> {
        Scenario::new(
            self.connections
                .iter()
                .map(|c| Connection { max_window_pkts: c.max_window_pkts * factor, ..*c })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_one_first_row_totals() {
        let s = Scenario::from_counts(&[(24, 1, 4), (20, 2, 2), (16, 3, 3)]).unwrap();
        assert_eq!(s.downloaders(), 6);
        assert_eq!(s.uploaders(), 9);
        assert_eq!(s.download_window(), 112);
        assert_eq!(s.upload_window(), 184);
        assert_eq!(s.total_window(), 296);
        assert!((s.p_download() + s.p_upload() - 1.0).abs() < 1e-15);
        assert_eq!(s.p_download(), 112.0 / 296.0);
    }

    #[test]
    fn rejects_empty_and_zero_windows() {
        assert!(Scenario::new(vec![]).is_err());
        assert!(Scenario::from_windows(&[24, 0], &[]).is_err());
    }

    #[test]
    fn one_sided_scenarios() {
        let s = Scenario::from_windows(&[10, 20], &[]).unwrap();
        assert_eq!(s.p_download(), 1.0);
        assert_eq!(s.p_upload(), 0.0);
    }
}
