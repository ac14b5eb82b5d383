//! PHY/MAC timing for 802.11b and 802.11g.
//!
//! All durations are in seconds, rates in bits per second and sizes in bytes.
//! Every frame carries a PLCP preamble and PHY header ahead of its payload;
//! 802.11g folds both into a single 20 µs OFDM header (`preamble_time_s = 0`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A built-in PHY standard at a fixed data rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Standard {
    B11,
    B5_5,
    B2,
    G54,
    G48,
    G36,
    G24,
    G18,
    G12,
    G6,
}

impl Standard {
    pub const ALL: [Standard; 10] = [
        Standard::B11,
        Standard::B5_5,
        Standard::B2,
        Standard::G54,
        Standard::G48,
        Standard::G36,
        Standard::G24,
        Standard::G18,
        Standard::G12,
        Standard::G6,
    ];

    pub fn data_rate_bps(self) -> f64 {
        match self {
            Standard::B11 => 11e6,
            Standard::B5_5 => 5.5e6,
            Standard::B2 => 2e6,
            Standard::G54 => 54e6,
            Standard::G48 => 48e6,
            Standard::G36 => 36e6,
            Standard::G24 => 24e6,
            Standard::G18 => 18e6,
            Standard::G12 => 12e6,
            Standard::G6 => 6e6,
        }
    }

    pub fn is_ofdm(self) -> bool {
        !matches!(self, Standard::B11 | Standard::B5_5 | Standard::B2)
    }

    pub fn profile(self) -> PhyProfile {
        builtin_profile(self)
    }
}

impl fmt::Display for Standard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = if self.is_ofdm() { "802.11g" } else { "802.11b" };
        let mbps = self.data_rate_bps() / 1e6;
        write!(f, "{family}@{mbps}")
    }
}

impl FromStr for Standard {
    type Err = Error;

    /// Accepts `802.11b@11`, `802.11g@54`, `b@5.5` or the variant name (`B5_5`).
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if let Some(std) = Standard::ALL
            .iter()
            .copied()
            .find(|std| std.to_string() == trimmed || format!("{std:?}") == trimmed)
        {
            return Ok(std);
        }
        let (family, rate) = trimmed
            .split_once('@')
            .ok_or_else(|| Error::InvalidProfile(format!("unknown profile '{s}'")))?;
        let ofdm = match family.trim_start_matches("802.11") {
            "b" => false,
            "g" => true,
            _ => return Err(Error::InvalidProfile(format!("unknown PHY family in '{s}'"))),
        };
        let mbps: f64 = rate
            .parse()
            .map_err(|_| Error::InvalidProfile(format!("bad data rate in '{s}'")))?;
        Standard::ALL
            .iter()
            .copied()
            .find(|std| std.is_ofdm() == ofdm && std.data_rate_bps() == mbps * 1e6)
            .ok_or_else(|| Error::InvalidProfile(format!("no built-in profile for '{s}'")))
    }
}

/// How the MAC-level ACK that follows a TCP-ACK frame is timed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum TimingFidelity {
    /// MAC-ACK sent at the data rate.
    DataRateAck,
    /// MAC-ACK sent at the control rate, as the standard prescribes.
    #[default]
    Standards,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhyProfile {
    pub data_rate_bps: f64,
    pub control_rate_bps: f64,
    pub preamble_time_s: f64,
    pub phy_header_time_s: f64,
    pub slot_time_s: f64,
    pub sifs_s: f64,
    pub difs_s: f64,
    pub eifs_s: f64,
    pub cw_min: u32,
    pub cw_max: u32,
    pub mac_header_bytes: u32,
    pub rts_bytes: u32,
    pub cts_bytes: u32,
    pub mac_ack_bytes: u32,
    pub ip_header_bytes: u32,
    pub tcp_header_bytes: u32,
    pub tcp_ack_payload_bytes: u32,
    pub tcp_data_payload_bytes: u32,
}

const US: f64 = 1e-6;

pub fn builtin_profile(standard: Standard) -> PhyProfile {
    let common = PhyProfile {
        data_rate_bps: standard.data_rate_bps(),
        control_rate_bps: 2e6,
        preamble_time_s: 144.0 * US,
        phy_header_time_s: 48.0 * US,
        slot_time_s: 20.0 * US,
        sifs_s: 10.0 * US,
        difs_s: 50.0 * US,
        eifs_s: 364.0 * US,
        cw_min: 31,
        cw_max: 1023,
        mac_header_bytes: 34,
        rts_bytes: 20,
        cts_bytes: 14,
        mac_ack_bytes: 14,
        ip_header_bytes: 20,
        tcp_header_bytes: 20,
        tcp_ack_payload_bytes: 20,
        tcp_data_payload_bytes: 1460,
    };
    if standard.is_ofdm() {
        PhyProfile {
            control_rate_bps: 6e6,
            preamble_time_s: 0.0,
            phy_header_time_s: 20.0 * US,
            slot_time_s: 9.0 * US,
            difs_s: 28.0 * US,
            cw_min: 15,
            ..common
        }
    } else {
        common
    }
}

impl PhyProfile {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidProfile(msg.to_string()));
        let positive = [
            ("data_rate_bps", self.data_rate_bps),
            ("control_rate_bps", self.control_rate_bps),
            ("phy_header_time_s", self.phy_header_time_s),
            ("slot_time_s", self.slot_time_s),
            ("sifs_s", self.sifs_s),
            ("difs_s", self.difs_s),
            ("eifs_s", self.eifs_s),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidProfile(format!("{name} must be > 0, got {value}")));
            }
        }
        if !(self.preamble_time_s.is_finite() && self.preamble_time_s >= 0.0) {
            return bad("preamble_time_s must be >= 0");
        }
        let sizes = [
            self.mac_header_bytes,
            self.rts_bytes,
            self.cts_bytes,
            self.mac_ack_bytes,
            self.ip_header_bytes,
            self.tcp_header_bytes,
            self.tcp_ack_payload_bytes,
            self.tcp_data_payload_bytes,
        ];
        if sizes.contains(&0) {
            return bad("all frame sizes must be > 0");
        }
        if self.cw_min >= self.cw_max {
            return bad("cw_min must be < cw_max");
        }
        if !(self.cw_min + 1).is_power_of_two() || !(self.cw_max + 1).is_power_of_two() {
            return bad("cw_min+1 and cw_max+1 must be powers of two");
        }
        if self.data_rate_bps < self.control_rate_bps {
            return bad("data rate must be >= control rate");
        }
        Ok(())
    }

    /// Number of backoff doublings from `cw_min` to `cw_max`.
    pub fn backoff_stages(&self) -> u32 {
        ((self.cw_max + 1) / (self.cw_min + 1)).trailing_zeros()
    }

    /// MAC frame carrying one TCP data segment.
    pub fn data_frame_bytes(&self) -> u32 {
        self.mac_header_bytes + self.ip_header_bytes + self.tcp_header_bytes + self.tcp_data_payload_bytes
    }

    /// MAC frame carrying one TCP-ACK.
    pub fn tcp_ack_frame_bytes(&self) -> u32 {
        self.mac_header_bytes + self.ip_header_bytes + self.tcp_ack_payload_bytes
    }

    /// TCP payload bits delivered per segment.
    pub fn segment_bits(&self) -> f64 {
        8.0 * f64::from(self.tcp_data_payload_bytes)
    }
}

/// Preamble + PHY header + payload time for a frame of `bytes` at `rate_bps`.
///
/// Panics if `bytes` is zero or the rate is not positive.
pub fn frame_airtime(bytes: u32, rate_bps: f64, profile: &PhyProfile) -> f64 {
    assert!(bytes > 0, "frame must carry at least one byte");
    assert!(rate_bps > 0.0, "rate must be positive");
    profile.preamble_time_s + profile.phy_header_time_s + 8.0 * f64::from(bytes) / rate_bps
}

/// RTS/CTS/DATA/ACK exchange for one TCP data segment, DIFS included.
pub fn t_data(profile: &PhyProfile) -> f64 {
    let rc = profile.control_rate_bps;
    frame_airtime(profile.rts_bytes, rc, profile)
        + profile.sifs_s
        + frame_airtime(profile.cts_bytes, rc, profile)
        + profile.sifs_s
        + frame_airtime(profile.data_frame_bytes(), profile.data_rate_bps, profile)
        + profile.sifs_s
        + frame_airtime(profile.mac_ack_bytes, rc, profile)
        + profile.difs_s
}

/// Basic-access exchange for one TCP-ACK, DIFS included.
pub fn t_ack(profile: &PhyProfile, fidelity: TimingFidelity) -> f64 {
    let mac_ack_rate = match fidelity {
        TimingFidelity::DataRateAck => profile.data_rate_bps,
        TimingFidelity::Standards => profile.control_rate_bps,
    };
    frame_airtime(profile.tcp_ack_frame_bytes(), profile.data_rate_bps, profile)
        + profile.sifs_s
        + frame_airtime(profile.mac_ack_bytes, mac_ack_rate, profile)
        + profile.difs_s
}

/// Collision lengths when the longest colliding frame is an RTS, resp. a TCP-ACK.
/// Both include the EIFS that follows the garbled reception.
pub fn collision_durations(profile: &PhyProfile) -> (f64, f64) {
    let rts = frame_airtime(profile.rts_bytes, profile.control_rate_bps, profile) + profile.eifs_s;
    let tcp_ack = frame_airtime(profile.tcp_ack_frame_bytes(), profile.data_rate_bps, profile) + profile.eifs_s;
    (rts, tcp_ack)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeDurations {
    pub t_data_s: f64,
    pub t_ack_s: f64,
    pub t_colli_rts_s: f64,
    pub t_colli_tcpack_s: f64,
}

impl ExchangeDurations {
    pub fn new(profile: &PhyProfile, fidelity: TimingFidelity) -> Self {
        let (t_colli_rts_s, t_colli_tcpack_s) = collision_durations(profile);
        ExchangeDurations {
            t_data_s: t_data(profile),
            t_ack_s: t_ack(profile, fidelity),
            t_colli_rts_s,
            t_colli_tcpack_s,
        }
    }
}
