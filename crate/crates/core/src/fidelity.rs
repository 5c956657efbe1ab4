//! Execution-time and approximate-success-probability model.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schedule::Counters;

/// Fixed-point duration with 1e-6 μs resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Micros(i64);

impl Micros {
    pub const ZERO: Micros = Micros(0);
    const SCALE: f64 = 1e6;

    /// Rounds `us` to the nearest representable value.
    pub fn from_us(us: f64) -> Self {
        Micros((us * Self::SCALE).round() as i64)
    }

    pub fn from_ticks(ticks: i64) -> Self {
        Micros(ticks)
    }

    pub fn ticks(&self) -> i64 {
        self.0
    }

    pub fn as_us(&self) -> f64 {
        self.0 as f64 / Self::SCALE
    }
}

impl Add for Micros {
    type Output = Micros;
    fn add(self, rhs: Micros) -> Micros {
        Micros(self.0 + rhs.0)
    }
}

impl Sub for Micros {
    type Output = Micros;
    fn sub(self, rhs: Micros) -> Micros {
        Micros(self.0 - rhs.0)
    }
}

impl Mul<usize> for Micros {
    type Output = Micros;
    fn mul(self, k: usize) -> Micros {
        Micros(self.0 * k as i64)
    }
}

impl fmt::Display for Micros {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let a = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:06}", a / 1_000_000, a % 1_000_000)
    }
}

impl Serialize for Micros {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_us())
    }
}

impl<'de> Deserialize<'de> for Micros {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        f64::deserialize(d).map(Micros::from_us)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferTimeModel {
    /// Every transfer costs `t_trans`.
    #[default]
    PerTransfer,
    /// Loads and offloads of one movement stage happen together.
    PerStage,
}

impl FromStr for TransferTimeModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per_transfer" | "per-transfer" => Ok(Self::PerTransfer),
            "per_stage" | "per-stage" => Ok(Self::PerStage),
            _ => Err(format!("unknown transfer model `{s}` (expected per_transfer or per_stage)")),
        }
    }
}

impl fmt::Display for TransferTimeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PerTransfer => "per_transfer",
            Self::PerStage => "per_stage",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FidelityError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must not exceed 1, got {value}")]
    AboveOne { name: &'static str, value: f64 },
    #[error("idle time n*T - m*t_cz is negative ({0} us)")]
    NegativeIdle(Micros),
}

/// Times in μs, speed in μm/μs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardwareParams {
    #[serde(rename = "T2")]
    pub t2: f64,
    pub f_cz: f64,
    pub f_trans: f64,
    pub t_cz: f64,
    pub t_trans: f64,
    pub v: f64,
    pub transfer_time_model: TransferTimeModel,
}

impl Default for HardwareParams {
    fn default() -> Self {
        Self {
            t2: 1.5e6,
            f_cz: 0.995,
            f_trans: 1.0,
            t_cz: 0.2,
            t_trans: 20.0,
            v: 0.55,
            transfer_time_model: TransferTimeModel::PerTransfer,
        }
    }
}

impl HardwareParams {
    pub fn validate(&self) -> Result<(), FidelityError> {
        for (name, value) in [
            ("T2", self.t2),
            ("f_cz", self.f_cz),
            ("f_trans", self.f_trans),
            ("t_cz", self.t_cz),
            ("t_trans", self.t_trans),
            ("v", self.v),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(FidelityError::NonPositive { name, value });
            }
        }
        for (name, value) in [("f_cz", self.f_cz), ("f_trans", self.f_trans)] {
            if value > 1.0 {
                return Err(FidelityError::AboveOne { name, value });
            }
        }
        Ok(())
    }

    /// Sets a parameter by name, as accepted on the command line.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        match name {
            "T2" | "t2" => self.t2 = value,
            "f_cz" => self.f_cz = value,
            "f_trans" => self.f_trans = value,
            "t_cz" => self.t_cz = value,
            "t_trans" => self.t_trans = value,
            "v" => self.v = value,
            _ => return Err(format!("unknown hardware parameter `{name}`")),
        }
        Ok(())
    }
}

/// Total execution time `T`.
pub fn exec_time(k: &Counters, p: &HardwareParams) -> Micros {
    let transfers = match p.transfer_time_model {
        TransferTimeModel::PerTransfer => k.s,
        TransferTimeModel::PerStage => 2 * k.move_stages,
    };
    Micros::from_us(p.t_cz) * k.h + Micros::from_us(p.t_trans) * transfers + Micros::from_us(k.d_um / p.v)
}

/// Summed idle time `n*T - m*t_cz` over all qubits.
pub fn idle_time(n: usize, t: Micros, m: usize, p: &HardwareParams) -> Result<Micros, FidelityError> {
    let idle = t * n - Micros::from_us(p.t_cz) * m;
    if idle < Micros::ZERO {
        return Err(FidelityError::NegativeIdle(idle));
    }
    Ok(idle)
}

/// Natural log of the success probability.
pub fn log_success_probability(idle: Micros, m: usize, s: usize, p: &HardwareParams) -> f64 {
    -idle.as_us() / p.t2 + m as f64 * p.f_cz.ln() + s as f64 * p.f_trans.ln()
}

/// `exp(-T_idle/T2) * f_cz^m * f_trans^s`.
pub fn success_probability(k: &Counters, p: &HardwareParams) -> Result<f64, FidelityError> {
    let t = exec_time(k, p);
    let idle = idle_time(k.n, t, k.m, p)?;
    Ok(log_success_probability(idle, k.m, k.s, p).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    #[serde(rename = "T")]
    pub t: Micros,
    #[serde(rename = "T_idle")]
    pub t_idle: Micros,
    #[serde(rename = "F")]
    pub f: f64,
    pub counters: Counters,
    pub params: HardwareParams,
}

impl FidelityReport {
    pub fn new(k: &Counters, p: &HardwareParams) -> Result<Self, FidelityError> {
        p.validate()?;
        let t = exec_time(k, p);
        let t_idle = idle_time(k.n, t, k.m, p)?;
        Ok(Self {
            t,
            t_idle,
            f: log_success_probability(t_idle, k.m, k.s, p).exp(),
            counters: *k,
            params: *p,
        })
    }
}
