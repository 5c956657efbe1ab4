//! Square-grid atom architecture: interaction-radius connectivity and the
//! restriction-radius test for running two CZ gates in the same stage.
//!
//! Radii are stored as multiples of the atom spacing. All radius comparisons
//! use squared lattice distances against an exact rational square of the
//! factor, so points at exactly `R_int` (or `R_restr`) never depend on
//! floating-point rounding.

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArchError {
    #[error("atom spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),
    #[error("interaction factor must be at least 1, got {0}")]
    InteractionBelowOne(Factor),
    #[error("restriction factor {restr} is smaller than interaction factor {int}")]
    RestrictionBelowInteraction { int: Factor, restr: Factor },
    #[error("grid needs at least one site")]
    EmptyGrid,
    #[error("cannot parse radius factor `{0}` (use e.g. `2`, `1.5`, `3/2` or `sqrt:2`)")]
    BadFactor(String),
    #[error("gates share grid point {0}")]
    SharedPoint(GridPoint),
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A dimensionless radius factor `r`, held exactly as `r² = num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Factor {
    num: u64,
    den: u64,
}

impl Factor {
    /// The factor whose square is `num / den`.
    pub fn from_square(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let g = gcd(num, den).max(1);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn integer(r: u64) -> Self {
        Self::from_square(r * r, 1)
    }

    /// `sqrt(k)`, e.g. the diagonal factor `sqrt(2)`.
    pub fn sqrt(k: u64) -> Self {
        Self::from_square(k, 1)
    }

    pub fn ratio(p: u64, q: u64) -> Self {
        Self::from_square(p * p, q * q)
    }

    pub fn value(&self) -> f64 {
        (self.num as f64 / self.den as f64).sqrt()
    }

    /// `dist2 <= r²` for an integer squared lattice distance.
    pub fn covers(&self, dist2: u64) -> bool {
        dist2 as u128 * self.den as u128 <= self.num as u128
    }

    /// `dist2 > r²`.
    pub fn exceeded_by(&self, dist2: u64) -> bool {
        !self.covers(dist2)
    }
}

impl PartialOrd for Factor {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Factor {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let root = |v: u64| {
            let r = (v as f64).sqrt().round() as u64;
            (r * r == v).then_some(r)
        };
        match (root(self.num), root(self.den)) {
            (Some(n), Some(1)) => write!(f, "{n}"),
            (Some(n), Some(d)) => write!(f, "{n}/{d}"),
            _ if self.den == 1 => write!(f, "sqrt:{}", self.num),
            _ => write!(f, "sqrt:{}/{}", self.num, self.den),
        }
    }
}

impl FromStr for Factor {
    type Err = ArchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ArchError::BadFactor(s.to_string());
        let s = s.trim();
        let parse_ratio = |t: &str| -> Option<(u64, u64)> {
            match t.split_once('/') {
                Some((p, q)) => {
                    let (p, q) = (p.trim().parse().ok()?, q.trim().parse().ok()?);
                    (q > 0).then_some((p, q))
                }
                None => parse_decimal(t),
            }
        };
        if let Some(rest) = s.strip_prefix("sqrt:") {
            let (p, q) = parse_ratio(rest).ok_or_else(bad)?;
            return Ok(Self::from_square(p, q));
        }
        let (p, q) = parse_ratio(s).ok_or_else(bad)?;
        Ok(Self::from_square(p * p, q * q))
    }
}

/// Parses a non-negative decimal like `2`, `1.25` into `(p, q)` with `p/q` exact.
fn parse_decimal(t: &str) -> Option<(u64, u64)> {
    let t = t.trim();
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 6 {
        return None;
    }
    let q = 10u64.pow(frac.len() as u32);
    let p = format!("{int}{frac}").parse::<u64>().ok()?;
    let g = gcd(p, q).max(1);
    Some((p / g, q / g))
}

impl Serialize for Factor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Factor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Factor;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a radius factor such as 2, \"3/2\" or \"sqrt:2\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Factor, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Factor, E> {
                Ok(Factor::integer(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Factor, E> {
                u64::try_from(v)
                    .map(Factor::integer)
                    .map_err(|_| E::custom("negative radius factor"))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Factor, E> {
                v.to_string().parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// A trap site `(x, y)` of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPoint {
    pub x: usize,
    pub y: usize,
}

impl GridPoint {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    pub fn dist2(&self, other: &GridPoint) -> u64 {
        let dx = self.x.abs_diff(other.x) as u64;
        let dy = self.y.abs_diff(other.y) as u64;
        dx * dx + dy * dy
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl Serialize for GridPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y] = <[usize; 2]>::deserialize(d)?;
        Ok(Self { x, y })
    }
}

/// `side × side` grid with spacing `spacing_um`, interaction radius
/// `r_int · spacing_um` and restriction radius `r_restr · spacing_um`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridArch {
    side: usize,
    spacing_um: f64,
    r_int: Factor,
    r_restr: Factor,
}

pub const DEFAULT_SPACING_UM: f64 = 3.0;

pub fn default_r_int() -> Factor {
    Factor::integer(2)
}

pub fn default_r_restr() -> Factor {
    Factor::integer(4)
}

impl GridArch {
    pub fn new(side: usize, spacing_um: f64, r_int: Factor, r_restr: Factor) -> Result<Self, ArchError> {
        if side == 0 {
            return Err(ArchError::EmptyGrid);
        }
        if !(spacing_um > 0.0 && spacing_um.is_finite()) {
            return Err(ArchError::NonPositiveSpacing(spacing_um));
        }
        if r_int < Factor::integer(1) {
            return Err(ArchError::InteractionBelowOne(r_int));
        }
        if r_restr < r_int {
            return Err(ArchError::RestrictionBelowInteraction {
                int: r_int,
                restr: r_restr,
            });
        }
        Ok(Self {
            side,
            spacing_um,
            r_int,
            r_restr,
        })
    }

    /// The smallest square grid holding `n` atoms, `side = ceil(sqrt(n))`.
    pub fn for_qubits(n: usize, spacing_um: f64, r_int: Factor, r_restr: Factor) -> Result<Self, ArchError> {
        if n == 0 {
            return Err(ArchError::EmptyGrid);
        }
        Self::new(side_for(n), spacing_um, r_int, r_restr)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn site_count(&self) -> usize {
        self.side * self.side
    }

    pub fn spacing_um(&self) -> f64 {
        self.spacing_um
    }

    pub fn r_int(&self) -> Factor {
        self.r_int
    }

    pub fn r_restr(&self) -> Factor {
        self.r_restr
    }

    pub fn interaction_radius_um(&self) -> f64 {
        self.r_int.value() * self.spacing_um
    }

    pub fn restriction_radius_um(&self) -> f64 {
        self.r_restr.value() * self.spacing_um
    }

    pub fn with_spacing(&self, spacing_um: f64) -> Result<Self, ArchError> {
        Self::new(self.side, spacing_um, self.r_int, self.r_restr)
    }

    pub fn contains(&self, p: GridPoint) -> bool {
        p.x < self.side && p.y < self.side
    }

    /// Row-major site index.
    pub fn index(&self, p: GridPoint) -> usize {
        p.y * self.side + p.x
    }

    pub fn point(&self, index: usize) -> GridPoint {
        GridPoint::new(index % self.side, index / self.side)
    }

    /// All sites in row-major order.
    pub fn points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        (0..self.site_count()).map(|i| self.point(i))
    }

    /// Euclidean distance in micrometres.
    pub fn distance_um(&self, a: GridPoint, b: GridPoint) -> f64 {
        (a.dist2(&b) as f64).sqrt() * self.spacing_um
    }

    /// Architecture-graph adjacency: distinct sites within `R_int`.
    pub fn connected(&self, a: GridPoint, b: GridPoint) -> bool {
        a != b && self.r_int.covers(a.dist2(&b))
    }

    /// Sites connected to `p`, row-major.
    pub fn neighbors(&self, p: GridPoint) -> Vec<GridPoint> {
        self.points().filter(|&q| self.connected(p, q)).collect()
    }

    /// Architecture graph over row-major site indices.
    pub fn graph(&self) -> Graph {
        let mut g = Graph::new(self.site_count());
        for i in 0..self.site_count() {
            for j in i + 1..self.site_count() {
                if self.connected(self.point(i), self.point(j)) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Two CZ gates on disjoint site pairs may share a Rydberg stage iff every
    /// cross distance is strictly greater than `R_restr`.
    pub fn may_run_parallel(
        &self,
        g1: (GridPoint, GridPoint),
        g2: (GridPoint, GridPoint),
    ) -> Result<bool, ArchError> {
        for u in [g1.0, g1.1] {
            for v in [g2.0, g2.1] {
                if u == v {
                    return Err(ArchError::SharedPoint(u));
                }
            }
        }
        Ok([g1.0, g1.1]
            .iter()
            .all(|u| [g2.0, g2.1].iter().all(|v| self.r_restr.exceeded_by(u.dist2(v)))))
    }
}

pub fn side_for(n: usize) -> usize {
    let mut b = (n as f64).sqrt() as usize;
    while b * b < n {
        b += 1;
    }
    while b > 0 && (b - 1) * (b - 1) >= n {
        b -= 1;
    }
    b
}
