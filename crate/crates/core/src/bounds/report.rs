use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Version of the report layout written by the campaign runner.
pub const REPORT_FORMAT_VERSION: u32 = 1;

/// The inequality or identity a report instantiates. Serialized with the
/// short tags used in report files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BoundTag {
    /// `σ₁L ≤ 2(γ + k)π`.
    #[serde(rename = "TH2.3")]
    TopologicalBound,
    /// `σ₁L < 2kπ` for genus zero.
    #[serde(rename = "TH2.5")]
    GenusZeroStrict,
    /// `σ₁L ≤ 4π/t₁` for supercritical annuli.
    #[serde(rename = "TH4.1")]
    Supercritical,
    /// Boundary length is maximal in the Möbius orbit of a free boundary
    /// surface.
    #[serde(rename = "TH5.3")]
    OrbitMaximality,
    /// `2A = L ≥ 2π` for free boundary surfaces.
    #[serde(rename = "TH5.4")]
    AreaLength,
    /// `A ≤ L²/4π` for free boundary surfaces.
    #[serde(rename = "COR5.5")]
    Isoperimetric,
    /// `σ₁L ≤ 2·Area(f(Σ))` through the balanced test functions.
    #[serde(rename = "TH6.2/COR6.3")]
    ConformalVolume,
    /// Boundary conformal volume is at least `2π`.
    #[serde(rename = "LB-Vbc")]
    BoundaryVolumeLower,
    /// Relative conformal volume is at least `π`.
    #[serde(rename = "LB-Vrc")]
    RelativeVolumeLower,
}

impl BoundTag {
    pub const ALL: [BoundTag; 9] = [
        BoundTag::TopologicalBound,
        BoundTag::GenusZeroStrict,
        BoundTag::Supercritical,
        BoundTag::OrbitMaximality,
        BoundTag::AreaLength,
        BoundTag::Isoperimetric,
        BoundTag::ConformalVolume,
        BoundTag::BoundaryVolumeLower,
        BoundTag::RelativeVolumeLower,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundTag::TopologicalBound => "TH2.3",
            BoundTag::GenusZeroStrict => "TH2.5",
            BoundTag::Supercritical => "TH4.1",
            BoundTag::OrbitMaximality => "TH5.3",
            BoundTag::AreaLength => "TH5.4",
            BoundTag::Isoperimetric => "COR5.5",
            BoundTag::ConformalVolume => "TH6.2/COR6.3",
            BoundTag::BoundaryVolumeLower => "LB-Vbc",
            BoundTag::RelativeVolumeLower => "LB-Vrc",
        }
    }
}

impl fmt::Display for BoundTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One checked instance of `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub id: String,
    pub tag: BoundTag,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    /// Absolute slack: the report passes when `margin ≥ −tolerance`, or
    /// when `margin > 0` for strict inequalities.
    pub tolerance: f64,
    pub strict: bool,
    pub pass: bool,
    pub metadata: BTreeMap<String, Value>,
}

impl BoundReport {
    pub fn new(id: impl Into<String>, tag: BoundTag, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            id: id.into(),
            tag,
            lhs,
            rhs,
            margin,
            tolerance,
            strict: false,
            pass: lhs.is_finite() && rhs.is_finite() && margin >= -tolerance,
            metadata: BTreeMap::new(),
        }
    }

    /// `lhs < rhs` with no slack.
    pub fn strict(id: impl Into<String>, tag: BoundTag, lhs: f64, rhs: f64) -> Self {
        let mut r = Self::new(id, tag, lhs, rhs, 0.0);
        r.strict = true;
        r.pass = lhs.is_finite() && rhs.is_finite() && r.margin > 0.0;
        r
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TagSummary {
    pub passed: usize,
    pub failed: usize,
    /// Smallest margin seen, as a fraction of `|rhs|`.
    pub min_relative_margin: Option<f64>,
}

/// Pass/fail counts per tag.
pub fn summarize(reports: &[BoundReport]) -> BTreeMap<BoundTag, TagSummary> {
    let mut out: BTreeMap<BoundTag, TagSummary> = BTreeMap::new();
    for r in reports {
        let s = out.entry(r.tag).or_default();
        if r.pass {
            s.passed += 1;
        } else {
            s.failed += 1;
        }
        let rel = r.margin / r.rhs.abs().max(f64::MIN_POSITIVE);
        s.min_relative_margin = Some(s.min_relative_margin.map_or(rel, |m: f64| m.min(rel)));
    }
    out
}
