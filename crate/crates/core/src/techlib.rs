// SPDX-License-Identifier: Apache-2.0

//! Technology description: routing layers, wire delay parameters and the gate
//! library, plus the primitive delay formulas used by every later stage.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::Time;

pub const DESK_NB04: &str = include_str!("../data/desk-nb04.toml");
pub const DESK_NB03: &str = include_str!("../data/desk-nb03.toml");

#[derive(Debug, Error, PartialEq)]
pub enum TechError {
    #[error("technology parse error: {0}")]
    Parse(String),
    #[error("invalid technology field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("`{0}` is not a wire widget with a defined delay")]
    UnknownWidget(WidgetKind),
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> TechError {
    TechError::Invalid { field: field.into(), reason: reason.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    Horizontal,
    Vertical,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerSpec {
    pub index: usize,
    pub jtl_enabled: bool,
    pub ptl_enabled: bool,
}

impl LayerSpec {
    /// Preferred MSL direction; odd layers run vertically.
    pub fn ptl_direction(&self) -> Axis {
        if self.index % 2 == 1 {
            Axis::Vertical
        } else {
            Axis::Horizontal
        }
    }

    pub fn is_ptl_only(&self) -> bool {
        self.ptl_enabled && !self.jtl_enabled
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelayParams {
    pub t_jtl2: Time,
    pub t_jtl3: Time,
    pub t_jtl4: Time,
    pub t_longjtl: Time,
    pub t_msl: Time,
    pub t_drv: Time,
    pub t_rec: Time,
    pub t_split: Time,
    pub l_drv: u32,
    pub l_rec: u32,
}

impl DelayParams {
    pub fn validate(&self) -> Result<(), TechError> {
        let named = [
            ("t_jtl2", self.t_jtl2),
            ("t_jtl3", self.t_jtl3),
            ("t_jtl4", self.t_jtl4),
            ("t_longjtl", self.t_longjtl),
            ("t_msl", self.t_msl),
            ("t_drv", self.t_drv),
            ("t_rec", self.t_rec),
            ("t_split", self.t_split),
        ];
        for (name, t) in named {
            if t <= Time::ZERO {
                return Err(invalid(format!("delays.{name}"), "must be strictly positive"));
            }
        }
        if self.t_msl >= self.t_jtl2 {
            return Err(invalid("delays.t_msl", "must be smaller than t_jtl2"));
        }
        if !(self.t_jtl2 < self.t_jtl3 && self.t_jtl3 < self.t_jtl4) {
            return Err(invalid("delays.t_jtl3", "junction delays must satisfy t_jtl2 < t_jtl3 < t_jtl4"));
        }
        if self.t_longjtl >= self.t_jtl2 {
            return Err(invalid("delays.t_longjtl", "must be smaller than t_jtl2"));
        }
        Ok(())
    }

    pub fn jtl(&self, junctions: u8) -> Time {
        match junctions {
            3 => self.t_jtl3,
            4 => self.t_jtl4,
            _ => self.t_jtl2,
        }
    }
}

/// Widget kinds placed on routed grid nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WidgetKind {
    Jtl2,
    Jtl3,
    Jtl4,
    LongJtl,
    Splitter,
    Cross,
    Driver,
    Receiver,
    Msl,
    Via,
}

impl WidgetKind {
    pub const ALL: [WidgetKind; 10] = [
        WidgetKind::Jtl2,
        WidgetKind::Jtl3,
        WidgetKind::Jtl4,
        WidgetKind::LongJtl,
        WidgetKind::Splitter,
        WidgetKind::Cross,
        WidgetKind::Driver,
        WidgetKind::Receiver,
        WidgetKind::Msl,
        WidgetKind::Via,
    ];

    pub fn junctions(self) -> u32 {
        match self {
            WidgetKind::Jtl2 | WidgetKind::LongJtl => 2,
            WidgetKind::Jtl3 => 3,
            WidgetKind::Jtl4 => 4,
            WidgetKind::Splitter => 3,
            WidgetKind::Cross => 4,
            WidgetKind::Driver | WidgetKind::Receiver => 2,
            WidgetKind::Msl | WidgetKind::Via => 0,
        }
    }

    /// Standard-size JTL with a junction count that can still be raised.
    pub fn standard_jtl_junctions(self) -> Option<u8> {
        match self {
            WidgetKind::Jtl2 => Some(2),
            WidgetKind::Jtl3 => Some(3),
            WidgetKind::Jtl4 => Some(4),
            _ => None,
        }
    }

    pub fn from_junctions(j: u8) -> WidgetKind {
        match j {
            3 => WidgetKind::Jtl3,
            4 => WidgetKind::Jtl4,
            _ => WidgetKind::Jtl2,
        }
    }

    /// Nodes the detailed router may substitute.
    pub fn is_changeable(self) -> bool {
        matches!(self, WidgetKind::Jtl2 | WidgetKind::Jtl3 | WidgetKind::Jtl4 | WidgetKind::LongJtl)
    }

    pub fn is_ptl(self) -> bool {
        matches!(self, WidgetKind::Driver | WidgetKind::Receiver | WidgetKind::Msl)
    }

    pub fn is_jtl_family(self) -> bool {
        matches!(
            self,
            WidgetKind::Jtl2
                | WidgetKind::Jtl3
                | WidgetKind::Jtl4
                | WidgetKind::LongJtl
                | WidgetKind::Splitter
                | WidgetKind::Cross
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            WidgetKind::Jtl2 => "JTL2",
            WidgetKind::Jtl3 => "JTL3",
            WidgetKind::Jtl4 => "JTL4",
            WidgetKind::LongJtl => "LONGJTL",
            WidgetKind::Splitter => "SPLIT",
            WidgetKind::Cross => "CROSS",
            WidgetKind::Driver => "DRV",
            WidgetKind::Receiver => "REC",
            WidgetKind::Msl => "MSL",
            WidgetKind::Via => "VIA",
        }
    }
}

impl fmt::Display for WidgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WidgetKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WidgetKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown widget kind `{s}`"))
    }
}

/// Delay of a wire widget spanning `span` units.
///
/// Per-unit kinds scale with the span; drivers, receivers and splitters have
/// a fixed delay.
pub fn widget_delay(kind: WidgetKind, span: u32, delays: &DelayParams) -> Result<Time, TechError> {
    let per_unit = |t: Time| t * i64::from(span);
    match kind {
        WidgetKind::Jtl2 => Ok(per_unit(delays.t_jtl2)),
        WidgetKind::Jtl3 => Ok(per_unit(delays.t_jtl3)),
        WidgetKind::Jtl4 => Ok(per_unit(delays.t_jtl4)),
        WidgetKind::LongJtl => Ok(per_unit(delays.t_longjtl)),
        WidgetKind::Msl => Ok(per_unit(delays.t_msl)),
        WidgetKind::Driver => Ok(delays.t_drv),
        WidgetKind::Receiver => Ok(delays.t_rec),
        WidgetKind::Splitter => Ok(delays.t_split),
        WidgetKind::Cross | WidgetKind::Via => Err(TechError::UnknownWidget(kind)),
    }
}

/// Delay contributed by a single routed grid node. A JTL cross passes each
/// pulse like a 2-junction JTL; vias are delay-free.
pub fn node_delay(kind: WidgetKind, delays: &DelayParams) -> Time {
    match kind {
        WidgetKind::Cross => delays.t_jtl2,
        WidgetKind::Via => Time::ZERO,
        k => widget_delay(k, 1, delays).expect("wire widget"),
    }
}

/// Shortest span (in units) for which a driver + MSL + receiver line is no
/// slower than a 2-junction JTL chain of the same length.
pub fn ptl_breakeven_length(delays: &DelayParams) -> u32 {
    let overhead = delays.t_drv.fs() + delays.t_rec.fs()
        - i64::from(delays.l_drv + delays.l_rec) * delays.t_msl.fs();
    let gain = delays.t_jtl2.fs() - delays.t_msl.fs();
    if overhead <= 0 {
        return 1;
    }
    let l = (overhead + gain - 1) / gain;
    l.max(1) as u32
}

/// Total delay of a PTL occupying `length` units including its driver and
/// receiver footprints.
pub fn ptl_delay(length: u32, delays: &DelayParams) -> Time {
    let msl_units = i64::from(length) - i64::from(delays.l_drv + delays.l_rec);
    delays.t_drv + delays.t_rec + delays.t_msl * msl_units
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    N,
    S,
    E,
    W,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortDir {
    In,
    Out,
    Clock,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Logic,
    ClockSource,
    ClockTap,
    InputPin,
    OutputPin,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortDef {
    pub name: String,
    pub side: Side,
    pub offset: i32,
    pub dir: PortDir,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateModel {
    pub name: String,
    pub kind: CellKind,
    pub width: i32,
    pub height: i32,
    pub ports: Vec<PortDef>,
    pub t_delay: Time,
    pub t_hold: Time,
    pub t_setup: Time,
    pub clocked: bool,
    pub junctions: u32,
}

impl GateModel {
    pub fn port(&self, name: &str) -> Option<&PortDef> {
        self.ports.iter().find(|p| p.name == name)
    }

    fn validate(&self) -> Result<(), TechError> {
        let field = |f: &str| format!("gates.{}.{}", self.name, f);
        if self.width < 1 || self.height < 1 {
            return Err(invalid(field("width"), "gate size must be at least 1x1"));
        }
        if self.t_hold < Time::ZERO {
            return Err(invalid(field("t_hold"), "must be non-negative"));
        }
        if self.t_setup < Time::ZERO {
            return Err(invalid(field("t_setup"), "must be non-negative"));
        }
        if self.t_delay < Time::ZERO {
            return Err(invalid(field("t_delay"), "must be non-negative"));
        }
        for p in &self.ports {
            let edge = match p.side {
                Side::N | Side::S => self.width,
                Side::E | Side::W => self.height,
            };
            if p.offset < 0 || p.offset >= edge {
                return Err(invalid(
                    field(&format!("ports.{}", p.name)),
                    "offset must lie on the block edge",
                ));
            }
        }
        if self.clocked && !self.ports.iter().any(|p| p.dir == PortDir::Clock) {
            return Err(invalid(field("ports"), "clocked gate needs a clock port"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Technology {
    pub name: String,
    pub pitch_mm: f64,
    pub layers: Vec<LayerSpec>,
    pub delays: DelayParams,
    pub gates: BTreeMap<String, GateModel>,
}

impl Technology {
    pub fn desk_nb04() -> Technology {
        load_technology(DESK_NB04).expect("bundled technology")
    }

    pub fn desk_nb03() -> Technology {
        load_technology(DESK_NB03).expect("bundled technology")
    }

    pub fn gate(&self, name: &str) -> Option<&GateModel> {
        self.gates.get(name)
    }

    pub fn has_ptl_layer(&self) -> bool {
        self.layers.iter().any(|l| l.ptl_enabled)
    }

    /// Worst gate timing window `max(t_hold + t_setup)` over clocked gates.
    pub fn library_clock_bound(&self) -> Time {
        self.gates
            .values()
            .filter(|g| g.clocked)
            .map(|g| g.t_hold + g.t_setup)
            .max()
            .unwrap_or(Time::ZERO)
    }

    pub fn breakeven_length(&self) -> u32 {
        ptl_breakeven_length(&self.delays)
    }

    /// Replaces the layer stack by one of the two standard profiles.
    pub fn with_layer_profile(mut self, profile: LayerProfile) -> Technology {
        self.layers = profile.layers();
        self
    }

    pub fn validate(&self) -> Result<(), TechError> {
        if self.pitch_mm.is_nan() || self.pitch_mm <= 0.0 {
            return Err(invalid("pitch_mm", "must be strictly positive"));
        }
        if self.layers.is_empty() {
            return Err(invalid("layers", "at least one routing layer is required"));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.index != i {
                return Err(invalid(format!("layers[{i}].index"), "indices must be contiguous from 0"));
            }
            if !l.jtl_enabled && !l.ptl_enabled {
                return Err(invalid(format!("layers[{i}]"), "layer enables neither JTL nor PTL"));
            }
        }
        if !self.layers[0].jtl_enabled {
            return Err(invalid("layers[0].jtl", "the bottom layer must enable JTL routing"));
        }
        self.delays.validate()?;
        for (key, g) in &self.gates {
            if key != &g.name {
                return Err(invalid(format!("gates.{key}"), "table key differs from gate name"));
            }
            g.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerProfile {
    /// Two routable layers, both JTL and PTL enabled.
    Nb03,
    /// Two JTL+PTL layers plus two MSL-only layers above them.
    Nb04,
}

impl LayerProfile {
    pub fn layers(self) -> Vec<LayerSpec> {
        let n = match self {
            LayerProfile::Nb03 => 2,
            LayerProfile::Nb04 => 4,
        };
        (0..n)
            .map(|index| LayerSpec { index, jtl_enabled: index < 2, ptl_enabled: true })
            .collect()
    }
}

impl fmt::Display for LayerProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LayerProfile::Nb03 => "nb03",
            LayerProfile::Nb04 => "nb04",
        })
    }
}

impl FromStr for LayerProfile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nb03" => Ok(LayerProfile::Nb03),
            "nb04" => Ok(LayerProfile::Nb04),
            _ => Err(format!("unknown layer profile `{s}` (expected nb03 or nb04)")),
        }
    }
}

// On-disk schema. Times are picoseconds, lengths are grid units.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TechFile {
    name: String,
    pitch_mm: f64,
    #[serde(default)]
    layers: Vec<LayerFile>,
    delays: DelayFile,
    #[serde(default)]
    gates: Vec<GateFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    index: usize,
    jtl: bool,
    ptl: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DelayFile {
    t_jtl2: f64,
    t_jtl3: f64,
    t_jtl4: f64,
    t_longjtl: f64,
    t_msl: f64,
    t_drv: f64,
    t_rec: f64,
    t_split: f64,
    l_drv: u32,
    l_rec: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateFile {
    name: String,
    kind: CellKind,
    width: i32,
    height: i32,
    t_delay: f64,
    t_hold: f64,
    t_setup: f64,
    clocked: bool,
    junctions: u32,
    ports: Vec<PortDef>,
}

pub fn load_technology(source: &str) -> Result<Technology, TechError> {
    let file: TechFile = toml::from_str(source).map_err(|e| TechError::Parse(e.to_string()))?;
    let d = &file.delays;
    let delays = DelayParams {
        t_jtl2: Time::from_ps(d.t_jtl2),
        t_jtl3: Time::from_ps(d.t_jtl3),
        t_jtl4: Time::from_ps(d.t_jtl4),
        t_longjtl: Time::from_ps(d.t_longjtl),
        t_msl: Time::from_ps(d.t_msl),
        t_drv: Time::from_ps(d.t_drv),
        t_rec: Time::from_ps(d.t_rec),
        t_split: Time::from_ps(d.t_split),
        l_drv: d.l_drv,
        l_rec: d.l_rec,
    };
    let mut gates = BTreeMap::new();
    for g in file.gates {
        let model = GateModel {
            name: g.name.clone(),
            kind: g.kind,
            width: g.width,
            height: g.height,
            ports: g.ports,
            t_delay: Time::from_ps(g.t_delay),
            t_hold: Time::from_ps(g.t_hold),
            t_setup: Time::from_ps(g.t_setup),
            clocked: g.clocked,
            junctions: g.junctions,
        };
        if gates.insert(g.name.clone(), model).is_some() {
            return Err(invalid(format!("gates.{}", g.name), "duplicate gate name"));
        }
    }
    let tech = Technology {
        name: file.name,
        pitch_mm: file.pitch_mm,
        layers: file
            .layers
            .into_iter()
            .map(|l| LayerSpec { index: l.index, jtl_enabled: l.jtl, ptl_enabled: l.ptl })
            .collect(),
        delays,
        gates,
    };
    tech.validate()?;
    Ok(tech)
}

pub fn emit_technology(tech: &Technology) -> String {
    let d = &tech.delays;
    let file = TechFile {
        name: tech.name.clone(),
        pitch_mm: tech.pitch_mm,
        layers: tech
            .layers
            .iter()
            .map(|l| LayerFile { index: l.index, jtl: l.jtl_enabled, ptl: l.ptl_enabled })
            .collect(),
        delays: DelayFile {
            t_jtl2: d.t_jtl2.ps(),
            t_jtl3: d.t_jtl3.ps(),
            t_jtl4: d.t_jtl4.ps(),
            t_longjtl: d.t_longjtl.ps(),
            t_msl: d.t_msl.ps(),
            t_drv: d.t_drv.ps(),
            t_rec: d.t_rec.ps(),
            t_split: d.t_split.ps(),
            l_drv: d.l_drv,
            l_rec: d.l_rec,
        },
        gates: tech
            .gates
            .values()
            .map(|g| GateFile {
                name: g.name.clone(),
                kind: g.kind,
                width: g.width,
                height: g.height,
                t_delay: g.t_delay.ps(),
                t_hold: g.t_hold.ps(),
                t_setup: g.t_setup.ps(),
                clocked: g.clocked,
                junctions: g.junctions,
                ports: g.ports.clone(),
            })
            .collect(),
    };
    toml::to_string(&file).expect("technology serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk() -> DelayParams {
        Technology::desk_nb04().delays
    }

    #[test]
    fn default_technology_follows_one_tenth_rule() {
        let t = Technology::desk_nb04();
        assert_eq!(t.delays.t_msl * 10, t.delays.t_jtl2);
        assert_eq!(t.layers.len(), 4);
        assert!(t.layers[2].is_ptl_only());
        assert_eq!(t.layers[3].ptl_direction(), Axis::Vertical);
        assert_eq!(Technology::desk_nb03().layers.len(), 2);
    }

    #[test]
    fn library_bound_is_not_gate_window() {
        let t = Technology::desk_nb04();
        assert_eq!(t.library_clock_bound(), Time::from_fs(13_200));
        let worst = t.gates.values().filter(|g| g.clocked).max_by_key(|g| g.t_hold + g.t_setup).unwrap();
        assert_eq!(worst.name, "NOT");
    }

    #[test]
    fn zero_layers_rejected() {
        let mut t = Technology::desk_nb04();
        t.layers.clear();
        let err = load_technology(&emit_technology(&t)).unwrap_err();
        assert!(matches!(err, TechError::Invalid { ref field, .. } if field == "layers"), "{err}");
    }

    #[test]
    fn slow_msl_rejected() {
        let mut t = Technology::desk_nb04();
        t.delays.t_msl = t.delays.t_jtl2;
        let err = load_technology(&emit_technology(&t)).unwrap_err();
        assert!(matches!(err, TechError::Invalid { ref field, .. } if field == "delays.t_msl"));
    }

    #[test]
    fn bottom_layer_must_be_jtl() {
        let mut t = Technology::desk_nb04();
        t.layers[0].jtl_enabled = false;
        let err = load_technology(&emit_technology(&t)).unwrap_err();
        assert!(matches!(err, TechError::Invalid { ref field, .. } if field == "layers[0].jtl"));
    }

    #[test]
    fn malformed_file_is_parse_error() {
        assert!(matches!(load_technology("name = "), Err(TechError::Parse(_))));
    }

    #[test]
    fn breakeven_default_is_five() {
        assert_eq!(ptl_breakeven_length(&desk()), 5);
    }

    #[test]
    fn breakeven_zero_overhead_is_one() {
        let mut d = desk();
        d.t_drv = Time::ZERO;
        d.t_rec = Time::ZERO;
        d.l_drv = 0;
        d.l_rec = 0;
        assert_eq!(ptl_breakeven_length(&d), 1);
    }

    #[test]
    fn widget_delay_examples() {
        let d = desk();
        assert_eq!(widget_delay(WidgetKind::Jtl2, 3, &d).unwrap(), Time::from_fs(12_000));
        let unit_sum: Time = (0..3).map(|_| widget_delay(WidgetKind::Jtl2, 1, &d).unwrap()).sum();
        assert_eq!(unit_sum, Time::from_fs(12_000));
        assert_eq!(widget_delay(WidgetKind::Msl, 1, &d).unwrap(), Time::from_fs(400));
        assert_eq!(widget_delay(WidgetKind::Driver, 17, &d).unwrap(), Time::from_fs(9_000));
        assert_eq!(
            widget_delay(WidgetKind::Cross, 1, &d),
            Err(TechError::UnknownWidget(WidgetKind::Cross))
        );
    }

    #[test]
    fn ptl_delay_of_seven_unit_run() {
        assert_eq!(ptl_delay(7, &desk()), Time::from_fs(19_000));
    }

    #[test]
    fn emit_load_is_identity() {
        for t in [Technology::desk_nb04(), Technology::desk_nb03()] {
            assert_eq!(load_technology(&emit_technology(&t)).unwrap(), t);
        }
    }
}
