//! Technology rule deck and standard-cell library model.
//!
//! A library file carries one `TECH` section (units, placement site, row
//! height, layer stack) followed by `CELL` sections. Layers are ordered
//! bottom-up, alternating metal/via, with layer 0 (M1) as the pin layer.

mod parse;

pub use parse::{parse_library, serialize_library};

use crate::geom::{Dbu, Rect};
use num_rational::Ratio;
use thiserror::Error;

/// Exact scale factor used for rule margins.
pub type Scale = Ratio<i64>;

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("cell {cell}: {msg}")]
    Invariant { cell: String, msg: String },
    #[error("technology: {0}")]
    Tech(String),
    #[error("library is empty")]
    Empty,
    #[error("margin factor {0} is below 1")]
    BadScale(Scale),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LayerKind {
    Metal,
    Via,
}

/// Preferred routing direction of a metal layer.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Direction {
    Horizontal,
    Vertical,
    None,
}

/// Per-layer routing and DRC rules. Via-only fields are `None` on metals
/// and vice versa.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerRule {
    pub name: String,
    pub kind: LayerKind,
    pub direction: Direction,
    /// Track spacing (metal only).
    pub pitch: Dbu,
    pub min_width: Dbu,
    /// Different-net spacing.
    pub min_spacing: Dbu,
    /// Same-net cut spacing (via only).
    pub same_net_cut_spacing: Option<Dbu>,
    /// Required metal overhang on both enclosing layers (via only).
    pub min_enclosure: Option<Dbu>,
    /// Double-patterning conflict threshold (metal only).
    pub dp_spacing: Option<Dbu>,
}

impl LayerRule {
    pub fn is_metal(&self) -> bool {
        self.kind == LayerKind::Metal
    }
}

/// Technology rule deck. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TechRules {
    /// DBU per micron, fixed at 1000.
    pub dbu_per_micron: i64,
    /// Bottom-up: M1, V1, M2, V2, M3.
    pub layers: Vec<LayerRule>,
    /// Horizontal placement quantum.
    pub site_width: Dbu,
    /// Single-height cell row height.
    pub row_height: Dbu,
    /// Cumulative margin applied to spacing/width/enclosure rules.
    pub margin_scale: Scale,
}

/// Canonical indices into `TechRules::layers`.
pub const L_M1: usize = 0;
pub const L_V1: usize = 1;
pub const L_M2: usize = 2;
pub const L_V2: usize = 3;
pub const L_M3: usize = 4;

impl TechRules {
    pub fn layer(&self, idx: usize) -> &LayerRule {
        &self.layers[idx]
    }

    pub fn layer_index(&self, name: &str) -> Option<usize> {
        self.layers.iter().position(|l| l.name == name)
    }

    pub fn validate(&self) -> Result<(), LibraryError> {
        if self.dbu_per_micron != 1000 {
            return Err(LibraryError::Tech(format!(
                "DBU must be 1000, got {}",
                self.dbu_per_micron
            )));
        }
        if self.site_width <= 0 || self.row_height <= 0 {
            return Err(LibraryError::Tech("site width and row height must be positive".into()));
        }
        if self.layers.len() < 3 || self.layers.len().is_multiple_of(2) {
            return Err(LibraryError::Tech(
                "layer stack must alternate metal/via, starting and ending with metal".into(),
            ));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            let want = if i % 2 == 0 { LayerKind::Metal } else { LayerKind::Via };
            if layer.kind != want {
                return Err(LibraryError::Tech(format!(
                    "layer {} ({}) breaks the metal/via alternation",
                    i, layer.name
                )));
            }
            if layer.min_width <= 0 || layer.min_spacing <= 0 {
                return Err(LibraryError::Tech(format!("layer {}: distances must be positive", layer.name)));
            }
            match layer.kind {
                LayerKind::Metal => {
                    if layer.pitch <= 0 {
                        return Err(LibraryError::Tech(format!("layer {}: pitch must be positive", layer.name)));
                    }
                    if layer.min_width > layer.pitch {
                        return Err(LibraryError::Tech(format!(
                            "layer {}: min width {} exceeds pitch {}",
                            layer.name, layer.min_width, layer.pitch
                        )));
                    }
                    if layer.same_net_cut_spacing.is_some() || layer.min_enclosure.is_some() {
                        return Err(LibraryError::Tech(format!(
                            "layer {}: cut spacing / enclosure only apply to vias",
                            layer.name
                        )));
                    }
                    if layer.dp_spacing.is_some_and(|d| d <= 0) {
                        return Err(LibraryError::Tech(format!("layer {}: dp spacing must be positive", layer.name)));
                    }
                }
                LayerKind::Via => {
                    if layer.direction != Direction::None {
                        return Err(LibraryError::Tech(format!("layer {}: vias have no direction", layer.name)));
                    }
                    let (Some(cut), Some(enc)) = (layer.same_net_cut_spacing, layer.min_enclosure) else {
                        return Err(LibraryError::Tech(format!(
                            "layer {}: vias need CUTSPACING and ENCLOSURE",
                            layer.name
                        )));
                    };
                    if cut <= 0 || enc <= 0 {
                        return Err(LibraryError::Tech(format!("layer {}: distances must be positive", layer.name)));
                    }
                    if layer.dp_spacing.is_some() {
                        return Err(LibraryError::Tech(format!("layer {}: dp spacing only applies to metals", layer.name)));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PinDir {
    Input,
    Output,
    Inout,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pin {
    pub name: String,
    pub direction: PinDir,
    /// Axis-aligned shapes on M1, cell-local DBU.
    pub shapes: Vec<Rect>,
}

/// One library cell: footprint, M1 pin shapes, power rails, obstructions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellMaster {
    pub name: String,
    /// Positive multiple of the site width.
    pub width: Dbu,
    /// 1 = single-height, >= 2 = multiple-height.
    pub height_rows: u32,
    pub pins: Vec<Pin>,
    /// VDD rail then VSS rail, both on M1 spanning the full cell width.
    pub power_rails: [Rect; 2],
    /// (layer index, rect) blocked for routing inside the cell.
    pub obstructions: Vec<(usize, Rect)>,
}

impl CellMaster {
    pub fn height(&self, rules: &TechRules) -> Dbu {
        self.height_rows as Dbu * rules.row_height
    }

    pub fn pin(&self, name: &str) -> Option<&Pin> {
        self.pins.iter().find(|p| p.name == name)
    }

    pub fn validate(&self, rules: &TechRules) -> Result<(), LibraryError> {
        let err = |msg: String| LibraryError::Invariant { cell: self.name.clone(), msg };
        if self.width <= 0 || self.width % rules.site_width != 0 {
            return Err(err(format!(
                "width {} is not a positive multiple of the site width {}",
                self.width, rules.site_width
            )));
        }
        if self.height_rows == 0 {
            return Err(err("height must be at least one row".into()));
        }
        if self.pins.is_empty() {
            return Err(err("cell has no signal pins".into()));
        }
        let outline = Rect::new(0, 0, self.width, self.height(rules));
        for pin in &self.pins {
            if pin.shapes.is_empty() {
                return Err(err(format!("pin {} has no shapes", pin.name)));
            }
            for shape in &pin.shapes {
                if !outline.contains_rect(shape) {
                    return Err(err(format!(
                        "pin {} shape ({},{})-({},{}) lies outside the cell outline",
                        pin.name, shape.x1, shape.y1, shape.x2, shape.y2
                    )));
                }
            }
        }
        for i in 1..self.pins.len() {
            if self.pins[..i].iter().any(|p| p.name == self.pins[i].name) {
                return Err(err(format!("duplicate pin name {}", self.pins[i].name)));
            }
        }
        for rail in &self.power_rails {
            if rail.x1 != 0 || rail.x2 != self.width {
                return Err(err("power rails must span the full cell width".into()));
            }
            if !outline.contains_rect(rail) {
                return Err(err("power rail lies outside the cell outline".into()));
            }
        }
        for (layer, rect) in &self.obstructions {
            if *layer >= rules.layers.len() {
                return Err(err(format!("obstruction references unknown layer index {layer}")));
            }
            if !outline.contains_rect(rect) {
                return Err(err("obstruction lies outside the cell outline".into()));
            }
        }
        Ok(())
    }
}

/// Per-cell tables computed by the profiling pass.
#[derive(Clone, Debug)]
pub struct LibraryProfile {
    pub rules: TechRules,
    pub cells: Vec<CellMaster>,
    /// Indices into `cells`, declaration order.
    pub single_height: Vec<usize>,
    pub multi_height: Vec<usize>,
    /// Smallest cell width in the library.
    pub min_width: Dbu,
    /// Pin count per cell, aligned with `cells`.
    pub pin_counts: Vec<usize>,
}

impl LibraryProfile {
    pub fn cell(&self, name: &str) -> Option<&CellMaster> {
        self.cells.iter().find(|c| c.name == name)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cell width over the library minimum, exact.
    pub fn normalized_width(&self, idx: usize) -> Ratio<i64> {
        Ratio::new(self.cells[idx].width, self.min_width)
    }
}

/// Profiling pass: width/height tables, height partition, pin counts.
pub fn profile_library(rules: &TechRules, cells: &[CellMaster]) -> Result<LibraryProfile, LibraryError> {
    if cells.is_empty() {
        return Err(LibraryError::Empty);
    }
    let mut single = Vec::new();
    let mut multi = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        if c.height_rows == 1 {
            single.push(i);
        } else {
            multi.push(i);
        }
    }
    let min_width = cells.iter().map(|c| c.width).min().unwrap();
    Ok(LibraryProfile {
        rules: rules.clone(),
        cells: cells.to_vec(),
        single_height: single,
        multi_height: multi,
        min_width,
        pin_counts: cells.iter().map(|c| c.pins.len()).collect(),
    })
}

/// Multiply `v` by the exact ratio `f`, rounding up.
fn scale_up(v: Dbu, f: Scale) -> Dbu {
    let num = *f.numer();
    let den = *f.denom();
    (v * num + den - 1) / den
}

/// Tighten the deck: spacing, width, enclosure and cut-spacing rules are
/// multiplied by `factor` and rounded up. Pitches and the unit scale are
/// untouched, so existing geometry keeps its meaning while checks get
/// stricter.
pub fn scale_rules(rules: &TechRules, factor: Scale) -> Result<TechRules, LibraryError> {
    if factor < Scale::from_integer(1) {
        return Err(LibraryError::BadScale(factor));
    }
    let mut out = rules.clone();
    out.margin_scale = rules.margin_scale * factor;
    for layer in &mut out.layers {
        layer.min_width = scale_up(layer.min_width, factor);
        layer.min_spacing = scale_up(layer.min_spacing, factor);
        layer.same_net_cut_spacing = layer.same_net_cut_spacing.map(|v| scale_up(v, factor));
        layer.min_enclosure = layer.min_enclosure.map(|v| scale_up(v, factor));
    }
    Ok(out)
}
