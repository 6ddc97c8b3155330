//! Two-layer track router with deliberately hostile constraints.
//!
//! Routing happens on the horizontal (M2) and vertical (M3) track grid
//! only; pins are reached by dropping a V1 at an on-grid access point.
//! Power straps and cell obstructions turn into blocked nodes. Conflicts
//! between nets are negotiated PathFinder-style; whatever congestion the
//! negotiation cannot resolve is left in the geometry for the checker to
//! find.

mod extract;
mod grid;
mod maze;
mod straps;

pub use extract::{extract_connectivity, NetVerdict};
pub use grid::{build_grid, PinAccess, RoutingGrid};
pub use maze::route;
pub use straps::{plan_straps, PowerNet, Strap, StrapPlan};

use crate::geom::{Dbu, Point, Rect};
use crate::techlib::{TechRules, L_M2, L_M3, L_V1, L_V2};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RouteError {
    #[error("die area {0}x{1} is smaller than one pitch in some direction")]
    DieTooSmall(Dbu, Dbu),
    #[error("testcell references unknown master {0}")]
    UnknownMaster(String),
}

#[derive(Clone, Debug)]
pub struct RouterConfig {
    pub max_iterations: usize,
    /// Parallelism across testcells; a single testcell always routes
    /// sequentially.
    pub worker_count: usize,
}

impl Default for RouterConfig {
    fn default() -> Self {
        RouterConfig { max_iterations: 20, worker_count: 1 }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum NetStatus {
    Routed,
    Open,
    Shorted,
}

impl NetStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            NetStatus::Routed => "routed",
            NetStatus::Open => "open",
            NetStatus::Shorted => "shorted",
        }
    }
}

/// Wire piece on one track. `track` is the fixed coordinate (y for M2,
/// x for M3); the interval runs along the track between grid nodes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Segment {
    pub layer: usize,
    pub track: Dbu,
    pub lo: Dbu,
    pub hi: Dbu,
}

impl Segment {
    /// Physical metal: minimum wire width with half-width end caps.
    pub fn rect(&self, rules: &TechRules) -> Rect {
        let half = rules.layer(self.layer).min_width / 2;
        match self.layer {
            L_M2 => Rect::new(self.lo - half, self.track - half, self.hi + half, self.track + half),
            L_M3 => Rect::new(self.track - half, self.lo - half, self.track + half, self.hi + half),
            _ => unreachable!("segments live on routing layers"),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ViaRef {
    /// V1 or V2 layer index.
    pub layer: usize,
    pub at: Point,
}

impl ViaRef {
    pub fn cut_rect(&self, rules: &TechRules) -> Rect {
        let half = rules.layer(self.layer).min_width / 2;
        Rect::centered_square(self.at.x, self.at.y, half)
    }

    /// Landing pads emitted on the enclosing metal layers. The V1 lower
    /// landing is the pin shape itself, so V1 only pads M2.
    pub fn pads(&self, rules: &TechRules) -> Vec<(usize, Rect)> {
        let half = rules.layer(self.layer).min_width / 2 + rules.layer(self.layer).min_enclosure.unwrap_or(0);
        let pad = Rect::centered_square(self.at.x, self.at.y, half);
        match self.layer {
            L_V1 => vec![(L_M2, pad)],
            L_V2 => vec![(L_M2, pad), (L_M3, pad)],
            _ => unreachable!("vias live on via layers"),
        }
    }
}

/// Terminal geometry carried along so connectivity can be re-derived
/// from the database alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Terminal {
    pub inst: String,
    pub pin: String,
    /// Transformed M1 pin shapes.
    pub shapes: Vec<Rect>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoutedNet {
    pub name: String,
    pub terminals: Vec<Terminal>,
    pub segments: Vec<Segment>,
    pub vias: Vec<ViaRef>,
    pub status: NetStatus,
    /// Skipped by the router: marked unconnected or fewer than two
    /// terminals.
    pub skipped: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RouteDb {
    pub testcell: String,
    pub nets: Vec<RoutedNet>,
}

impl RouteDb {
    /// Stable text dump: one line per segment and via, sorted.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for net in &self.nets {
            let _ = writeln!(out, "net {} status {}", net.name, net.status.as_str());
            let mut segs = net.segments.clone();
            segs.sort();
            for s in segs {
                let axis = if s.layer == L_M2 { ("y", "x") } else { ("x", "y") };
                let _ = writeln!(
                    out,
                    "  seg {} {}={} {}={}..{}",
                    if s.layer == L_M2 { "M2" } else { "M3" },
                    axis.0,
                    s.track,
                    axis.1,
                    s.lo,
                    s.hi
                );
            }
            let mut vias = net.vias.clone();
            vias.sort();
            for v in vias {
                let _ = writeln!(
                    out,
                    "  via {} ({},{})",
                    if v.layer == L_V1 { "V1" } else { "V2" },
                    v.at.x,
                    v.at.y
                );
            }
        }
        out
    }

    pub fn status_of(&self, net: &str) -> Option<NetStatus> {
        self.nets.iter().find(|n| n.name == net).map(|n| n.status)
    }
}
