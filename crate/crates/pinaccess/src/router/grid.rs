//! Track grid construction: tracks, blockages, and pin access points.

use super::straps::StrapPlan;
use super::RouteError;
use crate::geom::{Dbu, Rect};
use crate::techlib::{LibraryProfile, L_M1, L_M2, L_M3, L_V1};
use crate::testgen::TestcellSpec;

/// On-grid access points of one pin of one instance.
#[derive(Clone, Debug)]
pub struct PinAccess {
    pub inst: String,
    pub pin: String,
    /// Transformed M1 shapes.
    pub shapes: Vec<Rect>,
    /// (m2 track index, m3 track index) nodes whose V1 landing fits
    /// inside the pin with full enclosure.
    pub nodes: Vec<(usize, usize)>,
}

/// Routing fabric for one testcell: horizontal M2 tracks, vertical M3
/// tracks, blocked nodes, and per-pin access points.
#[derive(Clone, Debug)]
pub struct RoutingGrid {
    pub die: Rect,
    /// y coordinate per M2 track.
    pub m2_tracks: Vec<Dbu>,
    /// x coordinate per M3 track.
    pub m3_tracks: Vec<Dbu>,
    /// blocked[routing layer][ti * m3_tracks + tj]; routing layer 0 is
    /// M2, 1 is M3.
    blocked: [Vec<bool>; 2],
    pub access: Vec<PinAccess>,
}

impl RoutingGrid {
    pub fn node_xy(&self, ti: usize, tj: usize) -> (Dbu, Dbu) {
        (self.m3_tracks[tj], self.m2_tracks[ti])
    }

    pub fn is_blocked(&self, route_layer: usize, ti: usize, tj: usize) -> bool {
        self.blocked[route_layer][ti * self.m3_tracks.len() + tj]
    }

    pub fn access_for(&self, inst: &str, pin: &str) -> Option<&PinAccess> {
        self.access.iter().find(|a| a.inst == inst && a.pin == pin)
    }
}

fn tracks(lo: Dbu, hi: Dbu, pitch: Dbu) -> Vec<Dbu> {
    let mut out = Vec::new();
    let mut t = lo + pitch / 2;
    while t <= hi - pitch / 2 {
        out.push(t);
        t += pitch;
    }
    out
}

/// Build the grid: tracks covering the die, nodes blocked by straps and
/// cell obstructions, and access points per pin. A pin with zero access
/// points is legal; it simply cannot be reached.
pub fn build_grid(
    spec: &TestcellSpec,
    profile: &LibraryProfile,
    straps: &StrapPlan,
) -> Result<RoutingGrid, RouteError> {
    let rules = &profile.rules;
    let m2 = rules.layer(L_M2);
    let m3 = rules.layer(L_M3);
    let die = spec.die_area;
    if die.width() < m3.pitch || die.height() < m2.pitch {
        return Err(RouteError::DieTooSmall(die.width(), die.height()));
    }
    let m2_tracks = tracks(die.y1, die.y2, m2.pitch);
    let m3_tracks = tracks(die.x1, die.x2, m3.pitch);

    // Worst-case metal footprint at a node: a via landing pad.
    let v1 = rules.layer(L_V1);
    let pad_half = v1.min_width / 2 + v1.min_enclosure.unwrap_or(0);

    // Blockage shapes per routing layer. Straps block their own layer
    // and, standing in for their via stacks down to the rails, the
    // crossing routing layer underneath them. Obstructions block only
    // their own layer.
    let mut blockers: [Vec<Rect>; 2] = [Vec::new(), Vec::new()];
    for strap in &straps.straps {
        let r = strap.rect(die);
        blockers[0].push(r);
        blockers[1].push(r);
    }
    let mut m1_blockers: Vec<Rect> = Vec::new();
    for inst in &spec.instances {
        let master = profile
            .cell(&inst.master)
            .ok_or_else(|| RouteError::UnknownMaster(inst.master.clone()))?;
        for (layer, rect) in &master.obstructions {
            let global = inst.to_global(*rect, master, rules);
            match *layer {
                L_M2 => blockers[0].push(global),
                L_M3 => blockers[1].push(global),
                L_M1 => m1_blockers.push(global),
                _ => {}
            }
        }
        for rail in &master.power_rails {
            m1_blockers.push(inst.to_global(*rail, master, rules));
        }
    }

    let t3 = m3_tracks.len();
    let mut blocked = [vec![false; m2_tracks.len() * t3], vec![false; m2_tracks.len() * t3]];
    for (layer, spacing) in [(0usize, m2.min_spacing), (1usize, m3.min_spacing)] {
        if blockers[layer].is_empty() {
            continue;
        }
        for (ti, &y) in m2_tracks.iter().enumerate() {
            for (tj, &x) in m3_tracks.iter().enumerate() {
                let pad = Rect::centered_square(x, y, pad_half);
                let hit = blockers[layer].iter().any(|b| pad.dist2(b) < (spacing as i128).pow(2));
                if hit {
                    blocked[layer][ti * t3 + tj] = true;
                }
            }
        }
    }

    // Access points: the M1 landing (cut plus enclosure) must fit inside
    // a single pin shape, must not touch foreign M1, and the M2 node must
    // be usable.
    let mut access = Vec::new();
    for inst in &spec.instances {
        let master = profile.cell(&inst.master).unwrap();
        for pin in &master.pins {
            let shapes: Vec<Rect> = pin.shapes.iter().map(|s| inst.to_global(*s, master, rules)).collect();
            let mut nodes = Vec::new();
            for (ti, &y) in m2_tracks.iter().enumerate() {
                for (tj, &x) in m3_tracks.iter().enumerate() {
                    let landing = Rect::centered_square(x, y, pad_half);
                    if !shapes.iter().any(|s| s.contains_rect(&landing)) {
                        continue;
                    }
                    if blocked[0][ti * t3 + tj] {
                        continue;
                    }
                    if m1_blockers.iter().any(|b| landing.overlaps(b)) {
                        continue;
                    }
                    nodes.push((ti, tj));
                }
            }
            access.push(PinAccess {
                inst: inst.inst_name.clone(),
                pin: pin.name.clone(),
                shapes,
                nodes,
            });
        }
    }

    Ok(RoutingGrid { die, m2_tracks, m3_tracks, blocked, access })
}
