//! Synthetic technology decks and cell libraries.
//!
//! Everything downstream of the parser is exercised against these
//! programmatic libraries. The deck is a five-layer stack (M1/V1/M2/V2/M3)
//! on a 64 DBU grid with 9-track rows. Pin bars are 48 DBU wide so a via
//! pad (32 cut + 8 enclosure per side) fits exactly; healthy cells keep
//! pins two grid columns apart and away from cell edges, which keeps them
//! clean under every rule in the deck.

use crate::geom::{Dbu, Rect};
use crate::techlib::{
    CellMaster, Direction, LayerKind, LayerRule, Pin, PinDir, Scale, TechRules,
};

/// Grid pitch shared by all layers and the placement site.
pub const PITCH: Dbu = 64;
/// Tracks per single-height row.
pub const TRACKS_PER_ROW: Dbu = 9;
/// Row height: 9 tracks.
pub const ROW: Dbu = PITCH * TRACKS_PER_ROW;
/// Power rail thickness.
pub const RAIL: Dbu = 32;
/// Half-width of a pin bar (bar = via cut + enclosure on each side).
const BAR_HALF: Dbu = 24;

fn metal(name: &str, dir: Direction, spacing: Dbu, dp: Option<Dbu>) -> LayerRule {
    LayerRule {
        name: name.to_string(),
        kind: LayerKind::Metal,
        direction: dir,
        pitch: PITCH,
        min_width: 32,
        min_spacing: spacing,
        same_net_cut_spacing: None,
        min_enclosure: None,
        dp_spacing: dp,
    }
}

fn via(name: &str) -> LayerRule {
    LayerRule {
        name: name.to_string(),
        kind: LayerKind::Via,
        direction: Direction::None,
        pitch: PITCH,
        min_width: 32,
        min_spacing: 32,
        same_net_cut_spacing: Some(32),
        min_enclosure: Some(8),
        dp_spacing: None,
    }
}

/// The shared synthetic rule deck.
///
/// The routing-layer spacing of 16 makes one-track adjacency of wires
/// and via landing pads exactly legal, so a conflict-free node
/// assignment is also DRC-clean; any margin above 1.0 re-tightens those
/// patterns. M1 keeps a 32 spacing so edge-hugging pins abutted across a
/// seam do violate.
pub fn deck() -> TechRules {
    TechRules {
        dbu_per_micron: 1000,
        layers: vec![
            metal("M1", Direction::Horizontal, 32, Some(40)),
            via("V1"),
            metal("M2", Direction::Horizontal, 16, None),
            via("V2"),
            metal("M3", Direction::Vertical, 16, None),
        ],
        site_width: PITCH,
        row_height: ROW,
        margin_scale: Scale::from_integer(1),
    }
}

/// x coordinate of vertical routing column `c` (half-pitch offset).
pub fn col_x(c: Dbu) -> Dbu {
    PITCH / 2 + c * PITCH
}

/// y coordinate of horizontal routing track `t`.
pub fn track_y(t: Dbu) -> Dbu {
    PITCH / 2 + t * PITCH
}

/// Vertical pin bar on column `c` spanning tracks `t_lo..=t_hi`.
pub fn pin_bar(c: Dbu, t_lo: Dbu, t_hi: Dbu) -> Rect {
    Rect::new(
        col_x(c) - BAR_HALF,
        track_y(t_lo) - BAR_HALF,
        col_x(c) + BAR_HALF,
        track_y(t_hi) + BAR_HALF,
    )
}

pub struct PinSpec {
    pub name: &'static str,
    pub dir: PinDir,
    pub column: Dbu,
    pub tracks: (Dbu, Dbu),
}

pub fn cell(name: &str, width_sites: Dbu, rows: u32, pins: &[PinSpec]) -> CellMaster {
    let width = width_sites * PITCH;
    let height = rows as Dbu * ROW;
    CellMaster {
        name: name.to_string(),
        width,
        height_rows: rows,
        pins: pins
            .iter()
            .map(|p| Pin {
                name: p.name.to_string(),
                direction: p.dir,
                shapes: vec![pin_bar(p.column, p.tracks.0, p.tracks.1)],
            })
            .collect(),
        power_rails: [
            Rect::new(0, height - RAIL, width, height),
            Rect::new(0, 0, width, RAIL),
        ],
        obstructions: Vec::new(),
    }
}

/// Minimal one-pin cell, used for width/profile arithmetic.
pub fn simple_cell(name: &str, width_sites: Dbu, _rules: &TechRules) -> CellMaster {
    cell(
        name,
        width_sites,
        1,
        &[PinSpec { name: "A", dir: PinDir::Input, column: 1, tracks: (2, 4) }],
    )
}

fn healthy(name: &str, variant: usize) -> CellMaster {
    use PinDir::*;
    match variant % 3 {
        0 => cell(
            name,
            6,
            1,
            &[
                PinSpec { name: "A", dir: Input, column: 1, tracks: (2, 4) },
                PinSpec { name: "Y", dir: Output, column: 3, tracks: (3, 5) },
            ],
        ),
        1 => cell(
            name,
            8,
            1,
            &[
                PinSpec { name: "A", dir: Input, column: 1, tracks: (2, 4) },
                PinSpec { name: "B", dir: Input, column: 3, tracks: (2, 4) },
                PinSpec { name: "Y", dir: Output, column: 5, tracks: (3, 5) },
            ],
        ),
        _ => cell(
            name,
            10,
            1,
            &[
                PinSpec { name: "A", dir: Input, column: 1, tracks: (1, 3) },
                PinSpec { name: "B", dir: Input, column: 5, tracks: (2, 4) },
                PinSpec { name: "Y", dir: Output, column: 3, tracks: (5, 7) },
            ],
        ),
    }
}

/// `n` healthy single-height cells with cycling footprints.
pub fn uniform_library(n: usize) -> (TechRules, Vec<CellMaster>) {
    let cells = (0..n).map(|i| healthy(&format!("C{i:02}"), i)).collect();
    (deck(), cells)
}

/// Three friendly cells that route cleanly under every mode.
pub fn toy_clean_library() -> (TechRules, Vec<CellMaster>) {
    let cells = vec![healthy("INV", 0), healthy("NAND", 1), healthy("BUF", 2)];
    (deck(), cells)
}

/// Six cells, one of which hugs the left cell edge with its input pin.
/// In a self-abutment row the mirrored copies of that pin land on
/// adjacent routing columns across the seam, 16 DBU apart, so any
/// different-net assignment of the facing pins breaks the 32 DBU spacing
/// rule on M1, and the via pads their access forces break it on M2.
pub fn planted_defect_library() -> (TechRules, Vec<CellMaster>) {
    use PinDir::*;
    let planted = cell(
        "WEDGE",
        6,
        1,
        &[
            PinSpec { name: "P", dir: Input, column: 0, tracks: (2, 3) },
            PinSpec { name: "A", dir: Input, column: 2, tracks: (5, 7) },
            PinSpec { name: "Y", dir: Output, column: 4, tracks: (2, 4) },
        ],
    );
    let cells = vec![
        healthy("H1", 0),
        healthy("H2", 1),
        planted,
        healthy("H3", 2),
        cell(
            "H4",
            6,
            1,
            &[
                PinSpec { name: "A", dir: Input, column: 1, tracks: (5, 7) },
                PinSpec { name: "Y", dir: Output, column: 3, tracks: (1, 3) },
            ],
        ),
        cell(
            "H5",
            4,
            1,
            &[
                PinSpec { name: "A", dir: Input, column: 1, tracks: (2, 3) },
                PinSpec { name: "Y", dir: Output, column: 1, tracks: (5, 6) },
            ],
        ),
    ];
    (deck(), cells)
}

/// Name of the defective cell in `planted_defect_library`.
pub const PLANTED_CELL: &str = "WEDGE";

/// Library with one double-height cell.
pub fn mixed_height_library() -> (TechRules, Vec<CellMaster>) {
    use PinDir::*;
    let tall = cell(
        "TALL",
        8,
        2,
        &[
            PinSpec { name: "A", dir: Input, column: 1, tracks: (2, 4) },
            PinSpec { name: "B", dir: Input, column: 3, tracks: (10, 12) },
            PinSpec { name: "Y", dir: Output, column: 5, tracks: (6, 8) },
        ],
    );
    let cells = vec![healthy("S1", 0), tall, healthy("S2", 1)];
    (deck(), cells)
}

/// Two narrow cells with pins in disjoint vertical bands. The inner cell
/// drives, the outer only listens, so random assignment produces long
/// cross-band nets while aligned nets stay flat.
pub fn banded_pair_library() -> (TechRules, Vec<CellMaster>) {
    use PinDir::*;
    let a = cell(
        "BANDHI",
        4,
        1,
        &[
            PinSpec { name: "X", dir: Input, column: 1, tracks: (7, 7) },
            PinSpec { name: "Y", dir: Output, column: 2, tracks: (5, 5) },
        ],
    );
    let b = cell(
        "BANDLO",
        4,
        1,
        &[PinSpec { name: "X", dir: Input, column: 1, tracks: (1, 1) }],
    );
    (deck(), vec![a, b])
}

/// 108 single-height cells with roughly 80% of widths within ten times
/// the minimum, mirroring a mainstream-density library histogram.
pub fn library1_like() -> (TechRules, Vec<CellMaster>) {
    use PinDir::*;
    let mut cells = Vec::with_capacity(108);
    for i in 0..108 {
        let width_sites: Dbu = if i < 87 { 4 + (i as Dbu % 10) * 4 } else { 44 + (i as Dbu % 8) * 7 };
        let name = format!("L{i:03}");
        let mut pins = vec![PinSpec { name: "A", dir: Input, column: 1, tracks: (2, 4) }];
        if width_sites >= 6 {
            pins.push(PinSpec { name: "Y", dir: Output, column: 3, tracks: (3, 5) });
        } else {
            pins.push(PinSpec { name: "Y", dir: Output, column: 1, tracks: (6, 7) });
        }
        cells.push(cell(&name, width_sites, 1, &pins));
    }
    (deck(), cells)
}
