//! Abutment testcell enumeration and pin connectivity assignment.
//!
//! Three generation methods are supported. The conventional method places
//! every ordered cell pair under every same-parity orientation combination
//! and serves as the exhaustive baseline. The second method builds one
//! six-instance, two-row testcell per ordered pair. The reduced method
//! covers the same seam classes with a four-instance self-abutment row per
//! cell, a five-instance row per unordered pair, and an eight-instance
//! block per (multi-height, single-height) pair.

use crate::geom::{bbox, Dbu, Point, Rect};
use crate::seed;
use crate::techlib::{CellMaster, LibraryProfile, PinDir, TechRules, L_M3};
use rand::Rng;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TestgenError {
    #[error("library size must be at least 1")]
    BadCount,
    #[error("testcell {0} references unknown master {1}")]
    UnknownMaster(String, String),
    #[error("testcell {id}: {msg}")]
    Placement { id: String, msg: String },
    #[error("testcell {0} has no signal pins")]
    NoSignalPins(String),
    #[error("testcell {0}: connectivity already assigned")]
    NetsPresent(String),
}

/// Legal placement orientations: identity, mirror about the vertical axis,
/// 180-degree rotation, mirror about the horizontal axis.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orientation {
    N,
    FN,
    S,
    FS,
}

/// Which original cell edge a label refers to.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Edge {
    L,
    R,
}

impl Edge {
    pub fn as_str(&self) -> &'static str {
        match self {
            Edge::L => "L",
            Edge::R => "R",
        }
    }
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [Orientation::N, Orientation::FN, Orientation::S, Orientation::FS];

    pub fn name(&self) -> &'static str {
        match self {
            Orientation::N => "N",
            Orientation::FN => "FN",
            Orientation::S => "S",
            Orientation::FS => "FS",
        }
    }

    pub fn parse(s: &str) -> Option<Orientation> {
        match s {
            "N" => Some(Orientation::N),
            "FN" => Some(Orientation::FN),
            "S" => Some(Orientation::S),
            "FS" => Some(Orientation::FS),
            _ => None,
        }
    }

    /// Map a cell-local rect into the frame of a placed instance whose
    /// bounding box has its lower-left at the origin.
    pub fn apply(&self, r: Rect, w: Dbu, h: Dbu) -> Rect {
        match self {
            Orientation::N => r,
            Orientation::FN => Rect::new(w - r.x2, r.y1, w - r.x1, r.y2),
            Orientation::S => Rect::new(w - r.x2, h - r.y2, w - r.x1, h - r.y1),
            Orientation::FS => Rect::new(r.x1, h - r.y2, r.x2, h - r.y1),
        }
    }

    /// Original cell edge that ends up on the right side of the placement.
    pub fn right_side_edge(&self) -> Edge {
        match self {
            Orientation::N | Orientation::FS => Edge::R,
            Orientation::FN | Orientation::S => Edge::L,
        }
    }

    /// Original cell edge that ends up on the left side of the placement.
    pub fn left_side_edge(&self) -> Edge {
        match self.right_side_edge() {
            Edge::L => Edge::R,
            Edge::R => Edge::L,
        }
    }
}

/// One placed instance inside a testcell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    pub inst_name: String,
    pub master: String,
    /// Lower-left corner of the oriented bounding box.
    pub origin: Point,
    pub orientation: Orientation,
}

impl Placement {
    pub fn cell_bbox(&self, master: &CellMaster, rules: &TechRules) -> Rect {
        Rect::new(
            self.origin.x,
            self.origin.y,
            self.origin.x + master.width,
            self.origin.y + master.height(rules),
        )
    }

    pub fn to_global(&self, local: Rect, master: &CellMaster, rules: &TechRules) -> Rect {
        self.orientation
            .apply(local, master.width, master.height(rules))
            .translate(self.origin.x, self.origin.y)
    }
}

/// A logical net: named terminals over (instance, pin) pairs. Nets with a
/// single terminal are kept but explicitly marked unconnected so the
/// router skips them without mistaking them for opens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Net {
    pub name: String,
    pub terminals: Vec<(String, String)>,
    pub unconnected: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TestcellKind {
    ConventionalPair,
    SynopsysPair,
    AaRow,
    AbRow,
    MhAb,
    /// One top placement concatenating a whole run's testcells.
    Combo,
}

/// Net-disjoint slice of a testcell; concatenated top placements keep one
/// section per original testcell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub id: String,
    pub first_instance: usize,
    pub instance_count: usize,
}

/// One abutment arrangement: placed instances, die area, and (once
/// assigned) the nets tying their pins together.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestcellSpec {
    pub id: String,
    pub kind: TestcellKind,
    pub instances: Vec<Placement>,
    pub die_area: Rect,
    pub nets: Vec<Net>,
    pub sections: Vec<Section>,
}

impl TestcellSpec {
    fn single_section(id: String, kind: TestcellKind, instances: Vec<Placement>, die_area: Rect) -> Self {
        let count = instances.len();
        TestcellSpec {
            sections: vec![Section { id: id.clone(), first_instance: 0, instance_count: count }],
            id,
            kind,
            instances,
            die_area,
            nets: Vec::new(),
        }
    }

    pub fn master_of<'a>(&self, profile: &'a LibraryProfile, inst: &Placement) -> Result<&'a CellMaster, TestgenError> {
        profile
            .cell(&inst.master)
            .ok_or_else(|| TestgenError::UnknownMaster(self.id.clone(), inst.master.clone()))
    }

    /// Placement sanity: unique names, everything inside the die, no
    /// overlaps, and gap-free abutment inside each row (except for the
    /// concatenated top placement where inter-section gaps are intended).
    pub fn validate(&self, profile: &LibraryProfile) -> Result<(), TestgenError> {
        let err = |msg: String| TestgenError::Placement { id: self.id.clone(), msg };
        if self.instances.is_empty() {
            return Err(err("no instances".into()));
        }
        if self.die_area.width() <= 0 || self.die_area.height() <= 0 {
            return Err(err("die area must have positive area".into()));
        }
        let rules = &profile.rules;
        let mut boxes = Vec::with_capacity(self.instances.len());
        for inst in &self.instances {
            let master = self.master_of(profile, inst)?;
            let b = inst.cell_bbox(master, rules);
            if !self.die_area.contains_rect(&b) {
                return Err(err(format!("instance {} lies outside the die", inst.inst_name)));
            }
            boxes.push(b);
        }
        for i in 0..self.instances.len() {
            for j in i + 1..self.instances.len() {
                if self.instances[i].inst_name == self.instances[j].inst_name {
                    return Err(err(format!("duplicate instance name {}", self.instances[i].inst_name)));
                }
                if boxes[i].overlaps(&boxes[j]) {
                    return Err(err(format!(
                        "instances {} and {} overlap",
                        self.instances[i].inst_name, self.instances[j].inst_name
                    )));
                }
            }
        }
        if self.kind != TestcellKind::Combo {
            let rows = (self.die_area.height() / rules.row_height).max(1);
            for r in 0..rows {
                let lo = self.die_area.y1 + r * rules.row_height;
                let hi = lo + rules.row_height;
                let mut row: Vec<&Rect> = boxes.iter().filter(|b| b.y1 < hi && b.y2 > lo).collect();
                row.sort_by_key(|b| b.x1);
                for pair in row.windows(2) {
                    if pair[0].x2 != pair[1].x1 {
                        return Err(err(format!("row {r} has a gap or overlap at x={}", pair[0].x2)));
                    }
                }
            }
        }
        if !self.nets.is_empty() {
            self.validate_nets(profile)?;
        }
        Ok(())
    }

    fn validate_nets(&self, profile: &LibraryProfile) -> Result<(), TestgenError> {
        let err = |msg: String| TestgenError::Placement { id: self.id.clone(), msg };
        let mut seen: BTreeSet<(&str, &str)> = BTreeSet::new();
        let mut names: BTreeSet<&str> = BTreeSet::new();
        for net in &self.nets {
            if !names.insert(&net.name) {
                return Err(err(format!("duplicate net name {}", net.name)));
            }
            if net.terminals.len() < 2 && !net.unconnected {
                return Err(err(format!("net {} has fewer than two terminals", net.name)));
            }
            for (inst, pin) in &net.terminals {
                if !seen.insert((inst, pin)) {
                    return Err(err(format!("pin {inst}/{pin} appears in more than one net")));
                }
            }
        }
        for inst in &self.instances {
            let master = self.master_of(profile, inst)?;
            for pin in &master.pins {
                if !seen.contains(&(inst.inst_name.as_str(), pin.name.as_str())) {
                    return Err(err(format!("pin {}/{} is not in any net", inst.inst_name, pin.name)));
                }
            }
        }
        Ok(())
    }

    /// Half-perimeter of the bounding box over a net's terminal pin
    /// shapes, in DBU.
    pub fn net_hpwl(&self, profile: &LibraryProfile, net: &Net) -> Dbu {
        let rules = &profile.rules;
        let mut acc: Option<Rect> = None;
        for (inst_name, pin_name) in &net.terminals {
            let Some(inst) = self.instances.iter().find(|i| &i.inst_name == inst_name) else {
                continue;
            };
            let Some(master) = profile.cell(&inst.master) else { continue };
            let Some(pin) = master.pin(pin_name) else { continue };
            if let Some(b) = bbox(pin.shapes.iter()) {
                let g = inst.to_global(b, master, rules);
                acc = Some(match acc {
                    None => g,
                    Some(a) => a.union(&g),
                });
            }
        }
        acc.map(|r| r.width() + r.height()).unwrap_or(0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Method {
    Conventional,
    Synopsys,
    Proposed,
}

impl Method {
    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "conventional" => Some(Method::Conventional),
            "synopsys" => Some(Method::Synopsys),
            "proposed" => Some(Method::Proposed),
            _ => None,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    SingleCellOnly,
    CellByCellOnly,
    AllComboInOneCellOnly,
    All,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "single_cell_only" => Some(Mode::SingleCellOnly),
            "cell_by_cell_only" => Some(Mode::CellByCellOnly),
            "all_combo_in_one_cell_only" => Some(Mode::AllComboInOneCellOnly),
            "all" => Some(Mode::All),
            _ => None,
        }
    }
}

/// Total instances needed to cover a library of `n` single-height cells.
///
/// conventional: 8n + 8n(n-1); second method: 6n + 6n(n-1); reduced:
/// 4n + 5n(n-1)/2, with n(n-1) always even so the result is exact.
pub fn count_instances(n: u64, method: Method) -> Result<u64, TestgenError> {
    if n < 1 {
        return Err(TestgenError::BadCount);
    }
    let pairs = n * (n - 1);
    Ok(match method {
        Method::Conventional => 8 * n + 8 * pairs,
        Method::Synopsys => 6 * n + 6 * pairs,
        Method::Proposed => 4 * n + 5 * pairs / 2,
    })
}

fn inst(k: usize, master: &str, x: Dbu, y: Dbu, orientation: Orientation) -> Placement {
    Placement {
        inst_name: format!("U{}", k + 1),
        master: master.to_string(),
        origin: Point::new(x, y),
        orientation,
    }
}

/// Lay a list of (master, orientation) side by side at `y`, returning the
/// placements and the row width.
fn lay_row(
    profile: &LibraryProfile,
    row: &[(usize, Orientation)],
    y: Dbu,
    first_index: usize,
) -> (Vec<Placement>, Dbu) {
    let mut x = 0;
    let mut out = Vec::with_capacity(row.len());
    for (k, (cell, orient)) in row.iter().enumerate() {
        let master = &profile.cells[*cell];
        out.push(inst(first_index + k, &master.name, x, y, *orient));
        x += master.width;
    }
    (out, x)
}

fn aa_row(profile: &LibraryProfile, cell: usize) -> TestcellSpec {
    use Orientation::*;
    let name = profile.cells[cell].name.clone();
    let row = [(cell, N), (cell, FN), (cell, FN), (cell, N)];
    let (instances, width) = lay_row(profile, &row, 0, 0);
    TestcellSpec::single_section(
        format!("scell_{name}"),
        TestcellKind::AaRow,
        instances,
        Rect::new(0, 0, width, profile.rules.row_height),
    )
}

fn ab_row(profile: &LibraryProfile, a: usize, b: usize) -> TestcellSpec {
    use Orientation::*;
    let an = profile.cells[a].name.clone();
    let bn = profile.cells[b].name.clone();
    let row = [(b, N), (a, N), (b, FN), (a, FN), (b, N)];
    let (instances, width) = lay_row(profile, &row, 0, 0);
    TestcellSpec::single_section(
        format!("scell_{an}_{bn}"),
        TestcellKind::AbRow,
        instances,
        Rect::new(0, 0, width, profile.rules.row_height),
    )
}

/// Multi-height block: three stacked columns of the single-height cell
/// flanking two copies of the multi-height cell, the second copy with
/// flipped row parity. Eight instances when the tall cell spans two rows.
fn mh_ab(profile: &LibraryProfile, multi: usize, single: usize) -> TestcellSpec {
    use Orientation::*;
    let rules = &profile.rules;
    let a = &profile.cells[multi];
    let b = &profile.cells[single];
    let rows = a.height_rows as Dbu;
    let h = rules.row_height;

    let mut instances = Vec::new();
    let mut k = 0;
    let mut x = 0;
    let column = |x: Dbu, flipped: bool, k: &mut usize, instances: &mut Vec<Placement>| {
        for r in 0..rows {
            let parity = (r % 2 == 1) ^ flipped;
            let orient = if parity { FS } else { N };
            instances.push(inst(*k, &b.name, x, r * h, orient));
            *k += 1;
        }
    };

    column(x, false, &mut k, &mut instances);
    x += b.width;
    instances.push(inst(k, &a.name, x, 0, N));
    k += 1;
    x += a.width;
    column(x, false, &mut k, &mut instances);
    x += b.width;
    instances.push(inst(k, &a.name, x, 0, FS));
    k += 1;
    x += a.width;
    column(x, true, &mut k, &mut instances);
    x += b.width;

    TestcellSpec::single_section(
        format!("mcell_{}_{}", a.name, b.name),
        TestcellKind::MhAb,
        instances,
        Rect::new(0, 0, x, rows * h),
    )
}

/// Two three-cell rows: B A B over B(FN) A B(FN), the target cell kept
/// upright in the middle of both.
fn synopsys_pair(profile: &LibraryProfile, a: usize, b: usize) -> TestcellSpec {
    use Orientation::*;
    let an = profile.cells[a].name.clone();
    let bn = profile.cells[b].name.clone();
    let h = profile.rules.row_height;
    let (mut instances, width) = lay_row(profile, &[(b, N), (a, N), (b, N)], 0, 0);
    let (upper, _) = lay_row(profile, &[(b, FN), (a, N), (b, FN)], h, 3);
    instances.extend(upper);
    TestcellSpec::single_section(
        format!("syn_{an}_{bn}"),
        TestcellKind::SynopsysPair,
        instances,
        Rect::new(0, 0, width, 2 * h),
    )
}

fn conventional_pair(profile: &LibraryProfile, a: usize, b: usize, oa: Orientation, ob: Orientation) -> TestcellSpec {
    let an = profile.cells[a].name.clone();
    let bn = profile.cells[b].name.clone();
    let (instances, width) = lay_row(profile, &[(a, oa), (b, ob)], 0, 0);
    TestcellSpec::single_section(
        format!("conv_{an}_{bn}_{}_{}", oa.name().to_lowercase(), ob.name().to_lowercase()),
        TestcellKind::ConventionalPair,
        instances,
        Rect::new(0, 0, width, profile.rules.row_height),
    )
}

/// Self-abutment testcells: the per-cell portion of each method.
fn self_testcells(profile: &LibraryProfile, method: Method) -> Vec<TestcellSpec> {
    use Orientation::*;
    let mut out = Vec::new();
    for &cell in &profile.single_height {
        match method {
            Method::Proposed => out.push(aa_row(profile, cell)),
            Method::Synopsys => out.push(synopsys_pair(profile, cell, cell)),
            Method::Conventional => {
                for (oa, ob) in [(N, N), (N, FN), (FN, N), (FN, FN)] {
                    out.push(conventional_pair(profile, cell, cell, oa, ob));
                }
            }
        }
    }
    out
}

/// Cross-pair testcells added on top of the self set. Pairs of two
/// multi-height cells are not generated.
fn cross_testcells(profile: &LibraryProfile, method: Method) -> Vec<TestcellSpec> {
    use Orientation::*;
    let mut out = Vec::new();
    match method {
        Method::Proposed => {
            for (i, &a) in profile.single_height.iter().enumerate() {
                for &b in &profile.single_height[i + 1..] {
                    out.push(ab_row(profile, a, b));
                }
            }
            for &m in &profile.multi_height {
                for &s in &profile.single_height {
                    out.push(mh_ab(profile, m, s));
                }
            }
        }
        Method::Synopsys => {
            for &a in &profile.single_height {
                for &b in &profile.single_height {
                    if a != b {
                        out.push(synopsys_pair(profile, a, b));
                    }
                }
            }
        }
        Method::Conventional => {
            for &a in &profile.single_height {
                for &b in &profile.single_height {
                    if a != b {
                        for (oa, ob) in [(N, N), (N, FN), (FN, N), (FN, FN)] {
                            out.push(conventional_pair(profile, a, b, oa, ob));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Concatenate testcells into one top placement, two vertical-layer
/// pitches apart, keeping one net-disjoint section per part.
fn combo_testcell(profile: &LibraryProfile, parts: &[TestcellSpec]) -> TestcellSpec {
    let gap = 2 * profile.rules.layer(L_M3).pitch;
    let mut instances = Vec::new();
    let mut sections = Vec::new();
    let mut x = 0;
    let mut height = profile.rules.row_height;
    for part in parts {
        sections.push(Section {
            id: part.id.clone(),
            first_instance: instances.len(),
            instance_count: part.instances.len(),
        });
        for p in &part.instances {
            instances.push(Placement {
                inst_name: format!("U{}", instances.len() + 1),
                master: p.master.clone(),
                origin: Point::new(p.origin.x - part.die_area.x1 + x, p.origin.y - part.die_area.y1),
                orientation: p.orientation,
            });
        }
        x += part.die_area.width() + gap;
        height = height.max(part.die_area.height());
    }
    let width = if parts.is_empty() { gap } else { x - gap };
    TestcellSpec {
        id: "all_combo".to_string(),
        kind: TestcellKind::Combo,
        instances,
        die_area: Rect::new(0, 0, width, height),
        nets: Vec::new(),
        sections,
    }
}

/// Enumerate the testcell set for a method and verification mode. The
/// incremental modes nest: the single-cell set is a subset of the
/// cell-by-cell set, which `All` extends with the concatenated top
/// placement.
pub fn enumerate_testcells(
    profile: &LibraryProfile,
    method: Method,
    mode: Mode,
) -> Result<Vec<TestcellSpec>, TestgenError> {
    if profile.is_empty() {
        return Err(TestgenError::BadCount);
    }
    let mut out = self_testcells(profile, method);
    if mode != Mode::SingleCellOnly {
        out.extend(cross_testcells(profile, method));
    }
    match mode {
        Mode::SingleCellOnly | Mode::CellByCellOnly => {}
        Mode::AllComboInOneCellOnly => {
            let combo = combo_testcell(profile, &out);
            out = vec![combo];
        }
        Mode::All => {
            let combo = combo_testcell(profile, &out);
            out.push(combo);
        }
    }
    for spec in &out {
        spec.validate(profile)?;
    }
    Ok(out)
}

/// One interior vertical seam, identified by the original cell edges that
/// meet there. Mirroring a whole layout about a vertical axis swaps the
/// two sides without changing which cell edge faces the seam, so classes
/// are normalized by picking the lexicographically smaller of the two
/// side orders.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoundaryClass {
    pub left_master: String,
    pub left_edge: Edge,
    pub right_master: String,
    pub right_edge: Edge,
    pub canonical: bool,
}

impl BoundaryClass {
    pub fn new(left_master: &str, left_edge: Edge, right_master: &str, right_edge: Edge) -> Self {
        BoundaryClass {
            left_master: left_master.to_string(),
            left_edge,
            right_master: right_master.to_string(),
            right_edge,
            canonical: false,
        }
    }

    pub fn canonicalize(mut self) -> Self {
        let this = (
            self.left_master.clone(),
            self.left_edge,
            self.right_master.clone(),
            self.right_edge,
        );
        let mirrored = (
            self.right_master.clone(),
            self.right_edge,
            self.left_master.clone(),
            self.left_edge,
        );
        if mirrored < this {
            self.left_master = mirrored.0;
            self.left_edge = mirrored.1;
            self.right_master = mirrored.2;
            self.right_edge = mirrored.3;
        }
        self.canonical = true;
        self
    }
}

impl std::fmt::Display for BoundaryClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}.{}|{}.{})",
            self.left_master,
            self.left_edge.as_str(),
            self.right_master,
            self.right_edge.as_str()
        )
    }
}

/// Canonical seam classes of a testcell, one per interior vertical seam.
pub fn boundary_classes(spec: &TestcellSpec, profile: &LibraryProfile) -> Result<BTreeSet<BoundaryClass>, TestgenError> {
    let rules = &profile.rules;
    let mut boxes = Vec::with_capacity(spec.instances.len());
    for p in &spec.instances {
        boxes.push(p.cell_bbox(spec.master_of(profile, p)?, rules));
    }
    let mut out = BTreeSet::new();
    for i in 0..spec.instances.len() {
        for j in 0..spec.instances.len() {
            if i == j || boxes[i].x2 != boxes[j].x1 {
                continue;
            }
            // shared edge must have positive length
            if boxes[i].y2.min(boxes[j].y2) <= boxes[i].y1.max(boxes[j].y1) {
                continue;
            }
            let left = &spec.instances[i];
            let right = &spec.instances[j];
            out.insert(
                BoundaryClass::new(
                    &left.master,
                    left.orientation.right_side_edge(),
                    &right.master,
                    right.orientation.left_side_edge(),
                )
                .canonicalize(),
            );
        }
    }
    Ok(out)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Connectivity {
    Aligned,
    Random,
}

impl Connectivity {
    pub fn parse(s: &str) -> Option<Connectivity> {
        match s {
            "aligned" => Some(Connectivity::Aligned),
            "random" => Some(Connectivity::Random),
            _ => None,
        }
    }
}

fn aligned_nets(
    spec: &TestcellSpec,
    profile: &LibraryProfile,
    section: &Section,
    prefix: &str,
) -> Result<Vec<Net>, TestgenError> {
    let insts = &spec.instances[section.first_instance..section.first_instance + section.instance_count];
    let mut masters: Vec<&str> = Vec::new();
    for p in insts {
        if !masters.contains(&p.master.as_str()) {
            masters.push(&p.master);
        }
    }
    let mut nets = Vec::new();
    for master_name in masters {
        let master = profile
            .cell(master_name)
            .ok_or_else(|| TestgenError::UnknownMaster(spec.id.clone(), master_name.to_string()))?;
        for pin in &master.pins {
            let terminals: Vec<(String, String)> = insts
                .iter()
                .filter(|p| p.master == master_name)
                .map(|p| (p.inst_name.clone(), pin.name.clone()))
                .collect();
            let unconnected = terminals.len() < 2;
            nets.push(Net {
                name: format!("{prefix}{}_{}", master_name, pin.name),
                terminals,
                unconnected,
            });
        }
    }
    Ok(nets)
}

fn random_nets(
    spec: &TestcellSpec,
    profile: &LibraryProfile,
    section: &Section,
    prefix: &str,
    global_seed: u64,
) -> Result<Vec<Net>, TestgenError> {
    let insts = &spec.instances[section.first_instance..section.first_instance + section.instance_count];
    let mut outputs: Vec<(usize, String)> = Vec::new();
    let mut inputs: Vec<(usize, String)> = Vec::new();
    for (k, p) in insts.iter().enumerate() {
        let master = profile
            .cell(&p.master)
            .ok_or_else(|| TestgenError::UnknownMaster(spec.id.clone(), p.master.clone()))?;
        for pin in &master.pins {
            match pin.direction {
                PinDir::Output => outputs.push((k, pin.name.clone())),
                PinDir::Input | PinDir::Inout => inputs.push((k, pin.name.clone())),
            }
        }
    }

    let mut rng = seed::rng_for(global_seed, &format!("connect:{}", section.id));
    let mut unmatched: Vec<usize> = (0..inputs.len()).collect();
    let mut nets = Vec::new();
    for (ordinal, (out_inst, out_pin)) in outputs.iter().enumerate() {
        let fanout = rng.gen_range(1..=3usize);
        let mut terminals = vec![(insts[*out_inst].inst_name.clone(), out_pin.clone())];
        for _ in 0..fanout {
            // Sinks must sit on a different instance than the driver.
            let eligible: Vec<usize> = (0..unmatched.len())
                .filter(|&slot| inputs[unmatched[slot]].0 != *out_inst)
                .collect();
            if eligible.is_empty() {
                break;
            }
            let slot = eligible[rng.gen_range(0..eligible.len())];
            let (inst_idx, pin_name) = &inputs[unmatched[slot]];
            terminals.push((insts[*inst_idx].inst_name.clone(), pin_name.clone()));
            unmatched.remove(slot);
        }
        let unconnected = terminals.len() < 2;
        nets.push(Net { name: format!("{prefix}n{ordinal}"), terminals, unconnected });
    }
    if !unmatched.is_empty() {
        let terminals: Vec<(String, String)> = unmatched
            .iter()
            .map(|&i| (insts[inputs[i].0].inst_name.clone(), inputs[i].1.clone()))
            .collect();
        let unconnected = terminals.len() < 2;
        nets.push(Net { name: format!("{prefix}dump"), terminals, unconnected });
    }
    Ok(nets)
}

/// Assign pin connectivity. `Aligned` ties every same-named pin of
/// same-master instances into one net. `Random` wires each output to one
/// to three inputs of other instances and collects leftover inputs into a
/// shared dump net; the matching depends only on (testcell id, seed).
pub fn assign_connectivity(
    spec: &TestcellSpec,
    profile: &LibraryProfile,
    strategy: Connectivity,
    global_seed: u64,
) -> Result<TestcellSpec, TestgenError> {
    if !spec.nets.is_empty() {
        return Err(TestgenError::NetsPresent(spec.id.clone()));
    }
    let mut signal_pins = 0usize;
    for p in &spec.instances {
        signal_pins += spec.master_of(profile, p)?.pins.len();
    }
    if signal_pins == 0 {
        return Err(TestgenError::NoSignalPins(spec.id.clone()));
    }

    let mut nets = Vec::new();
    let multi = spec.sections.len() > 1;
    for section in &spec.sections {
        let prefix = if multi { format!("{}__", section.id) } else { String::new() };
        let section_nets = match strategy {
            Connectivity::Aligned => aligned_nets(spec, profile, section, &prefix)?,
            Connectivity::Random => random_nets(spec, profile, section, &prefix, global_seed)?,
        };
        nets.extend(section_nets);
    }
    let mut out = spec.clone();
    out.nets = nets;
    out.validate(profile)?;
    Ok(out)
}
