//! Geometric design-rule checking and per-cell attribution.
//!
//! Checks run over the union of library geometry (pin shapes and
//! obstructions of every placed instance) and routed geometry (wires,
//! via cuts, landing pads). Power rails and straps are blockage models,
//! not checked shapes. All comparisons are integer: spacing rules
//! compare squared Euclidean rectangle distance against the squared
//! threshold.

use crate::geom::{bbox, Dbu, Rect};
use crate::router::{NetVerdict, RouteDb};
use crate::techlib::{LibraryProfile, TechRules};
use crate::testgen::TestcellSpec;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DrcError {
    #[error("unknown rule name `{0}`")]
    UnknownRule(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DrcRule {
    DiffNetSpacing,
    SameNetCutSpacing,
    MinWidth,
    MinEnclosure,
    DpOddCycle,
    Short,
    Open,
}

impl DrcRule {
    pub fn display_name(&self) -> &'static str {
        match self {
            DrcRule::DiffNetSpacing => "Diff net spacing",
            DrcRule::SameNetCutSpacing => "Same net via-cut spacing",
            DrcRule::MinWidth => "Min width",
            DrcRule::MinEnclosure => "Min enclosure",
            DrcRule::DpOddCycle => "Local double pattern cycle",
            DrcRule::Short => "Short",
            DrcRule::Open => "Open",
        }
    }
}

/// Rule names accepted for suppression. Several names from production
/// rule decks are recognized so configurations carry over, but have no
/// matching check here and suppress nothing.
const RECOGNIZED_NOOP_RULES: &[&str] = &["End of line spacing", "Diff net var rule spacing", "Same net spacing"];

#[derive(Clone, Debug, Default)]
pub struct IgnoreSet {
    rules: BTreeSet<DrcRule>,
}

impl IgnoreSet {
    pub fn empty() -> Self {
        IgnoreSet::default()
    }

    pub fn of(rules: impl IntoIterator<Item = DrcRule>) -> Self {
        IgnoreSet { rules: rules.into_iter().collect() }
    }

    pub fn parse(names: &[String]) -> Result<IgnoreSet, DrcError> {
        let mut rules = BTreeSet::new();
        for name in names {
            let known = [
                DrcRule::DiffNetSpacing,
                DrcRule::SameNetCutSpacing,
                DrcRule::MinWidth,
                DrcRule::MinEnclosure,
                DrcRule::DpOddCycle,
                DrcRule::Short,
                DrcRule::Open,
            ]
            .into_iter()
            .find(|r| r.display_name() == name);
            match known {
                Some(rule) => {
                    rules.insert(rule);
                }
                None if RECOGNIZED_NOOP_RULES.contains(&name.as_str()) => {}
                None => return Err(DrcError::UnknownRule(name.clone())),
            }
        }
        Ok(IgnoreSet { rules })
    }

    pub fn contains(&self, rule: DrcRule) -> bool {
        self.rules.contains(&rule)
    }
}

/// One rule breach: geometry marker, involved nets, and (after
/// attribution) the cell masters it lands on.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DrcViolation {
    pub rule: DrcRule,
    pub layer: String,
    pub marker: Rect,
    pub nets: Vec<String>,
    pub masters: Vec<String>,
}

/// A labeled rectangle fed to the checker.
#[derive(Clone, Debug)]
pub struct DrcShape {
    pub layer: usize,
    pub rect: Rect,
    pub net: String,
}

/// Candidate index pairs (i < j) whose rects may sit closer than
/// `threshold`, via a coarse spatial hash. The exact predicate still
/// decides; this only prunes.
fn close_candidates(rects: &[Rect], threshold: Dbu) -> Vec<(usize, usize)> {
    let bucket = (2 * threshold).max(512);
    let key = |v: Dbu| v.div_euclid(bucket);
    let mut map: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, r) in rects.iter().enumerate() {
        for bx in key(r.x1)..=key(r.x2) {
            for by in key(r.y1)..=key(r.y2) {
                map.entry((bx, by)).or_default().push(i);
            }
        }
    }
    let mut out = Vec::new();
    let mut seen = vec![usize::MAX; rects.len()];
    for (i, r) in rects.iter().enumerate() {
        let q = r.expand(threshold);
        for bx in key(q.x1)..=key(q.x2) {
            for by in key(q.y1)..=key(q.y2) {
                if let Some(cands) = map.get(&(bx, by)) {
                    for &j in cands {
                        if j > i && seen[j] != i {
                            seen[j] = i;
                            out.push((i, j));
                        }
                    }
                }
            }
        }
    }
    out
}

fn sq(v: Dbu) -> i128 {
    (v as i128) * (v as i128)
}

/// Assemble checkable geometry for a routed testcell: instance pin
/// shapes and obstructions plus all routed wires, cuts and pads.
pub fn testcell_shapes(spec: &TestcellSpec, db: &RouteDb, profile: &LibraryProfile) -> Vec<DrcShape> {
    let rules = &profile.rules;
    let mut net_of: BTreeMap<(&str, &str), &str> = BTreeMap::new();
    for net in &spec.nets {
        for (inst, pin) in &net.terminals {
            net_of.insert((inst, pin), &net.name);
        }
    }
    let mut shapes = Vec::new();
    for inst in &spec.instances {
        let Some(master) = profile.cell(&inst.master) else { continue };
        for pin in &master.pins {
            let net = net_of
                .get(&(inst.inst_name.as_str(), pin.name.as_str()))
                .map(|n| n.to_string())
                .unwrap_or_else(|| format!("{}/{}", inst.inst_name, pin.name));
            for shape in &pin.shapes {
                shapes.push(DrcShape {
                    layer: 0,
                    rect: inst.to_global(*shape, master, rules),
                    net: net.clone(),
                });
            }
        }
        for (layer, rect) in &master.obstructions {
            shapes.push(DrcShape {
                layer: *layer,
                rect: inst.to_global(*rect, master, rules),
                net: format!("{}#obs", inst.inst_name),
            });
        }
    }
    for net in &db.nets {
        for seg in &net.segments {
            shapes.push(DrcShape { layer: seg.layer, rect: seg.rect(rules), net: net.name.clone() });
        }
        for via in &net.vias {
            shapes.push(DrcShape { layer: via.layer, rect: via.cut_rect(rules), net: net.name.clone() });
            for (layer, pad) in via.pads(rules) {
                shapes.push(DrcShape { layer, rect: pad, net: net.name.clone() });
            }
        }
    }
    shapes
}

/// Run every geometric check over labeled shapes. `rules` carries the
/// (possibly margin-scaled) thresholds. Results are sorted and
/// suppressed rules are dropped.
pub fn check_shapes(shapes: &[DrcShape], rules: &TechRules, ignore: &IgnoreSet) -> Vec<DrcViolation> {
    let mut out = Vec::new();
    for (layer_idx, layer) in rules.layers.iter().enumerate() {
        let idx: Vec<usize> = (0..shapes.len()).filter(|&i| shapes[i].layer == layer_idx).collect();
        if idx.is_empty() {
            continue;
        }
        let rects: Vec<Rect> = idx.iter().map(|&i| shapes[i].rect).collect();
        if layer.is_metal() {
            // width first: per-shape check
            for (k, &i) in idx.iter().enumerate() {
                if rects[k].min_side() < layer.min_width {
                    out.push(DrcViolation {
                        rule: DrcRule::MinWidth,
                        layer: layer.name.clone(),
                        marker: rects[k],
                        nets: vec![shapes[i].net.clone()],
                        masters: Vec::new(),
                    });
                }
            }
            // different-net spacing
            let spacing = layer.min_spacing;
            for (a, b) in close_candidates(&rects, spacing) {
                let (sa, sb) = (&shapes[idx[a]], &shapes[idx[b]]);
                if sa.net != sb.net && rects[a].dist2(&rects[b]) < sq(spacing) {
                    let mut nets = vec![sa.net.clone(), sb.net.clone()];
                    nets.sort();
                    out.push(DrcViolation {
                        rule: DrcRule::DiffNetSpacing,
                        layer: layer.name.clone(),
                        marker: rects[a].union(&rects[b]),
                        nets,
                        masters: Vec::new(),
                    });
                }
            }
            // double patterning
            if let Some(dp) = layer.dp_spacing {
                let labeled: Vec<(Rect, String)> =
                    idx.iter().map(|&i| (shapes[i].rect, shapes[i].net.clone())).collect();
                out.extend(check_dp_odd_cycle(&labeled, dp, &layer.name));
            }
        } else {
            // same-net cut spacing
            if let Some(cut_rule) = layer.same_net_cut_spacing {
                for (a, b) in close_candidates(&rects, cut_rule) {
                    let (sa, sb) = (&shapes[idx[a]], &shapes[idx[b]]);
                    if sa.net == sb.net && rects[a].dist2(&rects[b]) < sq(cut_rule) {
                        out.push(DrcViolation {
                            rule: DrcRule::SameNetCutSpacing,
                            layer: layer.name.clone(),
                            marker: rects[a].union(&rects[b]),
                            nets: vec![sa.net.clone()],
                            masters: Vec::new(),
                        });
                    }
                }
            }
            // enclosure on both neighboring metals
            if let Some(enc) = layer.min_enclosure {
                for (k, &i) in idx.iter().enumerate() {
                    let needed = rects[k].expand(enc);
                    for metal_idx in [layer_idx - 1, layer_idx + 1] {
                        let Some(metal) = rules.layers.get(metal_idx) else { continue };
                        let covered = shapes.iter().any(|s| {
                            s.layer == metal_idx && s.net == shapes[i].net && s.rect.contains_rect(&needed)
                        });
                        if !covered {
                            out.push(DrcViolation {
                                rule: DrcRule::MinEnclosure,
                                layer: metal.name.clone(),
                                marker: rects[k],
                                nets: vec![shapes[i].net.clone()],
                                masters: Vec::new(),
                            });
                        }
                    }
                }
            }
        }
    }
    out.retain(|v| !ignore.contains(v.rule));
    out.sort();
    out.dedup();
    out
}

/// Full check over a routed testcell.
pub fn check_drc(
    spec: &TestcellSpec,
    db: &RouteDb,
    profile: &LibraryProfile,
    rules: &TechRules,
    ignore: &IgnoreSet,
) -> Vec<DrcViolation> {
    let shapes = testcell_shapes(spec, db, profile);
    check_shapes(&shapes, rules, ignore)
}

/// Double-patterning conflict check on one metal layer. Touching
/// same-net shapes merge into one color node; an edge joins nodes closer
/// than `dp_spacing`. Any non-two-colorable component yields exactly one
/// violation whose marker is the bounding box of a witness odd cycle.
pub fn check_dp_odd_cycle(shapes: &[(Rect, String)], dp_spacing: Dbu, layer_name: &str) -> Vec<DrcViolation> {
    let n = shapes.len();
    // merge touching same-net shapes
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    let rects: Vec<Rect> = shapes.iter().map(|(r, _)| *r).collect();
    for (a, b) in close_candidates(&rects, dp_spacing) {
        if shapes[a].1 == shapes[b].1 && rects[a].touches(&rects[b]) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
    }
    // conflict edges between merged nodes
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (a, b) in close_candidates(&rects, dp_spacing) {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb && rects[a].dist2(&rects[b]) < sq(dp_spacing) {
            adj.entry(ra).or_default().insert(rb);
            adj.entry(rb).or_default().insert(ra);
        }
    }

    // two-color each component; report one witness per odd component
    let mut color: BTreeMap<usize, u8> = BTreeMap::new();
    let mut bfs_parent: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = Vec::new();
    let nodes: Vec<usize> = adj.keys().copied().collect();
    for &start in &nodes {
        if color.contains_key(&start) {
            continue;
        }
        let mut queue = std::collections::VecDeque::new();
        color.insert(start, 0);
        bfs_parent.insert(start, start);
        queue.push_back(start);
        let mut witness: Option<(usize, usize)> = None;
        // color the whole component even after a conflict, so its nodes
        // are never mistaken for a second component
        while let Some(u) = queue.pop_front() {
            for &v in &adj[&u] {
                match color.get(&v) {
                    None => {
                        color.insert(v, 1 - color[&u]);
                        bfs_parent.insert(v, u);
                        queue.push_back(v);
                    }
                    Some(&c) if c == color[&u] && witness.is_none() => {
                        witness = Some((u, v));
                    }
                    Some(_) => {}
                }
            }
        }
        if let Some((u, v)) = witness {
            // walk both ancestor chains to the meeting point
            let chain = |mut x: usize| {
                let mut path = vec![x];
                while bfs_parent[&x] != x {
                    x = bfs_parent[&x];
                    path.push(x);
                }
                path
            };
            let cu = chain(u);
            let cv = chain(v);
            let cu_set: BTreeSet<usize> = cu.iter().copied().collect();
            let meet = cv.iter().find(|x| cu_set.contains(x)).copied().unwrap_or(u);
            let mut cycle: BTreeSet<usize> = BTreeSet::new();
            for &x in cu.iter().take_while(|&&x| x != meet) {
                cycle.insert(x);
            }
            for &x in cv.iter().take_while(|&&x| x != meet) {
                cycle.insert(x);
            }
            cycle.insert(meet);
            // bbox over every shape in the cycle's merged nodes
            let members: Vec<Rect> = (0..n)
                .filter(|&i| cycle.contains(&find(&mut parent, i)))
                .map(|i| rects[i])
                .collect();
            let marker = bbox(members.iter()).unwrap_or(rects[u]);
            let mut nets: Vec<String> = (0..n)
                .filter(|&i| cycle.contains(&find(&mut parent, i)))
                .map(|i| shapes[i].1.clone())
                .collect();
            nets.sort();
            nets.dedup();
            out.push(DrcViolation {
                rule: DrcRule::DpOddCycle,
                layer: layer_name.to_string(),
                marker,
                nets,
                masters: Vec::new(),
            });
        }
    }
    out.sort();
    out
}

/// Net-level violations derived from extraction verdicts.
pub fn connectivity_violations(
    db: &RouteDb,
    verdicts: &[NetVerdict],
    rules: &TechRules,
    ignore: &IgnoreSet,
) -> Vec<DrcViolation> {
    let mut out = Vec::new();
    for (ni, verdict) in verdicts.iter().enumerate() {
        let net = &db.nets[ni];
        match verdict.status {
            crate::router::NetStatus::Open => {
                let mut all: Vec<Rect> = net.terminals.iter().flat_map(|t| t.shapes.iter().copied()).collect();
                all.extend(net.segments.iter().map(|s| s.rect(rules)));
                let marker = bbox(all.iter()).unwrap_or(Rect::new(0, 0, 0, 0));
                out.push(DrcViolation {
                    rule: DrcRule::Open,
                    layer: "-".to_string(),
                    marker,
                    nets: vec![verdict.name.clone()],
                    masters: Vec::new(),
                });
            }
            crate::router::NetStatus::Shorted => {
                for (other, marker) in verdict.shorted_with.iter().zip(&verdict.overlaps) {
                    if *other > verdict.name {
                        let mut nets = vec![verdict.name.clone(), other.clone()];
                        nets.sort();
                        out.push(DrcViolation {
                            rule: DrcRule::Short,
                            layer: "-".to_string(),
                            marker: *marker,
                            nets,
                            masters: Vec::new(),
                        });
                    }
                }
            }
            crate::router::NetStatus::Routed => {}
        }
    }
    out.retain(|v| !ignore.contains(v.rule));
    out.sort();
    out
}

/// Attribute violations to cell masters: any instance whose halo-grown
/// bounding box touches the marker contributes its master. Violations
/// touching no halo stay routing-only.
pub fn attribute(
    mut violations: Vec<DrcViolation>,
    spec: &TestcellSpec,
    profile: &LibraryProfile,
    halo: Dbu,
) -> Vec<DrcViolation> {
    let rules = &profile.rules;
    let boxes: Vec<(String, Rect)> = spec
        .instances
        .iter()
        .filter_map(|p| {
            profile
                .cell(&p.master)
                .map(|m| (p.master.clone(), p.cell_bbox(m, rules).expand(halo)))
        })
        .collect();
    for v in &mut violations {
        let mut masters: Vec<String> = boxes
            .iter()
            .filter(|(_, b)| b.touches(&v.marker))
            .map(|(m, _)| m.clone())
            .collect();
        masters.sort();
        masters.dedup();
        v.masters = masters;
    }
    violations.sort();
    violations
}
