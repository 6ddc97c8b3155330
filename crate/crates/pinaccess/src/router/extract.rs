//! Independent connectivity extraction from raw routing geometry.
//!
//! Rebuilds each net electrically from rectangles alone and re-derives
//! open/short verdicts without consulting the router's bookkeeping; the
//! two must agree on every run.

use super::{NetStatus, RouteDb};
use crate::geom::Rect;
use crate::techlib::{TechRules, L_M1, L_M2, L_M3, L_V1, L_V2};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetVerdict {
    pub name: String,
    pub status: NetStatus,
    /// Overlap partners when shorted.
    pub shorted_with: Vec<String>,
    /// Overlap markers, one rect per offending pair.
    pub overlaps: Vec<Rect>,
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// One conductive piece: a set of rects per layer. A via is a single
/// item spanning its cut and both landings, a wire is one rect, a
/// terminal is its pin shapes.
struct Item {
    rects: Vec<(usize, Rect)>,
    /// Terminal ordinal within the net, when this item is a pin.
    terminal: Option<usize>,
}

fn items_of(db: &RouteDb, rules: &TechRules, net_idx: usize) -> Vec<Item> {
    let net = &db.nets[net_idx];
    let mut items = Vec::new();
    for (t_idx, t) in net.terminals.iter().enumerate() {
        items.push(Item {
            rects: t.shapes.iter().map(|&s| (L_M1, s)).collect(),
            terminal: Some(t_idx),
        });
    }
    for seg in &net.segments {
        items.push(Item { rects: vec![(seg.layer, seg.rect(rules))], terminal: None });
    }
    for via in &net.vias {
        let cut = via.cut_rect(rules);
        let mut rects = vec![(via.layer, cut)];
        match via.layer {
            L_V1 => rects.push((L_M1, cut)),
            L_V2 => {}
            _ => {}
        }
        rects.extend(via.pads(rules));
        items.push(Item { rects, terminal: None });
    }
    items
}

fn touch(a: &Item, b: &Item) -> bool {
    a.rects
        .iter()
        .any(|(la, ra)| b.rects.iter().any(|(lb, rb)| la == lb && ra.touches(rb)))
}

/// Re-derive per-net verdicts from geometry: a net is connected when all
/// its terminals land in one conductive component, and shorted when any
/// of its metal or cut rects overlaps another net's with positive area.
pub fn extract_connectivity(db: &RouteDb, rules: &TechRules) -> Vec<NetVerdict> {
    let per_net_items: Vec<Vec<Item>> = (0..db.nets.len()).map(|i| items_of(db, rules, i)).collect();

    // intra-net connectivity
    let mut connected: Vec<bool> = Vec::with_capacity(db.nets.len());
    for (ni, items) in per_net_items.iter().enumerate() {
        let net = &db.nets[ni];
        if net.skipped || net.terminals.len() < 2 {
            connected.push(true);
            continue;
        }
        let mut dsu = Dsu::new(items.len());
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                if touch(&items[i], &items[j]) {
                    dsu.union(i, j);
                }
            }
        }
        let mut roots = items
            .iter()
            .enumerate()
            .filter(|(_, it)| it.terminal.is_some())
            .map(|(i, _)| dsu.find(i));
        let first = roots.next();
        let ok = match first {
            None => true,
            Some(r) => roots.all(|x| x == r),
        };
        connected.push(ok);
    }

    // cross-net overlaps on any conductive layer
    let check_layers = [L_M1, L_V1, L_M2, L_V2, L_M3];
    let mut shorted_with: Vec<Vec<String>> = vec![Vec::new(); db.nets.len()];
    let mut overlaps: Vec<Vec<Rect>> = vec![Vec::new(); db.nets.len()];
    for a in 0..db.nets.len() {
        for b in a + 1..db.nets.len() {
            let mut marker: Option<Rect> = None;
            'outer: for ia in &per_net_items[a] {
                for ib in &per_net_items[b] {
                    for (la, ra) in &ia.rects {
                        for (lb, rb) in &ib.rects {
                            if la == lb && check_layers.contains(la) && ra.overlaps(rb) {
                                marker = ra.intersection(rb);
                                break 'outer;
                            }
                        }
                    }
                }
            }
            if let Some(m) = marker {
                shorted_with[a].push(db.nets[b].name.clone());
                shorted_with[b].push(db.nets[a].name.clone());
                overlaps[a].push(m);
                overlaps[b].push(m);
            }
        }
    }

    db.nets
        .iter()
        .enumerate()
        .map(|(ni, net)| {
            let status = if !shorted_with[ni].is_empty() {
                NetStatus::Shorted
            } else if !connected[ni] {
                NetStatus::Open
            } else {
                NetStatus::Routed
            };
            NetVerdict {
                name: net.name.clone(),
                status,
                shorted_with: std::mem::take(&mut shorted_with[ni]),
                overlaps: std::mem::take(&mut overlaps[ni]),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geom::Point;
    use crate::router::{RoutedNet, Segment, Terminal, ViaRef};

    fn wire_net(name: &str, track: i64, lo: i64, hi: i64) -> RoutedNet {
        RoutedNet {
            name: name.to_string(),
            terminals: vec![
                Terminal { inst: "U1".into(), pin: "A".into(), shapes: vec![Rect::centered_square(lo, track, 24)] },
                Terminal { inst: "U2".into(), pin: "A".into(), shapes: vec![Rect::centered_square(hi, track, 24)] },
            ],
            segments: vec![Segment { layer: L_M2, track, lo, hi }],
            vias: vec![
                ViaRef { layer: L_V1, at: Point::new(lo, track) },
                ViaRef { layer: L_V1, at: Point::new(hi, track) },
            ],
            status: NetStatus::Routed,
            skipped: false,
        }
    }

    #[test]
    fn straight_wire_is_connected() {
        let rules = fixtures::deck();
        let db = RouteDb { testcell: "t".into(), nets: vec![wire_net("n0", 96, 32, 480)] };
        let verdicts = extract_connectivity(&db, &rules);
        assert_eq!(verdicts[0].status, NetStatus::Routed);
    }

    #[test]
    fn shared_interval_is_a_short_between_exactly_those_nets() {
        let rules = fixtures::deck();
        let db = RouteDb {
            testcell: "t".into(),
            nets: vec![
                wire_net("n0", 96, 32, 480),
                wire_net("n1", 96, 288, 736),
                wire_net("far", 352, 32, 480),
            ],
        };
        let verdicts = extract_connectivity(&db, &rules);
        assert_eq!(verdicts[0].status, NetStatus::Shorted);
        assert_eq!(verdicts[0].shorted_with, vec!["n1".to_string()]);
        assert_eq!(verdicts[1].status, NetStatus::Shorted);
        assert_eq!(verdicts[1].shorted_with, vec!["n0".to_string()]);
        assert_eq!(verdicts[2].status, NetStatus::Routed);
        assert_eq!(verdicts[2].shorted_with, Vec::<String>::new());
    }

    #[test]
    fn missing_link_is_open() {
        let rules = fixtures::deck();
        let mut net = wire_net("n0", 96, 32, 480);
        // move the far terminal away from the wire end
        net.terminals[1].shapes = vec![Rect::centered_square(800, 96, 24)];
        net.vias.pop();
        let db = RouteDb { testcell: "t".into(), nets: vec![net] };
        let verdicts = extract_connectivity(&db, &rules);
        assert_eq!(verdicts[0].status, NetStatus::Open);
    }
}
