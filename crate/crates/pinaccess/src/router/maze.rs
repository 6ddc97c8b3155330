//! Negotiated-congestion maze routing over the track graph.
//!
//! Nets are routed in descending half-perimeter order by multi-source
//! Dijkstra over (layer, track, track) nodes. Every committed net claims
//! the nodes it occupies; nodes claimed by more than one net are
//! conflicts. Conflicted nets are ripped up and rerouted under growing
//! present-sharing penalties and accumulated history costs until the
//! claims are disjoint or the iteration budget runs out. Whatever overlap
//! negotiation could not clear stays in the geometry for the checker.

use super::grid::RoutingGrid;
use super::{NetStatus, RouteDb, RoutedNet, RouterConfig, Segment, Terminal, ViaRef};
use crate::geom::{bbox, Point};
use crate::techlib::{TechRules, L_M2, L_M3, L_V1, L_V2};
use crate::testgen::TestcellSpec;
use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

const HIST_INC: i64 = 96;
const PRES_START: i64 = 256;
const PRES_CAP: i64 = 1 << 24;

struct NodeMap {
    t2: usize,
    t3: usize,
}

impl NodeMap {
    fn id(&self, layer: usize, ti: usize, tj: usize) -> usize {
        (layer * self.t2 + ti) * self.t3 + tj
    }

    fn decode(&self, id: usize) -> (usize, usize, usize) {
        let tj = id % self.t3;
        let rest = id / self.t3;
        (rest / self.t2, rest % self.t2, tj)
    }

    fn count(&self) -> usize {
        2 * self.t2 * self.t3
    }

    fn half(&self) -> usize {
        self.t2 * self.t3
    }
}

struct RouteTerminal {
    access: Vec<usize>,
}

struct NetTask {
    /// Index into `spec.nets`.
    net: usize,
    terminals: Vec<RouteTerminal>,
    hpwl: i64,
}

#[derive(Default, Clone)]
struct NetRoute {
    /// Node paths of the committed connections, in connection order.
    paths: Vec<Vec<usize>>,
    /// Terminal landing sites, as lower-layer node ids.
    v1_sites: BTreeSet<usize>,
    /// Layer-change sites, as lower-layer node ids.
    v2_sites: BTreeSet<usize>,
    /// Claimed nodes including via pad neighborhoods.
    claims: BTreeSet<usize>,
    open: bool,
}

impl NetRoute {
    fn tree_nodes(&self) -> BTreeSet<usize> {
        self.paths.iter().flatten().copied().collect()
    }
}

struct Router<'a> {
    grid: &'a RoutingGrid,
    map: NodeMap,
    via_cost: i64,
    hist: Vec<i64>,
    claims: Vec<Vec<u32>>,
    pres: i64,
    dist: Vec<i64>,
    prev: Vec<u32>,
    stamp: Vec<u32>,
    generation: u32,
}

impl<'a> Router<'a> {
    fn new(grid: &'a RoutingGrid, rules: &TechRules) -> Self {
        let map = NodeMap { t2: grid.m2_tracks.len(), t3: grid.m3_tracks.len() };
        let n = map.count();
        Router {
            grid,
            map,
            via_cost: 3 * rules.layer(L_M3).pitch.max(rules.layer(L_M2).pitch),
            hist: vec![0; n],
            claims: vec![Vec::new(); n],
            pres: PRES_START,
            dist: vec![0; n],
            prev: vec![u32::MAX; n],
            stamp: vec![0; n],
            generation: 0,
        }
    }

    fn node_penalty(&self, v: usize, net: u32) -> i64 {
        let others = self.claims[v].iter().filter(|&&c| c != net).count() as i64;
        self.hist[v] + self.pres * others
    }

    fn is_blocked(&self, v: usize) -> bool {
        let (layer, ti, tj) = self.map.decode(v);
        self.grid.is_blocked(layer, ti, tj)
    }

    fn neighbors(&self, v: usize, out: &mut Vec<(usize, i64)>) {
        out.clear();
        let (layer, ti, tj) = self.map.decode(v);
        if layer == 0 {
            if tj > 0 {
                out.push((v - 1, self.grid.m3_tracks[tj] - self.grid.m3_tracks[tj - 1]));
            }
            if tj + 1 < self.map.t3 {
                out.push((v + 1, self.grid.m3_tracks[tj + 1] - self.grid.m3_tracks[tj]));
            }
            out.push((self.map.id(1, ti, tj), self.via_cost));
        } else {
            if ti > 0 {
                out.push((v - self.map.t3, self.grid.m2_tracks[ti] - self.grid.m2_tracks[ti - 1]));
            }
            if ti + 1 < self.map.t2 {
                out.push((v + self.map.t3, self.grid.m2_tracks[ti + 1] - self.grid.m2_tracks[ti]));
            }
            out.push((self.map.id(0, ti, tj), self.via_cost));
        }
    }

    /// Multi-source shortest path to any target node. Ties break on node
    /// id, so results are stable.
    fn search(&mut self, sources: &BTreeSet<usize>, targets: &BTreeSet<usize>, net: u32) -> Option<Vec<usize>> {
        if let Some(&common) = sources.intersection(targets).next() {
            return Some(vec![common]);
        }
        self.generation += 1;
        let generation = self.generation;
        let mut heap: BinaryHeap<Reverse<(i64, usize)>> = BinaryHeap::new();
        let mut scratch: Vec<(usize, i64)> = Vec::with_capacity(3);
        for &s in sources {
            if self.is_blocked(s) {
                continue;
            }
            self.dist[s] = self.node_penalty(s, net);
            self.prev[s] = u32::MAX;
            self.stamp[s] = generation;
            heap.push(Reverse((self.dist[s], s)));
        }
        while let Some(Reverse((cost, v))) = heap.pop() {
            if self.stamp[v] == generation && cost > self.dist[v] {
                continue;
            }
            if targets.contains(&v) {
                let mut path = vec![v];
                let mut cur = v;
                while self.prev[cur] != u32::MAX {
                    cur = self.prev[cur] as usize;
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            self.neighbors(v, &mut scratch);
            let moves = std::mem::take(&mut scratch);
            for &(next, edge) in &moves {
                if self.is_blocked(next) {
                    continue;
                }
                let nd = cost + edge + self.node_penalty(next, net);
                if self.stamp[next] != generation || nd < self.dist[next] {
                    self.stamp[next] = generation;
                    self.dist[next] = nd;
                    self.prev[next] = v as u32;
                    heap.push(Reverse((nd, next)));
                }
            }
            scratch = moves;
        }
        None
    }

    fn route_net(&mut self, task: &NetTask) -> NetRoute {
        let mut route = NetRoute::default();
        let net = task.net as u32;
        let half = self.map.half();

        let with_access: Vec<usize> = (0..task.terminals.len())
            .filter(|&t| !task.terminals[t].access.is_empty())
            .collect();
        if with_access.len() < task.terminals.len() {
            route.open = true;
        }
        if with_access.len() < 2 {
            return route;
        }

        let seed = with_access[0];
        let mut tree: BTreeSet<usize> = BTreeSet::new();
        for &t in &with_access[1..] {
            let sources: BTreeSet<usize> = if tree.is_empty() {
                task.terminals[seed].access.iter().copied().collect()
            } else {
                tree.clone()
            };
            let targets: BTreeSet<usize> = task.terminals[t].access.iter().copied().collect();
            match self.search(&sources, &targets, net) {
                Some(path) => {
                    if tree.is_empty() {
                        route.v1_sites.insert(path[0] % half);
                    }
                    route.v1_sites.insert(path.last().unwrap() % half);
                    for w in path.windows(2) {
                        if (w[0] < half) != (w[1] < half) {
                            route.v2_sites.insert(w[0].min(w[1]));
                        }
                    }
                    tree.extend(path.iter().copied());
                    route.paths.push(path);
                }
                None => {
                    route.open = true;
                }
            }
        }

        // occupied nodes are the claims; the deck legalizes one-step
        // adjacency, so node-disjoint is violation-free
        route.claims = route.tree_nodes();
        route
    }

    fn add_claims(&mut self, net: u32, route: &NetRoute) {
        for &v in &route.claims {
            self.claims[v].push(net);
        }
    }

    fn remove_claims(&mut self, net: u32, route: &NetRoute) {
        for &v in &route.claims {
            self.claims[v].retain(|&c| c != net);
        }
    }
}

/// Route every net of a connected testcell on the given grid. The result
/// depends only on (spec, grid, config); failures surface as net
/// statuses, never as errors.
pub fn route(spec: &TestcellSpec, grid: &RoutingGrid, rules: &TechRules, config: &RouterConfig) -> RouteDb {
    let mut router = Router::new(grid, rules);
    let half = router.map.half();

    let mut tasks: Vec<NetTask> = Vec::new();
    for (ni, net) in spec.nets.iter().enumerate() {
        if net.unconnected || net.terminals.len() < 2 {
            continue;
        }
        let mut terminals = Vec::new();
        let mut shapes_acc = Vec::new();
        for (inst, pin) in &net.terminals {
            let access = grid
                .access_for(inst, pin)
                .map(|a| {
                    shapes_acc.extend(a.shapes.iter().copied());
                    a.nodes.iter().map(|&(ti, tj)| router.map.id(0, ti, tj)).collect()
                })
                .unwrap_or_default();
            terminals.push(RouteTerminal { access });
        }
        let hp = bbox(shapes_acc.iter()).map(|r| r.width() + r.height()).unwrap_or(0);
        tasks.push(NetTask { net: ni, terminals, hpwl: hp });
    }
    tasks.sort_by(|a, b| {
        b.hpwl
            .cmp(&a.hpwl)
            .then_with(|| spec.nets[a.net].name.cmp(&spec.nets[b.net].name))
    });

    let mut routes: Vec<NetRoute> = (0..tasks.len()).map(|_| NetRoute::default()).collect();
    let mut needs_route: Vec<usize> = (0..tasks.len()).collect();
    let max_iter = config.max_iterations.max(1);
    for iteration in 0..max_iter {
        // rip up and reroute one net at a time: each net negotiates
        // against the full current claim state, including nets that will
        // reroute later this same pass
        for &k in &needs_route {
            let net = tasks[k].net as u32;
            let old = std::mem::take(&mut routes[k]);
            router.remove_claims(net, &old);
            let fresh = router.route_net(&tasks[k]);
            router.add_claims(net, &fresh);
            routes[k] = fresh;
        }
        let mut conflicted: BTreeSet<usize> = BTreeSet::new();
        for (v, cs) in router.claims.iter().enumerate() {
            if cs.len() > 1 {
                conflicted.insert(v);
            }
        }
        if conflicted.is_empty() || iteration + 1 == max_iter {
            break;
        }
        for &v in &conflicted {
            router.hist[v] += HIST_INC;
        }
        needs_route = (0..tasks.len())
            .filter(|&k| routes[k].claims.iter().any(|v| conflicted.contains(v)))
            .collect();
        router.pres = (router.pres * 2).min(PRES_CAP);
        if needs_route.is_empty() {
            break;
        }
    }

    // exact node usage, without pad neighborhoods, for short detection
    let mut usage: Vec<Vec<u32>> = vec![Vec::new(); router.map.count()];
    for (k, route) in routes.iter().enumerate() {
        for v in route.tree_nodes() {
            usage[v].push(tasks[k].net as u32);
        }
    }

    let mut routed: Vec<Option<RoutedNet>> = vec![None; spec.nets.len()];
    for (k, task) in tasks.iter().enumerate() {
        let route = &routes[k];
        let shorted = route
            .tree_nodes()
            .iter()
            .any(|&v| usage[v].iter().any(|&c| c != task.net as u32));

        let mut segments = Vec::new();
        for path in &route.paths {
            let mut run_start = 0;
            for idx in 1..=path.len() {
                let end_run = idx == path.len() || (path[idx] < half) != (path[run_start] < half);
                if !end_run {
                    continue;
                }
                if idx - run_start >= 2 {
                    let (layer_a, ti_a, tj_a) = router.map.decode(path[run_start]);
                    let (_, ti_b, tj_b) = router.map.decode(path[idx - 1]);
                    if layer_a == 0 {
                        let (xa, xb) = (grid.m3_tracks[tj_a], grid.m3_tracks[tj_b]);
                        segments.push(Segment {
                            layer: L_M2,
                            track: grid.m2_tracks[ti_a],
                            lo: xa.min(xb),
                            hi: xa.max(xb),
                        });
                    } else {
                        let (ya, yb) = (grid.m2_tracks[ti_a], grid.m2_tracks[ti_b]);
                        segments.push(Segment {
                            layer: L_M3,
                            track: grid.m3_tracks[tj_a],
                            lo: ya.min(yb),
                            hi: ya.max(yb),
                        });
                    }
                }
                run_start = idx;
            }
        }
        segments.sort();
        segments.dedup();

        let mut vias: Vec<ViaRef> = Vec::new();
        for (sites, layer) in [(&route.v1_sites, L_V1), (&route.v2_sites, L_V2)] {
            for &site in sites {
                let (_, ti, tj) = router.map.decode(site);
                vias.push(ViaRef { layer, at: Point::new(grid.m3_tracks[tj], grid.m2_tracks[ti]) });
            }
        }
        vias.sort();
        vias.dedup();

        let status = if shorted {
            NetStatus::Shorted
        } else if route.open {
            NetStatus::Open
        } else {
            NetStatus::Routed
        };
        routed[task.net] = Some(RoutedNet {
            name: spec.nets[task.net].name.clone(),
            terminals: terminals_of(spec, grid, task.net),
            segments,
            vias,
            status,
            skipped: false,
        });
    }

    let nets = spec
        .nets
        .iter()
        .enumerate()
        .map(|(ni, net)| match routed[ni].take() {
            Some(r) => r,
            None => RoutedNet {
                name: net.name.clone(),
                terminals: terminals_of(spec, grid, ni),
                segments: Vec::new(),
                vias: Vec::new(),
                status: NetStatus::Routed,
                skipped: true,
            },
        })
        .collect();

    RouteDb { testcell: spec.id.clone(), nets }
}

fn terminals_of(spec: &TestcellSpec, grid: &RoutingGrid, net_idx: usize) -> Vec<Terminal> {
    spec.nets[net_idx]
        .terminals
        .iter()
        .map(|(inst, pin)| Terminal {
            inst: inst.clone(),
            pin: pin.clone(),
            shapes: grid.access_for(inst, pin).map(|a| a.shapes.clone()).unwrap_or_default(),
        })
        .collect()
}
