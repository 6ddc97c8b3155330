//! Shared test oracles, kept independent of the library's optimized
//! implementations: a quadratic all-pairs rule checker, an exhaustive
//! two-coloring search, a reference shortest-path solver, and random
//! input generators.
//!
//! Each integration-test binary uses its own subset of these helpers.
#![allow(dead_code)]

use pinaccess::drc::{DrcRule, DrcShape, DrcViolation};
use pinaccess::geom::{Dbu, Rect};
use pinaccess::router::RoutingGrid;
use pinaccess::techlib::TechRules;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sq(v: Dbu) -> i128 {
    (v as i128) * (v as i128)
}

/// All-pairs reference checker for the pairwise and per-shape rules
/// (spacing, width, cut spacing, enclosure). Double patterning is
/// covered by its own oracle.
pub fn brute_check_shapes(shapes: &[DrcShape], rules: &TechRules) -> Vec<DrcViolation> {
    let mut out = Vec::new();
    for (layer_idx, layer) in rules.layers.iter().enumerate() {
        let on_layer: Vec<usize> = (0..shapes.len()).filter(|&i| shapes[i].layer == layer_idx).collect();
        if layer.is_metal() {
            for &i in &on_layer {
                if shapes[i].rect.min_side() < layer.min_width {
                    out.push(DrcViolation {
                        rule: DrcRule::MinWidth,
                        layer: layer.name.clone(),
                        marker: shapes[i].rect,
                        nets: vec![shapes[i].net.clone()],
                        masters: Vec::new(),
                    });
                }
            }
            for (a, &i) in on_layer.iter().enumerate() {
                for &j in &on_layer[a + 1..] {
                    if shapes[i].net != shapes[j].net
                        && shapes[i].rect.dist2(&shapes[j].rect) < sq(layer.min_spacing)
                    {
                        let mut nets = vec![shapes[i].net.clone(), shapes[j].net.clone()];
                        nets.sort();
                        out.push(DrcViolation {
                            rule: DrcRule::DiffNetSpacing,
                            layer: layer.name.clone(),
                            marker: shapes[i].rect.union(&shapes[j].rect),
                            nets,
                            masters: Vec::new(),
                        });
                    }
                }
            }
        } else {
            if let Some(cut_rule) = layer.same_net_cut_spacing {
                for (a, &i) in on_layer.iter().enumerate() {
                    for &j in &on_layer[a + 1..] {
                        if shapes[i].net == shapes[j].net
                            && shapes[i].rect.dist2(&shapes[j].rect) < sq(cut_rule)
                        {
                            out.push(DrcViolation {
                                rule: DrcRule::SameNetCutSpacing,
                                layer: layer.name.clone(),
                                marker: shapes[i].rect.union(&shapes[j].rect),
                                nets: vec![shapes[i].net.clone()],
                                masters: Vec::new(),
                            });
                        }
                    }
                }
            }
            if let Some(enc) = layer.min_enclosure {
                for &i in &on_layer {
                    let needed = shapes[i].rect.expand(enc);
                    for metal_idx in [layer_idx - 1, layer_idx + 1] {
                        let Some(metal) = rules.layers.get(metal_idx) else { continue };
                        let covered = shapes.iter().any(|s| {
                            s.layer == metal_idx && s.net == shapes[i].net && s.rect.contains_rect(&needed)
                        });
                        if !covered {
                            out.push(DrcViolation {
                                rule: DrcRule::MinEnclosure,
                                layer: metal.name.clone(),
                                marker: shapes[i].rect,
                                nets: vec![shapes[i].net.clone()],
                                masters: Vec::new(),
                            });
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Number of conflict-graph components that cannot be two-colored,
/// found by trying every coloring. Same-net touching shapes share a
/// color node.
pub fn brute_dp_odd_components(shapes: &[(Rect, String)], dp_spacing: Dbu) -> usize {
    let n = shapes.len();
    // merge same-net touching shapes, fixed-point
    let mut group: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if shapes[i].1 == shapes[j].1 && shapes[i].0.touches(&shapes[j].0) && group[i] != group[j] {
                    let g = group[i].min(group[j]);
                    let old_i = group[i];
                    let old_j = group[j];
                    for v in group.iter_mut() {
                        if *v == old_i || *v == old_j {
                            *v = g;
                        }
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut nodes: Vec<usize> = group.clone();
    nodes.sort();
    nodes.dedup();
    let node_of = |i: usize| nodes.iter().position(|&g| g == group[i]).unwrap();
    let k = nodes.len();
    let mut adj = vec![vec![false; k]; k];
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (node_of(i), node_of(j));
            if u != v && shapes[i].0.dist2(&shapes[j].0) < sq(dp_spacing) {
                adj[u][v] = true;
                adj[v][u] = true;
            }
        }
    }
    // connected components over nodes that have edges
    let mut comp = vec![usize::MAX; k];
    let mut n_comp = 0;
    for s in 0..k {
        if comp[s] != usize::MAX || adj[s].iter().all(|&e| !e) {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = n_comp;
        while let Some(u) = stack.pop() {
            for v in 0..k {
                if adj[u][v] && comp[v] == usize::MAX {
                    comp[v] = n_comp;
                    stack.push(v);
                }
            }
        }
        n_comp += 1;
    }
    let mut odd = 0;
    for c in 0..n_comp {
        let members: Vec<usize> = (0..k).filter(|&u| comp[u] == c).collect();
        let m = members.len();
        let mut colorable = false;
        'all: for mask in 0..(1u32 << m) {
            for (a, &u) in members.iter().enumerate() {
                for (b, &v) in members.iter().enumerate() {
                    if adj[u][v] && ((mask >> a) & 1) == ((mask >> b) & 1) {
                        continue 'all;
                    }
                }
            }
            colorable = true;
            break;
        }
        if !colorable {
            odd += 1;
        }
    }
    odd
}

/// Reference weighted shortest path on the routing graph: same nodes,
/// same step and via weights, plain Dijkstra written from the track
/// arrays. Returns (wirelength, via_transitions).
pub fn reference_path_cost(
    grid: &RoutingGrid,
    rules: &TechRules,
    sources: &[(usize, usize)],
    targets: &[(usize, usize)],
) -> Option<(i64, usize)> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let t2 = grid.m2_tracks.len();
    let t3 = grid.m3_tracks.len();
    let via_cost = 3 * rules.layers[4].pitch.max(rules.layers[2].pitch);
    let id = |l: usize, i: usize, j: usize| (l * t2 + i) * t3 + j;
    let mut dist = vec![i64::MAX; 2 * t2 * t3];
    let mut vias = vec![usize::MAX; 2 * t2 * t3];
    let mut heap = BinaryHeap::new();
    for &(i, j) in sources {
        if grid.is_blocked(0, i, j) {
            continue;
        }
        dist[id(0, i, j)] = 0;
        vias[id(0, i, j)] = 0;
        heap.push(Reverse((0i64, 0usize, id(0, i, j))));
    }
    let target_set: std::collections::BTreeSet<usize> = targets.iter().map(|&(i, j)| id(0, i, j)).collect();
    while let Some(Reverse((d, nv, u))) = heap.pop() {
        if d > dist[u] || (d == dist[u] && nv > vias[u]) {
            continue;
        }
        if target_set.contains(&u) {
            return Some((d, nv));
        }
        let j = u % t3;
        let rest = u / t3;
        let i = rest % t2;
        let l = rest / t2;
        let mut push = |l2: usize, i2: usize, j2: usize, w: i64, extra_via: usize| {
            if grid.is_blocked(l2, i2, j2) {
                return;
            }
            let v = id(l2, i2, j2);
            let nd = d + w;
            let nvias = nv + extra_via;
            if nd < dist[v] || (nd == dist[v] && nvias < vias[v]) {
                dist[v] = nd;
                vias[v] = nvias;
                heap.push(Reverse((nd, nvias, v)));
            }
        };
        if l == 0 {
            if j > 0 {
                push(0, i, j - 1, grid.m3_tracks[j] - grid.m3_tracks[j - 1], 0);
            }
            if j + 1 < t3 {
                push(0, i, j + 1, grid.m3_tracks[j + 1] - grid.m3_tracks[j], 0);
            }
            push(1, i, j, via_cost, 1);
        } else {
            if i > 0 {
                push(1, i - 1, j, grid.m2_tracks[i] - grid.m2_tracks[i - 1], 0);
            }
            if i + 1 < t2 {
                push(1, i + 1, j, grid.m2_tracks[i + 1] - grid.m2_tracks[i], 0);
            }
            push(0, i, j, via_cost, 1);
        }
    }
    None
}

/// Random labeled layout across the five-layer stack.
pub fn random_layout(seed: u64, n: usize, span: Dbu) -> Vec<DrcShape> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shapes = Vec::with_capacity(n);
    for _ in 0..n {
        let layer = rng.gen_range(0..5usize);
        let x = rng.gen_range(0..span);
        let y = rng.gen_range(0..span);
        let w = rng.gen_range(8..200);
        let h = if layer % 2 == 1 {
            // via cuts stay square-ish
            rng.gen_range(8..64)
        } else {
            rng.gen_range(8..200)
        };
        let net = format!("n{}", rng.gen_range(0..12));
        shapes.push(DrcShape { layer, rect: Rect::new(x, y, x + w, y + h), net });
    }
    shapes
}

/// Mirror a layout about the vertical axis `x = span`.
pub fn mirror_layout(shapes: &[DrcShape], span: Dbu) -> Vec<DrcShape> {
    shapes
        .iter()
        .map(|s| DrcShape { layer: s.layer, rect: s.rect.mirror_x(span), net: s.net.clone() })
        .collect()
}
