//! Random power straps used purely as routing blockage.

use crate::geom::{Dbu, Rect};
use crate::seed;
use crate::techlib::{Direction, TechRules, L_M2, L_M3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PowerNet {
    Vdd,
    Vss,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Strap {
    pub layer: usize,
    pub direction: Direction,
    /// Centerline coordinate (y for horizontal, x for vertical).
    pub offset: Dbu,
    pub width: Dbu,
    pub step: Dbu,
    pub net: PowerNet,
}

impl Strap {
    /// Full-span rectangle over the die.
    pub fn rect(&self, die: Rect) -> Rect {
        let half = self.width / 2;
        match self.direction {
            Direction::Horizontal => Rect::new(die.x1, self.offset - half, die.x2, self.offset + half),
            _ => Rect::new(self.offset - half, die.y1, self.offset + half, die.y2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrapPlan {
    pub straps: Vec<Strap>,
    pub seed: u64,
}

impl StrapPlan {
    pub fn empty(seed: u64) -> Self {
        StrapPlan { straps: Vec::new(), seed }
    }

    pub fn on_layer(&self, layer: usize) -> impl Iterator<Item = &Strap> {
        self.straps.iter().filter(move |s| s.layer == layer)
    }
}

/// One random draw in hundredths, rejecting zero.
fn draw_nonzero(rng: &mut ChaCha8Rng) -> Dbu {
    loop {
        let v = rng.gen_range(0..100i64);
        if v != 0 {
            return v;
        }
    }
}

/// Plan alternating VDD/VSS straps over the die: horizontal bars on the
/// horizontal routing layer, vertical bars on the vertical one. Per
/// layer, width is drawn as hundredths/500 micron and step as
/// hundredths/50 micron, zero draws rejected, so widths stay within
/// 0.198 um and steps within 1.98 um.
pub fn plan_straps(die: Rect, rules: &TechRules, seed: u64, enabled: bool) -> StrapPlan {
    if !enabled {
        return StrapPlan::empty(seed);
    }
    let mut rng = seed::rng_for(seed, "straps");
    let dbu = rules.dbu_per_micron;
    let mut straps = Vec::new();
    for layer in [L_M2, L_M3] {
        let direction = rules.layer(layer).direction;
        let width = draw_nonzero(&mut rng) * dbu / 500;
        let step = draw_nonzero(&mut rng) * dbu / 50;
        let (lo, hi) = match direction {
            Direction::Horizontal => (die.y1, die.y2),
            _ => (die.x1, die.x2),
        };
        let mut k = 1;
        loop {
            let offset = lo + k * step;
            if offset > hi {
                break;
            }
            straps.push(Strap {
                layer,
                direction,
                offset,
                width,
                step,
                net: if k % 2 == 1 { PowerNet::Vdd } else { PowerNet::Vss },
            });
            k += 1;
        }
    }
    StrapPlan { straps, seed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn die() -> Rect {
        Rect::new(0, 0, 2048, 1152)
    }

    #[test]
    fn disabled_plan_is_empty() {
        let plan = plan_straps(die(), &fixtures::deck(), 5, false);
        assert!(plan.straps.is_empty());
    }

    #[test]
    fn same_seed_same_plan() {
        let rules = fixtures::deck();
        let a = plan_straps(die(), &rules, 99, true);
        let b = plan_straps(die(), &rules, 99, true);
        assert_eq!(a, b);
    }

    #[test]
    fn straps_alternate_and_stay_positive() {
        let rules = fixtures::deck();
        let plan = plan_straps(die(), &rules, 3, true);
        for layer in [L_M2, L_M3] {
            let on: Vec<&Strap> = plan.on_layer(layer).collect();
            for (k, s) in on.iter().enumerate() {
                assert!(s.width > 0 && s.step > 0);
                let expect = if k % 2 == 0 { PowerNet::Vdd } else { PowerNet::Vss };
                assert_eq!(s.net, expect);
            }
        }
    }

    #[test]
    fn draw_ranges_over_ten_thousand_samples() {
        let rules = fixtures::deck();
        let mut max_width = 0;
        let mut max_step = 0;
        // 2500 plans x 2 layers x (width, step) = 10,000 draws
        for s in 0..2500u64 {
            let plan = plan_straps(die(), &rules, s, true);
            for strap in &plan.straps {
                assert!(strap.width > 0 && strap.width <= 198, "width {}", strap.width);
                assert!(strap.step > 0 && strap.step <= 1980, "step {}", strap.step);
                max_width = max_width.max(strap.width);
                max_step = max_step.max(strap.step);
            }
        }
        // 99/500 um = 198 DBU is reachable and is the ceiling
        assert_eq!(max_width, 198);
        assert!(max_step <= 1980);
    }
}
