//! Integer rectilinear geometry primitives.
//!
//! All coordinates are database units (DBU, 1/1000 micron). Distances are
//! compared in squared DBU so nothing here ever touches floating point.

/// Database unit. 1000 DBU = 1 micron.
pub type Dbu = i64;

/// A point in DBU.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub x: Dbu,
    pub y: Dbu,
}

impl Point {
    pub fn new(x: Dbu, y: Dbu) -> Self {
        Point { x, y }
    }
}

/// An axis-aligned rectangle with `x1 <= x2` and `y1 <= y2`.
///
/// Rectangles are closed: a shared edge or corner counts as touching.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rect {
    pub x1: Dbu,
    pub y1: Dbu,
    pub x2: Dbu,
    pub y2: Dbu,
}

impl Rect {
    pub fn new(x1: Dbu, y1: Dbu, x2: Dbu, y2: Dbu) -> Self {
        debug_assert!(x1 <= x2 && y1 <= y2, "malformed rect ({x1},{y1})-({x2},{y2})");
        Rect { x1, y1, x2, y2 }
    }

    /// Rectangle from any two corner points.
    pub fn from_corners(a: Point, b: Point) -> Self {
        Rect {
            x1: a.x.min(b.x),
            y1: a.y.min(b.y),
            x2: a.x.max(b.x),
            y2: a.y.max(b.y),
        }
    }

    /// Square of side `2 * half` centered on `(x, y)`.
    pub fn centered_square(x: Dbu, y: Dbu, half: Dbu) -> Self {
        Rect::new(x - half, y - half, x + half, y + half)
    }

    pub fn width(&self) -> Dbu {
        self.x2 - self.x1
    }

    pub fn height(&self) -> Dbu {
        self.y2 - self.y1
    }

    pub fn area(&self) -> i128 {
        self.width() as i128 * self.height() as i128
    }

    /// Shorter of the two side lengths.
    pub fn min_side(&self) -> Dbu {
        self.width().min(self.height())
    }

    pub fn center(&self) -> Point {
        Point::new((self.x1 + self.x2) / 2, (self.y1 + self.y2) / 2)
    }

    /// Grow by `m` on every side (shrink when negative).
    pub fn expand(&self, m: Dbu) -> Self {
        Rect::new(self.x1 - m, self.y1 - m, self.x2 + m, self.y2 + m)
    }

    pub fn translate(&self, dx: Dbu, dy: Dbu) -> Self {
        Rect::new(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)
    }

    /// True when the closed rectangles share at least a point.
    pub fn touches(&self, o: &Rect) -> bool {
        self.x1 <= o.x2 && o.x1 <= self.x2 && self.y1 <= o.y2 && o.y1 <= self.y2
    }

    /// True when the open interiors intersect (positive-area overlap).
    pub fn overlaps(&self, o: &Rect) -> bool {
        self.x1 < o.x2 && o.x1 < self.x2 && self.y1 < o.y2 && o.y1 < self.y2
    }

    /// Intersection of the closed rectangles, if non-empty.
    pub fn intersection(&self, o: &Rect) -> Option<Rect> {
        let x1 = self.x1.max(o.x1);
        let y1 = self.y1.max(o.y1);
        let x2 = self.x2.min(o.x2);
        let y2 = self.y2.min(o.y2);
        if x1 <= x2 && y1 <= y2 {
            Some(Rect::new(x1, y1, x2, y2))
        } else {
            None
        }
    }

    pub fn contains_rect(&self, o: &Rect) -> bool {
        self.x1 <= o.x1 && self.y1 <= o.y1 && o.x2 <= self.x2 && o.y2 <= self.y2
    }

    pub fn contains_point(&self, p: Point) -> bool {
        self.x1 <= p.x && p.x <= self.x2 && self.y1 <= p.y && p.y <= self.y2
    }

    /// Bounding box of the two rectangles.
    pub fn union(&self, o: &Rect) -> Rect {
        Rect {
            x1: self.x1.min(o.x1),
            y1: self.y1.min(o.y1),
            x2: self.x2.max(o.x2),
            y2: self.y2.max(o.y2),
        }
    }

    /// Squared Euclidean edge-to-edge distance. Zero when touching or
    /// overlapping.
    pub fn dist2(&self, o: &Rect) -> i128 {
        let dx = (o.x1 - self.x2).max(self.x1 - o.x2).max(0) as i128;
        let dy = (o.y1 - self.y2).max(self.y1 - o.y2).max(0) as i128;
        dx * dx + dy * dy
    }

    /// Mirror about the vertical line `x = axis`.
    pub fn mirror_x(&self, axis: Dbu) -> Rect {
        Rect::new(2 * axis - self.x2, self.y1, 2 * axis - self.x1, self.y2)
    }
}

/// Bounding box of an iterator of rectangles.
pub fn bbox<'a>(rects: impl IntoIterator<Item = &'a Rect>) -> Option<Rect> {
    let mut it = rects.into_iter();
    let first = *it.next()?;
    Some(it.fold(first, |acc, r| acc.union(r)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dist2_separated_axis() {
        let a = Rect::new(0, 0, 10, 10);
        let b = Rect::new(20, 0, 30, 10);
        assert_eq!(a.dist2(&b), 100);
        assert_eq!(b.dist2(&a), 100);
    }

    #[test]
    fn dist2_diagonal() {
        let a = Rect::new(0, 0, 10, 10);
        let b = Rect::new(13, 14, 20, 20);
        assert_eq!(a.dist2(&b), 9 + 16);
    }

    #[test]
    fn dist2_touching_is_zero() {
        let a = Rect::new(0, 0, 10, 10);
        let b = Rect::new(10, 10, 20, 20);
        assert_eq!(a.dist2(&b), 0);
        assert!(a.touches(&b));
        assert!(!a.overlaps(&b));
    }

    #[test]
    fn overlap_and_intersection() {
        let a = Rect::new(0, 0, 10, 10);
        let b = Rect::new(5, 5, 20, 20);
        assert!(a.overlaps(&b));
        assert_eq!(a.intersection(&b), Some(Rect::new(5, 5, 10, 10)));
    }

    #[test]
    fn mirror_preserves_dims() {
        let a = Rect::new(2, 3, 7, 11);
        let m = a.mirror_x(10);
        assert_eq!(m, Rect::new(13, 3, 18, 11));
        assert_eq!(m.width(), a.width());
        assert_eq!(m.height(), a.height());
    }
}
