//! Planar geometry for robot positions and wall obstacles.

use crate::system::Environment;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Position) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    pub fn distance_squared(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Position {
        Position::new(self.x + dx, self.y + dy)
    }
}

impl From<[f64; 2]> for Position {
    fn from([x, y]: [f64; 2]) -> Self {
        Position::new(x, y)
    }
}

impl From<Position> for [f64; 2] {
    fn from(p: Position) -> Self {
        [p.x, p.y]
    }
}

/// A wall obstacle, modelled as a closed line segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wall {
    pub start: Position,
    pub end: Position,
}

impl Wall {
    pub const fn new(start: Position, end: Position) -> Self {
        Self { start, end }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Wall {
        Wall::new(self.start.translated(dx, dy), self.end.translated(dx, dy))
    }

    /// Euclidean distance from `p` to the closest point of the wall.
    pub fn distance_to(&self, p: &Position) -> f64 {
        let (ax, ay) = (self.end.x - self.start.x, self.end.y - self.start.y);
        let len2 = ax * ax + ay * ay;
        if len2 == 0.0 {
            return p.distance(&self.start);
        }
        let t = (((p.x - self.start.x) * ax + (p.y - self.start.y) * ay) / len2).clamp(0.0, 1.0);
        p.distance(&Position::new(self.start.x + t * ax, self.start.y + t * ay))
    }
}

fn orientation(p: &Position, q: &Position, r: &Position) -> f64 {
    (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
}

// `r` is known to be collinear with p-q.
fn within_box(p: &Position, q: &Position, r: &Position) -> bool {
    r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
}

/// Closed-segment intersection test; touching and collinear overlap count.
pub fn segments_intersect(p1: &Position, p2: &Position, q1: &Position, q2: &Position) -> bool {
    let d1 = orientation(q1, q2, p1);
    let d2 = orientation(q1, q2, p2);
    let d3 = orientation(p1, p2, q1);
    let d4 = orientation(p1, p2, q2);

    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && within_box(q1, q2, p1))
        || (d2 == 0.0 && within_box(q1, q2, p2))
        || (d3 == 0.0 && within_box(p1, p2, q1))
        || (d4 == 0.0 && within_box(p1, p2, q2))
}

/// True iff the segment between `a` and `b` crosses no wall of `env`.
///
/// Grazing a wall (touching an endpoint or running along it) blocks the
/// line of sight.
pub fn line_of_sight(a: &Position, b: &Position, env: &Environment) -> bool {
    !env
        .obstacles
        .iter()
        .any(|w| segments_intersect(a, b, &w.start, &w.end))
}
