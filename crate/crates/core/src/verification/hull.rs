//! Convex hulls of sampled curves.

/// Lower convex envelope of a finite point set, stored by its vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerEnvelope {
    vertices: Vec<(f64, f64)>,
}

impl LowerEnvelope {
    /// Builds the envelope with Andrew's monotone chain. At repeated `x` the
    /// smallest `y` is kept; collinear interior points are dropped.
    pub fn new(points: &[(f64, f64)]) -> Self {
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pts.dedup_by(|b, a| a.0 == b.0);
        Self { vertices: chain(&pts, |c| c <= 0.0) }
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    /// Value at `x`, clamped to the end values outside the sampled range.
    pub fn eval(&self, x: f64) -> f64 {
        let (i, j, theta) = self.bracket(x);
        let (a, b) = (self.vertices[i].1, self.vertices[j].1);
        a + theta * (b - a)
    }

    /// Indices of the vertices around `x` and the interpolation weight on the
    /// right one.
    pub fn bracket(&self, x: f64) -> (usize, usize, f64) {
        let v = &self.vertices;
        let j = v.partition_point(|p| p.0 < x);
        if j == 0 {
            return (0, 0, 0.0);
        }
        if j == v.len() {
            return (j - 1, j - 1, 0.0);
        }
        if v[j].0 == x {
            return (j, j, 0.0);
        }
        let theta = (x - v[j - 1].0) / (v[j].0 - v[j - 1].0);
        (j - 1, j, theta)
    }
}

/// Vertices of the upper concave envelope. At repeated `x` the largest `y` is kept.
pub fn upper_concave_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.dedup_by(|b, a| a.0 == b.0);
    chain(&pts, |c| c >= 0.0)
}

fn chain(sorted: &[(f64, f64)], pop: impl Fn(f64) -> bool) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for &p in sorted {
        while hull.len() >= 2 && pop(cross(hull[hull.len() - 2], hull[hull.len() - 1], p)) {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}
