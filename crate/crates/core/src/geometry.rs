//! Planar point-set geometry for cluster diameters.

pub type Point = [f64; 2];

/// Pairwise-exact below this many points, convex hull above.
pub const EXACT_DIAMETER_LIMIT: usize = 1000;

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull by the monotone chain, counter-clockwise, without collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Diameter of a convex polygon given counter-clockwise (rotating calipers).
pub fn hull_diameter(hull: &[Point]) -> f64 {
    match hull.len() {
        0 | 1 => return 0.0,
        2 => return dist(hull[0], hull[1]),
        _ => {}
    }
    let n = hull.len();
    let mut best: f64 = 0.0;
    let mut j = 1;
    for i in 0..n {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        while cross(a, b, hull[(j + 1) % n]).abs() > cross(a, b, hull[j]).abs() {
            j = (j + 1) % n;
        }
        best = best.max(dist(a, hull[j])).max(dist(b, hull[j]));
    }
    best
}

/// Maximal pairwise Euclidean distance.
pub fn diameter(points: &[Point]) -> f64 {
    if points.len() < EXACT_DIAMETER_LIMIT {
        let mut best: f64 = 0.0;
        for (i, &a) in points.iter().enumerate() {
            for &b in &points[i + 1..] {
                best = best.max(dist(a, b));
            }
        }
        best
    } else {
        hull_diameter(&convex_hull(points))
    }
}
