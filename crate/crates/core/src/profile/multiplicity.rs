//! Point multiplicity of a sampled profile from segment intersections.

use super::ProfileCurve;

/// Default clustering radius: `1e-6` times the curve diameter.
pub fn default_tol(curve: &ProfileCurve) -> f64 {
    1e-6 * curve.diameter()
}

#[derive(Debug, Clone, Copy)]
struct Hit {
    p: (f64, f64),
    /// Fractional sample indices on both segments.
    u: f64,
    v: f64,
}

/// Largest number of distinct curve branches through a common point with
/// `r > tol`, within the clustering radius `tol`. At least 1.
pub fn tuple_point_multiplicity(curve: &ProfileCurve, tol: f64) -> usize {
    let hits = self_intersections(curve, tol);
    if hits.is_empty() {
        return 1;
    }
    // cluster hit points
    let mut uf = UnionFind::new(hits.len());
    let mut order: Vec<usize> = (0..hits.len()).collect();
    order.sort_by(|&a, &b| hits[a].p.0.total_cmp(&hits[b].p.0));
    for (k, &a) in order.iter().enumerate() {
        for &b in &order[k + 1..] {
            if hits[b].p.0 - hits[a].p.0 > tol {
                break;
            }
            if (hits[a].p.1 - hits[b].p.1).abs() <= tol {
                uf.union(a, b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<f64>> = std::collections::BTreeMap::new();
    for (i, h) in hits.iter().enumerate() {
        let g = groups.entry(uf.find(i)).or_default();
        g.push(h.u);
        g.push(h.v);
    }
    groups
        .values_mut()
        .map(|params| {
            params.sort_by(f64::total_cmp);
            // parameters within two samples of each other are the same branch
            let mut count = 1;
            for w in params.windows(2) {
                if w[1] - w[0] > 2.0 {
                    count += 1;
                }
            }
            count
        })
        .max()
        .unwrap_or(1)
        .max(1)
}

fn self_intersections(curve: &ProfileCurve, tol: f64) -> Vec<Hit> {
    let n = curve.len();
    let m = n - 1;
    let pt = |i: usize| (curve.r[i], curve.h[i]);
    let mut segs: Vec<(usize, f64, f64)> = (0..m)
        .map(|i| {
            let (a, b) = (pt(i), pt(i + 1));
            (i, a.0.min(b.0) - tol, a.0.max(b.0) + tol)
        })
        .collect();
    segs.sort_by(|x, y| x.1.total_cmp(&y.1));
    let mut hits = Vec::new();
    for k in 0..segs.len() {
        let (i, _, hi) = segs[k];
        for &(j, lo_j, _) in &segs[k + 1..] {
            if lo_j > hi {
                break;
            }
            if i.abs_diff(j) <= 1 {
                continue;
            }
            let (a0, a1, b0, b1) = (pt(i), pt(i + 1), pt(j), pt(j + 1));
            if a0.1.min(a1.1) - tol > b0.1.max(b1.1) || b0.1.min(b1.1) - tol > a0.1.max(a1.1) {
                continue;
            }
            if let Some((p, s, t)) = segment_hit(a0, a1, b0, b1, tol) {
                if p.0 > tol {
                    hits.push(Hit { p, u: i as f64 + s, v: j as f64 + t });
                }
            }
        }
    }
    hits
}

/// Intersection of closed segments `[a0,a1]` and `[b0,b1]`, or a closest
/// approach within `tol`. Returns the point and the two segment parameters.
fn segment_hit(
    a0: (f64, f64),
    a1: (f64, f64),
    b0: (f64, f64),
    b1: (f64, f64),
    tol: f64,
) -> Option<((f64, f64), f64, f64)> {
    let d1 = (a1.0 - a0.0, a1.1 - a0.1);
    let d2 = (b1.0 - b0.0, b1.1 - b0.1);
    let cross = d1.0 * d2.1 - d1.1 * d2.0;
    let w = (b0.0 - a0.0, b0.1 - a0.1);
    if cross.abs() > 1e-300 {
        let s = (w.0 * d2.1 - w.1 * d2.0) / cross;
        let t = (w.0 * d1.1 - w.1 * d1.0) / cross;
        if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t) {
            return Some(((a0.0 + s * d1.0, a0.1 + s * d1.1), s, t));
        }
    }
    // endpoint-to-segment distances
    let mut best: Option<(f64, (f64, f64), f64, f64)> = None;
    let mut consider = |dist: f64, p: (f64, f64), s: f64, t: f64| {
        if dist <= tol && best.is_none_or(|b| dist < b.0) {
            best = Some((dist, p, s, t));
        }
    };
    for (q, t) in [(b0, 0.0), (b1, 1.0)] {
        let (dist, s, foot) = project(a0, d1, q);
        consider(dist, mid(foot, q), s, t);
    }
    for (q, s) in [(a0, 0.0), (a1, 1.0)] {
        let (dist, t, foot) = project(b0, d2, q);
        consider(dist, mid(foot, q), s, t);
    }
    best.map(|b| (b.1, b.2, b.3))
}

fn project(o: (f64, f64), d: (f64, f64), q: (f64, f64)) -> (f64, f64, (f64, f64)) {
    let len2 = d.0 * d.0 + d.1 * d.1;
    let s = if len2 > 0.0 { (((q.0 - o.0) * d.0 + (q.1 - o.1) * d.1) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let foot = (o.0 + s * d.0, o.1 + s * d.1);
    ((q.0 - foot.0).hypot(q.1 - foot.1), s, foot)
}

fn mid(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
