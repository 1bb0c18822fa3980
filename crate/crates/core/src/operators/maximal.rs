//! Uncentered Hardy-Littlewood maximal function of a grid step function.
//!
//! Candidate intervals have endpoints on the grid edges or at the
//! evaluation point `x`. Any such interval containing `x` splits at `x` into
//! two candidates whose averages have the full average as a mediant, so the
//! supremum is the larger one-sided supremum
//! `max(sup_{r > x} (F(r) - F(x))/(r - x), sup_{l < x} (F(x) - F(l))/(x - l))`
//! with `F` the primitive of `|f|`. Each side is a tangent query against the
//! upper convex hull of the primitive's knots, answered in `O(log n)` while
//! sweeping the points.

use rayon::prelude::*;

use crate::operators::grid::GridFunction1D;

/// `(e_i, F(e_i))` at every grid edge.
fn primitive(f: &GridFunction1D) -> (Vec<f64>, Vec<f64>) {
    let h = f.h();
    let edges: Vec<f64> = (0..=f.cells()).map(|i| f.edge(i)).collect();
    let mut prim = Vec::with_capacity(edges.len());
    let mut acc = 0.0;
    prim.push(0.0);
    for v in f.values() {
        acc += h * v.abs();
        prim.push(acc);
    }
    (edges, prim)
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn slope(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1 - a.1) / (b.0 - a.0)
}

/// For each query `(x, F(x))` (sorted by decreasing `x`), the largest slope to
/// a knot strictly right of `x`. Knots sorted by increasing abscissa.
fn right_sup(knots: &[(f64, f64)], queries: &[(f64, f64)]) -> Vec<f64> {
    // upper hull of the knots right of the sweep line, leftmost vertex last
    let mut hull: Vec<(f64, f64)> = Vec::new();
    let mut next = knots.len();
    let mut out = Vec::with_capacity(queries.len());
    for &p in queries {
        while next > 0 && knots[next - 1].0 > p.0 {
            next -= 1;
            let k = knots[next];
            while hull.len() >= 2 && cross(k, hull[hull.len() - 1], hull[hull.len() - 2]) >= 0.0 {
                hull.pop();
            }
            hull.push(k);
        }
        if hull.is_empty() {
            out.push(0.0);
            continue;
        }
        // seen from p the slopes to the hull vertices are unimodal: they rise
        // from the leftmost vertex (end of the stack) up to the tangent one
        let (mut lo, mut hi) = (0usize, hull.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            // vertex hull[mid] and its left neighbour hull[mid + 1]
            if slope(p, hull[mid + 1]) >= slope(p, hull[mid]) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        out.push(slope(p, hull[lo]));
    }
    out
}

/// Primitive of `|f|` at an arbitrary point of the grid.
fn primitive_at(f: &GridFunction1D, prim: &[f64], x: f64) -> f64 {
    if x <= f.edge(0) {
        return 0.0;
    }
    if x >= f.edge(f.cells()) {
        return prim[f.cells()];
    }
    let i = f.cell_of(x).unwrap();
    prim[i] + (x - f.edge(i)) * f.values()[i].abs()
}

/// `Mf` at arbitrary points inside `[-R, R]`.
pub fn maximal_at(f: &GridFunction1D, xs: &[f64]) -> Vec<f64> {
    let (edges, prim) = primitive(f);
    let knots: Vec<(f64, f64)> = edges.iter().copied().zip(prim.iter().copied()).collect();
    let mirrored: Vec<(f64, f64)> = knots.iter().rev().map(|&(e, p)| (-e, -p)).collect();

    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[b].total_cmp(&xs[a]));
    let points: Vec<(f64, f64)> = order.iter().map(|&k| (xs[k], primitive_at(f, &prim, xs[k]))).collect();
    let right = right_sup(&knots, &points);
    let flipped: Vec<(f64, f64)> = points.iter().rev().map(|&(x, p)| (-x, -p)).collect();
    let mut left = right_sup(&mirrored, &flipped);
    left.reverse();

    let mut out = vec![0.0; xs.len()];
    for (j, &k) in order.iter().enumerate() {
        // the degenerate interval at x gives |f(x)|
        let own = f.cell_of(xs[k]).map_or(0.0, |i| f.values()[i].abs());
        out[k] = right[j].max(left[j]).max(own);
    }
    out
}

/// `Mf` at the cell centres.
pub fn maximal_operator(f: &GridFunction1D) -> GridFunction1D {
    let xs: Vec<f64> = (0..f.cells()).map(|i| f.center(i)).collect();
    GridFunction1D::new(f.half_width(), maximal_at(f, &xs)).expect("averages of finite values are finite")
}

/// Reference `O(n^2)` evaluation over the same candidate family.
pub fn maximal_brute(f: &GridFunction1D, x: f64) -> f64 {
    let (edges, prim) = primitive(f);
    let fx = primitive_at(f, &prim, x);
    let own = f.cell_of(x).map_or(0.0, |i| f.values()[i].abs());
    let mut best = own;
    let mut lefts: Vec<(f64, f64)> = edges.iter().copied().zip(prim.iter().copied()).filter(|e| e.0 < x).collect();
    let mut rights: Vec<(f64, f64)> = edges.iter().copied().zip(prim.iter().copied()).filter(|e| e.0 > x).collect();
    lefts.push((x, fx));
    rights.push((x, fx));
    for &(l, fl) in &lefts {
        for &(r, fr) in &rights {
            if r > l {
                best = best.max((fr - fl) / (r - l));
            }
        }
    }
    best
}

/// Largest cellwise violation of `M(f + g) <= Mf + Mg`, relative to the right side.
pub fn sublinearity_defect(f: &GridFunction1D, g: &GridFunction1D) -> f64 {
    let sum = f.add(g).expect("same grid");
    let (mfg, mf, mg) = (maximal_operator(&sum), maximal_operator(f), maximal_operator(g));
    (0..f.cells())
        .into_par_iter()
        .map(|i| {
            let rhs = mf.values()[i] + mg.values()[i];
            let excess = mfg.values()[i] - rhs;
            if excess <= 0.0 { 0.0 } else { excess / rhs.max(f64::MIN_POSITIVE) }
        })
        .reduce(|| 0.0, f64::max)
}
