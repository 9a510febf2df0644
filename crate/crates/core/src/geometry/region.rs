//! The constant-time slices `Γ_t` as polygons, for inside/outside tests away from the tube.

use std::f64::consts::TAU;

use super::loops::LoopPair;

/// Closed polygon through `ψ⃗(t, y₁)` at `n` equispaced `y₁`.
#[derive(Clone, Debug)]
pub struct SlicePolygon {
    pub vertices: Vec<[f64; 2]>,
}

impl SlicePolygon {
    pub fn new(loops: &LoopPair, t: f64, n: usize) -> Self {
        let vertices = (0..n)
            .map(|j| {
                let y1 = TAU * j as f64 / n as f64;
                let a = loops.a.eval(t + y1).value;
                let b = loops.b.eval(t - y1).value;
                [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
            })
            .collect();
        Self { vertices }
    }

    /// Crossing-number test.
    pub fn contains(&self, x0: f64, x1: f64) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let [ax, ay] = self.vertices[i];
            let [bx, by] = self.vertices[j];
            if (ay > x1) != (by > x1) {
                let xc = ax + (x1 - ay) * (bx - ax) / (by - ay);
                if x0 < xc {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Sorted abscissae where the horizontal line `x₁ = const` crosses the polygon.
    ///
    /// A point `(x₀, x₁)` is inside iff an odd number of crossings lie to its right,
    /// which matches [`contains`](Self::contains) edge for edge.
    pub fn row_crossings(&self, x1: f64) -> Vec<f64> {
        let n = self.vertices.len();
        let mut xs = Vec::new();
        let mut j = n - 1;
        for i in 0..n {
            let [ax, ay] = self.vertices[i];
            let [bx, by] = self.vertices[j];
            if (ay > x1) != (by > x1) {
                xs.push(ax + (x1 - ay) * (bx - ax) / (by - ay));
            }
            j = i;
        }
        xs.sort_by(|a, b| a.total_cmp(b));
        xs
    }

    /// Merged `x₀`-intervals of the row `x₁ = const` lying within `d` of some vertex.
    ///
    /// Every point of the row closer than `d - ℓ/2` to the polygon (`ℓ` the longest
    /// edge) is covered.
    pub fn near_intervals(&self, x1: f64, d: f64) -> Vec<[f64; 2]> {
        let mut iv: Vec<[f64; 2]> = self
            .vertices
            .iter()
            .filter_map(|&[vx, vy]| {
                let dy = x1 - vy;
                let r2 = d * d - dy * dy;
                (r2 > 0.0).then(|| {
                    let w = r2.sqrt();
                    [vx - w, vx + w]
                })
            })
            .collect();
        iv.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let mut merged: Vec<[f64; 2]> = Vec::with_capacity(4);
        for r in iv {
            match merged.last_mut() {
                Some(last) if r[0] <= last[1] => last[1] = last[1].max(r[1]),
                _ => merged.push(r),
            }
        }
        merged
    }

    /// Longest edge.
    pub fn max_edge(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let [ax, ay] = self.vertices[i];
                let [bx, by] = self.vertices[(i + 1) % n];
                (bx - ax).hypot(by - ay)
            })
            .fold(0.0, f64::max)
    }
}

/// Parity lookup against precomputed row crossings.
#[inline]
pub fn inside_from_crossings(crossings: &[f64], x0: f64) -> bool {
    let right = crossings.len() - crossings.partition_point(|&c| c <= x0);
    right % 2 == 1
}
