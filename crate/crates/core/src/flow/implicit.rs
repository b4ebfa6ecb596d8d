//! Linearly implicit Euler step `(M + Δt H) δ = −Δt ∇E` for the node
//! energy. `H` is banded: the gradient at a node depends on nodes at most
//! two away, so unknowns `(r_i, h_i)` interleaved give half-bandwidth 5.

use super::discrete::Discretization;

const HALF_BAND: usize = 5;
/// Nodes perturbed together when differencing the gradient.
const COLORS: usize = 5;

/// Symmetric band matrix; `rows[d][k]` holds entry `(d, d − k)`.
#[derive(Debug, Clone)]
pub struct Band {
    rows: Vec<[f64; HALF_BAND + 1]>,
}

impl Band {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        let (d, e) = if a >= b { (a, b) } else { (b, a) };
        if d - e > HALF_BAND {
            0.0
        } else {
            self.rows[d][d - e]
        }
    }

    /// In-place Cholesky factor; `None` unless positive definite.
    pub fn cholesky(mut self) -> Option<Band> {
        let m = self.dim();
        for d in 0..m {
            for k in (0..=HALF_BAND.min(d)).rev() {
                let e = d - k;
                let mut s = self.rows[d][k];
                for q in 1..=HALF_BAND {
                    if q + k > HALF_BAND || q > e {
                        break;
                    }
                    // L[d][e−q] · L[e][e−q]
                    s -= self.rows[d][k + q] * self.rows[e][q];
                }
                if k == 0 {
                    if !(s > 0.0) {
                        return None;
                    }
                    self.rows[d][0] = s.sqrt();
                } else {
                    self.rows[d][k] = s / self.rows[e][0];
                }
            }
        }
        Some(self)
    }

    /// Solve with a factor from [`Band::cholesky`].
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = self.dim();
        let mut y = rhs.to_vec();
        for d in 0..m {
            let mut s = y[d];
            for k in 1..=HALF_BAND.min(d) {
                s -= self.rows[d][k] * y[d - k];
            }
            y[d] = s / self.rows[d][0];
        }
        for d in (0..m).rev() {
            let mut s = y[d];
            for k in 1..=HALF_BAND {
                if d + k >= m {
                    break;
                }
                s -= self.rows[d + k][k] * y[d + k];
            }
            y[d] = s / self.rows[d][0];
        }
        y
    }
}

/// `M + Δt H` with `H` from central differences of the exact gradient.
/// Radii pinned to the axis become identity rows.
pub fn system(disc: &Discretization, r: &[f64], h: &[f64], mass: &[f64], dt: f64, eps: f64) -> Band {
    let n = r.len();
    let mut rows = vec![[0.0; HALF_BAND + 1]; 2 * n];
    let pinned = |d: usize| (d == 0 && disc.axis.0) || (d == 2 * n - 2 && disc.axis.1);
    for comp in 0..2 {
        for color in 0..COLORS {
            let mut plus = (r.to_vec(), h.to_vec());
            let mut minus = (r.to_vec(), h.to_vec());
            let mut any = false;
            for k in (color..n).step_by(COLORS) {
                if pinned(2 * k + comp) {
                    continue;
                }
                any = true;
                let (p, m) = if comp == 0 { (&mut plus.0, &mut minus.0) } else { (&mut plus.1, &mut minus.1) };
                p[k] += eps;
                m[k] -= eps;
            }
            if !any {
                continue;
            }
            let (_, gpr, gph) = disc.gradient(&plus.0, &plus.1);
            let (_, gmr, gmh) = disc.gradient(&minus.0, &minus.1);
            for j in 0..n {
                // the perturbed node within two of j, if any
                let Some(k) = (j.saturating_sub(2)..(j + 3).min(n)).find(|k| k % COLORS == color) else {
                    continue;
                };
                if pinned(2 * k + comp) {
                    continue;
                }
                let col = 2 * k + comp;
                for (c2, dg) in [(0, (gpr[j] - gmr[j]) / (2.0 * eps)), (1, (gph[j] - gmh[j]) / (2.0 * eps))] {
                    let row = 2 * j + c2;
                    if pinned(row) {
                        continue;
                    }
                    if row >= col && row - col <= HALF_BAND {
                        // average with the transposed estimate
                        rows[row][row - col] += 0.5 * dt * dg;
                    }
                    if col >= row && col - row <= HALF_BAND {
                        rows[col][col - row] += 0.5 * dt * dg;
                    }
                }
            }
        }
    }
    for (i, &m) in mass.iter().enumerate() {
        rows[2 * i][0] += m;
        rows[2 * i + 1][0] += m;
    }
    for d in 0..2 * n {
        if pinned(d) {
            rows[d] = [0.0; HALF_BAND + 1];
            rows[d][0] = 1.0;
        }
    }
    Band { rows }
}

/// Restriction `νᵢᵀ A_{ij} ν_j` of a node-interleaved system to one normal
/// displacement per node.
pub fn restrict_normal(a: &Band, nu: &[(f64, f64)]) -> Band {
    let n = nu.len();
    let mut rows = vec![[0.0; HALF_BAND + 1]; n];
    for i in 0..n {
        for k in 0..=2.min(i) {
            let j = i - k;
            let (pi, pj) = ([nu[i].0, nu[i].1], [nu[j].0, nu[j].1]);
            let mut s = 0.0;
            for (ci, vi) in pi.iter().enumerate() {
                for (cj, vj) in pj.iter().enumerate() {
                    s += vi * a.get(2 * i + ci, 2 * j + cj) * vj;
                }
            }
            rows[i][k] = s;
        }
    }
    Band { rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_cholesky_solves() {
        let m = 12;
        let mut rows = vec![[0.0; HALF_BAND + 1]; m];
        for (d, row) in rows.iter_mut().enumerate() {
            row[0] = 10.0 + d as f64;
            for k in 1..=HALF_BAND.min(d) {
                row[k] = 1.0 / (1.0 + k as f64 + d as f64);
            }
        }
        let a = Band { rows };
        let x: Vec<f64> = (0..m).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..m).map(|i| (0..m).map(|j| a.get(i, j) * x[j]).sum()).collect();
        let y = a.clone().cholesky().unwrap().solve(&b);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn colored_hessian_matches_single_perturbations() {
        use std::f64::consts::PI;
        let n = 17;
        let (r, h): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|i| {
                let t = PI * i as f64 / (n - 1) as f64;
                let a = 1.0 + 0.2 * (3.0 * t).cos();
                (if i == 0 || i == n - 1 { 0.0 } else { a * t.sin() }, -a * t.cos())
            })
            .unzip();
        let disc = Discretization::new((true, true));
        let zero = vec![0.0; n];
        let eps = 1e-5;
        let band = system(&disc, &r, &h, &zero, 1.0, eps);
        // dense column of the difference Hessian for unknown `d`
        let column = |d: usize| -> Vec<f64> {
            let shift = |e: f64| {
                let (mut rr, mut hh) = (r.clone(), h.clone());
                if d % 2 == 0 {
                    rr[d / 2] += e
                } else {
                    hh[d / 2] += e
                }
                disc.gradient(&rr, &hh)
            };
            let ((_, pr, ph), (_, mr, mh)) = (shift(eps), shift(-eps));
            (0..2 * n).map(|q| if q % 2 == 0 { pr[q / 2] - mr[q / 2] } else { ph[q / 2] - mh[q / 2] } / (2.0 * eps)).collect()
        };
        for col in [1usize, 2, 9, 14, 17, 31, 33] {
            let c = column(col);
            for row in 2..2 * n - 2 {
                let want = 0.5 * (c[row] + column(row)[col]);
                let got = band.get(row, col);
                assert!((got - want).abs() < 1e-5 * (1.0 + want.abs()), "({row},{col}) {got} vs {want}");
            }
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut rows = vec![[0.0; HALF_BAND + 1]; 3];
        rows[0][0] = 1.0;
        rows[1][0] = 1.0;
        rows[1][1] = 2.0;
        rows[2][0] = 1.0;
        assert!(Band { rows }.cholesky().is_none());
    }
}
