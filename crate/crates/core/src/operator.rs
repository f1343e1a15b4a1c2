//! Matrix-free tendency Laplacian.
//!
//! `T = M - Mbar` where `M` is the 0-1 mutual adjacency and
//! `Mbar = (d d^T - diag(d^2)) / (n-1)^2` is the null-model probability of a
//! mutual dyad. `L_T = D_T - T` with `D_T = diag(T 1)`. `Mbar` is dense but
//! rank one plus a diagonal, so a product costs `O(nnz(M) + n)`.

use std::io::Write;

use nalgebra::DMatrix;

use crate::dyad::null_scale;
use crate::eigen::SymmetricOperator;
use crate::error::{Error, Result};
use crate::graph::Digraph;

/// Default node cap for dense materialization.
pub const DEFAULT_DENSE_CAP: usize = 2000;

#[derive(Debug, Clone)]
pub struct TendencyOperator {
    n: usize,
    mutual_offsets: Vec<usize>,
    mutual_targets: Vec<usize>,
    degree: Vec<f64>,
    degree_sum: f64,
    dt_diag: Vec<f64>,
    scale: f64,
}

impl TendencyOperator {
    pub fn new(g: &Digraph) -> Result<Self> {
        let n = g.node_count();
        if n < 2 {
            return Err(Error::TooSmall { need: 2, got: n });
        }
        let mut mutual_offsets = Vec::with_capacity(n + 1);
        let mut mutual_targets = Vec::new();
        mutual_offsets.push(0);
        for i in 0..n {
            mutual_targets.extend(g.mutual_neighbors(i));
            mutual_offsets.push(mutual_targets.len());
        }
        let degree: Vec<f64> = (0..n).map(|i| g.out_degree(i) as f64).collect();
        let degree_sum = g.edge_count() as f64;
        let scale = null_scale(n);
        let dt_diag = (0..n)
            .map(|i| {
                let mutual_deg = (mutual_offsets[i + 1] - mutual_offsets[i]) as f64;
                mutual_deg - degree[i] * (degree_sum - degree[i]) * scale
            })
            .collect();
        Ok(TendencyOperator {
            n,
            mutual_offsets,
            mutual_targets,
            degree,
            degree_sum,
            dt_diag,
            scale,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mutual_neighbors(&self, i: usize) -> &[usize] {
        &self.mutual_targets[self.mutual_offsets[i]..self.mutual_offsets[i + 1]]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    /// `d_T(i) = sum_j T_ij`.
    pub fn dt_diag(&self) -> &[f64] {
        &self.dt_diag
    }

    /// `1 / (n-1)^2`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Writes `L_T x` into `y`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        for len in [x.len(), y.len()] {
            if len != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    got: len,
                });
            }
        }
        let dx: f64 = self.degree.iter().zip(x).map(|(d, v)| d * v).sum();
        for i in 0..self.n {
            let mx: f64 = self.mutual_neighbors(i).iter().map(|&j| x[j]).sum();
            let d = self.degree[i];
            y[i] = self.dt_diag[i] * x[i] - mx + self.scale * (d * dx - d * d * x[i]);
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }

    /// `x^T L_T x`.
    pub fn bilinear_form(&self, x: &[f64]) -> Result<f64> {
        let y = self.apply(x)?;
        Ok(x.iter().zip(&y).map(|(a, b)| a * b).sum())
    }

    /// Row `i` of `|L_T|` summed; the maximum over rows bounds every eigenvalue.
    fn abs_row_sum(&self, i: usize) -> f64 {
        let d = self.degree[i];
        let mut neighbor_deg = 0.0;
        let mut neighbor_abs = 0.0;
        for &j in self.mutual_neighbors(i) {
            neighbor_deg += self.degree[j];
            neighbor_abs += (1.0 - d * self.degree[j] * self.scale).abs();
        }
        let others = (self.degree_sum - d - neighbor_deg).max(0.0);
        self.dt_diag[i].abs() + neighbor_abs + d * others * self.scale
    }
}

impl SymmetricOperator for TendencyOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_into(x, y).expect("operator dimension");
    }

    fn norm_bound(&self) -> f64 {
        (0..self.n).map(|i| self.abs_row_sum(i)).fold(0.0, f64::max)
    }
}

/// Entrywise `L_T` for small graphs.
pub fn dense_tendency_laplacian(g: &Digraph, cap: usize) -> Result<DMatrix<f64>> {
    let n = g.node_count();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    if n < 2 {
        return Err(Error::TooSmall { need: 2, got: n });
    }
    let scale = null_scale(n);
    let d: Vec<f64> = (0..n).map(|i| g.out_degree(i) as f64).collect();
    let mut t = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let m = if g.is_mutual(i, j) { 1.0 } else { 0.0 };
                t[(i, j)] = m - d[i] * d[j] * scale;
            }
        }
    }
    let mut l = -t.clone();
    for i in 0..n {
        l[(i, i)] = t.row(i).sum();
    }
    Ok(l)
}

/// Comma-separated rows, for debugging.
pub fn write_dense_csv<W: Write>(m: &DMatrix<f64>, mut out: W) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> Digraph {
        Digraph::from_edges(3, [(0, 1), (1, 0), (0, 2)]).unwrap()
    }

    #[test]
    fn example_diagonal() {
        let op = TendencyOperator::new(&example()).unwrap();
        let expected = [0.5, 0.5, 0.0];
        for (a, b) in op.dt_diag().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn example_dense_entries() {
        let l = dense_tendency_laplacian(&example(), DEFAULT_DENSE_CAP).unwrap();
        // off-diagonal of L_T is -T
        assert!((l[(0, 1)] + 0.5).abs() < 1e-15);
        assert_eq!(l[(0, 2)], 0.0);
        assert_eq!(l[(1, 2)], 0.0);
        assert_eq!(l, l.transpose());
    }

    #[test]
    fn example_unit_vector() {
        let op = TendencyOperator::new(&example()).unwrap();
        let y = op.apply(&[1.0, 0.0, 0.0]).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-15);
        assert!((y[1] + 0.5).abs() < 1e-15);
        assert!(y[2].abs() < 1e-15);
        assert!((op.bilinear_form(&[1.0, 0.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ones_in_kernel() {
        let op = TendencyOperator::new(&example()).unwrap();
        assert!(op.apply(&[1.0; 3]).unwrap().iter().all(|v| v.abs() < 1e-15));
        assert!(op.bilinear_form(&[1.0; 3]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn empty_and_saturated_are_zero() {
        let e = TendencyOperator::new(&Digraph::from_edges(4, []).unwrap()).unwrap();
        assert_eq!(e.norm_bound(), 0.0);
        let n = 5;
        let edges = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)));
        let k = TendencyOperator::new(&Digraph::from_edges(n, edges).unwrap()).unwrap();
        assert!(k.norm_bound() < 1e-12);
        let y = k.apply(&[1.0, -2.0, 0.5, 3.0, 0.0]).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn errors() {
        let op = TendencyOperator::new(&example()).unwrap();
        assert!(op.apply(&[1.0, 2.0]).is_err());
        assert!(TendencyOperator::new(&Digraph::from_edges(1, []).unwrap()).is_err());
        assert!(matches!(
            dense_tendency_laplacian(&example(), 2),
            Err(Error::TooLarge { .. })
        ));
        assert!(dense_tendency_laplacian(&Digraph::from_edges(1, []).unwrap(), 10).is_err());
    }
}
