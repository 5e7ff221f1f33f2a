//! Compressed sparse row storage for the symmetric FEM matrices.

use serde::Serialize;

/// Symmetric sparse matrix in CSR layout. Both triangles are stored so that
/// matrix-vector products stay branch-free; symmetry is checked, not assumed.
#[derive(Debug, Clone, Serialize)]
pub struct SparseSymMatrix {
    pub dim: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds CSR from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(dim: usize, triplets: &mut Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        let mut row_offsets = vec![0usize; dim + 1];
        let mut col_indices: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut prev: Option<(usize, usize)> = None;
        for &(r, c, v) in triplets.iter() {
            if prev == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                prev = Some((r, c));
            }
            row_offsets[r + 1] = col_indices.len();
        }
        // Rows without entries inherit the previous offset.
        for r in 0..dim {
            if row_offsets[r + 1] < row_offsets[r] {
                row_offsets[r + 1] = row_offsets[r];
            }
        }
        SparseSymMatrix { dim, row_offsets, col_indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = 0.0;
            for idx in self.row_offsets[r]..self.row_offsets[r + 1] {
                acc += self.values[idx] * x[self.col_indices[idx]];
            }
            y[r] = acc;
        }
    }

    pub fn matvec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// Largest relative asymmetry max |A_ij − A_ji| / max|A|.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for idx in self.row_offsets[r]..self.row_offsets[r + 1] {
                let c = self.col_indices[idx];
                let v = self.values[idx];
                let vt = self.get(c, r);
                worst = worst.max((v - vt).abs());
            }
        }
        worst / scale
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        for idx in self.row_offsets[r]..self.row_offsets[r + 1] {
            if self.col_indices[idx] == c {
                return self.values[idx];
            }
        }
        0.0
    }

    /// Half bandwidth: max |i − j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut b = 0usize;
        for r in 0..self.dim {
            for idx in self.row_offsets[r]..self.row_offsets[r + 1] {
                b = b.max(r.abs_diff(self.col_indices[idx]));
            }
        }
        b
    }

    /// Matrix dump in coordinate text format: one `row col value` per line.
    pub fn write_coo<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.dim, self.dim, self.nnz())?;
        for r in 0..self.dim {
            for idx in self.row_offsets[r]..self.row_offsets[r + 1] {
                writeln!(w, "{} {} {:e}", r, self.col_indices[idx], self.values[idx])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let mut t = vec![(0, 1, 2.0), (1, 0, 2.0), (0, 1, 3.0), (0, 0, 1.0), (1, 1, 1.0)];
        let m = SparseSymMatrix::from_triplets(2, &mut t);
        assert_eq!(m.get(0, 1), 5.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.get(0, 0), 1.0);
    }

    #[test]
    fn matvec_small() {
        let mut t = vec![(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)];
        let m = SparseSymMatrix::from_triplets(2, &mut t);
        let y = m.matvec_alloc(&[1.0, 2.0]);
        assert_eq!(y, vec![4.0, 7.0]);
        assert_eq!(m.symmetry_defect(), 0.0);
        assert_eq!(m.bandwidth(), 1);
    }
}
