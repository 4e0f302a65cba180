//! Compressed sparse row storage assembled from coordinate triplets.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Coordinate buffer; duplicates are summed on compression.
#[derive(Clone, Debug, Default)]
pub struct TripletBuffer {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuffer {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(rows: usize, cols: usize, cap: usize) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.entries.push((i, j, v));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn into_csr(self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.rows, self.cols, self.entries)
    }
}

impl CsrMatrix {
    pub fn from_triplets(rows: usize, cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            assert!(i < rows && j < cols, "triplet ({i}, {j}) outside {rows}x{cols}");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_triplets(rows, cols, Vec::new())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self::from_triplets(d.len(), d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "mul_vec: input length");
        assert_eq!(y.len(), self.rows, "mul_vec: output length");
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// `y = A^T x` without forming the transpose.
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "mul_transpose_vec: input length");
        let mut y = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += v * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                t.push((j, i, v));
            }
        }
        Self::from_triplets(self.cols, self.rows, t)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &CsrMatrix, s: f64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.rows {
            t.extend(self.row(i).map(|(j, v)| (i, j, v)));
            t.extend(other.row(i).map(|(j, v)| (i, j, s * v)));
        }
        Ok(Self::from_triplets(self.rows, self.cols, t))
    }

    /// `A^T diag(d) A`.
    pub fn transpose_diag_product(&self, d: &[f64]) -> Result<Self> {
        if d.len() != self.rows {
            return Err(Error::ShapeMismatch(format!(
                "diagonal of length {} against {} rows",
                d.len(),
                self.rows
            )));
        }
        let mut t = Vec::new();
        for (i, &di) in d.iter().enumerate() {
            for (j, a) in self.row(i) {
                for (k, b) in self.row(i) {
                    t.push((j, k, di * a * b));
                }
            }
        }
        Ok(Self::from_triplets(self.cols, self.cols, t))
    }

    /// Rows and columns picked by index lists, renumbered by position; `None`
    /// keeps the full range.
    pub fn select(&self, rows: Option<&[usize]>, cols: Option<&[usize]>) -> Self {
        let col_map: Option<Vec<Option<usize>>> = cols.map(|c| {
            let mut m = vec![None; self.cols];
            for (k, &j) in c.iter().enumerate() {
                m[j] = Some(k);
            }
            m
        });
        let row_list: Vec<usize> = match rows {
            Some(r) => r.to_vec(),
            None => (0..self.rows).collect(),
        };
        let mut t = Vec::new();
        for (new_i, &i) in row_list.iter().enumerate() {
            for (j, v) in self.row(i) {
                let nj = match &col_map {
                    Some(m) => m[j],
                    None => Some(j),
                };
                if let Some(nj) = nj {
                    t.push((new_i, nj, v));
                }
            }
        }
        let ncols = cols.map_or(self.cols, |c| c.len());
        Self::from_triplets(row_list.len(), ncols, t)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Coordinate dump, one `row col value` line per stored entry, 0-based.
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                writeln!(out, "{i} {j} {v:.17e}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_triplets(2, 3, vec![(1, 2, 1.0), (0, 0, 2.0), (1, 2, 0.5), (0, 1, -1.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 2.0]), vec![1.0, 3.0]);
        assert_eq!(m.mul_transpose_vec(&[1.0, 2.0]), vec![2.0, -1.0, 3.0]);
        assert_eq!(m.transpose().to_dense(), m.to_dense().transpose());
    }

    #[test]
    fn add_and_gram() {
        let a = CsrMatrix::identity(2);
        let b = CsrMatrix::from_triplets(1, 2, vec![(0, 0, 1.0), (0, 1, 2.0)]);
        let g = b.transpose_diag_product(&[3.0]).unwrap();
        let s = a.add_scaled(&g, 2.0).unwrap();
        assert_eq!(s.get(0, 0), 7.0);
        assert_eq!(s.get(0, 1), 12.0);
        assert_eq!(s.get(1, 1), 25.0);
        assert!(s.is_symmetric(0.0));
        assert!(a.add_scaled(&b, 1.0).is_err());
    }

    #[test]
    fn select_submatrix() {
        let m = CsrMatrix::from_triplets(3, 3, (0..3).flat_map(|i| (0..3).map(move |j| (i, j, (3 * i + j) as f64))).collect());
        let s = m.select(Some(&[2, 0]), Some(&[1]));
        assert_eq!((s.rows(), s.cols()), (2, 1));
        assert_eq!(s.get(0, 0), 7.0);
        assert_eq!(s.get(1, 0), 1.0);
        assert_eq!(m.select(None, None), m);
    }

    #[test]
    fn coordinate_dump() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(1, 0, 0.25)]);
        let mut out = Vec::new();
        m.write_coordinate(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        let parts: Vec<&str> = s.split_whitespace().collect();
        assert_eq!(parts[..2], ["1", "0"]);
        assert_eq!(parts[2].parse::<f64>().unwrap(), 0.25);
    }
}
