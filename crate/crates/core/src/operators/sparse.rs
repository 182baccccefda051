use crate::{Error, Result, Scalar};

use super::DenseMatrix;

/// Compressed sparse row matrix with strictly increasing column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRowMatrix {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Scalar>,
}

impl SparseRowMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        offsets: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<Scalar>,
    ) -> Result<Self> {
        if offsets.len() != rows + 1 {
            return Err(Error::DimensionMismatch { expected: rows + 1, got: offsets.len() });
        }
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: indices.len(), got: values.len() });
        }
        if offsets[0] != 0 || offsets[rows] != indices.len() {
            return Err(Error::InvalidStructure("row offsets must start at 0 and end at nnz".into()));
        }
        for i in 0..rows {
            if offsets[i] > offsets[i + 1] {
                return Err(Error::InvalidStructure(format!("row offsets decrease at row {i}")));
            }
            let cols_i = &indices[offsets[i]..offsets[i + 1]];
            if cols_i.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidStructure(format!("column indices of row {i} are not strictly increasing")));
            }
            if cols_i.last().is_some_and(|&c| c >= cols) {
                return Err(Error::InvalidStructure(format!("column index out of range in row {i}")));
            }
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("sparse matrix"));
        }
        Ok(Self { rows, cols, offsets, indices, values })
    }

    /// Assembles from 0-based `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Scalar)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, Scalar)> = triplets.into_iter().collect();
        for &(i, j, _) in &entries {
            if i >= rows || j >= cols {
                return Err(Error::InvalidStructure(format!("entry ({i}, {j}) outside a {rows}x{cols} matrix")));
            }
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut offsets = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<Scalar> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            last = Some((i, j));
            offsets[i + 1] += 1;
            indices.push(j);
            values.push(v);
        }
        for i in 0..rows {
            offsets[i + 1] += offsets[i];
        }
        Self::new(rows, cols, offsets, indices, values)
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

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[Scalar]) {
        let range = self.offsets[i]..self.offsets[i + 1];
        (&self.indices[range.clone()], &self.values[range])
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Iterates stored entries as `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Scalar)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let offsets = counts.clone();
        let mut next = counts;
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![Scalar::new(0.0, 0.0); self.nnz()];
        for (i, j, v) in self.triplets() {
            let slot = next[j];
            indices[slot] = i;
            values[slot] = v;
            next[j] += 1;
        }
        Self { rows: self.cols, cols: self.rows, offsets, indices, values }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut values = vec![Scalar::new(0.0, 0.0); self.rows * self.cols];
        for (i, j, v) in self.triplets() {
            values[i * self.cols + j] = v;
        }
        DenseMatrix::new(self.rows, self.cols, values).expect("finite entries were validated")
    }
}
