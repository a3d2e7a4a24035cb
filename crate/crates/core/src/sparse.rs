//! Row-compressed nonnegative dose matrix (voxels × beamlets).

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseDoseMatrix {
    n_voxels: usize,
    n_beamlets: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl SparseDoseMatrix {
    /// Builds from `(row, col, value)` triplets in any order. Rejects
    /// out-of-range indices, repeated `(row, col)`, and coefficients that are
    /// negative or non-finite.
    pub fn from_triplets(
        n_voxels: usize,
        n_beamlets: usize,
        mut triplets: Vec<Triplet>,
    ) -> Result<Self> {
        for t in &triplets {
            if t.row >= n_voxels || t.col >= n_beamlets {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({}, {}) outside {n_voxels}x{n_beamlets}",
                    t.row, t.col
                )));
            }
            if !(t.value.is_finite() && t.value >= 0.0) {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({}, {}) has coefficient {}",
                    t.row, t.col, t.value
                )));
            }
        }
        triplets.sort_by_key(|t| (t.row, t.col));
        if let Some(w) = triplets
            .windows(2)
            .find(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col))
        {
            return Err(Error::InvalidMatrix(format!(
                "duplicate entry ({}, {})",
                w[0].row, w[0].col
            )));
        }
        let mut row_ptr = vec![0; n_voxels + 1];
        for t in &triplets {
            row_ptr[t.row + 1] += 1;
        }
        for i in 0..n_voxels {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            n_voxels,
            n_beamlets,
            row_ptr,
            col_idx: triplets.iter().map(|t| t.col).collect(),
            values: triplets.iter().map(|t| t.value).collect(),
        })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::InvalidMatrix("ragged dense matrix".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push(Triplet {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        Self::from_triplets(rows.len(), n_cols, triplets)
    }

    pub fn empty(n_voxels: usize, n_beamlets: usize) -> Self {
        Self {
            n_voxels,
            n_beamlets,
            row_ptr: vec![0; n_voxels + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn n_voxels(&self) -> usize {
        self.n_voxels
    }

    pub fn n_beamlets(&self) -> usize {
        self.n_beamlets
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = Triplet> + '_ {
        (0..self.n_voxels).flat_map(move |row| {
            self.row(row)
                .map(move |(col, value)| Triplet { row, col, value })
        })
    }

    /// Stored coefficient at `(i, j)`, or 0.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn is_stored(&self, i: usize, j: usize) -> bool {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span].binary_search(&j).is_ok()
    }

    pub fn max_coefficient(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_beamlets];
        for (&j, &v) in self.col_idx.iter().zip(&self.values) {
            sums[j] += v;
        }
        sums
    }

    /// `D x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_beamlets {
            return Err(Error::Dimension(format!(
                "vector of {} for {} beamlets",
                x.len(),
                self.n_beamlets
            )));
        }
        Ok((0..self.n_voxels)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect())
    }

    /// `Dᵀ r`, accumulated in row order.
    pub fn mul_transpose_vec(&self, r: &[f64]) -> Result<Vec<f64>> {
        if r.len() != self.n_voxels {
            return Err(Error::Dimension(format!(
                "vector of {} for {} voxels",
                r.len(),
                self.n_voxels
            )));
        }
        let mut out = vec![0.0; self.n_beamlets];
        for (i, &ri) in r.iter().enumerate() {
            for (j, v) in self.row(i) {
                out[j] += v * ri;
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_beamlets]; self.n_voxels];
        for t in self.triplets() {
            out[t.row][t.col] = t.value;
        }
        out
    }

    /// Splits the stored entries with `keep` deciding which side each goes
    /// to. Coefficients are copied, never recomputed.
    pub fn partition(&self, mut keep: impl FnMut(f64) -> bool) -> (Self, Self) {
        let mut left = Self::empty(self.n_voxels, self.n_beamlets);
        let mut right = Self::empty(self.n_voxels, self.n_beamlets);
        for i in 0..self.n_voxels {
            for (j, v) in self.row(i) {
                let side = if keep(v) { &mut left } else { &mut right };
                side.col_idx.push(j);
                side.values.push(v);
            }
            left.row_ptr[i + 1] = left.values.len();
            right.row_ptr[i + 1] = right.values.len();
        }
        (left, right)
    }

    /// Writes the triplet CSV: a `# voxels=N beamlets=M` line, a
    /// `row,col,value` header, then one line per stored entry.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::Io {
            path: "<matrix csv>".into(),
            source: e,
        };
        writeln!(
            out,
            "# voxels={} beamlets={}",
            self.n_voxels, self.n_beamlets
        )
        .map_err(io)?;
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e: csv::Error| Error::Io {
            path: "<matrix csv>".into(),
            source: std::io::Error::other(e),
        };
        if self.nnz() == 0 {
            w.write_record(["row", "col", "value"]).map_err(wrap)?;
        }
        // serialize() emits the row,col,value header before the first record.
        for t in self.triplets() {
            w.serialize(t).map_err(wrap)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let parse = |m: String| Error::Parse {
            path: "<matrix csv>".into(),
            message: m,
        };
        let mut reader = BufReader::new(input);
        let mut first = String::new();
        reader.read_line(&mut first).map_err(|e| Error::Io {
            path: "<matrix csv>".into(),
            source: e,
        })?;
        let (n_voxels, n_beamlets) = parse_dimensions(first.trim()).ok_or_else(|| {
            parse(format!(
                "expected '# voxels=N beamlets=M', found {:?}",
                first.trim()
            ))
        })?;
        let mut triplets = Vec::new();
        for (line, rec) in csv::Reader::from_reader(reader)
            .deserialize::<Triplet>()
            .enumerate()
        {
            triplets.push(rec.map_err(|e| parse(format!("record {}: {e}", line + 1)))?);
        }
        Self::from_triplets(n_voxels, n_beamlets, triplets)
    }
}

fn parse_dimensions(line: &str) -> Option<(usize, usize)> {
    let rest = line.strip_prefix('#')?.trim();
    let mut voxels = None;
    let mut beamlets = None;
    for part in rest.split_whitespace() {
        let (key, value) = part.split_once('=')?;
        match key {
            "voxels" => voxels = value.parse().ok(),
            "beamlets" => beamlets = value.parse().ok(),
            _ => return None,
        }
    }
    Some((voxels?, beamlets?))
}
