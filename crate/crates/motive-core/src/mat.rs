use crate::error::{Error, Result};

/// Dense integer matrix with checked arithmetic.
///
/// Storage is row-major: entry (i, j) lives at `data[i * cols + j]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

fn checked_add(a: i64, b: i64, what: &'static str) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow(what))
}

fn checked_mul(a: i64, b: i64, what: &'static str) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::Overflow(what))
}

impl IntMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMat { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zero(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged row lengths".into()));
        }
        Ok(IntMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Column vector (n x 1) from a slice.
    pub fn column(v: &[i64]) -> Self {
        IntMat { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn diagonal(entries: &[i64]) -> Self {
        let n = entries.len();
        let mut m = IntMat::zero(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * n + i] = e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        assert!(i < self.rows && j < self.cols, "IntMat index ({i},{j}) out of range");
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        assert!(i < self.rows && j < self.cols, "IntMat index ({i},{j}) out of range");
        self.data[i * self.cols + j] = v;
    }

    pub fn row_slice(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col_vec(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&e| e == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = IntMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn add(&self, other: &IntMat) -> Result<IntMat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "add {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&other.data) {
            *a = checked_add(*a, b, "matrix addition")?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &IntMat) -> Result<IntMat> {
        self.add(&other.neg()?)
    }

    pub fn neg(&self) -> Result<IntMat> {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = a.checked_neg().ok_or(Error::Overflow("matrix negation"))?;
        }
        Ok(out)
    }

    pub fn scale(&self, k: i64) -> Result<IntMat> {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = checked_mul(*a, k, "scalar multiplication")?;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &IntMat) -> Result<IntMat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "mul {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc: i128 = 0;
                for k in 0..self.cols {
                    acc += self.get(i, k) as i128 * other.get(k, j) as i128;
                }
                out.data[i * other.cols + j] =
                    i64::try_from(acc).map_err(|_| Error::Overflow("matrix multiplication"))?;
            }
        }
        Ok(out)
    }

    /// Apply to a column vector.
    pub fn apply(&self, x: &[i64]) -> Result<Vec<i64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "apply {}x{} to vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut out = vec![0i64; self.rows];
        for i in 0..self.rows {
            let mut acc: i128 = 0;
            for k in 0..self.cols {
                acc += self.get(i, k) as i128 * x[k] as i128;
            }
            out[i] = i64::try_from(acc).map_err(|_| Error::Overflow("matrix apply"))?;
        }
        Ok(out)
    }

    /// Stack side by side: [self | other].
    pub fn hstack(&self, other: &IntMat) -> Result<IntMat> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "hstack {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMat::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j));
            }
        }
        Ok(out)
    }

    /// Stack on top of each other: [self / other].
    pub fn vstack(&self, other: &IntMat) -> Result<IntMat> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "vstack {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(IntMat { rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Kronecker product. Basis convention is row-major on both sides:
    /// for maps f: Z^a -> Z^c and g: Z^b -> Z^d the product represents
    /// f (x) g on basis e_i (x) e_j ordered by index i * b + j.
    pub fn kronecker(&self, other: &IntMat) -> Result<IntMat> {
        let mut out = IntMat::zero(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let s = self.get(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let v = checked_mul(s, other.get(k, l), "kronecker product")?;
                        out.set(i * other.rows + k, j * other.cols + l, v);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Result<IntMat> {
        if row0 + rows > self.rows || col0 + cols > self.cols {
            return Err(Error::IndexOutOfRange(format!(
                "submatrix ({row0}+{rows}, {col0}+{cols}) of {}x{}",
                self.rows, self.cols
            )));
        }
        let mut out = IntMat::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out.set(i, j, self.get(row0 + i, col0 + j));
            }
        }
        Ok(out)
    }

    /// Determinant by fraction-free Bareiss elimination in i128.
    pub fn det(&self) -> Result<i64> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(1);
        }
        let mut a: Vec<Vec<i128>> =
            (0..n).map(|i| self.row_slice(i).iter().map(|&e| e as i128).collect()).collect();
        let mut sign: i128 = 1;
        let mut prev: i128 = 1;
        for k in 0..n - 1 {
            if a[k][k] == 0 {
                let swap = (k + 1..n).find(|&i| a[i][k] != 0);
                match swap {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return Ok(0),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[k][k]
                        .checked_mul(a[i][j])
                        .and_then(|x| a[i][k].checked_mul(a[k][j]).map(|y| (x, y)))
                        .and_then(|(x, y)| x.checked_sub(y))
                        .ok_or(Error::Overflow("determinant"))?;
                    // Bareiss guarantees exact divisibility by the previous pivot.
                    a[i][j] = num / prev;
                }
                a[i][k] = 0;
            }
            prev = a[k][k];
        }
        let d = sign * a[n - 1][n - 1];
        i64::try_from(d).map_err(|_| Error::Overflow("determinant"))
    }
}
