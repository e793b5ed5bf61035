//! Dense small-matrix arithmetic: products, inverses via pivoted LU, and the
//! matrix exponential by scaling-and-squaring with a diagonal Padé(6,6)
//! approximant.
//!
//! Everything here targets the tiny (n ≤ a few dozen) dense operators that
//! drive the splitting iteration; there is no sparse storage and no complex
//! arithmetic.

use crate::error::{Error, Result};

/// Relative pivot threshold under which elimination reports a singular matrix.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

/// Diagonal Padé(6,6) numerator coefficients for exp(x).
const PADE6: [f64; 7] = [
    1.0,
    1.0 / 2.0,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15_840.0,
    1.0 / 665_280.0,
];

/// Scaling target for ‖tM‖₁ before the Padé evaluation.
const PADE6_THETA: f64 = 0.5;

/// Dense real matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries. Rejects non-finite entries and
    /// shape/length disagreements.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Result<Self> {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in entries.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite("diagonal entries"));
            }
            m.data[i * n + i] = x;
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn mat_add(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "add {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn mat_sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "sub {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn mat_scale(&self, factor: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn mat_mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "mul {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += aik * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn mat_apply(&self, v: &Vector) -> Result<Vector> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "apply {}x{} to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let out = self
            .data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(v.entries()).map(|(a, x)| a * x).sum())
            .collect();
        Ok(Vector::raw(out))
    }

    /// out += factor · (self · v). Shapes are the caller's responsibility;
    /// this is the sweep hot path.
    pub(crate) fn apply_scaled_add(&self, v: &Vector, factor: f64, out: &mut Vector) {
        debug_assert_eq!(self.cols, v.len());
        debug_assert_eq!(self.rows, out.len());
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let dot: f64 = row.iter().zip(v.entries()).map(|(a, x)| a * x).sum();
            out.data[i] += factor * dot;
        }
    }

    /// Inverse via LU with partial pivoting. The singularity threshold is
    /// `SINGULARITY_THRESHOLD` relative to the largest absolute entry, so a
    /// structurally singular operator fails loudly instead of returning noise.
    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.require_square("inverse")?;
        let threshold = SINGULARITY_THRESHOLD * self.max_abs();
        let lu = LuFactors::factor(self, threshold)?;
        let mut out = Matrix::zeros(n, n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            for (i, slot) in col.iter_mut().enumerate() {
                *slot = if i == j { 1.0 } else { 0.0 };
            }
            let x = lu.solve(&col);
            for (i, value) in x.iter().enumerate() {
                out.set(i, j, *value);
            }
        }
        Ok(out)
    }

    /// exp(t·M) by scaling-and-squaring with the Padé(6,6) approximant.
    pub fn expm(&self, t: f64) -> Result<Matrix> {
        let n = self.require_square("expm")?;
        if !t.is_finite() {
            return Err(Error::NonFinite("expm time argument"));
        }
        let scaled_norm = self.one_norm() * t.abs();
        let squarings = if scaled_norm > PADE6_THETA {
            (scaled_norm / PADE6_THETA).log2().ceil() as u32
        } else {
            0
        };
        let a = self.mat_scale(t / f64::powi(2.0, squarings as i32));

        // U odd part, V even part of the Padé numerator; denominator is V − U.
        let a2 = a.mat_mul(&a)?;
        let a4 = a2.mat_mul(&a2)?;
        let ident = Matrix::identity(n);
        let u_poly = ident
            .mat_scale(PADE6[1])
            .mat_add(&a2.mat_scale(PADE6[3]))?
            .mat_add(&a4.mat_scale(PADE6[5]))?;
        let u = a.mat_mul(&u_poly)?;
        let v = ident
            .mat_scale(PADE6[0])
            .mat_add(&a2.mat_scale(PADE6[2]))?
            .mat_add(&a4.mat_scale(PADE6[4]))?
            .mat_add(&a4.mat_mul(&a2)?.mat_scale(PADE6[6]))?;

        let numer = v.mat_add(&u)?;
        let denom = v.mat_sub(&u)?;
        // The denominator is a perturbation of I at this scaling; pivots stay
        // near 1, so use an absolute threshold.
        let lu = LuFactors::factor(&denom, SINGULARITY_THRESHOLD)?;
        let mut result = Matrix::zeros(n, n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            for (i, slot) in col.iter_mut().enumerate() {
                *slot = numer.get(i, j);
            }
            let x = lu.solve(&col);
            for (i, value) in x.iter().enumerate() {
                result.set(i, j, *value);
            }
        }
        for _ in 0..squarings {
            result = result.mat_mul(&result)?;
        }
        Ok(result)
    }

    fn require_square(&self, what: &str) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{what} needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(self.rows)
    }
}

/// LU factors with partial pivoting, kept for repeated right-hand sides.
struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    fn factor(m: &Matrix, threshold: f64) -> Result<Self> {
        let n = m.rows;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (pivot_row, pivot_abs) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs <= threshold {
                return Err(Error::SingularMatrix { pivot: pivot_abs, threshold });
            }
            if pivot_row != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot_row * n + j);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                for j in k + 1..n {
                    lu[i * n + j] -= factor * lu[k * n + j];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

/// Dense real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vector entries"));
        }
        Ok(Self { data })
    }

    pub(crate) fn raw(data: Vec<f64>) -> Self {
        Self { data }
    }

    pub fn zeros(len: usize) -> Self {
        Self { data: vec![0.0; len] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.data[i]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "add vectors of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Vector::raw(self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "sub vectors of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Vector::raw(self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector::raw(self.data.iter().map(|x| x * factor).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn component_sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

/// Componentwise absolute differences |u_j − v_j|.
pub fn max_abs_err(u: &Vector, v: &Vector) -> Result<Vec<f64>> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "compare vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(u.entries().iter().zip(v.entries()).map(|(a, b)| (a - b).abs()).collect())
}
