//! Real symmetric operators in the two storage forms the probes need.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix: `diag[i]` on the diagonal, `off[i]` at (i, i+1) and (i+1, i).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(crate::error::invalid(
                "off",
                format!("expected {} off-diagonal entries, got {}", diag.len().saturating_sub(1), off.len()),
            ));
        }
        if let Some(i) = diag.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: i, col: i });
        }
        if let Some(i) = off.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: i, col: i + 1 });
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i + 1 == j {
            self.off[i]
        } else if j + 1 == i {
            self.off[j]
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> SymMatrix {
        let n = self.dim();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = self.diag[i];
            if i + 1 < n {
                data[i * n + i + 1] = self.off[i];
                data[(i + 1) * n + i] = self.off[i];
            }
        }
        SymMatrix { n, data }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i < self.off.len() {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }
}

/// Dense real symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Exact symmetry is required: every builder in this crate writes both triangles
    /// from the same value.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(crate::error::invalid(
                "data",
                format!("expected {} entries, got {}", n * n, data.len()),
            ));
        }
        for i in 0..n {
            for j in 0..n {
                let x = data[i * n + j];
                if !x.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if j > i {
                    let dev = (x - data[j * n + i]).abs();
                    if dev > 0.0 {
                        return Err(Error::NotSymmetric {
                            row: i,
                            col: j,
                            deviation: dev,
                        });
                    }
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(crate::error::invalid("rows", "matrix is not square"));
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(n, data)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m.data[i * d.len() + i] = x;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both (i, j) and (j, i).
    pub fn set_sym(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
        self.data[j * self.n + i] = value;
    }

    pub fn add_to_diagonal(&mut self, d: &[f64], scale: f64) {
        for (i, &x) in d.iter().enumerate() {
            self.data[i * self.n + i] += scale * x;
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Either storage form; the eigensolver dispatches on it.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Tridiagonal(Tridiagonal),
    Dense(SymMatrix),
}

impl Operator {
    pub fn dim(&self) -> usize {
        match self {
            Operator::Tridiagonal(t) => t.dim(),
            Operator::Dense(m) => m.dim(),
        }
    }

    pub fn norm_inf(&self) -> f64 {
        match self {
            Operator::Tridiagonal(t) => t.norm_inf(),
            Operator::Dense(m) => m.norm_inf(),
        }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            Operator::Tridiagonal(t) => t.apply(x, y),
            Operator::Dense(m) => m.apply(x, y),
        }
    }

    pub fn to_dense(&self) -> SymMatrix {
        match self {
            Operator::Tridiagonal(t) => t.to_dense(),
            Operator::Dense(m) => m.clone(),
        }
    }
}

impl From<Tridiagonal> for Operator {
    fn from(t: Tridiagonal) -> Self {
        Operator::Tridiagonal(t)
    }
}

impl From<SymMatrix> for Operator {
    fn from(m: SymMatrix) -> Self {
        Operator::Dense(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric_input() {
        let err = SymMatrix::from_rows(&[&[1.0, 2.0], &[2.5, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { row: 0, col: 1, .. }));
    }

    #[test]
    fn rejects_nan() {
        let err = SymMatrix::from_rows(&[&[1.0, f64::NAN], &[f64::NAN, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn tridiagonal_dense_round_trip() {
        let t = Tridiagonal::new(vec![1.0, 2.0, 3.0], vec![-1.0, -0.5]).unwrap();
        let d = t.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d.get(i, j), t.get(i, j));
            }
        }
        assert!(d.is_symmetric());
        assert_eq!(t.norm_inf(), 3.5);
    }
}
