//! Symmetric eigendecomposition, state selection and spectral gaps.
//!
//! Tridiagonal operators go through an implicit QL sweep with Wilkinson-type
//! shifts; dense operators are handed to `faer`. Either way the result is sorted
//! ascending and every eigenvector is sign-fixed so its largest-magnitude
//! component is positive.

use crate::error::{Error, Result};
use crate::matrix::{Operator, SymMatrix, Tridiagonal};

/// Ascending energies and orthonormal eigenvectors of a real symmetric operator.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    energies: Vec<f64>,
    /// Column-major: vector `k` occupies `vectors[k * n..(k + 1) * n]`.
    vectors: Vec<f64>,
    norm: f64,
}

impl EigenDecomposition {
    /// Assembles a decomposition from raw parts; sorts and sign-fixes them.
    pub fn from_parts(energies: Vec<f64>, vectors: Vec<f64>, norm: f64) -> Self {
        let n = energies.len();
        assert_eq!(vectors.len(), n * n, "vector storage must be n x n");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]).then(a.cmp(&b)));
        let mut e = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n * n);
        for &k in &order {
            e.push(energies[k]);
            let col = &vectors[k * n..(k + 1) * n];
            let sign = sign_of_largest(col);
            v.extend(col.iter().map(|x| sign * x));
        }
        Self {
            energies: e,
            vectors: v,
            norm,
        }
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, k: usize) -> f64 {
        self.energies[k]
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        let n = self.dim();
        &self.vectors[k * n..(k + 1) * n]
    }

    /// Infinity norm of the decomposed operator.
    pub fn operator_norm(&self) -> f64 {
        self.norm
    }

    /// Energies closer than this are treated as degenerate.
    pub fn degeneracy_tolerance(&self) -> f64 {
        let emax = self.energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        1e-12 * (emax + 1.0)
    }

    /// Coefficients `<E_k|x>` for a real vector `x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|k| dot(self.vector(k), x)).collect()
    }

    /// Matrix elements `<E_k| diag(d) |E_l>` for all `k` and fixed `l`.
    pub fn diagonal_matrix_elements(&self, d: &[f64], l: usize) -> Vec<f64> {
        let weighted: Vec<f64> = self.vector(l).iter().zip(d).map(|(v, g)| v * g).collect();
        self.project(&weighted)
    }

    /// Full matrix `U^T diag(d) U`, row-major.
    pub fn transform_diagonal(&self, d: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n];
        let mut weighted = vec![0.0; n];
        for l in 0..n {
            for ((w, v), g) in weighted.iter_mut().zip(self.vector(l)).zip(d) {
                *w = v * g;
            }
            for k in l..n {
                let x = dot(self.vector(k), &weighted);
                out[k * n + l] = x;
                out[l * n + k] = x;
            }
        }
        out
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sign_of_largest(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v {
        // strict comparison keeps the first index on ties
        if x.abs() > best {
            best = x.abs();
            sign = if x < 0.0 { -1.0 } else { 1.0 };
        }
    }
    sign
}

pub fn eigendecompose(op: &Operator) -> Result<EigenDecomposition> {
    match op {
        Operator::Tridiagonal(t) => eigendecompose_tridiagonal(t),
        Operator::Dense(m) => eigendecompose_dense(m),
    }
}

/// Implicit QL iteration on a symmetric tridiagonal matrix, accumulating eigenvectors.
pub fn eigendecompose_tridiagonal(t: &Tridiagonal) -> Result<EigenDecomposition> {
    let n = t.dim();
    let mut d = t.diag.clone();
    let mut e = t.off.clone();
    e.push(0.0);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e, &mut z, n)?;
    Ok(EigenDecomposition::from_parts(d, z, t.norm_inf()))
}

/// Eigenvalues only; `O(n^2)`.
pub fn tridiagonal_eigenvalues(t: &Tridiagonal) -> Result<Vec<f64>> {
    let mut d = t.diag.clone();
    let mut e = t.off.clone();
    e.push(0.0);
    tql2(&mut d, &mut e, &mut [], 0)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

const QL_MAX_SWEEPS: usize = 60;

/// `z` holds `nz` column-major columns of length `nz` (or nothing when `nz == 0`).
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [f64], nz: usize) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    iterations: QL_MAX_SWEEPS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if nz > 0 {
                    let (left, right) = z.split_at_mut((i + 1) * nz);
                    let zi = &mut left[i * nz..];
                    let zi1 = &mut right[..nz];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

pub fn eigendecompose_dense(m: &SymMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let a = faer::Mat::<f64>::from_fn(n, n, |i, j| m.get(i, j));
    let evd = a
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::NoConvergence { iterations: 0 })?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let energies: Vec<f64> = (0..n).map(|k| s[k]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for k in 0..n {
        vectors.extend((0..n).map(|i| u[(i, k)]));
    }
    Ok(EigenDecomposition::from_parts(energies, vectors, m.norm_inf()))
}

/// Which eigenstate a probe is prepared in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSelector {
    Ground,
    /// Index `floor(dim / 2)` in ascending order.
    MidSpectrum,
    Index(usize),
}

impl StateSelector {
    pub fn index(self, dim: usize) -> Result<usize> {
        let k = match self {
            Self::Ground => 0,
            Self::MidSpectrum => dim / 2,
            Self::Index(k) => k,
        };
        if k >= dim {
            return Err(Error::IndexOutOfRange { index: k, dim });
        }
        Ok(k)
    }

    pub fn label(self) -> String {
        match self {
            Self::Ground => "ground".into(),
            Self::MidSpectrum => "mid".into(),
            Self::Index(k) => format!("index:{k}"),
        }
    }
}

impl std::str::FromStr for StateSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ground" | "gs" => Ok(Self::Ground),
            "mid" | "mid-spectrum" | "ms" => Ok(Self::MidSpectrum),
            other => other
                .strip_prefix("index:")
                .and_then(|k| k.parse().ok())
                .map(Self::Index)
                .ok_or_else(|| crate::error::invalid("state", format!("unknown state selector `{other}`"))),
        }
    }
}

pub fn select_state(decomp: &EigenDecomposition, which: StateSelector) -> Result<(usize, &[f64])> {
    let k = which.index(decomp.dim())?;
    Ok((k, decomp.vector(k)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub value: f64,
    /// Set when the gap is below `1e-12 * ||H||`.
    pub degenerate: bool,
}

/// `E_1 - E_0`.
pub fn energy_gap(decomp: &EigenDecomposition) -> Result<Gap> {
    if decomp.dim() < 2 {
        return Err(crate::error::invalid("dim", "gap needs at least two levels"));
    }
    let value = decomp.energy(1) - decomp.energy(0);
    Ok(Gap {
        value,
        degenerate: value < 1e-12 * decomp.operator_norm(),
    })
}

/// Lowest eigenpair of a large sparse operator by restarted Lanczos with full
/// reorthogonalization. Meets the same residual bound as the dense path.
pub fn lowest_eigenpair<F>(dim: usize, norm: f64, apply: F, start: &[f64]) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64], &mut [f64]),
{
    const KRYLOV: usize = 120;
    const RESTARTS: usize = 200;
    let tol = 1e-10 * norm.max(1e-300);
    let mut v0: Vec<f64> = start.to_vec();
    normalize(&mut v0);
    let mut w = vec![0.0; dim];
    for _ in 0..RESTARTS {
        let m = KRYLOV.min(dim);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        basis.push(v0.clone());
        for j in 0..m {
            apply(&basis[j], &mut w);
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            // two passes of Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= c * qi;
                    }
                }
            }
            let b = dot(&w, &w).sqrt();
            if j + 1 == m || b <= 1e-14 * norm {
                beta.push(b);
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let k = alpha.len();
        let t = Tridiagonal::new(alpha.clone(), beta[..k - 1].to_vec())?;
        let small = eigendecompose_tridiagonal(&t)?;
        let theta = small.energy(0);
        let s = small.vector(0);
        let mut x = vec![0.0; dim];
        for (q, &c) in basis.iter().zip(s) {
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi += c * qi;
            }
        }
        normalize(&mut x);
        apply(&x, &mut w);
        let res = w
            .iter()
            .zip(&x)
            .map(|(hx, xi)| (hx - theta * xi).powi(2))
            .sum::<f64>()
            .sqrt();
        if res <= tol {
            let sign = sign_of_largest(&x);
            x.iter_mut().for_each(|xi| *xi *= sign);
            return Ok((theta, x));
        }
        v0 = x;
    }
    Err(Error::NoConvergence {
        iterations: RESTARTS * KRYLOV,
    })
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn hopping_chain(n: usize) -> Tridiagonal {
        Tridiagonal::new(vec![0.0; n], vec![-1.0; n - 1]).unwrap()
    }

    fn residual_ok(op: &Operator, dec: &EigenDecomposition, tol: f64) {
        let n = op.dim();
        let mut hv = vec![0.0; n];
        for k in 0..n {
            op.apply(dec.vector(k), &mut hv);
            let r: f64 = hv
                .iter()
                .zip(dec.vector(k))
                .map(|(a, b)| (a - dec.energy(k) * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(r <= tol * dec.operator_norm(), "residual {r} at k = {k}");
            for l in 0..=k {
                let o = dot(dec.vector(k), dec.vector(l));
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((o - want).abs() <= 1e-10, "overlap {o} at ({k}, {l})");
            }
        }
    }

    #[test]
    fn two_site_hopping() {
        let dec = eigendecompose_tridiagonal(&hopping_chain(2)).unwrap();
        assert!((dec.energy(0) + 1.0).abs() < 1e-15);
        assert!((dec.energy(1) - 1.0).abs() < 1e-15);
        let g = energy_gap(&dec).unwrap();
        assert!((g.value - 2.0).abs() < 1e-15 && !g.degenerate);
    }

    #[test]
    fn three_site_free_chain() {
        let dec = eigendecompose_tridiagonal(&hopping_chain(3)).unwrap();
        let want = [-(2f64.sqrt()), 0.0, 2f64.sqrt()];
        for (e, w) in dec.energies().iter().zip(want) {
            assert!((e - w).abs() < 1e-14);
        }
    }

    #[test]
    fn free_chain_matches_cosine_band() {
        for n in [5usize, 37, 120, 300] {
            let dec = eigendecompose_tridiagonal(&hopping_chain(n)).unwrap();
            for k in 1..=n {
                let want = -2.0 * (k as f64 * PI / (n as f64 + 1.0)).cos();
                assert!((dec.energy(k - 1) - want).abs() <= 1e-9, "n = {n}, k = {k}");
            }
            let evals = tridiagonal_eigenvalues(&hopping_chain(n)).unwrap();
            for (a, b) in evals.iter().zip(dec.energies()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_input_gives_permuted_identity() {
        let d = [3.0, -1.0, 2.0, 0.5];
        let dense = SymMatrix::diagonal(&d);
        for op in [
            Operator::Dense(dense),
            Operator::Tridiagonal(Tridiagonal::new(d.to_vec(), vec![0.0; 3]).unwrap()),
        ] {
            let dec = eigendecompose(&op).unwrap();
            assert_eq!(dec.energies(), &[-1.0, 0.5, 2.0, 3.0]);
            let expected_site = [1usize, 3, 2, 0];
            for (k, &site) in expected_site.iter().enumerate() {
                let v = dec.vector(k);
                for (i, &x) in v.iter().enumerate() {
                    assert_eq!(x, if i == site { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn graded_chain_residuals() {
        let n = 200;
        let diag: Vec<f64> = (1..=n).map(|j| 1e-3 * (0.08 * j as f64).exp()).collect();
        let op = Operator::Tridiagonal(Tridiagonal::new(diag, vec![-1.0; n - 1]).unwrap());
        let dec = eigendecompose(&op).unwrap();
        residual_ok(&op, &dec, 1e-10);
        let dense = eigendecompose(&Operator::Dense(op.to_dense())).unwrap();
        for (a, b) in dec.energies().iter().zip(dense.energies()) {
            assert!((a - b).abs() < 1e-10 * dec.operator_norm());
        }
    }

    #[test]
    fn sign_convention() {
        let dec = eigendecompose_tridiagonal(&hopping_chain(9)).unwrap();
        for k in 0..9 {
            let v = dec.vector(k);
            let big = v.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn select_state_rules() {
        let dec = eigendecompose_tridiagonal(&hopping_chain(3)).unwrap();
        assert_eq!(select_state(&dec, StateSelector::Ground).unwrap().0, 0);
        assert_eq!(select_state(&dec, StateSelector::Index(2)).unwrap().0, 2);
        assert!(matches!(
            select_state(&dec, StateSelector::Index(3)),
            Err(Error::IndexOutOfRange { index: 3, dim: 3 })
        ));
        assert_eq!(StateSelector::MidSpectrum.index(100).unwrap(), 50);
        assert_eq!(StateSelector::Ground.index(2).unwrap(), 0);
        assert_eq!("index:4".parse::<StateSelector>().unwrap(), StateSelector::Index(4));
    }

    #[test]
    fn degenerate_gap_is_flagged() {
        let dec = eigendecompose(&Operator::Dense(SymMatrix::diagonal(&[1.0, 1.0, 2.0]))).unwrap();
        let g = energy_gap(&dec).unwrap();
        assert!(g.degenerate);
        assert_eq!(g.value, 0.0);
    }

    #[test]
    fn lanczos_matches_dense_ground_state() {
        let n = 300;
        let diag: Vec<f64> = (0..n).map(|i| 0.05 * (0.02 * i as f64).exp()).collect();
        let t = Tridiagonal::new(diag, vec![-1.0; n - 1]).unwrap();
        let dec = eigendecompose_tridiagonal(&t).unwrap();
        let start: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64).cos()).collect();
        let (e0, v) = lowest_eigenpair(n, t.norm_inf(), |x, y| t.apply(x, y), &start).unwrap();
        assert!((e0 - dec.energy(0)).abs() < 1e-10);
        let o = dot(&v, dec.vector(0));
        assert!((o - 1.0).abs() < 1e-8, "overlap {o}, gap {}", dec.energy(1) - dec.energy(0));
    }
}
