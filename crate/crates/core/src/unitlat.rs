//! Wedge norms and covolumes of unit log-lattices, classical lower bound
//! checks, exact pure-wedge extraction, and a brute-force search for the
//! smallest wedge one-norm.

use crate::numfield::{FieldElement, LogFlavor, NumberField, UnitClass};
use crate::report::BoundCheck;
use crate::util::combinations;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::json;

/// Independence tolerance: smallest singular value relative to the largest.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LatticeError {
    #[error("vectors are linearly dependent")]
    DependentVectors,
    #[error("need between 1 and {max} vectors of equal length, got {got}")]
    BadShape { got: usize, max: usize },
    #[error("field is not totally real")]
    NotTotallyReal,
    #[error("element {0} is not a unit of infinite order")]
    NotAUnit(usize),
    #[error("wedge is zero")]
    ZeroWedge,
    #[error("omega has {got} coordinates, expected {want}")]
    WedgeLength { got: usize, want: usize },
    #[error("lattice basis must be {0} independent integer vectors")]
    BadBasis(usize),
    #[error(transparent)]
    Field(#[from] crate::numfield::FieldError),
}

pub type Result<T> = std::result::Result<T, LatticeError>;

/// One- and two-norm of `v_1 ∧ ... ∧ v_j` in the orthonormal minor basis.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct WedgeNorms {
    pub one_norm: f64,
    pub two_norm: f64,
}

/// A lattice in `R^{A_L}` given by an independent basis.
#[derive(Debug, Clone)]
pub struct LogLattice {
    basis: Vec<Vec<f64>>,
}

impl LogLattice {
    pub fn new(basis: Vec<Vec<f64>>) -> Result<Self> {
        if !basis.is_empty() {
            check_independent(&basis)?;
        }
        Ok(LogLattice { basis })
    }

    /// Lattice spanned by the weighted logarithmic embeddings of `units`.
    pub fn from_units(field: &NumberField, units: &[FieldElement]) -> Result<Self> {
        let basis = units
            .iter()
            .map(|u| field.log_embed(u, LogFlavor::Weighted))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(basis)
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn covolume(&self) -> Result<f64> {
        if self.basis.is_empty() {
            return Ok(1.0);
        }
        Ok(wedge_norms(&self.basis)?.two_norm)
    }
}

fn to_matrix(vectors: &[Vec<f64>]) -> DMatrix<f64> {
    let j = vectors.len();
    let n = vectors[0].len();
    DMatrix::from_fn(j, n, |r, c| vectors[r][c])
}

fn check_independent(vectors: &[Vec<f64>]) -> Result<()> {
    let n = vectors[0].len();
    if vectors.len() > n || vectors.iter().any(|v| v.len() != n) {
        return Err(LatticeError::BadShape { got: vectors.len(), max: n });
    }
    let m = to_matrix(vectors);
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(max > 0.0) || min <= RANK_TOL * max {
        return Err(LatticeError::DependentVectors);
    }
    Ok(())
}

/// Sum of absolute `j × j` minors and square root of the Gram determinant.
pub fn wedge_norms(vectors: &[Vec<f64>]) -> Result<WedgeNorms> {
    if vectors.is_empty() {
        return Err(LatticeError::BadShape { got: 0, max: 0 });
    }
    check_independent(vectors)?;
    let m = to_matrix(vectors);
    let gram = &m * m.transpose();
    let two_norm = gram.determinant().max(0.0).sqrt();
    let j = vectors.len();
    let n = vectors[0].len();
    let mut one_norm = 0.0;
    for cols in combinations(n, j) {
        let minor = DMatrix::from_fn(j, j, |r, c| m[(r, cols[c])]);
        one_norm += minor.determinant().abs();
    }
    Ok(WedgeNorms { one_norm, two_norm })
}

fn golden_log() -> f64 {
    ((1.0 + 5f64.sqrt()) / 2.0).ln()
}

/// Right-hand side of the totally real covolume bound for rank `j` in
/// degree `n`.
pub fn totally_real_covolume_bound(n: usize, j: usize) -> f64 {
    let (nf, jf) = (n as f64, j as f64);
    (nf / jf).powf(jf / 2.0) * 1.406f64.powf(jf) / ((jf + 2.0) * jf.sqrt())
}

/// Checks the classical lower bounds for units of a totally real field:
/// per-unit log length, covolume of the spanned sublattice, and its wedge
/// one-norm.
pub fn pohst_check(field: &NumberField, units: &[FieldElement]) -> Result<Vec<BoundCheck>> {
    if !field.is_totally_real() {
        return Err(LatticeError::NotTotallyReal);
    }
    for (i, u) in units.iter().enumerate() {
        if field.classify_unit(u)? != UnitClass::Unit {
            return Err(LatticeError::NotAUnit(i));
        }
    }
    let n = field.degree();
    let mut out = Vec::new();
    let logs = units
        .iter()
        .map(|u| field.log_embed(u, LogFlavor::Weighted))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let bound = (n as f64).sqrt() * golden_log();
    for (i, l) in logs.iter().enumerate() {
        let value = l.iter().map(|x| x * x).sum::<f64>().sqrt();
        // The golden ratio attains the bound exactly; allow rounding.
        let pass = value >= bound * (1.0 - 1e-12);
        out.push(BoundCheck::new(
            "unit_log_length",
            json!({"degree": n, "unit_index": i}),
            value,
            bound,
            pass,
        ));
    }
    let j = logs.len();
    if j >= 1 && j < n {
        let w = wedge_norms(&logs)?;
        let cb = totally_real_covolume_bound(n, j);
        out.push(BoundCheck::new(
            "covolume_lower_bound",
            json!({"degree": n, "rank": j}),
            w.two_norm,
            cb,
            w.two_norm > cb,
        ));
        let ob = 0.001 * 1.4f64.powi(j as i32);
        out.push(BoundCheck::new(
            "wedge_one_norm_lower_bound",
            json!({"degree": n, "rank": j}),
            w.one_norm,
            ob,
            w.one_norm > ob,
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Exact pure wedge extraction

/// Result of writing an element of `⋀^{n-1} M` as `d · ε_1 ∧ ... ∧ ε_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureWedge {
    pub d: BigInt,
    /// New lattice basis, in ambient coordinates.
    pub basis: Vec<Vec<BigInt>>,
    /// Change of basis: column `i` holds the coordinates of `ε_i` in the old basis.
    pub change: Vec<Vec<BigInt>>,
}

fn det_exact(m: &[Vec<BigInt>]) -> BigInt {
    // Bareiss fraction-free elimination
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Coordinates of `v_1 ∧ ... ∧ v_k` (columns of `cols`) in the minor basis
/// ordered lexicographically by row subsets.
pub fn wedge_coordinates(vecs: &[Vec<BigInt>], dim: usize) -> Vec<BigInt> {
    let k = vecs.len();
    combinations(dim, k)
        .into_iter()
        .map(|rows| {
            let minor: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|&r| (0..k).map(|c| vecs[c][r].clone()).collect())
                .collect();
            det_exact(&minor)
        })
        .collect()
}

/// Writes `omega ∈ ⋀^{n-1} M` as `d · ε_1 ∧ ... ∧ ε_{n-1}` for a basis
/// `ε_1, ..., ε_n` of `M`.
///
/// `basis` lists `n` independent integer vectors spanning `M`; `omega` gives
/// coordinates with respect to the wedges of `n-1` of them, subsets in
/// lexicographic order. The computation is exact: the coefficient vector of
/// `m ↦ ω ∧ m` is reduced to a multiple of a unit vector by unimodular
/// column operations, whose first `n-1` columns then span its kernel.
pub fn pure_wedge_extract(basis: &[Vec<BigInt>], omega: &[BigInt]) -> Result<PureWedge> {
    let n = basis.len();
    if n < 2 || basis.iter().any(|b| b.len() != basis[0].len()) || basis[0].len() < n {
        return Err(LatticeError::BadBasis(n));
    }
    if omega.len() != n {
        return Err(LatticeError::WedgeLength { got: omega.len(), want: n });
    }
    if omega.iter().all(|w| w.is_zero()) {
        return Err(LatticeError::ZeroWedge);
    }
    if wedge_coordinates(basis, basis[0].len()).iter().all(|x| x.is_zero()) {
        return Err(LatticeError::BadBasis(n));
    }
    // Subset s (lexicographic) omits index n-1-s.
    let mut c: Vec<BigInt> = (0..n)
        .map(|i| {
            let w = &omega[n - 1 - i];
            if (n - 1 - i) % 2 == 0 {
                w.clone()
            } else {
                -w
            }
        })
        .collect();
    // u[col][row]
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    loop {
        let nonzero: Vec<usize> = (0..n).filter(|&i| !c[i].is_zero()).collect();
        if nonzero.len() == 1 {
            break;
        }
        let p = *nonzero.iter().min_by_key(|&&i| c[i].abs()).unwrap();
        for &j in &nonzero {
            if j == p {
                continue;
            }
            let q = c[j].div_floor(&c[p]);
            c[j] = &c[j] - &q * &c[p];
            let col_p = u[p].clone();
            for (x, y) in u[j].iter_mut().zip(&col_p) {
                *x -= &q * y;
            }
        }
    }
    let p = (0..n).find(|&i| !c[i].is_zero()).unwrap();
    c.swap(p, n - 1);
    u.swap(p, n - 1);
    if c[n - 1].is_negative() {
        c[n - 1] = -&c[n - 1];
        for x in u[n - 1].iter_mut() {
            *x = -&*x;
        }
    }
    let g = c[n - 1].clone();
    let det_u = det_exact(&(0..n).map(|r| (0..n).map(|col| u[col][r].clone()).collect()).collect::<Vec<_>>());
    if det_u.is_negative() {
        for x in u[0].iter_mut() {
            *x = -&*x;
        }
    }
    let d = g;
    let dim = basis[0].len();
    let new_basis: Vec<Vec<BigInt>> = u
        .iter()
        .map(|col| {
            (0..dim)
                .map(|k| col.iter().zip(basis).map(|(a, b)| a * &b[k]).sum())
                .collect()
        })
        .collect();
    Ok(PureWedge { d, basis: new_basis, change: u })
}

// ---------------------------------------------------------------------------
// Brute-force μ_{1,k}

/// Smallest wedge one-norm over independent `k`-tuples of lattice vectors
/// whose coordinates in the given basis lie in `[-bound, bound]`.
///
/// This is an upper bound for the true minimum over the whole lattice.
pub fn mu_1k_search(lattice: &LogLattice, k: usize, bound: i64) -> Result<f64> {
    let r = lattice.rank();
    if k == 0 || k > r || bound < 1 {
        return Err(LatticeError::BadShape { got: k, max: r });
    }
    let dim = lattice.basis()[0].len();
    let mut vectors = Vec::new();
    let side = (2 * bound + 1) as usize;
    let total = side.pow(r as u32);
    for idx in 0..total {
        let mut rem = idx;
        let coef: Vec<i64> = (0..r)
            .map(|_| {
                let c = (rem % side) as i64 - bound;
                rem /= side;
                c
            })
            .collect();
        // one representative per ± pair
        match coef.iter().find(|&&c| c != 0) {
            Some(&c) if c > 0 => {}
            _ => continue,
        }
        let v: Vec<f64> = (0..dim)
            .map(|d| coef.iter().zip(lattice.basis()).map(|(&c, b)| c as f64 * b[d]).sum())
            .collect();
        vectors.push(v);
    }
    let mut best = f64::INFINITY;
    for combo in combinations(vectors.len(), k) {
        let sel: Vec<Vec<f64>> = combo.iter().map(|&i| vectors[i].clone()).collect();
        match wedge_norms(&sel) {
            Ok(w) => best = best.min(w.one_norm),
            Err(LatticeError::DependentVectors) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}
