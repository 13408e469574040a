//! Mahler measures of integer Laurent polynomials, Newton polytope faces,
//! Boyd's univariate limits, and the Bloch–Wigner dilogarithm.

use crate::poly::{self, QPoly};
use crate::quad::{self, Tolerance};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MahlerError {
    #[error("root finding failed: {0}")]
    RootFindingFailed(String),
    #[error("integrand vanishes on the torus (log|P| = -inf at a sample)")]
    VanishingOnTorusSuspected,
    #[error("substitution gives the zero polynomial")]
    DegenerateSubstitution,
    #[error("degenerate hull: {0}")]
    HullDegenerate(String),
    #[error("invalid polynomial: {0}")]
    Invalid(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, MahlerError>;

/// `Σ c_e x^e` with integer exponents and nonzero integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentPolynomial {
    vars: usize,
    terms: BTreeMap<Vec<i64>, i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub vars: usize,
    pub terms: Vec<(Vec<i64>, i64)>,
}

impl LaurentPolynomial {
    /// Like terms are combined; zero coefficients dropped.
    pub fn new(vars: usize, terms: impl IntoIterator<Item = (Vec<i64>, i64)>) -> Result<Self> {
        let mut map: BTreeMap<Vec<i64>, i64> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != vars {
                return Err(MahlerError::Invalid(format!("exponent {e:?} has length {} != {vars}", e.len())));
            }
            let slot = map.entry(e).or_insert(0);
            *slot = slot.checked_add(c).ok_or_else(|| MahlerError::Invalid("coefficient overflow".into()))?;
        }
        map.retain(|_, c| *c != 0);
        if map.is_empty() {
            return Err(MahlerError::Invalid("zero polynomial".into()));
        }
        Ok(LaurentPolynomial { vars, terms: map })
    }

    /// Univariate polynomial from coefficients, constant term first.
    pub fn univariate(coeffs: &[i64]) -> Result<Self> {
        LaurentPolynomial::new(1, coeffs.iter().enumerate().map(|(i, &c)| (vec![i as i64], c)))
    }

    pub fn from_json(j: &PolynomialJson) -> Result<Self> {
        LaurentPolynomial::new(j.vars, j.terms.iter().cloned())
    }

    pub fn to_json(&self) -> PolynomialJson {
        PolynomialJson { vars: self.vars, terms: self.terms.iter().map(|(e, c)| (e.clone(), *c)).collect() }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i64>, i64> {
        &self.terms
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.vars != other.vars {
            return Err(MahlerError::Invalid("variable counts differ".into()));
        }
        let mut out = Vec::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let c = c1.checked_mul(*c2).ok_or_else(|| MahlerError::Invalid("coefficient overflow".into()))?;
                out.push((e, c));
            }
        }
        LaurentPolynomial::new(self.vars, out)
    }

    /// `P(e^{2πiθ_1}, …, e^{2πiθ_n})`.
    pub fn eval_torus(&self, theta: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, &c)| {
                let phase: f64 = e.iter().zip(theta).map(|(&a, t)| a as f64 * t).sum();
                let ph = 2.0 * PI * phase.rem_euclid(1.0);
                Complex64::new(c as f64 * ph.cos(), c as f64 * ph.sin())
            })
            .sum()
    }

    /// Dense coefficients (constant first) after dividing by the lowest power.
    pub fn dense_univariate(&self) -> Result<Vec<i64>> {
        if self.vars != 1 {
            return Err(MahlerError::Invalid("not univariate".into()));
        }
        let lo = self.terms.keys().map(|e| e[0]).min().unwrap();
        let hi = self.terms.keys().map(|e| e[0]).max().unwrap();
        let mut c = vec![0; (hi - lo) as usize + 1];
        for (e, v) in &self.terms {
            c[(e[0] - lo) as usize] = *v;
        }
        Ok(c)
    }

    /// The same polynomial written in coordinates of the lattice spanned by
    /// its support, so that the variable count equals the support dimension.
    pub fn reduced(&self) -> (LaurentPolynomial, Vec<Vec<i64>>) {
        let points: Vec<Vec<i64>> = self.terms.keys().cloned().collect();
        let base = points[0].clone();
        let diffs: Vec<Vec<i64>> = points.iter().map(|p| sub(p, &base)).collect();
        let basis = saturated_basis(&diffs, self.vars);
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (lattice_coords(&basis, &sub(e, &base)).expect("point in its own span"), *c));
        (LaurentPolynomial::new(basis.len(), terms).expect("nonzero"), basis)
    }
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn gcd(a: i64, b: i64) -> i64 {
    num_integer::Integer::gcd(&a, &b)
}

/// Basis of `{x ∈ Z^n : M x = 0}` for `M` given by rows.
pub fn integer_kernel(rows: &[Vec<i64>], n: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();
    // column operations act on columns of m and of u alike; u is stored by columns
    let col_op = |m: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, dst: usize, src: usize, q: i128| {
        for row in m.iter_mut() {
            row[dst] -= q * row[src];
        }
        for k in 0..n {
            u[dst][k] -= q * u[src][k];
        }
    };
    let swap = |m: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, a: usize, b: usize| {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
        u.swap(a, b);
    };
    let mut p = 0;
    for i in 0..m.len() {
        if p == n {
            break;
        }
        loop {
            let nz: Vec<usize> = (p..n).filter(|&j| m[i][j] != 0).collect();
            if nz.is_empty() {
                break;
            }
            let j0 = *nz.iter().min_by_key(|&&j| m[i][j].abs()).unwrap();
            swap(&mut m, &mut u, p, j0);
            if nz.len() == 1 {
                p += 1;
                break;
            }
            for j in p + 1..n {
                if m[i][j] != 0 {
                    let q = m[i][j].div_euclid(m[i][p]);
                    col_op(&mut m, &mut u, j, p, q);
                }
            }
        }
    }
    (p..n).map(|j| u[j].iter().map(|&x| x as i64).collect()).collect()
}

/// Basis of `span_Q(vectors) ∩ Z^n`.
pub fn saturated_basis(vectors: &[Vec<i64>], n: usize) -> Vec<Vec<i64>> {
    let nonzero: Vec<Vec<i64>> = vectors.iter().filter(|v| v.iter().any(|&x| x != 0)).cloned().collect();
    if nonzero.is_empty() {
        return Vec::new();
    }
    let kernel = integer_kernel(&nonzero, n);
    if kernel.is_empty() {
        return (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    }
    integer_kernel(&kernel, n)
}

/// Integer coordinates of `v` in `basis`, when `v` lies in its span.
pub fn lattice_coords(basis: &[Vec<i64>], v: &[i64]) -> Option<Vec<i64>> {
    let d = basis.len();
    if d == 0 {
        return v.iter().all(|&x| x == 0).then(Vec::new);
    }
    let n = v.len();
    let b = nalgebra::DMatrix::from_fn(n, d, |r, c| basis[c][r] as f64);
    let rhs = nalgebra::DVector::from_iterator(n, v.iter().map(|&x| x as f64));
    let sol = b.clone().svd(true, true).solve(&rhs, 1e-12).ok()?;
    let c: Vec<i64> = sol.iter().map(|x| x.round() as i64).collect();
    let back: Vec<i64> = (0..n).map(|r| (0..d).map(|j| basis[j][r] * c[j]).sum()).collect();
    (back == v).then_some(c)
}

/// A Mahler measure with an error estimate and the method used.
#[derive(Debug, Clone, Serialize)]
pub struct Measure {
    pub value: f64,
    pub error: f64,
    pub method: String,
}

/// Exact rational squarefree decomposition `P = c Π f_i^i` (Yun).
fn squarefree_parts(p: &QPoly) -> Vec<(QPoly, usize)> {
    let d = p.derivative();
    let a0 = p.gcd(&d);
    let mut b = p.divrem(&a0).0;
    let c = d.divrem(&a0).0;
    let mut e = c.sub(&b.derivative());
    let mut out = Vec::new();
    let mut i = 1;
    while b.degree().unwrap_or(0) > 0 {
        let a = b.gcd(&e);
        let next_b = b.divrem(&a).0;
        let next_c = e.divrem(&a).0;
        if a.degree().unwrap_or(0) > 0 {
            out.push((a, i));
        }
        e = next_c.sub(&next_b.derivative());
        b = next_b;
        i += 1;
    }
    out
}

fn qpoly_roots(p: &QPoly) -> Result<Vec<Complex64>> {
    let c: Vec<Complex64> = p.0.iter().map(|x| Complex64::new(x.to_f64().unwrap_or(f64::NAN), 0.0)).collect();
    poly::roots(&c).map_err(|e| MahlerError::RootFindingFailed(e.to_string()))
}

fn int_qpoly(c: &[i64]) -> QPoly {
    QPoly::from_ints(&c.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
}

/// `m(P) = log|a_d| + Σ log⁺|root|`, roots taken from the squarefree parts.
pub fn mahler_univariate(p: &LaurentPolynomial) -> Result<f64> {
    let c = p.dense_univariate()?;
    let lead = *c.last().unwrap();
    let mut total = (lead.abs() as f64).ln();
    if c.len() == 1 {
        return Ok(total);
    }
    for (f, mult) in squarefree_parts(&int_qpoly(&c)) {
        let r = qpoly_roots(&f)?;
        total += mult as f64 * r.iter().map(|z| z.norm().ln().max(0.0)).sum::<f64>();
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Qmc,
    FiberJensen,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QmcOptions {
    pub points: usize,
    pub shifts: usize,
    pub seed: u64,
}

impl Default for QmcOptions {
    fn default() -> Self {
        QmcOptions { points: 1 << 20, shifts: 8, seed: 20240601 }
    }
}

/// Generating vector and point count of the rank-1 lattice rule: the
/// Fibonacci lattice in two dimensions, a Korobov vector otherwise.
pub fn lattice_rule(dim: usize, points: usize) -> (usize, Vec<u64>) {
    match dim {
        0 => (1, Vec::new()),
        1 => (points, vec![1]),
        2 => {
            let (mut a, mut b) = (1u64, 1u64);
            while a + b <= points as u64 {
                let c = a + b;
                a = b;
                b = c;
            }
            (b as usize, vec![1, a])
        }
        _ => {
            let n = points as u64;
            let mut best = (f64::INFINITY, 1u64);
            let mut rng = ChaCha8Rng::seed_from_u64(n);
            for _ in 0..24 {
                let a = rng.gen_range(2..n - 1);
                let z = korobov(a, dim, n);
                // P_2 figure of merit
                let b2 = |x: f64| x * x - x + 1.0 / 6.0;
                let score: f64 = (0..n.min(1 << 16))
                    .map(|i| z.iter().map(|&zj| 1.0 + 2.0 * PI * PI * b2(((i * zj) % n) as f64 / n as f64)).product::<f64>())
                    .sum::<f64>()
                    - n.min(1 << 16) as f64;
                if score < best.0 {
                    best = (score, a);
                }
            }
            (points, korobov(best.1, dim, n))
        }
    }
}

fn korobov(a: u64, dim: usize, n: u64) -> Vec<u64> {
    let mut z = vec![1u64];
    for _ in 1..dim {
        let last = *z.last().unwrap();
        z.push(((last as u128 * a as u128) % n as u128) as u64);
    }
    z
}

/// QMC: rank-1 lattice with random shifts; error is the standard error over shifts.
pub fn mahler_qmc(p: &LaurentPolynomial, opts: QmcOptions) -> Result<Measure> {
    let dim = p.vars();
    let (n, z) = lattice_rule(dim, opts.points.max(2));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shifts: Vec<Vec<f64>> = (0..opts.shifts.max(2)).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect();
    let estimates: Vec<Result<f64>> = shifts
        .par_iter()
        .map(|shift| {
            let mut sum = 0.0;
            let mut theta = vec![0.0; dim];
            for i in 0..n as u64 {
                for j in 0..dim {
                    theta[j] = (((i as u128 * z[j] as u128) % n as u128) as f64 / n as f64 + shift[j]).fract();
                }
                let v = p.eval_torus(&theta).norm();
                if v == 0.0 {
                    return Err(MahlerError::VanishingOnTorusSuspected);
                }
                sum += v.ln();
            }
            Ok(sum / n as f64)
        })
        .collect();
    let est: Vec<f64> = estimates.into_iter().collect::<Result<_>>()?;
    let k = est.len() as f64;
    let mean = est.iter().sum::<f64>() / k;
    let var = est.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok(Measure { value: mean, error: (var / k).sqrt(), method: format!("qmc rank-1 lattice, {n} points x {} shifts", est.len()) })
}

/// Two variables: Jensen's formula in the last variable, adaptive
/// quadrature over the first.
pub fn mahler_fiber_jensen(p: &LaurentPolynomial) -> Result<Measure> {
    if p.vars() != 2 {
        return Err(MahlerError::Invalid("fiber Jensen needs exactly two variables".into()));
    }
    let lo = p.terms.keys().map(|e| e[1]).min().unwrap();
    let hi = p.terms.keys().map(|e| e[1]).max().unwrap();
    let deg = (hi - lo) as usize;
    let mut by_y: Vec<Vec<(i64, i64)>> = vec![Vec::new(); deg + 1];
    for (e, &c) in &p.terms {
        by_y[(e[1] - lo) as usize].push((e[0], c));
    }
    let failure = std::cell::RefCell::new(None);
    let fiber = |theta: f64| -> f64 {
        let coeffs: Vec<Complex64> = by_y
            .iter()
            .map(|ts| {
                ts.iter()
                    .map(|&(a, c)| {
                        let ph = 2.0 * PI * (a as f64 * theta).rem_euclid(1.0);
                        Complex64::new(c as f64 * ph.cos(), c as f64 * ph.sin())
                    })
                    .sum()
            })
            .collect();
        let lead = coeffs[deg].norm();
        if lead == 0.0 {
            failure.borrow_mut().get_or_insert(MahlerError::VanishingOnTorusSuspected);
            return 0.0;
        }
        let mut v = lead.ln();
        if deg > 0 {
            match poly::roots(&coeffs) {
                Ok(r) => v += r.iter().map(|z| z.norm().ln().max(0.0)).sum::<f64>(),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(MahlerError::RootFindingFailed(e.to_string()));
                }
            }
        }
        v
    };
    let tol = Tolerance { abs: 1e-11, rel: 1e-11, max_intervals: 5000 };
    let (value, error) = quad::adaptive_real(fiber, &quad::uniform_breaks(0.0, 1.0, 24), tol)
        .map_err(|e| MahlerError::Quadrature(e.to_string()))?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(Measure { value, error, method: "fiber jensen, adaptive gauss-kronrod".into() })
}

pub fn mahler_multivariate(p: &LaurentPolynomial, method: Method, opts: QmcOptions) -> Result<Measure> {
    match method {
        Method::Qmc => mahler_qmc(p, opts),
        Method::FiberJensen => mahler_fiber_jensen(p),
    }
}

/// Measure after reducing to the support's own lattice: exact roots in one
/// variable, fiber Jensen in two, QMC beyond.
pub fn mahler_measure(p: &LaurentPolynomial, opts: QmcOptions) -> Result<Measure> {
    let (r, _) = p.reduced();
    match r.vars() {
        0 => Ok(Measure { value: (r.terms.values().next().unwrap().abs() as f64).ln(), error: 0.0, method: "monomial".into() }),
        1 => Ok(Measure { value: mahler_univariate(&r)?, error: 1e-12, method: "univariate roots".into() }),
        2 => mahler_fiber_jensen(&r),
        _ => mahler_qmc(&r, opts),
    }
}

/// A face `τ` of the Newton polytope with its polynomial `P_τ` pulled back
/// along `φ(m) = origin + Σ m_i basis_i`.
#[derive(Debug, Clone, Serialize)]
pub struct NewtonPolytopeFace {
    pub dim: usize,
    /// Outward functional in the coordinates of the support lattice; empty
    /// for faces found as intersections.
    pub functional: Vec<i64>,
    pub origin: Vec<i64>,
    pub basis: Vec<Vec<i64>>,
    pub points: Vec<Vec<i64>>,
    pub poly: PolynomialJson,
    pub measure: Measure,
}

#[derive(Debug, Clone, Serialize)]
pub struct FaceReport {
    pub measure: Measure,
    pub polytope_dim: usize,
    pub faces: Vec<NewtonPolytopeFace>,
    /// `m(P_τ) <= m(P) + 3 (err_τ + err_P)` for every face.
    pub pass: bool,
    pub worst_margin: f64,
}

fn primitive(v: Vec<i64>) -> Vec<i64> {
    let g = v.iter().fold(0, |g, &x| gcd(g, x));
    if g == 0 {
        v
    } else {
        v.into_iter().map(|x| x / g).collect()
    }
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Facets of the hull of `pts` in `Z^d`, `d ∈ {1,2,3}`, as (outward
/// primitive normal, indices on the facet), by exhaustive supporting planes.
fn facets(pts: &[Vec<i64>], d: usize) -> Vec<(Vec<i64>, BTreeSet<usize>)> {
    let mut found: BTreeMap<(Vec<i64>, i64), BTreeSet<usize>> = BTreeMap::new();
    let mut consider = |normal: Vec<i64>, a: &[i64]| {
        let normal = primitive(normal);
        if normal.iter().all(|&x| x == 0) {
            return;
        }
        let s: Vec<i64> = pts.iter().map(|p| dot(&normal, &sub(p, a))).collect();
        let normal = if s.iter().all(|&x| x <= 0) {
            normal
        } else if s.iter().all(|&x| x >= 0) {
            normal.iter().map(|x| -x).collect()
        } else {
            return;
        };
        let level = dot(&normal, a);
        let on: BTreeSet<usize> = (0..pts.len()).filter(|&i| dot(&normal, &pts[i]) == level).collect();
        found.insert((normal, level), on);
    };
    match d {
        1 => {
            consider(vec![1], &pts[0]);
            let lo = pts.iter().min().unwrap().clone();
            let hi = pts.iter().max().unwrap().clone();
            consider(vec![1], &hi);
            consider(vec![-1], &lo);
        }
        2 => {
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let e = sub(&pts[j], &pts[i]);
                    consider(vec![-e[1], e[0]], &pts[i]);
                }
            }
        }
        _ => {
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    for k in j + 1..pts.len() {
                        let u = sub(&pts[j], &pts[i]);
                        let v = sub(&pts[k], &pts[i]);
                        let n = vec![u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
                        consider(n, &pts[i]);
                    }
                }
            }
        }
    }
    found.into_iter().map(|((n, _), on)| (n, on)).collect()
}

fn face_poly(p: &LaurentPolynomial, idx: &BTreeSet<usize>, keys: &[Vec<i64>]) -> (LaurentPolynomial, Vec<i64>, Vec<Vec<i64>>) {
    let pts: Vec<&Vec<i64>> = idx.iter().map(|&i| &keys[i]).collect();
    let origin = pts[0].clone();
    let diffs: Vec<Vec<i64>> = pts.iter().map(|q| sub(q, &origin)).collect();
    let basis = saturated_basis(&diffs, p.vars());
    let terms = pts.iter().map(|q| (lattice_coords(&basis, &sub(q, &origin)).expect("face point in span"), p.terms[*q]));
    (LaurentPolynomial::new(basis.len(), terms).expect("nonzero"), origin, basis)
}

/// Faces of the Newton polytope (vertices, edges, facets) with the
/// inequality `m(P_τ) <= m(P)`. Supports of dimension above three are rejected.
pub fn face_polynomials(p: &LaurentPolynomial, opts: QmcOptions) -> Result<FaceReport> {
    let (red, _) = p.reduced();
    let d = red.vars();
    if d > 3 {
        return Err(MahlerError::HullDegenerate(format!("support has dimension {d} > 3")));
    }
    let measure = mahler_measure(p, opts)?;
    let coords: Vec<Vec<i64>> = red.terms.keys().cloned().collect();
    // red's terms are in the same order as p's: the coordinate map is affine and injective,
    // but BTreeMap order may differ, so map through the original keys
    let (_, basis) = p.reduced();
    let keys: Vec<Vec<i64>> = p.terms.keys().cloned().collect();
    let base = keys[0].clone();
    let lat: Vec<Vec<i64>> = keys.iter().map(|k| lattice_coords(&basis, &sub(k, &base)).unwrap()).collect();
    debug_assert_eq!(coords.len(), lat.len());
    let mut faces_idx: Vec<(usize, Vec<i64>, BTreeSet<usize>)> = Vec::new();
    if d >= 1 {
        let fs = facets(&lat, d);
        let mut count = vec![0usize; lat.len()];
        for (n, on) in &fs {
            for &i in on {
                count[i] += 1;
            }
            faces_idx.push((d - 1, n.clone(), on.clone()));
        }
        if d == 3 {
            let mut edges: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
            for a in 0..fs.len() {
                for b in a + 1..fs.len() {
                    let common: BTreeSet<usize> = fs[a].1.intersection(&fs[b].1).copied().collect();
                    if common.len() >= 2 {
                        edges.insert(common);
                    }
                }
            }
            for e in edges {
                faces_idx.push((1, Vec::new(), e));
            }
        }
        if d >= 2 {
            for (i, &c) in count.iter().enumerate() {
                if c >= d {
                    faces_idx.push((0, Vec::new(), BTreeSet::from([i])));
                }
            }
        }
    }
    let mut faces = Vec::new();
    let mut pass = true;
    let mut worst = f64::INFINITY;
    for (dim, functional, idx) in faces_idx {
        let (fp, origin, fbasis) = face_poly(p, &idx, &keys);
        let m = mahler_measure(&fp, opts)?;
        let margin = measure.value + 3.0 * (measure.error + m.error) + 1e-9 - m.value;
        worst = worst.min(margin);
        pass &= margin >= 0.0;
        faces.push(NewtonPolytopeFace {
            dim,
            functional,
            origin,
            basis: fbasis,
            points: idx.iter().map(|&i| keys[i].clone()).collect(),
            poly: fp.to_json(),
            measure: m,
        });
    }
    Ok(FaceReport { measure, polytope_dim: d, faces, pass, worst_margin: worst })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoydTerm {
    pub k: u32,
    pub exponents: Vec<i64>,
    pub degree: usize,
    pub measure: f64,
    pub abs_diff: f64,
}

/// `m(Q_k)` for `Q_k(t) = P(t^{a_1 k}, t^{a_2 k²}, …)`, with the common
/// factor of the resulting exponents removed.
pub fn boyd_limit(p: &LaurentPolynomial, a: &[i64], ks: &[u32], reference: f64) -> Result<Vec<BoydTerm>> {
    if a.len() != p.vars() || a.iter().all(|&x| x == 0) {
        return Err(MahlerError::Invalid("direction must be a nonzero vector of the right length".into()));
    }
    let mut out = Vec::new();
    for &k in ks {
        let r: Vec<i64> = a
            .iter()
            .enumerate()
            .map(|(i, &ai)| {
                (k as i64)
                    .checked_pow(i as u32 + 1)
                    .and_then(|kp| kp.checked_mul(ai))
                    .ok_or_else(|| MahlerError::Invalid("exponent overflow".into()))
            })
            .collect::<Result<_>>()?;
        let mut terms: BTreeMap<i64, i64> = BTreeMap::new();
        for (e, &c) in &p.terms {
            *terms.entry(dot(e, &r)).or_insert(0) += c;
        }
        terms.retain(|_, c| *c != 0);
        if terms.is_empty() {
            return Err(MahlerError::DegenerateSubstitution);
        }
        let lo = *terms.keys().next().unwrap();
        let g = terms.keys().fold(0, |g, &e| gcd(g, e - lo)).max(1);
        let q = LaurentPolynomial::new(1, terms.iter().map(|(e, c)| (vec![(e - lo) / g], *c)))?;
        let m = mahler_univariate(&q)?;
        out.push(BoydTerm {
            k,
            exponents: r,
            degree: q.dense_univariate()?.len() - 1,
            measure: m,
            abs_diff: (m - reference).abs(),
        });
    }
    Ok(out)
}

fn bernoulli() -> &'static [f64] {
    static B: OnceLock<Vec<f64>> = OnceLock::new();
    B.get_or_init(|| {
        let n = 60;
        let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
        for m in 0..=n {
            if m == 0 {
                b.push(BigRational::one());
                continue;
            }
            // Σ_{j<m+1} C(m+1, j) B_j = 0
            let mut s = BigRational::zero();
            let mut binom = BigInt::one();
            for (j, bj) in b.iter().enumerate() {
                s += BigRational::from_integer(binom.clone()) * bj;
                binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
            }
            b.push(-s / BigRational::from_integer(BigInt::from(m + 1)));
        }
        b.iter().map(|x| x.to_f64().unwrap()).collect()
    })
}

/// `Li_2(w)` for `|w| <= 1`, `Re w <= 1/2`, via the Bernoulli series in `-log(1-w)`.
fn dilog_core(w: Complex64) -> Complex64 {
    let u = -(Complex64::new(1.0, 0.0) - w).ln();
    let b = bernoulli();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = u;
    let mut fact = 1.0;
    for (n, bn) in b.iter().enumerate() {
        // pow = u^{n+1}, fact = (n+1)!
        if *bn != 0.0 {
            let t = pow * (*bn / fact);
            sum += t;
            if n > 4 && t.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        pow *= u;
        fact *= (n + 2) as f64;
    }
    sum
}

/// Bloch–Wigner dilogarithm `D(z) = Im Li_2(z) + arg(1-z) log|z|`, zero
/// at `0`, `1` and on the real line.
pub fn bloch_wigner(z: Complex64) -> f64 {
    if z.im == 0.0 || z.norm() == 0.0 {
        return 0.0;
    }
    let one = Complex64::new(1.0, 0.0);
    // D is invariant up to sign under the six anharmonic maps
    let images = [
        (z, 1.0),
        (one - z, -1.0),
        (one / z, -1.0),
        (one / (one - z), 1.0),
        (one - one / z, 1.0),
        (z / (z - one), -1.0),
    ];
    let (w, sign) = images
        .iter()
        .copied()
        .filter(|(w, _)| w.norm() <= 1.0 + 1e-12 && w.re <= 0.5 + 1e-12)
        .min_by(|a, b| a.0.norm().partial_cmp(&b.0.norm()).unwrap())
        .unwrap_or(images[0]);
    let v = dilog_core(w).im + (one - w).arg() * w.norm().ln();
    sign * v
}

/// `D(x) + D(y) + D((1-x)/(1-xy)) + D(1-xy) + D((1-y)/(1-xy))`.
pub fn five_term(x: Complex64, y: Complex64) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let xy = one - x * y;
    bloch_wigner(x) + bloch_wigner(y) + bloch_wigner((one - x) / xy) + bloch_wigner(xy) + bloch_wigner((one - y) / xy)
}

/// `D(7[α] + [α²] - 3[α³] + [-α⁴])` at `α = (-3 + √-7)/4`.
pub fn identity_combination() -> f64 {
    let a = Complex64::new(-0.75, 7f64.sqrt() / 4.0);
    7.0 * bloch_wigner(a) + bloch_wigner(a * a) - 3.0 * bloch_wigner(a * a * a) + bloch_wigner(-(a * a * a * a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Antisymmetry,
    FiveTerm,
    Identity32,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationCheck {
    pub relation: Relation,
    pub samples: usize,
    pub max_abs: f64,
}

/// Largest residual of the relation over seeded random samples.
pub fn relation_check(kind: Relation, samples: usize, seed: u64) -> RelationCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rand_z = |rng: &mut ChaCha8Rng| Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
    let mut worst: f64 = 0.0;
    let n = match kind {
        Relation::Identity32 => {
            worst = identity_combination().abs();
            1
        }
        Relation::Antisymmetry => {
            for _ in 0..samples {
                let z = rand_z(&mut rng);
                worst = worst.max((bloch_wigner(z.conj()) + bloch_wigner(z)).abs());
            }
            samples
        }
        Relation::FiveTerm => {
            let mut done = 0;
            while done < samples {
                let (x, y) = (rand_z(&mut rng), rand_z(&mut rng));
                if (Complex64::new(1.0, 0.0) - x * y).norm() < 1e-3 {
                    continue;
                }
                worst = worst.max(five_term(x, y).abs());
                done += 1;
            }
            samples
        }
    };
    RelationCheck { relation: kind, samples: n, max_abs: worst }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PolyFlags {
    pub reciprocal: bool,
    /// `None` for multivariate input.
    pub kronecker: Option<bool>,
}

/// `P` is reciprocal when `c_e = c_{s-e}` for the centre shift `s`;
/// Kronecker: monic up to sign, every root on the unit circle and a root of unity.
pub fn reciprocal_and_kronecker(p: &LaurentPolynomial) -> Result<PolyFlags> {
    let n = p.vars();
    let s: Vec<i64> = (0..n)
        .map(|i| p.terms.keys().map(|e| e[i]).min().unwrap() + p.terms.keys().map(|e| e[i]).max().unwrap())
        .collect();
    let reciprocal = p.terms.iter().all(|(e, c)| p.terms.get(&sub(&s, e)) == Some(c));
    let kronecker = if n == 1 { Some(kronecker(p)?) } else { None };
    Ok(PolyFlags { reciprocal, kronecker })
}

fn kronecker(p: &LaurentPolynomial) -> Result<bool> {
    let c = p.dense_univariate()?;
    if c.last().unwrap().abs() != 1 || c[0].abs() != 1 {
        return Ok(false);
    }
    if c.len() == 1 {
        return Ok(true);
    }
    let deg = c.len() - 1;
    let qp = int_qpoly(&c);
    let core = qp.divrem(&qp.gcd(&qp.derivative())).0;
    let roots = qpoly_roots(&core)?;
    let mmax = 2 * deg * deg;
    Ok(roots.iter().all(|z| {
        (z.norm() - 1.0).abs() <= 1e-8 && (1..=mmax).any(|m| (z.powu(m as u32) - 1.0).norm() <= 1e-6)
    }))
}

/// Divides out assumed factors so that the caller can check `m(Q) <= m(P)`
/// for `Q | P` on constructed instances.
pub fn divisor_pair(q: &LaurentPolynomial, r: &LaurentPolynomial) -> Result<(f64, f64)> {
    let p = q.mul(r)?;
    Ok((mahler_univariate(q)?, mahler_univariate(&p)?))
}
