//! Geometry of a unit subgroup `E`: the weighted inner product, the
//! orthogonal complement basis `Q` of `Log(E)`, the constant `c`, the linear
//! maps `S_v`, the domain `𝒟`, and reduction to subfield fibers.

use crate::numfield::{FieldElement, LogFlavor, NumberField};
use crate::specfun::PlaceKind;
use crate::util::combinations;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

const ORTHO_TOL: f64 = 1e-9;
const FIBER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("unit generators are dependent")]
    DependentUnits,
    #[error("orthogonal complement is trivial")]
    TrivialComplement,
    #[error("complement basis is not constant on fiber {0}")]
    NotFiberConstant(usize),
    #[error("fiber partition is invalid: {0}")]
    InvalidPartition(String),
    #[error("invalid complement matrix: {0}")]
    InvalidBasis(String),
    #[error(transparent)]
    Field(#[from] crate::numfield::FieldError),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// `Σ e_v β_v γ_v`.
pub fn weighted_inner(kinds: &[PlaceKind], beta: &[f64], gamma: &[f64]) -> Result<f64> {
    if beta.len() != gamma.len() {
        return Err(GeometryError::LengthMismatch(beta.len(), gamma.len()));
    }
    if beta.len() != kinds.len() {
        return Err(GeometryError::LengthMismatch(beta.len(), kinds.len()));
    }
    Ok(kinds.iter().zip(beta.iter().zip(gamma)).map(|(k, (b, g))| k.weight() * b * g).sum())
}

/// Places of a subfield `K` seen as fibers of the places of `L`.
#[derive(Debug, Clone, Serialize)]
pub struct FiberData {
    pub fibers: Vec<Vec<usize>>,
    pub r1: Vec<usize>,
    pub r2: Vec<usize>,
    /// `m_w = r_{1,w} + 2 r_{2,w}`
    pub m: Vec<usize>,
    /// `κ_w = (r_{1,w} + r_{2,w}) / m_w`
    pub kappa: Vec<f64>,
    /// One row of `Q` per fiber.
    #[serde(skip)]
    pub qcal: DMatrix<f64>,
    /// `[K:Q]` when known.
    pub subfield_degree: Option<usize>,
}

impl FiberData {
    pub fn num_fibers(&self) -> usize {
        self.fibers.len()
    }

    /// `[L:K]`: `n / [K:Q]` when `[K:Q]` is known, else `min_w m_w / e_w`
    /// with `e_w = 1` for fibers containing a real place and 2 otherwise.
    pub fn relative_degree(&self) -> f64 {
        let n: usize = self.m.iter().sum();
        match self.subfield_degree {
            Some(d) => n as f64 / d as f64,
            None => self
                .m
                .iter()
                .zip(&self.r1)
                .map(|(&m, &r1)| if r1 > 0 { m as f64 } else { m as f64 / 2.0 })
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// `[K:Q]`, supplied or estimated as `n / [L:K]`.
    pub fn subfield_degree_estimate(&self) -> f64 {
        match self.subfield_degree {
            Some(d) => d as f64,
            None => self.m.iter().sum::<usize>() as f64 / self.relative_degree(),
        }
    }
}

/// Geometry of a unit subgroup `E`, or of a synthetic placement of `Q`.
#[derive(Debug, Clone)]
pub struct SubgroupGeometry {
    kinds: Vec<PlaceKind>,
    q: DMatrix<f64>,
    unit_logs: Vec<Vec<f64>>,
    fibers: Option<FiberData>,
}

fn inner(kinds: &[PlaceKind], a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    kinds.iter().enumerate().map(|(v, k)| k.weight() * a[v] * b[v]).sum()
}

impl SubgroupGeometry {
    /// Builds `Q` for the subgroup generated by `units`.
    ///
    /// The complement of `Log(E)` under `⟨,⟩` is the standard-dot nullspace
    /// of the weighted logs `LOG(E)`; Gram–Schmidt under `⟨,⟩` anchored at the
    /// all-ones vector then gives `q_1 = 1`, pairwise orthogonal columns, and
    /// `⟨q_j, q_j⟩ = 1` for `j >= 2`.
    pub fn from_units(field: &NumberField, units: &[FieldElement]) -> Result<Self> {
        let kinds = field.place_kinds();
        let n_places = kinds.len();
        let weighted: Vec<Vec<f64>> = units
            .iter()
            .map(|u| field.log_embed(u, LogFlavor::Weighted))
            .collect::<std::result::Result<_, _>>()?;
        let plain: Vec<Vec<f64>> = units
            .iter()
            .map(|u| field.log_embed(u, LogFlavor::Plain))
            .collect::<std::result::Result<_, _>>()?;
        let j = units.len();
        if j >= n_places {
            return Err(if j == n_places { GeometryError::TrivialComplement } else { GeometryError::DependentUnits });
        }
        if j > 0 {
            let m = DMatrix::from_fn(j, n_places, |r, c| weighted[r][c]);
            let sv = m.singular_values();
            if sv.min() <= crate::unitlat::RANK_TOL * sv.max() {
                return Err(GeometryError::DependentUnits);
            }
        }
        // Orthonormal basis (standard dot) of span LOG(E), twice-orthogonalized.
        let mut span: Vec<DVector<f64>> = Vec::new();
        for w in &weighted {
            let mut v = DVector::from_vec(w.clone());
            for _ in 0..2 {
                for u in &span {
                    let p = u.dot(&v);
                    v -= u * p;
                }
            }
            let nv = v.norm();
            span.push(v / nv);
        }
        let project = |mut v: DVector<f64>| {
            for _ in 0..2 {
                for u in &span {
                    let p = u.dot(&v);
                    v -= u * p;
                }
            }
            v
        };
        let k = n_places - j;
        let mut cols: Vec<DVector<f64>> = vec![DVector::from_element(n_places, 1.0)];
        let mut candidates: Vec<DVector<f64>> = (0..n_places)
            .map(|v| {
                let mut e = DVector::zeros(n_places);
                e[v] = 1.0;
                project(e)
            })
            .collect();
        while cols.len() < k {
            // ⟨,⟩-orthogonalize all candidates, take the largest residual
            let mut best: Option<(usize, f64)> = None;
            for (ci, cand) in candidates.iter_mut().enumerate() {
                for _ in 0..2 {
                    for q in &cols {
                        let p = inner(&kinds, q, cand) / inner(&kinds, q, q);
                        *cand -= q * p;
                    }
                }
                let len = inner(&kinds, cand, cand);
                if best.is_none_or(|(_, b)| len > b) {
                    best = Some((ci, len));
                }
            }
            let (ci, len) = best.ok_or(GeometryError::TrivialComplement)?;
            if len < 1e-20 {
                return Err(GeometryError::DependentUnits);
            }
            let q = project(candidates.swap_remove(ci)) / len.sqrt();
            cols.push(q);
        }
        let q = DMatrix::from_columns(&cols);
        let geom = SubgroupGeometry { kinds, q, unit_logs: plain, fibers: None };
        geom.validate()?;
        Ok(geom)
    }

    /// Geometry from explicit place types and complement matrix, for
    /// synthetic experiments. `q` must have first column all ones and
    /// `⟨,⟩`-orthogonal columns.
    pub fn from_parts(kinds: Vec<PlaceKind>, q: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != kinds.len() {
            return Err(GeometryError::LengthMismatch(q.nrows(), kinds.len()));
        }
        let geom = SubgroupGeometry { kinds, q, unit_logs: Vec::new(), fibers: None };
        geom.validate()?;
        Ok(geom)
    }

    fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 {
            return Err(GeometryError::TrivialComplement);
        }
        if self.q.column(0).iter().any(|&x| (x - 1.0).abs() > 1e-12) {
            return Err(GeometryError::InvalidBasis("first column must be all ones".into()));
        }
        let cols: Vec<DVector<f64>> = (0..k).map(|j| self.q.column(j).into_owned()).collect();
        for a in 0..k {
            for b in 0..a {
                let ip = inner(&self.kinds, &cols[a], &cols[b]);
                let scale = (inner(&self.kinds, &cols[a], &cols[a]) * inner(&self.kinds, &cols[b], &cols[b])).sqrt();
                if ip.abs() > ORTHO_TOL * scale {
                    return Err(GeometryError::InvalidBasis(format!("columns {b} and {a} not orthogonal ({ip:e})")));
                }
            }
        }
        let sv = self.q.singular_values();
        if sv.min() <= crate::unitlat::RANK_TOL * sv.max() {
            return Err(GeometryError::InvalidBasis("rank deficient".into()));
        }
        Ok(())
    }

    pub fn kinds(&self) -> &[PlaceKind] {
        &self.kinds
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn k(&self) -> usize {
        self.q.ncols()
    }

    pub fn num_places(&self) -> usize {
        self.kinds.len()
    }

    /// Rank of `E`.
    pub fn unit_rank(&self) -> usize {
        self.num_places() - self.k()
    }

    /// Degree `n = Σ e_v`.
    pub fn degree(&self) -> usize {
        self.kinds.iter().map(|k| k.multiplier() as usize).sum()
    }

    pub fn r1(&self) -> usize {
        self.kinds.iter().filter(|k| **k == PlaceKind::Real).count()
    }

    pub fn r2(&self) -> usize {
        self.num_places() - self.r1()
    }

    /// Plain logarithms of the generators of `E`.
    pub fn unit_logs(&self) -> &[Vec<f64>] {
        &self.unit_logs
    }

    /// `d_j = ⟨q_j, q_j⟩`.
    pub fn d(&self, j: usize) -> f64 {
        let col = self.q.column(j).into_owned();
        inner(&self.kinds, &col, &col)
    }

    /// `det(QᵀQ)` with the standard dot product.
    pub fn det_qtq(&self) -> f64 {
        (self.q.transpose() * &self.q).determinant()
    }

    /// `c = 2^{r2} √det(QᵀQ)`.
    pub fn c(&self) -> f64 {
        2f64.powi(self.r2() as i32) * self.det_qtq().sqrt()
    }

    /// Largest `|⟨q_j, Log ε⟩|` over columns and generators.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.k() {
            let col: Vec<f64> = self.q.column(j).iter().copied().collect();
            for l in &self.unit_logs {
                worst = worst.max(weighted_inner(&self.kinds, &col, l).unwrap().abs());
            }
            for i in 0..j {
                let other: Vec<f64> = self.q.column(i).iter().copied().collect();
                worst = worst.max(weighted_inner(&self.kinds, &col, &other).unwrap().abs());
            }
        }
        worst
    }

    /// `S_v(s) = Σ_j q_{jv} s_j` at every place.
    pub fn s_map(&self, s: &[Complex64]) -> Vec<Complex64> {
        (0..self.num_places())
            .map(|v| (0..self.k()).map(|j| s[j] * self.q[(v, j)]).sum())
            .collect()
    }

    pub fn s_map_real(&self, s: &[f64]) -> Vec<f64> {
        (0..self.num_places())
            .map(|v| (0..self.k()).map(|j| s[j] * self.q[(v, j)]).sum())
            .collect()
    }

    /// `S_w(s)` per fiber; requires fiber data.
    pub fn s_map_fibers(&self, s: &[Complex64]) -> Option<Vec<Complex64>> {
        let f = self.fibers.as_ref()?;
        Some(
            (0..f.num_fibers())
                .map(|w| (0..self.k()).map(|j| s[j] * f.qcal[(w, j)]).sum())
                .collect(),
        )
    }

    /// Whether `S_v(σ) > 0` at every place.
    pub fn domain_check(&self, sigma: &[f64]) -> bool {
        self.s_map_real(sigma).iter().all(|&x| x > 0.0)
    }

    pub fn fibers(&self) -> Option<&FiberData> {
        self.fibers.as_ref()
    }

    /// Attaches a fiber partition after checking that `Q` is constant on
    /// each fiber.
    pub fn with_fibers(mut self, partition: &[Vec<usize>], subfield_degree: Option<usize>) -> Result<Self> {
        self.fibers = Some(self.fiber_reduce(partition, subfield_degree)?);
        Ok(self)
    }

    pub fn fiber_reduce(&self, partition: &[Vec<usize>], subfield_degree: Option<usize>) -> Result<FiberData> {
        let n_places = self.num_places();
        let mut seen = vec![false; n_places];
        for fiber in partition {
            if fiber.is_empty() {
                return Err(GeometryError::InvalidPartition("empty fiber".into()));
            }
            for &v in fiber {
                if v >= n_places || seen[v] {
                    return Err(GeometryError::InvalidPartition(format!("place {v} repeated or out of range")));
                }
                seen[v] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(GeometryError::InvalidPartition("not every place is covered".into()));
        }
        let k = self.k();
        let mut r1 = Vec::new();
        let mut r2 = Vec::new();
        for (w, fiber) in partition.iter().enumerate() {
            let first = fiber[0];
            for &v in fiber {
                for j in 0..k {
                    let a = self.q[(v, j)];
                    let b = self.q[(first, j)];
                    if (a - b).abs() > FIBER_TOL * a.abs().max(b.abs()).max(1.0) {
                        return Err(GeometryError::NotFiberConstant(w));
                    }
                }
            }
            r1.push(fiber.iter().filter(|&&v| self.kinds[v] == PlaceKind::Real).count());
            r2.push(fiber.iter().filter(|&&v| self.kinds[v] == PlaceKind::Complex).count());
        }
        let m: Vec<usize> = r1.iter().zip(&r2).map(|(a, b)| a + 2 * b).collect();
        let kappa: Vec<f64> = r1.iter().zip(&r2).zip(&m).map(|((a, b), m)| (a + b) as f64 / *m as f64).collect();
        let qcal = DMatrix::from_fn(partition.len(), k, |w, j| {
            partition[w].iter().map(|&v| self.q[(v, j)]).sum::<f64>() / partition[w].len() as f64
        });
        if k > partition.len() {
            return Err(GeometryError::InvalidPartition(format!("k = {k} exceeds the number of fibers")));
        }
        Ok(FiberData { fibers: partition.to_vec(), r1, r2, m, kappa, qcal, subfield_degree })
    }
}

/// `det(𝒬ᵀ diag(c) 𝒬)` by Cauchy–Binet: `Σ_η det²(𝒬_η) Π_{w∈η} c_w`.
pub fn cauchy_binet_det(qcal: &DMatrix<f64>, c: &[f64]) -> f64 {
    let k = qcal.ncols();
    combinations(qcal.nrows(), k)
        .into_iter()
        .map(|eta| {
            let sub = DMatrix::from_fn(k, k, |r, col| qcal[(eta[r], col)]);
            let d = sub.determinant();
            d * d * eta.iter().map(|&w| c[w]).product::<f64>()
        })
        .sum()
}

impl FiberData {
    /// `det(QᵀQ)` recomputed from the fiber matrix: `det(𝒬ᵀ diag(r_{1,w}+r_{2,w}) 𝒬)`.
    /// When `k = |A_K|` this equals `det(𝒬ᵀ𝒬) Π_w (r_{1,w}+r_{2,w})`.
    pub fn det_qtq(&self) -> f64 {
        let c: Vec<f64> = self.r1.iter().zip(&self.r2).map(|(a, b)| (a + b) as f64).collect();
        cauchy_binet_det(&self.qcal, &c)
    }

    /// `det(𝒬ᵀ𝒬) Π_w (r_{1,w}+r_{2,w})`, meaningful when `k = |A_K|`.
    pub fn det_qtq_product_form(&self) -> f64 {
        let c: f64 = self.r1.iter().zip(&self.r2).map(|(a, b)| (a + b) as f64).product();
        (self.qcal.transpose() * &self.qcal).determinant() * c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::IntPolynomial;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn field(c: &[i64]) -> NumberField {
        NumberField::new(IntPolynomial::from_i64(c).unwrap()).unwrap()
    }

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    /// Q(√2, √3) = Q[x]/(x^4 - 10x^2 + 1) with relative units over Q(√2).
    fn biquadratic() -> (NumberField, Vec<FieldElement>) {
        let f = field(&[1, 0, -10, 0, 1]);
        let two_plus_sqrt3 = FieldElement::new(vec![rat(2, 1), rat(11, 2), rat(0, 1), rat(-1, 2)]);
        let theta = FieldElement::from_i64(&[0, 1, 0, 0]);
        (f, vec![two_plus_sqrt3, theta])
    }

    #[test]
    fn weighted_inner_examples() {
        let kinds = [PlaceKind::Real, PlaceKind::Real, PlaceKind::Complex];
        assert_eq!(weighted_inner(&kinds, &[1.0; 3], &[1.0; 3]).unwrap(), 4.0);
        assert_eq!(weighted_inner(&kinds, &[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).unwrap(), 2.0);
        assert!(matches!(weighted_inner(&kinds, &[1.0; 3], &[1.0; 2]), Err(GeometryError::LengthMismatch(..))));
    }

    #[test]
    fn full_unit_group_leaves_ones() {
        for (poly, units) in [
            (vec![-2, 0, 1], vec![FieldElement::from_i64(&[1, 1])]),
            (vec![-1, -1, 0, 1], vec![FieldElement::from_i64(&[0, 1, 0])]),
            (vec![1, -1, 0, 0, 0, 1], vec![FieldElement::from_i64(&[0, 1, 0, 0, 0]), FieldElement::from_i64(&[1, 1, 0, 0, 0])]),
        ] {
            let f = field(&poly);
            let g = SubgroupGeometry::from_units(&f, &units).unwrap();
            assert_eq!(g.k(), 1);
            let a = f.num_places() as f64;
            assert!((g.det_qtq() - a).abs() < 1e-12);
            assert!((g.c() - 2f64.powi(f.r2() as i32) * a.sqrt()).abs() < 1e-12);
            assert!(g.orthogonality_residual() < 1e-10);
        }
    }

    #[test]
    fn trivial_subgroup_in_real_quadratic() {
        let f = field(&[-2, 0, 1]);
        let g = SubgroupGeometry::from_units(&f, &[]).unwrap();
        assert_eq!(g.k(), 2);
        let q = g.q();
        assert!((q[(0, 1)] + q[(1, 1)]).abs() < 1e-14);
        assert!((g.d(1) - 1.0).abs() < 1e-14);
        assert_eq!(g.d(0), 2.0);
    }

    #[test]
    fn rejects_dependent_units() {
        let f = field(&[-2, 0, 1]);
        let u = FieldElement::from_i64(&[1, 1]);
        let u2 = FieldElement::from_i64(&[3, 2]);
        assert_eq!(SubgroupGeometry::from_units(&f, &[u, u2]).unwrap_err(), GeometryError::TrivialComplement);
        let f = field(&[1, -2, -1, 1]);
        let a = FieldElement::from_i64(&[0, 1, 0]);
        let a2 = f.mul(&a, &a);
        assert_eq!(SubgroupGeometry::from_units(&f, &[a, a2]).unwrap_err(), GeometryError::DependentUnits);
    }

    #[test]
    fn relative_units_give_fiber_constant_rows() {
        let (f, units) = biquadratic();
        let g = SubgroupGeometry::from_units(&f, &units).unwrap();
        assert_eq!(g.k(), 2);
        assert!(g.orthogonality_residual() < 1e-10);
        let g = g.with_fibers(&[vec![1, 3], vec![0, 2]], Some(2)).unwrap();
        let fd = g.fibers().unwrap();
        assert_eq!(fd.m, vec![2, 2]);
        assert!(g.k() <= fd.num_fibers());
        assert!((fd.det_qtq() - g.det_qtq()).abs() < 1e-9 * g.det_qtq());
        assert!((fd.det_qtq_product_form() - g.det_qtq()).abs() < 1e-9 * g.det_qtq());
        // the wrong pairing is rejected
        let g2 = SubgroupGeometry::from_units(&f, &units).unwrap();
        assert!(matches!(g2.fiber_reduce(&[vec![0, 1], vec![2, 3]], None), Err(GeometryError::NotFiberConstant(_))));
    }

    #[test]
    fn single_fiber_and_trivial_fibers() {
        let f = field(&[1, -1, 0, 0, 0, 1]);
        let units = vec![FieldElement::from_i64(&[0, 1, 0, 0, 0]), FieldElement::from_i64(&[1, 1, 0, 0, 0])];
        let g = SubgroupGeometry::from_units(&f, &units).unwrap();
        let fd = g.fiber_reduce(&[vec![0, 1, 2]], Some(1)).unwrap();
        assert_eq!(fd.m, vec![5]);
        assert!((fd.kappa[0] - 3.0 / 5.0).abs() < 1e-15);
        assert_eq!(fd.qcal[(0, 0)], 1.0);
        let g = SubgroupGeometry::from_units(&f, &[]).unwrap();
        let fd = g.fiber_reduce(&[vec![0], vec![1], vec![2]], None).unwrap();
        assert_eq!(fd.m, vec![1, 2, 2]);
        assert!((&fd.qcal - g.q()).norm() < 1e-15);
        assert!(matches!(g.fiber_reduce(&[vec![0], vec![1]], None), Err(GeometryError::InvalidPartition(_))));
    }

    #[test]
    fn synthetic_fiber_determinant() {
        // |A_K| = 2, fibers of 3 and 2 real places, k = 2
        let kinds = vec![PlaceKind::Real; 5];
        // q2 constant on fibers and orthogonal to ones: 3a + 2b = 0
        let q = DMatrix::from_row_slice(5, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, -3.0, 1.0, -3.0]);
        let g = SubgroupGeometry::from_parts(kinds, q).unwrap();
        let fd = g.fiber_reduce(&[vec![0, 1, 2], vec![3, 4]], None).unwrap();
        let direct = g.det_qtq();
        assert!((fd.det_qtq_product_form() - direct).abs() < 1e-9 * direct);
        assert!((fd.det_qtq() - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn s_map_examples() {
        let f = field(&[1, -1, 0, 0, 0, 1]);
        let g = SubgroupGeometry::from_units(&f, &[]).unwrap();
        let t = 0.7;
        let mut s = vec![Complex64::new(0.0, 0.0); g.k()];
        s[0] = Complex64::new(t, 0.0);
        assert!(g.s_map(&s).iter().all(|z| (z.re - t).abs() < 1e-15 && z.im == 0.0));
        let mut sig = vec![0.0; g.k()];
        sig[0] = t;
        assert!(g.domain_check(&sig));
        assert!(!g.domain_check(&vec![0.0; g.k()]));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let mut sig: Vec<f64> = (0..g.k()).map(|_| rng.gen_range(-0.3..0.3)).collect();
            sig[0] = rng.gen_range(0.5..3.0);
            let sv = g.s_map_real(&sig);
            let avg: f64 = sv.iter().zip(g.kinds()).map(|(x, k)| k.weight() * x).sum::<f64>() / g.degree() as f64;
            assert!((avg - sig[0]).abs() < 1e-12);
        }
        for j in 1..g.k() {
            let s: f64 = (0..g.num_places()).map(|v| g.kinds()[v].weight() * g.q()[(v, j)]).sum();
            assert!(s.abs() < 1e-12);
        }
    }

    fn projector(g: &SubgroupGeometry) -> DMatrix<f64> {
        // ⟨,⟩-orthogonal projector onto the column space of Q
        let w = DMatrix::from_diagonal(&DVector::from_iterator(g.num_places(), g.kinds().iter().map(|k| k.weight())));
        let q = g.q();
        let m = q.transpose() * &w * q;
        q * m.try_inverse().unwrap() * q.transpose() * w
    }

    proptest! {
        #[test]
        fn basis_independent_under_unit_shuffles(perm in 0usize..6, flip in proptest::bool::ANY) {
            let f = field(&[1, -1, -4, 4, 1]);
            let mut units = vec![
                FieldElement::from_i64(&[0, 1, 0, 0]),
                FieldElement::from_i64(&[-1, 1, 0, 0]),
            ];
            if flip {
                units.reverse();
            }
            let g1 = SubgroupGeometry::from_units(&f, &units).unwrap();
            let perms = [[0, 1], [1, 0], [0, 1], [1, 0], [0, 1], [1, 0]];
            let shuffled: Vec<FieldElement> = perms[perm].iter().map(|&i| units[i].clone()).collect();
            let g2 = SubgroupGeometry::from_units(&f, &shuffled).unwrap();
            prop_assert!((g1.det_qtq() - g2.det_qtq()).abs() < 1e-9 * g1.det_qtq());
            prop_assert!((g1.c() - g2.c()).abs() < 1e-9 * g1.c());
            prop_assert!((projector(&g1) - projector(&g2)).norm() < 1e-9);
            prop_assert!(g1.orthogonality_residual() < 1e-10);
            // domain membership of the same point of col(Q)
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(perm as u64);
            let sigma: Vec<f64> = (0..g1.k()).map(|j| if j == 0 { 1.0 } else { rng.gen_range(-2.0..2.0) }).collect();
            let x = g1.s_map_real(&sigma);
            let qtq = g2.q().transpose() * g2.q();
            let rhs = g2.q().transpose() * DVector::from_vec(x.clone());
            let sigma2 = qtq.lu().solve(&rhs).unwrap();
            let x2 = g2.s_map_real(sigma2.as_slice());
            for (a, b) in x.iter().zip(&x2) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            prop_assert_eq!(g1.domain_check(&sigma), g2.domain_check(sigma2.as_slice()));
        }
    }
}
