//! The convex objective `F_y(σ) = α(σ) - y·σ`, its critical point over the
//! domain `𝒟`, and the inequalities that hold there.
//!
//! `α` is represented as a weighted sum of log-gamma terms,
//! `α(s) = Σ_w [a_w log Γ(S_w(s)) + b_w log Γ(S_w(s) + 1/2)]`, which covers
//! both the per-place form (`(1,0)` real, `(1,1)` complex) and the per-fiber
//! form (`(m κ, m(1-κ))`).

use crate::numfield::{FieldElement, LogFlavor, NumberField};
use crate::report::CheckRecord;
use crate::specfun::{self, PlaceKind, SpecfunError};
use crate::subgeom::SubgroupGeometry;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

pub const RESIDUAL_TOL: f64 = 1e-10;
const MAX_ITER: usize = 200;
const BOUNDARY_FRACTION: f64 = 0.95;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SaddleError {
    #[error("point outside the domain (min S = {0:e})")]
    OutsideDomain(f64),
    #[error("Newton did not converge: residual {residual:e} after {iterations} iterations")]
    MaxIterations { best: Vec<f64>, residual: f64, iterations: usize },
    #[error("bound violated: {0}")]
    BoundViolated(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

pub type Result<T> = std::result::Result<T, SaddleError>;

/// One term `a log Γ(S) + b log Γ(S + 1/2)` with `S = q·s`.
#[derive(Debug, Clone, Serialize)]
pub struct GammaRow {
    pub a: f64,
    pub b: f64,
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaSum {
    rows: Vec<GammaRow>,
    k: usize,
}

/// Value, gradient and (optionally) Hessian of `α` at a real point.
#[derive(Debug, Clone)]
pub struct AlphaEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Option<DMatrix<f64>>,
}

impl GammaSum {
    pub fn new(rows: Vec<GammaRow>) -> Result<Self> {
        let k = rows.first().map(|r| r.q.len()).ok_or_else(|| SaddleError::Input("no rows".into()))?;
        if k == 0 {
            return Err(SaddleError::Input("k = 0".into()));
        }
        for r in &rows {
            if r.q.len() != k {
                return Err(SaddleError::Input("rows of different length".into()));
            }
            if !(r.a >= 0.0 && r.b >= 0.0 && r.a + r.b > 0.0) {
                return Err(SaddleError::Input(format!("bad weights ({}, {})", r.a, r.b)));
            }
            if r.q[0] != 1.0 {
                return Err(SaddleError::Input("first coordinate of every row must be 1".into()));
            }
        }
        let sum = GammaSum { rows, k };
        let sv = sum.q_matrix().singular_values();
        if sv.min() <= 1e-12 * sv.max() {
            return Err(SaddleError::Input("row matrix is rank deficient".into()));
        }
        Ok(sum)
    }

    /// Per-place form of a subgroup geometry.
    pub fn per_place(geom: &SubgroupGeometry) -> Self {
        let rows = geom
            .kinds()
            .iter()
            .enumerate()
            .map(|(v, kind)| GammaRow {
                a: 1.0,
                b: if *kind == PlaceKind::Complex { 1.0 } else { 0.0 },
                q: geom.q().row(v).iter().copied().collect(),
            })
            .collect();
        GammaSum { rows, k: geom.k() }
    }

    /// Per-fiber form `Σ m_w α_{κ_w}(S_w)`, when fiber data are attached.
    pub fn per_fiber(geom: &SubgroupGeometry) -> Option<Self> {
        let f = geom.fibers()?;
        let m: Vec<f64> = f.m.iter().map(|&x| x as f64).collect();
        GammaSum::from_fibers(&m, &f.kappa, &f.qcal).ok()
    }

    /// `Σ m_w α_{κ_w}(S_w)` from explicit fiber data.
    pub fn from_fibers(m: &[f64], kappa: &[f64], qcal: &DMatrix<f64>) -> Result<Self> {
        if m.len() != kappa.len() || m.len() != qcal.nrows() {
            return Err(SaddleError::Input("fiber data lengths differ".into()));
        }
        if let Some(bad) = kappa.iter().find(|k| !(0.5..=1.0).contains(*k)) {
            return Err(SaddleError::Input(format!("kappa {bad} outside [1/2, 1]")));
        }
        GammaSum::new(
            (0..m.len())
                .map(|w| GammaRow { a: m[w] * kappa[w], b: m[w] * (1.0 - kappa[w]), q: qcal.row(w).iter().copied().collect() })
                .collect(),
        )
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> &[GammaRow] {
        &self.rows
    }

    /// Degree `n = Σ (a + b)`.
    pub fn n(&self) -> f64 {
        self.rows.iter().map(|r| r.a + r.b).sum()
    }

    /// Complex place count `r_2 = Σ b`.
    pub fn r2(&self) -> f64 {
        self.rows.iter().map(|r| r.b).sum()
    }

    pub fn q_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows.len(), self.k, |w, j| self.rows[w].q[j])
    }

    pub fn s_real(&self, sigma: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.q.iter().zip(sigma).map(|(q, s)| q * s).sum()).collect()
    }

    pub fn s_complex(&self, s: &[Complex64]) -> Vec<Complex64> {
        self.rows.iter().map(|r| r.q.iter().zip(s).map(|(q, s)| s * *q).sum()).collect()
    }

    pub fn in_domain(&self, sigma: &[f64]) -> bool {
        self.s_real(sigma).iter().all(|&x| x > 0.0)
    }

    fn check_domain(&self, s: &[f64]) -> Result<()> {
        let min = s.iter().copied().fold(f64::INFINITY, f64::min);
        if min > 0.0 {
            Ok(())
        } else {
            Err(SaddleError::OutsideDomain(min))
        }
    }

    /// `α(σ)` for real `σ ∈ 𝒟`.
    pub fn value(&self, sigma: &[f64]) -> Result<f64> {
        let s = self.s_real(sigma);
        self.check_domain(&s)?;
        let mut total = 0.0;
        for (r, x) in self.rows.iter().zip(&s) {
            total += r.a * specfun::log_gamma_real(*x)?;
            if r.b != 0.0 {
                total += r.b * specfun::log_gamma_real(x + 0.5)?;
            }
        }
        Ok(total)
    }

    /// Per-row second derivative `a Ψ'(S) + b Ψ'(S + 1/2)` at real `σ`.
    pub fn second_derivatives(&self, sigma: &[f64]) -> Result<Vec<f64>> {
        self.row_derivatives(&self.s_real(sigma), 1)
    }

    fn row_derivatives(&self, s: &[f64], polygamma_order: usize) -> Result<Vec<f64>> {
        self.check_domain(s)?;
        self.rows
            .iter()
            .zip(s)
            .map(|(r, x)| {
                let mut d = r.a * specfun::polygamma(*x, polygamma_order)?;
                if r.b != 0.0 {
                    d += r.b * specfun::polygamma(x + 0.5, polygamma_order)?;
                }
                Ok(d)
            })
            .collect()
    }

    pub fn eval(&self, sigma: &[f64], with_hessian: bool) -> Result<AlphaEval> {
        let s = self.s_real(sigma);
        let value = self.value(sigma)?;
        let d1 = self.row_derivatives(&s, 0)?;
        let mut gradient = vec![0.0; self.k];
        for (r, d) in self.rows.iter().zip(&d1) {
            for j in 0..self.k {
                gradient[j] += d * r.q[j];
            }
        }
        let hessian = if with_hessian {
            let d2 = self.row_derivatives(&s, 1)?;
            let mut h = DMatrix::zeros(self.k, self.k);
            for (r, d) in self.rows.iter().zip(&d2) {
                for i in 0..self.k {
                    for j in 0..self.k {
                        h[(i, j)] += d * r.q[i] * r.q[j];
                    }
                }
            }
            Some(h)
        } else {
            None
        };
        Ok(AlphaEval { value, gradient, hessian })
    }

    /// `α(s)` for complex `s` with `Re s ∈ 𝒟`.
    pub fn value_complex(&self, s: &[Complex64]) -> Result<Complex64> {
        let sv = self.s_complex(s);
        let re: Vec<f64> = sv.iter().map(|z| z.re).collect();
        self.check_domain(&re)?;
        let mut total = Complex64::new(0.0, 0.0);
        for (r, z) in self.rows.iter().zip(&sv) {
            total += specfun::log_gamma(*z)? * r.a;
            if r.b != 0.0 {
                total += specfun::log_gamma(z + 0.5)? * r.b;
            }
        }
        Ok(total)
    }

    /// `F_y(σ) = α(σ) - y·σ`.
    pub fn objective(&self, sigma: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.value(sigma)? - dot(y, sigma))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Serialize)]
pub struct SaddleResult {
    pub sigma: Vec<f64>,
    /// `F_y(σ)`, which equals `α†(y)`.
    pub objective: f64,
    pub alpha: f64,
    pub residual: f64,
    #[serde(skip)]
    pub hessian: DMatrix<f64>,
    pub iterations: usize,
}

/// Default start `(Ψ⁻¹(y_1/n) + r_2/(2n), 0, ..., 0)`.
pub fn default_start(sum: &GammaSum, y: &[f64]) -> Result<Vec<f64>> {
    let n = sum.n();
    let mut start = vec![0.0; sum.k()];
    let s1 = specfun::digamma_inverse(y[0] / n)? + sum.r2() / (2.0 * n);
    start[0] = s1.max(1e-3);
    Ok(start)
}

/// Unique critical point of `F_y` over `𝒟` by damped Newton with a
/// fraction-to-boundary rule and Armijo backtracking.
pub fn solve_saddle(sum: &GammaSum, y: &[f64], start: Option<&[f64]>) -> Result<SaddleResult> {
    let k = sum.k();
    if y.len() != k || y.iter().any(|v| !v.is_finite()) {
        return Err(SaddleError::Input("y must be a finite k-vector".into()));
    }
    let mut sigma = match start {
        Some(s) => {
            if s.len() != k || !sum.in_domain(s) {
                return Err(SaddleError::Input("start point outside the domain".into()));
            }
            s.to_vec()
        }
        None => default_start(sum, y)?,
    };
    let mut best = (f64::INFINITY, sigma.clone());
    for iter in 0..MAX_ITER {
        let ev = sum.eval(&sigma, true)?;
        let g: Vec<f64> = ev.gradient.iter().zip(y).map(|(a, b)| a - b).collect();
        let res = sup_norm(&g);
        if res < best.0 {
            best = (res, sigma.clone());
        }
        let hess = ev.hessian.unwrap();
        if res < RESIDUAL_TOL {
            return Ok(SaddleResult {
                objective: ev.value - dot(y, &sigma),
                alpha: ev.value,
                sigma,
                residual: res,
                hessian: hess,
                iterations: iter,
            });
        }
        let gv = DVector::from_vec(g.clone());
        let p: DVector<f64> = match hess.clone().cholesky() {
            Some(ch) => -ch.solve(&gv),
            None => -gv.clone(),
        };
        let decrement = -gv.dot(&p);
        let s = sum.s_real(&sigma);
        let ds = sum.s_real(p.as_slice());
        let mut t_max = f64::INFINITY;
        for (x, d) in s.iter().zip(&ds) {
            if *d < 0.0 {
                t_max = t_max.min(-x / d);
            }
        }
        let mut t = if t_max.is_finite() { (BOUNDARY_FRACTION * t_max).min(1.0) } else { 1.0 };
        let f0 = ev.value - dot(y, &sigma);
        let slack = 1e-14 * f0.abs().max(1.0);
        let mut accepted = None;
        for _ in 0..80 {
            let cand: Vec<f64> = sigma.iter().zip(p.iter()).map(|(a, b)| a + t * b).collect();
            if sum.in_domain(&cand) {
                if t == 1.0 && decrement < 1e-8 {
                    // quadratic convergence region; F differences are at rounding level
                    accepted = Some(cand);
                    break;
                }
                if let Ok(f1) = sum.objective(&cand, y) {
                    if f1 <= f0 - ARMIJO * t * decrement + slack {
                        accepted = Some(cand);
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some(c) => sigma = c,
            None => {
                return Err(SaddleError::MaxIterations { best: best.1, residual: best.0, iterations: iter });
            }
        }
    }
    Err(SaddleError::MaxIterations { best: best.1, residual: best.0, iterations: MAX_ITER })
}

/// The three critical-point inequalities for a problem solved at `Y = n y`
/// with `y_1 >= t0`.
///
/// Records: the lower bound on `σ_1`, the lower bound on `α(σ)`, and per row
/// `u` either `S_u >= 2/5` or `S_u >= 1/den >= 1/den_log` with both
/// denominators positive.
pub fn saddle_bounds(sum: &GammaSum, big_y: &[f64], result: &SaddleResult, t0: f64) -> Result<Vec<CheckRecord>> {
    let n = sum.n();
    let r2 = sum.r2();
    let sigma1 = result.sigma[0];
    let scale = 1e-9 * sigma1.abs().max(1.0);
    let mut out = Vec::new();
    let y1_big = big_y[0];
    let lower = specfun::digamma_inverse(y1_big / n)? - r2 / (2.0 * n);
    out.push(CheckRecord::at_most("sigma1_lower_bound", json!({"n": n, "r2": r2, "y1": y1_big}), lower - scale, sigma1));
    let alpha_lower = n * specfun::log_gamma_real(sigma1 + r2 / (2.0 * n))?;
    let aslack = 1e-12 * result.alpha.abs().max(alpha_lower.abs()).max(1.0);
    out.push(CheckRecord::at_most("alpha_lower_bound", json!({"n": n, "sigma1": sigma1}), alpha_lower - aslack, result.alpha));
    if n >= 2.0 {
        let y1 = y1_big / n;
        if y1 < t0 {
            return Err(SaddleError::Input(format!("y1 = {y1} below t0 = {t0}")));
        }
        let den = (n - 1.0) * specfun::digamma(n * sigma1 / (n - 1.0) + 0.5)? - n * t0;
        let den_log = (n - 1.0) * (2.0 * sigma1 + 0.5).ln() - n * t0;
        for (u, su) in sum.s_real(&result.sigma).into_iter().enumerate() {
            let params = json!({"row": u, "S_u": su, "den": den, "den_log": den_log});
            if su >= 0.4 {
                out.push(CheckRecord::at_most("place_lower_bound", params, 0.4, su));
            } else if den <= 0.0 || den_log <= 0.0 {
                out.push(CheckRecord::at_most("place_lower_bound", params, f64::INFINITY, su));
            } else {
                let slack = 1e-9 * su;
                out.push(CheckRecord::at_most("place_lower_bound", params.clone(), 1.0 / den - slack, su));
                out.push(CheckRecord::at_most("place_lower_bound_log", params, 1.0 / den_log - slack, 1.0 / den));
            }
        }
    }
    Ok(out)
}

/// `y_{a,t}`: `y_j = δ_{j1} log t + (2/n) Σ_v e_v q_{jv} log|a|_v`; `a = None`
/// stands for the element 1.
pub fn y_at(field: &NumberField, geom: &SubgroupGeometry, a: Option<&FieldElement>, t: f64) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(SaddleError::Input(format!("t = {t} must be positive")));
    }
    let mut y = vec![0.0; geom.k()];
    y[0] = t.ln();
    if let Some(a) = a {
        let logs = field.log_embed(a, LogFlavor::Plain).map_err(|e| SaddleError::Input(e.to_string()))?;
        let n = geom.degree() as f64;
        for (j, yj) in y.iter_mut().enumerate() {
            *yj += (2.0 / n)
                * geom.kinds().iter().enumerate().map(|(v, kind)| kind.weight() * geom.q()[(v, j)] * logs[v]).sum::<f64>();
        }
    }
    Ok(y)
}

/// Lower bound `s_min(S)/√N` for the constant `C` with
/// `max_v |S_v(σ)| >= C ‖σ‖`.
pub fn steepness_constant(sum: &GammaSum) -> f64 {
    let q = sum.q_matrix();
    q.singular_values().min() / (q.nrows() as f64).sqrt()
}

/// Whether `α(R u)/R` increases along the ray through `u ∈ 𝒟` at the
/// log-spaced radii `R ∈ [10², 10⁴]`.
pub fn steep_along_ray(sum: &GammaSum, u: &[f64], points: usize) -> Result<bool> {
    let norm = dot(u, u).sqrt();
    let dir: Vec<f64> = u.iter().map(|x| x / norm).collect();
    let mut prev = f64::NEG_INFINITY;
    for i in 0..points {
        let r = 10f64.powf(2.0 + 2.0 * i as f64 / (points - 1) as f64);
        let p: Vec<f64> = dir.iter().map(|x| r * x).collect();
        let ratio = sum.value(&p)? / r;
        if ratio <= prev {
            return Ok(false);
        }
        prev = ratio;
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::IntPolynomial;
    use crate::specfun::{digamma, log_gamma_real};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field(c: &[i64]) -> NumberField {
        NumberField::new(IntPolynomial::from_i64(c).unwrap()).unwrap()
    }

    /// Random synthetic per-place geometry with `k` columns.
    pub(crate) fn random_geometry(rng: &mut ChaCha8Rng, k: usize) -> SubgroupGeometry {
        loop {
            let r1 = rng.gen_range(0..5usize);
            let r2 = rng.gen_range(0..3usize);
            let n_places = r1 + r2;
            if n_places < k.max(1) {
                continue;
            }
            let mut kinds = vec![PlaceKind::Real; r1];
            kinds.extend(vec![PlaceKind::Complex; r2]);
            let w: Vec<f64> = kinds.iter().map(|k| k.weight()).collect();
            let mut cols: Vec<DVector<f64>> = vec![DVector::from_element(n_places, 1.0)];
            while cols.len() < k {
                let mut v = DVector::from_fn(n_places, |_, _| rng.gen_range(-1.0..1.0));
                for c in &cols {
                    let ip: f64 = (0..n_places).map(|i| w[i] * c[i] * v[i]).sum();
                    let cc: f64 = (0..n_places).map(|i| w[i] * c[i] * c[i]).sum();
                    v -= c * (ip / cc);
                }
                let len: f64 = (0..n_places).map(|i| w[i] * v[i] * v[i]).sum::<f64>().sqrt();
                if len < 1e-3 {
                    continue;
                }
                cols.push(v / len);
            }
            return SubgroupGeometry::from_parts(kinds, DMatrix::from_columns(&cols)).unwrap();
        }
    }

    #[test]
    fn alpha_k1_totally_real() {
        let f = field(&[1, -2, -1, 1]);
        let units = [FieldElement::from_i64(&[0, 1, 0]), FieldElement::from_i64(&[-1, 1, 0])];
        let g = SubgroupGeometry::from_units(&f, &units).unwrap();
        let sum = GammaSum::per_place(&g);
        let ev = sum.eval(&[1.7], true).unwrap();
        assert!((ev.value - 3.0 * log_gamma_real(1.7).unwrap()).abs() < 1e-13);
        assert!((ev.gradient[0] - 3.0 * digamma(1.7).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn alpha_k1_with_complex_places() {
        let f = field(&[1, -1, 0, 0, 0, 1]);
        let units = [FieldElement::from_i64(&[0, 1, 0, 0, 0]), FieldElement::from_i64(&[1, 1, 0, 0, 0])];
        let g = SubgroupGeometry::from_units(&f, &units).unwrap();
        let sum = GammaSum::per_place(&g);
        let x = 0.9;
        let want = 3.0 * log_gamma_real(x).unwrap() + 2.0 * log_gamma_real(x + 0.5).unwrap();
        assert!((sum.value(&[x]).unwrap() - want).abs() < 1e-13);
        assert_eq!(sum.n(), 5.0);
        assert_eq!(sum.r2(), 2.0);
        assert!(matches!(sum.value(&[-0.1]), Err(SaddleError::OutsideDomain(_))));
    }

    #[test]
    fn fiber_and_place_forms_agree() {
        let kinds = vec![PlaceKind::Real, PlaceKind::Real, PlaceKind::Complex, PlaceKind::Real, PlaceKind::Complex];
        // q2 constant on fibers {0,1,2}, {3,4}; weighted sums: 4a + 3b = 0
        let q = DMatrix::from_row_slice(5, 2, &[1.0, 3.0, 1.0, 3.0, 1.0, 3.0, 1.0, -4.0, 1.0, -4.0]);
        let g = SubgroupGeometry::from_parts(kinds, q).unwrap().with_fibers(&[vec![0, 1, 2], vec![3, 4]], None).unwrap();
        let place = GammaSum::per_place(&g);
        let fiber = GammaSum::per_fiber(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let s = [
                Complex64::new(rng.gen_range(0.5..3.0), rng.gen_range(-5.0..5.0)),
                Complex64::new(rng.gen_range(-0.1..0.1), rng.gen_range(-1.0..1.0)),
            ];
            let re = [s[0].re, s[1].re];
            if !place.in_domain(&re) {
                continue;
            }
            let a = place.value_complex(&s).unwrap();
            let b = fiber.value_complex(&s).unwrap();
            assert!((a - b).norm() < 1e-10 * a.norm().max(1.0));
            let ea = place.eval(&re, true).unwrap();
            let eb = fiber.eval(&re, true).unwrap();
            assert!((ea.value - eb.value).abs() < 1e-10);
            assert!((ea.hessian.unwrap() - eb.hessian.unwrap()).norm() < 1e-9);
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let k = rng.gen_range(1..4);
            let g = random_geometry(&mut rng, k);
            let sum = GammaSum::per_place(&g);
            let mut sigma: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.3..0.3)).collect();
            sigma[0] = rng.gen_range(1.0..4.0);
            if sum.s_real(&sigma).iter().any(|&x| x < 0.2) {
                continue;
            }
            let ev = sum.eval(&sigma, true).unwrap();
            let h = ev.hessian.unwrap();
            let step = 1e-5;
            for j in 0..k {
                let mut up = sigma.clone();
                let mut dn = sigma.clone();
                up[j] += step;
                dn[j] -= step;
                let fu = sum.value(&up).unwrap();
                let fd = sum.value(&dn).unwrap();
                let num_grad = (fu - fd) / (2.0 * step);
                assert!((num_grad - ev.gradient[j]).abs() < 1e-5 * ev.gradient[j].abs().max(1.0));
                let gu = sum.eval(&up, false).unwrap().gradient;
                let gd = sum.eval(&dn, false).unwrap().gradient;
                for i in 0..k {
                    let num = (gu[i] - gd[i]) / (2.0 * step);
                    assert!((num - h[(i, j)]).abs() < 1e-5 * h[(i, j)].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn k1_closed_form_saddle() {
        let f = field(&[1, -2, -1, 1]);
        let units = [FieldElement::from_i64(&[0, 1, 0]), FieldElement::from_i64(&[-1, 1, 0])];
        let g = SubgroupGeometry::from_units(&f, &units).unwrap();
        let sum = GammaSum::per_place(&g);
        let y = [3.0 * digamma(2.0).unwrap()];
        let res = solve_saddle(&sum, &y, None).unwrap();
        assert!((res.sigma[0] - 2.0).abs() < 1e-10);
        let checks = saddle_bounds(&sum, &y, &res, y[0] / 3.0).unwrap();
        assert!(checks.iter().all(|c| c.pass));
        // equality in the first two
        assert!(checks[0].margin.abs() < 1e-8);
        assert!(checks[1].margin.abs() < 1e-8);
    }

    #[test]
    fn quintic_saddle_by_bisection() {
        let f = field(&[1, -1, 0, 0, 0, 1]);
        let units = [FieldElement::from_i64(&[0, 1, 0, 0, 0]), FieldElement::from_i64(&[1, 1, 0, 0, 0])];
        let g = SubgroupGeometry::from_units(&f, &units).unwrap();
        let sum = GammaSum::per_place(&g);
        let target = 5.0 * digamma(1.0).unwrap();
        let h = |x: f64| 3.0 * digamma(x).unwrap() + 2.0 * digamma(x + 0.5).unwrap() - target;
        let (mut lo, mut hi) = (1e-3, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let res = solve_saddle(&sum, &[target], None).unwrap();
        assert!((res.sigma[0] - 0.5 * (lo + hi)).abs() < 1e-10);
        assert!(res.residual < RESIDUAL_TOL);
    }

    #[test]
    fn synthetic_k2_independent_of_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut done = 0;
        while done < 30 {
            let g = random_geometry(&mut rng, 2);
            let sum = GammaSum::per_place(&g);
            let y: Vec<f64> = vec![rng.gen_range(-6.0..10.0), rng.gen_range(-3.0..3.0)];
            let a = solve_saddle(&sum, &y, None).unwrap();
            assert!(a.residual < RESIDUAL_TOL);
            let start = [a.sigma[0] * 3.0 + 1.0, 0.0];
            let b = solve_saddle(&sum, &y, Some(&start)).unwrap();
            for (x, z) in a.sigma.iter().zip(&b.sigma) {
                assert!((x - z).abs() < 1e-8);
            }
            done += 1;
        }
    }

    #[test]
    fn minimum_and_convexity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let sample = |rng: &mut ChaCha8Rng, sum: &GammaSum| loop {
            let mut s: Vec<f64> = (0..sum.k()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            s[0] = rng.gen_range(0.05..5.0);
            if sum.in_domain(&s) {
                return s;
            }
        };
        for _ in 0..10 {
            let k = rng.gen_range(1..5);
            let g = random_geometry(&mut rng, k);
            let sum = GammaSum::per_place(&g);
            let y: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let res = solve_saddle(&sum, &y, None).unwrap();
            for _ in 0..100 {
                let tau = sample(&mut rng, &sum);
                assert!(res.objective <= sum.objective(&tau, &y).unwrap() + 1e-12);
                let tau2 = sample(&mut rng, &sum);
                let t: f64 = rng.gen_range(0.0..1.0);
                let mid: Vec<f64> = tau.iter().zip(&tau2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
                let lhs = sum.objective(&mid, &y).unwrap();
                let rhs = t * sum.objective(&tau, &y).unwrap() + (1.0 - t) * sum.objective(&tau2, &y).unwrap();
                assert!(lhs <= rhs + 1e-12 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn steepness_diagnostics() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..50 {
            let k = rng.gen_range(1..4);
            let g = random_geometry(&mut rng, k);
            let sum = GammaSum::per_place(&g);
            assert!(steepness_constant(&sum) > 0.0);
            let u = loop {
                let mut u: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
                u[0] = rng.gen_range(0.1..1.0);
                if sum.in_domain(&u) {
                    break u;
                }
            };
            assert!(steep_along_ray(&sum, &u, 20).unwrap());
            // ‖S(σ)‖∞ >= C ‖σ‖
            let c = steepness_constant(&sum);
            let s = sum.s_real(&u);
            let norm = dot(&u, &u).sqrt();
            assert!(sup_norm(&s) >= c * norm * (1.0 - 1e-12));
        }
    }

    #[test]
    fn y_at_examples() {
        let f = field(&[-2, 0, 1]);
        let unit = FieldElement::from_i64(&[1, 1]);
        let g = SubgroupGeometry::from_units(&f, &[unit.clone()]).unwrap();
        let y = y_at(&f, &g, None, std::f64::consts::E).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-15);
        let y = y_at(&f, &g, Some(&unit), 1.0).unwrap();
        assert!(y[0].abs() < 1e-14);
        let x = 0.51 + 0.0;
        let t = digamma(x).unwrap().exp();
        assert!((y_at(&f, &g, None, t).unwrap()[0] - digamma(x).unwrap()).abs() < 1e-14);
        assert!(y_at(&f, &g, None, 0.0).is_err());
        // y_1 = log t + (2/n) log |Norm a| for a = 3
        let three = FieldElement::from_i64(&[3, 0]);
        let y = y_at(&f, &g, Some(&three), 2.0).unwrap();
        assert!((y[0] - (2f64.ln() + 9f64.ln())).abs() < 1e-13);
    }
}
