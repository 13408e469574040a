//! Saddle-point asymptotics of the contour integrals `∫ e^{α(σ+iT) - ny·(σ+iT)} dT`:
//! the Gaussian main term, explicit bounds for the error pieces, the
//! one-dimensional Γ-line estimates they rest on, the theta-kernel `ψ`
//! computed three ways, and the resulting lower bound for the covolume.
//!
//! Quantities that can overflow (`I_1` at `m = 4000`, the integrals on a
//! Γ-line) are carried as logarithms or divided by the integrand's peak.

use crate::numfield::NumberField;
use crate::quad::{self, QuadError, Tolerance};
use crate::report::CheckRecord;
use crate::saddle::{self, GammaSum, SaddleError};
use crate::specfun::{self, alpha_kappa, alpha_kappa_real, PlaceKind, SpecfunError};
use crate::subgeom::{cauchy_binet_det, SubgroupGeometry};
use crate::unitlat::LogLattice;
use crate::util::{binomial, combinations};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use std::cell::RefCell;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AsymptoticsError {
    #[error("point outside the domain")]
    OutsideDomain,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("degenerate quadratic form (𝔇 = {0})")]
    DegenerateForm(f64),
    #[error("matrix is rank deficient")]
    RankDeficient,
    #[error("dimension {0} too large for direct quadrature")]
    RankTooLarge(usize),
    #[error("geometry has no fiber data")]
    MissingFiberData,
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Saddle(#[from] SaddleError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

pub type Result<T> = std::result::Result<T, AsymptoticsError>;

/// Fiber data `(m_w, κ_w)`, the matrix `𝒬`, and the scale `m = [L:K]`.
#[derive(Debug, Clone, Serialize)]
pub struct PlaceDataSet {
    pub m: Vec<usize>,
    pub kappa: Vec<f64>,
    #[serde(skip)]
    pub qcal: DMatrix<f64>,
    pub m_scale: f64,
}

impl PlaceDataSet {
    /// `m_scale` defaults to `min_w m_w`.
    pub fn new(m: Vec<usize>, kappa: Vec<f64>, qcal: DMatrix<f64>, m_scale: Option<f64>) -> Result<Self> {
        if m.len() != kappa.len() || m.len() != qcal.nrows() || m.is_empty() {
            return Err(AsymptoticsError::Input("fiber data lengths differ".into()));
        }
        if m.iter().any(|&x| x == 0) {
            return Err(AsymptoticsError::Input("m_w must be at least 1".into()));
        }
        if kappa.iter().any(|k| !(0.5..=1.0).contains(k)) {
            return Err(AsymptoticsError::Input("κ_w must lie in [1/2, 1]".into()));
        }
        if qcal.ncols() == 0 || qcal.column(0).iter().any(|&x| x != 1.0) {
            return Err(AsymptoticsError::Input("first column of 𝒬 must be all ones".into()));
        }
        let sv = qcal.singular_values();
        if qcal.ncols() > qcal.nrows() || sv.min() <= 1e-12 * sv.max() {
            return Err(AsymptoticsError::RankDeficient);
        }
        let m_scale = m_scale.unwrap_or_else(|| *m.iter().min().unwrap() as f64);
        Ok(PlaceDataSet { m, kappa, qcal, m_scale })
    }

    /// `k = 1`, one fiber.
    pub fn single(m: usize, kappa: f64) -> Result<Self> {
        PlaceDataSet::new(vec![m], vec![kappa], DMatrix::from_element(1, 1, 1.0), None)
    }

    pub fn from_geometry(geom: &SubgroupGeometry) -> Result<Self> {
        let f = geom.fibers().ok_or(AsymptoticsError::MissingFiberData)?;
        PlaceDataSet::new(f.m.clone(), f.kappa.clone(), f.qcal.clone(), Some(f.relative_degree()))
    }

    pub fn k(&self) -> usize {
        self.qcal.ncols()
    }

    pub fn num_fibers(&self) -> usize {
        self.m.len()
    }

    pub fn n(&self) -> f64 {
        self.m.iter().sum::<usize>() as f64
    }

    pub fn gamma_sum(&self) -> GammaSum {
        let m: Vec<f64> = self.m.iter().map(|&x| x as f64).collect();
        GammaSum::from_fibers(&m, &self.kappa, &self.qcal).expect("validated fiber data")
    }

    pub fn s_w(&self, t: &[f64]) -> Vec<f64> {
        (0..self.num_fibers()).map(|w| (0..self.k()).map(|j| self.qcal[(w, j)] * t[j]).sum()).collect()
    }

    /// `m_w α''_{κ_w}(S_w(σ))` per fiber.
    pub fn hessian_weights(&self, sigma: &[f64]) -> Result<Vec<f64>> {
        let s = self.s_w(sigma);
        if s.iter().any(|&x| !(x > 0.0)) {
            return Err(AsymptoticsError::OutsideDomain);
        }
        s.iter()
            .zip(&self.m)
            .zip(&self.kappa)
            .map(|((x, m), k)| Ok(*m as f64 * alpha_kappa_real(*x, *k, 2)?))
            .collect()
    }

    /// `|A_K^{[k]}|`.
    pub fn subset_count(&self) -> f64 {
        binomial(self.num_fibers(), self.k())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DetH {
    pub direct: f64,
    pub cauchy_binet: f64,
}

/// `det H(σ)` as a `k×k` determinant and as a Cauchy–Binet sum.
pub fn det_h(pd: &PlaceDataSet, sigma: &[f64]) -> Result<DetH> {
    let c = pd.hessian_weights(sigma)?;
    Ok(DetH { direct: assembled_det(&pd.qcal, &c), cauchy_binet: cauchy_binet_det(&pd.qcal, &c) })
}

/// `det(𝒬ᵀ diag(c) 𝒬)` by assembling the k×k matrix and eliminating in exact
/// rational arithmetic on the floating inputs, so near-degenerate `𝒬` loses nothing
/// to cancellation.
fn assembled_det(qcal: &DMatrix<f64>, c: &[f64]) -> f64 {
    use num_rational::BigRational;
    use num_traits::{ToPrimitive, Zero};
    let exact = |x: f64| BigRational::from_float(x).unwrap_or_else(BigRational::zero);
    let k = qcal.ncols();
    let q: Vec<Vec<BigRational>> = (0..qcal.nrows()).map(|w| (0..k).map(|j| exact(qcal[(w, j)])).collect()).collect();
    let cw: Vec<BigRational> = c.iter().map(|&x| exact(x)).collect();
    let mut h: Vec<Vec<BigRational>> = (0..k)
        .map(|i| (0..k).map(|j| q.iter().zip(&cw).map(|(row, cv)| cv * &row[i] * &row[j]).sum()).collect())
        .collect();
    let mut det = BigRational::from_integer(1.into());
    for col in 0..k {
        let Some(p) = (col..k).find(|&r| !h[r][col].is_zero()) else { return 0.0 };
        if p != col {
            h.swap(p, col);
            det = -det;
        }
        let pivot = h[col][col].clone();
        det *= &pivot;
        for r in col + 1..k {
            let f = &h[r][col] / &pivot;
            for j in col..k {
                let v = &f * &h[col][j];
                h[r][j] -= v;
            }
        }
    }
    det.to_f64().unwrap_or(f64::NAN)
}

/// The `k`-subset maximizing `det²(𝒬_η) Π_{w∈η} c_w`.
pub fn eta0(qcal: &DMatrix<f64>, c: &[f64]) -> Vec<usize> {
    let k = qcal.ncols();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for eta in combinations(qcal.nrows(), k) {
        let sub = DMatrix::from_fn(k, k, |r, col| qcal[(eta[r], col)]);
        let d = sub.determinant();
        let val = d * d * eta.iter().map(|&w| c[w]).product::<f64>();
        if val > best.0 {
            best = (val, eta);
        }
    }
    best.1
}

#[derive(Debug, Clone, Serialize)]
pub struct MainTerm {
    pub sigma: Vec<f64>,
    pub big_y: Vec<f64>,
    pub alpha: f64,
    /// `α(σ) - ny·σ`
    pub log_peak: f64,
    pub det_h: DetH,
    pub log_i1: f64,
    pub i1: f64,
    pub residual: f64,
}

/// `I_1(ny) = (2π)^{k/2} e^{α(σ) - ny·σ} / √det H(σ)` with `σ = σ(ny)`.
pub fn main_term_i1(pd: &PlaceDataSet, y: &[f64]) -> Result<MainTerm> {
    let n = pd.n();
    let big_y: Vec<f64> = y.iter().map(|v| n * v).collect();
    let sum = pd.gamma_sum();
    let res = saddle::solve_saddle(&sum, &big_y, None)?;
    let dh = det_h(pd, &res.sigma)?;
    let log_peak = res.objective;
    let k = pd.k() as f64;
    let log_i1 = 0.5 * k * (2.0 * PI).ln() + log_peak - 0.5 * dh.cauchy_binet.ln();
    Ok(MainTerm {
        sigma: res.sigma,
        big_y,
        alpha: res.alpha,
        log_peak,
        det_h: dh,
        log_i1,
        i1: log_i1.exp(),
        residual: res.residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Moment {
    Zero,
    Fourth(usize),
    Sixth(usize),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentValue {
    pub exact: f64,
    pub upper: f64,
}

/// Closed forms for `∫ S_{w0}(T)^{2j} exp(-½ Σ b_w S_w(T)²) dT`, `j = 0, 2, 3`,
/// with their `𝔇^{-1/2}` upper bounds.
pub fn gaussian_moments(b: &[f64], qcal: &DMatrix<f64>, moment: Moment) -> Result<MomentValue> {
    if b.len() != qcal.nrows() || b.iter().any(|&x| !(x > 0.0)) {
        return Err(AsymptoticsError::Input("b_w must be positive, one per row".into()));
    }
    let k = qcal.ncols();
    let mut total = 0.0;
    let mut parts = Vec::new();
    for eta in combinations(qcal.nrows(), k) {
        let sub = DMatrix::from_fn(k, k, |r, col| qcal[(eta[r], col)]);
        let d = sub.determinant();
        let de = d * d * eta.iter().map(|&w| b[w]).product::<f64>();
        total += de;
        parts.push((eta, de));
    }
    if !(total > 0.0) {
        return Err(AsymptoticsError::DegenerateForm(total));
    }
    let base = (2.0 * PI).powf(k as f64 / 2.0);
    let containing = |w0: usize| -> f64 { parts.iter().filter(|(e, _)| e.contains(&w0)).map(|(_, d)| d).sum() };
    let check_row = |w0: usize| {
        if w0 >= b.len() {
            Err(AsymptoticsError::Input(format!("row {w0} out of range")))
        } else {
            Ok(())
        }
    };
    Ok(match moment {
        Moment::Zero => {
            let v = base / total.sqrt();
            MomentValue { exact: v, upper: v }
        }
        Moment::Fourth(w0) => {
            check_row(w0)?;
            let s = containing(w0);
            MomentValue {
                exact: 3.0 * base * total.powf(-2.5) * b[w0].powi(-2) * s * s,
                upper: 3.0 * base * total.powf(-0.5) * b[w0].powi(-2),
            }
        }
        Moment::Sixth(w0) => {
            check_row(w0)?;
            let s = containing(w0);
            MomentValue {
                exact: 15.0 * base * total.powf(-3.5) * b[w0].powi(-3) * s * s * s,
                upper: 15.0 * base * total.powf(-0.5) * b[w0].powi(-3),
            }
        }
    })
}

fn check_scale_preconditions(pd: &PlaceDataSet) -> Result<f64> {
    let m = pd.m_scale;
    if m < 1000.0 {
        return Err(AsymptoticsError::PreconditionViolated(format!("m = {m} < 1000")));
    }
    for &mw in &pd.m {
        let mw = mw as f64;
        if mw < m * (1.0 - 1e-12) || mw > 2.0 * m * (1.0 + 1e-12) {
            return Err(AsymptoticsError::PreconditionViolated(format!("m_w = {mw} outside [m, 2m] for m = {m}")));
        }
    }
    Ok(m)
}

/// Error pieces `I_2` and `I_3` as multiples of `I_1`.
#[derive(Debug, Clone, Serialize)]
pub struct TailBounds {
    pub i2_rel: f64,
    pub i3_rel: f64,
    pub eta0: Vec<usize>,
    pub delta_w: Vec<f64>,
}

pub fn tail_bounds_i2_i3(pd: &PlaceDataSet, sigma: &[f64], d: f64) -> Result<TailBounds> {
    let m = check_scale_preconditions(pd)?;
    if !(d > 0.0 && d < m.cbrt() / 2f64.sqrt()) {
        return Err(AsymptoticsError::PreconditionViolated(format!("D = {d} outside (0, m^(1/3)/√2)")));
    }
    for (mw, kw) in pd.m.iter().zip(&pd.kappa) {
        if d > (*mw as f64).cbrt() * kw {
            return Err(AsymptoticsError::PreconditionViolated(format!("D = {d} exceeds m_w^(1/3) κ_w")));
        }
    }
    let c = pd.hessian_weights(sigma)?;
    let e0 = eta0(&pd.qcal, &c);
    let s = pd.s_w(sigma);
    let delta_w = e0
        .iter()
        .map(|&w| Ok(d / ((pd.m[w] as f64).cbrt() * alpha_kappa_real(s[w], pd.kappa[w], 2)?.sqrt())))
        .collect::<Result<Vec<f64>>>()?;
    let k = pd.k() as f64;
    let root = pd.subset_count().sqrt();
    let d6 = d.powi(6);
    Ok(TailBounds {
        i2_rel: 1.0021f64.powf(k - 1.0) * (1e-76 + 41.43 / d6) * k * root / m,
        i3_rel: 3.67 * k * root / (m * d6),
        eta0: e0,
        delta_w,
    })
}

/// `I_4` bound as a multiple of `I_1`, and `Z`.
pub fn inner_bound_i4(pd: &PlaceDataSet, d: f64) -> Result<(f64, f64)> {
    let m = pd.m_scale;
    if !(d > 0.0) || m < 1.0 {
        return Err(AsymptoticsError::PreconditionViolated(format!("D = {d}, m = {m}")));
    }
    let a = pd.num_fibers() as f64;
    let k = pd.k() as f64;
    let x = a * k.powi(4) * d.powi(4) / m.cbrt();
    let z = if x < 1e-8 { 1.0 + 0.5 * x } else { x.exp_m1() / x };
    Ok((a * (5.0 / 3.0 * a + 1.5 * z) / m, z))
}

/// Derivative-term bound as a multiple of `I_1`.
pub fn deriv_term_bound(pd: &PlaceDataSet, sigma1: f64) -> Result<f64> {
    let m = check_scale_preconditions(pd)?;
    let k = pd.k() as f64;
    Ok(1.66 * 1.0021f64.powf(k - 1.0) * k * pd.subset_count().sqrt() / m.sqrt() * sigma1)
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticBreakdown {
    pub main: MainTerm,
    pub d: f64,
    pub tails: TailBounds,
    pub i4_rel: f64,
    pub z: f64,
    pub deriv_rel: f64,
}

pub fn asymptotic_breakdown(pd: &PlaceDataSet, y: &[f64], d: f64) -> Result<AsymptoticBreakdown> {
    let main = main_term_i1(pd, y)?;
    let tails = tail_bounds_i2_i3(pd, &main.sigma, d)?;
    let (i4_rel, z) = inner_bound_i4(pd, d)?;
    let deriv_rel = deriv_term_bound(pd, main.sigma[0])?;
    Ok(AsymptoticBreakdown { main, d, tails, i4_rel, z, deriv_rel })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LineEstimate {
    /// `∫ |e^{mα_κ(r+it)}| dt`
    Estint1,
    /// `∫ |t e^{mα_κ(r+it)}| dt`
    Estint2,
    /// `∫_{|t|>δ} |e^{mα_κ(r+it)}| dt`
    Int1est,
    /// `∫_{|t|>δ} e^{-m α_κ''(r) t²/2} dt`
    Int2est,
}

/// Both sides are divided by `e^{m α_κ(r)}`.
#[derive(Debug, Clone, Serialize)]
pub struct LineCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub quad_error: f64,
    pub pass: bool,
}

/// Computed integral vs the quoted bound on the line `Re z = r`.
pub fn onedim_gamma_line(m: f64, kappa: f64, r: f64, d: f64, which: LineEstimate) -> Result<LineCheck> {
    if m < 1000.0 || !(0.5..=1.0).contains(&kappa) || !(r > 0.0) {
        return Err(AsymptoticsError::PreconditionViolated(format!("m = {m}, κ = {kappa}, r = {r}")));
    }
    let needs_d = matches!(which, LineEstimate::Int1est | LineEstimate::Int2est);
    if needs_d && !(d > 0.0 && d <= m.cbrt() * kappa) {
        return Err(AsymptoticsError::PreconditionViolated(format!("D = {d} outside (0, m^(1/3) κ]")));
    }
    let a0 = alpha_kappa_real(r, kappa, 0)?;
    let a2 = alpha_kappa_real(r, kappa, 2)?;
    let big_a = m * a2;
    let width = 1.0 / big_a.sqrt();
    let gauss = (2.0 * PI).sqrt() / big_a.sqrt();
    let delta = d / (m.cbrt() * a2.sqrt());
    let failure = RefCell::new(None);
    let g = |t: f64| -> f64 {
        match alpha_kappa(Complex64::new(r, t), kappa, 0) {
            Ok(v) => (m * (v.re - a0)).exp(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let mut end = 10.0 * width;
    while g(end) > 1e-18 {
        end *= 2.0;
    }
    let start = if needs_d { delta } else { 0.0 };
    end = end.max(2.0 * start);
    let mut breaks = vec![start];
    let mut x = start + width;
    while x < end {
        breaks.push(x);
        x = start + 2.0 * (x - start);
    }
    breaks.push(end);
    let tol = Tolerance { abs: 1e-300, rel: 1e-11, max_intervals: 4000 };
    let (lhs, err, rhs) = match which {
        LineEstimate::Estint1 => {
            let (v, e) = quad::adaptive_real(g, &breaks, tol)?;
            (2.0 * v, 2.0 * e, 1.0021 * gauss)
        }
        LineEstimate::Estint2 => {
            let (v, e) = quad::adaptive_real(|t| t * g(t), &breaks, tol)?;
            (2.0 * v, 2.0 * e, 0.83 * (2.0 * PI).sqrt() / big_a)
        }
        LineEstimate::Int1est => {
            let (v, e) = quad::adaptive_real(g, &breaks, tol)?;
            (2.0 * v, 2.0 * e, (1e-76 + 41.43 / d.powi(6)) / m * gauss)
        }
        LineEstimate::Int2est => {
            let v = gauss * statrs::function::erf::erfc(delta * (big_a / 2.0).sqrt());
            (v, 0.0, 3.67 / (m * d.powi(6)) * gauss)
        }
    };
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    Ok(LineCheck { lhs, rhs, quad_error: err, pass: lhs + err <= rhs })
}

/// `ρ_w` at centre `a = S_w(σ)` and offset `b = S_w(T)`: the remainder after
/// the degree-2 Taylor polynomial of `t ↦ α_κ(a + i t)`.
pub fn rho_w(a: f64, b: f64, kappa: f64) -> Result<Complex64> {
    if !(a > 0.0) {
        return Err(AsymptoticsError::OutsideDomain);
    }
    if b == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if b.abs() < 0.2 * a {
        return Ok(specfun::alpha_kappa_taylor_tail(a, kappa, Complex64::new(0.0, b), 3)?);
    }
    let z = Complex64::new(a, b);
    let v = alpha_kappa(z, kappa, 0)? - alpha_kappa_real(a, kappa, 0)?;
    let d1 = alpha_kappa_real(a, kappa, 1)?;
    let d2 = alpha_kappa_real(a, kappa, 2)?;
    Ok(v - Complex64::new(0.0, d1 * b) + 0.5 * d2 * b * b)
}

fn rho_rounding(a: f64, b: f64, kappa: f64, rho: Complex64) -> Result<f64> {
    let mut slack = 1e-12 * rho.norm() + 1e-300;
    if b.abs() >= 0.2 * a {
        let scale = alpha_kappa(Complex64::new(a, b), kappa, 0)?.norm()
            + alpha_kappa_real(a, kappa, 0)?.abs()
            + (alpha_kappa_real(a, kappa, 1)? * b).abs()
            + alpha_kappa_real(a, kappa, 2)? * b * b;
        slack += 1e-13 * scale;
    }
    Ok(slack)
}

/// The four remainder claims at one `(a, b, κ)`.
#[derive(Debug, Clone, Serialize)]
pub struct RhoClaims {
    pub rho: Complex64,
    pub claim_a: bool,
    pub claim_b: bool,
    pub claim_c: bool,
    /// `None` when `|b| > a`.
    pub claim_d: Option<bool>,
}

pub fn rho_claims(a: f64, b: f64, kappa: f64) -> Result<RhoClaims> {
    let rho = rho_w(a, b, kappa)?;
    let mirror = rho_w(a, -b, kappa)?;
    let slack = rho_rounding(a, b, kappa, rho)?.max(rho_rounding(a, -b, kappa, mirror)?);
    let d2 = alpha_kappa_real(a, kappa, 2)?;
    let d3 = alpha_kappa_real(a, kappa, 3)?;
    let d4 = alpha_kappa_real(a, kappa, 4)?;
    let b2 = b * b;
    let im_bound = -d3 / 6.0 * b.abs().powi(3);
    let claim_a = rho.im.abs() <= im_bound + slack && im_bound <= 2f64.sqrt() / 3.0 * d2.powf(1.5) * b.abs().powi(3) * (1.0 + 1e-12);
    let re_bound = d4 / 24.0 * b2 * b2;
    let claim_b = rho.re.abs() <= re_bound + slack && re_bound <= 0.5 * d2 * d2 * b2 * b2 * (1.0 + 1e-12);
    let claim_c = (mirror.im + rho.im).abs() <= 2.0 * slack && (mirror.re - rho.re).abs() <= 2.0 * slack;
    let claim_d = if b.abs() <= a { Some(rho.re >= -slack && rho.re <= d2 / 4.0 * b2 + slack) } else { None };
    Ok(RhoClaims { rho, claim_a, claim_b, claim_c, claim_d })
}

/// Per-fiber `ρ_w(T)` and `ρ(T) = Σ m_w ρ_w(T)`.
pub fn rho_remainder(pd: &PlaceDataSet, sigma: &[f64], t: &[f64]) -> Result<(Vec<Complex64>, Complex64)> {
    let a = pd.s_w(sigma);
    let b = pd.s_w(t);
    let per: Vec<Complex64> =
        (0..pd.num_fibers()).map(|w| rho_w(a[w], b[w], pd.kappa[w])).collect::<Result<_>>()?;
    let total = per.iter().zip(&pd.m).map(|(r, m)| r * *m as f64).sum();
    Ok((per, total))
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxMinorReport {
    pub eta0: Vec<usize>,
    /// Largest `a_i |P_i(T)| / Σ_{j∈η₀} a_j |P_j(T)|` seen.
    pub worst_ratio: f64,
    pub pass: bool,
}

/// Checks `a_i |P_i(T)| <= Σ_{j∈η₀} a_j |P_j(T)|` over rows and samples.
pub fn max_minor_property(mat: &DMatrix<f64>, a: &[f64], samples: &[Vec<f64>]) -> Result<MaxMinorReport> {
    let k = mat.ncols();
    if a.len() != mat.nrows() || a.iter().any(|&x| !(x > 0.0)) {
        return Err(AsymptoticsError::Input("need one positive weight per row".into()));
    }
    let sv = mat.singular_values();
    if k > mat.nrows() || sv.min() <= 1e-12 * sv.max() {
        return Err(AsymptoticsError::RankDeficient);
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for eta in combinations(mat.nrows(), k) {
        let sub = DMatrix::from_fn(k, k, |r, c| mat[(eta[r], c)]);
        let e = sub.determinant().abs() * eta.iter().map(|&i| a[i]).product::<f64>();
        if e > best.0 {
            best = (e, eta);
        }
    }
    let e0 = best.1;
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for t in samples {
        let p: Vec<f64> = (0..mat.nrows()).map(|i| a[i] * (0..k).map(|j| mat[(i, j)] * t[j]).sum::<f64>().abs()).collect();
        let rhs: f64 = e0.iter().map(|&j| p[j]).sum();
        for &pi in &p {
            if pi > rhs * (1.0 + 1e-12) + 1e-300 {
                pass = false;
            }
            if rhs > 0.0 {
                worst = worst.max(pi / rhs);
            }
        }
    }
    Ok(MaxMinorReport { eta0: e0, worst_ratio: worst, pass })
}

/// A contour integral `e^{log_scale} · value`.
#[derive(Debug, Clone, Serialize)]
pub struct ContourValue {
    pub log_scale: f64,
    pub value: Complex64,
    pub quad_error: f64,
    /// Largest `|integrand|` on the box boundary times the box volume.
    pub tail_estimate: f64,
    pub half_widths: Vec<f64>,
}

impl ContourValue {
    pub fn scaled(&self) -> f64 {
        self.value.re * self.log_scale.exp()
    }
}

/// `∫_{R^k} exp(f(T)) dT` for `k <= 2`, where `f(0) = 0` is the peak and
/// `scales` are Gaussian widths per coordinate.
fn peak_integral(k: usize, f: &dyn Fn(&[f64]) -> Result<Complex64>, scales: &[f64]) -> Result<(Complex64, f64, f64, Vec<f64>)> {
    if k > 2 {
        return Err(AsymptoticsError::RankTooLarge(k));
    }
    let failure = RefCell::new(None);
    let g = |t: &[f64]| -> Complex64 {
        match f(t) {
            Ok(v) => v.exp(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let mut half: Vec<f64> = scales.iter().map(|s| 8.0 * s).collect();
    let boundary_max = |half: &[f64]| -> f64 {
        let mut worst: f64 = 0.0;
        if k == 1 {
            worst = g(&[half[0]]).norm().max(g(&[-half[0]]).norm());
        } else {
            let pts = 48;
            for i in 0..=pts {
                let u = -1.0 + 2.0 * i as f64 / pts as f64;
                for p in [[u * half[0], half[1]], [u * half[0], -half[1]], [half[0], u * half[1]], [-half[0], u * half[1]]] {
                    worst = worst.max(g(&p).norm());
                }
            }
        }
        worst
    };
    let mut edge = boundary_max(&half);
    let mut grow = 0;
    while edge > 1e-16 {
        if grow > 60 {
            return Err(AsymptoticsError::Quadrature(QuadError::NotConverged { value: f64::NAN, error: edge }));
        }
        for h in half.iter_mut() {
            *h *= 1.5;
        }
        edge = boundary_max(&half);
        grow += 1;
    }
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let scale_volume: f64 = scales.iter().product();
    let q = if k == 1 {
        quad::adaptive(|t| g(&[t]), &quad::uniform_breaks(-half[0], half[0], 16), Tolerance::new(1e-15 * scale_volume, 1e-12))?
    } else {
        let bounds: Vec<(f64, f64)> = half.iter().map(|h| (-h, *h)).collect();
        quad::nested(&g, &bounds, 12, Tolerance::new(1e-14 * scale_volume, 1e-10))?
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok((q.value, q.error, edge * volume, half))
}

fn gaussian_scales(hessian: &DMatrix<f64>) -> Result<Vec<f64>> {
    let inv = hessian.clone().try_inverse().ok_or(AsymptoticsError::DegenerateForm(0.0))?;
    Ok((0..hessian.nrows()).map(|j| inv[(j, j)].max(0.0).sqrt()).collect())
}

/// `i^{-k} ∫_{I_σ} e^{α(s) - Y·s} ds` along `Re s = σ`, for `k <= 2`.
pub fn direct_contour(sum: &GammaSum, big_y: &[f64], sigma: &[f64]) -> Result<ContourValue> {
    let k = sum.k();
    if k > 2 {
        return Err(AsymptoticsError::RankTooLarge(k));
    }
    let ev = sum.eval(sigma, true)?;
    let scales = gaussian_scales(ev.hessian.as_ref().unwrap())?;
    let f = |t: &[f64]| -> Result<Complex64> {
        let s: Vec<Complex64> = sigma.iter().zip(t).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let phase: f64 = big_y.iter().zip(t).map(|(y, b)| y * b).sum();
        Ok(sum.value_complex(&s)? - ev.value - Complex64::new(0.0, phase))
    };
    let (value, err, tail, half) = peak_integral(k, &f, &scales)?;
    let log_scale = ev.value - big_y.iter().zip(sigma).map(|(y, s)| y * s).sum::<f64>();
    Ok(ContourValue { log_scale, value, quad_error: err, tail_estimate: tail, half_widths: half })
}

/// Splitting `σ(h)_v = exp(Σ_j q_{jv} log h_j / d_j)`.
pub fn splitting(geom: &SubgroupGeometry, h: &[f64]) -> Vec<f64> {
    let d: Vec<f64> = (0..geom.k()).map(|j| geom.d(j)).collect();
    (0..geom.num_places())
        .map(|v| (0..geom.k()).map(|j| geom.q()[(v, j)] * h[j].ln() / d[j]).sum::<f64>().exp())
        .collect()
}

fn unit_span_basis(geom: &SubgroupGeometry) -> DMatrix<f64> {
    let kinds = geom.kinds();
    let cols: Vec<DVector<f64>> = geom
        .unit_logs()
        .iter()
        .map(|l| DVector::from_iterator(l.len(), l.iter().zip(kinds).map(|(x, k)| x * k.weight())))
        .collect();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for c in cols {
        let mut v = c;
        for _ in 0..2 {
            for b in &basis {
                let p = b.dot(&v);
                v -= b * p;
            }
        }
        let n = v.norm();
        basis.push(v / n);
    }
    if basis.is_empty() {
        DMatrix::zeros(geom.num_places(), 0)
    } else {
        DMatrix::from_columns(&basis)
    }
}

fn check_psi_dims(geom: &SubgroupGeometry) -> Result<()> {
    if geom.unit_rank() > 2 || geom.k() > 2 {
        return Err(AsymptoticsError::RankTooLarge(geom.unit_rank().max(geom.k())));
    }
    if geom.unit_logs().len() != geom.unit_rank() {
        return Err(AsymptoticsError::Input("geometry carries no unit generators".into()));
    }
    Ok(())
}

/// `ψ(h) = ∫_{E_R} exp(-‖σ(h) x‖²) dμ(x)`, with `E_R` parameterized by an
/// orthonormal basis `U` of `LOG(E)`: `x_v = exp((U t)_v / e_v)`.
pub fn psi_direct(geom: &SubgroupGeometry, h: &[f64]) -> Result<f64> {
    check_psi_dims(geom)?;
    let sig = splitting(geom, h);
    let kinds = geom.kinds();
    let u = unit_span_basis(geom);
    let r = u.ncols();
    let phi = |t: &[f64]| -> f64 {
        (0..sig.len())
            .map(|v| {
                let ut: f64 = (0..r).map(|i| u[(v, i)] * t[i]).sum();
                let e = kinds[v].weight();
                e * sig[v] * sig[v] * (2.0 * ut / e).exp()
            })
            .sum()
    };
    if r == 0 {
        return Ok((-phi(&[])).exp());
    }
    let centre = phi(&vec![0.0; r]);
    // relative to the value at t = 0 to keep the integrand O(1)
    let g = |t: &[f64]| Complex64::new((centre - phi(t)).exp(), 0.0);
    let mut half = 1.0;
    loop {
        let mut worst: f64 = 0.0;
        let pts = if r == 1 { 1 } else { 32 };
        for i in 0..=pts {
            let s = if pts == 1 { 1.0 } else { -1.0 + 2.0 * i as f64 / pts as f64 };
            let probes: Vec<Vec<f64>> = if r == 1 {
                vec![vec![half], vec![-half]]
            } else {
                vec![vec![s * half, half], vec![s * half, -half], vec![half, s * half], vec![-half, s * half]]
            };
            for p in probes {
                worst = worst.max(g(&p).re);
            }
        }
        if worst < 1e-18 {
            break;
        }
        half *= 1.5;
        if half > 1e4 {
            return Err(AsymptoticsError::Quadrature(QuadError::NotConverged { value: f64::NAN, error: worst }));
        }
    }
    let bounds = vec![(-half, half); r];
    let tol = if r == 1 { Tolerance::new(1e-300, 1e-12) } else { Tolerance::new(1e-300, 1e-10) };
    let q = quad::nested(&g, &bounds, 16, tol)?;
    Ok(q.value.re * (-centre).exp())
}

/// `log Mψ(s) = ½ log det(QᵀQ) - r_1 log 2 + Σ_v [log Γ(e_v S_v/2) - (e_v S_v/2) log e_v]`.
pub fn mellin_closed_log(geom: &SubgroupGeometry, s: &[Complex64]) -> Result<Complex64> {
    let sv = geom.s_map(s);
    let mut total = Complex64::new(0.5 * geom.det_qtq().ln() - geom.r1() as f64 * 2f64.ln(), 0.0);
    for (z, kind) in sv.iter().zip(geom.kinds()) {
        let e = kind.weight();
        let arg = z * (e / 2.0);
        total += specfun::log_gamma(arg)? - arg * e.ln();
    }
    Ok(total)
}

/// `∫_{H} ψ(h) h^s dh/h` by quadrature over `u = log h`.
pub fn mellin_numeric(geom: &SubgroupGeometry, s: &[f64]) -> Result<f64> {
    check_psi_dims(geom)?;
    let k = geom.k();
    let failure = RefCell::new(None);
    let g = |u: &[f64]| -> Complex64 {
        let h: Vec<f64> = u.iter().map(|x| x.exp()).collect();
        let weight: f64 = s.iter().zip(u).map(|(a, b)| a * b).sum();
        match psi_direct(geom, &h) {
            Ok(v) => Complex64::new(v * weight.exp(), 0.0),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let origin = vec![0.0; k];
    let peak = g(&origin).re.max(1e-300);
    let mut bounds = Vec::new();
    for j in 0..k {
        let mut ends = [0.0f64; 2];
        for (side, dir) in [-1.0f64, 1.0].iter().enumerate() {
            let mut x = 1.0;
            loop {
                let mut p = origin.clone();
                p[j] = dir * x;
                if g(&p).re < 1e-17 * peak || x > 400.0 {
                    break;
                }
                x *= 1.3;
            }
            ends[side] = dir * x;
        }
        bounds.push((ends[0], ends[1]));
    }
    let q = quad::nested(&g, &bounds, 24, Tolerance::new(1e-300, 1e-9))?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(q.value.re)
}

fn psi_saddle(geom: &SubgroupGeometry, h: &[f64]) -> Result<(GammaSum, Vec<f64>, Vec<f64>)> {
    let sum = GammaSum::per_place(geom);
    let y: Vec<f64> = h.iter().map(|x| 2.0 * x.ln()).collect();
    let res = saddle::solve_saddle(&sum, &y, None)?;
    Ok((sum, y, res.sigma))
}

/// `(2π)^{-k} ∫ Mψ(σ' + iT) h^{-σ'-iT} dT` with `σ'` twice the saddle of `α - 2 log h · s`.
pub fn psi_inverse_mellin(geom: &SubgroupGeometry, h: &[f64]) -> Result<f64> {
    check_psi_dims(geom)?;
    let (sum, _, sigma) = psi_saddle(geom, h)?;
    let k = geom.k();
    let sp: Vec<f64> = sigma.iter().map(|x| 2.0 * x).collect();
    let logh: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let s0: Vec<Complex64> = sp.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    let base = mellin_closed_log(geom, &s0)?;
    let log_scale = base.re - sp.iter().zip(&logh).map(|(a, b)| a * b).sum::<f64>();
    let hess = sum.eval(&sigma, true)?.hessian.unwrap();
    let scales: Vec<f64> = gaussian_scales(&hess)?.iter().map(|x| 2.0 * x).collect();
    let f = |t: &[f64]| -> Result<Complex64> {
        let s: Vec<Complex64> = sp.iter().zip(t).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let phase: f64 = t.iter().zip(&logh).map(|(a, b)| a * b).sum();
        Ok(mellin_closed_log(geom, &s)? - base - Complex64::new(0.0, phase))
    };
    let (value, _, _, _) = peak_integral(k, &f, &scales)?;
    Ok(value.re * log_scale.exp() / (2.0 * PI).powi(k as i32))
}

/// `𝓛 = √det(QᵀQ) / (2^{r_1} (2√π)^{r_2} π^k)`.
pub fn theta_prefactor(geom: &SubgroupGeometry) -> f64 {
    geom.det_qtq().sqrt()
        / (2f64.powi(geom.r1() as i32) * (2.0 * PI.sqrt()).powi(geom.r2() as i32) * PI.powi(geom.k() as i32))
}

/// `𝓛 ∫ exp(α(σ+iT) - y·(σ+iT)) dT` with `y = 2 log h`.
pub fn psi_alpha_form(geom: &SubgroupGeometry, h: &[f64]) -> Result<f64> {
    check_psi_dims(geom)?;
    let (sum, y, sigma) = psi_saddle(geom, h)?;
    let c = direct_contour(&sum, &y, &sigma)?;
    Ok(theta_prefactor(geom) * c.scaled())
}

#[derive(Debug, Clone, Serialize)]
pub struct PsiTriple {
    pub h: Vec<f64>,
    pub direct: f64,
    pub inverse_mellin: f64,
    pub alpha_form: f64,
    pub max_rel_diff: f64,
}

pub fn psi_triple(geom: &SubgroupGeometry, h: &[f64]) -> Result<PsiTriple> {
    if h.len() != geom.k() || h.iter().any(|x| !(*x > 0.0)) {
        return Err(AsymptoticsError::Input("h must be a positive k-vector".into()));
    }
    let direct = psi_direct(geom, h)?;
    let inverse_mellin = psi_inverse_mellin(geom, h)?;
    let alpha_form = psi_alpha_form(geom, h)?;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
    let max_rel_diff = rel(direct, inverse_mellin).max(rel(direct, alpha_form)).max(rel(inverse_mellin, alpha_form));
    Ok(PsiTriple { h: h.to_vec(), direct, inverse_mellin, alpha_form, max_rel_diff })
}

/// `f(x) = log Γ(0.51+x) - 0.51 Ψ(0.51+x) + x log(4/π) - log 2`.
pub fn rate_function(x: f64) -> Result<f64> {
    Ok(specfun::log_gamma_real(0.51 + x)? - 0.51 * specfun::digamma(0.51 + x)? + x * (4.0 / PI).ln() - 2f64.ln())
}

/// The numerical facts behind the exponential growth rate.
pub fn rate_constant_checks() -> Result<Vec<CheckRecord>> {
    let f0 = rate_function(0.0)?;
    let f14 = rate_function(0.25)?;
    let mut out = vec![
        CheckRecord::at_most("rate_f0_at_least_log_2.3", json!({"x": 0.0}), 2.3f64.ln(), f0),
        CheckRecord::at_most("rate_f_quarter_above_tenth", json!({"x": 0.25}), 0.1, f14),
        CheckRecord::at_most("exp_0.0955_above_1.1", json!({}), 1.1, 0.0955f64.exp()),
    ];
    // f is decreasing on [0, 1/4]
    let mut worst = f64::NEG_INFINITY;
    let mut prev = f0;
    for i in 1..=250 {
        let v = rate_function(0.25 * i as f64 / 250.0)?;
        worst = worst.max(v - prev);
        prev = v;
    }
    out.push(CheckRecord::at_most("rate_f_decreasing", json!({"grid": 250}), worst, 0.0));
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifiedReport {
    pub n: usize,
    pub r1: usize,
    pub r2: usize,
    pub k: usize,
    pub t: f64,
    pub y1: f64,
    pub sigma: Vec<f64>,
    pub det_h: DetH,
    pub log_i1: f64,
    pub theta_prefactor: f64,
    /// `𝓛` with `√(det(𝒬ᵀ𝒬) Π (r_{1,w}+r_{2,w}))` in place of `√det(QᵀQ)`.
    pub theta_prefactor_fiber_form: f64,
    pub log_bound: f64,
    pub bound: f64,
    pub covolume: f64,
    pub relative_degree: f64,
    pub subfield_degree: f64,
    pub n0: f64,
    pub growth_rate: f64,
    pub error_terms: Option<AsymptoticBreakdown>,
    pub checks: Vec<CheckRecord>,
    pub conditional_flags: Vec<String>,
}

/// Lower bound `0.01 · I_1 · 𝓛` for `μ(E_R/E)/|E_tor|` from the term `a = 1`,
/// compared with the covolume of `LOG(E)`.
pub fn certified_lower_bound(_field: &NumberField, geom: &SubgroupGeometry, n0: f64, d: f64) -> Result<CertifiedReport> {
    let fibers = geom.fibers().ok_or(AsymptoticsError::MissingFiberData)?;
    let n = geom.degree();
    let nf = n as f64;
    let (r1, r2, k) = (geom.r1(), geom.r2(), geom.k());
    let shift = r2 as f64 / (2.0 * nf);
    let y1 = specfun::digamma(0.51 + shift)?;
    let t = y1.exp();
    let mut y = vec![0.0; k];
    y[0] = y1;
    let pd = PlaceDataSet::from_geometry(geom)?;
    let main = main_term_i1(&pd, &y)?;
    let sigma1 = main.sigma[0];
    let mut checks = vec![
        CheckRecord::at_most("sigma1_at_least_0.51", json!({"sigma1": sigma1}), 0.51 - 1e-9, sigma1),
        CheckRecord::at_most("psi_0.51_above_-2", json!({}), -2.0, specfun::digamma(0.51)?),
        CheckRecord::at_most("y1_at_least_psi_0.51", json!({"y1": y1}), specfun::digamma(0.51)?, y1),
        CheckRecord::at_most("y1_at_most_psi_0.76", json!({"y1": y1}), y1, specfun::digamma(0.76)?),
        CheckRecord::at_most("psi_0.76_below_-1", json!({}), specfun::digamma(0.76)?, -1.0),
    ];
    let rel = (main.det_h.direct - main.det_h.cauchy_binet).abs() / main.det_h.cauchy_binet;
    checks.push(CheckRecord::at_most("det_h_two_ways", json!({}), rel, 1e-10));
    let prefactor = theta_prefactor(geom);
    let fiber_det = (fibers.qcal.transpose() * &fibers.qcal).determinant()
        * fibers.r1.iter().zip(&fibers.r2).map(|(a, b)| (a + b) as f64).product::<f64>();
    let prefactor_fiber = prefactor * (fiber_det / geom.det_qtq()).sqrt();
    let log_bound = 0.01f64.ln() + main.log_i1 + prefactor.ln();
    let bound = log_bound.exp();
    let covolume = if geom.unit_logs().is_empty() {
        1.0
    } else {
        let weighted: Vec<Vec<f64>> = geom
            .unit_logs()
            .iter()
            .map(|l| l.iter().zip(geom.kinds()).map(|(x, kd)| x * kd.weight()).collect())
            .collect();
        LogLattice::new(weighted)
            .and_then(|l| l.covolume())
            .map_err(|e| AsymptoticsError::Input(e.to_string()))?
    };
    checks.push(CheckRecord::at_most("bound_below_covolume", json!({"bound": bound, "covolume": covolume}), bound, covolume));
    let m = fibers.relative_degree();
    let deg_k = fibers.subfield_degree_estimate();
    let mut flags = Vec::new();
    if m < n0 * 2.01f64.powf(deg_k) {
        flags.push(format!("conditional: [L:K] = {m} < N0·2.01^[K:Q] = {}", n0 * 2.01f64.powf(deg_k)));
    }
    let error_terms = match asymptotic_breakdown(&pd, &y, d) {
        Ok(b) => {
            let total = b.tails.i2_rel + b.tails.i3_rel + b.i4_rel;
            checks.push(CheckRecord::at_most("error_terms_below_0.01", json!({"D": d}), total, 0.01));
            checks.push(CheckRecord::at_most("derivative_term_below_0.01_sigma1", json!({}), b.deriv_rel, 0.01 * sigma1));
            Some(b)
        }
        Err(AsymptoticsError::PreconditionViolated(why)) => {
            flags.push(format!("error terms not bounded: {why}"));
            None
        }
        Err(e) => return Err(e),
    };
    let growth_rate = (nf * rate_function(shift)?).exp();
    Ok(CertifiedReport {
        n,
        r1,
        r2,
        k,
        t,
        y1,
        sigma: main.sigma.clone(),
        det_h: main.det_h,
        log_i1: main.log_i1,
        theta_prefactor: prefactor,
        theta_prefactor_fiber_form: prefactor_fiber,
        log_bound,
        bound,
        covolume,
        relative_degree: m,
        subfield_degree: deg_k,
        n0,
        growth_rate,
        error_terms,
        checks,
        conditional_flags: flags,
    })
}

/// Places with kind, used by callers building synthetic geometries.
pub fn place_kinds(r1: usize, r2: usize) -> Vec<PlaceKind> {
    let mut v = vec![PlaceKind::Real; r1];
    v.extend(vec![PlaceKind::Complex; r2]);
    v
}
