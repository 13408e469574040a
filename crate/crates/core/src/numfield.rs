//! Number fields from integer polynomials: places, absolute values, exact
//! norms and logarithmic embeddings.
//!
//! Irreducibility of the defining polynomial is not checked, only
//! squarefreeness. A reducible input silently models a product of fields.

use crate::poly::{self, PolyError, QPoly};
use crate::specfun::PlaceKind;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::cmp::Ordering;

/// Relative tolerance separating real roots from complex ones.
pub const PAIRING_TOL: f64 = 1e-8;
/// Roots whose imaginary part lies between the pairing tolerance and this
/// multiple of it are considered ambiguous.
const AMBIGUOUS_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("polynomial has degree < 1 or zero leading coefficient")]
    BadDegree,
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("root finding failed: {0}")]
    RootFindingFailed(String),
    #[error("root {0} cannot be classified as real or complex")]
    AmbiguousPairing(String),
    #[error("element is zero")]
    ZeroElement,
    #[error("element has {got} coordinates, field degree is {want}")]
    WrongLength { got: usize, want: usize },
}

impl From<PolyError> for FieldError {
    fn from(e: PolyError) -> Self {
        FieldError::RootFindingFailed(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FieldError>;

/// Integer polynomial, constant term first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.len() < 2 || coeffs.last().is_none_or(|c| c.is_zero()) {
            return Err(FieldError::BadDegree);
        }
        Ok(IntPolynomial { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &BigInt {
        self.coeffs.last().unwrap()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn to_qpoly(&self) -> QPoly {
        QPoly::from_ints(&self.coeffs)
    }

    pub fn is_squarefree(&self) -> bool {
        let p = self.to_qpoly();
        p.gcd(&p.derivative()).degree() == Some(0)
    }
}

/// An archimedean place with its representative embedding of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Place {
    pub kind: PlaceKind,
    pub root: Complex64,
}

impl Place {
    pub fn multiplier(&self) -> f64 {
        self.kind.weight()
    }
}

/// A number field presented by its defining polynomial.
#[derive(Debug, Clone)]
pub struct NumberField {
    min_poly: IntPolynomial,
    roots: Vec<Complex64>,
    places: Vec<Place>,
    r1: usize,
    r2: usize,
}

/// Element in the power basis of the generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldElement {
    pub coords: Vec<BigRational>,
}

impl FieldElement {
    pub fn new(coords: Vec<BigRational>) -> Self {
        FieldElement { coords }
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        FieldElement {
            coords: coords
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    fn as_qpoly(&self) -> QPoly {
        QPoly::new(self.coords.clone())
    }
}

/// Flavor of the logarithmic embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LogFlavor {
    /// `e_v log|a|_v`
    Weighted,
    /// `log|a|_v`
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UnitClass {
    NotUnit,
    Unit,
    RootOfUnity,
}

/// Absolute values at each place, and the norm computed two ways.
#[derive(Debug, Clone)]
pub struct AbsValues {
    pub per_place: Vec<f64>,
    pub norm_float: f64,
    pub norm_exact: BigRational,
}

fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.total_cmp(&b)
}

impl NumberField {
    /// Finds the roots of the defining polynomial and groups them into places.
    ///
    /// Real places come first in increasing order of the root, then complex
    /// places ordered by the representative with positive imaginary part.
    pub fn new(min_poly: IntPolynomial) -> Result<Self> {
        if !min_poly.is_squarefree() {
            return Err(FieldError::NotSquarefree);
        }
        let coeffs = min_poly.to_f64();
        let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let roots = poly::roots(&c)?;
        for z in &roots {
            let scale = poly::residual_scale(&c, *z);
            let res = poly::eval_real(&coeffs, *z).norm();
            if res > 1e-10 * scale {
                return Err(FieldError::RootFindingFailed(format!("residual {res:e} at {z}")));
            }
        }
        let mut reals = Vec::new();
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for z in &roots {
            let s = z.norm().max(1.0);
            let im = z.im.abs();
            if im <= PAIRING_TOL * s {
                reals.push(polish_real(&coeffs, z.re));
            } else if im < AMBIGUOUS_FACTOR * PAIRING_TOL * s {
                return Err(FieldError::AmbiguousPairing(format!("{z}")));
            } else if z.im > 0.0 {
                upper.push(*z);
            } else {
                lower.push(*z);
            }
        }
        if upper.len() != lower.len() {
            return Err(FieldError::AmbiguousPairing("unbalanced conjugate pairs".into()));
        }
        for u in &upper {
            let best = lower
                .iter()
                .map(|l| (l - u.conj()).norm())
                .fold(f64::INFINITY, f64::min);
            if best > 1e-6 * u.norm().max(1.0) {
                return Err(FieldError::AmbiguousPairing(format!("{u} has no conjugate partner")));
            }
        }
        reals.sort_by(|a, b| cmp_f64(*a, *b));
        upper.sort_by(|a, b| cmp_f64(a.re, b.re).then(cmp_f64(a.im, b.im)));
        let mut places: Vec<Place> = reals
            .iter()
            .map(|&x| Place { kind: PlaceKind::Real, root: Complex64::new(x, 0.0) })
            .collect();
        places.extend(upper.iter().map(|&z| Place { kind: PlaceKind::Complex, root: z }));
        let r1 = reals.len();
        let r2 = upper.len();
        let mut all: Vec<Complex64> = reals.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for u in &upper {
            all.push(*u);
            all.push(u.conj());
        }
        Ok(NumberField { min_poly, roots: all, places, r1, r2 })
    }

    pub fn min_poly(&self) -> &IntPolynomial {
        &self.min_poly
    }

    pub fn degree(&self) -> usize {
        self.min_poly.degree()
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn place_kinds(&self) -> Vec<PlaceKind> {
        self.places.iter().map(|p| p.kind).collect()
    }

    pub fn r1(&self) -> usize {
        self.r1
    }

    pub fn r2(&self) -> usize {
        self.r2
    }

    /// Number of archimedean places `r1 + r2`.
    pub fn num_places(&self) -> usize {
        self.r1 + self.r2
    }

    /// Rank `r1 + r2 - 1` of the unit group.
    pub fn unit_rank(&self) -> usize {
        self.num_places() - 1
    }

    pub fn is_totally_real(&self) -> bool {
        self.r2 == 0
    }

    fn check(&self, a: &FieldElement) -> Result<()> {
        if a.coords.len() != self.degree() {
            return Err(FieldError::WrongLength { got: a.coords.len(), want: self.degree() });
        }
        if a.is_zero() {
            return Err(FieldError::ZeroElement);
        }
        Ok(())
    }

    /// Value of `a` at the representative root of each place.
    pub fn embed(&self, a: &FieldElement) -> Vec<Complex64> {
        let c: Vec<f64> = a.coords.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        self.places.iter().map(|p| poly::eval_real(&c, p.root)).collect()
    }

    /// Exact norm `Res(f, a) / lc(f)^{deg a}`.
    pub fn norm_exact(&self, a: &FieldElement) -> Result<BigRational> {
        self.check(a)?;
        let g = a.as_qpoly();
        let deg = g.degree().unwrap_or(0);
        let res = poly::resultant(&self.min_poly.to_qpoly(), &g);
        let lc = BigRational::from_integer(self.min_poly.leading().clone());
        Ok(res / lc.pow(deg as i32))
    }

    pub fn abs_values(&self, a: &FieldElement) -> Result<AbsValues> {
        self.check(a)?;
        let per_place: Vec<f64> = self.embed(a).iter().map(|z| z.norm()).collect();
        let norm_float = per_place
            .iter()
            .zip(&self.places)
            .map(|(x, p)| x.powf(p.multiplier()))
            .product();
        let norm_exact = self.norm_exact(a)?;
        Ok(AbsValues { per_place, norm_float, norm_exact })
    }

    pub fn log_embed(&self, a: &FieldElement, flavor: LogFlavor) -> Result<Vec<f64>> {
        self.check(a)?;
        Ok(self
            .embed(a)
            .iter()
            .zip(&self.places)
            .map(|(z, p)| {
                let l = z.norm().ln();
                match flavor {
                    LogFlavor::Weighted => p.multiplier() * l,
                    LogFlavor::Plain => l,
                }
            })
            .collect())
    }

    /// Product `a·b` reduced modulo the defining polynomial.
    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let prod = a.as_qpoly().mul(&b.as_qpoly()).rem(&self.min_poly.to_qpoly());
        self.pad(prod)
    }

    fn pad(&self, p: QPoly) -> FieldElement {
        let mut c = p.0;
        c.resize(self.degree(), BigRational::zero());
        FieldElement { coords: c }
    }

    pub fn one(&self) -> FieldElement {
        self.pad(QPoly::one())
    }

    /// Unit test by exact norm. Integrality is the caller's responsibility:
    /// a non-integral element of norm ±1 is reported as a unit.
    pub fn classify_unit(&self, a: &FieldElement) -> Result<UnitClass> {
        let norm = self.norm_exact(a)?;
        if norm.abs() != BigRational::one() {
            return Ok(UnitClass::NotUnit);
        }
        let abs = self.abs_values(a)?;
        if abs.per_place.iter().any(|x| (x - 1.0).abs() > 1e-10) {
            return Ok(UnitClass::Unit);
        }
        let n = self.degree();
        let one = self.one();
        let mut power = a.clone();
        for _ in 1..=(2 * n * n) {
            if power == one {
                return Ok(UnitClass::RootOfUnity);
            }
            power = self.mul(&power, a);
        }
        Ok(UnitClass::Unit)
    }
}

fn polish_real(coeffs: &[f64], mut x: f64) -> f64 {
    let d: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
    let horner = |c: &[f64], t: f64| c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci);
    let mut px = horner(coeffs, x).abs();
    for _ in 0..4 {
        let dp = horner(&d, x);
        if dp == 0.0 {
            break;
        }
        let cand = x - horner(coeffs, x) / dp;
        let pc = horner(coeffs, cand).abs();
        if pc < px {
            x = cand;
            px = pc;
        } else {
            break;
        }
    }
    x
}

/// Parses an exact rational from `"p"`, `"p/q"` or an integer literal.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        Some(BigRational::new(p, q))
    } else {
        Some(BigRational::from_integer(s.parse().ok()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(c: &[i64]) -> NumberField {
        NumberField::new(IntPolynomial::from_i64(c).unwrap()).unwrap()
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn signatures() {
        let f = field(&[-2, 0, 1]);
        assert_eq!((f.r1(), f.r2()), (2, 0));
        assert!((f.places()[0].root.re + 2f64.sqrt()).abs() < 1e-15);
        assert!((f.places()[1].root.re - 2f64.sqrt()).abs() < 1e-15);
        let f = field(&[1, -1, 0, 0, 0, 1]);
        assert_eq!((f.r1(), f.r2()), (1, 2));
        let f = field(&[2, -2, 1]);
        assert_eq!((f.r1(), f.r2()), (0, 1));
        assert!((f.places()[0].root - Complex64::new(1.0, 1.0)).norm() < 1e-15);
        assert_eq!(f.num_places(), 1);
    }

    #[test]
    fn sign_change_count_matches_real_places() {
        // x^5 - x + 1 changes sign once on the real line
        let coeffs = [1.0, -1.0, 0.0, 0.0, 0.0, 1.0];
        let horner = |t: f64| coeffs.iter().rev().fold(0.0, |a, &c| a * t + c);
        let mut changes = 0;
        let mut prev = horner(-10.0);
        let mut t = -10.0;
        while t < 10.0 {
            t += 1e-3;
            let v = horner(t);
            if v.signum() != prev.signum() {
                changes += 1;
            }
            prev = v;
        }
        assert_eq!(changes, field(&[1, -1, 0, 0, 0, 1]).r1());
    }

    #[test]
    fn rejects_bad_input() {
        let p = IntPolynomial::from_i64(&[1, 2, 1]).unwrap();
        assert_eq!(NumberField::new(p).unwrap_err(), FieldError::NotSquarefree);
        assert!(IntPolynomial::from_i64(&[3]).is_err());
        assert!(IntPolynomial::from_i64(&[3, 0]).is_err());
        let f = field(&[-2, 0, 1]);
        assert_eq!(f.abs_values(&FieldElement::from_i64(&[0, 0])).unwrap_err(), FieldError::ZeroElement);
    }

    #[test]
    fn abs_values_and_norms() {
        let f = field(&[-2, 0, 1]);
        let a = f.abs_values(&FieldElement::from_i64(&[0, 1])).unwrap();
        assert!(a.per_place.iter().all(|x| (x - 2f64.sqrt()).abs() < 1e-15));
        assert_eq!(a.norm_exact, q(-2));
        let a = f.abs_values(&FieldElement::from_i64(&[1, 1])).unwrap();
        assert!((a.per_place[0] - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((a.per_place[1] - (2f64.sqrt() + 1.0)).abs() < 1e-15);
        assert_eq!(a.norm_exact, q(-1));
        let f = field(&[1, -1, 0, 0, 0, 1]);
        let a = f.abs_values(&FieldElement::from_i64(&[0, 1, 0, 0, 0])).unwrap();
        assert_eq!(a.norm_exact.abs(), q(1));
        assert!((a.norm_float - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_embeddings() {
        let f = field(&[-2, 0, 1]);
        let l = f.log_embed(&FieldElement::from_i64(&[1, 0]), LogFlavor::Weighted).unwrap();
        assert!(l.iter().all(|x| x.abs() < 1e-15));
        let l = f.log_embed(&FieldElement::from_i64(&[1, 1]), LogFlavor::Weighted).unwrap();
        let e = (1.0 + 2f64.sqrt()).ln();
        assert!((l[0] + e).abs() < 1e-14 && (l[1] - e).abs() < 1e-14);
        let f = field(&[2, -2, 1]);
        let w = f.log_embed(&FieldElement::from_i64(&[0, 1]), LogFlavor::Weighted).unwrap();
        let p = f.log_embed(&FieldElement::from_i64(&[0, 1]), LogFlavor::Plain).unwrap();
        assert!((w[0] - 2.0 * p[0]).abs() < 1e-15);
        assert!((p[0] - 0.5 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn unit_classification() {
        let f = field(&[-2, 0, 1]);
        assert_eq!(f.classify_unit(&FieldElement::from_i64(&[-1, 0])).unwrap(), UnitClass::RootOfUnity);
        assert_eq!(f.classify_unit(&FieldElement::from_i64(&[1, 1])).unwrap(), UnitClass::Unit);
        assert_eq!(f.classify_unit(&FieldElement::from_i64(&[0, 1])).unwrap(), UnitClass::NotUnit);
        let g = field(&[1, 0, 1]);
        assert_eq!(g.classify_unit(&FieldElement::from_i64(&[0, 1])).unwrap(), UnitClass::RootOfUnity);
        // ζ_12 in Q(ζ_12) = Q[x]/(x^4 - x^2 + 1)
        let h = field(&[1, 0, -1, 0, 1]);
        assert_eq!(h.classify_unit(&FieldElement::from_i64(&[0, 1, 0, 0])).unwrap(), UnitClass::RootOfUnity);
        // (3 + 4i)/5 has absolute value one and norm one but infinite order
        let a = FieldElement::new(vec![BigRational::new(3.into(), 5.into()), BigRational::new(4.into(), 5.into())]);
        assert_eq!(g.classify_unit(&a).unwrap(), UnitClass::Unit);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("-3/2"), Some(BigRational::new((-3).into(), 2.into())));
        assert_eq!(parse_rational("7"), Some(q(7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    proptest! {
        #[test]
        fn product_formula(c in proptest::collection::vec(-5i64..=5, 5)) {
            let f = field(&[1, -1, 0, 0, 0, 1]);
            let a = FieldElement::from_i64(&c);
            prop_assume!(!a.is_zero());
            let abs = f.abs_values(&a).unwrap();
            let exact = abs.norm_exact.to_f64().unwrap().abs();
            prop_assert!((abs.norm_float - exact).abs() < 1e-9 * exact);
        }

        #[test]
        fn unit_log_sum_vanishes(c in proptest::collection::vec(-3i64..=3, 3)) {
            let f = field(&[1, -2, -1, 1]);
            let a = FieldElement::from_i64(&c);
            prop_assume!(!a.is_zero());
            if f.classify_unit(&a).unwrap() != UnitClass::NotUnit {
                let s: f64 = f.log_embed(&a, LogFlavor::Weighted).unwrap().iter().sum();
                prop_assert!(s.abs() < 1e-9);
            }
        }

        #[test]
        fn signature_stable_under_translation(shift in -4i64..=4) {
            // x^3 - 2 translated by x -> x + shift always has signature (1, 1)
            let s = BigInt::from(shift);
            let p = QPoly::from_ints(&[BigInt::from(-2), 0.into(), 0.into(), 1.into()]);
            let lin = QPoly::from_ints(&[s, 1.into()]);
            let mut comp = QPoly::zero();
            for c in p.0.iter().rev() {
                comp = comp.mul(&lin).add(&QPoly::new(vec![c.clone()]));
            }
            let ints: Vec<BigInt> = comp.0.iter().map(|c| c.to_integer()).collect();
            let f = NumberField::new(IntPolynomial::new(ints).unwrap()).unwrap();
            prop_assert_eq!((f.r1(), f.r2()), (1, 1));
        }
    }
}
