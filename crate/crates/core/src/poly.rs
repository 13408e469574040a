//! Polynomial evaluation, root finding, and exact rational polynomial arithmetic.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("polynomial is identically zero")]
    Zero,
    #[error("root finder did not converge (residual {0:e})")]
    NoConvergence(f64),
}

/// Horner evaluation of a real-coefficient polynomial (constant term first)
/// at a complex point.
pub fn eval_real(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Horner evaluation of value and derivative.
pub fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// `Σ |c_i| |z|^i`, the natural scale for residuals at `z`.
pub fn residual_scale(coeffs: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

fn trim_complex(coeffs: &[Complex64]) -> Result<(Vec<Complex64>, usize), PolyError> {
    let mut hi = coeffs.len();
    while hi > 0 && coeffs[hi - 1] == Complex64::new(0.0, 0.0) {
        hi -= 1;
    }
    if hi == 0 {
        return Err(PolyError::Zero);
    }
    let mut lo = 0;
    while coeffs[lo] == Complex64::new(0.0, 0.0) {
        lo += 1;
    }
    Ok((coeffs[lo..hi].to_vec(), lo))
}

fn newton_polish(coeffs: &[Complex64], mut z: Complex64, steps: usize) -> Complex64 {
    let (mut p, _) = eval_with_derivative(coeffs, z);
    for _ in 0..steps {
        let (_, dp) = eval_with_derivative(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let (pc, _) = eval_with_derivative(coeffs, cand);
        if pc.norm() < p.norm() {
            z = cand;
            p = pc;
        } else {
            break;
        }
    }
    z
}

fn quadratic_roots(c: &[Complex64]) -> [Complex64; 2] {
    let (a, b, cc) = (c[2], c[1], c[0]);
    let disc = (b * b - 4.0 * a * cc).sqrt();
    // pick the sign that avoids cancellation
    let q = if (b.conj() * disc).re >= 0.0 { -0.5 * (b + disc) } else { -0.5 * (b - disc) };
    if q == Complex64::new(0.0, 0.0) {
        [q, q]
    } else {
        [q / a, cc / q]
    }
}

/// All roots of a polynomial with complex coefficients (constant term first),
/// with multiplicity. Zero roots are split off exactly.
///
/// Initial approximations come from companion matrix eigenvalues when the
/// coefficients are real, otherwise from a circle; Aberth–Ehrlich iteration
/// and a Newton polish finish the job.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, PolyError> {
    let (c, zeros) = trim_complex(coeffs)?;
    let mut out = vec![Complex64::new(0.0, 0.0); zeros];
    let deg = c.len() - 1;
    match deg {
        0 => return Ok(out),
        1 => {
            out.push(-c[0] / c[1]);
            return Ok(out);
        }
        2 => {
            out.extend(quadratic_roots(&c).iter().map(|&z| newton_polish(&c, z, 3)));
            return Ok(out);
        }
        _ => {}
    }
    let real = c.iter().all(|z| z.im == 0.0);
    let init = if real {
        companion_eigenvalues(&c.iter().map(|z| z.re).collect::<Vec<_>>()).unwrap_or_else(|| circle_start(&c))
    } else {
        circle_start(&c)
    };
    let found = aberth(&c, init)?;
    out.extend(found);
    Ok(out)
}

/// Roots of a real polynomial.
pub fn real_roots_of(coeffs: &[f64]) -> Result<Vec<Complex64>, PolyError> {
    let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    roots(&c)
}

/// Eigenvalues of the companion matrix, or `None` if the Schur iteration
/// stalls.
fn companion_eigenvalues(c: &[f64]) -> Option<Vec<Complex64>> {
    let n = c.len() - 1;
    let lead = c[n];
    let m = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i == 0 {
            -c[n - 1 - j] / lead
        } else if j + 1 == i {
            1.0
        } else {
            0.0
        }
    });
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 50 * n)?;
    Some(schur.complex_eigenvalues().iter().copied().collect())
}

fn circle_start(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lead = c[n].norm();
    let mut radius: f64 = 0.0;
    for (i, ci) in c.iter().enumerate().take(n) {
        let r = (ci.norm() / lead).powf(1.0 / (n - i) as f64);
        radius = radius.max(r);
    }
    let radius = radius.max(1e-3);
    (0..n)
        .map(|j| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * (j as f64 + 0.25) / n as f64 + 0.4))
        .collect()
}

fn aberth(c: &[Complex64], mut z: Vec<Complex64>) -> Result<Vec<Complex64>, PolyError> {
    let n = z.len();
    // Nudge exactly coincident starts apart.
    for i in 0..n {
        for j in 0..i {
            if (z[i] - z[j]).norm() < 1e-12 * (1.0 + z[i].norm()) {
                let bump = Complex64::new(1e-7, 1e-7) * (1.0 + z[i].norm());
                z[i] += bump;
            }
        }
    }
    let mut converged = vec![false; n];
    for _ in 0..500 {
        let mut all = true;
        for i in 0..n {
            if converged[i] {
                continue;
            }
            let (p, dp) = eval_with_derivative(c, z[i]);
            let scale = residual_scale(c, z[i]);
            if p.norm() <= 4.0 * f64::EPSILON * scale {
                converged[i] = true;
                continue;
            }
            let ratio = p / dp;
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    sum += (z[i] - z[j]).inv();
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            z[i] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[i].norm() {
                converged[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    let mut worst: f64 = 0.0;
    for zi in z.iter_mut() {
        *zi = newton_polish(c, *zi, 3);
        let (p, _) = eval_with_derivative(c, *zi);
        worst = worst.max(p.norm() / residual_scale(c, *zi).max(f64::MIN_POSITIVE));
    }
    if !worst.is_finite() || worst > 1e-8 {
        return Err(PolyError::NoConvergence(worst));
    }
    Ok(z)
}

// ---------------------------------------------------------------------------
// Exact rational polynomials (constant term first, no trailing zeros)

/// Polynomial with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPoly(pub Vec<BigRational>);

impl QPoly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        QPoly(c)
    }

    pub fn from_ints(c: &[BigInt]) -> Self {
        QPoly::new(c.iter().map(|x| BigRational::from_integer(x.clone())).collect())
    }

    pub fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub fn one() -> Self {
        QPoly(vec![BigRational::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> BigRational {
        self.0.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.0.len().max(other.0.len());
        let z = BigRational::zero();
        QPoly::new(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&z) + other.0.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        let n = self.0.len().max(other.0.len());
        let z = BigRational::zero();
        QPoly::new(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&z) - other.0.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }

    pub fn scale(&self, s: &BigRational) -> QPoly {
        QPoly::new(self.0.iter().map(|c| c * s).collect())
    }

    /// Euclidean division; panics on division by zero.
    pub fn divrem(&self, d: &QPoly) -> (QPoly, QPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.lead();
        let mut rem = self.0.clone();
        if rem.len() <= dd {
            return (QPoly::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let coef = &rem[k + dd] / &lead;
            if !coef.is_zero() {
                for (j, dj) in d.0.iter().enumerate() {
                    rem[k + j] -= &coef * dj;
                }
            }
            quot[k] = coef;
        }
        rem.truncate(dd);
        (QPoly::new(quot), QPoly::new(rem))
    }

    pub fn rem(&self, d: &QPoly) -> QPoly {
        self.divrem(d).1
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let l = a.lead();
        a.scale(&l.recip())
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }
}

/// Exact resultant `Res(f, g)` over the rationals, via the Euclidean remainder
/// sequence `Res(f, g) = (-1)^{deg f deg g} lc(g)^{deg f - deg r} Res(g, r)`.
pub fn resultant(f: &QPoly, g: &QPoly) -> BigRational {
    let (Some(mut df), Some(mut dg)) = (f.degree(), g.degree()) else {
        return BigRational::zero();
    };
    let mut a = f.clone();
    let mut b = g.clone();
    let mut acc = BigRational::one();
    loop {
        if dg == 0 {
            return acc * b.lead().pow(df as i32);
        }
        let r = a.rem(&b);
        let Some(dr) = r.degree() else {
            return BigRational::zero();
        };
        if (df * dg) % 2 == 1 {
            acc = -acc;
        }
        acc *= b.lead().pow((df - dr) as i32);
        a = b;
        b = r;
        df = dg;
        dg = dr;
    }
}

/// Absolute value helper for rationals.
pub fn rational_abs(x: &BigRational) -> BigRational {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn qp(c: &[i64]) -> QPoly {
        QPoly::new(c.iter().map(|&x| q(x)).collect())
    }

    #[test]
    fn roots_of_simple_polynomials() {
        let r = real_roots_of(&[-2.0, 0.0, 1.0]).unwrap();
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 2f64.sqrt()).abs() < 1e-15 && (re[1] - 2f64.sqrt()).abs() < 1e-15);
        let r = real_roots_of(&[1.0, -1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(r.len(), 5);
        for z in &r {
            assert!(eval_real(&[1.0, -1.0, 0.0, 0.0, 0.0, 1.0], *z).norm() < 1e-13);
        }
        let r = real_roots_of(&[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 2);
    }

    #[test]
    fn complex_coefficient_roots() {
        // (x - i)(x - 2)(x + 1 + i)
        let rs = [Complex64::new(0.0, 1.0), Complex64::new(2.0, 0.0), Complex64::new(-1.0, -1.0)];
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in rs {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * r;
            }
            c = next;
        }
        let found = roots(&c).unwrap();
        for r in rs {
            assert!(found.iter().any(|z| (z - r).norm() < 1e-13));
        }
    }

    #[test]
    fn resultant_matches_known_norms() {
        // Res(x^2 - 2, 1 + x) = (1+√2)(1-√2) = -1
        assert_eq!(resultant(&qp(&[-2, 0, 1]), &qp(&[1, 1])), q(-1));
        // Res(x^2 + 1, x^2 - 2x + 2) = Π (i^2 - 2i + 2)(...) = |1 - 2i|^2 = 5
        assert_eq!(resultant(&qp(&[1, 0, 1]), &qp(&[2, -2, 1])), q(5));
        // common root → 0
        assert_eq!(resultant(&qp(&[-1, 0, 1]), &qp(&[-1, 1])), q(0));
    }

    #[test]
    fn resultant_agrees_with_sylvester_determinant() {
        let f = qp(&[3, -1, 0, 2]);
        let g = qp(&[-5, 4, 1]);
        // Sylvester matrix 5x5 determinant computed with exact rational elimination
        let (m, n) = (3usize, 2usize);
        let size = m + n;
        let mut s = vec![vec![q(0); size]; size];
        for i in 0..n {
            for j in 0..=m {
                s[i][i + j] = f.0[m - j].clone();
            }
        }
        for i in 0..m {
            for j in 0..=n {
                s[n + i][i + j] = g.0[n - j].clone();
            }
        }
        let mut det = q(1);
        for col in 0..size {
            let piv = (col..size).find(|&r| !s[r][col].is_zero()).unwrap();
            if piv != col {
                s.swap(piv, col);
                det = -det;
            }
            det *= s[col][col].clone();
            for r in col + 1..size {
                let f = &s[r][col] / &s[col][col];
                for c in col..size {
                    let v = &s[col][c] * &f;
                    s[r][c] -= v;
                }
            }
        }
        assert_eq!(resultant(&f, &g), det);
    }

    #[test]
    fn gcd_and_division() {
        let a = qp(&[-1, 0, 1]).mul(&qp(&[2, 1]));
        let b = qp(&[-1, 0, 1]).mul(&qp(&[5, 0, 1]));
        assert_eq!(a.gcd(&b), qp(&[-1, 0, 1]));
        let (quo, rem) = a.divrem(&qp(&[2, 1]));
        assert!(rem.is_zero());
        assert_eq!(quo, qp(&[-1, 0, 1]));
    }
}
