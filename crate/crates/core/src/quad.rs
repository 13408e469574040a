//! Adaptive Gauss–Kronrod quadrature (15-point rule), nested for low
//! dimensions, and a Halton sequence for quasi-Monte Carlo.

use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("quadrature did not converge: value {value}, error estimate {error:e}")]
    NotConverged { value: f64, error: f64 },
    #[error("non-finite integrand value at {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub value: Complex64,
    pub error: f64,
    pub evals: usize,
}

/// Kronrod and Gauss estimates on `[a, b]`.
pub fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, Complex64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, g * h)
}

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// Tolerances and an interval budget for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel, max_intervals: 2000 }
    }
}

/// Globally adaptive integration over consecutive `breaks` (at least two).
pub fn adaptive<F: FnMut(f64) -> Complex64>(mut f: F, breaks: &[f64], tol: Tolerance) -> Result<Quad, QuadError> {
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in breaks.windows(2) {
        let (k, g) = gk15(&mut f, w[0], w[1]);
        evals += 15;
        let e = (k - g).norm();
        total += k;
        err += e;
        heap.push(Piece { a: w[0], b: w[1], value: k, error: e });
    }
    loop {
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(QuadError::NonFinite(breaks[0]));
        }
        if err <= tol.abs.max(tol.rel * total.norm()) {
            return Ok(Quad { value: total, error: err, evals });
        }
        if heap.len() >= tol.max_intervals {
            return Err(QuadError::NotConverged { value: total.re, error: err });
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at double precision
            return if err <= 10.0 * tol.abs.max(tol.rel * total.norm()) {
                Ok(Quad { value: total, error: err, evals })
            } else {
                Err(QuadError::NotConverged { value: total.re, error: err })
            };
        }
        total -= worst.value;
        err -= worst.error;
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (k, g) = gk15(&mut f, a, b);
            evals += 15;
            let e = (k - g).norm();
            total += k;
            err += e;
            heap.push(Piece { a, b, value: k, error: e });
        }
        // guard against drift from repeated subtraction
        err = err.max(0.0);
    }
}

/// Real-valued convenience wrapper around [`adaptive`].
pub fn adaptive_real<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: Tolerance) -> Result<(f64, f64), QuadError> {
    let q = adaptive(|x| Complex64::new(f(x), 0.0), breaks, tol)?;
    Ok((q.value.re, q.error))
}

/// `n` equal subintervals of `[a, b]` as break points.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// Iterated adaptive integration over the box `Π [a_i, b_i]`, each axis
/// split into `pieces` initial subintervals.
pub fn nested<F: Fn(&[f64]) -> Complex64>(f: &F, bounds: &[(f64, f64)], pieces: usize, tol: Tolerance) -> Result<Quad, QuadError> {
    let mut point = vec![0.0; bounds.len()];
    nested_level(f, bounds, pieces, tol, 0, &mut point)
}

fn nested_level<F: Fn(&[f64]) -> Complex64>(
    f: &F,
    bounds: &[(f64, f64)],
    pieces: usize,
    tol: Tolerance,
    level: usize,
    point: &mut Vec<f64>,
) -> Result<Quad, QuadError> {
    let (a, b) = bounds[level];
    let breaks = uniform_breaks(a, b, pieces);
    if level + 1 == bounds.len() {
        let mut p = point.clone();
        return adaptive(
            |x| {
                p[level] = x;
                f(&p)
            },
            &breaks,
            tol,
        );
    }
    let inner_tol = Tolerance { abs: tol.abs * 1e-2 / (b - a).max(1.0), rel: tol.rel * 1e-1, max_intervals: tol.max_intervals };
    let mut failure = None;
    let mut inner_err = 0.0;
    let mut evals = 0;
    let mut p = point.clone();
    let outer = adaptive(
        |x| {
            p[level] = x;
            match nested_level(f, bounds, pieces, inner_tol, level + 1, &mut p.clone()) {
                Ok(q) => {
                    inner_err = f64::max(inner_err, q.error);
                    evals += q.evals;
                    q.value
                }
                Err(e) => {
                    failure = Some(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        &breaks,
        tol,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Quad { value: outer.value, error: outer.error + inner_err * (b - a), evals: outer.evals + evals })
}

/// `i`-th element (from 1) of the van der Corput sequence in `base`.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut x = 0.0;
    while i > 0 {
        x += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    x
}

/// Halton point number `i` in dimension `dim <= 6`, shifted modulo 1.
pub fn halton(i: u64, dim: usize, shift: &[f64]) -> Vec<f64> {
    const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];
    (0..dim).map(|d| (radical_inverse(i, PRIMES[d]) + shift.get(d).copied().unwrap_or(0.0)).fract()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        // GK15 integrates degree 22 exactly
        let (v, _) = adaptive_real(|x| x.powi(10) - 3.0 * x.powi(3), &[-1.0, 2.0], Tolerance::new(1e-14, 1e-14)).unwrap();
        let want = (2f64.powi(11) + 1.0) / 11.0 - 0.75 * (16.0 - 1.0);
        assert!((v - want).abs() < 1e-12);
    }

    #[test]
    fn gaussian_and_peaks() {
        let (v, _) = adaptive_real(|x| (-x * x).exp(), &uniform_breaks(-10.0, 10.0, 4), Tolerance::new(1e-15, 1e-13)).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        let (v, _) = adaptive_real(|x| 1.0 / (1e-4 + x * x), &[-1.0, 1.0], Tolerance::new(1e-12, 1e-12)).unwrap();
        let want = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - want).abs() < 1e-9 * want);
        let (v, _) = adaptive_real(|x| x.sqrt(), &[0.0, 1.0], Tolerance::new(1e-13, 1e-13)).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn complex_oscillation() {
        let q = adaptive(|x| Complex64::new(0.0, 5.0 * x).exp(), &[0.0, 1.0], Tolerance::new(1e-14, 1e-14)).unwrap();
        let want = (Complex64::new(0.0, 5.0).exp() - 1.0) / Complex64::new(0.0, 5.0);
        assert!((q.value - want).norm() < 1e-13);
    }

    #[test]
    fn nested_two_and_three_dims() {
        let f = |p: &[f64]| Complex64::new((-(p[0] * p[0]) - 2.0 * p[1] * p[1] - p[0] * p[1]).exp(), 0.0);
        let q = nested(&f, &[(-8.0, 8.0), (-8.0, 8.0)], 4, Tolerance::new(1e-13, 1e-11)).unwrap();
        // det of [[1, 1/2],[1/2, 2]] = 7/4
        let want = std::f64::consts::PI / (7.0f64 / 4.0).sqrt();
        assert!((q.value.re - want).abs() < 1e-9 * want);
        let g = |p: &[f64]| Complex64::new(p[0] * p[1] * p[2], 0.0);
        let q = nested(&g, &[(0.0, 1.0), (0.0, 2.0), (0.0, 3.0)], 1, Tolerance::new(1e-13, 1e-12)).unwrap();
        assert!((q.value.re - 0.5 * 2.0 * 4.5).abs() < 1e-11);
    }

    #[test]
    fn halton_points() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
        let n = 4096;
        let mean: f64 = (1..=n).map(|i| halton(i, 3, &[0.3, 0.1, 0.7]).iter().product::<f64>()).sum::<f64>() / n as f64;
        assert!((mean - 0.125).abs() < 2e-3);
    }
}
