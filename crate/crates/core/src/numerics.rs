//! Fixed-size numerical kernel: 3x3 matrices, the characteristic cubic, its
//! closed-form roots, Routh-Hurwitz verdicts and bracketed scalar root finding.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Margin tolerance for Routh-Hurwitz and stability verdicts.
pub const MARGIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub fn identity() -> Self {
        Mat3::diag(1.0, 1.0, 1.0)
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Mat3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Sum of the three principal 2x2 minors.
    pub fn principal_minor_sum(&self) -> f64 {
        let m = &self.0;
        (m[0][0] * m[1][1] - m[0][1] * m[1][0])
            + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
            + (m[1][1] * m[2][2] - m[1][2] * m[2][1])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: &[f64; 3]) -> [f64; 3] {
        self.0.map(|row| dot(&row, v))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn to_complex(&self) -> [[Complex64; 3]; 3] {
        self.0.map(|row| row.map(|v| Complex64::new(v, 0.0)))
    }
}

/// Coefficients of `lambda^3 + omega1 lambda^2 + omega2 lambda + omega3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoefficients {
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
}

impl CubicCoefficients {
    pub fn new(omega1: f64, omega2: f64, omega3: f64) -> Self {
        CubicCoefficients {
            omega1,
            omega2,
            omega3,
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        ((z + self.omega1) * z + self.omega2) * z + self.omega3
    }

    fn eval_derivative(&self, z: Complex64) -> Complex64 {
        (3.0 * z + 2.0 * self.omega1) * z + self.omega2
    }

    /// `omega1 * omega2 - omega3`, zero on a Hopf locus.
    pub fn hurwitz_margin(&self) -> f64 {
        self.omega1 * self.omega2 - self.omega3
    }

    pub fn max_abs(&self) -> f64 {
        self.omega1
            .abs()
            .max(self.omega2.abs())
            .max(self.omega3.abs())
    }
}

/// Eigenvalues sorted by descending real part, ties by descending imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenTriple(pub [Complex64; 3]);

impl EigenTriple {
    pub fn from_unsorted(mut roots: [Complex64; 3]) -> Self {
        roots.sort_by(|a, b| {
            b.re.partial_cmp(&a.re)
                .unwrap_or(Ordering::Equal)
                .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
        });
        EigenTriple(roots)
    }

    pub fn max_real(&self) -> f64 {
        self.0[0].re
    }

    /// Eigenvalues ordered by ascending modulus.
    pub fn by_modulus(&self) -> [Complex64; 3] {
        let mut v = self.0;
        v.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(Ordering::Equal));
        v
    }

    /// The eigenvalue with positive imaginary part of a complex pair, if any.
    pub fn complex_pair(&self, min_imag: f64) -> Option<Complex64> {
        self.0
            .iter()
            .copied()
            .filter(|z| z.im > min_imag)
            .max_by(|a, b| a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
    }

    /// The eigenvalue with the smallest modulus among those with negligible
    /// imaginary part.
    pub fn smallest_real(&self) -> Option<f64> {
        self.0
            .iter()
            .filter(|z| z.im.abs() <= 1e-12 * (1.0 + z.re.abs()))
            .map(|z| z.re)
            .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap_or(Ordering::Equal))
    }
}

/// Characteristic polynomial of `j` from the trace, principal-minor and
/// determinant identities.
pub fn char_coeffs(j: &Mat3) -> CubicCoefficients {
    CubicCoefficients::new(-j.trace(), j.principal_minor_sum(), -j.det())
}

/// Eigenvalues of a 3x3 matrix from the closed-form roots of its
/// characteristic cubic.
pub fn eig3(j: &Mat3) -> EigenTriple {
    cubic_roots(&char_coeffs(j))
}

/// Roots of the monic cubic: Cardano when the discriminant is positive (one
/// real root and a conjugate pair), the trigonometric form otherwise, then
/// two guarded Newton polishing steps.
pub fn cubic_roots(c: &CubicCoefficients) -> EigenTriple {
    let (a, b, cc) = (c.omega1, c.omega2, c.omega3);
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + cc;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);

    let depressed: [Complex64; 3] = if p == 0.0 && q == 0.0 {
        [Complex64::new(0.0, 0.0); 3]
    } else if disc > 0.0 {
        let sq = disc.sqrt();
        let u = if q >= 0.0 {
            (-q / 2.0 - sq).cbrt()
        } else {
            (-q / 2.0 + sq).cbrt()
        };
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let re = -(u + v) / 2.0;
        let im = 3f64.sqrt() / 2.0 * (u - v).abs();
        // a pair that came out real (u == v) is a double root
        [
            Complex64::new(u + v, 0.0),
            Complex64::new(re, im),
            Complex64::new(re, -im),
        ]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        [0.0, 1.0, 2.0].map(|k| Complex64::new(m * (theta - 2.0 * PI * k / 3.0).cos(), 0.0))
    };

    let roots = depressed.map(|t| polish(c, t - shift));
    EigenTriple::from_unsorted(roots)
}

fn polish(c: &CubicCoefficients, mut z: Complex64) -> Complex64 {
    for _ in 0..2 {
        let f = c.eval(z);
        let df = c.eval_derivative(z);
        if df.norm() == 0.0 || !f.is_finite() {
            break;
        }
        let cand = z - f / df;
        let keep_real = z.im == 0.0;
        let cand = if keep_real {
            Complex64::new(cand.re, 0.0)
        } else {
            cand
        };
        if c.eval(cand).norm() < f.norm() {
            z = cand;
        } else {
            break;
        }
    }
    z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouthHurwitz {
    pub verdict: Verdict,
    /// `(omega1, omega3, omega1*omega2 - omega3)`.
    pub margins: [f64; 3],
}

/// Routh-Hurwitz verdict for the cubic. A margin below `-MARGIN_TOL` is
/// decisive (unstable) even if another margin sits on the boundary.
pub fn routh_hurwitz(c: &CubicCoefficients) -> RouthHurwitz {
    let margins = [c.omega1, c.omega3, c.hurwitz_margin()];
    let verdict = if margins.iter().any(|&m| m < -MARGIN_TOL) {
        Verdict::Unstable
    } else if margins.iter().any(|&m| m.abs() <= MARGIN_TOL) {
        Verdict::Marginal
    } else {
        Verdict::Stable
    };
    RouthHurwitz { verdict, margins }
}

/// Verdict from eigenvalue real parts with the same margin tolerance.
pub fn eigen_verdict(e: &EigenTriple) -> Verdict {
    let m = e.max_real();
    if m > MARGIN_TOL {
        Verdict::Unstable
    } else if m < -MARGIN_TOL {
        Verdict::Stable
    } else {
        Verdict::Marginal
    }
}

/// Bisection on a sign change of `f` between `lo` and `hi`; returns the
/// midpoint of the final bracket.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All sign-change roots of `f` on `[a, b]`: uniform `n`-point scan, bisection
/// to `tol`, roots closer than `10 tol` merged, ascending order.
///
/// Tangential (even multiplicity) roots are invisible to the scan.
pub fn bracketed_roots<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    n: usize,
    tol: f64,
) -> Vec<f64> {
    if !(a < b) || n < 2 {
        return Vec::new();
    }
    let xs: Vec<f64> = (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for k in 0..n {
        if fs[k] == 0.0 {
            roots.push(xs[k]);
        }
        if k + 1 < n {
            let (f0, f1) = (fs[k], fs[k + 1]);
            if f0.is_finite()
                && f1.is_finite()
                && f0 != 0.0
                && f1 != 0.0
                && (f0 < 0.0) != (f1 < 0.0)
            {
                roots.push(bisect(&mut f, xs[k], xs[k + 1], tol));
            }
        }
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    roots.dedup_by(|later, earlier| (*later - *earlier).abs() < 10.0 * tol);
    roots
}

pub fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn cross<T>(a: &[T; 3], b: &[T; 3]) -> [T; 3]
where
    T: Copy + std::ops::Mul<Output = T> + std::ops::Sub<Output = T>,
{
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Largest cross product of two rows of `m` and its norm. For a rank-2
/// matrix this spans the null space.
pub fn null_vector_raw(m: &Mat3) -> ([f64; 3], f64) {
    let rows = &m.0;
    let best = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| cross(&rows[i], &rows[j]))
        .max_by(|a, b| norm(a).partial_cmp(&norm(b)).unwrap_or(Ordering::Equal))
        .unwrap_or([0.0; 3]);
    let n = norm(&best);
    (best, n)
}

/// Unit null vector of a rank-2 matrix. `None` when every row pair is
/// (numerically) parallel.
pub fn null_vector(m: &Mat3) -> Option<[f64; 3]> {
    let (v, n) = null_vector_raw(m);
    if !(n >= 1e-12) {
        return None;
    }
    Some(v.map(|x| x / n))
}

/// Complex null vector of a rank-2 complex matrix (bilinear cross product of
/// two rows), scaled to unit Hermitian norm.
pub fn null_vector_complex(m: &[[Complex64; 3]; 3]) -> Option<[Complex64; 3]> {
    let cnorm = |v: &[Complex64; 3]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let best = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| cross(&m[i], &m[j]))
        .max_by(|a, b| cnorm(a).partial_cmp(&cnorm(b)).unwrap_or(Ordering::Equal))?;
    let n = cnorm(&best);
    if n < 1e-12 {
        return None;
    }
    Some(best.map(|z| z / n))
}

/// Gaussian elimination with partial pivoting on a complex 3x3 system.
pub fn solve3_complex(m: &[[Complex64; 3]; 3], b: &[Complex64; 3]) -> Option<[Complex64; 3]> {
    let mut a = *m;
    let mut x = *b;
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| {
            a[i][col]
                .norm()
                .partial_cmp(&a[j][col].norm())
                .unwrap_or(Ordering::Equal)
        })?;
        if a[piv][col].norm() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        x.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                let t = a[col][k];
                a[row][k] -= f * t;
            }
            let t = x[col];
            x[row] -= f * t;
        }
    }
    for col in (0..3).rev() {
        let mut s = x[col];
        for k in col + 1..3 {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

pub fn solve3(m: &Mat3, b: &[f64; 3]) -> Option<[f64; 3]> {
    let x = solve3_complex(&m.to_complex(), &b.map(|v| Complex64::new(v, 0.0)))?;
    Some(x.map(|z| z.re))
}
