//! Characteristic polynomials of small dense matrices and simultaneous
//! polynomial root finding.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients of `det(lambda I - M)`, lowest degree first, leading
/// coefficient 1.
///
/// Uses the Faddeev-LeVerrier recurrence
///
/// ```text
/// M_1 = I,            c_{n-1} = -tr(M)
/// M_k = M M_{k-1} + c_{n-k+1} I,   c_{n-k} = -tr(M M_k) / k
/// ```
pub fn faddeev_leverrier<const N: usize>(m: &[[f64; N]; N]) -> [f64; N] {
    let mut coeffs = [0.0; N];
    let mut mk = [[0.0; N]; N];
    for (i, row) in mk.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut prev = 1.0;
    for k in 1..=N {
        if k > 1 {
            for (i, row) in mk.iter_mut().enumerate() {
                row[i] += prev;
            }
        }
        let am = matmul(m, &mk);
        let trace: f64 = (0..N).map(|i| am[i][i]).sum();
        let c = -trace / k as f64;
        coeffs[N - k] = c;
        prev = c;
        mk = am;
    }
    coeffs
}

fn matmul<const N: usize>(a: &[[f64; N]; N], b: &[[f64; N]; N]) -> [[f64; N]; N] {
    let mut out = [[0.0; N]; N];
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..N {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// A monic polynomial `z^n + c[n-1] z^(n-1) + ... + c[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicPoly {
    /// Lower coefficients, lowest degree first.
    pub coeffs: Vec<f64>,
}

impl MonicPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        MonicPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// Value and derivative at `z` (Horner).
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(1.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_with_derivative(z).0
    }

    /// `|P(z)| / sum |c_i| |z|^i`, the relative backward error of `z` as a
    /// root.
    pub fn relative_residual(&self, z: Complex64) -> f64 {
        let r = z.norm();
        let mut scale = 1.0;
        for &c in self.coeffs.iter().rev() {
            scale = scale * r + c.abs();
        }
        let value = self.eval(z).norm();
        if scale == 0.0 {
            value
        } else {
            value / scale
        }
    }

    /// Cauchy bound: every root has modulus below `1 + max |c_i|`.
    fn root_bound(&self) -> f64 {
        1.0 + self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

pub const ROOT_TOL: f64 = 1e-12;
pub const ROOT_MAX_ITER: usize = 500;

/// All roots of `poly` by Aberth-Ehrlich simultaneous iteration.
///
/// Exact zero roots (vanishing trailing coefficients) are split off first.
/// The iteration stops once every correction is below
/// `tol * max(1, |z|)`; failing that within `max_iter` sweeps is a
/// [`Error::Convergence`].
pub fn aberth_roots(poly: &MonicPoly, tol: f64, max_iter: usize) -> Result<Vec<Complex64>> {
    let zeros = poly.coeffs.iter().take_while(|c| **c == 0.0).count();
    let reduced = MonicPoly::new(poly.coeffs[zeros..].to_vec());
    let n = reduced.degree();
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if n == 0 {
        return Ok(roots);
    }

    // Starting points spread on a circle, rotated off the real axis so that
    // conjugate pairs are not started symmetrically.
    let radius = initial_radius(&reduced);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();

    let mut last_step = f64::INFINITY;
    for _ in 0..max_iter {
        let mut done = true;
        last_step = 0.0;
        for i in 0..n {
            let (p, dp) = reduced.eval_with_derivative(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = newton / (Complex64::new(1.0, 0.0) - newton * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[i] -= step;
            let size = step.norm() / z[i].norm().max(1.0);
            last_step = last_step.max(size);
            if size > tol {
                done = false;
            }
        }
        if done {
            roots.extend(z);
            return Ok(roots);
        }
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual: last_step,
    })
}

fn initial_radius(poly: &MonicPoly) -> f64 {
    // geometric mean of root moduli, |c_0|^(1/n), capped by the Cauchy bound
    let n = poly.degree() as f64;
    let c0 = poly.coeffs[0].abs();
    let r = if c0 > 0.0 { c0.powf(1.0 / n) } else { 1.0 };
    r.min(poly.root_bound()).max(1e-3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leverrier_matches_known_polynomials() {
        // companion-like matrix of z^3 - 6z^2 + 11z - 6
        let m = [[6.0, -11.0, 6.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let c = faddeev_leverrier(&m);
        assert_eq!(c, [-6.0, 11.0, -6.0]);

        let d = [[2.0, 0.0], [0.0, 3.0]];
        assert_eq!(faddeev_leverrier(&d), [6.0, -5.0]);
    }

    #[test]
    fn aberth_finds_simple_roots() {
        // (z-1)(z-2)(z-3)
        let p = MonicPoly::new(vec![-6.0, 11.0, -6.0]);
        let mut roots = aberth_roots(&p, ROOT_TOL, ROOT_MAX_ITER).unwrap();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (r, want) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((r.re - want).abs() < 1e-10 && r.im.abs() < 1e-10);
        }
    }

    #[test]
    fn aberth_handles_complex_and_zero_roots() {
        // z^2 (z^2 + 1)
        let p = MonicPoly::new(vec![0.0, 0.0, 1.0, 0.0]);
        let roots = aberth_roots(&p, ROOT_TOL, ROOT_MAX_ITER).unwrap();
        assert_eq!(roots.len(), 4);
        assert_eq!(roots.iter().filter(|r| r.norm() == 0.0).count(), 2);
        for r in roots.iter().filter(|r| r.norm() > 0.0) {
            assert!((r.norm() - 1.0).abs() < 1e-10 && r.re.abs() < 1e-10);
        }
        let all_zero = MonicPoly::new(vec![0.0; 6]);
        assert_eq!(
            aberth_roots(&all_zero, ROOT_TOL, ROOT_MAX_ITER)
                .unwrap()
                .len(),
            6
        );
    }

    #[test]
    fn relative_residual_is_zero_at_exact_roots() {
        let p = MonicPoly::new(vec![-2.0, 0.0]);
        assert!(p.relative_residual(Complex64::new(2f64.sqrt(), 0.0)) < 1e-15);
    }
}
