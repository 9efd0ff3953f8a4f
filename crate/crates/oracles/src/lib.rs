//! Brute-force and scalar reference computations.
//!
//! Nothing here depends on the simulator; each function recomputes a
//! quantity from first principles so tests can compare against it.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;

pub const FOCK_CUTOFF: usize = 40;

fn annihilation(dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `D(α)S(ξ)|0⟩` in a truncated Fock basis, with
/// `S(ξ) = exp((ξ* a² − ξ a†²)/2)` and `D(α) = exp(α a† − α* a)`.
pub fn displaced_squeezed_vacuum(alpha: Complex64, xi: Complex64, dim: usize) -> DVector<Complex64> {
    let a = annihilation(dim);
    let ad = a.adjoint();
    let squeeze = ((&a * &a) * xi.conj() - (&ad * &ad) * xi) * Complex64::new(0.5, 0.0);
    let displace = &ad * alpha - &a * alpha.conj();
    let mut vacuum = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    vacuum[0] = Complex64::new(1.0, 0.0);
    displace.exp() * (squeeze.exp() * vacuum)
}

/// Mean and variance of the photon number of a Fock-basis state vector.
pub fn fock_photon_stats(state: &DVector<Complex64>) -> (f64, f64) {
    let norm: f64 = state.iter().map(|c| c.norm_sqr()).sum();
    let moment = |p: i32| -> f64 {
        state.iter().enumerate().map(|(n, c)| (n as f64).powi(p) * c.norm_sqr()).sum::<f64>() / norm
    };
    let mean = moment(1);
    (mean, moment(2) - mean * mean)
}

/// Least-squares fit `A + B cos φ + C sin φ`; returns `(A, amplitude, max
/// residual)`.
pub fn cosine_fit(phi: &[f64], values: &[f64]) -> (f64, f64, f64) {
    let mut normal = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for (&p, &v) in phi.iter().zip(values) {
        let basis = Vector3::new(1.0, p.cos(), p.sin());
        normal += basis * basis.transpose();
        rhs += basis * v;
    }
    let coef = normal.lu().solve(&rhs).expect("degenerate cosine fit");
    let residual = phi
        .iter()
        .zip(values)
        .map(|(&p, &v)| (v - (coef[0] + coef[1] * p.cos() + coef[2] * p.sin())).abs())
        .fold(0.0, f64::max);
    (coef[0], coef[1].hypot(coef[2]), residual)
}

/// Loop parameters for the scalar oracles. Drives are real and the total
/// atomic phase per loop is `delta`.
#[derive(Debug, Clone, Copy)]
pub struct ScalarLoop {
    pub r_forward: f64,
    pub r_backward: f64,
    pub transmissivity: f64,
    pub decay: f64,
    pub delta: f64,
    pub phi: f64,
}

impl ScalarLoop {
    /// Heisenberg coefficients of the atomic operator after one loop, before
    /// decay: `a'' = m·a + ν·b† + κ·v†` for atom `a`, fresh light `b` and the
    /// optical loss port `v`.
    fn coefficients(&self) -> (Complex64, Complex64, f64) {
        let (cf, sf) = (self.r_forward.cosh(), self.r_forward.sinh());
        let (cb, sb) = (self.r_backward.cosh(), self.r_backward.sinh());
        let t = self.transmissivity.sqrt();
        let atom = Complex64::from_polar(1.0, self.delta);
        let light = Complex64::from_polar(t, -self.phi);
        let m = atom * (cb * cf) + light * (sb * sf);
        let nu = atom * (cb * sf) + light * (sb * cf);
        (m, nu, sb * (1.0 - self.transmissivity).sqrt())
    }

    /// One step of the atomic occupation map for a thermal atom and vacuum
    /// light input.
    pub fn next_occupation(&self, n: f64) -> f64 {
        let (m, nu, kappa) = self.coefficients();
        (1.0 - self.decay) * (m.norm_sqr() * n + nu.norm_sqr() + kappa * kappa)
    }

    /// Iterates the occupation map from the vacuum to a fixed point.
    pub fn steady_occupation(&self, tol: f64, max_steps: usize) -> Option<f64> {
        let mut n = 0.0;
        for _ in 0..max_steps {
            let next = self.next_occupation(n);
            if (next - n).abs() <= tol * next.abs().max(1.0) {
                return Some(next);
            }
            n = next;
        }
        None
    }

    /// Asymptotic ratio of successive comb tooth amplitudes.
    pub fn tooth_ratio(&self) -> f64 {
        let (cf, sf) = (self.r_forward.cosh(), self.r_forward.sinh());
        let (cb, sb) = (self.r_backward.cosh(), self.r_backward.sinh());
        let survival = (1.0 - self.decay).sqrt();
        let direct = Complex64::from_polar(survival * cb * cf, -self.delta);
        survival * sb * sf * self.transmissivity.sqrt() / (Complex64::new(1.0, 0.0) - direct).norm()
    }
}
