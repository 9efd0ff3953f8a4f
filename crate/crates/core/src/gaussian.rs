//! Gaussian states and the linear channels acting on them.
//!
//! Quadratures are ordered `(x1, p1, x2, p2, ...)` with `x = a + a†` and
//! `p = -i(a - a†)`, so the vacuum covariance is the identity (shot-noise
//! units) and a coherent amplitude `α` has mean `(2 Re α, 2 Im α)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_range, Error, Result};

/// Tolerance used when validating the uncertainty relation `cov + iΩ ⪰ 0`.
pub const PHYSICALITY_TOL: f64 = 1e-10;

/// Standard symplectic form for `modes` modes.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Smallest eigenvalue of the Hermitian matrix `real + i·imag`.
fn min_hermitian_eigenvalue(real: &DMatrix<f64>, imag: &DMatrix<f64>) -> f64 {
    let n = real.nrows();
    let h = DMatrix::from_fn(n, n, |r, c| {
        // symmetrize to absorb rounding asymmetry
        let re = 0.5 * (real[(r, c)] + real[(c, r)]);
        let im = 0.5 * (imag[(r, c)] - imag[(c, r)]);
        Complex64::new(re, im)
    });
    h.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Mean photon number and photon-number variance of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonStats {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    labels: Vec<String>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Vacuum on `modes` modes labelled `m0, m1, ...`.
    pub fn vacuum(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::NoModes);
        }
        let labels = (0..modes).map(|k| format!("m{k}")).collect();
        Ok(Self {
            labels,
            mean: DVector::zeros(2 * modes),
            cov: DMatrix::identity(2 * modes, 2 * modes),
        })
    }

    pub fn vacuum_labeled<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let mut state = Self::vacuum(labels.len())?;
        state.labels = labels.iter().map(|s| s.as_ref().to_owned()).collect();
        Ok(state)
    }

    /// Single-mode coherent state with complex amplitude `alpha`.
    pub fn coherent(alpha: Complex64) -> Self {
        Self {
            labels: vec!["m0".to_owned()],
            mean: DVector::from_vec(vec![2.0 * alpha.re, 2.0 * alpha.im]),
            cov: DMatrix::identity(2, 2),
        }
    }

    /// Builds a state from raw moments, checking dimensions and symmetry.
    ///
    /// The uncertainty relation is not enforced here; use
    /// [`GaussianState::is_physical`] when the input is untrusted.
    pub fn from_moments(labels: Vec<String>, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::NoModes);
        }
        let dim = 2 * labels.len();
        if mean.len() != dim {
            return Err(Error::DimensionMismatch { channel: dim, state: mean.len() });
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch { channel: dim, state: cov.nrows() });
        }
        let asym = (&cov - cov.transpose()).amax();
        check_range("covariance asymmetry", asym, "<= 1e-12", asym <= 1e-12)?;
        Ok(Self { labels, mean, cov })
    }

    pub fn with_label(mut self, mode: usize, label: &str) -> Result<Self> {
        self.check_mode(mode)?;
        self.labels[mode] = label.to_owned();
        Ok(self)
    }

    pub fn modes(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mode_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.modes() {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange { index: mode, modes: self.modes() })
        }
    }

    /// Complex mean amplitude `⟨a⟩` of one mode.
    pub fn amplitude(&self, mode: usize) -> Result<Complex64> {
        self.check_mode(mode)?;
        Ok(Complex64::new(self.mean[2 * mode], self.mean[2 * mode + 1]) * 0.5)
    }

    /// Product state `self ⊗ other`, modes of `other` appended.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let n = self.mean.len();
        let m = other.mean.len();
        let mut mean = DVector::zeros(n + m);
        mean.rows_mut(0, n).copy_from(&self.mean);
        mean.rows_mut(n, m).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(n + m, n + m);
        cov.view_mut((0, 0), (n, n)).copy_from(&self.cov);
        cov.view_mut((n, n), (m, m)).copy_from(&other.cov);
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        GaussianState { labels, mean, cov }
    }

    /// Partial trace keeping `keep` (in the given order).
    pub fn reduce(&self, keep: &[usize]) -> Result<GaussianState> {
        if keep.is_empty() {
            return Err(Error::NoModes);
        }
        for &k in keep {
            self.check_mode(k)?;
        }
        let quad: Vec<usize> = keep.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        let mean = DVector::from_fn(quad.len(), |r, _| self.mean[quad[r]]);
        let cov = DMatrix::from_fn(quad.len(), quad.len(), |r, c| self.cov[(quad[r], quad[c])]);
        let labels = keep.iter().map(|&k| self.labels[k].clone()).collect();
        Ok(GaussianState { labels, mean, cov })
    }

    /// Smallest eigenvalue of `cov + iΩ`; non-negative for physical states.
    pub fn uncertainty_margin(&self) -> f64 {
        min_hermitian_eigenvalue(&self.cov, &symplectic_form(self.modes()))
    }

    pub fn is_physical(&self) -> bool {
        let asym = (&self.cov - self.cov.transpose()).amax();
        asym <= 1e-12 * self.cov.amax().max(1.0) && self.uncertainty_margin() >= -PHYSICALITY_TOL
    }

    /// Exact photon-number mean and variance of `mode`.
    ///
    /// With `V` the 2x2 covariance block and `d` the mean quadratures:
    /// `⟨n⟩ = (tr V − 2)/4 + |d|²/4` and
    /// `Var n = tr(V²)/8 − 1/4 + dᵀVd/4`.
    pub fn photon_stats(&self, mode: usize) -> Result<PhotonStats> {
        self.check_mode(mode)?;
        let i = 2 * mode;
        let (vxx, vxp, vpp) = (self.cov[(i, i)], self.cov[(i, i + 1)], self.cov[(i + 1, i + 1)]);
        let vpx = self.cov[(i + 1, i)];
        let (x, p) = (self.mean[i], self.mean[i + 1]);
        let mean = (vxx + vpp - 2.0) / 4.0 + (x * x + p * p) / 4.0;
        let tr_v2 = vxx * vxx + vpp * vpp + vxp * vpx + vpx * vxp;
        let dvd = x * x * vxx + x * p * (vxp + vpx) + p * p * vpp;
        let variance = tr_v2 / 8.0 - 0.25 + dvd / 4.0;
        Ok(PhotonStats { mean: mean.max(0.0), variance: variance.max(0.0) })
    }
}

/// Linear bosonic channel `mean → A·mean + d`, `cov → A·cov·Aᵀ + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    transfer: DMatrix<f64>,
    noise: DMatrix<f64>,
    displacement: DVector<f64>,
}

fn check_index(index: usize, modes: usize) -> Result<()> {
    if modes == 0 {
        return Err(Error::NoModes);
    }
    if index < modes {
        Ok(())
    } else {
        Err(Error::ModeOutOfRange { index, modes })
    }
}

fn check_pair(pair: (usize, usize), modes: usize) -> Result<()> {
    check_index(pair.0, modes)?;
    check_index(pair.1, modes)?;
    if pair.0 == pair.1 {
        return Err(Error::CoincidentModes(pair.0));
    }
    Ok(())
}

fn rotation(angle: f64) -> [[f64; 2]; 2] {
    let (s, c) = angle.sin_cos();
    [[c, -s], [s, c]]
}

impl GaussianChannel {
    pub fn identity(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::NoModes);
        }
        let n = 2 * modes;
        Ok(Self {
            transfer: DMatrix::identity(n, n),
            noise: DMatrix::zeros(n, n),
            displacement: DVector::zeros(n),
        })
    }

    /// Channel from raw parts. `noise` must be symmetric.
    pub fn from_parts(transfer: DMatrix<f64>, noise: DMatrix<f64>, displacement: DVector<f64>) -> Result<Self> {
        let n = transfer.nrows();
        if n == 0 || !n.is_multiple_of(2) || transfer.ncols() != n {
            return Err(Error::DimensionMismatch { channel: n, state: transfer.ncols() });
        }
        if noise.shape() != (n, n) || displacement.len() != n {
            return Err(Error::DimensionMismatch { channel: n, state: noise.nrows() });
        }
        Ok(Self { transfer, noise, displacement })
    }

    pub fn transfer(&self) -> &DMatrix<f64> {
        &self.transfer
    }

    pub fn noise(&self) -> &DMatrix<f64> {
        &self.noise
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }

    pub fn modes(&self) -> usize {
        self.transfer.nrows() / 2
    }

    fn set_block(&mut self, row: usize, col: usize, block: [[f64; 2]; 2]) {
        for (r, line) in block.iter().enumerate() {
            for (c, v) in line.iter().enumerate() {
                self.transfer[(2 * row + r, 2 * col + c)] = *v;
            }
        }
    }

    /// Two-mode squeezer `a → cosh r·a + e^{iθ} sinh r·b†` (and `a ↔ b`).
    ///
    /// Realizes the parametric (Raman) gain `G = cosh r`, `g = sinh r`.
    pub fn two_mode_squeezer(modes: usize, r: f64, theta: f64, pair: (usize, usize)) -> Result<Self> {
        check_range("squeeze parameter", r, "[0, inf)", r >= 0.0)?;
        check_pair(pair, modes)?;
        let (c, s) = (r.cosh(), r.sinh());
        let (st, ct) = theta.sin_cos();
        let cross = [[s * ct, s * st], [s * st, -s * ct]];
        let mut ch = Self::identity(modes)?;
        ch.set_block(pair.0, pair.0, [[c, 0.0], [0.0, c]]);
        ch.set_block(pair.1, pair.1, [[c, 0.0], [0.0, c]]);
        ch.set_block(pair.0, pair.1, cross);
        ch.set_block(pair.1, pair.0, cross);
        Ok(ch)
    }

    /// Single-mode squeezer `S(r e^{iθ})`; θ = 0 squeezes `x`.
    pub fn single_mode_squeezer(modes: usize, r: f64, theta: f64, mode: usize) -> Result<Self> {
        check_range("squeeze parameter", r, "[0, inf)", r >= 0.0)?;
        check_index(mode, modes)?;
        let (st, ct) = theta.sin_cos();
        let (c, s) = (r.cosh(), r.sinh());
        let block = [[c - s * ct, -s * st], [-s * st, c + s * ct]];
        let mut ch = Self::identity(modes)?;
        ch.set_block(mode, mode, block);
        Ok(ch)
    }

    /// Phase rotation `a → e^{iφ} a`.
    pub fn phase_shift(modes: usize, phi: f64, mode: usize) -> Result<Self> {
        check_index(mode, modes)?;
        let mut ch = Self::identity(modes)?;
        ch.set_block(mode, mode, rotation(phi));
        Ok(ch)
    }

    /// Pure loss with power transmissivity `t`, coupling in vacuum.
    pub fn loss(modes: usize, t: f64, mode: usize) -> Result<Self> {
        check_range("transmissivity", t, "[0, 1]", (0.0..=1.0).contains(&t))?;
        check_index(mode, modes)?;
        let mut ch = Self::identity(modes)?;
        let a = t.sqrt();
        ch.set_block(mode, mode, [[a, 0.0], [0.0, a]]);
        let i = 2 * mode;
        ch.noise[(i, i)] = 1.0 - t;
        ch.noise[(i + 1, i + 1)] = 1.0 - t;
        Ok(ch)
    }

    /// Phase-insensitive amplifier `a → G a + g v†` with `g² = G² − 1`.
    pub fn amplifier(modes: usize, gain: f64, mode: usize) -> Result<Self> {
        check_range("amplitude gain", gain, "[1, inf)", gain >= 1.0)?;
        check_index(mode, modes)?;
        let mut ch = Self::identity(modes)?;
        ch.set_block(mode, mode, [[gain, 0.0], [0.0, gain]]);
        let i = 2 * mode;
        ch.noise[(i, i)] = gain * gain - 1.0;
        ch.noise[(i + 1, i + 1)] = gain * gain - 1.0;
        Ok(ch)
    }

    /// Lossless beam splitter with power transmissivity `t`:
    /// `a → √t a + √(1−t) b`, `b → √t b − √(1−t) a`.
    pub fn beam_splitter(modes: usize, t: f64, pair: (usize, usize)) -> Result<Self> {
        check_range("transmissivity", t, "[0, 1]", (0.0..=1.0).contains(&t))?;
        check_pair(pair, modes)?;
        let (ct, rt) = (t.sqrt(), (1.0 - t).sqrt());
        let mut ch = Self::identity(modes)?;
        ch.set_block(pair.0, pair.0, [[ct, 0.0], [0.0, ct]]);
        ch.set_block(pair.1, pair.1, [[ct, 0.0], [0.0, ct]]);
        ch.set_block(pair.0, pair.1, [[rt, 0.0], [0.0, rt]]);
        ch.set_block(pair.1, pair.0, [[-rt, 0.0], [0.0, -rt]]);
        Ok(ch)
    }

    /// Coherent displacement `a → a + α`.
    pub fn displacement_channel(modes: usize, alpha: Complex64, mode: usize) -> Result<Self> {
        check_index(mode, modes)?;
        let mut ch = Self::identity(modes)?;
        ch.displacement[2 * mode] = 2.0 * alpha.re;
        ch.displacement[2 * mode + 1] = 2.0 * alpha.im;
        Ok(ch)
    }

    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        if self.transfer.nrows() != state.mean.len() {
            return Err(Error::DimensionMismatch {
                channel: self.transfer.nrows(),
                state: state.mean.len(),
            });
        }
        let a = &self.transfer;
        let mean = a * &state.mean + &self.displacement;
        let mut cov = a * &state.cov * a.transpose() + &self.noise;
        // keep exact symmetry across long channel sequences
        cov = (&cov + cov.transpose()) * 0.5;
        Ok(GaussianState { labels: state.labels.clone(), mean, cov })
    }

    /// Channel equivalent to applying `self` first, then `next`.
    pub fn then(&self, next: &GaussianChannel) -> Result<GaussianChannel> {
        if self.transfer.nrows() != next.transfer.nrows() {
            return Err(Error::DimensionMismatch {
                channel: next.transfer.nrows(),
                state: self.transfer.nrows(),
            });
        }
        let b = &next.transfer;
        Ok(GaussianChannel {
            transfer: b * &self.transfer,
            noise: b * &self.noise * b.transpose() + &next.noise,
            displacement: b * &self.displacement + &next.displacement,
        })
    }

    /// Frobenius norm of `AΩAᵀ − Ω`.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = symplectic_form(self.modes());
        (&self.transfer * &omega * self.transfer.transpose() - omega).norm()
    }

    /// Smallest eigenvalue of `N + i(Ω − AΩAᵀ)`; non-negative iff the
    /// channel is completely positive.
    pub fn positivity_margin(&self) -> f64 {
        let omega = symplectic_form(self.modes());
        let imag = &omega - &self.transfer * &omega * self.transfer.transpose();
        min_hermitian_eigenvalue(&self.noise, &imag)
    }
}
