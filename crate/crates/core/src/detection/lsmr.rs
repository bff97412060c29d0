use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Error, Result};
use crate::numerics::{dot_conj, norm_sqr};

/// A linear map together with its Hermitian adjoint.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>>;
    fn apply_adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>>;
}

/// Operator built from a pair of closures.
pub struct FnOperator<F, G> {
    pub rows: usize,
    pub cols: usize,
    pub forward: F,
    pub adjoint: G,
}

impl<F, G> LinearOperator for FnOperator<F, G>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
    G: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        (self.forward)(x)
    }
    fn apply_adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        (self.adjoint)(y)
    }
}

impl LinearOperator for crate::numerics::ComplexMatrix {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn ncols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.ncols(), x.len())?;
        Ok((self * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec())
    }
    fn apply_adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.nrows(), y.len())?;
        Ok((self.adjoint() * nalgebra::DVector::from_column_slice(y)).as_slice().to_vec())
    }
}

/// Relative tolerance of the adjoint consistency check.
pub const ADJOINT_TOLERANCE: f64 = 1e-6;
/// Relative stopping tolerance on the normal-equation residual.
pub const LSMR_TOLERANCE: f64 = 1e-8;

/// Checks `⟨Ax, y⟩ = ⟨x, Aᴴy⟩` on a pair of fixed pseudo-random vectors.
pub fn dot_test<A: LinearOperator + ?Sized>(op: &A) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut draw = |n: usize| -> Vec<Complex64> {
        (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect()
    };
    let x = draw(op.ncols());
    let y = draw(op.nrows());
    let ax = op.apply(&x)?;
    let ahy = op.apply_adjoint(&y)?;
    check_len(op.nrows(), ax.len())?;
    check_len(op.ncols(), ahy.len())?;
    let lhs = dot_conj(&y, &ax);
    let rhs = dot_conj(&ahy, &x);
    let scale = (norm_sqr(&ax) * norm_sqr(&y)).sqrt().max(f64::MIN_POSITIVE);
    let mismatch = (lhs - rhs).norm() / scale;
    if mismatch > ADJOINT_TOLERANCE {
        return Err(Error::AdjointMismatch { mismatch });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsmrSolution {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// Estimate of `‖Aᴴr‖` (damped) at exit.
    pub normal_residual: f64,
}

fn scale_into(dst: &mut [Complex64], src: &[Complex64], s: f64) {
    dst.iter_mut().zip(src).for_each(|(d, v)| *d = v * s);
}

/// LSMR for `min ‖y - Ax‖² + damping² ‖x‖²`.
///
/// Runs at most `iters` Golub-Kahan steps and stops early once the damped
/// normal-equation residual falls below `1e-8` of its initial value. The
/// operator is dot-tested first.
pub fn lsmr_solve<A: LinearOperator + ?Sized>(
    op: &A,
    y: &[Complex64],
    iters: usize,
    damping: f64,
) -> Result<LsmrSolution> {
    check_len(op.nrows(), y.len())?;
    if !(damping >= 0.0 && damping.is_finite()) {
        return Err(Error::invalid("damping must be finite and nonnegative"));
    }
    dot_test(op)?;
    let n = op.ncols();
    let mut x = vec![Complex64::default(); n];

    let mut u = y.to_vec();
    let mut beta = norm_sqr(&u).sqrt();
    if beta > 0.0 {
        u.iter_mut().for_each(|v| *v /= beta);
    }
    let mut v = op.apply_adjoint(&u)?;
    let mut alpha = norm_sqr(&v).sqrt();
    if alpha > 0.0 {
        v.iter_mut().for_each(|e| *e /= alpha);
    }

    let mut zetabar = alpha * beta;
    let initial = zetabar;
    let mut alphabar = alpha;
    let (mut rho, mut rhobar, mut cbar, mut sbar) = (1.0, 1.0, 1.0, 0.0);
    let mut h = v.clone();
    let mut hbar = vec![Complex64::default(); n];
    let mut done = 0;

    if initial == 0.0 {
        return Ok(LsmrSolution {
            x,
            iterations: 0,
            normal_residual: 0.0,
        });
    }

    for k in 1..=iters {
        done = k;
        // bidiagonalisation step
        let av = op.apply(&v)?;
        u.iter_mut().zip(&av).for_each(|(ui, a)| *ui = a - *ui * alpha);
        beta = norm_sqr(&u).sqrt();
        if beta > 0.0 {
            u.iter_mut().for_each(|e| *e /= beta);
            let ahu = op.apply_adjoint(&u)?;
            v.iter_mut().zip(&ahu).for_each(|(vi, a)| *vi = a - *vi * beta);
            alpha = norm_sqr(&v).sqrt();
            if alpha > 0.0 {
                v.iter_mut().for_each(|e| *e /= alpha);
            }
        } else {
            alpha = 0.0;
        }

        // rotation eliminating the damping term
        let alphahat = alphabar.hypot(damping);

        let rhoold = rho;
        rho = alphahat.hypot(beta);
        let (c, s) = (alphahat / rho, beta / rho);
        let thetanew = s * alpha;
        alphabar = c * alpha;

        let rhobarold = rhobar;
        let thetabar = sbar * rho;
        let rhotemp = cbar * rho;
        rhobar = rhotemp.hypot(thetanew);
        cbar = rhotemp / rhobar;
        sbar = thetanew / rhobar;
        let zeta = cbar * zetabar;
        zetabar *= -sbar;

        let hb = thetabar * rho / (rhoold * rhobarold);
        hbar.iter_mut().zip(&h).for_each(|(b, hi)| *b = hi - *b * hb);
        let step = zeta / (rho * rhobar);
        x.iter_mut().zip(&hbar).for_each(|(xi, b)| *xi += b * step);
        let hn = thetanew / rho;
        let mut next = vec![Complex64::default(); n];
        scale_into(&mut next, &h, -hn);
        next.iter_mut().zip(&v).for_each(|(e, vi)| *e += vi);
        h = next;

        if zetabar.abs() <= LSMR_TOLERANCE * initial || alpha == 0.0 {
            break;
        }
    }
    Ok(LsmrSolution {
        x,
        iterations: done,
        normal_residual: zetabar.abs(),
    })
}
