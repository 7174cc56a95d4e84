//! Dense matrix kernels: spectra, Lyapunov/Sylvester solves, matrix
//! exponential and fixed-step covariance integration.

use nalgebra::{ComplexField, DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{CMatrix, RMatrix};

/// Lyapunov equations up to this dimension are solved through the vectorized
/// Kronecker system; larger ones go through the Schur (Bartels-Stewart) path.
pub const KRONECKER_MAX_DIM: usize = 16;

/// Default RK4 step in units of `1/Γ`.
pub const DEFAULT_DT: f64 = 1e-3;

/// Covariance integration aborts once any entry exceeds this magnitude.
pub const BLOWUP_LIMIT: f64 = 1e12;

const SCHUR_MAX_ITER: usize = 20_000;

/// Matrix entry types accepted by the kernels (`f64` and `Complex64`).
pub trait Entry: ComplexField<RealField = f64> + Copy {
    fn to_complex(self) -> Complex64;
    /// Map a complex value back into `Self`. Real entries keep the real part.
    fn from_complex(z: Complex64) -> Self;
    fn is_finite_entry(self) -> bool;
}

impl Entry for f64 {
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_complex(z: Complex64) -> Self {
        z.re
    }
    fn is_finite_entry(self) -> bool {
        self.is_finite()
    }
}

impl Entry for Complex64 {
    fn to_complex(self) -> Complex64 {
        self
    }
    fn from_complex(z: Complex64) -> Self {
        z
    }
    fn is_finite_entry(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

fn to_complex<T: Entry>(a: &DMatrix<T>) -> CMatrix {
    a.map(Entry::to_complex)
}

fn from_complex<T: Entry>(a: &CMatrix) -> DMatrix<T> {
    a.map(T::from_complex)
}

/// Largest absolute entry.
pub fn max_abs<T: Entry>(a: &DMatrix<T>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.modulus()))
}

fn check_square<T: Entry>(a: &DMatrix<T>, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::InvalidParameter(format!(
            "{what} must be square and non-empty, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

fn check_finite<T: Entry>(a: &DMatrix<T>, what: &str) -> Result<()> {
    if a.iter().all(|x| x.is_finite_entry()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} has non-finite entries")))
    }
}

/// Complex Schur form `A = Q T Q†` with `T` upper triangular.
fn complex_schur(a: CMatrix) -> Result<(CMatrix, CMatrix)> {
    Schur::try_new(a, f64::EPSILON, SCHUR_MAX_ITER)
        .map(Schur::unpack)
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))
}

/// All eigenvalues of a square matrix.
pub fn eigenvalues<T: Entry>(a: &DMatrix<T>) -> Result<Vec<Complex64>> {
    check_square(a, "matrix")?;
    check_finite(a, "matrix")?;
    let (_, t) = complex_schur(to_complex(a))?;
    Ok(t.diagonal().iter().copied().collect())
}

/// `max Re(λ)` over the spectrum of `a`.
pub fn spectral_abscissa<T: Entry>(a: &DMatrix<T>) -> Result<f64> {
    Ok(eigenvalues(a)?
        .into_iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Pre-factored Schur forms of `A` and `B` for repeated `AX + XB = C` solves.
struct SylvesterSchur {
    u: CMatrix,
    t: CMatrix,
    w: CMatrix,
    r: CMatrix,
    scale: f64,
}

impl SylvesterSchur {
    fn new(a: &CMatrix, b: &CMatrix) -> Result<Self> {
        let scale = 1.0 + max_abs(a).max(max_abs(b));
        let (u, t) = complex_schur(a.clone())?;
        let (w, r) = complex_schur(b.clone())?;
        Ok(Self { u, t, w, r, scale })
    }

    fn solve(&self, c: &CMatrix) -> Result<CMatrix> {
        let m = self.t.nrows();
        let n = self.r.nrows();
        let f = self.u.adjoint() * c * &self.w;
        let mut y = CMatrix::zeros(m, n);
        let tol = 1e-14 * self.scale;
        // T y_k + sum_{j<=k} R_jk y_j = f_k, column by column.
        for k in 0..n {
            let mut rhs = f.column(k).into_owned();
            for j in 0..k {
                let rjk = self.r[(j, k)];
                if rjk != Complex64::new(0.0, 0.0) {
                    rhs -= y.column(j) * rjk;
                }
            }
            let shift = self.r[(k, k)];
            for i in (0..m).rev() {
                let mut acc = rhs[i];
                for l in (i + 1)..m {
                    acc -= self.t[(i, l)] * y[(l, k)];
                }
                let pivot = self.t[(i, i)] + shift;
                if pivot.norm() <= tol {
                    return Err(Error::NumericalFailure(format!(
                        "Sylvester spectra collide: λ_A + λ_B = {pivot:.3e}"
                    )));
                }
                y[(i, k)] = acc / pivot;
            }
        }
        Ok(&self.u * y * self.w.adjoint())
    }
}

/// Solve `AX + XB = C` by the Bartels-Stewart method on complex Schur forms,
/// followed by one step of iterative refinement.
pub fn solve_sylvester<T: Entry>(a: &DMatrix<T>, b: &DMatrix<T>, c: &DMatrix<T>) -> Result<DMatrix<T>> {
    let m = check_square(a, "A")?;
    let n = check_square(b, "B")?;
    if c.shape() != (m, n) {
        return Err(Error::InvalidParameter(format!(
            "C must be {m}x{n}, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    check_finite(a, "A")?;
    check_finite(b, "B")?;
    check_finite(c, "C")?;

    let (ac, bc, cc) = (to_complex(a), to_complex(b), to_complex(c));
    let schur = SylvesterSchur::new(&ac, &bc)?;
    let mut x = schur.solve(&cc)?;
    let residual = &cc - (&ac * &x + &x * &bc);
    x += schur.solve(&residual)?;
    Ok(from_complex(&x))
}

/// Solve `SX + XSᵀ + Q = 0` through the vectorized system
/// `(I ⊗ S + S ⊗ I) vec(X) = -vec(Q)`.
pub fn solve_lyapunov_kronecker<T: Entry>(s: &DMatrix<T>, q: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = check_square(s, "S")?;
    if q.shape() != (n, n) {
        return Err(Error::InvalidParameter(format!("Q must be {n}x{n}")));
    }
    let nn = n * n;
    let mut k = DMatrix::<T>::zeros(nn, nn);
    // Column-major vec: index of X_ij is i + n*j.
    for j in 0..n {
        for i in 0..n {
            let row = i + n * j;
            for l in 0..n {
                // (S X)_ij = sum_l S_il X_lj
                k[(row, l + n * j)] += s[(i, l)];
                // (X Sᵀ)_ij = sum_l X_il S_jl
                k[(row, i + n * l)] += s[(j, l)];
            }
        }
    }
    let rhs = DMatrix::<T>::from_iterator(nn, 1, q.iter().map(|&x| -x));
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NumericalFailure("singular Kronecker Lyapunov system".into()))?;
    Ok(DMatrix::from_iterator(n, n, sol.iter().copied()))
}

fn is_symmetric<T: Entry>(q: &DMatrix<T>) -> bool {
    let tol = 1e-14 * (1.0 + max_abs(q));
    (q - q.transpose()).iter().all(|x| x.modulus() <= tol)
}

/// Solve `SX + XSᵀ + Q = 0` for stable `S`.
///
/// Marginal or unstable drifts (abscissa `>= 0`) are rejected with
/// [`Error::UnstableDynamics`]. When `Q` is symmetric the result is exactly
/// symmetric.
pub fn solve_lyapunov<T: Entry>(s: &DMatrix<T>, q: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = check_square(s, "S")?;
    if q.shape() != (n, n) {
        return Err(Error::InvalidParameter(format!("Q must be {n}x{n}")));
    }
    check_finite(s, "S")?;
    check_finite(q, "Q")?;
    let abscissa = spectral_abscissa(s)?;
    if abscissa >= 0.0 {
        return Err(Error::UnstableDynamics { abscissa });
    }
    let mut x = if n <= KRONECKER_MAX_DIM {
        solve_lyapunov_kronecker(s, q)?
    } else {
        let neg_q = -q;
        solve_sylvester(s, &s.transpose(), &neg_q)?
    };
    if is_symmetric(q) {
        x = (&x + x.transpose()) * T::from_real(0.5);
    }
    check_finite(&x, "Lyapunov solution").map_err(|_| {
        Error::NumericalFailure("Lyapunov solution is not finite".into())
    })?;
    Ok(x)
}

/// `exp(A t)`. Returns the identity exactly for `t == 0`.
pub fn expm<T: Entry>(a: &DMatrix<T>, t: f64) -> Result<DMatrix<T>> {
    let n = check_square(a, "A")?;
    check_finite(a, "A")?;
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
    }
    if t == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let e = (a * T::from_real(t)).exp();
    if e.iter().all(|x| x.is_finite_entry()) {
        Ok(e)
    } else {
        Err(Error::NumericalFailure("matrix exponential overflowed".into()))
    }
}

fn covariance_rhs(s: &RMatrix, st: &RMatrix, d: &RMatrix, v: &RMatrix) -> RMatrix {
    s * v + v * st + d
}

/// RK4 solution of `dV/dt = SV + VSᵀ + D` at `t_end`.
///
/// The step count is `ceil(t_end / dt)` with the step shortened uniformly so
/// the final time is hit exactly. `V` is symmetrized after every step.
pub fn integrate_covariance_ode(s: &RMatrix, d: &RMatrix, v0: &RMatrix, t_end: f64, dt: f64) -> Result<RMatrix> {
    let n = check_square(s, "S")?;
    if d.shape() != (n, n) || v0.shape() != (n, n) {
        return Err(Error::InvalidParameter(format!("D and V0 must be {n}x{n}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end must be non-negative, got {t_end}")));
    }
    check_finite(s, "S")?;
    check_finite(d, "D")?;
    check_finite(v0, "V0")?;

    let mut v = v0.clone();
    if t_end == 0.0 {
        return Ok(v);
    }
    let steps = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let st = s.transpose();
    for step in 0..steps {
        let k1 = covariance_rhs(s, &st, d, &v);
        let k2 = covariance_rhs(s, &st, d, &(&v + &k1 * (h / 2.0)));
        let k3 = covariance_rhs(s, &st, d, &(&v + &k2 * (h / 2.0)));
        let k4 = covariance_rhs(s, &st, d, &(&v + &k3 * h));
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        v = (&v + v.transpose()) * 0.5;
        let norm = max_abs(&v);
        if norm.is_nan() || norm > BLOWUP_LIMIT {
            return Err(Error::NumericalFailure(format!(
                "covariance integration blew up at step {step} (|V|max = {norm:.3e})"
            )));
        }
    }
    Ok(v)
}
