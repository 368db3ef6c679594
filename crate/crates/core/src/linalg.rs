//! Small dense linear-algebra helpers over `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Singular values below `SVD_REL_TOL * sigma_max` count as zero.
pub const SVD_REL_TOL: f64 = 1e-10;

/// Singular values between the zero threshold and `AMBIGUOUS_REL_TOL * sigma_max`
/// make the rank decision unreliable and are reported as errors.
pub const AMBIGUOUS_REL_TOL: f64 = 1e-7;

/// Convergence thresholds tried in turn by [`checked_svd`].
pub const SVD_EPS_LADDER: [f64; 4] = [5.0 * f64::EPSILON, 1e-14, 1e-13, 1e-12];

/// Largest accepted `max |U S V^T - M|` relative to `max(1, max |M|)`.
pub const SVD_RECONSTRUCTION_TOL: f64 = 1e-11;

pub type Svd = nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>;

/// SVD whose factors are verified: the iteration can stop early on
/// rank-deficient inputs and return factors that do not reproduce `m`, so
/// each threshold in [`SVD_EPS_LADDER`] is tried until reconstruction and
/// orthogonality hold.
pub fn checked_svd(m: &DMatrix<f64>) -> Result<Svd> {
    let scale = m.amax().max(1.0);
    let mut worst = f64::INFINITY;
    for eps in SVD_EPS_LADDER {
        let Some(dec) = m.clone().try_svd(true, true, eps, 10_000) else { continue };
        let (u, v_t) = (dec.u.as_ref().expect("requested U"), dec.v_t.as_ref().expect("requested V"));
        let mut rec = u.clone();
        for (k, s) in dec.singular_values.iter().enumerate() {
            rec.column_mut(k).scale_mut(*s);
        }
        let err = (rec * v_t - m).amax() / scale;
        let ortho = orthogonality_defect(u).max(orthogonality_defect(&v_t.transpose()));
        if err <= SVD_RECONSTRUCTION_TOL && ortho <= SVD_RECONSTRUCTION_TOL {
            return Ok(dec);
        }
        worst = worst.min(err.max(ortho));
    }
    Err(Error::Numerical(format!(
        "SVD of a {}x{} matrix did not reproduce it (best defect {worst:.1e})",
        m.nrows(),
        m.ncols()
    )))
}

fn svd(m: &DMatrix<f64>) -> Result<Svd> {
    checked_svd(m)
}

fn thresholds(sigma: &DVector<f64>) -> Result<(f64, f64)> {
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let zero = SVD_REL_TOL * smax.max(f64::MIN_POSITIVE);
    let grey = AMBIGUOUS_REL_TOL * smax;
    if let Some(s) = sigma.iter().find(|&&s| s > zero && s < grey) {
        return Err(Error::Numerical(format!(
            "singular value {s:.3e} is within the ambiguous band ({zero:.1e}, {grey:.1e})"
        )));
    }
    Ok((smax, zero))
}

/// Orthogonal projector onto `ker(m)`, i.e. `I` minus the projector onto the
/// row space.
pub fn null_space_projector(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = m.ncols();
    Ok(DMatrix::<f64>::identity(d, d) - column_space_projector(&m.transpose())?)
}

/// Orthogonal projector onto the range of `m`.
pub fn column_space_projector(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let r = m.nrows();
    let mut proj = DMatrix::<f64>::zeros(r, r);
    if m.ncols() == 0 || r == 0 {
        return Ok(proj);
    }
    let dec = svd(m)?;
    let (smax, zero) = thresholds(&dec.singular_values)?;
    if smax == 0.0 {
        return Ok(proj);
    }
    let u = dec.u.as_ref().expect("requested U");
    for (k, s) in dec.singular_values.iter().enumerate() {
        if *s > zero {
            let c = u.column(k);
            proj += &c * c.transpose();
        }
    }
    Ok(proj)
}

/// Minimum-norm least-squares solution of `a x = b` and the residual
/// `||b - a x||`.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    if a.nrows() != b.len() {
        return Err(Error::InvalidArgument(format!("{} rows against a vector of length {}", a.nrows(), b.len())));
    }
    if a.ncols() == 0 {
        return Ok((DVector::zeros(0), b.norm()));
    }
    let dec = svd(a)?;
    let smax = dec.singular_values.iter().cloned().fold(0.0, f64::max);
    let x = if smax == 0.0 {
        DVector::zeros(a.ncols())
    } else {
        dec.solve(b, SVD_REL_TOL * smax).map_err(|e| Error::Numerical(e.to_string()))?
    };
    let residual = (b - a * &x).norm();
    Ok((x, residual))
}

/// `max |P^2 - P|` and `max |P - P^T|`, whichever is larger.
pub fn projector_defect(p: &DMatrix<f64>) -> f64 {
    let idem = (p * p - p).amax();
    let sym = (p - p.transpose()).amax();
    idem.max(sym)
}

/// `max |U^T U - I|`.
pub fn orthogonality_defect(u: &DMatrix<f64>) -> f64 {
    (u.transpose() * u - DMatrix::<f64>::identity(u.ncols(), u.ncols())).amax()
}
