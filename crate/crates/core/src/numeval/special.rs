//! Gauss hypergeometric function and the imaginary error function.

const MAX_TERMS: usize = 100_000;
const REL_STOP: f64 = 1e-16;
const ERFI_MAX: f64 = 12.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecialError {
    #[error("hyp2f1: c = {0} is a non-positive integer")]
    PoleInC(f64),
    #[error("hyp2f1: z = {0} lies outside the supported region (z <= 0.5)")]
    Unsupported(f64),
    #[error("hyp2f1: series did not converge within {MAX_TERMS} terms at z = {0}")]
    NoConvergence(f64),
    #[error("erfi: |x| = {0} exceeds {ERFI_MAX}")]
    ErfiRange(f64),
}

/// Direct Maclaurin series of 2F1; valid for |z| < 1.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64, SpecialError> {
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(SpecialError::PoleInC(c));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let mut sum = 1.0;
    let mut comp = 0.0;
    let mut term = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        // Kahan summation
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term == 0.0 || (term / sum).abs() < REL_STOP {
            return Ok(sum);
        }
    }
    Err(SpecialError::NoConvergence(z))
}

/// 2F1(a, b; c; z) for z <= 0.5.
///
/// Sums the series directly for |z| <= 1/2 and uses the Pfaff transformation
/// (1 - z)^(-a) 2F1(a, c - b; c; z / (z - 1)) for z < -1/2.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64, SpecialError> {
    if !(z <= 0.5) {
        return Err(SpecialError::Unsupported(z));
    }
    if z >= -0.5 {
        return hyp2f1_series(a, b, c, z);
    }
    let w = z / (z - 1.0);
    Ok((1.0 - z).powf(-a) * hyp2f1_series(a, c - b, c, w)?)
}

/// The other Pfaff branch, (1 - z)^(-b) 2F1(c - a, b; c; z / (z - 1)).
/// Used as an independent path for consistency checks.
pub fn hyp2f1_pfaff_b(a: f64, b: f64, c: f64, z: f64) -> Result<f64, SpecialError> {
    if !(z < 0.0) {
        return Err(SpecialError::Unsupported(z));
    }
    let w = z / (z - 1.0);
    Ok((1.0 - z).powf(-b) * hyp2f1_series(c - a, b, c, w)?)
}

/// erfi(x) = 2/sqrt(pi) * sum x^(2k+1) / (k! (2k+1)), for |x| <= 12.
pub fn erfi(x: f64) -> Result<f64, SpecialError> {
    if !(x.abs() <= ERFI_MAX) {
        return Err(SpecialError::ErfiRange(x.abs()));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let x2 = x * x;
    // p = x^(2k+1)/k!
    let mut p = x;
    let mut sum = x;
    let mut comp = 0.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        p *= x2 / kf;
        let term = p / (2.0 * kf + 1.0);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (term / sum).abs() < REL_STOP {
            break;
        }
    }
    Ok(std::f64::consts::FRAC_2_SQRT_PI * sum)
}
