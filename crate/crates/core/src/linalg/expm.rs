use super::{ComplexMatrix, LinalgError};

/// Matrix exponential by scaling and squaring a truncated Taylor series.
///
/// Accurate to a few ulps times the condition of the squaring phase, which is
/// plenty for the sizes used here.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let n = a.check_square()?;
    if n == 0 {
        return Err(LinalgError::EmptyMatrix);
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let norm = a.norm();
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = a.scale((0.5f64).powi(squarings as i32).into());

    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&scaled)?.scale((1.0 / k as f64).into());
        result = &result + &term;
        if term.norm() <= f64::EPSILON * result.norm() * 0.01 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result)?;
    }
    Ok(result)
}
