//! Tolerances shared by every module, so order flags and inequality verdicts
//! never disagree about the same comparison.

/// Absolute tolerance for cone membership tests.
pub const CONE_TOL: f64 = 1e-12;

/// Absolute slack on the right-hand side of norm inequalities.
pub const INEQ_ABS: f64 = 1e-9;

/// Relative slack on the right-hand side of norm inequalities.
pub const INEQ_REL: f64 = 1e-9;

/// Residual below which a point counts as a fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-8;

/// `lhs <= rhs` up to the shared inequality slack.
#[inline]
pub fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + INEQ_ABS + INEQ_REL * rhs.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_is_absolute_plus_relative() {
        assert!(holds(1.0 + 1.5e-9, 1.0));
        assert!(!holds(1.0 + 3e-9, 1.0));
        assert!(holds(5e-10, 0.0));
        assert!(holds(1e6 + 1e-3, 1e6));
    }
}
