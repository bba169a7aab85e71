use super::{CaseId, ExponentSystem};

/// Best-constant bracket `(C_low, C_high)` from finite B-values of the active case.
///
/// `b` holds `B1, B2, B3`; entries a case does not use are ignored. Case IV only
/// characterizes finiteness and has no bracket.
pub fn bracket_constant(case: &CaseId, b: [Option<f64>; 3], exps: &ExponentSystem) -> Option<(f64, f64)> {
    let q = exps.q;
    let finite = |v: Option<f64>| v.filter(|x| x.is_finite());
    match case {
        CaseId::CaseI => {
            let b1 = finite(b[0])?;
            Some((b1, 8.0 * (1.0 + 4f64.powf(q)).powf(1.0 / q) * b1))
        }
        CaseId::CaseII { .. } => {
            let (b1, b2) = (finite(b[0])?, finite(b[1])?);
            let qc = exps.q_conj()?;
            let p2c = exps.p_conj(2);
            let r2 = exps.r(2)?;
            let qq = q.powf(1.0 / q);
            let low = b1.max(qq * (q * p2c / r2).powf(1.0 / qc) * b2);
            let high = 8.0 * (b1 + qq * p2c.powf(1.0 / qc) * b2);
            Some((low, high))
        }
        CaseId::CaseIII => {
            let (b1, b2, b3) = (finite(b[0])?, finite(b[1])?, finite(b[2])?);
            let qc = exps.q_conj()?;
            let (p1c, p2c) = (exps.p_conj(1), exps.p_conj(2));
            let (r1, r2) = (exps.r(1)?, exps.r(2)?);
            let qq = q.powf(1.0 / q);
            let low = b1
                .max(qq * (q * p2c / r2).powf(1.0 / qc) * b2)
                .max(qq * (q * p1c / r1).powf(1.0 / qc) * b3);
            let high = 8.0 * (8.0 * b3 + 4.0 * (p1c / r1).powf(1.0 / r1) * b1 + qq * p2c.powf(1.0 / qc) * b2);
            Some((low, high))
        }
        CaseId::CaseIV | CaseId::NotCovered { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn case_one_example() {
        let e = ExponentSystem::new(2.0, 2.0, 2.0).unwrap();
        let b1 = 0.5f64.sqrt();
        let (lo, hi) = bracket_constant(&CaseId::CaseI, [Some(b1), None, None], &e).unwrap();
        assert_relative_eq!(lo, 0.70711, epsilon = 1e-5);
        assert_relative_eq!(hi, 23.324, epsilon = 1e-3);
        assert_relative_eq!(hi / lo, 8.0 * 17f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn infinite_or_missing_gives_none() {
        let e = ExponentSystem::new(2.0, 4.0, 2.0).unwrap();
        let case = CaseId::CaseII { swapped: false };
        assert!(bracket_constant(&case, [Some(1.0), Some(f64::INFINITY), None], &e).is_none());
        assert!(bracket_constant(&case, [Some(1.0), None, None], &e).is_none());
        assert!(bracket_constant(&CaseId::CaseIV, [Some(1.0); 3], &e).is_none());
    }

    #[test]
    fn case_two_and_three_ordering() {
        let e = ExponentSystem::new(2.0, 4.0, 2.0).unwrap();
        let (lo, hi) = bracket_constant(
            &CaseId::CaseII { swapped: false },
            [Some(0.3), Some(2.0), None],
            &e,
        )
        .unwrap();
        // q=2, p2'=4/3, r2=4, q'=2
        let b2_low = 2f64.sqrt() * (2.0 * 4.0 / 3.0 / 4.0f64).sqrt() * 2.0;
        assert_relative_eq!(lo, b2_low, max_relative = 1e-14);
        assert_relative_eq!(
            hi,
            8.0 * (0.3 + 2f64.sqrt() * (4.0f64 / 3.0).sqrt() * 2.0),
            max_relative = 1e-14
        );
        let e = ExponentSystem::new(3.0, 3.0, 2.0).unwrap();
        let (lo, hi) = bracket_constant(&CaseId::CaseIII, [Some(1.0), Some(1.0), Some(1.0)], &e).unwrap();
        assert!(lo <= hi);
    }
}
