//! Tail probabilities of the F and Student t distributions.

use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

/// Upper-tail probability P(F > f) for F(df1, df2).
pub fn f_pvalue(f: f64, df1: usize, df2: usize) -> f64 {
    assert!(df1 >= 1 && df2 >= 1, "F distribution needs positive degrees of freedom");
    if f.is_nan() || f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let dist = FisherSnedecor::new(df1 as f64, df2 as f64).expect("positive degrees of freedom");
    dist.sf(f).clamp(0.0, 1.0)
}

/// Two-sided probability P(|T| > |t|) for Student t with `df` degrees of freedom.
pub fn t_pvalue(t: f64, df: usize) -> f64 {
    assert!(df >= 1, "t distribution needs positive degrees of freedom");
    if t.is_nan() {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_tail_examples() {
        assert_eq!(f_pvalue(0.0, 3, 7), 1.0);
        assert!((f_pvalue(1.5, 1, 4) - 0.2880).abs() < 1e-3);
        assert!(f_pvalue(1e6, 1, 1) < 1e-3);
        assert!(f_pvalue(1e6, 2, 10) < 1e-6);
    }

    #[test]
    fn t_matches_f_with_one_numerator_df() {
        for &t in &[0.3, 1.0, 2.5, 7.0] {
            for df in [1, 4, 30] {
                assert!((t_pvalue(t, df) - f_pvalue(t * t, 1, df)).abs() < 1e-10);
            }
        }
    }
}
