//! Building a design from the `test_design` section of a specification.

use super::{
    box_behnken, central_composite, fractional_factorial, full_factorial, latin_hypercube, monte_carlo,
    orthogonal_array, plackett_burman, sobol, ArrayName, Design, DesignError, DesignFamily,
};
use crate::spec::{AlphaMode, DesignRequest, Factor};

fn samples(request: &DesignRequest) -> Result<usize, DesignError> {
    request
        .n_samples
        .ok_or_else(|| DesignError::InvalidParameter(format!("{} designs need n_samples", request.family)))
}

/// Generates the coded design for `factors` (in column order) and names its
/// columns after them. `seed` feeds the stochastic families only.
pub fn generate(request: &DesignRequest, factors: &[&Factor], seed: u64) -> Result<Design, DesignError> {
    let k = factors.len();
    if k == 0 {
        return Err(DesignError::Empty("no treatment factors to design over".into()));
    }
    let n_center = request.n_center.unwrap_or(1);
    let design = match request.family {
        DesignFamily::FullFactorial => {
            let levels: Vec<usize> = factors.iter().map(|f| f.effective_levels().len()).collect();
            full_factorial(&levels)?
        }
        DesignFamily::FractionalFactorial => {
            let gens: Vec<&str> = request.generators.iter().map(String::as_str).collect();
            fractional_factorial(k, &gens)?
        }
        DesignFamily::PlackettBurman => plackett_burman(k)?,
        DesignFamily::CentralComposite => {
            central_composite(k, request.alpha.unwrap_or(AlphaMode::Rotatable), n_center)?
        }
        DesignFamily::BoxBehnken => box_behnken(k, n_center)?,
        DesignFamily::LatinHypercube => latin_hypercube(k, samples(request)?, seed)?,
        DesignFamily::Sobol => sobol(k, samples(request)?)?,
        DesignFamily::MonteCarlo => monte_carlo(k, samples(request)?, seed)?,
        DesignFamily::OrthogonalArray => {
            let name: ArrayName = request
                .array
                .as_deref()
                .ok_or_else(|| DesignError::InvalidParameter("orthogonal_array needs an array name".into()))?
                .parse()?;
            let array = orthogonal_array(name);
            if k > array.n_factors() {
                return Err(DesignError::CardinalityMismatch(format!(
                    "{name} has {} columns, {k} factors given",
                    array.n_factors()
                )));
            }
            array.truncate_columns(k)
        }
    };
    let names: Vec<&str> = factors.iter().map(|f| f.name.as_str()).collect();
    design.with_factor_names(&names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::FactorRole;

    #[test]
    fn names_columns_after_factors() {
        let a = Factor::continuous("load", FactorRole::TreatmentExperimental, 0.0, 1.0);
        let b = Factor::categorical("mode", FactorRole::TreatmentExperimental, &["x", "y", "z"]);
        let d = generate(&DesignRequest::new(DesignFamily::FullFactorial), &[&a, &b], 0).unwrap();
        assert_eq!(d.factor_names, vec!["load", "mode"]);
        assert_eq!(d.n_runs(), 6);
    }

    #[test]
    fn sampling_families_need_a_count() {
        let a = Factor::continuous("a", FactorRole::TreatmentExperimental, 0.0, 1.0);
        let mut req = DesignRequest::new(DesignFamily::Sobol);
        assert!(generate(&req, &[&a], 0).is_err());
        req.n_samples = Some(8);
        assert_eq!(generate(&req, &[&a], 0).unwrap().n_runs(), 8);
    }

    #[test]
    fn array_too_narrow() {
        let f = Factor::continuous("a", FactorRole::TreatmentExperimental, 0.0, 1.0);
        let mut req = DesignRequest::new(DesignFamily::OrthogonalArray);
        req.array = Some("L4".into());
        assert!(matches!(
            generate(&req, &[&f, &f, &f, &f], 0),
            Err(DesignError::CardinalityMismatch(_))
        ));
    }
}
