//! Plackett–Burman screening designs.

use super::factorial::letter_names;
use super::{Coding, Design, DesignError, DesignFamily, DesignMetadata};

const MAX_PB_FACTORS: usize = 23;

/// Cyclic generating rows for the non-power-of-two sizes.
const PB12: &str = "++-+++---+-";
const PB20: &str = "++--++++-+-+----++-";
const PB24: &str = "+++++-+-++--++--+-+----";

fn sylvester(n: usize) -> Vec<Vec<f64>> {
    // Column j (1..n) of the Sylvester–Hadamard matrix, row i: (−1)^popcount(i & j).
    // Negated so the first run sits at −1 in every column, like standard order.
    (0..n)
        .map(|i| {
            (1..n)
                .map(|j| if (i & j).count_ones() % 2 == 0 { -1.0 } else { 1.0 })
                .collect()
        })
        .collect()
}

fn cyclic(first_row: &str) -> Vec<Vec<f64>> {
    let v: Vec<f64> = first_row.chars().map(|c| if c == '+' { 1.0 } else { -1.0 }).collect();
    let m = v.len();
    let mut rows: Vec<Vec<f64>> = (0..m)
        .map(|shift| (0..m).map(|j| v[(j + m - shift) % m]).collect())
        .collect();
    rows.push(vec![-1.0; m]);
    rows
}

/// Smallest Plackett–Burman design with more runs than factors, keeping
/// the first `n_factors` columns.
pub fn plackett_burman(n_factors: usize) -> Result<Design, DesignError> {
    if n_factors > MAX_PB_FACTORS {
        return Err(DesignError::TooManyFactors(n_factors));
    }
    if n_factors < 2 {
        return Err(DesignError::InvalidParameter(format!(
            "Plackett-Burman designs need at least 2 factors, got {n_factors}"
        )));
    }
    let n = [4usize, 8, 12, 16, 20, 24]
        .into_iter()
        .find(|&n| n > n_factors)
        .expect("n_factors <= 23");
    let full = match n {
        12 => cyclic(PB12),
        20 => cyclic(PB20),
        24 => cyclic(PB24),
        _ => sylvester(n),
    };
    let matrix = full
        .into_iter()
        .map(|row| row.into_iter().take(n_factors).collect())
        .collect();
    Ok(Design {
        family: DesignFamily::PlackettBurman,
        factor_names: letter_names(n_factors),
        matrix,
        coding: Coding::TwoLevel,
        column_levels: Some(vec![2; n_factors]),
        metadata: DesignMetadata::default(),
    })
}
