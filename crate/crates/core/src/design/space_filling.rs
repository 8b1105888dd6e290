//! Space-filling designs on the unit cube: Latin hypercube, Sobol and
//! plain Monte Carlo.

use super::factorial::letter_names;
use super::{Coding, Design, DesignError, DesignFamily, DesignMetadata};
use crate::rng;

pub const SOBOL_MAX_DIM: usize = 16;
const SOBOL_BITS: u32 = 32;

/// Joe & Kuo (2008) direction numbers, file `new-joe-kuo-6.21201`,
/// dimensions 2..=16: (degree s, polynomial coefficients a, initial m_i).
/// Dimension 1 is the van der Corput sequence (all m_i = 1).
const JOE_KUO: [(u32, u32, &[u32]); SOBOL_MAX_DIM - 1] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
];

fn direction_numbers(dim: usize) -> [u32; SOBOL_BITS as usize] {
    let mut v = [0u32; SOBOL_BITS as usize];
    if dim == 0 {
        for (j, slot) in v.iter_mut().enumerate() {
            *slot = 1 << (SOBOL_BITS - 1 - j as u32);
        }
        return v;
    }
    let (s, a, m) = JOE_KUO[dim - 1];
    let s = s as usize;
    for j in 0..SOBOL_BITS as usize {
        v[j] = if j < s {
            m[j] << (SOBOL_BITS - 1 - j as u32)
        } else {
            let mut x = v[j - s] ^ (v[j - s] >> s);
            for k in 1..s {
                if (a >> (s - 1 - k)) & 1 == 1 {
                    x ^= v[j - k];
                }
            }
            x
        };
    }
    v
}

/// Points 1..=n of the unscrambled Sobol sequence in Gray-code order (the
/// origin is skipped, so the first point is 0.5 in every coordinate).
pub fn sobol(k: usize, n: usize) -> Result<Design, DesignError> {
    if k > SOBOL_MAX_DIM {
        return Err(DesignError::DimensionUnsupported {
            requested: k,
            max: SOBOL_MAX_DIM,
        });
    }
    if k == 0 || n == 0 {
        return Err(DesignError::InvalidParameter(
            "Sobol designs need k >= 1 and n >= 1".into(),
        ));
    }
    if n as u64 >= 1 << SOBOL_BITS {
        return Err(DesignError::InvalidParameter(format!(
            "at most 2^{SOBOL_BITS} - 1 Sobol points supported"
        )));
    }
    let dirs: Vec<_> = (0..k).map(direction_numbers).collect();
    let scale = 1.0 / (1u64 << SOBOL_BITS) as f64;
    let mut x = vec![0u32; k];
    let mut matrix = Vec::with_capacity(n);
    for i in 0..n {
        // moving from point i to i + 1 flips the direction number indexed by
        // the lowest zero bit of i
        let c = (!i).trailing_zeros() as usize;
        for (xd, v) in x.iter_mut().zip(&dirs) {
            *xd ^= v[c];
        }
        matrix.push(x.iter().map(|&b| b as f64 * scale).collect());
    }
    Ok(Design {
        family: DesignFamily::Sobol,
        factor_names: letter_names(k),
        matrix,
        coding: Coding::UnitCube,
        column_levels: None,
        metadata: DesignMetadata::default(),
    })
}

/// One point per stratum `[i/n, (i+1)/n)` in every column, uniformly placed
/// within the stratum.
pub fn latin_hypercube(k: usize, n: usize, seed: u64) -> Result<Design, DesignError> {
    if k < 1 || n < 2 {
        return Err(DesignError::InvalidParameter(format!(
            "Latin hypercube needs k >= 1 and n >= 2, got k={k}, n={n}"
        )));
    }
    let mut stream = rng::stream(seed);
    let mut matrix = vec![vec![0.0; k]; n];
    for j in 0..k {
        let perm = rng::permutation(n, &mut stream);
        for (i, row) in matrix.iter_mut().enumerate() {
            let stratum = perm[i];
            let mut x = (stratum as f64 + rng::unit(&mut stream)) / n as f64;
            while (x * n as f64).floor() as usize > stratum || x >= 1.0 {
                x = x.next_down();
            }
            row[j] = x;
        }
    }
    Ok(Design {
        family: DesignFamily::LatinHypercube,
        factor_names: letter_names(k),
        matrix,
        coding: Coding::UnitCube,
        column_levels: None,
        metadata: DesignMetadata {
            seed: Some(seed),
            ..Default::default()
        },
    })
}

/// Independent uniform points in [0, 1)^k.
pub fn monte_carlo(k: usize, n: usize, seed: u64) -> Result<Design, DesignError> {
    if k < 1 || n < 1 {
        return Err(DesignError::InvalidParameter(format!(
            "Monte Carlo designs need k >= 1 and n >= 1, got k={k}, n={n}"
        )));
    }
    let mut stream = rng::stream(seed);
    let matrix = (0..n)
        .map(|_| (0..k).map(|_| rng::unit(&mut stream)).collect())
        .collect();
    Ok(Design {
        family: DesignFamily::MonteCarlo,
        factor_names: letter_names(k),
        matrix,
        coding: Coding::UnitCube,
        column_levels: None,
        metadata: DesignMetadata {
            seed: Some(seed),
            ..Default::default()
        },
    })
}
