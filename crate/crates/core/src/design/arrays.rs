//! Standard Taguchi orthogonal arrays.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::factorial::letter_names;
use super::{Coding, Design, DesignError, DesignFamily, DesignMetadata};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArrayName {
    L4,
    L8,
    L9,
}

impl FromStr for ArrayName {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "L4" => Ok(ArrayName::L4),
            "L8" => Ok(ArrayName::L8),
            "L9" => Ok(ArrayName::L9),
            _ => Err(DesignError::UnknownArray(s.to_string())),
        }
    }
}

impl fmt::Display for ArrayName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

// Level indices as printed in the usual tables (1-based).
const L4: [[u8; 3]; 4] = [[1, 1, 1], [1, 2, 2], [2, 1, 2], [2, 2, 1]];

const L8: [[u8; 7]; 8] = [
    [1, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 2, 2, 2, 2],
    [1, 2, 2, 1, 1, 2, 2],
    [1, 2, 2, 2, 2, 1, 1],
    [2, 1, 2, 1, 2, 1, 2],
    [2, 1, 2, 2, 1, 2, 1],
    [2, 2, 1, 1, 2, 2, 1],
    [2, 2, 1, 2, 1, 1, 2],
];

const L9: [[u8; 4]; 9] = [
    [1, 1, 1, 1],
    [1, 2, 2, 2],
    [1, 3, 3, 3],
    [2, 1, 2, 3],
    [2, 2, 3, 1],
    [2, 3, 1, 2],
    [3, 1, 3, 2],
    [3, 2, 1, 3],
    [3, 3, 2, 1],
];

fn coded<const K: usize>(table: &[[u8; K]], levels: usize) -> Vec<Vec<f64>> {
    table
        .iter()
        .map(|row| {
            row.iter()
                .map(|&l| -1.0 + 2.0 * (l - 1) as f64 / (levels - 1) as f64)
                .collect()
        })
        .collect()
}

pub fn orthogonal_array(name: ArrayName) -> Design {
    let (matrix, levels, coding) = match name {
        ArrayName::L4 => (coded(&L4, 2), 2, Coding::TwoLevel),
        ArrayName::L8 => (coded(&L8, 2), 2, Coding::TwoLevel),
        ArrayName::L9 => (coded(&L9, 3), 3, Coding::LevelGrid),
    };
    let k = matrix[0].len();
    Design {
        family: DesignFamily::OrthogonalArray,
        factor_names: letter_names(k),
        matrix,
        coding,
        column_levels: Some(vec![levels; k]),
        metadata: DesignMetadata {
            array: Some(name.to_string()),
            ..Default::default()
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn pair_counts(d: &Design, a: usize, b: usize) -> BTreeMap<(i64, i64), usize> {
        let mut m = BTreeMap::new();
        for r in &d.matrix {
            *m.entry((r[a] as i64, r[b] as i64)).or_default() += 1;
        }
        m
    }

    #[test]
    fn l4_pairs_once() {
        let d = orthogonal_array(ArrayName::L4);
        for a in 0..3 {
            for b in a + 1..3 {
                let c = pair_counts(&d, a, b);
                assert_eq!(c.len(), 4);
                assert!(c.values().all(|&n| n == 1));
            }
        }
    }

    #[test]
    fn l8_first_pair_twice_each() {
        let d = orthogonal_array(ArrayName::L8);
        let c = pair_counts(&d, 0, 1);
        assert_eq!(c.len(), 4);
        assert!(c.values().all(|&n| n == 2));
    }

    #[test]
    fn l9_balance() {
        let d = orthogonal_array(ArrayName::L9);
        assert_eq!(d.n_runs(), 9);
        for j in 0..4 {
            for level in [-1.0, 0.0, 1.0] {
                assert_eq!(d.column(j).iter().filter(|&&x| x == level).count(), 3);
            }
        }
    }

    #[test]
    fn unknown_name() {
        assert_eq!("L27".parse::<ArrayName>(), Err(DesignError::UnknownArray("L27".into())));
        assert_eq!("l8".parse::<ArrayName>(), Ok(ArrayName::L8));
    }
}
