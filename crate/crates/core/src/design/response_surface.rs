//! Central-composite and Box–Behnken response-surface designs.

use super::factorial::letter_names;
use super::{Coding, Design, DesignError, DesignFamily, DesignMetadata};
use crate::spec::AlphaMode;

pub type CcdAlpha = AlphaMode;

/// Cube points (standard order), then axial pairs (−α, +α) per factor, then
/// centre points.
pub fn central_composite(k: usize, alpha: CcdAlpha, n_center: usize) -> Result<Design, DesignError> {
    if !(2..=8).contains(&k) {
        return Err(DesignError::InvalidParameter(format!(
            "central composite designs need 2..=8 factors, got {k}"
        )));
    }
    if n_center < 1 {
        return Err(DesignError::InvalidParameter(
            "central composite designs need at least one centre point".into(),
        ));
    }
    let cube = 1usize << k;
    let a = match alpha {
        AlphaMode::Rotatable => (cube as f64).powf(0.25),
        AlphaMode::FaceCentered => 1.0,
        AlphaMode::Custom(a) if a > 0.0 && a.is_finite() => a,
        AlphaMode::Custom(a) => return Err(DesignError::InvalidAlpha(a)),
    };
    let mut matrix = Vec::with_capacity(cube + 2 * k + n_center);
    for r in 0..cube {
        matrix.push((0..k).map(|j| if r >> j & 1 == 1 { 1.0 } else { -1.0 }).collect());
    }
    for j in 0..k {
        for sign in [-1.0, 1.0] {
            let mut row = vec![0.0; k];
            row[j] = sign * a;
            matrix.push(row);
        }
    }
    matrix.extend(std::iter::repeat_n(vec![0.0; k], n_center));
    Ok(Design {
        family: DesignFamily::CentralComposite,
        factor_names: letter_names(k),
        matrix,
        coding: Coding::FiveLevelCcd,
        column_levels: None,
        metadata: DesignMetadata {
            n_center: Some(n_center),
            alpha: Some(a),
            ..Default::default()
        },
    })
}

/// For each factor pair, the four (±1, ±1) edge midpoints with all other
/// factors at 0, followed by centre points.
pub fn box_behnken(k: usize, n_center: usize) -> Result<Design, DesignError> {
    if k < 3 {
        return Err(DesignError::KTooSmall(k));
    }
    if k > 7 {
        return Err(DesignError::InvalidParameter(format!(
            "Box-Behnken designs support at most 7 factors, got {k}"
        )));
    }
    if n_center < 1 {
        return Err(DesignError::InvalidParameter(
            "Box-Behnken designs need at least one centre point".into(),
        ));
    }
    let mut matrix = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            for (a, b) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
                let mut row = vec![0.0; k];
                row[i] = a;
                row[j] = b;
                matrix.push(row);
            }
        }
    }
    matrix.extend(std::iter::repeat_n(vec![0.0; k], n_center));
    Ok(Design {
        family: DesignFamily::BoxBehnken,
        factor_names: letter_names(k),
        matrix,
        coding: Coding::ThreeLevelBb,
        column_levels: Some(vec![3; k]),
        metadata: DesignMetadata {
            n_center: Some(n_center),
            ..Default::default()
        },
    })
}
