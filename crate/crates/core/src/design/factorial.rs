//! Full and regular two-level fractional factorials, and alias structure.

use std::fmt;

use serde::Serialize;

use super::{Coding, Design, DesignError, DesignFamily, DesignMetadata};

pub const MAX_FULL_FACTORIAL_RUNS: u128 = 1_000_000;
const MAX_FULL_FACTORIAL_FACTORS: usize = 16;
const MAX_FRACTIONAL_FACTORS: usize = 15;

/// Factor letters, skipping `I` (reserved for the identity word).
const LETTERS: &[u8] = b"ABCDEFGHJKLMNOPQRSTUVWXYZ";

pub fn factor_letter(i: usize) -> char {
    LETTERS[i] as char
}

fn letter_index(c: char) -> Option<usize> {
    LETTERS.iter().position(|&l| l as char == c)
}

pub(crate) fn letter_names(k: usize) -> Vec<String> {
    (0..k).map(|i| factor_letter(i).to_string()).collect()
}

/// A signed product of factor columns, held as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    pub mask: u32,
    pub negative: bool,
}

impl Word {
    pub const IDENTITY: Word = Word {
        mask: 0,
        negative: false,
    };

    pub fn len(self) -> u32 {
        self.mask.count_ones()
    }

    pub fn is_identity(self) -> bool {
        self.mask == 0
    }

    pub fn times(self, other: Word) -> Word {
        Word {
            mask: self.mask ^ other.mask,
            negative: self.negative != other.negative,
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        if self.mask == 0 {
            return f.write_str("I");
        }
        for i in 0..32 {
            if self.mask >> i & 1 == 1 {
                write!(f, "{}", factor_letter(i))?;
            }
        }
        Ok(())
    }
}

/// Parses a word such as `ABD`, `-ACE` or `I`.
pub fn parse_word(s: &str) -> Option<Word> {
    let s = s.trim();
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body == "I" {
        return Some(Word { mask: 0, negative });
    }
    let mut mask = 0u32;
    for c in body.chars() {
        let i = letter_index(c)?;
        if mask >> i & 1 == 1 {
            return None;
        }
        mask |= 1 << i;
    }
    (mask != 0).then_some(Word { mask, negative })
}

fn level_value(index: usize, levels: usize) -> f64 {
    if levels == 2 {
        if index == 0 {
            -1.0
        } else {
            1.0
        }
    } else {
        -1.0 + 2.0 * index as f64 / (levels - 1) as f64
    }
}

/// Every combination of levels, first factor varying fastest.
pub fn full_factorial(levels_per_factor: &[usize]) -> Result<Design, DesignError> {
    let k = levels_per_factor.len();
    if k == 0 {
        return Err(DesignError::InvalidParameter(format!(
            "full factorial needs 1..={MAX_FULL_FACTORIAL_FACTORS} factors, got {k}"
        )));
    }
    if let Some(&l) = levels_per_factor.iter().find(|&&l| l < 2) {
        return Err(DesignError::InvalidParameter(format!(
            "every factor needs at least 2 levels, got {l}"
        )));
    }
    let runs = levels_per_factor
        .iter()
        .try_fold(1u128, |acc, &l| acc.checked_mul(l as u128))
        .unwrap_or(u128::MAX);
    if runs > MAX_FULL_FACTORIAL_RUNS {
        return Err(DesignError::TooManyRuns {
            runs,
            cap: MAX_FULL_FACTORIAL_RUNS,
        });
    }
    if k > MAX_FULL_FACTORIAL_FACTORS {
        return Err(DesignError::InvalidParameter(format!(
            "full factorial needs 1..={MAX_FULL_FACTORIAL_FACTORS} factors, got {k}"
        )));
    }
    let runs = runs as usize;
    let mut matrix = Vec::with_capacity(runs);
    for r in 0..runs {
        let mut rem = r;
        let row = levels_per_factor
            .iter()
            .map(|&l| {
                let idx = rem % l;
                rem /= l;
                level_value(idx, l)
            })
            .collect();
        matrix.push(row);
    }
    let two_level = levels_per_factor.iter().all(|&l| l == 2);
    Ok(Design {
        family: DesignFamily::FullFactorial,
        factor_names: letter_names(k),
        matrix,
        coding: if two_level { Coding::TwoLevel } else { Coding::LevelGrid },
        column_levels: Some(levels_per_factor.to_vec()),
        metadata: DesignMetadata {
            defining_relation: if two_level { vec!["I".into()] } else { vec![] },
            ..Default::default()
        },
    })
}

struct Generator {
    added: usize,
    word: Word,
}

fn parse_generator(text: &str, k: usize, base: usize) -> Result<Generator, DesignError> {
    let bad = |reason: &str| DesignError::InvalidGenerator {
        generator: text.to_string(),
        reason: reason.to_string(),
    };
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let (lhs, rhs) = compact.split_once('=').ok_or_else(|| bad("expected the form D=ABC"))?;
    let mut lhs_chars = lhs.chars();
    let (Some(c), None) = (lhs_chars.next(), lhs_chars.next()) else {
        return Err(bad("left-hand side must be a single factor letter"));
    };
    let added = letter_index(c).ok_or_else(|| bad("unknown factor letter"))?;
    if added >= k {
        return Err(bad(&format!("factor {c} is beyond the {k} factors of the design")));
    }
    if added < base {
        return Err(bad(&format!("{c} is a base factor and cannot be generated")));
    }
    let (negative, body) = match rhs.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, rhs.strip_prefix('+').unwrap_or(rhs)),
    };
    if body.is_empty() || body == "I" {
        return Err(DesignError::DegenerateDesign(format!(
            "generator {text:?} aliases factor {c} with the identity"
        )));
    }
    let mut mask = 0u32;
    for ch in body.chars() {
        let i = letter_index(ch).ok_or_else(|| bad(&format!("unknown factor letter {ch}")))?;
        if i >= base {
            return Err(bad(&format!(
                "{ch} is not a base factor (base factors are {}..{})",
                factor_letter(0),
                factor_letter(base - 1)
            )));
        }
        if mask >> i & 1 == 1 {
            return Err(bad(&format!("factor {ch} repeated")));
        }
        mask |= 1 << i;
    }
    Ok(Generator {
        added,
        word: Word {
            mask: mask | 1 << added,
            negative,
        },
    })
}

/// All products of subsets of the generator words, identity first, then by
/// word length and letters.
fn defining_group(words: &[Word]) -> Vec<Word> {
    let mut group: Vec<Word> = (0..1u32 << words.len())
        .map(|subset| {
            words
                .iter()
                .enumerate()
                .filter(|(i, _)| subset >> i & 1 == 1)
                .fold(Word::IDENTITY, |acc, (_, w)| acc.times(*w))
        })
        .collect();
    group.sort_by_key(|w| (w.len(), std::cmp::Reverse(w.mask.reverse_bits()), w.negative));
    group
}

/// Regular 2^(k−p) fraction from generator words such as `D=ABC`.
///
/// Base factors are the first `k − p` letters in standard order; each
/// generator defines one of the remaining factors as a signed product of
/// base factors.
pub fn fractional_factorial(k: usize, generators: &[&str]) -> Result<Design, DesignError> {
    if !(2..=MAX_FRACTIONAL_FACTORS).contains(&k) {
        return Err(DesignError::InvalidParameter(format!(
            "fractional factorial needs 2..={MAX_FRACTIONAL_FACTORS} factors, got {k}"
        )));
    }
    let p = generators.len();
    if p >= k - 1 {
        return Err(DesignError::InvalidParameter(format!(
            "{p} generators leave fewer than 2 base factors out of {k}"
        )));
    }
    let base = k - p;
    let mut gens: Vec<Generator> = Vec::with_capacity(p);
    for g in generators {
        let gen = parse_generator(g, k, base)?;
        if gens.iter().any(|other| other.added == gen.added) {
            return Err(DesignError::InvalidGenerator {
                generator: g.to_string(),
                reason: format!("factor {} defined twice", factor_letter(gen.added)),
            });
        }
        gens.push(gen);
    }
    let words: Vec<Word> = gens.iter().map(|g| g.word).collect();
    let relation = defining_group(&words);
    if let Some(w) = relation.iter().find(|w| w.len() == 1) {
        return Err(DesignError::DegenerateDesign(format!(
            "factor {w} is aliased with the identity"
        )));
    }
    let resolution = relation.iter().filter(|w| !w.is_identity()).map(|w| w.len()).min();

    let runs = 1usize << base;
    let mut matrix = vec![vec![0.0; k]; runs];
    for (r, row) in matrix.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate().take(base) {
            *cell = if r >> j & 1 == 1 { 1.0 } else { -1.0 };
        }
        for g in &gens {
            let base_mask = g.word.mask & !(1 << g.added);
            let mut v = if g.word.negative { -1.0 } else { 1.0 };
            for j in 0..base {
                if base_mask >> j & 1 == 1 {
                    v *= row[j];
                }
            }
            row[g.added] = v;
        }
    }
    Ok(Design {
        family: DesignFamily::FractionalFactorial,
        factor_names: letter_names(k),
        matrix,
        coding: Coding::TwoLevel,
        column_levels: Some(vec![2; k]),
        metadata: DesignMetadata {
            generators: generators
                .iter()
                .map(|g| g.chars().filter(|c| !c.is_whitespace()).collect())
                .collect(),
            defining_relation: relation.iter().map(|w| w.to_string()).collect(),
            resolution,
            ..Default::default()
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AliasEntry {
    pub term: String,
    pub aliases: Vec<String>,
}

/// For every main effect and two-factor interaction, the other terms of at
/// most order two whose coded columns coincide with it up to sign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AliasStructure {
    pub entries: Vec<AliasEntry>,
}

impl AliasStructure {
    pub fn get(&self, term: &str) -> Option<&[String]> {
        self.entries
            .iter()
            .find(|e| e.term == term)
            .map(|e| e.aliases.as_slice())
    }

    pub fn is_clear(&self) -> bool {
        self.entries.iter().all(|e| e.aliases.is_empty())
    }
}

pub(crate) fn mask_label(names: &[String], mask: u32) -> String {
    let parts: Vec<&str> = (0..names.len())
        .filter(|&i| mask >> i & 1 == 1)
        .map(|i| names[i].as_str())
        .collect();
    if names.iter().all(|n| n.chars().count() == 1) {
        parts.concat()
    } else {
        parts.join(":")
    }
}

fn low_order_terms(k: usize) -> Vec<u32> {
    let mut terms: Vec<u32> = (0..k).map(|i| 1u32 << i).collect();
    for i in 0..k {
        for j in i + 1..k {
            terms.push(1 << i | 1 << j);
        }
    }
    terms
}

pub fn alias_structure(design: &Design) -> Result<AliasStructure, DesignError> {
    let k = design.n_factors();
    let relation: Vec<Word> = match design.family {
        DesignFamily::FractionalFactorial => design
            .metadata
            .defining_relation
            .iter()
            .map(|w| {
                parse_word(w)
                    .ok_or_else(|| DesignError::InvalidParameter(format!("bad defining word {w:?} in metadata")))
            })
            .collect::<Result<_, _>>()?,
        DesignFamily::FullFactorial if design.is_two_level() => vec![Word::IDENTITY],
        DesignFamily::PlackettBurman | DesignFamily::OrthogonalArray if design.is_two_level() => {
            return Ok(alias_by_columns(design));
        }
        other => return Err(DesignError::UnsupportedFamily(other)),
    };
    let terms = low_order_terms(k);
    let entries = terms
        .iter()
        .map(|&t| {
            let mut aliases: Vec<u32> = relation
                .iter()
                .filter(|w| !w.is_identity())
                .map(|w| t ^ w.mask)
                .filter(|m| m.count_ones() <= 2 && *m != 0)
                .collect();
            aliases.sort_by_key(|m| terms.iter().position(|x| x == m));
            AliasEntry {
                term: mask_label(&design.factor_names, t),
                aliases: aliases
                    .into_iter()
                    .map(|m| mask_label(&design.factor_names, m))
                    .collect(),
            }
        })
        .collect();
    Ok(AliasStructure { entries })
}

/// Column comparison for two-level designs without a defining relation.
fn alias_by_columns(design: &Design) -> AliasStructure {
    let terms = low_order_terms(design.n_factors());
    let columns: Vec<Vec<i8>> = terms
        .iter()
        .map(|&t| {
            design
                .matrix
                .iter()
                .map(|row| {
                    (0..row.len())
                        .filter(|&j| t >> j & 1 == 1)
                        .fold(1i8, |acc, j| if row[j] < 0.0 { -acc } else { acc })
                })
                .collect()
        })
        .collect();
    let same_up_to_sign =
        |a: &[i8], b: &[i8]| a.iter().zip(b).all(|(x, y)| x == y) || a.iter().zip(b).all(|(x, y)| x == &-y);
    let entries = terms
        .iter()
        .enumerate()
        .map(|(i, &t)| AliasEntry {
            term: mask_label(&design.factor_names, t),
            aliases: terms
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i && same_up_to_sign(&columns[i], &columns[j]))
                .map(|(_, &m)| mask_label(&design.factor_names, m))
                .collect(),
        })
        .collect();
    AliasStructure { entries }
}
