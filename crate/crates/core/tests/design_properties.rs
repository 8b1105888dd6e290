use std::collections::{BTreeMap, BTreeSet};

use doe_core::design::{
    alias_structure, fractional_factorial, full_factorial, latin_hypercube, make_plan, plackett_burman,
    randomize_order, scale_to_ranges, sobol, PlanOptions,
};
use doe_core::spec::{Factor, FactorRole, FactorValue, Treatment};
use proptest::prelude::*;

fn letters(mask: u32) -> String {
    (0..8u8)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| (b'A' + i) as char)
        .collect()
}

fn signed_product(row: &[f64], mask: u32) -> i8 {
    (0..row.len())
        .filter(|&j| mask >> j & 1 == 1)
        .fold(1, |s, j| if row[j] < 0.0 { -s } else { s })
}

proptest! {
    #[test]
    fn full_factorial_is_the_cartesian_product(levels in prop::collection::vec(2usize..5, 1..5)) {
        let d = full_factorial(&levels).unwrap();
        let runs: usize = levels.iter().product();
        prop_assert_eq!(d.n_runs(), runs);
        for (j, &l) in levels.iter().enumerate() {
            let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
            for r in &d.matrix {
                *counts.entry(r[j].to_bits()).or_default() += 1;
            }
            prop_assert_eq!(counts.len(), l);
            prop_assert!(counts.values().all(|&c| c == runs / l));
        }
    }

    #[test]
    fn fraction_aliases_match_column_products(
        base in 3usize..=5,
        words in prop::collection::btree_set(3u32..32, 1..=2),
        negate in any::<bool>(),
    ) {
        let words: Vec<u32> = words
            .into_iter()
            .map(|w| w & ((1 << base) - 1))
            .filter(|w| w.count_ones() >= 2)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        prop_assume!(!words.is_empty());
        let k = base + words.len();
        let gens: Vec<String> = words
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let sign = if negate && i == 0 { "-" } else { "" };
                format!("{}={sign}{}", (b'A' + (base + i) as u8) as char, letters(w))
            })
            .collect();
        let refs: Vec<&str> = gens.iter().map(String::as_str).collect();
        let d = fractional_factorial(k, &refs).unwrap();
        prop_assert_eq!(d.n_runs(), 1 << base);
        let aliases = alias_structure(&d).unwrap();
        let low: Vec<u32> = (1u32..1 << k).filter(|m| m.count_ones() <= 2).collect();
        let column = |m: u32| d.matrix.iter().map(|r| signed_product(r, m)).collect::<Vec<_>>();
        for &t in &low {
            let ct = column(t);
            let neg: Vec<i8> = ct.iter().map(|x| -x).collect();
            let want: BTreeSet<String> = low
                .iter()
                .filter(|&&m| m != t && (column(m) == ct || column(m) == neg))
                .map(|&m| letters(m))
                .collect();
            let got: BTreeSet<String> = aliases.get(&letters(t)).unwrap().iter().cloned().collect();
            prop_assert_eq!(got, want, "generators {:?}, term {}", gens, letters(t));
        }
    }

    #[test]
    fn lhs_has_one_point_per_stratum(k in 1usize..6, n in 2usize..80, seed in any::<u64>()) {
        let d = latin_hypercube(k, n, seed).unwrap();
        for j in 0..k {
            let mut strata: Vec<usize> = d.column(j).iter().map(|x| (x * n as f64) as usize).collect();
            strata.sort_unstable();
            prop_assert!(strata.into_iter().eq(0..n));
        }
    }

    #[test]
    fn sobol_prefixes_are_stable(k in 1usize..=16, n in 1usize..200) {
        let long = sobol(k, 256).unwrap();
        let short = sobol(k, n).unwrap();
        prop_assert_eq!(&long.matrix[..n], &short.matrix[..]);
    }

    #[test]
    fn random_order_is_a_permutation(n in 1usize..200, seed in any::<u64>()) {
        let mut order = randomize_order(n, seed);
        prop_assert_eq!(&order, &randomize_order(n, seed));
        order.sort_unstable();
        prop_assert!(order.into_iter().eq(0..n));
    }

    #[test]
    fn plan_ids_and_seeds(n in 1usize..30, reps in 1u32..4, seed in any::<u64>()) {
        let treatments: Vec<Treatment> = (0..n)
            .map(|i| BTreeMap::from([("x".into(), FactorValue::Number(i as f64))]))
            .collect();
        let plan = make_plan(&treatments, &PlanOptions { seed, replicates: reps, block: None }).unwrap();
        prop_assert_eq!(plan.runs.len(), n * reps as usize);
        for (i, r) in plan.runs.iter().enumerate() {
            prop_assert_eq!(r.run_id, i as u64 + 1);
            prop_assert_eq!(r.seed, doe_core::rng::mix(seed, r.run_id));
        }
        let again = make_plan(&treatments, &PlanOptions { seed, replicates: reps, block: None }).unwrap();
        prop_assert_eq!(plan.digest(), again.digest());
    }
}

#[test]
fn plackett_burman_is_orthogonal_for_every_size() {
    for k in 2..=23 {
        let d = plackett_burman(k).unwrap();
        let n = d.n_runs() as i64;
        for a in 0..k {
            let sum: i64 = d.matrix.iter().map(|r| r[a] as i64).sum();
            assert_eq!(sum, 0, "k={k}, column {a} unbalanced");
            for b in 0..k {
                let dot: i64 = d.matrix.iter().map(|r| (r[a] * r[b]) as i64).sum();
                assert_eq!(dot, if a == b { n } else { 0 }, "k={k}, ({a}, {b})");
            }
        }
    }
}

#[test]
fn half_fraction_of_four_factors() {
    let d = fractional_factorial(4, &["D=ABC"]).unwrap();
    assert_eq!(d.metadata.resolution, Some(4));
    let a = alias_structure(&d).unwrap();
    assert_eq!(a.get("A").unwrap(), &[] as &[String]);
    assert_eq!(a.get("AB").unwrap(), &["CD".to_string()]);
    assert_eq!(a.get("AD").unwrap(), &["BC".to_string()]);
}

#[test]
fn scaling_maps_coded_levels_onto_ranges() {
    let d = full_factorial(&[2, 3]).unwrap();
    let f1 = Factor::continuous("power", FactorRole::TreatmentExperimental, 10.0, 20.0);
    let f2 = Factor::categorical("mode", FactorRole::TreatmentExperimental, &["a", "b", "c"]);
    let d = d.with_factor_names(&["power", "mode"]).unwrap();
    let scaled = scale_to_ranges(&d, &[&f1, &f2]).unwrap();
    let powers: BTreeSet<u64> = scaled
        .iter()
        .map(|s| s.values["power"].as_number().unwrap().to_bits())
        .collect();
    assert_eq!(powers, BTreeSet::from([10f64.to_bits(), 20f64.to_bits()]));
    let modes: BTreeSet<String> = scaled.iter().map(|s| s.values["mode"].to_string()).collect();
    assert_eq!(modes.len(), 3);
    assert!(scaled.iter().all(|s| s.out_of_range.is_empty()));
}
