//! Acceptance checks. Each criterion prints one PASS/FAIL line with its
//! runtime; the process exits nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use doe_core::analysis::{anova, effects_two_level, f_pvalue, power_estimate, regression, Dataset, PowerConfig};
use doe_core::design::{
    alias_structure, block_design, box_behnken, central_composite, fractional_factorial, full_factorial,
    latin_hypercube, make_plan, orthogonal_array, plackett_burman, sobol, ArrayName, Design, PlanOptions,
};
use doe_core::rng;
use doe_core::spec::{
    recommend_analysis, recommend_nuisance_handling, AlphaMode, AnalysisMode, Factor, FactorRole, FactorValue,
    HandlingConcept, Method, Purpose, Treatment,
};
use doe_core::sut::{simulate, Priority, SutConfig, SutTreatment};
use doe_core::terms::ModelTerm;
use serde_json::Value;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn doe(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doe"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn doe")
}

fn doe_ok(args: &[&str], cwd: &Path) -> Result<Output, String> {
    let out = doe(args, cwd);
    ensure(out.status.success(), || {
        format!(
            "doe {} exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    Ok(out)
}

// 1

fn table_one() -> Check {
    use Method::{Anova, Regression};
    let expected = [
        (AnalysisMode::Purpose(Purpose::Characterization), vec![Regression]),
        (AnalysisMode::Purpose(Purpose::Validation), vec![Regression, Anova]),
        (AnalysisMode::Purpose(Purpose::Verification), vec![Anova]),
        (AnalysisMode::Screening, vec![Anova]),
        (AnalysisMode::NonlinearityCheck, vec![Regression]),
    ];
    for (mode, methods) in &expected {
        let plan = recommend_analysis(*mode);
        ensure(&plan.methods == methods, || {
            format!("{mode:?}: got {:?}, want {methods:?}", plan.methods)
        })?;
    }
    let rows: BTreeSet<String> = expected.iter().map(|(m, _)| recommend_analysis(*m).row).collect();
    ensure(rows.len() == 5, || format!("rows not distinct: {rows:?}"))?;
    Ok("5 rows".into())
}

// 2

fn table_three() -> Check {
    let expected = [
        (FactorRole::NuisanceUnknown, HandlingConcept::Randomization),
        (FactorRole::NuisanceKnownControllable, HandlingConcept::Blocking),
        (FactorRole::NuisanceKnownUncontrollable, HandlingConcept::Ancova),
    ];
    for (role, concept) in expected {
        let got = recommend_nuisance_handling(role);
        ensure(got == concept, || format!("{role:?}: got {got:?}, want {concept:?}"))?;
    }
    Ok("3 rows".into())
}

// 3

fn int_matrix(d: &Design) -> Vec<Vec<i64>> {
    d.matrix
        .iter()
        .map(|r| r.iter().map(|&x| x.round() as i64).collect())
        .collect()
}

fn design_counts() -> Check {
    let mut checked = 0;
    for a in 2..=4 {
        for b in 2..=4 {
            for c in 2..=3 {
                let levels = [a, b, c];
                let d = full_factorial(&levels).map_err(|e| e.to_string())?;
                ensure(d.n_runs() == a * b * c, || {
                    format!("full factorial {levels:?}: {} runs", d.n_runs())
                })?;
                let distinct: BTreeSet<Vec<u64>> = d
                    .matrix
                    .iter()
                    .map(|r| r.iter().map(|x| x.to_bits()).collect())
                    .collect();
                ensure(distinct.len() == d.n_runs(), || {
                    format!("{levels:?}: repeated treatments")
                })?;
                checked += 1;
            }
        }
    }
    for k in 1..=8 {
        let d = full_factorial(&vec![2; k]).map_err(|e| e.to_string())?;
        ensure(d.n_runs() == 1 << k, || format!("2^{k}: {} runs", d.n_runs()))?;
    }

    for n in [4usize, 8, 12, 16, 20, 24] {
        let d = plackett_burman(n - 1).map_err(|e| e.to_string())?;
        ensure(d.n_runs() == n, || format!("PB {}: {} runs", n - 1, d.n_runs()))?;
        let x = int_matrix(&d);
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let dot: i64 = x.iter().map(|r| r[i] * r[j]).sum();
                let want = if i == j { n as i64 } else { 0 };
                ensure(dot == want, || format!("PB N={n}: (XᵀX)[{i},{j}] = {dot}"))?;
            }
        }
    }

    for k in 2..=8 {
        for n0 in 1..=4 {
            for alpha in [AlphaMode::Rotatable, AlphaMode::FaceCentered] {
                let d = central_composite(k, alpha, n0).map_err(|e| e.to_string())?;
                let want = (1 << k) + 2 * k + n0;
                ensure(d.n_runs() == want, || format!("CCD k={k} n0={n0}: {} runs", d.n_runs()))?;
            }
        }
    }
    for k in 3..=7 {
        for n0 in 1..=4 {
            let d = box_behnken(k, n0).map_err(|e| e.to_string())?;
            let want = 2 * k * (k - 1) + n0;
            ensure(d.n_runs() == want, || format!("BB k={k} n0={n0}: {} runs", d.n_runs()))?;
        }
    }

    for (name, runs, cols, levels) in [
        (ArrayName::L4, 4, 3, 2),
        (ArrayName::L8, 8, 7, 2),
        (ArrayName::L9, 9, 4, 3),
    ] {
        let d = orthogonal_array(name);
        ensure(d.n_runs() == runs && d.n_factors() == cols, || {
            format!("{name}: {}x{}", d.n_runs(), d.n_factors())
        })?;
        let x = int_matrix(&d);
        for a in 0..cols {
            for b in a + 1..cols {
                let mut counts: BTreeMap<(i64, i64), usize> = BTreeMap::new();
                for r in &x {
                    *counts.entry((r[a], r[b])).or_default() += 1;
                }
                let each = runs / (levels * levels);
                ensure(
                    counts.len() == levels * levels && counts.values().all(|&c| c == each),
                    || format!("{name}: columns {a},{b} unbalanced: {counts:?}"),
                )?;
            }
        }
    }
    Ok(format!(
        "{checked} mixed-level factorials, PB N=4..24, CCD, BB, L4/L8/L9"
    ))
}

// 4

fn letters(mask: u32) -> String {
    (0..8)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| (b'A' + i as u8) as char)
        .collect()
}

/// Signed column products for every nonempty factor subset.
fn product_columns(d: &Design) -> Vec<(u32, Vec<i8>)> {
    let k = d.n_factors();
    (1u32..1 << k)
        .map(|mask| {
            let col = d
                .matrix
                .iter()
                .map(|r| {
                    (0..k)
                        .filter(|j| mask >> j & 1 == 1)
                        .fold(1i8, |s, j| if r[j] < 0.0 { -s } else { s })
                })
                .collect();
            (mask, col)
        })
        .collect()
}

fn generator_sets(k: usize, p: usize) -> Vec<Vec<String>> {
    let base = k - p;
    let words: Vec<u32> = (1u32..1 << base).filter(|w| w.count_ones() >= 2).collect();
    let gen = |i: usize, w: u32, neg: bool| {
        format!(
            "{}={}{}",
            (b'A' + (base + i) as u8) as char,
            if neg { "-" } else { "" },
            letters(w)
        )
    };
    let mut sets = Vec::new();
    match p {
        1 => {
            for &w in &words {
                sets.push(vec![gen(0, w, false)]);
                sets.push(vec![gen(0, w, true)]);
            }
        }
        2 => {
            for &w1 in &words {
                for &w2 in &words {
                    if w1 != w2 {
                        sets.push(vec![gen(0, w1, false), gen(1, w2, w1 < w2)]);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    sets
}

fn aliasing_oracle() -> Check {
    let mut designs = 0;
    for k in 3..=6 {
        for p in 1..=2 {
            if k - p < 2 {
                continue;
            }
            for gens in generator_sets(k, p) {
                let refs: Vec<&str> = gens.iter().map(String::as_str).collect();
                let d = fractional_factorial(k, &refs).map_err(|e| format!("{gens:?}: {e}"))?;
                ensure(d.n_runs() == 1 << (k - p), || format!("{gens:?}: {} runs", d.n_runs()))?;
                let aliases = alias_structure(&d).map_err(|e| e.to_string())?;
                let cols = product_columns(&d);
                let negated = |c: &[i8]| c.iter().map(|x| -x).collect::<Vec<_>>();

                let low: Vec<&(u32, Vec<i8>)> = cols.iter().filter(|(m, _)| m.count_ones() <= 2).collect();
                for (mask, col) in &low {
                    let want: BTreeSet<String> = low
                        .iter()
                        .filter(|(m, c)| m != mask && (c == col || *c == negated(col)))
                        .map(|(m, _)| letters(*m))
                        .collect();
                    let term = letters(*mask);
                    let got: BTreeSet<String> = aliases
                        .get(&term)
                        .ok_or_else(|| format!("{gens:?}: no entry for {term}"))?
                        .iter()
                        .cloned()
                        .collect();
                    ensure(got == want, || {
                        format!("{gens:?}: {term} aliases {got:?}, brute force {want:?}")
                    })?;
                }

                // defining words are the products that are constant over the runs
                let resolution = cols
                    .iter()
                    .filter(|(_, c)| c.iter().all(|&x| x == c[0]))
                    .map(|(m, _)| m.count_ones())
                    .min();
                ensure(resolution == d.metadata.resolution, || {
                    format!(
                        "{gens:?}: resolution {:?}, brute force {resolution:?}",
                        d.metadata.resolution
                    )
                })?;
                designs += 1;
            }
        }
    }
    Ok(format!("{designs} fractions"))
}

// 5

fn sobol_oracle(dim: usize, i: u64) -> f64 {
    // direction integers m_j from the primitive polynomial recurrence
    let m: Vec<u64> = match dim {
        0 => vec![1; 32],
        1 => {
            // x + 1: m_j = 2 m_{j-1} xor m_{j-1}
            let mut m = vec![1u64];
            for j in 1..32 {
                let prev = m[j - 1];
                m.push((prev << 1) ^ prev);
            }
            m
        }
        _ => unreachable!(),
    };
    let gray = i ^ (i >> 1);
    let mut x = 0u64;
    for (j, mj) in m.iter().enumerate() {
        if gray >> j & 1 == 1 {
            x ^= mj << (31 - j);
        }
    }
    x as f64 / 2f64.powi(32)
}

fn sampling() -> Check {
    let sizes = [
        2, 3, 4, 5, 7, 8, 10, 13, 16, 31, 32, 50, 64, 100, 127, 128, 200, 255, 256,
    ];
    let mut designs = 0;
    for seed in 0..100u64 {
        for k in 1..=8 {
            for &n in &sizes {
                let d = latin_hypercube(k, n, rng::mix(seed, (k * 1000 + n) as u64)).map_err(|e| e.to_string())?;
                for j in 0..k {
                    let mut strata: Vec<usize> = d
                        .matrix
                        .iter()
                        .map(|r| {
                            let x = r[j];
                            assert!((0.0..1.0).contains(&x), "LHS value {x} outside [0, 1)");
                            (x * n as f64).floor() as usize
                        })
                        .collect();
                    strata.sort_unstable();
                    ensure(strata.iter().copied().eq(0..n), || {
                        format!("seed {seed}, k={k}, n={n}, column {j}: strata {strata:?}")
                    })?;
                }
                designs += 1;
            }
        }
    }
    for dims in 1..=2 {
        for n in 1..=64 {
            let d = sobol(dims, n).map_err(|e| e.to_string())?;
            for (i, row) in d.matrix.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    let want = sobol_oracle(j, i as u64 + 1);
                    ensure(x == want, || {
                        format!("Sobol n={n} point {} dim {}: {x} vs {want}", i + 1, j + 1)
                    })?;
                }
            }
        }
    }
    Ok(format!("{designs} LHS designs, Sobol 2x64 prefixes"))
}

// 6

fn treatments(n: usize) -> Vec<Treatment> {
    (0..n)
        .map(|i| BTreeMap::from([("x".to_string(), FactorValue::Number(i as f64))]))
        .collect()
}

fn index_of(t: &Treatment) -> usize {
    t["x"].as_number().expect("numeric") as usize
}

fn randomization() -> Check {
    for seed in 0..500u64 {
        let n = 1 + (seed % 13) as usize;
        let reps = 1 + (seed % 3) as u32;
        let plan = make_plan(
            &treatments(n),
            &PlanOptions {
                seed,
                replicates: reps,
                block: None,
            },
        )
        .map_err(|e| e.to_string())?;
        let mut got: Vec<(usize, u32)> = plan
            .runs
            .iter()
            .map(|r| (index_of(&r.treatment), r.replicate))
            .collect();
        got.sort_unstable();
        let want: Vec<(usize, u32)> = (0..n).flat_map(|t| (1..=reps).map(move |r| (t, r))).collect();
        ensure(got == want, || format!("seed {seed}: run multiset differs"))?;
    }

    let seeds = 10_000u64;
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for seed in 0..seeds {
        let plan = make_plan(
            &treatments(3),
            &PlanOptions {
                seed,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?;
        *counts
            .entry(plan.runs.iter().map(|r| index_of(&r.treatment)).collect())
            .or_default() += 1;
    }
    ensure(counts.len() == 6, || format!("{} distinct orders", counts.len()))?;
    let mut worst: f64 = 0.0;
    for (order, &c) in &counts {
        let f = c as f64 / seeds as f64;
        worst = worst.max((f - 1.0 / 6.0).abs());
        ensure((f - 1.0 / 6.0).abs() <= 0.02, || {
            format!("order {order:?}: frequency {f}")
        })?;
    }

    let block = Factor::categorical("shift", FactorRole::NuisanceKnownControllable, &["a", "b", "c"]);
    for seed in 0..200u64 {
        let plan = block_design(&treatments(5), &block, 2, seed).map_err(|e| e.to_string())?;
        for level in ["a", "b", "c"] {
            let mut within: Vec<usize> = plan
                .runs
                .iter()
                .filter(|r| r.block == Some(FactorValue::Label(level.into())))
                .map(|r| index_of(&r.treatment))
                .collect();
            within.sort_unstable();
            ensure(within == vec![0, 0, 1, 1, 2, 2, 3, 3, 4, 4], || {
                format!("seed {seed}, block {level}: {within:?}")
            })?;
        }
    }
    Ok(format!("max order deviation {worst:.4}"))
}

// 7

fn two_way_brute_force(y: &[Vec<Vec<f64>>]) -> [f64; 4] {
    let a = y.len();
    let b = y[0].len();
    let r = y[0][0].len();
    let n = (a * b * r) as f64;
    let grand = y.iter().flatten().flatten().sum::<f64>() / n;
    let cell: Vec<Vec<f64>> = y
        .iter()
        .map(|row| row.iter().map(|c| c.iter().sum::<f64>() / r as f64).collect())
        .collect();
    let row_mean: Vec<f64> = cell.iter().map(|c| c.iter().sum::<f64>() / b as f64).collect();
    let col_mean: Vec<f64> = (0..b)
        .map(|j| cell.iter().map(|c| c[j]).sum::<f64>() / a as f64)
        .collect();
    let ss_a = (b * r) as f64 * row_mean.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_b = (a * r) as f64 * col_mean.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let mut ss_ab = 0.0;
    let mut ss_e = 0.0;
    for i in 0..a {
        for j in 0..b {
            ss_ab += r as f64 * (cell[i][j] - row_mean[i] - col_mean[j] + grand).powi(2);
            ss_e += y[i][j].iter().map(|v| (v - cell[i][j]).powi(2)).sum::<f64>();
        }
    }
    [ss_a, ss_b, ss_ab, ss_e]
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn statistics() -> Check {
    let mut stream = rng::stream(77);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let a = 2 + rng::index_inclusive(&mut stream, 2);
        let b = 2 + rng::index_inclusive(&mut stream, 2);
        let r = 2 + rng::index_inclusive(&mut stream, 2);
        let y: Vec<Vec<Vec<f64>>> = (0..a)
            .map(|_| {
                (0..b)
                    .map(|_| (0..r).map(|_| 10.0 + 3.0 * rng::standard_normal(&mut stream)).collect())
                    .collect()
            })
            .collect();
        let mut fa = Vec::new();
        let mut fb = Vec::new();
        let mut resp = Vec::new();
        for (i, row) in y.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                for v in c {
                    fa.push(format!("a{i}"));
                    fb.push(format!("b{j}"));
                    resp.push(*v);
                }
            }
        }
        let mut data = Dataset::new(resp.len());
        data.add_categorical("A", fa, &[]).map_err(|e| e.to_string())?;
        data.add_categorical("B", fb, &[]).map_err(|e| e.to_string())?;
        data.add_response("y", resp).map_err(|e| e.to_string())?;
        let terms = [
            ModelTerm::main("A"),
            ModelTerm::main("B"),
            ModelTerm::interaction(&["A", "B"]),
        ];
        let table = anova(&data, "y", &terms, 0.05).map_err(|e| e.to_string())?;
        let got = [
            table.row("A").map(|r| r.sum_of_squares),
            table.row("B").map(|r| r.sum_of_squares),
            table.row("A:B").map(|r| r.sum_of_squares),
            Some(table.residual().sum_of_squares),
        ];
        let want = two_way_brute_force(&y);
        for (g, w) in got.iter().zip(want) {
            let g = g.ok_or_else(|| format!("case {case}: missing row"))?;
            worst = worst.max((g - w).abs());
            ensure((g - w).abs() <= 1e-9, || {
                format!("case {case}: SS {g} vs brute force {w}")
            })?;
        }
    }

    // one-way: means 2 and 3, within SS 4 on 4 df
    let mut data = Dataset::new(6);
    data.add_categorical("g", ["a", "a", "a", "b", "b", "b"].map(String::from).to_vec(), &[])
        .map_err(|e| e.to_string())?;
    data.add_response("y", vec![1.0, 2.0, 3.0, 2.0, 3.0, 4.0])
        .map_err(|e| e.to_string())?;
    let table = anova(&data, "y", &[ModelTerm::main("g")], 0.05).map_err(|e| e.to_string())?;
    let row = table.row("g").ok_or("no row g")?;
    let f = row.f_statistic.ok_or("no F")?;
    let p = row.p_value.ok_or("no p")?;
    ensure(row.df == 1 && table.residual().df == 4, || "wrong df".into())?;
    ensure((f - 1.5).abs() < 1e-12, || format!("F = {f}"))?;
    // F(1,4) density after x = u²: 24 (u² + 4)^(-5/2) du
    let oracle = 1.0 - simpson(|u| 24.0 * (u * u + 4.0).powf(-2.5), 0.0, 1.5f64.sqrt(), 2000);
    ensure((oracle - 0.2880).abs() < 1e-3, || format!("oracle p = {oracle}"))?;
    ensure((p - oracle).abs() < 1e-3 && (p - 0.2880).abs() < 1e-3, || {
        format!("p = {p}, oracle {oracle}")
    })?;
    ensure((f_pvalue(1.5, 1, 4) - p).abs() < 1e-15, || {
        "f_pvalue disagrees with the table".into()
    })?;

    // planted coefficients, noiseless
    let n = 40;
    let mut x = vec![Vec::new(); 3];
    for col in &mut x {
        *col = (0..n).map(|_| 2.0 * rng::unit(&mut stream) - 1.0).collect();
    }
    let beta = [1.5, -2.0, 0.75, 3.25, -1.125, 0.5];
    let y: Vec<f64> = (0..n)
        .map(|i| {
            beta[0]
                + beta[1] * x[0][i]
                + beta[2] * x[1][i]
                + beta[3] * x[2][i]
                + beta[4] * x[0][i] * x[1][i]
                + beta[5] * x[2][i] * x[2][i]
        })
        .collect();
    let mut data = Dataset::new(n);
    for (name, col) in ["u", "v", "w"].iter().zip(&x) {
        data.add_continuous(name, col.clone(), Some((-1.0, 1.0)))
            .map_err(|e| e.to_string())?;
    }
    data.add_response("y", y).map_err(|e| e.to_string())?;
    let terms = [
        ModelTerm::main("u"),
        ModelTerm::main("v"),
        ModelTerm::main("w"),
        ModelTerm::interaction(&["u", "v"]),
        ModelTerm::power("w", 2),
    ];
    let fit = regression(&data, "y", &terms).map_err(|e| e.to_string())?;
    for (label, b) in ["intercept", "u", "v", "w", "u:v", "w^2"].iter().zip(beta) {
        let c = fit
            .coefficient(label)
            .ok_or_else(|| format!("no coefficient {label}"))?;
        ensure((c.estimate - b).abs() <= 1e-8, || {
            format!("{label}: {} vs planted {b}", c.estimate)
        })?;
    }

    // effects against regression coefficients on a 2^3 factorial
    let d = full_factorial(&[2, 2, 2]).map_err(|e| e.to_string())?;
    let y: Vec<f64> = (0..d.n_runs()).map(|_| rng::standard_normal(&mut stream)).collect();
    let effects = effects_two_level(&d, &y).map_err(|e| e.to_string())?;
    let mut data = Dataset::from_design(&d);
    data.add_response("y", y).map_err(|e| e.to_string())?;
    let names = &d.factor_names;
    let mut terms: Vec<ModelTerm> = names.iter().map(|n| ModelTerm::main(n)).collect();
    for a in 0..3 {
        for b in a + 1..3 {
            terms.push(ModelTerm::interaction(&[&names[a], &names[b]]));
        }
    }
    let fit = regression(&data, "y", &terms).map_err(|e| e.to_string())?;
    ensure(effects.len() == 6, || format!("{} effects", effects.len()))?;
    for e in &effects {
        let label: Vec<String> = e.term.chars().map(String::from).collect();
        let c = fit
            .coefficient(&label.join(":"))
            .ok_or_else(|| format!("no coefficient for {}", e.term))?;
        ensure((e.estimate - 2.0 * c.estimate).abs() <= 1e-10, || {
            format!("{}: effect {} vs 2 x {}", e.term, e.estimate, c.estimate)
        })?;
    }

    // size of the test under the null
    let terms: Vec<ModelTerm> = names.iter().map(|n| ModelTerm::main(n)).collect();
    let d2 = full_factorial(&[2, 2, 2, 2]).map_err(|e| e.to_string())?;
    let terms4: Vec<ModelTerm> = d2.factor_names.iter().map(|n| ModelTerm::main(n)).collect();
    let n_sims = 10_000;
    let sigma = (0.05f64 * 0.95 / n_sims as f64).sqrt();
    let mut powers = Vec::new();
    for (design, terms) in [(&d, &terms), (&d2, &terms4)] {
        let est = power_estimate(
            design,
            &PowerConfig {
                terms,
                target: &terms[0],
                coefficients: &BTreeMap::new(),
                noise_sd: 1.0,
                alpha: 0.05,
                n_sims,
                seed: 2024,
            },
        )
        .map_err(|e| e.to_string())?;
        ensure((est.power - 0.05).abs() <= 3.0 * sigma, || {
            format!("power at zero effect {} outside 0.05 ± {}", est.power, 3.0 * sigma)
        })?;
        powers.push(format!("{:.4}", est.power));
    }
    Ok(format!(
        "max SS error {worst:.1e}, p = {p:.4}, size {}",
        powers.join("/")
    ))
}

// 8

fn sut_reproduction() -> Check {
    let cfg = SutConfig::default();
    let run = |k: f64, pr: Priority, r_p: f64| {
        simulate(
            &cfg,
            &SutTreatment {
                k_arci: k,
                priority: pr,
                r_p,
            },
            0,
        )
        .map_err(|e| e.to_string())
    };
    let peaks: Vec<f64> = [0.0, 0.5, 1.0, 2.0]
        .iter()
        .map(|&k| run(k, Priority::QPriority, 5.0).map(|m| m.peak_speed_dev))
        .collect::<Result<_, _>>()?;
    ensure(peaks[3] < peaks[0], || {
        format!("peak {} at K=2 vs {} at K=0", peaks[3], peaks[0])
    })?;
    ensure(peaks.windows(2).all(|w| w[1] <= w[0]), || {
        format!("peaks not monotone in K: {peaks:?}")
    })?;
    let q = run(1.0, Priority::QPriority, 5.0)?.peak_speed_dev;
    let d = run(1.0, Priority::DPriority, 5.0)?.peak_speed_dev;
    ensure(q < d, || format!("q peak {q} vs d peak {d}"))?;
    for k in [0.0, 0.5, 1.0, 2.0] {
        for pr in [Priority::DPriority, Priority::QPriority] {
            let t: Vec<f64> = [0.1, 1.0, 10.0]
                .iter()
                .map(|&r| run(k, pr, r).map(|m| m.recovery_time))
                .collect::<Result<_, _>>()?;
            ensure(t[0] >= t[1] && t[1] >= t[2], || {
                format!("K={k}, {pr:?}: recovery {t:?}")
            })?;
        }
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for _ in 0..2 {
        doe_ok(&["--seed", "2024", "--out-dir", "out", "screen-demo"], dir.path())?;
        reports.push(fs::read(dir.path().join("out/screen_demo.json")).map_err(|e| e.to_string())?);
    }
    ensure(reports[0] == reports[1], || "screen-demo is not deterministic".into())?;
    let report: Value = serde_json::from_slice(&reports[0]).map_err(|e| e.to_string())?;
    let verdict =
        |factor: &str| -> Option<&Value> { report["conclusions"].as_array()?.iter().find(|c| c["factor"] == factor) };
    let k = verdict("K_aRCI").ok_or("no conclusion for K_aRCI")?;
    ensure(k["verdict"] == "treatment_factor", || format!("K_aRCI: {k}"))?;
    let pr = verdict("limit_priority").ok_or("no conclusion for limit_priority")?;
    ensure(pr["verdict"] == "block_at" && pr["level"] == "q", || {
        format!("limit_priority: {pr}")
    })?;
    let rp = verdict("R_p").ok_or("no conclusion for R_p")?;
    ensure(rp["verdict"] == "restrict_range", || format!("R_p: {rp}"))?;
    Ok(format!("R_p restricted to [{}, {}]", rp["low"], rp["high"]))
}

// 9

fn end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    doe_core::fixtures::write_frt(&root.join("specs")).map_err(|e| e.to_string())?;
    doe_ok(
        &[
            "design",
            "specs/frt_blocked.json",
            "--plan",
            "--seed",
            "7",
            "--out-dir",
            "design",
        ],
        root,
    )?;
    let mut outputs = Vec::new();
    for parallel in ["1", "4"] {
        let out = format!("run{parallel}");
        doe_ok(
            &[
                "run",
                "specs/frt_experiment.json",
                "--plan",
                "design/plan.json",
                "--parallel",
                parallel,
                "--out-dir",
                &out,
            ],
            root,
        )?;
        doe_ok(
            &[
                "analyze",
                &format!("{out}/results.csv"),
                "specs/frt_experiment.json",
                "--out-dir",
                &out,
            ],
            root,
        )?;
        outputs.push(fs::read(root.join(&out).join("analysis.json")).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || {
        "analysis.json differs between parallel 1 and 4".into()
    })?;
    let a: Value = serde_json::from_slice(&outputs[0]).map_err(|e| e.to_string())?;
    ensure(a["runs_analysed"] == 24, || format!("analysed {}", a["runs_analysed"]))?;
    Ok(format!("{} bytes identical, 24 runs", outputs[0].len()))
}

// 10

fn resume() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    doe_core::fixtures::write_frt(root).map_err(|e| e.to_string())?;
    let experiment = serde_json::json!({
        "kind": "experiment_specification",
        "version": 1,
        "test_specification": "frt_blocked.json",
        "experiment_setup": {"command": ["doe-echo-runner"], "timeout_s": 10.0},
        "experiment_design": {"master_seed": 99, "replicates": 1}
    });
    fs::write(root.join("echo.json"), experiment.to_string()).map_err(|e| e.to_string())?;
    let counter = root.join("counter.txt");
    let run = |extra: &[&str]| -> Result<Output, String> {
        let mut args = vec!["run", "echo.json", "--out-dir", "out"];
        args.extend_from_slice(extra);
        let out = Command::new(env!("CARGO_BIN_EXE_doe"))
            .args(&args)
            .current_dir(root)
            .env("ECHO_RUNNER_COUNTER", &counter)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("doe {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
        })?;
        Ok(out)
    };

    run(&["--limit", "9"])?;
    // a crash mid-write leaves half a row behind
    let results = root.join("out/results.csv");
    let mut text = fs::read_to_string(&results).map_err(|e| e.to_string())?;
    let last = text.lines().last().unwrap_or_default().to_string();
    text.push_str(&last[..last.len() / 2]);
    fs::write(&results, text).map_err(|e| e.to_string())?;

    run(&["--resume", "--limit", "7"])?;
    run(&["--resume"])?;
    run(&["--resume"])?;

    let counts = fs::read_to_string(&counter).map_err(|e| e.to_string())?;
    let mut per_run: BTreeMap<u64, usize> = BTreeMap::new();
    for line in counts.lines() {
        *per_run
            .entry(line.trim().parse().map_err(|_| format!("bad counter line {line:?}"))?)
            .or_default() += 1;
    }
    ensure(per_run.len() == 24 && per_run.keys().copied().eq(1..=24), || {
        format!("executed ids {:?}", per_run.keys().collect::<Vec<_>>())
    })?;
    ensure(per_run.values().all(|&c| c == 1), || {
        format!(
            "repeated runs {:?}",
            per_run.iter().filter(|(_, &c)| c > 1).collect::<Vec<_>>()
        )
    })?;
    let rows = fs::read_to_string(&results)
        .map_err(|e| e.to_string())?
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .count();
    ensure(rows == 24, || format!("{rows} result rows"))?;
    Ok("24 runs, each executed once over 4 invocations".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check, Duration); 10] = [
        ("1 analysis recommendation table", table_one, Duration::from_secs(1)),
        ("2 nuisance handling table", table_three, Duration::from_secs(1)),
        (
            "3 design counts and orthogonality",
            design_counts,
            Duration::from_secs(5),
        ),
        ("4 aliasing oracle", aliasing_oracle, Duration::from_secs(10)),
        ("5 sampling properties", sampling, Duration::from_secs(10)),
        ("6 randomization soundness", randomization, Duration::from_secs(30)),
        ("7 statistics oracles", statistics, Duration::from_secs(120)),
        ("8 screening reproduction", sut_reproduction, Duration::from_secs(60)),
        ("9 end-to-end determinism", end_to_end, Duration::from_secs(120)),
        ("10 resume safety", resume, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(note) if took <= budget => Ok(note),
            Ok(note) => Err(format!("{note}; over the {budget:?} budget")),
            Err(e) => Err(e),
        };
        match outcome {
            Ok(note) => println!("PASS {name} ({took:.2?}): {note}"),
            Err(e) => {
                failed += 1;
                println!("FAIL {name} ({took:.2?}): {e}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 10 criteria failed");
        std::process::exit(1);
    }
}
