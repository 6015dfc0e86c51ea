//! Acceptance suite. All criteria run inside a single sequential test so the
//! wall-time measurements of the scaling criterion are not polluted by
//! parallel sibling tests; one PASS/FAIL line is printed per criterion
//! (visible with `cargo test --test acceptance -- --nocapture`).

mod common;

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{
    chain_formula_text, grid_formula_text, random_formula, tree_incidence_formula, FormulaParams,
};
use tdcount::counter::{self, count_models, CountTable};
use tdcount::decompose::{
    heuristic_decompose, parse_td, validate, write_td, Strategy, TreeDecomposition,
};
use tdcount::formula::{parse_dimacs, write_dimacs, Formula, VarMode};
use tdcount::incidence::build_incidence;
use tdcount::nicety::make_nice;
use tdcount::oracle;

/// Runs one criterion body, prints its PASS/FAIL line, and reports success.
fn criterion(number: u32, description: &str, body: impl FnOnce()) -> bool {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(body)) {
        Ok(()) => {
            println!("acceptance criterion {number} ({description}): PASS");
            true
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".to_string());
            println!("acceptance criterion {number} ({description}): FAIL\n    {message}");
            false
        }
    }
}

#[test]
fn acceptance_criteria() {
    let checks: [(u32, &str, fn()); 8] = [
        (
            1,
            "500 random instances match brute force in both modes, under 1 s each",
            criterion_1_oracle_equivalence,
        ),
        (
            2,
            "every node table matches brute-force enumeration on 50 instances",
            criterion_2_cell_level_equivalence,
        ),
        (
            3,
            "the two reference formulas count correctly",
            criterion_3_reference_formulas,
        ),
        (
            4,
            "min-fill, min-degree and an imported single-bag decomposition agree on 100 instances",
            criterion_4_decomposition_independence,
        ),
        (
            5,
            "heuristic decompositions validate, nice transforms keep invariants, trees get width 1",
            criterion_5_structural_validity,
        ),
        (
            6,
            "chain family scales linearly in n; grid family stays within the width bound",
            criterion_6_scaling_sanity,
        ),
        (
            7,
            "PACE .td and DIMACS round-trip identically on 100 generated cases each",
            criterion_7_format_round_trips,
        ),
        (
            8,
            "count is nonzero exactly when brute force finds a satisfying assignment",
            criterion_8_satisfiability_consistency,
        ),
    ];

    let failed: Vec<u32> = checks
        .into_iter()
        .filter(|&(number, description, body)| !criterion(number, description, body))
        .map(|(number, _, _)| number)
        .collect();
    assert!(failed.is_empty(), "failed acceptance criteria: {failed:?}");
}

fn count_via_heuristic(formula: &Formula, strategy: Strategy, mode: VarMode) -> BigUint {
    let graph = build_incidence(formula, mode);
    let td = heuristic_decompose(&graph, strategy);
    let nice = make_nice(&td, &graph).expect("heuristic decomposition is valid");
    count_models(formula, &nice, mode).expect("counting succeeds")
}

fn criterion_1_params() -> FormulaParams {
    FormulaParams {
        max_vars: 16,
        max_clauses: 40,
        max_clause_width: 5,
        allow_empty_clauses: true,
    }
}

fn criterion_1_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let params = criterion_1_params();
    for instance in 0..500 {
        let formula = random_formula(&mut rng, &params);
        let started = Instant::now();
        let declared = count_via_heuristic(&formula, Strategy::MinFill, VarMode::Declared);
        let strict = count_via_heuristic(&formula, Strategy::MinFill, VarMode::Strict);
        let elapsed = started.elapsed();
        assert!(
            elapsed < Duration::from_secs(1),
            "instance {instance} took {elapsed:?}"
        );
        assert_eq!(
            declared,
            oracle::brute_force_count(&formula, VarMode::Declared).unwrap(),
            "instance {instance}, declared mode"
        );
        assert_eq!(
            strict,
            oracle::brute_force_count(&formula, VarMode::Strict).unwrap(),
            "instance {instance}, strict mode"
        );
    }
}

fn criterion_2_cell_level_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let params = FormulaParams {
        max_vars: 10,
        max_clauses: 15,
        max_clause_width: 4,
        allow_empty_clauses: true,
    };
    for instance in 0..50 {
        let formula = random_formula(&mut rng, &params);
        let graph = build_incidence(&formula, VarMode::Declared);
        let td = heuristic_decompose(&graph, Strategy::MinFill);
        let nice = make_nice(&td, &graph).unwrap();
        let mut tables: Vec<Option<CountTable>> = vec![None; nice.node_count()];
        counter::evaluate(&formula, &nice, |node, table| {
            tables[node] = Some(table.clone());
        })
        .unwrap();
        for (node, table) in tables.iter().enumerate() {
            let expected = oracle::brute_force_table(&formula, &nice, node).unwrap();
            assert_eq!(
                table.as_ref().unwrap(),
                &expected,
                "instance {instance}, node {node}"
            );
        }
    }
}

fn criterion_3_reference_formulas() {
    // {{¬x,y,z},{¬y,¬z},{x,¬y}}: brute force over 8 assignments gives 4
    let three = parse_dimacs("p cnf 3 3\n-1 2 3 0\n-2 -3 0\n1 -2 0\n").unwrap();
    assert_eq!(
        oracle::brute_force_count(&three, VarMode::Strict).unwrap(),
        BigUint::from(4u32)
    );
    for strategy in [Strategy::MinFill, Strategy::MinDegree] {
        assert_eq!(
            count_via_heuristic(&three, strategy, VarMode::Strict),
            BigUint::from(4u32)
        );
    }

    // the five-clause formula over u..z: checked against the 2^6 oracle
    let five = parse_dimacs("p cnf 6 5\n1 -2 -5 0\n-1 6 0\n2 -3 0\n3 -4 0\n4 5 -6 0\n").unwrap();
    let expected = oracle::brute_force_count(&five, VarMode::Strict).unwrap();
    for strategy in [Strategy::MinFill, Strategy::MinDegree] {
        assert_eq!(
            count_via_heuristic(&five, strategy, VarMode::Strict),
            expected
        );
    }
}

fn criterion_4_decomposition_independence() {
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    let params = FormulaParams {
        max_vars: 6,
        max_clauses: 8,
        max_clause_width: 3,
        allow_empty_clauses: true,
    };
    for instance in 0..100 {
        let formula = random_formula(&mut rng, &params);
        let min_fill = count_via_heuristic(&formula, Strategy::MinFill, VarMode::Declared);
        let min_degree = count_via_heuristic(&formula, Strategy::MinDegree, VarMode::Declared);

        // single bag holding every vertex, routed through the .td import path
        let graph = build_incidence(&formula, VarMode::Declared);
        let mut single = TreeDecomposition::new();
        single.add_node(graph.vertices().collect());
        let text = write_td(
            &single,
            formula.declared_var_count(),
            formula.clause_count(),
        );
        let imported =
            parse_td(&text, formula.declared_var_count(), formula.clause_count()).unwrap();
        assert!(validate(&graph, &imported).unwrap().is_valid());
        let nice = make_nice(&imported, &graph).unwrap();
        let single_bag = count_models(&formula, &nice, VarMode::Declared).unwrap();

        assert_eq!(min_fill, min_degree, "instance {instance}");
        assert_eq!(min_fill, single_bag, "instance {instance}");
    }
}

fn criterion_5_structural_validity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    let params = FormulaParams {
        max_vars: 12,
        max_clauses: 20,
        max_clause_width: 4,
        allow_empty_clauses: true,
    };
    for instance in 0..150 {
        let formula = random_formula(&mut rng, &params);
        let mode = if instance % 2 == 0 {
            VarMode::Declared
        } else {
            VarMode::Strict
        };
        let graph = build_incidence(&formula, mode);
        for strategy in [Strategy::MinFill, Strategy::MinDegree] {
            let td = heuristic_decompose(&graph, strategy);
            let report = validate(&graph, &td).unwrap();
            assert!(report.is_valid(), "instance {instance}: {report:?}");
            let nice = make_nice(&td, &graph).unwrap();
            nice.check_invariants(&graph).unwrap();
            assert!(
                nice.width() <= td.width().unwrap(),
                "instance {instance}: width grew"
            );
        }
    }

    // tree-shaped incidence graphs decompose to width exactly 1
    for instance in 0..30 {
        let clause_count = rng.gen_range(1..=12);
        let formula = tree_incidence_formula(&mut rng, clause_count);
        let graph = build_incidence(&formula, VarMode::Strict);
        for strategy in [Strategy::MinFill, Strategy::MinDegree] {
            let td = heuristic_decompose(&graph, strategy);
            assert!(validate(&graph, &td).unwrap().is_valid());
            assert_eq!(td.width().unwrap(), 1, "tree instance {instance}");
        }
    }
}

/// Runs the CLI binary on `text` and returns (k, N, wall_time_ms) from the
/// stats JSON.
fn run_binary_with_stats(text: &str) -> (usize, usize, f64) {
    use std::io::Write;
    use std::process::{Command, Stdio};
    let mut child = Command::new(env!("CARGO_BIN_EXE_tdcount"))
        .arg("--stats")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(text.as_bytes())
        .unwrap();
    let output = child.wait_with_output().unwrap();
    assert!(output.status.success(), "counter run failed: {output:?}");
    let stderr = String::from_utf8(output.stderr).unwrap();
    let stats: serde_json::Value = serde_json::from_str(stderr.trim()).expect("stats JSON");
    (
        stats["width"].as_u64().unwrap() as usize,
        stats["node_count"].as_u64().unwrap() as usize,
        stats["wall_time_ms"].as_f64().unwrap(),
    )
}

fn best_of_three(text: &str) -> (usize, usize, f64) {
    let mut best: Option<(usize, usize, f64)> = None;
    for _ in 0..3 {
        let run = run_binary_with_stats(text);
        best = Some(match best {
            None => run,
            Some(prev) if run.2 < prev.2 => run,
            Some(prev) => prev,
        });
    }
    best.unwrap()
}

fn criterion_6_scaling_sanity() {
    // constant-width chain: doubling n may cost at most a factor of 3
    let runs: Vec<(u32, (usize, usize, f64))> = [512u32, 1024, 2048]
        .into_iter()
        .map(|n| (n, best_of_three(&chain_formula_text(n))))
        .collect();
    for window in runs.windows(2) {
        let (n_small, (k_small, _, t_small)) = &window[0];
        let (n_large, (k_large, _, t_large)) = &window[1];
        assert_eq!(k_small, k_large, "chain width must not depend on n");
        assert!(
            *t_large <= 3.0 * t_small.max(0.5),
            "doubling n from {n_small} to {n_large} scaled wall time from \
             {t_small:.3} ms to {t_large:.3} ms (allowed factor 3)"
        );
    }

    // growing width: log2 of the wall time stays below 2k + log2(N) + 12,
    // the shape of the per-node 4^k bound with a generous constant
    for size in [2u32, 3, 4] {
        let (k, nodes, wall_ms) = best_of_three(&grid_formula_text(size, size));
        let log_time = (wall_ms * 1e3).max(1.0).log2();
        let bound = 2.0 * k as f64 + (nodes as f64).log2() + 12.0;
        assert!(
            log_time <= bound,
            "grid {size}x{size}: log2(time_us) = {log_time:.2} exceeds bound {bound:.2} \
             (k = {k}, N = {nodes})"
        );
    }
}

fn criterion_7_format_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(7007);
    let params = FormulaParams {
        max_vars: 12,
        max_clauses: 20,
        max_clause_width: 4,
        allow_empty_clauses: true,
    };
    for instance in 0..100 {
        let formula = random_formula(&mut rng, &params);

        let reparsed = parse_dimacs(&write_dimacs(&formula)).unwrap();
        assert_eq!(reparsed, formula, "DIMACS instance {instance}");

        let graph = build_incidence(&formula, VarMode::Declared);
        let strategy = if instance % 2 == 0 {
            Strategy::MinFill
        } else {
            Strategy::MinDegree
        };
        let td = heuristic_decompose(&graph, strategy);
        let text = write_td(&td, formula.declared_var_count(), formula.clause_count());
        let back = parse_td(&text, formula.declared_var_count(), formula.clause_count()).unwrap();
        assert_eq!(back, td, ".td instance {instance}");
    }
}

fn criterion_8_satisfiability_consistency() {
    // same instance stream as criterion 1
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let params = criterion_1_params();
    let mut satisfiable = 0usize;
    for instance in 0..500 {
        let formula = random_formula(&mut rng, &params);
        let counted = count_via_heuristic(&formula, Strategy::MinFill, VarMode::Strict);
        let oracle_count = oracle::brute_force_count(&formula, VarMode::Strict).unwrap();
        assert_eq!(
            counted >= BigUint::one(),
            !oracle_count.is_zero(),
            "instance {instance}"
        );
        if !oracle_count.is_zero() {
            satisfiable += 1;
        }
    }
    // the generator must exercise both outcomes
    assert!(satisfiable > 0 && satisfiable < 500);
}
