//! Release gate. Each test checks one shipping guarantee end to end and
//! prints a single summary line when it holds (visible with --nocapture).

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use jcloak::arraylib::{
    flatten_index, fold_index, part_size, split_index, unfold_index, ArrayKind,
    RestructuredContainer,
};
use jcloak::consthide::{emit_f_runtime, eval_f, render_expr, Hider, HidingConfig, YFactorTable};
use jcloak::metrics::count_f_calls;
use jcloak::minij::{
    self, eval_const_expr, BinOpKind, Expr, Item, PrintArg, Program, Stmt,
};
use jcloak::rewriter::{emit_cobs_source, obfuscate_program, ObfuscationConfig};
use jcloak::{run_source, sweep_reports, verify_source};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{corpus, render, run_seed, LCG_A, LCG_C, LCG_M};

const KINDS: [ArrayKind; 3] = [ArrayKind::Split, ArrayKind::Fold, ArrayKind::Flatten];

fn base_config(kind: ArrayKind, seed: u64, iterations: u32) -> ObfuscationConfig {
    let mut cfg = ObfuscationConfig {
        iterations,
        array_kind: kind,
        emit_runtime: true,
        ..ObfuscationConfig::default()
    };
    cfg.hiding.seed = seed;
    cfg
}

#[test]
fn criterion_1_corpus_verifies_byte_exact_for_every_kind_and_iteration() {
    let started = Instant::now();
    let programs = corpus();
    assert!(programs.len() >= 50, "corpus too small: {}", programs.len());
    let mut cells = 0usize;
    for (index, program) in programs.iter().enumerate() {
        for kind in KINDS {
            let source = render(&program.workload, kind);
            for iterations in [1u32, 2, 3, 5] {
                let cfg = base_config(kind, run_seed(index, kind, iterations), iterations);
                let outcome = verify_source(&source, &cfg).unwrap_or_else(|e| {
                    panic!(
                        "{} / {} / {iterations} iterations: {e}",
                        program.name,
                        kind.type_name()
                    )
                });
                assert!(
                    outcome.matched(),
                    "{} / {} / {iterations} iterations: stdout diverged",
                    program.name,
                    kind.type_name()
                );
                assert!(!outcome.original.stdout.is_empty(), "{}: silent program", program.name);
                cells += 1;
            }
        }
    }
    println!(
        "criterion 1 PASS: {} programs x 3 kinds x 4 iteration counts byte-exact ({cells} cells, {:.1}s)",
        programs.len(),
        started.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_2_hidden_constants_evaluate_and_reparse_exactly() {
    let table = YFactorTable::default();
    let hiding = HidingConfig {
        seed: 0xC0DE,
        ..HidingConfig::default()
    };
    let mut hider = Hider::new(&hiding);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut check = |c: i64| {
        let expr = hider.hide_constant(c).unwrap();
        assert_eq!(expr.eval(&table).unwrap(), c, "evaluation drifted for {c}");
        let rendered = render_expr(&expr);
        let reparsed = minij::parse_expression(&rendered)
            .unwrap_or_else(|e| panic!("rendering of {c} does not reparse: {e}\n{rendered}"));
        assert_eq!(
            eval_const_expr(&reparsed, &table),
            Ok(c),
            "round trip drifted for {c}: {rendered}"
        );
    };
    for edge in [0, 1, 2, 3, 4, 5, 1_000_000_000] {
        check(edge);
    }
    for _ in 0..10_000 {
        check(rng.gen_range(0..=1_000_000_000));
    }
    println!("criterion 2 PASS: 10000 constants in [0, 1e9] hide, render and reparse exactly");
}

/// Runs randomized set/get/length traffic against one container and a plain
/// vector, demanding exact agreement throughout and on a final full sweep.
fn drive_against_reference(
    container: &mut RestructuredContainer<i64>,
    rng: &mut ChaCha8Rng,
    ops: usize,
) {
    let len = container.len();
    let mut reference = vec![0i64; len];
    for _ in 0..ops {
        let pos = rng.gen_range(0..len);
        match rng.gen_range(0..5) {
            0 | 1 | 2 => {
                let v = rng.gen_range(-1_000_000..=1_000_000);
                container.set(pos, v).unwrap();
                reference[pos] = v;
            }
            3 => assert_eq!(*container.get(pos).unwrap(), reference[pos], "get({pos})"),
            _ => assert_eq!(container.len(), len),
        }
    }
    for (pos, want) in reference.iter().enumerate() {
        assert_eq!(container.get(pos).unwrap(), want, "final sweep at {pos}");
    }
}

#[test]
fn criterion_3_index_maps_are_bijections_and_containers_track_a_flat_array() {
    for size in 0..=512usize {
        for k in [2, 3, 5] {
            // Flat id = offset into parts laid end to end; hitting every id
            // exactly once proves the map is a bijection onto 0..size.
            let mut base = vec![0usize; k];
            for j in 1..k {
                base[j] = base[j - 1] + part_size(size, k, j - 1);
            }
            let mut seen = vec![false; size];
            for pos in 0..size {
                let (part, offset) = split_index(pos, k);
                assert!(part < k, "size {size} k {k} pos {pos}");
                assert!(
                    offset < part_size(size, k, part),
                    "size {size} k {k} pos {pos}: offset {offset} out of part"
                );
                let id = base[part] + offset;
                assert!(!seen[id], "size {size} k {k}: collision at {id}");
                seen[id] = true;
            }
            assert!(seen.into_iter().all(|b| b), "size {size} k {k}: map not onto");
        }
        for cols in [1, 4, 16] {
            for i in 0..size {
                let (r, c) = fold_index(i, cols);
                assert!(c < cols, "size {size} cols {cols} i {i}");
                assert_eq!(unfold_index(r, c, cols), i, "cols {cols}: unfold broke");
                assert_eq!(flatten_index(r, c, cols), i, "cols {cols}: flatten broke");
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let per_case = 34_000;
    for k in [2, 3, 5] {
        let mut c = RestructuredContainer::split(509, k, 0).unwrap();
        drive_against_reference(&mut c, &mut rng, per_case);
    }
    for cols in [1, 4, 16] {
        let mut c = RestructuredContainer::fold(509, cols, 0).unwrap();
        drive_against_reference(&mut c, &mut rng, per_case);
    }
    for cols in [1, 4, 16] {
        let mut c = RestructuredContainer::flat(37, cols, 0);
        drive_against_reference(&mut c, &mut rng, per_case);
    }
    println!(
        "criterion 3 PASS: bijections exhaustive to size 512; containers match a flat array over 102000 ops per kind"
    );
}

#[test]
fn criterion_4_growth_is_monotonic_and_nesting_depth_tracks_iterations() {
    let started = Instant::now();
    let programs = corpus();
    let mut depth_checks = 0usize;
    for (index, program) in programs.iter().enumerate() {
        // Rotating the kind keeps the sweep affordable while still covering
        // all three layouts across the corpus.
        let kind = KINDS[index % 3];
        let source = render(&program.workload, kind);
        let cfg = base_config(kind, 0xA11CE + index as u64, 1);
        let (_, report) = obfuscate_program(&source, &cfg).unwrap();
        let first_pass_hides = report.per_iteration[0].constants_hidden >= 1;

        let reports = sweep_reports(&source, &cfg, 1..=5).unwrap();
        for pair in reports.windows(2) {
            assert!(
                pair[1].byte_size > pair[0].byte_size,
                "{}: byte size stalled between iterations {} and {}",
                program.name,
                pair[0].iteration,
                pair[1].iteration
            );
            assert!(
                pair[1].steps >= pair[0].steps,
                "{}: steps shrank between iterations {} and {}",
                program.name,
                pair[0].iteration,
                pair[1].iteration
            );
        }
        if first_pass_hides {
            for report in &reports {
                let max_depth = report.f_calls_by_depth.keys().max().copied().unwrap_or(0);
                assert_eq!(
                    max_depth,
                    report.iteration as usize,
                    "{}: nesting depth off at iteration {}",
                    program.name,
                    report.iteration
                );
                depth_checks += 1;
            }
        }
    }
    assert!(depth_checks > 0, "no program hid a literal on its first pass");
    println!(
        "criterion 4 PASS: sizes strictly grow, steps never shrink over iterations 1..=5; depth == iteration in {depth_checks} reports ({:.1}s)",
        started.elapsed().as_secs_f64()
    );
}

/// Max F nesting depth in `e`; records each F call at its depth.
fn depth_of(e: &Expr, counts: &mut BTreeMap<usize, usize>) -> usize {
    match e {
        Expr::Int { .. } | Expr::Var { .. } => 0,
        Expr::Neg { operand, .. } => depth_of(operand, counts),
        Expr::Bin { lhs, rhs, .. } => depth_of(lhs, counts).max(depth_of(rhs, counts)),
        Expr::Call { name, args, .. } => {
            let inner = args.iter().map(|a| depth_of(a, counts)).max().unwrap_or(0);
            if name == "F" {
                let depth = inner + 1;
                *counts.entry(depth).or_insert(0) += 1;
                depth
            } else {
                inner
            }
        }
        Expr::Method { args, .. } => args.iter().map(|a| depth_of(a, counts)).max().unwrap_or(0),
    }
}

fn recount_stmt(stmt: &Stmt, counts: &mut BTreeMap<usize, usize>) {
    match stmt {
        Stmt::DeclInt { init, .. } => {
            if let Some(e) = init {
                depth_of(e, counts);
            }
        }
        Stmt::DeclContainer { size, .. } => {
            depth_of(size, counts);
        }
        Stmt::Assign { value, .. } | Stmt::Return { value, .. } => {
            depth_of(value, counts);
        }
        Stmt::Expr { expr, .. } => {
            depth_of(expr, counts);
        }
        Stmt::Print { arg, .. } => {
            if let PrintArg::Expr(e) = arg {
                depth_of(e, counts);
            }
        }
        Stmt::If {
            cond,
            then_branch,
            else_branch,
            ..
        } => {
            depth_of(cond, counts);
            recount_block(then_branch, counts);
            if let Some(body) = else_branch {
                recount_block(body, counts);
            }
        }
        Stmt::While { cond, body, .. } => {
            depth_of(cond, counts);
            recount_block(body, counts);
        }
        Stmt::For {
            init,
            cond,
            update,
            body,
            ..
        } => {
            if let Some(s) = init {
                recount_stmt(s, counts);
            }
            if let Some(e) = cond {
                depth_of(e, counts);
            }
            if let Some(s) = update {
                recount_stmt(s, counts);
            }
            recount_block(body, counts);
        }
        Stmt::Block { body, .. } => recount_block(body, counts),
    }
}

fn recount_block(stmts: &[Stmt], counts: &mut BTreeMap<usize, usize>) {
    for stmt in stmts {
        recount_stmt(stmt, counts);
    }
}

/// Independent F-call census: walks the syntax tree instead of the token
/// stream, so it shares no code with the production counter.
fn recount_f_calls(program: &Program) -> BTreeMap<usize, usize> {
    let mut counts = BTreeMap::new();
    for item in &program.items {
        match item {
            Item::Function(f) => recount_block(&f.body, &mut counts),
            Item::Stmt(s) => recount_stmt(s, &mut counts),
        }
    }
    counts
}

#[test]
fn criterion_6_token_counter_agrees_with_a_tree_recount() {
    let programs = corpus();
    let mut files = 0usize;
    for (index, program) in programs.iter().enumerate() {
        for kind in KINDS {
            let source = render(&program.workload, kind);
            for iterations in [1u32, 2, 3, 5] {
                let seed = run_seed(index, kind, iterations) ^ 0x600D;
                let cfg = base_config(kind, seed, iterations);
                let (obfuscated, _) = obfuscate_program(&source, &cfg).unwrap();
                let counted = count_f_calls(&obfuscated).unwrap();
                let parsed = minij::parse_program(&obfuscated).unwrap();
                let recounted = recount_f_calls(&parsed);
                assert_eq!(
                    counted,
                    recounted,
                    "{} / {} / {iterations} iterations: counters disagree",
                    program.name,
                    kind.type_name()
                );
                files += 1;
            }
        }
    }
    println!("criterion 6 PASS: token and tree censuses agree on {files} obfuscated files");
}

/// Expects `e` to be `lhs * m` where m is a constant expression evaluating
/// to one; returns lhs.
fn strip_unit_multiplier<'e>(e: &'e Expr, table: &YFactorTable, what: &str) -> &'e Expr {
    match e {
        Expr::Bin {
            op: BinOpKind::Mul,
            lhs,
            rhs,
            ..
        } => {
            assert_eq!(
                eval_const_expr(rhs, table),
                Ok(1),
                "{what}: multiplier is not a disguised one"
            );
            assert!(contains_f(rhs), "{what}: multiplier has no F call");
            lhs
        }
        other => panic!("{what}: expected a multiplication, got {other:?}"),
    }
}

fn contains_f(e: &Expr) -> bool {
    let mut counts = BTreeMap::new();
    depth_of(e, &mut counts) > 0 || !counts.is_empty()
}

/// Multiset of (modulus, depth argument) over every F call shaped
/// `F(_ % m, d)`, plus a shape check that all F calls look exactly so.
fn f_shapes(program: &Program, table: &YFactorTable) -> BTreeMap<(i64, i64), usize> {
    fn walk(e: &Expr, table: &YFactorTable, shapes: &mut BTreeMap<(i64, i64), usize>) {
        match e {
            Expr::Int { .. } | Expr::Var { .. } => {}
            Expr::Neg { operand, .. } => walk(operand, table, shapes),
            Expr::Bin { lhs, rhs, .. } => {
                walk(lhs, table, shapes);
                walk(rhs, table, shapes);
            }
            Expr::Call { name, args, .. } => {
                for a in args {
                    walk(a, table, shapes);
                }
                if name == "F" {
                    assert_eq!(args.len(), 2, "F arity");
                    let depth = match &args[1] {
                        Expr::Int { value, .. } => *value,
                        other => panic!("F depth argument is not a plain literal: {other:?}"),
                    };
                    let modulus = match &args[0] {
                        Expr::Bin {
                            op: BinOpKind::Rem,
                            rhs,
                            ..
                        } => match rhs.as_ref() {
                            Expr::Int { value, .. } => *value,
                            other => panic!("modulus is not a plain literal: {other:?}"),
                        },
                        other => panic!("F argument is not a remainder: {other:?}"),
                    };
                    assert!(modulus > 0, "nonpositive modulus {modulus}");
                    assert!(
                        (0..=table.max_depth() as i64).contains(&depth),
                        "depth argument {depth} outside the table"
                    );
                    *shapes.entry((modulus, depth)).or_insert(0) += 1;
                }
            }
            Expr::Method { args, .. } => {
                for a in args {
                    walk(a, table, shapes);
                }
            }
        }
    }

    fn walk_stmts(stmts: &[Stmt], table: &YFactorTable, shapes: &mut BTreeMap<(i64, i64), usize>) {
        for stmt in stmts {
            match stmt {
                Stmt::DeclInt { init, .. } => {
                    if let Some(e) = init {
                        walk(e, table, shapes);
                    }
                }
                Stmt::DeclContainer { size, .. } => walk(size, table, shapes),
                Stmt::Assign { value, .. } | Stmt::Return { value, .. } => {
                    walk(value, table, shapes)
                }
                Stmt::Expr { expr, .. } => walk(expr, table, shapes),
                Stmt::Print { arg, .. } => {
                    if let PrintArg::Expr(e) = arg {
                        walk(e, table, shapes);
                    }
                }
                Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                    ..
                } => {
                    walk(cond, table, shapes);
                    walk_stmts(then_branch, table, shapes);
                    if let Some(body) = else_branch {
                        walk_stmts(body, table, shapes);
                    }
                }
                Stmt::While { cond, body, .. } => {
                    walk(cond, table, shapes);
                    walk_stmts(body, table, shapes);
                }
                Stmt::For {
                    init,
                    cond,
                    update,
                    body,
                    ..
                } => {
                    if let Some(s) = init {
                        walk_stmts(std::slice::from_ref(s), table, shapes);
                    }
                    if let Some(e) = cond {
                        walk(e, table, shapes);
                    }
                    if let Some(s) = update {
                        walk_stmts(std::slice::from_ref(s), table, shapes);
                    }
                    walk_stmts(body, table, shapes);
                }
                Stmt::Block { body, .. } => walk_stmts(body, table, shapes),
            }
        }
    }

    let mut shapes = BTreeMap::new();
    for item in &program.items {
        match item {
            Item::Function(f) => walk_stmts(&f.body, table, &mut shapes),
            Item::Stmt(s) => walk_stmts(std::slice::from_ref(s), table, &mut shapes),
        }
    }
    shapes
}

#[test]
fn criterion_5_rewrite_rules_hold_on_the_golden_snippet() {
    let source = "SplitArray a = new SplitArray(10);\n\
                  a.setArray(3, 10);\n\
                  int i = 2;\n\
                  print(a.getArray(i));\n\
                  print(a.lengthArray());\n\
                  int x = 5 + 7;\n";
    let table = YFactorTable::default();
    let mut cfg = base_config(ArrayKind::Split, 0x601D, 1);
    cfg.emit_runtime = false;

    let (pass1, _) = obfuscate_program(source, &cfg).unwrap();
    let program = minij::parse_program(&pass1).unwrap();
    let stmts: Vec<&Stmt> = program
        .items
        .iter()
        .map(|item| match item {
            Item::Stmt(s) => s,
            Item::Function(f) => panic!("unexpected function {}", f.name),
        })
        .collect();
    assert_eq!(stmts.len(), 6);

    // Declaration and setArray literals survive hiding with exact values.
    match stmts[0] {
        Stmt::DeclContainer { size, .. } => {
            assert_eq!(eval_const_expr(size, &table), Ok(10));
            assert!(contains_f(size), "declaration size was left plain");
        }
        other => panic!("expected container declaration, got {other:?}"),
    }
    match stmts[1] {
        Stmt::Expr {
            expr: Expr::Method { args, .. },
            ..
        } => {
            assert_eq!(eval_const_expr(&args[0], &table), Ok(3));
            assert_eq!(eval_const_expr(&args[1], &table), Ok(10));
            assert!(contains_f(&args[0]) && contains_f(&args[1]));
        }
        other => panic!("expected setArray call, got {other:?}"),
    }

    // (a) A constant-free getArray index is multiplied by a disguised one.
    match stmts[3] {
        Stmt::Print {
            arg: PrintArg::Expr(Expr::Method { args, .. }),
            ..
        } => {
            let index = strip_unit_multiplier(&args[0], &table, "getArray index");
            assert!(
                matches!(index, Expr::Var { name, .. } if name == "i"),
                "index variable was disturbed: {index:?}"
            );
        }
        other => panic!("expected print(getArray), got {other:?}"),
    }

    // (b) A bare lengthArray call is multiplied by a disguised one.
    match stmts[4] {
        Stmt::Print {
            arg: PrintArg::Expr(e),
            ..
        } => {
            let inner = strip_unit_multiplier(e, &table, "lengthArray");
            assert!(
                matches!(inner, Expr::Method { .. }),
                "lengthArray call was disturbed: {inner:?}"
            );
        }
        other => panic!("expected print(lengthArray), got {other:?}"),
    }

    // (c) A non-candidate statement has exactly its first literal replaced.
    match stmts[5] {
        Stmt::DeclInt { init: Some(init), .. } => match init {
            Expr::Bin {
                op: BinOpKind::Add,
                lhs,
                rhs,
                ..
            } => {
                assert_eq!(eval_const_expr(lhs, &table), Ok(5));
                assert!(contains_f(lhs), "first literal was left plain");
                assert!(
                    matches!(rhs.as_ref(), Expr::Int { value: 7, .. }),
                    "second literal should stay plain, got {rhs:?}"
                );
            }
            other => panic!("expected an addition, got {other:?}"),
        },
        other => panic!("expected int declaration, got {other:?}"),
    }

    // (d) A second pass keeps every existing modulus and depth argument.
    let cfg2 = ObfuscationConfig {
        iterations: 2,
        ..cfg.clone()
    };
    let (pass2, _) = obfuscate_program(source, &cfg2).unwrap();
    let shapes1 = f_shapes(&program, &table);
    let shapes2 = f_shapes(&minij::parse_program(&pass2).unwrap(), &table);
    assert!(!shapes1.is_empty());
    for (shape, count) in &shapes1 {
        let after = shapes2.get(shape).copied().unwrap_or(0);
        assert!(
            after >= *count,
            "second pass dropped F(_ % {}, {}): {count} -> {after}",
            shape.0,
            shape.1
        );
    }

    // Both passes still run to the same output as the original.
    for iterations in [1, 2] {
        let run_cfg = ObfuscationConfig {
            iterations,
            emit_runtime: true,
            ..cfg.clone()
        };
        let outcome = verify_source(source, &run_cfg).unwrap();
        assert!(outcome.matched(), "iteration {iterations} changed behavior");
    }

    println!(
        "criterion 5 PASS: golden snippet keeps values, gains unit multipliers, and reobfuscation preserves depth and modulus arguments"
    );
}

/// Emitted-container harness: random set/get/length traffic routed through
/// the cobs* helper functions, mirrored against the native container.
fn check_cobs_harness(kind: ArrayKind, k: usize, cols: usize, seed: u64) -> usize {
    const SIZE: i64 = 501;
    const ROWS: i64 = 37;
    const OPS: i64 = 10_000;

    let mut cfg = ObfuscationConfig {
        k,
        cols,
        ..ObfuscationConfig::default()
    };
    cfg.hiding.seed = seed;
    let runtime = emit_f_runtime(&cfg.hiding.table);
    let cobs = emit_cobs_source(kind, &cfg).unwrap();

    let (setup, locals, set_stmt, get_stmt, len_stmt) = match kind {
        ArrayKind::Split => {
            let parts: Vec<String> = (0..k).map(|j| format!("part{j}")).collect();
            let setup = parts
                .iter()
                .enumerate()
                .map(|(j, p)| {
                    format!("FlattenedArray {p} = new FlattenedArray(cobsPartSize({SIZE}, {j}));\n")
                })
                .collect::<String>();
            let args = parts.join(", ");
            (
                setup,
                format!("    int pos = state % {SIZE};\n"),
                format!("cobsSetArray({args}, pos, v);"),
                format!("print(cobsGetArray({args}, pos));"),
                format!("print(cobsLengthArray({args}));"),
            )
        }
        ArrayKind::Fold => (
            format!("FlattenedArray grid = new FlattenedArray(cobsRows({SIZE}) * {cols});\n"),
            format!("    int pos = state % {SIZE};\n"),
            "cobsSetArray(grid, pos, v);".to_string(),
            "print(cobsGetArray(grid, pos));".to_string(),
            format!("print(cobsLengthArray({SIZE}));"),
        ),
        ArrayKind::Flatten => (
            format!(
                "FlattenedArray data = new FlattenedArray({});\n",
                ROWS * cols as i64
            ),
            format!("    int r = state % {ROWS};\n    int c = (state / 128) % {cols};\n"),
            "cobsSetArray(data, r, c, v);".to_string(),
            "print(cobsGetArray(data, r, c));".to_string(),
            "print(cobsLengthArray(data));".to_string(),
        ),
    };
    let source = format!(
        "{runtime}\n{cobs}\n{setup}\
         int state = 99991;\n\
         int u = 0;\n\
         while (u < {OPS}) {{\n\
         \x20   state = (state * {LCG_A} + {LCG_C}) % {LCG_M};\n\
         {locals}\
         \x20   int v = state % 100000;\n\
         \x20   if (state % 3 == 0) {{\n\
         \x20       {set_stmt}\n\
         \x20   }} else {{\n\
         \x20       {get_stmt}\n\
         \x20   }}\n\
         \x20   u = u + 1;\n\
         }}\n\
         {len_stmt}\n"
    );
    let opts = jcloak::exec_options_for(&cfg);
    let result = run_source(&source, &opts)
        .unwrap_or_else(|e| panic!("{} harness does not parse: {e}", kind.type_name()));
    assert!(
        result.ok(),
        "{} harness halted: {:?}",
        kind.type_name(),
        result.status
    );

    let mut container = match kind {
        ArrayKind::Split => RestructuredContainer::split(SIZE as usize, k, 0).unwrap(),
        ArrayKind::Fold => RestructuredContainer::fold(SIZE as usize, cols, 0).unwrap(),
        ArrayKind::Flatten => RestructuredContainer::flat(ROWS as usize, cols, 0),
    };
    let mut expected = String::new();
    let mut state: i64 = 99991;
    for _ in 0..OPS {
        state = (state * LCG_A + LCG_C) % LCG_M;
        let pos = if kind == ArrayKind::Flatten {
            let r = (state % ROWS) as usize;
            let c = ((state / 128) % cols as i64) as usize;
            flatten_index(r, c, cols)
        } else {
            (state % SIZE) as usize
        };
        let v = state % 100_000;
        if state % 3 == 0 {
            container.set(pos, v).unwrap();
        } else {
            expected.push_str(&format!("{}\n", container.get(pos).unwrap()));
        }
    }
    expected.push_str(&format!("{}\n", container.len()));
    assert_eq!(
        result.stdout,
        expected,
        "{} harness diverged from the native container (k={k}, cols={cols})",
        kind.type_name()
    );
    OPS as usize
}

#[test]
fn criterion_7_emitted_runtimes_match_the_native_implementations() {
    let mut container_ops = 0usize;
    for (case, (k, cols)) in [(2usize, 16usize), (3, 4)].into_iter().enumerate() {
        for kind in KINDS {
            container_ops += check_cobs_harness(kind, k, cols, 0x7A + case as u64);
        }
    }

    // The emitted F definition shadows the builtin, so the interpreter run
    // below exercises the MiniJ text while the mirror uses native evalF.
    let table = YFactorTable::default();
    let runtime = emit_f_runtime(&table);
    let samples: i64 = 1_000_000;
    let source = format!(
        "{runtime}\n\
         int state = 424243;\n\
         int acc = 0;\n\
         int i = 0;\n\
         while (i < {samples}) {{\n\
         \x20   state = (state * {LCG_A} + {LCG_C}) % {LCG_M};\n\
         \x20   int a = state % 1000000;\n\
         \x20   int depth = state % 7;\n\
         \x20   acc = (acc + F(a, depth)) % 1000000007;\n\
         \x20   if (i % 131072 == 0) {{ print(acc); }}\n\
         \x20   i = i + 1;\n\
         }}\n\
         print(acc);\n"
    );
    let result = run_source(&source, &Default::default()).unwrap();
    assert!(result.ok(), "F harness halted: {:?}", result.status);

    let mut expected = String::new();
    let mut state: i64 = 424243;
    let mut acc: i64 = 0;
    for i in 0..samples {
        state = (state * LCG_A + LCG_C) % LCG_M;
        let a = state % 1_000_000;
        let depth = (state % 7) as usize;
        acc = (acc + eval_f(a, depth, &table).unwrap()) % 1_000_000_007;
        if i % 131_072 == 0 {
            expected.push_str(&format!("{acc}\n"));
        }
    }
    expected.push_str(&format!("{acc}\n"));
    assert_eq!(result.stdout, expected, "interpreted F drifted from evalF");

    println!(
        "criterion 7 PASS: emitted containers match over {container_ops} ops x 2 configs; emitted F matches evalF on {samples} samples"
    );
}
