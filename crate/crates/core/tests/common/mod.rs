//! Deterministic corpus of MiniJ programs shared by the differential and
//! acceptance suites. Every program is generated from a fixed master seed,
//! parameterized over the container kind, and prints a digest of its work so
//! stdout comparison is meaningful.

use jcloak::arraylib::ArrayKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Multiplier/increment/modulus of the in-language pseudo-random walk.
/// The modulus is the largest magnitude a literal may have, so the generated
/// programs stay rewritable as-is.
pub const LCG_A: i64 = 1103515245;
pub const LCG_C: i64 = 12345;
pub const LCG_M: i64 = 2147483647;

#[derive(Debug, Clone)]
pub enum Workload {
    /// Sequential fill, strided print-back. Loop bodies carry literals.
    SequentialFill {
        size: i64,
        mul: i64,
        add: i64,
        stride: i64,
    },
    /// Sequential fill with literal-free loop bodies, for large arrays where
    /// per-pass literal doubling inside hot statements would dominate.
    SequentialFillBig {
        size: i64,
        mul: i64,
        add: i64,
        stride: i64,
    },
    /// Random-index reads accumulated into a checksum.
    RandomRead { size: i64, ops: i64, seed0: i64 },
    /// Random mix of writes and read-modify-writes, then a full sum.
    MixedReadWrite { size: i64, ops: i64, seed0: i64 },
}

#[derive(Debug, Clone)]
pub struct CorpusProgram {
    pub name: String,
    pub workload: Workload,
}

/// At least 50 programs: 20 small sequential, 3 large sequential (the
/// biggest at 10^5 elements), 14 random-read, 14 mixed read/write.
pub fn corpus() -> Vec<CorpusProgram> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x00C0_FFEE);
    let mut programs = Vec::new();
    for i in 0..20 {
        let size = rng.gen_range(64..=512);
        programs.push(CorpusProgram {
            name: format!("w1-seq-{i:02}"),
            workload: Workload::SequentialFill {
                size,
                mul: rng.gen_range(2..=97),
                add: rng.gen_range(0..=997),
                stride: (size / 16).max(1),
            },
        });
    }
    for (i, size) in [100_000i64, 12_000, 12_000].into_iter().enumerate() {
        programs.push(CorpusProgram {
            name: format!("w1-big-{i:02}"),
            workload: Workload::SequentialFillBig {
                size,
                mul: rng.gen_range(2..=97),
                add: rng.gen_range(0..=997),
                stride: size / 32,
            },
        });
    }
    for i in 0..14 {
        programs.push(CorpusProgram {
            name: format!("w2-rand-{i:02}"),
            workload: Workload::RandomRead {
                size: rng.gen_range(64..=512),
                ops: rng.gen_range(150..=400),
                seed0: rng.gen_range(1..=1_000_000),
            },
        });
    }
    for i in 0..14 {
        programs.push(CorpusProgram {
            name: format!("w3-mixed-{i:02}"),
            workload: Workload::MixedReadWrite {
                size: rng.gen_range(64..=400),
                ops: rng.gen_range(150..=400),
                seed0: rng.gen_range(1..=1_000_000),
            },
        });
    }
    programs
}

/// Renders the workload as a MiniJ program over the given container kind.
pub fn render(workload: &Workload, kind: ArrayKind) -> String {
    let t = kind.type_name();
    match *workload {
        Workload::SequentialFill {
            size,
            mul,
            add,
            stride,
        } => format!(
            "{t} a = new {t}({size});\n\
             int n = a.lengthArray();\n\
             for (int i = 0; i < n; i = i + 1) {{ a.setArray(i, i * {mul} + {add}); }}\n\
             for (int i = 0; i < n; i = i + {stride}) {{ print(a.getArray(i)); }}\n\
             print(a.lengthArray());\n"
        ),
        Workload::SequentialFillBig {
            size,
            mul,
            add,
            stride,
        } => format!(
            "{t} a = new {t}({size});\n\
             int n = a.lengthArray();\n\
             int m = {mul};\n\
             int c = {add};\n\
             for (int i = 0; i < n; i = i + 1) {{ a.setArray(i, i * m + c); }}\n\
             int s = {stride};\n\
             for (int i = 0; i < n; i = i + s) {{ print(a.getArray(i)); }}\n\
             print(a.lengthArray());\n"
        ),
        Workload::RandomRead { size, ops, seed0 } => format!(
            "{t} a = new {t}({size});\n\
             int n = a.lengthArray();\n\
             for (int i = 0; i < n; i = i + 1) {{ a.setArray(i, i * 3 + 1); }}\n\
             int state = {seed0};\n\
             int acc = 0;\n\
             for (int u = 0; u < {ops}; u = u + 1) {{\n\
             \x20   state = (state * {LCG_A} + {LCG_C}) % {LCG_M};\n\
             \x20   int idx = state % n;\n\
             \x20   acc = acc + a.getArray(idx);\n\
             }}\n\
             print(acc);\n\
             print(a.lengthArray());\n"
        ),
        Workload::MixedReadWrite { size, ops, seed0 } => format!(
            "{t} a = new {t}({size});\n\
             int n = a.lengthArray();\n\
             for (int i = 0; i < n; i = i + 1) {{ a.setArray(i, i); }}\n\
             int state = {seed0};\n\
             int u = 0;\n\
             while (u < {ops}) {{\n\
             \x20   state = (state * {LCG_A} + {LCG_C}) % {LCG_M};\n\
             \x20   int idx = state % n;\n\
             \x20   if (state % 3 == 0) {{\n\
             \x20       a.setArray(idx, state % 1000);\n\
             \x20   }} else {{\n\
             \x20       int v = a.getArray(idx);\n\
             \x20       a.setArray(idx, v + 1);\n\
             \x20   }}\n\
             \x20   u = u + 1;\n\
             }}\n\
             int sum = 0;\n\
             for (int i = 0; i < n; i = i + 1) {{ sum = sum + a.getArray(i); }}\n\
             print(sum);\n\
             print(a.lengthArray());\n"
        ),
    }
}

/// Stable per-run seed so different (program, kind, iterations) cells draw
/// from unrelated RNG streams.
pub fn run_seed(index: usize, kind: ArrayKind, iterations: u32) -> u64 {
    let kind_id = match kind {
        ArrayKind::Split => 0u64,
        ArrayKind::Fold => 1,
        ArrayKind::Flatten => 2,
    };
    0x5EED_0000 + (index as u64) * 97 + kind_id * 31 + u64::from(iterations)
}
