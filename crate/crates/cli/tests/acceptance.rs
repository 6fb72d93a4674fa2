//! Acceptance suite. Each criterion runs in order and prints one
//! PASS/FAIL line to stderr; the test fails if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use subbeaver::beaver::{bb_table, record_at};
use subbeaver::codec::{compose, lit_program_u64, parse, LString};
use subbeaver::enumeration::{count_valid, enumerate_lstrings};
use subbeaver::omega::{omega_from_scan, omega_lower, DyadicRational};
use subbeaver::props::{
    check_budget_ladder, check_structural, check_sub_incompressibility, find_n0,
    refute_candidate,
};
use subbeaver::scan::{scan, ScanOptions};
use subbeaver::{Bits, Budget, Instruction, Program};

use common::{brute_force_valid, ref_omega_numerator, RefBudget};

const CARROT_MAX: usize = 16;
const CARROT_LIMIT: Duration = Duration::from_secs(120);
const REFUTATION_CAP: u64 = 24;
const REFUTATION_JOBS: usize = 8;
const REFUTATION_LIMIT: Duration = Duration::from_secs(600);
const EMPTY_PROGRAM_N0: u64 = 21;
const STRUCTURAL_MAX: usize = 20;
const CONCAT_SAMPLES: usize = 1000;
const CONCAT_MAX_ARGS: usize = 8;
const CONCAT_C: usize = 8;
const LITERAL_MAX: u64 = 1_000_000;
const LITERAL_LIMIT: Duration = Duration::from_secs(60);
const OMEGA_MAX: usize = 16;
const ORACLE_MAX: usize = 14;
const DETERMINISM_MAX: &str = "14";
const LADDER_MAX: usize = 16;

fn say(line: &str) {
    // written past the test harness capture so every run shows it
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

fn budget(id: &str) -> Budget {
    id.parse().unwrap()
}

fn suite_budgets() -> Vec<Budget> {
    ["const:0", "const:10", "const:1000", "linear:2:3"].into_iter().map(budget).collect()
}

fn ladder() -> Vec<Budget> {
    ["const:0", "const:10", "const:1000"].into_iter().map(budget).collect()
}

fn opts() -> ScanOptions<'static> {
    ScanOptions::default()
}

fn carrot_identity() {
    let start = Instant::now();
    for b in suite_budgets() {
        let s = scan(CARROT_MAX, &b, &opts()).unwrap();
        for n in 0..=CARROT_MAX {
            let r = record_at(&s, n);
            assert_eq!(r.bb_plus, &r.bb + 1u32, "{b} n = {n}");
        }
        let t = bb_table(CARROT_MAX, &b, &opts()).unwrap();
        assert_eq!(t.len(), CARROT_MAX);
        assert!(t.iter().all(|r| r.bb_plus == &r.bb + 1u32));
    }
    let elapsed = start.elapsed();
    say(&format!("  carrot identity checked in {elapsed:.2?}"));
    assert!(elapsed < CARROT_LIMIT, "took {elapsed:?}");
}

fn sub_incompressibility() {
    for b in suite_budgets() {
        // cap = N skips the frontier search; only the per-level bound is at stake
        let r = check_sub_incompressibility(CARROT_MAX, &b, CARROT_MAX, &opts()).unwrap();
        assert_eq!(r.levels.len(), CARROT_MAX);
        for level in &r.levels {
            assert_eq!(level.violations, 0, "{b} level {}", level.n);
        }
        assert_eq!(r.violations, 0);
        assert!(r.pass);
        say(&format!("  {b}: {} programs, bb_plus(16) = {}, 0 violations", r.programs, r.bb_plus));
    }
}

fn refutation() {
    let candidates = [
        ("empty program", parse(&Bits::from_ascii("01").unwrap()).unwrap()),
        ("lit_program(0)", lit_program_u64(0)),
        ("single INC", LString::plain(Program::new(vec![Instruction::Inc])).unwrap()),
    ];
    let b = budget("const:10");
    let o = ScanOptions::with_jobs(REFUTATION_JOBS);
    let start = Instant::now();
    let mut failures = Vec::new();
    for (name, p) in &candidates {
        match refute_candidate(p, &b, REFUTATION_CAP, &o) {
            Ok(r) => {
                say(&format!(
                    "  {name}: n0 = {}, frame_len = {}, sub_value = {}, bb_plus(n0) = {}, gap_ok = {}",
                    r.n0, r.frame_len, r.sub_value, r.bb_plus_n0, r.gap_ok
                ));
                if !(r.n0 <= REFUTATION_CAP && r.frame_len as u64 <= r.n0 && r.gap_ok) {
                    failures.push(format!("{name}: record violates the size or gap condition"));
                }
                if *name == "empty program" && r.n0 != EMPTY_PROGRAM_N0 {
                    failures.push(format!("{name}: n0 = {} instead of {EMPTY_PROGRAM_N0}", r.n0));
                }
            }
            Err(e) => {
                say(&format!("  {name}: {e}"));
                if let Ok((n0, f)) = find_n0(p, 64) {
                    say(&format!("  {name}: smallest admissible n0 is {n0} (frame length {})", f.len()));
                }
                failures.push(format!("{name}: {e}"));
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < REFUTATION_LIMIT, "took {elapsed:?}");
    assert!(failures.is_empty(), "{}", failures.join("; "));
}

fn structural() {
    let r = check_structural(STRUCTURAL_MAX).unwrap();
    say(&format!(
        "  {} strings to length {}: {} valid, {} prefix violations, Kraft sum {} (~{})",
        r.strings_checked, r.n, r.valid, r.prefix_violations, r.kraft_sum, r.kraft_decimal
    ));
    assert_eq!(r.prefix_violations, 0);
    assert!(r.kraft_le_one);
    assert!(r.enumeration_agrees);
    assert_eq!(check_structural(6).unwrap().kraft_sum, DyadicRational::new(BigUint::from(17u32), 6));
}

fn random_instruction(rng: &mut StdRng) -> Instruction {
    let op = rng.gen_range(0..8);
    let mut operand = || {
        let width = rng.gen_range(1..40);
        BigUint::from(rng.gen_range(0u64..1 << width))
    };
    match op {
        0 => Instruction::Lit(operand()),
        1 => Instruction::Inc,
        2 => Instruction::Add,
        3 => Instruction::Mul,
        4 => Instruction::Dup,
        5 => Instruction::Swp,
        6 => Instruction::Jz(operand() + 1u32),
        _ => Instruction::Jb(operand() + 1u32),
    }
}

fn random_plain(rng: &mut StdRng) -> LString {
    let n = rng.gen_range(0..10);
    LString::plain(Program::new((0..n).map(|_| random_instruction(rng)).collect())).unwrap()
}

fn random_sentence(rng: &mut StdRng, depth: usize) -> LString {
    if depth == 0 || rng.gen_bool(0.6) {
        return random_plain(rng);
    }
    let k = rng.gen_range(1..=3);
    let args: Vec<LString> = (0..k).map(|_| random_sentence(rng, depth - 1)).collect();
    compose(&random_plain(rng), &args).unwrap()
}

fn concatenation_bounds() {
    let mut rng = StdRng::seed_from_u64(20_240_501);
    let mut violations = 0;
    for _ in 0..CONCAT_SAMPLES {
        let p = random_plain(&mut rng);
        let k = rng.gen_range(1..=CONCAT_MAX_ARGS);
        let args: Vec<LString> = (0..k).map(|_| random_sentence(&mut rng, 2)).collect();
        let frame = compose(&p, &args).unwrap();
        let total: usize = args.iter().map(LString::len).sum();
        if frame.len() > CONCAT_C * k + p.len() + total {
            violations += 1;
        }
        violations += args.iter().filter(|a| a.len() >= frame.len()).count();
        if parse(frame.bits()).unwrap().bits() != frame.bits() {
            violations += 1;
        }
    }
    say(&format!("  {CONCAT_SAMPLES} random frames, {violations} violations"));
    assert_eq!(violations, 0);
}

fn literal_bound() {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    for n in 0..=LITERAL_MAX {
        let len = lit_program_u64(n).len() as f64;
        let x = n as f64;
        let bound = 16.0 + (x + 1.0).log2() + 2.0 * ((x + 2.0).log2() + 1.0).log2();
        assert!(len <= bound, "N = {n}: {len} > {bound}");
        worst = worst.min(bound - len);
    }
    let elapsed = start.elapsed();
    say(&format!("  0..={LITERAL_MAX}: smallest slack {worst:.4} bits, {elapsed:.2?}"));
    assert!(elapsed < LITERAL_LIMIT);
}

fn omega_properties() {
    let rungs = ladder();
    let scans: Vec<_> = rungs.iter().map(|b| scan(OMEGA_MAX, b, &opts()).unwrap()).collect();
    for (b, s) in rungs.iter().zip(&scans) {
        let values: Vec<_> = (0..=OMEGA_MAX).map(|n| omega_from_scan(s, n).value).collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1]), "{b} not monotone in N");
        say(&format!("  {b}: omega_lower(16) = {}", values[OMEGA_MAX]));
    }
    for n in 0..=OMEGA_MAX {
        let values: Vec<_> = scans.iter().map(|s| omega_from_scan(s, n).value).collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1]), "budget ladder not monotone at N = {n}");
    }
    assert_eq!(
        omega_lower(6, &budget("const:10"), &opts()).unwrap().value,
        DyadicRational::new(BigUint::from(17u32), 6)
    );

    let valid = brute_force_valid(ORACLE_MAX);
    for rb in [RefBudget::Const(0), RefBudget::Const(10), RefBudget::Const(1000)] {
        let s = scan(ORACLE_MAX, &budget(&rb.id()), &opts()).unwrap();
        for n in 0..=ORACLE_MAX {
            let want = DyadicRational::new(ref_omega_numerator(&valid, n, rb), n as u64);
            assert_eq!(omega_from_scan(&s, n).value, want, "{} N = {n}", rb.id());
        }
    }
}

fn enumeration_oracle() {
    let listed: Vec<String> = enumerate_lstrings(ORACLE_MAX).iter().map(Bits::to_ascii).collect();
    let brute: Vec<String> = brute_force_valid(ORACLE_MAX).iter().map(|w| common::ascii(w)).collect();
    assert_eq!(listed, brute);
    let counts: Vec<BigUint> = [2, 6, 8].into_iter().map(count_valid).collect();
    assert_eq!(counts, [1u32, 2, 7].map(BigUint::from));
    say(&format!("  {} sentences to length {ORACLE_MAX}; counts at 2/6/8 are 1/2/7", listed.len()));
}

fn bb_cli(budget: &str, extra: &[&str], out: &std::path::Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_subbeaver"))
        .args(["bb", "--max-len", DETERMINISM_MAX, "--budget", budget, "--out"])
        .arg(out)
        .args(extra)
        .status()
        .unwrap();
    assert!(status.success());
}

fn determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cache = cache.to_str().unwrap();
    for b in ["const:10", "linear:2:3"] {
        for format in ["csv", "json"] {
            let path = |tag: &str| dir.path().join(format!("{tag}.{format}"));
            bb_cli(b, &["--format", format, "--jobs", "1"], &path("j1"));
            bb_cli(b, &["--format", format, "--jobs", "8"], &path("j8"));
            bb_cli(b, &["--format", format, "--cache", cache], &path("cold"));
            bb_cli(b, &["--format", format, "--cache", cache, "--jobs", "8"], &path("warm"));
            let reference = std::fs::read(path("j1")).unwrap();
            for tag in ["j8", "cold", "warm"] {
                assert_eq!(std::fs::read(path(tag)).unwrap(), reference, "{b} {format} {tag}");
            }
        }
    }
    say("  jobs 1 = jobs 8 = cold cache = warm cache for const:10 and linear:2:3, csv and json");
}

fn budget_domination() {
    let r = check_budget_ladder(LADDER_MAX, &ladder(), &opts()).unwrap();
    for line in r.table().lines() {
        say(&format!("  {line}"));
    }
    for s in &r.separations {
        say(&format!("  first strict separation {} < {}: {:?}", s.lower, s.upper, s.first_strict));
    }
    assert!(r.rows.iter().all(|row| row.holds));
    assert!(r.pass);
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn()); 10] = [
        ("1 carrot identity bb_plus = bb + 1", carrot_identity),
        ("2 per-level sub-incompressibility", sub_incompressibility),
        ("3 refutation engine at cap 24", refutation),
        ("4 prefix-freeness and Kraft sum", structural),
        ("5 concatenation bounds", concatenation_bounds),
        ("6 literal program length bound", literal_bound),
        ("7 omega monotonicity and oracle", omega_properties),
        ("8 enumeration oracle", enumeration_oracle),
        ("9 determinism under jobs and cache", determinism),
        ("10 budget ladder domination", budget_domination),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let start = Instant::now();
        let ok = panic::catch_unwind(AssertUnwindSafe(check)).is_ok();
        say(&format!("criterion {name}: {} ({:.2?})", if ok { "PASS" } else { "FAIL" }, start.elapsed()));
        if !ok {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
