use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use subbeaver::beaver::{table_from_scan, to_csv, to_json};
use subbeaver::codec::{self, LanguageConstants};
use subbeaver::error::{BudgetError, StoreError};
use subbeaver::omega::omega_from_scan;
use subbeaver::props::{verify, VerifyConfig};
use subbeaver::scan::{scan, ScanOptions};
use subbeaver::store::CacheDir;
use subbeaver::submachine::{sub_run_lstring, DEFAULT_META_FUEL};
use subbeaver::{Bits, Budget, Error, Fuel, LString, VM_ID};

const DEFAULT_RUN_FUEL: u64 = 1_000_000;
const DEFAULT_CAP: usize = 24;

#[derive(Parser, Debug)]
#[command(name = "subbeaver", version, about = "Busy Beaver Plus over time-bounded submachines")]
struct Cli {
    /// Step limit for running `prog:` budget programs.
    #[arg(long, global = true, default_value_t = DEFAULT_META_FUEL)]
    meta_fuel: u64,

    /// Worker threads for enumeration-backed commands.
    #[arg(long, short = 'j', global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pretty-print the parse tree of a sentence.
    Decode { bits: String },
    /// Run a sentence on the universal machine, or under a budget.
    Run {
        bits: String,
        #[arg(long, conflicts_with = "fuel")]
        budget: Option<String>,
        #[arg(long)]
        fuel: Option<u64>,
    },
    /// List every valid sentence up to a length bound.
    Enumerate {
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        count_only: bool,
    },
    /// Tabulate BB and BB⁺ for n = 1..=max-len.
    Bb {
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        budget: String,
        /// Also report BB⁺(max-len) on stderr.
        #[arg(long)]
        plus: bool,
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Rewrite the cache partition deduplicated and sorted afterwards.
        #[arg(long, requires = "cache")]
        compact: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact lower bound of the time-limited halting probability.
    Omega {
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        budget: String,
    },
    /// Run the property suite and print one JSON report.
    Verify {
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        budget: String,
        #[arg(long)]
        budget2: Option<String>,
        /// Plain program to refute as a BB⁺ candidate.
        #[arg(long)]
        candidate: Option<String>,
        /// Largest length searched for frontier witnesses and n0.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Emit lit_program(N) and compare its length with the literal bound.
    EncodeLiteral { n: String },
    /// Build the application P∘w₁∘…∘w_k. `star` is accepted as an alias.
    #[command(alias = "star")]
    Compose {
        head: String,
        #[arg(required = true)]
        args: Vec<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
    Io(io::Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        Failure::Core(e.into())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => 1,
            Failure::Core(e) => match e {
                Error::Bits(_) | Error::Parse(_) | Error::Domain(_) => 2,
                Error::Budget(BudgetError::BadSpec(_)) | Error::Invalid(_) => 1,
                Error::Budget(BudgetError::NotTotal { .. }) => 3,
                Error::Store(_) => 4,
                Error::CapTooSmall { .. } | Error::NotDominated { .. } => 5,
            },
            Failure::Verification => 5,
        }
    }
}

fn budget(spec: &str, meta_fuel: u64) -> Result<Budget, Failure> {
    Budget::parse_with_meta(spec, meta_fuel).map_err(|e| Failure::Usage(e.to_string()))
}

fn sentence(text: &str) -> Result<LString, Failure> {
    let bits = Bits::parse_any(text).map_err(Error::from)?;
    Ok(codec::parse(&bits).map_err(Error::from)?)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let opts = ScanOptions::with_jobs(cli.jobs as usize);
    match cli.command {
        Command::Decode { bits } => {
            let s = sentence(&bits)?;
            print!("{}", s.pretty());
        }
        Command::Run { bits, budget: b, fuel } => {
            let s = sentence(&bits)?;
            match b {
                Some(spec) => {
                    let b = budget(&spec, cli.meta_fuel)?;
                    let r = sub_run_lstring(&s, &b).map_err(Error::from)?;
                    info!("{}", r.outcome);
                    println!("{}", r.value);
                }
                None => {
                    let fuel = Fuel::Limited(fuel.unwrap_or(DEFAULT_RUN_FUEL));
                    println!("{}", subbeaver::vm::run_lstring(&s, fuel));
                }
            }
        }
        Command::Enumerate { max_len, count_only } => {
            if count_only {
                println!("{}", subbeaver::enumeration::count_valid(max_len));
            } else {
                let mut out = io::BufWriter::new(io::stdout().lock());
                for w in subbeaver::enumeration::enumerate_lstrings(max_len) {
                    writeln!(out, "{w}")?;
                }
                out.flush()?;
            }
        }
        Command::Bb { max_len, budget: spec, plus, cache, compact, format, out } => {
            let b = budget(&spec, cli.meta_fuel)?;
            let id = b.id();
            let dir = cache.map(CacheDir::open).transpose()?;
            let store = match &dir {
                Some(d) => d.load(&id, VM_ID)?,
                None => Default::default(),
            };
            let opts = ScanOptions { cache: store.partition(&id, VM_ID), record_new: dir.is_some(), ..opts };
            let s = scan(max_len, &b, &opts)?;
            if let Some(d) = &dir {
                info!("caching {} new results in {}", s.new_records.len(), d.root().display());
                d.append(&s.new_records)?;
                if compact {
                    d.compact(&id, VM_ID)?;
                }
            }
            let table = table_from_scan(&s);
            let text = match format {
                Format::Csv => to_csv(&table),
                Format::Json => to_json(&table),
            };
            emit(out.as_ref(), &text)?;
            if plus {
                let top = subbeaver::beaver::record_at(&s, max_len);
                eprintln!("bb_plus({max_len}, {id}) = {}", top.bb_plus);
            }
        }
        Command::Omega { max_len, budget: spec } => {
            let b = budget(&spec, cli.meta_fuel)?;
            let r = omega_from_scan(&scan(max_len, &b, &opts)?, max_len);
            println!("omega_lower({max_len}, {}) = {}", r.budget_id, r.value);
            println!("approx {} (20 significant digits, truncated)", r.value.to_decimal(20));
            println!("halted {} timed_out {}", r.halted, r.timed_out);
        }
        Command::Verify { max_len, budget: spec, budget2, candidate, cap } => {
            let cfg = VerifyConfig {
                max_len,
                budget: budget(&spec, cli.meta_fuel)?,
                budget2: budget2.map(|s| budget(&s, cli.meta_fuel)).transpose()?,
                candidate: candidate.map(|c| sentence(&c)).transpose()?,
                cap,
            };
            let report = verify(&cfg, &opts)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Io(e.into()))?;
            println!("{json}");
            if !report.pass {
                return Err(Failure::Verification);
            }
        }
        Command::EncodeLiteral { n } => {
            let n: num_bigint::BigUint =
                n.parse().map_err(|_| Failure::Usage(format!("not a natural number: {n:?}")))?;
            let p = codec::lit_program(&n);
            let nf = num_traits::ToPrimitive::to_f64(&n).unwrap_or(f64::INFINITY);
            let bound = LanguageConstants::FIXED.literal_bound(nf);
            println!("program {}", p.bits());
            println!("compact {}", p.bits().to_compact());
            println!("length {}", p.len());
            println!("bound {bound:.6}");
            println!("within_bound {}", (p.len() as f64) <= bound);
        }
        Command::Compose { head, args } => {
            let head = sentence(&head)?;
            let args = args.iter().map(|a| sentence(a)).collect::<Result<Vec<_>, _>>()?;
            let s = codec::compose(&head, &args).map_err(Error::from)?;
            println!("{}", s.bits());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Io(e) => eprintln!("error: {e}"),
                Failure::Verification => eprintln!("verification failed"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
