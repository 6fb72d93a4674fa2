//! Persistent cache of submachine results.
//!
//! One record per line:
//!
//! ```text
//! <len>:<hex>,<budget_id>,<vm_id>,<H|T>,<output>,<steps>
//! ```
//!
//! Files are append-only and can be compacted into sorted order. A cache
//! directory holds one file per `(budget_id, vm_id)` pair.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

use crate::bits::Bits;
use crate::error::StoreError;

const FILE_NAME_SET: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'_');

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Halted,
    TimedOut,
}

impl Outcome {
    fn tag(self) -> &'static str {
        match self {
            Outcome::Halted => "H",
            Outcome::TimedOut => "T",
        }
    }
}

/// What the cache remembers about one `(w, budget, vm)` query.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Entry {
    pub outcome: Outcome,
    /// `sub_run` value (0 on timeout).
    pub output: BigUint,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RunRecord {
    pub w: Bits,
    pub budget_id: String,
    pub vm_id: String,
    pub entry: Entry,
}

impl RunRecord {
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.w.to_compact(),
            self.budget_id,
            self.vm_id,
            self.entry.outcome.tag(),
            self.entry.output,
            self.entry.steps
        )
    }

    pub fn from_line(line: &str) -> Result<RunRecord, String> {
        let fields: Vec<&str> = line.split(',').collect();
        let [w, budget_id, vm_id, outcome, output, steps] = fields[..] else {
            return Err(format!("expected 6 comma-separated fields, found {}", fields.len()));
        };
        let w = Bits::from_compact(w).map_err(|e| e.to_string())?;
        let outcome = match outcome {
            "H" => Outcome::Halted,
            "T" => Outcome::TimedOut,
            other => return Err(format!("bad outcome tag {other:?}")),
        };
        let output: BigUint = output.parse().map_err(|_| format!("bad output {output:?}"))?;
        let steps: u64 = steps.parse().map_err(|_| format!("bad step count {steps:?}"))?;
        if budget_id.is_empty() || vm_id.is_empty() {
            return Err("empty budget or vm id".into());
        }
        if outcome == Outcome::TimedOut && output != BigUint::default() {
            return Err("timed-out record with nonzero output".into());
        }
        Ok(RunRecord {
            w,
            budget_id: budget_id.to_string(),
            vm_id: vm_id.to_string(),
            entry: Entry { outcome, output, steps },
        })
    }
}

impl fmt::Display for RunRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// Records for one `(budget_id, vm_id)` partition.
pub type Partition = HashMap<Bits, Entry>;

/// In-memory set of records with conflict detection.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Store {
    parts: BTreeMap<(String, String), Partition>,
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    pub fn len(&self) -> usize {
        self.parts.values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Inserts a record. Returns `true` if it was new; an identical record is
    /// a no-op and a different record under the same key is an error.
    pub fn put(&mut self, record: RunRecord) -> Result<bool, StoreError> {
        let part = self
            .parts
            .entry((record.budget_id.clone(), record.vm_id.clone()))
            .or_default();
        match part.get(&record.w) {
            Some(existing) if *existing == record.entry => Ok(false),
            Some(_) => Err(StoreError::Conflict {
                w: record.w.to_compact(),
                budget_id: record.budget_id,
                vm_id: record.vm_id,
            }),
            None => {
                part.insert(record.w, record.entry);
                Ok(true)
            }
        }
    }

    pub fn get(&self, w: &[bool], budget_id: &str, vm_id: &str) -> Option<RunRecord> {
        let part = self.parts.get(&(budget_id.to_string(), vm_id.to_string()))?;
        part.get(&Bits::from_slice(w)).map(|entry| RunRecord {
            w: Bits::from_slice(w),
            budget_id: budget_id.to_string(),
            vm_id: vm_id.to_string(),
            entry: entry.clone(),
        })
    }

    pub fn partition(&self, budget_id: &str, vm_id: &str) -> Option<&Partition> {
        self.parts.get(&(budget_id.to_string(), vm_id.to_string()))
    }

    pub fn vm_ids(&self) -> impl Iterator<Item = &str> {
        self.parts.keys().map(|(_, vm)| vm.as_str())
    }

    /// All records in canonical order: budget, vm, then length-lex `w`.
    pub fn records(&self) -> Vec<RunRecord> {
        let mut out = Vec::with_capacity(self.len());
        for ((budget_id, vm_id), part) in &self.parts {
            let mut ws: Vec<&Bits> = part.keys().collect();
            ws.sort();
            out.extend(ws.into_iter().map(|w| RunRecord {
                w: w.clone(),
                budget_id: budget_id.clone(),
                vm_id: vm_id.clone(),
                entry: part[w].clone(),
            }));
        }
        out
    }

    /// Set union; fails on the first conflicting key.
    pub fn union(&mut self, other: &Store) -> Result<(), StoreError> {
        for r in other.records() {
            self.put(r)?;
        }
        Ok(())
    }

    /// Loads a record file. A final line without a terminating newline is a
    /// partial write and is dropped with a warning; any other bad line is an
    /// error.
    pub fn load(path: &Path) -> Result<Store, StoreError> {
        let text = fs::read_to_string(path)?;
        let complete = text.ends_with('\n');
        let lines: Vec<&str> = text.lines().collect();
        let mut store = Store::new();
        for (i, line) in lines.iter().enumerate() {
            if line.is_empty() {
                continue;
            }
            let last = i + 1 == lines.len();
            let record = match RunRecord::from_line(line) {
                Ok(r) => r,
                Err(_) if last && !complete => {
                    log::warn!("{}: dropping truncated final line {}", path.display(), i + 1);
                    continue;
                }
                Err(msg) => return Err(StoreError::Load { path: path.to_path_buf(), line: i + 1, msg }),
            };
            if last && !complete {
                log::warn!("{}: dropping unterminated final line {}", path.display(), i + 1);
                continue;
            }
            store.put(record)?;
        }
        Ok(store)
    }

    /// Writes every record in canonical order, replacing `path`.
    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        let tmp = path.with_extension("tmp");
        {
            let mut out = BufWriter::new(File::create(&tmp)?);
            for r in self.records() {
                writeln!(out, "{}", r.to_line())?;
            }
            out.flush()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

/// Set union of shard files. All shards must carry the same vm id. The
/// result does not depend on the order of `paths`.
pub fn merge(paths: &[PathBuf]) -> Result<Store, StoreError> {
    let mut merged = Store::new();
    let mut vm: Option<String> = None;
    for path in paths {
        let shard = Store::load(path)?;
        for id in shard.vm_ids() {
            match &vm {
                Some(v) if v != id => return Err(StoreError::VmMismatch(v.clone(), id.to_string())),
                Some(_) => {}
                None => vm = Some(id.to_string()),
            }
        }
        merged.union(&shard)?;
    }
    Ok(merged)
}

/// A cache directory: one append-only file per `(budget_id, vm_id)`.
#[derive(Debug, Clone)]
pub struct CacheDir {
    root: PathBuf,
}

impl CacheDir {
    pub fn open(root: impl Into<PathBuf>) -> Result<CacheDir, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(CacheDir { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn file_name(budget_id: &str, vm_id: &str) -> String {
        format!(
            "{}.{}.runs",
            utf8_percent_encode(budget_id, FILE_NAME_SET),
            utf8_percent_encode(vm_id, FILE_NAME_SET)
        )
    }

    pub fn path_for(&self, budget_id: &str, vm_id: &str) -> PathBuf {
        self.root.join(Self::file_name(budget_id, vm_id))
    }

    /// Loads the partition file, or an empty store if there is none yet.
    pub fn load(&self, budget_id: &str, vm_id: &str) -> Result<Store, StoreError> {
        let path = self.path_for(budget_id, vm_id);
        if !path.exists() {
            return Ok(Store::new());
        }
        let store = Store::load(&path)?;
        for (b, v) in store.parts.keys() {
            if b != budget_id || v != vm_id {
                return Err(StoreError::WrongPartition {
                    expected: format!("{budget_id},{vm_id}"),
                    found: format!("{b},{v}"),
                });
            }
        }
        Ok(store)
    }

    /// Appends records to their partition files (single writer per file).
    pub fn append(&self, records: &[RunRecord]) -> Result<(), StoreError> {
        let mut by_file: BTreeMap<PathBuf, Vec<&RunRecord>> = BTreeMap::new();
        for r in records {
            by_file.entry(self.path_for(&r.budget_id, &r.vm_id)).or_default().push(r);
        }
        for (path, rs) in by_file {
            let mut out = BufWriter::new(OpenOptions::new().create(true).append(true).open(&path)?);
            for r in rs {
                writeln!(out, "{}", r.to_line())?;
            }
            out.flush()?;
        }
        Ok(())
    }

    /// Rewrites a partition file deduplicated and sorted.
    pub fn compact(&self, budget_id: &str, vm_id: &str) -> Result<(), StoreError> {
        let store = self.load(budget_id, vm_id)?;
        store.save(&self.path_for(budget_id, vm_id))
    }
}
