//! Exhaustive, symmetry-reduced, parallel counting of super-regular and
//! contiguous super-regular k×k matrices over GF(q).
//!
//! Counting works over normal forms (first row and column all ones); the
//! full count is the normal-form count times (q−1)^{2k−1} since each
//! row/column-scaling class contains exactly one normal form. The search
//! fills the free block in raster order and prunes with bad values: once
//! every previously completed submatrix of the relevant kind is
//! nonsingular, each submatrix completed by the next cell has exactly one
//! corner value making it singular, computable from the already-placed
//! entries. A cell's admissible values are therefore the nonzero values
//! avoiding a small forbidden set, and the deepest cell is counted without
//! iterating values at all.
//!
//! Work is sharded over assignments of the first two free entries and
//! pulled dynamically from a shared queue; per-shard subtotals merge by
//! addition, so totals are independent of worker count and scheduling.
//! Completed shards can be appended to a checkpoint file and skipped on
//! resume.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::gf::{Field, FieldMeta, GfError};
use crate::regularity::{for_each_combination, Kind};

pub const MAX_K: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum CensusError {
    #[error(transparent)]
    Field(#[from] GfError),
    #[error("census supports k in 1..={MAX_K}, got {0}")]
    Unsupported(usize),
    #[error("search space too large: {0}")]
    TooLarge(String),
    #[error("checkpoint: {0}")]
    Checkpoint(#[from] std::io::Error),
}

/// Options shared by the census entry points.
#[derive(Debug, Clone, Default)]
pub struct CensusOptions {
    /// Worker threads; 0 means available parallelism.
    pub jobs: usize,
    /// Append-only "shard_id count" checkpoint; completed shards are
    /// skipped when the file already exists.
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PartitionSummary {
    pub prefix_depth: usize,
    pub shard_count: u64,
    pub checkpoint: Option<String>,
}

mod biguint_str {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom("bad integer"))
    }
}

mod opt_biguint_str {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_some(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| s.parse().map_err(|_| D::Error::custom("bad integer")))
            .transpose()
    }
}

/// Result of one census run. Counts are exact arbitrary-precision
/// integers, serialized as decimal strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountRecord {
    pub q: u64,
    pub k: usize,
    pub kind: Kind,
    /// Count over matrices in normal form.
    #[serde(with = "biguint_str")]
    pub nf_count: BigUint,
    /// nf_count × (q−1)^{2k−1}.
    #[serde(with = "biguint_str")]
    pub total_count: BigUint,
    /// total_count / (q−1)⁷, the published tabulated quantity; only
    /// meaningful (and only present) for k = 4.
    #[serde(with = "opt_biguint_str")]
    pub reduced_count: Option<BigUint>,
    pub wall_time_secs: f64,
    pub worker_count: usize,
    pub partition: PartitionSummary,
    pub software_version: String,
    pub field: FieldMeta,
}

impl CountRecord {
    /// The payload fields that must be byte-identical across reruns;
    /// timing and scheduling metadata are excluded.
    pub fn payload_json(&self) -> serde_json::Value {
        serde_json::json!({
            "q": self.q,
            "k": self.k,
            "kind": self.kind,
            "nf_count": self.nf_count.to_string(),
            "total_count": self.total_count.to_string(),
            "reduced_count": self.reduced_count.as_ref().map(|v| v.to_string()),
            "field": serde_json::to_value(&self.field).unwrap(),
        })
    }
}

/// Interior row/column index lists of one square minor completed by a
/// cell; the minor itself adds the cell's row and column.
struct MinorPair {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

/// Capacity of the per-cell forbidden-value scratch. Normal-form searches
/// need at most 70 entries (k = 5); free grids stay under the cap because
/// the q^cells brute-force budget bounds their dimensions.
const FORBIDDEN_CAP: usize = 96;

/// Depth-first searcher over the free cells of one grid. Not shared:
/// every worker owns its own engine.
struct Engine<'f> {
    f: &'f Field,
    q: u32,
    cols_g: usize,
    grid: Vec<u32>,
    cells: Vec<(usize, usize)>,
    kind: Kind,
    /// Per free cell, the interior index pairs of every minor the cell
    /// completes (super-regular search only).
    sr_pairs: Vec<Vec<MinorPair>>,
    /// Value must exceed the value at another free cell.
    strictly_after: Vec<Option<usize>>,
    /// Value must be at least the value at another free cell.
    at_least: Vec<Option<usize>>,
    /// Transpose-symmetry weighting: (b_cell, d_cell); a completed
    /// assignment counts 1 when the two values are equal, else 2.
    weight_pair: Option<(usize, usize)>,
    base_weight: u64,
}

impl<'f> Engine<'f> {
    fn normal_form(f: &'f Field, k: usize, kind: Kind) -> Engine<'f> {
        let mut grid = vec![0u32; k * k];
        for i in 0..k {
            grid[i] = 1;
            grid[i * k] = 1;
        }
        let cells: Vec<(usize, usize)> = (1..k)
            .flat_map(|r| (1..k).map(move |c| (r, c)))
            .collect();
        let sr_pairs: Vec<Vec<MinorPair>> = match kind {
            Kind::Sr => cells.iter().map(|&(r, c)| minor_pairs(r, c)).collect(),
            Kind::Csr => Vec::new(),
        };
        assert!(sr_pairs.iter().all(|p| p.len() + 1 <= FORBIDDEN_CAP));
        let n = cells.len();
        Engine {
            f,
            q: f.q() as u32,
            cols_g: k,
            grid,
            cells,
            kind,
            sr_pairs,
            strictly_after: vec![None; n],
            at_least: vec![None; n],
            weight_pair: None,
            base_weight: 1,
        }
    }

    /// Grid with no fixed border; every entry is a free cell.
    fn free(f: &'f Field, rows: usize, cols: usize, kind: Kind) -> Engine<'f> {
        let cells: Vec<(usize, usize)> = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .collect();
        let sr_pairs: Vec<Vec<MinorPair>> = match kind {
            Kind::Sr => cells.iter().map(|&(r, c)| minor_pairs(r, c)).collect(),
            Kind::Csr => Vec::new(),
        };
        assert!(sr_pairs.iter().all(|p| p.len() + 1 <= FORBIDDEN_CAP));
        let n = cells.len();
        Engine {
            f,
            q: f.q() as u32,
            cols_g: cols,
            grid: vec![0u32; rows * cols],
            cells,
            kind,
            sr_pairs,
            strictly_after: vec![None; n],
            at_least: vec![None; n],
            weight_pair: None,
            base_weight: 1,
        }
    }

    #[inline]
    fn g(&self, r: usize, c: usize) -> u32 {
        self.grid[r * self.cols_g + c]
    }

    #[inline]
    fn cell_value(&self, idx: usize) -> u32 {
        let (r, c) = self.cells[idx];
        self.g(r, c)
    }

    /// Corner value making the minor (interior ri×ci plus row r, column c)
    /// singular. The interior is nonsingular by the search invariant.
    fn bad_value_minor(&self, ri: &[usize], ci: &[usize], r: usize, c: usize) -> u32 {
        let f = self.f;
        match ri.len() {
            0 => 0,
            1 => {
                let inv = f.inv_c(self.g(ri[0], ci[0]));
                f.mul_c(f.mul_c(self.g(r, ci[0]), inv), self.g(ri[0], c))
            }
            2 => {
                let a = self.g(ri[0], ci[0]);
                let b = self.g(ri[0], ci[1]);
                let cc = self.g(ri[1], ci[0]);
                let d = self.g(ri[1], ci[1]);
                let det = f.sub_c(f.mul_c(a, d), f.mul_c(b, cc));
                let v0 = self.g(ri[0], c);
                let v1 = self.g(ri[1], c);
                let u0 = self.g(r, ci[0]);
                let u1 = self.g(r, ci[1]);
                // u^t adj(B) v / det
                let w0 = f.sub_c(f.mul_c(d, v0), f.mul_c(b, v1));
                let w1 = f.sub_c(f.mul_c(a, v1), f.mul_c(cc, v0));
                let num = f.add_c(f.mul_c(u0, w0), f.mul_c(u1, w1));
                f.mul_c(num, f.inv_c(det))
            }
            3 => {
                let m = [
                    self.g(ri[0], ci[0]),
                    self.g(ri[0], ci[1]),
                    self.g(ri[0], ci[2]),
                    self.g(ri[1], ci[0]),
                    self.g(ri[1], ci[1]),
                    self.g(ri[1], ci[2]),
                    self.g(ri[2], ci[0]),
                    self.g(ri[2], ci[1]),
                    self.g(ri[2], ci[2]),
                ];
                let v = [self.g(ri[0], c), self.g(ri[1], c), self.g(ri[2], c)];
                let u = [self.g(r, ci[0]), self.g(r, ci[1]), self.g(r, ci[2])];
                let d2 = |a, b, cc, d| f.sub_c(f.mul_c(a, d), f.mul_c(b, cc));
                let cof00 = d2(m[4], m[5], m[7], m[8]);
                let cof01 = f.neg_c(d2(m[3], m[5], m[6], m[8]));
                let cof02 = d2(m[3], m[4], m[6], m[7]);
                let cof10 = f.neg_c(d2(m[1], m[2], m[7], m[8]));
                let cof11 = d2(m[0], m[2], m[6], m[8]);
                let cof12 = f.neg_c(d2(m[0], m[1], m[6], m[7]));
                let cof20 = d2(m[1], m[2], m[4], m[5]);
                let cof21 = f.neg_c(d2(m[0], m[2], m[3], m[5]));
                let cof22 = d2(m[0], m[1], m[3], m[4]);
                let det = f.add_c(
                    f.add_c(f.mul_c(m[0], cof00), f.mul_c(m[1], cof10)),
                    f.mul_c(m[2], cof20),
                );
                // (adj v)_i = Σ_j cof_ji v_j
                let w0 = f.add_c(
                    f.add_c(f.mul_c(cof00, v[0]), f.mul_c(cof10, v[1])),
                    f.mul_c(cof20, v[2]),
                );
                let w1 = f.add_c(
                    f.add_c(f.mul_c(cof01, v[0]), f.mul_c(cof11, v[1])),
                    f.mul_c(cof21, v[2]),
                );
                let w2 = f.add_c(
                    f.add_c(f.mul_c(cof02, v[0]), f.mul_c(cof12, v[1])),
                    f.mul_c(cof22, v[2]),
                );
                let num = f.add_c(
                    f.add_c(f.mul_c(u[0], w0), f.mul_c(u[1], w1)),
                    f.mul_c(u[2], w2),
                );
                f.mul_c(num, f.inv_c(det))
            }
            t => {
                // generic small solve B̄ w = v, then u·w
                let mut a = [0u32; 64];
                let mut b = [0u32; 8];
                for i in 0..t {
                    for j in 0..t {
                        a[i * t + j] = self.g(ri[i], ci[j]);
                    }
                    b[i] = self.g(ri[i], c);
                }
                for col in 0..t {
                    let pr = (col..t)
                        .find(|&row| a[row * t + col] != 0)
                        .expect("search invariant: minor interiors are nonsingular");
                    if pr != col {
                        for cc in 0..t {
                            a.swap(col * t + cc, pr * t + cc);
                        }
                        b.swap(col, pr);
                    }
                    let pinv = f.inv_c(a[col * t + col]);
                    for row in col + 1..t {
                        let factor = f.mul_c(a[row * t + col], pinv);
                        if factor != 0 {
                            for cc in col..t {
                                let sub = f.mul_c(factor, a[col * t + cc]);
                                a[row * t + cc] = f.sub_c(a[row * t + cc], sub);
                            }
                            b[row] = f.sub_c(b[row], f.mul_c(factor, b[col]));
                        }
                    }
                }
                let mut w = [0u32; 8];
                for row in (0..t).rev() {
                    let mut acc = b[row];
                    for cc in row + 1..t {
                        acc = f.sub_c(acc, f.mul_c(a[row * t + cc], w[cc]));
                    }
                    w[row] = f.mul_c(acc, f.inv_c(a[row * t + row]));
                }
                let mut x = 0u32;
                for i in 0..t {
                    x = f.add_c(x, f.mul_c(self.g(r, ci[i]), w[i]));
                }
                x
            }
        }
    }

    /// Fills `out` with the values forbidden at the cell: zero, plus the
    /// bad value of every submatrix of the search kind that the cell
    /// completes. Returns the number of entries (duplicates possible).
    fn forbidden_into(&self, depth: usize, out: &mut [u32]) -> usize {
        let (r, c) = self.cells[depth];
        out[0] = 0;
        let mut n = 1;
        match self.kind {
            Kind::Csr => {
                let smax = r.min(c) + 1;
                let mut rows = [0usize; 8];
                let mut cols = [0usize; 8];
                for s in 2..=smax {
                    let t = s - 1;
                    for i in 0..t {
                        rows[i] = r - t + i;
                        cols[i] = c - t + i;
                    }
                    out[n] = self.bad_value_minor(&rows[..t], &cols[..t], r, c);
                    n += 1;
                }
            }
            Kind::Sr => {
                for pair in &self.sr_pairs[depth] {
                    out[n] = self.bad_value_minor(&pair.rows, &pair.cols, r, c);
                    n += 1;
                }
            }
        }
        n
    }

    #[inline]
    fn lower_bound(&self, depth: usize) -> u32 {
        if let Some(other) = self.strictly_after[depth] {
            self.cell_value(other) + 1
        } else if let Some(other) = self.at_least[depth] {
            self.cell_value(other)
        } else {
            1
        }
    }

    #[inline]
    fn adjusted_weight(&self, depth: usize, weight: u64) -> u64 {
        if let Some((b_cell, d_cell)) = self.weight_pair {
            if depth == d_cell {
                return if self.cell_value(b_cell) == self.cell_value(d_cell) {
                    1
                } else {
                    2
                };
            }
        }
        weight
    }

    /// Counts completions of the assignment below `depth`.
    fn dfs(&mut self, depth: usize, weight: u64) -> u64 {
        let (r, c) = self.cells[depth];
        let mut forb = [0u32; FORBIDDEN_CAP];
        let nf = self.forbidden_into(depth, &mut forb);
        let last = depth + 1 == self.cells.len();
        let lo = self.lower_bound(depth);

        if last && lo == 1 && self.weight_pair.is_none_or(|(_, d)| d != depth) {
            // every nonzero value outside the forbidden set completes a
            // witness; count distinct forbidden values instead of looping
            let mut distinct = 0u64;
            for i in 0..nf {
                if !forb[..i].contains(&forb[i]) {
                    distinct += 1;
                }
            }
            return weight * (self.q as u64 - distinct);
        }

        let mut sum = 0u64;
        for v in lo..self.q {
            if forb[..nf].contains(&v) {
                continue;
            }
            self.grid[r * self.cols_g + c] = v;
            let w = self.adjusted_weight(depth, weight);
            sum += if last { w } else { self.dfs(depth + 1, w) };
        }
        sum
    }

    /// Runs one shard: pins the first `prefix.len()` cells to the given
    /// values (returning 0 if the prefix itself is inadmissible) and
    /// searches the rest.
    fn run_shard(&mut self, prefix: &[u32]) -> u64 {
        let mut weight = self.base_weight;
        let mut forb = [0u32; FORBIDDEN_CAP];
        for (depth, &v) in prefix.iter().enumerate() {
            if v < self.lower_bound(depth) {
                return 0;
            }
            let nf = self.forbidden_into(depth, &mut forb);
            if forb[..nf].contains(&v) {
                return 0;
            }
            let (r, c) = self.cells[depth];
            self.grid[r * self.cols_g + c] = v;
            weight = self.adjusted_weight(depth, weight);
        }
        if prefix.len() == self.cells.len() {
            return weight;
        }
        self.dfs(prefix.len(), weight)
    }
}

fn power_within(q: u64, e: usize, limit: u128) -> bool {
    let mut acc: u128 = 1;
    for _ in 0..e {
        acc = acc.saturating_mul(q as u128);
        if acc > limit {
            return false;
        }
    }
    true
}

/// Interior index pairs of every square minor completed at cell (r, c):
/// all equal-size nonempty subsets of rows 0..r and columns 0..c.
fn minor_pairs(r: usize, c: usize) -> Vec<MinorPair> {
    let mut pairs = Vec::new();
    for t in 1..=r.min(c) {
        let mut row_sets: Vec<Vec<usize>> = Vec::new();
        for_each_combination(r, t, |idx| {
            row_sets.push(idx.to_vec());
            true
        });
        let mut col_sets: Vec<Vec<usize>> = Vec::new();
        for_each_combination(c, t, |idx| {
            col_sets.push(idx.to_vec());
            true
        });
        for rs in &row_sets {
            for cs in &col_sets {
                pairs.push(MinorPair {
                    rows: rs.clone(),
                    cols: cs.clone(),
                });
            }
        }
    }
    pairs
}

/// Configuration of one sharded search, independent of worker state.
struct SearchSpec {
    kind: Kind,
    k: usize,
    normal_form: bool,
    free_dims: (usize, usize),
    sr_symmetry: bool,
    csr_symmetry: bool,
}

impl SearchSpec {
    fn build_engine<'f>(&self, f: &'f Field) -> Engine<'f> {
        let mut e = if self.normal_form {
            Engine::normal_form(f, self.k, self.kind)
        } else {
            Engine::free(f, self.free_dims.0, self.free_dims.1, self.kind)
        };
        if self.sr_symmetry {
            // free cells of the 4x4 normal form in raster order:
            // 0:A 1:B 2:C 3:D 4:E 5:F 6:G 7:H 8:I
            e.strictly_after[1] = Some(0); // B > A
            e.strictly_after[2] = Some(1); // C > B
            e.strictly_after[6] = Some(3); // G > D
            e.base_weight = 12;
        }
        if self.csr_symmetry {
            e.at_least[3] = Some(1); // D >= B
            e.weight_pair = Some((1, 3)); // count 2 when B < D, 1 when B = D
        }
        e
    }
}

fn read_checkpoint(path: &PathBuf) -> Result<BTreeMap<u64, u64>, CensusError> {
    let mut done = BTreeMap::new();
    if !path.exists() {
        return Ok(done);
    }
    let file = std::fs::File::open(path)?;
    for line in BufReader::new(file).lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let (Some(id), Some(count)) = (it.next(), it.next()) else {
            return Err(CensusError::Checkpoint(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("bad checkpoint line {trimmed:?}"),
            )));
        };
        let id: u64 = id.parse().map_err(bad_ckpt)?;
        let count: u64 = count.parse().map_err(bad_ckpt)?;
        done.insert(id, count);
    }
    Ok(done)
}

fn bad_ckpt<E: std::fmt::Display>(e: E) -> CensusError {
    CensusError::Checkpoint(std::io::Error::new(
        std::io::ErrorKind::InvalidData,
        e.to_string(),
    ))
}

/// Decodes a shard id into values of the first `depth` free cells.
fn decode_shard(id: u64, depth: usize, q: u64) -> Vec<u32> {
    let base = q - 1;
    let mut vals = vec![0u32; depth];
    let mut rest = id;
    for v in vals.iter_mut().rev() {
        *v = (rest % base) as u32 + 1;
        rest /= base;
    }
    vals
}

fn run_sharded(
    field: &Field,
    spec: &SearchSpec,
    opts: &CensusOptions,
) -> Result<(BigUint, usize, PartitionSummary), CensusError> {
    let q = field.q();
    let n_cells = {
        let e = spec.build_engine(field);
        e.cells.len()
    };
    let prefix_depth = n_cells.min(2);
    let shard_count = (q - 1).pow(prefix_depth as u32);

    let done = match &opts.checkpoint {
        Some(path) => read_checkpoint(path)?,
        None => BTreeMap::new(),
    };
    let pending: Vec<u64> = (0..shard_count).filter(|id| !done.contains_key(id)).collect();

    let writer = match &opts.checkpoint {
        Some(path) => {
            let file = std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)?;
            Some(Mutex::new(BufWriter::new(file)))
        }
        None => None,
    };

    let workers = if opts.jobs == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        opts.jobs
    }
    .min(pending.len().max(1));

    let next = AtomicUsize::new(0);
    let new_counts = Mutex::new(Vec::<(u64, u64)>::new());
    let io_error = Mutex::new(None::<std::io::Error>);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut engine = spec.build_engine(field);
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= pending.len() {
                        break;
                    }
                    let id = pending[i];
                    let prefix = decode_shard(id, prefix_depth, q);
                    let count = engine.run_shard(&prefix);
                    new_counts.lock().unwrap().push((id, count));
                    if let Some(w) = &writer {
                        let mut w = w.lock().unwrap();
                        let res = writeln!(w, "{id} {count}").and_then(|_| w.flush());
                        if let Err(e) = res {
                            *io_error.lock().unwrap() = Some(e);
                            break;
                        }
                    }
                }
            });
        }
    });

    if let Some(e) = io_error.into_inner().unwrap() {
        return Err(CensusError::Checkpoint(e));
    }

    let mut total: u128 = done.values().map(|&c| c as u128).sum();
    total += new_counts
        .into_inner()
        .unwrap()
        .iter()
        .map(|&(_, c)| c as u128)
        .sum::<u128>();

    let partition = PartitionSummary {
        prefix_depth,
        shard_count,
        checkpoint: opts
            .checkpoint
            .as_ref()
            .map(|p| p.display().to_string()),
    };
    Ok((BigUint::from(total), workers, partition))
}

fn make_record(
    field: &Field,
    k: usize,
    kind: Kind,
    nf_count: BigUint,
    started: Instant,
    workers: usize,
    partition: PartitionSummary,
) -> CountRecord {
    let q = field.q();
    let scale = BigUint::from(q - 1).pow(2 * k as u32 - 1);
    let total_count = &nf_count * &scale;
    let reduced_count = if k == 4 {
        let divisor = BigUint::from(q - 1).pow(7);
        debug_assert!((&total_count % &divisor).is_zero());
        Some(&total_count / &divisor)
    } else {
        None
    };
    CountRecord {
        q,
        k,
        kind,
        nf_count,
        total_count,
        reduced_count,
        wall_time_secs: started.elapsed().as_secs_f64(),
        worker_count: workers,
        partition,
        software_version: crate::VERSION.to_string(),
        field: field.metadata(),
    }
}

/// Exact census of k×k matrices of the given kind over GF(q), by searching
/// normal forms only.
pub fn count_normal_forms(
    q: u64,
    k: usize,
    kind: Kind,
    opts: &CensusOptions,
) -> Result<CountRecord, CensusError> {
    if k == 0 || k > MAX_K {
        return Err(CensusError::Unsupported(k));
    }
    let started = Instant::now();
    let field = Field::new(q)?;
    let spec = SearchSpec {
        kind,
        k,
        normal_form: true,
        free_dims: (0, 0),
        sr_symmetry: false,
        csr_symmetry: false,
    };
    let (nf, workers, partition) = run_sharded(&field, &spec, opts)?;
    Ok(make_record(&field, k, kind, nf, started, workers, partition))
}

/// 4×4 super-regular census with the row/column permutation symmetry:
/// searches A<B<C and D<G and adds 12 per witness. Equal to
/// `count_normal_forms(q, 4, Sr)`.
pub fn count_sr_4x4(q: u64, opts: &CensusOptions) -> Result<CountRecord, CensusError> {
    let started = Instant::now();
    let field = Field::new(q)?;
    let spec = SearchSpec {
        kind: Kind::Sr,
        k: 4,
        normal_form: true,
        free_dims: (0, 0),
        sr_symmetry: true,
        csr_symmetry: false,
    };
    let (nf, workers, partition) = run_sharded(&field, &spec, opts)?;
    Ok(make_record(&field, 4, Kind::Sr, nf, started, workers, partition))
}

/// 4×4 contiguous super-regular census with the transpose symmetry:
/// searches B ≤ D, adding 2 per witness with B < D and 1 with B = D.
/// Equal to `count_normal_forms(q, 4, Csr)`.
pub fn count_csr_4x4(q: u64, opts: &CensusOptions) -> Result<CountRecord, CensusError> {
    let started = Instant::now();
    let field = Field::new(q)?;
    let spec = SearchSpec {
        kind: Kind::Csr,
        k: 4,
        normal_form: true,
        free_dims: (0, 0),
        sr_symmetry: false,
        csr_symmetry: true,
    };
    let (nf, workers, partition) = run_sharded(&field, &spec, opts)?;
    Ok(make_record(&field, 4, Kind::Csr, nf, started, workers, partition))
}

/// Number of [n,k] MDS systematic generator matrices over GF(q): counts
/// k×(n−k) super-regular matrices directly. Intended for tiny instances.
pub fn count_mds_systematic(
    q: u64,
    n: usize,
    k: usize,
    opts: &CensusOptions,
) -> Result<BigUint, CensusError> {
    assert!(k <= n, "k must not exceed n");
    let cells = k * (n - k);
    if cells == 0 {
        // the identity generator itself; d = 1 and the code is MDS
        return Ok(BigUint::from(1u32));
    }
    if !power_within(q, cells, 1_000_000_000) {
        return Err(CensusError::TooLarge(format!(
            "q^{cells} exceeds the brute-force budget"
        )));
    }
    let field = Field::new(q)?;
    let spec = SearchSpec {
        kind: Kind::Sr,
        k: 0,
        normal_form: false,
        free_dims: (k, n - k),
        sr_symmetry: false,
        csr_symmetry: false,
    };
    let (count, _, _) = run_sharded(&field, &spec, opts)?;
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::MatGF;
    use crate::ratpoly::{csr3_count, csr4_conjecture, sr3_count};
    use crate::regularity::{is_contiguous_super_regular, is_super_regular};
    use std::sync::Arc;

    fn opts() -> CensusOptions {
        CensusOptions {
            jobs: 2,
            checkpoint: None,
        }
    }

    fn brute_force_count(q: u64, k: usize, kind: Kind) -> BigUint {
        let f = Arc::new(Field::new(q).unwrap());
        let mut count = 0u64;
        let total = q.pow((k * k) as u32);
        for enc in 0..total {
            let mut data = Vec::with_capacity(k * k);
            let mut e = enc;
            for _ in 0..k * k {
                data.push((e % q) as u32);
                e /= q;
            }
            let m = MatGF::from_codes(f.clone(), k, k, data);
            let ok = match kind {
                Kind::Sr => is_super_regular(&m),
                Kind::Csr => is_contiguous_super_regular(&m),
            };
            if ok {
                count += 1;
            }
        }
        BigUint::from(count)
    }

    #[test]
    fn k1_and_k2_counts() {
        // C_1 = q-1 and C_2 = (q-1)^3 (q-2) for both kinds
        for q in [2u64, 3, 5, 8] {
            for kind in [Kind::Sr, Kind::Csr] {
                let r1 = count_normal_forms(q, 1, kind, &opts()).unwrap();
                assert_eq!(r1.total_count, BigUint::from(q - 1));
                let r2 = count_normal_forms(q, 2, kind, &opts()).unwrap();
                assert_eq!(
                    r2.total_count,
                    BigUint::from((q - 1).pow(3) * (q.saturating_sub(2)))
                );
            }
        }
        // the explicit example: q=3, k=2 gives 8
        let r = count_normal_forms(3, 2, Kind::Sr, &opts()).unwrap();
        assert_eq!(r.total_count, BigUint::from(8u32));
    }

    #[test]
    fn three_by_three_matches_closed_forms() {
        for q in [2u64, 3, 4, 5, 7, 8, 9] {
            let sr = count_normal_forms(q, 3, Kind::Sr, &opts()).unwrap();
            assert_eq!(sr.total_count, sr3_count(q), "SR q={q}");
            let csr = count_normal_forms(q, 3, Kind::Csr, &opts()).unwrap();
            assert_eq!(csr.total_count, csr3_count(q), "CSR q={q}");
        }
    }

    #[test]
    fn census_equals_unrestricted_brute_force() {
        // validates the (q-1)^{2k-1} normal-form factor end to end
        for (q, k) in [(2u64, 2usize), (3, 2), (4, 2), (2, 3), (3, 3), (4, 3)] {
            for kind in [Kind::Sr, Kind::Csr] {
                let rec = count_normal_forms(q, k, kind, &opts()).unwrap();
                assert_eq!(
                    rec.total_count,
                    brute_force_count(q, k, kind),
                    "q={q} k={k} {kind}"
                );
            }
        }
    }

    #[test]
    fn zero_counts_for_small_fields() {
        for q in [2u64, 3] {
            for k in [3usize, 4] {
                for kind in [Kind::Sr, Kind::Csr] {
                    let rec = count_normal_forms(q, k, kind, &opts()).unwrap();
                    assert_eq!(rec.total_count, BigUint::zero(), "q={q} k={k} {kind}");
                }
            }
        }
        for q in [4u64, 5] {
            let rec = count_normal_forms(q, 4, Kind::Sr, &opts()).unwrap();
            assert_eq!(rec.total_count, BigUint::zero(), "q={q}");
        }
    }

    #[test]
    fn sr_4x4_desk_rows() {
        assert_eq!(
            count_sr_4x4(7, &opts()).unwrap().reduced_count.unwrap(),
            BigUint::from(120u32)
        );
        assert_eq!(
            count_sr_4x4(8, &opts()).unwrap().reduced_count.unwrap(),
            BigUint::from(720u32)
        );
        assert_eq!(
            count_sr_4x4(5, &opts()).unwrap().reduced_count.unwrap(),
            BigUint::zero()
        );
    }

    #[test]
    fn csr_4x4_desk_rows() {
        assert_eq!(
            count_csr_4x4(4, &opts()).unwrap().reduced_count.unwrap(),
            BigUint::from(58u32)
        );
        assert_eq!(
            count_csr_4x4(5, &opts()).unwrap().reduced_count.unwrap(),
            BigUint::from(4500u32)
        );
        assert_eq!(
            count_csr_4x4(7, &opts()).unwrap().reduced_count.unwrap(),
            BigUint::from(780640u32)
        );
    }

    #[test]
    fn symmetry_reductions_match_plain_search() {
        for q in [7u64, 8] {
            let sym = count_sr_4x4(q, &opts()).unwrap();
            let plain = count_normal_forms(q, 4, Kind::Sr, &opts()).unwrap();
            assert_eq!(sym.total_count, plain.total_count, "SR q={q}");
        }
        for q in [4u64, 5, 7] {
            let sym = count_csr_4x4(q, &opts()).unwrap();
            let plain = count_normal_forms(q, 4, Kind::Csr, &opts()).unwrap();
            assert_eq!(sym.total_count, plain.total_count, "CSR q={q}");
        }
    }

    #[test]
    fn csr_4x4_matches_conjecture_polynomial() {
        for q in [4u64, 5, 7, 8] {
            let rec = count_csr_4x4(q, &opts()).unwrap();
            assert_eq!(rec.total_count, csr4_conjecture(q), "q={q}");
        }
    }

    #[test]
    fn sr_count_at_most_csr_count() {
        for q in [4u64, 5, 7, 8, 9] {
            let sr = count_normal_forms(q, 3, Kind::Sr, &opts()).unwrap();
            let csr = count_normal_forms(q, 3, Kind::Csr, &opts()).unwrap();
            assert!(sr.total_count <= csr.total_count, "q={q}");
        }
    }

    #[test]
    fn mds_systematic_counts() {
        let o = opts();
        for q in [2u64, 3, 5, 7] {
            assert_eq!(
                count_mds_systematic(q, 2, 1, &o).unwrap(),
                BigUint::from(q - 1),
                "q={q}"
            );
        }
        assert_eq!(count_mds_systematic(3, 4, 2, &o).unwrap(), BigUint::from(8u32));
        assert_eq!(
            count_mds_systematic(5, 6, 3, &o).unwrap(),
            BigUint::from(6144u32)
        );
        // n == k: only the identity generator
        assert_eq!(count_mds_systematic(7, 3, 3, &o).unwrap(), BigUint::from(1u32));
        assert!(matches!(
            count_mds_systematic(97, 12, 6, &o),
            Err(CensusError::TooLarge(_))
        ));
        // the budget is q^{cells}, so even GF(2) cannot request huge grids
        assert!(matches!(
            count_mds_systematic(2, 20, 10, &o),
            Err(CensusError::TooLarge(_))
        ));
    }

    #[test]
    fn unsupported_and_invalid_inputs() {
        assert!(matches!(
            count_normal_forms(5, 6, Kind::Sr, &opts()),
            Err(CensusError::Unsupported(6))
        ));
        assert!(matches!(
            count_normal_forms(6, 3, Kind::Sr, &opts()),
            Err(CensusError::Field(GfError::NotPrimePower(6)))
        ));
    }

    #[test]
    fn k5_tiny_field_runs() {
        // 5x5 over GF(2) and GF(3): counts are zero but the machinery
        // must terminate
        for q in [2u64, 3] {
            let rec = count_normal_forms(q, 5, Kind::Csr, &opts()).unwrap();
            assert_eq!(rec.total_count, BigUint::zero());
        }
    }

    #[test]
    fn checkpoint_resume_reproduces_totals() {
        let dir = tempfile::tempdir().unwrap();
        let ckpt = dir.path().join("csr5.ckpt");
        let full = count_csr_4x4(
            5,
            &CensusOptions {
                jobs: 2,
                checkpoint: Some(ckpt.clone()),
            },
        )
        .unwrap();

        // drop the second half of the checkpoint and resume
        let text = std::fs::read_to_string(&ckpt).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 16); // (q-1)^2 shards
        let keep = lines.len() / 2;
        std::fs::write(&ckpt, format!("{}\n", lines[..keep].join("\n"))).unwrap();

        let resumed = count_csr_4x4(
            5,
            &CensusOptions {
                jobs: 1,
                checkpoint: Some(ckpt.clone()),
            },
        )
        .unwrap();
        assert_eq!(resumed.total_count, full.total_count);
        assert_eq!(resumed.nf_count, full.nf_count);

        // after resume every shard appears exactly once in the file
        let done = read_checkpoint(&ckpt).unwrap();
        assert_eq!(done.len(), 16);
    }

    #[test]
    fn worker_count_does_not_change_payload() {
        let one = count_csr_4x4(
            7,
            &CensusOptions {
                jobs: 1,
                checkpoint: None,
            },
        )
        .unwrap();
        let many = count_csr_4x4(
            7,
            &CensusOptions {
                jobs: 4,
                checkpoint: None,
            },
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&one.payload_json()).unwrap(),
            serde_json::to_string(&many.payload_json()).unwrap()
        );
    }

    #[test]
    fn record_serialization_uses_decimal_strings() {
        let rec = count_csr_4x4(4, &opts()).unwrap();
        let json = serde_json::to_value(&rec).unwrap();
        assert_eq!(json["kind"], "CSR");
        assert_eq!(json["nf_count"], "58");
        assert_eq!(json["reduced_count"], "58");
        assert_eq!(json["field"]["q"], 4);
        let back: CountRecord = serde_json::from_value(json).unwrap();
        assert_eq!(back.total_count, rec.total_count);
    }
}
