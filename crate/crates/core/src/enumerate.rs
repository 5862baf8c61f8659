//! Exhaustive scans of `S_n`: sort-number histograms, maxima, averages and
//! the breakdown by leading entry.
//!
//! `S_n` is cut into lexicographic blocks sharing a fixed prefix. Each block
//! is walked with [`next_perm_in_place`] by one worker; per-block histograms
//! are merged in block order, so results do not depend on the thread count.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::map_ordered;
use crate::perm::{Permutation, Sorter};

/// Buckets allocated up front; histograms grow past this on demand.
pub const DEFAULT_BUCKETS: usize = 30;

/// Largest length whose factorial fits in a `u64`.
pub const MAX_EXHAUSTIVE_N: usize = 20;

/// Largest length the CLI runs without a runtime warning.
pub const SUPPORTED_N: usize = 14;

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Advances `p` to its lexicographic successor. Returns `false`, leaving `p`
/// untouched, when `p` is already the last arrangement.
#[inline]
pub fn next_perm_in_place<T: Ord>(p: &mut [T]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Lexicographic successor within `S_n`, or `None` after `n ... 2 1`.
pub fn next_perm(p: &Permutation) -> Option<Permutation> {
    let mut v = p.values().to_vec();
    next_perm_in_place(&mut v).then(|| Permutation::from_vec_unchecked(v))
}

/// Exact counts of permutations by sort-number.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "HistogramRepr", try_from = "HistogramRepr")]
pub struct SortHistogram {
    n: usize,
    counts: Vec<u64>,
    total: u64,
}

#[derive(Serialize, Deserialize)]
struct HistogramRepr {
    n: usize,
    total: u64,
    counts: BTreeMap<u32, u64>,
}

impl From<SortHistogram> for HistogramRepr {
    fn from(h: SortHistogram) -> Self {
        HistogramRepr {
            n: h.n,
            total: h.total,
            counts: h.nonzero().collect(),
        }
    }
}

impl TryFrom<HistogramRepr> for SortHistogram {
    type Error = Error;

    fn try_from(r: HistogramRepr) -> Result<Self> {
        let h = SortHistogram::from_counts(r.n, r.counts);
        if h.total != r.total {
            return Err(Error::Format(format!(
                "histogram total {} does not match bucket sum {}",
                r.total, h.total
            )));
        }
        Ok(h)
    }
}

impl PartialEq for SortHistogram {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.total == other.total
            && self.nonzero().eq(other.nonzero())
    }
}

impl Eq for SortHistogram {}

impl SortHistogram {
    pub fn new(n: usize) -> Self {
        SortHistogram {
            n,
            counts: vec![0; DEFAULT_BUCKETS],
            total: 0,
        }
    }

    pub fn from_counts(n: usize, counts: impl IntoIterator<Item = (u32, u64)>) -> Self {
        let mut h = SortHistogram::new(n);
        for (k, c) in counts {
            h.add(k, c);
        }
        h
    }

    #[inline]
    pub fn record(&mut self, k: u32) {
        self.add(k, 1);
    }

    pub fn add(&mut self, k: u32, count: u64) {
        let k = k as usize;
        if k >= self.counts.len() {
            self.counts.resize(k + 1, 0);
        }
        self.counts[k] += count;
        self.total += count;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, k: u32) -> u64 {
        self.counts.get(k as usize).copied().unwrap_or(0)
    }

    /// `(k, count)` for every non-empty bucket, in increasing `k`.
    pub fn nonzero(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k as u32, c))
    }

    pub fn max_sort_number(&self) -> Option<u32> {
        self.nonzero().last().map(|(k, _)| k)
    }

    pub fn sum(&self) -> u64 {
        self.nonzero().map(|(k, c)| k as u64 * c).sum()
    }

    /// Sum of sort-numbers over the total, as one binary64 division.
    pub fn average(&self) -> f64 {
        self.sum() as f64 / self.total as f64
    }

    pub fn merge(&mut self, other: &SortHistogram) -> Result<()> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: other.n,
            });
        }
        for (k, c) in other.nonzero() {
            self.add(k, c);
        }
        Ok(())
    }

    pub fn summary(&self) -> Option<LengthSummary> {
        let max = self.max_sort_number()?;
        Some(LengthSummary {
            n: self.n,
            max_sort_number: max,
            count_at_max: self.count(max),
            sum_of_sort_numbers: self.sum(),
            average: self.average(),
        })
    }
}

/// Pointwise sum of two histograms over the same length.
pub fn histogram_merge(a: &SortHistogram, b: &SortHistogram) -> Result<SortHistogram> {
    let mut out = a.clone();
    out.merge(b)?;
    Ok(out)
}

/// One row of the per-length table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthSummary {
    pub n: usize,
    #[serde(rename = "max")]
    pub max_sort_number: u32,
    pub count_at_max: u64,
    #[serde(rename = "sum")]
    pub sum_of_sort_numbers: u64,
    pub average: f64,
}

/// Histograms restricted to each leading entry; `by_leading[l - 1]` holds
/// the permutations starting with `l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeadingEntrySummary {
    pub n: usize,
    pub by_leading: Vec<SortHistogram>,
}

impl LeadingEntrySummary {
    pub fn new(n: usize) -> Self {
        LeadingEntrySummary {
            n,
            by_leading: (0..n).map(|_| SortHistogram::new(n)).collect(),
        }
    }

    pub fn get(&self, leading: u32) -> &SortHistogram {
        &self.by_leading[leading as usize - 1]
    }

    pub fn merge(&mut self, other: &LeadingEntrySummary) -> Result<()> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: other.n,
            });
        }
        for (a, b) in self.by_leading.iter_mut().zip(&other.by_leading) {
            a.merge(b)?;
        }
        Ok(())
    }

    /// All leading entries folded together.
    pub fn combined(&self) -> SortHistogram {
        let mut h = SortHistogram::new(self.n);
        for part in &self.by_leading {
            h.merge(part).expect("same length");
        }
        h
    }
}

/// Everything an exhaustive scan of one length produces.
#[derive(Clone, Debug, PartialEq)]
pub struct ExhaustiveResult {
    pub histogram: SortHistogram,
    pub summary: LengthSummary,
    pub leading: LeadingEntrySummary,
}

impl ExhaustiveResult {
    fn from_leading(leading: LeadingEntrySummary) -> Self {
        let histogram = leading.combined();
        let summary = histogram.summary().expect("a complete scan is non-empty");
        ExhaustiveResult {
            histogram,
            summary,
            leading,
        }
    }

    pub fn report(&self) -> ExhaustiveReport {
        let leading = self
            .leading
            .by_leading
            .iter()
            .enumerate()
            .filter_map(|(i, h)| {
                let s = h.summary()?;
                Some((
                    i as u32 + 1,
                    LeadingReport {
                        max: s.max_sort_number,
                        count_at_max: s.count_at_max,
                        sum: s.sum_of_sort_numbers,
                        average: s.average,
                        total: h.total(),
                        histogram: h.nonzero().collect(),
                    },
                ))
            })
            .collect();
        ExhaustiveReport {
            n: self.summary.n,
            max: self.summary.max_sort_number,
            count_at_max: self.summary.count_at_max,
            sum: self.summary.sum_of_sort_numbers,
            average: self.summary.average,
            histogram: self.histogram.nonzero().collect(),
            leading,
        }
    }
}

/// JSON shape of an exhaustive scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveReport {
    pub n: usize,
    pub max: u32,
    pub count_at_max: u64,
    pub sum: u64,
    pub average: f64,
    pub histogram: BTreeMap<u32, u64>,
    pub leading: BTreeMap<u32, LeadingReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingReport {
    pub max: u32,
    pub count_at_max: u64,
    pub sum: u64,
    pub average: f64,
    pub total: u64,
    pub histogram: BTreeMap<u32, u64>,
}

/// A lexicographic run of `count` permutations beginning at `start`; all of
/// them share `start`'s first `depth` entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub start: Permutation,
    pub count: u64,
}

impl Block {
    /// Last permutation of the block: the free suffix in decreasing order.
    pub fn last(&self) -> Permutation {
        let n = self.start.len();
        let depth = n - (1..=n).find(|&d| factorial(d) == self.count).unwrap_or(n);
        let mut v = self.start.values().to_vec();
        v[depth..].sort_unstable_by(|a, b| b.cmp(a));
        Permutation::from_vec_unchecked(v)
    }
}

/// Splits `S_n` into blocks by their first `depth` entries, in lexicographic order.
pub fn prefix_partition(n: usize, depth: usize) -> Result<Vec<Block>> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if depth == 0 || depth > n.min(3) {
        return Err(Error::DepthOutOfRange { depth, n });
    }
    let count = factorial(n - depth);
    let mut blocks = Vec::new();
    let mut prefix = Vec::with_capacity(depth);
    fn rec(n: usize, depth: usize, count: u64, prefix: &mut Vec<u32>, out: &mut Vec<Block>) {
        if prefix.len() == depth {
            let mut v = prefix.clone();
            v.extend((1..=n as u32).filter(|x| !prefix.contains(x)));
            out.push(Block {
                start: Permutation::from_vec_unchecked(v),
                count,
            });
            return;
        }
        for x in 1..=n as u32 {
            if !prefix.contains(&x) {
                prefix.push(x);
                rec(n, depth, count, prefix, out);
                prefix.pop();
            }
        }
    }
    rec(n, depth, count, &mut prefix, &mut blocks);
    Ok(blocks)
}

/// Block depth used for parallel scans of length `n`.
pub fn grain_depth(n: usize) -> usize {
    if n >= 10 {
        2
    } else {
        1
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::InvalidArgument(format!(
            "exhaustive scans support n <= {MAX_EXHAUSTIVE_N}, got {n}"
        )));
    }
    Ok(())
}

/// Scans `count` permutations starting at `start`, which must all share a
/// leading entry.
fn scan_block(start: &Permutation, count: u64) -> Result<SortHistogram> {
    let n = start.len();
    let mut cur: Vec<u8> = start.values().iter().map(|&v| v as u8).collect();
    let mut sorter = Sorter::<u8>::new();
    let mut h = SortHistogram::new(n);
    for i in 0..count {
        h.record(sorter.sort_number(&cur)?);
        if i + 1 < count && !next_perm_in_place(&mut cur) {
            break;
        }
    }
    Ok(h)
}

/// Serially scans every permutation from `start` through `end` (inclusive;
/// the last permutation of `S_n` when `None`).
pub fn scan_range(start: &Permutation, end: Option<&Permutation>) -> Result<LeadingEntrySummary> {
    let n = start.len();
    check_n(n)?;
    if let Some(e) = end {
        if e.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: e.len(),
            });
        }
        if e < start {
            return Err(Error::InvalidArgument(format!(
                "range end {e} precedes start {start}"
            )));
        }
    }
    let end: Option<Vec<u8>> = end.map(|e| e.values().iter().map(|&v| v as u8).collect());
    let mut cur: Vec<u8> = start.values().iter().map(|&v| v as u8).collect();
    let mut sorter = Sorter::<u8>::new();
    let mut out = LeadingEntrySummary::new(n);
    loop {
        let k = sorter.sort_number(&cur)?;
        out.by_leading[cur[0] as usize - 1].record(k);
        if end.as_deref() == Some(&cur[..]) || !next_perm_in_place(&mut cur) {
            break;
        }
    }
    Ok(out)
}

fn scan_blocks(blocks: &[Block], threads: usize) -> Result<LeadingEntrySummary> {
    let n = blocks.first().map_or(1, |b| b.start.len());
    let parts = map_ordered(blocks.len(), threads, |i| {
        scan_block(&blocks[i].start, blocks[i].count)
    });
    let mut out = LeadingEntrySummary::new(n);
    for (block, part) in blocks.iter().zip(parts) {
        out.by_leading[block.start.leading() as usize - 1].merge(&part?)?;
    }
    Ok(out)
}

/// Sort-number statistics over all of `S_n`.
pub fn exhaustive_summary(n: usize, threads: usize) -> Result<ExhaustiveResult> {
    check_n(n)?;
    let blocks = prefix_partition(n, grain_depth(n).min(n))?;
    Ok(ExhaustiveResult::from_leading(scan_blocks(&blocks, threads)?))
}

/// Progress of a resumable scan.
///
/// On disk: line 1 is the next unprocessed permutation in comma form (or
/// `end` once the scan is complete), each following line is a partial
/// histogram row `leading,k,count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    pub next: Option<Permutation>,
    pub partial: LeadingEntrySummary,
}

impl Checkpoint {
    pub fn fresh(n: usize) -> Result<Self> {
        Ok(Checkpoint {
            next: Some(Permutation::identity(n)?),
            partial: LeadingEntrySummary::new(n),
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = match &self.next {
            Some(p) => p.to_string(),
            None => "end".to_string(),
        };
        s.push('\n');
        for (i, h) in self.partial.by_leading.iter().enumerate() {
            for (k, c) in h.nonzero() {
                s.push_str(&format!("{},{k},{c}\n", i + 1));
            }
        }
        s
    }

    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let mut lines = text.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Checkpoint("empty file".into()))?
            .trim();
        let next = if first == "end" {
            None
        } else {
            let p: Permutation = first
                .parse()
                .map_err(|e| Error::Checkpoint(format!("line 1: {e}")))?;
            if p.len() != n {
                return Err(Error::Checkpoint(format!(
                    "line 1 has length {}, expected {n}",
                    p.len()
                )));
            }
            Some(p)
        };
        let mut partial = LeadingEntrySummary::new(n);
        for (ln, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<u64> = line
                .split(',')
                .map(|f| f.trim().parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Checkpoint(format!("line {}: {line:?}", ln + 2)))?;
            match fields[..] {
                [l, k, c] if l >= 1 && l as usize <= n => {
                    partial.by_leading[l as usize - 1].add(k as u32, c)
                }
                _ => return Err(Error::Checkpoint(format!("line {}: {line:?}", ln + 2))),
            }
        }
        Ok(Checkpoint { next, partial })
    }

    pub fn load(path: &Path, n: usize) -> Result<Self> {
        Checkpoint::parse(&fs::read_to_string(path)?, n)
    }

    /// Writes through a temporary sibling file and renames it into place.
    pub fn store(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(self.to_text().as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

/// Like [`exhaustive_summary`] but persists progress to `path` after every
/// `batch` blocks, resuming from it if the file already exists.
pub fn exhaustive_summary_checkpointed(
    n: usize,
    threads: usize,
    path: &Path,
    batch: usize,
    mut progress: impl FnMut(&Checkpoint),
) -> Result<ExhaustiveResult> {
    check_n(n)?;
    let mut state = if path.exists() {
        Checkpoint::load(path, n)?
    } else {
        Checkpoint::fresh(n)?
    };
    let blocks = prefix_partition(n, grain_depth(n).min(n))?;
    if let Some(next) = state.next.clone() {
        // blocks strictly after the one containing `next`
        let containing = blocks
            .iter()
            .rposition(|b| b.start <= next)
            .expect("identity starts the first block");
        let mut rest = containing + 1;
        if blocks[containing].start != next {
            let tail = scan_range(&next, Some(&blocks[containing].last()))?;
            state.partial.merge(&tail)?;
        } else {
            rest = containing;
        }
        state.next = blocks.get(rest).map(|b| b.start.clone());
        state.store(path)?;
        for chunk in blocks[rest..].chunks(batch.max(1)) {
            let part = scan_blocks(chunk, threads)?;
            state.partial.merge(&part)?;
            let done = rest + chunk.len();
            rest = done;
            state.next = blocks.get(done).map(|b| b.start.clone());
            state.store(path)?;
            progress(&state);
        }
    }
    Ok(ExhaustiveResult::from_leading(state.partial))
}

/// Renders a binary64 the way Java's `Double.toString` does for values in
/// `[1e-3, 1e7)`: shortest round-trip digits, always with a fractional part.
pub fn java_double(x: f64) -> String {
    let s = format!("{x}");
    if s.contains('.') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

/// CSV histogram rows `n,k,count`, one per non-empty bucket.
pub fn write_histogram_csv<W: std::io::Write>(hists: &[&SortHistogram], w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(["n", "k", "count"])?;
    for h in hists {
        for (k, c) in h.nonzero() {
            wtr.write_record([h.n().to_string(), k.to_string(), c.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_histogram_csv<R: std::io::Read>(r: R) -> Result<Vec<SortHistogram>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out: BTreeMap<usize, SortHistogram> = BTreeMap::new();
    for row in rdr.deserialize::<(usize, u32, u64)>() {
        let (n, k, c) = row?;
        out.entry(n).or_insert_with(|| SortHistogram::new(n)).add(k, c);
    }
    Ok(out.into_values().collect())
}
