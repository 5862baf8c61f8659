//! Exhaustive and constructive property suites for the sort, plus a
//! brute-force preimage search.
//!
//! Exhaustive suites walk `S_n` block by block (see
//! [`crate::enumerate::prefix_partition`]) and merge per-block tallies in
//! block order, so check counts and the recorded failures are identical for
//! every thread count. Failures are kept in scan order (increasing `n`, then
//! lexicographic), so the first one is a minimal reproducer.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::enumerate::{
    exhaustive_summary, factorial, grain_depth, next_perm_in_place, prefix_partition,
    SortHistogram,
};
use crate::error::{Error, Result};
use crate::parallel::map_ordered;
use crate::perm::{
    contract, gap_1_2, has_peak, index_of, is_periodic, lift, reverse, sc231, sc231_iter,
    sort_number, sort_number_bound, v_permutation, LiftOrder, Permutation,
};

/// Failures recorded per suite; the rest are only counted.
const KEPT_FAILURES: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub input: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub max_n: usize,
    pub checks: u64,
    pub failures: Vec<Failure>,
    pub failures_total: u64,
    /// Exact figures the suite computed along the way.
    pub notes: Vec<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures_total == 0 && self.checks > 0
    }
}

/// Static limits of one suite.
#[derive(Clone, Copy, Debug)]
pub struct SuiteSpec {
    pub name: &'static str,
    pub min_n: usize,
    pub cap: usize,
    pub forced_cap: usize,
}

const fn spec(name: &'static str, min_n: usize, cap: usize, forced_cap: usize) -> SuiteSpec {
    SuiteSpec {
        name,
        min_n,
        cap,
        forced_cap,
    }
}

pub const SUITES: [SuiteSpec; 12] = [
    spec("thm42-lower", 3, 30, 200),
    spec("thm43-upper", 3, 10, 12),
    spec("lemma431-gap", 2, 10, 12),
    spec("cor432-index", 3, 10, 12),
    spec("index-monovariant", 1, 10, 12),
    spec("claim47-leading", 1, 10, 12),
    spec("claim48-periodic-by-leading", 1, 10, 12),
    spec("prop45-nonunimodal", 4, 10, 12),
    spec("prop46-doubling", 2, 10, 12),
    spec("periodic-count", 1, 10, 12),
    spec("valley-reversal", 1, 10, 12),
    spec("preimage-bound", 2, 8, 9),
];

pub fn suite_spec(name: &str) -> Result<SuiteSpec> {
    SUITES
        .iter()
        .find(|s| s.name == name)
        .copied()
        .ok_or_else(|| Error::UnknownSuite(name.to_string()))
}

#[derive(Default)]
struct Tally {
    checks: u64,
    failures: Vec<Failure>,
    failures_total: u64,
}

impl Tally {
    fn check(&mut self, ok: bool, failure: impl FnOnce() -> Failure) {
        self.checks += 1;
        if !ok {
            self.failures_total += 1;
            if self.failures.len() < KEPT_FAILURES {
                self.failures.push(failure());
            }
        }
    }

    fn absorb(&mut self, other: Tally) {
        self.checks += other.checks;
        self.failures_total += other.failures_total;
        let room = KEPT_FAILURES - self.failures.len();
        self.failures.extend(other.failures.into_iter().take(room));
    }
}

fn fail(input: &Permutation, expected: impl ToString, actual: impl ToString) -> Failure {
    Failure {
        input: input.to_string(),
        expected: expected.to_string(),
        actual: actual.to_string(),
    }
}

/// Calls `visit` on every permutation of length `n`, one accumulator per
/// block, returned in block order.
fn scan<A, F>(n: usize, threads: usize, visit: F) -> Vec<A>
where
    A: Default + Send,
    F: Fn(&Permutation, &mut A) + Sync,
{
    let blocks = prefix_partition(n, grain_depth(n).min(n)).expect("valid depth");
    map_ordered(blocks.len(), threads, |i| {
        let mut acc = A::default();
        let mut cur = blocks[i].start.values().to_vec();
        for j in 0..blocks[i].count {
            let p = Permutation::from_vec_unchecked(cur.clone());
            visit(&p, &mut acc);
            if j + 1 < blocks[i].count {
                next_perm_in_place(&mut cur);
            }
        }
        acc
    })
}

fn scan_tally<F>(range: std::ops::RangeInclusive<usize>, threads: usize, visit: F) -> Tally
where
    F: Fn(&Permutation, &mut Tally) + Sync,
{
    let mut total = Tally::default();
    for n in range {
        for part in scan(n, threads, &visit) {
            total.absorb(part);
        }
    }
    total
}

/// Number of length-`n` permutations without a peak, using the byte kernel.
pub fn count_periodic(n: usize, threads: usize) -> Result<u64> {
    let blocks = prefix_partition(n, grain_depth(n).min(n))?;
    let counts = map_ordered(blocks.len(), threads, |i| {
        let mut cur: Vec<u8> = blocks[i].start.values().iter().map(|&v| v as u8).collect();
        let mut c = 0u64;
        for j in 0..blocks[i].count {
            c += u64::from(!has_peak(&cur));
            if j + 1 < blocks[i].count {
                next_perm_in_place(&mut cur);
            }
        }
        c
    });
    Ok(counts.into_iter().sum())
}

/// Every `q` in `S_n` with `sc231(q) = p`, in lexicographic order.
pub fn preimages(p: &Permutation) -> Result<Vec<Permutation>> {
    let n = p.len();
    if n > 9 {
        return Err(Error::TooLargeForBruteForce(n));
    }
    let target = p.values();
    let mut cur: Vec<u32> = (1..=n as u32).collect();
    let mut out = Vec::new();
    let (mut img, mut stack) = (Vec::with_capacity(n), Vec::with_capacity(n));
    loop {
        crate::perm::apply_into(&cur, &mut img, &mut stack);
        if img == target {
            out.push(Permutation::from_vec_unchecked(cur.clone()));
        }
        if !next_perm_in_place(&mut cur) {
            break;
        }
    }
    Ok(out)
}

/// `(p, sc231(p))` for every `p` in `S_n`, lexicographically.
pub fn functional_graph(n: usize) -> Result<Vec<(Permutation, Permutation)>> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if n > 9 {
        return Err(Error::TooLargeForBruteForce(n));
    }
    let mut cur = Permutation::identity(n)?;
    let mut out = Vec::with_capacity(factorial(n) as usize);
    loop {
        out.push((cur.clone(), sc231(&cur)));
        match crate::enumerate::next_perm(&cur) {
            Some(nx) => cur = nx,
            None => break,
        }
    }
    Ok(out)
}

/// `2^(k-2)` rounded half up, so leading entry 1 gives 1.
pub fn periodic_with_leading(k: u32) -> u64 {
    if k <= 1 {
        1
    } else {
        1u64 << (k - 2)
    }
}

/// Runs one suite over lengths up to `max_n`.
pub fn run_suite(name: &str, max_n: usize, force: bool, threads: usize) -> Result<SuiteReport> {
    let spec = suite_spec(name)?;
    let cap = if force { spec.forced_cap } else { spec.cap };
    if max_n < spec.min_n || max_n > cap {
        return Err(Error::SuiteRange {
            suite: name.to_string(),
            max_n,
            min: spec.min_n,
            cap,
        });
    }
    let started = Instant::now();
    let mut notes = Vec::new();
    let tally = match spec.name {
        "thm42-lower" => thm42_lower(max_n, &mut notes),
        "thm43-upper" => scan_tally(3..=max_n, threads, |p, t| {
            let bound = sort_number_bound(p.len());
            match sort_number(p) {
                Ok(tr) => t.check(u64::from(tr.sort_number) <= bound, || {
                    fail(p, format!("<= {bound}"), tr.sort_number)
                }),
                Err(e) => t.check(false, || fail(p, format!("<= {bound}"), e)),
            }
        }),
        "lemma431-gap" => scan_tally(2..=max_n, threads, |p, t| {
            let gaps: Vec<usize> = match sort_number(p) {
                Ok(tr) => tr.steps.iter().map(|s| gap_1_2(s).unwrap()).collect(),
                Err(e) => return t.check(false, || fail(p, "a trajectory", e)),
            };
            // never grows; strictly shrinks from the second pass on while positive
            let bad = gaps.windows(2).enumerate().find(|(step, w)| {
                w[1] > w[0] || (*step >= 1 && w[0] > 0 && w[1] >= w[0])
            });
            t.check(bad.is_none(), || {
                let (step, w) = bad.unwrap();
                fail(
                    p,
                    format!("gap after pass {} below {}", step + 1, w[0]),
                    format!("{:?}", gaps),
                )
            });
        }),
        "cor432-index" => scan_tally(3..=max_n, threads, |p, t| {
            if index_of(p) == 1 {
                let after = sc231_iter(p, p.len() - 1);
                let idx = index_of(&after);
                t.check(idx > 1, || fail(p, "> 1", idx));
            }
        }),
        "index-monovariant" => scan_tally(1..=max_n, threads, |p, t| {
            let before = index_of(p);
            let after = index_of(&sc231(p));
            t.check(after >= before, || fail(p, format!(">= {before}"), after));
        }),
        "claim47-leading" => scan_tally(1..=max_n, threads, |p, t| {
            let lead = p.leading() as usize;
            if lead == 1 || lead == p.len() {
                match sort_number(p) {
                    Ok(tr) => t.check(tr.sort_number != 2, || fail(p, "!= 2", 2)),
                    Err(e) => t.check(false, || fail(p, "!= 2", e)),
                }
            }
        }),
        "claim48-periodic-by-leading" => claim48(max_n, threads, &mut notes),
        "prop45-nonunimodal" => prop45(max_n, threads, &mut notes)?,
        "prop46-doubling" => prop46(max_n, threads, &mut notes)?,
        "periodic-count" => {
            let mut t = Tally::default();
            for n in 1..=max_n {
                let got = count_periodic(n, threads)?;
                let want = 1u64 << (n - 1);
                notes.push(format!("n={n}: q(n,0)={got}"));
                t.check(got == want, || Failure {
                    input: format!("n={n}"),
                    expected: want.to_string(),
                    actual: got.to_string(),
                });
            }
            t
        }
        "valley-reversal" => scan_tally(1..=max_n, threads, |p, t| {
            if is_periodic(p) {
                let img = sc231(p);
                let rev = reverse(p);
                t.check(img == rev, || fail(p, rev.compact(), img.compact()));
            }
        }),
        "preimage-bound" => preimage_bound(max_n, threads, &mut notes)?,
        _ => unreachable!("every listed suite is dispatched"),
    };
    Ok(SuiteReport {
        suite: spec.name.to_string(),
        max_n,
        checks: tally.checks,
        failures: tally.failures,
        failures_total: tally.failures_total,
        notes,
        elapsed: started.elapsed(),
    })
}

/// Every suite, each with `max_n` clamped to its own cap.
pub fn run_all(max_n: usize, force: bool, threads: usize) -> Result<Vec<SuiteReport>> {
    SUITES
        .iter()
        .map(|s| {
            let cap = if force { s.forced_cap } else { s.cap };
            run_suite(s.name, max_n.min(cap), force, threads)
        })
        .collect()
}

fn thm42_lower(max_n: usize, notes: &mut Vec<String>) -> Tally {
    let mut t = Tally::default();
    for n in 3..=max_n {
        let v = v_permutation(n).unwrap();
        let rv = reverse(&v);
        let mut nv: Vec<u32> = vec![n as u32];
        nv.extend(v_permutation(n - 1).unwrap().values());
        let nv = Permutation::from_vec_unchecked(nv);
        let first = sc231(&rv);
        let second = sc231(&v);
        let k = sort_number(&rv).map(|tr| tr.sort_number);
        notes.push(format!(
            "n={n}: sort_number(rev V_n)={}",
            k.as_ref().map_or_else(|e| e.to_string(), |k| k.to_string())
        ));
        let ok = first == v && second == nv && matches!(k, Ok(k) if k as usize >= n - 1);
        t.check(ok, || {
            fail(
                &rv,
                format!("-> {v} -> {nv}, sort-number >= {}", n - 1),
                format!(
                    "-> {first} -> {second}, sort-number {}",
                    k.as_ref().map_or_else(|e| e.to_string(), |k| k.to_string())
                ),
            )
        });
    }
    t
}

fn claim48(max_n: usize, threads: usize, notes: &mut Vec<String>) -> Tally {
    let mut t = Tally::default();
    for n in 1..=max_n {
        let parts: Vec<Vec<u64>> = scan(n, threads, |p, acc: &mut Vec<u64>| {
            if acc.is_empty() {
                acc.resize(p.len(), 0);
            }
            if is_periodic(p) {
                acc[p.leading() as usize - 1] += 1;
            }
        });
        let mut counts = vec![0u64; n];
        for part in parts {
            for (c, x) in counts.iter_mut().zip(part) {
                *c += x;
            }
        }
        notes.push(format!(
            "n={n}: {}",
            counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
        ));
        for (i, &got) in counts.iter().enumerate() {
            let k = i as u32 + 1;
            let want = periodic_with_leading(k);
            t.check(got == want, || Failure {
                input: format!("n={n}, leading={k}"),
                expected: want.to_string(),
                actual: got.to_string(),
            });
        }
    }
    t
}

/// First `i < j < k` with `q_i > q_j < q_k`, if any.
pub fn unimodality_break(h: &SortHistogram) -> Option<(u32, u32, u32)> {
    let max = h.max_sort_number()?;
    for j in 1..max {
        let qj = h.count(j);
        let left = (0..j).find(|&i| h.count(i) > qj);
        let right = (j + 1..=max).find(|&k| h.count(k) > qj);
        if let (Some(i), Some(k)) = (left, right) {
            return Some((i, j, k));
        }
    }
    None
}

fn prop45(max_n: usize, threads: usize, notes: &mut Vec<String>) -> Result<Tally> {
    let mut t = Tally::default();
    let witnesses: [(usize, u32, [u64; 3]); 2] = [(4, 0, [8, 6, 7]), (7, 2, [1046, 874, 939])];
    for n in 1..=max_n {
        let h = exhaustive_summary(n, threads)?.histogram;
        let brk = unimodality_break(&h);
        notes.push(match brk {
            Some((i, j, k)) => format!(
                "n={n}: not unimodal, q({n},{i})={} > q({n},{j})={} < q({n},{k})={}",
                h.count(i),
                h.count(j),
                h.count(k)
            ),
            None => format!("n={n}: unimodal"),
        });
        if let Some(&(_, start, want)) = witnesses.iter().find(|w| w.0 == n) {
            let got: Vec<u64> = (start..start + 3).map(|k| h.count(k)).collect();
            let dip = got[0] > got[1] && got[1] < got[2];
            t.check(got == want && dip, || Failure {
                input: format!("q({n},{}..={})", start, start + 2),
                expected: format!("{want:?}"),
                actual: format!("{got:?}"),
            });
        }
    }
    Ok(t)
}

fn prop46(max_n: usize, threads: usize, notes: &mut Vec<String>) -> Result<Tally> {
    let mut t = scan_tally(1..=max_n - 1, threads, |p, t| {
        let k = sort_number(p).map(|tr| tr.sort_number).ok();
        for order in LiftOrder::BOTH {
            let l = lift(p, order);
            let lk = sort_number(&l).map(|tr| tr.sort_number).ok();
            let back = contract(&l).ok();
            let ok = k.is_some() && lk == k && back.as_ref() == Some(p) && index_of(&l) >= 2;
            t.check(ok, || {
                fail(
                    p,
                    format!("lift {:?} keeps sort-number {k:?} and contracts back", order),
                    format!("{l} with sort-number {lk:?}, contracts to {back:?}"),
                )
            });
        }
    });
    let mut prev = exhaustive_summary(1, threads)?.histogram;
    for n in 1..max_n {
        let next = exhaustive_summary(n + 1, threads)?.histogram;
        let top = next.max_sort_number().unwrap_or(0).max(prev.max_sort_number().unwrap_or(0));
        for k in 0..=top {
            let (a, b) = (prev.count(k), next.count(k));
            t.check(b >= 2 * a, || Failure {
                input: format!("q({},{k}) vs q({n},{k})", n + 1),
                expected: format!(">= {}", 2 * a),
                actual: b.to_string(),
            });
        }
        notes.push(format!(
            "n={}: min ratio q(n+1,k)/q(n,k) = {}",
            n,
            (0..=top)
                .filter(|&k| prev.count(k) > 0)
                .map(|k| next.count(k) as f64 / prev.count(k) as f64)
                .fold(f64::INFINITY, f64::min)
        ));
        prev = next;
    }
    Ok(t)
}

fn preimage_bound(max_n: usize, threads: usize, notes: &mut Vec<String>) -> Result<Tally> {
    let mut t = Tally::default();
    for n in 2..=max_n {
        let parts: Vec<HashMap<Vec<u32>, u64>> = scan(n, threads, |p, acc: &mut HashMap<Vec<u32>, u64>| {
            *acc.entry(sc231(p).into_values()).or_default() += 1;
        });
        let mut images: HashMap<Vec<u32>, u64> = HashMap::new();
        for part in parts {
            for (k, v) in part {
                *images.entry(k).or_default() += v;
            }
        }
        let total: u64 = images.values().sum();
        let max = images.values().copied().max().unwrap_or(0);
        let bound = 1u64 << (n - 2);
        notes.push(format!(
            "n={n}: {} images, max preimages {max}, total {total}",
            images.len()
        ));
        t.check(max == bound, || Failure {
            input: format!("n={n}"),
            expected: format!("max preimages {bound}"),
            actual: max.to_string(),
        });
        t.check(total == factorial(n), || Failure {
            input: format!("n={n}"),
            expected: format!("sum of preimage counts {}", factorial(n)),
            actual: total.to_string(),
        });
        if n <= 6 {
            // cross-check the counting pass against the brute-force search
            let mut cur = Permutation::identity(n)?;
            loop {
                let want = images.get(cur.values()).copied().unwrap_or(0);
                let got = preimages(&cur)?;
                let ok = got.len() as u64 == want && got.iter().all(|q| sc231(q) == cur);
                t.check(ok, || fail(&cur, want, got.len()));
                match crate::enumerate::next_perm(&cur) {
                    Some(nx) => cur = nx,
                    None => break,
                }
            }
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn preimage_examples() {
        assert!(preimages(&p("4321")).unwrap().contains(&p("1234")));
        assert!(preimages(&p("132")).unwrap().contains(&p("231")));
        let max = functional_graph(4)
            .unwrap()
            .iter()
            .map(|(q, _)| preimages(q).unwrap().len())
            .max()
            .unwrap();
        assert_eq!(max, 4);
        assert!(preimages(&Permutation::identity(10).unwrap()).is_err());
        let pre = preimages(&p("4321")).unwrap();
        assert!(pre.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn graph_on_s4_has_figure_edges() {
        let g: HashMap<String, String> = functional_graph(4)
            .unwrap()
            .into_iter()
            .map(|(a, b)| (a.compact(), b.compact()))
            .collect();
        assert_eq!(g.len(), 24);
        // every arrow drawn in the length-4 diagram, plus the two undrawn periodic ones
        let edges = [
            ("4132", "3214"), ("3142", "4213"), ("2143", "4312"), ("1243", "4321"),
            ("1423", "4321"), ("1432", "4321"), ("2314", "4132"), ("2431", "4132"),
            ("2413", "3142"), ("3412", "2143"), ("3421", "1243"), ("3241", "1423"),
            ("2341", "1432"), ("1342", "2431"), ("1324", "3421"), ("4231", "1324"),
            ("1234", "4321"), ("4321", "1234"),
        ];
        for (from, to) in edges {
            assert_eq!(g[from], to, "{from}");
        }
    }

    #[test]
    fn suite_examples() {
        let r = run_suite("claim47-leading", 7, false, 2).unwrap();
        assert!(r.passed());
        // n = 1 contributes its single permutation, every n >= 2 contributes 2 (n-1)!
        let want: u64 = 1 + (2..=7).map(|n| 2 * factorial(n - 1)).sum::<u64>();
        assert_eq!(r.checks, want);

        let r = run_suite("thm42-lower", 20, false, 1).unwrap();
        assert!(r.passed());
        assert_eq!(r.checks, 18);

        let r = run_suite("claim48-periodic-by-leading", 3, false, 1).unwrap();
        assert!(r.passed());
        assert_eq!(r.notes.last().unwrap(), "n=3: 1,1,2");

        let r = run_suite("prop45-nonunimodal", 7, false, 1).unwrap();
        assert!(r.passed());
        assert_eq!(r.checks, 2);
        assert!(r.notes[3].contains("q(4,0)=8 > q(4,1)=6 < q(4,2)=7"));
    }

    #[test]
    fn argument_errors() {
        assert!(matches!(run_suite("nope", 5, false, 1), Err(Error::UnknownSuite(_))));
        assert!(matches!(run_suite("thm43-upper", 11, false, 1), Err(Error::SuiteRange { .. })));
        assert!(matches!(run_suite("preimage-bound", 9, false, 1), Err(Error::SuiteRange { .. })));
        assert!(matches!(run_suite("prop45-nonunimodal", 3, false, 1), Err(Error::SuiteRange { .. })));
    }

    #[test]
    fn all_suites_small_and_thread_independent() {
        let one = run_all(6, false, 1).unwrap();
        let many = run_all(6, false, 8).unwrap();
        assert_eq!(one.len(), SUITES.len());
        for (a, b) in one.iter().zip(&many) {
            assert!(a.passed(), "{} failed: {:?}", a.suite, a.failures);
            assert_eq!(a.checks, b.checks);
            assert_eq!(a.notes, b.notes);
        }
    }

    #[test]
    fn tally_keeps_first_failures() {
        let mut t = Tally::default();
        for i in 0..25 {
            t.check(i % 2 == 0, || Failure {
                input: i.to_string(),
                expected: String::new(),
                actual: String::new(),
            });
        }
        assert_eq!(t.checks, 25);
        assert_eq!(t.failures_total, 12);
        assert_eq!(t.failures.len(), KEPT_FAILURES);
        assert_eq!(t.failures[0].input, "1");
    }

    #[test]
    fn leading_rounding() {
        assert_eq!(periodic_with_leading(1), 1);
        assert_eq!(periodic_with_leading(2), 1);
        assert_eq!(periodic_with_leading(3), 2);
        assert_eq!(periodic_with_leading(6), 16);
    }
}
