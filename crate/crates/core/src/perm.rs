//! Permutations and the 231-avoiding consecutive stack sort.
//!
//! One pass of the sort scans the input left to right. Before an incoming
//! value `x` is pushed, the top of the stack is popped to the output for as
//! long as the two topmost entries `t1` (top) and `t2` (below it) satisfy
//! `t2 < x < t1`, because pushing `x` would make the top three entries, read
//! top to bottom, an occurrence of the consecutive pattern 231. Once the input
//! is exhausted the remaining stack is drained to the output.
//!
//! The stack never contains a consecutive 231 before a push, so testing only the
//! triple that the push would create is sufficient.
//!
//! The slice-level kernels ([`apply_into`], [`has_peak`], [`Sorter`]) are
//! generic so the enumerator can run them on `u8` buffers while the rest of
//! the crate works with [`Permutation`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `1..=n`, stored in one-line notation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation(Vec<u32>);

impl Permutation {
    /// Checks that `values` is a bijection on `1..=n`.
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut seen = vec![false; n + 1];
        for &v in &values {
            let idx = v as usize;
            if v == 0 || idx > n {
                return Err(Error::OutOfRange {
                    value: v as i64,
                    n,
                });
            }
            if seen[idx] {
                return Err(Error::Duplicate(v as i64));
            }
            seen[idx] = true;
        }
        Ok(Permutation(values))
    }

    /// Wraps values already known to form a permutation.
    pub(crate) fn from_vec_unchecked(values: Vec<u32>) -> Self {
        debug_assert!(Permutation::new(values.clone()).is_ok());
        Permutation(values)
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        Ok(Permutation((1..=n as u32).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; a permutation has at least one entry.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn into_values(self) -> Vec<u32> {
        self.0
    }

    /// First entry.
    pub fn leading(&self) -> u32 {
        self.0[0]
    }

    /// Zero-based position of every value: `positions()[v - 1]` is where `v` sits.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.len()];
        for (i, &v) in self.0.iter().enumerate() {
            pos[v as usize - 1] = i;
        }
        pos
    }

    /// Digits without separators when every value is a single digit,
    /// comma-separated otherwise.
    pub fn compact(&self) -> String {
        if self.len() <= 9 {
            self.0.iter().map(|v| char::from(b'0' + *v as u8)).collect()
        } else {
            self.to_string()
        }
    }
}

/// Validates an arbitrary integer sequence as a permutation.
pub fn validate(seq: &[i64]) -> Result<Permutation> {
    let n = seq.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    let mut values = Vec::with_capacity(n);
    for &v in seq {
        if v < 1 || v > n as i64 {
            return Err(Error::OutOfRange { value: v, n });
        }
        values.push(v as u32);
    }
    let mut seen = vec![false; n + 1];
    for &v in &values {
        if std::mem::replace(&mut seen[v as usize], true) {
            return Err(Error::Duplicate(v as i64));
        }
    }
    Ok(Permutation(values))
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = Error;

    fn try_from(values: Vec<u32>) -> Result<Self> {
        Permutation::new(values)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({})", self.compact())
    }
}

/// Accepts the comma form `4,6,8,5,11,7,2,9,10,3,1` and, for at most nine
/// entries, the compact digit form `45231`.
impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Empty);
        }
        let parsed: Vec<i64> = if s.contains(',') {
            s.split(',')
                .map(|t| t.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(s.to_string()))?
        } else if s.len() <= 9 && s.bytes().all(|b| b.is_ascii_digit()) {
            s.bytes().map(|b| (b - b'0') as i64).collect()
        } else {
            return Err(Error::Parse(s.to_string()));
        };
        validate(&parsed)
    }
}

/// Kind of a stack event in a [`SortTrace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Push,
    Pop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackEvent {
    pub kind: EventKind,
    pub value: u32,
    /// Set on pops that happen while input remains; always false for pushes.
    pub pre_popped: bool,
}

/// Event log of one pass of the sort.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortTrace {
    pub input: Permutation,
    pub output: Permutation,
    pub events: Vec<StackEvent>,
}

impl SortTrace {
    pub fn pre_popped(&self) -> impl Iterator<Item = u32> + '_ {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Pop && e.pre_popped)
            .map(|e| e.value)
    }

    /// Renders every event together with the machine state after it.
    pub fn render(&self) -> String {
        let show = |vals: &[u32]| -> String {
            if vals.is_empty() {
                "-".to_string()
            } else if self.input.len() <= 9 {
                vals.iter().map(|v| v.to_string()).collect()
            } else {
                vals.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            }
        };
        let input = self.input.values();
        let mut consumed = 0;
        let mut stack: Vec<u32> = Vec::new();
        let mut output: Vec<u32> = Vec::new();
        let mut out = String::new();
        out.push_str(&format!(
            "{:<12} {:>12} {:>12} {:>12}\n",
            "event", "input", "stack", "output"
        ));
        out.push_str(&format!(
            "{:<12} {:>12} {:>12} {:>12}\n",
            "start",
            show(input),
            show(&stack),
            show(&output)
        ));
        for e in &self.events {
            let label = match (e.kind, e.pre_popped) {
                (EventKind::Push, _) => {
                    consumed += 1;
                    stack.push(e.value);
                    format!("push {}", e.value)
                }
                (EventKind::Pop, pre) => {
                    stack.pop();
                    output.push(e.value);
                    format!("{} {}", if pre { "pre-pop" } else { "post-pop" }, e.value)
                }
            };
            out.push_str(&format!(
                "{:<12} {:>12} {:>12} {:>12}\n",
                label,
                show(&input[consumed..]),
                show(&stack),
                show(&output)
            ));
        }
        out
    }
}

/// Iterates the sort from `steps[0]` until the first periodic permutation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Permutation>,
    pub sort_number: u32,
}

impl Trajectory {
    pub fn last(&self) -> &Permutation {
        self.steps.last().expect("trajectory has at least one step")
    }
}

// ---------------------------------------------------------------------------
// slice kernels

/// One pass of the sort from `input` into `out`, using `stack` as scratch.
#[inline]
pub fn apply_into<T: Copy + Ord>(input: &[T], out: &mut Vec<T>, stack: &mut Vec<T>) {
    out.clear();
    stack.clear();
    for &x in input {
        while let [.., t2, t1] = stack[..] {
            if t2 < x && x < t1 {
                out.push(t1);
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(x);
    }
    out.extend(stack.drain(..).rev());
}

/// True if some interior entry is larger than both neighbours.
#[inline]
pub fn has_peak<T: Copy + Ord>(p: &[T]) -> bool {
    p.windows(3).any(|w| w[0] < w[1] && w[1] > w[2])
}

/// Most applications a length-`n` permutation can need before it turns
/// periodic: `(n + 1)(n - 2) / 2` for `n >= 3`, zero below.
pub fn sort_number_bound(n: usize) -> u64 {
    if n < 3 {
        0
    } else {
        (n as u64 + 1) * (n as u64 - 2) / 2
    }
}

/// Reusable buffers for computing sort-numbers without allocating.
#[derive(Debug, Default)]
pub struct Sorter<T> {
    cur: Vec<T>,
    next: Vec<T>,
    stack: Vec<T>,
}

impl<T: Copy + Ord + fmt::Display> Sorter<T> {
    pub fn new() -> Self {
        Sorter {
            cur: Vec::new(),
            next: Vec::new(),
            stack: Vec::new(),
        }
    }

    /// Number of passes needed before `p` has no peak.
    ///
    /// Fails once more than `sort_number_bound(n) + 1` passes have been made.
    pub fn sort_number(&mut self, p: &[T]) -> Result<u32> {
        if !has_peak(p) {
            return Ok(0);
        }
        let limit = sort_number_bound(p.len()) + 1;
        self.cur.clear();
        self.cur.extend_from_slice(p);
        let mut steps = 0u64;
        loop {
            apply_into(&self.cur, &mut self.next, &mut self.stack);
            std::mem::swap(&mut self.cur, &mut self.next);
            steps += 1;
            if !has_peak(&self.cur) {
                return Ok(steps as u32);
            }
            if steps >= limit {
                return Err(Error::InternalBoundExceeded {
                    perm: p
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                    bound: limit,
                });
            }
        }
    }
}

// ---------------------------------------------------------------------------
// per-permutation operations

/// One pass of the sort.
pub fn sc231(p: &Permutation) -> Permutation {
    let mut out = Vec::with_capacity(p.len());
    let mut stack = Vec::with_capacity(p.len());
    apply_into(p.values(), &mut out, &mut stack);
    Permutation::from_vec_unchecked(out)
}

/// `sc231` applied `times` times.
pub fn sc231_iter(p: &Permutation, times: usize) -> Permutation {
    let mut cur = p.values().to_vec();
    let mut next = Vec::with_capacity(p.len());
    let mut stack = Vec::with_capacity(p.len());
    for _ in 0..times {
        apply_into(&cur, &mut next, &mut stack);
        std::mem::swap(&mut cur, &mut next);
    }
    Permutation::from_vec_unchecked(cur)
}

/// One pass of the sort with every push and pop recorded.
pub fn sc231_trace(p: &Permutation) -> SortTrace {
    let input = p.values();
    let mut events = Vec::with_capacity(2 * input.len());
    let mut stack: Vec<u32> = Vec::with_capacity(input.len());
    let mut output = Vec::with_capacity(input.len());
    for &x in input {
        while let [.., t2, t1] = stack[..] {
            if t2 < x && x < t1 {
                stack.pop();
                output.push(t1);
                events.push(StackEvent {
                    kind: EventKind::Pop,
                    value: t1,
                    pre_popped: true,
                });
            } else {
                break;
            }
        }
        stack.push(x);
        events.push(StackEvent {
            kind: EventKind::Push,
            value: x,
            pre_popped: false,
        });
    }
    while let Some(v) = stack.pop() {
        output.push(v);
        events.push(StackEvent {
            kind: EventKind::Pop,
            value: v,
            pre_popped: false,
        });
    }
    SortTrace {
        input: p.clone(),
        output: Permutation::from_vec_unchecked(output),
        events,
    }
}

/// A permutation is periodic under the sort exactly when it has no peak, i.e.
/// it decreases to its minimum and increases afterwards.
pub fn is_periodic(p: &Permutation) -> bool {
    !has_peak(p.values())
}

/// Largest `m` such that, for each `j <= m`, the values `1..=j` occupy a
/// contiguous run of positions.
pub fn index_of(p: &Permutation) -> usize {
    let n = p.len();
    let pos = p.positions();
    let (mut lo, mut hi) = (pos[0], pos[0]);
    for (j, &at) in pos.iter().enumerate().skip(1) {
        if at + 1 == lo {
            lo = at;
        } else if at == hi + 1 {
            hi = at;
        } else {
            return j;
        }
    }
    n
}

/// Iterates the sort until the permutation becomes periodic, keeping every step.
pub fn sort_number(p: &Permutation) -> Result<Trajectory> {
    let limit = sort_number_bound(p.len()) + 1;
    let mut steps = vec![p.clone()];
    let mut out = Vec::with_capacity(p.len());
    let mut stack = Vec::with_capacity(p.len());
    while has_peak(steps.last().unwrap().values()) {
        if steps.len() as u64 > limit {
            return Err(Error::InternalBoundExceeded {
                perm: p.to_string(),
                bound: limit,
            });
        }
        apply_into(steps.last().unwrap().values(), &mut out, &mut stack);
        steps.push(Permutation::from_vec_unchecked(out.clone()));
    }
    let sort_number = (steps.len() - 1) as u32;
    Ok(Trajectory { steps, sort_number })
}

pub fn reverse(p: &Permutation) -> Permutation {
    Permutation::from_vec_unchecked(p.values().iter().rev().copied().collect())
}

/// Replaces each value `i` by `n + 1 - i`.
pub fn complement(p: &Permutation) -> Permutation {
    let n = p.len() as u32;
    Permutation::from_vec_unchecked(p.values().iter().map(|v| n + 1 - v).collect())
}

/// Values with the parity of `n` in increasing order, then values with the
/// parity of `n - 1` in decreasing order (`V_3 = 132`, `V_6 = 246531`).
pub fn v_permutation(n: usize) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::Empty);
    }
    let n = n as u32;
    let same = (1..=n).filter(|v| v % 2 == n % 2);
    let other = (1..=n).rev().filter(|v| v % 2 != n % 2);
    Ok(Permutation::from_vec_unchecked(same.chain(other).collect()))
}

/// Order in which the block `{1, 2}` replaces the old value 1 under [`lift`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LiftOrder {
    OneTwo,
    TwoOne,
}

impl LiftOrder {
    pub const BOTH: [LiftOrder; 2] = [LiftOrder::OneTwo, LiftOrder::TwoOne];
}

/// Shifts every value up by one and splits the new 2 into `12` or `21`.
pub fn lift(p: &Permutation, order: LiftOrder) -> Permutation {
    let mut out = Vec::with_capacity(p.len() + 1);
    for &v in p.values() {
        if v == 1 {
            match order {
                LiftOrder::OneTwo => out.extend([1, 2]),
                LiftOrder::TwoOne => out.extend([2, 1]),
            }
        } else {
            out.push(v + 1);
        }
    }
    Permutation::from_vec_unchecked(out)
}

/// Collapses the adjacent pair `{1, 2}` into a single 1 and shifts the other
/// values down. Inverse of [`lift`].
pub fn contract(p: &Permutation) -> Result<Permutation> {
    if p.len() < 2 || index_of(p) < 2 {
        return Err(Error::IndexTooLow);
    }
    let out = p
        .values()
        .iter()
        .filter(|&&v| v != 1)
        .map(|&v| v - 1)
        .collect();
    Ok(Permutation::from_vec_unchecked(out))
}

/// Number of entries strictly between the values 1 and 2.
pub fn gap_1_2(p: &Permutation) -> Result<usize> {
    if p.len() < 2 {
        return Err(Error::TooShort { n: p.len(), min: 2 });
    }
    let pos = p.positions();
    Ok(pos[0].abs_diff(pos[1]) - 1)
}
