//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use sc231::Permutation;

/// All permutations of `1..=n` in lexicographic order, by recursion on the
/// first entry.
pub fn lex_perms(n: usize) -> Vec<Vec<u32>> {
    fn rec(rest: &[u32], prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let mut r = rest.to_vec();
            let x = r.remove(i);
            prefix.push(x);
            rec(&r, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&(1..=n as u32).collect::<Vec<_>>(), &mut Vec::new(), &mut out);
    out
}

pub fn perms(n: usize) -> Vec<Permutation> {
    lex_perms(n)
        .into_iter()
        .map(|v| Permutation::new(v).unwrap())
        .collect()
}

/// One pass of the machine, re-checking the whole stack for a consecutive
/// 231 (read top to bottom) on every push attempt.
pub fn step_oracle(p: &[u32]) -> Vec<u32> {
    let clean = |stack: &[u32]| {
        let tb: Vec<u32> = stack.iter().rev().copied().collect();
        !tb.windows(3).any(|w| w[2] < w[0] && w[0] < w[1])
    };
    let mut stack: Vec<u32> = Vec::new();
    let mut out = Vec::new();
    for &x in p {
        loop {
            let mut trial = stack.clone();
            trial.push(x);
            if clean(&trial) {
                stack = trial;
                break;
            }
            out.push(stack.pop().unwrap());
        }
    }
    out.extend(stack.into_iter().rev());
    out
}

/// Sort-number by iterating the step oracle and testing classical avoidance
/// of 132 and 231.
pub fn sort_number_oracle(p: &[u32]) -> u32 {
    let mut cur = p.to_vec();
    let mut k = 0;
    while contains_classical(&cur, [1, 3, 2]) || contains_classical(&cur, [2, 3, 1]) {
        cur = step_oracle(&cur);
        k += 1;
        assert!(k < 1000);
    }
    k
}

pub fn contains_classical(v: &[u32], pat: [u8; 3]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let t = [v[i], v[j], v[k]];
                if (0..3).all(|a| (0..3).all(|b| (t[a] < t[b]) == (pat[a] < pat[b]))) {
                    return true;
                }
            }
        }
    }
    false
}

/// Student t CDF by composite Simpson quadrature of the density after the
/// substitution `x = tan(theta)`, normalised by the same quadrature over the
/// whole line. No special functions involved.
pub fn t_cdf_oracle(t: f64, df: f64) -> f64 {
    let g = |theta: f64| {
        let x = theta.tan();
        let c = theta.cos();
        (1.0 + x * x / df).powf(-(df + 1.0) / 2.0) / (c * c)
    };
    let simpson = |a: f64, b: f64, steps: usize| {
        let h = (b - a) / steps as f64;
        let mut s = g(a) + g(b);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * g(a + i as f64 * h);
        }
        s * h / 3.0
    };
    let half = std::f64::consts::FRAC_PI_2;
    // endpoints where the integrand vanishes or stays bounded
    let eps = 1e-9;
    let total = simpson(-half + eps, half - eps, 200_000);
    let upto = simpson(-half + eps, t.atan(), 200_000);
    upto / total
}

/// Inverts [`t_cdf_oracle`] by bisection.
pub fn t_quantile_oracle(prob: f64, df: f64) -> f64 {
    let (mut lo, mut hi) = (-100.0, 100.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if t_cdf_oracle(mid, df) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
