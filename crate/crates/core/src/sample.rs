//! Seeded Monte-Carlo estimation of average sort-numbers.
//!
//! Every sample owns an independent random stream keyed by
//! `(seed, n, sample index)`, drawn from ChaCha8: the 64-bit seed is expanded
//! into the key with `SeedableRng::seed_from_u64`, and the ChaCha stream id is
//! `(n << 32) | index`. Samples can therefore be computed in any order on any
//! number of threads without changing a single output bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::parallel::map_ordered;
use crate::perm::{Permutation, Sorter};

pub const DEFAULT_SAMPLES: usize = 400;
pub const DEFAULT_LEVEL: f64 = 0.99;
pub const RNG_ALGORITHM: &str = "chacha8";

/// Identifies one random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub stream: u64,
}

impl RngState {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngState { seed, stream }
    }

    /// Stream for sample `index` of length `n`.
    pub fn for_sample(seed: u64, n: usize, index: usize) -> Self {
        assert!(n <= u32::MAX as usize && index <= u32::MAX as usize);
        RngState {
            seed,
            stream: ((n as u64) << 32) | index as u64,
        }
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Fisher-Yates shuffle of the identity. Bounded draws are taken as `u32`
/// so the sequence is the same on every platform.
pub fn random_perm<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if n > u32::MAX as usize {
        return Err(Error::InvalidArgument(format!("length {n} is too large")));
    }
    let mut v: Vec<u32> = (1..=n as u32).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i as u32) as usize;
        v.swap(i, j);
    }
    Ok(Permutation::from_vec_unchecked(v))
}

/// Arithmetic mean and sample standard deviation (`m - 1` denominator).
/// The deviation is NaN for a single observation.
pub fn mean_sd(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(Error::InvalidArgument("mean of an empty sample".into()));
    }
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return Ok((mean, f64::NAN));
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    Ok((mean, (ss / (m - 1.0)).sqrt()))
}

/// Inverse CDF of Student's t with `df` degrees of freedom.
///
/// Starts from the incomplete-beta inversion and polishes by bisection on the
/// CDF whenever the residual is above `1e-12`.
pub fn t_quantile(prob: f64, df: u64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "probability must lie in (0, 1), got {prob}"
        )));
    }
    if df == 0 {
        return Err(Error::InvalidArgument("degrees of freedom must be >= 1".into()));
    }
    if prob == 0.5 {
        return Ok(0.0);
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let guess = dist.inverse_cdf(prob);
    if guess.is_finite() && (dist.cdf(guess) - prob).abs() <= 1e-12 {
        return Ok(guess);
    }
    // bracket and bisect
    let (mut lo, mut hi) = if guess.is_finite() {
        (guess - 1.0, guess + 1.0)
    } else {
        (-1.0, 1.0)
    };
    while dist.cdf(lo) > prob {
        lo = 2.0 * lo - hi;
    }
    while dist.cdf(hi) < prob {
        hi = 2.0 * hi - lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dist.cdf(mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two-sided one-sample t-interval `mean ± t · sd / sqrt(m)`.
pub fn confidence_interval(mean: f64, sd: f64, m: usize, level: f64) -> Result<(f64, f64)> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "a confidence interval needs at least 2 samples, got {m}"
        )));
    }
    check_level(level)?;
    let t = t_quantile((1.0 + level) / 2.0, m as u64 - 1)?;
    let half = t * sd / (m as f64).sqrt();
    Ok((mean - half, mean + half))
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "confidence level must lie in (0, 1), got {level}"
        )))
    }
}

/// Summary of `m` sampled sort-numbers at one length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub m: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub seed: u64,
}

/// Stats plus the raw sort-numbers in sample-index order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRun {
    pub stats: SampleStats,
    pub sort_numbers: Vec<u32>,
}

/// Draws `m` uniform permutations of length `n` and summarises their sort-numbers.
pub fn sample_stats(n: usize, m: usize, seed: u64, level: f64, threads: usize) -> Result<SampleRun> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "sampling needs at least 2 samples, got {m}"
        )));
    }
    check_level(level)?;
    // contiguous chunks keep one Sorter per job
    let chunk = m.div_ceil(threads.max(1) * 4).max(1);
    let jobs = m.div_ceil(chunk);
    let parts = map_ordered(jobs, threads, |j| -> Result<Vec<u32>> {
        let mut sorter = Sorter::<u32>::new();
        (j * chunk..((j + 1) * chunk).min(m))
            .map(|i| {
                let mut rng = RngState::for_sample(seed, n, i).rng();
                let p = random_perm(n, &mut rng)?;
                sorter.sort_number(p.values())
            })
            .collect()
    });
    let mut sort_numbers = Vec::with_capacity(m);
    for part in parts {
        sort_numbers.extend(part?);
    }
    let xs: Vec<f64> = sort_numbers.iter().map(|&k| k as f64).collect();
    let (mean, sd) = mean_sd(&xs)?;
    let (ci_low, ci_high) = confidence_interval(mean, sd, m, level)?;
    Ok(SampleRun {
        stats: SampleStats {
            n,
            m,
            mean,
            sd,
            ci_low,
            ci_high,
            level,
            seed,
        },
        sort_numbers,
    })
}

/// Grid layout: rows of n values, means, deviations, CI lower bounds and CI
/// upper bounds, followed by one row per sample index holding the raw
/// sort-numbers for every length.
pub fn write_grid<W: std::io::Write>(runs: &[SampleRun], w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_writer(w);
    wtr.write_record(runs.iter().map(|r| r.stats.n.to_string()))?;
    wtr.write_record(runs.iter().map(|r| r.stats.mean.to_string()))?;
    wtr.write_record(runs.iter().map(|r| r.stats.sd.to_string()))?;
    wtr.write_record(runs.iter().map(|r| r.stats.ci_low.to_string()))?;
    wtr.write_record(runs.iter().map(|r| r.stats.ci_high.to_string()))?;
    let rows = runs.iter().map(|r| r.sort_numbers.len()).max().unwrap_or(0);
    for i in 0..rows {
        wtr.write_record(runs.iter().map(|r| {
            r.sort_numbers
                .get(i)
                .map_or_else(String::new, |k| k.to_string())
        }))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Inverse of [`write_grid`]; `level` and `seed` are not part of the grid.
pub fn read_grid<R: std::io::Read>(r: R, level: f64, seed: u64) -> Result<Vec<SampleRun>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(r);
    let rows: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;
    if rows.len() < 5 {
        return Err(Error::Format("grid needs at least five rows".into()));
    }
    let num = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| Error::Format(format!("not a number: {s:?}")))
    };
    let mut runs = Vec::new();
    for col in 0..rows[0].len() {
        let n = rows[0][col]
            .parse::<usize>()
            .map_err(|_| Error::Format(format!("bad length {:?}", &rows[0][col])))?;
        let sort_numbers = rows[5..]
            .iter()
            .filter_map(|r| r.get(col).filter(|s| !s.is_empty()))
            .map(|s| {
                s.parse::<u32>()
                    .map_err(|_| Error::Format(format!("not a sort-number: {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        runs.push(SampleRun {
            stats: SampleStats {
                n,
                m: sort_numbers.len(),
                mean: num(&rows[1][col])?,
                sd: num(&rows[2][col])?,
                ci_low: num(&rows[3][col])?,
                ci_high: num(&rows[4][col])?,
                level,
                seed,
            },
            sort_numbers,
        });
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn random_perm_basics() {
        let mut rng = RngState::new(7, 0).rng();
        assert_eq!(random_perm(1, &mut rng).unwrap().values(), &[1]);
        assert!(random_perm(0, &mut rng).is_err());
        let a = random_perm(5, &mut RngState::new(42, 0).rng()).unwrap();
        let b = random_perm(5, &mut RngState::new(42, 0).rng()).unwrap();
        assert_eq!(a, b);
        let c = random_perm(50, &mut RngState::new(42, 1).rng()).unwrap();
        let d = random_perm(50, &mut RngState::new(42, 2).rng()).unwrap();
        assert_ne!(c, d);
    }

    #[test]
    fn random_perm_is_uniform_on_s4() {
        // chi-square over the 24 outcomes against the 0.999 quantile of chi2(23)
        const CHI2_23_999: f64 = 49.7282;
        let mut rng = RngState::new(2024, 0).rng();
        let mut counts = std::collections::HashMap::<Vec<u32>, u64>::new();
        let draws = 24_000;
        for _ in 0..draws {
            *counts
                .entry(random_perm(4, &mut rng).unwrap().into_values())
                .or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        let expected = draws as f64 / 24.0;
        let stat: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(stat < CHI2_23_999, "chi-square statistic {stat}");
    }

    #[test]
    fn mean_sd_examples() {
        assert_eq!(mean_sd(&[5.0, 5.0, 5.0]).unwrap(), (5.0, 0.0));
        assert_eq!(mean_sd(&[1.0, 2.0, 3.0]).unwrap(), (2.0, 1.0));
        let (m, s) = mean_sd(&[0.0, 2.0]).unwrap();
        assert_eq!(m, 1.0);
        assert_relative_eq!(s, 2f64.sqrt(), max_relative = 1e-15);
        assert!(mean_sd(&[]).is_err());
        assert!(mean_sd(&[3.0]).unwrap().1.is_nan());
    }

    #[test]
    fn t_quantile_domain() {
        assert_eq!(t_quantile(0.5, 3).unwrap(), 0.0);
        assert!(t_quantile(0.0, 3).is_err());
        assert!(t_quantile(1.0, 3).is_err());
        assert!(t_quantile(0.9, 0).is_err());
        assert!(t_quantile(f64::NAN, 3).is_err());
        let q = t_quantile(0.975, 10).unwrap();
        assert_relative_eq!(t_quantile(0.025, 10).unwrap(), -q, max_relative = 1e-10);
    }

    #[test]
    fn interval_basics() {
        assert_eq!(confidence_interval(3.0, 0.0, 10, 0.99).unwrap(), (3.0, 3.0));
        assert!(confidence_interval(3.0, 1.0, 1, 0.99).is_err());
        assert!(confidence_interval(3.0, 1.0, 5, 1.0).is_err());
        let (lo, hi) = confidence_interval(10.0, 2.0, 400, 0.99).unwrap();
        assert_relative_eq!((lo + hi) / 2.0, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn length_two_is_always_periodic() {
        let run = sample_stats(2, 50, 9, 0.99, 2).unwrap();
        assert_eq!(run.stats.mean, 0.0);
        assert_eq!(run.stats.sd, 0.0);
        assert_eq!((run.stats.ci_low, run.stats.ci_high), (0.0, 0.0));
    }

    #[test]
    fn sampling_ignores_thread_count() {
        let a = sample_stats(20, 37, 5, 0.99, 1).unwrap();
        for threads in [2, 3, 8] {
            assert_eq!(sample_stats(20, 37, 5, 0.99, threads).unwrap(), a);
        }
        assert_ne!(sample_stats(20, 37, 6, 0.99, 1).unwrap(), a);
    }

    #[test]
    fn grid_round_trip() {
        let runs = vec![
            sample_stats(6, 5, 1, 0.99, 1).unwrap(),
            sample_stats(9, 7, 1, 0.99, 1).unwrap(),
        ];
        let mut buf = Vec::new();
        write_grid(&runs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 5 + 7);
        assert!(text.starts_with("6,9\n"));
        assert_eq!(read_grid(&buf[..], 0.99, 1).unwrap(), runs);
    }
}
