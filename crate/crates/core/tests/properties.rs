mod common;

use proptest::prelude::*;
use sc231::enumerate::{exhaustive_summary, factorial, next_perm_in_place, prefix_partition};
use sc231::perm::*;
use sc231::Permutation;

fn perm_strategy(max_n: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_n)
        .prop_flat_map(|n| Just((1..=n as u32).collect::<Vec<_>>()).prop_shuffle())
        .prop_map(|v| Permutation::new(v).unwrap())
}

#[test]
fn one_pass_matches_oracle_and_is_a_permutation() {
    for n in 1..=8 {
        for p in common::perms(n) {
            let img = sc231(&p);
            assert_eq!(img.values(), &common::step_oracle(p.values())[..], "{p}");
            assert!(Permutation::new(img.values().to_vec()).is_ok());
            assert_eq!(sc231(&p), img);
        }
    }
}

#[test]
fn sort_numbers_match_oracle() {
    for n in 1..=7 {
        for p in common::perms(n) {
            assert_eq!(
                sort_number(&p).unwrap().sort_number,
                common::sort_number_oracle(p.values()),
                "{p}"
            );
        }
    }
}

#[test]
fn valleys_are_reversed() {
    for n in 1..=9 {
        for p in common::perms(n).into_iter().filter(is_periodic) {
            assert_eq!(sc231(&p), reverse(&p));
            assert_eq!(sc231_iter(&p, 2), p);
        }
    }
}

#[test]
fn periodic_iff_full_index() {
    for n in 1..=9 {
        for p in common::perms(n) {
            assert_eq!(is_periodic(&p), index_of(&p) == n, "{p}");
        }
    }
}

#[test]
fn index_and_gap_laws() {
    for n in 2..=8 {
        for p in common::perms(n) {
            assert!(index_of(&sc231(&p)) >= index_of(&p), "{p}");
            let traj = sort_number(&p).unwrap();
            let gaps: Vec<usize> = traj.steps.iter().map(|s| gap_1_2(s).unwrap()).collect();
            assert!(gaps[0] >= gaps.get(1).copied().unwrap_or(0));
            assert!(gaps.windows(2).all(|w| w[1] <= w[0]));
            for t in 1..gaps.len().saturating_sub(1) {
                if gaps[t] > 0 {
                    assert!(gaps[t + 1] < gaps[t], "{p}: {gaps:?}");
                }
            }
            if index_of(&p) == 1 {
                assert!(index_of(&sc231_iter(&p, n - 1)) > 1, "{p}");
            }
        }
    }
}

#[test]
fn lift_keeps_sort_number() {
    for n in 1..=8 {
        for p in common::perms(n) {
            let k = sort_number(&p).unwrap().sort_number;
            for order in LiftOrder::BOTH {
                let l = lift(&p, order);
                assert_eq!(l.len(), n + 1);
                assert_eq!(contract(&l).unwrap(), p);
                assert_eq!(sort_number(&l).unwrap().sort_number, k, "{p} -> {l}");
            }
        }
    }
}

#[test]
fn v_chain() {
    for n in 3..=30 {
        let v = v_permutation(n).unwrap();
        let rv = reverse(&v);
        assert_eq!(sc231(&rv), v);
        let mut nv = vec![n as u32];
        nv.extend(v_permutation(n - 1).unwrap().values());
        assert_eq!(sc231(&v).values(), &nv[..]);
        let k = sort_number(&rv).unwrap().sort_number as u64;
        assert!(k >= n as u64 - 1);
        assert!(k <= sort_number_bound(n));
    }
}

#[test]
fn max_sort_number_bounds() {
    for n in 3..=10 {
        let max = exhaustive_summary(n, 1).unwrap().summary.max_sort_number as u64;
        assert!(n as u64 - 1 <= max && max <= sort_number_bound(n), "n={n}: {max}");
    }
}

#[test]
fn enumeration_is_thread_independent() {
    for n in 1..=9 {
        let base = exhaustive_summary(n, 1).unwrap();
        for threads in [2, 8] {
            assert_eq!(exhaustive_summary(n, threads).unwrap(), base);
        }
    }
}

#[test]
fn histogram_laws() {
    let hists: Vec<_> = (1..=10)
        .map(|n| exhaustive_summary(n, 2).unwrap().histogram)
        .collect();
    for (i, h) in hists.iter().enumerate() {
        let n = i + 1;
        assert_eq!(h.total(), factorial(n));
        assert_eq!(h.count(0), 1 << (n - 1));
    }
    for n in 1..=8 {
        let (a, b) = (&hists[n - 1], &hists[n]);
        for k in 0..=a.max_sort_number().unwrap() {
            assert!(b.count(k) >= 2 * a.count(k), "q({},{k})", n + 1);
        }
    }
    assert_eq!((0..3).map(|k| hists[3].count(k)).collect::<Vec<_>>(), [8, 6, 7]);
    assert_eq!((2..5).map(|k| hists[6].count(k)).collect::<Vec<_>>(), [1046, 874, 939]);
}

#[test]
fn block_walk_covers_s11_and_s12() {
    // the walk alone, without sorting, for lengths too long to sort in a test
    for n in [11usize, 12] {
        let blocks = prefix_partition(n, 2).unwrap();
        let mut total = 0u64;
        for b in &blocks {
            let mut cur: Vec<u8> = b.start.values().iter().map(|&v| v as u8).collect();
            let prefix = [cur[0], cur[1]];
            let mut steps = 1u64;
            while next_perm_in_place(&mut cur) && cur[..2] == prefix {
                steps += 1;
            }
            assert_eq!(steps, b.count);
            total += steps;
        }
        assert_eq!(total, factorial(n));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_long_permutations(p in perm_strategy(60)) {
        let img = sc231(&p);
        prop_assert_eq!(img.values(), &common::step_oracle(p.values())[..]);
        prop_assert!(index_of(&img) >= index_of(&p));
        if p.len() >= 2 {
            prop_assert!(gap_1_2(&img).unwrap() <= gap_1_2(&p).unwrap());
        }
        prop_assert_eq!(reverse(&reverse(&p)), p.clone());
        prop_assert_eq!(complement(&complement(&p)), p.clone());
        let traj = sort_number(&p).unwrap();
        prop_assert_eq!(traj.steps.len(), traj.sort_number as usize + 1);
        prop_assert!(u64::from(traj.sort_number) <= sort_number_bound(p.len()));
        let l = lift(&p, LiftOrder::TwoOne);
        prop_assert_eq!(sort_number(&l).unwrap().sort_number, traj.sort_number);
    }

    #[test]
    fn trace_is_consistent(p in perm_strategy(40)) {
        let t = sc231_trace(&p);
        prop_assert_eq!(&t.output, &sc231(&p));
        prop_assert_eq!(t.events.len(), 2 * p.len());
    }
}
