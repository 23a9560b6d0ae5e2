mod common;

use proptest::prelude::*;
use sigbandit::path::DiscretePath;
use sigbandit::signature::oracle::{oracle_coefficient, oracle_coefficient_extrapolated};
use sigbandit::signature::{
    canonical_words, chen_concat, prune, pruned_len, pruned_words, segment_signature, shuffle,
    signature, signature_len, word_index, SignatureVector, Word,
};

fn augmented(seed: u64, n: usize, d: usize) -> DiscretePath {
    common::random_path(&mut common::rng(seed), n, d).time_augment()
}

fn words_up_to(d: usize, n: usize) -> Vec<Word> {
    canonical_words(d, n)
}

fn factorial(k: usize) -> f64 {
    (1..=k).product::<usize>() as f64
}

#[test]
fn canonical_index_matches_enumeration() {
    for d in 1..=3 {
        for n in 0..=4 {
            let words = canonical_words(d, n);
            assert_eq!(words.len(), signature_len(d, n));
            for (i, w) in words.iter().enumerate() {
                assert_eq!(word_index(d, w.letters()), i);
            }
        }
    }
}

#[test]
fn pruned_dimension() {
    for d in 1..=3 {
        for n in 1..=4 {
            assert_eq!(pruned_len(d, n), (d + 1).pow(n as u32));
            assert_eq!(pruned_words(d, n).len(), (d + 1).pow(n as u32));
            assert!(pruned_words(d, n).iter().all(|w| w.last() != Some(0)));
        }
    }
}

#[test]
fn straight_line_closed_form() {
    let times = vec![0.0, 0.5, 1.0, 2.0];
    let rows = vec![
        vec![1.0, -2.0],
        vec![1.5, -1.5],
        vec![2.0, -1.0],
        vec![3.0, 0.0],
    ];
    let p = DiscretePath::from_rows(times, &rows)
        .unwrap()
        .time_augment();
    let inc = [2.0, 2.0, 2.0];
    let sig = signature(&p, 4).unwrap();
    for w in canonical_words(2, 4) {
        let want: f64 = w.letters().iter().map(|&l| inc[l]).product::<f64>() / factorial(w.len());
        let got = sig.get(w.letters()).unwrap();
        assert!(common::rel_close(got, want, 1e-14), "{w}: {got} vs {want}");
    }
}

#[test]
fn constant_path_is_identity_on_space_words() {
    let p = DiscretePath::scalar(vec![0.0, 0.3, 1.0], vec![4.0; 3])
        .unwrap()
        .time_augment();
    let sig = signature(&p, 3).unwrap();
    for w in canonical_words(1, 3) {
        let want = if w.letters().iter().all(|&l| l == 0) {
            1.0f64.powi(w.len() as i32) / factorial(w.len())
        } else {
            0.0
        };
        assert!(
            common::rel_close(sig.get(w.letters()).unwrap(), want, 1e-15),
            "{w}"
        );
    }
}

#[test]
fn left_point_oracle_converges() {
    let p = augmented(3, 8, 1);
    let sig = signature(&p, 3).unwrap();
    for w in canonical_words(1, 3) {
        let exact = sig.get(w.letters()).unwrap();
        let coarse = (oracle_coefficient(&p, &w, 50) - exact).abs();
        let fine = (oracle_coefficient(&p, &w, 400) - exact).abs();
        assert!(fine <= coarse + 1e-12, "{w}: {fine} > {coarse}");
        assert!(fine < 2e-2 * (1.0 + exact.abs()), "{w}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shuffle_identity(seed in 0u64..10_000, d in 1usize..3) {
        let p = augmented(seed, 12, d);
        let sig = signature(&p, 4).unwrap();
        let words = words_up_to(d, 3);
        for u in &words {
            for v in &words {
                if u.len() + v.len() > 4 {
                    continue;
                }
                let lhs = sig.get(u.letters()).unwrap() * sig.get(v.letters()).unwrap();
                let rhs: f64 = shuffle(u, v).iter().map(|w| sig.get(w.letters()).unwrap()).sum();
                prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()), "{} {}", u, v);
            }
        }
    }

    #[test]
    fn pruned_coordinates_recover_removed_ones(seed in 0u64..10_000) {
        let p = augmented(seed, 10, 1);
        let sig = signature(&p, 4).unwrap();
        let total_time = p.end_time() - p.start_time();
        prop_assert!(common::rel_close(sig.get(&[0]).unwrap(), total_time, 1e-14));
        for u in words_up_to(1, 3).into_iter().filter(|u| !u.is_empty() && u.last() != Some(0)) {
            let lhs = sig.get(u.letters()).unwrap() * total_time;
            let rhs: f64 = shuffle(&u, &Word::from([0])).iter().map(|w| sig.get(w.letters()).unwrap()).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn chen_is_associative(a in prop::collection::vec(-2.0f64..2.0, 3), b in prop::collection::vec(-2.0f64..2.0, 3), c in prop::collection::vec(-2.0f64..2.0, 3)) {
        let (sa, sb, sc) = (
            segment_signature(&a, 4).unwrap(),
            segment_signature(&b, 4).unwrap(),
            segment_signature(&c, 4).unwrap(),
        );
        let left = chen_concat(&chen_concat(&sa, &sb).unwrap(), &sc).unwrap();
        let right = chen_concat(&sa, &chen_concat(&sb, &sc).unwrap()).unwrap();
        prop_assert!(common::vec_close(left.coeffs(), right.coeffs(), 1e-12));
        let id = SignatureVector::identity(2, 4);
        let same = chen_concat(&sa, &id).unwrap();
        prop_assert_eq!(same.coeffs(), sa.coeffs());
    }

    #[test]
    fn collinear_midpoints_do_not_change_signature(seed in 0u64..10_000, frac in 0.05f64..0.95) {
        let base = common::random_path(&mut common::rng(seed), 6, 2);
        let mut times = Vec::new();
        let mut rows = Vec::new();
        for i in 0..base.len() {
            if i > 0 {
                let t = base.times()[i - 1] + frac * (base.times()[i] - base.times()[i - 1]);
                let r: Vec<f64> = base.row(i - 1).iter().zip(base.row(i)).map(|(a, b)| a + frac * (b - a)).collect();
                times.push(t);
                rows.push(r);
            }
            times.push(base.times()[i]);
            rows.push(base.row(i).to_vec());
        }
        let refined = DiscretePath::from_rows(times, &rows).unwrap();
        let s1 = signature(&base.time_augment(), 4).unwrap();
        let s2 = signature(&refined.time_augment(), 4).unwrap();
        prop_assert!(common::vec_close(s1.coeffs(), s2.coeffs(), 1e-12));
    }

    #[test]
    fn matches_extrapolated_oracle(seed in 0u64..10_000) {
        let p = augmented(seed, 6, 1);
        let sig = signature(&p, 3).unwrap();
        for w in canonical_words(1, 3) {
            let want = oracle_coefficient_extrapolated(&p, &w, 100);
            prop_assert!(common::rel_close(sig.get(w.letters()).unwrap(), want, 1e-6), "{}", w);
        }
    }

    #[test]
    fn prune_keeps_expected_words(seed in 0u64..10_000, d in 1usize..4, n in 1usize..4) {
        let p = augmented(seed, 5, d);
        let sig = signature(&p, n).unwrap();
        let pr = prune(&sig);
        let words = pruned_words(d, n);
        prop_assert_eq!(pr.coeffs().len(), words.len());
        for (c, w) in pr.coeffs().iter().zip(&words) {
            prop_assert_eq!(*c, sig.get(w.letters()).unwrap());
        }
    }
}
