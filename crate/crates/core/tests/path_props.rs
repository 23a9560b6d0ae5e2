mod common;

use proptest::prelude::*;
use sigbandit::path::{DiscretePath, Extremum};
use sigbandit::Error;

fn grid_path(values: Vec<f64>) -> DiscretePath {
    let times = (0..values.len()).map(|k| k as f64 / 10.0).collect();
    DiscretePath::scalar(times, values).unwrap()
}

#[test]
fn rejects_malformed_paths() {
    assert!(matches!(
        DiscretePath::scalar(vec![0.0, 0.0], vec![1.0, 2.0]),
        Err(Error::InvalidPath(_))
    ));
    assert!(DiscretePath::scalar(vec![], vec![]).is_err());
    assert!(DiscretePath::from_flat(vec![0.0, 1.0], vec![1.0, 2.0, 3.0], 2).is_err());
    assert!(DiscretePath::scalar(vec![0.0, 1.0], vec![f64::NAN, 0.0]).is_err());
}

#[test]
fn slice_requires_grid_endpoints() {
    let p = grid_path(vec![0.0, 1.0, 2.0, 3.0]);
    let w = p.slice_window(p.times()[1], p.times()[3]).unwrap();
    assert_eq!(w.times(), &p.times()[1..=3]);
    assert_eq!(w.values(), &[1.0, 2.0, 3.0]);
    assert!(matches!(
        p.slice_window(0.05, 0.2),
        Err(Error::GridMismatch(_))
    ));
    assert!(matches!(
        p.slice_window(0.2, 0.1),
        Err(Error::InvalidRange { .. })
    ));
}

#[test]
fn extremum_and_mean() {
    let p = grid_path(vec![1.0, -3.0, 2.0]);
    assert_eq!(p.channel_extremum(0, Extremum::Max).unwrap(), 2.0);
    assert_eq!(p.channel_extremum(0, Extremum::Min).unwrap(), -3.0);
    assert_eq!(p.mean_value(), vec![0.0]);
    assert!(matches!(
        p.channel_extremum(1, Extremum::Max),
        Err(Error::BadChannel { .. })
    ));
}

proptest! {
    #[test]
    fn slicing_keeps_rows(values in prop::collection::vec(-5.0f64..5.0, 3..40), a in 0usize..40, b in 0usize..40) {
        let n = values.len();
        let (lo, hi) = (a % n, b % n);
        prop_assume!(lo < hi);
        let p = grid_path(values.clone());
        let w = p.slice_window(p.times()[lo], p.times()[hi]).unwrap();
        prop_assert_eq!(w.len(), hi - lo + 1);
        prop_assert_eq!(w.values(), &values[lo..=hi]);
        prop_assert_eq!(w.times(), &p.times()[lo..=hi]);
    }

    #[test]
    fn time_augment_prepends_times(seed in 0u64..1000, n in 2usize..30, d in 1usize..4) {
        let p = common::random_path(&mut common::rng(seed), n, d);
        let a = p.time_augment();
        prop_assert_eq!(a.channels(), d + 1);
        for (i, t) in p.times().iter().enumerate() {
            prop_assert_eq!(a.row(i)[0], *t);
            prop_assert_eq!(&a.row(i)[1..], p.row(i));
        }
        prop_assert_eq!(a.time_augment().channels(), d + 2);
    }

    #[test]
    fn log_normalize_starts_at_zero(values in prop::collection::vec(0.01f64..100.0, 2..30), scale in 0.1f64..10.0) {
        let p = grid_path(values.clone());
        let l = p.log_normalize().unwrap();
        prop_assert_eq!(l.first_row(), &[0.0][..]);
        let scaled = grid_path(values.iter().map(|v| v * scale).collect()).log_normalize().unwrap();
        for (x, y) in l.values().iter().zip(scaled.values()) {
            prop_assert!(common::rel_close(*y, *x, 1e-12));
        }
    }

    #[test]
    fn shift_to_origin_keeps_increments(seed in 0u64..1000) {
        let p = common::random_path(&mut common::rng(seed), 10, 2);
        let s = p.shift_to_origin();
        prop_assert_eq!(s.start_time(), 0.0);
        prop_assert_eq!(s.values(), p.values());
    }
}

#[test]
fn log_normalize_rejects_non_positive() {
    let p = grid_path(vec![1.0, 0.0]);
    assert!(matches!(p.log_normalize(), Err(Error::NonPositiveValue(_))));
}
