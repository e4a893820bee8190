//! Randomized property tests for the numerical kernels and the file layer.

use proptest::prelude::*;

use evdiag::field::{Field, Snapshot};
use evdiag::grid::Grid;
use evdiag::io;
use evdiag::timestats::{self, TimeSeries};

fn series_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, 4..64)
}

proptest! {
    #[test]
    fn finite_horizon_mean_is_linear(
        a in series_values(),
        b in series_values(),
        alpha in -5.0..5.0f64,
        beta in -5.0..5.0f64,
        dt in 1e-3..1.0f64,
    ) {
        let len = a.len().min(b.len());
        let (a, b) = (&a[..len], &b[..len]);
        let combo: Vec<f64> = a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect();
        let sa = TimeSeries::from_dt(0.0, dt, a.to_vec()).unwrap();
        let sb = TimeSeries::from_dt(0.0, dt, b.to_vec()).unwrap();
        let sc = TimeSeries::from_dt(0.0, dt, combo).unwrap();
        let t = sa.horizon();
        let lhs = timestats::avg_t(&sc, t).unwrap();
        let rhs = alpha * timestats::avg_t(&sa, t).unwrap()
            + beta * timestats::avg_t(&sb, t).unwrap();
        let scale = 1.0 + lhs.abs().max(rhs.abs());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * scale);
    }

    #[test]
    fn finite_horizon_mean_is_monotone(
        a in series_values(),
        bumps in prop::collection::vec(0.0..1e3f64, 4..64),
        dt in 1e-3..1.0f64,
    ) {
        let len = a.len().min(bumps.len());
        let lower = &a[..len];
        let upper: Vec<f64> = lower.iter().zip(&bumps).map(|(x, d)| x + d).collect();
        let sl = TimeSeries::from_dt(0.0, dt, lower.to_vec()).unwrap();
        let su = TimeSeries::from_dt(0.0, dt, upper).unwrap();
        let t = sl.horizon();
        let (ml, mu) = (timestats::avg_t(&sl, t).unwrap(), timestats::avg_t(&su, t).unwrap());
        prop_assert!(ml <= mu + 1e-9 * (1.0 + mu.abs()));
    }

    #[test]
    fn cauchy_schwarz_in_time_holds(
        a in series_values(),
        b in series_values(),
        dt in 1e-3..1.0f64,
    ) {
        let len = a.len().min(b.len());
        let sa = TimeSeries::from_dt(0.0, dt, a[..len].to_vec()).unwrap();
        let sb = TimeSeries::from_dt(0.0, dt, b[..len].to_vec()).unwrap();
        let (lhs, rhs) = timestats::cs_in_time(&sa, &sb, sa.horizon()).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-9);
    }

    #[test]
    fn tail_supremum_dominates_and_fixes_constants(
        a in series_values(),
        c in -1e6..1e6f64,
        dt in 1e-3..1.0f64,
        tail in 0.1..1.0f64,
    ) {
        let ia = timestats::avg_inf(
            &TimeSeries::from_dt(0.0, dt, a.clone()).unwrap(), tail).unwrap();
        prop_assert!(ia.lim_sup >= ia.final_avg);
        let ic = timestats::avg_inf(
            &TimeSeries::from_dt(0.0, dt, vec![c; a.len()]).unwrap(), tail).unwrap();
        prop_assert_eq!(ic.lim_sup, c);
        prop_assert_eq!(ic.final_avg, c);
    }

    #[test]
    fn float_formatting_round_trips(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        let back: f64 = io::fmt_f64(v).parse().unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }
}

proptest! {
    // fewer cases: each writes and reads a file
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn snapshot_round_trip_is_bit_exact(
        seed_vals in prop::collection::vec(any::<u64>(), 512),
        time in -1e6..1e6f64,
    ) {
        let g = Grid::periodic_square(16, 2.0 * std::f64::consts::PI).unwrap();
        // arbitrary finite bit patterns, including subnormals and -0.0
        let vals: Vec<f64> = seed_vals
            .iter()
            .map(|b| {
                let v = f64::from_bits(*b);
                if v.is_finite() { v } else { 0.5 }
            })
            .collect();
        let (ux, uy) = vals.split_at(256);
        let velocity = Field::vector(g, vec![ux.to_vec(), uy.to_vec()], time).unwrap();
        let snap = Snapshot::velocity_only(velocity);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.evdg");
        io::write_snapshot(&path, &io::SnapshotFile::from_snapshot(&snap)).unwrap();
        let back = io::read_snapshot(&path).unwrap().into_snapshot().unwrap();
        prop_assert_eq!(back.velocity.time().to_bits(), time.to_bits());
        for c in 0..2 {
            for (a, b) in snap.velocity.component(c).iter().zip(back.velocity.component(c)) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
