//! Shared fixtures for the kernel benchmarks.

use evdiag::field::{Field, Snapshot, SnapshotSeries};
use evdiag::grid::Grid;

pub fn taylor_green_field(n: usize) -> Field {
    let g = Grid::periodic_square(n, 2.0 * std::f64::consts::PI).unwrap();
    Field::from_fn_2d(g, 1, 0.0, |c, x, y| {
        if c == 0 {
            x.cos() * y.sin()
        } else {
            -x.sin() * y.cos()
        }
    })
    .unwrap()
}

pub fn decaying_series(n: usize, steps: usize) -> SnapshotSeries {
    let base = taylor_green_field(n);
    let snaps = (0..steps)
        .map(|i| {
            let t = i as f64 * 0.05;
            let mut v = base.clone();
            v.scale((-0.02 * t).exp());
            v.set_time(t);
            Snapshot::velocity_only(v)
        })
        .collect();
    SnapshotSeries::new(snaps).unwrap()
}
