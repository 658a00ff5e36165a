//! Bessel J/Y against a frozen arbitrary-precision table (see data/gen_bessel_table.py).

use vortexbc::bessel::{bessel_j, bessel_y};

fn table() -> Vec<(i32, f64, f64, f64)> {
    include_str!("data/bessel_table.csv")
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
                f[3].parse().unwrap(),
            )
        })
        .collect()
}

/// In the oscillatory range errors are measured against the modulus, since
/// plain relative error is undefined at the zeros.
fn scale(k: i32, x: f64, v: f64, j: f64, y: f64) -> f64 {
    if x > k as f64 {
        j.hypot(y)
    } else {
        v.abs()
    }
}

#[test]
fn j_matches_table() {
    let mut worst = 0.0f64;
    for (k, x, j, y) in table() {
        let err = (bessel_j(k, x) - j).abs() / scale(k, x, j, j, y).max(f64::MIN_POSITIVE);
        if j.abs() > 1e-290 {
            worst = worst.max(err);
            assert!(err <= 1e-12, "J_{k}({x}): err {err:e}");
        }
    }
    eprintln!("worst J error {worst:e}");
}

#[test]
fn y_matches_table() {
    let mut worst = 0.0f64;
    for (k, x, j, y) in table() {
        let err = (bessel_y(k, x).unwrap() - y).abs() / scale(k, x, y, j, y);
        worst = worst.max(err);
        assert!(err <= 1e-12, "Y_{k}({x}): err {err:e}");
    }
    eprintln!("worst Y error {worst:e}");
}

#[test]
fn y2_at_100() {
    let (_, _, _, y) = table()
        .into_iter()
        .find(|&(k, x, _, _)| k == 2 && x == 100.0)
        .unwrap();
    assert!((bessel_y(2, 100.0).unwrap() - y).abs() <= 1e-12 * y.abs());
}

#[test]
fn negative_orders_follow_reflection() {
    for (k, x, j, y) in table() {
        if k > 0 && k < 10 {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(bessel_j(-k, x), s * bessel_j(k, x));
            assert!((bessel_y(-k, x).unwrap() - s * y).abs() <= 1e-12 * scale(k, x, y, j, y));
        }
    }
}
