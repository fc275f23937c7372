//! Sample statistics used to check dependence in simulated data.

/// Sample Kendall tau-b in `O(n log n)` (Knight's merge-sort algorithm).
///
/// Returns `NaN` when either input is constant.
pub fn kendall_tau_sample(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "kendall_tau_sample: length mismatch");
    let n = x.len();
    if n < 2 {
        return f64::NAN;
    }
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let pairs_of = |t: u64| t * t.saturating_sub(1) / 2;
    let n0 = pairs_of(n as u64);

    // ties in x, and joint ties in (x, y)
    let (mut tie_x, mut tie_xy) = (0u64, 0u64);
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for i in 1..n {
        if pairs[i].0 == pairs[i - 1].0 {
            run_x += 1;
            if pairs[i].1 == pairs[i - 1].1 {
                run_xy += 1;
            } else {
                tie_xy += pairs_of(run_xy);
                run_xy = 1;
            }
        } else {
            tie_x += pairs_of(run_x);
            tie_xy += pairs_of(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    tie_x += pairs_of(run_x);
    tie_xy += pairs_of(run_xy);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut tie_y = 0u64;
    let mut run_y = 1u64;
    for i in 1..n {
        if ys[i] == ys[i - 1] {
            run_y += 1;
        } else {
            tie_y += pairs_of(run_y);
            run_y = 1;
        }
    }
    tie_y += pairs_of(run_y);

    let numer = n0 as f64 - tie_x as f64 - tie_y as f64 + tie_xy as f64 - 2.0 * swaps as f64;
    let denom = ((n0 - tie_x) as f64 * (n0 - tie_y) as f64).sqrt();
    numer / denom
}

/// Sorts `v` ascending, returning the number of inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (left, right) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(left, bl) + merge_count(right, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tau_brute(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let (mut conc, mut disc, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
        for i in 0..n {
            for j in i + 1..n {
                let dx = (x[i] - x[j]).signum() * ((x[i] != x[j]) as i32 as f64);
                let dy = (y[i] - y[j]).signum() * ((y[i] != y[j]) as i32 as f64);
                let s = dx * dy;
                if s > 0.0 {
                    conc += 1;
                } else if s < 0.0 {
                    disc += 1;
                } else {
                    if dx == 0.0 && dy != 0.0 {
                        tx += 1;
                    }
                    if dy == 0.0 && dx != 0.0 {
                        ty += 1;
                    }
                }
            }
        }
        (conc - disc) as f64 / (((conc + disc + tx) * (conc + disc + ty)) as f64).sqrt()
    }

    #[test]
    fn perfect_agreement_and_reversal() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(kendall_tau_sample(&x, &x), 1.0);
        let y = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(kendall_tau_sample(&x, &y), -1.0);
    }

    proptest! {
        #[test]
        fn matches_quadratic_count(data in prop::collection::vec((0u8..6, 0u8..6), 3..40)) {
            let x: Vec<f64> = data.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = data.iter().map(|p| p.1 as f64).collect();
            let fast = kendall_tau_sample(&x, &y);
            let slow = tau_brute(&x, &y);
            prop_assert!((fast.is_nan() && slow.is_nan()) || (fast - slow).abs() < 1e-12);
        }
    }
}
