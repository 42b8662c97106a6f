//! Partitions and the sets `Z_{M,N} = {z ∈ Z^n : Σ max(0, z_i) = M,
//! Σ min(0, z_i) = −N}`.

use std::f64::consts::PI;

/// Partitions of `m` into exactly `k` positive parts.
pub fn partition_count(k: usize, m: usize) -> u128 {
    if k == 0 {
        return u128::from(m == 0);
    }
    if m < k {
        return 0;
    }
    // table[j][s] = p(j, s) for j ≤ k, s ≤ m
    let mut table = vec![vec![0u128; m + 1]; k + 1];
    table[0][0] = 1;
    for j in 1..=k {
        for s in j..=m {
            table[j][s] = table[j - 1][s - 1] + table[j][s - j];
        }
    }
    table[k][m]
}

/// `p(k, M) · 2πM / (e^{2k} (M/k²)^k)`.
pub fn knessl_keller_ratio(k: usize, m: usize) -> f64 {
    let (kf, mf) = (k as f64, m as f64);
    let asym = (2.0 * kf).exp() * (mf / (kf * kf)).powf(kf) / (2.0 * PI * mf);
    partition_count(k, m) as f64 / asym
}

/// `#Z_{M,N}` by scanning the box `[−N, M]^n`.
pub fn z_count(n: usize, m: u64, neg: u64) -> u64 {
    scan(n, -(neg as i64), m as i64, m, neg)
}

/// `#(Z_{M,N} ∩ [−W, W]^n)`.
pub fn z_count_in_box(n: usize, m: u64, neg: u64, w: u64) -> u64 {
    let w = w as i64;
    scan(n, (-(neg as i64)).max(-w), (m as i64).min(w), m, neg)
}

fn scan(n: usize, lo: i64, hi: i64, m: u64, neg: u64) -> u64 {
    assert!(n >= 1, "dimension must be positive");
    if lo > hi {
        return 0;
    }
    let mut z = vec![lo; n];
    let mut count = 0;
    loop {
        let pos: i64 = z.iter().map(|&v| v.max(0)).sum();
        let nsum: i64 = z.iter().map(|&v| v.min(0)).sum();
        if pos == m as i64 && nsum == -(neg as i64) {
            count += 1;
        }
        let mut k = n;
        loop {
            if k == 0 {
                return count;
            }
            k -= 1;
            if z[k] < hi {
                z[k] += 1;
                for v in z.iter_mut().skip(k + 1) {
                    *v = lo;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_examples() {
        assert_eq!(partition_count(2, 5), 2);
        for m in 1..30 {
            assert_eq!(partition_count(1, m), 1);
        }
        assert_eq!(partition_count(0, 0), 1);
        assert_eq!(partition_count(3, 2), 0);
        // p(3, M) is the integer nearest M²/12
        assert_eq!(partition_count(3, 200), 3333);
        let r = knessl_keller_ratio(3, 200);
        assert!((r - 1.0).abs() < 0.25, "{r}");
    }

    #[test]
    fn z_examples() {
        assert_eq!(z_count(2, 1, 1), 2);
        assert_eq!(z_count(2, 2, 0), 3);
        assert_eq!(z_count(3, 0, 0), 1);
        assert_eq!(z_count_in_box(2, 2, 0, 1), 1);
    }

    #[test]
    fn box_decomposition() {
        for n in 1..=3usize {
            for w in 0..=4u64 {
                let mut total = 0;
                for m in 0..=(n as u64 * w) {
                    for neg in 0..=(n as u64 * w) {
                        total += z_count_in_box(n, m, neg, w);
                    }
                }
                assert_eq!(total, (2 * w + 1).pow(n as u32));
            }
        }
    }
}
