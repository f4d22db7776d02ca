//! Bessel functions of the first kind for integer order.

/// `J_0(x), …, J_nmax(x)` by Miller's downward recurrence, normalized with
/// `J_0 + 2 Σ J_2k = 1`.
pub fn bessel_j_all(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    // Start far enough above both nmax and |x| that the seed error has
    // decayed below double precision.
    let mut start = nmax.max(ax as usize) + 30 + (ax.sqrt() * 10.0) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / ax * cur - next;
        next = cur;
        cur = prev;
        // cur is now J_{k-1}
        if k - 1 <= nmax {
            out[k - 1] = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += cur;
    for (n, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

pub fn bessel_j(n: i64, x: f64) -> f64 {
    let v = bessel_j_all(n.unsigned_abs() as usize, x)[n.unsigned_abs() as usize];
    if n < 0 && n % 2 != 0 {
        -v
    } else {
        v
    }
}

/// Power series `Σ (−1)^m (x/2)^(2m+n) / (m!(m+n)!)`, accurate for small |x|.
pub fn bessel_j_series(n: usize, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    for m in 1..200 {
        term *= -half * half / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        // Abramowitz & Stegun, Table 9.1
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-14);
        assert!((bessel_j(2, 5.0) - 0.046_565_116_277_752_2).abs() < 1e-13);
        assert!((bessel_j(0, 2.404_825_557_695_773).abs()) < 1e-14);
    }

    #[test]
    fn recurrence_matches_series() {
        for &x in &[0.01, 0.2, 1.0, 2.0, 5.0] {
            let all = bessel_j_all(12, x);
            for (n, v) in all.iter().enumerate() {
                let s = bessel_j_series(n, x);
                assert!((v - s).abs() < 1e-12, "n={n} x={x}: {v} vs {s}");
            }
        }
    }

    #[test]
    fn symmetry_relations() {
        assert_eq!(bessel_j(-3, 1.5), -bessel_j(3, 1.5));
        assert_eq!(bessel_j(-2, 1.5), bessel_j(2, 1.5));
        assert!((bessel_j(3, -1.5) + bessel_j(3, 1.5)).abs() < 1e-16);
    }

    #[test]
    fn zero_argument() {
        let v = bessel_j_all(4, 0.0);
        assert_eq!(v, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }
}
