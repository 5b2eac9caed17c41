//! Strictly increasing multi-indices in lexicographic order.
//!
//! Ranks use the combinatorial number system: a multi-index `c_0 < ... < c_{p-1}`
//! drawn from `0..n` has lexicographic rank
//! `C(n, p) - 1 - Σ_j C(n - 1 - c_j, p - j)`.

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Lexicographic rank of a strictly increasing multi-index.
///
/// The caller guarantees that `indices` is strictly increasing and bounded by `n`.
pub fn rank(n: usize, indices: &[usize]) -> usize {
    let p = indices.len();
    let mut acc = binomial(n, p) - 1;
    for (j, &c) in indices.iter().enumerate() {
        acc -= binomial(n - 1 - c, p - j);
    }
    acc
}

/// Inverse of [`rank`]: the multi-index of length `p` at position `r`.
pub fn unrank(n: usize, p: usize, r: usize) -> Vec<usize> {
    debug_assert!(r < binomial(n, p));
    let mut remaining = binomial(n, p) - 1 - r;
    let mut out = Vec::with_capacity(p);
    // greedy combinadic decomposition, digits strictly decreasing
    let mut upper = n;
    for j in 0..p {
        let k = p - j;
        let mut d = upper - 1;
        while binomial(d, k) > remaining {
            d -= 1;
        }
        remaining -= binomial(d, k);
        out.push(n - 1 - d);
        upper = d;
    }
    out
}

/// All multi-indices of length `p` from `0..n`, lexicographically.
pub fn all(n: usize, p: usize) -> Vec<Vec<usize>> {
    let count = binomial(n, p);
    let mut out = Vec::with_capacity(count);
    if p > n {
        return out;
    }
    let mut current: Vec<usize> = (0..p).collect();
    loop {
        out.push(current.clone());
        // advance to the next combination
        let mut i = p;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < n - p + i {
                current[i] += 1;
                for j in i + 1..p {
                    current[j] = current[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Sorts `indices` in place and returns the sign of the sorting permutation,
/// or `None` when an index repeats.
pub fn sort_with_sign(indices: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    // insertion sort: few elements, and every swap flips the sign
    for i in 1..indices.len() {
        let mut j = i;
        while j > 0 && indices[j - 1] > indices[j] {
            indices.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if indices.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// Complement of a sorted multi-index within `0..n`, sorted.
pub fn complement(n: usize, indices: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| !indices.contains(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(10, 5), 252);
    }

    #[test]
    fn rank_matches_enumeration_order() {
        for n in 1..=9 {
            for p in 0..=n {
                for (r, idx) in all(n, p).iter().enumerate() {
                    assert_eq!(rank(n, idx), r, "n={n} p={p} idx={idx:?}");
                    assert_eq!(&unrank(n, p, r), idx);
                }
                assert_eq!(all(n, p).len(), binomial(n, p));
            }
        }
    }

    #[test]
    fn sorting_sign() {
        let mut a = [2, 0, 1];
        assert_eq!(sort_with_sign(&mut a), Some(1.0));
        assert_eq!(a, [0, 1, 2]);
        let mut b = [1, 0];
        assert_eq!(sort_with_sign(&mut b), Some(-1.0));
        let mut c = [1, 0, 1];
        assert_eq!(sort_with_sign(&mut c), None);
    }
}
