//! Small enumeration helpers shared by the density and removal code.

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `n (n-1) ... (n-k+1)`.
pub(crate) fn falling(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).map(|i| (n - i) as u128).product()
}

pub(crate) fn factorial(n: usize) -> u128 {
    falling(n, n)
}

/// Calls `f` on every `k`-subset of `[n]` (sorted, 1-based) in
/// colexicographic order; stops early when `f` returns `false`.
pub(crate) fn for_each_subset_colex(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut c: Vec<usize> = (1..=k).collect();
    loop {
        if !f(&c) {
            return;
        }
        // Find the lowest position that can be advanced without colliding
        // with its right neighbour.
        let mut i = 0;
        while i < k {
            let limit = if i + 1 < k { c[i + 1] } else { n + 1 };
            if c[i] + 1 < limit {
                break;
            }
            i += 1;
        }
        if i == k {
            return;
        }
        c[i] += 1;
        for (j, slot) in c.iter_mut().enumerate().take(i) {
            *slot = j + 1;
        }
    }
}

/// Calls `f` on every tuple in `[n]^k` in lexicographic order.
pub(crate) fn for_each_tuple(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > 0 && n == 0 {
        return;
    }
    let mut c = vec![1usize; k];
    loop {
        if !f(&c) {
            return;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if c[i] < n {
                c[i] += 1;
                for slot in &mut c[i + 1..] {
                    *slot = 1;
                }
                break;
            }
        }
    }
}

/// Calls `f` on every tuple of `[n]^k` with pairwise distinct entries, in
/// lexicographic order.
pub(crate) fn for_each_injection(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    fn rec(
        n: usize,
        k: usize,
        cur: &mut Vec<usize>,
        used: &mut [bool],
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for v in 1..=n {
            if used[v] {
                continue;
            }
            used[v] = true;
            cur.push(v);
            let go = rec(n, k, cur, used, f);
            cur.pop();
            used[v] = false;
            if !go {
                return false;
            }
        }
        true
    }
    if k > n {
        return;
    }
    let mut used = vec![false; n + 1];
    rec(n, k, &mut Vec::with_capacity(k), &mut used, &mut f);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colex_order_and_count() {
        let mut seen = Vec::new();
        for_each_subset_colex(4, 2, |s| {
            seen.push(s.to_vec());
            true
        });
        assert_eq!(
            seen,
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![2, 3],
                vec![1, 4],
                vec![2, 4],
                vec![3, 4]
            ]
        );
        let mut count = 0;
        for_each_subset_colex(7, 3, |_| {
            count += 1;
            true
        });
        assert_eq!(count, binomial(7, 3));
        let mut empty = 0;
        for_each_subset_colex(3, 0, |s| {
            assert!(s.is_empty());
            empty += 1;
            true
        });
        assert_eq!(empty, 1);
    }

    #[test]
    fn tuple_and_injection_counts() {
        let mut all = 0;
        for_each_tuple(3, 3, |_| {
            all += 1;
            true
        });
        assert_eq!(all, 27);
        let mut inj = 0;
        for_each_injection(5, 3, |t| {
            assert!(t[0] != t[1] && t[1] != t[2] && t[0] != t[2]);
            inj += 1;
            true
        });
        assert_eq!(inj as u128, falling(5, 3));
        let mut none = 0;
        for_each_tuple(0, 2, |_| {
            none += 1;
            true
        });
        assert_eq!(none, 0);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(20, 3), 1140);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(factorial(5), 120);
    }
}
