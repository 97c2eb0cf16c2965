//! Small combinatorial enumerators shared by the exhaustive checks.

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every subset of `items` (as a bitmask expansion), smallest masks first.
pub fn power_set(items: &[usize]) -> Vec<Vec<usize>> {
    assert!(items.len() < 31, "power set too large");
    (0u32..(1u32 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

/// Disjoint sign patterns `(S+, S-)` over `0..n` with `min_size <= |S+ u S-| <= max_size`,
/// ordered by support size, then support, then sign assignment.
pub fn sign_patterns(n: usize, min_size: usize, max_size: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for s in min_size..=max_size.min(n) {
        for support in combinations(n, s) {
            for mask in 0u32..(1u32 << s) {
                let mut plus = Vec::new();
                let mut minus = Vec::new();
                for (b, &j) in support.iter().enumerate() {
                    if mask >> b & 1 == 0 {
                        plus.push(j);
                    } else {
                        minus.push(j);
                    }
                }
                out.push((plus, minus));
            }
        }
    }
    out
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
        assert_eq!(binomial(22, 10), 646_646);
    }

    #[test]
    fn patterns() {
        // 4 columns, size 1: 8 signed singletons.
        assert_eq!(sign_patterns(4, 1, 1).len(), 8);
        assert_eq!(sign_patterns(2, 0, 2).len(), 1 + 4 + 4);
        assert_eq!(power_set(&[3, 5]).len(), 4);
    }
}
