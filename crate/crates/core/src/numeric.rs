//! Small numeric helpers shared across modules.

/// Sum `values` in a canonical (value-sorted) order.
///
/// The result depends only on the multiset of summands, so reductions built
/// on this are bitwise invariant under permutations of the input. The slice
/// is reordered in place.
pub(crate) fn canonical_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

/// Argsort of `n` rows under lexicographic order, where `coord(i, k)` yields
/// the `k`-th of `width` coordinates of row `i`.
///
/// Summing rows in this order makes row-wise reductions bitwise invariant
/// under permutations of the rows (ties are exact duplicates, which commute).
pub(crate) fn canonical_row_order<F>(n: usize, width: usize, coord: F) -> Vec<usize>
where
    F: Fn(usize, usize) -> f64,
{
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| {
        for k in 0..width {
            let c = coord(a, k).total_cmp(&coord(b, k));
            if c != std::cmp::Ordering::Equal {
                return c;
            }
        }
        std::cmp::Ordering::Equal
    });
    order
}

/// 0-based index of the empirical `q`-quantile among `b` sorted draws,
/// using the order statistic at position ⌈q·b⌉ (type-1, 1-based).
pub(crate) fn quantile_index(q: f64, b: usize) -> usize {
    let pos = (q * b as f64).ceil() as usize;
    pos.clamp(1, b) - 1
}
