//! Lower bounds on parallel QR depth.

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

fn ceil_log2(n: usize) -> usize {
    (usize::BITS - (n.max(1) - 1).leading_zeros()) as usize
}

fn tail_rule(m: usize, k: usize) -> usize {
    if m < 2 {
        ceil_div(m, k)
    } else {
        ceil_div(m - 2, k) + 2
    }
}

/// Reported lower bound for `m` rotations on `d` levels at width `k`.
///
/// Budgets up to 3 use the tail rule: two rotations are forced to be alone in
/// the final two steps and the rest pack `k` per step. Wider budgets use the
/// dense-graph bound `L + 2(d − 1 − L)` with `L = ⌈log₂ d⌉`.
pub fn lower_bound(d: usize, m: usize, k: usize) -> usize {
    let k = k.max(1);
    if k <= 3 {
        tail_rule(m, k)
    } else {
        let l = ceil_log2(d);
        l + 2 * (d - 1).saturating_sub(l)
    }
}

/// `max(⌈m/k⌉, tail rule)`, a plain counting bound valid at every budget.
pub fn counting_bound(m: usize, k: usize) -> usize {
    let k = k.max(1);
    ceil_div(m, k).max(tail_rule(m, k))
}
