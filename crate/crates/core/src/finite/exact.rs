//! Definition-level computations in a finite group. These never consult the
//! generic drivers and serve as their oracle.

use std::collections::HashMap;

use super::endo::FiniteEndo;
use super::group::FiniteGroupTable;
use super::set::ElemSet;
use crate::spectrum::{OrderValue, Spectrum};

/// Splits the forward orbit of `g` into its preperiodic tail and its cycle.
pub fn orbit_decompose(phi: &FiniteEndo, g: usize) -> (Vec<usize>, Vec<usize>) {
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut path = Vec::new();
    let mut x = g;
    while !seen.contains_key(&x) {
        seen.insert(x, path.len());
        path.push(x);
        x = phi.apply(x);
    }
    let cycle = path.split_off(seen[&x]);
    (path, cycle)
}

/// Relative order of `g` in `K`: the first orbit position in `K`, or
/// `Infinite` when the tail and the cycle both avoid `K`.
pub fn phi_order_exact(phi: &FiniteEndo, g: usize, k: &ElemSet) -> OrderValue {
    let (tail, cycle) = orbit_decompose(phi, g);
    match tail.iter().chain(&cycle).position(|&x| k.contains(x)) {
        Some(i) => OrderValue::Finite(i as u64),
        None => OrderValue::Infinite,
    }
}

/// Relative order of every element, by peeling layers backwards from `K`:
/// `x ∉ K` has order `i` exactly when `xφ` has order `i − 1`.
pub fn order_table(phi: &FiniteEndo, k: &ElemSet) -> Vec<OrderValue> {
    let n = phi.order();
    let mut orders = vec![OrderValue::Infinite; n];
    let mut layer: Vec<usize> = k.iter().collect();
    for &x in &layer {
        orders[x] = OrderValue::Finite(0);
    }
    let mut depth = 0;
    while !layer.is_empty() {
        depth += 1;
        let in_layer = ElemSet::from_indices(n, layer.iter().copied()).expect("indices in range");
        layer = (0..n)
            .filter(|&x| orders[x] == OrderValue::Infinite && in_layer.contains(phi.apply(x)))
            .collect();
        for &x in &layer {
            orders[x] = OrderValue::Finite(depth);
        }
    }
    orders
}

/// The set of elements of relative order exactly `n`.
pub fn preorder_exact(phi: &FiniteEndo, n: u64, k: &ElemSet) -> ElemSet {
    let orders = order_table(phi, k);
    ElemSet::filter(phi.order(), |x| orders[x] == OrderValue::Finite(n))
}

/// Spectrum of `K`; always `Prefix` (or `Empty` for `K = ∅`).
pub fn spectrum_exact(phi: &FiniteEndo, k: &ElemSet) -> Spectrum {
    match order_table(phi, k).iter().filter_map(|o| o.finite()).max() {
        Some(m) => Spectrum::Prefix(m),
        None => Spectrum::Empty,
    }
}

/// `⋂_i Im(φ^i)`, reached when the image chain stops shrinking.
pub fn stable_image_exact(phi: &FiniteEndo) -> ElemSet {
    let mut s = ElemSet::full(phi.order());
    loop {
        let next = phi.image(&s);
        if next == s {
            return s;
        }
        s = next;
    }
}

/// Union of all cycles.
pub fn per_exact(phi: &FiniteEndo) -> ElemSet {
    let mut out = ElemSet::empty(phi.order());
    for g in 0..phi.order() {
        if out.contains(g) {
            continue;
        }
        for x in orbit_decompose(phi, g).1 {
            out.insert(x);
        }
    }
    out
}

/// The cosets of `Ker(φ^n)`, kernel first, then by least element.
pub fn kernel_cosets(group: &FiniteGroupTable, phi: &FiniteEndo, n: u64) -> Vec<ElemSet> {
    let kernel = phi.kernel_of_power(n);
    let order = group.order();
    let mut covered = ElemSet::empty(order);
    let mut out = Vec::new();
    for a in 0..order {
        if covered.contains(a) {
            continue;
        }
        let coset = ElemSet::from_indices(order, kernel.iter().map(|k| group.mul(a, k))).expect("in range");
        covered = covered.union(&coset);
        out.push(coset);
    }
    out
}

/// `Ker(φ^i) = ⋃_r a_r·Ker(φ^j)`.
fn covers_kernel(group: &FiniteGroupTable, phi: &FiniteEndo, i: u64, j: u64, reps: &[usize]) -> bool {
    let big = phi.kernel_of_power(i);
    let small = phi.kernel_of_power(j);
    let order = group.order();
    let union = ElemSet::from_indices(order, reps.iter().flat_map(|&a| small.iter().map(move |k| group.mul(a, k))))
        .expect("in range");
    union == big
}

/// `Ker(φ_j^{i−j}) = {a_r φ^j}` where `φ_j` is `φ` restricted to `Im(φ^j)`.
fn restricted_kernel_matches(phi: &FiniteEndo, i: u64, j: u64, reps: &[usize]) -> bool {
    let order = phi.order();
    let restricted = phi.image_of_power(j).intersection(&phi.kernel_of_power(i - j));
    let images = ElemSet::from_indices(order, reps.iter().map(|&a| phi.apply_pow(a, j))).expect("in range");
    restricted == images
}

/// Subsets of `Ker(φ^i)` of this size or less are enumerated exhaustively
/// by [`kernel_cover_check`].
const EXHAUSTIVE_SUBSET_KERNEL: usize = 12;

/// Checks, for `i ≥ j` and many families `a_1, …, a_n ∈ Ker(φ^i)`, that
/// `Ker(φ^i) = ⋃ a_r·Ker(φ^j)` holds exactly when
/// `Ker(φ_j^{i−j}) = {a_1φ^j, …, a_nφ^j}`.
///
/// Every subset is tried when the kernel has at most 12 elements; larger
/// kernels are probed with singletons, coset transversals and transversals
/// with one element dropped or duplicated. Returns `false` on the first
/// disagreement, and also when `i < j`.
pub fn kernel_cover_check(group: &FiniteGroupTable, phi: &FiniteEndo, i: u64, j: u64) -> bool {
    if i < j {
        return false;
    }
    let kernel: Vec<usize> = phi.kernel_of_power(i).iter().collect();
    let agree = |reps: &[usize]| covers_kernel(group, phi, i, j, reps) == restricted_kernel_matches(phi, i, j, reps);
    if kernel.len() <= EXHAUSTIVE_SUBSET_KERNEL {
        for mask in 0u32..(1 << kernel.len()) {
            let reps: Vec<usize> = (0..kernel.len()).filter(|b| mask >> b & 1 == 1).map(|b| kernel[b]).collect();
            if !agree(&reps) {
                return false;
            }
        }
        return true;
    }
    let small = phi.kernel_of_power(j);
    let mut transversal = Vec::new();
    let mut covered = ElemSet::empty(group.order());
    for &a in &kernel {
        if !covered.contains(a) {
            transversal.push(a);
            for k in small.iter() {
                covered.insert(group.mul(a, k));
            }
        }
    }
    let mut families: Vec<Vec<usize>> = kernel.iter().map(|&a| vec![a]).collect();
    families.push(transversal.clone());
    families.push(kernel.clone());
    for drop in 0..transversal.len() {
        let mut f = transversal.clone();
        f.remove(drop);
        families.push(f);
    }
    for &a in &kernel {
        let mut f = transversal.clone();
        f.push(a);
        families.push(f);
    }
    families.iter().all(|f| agree(f))
}

/// `φ` restricted to `Im(φ^k)` is injective, checked pointwise.
pub fn restriction_injective_exact(phi: &FiniteEndo, k: u64) -> bool {
    let image = phi.image_of_power(k);
    phi.image(&image).len() == image.len()
}

/// Checks that injectivity of `φ` on `Im(φ^k)` is equivalent to
/// `Ker(φ^k) = Ker(φ^{k+1})` and to `Ker(φ^k) = Ker(φ^i)` for every
/// `i` in `k+1..=k+order`.
pub fn kernel_stabilization_check(phi: &FiniteEndo, k: u64) -> bool {
    let injective = restriction_injective_exact(phi, k);
    let base = phi.kernel_of_power(k);
    let next_equal = phi.kernel_of_power(k + 1) == base;
    let all_equal = (k + 1..=k + phi.order() as u64).all(|i| phi.kernel_of_power(i) == base);
    injective == next_equal && injective == all_equal
}

/// All tails `(x_{-len+1}, …, x_0)` with `x_0 ∈ K`, for bijective `φ`: the
/// backward orbit of each end point is unique.
pub fn tails_ending_in(phi: &FiniteEndo, k: &ElemSet, len: usize) -> Vec<Vec<usize>> {
    let n = phi.order();
    let mut inverse = vec![usize::MAX; n];
    for x in 0..n {
        inverse[phi.apply(x)] = x;
    }
    k.iter()
        .map(|end| {
            let mut t = vec![end];
            while t.len() < len {
                let prev = inverse[*t.last().unwrap()];
                t.push(prev);
            }
            t.reverse();
            t
        })
        .collect()
}
