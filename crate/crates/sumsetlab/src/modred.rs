//! Modular reduction: layering integer sets by residue multiplicity and the
//! resulting lower bounds on `|A+B|`.
//!
//! For a modulus n, layer i of a set holds the residues hit by at least i+1
//! elements. The layered sumset has layers `C_k = U_{i+j=k} (A_i + B_j)`, and
//! per-coset surpluses `delta_z` sharpen `|A+B| >= |A~+B~|` into the bound
//! computed by [`delta_bound`]. [`corollary_bound`] is the specialization to
//! `min B = 0`, `n = max B`.

use serde::{Deserialize, Serialize};

use crate::cyclic::{c_sumset, c_sumset_unchecked, quotient, CyclicSet, Subgroup};
use crate::error::{Error, Result};
use crate::intset::IntSet;

/// The layered reduction of an integer set mod n: a descending chain of
/// residue sets whose sizes sum to the cardinality of the source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredSet {
    modulus: u32,
    layers: Vec<CyclicSet>,
}

impl LayeredSet {
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn layers(&self) -> &[CyclicSet] {
        &self.layers
    }

    /// Index of the last (deepest) nonempty layer.
    pub fn top(&self) -> usize {
        self.layers.len() - 1
    }

    /// Layer `i`, empty beyond the top.
    pub fn layer(&self, i: usize) -> CyclicSet {
        self.layers
            .get(i)
            .cloned()
            .unwrap_or_else(|| CyclicSet::empty(self.modulus))
    }

    /// Total cardinality across layers.
    pub fn total_len(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    fn assert_chain(&self) {
        debug_assert!(!self.layers.is_empty());
        debug_assert!(!self.layers.last().unwrap().is_empty());
        for w in self.layers.windows(2) {
            debug_assert!(w[1].is_subset_of(&w[0]), "layers must descend");
        }
    }
}

/// Builds the layered reduction of `a` mod `n`; layer 0 is the residue image.
pub fn layered(a: &IntSet, n: u32) -> Result<LayeredSet> {
    if n < 2 {
        return Err(Error::invalid(format!("modulus {n} must be at least 2")));
    }
    let mut counts = vec![0usize; n as usize];
    for x in a.iter() {
        counts[x.rem_euclid(n as i64) as usize] += 1;
    }
    let depth = *counts.iter().max().unwrap();
    let mut layers = Vec::with_capacity(depth);
    for i in 0..depth {
        layers.push(CyclicSet::from_iter_mod(
            n,
            counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > i)
                .map(|(r, _)| r as u32),
        ));
    }
    let out = LayeredSet { modulus: n, layers };
    out.assert_chain();
    Ok(out)
}

/// Layered sumset: layer k is the union of `A_i + B_j` over `i + j = k`.
pub fn layered_sumset(at: &LayeredSet, bt: &LayeredSet) -> Result<LayeredSet> {
    if at.modulus != bt.modulus {
        return Err(Error::ModulusMismatch(at.modulus, bt.modulus));
    }
    let (ta, tb) = (at.top(), bt.top());
    let mut layers = Vec::with_capacity(ta + tb + 1);
    for k in 0..=(ta + tb) {
        let mut acc = CyclicSet::empty(at.modulus);
        for i in k.saturating_sub(tb)..=k.min(ta) {
            acc = acc.union(&c_sumset_unchecked(&at.layers[i], &bt.layers[k - i]));
        }
        layers.push(acc);
    }
    let out = LayeredSet {
        modulus: at.modulus,
        layers,
    };
    out.assert_chain();
    Ok(out)
}

/// Per-coset accounting behind the layered lower bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CosetDelta {
    pub coset: u32,
    /// Deepest layer containing the whole coset, -1 if none does.
    pub k: i64,
    pub delta: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaReport {
    pub subgroup: Subgroup,
    pub cosets: Vec<CosetDelta>,
}

impl DeltaReport {
    pub fn delta_total(&self) -> i64 {
        self.cosets.iter().map(|c| c.delta).sum()
    }
}

/// The cosets of `h`, indexed by representative `0..coset_count`.
pub(crate) fn coset_table(h: &Subgroup) -> Vec<CyclicSet> {
    let base = h.to_set();
    (0..h.coset_count()).map(|z| base.rotate(z)).collect()
}

/// `counts[layer][coset] = |layer ∩ coset|`.
fn layer_coset_counts(ls: &LayeredSet, cosets: &[CyclicSet]) -> Vec<Vec<i64>> {
    ls.layers
        .iter()
        .map(|layer| {
            cosets
                .iter()
                .map(|c| layer.intersection_len(c) as i64)
                .collect()
        })
        .collect()
}

/// `k_z` and `delta_z` for one coset. `delta_z` maxes the per-pair surplus
/// `|(x+H) ∩ A_i| + |(y+H) ∩ B_j| - 1 - |H| - |(z+H) ∩ C_{k_z+1}|` over
/// `i + j = k_z` and `x + y = z`, guarded below by 0; an empty family
/// (`k_z = -1`, or `k_z` at the top layer with nothing above) contributes 0.
fn coset_delta(
    a_counts: &[Vec<i64>],
    b_counts: &[Vec<i64>],
    ct: &LayeredSet,
    order: i64,
    g: u32,
    cosets: &[CyclicSet],
    z: u32,
) -> CosetDelta {
    let coset = &cosets[z as usize];
    let mut kz: i64 = -1;
    for (k, layer) in ct.layers.iter().enumerate() {
        if coset.is_subset_of(layer) {
            kz = k as i64;
        } else {
            break;
        }
    }
    let mut delta: i64 = 0;
    if kz >= 0 {
        let k = kz as usize;
        let spill = match ct.layers.get(k + 1) {
            Some(next) => coset.intersection_len(next) as i64,
            None => 0,
        };
        let (ta, tb) = (a_counts.len() - 1, b_counts.len() - 1);
        for i in k.saturating_sub(tb)..=k.min(ta) {
            let ai = &a_counts[i];
            let bj = &b_counts[k - i];
            for x in 0..g {
                let y = (z + g - x) % g;
                delta = delta.max(ai[x as usize] + bj[y as usize] - 1 - order - spill);
            }
        }
    }
    CosetDelta {
        coset: z,
        k: kz,
        delta,
    }
}

fn check_moduli(at: &LayeredSet, bt: &LayeredSet, ct: &LayeredSet, h: &Subgroup) -> Result<()> {
    let n = at.modulus;
    if bt.modulus != n || ct.modulus != n {
        return Err(Error::ModulusMismatch(n, bt.modulus.min(ct.modulus)));
    }
    if h.modulus() != n {
        return Err(Error::ModulusMismatch(n, h.modulus()));
    }
    Ok(())
}

/// Computes `k_z` and `delta_z` for every coset of `h` from already-built
/// layered sets and their layered sumset.
pub fn delta_report(
    at: &LayeredSet,
    bt: &LayeredSet,
    ct: &LayeredSet,
    h: &Subgroup,
) -> Result<DeltaReport> {
    check_moduli(at, bt, ct, h)?;
    let cosets = coset_table(h);
    Ok(DeltaReport {
        subgroup: *h,
        cosets: delta_cosets_with(at, bt, ct, h, &cosets),
    })
}

fn delta_cosets_with(
    at: &LayeredSet,
    bt: &LayeredSet,
    ct: &LayeredSet,
    h: &Subgroup,
    cosets: &[CyclicSet],
) -> Vec<CosetDelta> {
    let g = h.coset_count();
    let order = h.order() as i64;
    let a_counts = layer_coset_counts(at, cosets);
    let b_counts = layer_coset_counts(bt, cosets);
    (0..g)
        .map(|z| coset_delta(&a_counts, &b_counts, ct, order, g, cosets, z))
        .collect()
}

/// Total surplus over all cosets, with the coset table supplied by the
/// caller; the fast path for sweeps that reuse tables across many pairs.
pub(crate) fn delta_total_with(
    at: &LayeredSet,
    bt: &LayeredSet,
    ct: &LayeredSet,
    h: &Subgroup,
    cosets: &[CyclicSet],
) -> i64 {
    let g = h.coset_count();
    let order = h.order() as i64;
    let a_counts = layer_coset_counts(at, cosets);
    let b_counts = layer_coset_counts(bt, cosets);
    (0..g)
        .map(|z| coset_delta(&a_counts, &b_counts, ct, order, g, cosets, z).delta)
        .sum()
}

/// The layered lower bound on `|A+B|` at modulus n and subgroup H.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaBound {
    pub layered_sum_size: i64,
    pub delta_total: i64,
    pub bound: i64,
    pub report: DeltaReport,
}

/// `|A~+B~| + sum_z delta_z`, guaranteed at most `|A+B|`.
pub fn delta_bound(a: &IntSet, b: &IntSet, n: u32, h: &Subgroup) -> Result<DeltaBound> {
    let at = layered(a, n)?;
    let bt = layered(b, n)?;
    let ct = layered_sumset(&at, &bt)?;
    let report = delta_report(&at, &bt, &ct, h)?;
    let layered_sum_size = ct.total_len() as i64;
    let delta_total = report.delta_total();
    Ok(DeltaBound {
        layered_sum_size,
        delta_total,
        bound: layered_sum_size + delta_total,
        report,
    })
}

/// The specialized lower bound with `min B = 0`, `n = max B`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorollaryBound {
    pub n: u32,
    pub a0_b0_size: i64,
    pub a_size: i64,
    /// `(coset, delta'_z)` for the cosets outside the image of `A_0`.
    pub outside: Vec<(u32, i64)>,
    pub bound: i64,
}

/// `|A_0+B_0| + |A| + sum over cosets missing A_0 of delta'_z`. The modulus is
/// derived from B: requires `min B = 0` and `max B >= 2`, and `h` must be a
/// subgroup of Z/(max B)Z.
pub fn corollary_bound(a: &IntSet, b: &IntSet, h: &Subgroup) -> Result<CorollaryBound> {
    if b.min() != 0 {
        return Err(Error::invalid(format!(
            "min B must be 0, found {}",
            b.min()
        )));
    }
    if b.max() < 2 {
        return Err(Error::invalid(format!(
            "max B must be at least 2, found {}",
            b.max()
        )));
    }
    let n = b.max() as u32;
    if h.modulus() != n {
        return Err(Error::ModulusMismatch(n, h.modulus()));
    }
    let a0 = CyclicSet::from_iter_mod(n, a.iter().map(|x| x.rem_euclid(n as i64) as u32));
    let b0 = CyclicSet::from_iter_mod(n, b.iter().map(|x| x.rem_euclid(n as i64) as u32));
    debug_assert_eq!(b0.len(), b.len() - 1);
    let a0_b0_size = c_sumset(&a0, &b0)?.len() as i64;
    let outside = corollary_outside_with(&a0, &b0, h, &coset_table(h))?;
    let delta_total: i64 = outside.iter().map(|(_, d)| d).sum();
    let a_size = a.len() as i64;
    Ok(CorollaryBound {
        n,
        a0_b0_size,
        a_size,
        outside,
        bound: a0_b0_size + a_size + delta_total,
    })
}

/// `(coset, delta'_z)` for every coset of `h` outside the image of `A_0`,
/// where `delta'_z` maxes `|(x+H) ∩ A_0| + |(y+H) ∩ B_0| - 1 - |H|` over
/// `x + y = z`, guarded below by 0.
pub(crate) fn corollary_outside_with(
    a0: &CyclicSet,
    b0: &CyclicSet,
    h: &Subgroup,
    cosets: &[CyclicSet],
) -> Result<Vec<(u32, i64)>> {
    let g = h.coset_count();
    let order = h.order() as i64;
    let image = quotient(a0, h)?;
    let a_counts: Vec<i64> = cosets.iter().map(|c| a0.intersection_len(c) as i64).collect();
    let b_counts: Vec<i64> = cosets.iter().map(|c| b0.intersection_len(c) as i64).collect();
    let mut outside = Vec::new();
    for z in 0..g {
        if image.contains(z) {
            continue;
        }
        let mut delta: i64 = 0;
        for x in 0..g {
            let y = (z + g - x) % g;
            delta = delta.max(a_counts[x as usize] + b_counts[y as usize] - 1 - order);
        }
        outside.push((z, delta));
    }
    Ok(outside)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intset::doubling_r;

    fn set(e: &[i64]) -> IntSet {
        IntSet::from_elements(e.iter().copied()).unwrap()
    }

    fn cs(n: u32, m: &[u32]) -> CyclicSet {
        CyclicSet::from_members(n, m.iter().copied()).unwrap()
    }

    #[test]
    fn layered_examples() {
        let l = layered(&set(&[0, 1, 2]), 3).unwrap();
        assert_eq!(l.layers(), &[CyclicSet::full(3)]);

        let l = layered(&set(&[0, 1, 3]), 3).unwrap();
        assert_eq!(l.layers(), &[cs(3, &[0, 1]), cs(3, &[0])]);

        let l = layered(&set(&[0, 3, 6]), 3).unwrap();
        assert_eq!(l.layers(), &[cs(3, &[0]), cs(3, &[0]), cs(3, &[0])]);

        assert!(layered(&set(&[0, 1]), 1).is_err());
    }

    #[test]
    fn layered_conserves_mass() {
        for n in 2..=9 {
            for a in [
                set(&[0, 1, 3, 8, 12]),
                set(&[-4, 0, 2, 2 + 7, 2 + 14]),
                set(&[5]),
            ] {
                assert_eq!(layered(&a, n).unwrap().total_len(), a.len());
            }
        }
    }

    #[test]
    fn layered_sumset_example() {
        let at = layered(&set(&[0, 1, 2]), 3).unwrap();
        let bt = layered(&set(&[0, 1, 3]), 3).unwrap();
        let ct = layered_sumset(&at, &bt).unwrap();
        assert_eq!(ct.layers(), &[CyclicSet::full(3), CyclicSet::full(3)]);
        assert_eq!(ct.total_len(), 6);

        let sa = layered(&set(&[5]), 3).unwrap();
        let sb = layered(&set(&[7]), 3).unwrap();
        let sc = layered_sumset(&sa, &sb).unwrap();
        assert_eq!(sc.layers(), &[cs(3, &[0])]);
    }

    #[test]
    fn layered_sumset_faithful_for_large_modulus() {
        let a = set(&[0, 2, 4, 5, 6]);
        let b = set(&[0, 1, 7]);
        let sum = a.sumset(&b).unwrap();
        let n = sum.diameter() as u32 + 1;
        let ct = layered_sumset(&layered(&a, n).unwrap(), &layered(&b, n).unwrap()).unwrap();
        assert_eq!(ct.total_len(), sum.len());
    }

    #[test]
    fn delta_bound_examples() {
        let a = set(&[0, 1, 2]);
        let b = set(&[0, 1, 3]);
        let d = delta_bound(&a, &b, 3, &Subgroup::trivial(3)).unwrap();
        assert_eq!(d.layered_sum_size, 6);
        assert_eq!(d.delta_total, 0);
        assert_eq!(d.bound, 6);
        assert_eq!(a.sumset(&b).unwrap().len(), 6);

        let one = IntSet::singleton(0);
        let d = delta_bound(&one, &one, 2, &Subgroup::trivial(2)).unwrap();
        assert_eq!(d.bound, 1);
    }

    #[test]
    fn delta_bound_never_exceeds_truth_small_sweep() {
        let sets = [
            set(&[0, 1, 2, 5]),
            set(&[0, 2, 4, 5, 6]),
            set(&[0, 3, 7]),
            set(&[0, 1]),
            set(&[0, 4, 8, 9]),
        ];
        for a in &sets {
            for b in &sets {
                let truth = (a.len() + b.len()) as i64 + doubling_r(a, b).unwrap();
                for n in 2..=10u32 {
                    for h in Subgroup::all(n) {
                        let d = delta_bound(a, b, n, &h).unwrap();
                        assert!(
                            d.bound <= truth,
                            "bound {} > |A+B| {truth} for a={a} b={b} n={n} h={h:?}",
                            d.bound
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn corollary_examples() {
        let a = set(&[0, 1, 2]);
        let b = set(&[0, 1, 3]);
        let c = corollary_bound(&a, &b, &Subgroup::trivial(3)).unwrap();
        assert_eq!((c.n, c.a0_b0_size, c.bound), (3, 3, 6));
        assert!(c.outside.is_empty());

        let c = corollary_bound(&IntSet::singleton(0), &set(&[0, 2]), &Subgroup::trivial(2))
            .unwrap();
        assert_eq!(c.bound, 2);

        assert!(corollary_bound(&a, &set(&[1, 3]), &Subgroup::trivial(2)).is_err());
        assert!(corollary_bound(&a, &set(&[0, 1]), &Subgroup::trivial(1)).is_err());
        assert!(corollary_bound(&a, &b, &Subgroup::trivial(5)).is_err());
    }

    #[test]
    fn corollary_bound_never_exceeds_truth_small_sweep() {
        let bs = [set(&[0, 1, 3]), set(&[0, 2]), set(&[0, 2, 3, 7]), set(&[0, 5, 6])];
        let as_ = [set(&[0, 1, 2]), set(&[0, 4]), set(&[1, 2, 8, 11]), set(&[3])];
        for a in &as_ {
            for b in &bs {
                let truth = (a.len() + b.len()) as i64 + doubling_r(a, b).unwrap();
                let n = b.max() as u32;
                for h in Subgroup::all(n) {
                    let c = corollary_bound(a, b, &h).unwrap();
                    assert!(
                        c.bound <= truth,
                        "bound {} > |A+B| {truth} for a={a} b={b} h={h:?}",
                        c.bound
                    );
                }
            }
        }
    }
}
