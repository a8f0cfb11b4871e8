//! Classification of critical pairs in Z/nZ and the dual-form structure
//! witness search for pairs with `|X+Y| = |X|+|Y|-1`.

use serde::{Deserialize, Serialize};

use crate::cyclic::{
    c_sumset_unchecked, expression_counts, quasi_periodic_slices, quotient, stabilizer,
    unique_expression_elements, CyclicSet, Subgroup,
};
use crate::error::{Error, Result};

/// Classification of an elementary pair, with the witness data that backs the
/// verdict. `None` means no clause matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementaryType {
    /// One of the sets is a singleton.
    TypeI,
    /// Both sets are arithmetic progressions with this common difference,
    /// whose order is at least `|X| + |Y| - 1`.
    TypeII { diff: u32 },
    /// `|X| + |Y| = |K| + 1` with exactly one unique expression element.
    TypeIII { unique_sum: u32 },
    /// After translating by `(shift_a, shift_b)`, `Y = -(K \ X)` with the
    /// sumset aperiodic and free of unique expression elements.
    TypeIV { shift_a: u32, shift_b: u32 },
    None,
}

impl ElementaryType {
    pub fn tag(&self) -> &'static str {
        match self {
            ElementaryType::TypeI => "I",
            ElementaryType::TypeII { .. } => "II",
            ElementaryType::TypeIII { .. } => "III",
            ElementaryType::TypeIV { .. } => "IV",
            ElementaryType::None => "NONE",
        }
    }

    pub fn is_i_to_iii(&self) -> bool {
        matches!(
            self,
            ElementaryType::TypeI | ElementaryType::TypeII { .. } | ElementaryType::TypeIII { .. }
        )
    }
}

fn gcd_u32(a: u32, b: u32) -> u32 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Order of the residue `d` in Z/nZ.
fn ord_mod(n: u32, d: u32) -> u32 {
    n / gcd_u32(n, d % n)
}

fn walk_covers(x: &CyclicSet, start: u32, d: u32, steps: usize) -> bool {
    let n = x.modulus();
    let mut cur = start;
    for _ in 0..steps {
        if !x.contains(cur) {
            return false;
        }
        cur = (cur + d) % n;
    }
    true
}

/// Whether the set is an arithmetic progression with difference `d` mod n.
fn is_ap_mod(x: &CyclicSet, d: u32) -> bool {
    let n = x.modulus();
    let k = x.len();
    if k == 1 {
        return true;
    }
    let ord = ord_mod(n, d) as usize;
    if k > ord {
        return false;
    }
    if k == ord {
        // A full cycle of <d>; any member is a valid start.
        let s = x.iter().next().unwrap();
        return walk_covers(x, s, d, k);
    }
    let back = (n - d % n) % n;
    let mut starts = x.iter().filter(|&r| !x.contains((r + back) % n));
    match (starts.next(), starts.next()) {
        (Some(s), None) => walk_covers(x, s, d, k),
        _ => false,
    }
}

fn unique_expression_pair(x: &CyclicSet, y: &CyclicSet, c: u32) -> Option<(u32, u32)> {
    let n = x.modulus();
    for a in x.iter() {
        let b = (c + n - a) % n;
        if y.contains(b) {
            return Some((a, b));
        }
    }
    None
}

/// Translates both sets to contain 0 and rescales onto the subgroup generated
/// by the pair, so the result spans its whole (possibly smaller) ambient group.
fn reduce_to_span(x: &CyclicSet, y: &CyclicSet) -> (CyclicSet, CyclicSet, u32) {
    let n = x.modulus();
    let x0 = x.iter().next().expect("nonempty");
    let y0 = y.iter().next().expect("nonempty");
    let xs = x.rotate((n - x0) % n);
    let ys = y.rotate((n - y0) % n);
    let mut g = n;
    for r in xs.iter().chain(ys.iter()) {
        g = gcd_u32(g, r);
    }
    if g <= 1 {
        return (xs, ys, 1);
    }
    let m = n / g;
    (
        CyclicSet::from_iter_mod(m, xs.iter().map(|r| r / g)),
        CyclicSet::from_iter_mod(m, ys.iter().map(|r| r / g)),
        g,
    )
}

/// Clause checks in the order I, II, III, IV; assumes the pair spans its
/// ambient group. Witness coordinates refer to the given pair.
fn classify_spanning(x: &CyclicSet, y: &CyclicSet) -> ElementaryType {
    let n = x.modulus();
    let (kx, ky) = (x.len(), y.len());

    if kx == 1 || ky == 1 {
        return ElementaryType::TypeI;
    }

    if kx >= 2 && ky >= 2 {
        let need = (kx + ky - 1) as u32;
        for d in 1..n {
            if ord_mod(n, d) >= need && is_ap_mod(x, d) && is_ap_mod(y, d) {
                return ElementaryType::TypeII { diff: d };
            }
        }
    }

    let counts = expression_counts(x, y).expect("equal moduli");
    let ue: Vec<u32> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 1)
        .map(|(r, _)| r as u32)
        .collect();

    if kx + ky == n as usize + 1 && ue.len() == 1 {
        return ElementaryType::TypeIII { unique_sum: ue[0] };
    }

    if kx + ky == n as usize && ue.is_empty() {
        let sum = c_sumset_unchecked(x, y);
        if stabilizer(&sum).map(|h| h.is_trivial()).unwrap_or(false) {
            for za in 0..n {
                let a = x.rotate((n - za) % n);
                let target = a.complement().negate();
                for zb in 0..n {
                    if y.rotate((n - zb) % n) == target {
                        return ElementaryType::TypeIV {
                            shift_a: za,
                            shift_b: zb,
                        };
                    }
                }
            }
        }
    }

    ElementaryType::None
}

/// Classifies the pair after translating it to contain 0 in each set. The
/// affine span of the pair must be the full ambient group; a proper span is
/// rejected with a diagnostic naming its generator. Witness coordinates refer
/// to the translated pair.
pub fn classify_elementary(x: &CyclicSet, y: &CyclicSet) -> Result<ElementaryType> {
    if x.modulus() != y.modulus() {
        return Err(Error::ModulusMismatch(x.modulus(), y.modulus()));
    }
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySet);
    }
    let (xs, ys, g) = reduce_to_span(x, y);
    if g != 1 {
        return Err(Error::NotFullGroup { generator: g });
    }
    Ok(classify_spanning(&xs, &ys))
}

/// Classification within the affine span of the pair; never rejects. Witness
/// coordinates refer to the span-reduced pair.
pub(crate) fn classify_in_span(x: &CyclicSet, y: &CyclicSet) -> ElementaryType {
    let (_, _, t) = classify_reduced(x, y);
    t
}

/// Span-reduces the pair and classifies it, returning the reduced pair the
/// witness coordinates refer to.
pub(crate) fn classify_reduced(x: &CyclicSet, y: &CyclicSet) -> (CyclicSet, CyclicSet, ElementaryType) {
    let (xs, ys, _) = reduce_to_span(x, y);
    let t = classify_spanning(&xs, &ys);
    (xs, ys, t)
}

/// The punctured-sumset identity on a span-reduced type-III pair, located via
/// its unique expression element.
pub(crate) fn punctured_check_at(xs: &CyclicSet, ys: &CyclicSet, unique_sum: u32) -> bool {
    let (a0, b0) = unique_expression_pair(xs, ys, unique_sum)
        .expect("type III pair has a witnessing expression");
    punctured_identity_holds(xs, ys, a0, b0)
}

pub(crate) fn punctured_identity_holds(x: &CyclicSet, y: &CyclicSet, a0: u32, b0: u32) -> bool {
    let n = x.modulus();
    let mut xp = x.clone();
    xp.remove(a0);
    let mut yp = y.clone();
    yp.remove(b0);
    let mut expected = c_sumset_unchecked(x, y);
    expected.remove((a0 + b0) % n);
    c_sumset_unchecked(&xp, &yp) == expected
}

/// For a type-III pair with unique expression `a0 + b0`, checks
/// `(X \ {a0}) + (Y \ {b0}) = (X+Y) \ {a0+b0}`.
pub fn type3_punctured_check(x: &CyclicSet, y: &CyclicSet) -> Result<bool> {
    let (xs, ys, g) = reduce_to_span(x, y);
    if g != 1 {
        return Err(Error::NotFullGroup { generator: g });
    }
    match classify_spanning(&xs, &ys) {
        ElementaryType::TypeIII { unique_sum } => {
            let (a0, b0) = unique_expression_pair(&xs, &ys, unique_sum)
                .expect("type III pair has a witnessing expression");
            Ok(punctured_identity_holds(&xs, &ys, a0, b0))
        }
        other => Err(Error::invalid(format!(
            "pair is not type III (classified {})",
            other.tag()
        ))),
    }
}

/// Structure certificate for a critical pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum KstWitness {
    /// The pair itself is elementary of type IV.
    TypeIv { shift_a: u32, shift_b: u32 },
    /// Quasi-periodic decomposition witness: the quotient pair is elementary
    /// of a type I-III and the slices satisfy the unique-expression, critical
    /// cardinality, and aperiodic-or-unique-expression clauses.
    QuasiPeriodic {
        subgroup: Subgroup,
        quotient_type: ElementaryType,
        a_slice: CyclicSet,
        b_slice: CyclicSet,
    },
}

/// Desk-scale modulus guard for the witness search.
pub const KST_MAX_MODULUS: u32 = 12;

/// Whether the dual-form search applies: `|X+Y| = |X|+|Y|-1`, and the sumset
/// contains a unique expression element whenever it is periodic.
pub fn kst_eligible(x: &CyclicSet, y: &CyclicSet) -> Result<bool> {
    let sum = crate::cyclic::c_sumset(x, y)?;
    if sum.len() != x.len() + y.len() - 1 {
        return Ok(false);
    }
    if stabilizer(&sum)?.is_trivial() {
        return Ok(true);
    }
    Ok(!unique_expression_elements(x, y)?.is_empty())
}

/// Searches for the structure witness guaranteed for every eligible pair:
/// either a type-IV certificate, or a proper subgroup with quasi-periodic
/// slices satisfying the four clauses. Exhaustive failure is reported as a
/// falsification, which indicates an implementation bug, never a valid
/// outcome.
pub fn kst_witness(x: &CyclicSet, y: &CyclicSet) -> Result<KstWitness> {
    if x.modulus() != y.modulus() {
        return Err(Error::ModulusMismatch(x.modulus(), y.modulus()));
    }
    let n = x.modulus();
    if n < 2 {
        return Err(Error::invalid("witness search needs a nontrivial group"));
    }
    if n > KST_MAX_MODULUS {
        return Err(Error::GuardExceeded(format!(
            "modulus {n} exceeds witness-search limit {KST_MAX_MODULUS}"
        )));
    }
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySet);
    }
    if !kst_eligible(x, y)? {
        return Err(Error::invalid(
            "pair is not critical (or lacks a unique expression in a periodic sumset)",
        ));
    }

    if let ElementaryType::TypeIV { shift_a, shift_b } = classify_in_span(x, y) {
        return Ok(KstWitness::TypeIv { shift_a, shift_b });
    }

    for h in Subgroup::all(n) {
        if h.is_full() {
            continue;
        }
        let qx = quotient(x, &h)?;
        let qy = quotient(y, &h)?;
        let qtype = classify_in_span(&qx, &qy);
        if !qtype.is_i_to_iii() {
            continue;
        }
        let q_ue = unique_expression_elements(&qx, &qy)?;
        let g = h.coset_count();
        for a_slice in quasi_periodic_slices(x, &h) {
            let a_rep = a_slice.iter().next().unwrap() % g;
            for b_slice in quasi_periodic_slices(y, &h) {
                let b_rep = b_slice.iter().next().unwrap() % g;
                if !q_ue.contains((a_rep + b_rep) % g) {
                    continue;
                }
                let slice_sum = c_sumset_unchecked(&a_slice, &b_slice);
                if slice_sum.len() != a_slice.len() + b_slice.len() - 1 {
                    continue;
                }
                let aperiodic = stabilizer(&slice_sum)?.is_trivial();
                if !aperiodic && unique_expression_elements(&a_slice, &b_slice)?.is_empty() {
                    continue;
                }
                return Ok(KstWitness::QuasiPeriodic {
                    subgroup: h,
                    quotient_type: qtype,
                    a_slice,
                    b_slice,
                });
            }
        }
    }

    Err(Error::Falsified(format!(
        "no structure witness for x={x}, y={y}"
    )))
}
