//! Generators for the four extremal families that pin the sharpness of the
//! hypotheses and conclusions: the classic triple-equality pair, the
//! unbounded-cover pair, the at-threshold block pair, and the tight-cover
//! pair. Each instance carries the outcome it is expected to exhibit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{compute_s, theorem_threshold};
use crate::error::{Error, Result};
use crate::intset::IntSet;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `A = [0,r]_2 u [2r+2, |A|+r]`, same shape for B: all three classic
    /// conclusions tight simultaneously.
    A,
    /// `A = [0,|A|-2] u {N}` against itself: the cover of A is unbounded in N
    /// once the doubling hypothesis is exceeded by one.
    B,
    /// Block pair `B = [0,|B|/2-1] u (N + [0,|B|/2-1])`,
    /// `A = U_i (iN + [0,|A|/s-1])`: lands exactly on the threshold.
    C,
    /// `B = [0,|B|-2] u {|B|+r}`, `A = [0,|A|-1]`: the cover bound
    /// `|B|+r+1` is attained exactly.
    D,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Family::A => 'a',
            Family::B => 'b',
            Family::C => 'c',
            Family::D => 'd',
        };
        write!(f, "{c}")
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Family> {
        match s.trim() {
            "a" | "A" => Ok(Family::A),
            "b" | "B" => Ok(Family::B),
            "c" | "C" => Ok(Family::C),
            "d" | "D" => Ok(Family::D),
            other => Err(Error::invalid(format!("unknown family {other:?}"))),
        }
    }
}

/// Family parameters; which fields are required depends on the family.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct FamilyParams {
    pub size_a: Option<i64>,
    pub size_b: Option<i64>,
    pub r: Option<i64>,
    pub s: Option<i64>,
    pub n: Option<i64>,
}

/// What a generated pair is expected to exhibit, with the exact numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ExpectedOutcome {
    /// Covers of A and B and the longest progression inside A+B all meet
    /// their bounds with equality.
    ClassicTripleEquality { r: i64 },
    /// The minimal cover of A has this length, exceeding `|A| + r + 1`; both
    /// doubling hypotheses fail by exactly one.
    UnboundedCoverA { cover_len: i64, cover_bound: i64 },
    /// `|A+B|` equals the threshold exactly, so the strict hypothesis fails.
    AtThreshold { threshold: Rational },
    /// The minimal cover of B has length exactly `|B| + r + 1`.
    TightCoverB { cover_len: i64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyInstance {
    pub family: Family,
    pub a: IntSet,
    pub b: IntSet,
    /// The disjointness parameter actually used, for families that have one.
    pub n_used: Option<i64>,
    /// Exclusive lower bound the generator computed for `n_used`.
    pub n_floor: Option<i64>,
    pub expected: ExpectedOutcome,
}

fn req(v: Option<i64>, name: &str) -> Result<i64> {
    v.ok_or_else(|| Error::invalid(format!("family parameter --{name} is required")))
}

fn family_a(params: &FamilyParams) -> Result<FamilyInstance> {
    let ka = req(params.size_a, "size-a")?;
    let kb = req(params.size_b, "size-b")?;
    let r = req(params.r, "r")?;
    if ka < 3 || kb < 3 {
        return Err(Error::invalid("family a needs |A|, |B| >= 3"));
    }
    if r < -1 || r > ka.min(kb) - 3 {
        return Err(Error::invalid(format!(
            "family a needs -1 <= r <= min(|A|,|B|) - 3, got r = {r}"
        )));
    }
    let shape = |k: i64| -> Result<IntSet> {
        let evens = (0..=r).map(|i| 2 * i);
        IntSet::from_elements(evens.chain(2 * r + 2..=k + r))
    };
    Ok(FamilyInstance {
        family: Family::A,
        a: shape(ka)?,
        b: shape(kb)?,
        n_used: None,
        n_floor: None,
        expected: ExpectedOutcome::ClassicTripleEquality { r },
    })
}

fn family_b(params: &FamilyParams) -> Result<FamilyInstance> {
    let ka = req(params.size_a, "size-a")?;
    if ka < 3 {
        return Err(Error::invalid("family b needs |A| >= 3"));
    }
    // Blocks [0, 2|A|-4], N + [0, |A|-2], {2N} must stay disjoint.
    let floor = 2 * ka - 4;
    let n = params.n.unwrap_or(2 * ka + 10);
    if n <= floor {
        return Err(Error::invalid(format!(
            "family b needs N > {floor}, got {n}"
        )));
    }
    let a = IntSet::from_elements((0..=ka - 2).chain([n]))?;
    let r = ka - 3;
    Ok(FamilyInstance {
        family: Family::B,
        a: a.clone(),
        b: a,
        n_used: Some(n),
        n_floor: Some(floor),
        expected: ExpectedOutcome::UnboundedCoverA {
            cover_len: n + 1,
            cover_bound: ka + r + 1,
        },
    })
}

fn family_c(params: &FamilyParams) -> Result<FamilyInstance> {
    let ka = req(params.size_a, "size-a")?;
    let kb = req(params.size_b, "size-b")?;
    let s = req(params.s, "s")?;
    if kb < 4 || kb % 2 != 0 {
        return Err(Error::invalid("family c needs |B| even and >= 4"));
    }
    if s < 1 || ka % s != 0 {
        return Err(Error::invalid("family c needs s >= 1 dividing |A|"));
    }
    if compute_s(ka, kb)? != s {
        return Err(Error::invalid(format!(
            "s = {s} is not the bucket parameter for |A| = {ka}, |B| = {kb} \
             (the construction meets the threshold only at the optimal s)"
        )));
    }
    let threshold = theorem_threshold(ka, kb, s)?;
    let q = ka / s;
    let h = kb / 2;
    let floor = ka + kb + threshold.ceil() as i64;
    let n = params.n.unwrap_or(floor + 1);
    if n <= floor {
        return Err(Error::invalid(format!(
            "family c needs N > {floor}, got {n}"
        )));
    }
    let mut a_elems = Vec::with_capacity(ka as usize);
    for i in 0..s {
        for v in 0..q {
            a_elems.push(i * n + v);
        }
    }
    let b_elems = (0..h).chain(n..n + h);
    Ok(FamilyInstance {
        family: Family::C,
        a: IntSet::from_elements(a_elems)?,
        b: IntSet::from_elements(b_elems)?,
        n_used: Some(n),
        n_floor: Some(floor),
        expected: ExpectedOutcome::AtThreshold { threshold },
    })
}

fn family_d(params: &FamilyParams) -> Result<FamilyInstance> {
    let ka = req(params.size_a, "size-a")?;
    let kb = req(params.size_b, "size-b")?;
    let r = req(params.r, "r")?;
    if kb < 3 {
        return Err(Error::invalid("family d needs |B| >= 3"));
    }
    if ka < 1 {
        return Err(Error::invalid("family d needs |A| >= 1"));
    }
    if r < -1 || r > ka - 2 {
        return Err(Error::invalid(format!(
            "family d needs -1 <= r <= |A| - 2 so the doubling constant is r, got r = {r}"
        )));
    }
    let b = IntSet::from_elements((0..=kb - 2).chain([kb + r]))?;
    let a = IntSet::from_elements(0..ka)?;
    Ok(FamilyInstance {
        family: Family::D,
        a,
        b,
        n_used: None,
        n_floor: None,
        expected: ExpectedOutcome::TightCoverB {
            cover_len: kb + r + 1,
        },
    })
}

/// Builds one instance of the named family.
pub fn family(which: Family, params: &FamilyParams) -> Result<FamilyInstance> {
    match which {
        Family::A => family_a(params),
        Family::B => family_b(params),
        Family::C => family_c(params),
        Family::D => family_d(params),
    }
}

/// The tightness sweep: every family instance in the standard verification
/// boxes. Family d over `|B| in [3,10]`, `r in [0,|B|-2]`, `|A| in [|B|,20]`;
/// family c over even `|B| in [4,10]`, `s in [1,3]` dividing `|A| <= 24` at
/// the bucket parameter; family a over `|A|,|B| in [3,10]`,
/// `r in [-1, min-3]`; plus a family-b ladder.
pub fn tightness_sweep() -> Vec<FamilyInstance> {
    let mut out = Vec::new();
    for kb in 3..=10 {
        for r in 0..=kb - 2 {
            for ka in kb..=20 {
                out.push(
                    family(
                        Family::D,
                        &FamilyParams {
                            size_a: Some(ka),
                            size_b: Some(kb),
                            r: Some(r),
                            ..Default::default()
                        },
                    )
                    .expect("box parameters are valid"),
                );
            }
        }
    }
    for kb in [4i64, 6, 8, 10] {
        for s in 1..=3 {
            for ka in (s..=24).step_by(s as usize) {
                if compute_s(ka, kb).unwrap() != s {
                    continue;
                }
                out.push(
                    family(
                        Family::C,
                        &FamilyParams {
                            size_a: Some(ka),
                            size_b: Some(kb),
                            s: Some(s),
                            ..Default::default()
                        },
                    )
                    .expect("box parameters are valid"),
                );
            }
        }
    }
    for ka in 3..=10 {
        for kb in 3..=10 {
            for r in -1..=ka.min(kb) - 3 {
                out.push(
                    family(
                        Family::A,
                        &FamilyParams {
                            size_a: Some(ka),
                            size_b: Some(kb),
                            r: Some(r),
                            ..Default::default()
                        },
                    )
                    .expect("box parameters are valid"),
                );
            }
        }
    }
    for ka in 3..=10 {
        out.push(
            family(
                Family::B,
                &FamilyParams {
                    size_a: Some(ka),
                    ..Default::default()
                },
            )
            .expect("ladder parameters are valid"),
        );
    }
    out
}
