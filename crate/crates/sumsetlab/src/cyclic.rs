//! Subsets of Z/nZ: stabilizers, quotients, Kneser's bound, unique-expression
//! analysis, and quasi-periodic decompositions.
//!
//! Sets are bit vectors indexed by residue; everything up to n = 128 stays
//! inline. Subgroups of Z/nZ are represented by their generating divisor, so
//! enumerating subgroups is enumerating divisors.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

type Words = SmallVec<[u64; 2]>;

/// A subset of Z/nZ with explicit modulus. Empty sets are permitted as
/// intermediate values; operations that need nonempty operands check.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CyclicSet {
    modulus: u32,
    words: Words,
}

/// A subgroup of Z/nZ: the multiples of a divisor `generator` of `n`.
/// Order is `n / generator`; cosets correspond to residues mod `generator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subgroup {
    modulus: u32,
    generator: u32,
}

pub fn divisors(n: u32) -> Vec<u32> {
    let mut d: Vec<u32> = (1..=n).filter(|&k| n.is_multiple_of(k)).collect();
    d.sort_unstable();
    d
}

impl Subgroup {
    pub fn new(modulus: u32, generator: u32) -> Result<Subgroup> {
        if modulus == 0 {
            return Err(Error::invalid("modulus must be at least 1"));
        }
        if generator == 0 || generator > modulus || !modulus.is_multiple_of(generator) {
            return Err(Error::invalid(format!(
                "generator {generator} is not a divisor of {modulus}"
            )));
        }
        Ok(Subgroup { modulus, generator })
    }

    /// The trivial subgroup {0}.
    pub fn trivial(modulus: u32) -> Subgroup {
        Subgroup {
            modulus,
            generator: modulus,
        }
    }

    /// The full group Z/nZ.
    pub fn full(modulus: u32) -> Subgroup {
        Subgroup {
            modulus,
            generator: 1,
        }
    }

    /// All subgroups, by ascending generator (descending order).
    pub fn all(modulus: u32) -> Vec<Subgroup> {
        divisors(modulus)
            .into_iter()
            .map(|generator| Subgroup {
                modulus,
                generator,
            })
            .collect()
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn generator(&self) -> u32 {
        self.generator
    }

    pub fn order(&self) -> u32 {
        self.modulus / self.generator
    }

    /// Number of cosets, equal to the generator.
    pub fn coset_count(&self) -> u32 {
        self.generator
    }

    pub fn is_trivial(&self) -> bool {
        self.generator == self.modulus
    }

    pub fn is_full(&self) -> bool {
        self.generator == 1
    }

    pub fn members(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.order()).map(|k| k * self.generator)
    }

    pub fn to_set(&self) -> CyclicSet {
        CyclicSet::from_iter_mod(self.modulus, self.members())
    }
}

impl CyclicSet {
    pub fn empty(modulus: u32) -> CyclicSet {
        assert!(modulus >= 1, "modulus must be at least 1");
        CyclicSet {
            modulus,
            words: smallvec![0; (modulus as usize).div_ceil(64)],
        }
    }

    pub fn full(modulus: u32) -> CyclicSet {
        let mut s = CyclicSet::empty(modulus);
        for r in 0..modulus {
            s.insert(r);
        }
        s
    }

    /// Builds a set from residues in `[0, n-1]`; rejects out-of-range values
    /// and duplicates.
    pub fn from_members<I: IntoIterator<Item = u32>>(modulus: u32, members: I) -> Result<CyclicSet> {
        if modulus == 0 {
            return Err(Error::invalid("modulus must be at least 1"));
        }
        let mut s = CyclicSet::empty(modulus);
        for m in members {
            if m >= modulus {
                return Err(Error::invalid(format!(
                    "residue {m} outside [0, {}]",
                    modulus - 1
                )));
            }
            if s.contains(m) {
                return Err(Error::DuplicateElement(m as i64));
            }
            s.insert(m);
        }
        Ok(s)
    }

    /// Builds a set reducing arbitrary integers mod n, deduping silently.
    pub fn from_iter_mod<I: IntoIterator<Item = u32>>(modulus: u32, values: I) -> CyclicSet {
        let mut s = CyclicSet::empty(modulus);
        for v in values {
            s.insert(v % modulus);
        }
        s
    }

    /// Low bits of `mask` become residues; only valid for n <= 64.
    pub fn from_mask(modulus: u32, mask: u64) -> CyclicSet {
        assert!(modulus <= 64);
        let keep = if modulus == 64 {
            u64::MAX
        } else {
            (1u64 << modulus) - 1
        };
        debug_assert_eq!(mask & !keep, 0, "mask has bits beyond the modulus");
        CyclicSet {
            modulus,
            words: smallvec![mask & keep],
        }
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.modulus as usize
    }

    pub fn contains(&self, r: u32) -> bool {
        debug_assert!(r < self.modulus);
        self.words[(r / 64) as usize] >> (r % 64) & 1 == 1
    }

    pub fn insert(&mut self, r: u32) {
        debug_assert!(r < self.modulus);
        self.words[(r / 64) as usize] |= 1 << (r % 64);
    }

    pub fn remove(&mut self, r: u32) {
        debug_assert!(r < self.modulus);
        self.words[(r / 64) as usize] &= !(1 << (r % 64));
    }

    pub fn members(&self) -> Vec<u32> {
        self.iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.modulus).filter(move |&r| self.contains(r))
    }

    fn check_modulus(&self, other: &CyclicSet) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus, other.modulus));
        }
        Ok(())
    }

    /// The set `{x + k : x in self}` (k taken mod n).
    pub fn rotate(&self, k: u32) -> CyclicSet {
        let n = self.modulus;
        let k = k % n;
        if k == 0 {
            return self.clone();
        }
        if self.words.len() == 1 && n <= 64 {
            let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let m = self.words[0];
            let rot = ((m << k) | (m >> (n - k))) & mask;
            return CyclicSet {
                modulus: n,
                words: smallvec![rot],
            };
        }
        let mut out = CyclicSet::empty(n);
        for r in self.iter() {
            out.insert((r + k) % n);
        }
        out
    }

    pub fn union(&self, other: &CyclicSet) -> CyclicSet {
        debug_assert_eq!(self.modulus, other.modulus);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a | b)
            .collect();
        CyclicSet {
            modulus: self.modulus,
            words,
        }
    }

    pub fn intersection(&self, other: &CyclicSet) -> CyclicSet {
        debug_assert_eq!(self.modulus, other.modulus);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & b)
            .collect();
        CyclicSet {
            modulus: self.modulus,
            words,
        }
    }

    /// `|self ∩ other|` without building the intersection.
    pub fn intersection_len(&self, other: &CyclicSet) -> usize {
        debug_assert_eq!(self.modulus, other.modulus);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn difference(&self, other: &CyclicSet) -> CyclicSet {
        debug_assert_eq!(self.modulus, other.modulus);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & !b)
            .collect();
        CyclicSet {
            modulus: self.modulus,
            words,
        }
    }

    pub fn is_subset_of(&self, other: &CyclicSet) -> bool {
        debug_assert_eq!(self.modulus, other.modulus);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn complement(&self) -> CyclicSet {
        let mut s = CyclicSet::full(self.modulus);
        for w in s.words.iter_mut().zip(&self.words) {
            *w.0 &= !w.1;
        }
        s
    }

    /// The set `{-x mod n : x in self}`.
    pub fn negate(&self) -> CyclicSet {
        CyclicSet::from_iter_mod(self.modulus, self.iter().map(|r| (self.modulus - r) % self.modulus))
    }

    pub fn translate(&self, k: u32) -> CyclicSet {
        self.rotate(k)
    }

    /// `X + H`, the union of all H-cosets meeting the set.
    pub fn saturate(&self, h: &Subgroup) -> CyclicSet {
        debug_assert_eq!(self.modulus, h.modulus());
        let mut acc = CyclicSet::empty(self.modulus);
        for m in h.members() {
            acc = acc.union(&self.rotate(m));
        }
        acc
    }

    pub fn is_periodic_under(&self, h: &Subgroup) -> bool {
        self.saturate(h) == *self
    }

    /// `X ∩ (rep + H)`.
    pub fn coset_slice(&self, rep: u32, h: &Subgroup) -> CyclicSet {
        debug_assert_eq!(self.modulus, h.modulus());
        self.intersection(&h.to_set().rotate(rep))
    }
}

/// `{x + y mod n}`; requires equal moduli and nonempty operands.
pub fn c_sumset(x: &CyclicSet, y: &CyclicSet) -> Result<CyclicSet> {
    x.check_modulus(y)?;
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(c_sumset_unchecked(x, y))
}

/// Sumset allowing empty operands (the empty set is absorbing).
pub(crate) fn c_sumset_unchecked(x: &CyclicSet, y: &CyclicSet) -> CyclicSet {
    let (small, big) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let mut acc = CyclicSet::empty(x.modulus());
    for r in small.iter() {
        acc = acc.union(&big.rotate(r));
    }
    acc
}

/// Maximal subgroup H with H + X = X. Trivial iff X is aperiodic.
pub fn stabilizer(x: &CyclicSet) -> Result<Subgroup> {
    if x.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = x.modulus();
    for g in divisors(n) {
        if x.rotate(g % n) == *x {
            return Ok(Subgroup::new(n, g).unwrap());
        }
    }
    unreachable!("the trivial subgroup always stabilizes")
}

/// Image of the set in G/H, identified with Z/gZ via residues mod g.
pub fn quotient(x: &CyclicSet, h: &Subgroup) -> Result<CyclicSet> {
    if h.modulus() != x.modulus() {
        return Err(Error::ModulusMismatch(x.modulus(), h.modulus()));
    }
    Ok(CyclicSet::from_iter_mod(
        h.coset_count(),
        x.iter().map(|r| r % h.generator()),
    ))
}

/// Outcome of the stabilizer lower bound `|X+Y| >= |X|+|Y|-|H|+rho`.
///
/// `rho = |(X+H) \ X| + |(Y+H) \ Y|`; note the second term subtracts Y, not H.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KneserReport {
    pub stabilizer: Subgroup,
    pub rho: i64,
    pub bound: i64,
    pub sumset_size: i64,
    pub holds: bool,
}

pub fn kneser_check(x: &CyclicSet, y: &CyclicSet) -> Result<KneserReport> {
    let sum = c_sumset(x, y)?;
    let h = stabilizer(&sum)?;
    let xh = x.saturate(&h);
    let yh = y.saturate(&h);
    let rho = (xh.len() - x.len()) as i64 + (yh.len() - y.len()) as i64;
    let bound = x.len() as i64 + y.len() as i64 - h.order() as i64 + rho;
    let sumset_size = sum.len() as i64;
    Ok(KneserReport {
        stabilizer: h,
        rho,
        bound,
        sumset_size,
        holds: sumset_size >= bound,
    })
}

/// Number of representations `x + y = c` for each residue `c`.
pub fn expression_counts(x: &CyclicSet, y: &CyclicSet) -> Result<Vec<u32>> {
    x.check_modulus(y)?;
    let n = x.modulus();
    let mut counts = vec![0u32; n as usize];
    for a in x.iter() {
        for b in y.iter() {
            counts[((a + b) % n) as usize] += 1;
        }
    }
    Ok(counts)
}

/// All c in X+Y with exactly one pair (x, y) summing to c.
pub fn unique_expression_elements(x: &CyclicSet, y: &CyclicSet) -> Result<CyclicSet> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySet);
    }
    let counts = expression_counts(x, y)?;
    Ok(CyclicSet::from_iter_mod(
        x.modulus(),
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .map(|(r, _)| r as u32),
    ))
}

/// If some nonempty H-coset slice can be removed leaving an H-periodic (or
/// empty) remainder, returns `(periodic_part, slice)`. When several slices
/// qualify the one in the largest-residue coset is chosen.
pub fn quasi_periodic_decomp(x: &CyclicSet, h: &Subgroup) -> Option<(CyclicSet, CyclicSet)> {
    assert_eq!(x.modulus(), h.modulus(), "subgroup modulus mismatch");
    if x.is_empty() {
        return None;
    }
    for rep in (0..h.coset_count()).rev() {
        let slice = x.coset_slice(rep, h);
        if slice.is_empty() {
            continue;
        }
        let rest = x.difference(&slice);
        if rest.is_empty() || rest.is_periodic_under(h) {
            return Some((rest, slice));
        }
    }
    None
}

/// All quasi-periodic slices of `x` under `h`, one per qualifying coset.
pub(crate) fn quasi_periodic_slices(x: &CyclicSet, h: &Subgroup) -> Vec<CyclicSet> {
    let mut out = Vec::new();
    for rep in 0..h.coset_count() {
        let slice = x.coset_slice(rep, h);
        if slice.is_empty() {
            continue;
        }
        let rest = x.difference(&slice);
        if rest.is_empty() || rest.is_periodic_under(h) {
            out.push(slice);
        }
    }
    out
}

impl fmt::Display for CyclicSet {
    /// Literal form: `n: 6; {0,2,4}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n: {}; {{", self.modulus)?;
        let mut first = true;
        for r in self.iter() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
            first = false;
        }
        write!(f, "}}")
    }
}

#[derive(Serialize, Deserialize)]
struct CyclicSetRepr {
    #[serde(rename = "mod")]
    modulus: u32,
    set: Vec<u32>,
}

impl Serialize for CyclicSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CyclicSetRepr {
            modulus: self.modulus,
            set: self.members(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CyclicSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = CyclicSetRepr::deserialize(deserializer)?;
        CyclicSet::from_members(repr.modulus, repr.set).map_err(D::Error::custom)
    }
}

impl FromStr for CyclicSet {
    type Err = Error;

    /// Parses `n: 6; {0,2,4}` or JSON `{"mod": 6, "set": [0,2,4]}`.
    fn from_str(s: &str) -> Result<CyclicSet> {
        let t = s.trim();
        if t.starts_with('{') {
            let repr: CyclicSetRepr = serde_json::from_str(t)
                .map_err(|e| Error::parse(e.column().saturating_sub(1), e.to_string()))?;
            let set = CyclicSet::from_members(repr.modulus, repr.set)?;
            if set.is_empty() {
                return Err(Error::EmptySet);
            }
            return Ok(set);
        }
        let rest = t
            .strip_prefix("n:")
            .ok_or_else(|| Error::parse(0, "expected literal of the form `n: 6; {0,2,4}`"))?;
        let (num, body) = rest
            .split_once(';')
            .ok_or_else(|| Error::parse(2, "expected `;` after the modulus"))?;
        let modulus: u32 = num
            .trim()
            .parse()
            .map_err(|_| Error::parse(2, format!("bad modulus {:?}", num.trim())))?;
        let body = body.trim();
        let inner = body
            .strip_prefix('{')
            .and_then(|b| b.strip_suffix('}'))
            .ok_or_else(|| Error::parse(t.len() - body.len(), "expected `{...}` member list"))?;
        let mut members = Vec::new();
        for tok in inner.split(',') {
            let tok = tok.trim();
            if tok.is_empty() {
                return Err(Error::parse(0, "empty element in member list"));
            }
            members.push(
                tok.parse::<u32>()
                    .map_err(|_| Error::parse(0, format!("bad residue {tok:?}")))?,
            );
        }
        if members.is_empty() {
            return Err(Error::EmptySet);
        }
        CyclicSet::from_members(modulus, members)
    }
}
