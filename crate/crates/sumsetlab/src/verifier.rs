//! Exhaustive desk-scale verification: per-pair certificates for the cover
//! theorems, family tightness checks, and the sharded scan engine driving
//! every mode over canonically enumerated pairs.
//!
//! Enumeration universe for integer-pair modes: `A, B` subsets of
//! `[0, max_diam]` with `0 in A` and `0 in B`, joint affine gcd at most 1,
//! reflection-canonical. Reports are deterministic for a fixed config (wall
//! time aside) regardless of the parallel/sequential path taken.

use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::bounds::{
    corollary_hypothesis_holds_with, hypothesis_holds_with, redcalc_brute_min,
    redcalc_closed_form, RedcalcMin,
};
use crate::cyclic::{c_sumset, kneser_check, CyclicSet, KneserReport, Subgroup};
use crate::error::{Error, Result};
use crate::families::{tightness_sweep, ExpectedOutcome, Family, FamilyInstance};
use crate::intset::{ArithProgression, IntSet};
use crate::kemperman::{
    classify_reduced, kst_eligible, kst_witness, punctured_check_at, ElementaryType,
};
use crate::modred::{
    corollary_outside_with, coset_table, delta_total_with, layered, layered_sumset, LayeredSet,
};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Vacuous,
}

/// Certificate for the single-set cover theorem on one pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub a: IntSet,
    pub b: IntSet,
    pub r: i64,
    pub s: Option<i64>,
    pub threshold: Option<Rational>,
    pub hypothesis_met: bool,
    pub cover: ArithProgression,
    /// `|B| + r + 1`.
    pub cover_bound: i64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Verifies the cover conclusion `|P_B| <= |B| + r + 1` under the sharp
/// threshold hypothesis. Pairs with `|B| < 3` are vacuous by convention, and
/// hypothesis failures are vacuous rather than failures.
pub fn verify_main(a: &IntSet, b: &IntSet) -> Result<Certificate> {
    let sum_size = a.sumset(b)?.len() as i64;
    let (ka, kb) = (a.len() as i64, b.len() as i64);
    let r = sum_size - ka - kb;
    let cover = b.ap_cover();
    let cover_bound = kb + r + 1;
    if kb < 3 {
        return Ok(Certificate {
            a: a.clone(),
            b: b.clone(),
            r,
            s: None,
            threshold: None,
            hypothesis_met: false,
            cover,
            cover_bound,
            verdict: Verdict::Vacuous,
            note: Some(format!(
                "|B| = {kb} < 3: B is itself an arithmetic progression; nothing to verify"
            )),
        });
    }
    let rep = hypothesis_holds_with(sum_size, ka, kb)?;
    let verdict = if !rep.holds {
        Verdict::Vacuous
    } else if cover.len <= cover_bound {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(Certificate {
        a: a.clone(),
        b: b.clone(),
        r,
        s: Some(rep.s),
        threshold: Some(rep.threshold),
        hypothesis_met: rep.holds,
        cover,
        cover_bound,
        verdict,
        note: None,
    })
}

/// Certificate for the classical three-conclusion theorem on one pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate3k4 {
    pub a: IntSet,
    pub b: IntSet,
    pub r: i64,
    /// 1 when B is a translate of A, else 0.
    pub delta: i64,
    pub hypothesis_met: bool,
    /// `gcd*(A+B)`, defaulting to 1 for a singleton sumset.
    pub diff: i64,
    pub cover_a: ArithProgression,
    pub cover_b: ArithProgression,
    pub cover_a_bound: i64,
    pub cover_b_bound: i64,
    /// Longest progression with difference `diff` inside A+B.
    pub longest_run: i64,
    /// `|A| + |B| - 1`.
    pub run_bound: i64,
    pub verdict: Verdict,
}

fn cover_with_diff(set: &IntSet, diff: i64) -> ArithProgression {
    debug_assert!(set.positions().all(|p| p % diff as u64 == 0));
    ArithProgression {
        start: set.min(),
        diff,
        len: (set.diameter() / diff as u64) as i64 + 1,
    }
}

fn longest_run_with_diff(set: &IntSet, diff: i64) -> i64 {
    let step = diff as u64;
    let mut best = 0i64;
    let mut run = 0i64;
    let mut prev: Option<u64> = None;
    for p in set.positions() {
        run = match prev {
            Some(q) if p == q + step => run + 1,
            _ => 1,
        };
        best = best.max(run);
        prev = Some(p);
    }
    best
}

/// Verifies all three classical conclusions: both covers with the common
/// difference `gcd*(A+B)` meet their bounds, and A+B contains a progression
/// of that difference and length at least `|A| + |B| - 1`.
pub fn verify_classic_3k4(a: &IntSet, b: &IntSet) -> Result<Certificate3k4> {
    let sum = a.sumset(b)?;
    let (ka, kb) = (a.len() as i64, b.len() as i64);
    let r = sum.len() as i64 - ka - kb;
    let delta = i64::from(a.is_translate_of(b));
    let hypothesis_met = r <= ka.min(kb) - 3 - delta;
    let diff = match sum.gcd_star() {
        0 => 1,
        g => g,
    };
    let cover_a = cover_with_diff(a, diff);
    let cover_b = cover_with_diff(b, diff);
    let longest_run = longest_run_with_diff(&sum, diff);
    let (cover_a_bound, cover_b_bound) = (ka + r + 1, kb + r + 1);
    let run_bound = ka + kb - 1;
    let verdict = if !hypothesis_met {
        Verdict::Vacuous
    } else if cover_a.len <= cover_a_bound
        && cover_b.len <= cover_b_bound
        && longest_run >= run_bound
    {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(Certificate3k4 {
        a: a.clone(),
        b: b.clone(),
        r,
        delta,
        hypothesis_met,
        diff,
        cover_a,
        cover_b,
        cover_a_bound,
        cover_b_bound,
        longest_run,
        run_bound,
        verdict,
    })
}

/// Certificate for the parameter-free corollary: its hypothesis must imply
/// the sharp-threshold hypothesis, and the cover conclusion must hold. Pairs
/// with `|B| < 3` are covered unconditionally by the small-B convention.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorollaryCertificate {
    pub a: IntSet,
    pub b: IntSet,
    pub r: i64,
    /// None when `|B| < 3` (the convention applies instead).
    pub hypothesis_met: Option<bool>,
    pub implication_ok: Option<bool>,
    pub cover: ArithProgression,
    pub cover_bound: i64,
    pub verdict: Verdict,
}

pub fn verify_corollary(a: &IntSet, b: &IntSet) -> Result<CorollaryCertificate> {
    let sum_size = a.sumset(b)?.len() as i64;
    let (ka, kb) = (a.len() as i64, b.len() as i64);
    let r = sum_size - ka - kb;
    let cover = b.ap_cover();
    let cover_bound = kb + r + 1;
    if kb < 3 {
        // B with at most two elements is itself a progression; r >= -1 makes
        // the bound automatic, so any violation here is a failure.
        let verdict = if cover.len <= cover_bound {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        return Ok(CorollaryCertificate {
            a: a.clone(),
            b: b.clone(),
            r,
            hypothesis_met: None,
            implication_ok: None,
            cover,
            cover_bound,
            verdict,
        });
    }
    let ch = corollary_hypothesis_holds_with(sum_size, ka, kb)?;
    let th = hypothesis_holds_with(sum_size, ka, kb)?.holds;
    let implication_ok = !ch || th;
    let verdict = if !implication_ok {
        Verdict::Fail
    } else if !ch {
        Verdict::Vacuous
    } else if cover.len <= cover_bound {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(CorollaryCertificate {
        a: a.clone(),
        b: b.clone(),
        r,
        hypothesis_met: Some(ch),
        implication_ok: Some(implication_ok),
        cover,
        cover_bound,
        verdict,
    })
}

/// Result of checking one family instance against its expected outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyCheck {
    pub ok: bool,
    pub details: String,
}

/// Measures a family instance and compares against its expected outcome.
pub fn check_family(inst: &FamilyInstance) -> Result<FamilyCheck> {
    match &inst.expected {
        ExpectedOutcome::ClassicTripleEquality { r } => {
            let cert = verify_classic_3k4(&inst.a, &inst.b)?;
            let ok = cert.r == *r
                && cert.verdict != Verdict::Fail
                && cert.cover_a.len == cert.cover_a_bound
                && cert.cover_b.len == cert.cover_b_bound
                && cert.longest_run == cert.run_bound;
            Ok(FamilyCheck {
                ok,
                details: format!(
                    "r={} covers {}/{} and {}/{} run {}/{}",
                    cert.r,
                    cert.cover_a.len,
                    cert.cover_a_bound,
                    cert.cover_b.len,
                    cert.cover_b_bound,
                    cert.longest_run,
                    cert.run_bound
                ),
            })
        }
        ExpectedOutcome::UnboundedCoverA {
            cover_len,
            cover_bound,
        } => {
            let cover = inst.a.ap_cover();
            let classic = verify_classic_3k4(&inst.a, &inst.b)?;
            let main = verify_main(&inst.a, &inst.b)?;
            let ok = cover.len == *cover_len
                && cover.len > *cover_bound
                && !classic.hypothesis_met
                && !main.hypothesis_met;
            Ok(FamilyCheck {
                ok,
                details: format!(
                    "cover {} > bound {}, both hypotheses fail",
                    cover.len, cover_bound
                ),
            })
        }
        ExpectedOutcome::AtThreshold { threshold } => {
            let sum_size = inst.a.sumset(&inst.b).unwrap().len() as i64;
            let rep = hypothesis_holds_with(
                sum_size,
                inst.a.len() as i64,
                inst.b.len() as i64,
            )?;
            let ok = Rational::from_int(sum_size as i128) == *threshold
                && rep.threshold == *threshold
                && !rep.holds;
            Ok(FamilyCheck {
                ok,
                details: format!("|A+B| = {sum_size} vs threshold {threshold}, holds = {}", rep.holds),
            })
        }
        ExpectedOutcome::TightCoverB { cover_len } => {
            let cert = verify_main(&inst.a, &inst.b)?;
            let tight = cert.cover.len == *cover_len && cert.cover.len == cert.cover_bound;
            let ok = tight
                && cert.verdict != Verdict::Fail
                && (!cert.hypothesis_met || cert.verdict == Verdict::Pass);
            Ok(FamilyCheck {
                ok,
                details: format!(
                    "cover {} = bound {}, verdict {:?}",
                    cert.cover.len, cert.cover_bound, cert.verdict
                ),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Scan configuration and report types
// ---------------------------------------------------------------------------

/// Shard `index` of `count`, partitioning the outermost enumeration axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardSpec {
    pub index: u32,
    pub count: u32,
}

impl Default for ShardSpec {
    fn default() -> Self {
        ShardSpec { index: 0, count: 1 }
    }
}

impl FromStr for ShardSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<ShardSpec> {
        let (i, c) = s
            .split_once('/')
            .ok_or_else(|| Error::parse(0, "expected shard of the form INDEX/COUNT"))?;
        let index = i
            .trim()
            .parse()
            .map_err(|_| Error::parse(0, format!("bad shard index {i:?}")))?;
        let count = c
            .trim()
            .parse()
            .map_err(|_| Error::parse(i.len() + 1, format!("bad shard count {c:?}")))?;
        Ok(ShardSpec { index, count })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ScanMode {
    /// Sharp-threshold cover theorem over canonical pairs with `|B| >= 3`.
    MainTheorem,
    /// Classical three-conclusion theorem over canonical pairs.
    #[serde(rename = "classic-3k4")]
    Classic3k4,
    /// Corollary implication and conclusion over canonical pairs.
    Corollary,
    /// The full tightness sweep of the four extremal families.
    Families,
    /// Structure witness search over all eligible pairs for each `n <= max_n`,
    /// plus the punctured-sumset identity on every type-III pair.
    Kst { max_n: u32 },
    /// Stabilizer bound over all pairs for `n <= max_n`, plus seeded random
    /// pairs at larger moduli.
    Kneser {
        max_n: u32,
        random_pairs: u64,
        random_max_n: u32,
        seed: u64,
    },
    /// Layered lower bounds at every modulus `n in [2, max_diam]` and every
    /// subgroup, against the true sumset size.
    Modred,
    /// Closed-form versus brute-force integer minimization on the grid
    /// `[1, x_max] x [3, y_max]`.
    Redcalc { x_max: i64, y_max: i64 },
}

impl ScanMode {
    fn needs_pairs(&self) -> bool {
        matches!(
            self,
            ScanMode::MainTheorem | ScanMode::Classic3k4 | ScanMode::Corollary | ScanMode::Modred
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub mode: ScanMode,
    /// Bound on `max A` and `max B` for integer-pair modes; ignored otherwise.
    #[serde(default)]
    pub max_diam: u32,
    #[serde(default)]
    pub max_size_a: Option<usize>,
    #[serde(default)]
    pub max_size_b: Option<usize>,
    #[serde(default)]
    pub shard: ShardSpec,
    /// Take the data-parallel path; with the `parallel` feature disabled the
    /// sequential fallback always runs.
    #[serde(default = "default_true")]
    pub parallel: bool,
}

fn default_true() -> bool {
    true
}

impl VerifyConfig {
    pub fn new(mode: ScanMode) -> VerifyConfig {
        VerifyConfig {
            mode,
            max_diam: 0,
            max_size_a: None,
            max_size_b: None,
            shard: ShardSpec::default(),
            parallel: true,
        }
    }

    pub fn with_max_diam(mut self, max_diam: u32) -> Self {
        self.max_diam = max_diam;
        self
    }

    pub fn with_shard(mut self, shard: ShardSpec) -> Self {
        self.shard = shard;
        self
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.shard.count == 0 || self.shard.index >= self.shard.count {
            return Err(Error::invalid(format!(
                "shard {}/{} is not a valid partition slot",
                self.shard.index, self.shard.count
            )));
        }
        if self.mode.needs_pairs() && !(1..=16).contains(&self.max_diam) {
            return Err(Error::GuardExceeded(format!(
                "max_diam {} outside the exhaustive range [1, 16]",
                self.max_diam
            )));
        }
        match &self.mode {
            ScanMode::Kst { max_n } => {
                if !(2..=12).contains(max_n) {
                    return Err(Error::GuardExceeded(format!(
                        "kst max_n {max_n} outside [2, 12]"
                    )));
                }
            }
            ScanMode::Kneser {
                max_n,
                random_pairs,
                random_max_n,
                ..
            } => {
                if !(1..=13).contains(max_n) {
                    return Err(Error::GuardExceeded(format!(
                        "kneser max_n {max_n} outside [1, 13]"
                    )));
                }
                if *random_pairs > 0 && !(2..=64).contains(random_max_n) {
                    return Err(Error::GuardExceeded(format!(
                        "kneser random_max_n {random_max_n} outside [2, 64]"
                    )));
                }
            }
            ScanMode::Redcalc { x_max, y_max }
                if !(1..=5000).contains(x_max) || !(3..=5000).contains(y_max) =>
            {
                return Err(Error::GuardExceeded(format!(
                    "redcalc grid {x_max} x {y_max} outside [1,5000] x [3,5000]"
                )));
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanCounts {
    pub pass: u64,
    pub fail: u64,
    pub vacuous: u64,
}

impl ScanCounts {
    fn absorb(&mut self, other: &ScanCounts) {
        self.pass += other.pass;
        self.fail += other.fail;
        self.vacuous += other.vacuous;
    }

    fn tally(&mut self, verdict: Verdict) {
        match verdict {
            Verdict::Pass => self.pass += 1,
            Verdict::Fail => self.fail += 1,
            Verdict::Vacuous => self.vacuous += 1,
        }
    }
}

/// A failing item, with enough context to replay it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FailCertificate {
    Main(Certificate),
    Classic(Certificate3k4),
    Corollary(CorollaryCertificate),
    Family {
        family: Family,
        a: IntSet,
        b: IntSet,
        details: String,
    },
    Kneser {
        x: CyclicSet,
        y: CyclicSet,
        report: KneserReport,
    },
    Kst {
        x: CyclicSet,
        y: CyclicSet,
        reason: String,
    },
    Modred {
        a: IntSet,
        b: IntSet,
        n: u32,
        subgroup: u32,
        bound: i64,
        actual: i64,
        which: String,
    },
    Redcalc {
        x: i64,
        y: i64,
        closed_form: i64,
        brute: RedcalcMin,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub config: VerifyConfig,
    pub counts: ScanCounts,
    pub fail_certificates: Vec<FailCertificate>,
    /// Not covered by the determinism contract.
    pub wall_time_ms: u64,
}

// ---------------------------------------------------------------------------
// Canonical pair enumeration over bit masks
// ---------------------------------------------------------------------------

fn bit_positions(mask: u64) -> impl Iterator<Item = u32> {
    std::iter::successors((mask != 0).then_some(mask), |&m| {
        let next = m & (m - 1);
        (next != 0).then_some(next)
    })
    .map(|m| m.trailing_zeros())
}

fn mask_gcd_star(mask: u64) -> u64 {
    let mut g = 0u64;
    let mut m = mask;
    while m != 0 {
        let p = m.trailing_zeros() as u64;
        m &= m - 1;
        let (mut a, mut b) = (g, p);
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        g = a;
    }
    g
}

fn mask_reflect(mask: u64) -> u64 {
    let high = 63 - mask.leading_zeros();
    mask.reverse_bits() >> (63 - high)
}

fn mask_sumset(a: u64, b: u64) -> u64 {
    let mut acc = 0u64;
    let mut m = a;
    while m != 0 {
        acc |= b << m.trailing_zeros();
        m &= m - 1;
    }
    acc
}

/// Pair lex order on element sequences: is `(a, b) <= (reflect a, reflect b)`?
fn pair_is_reflection_canonical(a: u64, b: u64) -> bool {
    let ra = mask_reflect(a);
    match bit_positions(a).cmp(bit_positions(ra)) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => bit_positions(b).cmp(bit_positions(mask_reflect(b))).is_le(),
    }
}

/// All masks over `[0, max_diam]` containing 0 and within the size cap.
fn candidate_masks(max_diam: u32, max_size: Option<usize>) -> Vec<u64> {
    let cap = max_size.unwrap_or(usize::MAX);
    (0..1u64 << max_diam)
        .map(|m| (m << 1) | 1)
        .filter(|m| (m.count_ones() as usize) <= cap)
        .collect()
}

fn pair_is_canonical(a: u64, b: u64) -> bool {
    let gd = {
        let (mut x, mut y) = (mask_gcd_star(a), mask_gcd_star(b));
        while y != 0 {
            let t = x % y;
            x = y;
            y = t;
        }
        x
    };
    gd <= 1 && pair_is_reflection_canonical(a, b)
}

// ---------------------------------------------------------------------------
// Scan engine
// ---------------------------------------------------------------------------

struct ItemOutcome {
    counts: ScanCounts,
    fails: Vec<FailCertificate>,
}

impl ItemOutcome {
    fn new() -> Self {
        ItemOutcome {
            counts: ScanCounts::default(),
            fails: Vec::new(),
        }
    }

    fn record(&mut self, verdict: Verdict, fail: impl FnOnce() -> FailCertificate) {
        self.counts.tally(verdict);
        if verdict == Verdict::Fail {
            self.fails.push(fail());
        }
    }
}

const CHUNK: usize = 128;

fn run_items<T, F>(
    items: &[T],
    parallel: bool,
    per_item: F,
    on_fail: &mut dyn FnMut(&FailCertificate),
) -> Result<(ScanCounts, Vec<FailCertificate>)>
where
    T: Sync,
    F: Fn(&T) -> Result<ItemOutcome> + Sync,
{
    let mut counts = ScanCounts::default();
    let mut fails = Vec::new();
    for chunk in items.chunks(CHUNK) {
        #[cfg(feature = "parallel")]
        let results: Vec<Result<ItemOutcome>> = if parallel {
            chunk.par_iter().map(&per_item).collect()
        } else {
            chunk.iter().map(&per_item).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let results: Vec<Result<ItemOutcome>> = {
            let _ = parallel;
            chunk.iter().map(&per_item).collect()
        };
        for out in results {
            let out = out?;
            counts.absorb(&out.counts);
            for cert in out.fails {
                on_fail(&cert);
                fails.push(cert);
            }
        }
    }
    Ok((counts, fails))
}

fn sharded<T>(items: Vec<T>, shard: ShardSpec) -> Vec<T> {
    items
        .into_iter()
        .enumerate()
        .filter(|(i, _)| *i as u32 % shard.count == shard.index)
        .map(|(_, v)| v)
        .collect()
}

/// Runs a scan, forwarding failures to the sink as they are aggregated.
pub fn scan_with_sink(
    config: &VerifyConfig,
    mut on_fail: impl FnMut(&FailCertificate),
) -> Result<ScanReport> {
    config.validate()?;
    let start = Instant::now();
    let sink: &mut dyn FnMut(&FailCertificate) = &mut on_fail;
    let (counts, fail_certificates) = match config.mode.clone() {
        ScanMode::MainTheorem => scan_theorem_pairs(config, sink, 3, |a, b| {
            let cert = verify_main(a, b)?;
            Ok((cert.verdict, FailCertificate::Main(cert)))
        }),
        ScanMode::Classic3k4 => scan_theorem_pairs(config, sink, 1, |a, b| {
            let cert = verify_classic_3k4(a, b)?;
            Ok((cert.verdict, FailCertificate::Classic(cert)))
        }),
        ScanMode::Corollary => scan_theorem_pairs(config, sink, 1, |a, b| {
            let cert = verify_corollary(a, b)?;
            Ok((cert.verdict, FailCertificate::Corollary(cert)))
        }),
        ScanMode::Modred => scan_modred(config, sink),
        ScanMode::Families => scan_families(config, sink),
        ScanMode::Kst { max_n } => scan_kst(config, max_n, sink),
        ScanMode::Kneser {
            max_n,
            random_pairs,
            random_max_n,
            seed,
        } => scan_kneser(config, max_n, random_pairs, random_max_n, seed, sink),
        ScanMode::Redcalc { x_max, y_max } => scan_redcalc(config, x_max, y_max, sink),
    }?;
    Ok(ScanReport {
        config: config.clone(),
        counts,
        fail_certificates,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

/// Runs a scan and collects the report.
pub fn scan(config: &VerifyConfig) -> Result<ScanReport> {
    scan_with_sink(config, |_| {})
}

fn scan_theorem_pairs<F>(
    config: &VerifyConfig,
    on_fail: &mut dyn FnMut(&FailCertificate),
    min_b: u32,
    check: F,
) -> Result<(ScanCounts, Vec<FailCertificate>)>
where
    F: Fn(&IntSet, &IntSet) -> Result<(Verdict, FailCertificate)> + Sync,
{
    let a_masks = sharded(
        candidate_masks(config.max_diam, config.max_size_a),
        config.shard,
    );
    let b_masks = candidate_masks(config.max_diam, config.max_size_b);
    let per_item = |a_mask: &u64| -> Result<ItemOutcome> {
        let a = IntSet::from_mask(*a_mask);
        let mut out = ItemOutcome::new();
        for &bm in &b_masks {
            if bm.count_ones() < min_b || !pair_is_canonical(*a_mask, bm) {
                continue;
            }
            let (verdict, cert) = check(&a, &IntSet::from_mask(bm))?;
            out.record(verdict, move || cert);
        }
        Ok(out)
    };
    run_items(&a_masks, config.parallel, per_item, on_fail)
}

fn scan_modred(
    config: &VerifyConfig,
    on_fail: &mut dyn FnMut(&FailCertificate),
) -> Result<(ScanCounts, Vec<FailCertificate>)> {
    let max_diam = config.max_diam;
    let a_masks = sharded(
        candidate_masks(max_diam, config.max_size_a),
        config.shard,
    );
    let b_masks = candidate_masks(max_diam, config.max_size_b);
    // Layered reductions of each B at each modulus and the coset tables of
    // every subgroup, shared across all A items.
    let b_layers: Vec<Vec<LayeredSet>> = b_masks
        .iter()
        .map(|&bm| {
            let b = IntSet::from_mask(bm);
            (2..=max_diam).map(|n| layered(&b, n).unwrap()).collect()
        })
        .collect();
    let subgroups: Vec<Vec<(Subgroup, Vec<CyclicSet>)>> = (0..=max_diam)
        .map(|n| {
            if n < 2 {
                return Vec::new();
            }
            Subgroup::all(n)
                .into_iter()
                .map(|h| {
                    let cosets = coset_table(&h);
                    (h, cosets)
                })
                .collect()
        })
        .collect();

    let per_item = |a_mask: &u64| -> Result<ItemOutcome> {
        let a = IntSet::from_mask(*a_mask);
        let a_layers: Vec<LayeredSet> = (2..=max_diam).map(|n| layered(&a, n).unwrap()).collect();
        let mut out = ItemOutcome::new();
        for (bi, &bm) in b_masks.iter().enumerate() {
            if !pair_is_canonical(*a_mask, bm) {
                continue;
            }
            let actual = mask_sumset(*a_mask, bm).count_ones() as i64;
            let mut violations = Vec::new();
            for n in 2..=max_diam {
                let at = &a_layers[(n - 2) as usize];
                let bt = &b_layers[bi][(n - 2) as usize];
                let ct = layered_sumset(at, bt)?;
                let base = ct.total_len() as i64;
                for (h, cosets) in &subgroups[n as usize] {
                    let bound = base + delta_total_with(at, bt, &ct, h, cosets);
                    if bound > actual {
                        violations.push(FailCertificate::Modred {
                            a: a.clone(),
                            b: IntSet::from_mask(bm),
                            n,
                            subgroup: h.generator(),
                            bound,
                            actual,
                            which: "layered".into(),
                        });
                    }
                }
            }
            let nc = 63 - bm.leading_zeros();
            if nc >= 2 {
                // min B = 0 and n = max B by construction of the enumeration.
                let a0 = CyclicSet::from_iter_mod(nc, bit_positions(*a_mask).map(|p| p % nc));
                let b0 = CyclicSet::from_iter_mod(nc, bit_positions(bm).map(|p| p % nc));
                let a0_b0 = c_sumset(&a0, &b0)?.len() as i64;
                let a_size = a.len() as i64;
                for (h, cosets) in &subgroups[nc as usize] {
                    let outside = corollary_outside_with(&a0, &b0, h, cosets)?;
                    let bound = a0_b0 + a_size + outside.iter().map(|(_, d)| d).sum::<i64>();
                    if bound > actual {
                        violations.push(FailCertificate::Modred {
                            a: a.clone(),
                            b: IntSet::from_mask(bm),
                            n: nc,
                            subgroup: h.generator(),
                            bound,
                            actual,
                            which: "corollary".into(),
                        });
                    }
                }
            }
            if violations.is_empty() {
                out.counts.pass += 1;
            } else {
                out.counts.fail += 1;
                out.fails.extend(violations);
            }
        }
        Ok(out)
    };
    run_items(&a_masks, config.parallel, per_item, on_fail)
}

fn scan_families(
    config: &VerifyConfig,
    on_fail: &mut dyn FnMut(&FailCertificate),
) -> Result<(ScanCounts, Vec<FailCertificate>)> {
    let instances = sharded(tightness_sweep(), config.shard);
    let per_item = |inst: &FamilyInstance| -> Result<ItemOutcome> {
        let mut out = ItemOutcome::new();
        let check = check_family(inst)?;
        let verdict = if check.ok { Verdict::Pass } else { Verdict::Fail };
        out.record(verdict, || FailCertificate::Family {
            family: inst.family,
            a: inst.a.clone(),
            b: inst.b.clone(),
            details: check.details,
        });
        Ok(out)
    };
    run_items(&instances, config.parallel, per_item, on_fail)
}

fn cyclic_items(n_range: std::ops::RangeInclusive<u32>, shard: ShardSpec) -> Vec<(u32, u64)> {
    let mut items = Vec::new();
    for n in n_range {
        for x in 1..(1u64 << n) {
            items.push((n, x));
        }
    }
    sharded(items, shard)
}

fn scan_kst(
    config: &VerifyConfig,
    max_n: u32,
    on_fail: &mut dyn FnMut(&FailCertificate),
) -> Result<(ScanCounts, Vec<FailCertificate>)> {
    let items = cyclic_items(2..=max_n, config.shard);
    let per_item = |&(n, xm): &(u32, u64)| -> Result<ItemOutcome> {
        let x = CyclicSet::from_mask(n, xm);
        let mut out = ItemOutcome::new();
        for ym in 1..(1u64 << n) {
            let y = CyclicSet::from_mask(n, ym);
            let mut reasons = Vec::new();

            // The punctured-sumset identity must hold on every type-III pair.
            let (xs, ys, t) = classify_reduced(&x, &y);
            if let ElementaryType::TypeIII { unique_sum } = t {
                if !punctured_check_at(&xs, &ys, unique_sum) {
                    reasons.push("punctured identity failed on a type-III pair".to_string());
                }
            }

            let eligible = kst_eligible(&x, &y)?;
            if eligible {
                match kst_witness(&x, &y) {
                    Ok(_) => {}
                    Err(Error::Falsified(msg)) => reasons.push(msg),
                    Err(e) => return Err(e),
                }
            }

            if !reasons.is_empty() {
                out.counts.fail += 1;
                for reason in reasons {
                    out.fails.push(FailCertificate::Kst {
                        x: x.clone(),
                        y: y.clone(),
                        reason,
                    });
                }
            } else if eligible {
                out.counts.pass += 1;
            } else {
                out.counts.vacuous += 1;
            }
        }
        Ok(out)
    };
    run_items(&items, config.parallel, per_item, on_fail)
}

fn scan_kneser(
    config: &VerifyConfig,
    max_n: u32,
    random_pairs: u64,
    random_max_n: u32,
    seed: u64,
    on_fail: &mut dyn FnMut(&FailCertificate),
) -> Result<(ScanCounts, Vec<FailCertificate>)> {
    let items = cyclic_items(1..=max_n, config.shard);
    let per_item = |&(n, xm): &(u32, u64)| -> Result<ItemOutcome> {
        let x = CyclicSet::from_mask(n, xm);
        let mut out = ItemOutcome::new();
        for ym in 1..(1u64 << n) {
            let y = CyclicSet::from_mask(n, ym);
            let report = kneser_check(&x, &y)?;
            let verdict = if report.holds {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            out.record(verdict, || FailCertificate::Kneser {
                x: x.clone(),
                y: y.clone(),
                report,
            });
        }
        Ok(out)
    };
    let (mut counts, mut fails) = run_items(&items, config.parallel, per_item, on_fail)?;

    if random_pairs > 0 {
        let mut rng = SplitMix64(seed);
        let mut triples = Vec::with_capacity(random_pairs as usize);
        for _ in 0..random_pairs {
            let n = 2 + (rng.next() % (random_max_n as u64 - 1)) as u32;
            let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let xm = (rng.next() & full).max(1);
            let ym = (rng.next() & full).max(1);
            triples.push((n, xm, ym));
        }
        let triples = sharded(triples, config.shard);
        let per_random = |&(n, xm, ym): &(u32, u64, u64)| -> Result<ItemOutcome> {
            let x = CyclicSet::from_mask(n, xm);
            let y = CyclicSet::from_mask(n, ym);
            let report = kneser_check(&x, &y)?;
            let mut out = ItemOutcome::new();
            let verdict = if report.holds {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            out.record(verdict, || FailCertificate::Kneser { x, y, report });
            Ok(out)
        };
        let (rc, rf) = run_items(&triples, config.parallel, per_random, on_fail)?;
        counts.absorb(&rc);
        fails.extend(rf);
    }
    Ok((counts, fails))
}

fn scan_redcalc(
    config: &VerifyConfig,
    x_max: i64,
    y_max: i64,
    on_fail: &mut dyn FnMut(&FailCertificate),
) -> Result<(ScanCounts, Vec<FailCertificate>)> {
    let xs = sharded((1..=x_max).collect(), config.shard);
    let per_item = |&x: &i64| -> Result<ItemOutcome> {
        let mut out = ItemOutcome::new();
        for y in 3..=y_max {
            let closed = redcalc_closed_form(x, y)?;
            let brute = redcalc_brute_min(x, y)?;
            let verdict = if closed == brute.value {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            out.record(verdict, || FailCertificate::Redcalc {
                x,
                y,
                closed_form: closed,
                brute,
            });
        }
        Ok(out)
    };
    run_items(&xs, config.parallel, per_item, on_fail)
}

struct SplitMix64(u64);

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(e: &[i64]) -> IntSet {
        IntSet::from_elements(e.iter().copied()).unwrap()
    }

    #[test]
    fn verify_main_examples() {
        let cert = verify_main(&set(&[0, 1, 2, 3]), &set(&[0, 1, 2])).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass);
        assert_eq!(cert.r, -1);
        assert_eq!(cert.s, Some(2));
        assert!(cert.hypothesis_met);
        assert_eq!(cert.cover.len, 3);

        // Tightness instance: B = [0,3] u {6}, A = [0,9].
        let b = set(&[0, 1, 2, 3, 6]);
        let a = set(&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
        let cert = verify_main(&a, &b).unwrap();
        assert_eq!(cert.r, 1);
        assert_eq!(cert.s, Some(2));
        assert_eq!(
            cert.threshold,
            Some(Rational::new(39, 2).unwrap())
        );
        assert!(cert.hypothesis_met);
        assert_eq!(cert.verdict, Verdict::Pass);
        assert_eq!(cert.cover.len, cert.cover_bound);
    }

    #[test]
    fn verify_main_small_b_is_vacuous_with_note() {
        let cert = verify_main(&IntSet::singleton(0), &IntSet::singleton(0)).unwrap();
        assert_eq!(cert.verdict, Verdict::Vacuous);
        assert!(cert.note.is_some());
        assert_eq!(cert.s, None);
    }

    #[test]
    fn verify_classic_examples() {
        let fam = set(&[0, 2, 4, 5, 6]);
        let cert = verify_classic_3k4(&fam, &fam).unwrap();
        assert_eq!((cert.r, cert.delta), (1, 1));
        assert!(cert.hypothesis_met); // r = 1 <= 5 - 3 - 1
        assert_eq!(cert.diff, 1);
        assert_eq!(cert.cover_a.len, cert.cover_a_bound);
        assert_eq!(cert.cover_b.len, cert.cover_b_bound);
        assert_eq!(cert.longest_run, 9);
        assert_eq!(cert.verdict, Verdict::Pass);

        // Translate pair {0,1}: r = -1 > 2 - 3 - 1, so vacuous.
        let tiny = set(&[0, 1]);
        let cert = verify_classic_3k4(&tiny, &tiny).unwrap();
        assert_eq!(cert.verdict, Verdict::Vacuous);
    }

    #[test]
    fn classic_detects_translates() {
        let a = set(&[0, 2, 3]);
        let b = set(&[5, 7, 8]);
        assert_eq!(verify_classic_3k4(&a, &b).unwrap().delta, 1);
        assert_eq!(verify_classic_3k4(&a, &set(&[0, 1, 3])).unwrap().delta, 0);
    }

    #[test]
    fn verify_corollary_small_b_convention() {
        let cert = verify_corollary(&set(&[0, 5]), &set(&[0, 7])).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass);
        assert_eq!(cert.hypothesis_met, None);
    }

    #[test]
    fn certificates_are_affine_invariant() {
        let pairs = [
            (set(&[0, 1, 2, 3]), set(&[0, 1, 2])),
            (set(&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]), set(&[0, 1, 2, 3, 6])),
            (set(&[0, 2, 4, 5, 6]), set(&[0, 2, 4, 5, 6])),
        ];
        for (a, b) in pairs {
            let base = verify_main(&a, &b).unwrap();
            for (scale, ta, tb) in [(1i64, 7, -3), (-1, 0, 0), (2, -5, 11), (-3, 100, 40)] {
                let a2 = a.dilate(scale).unwrap().translate(ta).unwrap();
                let b2 = b.dilate(scale).unwrap().translate(tb).unwrap();
                let img = verify_main(&a2, &b2).unwrap();
                assert_eq!(img.verdict, base.verdict);
                assert_eq!(img.r, base.r);
                assert_eq!(img.s, base.s);
                assert_eq!(img.cover.len, base.cover.len);
            }
        }
    }

    fn quick(mode: ScanMode, diam: u32) -> VerifyConfig {
        VerifyConfig::new(mode).with_max_diam(diam)
    }

    #[test]
    fn scan_main_small_has_zero_failures() {
        let report = scan(&quick(ScanMode::MainTheorem, 6)).unwrap();
        assert_eq!(report.counts.fail, 0);
        assert!(report.counts.pass > 0);
        assert!(report.fail_certificates.is_empty());
    }

    #[test]
    fn scan_classic_small_has_zero_failures() {
        let report = scan(&quick(ScanMode::Classic3k4, 6)).unwrap();
        assert_eq!(report.counts.fail, 0);
        assert!(report.counts.pass > 0);
    }

    #[test]
    fn scan_corollary_small_has_zero_failures() {
        let report = scan(&quick(ScanMode::Corollary, 6)).unwrap();
        assert_eq!(report.counts.fail, 0);
        assert!(report.counts.pass > 0);
    }

    #[test]
    fn scan_modred_small_has_zero_failures() {
        let report = scan(&quick(ScanMode::Modred, 5)).unwrap();
        assert_eq!(report.counts.fail, 0);
        assert!(report.counts.pass > 0);
        assert_eq!(report.counts.pass + report.counts.vacuous, canonical_pair_count(5));
    }

    #[test]
    fn scan_kst_small_has_zero_falsifications() {
        let report = scan(&VerifyConfig::new(ScanMode::Kst { max_n: 6 })).unwrap();
        assert_eq!(report.counts.fail, 0);
        assert!(report.counts.pass > 0);
    }

    #[test]
    fn scan_kneser_small_has_zero_violations() {
        let report = scan(&VerifyConfig::new(ScanMode::Kneser {
            max_n: 6,
            random_pairs: 2000,
            random_max_n: 20,
            seed: 7,
        }))
        .unwrap();
        assert_eq!(report.counts.fail, 0);
        let full: u64 = (1..=6u32).map(|n| ((1u64 << n) - 1).pow(2)).sum();
        assert_eq!(report.counts.pass, full + 2000);
    }

    #[test]
    fn scan_redcalc_small_grid_agrees() {
        let report = scan(&VerifyConfig::new(ScanMode::Redcalc {
            x_max: 40,
            y_max: 30,
        }))
        .unwrap();
        assert_eq!(report.counts.fail, 0);
        assert_eq!(report.counts.pass, 40 * 28);
    }

    #[test]
    fn scan_families_sweep_passes() {
        let report = scan(&VerifyConfig::new(ScanMode::Families)).unwrap();
        assert_eq!(report.counts.fail, 0);
        assert!(report.counts.pass > 700);
    }

    fn canonical_pair_count(diam: u32) -> u64 {
        let masks = candidate_masks(diam, None);
        let mut count = 0;
        for &a in &masks {
            for &b in &masks {
                if pair_is_canonical(a, b) {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn size_caps_restrict_the_universe() {
        let full = scan(&quick(ScanMode::MainTheorem, 6)).unwrap();
        let mut capped_cfg = quick(ScanMode::MainTheorem, 6);
        capped_cfg.max_size_a = Some(3);
        capped_cfg.max_size_b = Some(4);
        let capped = scan(&capped_cfg).unwrap();
        assert_eq!(capped.counts.fail, 0);
        let total = |c: &ScanCounts| c.pass + c.vacuous;
        assert!(total(&capped.counts) < total(&full.counts));
        assert!(capped.counts.pass > 0);
    }

    #[test]
    fn shard_union_matches_unsharded() {
        let full = scan(&quick(ScanMode::MainTheorem, 6)).unwrap();
        let mut merged = ScanCounts::default();
        for index in 0..3 {
            let cfg = quick(ScanMode::MainTheorem, 6).with_shard(ShardSpec { index, count: 3 });
            merged.absorb(&scan(&cfg).unwrap().counts);
        }
        assert_eq!(merged, full.counts);
    }

    #[test]
    fn scan_is_deterministic_and_parallel_agnostic() {
        let cfg = quick(ScanMode::MainTheorem, 6);
        let r1 = scan(&cfg).unwrap();
        let r2 = scan(&cfg).unwrap();
        let strip = |mut r: ScanReport| {
            r.wall_time_ms = 0;
            serde_json::to_string(&r).unwrap()
        };
        assert_eq!(strip(r1.clone()), strip(r2));
        let seq = scan(&cfg.clone().sequential()).unwrap();
        assert_eq!(seq.counts, r1.counts);
    }

    #[test]
    fn config_guards() {
        assert!(scan(&quick(ScanMode::MainTheorem, 17)).is_err());
        assert!(scan(&quick(ScanMode::MainTheorem, 0)).is_err());
        assert!(scan(&VerifyConfig::new(ScanMode::Kst { max_n: 13 })).is_err());
        assert!(scan(&VerifyConfig::new(ScanMode::Kneser {
            max_n: 4,
            random_pairs: 10,
            random_max_n: 65,
            seed: 0,
        }))
        .is_err());
        let bad_shard = quick(ScanMode::MainTheorem, 4).with_shard(ShardSpec { index: 2, count: 2 });
        assert!(scan(&bad_shard).is_err());
    }

    #[test]
    fn mask_helpers_match_intset() {
        for mask in [1u64, 0b1011, 0b100101, 0b111111, 0b1000001] {
            let s = IntSet::from_mask(mask);
            assert_eq!(mask_gcd_star(mask) as i64, s.gcd_star());
            let r = s.reflect();
            assert_eq!(IntSet::from_mask(mask_reflect(mask)), r);
        }
        assert_eq!(
            mask_sumset(0b1011, 0b101).count_ones() as usize,
            IntSet::from_mask(0b1011)
                .sumset(&IntSet::from_mask(0b101))
                .unwrap()
                .len()
        );
    }

    #[test]
    fn canonical_predicate_matches_canonical_pair() {
        // The mask predicate accepts exactly the pairs fixed by canonical_pair.
        let masks = candidate_masks(5, None);
        for &am in &masks {
            for &bm in &masks {
                let a = IntSet::from_mask(am);
                let b = IntSet::from_mask(bm);
                let joint = {
                    let (mut x, mut y) = (a.gcd_star() as u64, b.gcd_star() as u64);
                    while y != 0 {
                        let t = x % y;
                        x = y;
                        y = t;
                    }
                    x
                };
                if joint > 1 {
                    assert!(!pair_is_canonical(am, bm));
                    continue;
                }
                let (ca, cb) = crate::intset::canonical_pair(&a, &b);
                let is_fixed = ca == a && cb == b;
                assert_eq!(pair_is_canonical(am, bm), is_fixed, "a={a} b={b}");
            }
        }
    }
}
