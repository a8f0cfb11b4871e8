//! The scalar side of the theory: the bucketing parameter s, the sharp
//! doubling threshold `(|A|/s + |B|/2 - 1)(s + 1)`, the integer minimization
//! it solves, and the radical-free consequences. All comparisons are exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intset::IntSet;
use crate::rational::Rational;

/// `(s-1)s(b/2-1) + s - 1`; integral because `(s-1)s` is even.
fn lower_edge(s: i128, b: i128) -> i128 {
    (s - 1) * s * (b - 2) / 2 + s - 1
}

/// `s(s+1)(b/2-1) + s`; equals `lower_edge(s+1, b)`, so the buckets tile.
fn upper_edge(s: i128, b: i128) -> i128 {
    s * (s + 1) * (b - 2) / 2 + s
}

/// The unique s >= 1 with `lower_edge(s) < a <= upper_edge(s)`.
pub fn compute_s(a: i64, b: i64) -> Result<i64> {
    if a < 1 {
        return Err(Error::invalid(format!("|A| = {a} must be at least 1")));
    }
    if b < 3 {
        return Err(Error::invalid(format!("|B| = {b} must be at least 3")));
    }
    let (a, b) = (a as i128, b as i128);
    let mut hi: i128 = 1;
    while upper_edge(hi, b) < a {
        hi *= 2;
    }
    let mut lo: i128 = 1;
    // Smallest s with a <= upper_edge(s).
    while lo < hi {
        let mid = (lo + hi) / 2;
        if upper_edge(mid, b) >= a {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let s = lo;
    let fits = |s: i128| s >= 1 && lower_edge(s, b) < a && a <= upper_edge(s, b);
    assert!(
        fits(s) && !fits(s - 1) && !fits(s + 1),
        "bucket uniqueness violated for a={a} b={b}"
    );
    Ok(s as i64)
}

/// `(a/s + b/2 - 1)(s+1)` as an exact rational; `s` must be `compute_s(a, b)`.
pub fn theorem_threshold(a: i64, b: i64, s: i64) -> Result<Rational> {
    if compute_s(a, b)? != s {
        return Err(Error::invalid(format!(
            "s = {s} is not the bucket parameter for a={a}, b={b}"
        )));
    }
    let (a, b, s) = (a as i128, b as i128, s as i128);
    Rational::new((2 * a + s * (b - 2)) * (s + 1), 2 * s)
}

/// The doubling hypothesis at the sharp threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub r: i64,
    pub s: i64,
    pub threshold: Rational,
    pub holds: bool,
}

/// Decides `|A+B| < (|A|/s + |B|/2 - 1)(s+1)` by cross-multiplied integer
/// comparison; requires `|B| >= 3`.
pub fn hypothesis_holds(a: &IntSet, b: &IntSet) -> Result<HypothesisReport> {
    hypothesis_holds_with(a.sumset(b)?.len() as i64, a.len() as i64, b.len() as i64)
}

/// Same decision from an already-computed `|A+B|`.
pub fn hypothesis_holds_with(sum_size: i64, ka: i64, kb: i64) -> Result<HypothesisReport> {
    if kb < 3 {
        return Err(Error::invalid(format!(
            "|B| = {kb} below 3; pairs this small are covered by the small-B convention"
        )));
    }
    let s = compute_s(ka, kb)?;
    let threshold = theorem_threshold(ka, kb, s)?;
    let holds = 2 * (s as i128) * (sum_size as i128)
        < (2 * ka as i128 + s as i128 * (kb as i128 - 2)) * (s as i128 + 1);
    debug_assert_eq!(holds, Rational::from_int(sum_size as i128) < threshold);
    Ok(HypothesisReport {
        r: sum_size - ka - kb,
        s,
        threshold,
        holds,
    })
}

fn ceil_div(num: i128, den: i128) -> i128 {
    num.div_euclid(den) + i128::from(num.rem_euclid(den) != 0)
}

/// `ceil((x/m + y/n - 1)(m + n - 1))` in exact integers.
fn box_value(x: i128, y: i128, m: i128, n: i128) -> i128 {
    ceil_div((x * n + y * m - m * n) * (m + n - 1), m * n)
}

/// `ceil((x/s + y/2 - 1)(s+1))` at the bucket parameter.
pub fn redcalc_closed_form(x: i64, y: i64) -> Result<i64> {
    let s = compute_s(x, y)? as i128;
    Ok(box_value(x as i128, y as i128, s, 2) as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedcalcMin {
    pub value: i64,
    pub argmin: (i64, i64),
}

/// Exact minimum of `ceil((x/m + y/n - 1)(m+n-1))` over the integer box
/// `1 <= m <= x`, `2 <= n <= y/3 + 1`; ties resolved to the smallest `(m, n)`.
pub fn redcalc_brute_min(x: i64, y: i64) -> Result<RedcalcMin> {
    if x < 1 {
        return Err(Error::invalid(format!("x = {x} must be at least 1")));
    }
    if y < 3 {
        return Err(Error::invalid(format!("y = {y} must be at least 3")));
    }
    let n_max = (y + 3) / 3; // n <= y/3 + 1 over the integers
    let mut best: Option<RedcalcMin> = None;
    for m in 1..=x {
        for n in 2..=n_max {
            let value = box_value(x as i128, y as i128, m as i128, n as i128) as i64;
            let better = match &best {
                None => true,
                Some(b) => value < b.value,
            };
            if better {
                best = Some(RedcalcMin {
                    value,
                    argmin: (m, n),
                });
            }
        }
    }
    Ok(best.expect("the box always contains (1, 2)"))
}

/// Decides `(x/s + y/2 - 1)(s+1) >= x + y/2 - 1 + 2*sqrt(x(y/2-1))` without
/// radicals: with `L = x/s + s(y/2-1) > 0`, this is `L^2 >= 4x(y/2-1)`.
/// Always true; a `false` return is a falsification event.
pub fn rough_estimate_holds(x: Rational, y: Rational, s: Rational) -> Result<bool> {
    if !x.is_positive() || !s.is_positive() {
        return Err(Error::invalid("x and s must be positive"));
    }
    let half_y_less_1 = y * Rational::new(1, 2).unwrap() - Rational::ONE;
    if !half_y_less_1.is_positive() {
        return Err(Error::invalid("y must exceed 2"));
    }
    let l = x / s + s * half_y_less_1;
    debug_assert!(l.is_positive());
    Ok(l * l >= Rational::from_int(4) * x * half_y_less_1)
}

/// Decides `|A+B| < |A| + |B|/2 - 1 + 2*sqrt(|A|(|B|/2-1))` exactly: with
/// `T = |A+B| - |A| - |B|/2 + 1`, the inequality is `T < 0` or
/// `T^2 < 4|A|(|B|/2-1)`. The sign guard must run before squaring.
pub fn corollary_hypothesis_holds(a: &IntSet, b: &IntSet) -> Result<bool> {
    corollary_hypothesis_holds_with(a.sumset(b)?.len() as i64, a.len() as i64, b.len() as i64)
}

/// Same decision from an already-computed `|A+B|`.
pub fn corollary_hypothesis_holds_with(sum_size: i64, ka: i64, kb: i64) -> Result<bool> {
    if kb < 3 {
        return Err(Error::invalid(format!(
            "|B| = {kb} below 3; the small-B convention applies instead"
        )));
    }
    let (sum_size, ka, kb) = (sum_size as i128, ka as i128, kb as i128);
    let t = Rational::from_int(sum_size) - Rational::from_int(ka) - Rational::new(kb, 2)?
        + Rational::ONE;
    if t.is_negative() {
        return Ok(true);
    }
    Ok(t * t < Rational::from_int(2 * ka * (kb - 2)))
}
