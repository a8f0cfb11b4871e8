//! Planar machinery: lifting residue-progression pairs into Z^2 without
//! changing their additive structure, linear compression, and the discrete
//! two-dimensional Brunn-Minkowski lower bound.

use std::collections::BTreeSet;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::intset::IntSet;

/// A finite nonempty set of integer points, kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid2DSet {
    points: Vec<(i64, i64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl Grid2DSet {
    pub fn new<I: IntoIterator<Item = (i64, i64)>>(points: I) -> Result<Grid2DSet> {
        let mut pts: Vec<(i64, i64)> = points.into_iter().collect();
        if pts.is_empty() {
            return Err(Error::EmptySet);
        }
        pts.sort_unstable();
        for w in pts.windows(2) {
            if w[0] == w[1] {
                return Err(Error::invalid(format!("duplicate point {:?}", w[0])));
            }
        }
        Ok(Grid2DSet { points: pts })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[(i64, i64)] {
        &self.points
    }

    pub fn contains(&self, p: (i64, i64)) -> bool {
        self.points.binary_search(&p).is_ok()
    }

    pub fn sumset(&self, other: &Grid2DSet) -> Result<Grid2DSet> {
        let mut out = BTreeSet::new();
        for &(u1, v1) in &self.points {
            for &(u2, v2) in &other.points {
                out.insert((
                    u1.checked_add(u2).ok_or(Error::Overflow)?,
                    v1.checked_add(v2).ok_or(Error::Overflow)?,
                ));
            }
        }
        Ok(Grid2DSet {
            points: out.into_iter().collect(),
        })
    }

    /// Number of lines parallel to the axis that intersect the set: distinct
    /// v-coordinates for the horizontal axis, distinct u-coordinates for the
    /// vertical one.
    pub fn lines_parallel(&self, axis: Axis) -> usize {
        let coords: BTreeSet<i64> = self
            .points
            .iter()
            .map(|&(u, v)| match axis {
                Axis::Horizontal => v,
                Axis::Vertical => u,
            })
            .collect();
        coords.len()
    }
}

/// Replaces each line parallel to the axis by a run of the same number of
/// consecutive points anchored at the other axis; cardinality is preserved.
pub fn compress(s: &Grid2DSet, axis: Axis) -> Grid2DSet {
    let mut counts: std::collections::BTreeMap<i64, i64> = std::collections::BTreeMap::new();
    for &(u, v) in s.points() {
        let key = match axis {
            Axis::Horizontal => v,
            Axis::Vertical => u,
        };
        *counts.entry(key).or_insert(0) += 1;
    }
    let mut pts = Vec::with_capacity(s.len());
    for (key, count) in counts {
        for i in 0..count {
            pts.push(match axis {
                Axis::Horizontal => (i, key),
                Axis::Vertical => (key, i),
            });
        }
    }
    Grid2DSet::new(pts).expect("compression preserves nonemptiness")
}

/// `ceil((|A|/m + |B|/n - 1)(m + n - 1))` with `m`, `n` the line counts of A
/// and B parallel to the axis, in exact rational arithmetic.
///
/// The `|B|` term divides by `n`, the line count of B; dividing it by `m`
/// instead is invalid (see the regression test for a counterexample).
pub fn bm2d_bound(a: &Grid2DSet, b: &Grid2DSet, axis: Axis) -> i64 {
    let m = a.lines_parallel(axis) as i128;
    let n = b.lines_parallel(axis) as i128;
    let ka = a.len() as i128;
    let kb = b.len() as i128;
    // (ka/m + kb/n - 1)(m+n-1) = (ka*n + kb*m - m*n)(m+n-1) / (m*n)
    let num = (ka * n + kb * m - m * n) * (m + n - 1);
    let den = m * n;
    (num.div_euclid(den) + i128::from(num.rem_euclid(den) != 0)) as i64
}

/// A lift of an integer pair into Z^2 together with the element-to-point
/// correspondence that witnesses it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftOutcome {
    pub a_image: Grid2DSet,
    pub b_image: Grid2DSet,
    /// Ascending element-to-point maps backing the images.
    pub a_map: Vec<(i64, (i64, i64))>,
    pub b_map: Vec<(i64, (i64, i64))>,
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Orders the residues of a progression mod n with difference d, starting at
/// the unique residue without a predecessor (or at the anchor for a full
/// cycle of `<d>`).
fn residue_progression(
    residues: &BTreeSet<i64>,
    n: i64,
    d: i64,
    anchor: i64,
    which: &str,
) -> Result<Vec<i64>> {
    let m = residues.len();
    let ord = (n / gcd_i64(n, d)) as usize;
    if m > ord {
        return Err(Error::LiftHypothesis(format!(
            "phi_N({which}) has {m} residues, more than ord(d) = {ord}"
        )));
    }
    let start = if m == ord {
        anchor
    } else {
        let mut starts = residues
            .iter()
            .copied()
            .filter(|&r| !residues.contains(&(r - d).rem_euclid(n)));
        match (starts.next(), starts.next()) {
            (Some(s), None) => s,
            _ => {
                return Err(Error::LiftHypothesis(format!(
                    "phi_N({which}) is not an arithmetic progression with difference {d} mod {n}"
                )))
            }
        }
    };
    let mut order = Vec::with_capacity(m);
    let mut cur = start;
    for _ in 0..m {
        if !residues.contains(&cur) {
            return Err(Error::LiftHypothesis(format!(
                "phi_N({which}) is not an arithmetic progression with difference {d} mod {n}"
            )));
        }
        order.push(cur);
        cur = (cur + d).rem_euclid(n);
    }
    Ok(order)
}

fn lift_one(set: &IntSet, n: i64, d: i64, which: &str) -> Result<Vec<(i64, (i64, i64))>> {
    let residues: BTreeSet<i64> = set.iter().map(|x| x.rem_euclid(n)).collect();
    let order = residue_progression(&residues, n, d, set.min().rem_euclid(n), which)?;
    // alpha_0 is the least element in the starting residue class; the
    // class representatives then step by d as integers.
    let alpha0 = set
        .iter()
        .find(|x| x.rem_euclid(n) == order[0])
        .expect("starting residue is populated");
    let mut map = Vec::with_capacity(set.len());
    for x in set.iter() {
        let r = x.rem_euclid(n);
        let i = order.iter().position(|&o| o == r).unwrap() as i64;
        let alpha_i = alpha0
            .checked_add(i.checked_mul(d).ok_or(Error::Overflow)?)
            .ok_or(Error::Overflow)?;
        debug_assert_eq!((x - alpha_i).rem_euclid(n), 0);
        map.push((x, ((x - alpha_i) / n, i)));
    }
    Ok(map)
}

/// Lifts a pair whose residue images mod N are progressions with common
/// difference d into Z^2, row i holding the i-th residue class rebased and
/// divided by N. Requires `|phi(A)| + |phi(B)| - 1 <= ord(d)`; every failed
/// hypothesis is reported by name.
pub fn lift_to_2d(a: &IntSet, b: &IntSet, n: i64, d: i64) -> Result<LiftOutcome> {
    if n < 1 {
        return Err(Error::invalid(format!("modulus {n} must be at least 1")));
    }
    if d < 1 || d > n - 1 {
        return Err(Error::LiftHypothesis(format!(
            "difference {d} outside [1, {}]",
            n - 1
        )));
    }
    let a_map = lift_one(a, n, d, "A")?;
    let b_map = lift_one(b, n, d, "B")?;
    let m = a_map.iter().map(|&(_, (_, i))| i).max().unwrap() + 1;
    let nb = b_map.iter().map(|&(_, (_, j))| j).max().unwrap() + 1;
    let ord = n / gcd_i64(n, d);
    if m + nb - 1 > ord {
        return Err(Error::LiftHypothesis(format!(
            "|phi(A)| + |phi(B)| - 1 = {} exceeds ord(d) = {ord}",
            m + nb - 1
        )));
    }
    Ok(LiftOutcome {
        a_image: Grid2DSet::new(a_map.iter().map(|&(_, p)| p))?,
        b_image: Grid2DSet::new(b_map.iter().map(|&(_, p)| p))?,
        a_map,
        b_map,
    })
}

/// The quadruple coincidence oracle: `a + b = a' + b'` exactly when the image
/// points satisfy the same equality. Quadratic in `|A| * |B|`.
pub fn coincidence_preserving(lift: &LiftOutcome) -> bool {
    for &(a1, (x1, i1)) in &lift.a_map {
        for &(b1, (y1, j1)) in &lift.b_map {
            for &(a2, (x2, i2)) in &lift.a_map {
                for &(b2, (y2, j2)) in &lift.b_map {
                    let ints = a1 + b1 == a2 + b2;
                    let pts = (x1 + y1, i1 + j1) == (x2 + y2, i2 + j2);
                    if ints != pts {
                        return false;
                    }
                }
            }
        }
    }
    true
}

impl Serialize for Grid2DSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.points.iter().map(|&(u, v)| [u, v]))
    }
}

impl<'de> Deserialize<'de> for Grid2DSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pts = Vec::<[i64; 2]>::deserialize(deserializer)?;
        Grid2DSet::new(pts.into_iter().map(|[u, v]| (u, v))).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(p: &[(i64, i64)]) -> Grid2DSet {
        Grid2DSet::new(p.iter().copied()).unwrap()
    }

    fn set(e: &[i64]) -> IntSet {
        IntSet::from_elements(e.iter().copied()).unwrap()
    }

    #[test]
    fn grid_set_rejects_bad_input() {
        assert_eq!(Grid2DSet::new([]), Err(Error::EmptySet));
        assert!(Grid2DSet::new([(0, 0), (0, 0)]).is_err());
    }

    #[test]
    fn lift_example() {
        let a = set(&[0, 1, 10]);
        let b = set(&[0, 1, 11]);
        let lift = lift_to_2d(&a, &b, 10, 1).unwrap();
        // Row sizes (2,1) for A and (1,2) for B.
        assert_eq!(lift.a_image, grid(&[(0, 0), (1, 0), (0, 1)]));
        assert_eq!(lift.b_image, grid(&[(0, 0), (0, 1), (1, 1)]));
        let img_sum = lift.a_image.sumset(&lift.b_image).unwrap();
        assert_eq!(img_sum.len(), a.sumset(&b).unwrap().len());
        assert_eq!(img_sum.len(), 7);
        assert!(coincidence_preserving(&lift));
    }

    #[test]
    fn lift_single_residues_is_trivial() {
        let a = set(&[0, 7, 14]);
        let b = set(&[3, 10]);
        let lift = lift_to_2d(&a, &b, 7, 1).unwrap();
        assert_eq!(lift.a_image, grid(&[(0, 0), (1, 0), (2, 0)]));
        assert_eq!(lift.b_image, grid(&[(0, 0), (1, 0)]));
        assert!(coincidence_preserving(&lift));
    }

    #[test]
    fn lift_rejects_each_hypothesis_by_name() {
        let a = set(&[0, 1, 10]);
        let b = set(&[0, 1, 11]);
        // d outside range.
        assert!(matches!(
            lift_to_2d(&a, &b, 10, 0),
            Err(Error::LiftHypothesis(_))
        ));
        // A not a progression mod 10 with difference 2.
        assert!(matches!(
            lift_to_2d(&a, &b, 10, 2),
            Err(Error::LiftHypothesis(_))
        ));
        // Order too small: residues of A mod 4 with d = 2 are {0,1,2}, not a
        // d-progression; with d=1 and n=4, ord is 4 but |phi(A)|+|phi(B)|-1
        // can exceed it.
        let wide_a = set(&[0, 1, 2]);
        let wide_b = set(&[0, 1, 2, 3]);
        assert!(matches!(
            lift_to_2d(&wide_a, &wide_b, 4, 1),
            Err(Error::LiftHypothesis(_))
        ));
    }

    #[test]
    fn compress_examples() {
        let s = grid(&[(0, 0), (2, 0), (1, 1)]);
        assert_eq!(
            compress(&s, Axis::Horizontal),
            grid(&[(0, 0), (1, 0), (0, 1)])
        );
        // Idempotence on an already-compressed set.
        let c = compress(&s, Axis::Horizontal);
        assert_eq!(compress(&c, Axis::Horizontal), c);
        // Vertical compression stacks columns from v = 0.
        assert_eq!(
            compress(&s, Axis::Vertical),
            grid(&[(0, 0), (1, 0), (2, 0)])
        );
        assert_eq!(compress(&s, Axis::Vertical).len(), s.len());
    }

    #[test]
    fn compress_never_grows_the_sumset() {
        let a = grid(&[(0, 0), (3, 0), (1, 2), (2, 2), (5, 4)]);
        let b = grid(&[(0, 0), (1, 1), (4, 1)]);
        for axis in [Axis::Horizontal, Axis::Vertical] {
            let plain = a.sumset(&b).unwrap().len();
            let squeezed = compress(&a, axis)
                .sumset(&compress(&b, axis))
                .unwrap()
                .len();
            assert!(squeezed <= plain);
        }
    }

    #[test]
    fn bm2d_examples() {
        let p = grid(&[(0, 0)]);
        assert_eq!(bm2d_bound(&p, &p, Axis::Horizontal), 1);

        // Unit squares: (2 + 2 - 1) * 3 = 9 = |A+B|.
        let square = grid(&[(0, 0), (1, 0), (0, 1), (1, 1)]);
        assert_eq!(bm2d_bound(&square, &square, Axis::Horizontal), 9);
        assert_eq!(square.sumset(&square).unwrap().len(), 9);
    }

    #[test]
    fn bm2d_dividing_b_by_a_lines_is_wrong() {
        // One horizontal row versus one tall column: the valid bound is
        // |A+B| = k, while dividing |B| by A's line count m = 1 would claim
        // (1 + k - 1) * k = k^2 > |A+B|.
        let k = 5i64;
        let a = grid(&[(0, 0)]);
        let b = grid(&(0..k).map(|v| (0, v)).collect::<Vec<_>>());
        let m = a.lines_parallel(Axis::Horizontal) as i64;
        let n = b.lines_parallel(Axis::Horizontal) as i64;
        assert_eq!((m, n), (1, k));
        let truth = a.sumset(&b).unwrap().len() as i64;
        assert_eq!(truth, k);
        assert!(bm2d_bound(&a, &b, Axis::Horizontal) <= truth);
        let wrong = (a.len() as i64 / m + b.len() as i64 / m - 1) * (m + n - 1);
        assert!(wrong > truth);
    }

    #[test]
    fn grid_json_round_trip() {
        let g = grid(&[(0, 0), (2, -1)]);
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, "[[0,0],[2,-1]]");
        assert_eq!(serde_json::from_str::<Grid2DSet>(&json).unwrap(), g);
    }
}
