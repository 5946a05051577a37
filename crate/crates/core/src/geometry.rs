//! Rational directions, rectangle-union control regions and their
//! projections, GCC / MGCC checks and the non-observability witness search.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{
    a_gamma, critical_points, CircleFunction, CriticalPoint, CriticalSet, VectorPotential, DEGENERACY_TOL,
};
use crate::TWO_PI;

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Primitive periodic direction `(p, q)` in canonical sign (`p > 0`, or
/// `(0, 1)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct Direction {
    p: i32,
    q: i32,
}

impl Direction {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if gcd(p, q) != 1 || p.abs() > i32::MAX as i64 || q.abs() > i32::MAX as i64 {
            return Err(Error::NonPrimitiveDirection { p, q });
        }
        let (p, q) = if p < 0 || (p == 0 && q < 0) { (-p, -q) } else { (p, q) };
        Ok(Direction { p: p as i32, q: q as i32 })
    }

    pub fn p(&self) -> i32 {
        self.p
    }

    pub fn q(&self) -> i32 {
        self.q
    }

    pub fn norm(&self) -> f64 {
        ((self.p as f64).powi(2) + (self.q as f64).powi(2)).sqrt()
    }

    /// Length `2π/|γ|` of the transverse circle.
    pub fn circumference(&self) -> f64 {
        TWO_PI / self.norm()
    }

    /// Unit normal `γ⊥ = (-q, p)/|γ|`.
    pub fn normal(&self) -> [f64; 2] {
        let n = self.norm();
        [-self.q as f64 / n, self.p as f64 / n]
    }

    /// Transverse coordinate `s = z·γ⊥`, not reduced.
    pub fn transverse(&self, x: f64, y: f64) -> f64 {
        let [a, b] = self.normal();
        a * x + b * y
    }

    pub fn height(&self) -> i32 {
        self.p.abs().max(self.q.abs())
    }
}

impl TryFrom<(i64, i64)> for Direction {
    type Error = Error;
    fn try_from(v: (i64, i64)) -> Result<Self> {
        Direction::new(v.0, v.1)
    }
}

impl From<Direction> for (i64, i64) {
    fn from(d: Direction) -> Self {
        (d.p as i64, d.q as i64)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

/// Finite union of open axis-aligned rectangles of T², stored as disjoint
/// rectangles inside `[0, 2π]²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionSpec", into = "RegionSpec")]
pub struct Region {
    rects: Vec<[f64; 4]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionSpec {
    rects: Vec<[f64; 4]>,
}

impl TryFrom<RegionSpec> for Region {
    type Error = Error;
    fn try_from(s: RegionSpec) -> Result<Self> {
        Region::new(s.rects)
    }
}

impl From<Region> for RegionSpec {
    fn from(r: Region) -> Self {
        RegionSpec { rects: r.rects }
    }
}

/// Reduce `(a, b)` modulo 2π into pieces inside `[0, 2π]`.
fn wrap_interval(a: f64, b: f64) -> Vec<(f64, f64)> {
    if b - a >= TWO_PI {
        return vec![(0.0, TWO_PI)];
    }
    let a0 = a.rem_euclid(TWO_PI);
    let b0 = a0 + (b - a);
    if b0 <= TWO_PI {
        vec![(a0, b0)]
    } else {
        vec![(a0, TWO_PI), (0.0, b0 - TWO_PI)]
    }
}

impl Region {
    /// Rectangles `[x0, x1, y0, y1]` with `x0 < x1`, `y0 < y1`, interpreted
    /// modulo 2π.
    pub fn new(rects: Vec<[f64; 4]>) -> Result<Self> {
        let mut pieces = Vec::new();
        for r in &rects {
            if !r.iter().all(|v| v.is_finite()) || r[1] <= r[0] || r[3] <= r[2] {
                return Err(Error::invalid(format!("degenerate rectangle {r:?}")));
            }
            for (x0, x1) in wrap_interval(r[0], r[1]) {
                for (y0, y1) in wrap_interval(r[2], r[3]) {
                    if x1 > x0 && y1 > y0 {
                        pieces.push([x0, x1, y0, y1]);
                    }
                }
            }
        }
        if pieces.is_empty() {
            return Err(Error::EmptyRegion);
        }
        Ok(Region { rects: disjoint_cover(&pieces) })
    }

    pub fn full() -> Self {
        Region { rects: vec![[0.0, TWO_PI, 0.0, TWO_PI]] }
    }

    /// Horizontal strips `T_x × (y0, y1)`.
    pub fn horizontal_strips(strips: &[(f64, f64)]) -> Result<Self> {
        Region::new(strips.iter().map(|&(a, b)| [0.0, TWO_PI, a, b]).collect())
    }

    pub fn rects(&self) -> &[[f64; 4]] {
        &self.rects
    }

    pub fn area(&self) -> f64 {
        self.rects.iter().map(|r| (r[1] - r[0]) * (r[3] - r[2])).sum()
    }

    pub fn is_full(&self) -> bool {
        (self.area() - TWO_PI * TWO_PI).abs() < 1e-12
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (x, y) = (x.rem_euclid(TWO_PI), y.rem_euclid(TWO_PI));
        self.rects.iter().any(|r| x > r[0] && x < r[1] && y > r[2] && y < r[3])
    }
}

/// Disjoint rectangles covering the union, by coordinate compression.
fn disjoint_cover(pieces: &[[f64; 4]]) -> Vec<[f64; 4]> {
    let breaks = |i: usize, j: usize| {
        let mut v: Vec<f64> = pieces.iter().flat_map(|r| [r[i], r[j]]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let xs = breaks(0, 1);
    let ys = breaks(2, 3);
    let covered = |x0: f64, x1: f64, y0: f64, y1: f64| {
        let (xm, ym) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        pieces.iter().any(|r| xm > r[0] && xm < r[1] && ym > r[2] && ym < r[3])
    };
    // Per x-slab, maximal covered y-runs.
    let mut slabs: Vec<(f64, f64, Vec<(f64, f64)>)> = Vec::new();
    for xw in xs.windows(2) {
        let mut runs: Vec<(f64, f64)> = Vec::new();
        for yw in ys.windows(2) {
            if !covered(xw[0], xw[1], yw[0], yw[1]) {
                continue;
            }
            match runs.last_mut() {
                Some(last) if last.1 == yw[0] => last.1 = yw[1],
                _ => runs.push((yw[0], yw[1])),
            }
        }
        match slabs.last_mut() {
            Some(last) if last.1 == xw[0] && last.2 == runs => last.1 = xw[1],
            _ => slabs.push((xw[0], xw[1], runs)),
        }
    }
    slabs.into_iter().flat_map(|(x0, x1, runs)| runs.into_iter().map(move |(y0, y1)| [x0, x1, y0, y1])).collect()
}

/// Union of arcs on a circle of circumference `ℓ`. Arcs are stored as
/// `(start, end)` with `start ∈ [0, ℓ)` and `start < end < start + ℓ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSet {
    ell: f64,
    full: bool,
    arcs: Vec<(f64, f64)>,
}

/// Position of a point relative to an [`ArcSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Containment {
    Inside,
    Boundary,
    Outside,
}

impl ArcSet {
    pub fn new(ell: f64, arcs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let eps = 1e-12 * ell;
        let mut v: Vec<(f64, f64)> = Vec::new();
        for (a, b) in arcs {
            if b - a >= ell - eps {
                return ArcSet::full(ell);
            }
            if b > a {
                let s = a.rem_euclid(ell);
                v.push((s, s + (b - a)));
            }
        }
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in v {
            match merged.last_mut() {
                Some(last) if a <= last.1 + eps => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        // Arcs wrapping past ℓ may swallow arcs at the start of the circle.
        while merged.len() > 1 {
            let last = *merged.last().unwrap();
            let first = merged[0];
            if last.1 + eps >= first.0 + ell {
                merged.remove(0);
                let l = merged.last_mut().unwrap();
                l.1 = l.1.max(first.1 + ell);
            } else {
                break;
            }
        }
        if merged.len() == 1 && merged[0].1 - merged[0].0 >= ell - eps {
            return ArcSet::full(ell);
        }
        ArcSet { ell, full: false, arcs: merged }
    }

    pub fn full(ell: f64) -> Self {
        ArcSet { ell, full: true, arcs: Vec::new() }
    }

    pub fn empty(ell: f64) -> Self {
        ArcSet { ell, full: false, arcs: Vec::new() }
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn arcs(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    pub fn total_length(&self) -> f64 {
        if self.full {
            self.ell
        } else {
            self.arcs.iter().map(|(a, b)| b - a).sum()
        }
    }

    /// Signed distance from `s` to the arc set: negative inside (depth),
    /// positive outside, `-∞` for the full circle.
    pub fn signed_distance(&self, s: f64) -> f64 {
        if self.full {
            return f64::NEG_INFINITY;
        }
        let s = s.rem_euclid(self.ell);
        let mut best = f64::INFINITY;
        for &(a, b) in &self.arcs {
            let off = (s - a).rem_euclid(self.ell);
            let len = b - a;
            if off < len {
                return -off.min(len - off);
            }
            best = best.min(off - len).min(self.ell - off);
        }
        best
    }

    pub fn classify(&self, s: f64, tol: f64) -> Containment {
        let d = self.signed_distance(s);
        if d <= -tol {
            Containment::Inside
        } else if d < tol {
            Containment::Boundary
        } else {
            Containment::Outside
        }
    }

    /// Complementary gaps, as `(start, end)` arcs.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        if self.full {
            return Vec::new();
        }
        if self.arcs.is_empty() {
            return vec![(0.0, self.ell)];
        }
        let n = self.arcs.len();
        (0..n)
            .map(|i| {
                let end = self.arcs[i].1;
                let next = if i + 1 < n { self.arcs[i + 1].0 } else { self.arcs[0].0 + self.ell };
                (end, next)
            })
            .filter(|(a, b)| b > a)
            .collect()
    }

    /// `self ⊆ other` up to `tol`.
    pub fn is_subset(&self, other: &ArcSet, tol: f64) -> bool {
        if other.full {
            return true;
        }
        if self.full {
            return false;
        }
        self.arcs.iter().all(|&(a, b)| {
            other.arcs.iter().any(|&(c, d)| {
                let off = (a - c).rem_euclid(other.ell);
                let off = if off > other.ell - tol { off - other.ell } else { off };
                off >= -tol && off + (b - a) <= (d - c) + tol
            })
        })
    }
}

/// Largest inscribed half-side over the rectangles, with that rectangle's
/// center.
pub fn inscribed_square(region: &Region) -> ([f64; 2], f64) {
    let mut best = ([0.0, 0.0], -1.0);
    for r in region.rects() {
        let d = (0.5 * (r[1] - r[0])).min(0.5 * (r[3] - r[2]));
        if d > best.1 {
            best = ([0.5 * (r[0] + r[1]), 0.5 * (r[2] + r[3])], d);
        }
    }
    best
}

/// Height `p₀` beyond which every primitive direction projects the region
/// onto the whole transverse circle.
pub fn direction_cutoff(region: &Region) -> i32 {
    let (_, delta) = inscribed_square(region);
    (TWO_PI / delta).ceil() as i32 + 1
}

/// Canonical primitive directions of height `max(|p|, |q|) < p0`.
pub fn enumerate_directions(p0: i32) -> Vec<Direction> {
    directions_in_band(0, p0)
}

/// Canonical primitive directions with `lo ≤ max(|p|, |q|) < hi`.
pub fn directions_in_band(lo: i32, hi: i32) -> Vec<Direction> {
    let mut out = Vec::new();
    for p in 0..hi {
        for q in -(hi - 1)..hi {
            let h = p.abs().max(q.abs());
            if h < lo.max(1) || h >= hi {
                continue;
            }
            if p == 0 && q != 1 {
                continue;
            }
            if gcd(p as i64, q as i64) == 1 {
                out.push(Direction { p, q });
            }
        }
    }
    out
}

/// Projection of the region onto the transverse circle of `dir`.
pub fn project_region(region: &Region, dir: Direction) -> ArcSet {
    let ell = dir.circumference();
    let arcs = region.rects().iter().map(|r| {
        let corners = [
            dir.transverse(r[0], r[2]),
            dir.transverse(r[0], r[3]),
            dir.transverse(r[1], r[2]),
            dir.transverse(r[1], r[3]),
        ];
        let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    });
    ArcSet::new(ell, arcs.collect::<Vec<_>>())
}

/// A direction whose projection misses part of the transverse circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GccOffender {
    pub direction: Direction,
    /// Transverse coordinate of a closed geodesic avoiding the region.
    pub geodesic_offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GccReport {
    pub holds: bool,
    pub cutoff: i32,
    pub offenders: Vec<GccOffender>,
}

fn largest_gap_midpoint(arcs: &ArcSet) -> Option<f64> {
    arcs.gaps()
        .into_iter()
        .max_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
        .map(|(a, b)| (0.5 * (a + b)).rem_euclid(arcs.ell()))
}

pub fn gcc_check(region: &Region) -> GccReport {
    let cutoff = direction_cutoff(region);
    let offenders: Vec<GccOffender> = enumerate_directions(cutoff)
        .into_iter()
        .filter_map(|d| {
            let arcs = project_region(region, d);
            largest_gap_midpoint(&arcs).map(|s| GccOffender { direction: d, geodesic_offset: s })
        })
        .collect();
    GccReport { holds: offenders.is_empty(), cutoff, offenders }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Satisfied,
    Violated,
    BoundaryCase,
    AutoSatisfiedBeyondCutoff,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::BoundaryCase => "boundary-case",
            Verdict::AutoSatisfiedBeyondCutoff => "auto-satisfied-beyond-cutoff",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionRecord {
    pub direction: Direction,
    pub a_gamma: CircleFunction,
    pub critical: CriticalSet,
    pub projection: ArcSet,
    pub verdict: Verdict,
}

impl DirectionRecord {
    pub fn n_crit(&self) -> usize {
        self.critical.points().len()
    }

    /// Whether every critical point (or the whole circle, for constant
    /// `A_γ`) lies strictly inside the projection.
    pub fn covered(&self) -> bool {
        matches!(self.verdict, Verdict::Satisfied | Verdict::AutoSatisfiedBeyondCutoff)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MgccReport {
    pub cutoff: i32,
    pub tol: f64,
    pub overall: Verdict,
    pub directions: Vec<DirectionRecord>,
}

impl MgccReport {
    pub fn record(&self, dir: Direction) -> Option<&DirectionRecord> {
        self.directions.iter().find(|r| r.direction == dir)
    }

    pub fn offending(&self) -> impl Iterator<Item = &DirectionRecord> {
        self.directions.iter().filter(|r| !r.covered())
    }

    /// Per-direction CSV with columns `p,q,verdict,n_crit,covered,ell`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["p", "q", "verdict", "n_crit", "covered", "ell"])?;
        for r in &self.directions {
            wr.write_record([
                r.direction.p().to_string(),
                r.direction.q().to_string(),
                r.verdict.to_string(),
                r.n_crit().to_string(),
                r.covered().to_string(),
                format!("{:.12}", r.projection.ell()),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Default boundary tolerance for open containment.
pub const BOUNDARY_TOL: f64 = 1e-6;

fn check_direction(a: &VectorPotential, region: &Region, dir: Direction, tol: f64) -> Result<DirectionRecord> {
    let ag = a_gamma(a, dir);
    let projection = project_region(region, dir);
    let critical = critical_points(&ag, DEGENERACY_TOL)?;
    let verdict = match &critical {
        CriticalSet::AllCritical => {
            if projection.is_full() {
                Verdict::Satisfied
            } else {
                Verdict::Violated
            }
        }
        CriticalSet::Points(pts) => {
            let classes: Vec<_> = pts.iter().map(|c| projection.classify(c.s, tol)).collect();
            if classes.contains(&Containment::Outside) {
                Verdict::Violated
            } else if classes.contains(&Containment::Boundary) {
                Verdict::BoundaryCase
            } else {
                Verdict::Satisfied
            }
        }
    };
    Ok(DirectionRecord { direction: dir, a_gamma: ag, critical, projection, verdict })
}

/// Magnetic geometric control condition over all directions below the
/// cutoff. With `audit`, directions in the band `p₀ ≤ height < 2p₀` are also
/// checked and reported as auto-satisfied when they pass.
pub fn mgcc_check(a: &VectorPotential, region: &Region, tol: f64, audit: bool) -> Result<MgccReport> {
    let cutoff = direction_cutoff(region);
    let mut dirs: Vec<(Direction, bool)> = enumerate_directions(cutoff).into_iter().map(|d| (d, false)).collect();
    if audit {
        dirs.extend(directions_in_band(cutoff, 2 * cutoff).into_iter().map(|d| (d, true)));
    }
    let records: Vec<DirectionRecord> = dirs
        .par_iter()
        .map(|&(d, beyond)| {
            let mut r = check_direction(a, region, d, tol)?;
            if beyond && r.verdict == Verdict::Satisfied {
                r.verdict = Verdict::AutoSatisfiedBeyondCutoff;
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let overall = if records.iter().any(|r| r.verdict == Verdict::Violated) {
        Verdict::Violated
    } else if records.iter().any(|r| r.verdict == Verdict::BoundaryCase) {
        Verdict::BoundaryCase
    } else {
        Verdict::Satisfied
    };
    Ok(MgccReport { cutoff, tol, overall, directions: records })
}

/// Outcome of the non-observability witness search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Witness {
    /// A non-degenerate critical point of `A_γ` outside the closed projection;
    /// the closed geodesic `z·γ⊥ = geodesic_offset` avoids the closed region.
    Found {
        direction: Direction,
        critical_point: CriticalPoint,
        geodesic_offset: f64,
    },
    /// Critical points outside the projection exist but all are degenerate.
    DegenerateOnly {
        direction: Direction,
        points: Vec<CriticalPoint>,
    },
    NotFound,
}

impl Witness {
    pub fn is_found(&self) -> bool {
        matches!(self, Witness::Found { .. })
    }
}

pub fn optimality_witness(a: &VectorPotential, region: &Region, tol: f64) -> Result<Witness> {
    let cutoff = direction_cutoff(region);
    let mut degenerate: Option<(Direction, Vec<CriticalPoint>)> = None;
    for d in enumerate_directions(cutoff) {
        let ag = a_gamma(a, d);
        if ag.is_constant() {
            continue;
        }
        let projection = project_region(region, d);
        if projection.is_full() {
            continue;
        }
        let outside: Vec<CriticalPoint> = critical_points(&ag, DEGENERACY_TOL)?
            .points()
            .iter()
            .copied()
            .filter(|c| projection.signed_distance(c.s) >= tol)
            .collect();
        if let Some(c) = outside.iter().find(|c| !c.degenerate) {
            return Ok(Witness::Found { direction: d, critical_point: *c, geodesic_offset: c.s });
        }
        if !outside.is_empty() && degenerate.is_none() {
            degenerate = Some((d, outside));
        }
    }
    Ok(match degenerate {
        Some((direction, points)) => Witness::DegenerateOnly { direction, points },
        None => Witness::NotFound,
    })
}

/// Whether the closed region meets the closed strip `|y - y0| ≤ width`
/// (mod 2π).
pub fn region_meets_strip(region: &Region, y0: f64, width: f64) -> bool {
    region.rects().iter().any(|r| {
        let c = 0.5 * (r[2] + r[3]);
        let half = 0.5 * (r[3] - r[2]);
        let d = (c - y0).rem_euclid(TWO_PI);
        let d = d.min(TWO_PI - d);
        d <= half + width
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FourierField2D;
    use crate::Mode;
    use std::f64::consts::PI;

    #[test]
    fn canonical_directions() {
        assert_eq!(Direction::new(-1, 2).unwrap(), Direction::new(1, -2).unwrap());
        assert_eq!(Direction::new(0, -1).unwrap().q(), 1);
        assert!(Direction::new(2, 4).is_err());
        assert!(Direction::new(0, 0).is_err());
    }

    #[test]
    fn enumerate_small() {
        let d2: Vec<_> = enumerate_directions(2).iter().map(|d| (d.p(), d.q())).collect();
        let mut want = vec![(1, 0), (0, 1), (1, 1), (1, -1)];
        let mut got = d2.clone();
        want.sort();
        got.sort();
        assert_eq!(got, want);
        assert_eq!(enumerate_directions(3).len(), 8);
    }

    #[test]
    fn inscribed_examples() {
        let r = Region::new(vec![[0.0, 1.0, 0.0, 2.0]]).unwrap();
        let (c, d) = inscribed_square(&r);
        assert_eq!(d, 0.5);
        assert_eq!(c, [0.5, 1.0]);
        assert_eq!(inscribed_square(&Region::full()).1, PI);
        assert_eq!(direction_cutoff(&Region::full()), 3);
    }

    #[test]
    fn overlapping_rects_are_normalised() {
        let r = Region::new(vec![[0.0, 2.0, 0.0, 1.0], [1.0, 3.0, 0.0, 1.0]]).unwrap();
        assert_eq!(r.rects().len(), 1);
        assert!((r.area() - 3.0).abs() < 1e-14);
        let w = Region::new(vec![[-1.0, 1.0, 0.0, 1.0]]).unwrap();
        assert!((w.area() - 2.0).abs() < 1e-14);
        assert!(w.contains(-0.5, 0.5));
    }

    #[test]
    fn strip_projections() {
        let r = Region::horizontal_strips(&[(1.0, 2.0)]).unwrap();
        let a = project_region(&r, Direction::new(1, 0).unwrap());
        assert_eq!(a.arcs().len(), 1);
        assert!((a.arcs()[0].0 - 1.0).abs() < 1e-14 && (a.arcs()[0].1 - 2.0).abs() < 1e-14);
        assert!(project_region(&r, Direction::new(0, 1).unwrap()).is_full());
    }

    #[test]
    fn wrapped_strip_is_one_arc() {
        let r = Region::horizontal_strips(&[(-0.5, 0.5)]).unwrap();
        let a = project_region(&r, Direction::new(1, 0).unwrap());
        assert_eq!(a.arcs().len(), 1);
        assert_eq!(a.classify(0.0, 1e-6), Containment::Inside);
        assert_eq!(a.classify(0.5, 1e-6), Containment::Boundary);
        assert_eq!(a.classify(1.0, 1e-6), Containment::Outside);
    }

    #[test]
    fn toy_model_verdicts() {
        let a = VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 1.0), FourierField2D::zero()).unwrap();
        let good = Region::horizontal_strips(&[(-0.5, 0.5), (PI - 0.5, PI + 0.5)]).unwrap();
        assert_eq!(mgcc_check(&a, &good, BOUNDARY_TOL, false).unwrap().overall, Verdict::Satisfied);
        let bad = Region::horizontal_strips(&[(1.0, 2.0)]).unwrap();
        let rep = mgcc_check(&a, &bad, BOUNDARY_TOL, false).unwrap();
        assert_eq!(rep.overall, Verdict::Violated);
        assert_eq!(rep.record(Direction::new(1, 0).unwrap()).unwrap().verdict, Verdict::Violated);
        match optimality_witness(&a, &bad, BOUNDARY_TOL).unwrap() {
            Witness::Found { direction, critical_point, .. } => {
                assert_eq!(direction, Direction::new(1, 0).unwrap());
                assert!(critical_point.s.abs() < 1e-12);
            }
            w => panic!("unexpected {w:?}"),
        }
        assert_eq!(optimality_witness(&a, &good, BOUNDARY_TOL).unwrap(), Witness::NotFound);
    }

    #[test]
    fn degenerate_only_witness() {
        // A₁ = cos³ y: non-degenerate extrema at 0 and π, degenerate at ±π/2.
        let a1 = FourierField2D::cos(Mode::new(0, 1), 0.75).add(&FourierField2D::cos(Mode::new(0, 3), 0.25));
        let a = VectorPotential::new(a1, FourierField2D::zero()).unwrap();
        let r = Region::horizontal_strips(&[(-0.5, 0.5), (PI - 0.5, PI + 0.5)]).unwrap();
        match optimality_witness(&a, &r, BOUNDARY_TOL).unwrap() {
            Witness::DegenerateOnly { points, .. } => {
                assert_eq!(points.len(), 2);
                assert!((points[0].s - PI / 2.0).abs() < 1e-6);
            }
            w => panic!("unexpected {w:?}"),
        }
        assert_eq!(mgcc_check(&a, &r, BOUNDARY_TOL, false).unwrap().overall, Verdict::Violated);
    }

    #[test]
    fn boundary_case() {
        let a = VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 1.0), FourierField2D::zero()).unwrap();
        let r = Region::horizontal_strips(&[(0.0, 1.0), (PI - 0.5, PI + 0.5)]).unwrap();
        assert_eq!(mgcc_check(&a, &r, BOUNDARY_TOL, false).unwrap().overall, Verdict::BoundaryCase);
    }
}
