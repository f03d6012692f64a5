//! Adaptive Gauss–Kronrod integration with dyadic refinement toward declared
//! endpoint singularities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Default number of integrand evaluations before giving up.
pub const DEFAULT_BUDGET: usize = 1_000_000;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_707,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

const MAX_RINGS: usize = 200;
// error estimates of a single Kronrod panel never drop below ~50 eps
const ROUNDOFF_REL: f64 = 5e-14;

struct Counter<'a, G> {
    g: &'a G,
    evals: usize,
    budget: usize,
}

impl<G: Fn(f64) -> f64> Counter<'_, G> {
    fn gk21(&mut self, a: f64, b: f64) -> Result<(f64, f64)> {
        if self.evals + 21 > self.budget {
            return Err(Error::non_convergence(
                "adaptive_1d",
                format!("evaluation budget of {} exhausted", self.budget),
            ));
        }
        self.evals += 21;
        let g = self.g;
        let centr = 0.5 * (a + b);
        let hlgth = 0.5 * (b - a);
        let fc = g(centr);
        let mut resg = 0.0;
        let mut resk = WGK[10] * fc;
        let mut resabs = resk.abs();
        let mut fv1 = [0.0; 10];
        let mut fv2 = [0.0; 10];
        for j in 0..10 {
            let absc = hlgth * XGK[j];
            let f1 = g(centr - absc);
            let f2 = g(centr + absc);
            fv1[j] = f1;
            fv2[j] = f2;
            resk += WGK[j] * (f1 + f2);
            resabs += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                resg += WG[j / 2] * (f1 + f2);
            }
        }
        let reskh = resk * 0.5;
        let mut resasc = WGK[10] * (fc - reskh).abs();
        for j in 0..10 {
            resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
        }
        let result = resk * hlgth;
        resabs *= hlgth.abs();
        resasc *= hlgth.abs();
        let mut err = ((resk - resg) * hlgth).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        if !result.is_finite() {
            return Err(Error::non_convergence(
                "adaptive_1d",
                format!("non-finite integrand on [{a}, {b}]"),
            ));
        }
        Ok((result, err))
    }

    /// Globally adaptive bisection on a regular interval.
    fn regular(&mut self, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<(f64, f64)> {
        let rel_tol = rel_tol.max(ROUNDOFF_REL);
        let (v, e) = self.gk21(a, b)?;
        let mut heap = BinaryHeap::new();
        heap.push(Segment { a, b, value: v, err: e });
        let mut total = v;
        let mut total_err = e;
        // segments too small to split further
        let mut frozen_err = 0.0;
        loop {
            if total_err <= abs_tol.max(rel_tol * total.abs()) {
                return Ok((total, total_err));
            }
            let Some(seg) = heap.pop() else {
                return Err(Error::non_convergence(
                    "adaptive_1d",
                    format!("interval [{a}, {b}] cannot be refined further (error {total_err:e})"),
                ));
            };
            let mid = 0.5 * (seg.a + seg.b);
            if mid <= seg.a || mid >= seg.b || (seg.b - seg.a) < 1e-15 * (seg.a.abs() + seg.b.abs()) {
                frozen_err += seg.err;
                continue;
            }
            let (v1, e1) = self.gk21(seg.a, mid)?;
            let (v2, e2) = self.gk21(mid, seg.b)?;
            total += v1 + v2 - seg.value;
            heap.push(Segment {
                a: seg.a,
                b: mid,
                value: v1,
                err: e1,
            });
            heap.push(Segment {
                a: mid,
                b: seg.b,
                value: v2,
                err: e2,
            });
            total_err = frozen_err + heap.iter().map(|s| s.err).sum::<f64>();
        }
    }

    /// Integral over the segment between the singular endpoint `p` and the
    /// regular endpoint `q`, summed over dyadic rings shrinking toward `p`
    /// and accelerated with the epsilon algorithm.
    fn singular_end(&mut self, p: f64, q: f64, abs_tol: f64, rel_tol: f64) -> Result<(f64, f64)> {
        let d = q - p;
        let mut partial = Vec::with_capacity(64);
        let mut sum = 0.0;
        let mut err_sum = 0.0;
        let mut prev_ext: Option<f64> = None;
        let mut prev_diff = f64::INFINITY;
        let ring_tol = 0.05;
        for k in 0..MAX_RINGS {
            let outer = p + d * 0.5f64.powi(k as i32);
            let inner = p + d * 0.5f64.powi(k as i32 + 1);
            if inner == outer {
                break;
            }
            let (lo, hi) = if inner < outer { (inner, outer) } else { (outer, inner) };
            let (v, e) = self.regular(lo, hi, ring_tol * abs_tol, ring_tol * rel_tol)?;
            sum += v;
            err_sum += e;
            partial.push(sum);
            if k < 3 {
                continue;
            }
            let ext = wynn_epsilon(&partial);
            if let Some(prev) = prev_ext {
                let diff = (ext - prev).abs();
                let target = abs_tol.max(rel_tol * ext.abs());
                if diff <= target && prev_diff <= target.max(diff * 4.0) {
                    return Ok((ext, diff + err_sum));
                }
                prev_diff = diff;
            }
            prev_ext = Some(ext);
        }
        let ext = prev_ext.unwrap_or(sum);
        let target = abs_tol.max(rel_tol * ext.abs());
        if prev_diff <= 10.0 * target {
            Ok((ext, prev_diff + err_sum))
        } else {
            Err(Error::non_convergence(
                "adaptive_1d",
                format!("ring sums toward singular point {p} did not settle (last change {prev_diff:e})"),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Wynn's epsilon algorithm applied to the whole sequence of partial sums;
/// returns the last entry of the highest even column.
pub(crate) fn wynn_epsilon(seq: &[f64]) -> f64 {
    let n = seq.len();
    if n < 3 {
        return *seq.last().unwrap_or(&0.0);
    }
    let start = n.saturating_sub(13);
    let s = &seq[start..];
    let m = s.len();
    let mut prev = vec![0.0; m + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = *s.last().unwrap();
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            let base = prev.get(i + 1).copied().unwrap_or(0.0);
            if diff.abs() <= 1e-15 * cur[i + 1].abs() || !diff.is_finite() {
                return best;
            }
            next.push(base + 1.0 / diff);
        }
        col += 1;
        if col % 2 == 0 {
            let candidate = *next.last().unwrap();
            if candidate.is_finite() {
                best = candidate;
            } else {
                return best;
            }
        }
        prev = cur;
        cur = next;
    }
    best
}

/// Tolerance split into absolute and relative parts.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    /// `err ≤ tol · max(1, |I|)`.
    pub fn mixed(tol: f64) -> Self {
        Self { abs: tol, rel: tol }
    }

    pub fn relative(tol: f64) -> Self {
        Self {
            abs: f64::MIN_POSITIVE,
            rel: tol,
        }
    }
}

/// `∫_a^b g` with estimated error at most `tol · max(1, |I|)`.
///
/// Each listed point inside `[a, b]` splits the interval; the pieces next to
/// such a point are integrated on dyadic rings toward it.
pub fn adaptive_1d<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, tol: f64, singular_points: &[f64]) -> Result<f64> {
    integrate(&g, a, b, Tolerance::mixed(tol), singular_points, DEFAULT_BUDGET).map(|(v, _)| v)
}

/// Lower-level form of [`adaptive_1d`] returning the error estimate.
pub fn integrate<G: Fn(f64) -> f64>(
    g: &G,
    a: f64,
    b: f64,
    tol: Tolerance,
    singular_points: &[f64],
    budget: usize,
) -> Result<(f64, f64)> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("adaptive_1d", format!("invalid interval [{a}, {b}]")));
    }
    if !(tol.abs > 0.0 && tol.rel >= 0.0) {
        return Err(Error::domain("adaptive_1d", "tolerance must be positive"));
    }
    let mut sing: Vec<f64> = singular_points.iter().copied().filter(|p| *p >= a && *p <= b).collect();
    sing.sort_by(f64::total_cmp);
    sing.dedup();
    let mut cuts = vec![a];
    for &p in &sing {
        if p > *cuts.last().unwrap() && p < b {
            cuts.push(p);
        }
    }
    cuts.push(b);
    let is_sing = |x: f64| sing.contains(&x);

    let mut pieces: Vec<(f64, f64, Option<f64>)> = Vec::new();
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        match (is_sing(l), is_sing(r)) {
            (true, true) => {
                let m = 0.5 * (l + r);
                pieces.push((l, m, Some(l)));
                pieces.push((m, r, Some(r)));
            }
            (true, false) => pieces.push((l, r, Some(l))),
            (false, true) => pieces.push((l, r, Some(r))),
            (false, false) => pieces.push((l, r, None)),
        }
    }
    let share = 1.0 / pieces.len() as f64;
    let mut counter = Counter { g, evals: 0, budget };
    let mut total = 0.0;
    let mut total_err = 0.0;
    for (l, r, sp) in pieces {
        let (v, e) = match sp {
            None => counter.regular(l, r, tol.abs * share, tol.rel * share)?,
            Some(p) => {
                let q = if p == l { r } else { l };
                counter.singular_end(p, q, tol.abs * share, tol.rel * share)?
            }
        };
        total += v;
        total_err += e;
    }
    Ok((total, total_err))
}
