//! Defect profiles: blobs, nicks, and random flank jitter as separable
//! perturbations `gamma * N(s)` of the sectional tensors.
//!
//! A profile carries a dimensionless amplitude `gamma` (the relative area
//! change at the defect), a shape function `N(s)` normalized to
//! `sup |N| = 1`, and constant per-unit-gamma deltas of the section
//! moments about the ideal centroid. The closed-form correction consumes
//! the shape only through its running moments
//!
//! ```text
//! tilde_1(s) = int_0^s N ds',   tilde_s(s) = int_0^s s' N ds'
//! ```
//!
//! For indicator and piecewise-constant shapes these are exact piecewise
//! polynomials; for jitter described only by expectation values the shape
//! is a moment-matched polynomial surrogate.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rod::{
    strip_moments, RodSpec, SectionMoments, StiffnessTensors, Strip, StripSense, StripSide,
};

/// Hard cap on the defect amplitude; the first-order model demonstrably
/// degrades at 50% relative area change.
pub const GAMMA_CAP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DefectKind {
    Blob,
    Nick,
    Jitter,
}

/// Shape family for localized defects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeKind {
    /// Rectangular indicator on the support (default).
    Indicator,
    /// Raised cosine `(1 + cos(2 pi (s - s0)/l)) / 2` on the support.
    RaisedCosine,
}

/// Axial shape function `N(s)`, `sup |N| = 1` for constructed defects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ShapeFn {
    Indicator {
        lo: f64,
        hi: f64,
    },
    RaisedCosine {
        lo: f64,
        hi: f64,
    },
    /// `breaks.len() == values.len() + 1`, spanning `[0, L]`.
    PiecewiseConstant {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
    /// `N(s) = c0 + c1 s` on `[0, length]`: the jitter moment surrogate.
    Polynomial {
        c0: f64,
        c1: f64,
        length: f64,
    },
}

impl ShapeFn {
    pub fn value(&self, s: f64) -> f64 {
        match self {
            ShapeFn::Indicator { lo, hi } => {
                if s >= *lo && s <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            ShapeFn::RaisedCosine { lo, hi } => {
                if s < *lo || s > *hi {
                    0.0
                } else {
                    let l = hi - lo;
                    let s0 = 0.5 * (lo + hi);
                    0.5 * (1.0 + (2.0 * std::f64::consts::PI * (s - s0) / l).cos())
                }
            }
            ShapeFn::PiecewiseConstant { breaks, values } => {
                let i = segment_index(breaks, s);
                values.get(i).copied().unwrap_or(0.0)
            }
            ShapeFn::Polynomial { c0, c1, .. } => c0 + c1 * s,
        }
    }

    /// Running moment `int_0^s s'^p N(s') ds'` for p = 0, 1, 2.
    pub fn tilde(&self, p: u32, s: f64) -> f64 {
        match self {
            ShapeFn::Indicator { lo, hi } => {
                let a = *lo;
                let b = s.min(*hi);
                if b <= a {
                    0.0
                } else {
                    monomial_integral(p, a, b)
                }
            }
            ShapeFn::RaisedCosine { lo, hi } => {
                let a = *lo;
                let b = s.min(*hi);
                if b <= a {
                    return 0.0;
                }
                raised_cosine_tilde(p, *lo, *hi, b)
            }
            ShapeFn::PiecewiseConstant { breaks, values } => {
                let mut acc = 0.0;
                for (i, v) in values.iter().enumerate() {
                    let a = breaks[i];
                    let b = s.min(breaks[i + 1]);
                    if b <= a {
                        break;
                    }
                    acc += v * monomial_integral(p, a, b);
                }
                acc
            }
            ShapeFn::Polynomial { c0, c1, .. } => {
                // int_0^s u^p (c0 + c1 u) du
                let pf = f64::from(p);
                c0 * s.powi(p as i32 + 1) / (pf + 1.0) + c1 * s.powi(p as i32 + 2) / (pf + 2.0)
            }
        }
    }

    /// Full-domain moment `int N s^p ds` (the "bar" values).
    pub fn bar(&self, p: u32) -> f64 {
        self.tilde(p, self.domain_end())
    }

    fn domain_end(&self) -> f64 {
        match self {
            ShapeFn::Indicator { hi, .. } | ShapeFn::RaisedCosine { hi, .. } => *hi,
            ShapeFn::PiecewiseConstant { breaks, .. } => *breaks.last().unwrap(),
            ShapeFn::Polynomial { length, .. } => *length,
        }
    }

    /// Points where `N` jumps or kinks; quadrature must split here.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            ShapeFn::Indicator { lo, hi } | ShapeFn::RaisedCosine { lo, hi } => vec![*lo, *hi],
            ShapeFn::PiecewiseConstant { breaks, .. } => breaks[1..breaks.len() - 1].to_vec(),
            ShapeFn::Polynomial { .. } => Vec::new(),
        }
    }

    /// Gauss order that integrates `N * (cubic polynomial)` exactly on a
    /// breakpoint-free piece (generously for the trigonometric shape).
    pub fn quadrature_order(&self) -> usize {
        match self {
            ShapeFn::RaisedCosine { .. } => 24,
            _ => 4,
        }
    }
}

fn segment_index(breaks: &[f64], s: f64) -> usize {
    match breaks.binary_search_by(|b| b.total_cmp(&s)) {
        Ok(i) => i.min(breaks.len().saturating_sub(2)),
        Err(0) => 0,
        Err(i) => (i - 1).min(breaks.len().saturating_sub(2)),
    }
}

fn monomial_integral(p: u32, a: f64, b: f64) -> f64 {
    match p {
        0 => b - a,
        1 => (b * b - a * a) / 2.0,
        2 => (b * b * b - a * a * a) / 3.0,
        _ => unreachable!("only moments 0..=2 are used"),
    }
}

/// `int_a^s u^p * (1 + cos(w (u - s0)))/2 du` with `w = 2 pi / (hi - lo)`.
fn raised_cosine_tilde(p: u32, lo: f64, hi: f64, s: f64) -> f64 {
    let l = hi - lo;
    let w = 2.0 * std::f64::consts::PI / l;
    let s0 = 0.5 * (lo + hi);
    let th = w * (s - s0);
    let (sin_s, cos_s) = th.sin_cos();
    let poly = 0.5 * monomial_integral(p, lo, s);
    // At u = lo: theta = -pi, sin = 0, cos = -1.
    let trig = match p {
        0 => sin_s / w,
        1 => s * sin_s / w + (cos_s + 1.0) / (w * w),
        2 => s * s * sin_s / w + 2.0 * s * cos_s / (w * w) - 2.0 * sin_s / (w * w * w) + 2.0 * lo / (w * w),
        _ => unreachable!(),
    };
    poly + 0.5 * trig
}

/// A single defect: kind, amplitude, axial shape, and the per-unit-gamma
/// deltas of the section moments and sectional tensors (about the ideal
/// centroid, so one-sided defects produce a first-moment and hence a
/// nonzero curvature-stretch coupling).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectProfile {
    pub kind: DefectKind,
    /// Relative area change at the defect (signed, dimensionless).
    pub gamma: f64,
    pub shape: ShapeFn,
    /// Per-unit-gamma section-moment deltas.
    pub delta_moments: SectionMoments,
    /// Per-unit-gamma tensor deltas K', J', T'.
    pub delta_tensors: StiffnessTensors,
    pub description: String,
}

impl DefectProfile {
    /// True for blob/nick profiles with compact support.
    pub fn is_localized(&self) -> bool {
        matches!(self.kind, DefectKind::Blob | DefectKind::Nick)
    }

    /// Support interval of the shape (whole domain for jitter kinds).
    pub fn support(&self) -> (f64, f64) {
        match &self.shape {
            ShapeFn::Indicator { lo, hi } | ShapeFn::RaisedCosine { lo, hi } => (*lo, *hi),
            ShapeFn::PiecewiseConstant { breaks, .. } => (breaks[0], *breaks.last().unwrap()),
            ShapeFn::Polynomial { length, .. } => (0.0, *length),
        }
    }

    /// Section-moment delta field at arc length `s` (already gamma-scaled).
    pub fn moment_delta_at(&self, s: f64) -> SectionMoments {
        self.delta_moments.scale(self.gamma * self.shape.value(s))
    }

    /// Mean gamma-scaled moment delta over `[lo, hi]` (length-weighted).
    pub fn mean_moment_delta(&self, lo: f64, hi: f64) -> SectionMoments {
        if hi <= lo {
            return SectionMoments::zero();
        }
        let n_mean = (self.shape.tilde(0, hi) - self.shape.tilde(0, lo)) / (hi - lo);
        self.delta_moments.scale(self.gamma * n_mean)
    }
}

/// Moment functionals of a profile's shape: the tilde evaluators and the
/// full-domain bar values the jitter model is specified by.
#[derive(Debug, Clone)]
pub struct MomentFunctionals {
    shape: ShapeFn,
    pub bar_one: f64,
    pub bar_s: f64,
}

impl MomentFunctionals {
    /// `int_0^s N ds'` (m).
    pub fn tilde_one(&self, s: f64) -> f64 {
        self.shape.tilde(0, s)
    }

    /// `int_0^s s' N ds'` (m^2).
    pub fn tilde_s(&self, s: f64) -> f64 {
        self.shape.tilde(1, s)
    }
}

/// Extract the moment functionals of a profile.
pub fn moment_functionals(profile: &DefectProfile) -> MomentFunctionals {
    MomentFunctionals {
        shape: profile.shape.clone(),
        bar_one: profile.shape.bar(0),
        bar_s: profile.shape.bar(1),
    }
}

fn localized_shape(kind: ShapeKind, s0: f64, extent: f64) -> ShapeFn {
    let lo = s0 - extent / 2.0;
    let hi = s0 + extent / 2.0;
    match kind {
        ShapeKind::Indicator => ShapeFn::Indicator { lo, hi },
        ShapeKind::RaisedCosine => ShapeFn::RaisedCosine { lo, hi },
    }
}

fn check_localized_geometry(rod: &RodSpec, s0: f64, extent: f64, depth: f64) -> Result<()> {
    if !(extent > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "defect extent must be positive, got {extent}"
        )));
    }
    if depth < 0.0 || depth >= rod.section.width {
        return Err(Error::InvalidGeometry(format!(
            "defect depth must satisfy 0 <= d < w, got d = {depth}, w = {}",
            rod.section.width
        )));
    }
    let lo = s0 - extent / 2.0;
    let hi = s0 + extent / 2.0;
    if lo < 0.0 || hi > rod.length {
        return Err(Error::InvalidGeometry(format!(
            "defect support [{lo:.3e}, {hi:.3e}] m must lie within [0, {:.3e}] m",
            rod.length
        )));
    }
    Ok(())
}

/// Per-unit-gamma deltas of a one-flank strip nick; the blob is its exact
/// first-order mirror (same tensors, opposite amplitude sign).
fn strip_per_unit_gamma(rod: &RodSpec, depth: f64) -> Result<(f64, SectionMoments)> {
    let base = rod.section.base();
    let area = base.width * base.height;
    let gamma_nick = -(depth * base.height) / area;
    if depth == 0.0 {
        return Ok((0.0, SectionMoments::zero()));
    }
    let delta = strip_moments(&base.with_strip(Strip {
        side: StripSide::X1Plus,
        sense: StripSense::Removed,
        depth,
    })?);
    Ok((gamma_nick, delta.scale(1.0 / gamma_nick)))
}

fn cap_check(gamma: f64) -> Result<()> {
    if gamma.abs() > GAMMA_CAP {
        return Err(Error::AmplitudeCap {
            gamma,
            cap: GAMMA_CAP,
        });
    }
    Ok(())
}

/// A nick: material missing from the `+x_1` flank over `[s0 - extent/2,
/// s0 + extent/2]`, amplitude `gamma = -(depth h)/A < 0`. The per-unit-gamma
/// deltas use the exact strip moments for the given depth, so
/// `gamma * K' * N(s)` reproduces the exact sectional change.
pub fn make_nick(rod: &RodSpec, s0: f64, extent: f64, depth: f64) -> Result<DefectProfile> {
    make_nick_shaped(rod, s0, extent, depth, ShapeKind::Indicator)
}

/// [`make_nick`] with an explicit shape family.
pub fn make_nick_shaped(
    rod: &RodSpec,
    s0: f64,
    extent: f64,
    depth: f64,
    shape: ShapeKind,
) -> Result<DefectProfile> {
    check_localized_geometry(rod, s0, extent, depth)?;
    let (gamma, per_unit) = strip_per_unit_gamma(rod, depth)?;
    cap_check(gamma)?;
    let material = rod.material;
    Ok(DefectProfile {
        kind: DefectKind::Nick,
        gamma,
        shape: localized_shape(shape, s0, extent),
        delta_moments: per_unit,
        delta_tensors: crate::rod::tensors_from_moments(&material, &per_unit),
        description: format!(
            "nick depth {:.4} um at s0 = {:.4} um, extent {:.4} um",
            depth * 1e6,
            s0 * 1e6,
            extent * 1e6
        ),
    })
}

/// A blob: excess material on the same flank, the first-order mirror image
/// of [`make_nick`] (identical per-unit-gamma tensors, positive amplitude).
pub fn make_blob(rod: &RodSpec, s0: f64, extent: f64, depth: f64) -> Result<DefectProfile> {
    make_blob_shaped(rod, s0, extent, depth, ShapeKind::Indicator)
}

/// [`make_blob`] with an explicit shape family.
pub fn make_blob_shaped(
    rod: &RodSpec,
    s0: f64,
    extent: f64,
    depth: f64,
    shape: ShapeKind,
) -> Result<DefectProfile> {
    check_localized_geometry(rod, s0, extent, depth)?;
    let (gamma_nick, per_unit) = strip_per_unit_gamma(rod, depth)?;
    let gamma = -gamma_nick;
    cap_check(gamma)?;
    Ok(DefectProfile {
        kind: DefectKind::Blob,
        gamma,
        shape: localized_shape(shape, s0, extent),
        delta_moments: per_unit,
        delta_tensors: crate::rod::tensors_from_moments(&rod.material, &per_unit),
        description: format!(
            "blob depth {:.4} um at s0 = {:.4} um, extent {:.4} um",
            depth * 1e6,
            s0 * 1e6,
            extent * 1e6
        ),
    })
}

/// Symmetric thin-flank per-unit-gamma deltas used by the jitter kinds:
/// a relative area change `gamma` deposited equally on both width flanks,
/// so the first moments stay zero.
fn jitter_per_unit_gamma(rod: &RodSpec) -> SectionMoments {
    let w = rod.section.width;
    let h = rod.section.height;
    let area = w * h;
    SectionMoments {
        area,
        a1: 0.0,
        a2: 0.0,
        a11: area * w * w / 4.0,
        a12: 0.0,
        a22: area * h * h / 12.0,
    }
}

/// Random-jitter profile characterized only by the expectation values
/// `bar_one = int N ds` and `bar_s = int s N ds`.
///
/// The stored shape is the linear moment surrogate on `[0, L]` matching
/// both moments; only the products `gamma * bar` moments are physically
/// meaningful, and the profile fixes `gamma = 1`.
pub fn make_jitter(rod: &RodSpec, bar_one: f64, bar_s: f64) -> Result<DefectProfile> {
    let l = rod.length;
    if bar_one.abs() > l {
        return Err(Error::UnrealizableMoments(format!(
            "|bar_one| = {:.3e} exceeds L = {:.3e} (sup|N| <= 1)",
            bar_one.abs(),
            l
        )));
    }
    if bar_s.abs() > l * l / 2.0 {
        return Err(Error::UnrealizableMoments(format!(
            "|bar_s| = {:.3e} exceeds L^2/2 = {:.3e} (sup|N| <= 1)",
            bar_s.abs(),
            l * l / 2.0
        )));
    }
    // Linear surrogate: c0 L + c1 L^2/2 = bar_one, c0 L^2/2 + c1 L^3/3 = bar_s.
    let c0 = 4.0 * bar_one / l - 6.0 * bar_s / (l * l);
    let c1 = 12.0 * bar_s / (l * l * l) - 6.0 * bar_one / (l * l);
    let per_unit = jitter_per_unit_gamma(rod);
    Ok(DefectProfile {
        kind: DefectKind::Jitter,
        gamma: 1.0,
        shape: ShapeFn::Polynomial { c0, c1, length: l },
        delta_moments: per_unit,
        delta_tensors: crate::rod::tensors_from_moments(&rod.material, &per_unit),
        description: format!("jitter moments bar_one = {bar_one:.4e} m, bar_s = {bar_s:.4e} m^2"),
    })
}

/// One random realization of flank jitter: piecewise-constant zero-mean
/// `N(s) = +/-1` over `n_segments` equal segments, amplitude
/// `gamma = amplitude_rms`. Deterministic for a fixed seed.
pub fn sample_jitter_realization(
    rod: &RodSpec,
    seed: u64,
    n_segments: usize,
    amplitude_rms: f64,
) -> Result<DefectProfile> {
    if n_segments < 2 {
        return Err(Error::InvalidGeometry(format!(
            "jitter realization needs at least 2 segments, got {n_segments}"
        )));
    }
    if amplitude_rms < 0.0 {
        return Err(Error::InvalidGeometry("amplitude_rms must be >= 0".into()));
    }
    cap_check(amplitude_rms)?;
    let l = rod.length;
    let breaks: Vec<f64> = (0..=n_segments)
        .map(|i| l * i as f64 / n_segments as f64)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = if amplitude_rms == 0.0 {
        vec![0.0; n_segments]
    } else {
        (0..n_segments)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect()
    };
    let per_unit = jitter_per_unit_gamma(rod);
    Ok(DefectProfile {
        kind: DefectKind::Jitter,
        gamma: amplitude_rms,
        shape: ShapeFn::PiecewiseConstant { breaks, values },
        delta_moments: per_unit,
        delta_tensors: crate::rod::tensors_from_moments(&rod.material, &per_unit),
        description: format!(
            "jitter realization seed {seed}, {n_segments} segments, rms {amplitude_rms:.4}"
        ),
    })
}

impl DefectProfile {
    /// Gamma-scaled tensor deltas at `s`, as 3x3 matrices `(dK, dJ, dT)`.
    pub fn tensor_deltas_at(
        &self,
        s: f64,
    ) -> (nalgebra::Matrix3<f64>, nalgebra::Matrix3<f64>, nalgebra::Matrix3<f64>) {
        let c = self.gamma * self.shape.value(s);
        (
            self.delta_tensors.k * c,
            self.delta_tensors.j * c,
            self.delta_tensors.t * c,
        )
    }
}

/// `e_3` in the director frame, used all over the perturbation algebra.
pub(crate) fn axis() -> Vector3<f64> {
    Vector3::z()
}
