//! Rod geometry, material, and the construction of the sectional stiffness
//! tensors from cross-section mass moments.
//!
//! A rod cross-section is described by its mass moments about the ideal
//! (unnotched) centroid:
//!
//! - `A`              area (m^2)
//! - `A_1, A_2`       first moments (m^3), zero for a centered section
//! - `A_11, A_12, A_22` second moments (m^4)
//!
//! From these and the elastic moduli the sectional tensors follow:
//!
//! - `K = diag(G A, G A, E A)`           force per unit strain (N)
//! - `J_11 = E I_11, J_22 = E I_22, J_33 = G I_33`   moment per curvature (N m^2)
//! - `T` couples curvature/twist to stretch/shear once the centroid is
//!   offset (`T_13 = -E A_2`, `T_23 = E A_1`, `T_31 = G A_2`, `T_32 = -G A_1`)
//! - `I_lg = delta_lg A_mm - A_lg`, `I_33 = A_mm`   rotary-inertia moments (m^4)
//!
//! Directors: `d_1` along the drawn width, `d_2` along the height, `d_3`
//! along the axis. All quantities are SI.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Isotropic elastic material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// Young's modulus E (Pa).
    pub youngs_modulus: f64,
    /// Shear modulus G (Pa).
    pub shear_modulus: f64,
    /// Density rho (kg/m^3).
    pub density: f64,
}

impl Material {
    pub fn new(youngs_modulus: f64, shear_modulus: f64, density: f64) -> Result<Self> {
        if !(youngs_modulus > 0.0) {
            return Err(Error::InvalidMaterial(format!(
                "E must be positive, got {youngs_modulus}"
            )));
        }
        if !(shear_modulus > 0.0) {
            return Err(Error::InvalidMaterial(format!(
                "G must be positive, got {shear_modulus}"
            )));
        }
        if !(density > 0.0) {
            return Err(Error::InvalidMaterial(format!(
                "density must be positive, got {density}"
            )));
        }
        if shear_modulus >= youngs_modulus {
            return Err(Error::InvalidMaterial(format!(
                "isotropic elasticity requires G < E, got G = {shear_modulus}, E = {youngs_modulus}"
            )));
        }
        Ok(Self {
            youngs_modulus,
            shear_modulus,
            density,
        })
    }

    /// Default polysilicon: E = 169 GPa, nu = 0.28, rho = 2330 kg/m^3.
    pub fn silicon() -> Self {
        let e = 169e9;
        let nu = 0.28;
        Self {
            youngs_modulus: e,
            shear_modulus: e / (2.0 * (1.0 + nu)),
            density: 2330.0,
        }
    }
}

/// Which flank of the width a strip sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StripSide {
    /// `x_1 in [w/2 - d, w/2]` removed, or `[w/2, w/2 + d]` added.
    X1Plus,
    /// Mirror image on the `-x_1` flank.
    X1Minus,
}

/// Material removed from or deposited onto one flank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StripSense {
    Removed,
    Added,
}

/// A full-height strip on one width flank, used to sample defect geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub side: StripSide,
    pub sense: StripSense,
    /// Strip depth into (or out of) the width (m).
    pub depth: f64,
}

/// Rectangular cross-section, optionally carrying a strip.
///
/// Width runs along director `d_1`, height along `d_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectangleSection {
    /// Width w (m).
    pub width: f64,
    /// Height h (m).
    pub height: f64,
    pub strip: Option<Strip>,
}

impl RectangleSection {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0) || !(height > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "section dimensions must be positive, got {width} x {height}"
            )));
        }
        Ok(Self {
            width,
            height,
            strip: None,
        })
    }

    pub fn with_strip(mut self, strip: Strip) -> Result<Self> {
        if !(strip.depth >= 0.0) || strip.depth >= self.width {
            return Err(Error::InvalidGeometry(format!(
                "strip depth must satisfy 0 <= d < w, got d = {}, w = {}",
                strip.depth, self.width
            )));
        }
        self.strip = Some(strip);
        Ok(self)
    }

    /// The same section with the strip dropped.
    pub fn base(&self) -> RectangleSection {
        RectangleSection {
            width: self.width,
            height: self.height,
            strip: None,
        }
    }
}

/// Cross-section mass moments about the ideal (unnotched) centroid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SectionMoments {
    /// Area (m^2).
    pub area: f64,
    /// First moments (m^3).
    pub a1: f64,
    pub a2: f64,
    /// Second moments (m^4).
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl SectionMoments {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add(&self, other: &SectionMoments) -> SectionMoments {
        SectionMoments {
            area: self.area + other.area,
            a1: self.a1 + other.a1,
            a2: self.a2 + other.a2,
            a11: self.a11 + other.a11,
            a12: self.a12 + other.a12,
            a22: self.a22 + other.a22,
        }
    }

    pub fn scale(&self, c: f64) -> SectionMoments {
        SectionMoments {
            area: c * self.area,
            a1: c * self.a1,
            a2: c * self.a2,
            a11: c * self.a11,
            a12: c * self.a12,
            a22: c * self.a22,
        }
    }
}

/// Moments of the strip alone, signed (`Removed` contributes negatively),
/// taken about the ideal centroid of the base rectangle.
pub fn strip_moments(section: &RectangleSection) -> SectionMoments {
    let Some(strip) = section.strip else {
        return SectionMoments::zero();
    };
    let w = section.width;
    let h = section.height;
    let d = strip.depth;
    // x1 range of the strip about the base centroid.
    let (lo, hi) = match (strip.side, strip.sense) {
        (StripSide::X1Plus, StripSense::Removed) => (w / 2.0 - d, w / 2.0),
        (StripSide::X1Plus, StripSense::Added) => (w / 2.0, w / 2.0 + d),
        (StripSide::X1Minus, StripSense::Removed) => (-w / 2.0, -w / 2.0 + d),
        (StripSide::X1Minus, StripSense::Added) => (-w / 2.0 - d, -w / 2.0),
    };
    let sign = match strip.sense {
        StripSense::Removed => -1.0,
        StripSense::Added => 1.0,
    };
    // Full-height strip: x2 integrals are those of [-h/2, h/2].
    let m0 = hi - lo;
    let m1 = (hi * hi - lo * lo) / 2.0;
    let m2 = (hi * hi * hi - lo * lo * lo) / 3.0;
    SectionMoments {
        area: sign * m0 * h,
        a1: sign * m1 * h,
        a2: 0.0,
        a11: sign * m2 * h,
        a12: 0.0,
        a22: sign * m0 * h * h * h / 12.0,
    }
}

/// Closed-form rectangle moments, strip contribution included as a signed
/// delta about the ideal centroid.
pub fn section_moments(section: &RectangleSection) -> SectionMoments {
    let w = section.width;
    let h = section.height;
    let base = SectionMoments {
        area: w * h,
        a1: 0.0,
        a2: 0.0,
        a11: w * w * w * h / 12.0,
        a12: 0.0,
        a22: w * h * h * h / 12.0,
    };
    base.add(&strip_moments(section))
}

/// Sectional stiffness and rotary-inertia tensors in the director basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffnessTensors {
    /// Stretch/shear stiffness, N. `n = K (v - vhat) + T^T (u - uhat)`.
    pub k: Matrix3<f64>,
    /// Bending/torsion stiffness, N m^2. `m = J (u - uhat) + T (v - vhat)`.
    pub j: Matrix3<f64>,
    /// Curvature-stretch coupling, N m; zero for a centered section.
    pub t: Matrix3<f64>,
    /// Rotary-inertia moments (m^4): `I_lg = delta_lg A_mm - A_lg`, `I_33 = A_mm`.
    pub i_rot: Matrix3<f64>,
}

/// Linear map from moments to tensors, shared by the full section and by
/// per-unit-amplitude defect deltas (which are not valid sections on their
/// own and so skip validation).
pub(crate) fn tensors_from_moments(material: &Material, m: &SectionMoments) -> StiffnessTensors {
    let e = material.youngs_modulus;
    let g = material.shear_modulus;
    let k = Matrix3::from_diagonal(&Vector3::new(g * m.area, g * m.area, e * m.area));
    // Written in the identity form `I_lg = delta_lg A_mm - A_lg` so the
    // relation holds bit-exactly for any moments.
    let amm = m.a11 + m.a22;
    let i11 = amm - m.a11;
    let i22 = amm - m.a22;
    let i12 = -m.a12;
    let i33 = amm;
    let i_rot = Matrix3::new(
        i11, i12, 0.0, //
        i12, i22, 0.0, //
        0.0, 0.0, i33,
    );
    // The footnote's Kronecker delta makes J diagonal in the director frame.
    let j = Matrix3::from_diagonal(&Vector3::new(e * i11, e * i22, g * i33));
    let mut t = Matrix3::zeros();
    t[(0, 2)] = -e * m.a2;
    t[(1, 2)] = e * m.a1;
    t[(2, 0)] = g * m.a2;
    t[(2, 1)] = -g * m.a1;
    StiffnessTensors { k, j, t, i_rot }
}

/// Sectional tensors of a valid section.
pub fn stiffness_tensors(material: &Material, moments: &SectionMoments) -> Result<StiffnessTensors> {
    if !(moments.area > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "section area must be positive, got {}",
            moments.area
        )));
    }
    // 2x2 second-moment matrix must be SPD.
    let det = moments.a11 * moments.a22 - moments.a12 * moments.a12;
    if !(moments.a11 > 0.0) || det <= 0.0 {
        return Err(Error::InvalidGeometry(
            "second-moment matrix must be positive definite".into(),
        ));
    }
    Ok(tensors_from_moments(material, moments))
}

/// Shape of the rod when unloaded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ReferenceConfiguration {
    /// `uhat = 0`, `vhat = e_3`: a straight prismatic rod.
    StraightPrismatic,
    /// Constant intrinsic curvature/stretch. Representable, but the
    /// closed-form solvers reject it.
    Curved {
        intrinsic_curvature: [f64; 3],
        intrinsic_stretch: [f64; 3],
    },
}

impl ReferenceConfiguration {
    /// Intrinsic curvature uhat (1/m).
    pub fn uhat(&self) -> Vector3<f64> {
        match self {
            ReferenceConfiguration::StraightPrismatic => Vector3::zeros(),
            ReferenceConfiguration::Curved {
                intrinsic_curvature, ..
            } => Vector3::from(*intrinsic_curvature),
        }
    }

    /// Intrinsic stretch/shear vhat (dimensionless).
    pub fn vhat(&self) -> Vector3<f64> {
        match self {
            ReferenceConfiguration::StraightPrismatic => Vector3::z(),
            ReferenceConfiguration::Curved {
                intrinsic_stretch, ..
            } => Vector3::from(*intrinsic_stretch),
        }
    }

    pub fn is_straight_prismatic(&self) -> bool {
        matches!(self, ReferenceConfiguration::StraightPrismatic)
    }
}

/// Non-fatal model-validity warnings raised while constructing inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValidityWarning {
    /// `L / max(w, h)` below the slenderness bound for a 1-D rod model.
    LowSlenderness { ratio_milli: i64 },
    /// End displacements outside the linear (first order in epsilon) regime.
    LargeDisplacement { detail: String },
    /// Localized defect supports overlap; superposition is still applied.
    OverlappingProfiles { detail: String },
}

impl std::fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidityWarning::LowSlenderness { ratio_milli } => write!(
                f,
                "slenderness L/max(w,h) = {:.3} is below 5; rod kinematics may be inaccurate",
                *ratio_milli as f64 / 1000.0
            ),
            ValidityWarning::LargeDisplacement { detail } => {
                write!(f, "end displacement outside the linear regime: {detail}")
            }
            ValidityWarning::OverlappingProfiles { detail } => {
                write!(f, "overlapping defect profiles: {detail}")
            }
        }
    }
}

/// Complete description of one rod.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RodSpec {
    /// Length L (m); arc length runs 0..L.
    pub length: f64,
    pub material: Material,
    pub section: RectangleSection,
    pub reference: ReferenceConfiguration,
}

impl RodSpec {
    pub fn new(length: f64, material: Material, section: RectangleSection) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "rod length must be positive, got {length}"
            )));
        }
        Ok(Self {
            length,
            material,
            section,
            reference: ReferenceConfiguration::StraightPrismatic,
        })
    }

    /// The 150 x 6 x 15 um silicon cantilever beam used throughout the
    /// verification suite.
    pub fn reference_beam() -> Self {
        RodSpec::new(
            150e-6,
            Material::silicon(),
            RectangleSection::new(6e-6, 15e-6).unwrap(),
        )
        .unwrap()
    }

    /// Slenderness ratio `L / max(w, h)`.
    pub fn slenderness(&self) -> f64 {
        self.length / self.section.width.max(self.section.height)
    }

    /// Model-validity warnings (slenderness below 5).
    pub fn warnings(&self) -> Vec<ValidityWarning> {
        let mut out = Vec::new();
        let s = self.slenderness();
        if s < 5.0 {
            out.push(ValidityWarning::LowSlenderness {
                ratio_milli: (s * 1000.0).round() as i64,
            });
        }
        out
    }

    pub fn moments(&self) -> SectionMoments {
        section_moments(&self.section)
    }

    pub fn tensors(&self) -> Result<StiffnessTensors> {
        stiffness_tensors(&self.material, &self.moments())
    }

    /// Beam mass rho * A * L (kg), strip ignored (ideal mass).
    pub fn beam_mass(&self) -> f64 {
        self.material.density * section_moments(&self.section.base()).area * self.length
    }

    /// Stable hex digest of the rod parameters, for export provenance.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let text = serde_json::to_string(self).expect("rod spec serializes");
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let out = hasher.finalize();
        out.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
