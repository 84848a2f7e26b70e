//! Cosserat rod models of slender beams with manufacturing defects.
//!
//! The crate builds component-level models of MEMS beams: an ideal
//! prismatic rod is solved in closed form, localized defects (blobs,
//! nicks) and random flank jitter enter as first-order perturbations of
//! the sectional tensors, and the result is reduced to a 12x12 end-point
//! stiffness plus a defect stiffness delta suitable for network-level
//! simulation. A variable-section shear-deformable beam FEM with a
//! mesh-extrapolation harness provides independent verification.
//!
//! Module map:
//!
//! - [`rod`] geometry, material, section moments, sectional tensors
//! - [`ideal`] closed-form ideal solution and 12x12 stiffness
//! - [`defect`] defect profiles and their moment functionals
//! - [`perturb`] first-order correction fields and the defect energy
//! - [`component`] component assembly, modal estimates, export formats
//! - [`fem`] verification FEM, mesh ladders, extrapolation, case reports

// Validation guards are written as `!(x > 0.0)` so NaN inputs are rejected
// along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod component;
pub mod defect;
pub mod error;
pub mod fem;
pub mod ideal;
pub mod math;
pub mod perturb;
pub mod rod;

pub use component::{
    assemble_component, defect_stiffness, export_component, import_component, modal_estimate,
    modal_estimate_rayleigh, Boundary, ComponentModel, ExportFormat, MassData, ModalEstimate,
    ModalMethod,
};
pub use defect::{
    make_blob, make_blob_shaped, make_jitter, make_nick, make_nick_shaped, moment_functionals,
    sample_jitter_realization, DefectKind, DefectProfile, MomentFunctionals, ShapeFn, ShapeKind,
    GAMMA_CAP,
};
pub use error::{Error, Result};
pub use fem::{
    build_mesh, compare_cases, extrapolate, format_significant, lowest_frequency_fem, rows_to_csv,
    run_ladder, CaseRow, CaseSpec, ExtrapolationFit, FemModel, LadderPoint,
};
pub use ideal::{ideal_stiffness, solve_ideal, EndDisplacement, IdealSolution, DOF_LABELS};
pub use perturb::{defect_energy, residual_check, solve_correction, CorrectionSolution, ResidualReport};
pub use rod::{
    section_moments, stiffness_tensors, strip_moments, Material, RectangleSection,
    ReferenceConfiguration, RodSpec, SectionMoments, StiffnessTensors, Strip, StripSense,
    StripSide, ValidityWarning,
};
