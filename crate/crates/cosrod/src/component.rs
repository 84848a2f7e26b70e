//! End-point component models: ideal 12x12 stiffness plus defect stiffness
//! delta, effective mass data, and the export formats consumed by
//! component-level simulators.
//!
//! The defect stiffness is the exact Hessian in the end displacements of
//! the first-order defect energy, assembled from the closed-form quadratic
//! via polarization, so symmetry and amplitude-linearity hold by
//! construction. Modal estimates condense the 12x12 onto the free end and
//! pair it with a reduced mass built from the rod's own static deflection
//! shapes (a Rayleigh/static-condensation mass): the classic tip-force
//! contraction of that matrix is the 33/140 cantilever factor.

use nalgebra::{Matrix6, SMatrix, SVector, Vector6};
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::defect::DefectProfile;
use crate::error::{Error, Result};
use crate::ideal::{ideal_stiffness, solve_ideal, EndDisplacement, DOF_LABELS};
use crate::math::integrate;
use crate::perturb::{defect_energy, solve_correction};
use crate::rod::{RodSpec, ValidityWarning};

/// Which ends are clamped in a modal estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boundary {
    pub clamp_end1: bool,
    pub clamp_end2: bool,
}

impl Boundary {
    pub const CLAMP_END1: Boundary = Boundary {
        clamp_end1: true,
        clamp_end2: false,
    };
    pub const CLAMP_END2: Boundary = Boundary {
        clamp_end1: false,
        clamp_end2: true,
    };
    pub const FREE: Boundary = Boundary {
        clamp_end1: false,
        clamp_end2: false,
    };
}

/// Mass bookkeeping attached to a component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassData {
    /// Ideal beam mass rho A L (kg); defect mass changes are ignored.
    pub beam_kg: f64,
    /// Rigid tip attachment used by the last modal estimate (kg).
    pub tip_kg: f64,
    /// Documented per-DOF Rayleigh factors of the static-shape reduced
    /// mass, quoted in the Euler-Bernoulli limit. The assembled matrix
    /// uses the exact shear-modified shapes.
    pub factors: MassFactors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassFactors {
    /// Diagonal translational factor of the end block (13/35).
    pub translational_diag: f64,
    /// Tip-force-shape Rayleigh quotient (33/140).
    pub translational_tip_force: f64,
    /// Axial end factor (1/3).
    pub axial: f64,
    /// Torsional end factor (1/3).
    pub torsional: f64,
}

impl Default for MassFactors {
    fn default() -> Self {
        Self {
            translational_diag: 13.0 / 35.0,
            translational_tip_force: 33.0 / 140.0,
            axial: 1.0 / 3.0,
            torsional: 1.0 / 3.0,
        }
    }
}

/// Export provenance block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub rod: RodSpec,
    pub rod_digest: String,
    pub profiles: Vec<String>,
    pub tool_version: String,
}

/// A reduced end-point model of one rod: DOF ordering, ideal stiffness,
/// defect stiffness delta (amplitude already folded in), mass data, and
/// provenance. This is the unit a network-level simulator consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentModel {
    pub schema_version: String,
    pub name: String,
    pub dof_order: Vec<String>,
    pub units: Units,
    pub stiffness_ideal: Vec<Vec<f64>>,
    pub stiffness_defect_delta: Vec<Vec<f64>>,
    pub mass: MassData,
    pub provenance: Provenance,
    #[serde(skip)]
    pub warnings: Vec<ValidityWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub translation: String,
    pub rotation: String,
    pub force: String,
    pub moment: String,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            translation: "m".into(),
            rotation: "rad".into(),
            force: "N".into(),
            moment: "N*m".into(),
        }
    }
}

fn to_rows(m: &SMatrix<f64, 12, 12>) -> Vec<Vec<f64>> {
    (0..12).map(|i| (0..12).map(|j| m[(i, j)]).collect()).collect()
}

fn from_rows(rows: &[Vec<f64>]) -> SMatrix<f64, 12, 12> {
    let mut m = SMatrix::<f64, 12, 12>::zeros();
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    m
}

impl ComponentModel {
    pub fn k_ideal(&self) -> SMatrix<f64, 12, 12> {
        from_rows(&self.stiffness_ideal)
    }

    pub fn k_defect_delta(&self) -> SMatrix<f64, 12, 12> {
        from_rows(&self.stiffness_defect_delta)
    }

    pub fn rod(&self) -> &RodSpec {
        &self.provenance.rod
    }
}

/// Exact Hessian of the defect energy in the end displacements, assembled
/// by polarization of the quadratic form (so exactly symmetric). The
/// Hessian is computed at unit amplitude and scaled by `gamma`, which
/// makes amplitude linearity and the nick/blob mirror hold bitwise.
pub fn defect_stiffness(rod: &RodSpec, profile: &DefectProfile) -> Result<SMatrix<f64, 12, 12>> {
    let mut unit = profile.clone();
    unit.gamma = 1.0;
    let energy = |q: &EndDisplacement| -> Result<f64> {
        let ideal = solve_ideal(rod, q)?;
        let corr = solve_correction(rod, &unit, &ideal)?;
        defect_energy(rod, &unit, &ideal, &corr)
    };
    let mut h = SMatrix::<f64, 12, 12>::zeros();
    for i in 0..12 {
        h[(i, i)] = 2.0 * energy(&EndDisplacement::unit(i))?;
    }
    for i in 0..12 {
        for j in (i + 1)..12 {
            let mut plus = SVector::<f64, 12>::zeros();
            plus[i] = 1.0;
            plus[j] = 1.0;
            let mut minus = SVector::<f64, 12>::zeros();
            minus[i] = 1.0;
            minus[j] = -1.0;
            let b = (energy(&EndDisplacement(plus))? - energy(&EndDisplacement(minus))?) / 2.0;
            h[(i, j)] = b;
            h[(j, i)] = b;
        }
    }
    Ok(h * profile.gamma)
}

/// Assemble a component: ideal stiffness plus the superposed defect deltas
/// of all profiles. Overlapping localized profiles are allowed (first-order
/// superposition) but reported as a warning.
pub fn assemble_component(rod: &RodSpec, profiles: &[DefectProfile]) -> Result<ComponentModel> {
    let k_ideal = ideal_stiffness(rod)?;
    let mut delta = SMatrix::<f64, 12, 12>::zeros();
    for p in profiles {
        delta += defect_stiffness(rod, p)?;
    }

    let mut warnings = rod.warnings();
    let localized: Vec<&DefectProfile> = profiles.iter().filter(|p| p.is_localized()).collect();
    for (i, a) in localized.iter().enumerate() {
        for b in localized.iter().skip(i + 1) {
            let (alo, ahi) = a.support();
            let (blo, bhi) = b.support();
            if alo < bhi && blo < ahi {
                warnings.push(ValidityWarning::OverlappingProfiles {
                    detail: format!("'{}' overlaps '{}'", a.description, b.description),
                });
            }
        }
    }

    let digest = rod.digest();
    Ok(ComponentModel {
        schema_version: "1".into(),
        name: format!("beam-{digest}"),
        dof_order: DOF_LABELS.iter().map(|s| s.to_string()).collect(),
        units: Units::default(),
        stiffness_ideal: to_rows(&k_ideal),
        stiffness_defect_delta: to_rows(&delta),
        mass: MassData {
            beam_kg: rod.beam_mass(),
            tip_kg: 0.0,
            factors: MassFactors::default(),
        },
        provenance: Provenance {
            rod: rod.clone(),
            rod_digest: digest,
            profiles: profiles.iter().map(|p| p.description.clone()).collect(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
        },
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModalMethod {
    /// Condensed 6x6 stiffness with the static-shape reduced mass.
    CondensedEigen,
    /// Single-DOF tip-force Rayleigh estimate.
    Rayleigh,
}

/// A lowest-mode estimate of the clamped component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalEstimate {
    pub frequency_hz: f64,
    /// Mode shape over the six free-end DOFs (condensed method only).
    pub mode: Vec<f64>,
    pub method: ModalMethod,
}

fn free_dof_start(boundary: Boundary) -> Result<usize> {
    match (boundary.clamp_end1, boundary.clamp_end2) {
        (false, false) => Err(Error::Boundary(
            "a free-free component retains rigid-body modes; clamp at least one end".into(),
        )),
        (true, true) => Err(Error::Boundary(
            "both ends clamped leaves no free end DOFs to estimate a mode on".into(),
        )),
        (true, false) => Ok(6),
        (false, true) => Ok(0),
    }
}

/// Reduced mass on the free-end DOFs from the rod's static deflection
/// shapes: `M_ab = int rho [A r_a . r_b + phi_a . I_rot phi_b] ds` with
/// `r_a, phi_a` the ideal solution fields of a unit displacement of free
/// DOF `a` (clamped end held). The integrand is polynomial, integrated
/// exactly. Defect mass changes are ignored.
fn static_shape_mass(rod: &RodSpec, free_start: usize) -> Result<Matrix6<f64>> {
    let tensors = rod.tensors()?;
    let rho = rod.material.density;
    let area = rod.moments().area;
    let i_rot = tensors.i_rot;
    let shapes: Vec<_> = (0..6)
        .map(|j| solve_ideal(rod, &EndDisplacement::unit(free_start + j)))
        .collect::<Result<_>>()?;
    let mut m = Matrix6::<f64>::zeros();
    for a in 0..6 {
        for b in a..6 {
            let sa = &shapes[a];
            let sb = &shapes[b];
            let val = integrate(0.0, rod.length, 4, |s| {
                let ra = sa.displacement(s);
                let rb = sb.displacement(s);
                let pa = sa.rotation(s);
                let pb = sb.rotation(s);
                rho * (area * ra.dot(&rb) + pa.dot(&(i_rot * pb)))
            });
            m[(a, b)] = val;
            m[(b, a)] = val;
        }
    }
    Ok(m)
}

/// Lowest mode of the clamped component with a rigid point mass at the
/// free end: generalized eigenproblem of the condensed stiffness against
/// the static-shape reduced mass.
pub fn modal_estimate(
    component: &ComponentModel,
    boundary: Boundary,
    tip_mass_kg: f64,
) -> Result<ModalEstimate> {
    let free = free_dof_start(boundary)?;
    let k12 = component.k_ideal() + component.k_defect_delta();
    let k_red: Matrix6<f64> = k12.fixed_view::<6, 6>(free, free).into_owned();
    let mut m_red = static_shape_mass(component.rod(), free)?;
    for t in 0..3 {
        m_red[(t, t)] += tip_mass_kg;
    }

    let chol = m_red
        .cholesky()
        .ok_or_else(|| Error::Numerical("reduced mass matrix not positive definite".into()))?;
    let linv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular mass Cholesky factor".into()))?;
    let a = linv * k_red * linv.transpose();
    let a = (a + a.transpose()) * 0.5;
    let eig = a.symmetric_eigen();
    let (idx, lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, l)| (i, *l))
        .expect("6x6 eigensystem");
    if !(lambda > 0.0) {
        return Err(Error::Numerical(format!(
            "constrained component should have positive eigenvalues, got {lambda:e}"
        )));
    }
    let y = eig.eigenvectors.column(idx);
    let mode: Vector6<f64> = linv.transpose() * y;
    Ok(ModalEstimate {
        frequency_hz: lambda.sqrt() / (2.0 * std::f64::consts::PI),
        mode: mode.iter().copied().collect(),
        method: ModalMethod::CondensedEigen,
    })
}

/// Single-DOF Rayleigh estimate: tip-force stiffness of the weakest
/// bending direction against `tip mass + (33/140) beam mass`.
pub fn modal_estimate_rayleigh(
    component: &ComponentModel,
    boundary: Boundary,
    tip_mass_kg: f64,
) -> Result<ModalEstimate> {
    let free = free_dof_start(boundary)?;
    let k12 = component.k_ideal() + component.k_defect_delta();
    let k_red: Matrix6<f64> = k12.fixed_view::<6, 6>(free, free).into_owned();
    let compliance = k_red
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular condensed stiffness".into()))?;
    let k_x = 1.0 / compliance[(0, 0)];
    let k_y = 1.0 / compliance[(1, 1)];
    let k_tip = k_x.min(k_y);
    let m_eff = tip_mass_kg + component.mass.factors.translational_tip_force * component.mass.beam_kg;
    Ok(ModalEstimate {
        frequency_hz: (k_tip / m_eff).sqrt() / (2.0 * std::f64::consts::PI),
        mode: Vec::new(),
        method: ModalMethod::Rayleigh,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    MatrixText,
}

/// Serialize 17 significant digits, enough to round-trip any f64.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a component description to `destination`.
pub fn export_component(
    component: &ComponentModel,
    destination: &Path,
    format: ExportFormat,
) -> Result<()> {
    let text = match format {
        ExportFormat::Json => {
            let mut s = serde_json::to_string_pretty(component)
                .map_err(|e| Error::Serialization(e.to_string()))?;
            s.push('\n');
            s
        }
        ExportFormat::MatrixText => {
            let mut s = String::new();
            s.push_str(&format!("# component {}\n", component.name));
            s.push_str(&format!("# schema_version {}\n", component.schema_version));
            s.push_str(&format!(
                "# tool_version {}\n",
                component.provenance.tool_version
            ));
            s.push_str(&format!("# rod_digest {}\n", component.provenance.rod_digest));
            s.push_str(&format!("# dof_order {}\n", component.dof_order.join(" ")));
            s.push_str("# units translation=m rotation=rad force=N moment=N*m\n");
            s.push_str(&format!("# mass_beam_kg {}\n", fmt17(component.mass.beam_kg)));
            s.push_str(&format!("# mass_tip_kg {}\n", fmt17(component.mass.tip_kg)));
            for (title, rows) in [
                ("# stiffness_ideal", &component.stiffness_ideal),
                ("# stiffness_defect_delta", &component.stiffness_defect_delta),
            ] {
                s.push_str(title);
                s.push('\n');
                for row in rows.iter() {
                    let line: Vec<String> = row.iter().map(|v| fmt17(*v)).collect();
                    s.push_str(&line.join(" "));
                    s.push('\n');
                }
            }
            s
        }
    };
    std::fs::write(destination, text).map_err(|e| Error::io(destination, e))
}

/// Read back a JSON component export.
pub fn import_component(path: &Path) -> Result<ComponentModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Serialization(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defect::{make_blob, make_nick};
    use crate::rod::{Material, RectangleSection};
    use approx::assert_relative_eq;

    fn rod() -> RodSpec {
        RodSpec::new(
            150e-6,
            Material::new(169e9, 66e9, 2330.0).unwrap(),
            RectangleSection::new(6e-6, 15e-6).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn axial_defect_stiffness_matches_segmented_bar_first_order() {
        // dK[z2,z2] = gamma EA l_d / L^2 = -253.5 N/m for the nick of depth
        // 1.5 um and extent 1.5 um (gamma = -0.25).
        let rod = rod();
        let p = make_nick(&rod, 50e-6, 1.5e-6, 1.5e-6).unwrap();
        let h = defect_stiffness(&rod, &p).unwrap();
        let expect = p.gamma * 15.21 * 1.5e-6 / (150e-6f64).powi(2);
        assert_relative_eq!(h[(8, 8)], expect, max_relative = 1e-10);
        assert_relative_eq!(h[(8, 8)], -253.5, max_relative = 1e-10);
    }

    #[test]
    fn nick_and_blob_deltas_are_exact_negatives() {
        let rod = rod();
        let nick = make_nick(&rod, 50e-6, 2e-6, 1.5e-6).unwrap();
        let blob = make_blob(&rod, 50e-6, 2e-6, 1.5e-6).unwrap();
        let hn = defect_stiffness(&rod, &nick).unwrap();
        let hb = defect_stiffness(&rod, &blob).unwrap();
        assert!((hn + hb).amax() <= 1e-12 * hn.amax());
        // Sign: a nick softens the axial diagonal, a blob stiffens it.
        assert!(hn[(8, 8)] < 0.0);
        assert!(hb[(8, 8)] > 0.0);
    }

    #[test]
    fn defect_stiffness_matches_finite_difference_hessian() {
        let rod = rod();
        let p = make_nick(&rod, 100e-6, 3e-6, 3e-6).unwrap();
        let h = defect_stiffness(&rod, &p).unwrap();
        let energy = |q: &EndDisplacement| {
            let ideal = solve_ideal(&rod, q).unwrap();
            let c = solve_correction(&rod, &p, &ideal).unwrap();
            defect_energy(&rod, &p, &ideal, &c).unwrap()
        };
        let step = 1e-6 * rod.length;
        let mut fd = SMatrix::<f64, 12, 12>::zeros();
        for i in 0..12 {
            for j in 0..12 {
                let mut qpp = SVector::<f64, 12>::zeros();
                qpp[i] += step;
                qpp[j] += step;
                let mut qpm = SVector::<f64, 12>::zeros();
                qpm[i] += step;
                qpm[j] -= step;
                let mut qmp = SVector::<f64, 12>::zeros();
                qmp[i] -= step;
                qmp[j] += step;
                let mut qmm = SVector::<f64, 12>::zeros();
                qmm[i] -= step;
                qmm[j] -= step;
                fd[(i, j)] = (energy(&EndDisplacement(qpp)) - energy(&EndDisplacement(qpm))
                    - energy(&EndDisplacement(qmp))
                    + energy(&EndDisplacement(qmm)))
                    / (4.0 * step * step);
            }
        }
        assert!(
            (h - fd).norm() <= 1e-6 * h.norm(),
            "relative deviation {:.3e}",
            (h - fd).norm() / h.norm()
        );
    }

    #[test]
    fn assembly_superposes_disjoint_profiles_exactly() {
        let rod = rod();
        let p1 = make_nick(&rod, 40e-6, 2e-6, 1e-6).unwrap();
        let p2 = make_nick(&rod, 110e-6, 2e-6, 1e-6).unwrap();
        let both = assemble_component(&rod, &[p1.clone(), p2.clone()]).unwrap();
        let d1 = defect_stiffness(&rod, &p1).unwrap();
        let d2 = defect_stiffness(&rod, &p2).unwrap();
        assert_relative_eq!(both.k_defect_delta(), d1 + d2, epsilon = 0.0);
        assert!(both.warnings.is_empty());

        let empty = assemble_component(&rod, &[]).unwrap();
        assert_eq!(empty.k_defect_delta(), SMatrix::<f64, 12, 12>::zeros());
    }

    #[test]
    fn overlapping_profiles_warn_but_superpose() {
        let rod = rod();
        let p1 = make_nick(&rod, 50e-6, 4e-6, 1e-6).unwrap();
        let p2 = make_nick(&rod, 52e-6, 4e-6, 1e-6).unwrap();
        let c = assemble_component(&rod, &[p1, p2]).unwrap();
        assert!(c
            .warnings
            .iter()
            .any(|w| matches!(w, ValidityWarning::OverlappingProfiles { .. })));
    }

    #[test]
    fn case_v_delta_norm_is_bounded_by_amplitude() {
        let rod = rod();
        let p = make_nick(&rod, 100e-6, 1.5e-6, 1.5e-6).unwrap();
        let c = assemble_component(&rod, &[p]).unwrap();
        let ratio = c.k_defect_delta().norm() / c.k_ideal().norm();
        assert!(ratio < 0.25, "delta/ideal Frobenius ratio {ratio:.3}");
        assert!(ratio > 0.0);
    }

    #[test]
    fn ideal_cantilever_frequency_near_analytic() {
        // Analytic Euler-Bernoulli cantilever: 366.9 kHz for the reference
        // beam; the condensed estimate must agree within 1%.
        let rod = rod();
        let c = assemble_component(&rod, &[]).unwrap();
        let est = modal_estimate(&c, Boundary::CLAMP_END1, 0.0).unwrap();
        let t = rod.tensors().unwrap();
        let analytic = (1.875104068711961f64.powi(2) / (2.0 * std::f64::consts::PI))
            * (t.j[(1, 1)] / (rod.material.density * rod.moments().area * rod.length.powi(4)))
                .sqrt();
        assert_relative_eq!(analytic, 366.9e3, max_relative = 2e-3);
        assert!(
            (est.frequency_hz - analytic).abs() / analytic < 0.01,
            "got {:.1} Hz vs analytic {:.1} Hz",
            est.frequency_hz,
            analytic
        );
        // Clamping the other end is the mirror problem.
        let est2 = modal_estimate(&c, Boundary::CLAMP_END2, 0.0).unwrap();
        assert_relative_eq!(est.frequency_hz, est2.frequency_hz, max_relative = 1e-9);
    }

    #[test]
    fn tip_mass_frequency_near_rayleigh_oracle() {
        // 0.1573 paper-mass-units = 1.573e-10 kg on the reference beam:
        // Rayleigh oracle (1/2pi) sqrt((3EJ/L^3)/(M + 33/140 rho A L)) ~ 79.0 kHz.
        let rod = rod();
        let c = assemble_component(&rod, &[]).unwrap();
        let tip = 1.573e-10;
        let est = modal_estimate(&c, Boundary::CLAMP_END1, tip).unwrap();
        let t = rod.tensors().unwrap();
        let k = 3.0 * t.j[(1, 1)] / rod.length.powi(3);
        let m = tip + (33.0 / 140.0) * rod.beam_mass();
        let oracle = (k / m).sqrt() / (2.0 * std::f64::consts::PI);
        assert_relative_eq!(oracle, 79.0e3, max_relative = 2e-3);
        assert!((est.frequency_hz - oracle).abs() / oracle < 0.01);
        // The rayleigh-tagged method reproduces its own formula closely
        // (it uses the exact shear-deformable tip stiffness).
        let ray = modal_estimate_rayleigh(&c, Boundary::CLAMP_END1, tip).unwrap();
        assert!((ray.frequency_hz - oracle).abs() / oracle < 0.005);
        assert_eq!(ray.method, ModalMethod::Rayleigh);
    }

    #[test]
    fn defects_shift_the_tip_mass_frequency_monotonically() {
        let rod = rod();
        let tip = 1.573e-10;
        let ideal = assemble_component(&rod, &[]).unwrap();
        let f0 = modal_estimate(&ideal, Boundary::CLAMP_END2, tip)
            .unwrap()
            .frequency_hz;
        let nick = make_nick(&rod, 50e-6, 1.5e-6, 1.5e-6).unwrap();
        let fn_ = modal_estimate(
            &assemble_component(&rod, &[nick]).unwrap(),
            Boundary::CLAMP_END2,
            tip,
        )
        .unwrap()
        .frequency_hz;
        let blob = make_blob(&rod, 50e-6, 1.5e-6, 1.5e-6).unwrap();
        let fb = modal_estimate(
            &assemble_component(&rod, &[blob]).unwrap(),
            Boundary::CLAMP_END2,
            tip,
        )
        .unwrap()
        .frequency_hz;
        assert!(fn_ < f0, "nick must lower the frequency");
        assert!(fb > f0, "blob must raise the frequency");
    }

    #[test]
    fn boundary_errors() {
        let c = assemble_component(&rod(), &[]).unwrap();
        assert!(matches!(
            modal_estimate(&c, Boundary::FREE, 0.0),
            Err(Error::Boundary(_))
        ));
        let both = Boundary {
            clamp_end1: true,
            clamp_end2: true,
        };
        assert!(modal_estimate(&c, both, 0.0).is_err());
    }

    #[test]
    fn json_export_round_trips_bitwise() {
        let rod = rod();
        let p = make_nick(&rod, 100e-6, 1.5e-6, 1.5e-6).unwrap();
        let c = assemble_component(&rod, &[p]).unwrap();
        let dir = std::env::temp_dir().join(format!("cosrod-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("component.json");
        export_component(&c, &path, ExportFormat::Json).unwrap();
        let back = import_component(&path).unwrap();
        assert_eq!(back.k_ideal(), c.k_ideal());
        assert_eq!(back.k_defect_delta(), c.k_defect_delta());
        assert_eq!(back.schema_version, "1");
        assert_eq!(back.dof_order, DOF_LABELS.to_vec());
        // Re-export must be byte-identical.
        let path2 = dir.join("component2.json");
        export_component(&back, &path2, ExportFormat::Json).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn matrix_text_export_shape() {
        let rod = rod();
        let c = assemble_component(&rod, &[]).unwrap();
        let dir = std::env::temp_dir().join(format!("cosrod-test-mt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("component.txt");
        export_component(&c, &path, ExportFormat::MatrixText).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let data_lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data_lines.len(), 24);
        for line in data_lines {
            assert_eq!(line.split_whitespace().count(), 12);
        }
        std::fs::remove_dir_all(&dir).ok();
    }
}
