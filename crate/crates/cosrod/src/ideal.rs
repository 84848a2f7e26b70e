//! Closed-form quasi-static solution for the ideal prismatic rod and the
//! 12x12 end-point stiffness it induces.
//!
//! With inertial terms and distributed loads dropped, the rod equations
//! reduce to
//!
//! ```text
//! d/ds n = 0,        d/ds m + e_3 x n = 0
//! ```
//!
//! so at first order in the end displacements the internal force `n` is
//! constant and the moment is linear: `m(s) = k_m - s (e_3 x k_n)`. The
//! strain fields follow from the sectional law (`dv = K^-1 n`,
//! `du = J^-1 m`) and the kinematic coupling
//!
//! ```text
//! phi' = du,          r' = dv + phi x e_3,
//! ```
//!
//! all integrable in closed form (polynomials in `s`). The six constants
//! `(k_n, k_m)` are fixed by matching the prescribed values at `s = L`.
//! Everything is linear in the end-displacement vector `Q`, which is what
//! lets the perturbation solver reuse these fields exactly.

use nalgebra::{Matrix3, Matrix6, SMatrix, SVector, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::skew;
use crate::rod::{RodSpec, ValidityWarning};

/// DOF labels of the end-displacement vector, in storage order.
pub const DOF_LABELS: [&str; 12] = [
    "x1", "y1", "z1", "phix1", "phiy1", "phiz1", //
    "x2", "y2", "z2", "phix2", "phiy2", "phiz2",
];

/// Prescribed end-point displacement/rotation increments.
///
/// Ordering: `[x1, y1, z1, phix1, phiy1, phiz1, x2, y2, z2, phix2, phiy2,
/// phiz2]`, translations in meters, rotations in radians. End 1 is `s = 0`,
/// end 2 is `s = L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndDisplacement(pub SVector<f64, 12>);

impl EndDisplacement {
    pub fn zero() -> Self {
        Self(SVector::zeros())
    }

    pub fn from_slice(q: &[f64; 12]) -> Self {
        Self(SVector::from_column_slice(q))
    }

    /// Unit displacement along a single DOF (index into [`DOF_LABELS`]).
    pub fn unit(dof: usize) -> Self {
        let mut q = SVector::zeros();
        q[dof] = 1.0;
        Self(q)
    }

    pub fn translation_end1(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(0).into()
    }

    pub fn rotation_end1(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(3).into()
    }

    pub fn translation_end2(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(6).into()
    }

    pub fn rotation_end2(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(9).into()
    }

    /// Linear-regime warnings against a given rod.
    pub fn warnings(&self, rod: &RodSpec) -> Vec<ValidityWarning> {
        let mut out = Vec::new();
        let max_t = self
            .translation_end1()
            .amax()
            .max(self.translation_end2().amax());
        let max_r = self.rotation_end1().amax().max(self.rotation_end2().amax());
        if max_t / rod.length > 0.1 {
            out.push(ValidityWarning::LargeDisplacement {
                detail: format!(
                    "max translation {:.3e} m exceeds 10% of length {:.3e} m",
                    max_t, rod.length
                ),
            });
        }
        if max_r > 0.1 {
            out.push(ValidityWarning::LargeDisplacement {
                detail: format!("max rotation {max_r:.3e} rad exceeds 0.1 rad"),
            });
        }
        out
    }
}

/// Closed-form first-order solution for an ideal rod under prescribed end
/// displacements. All field evaluators are polynomials in `s`, linear in
/// the inputs.
#[derive(Debug, Clone)]
pub struct IdealSolution {
    /// Constant internal force (N).
    pub k_n: Vector3<f64>,
    /// Moment integration constant (N m); `m(s) = k_m - s e_3 x k_n`.
    pub k_m: Vector3<f64>,
    pub(crate) length: f64,
    pub(crate) k_inv: Matrix3<f64>,
    pub(crate) j_inv: Matrix3<f64>,
    r0: Vector3<f64>,
    phi0: Vector3<f64>,
    q: EndDisplacement,
}

impl IdealSolution {
    /// Internal force n(s), constant in s.
    pub fn force(&self, _s: f64) -> Vector3<f64> {
        self.k_n
    }

    /// Internal moment m(s).
    pub fn moment(&self, s: f64) -> Vector3<f64> {
        self.k_m - s * Vector3::z().cross(&self.k_n)
    }

    /// Stretch/shear strain dv(s) = v - vhat (dimensionless).
    pub fn strain(&self, s: f64) -> Vector3<f64> {
        self.k_inv * self.force(s)
    }

    /// Curvature/twist du(s) = u - uhat (1/m).
    pub fn curvature(&self, s: f64) -> Vector3<f64> {
        self.j_inv * self.moment(s)
    }

    /// Section rotation increment phi(s) (rad).
    pub fn rotation(&self, s: f64) -> Vector3<f64> {
        let a3 = skew(&Vector3::z());
        self.phi0 + self.j_inv * (self.k_m * s - a3 * self.k_n * (s * s / 2.0))
    }

    /// Centerline displacement increment r(s) (m).
    pub fn displacement(&self, s: f64) -> Vector3<f64> {
        let a3 = skew(&Vector3::z());
        let s2 = s * s;
        let s3 = s2 * s;
        let int_phi = self.phi0 * s + self.j_inv * (self.k_m * (s2 / 2.0) - a3 * self.k_n * (s3 / 6.0));
        self.r0 + self.k_inv * self.k_n * s - a3 * int_phi
    }

    /// Generalized end loads conjugate to the DOF ordering of `Q`:
    /// `[F1, M1, F2, M2] = [-n(0), -m(0), n(L), m(L)]`.
    pub fn end_loads(&self) -> SVector<f64, 12> {
        let mut f = SVector::<f64, 12>::zeros();
        f.fixed_rows_mut::<3>(0).copy_from(&(-self.k_n));
        f.fixed_rows_mut::<3>(3).copy_from(&(-self.k_m));
        f.fixed_rows_mut::<3>(6).copy_from(&self.k_n);
        f.fixed_rows_mut::<3>(9).copy_from(&self.moment(self.length));
        f
    }

    pub fn end_displacement(&self) -> &EndDisplacement {
        &self.q
    }

    /// Worst mismatch between the field evaluators at the ends and the
    /// prescribed `Q`, relative to `max(|Q|, 1)`-free scale. Diagnostic.
    pub fn boundary_residual(&self) -> f64 {
        let scale = self.q.0.amax().max(1e-300);
        let mut worst: f64 = 0.0;
        let checks = [
            (self.displacement(0.0), self.q.translation_end1()),
            (self.rotation(0.0), self.q.rotation_end1()),
            (self.displacement(self.length), self.q.translation_end2()),
            (self.rotation(self.length), self.q.rotation_end2()),
        ];
        for (got, want) in checks {
            worst = worst.max((got - want).amax());
        }
        worst / scale
    }

    /// Max finite-difference residual of the quasi-static equations at
    /// `n_samples` interior points, normalized by the internal-load scale.
    pub fn ode_residual(&self, n_samples: usize) -> f64 {
        let l = self.length;
        let h = l * 1e-6;
        let scale = self.k_n.norm() / l + self.k_m.norm() / (l * l) + 1e-300;
        let mut worst: f64 = 0.0;
        for i in 0..n_samples {
            let s = (i as f64 + 0.5) / n_samples as f64 * l;
            let dn = (self.force(s + h) - self.force(s - h)) / (2.0 * h);
            let dm = (self.moment(s + h) - self.moment(s - h)) / (2.0 * h);
            let res_m = dm + Vector3::z().cross(&self.force(s));
            worst = worst.max(dn.norm()).max(res_m.norm() / l);
        }
        worst / scale
    }
}

fn checked_tensors(rod: &RodSpec) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    if !rod.reference.is_straight_prismatic() {
        return Err(Error::UnsupportedConfiguration(
            "solve_ideal covers only the straight prismatic reference (uhat = 0, vhat = e3); \
             pre-curved rods are out of scope"
                .into(),
        ));
    }
    let moments = rod.moments();
    let area_scale = moments.area.powf(1.5);
    if moments.a1.abs() > 1e-12 * area_scale || moments.a2.abs() > 1e-12 * area_scale {
        return Err(Error::UnsupportedConfiguration(
            "solve_ideal requires a centered ideal section (A_1 = A_2 = 0, T = 0); \
             represent one-sided material changes as defect profiles instead"
                .into(),
        ));
    }
    let tensors = rod.tensors()?;
    let k_inv = tensors
        .k
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular K tensor".into()))?;
    let j_inv = tensors
        .j
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular J tensor".into()))?;
    Ok((k_inv, j_inv))
}

/// Solve the quasi-static first-order problem for prescribed end values.
pub fn solve_ideal(rod: &RodSpec, q: &EndDisplacement) -> Result<IdealSolution> {
    let (k_inv, j_inv) = checked_tensors(rod)?;
    let l = rod.length;
    let a3 = skew(&Vector3::z());

    // Linear map (k_n, k_m) -> (dphi_pred, dr_pred) evaluated on basis
    // vectors; assembling numerically keeps the algebra in one place.
    let predict = |k_n: &Vector3<f64>, k_m: &Vector3<f64>| -> (Vector3<f64>, Vector3<f64>) {
        let dphi = j_inv * (k_m * l - a3 * k_n * (l * l / 2.0));
        let int_phi_lin = j_inv * (k_m * (l * l / 2.0) - a3 * k_n * (l * l * l / 6.0));
        let dr = k_inv * k_n * l - a3 * int_phi_lin;
        (dphi, dr)
    };

    let mut system = Matrix6::<f64>::zeros();
    for i in 0..6 {
        let mut basis = Vector6::<f64>::zeros();
        basis[i] = 1.0;
        let k_n: Vector3<f64> = basis.fixed_rows::<3>(0).into();
        let k_m: Vector3<f64> = basis.fixed_rows::<3>(3).into();
        let (dphi, dr) = predict(&k_n, &k_m);
        system.fixed_view_mut::<3, 1>(0, i).copy_from(&dphi);
        system.fixed_view_mut::<3, 1>(3, i).copy_from(&dr);
    }

    let phi1 = q.rotation_end1();
    let target_dphi = q.rotation_end2() - phi1;
    let target_dr = q.translation_end2() - q.translation_end1() + a3 * phi1 * l;
    let mut rhs = Vector6::<f64>::zeros();
    rhs.fixed_rows_mut::<3>(0).copy_from(&target_dphi);
    rhs.fixed_rows_mut::<3>(3).copy_from(&target_dr);

    let sol = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular end-condition system".into()))?;

    Ok(IdealSolution {
        k_n: sol.fixed_rows::<3>(0).into(),
        k_m: sol.fixed_rows::<3>(3).into(),
        length: l,
        k_inv,
        j_inv,
        r0: q.translation_end1(),
        phi0: phi1,
        q: *q,
    })
}

/// Ideal 12x12 end-point stiffness: column `j` holds the end loads of the
/// unit displacement `Q = e_j`. Symmetric positive semidefinite with the
/// six rigid-body motions in its null space.
pub fn ideal_stiffness(rod: &RodSpec) -> Result<SMatrix<f64, 12, 12>> {
    let mut k = SMatrix::<f64, 12, 12>::zeros();
    for j in 0..12 {
        let sol = solve_ideal(rod, &EndDisplacement::unit(j))?;
        k.set_column(j, &sol.end_loads());
    }
    // Conservative system: K is symmetric up to roundoff; make it exact.
    Ok((k + k.transpose()) * 0.5)
}
