//! Spin and helicity checks behind the "Dirac spinors carry spin 1/2"
//! argument: a spacetime vector packed into a Hermitian 2x2 matrix, z-axis
//! rotations realized as SL(2,C) conjugation, the half-angle spinor phase,
//! and the helicity-1 and helicity-2 phases of electromagnetic and
//! gravitational plane-wave polarizations.

use serde::{Deserialize, Serialize};

use crate::matrix::Mat;
use crate::report::CheckRecord;
use crate::scalar::C64;
use num::Zero;

pub const TOL: f64 = 1e-12;

/// v = V^0 I + V^1 sigma^1 + V^2 sigma^2 + V^3 sigma^3, entrywise
/// [[V0+V3, V1-iV2], [V1+iV2, V0-V3]].
pub fn vector_to_matrix(v: &[f64; 4]) -> Mat<C64> {
    Mat::from_rows(vec![
        vec![C64::new(v[0] + v[3], 0.0), C64::new(v[1], -v[2])],
        vec![C64::new(v[1], v[2]), C64::new(v[0] - v[3], 0.0)],
    ])
}

pub fn det2(m: &Mat<C64>) -> C64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Minkowski norm eta_ab V^a V^b with signature (-1, 1, 1, 1); null
/// vectors have vanishing norm, equivalently det v = 0.
pub fn minkowski_norm(v: &[f64; 4]) -> f64 {
    -v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]
}

/// The SL(2,C) representative of a z-rotation by phi.
pub fn spinor_rotation(phi: f64) -> Mat<C64> {
    Mat::from_rows(vec![
        vec![C64::from_polar(1.0, phi / 2.0), C64::zero()],
        vec![C64::zero(), C64::from_polar(1.0, -phi / 2.0)],
    ])
}

/// v' = U v U^dagger.
pub fn rotate_z(v: &Mat<C64>, phi: f64) -> Mat<C64> {
    let u = spinor_rotation(phi);
    u.mul(v).mul(&u.adjoint())
}

/// The 4x4 z-rotation acting on vector components.
pub fn rotate_z_vector(v: &[f64; 4], phi: f64) -> [f64; 4] {
    let (s, c) = phi.sin_cos();
    [v[0], c * v[1] + s * v[2], -s * v[1] + c * v[2], v[3]]
}

/// Helicity phases extracted from the explicit rotation action (not from
/// the closed exponential forms, which the suite compares against).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HelicityPhases {
    pub spinor: [f64; 2],
    pub photon_plus: [f64; 2],
    pub photon_minus: [f64; 2],
    pub graviton_plus: [f64; 2],
    pub graviton_minus: [f64; 2],
}

fn c64_pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn helicity_phases(phi: f64) -> HelicityPhases {
    // Left Weyl spinor (1, 0) under U(phi).
    let u = spinor_rotation(phi);
    let spinor_phase = u[(0, 0)];

    // Electromagnetic polarization (0, e1, e2, 0): rotate the vector
    // components, then form e_pm = e1 -+ i e2.
    let e1 = C64::new(0.35, -0.6);
    let e2 = C64::new(-0.8, 0.15);
    let (s, c) = phi.sin_cos();
    let e1r = e1 * C64::new(c, 0.0) + e2 * C64::new(s, 0.0);
    let e2r = e1 * C64::new(-s, 0.0) + e2 * C64::new(c, 0.0);
    let i = C64::new(0.0, 1.0);
    let photon_plus = (e1r - i * e2r) / (e1 - i * e2);
    let photon_minus = (e1r + i * e2r) / (e1 + i * e2);

    // Gravitational-wave polarization tensor in transverse traceless
    // gauge, rotated as a rank-2 tensor: eps' = R eps R^T.
    let g11 = C64::new(0.45, 0.3);
    let g12 = C64::new(-0.2, 0.7);
    let eps = gw_polarization(g11, g12);
    let epsr = rotate_tensor(&eps, phi);
    let graviton_plus = (epsr[(1, 1)] - i * epsr[(1, 2)]) / (g11 - i * g12);
    let graviton_minus = (epsr[(1, 1)] + i * epsr[(1, 2)]) / (g11 + i * g12);

    HelicityPhases {
        spinor: c64_pair(spinor_phase),
        photon_plus: c64_pair(photon_plus),
        photon_minus: c64_pair(photon_minus),
        graviton_plus: c64_pair(graviton_plus),
        graviton_minus: c64_pair(graviton_minus),
    }
}

/// TT-gauge plane-wave polarization tensor for propagation along z.
pub fn gw_polarization(e11: C64, e12: C64) -> Mat<C64> {
    let z = C64::zero();
    Mat::from_rows(vec![
        vec![z, z, z, z],
        vec![z, e11, e12, z],
        vec![z, e12, -e11, z],
        vec![z, z, z, z],
    ])
}

/// eps' = R eps R^T with the 4x4 z-rotation.
pub fn rotate_tensor(eps: &Mat<C64>, phi: f64) -> Mat<C64> {
    let (s, c) = phi.sin_cos();
    let z = C64::zero();
    let one = C64::new(1.0, 0.0);
    let r = Mat::from_rows(vec![
        vec![one, z, z, z],
        vec![z, C64::new(c, 0.0), C64::new(s, 0.0), z],
        vec![z, C64::new(-s, 0.0), C64::new(c, 0.0), z],
        vec![z, z, z, one],
    ]);
    let rt = {
        let mut t = Mat::<C64>::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                t[(i, j)] = r[(j, i)];
            }
        }
        t
    };
    r.mul(eps).mul(&rt)
}

/// The full appendix suite at the given angles.
pub fn run_spin_suite(angles: &[f64]) -> Vec<CheckRecord> {
    let suite = "spin_rotations";
    let mut checks = Vec::new();

    // Chosen null vector: V = (1, 0, 0, 1)/2 packs into [[1,0],[0,0]].
    let v_null = [0.5, 0.0, 0.0, 0.5];
    let m = vector_to_matrix(&v_null);
    let residual = (m[(0, 0)] - C64::new(1.0, 0.0)).norm()
        + m[(0, 1)].norm()
        + m[(1, 0)].norm()
        + m[(1, 1)].norm();
    checks.push(CheckRecord::new(
        suite,
        "null_vector_matrix",
        "V = (1,0,0,1)/2".into(),
        residual,
        residual <= TOL,
    ));
    let time = vector_to_matrix(&[1.0, 0.0, 0.0, 0.0]);
    let id_res = time.sub(&Mat::identity(2)).max_abs();
    checks.push(CheckRecord::new(
        suite,
        "timelike_vector_matrix",
        "V = (1,0,0,0) gives the identity".into(),
        id_res,
        id_res <= TOL,
    ));

    // det v = 0 exactly when the vector is null.
    for (v, null) in [
        ([1.0, 1.0, 0.0, 0.0], true),
        ([1.0, 0.0, 0.0, 0.0], false),
        ([5.0, 3.0, 0.0, 4.0], true),
        ([1.0, 2.0, 2.0, 1.0], false),
    ] {
        let det = det2(&vector_to_matrix(&v)).norm();
        let eta = minkowski_norm(&v).abs();
        let consistent = (det <= TOL) == (eta <= TOL) && ((det <= TOL) == null);
        checks.push(CheckRecord::new(
            suite,
            "null_condition",
            format!("det = {det:.3e}, eta norm = {eta:.3e}"),
            (det - eta).abs(),
            consistent && (det - eta).abs() <= 1e-9,
        ));
    }

    for &phi in angles {
        // Route agreement: SL(2,C) conjugation equals the SO(2)-rotated
        // vector repacked.
        let v = [0.3, 1.2, -0.7, 0.4];
        let via_su2 = rotate_z(&vector_to_matrix(&v), phi);
        let via_so2 = vector_to_matrix(&rotate_z_vector(&v, phi));
        let residual = via_su2.sub(&via_so2).max_abs();
        checks.push(CheckRecord::new(
            suite,
            "rotation_route_agreement",
            format!("phi = {phi:.4}"),
            residual,
            residual <= TOL,
        ));
        // det invariance.
        let d0 = det2(&vector_to_matrix(&v));
        let d1 = det2(&via_su2);
        let res = (d0 - d1).norm();
        checks.push(CheckRecord::new(
            suite,
            "det_invariant",
            format!("phi = {phi:.4}"),
            res,
            res <= TOL,
        ));

        // Off-diagonal entry picks up exp(i phi).
        let expect = vector_to_matrix(&v)[(0, 1)] * C64::from_polar(1.0, phi);
        let res = (via_su2[(0, 1)] - expect).norm();
        checks.push(CheckRecord::new(
            suite,
            "offdiagonal_phase",
            format!("phi = {phi:.4}"),
            res,
            res <= TOL,
        ));

        // Helicity phases from the rotation action.
        let phases = helicity_phases(phi);
        let close =
            |got: [f64; 2], want: C64| -> f64 { (C64::new(got[0], got[1]) - want).norm() };
        let spinor_res = close(phases.spinor, C64::from_polar(1.0, phi / 2.0));
        checks.push(CheckRecord::new(
            suite,
            "spinor_half_angle",
            format!("phi = {phi:.4}"),
            spinor_res,
            spinor_res <= TOL,
        ));
        let photon_res = close(phases.photon_plus, C64::from_polar(1.0, phi))
            .max(close(phases.photon_minus, C64::from_polar(1.0, -phi)));
        checks.push(CheckRecord::new(
            suite,
            "photon_helicity_1",
            format!("phi = {phi:.4}"),
            photon_res,
            photon_res <= TOL,
        ));
        let gw_res = close(phases.graviton_plus, C64::from_polar(1.0, 2.0 * phi))
            .max(close(phases.graviton_minus, C64::from_polar(1.0, -2.0 * phi)));
        checks.push(CheckRecord::new(
            suite,
            "graviton_helicity_2",
            format!("phi = {phi:.4}"),
            gw_res,
            gw_res <= TOL,
        ));

        // The rotated polarization tensor stays symmetric, traceless and
        // transverse.
        let eps =
            rotate_tensor(&gw_polarization(C64::new(0.9, 0.0), C64::new(0.0, 0.4)), phi);
        let mut res = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                res = res.max((eps[(i, j)] - eps[(j, i)]).norm());
            }
        }
        res = res.max((eps[(1, 1)] + eps[(2, 2)]).norm());
        for i in 0..4 {
            res = res.max(eps[(0, i)].norm()).max(eps[(3, i)].norm());
        }
        checks.push(CheckRecord::new(
            suite,
            "gw_tensor_gauge",
            format!("phi = {phi:.4}"),
            res,
            res <= TOL,
        ));
    }

    // Double cover: at phi = 2 pi the vector returns, the spinor flips.
    let v = [0.3, 1.2, -0.7, 0.4];
    let full = rotate_z(&vector_to_matrix(&v), 2.0 * std::f64::consts::PI);
    let vec_res = full.sub(&vector_to_matrix(&v)).max_abs();
    let u = spinor_rotation(2.0 * std::f64::consts::PI);
    let spin_res = (u[(0, 0)] + C64::new(1.0, 0.0)).norm();
    checks.push(CheckRecord::new(
        suite,
        "double_cover",
        "vector returns at 2 pi while the spinor phase is -1".into(),
        vec_res.max(spin_res),
        vec_res <= TOL && spin_res <= TOL,
    ));

    // Composition of rotations adds angles.
    let a = 0.7;
    let b = 1.9;
    let lhs = rotate_z(&rotate_z(&vector_to_matrix(&v), a), b);
    let rhs = rotate_z(&vector_to_matrix(&v), a + b);
    let res = lhs.sub(&rhs).max_abs();
    checks.push(CheckRecord::new(
        suite,
        "rotation_composition",
        "phi1 then phi2 equals phi1+phi2".into(),
        res,
        res <= TOL,
    ));

    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn suite_passes_at_the_stated_angles() {
        let checks = run_spin_suite(&[PI / 4.0, PI / 2.0, PI, 2.0 * PI]);
        for c in &checks {
            assert!(c.pass, "{}: {} ({})", c.identity, c.residual, c.detail);
        }
    }

    #[test]
    fn specific_phase_values() {
        // phi = pi: spinor phase i; photon at pi/2: i; graviton at pi/2: -1.
        let p = helicity_phases(PI);
        assert!((C64::new(p.spinor[0], p.spinor[1]) - C64::new(0.0, 1.0)).norm() < TOL);
        let p = helicity_phases(PI / 2.0);
        assert!((C64::new(p.photon_plus[0], p.photon_plus[1]) - C64::new(0.0, 1.0)).norm() < TOL);
        assert!(
            (C64::new(p.graviton_plus[0], p.graviton_plus[1]) - C64::new(-1.0, 0.0)).norm() < TOL
        );
    }

    #[test]
    fn quarter_turn_maps_x_to_minus_y() {
        let rotated = rotate_z_vector(&[0.0, 1.0, 0.0, 0.0], PI / 2.0);
        assert!((rotated[1]).abs() < TOL);
        assert!((rotated[2] + 1.0).abs() < TOL);
        let via_matrix = rotate_z(&vector_to_matrix(&[0.0, 1.0, 0.0, 0.0]), PI / 2.0);
        let direct = vector_to_matrix(&rotated);
        assert!(via_matrix.sub(&direct).max_abs() < TOL);
    }
}
