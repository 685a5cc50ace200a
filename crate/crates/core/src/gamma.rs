//! Gamma matrices in the Dirac, Weyl and Majorana representations, the
//! Pauli matrices, and the Clifford/adjoint identity checks.
//!
//! Entries are exact Gaussian rationals; every check also runs on a float
//! mirror with tolerance 1e-12 so downstream float code inherits a verified
//! algebra.

use serde::{Deserialize, Serialize};

use crate::matrix::Mat;
use crate::scalar::{cq, cq_i, cq_int, cq_one, cq_zero, qi, C64, CQ, Q};
use num::Zero;

pub const FLOAT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Dirac,
    Weyl,
    Majorana,
}

impl Representation {
    pub const ALL: [Representation; 3] =
        [Representation::Dirac, Representation::Weyl, Representation::Majorana];

    pub fn name(self) -> &'static str {
        match self {
            Representation::Dirac => "dirac",
            Representation::Weyl => "weyl",
            Representation::Majorana => "majorana",
        }
    }
}

/// The three Pauli matrices plus the 2x2 identity.
#[derive(Debug, Clone)]
pub struct PauliSet {
    pub sigma: [Mat<CQ>; 3],
    pub identity: Mat<CQ>,
}

impl PauliSet {
    pub fn build() -> Self {
        let s1 = Mat::from_rows(vec![
            vec![cq_zero(), cq_one()],
            vec![cq_one(), cq_zero()],
        ]);
        let s2 = Mat::from_rows(vec![
            vec![cq_zero(), -cq_i()],
            vec![cq_i(), cq_zero()],
        ]);
        let s3 = Mat::from_rows(vec![
            vec![cq_one(), cq_zero()],
            vec![cq_zero(), -cq_one()],
        ]);
        Self { sigma: [s1, s2, s3], identity: Mat::identity(2) }
    }
}

/// A representation's four gamma matrices with the (-1,1,1,1) signature.
#[derive(Debug, Clone)]
pub struct GammaSet {
    pub representation: Representation,
    pub gamma: [Mat<CQ>; 4],
    pub metric: [i8; 4],
}

/// Assembles a 4x4 from four 2x2 blocks.
fn blocks(a: &Mat<CQ>, b: &Mat<CQ>, c: &Mat<CQ>, d: &Mat<CQ>) -> Mat<CQ> {
    let mut m = Mat::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = a[(i, j)].clone();
            m[(i, j + 2)] = b[(i, j)].clone();
            m[(i + 2, j)] = c[(i, j)].clone();
            m[(i + 2, j + 2)] = d[(i, j)].clone();
        }
    }
    m
}

/// Builds the named representation. Only one sign convention per
/// representation is exposed; the variant of the Weyl spatial matrices
/// with a global minus sign is not constructed.
pub fn build_gamma_set(representation: Representation) -> GammaSet {
    let p = PauliSet::build();
    let z = Mat::zeros(2);
    let id = &p.identity;
    let i = cq_i();
    let gamma = match representation {
        Representation::Dirac => {
            let g0 = blocks(id, &z, &z, &id.neg());
            let gmu = |s: &Mat<CQ>| blocks(&z, s, &s.neg(), &z);
            [g0, gmu(&p.sigma[0]), gmu(&p.sigma[1]), gmu(&p.sigma[2])]
        }
        Representation::Weyl => {
            let g0 = blocks(&z, id, id, &z);
            let gmu = |s: &Mat<CQ>| blocks(&z, &s.neg(), s, &z);
            [g0, gmu(&p.sigma[0]), gmu(&p.sigma[1]), gmu(&p.sigma[2])]
        }
        Representation::Majorana => {
            let s1 = &p.sigma[0];
            let s2 = &p.sigma[1];
            let s3 = &p.sigma[2];
            let g0 = blocks(&z, s2, s2, &z);
            let g1 = blocks(&s3.scale(&i), &z, &z, &s3.scale(&i));
            let g2 = blocks(&z, &s2.neg(), s2, &z);
            let g3 = blocks(&s1.scale(&i).neg(), &z, &z, &s1.scale(&i).neg());
            [g0, g1, g2, g3]
        }
    };
    GammaSet { representation, gamma, metric: [-1, 1, 1, 1] }
}

impl GammaSet {
    pub fn gamma_f64(&self, a: usize) -> Mat<C64> {
        self.gamma[a].to_f64()
    }

    /// Negative-control hook: flips the sign of one entry (an entry of
    /// exactly zero is bumped to one instead, so the fault never vanishes).
    pub fn with_corrupted_entry(&self, a: usize, row: usize, col: usize) -> GammaSet {
        let mut out = self.clone();
        let e = out.gamma[a][(row, col)].clone();
        out.gamma[a][(row, col)] = if e.is_zero() { cq_one() } else { -e };
        out
    }
}

/// One identity-check record, the unit every JSON report is built from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub representation: String,
    pub identity: String,
    pub indices: Vec<usize>,
    pub residual_norm: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn exact(gs: &GammaSet, identity: &str, indices: Vec<usize>, residual: &Mat<CQ>) -> Self {
        let norm = residual.max_abs1();
        Self {
            representation: gs.representation.name().to_string(),
            identity: identity.to_string(),
            indices,
            residual_norm: norm,
            pass: residual.is_zero(),
        }
    }
}

/// All sixteen residuals of [gamma^a, gamma^b]+ + 2 eta^{ab} I4, in exact
/// arithmetic. A well-formed set reports sixteen zeros.
pub fn check_clifford(gs: &GammaSet) -> Vec<IdentityCheck> {
    let mut out = Vec::with_capacity(16);
    for a in 0..4 {
        for b in 0..4 {
            let anti = gs.gamma[a].anticommutator(&gs.gamma[b]);
            let eta = if a == b { qi(gs.metric[a] as i64) } else { Q::zero() };
            let target = Mat::identity(4).scale(&cq(eta * qi(2), Q::zero()));
            let residual = anti.add(&target);
            out.push(IdentityCheck::exact(gs, "clifford", vec![a, b], &residual));
        }
    }
    out
}

/// Float mirror of `check_clifford`, residuals measured against 1e-12.
pub fn check_clifford_f64(gs: &GammaSet) -> Vec<IdentityCheck> {
    let mut out = Vec::with_capacity(16);
    for a in 0..4 {
        for b in 0..4 {
            let ga = gs.gamma_f64(a);
            let gb = gs.gamma_f64(b);
            let anti = ga.anticommutator(&gb);
            let eta = if a == b { gs.metric[a] as f64 } else { 0.0 };
            let target = Mat::<C64>::identity(4).scale(&C64::new(2.0 * eta, 0.0));
            let norm = anti.add(&target).max_abs();
            out.push(IdentityCheck {
                representation: gs.representation.name().to_string(),
                identity: "clifford_f64".to_string(),
                indices: vec![a, b],
                residual_norm: norm,
                pass: norm <= FLOAT_TOL,
            });
        }
    }
    out
}

/// Residuals of (gamma^0)† gamma^0 - I4 and gamma^0 (gamma^a)† gamma^0 - gamma^a.
pub fn check_adjoint_relations(gs: &GammaSet) -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    let g0 = &gs.gamma[0];
    let unitary = g0.adjoint().mul(g0).sub(&Mat::identity(4));
    out.push(IdentityCheck::exact(gs, "g0_adjoint_g0", vec![0], &unitary));
    for a in 0..4 {
        let sandwich = g0.mul(&gs.gamma[a].adjoint()).mul(g0).sub(&gs.gamma[a]);
        out.push(IdentityCheck::exact(gs, "g0_sandwich", vec![a], &sandwich));
    }
    // Hermiticity split: gamma^0 self-adjoint, spatial gammas anti-self-adjoint.
    for a in 0..4 {
        let adj = gs.gamma[a].adjoint();
        let residual = if a == 0 { adj.sub(&gs.gamma[a]) } else { adj.add(&gs.gamma[a]) };
        out.push(IdentityCheck::exact(gs, "hermiticity", vec![a], &residual));
    }
    out
}

/// Pauli commutators [sigma^mu, sigma^nu] - 2i eps^{mu nu}_rho sigma^rho and
/// Hermiticity.
pub fn check_pauli(p: &PauliSet) -> Vec<IdentityCheck> {
    let eps = |m: usize, n: usize, r: usize| -> i64 {
        let perm = [m, n, r];
        match perm {
            [0, 1, 2] | [1, 2, 0] | [2, 0, 1] => 1,
            [2, 1, 0] | [0, 2, 1] | [1, 0, 2] => -1,
            _ => 0,
        }
    };
    let mut out = Vec::new();
    for m in 0..3 {
        for n in 0..3 {
            let comm = p.sigma[m].commutator(&p.sigma[n]);
            let mut target = Mat::zeros(2);
            for r in 0..3 {
                let e = eps(m, n, r);
                if e != 0 {
                    target = target.add(&p.sigma[r].scale(&(cq_i() * cq_int(2 * e))));
                }
            }
            let residual = comm.sub(&target);
            out.push(IdentityCheck {
                representation: "pauli".to_string(),
                identity: "pauli_commutator".to_string(),
                indices: vec![m, n],
                residual_norm: residual.max_abs1(),
                pass: residual.is_zero(),
            });
        }
        let herm = p.sigma[m].adjoint().sub(&p.sigma[m]);
        out.push(IdentityCheck {
            representation: "pauli".to_string(),
            identity: "pauli_hermitian".to_string(),
            indices: vec![m],
            residual_norm: herm.max_abs1(),
            pass: herm.is_zero(),
        });
    }
    out
}

/// Feynman-slash contraction sum_a gamma^a v_a.
pub fn slash(gs: &GammaSet, v: &[CQ; 4]) -> Mat<CQ> {
    let mut out = Mat::zeros(4);
    for a in 0..4 {
        out = out.add(&gs.gamma[a].scale(&v[a]));
    }
    out
}

pub fn slash_f64(gs: &GammaSet, v: &[C64; 4]) -> Mat<C64> {
    let mut out = Mat::<C64>::zeros(4);
    for a in 0..4 {
        out = out.add(&gs.gamma_f64(a).scale(&v[a]));
    }
    out
}

/// The gamma-algebra suite for the selected representations, both exact
/// and on the float mirror, plus the Pauli identities. `corrupt` flips one
/// entry of the named representation first (negative-control hook).
pub fn run_gamma_suite(
    reps: &[Representation],
    corrupt: Option<(Representation, usize, usize, usize)>,
) -> Vec<crate::report::CheckRecord> {
    use crate::report::CheckRecord;
    let mut checks = Vec::new();
    let convert = |c: IdentityCheck| {
        CheckRecord {
            suite: format!("gamma_{}", c.representation),
            identity: c.identity,
            detail: format!("indices {:?}", c.indices),
            residual: c.residual_norm,
            pass: c.pass,
        }
    };
    for &rep in reps {
        let mut gs = build_gamma_set(rep);
        if let Some((bad_rep, a, row, col)) = corrupt {
            if bad_rep == rep {
                gs = gs.with_corrupted_entry(a, row, col);
            }
        }
        checks.extend(check_clifford(&gs).into_iter().map(convert));
        checks.extend(check_clifford_f64(&gs).into_iter().map(|c| CheckRecord {
            suite: format!("gamma_{}", c.representation),
            identity: c.identity,
            detail: format!("indices {:?}", c.indices),
            residual: c.residual_norm,
            pass: c.pass,
        }));
        checks.extend(check_adjoint_relations(&gs).into_iter().map(convert));
        // Squares: (gamma^0)^2 = I, (gamma^mu)^2 = -I.
        for a in 0..4 {
            let square = gs.gamma[a].mul(&gs.gamma[a]);
            let target = if a == 0 { Mat::identity(4) } else { Mat::identity(4).neg() };
            let residual = square.sub(&target).max_abs1();
            checks.push(CheckRecord::exact(
                &format!("gamma_{}", rep.name()),
                "gamma_square",
                format!("index {a}"),
                residual,
            ));
        }
    }
    let pauli = PauliSet::build();
    checks.extend(check_pauli(&pauli).into_iter().map(|c| CheckRecord {
        suite: "pauli".into(),
        identity: c.identity,
        detail: format!("indices {:?}", c.indices),
        residual: c.residual_norm,
        pass: c.pass,
    }));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::to_c64;

    #[test]
    fn dirac_gamma0_is_diag_blocks() {
        let gs = build_gamma_set(Representation::Dirac);
        let g0 = &gs.gamma[0];
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j {
                    if i < 2 { cq_one() } else { -cq_one() }
                } else {
                    cq_zero()
                };
                assert_eq!(g0[(i, j)], expect);
            }
        }
    }

    #[test]
    fn weyl_gamma0_offdiagonal_identity_blocks() {
        let gs = build_gamma_set(Representation::Weyl);
        let g0 = &gs.gamma[0];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(g0[(i, j)], cq_zero());
                assert_eq!(g0[(i + 2, j + 2)], cq_zero());
                let expect = if i == j { cq_one() } else { cq_zero() };
                assert_eq!(g0[(i, j + 2)], expect);
                assert_eq!(g0[(i + 2, j)], expect);
            }
        }
    }

    #[test]
    fn majorana_gamma1_is_diag_i_sigma3() {
        let gs = build_gamma_set(Representation::Majorana);
        let g1 = &gs.gamma[1];
        assert_eq!(g1[(0, 0)], cq_i());
        assert_eq!(g1[(1, 1)], -cq_i());
        assert_eq!(g1[(2, 2)], cq_i());
        assert_eq!(g1[(3, 3)], -cq_i());
        assert_eq!(g1[(0, 2)], cq_zero());
    }

    #[test]
    fn clifford_holds_in_all_representations() {
        for rep in Representation::ALL {
            let gs = build_gamma_set(rep);
            for check in check_clifford(&gs) {
                assert!(check.pass, "{:?} {:?}", rep, check.indices);
                assert_eq!(check.residual_norm, 0.0);
            }
            for check in check_clifford_f64(&gs) {
                assert!(check.pass);
            }
        }
    }

    #[test]
    fn clifford_diagonal_values() {
        let gs = build_gamma_set(Representation::Dirac);
        // [g0,g0]+ = 2 I4 and [g1,g1]+ = -2 I4, off-diagonal zero.
        let a00 = gs.gamma[0].anticommutator(&gs.gamma[0]);
        assert_eq!(a00, Mat::identity(4).scale(&cq_int(2)));
        let a11 = gs.gamma[1].anticommutator(&gs.gamma[1]);
        assert_eq!(a11, Mat::identity(4).scale(&cq_int(-2)));
        let a01 = gs.gamma[0].anticommutator(&gs.gamma[1]);
        assert!(a01.is_zero());
    }

    #[test]
    fn adjoint_relations_hold() {
        for rep in Representation::ALL {
            let gs = build_gamma_set(rep);
            for check in check_adjoint_relations(&gs) {
                assert!(check.pass, "{:?} {} {:?}", rep, check.identity, check.indices);
            }
        }
    }

    #[test]
    fn adjoint_relation_via_independent_index_sum() {
        // Oracle: contract gamma^0 (gamma^a)† gamma^0 entry by entry with
        // explicit index sums instead of Mat::mul.
        for rep in Representation::ALL {
            let gs = build_gamma_set(rep);
            let g0 = &gs.gamma[0];
            for a in 0..4 {
                let ga = &gs.gamma[a];
                for i in 0..4 {
                    for j in 0..4 {
                        let mut acc = cq_zero();
                        for k in 0..4 {
                            for l in 0..4 {
                                acc = acc
                                    + g0[(i, k)].clone()
                                        * ga[(l, k)].conj()
                                        * g0[(l, j)].clone();
                            }
                        }
                        assert_eq!(acc, ga[(i, j)], "{rep:?} a={a} ({i},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn gamma_squares() {
        for rep in Representation::ALL {
            let gs = build_gamma_set(rep);
            assert_eq!(gs.gamma[0].mul(&gs.gamma[0]), Mat::identity(4));
            for mu in 1..4 {
                assert_eq!(gs.gamma[mu].mul(&gs.gamma[mu]), Mat::identity(4).neg());
            }
        }
    }

    #[test]
    fn pauli_identities() {
        let p = PauliSet::build();
        for check in check_pauli(&p) {
            assert!(check.pass, "{} {:?}", check.identity, check.indices);
        }
    }

    #[test]
    fn slash_basis_vectors() {
        let gs = build_gamma_set(Representation::Dirac);
        let e0 = [cq_one(), cq_zero(), cq_zero(), cq_zero()];
        assert_eq!(slash(&gs, &e0), gs.gamma[0]);
        let zero = [cq_zero(), cq_zero(), cq_zero(), cq_zero()];
        assert!(slash(&gs, &zero).is_zero());
        let e01 = [cq_one(), cq_one(), cq_zero(), cq_zero()];
        assert_eq!(slash(&gs, &e01), gs.gamma[0].add(&gs.gamma[1]));
    }

    #[test]
    fn slash_is_linear_on_random_complex_vectors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let gs = build_gamma_set(Representation::Weyl);
        for _ in 0..20 {
            let mut rnd = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let alpha = rnd();
            let beta = rnd();
            let u: [C64; 4] = [rnd(), rnd(), rnd(), rnd()];
            let v: [C64; 4] = [rnd(), rnd(), rnd(), rnd()];
            let mut w = [C64::new(0.0, 0.0); 4];
            for a in 0..4 {
                w[a] = alpha * u[a] + beta * v[a];
            }
            let lhs = slash_f64(&gs, &w);
            let rhs = slash_f64(&gs, &u)
                .scale(&alpha)
                .add(&slash_f64(&gs, &v).scale(&beta));
            assert!(lhs.sub(&rhs).max_abs() < 1e-12);
        }
    }

    #[test]
    fn corrupted_entry_breaks_clifford() {
        let gs = build_gamma_set(Representation::Dirac).with_corrupted_entry(1, 0, 2);
        let failures: Vec<_> =
            check_clifford(&gs).into_iter().filter(|c| !c.pass).collect();
        assert!(!failures.is_empty());
        assert!(failures.iter().any(|c| c.identity == "clifford"));
    }

    #[test]
    fn float_mirror_matches_exact() {
        let gs = build_gamma_set(Representation::Majorana);
        for a in 0..4 {
            let f = gs.gamma_f64(a);
            for i in 0..4 {
                for j in 0..4 {
                    let d = f[(i, j)] - to_c64(&gs.gamma[a][(i, j)]);
                    assert!(d.norm() == 0.0);
                }
            }
        }
    }
}
