//! The Dirac-Bergmann algorithm driver.
//!
//! From the table of momenta the driver builds the primary constraints, the
//! canonical and primary Hamiltonians, runs the consistency conditions
//! (recovering the lattice Dirac equation and solving for the velocity
//! multipliers), classifies the constraints through the constraint matrix,
//! and constructs the shell-adapted canonical chart in which the Dirac
//! bracket collapses to the reduced-space Poisson bracket. All of it runs
//! for the spinorial factor-ordered track and both Grassmann tracks.

use std::collections::BTreeMap;

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::brackets::{
    dirac_fo, dirac_grassmann, poisson_fo, poisson_grassmann, poisson_grassmann_pairs,
    poisson_pairs, Side,
};
use crate::error::{CoreError, Result};
use crate::gamma::GammaSet;
use crate::grassmann::Parity;
use crate::phase::{
    slashed_spatial_derivative, AtomKind, DerivSide, FieldAtom, LatticeSpec, LinearAtomMap,
    PhaseFunctional, Statistics, SPINOR_COMPONENTS,
};
use crate::report::CheckRecord;
use crate::scalar::{cq, cq_re, fmt_cq, qi, qr, Constants, CQ, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormalismTrack {
    SpinorialFO,
    GrassmannL,
    GrassmannR,
}

impl FormalismTrack {
    pub const ALL: [FormalismTrack; 3] =
        [FormalismTrack::SpinorialFO, FormalismTrack::GrassmannL, FormalismTrack::GrassmannR];

    pub fn name(self) -> &'static str {
        match self {
            FormalismTrack::SpinorialFO => "spinorial",
            FormalismTrack::GrassmannL => "grassmann-l",
            FormalismTrack::GrassmannR => "grassmann-r",
        }
    }

    pub fn stats(self) -> Statistics {
        match self {
            FormalismTrack::SpinorialFO => Statistics::Commuting,
            _ => Statistics::Anticommuting,
        }
    }

    pub fn side(self) -> Option<Side> {
        match self {
            FormalismTrack::SpinorialFO => None,
            FormalismTrack::GrassmannL => Some(Side::Left),
            FormalismTrack::GrassmannR => Some(Side::Right),
        }
    }

    fn deriv_side(self) -> DerivSide {
        match self {
            FormalismTrack::SpinorialFO => DerivSide::Plain,
            FormalismTrack::GrassmannL => DerivSide::Left,
            FormalismTrack::GrassmannR => DerivSide::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LagrangianKind {
    Bd,
    Iz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianKind {
    /// Configuration-variable canonical Hamiltonian density (common to all
    /// tracks).
    Canonical,
    /// The Hamiltonian written in terms of the momenta (H_IZ and its
    /// Grassmann analogues); equals `Canonical` on the constraint shell.
    MomentumForm,
    /// Canonical Hamiltonian plus velocity-multiplier times constraint
    /// terms, in each track's ordering.
    Primary,
    /// The single-pair Hamiltonian of the simplest Lagrangian, written in
    /// the reduced chart variables (psi1, pi1).
    BdOnReduced,
    /// Momentum-form Hamiltonian pushed to the adapted chart with
    /// psi2 = pi2 = 0.
    Reduced,
}

/// Closed-form momentum table: each momentum is a constant times the
/// conjugate field.
#[derive(Debug, Clone)]
pub struct Momenta {
    pub track: FormalismTrack,
    pub lagrangian: LagrangianKind,
    /// pi = pi_coeff * psibar
    pub pi_coeff: CQ,
    /// pibar = pibar_coeff * psi
    pub pibar_coeff: CQ,
}

impl Momenta {
    pub fn pi(&self, component: usize, site: usize) -> PhaseFunctional {
        PhaseFunctional::atom(self.track.stats(), FieldAtom::new(AtomKind::PsiBar, component, site))
            .scale(&self.pi_coeff)
    }

    pub fn pibar(&self, component: usize, site: usize) -> PhaseFunctional {
        PhaseFunctional::atom(self.track.stats(), FieldAtom::new(AtomKind::Psi, component, site))
            .scale(&self.pibar_coeff)
    }

    /// Negative-control hook: flips the sign of the pi definition.
    pub fn with_flipped_pi_sign(mut self) -> Self {
        self.pi_coeff = -self.pi_coeff;
        self
    }
}

/// The closed momentum tables. The BD Lagrangian is only treated in the
/// spinorial track.
pub fn build_momenta(
    track: FormalismTrack,
    lagrangian: LagrangianKind,
    consts: &Constants,
) -> Result<Momenta> {
    let ihc2 = consts.i_hbar_c_half();
    let (pi_coeff, pibar_coeff) = match (track, lagrangian) {
        (FormalismTrack::SpinorialFO, LagrangianKind::Bd) => {
            (ihc2.clone() * crate::scalar::cq_int(2), CQ::zero())
        }
        (FormalismTrack::SpinorialFO, LagrangianKind::Iz) => (ihc2.clone(), -ihc2.clone()),
        (FormalismTrack::GrassmannL, LagrangianKind::Iz) => (-ihc2.clone(), -ihc2.clone()),
        (FormalismTrack::GrassmannR, LagrangianKind::Iz) => (ihc2.clone(), ihc2.clone()),
        (t, LagrangianKind::Bd) => {
            return Err(CoreError::InvalidPairing(format!(
                "the BD Lagrangian is only analyzed in the spinorial track, not {}",
                t.name()
            )))
        }
    };
    Ok(Momenta { track, lagrangian, pi_coeff, pibar_coeff })
}

/// Primary constraints, derived from the momentum table:
/// phibar = pi - (pi table value), phi = pibar - (pibar table value).
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    pub track: FormalismTrack,
    pi_coeff: CQ,
    pibar_coeff: CQ,
}

impl ConstraintSet {
    pub fn from_momenta(momenta: &Momenta) -> Self {
        Self {
            track: momenta.track,
            pi_coeff: momenta.pi_coeff.clone(),
            pibar_coeff: momenta.pibar_coeff.clone(),
        }
    }

    pub fn build(track: FormalismTrack, consts: &Constants) -> Result<Self> {
        Ok(Self::from_momenta(&build_momenta(track, LagrangianKind::Iz, consts)?))
    }

    /// phibar component: pi - pi_coeff * psibar (a Dirac adjoint).
    pub fn phibar(&self, component: usize, site: usize) -> PhaseFunctional {
        let stats = self.track.stats();
        let mut f = PhaseFunctional::atom(stats, FieldAtom::new(AtomKind::Pi, component, site));
        f.add_term(-self.pi_coeff.clone(), vec![FieldAtom::new(AtomKind::PsiBar, component, site)]);
        f
    }

    /// phi component: pibar - pibar_coeff * psi (a spinor).
    pub fn phi(&self, component: usize, site: usize) -> PhaseFunctional {
        let stats = self.track.stats();
        let mut f = PhaseFunctional::atom(stats, FieldAtom::new(AtomKind::PiBar, component, site));
        f.add_term(-self.pibar_coeff.clone(), vec![FieldAtom::new(AtomKind::Psi, component, site)]);
        f
    }
}

/// Track-dispatched Poisson bracket.
pub fn poisson_track(
    track: FormalismTrack,
    f: &PhaseFunctional,
    g: &PhaseFunctional,
    lattice: &LatticeSpec,
) -> Result<PhaseFunctional> {
    match track.side() {
        None => poisson_fo(f, g, lattice),
        Some(side) => poisson_grassmann(f, g, side, lattice),
    }
}

/// Track-dispatched Dirac bracket.
pub fn dirac_track(
    track: FormalismTrack,
    f: &PhaseFunctional,
    g: &PhaseFunctional,
    lattice: &LatticeSpec,
    consts: &Constants,
) -> Result<PhaseFunctional> {
    match track.side() {
        None => dirac_fo(f, g, lattice, consts),
        Some(side) => dirac_grassmann(f, g, side, lattice, consts),
    }
}

fn atom_f(stats: Statistics, kind: AtomKind, component: usize, site: usize) -> PhaseFunctional {
    PhaseFunctional::atom(stats, FieldAtom::new(kind, component, site))
}

/// Total discretized Lagrangian with the slashed time derivatives kept as
/// unknown velocity atoms; used to check the momentum tables symbolically.
pub fn lagrangian_total(
    track: FormalismTrack,
    lagrangian: LagrangianKind,
    lattice: &LatticeSpec,
    gs: &GammaSet,
    consts: &Constants,
) -> Result<PhaseFunctional> {
    if lagrangian == LagrangianKind::Bd && track != FormalismTrack::SpinorialFO {
        return Err(CoreError::InvalidPairing("BD Lagrangian outside the spinorial track".into()));
    }
    let stats = track.stats();
    let v = cq_re(lattice.volume());
    let ihc2 = consts.i_hbar_c_half();
    let mc2 = cq_re(consts.m_c2());
    let mut total = PhaseFunctional::zero(stats);
    for site in 0..lattice.total_sites() {
        for a in 0..SPINOR_COMPONENTS {
            let psi = atom_f(stats, AtomKind::Psi, a, site);
            let psibar = atom_f(stats, AtomKind::PsiBar, a, site);
            let vel = atom_f(stats, AtomKind::Dot0Psi, a, site);
            let velbar = atom_f(stats, AtomKind::Dot0PsiBar, a, site);
            let grad_psi =
                vel.add(&slashed_spatial_derivative(stats, AtomKind::Psi, a, site, gs, lattice)?)?;
            let grad_psibar = velbar
                .add(&slashed_spatial_derivative(stats, AtomKind::PsiBar, a, site, gs, lattice)?)?;
            let density = match lagrangian {
                LagrangianKind::Iz => {
                    // (i hbar c/2)[psibar (slash psi) - (slash psibar) psi]
                    //   - m c^2 psibar psi
                    let kin =
                        psibar.mul(&grad_psi)?.sub(&grad_psibar.mul(&psi)?)?.scale(&ihc2);
                    kin.sub(&psibar.mul(&psi)?.scale(&mc2))?
                }
                LagrangianKind::Bd => {
                    // psibar [i hbar c (slash psi) - m c^2 psi]
                    let ihc = ihc2.clone() * crate::scalar::cq_int(2);
                    psibar.mul(&grad_psi)?.scale(&ihc).sub(&psibar.mul(&psi)?.scale(&mc2))?
                }
            };
            total = total.add(&density.scale(&v))?;
        }
    }
    Ok(total)
}

/// Builds the requested Hamiltonian as a total functional (v times the sum
/// of the printed density over sites).
pub fn build_hamiltonian(
    track: FormalismTrack,
    which: HamiltonianKind,
    lattice: &LatticeSpec,
    gs: &GammaSet,
    consts: &Constants,
) -> Result<PhaseFunctional> {
    let stats = track.stats();
    let v = cq_re(lattice.volume());
    let ihc2 = consts.i_hbar_c_half();
    let imc_hbar = consts.i_m_c_over_hbar();
    let mc2 = cq_re(consts.m_c2());
    let mut total = PhaseFunctional::zero(stats);
    match which {
        HamiltonianKind::Canonical => {
            for site in 0..lattice.total_sites() {
                for a in 0..SPINOR_COMPONENTS {
                    let psi = atom_f(stats, AtomKind::Psi, a, site);
                    let psibar = atom_f(stats, AtomKind::PsiBar, a, site);
                    let dpsi =
                        slashed_spatial_derivative(stats, AtomKind::Psi, a, site, gs, lattice)?;
                    let dpsibar =
                        slashed_spatial_derivative(stats, AtomKind::PsiBar, a, site, gs, lattice)?;
                    let kin = dpsibar.mul(&psi)?.sub(&psibar.mul(&dpsi)?)?.scale(&ihc2);
                    let density = kin.add(&psibar.mul(&psi)?.scale(&mc2))?;
                    total = total.add(&density.scale(&v))?;
                }
            }
        }
        HamiltonianKind::MomentumForm => {
            for site in 0..lattice.total_sites() {
                for a in 0..SPINOR_COMPONENTS {
                    let psi = atom_f(stats, AtomKind::Psi, a, site);
                    let psibar = atom_f(stats, AtomKind::PsiBar, a, site);
                    let pi = atom_f(stats, AtomKind::Pi, a, site);
                    let pibar = atom_f(stats, AtomKind::PiBar, a, site);
                    let dpsi =
                        slashed_spatial_derivative(stats, AtomKind::Psi, a, site, gs, lattice)?;
                    let dpsibar =
                        slashed_spatial_derivative(stats, AtomKind::PsiBar, a, site, gs, lattice)?;
                    let density = match track {
                        // -pi (slash psi) - (slash psibar) pibar
                        //   - (imc/hbar)(pi psi - psibar pibar)
                        FormalismTrack::SpinorialFO => pi
                            .mul(&dpsi)?
                            .scale(&-CQ::one())
                            .sub(&dpsibar.mul(&pibar)?)?
                            .sub(&pi.mul(&psi)?.sub(&psibar.mul(&pibar)?)?.scale(&imc_hbar))?,
                        // -(slash psi) pi_L - (slash psibar) pibar_L
                        //   + (imc/hbar)(pi_L psi + psibar pibar_L)
                        FormalismTrack::GrassmannL => dpsi
                            .mul(&pi)?
                            .scale(&-CQ::one())
                            .sub(&dpsibar.mul(&pibar)?)?
                            .add(&pi.mul(&psi)?.add(&psibar.mul(&pibar)?)?.scale(&imc_hbar))?,
                        // -pi_R (slash psi) - pibar_R (slash psibar)
                        //   + (imc/hbar)(-pi_R psi + pibar_R psibar)
                        FormalismTrack::GrassmannR => pi
                            .mul(&dpsi)?
                            .scale(&-CQ::one())
                            .sub(&pibar.mul(&dpsibar)?)?
                            .add(&pibar.mul(&psibar)?.sub(&pi.mul(&psi)?)?.scale(&imc_hbar))?,
                    };
                    total = total.add(&density.scale(&v))?;
                }
            }
        }
        HamiltonianKind::Primary => {
            total = build_hamiltonian(track, HamiltonianKind::Canonical, lattice, gs, consts)?;
            let cs = ConstraintSet::build(track, consts)?;
            for site in 0..lattice.total_sites() {
                for a in 0..SPINOR_COMPONENTS {
                    let vel = atom_f(stats, AtomKind::Dot0Psi, a, site);
                    let velbar = atom_f(stats, AtomKind::Dot0PsiBar, a, site);
                    let phibar = cs.phibar(a, site);
                    let phi = cs.phi(a, site);
                    let extra = match track {
                        // phibar (d0 psi) + (d0 psibar) phi
                        FormalismTrack::SpinorialFO => phibar.mul(&vel)?.add(&velbar.mul(&phi)?)?,
                        // (d0 psi) phibar + (d0 psibar) phi
                        FormalismTrack::GrassmannL => vel.mul(&phibar)?.add(&velbar.mul(&phi)?)?,
                        // phibar (d0 psi) + phi (d0 psibar)
                        FormalismTrack::GrassmannR => phibar.mul(&vel)?.add(&phi.mul(&velbar)?)?,
                    };
                    total = total.add(&extra.scale(&v))?;
                }
            }
        }
        HamiltonianKind::BdOnReduced => {
            if track != FormalismTrack::SpinorialFO {
                return Err(CoreError::InvalidPairing(
                    "the BD Hamiltonian comparison lives in the spinorial track".into(),
                ));
            }
            for site in 0..lattice.total_sites() {
                for a in 0..SPINOR_COMPONENTS {
                    let psi1 = atom_f(stats, AtomKind::Psi1, a, site);
                    let pi1 = atom_f(stats, AtomKind::Pi1, a, site);
                    let dpsi1 =
                        slashed_spatial_derivative(stats, AtomKind::Psi1, a, site, gs, lattice)?;
                    let density = pi1
                        .mul(&dpsi1)?
                        .scale(&-CQ::one())
                        .sub(&pi1.mul(&psi1)?.scale(&imc_hbar))?;
                    total = total.add(&density.scale(&v))?;
                }
            }
        }
        HamiltonianKind::Reduced => {
            let chart = reduced_chart(track, consts);
            let hm = build_hamiltonian(track, HamiltonianKind::MomentumForm, lattice, gs, consts)?;
            total = hm.substitute(&chart.to_adapted).drop_kinds(&[AtomKind::Psi2, AtomKind::Pi2]);
        }
    }
    Ok(total)
}

/// The closed-form reduced Hamiltonian of the spinorial track,
/// (1/2) sum_mu [(slash_mu pi1) psi1 - pi1 (slash_mu psi1)] - (imc/hbar) pi1 psi1,
/// built directly for comparison against `HamiltonianKind::Reduced`.
pub fn reduced_hamiltonian_closed_form(
    lattice: &LatticeSpec,
    gs: &GammaSet,
    consts: &Constants,
) -> Result<PhaseFunctional> {
    let stats = Statistics::Commuting;
    let v = cq_re(lattice.volume());
    let imc_hbar = consts.i_m_c_over_hbar();
    let half = cq_re(qr(1, 2));
    let mut total = PhaseFunctional::zero(stats);
    for site in 0..lattice.total_sites() {
        for a in 0..SPINOR_COMPONENTS {
            let psi1 = atom_f(stats, AtomKind::Psi1, a, site);
            let pi1 = atom_f(stats, AtomKind::Pi1, a, site);
            let dpsi1 = slashed_spatial_derivative(stats, AtomKind::Psi1, a, site, gs, lattice)?;
            let dpi1 = slashed_spatial_derivative(stats, AtomKind::Pi1, a, site, gs, lattice)?;
            let density = dpi1
                .mul(&psi1)?
                .sub(&pi1.mul(&dpsi1)?)?
                .scale(&half)
                .sub(&pi1.mul(&psi1)?.scale(&imc_hbar))?;
            total = total.add(&density.scale(&v))?;
        }
    }
    Ok(total)
}

/// Total lattice divergence sum_mu slash_mu(pi1 psi1 / 2): the boundary
/// term by which the reduced Hamiltonian differs from the BD one. The
/// per-site density is nonzero but the periodic lattice sum telescopes.
pub fn divergence_total(lattice: &LatticeSpec, gs: &GammaSet) -> Result<PhaseFunctional> {
    let stats = Statistics::Commuting;
    let v = cq_re(lattice.volume());
    let half = cq_re(qr(1, 2));
    let mut total = PhaseFunctional::zero(stats);
    for site in 0..lattice.total_sites() {
        for (s, sign) in divergence_stencil(lattice, site) {
            let mut scalar = PhaseFunctional::zero(stats);
            let mu = sign.1;
            for b in 0..SPINOR_COMPONENTS {
                for c in 0..SPINOR_COMPONENTS {
                    let entry = gs.gamma[mu][(b, c)].clone();
                    if entry.is_zero() {
                        continue;
                    }
                    scalar.add_term(
                        entry,
                        vec![FieldAtom::new(AtomKind::Pi1, b, s), FieldAtom::new(AtomKind::Psi1, c, s)],
                    );
                }
            }
            let step = cq_re(Q::one() / (qi(2) * &lattice.dx)) * crate::scalar::cq_int(sign.0);
            total = total.add(&scalar.scale(&(step * v.clone() * half.clone())))?;
        }
    }
    Ok(total)
}

/// Per-site central-difference stencil of the divergence: (site, (sign, mu)).
fn divergence_stencil(lattice: &LatticeSpec, site: usize) -> Vec<(usize, (i64, usize))> {
    let mut out = Vec::new();
    for mu in 1..=lattice.dimension {
        out.push((lattice.neighbor(site, mu - 1, 1), (1, mu)));
        out.push((lattice.neighbor(site, mu - 1, -1), (-1, mu)));
    }
    out
}

/// Consistency-condition outcome: per-component residual functionals (still
/// carrying the unknown velocity atoms), the solved multipliers, and the
/// primary Hamiltonian with the solutions substituted back in.
#[derive(Debug, Clone)]
pub struct ConsistencyResult {
    pub track: FormalismTrack,
    /// Residual of the phibar conservation, indexed site*4 + component.
    pub residual_phibar: Vec<PhaseFunctional>,
    /// Residual of the phi conservation.
    pub residual_phi: Vec<PhaseFunctional>,
    /// Solved d0-psi multiplier per (site, component).
    pub multiplier_psi: Vec<PhaseFunctional>,
    /// Solved d0-psibar multiplier.
    pub multiplier_psibar: Vec<PhaseFunctional>,
    pub h_primary_solved: PhaseFunctional,
}

fn solve_linear_atom(res: &PhaseFunctional, atom: FieldAtom) -> Result<PhaseFunctional> {
    let mut alpha = CQ::zero();
    let mut rest = PhaseFunctional::zero(res.stats);
    for (atoms, coeff) in res.terms() {
        if atoms.len() == 1 && atoms[0] == atom {
            alpha = coeff.clone();
        } else {
            rest.add_term(coeff.clone(), atoms.clone());
        }
    }
    if alpha.is_zero() {
        return Err(CoreError::IndeterminateMultiplier(atom.to_string()));
    }
    Ok(rest.scale(&(-CQ::one() / alpha)))
}

/// Imposes the conservation of the primary constraints, recovering the
/// discrete Dirac equation and its adjoint, and solves them for the
/// velocity multipliers.
pub fn run_consistency(
    track: FormalismTrack,
    lattice: &LatticeSpec,
    gs: &GammaSet,
    consts: &Constants,
) -> Result<ConsistencyResult> {
    let hp = build_hamiltonian(track, HamiltonianKind::Primary, lattice, gs, consts)?;
    let cs = ConstraintSet::build(track, consts)?;
    let n = lattice.total_sites() * SPINOR_COMPONENTS;
    let mut residual_phibar = Vec::with_capacity(n);
    let mut residual_phi = Vec::with_capacity(n);
    let mut multiplier_psi = Vec::with_capacity(n);
    let mut multiplier_psibar = Vec::with_capacity(n);
    let mut solutions: BTreeMap<FieldAtom, PhaseFunctional> = BTreeMap::new();
    for site in 0..lattice.total_sites() {
        for a in 0..SPINOR_COMPONENTS {
            let res_bar = poisson_track(track, &cs.phibar(a, site), &hp, lattice)?;
            let res = poisson_track(track, &cs.phi(a, site), &hp, lattice)?;
            // The residuals are local in the velocity atoms; solving them is
            // the determination of the unknown d0-psi, d0-psibar.
            let lam = solve_linear_atom(&res, FieldAtom::new(AtomKind::Dot0Psi, a, site))?;
            let lam_bar =
                solve_linear_atom(&res_bar, FieldAtom::new(AtomKind::Dot0PsiBar, a, site))?;
            solutions.insert(FieldAtom::new(AtomKind::Dot0Psi, a, site), lam.clone());
            solutions.insert(FieldAtom::new(AtomKind::Dot0PsiBar, a, site), lam_bar.clone());
            residual_phibar.push(res_bar);
            residual_phi.push(res);
            multiplier_psi.push(lam);
            multiplier_psibar.push(lam_bar);
        }
    }
    let h_primary_solved = hp.substitute_atoms(&solutions)?;
    Ok(ConsistencyResult {
        track,
        residual_phibar,
        residual_phi,
        multiplier_psi,
        multiplier_psibar,
        h_primary_solved,
    })
}

/// The expected residual functionals, built independently from stencils:
/// for phi conservation, c^2 (i (hbar/c) slash - m) psi with the time slot
/// kept as the unknown velocity atom; the phibar residual analogously, with
/// the track-dependent overall sign.
pub fn consistency_oracle(
    track: FormalismTrack,
    component: usize,
    site: usize,
    lattice: &LatticeSpec,
    gs: &GammaSet,
    consts: &Constants,
) -> Result<(PhaseFunctional, PhaseFunctional)> {
    let stats = track.stats();
    let ihc = cq(Q::zero(), consts.hbar_c());
    let mc2 = cq_re(consts.m_c2());
    let slash_psi = atom_f(stats, AtomKind::Dot0Psi, component, site)
        .add(&slashed_spatial_derivative(stats, AtomKind::Psi, component, site, gs, lattice)?)?;
    let psi = atom_f(stats, AtomKind::Psi, component, site);
    let res_phi = slash_psi.scale(&ihc).sub(&psi.scale(&mc2))?;
    let slash_psibar = atom_f(stats, AtomKind::Dot0PsiBar, component, site).add(
        &slashed_spatial_derivative(stats, AtomKind::PsiBar, component, site, gs, lattice)?,
    )?;
    let psibar = atom_f(stats, AtomKind::PsiBar, component, site);
    let adjoint = slash_psibar.scale(&ihc).add(&psibar.scale(&mc2))?;
    let res_phibar = match track {
        FormalismTrack::SpinorialFO => adjoint.scale(&-CQ::one()),
        _ => adjoint,
    };
    Ok((res_phibar, res_phi))
}

/// 2x2 constraint matrix (coefficients of delta(r - r')) and its verified
/// inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMatrix {
    pub a: [[CQ; 2]; 2],
    pub a_inv: [[CQ; 2]; 2],
}

impl ConstraintMatrix {
    pub fn to_strings(&self) -> [[String; 2]; 2] {
        [
            [fmt_cq(&self.a[0][0]), fmt_cq(&self.a[0][1])],
            [fmt_cq(&self.a[1][0]), fmt_cq(&self.a[1][1])],
        ]
    }

    pub fn inv_to_strings(&self) -> [[String; 2]; 2] {
        [
            [fmt_cq(&self.a_inv[0][0]), fmt_cq(&self.a_inv[0][1])],
            [fmt_cq(&self.a_inv[1][0]), fmt_cq(&self.a_inv[1][1])],
        ]
    }
}

pub fn constraint_matrix(
    track: FormalismTrack,
    lattice: &LatticeSpec,
    consts: &Constants,
) -> Result<ConstraintMatrix> {
    constraint_matrix_of(&ConstraintSet::build(track, consts)?, lattice)
}

pub fn constraint_matrix_of(cs: &ConstraintSet, lattice: &LatticeSpec) -> Result<ConstraintMatrix> {
    let track = cs.track;
    let v = lattice.volume();
    // Representative component and site; locality and component-diagonality
    // are asserted separately by the suite.
    let phis = [cs.phibar(0, 0), cs.phi(0, 0)];
    let mut a = [[CQ::zero(), CQ::zero()], [CQ::zero(), CQ::zero()]];
    for i in 0..2 {
        for j in 0..2 {
            let b = poisson_track(track, &phis[i], &phis[j], lattice)?;
            a[i][j] = b.constant_part() * cq_re(v.clone());
        }
    }
    let det = a[0][0].clone() * a[1][1].clone() - a[0][1].clone() * a[1][0].clone();
    if det.is_zero() {
        return Err(CoreError::SingularConstraintMatrix);
    }
    let inv_det = CQ::one() / det;
    let a_inv = [
        [a[1][1].clone() * inv_det.clone(), -a[0][1].clone() * inv_det.clone()],
        [-a[1][0].clone() * inv_det.clone(), a[0][0].clone() * inv_det],
    ];
    Ok(ConstraintMatrix { a, a_inv })
}

/// The shell-adapted canonical chart and its inverse, as linear atom maps.
#[derive(Debug, Clone)]
pub struct ChartMap {
    pub to_adapted: LinearAtomMap,
    pub from_adapted: LinearAtomMap,
}

pub fn reduced_chart(track: FormalismTrack, consts: &Constants) -> ChartMap {
    let ihc2 = consts.i_hbar_c_half();
    let i_over = consts.i_over_hbar_c();
    let one = CQ::one();
    let half = cq_re(qr(1, 2));
    let mut to_adapted = LinearAtomMap::new();
    let mut from_adapted = LinearAtomMap::new();
    use AtomKind::*;
    to_adapted.set(Psi, vec![(one.clone(), Psi1), (one.clone(), Psi2)]);
    to_adapted.set(Pi, vec![(half.clone(), Pi1), (half.clone(), Pi2)]);
    match track {
        FormalismTrack::SpinorialFO => {
            // psi1 = psi/2 + (i/hbar c) pibar, pi1 = (i hbar c/2) psibar + pi,
            // psi2 = -(i/hbar c) phi,          pi2 = phibar.
            to_adapted.set(PiBar, vec![(-ihc2.clone(), Psi1), (ihc2.clone(), Psi2)]);
            to_adapted.set(PsiBar, vec![(-i_over.clone(), Pi1), (i_over.clone(), Pi2)]);
            from_adapted.set(Psi1, vec![(half.clone(), Psi), (i_over.clone(), PiBar)]);
            from_adapted.set(Psi2, vec![(half.clone(), Psi), (-i_over.clone(), PiBar)]);
            from_adapted.set(Pi1, vec![(ihc2.clone(), PsiBar), (one.clone(), Pi)]);
            from_adapted.set(Pi2, vec![(-ihc2.clone(), PsiBar), (one.clone(), Pi)]);
        }
        FormalismTrack::GrassmannL => {
            // pi1 = -(i hbar c/2) psibar + pi_L, pi2 = phibar^L.
            to_adapted.set(PiBar, vec![(-ihc2.clone(), Psi1), (ihc2.clone(), Psi2)]);
            to_adapted.set(PsiBar, vec![(i_over.clone(), Pi1), (-i_over.clone(), Pi2)]);
            from_adapted.set(Psi1, vec![(half.clone(), Psi), (i_over.clone(), PiBar)]);
            from_adapted.set(Psi2, vec![(half.clone(), Psi), (-i_over.clone(), PiBar)]);
            from_adapted.set(Pi1, vec![(-ihc2.clone(), PsiBar), (one.clone(), Pi)]);
            from_adapted.set(Pi2, vec![(ihc2.clone(), PsiBar), (one.clone(), Pi)]);
        }
        FormalismTrack::GrassmannR => {
            // psi1 = psi/2 - (i/hbar c) pibar_R, psi2 = (i/hbar c) phi^R.
            to_adapted.set(PiBar, vec![(ihc2.clone(), Psi1), (-ihc2.clone(), Psi2)]);
            to_adapted.set(PsiBar, vec![(-i_over.clone(), Pi1), (i_over.clone(), Pi2)]);
            from_adapted.set(Psi1, vec![(half.clone(), Psi), (-i_over.clone(), PiBar)]);
            from_adapted.set(Psi2, vec![(half.clone(), Psi), (i_over.clone(), PiBar)]);
            from_adapted.set(Pi1, vec![(ihc2.clone(), PsiBar), (one.clone(), Pi)]);
            from_adapted.set(Pi2, vec![(-ihc2.clone(), PsiBar), (one.clone(), Pi)]);
        }
    }
    ChartMap { to_adapted, from_adapted }
}

/// Transforms to the adapted chart and imposes the shell psi2 = pi2 = 0.
pub fn on_shell_reduce(f: &PhaseFunctional, chart: &ChartMap) -> PhaseFunctional {
    f.substitute(&chart.to_adapted).drop_kinds(&[AtomKind::Psi2, AtomKind::Pi2])
}

/// The reduced-space Poisson bracket in the adapted chart: only the
/// (psi1, pi1) pair contributes.
pub fn reduced_poisson(
    track: FormalismTrack,
    f: &PhaseFunctional,
    g: &PhaseFunctional,
    lattice: &LatticeSpec,
) -> Result<PhaseFunctional> {
    let pairs = [(AtomKind::Psi1, AtomKind::Pi1)];
    match track.side() {
        None => poisson_pairs(f, g, lattice, &pairs),
        Some(side) => poisson_grassmann_pairs(f, g, side, lattice, &pairs),
    }
}

/// Poisson bracket over both adapted pairs, the transformed full-space
/// bracket.
pub fn adapted_poisson(
    track: FormalismTrack,
    f: &PhaseFunctional,
    g: &PhaseFunctional,
    lattice: &LatticeSpec,
) -> Result<PhaseFunctional> {
    let pairs = [(AtomKind::Psi1, AtomKind::Pi1), (AtomKind::Psi2, AtomKind::Pi2)];
    match track.side() {
        None => poisson_pairs(f, g, lattice, &pairs),
        Some(side) => poisson_grassmann_pairs(f, g, side, lattice, &pairs),
    }
}

pub fn random_functional(
    track: FormalismTrack,
    rng: &mut ChaCha8Rng,
    lattice: &LatticeSpec,
    parity: Parity,
) -> PhaseFunctional {
    let stats = track.stats();
    let rows = [AtomKind::PsiBar, AtomKind::Pi];
    let cols = [AtomKind::Psi, AtomKind::PiBar];
    let all = [AtomKind::Psi, AtomKind::PsiBar, AtomKind::Pi, AtomKind::PiBar];
    let sites = lattice.total_sites();
    let mut f = PhaseFunctional::zero(stats);
    for _ in 0..rng.gen_range(1..5) {
        let coeff = cq(qi(rng.gen_range(-3..=3)), qi(rng.gen_range(-3..=3)));
        match stats {
            Statistics::Commuting => match rng.gen_range(0..3) {
                0 => f.add_term(coeff, vec![]),
                1 => {
                    let kind = all[rng.gen_range(0..4)];
                    f.add_term(
                        coeff,
                        vec![FieldAtom::new(kind, rng.gen_range(0..4), rng.gen_range(0..sites))],
                    );
                }
                _ => f.add_term(
                    coeff,
                    vec![
                        FieldAtom::new(
                            rows[rng.gen_range(0..2)],
                            rng.gen_range(0..4),
                            rng.gen_range(0..sites),
                        ),
                        FieldAtom::new(
                            cols[rng.gen_range(0..2)],
                            rng.gen_range(0..4),
                            rng.gen_range(0..sites),
                        ),
                    ],
                ),
            },
            Statistics::Anticommuting => {
                let degree = match parity {
                    Parity::Odd => 1,
                    Parity::Even => {
                        if rng.gen_bool(0.3) {
                            0
                        } else {
                            2
                        }
                    }
                    Parity::Mixed => rng.gen_range(0..3),
                };
                let atoms: Vec<_> = (0..degree)
                    .map(|_| {
                        FieldAtom::new(
                            all[rng.gen_range(0..4)],
                            rng.gen_range(0..4),
                            rng.gen_range(0..sites),
                        )
                    })
                    .collect();
                f.add_term(coeff, atoms);
            }
        }
    }
    f
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReductionReport {
    pub track: FormalismTrack,
    pub samples: usize,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

/// On random degree <= 2 functionals: the full-space Dirac bracket equals
/// the reduced-space Poisson bracket written in the adapted chart, and the
/// Dirac brackets with psi2, pi2 vanish identically.
pub fn verify_reduction(
    track: FormalismTrack,
    lattice: &LatticeSpec,
    consts: &Constants,
    seed: u64,
    samples: usize,
) -> Result<ReductionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = reduced_chart(track, consts);
    let suite = format!("reduction_{}", track.name());
    let mut checks = Vec::new();

    // Chart self-consistency: round trip and canonical pair values.
    let mut roundtrip_residual = 0.0f64;
    for kind in [AtomKind::Psi, AtomKind::PsiBar, AtomKind::Pi, AtomKind::PiBar] {
        let f = atom_f(track.stats(), kind, 1, 0);
        let back = f.substitute(&chart.to_adapted).substitute(&chart.from_adapted);
        roundtrip_residual = roundtrip_residual.max(back.sub(&f)?.max_coeff_abs());
    }
    checks.push(CheckRecord::exact(
        &suite,
        "chart_round_trip",
        "to_adapted then from_adapted is the identity".into(),
        roundtrip_residual,
    ));

    // Canonical relations of the adapted pairs under the full bracket.
    let delta_coeff = cq_re(Q::one() / lattice.volume());
    let expected_pair = match track {
        FormalismTrack::SpinorialFO => delta_coeff.clone(),
        _ => -delta_coeff.clone(),
    };
    let adapted = [AtomKind::Psi1, AtomKind::Pi1, AtomKind::Psi2, AtomKind::Pi2];
    let mut worst = 0.0f64;
    for (i, ka) in adapted.iter().enumerate() {
        for kb in adapted.iter().skip(i) {
            let fa = atom_f(track.stats(), *ka, 2, 1).substitute(&chart.from_adapted);
            let fb = atom_f(track.stats(), *kb, 2, 1).substitute(&chart.from_adapted);
            let pb = poisson_track(track, &fa, &fb, lattice)?;
            let expect = match (ka, kb) {
                (AtomKind::Psi1, AtomKind::Pi1) | (AtomKind::Psi2, AtomKind::Pi2) => {
                    PhaseFunctional::constant(track.stats(), expected_pair.clone())
                }
                _ => PhaseFunctional::zero(track.stats()),
            };
            worst = worst.max(pb.sub(&expect)?.max_coeff_abs());
        }
    }
    checks.push(CheckRecord::exact(
        &suite,
        "chart_canonical_pairs",
        "adapted chart satisfies the canonical bracket relations".into(),
        worst,
    ));

    // Constraint identification: psi2 and pi2 rebuilt from the chart match
    // the rescaled constraints.
    let cs = ConstraintSet::build(track, consts)?;
    let scale = match track {
        FormalismTrack::GrassmannR => consts.i_over_hbar_c(),
        _ => -consts.i_over_hbar_c(),
    };
    let mut ident = 0.0f64;
    for comp in 0..SPINOR_COMPONENTS {
        let psi2 = atom_f(track.stats(), AtomKind::Psi2, comp, 0).substitute(&chart.from_adapted);
        ident = ident.max(psi2.sub(&cs.phi(comp, 0).scale(&scale))?.max_coeff_abs());
        let pi2 = atom_f(track.stats(), AtomKind::Pi2, comp, 0).substitute(&chart.from_adapted);
        ident = ident.max(pi2.sub(&cs.phibar(comp, 0))?.max_coeff_abs());
    }
    checks.push(CheckRecord::exact(
        &suite,
        "chart_constraint_pair",
        "psi2, pi2 are the rescaled constraints".into(),
        ident,
    ));

    // Dirac bracket = reduced Poisson bracket, coefficient-exact.
    let parities =
        [(Parity::Odd, Parity::Odd), (Parity::Odd, Parity::Even), (Parity::Even, Parity::Even)];
    let mut worst_db = 0.0f64;
    let mut worst_annihilation = 0.0f64;
    for k in 0..samples {
        let (pf, pg) = parities[k % parities.len()];
        let f = random_functional(track, &mut rng, lattice, pf);
        let g = random_functional(track, &mut rng, lattice, pg);
        let lhs = dirac_track(track, &f, &g, lattice, consts)?;
        let f_ad = f.substitute(&chart.to_adapted);
        let g_ad = g.substitute(&chart.to_adapted);
        let rhs = reduced_poisson(track, &f_ad, &g_ad, lattice)?.substitute(&chart.from_adapted);
        worst_db = worst_db.max(lhs.sub(&rhs)?.max_coeff_abs());
        // The transformed full-space bracket also matches the two-pair form.
        let pb_direct = poisson_track(track, &f, &g, lattice)?;
        let pb_adapted =
            adapted_poisson(track, &f_ad, &g_ad, lattice)?.substitute(&chart.from_adapted);
        worst_db = worst_db.max(pb_direct.sub(&pb_adapted)?.max_coeff_abs());
        // Dirac brackets with the constraint pair vanish.
        let psi2 = atom_f(track.stats(), AtomKind::Psi2, k % 4, k % lattice.total_sites())
            .substitute(&chart.from_adapted);
        let pi2 = atom_f(track.stats(), AtomKind::Pi2, k % 4, k % lattice.total_sites())
            .substitute(&chart.from_adapted);
        worst_annihilation =
            worst_annihilation.max(dirac_track(track, &f, &psi2, lattice, consts)?.max_coeff_abs());
        worst_annihilation =
            worst_annihilation.max(dirac_track(track, &f, &pi2, lattice, consts)?.max_coeff_abs());
    }
    checks.push(CheckRecord::exact(
        &suite,
        "dirac_equals_reduced_poisson",
        format!("{samples} random functionals, coefficient-exact"),
        worst_db,
    ));
    checks.push(CheckRecord::exact(
        &suite,
        "constraints_annihilated",
        "Dirac brackets with psi2, pi2 vanish".into(),
        worst_annihilation,
    ));

    let pass = checks.iter().all(|c| c.pass);
    Ok(ReductionReport { track, samples, checks, pass })
}

/// The four variational derivatives of the IZ action with the slashed time
/// derivatives kept as velocity atoms, per (site, component):
/// (dS/dpsi, dS/dpi, dS/dpsibar, dS/dpibar).
pub struct ActionVariations {
    pub d_psi: Vec<PhaseFunctional>,
    pub d_pi: Vec<PhaseFunctional>,
    pub d_psibar: Vec<PhaseFunctional>,
    pub d_pibar: Vec<PhaseFunctional>,
}

pub fn iz_action_variations(
    lattice: &LatticeSpec,
    gs: &GammaSet,
    consts: &Constants,
) -> Result<ActionVariations> {
    let stats = Statistics::Commuting;
    let v = cq_re(lattice.volume());
    // Liouville form pi d0psi + d0psibar pibar, minus H_IZ.
    let mut integrand = PhaseFunctional::zero(stats);
    for site in 0..lattice.total_sites() {
        for a in 0..SPINOR_COMPONENTS {
            let pi = atom_f(stats, AtomKind::Pi, a, site);
            let vel = atom_f(stats, AtomKind::Dot0Psi, a, site);
            let velbar = atom_f(stats, AtomKind::Dot0PsiBar, a, site);
            let pibar = atom_f(stats, AtomKind::PiBar, a, site);
            integrand = integrand.add(&pi.mul(&vel)?.add(&velbar.mul(&pibar)?)?.scale(&v))?;
        }
    }
    let h_iz = build_hamiltonian(
        FormalismTrack::SpinorialFO,
        HamiltonianKind::MomentumForm,
        lattice,
        gs,
        consts,
    )?;
    integrand = integrand.sub(&h_iz)?;

    let mut out = ActionVariations {
        d_psi: Vec::new(),
        d_pi: Vec::new(),
        d_psibar: Vec::new(),
        d_pibar: Vec::new(),
    };
    for site in 0..lattice.total_sites() {
        for a in 0..SPINOR_COMPONENTS {
            let d = |kind: AtomKind| {
                integrand.functional_derivative(
                    FieldAtom::new(kind, a, site),
                    DerivSide::Plain,
                    lattice,
                )
            };
            // The temporal integration by parts subtracts the d0 slot of the
            // conjugate momentum.
            let d_psi = d(AtomKind::Psi)?.sub(&atom_f(stats, AtomKind::Dot0Pi, a, site))?;
            let d_psibar =
                d(AtomKind::PsiBar)?.sub(&atom_f(stats, AtomKind::Dot0PiBar, a, site))?;
            out.d_psi.push(d_psi);
            out.d_pi.push(d(AtomKind::Pi)?);
            out.d_psibar.push(d_psibar);
            out.d_pibar.push(d(AtomKind::PiBar)?);
        }
    }
    Ok(out)
}

/// Expected canonical Dirac-bracket coefficients (of delta(r - r')) per
/// track, the values the reports are checked against.
pub fn expected_canonical_db(
    track: FormalismTrack,
    consts: &Constants,
) -> Vec<(AtomKind, AtomKind, CQ)> {
    use AtomKind::*;
    let i_over = consts.i_over_hbar_c();
    let ihc4 = cq(Q::zero(), consts.hbar_c() / qi(4));
    let half = cq_re(qr(1, 2));
    match track {
        FormalismTrack::SpinorialFO => vec![
            (Psi, PsiBar, -i_over.clone()),
            (Pi, PiBar, ihc4.clone()),
            (Psi, Pi, half.clone()),
            (PsiBar, PiBar, half),
            (Psi, Psi, CQ::zero()),
            (PsiBar, PsiBar, CQ::zero()),
            (Pi, Pi, CQ::zero()),
            (PiBar, PiBar, CQ::zero()),
            (Psi, PiBar, CQ::zero()),
            (PsiBar, Pi, CQ::zero()),
        ],
        FormalismTrack::GrassmannL => vec![
            (Psi, PsiBar, -i_over.clone()),
            (PsiBar, Psi, -i_over),
            (Pi, PiBar, ihc4.clone()),
            (PiBar, Pi, ihc4),
            (Psi, Pi, -half.clone()),
            (Pi, Psi, -half.clone()),
            (PsiBar, PiBar, -half.clone()),
            (PiBar, PsiBar, -half),
            (Psi, Psi, CQ::zero()),
            (Psi, PiBar, CQ::zero()),
            (PsiBar, Pi, CQ::zero()),
        ],
        FormalismTrack::GrassmannR => vec![
            (Psi, PsiBar, i_over.clone()),
            (PsiBar, Psi, i_over),
            (Pi, PiBar, -ihc4.clone()),
            (PiBar, Pi, -ihc4),
            (Psi, Pi, -half.clone()),
            (Pi, Psi, -half.clone()),
            (PsiBar, PiBar, -half.clone()),
            (PiBar, PsiBar, -half),
            (Psi, Psi, CQ::zero()),
            (Psi, PiBar, CQ::zero()),
            (PsiBar, Pi, CQ::zero()),
        ],
    }
}

/// Fault injections for the negative-control suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    MomentumSign,
}

/// The full per-track pipeline: momenta -> constraints -> Hamiltonians ->
/// consistency -> constraint matrix -> canonical Dirac brackets -> reduced
/// chart -> reduction verification, reported as flat check records.
pub fn run_track_suite(
    track: FormalismTrack,
    lattice: &LatticeSpec,
    gs: &GammaSet,
    consts: &Constants,
    seed: u64,
    samples: usize,
    fault: Option<Fault>,
) -> Result<Vec<CheckRecord>> {
    let suite = format!("bergmann_{}", track.name());
    let stats = track.stats();
    let mut checks = Vec::new();

    // Momenta against the discretized Lagrangian.
    let mut momenta = build_momenta(track, LagrangianKind::Iz, consts)?;
    if fault == Some(Fault::MomentumSign) {
        momenta = momenta.with_flipped_pi_sign();
    }
    let lagr = lagrangian_total(track, LagrangianKind::Iz, lattice, gs, consts)?;
    let side = track.deriv_side();
    let mut worst_pi = 0.0f64;
    let mut worst_pibar = 0.0f64;
    for site in [0usize, lattice.total_sites() / 2] {
        for a in 0..SPINOR_COMPONENTS {
            let d_pi = lagr.functional_derivative(
                FieldAtom::new(AtomKind::Dot0Psi, a, site),
                side,
                lattice,
            )?;
            worst_pi = worst_pi.max(d_pi.sub(&momenta.pi(a, site))?.max_coeff_abs());
            let d_pibar = lagr.functional_derivative(
                FieldAtom::new(AtomKind::Dot0PsiBar, a, site),
                side,
                lattice,
            )?;
            worst_pibar = worst_pibar.max(d_pibar.sub(&momenta.pibar(a, site))?.max_coeff_abs());
        }
    }
    checks.push(CheckRecord::exact(
        &suite,
        "momentum_pi_definition",
        "pi equals the Lagrangian derivative with respect to d0 psi".into(),
        worst_pi,
    ));
    checks.push(CheckRecord::exact(
        &suite,
        "momentum_pibar_definition",
        "pibar equals the Lagrangian derivative with respect to d0 psibar".into(),
        worst_pibar,
    ));

    let cs = ConstraintSet::from_momenta(&momenta);

    // Constraint matrix and inverse.
    let ihc = cq(Q::zero(), consts.hbar_c());
    let expected_a12 = match track {
        FormalismTrack::SpinorialFO | FormalismTrack::GrassmannL => -ihc.clone(),
        FormalismTrack::GrassmannR => ihc.clone(),
    };
    match constraint_matrix_of(&cs, lattice) {
        Ok(matrix) => {
            let off = crate::scalar::cq_abs1(&(matrix.a[0][1].clone() - expected_a12.clone()));
            checks.push(CheckRecord::exact(
                &suite,
                "constraint_bracket_value",
                format!("{{phibar, phi}} = ({}) delta", fmt_cq(&expected_a12)),
                off,
            ));
            let mut residual =
                crate::scalar::cq_abs1(&matrix.a[0][0]) + crate::scalar::cq_abs1(&matrix.a[1][1]);
            let a21_expect = match track {
                FormalismTrack::SpinorialFO => ihc.clone(),
                _ => expected_a12.clone(),
            };
            residual += crate::scalar::cq_abs1(&(matrix.a[1][0].clone() - a21_expect));
            checks.push(CheckRecord::exact(
                &suite,
                "constraint_matrix_shape",
                "off-diagonal structure as printed".into(),
                residual,
            ));
            // A^-1 A = identity at the coefficient level.
            let mut prod_res = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = CQ::zero();
                    for k in 0..2 {
                        acc = acc + matrix.a_inv[i][k].clone() * matrix.a[k][j].clone();
                    }
                    let expect = if i == j { CQ::one() } else { CQ::zero() };
                    prod_res += crate::scalar::cq_abs1(&(acc - expect));
                }
            }
            checks.push(CheckRecord::exact(
                &suite,
                "constraint_matrix_inverse",
                "A^-1 A = identity times delta".into(),
                prod_res,
            ));
            // Locality and component diagonality.
            let cross = poisson_track(track, &cs.phibar(0, 0), &cs.phi(1, 0), lattice)?;
            let apart = poisson_track(track, &cs.phibar(0, 0), &cs.phi(0, 1), lattice)?;
            checks.push(CheckRecord::exact(
                &suite,
                "constraint_bracket_locality",
                "cross-component and cross-site constraint brackets vanish".into(),
                cross.max_coeff_abs() + apart.max_coeff_abs(),
            ));
        }
        Err(CoreError::SingularConstraintMatrix) => {
            checks.push(CheckRecord::new(
                &suite,
                "constraint_matrix_second_class",
                "constraint matrix is singular".into(),
                f64::INFINITY,
                false,
            ));
        }
        Err(e) => return Err(e),
    }

    // Canonical Dirac brackets against the printed table.
    let mut worst_table = 0.0f64;
    let mut first_bad = String::new();
    for (ka, kb, expect) in expected_canonical_db(track, consts) {
        for (comp, site) in [(0usize, 0usize), (3, lattice.total_sites() - 1)] {
            let fa = atom_f(stats, ka, comp, site);
            let fb = atom_f(stats, kb, comp, site);
            let db = dirac_track(track, &fa, &fb, lattice, consts)?;
            let got = db.constant_part() * cq_re(lattice.volume());
            let residual = crate::scalar::cq_abs1(&(got.clone() - expect.clone()));
            if residual != 0.0 && first_bad.is_empty() {
                first_bad = format!(
                    "{{{}, {}}}_D = {} expected {}",
                    ka.label(),
                    kb.label(),
                    fmt_cq(&got),
                    fmt_cq(&expect)
                );
            }
            worst_table = worst_table.max(residual);
        }
    }
    checks.push(CheckRecord::exact(
        &suite,
        "canonical_dirac_table",
        if first_bad.is_empty() { "all canonical Dirac brackets match".into() } else { first_bad },
        worst_table,
    ));

    // Consistency conditions against the stencil oracle.
    let consistency = run_consistency(track, lattice, gs, consts)?;
    let mut worst_res = 0.0f64;
    for site in 0..lattice.total_sites() {
        for a in 0..SPINOR_COMPONENTS {
            let idx = site * SPINOR_COMPONENTS + a;
            let (oracle_bar, oracle) = consistency_oracle(track, a, site, lattice, gs, consts)?;
            worst_res = worst_res.max(consistency.residual_phi[idx].sub(&oracle)?.max_coeff_abs());
            worst_res =
                worst_res.max(consistency.residual_phibar[idx].sub(&oracle_bar)?.max_coeff_abs());
        }
    }
    checks.push(CheckRecord::exact(
        &suite,
        "consistency_dirac_equation",
        "constraint conservation reproduces the discrete Dirac operators".into(),
        worst_res,
    ));

    // Multiplier solutions are the Dirac-equation right-hand sides.
    let imc_hbar = consts.i_m_c_over_hbar();
    let mut worst_mult = 0.0f64;
    for site in 0..lattice.total_sites() {
        for a in 0..SPINOR_COMPONENTS {
            let idx = site * SPINOR_COMPONENTS + a;
            let expect = slashed_spatial_derivative(stats, AtomKind::Psi, a, site, gs, lattice)?
                .scale(&-CQ::one())
                .sub(&atom_f(stats, AtomKind::Psi, a, site).scale(&imc_hbar))?;
            worst_mult =
                worst_mult.max(consistency.multiplier_psi[idx].sub(&expect)?.max_coeff_abs());
            let expect_bar =
                slashed_spatial_derivative(stats, AtomKind::PsiBar, a, site, gs, lattice)?
                    .scale(&-CQ::one())
                    .add(&atom_f(stats, AtomKind::PsiBar, a, site).scale(&imc_hbar))?;
            worst_mult =
                worst_mult.max(consistency.multiplier_psibar[idx].sub(&expect_bar)?.max_coeff_abs());
        }
    }
    checks.push(CheckRecord::exact(
        &suite,
        "multiplier_solutions",
        "d0 psi and d0 psibar solve to the Dirac evolution".into(),
        worst_mult,
    ));

    // H_P = H_C + constraint terms, via the naive Legendre route.
    let hp = build_hamiltonian(track, HamiltonianKind::Primary, lattice, gs, consts)?;
    let legendre = {
        let mut liouville = PhaseFunctional::zero(stats);
        let v = cq_re(lattice.volume());
        for site in 0..lattice.total_sites() {
            for a in 0..SPINOR_COMPONENTS {
                let pi = atom_f(stats, AtomKind::Pi, a, site);
                let pibar = atom_f(stats, AtomKind::PiBar, a, site);
                let vel = atom_f(stats, AtomKind::Dot0Psi, a, site);
                let velbar = atom_f(stats, AtomKind::Dot0PsiBar, a, site);
                let form = match track {
                    FormalismTrack::SpinorialFO => pi.mul(&vel)?.add(&velbar.mul(&pibar)?)?,
                    FormalismTrack::GrassmannL => vel.mul(&pi)?.add(&velbar.mul(&pibar)?)?,
                    FormalismTrack::GrassmannR => pi.mul(&vel)?.add(&pibar.mul(&velbar)?)?,
                };
                liouville = liouville.add(&form.scale(&v))?;
            }
        }
        liouville.sub(&lagrangian_total(track, LagrangianKind::Iz, lattice, gs, consts)?)?
    };
    checks.push(CheckRecord::exact(
        &suite,
        "primary_hamiltonian_decomposition",
        "Liouville - L equals H_C + constraint terms".into(),
        hp.sub(&legendre)?.max_coeff_abs(),
    ));

    // Momentum-form Hamiltonian equals the canonical one on shell.
    let hm = build_hamiltonian(track, HamiltonianKind::MomentumForm, lattice, gs, consts)?;
    let hc = build_hamiltonian(track, HamiltonianKind::Canonical, lattice, gs, consts)?;
    let mut on_shell = LinearAtomMap::new();
    on_shell.set(AtomKind::Pi, vec![(momenta.pi_coeff.clone(), AtomKind::PsiBar)]);
    on_shell.set(AtomKind::PiBar, vec![(momenta.pibar_coeff.clone(), AtomKind::Psi)]);
    checks.push(CheckRecord::exact(
        &suite,
        "momentum_form_on_shell",
        "H with momenta substituted equals H_C".into(),
        hm.substitute(&on_shell).sub(&hc)?.max_coeff_abs(),
    ));

    // Weak evolution: {f, H_P}_D agrees with {f, H_P} on shell for the
    // canonical atoms.
    let chart = reduced_chart(track, consts);
    let hp_solved = &consistency.h_primary_solved;
    let mut worst_weak = 0.0f64;
    for kind in [AtomKind::Psi, AtomKind::PsiBar, AtomKind::Pi, AtomKind::PiBar] {
        for (comp, site) in [(0usize, 0usize), (2, 1)] {
            let f = atom_f(stats, kind, comp, site);
            let pb = poisson_track(track, &f, hp_solved, lattice)?;
            let db = dirac_track(track, &f, hp_solved, lattice, consts)?;
            let diff = on_shell_reduce(&pb.sub(&db)?, &chart);
            worst_weak = worst_weak.max(diff.max_coeff_abs());
        }
    }
    checks.push(CheckRecord::exact(
        &suite,
        "weak_evolution_equivalence",
        "Poisson and Dirac evolution agree on shell for canonical atoms".into(),
        worst_weak,
    ));

    // Reduction verification.
    let reduction = verify_reduction(track, lattice, consts, seed, samples)?;
    checks.extend(reduction.checks);

    // Spinorial extras: the reduced Hamiltonian identities and the action
    // variation collapse.
    if track == FormalismTrack::SpinorialFO {
        let h_red = build_hamiltonian(track, HamiltonianKind::Reduced, lattice, gs, consts)?;
        let h_closed = reduced_hamiltonian_closed_form(lattice, gs, consts)?;
        checks.push(CheckRecord::exact(
            &suite,
            "reduced_hamiltonian_forms",
            "H_IZ(psi1, pi1, 0, 0) equals the closed reduced form".into(),
            h_red.sub(&h_closed)?.max_coeff_abs(),
        ));
        let h_red_via_canonical = on_shell_reduce(&hc, &chart);
        checks.push(CheckRecord::exact(
            &suite,
            "reduced_hamiltonian_via_canonical",
            "H_C reduces to the same functional".into(),
            h_red.sub(&h_red_via_canonical)?.max_coeff_abs(),
        ));
        let h_bd = build_hamiltonian(track, HamiltonianKind::BdOnReduced, lattice, gs, consts)?;
        let div = divergence_total(lattice, gs)?;
        checks.push(CheckRecord::exact(
            &suite,
            "reduced_vs_bd_divergence",
            "H_R - H_BD(psi1, pi1) telescopes to zero under periodic summation".into(),
            h_red.sub(&h_bd)?.sub(&div)?.max_coeff_abs(),
        ));
        checks.push(CheckRecord::exact(
            &suite,
            "divergence_telescopes",
            "the total divergence functional cancels exactly".into(),
            div.max_coeff_abs(),
        ));

        // Four Euler-Lagrange residuals collapse to two.
        let vars = iz_action_variations(lattice, gs, consts)?;
        let ihc2 = consts.i_hbar_c_half();
        let mut sub_pi = LinearAtomMap::new();
        sub_pi.set(AtomKind::Pi, vec![(ihc2.clone(), AtomKind::PsiBar)]);
        sub_pi.set(AtomKind::Dot0Pi, vec![(ihc2.clone(), AtomKind::Dot0PsiBar)]);
        let mut sub_pibar = LinearAtomMap::new();
        sub_pibar.set(AtomKind::PiBar, vec![(-ihc2.clone(), AtomKind::Psi)]);
        sub_pibar.set(AtomKind::Dot0PiBar, vec![(-ihc2.clone(), AtomKind::Dot0Psi)]);
        let mut worst_collapse = 0.0f64;
        for idx in 0..vars.d_psi.len() {
            // dS/dpsibar with the momentum identification = (i hbar c/2) dS/dpi.
            let lhs = vars.d_psibar[idx].substitute(&sub_pibar);
            let rhs = vars.d_pi[idx].scale(&ihc2);
            worst_collapse = worst_collapse.max(lhs.sub(&rhs)?.max_coeff_abs());
            // dS/dpsi with the identification = -(i hbar c/2) dS/dpibar.
            let lhs = vars.d_psi[idx].substitute(&sub_pi);
            let rhs = vars.d_pibar[idx].scale(&-ihc2.clone());
            worst_collapse = worst_collapse.max(lhs.sub(&rhs)?.max_coeff_abs());
        }
        checks.push(CheckRecord::exact(
            &suite,
            "action_variations_collapse",
            "the four canonical equations reduce to two independent ones".into(),
            worst_collapse,
        ));
    }

    Ok(checks)
}
