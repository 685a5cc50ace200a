//! Canonical second quantization on a finite fermionic Fock space.
//!
//! Lattice modes map to fermionic operators through a Jordan-Wigner
//! construction with site-major mode order; field operators carry a
//! 1/sqrt(v) normalization so the fundamental anticommutator reproduces the
//! discrete delta. Everything is exact: operator entries are Gaussian
//! rationals and the sqrt(v) scale is tracked symbolically as an integer
//! power, so anticommutator identities hold with zero residual.

use std::collections::BTreeMap;

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bergmann::{dirac_track, reduced_chart, FormalismTrack};
use crate::error::{CoreError, Result};
use crate::gamma::GammaSet;
use crate::phase::{AtomKind, FieldAtom, LatticeSpec, PhaseFunctional, SPINOR_COMPONENTS};
use crate::report::CheckRecord;
use crate::scalar::{cq, cq_abs1, cq_re, fmt_cq, Constants, CQ, Q};

pub const MAX_MODES: usize = 12;

/// Fock space of the lattice modes: dimension 2^(4 * sites).
#[derive(Debug, Clone)]
pub struct FockSpace {
    pub sites: usize,
    pub n_modes: usize,
    /// Lattice cell volume entering the field normalization.
    pub volume: Q,
}

impl FockSpace {
    pub fn new(sites: usize, volume: Q) -> Result<Self> {
        let n_modes = sites * SPINOR_COMPONENTS;
        if n_modes > MAX_MODES {
            return Err(CoreError::FockTooLarge(n_modes));
        }
        Ok(Self { sites, n_modes, volume })
    }

    pub fn for_lattice(lattice: &LatticeSpec) -> Result<Self> {
        Self::new(lattice.total_sites(), lattice.volume())
    }

    pub fn dim(&self) -> usize {
        1 << self.n_modes
    }

    /// Site-major, component-minor mode numbering.
    pub fn mode(&self, site: usize, component: usize) -> Result<usize> {
        let index = site * SPINOR_COMPONENTS + component;
        if component >= SPINOR_COMPONENTS || index >= self.n_modes {
            return Err(CoreError::ModeOutOfRange { index, n_modes: self.n_modes });
        }
        Ok(index)
    }

    /// Jordan-Wigner annihilation operator of one mode: kills an occupied
    /// mode with the parity sign of the modes below it.
    pub fn annihilation(&self, mode: usize) -> Result<FockOperator> {
        if mode >= self.n_modes {
            return Err(CoreError::ModeOutOfRange { index: mode, n_modes: self.n_modes });
        }
        let bit = 1u32 << mode;
        let mut entries = BTreeMap::new();
        for basis in 0..self.dim() as u32 {
            if basis & bit == 0 {
                continue;
            }
            let below = (basis & (bit - 1)).count_ones();
            let sign = if below % 2 == 0 { 1 } else { -1 };
            entries.insert((basis & !bit, basis), crate::scalar::cq_int(sign));
        }
        Ok(FockOperator { dim: self.dim(), volume: self.volume.clone(), vpow: 0, entries })
    }

    pub fn creation(&self, mode: usize) -> Result<FockOperator> {
        Ok(self.annihilation(mode)?.adjoint())
    }

    pub fn identity(&self) -> FockOperator {
        let mut entries = BTreeMap::new();
        for basis in 0..self.dim() as u32 {
            entries.insert((basis, basis), CQ::one());
        }
        FockOperator { dim: self.dim(), volume: self.volume.clone(), vpow: 0, entries }
    }

    pub fn zero_operator(&self) -> FockOperator {
        FockOperator {
            dim: self.dim(),
            volume: self.volume.clone(),
            vpow: 0,
            entries: BTreeMap::new(),
        }
    }
}

/// Sparse exact operator on the Fock space. The stored value is
/// `entries * v^(vpow/2)`; products add the powers and even powers fold
/// back into the entries, so single-field operators (vpow = -1) and their
/// bilinears (vpow = 0) stay exact for any rational cell volume.
#[derive(Debug, Clone)]
pub struct FockOperator {
    pub dim: usize,
    volume: Q,
    vpow: i32,
    entries: BTreeMap<(u32, u32), CQ>,
}

impl FockOperator {
    fn canonicalize(&mut self) {
        if self.volume.is_one() {
            self.vpow = 0;
            return;
        }
        while self.vpow >= 2 {
            let v = cq_re(self.volume.clone());
            for e in self.entries.values_mut() {
                *e = e.clone() * v.clone();
            }
            self.vpow -= 2;
        }
        while self.vpow <= -2 {
            let v = cq_re(Q::one() / self.volume.clone());
            for e in self.entries.values_mut() {
                *e = e.clone() * v.clone();
            }
            self.vpow += 2;
        }
        if self.entries.is_empty() {
            self.vpow = 0;
        }
    }

    fn insert(&mut self, key: (u32, u32), value: CQ) {
        if value.is_zero() {
            return;
        }
        match self.entries.get_mut(&key) {
            Some(e) => {
                *e = e.clone() + value;
                if e.is_zero() {
                    self.entries.remove(&key);
                }
            }
            None => {
                self.entries.insert(key, value);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &CQ)> {
        self.entries.iter()
    }

    pub fn scale(&self, s: &CQ) -> Self {
        let mut out = self.clone();
        if s.is_zero() {
            out.entries.clear();
            out.vpow = 0;
            return out;
        }
        for e in out.entries.values_mut() {
            *e = e.clone() * s.clone();
        }
        out
    }

    /// Multiplies by 1/sqrt(v), tracked symbolically.
    pub fn scale_inv_sqrt_v(&self) -> Self {
        let mut out = self.clone();
        if !out.is_zero() {
            out.vpow -= 1;
        }
        out.canonicalize();
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        out.entries = self.entries.iter().map(|((r, c), e)| ((*c, *r), e.conj())).collect();
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        assert_eq!(self.dim, other.dim);
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.vpow != other.vpow {
            return Err(CoreError::ScaleMismatch(self.vpow, other.vpow));
        }
        let mut out = self.clone();
        for (key, value) in &other.entries {
            out.insert(*key, value.clone());
        }
        if out.entries.is_empty() {
            out.vpow = 0;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-CQ::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = FockOperator {
            dim: self.dim,
            volume: self.volume.clone(),
            vpow: self.vpow + other.vpow,
            entries: BTreeMap::new(),
        };
        let mut by_row: BTreeMap<u32, Vec<(u32, &CQ)>> = BTreeMap::new();
        for ((r, c), e) in &other.entries {
            by_row.entry(*r).or_default().push((*c, e));
        }
        for ((r, mid), left) in &self.entries {
            let Some(row) = by_row.get(mid) else { continue };
            for (c, right) in row {
                out.insert((*r, *c), left.clone() * (*right).clone());
            }
        }
        out.canonicalize();
        out
    }

    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.mul(other).add(&other.mul(self))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other).sub(&other.mul(self))
    }

    /// Exact equality after canonicalization.
    pub fn equals(&self, other: &Self) -> bool {
        self.vpow == other.vpow && self.entries == other.entries
    }

    /// Largest |re|+|im| entry difference, for reporting.
    pub fn residual_norm(&self, other: &Self) -> f64 {
        if self.vpow != other.vpow && !self.is_zero() && !other.is_zero() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for (key, value) in &self.entries {
            let other_value = other.entries.get(key).cloned().unwrap_or_else(CQ::zero);
            worst = worst.max(cq_abs1(&(value.clone() - other_value)));
        }
        for (key, value) in &other.entries {
            if !self.entries.contains_key(key) {
                worst = worst.max(cq_abs1(value));
            }
        }
        worst
    }

    /// The scalar s with self = s * identity, when the operator is a
    /// multiple of the identity at scale power zero.
    pub fn as_identity_multiple(&self) -> Option<CQ> {
        if self.vpow != 0 {
            return None;
        }
        if self.entries.is_empty() {
            return Some(CQ::zero());
        }
        let first = self.entries.values().next().unwrap().clone();
        if self.entries.len() != self.dim {
            return None;
        }
        for ((r, c), e) in &self.entries {
            if r != c || *e != first {
                return None;
            }
        }
        Some(first)
    }
}

/// Field operators per track. The momenta follow the operator identities of
/// the constraints: pi-hat = pi_coeff psibar-hat, pibar-hat = pibar_coeff
/// psi-hat.
pub fn field_operator(
    fock: &FockSpace,
    gs: &GammaSet,
    consts: &Constants,
    track: FormalismTrack,
    kind: AtomKind,
    component: usize,
    site: usize,
) -> Result<FockOperator> {
    match kind {
        AtomKind::Psi => Ok(fock.annihilation(fock.mode(site, component)?)?.scale_inv_sqrt_v()),
        AtomKind::PsiBar => {
            // psibar_b = sum_c psi_c^dagger gamma^0_{c b}
            let mut out = fock.zero_operator();
            for c in 0..SPINOR_COMPONENTS {
                let entry = gs.gamma[0][(c, component)].clone();
                if entry.is_zero() {
                    continue;
                }
                let dagger = fock.creation(fock.mode(site, c)?)?.scale_inv_sqrt_v();
                out = out.add(&dagger.scale(&entry))?;
            }
            Ok(out)
        }
        AtomKind::Pi => {
            let momenta =
                crate::bergmann::build_momenta(track, crate::bergmann::LagrangianKind::Iz, consts)?;
            Ok(field_operator(fock, gs, consts, track, AtomKind::PsiBar, component, site)?
                .scale(&momenta.pi_coeff))
        }
        AtomKind::PiBar => {
            let momenta =
                crate::bergmann::build_momenta(track, crate::bergmann::LagrangianKind::Iz, consts)?;
            Ok(field_operator(fock, gs, consts, track, AtomKind::Psi, component, site)?
                .scale(&momenta.pibar_coeff))
        }
        AtomKind::Psi1 | AtomKind::Pi1 | AtomKind::Psi2 | AtomKind::Pi2 => {
            // Adapted-chart operators through the inverse chart map.
            let chart = reduced_chart(track, consts);
            let expanded =
                PhaseFunctional::atom(track.stats(), FieldAtom::new(kind, component, site))
                    .substitute(&chart.from_adapted);
            quantize_functional(fock, gs, consts, track, &expanded)
        }
        _ => Err(CoreError::BracketDomain(format!(
            "atom kind {} has no operator image",
            kind.label()
        ))),
    }
}

/// Quantizes a polynomial functional by mapping each monomial to the
/// ordered product of its atom operators.
pub fn quantize_functional(
    fock: &FockSpace,
    gs: &GammaSet,
    consts: &Constants,
    track: FormalismTrack,
    f: &PhaseFunctional,
) -> Result<FockOperator> {
    let mut out = fock.zero_operator();
    for (atoms, coeff) in f.terms() {
        let mut acc = fock.identity().scale(coeff);
        for atom in atoms {
            let op = field_operator(
                fock,
                gs,
                consts,
                track,
                atom.kind,
                atom.component as usize,
                atom.site as usize,
            )?;
            acc = acc.mul(&op);
        }
        out = out.add(&acc)?;
    }
    Ok(out)
}

/// The gamma^0-contracted operator family entering every recipe:
/// (A-hat gamma^0)_b = sum_c A-hat_c gamma^0_{c b}.
pub fn gamma0_contracted(
    fock: &FockSpace,
    gs: &GammaSet,
    consts: &Constants,
    track: FormalismTrack,
    kind: AtomKind,
    component: usize,
    site: usize,
) -> Result<FockOperator> {
    let mut out = fock.zero_operator();
    for c in 0..SPINOR_COMPONENTS {
        let entry = gs.gamma[0][(c, component)].clone();
        if entry.is_zero() {
            continue;
        }
        let op = field_operator(fock, gs, consts, track, kind, c, site)?;
        out = out.add(&op.scale(&entry))?;
    }
    Ok(out)
}

/// Verdict of one recipe application, in the report wire format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantizeVerdict {
    pub track: FormalismTrack,
    pub pair: String,
    /// Classical Dirac bracket as a coefficient of delta(r - r').
    pub classical_value: String,
    pub recipe: String,
    pub operator_residual_norm: f64,
    pub pass: bool,
}

/// Applies the track's bracket-to-anticommutator recipe to one canonical
/// pair and verifies the operator identity exactly: [D-hat, A-hat gamma^0]+
/// must equal (-+) i hbar c {D, A}_D times the identity.
pub fn quantize_and_verify(
    fock: &FockSpace,
    gs: &GammaSet,
    consts: &Constants,
    track: FormalismTrack,
    lattice: &LatticeSpec,
    lhs: FieldAtom,
    rhs: FieldAtom,
) -> Result<QuantizeVerdict> {
    // The recipe pairs a spinor with a Dirac adjoint spinor, in that order.
    let canonical_cols = [AtomKind::Psi, AtomKind::PiBar];
    let canonical_rows = [AtomKind::PsiBar, AtomKind::Pi];
    if !canonical_cols.contains(&lhs.kind) || !canonical_rows.contains(&rhs.kind) {
        return Err(CoreError::RecipePairing(format!("({}, {})", lhs, rhs)));
    }
    let stats = track.stats();
    let classical = dirac_track(
        track,
        &PhaseFunctional::atom(stats, lhs),
        &PhaseFunctional::atom(stats, rhs),
        lattice,
        consts,
    )?;
    // Coefficient of delta(r - r') = v * constant part.
    let classical_coeff = classical.constant_part() * cq_re(lattice.volume());

    let lhs_op = field_operator(
        fock,
        gs,
        consts,
        track,
        lhs.kind,
        lhs.component as usize,
        lhs.site as usize,
    )?;
    let rhs_op = gamma0_contracted(
        fock,
        gs,
        consts,
        track,
        rhs.kind,
        rhs.component as usize,
        rhs.site as usize,
    )?;
    let anti = lhs_op.anticommutator(&rhs_op)?;

    // Spinorial and left-track recipes map {.,.} to -(i/hbar c)[.,.]+, the
    // right-track recipe to +(i/hbar c)[.,.]+.
    let (recipe, sign) = match track {
        FormalismTrack::SpinorialFO => ("-(i/hbar c)[D, A gamma0]+", 1),
        FormalismTrack::GrassmannL => ("-(i/hbar c)[F, G gamma0]+", 1),
        FormalismTrack::GrassmannR => ("+(i/hbar c)[F, G gamma0]+", -1),
    };
    let ihc = cq(Q::zero(), consts.hbar_c()) * crate::scalar::cq_int(sign);
    let target_coeff = ihc * classical.constant_part();
    let target = fock.identity().scale(&target_coeff);
    let residual = anti.residual_norm(&target);
    Ok(QuantizeVerdict {
        track,
        pair: format!("({}, {})", lhs, rhs),
        classical_value: fmt_cq(&classical_coeff),
        recipe: recipe.to_string(),
        operator_residual_norm: residual,
        pass: residual == 0.0,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeibnizReport {
    pub classical_residual: f64,
    pub operator_residual: f64,
    pub pass: bool,
}

/// Checks the Leibniz decomposition of the Dirac bracket of two bilinear
/// functionals f = sum A_i D_i, g = sum A_j D_j: classically term-for-term
/// against the closed-form bracket, then on the Fock representation, where
/// [f-hat, g-hat] is rebuilt from the atom anticommutators.
pub fn leibniz_quantization_check(
    fock: &FockSpace,
    gs: &GammaSet,
    consts: &Constants,
    lattice: &LatticeSpec,
    f: &PhaseFunctional,
    g: &PhaseFunctional,
) -> Result<LeibnizReport> {
    let track = FormalismTrack::SpinorialFO;
    let stats = track.stats();
    let bilinear_parts = |h: &PhaseFunctional| -> Result<Vec<(CQ, FieldAtom, FieldAtom)>> {
        let mut parts = Vec::new();
        for (atoms, coeff) in h.terms() {
            if atoms.len() != 2 || !atoms[0].kind.is_row() || atoms[1].kind.is_row() {
                return Err(CoreError::NonBilinear(h.to_string()));
            }
            parts.push((coeff.clone(), atoms[0], atoms[1]));
        }
        Ok(parts)
    };
    let fp = bilinear_parts(f)?;
    let gp = bilinear_parts(g)?;

    // Classical route: {f, g}_D = sum_ij A_i {D_i, A_j}_D D_j
    //                           - sum_ij A_j {D_j, A_i}_D D_i.
    let mut decomposition = PhaseFunctional::zero(stats);
    for (cf, a_i, d_i) in &fp {
        for (cg, a_j, d_j) in &gp {
            let br = dirac_track(
                track,
                &PhaseFunctional::atom(stats, *d_i),
                &PhaseFunctional::atom(stats, *a_j),
                lattice,
                consts,
            )?
            .constant_part();
            if !br.is_zero() {
                decomposition.add_term(cf.clone() * cg.clone() * br, vec![*a_i, *d_j]);
            }
            let br = dirac_track(
                track,
                &PhaseFunctional::atom(stats, *d_j),
                &PhaseFunctional::atom(stats, *a_i),
                lattice,
                consts,
            )?
            .constant_part();
            if !br.is_zero() {
                decomposition.add_term(-(cf.clone() * cg.clone() * br), vec![*a_j, *d_i]);
            }
        }
    }
    let direct = dirac_track(track, f, g, lattice, consts)?;
    let classical_residual = direct.sub(&decomposition)?.max_coeff_abs();

    // Operator route: [f-hat, g-hat] = sum_ij A_i [D_i, A_j]+ D_j
    //                                - sum_ij A_j [D_j, A_i]+ D_i,
    // with the atom anticommutators evaluated on the Fock space.
    let op = |atom: &FieldAtom| {
        field_operator(fock, gs, consts, track, atom.kind, atom.component as usize, atom.site as usize)
    };
    let f_op = quantize_functional(fock, gs, consts, track, f)?;
    let g_op = quantize_functional(fock, gs, consts, track, g)?;
    let direct_comm = f_op.commutator(&g_op)?;
    let mut rebuilt = fock.zero_operator();
    for (cf, a_i, d_i) in &fp {
        for (cg, a_j, d_j) in &gp {
            let anti = op(d_i)?.anticommutator(&op(a_j)?)?;
            if let Some(scalar) = anti.as_identity_multiple() {
                if !scalar.is_zero() {
                    let term = op(a_i)?.mul(&op(d_j)?).scale(&(cf.clone() * cg.clone() * scalar));
                    rebuilt = rebuilt.add(&term)?;
                }
            }
            let anti = op(d_j)?.anticommutator(&op(a_i)?)?;
            if let Some(scalar) = anti.as_identity_multiple() {
                if !scalar.is_zero() {
                    let term =
                        op(a_j)?.mul(&op(d_i)?).scale(&-(cf.clone() * cg.clone() * scalar));
                    rebuilt = rebuilt.add(&term)?;
                }
            }
        }
    }
    let operator_residual = direct_comm.residual_norm(&rebuilt);
    Ok(LeibnizReport {
        classical_residual,
        operator_residual,
        pass: classical_residual == 0.0 && operator_residual == 0.0,
    })
}

/// The full quantization suite on a given lattice: canonical
/// anticommutation relations, the fundamental anticommutator and its
/// momentum variants, every track's recipe on every canonical pair, the
/// reduced-chart anticommutator, and the Leibniz consistency check.
pub fn run_quantization_suite(
    lattice: &LatticeSpec,
    gs: &GammaSet,
    consts: &Constants,
    tracks: &[FormalismTrack],
) -> Result<Vec<CheckRecord>> {
    let fock = FockSpace::for_lattice(lattice)?;
    let suite = format!("quantization_{}site", fock.sites);
    let mut checks = Vec::new();
    let delta = cq_re(Q::one() / lattice.volume());

    // Jordan-Wigner CAR: [a_p, a_q^dag]+ = delta_pq, [a_p, a_q]+ = 0.
    let mut worst = 0.0f64;
    for p in 0..fock.n_modes {
        for q in 0..fock.n_modes {
            let ap = fock.annihilation(p)?;
            let aq = fock.annihilation(q)?;
            let anti = ap.anticommutator(&aq.adjoint())?;
            let expect = if p == q { fock.identity() } else { fock.zero_operator() };
            worst = worst.max(anti.residual_norm(&expect));
            worst = worst.max(ap.anticommutator(&aq)?.residual_norm(&fock.zero_operator()));
        }
    }
    checks.push(CheckRecord::exact(
        &suite,
        "car_relations",
        "mode operators satisfy the canonical anticommutation relations".into(),
        worst,
    ));

    // Fundamental anticommutator [psi_a(i), psi^dag_b(j)]+ = delta_ab
    // delta_ij / v, including the cross-site zeros.
    let spin_track = FormalismTrack::SpinorialFO;
    let mut worst = 0.0f64;
    for si in 0..fock.sites {
        for sj in 0..fock.sites {
            for a in 0..SPINOR_COMPONENTS {
                for b in 0..SPINOR_COMPONENTS {
                    let psi = field_operator(&fock, gs, consts, spin_track, AtomKind::Psi, a, si)?;
                    let psi_dag =
                        field_operator(&fock, gs, consts, spin_track, AtomKind::Psi, b, sj)?
                            .adjoint();
                    let anti = psi.anticommutator(&psi_dag)?;
                    let expect = if a == b && si == sj {
                        fock.identity().scale(&delta)
                    } else {
                        fock.zero_operator()
                    };
                    worst = worst.max(anti.residual_norm(&expect));
                    // Same-species anticommutator vanishes.
                    let psi_b =
                        field_operator(&fock, gs, consts, spin_track, AtomKind::Psi, b, sj)?;
                    worst = worst
                        .max(psi.anticommutator(&psi_b)?.residual_norm(&fock.zero_operator()));
                }
            }
        }
    }
    checks.push(CheckRecord::exact(
        &suite,
        "fundamental_anticommutator",
        "[psi, psi^dag]+ = delta_ab delta_ij / v".into(),
        worst,
    ));

    // Momentum-operator anticommutators of the spinorial track.
    let hc2 = consts.hbar_c() / crate::scalar::qi(2);
    let expectations = [
        (AtomKind::PiBar, AtomKind::Pi, cq_re(&hc2 * &hc2), "momentum_pair_anticommutator"),
        (AtomKind::Psi, AtomKind::Pi, cq(Q::zero(), hc2.clone()), "psi_pi_anticommutator"),
        (
            AtomKind::PiBar,
            AtomKind::PsiBar,
            cq(Q::zero(), -hc2.clone()),
            "pibar_psidag_anticommutator",
        ),
    ];
    for (lk, rk, coeff, name) in expectations {
        let mut worst = 0.0f64;
        for a in 0..SPINOR_COMPONENTS {
            for b in 0..SPINOR_COMPONENTS {
                let lhs = field_operator(&fock, gs, consts, spin_track, lk, a, 0)?;
                let rhs = gamma0_contracted(&fock, gs, consts, spin_track, rk, b, 0)?;
                let anti = lhs.anticommutator(&rhs)?;
                let expect = if a == b {
                    fock.identity().scale(&(coeff.clone() * delta.clone()))
                } else {
                    fock.zero_operator()
                };
                worst = worst.max(anti.residual_norm(&expect));
            }
        }
        checks.push(CheckRecord::exact(&suite, name, "matches the printed value".into(), worst));
    }

    // Recipe verification per track: every canonical (spinor, adjoint)
    // pair, all components, same and different sites.
    for &track in tracks {
        let mut worst = 0.0f64;
        let mut verdicts = 0usize;
        for lk in [AtomKind::Psi, AtomKind::PiBar] {
            for rk in [AtomKind::PsiBar, AtomKind::Pi] {
                for a in 0..SPINOR_COMPONENTS {
                    for b in 0..SPINOR_COMPONENTS {
                        for sj in 0..fock.sites {
                            let verdict = quantize_and_verify(
                                &fock,
                                gs,
                                consts,
                                track,
                                lattice,
                                FieldAtom::new(lk, a, 0),
                                FieldAtom::new(rk, b, sj),
                            )?;
                            worst = worst.max(verdict.operator_residual_norm);
                            verdicts += 1;
                        }
                    }
                }
            }
        }
        checks.push(CheckRecord::exact(
            &suite,
            &format!("recipe_{}", track.name()),
            format!("{verdicts} canonical pairs map onto the fundamental anticommutator"),
            worst,
        ));
    }

    // Reduced-chart anticommutator [psi1, pi1 gamma0]+ = i hbar c delta,
    // which collapses to the fundamental one after the operator identities.
    let mut worst = 0.0f64;
    for a in 0..SPINOR_COMPONENTS {
        for b in 0..SPINOR_COMPONENTS {
            let psi1 = field_operator(&fock, gs, consts, spin_track, AtomKind::Psi1, a, 0)?;
            let pi1 = gamma0_contracted(&fock, gs, consts, spin_track, AtomKind::Pi1, b, 0)?;
            let anti = psi1.anticommutator(&pi1)?;
            let expect = if a == b {
                fock.identity().scale(&(cq(Q::zero(), consts.hbar_c()) * delta.clone()))
            } else {
                fock.zero_operator()
            };
            worst = worst.max(anti.residual_norm(&expect));
            // With the operator identities, psi1-hat is psi-hat itself.
            let psi = field_operator(&fock, gs, consts, spin_track, AtomKind::Psi, a, 0)?;
            worst = worst.max(psi1.residual_norm(&psi));
        }
    }
    checks.push(CheckRecord::exact(
        &suite,
        "reduced_chart_anticommutator",
        "[psi1, pi1 gamma0]+ = i hbar c delta and psi1-hat = psi-hat".into(),
        worst,
    ));

    // Leibniz consistency on bilinears: the number functional commutes with
    // itself; a momentum bilinear against an adjoint one agrees both ways.
    let stats = spin_track.stats();
    let v = cq_re(lattice.volume());
    let mut number = PhaseFunctional::zero(stats);
    let mut f_pi_psi = PhaseFunctional::zero(stats);
    let mut g_bar = PhaseFunctional::zero(stats);
    for site in 0..fock.sites {
        for a in 0..SPINOR_COMPONENTS {
            number.add_term(
                v.clone(),
                vec![
                    FieldAtom::new(AtomKind::PsiBar, a, site),
                    FieldAtom::new(AtomKind::Psi, a, site),
                ],
            );
            f_pi_psi.add_term(
                v.clone(),
                vec![FieldAtom::new(AtomKind::Pi, a, site), FieldAtom::new(AtomKind::Psi, a, site)],
            );
            g_bar.add_term(
                v.clone(),
                vec![
                    FieldAtom::new(AtomKind::PsiBar, a, site),
                    FieldAtom::new(AtomKind::PiBar, a, site),
                ],
            );
        }
    }
    let self_report = leibniz_quantization_check(&fock, gs, consts, lattice, &number, &number)?;
    let cross_report = leibniz_quantization_check(&fock, gs, consts, lattice, &f_pi_psi, &g_bar)?;
    let self_comm = quantize_functional(&fock, gs, consts, spin_track, &number)?
        .commutator(&quantize_functional(&fock, gs, consts, spin_track, &number)?)?;
    checks.push(CheckRecord::exact(
        &suite,
        "leibniz_bilinears",
        "Leibniz decomposition holds classically and on the Fock space".into(),
        self_report
            .classical_residual
            .max(self_report.operator_residual)
            .max(cross_report.classical_residual)
            .max(cross_report.operator_residual)
            .max(self_comm.residual_norm(&fock.zero_operator())),
    ));

    Ok(checks)
}
