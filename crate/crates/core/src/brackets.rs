//! The four bracket engines.
//!
//! Spinorial track: factor-ordered Poisson bracket and the induced Dirac
//! bracket. Grassmann tracks: the symmetric generalized Poisson brackets
//! built from left or right derivatives, and their Dirac brackets. All of
//! them are equal-time brackets over the discretized phase space, exact at
//! the coefficient level.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grassmann::Parity;
use crate::phase::{AtomKind, DerivSide, LatticeSpec, PhaseFunctional, Statistics};
use crate::scalar::{cq_re, fmt_cq, Constants, CQ, Q};
use num::One;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketKind {
    FactorOrderedPb,
    FactorOrderedDb,
    GrassmannPbL,
    GrassmannPbR,
    GrassmannDbL,
    GrassmannDbR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn deriv(self) -> DerivSide {
        match self {
            Side::Left => DerivSide::Left,
            Side::Right => DerivSide::Right,
        }
    }
}

/// `(1/v) * sum over components and sites of (d_f-part)(d_g-part)`, the
/// discrete form of an integral of two functional derivatives. `df_kind`
/// selects the atom kind differentiated in `f`, `dg_kind` in `g`.
fn contraction(
    f: &PhaseFunctional,
    g: &PhaseFunctional,
    df_kind: AtomKind,
    dg_kind: AtomKind,
    side: DerivSide,
) -> Result<PhaseFunctional> {
    let mut out = PhaseFunctional::zero(f.stats);
    let support_f: Vec<_> = f
        .atoms()
        .into_iter()
        .filter(|a| a.kind == df_kind)
        .map(|a| (a.component, a.site))
        .collect();
    if support_f.is_empty() {
        return Ok(out);
    }
    let support_g: std::collections::BTreeSet<_> = g
        .atoms()
        .into_iter()
        .filter(|a| a.kind == dg_kind)
        .map(|a| (a.component, a.site))
        .collect();
    for (component, site) in support_f {
        if !support_g.contains(&(component, site)) {
            continue;
        }
        let fa = crate::phase::FieldAtom { kind: df_kind, component, site };
        let ga = crate::phase::FieldAtom { kind: dg_kind, component, site };
        let (df, dg) = match side {
            DerivSide::Plain => (f.partial(fa)?, g.partial(ga)?),
            s => (f.partial_sided(fa, s)?, g.partial_sided(ga, s)?),
        };
        out = out.add(&df.mul(&dg)?)?;
    }
    Ok(out)
}

fn check_spinorial(f: &PhaseFunctional, g: &PhaseFunctional) -> Result<()> {
    f.checked_pair(g)?;
    if f.stats != Statistics::Commuting {
        return Err(CoreError::BracketDomain(
            "factor-ordered brackets take complex-valued (commuting) functionals".into(),
        ));
    }
    if f.degree() > 2 || g.degree() > 2 {
        return Err(CoreError::BracketDomain("spinorial functionals are capped at degree 2".into()));
    }
    Ok(())
}

fn parity_sign(f: &PhaseFunctional) -> Result<i64> {
    match f.parity() {
        Parity::Even => Ok(1),
        Parity::Odd => Ok(-1),
        Parity::Mixed => Err(CoreError::MixedParity),
    }
}

fn check_grassmann(f: &PhaseFunctional, g: &PhaseFunctional) -> Result<()> {
    f.checked_pair(g)?;
    if f.stats != Statistics::Anticommuting {
        return Err(CoreError::BracketDomain(
            "generalized brackets take Grassmann-valued (anticommuting) functionals".into(),
        ));
    }
    Ok(())
}

/// Factor-ordered Poisson bracket over the base chart, in the printed term
/// order: {f,g} = int [ df/dpsi dg/dpi - dg/dpsi df/dpi
///                    + dg/dpibar df/dpsibar - df/dpibar dg/dpsibar ].
pub fn poisson_fo(
    f: &PhaseFunctional,
    g: &PhaseFunctional,
    lattice: &LatticeSpec,
) -> Result<PhaseFunctional> {
    check_spinorial(f, g)?;
    let p = DerivSide::Plain;
    let t1 = contraction(f, g, AtomKind::Psi, AtomKind::Pi, p)?;
    let t2 = contraction(g, f, AtomKind::Psi, AtomKind::Pi, p)?;
    let t3 = contraction(g, f, AtomKind::PiBar, AtomKind::PsiBar, p)?;
    let t4 = contraction(f, g, AtomKind::PiBar, AtomKind::PsiBar, p)?;
    let sum = t1.sub(&t2)?.add(&t3)?.sub(&t4)?;
    Ok(sum.scale(&cq_re(Q::one() / lattice.volume())))
}

/// Poisson bracket in an arbitrary commuting canonical chart given as
/// (coordinate kind, momentum kind) pairs.
pub fn poisson_pairs(
    f: &PhaseFunctional,
    g: &PhaseFunctional,
    lattice: &LatticeSpec,
    pairs: &[(AtomKind, AtomKind)],
) -> Result<PhaseFunctional> {
    f.checked_pair(g)?;
    let p = DerivSide::Plain;
    let mut sum = PhaseFunctional::zero(f.stats);
    for (q, pk) in pairs {
        sum = sum.add(&contraction(f, g, *q, *pk, p)?)?;
        sum = sum.sub(&contraction(g, f, *q, *pk, p)?)?;
    }
    Ok(sum.scale(&cq_re(Q::one() / lattice.volume())))
}

/// Factor-ordered Dirac bracket:
/// {f,g}_D = 1/2 {f,g}
///         - i/(hbar c) int [ df/dpsi dg/dpsibar - dg/dpsi df/dpsibar ]
///         - i hbar c/4 int [ df/dpibar dg/dpi   - dg/dpibar df/dpi ].
pub fn dirac_fo(
    f: &PhaseFunctional,
    g: &PhaseFunctional,
    lattice: &LatticeSpec,
    consts: &Constants,
) -> Result<PhaseFunctional> {
    check_spinorial(f, g)?;
    let p = DerivSide::Plain;
    let half_pb = poisson_fo(f, g, lattice)?.scale(&cq_re(Q::new(1.into(), 2.into())));
    let inv_v = cq_re(Q::one() / lattice.volume());

    let psi_cross = contraction(f, g, AtomKind::Psi, AtomKind::PsiBar, p)?
        .sub(&contraction(g, f, AtomKind::Psi, AtomKind::PsiBar, p)?)?
        .scale(&inv_v);
    let pi_cross = contraction(f, g, AtomKind::PiBar, AtomKind::Pi, p)?
        .sub(&contraction(g, f, AtomKind::PiBar, AtomKind::Pi, p)?)?
        .scale(&inv_v);

    let i_over = consts.i_over_hbar_c();
    let quarter = consts.i_hbar_c_half().scale_q(&Q::new(1.into(), 2.into()));
    half_pb
        .sub(&psi_cross.scale(&i_over))?
        .sub(&pi_cross.scale(&quarter))
}

trait ScaleQ {
    fn scale_q(&self, q: &Q) -> Self;
}

impl ScaleQ for CQ {
    fn scale_q(&self, q: &Q) -> Self {
        self.clone() * cq_re(q.clone())
    }
}

/// Generalized Poisson bracket of homogeneous superfunctionals. Side L:
/// prefactor (-1)^{eps_F} and left derivatives throughout; side R:
/// prefactor (-1)^{eps_G} and right derivatives. All four products carry
/// plus signs; the bracket is graded-symmetric.
pub fn poisson_grassmann(
    f: &PhaseFunctional,
    g: &PhaseFunctional,
    side: Side,
    lattice: &LatticeSpec,
) -> Result<PhaseFunctional> {
    check_grassmann(f, g)?;
    let sign = match side {
        Side::Left => parity_sign(f)?,
        Side::Right => parity_sign(g)?,
    };
    let _ = parity_sign(f)?;
    let _ = parity_sign(g)?;
    let d = side.deriv();
    let mut sum = contraction(f, g, AtomKind::Psi, AtomKind::Pi, d)?;
    sum = sum.add(&contraction(f, g, AtomKind::Pi, AtomKind::Psi, d)?)?;
    sum = sum.add(&contraction(f, g, AtomKind::PsiBar, AtomKind::PiBar, d)?)?;
    sum = sum.add(&contraction(f, g, AtomKind::PiBar, AtomKind::PsiBar, d)?)?;
    Ok(sum.scale(&cq_re(Q::from_integer(sign.into()) / lattice.volume())))
}

/// Generalized Poisson bracket restricted to the given (coordinate,
/// momentum) pairs of an adapted chart.
pub fn poisson_grassmann_pairs(
    f: &PhaseFunctional,
    g: &PhaseFunctional,
    side: Side,
    lattice: &LatticeSpec,
    pairs: &[(AtomKind, AtomKind)],
) -> Result<PhaseFunctional> {
    check_grassmann(f, g)?;
    let sign = match side {
        Side::Left => parity_sign(f)?,
        Side::Right => parity_sign(g)?,
    };
    let _ = parity_sign(f)?;
    let _ = parity_sign(g)?;
    let d = side.deriv();
    let mut sum = PhaseFunctional::zero(f.stats);
    for (q, p) in pairs {
        sum = sum.add(&contraction(f, g, *q, *p, d)?)?;
        sum = sum.add(&contraction(f, g, *p, *q, d)?)?;
    }
    Ok(sum.scale(&cq_re(Q::from_integer(sign.into()) / lattice.volume())))
}

/// Grassmann Dirac brackets. Side L:
/// {F,G} = 1/2 {F,G}^L + (-1)^{eps_F} i/(hbar c) int [dF/dpsi dG/dpsibar + dF/dpsibar dG/dpsi]
///                     - (-1)^{eps_F} i hbar c/4 int [dF/dpi dG/dpibar + dF/dpibar dG/dpi],
/// side R flips both complementary signs and grades by eps_G.
pub fn dirac_grassmann(
    f: &PhaseFunctional,
    g: &PhaseFunctional,
    side: Side,
    lattice: &LatticeSpec,
    consts: &Constants,
) -> Result<PhaseFunctional> {
    check_grassmann(f, g)?;
    let grade = match side {
        Side::Left => parity_sign(f)?,
        Side::Right => parity_sign(g)?,
    };
    let _ = parity_sign(f)?;
    let _ = parity_sign(g)?;
    let d = side.deriv();
    let inv_v = cq_re(Q::one() / lattice.volume());

    let half_pb =
        poisson_grassmann(f, g, side, lattice)?.scale(&cq_re(Q::new(1.into(), 2.into())));
    let psi_cross = contraction(f, g, AtomKind::Psi, AtomKind::PsiBar, d)?
        .add(&contraction(f, g, AtomKind::PsiBar, AtomKind::Psi, d)?)?
        .scale(&inv_v);
    let pi_cross = contraction(f, g, AtomKind::Pi, AtomKind::PiBar, d)?
        .add(&contraction(f, g, AtomKind::PiBar, AtomKind::Pi, d)?)?
        .scale(&inv_v);

    let grade_q = Q::from_integer(grade.into());
    let i_over = consts.i_over_hbar_c().scale_q(&grade_q);
    let quarter = consts.i_hbar_c_half().scale_q(&(grade_q / Q::from_integer(2.into())));
    match side {
        Side::Left => half_pb.add(&psi_cross.scale(&i_over))?.sub(&pi_cross.scale(&quarter)),
        Side::Right => half_pb.sub(&psi_cross.scale(&i_over))?.add(&pi_cross.scale(&quarter)),
    }
}

/// Structured log record for one bracket evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketLog {
    pub kind: BracketKind,
    pub lhs: String,
    pub rhs: String,
    pub result_terms: Vec<TermRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermRecord {
    pub coefficient: String,
    pub atoms: Vec<String>,
}

pub fn term_records(f: &PhaseFunctional) -> Vec<TermRecord> {
    f.terms()
        .map(|(atoms, coeff)| TermRecord {
            coefficient: fmt_cq(coeff),
            atoms: atoms.iter().map(|a| a.to_string()).collect(),
        })
        .collect()
}

impl BracketLog {
    pub fn record(
        kind: BracketKind,
        lhs: &PhaseFunctional,
        rhs: &PhaseFunctional,
        result: &PhaseFunctional,
    ) -> Self {
        Self {
            kind,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            result_terms: term_records(result),
        }
    }
}
