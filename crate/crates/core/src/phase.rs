//! Discretized Dirac-field phase space.
//!
//! Fields live on a periodic lattice; a `FieldAtom` is one field component
//! at one site, and a `PhaseFunctional` is a polynomial in atoms with exact
//! complex coefficients. The same functional machinery serves the spinorial
//! track (commuting atoms, factor-ordered terms) and the Grassmann tracks
//! (anticommuting atoms), selected by `Statistics`.
//!
//! Discretization conventions: integrals become `v * sum over sites`, the
//! delta distribution becomes `delta_ij / v` with `v = dx^dim`, and spatial
//! derivatives are periodic central differences.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::gamma::GammaSet;
use crate::grassmann::{GrassmannElement, Parity};
use crate::scalar::{cq_re, parse_q, q_to_f64, to_c64, C64, CQ, Q};

/// Periodic lattice in 1, 2 or 3 spatial dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub dimension: usize,
    pub sites_per_axis: usize,
    pub dx: Q,
}

impl LatticeSpec {
    pub fn new(dimension: usize, sites_per_axis: usize, dx: Q) -> Self {
        assert!((1..=3).contains(&dimension), "dimension must be 1, 2 or 3");
        assert!(sites_per_axis >= 1);
        assert!(dx > Q::zero());
        Self { dimension, sites_per_axis, dx }
    }

    pub fn line(sites: usize, dx: Q) -> Self {
        Self::new(1, sites, dx)
    }

    pub fn total_sites(&self) -> usize {
        self.sites_per_axis.pow(self.dimension as u32)
    }

    /// Cell volume v = dx^dimension.
    pub fn volume(&self) -> Q {
        let mut v = Q::one();
        for _ in 0..self.dimension {
            v = v * &self.dx;
        }
        v
    }

    pub fn supports_central_differences(&self) -> bool {
        self.sites_per_axis >= 3
    }

    fn coords(&self, site: usize) -> [usize; 3] {
        let n = self.sites_per_axis;
        let mut c = [0usize; 3];
        let mut s = site;
        for axis in 0..self.dimension {
            c[axis] = s % n;
            s /= n;
        }
        c
    }

    fn site_of(&self, coords: [usize; 3]) -> usize {
        let n = self.sites_per_axis;
        let mut s = 0usize;
        for axis in (0..self.dimension).rev() {
            s = s * n + coords[axis];
        }
        s
    }

    /// Periodic neighbor of `site` along `axis` (0-based), offset +-1.
    pub fn neighbor(&self, site: usize, axis: usize, step: i64) -> usize {
        assert!(axis < self.dimension);
        let n = self.sites_per_axis as i64;
        let mut c = self.coords(site);
        let moved = (c[axis] as i64 + step).rem_euclid(n);
        c[axis] = moved as usize;
        self.site_of(c)
    }

    pub fn dx_f64(&self) -> f64 {
        q_to_f64(&self.dx)
    }

    pub fn volume_f64(&self) -> f64 {
        q_to_f64(&self.volume())
    }
}

/// Parses a plain-text `key = value` configuration (one pair per line,
/// `#` comments allowed).
pub fn parse_kv_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CoreError::ConfigParse(format!("line {}: missing `=`", lineno + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl LatticeSpec {
    /// Reads `dimension`, `sites`, `dx` keys, defaulting to a 1D 8-site
    /// unit-spacing line.
    pub fn from_kv(kv: &BTreeMap<String, String>) -> Result<Self> {
        let dimension = match kv.get("dimension") {
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| CoreError::ConfigParse(format!("bad dimension `{s}`")))?,
            None => 1,
        };
        let sites = match kv.get("sites") {
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| CoreError::ConfigParse(format!("bad sites `{s}`")))?,
            None => 8,
        };
        let dx = match kv.get("dx") {
            Some(s) => parse_q(s)?,
            None => Q::one(),
        };
        if !(1..=3).contains(&dimension) || sites == 0 || dx <= Q::zero() {
            return Err(CoreError::ConfigParse("dimension/sites/dx out of range".into()));
        }
        Ok(Self::new(dimension, sites, dx))
    }
}

impl crate::scalar::Constants {
    pub fn from_kv(kv: &BTreeMap<String, String>) -> Result<Self> {
        let get = |key: &str| -> Result<Q> {
            match kv.get(key) {
                Some(s) => parse_q(s),
                None => Ok(Q::one()),
            }
        };
        let hbar = get("hbar")?;
        let c = get("c")?;
        let mass = get("mass")?;
        if hbar <= Q::zero() || c <= Q::zero() || mass <= Q::zero() {
            return Err(CoreError::ConfigParse("constants must be positive".into()));
        }
        Ok(Self { hbar, c, mass })
    }
}

/// Field kinds of the base chart, the shell-adapted chart, and the
/// undetermined slashed-time-derivative slots used by the primary
/// Hamiltonian before the consistency conditions solve them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomKind {
    Psi,
    PsiBar,
    Pi,
    PiBar,
    Psi1,
    Pi1,
    Psi2,
    Pi2,
    Dot0Psi,
    Dot0PsiBar,
    Dot0Pi,
    Dot0PiBar,
}

impl AtomKind {
    /// Dirac-adjoint-valued (row) kinds; the rest are spinor-valued (column).
    pub fn is_row(self) -> bool {
        matches!(
            self,
            AtomKind::PsiBar
                | AtomKind::Pi
                | AtomKind::Pi1
                | AtomKind::Pi2
                | AtomKind::Dot0PsiBar
                | AtomKind::Dot0Pi
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            AtomKind::Psi => "psi",
            AtomKind::PsiBar => "psibar",
            AtomKind::Pi => "pi",
            AtomKind::PiBar => "pibar",
            AtomKind::Psi1 => "psi1",
            AtomKind::Pi1 => "pi1",
            AtomKind::Psi2 => "psi2",
            AtomKind::Pi2 => "pi2",
            AtomKind::Dot0Psi => "d0psi",
            AtomKind::Dot0PsiBar => "d0psibar",
            AtomKind::Dot0Pi => "d0pi",
            AtomKind::Dot0PiBar => "d0pibar",
        }
    }
}

pub const SPINOR_COMPONENTS: usize = 4;

/// One field component at one lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldAtom {
    pub kind: AtomKind,
    pub component: u8,
    pub site: u32,
}

impl FieldAtom {
    pub fn new(kind: AtomKind, component: usize, site: usize) -> Self {
        debug_assert!(component < SPINOR_COMPONENTS);
        Self { kind, component: component as u8, site: site as u32 }
    }
}

impl PartialOrd for FieldAtom {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Rows sort before columns so canonical term order is automatically the
/// factor-ordered "Dirac adjoint times spinor" layout.
impl Ord for FieldAtom {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let key = |a: &FieldAtom| (!a.kind.is_row() as u8, a.kind, a.site, a.component);
        key(self).cmp(&key(other))
    }
}

impl fmt::Display for FieldAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}({})", self.kind.label(), self.component, self.site)
    }
}

/// Commuting (spinorial track) or anticommuting (Grassmann tracks) atom
/// algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Commuting,
    Anticommuting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivSide {
    Plain,
    Left,
    Right,
}

/// A polynomial phase-space functional in canonical sparse form: terms sorted
/// by monomial, like terms merged, zero coefficients dropped, and each
/// monomial's atoms in canonical order (with the reordering sign absorbed
/// into the coefficient when the atoms anticommute).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFunctional {
    pub stats: Statistics,
    terms: BTreeMap<Vec<FieldAtom>, CQ>,
}

/// Canonicalizes one monomial: sorts atoms, returning the permutation sign
/// for anticommuting statistics; `None` when the monomial vanishes (repeated
/// anticommuting atom).
fn sort_atoms(atoms: &mut Vec<FieldAtom>, stats: Statistics) -> Option<i64> {
    let mut sign = 1i64;
    // Insertion sort; desk-scale monomials are tiny.
    for i in 1..atoms.len() {
        let mut j = i;
        while j > 0 && atoms[j - 1] > atoms[j] {
            atoms.swap(j - 1, j);
            if stats == Statistics::Anticommuting {
                sign = -sign;
            }
            j -= 1;
        }
    }
    if stats == Statistics::Anticommuting {
        for w in atoms.windows(2) {
            if w[0] == w[1] {
                return None;
            }
        }
    }
    Some(sign)
}

impl PhaseFunctional {
    pub fn zero(stats: Statistics) -> Self {
        Self { stats, terms: BTreeMap::new() }
    }

    pub fn constant(stats: Statistics, value: CQ) -> Self {
        let mut f = Self::zero(stats);
        f.add_term(value, vec![]);
        f
    }

    pub fn atom(stats: Statistics, atom: FieldAtom) -> Self {
        let mut f = Self::zero(stats);
        f.add_term(CQ::one(), vec![atom]);
        f
    }

    pub fn monomial(stats: Statistics, coeff: CQ, atoms: Vec<FieldAtom>) -> Self {
        let mut f = Self::zero(stats);
        f.add_term(coeff, atoms);
        f
    }

    /// Adds `coeff * atoms` and re-canonicalizes.
    pub fn add_term(&mut self, coeff: CQ, mut atoms: Vec<FieldAtom>) {
        if coeff.is_zero() {
            return;
        }
        let Some(sign) = sort_atoms(&mut atoms, self.stats) else {
            return;
        };
        let coeff = coeff * crate::scalar::cq_int(sign);
        match self.terms.get_mut(&atoms) {
            Some(c) => {
                *c = c.clone() + coeff;
                if c.is_zero() {
                    self.terms.remove(&atoms);
                }
            }
            None => {
                self.terms.insert(atoms, coeff);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<FieldAtom>, &CQ)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the empty monomial.
    pub fn constant_part(&self) -> CQ {
        self.terms.get(&vec![]).cloned().unwrap_or_else(CQ::zero)
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|a| a.len()).max().unwrap_or(0)
    }

    /// Parity of an anticommuting functional.
    pub fn parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for atoms in self.terms.keys() {
            if atoms.len() % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
        match (even, odd) {
            (true, true) => Parity::Mixed,
            (false, true) => Parity::Odd,
            _ => Parity::Even,
        }
    }

    /// Every stored degree-2 monomial pairs a row atom before a column atom.
    /// Canonical ordering makes this automatic unless a monomial holds two
    /// atoms of the same side.
    pub fn is_factor_ordered(&self) -> bool {
        self.terms.keys().all(|atoms| {
            atoms.len() < 2
                || (atoms.len() == 2 && atoms[0].kind.is_row() && !atoms[1].kind.is_row())
        })
    }

    pub fn checked_pair(&self, other: &Self) -> Result<()> {
        if self.stats != other.stats {
            return Err(CoreError::StatisticsMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.checked_pair(other)?;
        let mut out = self.clone();
        for (atoms, coeff) in other.terms() {
            out.add_term(coeff.clone(), atoms.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-CQ::one()))
    }

    pub fn scale(&self, s: &CQ) -> Self {
        let mut out = Self::zero(self.stats);
        if s.is_zero() {
            return out;
        }
        for (atoms, coeff) in self.terms() {
            out.add_term(coeff.clone() * s.clone(), atoms.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.checked_pair(other)?;
        let mut out = Self::zero(self.stats);
        for (aa, ca) in self.terms() {
            for (ab, cb) in other.terms() {
                let mut atoms = aa.clone();
                atoms.extend_from_slice(ab);
                out.add_term(ca.clone() * cb.clone(), atoms);
            }
        }
        Ok(out)
    }

    /// Plain partial derivative with respect to one atom (commuting track).
    pub fn partial(&self, atom: FieldAtom) -> Result<Self> {
        if self.stats != Statistics::Commuting {
            return Err(CoreError::WrongDerivativeSide {
                side: "plain".into(),
                track: "anticommuting".into(),
            });
        }
        let mut out = Self::zero(self.stats);
        for (atoms, coeff) in self.terms() {
            let count = atoms.iter().filter(|a| **a == atom).count();
            if count == 0 {
                continue;
            }
            let mut rest = atoms.clone();
            let pos = rest.iter().position(|a| *a == atom).unwrap();
            rest.remove(pos);
            out.add_term(coeff.clone() * crate::scalar::cq_int(count as i64), rest);
        }
        Ok(out)
    }

    /// Grassmann left/right partial derivative with respect to one atom.
    pub fn partial_sided(&self, atom: FieldAtom, side: DerivSide) -> Result<Self> {
        if self.stats != Statistics::Anticommuting {
            return Err(CoreError::WrongDerivativeSide {
                side: format!("{side:?}").to_lowercase(),
                track: "commuting".into(),
            });
        }
        let mut out = Self::zero(self.stats);
        for (atoms, coeff) in self.terms() {
            let Some(pos) = atoms.iter().position(|a| *a == atom) else {
                continue;
            };
            let shift = match side {
                DerivSide::Left => pos,
                DerivSide::Right => atoms.len() - 1 - pos,
                DerivSide::Plain => unreachable!(),
            };
            let sign = if shift % 2 == 0 { 1 } else { -1 };
            let mut rest = atoms.clone();
            rest.remove(pos);
            out.add_term(coeff.clone() * crate::scalar::cq_int(sign), rest);
        }
        Ok(out)
    }

    /// Discrete functional derivative: (1/v) times the partial derivative,
    /// realizing `delta(r - r') -> delta_ij / v`.
    pub fn functional_derivative(
        &self,
        atom: FieldAtom,
        side: DerivSide,
        lattice: &LatticeSpec,
    ) -> Result<Self> {
        let partial = match side {
            DerivSide::Plain => self.partial(atom)?,
            DerivSide::Left | DerivSide::Right => self.partial_sided(atom, side)?,
        };
        Ok(partial.scale(&cq_re(Q::one() / lattice.volume())))
    }

    /// All atoms appearing anywhere in the functional.
    pub fn atoms(&self) -> BTreeSet<FieldAtom> {
        self.terms.keys().flat_map(|a| a.iter().copied()).collect()
    }

    pub fn contains_kind(&self, kind: AtomKind) -> bool {
        self.terms.keys().any(|atoms| atoms.iter().any(|a| a.kind == kind))
    }

    /// Drops every term containing one of `kinds` (imposing e.g. the shell
    /// psi2 = pi2 = 0).
    pub fn drop_kinds(&self, kinds: &[AtomKind]) -> Self {
        let mut out = Self::zero(self.stats);
        for (atoms, coeff) in self.terms() {
            if atoms.iter().any(|a| kinds.contains(&a.kind)) {
                continue;
            }
            out.add_term(coeff.clone(), atoms.clone());
        }
        out
    }

    /// Substitutes each atom by a linear combination of atoms of other kinds
    /// at the same component and site.
    pub fn substitute(&self, map: &LinearAtomMap) -> Self {
        let mut out = Self::zero(self.stats);
        for (atoms, coeff) in self.terms() {
            // Expand the product of per-atom linear combinations in order.
            let mut partials: Vec<(CQ, Vec<FieldAtom>)> = vec![(coeff.clone(), Vec::new())];
            for atom in atoms {
                let image = map.image(*atom);
                let mut next = Vec::with_capacity(partials.len() * image.len());
                for (c, prefix) in &partials {
                    for (ci, ai) in &image {
                        let mut atoms2 = prefix.clone();
                        atoms2.push(*ai);
                        next.push((c.clone() * ci.clone(), atoms2));
                    }
                }
                partials = next;
            }
            for (c, atoms2) in partials {
                out.add_term(c, atoms2);
            }
        }
        out
    }

    /// Substitutes whole functionals for atoms, expanding in monomial order
    /// so anticommuting signs stay right. Atoms not in the map survive.
    pub fn substitute_atoms(&self, map: &BTreeMap<FieldAtom, PhaseFunctional>) -> Result<Self> {
        let mut out = Self::zero(self.stats);
        for (atoms, coeff) in self.terms() {
            let mut acc = Self::constant(self.stats, coeff.clone());
            for atom in atoms {
                let factor = match map.get(atom) {
                    Some(f) => f.clone(),
                    None => Self::atom(self.stats, *atom),
                };
                acc = acc.mul(&factor)?;
            }
            out = out.add(&acc)?;
        }
        Ok(out)
    }

    /// Largest |re|+|im| coefficient, for residual reporting.
    pub fn max_coeff_abs(&self) -> f64 {
        self.terms.values().map(crate::scalar::cq_abs1).fold(0.0, f64::max)
    }

    pub fn evaluate_complex(&self, cfg: &ComplexField) -> Result<C64> {
        let mut acc = C64::zero();
        for (atoms, coeff) in self.terms() {
            let mut prod = to_c64(coeff);
            for atom in atoms {
                prod *= cfg.get(*atom)?;
            }
            acc += prod;
        }
        Ok(acc)
    }

    pub fn evaluate_exact(&self, cfg: &ExactField) -> Result<CQ> {
        let mut acc = CQ::zero();
        for (atoms, coeff) in self.terms() {
            let mut prod = coeff.clone();
            for atom in atoms {
                prod = prod * cfg.get(*atom)?;
            }
            acc = acc + prod;
        }
        Ok(acc)
    }

    /// Substitutes Grassmann values, multiplying in stored monomial order
    /// (the values need not commute).
    pub fn evaluate_grassmann(&self, cfg: &GrassmannField) -> Result<GrassmannElement> {
        let mut acc = GrassmannElement::zero(cfg.n_generators)?;
        for (atoms, coeff) in self.terms() {
            let mut prod = GrassmannElement::scalar(cfg.n_generators, coeff.clone())?;
            for atom in atoms {
                prod = prod.product(cfg.get(*atom)?)?;
            }
            acc = acc.add(&prod)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for PhaseFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (atoms, coeff) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", crate::scalar::fmt_cq(coeff))?;
            for a in atoms {
                write!(f, " {a}")?;
            }
        }
        Ok(())
    }
}

/// A kind-to-kind linear substitution preserving component and site.
#[derive(Debug, Clone, Default)]
pub struct LinearAtomMap {
    map: HashMap<AtomKind, Vec<(CQ, AtomKind)>>,
}

impl LinearAtomMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, from: AtomKind, image: Vec<(CQ, AtomKind)>) {
        self.map.insert(from, image);
    }

    fn image(&self, atom: FieldAtom) -> Vec<(CQ, FieldAtom)> {
        match self.map.get(&atom.kind) {
            Some(combo) => combo
                .iter()
                .map(|(c, kind)| {
                    (c.clone(), FieldAtom { kind: *kind, component: atom.component, site: atom.site })
                })
                .collect(),
            None => vec![(CQ::one(), atom)],
        }
    }
}

/// Slashed spatial derivative as a linear functional: for spinor kinds
/// (gamma^mu d_mu chi) at (component, site), for adjoint kinds
/// (d_mu chi gamma^mu), with d_mu the periodic central difference. `mu` is
/// 1-based as in the spacetime index set; spatial axes beyond the lattice
/// dimension contribute nothing.
pub fn slashed_mu(
    stats: Statistics,
    kind: AtomKind,
    component: usize,
    site: usize,
    mu: usize,
    gs: &GammaSet,
    lattice: &LatticeSpec,
) -> Result<PhaseFunctional> {
    assert!((1..=3).contains(&mu));
    let mut out = PhaseFunctional::zero(stats);
    let axis = mu - 1;
    if axis >= lattice.dimension {
        return Ok(out);
    }
    // A single site per axis is a spatially constant field: the derivative
    // vanishes identically. Two sites would degenerate the stencil.
    if lattice.sites_per_axis == 1 {
        return Ok(out);
    }
    if !lattice.supports_central_differences() {
        return Err(CoreError::LatticeTooSmall);
    }
    let fwd = lattice.neighbor(site, axis, 1);
    let bwd = lattice.neighbor(site, axis, -1);
    let half = Q::one() / (crate::scalar::qi(2) * &lattice.dx);
    for b in 0..SPINOR_COMPONENTS {
        let entry = if kind.is_row() {
            gs.gamma[mu][(b, component)].clone()
        } else {
            gs.gamma[mu][(component, b)].clone()
        };
        if entry.is_zero() {
            continue;
        }
        let coeff = entry * cq_re(half.clone());
        out.add_term(coeff.clone(), vec![FieldAtom::new(kind, b, fwd)]);
        out.add_term(-coeff, vec![FieldAtom::new(kind, b, bwd)]);
    }
    Ok(out)
}

/// Sum of the spatial slashed derivatives, mu = 1..3.
pub fn slashed_spatial_derivative(
    stats: Statistics,
    kind: AtomKind,
    component: usize,
    site: usize,
    gs: &GammaSet,
    lattice: &LatticeSpec,
) -> Result<PhaseFunctional> {
    let mut out = PhaseFunctional::zero(stats);
    for mu in 1..=3 {
        out = out.add(&slashed_mu(stats, kind, component, site, mu, gs, lattice)?)?;
    }
    Ok(out)
}

/// Complex field values for numeric evaluation.
#[derive(Debug, Clone, Default)]
pub struct ComplexField {
    values: HashMap<FieldAtom, C64>,
}

impl ComplexField {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, atom: FieldAtom, value: C64) {
        self.values.insert(atom, value);
    }

    pub fn set_spinor(&mut self, kind: AtomKind, site: usize, values: &[C64; 4]) {
        for (c, v) in values.iter().enumerate() {
            self.set(FieldAtom::new(kind, c, site), *v);
        }
    }

    pub fn get(&self, atom: FieldAtom) -> Result<C64> {
        self.values
            .get(&atom)
            .copied()
            .ok_or_else(|| CoreError::MissingAtomValue(atom.to_string()))
    }

    pub fn to_json_records(&self) -> Vec<FieldValueRecord> {
        let mut records: Vec<_> = self
            .values
            .iter()
            .map(|(atom, v)| FieldValueRecord {
                kind: atom.kind,
                component: atom.component,
                site: atom.site,
                value: [v.re, v.im],
            })
            .collect();
        records.sort_by_key(|r| (r.kind, r.site, r.component));
        records
    }

    pub fn from_json_records(records: &[FieldValueRecord]) -> Self {
        let mut cfg = Self::new();
        for r in records {
            cfg.set(
                FieldAtom { kind: r.kind, component: r.component, site: r.site },
                C64::new(r.value[0], r.value[1]),
            );
        }
        cfg
    }
}

/// JSON wire form of one field value: complex numbers as [re, im] pairs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FieldValueRecord {
    pub kind: AtomKind,
    pub component: u8,
    pub site: u32,
    pub value: [f64; 2],
}

/// Exact field values, used where the acceptance checks demand exact
/// numeric equality.
#[derive(Debug, Clone, Default)]
pub struct ExactField {
    values: HashMap<FieldAtom, CQ>,
}

impl ExactField {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, atom: FieldAtom, value: CQ) {
        self.values.insert(atom, value);
    }

    pub fn get(&self, atom: FieldAtom) -> Result<&CQ> {
        self.values
            .get(&atom)
            .ok_or_else(|| CoreError::MissingAtomValue(atom.to_string()))
    }
}

/// Odd-Grassmann field values for the Grassmann tracks.
#[derive(Debug, Clone)]
pub struct GrassmannField {
    pub n_generators: usize,
    values: HashMap<FieldAtom, GrassmannElement>,
}

impl GrassmannField {
    pub fn new(n_generators: usize) -> Self {
        Self { n_generators, values: HashMap::new() }
    }

    pub fn set(&mut self, atom: FieldAtom, value: GrassmannElement) {
        assert_eq!(value.n_generators(), self.n_generators);
        self.values.insert(atom, value);
    }

    pub fn get(&self, atom: FieldAtom) -> Result<&GrassmannElement> {
        self.values
            .get(&atom)
            .ok_or_else(|| CoreError::MissingAtomValue(atom.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::{build_gamma_set, Representation};
    use crate::scalar::{cq, cq_i, cq_int, cq_one, qi, qr};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn atom(kind: AtomKind, c: usize, s: usize) -> FieldAtom {
        FieldAtom::new(kind, c, s)
    }

    #[test]
    fn lattice_geometry() {
        let lat = LatticeSpec::line(8, qr(1, 2));
        assert_eq!(lat.total_sites(), 8);
        assert_eq!(lat.volume(), qr(1, 2));
        assert_eq!(lat.neighbor(0, 0, -1), 7);
        assert_eq!(lat.neighbor(7, 0, 1), 0);
        let lat2 = LatticeSpec::new(2, 4, Q::one());
        assert_eq!(lat2.total_sites(), 16);
        assert_eq!(lat2.volume(), Q::one());
        assert_eq!(lat2.neighbor(0, 1, -1), 12);
    }

    #[test]
    fn kv_config_parsing() {
        let text = "# lattice\nsites = 8\ndx = 0.5\nhbar = 2\nc=3\n";
        let kv = parse_kv_config(text).unwrap();
        let lat = LatticeSpec::from_kv(&kv).unwrap();
        assert_eq!(lat.sites_per_axis, 8);
        assert_eq!(lat.dx, qr(1, 2));
        let consts = crate::scalar::Constants::from_kv(&kv).unwrap();
        assert_eq!(consts.hbar, qi(2));
        assert_eq!(consts.c, qi(3));
        assert_eq!(consts.mass, Q::one());
        assert!(parse_kv_config("nonsense without equals").is_err());
    }

    #[test]
    fn canonical_order_puts_rows_first() {
        let mut f = PhaseFunctional::zero(Statistics::Commuting);
        f.add_term(cq_one(), vec![atom(AtomKind::Psi, 0, 0), atom(AtomKind::PsiBar, 1, 0)]);
        let (atoms, _) = f.terms().next().unwrap();
        assert!(atoms[0].kind.is_row());
        assert!(!atoms[1].kind.is_row());
        assert!(f.is_factor_ordered());
    }

    #[test]
    fn anticommuting_reorder_flips_sign_and_squares_vanish() {
        let a = atom(AtomKind::Psi, 0, 0);
        let b = atom(AtomKind::Psi, 1, 0);
        let mut f = PhaseFunctional::zero(Statistics::Anticommuting);
        f.add_term(cq_one(), vec![b, a]);
        let mut g = PhaseFunctional::zero(Statistics::Anticommuting);
        g.add_term(-cq_one(), vec![a, b]);
        assert_eq!(f, g);
        let mut sq = PhaseFunctional::zero(Statistics::Anticommuting);
        sq.add_term(cq_one(), vec![a, a]);
        assert!(sq.is_zero());
    }

    #[test]
    fn functional_derivative_linear_example() {
        // F = sum_i v pi_a(i) psi_a(i); dF/dpsi_b(j) = pi_b(j).
        let lat = LatticeSpec::line(4, qr(1, 2));
        let v = cq_re(lat.volume());
        let mut f = PhaseFunctional::zero(Statistics::Commuting);
        for site in 0..4 {
            for comp in 0..4 {
                f.add_term(v.clone(), vec![atom(AtomKind::Pi, comp, site), atom(AtomKind::Psi, comp, site)]);
            }
        }
        let d = f
            .functional_derivative(atom(AtomKind::Psi, 2, 3), DerivSide::Plain, &lat)
            .unwrap();
        assert_eq!(d, PhaseFunctional::atom(Statistics::Commuting, atom(AtomKind::Pi, 2, 3)));
    }

    #[test]
    fn functional_derivative_delta_normalization() {
        // F a single atom: dF/dchi = 1/v, and v * sum_j delta_ij/v = 1.
        let lat = LatticeSpec::line(5, qr(2, 1));
        let f = PhaseFunctional::atom(Statistics::Commuting, atom(AtomKind::Psi, 0, 2));
        let d = f
            .functional_derivative(atom(AtomKind::Psi, 0, 2), DerivSide::Plain, &lat)
            .unwrap();
        assert_eq!(d.constant_part(), cq_re(Q::one() / lat.volume()));
        let mut total = CQ::zero();
        for j in 0..5 {
            let dj = f
                .functional_derivative(atom(AtomKind::Psi, 0, j), DerivSide::Plain, &lat)
                .unwrap();
            total = total + cq_re(lat.volume()) * dj.constant_part();
        }
        assert_eq!(total, cq_one());
    }

    #[test]
    fn derivative_drops_degree_and_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lat = LatticeSpec::line(4, Q::one());
        for _ in 0..20 {
            let mut f = PhaseFunctional::zero(Statistics::Commuting);
            for _ in 0..4 {
                let row = atom(AtomKind::PsiBar, rng.gen_range(0..4), rng.gen_range(0..4));
                let col = atom(AtomKind::Psi, rng.gen_range(0..4), rng.gen_range(0..4));
                f.add_term(cq(qi(rng.gen_range(-3..=3)), qi(rng.gen_range(-3..=3))), vec![row, col]);
            }
            let target = atom(AtomKind::Psi, 1, 1);
            let d = f.functional_derivative(target, DerivSide::Plain, &lat).unwrap();
            assert!(d.degree() <= 1);
            let g = f.scale(&cq_int(3));
            let dg = g.functional_derivative(target, DerivSide::Plain, &lat).unwrap();
            assert_eq!(dg, d.scale(&cq_int(3)));
        }
    }

    #[test]
    fn grassmann_sided_derivatives_via_positions() {
        let a = atom(AtomKind::PsiBar, 0, 0);
        let b = atom(AtomKind::Psi, 0, 0);
        let lat = LatticeSpec::line(3, Q::one());
        let f = PhaseFunctional::monomial(Statistics::Anticommuting, cq_one(), vec![a, b]);
        // Left derivative w.r.t. the second atom picks up one transposition.
        let db = f.functional_derivative(b, DerivSide::Left, &lat).unwrap();
        assert_eq!(db, PhaseFunctional::atom(Statistics::Anticommuting, a).scale(&-cq_one()));
        let db_r = f.functional_derivative(b, DerivSide::Right, &lat).unwrap();
        assert_eq!(db_r, PhaseFunctional::atom(Statistics::Anticommuting, a));
        // Plain side rejected on anticommuting functionals and vice versa.
        assert!(f.functional_derivative(b, DerivSide::Plain, &lat).is_err());
        let g = PhaseFunctional::atom(Statistics::Commuting, a);
        assert!(g.functional_derivative(a, DerivSide::Left, &lat).is_err());
    }

    #[test]
    fn evaluation_examples() {
        let lat = LatticeSpec::line(3, Q::one());
        let _ = lat;
        let f = PhaseFunctional::constant(Statistics::Commuting, cq_int(3));
        assert_eq!(f.evaluate_complex(&ComplexField::new()).unwrap(), C64::new(3.0, 0.0));

        let pb = atom(AtomKind::PsiBar, 0, 0);
        let ps = atom(AtomKind::Psi, 0, 0);
        let bilinear = PhaseFunctional::monomial(Statistics::Commuting, cq_one(), vec![pb, ps]);
        let mut cfg = ComplexField::new();
        cfg.set(pb, C64::new(2.0, 0.0));
        cfg.set(ps, C64::new(0.0, 1.0));
        assert_eq!(bilinear.evaluate_complex(&cfg).unwrap(), C64::new(0.0, 2.0));
        // Missing atom reported by name.
        let missing = PhaseFunctional::atom(Statistics::Commuting, atom(AtomKind::Pi, 3, 2));
        assert!(matches!(missing.evaluate_complex(&cfg), Err(CoreError::MissingAtomValue(_))));

        // Grassmann substitution: psi_0(0) psi_1(0) -> xi1 xi2.
        let f = PhaseFunctional::monomial(
            Statistics::Anticommuting,
            cq_one(),
            vec![atom(AtomKind::Psi, 0, 0), atom(AtomKind::Psi, 1, 0)],
        );
        let mut gcfg = GrassmannField::new(4);
        gcfg.set(atom(AtomKind::Psi, 0, 0), GrassmannElement::generator(4, 0).unwrap());
        gcfg.set(atom(AtomKind::Psi, 1, 0), GrassmannElement::generator(4, 1).unwrap());
        let value = f.evaluate_grassmann(&gcfg).unwrap();
        let expect = GrassmannElement::monomial(4, &[0, 1], cq_one()).unwrap();
        assert_eq!(value, expect);
    }

    #[test]
    fn slashed_derivative_constant_field_vanishes() {
        let gs = build_gamma_set(Representation::Dirac);
        let lat = LatticeSpec::line(6, Q::one());
        let mut cfg = ComplexField::new();
        for site in 0..6 {
            cfg.set_spinor(AtomKind::Psi, site, &[C64::new(0.3, -0.1); 4]);
        }
        for comp in 0..4 {
            let f = slashed_spatial_derivative(Statistics::Commuting, AtomKind::Psi, comp, 2, &gs, &lat)
                .unwrap();
            let value = f.evaluate_complex(&cfg).unwrap();
            assert!(value.norm() < 1e-15);
        }
    }

    #[test]
    fn slashed_derivative_plane_wave_eigenvalue() {
        // Discrete Fourier oracle: central difference of e^{ikx} has
        // eigenvalue i sin(k dx)/dx; the slashed derivative applies gamma^1.
        let gs = build_gamma_set(Representation::Dirac);
        let n = 32usize;
        let lat = LatticeSpec::line(n, Q::one());
        let k = 2.0 * std::f64::consts::PI * 2.0 / n as f64;
        let u = [C64::new(0.6, 0.1), C64::new(-0.2, 0.4), C64::new(0.3, 0.0), C64::new(0.0, -0.5)];
        let mut cfg = ComplexField::new();
        for site in 0..n {
            let phase = C64::from_polar(1.0, k * site as f64);
            let mut vals = [C64::zero(); 4];
            for c in 0..4 {
                vals[c] = u[c] * phase;
            }
            cfg.set_spinor(AtomKind::Psi, site, &vals);
            let mut bar = [C64::zero(); 4];
            // psibar = psi^dag gamma^0 evaluated numerically.
            let g0 = gs.gamma_f64(0);
            for b in 0..4 {
                for a in 0..4 {
                    bar[b] += (u[a] * phase).conj() * g0[(a, b)];
                }
            }
            cfg.set_spinor(AtomKind::PsiBar, site, &bar);
        }
        let eig = C64::new(0.0, k.sin());
        let g1 = gs.gamma_f64(1);
        let site = 5usize;
        let phase = C64::from_polar(1.0, k * site as f64);
        for comp in 0..4 {
            let f = slashed_spatial_derivative(Statistics::Commuting, AtomKind::Psi, comp, site, &gs, &lat)
                .unwrap();
            let value = f.evaluate_complex(&cfg).unwrap();
            let mut expect = C64::zero();
            for b in 0..4 {
                expect += g1[(comp, b)] * u[b];
            }
            expect *= eig * phase;
            assert!((value - expect).norm() < 1e-12, "component {comp}");
        }
        // Adjoint side: conjugate eigenvalue, gamma on the right.
        for comp in 0..4 {
            let f = slashed_spatial_derivative(
                Statistics::Commuting,
                AtomKind::PsiBar,
                comp,
                site,
                &gs,
                &lat,
            )
            .unwrap();
            let value = f.evaluate_complex(&cfg).unwrap();
            let mut bar = [C64::zero(); 4];
            let g0 = gs.gamma_f64(0);
            for b in 0..4 {
                for a in 0..4 {
                    bar[b] += (u[a] * phase).conj() * g0[(a, b)];
                }
            }
            let mut expect = C64::zero();
            for b in 0..4 {
                expect += bar[b] * g1[(b, comp)];
            }
            expect *= eig.conj();
            assert!((value - expect).norm() < 1e-12, "adjoint component {comp}");
        }
    }

    #[test]
    fn slashed_mu_out_of_lattice_dimension_is_zero() {
        let gs = build_gamma_set(Representation::Dirac);
        let lat = LatticeSpec::line(8, Q::one());
        let f = slashed_mu(Statistics::Commuting, AtomKind::Psi, 0, 3, 2, &gs, &lat).unwrap();
        assert!(f.is_zero());
        let tiny = LatticeSpec::line(2, Q::one());
        assert!(matches!(
            slashed_mu(Statistics::Commuting, AtomKind::Psi, 0, 0, 1, &gs, &tiny),
            Err(CoreError::LatticeTooSmall)
        ));
    }

    #[test]
    fn substitution_is_linear_and_sign_aware() {
        // psi -> psi1 + psi2 on an anticommuting bilinear.
        let lat = LatticeSpec::line(3, Q::one());
        let _ = lat;
        let mut map = LinearAtomMap::new();
        map.set(AtomKind::Psi, vec![(cq_one(), AtomKind::Psi1), (cq_one(), AtomKind::Psi2)]);
        let f = PhaseFunctional::monomial(
            Statistics::Anticommuting,
            cq_i(),
            vec![atom(AtomKind::Pi, 0, 1), atom(AtomKind::Psi, 0, 1)],
        );
        let g = f.substitute(&map);
        assert_eq!(g.n_terms(), 2);
        for (atoms, coeff) in g.terms() {
            assert_eq!(atoms[0].kind, AtomKind::Pi);
            assert!(matches!(atoms[1].kind, AtomKind::Psi1 | AtomKind::Psi2));
            assert_eq!(*coeff, cq_i());
        }
    }

    #[test]
    fn numeric_perturbation_matches_functional_derivative() {
        // Oracle: central finite-difference perturbation of the bilinear
        // Hermitian Hamiltonian on a 4-site line, at epsilon = 1e-6.
        let gs = build_gamma_set(Representation::Dirac);
        let lat = LatticeSpec::line(4, Q::one());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = crate::bergmann::build_hamiltonian(
            crate::bergmann::FormalismTrack::SpinorialFO,
            crate::bergmann::HamiltonianKind::MomentumForm,
            &lat,
            &gs,
            &crate::scalar::Constants::default(),
        )
        .unwrap();
        let mut cfg = ComplexField::new();
        for site in 0..4 {
            for comp in 0..4 {
                for kind in [AtomKind::Psi, AtomKind::PsiBar, AtomKind::Pi, AtomKind::PiBar] {
                    cfg.set(
                        atom(kind, comp, site),
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    );
                }
            }
        }
        for target in [
            atom(AtomKind::Psi, 1, 2),
            atom(AtomKind::PsiBar, 3, 0),
            atom(AtomKind::Pi, 0, 3),
            atom(AtomKind::PiBar, 2, 1),
        ] {
            let symbolic = f
                .functional_derivative(target, DerivSide::Plain, &lat)
                .unwrap()
                .evaluate_complex(&cfg)
                .unwrap();
            let eps = 1e-6;
            let mut plus = cfg.clone();
            plus.set(target, cfg.get(target).unwrap() + C64::new(eps, 0.0));
            let mut minus = cfg.clone();
            minus.set(target, cfg.get(target).unwrap() - C64::new(eps, 0.0));
            let numeric = (f.evaluate_complex(&plus).unwrap()
                - f.evaluate_complex(&minus).unwrap())
                / C64::new(2.0 * eps, 0.0);
            // functional derivative = (1/v) partial; v = 1 here.
            assert!((symbolic - numeric).norm() < 1e-9, "atom {target}");
        }
    }

    #[test]
    fn field_config_json_round_trip() {
        let mut cfg = ComplexField::new();
        cfg.set(atom(AtomKind::Psi, 0, 1), C64::new(0.5, -1.5));
        cfg.set(atom(AtomKind::Pi, 3, 0), C64::new(-2.0, 0.25));
        let records = cfg.to_json_records();
        let text = serde_json::to_string(&records).unwrap();
        let parsed: Vec<FieldValueRecord> = serde_json::from_str(&text).unwrap();
        let back = ComplexField::from_json_records(&parsed);
        assert_eq!(back.get(atom(AtomKind::Psi, 0, 1)).unwrap(), C64::new(0.5, -1.5));
        assert_eq!(back.get(atom(AtomKind::Pi, 3, 0)).unwrap(), C64::new(-2.0, 0.25));
    }
}
