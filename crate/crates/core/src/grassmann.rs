//! Finite Grassmann algebra over up to 16 anticommuting generators.
//!
//! Elements are sparse maps from a generator-subset bitmask to an exact
//! complex coefficient. Generators satisfy xi^i xi^j = -xi^j xi^i, so a
//! monomial never repeats a generator and the bitmask encoding is lossless.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::scalar::{cq, cq_one, fmt_cq, parse_q, CQ};

pub const MAX_GENERATORS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// A multivector over `n_generators` anticommuting generators.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannElement {
    n_generators: usize,
    /// bitmask -> coefficient; zero coefficients are never stored.
    coefficients: BTreeMap<u32, CQ>,
}

/// Sign of merging two disjoint ordered monomials: (-1)^(number of
/// transpositions needed to interleave `b`'s generators into `a`).
fn merge_sign(a: u32, b: u32) -> i32 {
    let mut swaps = 0u32;
    let mut bits = b;
    while bits != 0 {
        let j = bits.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        bits &= bits - 1;
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

impl GrassmannElement {
    pub fn zero(n_generators: usize) -> Result<Self> {
        if n_generators > MAX_GENERATORS {
            return Err(CoreError::TooManyGenerators(n_generators));
        }
        Ok(Self { n_generators, coefficients: BTreeMap::new() })
    }

    pub fn scalar(n_generators: usize, value: CQ) -> Result<Self> {
        let mut e = Self::zero(n_generators)?;
        e.insert(0, value);
        Ok(e)
    }

    /// The generator xi^index (zero-based).
    pub fn generator(n_generators: usize, index: usize) -> Result<Self> {
        if index >= n_generators {
            return Err(CoreError::GeneratorOutOfRange { index, n_generators });
        }
        let mut e = Self::zero(n_generators)?;
        e.insert(1 << index, cq_one());
        Ok(e)
    }

    /// A monomial from an explicit generator sequence, tracking the sign of
    /// sorting it into canonical ascending order. Repeated generators give 0.
    pub fn monomial(n_generators: usize, generators: &[usize], coeff: CQ) -> Result<Self> {
        let mut e = Self::scalar(n_generators, coeff)?;
        for &g in generators {
            let gen = Self::generator(n_generators, g)?;
            e = e.product(&gen)?;
        }
        Ok(e)
    }

    pub fn n_generators(&self) -> usize {
        self.n_generators
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u32, &CQ)> {
        self.coefficients.iter()
    }

    pub fn coefficient(&self, mask: u32) -> CQ {
        self.coefficients.get(&mask).cloned().unwrap_or_else(CQ::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    fn insert(&mut self, mask: u32, value: CQ) {
        if value.is_zero() {
            return;
        }
        match self.coefficients.get_mut(&mask) {
            Some(c) => {
                *c = c.clone() + value;
                if c.is_zero() {
                    self.coefficients.remove(&mask);
                }
            }
            None => {
                self.coefficients.insert(mask, value);
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n_generators != other.n_generators {
            return Err(CoreError::IncompatibleAlgebras(self.n_generators, other.n_generators));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (mask, coeff) in other.terms() {
            out.insert(*mask, coeff.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-cq_one()))
    }

    pub fn scale(&self, s: &CQ) -> Self {
        let mut out = Self { n_generators: self.n_generators, coefficients: BTreeMap::new() };
        for (mask, coeff) in self.terms() {
            out.insert(*mask, coeff.clone() * s.clone());
        }
        out
    }

    /// Exterior product. Monomials with intersecting generator sets vanish;
    /// otherwise the coefficient picks up the interleaving sign.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.n_generators)?;
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                if ma & mb != 0 {
                    continue;
                }
                let sign = merge_sign(*ma, *mb);
                let coeff = ca.clone() * cb.clone() * crate::scalar::cq_int(sign as i64);
                out.insert(ma | mb, coeff);
            }
        }
        Ok(out)
    }

    /// Left derivative: anticommute xi^index to the front of each monomial
    /// and delete it.
    pub fn left_derivative(&self, index: usize) -> Result<Self> {
        if index >= self.n_generators {
            return Err(CoreError::GeneratorOutOfRange { index, n_generators: self.n_generators });
        }
        let bit = 1u32 << index;
        let mut out = Self::zero(self.n_generators)?;
        for (mask, coeff) in self.terms() {
            if mask & bit == 0 {
                continue;
            }
            let below = (mask & (bit - 1)).count_ones();
            let sign = if below % 2 == 0 { 1 } else { -1 };
            out.insert(mask & !bit, coeff.clone() * crate::scalar::cq_int(sign));
        }
        Ok(out)
    }

    /// Right derivative: anticommute xi^index to the back of each monomial
    /// and delete it.
    pub fn right_derivative(&self, index: usize) -> Result<Self> {
        if index >= self.n_generators {
            return Err(CoreError::GeneratorOutOfRange { index, n_generators: self.n_generators });
        }
        let bit = 1u32 << index;
        let mut out = Self::zero(self.n_generators)?;
        for (mask, coeff) in self.terms() {
            if mask & bit == 0 {
                continue;
            }
            let above = (mask >> (index + 1)).count_ones();
            let sign = if above % 2 == 0 { 1 } else { -1 };
            out.insert(mask & !bit, coeff.clone() * crate::scalar::cq_int(sign));
        }
        Ok(out)
    }

    /// Parity grading; the zero element reports even.
    pub fn parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for mask in self.coefficients.keys() {
            if mask.count_ones() % 2 == 0 {
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
}

impl GrassmannElement {
    /// Largest |re|+|im| coefficient, for residual reporting.
    pub fn max_coeff_abs(&self) -> f64 {
        self.coefficients.values().map(crate::scalar::cq_abs1).fold(0.0, f64::max)
    }
}

/// Seeded random element of definite parity with small integer
/// coefficients; the workhorse of the identity suites.
pub fn random_element(
    rng: &mut rand_chacha::ChaCha8Rng,
    n_generators: usize,
    parity: Parity,
) -> GrassmannElement {
    use rand::Rng;
    let mut e = GrassmannElement::zero(n_generators).unwrap();
    for _ in 0..rng.gen_range(1..6) {
        let mask = loop {
            let m = rng.gen_range(0..(1u32 << n_generators));
            let even = m.count_ones() % 2 == 0;
            match parity {
                Parity::Even if even => break m,
                Parity::Odd if !even => break m,
                Parity::Mixed => break m,
                _ => continue,
            }
        };
        let coeff = cq(crate::scalar::qi(rng.gen_range(-3..=3)), crate::scalar::qi(rng.gen_range(-3..=3)));
        e.insert(mask, coeff);
    }
    e
}

/// The Grassmann-calculus identity suite: the worked derivative examples,
/// the left/right derivative relation, both Leibniz rules, graded
/// commutativity, associativity and the even-commutes property, each on
/// `elements` random homogeneous elements over up to `n_max` generators.
pub fn run_grassmann_suite(
    seed: u64,
    elements: usize,
    n_max: usize,
) -> crate::error::Result<Vec<crate::report::CheckRecord>> {
    use crate::report::CheckRecord;
    use crate::scalar::cq_int;
    use rand::{Rng, SeedableRng};
    let suite = "grassmann";
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // Worked examples on xi1 xi2, plus nilpotency and the anticommutation
    // of two generators.
    let n = 4;
    let xi = |i: usize| GrassmannElement::generator(n, i).unwrap();
    let x12 = xi(0).product(&xi(1))?;
    let mut residual = x12.left_derivative(0)?.sub(&xi(1))?.max_coeff_abs();
    residual = residual.max(x12.left_derivative(1)?.add(&xi(0))?.max_coeff_abs());
    residual = residual.max(x12.right_derivative(0)?.add(&xi(1))?.max_coeff_abs());
    residual = residual.max(x12.right_derivative(1)?.sub(&xi(0))?.max_coeff_abs());
    checks.push(CheckRecord::exact(
        suite,
        "derivative_examples",
        "left and right derivatives of xi1 xi2".into(),
        residual,
    ));
    let anti = xi(0).product(&xi(1))?.add(&xi(1).product(&xi(0))?)?;
    let nil = xi(0).product(&xi(0))?;
    checks.push(CheckRecord::exact(
        suite,
        "generator_anticommutation",
        "xi_i xi_j = -xi_j xi_i and xi_i^2 = 0".into(),
        anti.max_coeff_abs() + nil.max_coeff_abs(),
    ));

    let mut worst_rl = 0.0f64;
    let mut worst_left = 0.0f64;
    let mut worst_right = 0.0f64;
    let mut worst_graded = 0.0f64;
    let mut worst_assoc = 0.0f64;
    let mut worst_even = 0.0f64;
    let mut prev: Option<(GrassmannElement, Parity)> = None;
    let mut prev2: Option<GrassmannElement> = None;
    for k in 0..elements {
        let n = rng.gen_range(2..=n_max.min(MAX_GENERATORS));
        let parity = if k % 2 == 0 { Parity::Odd } else { Parity::Even };
        let f = random_element(&mut rng, n, parity);
        let sf = if parity == Parity::Odd { -1 } else { 1 };
        for i in 0..n {
            // dL F = (-1)^{1 + eps_F} dR F.
            let rl = f
                .left_derivative(i)?
                .sub(&f.right_derivative(i)?.scale(&cq_int(-sf)))?;
            worst_rl = worst_rl.max(rl.max_coeff_abs());
        }
        if let Some((g, pg)) = &prev {
            if g.n_generators() == f.n_generators() {
                let sg = if *pg == Parity::Odd { -1 } else { 1 };
                let fg = f.product(g)?;
                for i in 0..n {
                    let left = fg.left_derivative(i)?.sub(
                        &f.left_derivative(i)?
                            .product(g)?
                            .add(&f.product(&g.left_derivative(i)?)?.scale(&cq_int(sf)))?,
                    )?;
                    worst_left = worst_left.max(left.max_coeff_abs());
                    let right = fg.right_derivative(i)?.sub(
                        &f.product(&g.right_derivative(i)?)?
                            .add(&f.right_derivative(i)?.product(g)?.scale(&cq_int(sg)))?,
                    )?;
                    worst_right = worst_right.max(right.max_coeff_abs());
                }
                let sign = if sf == -1 && sg == -1 { -1 } else { 1 };
                let graded = fg.sub(&g.product(&f)?.scale(&cq_int(sign)))?;
                worst_graded = worst_graded.max(graded.max_coeff_abs());
                if parity == Parity::Even {
                    worst_even =
                        worst_even.max(f.product(g)?.sub(&g.product(&f)?)?.max_coeff_abs());
                }
                if let Some(h) = &prev2 {
                    if h.n_generators() == f.n_generators() {
                        let assoc = f
                            .product(g)?
                            .product(h)?
                            .sub(&f.product(&g.product(h)?)?)?;
                        worst_assoc = worst_assoc.max(assoc.max_coeff_abs());
                    }
                }
            }
        }
        prev2 = prev.take().map(|(g, _)| g);
        prev = Some((f, parity));
    }
    checks.push(CheckRecord::exact(
        suite,
        "left_right_relation",
        format!("{elements} random homogeneous elements"),
        worst_rl,
    ));
    checks.push(CheckRecord::exact(suite, "left_leibniz", "product rule, left derivatives".into(), worst_left));
    checks.push(CheckRecord::exact(suite, "right_leibniz", "product rule, right derivatives".into(), worst_right));
    checks.push(CheckRecord::exact(suite, "graded_commutativity", "FG = (-1)^(eps_F eps_G) GF".into(), worst_graded));
    checks.push(CheckRecord::exact(suite, "associativity", "(FG)H = F(GH)".into(), worst_assoc));
    checks.push(CheckRecord::exact(suite, "even_commutes", "even elements commute".into(), worst_even));
    Ok(checks)
}

/// Text form: one signed term per line, `coefficient xi1^xi3`, with the
/// scalar monomial rendered as `1`. Round-trips through `FromStr`.
impl fmt::Display for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return writeln!(f, "0 over {}", self.n_generators);
        }
        for (mask, coeff) in self.terms() {
            let monomial = if *mask == 0 {
                "1".to_string()
            } else {
                (0..self.n_generators)
                    .filter(|g| mask & (1 << g) != 0)
                    .map(|g| format!("xi{}", g + 1))
                    .collect::<Vec<_>>()
                    .join("^")
            };
            writeln!(f, "({}) {} over {}", fmt_cq(coeff), monomial, self.n_generators)?;
        }
        Ok(())
    }
}

impl FromStr for GrassmannElement {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| CoreError::ConfigParse(m);
        let mut out: Option<GrassmannElement> = None;
        for line in s.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (body, n) = line
                .rsplit_once(" over ")
                .ok_or_else(|| bad(format!("missing `over N` in `{line}`")))?;
            let n: usize =
                n.trim().parse().map_err(|_| bad(format!("bad generator count `{n}`")))?;
            let mut element = out.unwrap_or(GrassmannElement::zero(n)?);
            if element.n_generators != n {
                return Err(CoreError::IncompatibleAlgebras(element.n_generators, n));
            }
            if body.trim() == "0" {
                out = Some(element);
                continue;
            }
            let body = body.trim();
            let (coeff_str, monomial) = if let Some(rest) = body.strip_prefix('(') {
                let (c, m) =
                    rest.split_once(')').ok_or_else(|| bad(format!("unclosed coefficient in `{line}`")))?;
                (c.trim(), m.trim())
            } else {
                return Err(bad(format!("expected `(coeff) monomial` in `{line}`")));
            };
            let coeff = parse_cq(coeff_str)?;
            let mut mask = 0u32;
            if monomial != "1" {
                for part in monomial.split('^') {
                    let g: usize = part
                        .trim()
                        .strip_prefix("xi")
                        .and_then(|d| d.parse().ok())
                        .ok_or_else(|| bad(format!("bad generator `{part}`")))?;
                    if g == 0 || g > n {
                        return Err(CoreError::GeneratorOutOfRange { index: g, n_generators: n });
                    }
                    mask |= 1 << (g - 1);
                }
            }
            element.insert(mask, coeff);
            out = Some(element);
        }
        out.ok_or_else(|| bad("empty element text".to_string()))
    }
}

/// Parses `a`, `bi` or `a+bi` / `a-bi` with rational a, b.
fn parse_cq(s: &str) -> Result<CQ> {
    let s = s.trim();
    if let Some(im) = s.strip_suffix('i') {
        // Split at the last +/- that is not the leading sign.
        let bytes = im.as_bytes();
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && bytes[k - 1] != b'/' {
                let re = parse_q(&im[..k])?;
                let sign = if bytes[k] == b'-' { "-" } else { "" };
                let imag = parse_q(&format!("{}{}", sign, &im[k + 1..]))?;
                return Ok(cq(re, imag));
            }
        }
        return Ok(cq(num::BigRational::zero(), parse_q(im)?));
    }
    Ok(cq(parse_q(s)?, num::BigRational::zero()))
}
