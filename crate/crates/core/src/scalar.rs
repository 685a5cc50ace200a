//! Exact Gaussian-rational scalars and the physical constants.
//!
//! All symbolic layers (gamma algebra, Grassmann calculus, phase-space
//! functionals, brackets, Fock operators) work over `CQ`, a complex number
//! with `BigRational` parts. Floating point enters only where values are
//! genuinely transcendental (time evolution, rotation angles).

use num::{BigInt, BigRational, Complex, One, Signed, Zero};

use crate::error::{CoreError, Result};

pub type Q = BigRational;
pub type CQ = Complex<Q>;
pub type C64 = Complex<f64>;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn cq_zero() -> CQ {
    CQ::new(Q::zero(), Q::zero())
}

pub fn cq_one() -> CQ {
    CQ::new(Q::one(), Q::zero())
}

/// The imaginary unit.
pub fn cq_i() -> CQ {
    CQ::new(Q::zero(), Q::one())
}

pub fn cq_int(n: i64) -> CQ {
    CQ::new(qi(n), Q::zero())
}

pub fn cq(re: Q, im: Q) -> CQ {
    CQ::new(re, im)
}

pub fn cq_re(re: Q) -> CQ {
    CQ::new(re, Q::zero())
}

pub fn to_c64(z: &CQ) -> C64 {
    C64::new(q_to_f64(&z.re), q_to_f64(&z.im))
}

pub fn q_to_f64(q: &Q) -> f64 {
    let num = q.numer();
    let den = q.denom();
    // Exact for desk-scale rationals; falls back to a quotient of
    // approximations when the integers exceed f64 range.
    bigint_to_f64(num) / bigint_to_f64(den)
}

fn bigint_to_f64(n: &BigInt) -> f64 {
    use num::ToPrimitive;
    n.to_f64().unwrap_or(f64::INFINITY)
}

/// |re| + |im|, as f64, for residual reporting.
pub fn cq_abs1(z: &CQ) -> f64 {
    q_to_f64(&z.re.abs()) + q_to_f64(&z.im.abs())
}

/// Renders a rational-complex number the way the reports expect,
/// e.g. `1/2`, `-3/4i`, `1+1/2i`.
pub fn fmt_cq(z: &CQ) -> String {
    if z.im.is_zero() {
        return format!("{}", z.re);
    }
    if z.re.is_zero() {
        return format!("{}i", z.im);
    }
    if z.im.is_negative() {
        format!("{}{}i", z.re, z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Parses `3`, `-1/2` or a finite decimal such as `0.05` into an exact
/// rational.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = |m: &str| CoreError::ConfigParse(format!("{m}: `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| bad("bad denominator"))?;
        if d.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let sign = if int.trim_start().starts_with('-') { -1 } else { 1 };
        let int: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad("bad integer part"))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("bad fractional part"));
        }
        let digits: BigInt = frac.parse().map_err(|_| bad("bad fractional part"))?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(Q::from_integer(int) + Q::new(digits * sign, den));
    }
    let n: BigInt = s.parse().map_err(|_| bad("bad rational"))?;
    Ok(Q::from_integer(n))
}

/// Physical constants entering the bracket coefficients. Kept exact so the
/// coefficient-level identities can be asserted at `hbar = c = 1` as well as
/// at deliberately awkward values such as `hbar = 2, c = 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constants {
    pub hbar: Q,
    pub c: Q,
    pub mass: Q,
}

impl Default for Constants {
    fn default() -> Self {
        Self { hbar: Q::one(), c: Q::one(), mass: Q::one() }
    }
}

impl Constants {
    pub fn new(hbar: Q, c: Q, mass: Q) -> Self {
        assert!(hbar.is_positive() && c.is_positive() && !mass.is_negative());
        Self { hbar, c, mass }
    }

    /// ħc as an exact scalar.
    pub fn hbar_c(&self) -> Q {
        &self.hbar * &self.c
    }

    /// iħc/2, the coefficient carried by the momenta and constraints.
    pub fn i_hbar_c_half(&self) -> CQ {
        cq(Q::zero(), self.hbar_c() / qi(2))
    }

    /// i/(ħc).
    pub fn i_over_hbar_c(&self) -> CQ {
        cq(Q::zero(), Q::one() / self.hbar_c())
    }

    /// imc/ħ, the mass coefficient of the momentum-form Hamiltonians.
    pub fn i_m_c_over_hbar(&self) -> CQ {
        cq(Q::zero(), &self.mass * &self.c / &self.hbar)
    }

    /// mc².
    pub fn m_c2(&self) -> Q {
        &self.mass * &self.c * &self.c
    }

    pub fn hbar_f64(&self) -> f64 {
        q_to_f64(&self.hbar)
    }

    pub fn c_f64(&self) -> f64 {
        q_to_f64(&self.c)
    }

    pub fn mass_f64(&self) -> f64 {
        q_to_f64(&self.mass)
    }
}
