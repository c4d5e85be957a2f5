//! Sparse multivariate polynomials over ℚ and gcd-free rational functions.
//!
//! This is the normalization layer behind every "symbolic" equality decision:
//! a scalar expression canonicalizes to `num/den` with both sides sparse
//! polynomials, and it is zero iff `num` is the zero polynomial. No
//! multivariate gcd is ever needed for that decision; a cheap exact-division
//! pass keeps the common denominator towers (powers of `det y`) collapsed.

use crate::rational::Rational;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// A monomial: sorted `(variable id, exponent > 0)` pairs.
/// Ordered by total degree, then lexicographically (graded lex).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Mono(Vec<(u32, u32)>);

impl Mono {
    pub fn one() -> Mono {
        Mono(Vec::new())
    }

    pub fn var(v: u32) -> Mono {
        Mono(vec![(v, 1)])
    }

    pub fn from_pairs(mut pairs: Vec<(u32, u32)>) -> Mono {
        pairs.retain(|&(_, e)| e > 0);
        pairs.sort_unstable_by_key(|&(v, _)| v);
        debug_assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0));
        Mono(pairs)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(va, ea)), Some(&&(vb, eb))) => match va.cmp(&vb) {
                    Ordering::Less => {
                        out.push((va, ea));
                        a.next();
                    }
                    Ordering::Greater => {
                        out.push((vb, eb));
                        b.next();
                    }
                    Ordering::Equal => {
                        out.push((va, ea + eb));
                        a.next();
                        b.next();
                    }
                },
                (Some(_), None) => {
                    out.extend(a.by_ref().copied());
                    break;
                }
                (None, Some(_)) => {
                    out.extend(b.by_ref().copied());
                    break;
                }
                (None, None) => break,
            }
        }
        Mono(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut b = other.0.iter().peekable();
        for &(v, e) in &self.0 {
            match b.peek() {
                Some(&&(vb, eb)) if vb == v => {
                    if eb > e {
                        return None;
                    }
                    if e - eb > 0 {
                        out.push((v, e - eb));
                    }
                    b.next();
                }
                Some(&&(vb, _)) if vb < v => return None,
                _ => out.push((v, e)),
            }
        }
        if b.next().is_some() {
            return None;
        }
        Some(Mono(out))
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        // lexicographic with earlier (smaller id) variables weighing more:
        // compare exponent sequences over the merged variable set
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(va, ea)), Some(&&(vb, eb))) => {
                    if va < vb {
                        return Ordering::Greater; // self has the earlier var
                    }
                    if vb < va {
                        return Ordering::Less;
                    }
                    match ea.cmp(&eb) {
                        Ordering::Equal => {
                            a.next();
                            b.next();
                        }
                        ord => return ord,
                    }
                }
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (None, None) => return Ordering::Equal,
            }
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let mut first = true;
        for &(v, e) in &self.0 {
            if !first {
                f.write_str("*")?;
            }
            first = false;
            let name = crate::coords::JetCoordinate::from_var_id(v)
                .map(|c| c.name())
                .unwrap_or_else(|| format!("t{v}"));
            if e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse polynomial with rational coefficients; zero coefficients never stored.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, Rational>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rational) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::one(), c);
        }
        Poly { terms }
    }

    pub fn one() -> Poly {
        Poly::constant(Rational::one())
    }

    pub fn var(v: u32) -> Poly {
        let mut terms = BTreeMap::new();
        terms.insert(Mono::var(v), Rational::one());
        Poly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Mono, Rational)>>(iter: I) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Mono::one())
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.terms.is_empty() {
            return Some(Rational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Mono::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    pub fn leading(&self) -> Option<(&Mono, &Rational)> {
        self.terms.iter().next_back()
    }

    /// Exact division: `Some(q)` with `self = q * d`, or `None`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&(Rational::one() / c)));
        }
        let (dm, dc) = d.leading().expect("nonzero divisor");
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading() {
            let m = rm.div(dm)?;
            let c = rc / dc;
            // quot += c*m ; rem -= (c*m) * d
            let t = Poly::from_terms([(m, c)]);
            rem = rem.sub(&t.mul(d));
            quot = quot.add(&t);
        }
        Some(quot)
    }

    pub fn partial(&self, v: u32) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for &(mv, me) in m.pairs() {
                if mv == v {
                    let mut pairs = m.pairs().to_vec();
                    for p in pairs.iter_mut() {
                        if p.0 == v {
                            p.1 -= 1;
                        }
                    }
                    out.add_term(
                        Mono::from_pairs(pairs),
                        c * Rational::from_integer(me.into()),
                    );
                }
            }
        }
        out
    }

    pub fn eval<F: Fn(u32) -> Rational>(&self, assign: &F) -> Rational {
        let mut out = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for &(var, e) in m.pairs() {
                let x = assign(var);
                for _ in 0..e {
                    v *= x.clone();
                }
            }
            out += v;
        }
        out
    }

    /// Substitutes each variable by a polynomial (identity where absent).
    pub fn compose(&self, images: &BTreeMap<u32, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for &(var, e) in m.pairs() {
                let img = images
                    .get(&var)
                    .cloned()
                    .unwrap_or_else(|| Poly::var(var));
                term = term.mul(&img.pow(e));
            }
            out = out.add(&term);
        }
        out
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn free_vars(&self) -> Vec<u32> {
        let mut vars: Vec<u32> = self
            .terms
            .keys()
            .flat_map(|m| m.pairs().iter().map(|&(v, _)| v))
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // canonical order: descending graded lex
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if first {
                first = false;
                if m.is_one() {
                    write!(f, "{c}")?;
                } else if c.is_one() {
                    write!(f, "{m}")?;
                } else if *c == -Rational::one() {
                    write!(f, "-{m}")?;
                } else {
                    write!(f, "{c}*{m}")?;
                }
            } else {
                let (sign, mag) = if c < &Rational::zero() {
                    ("-", -c.clone())
                } else {
                    ("+", c.clone())
                };
                if m.is_one() {
                    write!(f, " {sign} {mag}")?;
                } else if mag.is_one() {
                    write!(f, " {sign} {m}")?;
                } else {
                    write!(f, " {sign} {mag}*{m}")?;
                }
            }
        }
        Ok(())
    }
}

/// `num/den` with no gcd reduction beyond cheap exact-division passes.
/// `den` is nonzero with leading coefficient one. Zero testing is complete:
/// the value is identically zero iff `num` is the zero polynomial.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn from_poly(p: Poly) -> RatFunc {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn constant(c: Rational) -> RatFunc {
        RatFunc::from_poly(Poly::constant(c))
    }

    pub fn var(v: u32) -> RatFunc {
        RatFunc::from_poly(Poly::var(v))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalized(num: Poly, den: Poly) -> RatFunc {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return RatFunc {
                num,
                den: Poly::one(),
            };
        }
        if let Some(c) = den.as_constant() {
            return RatFunc {
                num: num.scale(&(Rational::one() / c)),
                den: Poly::one(),
            };
        }
        if let Some(q) = num.div_exact(&den) {
            return RatFunc {
                num: q,
                den: Poly::one(),
            };
        }
        // make the leading coefficient of den equal to one
        let lc = den.leading().expect("nonzero").1.clone();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = Rational::one() / lc;
            RatFunc {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        if self.den == other.den {
            return RatFunc::normalized(self.num.add(&other.num), self.den.clone());
        }
        // keep det-power towers small: check divisibility both ways
        if let Some(q) = other.den.div_exact(&self.den) {
            return RatFunc::normalized(
                self.num.mul(&q).add(&other.num),
                other.den.clone(),
            );
        }
        if let Some(q) = self.den.div_exact(&other.den) {
            return RatFunc::normalized(
                self.num.add(&other.num.mul(&q)),
                self.den.clone(),
            );
        }
        RatFunc::normalized(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        // cross-cancel cheaply before multiplying out
        let (mut an, mut ad) = (self.num.clone(), self.den.clone());
        let (mut bn, mut bd) = (other.num.clone(), other.den.clone());
        if !bd.is_one() {
            if let Some(q) = an.div_exact(&bd) {
                an = q;
                bd = Poly::one();
            }
        }
        if !ad.is_one() {
            if let Some(q) = bn.div_exact(&ad) {
                bn = q;
                ad = Poly::one();
            }
        }
        RatFunc::normalized(an.mul(&bn), ad.mul(&bd))
    }

    /// Division; `None` when dividing by (identically) zero.
    pub fn div(&self, other: &RatFunc) -> Option<RatFunc> {
        if other.is_zero() {
            return None;
        }
        Some(self.mul(&RatFunc {
            num: other.den.clone(),
            den: other.num.clone(),
        }))
    }

    pub fn pow(&self, e: i32) -> Option<RatFunc> {
        if e == 0 {
            return Some(RatFunc::constant(Rational::one()));
        }
        let base = if e > 0 {
            self.clone()
        } else {
            if self.is_zero() {
                return None;
            }
            RatFunc {
                num: self.den.clone(),
                den: self.num.clone(),
            }
        };
        let e = e.unsigned_abs();
        Some(RatFunc::normalized(base.num.pow(e), base.den.pow(e)))
    }

    /// Equality as rational functions (cross multiplication; exact).
    pub fn eq_value(&self, other: &RatFunc) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }

    /// Derivative by the quotient rule at the polynomial level.
    pub fn partial(&self, v: u32) -> RatFunc {
        let dn = self.num.partial(v);
        if self.den.is_one() {
            return RatFunc::from_poly(dn);
        }
        let dd = self.den.partial(v);
        RatFunc::normalized(
            dn.mul(&self.den).sub(&self.num.mul(&dd)),
            self.den.mul(&self.den),
        )
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}
