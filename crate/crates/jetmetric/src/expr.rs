//! The exact scalar layer: an expression DAG over the jet coordinates,
//! closed under partial differentiation, with exact evaluation and a
//! complete symbolic zero test via rational-function normalization.

use crate::coords::{JetCoordinate, JetPoint};
use crate::poly::RatFunc;
use crate::rational::{rat_int, Rational};
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("division by zero while evaluating {node}")]
    DivisionByZero { node: String },
    #[error("no valid sample point found after {0} attempts")]
    NoValidSample(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("unsupported dimension {0} (supported: 2..=4)")]
    UnsupportedDimension(usize),
    #[error("denominator is identically zero in {0}")]
    ZeroDenominator(String),
}

#[derive(Debug)]
pub enum ExprNode {
    Const(Rational),
    Coord(JetCoordinate),
    Sum(Vec<ScalarExpr>),
    Product(Vec<ScalarExpr>),
    IntPower(ScalarExpr, i32),
    Quotient(ScalarExpr, ScalarExpr),
}

/// A scalar expression; cheap to clone, shares subterms.
#[derive(Clone, Debug)]
pub struct ScalarExpr(Arc<ExprNode>);

impl ScalarExpr {
    fn new(node: ExprNode) -> ScalarExpr {
        ScalarExpr(Arc::new(node))
    }

    pub fn node(&self) -> &ExprNode {
        &self.0
    }

    fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(c: Rational) -> ScalarExpr {
        ScalarExpr::new(ExprNode::Const(c))
    }

    pub fn int(n: i64) -> ScalarExpr {
        ScalarExpr::constant(rat_int(n))
    }

    pub fn zero() -> ScalarExpr {
        ScalarExpr::int(0)
    }

    pub fn one() -> ScalarExpr {
        ScalarExpr::int(1)
    }

    pub fn coord(c: JetCoordinate) -> ScalarExpr {
        ScalarExpr::new(ExprNode::Coord(c))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            ExprNode::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero_const(&self) -> bool {
        self.as_const().map(|c| c.is_zero()).unwrap_or(false)
    }

    pub fn is_one_const(&self) -> bool {
        self.as_const().map(|c| c.is_one()).unwrap_or(false)
    }

    /// n-ary sum; flattens, folds constants, drops zeros.
    pub fn sum<I: IntoIterator<Item = ScalarExpr>>(terms: I) -> ScalarExpr {
        let mut flat = Vec::new();
        let mut konst = Rational::zero();
        for t in terms {
            match t.node() {
                ExprNode::Const(c) => konst += c,
                ExprNode::Sum(inner) => {
                    for u in inner {
                        match u.node() {
                            ExprNode::Const(c) => konst += c,
                            _ => flat.push(u.clone()),
                        }
                    }
                }
                _ => flat.push(t),
            }
        }
        if !konst.is_zero() {
            flat.push(ScalarExpr::constant(konst));
        }
        match flat.len() {
            0 => ScalarExpr::zero(),
            1 => flat.pop().unwrap(),
            _ => ScalarExpr::new(ExprNode::Sum(flat)),
        }
    }

    /// n-ary product; flattens, folds constants, annihilates on zero.
    pub fn product<I: IntoIterator<Item = ScalarExpr>>(factors: I) -> ScalarExpr {
        let mut flat = Vec::new();
        let mut konst = Rational::one();
        for t in factors {
            match t.node() {
                ExprNode::Const(c) => konst *= c,
                ExprNode::Product(inner) => {
                    for u in inner {
                        match u.node() {
                            ExprNode::Const(c) => konst *= c,
                            _ => flat.push(u.clone()),
                        }
                    }
                }
                _ => flat.push(t),
            }
        }
        if konst.is_zero() {
            return ScalarExpr::zero();
        }
        if !konst.is_one() {
            flat.insert(0, ScalarExpr::constant(konst));
        }
        match flat.len() {
            0 => ScalarExpr::one(),
            1 => flat.pop().unwrap(),
            _ => ScalarExpr::new(ExprNode::Product(flat)),
        }
    }

    pub fn add(&self, other: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::sum([self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::sum([self.clone(), other.neg()])
    }

    pub fn mul(&self, other: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::product([self.clone(), other.clone()])
    }

    pub fn neg(&self) -> ScalarExpr {
        ScalarExpr::product([ScalarExpr::int(-1), self.clone()])
    }

    pub fn scale(&self, c: &Rational) -> ScalarExpr {
        ScalarExpr::product([ScalarExpr::constant(c.clone()), self.clone()])
    }

    pub fn int_power(base: ScalarExpr, exp: i32) -> ScalarExpr {
        match exp {
            0 => ScalarExpr::one(),
            1 => base,
            _ => {
                if let Some(c) = base.as_const() {
                    if exp > 0 {
                        let mut v = Rational::one();
                        for _ in 0..exp {
                            v *= c;
                        }
                        return ScalarExpr::constant(v);
                    }
                    if !c.is_zero() {
                        let mut v = Rational::one();
                        for _ in 0..(-exp) {
                            v *= c;
                        }
                        return ScalarExpr::constant(v.recip());
                    }
                }
                ScalarExpr::new(ExprNode::IntPower(base, exp))
            }
        }
    }

    pub fn quotient(num: ScalarExpr, den: ScalarExpr) -> ScalarExpr {
        if let Some(c) = den.as_const() {
            if !c.is_zero() {
                return num.scale(&c.clone().recip());
            }
        }
        if num.is_zero_const() {
            // 0/d: keep exact zero; the engine never divides by an
            // identically-zero denominator by construction.
            return ScalarExpr::zero();
        }
        ScalarExpr::new(ExprNode::Quotient(num, den))
    }

    /// Exact evaluation. A shared `Evaluator` caches per-node values so DAG
    /// sharing is honored.
    pub fn eval(&self, p: &JetPoint) -> Result<Rational, EvalError> {
        Evaluator::new(p).eval(self)
    }

    /// Exact symbolic partial derivative; the alias `y_ji` resolves to the
    /// normalized coordinate before comparison.
    pub fn partial(&self, c: JetCoordinate) -> ScalarExpr {
        let mut cache: HashMap<usize, ScalarExpr> = HashMap::new();
        self.partial_cached(c, &mut cache)
    }

    fn partial_cached(
        &self,
        c: JetCoordinate,
        cache: &mut HashMap<usize, ScalarExpr>,
    ) -> ScalarExpr {
        if let Some(hit) = cache.get(&self.key()) {
            return hit.clone();
        }
        let out = match self.node() {
            ExprNode::Const(_) => ScalarExpr::zero(),
            ExprNode::Coord(k) => {
                if *k == c {
                    ScalarExpr::one()
                } else {
                    ScalarExpr::zero()
                }
            }
            ExprNode::Sum(terms) => {
                ScalarExpr::sum(terms.iter().map(|t| t.partial_cached(c, cache)))
            }
            ExprNode::Product(factors) => {
                let mut terms = Vec::with_capacity(factors.len());
                for (i, f) in factors.iter().enumerate() {
                    let df = f.partial_cached(c, cache);
                    if df.is_zero_const() {
                        continue;
                    }
                    let mut parts: Vec<ScalarExpr> = Vec::with_capacity(factors.len());
                    parts.extend(factors.iter().take(i).cloned());
                    parts.push(df);
                    parts.extend(factors.iter().skip(i + 1).cloned());
                    terms.push(ScalarExpr::product(parts));
                }
                ScalarExpr::sum(terms)
            }
            ExprNode::IntPower(base, e) => {
                let db = base.partial_cached(c, cache);
                if db.is_zero_const() {
                    ScalarExpr::zero()
                } else {
                    ScalarExpr::product([
                        ScalarExpr::constant(rat_int(*e as i64)),
                        ScalarExpr::int_power(base.clone(), e - 1),
                        db,
                    ])
                }
            }
            ExprNode::Quotient(num, den) => {
                let dn = num.partial_cached(c, cache);
                let dd = den.partial_cached(c, cache);
                // (n'd - nd') / d^2
                let top = ScalarExpr::sum([
                    ScalarExpr::product([dn, den.clone()]),
                    ScalarExpr::product([num.clone(), dd]).neg(),
                ]);
                ScalarExpr::quotient(top, ScalarExpr::int_power(den.clone(), 2))
            }
        };
        cache.insert(self.key(), out.clone());
        out
    }

    /// Coordinates that syntactically occur in the expression.
    pub fn free_coords(&self) -> Vec<JetCoordinate> {
        fn walk(
            e: &ScalarExpr,
            seen: &mut HashMap<usize, ()>,
            out: &mut Vec<JetCoordinate>,
        ) {
            if seen.insert(e.key(), ()).is_some() {
                return;
            }
            match e.node() {
                ExprNode::Const(_) => {}
                ExprNode::Coord(c) => out.push(*c),
                ExprNode::Sum(v) | ExprNode::Product(v) => {
                    for t in v {
                        walk(t, seen, out);
                    }
                }
                ExprNode::IntPower(b, _) => walk(b, seen, out),
                ExprNode::Quotient(a, b) => {
                    walk(a, seen, out);
                    walk(b, seen, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut HashMap::new(), &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Substitutes coordinates by expressions (identity where `map` is None).
    pub fn substitute<F: Fn(JetCoordinate) -> Option<ScalarExpr>>(
        &self,
        map: &F,
    ) -> ScalarExpr {
        let mut cache: HashMap<usize, ScalarExpr> = HashMap::new();
        self.substitute_cached(map, &mut cache)
    }

    fn substitute_cached<F: Fn(JetCoordinate) -> Option<ScalarExpr>>(
        &self,
        map: &F,
        cache: &mut HashMap<usize, ScalarExpr>,
    ) -> ScalarExpr {
        if let Some(hit) = cache.get(&self.key()) {
            return hit.clone();
        }
        let out = match self.node() {
            ExprNode::Const(_) => self.clone(),
            ExprNode::Coord(c) => map(*c).unwrap_or_else(|| self.clone()),
            ExprNode::Sum(v) => {
                ScalarExpr::sum(v.iter().map(|t| t.substitute_cached(map, cache)))
            }
            ExprNode::Product(v) => {
                ScalarExpr::product(v.iter().map(|t| t.substitute_cached(map, cache)))
            }
            ExprNode::IntPower(b, e) => {
                ScalarExpr::int_power(b.substitute_cached(map, cache), *e)
            }
            ExprNode::Quotient(a, b) => ScalarExpr::quotient(
                a.substitute_cached(map, cache),
                b.substitute_cached(map, cache),
            ),
        };
        cache.insert(self.key(), out.clone());
        out
    }

    /// Canonical rational-function form (fresh cache). Prefer a shared
    /// [`Canonicalizer`] when normalizing many related expressions.
    pub fn to_ratfunc(&self) -> Result<RatFunc, ExprError> {
        Canonicalizer::new().canon(self)
    }

    /// Rebuilds an expression from its canonical form: a flat polynomial (or
    /// polynomial quotient). Collapses nested derivative towers so later
    /// differentiation and evaluation stay cheap.
    pub fn from_ratfunc(rf: &RatFunc) -> ScalarExpr {
        let poly_expr = |p: &crate::poly::Poly| -> ScalarExpr {
            let mut terms = Vec::with_capacity(p.num_terms());
            for (m, c) in p.terms() {
                let mut factors = vec![ScalarExpr::constant(c.clone())];
                for &(v, e) in m.pairs() {
                    let coord = JetCoordinate::from_var_id(v)
                        .expect("canonical variables are jet coordinates");
                    factors.push(ScalarExpr::int_power(ScalarExpr::coord(coord), e as i32));
                }
                terms.push(ScalarExpr::product(factors));
            }
            ScalarExpr::sum(terms)
        };
        if rf.den.is_one() {
            poly_expr(&rf.num)
        } else {
            ScalarExpr::quotient(poly_expr(&rf.num), poly_expr(&rf.den))
        }
    }

    /// The expression in flattened canonical shape (unchanged value).
    pub fn canonicalized(&self, canon: &mut Canonicalizer) -> ScalarExpr {
        match canon.canon(self) {
            Ok(rf) => ScalarExpr::from_ratfunc(&rf),
            Err(_) => self.clone(),
        }
    }

    /// Complete symbolic zero test: canonicalizes and checks the numerator.
    pub fn is_zero_exact(&self) -> bool {
        match self.to_ratfunc() {
            Ok(rf) => rf.is_zero(),
            Err(_) => false,
        }
    }

    pub fn eq_exact(&self, other: &ScalarExpr) -> bool {
        self.sub(other).is_zero_exact()
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            ExprNode::Const(c) => {
                if c.denom().is_one() {
                    write!(f, "{}", c.numer())
                } else {
                    write!(f, "{c}")
                }
            }
            ExprNode::Coord(c) => write!(f, "{c}"),
            ExprNode::Sum(v) => {
                f.write_str("(")?;
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
            ExprNode::Product(v) => {
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
            ExprNode::IntPower(b, e) => write!(f, "({b})^{e}"),
            ExprNode::Quotient(a, b) => write!(f, "({a})/({b})"),
        }
    }
}

/// Batch evaluator at a fixed point with a per-node cache, so shared
/// subexpressions (Christoffels, inverse-metric entries) evaluate once.
/// The cache stores a clone of each expression: node addresses are only
/// valid keys while the nodes are alive.
pub struct Evaluator<'p> {
    point: &'p JetPoint,
    cache: HashMap<usize, (ScalarExpr, Rational)>,
}

impl<'p> Evaluator<'p> {
    pub fn new(point: &'p JetPoint) -> Evaluator<'p> {
        Evaluator {
            point,
            cache: HashMap::new(),
        }
    }

    pub fn point(&self) -> &JetPoint {
        self.point
    }

    pub fn eval(&mut self, e: &ScalarExpr) -> Result<Rational, EvalError> {
        // leaves are cheaper to recompute than to cache
        match e.node() {
            ExprNode::Const(c) => return Ok(c.clone()),
            ExprNode::Coord(c) => return Ok(self.point.get(*c).clone()),
            _ => {}
        }
        if let Some((_, hit)) = self.cache.get(&e.key()) {
            return Ok(hit.clone());
        }
        let out = match e.node() {
            ExprNode::Const(c) => c.clone(),
            ExprNode::Coord(c) => self.point.get(*c).clone(),
            ExprNode::Sum(v) => {
                let mut acc = Rational::zero();
                for t in v {
                    acc += self.eval(t)?;
                }
                acc
            }
            ExprNode::Product(v) => {
                let mut acc = Rational::one();
                for t in v {
                    acc *= self.eval(t)?;
                    if acc.is_zero() {
                        // still fine: zero short-circuit is value-correct
                        break;
                    }
                }
                acc
            }
            ExprNode::IntPower(b, exp) => {
                let base = self.eval(b)?;
                if *exp < 0 && base.is_zero() {
                    return Err(EvalError::DivisionByZero {
                        node: format!("{e}"),
                    });
                }
                let mut acc = Rational::one();
                for _ in 0..exp.unsigned_abs() {
                    acc *= base.clone();
                }
                if *exp < 0 {
                    acc.recip()
                } else {
                    acc
                }
            }
            ExprNode::Quotient(a, b) => {
                let den = self.eval(b)?;
                if den.is_zero() {
                    return Err(EvalError::DivisionByZero {
                        node: format!("{e}"),
                    });
                }
                self.eval(a)? / den
            }
        };
        self.cache.insert(e.key(), (e.clone(), out.clone()));
        Ok(out)
    }
}

/// Shared canonicalization cache. Holds the expressions it has seen so node
/// addresses stay valid for the lifetime of the cache.
pub struct Canonicalizer {
    cache: HashMap<usize, (ScalarExpr, RatFunc)>,
}

impl Default for Canonicalizer {
    fn default() -> Self {
        Self::new()
    }
}

impl Canonicalizer {
    pub fn new() -> Canonicalizer {
        Canonicalizer {
            cache: HashMap::new(),
        }
    }

    pub fn canon(&mut self, e: &ScalarExpr) -> Result<RatFunc, ExprError> {
        if let Some((_, hit)) = self.cache.get(&e.key()) {
            return Ok(hit.clone());
        }
        let out = match e.node() {
            ExprNode::Const(c) => RatFunc::constant(c.clone()),
            ExprNode::Coord(c) => RatFunc::var(c.var_id()),
            ExprNode::Sum(v) => {
                let mut acc = RatFunc::constant(Rational::zero());
                for t in v {
                    acc = acc.add(&self.canon(t)?);
                }
                acc
            }
            ExprNode::Product(v) => {
                let mut acc = RatFunc::constant(Rational::one());
                for t in v {
                    acc = acc.mul(&self.canon(t)?);
                    if acc.is_zero() {
                        break;
                    }
                }
                acc
            }
            ExprNode::IntPower(b, exp) => self
                .canon(b)?
                .pow(*exp)
                .ok_or_else(|| ExprError::ZeroDenominator(format!("{e}")))?,
            ExprNode::Quotient(a, b) => {
                let den = self.canon(b)?;
                self.canon(a)?
                    .div(&den)
                    .ok_or_else(|| ExprError::ZeroDenominator(format!("{e}")))?
            }
        };
        self.cache.insert(e.key(), (e.clone(), out.clone()));
        Ok(out)
    }

    pub fn is_zero(&mut self, e: &ScalarExpr) -> Result<bool, ExprError> {
        Ok(self.canon(e)?.is_zero())
    }
}

/// The inverse of the symbolic metric matrix `(y_ij)` for dimension `n`,
/// as adjugate-over-determinant rational expressions.
pub fn inverse_metric(n: usize) -> Result<Vec<Vec<ScalarExpr>>, ExprError> {
    if !(2..=4).contains(&n) {
        return Err(ExprError::UnsupportedDimension(n));
    }
    let y = metric_matrix_exprs(n);
    Ok(expr_matrix_inverse(&y))
}

/// The symbolic metric matrix itself (full, via the `i ≤ j` aliases).
pub fn metric_matrix_exprs(n: usize) -> Vec<Vec<ScalarExpr>> {
    (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| ScalarExpr::coord(JetCoordinate::metric(i, j)))
                .collect()
        })
        .collect()
}

/// Determinant of a small matrix of expressions by cofactor expansion.
pub fn expr_matrix_det(m: &[Vec<ScalarExpr>]) -> ScalarExpr {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut terms = Vec::with_capacity(n);
    for j in 0..n {
        if m[0][j].is_zero_const() {
            continue;
        }
        let minor: Vec<Vec<ScalarExpr>> = (1..n)
            .map(|r| {
                (0..n)
                    .filter(|&c| c != j)
                    .map(|c| m[r][c].clone())
                    .collect()
            })
            .collect();
        let cof = expr_matrix_det(&minor);
        let signed = if j % 2 == 0 { cof } else { cof.neg() };
        terms.push(ScalarExpr::product([m[0][j].clone(), signed]));
    }
    ScalarExpr::sum(terms)
}

/// Exact inverse of a small matrix of expressions: adjugate over determinant.
/// The determinant must not be identically zero (callers pass invertible
/// constructions: metric matrices, Jacobians of diffeomorphisms).
pub fn expr_matrix_inverse(m: &[Vec<ScalarExpr>]) -> Vec<Vec<ScalarExpr>> {
    let n = m.len();
    let det = expr_matrix_det(m);
    let mut inv = vec![vec![ScalarExpr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            // adjugate: cofactor C_ji
            let minor: Vec<Vec<ScalarExpr>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != i)
                        .map(|c| m[r][c].clone())
                        .collect()
                })
                .collect();
            let cof = if minor.is_empty() {
                ScalarExpr::one()
            } else {
                expr_matrix_det(&minor)
            };
            let signed = if (i + j) % 2 == 0 { cof } else { cof.neg() };
            inv[i][j] = ScalarExpr::quotient(signed, det.clone());
        }
    }
    inv
}

/// Probabilistic identity test for rational functions: `a = b` iff `a - b`
/// vanishes at `trials` pseudo-random rational jet points drawn
/// deterministically from `seed`. Points where a denominator vanishes are
/// resampled up to a bounded retry budget.
pub fn equal_probabilistic(
    a: &ScalarExpr,
    b: &ScalarExpr,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<bool, EvalError> {
    assert!(trials >= 1, "trials must be >= 1");
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diff = a.sub(b);
    let budget = trials * 50;
    let mut used = 0usize;
    let mut ok = 0usize;
    while ok < trials {
        if used >= budget {
            return Err(EvalError::NoValidSample(budget));
        }
        used += 1;
        let p = JetPoint::random(n, &mut rng);
        match diff.eval(&p) {
            Ok(v) => {
                if !v.is_zero() {
                    return Ok(false);
                }
                ok += 1;
            }
            Err(EvalError::DivisionByZero { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

/// A witness point where `a - b` is nonzero, if one exists in the sample.
pub fn inequality_witness(
    a: &ScalarExpr,
    b: &ScalarExpr,
    n: usize,
    trials: usize,
    seed: u64,
) -> Option<JetPoint> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diff = a.sub(b);
    for _ in 0..trials * 50 {
        let p = JetPoint::random(n, &mut rng);
        if let Ok(v) = diff.eval(&p) {
            if !v.is_zero() {
                return Some(p);
            }
        }
    }
    None
}

/// Random expression over the coordinates of dimension `n`; used by the
/// engine-health suites. Polynomial nodes only when `polynomial` is set,
/// otherwise quotients and negative powers may appear.
pub fn random_expr<R: Rng>(n: usize, depth: usize, polynomial: bool, rng: &mut R) -> ScalarExpr {
    let coords = JetCoordinate::enumerate(n);
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => ScalarExpr::constant(crate::rational::rat(rng.gen_range(-6..=6), rng.gen_range(1..=4))),
            _ => ScalarExpr::coord(coords[rng.gen_range(0..coords.len())]),
        };
    }
    let choice = rng.gen_range(0..if polynomial { 3 } else { 5 });
    match choice {
        0 => ScalarExpr::sum((0..rng.gen_range(2..=3)).map(|_| random_expr(n, depth - 1, polynomial, rng))),
        1 => ScalarExpr::product(
            (0..rng.gen_range(2..=3)).map(|_| random_expr(n, depth - 1, polynomial, rng)),
        ),
        2 => ScalarExpr::int_power(random_expr(n, depth - 1, polynomial, rng), rng.gen_range(1..=3)),
        3 => ScalarExpr::quotient(
            random_expr(n, depth - 1, polynomial, rng),
            // keep denominators valid at random points: 1 + square
            ScalarExpr::sum([
                ScalarExpr::one(),
                ScalarExpr::int_power(random_expr(n, depth - 1, polynomial, rng), 2),
            ]),
        ),
        _ => ScalarExpr::int_power(
            ScalarExpr::sum([
                ScalarExpr::one(),
                ScalarExpr::int_power(random_expr(n, depth - 1, polynomial, rng), 2),
            ]),
            -1,
        ),
    }
}
