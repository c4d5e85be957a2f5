//! Sparse exterior algebra on the jet-space coframe.
//!
//! A `DiffForm` of degree `p` is a sparse map from strictly increasing
//! `p`-tuples of basis covectors to scalar-expression coefficients. The
//! coframe order is `dx < dy < dy-jet`, lexicographic inside each block,
//! mirroring the coordinate order.

use crate::coords::{JetCoordinate, JetPoint};
use crate::expr::{Canonicalizer, EvalError, Evaluator, ScalarExpr};
use crate::rational::{fraction_string, Rational};
use num_traits::Zero;
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// A basis covector of the jet-space coframe: `dx^k`, `dy_ij` or `dy_ij,k`,
/// indexed by the coordinate it differentiates.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CovectorBasis(pub JetCoordinate);

impl CovectorBasis {
    pub fn dx(k: usize) -> CovectorBasis {
        CovectorBasis(JetCoordinate::base(k))
    }

    pub fn dy(i: usize, j: usize) -> CovectorBasis {
        CovectorBasis(JetCoordinate::metric(i, j))
    }

    pub fn dy_jet(i: usize, j: usize, k: usize) -> CovectorBasis {
        CovectorBasis(JetCoordinate::metric_jet(i, j, k))
    }

    pub fn coordinate(&self) -> JetCoordinate {
        self.0
    }

    pub fn name(&self) -> String {
        match self.0 {
            JetCoordinate::Base(i) => format!("dx{i}"),
            JetCoordinate::Metric(i, j) => format!("dy{i}{j}"),
            JetCoordinate::MetricJet(i, j, k) => format!("dy{i}{j},{k}"),
        }
    }
}

impl fmt::Display for CovectorBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("degree mismatch: form has degree {expected}, got {got} vectors")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("cannot add forms of degrees {0} and {1}")]
    AddDegreeMismatch(usize, usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Tangent vector at a point, as rational coefficients over the coordinate
/// frame `{∂x^i, ∂y_ij, ∂y_ij,k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangentVector {
    components: BTreeMap<JetCoordinate, Rational>,
}

impl TangentVector {
    /// The coordinate frame vector `∂/∂c`.
    pub fn coordinate(c: JetCoordinate) -> TangentVector {
        let mut components = BTreeMap::new();
        components.insert(c, Rational::from_integer(1.into()));
        TangentVector { components }
    }

    pub fn from_components<I>(iter: I) -> TangentVector
    where
        I: IntoIterator<Item = (JetCoordinate, Rational)>,
    {
        TangentVector {
            components: iter.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    pub fn component(&self, c: JetCoordinate) -> Rational {
        self.components.get(&c).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn components(&self) -> &BTreeMap<JetCoordinate, Rational> {
        &self.components
    }

    /// Random vector with roughly half the components active; sparse tuples
    /// keep high-degree evaluations cheap while seeds vary the support.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> TangentVector {
        let mut components = BTreeMap::new();
        for c in JetCoordinate::enumerate(n) {
            if rng.gen_range(0..2) == 0 {
                continue;
            }
            let v = crate::rational::rat(rng.gen_range(-16..=16), 8);
            if !v.is_zero() {
                components.insert(c, v);
            }
        }
        TangentVector { components }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .components
            .iter()
            .map(|(c, v)| (c.name(), serde_json::Value::String(fraction_string(v))))
            .collect();
        serde_json::Value::Object(map)
    }

    pub fn from_json(v: &serde_json::Value) -> Option<TangentVector> {
        let map = v.as_object()?;
        let mut components = BTreeMap::new();
        for (name, val) in map {
            let c = JetCoordinate::parse(name)?;
            let r = crate::rational::parse_rational(val.as_str()?).ok()?;
            if !r.is_zero() {
                components.insert(c, r);
            }
        }
        Some(TangentVector { components })
    }
}

/// Sparse differential form; degree-0 forms hold a single scalar coefficient
/// at the empty key.
#[derive(Clone, Debug)]
pub struct DiffForm {
    degree: usize,
    terms: BTreeMap<Vec<CovectorBasis>, ScalarExpr>,
}

impl DiffForm {
    pub fn zero(degree: usize) -> DiffForm {
        DiffForm {
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// A degree-0 form from a scalar.
    pub fn scalar(e: ScalarExpr) -> DiffForm {
        let mut f = DiffForm::zero(0);
        f.add_term(Vec::new(), e);
        f
    }

    /// The basis covector `dc` as a 1-form.
    pub fn basis(c: CovectorBasis) -> DiffForm {
        let mut f = DiffForm::zero(1);
        f.add_term(vec![c], ScalarExpr::one());
        f
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<CovectorBasis>, &ScalarExpr)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, key: &[CovectorBasis]) -> ScalarExpr {
        self.terms
            .get(key)
            .cloned()
            .unwrap_or_else(ScalarExpr::zero)
    }

    /// Inserts `coeff` at `key`, accumulating; drops literal zeros.
    pub fn add_term(&mut self, key: Vec<CovectorBasis>, coeff: ScalarExpr) {
        debug_assert_eq!(key.len(), self.degree);
        debug_assert!(key.windows(2).all(|w| w[0] < w[1]), "key not increasing");
        if coeff.is_zero_const() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let merged = e.get().add(&coeff);
                if merged.is_zero_const() {
                    e.remove();
                } else {
                    *e.get_mut() = merged;
                }
            }
        }
    }

    pub fn add(&self, other: &DiffForm) -> DiffForm {
        assert_eq!(self.degree, other.degree, "degree mismatch in add");
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> DiffForm {
        self.map_coeffs(|c| c.neg())
    }

    pub fn sub(&self, other: &DiffForm) -> DiffForm {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &ScalarExpr) -> DiffForm {
        if s.is_zero_const() {
            return DiffForm::zero(self.degree);
        }
        self.map_coeffs(|c| c.mul(s))
    }

    pub fn scale_rat(&self, r: &Rational) -> DiffForm {
        self.scale(&ScalarExpr::constant(r.clone()))
    }

    pub fn map_coeffs<F: Fn(&ScalarExpr) -> ScalarExpr>(&self, f: F) -> DiffForm {
        let mut out = DiffForm::zero(self.degree);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), f(c));
        }
        out
    }

    /// Flattens every coefficient to canonical polynomial-quotient shape and
    /// drops exact zeros. Value-preserving; keeps derivative towers shallow.
    pub fn canonicalized(&self, canon: &mut Canonicalizer) -> DiffForm {
        let mut out = DiffForm::zero(self.degree);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.canonicalized(canon));
        }
        out
    }

    /// Wedge product; degree adds, sign from the merge shuffle.
    pub fn wedge(&self, other: &DiffForm) -> DiffForm {
        let mut out = DiffForm::zero(self.degree + other.degree);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                if let Some((key, sign)) = merge_keys(ka, kb) {
                    let mut coeff = ca.mul(cb);
                    if sign < 0 {
                        coeff = coeff.neg();
                    }
                    out.add_term(key, coeff);
                }
            }
        }
        out
    }

    /// Exterior derivative: `d(f dK) = Σ_c ∂f/∂c · dc ∧ dK`.
    pub fn dext(&self) -> DiffForm {
        let mut out = DiffForm::zero(self.degree + 1);
        for (key, coeff) in &self.terms {
            for c in coeff.free_coords() {
                let dc = coeff.partial(c);
                if dc.is_zero_const() {
                    continue;
                }
                if let Some((new_key, sign)) = insert_key(key, CovectorBasis(c)) {
                    out.add_term(new_key, if sign < 0 { dc.neg() } else { dc });
                }
            }
        }
        out
    }

    /// Exact alternating multilinear evaluation on `degree` tangent vectors.
    pub fn evaluate(
        &self,
        p: &JetPoint,
        vectors: &[TangentVector],
    ) -> Result<Rational, FormError> {
        let mut ev = Evaluator::new(p);
        self.evaluate_with(&mut ev, vectors)
    }

    /// Same as [`evaluate`](Self::evaluate) with a shared coefficient cache.
    pub fn evaluate_with(
        &self,
        ev: &mut Evaluator,
        vectors: &[TangentVector],
    ) -> Result<Rational, FormError> {
        if vectors.len() != self.degree {
            return Err(FormError::DegreeMismatch {
                expected: self.degree,
                got: vectors.len(),
            });
        }
        let mut total = Rational::zero();
        for (key, coeff) in &self.terms {
            // determinant of the component matrix M[r][v] = vectors[v][key[r]];
            // computed first so vanishing tuples skip the coefficient entirely
            let mat: Vec<Vec<Rational>> = key
                .iter()
                .map(|b| vectors.iter().map(|v| v.component(b.coordinate())).collect())
                .collect();
            let det = crate::rational::det_rational(&mat);
            if det.is_zero() {
                continue;
            }
            total += ev.eval(coeff)? * det;
        }
        Ok(total)
    }

    /// Exact values on several index-subsets of one vector tuple, walking the
    /// form once: `out[s] = α(vectors[subsets[s][0]], …)`. Coefficients are
    /// only evaluated for terms whose component determinant is nonzero
    /// somewhere.
    pub fn evaluate_on_subsets(
        &self,
        ev: &mut Evaluator,
        vectors: &[TangentVector],
        subsets: &[Vec<usize>],
    ) -> Result<Vec<Rational>, FormError> {
        debug_assert!(subsets.iter().all(|s| s.len() == self.degree));
        let mut out = vec![Rational::zero(); subsets.len()];
        for (key, coeff) in &self.terms {
            // component rows over the full tuple, sliced per subset
            let rows: Vec<Vec<Rational>> = key
                .iter()
                .map(|b| vectors.iter().map(|v| v.component(b.coordinate())).collect())
                .collect();
            let mut coeff_value: Option<Rational> = None;
            for (s, subset) in subsets.iter().enumerate() {
                let mat: Vec<Vec<Rational>> = rows
                    .iter()
                    .map(|row| subset.iter().map(|&c| row[c].clone()).collect())
                    .collect();
                let det = crate::rational::det_rational(&mat);
                if det.is_zero() {
                    continue;
                }
                if coeff_value.is_none() {
                    coeff_value = Some(ev.eval(coeff)?);
                }
                out[s] += coeff_value.clone().expect("just set") * det;
            }
        }
        Ok(out)
    }

    /// Contraction with constant tangent vectors, leaving the coefficients
    /// symbolic: returns the scalar expression `α(v_1, …, v_p)`.
    pub fn contract_expr(&self, vectors: &[TangentVector]) -> ScalarExpr {
        assert_eq!(vectors.len(), self.degree);
        let mut terms = Vec::new();
        for (key, coeff) in &self.terms {
            let mat: Vec<Vec<Rational>> = key
                .iter()
                .map(|b| vectors.iter().map(|v| v.component(b.coordinate())).collect())
                .collect();
            let det = crate::rational::det_rational(&mat);
            if det.is_zero() {
                continue;
            }
            terms.push(coeff.scale(&det));
        }
        ScalarExpr::sum(terms)
    }

    /// Complete symbolic zero test, coefficient by coefficient.
    pub fn is_zero_exact(&self) -> bool {
        let mut canon = Canonicalizer::new();
        self.is_zero_exact_with(&mut canon)
    }

    pub fn is_zero_exact_with(&self, canon: &mut Canonicalizer) -> bool {
        self.terms
            .values()
            .all(|c| canon.is_zero(c).unwrap_or(false))
    }

    pub fn eq_exact(&self, other: &DiffForm) -> bool {
        self.sub(other).is_zero_exact()
    }

    /// Canonical JSON: `{"degree": p, "terms": {"dx1^dy11": "<coeff>"}}`.
    /// Constant coefficients render as fraction strings, non-constant ones as
    /// the canonical rational-function string.
    pub fn to_json(&self) -> serde_json::Value {
        let mut terms = serde_json::Map::new();
        let mut canon = Canonicalizer::new();
        for (key, coeff) in &self.terms {
            let name = if key.is_empty() {
                "1".to_string()
            } else {
                key.iter()
                    .map(|b| b.name())
                    .collect::<Vec<_>>()
                    .join("^")
            };
            let rendered = match canon.canon(coeff) {
                Ok(rf) => {
                    if rf.is_zero() {
                        continue;
                    }
                    match rf.num.as_constant().filter(|_| rf.den.is_one()) {
                        Some(c) => fraction_string(&c),
                        None => rf.to_string(),
                    }
                }
                Err(_) => coeff.to_string(),
            };
            terms.insert(name, serde_json::Value::String(rendered));
        }
        serde_json::json!({ "degree": self.degree, "terms": terms })
    }
}

/// Merge two strictly increasing keys; `None` on a repeated covector,
/// otherwise the merged key and the shuffle sign.
pub fn merge_keys(
    a: &[CovectorBasis],
    b: &[CovectorBasis],
) -> Option<(Vec<CovectorBasis>, i8)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut sign = 1i8;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                // b[j] jumps over the remaining a-elements
                if (a.len() - i) % 2 == 1 {
                    sign = -sign;
                }
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => return None,
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, sign))
}

/// Insert one covector in front position semantics: `dc ∧ dK`.
fn insert_key(key: &[CovectorBasis], c: CovectorBasis) -> Option<(Vec<CovectorBasis>, i8)> {
    merge_keys(&[c], key)
}

/// Random sparse form of the given degree over dimension-`n` covectors;
/// used by the engine-health suites.
pub fn random_form<R: Rng>(
    n: usize,
    degree: usize,
    polynomial: bool,
    rng: &mut R,
) -> DiffForm {
    let coords = JetCoordinate::enumerate(n);
    let mut f = DiffForm::zero(degree);
    for _ in 0..rng.gen_range(1..=4) {
        let mut picks: Vec<CovectorBasis> = Vec::new();
        while picks.len() < degree {
            let c = CovectorBasis(coords[rng.gen_range(0..coords.len())]);
            if !picks.contains(&c) {
                picks.push(c);
            }
        }
        picks.sort();
        f.add_term(picks, crate::expr::random_expr(n, 2, polynomial, rng));
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dx(k: usize) -> DiffForm {
        DiffForm::basis(CovectorBasis::dx(k))
    }
    fn dy(i: usize, j: usize) -> DiffForm {
        DiffForm::basis(CovectorBasis::dy(i, j))
    }

    #[test]
    fn wedge_basis_examples() {
        let p = JetPoint::normal(2);
        let w = dx(1).wedge(&dx(2));
        let v1 = TangentVector::coordinate(JetCoordinate::base(1));
        let v2 = TangentVector::coordinate(JetCoordinate::base(2));
        assert_eq!(w.evaluate(&p, &[v1.clone(), v2.clone()]).unwrap(), rat_int(1));
        assert_eq!(w.evaluate(&p, &[v2, v1]).unwrap(), rat_int(-1));
        assert_eq!(dx(1).wedge(&dx(1)).num_terms(), 0);
    }

    #[test]
    fn wedge_graded_commutativity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let pa = rng.gen_range(0..=2);
            let pb = rng.gen_range(0..=2);
            let a = random_form(2, pa, true, &mut rng);
            let b = random_form(2, pb, true, &mut rng);
            let lhs = a.wedge(&b);
            let mut rhs = b.wedge(&a);
            if (pa * pb) % 2 == 1 {
                rhs = rhs.neg();
            }
            assert!(lhs.eq_exact(&rhs));
        }
    }

    #[test]
    fn wedge_associativity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..20 {
            let a = random_form(2, 1, true, &mut rng);
            let b = random_form(2, 1, true, &mut rng);
            let c = random_form(2, 2, true, &mut rng);
            assert!(a.wedge(&b).wedge(&c).eq_exact(&a.wedge(&b.wedge(&c))));
        }
    }

    #[test]
    fn dext_examples() {
        // d(y_11) = dy11
        let f = DiffForm::scalar(ScalarExpr::coord(JetCoordinate::metric(1, 1)));
        let d = f.dext();
        assert_eq!(d.degree(), 1);
        assert!(d.eq_exact(&dy(1, 1)));

        // d(dy_11 − y_11,k dx^k) = −Σ_k dy11,k ∧ dx^k
        let n = 2;
        let mut theta = dy(1, 1);
        for k in 1..=n {
            theta = theta.sub(
                &dx(k).scale(&ScalarExpr::coord(JetCoordinate::metric_jet(1, 1, k))),
            );
        }
        let d = theta.dext();
        let mut expect = DiffForm::zero(2);
        for k in 1..=n {
            expect = expect.sub(
                &DiffForm::basis(CovectorBasis::dy_jet(1, 1, k)).wedge(&dx(k)),
            );
        }
        assert!(d.eq_exact(&expect));
    }

    #[test]
    fn dext_squares_to_zero_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let deg = rng.gen_range(0..=2);
            let f = random_form(2, deg, true, &mut rng);
            assert!(f.dext().dext().is_zero_exact());
        }
    }

    #[test]
    fn evaluate_is_alternating_on_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..50 {
            let f = random_form(2, 3, true, &mut rng);
            let p = JetPoint::random(2, &mut rng);
            let vs: Vec<TangentVector> =
                (0..3).map(|_| TangentVector::random(2, &mut rng)).collect();
            let base = f.evaluate(&p, &vs).unwrap();
            let perm = match rng.gen_range(0..6) {
                0 => [0, 1, 2],
                1 => [0, 2, 1],
                2 => [1, 0, 2],
                3 => [1, 2, 0],
                4 => [2, 0, 1],
                _ => [2, 1, 0],
            };
            let permuted: Vec<TangentVector> =
                perm.iter().map(|&i| vs[i].clone()).collect();
            let sign = crate::rational::permutation_sign(&perm);
            let got = f.evaluate(&p, &permuted).unwrap();
            assert_eq!(got, base * rat_int(sign as i64));
        }
    }

    #[test]
    fn evaluate_degree_mismatch_is_an_error() {
        let f = dx(1).wedge(&dx(2));
        let p = JetPoint::normal(2);
        let v = TangentVector::coordinate(JetCoordinate::base(1));
        assert!(matches!(
            f.evaluate(&p, &[v]),
            Err(FormError::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn multilinearity_in_one_slot() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let f = random_form(2, 2, true, &mut rng);
        let p = JetPoint::random(2, &mut rng);
        let u = TangentVector::random(2, &mut rng);
        let v = TangentVector::random(2, &mut rng);
        let w = TangentVector::random(2, &mut rng);
        // (2/3)·u + v against linearity of the first slot
        let mut acc: BTreeMap<JetCoordinate, Rational> = BTreeMap::new();
        for (c, a) in u.components() {
            *acc.entry(*c).or_insert_with(Rational::zero) += a * rat(2, 3);
        }
        for (c, a) in v.components() {
            *acc.entry(*c).or_insert_with(Rational::zero) += a.clone();
        }
        let uv = TangentVector::from_components(acc);
        let lhs = f.evaluate(&p, &[uv, w.clone()]).unwrap();
        let rhs = f.evaluate(&p, &[u, w.clone()]).unwrap() * rat(2, 3)
            + f.evaluate(&p, &[v, w]).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn canonical_json_is_sorted_and_exact() {
        let f = dx(1)
            .wedge(&dy(1, 2))
            .scale(&ScalarExpr::constant(rat(3, 4)))
            .add(&dx(2).wedge(&dy(1, 1)).scale(&ScalarExpr::coord(JetCoordinate::base(1))));
        let json = f.to_json();
        let s = serde_json::to_string(&json).unwrap();
        assert_eq!(
            s,
            r#"{"degree":2,"terms":{"dx1^dy12":"3/4","dx2^dy11":"x1"}}"#
        );
    }
}
