//! Finite symmetry actions and sections: first-jet prolongation of chart
//! diffeomorphisms, the scaling action, lifts of vector fields, holonomic
//! sections, and the classical single-metric oracle they are checked against.
//!
//! Diffeomorphisms are polynomial chart maps with exact polynomial inverses
//! (affine maps, unipotent shears, and their compositions of total degree
//! ≤ 3). The prolongation consumes only the 2-jet of the inverse, so this
//! family exercises every transformation law in the engine.

use crate::coords::{JetCoordinate, JetPoint};
use crate::expr::{expr_matrix_inverse, Evaluator, ScalarExpr};
use crate::forms::{CovectorBasis, DiffForm, TangentVector};
use crate::matrix::MatrixForm;
use crate::poly::Poly;
use crate::rational::{det_rational, parse_rational, rat_int, Rational};
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActionError {
    #[error("forward and inverse do not compose to the identity (component {0})")]
    InvalidInverse(usize),
    #[error("polynomial degree {0} exceeds the supported maximum 3")]
    DegreeTooHigh(u32),
    #[error("scale factor must be positive, got {0}")]
    NonpositiveScale(String),
    #[error("metric section is not positive definite at sample point {0}")]
    SingularMetric(usize),
    #[error("component count {got} does not match dimension {n}")]
    WrongArity { n: usize, got: usize },
    #[error("malformed polynomial table: {0}")]
    BadPolynomial(String),
}

fn base_var(i: usize) -> u32 {
    JetCoordinate::base(i).var_id()
}

/// Polynomial in the base variables `x^1..x^n` as a ScalarExpr.
pub fn poly_to_expr(p: &Poly) -> ScalarExpr {
    let mut terms = Vec::new();
    for (m, c) in p.terms() {
        let mut factors = vec![ScalarExpr::constant(c.clone())];
        for &(v, e) in m.pairs() {
            let coord = JetCoordinate::from_var_id(v).expect("base variable id");
            factors.push(ScalarExpr::int_power(ScalarExpr::coord(coord), e as i32));
        }
        terms.push(ScalarExpr::product(factors));
    }
    ScalarExpr::sum(terms)
}

/// Parses `{"2,0": "3/4", ...}` (exponent tuple over x¹..xⁿ → fraction).
pub fn poly_from_json(n: usize, v: &serde_json::Value) -> Result<Poly, ActionError> {
    let map = v
        .as_object()
        .ok_or_else(|| ActionError::BadPolynomial(v.to_string()))?;
    let mut p = Poly::zero();
    for (key, val) in map {
        let exps: Vec<u32> = key
            .split(',')
            .map(|s| s.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| ActionError::BadPolynomial(key.clone()))?;
        if exps.len() != n {
            return Err(ActionError::BadPolynomial(key.clone()));
        }
        let c = parse_rational(
            val.as_str()
                .ok_or_else(|| ActionError::BadPolynomial(val.to_string()))?,
        )
        .map_err(|e| ActionError::BadPolynomial(e.to_string()))?;
        let mono = crate::poly::Mono::from_pairs(
            exps.iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (base_var(i + 1), e))
                .collect(),
        );
        p.add_term(mono, c);
    }
    Ok(p)
}

pub fn poly_to_json(n: usize, p: &Poly) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (m, c) in p.terms() {
        let mut exps = vec![0u32; n];
        for &(v, e) in m.pairs() {
            let idx = (v - 1) as usize;
            exps[idx] = e;
        }
        let key = exps
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(",");
        map.insert(
            key,
            serde_json::Value::String(crate::rational::fraction_string(c)),
        );
    }
    serde_json::Value::Object(map)
}

fn eval_poly_at(p: &Poly, x: &[Rational]) -> Rational {
    p.eval(&|v| {
        let idx = (v - 1) as usize;
        x[idx].clone()
    })
}

fn compose_map(polys: &[Poly], with: &[Poly]) -> Vec<Poly> {
    let images: BTreeMap<u32, Poly> = with
        .iter()
        .enumerate()
        .map(|(i, p)| (base_var(i + 1), p.clone()))
        .collect();
    polys.iter().map(|p| p.compose(&images)).collect()
}

fn is_identity_map(polys: &[Poly]) -> bool {
    polys
        .iter()
        .enumerate()
        .all(|(i, p)| *p == Poly::var(base_var(i + 1)))
}

/// A polynomial chart diffeomorphism with an exact polynomial inverse.
#[derive(Clone, Debug)]
pub struct PolyDiffeo {
    n: usize,
    pub name: String,
    forward: Vec<Poly>,
    inverse: Vec<Poly>,
}

impl PolyDiffeo {
    /// Validates arity, the degree bound, and that the two maps compose to
    /// the identity exactly (as polynomials, which subsumes the sample-point
    /// and chain-rule checks).
    pub fn new(
        name: impl Into<String>,
        n: usize,
        forward: Vec<Poly>,
        inverse: Vec<Poly>,
    ) -> Result<PolyDiffeo, ActionError> {
        if forward.len() != n || inverse.len() != n {
            return Err(ActionError::WrongArity {
                n,
                got: forward.len().max(inverse.len()),
            });
        }
        for p in forward.iter().chain(inverse.iter()) {
            let d = p.max_degree();
            if d > 3 {
                return Err(ActionError::DegreeTooHigh(d));
            }
        }
        let fi = compose_map(&forward, &inverse);
        if !is_identity_map(&fi) {
            let bad = fi
                .iter()
                .enumerate()
                .find(|(i, p)| **p != Poly::var(base_var(i + 1)))
                .map(|(i, _)| i)
                .unwrap_or(0);
            return Err(ActionError::InvalidInverse(bad));
        }
        let if_ = compose_map(&inverse, &forward);
        if !is_identity_map(&if_) {
            return Err(ActionError::InvalidInverse(0));
        }
        Ok(PolyDiffeo {
            n,
            name: name.into(),
            forward,
            inverse,
        })
    }

    pub fn identity(n: usize) -> PolyDiffeo {
        let fwd: Vec<Poly> = (1..=n).map(|i| Poly::var(base_var(i))).collect();
        PolyDiffeo::new("identity", n, fwd.clone(), fwd).expect("identity is a diffeo")
    }

    /// `x ↦ A·x + b` for an invertible rational matrix.
    pub fn affine(
        name: impl Into<String>,
        a: &[Vec<Rational>],
        b: &[Rational],
    ) -> Result<PolyDiffeo, ActionError> {
        let n = a.len();
        let a_inv =
            crate::rational::invert_rational(a).ok_or(ActionError::InvalidInverse(0))?;
        let lin = |m: &[Vec<Rational>], shift: &[Rational]| -> Vec<Poly> {
            (0..n)
                .map(|i| {
                    let mut p = Poly::constant(shift[i].clone());
                    for j in 0..n {
                        p = p.add(&Poly::var(base_var(j + 1)).scale(&m[i][j]));
                    }
                    p
                })
                .collect()
        };
        let forward = lin(a, b);
        // inverse: x ↦ A⁻¹(x − b)
        let minus_ab: Vec<Rational> = (0..n)
            .map(|i| {
                -(0..n)
                    .map(|j| &a_inv[i][j] * &b[j])
                    .fold(Rational::zero(), |acc, v| acc + v)
            })
            .collect();
        let inverse = lin(&a_inv, &minus_ab);
        PolyDiffeo::new(name, n, forward, inverse)
    }

    /// Unipotent shear `x^t ↦ x^t + q(x-others)`: adds a polynomial in the
    /// other variables to one slot; inverse subtracts it.
    pub fn shear(
        name: impl Into<String>,
        n: usize,
        target: usize,
        q: Poly,
    ) -> Result<PolyDiffeo, ActionError> {
        assert!(
            !q.free_vars().contains(&base_var(target)),
            "shear polynomial must not involve the target variable"
        );
        let mut forward: Vec<Poly> = (1..=n).map(|i| Poly::var(base_var(i))).collect();
        let mut inverse = forward.clone();
        forward[target - 1] = forward[target - 1].add(&q);
        inverse[target - 1] = inverse[target - 1].sub(&q);
        PolyDiffeo::new(name, n, forward, inverse)
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &PolyDiffeo) -> Result<PolyDiffeo, ActionError> {
        PolyDiffeo::new(
            format!("{}∘{}", self.name, other.name),
            self.n,
            compose_map(&self.forward, &other.forward),
            compose_map(&other.inverse, &self.inverse),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&self) -> &[Poly] {
        &self.forward
    }

    pub fn inverse(&self) -> &[Poly] {
        &self.inverse
    }

    pub fn apply_base(&self, x: &[Rational]) -> Vec<Rational> {
        self.forward.iter().map(|p| eval_poly_at(p, x)).collect()
    }

    /// Jacobian of the forward map, `J^i_j = ∂φ^i/∂x^j`, as polynomials.
    pub fn jacobian_forward(&self) -> Vec<Vec<Poly>> {
        (0..self.n)
            .map(|i| {
                (1..=self.n)
                    .map(|j| self.forward[i].partial(base_var(j)))
                    .collect()
            })
            .collect()
    }

    /// `det(Dφ)` at a base point.
    pub fn jacobian_det_at(&self, x: &[Rational]) -> Rational {
        let jac = self.jacobian_forward();
        let m: Vec<Vec<Rational>> = jac
            .iter()
            .map(|row| row.iter().map(|p| eval_poly_at(p, x)).collect())
            .collect();
        det_rational(&m)
    }

    pub fn from_json(v: &serde_json::Value) -> Result<PolyDiffeo, ActionError> {
        let n = v
            .get("n")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| ActionError::BadPolynomial("missing n".into()))?
            as usize;
        let name = v
            .get("name")
            .and_then(|x| x.as_str())
            .unwrap_or("diffeo")
            .to_string();
        let read = |key: &str| -> Result<Vec<Poly>, ActionError> {
            v.get(key)
                .and_then(|x| x.as_array())
                .ok_or_else(|| ActionError::BadPolynomial(format!("missing {key}")))?
                .iter()
                .map(|p| poly_from_json(n, p))
                .collect()
        };
        PolyDiffeo::new(name, n, read("forward")?, read("inverse")?)
    }
}

/// A coordinate substitution on the jet space: the pullback data of a
/// prolonged diffeomorphism, a scaling, or a holonomic section. `images[c]`
/// is the composition `c ∘ map` as an expression in the source coordinates.
#[derive(Clone, Debug)]
pub struct JetSubstitution {
    n: usize,
    images: BTreeMap<JetCoordinate, ScalarExpr>,
}

impl JetSubstitution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn image(&self, c: JetCoordinate) -> ScalarExpr {
        self.images
            .get(&c)
            .cloned()
            .unwrap_or_else(|| ScalarExpr::coord(c))
    }

    /// Pullback of a scalar: substitute coordinate images.
    pub fn apply_expr(&self, e: &ScalarExpr) -> ScalarExpr {
        e.substitute(&|c| self.images.get(&c).cloned())
    }

    /// Pullback of a form: substitute coefficients and replace every basis
    /// covector by the exterior derivative of its image. Commutes with
    /// `wedge` and `dext` by construction of those operations.
    pub fn apply_form(&self, f: &DiffForm) -> DiffForm {
        let mut out = DiffForm::zero(f.degree());
        for (key, coeff) in f.terms() {
            let mut term = DiffForm::scalar(self.apply_expr(coeff));
            for b in key {
                let image_differential = DiffForm::scalar(self.image(b.coordinate())).dext();
                term = term.wedge(&image_differential);
            }
            out = out.add(&term);
        }
        out
    }

    pub fn apply_matrix(&self, m: &MatrixForm) -> MatrixForm {
        MatrixForm::from_fn(m.n(), m.degree(), |i, j| self.apply_form(m.entry(i, j)))
    }

    /// Image of a point under the underlying map (evaluate every coordinate
    /// image at the point).
    pub fn apply_point(&self, p: &JetPoint) -> Result<JetPoint, crate::expr::EvalError> {
        let mut ev = Evaluator::new(p);
        let mut assignments = Vec::new();
        for c in JetCoordinate::enumerate(self.n) {
            assignments.push((c, ev.eval(&self.image(c))?));
        }
        JetPoint::from_assignments(self.n, assignments).map_err(|_| {
            crate::expr::EvalError::DivisionByZero {
                node: "image point not positive definite".into(),
            }
        })
    }

    /// Differential of the underlying map at `p`: pushes a tangent vector
    /// forward, `w^{c'} = Σ_c ∂(image of c')/∂c |_p · v^c`.
    pub fn pushforward(
        &self,
        p: &JetPoint,
        v: &TangentVector,
    ) -> Result<TangentVector, crate::expr::EvalError> {
        let mut ev = Evaluator::new(p);
        let mut components = Vec::new();
        for cprime in JetCoordinate::enumerate(self.n) {
            let img = self.image(cprime);
            let mut acc = Rational::zero();
            for (c, coeff) in v.components() {
                let d = img.partial(*c);
                if d.is_zero_const() {
                    continue;
                }
                acc += ev.eval(&d)? * coeff;
            }
            if !acc.is_zero() {
                components.push((cprime, acc));
            }
        }
        Ok(TangentVector::from_components(components))
    }

    /// Exact value of the pulled-back form at a point without materializing
    /// the substitution: `(F*α)_p(v…) = α_{F(p)}(dF_p v…)`.
    pub fn pullback_value_at(
        &self,
        f: &DiffForm,
        p: &JetPoint,
        vectors: &[TangentVector],
    ) -> Result<Rational, crate::forms::FormError> {
        let image_point = self.apply_point(p)?;
        let pushed: Vec<TangentVector> = vectors
            .iter()
            .map(|v| self.pushforward(p, v))
            .collect::<Result<_, _>>()?;
        f.evaluate(&image_point, &pushed)
    }

    /// Composition `self` after `other`, i.e. the substitution of the map
    /// `underlying(self) ∘ underlying(other)`: pullbacks compose the other
    /// way around, so images of `self` are substituted through `other`.
    pub fn compose(&self, other: &JetSubstitution) -> JetSubstitution {
        let images = JetCoordinate::enumerate(self.n)
            .into_iter()
            .map(|c| (c, other.apply_expr(&self.image(c))))
            .collect();
        JetSubstitution { n: self.n, images }
    }
}

/// The first-jet prolongation of a chart diffeomorphism as a substitution:
/// base coordinates map through `φ`, `y` through two inverse-Jacobian
/// factors, and `y`-jets through the three-factor term plus two Hessian
/// terms of the inverse.
pub fn prolong_diffeo(phi: &PolyDiffeo) -> JetSubstitution {
    let n = phi.n;
    // J̃^a_i = (∂(φ⁻¹)^a/∂x^i) ∘ φ and its Hessian analogue, as expressions
    let mut jt = vec![vec![ScalarExpr::zero(); n]; n];
    let mut ht = vec![vec![vec![ScalarExpr::zero(); n]; n]; n]; // [a][i][k]
    for a in 0..n {
        for i in 1..=n {
            let d = phi.inverse[a].partial(base_var(i));
            jt[a][i - 1] = poly_to_expr(&compose_map(&[d.clone()], &phi.forward)[0]);
            for k in 1..=n {
                let dd = d.partial(base_var(k));
                ht[a][i - 1][k - 1] = poly_to_expr(&compose_map(&[dd], &phi.forward)[0]);
            }
        }
    }
    let y = |i: usize, j: usize| ScalarExpr::coord(JetCoordinate::metric(i + 1, j + 1));
    let yjet = |i: usize, j: usize, k: usize| {
        ScalarExpr::coord(JetCoordinate::metric_jet(i + 1, j + 1, k + 1))
    };

    let mut images = BTreeMap::new();
    for (i, fwd) in phi.forward.iter().enumerate() {
        images.insert(JetCoordinate::base(i + 1), poly_to_expr(fwd));
    }
    for i in 0..n {
        for j in i..n {
            let mut terms = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    terms.push(ScalarExpr::product([
                        y(a, b),
                        jt[a][i].clone(),
                        jt[b][j].clone(),
                    ]));
                }
            }
            images.insert(JetCoordinate::metric(i + 1, j + 1), ScalarExpr::sum(terms));
        }
    }
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                let mut terms = Vec::new();
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            terms.push(ScalarExpr::product([
                                yjet(a, b, c),
                                jt[c][k].clone(),
                                jt[a][i].clone(),
                                jt[b][j].clone(),
                            ]));
                        }
                        terms.push(ScalarExpr::product([
                            y(a, b),
                            jt[b][j].clone(),
                            ht[a][i][k].clone(),
                        ]));
                        terms.push(ScalarExpr::product([
                            y(a, b),
                            jt[a][i].clone(),
                            ht[b][j][k].clone(),
                        ]));
                    }
                }
                images.insert(
                    JetCoordinate::metric_jet(i + 1, j + 1, k + 1),
                    ScalarExpr::sum(terms),
                );
            }
        }
    }
    JetSubstitution { n, images }
}

/// The scaling action `y ↦ s·y`, `y_jet ↦ s·y_jet` for rational `s > 0`.
pub fn scaling_substitution(n: usize, s: &Rational) -> Result<JetSubstitution, ActionError> {
    if *s <= Rational::zero() {
        return Err(ActionError::NonpositiveScale(s.to_string()));
    }
    let mut images = BTreeMap::new();
    for c in JetCoordinate::enumerate(n) {
        match c {
            JetCoordinate::Base(_) => {}
            _ => {
                images.insert(c, ScalarExpr::coord(c).scale(s));
            }
        }
    }
    Ok(JetSubstitution { n, images })
}

/// Gauge-consistent pullback of a connection matrix:
/// `J⁻¹·(F*conn)·J + J⁻¹·dJ`, `J` the forward Jacobian of `φ` in the source
/// coordinates. Equals `conn` exactly when `conn` is invariant under `φ`.
pub fn gauge_pullback_connection(phi: &PolyDiffeo, conn: &MatrixForm) -> MatrixForm {
    let n = phi.n;
    assert_eq!(conn.degree(), 1);
    let subst = prolong_diffeo(phi);
    let jac = phi.jacobian_forward();
    let j_exprs: Vec<Vec<ScalarExpr>> = jac
        .iter()
        .map(|row| row.iter().map(poly_to_expr).collect())
        .collect();
    let j_inv = expr_matrix_inverse(&j_exprs);
    let pulled = subst.apply_matrix(conn);
    let conjugated = pulled.mul_scalars_left(&j_inv).mul_scalars_right(&j_exprs);
    let dj = MatrixForm::from_fn(n, 1, |i, j| DiffForm::scalar(j_exprs[i][j].clone()).dext());
    conjugated.add(&dj.mul_scalars_left(&j_inv))
}

/// Same gauge transport for the curvature (no inhomogeneous term):
/// `J⁻¹·(F*curv)·J`.
pub fn gauge_pullback_curvature(phi: &PolyDiffeo, curv: &MatrixForm) -> MatrixForm {
    let subst = prolong_diffeo(phi);
    let jac = phi.jacobian_forward();
    let j_exprs: Vec<Vec<ScalarExpr>> = jac
        .iter()
        .map(|row| row.iter().map(poly_to_expr).collect())
        .collect();
    let j_inv = expr_matrix_inverse(&j_exprs);
    subst
        .apply_matrix(curv)
        .mul_scalars_left(&j_inv)
        .mul_scalars_right(&j_exprs)
}

/// A polynomial vector field on the chart.
#[derive(Clone, Debug)]
pub struct VectorFieldPoly {
    n: usize,
    pub components: Vec<Poly>,
}

impl VectorFieldPoly {
    pub fn new(n: usize, components: Vec<Poly>) -> Result<VectorFieldPoly, ActionError> {
        if components.len() != n {
            return Err(ActionError::WrongArity {
                n,
                got: components.len(),
            });
        }
        Ok(VectorFieldPoly { n, components })
    }
}

/// The lift of a vector field to the bundle of metrics, over the frame
/// `{∂x^i, ∂y_ij (i ≤ j)}`:
/// `X^i ∂x^i − Σ_{i≤j} (∂X^a/∂x^i y_aj + ∂X^a/∂x^j y_ai) ∂y_ij`.
pub struct LiftedVectorField {
    pub base: Vec<ScalarExpr>,
    pub metric: BTreeMap<(usize, usize), ScalarExpr>,
}

pub fn lift_vector_field(x: &VectorFieldPoly) -> LiftedVectorField {
    let n = x.n;
    let base: Vec<ScalarExpr> = x.components.iter().map(poly_to_expr).collect();
    let mut metric = BTreeMap::new();
    for i in 1..=n {
        for j in i..=n {
            let mut terms = Vec::new();
            for a in 1..=n {
                let da_i = poly_to_expr(&x.components[a - 1].partial(base_var(i)));
                let da_j = poly_to_expr(&x.components[a - 1].partial(base_var(j)));
                terms.push(ScalarExpr::product([
                    da_i,
                    ScalarExpr::coord(JetCoordinate::metric(a, j)),
                ]));
                terms.push(ScalarExpr::product([
                    da_j,
                    ScalarExpr::coord(JetCoordinate::metric(a, i)),
                ]));
            }
            metric.insert((i, j), ScalarExpr::sum(terms).neg());
        }
    }
    LiftedVectorField { base, metric }
}

/// A polynomial metric on the chart: symmetric matrix of polynomials in `x`,
/// positive definite at its declared sample points.
#[derive(Clone, Debug)]
pub struct MetricSection {
    n: usize,
    pub name: String,
    entries: Vec<Vec<Poly>>,
    sample_points: Vec<Vec<Rational>>,
}

impl MetricSection {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        entries: Vec<Vec<Poly>>,
        sample_points: Vec<Vec<Rational>>,
    ) -> Result<MetricSection, ActionError> {
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(ActionError::WrongArity {
                n,
                got: entries.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                assert_eq!(entries[i][j], entries[j][i], "metric must be symmetric");
            }
        }
        let section = MetricSection {
            n,
            name: name.into(),
            entries,
            sample_points,
        };
        for (idx, x) in section.sample_points.iter().enumerate() {
            let m = section.value_at(x);
            for k in 1..=n {
                let minor: Vec<Vec<Rational>> = (0..k).map(|r| m[r][0..k].to_vec()).collect();
                if det_rational(&minor) <= Rational::zero() {
                    return Err(ActionError::SingularMetric(idx));
                }
            }
        }
        Ok(section)
    }

    pub fn euclidean(n: usize, sample_points: Vec<Vec<Rational>>) -> MetricSection {
        let entries: Vec<Vec<Poly>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Poly::one()
                        } else {
                            Poly::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        MetricSection::new("euclidean", n, entries, sample_points).expect("flat metric")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i][j]
    }

    pub fn sample_points(&self) -> &[Vec<Rational>] {
        &self.sample_points
    }

    pub fn value_at(&self, x: &[Rational]) -> Vec<Vec<Rational>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| eval_poly_at(&self.entries[i][j], x))
                    .collect()
            })
            .collect()
    }

    /// The jet of the section at a base point, as a jet-space point.
    pub fn jet_at(&self, x: &[Rational]) -> Result<JetPoint, ActionError> {
        let mut assignments = Vec::new();
        for (i, xi) in x.iter().enumerate() {
            assignments.push((JetCoordinate::base(i + 1), xi.clone()));
        }
        for i in 1..=self.n {
            for j in i..=self.n {
                assignments.push((
                    JetCoordinate::metric(i, j),
                    eval_poly_at(&self.entries[i - 1][j - 1], x),
                ));
                for k in 1..=self.n {
                    assignments.push((
                        JetCoordinate::metric_jet(i, j, k),
                        eval_poly_at(&self.entries[i - 1][j - 1].partial(base_var(k)), x),
                    ));
                }
            }
        }
        JetPoint::from_assignments(self.n, assignments)
            .map_err(|_| ActionError::SingularMetric(usize::MAX))
    }

    pub fn from_json(v: &serde_json::Value) -> Result<MetricSection, ActionError> {
        let n = v
            .get("n")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| ActionError::BadPolynomial("missing n".into()))? as usize;
        let name = v
            .get("name")
            .and_then(|x| x.as_str())
            .unwrap_or("metric")
            .to_string();
        let rows = v
            .get("entries")
            .and_then(|x| x.as_array())
            .ok_or_else(|| ActionError::BadPolynomial("missing entries".into()))?;
        let mut entries = Vec::new();
        for row in rows {
            let row = row
                .as_array()
                .ok_or_else(|| ActionError::BadPolynomial("entries must be a matrix".into()))?;
            entries.push(
                row.iter()
                    .map(|p| poly_from_json(n, p))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        let sample_points = default_sample_points(n);
        MetricSection::new(name, n, entries, sample_points)
    }
}

/// Small deterministic grid of base points used when none are declared.
pub fn default_sample_points(n: usize) -> Vec<Vec<Rational>> {
    let vals = [rat_int(0), rat_int(1), rat_int(-1), crate::rational::rat(1, 2), rat_int(2)];
    let mut out = Vec::new();
    for (k, v) in vals.iter().enumerate() {
        let mut x = vec![rat_int(0); n];
        x[0] = v.clone();
        if n > 1 {
            x[1] = vals[(k + 1) % vals.len()].clone();
        }
        out.push(x);
    }
    for k in 0..5 {
        let x: Vec<Rational> = (0..n)
            .map(|i| crate::rational::rat((k as i64 + i as i64) % 3 - 1, 2 + i as i64))
            .collect();
        out.push(x);
    }
    out.dedup();
    out
}

/// Substitution of the holonomic section `j¹g`: `y_ij ↦ g_ij(x)`,
/// `y_ij,k ↦ ∂_k g_ij(x)`; covectors follow by exterior differentiation of
/// the images, so `dy_ij ↦ Σ ∂_k g_ij dx^k` and `dy_ij,k ↦ Σ ∂²g dx`.
pub fn holonomic_substitution(g: &MetricSection) -> JetSubstitution {
    let n = g.n;
    let mut images = BTreeMap::new();
    for i in 1..=n {
        for j in i..=n {
            images.insert(
                JetCoordinate::metric(i, j),
                poly_to_expr(g.entry(i - 1, j - 1)),
            );
            for k in 1..=n {
                images.insert(
                    JetCoordinate::metric_jet(i, j, k),
                    poly_to_expr(&g.entry(i - 1, j - 1).partial(base_var(k))),
                );
            }
        }
    }
    JetSubstitution { n, images }
}

pub fn holonomic_pullback(g: &MetricSection, f: &DiffForm) -> DiffForm {
    holonomic_substitution(g).apply_form(f)
}

/// Classical chart-level Levi-Civita data of one metric: the textbook
/// formulas applied to `g(x)` directly. This is the independent oracle the
/// universal objects are compared against after holonomic pullback.
pub struct ClassicalGeometry {
    pub n: usize,
    /// `Γ^i_jk(x)` as expressions in the base coordinates
    pub gamma: Vec<Vec<Vec<ScalarExpr>>>,
    /// `ω^i_j = Γ^i_jk dx^k`
    pub omega: MatrixForm,
    /// `R = dω + ω∧ω`
    pub curvature: MatrixForm,
    g_exprs: Vec<Vec<ScalarExpr>>,
    det_expr: ScalarExpr,
}

pub fn classical_levi_civita(g: &MetricSection) -> ClassicalGeometry {
    let n = g.n;
    let g_exprs: Vec<Vec<ScalarExpr>> = (0..n)
        .map(|i| (0..n).map(|j| poly_to_expr(g.entry(i, j))).collect())
        .collect();
    let g_inv = expr_matrix_inverse(&g_exprs);
    let det_expr = crate::expr::expr_matrix_det(&g_exprs);
    let dg = |a: usize, b: usize, k: usize| poly_to_expr(&g.entry(a, b).partial(base_var(k)));
    let mut gamma = vec![vec![vec![ScalarExpr::zero(); n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut terms = Vec::new();
                for a in 0..n {
                    let bracket = ScalarExpr::sum([
                        dg(a, j, k + 1),
                        dg(a, k, j + 1),
                        dg(j, k, a + 1).neg(),
                    ]);
                    terms.push(ScalarExpr::product([g_inv[i][a].clone(), bracket]));
                }
                gamma[i][j][k] = ScalarExpr::sum(terms).scale(&crate::rational::rat(1, 2));
            }
        }
    }
    let omega = MatrixForm::from_fn(n, 1, |i, j| {
        let mut acc = DiffForm::zero(1);
        for k in 0..n {
            acc = acc.add(&DiffForm::basis(CovectorBasis::dx(k + 1)).scale(&gamma[i][j][k]));
        }
        acc
    });
    let curvature = omega.dext().add(&omega.mat_wedge(&omega).expect("square"));
    ClassicalGeometry {
        n,
        gamma,
        omega,
        curvature,
        g_exprs,
    det_expr,
    }
}

impl ClassicalGeometry {
    /// Christoffel values at a base point.
    pub fn christoffels_at(
        &self,
        x: &[Rational],
    ) -> Result<Vec<Vec<Vec<Rational>>>, crate::expr::EvalError> {
        let p = base_jet_point(self.n, x);
        let mut ev = Evaluator::new(&p);
        let mut out = vec![vec![vec![Rational::zero(); self.n]; self.n]; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..self.n {
                    out[i][j][k] = ev.eval(&self.gamma[i][j][k])?;
                }
            }
        }
        Ok(out)
    }

    /// `R^i_j(∂x^k, ∂x^l)` values at a base point.
    pub fn curvature_at(
        &self,
        x: &[Rational],
        k: usize,
        l: usize,
    ) -> Result<Vec<Vec<Rational>>, crate::forms::FormError> {
        let p = base_jet_point(self.n, x);
        let vs = [
            TangentVector::coordinate(JetCoordinate::base(k)),
            TangentVector::coordinate(JetCoordinate::base(l)),
        ];
        self.curvature.evaluate(&p, &vs)
    }

    /// Gauss curvature `K = (g_{1a} R^a_2)(∂x¹, ∂x²) / det g` for `n = 2`.
    pub fn gauss_curvature_at(&self, x: &[Rational]) -> Result<Rational, crate::forms::FormError> {
        assert_eq!(self.n, 2);
        let p = base_jet_point(2, x);
        let mut ev = Evaluator::new(&p);
        let vs = [
            TangentVector::coordinate(JetCoordinate::base(1)),
            TangentVector::coordinate(JetCoordinate::base(2)),
        ];
        let mut lowered = Rational::zero();
        for a in 0..2 {
            let r = self.curvature.entry(a, 1).evaluate_with(&mut ev, &vs)?;
            lowered += ev.eval(&self.g_exprs[0][a]).map_err(crate::forms::FormError::Eval)? * r;
        }
        let det = ev
            .eval(&self.det_expr)
            .map_err(crate::forms::FormError::Eval)?;
        Ok(lowered / det)
    }
}

/// A jet point carrying only base-coordinate data (normal elsewhere); forms
/// living in `dx` with `x`-dependent coefficients evaluate there.
pub fn base_jet_point(n: usize, x: &[Rational]) -> JetPoint {
    let assignments: Vec<(JetCoordinate, Rational)> = x
        .iter()
        .enumerate()
        .map(|(i, v)| (JetCoordinate::base(i + 1), v.clone()))
        .collect();
    JetPoint::from_assignments(n, assignments).expect("normal metric block")
}

/// The built-in polynomial metric family (≥ 5 per dimension).
pub fn builtin_metrics(n: usize) -> Vec<MetricSection> {
    let pts = default_sample_points(n);
    let x = |i: usize| Poly::var(base_var(i));
    let c = |v: i64| Poly::constant(rat_int(v));
    let mut out = vec![MetricSection::euclidean(n, pts.clone())];
    match n {
        2 => {
            let diag =
                |name: &str, a: Poly, d: Poly| -> MetricSection {
                    MetricSection::new(
                        name,
                        2,
                        vec![vec![a.clone(), Poly::zero()], vec![Poly::zero(), d.clone()]],
                        pts.clone(),
                    )
                    .expect("diagonal metric")
                };
            // 1 + (x¹)² in the second slot: the running example
            out.push(diag("parabolic", c(1), c(1).add(&x(1).pow(2))));
            out.push(diag("swapped", c(1).add(&x(2).pow(2)), c(2)));
            out.push(diag("both", c(1).add(&x(1).pow(2)), c(1).add(&x(2).pow(2))));
            // off-diagonal, positive definite everywhere: det = 5/4 + x²
            let half_x = x(1).scale(&crate::rational::rat(1, 2));
            out.push(
                MetricSection::new(
                    "sheared",
                    2,
                    vec![
                        vec![c(1).add(&c(1).scale(&crate::rational::rat(1, 4))), half_x.clone()],
                        vec![half_x, c(1).add(&x(1).pow(2))],
                    ],
                    pts.clone(),
                )
                .expect("pd metric"),
            );
            out.push(diag("cubic", c(1), c(1).add(&x(1).pow(2).mul(&x(1).pow(0))).add(&x(2).pow(2))));
        }
        3 => {
            let diag3 = |name: &str, a: Poly, b: Poly, d: Poly| -> MetricSection {
                MetricSection::new(
                    name,
                    3,
                    vec![
                        vec![a.clone(), Poly::zero(), Poly::zero()],
                        vec![Poly::zero(), b.clone(), Poly::zero()],
                        vec![Poly::zero(), Poly::zero(), d.clone()],
                    ],
                    pts.clone(),
                )
                .expect("diagonal metric")
            };
            out.push(diag3("parabolic", c(1), c(1).add(&x(1).pow(2)), c(1)));
            out.push(diag3(
                "waves",
                c(1).add(&x(2).pow(2)),
                c(1),
                c(1).add(&x(3).pow(2)),
            ));
            out.push(diag3("scaled", c(2), c(1).add(&x(1).pow(2)), c(3)));
            let half_x = x(1).scale(&crate::rational::rat(1, 2));
            out.push(
                MetricSection::new(
                    "sheared",
                    3,
                    vec![
                        vec![c(1), half_x.clone(), Poly::zero()],
                        vec![half_x, c(1).add(&x(1).pow(2)), Poly::zero()],
                        vec![Poly::zero(), Poly::zero(), c(1)],
                    ],
                    pts.clone(),
                )
                .expect("pd metric"),
            );
        }
        4 => {
            let mut entries: Vec<Vec<Poly>> = (0..4)
                .map(|i| {
                    (0..4)
                        .map(|j| if i == j { Poly::one() } else { Poly::zero() })
                        .collect()
                })
                .collect();
            entries[1][1] = c(1).add(&x(1).pow(2));
            out.push(
                MetricSection::new("parabolic", 4, entries, pts.clone()).expect("pd metric"),
            );
        }
        _ => {}
    }
    out
}

/// The built-in diffeomorphism family: affine with `det > 0` and `det < 0`,
/// shears, and compositions (≥ 10 for n = 2).
pub fn builtin_diffeos(n: usize) -> Vec<PolyDiffeo> {
    let mut out = vec![PolyDiffeo::identity(n)];
    let x = |i: usize| Poly::var(base_var(i));
    match n {
        2 => {
            let rot = PolyDiffeo::affine(
                "rotation-3-4-5",
                &[
                    vec![crate::rational::rat(3, 5), crate::rational::rat(-4, 5)],
                    vec![crate::rational::rat(4, 5), crate::rational::rat(3, 5)],
                ],
                &[rat_int(0), rat_int(0)],
            )
            .expect("rotation");
            let reflect = PolyDiffeo::affine(
                "reflection",
                &[vec![rat_int(-1), rat_int(0)], vec![rat_int(0), rat_int(1)]],
                &[rat_int(0), rat_int(0)],
            )
            .expect("reflection");
            let stretch = PolyDiffeo::affine(
                "stretch",
                &[
                    vec![rat_int(2), rat_int(0)],
                    vec![rat_int(0), crate::rational::rat(1, 3)],
                ],
                &[rat_int(0), rat_int(0)],
            )
            .expect("stretch");
            let swap = PolyDiffeo::affine(
                "swap",
                &[vec![rat_int(0), rat_int(1)], vec![rat_int(1), rat_int(0)]],
                &[rat_int(0), rat_int(0)],
            )
            .expect("swap");
            let translate = PolyDiffeo::affine(
                "translate",
                &[vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]],
                &[crate::rational::rat(1, 2), rat_int(-1)],
            )
            .expect("translate");
            let shear_quad =
                PolyDiffeo::shear("shear-quadratic", 2, 2, x(1).pow(2)).expect("shear");
            let shear_other =
                PolyDiffeo::shear("shear-other", 2, 1, x(2).pow(2)).expect("shear");
            let shear_cubic =
                PolyDiffeo::shear("shear-cubic", 2, 2, x(1).pow(3)).expect("shear");
            let comp1 = rot.compose(&shear_quad).expect("composition");
            let comp2 = shear_quad.compose(&translate).expect("composition");
            let comp3 = reflect.compose(&shear_other).expect("composition");
            out.extend([
                rot,
                reflect,
                stretch,
                swap,
                translate,
                shear_quad,
                shear_other,
                shear_cubic,
                comp1,
                comp2,
                comp3,
            ]);
        }
        3 => {
            let rot = PolyDiffeo::affine(
                "rotation-3-4-5-xy",
                &[
                    vec![crate::rational::rat(3, 5), crate::rational::rat(-4, 5), rat_int(0)],
                    vec![crate::rational::rat(4, 5), crate::rational::rat(3, 5), rat_int(0)],
                    vec![rat_int(0), rat_int(0), rat_int(1)],
                ],
                &[rat_int(0), rat_int(0), rat_int(0)],
            )
            .expect("rotation");
            let reflect = PolyDiffeo::affine(
                "reflection",
                &[
                    vec![rat_int(-1), rat_int(0), rat_int(0)],
                    vec![rat_int(0), rat_int(1), rat_int(0)],
                    vec![rat_int(0), rat_int(0), rat_int(1)],
                ],
                &[rat_int(0), rat_int(0), rat_int(0)],
            )
            .expect("reflection");
            let shear = PolyDiffeo::shear("shear-quadratic", 3, 3, x(1).pow(2)).expect("shear");
            let permute = PolyDiffeo::affine(
                "cycle",
                &[
                    vec![rat_int(0), rat_int(1), rat_int(0)],
                    vec![rat_int(0), rat_int(0), rat_int(1)],
                    vec![rat_int(1), rat_int(0), rat_int(0)],
                ],
                &[rat_int(0), rat_int(0), rat_int(0)],
            )
            .expect("cycle");
            let comp = rot.compose(&shear).expect("composition");
            out.extend([rot, reflect, shear, permute, comp]);
        }
        4 => {
            let reflect = PolyDiffeo::affine(
                "reflection",
                &[
                    vec![rat_int(-1), rat_int(0), rat_int(0), rat_int(0)],
                    vec![rat_int(0), rat_int(1), rat_int(0), rat_int(0)],
                    vec![rat_int(0), rat_int(0), rat_int(1), rat_int(0)],
                    vec![rat_int(0), rat_int(0), rat_int(0), rat_int(1)],
                ],
                &[rat_int(0), rat_int(0), rat_int(0), rat_int(0)],
            )
            .expect("reflection");
            let shear = PolyDiffeo::shear("shear-quadratic", 4, 4, x(1).pow(2)).expect("shear");
            out.extend([reflect, shear]);
        }
        _ => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_context, matrix_equal, CheckMode};
    use crate::rational::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn x(i: usize) -> Poly {
        Poly::var(base_var(i))
    }

    #[test]
    fn diffeo_validation() {
        // broken inverse is rejected
        let bad = PolyDiffeo::new(
            "bad",
            2,
            vec![x(1).add(&x(2)), x(2)],
            vec![x(1), x(2)],
        );
        assert!(matches!(bad, Err(ActionError::InvalidInverse(_))));
        // degree cap
        let too_high = PolyDiffeo::shear("quartic", 2, 2, x(1).pow(4));
        assert!(matches!(too_high, Err(ActionError::DegreeTooHigh(4))));
    }

    #[test]
    fn affine_prolongation_has_no_hessian_terms() {
        // for affine φ the jet image is linear in the jets: zero jets map to
        // zero jets
        let rot = &builtin_diffeos(2)[1];
        let subst = prolong_diffeo(rot);
        let p = JetPoint::normal(2);
        for i in 1..=2 {
            for j in i..=2 {
                for k in 1..=2 {
                    let img = subst.image(JetCoordinate::metric_jet(i, j, k));
                    assert_eq!(img.eval(&p).unwrap(), rat_int(0));
                }
            }
        }
    }

    #[test]
    fn shear_prolongation_hessian_value() {
        // φ(x¹,x²) = (x¹, x² + (x¹)²) at x = 0, y = δ, jets 0:
        // y_12,1 ∘ φ̄ = −2
        let shear = PolyDiffeo::shear("shear", 2, 2, x(1).pow(2)).unwrap();
        let subst = prolong_diffeo(&shear);
        let p = JetPoint::normal(2);
        let img = subst.image(JetCoordinate::metric_jet(1, 2, 1));
        assert_eq!(img.eval(&p).unwrap(), rat_int(-2));
    }

    #[test]
    fn rotation_preserves_metric_determinant() {
        let rot = PolyDiffeo::affine(
            "rot",
            &[vec![rat(3, 5), rat(-4, 5)], vec![rat(4, 5), rat(3, 5)]],
            &[rat_int(0), rat_int(0)],
        )
        .unwrap();
        let subst = prolong_diffeo(&rot);
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..10 {
            let p = JetPoint::random(2, &mut rng);
            let q = subst.apply_point(&p).unwrap();
            let det_p = det_rational(&p.metric_matrix());
            let det_q = det_rational(&q.metric_matrix());
            assert_eq!(det_p, det_q);
        }
    }

    #[test]
    fn prolongation_is_functorial_at_sample_points() {
        let rot = &builtin_diffeos(2)[1];
        let shear = PolyDiffeo::shear("shear", 2, 2, x(1).pow(2)).unwrap();
        let composed = rot.compose(&shear).unwrap();
        let s_composed = prolong_diffeo(&composed);
        let s_chain = prolong_diffeo(rot).compose(&prolong_diffeo(&shear));
        let id = prolong_diffeo(&PolyDiffeo::identity(2));
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        for _ in 0..10 {
            let p = JetPoint::random(2, &mut rng);
            assert_eq!(
                s_composed.apply_point(&p).unwrap(),
                s_chain.apply_point(&p).unwrap()
            );
            assert_eq!(id.apply_point(&p).unwrap(), p);
        }
    }

    #[test]
    fn pullback_of_base_covector_under_affine() {
        // F*(dx^i) = Σ_j A^i_j dx^j
        let a = vec![vec![rat_int(2), rat_int(1)], vec![rat_int(0), rat_int(1)]];
        let phi = PolyDiffeo::affine("aff", &a, &[rat_int(0), rat_int(0)]).unwrap();
        let subst = prolong_diffeo(&phi);
        for i in 1..=2 {
            let pulled = subst.apply_form(&DiffForm::basis(CovectorBasis::dx(i)));
            let mut expect = DiffForm::zero(1);
            for j in 1..=2 {
                expect = expect.add(
                    &DiffForm::basis(CovectorBasis::dx(j))
                        .scale_rat(&a[i - 1][j - 1]),
                );
            }
            assert!(pulled.eq_exact(&expect));
        }
    }

    #[test]
    fn pullback_commutes_with_dext() {
        let shear = PolyDiffeo::shear("shear", 2, 2, x(1).pow(2)).unwrap();
        let subst = prolong_diffeo(&shear);
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        for _ in 0..20 {
            let f = crate::forms::random_form(2, rng.gen_range(0..=1), true, &mut rng);
            let lhs = subst.apply_form(&f).dext();
            let rhs = subst.apply_form(&f.dext());
            let p = JetPoint::random(2, &mut rng);
            let vs: Vec<TangentVector> = (0..lhs.degree())
                .map(|_| TangentVector::random(2, &mut rng))
                .collect();
            assert_eq!(
                lhs.evaluate(&p, &vs).unwrap(),
                rhs.evaluate(&p, &vs).unwrap()
            );
        }
    }

    #[test]
    fn pullback_value_matches_materialized_pullback() {
        let shear = PolyDiffeo::shear("shear", 2, 2, x(1).pow(2)).unwrap();
        let subst = prolong_diffeo(&shear);
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        for _ in 0..10 {
            let f = crate::forms::random_form(2, 2, true, &mut rng);
            let pulled = subst.apply_form(&f);
            let p = JetPoint::random(2, &mut rng);
            let vs: Vec<TangentVector> =
                (0..2).map(|_| TangentVector::random(2, &mut rng)).collect();
            assert_eq!(
                pulled.evaluate(&p, &vs).unwrap(),
                subst.pullback_value_at(&f, &p, &vs).unwrap()
            );
        }
    }

    #[test]
    fn structure_form_is_tensorial() {
        // Naturality of θ in components: θ_ij = Σ_ab (F̄*θ_ab)·J^a_i·J^b_j
        // with J = Dφ at the source point (both value legs twist by J).
        let ctx = build_context(2).unwrap();
        for phi in [
            PolyDiffeo::shear("shear", 2, 2, x(1).pow(2)).unwrap(),
            PolyDiffeo::affine(
                "rot",
                &[vec![rat(3, 5), rat(-4, 5)], vec![rat(4, 5), rat(3, 5)]],
                &[rat_int(0), rat_int(0)],
            )
            .unwrap(),
        ] {
            let subst = prolong_diffeo(&phi);
            let jac = phi.jacobian_forward();
            let j_expr: Vec<Vec<ScalarExpr>> = jac
                .iter()
                .map(|row| row.iter().map(poly_to_expr).collect())
                .collect();
            for i in 0..2 {
                for j in 0..2 {
                    let mut twisted = DiffForm::zero(1);
                    for a in 0..2 {
                        for b in 0..2 {
                            twisted = twisted.add(
                                &subst
                                    .apply_form(ctx.theta.entry(a, b))
                                    .scale(&j_expr[a][i])
                                    .scale(&j_expr[b][j]),
                            );
                        }
                    }
                    assert!(twisted.eq_exact(ctx.theta.entry(i, j)), "{}", phi.name);
                }
            }
            // and the pullback keeps the contact ideal: holonomic lifts
            // annihilate the pulled-back structure form
            for g in builtin_metrics(2) {
                for i in 0..2 {
                    for j in 0..2 {
                        let pulled = subst.apply_form(ctx.theta.entry(i, j));
                        let restricted = holonomic_pullback(&g, &pulled);
                        assert!(restricted.is_zero_exact(), "metric {}", g.name);
                    }
                }
            }
        }
    }

    #[test]
    fn gauge_pullback_fixes_universal_connection() {
        let ctx = build_context(2).unwrap();
        // identity: exact no-op
        let id = PolyDiffeo::identity(2);
        let back = gauge_pullback_connection(&id, &ctx.omega_univ);
        assert!(matrix_equal(&back, &ctx.omega_univ, 2, CheckMode::Symbolic));

        // affine (dJ = 0) and shear (dJ ≠ 0): full symbolic invariance
        let rot = PolyDiffeo::affine(
            "rot",
            &[vec![rat(3, 5), rat(-4, 5)], vec![rat(4, 5), rat(3, 5)]],
            &[rat_int(0), rat_int(0)],
        )
        .unwrap();
        let back = gauge_pullback_connection(&rot, &ctx.omega_univ);
        assert!(matrix_equal(&back, &ctx.omega_univ, 2, CheckMode::Symbolic));

        let shear = PolyDiffeo::shear("shear", 2, 2, x(1).pow(2)).unwrap();
        let back = gauge_pullback_connection(&shear, &ctx.omega_univ);
        assert!(matrix_equal(
            &back,
            &ctx.omega_univ,
            2,
            CheckMode::Sampled {
                cases: 20,
                seed: 99
            }
        ));
    }

    #[test]
    fn scaling_action_examples() {
        let ctx = build_context(2).unwrap();
        assert!(matches!(
            scaling_substitution(2, &rat_int(-1)),
            Err(ActionError::NonpositiveScale(_))
        ));
        let id = scaling_substitution(2, &rat_int(1)).unwrap();
        let p = JetPoint::normal(2);
        assert_eq!(id.apply_point(&p).unwrap(), p);

        let s4 = scaling_substitution(2, &rat_int(4)).unwrap();
        // Γ, ϑ, ω fixed; θ and g scale
        for i in 0..2 {
            for j in 0..2 {
                assert!(s4
                    .apply_form(ctx.vartheta.entry(i, j))
                    .eq_exact(ctx.vartheta.entry(i, j)));
                assert!(s4
                    .apply_form(ctx.omega_univ.entry(i, j))
                    .eq_exact(ctx.omega_univ.entry(i, j)));
                assert!(s4
                    .apply_form(ctx.theta.entry(i, j))
                    .eq_exact(&ctx.theta.entry(i, j).scale_rat(&rat_int(4))));
            }
        }
        // ∇^ω g stays zero after scaling; ∇^{ω_hor} g = θ scales by 4
        let nab = crate::geometry::nabla_g(&ctx, &ctx.omega_hor);
        for i in 0..2 {
            for j in 0..2 {
                let scaled = s4.apply_form(nab.entry(i, j));
                assert!(scaled.eq_exact(&ctx.theta.entry(i, j).scale_rat(&rat_int(4))));
            }
        }
        // group action: s·(t·p) = (st)·p
        let s2 = scaling_substitution(2, &rat_int(2)).unwrap();
        let s8 = scaling_substitution(2, &rat_int(8)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        let p = JetPoint::random(2, &mut rng);
        assert_eq!(
            s2.compose(&s4).apply_point(&p).unwrap(),
            s8.apply_point(&p).unwrap()
        );
    }

    #[test]
    fn vector_field_lift_examples() {
        // translation: lift = ∂x¹, no metric components
        let t = VectorFieldPoly::new(2, vec![Poly::one(), Poly::zero()]).unwrap();
        let lift = lift_vector_field(&t);
        assert!(lift.base[0].is_one_const());
        for (_, comp) in lift.metric.iter() {
            assert!(comp.is_zero_exact());
        }

        // X = x¹ ∂x¹: y_11 ↦ −2y_11, y_12 ↦ −y_12, y_22 ↦ 0
        let e = VectorFieldPoly::new(2, vec![x(1), Poly::zero()]).unwrap();
        let lift = lift_vector_field(&e);
        let y11 = ScalarExpr::coord(JetCoordinate::metric(1, 1));
        let y12 = ScalarExpr::coord(JetCoordinate::metric(1, 2));
        assert!(lift.metric[&(1, 1)].eq_exact(&y11.scale(&rat_int(-2))));
        assert!(lift.metric[&(1, 2)].eq_exact(&y12.neg()));
        assert!(lift.metric[&(2, 2)].is_zero_exact());
    }

    #[test]
    fn lift_matches_derivative_of_finite_action() {
        // For X = a·x¹∂x¹ the flow is φ_t = diag(e^{at}, 1); the two-Jacobian
        // action sends y_ij to u^{c_i+c_j}·y_ij with u = e^{−at} and slot
        // exponents c = (1, 0). The t-derivative at 0 comes from the exact
        // u-polynomial derivative and the chain rule du/dt|₀ = −a.
        let a = 3i64;
        let field =
            VectorFieldPoly::new(2, vec![x(1).scale(&rat_int(a)), Poly::zero()]).unwrap();
        let lift = lift_vector_field(&field);
        let slot_exp = [1u32, 0u32];
        const U: u32 = 9_999; // auxiliary flow variable
        for i in 1..=2 {
            for j in i..=2 {
                let u_poly = Poly::var(U).pow(slot_exp[i - 1] + slot_exp[j - 1]);
                // d/dt|₀ (u-power) = p'(1) · (−a)
                let slope = u_poly.partial(U).eval(&|_| rat_int(1)) * rat_int(-a);
                let expect =
                    ScalarExpr::coord(JetCoordinate::metric(i, j)).scale(&slope);
                assert!(lift.metric[&(i, j)].eq_exact(&expect), "y_{i}{j}");
            }
        }
    }

    #[test]
    fn holonomic_pullback_examples() {
        let ctx = build_context(2).unwrap();
        for g in builtin_metrics(2) {
            // contact forms die on holonomic lifts
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        holonomic_pullback(&g, ctx.theta.entry(i, j)).is_zero_exact(),
                        "θ, metric {}",
                        g.name
                    );
                    assert!(
                        holonomic_pullback(&g, ctx.vartheta.entry(i, j)).is_zero_exact(),
                        "ϑ, metric {}",
                        g.name
                    );
                }
            }
            // the universal metric pulls back to the metric itself
            for i in 0..2 {
                for j in 0..2 {
                    let pulled = holonomic_pullback(&g, &DiffForm::scalar(ctx.g[i][j].clone()));
                    let expect = DiffForm::scalar(poly_to_expr(g.entry(i, j)));
                    assert!(pulled.eq_exact(&expect));
                }
            }
        }
    }

    #[test]
    fn classical_oracle_values() {
        // Euclidean: everything vanishes
        let flat = MetricSection::euclidean(2, default_sample_points(2));
        let cls = classical_levi_civita(&flat);
        let gs = cls.christoffels_at(&[rat_int(0), rat_int(0)]).unwrap();
        assert!(gs
            .iter()
            .all(|m| m.iter().all(|r| r.iter().all(|v| v.is_zero()))));

        // g = diag(1, 1 + (x¹)²): Γ²₁₂ = x/(1+x²) = 1/2 at x¹ = 1, Γ¹₂₂ = −x = −1
        let g = &builtin_metrics(2)[1];
        assert_eq!(g.name, "parabolic");
        let cls = classical_levi_civita(g);
        let gs = cls.christoffels_at(&[rat_int(1), rat_int(0)]).unwrap();
        assert_eq!(gs[1][0][1], rat(1, 2));
        assert_eq!(gs[0][1][1], rat_int(-1));
        // K = −1 at the origin
        assert_eq!(
            cls.gauss_curvature_at(&[rat_int(0), rat_int(0)]).unwrap(),
            rat_int(-1)
        );
    }

    #[test]
    fn holonomic_pullback_of_connection_matches_classical() {
        for n in [2usize, 3] {
            let ctx = build_context(n).unwrap();
            for g in builtin_metrics(n) {
                let cls = classical_levi_civita(&g);
                for i in 0..n {
                    for j in 0..n {
                        let pulled = holonomic_pullback(&g, ctx.omega_univ.entry(i, j));
                        assert!(
                            pulled.eq_exact(cls.omega.entry(i, j)),
                            "n={n} metric {} entry ({i},{j})",
                            g.name
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn metric_section_json_round_trip() {
        let g = &builtin_metrics(2)[1];
        let json = serde_json::json!({
            "name": g.name,
            "n": 2,
            "entries": [
                [poly_to_json(2, g.entry(0, 0)), poly_to_json(2, g.entry(0, 1))],
                [poly_to_json(2, g.entry(1, 0)), poly_to_json(2, g.entry(1, 1))],
            ],
        });
        let parsed = MetricSection::from_json(&json).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(parsed.entry(i, j), g.entry(i, j));
            }
        }
    }
}
