//! Universal Pontryagin forms and the Euler (Pfaffian) data of the universal
//! connection, with every identity restated inside rational arithmetic.
//!
//! `det(g)^{−1/2}` is never materialized: the Euler form is the pair
//! `((2π)^{−n/2}, Pf(gΩ), det g)` and each identity involving it is squared
//! or multiplied through by the appropriate power of `det g` first. For
//! `n ≥ 3`, high-degree checks switch from whole-form symbolics to exact
//! evaluation at seeded points (the coefficients stay symbolic; only the
//! contraction with tangent tuples happens pointwise).

use crate::actions::{holonomic_substitution, prolong_diffeo, JetSubstitution, MetricSection, PolyDiffeo};
use crate::coords::{JetCoordinate, JetPoint};
use crate::expr::{Evaluator, ScalarExpr};
use crate::forms::{DiffForm, FormError, TangentVector};
use crate::geometry::{BilinearValuedForm, CheckMode, GeometryContext};
use crate::matrix::{
    char_coeff, k_subsets, permutations_with_sign, pfaffian, wedge_contract_expr,
    wedge_value_with, MatrixForm, MatrixFormError, PrefactoredForm,
};
use crate::rational::{rat_int, Rational};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `E = (2π)^{−n/2} · det_g^{−1/2} · pf_flat`, kept in factored exact form.
#[derive(Clone, Debug)]
pub struct EulerPair {
    pub two_pi_power: i32,
    pub pf_flat: DiffForm,
    pub det_g: ScalarExpr,
}

/// The g-lowered curvature `Ω♭ = g·Ω`; antisymmetric exactly because
/// `∇^ω g = 0`.
pub fn lowered_curvature(ctx: &GeometryContext) -> MatrixForm {
    let lowered = BilinearValuedForm::lower(&ctx.g, &ctx.curvature_univ);
    MatrixForm::from_fn(ctx.n, 2, |i, j| lowered.entry(i, j).clone())
}

/// `Ω♭ + Ω♭ᵀ = 0`, the curvature-level restatement of metric compatibility
/// and the reduction-to-`O(n)` witness.
pub fn verify_lowered_antisymmetric(ctx: &GeometryContext, mode: CheckMode) -> bool {
    let flat = lowered_curvature(ctx);
    crate::geometry::matrix_equal(&flat.transpose(), &flat.neg(), ctx.n, mode)
}

/// The universal k-Pontryagin form `(2π)^{−2k}·e_{2k}(Ω)`, materialized.
pub fn pontryagin(ctx: &GeometryContext, k: usize) -> Result<PrefactoredForm, MatrixFormError> {
    char_coeff(k, &ctx.curvature_univ)
}

/// The Euler data `(Pf(gΩ), det g)` with prefactor `(2π)^{−n/2}`.
pub fn euler(ctx: &GeometryContext) -> Result<EulerPair, MatrixFormError> {
    let n = ctx.n;
    if n % 2 != 0 {
        return Err(MatrixFormError::OddDimension(n));
    }
    let pf_flat = pfaffian(&lowered_curvature(ctx))?;
    Ok(EulerPair {
        two_pi_power: -((n / 2) as i32),
        pf_flat,
        det_g: ctx.det_g.clone(),
    })
}

/// Signed products of curvature entries whose sum is `e_{2k}(Ω)`: one term
/// per (principal 2k-subset, permutation). The evaluation-first backend.
fn char_terms(n: usize, k: usize) -> Vec<(i8, Vec<(usize, usize)>)> {
    let mut out = Vec::new();
    for subset in k_subsets(n, 2 * k) {
        for (sign, perm) in permutations_with_sign(2 * k) {
            let entries: Vec<(usize, usize)> = (0..2 * k)
                .map(|r| (subset[r], subset[perm[r]]))
                .collect();
            out.push((sign, entries));
        }
    }
    out
}

/// Exact value of the rational part `e_{2k}(Ω)` at a point on a `4k`-tuple,
/// without materializing the form.
pub fn pontryagin_value_at(
    ctx: &GeometryContext,
    k: usize,
    p: &JetPoint,
    vectors: &[TangentVector],
) -> Result<Rational, FormError> {
    let mut ev = Evaluator::new(p);
    let mut acc = Rational::zero();
    for (sign, entries) in char_terms(ctx.n, k) {
        let factors: Vec<&DiffForm> = entries
            .iter()
            .map(|&(i, j)| ctx.curvature_univ.entry(i, j))
            .collect();
        acc += wedge_value_with(&factors, &mut ev, vectors)? * rat_int(sign as i64);
    }
    Ok(acc)
}

/// Exact value of `d(e_{2k}(Ω))` at a point on a `(4k+1)`-tuple, by the
/// Leibniz rule over the (even-degree) factors: the entries of `dΩ` are
/// materialized once by the caller, every sample is then pure evaluation.
pub fn pontryagin_dext_value_at(
    ctx: &GeometryContext,
    curvature_differential: &MatrixForm,
    k: usize,
    p: &JetPoint,
    vectors: &[TangentVector],
) -> Result<Rational, FormError> {
    assert_eq!(vectors.len(), 4 * k + 1);
    let mut ev = Evaluator::new(p);
    let n = ctx.n;
    // tabulate every entry on every needed sub-tuple, one walk per entry
    let pair_subsets = k_subsets(vectors.len(), 2);
    let triple_subsets = k_subsets(vectors.len(), 3);
    let mut omega_tab = Vec::with_capacity(n * n);
    let mut domega_tab = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            omega_tab.push(ctx.curvature_univ.entry(i, j).evaluate_on_subsets(
                &mut ev,
                vectors,
                &pair_subsets,
            )?);
            domega_tab.push(curvature_differential.entry(i, j).evaluate_on_subsets(
                &mut ev,
                vectors,
                &triple_subsets,
            )?);
        }
    }
    let pair_idx = subset_index(&pair_subsets);
    let triple_idx = subset_index(&triple_subsets);

    let mut acc = Rational::zero();
    for (sign, entries) in char_terms(n, k) {
        for pos in 0..entries.len() {
            let lookup = |factor: usize, orig: &[usize]| -> Rational {
                let (i, j) = entries[factor];
                if factor == pos {
                    domega_tab[i * n + j][triple_idx[orig]].clone()
                } else {
                    omega_tab[i * n + j][pair_idx[orig]].clone()
                }
            };
            let degrees: Vec<usize> = (0..entries.len())
                .map(|f| if f == pos { 3 } else { 2 })
                .collect();
            let avail: Vec<usize> = (0..vectors.len()).collect();
            acc += shuffle_from_tables(&degrees, &lookup, &avail) * rat_int(sign as i64);
        }
    }
    Ok(acc)
}

fn subset_index(subsets: &[Vec<usize>]) -> std::collections::BTreeMap<Vec<usize>, usize> {
    subsets
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect()
}

/// Shuffle expansion of a wedge of factors whose values on original-index
/// subsets come from precomputed tables.
fn shuffle_from_tables(
    degrees: &[usize],
    lookup: &dyn Fn(usize, &[usize]) -> Rational,
    avail: &[usize],
) -> Rational {
    fn go(
        factor: usize,
        degrees: &[usize],
        lookup: &dyn Fn(usize, &[usize]) -> Rational,
        avail: &[usize],
    ) -> Rational {
        if factor == degrees.len() {
            return Rational::from_integer(1.into());
        }
        let d = degrees[factor];
        let mut acc = Rational::zero();
        for subset in k_subsets(avail.len(), d) {
            let mut parity = 0usize;
            for (slot, &s) in subset.iter().enumerate() {
                parity += s - slot;
            }
            let orig: Vec<usize> = subset.iter().map(|&s| avail[s]).collect();
            let head = lookup(factor, &orig);
            if head.is_zero() {
                continue;
            }
            let remaining: Vec<usize> = avail
                .iter()
                .enumerate()
                .filter(|(idx, _)| !subset.contains(idx))
                .map(|(_, &v)| v)
                .collect();
            let tail = go(factor + 1, degrees, lookup, &remaining);
            let term = head * tail;
            acc += if parity % 2 == 0 { term } else { -term };
        }
        acc
    }
    go(0, degrees, lookup, avail)
}

/// `d p_k(Ω) = 0`.
pub fn check_closed_pontryagin(ctx: &GeometryContext, k: usize, mode: CheckMode) -> bool {
    match mode {
        CheckMode::Symbolic => match pontryagin(ctx, k) {
            Ok(p) => p.form.dext().is_zero_exact(),
            Err(_) => false,
        },
        CheckMode::Sampled { cases, seed } => {
            let d_curv = ctx.curvature_univ.dext();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..cases {
                let p = JetPoint::random(ctx.n, &mut rng);
                let vs: Vec<TangentVector> = (0..4 * k + 1)
                    .map(|_| TangentVector::random(ctx.n, &mut rng))
                    .collect();
                match pontryagin_dext_value_at(ctx, &d_curv, k, &p, &vs) {
                    Ok(v) if v.is_zero() => {}
                    _ => return false,
                }
            }
            true
        }
    }
}

/// Closedness of the Euler form with the square root eliminated:
/// `2·det g·d(Pf♭) = d(det g) ∧ Pf♭`.
pub fn check_euler_closed(ctx: &GeometryContext) -> Result<bool, MatrixFormError> {
    let pair = euler(ctx)?;
    Ok(euler_closed_identity_holds(&pair))
}

pub fn euler_closed_identity_holds(pair: &EulerPair) -> bool {
    let lhs = pair
        .pf_flat
        .dext()
        .scale(&pair.det_g)
        .scale_rat(&rat_int(2));
    let rhs = DiffForm::scalar(pair.det_g.clone())
        .dext()
        .wedge(&pair.pf_flat);
    lhs.eq_exact(&rhs)
}

/// `E ∧ E = p_{n/2}(Ω)` in rational form: `Pf♭ ∧ Pf♭ = det g · e_n(Ω)`
/// (the square kills the root; the `(2π)` powers match by construction).
pub fn check_euler_square(ctx: &GeometryContext, mode: CheckMode) -> Result<bool, MatrixFormError> {
    let n = ctx.n;
    if n % 2 != 0 {
        return Err(MatrixFormError::OddDimension(n));
    }
    match mode {
        CheckMode::Symbolic => {
            let pair = euler(ctx)?;
            let lhs = pair.pf_flat.wedge(&pair.pf_flat);
            let rhs = crate::matrix::principal_minor_sum(&ctx.curvature_univ, n)
                .scale(&ctx.det_g);
            Ok(lhs.eq_exact(&rhs))
        }
        CheckMode::Sampled { cases, seed } => {
            let flat = lowered_curvature(ctx);
            let matchings = pfaffian_matchings(n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..cases {
                let p = JetPoint::random(n, &mut rng);
                let vs: Vec<TangentVector> = (0..2 * n)
                    .map(|_| TangentVector::random(n, &mut rng))
                    .collect();
                let mut ev = Evaluator::new(&p);
                let pair_subsets = k_subsets(vs.len(), 2);
                let pair_idx = subset_index(&pair_subsets);
                let mut flat_tab = Vec::with_capacity(n * n);
                let mut omega_tab = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        flat_tab.push(
                            flat.entry(i, j)
                                .evaluate_on_subsets(&mut ev, &vs, &pair_subsets)
                                .map_err(MatrixFormError::Form)?,
                        );
                        omega_tab.push(
                            ctx.curvature_univ
                                .entry(i, j)
                                .evaluate_on_subsets(&mut ev, &vs, &pair_subsets)
                                .map_err(MatrixFormError::Form)?,
                        );
                    }
                }
                let avail: Vec<usize> = (0..vs.len()).collect();
                let degrees = vec![2usize; n];
                // Pf∧Pf without materializing: double sum over matchings
                let mut lhs = Rational::zero();
                for (s1, m1) in &matchings {
                    for (s2, m2) in &matchings {
                        let pairs: Vec<(usize, usize)> =
                            m1.iter().chain(m2.iter()).copied().collect();
                        let lookup = |factor: usize, orig: &[usize]| -> Rational {
                            let (i, j) = pairs[factor];
                            flat_tab[i * n + j][pair_idx[orig]].clone()
                        };
                        lhs += shuffle_from_tables(&degrees, &lookup, &avail)
                            * rat_int((s1 * s2) as i64);
                    }
                }
                let mut rhs = Rational::zero();
                for (sign, entries) in char_terms(n, n / 2) {
                    let lookup = |factor: usize, orig: &[usize]| -> Rational {
                        let (i, j) = entries[factor];
                        omega_tab[i * n + j][pair_idx[orig]].clone()
                    };
                    rhs += shuffle_from_tables(&degrees, &lookup, &avail)
                        * rat_int(sign as i64);
                }
                let det = ev
                    .eval(&ctx.det_g)
                    .map_err(|e| MatrixFormError::Form(FormError::Eval(e)))?;
                if lhs != det * rhs {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

fn pfaffian_matchings(n: usize) -> Vec<(i8, Vec<(usize, usize)>)> {
    fn go(
        remaining: &mut Vec<usize>,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<(i8, Vec<(usize, usize)>)>,
    ) {
        if remaining.is_empty() {
            let flat: Vec<usize> = current.iter().flat_map(|&(a, b)| [a, b]).collect();
            out.push((crate::rational::permutation_sign(&flat), current.clone()));
            return;
        }
        let first = remaining[0];
        for idx in 1..remaining.len() {
            let partner = remaining[idx];
            let mut rest: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&x| x != first && x != partner)
                .collect();
            current.push((first, partner));
            go(&mut rest, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

/// Under an orientation-reversing `φ` the Pfaffian data flips sign:
/// `φ̄*(Pf♭) = det(Dφ)⁻¹ · Pf♭` (so `E ↦ sign(det Dφ)·E`). Checked as
/// stated for affine maps, whose Jacobian determinant is constant.
pub fn check_euler_sign_flip(
    ctx: &GeometryContext,
    phi: &PolyDiffeo,
    mode: CheckMode,
) -> Result<bool, MatrixFormError> {
    let pair = euler(ctx)?;
    let det_j = phi.jacobian_det_at(&vec![rat_int(0); ctx.n]);
    let subst = prolong_diffeo(phi);
    let expected = pair
        .pf_flat
        .scale_rat(&(Rational::from_integer(1.into()) / det_j));
    match mode {
        CheckMode::Symbolic => {
            let pulled = subst.apply_form(&pair.pf_flat);
            Ok(pulled.eq_exact(&expected))
        }
        CheckMode::Sampled { cases, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..cases {
                let p = JetPoint::random(ctx.n, &mut rng);
                let vs: Vec<TangentVector> = (0..ctx.n)
                    .map(|_| TangentVector::random(ctx.n, &mut rng))
                    .collect();
                let lhs = subst
                    .pullback_value_at(&pair.pf_flat, &p, &vs)
                    .map_err(MatrixFormError::Form)?;
                let rhs = expected.evaluate(&p, &vs).map_err(MatrixFormError::Form)?;
                if lhs != rhs {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Diffeomorphism invariance of the Pontryagin rational part at matched
/// sample points: `(φ̄*e_{2k}(Ω))(p; v…) = e_{2k}(Ω)(p; v…)`, the left side
/// evaluated through the image point and pushed vectors.
pub fn check_pontryagin_invariance(
    ctx: &GeometryContext,
    phi: &PolyDiffeo,
    k: usize,
    cases: usize,
    seed: u64,
) -> Result<bool, FormError> {
    let subst = prolong_diffeo(phi);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let p = JetPoint::random(ctx.n, &mut rng);
        let vs: Vec<TangentVector> = (0..4 * k)
            .map(|_| TangentVector::random(ctx.n, &mut rng))
            .collect();
        let image = subst.apply_point(&p).map_err(FormError::Eval)?;
        let pushed: Vec<TangentVector> = vs
            .iter()
            .map(|v| subst.pushforward(&p, v))
            .collect::<Result<_, _>>()
            .map_err(FormError::Eval)?;
        let lhs = pontryagin_value_at(ctx, k, &image, &pushed)?;
        let rhs = pontryagin_value_at(ctx, k, &p, &vs)?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Scaling invariance of the Pontryagin rational part, symbolically: the
/// substitution `y ↦ s·y` fixes `e_{2k}(Ω)` because it fixes `ω`.
pub fn check_pontryagin_scaling(
    ctx: &GeometryContext,
    s: &Rational,
    k: usize,
) -> Result<bool, crate::actions::ActionError> {
    let subst = crate::actions::scaling_substitution(ctx.n, s)?;
    let p = pontryagin(ctx, k).expect("k in range");
    Ok(subst.apply_form(&p.form).eq_exact(&p.form))
}

/// Holonomic pullback of the universal curvature against the classical
/// curvature of the metric: entrywise equality of `dx`-forms.
pub fn check_classical_curvature_agreement(
    ctx: &GeometryContext,
    g: &MetricSection,
) -> bool {
    let cls = crate::actions::classical_levi_civita(g);
    let subst = holonomic_substitution(g);
    for i in 0..ctx.n {
        for j in 0..ctx.n {
            let pulled = subst.apply_form(ctx.curvature_univ.entry(i, j));
            if !pulled.eq_exact(cls.curvature.entry(i, j)) {
                return false;
            }
        }
    }
    true
}

/// Holonomic pullback of `e_{2k}(Ω)` against `e_{2k}(R^g)` of the classical
/// curvature. For `n < 4k` both sides are forms of degree above the base
/// dimension and vanish; the left side vanishing is still a nontrivial check
/// of the substitution calculus.
pub fn check_classical_pontryagin_agreement(
    ctx: &GeometryContext,
    g: &MetricSection,
    k: usize,
) -> bool {
    let cls = crate::actions::classical_levi_civita(g);
    let subst = holonomic_substitution(g);
    let universal = match pontryagin(ctx, k) {
        Ok(p) => p,
        Err(_) => return false,
    };
    let pulled = subst.apply_form(&universal.form);
    let classical = crate::matrix::principal_minor_sum(&cls.curvature, 2 * k);
    pulled.eq_exact(&classical)
}

/// Euler data after holonomic pullback at one base point:
/// `Pf(gΩ)` pulled back and evaluated on `(∂x¹, …, ∂xⁿ)`, together with
/// `det g(x)`. For a surface this equals `K · det g`.
pub fn euler_pullback_value(
    ctx: &GeometryContext,
    g: &MetricSection,
    x: &[Rational],
) -> Result<(Rational, Rational), MatrixFormError> {
    let pair = euler(ctx)?;
    let subst = holonomic_substitution(g);
    let pulled = subst.apply_form(&pair.pf_flat);
    let p = crate::actions::base_jet_point(ctx.n, x);
    let frame: Vec<TangentVector> = (1..=ctx.n)
        .map(|i| TangentVector::coordinate(JetCoordinate::base(i)))
        .collect();
    let pf_value = pulled.evaluate(&p, &frame).map_err(MatrixFormError::Form)?;
    let det_value = subst
        .apply_expr(&ctx.det_g)
        .eval(&p)
        .map_err(|e| MatrixFormError::Form(FormError::Eval(e)))?;
    Ok((pf_value, det_value))
}

/// The stored nonvanishing witness for the first Pontryagin form in
/// dimension two: the normal point and the coordinate 4-tuple
/// `(∂y_11, ∂y_12, ∂y_12,1, ∂x¹)`.
pub fn p1_witness_tuple() -> (JetPoint, Vec<TangentVector>) {
    let p = JetPoint::normal(2);
    let vs = vec![
        TangentVector::coordinate(JetCoordinate::metric(1, 1)),
        TangentVector::coordinate(JetCoordinate::metric(1, 2)),
        TangentVector::coordinate(JetCoordinate::metric_jet(1, 2, 1)),
        TangentVector::coordinate(JetCoordinate::base(1)),
    ];
    (p, vs)
}

/// Pullback data of a substitution applied to a scalar form, evaluated at
/// matched points: used by the invariance suites for `Pf♭` and `p_k`.
pub fn pullback_matches_at(
    subst: &JetSubstitution,
    form: &DiffForm,
    expected: &DiffForm,
    n: usize,
    cases: usize,
    seed: u64,
) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cases {
        let p = JetPoint::random(n, &mut rng);
        let vs: Vec<TangentVector> = (0..form.degree())
            .map(|_| TangentVector::random(n, &mut rng))
            .collect();
        let lhs = match subst.pullback_value_at(form, &p, &vs) {
            Ok(v) => v,
            Err(_) => return false,
        };
        let rhs = match expected.evaluate(&p, &vs) {
            Ok(v) => v,
            Err(_) => return false,
        };
        if lhs != rhs {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{builtin_diffeos, builtin_metrics, holonomic_pullback};
    use crate::geometry::build_context;
    use crate::rational::rat;

    #[test]
    fn lowered_curvature_is_antisymmetric() {
        for n in [2, 3] {
            let ctx = build_context(n).unwrap();
            assert!(verify_lowered_antisymmetric(&ctx, CheckMode::Symbolic), "n = {n}");
        }
    }

    #[test]
    fn p1_flat_pullback_vanishes() {
        let ctx = build_context(2).unwrap();
        let p1 = pontryagin(&ctx, 1).unwrap();
        assert_eq!(p1.two_pi_power, -2);
        let flat = MetricSection::euclidean(2, crate::actions::default_sample_points(2));
        assert!(holonomic_pullback(&flat, &p1.form).is_zero_exact());
        // and the Euler data dies on the flat metric too
        let pair = euler(&ctx).unwrap();
        assert!(holonomic_pullback(&flat, &pair.pf_flat).is_zero_exact());
    }

    #[test]
    fn p1_nonvanishing_witness() {
        let ctx = build_context(2).unwrap();
        let (p, vs) = p1_witness_tuple();
        let value = pontryagin_value_at(&ctx, 1, &p, &vs).unwrap();
        assert_eq!(value, rat(1, 4));
        // the materialized form agrees
        let p1 = pontryagin(&ctx, 1).unwrap();
        assert_eq!(p1.form.evaluate(&p, &vs).unwrap(), rat(1, 4));
    }

    #[test]
    fn p1_closed_symbolically_n2() {
        let ctx = build_context(2).unwrap();
        assert!(check_closed_pontryagin(&ctx, 1, CheckMode::Symbolic));
    }

    #[test]
    fn p1_closed_sampled_n3() {
        let ctx = build_context(3).unwrap();
        assert!(check_closed_pontryagin(
            &ctx,
            1,
            CheckMode::Sampled { cases: 10, seed: 81 }
        ));
    }

    #[test]
    fn closedness_check_rejects_perturbation() {
        // harness sanity: a deliberately non-closed 4-form is caught; the
        // coefficient must involve a coordinate whose covector is not already
        // in the key (d(y_11 · dx¹∧dy_11∧…) would vanish by alternation)
        let ctx = build_context(2).unwrap();
        let p1 = pontryagin(&ctx, 1).unwrap();
        let junk = DiffForm::basis(crate::forms::CovectorBasis::dx(1))
            .wedge(&DiffForm::basis(crate::forms::CovectorBasis::dy(1, 1)))
            .wedge(&DiffForm::basis(crate::forms::CovectorBasis::dy_jet(1, 1, 2)))
            .wedge(&DiffForm::basis(crate::forms::CovectorBasis::dx(2)))
            .scale(&ScalarExpr::coord(JetCoordinate::metric(2, 2)));
        let perturbed = p1.form.add(&junk);
        assert!(!perturbed.dext().is_zero_exact());
    }

    #[test]
    fn euler_closed_rational_identity() {
        let ctx = build_context(2).unwrap();
        assert!(check_euler_closed(&ctx).unwrap());
        // sanity: perturbing Pf♭ breaks the identity
        let mut pair = euler(&ctx).unwrap();
        pair.pf_flat = pair.pf_flat.add(
            &DiffForm::basis(crate::forms::CovectorBasis::dx(1))
                .wedge(&DiffForm::basis(crate::forms::CovectorBasis::dy(1, 1)))
                .scale(&ScalarExpr::coord(JetCoordinate::metric(1, 1))),
        );
        assert!(!euler_closed_identity_holds(&pair));
    }

    #[test]
    fn euler_square_symbolic_n2() {
        let ctx = build_context(2).unwrap();
        assert!(check_euler_square(&ctx, CheckMode::Symbolic).unwrap());
        assert!(matches!(
            check_euler_square(&build_context(3).unwrap(), CheckMode::Symbolic),
            Err(MatrixFormError::OddDimension(3))
        ));
    }

    #[test]
    fn euler_gauss_curvature_point_value() {
        // g = diag(1, 1 + (x¹)²) at the origin: K = −1, det g = 1, so the
        // pulled-back Pfaffian on the base frame is −1 and the Euler form is
        // −1·(2π)^{−1}·vol
        let ctx = build_context(2).unwrap();
        let g = &builtin_metrics(2)[1];
        let (pf, det) = euler_pullback_value(&ctx, g, &[rat_int(0), rat_int(0)]).unwrap();
        assert_eq!(pf, rat_int(-1));
        assert_eq!(det, rat_int(1));
        let pair = euler(&ctx).unwrap();
        assert_eq!(pair.two_pi_power, -1);
        // cross-check against the classical Gauss curvature oracle:
        // Pf(gR)(∂₁,∂₂) = K · det g at every sample point of the section
        let cls = crate::actions::classical_levi_civita(g);
        for x in g.sample_points() {
            let (pf, det) = euler_pullback_value(&ctx, g, x).unwrap();
            let k = cls.gauss_curvature_at(x).unwrap();
            assert_eq!(pf, k * det);
        }
    }

    #[test]
    fn euler_sign_flip_under_reflection() {
        let ctx = build_context(2).unwrap();
        let diffeos = builtin_diffeos(2);
        let reflection = diffeos.iter().find(|d| d.name == "reflection").unwrap();
        assert!(check_euler_sign_flip(&ctx, reflection, CheckMode::Symbolic).unwrap());
        // orientation preserved: no flip
        let rotation = diffeos.iter().find(|d| d.name == "rotation-3-4-5").unwrap();
        assert!(check_euler_sign_flip(&ctx, rotation, CheckMode::Symbolic).unwrap());
        // reflection twice is the identity behavior
        let twice = reflection.compose(reflection).unwrap();
        assert!(check_euler_sign_flip(&ctx, &twice, CheckMode::Symbolic).unwrap());
        // sampled mode agrees
        assert!(check_euler_sign_flip(
            &ctx,
            reflection,
            CheckMode::Sampled { cases: 10, seed: 82 }
        )
        .unwrap());
    }

    #[test]
    fn pontryagin_invariance_under_diffeos() {
        let ctx = build_context(2).unwrap();
        for phi in builtin_diffeos(2).iter().take(6) {
            assert!(
                check_pontryagin_invariance(&ctx, phi, 1, 3, 83).unwrap(),
                "diffeo {}",
                phi.name
            );
        }
    }

    #[test]
    fn pontryagin_scaling_invariance() {
        let ctx = build_context(2).unwrap();
        for s in [rat(1, 4), rat_int(4), rat_int(9)] {
            assert!(check_pontryagin_scaling(&ctx, &s, 1).unwrap());
        }
    }

    #[test]
    fn classical_agreement_n2() {
        let ctx = build_context(2).unwrap();
        for g in builtin_metrics(2) {
            assert!(check_classical_curvature_agreement(&ctx, &g), "{}", g.name);
            assert!(check_classical_pontryagin_agreement(&ctx, &g, 1), "{}", g.name);
        }
    }
}
