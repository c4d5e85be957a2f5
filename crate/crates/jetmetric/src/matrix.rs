//! Endomorphism-valued forms in the coordinate frame, the g-adjoint
//! decomposition, Pfaffians and characteristic coefficients.

use crate::coords::JetPoint;
use crate::expr::{Canonicalizer, Evaluator, ScalarExpr};
use crate::forms::{DiffForm, FormError, TangentVector};
use crate::rational::{rat_int, Rational};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixFormError {
    #[error("dimension mismatch: {0}x{0} vs {1}x{1}")]
    DimensionMismatch(usize, usize),
    #[error("pfaffian needs an even dimension, got {0}")]
    OddDimension(usize),
    #[error("matrix is not antisymmetric at entry ({0},{1})")]
    NotAntisymmetric(usize, usize),
    #[error("characteristic coefficient index {k} out of range for n = {n}")]
    OutOfRange { k: usize, n: usize },
    #[error("prefactor mismatch: (2π)^{0} vs (2π)^{1}")]
    PrefactorMismatch(i32, i32),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// An n×n array of equal-degree forms: an endomorphism-valued form in the
/// coordinate frame, upper index = row.
#[derive(Clone, Debug)]
pub struct MatrixForm {
    n: usize,
    degree: usize,
    entries: Vec<DiffForm>, // row-major
}

impl MatrixForm {
    pub fn zero(n: usize, degree: usize) -> MatrixForm {
        MatrixForm {
            n,
            degree,
            entries: vec![DiffForm::zero(degree); n * n],
        }
    }

    /// Identity as a matrix of 0-forms.
    pub fn identity(n: usize) -> MatrixForm {
        let mut m = MatrixForm::zero(n, 0);
        for i in 0..n {
            m.set(i, i, DiffForm::scalar(ScalarExpr::one()));
        }
        m
    }

    /// From a matrix of scalars, as 0-forms.
    pub fn from_scalars(scalars: &[Vec<ScalarExpr>]) -> MatrixForm {
        let n = scalars.len();
        let mut m = MatrixForm::zero(n, 0);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, DiffForm::scalar(scalars[i][j].clone()));
            }
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> DiffForm>(
        n: usize,
        degree: usize,
        mut f: F,
    ) -> MatrixForm {
        let mut m = MatrixForm::zero(n, degree);
        for i in 0..n {
            for j in 0..n {
                let e = f(i, j);
                debug_assert_eq!(e.degree(), degree);
                m.set(i, j, e);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Entry with 0-based row/column.
    pub fn entry(&self, i: usize, j: usize) -> &DiffForm {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: DiffForm) {
        self.entries[i * self.n + j] = f;
    }

    pub fn add(&self, other: &MatrixForm) -> MatrixForm {
        assert_eq!(self.n, other.n);
        assert_eq!(self.degree, other.degree);
        MatrixForm::from_fn(self.n, self.degree, |i, j| {
            self.entry(i, j).add(other.entry(i, j))
        })
    }

    pub fn sub(&self, other: &MatrixForm) -> MatrixForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MatrixForm {
        self.map(|f| f.neg())
    }

    pub fn scale(&self, s: &ScalarExpr) -> MatrixForm {
        self.map(|f| f.scale(s))
    }

    pub fn scale_rat(&self, r: &Rational) -> MatrixForm {
        self.map(|f| f.scale_rat(r))
    }

    pub fn map<F: Fn(&DiffForm) -> DiffForm>(&self, f: F) -> MatrixForm {
        MatrixForm {
            n: self.n,
            degree: self.degree,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn canonicalized(&self, canon: &mut Canonicalizer) -> MatrixForm {
        MatrixForm {
            n: self.n,
            degree: self.degree,
            entries: self.entries.iter().map(|f| f.canonicalized(canon)).collect(),
        }
    }

    /// Matrix product with wedge entries: `(A∧B)^i_j = Σ_a A^i_a ∧ B^a_j`.
    pub fn mat_wedge(&self, other: &MatrixForm) -> Result<MatrixForm, MatrixFormError> {
        if self.n != other.n {
            return Err(MatrixFormError::DimensionMismatch(self.n, other.n));
        }
        let degree = self.degree + other.degree;
        let mut out = MatrixForm::zero(self.n, degree);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = DiffForm::zero(degree);
                for a in 0..self.n {
                    acc = acc.add(&self.entry(i, a).wedge(other.entry(a, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Left multiplication by a matrix of scalars (index lowering, Jacobian
    /// gauge factors): `(S·A)^i_j = Σ_a S_ia A^a_j`.
    pub fn mul_scalars_left(&self, s: &[Vec<ScalarExpr>]) -> MatrixForm {
        assert_eq!(s.len(), self.n);
        MatrixForm::from_fn(self.n, self.degree, |i, j| {
            let mut acc = DiffForm::zero(self.degree);
            for a in 0..self.n {
                acc = acc.add(&self.entry(a, j).scale(&s[i][a]));
            }
            acc
        })
    }

    /// Right multiplication by a matrix of scalars.
    pub fn mul_scalars_right(&self, s: &[Vec<ScalarExpr>]) -> MatrixForm {
        assert_eq!(s.len(), self.n);
        MatrixForm::from_fn(self.n, self.degree, |i, j| {
            let mut acc = DiffForm::zero(self.degree);
            for a in 0..self.n {
                acc = acc.add(&self.entry(i, a).scale(&s[a][j]));
            }
            acc
        })
    }

    pub fn transpose(&self) -> MatrixForm {
        MatrixForm::from_fn(self.n, self.degree, |i, j| self.entry(j, i).clone())
    }

    /// The g-adjoint `g⁻¹ Aᵀ g`; involutive.
    pub fn transpose_g(
        &self,
        g: &[Vec<ScalarExpr>],
        g_inv: &[Vec<ScalarExpr>],
    ) -> MatrixForm {
        self.transpose()
            .mul_scalars_left(g_inv)
            .mul_scalars_right(g)
    }

    /// `½(A + g⁻¹Aᵀg)`
    pub fn sym_part(&self, g: &[Vec<ScalarExpr>], g_inv: &[Vec<ScalarExpr>]) -> MatrixForm {
        self.add(&self.transpose_g(g, g_inv)).scale_rat(&crate::rational::rat(1, 2))
    }

    /// `½(A − g⁻¹Aᵀg)`
    pub fn antisym_part(
        &self,
        g: &[Vec<ScalarExpr>],
        g_inv: &[Vec<ScalarExpr>],
    ) -> MatrixForm {
        self.sub(&self.transpose_g(g, g_inv)).scale_rat(&crate::rational::rat(1, 2))
    }

    /// `Σ_i A^i_i`, a scalar-valued form.
    pub fn trace(&self) -> DiffForm {
        let mut acc = DiffForm::zero(self.degree);
        for i in 0..self.n {
            acc = acc.add(self.entry(i, i));
        }
        acc
    }

    pub fn dext(&self) -> MatrixForm {
        MatrixForm {
            n: self.n,
            degree: self.degree + 1,
            entries: self.entries.iter().map(|f| f.dext()).collect(),
        }
    }

    pub fn is_zero_exact(&self) -> bool {
        let mut canon = Canonicalizer::new();
        self.entries.iter().all(|f| f.is_zero_exact_with(&mut canon))
    }

    pub fn eq_exact(&self, other: &MatrixForm) -> bool {
        self.sub(other).is_zero_exact()
    }

    /// Entry-wise evaluation on a tuple of tangent vectors.
    pub fn evaluate(
        &self,
        p: &JetPoint,
        vectors: &[TangentVector],
    ) -> Result<Vec<Vec<Rational>>, FormError> {
        let mut ev = Evaluator::new(p);
        let mut out = vec![vec![Rational::zero(); self.n]; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                out[i][j] = self.entry(i, j).evaluate_with(&mut ev, vectors)?;
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "degree": self.degree,
            "entries": (0..self.n).map(|i| {
                (0..self.n).map(|j| self.entry(i, j).to_json()).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }
}

/// `(2π)^e · form`, with the transcendental factor tracked exactly.
#[derive(Clone, Debug)]
pub struct PrefactoredForm {
    pub two_pi_power: i32,
    pub form: DiffForm,
}

impl PrefactoredForm {
    pub fn new(two_pi_power: i32, form: DiffForm) -> PrefactoredForm {
        PrefactoredForm {
            two_pi_power,
            form,
        }
    }

    pub fn wedge(&self, other: &PrefactoredForm) -> PrefactoredForm {
        PrefactoredForm {
            two_pi_power: self.two_pi_power + other.two_pi_power,
            form: self.form.wedge(&other.form),
        }
    }

    pub fn add(&self, other: &PrefactoredForm) -> Result<PrefactoredForm, MatrixFormError> {
        if self.two_pi_power != other.two_pi_power {
            return Err(MatrixFormError::PrefactorMismatch(
                self.two_pi_power,
                other.two_pi_power,
            ));
        }
        Ok(PrefactoredForm {
            two_pi_power: self.two_pi_power,
            form: self.form.add(&other.form),
        })
    }

    pub fn is_zero_exact(&self) -> bool {
        self.form.is_zero_exact()
    }
}

/// Perfect matchings of `{0, …, n-1}` with the permutation sign of
/// `(a₁ b₁ a₂ b₂ …)`; the building block of the Pfaffian.
fn perfect_matchings(n: usize) -> Vec<(i8, Vec<(usize, usize)>)> {
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

/// Pfaffian of an antisymmetric matrix of even-degree forms:
/// `Pf(A) = Σ_matchings sign · A_{a₁b₁} ∧ … ∧ A_{a_m b_m}`.
pub fn pfaffian(a: &MatrixForm) -> Result<DiffForm, MatrixFormError> {
    let n = a.n();
    if n % 2 != 0 {
        return Err(MatrixFormError::OddDimension(n));
    }
    if a.degree() % 2 != 0 {
        return Err(MatrixFormError::OddDimension(a.degree()));
    }
    // antisymmetry is part of the contract, not an assumption
    for i in 0..n {
        for j in i..n {
            if !a.entry(i, j).add(a.entry(j, i)).is_zero_exact() {
                return Err(MatrixFormError::NotAntisymmetric(i, j));
            }
        }
    }
    let half = n / 2;
    let mut acc = DiffForm::zero(a.degree() * half);
    for (sign, matching) in perfect_matchings(n) {
        let mut term = DiffForm::scalar(ScalarExpr::one());
        for &(i, j) in &matching {
            term = term.wedge(a.entry(i, j));
        }
        acc = acc.add(&term.scale_rat(&rat_int(sign as i64)));
    }
    Ok(acc)
}

/// Sum of the signed wedge-determinants of all `m×m` principal submatrices:
/// the elementary symmetric function `e_m` of the matrix, with wedge
/// products. Entries must have even degree so that they commute.
pub fn principal_minor_sum(a: &MatrixForm, m: usize) -> DiffForm {
    let n = a.n();
    let mut acc = DiffForm::zero(a.degree() * m);
    for subset in k_subsets(n, m) {
        for (sign, perm) in permutations_with_sign(m) {
            let mut term = DiffForm::scalar(ScalarExpr::one());
            let mut zero = false;
            for r in 0..m {
                let e = a.entry(subset[r], subset[perm[r]]);
                if e.num_terms() == 0 {
                    zero = true;
                    break;
                }
                term = term.wedge(e);
            }
            if zero {
                continue;
            }
            acc = acc.add(&term.scale_rat(&rat_int(sign as i64)));
        }
    }
    acc
}

/// The coefficient of `λ^{n−2k}` in `det(λI − A/2π)` for a curvature-type
/// matrix of 2-forms: `(2π)^{−2k} · e_{2k}(A)`. Gauge-independent under
/// conjugation by invertible matrices of scalars.
pub fn char_coeff(k: usize, a: &MatrixForm) -> Result<PrefactoredForm, MatrixFormError> {
    let n = a.n();
    if 2 * k > n || k == 0 {
        return Err(MatrixFormError::OutOfRange { k, n });
    }
    Ok(PrefactoredForm::new(
        -2 * (k as i32),
        principal_minor_sum(a, 2 * k),
    ))
}

/// All strictly increasing `m`-element subsets of `0..n`.
pub fn k_subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn go(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    go(0, n, m, &mut cur, &mut out);
    out
}

/// All permutations of `0..m` with signs.
pub fn permutations_with_sign(m: usize) -> Vec<(i8, Vec<usize>)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..m).collect();
    fn heap(k: usize, perm: &mut Vec<usize>, out: &mut Vec<(i8, Vec<usize>)>) {
        if k == 1 {
            out.push((crate::rational::permutation_sign(perm), perm.clone()));
            return;
        }
        for i in 0..k {
            heap(k - 1, perm, out);
            if k % 2 == 0 {
                perm.swap(i, k - 1);
            } else {
                perm.swap(0, k - 1);
            }
        }
    }
    if m == 0 {
        out.push((1, Vec::new()));
    } else {
        heap(m, &mut perm, &mut out);
    }
    out
}

/// Exact value of `α₁ ∧ … ∧ α_m` on a tuple of tangent vectors, without
/// materializing the product: recursive sum over shuffles. The workhorse of
/// the evaluation-first strategy for high-degree forms.
pub fn wedge_value_at(
    factors: &[&DiffForm],
    p: &JetPoint,
    vectors: &[TangentVector],
) -> Result<Rational, FormError> {
    let mut ev = Evaluator::new(p);
    wedge_value_with(factors, &mut ev, vectors)
}

pub fn wedge_value_with(
    factors: &[&DiffForm],
    ev: &mut Evaluator,
    vectors: &[TangentVector],
) -> Result<Rational, FormError> {
    let total: usize = factors.iter().map(|f| f.degree()).sum();
    if total != vectors.len() {
        return Err(FormError::DegreeMismatch {
            expected: total,
            got: vectors.len(),
        });
    }
    if factors.is_empty() {
        return Ok(Rational::from_integer(1.into()));
    }
    let first = factors[0];
    let rest = &factors[1..];
    let d = first.degree();
    let idx: Vec<usize> = (0..vectors.len()).collect();
    let mut acc = Rational::zero();
    for subset in k_subsets(vectors.len(), d) {
        // shuffle sign: move the subset to the front keeping inner orders
        let mut sign = 0usize;
        for (pos, &s) in subset.iter().enumerate() {
            sign += s - pos;
        }
        let sign = if sign % 2 == 0 { 1i64 } else { -1i64 };
        let picked: Vec<TangentVector> =
            subset.iter().map(|&s| vectors[s].clone()).collect();
        let value = first.evaluate_with(ev, &picked)?;
        if value.is_zero() {
            continue;
        }
        let remaining: Vec<TangentVector> = idx
            .iter()
            .filter(|i| !subset.contains(i))
            .map(|&i| vectors[i].clone())
            .collect();
        let tail = wedge_value_with(rest, ev, &remaining)?;
        acc += value * tail * rat_int(sign);
    }
    Ok(acc)
}

/// Symbolic-in-coefficients contraction of `α₁ ∧ … ∧ α_m` with constant
/// tangent vectors: returns `(α₁∧…∧α_m)(v₁, …)` as a scalar expression of
/// the jet point. Lets `d` of a never-materialized product be evaluated
/// exactly through coefficient partials.
pub fn wedge_contract_expr(factors: &[&DiffForm], vectors: &[TangentVector]) -> ScalarExpr {
    let total: usize = factors.iter().map(|f| f.degree()).sum();
    assert_eq!(total, vectors.len());
    if factors.is_empty() {
        return ScalarExpr::one();
    }
    let first = factors[0];
    let rest = &factors[1..];
    let d = first.degree();
    let idx: Vec<usize> = (0..vectors.len()).collect();
    let mut terms = Vec::new();
    for subset in k_subsets(vectors.len(), d) {
        let mut sign = 0usize;
        for (pos, &s) in subset.iter().enumerate() {
            sign += s - pos;
        }
        let picked: Vec<TangentVector> =
            subset.iter().map(|&s| vectors[s].clone()).collect();
        let head = first.contract_expr(&picked);
        if head.is_zero_const() {
            continue;
        }
        let remaining: Vec<TangentVector> = idx
            .iter()
            .filter(|i| !subset.contains(i))
            .map(|&i| vectors[i].clone())
            .collect();
        let tail = wedge_contract_expr(rest, &remaining);
        let mut term = ScalarExpr::product([head, tail]);
        if sign % 2 == 1 {
            term = term.neg();
        }
        terms.push(term);
    }
    ScalarExpr::sum(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{random_form, CovectorBasis};
    use crate::rational::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dx(k: usize) -> DiffForm {
        DiffForm::basis(CovectorBasis::dx(k))
    }
    fn dy(i: usize, j: usize) -> DiffForm {
        DiffForm::basis(CovectorBasis::dy(i, j))
    }

    fn random_matrix_form<R: Rng>(n: usize, degree: usize, rng: &mut R) -> MatrixForm {
        MatrixForm::from_fn(n, degree, |_, _| random_form(2, degree, true, rng))
    }

    fn identity_scalars(n: usize) -> Vec<Vec<ScalarExpr>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { ScalarExpr::one() } else { ScalarExpr::zero() })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn mat_wedge_identity_and_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let b = random_matrix_form(2, 1, &mut rng);
        let id = MatrixForm::identity(2);
        assert!(id.mat_wedge(&b).unwrap().eq_exact(&b));

        let a = random_matrix_form(2, 1, &mut rng);
        let ab = a.mat_wedge(&b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut brute = DiffForm::zero(2);
                for k in 0..2 {
                    brute = brute.add(&a.entry(i, k).wedge(b.entry(k, j)));
                }
                assert!(ab.entry(i, j).eq_exact(&brute));
            }
        }

        let c = MatrixForm::zero(3, 1);
        assert!(matches!(
            a.mat_wedge(&c),
            Err(MatrixFormError::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn transpose_g_reduces_to_transpose_for_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let a = random_matrix_form(2, 1, &mut rng);
        let id = identity_scalars(2);
        assert!(a.transpose_g(&id, &id).eq_exact(&a.transpose()));
    }

    #[test]
    fn transpose_g_is_involutive() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let g = crate::expr::metric_matrix_exprs(2);
        let g_inv = crate::expr::inverse_metric(2).unwrap();
        let a = random_matrix_form(2, 1, &mut rng);
        let twice = a.transpose_g(&g, &g_inv).transpose_g(&g, &g_inv);
        assert!(twice.eq_exact(&a));
    }

    #[test]
    fn sym_antisym_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let g = crate::expr::metric_matrix_exprs(2);
        let g_inv = crate::expr::inverse_metric(2).unwrap();
        let a = random_matrix_form(2, 1, &mut rng);
        let s = a.sym_part(&g, &g_inv);
        let t = a.antisym_part(&g, &g_inv);
        assert!(s.add(&t).eq_exact(&a));
        // idempotence
        assert!(s.sym_part(&g, &g_inv).eq_exact(&s));
        // a g-antisymmetric input has zero symmetric part
        let anti = a.antisym_part(&g, &g_inv);
        assert!(anti.sym_part(&g, &g_inv).is_zero_exact());
    }

    #[test]
    fn pfaffian_two_by_two() {
        let a12 = dx(1).wedge(&dx(2));
        let mut a = MatrixForm::zero(2, 2);
        a.set(0, 1, a12.clone());
        a.set(1, 0, a12.neg());
        let pf = pfaffian(&a).unwrap();
        assert!(pf.eq_exact(&a12));
    }

    #[test]
    fn pfaffian_block_diagonal() {
        let ablock = dx(1).wedge(&dx(2));
        let bblock = dy(1, 1).wedge(&dy(1, 2));
        let mut m = MatrixForm::zero(4, 2);
        m.set(0, 1, ablock.clone());
        m.set(1, 0, ablock.neg());
        m.set(2, 3, bblock.clone());
        m.set(3, 2, bblock.neg());
        let pf = pfaffian(&m).unwrap();
        assert!(pf.eq_exact(&ablock.wedge(&bblock)));
    }

    #[test]
    fn pfaffian_rejects_bad_inputs() {
        assert!(matches!(
            pfaffian(&MatrixForm::zero(3, 2)),
            Err(MatrixFormError::OddDimension(3))
        ));
        let mut m = MatrixForm::zero(2, 2);
        m.set(0, 0, dx(1).wedge(&dx(2)));
        assert!(matches!(
            pfaffian(&m),
            Err(MatrixFormError::NotAntisymmetric(0, 0))
        ));
    }

    #[test]
    fn pfaffian_congruence_scaling() {
        // Pf(BᵀAB) = det(B)·Pf(A) for rational scalar B, n = 4
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..5 {
            let mut a = MatrixForm::zero(4, 2);
            for i in 0..4 {
                for j in i + 1..4 {
                    let f = random_form(2, 2, true, &mut rng);
                    a.set(i, j, f.clone());
                    a.set(j, i, f.neg());
                }
            }
            let b: Vec<Vec<Rational>> = (0..4)
                .map(|_| (0..4).map(|_| rat(rng.gen_range(-3..=3), 1)).collect())
                .collect();
            let det_b = crate::rational::det_rational(&b);
            let b_exprs: Vec<Vec<ScalarExpr>> = b
                .iter()
                .map(|row| row.iter().map(|v| ScalarExpr::constant(v.clone())).collect())
                .collect();
            let bt: Vec<Vec<ScalarExpr>> = (0..4)
                .map(|i| (0..4).map(|j| b_exprs[j][i].clone()).collect())
                .collect();
            let conj = a.mul_scalars_left(&bt).mul_scalars_right(&b_exprs);
            if det_b.is_zero() {
                // degenerate draw; Pf(BᵀAB) must then vanish
                let pf = pfaffian(&conj).unwrap();
                assert!(pf.is_zero_exact());
                continue;
            }
            let lhs = pfaffian(&conj).unwrap();
            let rhs = pfaffian(&a).unwrap().scale_rat(&det_b);
            assert!(lhs.eq_exact(&rhs));
        }
    }

    #[test]
    fn char_coeff_two_by_two_antisymmetric() {
        // A = [[0, a], [−a, 0]] with decomposable a: e₂ = a∧a = 0
        let a12 = dx(1).wedge(&dx(2));
        let mut a = MatrixForm::zero(2, 2);
        a.set(0, 1, a12.clone());
        a.set(1, 0, a12.neg());
        let p1 = char_coeff(1, &a).unwrap();
        assert_eq!(p1.two_pi_power, -2);
        assert!(p1.form.eq_exact(&a12.wedge(&a12)));
        assert!(p1.form.is_zero_exact());

        assert!(char_coeff(1, &MatrixForm::zero(2, 2)).unwrap().is_zero_exact());
        assert!(matches!(
            char_coeff(2, &a),
            Err(MatrixFormError::OutOfRange { k: 2, n: 2 })
        ));
    }

    #[test]
    fn char_coeff_block_diagonal_and_pfaffian_square() {
        let ablock = dx(1).wedge(&dx(2));
        let bblock = dy(1, 1).wedge(&dy(1, 2));
        let mut m = MatrixForm::zero(4, 2);
        m.set(0, 1, ablock.clone());
        m.set(1, 0, ablock.neg());
        m.set(2, 3, bblock.clone());
        m.set(3, 2, bblock.neg());
        let p1 = char_coeff(1, &m).unwrap();
        let expect1 = ablock.wedge(&ablock).add(&bblock.wedge(&bblock));
        assert!(p1.form.eq_exact(&expect1));
        let p2 = char_coeff(2, &m).unwrap();
        assert_eq!(p2.two_pi_power, -4);
        let expect2 = ablock.wedge(&ablock).wedge(&bblock.wedge(&bblock));
        assert!(p2.form.eq_exact(&expect2));
        // p_{n/2} = (2π)^{−n} Pf ∧ Pf
        let pf = pfaffian(&m).unwrap();
        assert!(p2.form.eq_exact(&pf.wedge(&pf)));
        // and Pf∧Pf is the wedge-determinant expansion
        let det = principal_minor_sum(&m, 4);
        assert!(det.eq_exact(&pf.wedge(&pf)));
    }

    #[test]
    fn char_coeff_conjugation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for _ in 0..5 {
            let a = random_matrix_form(2, 2, &mut rng);
            // random invertible rational matrix
            let s: Vec<Vec<Rational>> = loop {
                let cand: Vec<Vec<Rational>> = (0..2)
                    .map(|_| (0..2).map(|_| rat(rng.gen_range(-3..=3), 1)).collect())
                    .collect();
                if !crate::rational::det_rational(&cand).is_zero() {
                    break cand;
                }
            };
            let s_inv = crate::rational::invert_rational(&s).unwrap();
            let to_exprs = |m: &Vec<Vec<Rational>>| -> Vec<Vec<ScalarExpr>> {
                m.iter()
                    .map(|r| r.iter().map(|v| ScalarExpr::constant(v.clone())).collect())
                    .collect()
            };
            let conj = a
                .mul_scalars_left(&to_exprs(&s_inv))
                .mul_scalars_right(&to_exprs(&s));
            let p1 = char_coeff(1, &a).unwrap();
            let q1 = char_coeff(1, &conj).unwrap();
            assert!(p1.form.eq_exact(&q1.form));
        }
    }

    #[test]
    fn prefactored_arithmetic() {
        let a = PrefactoredForm::new(-2, dx(1).wedge(&dx(2)));
        let b = PrefactoredForm::new(-2, dy(1, 1).wedge(&dy(1, 2)));
        let sum = a.add(&b).unwrap();
        assert_eq!(sum.two_pi_power, -2);
        let w = a.wedge(&b);
        assert_eq!(w.two_pi_power, -4);
        let c = PrefactoredForm::new(-1, dx(1));
        assert!(matches!(
            a.add(&c),
            Err(MatrixFormError::PrefactorMismatch(-2, -1))
        ));
    }

    #[test]
    fn wedge_value_matches_materialized_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..10 {
            let a = random_form(2, 1, true, &mut rng);
            let b = random_form(2, 2, true, &mut rng);
            let c = random_form(2, 1, true, &mut rng);
            let p = JetPoint::random(2, &mut rng);
            let vs: Vec<TangentVector> =
                (0..4).map(|_| TangentVector::random(2, &mut rng)).collect();
            let direct = a.wedge(&b).wedge(&c).evaluate(&p, &vs).unwrap();
            let lazy = wedge_value_at(&[&a, &b, &c], &p, &vs).unwrap();
            assert_eq!(direct, lazy);
            let sym = wedge_contract_expr(&[&a, &b, &c], &vs);
            assert_eq!(sym.eval(&p).unwrap(), direct);
        }
    }
}
