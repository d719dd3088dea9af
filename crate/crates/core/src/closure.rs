//! Contracted closure `(A_ijkl + A_jikl) U_k,l` for a representation `A(T)`
//! and an incompressible velocity gradient `U = S + W`.
//!
//! The 13 matrix-valued terms and the 28 → 13 coefficient map are derived
//! here rather than listed: each representation term is contracted
//! symbolically in a small algebra of matrix words over `T`, `S`, `W`
//! (with traces), symmetrized, and the one monomial outside the final list,
//! `TST`, is eliminated with a relation found by exact span solving on sampled
//! matrices and then re-checked on fresh samples.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::basis::{
    basis, evaluate_representation, Pairing, RepresentationJson, RepresentationModel, Skeleton,
    TermShape,
};
use crate::json::{format_rationals, parse_rationals, TensorJson};
use crate::linalg::{solve_in_span, RationalMatrix};
use crate::rational::{self, frac, int, Rational};
use crate::sampling;
use crate::tensor::{signed_permutation_rotations, DenseTensor};
use crate::{Error, Result};

pub const CLOSURE_TERMS: usize = 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    T,
    S,
    W,
}

impl Letter {
    fn symbol(self) -> char {
        match self {
            Letter::T => 'T',
            Letter::S => 'S',
            Letter::W => 'W',
        }
    }
}

pub type Word = Vec<Letter>;

fn transpose_sign(w: &[Letter]) -> i64 {
    if w.iter().filter(|&&l| l == Letter::W).count() % 2 == 0 {
        1
    } else {
        -1
    }
}

fn transposed(w: &[Letter]) -> (Word, i64) {
    (w.iter().rev().copied().collect(), transpose_sign(w))
}

/// Canonical representative of `tr(w)` under cyclic rotation and
/// transposition, with its sign; `None` when the trace vanishes identically.
pub fn canonical_trace(w: &[Letter]) -> Option<(Word, i64)> {
    let n = w.len();
    if n == 0 {
        return Some((Vec::new(), 1));
    }
    let (rev, rev_sign) = transposed(w);
    let mut seen: BTreeMap<Word, i64> = BTreeMap::new();
    for (base, sign) in [(w.to_vec(), 1), (rev, rev_sign)] {
        for r in 0..n {
            let mut cand = base[r..].to_vec();
            cand.extend_from_slice(&base[..r]);
            if let Some(&prev) = seen.get(&cand) {
                if prev != sign {
                    return None;
                }
            }
            seen.insert(cand, sign);
        }
    }
    seen.into_iter().next()
}

fn render_word(w: &[Letter]) -> String {
    let mut groups: Vec<(Letter, usize)> = Vec::new();
    for &l in w {
        match groups.last_mut() {
            Some((last, count)) if *last == l => *count += 1,
            _ => groups.push((l, 1)),
        }
    }
    let mut out = String::new();
    for (n, &(l, count)) in groups.iter().enumerate() {
        if n > 0 && (count > 1 || groups[n - 1].1 > 1) {
            out.push(' ');
        }
        out.push(l.symbol());
        if count > 1 {
            let _ = write!(out, "^{count}");
        }
    }
    out
}

fn render_traces(traces: &[Word]) -> String {
    let mut out = String::new();
    let mut n = 0;
    while n < traces.len() {
        let run = traces[n..].iter().take_while(|t| **t == traces[n]).count();
        let _ = write!(out, " tr({})", render_word(&traces[n]));
        if run > 1 {
            let _ = write!(out, "^{run}");
        }
        n += run;
    }
    out
}

/// A matrix word times a product of traces.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub traces: Vec<Word>,
    pub word: Word,
}

impl Monomial {
    pub fn word(word: Word) -> Self {
        Monomial {
            traces: Vec::new(),
            word,
        }
    }

    fn transposed(&self) -> (Monomial, i64) {
        let (word, sign) = transposed(&self.word);
        (
            Monomial {
                traces: self.traces.clone(),
                word,
            },
            sign,
        )
    }

    /// Orbit representative under transposition, the sign relating this
    /// monomial to it, and whether the orbit has two members.
    fn orbit(&self) -> (Monomial, i64, bool) {
        let (t, sign) = self.transposed();
        match t.cmp(self) {
            std::cmp::Ordering::Less => (t, sign, true),
            std::cmp::Ordering::Greater => (self.clone(), 1, true),
            std::cmp::Ordering::Equal => (self.clone(), 1, false),
        }
    }

    fn letter_count(&self, l: Letter) -> usize {
        self.traces
            .iter()
            .chain([&self.word])
            .flatten()
            .filter(|&&x| x == l)
            .count()
    }

    fn evaluate(&self, m: &Matrices) -> DenseTensor {
        let mut scalar = Rational::one();
        for t in &self.traces {
            scalar *= m.product(t).trace().unwrap();
        }
        m.product(&self.word).scale(&scalar)
    }

    fn orbit_label(&self) -> String {
        let (t, sign) = self.transposed();
        let word = if self.word.is_empty() {
            "I".to_string()
        } else {
            render_word(&self.word)
        };
        let traces = render_traces(&self.traces);
        if t == *self {
            return format!("{word}{traces}");
        }
        let op = if sign > 0 { '+' } else { '-' };
        let sum = format!("{word} {op} {}", render_word(&t.word));
        if traces.is_empty() {
            sum
        } else {
            format!("({sum}){traces}")
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = if self.word.is_empty() {
            "I".to_string()
        } else {
            render_word(&self.word)
        };
        write!(f, "{word}{}", render_traces(&self.traces))
    }
}

/// Linear combination of monomials, valid for symmetric `T`, `S`,
/// antisymmetric `W` and `tr S = 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatrixPolynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl MatrixPolynomial {
    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add(&mut self, m: Monomial, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let sum = self.terms.remove(&m).unwrap_or_else(Rational::zero) + c;
        if !sum.is_zero() {
            self.terms.insert(m, sum);
        }
    }

    /// `word · tr(trace)`, dropping vanishing traces and `tr S`.
    fn add_traced(&mut self, word: Word, trace: &[Letter], c: &Rational) {
        if let Some((canon, sign)) = canonical_trace(trace) {
            if canon == [Letter::S] {
                return;
            }
            self.add(
                Monomial {
                    traces: vec![canon],
                    word,
                },
                &(c * int(sign)),
            );
        }
    }

    fn times_traces(&self, traces: &[Word]) -> MatrixPolynomial {
        let mut out = MatrixPolynomial::default();
        for (m, c) in &self.terms {
            let mut m = m.clone();
            m.traces.extend(traces.iter().cloned());
            m.traces.sort();
            out.add(m, c);
        }
        out
    }

    fn plus(&self, other: &MatrixPolynomial) -> MatrixPolynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add(m.clone(), c);
        }
        out
    }

    pub fn transpose(&self) -> MatrixPolynomial {
        let mut out = MatrixPolynomial::default();
        for (m, c) in &self.terms {
            let (t, sign) = m.transposed();
            out.add(t, &(c * int(sign)));
        }
        out
    }

    /// `P + Pᵀ`.
    pub fn symmetrized(&self) -> MatrixPolynomial {
        self.plus(&self.transpose())
    }

    /// Coefficients on transpose orbits `m + mᵀ` (or `m` when `m = mᵀ`);
    /// only meaningful for symmetric polynomials.
    fn orbit_coefficients(&self) -> BTreeMap<Monomial, Rational> {
        let mut out = BTreeMap::new();
        for (m, c) in &self.terms {
            let (rep, sign, _) = m.orbit();
            if sign == 1 && rep == *m {
                out.insert(rep, c.clone());
            }
        }
        out
    }

    pub fn evaluate(&self, t: &DenseTensor, u: &DenseTensor) -> Result<DenseTensor> {
        let m = Matrices::new(t, u)?;
        let mut acc = DenseTensor::zeros(3, 2)?;
        for (mono, c) in &self.terms {
            acc.add_scaled(c, &mono.evaluate(&m))?;
        }
        Ok(acc)
    }

    pub fn labels(&self) -> Vec<(String, Rational)> {
        self.terms
            .iter()
            .map(|(m, c)| (m.to_string(), c.clone()))
            .collect()
    }
}

struct Matrices {
    t: DenseTensor,
    s: DenseTensor,
    w: DenseTensor,
}

impl Matrices {
    fn new(t: &DenseTensor, u: &DenseTensor) -> Result<Self> {
        let (s, w) = split_velocity_gradient(u)?;
        Ok(Matrices { t: t.clone(), s, w })
    }

    fn product(&self, w: &[Letter]) -> DenseTensor {
        let mut acc = DenseTensor::identity(3).unwrap();
        for &l in w {
            let m = match l {
                Letter::T => &self.t,
                Letter::S => &self.s,
                Letter::W => &self.w,
            };
            acc = acc.matmul(m).unwrap();
        }
        acc
    }
}

fn power_word(p: u32) -> Word {
    vec![Letter::T; p as usize]
}

/// Chain pairs of a single skeleton, with the power of `T` along each.
fn chains(skeleton: Skeleton) -> Vec<[((usize, usize), u32); 2]> {
    let pure = |p: Pairing| {
        let [a, b] = p.pairs();
        [(a, 1), (b, 1)]
    };
    match skeleton {
        Skeleton::DeltaDelta(p) => {
            let [a, b] = p.pairs();
            vec![[(a, 0), (b, 0)]]
        }
        Skeleton::DeltaT { delta, power } => {
            let other = Pairing::containing(delta)
                .pairs()
                .into_iter()
                .find(|&q| q != delta)
                .unwrap();
            vec![[(delta, 0), (other, power)]]
        }
        Skeleton::TTPair(p) => vec![pure(p)],
        Skeleton::TTSym => Pairing::ALL.iter().map(|&p| pure(p)).collect(),
    }
}

/// `A_ijkl U_k,l` for one representation term, before symmetrizing in `i, j`.
pub fn contract_term(term: &TermShape) -> MatrixPolynomial {
    let mut out = MatrixPolynomial::default();
    let one = Rational::one();
    for pair in chains(term.skeleton()) {
        let (first, second) = if pair[0].0 .0 == 0 {
            (pair[0], pair[1])
        } else {
            (pair[1], pair[0])
        };
        let m1 = power_word(first.1);
        let m2 = power_word(second.1);
        for (u, sign) in [(Letter::S, 1), (Letter::W, -1)] {
            match first.0 .1 {
                // δ-like pairs (ij)(kl): M1 tr(M2 U)
                1 => {
                    let mut trace = m2.clone();
                    trace.push(u);
                    out.add_traced(m1.clone(), &trace, &one);
                }
                // (ik)(jl): M1 U M2 ; (il)(jk): M1 Uᵀ M2
                k => {
                    let mut w = m1.clone();
                    w.push(u);
                    w.extend(&m2);
                    let c = if k == 3 { int(sign) } else { one.clone() };
                    out.add(Monomial::word(w), &c);
                }
            }
        }
    }
    let traces: Vec<Word> = match term.invariant() {
        crate::basis::Invariant::One => vec![],
        crate::basis::Invariant::TrT => vec![vec![Letter::T]],
        crate::basis::Invariant::TrTSquared => vec![vec![Letter::T], vec![Letter::T]],
        crate::basis::Invariant::TrT2 => vec![vec![Letter::T, Letter::T]],
    };
    out.times_traces(&traces)
}

/// One matrix-valued term of the contracted closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractedTerm {
    /// Transpose-orbit representative; the term is `m + mᵀ`, or `m` if
    /// `m = mᵀ`.
    pub key: Monomial,
    pub label: String,
}

impl ContractedTerm {
    fn from_key(key: Monomial) -> Self {
        let label = key.orbit_label();
        ContractedTerm { key, label }
    }

    fn evaluate_with(&self, m: &Matrices) -> DenseTensor {
        let mut v = self.key.evaluate(m);
        let (tr, sign) = self.key.transposed();
        if tr != self.key {
            v.add_scaled(&int(sign), &tr.evaluate(m)).unwrap();
        }
        v
    }

    pub fn evaluate(&self, t: &DenseTensor, u: &DenseTensor) -> Result<DenseTensor> {
        Ok(self.evaluate_with(&Matrices::new(t, u)?))
    }
}

/// Conventional print order of the derived terms.
pub const CONVENTIONAL_ORDER: [&str; CLOSURE_TERMS] = [
    "S tr(T)",
    "I tr(TS)",
    "TS + ST",
    "TW - WT",
    "S tr(T)^2",
    "S tr(T^2)",
    "I tr(T) tr(TS)",
    "(TS + ST) tr(T)",
    "(TW - WT) tr(T)",
    "I tr(T^2 S)",
    "T^2 S + S T^2",
    "T^2 W - W T^2",
    "T tr(TS)",
];

/// The derived closure structure, built once.
#[derive(Debug)]
pub struct ClosureDerivation {
    pub terms: Vec<ContractedTerm>,
    /// `13 × 28`; column `n` is representation term `n` (linear then quadratic).
    pub map: RationalMatrix,
    /// `TST` as a combination of other orbit terms.
    pub tst_relation: Vec<(ContractedTerm, Rational)>,
}

pub fn derivation() -> &'static ClosureDerivation {
    static DERIVATION: OnceLock<ClosureDerivation> = OnceLock::new();
    DERIVATION.get_or_init(derive)
}

pub fn derive_contracted_terms() -> &'static [ContractedTerm] {
    &derivation().terms
}

fn tst() -> Monomial {
    Monomial::word(vec![Letter::T, Letter::S, Letter::T])
}

fn sample_vector<'a>(key: &Monomial, points: impl Iterator<Item = &'a Matrices>) -> Vec<Rational> {
    let term = ContractedTerm::from_key(key.clone());
    points
        .flat_map(|m| term.evaluate_with(m).into_entries())
        .collect()
}

fn sample_points(seed: u64, n: usize) -> Vec<Matrices> {
    let mut rng = sampling::rng(seed);
    (0..n)
        .map(|_| Matrices {
            t: sampling::random_symmetric(&mut rng),
            s: sampling::random_trace_free_symmetric(&mut rng),
            w: DenseTensor::zeros(3, 2).unwrap(),
        })
        .collect()
}

/// Finds `TST = Σ c_m m` over the orbit terms of the same degree, by exact
/// span solving on seeded samples, and re-checks it on fresh samples.
fn reduce_tst(candidates: &[Monomial]) -> Vec<(Monomial, Rational)> {
    let fit = sample_points(0x7e57, 12);
    let rows: Vec<Vec<Rational>> = candidates
        .iter()
        .map(|c| sample_vector(c, fit.iter()))
        .collect();
    let system = RationalMatrix::from_rows(&rows).unwrap();
    let coeffs = solve_in_span(&sample_vector(&tst(), fit.iter()), &system)
        .unwrap()
        .expect("TST lies in the span of the other degree-(2, 1) terms");
    let relation: Vec<(Monomial, Rational)> = candidates
        .iter()
        .cloned()
        .zip(coeffs)
        .filter(|(_, c)| !c.is_zero())
        .collect();
    for m in &sample_points(0xc0ffee, 10) {
        let mut rhs = DenseTensor::zeros(3, 2).unwrap();
        for (k, c) in &relation {
            rhs.add_scaled(c, &ContractedTerm::from_key(k.clone()).evaluate_with(m))
                .unwrap();
        }
        assert_eq!(
            rhs,
            tst().evaluate(m),
            "TST relation fails on a fresh sample"
        );
    }
    relation
}

fn derive() -> ClosureDerivation {
    let b = basis();
    let columns: Vec<BTreeMap<Monomial, Rational>> = b
        .linear
        .iter()
        .chain(&b.quadratic)
        .map(|t| contract_term(t).symmetrized().orbit_coefficients())
        .collect();

    let candidates: Vec<Monomial> = columns
        .iter()
        .flat_map(|c| c.keys())
        .filter(|m| {
            **m != tst()
                && m.letter_count(Letter::T) == 2
                && m.letter_count(Letter::S) == 1
                && m.letter_count(Letter::W) == 0
        })
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let relation = reduce_tst(&candidates);

    let reduced: Vec<BTreeMap<Monomial, Rational>> = columns
        .into_iter()
        .map(|mut col| {
            if let Some(c) = col.remove(&tst()) {
                for (k, r) in &relation {
                    let e = col.entry(k.clone()).or_insert_with(Rational::zero);
                    *e += &c * r;
                }
            }
            col.retain(|_, v| !v.is_zero());
            col
        })
        .collect();

    let keys: BTreeSet<Monomial> = reduced.iter().flat_map(|c| c.keys().cloned()).collect();
    let mut terms: Vec<ContractedTerm> = keys.into_iter().map(ContractedTerm::from_key).collect();
    let position = |t: &ContractedTerm| {
        CONVENTIONAL_ORDER
            .iter()
            .position(|l| *l == t.label)
            .unwrap_or(usize::MAX)
    };
    terms.sort_by(|x, y| {
        position(x)
            .cmp(&position(y))
            .then_with(|| x.label.cmp(&y.label))
    });

    let mut map = vec![Rational::zero(); terms.len() * reduced.len()];
    for (col, entries) in reduced.iter().enumerate() {
        for (k, v) in entries {
            let row = terms.iter().position(|t| t.key == *k).unwrap();
            map[row * reduced.len() + col] = v.clone();
        }
    }
    let map = RationalMatrix::new(terms.len(), reduced.len(), map).unwrap();
    let tst_relation = relation
        .into_iter()
        .map(|(k, c)| (ContractedTerm::from_key(k), c))
        .collect();
    ClosureDerivation {
        terms,
        map,
        tst_relation,
    }
}

/// `(S, W)` with `S = (U + Uᵀ)/2`, `W = (U − Uᵀ)/2`.
pub fn split_velocity_gradient(u: &DenseTensor) -> Result<(DenseTensor, DenseTensor)> {
    require_matrix3(u)?;
    let ut = u.transpose()?;
    let half = frac(1, 2);
    Ok((u.try_add(&ut)?.scale(&half), u.try_sub(&ut)?.scale(&half)))
}

fn require_matrix3(m: &DenseTensor) -> Result<()> {
    if m.order() != 2 {
        return Err(Error::WrongOrder {
            expected: 2,
            found: m.order(),
        });
    }
    if m.dim() != 3 {
        return Err(Error::DimensionMismatch(3, m.dim()));
    }
    Ok(())
}

/// Velocity gradient `U_ij = ∂U_i/∂x_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VelocityGradient {
    u: DenseTensor,
}

impl VelocityGradient {
    pub fn new(u: DenseTensor) -> Result<Self> {
        require_matrix3(&u)?;
        Ok(VelocityGradient { u })
    }

    /// Rejects `tr U ≠ 0`.
    pub fn incompressible(u: DenseTensor) -> Result<Self> {
        let g = Self::new(u)?;
        let tr = g.u.trace()?;
        if !tr.is_zero() {
            return Err(Error::Compressible(rational::format(&tr)));
        }
        Ok(g)
    }

    pub fn tensor(&self) -> &DenseTensor {
        &self.u
    }

    pub fn strain(&self) -> DenseTensor {
        split_velocity_gradient(&self.u).unwrap().0
    }

    pub fn vorticity(&self) -> DenseTensor {
        split_velocity_gradient(&self.u).unwrap().1
    }

    pub fn is_incompressible(&self) -> bool {
        self.u.trace().unwrap().is_zero()
    }

    /// `U − (tr U / 3) I`.
    pub fn deviatoric(&self) -> Self {
        let shift = self.u.trace().unwrap() * frac(-1, 3);
        let mut u = self.u.clone();
        u.add_scaled(&shift, &DenseTensor::identity(3).unwrap())
            .unwrap();
        VelocityGradient { u }
    }
}

/// `T_ij = ⟨u_i u_j⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReynoldsStress {
    t: DenseTensor,
}

fn det3(m: &DenseTensor) -> Rational {
    let a = |i, j| m.at(i, j);
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
        - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

impl ReynoldsStress {
    pub fn new(t: DenseTensor) -> Result<Self> {
        require_matrix3(&t)?;
        t.require_symmetric()?;
        Ok(ReynoldsStress { t })
    }

    pub fn tensor(&self) -> &DenseTensor {
        &self.t
    }

    /// Positive semidefinite, via all principal minors.
    pub fn is_realizable(&self) -> bool {
        let t = &self.t;
        let diag = (0..3).all(|i| !t.at(i, i).is_negative());
        let minors = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .all(|&(i, j)| !(t.at(i, i) * t.at(j, j) - t.at(i, j) * t.at(j, i)).is_negative());
        diag && minors && !det3(t).is_negative()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureCoefficients {
    pub a: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsJson {
    pub a: Vec<String>,
}

impl ClosureCoefficients {
    pub fn new(a: Vec<Rational>) -> Result<Self> {
        if a.len() != CLOSURE_TERMS {
            return Err(Error::CoefficientCount {
                expected: CLOSURE_TERMS,
                found: a.len(),
            });
        }
        Ok(ClosureCoefficients { a })
    }

    pub fn zero() -> Self {
        ClosureCoefficients {
            a: vec![Rational::zero(); CLOSURE_TERMS],
        }
    }

    /// `a_n = 1` (1-based), all others zero.
    pub fn unit(n: usize) -> Self {
        let mut c = Self::zero();
        c.a[n - 1] = Rational::one();
        c
    }

    pub fn to_json(&self) -> CoefficientsJson {
        CoefficientsJson {
            a: format_rationals(&self.a),
        }
    }

    pub fn from_json(j: &CoefficientsJson) -> Result<Self> {
        Self::new(parse_rationals(&j.a)?)
    }
}

/// The 28 → 13 coefficient map.
pub fn map_coefficients(model: &RepresentationModel) -> ClosureCoefficients {
    let c: Vec<Rational> = model.coefficients().cloned().collect();
    let m = &derivation().map;
    let a = (0..m.rows())
        .map(|r| {
            m.row(r)
                .iter()
                .zip(&c)
                .filter(|(x, _)| !x.is_zero())
                .map(|(x, y)| x * y)
                .sum()
        })
        .collect();
    ClosureCoefficients { a }
}

/// `Σ a_m Term_m(T, S, W)`; `U` must be trace-free.
pub fn evaluate_closure(
    coeffs: &ClosureCoefficients,
    t: &ReynoldsStress,
    u: &VelocityGradient,
) -> Result<DenseTensor> {
    if coeffs.a.len() != CLOSURE_TERMS {
        return Err(Error::CoefficientCount {
            expected: CLOSURE_TERMS,
            found: coeffs.a.len(),
        });
    }
    let tr = u.tensor().trace()?;
    if !tr.is_zero() {
        return Err(Error::Compressible(rational::format(&tr)));
    }
    let m = Matrices::new(t.tensor(), u.tensor())?;
    let mut acc = DenseTensor::zeros(3, 2)?;
    for (c, term) in coeffs.a.iter().zip(derive_contracted_terms()) {
        if !c.is_zero() {
            acc.add_scaled(c, &term.evaluate_with(&m))?;
        }
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceMode {
    /// Reject `tr S ≠ 0`.
    Strict,
    /// Evaluate anyway.
    Lenient,
}

/// Left side of
/// `2TST + 2(T²S + ST²) − 2(TS + ST) tr T − 2T tr(TS) − S tr T² + S (tr T)²
///  + 2I tr T tr(TS) − 2I tr(T²S)`, which vanishes for trace-free `S`.
pub fn verify_rivlin_identity(
    t: &DenseTensor,
    s: &DenseTensor,
    mode: TraceMode,
) -> Result<DenseTensor> {
    require_matrix3(t)?;
    require_matrix3(s)?;
    t.require_symmetric()?;
    s.require_symmetric()?;
    let trs = s.trace()?;
    if mode == TraceMode::Strict && !trs.is_zero() {
        return Err(Error::TraceFulStrain(rational::format(&trs)));
    }
    let id = DenseTensor::identity(3)?;
    let t2 = t.matmul(t)?;
    let ts = t.matmul(s)?;
    let st = s.matmul(t)?;
    let tr_t = t.trace()?;
    let tr_t2 = t2.trace()?;
    let tr_ts = ts.trace()?;
    let tr_t2s = t2.matmul(s)?.trace()?;
    let mut r = ts.matmul(t)?.scale(&int(2));
    r.add_scaled(&int(2), &t2.matmul(s)?)?;
    r.add_scaled(&int(2), &s.matmul(&t2)?)?;
    r.add_scaled(&(int(-2) * &tr_t), &ts.try_add(&st)?)?;
    r.add_scaled(&(int(-2) * &tr_ts), t)?;
    r.add_scaled(&-tr_t2.clone(), s)?;
    r.add_scaled(&(&tr_t * &tr_t), s)?;
    r.add_scaled(&(int(2) * &tr_t * &tr_ts), &id)?;
    r.add_scaled(&(int(-2) * &tr_t2s), &id)?;
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualPath {
    pub lhs: DenseTensor,
    pub rhs: DenseTensor,
    pub equal: bool,
}

/// Direct contraction of the representation against the mapped 13-term form.
pub fn dual_path_check(
    model: &RepresentationModel,
    t: &DenseTensor,
    u: &DenseTensor,
) -> Result<DualPath> {
    let stress = ReynoldsStress::new(t.clone())?;
    let grad = VelocityGradient::incompressible(u.clone())?;
    let a = evaluate_representation(model, t)?;
    let lhs = a.symmetrize_pair((0, 1))?.contract_trailing(&[u])?;
    let rhs = evaluate_closure(&map_coefficients(model), &stress, &grad)?;
    let equal = lhs == rhs;
    Ok(DualPath { lhs, rhs, equal })
}

/// `evaluate_closure(a, QTQᵀ, QUQᵀ) = Q · evaluate_closure(a, T, U) · Qᵀ` over
/// the 24 proper signed permutations.
pub fn frame_check(coeffs: &ClosureCoefficients, t: &DenseTensor, u: &DenseTensor) -> Result<bool> {
    Ok(frame_residual(coeffs, t, u)? == 0)
}

/// Largest number of nonzero entries in `rotated − Q·phi·Qᵀ` over the 24
/// rotations.
pub fn frame_residual(
    coeffs: &ClosureCoefficients,
    t: &DenseTensor,
    u: &DenseTensor,
) -> Result<usize> {
    let phi = evaluate_closure(
        coeffs,
        &ReynoldsStress::new(t.clone())?,
        &VelocityGradient::incompressible(u.clone())?,
    )?;
    let mut worst = 0;
    for q in signed_permutation_rotations() {
        let rotated = evaluate_closure(
            coeffs,
            &ReynoldsStress::new(t.rotate(&q)?)?,
            &VelocityGradient::incompressible(u.rotate(&q)?)?,
        )?;
        worst = worst.max(rotated.try_sub(&phi.rotate(&q)?)?.count_nonzero());
    }
    Ok(worst)
}

/// Closure model, in either coefficient form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosureModel {
    Coefficients(ClosureCoefficients),
    Representation(RepresentationModel),
}

impl ClosureModel {
    pub fn coefficients(&self) -> ClosureCoefficients {
        match self {
            ClosureModel::Coefficients(c) => c.clone(),
            ClosureModel::Representation(m) => map_coefficients(m),
        }
    }
}

/// `{"coefficients": {"a": [...]}}` or `{"representation": {...}}` together
/// with `"T"`, `"U"` and an optional `"strict"` (default true).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoefficientsJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representation: Option<RepresentationJson>,
    #[serde(rename = "T")]
    pub t: TensorJson,
    #[serde(rename = "U")]
    pub u: TensorJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
}

impl ClosureInput {
    pub fn model(&self) -> Result<ClosureModel> {
        match (&self.coefficients, &self.representation) {
            (Some(c), None) => Ok(ClosureModel::Coefficients(ClosureCoefficients::from_json(
                c,
            )?)),
            (None, Some(r)) => Ok(ClosureModel::Representation(
                RepresentationModel::from_json(r)?,
            )),
            _ => Err(Error::Json(
                "exactly one of \"coefficients\" or \"representation\" is required".to_string(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureChecks {
    pub symmetric: bool,
    pub incompressible: bool,
    #[serde(rename = "realizable_T")]
    pub realizable_t: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureOutput {
    pub phi: TensorJson,
    pub checks: ClosureChecks,
}

/// Evaluates a closure input record. Non-strict inputs with `tr U ≠ 0` are
/// deviatorized and reported as not incompressible.
pub fn run_closure(input: &ClosureInput) -> Result<ClosureOutput> {
    let model = input.model()?;
    let t = ReynoldsStress::new(DenseTensor::try_from(&input.t)?)?;
    let u = VelocityGradient::new(DenseTensor::try_from(&input.u)?)?;
    let incompressible = u.is_incompressible();
    let u = if incompressible || input.strict.unwrap_or(true) {
        u
    } else {
        u.deviatoric()
    };
    let phi = evaluate_closure(&model.coefficients(), &t, &u)?;
    Ok(ClosureOutput {
        checks: ClosureChecks {
            symmetric: phi.is_symmetric(),
            incompressible,
            realizable_t: t.is_realizable(),
        },
        phi: TensorJson::from(&phi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{generate_linear_terms, generate_quadratic_terms};
    use crate::linalg::rank;

    fn m(rows: [[i64; 3]; 3]) -> DenseTensor {
        DenseTensor::from_int_rows(rows)
    }

    fn e01() -> DenseTensor {
        m([[0, 1, 0], [0, 0, 0], [0, 0, 0]])
    }

    fn diag123() -> DenseTensor {
        m([[1, 0, 0], [0, 2, 0], [0, 0, 3]])
    }

    fn half_rows(rows: [[i64; 3]; 3]) -> DenseTensor {
        m(rows).scale(&frac(1, 2))
    }

    #[test]
    fn split_examples() {
        let (s, w) = split_velocity_gradient(&e01()).unwrap();
        assert_eq!(s, half_rows([[0, 1, 0], [1, 0, 0], [0, 0, 0]]));
        assert_eq!(w, half_rows([[0, 1, 0], [-1, 0, 0], [0, 0, 0]]));
        let sym = m([[1, 2, 3], [2, 5, 6], [3, 6, 0]]);
        assert!(split_velocity_gradient(&sym).unwrap().1.is_zero());
        let skew = m([[0, 2, -3], [-2, 0, 6], [3, -6, 0]]);
        assert!(split_velocity_gradient(&skew).unwrap().0.is_zero());
        let mut rng = sampling::rng(3);
        let u = sampling::random_trace_free(&mut rng);
        let (s, w) = split_velocity_gradient(&u).unwrap();
        assert_eq!(s.try_add(&w).unwrap(), u);
    }

    #[test]
    fn canonical_traces() {
        use Letter::*;
        assert_eq!(canonical_trace(&[T, W]), None);
        assert_eq!(canonical_trace(&[S, T]), Some((vec![T, S], 1)));
        assert_eq!(canonical_trace(&[T, S, T]), Some((vec![T, T, S], 1)));
        assert_eq!(canonical_trace(&[T, T, W]), None);
    }

    #[test]
    fn trace_of_symmetric_times_antisymmetric_vanishes() {
        let mut rng = sampling::rng(4);
        for _ in 0..10 {
            let t = sampling::random_symmetric(&mut rng);
            let w = split_velocity_gradient(&sampling::random_trace_free(&mut rng))
                .unwrap()
                .1;
            assert!(t.matmul(&w).unwrap().trace().unwrap().is_zero());
            assert!(t
                .matmul(&t)
                .unwrap()
                .matmul(&w)
                .unwrap()
                .trace()
                .unwrap()
                .is_zero());
        }
    }

    #[test]
    fn derived_terms_match_conventional_list() {
        let labels: Vec<&str> = derive_contracted_terms()
            .iter()
            .map(|t| t.label.as_str())
            .collect();
        assert_eq!(labels, CONVENTIONAL_ORDER);
    }

    #[test]
    fn map_has_full_rank() {
        let map = &derivation().map;
        assert_eq!((map.rows(), map.cols()), (13, 28));
        assert_eq!(rank(map), 13);
    }

    #[test]
    fn tst_relation_matches_the_identity() {
        let got: BTreeMap<String, Rational> = derivation()
            .tst_relation
            .iter()
            .map(|(t, c)| (t.label.clone(), c.clone()))
            .collect();
        let expect: BTreeMap<String, Rational> = [
            ("T^2 S + S T^2", int(-1)),
            ("(TS + ST) tr(T)", int(1)),
            ("T tr(TS)", int(1)),
            ("S tr(T^2)", frac(1, 2)),
            ("S tr(T)^2", frac(-1, 2)),
            ("I tr(T) tr(TS)", int(-1)),
            ("I tr(T^2 S)", int(1)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        assert_eq!(got, expect);
    }

    fn unit_term(id: &str) -> TermShape {
        generate_linear_terms()
            .into_iter()
            .chain(generate_quadratic_terms())
            .find(|t| t.id() == id)
            .unwrap()
    }

    #[test]
    fn contraction_examples() {
        let labels = |id: &str, sym: bool| {
            let p = contract_term(&unit_term(id));
            if sym { p.symmetrized() } else { p }.labels()
        };
        assert_eq!(
            labels("dd_ik_jl.trT", true),
            vec![("S tr(T)".to_string(), int(2))]
        );
        assert_eq!(
            labels("dT_ij_kl.1", false),
            vec![("I tr(TS)".to_string(), int(1))]
        );
        assert_eq!(
            labels("TT_sym", false),
            vec![
                ("TST".to_string(), int(2)),
                ("T tr(TS)".to_string(), int(1))
            ]
        );
    }

    #[test]
    fn symbolic_contraction_matches_numeric() {
        let mut rng = sampling::rng(17);
        let t = sampling::random_symmetric(&mut rng);
        let u = sampling::random_trace_free(&mut rng);
        for term in generate_linear_terms()
            .iter()
            .chain(&generate_quadratic_terms())
        {
            let direct = term.evaluate(&t).unwrap().contract_trailing(&[&u]).unwrap();
            assert_eq!(
                contract_term(term).evaluate(&t, &u).unwrap(),
                direct,
                "{term}"
            );
        }
    }

    #[test]
    fn closure_examples() {
        let t = ReynoldsStress::new(diag123()).unwrap();
        let u = VelocityGradient::incompressible(e01()).unwrap();
        assert!(evaluate_closure(&ClosureCoefficients::zero(), &t, &u)
            .unwrap()
            .is_zero());
        assert_eq!(
            evaluate_closure(&ClosureCoefficients::unit(3), &t, &u).unwrap(),
            half_rows([[0, 3, 0], [3, 0, 0], [0, 0, 0]])
        );
        assert_eq!(
            evaluate_closure(&ClosureCoefficients::unit(4), &t, &u).unwrap(),
            half_rows([[0, -1, 0], [-1, 0, 0], [0, 0, 0]])
        );
    }

    #[test]
    fn compressible_input_is_rejected() {
        let u = m([[1, 0, 0], [0, 0, 0], [0, 0, 0]]);
        assert!(matches!(
            VelocityGradient::incompressible(u.clone()),
            Err(Error::Compressible(_))
        ));
        let g = VelocityGradient::new(u).unwrap();
        let t = ReynoldsStress::new(diag123()).unwrap();
        assert!(matches!(
            evaluate_closure(&ClosureCoefficients::unit(1), &t, &g),
            Err(Error::Compressible(_))
        ));
        assert!(g.deviatoric().is_incompressible());
    }

    #[test]
    fn rivlin_examples() {
        let id = DenseTensor::identity(3).unwrap();
        let mut rng = sampling::rng(9);
        let s = sampling::random_trace_free_symmetric(&mut rng);
        assert!(verify_rivlin_identity(&id, &s, TraceMode::Strict)
            .unwrap()
            .is_zero());
        assert!(
            verify_rivlin_identity(&DenseTensor::zeros(3, 2).unwrap(), &s, TraceMode::Strict)
                .unwrap()
                .is_zero()
        );
        assert_eq!(
            verify_rivlin_identity(&id, &id, TraceMode::Lenient).unwrap(),
            id.scale(&int(6))
        );
        assert!(matches!(
            verify_rivlin_identity(&id, &id, TraceMode::Strict),
            Err(Error::TraceFulStrain(_))
        ));
        for _ in 0..20 {
            let t = sampling::random_symmetric(&mut rng);
            let s = sampling::random_trace_free_symmetric(&mut rng);
            assert!(verify_rivlin_identity(&t, &s, TraceMode::Strict)
                .unwrap()
                .is_zero());
        }
    }

    #[test]
    fn dual_path_examples() {
        let t = diag123();
        let u = e01();
        let zero = dual_path_check(&RepresentationModel::zero(), &t, &u).unwrap();
        assert!(zero.equal && zero.lhs.is_zero());

        let single =
            dual_path_check(&RepresentationModel::unit("dd_ik_jl.trT").unwrap(), &t, &u).unwrap();
        let (s, _) = split_velocity_gradient(&u).unwrap();
        assert!(single.equal);
        assert_eq!(single.lhs, s.scale(&int(12)));

        let mut rng = sampling::rng(50);
        for _ in 0..10 {
            let model = RepresentationModel::new(
                sampling::random_rationals(&mut rng, 9),
                sampling::random_rationals(&mut rng, 19),
            )
            .unwrap();
            let t = sampling::random_symmetric(&mut rng);
            let u = sampling::random_trace_free(&mut rng);
            assert!(dual_path_check(&model, &t, &u).unwrap().equal);
        }
    }

    #[test]
    fn tt_sym_redistributes_tst() {
        let q = frac(3, 2);
        let mut model = RepresentationModel::zero();
        model.quadratic[0] = q.clone();
        let a = map_coefficients(&model);
        // symmetrized: 2q T tr(TS) + 4q TST, and TST contributes +1 to T tr(TS)
        assert_eq!(a.a[12], &q * int(6));
        assert_eq!(a.a[10], &q * int(-4));
        assert_eq!(a.a[1], Rational::zero());
        assert!(map_coefficients(&RepresentationModel::zero())
            .a
            .iter()
            .all(Zero::is_zero));
    }

    #[test]
    fn outputs_are_symmetric_and_frame_consistent() {
        let mut rng = sampling::rng(60);
        for _ in 0..2 {
            let a = ClosureCoefficients::new(sampling::random_rationals(&mut rng, 13)).unwrap();
            let t = sampling::random_symmetric(&mut rng);
            let u = sampling::random_trace_free(&mut rng);
            let phi = evaluate_closure(
                &a,
                &ReynoldsStress::new(t.clone()).unwrap(),
                &VelocityGradient::incompressible(u.clone()).unwrap(),
            )
            .unwrap();
            assert!(phi.is_symmetric());
            assert!(frame_check(&a, &t, &u).unwrap());
        }
    }

    #[test]
    fn realizability() {
        assert!(ReynoldsStress::new(diag123()).unwrap().is_realizable());
        assert!(ReynoldsStress::new(m([[1, 1, 0], [1, 1, 0], [0, 0, 0]]))
            .unwrap()
            .is_realizable());
        assert!(!ReynoldsStress::new(m([[1, 2, 0], [2, 1, 0], [0, 0, 1]]))
            .unwrap()
            .is_realizable());
        assert!(!ReynoldsStress::new(m([[-1, 0, 0], [0, 1, 0], [0, 0, 1]]))
            .unwrap()
            .is_realizable());
    }

    #[test]
    fn closure_input_round_trip() {
        let mut a = vec!["0".to_string(); 13];
        a[2] = "1".to_string();
        let input = ClosureInput {
            coefficients: Some(CoefficientsJson { a }),
            representation: None,
            t: TensorJson::from(&diag123()),
            u: TensorJson::from(&e01()),
            strict: None,
        };
        let text = serde_json::to_string(&input).unwrap();
        let back: ClosureInput = serde_json::from_str(&text).unwrap();
        assert_eq!(back, input);
        let out = run_closure(&back).unwrap();
        assert_eq!(
            DenseTensor::try_from(&out.phi).unwrap(),
            half_rows([[0, 3, 0], [3, 0, 0], [0, 0, 0]])
        );
        assert!(out.checks.symmetric && out.checks.incompressible && out.checks.realizable_t);

        let mut both = input.clone();
        both.representation = Some(RepresentationModel::zero().to_json());
        assert!(run_closure(&both).is_err());
    }

    #[test]
    fn representation_input_matches_coefficient_input() {
        let mut rng = sampling::rng(70);
        let model = RepresentationModel::new(
            sampling::random_rationals(&mut rng, 9),
            sampling::random_rationals(&mut rng, 19),
        )
        .unwrap();
        let t = TensorJson::from(&diag123());
        let u = TensorJson::from(&e01());
        let rep = ClosureInput {
            coefficients: None,
            representation: Some(model.to_json()),
            t: t.clone(),
            u: u.clone(),
            strict: None,
        };
        let coef = ClosureInput {
            coefficients: Some(map_coefficients(&model).to_json()),
            representation: None,
            t,
            u,
            strict: None,
        };
        assert_eq!(run_closure(&rep).unwrap(), run_closure(&coef).unwrap());
    }
}
