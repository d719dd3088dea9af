//! Representation terms for isotropic fourth-order tensor-valued polynomials
//! of degree ≤ 2 in a symmetric `T`.
//!
//! An isomer applied to copies of a symmetric `T` is determined, as a function
//! of `T`, by the chains and loops its pairs form: following the pairs from a
//! free slot through successive `T` factors ends at another free slot and gives
//! `(T^p)_ab`, while pairs that never reach a free slot close into `tr T^p`.
//! [`ActionShape`] records exactly that, and is the deduplication key that
//! turns 15 order-6 isomers into 9 linear terms and 105 order-8 isomers into
//! 21 raw quadratic terms.
//!
//! The 21 raw quadratic terms satisfy two linear relations in three
//! dimensions (the contracted `4 × 4` generalized Kronecker determinants), which
//! lets the three pure products `T_ij T_kl`, `T_ik T_jl`, `T_il T_jk` be traded
//! for their sum. The reduced basis keeps that sum as `TT_sym` and has 19
//! quadratic terms.
//!
//! Coefficient order is the ascending byte order of the term ids within each
//! degree.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::delta::{expand_as_isomer_combination, GenKroneckerSpec};
use crate::isomer::{apply_isomer, enumerate_isomers, evaluate_isomer, DeltaIsomer, SLOT_LETTERS};
use crate::json::{format_rationals, parse_rationals};
use crate::linalg::{rank, solve_in_span, RationalMatrix};
use crate::rational::{int, Rational};
use crate::tensor::{DenseTensor, MultiIndex};
use crate::{Error, Result};

pub const LINEAR_TERMS: usize = 9;
pub const QUADRATIC_TERMS: usize = 19;
pub const RAW_QUADRATIC_TERMS: usize = 21;
const FREE: usize = 4;

/// Chain/loop structure of an isomer applied to symmetric arguments.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionShape {
    /// `(a, b, p)`: free slots `a < b` joined through `p` factors of `T`.
    pub chains: Vec<(usize, usize, u32)>,
    /// Powers of the closed traces `tr T^p`, ascending.
    pub loops: Vec<u32>,
}

/// Follows the pairs of `iso`, whose slots past `free` are grouped into
/// consecutive argument pairs.
pub fn action_shape(iso: &DeltaIsomer, free: usize) -> ActionShape {
    let order = iso.order();
    let arg_partner = |s: usize| free + ((s - free) ^ 1);
    let mut visited = vec![false; order];
    let mut chains = Vec::new();
    for start in 0..free {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut cur = start;
        let mut power = 0;
        loop {
            let next = iso.partner(cur);
            visited[next] = true;
            if next < free {
                chains.push((start.min(next), start.max(next), power));
                break;
            }
            let across = arg_partner(next);
            visited[across] = true;
            power += 1;
            cur = across;
        }
    }
    let mut loops = Vec::new();
    for start in free..order {
        if visited[start] {
            continue;
        }
        let mut cur = start;
        let mut power = 0;
        loop {
            visited[cur] = true;
            let across = arg_partner(cur);
            visited[across] = true;
            power += 1;
            let next = iso.partner(across);
            if next == start {
                break;
            }
            cur = next;
        }
        loops.push(power);
    }
    chains.sort_unstable();
    loops.sort_unstable();
    ActionShape { chains, loops }
}

/// One of the three ways to split `i, j, k, l` into two pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pairing {
    IjKl,
    IkJl,
    IlJk,
}

impl Pairing {
    pub const ALL: [Pairing; 3] = [Pairing::IjKl, Pairing::IkJl, Pairing::IlJk];

    pub fn pairs(self) -> [(usize, usize); 2] {
        match self {
            Pairing::IjKl => [(0, 1), (2, 3)],
            Pairing::IkJl => [(0, 2), (1, 3)],
            Pairing::IlJk => [(0, 3), (1, 2)],
        }
    }

    /// The pairing containing `pair`.
    pub fn containing(pair: (usize, usize)) -> Pairing {
        let (a, b) = (pair.0.min(pair.1), pair.0.max(pair.1));
        let other = if a == 0 { b } else { 6 - a - b };
        match other {
            1 => Pairing::IjKl,
            2 => Pairing::IkJl,
            _ => Pairing::IlJk,
        }
    }
}

fn complement(pair: (usize, usize)) -> (usize, usize) {
    let rest: Vec<usize> = (0..FREE).filter(|&s| s != pair.0 && s != pair.1).collect();
    (rest[0], rest[1])
}

fn letters(pair: (usize, usize)) -> String {
    format!("{}{}", SLOT_LETTERS[pair.0], SLOT_LETTERS[pair.1])
}

/// Scalar invariant multiplying a skeleton.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Invariant {
    One,
    TrT,
    TrTSquared,
    TrT2,
}

impl Invariant {
    pub fn degree(self) -> u32 {
        match self {
            Invariant::One => 0,
            Invariant::TrT => 1,
            Invariant::TrTSquared | Invariant::TrT2 => 2,
        }
    }

    fn from_loops(loops: &[u32]) -> Option<Self> {
        match loops {
            [] => Some(Invariant::One),
            [1] => Some(Invariant::TrT),
            [1, 1] => Some(Invariant::TrTSquared),
            [2] => Some(Invariant::TrT2),
            _ => None,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Invariant::One => "1",
            Invariant::TrT => "trT",
            Invariant::TrTSquared => "trT_sq",
            Invariant::TrT2 => "trT2",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Invariant::One => "1",
            Invariant::TrT => "trT",
            Invariant::TrTSquared => "(trT)^2",
            Invariant::TrT2 => "trT^2",
        }
    }

    fn value(self, t: &DenseTensor) -> Result<Rational> {
        let inv = t.trace_invariants()?;
        Ok(match self {
            Invariant::One => Rational::one(),
            Invariant::TrT => inv.trace,
            Invariant::TrTSquared => inv.square_of_trace,
            Invariant::TrT2 => inv.trace_of_square,
        })
    }

    /// Loop pairs on the argument slots `4..` realizing the invariant after
    /// `used` argument slots are already taken.
    fn loop_pairs(self, used: usize) -> Vec<(usize, usize)> {
        let s = FREE + used;
        match self {
            Invariant::One => vec![],
            Invariant::TrT => vec![(s, s + 1)],
            Invariant::TrTSquared => vec![(s, s + 1), (s + 2, s + 3)],
            Invariant::TrT2 => vec![(s, s + 2), (s + 1, s + 3)],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Skeleton {
    /// `δ_ab δ_cd`.
    DeltaDelta(Pairing),
    /// `δ_ab (T^power)_cd` with `(c, d)` the complement of `delta`.
    DeltaT { delta: (usize, usize), power: u32 },
    /// `T_ab T_cd`; only present in the raw quadratic list.
    TTPair(Pairing),
    /// `T_ij T_kl + T_ik T_jl + T_il T_jk`.
    TTSym,
}

impl Skeleton {
    pub fn degree(self) -> u32 {
        match self {
            Skeleton::DeltaDelta(_) => 0,
            Skeleton::DeltaT { power, .. } => power,
            Skeleton::TTPair(_) | Skeleton::TTSym => 2,
        }
    }

    pub fn label(self) -> String {
        match self {
            Skeleton::DeltaDelta(p) => {
                let [a, b] = p.pairs();
                format!("delta_{} delta_{}", letters(a), letters(b))
            }
            Skeleton::DeltaT { delta, power } => {
                let t = if power == 1 { "T" } else { "T2" };
                format!(
                    "delta_{} {t}_{}",
                    letters(delta),
                    letters(complement(delta))
                )
            }
            Skeleton::TTPair(p) => {
                let [a, b] = p.pairs();
                format!("T_{} T_{}", letters(a), letters(b))
            }
            Skeleton::TTSym => "T_ij T_kl + T_ik T_jl + T_il T_jk".to_string(),
        }
    }
}

/// One representation term: a skeleton times a scalar invariant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TermShape {
    id: String,
    degree: u32,
    skeleton: Skeleton,
    invariant: Invariant,
}

impl TermShape {
    pub fn new(skeleton: Skeleton, invariant: Invariant) -> Result<Self> {
        let degree = skeleton.degree() + invariant.degree();
        let valid_skeleton = match skeleton {
            Skeleton::DeltaT { delta, power } => {
                delta.0 < delta.1 && delta.1 < FREE && (1..=2).contains(&power)
            }
            Skeleton::TTPair(_) | Skeleton::TTSym => invariant == Invariant::One,
            Skeleton::DeltaDelta(_) => true,
        };
        if !(1..=2).contains(&degree) || !valid_skeleton {
            return Err(Error::Arity(format!(
                "{} times {} is not a degree-1 or degree-2 term",
                skeleton.label(),
                invariant.label()
            )));
        }
        let id = match skeleton {
            Skeleton::DeltaDelta(p) => {
                let [a, b] = p.pairs();
                format!("dd_{}_{}.{}", letters(a), letters(b), invariant.tag())
            }
            Skeleton::DeltaT { delta, power } => {
                let head = if power == 1 { "dT" } else { "dT2" };
                format!(
                    "{head}_{}_{}.{}",
                    letters(delta),
                    letters(complement(delta)),
                    invariant.tag()
                )
            }
            Skeleton::TTPair(p) => {
                let [a, b] = p.pairs();
                format!("TT_{}_{}", letters(a), letters(b))
            }
            Skeleton::TTSym => "TT_sym".to_string(),
        };
        Ok(TermShape {
            id,
            degree,
            skeleton,
            invariant,
        })
    }

    /// Classifies the action of an isomer on the four free slots.
    pub fn from_action(shape: &ActionShape) -> Option<Self> {
        let invariant = Invariant::from_loops(&shape.loops)?;
        let skeleton = match shape.chains.as_slice() {
            [(a, b, 0), (c, d, 0)] => {
                debug_assert_eq!(Pairing::containing((*a, *b)), Pairing::containing((*c, *d)));
                Skeleton::DeltaDelta(Pairing::containing((*a, *b)))
            }
            [(a, b, 0), (_, _, p)] | [(_, _, p), (a, b, 0)] => Skeleton::DeltaT {
                delta: (*a, *b),
                power: *p,
            },
            [(a, b, 1), (_, _, 1)] => Skeleton::TTPair(Pairing::containing((*a, *b))),
            _ => return None,
        };
        TermShape::new(skeleton, invariant).ok()
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn skeleton(&self) -> Skeleton {
        self.skeleton
    }

    pub fn invariant(&self) -> Invariant {
        self.invariant
    }

    /// Number of argument copies the term consumes.
    pub fn arity(&self) -> usize {
        self.degree as usize
    }

    /// Isomers whose sum, applied to symmetric arguments, gives this term.
    pub fn representatives(&self) -> Vec<DeltaIsomer> {
        let tt = |p: Pairing| {
            let [(a, b), (c, d)] = p.pairs();
            DeltaIsomer::new(vec![(a, 4), (b, 5), (c, 6), (d, 7)]).unwrap()
        };
        match self.skeleton {
            Skeleton::DeltaDelta(p) => {
                let mut pairs = p.pairs().to_vec();
                pairs.extend(self.invariant.loop_pairs(0));
                vec![DeltaIsomer::new(pairs).unwrap()]
            }
            Skeleton::DeltaT { delta, power } => {
                let (c, d) = complement(delta);
                let mut pairs = vec![delta];
                if power == 1 {
                    pairs.extend([(c, 4), (d, 5)]);
                } else {
                    pairs.extend([(c, 4), (5, 6), (d, 7)]);
                }
                pairs.extend(self.invariant.loop_pairs(2 * power as usize));
                vec![DeltaIsomer::new(pairs).unwrap()]
            }
            Skeleton::TTPair(p) => vec![tt(p)],
            Skeleton::TTSym => Pairing::ALL.iter().map(|&p| tt(p)).collect(),
        }
    }

    /// Direct evaluation from the skeleton and invariant.
    pub fn evaluate(&self, t: &DenseTensor) -> Result<DenseTensor> {
        t.require_symmetric()?;
        let dim = t.dim();
        let t2 = t.matmul(t)?;
        let scalar = self.invariant.value(t)?;
        let delta = |a: usize, b: usize| a == b;
        let mut out = DenseTensor::zeros(dim, 4)?;
        for idx in MultiIndex::all(dim, 4) {
            let x = &idx.0;
            let tt = |p: Pairing| {
                let [(a, b), (c, d)] = p.pairs();
                t.at(x[a], x[b]) * t.at(x[c], x[d])
            };
            let value = match self.skeleton {
                Skeleton::DeltaDelta(p) => {
                    let [(a, b), (c, d)] = p.pairs();
                    if delta(x[a], x[b]) && delta(x[c], x[d]) {
                        Rational::one()
                    } else {
                        continue;
                    }
                }
                Skeleton::DeltaT {
                    delta: (a, b),
                    power,
                } => {
                    if !delta(x[a], x[b]) {
                        continue;
                    }
                    let (c, d) = complement((a, b));
                    if power == 1 {
                        t.at(x[c], x[d]).clone()
                    } else {
                        t2.at(x[c], x[d]).clone()
                    }
                }
                Skeleton::TTPair(p) => tt(p),
                Skeleton::TTSym => Pairing::ALL.iter().map(|&p| tt(p)).sum(),
            };
            out.set(x, value * &scalar);
        }
        Ok(out)
    }

    /// The isotropic coefficient tensor of order `4 + 2·arity`, symmetrized
    /// over the index symmetries of the argument copies, so that contracting
    /// it with `T ⊗ ⋯ ⊗ T` gives [`TermShape::evaluate`].
    pub fn coefficient_tensor(&self, dim: usize) -> Result<DenseTensor> {
        let order = FREE + 2 * self.arity();
        let mut sum = DenseTensor::zeros(dim, order)?;
        for iso in self.representatives() {
            sum.add_scaled(&Rational::one(), &evaluate_isomer(&iso, dim)?)?;
        }
        symmetrize_argument_slots(&sum, self.arity())
    }
}

impl fmt::Display for TermShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

/// Permutations of the argument slots generated by swapping the two indices
/// of one argument and by exchanging arguments.
fn argument_symmetries(nargs: usize) -> Vec<Vec<usize>> {
    let arg_orders: Vec<Vec<usize>> = match nargs {
        0 => vec![vec![]],
        1 => vec![vec![0]],
        2 => vec![vec![0, 1], vec![1, 0]],
        _ => panic!("at most two arguments"),
    };
    let mut out = Vec::new();
    for order in &arg_orders {
        for flips in 0..(1usize << nargs) {
            let mut perm: Vec<usize> = (0..FREE).collect();
            for (t, &slot) in order.iter().enumerate() {
                for e in 0..2 {
                    let flipped = e ^ (flips >> t & 1);
                    perm.push(FREE + 2 * slot + flipped);
                }
            }
            out.push(perm);
        }
    }
    out
}

pub fn symmetrize_argument_slots(t: &DenseTensor, nargs: usize) -> Result<DenseTensor> {
    let perms = argument_symmetries(nargs);
    let mut acc = DenseTensor::zeros(t.dim(), t.order())?;
    for p in &perms {
        acc.add_scaled(&Rational::one(), &t.permute(p)?)?;
    }
    Ok(acc.scale(&Rational::new(1.into(), perms.len().into())))
}

/// Flattened coefficient tensors, one row per term.
pub fn coefficient_matrix(terms: &[TermShape], dim: usize) -> Result<RationalMatrix> {
    let rows = terms
        .iter()
        .map(|t| t.coefficient_tensor(dim).map(DenseTensor::into_entries))
        .collect::<Result<Vec<_>>>()?;
    RationalMatrix::from_rows(&rows)
}

pub fn certify_independence(terms: &[TermShape], dim: usize) -> Result<usize> {
    Ok(rank(&coefficient_matrix(terms, dim)?))
}

fn distinct_terms(order: usize) -> (Vec<TermShape>, Vec<TermShape>) {
    let set = enumerate_isomers(order).expect("valid order");
    let per_isomer: Vec<TermShape> = set
        .iter()
        .map(|iso| TermShape::from_action(&action_shape(iso, FREE)).expect("degree ≤ 2 action"))
        .collect();
    let ids: BTreeSet<&str> = per_isomer.iter().map(|t| t.id()).collect();
    let mut distinct: Vec<TermShape> = ids
        .iter()
        .map(|id| per_isomer.iter().find(|t| t.id() == *id).unwrap().clone())
        .collect();
    distinct.sort_by(|a, b| a.id.cmp(&b.id));
    (distinct, per_isomer)
}

/// Distinct actions of the 15 order-6 isomers on a symmetric `T`.
pub fn generate_linear_terms() -> Vec<TermShape> {
    basis().linear.clone()
}

/// The 19 reduced quadratic terms.
pub fn generate_quadratic_terms() -> Vec<TermShape> {
    basis().quadratic.clone()
}

/// Distinct actions of the 105 order-8 isomers on `T ⊗ T`, before the
/// determinant relations are used.
pub fn raw_quadratic_terms() -> Vec<TermShape> {
    basis().raw_quadratic.clone()
}

/// Everything derived once from the isomer sets.
#[derive(Debug)]
pub struct RepresentationBasis {
    pub linear: Vec<TermShape>,
    pub quadratic: Vec<TermShape>,
    pub raw_quadratic: Vec<TermShape>,
    /// Linear term index of each order-6 isomer.
    pub linear_of_isomer: Vec<usize>,
    /// Raw quadratic term index of each order-8 isomer.
    pub raw_of_isomer: Vec<usize>,
    /// Each raw quadratic term as a combination of the reduced terms, valid
    /// as functions of symmetric `T` in three dimensions.
    pub raw_in_reduced: Vec<Vec<Rational>>,
    /// The two determinant relations expressed over the raw terms.
    pub raw_relations: [Vec<Rational>; 2],
}

pub fn basis() -> &'static RepresentationBasis {
    static BASIS: OnceLock<RepresentationBasis> = OnceLock::new();
    BASIS.get_or_init(build_basis)
}

fn index_by_id(terms: &[TermShape], id: &str) -> usize {
    terms
        .iter()
        .position(|t| t.id() == id)
        .expect("known term id")
}

fn build_basis() -> RepresentationBasis {
    let (linear, per6) = distinct_terms(6);
    let linear_of_isomer = per6.iter().map(|t| index_by_id(&linear, t.id())).collect();

    let (raw, per8) = distinct_terms(8);
    let raw_of_isomer: Vec<usize> = per8.iter().map(|t| index_by_id(&raw, t.id())).collect();

    let mut quadratic: Vec<TermShape> = raw
        .iter()
        .filter(|t| !matches!(t.skeleton, Skeleton::TTPair(_)))
        .cloned()
        .collect();
    quadratic.push(TermShape::new(Skeleton::TTSym, Invariant::One).unwrap());
    quadratic.sort_by(|a, b| a.id.cmp(&b.id));

    let to_raw = |coeffs: &[Rational]| {
        let mut v = vec![Rational::zero(); raw.len()];
        for (c, &r) in coeffs.iter().zip(&raw_of_isomer) {
            v[r] += c;
        }
        v
    };
    let raw_relations = [
        to_raw(&expand_as_isomer_combination(&GenKroneckerSpec::eq1_10())),
        to_raw(&expand_as_isomer_combination(&GenKroneckerSpec::eq1_11())),
    ];

    // rows: reduced terms in raw coordinates, then the two relations
    let mut rows: Vec<Vec<Rational>> = quadratic
        .iter()
        .map(|q| {
            let mut v = vec![Rational::zero(); raw.len()];
            match q.skeleton {
                Skeleton::TTSym => {
                    for r in raw
                        .iter()
                        .enumerate()
                        .filter(|(_, r)| matches!(r.skeleton, Skeleton::TTPair(_)))
                    {
                        v[r.0] = Rational::one();
                    }
                }
                _ => v[index_by_id(&raw, q.id())] = Rational::one(),
            }
            v
        })
        .collect();
    rows.extend(raw_relations.iter().cloned());
    let system = RationalMatrix::from_rows(&rows).unwrap();

    let raw_in_reduced = (0..raw.len())
        .map(|r| {
            let mut target = vec![Rational::zero(); raw.len()];
            target[r] = Rational::one();
            let mut c = solve_in_span(&target, &system)
                .unwrap()
                .expect("relations make the reduced terms span the raw terms");
            c.truncate(quadratic.len());
            c
        })
        .collect();

    RepresentationBasis {
        linear,
        quadratic,
        raw_quadratic: raw,
        linear_of_isomer,
        raw_of_isomer,
        raw_in_reduced,
        raw_relations,
    }
}

/// Coefficients on the 9 linear and 19 quadratic terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentationModel {
    pub linear: Vec<Rational>,
    pub quadratic: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationJson {
    pub linear: Vec<String>,
    pub quadratic: Vec<String>,
}

impl RepresentationModel {
    pub fn new(linear: Vec<Rational>, quadratic: Vec<Rational>) -> Result<Self> {
        if linear.len() != LINEAR_TERMS {
            return Err(Error::CoefficientCount {
                expected: LINEAR_TERMS,
                found: linear.len(),
            });
        }
        if quadratic.len() != QUADRATIC_TERMS {
            return Err(Error::CoefficientCount {
                expected: QUADRATIC_TERMS,
                found: quadratic.len(),
            });
        }
        Ok(RepresentationModel { linear, quadratic })
    }

    pub fn zero() -> Self {
        RepresentationModel {
            linear: vec![Rational::zero(); LINEAR_TERMS],
            quadratic: vec![Rational::zero(); QUADRATIC_TERMS],
        }
    }

    /// Model with a single unit coefficient on the term with this id.
    pub fn unit(id: &str) -> Result<Self> {
        let b = basis();
        let mut m = Self::zero();
        if let Some(i) = b.linear.iter().position(|t| t.id() == id) {
            m.linear[i] = Rational::one();
        } else if let Some(i) = b.quadratic.iter().position(|t| t.id() == id) {
            m.quadratic[i] = Rational::one();
        } else {
            return Err(Error::Json(format!("unknown term id {id:?}")));
        }
        Ok(m)
    }

    /// Linear then quadratic coefficients.
    pub fn coefficients(&self) -> impl Iterator<Item = &Rational> {
        self.linear.iter().chain(&self.quadratic)
    }

    pub fn to_json(&self) -> RepresentationJson {
        RepresentationJson {
            linear: format_rationals(&self.linear),
            quadratic: format_rationals(&self.quadratic),
        }
    }

    pub fn from_json(j: &RepresentationJson) -> Result<Self> {
        Self::new(parse_rationals(&j.linear)?, parse_rationals(&j.quadratic)?)
    }
}

fn require_symmetric_3d(t: &DenseTensor) -> Result<()> {
    t.require_symmetric()?;
    if t.dim() != 3 {
        return Err(Error::DimensionMismatch(3, t.dim()));
    }
    Ok(())
}

/// `A_ijkl(T) = Σ c_a · Term_a(T)`.
pub fn evaluate_representation(
    model: &RepresentationModel,
    t: &DenseTensor,
) -> Result<DenseTensor> {
    require_symmetric_3d(t)?;
    let b = basis();
    let mut acc = DenseTensor::zeros(3, 4)?;
    for (c, term) in model
        .coefficients()
        .zip(b.linear.iter().chain(&b.quadratic))
    {
        if !c.is_zero() {
            acc.add_scaled(c, &term.evaluate(t)?)?;
        }
    }
    Ok(acc)
}

/// `α_ijklmn T_mn + β_ijklmnpq T_mn T_pq` with `α`, `β` given on the
/// canonical isomer sets of order 6 and 8.
pub fn evaluate_isomer_form(
    alpha: &[Rational],
    beta: &[Rational],
    t: &DenseTensor,
) -> Result<DenseTensor> {
    check_alpha_beta(alpha, beta)?;
    require_symmetric_3d(t)?;
    let mut acc = DenseTensor::zeros(3, 4)?;
    let args1 = [t.clone()];
    let args2 = [t.clone(), t.clone()];
    for (c, iso) in alpha.iter().zip(&enumerate_isomers(6)?) {
        if !c.is_zero() {
            acc.add_scaled(c, &apply_isomer(iso, &args1)?)?;
        }
    }
    for (c, iso) in beta.iter().zip(&enumerate_isomers(8)?) {
        if !c.is_zero() {
            acc.add_scaled(c, &apply_isomer(iso, &args2)?)?;
        }
    }
    Ok(acc)
}

fn check_alpha_beta(alpha: &[Rational], beta: &[Rational]) -> Result<()> {
    if alpha.len() != 15 {
        return Err(Error::CoefficientCount {
            expected: 15,
            found: alpha.len(),
        });
    }
    if beta.len() != 105 {
        return Err(Error::CoefficientCount {
            expected: 105,
            found: beta.len(),
        });
    }
    Ok(())
}

/// Collects the isomer coefficients onto the reduced terms.
pub fn reduce_alpha_beta(alpha: &[Rational], beta: &[Rational]) -> Result<RepresentationModel> {
    check_alpha_beta(alpha, beta)?;
    let b = basis();
    let mut model = RepresentationModel::zero();
    for (c, &term) in alpha.iter().zip(&b.linear_of_isomer) {
        model.linear[term] += c;
    }
    for (c, &raw) in beta.iter().zip(&b.raw_of_isomer) {
        if c.is_zero() {
            continue;
        }
        for (q, w) in model.quadratic.iter_mut().zip(&b.raw_in_reduced[raw]) {
            if !w.is_zero() {
                *q += c * w;
            }
        }
    }
    Ok(model)
}

/// `(α, β)` whose isomer form equals the given term.
pub fn embed_term(term: &TermShape) -> (Vec<Rational>, Vec<Rational>) {
    let mut alpha = vec![Rational::zero(); 15];
    let mut beta = vec![Rational::zero(); 105];
    let (target, set) = if term.arity() == 1 {
        (&mut alpha, enumerate_isomers(6).unwrap())
    } else {
        (&mut beta, enumerate_isomers(8).unwrap())
    };
    for iso in term.representatives() {
        target[set.index_of(&iso).unwrap()] += int(1);
    }
    (alpha, beta)
}

#[derive(Clone, Debug, Serialize)]
pub struct TermJson {
    pub id: String,
    pub skeleton: String,
    pub invariant: String,
}

impl From<&TermShape> for TermJson {
    fn from(t: &TermShape) -> Self {
        TermJson {
            id: t.id.clone(),
            skeleton: t.skeleton.label(),
            invariant: t.invariant.label().to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisExport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_1: Option<Vec<TermJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_2: Option<Vec<TermJson>>,
}

pub fn basis_export(linear: bool, quadratic: bool) -> BasisExport {
    let b = basis();
    BasisExport {
        degree_1: linear.then(|| b.linear.iter().map(TermJson::from).collect()),
        degree_2: quadratic.then(|| b.quadratic.iter().map(TermJson::from).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use crate::sampling;
    use crate::tensor::signed_permutation_rotations;

    fn iso(pairs: &[(usize, usize)]) -> DeltaIsomer {
        DeltaIsomer::new(pairs.to_vec()).unwrap()
    }

    fn diag123() -> DenseTensor {
        DenseTensor::diagonal(&[int(1), int(2), int(3)]).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(generate_linear_terms().len(), 9);
        assert_eq!(raw_quadratic_terms().len(), 21);
        assert_eq!(generate_quadratic_terms().len(), 19);
        let lin = generate_linear_terms();
        assert_eq!(
            lin.iter()
                .filter(|t| matches!(t.skeleton(), Skeleton::DeltaDelta(_)))
                .count(),
            3
        );
        assert_eq!(
            lin.iter()
                .filter(|t| matches!(t.skeleton(), Skeleton::DeltaT { .. }))
                .count(),
            6
        );
    }

    #[test]
    fn ids_are_sorted_and_named() {
        let ids: Vec<String> = generate_linear_terms()
            .iter()
            .map(|t| t.id().to_string())
            .collect();
        assert_eq!(
            ids,
            [
                "dT_ij_kl.1",
                "dT_ik_jl.1",
                "dT_il_jk.1",
                "dT_jk_il.1",
                "dT_jl_ik.1",
                "dT_kl_ij.1",
                "dd_ij_kl.trT",
                "dd_ik_jl.trT",
                "dd_il_jk.trT"
            ]
        );
        let quad: Vec<String> = generate_quadratic_terms()
            .iter()
            .map(|t| t.id().to_string())
            .collect();
        assert_eq!(quad[0], "TT_sym");
        assert!(quad.contains(&"dT2_il_jk.1".to_string()));
        assert!(quad.contains(&"dd_ij_kl.trT_sq".to_string()));
        assert!(quad.contains(&"dd_ij_kl.trT2".to_string()));
        assert!(quad.contains(&"dT_kl_ij.trT".to_string()));
        let mut sorted = quad.clone();
        sorted.sort();
        assert_eq!(sorted, quad);
    }

    #[test]
    fn symmetric_t_merges_isomers() {
        // δ_ik δ_jm δ_ln and δ_ik δ_jn δ_lm both act as δ_ik T_jl
        let a = TermShape::from_action(&action_shape(&iso(&[(0, 2), (1, 4), (3, 5)]), 4)).unwrap();
        let b = TermShape::from_action(&action_shape(&iso(&[(0, 2), (1, 5), (3, 4)]), 4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.id(), "dT_ik_jl.1");
    }

    #[test]
    fn action_shape_walks_chains_and_loops() {
        // δ_im δ_np δ_qj δ_kl: (T²)_ij δ_kl
        let s = action_shape(&iso(&[(0, 4), (5, 6), (1, 7), (2, 3)]), 4);
        assert_eq!(s.chains, vec![(0, 1, 2), (2, 3, 0)]);
        assert!(s.loops.is_empty());
        // δ_ij δ_kl δ_mp δ_nq: tr T²
        let s = action_shape(&iso(&[(0, 1), (2, 3), (4, 6), (5, 7)]), 4);
        assert_eq!(s.loops, vec![2]);
        let s = action_shape(&iso(&[(0, 1), (2, 3), (4, 5), (6, 7)]), 4);
        assert_eq!(s.loops, vec![1, 1]);
    }

    #[test]
    fn evaluation_examples() {
        let t = diag123();
        let dd = TermShape::new(Skeleton::DeltaDelta(Pairing::IjKl), Invariant::TrT).unwrap();
        assert_eq!(dd.id(), "dd_ij_kl.trT");
        assert_eq!(dd.evaluate(&t).unwrap().get(&[0, 0, 1, 1]), &int(6));

        let sym = TermShape::new(Skeleton::TTSym, Invariant::One).unwrap();
        let e = sym.evaluate(&DenseTensor::identity(3).unwrap()).unwrap();
        assert_eq!(e.get(&[0, 0, 1, 1]), &int(1));
        assert_eq!(e.get(&[0, 0, 0, 0]), &int(3));
    }

    #[test]
    fn direct_evaluation_matches_coefficient_tensor() {
        let mut rng = sampling::rng(5);
        let t = sampling::random_symmetric(&mut rng);
        for term in generate_linear_terms()
            .iter()
            .chain(&raw_quadratic_terms())
            .chain(&generate_quadratic_terms())
        {
            let coeff = term.coefficient_tensor(3).unwrap();
            let args: Vec<&DenseTensor> = (0..term.arity()).map(|_| &t).collect();
            assert_eq!(
                coeff.contract_trailing(&args).unwrap(),
                term.evaluate(&t).unwrap(),
                "{term}"
            );
        }
    }

    #[test]
    fn coefficient_tensor_is_orbit_average() {
        // symmetrizing a representative equals averaging all isomers with the same action
        let set = enumerate_isomers(8).unwrap();
        let b = basis();
        for (r, term) in b.raw_quadratic.iter().enumerate() {
            let members: Vec<&DeltaIsomer> = set
                .iter()
                .zip(&b.raw_of_isomer)
                .filter(|(_, &x)| x == r)
                .map(|(i, _)| i)
                .collect();
            let mut avg = DenseTensor::zeros(2, 8).unwrap();
            for m in &members {
                avg.add_scaled(&Rational::one(), &evaluate_isomer(m, 2).unwrap())
                    .unwrap();
            }
            let avg = avg.scale(&Rational::new(1.into(), members.len().into()));
            assert_eq!(term.coefficient_tensor(2).unwrap(), avg, "{term}");
        }
    }

    #[test]
    fn independence_ranks() {
        assert_eq!(
            certify_independence(&generate_linear_terms(), 3).unwrap(),
            9
        );
        assert_eq!(
            certify_independence(&generate_quadratic_terms(), 3).unwrap(),
            19
        );
        assert_eq!(certify_independence(&raw_quadratic_terms(), 3).unwrap(), 19);
    }

    #[test]
    fn any_single_pure_product_can_replace_the_sum() {
        let raw = raw_quadratic_terms();
        let others: Vec<TermShape> = raw
            .iter()
            .filter(|t| !matches!(t.skeleton(), Skeleton::TTPair(_)))
            .cloned()
            .collect();
        for p in Pairing::ALL {
            let mut terms = others.clone();
            terms.push(TermShape::new(Skeleton::TTPair(p), Invariant::One).unwrap());
            assert_eq!(certify_independence(&terms, 3).unwrap(), 19, "{p:?}");
        }
    }

    #[test]
    fn relations_make_the_system_square() {
        let b = basis();
        let mut rows: Vec<Vec<Rational>> = b.raw_relations.to_vec();
        // relations alone are independent and each touches the pure products
        assert_eq!(rank(&RationalMatrix::from_rows(&rows).unwrap()), 2);
        let tt: Vec<usize> = b
            .raw_quadratic
            .iter()
            .enumerate()
            .filter(|(_, t)| matches!(t.skeleton(), Skeleton::TTPair(_)))
            .map(|(i, _)| i)
            .collect();
        for rel in &b.raw_relations {
            assert!(tt.iter().any(|&i| !rel[i].is_zero()));
        }
        rows.push(tt.iter().fold(vec![Rational::zero(); 21], |mut v, &i| {
            v[i] = Rational::one();
            v
        }));
        assert_eq!(rank(&RationalMatrix::from_rows(&rows).unwrap()), 3);
    }

    #[test]
    fn reduce_examples() {
        let mut alpha = vec![Rational::zero(); 15];
        alpha[0] = int(1);
        let m = reduce_alpha_beta(&alpha, &vec![Rational::zero(); 105]).unwrap();
        assert_eq!(m.coefficients().filter(|c| !c.is_zero()).count(), 1);
        assert_eq!(m.linear[basis().linear_of_isomer[0]], int(1));
        assert!(reduce_alpha_beta(&alpha[..3], &[]).is_err());
    }

    #[test]
    fn nullspace_beta_reduces_to_zero_model() {
        let rows: Vec<Vec<Rational>> = enumerate_isomers(8)
            .unwrap()
            .iter()
            .map(|iso| evaluate_isomer(iso, 3).unwrap().into_entries())
            .collect();
        let ns = crate::linalg::nullspace(&RationalMatrix::from_rows(&rows).unwrap());
        let alpha = vec![Rational::zero(); 15];
        for v in &ns {
            assert_eq!(
                reduce_alpha_beta(&alpha, v).unwrap(),
                RepresentationModel::zero()
            );
        }
    }

    #[test]
    fn embedding_round_trips() {
        let b = basis();
        for (n, term) in b.linear.iter().chain(&b.quadratic).enumerate() {
            let (alpha, beta) = embed_term(term);
            let model = reduce_alpha_beta(&alpha, &beta).unwrap();
            let expect: Vec<Rational> = (0..28)
                .map(|i| if i == n { int(1) } else { int(0) })
                .collect();
            assert_eq!(
                model.coefficients().cloned().collect::<Vec<_>>(),
                expect,
                "{term}"
            );
        }
    }

    #[test]
    fn reduced_evaluation_matches_isomer_form() {
        let mut rng = sampling::rng(21);
        for _ in 0..4 {
            let alpha = sampling::random_rationals(&mut rng, 15);
            let beta = sampling::random_rationals(&mut rng, 105);
            let model = reduce_alpha_beta(&alpha, &beta).unwrap();
            for _ in 0..3 {
                let t = sampling::random_symmetric(&mut rng);
                assert_eq!(
                    evaluate_representation(&model, &t).unwrap(),
                    evaluate_isomer_form(&alpha, &beta, &t).unwrap()
                );
            }
        }
    }

    #[test]
    fn representation_examples() {
        let id = DenseTensor::identity(3).unwrap();
        assert!(evaluate_representation(&RepresentationModel::zero(), &id)
            .unwrap()
            .is_zero());
        let m = RepresentationModel::unit("dd_ij_kl.trT").unwrap();
        let dd = evaluate_isomer(&iso(&[(0, 1), (2, 3)]), 3).unwrap();
        assert_eq!(evaluate_representation(&m, &id).unwrap(), dd.scale(&int(3)));
        let skew = DenseTensor::from_int_rows([[0, 1, 0], [-1, 0, 0], [0, 0, 0]]);
        assert_eq!(evaluate_representation(&m, &skew), Err(Error::NotSymmetric));
    }

    #[test]
    fn degenerate_inputs_are_fine() {
        let mut rng = sampling::rng(2);
        let alpha = sampling::random_rationals(&mut rng, 15);
        let beta = sampling::random_rationals(&mut rng, 105);
        let model = reduce_alpha_beta(&alpha, &beta).unwrap();
        let rank_one = DenseTensor::from_int_rows([[1, 2, 3], [2, 4, 6], [3, 6, 9]]);
        for t in sampling::degenerate_symmetric()
            .into_iter()
            .chain([rank_one])
        {
            assert_eq!(
                evaluate_representation(&model, &t).unwrap(),
                evaluate_isomer_form(&alpha, &beta, &t).unwrap()
            );
        }
    }

    #[test]
    fn transforms_isotropically() {
        let mut rng = sampling::rng(8);
        let model = RepresentationModel::new(
            sampling::random_rationals(&mut rng, 9),
            sampling::random_rationals(&mut rng, 19),
        )
        .unwrap();
        let t = sampling::random_symmetric(&mut rng);
        let a = evaluate_representation(&model, &t).unwrap();
        for q in signed_permutation_rotations() {
            let rotated_t = t.rotate(&q).unwrap();
            assert_eq!(
                evaluate_representation(&model, &rotated_t).unwrap(),
                a.rotate(&q).unwrap()
            );
        }
    }

    #[test]
    fn linear_in_coefficients_and_degree_one_terms_linear_in_t() {
        let mut rng = sampling::rng(13);
        let m1 = RepresentationModel::new(
            sampling::random_rationals(&mut rng, 9),
            sampling::random_rationals(&mut rng, 19),
        )
        .unwrap();
        let m2 = RepresentationModel::new(
            sampling::random_rationals(&mut rng, 9),
            sampling::random_rationals(&mut rng, 19),
        )
        .unwrap();
        let x = frac(-2, 7);
        let sum = RepresentationModel::new(
            m1.linear
                .iter()
                .zip(&m2.linear)
                .map(|(a, b)| a + b * &x)
                .collect(),
            m1.quadratic
                .iter()
                .zip(&m2.quadratic)
                .map(|(a, b)| a + b * &x)
                .collect(),
        )
        .unwrap();
        let t = sampling::random_symmetric(&mut rng);
        let mut expect = evaluate_representation(&m1, &t).unwrap();
        expect
            .add_scaled(&x, &evaluate_representation(&m2, &t).unwrap())
            .unwrap();
        assert_eq!(evaluate_representation(&sum, &t).unwrap(), expect);

        let s = sampling::random_symmetric(&mut rng);
        let mut ts = t.clone();
        ts.add_scaled(&x, &s).unwrap();
        for term in generate_linear_terms() {
            let mut rhs = term.evaluate(&t).unwrap();
            rhs.add_scaled(&x, &term.evaluate(&s).unwrap()).unwrap();
            assert_eq!(term.evaluate(&ts).unwrap(), rhs);
        }
    }

    #[test]
    fn export_shape() {
        let e = basis_export(true, false);
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v["degree_1"].as_array().unwrap().len(), 9);
        assert!(v.get("degree_2").is_none());
        assert_eq!(v["degree_1"][6]["id"], "dd_ij_kl.trT");
        assert_eq!(v["degree_1"][6]["skeleton"], "delta_ij delta_kl");
        assert_eq!(v["degree_1"][6]["invariant"], "trT");
    }
}
