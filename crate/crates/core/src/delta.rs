//! Generalized Kronecker deltas and the identities they imply.
//!
//! `δ^{u_1…u_k}_{l_1…l_k}` is the `k × k` determinant whose `(a, b)` entry is
//! `δ_{u_a l_b}`. Its value at a multi-index is zero whenever two upper (or two
//! lower) slots carry the same value, so it vanishes identically when `k`
//! exceeds the dimension. Contracting the `k = 4` determinant over
//! `(m, n), (p, q)` with `T ⊗ T` therefore gives fourth-order polynomial
//! identities in a symmetric `T`; [`GroupedIdentity`] evaluates two of them in
//! grouped form.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::isomer::{enumerate_isomers, DeltaIsomer};
use crate::rational::{int, Rational};
use crate::tensor::{DenseTensor, MultiIndex};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GenKroneckerSpec {
    upper: Vec<usize>,
    lower: Vec<usize>,
}

impl GenKroneckerSpec {
    pub fn new(upper: Vec<usize>, lower: Vec<usize>) -> Result<Self> {
        let k = upper.len();
        if !(2..=4).contains(&k) {
            return Err(Error::DeterminantSize(k));
        }
        if lower.len() != k {
            return Err(Error::DeterminantSlots(format!(
                "{k} upper labels but {} lower labels",
                lower.len()
            )));
        }
        let mut seen = vec![false; 2 * k];
        for &s in upper.iter().chain(&lower) {
            if s >= 2 * k || seen[s] {
                return Err(Error::DeterminantSlots(format!(
                    "labels must be a permutation of 0..{}",
                    2 * k
                )));
            }
            seen[s] = true;
        }
        Ok(GenKroneckerSpec { upper, lower })
    }

    /// `δ^{ikmp}_{jlnq}`: rows `i, k, m, p`, columns `j, l, n, q`.
    pub fn eq1_10() -> Self {
        Self::new(vec![0, 2, 4, 6], vec![1, 3, 5, 7]).unwrap()
    }

    /// The companion determinant with `j` and `k` exchanged:
    /// rows `i, j, m, p`, columns `k, l, n, q`.
    pub fn eq1_11() -> Self {
        Self::new(vec![0, 1, 4, 6], vec![2, 3, 5, 7]).unwrap()
    }

    pub fn size(&self) -> usize {
        self.upper.len()
    }

    pub fn upper(&self) -> &[usize] {
        &self.upper
    }

    pub fn lower(&self) -> &[usize] {
        &self.lower
    }
}

/// Every distinct `4 × 4` determinant over the eight slots: one per choice of
/// four upper slots containing slot 0 (the complementary choice gives the
/// transposed determinant, which is equal).
pub fn all_order8_determinants() -> Vec<GenKroneckerSpec> {
    let mut out = Vec::new();
    for mask in 0u32..256 {
        if mask.count_ones() != 4 || mask & 1 == 0 {
            continue;
        }
        let upper: Vec<usize> = (0..8).filter(|b| mask >> b & 1 == 1).collect();
        let lower: Vec<usize> = (0..8).filter(|b| mask >> b & 1 == 0).collect();
        out.push(GenKroneckerSpec::new(upper, lower).unwrap());
    }
    out
}

/// All permutations of `0..k` with their signs, in lexicographic order.
pub fn signed_permutations(k: usize) -> Vec<(Vec<usize>, i64)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    loop {
        out.push((perm.clone(), permutation_sign(&perm)));
        // next lexicographic permutation
        let Some(i) = (1..k).rev().find(|&i| perm[i - 1] < perm[i]) else {
            break;
        };
        let j = (i..k).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    out
}

fn permutation_sign(perm: &[usize]) -> i64 {
    let mut inversions = 0;
    for a in 0..perm.len() {
        for b in a + 1..perm.len() {
            if perm[a] > perm[b] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Dense components of the determinant, each computed by the signed
/// permutation expansion of the `k × k` delta array at that multi-index.
pub fn gen_kronecker(spec: &GenKroneckerSpec, dim: usize) -> Result<DenseTensor> {
    let k = spec.size();
    let order = 2 * k;
    let perms = signed_permutations(k);
    let mut out = DenseTensor::zeros(dim, order)?;
    for idx in MultiIndex::all(dim, order) {
        let idx = idx.0;
        let value: i64 = perms
            .iter()
            .filter(|(p, _)| (0..k).all(|a| idx[spec.upper[a]] == idx[spec.lower[p[a]]]))
            .map(|(_, s)| s)
            .sum();
        if value != 0 {
            out.set(&idx, int(value));
        }
    }
    Ok(out)
}

/// Signed isomer combination equal to the determinant: one isomer
/// `Π_a δ_{u_a l_σ(a)}` with sign `sign(σ)` per permutation. Indexed by the
/// canonical isomer set of order `2k`.
pub fn expand_as_isomer_combination(spec: &GenKroneckerSpec) -> Vec<Rational> {
    let k = spec.size();
    let set = enumerate_isomers(2 * k).expect("valid order");
    let mut coeffs = vec![Rational::zero(); set.len()];
    for (perm, sign) in signed_permutations(k) {
        let pairs = (0..k)
            .map(|a| (spec.upper[a], spec.lower[perm[a]]))
            .collect();
        let iso = DeltaIsomer::new(pairs).expect("determinant term is a matching");
        let at = set.index_of(&iso).expect("enumerated");
        coeffs[at] += int(sign);
    }
    coeffs
}

fn require_symmetric_3d(t: &DenseTensor) -> Result<()> {
    t.require_symmetric()?;
    if t.dim() != 3 {
        return Err(Error::DimensionMismatch(3, t.dim()));
    }
    Ok(())
}

/// The order-8 determinant contracted over slots `(4, 5)` and `(6, 7)` with
/// `T`, leaving an order-4 tensor in `(0, 1, 2, 3)`.
pub fn contract_with_tt(spec: &GenKroneckerSpec, t: &DenseTensor) -> Result<DenseTensor> {
    if spec.size() != 4 {
        return Err(Error::DeterminantSize(spec.size()));
    }
    require_symmetric_3d(t)?;
    gen_kronecker(spec, 3)?.contract_trailing(&[t, t])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum GroupedIdentity {
    #[serde(rename = "eq1_10")]
    Eq110,
    #[serde(rename = "eq1_11")]
    Eq111,
}

impl GroupedIdentity {
    pub fn determinant(self) -> GenKroneckerSpec {
        match self {
            GroupedIdentity::Eq110 => GenKroneckerSpec::eq1_10(),
            GroupedIdentity::Eq111 => GenKroneckerSpec::eq1_11(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupedIdentity::Eq110 => "eq1_10",
            GroupedIdentity::Eq111 => "eq1_11",
        }
    }

    /// The grouped polynomial form of `δ^{…}_{…} T_mn T_pq`, written out term
    /// by term.
    pub fn grouped(self, t: &DenseTensor) -> Result<DenseTensor> {
        require_symmetric_3d(t)?;
        let t2 = t.matmul(t)?;
        let inv = t.trace_invariants()?;
        let tr = &inv.trace;
        let quad = &inv.square_of_trace - &inv.trace_of_square;
        let d = |a: usize, b: usize| {
            if a == b {
                Rational::one()
            } else {
                Rational::zero()
            }
        };
        let two = int(2);
        let mut out = DenseTensor::zeros(3, 4)?;
        for idx in MultiIndex::all(3, 4) {
            let [i, j, k, l] = [idx.0[0], idx.0[1], idx.0[2], idx.0[3]];
            let tt = |a: usize, b: usize| t.at(a, b).clone();
            let sq = |a: usize, b: usize| t2.at(a, b).clone();
            let value = match self {
                GroupedIdentity::Eq110 => {
                    &two * (tt(i, j) * tt(k, l) - tt(i, l) * tt(j, k))
                        + (d(i, j) * d(k, l) - d(i, l) * d(j, k)) * &quad
                        + &two
                            * (d(i, j) * sq(k, l) + d(k, l) * sq(i, j)
                                - d(i, l) * sq(j, k)
                                - d(j, k) * sq(i, l))
                        + &two
                            * (d(i, l) * tt(j, k) + d(j, k) * tt(i, l)
                                - d(i, j) * tt(k, l)
                                - d(k, l) * tt(i, j))
                            * tr
                }
                GroupedIdentity::Eq111 => {
                    &two * (tt(i, k) * tt(j, l) - tt(i, l) * tt(j, k))
                        + (d(i, k) * d(j, l) - d(i, l) * d(j, k)) * &quad
                        + &two
                            * (d(i, k) * sq(j, l) + d(j, l) * sq(i, k)
                                - d(i, l) * sq(j, k)
                                - d(j, k) * sq(i, l))
                        + &two
                            * (-d(i, k) * tt(j, l) - d(j, l) * tt(i, k)
                                + d(i, l) * tt(j, k)
                                + d(j, k) * tt(i, l))
                            * tr
                }
            };
            out.set(&idx.0, value);
        }
        Ok(out)
    }
}

/// `grouped(T) − δ^{…}_{…} T_mn T_pq`; zero when the grouped algebra is right.
pub fn verify_grouped_expansion(which: GroupedIdentity, t: &DenseTensor) -> Result<DenseTensor> {
    let grouped = which.grouped(t)?;
    let contracted = contract_with_tt(&which.determinant(), t)?;
    grouped.try_sub(&contracted)
}
