//! Isomers of outer products of Kronecker deltas.
//!
//! An isomer of `δ_ij δ_kl ⋯` of order `2n` is a perfect matching of the `2n`
//! index slots into `n` unordered pairs. Slots are numbered `0..2n`; in the
//! representation code slots `0..4` are the free slots `i, j, k, l` of
//! `A_ijkl`, and each further pair of slots `(4, 5)`, `(6, 7)` is contracted
//! with one copy of the argument tensor (`T_mn`, `T_pq`).
//!
//! Canonical form stores each pair as `(lo, hi)` and sorts pairs by `lo`.
//! [`enumerate_isomers`] pairs the smallest unmatched slot with each larger
//! unmatched slot in turn, which yields the canonical forms in lexicographic
//! order.
//!
//! The coefficient vectors elsewhere in the crate are indexed by this order.
//! For order 6 it relates to the customary listing
//! `α_1 δ_ij δ_kl δ_mn, α_2 δ_ij δ_km δ_ln, …, α_15 δ_in δ_jm δ_kl` as follows
//! (canonical index → customary index):
//!
//! | canonical | pairs                 | customary |
//! |-----------|-----------------------|-----------|
//! | 0         | ij kl mn              | 1         |
//! | 1         | ij km ln              | 2         |
//! | 2         | ij kn lm              | 3         |
//! | 3         | ik jl mn              | 4         |
//! | 4         | ik jm ln              | 5         |
//! | 5         | ik jn lm              | 6         |
//! | 6         | il jk mn              | 7         |
//! | 7         | il jm kn              | 8         |
//! | 8         | il jn km              | 9         |
//! | 9         | im jk ln              | 10        |
//! | 10        | im jl kn              | 11        |
//! | 11        | im jn kl              | 12        |
//! | 12        | in jk lm              | 13        |
//! | 13        | in jl km              | 14        |
//! | 14        | in jm kl              | 15        |
//!
//! i.e. the customary listing is already lexicographic; see
//! [`customary_order6_index`].

use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::rational::Rational;
use crate::tensor::DenseTensor;
use crate::{Error, Result};

pub const MAX_ISOMER_ORDER: usize = 10;

/// Conventional subscript letters for slots `0..8`.
pub const SLOT_LETTERS: [char; 10] = ['i', 'j', 'k', 'l', 'm', 'n', 'p', 'q', 'r', 's'];

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "IsomerJson", into = "IsomerJson")]
pub struct DeltaIsomer {
    order: usize,
    pairs: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct IsomerJson {
    order: usize,
    pairs: Vec<[usize; 2]>,
}

impl TryFrom<IsomerJson> for DeltaIsomer {
    type Error = Error;

    fn try_from(j: IsomerJson) -> Result<Self> {
        let iso = DeltaIsomer::new(j.pairs.iter().map(|p| (p[0], p[1])).collect())?;
        if iso.order != j.order {
            return Err(Error::NotAMatching(format!(
                "declared order {} but pairs cover {} slots",
                j.order, iso.order
            )));
        }
        Ok(iso)
    }
}

impl From<DeltaIsomer> for IsomerJson {
    fn from(iso: DeltaIsomer) -> Self {
        IsomerJson {
            order: iso.order,
            pairs: iso.pairs.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

impl DeltaIsomer {
    /// Validates that `pairs` is a perfect matching of `0..2·pairs.len()` and
    /// canonicalizes it.
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let order = 2 * pairs.len();
        if order == 0 || order > MAX_ISOMER_ORDER {
            return Err(Error::InvalidIsomerOrder(order));
        }
        let mut seen = vec![false; order];
        let mut canonical = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            for s in [a, b] {
                if s >= order {
                    return Err(Error::NotAMatching(format!("slot {s} out of range")));
                }
                if seen[s] {
                    return Err(Error::NotAMatching(format!("slot {s} appears twice")));
                }
                seen[s] = true;
            }
            canonical.push((a.min(b), a.max(b)));
        }
        canonical.sort_unstable();
        Ok(DeltaIsomer {
            order,
            pairs: canonical,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// The slot matched with `slot`.
    pub fn partner(&self, slot: usize) -> usize {
        self.pairs
            .iter()
            .find_map(|&(a, b)| {
                if a == slot {
                    Some(b)
                } else if b == slot {
                    Some(a)
                } else {
                    None
                }
            })
            .expect("slot in range")
    }

    /// Relabels slots: slot `s` becomes `relabel[s]`.
    pub fn relabel(&self, relabel: &[usize]) -> Result<Self> {
        Self::new(
            self.pairs
                .iter()
                .map(|&(a, b)| (relabel[a], relabel[b]))
                .collect(),
        )
    }

    /// Calls `f` with every multi-index at which the isomer equals 1, i.e.
    /// every assignment of one value per pair.
    fn for_each_support(&self, dim: usize, mut f: impl FnMut(&[usize])) {
        let n = self.pairs.len();
        let mut index = vec![0; self.order];
        let mut values = vec![0; n];
        loop {
            for (&(a, b), &v) in self.pairs.iter().zip(&values) {
                index[a] = v;
                index[b] = v;
            }
            f(&index);
            let mut p = n;
            loop {
                if p == 0 {
                    return;
                }
                p -= 1;
                values[p] += 1;
                if values[p] < dim {
                    break;
                }
                values[p] = 0;
            }
        }
    }
}

impl fmt::Display for DeltaIsomer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, &(a, b)) in self.pairs.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "δ_{}{}", SLOT_LETTERS[a], SLOT_LETTERS[b])?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsomerSet {
    order: usize,
    isomers: Vec<DeltaIsomer>,
}

impl IsomerSet {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn isomers(&self) -> &[DeltaIsomer] {
        &self.isomers
    }

    pub fn len(&self) -> usize {
        self.isomers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.isomers.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&DeltaIsomer> {
        self.isomers.get(index)
    }

    pub fn index_of(&self, iso: &DeltaIsomer) -> Option<usize> {
        self.isomers.binary_search(iso).ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DeltaIsomer> {
        self.isomers.iter()
    }
}

impl<'a> IntoIterator for &'a IsomerSet {
    type Item = &'a DeltaIsomer;
    type IntoIter = std::slice::Iter<'a, DeltaIsomer>;

    fn into_iter(self) -> Self::IntoIter {
        self.isomers.iter()
    }
}

impl Serialize for IsomerSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.isomers.serialize(s)
    }
}

pub fn double_factorial_odd(order: usize) -> usize {
    (1..order).step_by(2).product()
}

pub fn enumerate_isomers(order: usize) -> Result<IsomerSet> {
    if !(2..=MAX_ISOMER_ORDER).contains(&order) || !order.is_multiple_of(2) {
        return Err(Error::InvalidIsomerOrder(order));
    }
    let mut out = Vec::with_capacity(double_factorial_odd(order));
    let mut unmatched: Vec<usize> = (0..order).collect();
    let mut current = Vec::with_capacity(order / 2);
    match_smallest(&mut unmatched, &mut current, &mut out);
    let isomers = out
        .into_iter()
        .map(|pairs| DeltaIsomer { order, pairs })
        .collect();
    Ok(IsomerSet { order, isomers })
}

fn match_smallest(
    unmatched: &mut Vec<usize>,
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if unmatched.is_empty() {
        out.push(current.clone());
        return;
    }
    let first = unmatched.remove(0);
    for pos in 0..unmatched.len() {
        let other = unmatched.remove(pos);
        current.push((first, other));
        match_smallest(unmatched, current, out);
        current.pop();
        unmatched.insert(pos, other);
    }
    unmatched.insert(0, first);
}

/// The dense 0/1 tensor of an isomer in `dim` dimensions.
pub fn evaluate_isomer(iso: &DeltaIsomer, dim: usize) -> Result<DenseTensor> {
    let mut t = DenseTensor::zeros(dim, iso.order)?;
    iso.for_each_support(dim, |index| t.set(index, Rational::one()));
    Ok(t)
}

/// Contracts the trailing `2k` slots of an isomer with `k` order-2 tensors,
/// leaving the leading `order − 2k` slots free.
pub fn apply_isomer(iso: &DeltaIsomer, args: &[DenseTensor]) -> Result<DenseTensor> {
    let k = args.len();
    if 2 * k > iso.order {
        return Err(Error::Arity(format!(
            "isomer of order {} cannot absorb {k} order-2 arguments",
            iso.order
        )));
    }
    let dim = match args.first() {
        Some(a) => a.dim(),
        None => crate::tensor::DEFAULT_DIM,
    };
    for a in args {
        if a.order() != 2 {
            return Err(Error::WrongOrder {
                expected: 2,
                found: a.order(),
            });
        }
        if a.dim() != dim {
            return Err(Error::DimensionMismatch(dim, a.dim()));
        }
    }
    let free = iso.order - 2 * k;
    let mut out = DenseTensor::zeros(dim, free)?;
    iso.for_each_support(dim, |index| {
        let mut product = Rational::one();
        for (t, arg) in args.iter().enumerate() {
            product *= arg.at(index[free + 2 * t], index[free + 2 * t + 1]);
        }
        let head = &index[..free];
        let current = out.get(head).clone();
        out.set(head, current + product);
    });
    Ok(out)
}

/// Position (1-based) of a canonical order-6 isomer in the customary
/// `α_1 … α_15` listing.
pub fn customary_order6_index(canonical_index: usize) -> Option<usize> {
    (canonical_index < 15).then_some(canonical_index + 1)
}
