//! Dense tensors with exact rational components.
//!
//! Components are stored row-major with the last index varying fastest, so the
//! entry at multi-index `(m_0, …, m_{r-1})` lives at flat offset
//! `Σ m_s · dim^(r-1-s)`.

use num_traits::{One, Zero};

use crate::rational::{self, Rational};
use crate::{Error, Result};

pub const MAX_DIM: usize = 4;
pub const MAX_ORDER: usize = 10;
pub const DEFAULT_DIM: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DenseTensor {
    dim: usize,
    order: usize,
    entries: Vec<Rational>,
}

/// A multi-index addressing one component of a tensor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    /// All multi-indices of the given order over `0..dim`, in storage order.
    pub fn all(dim: usize, order: usize) -> MultiIndexIter {
        MultiIndexIter {
            dim,
            current: if dim == 0 { None } else { Some(vec![0; order]) },
        }
    }

    pub fn offset(&self, dim: usize) -> usize {
        self.0.iter().fold(0, |acc, &m| acc * dim + m)
    }

    pub fn from_offset(mut offset: usize, dim: usize, order: usize) -> Self {
        let mut values = vec![0; order];
        for slot in (0..order).rev() {
            values[slot] = offset % dim;
            offset /= dim;
        }
        MultiIndex(values)
    }
}

pub struct MultiIndexIter {
    dim: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for MultiIndexIter {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut slot = cur.len();
        loop {
            if slot == 0 {
                self.current = None;
                break;
            }
            slot -= 1;
            cur[slot] += 1;
            if cur[slot] < self.dim {
                break;
            }
            cur[slot] = 0;
        }
        Some(MultiIndex(out))
    }
}

/// `tr T`, `tr T²` and `(tr T)²` of a square matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceInvariants {
    pub trace: Rational,
    pub trace_of_square: Rational,
    pub square_of_trace: Rational,
}

fn check_shape(dim: usize, order: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if dim > MAX_DIM || order > MAX_ORDER {
        return Err(Error::TooLarge { dim, order });
    }
    Ok(())
}

impl DenseTensor {
    pub fn zeros(dim: usize, order: usize) -> Result<Self> {
        check_shape(dim, order)?;
        Ok(DenseTensor {
            dim,
            order,
            entries: vec![Rational::zero(); dim.pow(order as u32)],
        })
    }

    pub fn scalar(value: Rational) -> Self {
        DenseTensor {
            dim: DEFAULT_DIM,
            order: 0,
            entries: vec![value],
        }
    }

    pub fn scalar_in(dim: usize, value: Rational) -> Result<Self> {
        check_shape(dim, 0)?;
        Ok(DenseTensor {
            dim,
            order: 0,
            entries: vec![value],
        })
    }

    pub fn from_entries(dim: usize, order: usize, entries: Vec<Rational>) -> Result<Self> {
        check_shape(dim, order)?;
        let expected = dim.pow(order as u32);
        if entries.len() != expected {
            return Err(Error::WrongLength {
                expected,
                found: entries.len(),
            });
        }
        Ok(DenseTensor {
            dim,
            order,
            entries,
        })
    }

    /// Builds an order-2 tensor from a square array of rows.
    pub fn from_rows(rows: &[Vec<Rational>]) -> Result<Self> {
        let dim = rows.len();
        for row in rows {
            if row.len() != dim {
                return Err(Error::WrongLength {
                    expected: dim,
                    found: row.len(),
                });
            }
        }
        Self::from_entries(dim, 2, rows.iter().flatten().cloned().collect())
    }

    pub fn from_int_rows<const N: usize>(rows: [[i64; N]; N]) -> Self {
        let rows: Vec<Vec<Rational>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| rational::int(x)).collect())
            .collect();
        Self::from_rows(&rows).expect("square integer matrix")
    }

    pub fn diagonal(values: &[Rational]) -> Result<Self> {
        let dim = values.len();
        let mut t = Self::zeros(dim, 2)?;
        for (i, v) in values.iter().enumerate() {
            t.entries[i * dim + i] = v.clone();
        }
        Ok(t)
    }

    /// The Kronecker delta `δ_ij`.
    pub fn identity(dim: usize) -> Result<Self> {
        Self::diagonal(&vec![Rational::one(); dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Rational> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn offset_of(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.order, "multi-index length");
        index.iter().fold(0, |acc, &m| {
            assert!(m < self.dim, "index component {m} out of range");
            acc * self.dim + m
        })
    }

    pub fn get(&self, index: &[usize]) -> &Rational {
        &self.entries[self.offset_of(index)]
    }

    pub fn set(&mut self, index: &[usize], value: Rational) {
        let at = self.offset_of(index);
        self.entries[at] = value;
    }

    /// Matrix entry of an order-2 tensor.
    pub fn at(&self, i: usize, j: usize) -> &Rational {
        debug_assert_eq!(self.order, 2);
        &self.entries[i * self.dim + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn count_nonzero(&self) -> usize {
        self.entries.iter().filter(|x| !x.is_zero()).count()
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        if self.order != other.order {
            return Err(Error::WrongOrder {
                expected: self.order,
                found: other.order,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// `self += factor · other`.
    pub fn add_scaled(&mut self, factor: &Rational, other: &Self) -> Result<()> {
        self.check_same_shape(other)?;
        if factor.is_zero() {
            return Ok(());
        }
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            if !b.is_zero() {
                *a += factor * b;
            }
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        DenseTensor {
            dim: self.dim,
            order: self.order,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        DenseTensor {
            dim: self.dim,
            order: self.order,
            entries: self.entries.iter().map(|x| x * factor).collect(),
        }
    }

    /// Outer product: `result[(I, J)] = a[I] · b[J]`.
    pub fn outer(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        check_shape(self.dim, self.order + other.order)?;
        let mut entries = Vec::with_capacity(self.len() * other.len());
        for a in &self.entries {
            for b in &other.entries {
                entries.push(a * b);
            }
        }
        Ok(DenseTensor {
            dim: self.dim,
            order: self.order + other.order,
            entries,
        })
    }

    /// Einstein summation over each slot pair. The remaining slots keep their
    /// relative order.
    pub fn contract(&self, slot_pairs: &[(usize, usize)]) -> Result<Self> {
        let mut used = vec![false; self.order];
        for &(a, b) in slot_pairs {
            for s in [a, b] {
                if s >= self.order {
                    return Err(Error::SlotOutOfRange {
                        slot: s,
                        order: self.order,
                    });
                }
                if used[s] {
                    return Err(Error::SlotReused(s));
                }
                used[s] = true;
            }
        }
        let free: Vec<usize> = (0..self.order).filter(|&s| !used[s]).collect();
        let mut out = Self::zeros(self.dim, free.len())?;
        for (offset, value) in self.entries.iter().enumerate() {
            if value.is_zero() {
                continue;
            }
            let idx = MultiIndex::from_offset(offset, self.dim, self.order).0;
            if slot_pairs.iter().all(|&(a, b)| idx[a] == idx[b]) {
                let target = free.iter().fold(0, |acc, &s| acc * self.dim + idx[s]);
                out.entries[target] += value;
            }
        }
        Ok(out)
    }

    /// Contracts the trailing `2k` slots against `k` order-2 tensors:
    /// `result[I] = Σ self[I, m_1, n_1, …, m_k, n_k] · args_1[m_1, n_1] ⋯ args_k[m_k, n_k]`.
    pub fn contract_trailing(&self, args: &[&DenseTensor]) -> Result<Self> {
        let k = args.len();
        if 2 * k > self.order {
            return Err(Error::Arity(format!(
                "cannot contract {k} order-2 arguments into a tensor of order {}",
                self.order
            )));
        }
        for arg in args {
            if arg.order != 2 {
                return Err(Error::WrongOrder {
                    expected: 2,
                    found: arg.order,
                });
            }
            if arg.dim != self.dim {
                return Err(Error::DimensionMismatch(self.dim, arg.dim));
            }
        }
        let free = self.order - 2 * k;
        let tail = self.dim.pow(2 * k as u32);
        let mut out = Self::zeros(self.dim, free)?;
        for (offset, value) in self.entries.iter().enumerate() {
            if value.is_zero() {
                continue;
            }
            let (head, mut rest) = (offset / tail, offset % tail);
            let mut product = value.clone();
            for arg in args.iter().rev() {
                let factor = &arg.entries[rest % (self.dim * self.dim)];
                rest /= self.dim * self.dim;
                if factor.is_zero() {
                    product = Rational::zero();
                    break;
                }
                product *= factor;
            }
            if !product.is_zero() {
                out.entries[head] += product;
            }
        }
        Ok(out)
    }

    /// Moves slot `s` of `self` to slot `perm[s]` of the result, so that
    /// `result[σ(idx)] = self[idx]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.order {
            return Err(Error::InvalidPermutation(self.order));
        }
        let mut seen = vec![false; self.order];
        for &p in perm {
            if p >= self.order || seen[p] {
                return Err(Error::InvalidPermutation(self.order));
            }
            seen[p] = true;
        }
        let mut out = Self::zeros(self.dim, self.order)?;
        let mut target = vec![0; self.order];
        for (offset, value) in self.entries.iter().enumerate() {
            if value.is_zero() {
                continue;
            }
            let idx = MultiIndex::from_offset(offset, self.dim, self.order).0;
            for (s, &p) in perm.iter().enumerate() {
                target[p] = idx[s];
            }
            let at = target.iter().fold(0, |acc, &m| acc * self.dim + m);
            out.entries[at] = value.clone();
        }
        Ok(out)
    }

    /// `self + permute(self, swap(a, b))`. Not halved.
    pub fn symmetrize_pair(&self, slots: (usize, usize)) -> Result<Self> {
        let (a, b) = slots;
        for s in [a, b] {
            if s >= self.order {
                return Err(Error::SlotOutOfRange {
                    slot: s,
                    order: self.order,
                });
            }
        }
        let mut perm: Vec<usize> = (0..self.order).collect();
        perm.swap(a, b);
        self.try_add(&self.permute(&perm)?)
    }

    fn require_matrix(&self) -> Result<()> {
        if self.order != 2 {
            return Err(Error::WrongOrder {
                expected: 2,
                found: self.order,
            });
        }
        Ok(())
    }

    pub fn trace_invariants(&self) -> Result<TraceInvariants> {
        let trace = self.trace()?;
        let trace_of_square = self.matmul(self)?.trace()?;
        let square_of_trace = &trace * &trace;
        Ok(TraceInvariants {
            trace,
            trace_of_square,
            square_of_trace,
        })
    }

    pub fn trace(&self) -> Result<Rational> {
        self.require_matrix()?;
        Ok((0..self.dim).map(|i| self.at(i, i)).sum())
    }

    pub fn transpose(&self) -> Result<Self> {
        self.require_matrix()?;
        self.permute(&[1, 0])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.require_matrix()?;
        other.require_matrix()?;
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let d = self.dim;
        let mut out = Self::zeros(d, 2)?;
        for i in 0..d {
            for j in 0..d {
                out.entries[i * d + j] = (0..d).map(|k| self.at(i, k) * other.at(k, j)).sum();
            }
        }
        Ok(out)
    }

    pub fn is_symmetric(&self) -> bool {
        self.order == 2 && (0..self.dim).all(|i| (0..i).all(|j| self.at(i, j) == self.at(j, i)))
    }

    pub fn require_symmetric(&self) -> Result<()> {
        self.require_matrix()?;
        if self.is_symmetric() {
            Ok(())
        } else {
            Err(Error::NotSymmetric)
        }
    }

    /// Applies an orthogonal change of frame to every slot:
    /// `result[i…] = Σ Q[i,a] ⋯ self[a…]`.
    pub fn rotate(&self, q: &DenseTensor) -> Result<Self> {
        q.require_matrix()?;
        if q.dim != self.dim {
            return Err(Error::DimensionMismatch(self.dim, q.dim));
        }
        let d = self.dim;
        let mut current = self.clone();
        // Contract each slot in turn; the rotated slot ends up first, so after
        // `order` passes every slot is back in its original place.
        for _ in 0..self.order {
            let mut next = Self::zeros(d, self.order)?;
            let stride = d.pow(self.order as u32 - 1);
            for (offset, value) in current.entries.iter().enumerate() {
                if value.is_zero() {
                    continue;
                }
                let (a, rest) = (offset / stride, offset % stride);
                for i in 0..d {
                    let qa = q.at(i, a);
                    if !qa.is_zero() {
                        // move rotated slot to the end
                        next.entries[rest * d + i] += qa * value;
                    }
                }
            }
            current = next;
        }
        Ok(current)
    }
}

/// The 24 signed permutation matrices of determinant +1 in three dimensions.
pub fn signed_permutation_rotations() -> Vec<DenseTensor> {
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut out = Vec::with_capacity(24);
    for perm in perms {
        let parity = if matches!(perm, [0, 1, 2] | [1, 2, 0] | [2, 0, 1]) {
            1
        } else {
            -1
        };
        for signs in 0..8u32 {
            let s: Vec<i64> = (0..3)
                .map(|b| if signs >> b & 1 == 1 { -1 } else { 1 })
                .collect();
            if parity * s.iter().product::<i64>() != 1 {
                continue;
            }
            let mut rows = [[0i64; 3]; 3];
            for i in 0..3 {
                rows[i][perm[i]] = s[i];
            }
            out.push(DenseTensor::from_int_rows(rows));
        }
    }
    out
}
