//! Dense signed tensors, target marginals and scaling factors.
//!
//! Storage is a flat row-major buffer (last index fastest). Reductions
//! accumulate in index order so results are reproducible bit for bit.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Accumulation strategy for reductions.
///
/// `Sequential` adds terms in index order. `Compensated` uses Neumaier
/// summation, which only matters for large or badly scaled tensors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Summation {
    #[default]
    Sequential,
    Compensated,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Accumulator {
    sum: f64,
    carry: f64,
    mode: Summation,
}

impl Accumulator {
    pub(crate) fn new(mode: Summation) -> Self {
        Accumulator { sum: 0.0, carry: 0.0, mode }
    }

    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        match self.mode {
            Summation::Sequential => self.sum += x,
            Summation::Compensated => {
                let t = self.sum + x;
                if crate::math::abs(self.sum) >= crate::math::abs(x) {
                    self.carry += (self.sum - t) + x;
                } else {
                    self.carry += (x - t) + self.sum;
                }
                self.sum = t;
            }
        }
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Row-major odometer over a shape.
#[derive(Debug, Clone)]
pub(crate) struct MultiIndex {
    shape: Vec<usize>,
    current: Vec<usize>,
}

impl MultiIndex {
    pub(crate) fn new(shape: &[usize]) -> Self {
        MultiIndex { shape: shape.to_vec(), current: vec![0; shape.len()] }
    }

    #[inline]
    pub(crate) fn current(&self) -> &[usize] {
        &self.current
    }

    /// Steps to the next index; returns false after wrapping past the end.
    #[inline]
    pub(crate) fn advance(&mut self) -> bool {
        for axis in (0..self.shape.len()).rev() {
            self.current[axis] += 1;
            if self.current[axis] < self.shape[axis] {
                return true;
            }
            self.current[axis] = 0;
        }
        false
    }
}

/// Dense N-dimensional array of finite reals of any sign.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedTensor {
    shape: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<f64>,
}

fn strides_for(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for axis in (0..shape.len().saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * shape[axis + 1];
    }
    strides
}

fn check_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() {
        return Err(Error::EmptyShape);
    }
    if let Some(axis) = shape.iter().position(|&n| n == 0) {
        return Err(Error::ZeroExtent { axis });
    }
    Ok(shape.iter().product())
}

impl SignedTensor {
    /// Builds a tensor from a shape and row-major values.
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let expected = check_shape(&shape)?;
        if values.len() != expected {
            return Err(Error::LengthMismatch { expected, found: values.len() });
        }
        let strides = strides_for(&shape);
        let tensor = SignedTensor { shape, strides, values };
        if let Some(pos) = tensor.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry {
                index: tensor.unravel(pos),
                value: tensor.values[pos],
            });
        }
        Ok(tensor)
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let n = check_shape(&shape)?;
        Self::new(shape, vec![0.0; n])
    }

    /// Builds a tensor by evaluating `f` at every multi-index in row-major order.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let n = check_shape(&shape)?;
        let mut values = Vec::with_capacity(n);
        let mut idx = MultiIndex::new(&shape);
        loop {
            values.push(f(idx.current()));
            if !idx.advance() {
                break;
            }
        }
        Self::new(shape, values)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, index: &[usize]) -> Option<f64> {
        self.ravel(index).map(|k| self.values[k])
    }

    /// Flat offset of a multi-index, if it is in bounds.
    pub fn ravel(&self, index: &[usize]) -> Option<usize> {
        if index.len() != self.shape.len() {
            return None;
        }
        let mut flat = 0;
        for ((&i, &n), &stride) in index.iter().zip(&self.shape).zip(&self.strides) {
            if i >= n {
                return None;
            }
            flat += i * stride;
        }
        Some(flat)
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|&stride| {
                let i = flat / stride;
                flat %= stride;
                i
            })
            .collect()
    }

    /// Applies `f` elementwise; fails if any result is not finite.
    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Result<Self> {
        Self::new(self.shape.clone(), self.values.iter().copied().map(f).collect())
    }

    pub fn positive_count(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn negative_count(&self) -> usize {
        self.values.iter().filter(|&&v| v < 0.0).count()
    }

    pub fn has_negative(&self) -> bool {
        self.values.iter().any(|&v| v < 0.0)
    }

    /// Positive and negative parts: `Q = Q⁺ - Q⁻`, `|Q| = Q⁺ + Q⁻`.
    pub fn sign_split(&self) -> (SignedTensor, SignedTensor) {
        let mut plus = Vec::with_capacity(self.len());
        let mut minus = Vec::with_capacity(self.len());
        for &v in &self.values {
            if v > 0.0 {
                plus.push(v);
                minus.push(0.0);
            } else if v < 0.0 {
                plus.push(0.0);
                minus.push(-v);
            } else {
                plus.push(0.0);
                minus.push(0.0);
            }
        }
        let make = |values| SignedTensor {
            shape: self.shape.clone(),
            strides: self.strides.clone(),
            values,
        };
        (make(plus), make(minus))
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn axis_marginal(&self, axis: usize) -> Result<Vec<f64>> {
        self.axis_marginal_with(axis, Summation::Sequential)
    }

    /// Signed sum over every index except `axis`.
    pub fn axis_marginal_with(&self, axis: usize, summation: Summation) -> Result<Vec<f64>> {
        self.check_axis(axis)?;
        let n = self.shape[axis];
        let stride = self.strides[axis];
        let mut acc = vec![Accumulator::new(summation); n];
        for (flat, &v) in self.values.iter().enumerate() {
            acc[(flat / stride) % n].add(v);
        }
        Ok(acc.iter().map(Accumulator::value).collect())
    }

    /// All per-axis marginals in axis order.
    pub fn marginals_with(&self, summation: Summation) -> Vec<Vec<f64>> {
        (0..self.ndim())
            .map(|axis| self.axis_marginal_with(axis, summation).expect("axis in range"))
            .collect()
    }

    pub(crate) fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.ndim() {
            return Err(Error::AxisOutOfRange { axis, axes: self.ndim() });
        }
        Ok(())
    }

    pub(crate) fn same_shape(&self, other: &SignedTensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch { left: self.shape.clone(), right: other.shape.clone() });
        }
        Ok(())
    }

    /// Visits the flat offset and multi-index of every entry in the slice
    /// `axis = index`, in increasing flat order.
    pub(crate) fn for_each_in_slice(&self, axis: usize, index: usize, mut f: impl FnMut(usize, &[usize])) {
        let mut sub_shape = self.shape.clone();
        sub_shape[axis] = 1;
        let mut it = MultiIndex::new(&sub_shape);
        let mut full = vec![0; self.ndim()];
        loop {
            full.copy_from_slice(it.current());
            full[axis] = index;
            let flat: usize = full.iter().zip(&self.strides).map(|(i, s)| i * s).sum();
            f(flat, &full);
            if !it.advance() {
                break;
            }
        }
    }
}

/// Splits `q` into its positive and negative parts.
pub fn sign_split(q: &SignedTensor) -> (SignedTensor, SignedTensor) {
    q.sign_split()
}

/// Strictly positive target marginals, one vector per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTargets {
    targets: Vec<Vec<f64>>,
}

impl MarginalTargets {
    /// Checks that every entry is finite and strictly positive.
    ///
    /// Agreement of the per-axis totals is checked against a prior by
    /// [`crate::validate_problem`], which reports both conflicting sums.
    pub fn new(targets: Vec<Vec<f64>>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::EmptyShape);
        }
        for (axis, row) in targets.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::ZeroExtent { axis });
            }
            for (index, &value) in row.iter().enumerate() {
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::NonPositiveTarget { axis, index, value });
                }
            }
        }
        Ok(MarginalTargets { targets })
    }

    pub fn axes(&self) -> usize {
        self.targets.len()
    }

    pub fn axis(&self, axis: usize) -> &[f64] {
        &self.targets[axis]
    }

    pub fn as_slices(&self) -> &[Vec<f64>] {
        &self.targets
    }

    pub fn shape(&self) -> Vec<usize> {
        self.targets.iter().map(Vec::len).collect()
    }

    pub fn totals(&self) -> Vec<f64> {
        self.targets.iter().map(|t| t.iter().sum()).collect()
    }

    pub(crate) fn conform(&self, q: &SignedTensor) -> Result<()> {
        conform_vectors(&self.targets, q.shape())
    }
}

pub(crate) fn conform_vectors(vectors: &[Vec<f64>], shape: &[usize]) -> Result<()> {
    if vectors.len() != shape.len() {
        return Err(Error::AxisCountMismatch { expected: shape.len(), found: vectors.len() });
    }
    for (axis, (v, &n)) in vectors.iter().zip(shape).enumerate() {
        if v.len() != n {
            return Err(Error::AxisLengthMismatch { axis, expected: n, found: v.len() });
        }
    }
    Ok(())
}

/// Positive per-axis scaling factors `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingState {
    alphas: Vec<Vec<f64>>,
}

impl ScalingState {
    /// All factors equal to one.
    pub fn ones(shape: &[usize]) -> Self {
        ScalingState { alphas: shape.iter().map(|&n| vec![1.0; n]).collect() }
    }

    pub fn new(alphas: Vec<Vec<f64>>) -> Result<Self> {
        for (axis, row) in alphas.iter().enumerate() {
            for (index, &value) in row.iter().enumerate() {
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::NonPositiveScaling { axis, index, value });
                }
            }
        }
        Ok(ScalingState { alphas })
    }

    pub fn axes(&self) -> usize {
        self.alphas.len()
    }

    pub fn axis(&self, axis: usize) -> &[f64] {
        &self.alphas[axis]
    }

    pub fn as_slices(&self) -> &[Vec<f64>] {
        &self.alphas
    }

    pub fn into_inner(self) -> Vec<Vec<f64>> {
        self.alphas
    }

    pub(crate) fn set_axis(&mut self, axis: usize, values: Vec<f64>) {
        debug_assert_eq!(self.alphas[axis].len(), values.len());
        self.alphas[axis] = values;
    }

    /// Product of the factors at `index` over every axis except `skip`.
    #[inline]
    pub(crate) fn product_except(&self, index: &[usize], skip: Option<usize>) -> f64 {
        let mut prod = 1.0;
        for (axis, (&i, alpha)) in index.iter().zip(&self.alphas).enumerate() {
            if Some(axis) != skip {
                prod *= alpha[i];
            }
        }
        prod
    }

    pub(crate) fn conform(&self, q: &SignedTensor) -> Result<()> {
        conform_vectors(&self.alphas, q.shape())
    }
}

/// `P = Q · Π α^sign(Q)`, with `P = 0` wherever `Q = 0`.
pub fn assemble_posterior(q: &SignedTensor, scaling: &ScalingState) -> Result<SignedTensor> {
    scaling.conform(q)?;
    let mut values = Vec::with_capacity(q.len());
    let mut idx = MultiIndex::new(q.shape());
    for &v in q.values() {
        let prod = scaling.product_except(idx.current(), None);
        let p = if v > 0.0 {
            v * prod
        } else if v < 0.0 {
            v / prod
        } else {
            0.0
        };
        if !p.is_finite() || (v != 0.0 && p == 0.0) {
            return Err(Error::non_finite("posterior entry", None, idx.current().to_vec()));
        }
        values.push(p);
        idx.advance();
    }
    Ok(SignedTensor { shape: q.shape.clone(), strides: q.strides.clone(), values })
}
