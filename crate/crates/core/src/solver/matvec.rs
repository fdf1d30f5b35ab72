//! Implicit products with the centered matrix `M = A - qJ` of one sub-graph.
//!
//! A right-side vector is never materialised at length `n2`. It is carried as
//! `y = ŷ - qL·1`: `ŷ` lives on the support of the sub-graph that produced it
//! and `L` is a scalar.

use super::split::{RightSupport, SubGraph};

/// The right-side vector `ŷ - offset·1`, with `ŷ` stored on a support set.
#[derive(Debug, Clone, PartialEq)]
pub struct RightVector<'a> {
    pub support: &'a RightSupport,
    /// `values[s]` is `ŷ` at `support.vertices()[s]`.
    pub values: Vec<f64>,
    /// `L = sum_i x_i` of the left vector that produced `ŷ`.
    pub l: f64,
}

impl<'a> RightVector<'a> {
    /// Wraps a dense vector (`L = 0`); `support` must be [`RightSupport::full`].
    pub fn from_dense(support: &'a RightSupport, dense: &[f64]) -> Self {
        assert_eq!(support.len(), dense.len());
        RightVector { support, values: dense.to_vec(), l: 0.0 }
    }

    pub fn get_hat(&self, j: usize) -> f64 {
        self.support.slot(j).map_or(0.0, |s| self.values[s])
    }

    /// Entry `j` of the represented vector `ŷ - qL·1`.
    pub fn get(&self, j: usize, q: f64) -> f64 {
        self.get_hat(j) - q * self.l
    }

    /// `‖ŷ - qL·1‖²` over all `n2` coordinates, in time linear in the support.
    pub fn norm_squared(&self, q: f64, n2: usize) -> f64 {
        let shift = q * self.l;
        let on: f64 = self.values.iter().map(|&y| (y - shift) * (y - shift)).sum();
        let off = (n2 - self.support.len()) as f64;
        on + off * shift * shift
    }

    /// Scales the represented vector by `factor`.
    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|y| *y *= factor);
        self.l *= factor;
    }

    /// `v · (ŷ - qL·1)`. When `v` labels fewer than `n2` vertices the
    /// unlabelled remainder is taken to balance the total, i.e. `sum v = 0`.
    pub fn dot_labels(&self, v: &[i8], q: f64, n2: usize) -> f64 {
        let on: f64 = self
            .support
            .vertices()
            .iter()
            .zip(&self.values)
            .filter(|(&j, _)| j < v.len())
            .map(|(&j, &y)| f64::from(v[j]) * y)
            .sum();
        let total: f64 = if v.len() == n2 { v.iter().map(|&s| f64::from(s)).sum() } else { 0.0 };
        on - q * self.l * total
    }

    /// Materialises all `n2` coordinates. Test use only.
    pub fn to_dense(&self, q: f64, n2: usize) -> Vec<f64> {
        let mut out = vec![-q * self.l; n2];
        for (&j, &y) in self.support.vertices().iter().zip(&self.values) {
            out[j] += y;
        }
        out
    }
}

/// `Mᵀx` for `M = A - qJ`: returns `ŷ` on the support of `sub` together with
/// `L = sum x`. The centering enters only through `q` when the result is read.
pub fn apply_mt<'a>(sub: &'a SubGraph, x: &[f64]) -> RightVector<'a> {
    debug_assert_eq!(x.len(), sub.n1());
    let mut values = vec![0.0; sub.support().len()];
    for (i, &xi) in x.iter().enumerate() {
        for &s in sub.row_slots(i) {
            values[s] += xi;
        }
    }
    RightVector { support: sub.support(), values, l: x.iter().sum() }
}

/// `M y` for `M = A - qJ` of `sub` and `y = ŷ - qL·1`, expanded as
/// `Aŷ - qJŷ - qL·A1 + q²L·n2·1` so nothing of length `n2` is touched.
pub fn apply_m(sub: &SubGraph, y: &RightVector<'_>, q: f64, n2: usize) -> Vec<f64> {
    let y_hat_sum: f64 = y.values.iter().sum();
    let constant = -q * y_hat_sum + q * q * y.l * n2 as f64;
    let ql = q * y.l;
    (0..sub.n1())
        .map(|i| {
            let row = sub.row(i);
            let a_y: f64 = row.iter().map(|&j| y.get_hat(j)).sum();
            a_y - ql * row.len() as f64 + constant
        })
        .collect()
}
