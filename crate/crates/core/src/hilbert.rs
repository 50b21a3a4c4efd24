//! Elements of the direct-sum Hilbert spaces that carry observations.
//!
//! A [`HilbertPoint`] is a list of grid functions (L² components, integrated
//! by trapezoid quadrature) plus a Euclidean vector, covering scalar
//! responses, curves, vectors of predictors and mixed direct sums with a
//! single inner product. A [`Sample`] is a conformable collection of points
//! with optional centering state.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::canonical_row_order;

/// A one-dimensional quadrature grid: strictly increasing points together
/// with trapezoid weights derived from them.
#[derive(Debug, Clone)]
pub struct Grid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Build a grid from strictly increasing points (at least two).
    /// Weights follow the trapezoid rule: interior points get half the
    /// length of both adjacent intervals, endpoints a one-sided half.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Domain(format!(
                "grid needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("grid points must be finite".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("grid points must be strictly increasing".into()));
        }
        let m = points.len();
        let mut weights = vec![0.0; m];
        weights[0] = 0.5 * (points[1] - points[0]);
        weights[m - 1] = 0.5 * (points[m - 1] - points[m - 2]);
        for k in 1..m - 1 {
            weights[k] = 0.5 * (points[k + 1] - points[k - 1]);
        }
        Ok(Self { points, weights })
    }

    /// Uniform grid of `m` points on `[a, b]`.
    pub fn uniform(a: f64, b: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("grid needs at least 2 points, got {m}")));
        }
        let step = (b - a) / (m - 1) as f64;
        let points = (0..m)
            .map(|k| if k == m - 1 { b } else { a + k as f64 * step })
            .collect();
        Self::from_points(points)
    }

    /// Uniform m-point grid on [0, 1] behind an `Arc`; the simulation
    /// generators default to m = 101.
    pub fn default_unit(m: usize) -> Result<Arc<Self>> {
        Ok(Arc::new(Self::uniform(0.0, 1.0, m)?))
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires ≥ 2 points
    }

    /// Length of the covered interval.
    pub fn span(&self) -> f64 {
        self.points[self.points.len() - 1] - self.points[0]
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
    }
}

/// One L² component of a point: a grid and the function values on it.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalPart {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl FunctionalPart {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// An element of a direct-sum Hilbert space: zero or more grid functions
/// plus a (possibly empty) Euclidean part. At least one component must be
/// present.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertPoint {
    functional_parts: Vec<FunctionalPart>,
    scalar_part: Vec<f64>,
}

impl HilbertPoint {
    /// A point with a single L² component.
    pub fn functional(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        Self::direct_sum(vec![(grid, values)], Vec::new())
    }

    /// A point with only a Euclidean component.
    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        Self::direct_sum(Vec::new(), values)
    }

    /// A general direct-sum point.
    pub fn direct_sum(parts: Vec<(Arc<Grid>, Vec<f64>)>, scalar_part: Vec<f64>) -> Result<Self> {
        if parts.is_empty() && scalar_part.is_empty() {
            return Err(Error::Domain(
                "a Hilbert point needs at least one component".into(),
            ));
        }
        let mut functional_parts = Vec::with_capacity(parts.len());
        for (idx, (grid, values)) in parts.into_iter().enumerate() {
            if values.len() != grid.len() {
                return Err(Error::Domain(format!(
                    "functional component {idx}: {} values on a {}-point grid",
                    values.len(),
                    grid.len()
                )));
            }
            functional_parts.push(FunctionalPart { grid, values });
        }
        Ok(Self {
            functional_parts,
            scalar_part,
        })
    }

    pub fn functional_parts(&self) -> &[FunctionalPart] {
        &self.functional_parts
    }

    pub fn scalar_part(&self) -> &[f64] {
        &self.scalar_part
    }

    /// True when both points share all grids element-wise and have equal
    /// scalar dimensions.
    pub fn conformable(&self, other: &Self) -> bool {
        self.scalar_part.len() == other.scalar_part.len()
            && self.functional_parts.len() == other.functional_parts.len()
            && self
                .functional_parts
                .iter()
                .zip(&other.functional_parts)
                .all(|(a, b)| Arc::ptr_eq(&a.grid, &b.grid) || a.grid == b.grid)
    }

    fn check_conformable(&self, other: &Self) -> Result<()> {
        if self.conformable(other) {
            Ok(())
        } else {
            Err(Error::Conformability(format!(
                "{} functional part(s) + {} scalar(s) vs {} functional part(s) + {} scalar(s), or differing grids",
                self.functional_parts.len(),
                self.scalar_part.len(),
                other.functional_parts.len(),
                other.scalar_part.len(),
            )))
        }
    }

    /// Direct-sum inner product: quadrature over every L² component plus the
    /// Euclidean dot product. Symmetric and bilinear.
    pub fn inner_product(&self, other: &Self) -> Result<f64> {
        self.check_conformable(other)?;
        let mut acc = 0.0;
        for (pa, pb) in self.functional_parts.iter().zip(&other.functional_parts) {
            let w = pa.grid.weights();
            for ((w, a), b) in w.iter().zip(&pa.values).zip(&pb.values) {
                acc += w * a * b;
            }
        }
        for (a, b) in self.scalar_part.iter().zip(&other.scalar_part) {
            acc += a * b;
        }
        Ok(acc)
    }

    /// Induced norm √⟨a, a⟩.
    pub fn norm(&self) -> f64 {
        self.inner_product(self).expect("point is conformable with itself").sqrt()
    }

    /// The zero point of the same space.
    pub fn zero_like(&self) -> Self {
        Self {
            functional_parts: self
                .functional_parts
                .iter()
                .map(|p| FunctionalPart {
                    grid: p.grid.clone(),
                    values: vec![0.0; p.values.len()],
                })
                .collect(),
            scalar_part: vec![0.0; self.scalar_part.len()],
        }
    }

    /// self + c · other.
    pub fn add_scaled(&self, other: &Self, c: f64) -> Result<Self> {
        self.check_conformable(other)?;
        let mut out = self.clone();
        for (po, pi) in out.functional_parts.iter_mut().zip(&other.functional_parts) {
            for (v, w) in po.values.iter_mut().zip(&pi.values) {
                *v += c * w;
            }
        }
        for (v, w) in out.scalar_part.iter_mut().zip(&other.scalar_part) {
            *v += c * w;
        }
        Ok(out)
    }

    /// c · self.
    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.functional_parts {
            for v in &mut p.values {
                *v *= c;
            }
        }
        for v in &mut out.scalar_part {
            *v *= c;
        }
        out
    }

    /// Total number of stored coordinates (all grids, then scalars).
    pub(crate) fn coordinate_count(&self) -> usize {
        self.functional_parts.iter().map(|p| p.values.len()).sum::<usize>()
            + self.scalar_part.len()
    }

    /// Flat coordinate accessor in traversal order (functional parts first,
    /// then the scalar part).
    pub(crate) fn coordinate(&self, mut k: usize) -> f64 {
        for p in &self.functional_parts {
            if k < p.values.len() {
                return p.values[k];
            }
            k -= p.values.len();
        }
        self.scalar_part[k]
    }

    pub(crate) fn coordinate_mut(&mut self, mut k: usize) -> &mut f64 {
        for p in &mut self.functional_parts {
            if k < p.values.len() {
                return &mut p.values[k];
            }
            k -= p.values.len();
        }
        &mut self.scalar_part[k]
    }
}

/// A collection of `n` conformable points, with centering state.
#[derive(Debug, Clone)]
pub struct Sample {
    elements: Vec<HilbertPoint>,
    centered: bool,
    mean: Option<HilbertPoint>,
}

impl Sample {
    /// Wrap elements into a sample; all must be mutually conformable.
    pub fn new(elements: Vec<HilbertPoint>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Domain("sample must contain at least one element".into()));
        }
        let first = &elements[0];
        for (i, e) in elements.iter().enumerate().skip(1) {
            if !first.conformable(e) {
                return Err(Error::Conformability(format!(
                    "element {i} is not conformable with element 0"
                )));
            }
        }
        Ok(Self {
            elements,
            centered: false,
            mean: None,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HilbertPoint] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &HilbertPoint {
        &self.elements[i]
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Mean of the original elements; present only after centering.
    pub fn mean(&self) -> Option<&HilbertPoint> {
        self.mean.as_ref()
    }

    /// Pointwise mean of the elements, summed in canonical row order so the
    /// result is bitwise invariant under permutations of the sample.
    pub fn pointwise_mean(&self) -> HilbertPoint {
        let n = self.elements.len();
        let width = self.elements[0].coordinate_count();
        let order = canonical_row_order(n, width, |i, k| self.elements[i].coordinate(k));
        let mut mean = self.elements[0].zero_like();
        let inv = 1.0 / n as f64;
        for k in 0..width {
            let mut acc = 0.0;
            for &i in &order {
                acc += self.elements[i].coordinate(k);
            }
            *mean.coordinate_mut(k) = acc * inv;
        }
        mean
    }

    /// Subtract the pointwise mean from every element and record it.
    /// Centering an already-centered sample returns it unchanged.
    pub fn center(&self) -> Result<Sample> {
        if self.elements.is_empty() {
            return Err(Error::Domain("cannot center an empty sample".into()));
        }
        if self.centered {
            return Ok(self.clone());
        }
        let mean = self.pointwise_mean();
        let elements = self
            .elements
            .iter()
            .map(|e| e.add_scaled(&mean, -1.0).expect("sample elements are conformable"))
            .collect();
        Ok(Sample {
            elements,
            centered: true,
            mean: Some(mean),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit_grid(m: usize) -> Arc<Grid> {
        Arc::new(Grid::uniform(0.0, 1.0, m).unwrap())
    }

    fn func(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> HilbertPoint {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        HilbertPoint::functional(grid.clone(), values).unwrap()
    }

    #[test]
    fn trapezoid_weights_sum_to_span() {
        let grid = Grid::from_points(vec![0.0, 0.1, 0.35, 0.7, 1.0]).unwrap();
        let total: f64 = grid.weights().iter().sum();
        assert_relative_eq!(total, grid.span(), max_relative = 1e-12);
        assert!(grid.weights().iter().all(|&w| w > 0.0));
        assert_relative_eq!(grid.weights()[0], 0.05, max_relative = 1e-15);
        assert_relative_eq!(grid.weights()[1], 0.175, max_relative = 1e-15);
    }

    #[test]
    fn grid_rejects_bad_points() {
        assert!(Grid::from_points(vec![0.0]).is_err());
        assert!(Grid::from_points(vec![0.0, 0.0]).is_err());
        assert!(Grid::from_points(vec![0.0, -1.0]).is_err());
        assert!(Grid::from_points(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn inner_product_of_constants_is_exact() {
        let grid = unit_grid(101);
        let one = func(&grid, |_| 1.0);
        assert_relative_eq!(one.inner_product(&one).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn inner_product_linear_is_exact() {
        let grid = unit_grid(101);
        let id = func(&grid, |t| t);
        let one = func(&grid, |_| 1.0);
        assert_relative_eq!(id.inner_product(&one).unwrap(), 0.5, max_relative = 1e-13);
    }

    #[test]
    fn fourier_pair_is_orthogonal() {
        let grid = unit_grid(201);
        let c = func(&grid, |t| 2f64.sqrt() * (2.0 * std::f64::consts::PI * t).cos());
        let s = func(&grid, |t| 2f64.sqrt() * (2.0 * std::f64::consts::PI * t).sin());
        let ip = c.inner_product(&s).unwrap();
        assert!(ip.abs() < 1e-10, "got {ip}");

        // independent check on a much finer quadrature
        let fine = unit_grid(100_001);
        let cf = func(&fine, |t| 2f64.sqrt() * (2.0 * std::f64::consts::PI * t).cos());
        let sf = func(&fine, |t| 2f64.sqrt() * (2.0 * std::f64::consts::PI * t).sin());
        let oracle = cf.inner_product(&sf).unwrap();
        assert!((ip - oracle).abs() < 1e-10);
    }

    #[test]
    fn non_conformable_points_error() {
        let a = func(&unit_grid(11), |t| t);
        let b = func(&unit_grid(12), |t| t);
        assert!(matches!(a.inner_product(&b), Err(Error::Conformability(_))));
        let s = HilbertPoint::scalar(vec![1.0]).unwrap();
        assert!(matches!(a.inner_product(&s), Err(Error::Conformability(_))));
    }

    #[test]
    fn empty_point_is_rejected() {
        assert!(HilbertPoint::direct_sum(Vec::new(), Vec::new()).is_err());
    }

    #[test]
    fn norm_examples() {
        let grid = unit_grid(101);
        assert_relative_eq!(func(&grid, |_| 1.0).norm(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(
            HilbertPoint::scalar(vec![3.0, 4.0]).unwrap().norm(),
            5.0,
            max_relative = 1e-15
        );
        let ds = HilbertPoint::direct_sum(
            vec![(grid.clone(), vec![1.0; grid.len()])],
            vec![1.0],
        )
        .unwrap();
        assert_relative_eq!(ds.norm(), 2f64.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn center_symmetric_pair() {
        let grid = unit_grid(51);
        let f = func(&grid, |t| (3.0 * t).sin());
        let neg = f.scale(-1.0);
        let sample = Sample::new(vec![f.clone(), neg.clone()]).unwrap();
        let centered = sample.center().unwrap();
        assert!(centered.is_centered());
        assert!(centered.mean().unwrap().norm() < 1e-12);
        for (orig, cent) in [&f, &neg].iter().zip(centered.elements()) {
            assert!(orig.add_scaled(cent, -1.0).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn center_identical_pair() {
        let grid = unit_grid(51);
        let f = func(&grid, |t| t * t + 1.0);
        let sample = Sample::new(vec![f.clone(), f.clone()]).unwrap();
        let centered = sample.center().unwrap();
        for e in centered.elements() {
            assert!(e.norm() < 1e-12);
        }
        assert!(centered.mean().unwrap().add_scaled(&f, -1.0).unwrap().norm() < 1e-12);
    }

    #[test]
    fn center_random_sample_has_tiny_mean() {
        let grid = unit_grid(31);
        let elems: Vec<HilbertPoint> = (0..10)
            .map(|i| func(&grid, |t| ((i as f64 + 1.0) * t).sin() + i as f64))
            .collect();
        let max_norm = elems.iter().map(|e| e.norm()).fold(0.0, f64::max);
        let centered = Sample::new(elems).unwrap().center().unwrap();
        let resid = centered.pointwise_mean().norm();
        assert!(resid < 1e-10 * max_norm);
    }

    #[test]
    fn empty_sample_is_rejected() {
        assert!(matches!(Sample::new(Vec::new()), Err(Error::Domain(_))));
    }

    #[test]
    fn center_is_idempotent() {
        let grid = unit_grid(21);
        let elems: Vec<HilbertPoint> = (0..5).map(|i| func(&grid, |t| t + i as f64)).collect();
        let once = Sample::new(elems).unwrap().center().unwrap();
        let twice = once.center().unwrap();
        for (a, b) in once.elements().iter().zip(twice.elements()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn centering_mean_is_permutation_invariant() {
        let grid = unit_grid(21);
        let elems: Vec<HilbertPoint> = (0..7)
            .map(|i| func(&grid, |t| (t * (i as f64 + 0.37)).cos() * 3.1 + 0.01 * i as f64))
            .collect();
        let mut rev = elems.clone();
        rev.reverse();
        let m1 = Sample::new(elems).unwrap().pointwise_mean();
        let m2 = Sample::new(rev).unwrap().pointwise_mean();
        assert_eq!(m1, m2);
    }

    proptest! {
        #[test]
        fn cauchy_schwarz(seed in 0u64..500) {
            let grid = unit_grid(17);
            let a = func(&grid, |t| ((seed as f64 + 1.0) * t).sin() + (seed % 7) as f64 * t);
            let b = func(&grid, |t| ((seed as f64 / 3.0 + 2.0) * t).cos() - t * t);
            let ip = a.inner_product(&b).unwrap().abs();
            prop_assert!(ip <= a.norm() * b.norm() + 1e-10);
        }

        #[test]
        fn translation_expansion_identity(seed in 0u64..200) {
            let grid = unit_grid(13);
            let a = func(&grid, |t| (seed as f64 * t).sin() + 1.0);
            let b = func(&grid, |t| (seed as f64 / 2.0 * t + 0.2).cos());
            let m = func(&grid, |t| 0.5 * t + seed as f64 * 0.01);
            let lhs = a
                .add_scaled(&m, -1.0).unwrap()
                .inner_product(&b.add_scaled(&m, -1.0).unwrap()).unwrap();
            let rhs = a.inner_product(&b).unwrap() - a.inner_product(&m).unwrap()
                - m.inner_product(&b).unwrap() + m.inner_product(&m).unwrap();
            let scale = 1.0f64.max(lhs.abs()).max(rhs.abs());
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
        }

        #[test]
        fn trapezoid_exact_for_linear(slope in -5.0f64..5.0, intercept in -5.0f64..5.0, m in 2usize..60) {
            let grid = unit_grid(m);
            let f = func(&grid, |t| slope * t + intercept);
            let one = func(&grid, |_| 1.0);
            let exact = slope / 2.0 + intercept;
            prop_assert!((f.inner_product(&one).unwrap() - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
        }
    }
}
