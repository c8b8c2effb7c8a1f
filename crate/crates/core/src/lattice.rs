//! Binary scenario trees for a one-dimensional Brownian motion on `[0, T]`.
//!
//! Each step moves `W` by `+sqrt(dt)` or `-sqrt(dt)` with probability 1/2.
//! Two layouts are supported:
//!
//! * [`Layout::PathTree`]: every path prefix is its own node, so claims may
//!   depend on the whole path. Node `k` at step `i` encodes the prefix in its
//!   `i` low bits, most significant bit first, with `1` for an up move.
//! * [`Layout::Recombining`]: node `j` at step `i` is the state with `j` up
//!   moves. Only claims that are functions of `W_T` can live here, but the
//!   node count is quadratic rather than exponential in `N`.

use crate::error::{Error, Result};

/// Largest number of steps accepted for a path tree (2^21 - 1 nodes).
pub const DEFAULT_PATH_CAP: usize = 20;
/// Largest number of steps accepted for a recombining lattice.
pub const RECOMBINING_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layout {
    PathTree,
    Recombining,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    num_steps: usize,
    horizon: f64,
    dt: f64,
    sqrt_dt: f64,
    layout: Layout,
}

/// Path tree with the default cap of [`DEFAULT_PATH_CAP`] steps.
pub fn build_lattice(num_steps: usize, horizon: f64) -> Result<Lattice> {
    Lattice::with_cap(num_steps, horizon, Layout::PathTree, DEFAULT_PATH_CAP)
}

pub fn build_recombining(num_steps: usize, horizon: f64) -> Result<Lattice> {
    Lattice::with_cap(num_steps, horizon, Layout::Recombining, RECOMBINING_CAP)
}

impl Lattice {
    pub fn new(num_steps: usize, horizon: f64, layout: Layout) -> Result<Self> {
        let cap = match layout {
            Layout::PathTree => DEFAULT_PATH_CAP,
            Layout::Recombining => RECOMBINING_CAP,
        };
        Self::with_cap(num_steps, horizon, layout, cap)
    }

    pub fn with_cap(num_steps: usize, horizon: f64, layout: Layout, cap: usize) -> Result<Self> {
        if num_steps == 0 {
            return Err(Error::InvalidInput("num_steps must be at least 1".into()));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
        }
        if num_steps > cap {
            return Err(Error::SizeLimit { requested: num_steps, cap });
        }
        if layout == Layout::PathTree && num_steps >= usize::BITS as usize - 1 {
            return Err(Error::SizeLimit { requested: num_steps, cap: usize::BITS as usize - 2 });
        }
        let dt = horizon / num_steps as f64;
        Ok(Self { num_steps, horizon, dt, sqrt_dt: dt.sqrt(), layout })
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn sqrt_dt(&self) -> f64 {
        self.sqrt_dt
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Time of step `i`.
    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    /// Number of nodes at `step`.
    pub fn layer_len(&self, step: usize) -> usize {
        match self.layout {
            Layout::PathTree => 1usize << step,
            Layout::Recombining => step + 1,
        }
    }

    pub fn terminal_len(&self) -> usize {
        self.layer_len(self.num_steps)
    }

    pub fn total_nodes(&self) -> usize {
        (0..=self.num_steps).map(|i| self.layer_len(i)).sum()
    }

    /// Indices of the (up, down) children at step `i + 1` of node `k` at step `i`.
    #[inline]
    pub fn children(&self, node: usize) -> (usize, usize) {
        match self.layout {
            Layout::PathTree => (2 * node + 1, 2 * node),
            Layout::Recombining => (node + 1, node),
        }
    }

    /// Number of up moves on the way to `node` at `step`.
    pub fn ups(&self, step: usize, node: usize) -> usize {
        match self.layout {
            Layout::PathTree => {
                debug_assert!(node < self.layer_len(step));
                node.count_ones() as usize
            }
            Layout::Recombining => node,
        }
    }

    /// Brownian value at a node: `sqrt(dt)` times the sum of the signs so far.
    pub fn w(&self, step: usize, node: usize) -> f64 {
        let ups = self.ups(step, node) as i64;
        (2 * ups - step as i64) as f64 * self.sqrt_dt
    }

    /// All Brownian values of one layer.
    pub fn w_layer(&self, step: usize) -> Vec<f64> {
        (0..self.layer_len(step)).map(|k| self.w(step, k)).collect()
    }

    /// Signs of the path prefix leading to `node` at `step` (path tree only).
    pub fn signs(&self, step: usize, node: usize) -> Result<Vec<i8>> {
        self.require_path_tree("path signs")?;
        Ok((0..step)
            .map(|j| if (node >> (step - 1 - j)) & 1 == 1 { 1 } else { -1 })
            .collect())
    }

    /// `W_0, ..., W_step` along the path leading to `node` (path tree only).
    pub fn w_path(&self, step: usize, node: usize) -> Result<Vec<f64>> {
        let signs = self.signs(step, node)?;
        let mut path = Vec::with_capacity(step + 1);
        let mut sum = 0i64;
        path.push(0.0);
        for s in signs {
            sum += s as i64;
            path.push(sum as f64 * self.sqrt_dt);
        }
        Ok(path)
    }

    /// Human-readable node label: `+-+` style prefixes for path trees
    /// (`.` at the root), `u<count>` for recombining lattices.
    pub fn node_label(&self, step: usize, node: usize) -> String {
        match self.layout {
            Layout::PathTree if step == 0 => ".".to_string(),
            Layout::PathTree => (0..step)
                .map(|j| if (node >> (step - 1 - j)) & 1 == 1 { '+' } else { '-' })
                .collect(),
            Layout::Recombining => format!("u{node}"),
        }
    }

    pub fn require_path_tree(&self, what: &str) -> Result<()> {
        match self.layout {
            Layout::PathTree => Ok(()),
            Layout::Recombining => {
                Err(Error::Unsupported(format!("{what} requires a path tree layout")))
            }
        }
    }

    /// Expectation of a terminal claim under the symmetric branch probabilities.
    pub fn expectation(&self, claim: &Claim) -> Result<f64> {
        self.check_claim(claim)?;
        match self.layout {
            Layout::PathTree => {
                let sum: f64 = claim.values().iter().sum();
                Ok(sum / claim.len() as f64)
            }
            Layout::Recombining => {
                let mut layer = claim.values().to_vec();
                for step in (0..self.num_steps).rev() {
                    layer = self.conditional_expectation(step, &layer)?;
                }
                Ok(layer[0])
            }
        }
    }

    /// One backward step of the filtration: maps values on the nodes of
    /// `step + 1` to their conditional means on the nodes of `step`.
    pub fn conditional_expectation(&self, step: usize, next: &[f64]) -> Result<Vec<f64>> {
        if step >= self.num_steps {
            return Err(Error::InvalidInput(format!(
                "step {step} has no successor on a {}-step lattice",
                self.num_steps
            )));
        }
        let expected = self.layer_len(step + 1);
        if next.len() != expected {
            return Err(Error::ShapeMismatch { expected, found: next.len() });
        }
        Ok((0..self.layer_len(step))
            .map(|k| {
                let (up, down) = self.children(k);
                0.5 * (next[up] + next[down])
            })
            .collect())
    }

    pub fn check_claim(&self, claim: &Claim) -> Result<()> {
        if claim.layout != self.layout || claim.num_steps != self.num_steps {
            return Err(Error::InvalidInput(format!(
                "claim built for a {:?} lattice with {} steps, lattice is {:?} with {} steps",
                claim.layout, claim.num_steps, self.layout, self.num_steps
            )));
        }
        Ok(())
    }
}

/// A bounded terminal random variable, stored as its value on every
/// terminal node of the lattice it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct Claim {
    values: Vec<f64>,
    layout: Layout,
    num_steps: usize,
    bound: f64,
}

impl Claim {
    /// Claim from explicit terminal values, in terminal node order.
    pub fn from_values(lattice: &Lattice, values: Vec<f64>) -> Result<Self> {
        let expected = lattice.terminal_len();
        if values.len() != expected {
            return Err(Error::ShapeMismatch { expected, found: values.len() });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("claim value {bad} is not finite")));
        }
        let bound = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        Ok(Self { values, layout: lattice.layout, num_steps: lattice.num_steps, bound })
    }

    pub fn constant(lattice: &Lattice, c: f64) -> Result<Self> {
        Self::from_values(lattice, vec![c; lattice.terminal_len()])
    }

    /// Claim `f(W_T)`; valid on either layout.
    pub fn from_terminal_w(lattice: &Lattice, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = lattice.num_steps;
        Self::from_values(lattice, (0..lattice.terminal_len()).map(|k| f(lattice.w(n, k))).collect())
    }

    /// Claim depending on the whole Brownian path `W_0..W_N` (path tree only).
    pub fn from_path(lattice: &Lattice, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        lattice.require_path_tree("path-dependent claims")?;
        let n = lattice.num_steps;
        let values = (0..lattice.terminal_len())
            .map(|k| lattice.w_path(n, k).map(|p| f(&p)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(lattice, values)
    }

    /// Brownian motion at the horizon.
    pub fn terminal_w(lattice: &Lattice) -> Result<Self> {
        Self::from_terminal_w(lattice, |w| w)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    /// Smallest `b` with `|payoff| <= b` on every terminal node.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Check a declared L-infinity bound against every terminal value.
    pub fn check_bound(&self, bound: f64) -> Result<()> {
        if self.bound <= bound {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "claim magnitude {} exceeds the declared bound {bound}",
                self.bound
            )))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.rebuild(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Claim, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.layout != other.layout || self.num_steps != other.num_steps {
            return Err(Error::InvalidInput("claims live on different lattices".into()));
        }
        self.rebuild(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v).expect("negation keeps values finite")
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        self.map(|v| factor * v)
    }

    pub fn shift(&self, c: f64) -> Result<Self> {
        self.map(|v| v + c)
    }

    pub fn add(&self, other: &Claim) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Claim) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pathwise `max(self, floor)`.
    pub fn floor_at(&self, floor: f64) -> Result<Self> {
        self.map(|v| v.max(floor))
    }

    /// Pathwise `min(self, cap)`.
    pub fn cap_at(&self, cap: f64) -> Result<Self> {
        self.map(|v| v.min(cap))
    }

    /// True when `self >= other` on every terminal node.
    pub fn dominates(&self, other: &Claim) -> bool {
        self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| a >= b)
    }

    fn rebuild(&self, values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("claim value {bad} is not finite")));
        }
        let bound = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        Ok(Self { values, layout: self.layout, num_steps: self.num_steps, bound })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_tree() {
        let l = build_lattice(1, 1.0).unwrap();
        assert_eq!(l.terminal_len(), 2);
        let mut ws = l.w_layer(1);
        ws.sort_by(f64::total_cmp);
        assert_eq!(ws, vec![-1.0, 1.0]);
    }

    #[test]
    fn two_step_terminal_values() {
        let l = build_lattice(2, 1.0).unwrap();
        let s = 0.5f64.sqrt();
        let mut ws = l.w_layer(2);
        ws.sort_by(f64::total_cmp);
        let expected = [-2.0 * s, 0.0, 0.0, 2.0 * s];
        for (a, b) in ws.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn cap_boundary() {
        assert!(build_lattice(20, 1.0).is_ok());
        assert_eq!(
            build_lattice(21, 1.0).unwrap_err(),
            Error::SizeLimit { requested: 21, cap: 20 }
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(build_lattice(0, 1.0), Err(Error::InvalidInput(_))));
        assert!(matches!(build_lattice(3, 0.0), Err(Error::InvalidInput(_))));
        assert!(matches!(build_lattice(3, -1.0), Err(Error::InvalidInput(_))));
        assert!(matches!(build_lattice(3, f64::NAN), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn node_counts() {
        let l = build_lattice(5, 2.0).unwrap();
        for i in 0..=5 {
            assert_eq!(l.layer_len(i), 1 << i);
        }
        assert_eq!(l.total_nodes(), (1 << 6) - 1);
        assert_eq!(l.w(0, 0), 0.0);
        let r = build_recombining(5, 2.0).unwrap();
        assert_eq!(r.total_nodes(), 21);
    }

    #[test]
    fn expectation_examples() {
        let l = build_lattice(4, 1.0).unwrap();
        let c = Claim::constant(&l, 3.25).unwrap();
        assert_eq!(l.expectation(&c).unwrap(), 3.25);
        let w = Claim::terminal_w(&l).unwrap();
        assert!(l.expectation(&w).unwrap().abs() < 1e-15);
        let w2 = Claim::from_terminal_w(&l, |w| w * w).unwrap();
        assert!((l.expectation(&w2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_expectation_examples() {
        let l = build_lattice(1, 1.0).unwrap();
        // node 0 at step 0 has up child 1 and down child 0
        assert_eq!(l.conditional_expectation(0, &[1.0, 3.0]).unwrap(), vec![2.0]);
        assert_eq!(l.conditional_expectation(0, &[4.5, 4.5]).unwrap(), vec![4.5]);
        assert_eq!(
            l.conditional_expectation(0, &[1.0]).unwrap_err(),
            Error::ShapeMismatch { expected: 2, found: 1 }
        );
    }

    #[test]
    fn brownian_values_are_a_martingale() {
        for l in [build_lattice(2, 1.0).unwrap(), build_lattice(7, 0.3).unwrap(), build_recombining(9, 2.0).unwrap()] {
            for step in (0..l.num_steps()).rev() {
                let back = l.conditional_expectation(step, &l.w_layer(step + 1)).unwrap();
                for (a, b) in back.iter().zip(l.w_layer(step)) {
                    assert!((a - b).abs() < 1e-14, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn increment_moments() {
        let l = build_lattice(6, 1.7).unwrap();
        for step in 0..6 {
            for k in 0..l.layer_len(step) {
                let (u, d) = l.children(k);
                let w = l.w(step, k);
                let du = l.w(step + 1, u) - w;
                let dd = l.w(step + 1, d) - w;
                assert!((0.5 * (du + dd)).abs() < 1e-14);
                assert!((0.5 * (du * du + dd * dd) - l.dt()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn signs_and_labels() {
        let l = build_lattice(3, 1.0).unwrap();
        // node 0b110 at step 3 = up, up, down
        assert_eq!(l.signs(3, 6).unwrap(), vec![1, 1, -1]);
        assert_eq!(l.node_label(3, 6), "++-");
        assert_eq!(l.node_label(0, 0), ".");
        let path = l.w_path(3, 6).unwrap();
        assert_eq!(path.len(), 4);
        assert!((path[3] - l.w(3, 6)).abs() < 1e-15);
        let r = build_recombining(3, 1.0).unwrap();
        assert!(r.signs(3, 1).is_err());
        assert_eq!(r.node_label(3, 2), "u2");
    }

    #[test]
    fn path_claims_need_a_path_tree() {
        let r = build_recombining(4, 1.0).unwrap();
        assert!(matches!(Claim::from_path(&r, |p| p[2]), Err(Error::Unsupported(_))));
        let l = build_lattice(4, 1.0).unwrap();
        let c = Claim::from_path(&l, |p| p[2]).unwrap();
        assert_eq!(c.len(), 16);
    }

    #[test]
    fn claim_bounds_and_lattice_mismatch() {
        let l = build_lattice(3, 1.0).unwrap();
        let c = Claim::from_terminal_w(&l, |w| w.tanh() * 2.0).unwrap();
        assert!(c.bound() <= 2.0);
        c.check_bound(2.0).unwrap();
        assert!(c.check_bound(0.1).is_err());
        let other = build_lattice(4, 1.0).unwrap();
        assert!(other.expectation(&c).is_err());
        assert!(Claim::from_values(&l, vec![0.0; 3]).is_err());
        assert!(Claim::from_values(&l, vec![f64::INFINITY; 8]).is_err());
    }
}
