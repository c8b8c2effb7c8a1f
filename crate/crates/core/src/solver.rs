//! Backward induction for BSDEs on a [`Lattice`].
//!
//! Three solvers share one node recursion:
//!
//! * [`solve_g`]: the explicit g-solution, `z = (y_up - y_down) / (2 sqrt(dt))`
//!   and `y = (y_up + y_down) / 2 + g(t, z) dt`.
//! * [`solve_penalized`]: the penalized equation with coefficient
//!   `g + m * phi`. The increasing process may charge each outgoing edge
//!   separately, so the node value is
//!
//!   ```text
//!   y = min_s  max(y_down + sqrt(dt) s, y_up - sqrt(dt) s) + (g + m phi)(s) dt
//!   ```
//!
//!   i.e. the cheapest way to lift the children until their spread is `s`.
//!   The map is nondecreasing in both children and in `m`, and reduces to the
//!   explicit step whenever `s = z` is already optimal.
//! * [`solve_constrained`]: doubles `m` until successive penalized solutions
//!   agree to `tol`, giving the minimal supersolution whose `z` stays in the
//!   zero set of `phi`.

use rayon::prelude::*;

use crate::drivers::{Constraint, Driver};
use crate::error::{Error, Result};
use crate::lattice::{Claim, Lattice};
use crate::minimize::{expand_bracket, golden_section, Bracket};

/// Node values beyond this magnitude are reported as divergence.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Layers with at least this many nodes are swept in parallel.
const PARALLEL_LAYER: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Stop once `sup |y^{2m} - y^m| < tol`.
    pub tol: f64,
    pub m0: f64,
    pub m_cap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-6, m0: 1.0, m_cap: (1u64 << 20) as f64 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.m0.is_finite() && self.m0 > 0.0) {
            return Err(Error::InvalidInput(format!("m0 must be positive, got {}", self.m0)));
        }
        if !(self.m_cap >= self.m0) {
            return Err(Error::InvalidInput(format!(
                "m_cap ({}) must be at least m0 ({})",
                self.m_cap, self.m0
            )));
        }
        Ok(())
    }
}

/// Node-indexed `(y, z, C)` of a (super)solution.
///
/// `y` has one layer per step `0..=N`; `z` and the increments of `C` live on
/// the non-terminal layers. `dc_up[i][k]` / `dc_down[i][k]` is the increment
/// of `C` over the step from node `k` at step `i` to its up / down child, so
/// that at every non-terminal node
///
/// ```text
/// z = ((y_up + dc_up) - (y_down + dc_down)) / (2 sqrt(dt))
/// y = ((y_up + dc_up) + (y_down + dc_down)) / 2 + g(t, z) dt
/// ```
#[derive(Debug, Clone)]
pub struct Solution {
    lattice: Lattice,
    y: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    dc_up: Vec<Vec<f64>>,
    dc_down: Vec<Vec<f64>>,
    driver_id: String,
    constraint_id: String,
    penalty_m: Option<f64>,
    max_phi: f64,
}

impl Solution {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn y0(&self) -> f64 {
        self.y[0][0]
    }

    /// The `y`-slice at `step`.
    pub fn y(&self, step: usize) -> &[f64] {
        &self.y[step]
    }

    pub fn z(&self, step: usize) -> &[f64] {
        &self.z[step]
    }

    /// Increments of `C` on the (up, down) edges leaving the nodes of `step`.
    pub fn dc(&self, step: usize) -> (&[f64], &[f64]) {
        (&self.dc_up[step], &self.dc_down[step])
    }

    pub fn driver_id(&self) -> &str {
        &self.driver_id
    }

    pub fn constraint_id(&self) -> &str {
        &self.constraint_id
    }

    pub fn penalty_m(&self) -> Option<f64> {
        self.penalty_m
    }

    /// Largest `phi(t, z)` over the non-terminal nodes (zero for g-solutions).
    pub fn max_phi(&self) -> f64 {
        self.max_phi
    }

    pub fn evaluate_at(&self, step: usize) -> Result<&[f64]> {
        evaluate_at(self, step)
    }

    /// Rebuild `y` backward from the terminal layer, the stored `z` and the
    /// increments of `C`.
    pub fn reconstruct_y(&self, g: &Driver) -> Vec<Vec<f64>> {
        let l = &self.lattice;
        let mut out = vec![Vec::new(); l.num_steps() + 1];
        out[l.num_steps()] = self.y[l.num_steps()].clone();
        for step in (0..l.num_steps()).rev() {
            let t = l.time(step);
            let next = &out[step + 1];
            let layer = (0..l.layer_len(step))
                .map(|k| {
                    let (up, down) = l.children(k);
                    let u = next[up] + self.dc_up[step][k];
                    let d = next[down] + self.dc_down[step][k];
                    0.5 * (u + d) + g.eval(t, self.z[step][k]) * l.dt()
                })
                .collect();
            out[step] = layer;
        }
        out
    }

    /// Largest violation over all nodes of the supersolution identity and of
    /// `dC >= 0`.
    pub fn identity_residual(&self, g: &Driver) -> f64 {
        let l = &self.lattice;
        let mut worst = 0.0f64;
        for step in 0..l.num_steps() {
            let t = l.time(step);
            for k in 0..l.layer_len(step) {
                let (up, down) = l.children(k);
                let (cu, cd) = (self.dc_up[step][k], self.dc_down[step][k]);
                let u = self.y[step + 1][up] + cu;
                let d = self.y[step + 1][down] + cd;
                let z = (u - d) / (2.0 * l.sqrt_dt());
                let y = 0.5 * (u + d) + g.eval(t, z) * l.dt();
                worst = worst
                    .max((y - self.y[step][k]).abs())
                    .max((z - self.z[step][k]).abs())
                    .max(-cu)
                    .max(-cd);
            }
        }
        worst
    }
}

/// Converged limit of the penalization scheme.
#[derive(Debug, Clone)]
pub struct MinimalSolution {
    pub solution: Solution,
    /// Penalty weight of the returned iterate.
    pub m_final: f64,
    /// `sup |y^{2m} - y^m|` at termination.
    pub convergence_gap: f64,
    /// `max phi(t, z) dt` over the nodes of the returned iterate.
    pub phi_residual: f64,
    /// `(m, y0^m)` for every penalized solve that was run.
    pub penalty_path: Vec<(f64, f64)>,
    /// Largest decrease `y^m - y^{2m}` seen at any node (zero for a monotone run).
    pub monotone_violation: f64,
}

impl MinimalSolution {
    pub fn y0(&self) -> f64 {
        self.solution.y0()
    }
}

pub fn evaluate_at(solution: &Solution, step: usize) -> Result<&[f64]> {
    let n = solution.lattice.num_steps();
    if step > n {
        return Err(Error::InvalidInput(format!("step {step} outside 0..={n}")));
    }
    Ok(&solution.y[step])
}

struct NodeOut {
    y: f64,
    z: f64,
    dc_up: f64,
    dc_down: f64,
    phi: f64,
}

/// Backward sweep; `layer(t)` builds the node map `(y_up, y_down) -> node`
/// for the layer at time `t`.
fn backward<L, N>(lattice: &Lattice, claim: &Claim, layer: L) -> Result<Layers>
where
    L: Fn(f64) -> N,
    N: Fn(f64, f64) -> std::result::Result<NodeOut, f64> + Sync,
{
    lattice.check_claim(claim)?;
    let n = lattice.num_steps();
    let mut layers = Layers {
        y: vec![Vec::new(); n + 1],
        z: vec![Vec::new(); n],
        dc_up: vec![Vec::new(); n],
        dc_down: vec![Vec::new(); n],
        max_phi: 0.0,
    };
    layers.y[n] = claim.values().to_vec();
    for step in (0..n).rev() {
        let t = lattice.time(step);
        let next = &layers.y[step + 1];
        let node = layer(t);
        let eval = |k: usize| {
            let (up, down) = lattice.children(k);
            node(next[up], next[down])
        };
        let len = lattice.layer_len(step);
        let outs: Vec<std::result::Result<NodeOut, f64>> = if len >= PARALLEL_LAYER {
            (0..len).into_par_iter().map(eval).collect()
        } else {
            (0..len).map(eval).collect()
        };
        let mut y = Vec::with_capacity(len);
        let mut z = Vec::with_capacity(len);
        let mut cu = Vec::with_capacity(len);
        let mut cd = Vec::with_capacity(len);
        for out in outs {
            let out = out.map_err(|magnitude| Error::Divergence { step, magnitude })?;
            if !(out.y.abs() <= DIVERGENCE_THRESHOLD) {
                return Err(Error::Divergence { step, magnitude: out.y.abs() });
            }
            layers.max_phi = layers.max_phi.max(out.phi);
            y.push(out.y);
            z.push(out.z);
            cu.push(out.dc_up);
            cd.push(out.dc_down);
        }
        layers.y[step] = y;
        layers.z[step] = z;
        layers.dc_up[step] = cu;
        layers.dc_down[step] = cd;
    }
    Ok(layers)
}

struct Layers {
    y: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    dc_up: Vec<Vec<f64>>,
    dc_down: Vec<Vec<f64>>,
    max_phi: f64,
}

impl Layers {
    fn into_solution(
        self,
        lattice: &Lattice,
        driver_id: &str,
        constraint_id: &str,
        penalty_m: Option<f64>,
    ) -> Solution {
        Solution {
            lattice: lattice.clone(),
            y: self.y,
            z: self.z,
            dc_up: self.dc_up,
            dc_down: self.dc_down,
            driver_id: driver_id.to_string(),
            constraint_id: constraint_id.to_string(),
            penalty_m,
            max_phi: self.max_phi,
        }
    }
}

/// Explicit backward induction for the g-solution with terminal value `claim`.
pub fn solve_g(g: &Driver, claim: &Claim, lattice: &Lattice) -> Result<Solution> {
    let dt = lattice.dt();
    let two_sq = 2.0 * lattice.sqrt_dt();
    let layers = backward(lattice, claim, |t| {
        move |u: f64, d: f64| {
            let z = (u - d) / two_sq;
            Ok(NodeOut { y: 0.5 * (u + d) + g.eval(t, z) * dt, z, dc_up: 0.0, dc_down: 0.0, phi: 0.0 })
        }
    })?;
    Ok(layers.into_solution(lattice, g.label(), "none", None))
}

/// Penalized solution with weight `m`; the penalty `m phi(t, z) dt` and any
/// lifting of the children are recorded as increments of `C`.
pub fn solve_penalized(
    g: &Driver,
    phi: &Constraint,
    m: f64,
    claim: &Claim,
    lattice: &Lattice,
) -> Result<Solution> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidInput(format!("penalty weight must be positive, got {m}")));
    }
    let mut g_kinks = g.kinks();
    g_kinks.sort_by(f64::total_cmp);
    g_kinks.dedup();
    let mut kinks = g_kinks.clone();
    kinks.extend(phi.kinks());
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    let step = PenalizedStep { g, phi, m, dt: lattice.dt(), sq: lattice.sqrt_dt() };
    let layers = backward(lattice, claim, |t| {
        let free = step.branches(|s| g.eval(t, s), &g_kinks);
        let penalized = step.branches(|s| g.eval(t, s) + m * phi.eval(t, s), &kinks);
        let step = &step;
        move |u: f64, d: f64| step.solve(t, u, d, &free, &penalized)
    })?;
    Ok(layers.into_solution(lattice, g.label(), phi.label(), Some(m)))
}

/// Minimum of a convex function of one variable.
#[derive(Debug, Clone, Copy)]
enum BranchMin {
    At(f64),
    /// Strictly increasing: the infimum is approached as `s -> -inf`.
    Increasing,
    /// Strictly decreasing: the infimum is approached as `s -> +inf`.
    Decreasing,
}

fn convex_min(f: impl Fn(f64) -> f64, kinks: &[f64]) -> BranchMin {
    let f0 = f(0.0);
    let delta = 1e-7;
    let (fr, fl) = (f(delta), f(-delta));
    if fr >= f0 && fl >= f0 {
        return BranchMin::At(0.0);
    }
    let dir = if fr < fl { 1.0 } else { -1.0 };
    let (lo, hi) = match expand_bracket(&f, 0.0, f0, dir, delta, DIVERGENCE_THRESHOLD) {
        Bracket::Found { lo, hi } => (lo, hi),
        Bracket::Unbounded { at, value } => {
            // A plateau out to infinity is attained at the kink where it starts.
            if value.is_finite() && f(0.5 * at) <= value {
                let plateau = kinks.iter().map(|&k| (k, f(k))).filter(|&(_, fk)| fk <= value);
                if let Some((k, _)) = plateau.min_by(|a, b| a.1.total_cmp(&b.1)) {
                    return BranchMin::At(k);
                }
            }
            return if dir > 0.0 { BranchMin::Decreasing } else { BranchMin::Increasing };
        }
    };
    let mut best = golden_section(&f, lo, hi, 1e-13 * (1.0 + lo.abs().max(hi.abs())));
    for &k in kinks.iter().filter(|&&k| lo <= k && k <= hi) {
        let fk = f(k);
        if fk <= best.1 {
            best = (k, fk);
        }
    }
    BranchMin::At(best.0)
}

/// Minimizers of the two branches of the lifted objective for one layer and
/// one coefficient `h`. Above the unlifted spread `z0` the objective is
/// `y_down + sqrt(dt) s + h(s) dt` (the up child is lifted), below it
/// `y_up - sqrt(dt) s + h(s) dt`. Neither minimizer depends on the
/// children, which keeps the node map exactly monotone in them.
#[derive(Debug, Clone, Copy)]
struct Branches {
    lift_up: BranchMin,
    lift_down: BranchMin,
}

struct PenalizedStep<'a> {
    g: &'a Driver,
    phi: &'a Constraint,
    m: f64,
    dt: f64,
    sq: f64,
}

impl PenalizedStep<'_> {
    fn branches(&self, h: impl Fn(f64) -> f64, kinks: &[f64]) -> Branches {
        let (sq, dt) = (self.sq, self.dt);
        Branches {
            lift_up: convex_min(|s| sq * s + h(s) * dt, kinks),
            lift_down: convex_min(|s| -sq * s + h(s) * dt, kinks),
        }
    }

    /// The lifted spread worth comparing against `z0`, if any; `Err` when
    /// the node problem is unbounded below.
    fn candidate(z0: f64, b: &Branches) -> std::result::Result<Option<f64>, f64> {
        match (b.lift_up, b.lift_down) {
            (BranchMin::Decreasing, _) | (_, BranchMin::Increasing) => Err(f64::INFINITY),
            (BranchMin::At(s), _) if s > z0 => Ok(Some(s)),
            (_, BranchMin::At(s)) if s < z0 => Ok(Some(s)),
            _ => Ok(None),
        }
    }

    /// The cheaper of the unlifted step and the lifted candidate; ties stay unlifted.
    fn best(&self, t: f64, u: f64, d: f64, z0: f64, m: f64, b: &Branches) -> std::result::Result<NodeOut, f64> {
        let plain = self.lift(t, u, d, z0, z0, m);
        match Self::candidate(z0, b)? {
            Some(s) => {
                let lifted = self.lift(t, u, d, z0, s, m);
                Ok(if lifted.y < plain.y { lifted } else { plain })
            }
            None => Ok(plain),
        }
    }

    fn solve(&self, t: f64, u: f64, d: f64, free: &Branches, penalized: &Branches) -> std::result::Result<NodeOut, f64> {
        let z0 = (u - d) / (2.0 * self.sq);
        // A feasible minimizer without the penalty is optimal for every m,
        // and reusing it keeps the node value independent of m.
        if let Ok(out) = self.best(t, u, d, z0, 0.0, free) {
            if out.phi == 0.0 {
                return Ok(out);
            }
        }
        self.best(t, u, d, z0, self.m, penalized)
    }

    fn lift(&self, t: f64, u: f64, d: f64, z0: f64, s: f64, m: f64) -> NodeOut {
        let phi = self.phi.eval(t, s);
        let penalty = if phi == 0.0 { 0.0 } else { m * phi * self.dt };
        let (u_lift, d_lift) = if s > z0 {
            (d + 2.0 * self.sq * s, d)
        } else if s < z0 {
            (u, u - 2.0 * self.sq * s)
        } else {
            (u, d)
        };
        NodeOut {
            y: 0.5 * (u_lift + d_lift) + self.g.eval(t, s) * self.dt + penalty,
            z: s,
            dc_up: (u_lift - u) + penalty,
            dc_down: (d_lift - d) + penalty,
            phi,
        }
    }
}

fn sup_distance(a: &Solution, b: &Solution) -> (f64, f64) {
    let mut gap = 0.0f64;
    let mut decrease = 0.0f64;
    for (la, lb) in a.y.iter().zip(&b.y) {
        for (x, y) in la.iter().zip(lb) {
            gap = gap.max((y - x).abs());
            decrease = decrease.max(x - y);
        }
    }
    (gap, decrease)
}

/// Minimal supersolution of the constrained equation by the penalization
/// limit `m = m0, 2 m0, 4 m0, ...`.
pub fn solve_constrained(
    g: &Driver,
    phi: &Constraint,
    claim: &Claim,
    lattice: &Lattice,
    config: &SolverConfig,
) -> Result<MinimalSolution> {
    config.validate()?;
    let mut m = config.m0;
    let mut prev = solve_penalized(g, phi, m, claim, lattice)?;
    let mut path = vec![(m, prev.y0())];
    // If the penalty never binds, every larger weight reproduces this iterate.
    if prev.max_phi == 0.0 {
        return Ok(MinimalSolution {
            solution: prev,
            m_final: m,
            convergence_gap: 0.0,
            phi_residual: 0.0,
            penalty_path: path,
            monotone_violation: 0.0,
        });
    }
    let mut gap = f64::INFINITY;
    let mut monotone_violation = 0.0f64;
    loop {
        let next_m = 2.0 * m;
        if next_m > config.m_cap {
            return Err(Error::NonConvergence { m, gap });
        }
        let next = solve_penalized(g, phi, next_m, claim, lattice)?;
        path.push((next_m, next.y0()));
        let (g_next, decrease) = sup_distance(&prev, &next);
        gap = g_next;
        monotone_violation = monotone_violation.max(decrease);
        debug_assert!(
            decrease <= 1e-9 * (1.0 + next.y0().abs()),
            "penalized iterates decreased by {decrease}"
        );
        if gap < config.tol {
            let phi_residual = next.max_phi * lattice.dt();
            return Ok(MinimalSolution {
                solution: next,
                m_final: next_m,
                convergence_gap: gap,
                phi_residual,
                penalty_path: path,
                monotone_violation,
            });
        }
        prev = next;
        m = next_m;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;

    #[test]
    fn zero_driver_on_brownian_claim() {
        let l = build_lattice(5, 1.0).unwrap();
        let s = solve_g(&Driver::zero(), &Claim::terminal_w(&l).unwrap(), &l).unwrap();
        assert!(s.y0().abs() < 1e-15);
        for step in 0..5 {
            assert!(s.z(step).iter().all(|z| (z - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn linear_driver_drift() {
        for n in [1, 3, 8] {
            let l = build_lattice(n, 1.0).unwrap();
            let s = solve_g(&Driver::linear(0.3).unwrap(), &Claim::terminal_w(&l).unwrap(), &l).unwrap();
            assert!((s.y0() - 0.3).abs() < 1e-14, "n={n}: {}", s.y0());
        }
    }

    #[test]
    fn evaluate_at_bounds() {
        let l = build_lattice(3, 1.0).unwrap();
        let xi = Claim::from_terminal_w(&l, |w| w * w).unwrap();
        let s = solve_g(&Driver::zero(), &xi, &l).unwrap();
        assert_eq!(s.evaluate_at(3).unwrap(), xi.values());
        assert_eq!(s.evaluate_at(0).unwrap().len(), 1);
        assert!(matches!(s.evaluate_at(4), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn martingale_slices() {
        let l = build_lattice(6, 2.0).unwrap();
        let s = solve_g(&Driver::zero(), &Claim::terminal_w(&l).unwrap(), &l).unwrap();
        for k in 0..=6 {
            for (a, b) in s.evaluate_at(k).unwrap().iter().zip(l.w_layer(k)) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn penalized_without_constraint_is_the_g_solution() {
        let l = build_lattice(6, 1.0).unwrap();
        let xi = Claim::from_path(&l, |p| p[6].tanh() + 0.5 * p[3].max(0.0)).unwrap();
        for g in [Driver::zero(), Driver::quadratic(1.0).unwrap(), Driver::abs(0.5).unwrap()] {
            let a = solve_g(&g, &xi, &l).unwrap();
            for m in [1.0, 64.0] {
                let b = solve_penalized(&g, &Constraint::none(), m, &xi, &l).unwrap();
                assert_eq!(a.y, b.y);
                assert_eq!(b.penalty_m(), Some(m));
            }
        }
    }

    #[test]
    fn inactive_band_changes_nothing() {
        let l = build_lattice(5, 1.0).unwrap();
        let xi = Claim::terminal_w(&l).unwrap();
        let a = solve_g(&Driver::zero(), &xi, &l).unwrap();
        // z sits on the band edge up to rounding
        let b = solve_penalized(&Driver::zero(), &Constraint::z_band(1.0).unwrap(), 8.0, &xi, &l).unwrap();
        for (x, y) in a.y.iter().flatten().zip(b.y.iter().flatten()) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(b.max_phi() < 1e-14);
        let c = solve_constrained(&Driver::zero(), &Constraint::z_band(1.0).unwrap(), &xi, &l, &SolverConfig::default()).unwrap();
        assert!((c.y0() - a.y0()).abs() < 1e-14);
    }

    #[test]
    fn two_step_penalized_anchors() {
        // lifting pays off once m * sqrt(dt) > 1, i.e. m > sqrt(2)
        let l = build_lattice(2, 1.0).unwrap();
        let xi = Claim::terminal_w(&l).unwrap();
        let band = Constraint::z_band(0.5).unwrap();
        let y0: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&m| solve_penalized(&Driver::zero(), &band, m, &xi, &l).unwrap().y0())
            .collect();
        assert!((y0[0] - 0.5).abs() < 1e-15);
        assert!((y0[1] - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(y0[1], y0[2]);
    }

    #[test]
    fn identity_holds_for_every_solver() {
        let l = build_lattice(7, 1.0).unwrap();
        let xi = Claim::from_path(&l, |p| 2.0 * (1.5 * p[7]).tanh() + if p[3] > 0.0 { 1.0 } else { 0.0 }).unwrap();
        let g = Driver::quadratic(0.5).unwrap();
        let a = solve_g(&g, &xi, &l).unwrap();
        assert!(a.identity_residual(&g) < 1e-12);
        for phi in [Constraint::z_band(0.8).unwrap(), Constraint::z_sign()] {
            let b = solve_constrained(&g, &phi, &xi, &l, &SolverConfig::default()).unwrap();
            let s = &b.solution;
            assert!(s.identity_residual(&g) < 1e-12, "{}", s.identity_residual(&g));
            let rebuilt = s.reconstruct_y(&g);
            for (x, y) in rebuilt.iter().flatten().zip(s.y.iter().flatten()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unstable_scheme_is_reported_as_divergence() {
        // mu * sqrt(dt) = 2.5 > 1: the penalized node problem is unbounded below
        let l = build_lattice(4, 1.0).unwrap();
        let xi = Claim::terminal_w(&l).unwrap();
        let err = solve_constrained(
            &Driver::linear(5.0).unwrap(),
            &Constraint::z_band(0.5).unwrap(),
            &xi,
            &l,
            &SolverConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }), "{err:?}");
    }

    #[test]
    fn cap_reached_is_non_convergence() {
        let l = build_lattice(3, 1.0).unwrap();
        let xi = Claim::terminal_w(&l).unwrap();
        let cfg = SolverConfig { tol: 1e-6, m0: 0.01, m_cap: 0.05 };
        let err = solve_constrained(&Driver::zero(), &Constraint::z_band(0.2).unwrap(), &xi, &l, &cfg).unwrap_err();
        match err {
            Error::NonConvergence { m, gap } => {
                assert_eq!(m, 0.04);
                assert!(gap > 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let l = build_lattice(2, 1.0).unwrap();
        let xi = Claim::terminal_w(&l).unwrap();
        for cfg in [
            SolverConfig { tol: 0.0, ..Default::default() },
            SolverConfig { m0: -1.0, ..Default::default() },
            SolverConfig { m0: 4.0, m_cap: 2.0, ..Default::default() },
        ] {
            assert!(solve_constrained(&Driver::zero(), &Constraint::none(), &xi, &l, &cfg).is_err());
        }
        assert!(solve_penalized(&Driver::zero(), &Constraint::none(), 0.0, &xi, &l).is_err());
    }
}
