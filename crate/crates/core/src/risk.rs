//! Dynamic convex risk measures induced by minimal constrained supersolutions,
//! `rho(xi) = E_0^{g,phi}(-xi)`, and optimal risk transfer between two agents.
//!
//! Transfer problems are stated in two equivalent forms. In risk form an
//! agent holding `eta` passes `xi` on and the pair pays
//! `rho_1(eta - xi) + rho_2(xi)`. In expectation form (used internally) the
//! same quantity is `E^{g1}(eta' - xi') + E^{g2}(xi')` with `eta' = -eta`,
//! `xi' = -xi`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::drivers::{Constraint, Driver, InfConvOptions};
use crate::error::{Error, Result};
use crate::lattice::{Claim, Lattice, Layout};
use crate::solver::{solve_constrained, MinimalSolution, SolverConfig};

/// `rho(xi) = E_0^{g,phi}(-xi)` on a fixed lattice.
#[derive(Debug, Clone)]
pub struct RiskMeasure {
    driver: Driver,
    constraint: Constraint,
    lattice: Lattice,
    config: SolverConfig,
}

impl RiskMeasure {
    /// Requires `g(t, 0) = 0` and `phi(t, 0) = 0`, which make `rho(0) = 0`.
    pub fn new(driver: Driver, constraint: Constraint, lattice: Lattice, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        for t in [0.0, 0.5 * lattice.horizon(), lattice.horizon()] {
            if driver.eval(t, 0.0) != 0.0 {
                return Err(Error::InvalidInput(format!("{}: g(t, 0) must vanish", driver.label())));
            }
        }
        if !constraint.flags().zero_at_zero {
            return Err(Error::InvalidInput(format!(
                "{}: the constraint must admit z = 0 for a normalized risk measure",
                constraint.label()
            )));
        }
        Ok(Self { driver, constraint, lattice, config })
    }

    pub fn driver(&self) -> &Driver {
        &self.driver
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Risk measure of the dilated coefficient `lam * g(z / lam)`.
    pub fn dilate(&self, lam: f64) -> Result<RiskMeasure> {
        Ok(Self { driver: self.driver.dilate(lam)?, ..self.clone() })
    }

    /// The minimal supersolution `E^{g,phi}(claim)` (expectation form, no negation).
    pub fn expectation(&self, claim: &Claim) -> Result<MinimalSolution> {
        solve_constrained(&self.driver, &self.constraint, claim, &self.lattice, &self.config)
    }

    pub fn rho(&self, claim: &Claim) -> Result<f64> {
        Ok(self.expectation(&claim.neg())?.y0())
    }

    /// Step-`t` slice of `E_t^{g,phi}(-claim)`.
    pub fn dynamic_rho(&self, claim: &Claim, step: usize) -> Result<Vec<f64>> {
        let sol = self.expectation(&claim.neg())?;
        Ok(sol.solution.evaluate_at(step)?.to_vec())
    }
}

pub fn rho(rm: &RiskMeasure, claim: &Claim) -> Result<f64> {
    rm.rho(claim)
}

pub fn dynamic_rho(rm: &RiskMeasure, claim: &Claim, step: usize) -> Result<Vec<f64>> {
    rm.dynamic_rho(claim, step)
}

/// One checked property: the largest violation seen and the tolerance it is
/// held to. Skipped checks carry the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub max_violation: f64,
    pub tolerance: f64,
    pub skipped: Option<&'static str>,
}

impl PropertyCheck {
    pub fn new(name: &'static str, max_violation: f64, tolerance: f64) -> Self {
        Self { name, max_violation, tolerance, skipped: None }
    }

    pub fn skipped(name: &'static str, reason: &'static str) -> Self {
        Self { name, max_violation: 0.0, tolerance: 0.0, skipped: Some(reason) }
    }

    pub fn passed(&self) -> bool {
        self.skipped.is_some() || self.max_violation <= self.tolerance
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(PropertyCheck::passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect()
    }

    pub fn get(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: PropertyReport) {
        self.checks.extend(other.checks);
    }
}

const CONVEX_WEIGHTS: [f64; 3] = [0.25, 0.5, 0.75];
const SHIFTS: [f64; 3] = [-1.0, 0.5, 2.0];
const SCALES: [f64; 3] = [0.5, 2.0, 5.0];

#[derive(Default)]
struct AxiomViolations {
    convexity: f64,
    monotonicity: f64,
    translation: f64,
    homogeneity: f64,
    fatou_monotone: f64,
    fatou_gap: f64,
}

fn axiom_violations(rm: &RiskMeasure, xi: &Claim, other: &Claim, homogeneity: bool) -> Result<AxiomViolations> {
    let mut v = AxiomViolations::default();
    let r_xi = rm.rho(xi)?;
    let r_other = rm.rho(other)?;

    if rm.driver.flags().convex {
        for a in CONVEX_WEIGHTS {
            let mix = xi.zip_with(other, |x, y| a * x + (1.0 - a) * y)?;
            let excess = rm.rho(&mix)? - a * r_xi - (1.0 - a) * r_other;
            v.convexity = v.convexity.max(excess);
        }
    }

    // min(xi, other) <= xi pathwise, so its risk must not be smaller
    let lower = xi.zip_with(other, f64::min)?;
    v.monotonicity = v.monotonicity.max(r_xi - rm.rho(&lower)?);

    for c in SHIFTS {
        let shifted = rm.rho(&xi.shift(c)?)?;
        v.translation = v.translation.max((shifted - (r_xi - c)).abs());
    }

    if homogeneity {
        for lam in SCALES {
            let scaled = rm.rho(&xi.scale(lam)?)?;
            v.homogeneity = v.homogeneity.max((scaled - lam * r_xi).abs());
        }
    }

    // xi_n = min(xi, n) increases to xi and equals it once n >= bound
    let last = (xi.bound().ceil() as usize).max(8);
    let mut prev = f64::INFINITY;
    for n in 1..=last {
        let r = rm.rho(&xi.cap_at(n as f64)?)?;
        if prev.is_finite() {
            v.fatou_monotone = v.fatou_monotone.max(r - prev);
        }
        prev = r;
    }
    v.fatou_gap = (prev - r_xi).abs();
    Ok(v)
}

/// Check the convex risk measure axioms and continuity from below on a
/// sample of bounded claims.
///
/// Convexity is checked on consecutive pairs (only for convex drivers),
/// monotonicity on `(min(xi, eta), xi)`, translation for shifts
/// `{-1, 0.5, 2}`, positive homogeneity for scales `{0.5, 2, 5}` when both
/// the driver and the constraint are declared positively homogeneous, and
/// continuity from below on `min(xi, n)` for `n = 1, 2, ...` until the
/// sequence reaches `xi`.
pub fn axiom_suite(rm: &RiskMeasure, claims: &[Claim]) -> Result<PropertyReport> {
    if claims.is_empty() {
        return Err(Error::InvalidInput("axiom suite needs at least one claim".into()));
    }
    let tol = rm.config.tol;
    let homogeneous =
        rm.driver.flags().positively_homogeneous && rm.constraint.flags().positively_homogeneous;
    let per_claim = (0..claims.len())
        .into_par_iter()
        .map(|i| axiom_violations(rm, &claims[i], &claims[(i + 1) % claims.len()], homogeneous))
        .collect::<Result<Vec<_>>>()?;

    let max_of = |f: fn(&AxiomViolations) -> f64| per_claim.iter().map(f).fold(0.0f64, f64::max);
    let zero = Claim::constant(&rm.lattice, 0.0)?;
    let mut checks = vec![PropertyCheck::new("normalization", rm.rho(&zero)?.abs(), 0.0)];
    checks.push(if rm.driver.flags().convex {
        PropertyCheck::new("convexity", max_of(|v| v.convexity), 3.0 * tol)
    } else {
        PropertyCheck::skipped("convexity", "driver not declared convex")
    });
    checks.push(PropertyCheck::new("monotonicity", max_of(|v| v.monotonicity), 3.0 * tol));
    checks.push(PropertyCheck::new("translation", max_of(|v| v.translation), 1e-12));
    checks.push(if homogeneous {
        PropertyCheck::new("homogeneity", max_of(|v| v.homogeneity), 1e-10)
    } else {
        PropertyCheck::skipped("homogeneity", "driver or constraint not positively homogeneous")
    });
    checks.push(PropertyCheck::new("continuity_from_below_monotone", max_of(|v| v.fatou_monotone), 3.0 * tol));
    checks.push(PropertyCheck::new("continuity_from_below_limit", max_of(|v| v.fatou_gap), 10.0 * tol));
    Ok(PropertyReport { checks })
}

/// Fraction `gamma / (gamma + lam)` of the position that the agent with risk
/// tolerance `gamma` should take over from the agent with tolerance `lam`.
pub fn transfer_proportional_optimum(gamma: f64, lam: f64) -> Result<f64> {
    for (name, v) in [("gamma", gamma), ("lambda", lam)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(gamma / (gamma + lam))
}

/// `0, step, 2 step, ..., 1`.
pub fn alpha_grid(step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidInput(format!("alpha step must lie in (0, 1], got {step}")));
    }
    let n = (1.0 / step).round() as usize;
    Ok((0..=n).map(|i| (i as f64 / n as f64).min(1.0)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub best_alpha: f64,
    pub best_total: f64,
    /// `(alpha, rho_1(eta - alpha eta) + rho_2(alpha eta))` per grid point.
    pub curve: Vec<(f64, f64)>,
}

/// Evaluate `rho_1(eta - alpha eta) + rho_2(alpha eta)` over a grid of
/// proportional transfers. Totals within `1e-12` (relative) of the minimum
/// count as ties and go to the smallest `alpha`.
pub fn transfer_sweep(rm1: &RiskMeasure, rm2: &RiskMeasure, eta: &Claim, alphas: &[f64]) -> Result<SweepResult> {
    if rm1.lattice != rm2.lattice {
        return Err(Error::InvalidInput("both agents must share one lattice".into()));
    }
    if alphas.is_empty() || alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::InvalidInput("alpha grid must be a nonempty subset of [0, 1]".into()));
    }
    let curve = alphas
        .par_iter()
        .map(|&a| {
            let xi = eta.scale(a)?;
            Ok((a, rm1.rho(&eta.sub(&xi)?)? + rm2.rho(&xi)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let min = curve.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let (best_alpha, best_total) = curve
        .iter()
        .copied()
        .find(|p| p.1 <= min + 1e-12 * (1.0 + min.abs()))
        .expect("grid is nonempty");
    Ok(SweepResult { best_alpha, best_total, curve })
}

/// `E_0^{g1,phi}(eta - xi) + E_0^{g2,phi}(xi)`, the cost of one split.
pub fn split_value(
    g1: &Driver,
    g2: &Driver,
    phi: &Constraint,
    eta: &Claim,
    xi: &Claim,
    lattice: &Lattice,
    config: &SolverConfig,
) -> Result<f64> {
    let first = solve_constrained(g1, phi, &eta.sub(xi)?, lattice, config)?;
    let second = solve_constrained(g2, phi, xi, lattice, config)?;
    Ok(first.y0() + second.y0())
}

/// Whether the constraint held on the constructed split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisCheck {
    /// `max phi(t, z_hat)`.
    pub max_phi_share: f64,
    /// `max phi(t, z3_hat - z_hat)`.
    pub max_phi_remainder: f64,
    pub tolerance: f64,
}

impl HypothesisCheck {
    pub fn violated(&self) -> bool {
        self.max_phi_share > self.tolerance || self.max_phi_remainder > self.tolerance
    }
}

/// Optimal transfer built from the inf-convolved coefficient.
#[derive(Debug, Clone)]
pub struct TransferResult {
    /// The transferred claim `xi*` (expectation form).
    pub allocation: Claim,
    /// `E_0^{g1,phi}(eta - xi*)`.
    pub first_share: f64,
    /// `E_0^{g2,phi}(xi*)`.
    pub second_share: f64,
    /// `first_share + second_share`; in risk form this is
    /// `rho_1(-eta + xi*) + rho_2(-xi*)`.
    pub total_risk: f64,
    /// `E_0^{g1 □ g2, phi}(eta)`.
    pub baseline: f64,
    /// `|baseline - total_risk|`.
    pub equality_gap: f64,
    /// Largest node gap of the same identity at every step `t`.
    pub dynamic_gap: f64,
    /// Per-node minimizer `z_hat` on the non-terminal layers.
    pub z_hat: Vec<Vec<f64>>,
    /// Per-node `z` of the inf-convolved solution.
    pub z3_hat: Vec<Vec<f64>>,
    pub hypothesis: HypothesisCheck,
    pub driver: Driver,
}

/// Build `xi*` from the solution of the inf-convolved equation for `eta`:
/// `z_hat` minimizes `g1(t, z3_hat - y) + g2(t, y)` at each node, and `xi*`
/// is the terminal value of `y_hat` with `y_hat_0 = 0` and
/// `dy_hat = -g2(t, z_hat) dt + z_hat dW`, so that the g2-solution with
/// terminal value `xi*` is `y_hat` itself.
pub fn optimal_transfer_construct(
    g1: &Driver,
    g2: &Driver,
    phi: &Constraint,
    eta: &Claim,
    lattice: &Lattice,
    config: &SolverConfig,
    opts: InfConvOptions,
) -> Result<TransferResult> {
    lattice.require_path_tree("the optimal transfer construction")?;
    lattice.check_claim(eta)?;
    let g3 = Driver::infconv(g1, g2, opts)?;
    let sol3 = solve_constrained(&g3, phi, eta, lattice, config)?;
    let n = lattice.num_steps();
    let dt = lattice.dt();
    let sq = lattice.sqrt_dt();

    let mut z_hat = Vec::with_capacity(n);
    let mut z3_hat = Vec::with_capacity(n);
    let mut max_share = 0.0f64;
    let mut max_remainder = 0.0f64;
    for step in 0..n {
        let t = lattice.time(step);
        let z3 = sol3.solution.z(step).to_vec();
        let zh = z3.iter().map(|&z| g3.infconv_argmin(t, z)).collect::<Result<Vec<_>>>()?;
        for (&a, &b) in z3.iter().zip(&zh) {
            max_share = max_share.max(phi.eval(t, b));
            max_remainder = max_remainder.max(phi.eval(t, a - b));
        }
        z_hat.push(zh);
        z3_hat.push(z3);
    }

    let mut y_hat = vec![0.0];
    for (step, zh) in z_hat.iter().enumerate() {
        let t = lattice.time(step);
        let mut next = vec![0.0; lattice.layer_len(step + 1)];
        for (k, (&y, &z)) in y_hat.iter().zip(zh).enumerate() {
            let (up, down) = lattice.children(k);
            let drift = y - g2.eval(t, z) * dt;
            next[up] = drift + z * sq;
            next[down] = drift - z * sq;
        }
        y_hat = next;
    }
    let allocation = Claim::from_values(lattice, y_hat)?;

    let first = solve_constrained(g1, phi, &eta.sub(&allocation)?, lattice, config)?;
    let second = solve_constrained(g2, phi, &allocation, lattice, config)?;
    let mut dynamic_gap = 0.0f64;
    for step in 0..=n {
        let a = sol3.solution.y(step);
        let b = first.solution.y(step);
        let c = second.solution.y(step);
        for k in 0..a.len() {
            dynamic_gap = dynamic_gap.max((a[k] - b[k] - c[k]).abs());
        }
    }
    let total_risk = first.y0() + second.y0();
    let baseline = sol3.y0();
    Ok(TransferResult {
        allocation,
        first_share: first.y0(),
        second_share: second.y0(),
        total_risk,
        baseline,
        equality_gap: (baseline - total_risk).abs(),
        dynamic_gap,
        z_hat,
        z3_hat,
        hypothesis: HypothesisCheck {
            max_phi_share: max_share,
            max_phi_remainder: max_remainder,
            tolerance: config.tol,
        },
        driver: g3,
    })
}

/// Reproducible bounded claims `a tanh(b W_T) + c 1{W_{T/2} > 0}` with
/// `a in [-2, 2]`, `b in [0.2, 2]`, `c in [-1, 1]`. On a recombining lattice
/// the indicator term is dropped (its coefficient is still drawn).
pub struct ClaimSampler {
    rng: ChaCha8Rng,
}

impl ClaimSampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn sample(&mut self, lattice: &Lattice) -> Result<Claim> {
        let a = self.rng.gen_range(-2.0..=2.0);
        let b = self.rng.gen_range(0.2..=2.0);
        let c = self.rng.gen_range(-1.0..=1.0);
        match lattice.layout() {
            Layout::PathTree => {
                let mid = lattice.num_steps() / 2;
                Claim::from_path(lattice, |p| {
                    let w = p[p.len() - 1];
                    a * (b * w).tanh() + if p[mid] > 0.0 { c } else { 0.0 }
                })
            }
            Layout::Recombining => Claim::from_terminal_w(lattice, |w| a * (b * w).tanh()),
        }
    }

    pub fn sample_many(&mut self, lattice: &Lattice, count: usize) -> Result<Vec<Claim>> {
        (0..count).map(|_| self.sample(lattice)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, build_recombining};

    fn rm(driver: Driver, constraint: Constraint, lattice: &Lattice) -> RiskMeasure {
        RiskMeasure::new(driver, constraint, lattice.clone(), SolverConfig::default()).unwrap()
    }

    #[test]
    fn constants_and_translation() {
        let l = build_lattice(6, 1.0).unwrap();
        let r = rm(Driver::quadratic(1.0).unwrap(), Constraint::z_band(0.5).unwrap(), &l);
        assert_eq!(r.rho(&Claim::constant(&l, 1.25).unwrap()).unwrap(), -1.25);
        let xi = ClaimSampler::new(3).sample(&l).unwrap();
        let base = r.rho(&xi).unwrap();
        let shifted = r.rho(&xi.shift(1.0).unwrap()).unwrap();
        assert!((shifted - (base - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn entropic_value_on_brownian_claim() {
        let l = build_recombining(64, 1.0).unwrap();
        let r = rm(Driver::quadratic(1.0).unwrap(), Constraint::none(), &l);
        let v = r.rho(&Claim::terminal_w(&l).unwrap()).unwrap();
        assert!((v - 0.5).abs() <= 0.02, "{v}");
    }

    #[test]
    fn dynamic_rho_boundaries() {
        let l = build_lattice(5, 1.0).unwrap();
        let r = rm(Driver::abs(0.4).unwrap(), Constraint::z_band(1.0).unwrap(), &l);
        let xi = ClaimSampler::new(11).sample(&l).unwrap();
        assert_eq!(r.dynamic_rho(&xi, 0).unwrap(), vec![r.rho(&xi).unwrap()]);
        assert_eq!(r.dynamic_rho(&xi, 5).unwrap(), xi.neg().values().to_vec());
        assert!(r.dynamic_rho(&xi, 6).is_err());
    }

    #[test]
    fn rejects_unnormalized_measures() {
        let l = build_lattice(3, 1.0).unwrap();
        let floor = Constraint::z_floor(1.0).unwrap();
        assert!(RiskMeasure::new(Driver::zero(), floor, l.clone(), SolverConfig::default()).is_err());
        let shifted = Driver::custom("shifted", |_, z| z * z + 1.0, 1.0, Default::default(), None);
        assert!(RiskMeasure::new(shifted, Constraint::none(), l, SolverConfig::default()).is_err());
    }

    #[test]
    fn linear_expectation_passes_every_axiom() {
        let l = build_lattice(6, 1.0).unwrap();
        let r = rm(Driver::zero(), Constraint::none(), &l);
        let claims = ClaimSampler::new(5).sample_many(&l, 4).unwrap();
        let report = axiom_suite(&r, &claims).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.get("homogeneity").unwrap().skipped.is_none());
    }

    #[test]
    fn quadratic_skips_homogeneity() {
        let l = build_lattice(5, 1.0).unwrap();
        let r = rm(Driver::quadratic(1.0).unwrap(), Constraint::none(), &l);
        let claims = ClaimSampler::new(9).sample_many(&l, 3).unwrap();
        let report = axiom_suite(&r, &claims).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.get("homogeneity").unwrap().skipped.is_some());
        assert!(report.get("convexity").unwrap().skipped.is_none());
    }

    #[test]
    fn proportional_optimum() {
        assert!((transfer_proportional_optimum(2.0, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(transfer_proportional_optimum(1.0, 1.0).unwrap(), 0.5);
        let mut prev = 1.0;
        for lam in [0.1, 1.0, 10.0, 1e3, 1e6] {
            let f = transfer_proportional_optimum(1.0, lam).unwrap();
            assert!(f < prev);
            prev = f;
        }
        assert!(prev < 1e-5);
        assert!(transfer_proportional_optimum(0.0, 1.0).is_err());
        assert!(transfer_proportional_optimum(1.0, -2.0).is_err());
    }

    #[test]
    fn alpha_grid_endpoints() {
        let g = alpha_grid(0.01).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 1.0);
        assert!(alpha_grid(0.0).is_err());
    }

    #[test]
    fn sweep_of_constant_claim_is_flat() {
        let l = build_lattice(4, 1.0).unwrap();
        let r = rm(Driver::quadratic(1.0).unwrap(), Constraint::none(), &l);
        let eta = Claim::constant(&l, 0.75).unwrap();
        let sweep = transfer_sweep(&r, &r, &eta, &alpha_grid(0.25).unwrap()).unwrap();
        for (_, total) in &sweep.curve {
            assert!((total + 0.75).abs() < 1e-15);
        }
        assert_eq!(sweep.best_alpha, 0.0);
    }

    #[test]
    fn identical_sublinear_agents_do_not_trade() {
        let l = build_lattice(6, 1.0).unwrap();
        let r = rm(Driver::abs(0.5).unwrap(), Constraint::none(), &l);
        let eta = ClaimSampler::new(1).sample(&l).unwrap();
        let sweep = transfer_sweep(&r, &r, &eta, &alpha_grid(0.1).unwrap()).unwrap();
        let at_zero = sweep.curve[0].1;
        assert_eq!(at_zero, r.rho(&eta).unwrap());
        assert_eq!(sweep.best_alpha, 0.0);
        for (_, total) in &sweep.curve {
            assert!(*total >= at_zero - 1e-12);
        }
    }

    #[test]
    fn construct_for_sublinear_pair_keeps_everything() {
        let l = build_lattice(6, 1.0).unwrap();
        let a = Driver::abs(0.5).unwrap();
        let eta = ClaimSampler::new(2).sample(&l).unwrap();
        let res = optimal_transfer_construct(&a, &a, &Constraint::none(), &eta, &l, &SolverConfig::default(), Default::default()).unwrap();
        assert!(res.z_hat.iter().flatten().all(|&z| z == 0.0));
        assert!(res.allocation.values().iter().all(|&v| v == 0.0));
        assert_eq!(res.total_risk, res.baseline);
    }

    #[test]
    fn construct_for_constant_claim() {
        let l = build_lattice(5, 1.0).unwrap();
        let eta = Claim::constant(&l, 0.4).unwrap();
        let res = optimal_transfer_construct(
            &Driver::quadratic(1.0).unwrap(),
            &Driver::quadratic(2.0).unwrap(),
            &Constraint::none(),
            &eta,
            &l,
            &SolverConfig::default(),
            Default::default(),
        )
        .unwrap();
        assert!(res.z3_hat.iter().flatten().all(|&z| z == 0.0));
        assert!(res.allocation.values().iter().all(|&v| v == 0.0));
        assert_eq!(res.baseline, 0.4);
        assert!(!res.hypothesis.violated());
    }

    #[test]
    fn construct_needs_a_path_tree() {
        let l = build_recombining(5, 1.0).unwrap();
        let q = Driver::quadratic(1.0).unwrap();
        let eta = Claim::terminal_w(&l).unwrap();
        let err = optimal_transfer_construct(&q, &q, &Constraint::none(), &eta, &l, &SolverConfig::default(), Default::default());
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }

    #[test]
    fn sampler_is_reproducible() {
        let l = build_lattice(6, 1.0).unwrap();
        let a = ClaimSampler::new(42).sample_many(&l, 3).unwrap();
        let b = ClaimSampler::new(42).sample_many(&l, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|c| c.bound() <= 3.0));
    }
}
