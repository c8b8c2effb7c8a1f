//! The full property suite behind `gbsde verify`: risk-measure axioms plus
//! solver-level properties (comparison, dilatation, monotone penalization)
//! and spot checks of the declared driver and constraint structure.

use rayon::prelude::*;

use crate::drivers::Driver;
use crate::error::Result;
use crate::lattice::Claim;
use crate::risk::{axiom_suite, ClaimSampler, PropertyCheck, PropertyReport, RiskMeasure};
use crate::solver::{solve_constrained, solve_penalized};

pub const DILATATION_FACTORS: [f64; 3] = [0.5, 2.0, 5.0];

/// Largest node gap `|lam E_t^{g,phi}(xi / lam) - E_t^{g_lam,phi}(xi)|` over
/// every step and every factor in `lams`.
pub fn dilatation_gap(rm: &RiskMeasure, xi: &Claim, lams: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &lam in lams {
        let scaled = rm.expectation(&xi.scale(1.0 / lam)?)?;
        let dilated = rm.dilate(lam)?.expectation(xi)?;
        for step in 0..=rm.lattice().num_steps() {
            for (a, b) in scaled.solution.y(step).iter().zip(dilated.solution.y(step)) {
                worst = worst.max((lam * a - b).abs());
            }
        }
    }
    Ok(worst)
}

/// Largest node excess `E_t^{g2,phi}(xi) - E_t^{g1,phi}(eta)` for `eta >= xi`
/// and `g1 >= g2`; zero when comparison holds.
pub fn comparison_violation(rm: &RiskMeasure, larger: &Driver, xi: &Claim, eta: &Claim) -> Result<f64> {
    let small = rm.expectation(xi)?;
    let big = solve_constrained(larger, rm.constraint(), eta, rm.lattice(), rm.config())?;
    let mut worst = 0.0f64;
    for step in 0..=rm.lattice().num_steps() {
        for (a, b) in small.solution.y(step).iter().zip(big.solution.y(step)) {
            worst = worst.max(a - b);
        }
    }
    Ok(worst)
}

/// Largest node decrease between penalized solutions at `m0, 2 m0, 4 m0, 8 m0`.
pub fn penalization_decrease(rm: &RiskMeasure, xi: &Claim) -> Result<f64> {
    let mut prev: Option<Vec<Vec<f64>>> = None;
    let mut worst = 0.0f64;
    let mut m = rm.config().m0;
    for _ in 0..4 {
        let sol = solve_penalized(rm.driver(), rm.constraint(), m, xi, rm.lattice())?;
        let layers: Vec<Vec<f64>> = (0..=rm.lattice().num_steps()).map(|s| sol.y(s).to_vec()).collect();
        if let Some(p) = &prev {
            for (a, b) in p.iter().flatten().zip(layers.iter().flatten()) {
                worst = worst.max(a - b);
            }
        }
        prev = Some(layers);
        m *= 2.0;
    }
    Ok(worst)
}

/// Run every property on `samples` reproducible claims drawn from `seed`.
pub fn run_property_suite(rm: &RiskMeasure, samples: usize, seed: u64) -> Result<PropertyReport> {
    let samples = samples.max(2);
    let tol = rm.config().tol;
    let claims = ClaimSampler::new(seed).sample_many(rm.lattice(), samples)?;
    let mut report = axiom_suite(rm, &claims)?;

    let larger = rm.driver().plus(&Driver::abs(0.1)?);
    let comparison = (0..samples)
        .into_par_iter()
        .map(|i| {
            let xi = &claims[i];
            let eta = xi.zip_with(&claims[(i + 1) % samples], f64::max)?;
            comparison_violation(rm, &larger, xi, &eta)
        })
        .collect::<Result<Vec<_>>>()?;
    report.checks.push(PropertyCheck::new("comparison", comparison.into_iter().fold(0.0, f64::max), 2.0 * tol));

    report.checks.push(if rm.constraint().flags().positively_homogeneous {
        let gaps = claims
            .par_iter()
            .map(|xi| dilatation_gap(rm, xi, &DILATATION_FACTORS))
            .collect::<Result<Vec<_>>>()?;
        PropertyCheck::new("dilatation", gaps.into_iter().fold(0.0, f64::max), 1e-10)
    } else {
        PropertyCheck::skipped("dilatation", "constraint not positively homogeneous")
    });

    let decreases = claims
        .par_iter()
        .map(|xi| penalization_decrease(rm, xi))
        .collect::<Result<Vec<_>>>()?;
    report.checks.push(PropertyCheck::new(
        "monotone_penalization",
        decreases.into_iter().fold(0.0, f64::max),
        0.0,
    ));

    let driver_fails = rm.driver().spot_check().failures(1e-9);
    report.checks.push(PropertyCheck::new("driver_flags", driver_fails.len() as f64, 0.0));
    let constraint_fails = rm.constraint().spot_check().failures(1e-12);
    report.checks.push(PropertyCheck::new("constraint_flags", constraint_fails.len() as f64, 0.0));
    Ok(report)
}
