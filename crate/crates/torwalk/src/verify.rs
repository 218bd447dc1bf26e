//! The `verify` report: analytic bounds plus two closed-form identities.

use serde::Serialize;
use torwalk_core::asymptotics::{check_lemma_bounds, constant_limit, limit_integral, LemmaGrid};
use torwalk_core::lattice::Torus;
use torwalk_core::rlrw::{exact_two_point_symmetric, DpOptions};
use torwalk_core::walklen::ScalingLimitF;
use torwalk_core::WalkLengthLaw;

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub instances: u64,
    pub detail: String,
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckLine>,
}

impl VerifyReport {
    pub fn text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("{tag} {} ({} instances): {}\n", c.name, c.instances, c.detail));
            if let Some(cx) = &c.counterexample {
                s.push_str(&format!("     counterexample: {cx}\n"));
            }
        }
        s.push_str(if self.passed { "all checks passed\n" } else { "some checks FAILED\n" });
        s
    }

    pub fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Quadrature of the limit integral with constant `F` against the Gamma-function form.
pub fn constant_f_check(dims: &[usize], tol: f64) -> Result<CheckLine> {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    let mut counterexample = None;
    for &d in dims {
        for xi in [0.25, 1.0, 2.0] {
            let q = limit_integral(ScalingLimitF::Constant(1.0), d, xi)?;
            let err = (q.value - constant_limit(1.0, d)).abs();
            if err > tol && counterexample.is_none() {
                counterexample = Some(format!("d={d} xi={xi}: |diff| = {err:e}"));
            }
            worst = worst.max(err);
            n += 1;
        }
    }
    Ok(CheckLine {
        name: "constant-F limit".into(),
        passed: counterexample.is_none(),
        instances: n,
        detail: format!("max |quadrature - closed form| = {worst:e} (tol {tol:e})"),
        counterexample,
    })
}

/// `Σ_x g(x) = E N + 1` on a torus, up to the truncation bound.
pub fn visit_identity_check(d: usize, l: usize, mean: f64) -> Result<CheckLine> {
    let torus = Torus::new(d, l)?;
    let law = WalkLengthLaw::geometric(mean)?;
    let field = exact_two_point_symmetric(&torus, &law, DpOptions::default())?;
    let resid = field.total() - (law.mean() + 1.0);
    let tol = field.truncation_bound + 1e-9 * field.total();
    let passed = resid.abs() <= tol;
    Ok(CheckLine {
        name: "visit-count identity".into(),
        passed,
        instances: 1,
        detail: format!("d={d} L={l} E N={mean}: sum g - (E N + 1) = {resid:e}, bound {tol:e}"),
        counterexample: (!passed).then(|| format!("residual {resid:e}")),
    })
}

pub fn run_verify() -> Result<VerifyReport> {
    let lemma = check_lemma_bounds(&LemmaGrid::default())?;
    let mut checks: Vec<CheckLine> = lemma
        .checks
        .into_iter()
        .map(|c| CheckLine {
            name: c.name.to_string(),
            passed: c.passed,
            instances: c.instances,
            detail: c.detail,
            counterexample: c.counterexample,
        })
        .collect();
    checks.push(constant_f_check(&[3, 4, 5, 6], 1e-9)?);
    checks.push(visit_identity_check(3, 9, 81.0)?);
    Ok(VerifyReport { passed: checks.iter().all(|c| c.passed), checks })
}
