//! Numeric checks of the closed-form algebra behind the CHSH plus odd-cycle
//! construction, run over `m = 2..=max_m` (`n = 2m + 1`).
//!
//! Equalities pass when the largest absolute deviation is within
//! [`IDENTITY_TOL`]; inequalities pass when the smallest slack is strictly
//! positive.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cycle::{canonical_cycle, evaluate, VIOLATION_TOL};
use crate::error::{Error, Result};
use crate::scenarios::{
    build_theorem1, interleaved_locality_cycle, theorem1_closed_forms, theorem1_selectors, ChshCoefficients,
};

pub const IDENTITY_TOL: f64 = 1e-9;

/// Offset injected into one identity by the negative self-test.
pub const SELF_TEST_PERTURBATION: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `statistic` is the largest absolute deviation.
    Equality,
    /// `statistic` is the smallest slack of a strict inequality.
    StrictInequality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub kind: CheckKind,
    pub statistic: f64,
    pub tolerance: f64,
    pub cases: usize,
    pub passed: bool,
}

struct Accumulator {
    name: &'static str,
    kind: CheckKind,
    statistic: f64,
    cases: usize,
}

impl Accumulator {
    fn equality(name: &'static str) -> Self {
        Self {
            name,
            kind: CheckKind::Equality,
            statistic: 0.0,
            cases: 0,
        }
    }

    fn inequality(name: &'static str) -> Self {
        Self {
            name,
            kind: CheckKind::StrictInequality,
            statistic: f64::INFINITY,
            cases: 0,
        }
    }

    fn deviation(&mut self, lhs: f64, rhs: f64) {
        let d = (lhs - rhs).abs();
        // NaN must fail the check
        self.statistic = if d.is_nan() { f64::NAN } else { self.statistic.max(d) };
        self.cases += 1;
    }

    /// Records `greater > lesser`.
    fn greater(&mut self, greater: f64, lesser: f64) {
        let slack = greater - lesser;
        self.statistic = if slack.is_nan() {
            f64::NAN
        } else {
            self.statistic.min(slack)
        };
        self.cases += 1;
    }

    fn finish(self) -> IdentityCheck {
        let passed = match self.kind {
            CheckKind::Equality => self.statistic <= IDENTITY_TOL,
            CheckKind::StrictInequality => self.statistic > 0.0,
        };
        IdentityCheck {
            name: self.name.to_string(),
            kind: self.kind,
            statistic: self.statistic,
            tolerance: match self.kind {
                CheckKind::Equality => IDENTITY_TOL,
                CheckKind::StrictInequality => 0.0,
            },
            cases: self.cases,
            passed,
        }
    }
}

/// The auxiliary quantities `x_0`, `x_2` of the CHSH positivity argument.
fn x_pair(m: usize) -> (f64, f64) {
    let n = (2 * m + 1) as f64;
    let c = (PI / n).cos();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let half = (PI / (2.0 * n)).sin();
    let tail = (1.0 - c * c) * c;
    let x0 = (c * c + tail * (sign * 2.0 * half - 1.0).powi(2)).sqrt();
    let x2 = ((-2.0 * c + 1.0).powi(2) + tail * (sign * 2.0 * half + 1.0).powi(2)).sqrt();
    (x0, x2)
}

/// `8c⁴ + 10c³ - 3c² - 6c + 3 + (-1)^m·2√(2-2c)(c+1)(3c-1)`
pub fn positivity_polynomial(m: usize, c: f64) -> f64 {
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    quartic(c) + sign * 2.0 * (2.0 - 2.0 * c).sqrt() * (c + 1.0) * (3.0 * c - 1.0)
}

fn quartic(c: f64) -> f64 {
    8.0 * c.powi(4) + 10.0 * c.powi(3) - 3.0 * c * c - 6.0 * c + 3.0
}

/// The expanded four-term form of the CHSH expectation at arbitrary angles.
fn chsh_expansion(m: usize, omega0: f64, omega2: f64) -> f64 {
    let n = (2 * m + 1) as f64;
    let c = (PI / n).cos();
    let (sh, ch) = (PI / (2.0 * n)).sin_cos();
    let cm = (m as f64 * PI / n).cos();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let (s0, c0) = omega0.sin_cos();
    let (s2, c2) = omega2.sin_cos();
    let first = sh * sh * ((c0 + c2) * (4.0 * cm * cm / (1.0 + c) - 1.0) + (-c0 + c2) * (2.0 / (1.0 + c) - 1.0));
    let second = ch * ch * ((-c0 - c2) * (4.0 * c / (1.0 + c) - 1.0) + (c0 - c2) * (2.0 * c / (1.0 + c) - 1.0));
    let third = ch * sh * (s0 + s2) * (8.0 / (1.0 + c) * sign * c.sqrt() * cm);
    let fourth = ch * sh * (-s0 + s2) * (4.0 * c.sqrt() / (1.0 + c));
    first + second + third + fourth
}

/// Runs every identity for `m = 2..=max_m`. With `perturb`, the polynomial
/// identity for `x_0² + x_2²` is offset by [`SELF_TEST_PERTURBATION`] so the
/// harness can demonstrate a failing check.
pub fn run_identity_suite(max_m: usize, perturb: bool) -> Result<Vec<IdentityCheck>> {
    // both parities of m are needed for the positivity checks
    if max_m < 3 {
        return Err(Error::InvalidParameter(format!(
            "max_m must be at least 3, got {max_m}"
        )));
    }
    let mut kcbs_closed = Accumulator::equality("kcbs_closed_form");
    let mut kcbs_margin = Accumulator::equality("kcbs_margin_rational_form");
    let mut kcbs_lower = Accumulator::inequality("kcbs_margin_numerator_lower_bound");
    let mut taylor_low = Accumulator::inequality("taylor_lower");
    let mut taylor_high = Accumulator::inequality("taylor_upper");
    let mut half_angle = Accumulator::equality("half_angle_identities");
    let mut chsh_linear = Accumulator::equality("chsh_linear_form");
    let mut chsh_closed = Accumulator::equality("chsh_closed_form");
    let mut xcs_norms = Accumulator::equality("xcs_norms");
    let mut xcs_poly = Accumulator::equality("xcs_polynomial");
    let mut factorization = Accumulator::equality("complex_inequality_factorization");
    let mut f_even = Accumulator::inequality("f_positive_even_m");
    let mut f_odd = Accumulator::inequality("f_positive_odd_m");
    let mut violations = Accumulator::inequality("theorem1_margins_positive");

    // Fixed off-branch angles for the expansion check.
    let probe = (0.3, 1.7);

    for m in 2..=max_m {
        let n = 2 * m + 1;
        let nf = n as f64;
        let c = (PI / nf).cos();
        let half = (PI / (2.0 * nf)).sin();
        let scenario = build_theorem1(m)?;
        let k_report = scenario.kcbs_report(VIOLATION_TOL)?;
        let c_report = scenario.chsh_report(VIOLATION_TOL)?;
        let closed = theorem1_closed_forms(m)?;

        let k_weighted =
            half * half * (2.0 * nf / (1.0 + c) - nf) + (1.0 - half * half) * (4.0 * nf * c / (1.0 + c) - nf);
        kcbs_closed.deviation(k_report.total, closed.k);
        kcbs_closed.deviation(k_weighted, closed.k);

        let numerator = 2.0 * nf * c * c + (2.0 - nf) * c - nf + 2.0;
        kcbs_margin.deviation(k_report.total - (nf - 2.0), numerator / (1.0 + c));
        let pi2 = PI * PI;
        let bound = 4.0 - 3.0 * pi2 / (2.0 * nf) - pi2 / (nf * nf);
        kcbs_lower.greater(numerator, bound);
        kcbs_lower.greater(bound, 0.0);

        let taylor = 1.0 - pi2 / (2.0 * nf * nf);
        taylor_low.greater(c, taylor);
        taylor_high.greater(taylor + pi2 * pi2 / (24.0 * nf.powi(4)), c);

        let cm = (m as f64 * PI / nf).cos();
        half_angle.deviation(cm * cm, (1.0 - c) / 2.0);
        half_angle.deviation(cm, half);

        let co = ChshCoefficients::for_m(m)?;
        let (w0, w2) = scenario.angles;
        chsh_linear.deviation(c_report.total, co.linear_form(w0, w2));
        chsh_linear.deviation(c_report.total, chsh_expansion(m, w0, w2));
        let probe_cycle = interleaved_locality_cycle(&scenario.family, &[probe.0, probe.1], &theorem1_selectors(m))?;
        let probe_total = evaluate(&canonical_cycle(4)?, &probe_cycle, &scenario.state)?.total;
        chsh_linear.deviation(probe_total, co.linear_form(probe.0, probe.1));
        chsh_linear.deviation(probe_total, chsh_expansion(m, probe.0, probe.1));

        chsh_closed.deviation(c_report.total, closed.c);

        let (x0, x2) = x_pair(m);
        xcs_norms.deviation(co.c0.hypot(co.s0), 2.0 * x0 / (1.0 + c));
        xcs_norms.deviation(co.c2.hypot(co.s2), 2.0 * x2 / (1.0 + c));
        let offset = if perturb { SELF_TEST_PERTURBATION } else { 0.0 };
        xcs_poly.deviation(
            x0 * x0 + x2 * x2 + offset,
            4.0 * c.powi(4) - 6.0 * c.powi(3) + c * c + 2.0 * c + 1.0,
        );

        let f = positivity_polynomial(m, c);
        factorization.deviation(
            x0 * x0 * x2 * x2 - (3.0 * c.powi(3) - 2.0 * c.powi(4)).powi(2),
            c * (c - 1.0).powi(2) * f,
        );
        if m % 2 == 0 {
            // f > quartic(c) > quartic bound at cos(π/5) > 0
            let c5 = (PI / 5.0).cos();
            let floor = 8.0 * c5.powi(4) + 10.0 * c5.powi(3) - 3.0 - 6.0 + 3.0;
            f_even.greater(f, quartic(c));
            f_even.greater(quartic(c), floor);
            f_even.greater(floor, 0.0);
        } else {
            let c7 = (PI / 7.0).cos();
            let floor =
                8.0 * c7.powi(4) + 10.0 * c7.powi(3) - 3.0 - 6.0 + 3.0 - 2.0 * (2.0 - 2.0 * c7).sqrt() * 2.0 * 2.0;
            f_odd.greater(f, floor);
            f_odd.greater(floor, 0.0);
        }

        violations.greater(k_report.margin, 0.0);
        violations.greater(c_report.margin, 0.0);
    }

    Ok(vec![
        kcbs_closed.finish(),
        kcbs_margin.finish(),
        kcbs_lower.finish(),
        taylor_low.finish(),
        taylor_high.finish(),
        half_angle.finish(),
        chsh_linear.finish(),
        chsh_closed.finish(),
        xcs_norms.finish(),
        xcs_poly.finish(),
        factorization.finish(),
        f_even.finish(),
        f_odd.finish(),
        violations.finish(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_suite_passes() {
        let checks = run_identity_suite(50, false).unwrap();
        for check in &checks {
            assert!(check.passed, "{check:?}");
            assert!(check.cases > 0);
        }
        assert_eq!(checks.len(), 14);
    }

    #[test]
    fn perturbation_fails_exactly_one() {
        let checks = run_identity_suite(8, true).unwrap();
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        assert_eq!(failed, vec!["xcs_polynomial"]);
    }

    #[test]
    fn rejects_small_range() {
        assert!(run_identity_suite(2, false).is_err());
    }

    #[test]
    fn nan_fails_checks() {
        let mut eq = Accumulator::equality("x");
        eq.deviation(f64::NAN, 0.0);
        assert!(!eq.finish().passed);
        let mut ineq = Accumulator::inequality("y");
        ineq.greater(f64::NAN, 0.0);
        assert!(!ineq.finish().passed);
    }
}
