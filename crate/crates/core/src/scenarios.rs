//! Concrete joint-violation constructions on `C² ⊗ C³`.
//!
//! Basis ordering is first-factor major: index `3·a + b` for `e_a ⊗ e_b`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::cycle::{
    canonical_cycle, evaluate_with_tolerance, DichotomicObservable, EvaluationReport, ObservableCycle, VIOLATION_TOL,
};
use crate::error::{Error, Result};
use crate::kcbs::{C3Selector, KcbsFamily};
use crate::linalg::{ComplexMatrix, PureState};

/// `[[cos ω, sin ω], [sin ω, -cos ω]]`
pub fn rotation_observable(omega: f64) -> DichotomicObservable {
    let (s, c) = omega.sin_cos();
    let m = ComplexMatrix::from_real(&[c, s, s, -c]).expect("finite angle");
    DichotomicObservable::new(m).expect("reflection matrices are dichotomic")
}

/// The even cycle `R(ω_0)⊗I, I⊗S_0, R(ω_1)⊗I, I⊗S_1, …` on `C² ⊗ C³`.
///
/// Neighbours always act on different factors, so adjacency commutation
/// holds for any angles and selectors.
pub fn interleaved_locality_cycle(
    family: &KcbsFamily,
    angles: &[f64],
    selectors: &[C3Selector],
) -> Result<ObservableCycle> {
    if angles.len() != selectors.len() {
        return Err(Error::DimensionMismatch {
            expected: selectors.len(),
            found: angles.len(),
        });
    }
    let mut observables = Vec::with_capacity(2 * angles.len());
    for (&omega, &sel) in angles.iter().zip(selectors) {
        observables.push(rotation_observable(omega).on_first_factor(3)?);
        observables.push(family.select(sel).on_second_factor(2)?);
    }
    ObservableCycle::new(observables)
}

/// `c_0, s_0, c_2, s_2` of the CHSH plus odd-cycle construction, with the angles
/// taken on the branch where `c_i cos ω_i + s_i sin ω_i = +√(c_i² + s_i²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChshCoefficients {
    pub c0: f64,
    pub s0: f64,
    pub c2: f64,
    pub s2: f64,
}

impl ChshCoefficients {
    pub fn for_m(m: usize) -> Result<Self> {
        check_m(m)?;
        let n = (2 * m + 1) as f64;
        let c = (PI / n).cos();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let half = (PI / (2.0 * n)).sin();
        let common = (PI / n).sin() * 2.0 * c.sqrt() / (1.0 + c);
        Ok(Self {
            c0: -2.0 * c / (1.0 + c),
            s0: common * (sign * 2.0 * half - 1.0),
            c2: (-4.0 * c + 2.0) / (1.0 + c),
            s2: common * (sign * 2.0 * half + 1.0),
        })
    }

    /// Two-argument angle of `(c_0, s_0)`.
    pub fn omega0(&self) -> f64 {
        self.s0.atan2(self.c0)
    }

    pub fn omega2(&self) -> f64 {
        self.s2.atan2(self.c2)
    }

    /// `c_0 cos ω_0 + s_0 sin ω_0 + c_2 cos ω_2 + s_2 sin ω_2` at arbitrary
    /// angles.
    pub fn linear_form(&self, omega0: f64, omega2: f64) -> f64 {
        self.c0 * omega0.cos() + self.s0 * omega0.sin() + self.c2 * omega2.cos() + self.s2 * omega2.sin()
    }

    /// `√(c_0² + s_0²) + √(c_2² + s_2²)`
    pub fn closed_value(&self) -> f64 {
        self.c0.hypot(self.s0) + self.c2.hypot(self.s2)
    }
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("m must be at least 2, got {m}")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Theorem1Scenario {
    pub m: usize,
    pub n: usize,
    pub state: PureState,
    pub family: KcbsFamily,
    /// `I ⊗ B_j`, `j = 0..n`.
    pub noncontextuality_cycle: ObservableCycle,
    /// `X_0..X_3`.
    pub chsh_cycle: ObservableCycle,
    /// `(ω_0, ω_2)`
    pub angles: (f64, f64),
    pub coefficients: ChshCoefficients,
}

/// The state `sin(π/2n) e_0⊗e_0 + cos(π/2n) e_1⊗e_2`.
pub fn theorem1_state(n: usize) -> PureState {
    let half = PI / (2 * n) as f64;
    let mut amps = [0.0; 6];
    amps[0] = half.sin();
    amps[5] = half.cos();
    PureState::from_real(&amps).expect("unit vector")
}

/// CHSH selectors of the construction: `B_m B_{m+1}` then `B_0`.
pub fn theorem1_selectors(m: usize) -> [C3Selector; 2] {
    [C3Selector::Product(m), C3Selector::Single(0)]
}

pub fn build_theorem1(m: usize) -> Result<Theorem1Scenario> {
    check_m(m)?;
    let n = 2 * m + 1;
    let family = KcbsFamily::build(n)?;
    let coefficients = ChshCoefficients::for_m(m)?;
    let angles = (coefficients.omega0(), coefficients.omega2());
    let chsh_cycle = interleaved_locality_cycle(&family, &[angles.0, angles.1], &theorem1_selectors(m))?;
    let noncontextuality_cycle = family.embedded_cycle(2)?;
    Ok(Theorem1Scenario {
        m,
        n,
        state: theorem1_state(n),
        family,
        noncontextuality_cycle,
        chsh_cycle,
        angles,
        coefficients,
    })
}

impl Theorem1Scenario {
    /// `K`: the n-cycle noncontextuality expression on the scenario state.
    pub fn kcbs_report(&self, tolerance: f64) -> Result<EvaluationReport> {
        evaluate_with_tolerance(
            &canonical_cycle(self.n)?,
            &self.noncontextuality_cycle,
            &self.state,
            tolerance,
        )
    }

    /// `C`: the CHSH expression on the scenario state.
    pub fn chsh_report(&self, tolerance: f64) -> Result<EvaluationReport> {
        evaluate_with_tolerance(&canonical_cycle(4)?, &self.chsh_cycle, &self.state, tolerance)
    }

    pub fn k(&self) -> f64 {
        self.kcbs_report(VIOLATION_TOL).expect("scenario is well-formed").total
    }

    pub fn c(&self) -> f64 {
        self.chsh_report(VIOLATION_TOL)
            .expect("scenario is well-formed")
            .value()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedForms {
    pub k: f64,
    pub c: f64,
}

/// `K = n(1-c)/(1+c) + 2nc - n` with `c = cos(π/n)`, and
/// `C = √(c_0²+s_0²) + √(c_2²+s_2²)`.
pub fn theorem1_closed_forms(m: usize) -> Result<ClosedForms> {
    check_m(m)?;
    let n = (2 * m + 1) as f64;
    let c = (PI / n).cos();
    let k = n * (1.0 - c) / (1.0 + c) + 2.0 * n * c - n;
    let chsh = ChshCoefficients::for_m(m)?.closed_value();
    Ok(ClosedForms { k, c: chsh })
}

/// Angles of the rotation observables `X_0, X_2, X_4` in the six-cycle.
pub const SIXCYCLE_ANGLES: [f64; 3] = [0.0, 5.0 * PI / 3.0, 3.0 * PI / 2.0];

pub const SIXCYCLE_SELECTORS: [C3Selector; 3] = [C3Selector::Product(1), C3Selector::Product(2), C3Selector::Single(0)];

#[derive(Clone, Debug)]
pub struct SixCycleScenario {
    pub state: PureState,
    pub family: KcbsFamily,
    /// `I ⊗ B_j` for the five-cycle noncontextuality expression.
    pub kcbs_cycle: ObservableCycle,
    /// `X_0..X_5`.
    pub locality_cycle: ObservableCycle,
}

/// `½ e_0⊗e_0 + (√3/4) e_0⊗e_2 + ¾ e_1⊗e_2`
pub fn sixcycle_state() -> PureState {
    PureState::from_real(&[0.5, 0.0, 3f64.sqrt() / 4.0, 0.0, 0.0, 0.75]).expect("unit vector")
}

pub fn build_sixcycle() -> Result<SixCycleScenario> {
    let family = KcbsFamily::build(5)?;
    let kcbs_cycle = family.embedded_cycle(2)?;
    let locality_cycle = interleaved_locality_cycle(&family, &SIXCYCLE_ANGLES, &SIXCYCLE_SELECTORS)?;
    Ok(SixCycleScenario {
        state: sixcycle_state(),
        family,
        kcbs_cycle,
        locality_cycle,
    })
}

impl SixCycleScenario {
    pub fn kcbs_report(&self, tolerance: f64) -> Result<EvaluationReport> {
        evaluate_with_tolerance(&canonical_cycle(5)?, &self.kcbs_cycle, &self.state, tolerance)
    }

    pub fn locality_report(&self, tolerance: f64) -> Result<EvaluationReport> {
        evaluate_with_tolerance(&canonical_cycle(6)?, &self.locality_cycle, &self.state, tolerance)
    }
}

/// `(5/2)(√5 - 1)`
pub fn sixcycle_kcbs_closed() -> f64 {
    2.5 * (5f64.sqrt() - 1.0)
}

/// Exact signed value of the six-cycle locality expression.
pub fn sixcycle_locality_closed() -> f64 {
    let r3 = 3f64.sqrt();
    let r5 = 5f64.sqrt();
    let r15 = 15f64.sqrt();
    (-36.0 * r15 - 117.0 * r5 + 60.0 * r3 + 125.0) / 80.0 + (r5 + 1.0).sqrt() / 2.0 * ((-r15 - 3.0 * r5) / 5.0)
}

pub const XUE_FIRST_ANGLE: f64 = 2.868;
pub const XUE_SECOND_ANGLE: f64 = 1.449;

#[derive(Clone, Debug)]
pub struct XueState {
    pub theta: f64,
    pub state: PureState,
}

/// `cos θ (cos a, sin a)⊗e_2 + sin θ (cos b, sin b)⊗e_0` with the fixed
/// angles `a = 2.868`, `b = 1.449`.
pub fn build_xue_state(theta: f64) -> Result<XueState> {
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = XUE_FIRST_ANGLE.sin_cos();
    let (sb, cb) = XUE_SECOND_ANGLE.sin_cos();
    let mut amps = [0.0; 6];
    amps[2] = ct * ca;
    amps[5] = ct * sa;
    amps[0] = st * cb;
    amps[3] = st * sb;
    Ok(XueState {
        theta,
        state: PureState::from_real(&amps)?,
    })
}

impl XueState {
    /// Five-cycle noncontextuality expression on `I ⊗ B_j`.
    pub fn kcbs_report(&self, tolerance: f64) -> Result<EvaluationReport> {
        let family = KcbsFamily::build(5)?;
        evaluate_with_tolerance(&canonical_cycle(5)?, &family.embedded_cycle(2)?, &self.state, tolerance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::evaluate;
    use crate::linalg::schmidt_spectrum;

    const TABLE1: [(usize, f64, f64); 5] = [
        (2, 3.6180, 2.0886),
        (3, 5.9782, 2.0133),
        (4, 8.1943, 2.0113),
        (5, 10.3362, 2.0034),
        (6, 12.4362, 2.0027),
    ];

    #[test]
    fn table1_values() {
        for (m, k, c) in TABLE1 {
            let s = build_theorem1(m).unwrap();
            assert!((s.k() - k).abs() < 5e-5, "m={m} K={}", s.k());
            assert!((s.c() - c).abs() < 5e-5, "m={m} C={}", s.c());
        }
    }

    #[test]
    fn closed_forms_match_numeric() {
        for m in 2..=8 {
            let s = build_theorem1(m).unwrap();
            let closed = theorem1_closed_forms(m).unwrap();
            assert!((s.k() - closed.k).abs() < 1e-9);
            assert!((s.c() - closed.c).abs() < 1e-9);
            assert!(closed.k > (s.n - 2) as f64 && closed.c > 2.0);
        }
        let five = theorem1_closed_forms(2).unwrap();
        assert!((five.k - 3.6180).abs() < 5e-5);
    }

    #[test]
    fn chsh_total_is_positive_on_two_argument_branch() {
        // The principal arctan branch flips the sign; the magnitude survives.
        let s = build_theorem1(2).unwrap();
        let report = s.chsh_report(VIOLATION_TOL).unwrap();
        assert!(report.total > 0.0);
        let co = s.coefficients;
        let flipped = co.linear_form((co.s0 / co.c0).atan(), (co.s2 / co.c2).atan());
        assert!((flipped + report.total).abs() < 1e-12);
    }

    #[test]
    fn theorem1_rejects_small_m() {
        assert!(build_theorem1(1).is_err());
        assert!(theorem1_closed_forms(0).is_err());
    }

    #[test]
    fn theorem1_state_is_entangled() {
        for m in [2, 5, 20] {
            let s = build_theorem1(m).unwrap();
            let spectrum = schmidt_spectrum(&s.state, 2, 3).unwrap();
            assert!(spectrum.iter().all(|&p| p > 1e-6), "{spectrum:?}");
        }
    }

    #[test]
    fn sixcycle_values() {
        let s = build_sixcycle().unwrap();
        let kcbs = s.kcbs_report(VIOLATION_TOL).unwrap();
        let loc = s.locality_report(VIOLATION_TOL).unwrap();
        assert!((kcbs.total - sixcycle_kcbs_closed()).abs() < 1e-9);
        assert!((loc.total - sixcycle_locality_closed()).abs() < 1e-9);
        assert!((loc.total.abs() - 4.055).abs() < 1e-3);
        assert!(kcbs.violated && loc.violated);
        assert_eq!((kcbs.per_term.len(), loc.per_term.len()), (5, 6));
    }

    #[test]
    fn sixcycle_state_layout() {
        let amps: Vec<f64> = sixcycle_state().amplitudes().iter().map(|z| z.re).collect();
        assert_eq!(amps, vec![0.5, 0.0, 3f64.sqrt() / 4.0, 0.0, 0.0, 0.75]);
    }

    #[test]
    fn xue_reduces_at_zero() {
        let x = build_xue_state(0.0).unwrap();
        let a = PureState::from_real(&[XUE_FIRST_ANGLE.cos(), XUE_FIRST_ANGLE.sin()]).unwrap();
        let want = a.product(&PureState::basis(3, 2));
        assert_eq!(x.state, want);
    }

    #[test]
    fn xue_kcbs_side() {
        for theta in [0.351, 0.421, 0.487] {
            let r = build_xue_state(theta).unwrap().kcbs_report(VIOLATION_TOL).unwrap();
            assert!(r.total > 3.0, "θ={theta}: {}", r.total);
        }
        let c = (PI / 5.0).cos();
        let r = build_xue_state(PI / 2.0).unwrap().kcbs_report(VIOLATION_TOL).unwrap();
        let want = 2.0 / (1.0 + c) * 5.0 - 5.0;
        assert!((r.total - want).abs() < 1e-12);
        assert!(r.total < 3.0);
    }

    #[test]
    fn interleaved_cycle_checks_lengths() {
        let fam = KcbsFamily::build(5).unwrap();
        assert!(interleaved_locality_cycle(&fam, &[0.0], &SIXCYCLE_SELECTORS).is_err());
    }

    #[test]
    fn noncontextuality_side_ignores_first_factor() {
        // K depends only on the reduced qutrit state, so rotating the qubit
        // part of a product state changes nothing.
        let fam = KcbsFamily::build(5).unwrap();
        let cycle = fam.embedded_cycle(2).unwrap();
        let expr = canonical_cycle(5).unwrap();
        let a = evaluate(&expr, &cycle, &PureState::basis(2, 0).product(&PureState::basis(3, 2))).unwrap();
        let b = evaluate(&expr, &cycle, &PureState::basis(2, 1).product(&PureState::basis(3, 2))).unwrap();
        assert!((a.total - b.total).abs() < 1e-12);
    }
}
