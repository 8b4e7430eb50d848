//! The qutrit observables of the odd n-cycle noncontextuality scenario.
//!
//! `|ψ_j⟩ ∝ (cos jθ, sin jθ, √cos(π/n))` with `θ = (n-1)π/n`, and
//! `B_j = (-1)^j (2|ψ_j⟩⟨ψ_j| - I)`. Consecutive vectors are orthogonal, so
//! consecutive `B_j` commute.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cycle::{canonical_cycle, observable_product, CycleExpression, DichotomicObservable, ObservableCycle};
use crate::error::{Error, Result};
use crate::linalg::{commutator_norm, ComplexMatrix, PureState};

pub const ORTHOGONALITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct KcbsFamily {
    n: usize,
    psi: Vec<PureState>,
    b: Vec<DichotomicObservable>,
}

fn check_odd(n: usize) -> Result<()> {
    if n < 5 || n % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "odd-cycle size must be odd and at least 5, got {n}"
        )));
    }
    Ok(())
}

impl KcbsFamily {
    /// Builds `|ψ_j⟩` and `B_j` for `j = 0..n` and validates orthogonality,
    /// involution and adjacent commutation before returning.
    pub fn build(n: usize) -> Result<Self> {
        check_odd(n)?;
        let c = (PI / n as f64).cos();
        let norm = (1.0 + c).sqrt();
        let psi = (0..n)
            .map(|j| {
                let angle = (j * (n - 1)) as f64 * PI / n as f64;
                PureState::from_real(&[angle.cos() / norm, angle.sin() / norm, c.sqrt() / norm])
            })
            .collect::<Result<Vec<_>>>()?;

        let identity = ComplexMatrix::identity(3);
        let b = psi
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let sign = if j % 2 == 0 { 2.0 } else { -2.0 };
                let m = &p.projector().scale(sign) - &identity.scale(sign / 2.0);
                DichotomicObservable::new(m)
            })
            .collect::<Result<Vec<_>>>()?;

        for j in 0..n {
            let k = (j + 1) % n;
            let overlap = psi[j].inner(&psi[k]).norm();
            if overlap > ORTHOGONALITY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "|ψ_{j}⟩ and |ψ_{k}⟩ overlap by {overlap:e}"
                )));
            }
            let norm = commutator_norm(b[j].matrix(), b[k].matrix())?;
            if norm > crate::cycle::COMMUTATION_TOL {
                return Err(Error::NotCommuting {
                    first: j,
                    second: k,
                    norm,
                });
            }
        }
        Ok(Self { n, psi, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn psi(&self, j: usize) -> &PureState {
        &self.psi[j % self.n]
    }

    /// `B_{j mod n}`
    pub fn observable(&self, j: usize) -> &DichotomicObservable {
        &self.b[j % self.n]
    }

    pub fn observables(&self) -> &[DichotomicObservable] {
        &self.b
    }

    /// `B_j·B_{j+1}` (indices mod n).
    pub fn adjacent_product(&self, j: usize) -> DichotomicObservable {
        observable_product(self.observable(j), self.observable(j + 1)).expect("adjacent B_j commute by construction")
    }

    pub fn select(&self, selector: C3Selector) -> DichotomicObservable {
        match selector {
            C3Selector::Single(j) => self.observable(j).clone(),
            C3Selector::Product(j) => self.adjacent_product(j),
        }
    }

    /// The cycle `B_0, …, B_{n-1}` on `C³`.
    pub fn cycle(&self) -> ObservableCycle {
        ObservableCycle::new(self.b.clone()).expect("family invariants imply a valid cycle")
    }

    /// The cycle `I ⊗ B_j` on `C^dim_first ⊗ C³`.
    pub fn embedded_cycle(&self, dim_first: usize) -> Result<ObservableCycle> {
        let lifted = self
            .b
            .iter()
            .map(|b| b.on_second_factor(dim_first))
            .collect::<Result<Vec<_>>>()?;
        ObservableCycle::new(lifted)
    }

    /// `Σ_{j<n-1} B_j B_{j+1} - B_{n-1} B_0`
    pub fn bell_matrix(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(3);
        for j in 0..self.n {
            let term = self.observable(j).matrix() * self.observable(j + 1).matrix();
            out = if j + 1 == self.n { &out - &term } else { &out + &term };
        }
        out
    }

    pub fn expression(&self) -> CycleExpression {
        canonical_cycle(self.n).expect("n >= 5")
    }
}

/// A qutrit-side observable drawn from `{B_j} ∪ {B_j B_{j+1}}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum C3Selector {
    Single(usize),
    /// `B_j B_{j+1}`
    Product(usize),
}

impl C3Selector {
    /// `B2B3`-style label; products wrap modulo `n`.
    pub fn label(self, n: usize) -> String {
        match self {
            C3Selector::Single(j) => format!("B{j}"),
            C3Selector::Product(j) => format!("B{j}B{}", (j + 1) % n),
        }
    }

    pub fn index(self) -> usize {
        match self {
            C3Selector::Single(j) | C3Selector::Product(j) => j,
        }
    }

    /// Parses `B3` or `B2B3` for a family of size `n`. Products must pair
    /// cyclically adjacent indices, so `B4B0` is valid for `n = 5`.
    pub fn parse_for(s: &str, n: usize) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse observable selector {s:?}"));
        let index = |raw: &str| -> Result<usize> {
            let j: usize = raw.parse().map_err(|_| bad())?;
            if j >= n {
                return Err(Error::InvalidParameter(format!(
                    "selector {s:?} has index {j} out of range for n = {n}"
                )));
            }
            Ok(j)
        };
        let parts: Vec<&str> = s.trim().split(['B', 'b']).collect();
        match parts.as_slice() {
            ["", j] => Ok(C3Selector::Single(index(j)?)),
            ["", j, k] => {
                let (j, k) = (index(j)?, index(k)?);
                if k != (j + 1) % n {
                    return Err(Error::InvalidParameter(format!(
                        "selector {s:?} is not a product of adjacent observables for n = {n}"
                    )));
                }
                Ok(C3Selector::Product(j))
            }
            _ => Err(bad()),
        }
    }

    /// Comma-separated list, e.g. `B1B2,B2B3,B0`.
    pub fn parse_list(s: &str, n: usize) -> Result<Vec<Self>> {
        s.split(',').map(|part| Self::parse_for(part, n)).collect()
    }
}

/// `(0, 0, 1)` in `C³`.
pub fn reference_state() -> PureState {
    PureState::basis(3, 2)
}

/// `4n·cos(π/n)/(1+cos(π/n)) - n`, the value of the odd-cycle expression on
/// [`reference_state`].
pub fn odd_cycle_reference_value(n: usize) -> Result<f64> {
    check_odd(n)?;
    let nf = n as f64;
    let c = (PI / nf).cos();
    let value = 4.0 * nf * c / (1.0 + c) - nf;
    assert!(value > nf - 2.0, "reference value must exceed the classical bound");
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::evaluate;
    use crate::linalg::{expectation, hermitian_eigen};

    #[test]
    fn rejects_bad_sizes() {
        for n in [3, 4, 6, 10] {
            assert!(KcbsFamily::build(n).is_err());
            assert!(odd_cycle_reference_value(n).is_err());
        }
    }

    #[test]
    fn first_vector() {
        let fam = KcbsFamily::build(5).unwrap();
        let c = (PI / 5.0).cos();
        let want = [1.0, 0.0, c.sqrt()].map(|x| x / (1.0 + c).sqrt());
        for (got, want) in fam.psi(0).amplitudes().iter().zip(want) {
            assert!((got.re - want).abs() < 1e-15 && got.im == 0.0);
        }
        assert!(fam.psi(0).inner(fam.psi(1)).norm() < 1e-12);
    }

    #[test]
    fn wrap_around_commutes() {
        let fam = KcbsFamily::build(7).unwrap();
        assert!(commutator_norm(fam.observable(6).matrix(), fam.observable(0).matrix()).unwrap() < 1e-10);
    }

    #[test]
    fn non_adjacent_do_not_commute() {
        let fam = KcbsFamily::build(5).unwrap();
        let norm = commutator_norm(fam.observable(0).matrix(), fam.observable(2).matrix()).unwrap();
        assert!(norm > 0.1, "{norm}");
        assert!(observable_product(fam.observable(0), fam.observable(2)).is_err());
    }

    #[test]
    fn adjacent_product_is_dichotomic() {
        let fam = KcbsFamily::build(5).unwrap();
        let p = fam.adjacent_product(2);
        assert!(p.matrix().hermitian_deviation() < 1e-10);
        let sq = p.matrix() * p.matrix();
        assert!((&sq - &ComplexMatrix::identity(3)).max_norm() < 1e-10);
    }

    #[test]
    fn traces_and_spectra() {
        for n in [5, 7, 9] {
            let fam = KcbsFamily::build(n).unwrap();
            for j in 0..n {
                let b = fam.observable(j).matrix();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                assert!((b.trace().re + sign).abs() < 1e-12);
                let e = hermitian_eigen(b).unwrap();
                assert!(e.values.iter().all(|v| (v.abs() - 1.0).abs() < 1e-12));
                let det: f64 = e.values.iter().product();
                assert!((det.abs() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reference_value_closed_form() {
        // cos(π/5) = (1+√5)/4 gives 4√5 - 5.
        let five = odd_cycle_reference_value(5).unwrap();
        assert!((five - (4.0 * 5f64.sqrt() - 5.0)).abs() < 1e-12);
        assert!(five > 3.0);
        assert!(((PI / 5.0).cos() - (1.0 + 5f64.sqrt()) / 4.0).abs() < 1e-15);

        let large = odd_cycle_reference_value(1001).unwrap() / 1001.0;
        assert!((large - 1.0).abs() < 1e-4);
    }

    #[test]
    fn reference_state_matches_closed_form() {
        let state = reference_state();
        for n in [5, 7, 9, 11, 13] {
            let fam = KcbsFamily::build(n).unwrap();
            let report = evaluate(&fam.expression(), &fam.cycle(), &state).unwrap();
            let closed = odd_cycle_reference_value(n).unwrap();
            assert!((report.total - closed).abs() < 1e-10, "n={n}");
            let direct = expectation(&state, &fam.bell_matrix()).unwrap();
            assert!((direct - closed).abs() < 1e-10);
        }
        // 28c/(1+c) - 7 with c = cos(pi/7), evaluated separately
        let seven = odd_cycle_reference_value(7).unwrap();
        assert!((seven - 6.270668829576383).abs() < 1e-12, "{seven}");
    }

    #[test]
    fn bell_matrix_top_eigenvalue() {
        let fam = KcbsFamily::build(5).unwrap();
        let top = hermitian_eigen(&fam.bell_matrix()).unwrap().max().0;
        assert!(top >= 4.0 * 5f64.sqrt() - 5.0 - 1e-10);
    }

    #[test]
    fn lifted_observable_spectrum() {
        let fam = KcbsFamily::build(5).unwrap();
        let lifted = fam.observable(0).on_second_factor(2).unwrap();
        let e = hermitian_eigen(lifted.matrix()).unwrap();
        let minus = e.values.iter().filter(|v| (**v + 1.0).abs() < 1e-10).count();
        let plus = e.values.iter().filter(|v| (**v - 1.0).abs() < 1e-10).count();
        // 2|ψ⟩⟨ψ| - I has spectrum {+1, -1, -1}; doubled by I₂.
        assert_eq!((minus, plus), (4, 2));
    }

    #[test]
    fn selector_parsing() {
        let p = |s| C3Selector::parse_for(s, 5);
        assert_eq!(p("B0").unwrap(), C3Selector::Single(0));
        assert_eq!(p("B2B3").unwrap(), C3Selector::Product(2));
        assert_eq!(p("B4B0").unwrap(), C3Selector::Product(4));
        assert!(p("B1B3").is_err());
        assert!(p("B2B0").is_err());
        assert!(p("B5").is_err());
        assert!(p("X1").is_err());
        assert_eq!(C3Selector::Product(2).label(5), "B2B3");
        assert_eq!(C3Selector::Product(4).label(5), "B4B0");
        assert_eq!(
            C3Selector::parse_list("B1B2, B2B3,B0", 5).unwrap(),
            vec![C3Selector::Product(1), C3Selector::Product(2), C3Selector::Single(0)]
        );
    }
}
