//! n-cycle correlation expressions, dichotomic observables, and the
//! classical (deterministic hidden-variable) bound.
//!
//! A cycle expression is `Σ_i coeffs[i]·⟨X_i X_{i+1}⟩` with indices taken
//! modulo `n`. For even `n` the quantity compared against the bound is the
//! absolute value of that sum, for odd `n` it is the signed sum.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator_norm, expectation, tensor, ComplexMatrix, PureState};

pub const MIN_CYCLE_LEN: usize = 4;

/// Largest `n` accepted by [`lhv_max`] (2^24 assignments).
pub const MAX_ENUMERATION_N: usize = 24;

/// Margin above which an [`EvaluationReport`] is flagged as violated.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Tolerance for `X² = I` on dichotomic observables.
pub const INVOLUTION_TOL: f64 = 1e-10;

/// Adjacent observables must commute to within this max-norm.
pub const COMMUTATION_TOL: f64 = 1e-10;

/// Coefficient pattern of an n-cycle expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct CycleExpression {
    coeffs: Vec<i8>,
}

impl CycleExpression {
    pub fn new(coeffs: Vec<i8>) -> Result<Self> {
        if coeffs.len() < MIN_CYCLE_LEN {
            return Err(Error::CycleTooShort {
                n: coeffs.len(),
                min: MIN_CYCLE_LEN,
            });
        }
        if let Some(bad) = coeffs.iter().find(|&&c| c != 1 && c != -1) {
            return Err(Error::InvalidParameter(format!(
                "cycle coefficient {bad} is not +1 or -1"
            )));
        }
        let negatives = coeffs.iter().filter(|&&c| c == -1).count();
        if negatives % 2 == 0 {
            return Err(Error::EvenNegativeCount { negatives });
        }
        Ok(Self { coeffs })
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[i8] {
        &self.coeffs
    }

    pub fn is_even(&self) -> bool {
        self.n() % 2 == 0
    }

    /// `n - 2`.
    pub fn classical_bound(&self) -> f64 {
        (self.n() - 2) as f64
    }

    /// The value compared against the bound: `|total|` for even `n`,
    /// `total` for odd `n`.
    pub fn signed_or_abs(&self, total: f64) -> f64 {
        if self.is_even() {
            total.abs()
        } else {
            total
        }
    }

    pub fn margin(&self, total: f64) -> f64 {
        self.signed_or_abs(total) - self.classical_bound()
    }

    /// `Σ coeffs[i]·a_i·a_{i+1}` for real values `a`.
    pub fn value_at(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.n());
        let n = self.n();
        (0..n)
            .map(|i| f64::from(self.coeffs[i]) * values[i] * values[(i + 1) % n])
            .sum()
    }
}

/// The pattern with a single `-1` on the wrap-around term `X_{n-1}X_0`.
pub fn canonical_cycle(n: usize) -> Result<CycleExpression> {
    if n < MIN_CYCLE_LEN {
        return Err(Error::CycleTooShort { n, min: MIN_CYCLE_LEN });
    }
    let mut coeffs = vec![1; n];
    coeffs[n - 1] = -1;
    CycleExpression::new(coeffs)
}

impl TryFrom<Vec<i8>> for CycleExpression {
    type Error = Error;

    fn try_from(coeffs: Vec<i8>) -> Result<Self> {
        Self::new(coeffs)
    }
}

impl From<CycleExpression> for Vec<i8> {
    fn from(expr: CycleExpression) -> Self {
        expr.coeffs
    }
}

/// Parses a string of `+` and `-` characters, e.g. `++++-`.
impl FromStr for CycleExpression {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .chars()
            .map(|ch| match ch {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::InvalidParameter(format!(
                    "pattern character {other:?} is not '+' or '-'"
                ))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Self::new(coeffs)
    }
}

impl fmt::Display for CycleExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.coeffs {
            f.write_str(if c > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// A Hermitian operator with `X² = I`, i.e. a ±1-valued observable.
#[derive(Clone, Debug, PartialEq)]
pub struct DichotomicObservable {
    matrix: ComplexMatrix,
}

impl DichotomicObservable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        matrix.ensure_hermitian()?;
        let square = &matrix * &matrix;
        let deviation = (&square - &ComplexMatrix::identity(matrix.dim())).max_norm();
        if deviation > INVOLUTION_TOL || deviation.is_nan() {
            return Err(Error::NotInvolution { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `I_{dim_first} ⊗ self`
    pub fn on_second_factor(&self, dim_first: usize) -> Result<Self> {
        Ok(Self {
            matrix: tensor(&ComplexMatrix::identity(dim_first), &self.matrix)?,
        })
    }

    /// `self ⊗ I_{dim_second}`
    pub fn on_first_factor(&self, dim_second: usize) -> Result<Self> {
        Ok(Self {
            matrix: tensor(&self.matrix, &ComplexMatrix::identity(dim_second))?,
        })
    }

    /// `U·X·U†`
    pub fn conjugated(&self, unitary: &ComplexMatrix) -> Result<Self> {
        let m = &unitary.try_mul(&self.matrix)? * &unitary.adjoint();
        Self::new(m)
    }
}

/// Product of two commuting dichotomic observables, itself dichotomic.
pub fn observable_product(a: &DichotomicObservable, b: &DichotomicObservable) -> Result<DichotomicObservable> {
    let norm = commutator_norm(a.matrix(), b.matrix())?;
    if norm > COMMUTATION_TOL {
        return Err(Error::NotCommuting {
            first: 0,
            second: 1,
            norm,
        });
    }
    DichotomicObservable::new(a.matrix() * b.matrix())
}

/// Observables `X_0..X_{n-1}` on a common space with `[X_i, X_{i+1}] = 0`
/// (indices mod `n`).
#[derive(Clone, Debug)]
pub struct ObservableCycle {
    observables: Vec<DichotomicObservable>,
}

impl ObservableCycle {
    pub fn new(observables: Vec<DichotomicObservable>) -> Result<Self> {
        let n = observables.len();
        if n < MIN_CYCLE_LEN {
            return Err(Error::CycleTooShort { n, min: MIN_CYCLE_LEN });
        }
        let dim = observables[0].dim();
        if let Some(bad) = observables.iter().find(|x| x.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        for i in 0..n {
            let j = (i + 1) % n;
            let norm = commutator_norm(observables[i].matrix(), observables[j].matrix())?;
            if norm > COMMUTATION_TOL {
                return Err(Error::NotCommuting {
                    first: i,
                    second: j,
                    norm,
                });
            }
        }
        Ok(Self { observables })
    }

    pub fn n(&self) -> usize {
        self.observables.len()
    }

    pub fn dim(&self) -> usize {
        self.observables[0].dim()
    }

    pub fn observables(&self) -> &[DichotomicObservable] {
        &self.observables
    }

    pub fn get(&self, i: usize) -> &DichotomicObservable {
        &self.observables[i % self.n()]
    }

    /// `X_i·X_{i+1 mod n}`
    pub fn adjacent_product(&self, i: usize) -> ComplexMatrix {
        self.get(i).matrix() * self.get(i + 1).matrix()
    }

    pub fn conjugated(&self, unitary: &ComplexMatrix) -> Result<Self> {
        let observables = self
            .observables
            .iter()
            .map(|x| x.conjugated(unitary))
            .collect::<Result<_>>()?;
        Self::new(observables)
    }
}

/// A deterministic ±1 assignment to the cycle's observables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LhvAssignment {
    values: Vec<i8>,
}

impl LhvAssignment {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidParameter("assignment entries must be +1 or -1".into()));
        }
        Ok(Self { values })
    }

    /// Bit `i` set means `α_i = -1`.
    pub fn from_mask(n: usize, mask: u32) -> Self {
        let values = (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
        Self { values }
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn value_under(&self, expr: &CycleExpression) -> f64 {
        let values: Vec<f64> = self.values.iter().map(|&v| f64::from(v)).collect();
        expr.value_at(&values)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n: usize,
    /// `coeffs[i]·⟨X_i X_{i+1}⟩`
    pub per_term: Vec<f64>,
    pub total: f64,
    pub classical_bound: f64,
    pub margin: f64,
    pub violated: bool,
}

impl EvaluationReport {
    fn from_terms(expr: &CycleExpression, per_term: Vec<f64>, tolerance: f64) -> Self {
        let total = per_term.iter().sum();
        let margin = expr.margin(total);
        Self {
            n: expr.n(),
            per_term,
            total,
            classical_bound: expr.classical_bound(),
            margin,
            violated: margin > tolerance,
        }
    }

    /// The quantity compared against the bound (`|total|` for even `n`).
    pub fn value(&self) -> f64 {
        if self.n % 2 == 0 {
            self.total.abs()
        } else {
            self.total
        }
    }
}

pub fn evaluate(expr: &CycleExpression, cycle: &ObservableCycle, state: &PureState) -> Result<EvaluationReport> {
    evaluate_with_tolerance(expr, cycle, state, VIOLATION_TOL)
}

pub fn evaluate_with_tolerance(
    expr: &CycleExpression,
    cycle: &ObservableCycle,
    state: &PureState,
    tolerance: f64,
) -> Result<EvaluationReport> {
    if expr.n() != cycle.n() {
        return Err(Error::DimensionMismatch {
            expected: expr.n(),
            found: cycle.n(),
        });
    }
    if cycle.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: cycle.dim(),
            found: state.dim(),
        });
    }
    let per_term = (0..expr.n())
        .map(|i| Ok(f64::from(expr.coeffs()[i]) * expectation(state, &cycle.adjacent_product(i))?))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluationReport::from_terms(expr, per_term, tolerance))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LhvMaximum {
    pub value: i64,
    /// Number of assignments attaining `value`.
    pub maximizers: u64,
    /// The maximizer with the smallest bit mask.
    pub example: LhvAssignment,
}

/// Maximum of the cycle expression over all `2^n` deterministic ±1
/// assignments.
pub fn lhv_max(expr: &CycleExpression) -> Result<f64> {
    Ok(lhv_enumerate(expr)?.value as f64)
}

/// Exhaustive enumeration behind [`lhv_max`].
///
/// With `d = mask ^ rot(mask)` marking the edges whose endpoints disagree,
/// the sum is `Σcoeffs - 2·Σ_{i∈d} coeffs[i]`, so each assignment costs two
/// popcounts.
pub fn lhv_enumerate(expr: &CycleExpression) -> Result<LhvMaximum> {
    let n = expr.n();
    if n > MAX_ENUMERATION_N {
        return Err(Error::EnumerationCap {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    let full: u32 = (1u32 << n) - 1;
    let negative_mask: u32 = expr
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c < 0)
        .fold(0, |acc, (i, _)| acc | 1 << i);
    let coeff_sum: i64 = expr.coeffs().iter().map(|&c| i64::from(c)).sum();

    let mut best = i64::MIN;
    let mut count = 0u64;
    let mut first = 0u32;
    for mask in 0..=full {
        // bit i of `rotated` is bit i+1 of mask
        let rotated = (mask >> 1) | ((mask & 1) << (n - 1));
        let disagree = mask ^ rotated;
        let pos = i64::from((disagree & !negative_mask).count_ones());
        let neg = i64::from((disagree & negative_mask).count_ones());
        let sum = coeff_sum - 2 * (pos - neg);
        let value = if expr.is_even() { sum.abs() } else { sum };
        if value > best {
            best = value;
            count = 1;
            first = mask;
        } else if value == best {
            count += 1;
        }
    }
    Ok(LhvMaximum {
        value: best,
        maximizers: count,
        example: LhvAssignment::from_mask(n, first),
    })
}
