//! Quantum maxima for fixed observables, the see-saw joint-violation
//! search, and the n-sweep of the CHSH plus odd-cycle construction.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycle::{
    canonical_cycle, evaluate_with_tolerance, CycleExpression, EvaluationReport, ObservableCycle, VIOLATION_TOL,
};
use crate::error::{Error, Result};
use crate::kcbs::{C3Selector, KcbsFamily};
use crate::linalg::{expectation, hermitian_eigen, tensor, ComplexMatrix, PureState};
use crate::scenarios::{
    build_theorem1, interleaved_locality_cycle, theorem1_closed_forms, theorem1_selectors, theorem1_state,
    ChshCoefficients,
};
use crate::simplex::{nelder_mead, NelderMeadOptions};

/// `Σ coeffs[i]·X_i·X_{i+1}` as a single Hermitian matrix.
#[derive(Clone, Debug)]
pub struct BellOperator {
    matrix: ComplexMatrix,
}

impl BellOperator {
    pub fn new(expr: &CycleExpression, cycle: &ObservableCycle) -> Result<Self> {
        if expr.n() != cycle.n() {
            return Err(Error::DimensionMismatch {
                expected: expr.n(),
                found: cycle.n(),
            });
        }
        let mut matrix = ComplexMatrix::zeros(cycle.dim());
        for (i, &c) in expr.coeffs().iter().enumerate() {
            let term = cycle.adjacent_product(i);
            matrix = if c > 0 { &matrix + &term } else { &matrix - &term };
        }
        matrix.ensure_hermitian()?;
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

#[derive(Clone, Debug)]
pub struct QuantumMaximum {
    pub value: f64,
    pub optimizer: PureState,
}

/// Largest value of the cycle expression over all states for fixed
/// observables: the top eigenvalue for odd `n`, the larger extreme
/// eigenvalue modulus for even `n`.
pub fn quantum_max_fixed_observables(expr: &CycleExpression, cycle: &ObservableCycle) -> Result<QuantumMaximum> {
    let op = BellOperator::new(expr, cycle)?;
    let eigen = hermitian_eigen(op.matrix())?;
    let (top, top_vec) = eigen.max();
    let (bottom, bottom_vec) = eigen.min();
    let (value, optimizer) = if expr.is_even() && -bottom > top {
        (-bottom, bottom_vec)
    } else {
        (top, top_vec)
    };
    Ok(QuantumMaximum {
        value,
        optimizer: optimizer.clone(),
    })
}

/// Scalarization weights swept in the state step.
pub const SCALARIZATION_WEIGHTS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Top eigenvector of `w·sign·S_loc + (1-w)·S_nc` and its eigenvalue.
pub fn scalarized_state_step(
    locality: &ComplexMatrix,
    noncontextuality: &ComplexMatrix,
    weight: f64,
    sign: f64,
) -> Result<(PureState, f64)> {
    let op = &locality.scale(weight * sign) + &noncontextuality.scale(1.0 - weight);
    let eigen = hermitian_eigen(&op)?;
    let (value, vector) = eigen.max();
    Ok((vector.clone(), value))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Size of the odd noncontextuality cycle and of the `B_j` family.
    pub l: usize,
    /// Qutrit-side observables of the locality cycle, placed at odd
    /// positions between qubit rotations. `l` of them for the `2l`-cycle;
    /// two reproduce a CHSH cycle.
    pub selectors: Vec<C3Selector>,
    /// Starting rotation angles for seed 0; other seeds draw uniformly from
    /// `[0, 2π)`.
    pub initial_angles: Option<Vec<f64>>,
    /// Starting state for seed 0; other seeds draw a normalized complex
    /// Gaussian vector.
    pub initial_state: Option<PureState>,
    pub seeds: usize,
    pub seed_base: u64,
    pub max_rounds: usize,
    pub convergence_tol: f64,
    /// Threshold on margins used when flagging reports as violated.
    pub violation_tol: f64,
}

pub const DEFAULT_SEEDS: usize = 64;
pub const DEFAULT_MAX_ROUNDS: usize = 200;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-10;

impl SearchConfig {
    fn with_selectors(l: usize, selectors: Vec<C3Selector>) -> Self {
        Self {
            l,
            selectors,
            initial_angles: None,
            initial_state: None,
            seeds: DEFAULT_SEEDS,
            seed_base: 0,
            max_rounds: DEFAULT_MAX_ROUNDS,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            violation_tol: VIOLATION_TOL,
        }
    }

    /// The `2l`-locality versus `l`-noncontextuality problem with the given
    /// qutrit-side menu.
    pub fn open_problem(l: usize, selectors: Vec<C3Selector>) -> Self {
        Self::with_selectors(l, selectors)
    }

    /// Default menu for the `2l`-cycle: `B_1B_2, B_2B_3, …, B_{l-1}B_0, B_0`,
    /// extending the six-cycle choice `B_1B_2, B_2B_3, B_0`.
    pub fn default_menu(l: usize) -> Vec<C3Selector> {
        let mut menu: Vec<_> = (1..l).map(C3Selector::Product).collect();
        menu.push(C3Selector::Single(0));
        menu
    }

    /// CHSH against the `l`-cycle with the construction's qutrit observables
    /// `B_m B_{m+1}` and `B_0`, from random starts.
    pub fn chsh(l: usize) -> Self {
        Self::with_selectors(l, theorem1_selectors(l / 2).to_vec())
    }

    /// [`SearchConfig::chsh`] with seed 0 started at the construction's witness
    /// state and angles for `n = l`.
    pub fn regression_theorem1(l: usize) -> Result<Self> {
        if l < 5 || l % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "l must be odd and at least 5, got {l}"
            )));
        }
        let co = ChshCoefficients::for_m(l / 2)?;
        let mut config = Self::chsh(l);
        config.initial_angles = Some(vec![co.omega0(), co.omega2()]);
        config.initial_state = Some(theorem1_state(l));
        Ok(config)
    }

    pub fn locality_len(&self) -> usize {
        2 * self.selectors.len()
    }

    fn validate(&self) -> Result<()> {
        if self.l < 5 || self.l % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "l must be odd and at least 5, got {}",
                self.l
            )));
        }
        if self.selectors.len() < 2 {
            return Err(Error::InvalidParameter(
                "at least two qutrit-side selectors are required".into(),
            ));
        }
        if let Some(bad) = self.selectors.iter().find(|s| s.index() >= self.l) {
            return Err(Error::InvalidParameter(format!(
                "selector {} out of range for l = {}",
                bad.label(self.l),
                self.l
            )));
        }
        if let Some(angles) = &self.initial_angles {
            if angles.len() != self.selectors.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.selectors.len(),
                    found: angles.len(),
                });
            }
        }
        if let Some(state) = &self.initial_state {
            if state.dim() != 6 {
                return Err(Error::DimensionMismatch {
                    expected: 6,
                    found: state.dim(),
                });
            }
        }
        if self.seeds == 0 {
            return Err(Error::InvalidParameter("seeds must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of a search. A search that finds no joint violation within its
/// budget is evidence, not proof, that none exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    JointViolation,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::JointViolation => "joint violation found",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub l: usize,
    pub selectors: Vec<String>,
    pub best_state: PureState,
    pub best_angles: Vec<f64>,
    pub locality_report: EvaluationReport,
    pub noncontextuality_report: EvaluationReport,
    /// `min(locality margin, noncontextuality margin)`
    pub joint_margin: f64,
    /// `JointViolation` iff both reports are flagged violated.
    pub verdict: Verdict,
    pub rounds_used: usize,
    pub converged: bool,
    /// Index of the winning seed within the run.
    pub seed_index: usize,
    pub seeds_run: usize,
}

impl SearchResult {
    pub fn joint_violation(&self) -> bool {
        self.verdict == Verdict::JointViolation
    }
}

/// Evaluation context shared by all seeds.
struct SearchContext<'a> {
    config: &'a SearchConfig,
    family: KcbsFamily,
    nc_expr: CycleExpression,
    nc_cycle: ObservableCycle,
    nc_matrix: ComplexMatrix,
    loc_expr: CycleExpression,
    /// `(σ_z ⊗ S_j, σ_x ⊗ S_j)` per selector.
    correlators: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl<'a> SearchContext<'a> {
    fn new(config: &'a SearchConfig) -> Result<Self> {
        let family = KcbsFamily::build(config.l)?;
        let nc_expr = canonical_cycle(config.l)?;
        let nc_cycle = family.embedded_cycle(2)?;
        let nc_matrix = BellOperator::new(&nc_expr, &nc_cycle)?.matrix;
        let loc_expr = canonical_cycle(config.locality_len())?;
        let sigma_z = ComplexMatrix::diag(&[1.0, -1.0]);
        let sigma_x = ComplexMatrix::from_real(&[0.0, 1.0, 1.0, 0.0])?;
        let correlators = config
            .selectors
            .iter()
            .map(|&sel| {
                let s = family.select(sel);
                Ok((tensor(&sigma_z, s.matrix())?, tensor(&sigma_x, s.matrix())?))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            config,
            family,
            nc_expr,
            nc_cycle,
            nc_matrix,
            loc_expr,
            correlators,
        })
    }

    fn locality_cycle(&self, angles: &[f64]) -> Result<ObservableCycle> {
        interleaved_locality_cycle(&self.family, angles, &self.config.selectors)
    }

    fn noncontextuality_margin(&self, state: &PureState) -> Result<f64> {
        Ok(self.nc_expr.margin(expectation(state, &self.nc_matrix)?))
    }

    fn correlations(&self, state: &PureState) -> Result<Vec<(f64, f64)>> {
        self.correlators
            .iter()
            .map(|(z, x)| Ok((expectation(state, z)?, expectation(state, x)?)))
            .collect()
    }

    /// Locality total from precomputed correlations. `X_{2i} = R(ω_i)⊗I`
    /// and `X_{2i+1} = I⊗S_i`, and `R(ω)⊗S = cos ω σ_z⊗S + sin ω σ_x⊗S`.
    fn locality_total(&self, angles: &[f64], corr: &[(f64, f64)]) -> f64 {
        let k = angles.len();
        let pair = |r: usize, s: usize| {
            let (sin, cos) = angles[r].sin_cos();
            cos * corr[s].0 + sin * corr[s].1
        };
        let mut total = 0.0;
        for i in 0..k {
            total += pair(i, i);
            let next = pair((i + 1) % k, i);
            total += if i + 1 == k { -next } else { next };
        }
        total
    }

    fn locality_margin(&self, angles: &[f64], corr: &[(f64, f64)]) -> f64 {
        self.loc_expr.margin(self.locality_total(angles, corr))
    }

    fn objective(&self, state: &PureState, angles: &[f64]) -> Result<f64> {
        let corr = self.correlations(state)?;
        Ok(self
            .locality_margin(angles, &corr)
            .min(self.noncontextuality_margin(state)?))
    }

    fn run_seed(&self, index: usize) -> Result<SeedOutcome> {
        let config = self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed_base.wrapping_add(index as u64));
        let k = config.selectors.len();
        let mut angles = match (&config.initial_angles, index) {
            (Some(a), 0) => a.clone(),
            _ => (0..k).map(|_| rng.gen_range(0.0..2.0 * PI)).collect(),
        };
        let mut state = match (&config.initial_state, index) {
            (Some(s), 0) => s.clone(),
            _ => PureState::random(&mut rng, 6),
        };
        let mut best = self.objective(&state, &angles)?;
        let mut rounds = 0;
        let mut converged = false;

        let simplex = NelderMeadOptions {
            step: 0.3,
            max_iterations: 400 * k,
            ..Default::default()
        };

        while rounds < config.max_rounds {
            let previous = best;

            let loc_matrix = BellOperator::new(&self.loc_expr, &self.locality_cycle(&angles)?)?.matrix;
            for &w in &SCALARIZATION_WEIGHTS {
                for sign in [1.0, -1.0] {
                    let (candidate, _) = scalarized_state_step(&loc_matrix, &self.nc_matrix, w, sign)?;
                    let value = self.objective(&candidate, &angles)?;
                    if value > best {
                        best = value;
                        state = candidate;
                    }
                }
            }

            // The noncontextuality margin does not depend on the angles, so
            // raising the locality margin never lowers the joint objective.
            let corr = self.correlations(&state)?;
            let refined = nelder_mead(|a| -self.locality_margin(a, &corr), &angles, &simplex);
            let value = self
                .locality_margin(&refined.x, &corr)
                .min(self.noncontextuality_margin(&state)?);
            if value > best {
                best = value;
                angles = refined.x;
            }

            rounds += 1;
            if best - previous < config.convergence_tol {
                converged = true;
                break;
            }
        }

        Ok(SeedOutcome {
            index,
            state,
            angles,
            rounds,
            converged,
        })
    }

    fn finish(&self, outcome: SeedOutcome) -> Result<SearchResult> {
        let tol = self.config.violation_tol;
        let locality_report = evaluate_with_tolerance(
            &self.loc_expr,
            &self.locality_cycle(&outcome.angles)?,
            &outcome.state,
            tol,
        )?;
        let noncontextuality_report = evaluate_with_tolerance(&self.nc_expr, &self.nc_cycle, &outcome.state, tol)?;
        let verdict = if locality_report.violated && noncontextuality_report.violated {
            Verdict::JointViolation
        } else {
            Verdict::Inconclusive
        };
        Ok(SearchResult {
            l: self.config.l,
            selectors: self.config.selectors.iter().map(|s| s.label(self.config.l)).collect(),
            best_state: outcome.state,
            best_angles: outcome.angles,
            joint_margin: locality_report.margin.min(noncontextuality_report.margin),
            verdict,
            locality_report,
            noncontextuality_report,
            rounds_used: outcome.rounds,
            converged: outcome.converged,
            seed_index: outcome.index,
            seeds_run: self.config.seeds,
        })
    }
}

struct SeedOutcome {
    index: usize,
    state: PureState,
    angles: Vec<f64>,
    rounds: usize,
    converged: bool,
}

/// See-saw search for a state and qubit angles violating the locality cycle
/// and the `l`-noncontextuality cycle at once.
///
/// Each round takes the best top eigenvector of the scalarized operators
/// `w·(±S_loc) + (1-w)·S_nc` over [`SCALARIZATION_WEIGHTS`], then refines the
/// angles with Nelder-Mead. Moves are kept only if they raise
/// `min(locality margin, noncontextuality margin)`. Seeds run in parallel;
/// the best joint margin wins, ties going to the lowest seed index.
pub fn seesaw_search(config: &SearchConfig) -> Result<SearchResult> {
    config.validate()?;
    let ctx = SearchContext::new(config)?;
    let outcomes = (0..config.seeds)
        .into_par_iter()
        .map(|i| ctx.run_seed(i))
        .collect::<Result<Vec<_>>>()?;
    let results = outcomes
        .into_iter()
        .map(|o| ctx.finish(o))
        .collect::<Result<Vec<_>>>()?;
    let best = results
        .into_iter()
        .reduce(|best, next| {
            if next.joint_margin > best.joint_margin {
                next
            } else {
                best
            }
        })
        .expect("at least one seed");
    Ok(best)
}

/// Best CHSH settings found for a fixed state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub selectors: [String; 2],
    pub angles: [f64; 2],
    pub report: EvaluationReport,
}

/// Largest CHSH value `|⟨X_0X_1 + X_1X_2 + X_2X_3 - X_3X_0⟩|` a fixed state
/// reaches with `X_0, X_2` qubit rotations and `X_1, X_3` drawn from the
/// `{B_j} ∪ {B_jB_{j+1}}` menu of the `l`-family.
///
/// The total is `⟨R(ω_0)⊗(S_0 - S_1)⟩ + ⟨R(ω_1)⊗(S_0 + S_1)⟩`, and each
/// term is `cos ω·z + sin ω·x`, so for every selector pair the optimal
/// angles are exact and the maximum is `‖(z_-, x_-)‖ + ‖(z_+, x_+)‖`.
pub fn best_chsh_settings(state: &PureState, l: usize, tolerance: f64) -> Result<ChshSettings> {
    let menu: Vec<C3Selector> = (0..l)
        .flat_map(|j| [C3Selector::Single(j), C3Selector::Product(j)])
        .collect();
    let mut config = SearchConfig::open_problem(l, menu.clone());
    config.violation_tol = tolerance;
    config.validate()?;
    if state.dim() != 6 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            found: state.dim(),
        });
    }
    let ctx = SearchContext::new(&config)?;
    let corr = ctx.correlations(state)?;
    let mut best: Option<(f64, usize, usize, [f64; 2])> = None;
    for i in 0..menu.len() {
        for j in 0..menu.len() {
            let (z0, x0) = corr[i];
            let (z1, x1) = corr[j];
            let (zm, xm, zp, xp) = (z0 - z1, x0 - x1, z0 + z1, x0 + x1);
            let value = zm.hypot(xm) + zp.hypot(xp);
            if best.map_or(true, |b| value > b.0) {
                best = Some((value, i, j, [xm.atan2(zm), xp.atan2(zp)]));
            }
        }
    }
    let (_, i, j, angles) = best.expect("non-empty menu");
    let selectors = [menu[i], menu[j]];
    let cycle = interleaved_locality_cycle(&ctx.family, &angles, &selectors)?;
    let report = evaluate_with_tolerance(&canonical_cycle(4)?, &cycle, state, tolerance)?;
    Ok(ChshSettings {
        selectors: selectors.map(|s| s.label(l)),
        angles,
        report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figure1Row {
    pub n: usize,
    /// Numeric values from the tensor-product construction.
    pub k: f64,
    pub c: f64,
    pub k_over_n: f64,
    pub k_closed: f64,
    pub c_closed: f64,
    /// Trend against the previous row; absent on the first row.
    pub k_over_n_increasing: Option<bool>,
    pub c_decreasing: Option<bool>,
}

pub fn sweep_figure1(m_range: RangeInclusive<usize>) -> Result<Vec<Figure1Row>> {
    if *m_range.start() < 2 {
        return Err(Error::InvalidParameter(format!(
            "m must be at least 2, got {}",
            m_range.start()
        )));
    }
    let mut rows: Vec<Figure1Row> = Vec::new();
    for m in m_range {
        let scenario = build_theorem1(m)?;
        let closed = theorem1_closed_forms(m)?;
        let k = scenario.k();
        let c = scenario.c();
        let n = scenario.n;
        let k_over_n = k / n as f64;
        let (k_over_n_increasing, c_decreasing) = match rows.last() {
            Some(prev) => (Some(k_over_n > prev.k_over_n), Some(c < prev.c)),
            None => (None, None),
        };
        rows.push(Figure1Row {
            n,
            k,
            c,
            k_over_n,
            k_closed: closed.k,
            c_closed: closed.c,
            k_over_n_increasing,
            c_decreasing,
        });
    }
    Ok(rows)
}
