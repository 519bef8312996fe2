//! Finite polytopic GPT fragments and LP-based joint measurability.
//!
//! A fragment lists extremal state vectors, effect vectors and the unit effect;
//! probabilities are Euclidean inner products `⟨e, ω⟩`.

pub mod io;
pub mod lp;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::feasibility::sign_of;
use crate::jointmeas::{bisect_eta, ThresholdResult};
use crate::FeasibilityStatus;

pub use lp::{LpProblem, LpSolution, LpStatus};

/// Slack allowed on probabilities and normalizations of fragment members.
pub const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GptFragment {
    vec_dim: usize,
    states: Vec<Vec<f64>>,
    effects: Vec<Vec<f64>>,
    unit: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `⟨e, ω⟩`.
pub fn gpt_prob(effect: &[f64], state: &[f64]) -> Result<f64> {
    if effect.len() != state.len() {
        return Err(domain(format!("effect has length {}, state has length {}", effect.len(), state.len())));
    }
    Ok(dot(effect, state))
}

impl GptFragment {
    /// Checks `⟨unit, ω⟩ = 1` and `⟨e, ω⟩ ∈ [0, 1]` over every listed pair.
    pub fn new(vec_dim: usize, states: Vec<Vec<f64>>, effects: Vec<Vec<f64>>, unit: Vec<f64>) -> Result<Self> {
        if vec_dim == 0 {
            return Err(domain("vec_dim must be positive"));
        }
        if states.is_empty() {
            return Err(domain("a fragment needs at least one state"));
        }
        for v in states.iter().chain(&effects).chain(std::iter::once(&unit)) {
            if v.len() != vec_dim {
                return Err(domain(format!("vector of length {} in a fragment of vec_dim {vec_dim}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(domain("fragment vectors must be finite"));
            }
        }
        let f = Self { vec_dim, states, effects, unit };
        f.validate()?;
        Ok(f)
    }

    fn validate(&self) -> Result<()> {
        for (s, w) in self.states.iter().enumerate() {
            let u = dot(&self.unit, w);
            if (u - 1.0).abs() > PROB_TOL {
                return Err(Error::Invariant(format!("unit effect gives {u} on state {s}")));
            }
            for (e, eff) in self.effects.iter().enumerate() {
                let p = dot(eff, w);
                if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) {
                    return Err(Error::Invariant(format!("effect {e} gives probability {p} on state {s}")));
                }
            }
        }
        Ok(())
    }

    pub fn vec_dim(&self) -> usize {
        self.vec_dim
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn effects(&self) -> &[Vec<f64>] {
        &self.effects
    }

    pub fn unit(&self) -> &[f64] {
        &self.unit
    }

    /// Probability of listed effect `e` on listed state `s`.
    pub fn probability(&self, e: usize, s: usize) -> Result<f64> {
        let eff = self.effects.get(e).ok_or_else(|| domain(format!("no effect {e}")))?;
        let st = self.states.get(s).ok_or_else(|| domain(format!("no state {s}")))?;
        let p = dot(eff, st);
        if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) {
            return Err(Error::Invariant(format!("probability {p} outside [0, 1]")));
        }
        Ok(p)
    }

    /// Dichotomic measurement `{e, unit − e}` from listed effect `e`.
    pub fn binary_measurement(&self, e: usize) -> Result<GptMeasurement> {
        let plus = self.effects.get(e).ok_or_else(|| domain(format!("no effect {e}")))?.clone();
        let minus = self.unit.iter().zip(&plus).map(|(u, p)| u - p).collect();
        GptMeasurement::new(self, plus, minus)
    }
}

/// Two effects labelled `+1` and `−1` that sum to the unit effect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GptMeasurement {
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl GptMeasurement {
    pub fn new(fragment: &GptFragment, plus: Vec<f64>, minus: Vec<f64>) -> Result<Self> {
        if plus.len() != fragment.vec_dim || minus.len() != fragment.vec_dim {
            return Err(domain("measurement effects do not match the fragment's vec_dim"));
        }
        let sum_defect = plus
            .iter()
            .zip(&minus)
            .zip(&fragment.unit)
            .map(|((p, m), u)| (p + m - u).abs())
            .fold(0.0, f64::max);
        if sum_defect > PROB_TOL {
            return Err(Error::Invariant(format!("measurement effects miss the unit by {sum_defect:e}")));
        }
        for (s, w) in fragment.states.iter().enumerate() {
            for e in [&plus, &minus] {
                let p = dot(e, w);
                if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) {
                    return Err(Error::Invariant(format!("measurement gives probability {p} on state {s}")));
                }
            }
        }
        Ok(Self { plus, minus })
    }

    pub fn plus(&self) -> &[f64] {
        &self.plus
    }

    pub fn minus(&self) -> &[f64] {
        &self.minus
    }

    /// `η e + (1 − η) unit/2` applied to both effects.
    pub fn smeared(&self, eta: f64, unit: &[f64]) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(domain(format!("unsharpness {eta} outside [0, 1]")));
        }
        let mix = |e: &[f64]| e.iter().zip(unit).map(|(v, u)| eta * v + (1.0 - eta) * 0.5 * u).collect();
        Ok(Self { plus: mix(&self.plus), minus: mix(&self.minus) })
    }
}

/// Classical `(d−1)`-simplex: basis-vector states and all `2^d` subset indicators as
/// effects (the vertices of the effect hypercube).
pub fn simplicial_gpt(d: usize) -> Result<GptFragment> {
    if d < 2 {
        return Err(domain(format!("simplicial GPT needs d >= 2, got {d}")));
    }
    let states = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let effects = (0..1usize << d)
        .map(|mask| (0..d).map(|j| ((mask >> j) & 1) as f64).collect())
        .collect();
    GptFragment::new(d, states, effects, vec![1.0; d])
}

/// Square state space: vertices `(±1, ±1, 1)`, unit `(0, 0, 1)`, and the six extremal
/// effects `0`, `u` and the four fiducial effects `(±½, 0, ½)`, `(0, ±½, ½)`.
pub fn gbit() -> GptFragment {
    let states = vec![vec![1., 1., 1.], vec![1., -1., 1.], vec![-1., 1., 1.], vec![-1., -1., 1.]];
    let effects = vec![
        vec![0., 0., 0.],
        vec![0., 0., 1.],
        vec![0.5, 0., 0.5],
        vec![-0.5, 0., 0.5],
        vec![0., 0.5, 0.5],
        vec![0., -0.5, 0.5],
    ];
    GptFragment::new(3, states, effects, vec![0., 0., 1.]).expect("gbit literal is valid")
}

/// The two fiducial measurements of [`gbit`], deterministic on every vertex.
pub fn gbit_fiducials() -> [GptMeasurement; 2] {
    let g = gbit();
    [
        GptMeasurement::new(&g, vec![0.5, 0., 0.5], vec![-0.5, 0., 0.5]).expect("fiducial 1"),
        GptMeasurement::new(&g, vec![0., 0.5, 0.5], vec![0., -0.5, 0.5]).expect("fiducial 2"),
    ]
}

fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Minimal tensor product: all Kronecker products of extremal states and effects.
pub fn min_tensor(f1: &GptFragment, f2: &GptFragment) -> Result<GptFragment> {
    let states = f1.states.iter().flat_map(|a| f2.states.iter().map(move |b| kron(a, b))).collect();
    let effects = f1.effects.iter().flat_map(|a| f2.effects.iter().map(move |b| kron(a, b))).collect();
    GptFragment::new(f1.vec_dim * f2.vec_dim, states, effects, kron(&f1.unit, &f2.unit))
}

#[derive(Debug, Clone, Serialize)]
pub struct GptJmOutcome {
    pub solution: LpSolution,
    /// Joint effect vectors indexed by sign tuple (bit `x` set iff `a_x = −1`).
    pub joint_effects: Option<Vec<Vec<f64>>>,
    /// Worst raw-constraint violation of `joint_effects`, checked independently of the LP.
    pub verification_residual: Option<f64>,
}

impl GptJmOutcome {
    pub fn is_feasible(&self) -> bool {
        self.solution.status == LpStatus::Feasible
    }
}

pub const MAX_GPT_SETTINGS: usize = 9;

/// LP feasibility of a joint measurement: `2^n` effect vectors with nonnegative
/// probability on every listed state, summing to the unit, with the given marginals.
///
/// Joint effects are free vectors `g_a = u_a − v_a` with `u_a, v_a ≥ 0`; positivity on
/// state `s` is `⟨g_a, ω_s⟩ − slack = 0`.
pub fn gpt_jm_feasible(fragment: &GptFragment, measurements: &[GptMeasurement]) -> Result<GptJmOutcome> {
    let n = measurements.len();
    if n == 0 || n > MAX_GPT_SETTINGS {
        return Err(domain(format!("need 1..={MAX_GPT_SETTINGS} measurements, got {n}")));
    }
    let dim = fragment.vec_dim;
    if measurements.iter().any(|m| m.plus.len() != dim) {
        return Err(domain("measurement dimension differs from the fragment"));
    }
    let count = 1usize << n;
    let states = fragment.states.len();
    let free = count * dim;
    let slack0 = 2 * free;
    let mut lp = LpProblem::new(2 * free + count * states);
    let u = |a: usize, k: usize| a * dim + k;
    let v = |a: usize, k: usize| free + a * dim + k;

    for k in 0..dim {
        let mut total = Vec::with_capacity(2 * count);
        for a in 0..count {
            total.push((u(a, k), 1.0));
            total.push((v(a, k), -1.0));
        }
        lp.add_eq_sparse(&total, fragment.unit[k])?;
        for (x, m) in measurements.iter().enumerate() {
            let mut terms = Vec::with_capacity(2 * count);
            for a in 0..count {
                let s = sign_of(a, x);
                terms.push((u(a, k), s));
                terms.push((v(a, k), -s));
            }
            lp.add_eq_sparse(&terms, m.plus[k] - m.minus[k])?;
        }
    }
    for a in 0..count {
        for (s, w) in fragment.states.iter().enumerate() {
            let mut terms: Vec<(usize, f64)> = Vec::with_capacity(2 * dim + 1);
            for (k, &wk) in w.iter().enumerate() {
                if wk != 0.0 {
                    terms.push((u(a, k), wk));
                    terms.push((v(a, k), -wk));
                }
            }
            terms.push((slack0 + a * states + s, -1.0));
            lp.add_eq_sparse(&terms, 0.0)?;
        }
    }

    let solution = lp::solve(&lp, 1e-9)?;
    if solution.status != LpStatus::Feasible {
        return Ok(GptJmOutcome { solution, joint_effects: None, verification_residual: None });
    }
    let joint: Vec<Vec<f64>> = (0..count)
        .map(|a| (0..dim).map(|k| solution.x[u(a, k)] - solution.x[v(a, k)]).collect())
        .collect();
    let residual = verify_joint(fragment, measurements, &joint);
    if residual > PROB_TOL {
        return Err(Error::Numeric(format!("LP point violates the joint-measurement constraints by {residual:e}")));
    }
    Ok(GptJmOutcome { solution, joint_effects: Some(joint), verification_residual: Some(residual) })
}

/// Worst violation of positivity, normalization and marginal constraints.
pub fn verify_joint(fragment: &GptFragment, measurements: &[GptMeasurement], joint: &[Vec<f64>]) -> f64 {
    let dim = fragment.vec_dim;
    let mut worst = 0.0f64;
    for g in joint {
        for w in &fragment.states {
            worst = worst.max(-dot(g, w));
        }
    }
    for k in 0..dim {
        let total: f64 = joint.iter().map(|g| g[k]).sum();
        worst = worst.max((total - fragment.unit[k]).abs());
        for (x, m) in measurements.iter().enumerate() {
            let plus: f64 = joint.iter().enumerate().filter(|(a, _)| sign_of(*a, x) > 0.0).map(|(_, g)| g[k]).sum();
            worst = worst.max((plus - m.plus[k]).abs());
        }
    }
    worst
}

/// Critical smearing `η` of `measurements` by bisection over `e → η e + (1−η) unit/2`.
pub fn gpt_jm_threshold(fragment: &GptFragment, measurements: &[GptMeasurement], tol_eta: f64) -> Result<ThresholdResult> {
    bisect_eta(tol_eta, |eta, _| {
        let smeared = measurements.iter().map(|m| m.smeared(eta, &fragment.unit)).collect::<Result<Vec<_>>>()?;
        let out = gpt_jm_feasible(fragment, &smeared)?;
        let status = if out.is_feasible() { FeasibilityStatus::Feasible } else { FeasibilityStatus::Infeasible };
        Ok((status, out.solution.pivots))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplicial_fragments() {
        let bit = simplicial_gpt(2).unwrap();
        assert_eq!(bit.states().len(), 2);
        assert_eq!(bit.effects().len(), 4);
        let trit = simplicial_gpt(3).unwrap();
        assert_eq!((trit.states().len(), trit.effects().len()), (3, 8));
        for e in 0..8 {
            for s in 0..3 {
                let p = trit.probability(e, s).unwrap();
                assert!(p == 0.0 || p == 1.0);
            }
        }
        assert!(simplicial_gpt(1).is_err());
    }

    #[test]
    fn gbit_vertex_evaluations() {
        let g = gbit();
        let [f1, f2] = gbit_fiducials();
        assert_eq!(gpt_prob(f1.plus(), &[1., 1., 1.]).unwrap(), 1.0);
        assert_eq!(gpt_prob(f2.minus(), &[1., -1., 1.]).unwrap(), 1.0);
        assert_eq!(gpt_prob(f1.plus(), &[-1., 1., 1.]).unwrap(), 0.0);
        for s in g.states() {
            assert_eq!(gpt_prob(g.unit(), s).unwrap(), 1.0);
            assert_eq!(gpt_prob(&[0., 0., 0.], s).unwrap(), 0.0);
        }
        assert!(gpt_prob(&[1., 0.], &[1., 0., 0.]).is_err());
    }

    #[test]
    fn invalid_fragments_are_rejected() {
        assert!(GptFragment::new(2, vec![vec![1., 0.]], vec![vec![2., 0.]], vec![1., 1.]).is_err());
        assert!(GptFragment::new(2, vec![vec![0.5, 0.]], vec![], vec![1., 1.]).is_err());
        let g = gbit();
        assert!(GptMeasurement::new(&g, vec![0.5, 0., 0.5], vec![0.5, 0., 0.5]).is_err());
    }

    #[test]
    fn minimal_tensor_products() {
        let bb = min_tensor(&simplicial_gpt(2).unwrap(), &simplicial_gpt(2).unwrap()).unwrap();
        assert_eq!(bb.states().len(), 4);
        let gg = min_tensor(&gbit(), &gbit()).unwrap();
        assert_eq!((gg.states().len(), gg.vec_dim()), (16, 9));
        let g = gbit();
        for (e1, e2) in [(2, 4), (3, 5), (1, 2)] {
            for (s1, s2) in [(0, 3), (1, 2)] {
                let joint = gpt_prob(&kron(&g.effects()[e1], &g.effects()[e2]), &kron(&g.states()[s1], &g.states()[s2])).unwrap();
                let prod = g.probability(e1, s1).unwrap() * g.probability(e2, s2).unwrap();
                assert!((joint - prod).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn classical_pairs_are_compatible() {
        let f = simplicial_gpt(3).unwrap();
        let ms = [f.binary_measurement(1).unwrap(), f.binary_measurement(6).unwrap()];
        let out = gpt_jm_feasible(&f, &ms).unwrap();
        assert!(out.is_feasible());
        assert!(out.verification_residual.unwrap() <= 1e-9);
    }

    #[test]
    fn gbit_fiducials_sharp_vs_smeared() {
        let g = gbit();
        let fid = gbit_fiducials();
        assert!(!gpt_jm_feasible(&g, &fid).unwrap().is_feasible());
        let smeared: Vec<_> = fid.iter().map(|m| m.smeared(0.4, g.unit()).unwrap()).collect();
        assert!(gpt_jm_feasible(&g, &smeared).unwrap().is_feasible());
    }

    #[test]
    fn thresholds() {
        let g = gbit();
        let r = gpt_jm_threshold(&g, &gbit_fiducials(), 1e-3).unwrap();
        assert!((r.eta_star - 0.5).abs() < 1e-3, "{r:?}");
        assert_eq!(gpt_jm_threshold(&g, &gbit_fiducials()[..1], 1e-3).unwrap().eta_star, 1.0);
        let bit = simplicial_gpt(2).unwrap();
        let ms = [bit.binary_measurement(1).unwrap(), bit.binary_measurement(2).unwrap()];
        assert_eq!(gpt_jm_threshold(&bit, &ms, 1e-3).unwrap().eta_star, 1.0);
    }
}
