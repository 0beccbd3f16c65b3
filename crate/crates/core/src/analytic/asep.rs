//! Average symbol error probability of the S1 direction for MPSK,
//! `(a√b / 2√π) ∫₀^∞ e^{-bγ} γ^{-1/2} F(γ) dγ` with `F` the bounded-SINR cdf.
//!
//! Writing `F = 1 - S` and inserting the finite-sum survival, each term is
//! `γ^{e} e^{-pγ} Π_i (γ+α_i)^{-N_i}`; partial fractions split the pole
//! product and every piece integrates to `Γ(s) α^{s-j} Ψ(s, s+1-j, qα)`.

use std::collections::HashMap;

use super::scenario_a::{cdf_scenario_a, cdf_scenario_a_decoupled};
use super::{factorial_table, SecondaryCdfInputs};
use crate::error::{Error, Result};
use crate::model::ModulationSpec;
use crate::num::{pow_ln, CompensatedSum, Real};
use crate::quadrature::{integrate_semi_infinite, QuadratureSpec};
use crate::specfun::{ln_laplace_pole_integral, partial_fractions, Pole, PoleSet, PartialFractionTerm};

/// Why the closed form was replaced by quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FallbackReason {
    /// Two pole locations coincide within the separation threshold.
    NearDegeneratePoles,
    /// Partial-fraction cancellation would exceed the accuracy budget.
    IllConditioned,
    /// A Tricomi evaluation failed.
    SpecialFunction,
}

/// Evaluation route taken by an ASEP computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AsepPath {
    ClosedForm,
    Quadrature(FallbackReason),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsepEvaluation<T> {
    pub value: T,
    pub path: AsepPath,
}

impl<T> AsepEvaluation<T> {
    pub fn is_fallback(&self) -> bool {
        matches!(self.path, AsepPath::Quadrature(_))
    }
}

/// Accuracy budget for the closed form before falling back to quadrature.
const CLOSED_FORM_BUDGET: f64 = 1e-8;
/// Relative accuracy assumed for each Tricomi evaluation.
const TRICOMI_ACCURACY: f64 = 1e-12;

/// One survival term `exp(ln_coef) γ^{power} Π_i (γ+α_i)^{-mult_i}`.
struct RationalTerm<T> {
    ln_coef: T,
    power: usize,
    mult: Vec<usize>,
}

/// ASEP of the S1 direction with the exact bounded-SINR cdf.
///
/// Uses the Tricomi-function closed form unless the poles nearly coincide
/// or the estimated cancellation error exceeds the accuracy budget, in which
/// case the kernel integral is evaluated by quadrature and the route flagged.
pub fn asep_scenario_a<T: Real>(
    inputs: &SecondaryCdfInputs<T>,
    modulation: &ModulationSpec<T>,
) -> Result<AsepEvaluation<T>> {
    inputs.validate()?;
    check_modulation(modulation)?;
    if inputs.relay == T::zero() {
        return Ok(saturated(modulation));
    }
    let (poles, terms, p) = joint_terms(inputs);
    evaluate(inputs, modulation, &poles, &terms, p, cdf_scenario_a)
}

/// The Tricomi-function closed form of [`asep_scenario_a`], never routed to
/// quadrature; fails on coincident poles.
pub fn asep_scenario_a_closed_form<T: Real>(
    inputs: &SecondaryCdfInputs<T>,
    modulation: &ModulationSpec<T>,
) -> Result<ClosedFormAsep<T>> {
    inputs.validate()?;
    check_modulation(modulation)?;
    if inputs.relay == T::zero() {
        return Ok(ClosedFormAsep {
            value: saturated(modulation).value,
            condition: T::one(),
        });
    }
    let (poles, terms, p) = joint_terms(inputs);
    let (value, condition) = closed_form(modulation, &poles, &terms, p)?;
    Ok(ClosedFormAsep { value, condition })
}

/// Raw closed-form value with its cancellation factor `Σ|terms| / |ASEP|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormAsep<T> {
    pub value: T,
    pub condition: T,
}

/// Poles, survival terms and exponential rate of the joint S1 survival.
fn joint_terms<T: Real>(inputs: &SecondaryCdfInputs<T>) -> (Vec<T>, Vec<RationalTerm<T>>, T) {
    let lf = factorial_table(&[&inputs.x, &inputs.w, &inputs.y, &inputs.z]);
    let (law_y, law_z) = (inputs.law_y(), inputs.law_z());
    let ap = inputs.x.rate() / inputs.relay;
    let bp = inputs.w.rate() / inputs.relay;
    let c0 = inputs.power_ratio() + T::one();
    let poles = vec![law_y.rate / ap, law_z.rate / (ap + bp)];
    let (my, mz) = (law_y.shape, law_z.shape);
    let mut terms = Vec::new();
    for n in 0..inputs.x.m as usize {
        for i1 in 0..=n {
            for i2 in 0..=(n - i1) {
                for k in 0..inputs.w.m as usize {
                    for k1 in 0..=k {
                        let ln_coef = pow_ln(ap, n) + pow_ln(bp, k) - lf.get(n) - lf.get(k)
                            + lf.ln_binomial(n, i1)
                            + lf.ln_binomial(n - i1, i2)
                            + lf.ln_binomial(k, k1)
                            + pow_ln(c0, n - i1 - i2)
                            + lf.ln_rising(my, i1)
                            + T::of_usize(my) * law_y.rate.ln()
                            - T::of_usize(my + i1) * ap.ln()
                            + lf.ln_rising(mz, i2 + k1)
                            + T::of_usize(mz) * law_z.rate.ln()
                            - T::of_usize(mz + i2 + k1) * (ap + bp).ln();
                        terms.push(RationalTerm {
                            ln_coef,
                            power: n + k,
                            mult: vec![my + i1, mz + i2 + k1],
                        });
                    }
                }
            }
        }
    }
    (poles, terms, ap * c0 + bp)
}

/// ASEP of the S1 direction using the product approximation `1 - χ₁χ₂`,
/// whose survival carries three distinct pole families.
pub fn asep_scenario_a_decoupled<T: Real>(
    inputs: &SecondaryCdfInputs<T>,
    modulation: &ModulationSpec<T>,
) -> Result<AsepEvaluation<T>> {
    inputs.validate()?;
    check_modulation(modulation)?;
    if inputs.relay == T::zero() {
        return Ok(saturated(modulation));
    }
    let lf = factorial_table(&[&inputs.x, &inputs.w, &inputs.y, &inputs.z]);
    let (law_y, law_z) = (inputs.law_y(), inputs.law_z());
    let ap = inputs.x.rate() / inputs.relay;
    let bp = inputs.w.rate() / inputs.relay;
    let c0 = inputs.power_ratio() + T::one();
    // α₁ (second hop), α₂ (first-hop interference), α₃ (relay interference)
    let poles = vec![law_z.rate / bp, law_z.rate / ap, law_y.rate / ap];
    let (my, mz) = (law_y.shape, law_z.shape);
    let ln_lz = T::of_usize(mz) * law_z.rate.ln();
    let mut terms = Vec::new();
    for n in 0..inputs.x.m as usize {
        for i1 in 0..=n {
            for i2 in 0..=(n - i1) {
                let chi1 = pow_ln(ap, n) - lf.get(n)
                    + lf.ln_binomial(n, i1)
                    + lf.ln_binomial(n - i1, i2)
                    + pow_ln(c0, n - i1 - i2)
                    + lf.ln_rising(my, i1)
                    + T::of_usize(my) * law_y.rate.ln()
                    - T::of_usize(my + i1) * ap.ln()
                    + lf.ln_rising(mz, i2)
                    + ln_lz
                    - T::of_usize(mz + i2) * ap.ln();
                for k in 0..inputs.w.m as usize {
                    for k1 in 0..=k {
                        let chi2 = pow_ln(bp, k) - lf.get(k) + lf.ln_binomial(k, k1) + lf.ln_rising(mz, k1)
                            + ln_lz
                            - T::of_usize(mz + k1) * bp.ln();
                        terms.push(RationalTerm {
                            ln_coef: chi1 + chi2,
                            power: n + k,
                            mult: vec![mz + k1, mz + i2, my + i1],
                        });
                    }
                }
            }
        }
    }
    evaluate(inputs, modulation, &poles, &terms, ap * c0 + bp, cdf_scenario_a_decoupled)
}

fn check_modulation<T: Real>(m: &ModulationSpec<T>) -> Result<()> {
    if !(m.a > T::zero()) || !(m.b > T::zero()) || !m.a.is_finite() {
        return Err(Error::InvalidModel("modulation constants a, b must be positive".into()));
    }
    Ok(())
}

fn saturated<T: Real>(m: &ModulationSpec<T>) -> AsepEvaluation<T> {
    AsepEvaluation {
        value: m.a * T::of(0.5),
        path: AsepPath::ClosedForm,
    }
}

fn evaluate<T: Real>(
    inputs: &SecondaryCdfInputs<T>,
    modulation: &ModulationSpec<T>,
    poles: &[T],
    terms: &[RationalTerm<T>],
    p: T,
    cdf: fn(&SecondaryCdfInputs<T>) -> Result<T>,
) -> Result<AsepEvaluation<T>> {
    let reason = match closed_form(modulation, poles, terms, p) {
        Ok((value, condition)) => {
            let budget = T::of(TRICOMI_ACCURACY).max(T::epsilon() * T::of(64.0)) * condition;
            if budget <= T::of(CLOSED_FORM_BUDGET) {
                return Ok(AsepEvaluation {
                    value: clamp_asep(value, modulation)?,
                    path: AsepPath::ClosedForm,
                });
            }
            FallbackReason::IllConditioned
        }
        Err(Error::NearDegeneratePoles { .. }) => FallbackReason::NearDegeneratePoles,
        Err(_) => FallbackReason::SpecialFunction,
    };
    let value = asep_quadrature(inputs, modulation, cdf)?;
    Ok(AsepEvaluation {
        value: clamp_asep(value, modulation)?,
        path: AsepPath::Quadrature(reason),
    })
}

/// Returns the ASEP and the cancellation factor `Σ|terms| / |ASEP|`.
fn closed_form<T: Real>(
    modulation: &ModulationSpec<T>,
    poles: &[T],
    terms: &[RationalTerm<T>],
    p: T,
) -> Result<(T, T)> {
    let pole_set = |mult: &[usize]| {
        PoleSet::new(
            poles
                .iter()
                .zip(mult)
                .map(|(&location, &multiplicity)| Pole { location, multiplicity })
                .collect(),
        )
    };
    pole_set(&vec![1; poles.len()])?.check_separation()?;
    let q = modulation.b + p;
    let half = T::of(0.5);
    let mut expansions: HashMap<Vec<usize>, Vec<PartialFractionTerm<T>>> = HashMap::new();
    let mut integrals: HashMap<(usize, usize, usize), T> = HashMap::new();
    let mut sum = CompensatedSum::new();
    let mut magnitude = CompensatedSum::new();
    for term in terms {
        if !expansions.contains_key(&term.mult) {
            expansions.insert(term.mult.clone(), partial_fractions(&pole_set(&term.mult)?)?);
        }
        let s = T::of_usize(term.power) + half;
        for pf in &expansions[&term.mult] {
            if pf.coefficient == T::zero() {
                continue;
            }
            let key = (term.power, pf.pole, pf.order);
            let ln_int = match integrals.get(&key) {
                Some(&v) => v,
                None => {
                    let v = ln_laplace_pole_integral(s, q, poles[pf.pole], pf.order)?;
                    integrals.insert(key, v);
                    v
                }
            };
            let mag = (term.ln_coef + pf.coefficient.abs().ln() + ln_int).exp();
            magnitude.add(mag);
            sum.add(if pf.coefficient < T::zero() { -mag } else { mag });
        }
    }
    let scale = modulation.a * modulation.b.sqrt() / (T::of(2.0) * T::PI().sqrt());
    let value = modulation.a * half - scale * sum.value();
    let condition = scale * magnitude.value() / value.abs().max(T::min_positive_value());
    Ok((value, condition.max(T::one())))
}

fn clamp_asep<T: Real>(value: T, modulation: &ModulationSpec<T>) -> Result<T> {
    let top = modulation.a * T::of(0.5);
    let tol = T::of(1e-9) * top;
    if value.is_nan() || value < -tol || value > top + tol {
        return Err(Error::NumericalInstability {
            context: "ASEP",
            value: value.to_f64_lossy(),
        });
    }
    Ok(value.max(T::zero()).min(top))
}

/// `(a√b/√π) ∫₀^∞ e^{-b u²} F(u²) du`, the kernel integral after `γ = u²`.
fn asep_quadrature<T: Real>(
    inputs: &SecondaryCdfInputs<T>,
    modulation: &ModulationSpec<T>,
    cdf: fn(&SecondaryCdfInputs<T>) -> Result<T>,
) -> Result<T> {
    let spec = QuadratureSpec::with_relative_tolerance(T::of(1e-10).max(T::epsilon() * T::of(256.0)));
    let b = modulation.b;
    let mut failure = None;
    let f = |u: T| {
        let g = u * u;
        let w = (-b * g).exp();
        if w == T::zero() {
            return T::zero();
        }
        match cdf(&inputs.with_threshold(g)) {
            Ok(v) => w * v,
            Err(e) => {
                failure.get_or_insert(e);
                T::zero()
            }
        }
    };
    // cdf varies where aΘ(γ̄_R/γ̄_S + 1) ~ 1; the kernel on u ~ 1/√b
    let knee = (inputs.relay / (inputs.x.rate().max(inputs.w.rate()) * (inputs.power_ratio() + T::one()))).sqrt();
    let mut breaks = vec![T::zero(), knee * T::of(0.1), knee, b.sqrt().recip()];
    breaks.sort_by(|x, y| x.partial_cmp(y).expect("finite break"));
    let integral = integrate_semi_infinite(f, &breaks, &spec)?.value;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(modulation.a * b.sqrt() / T::PI().sqrt() * integral)
}
