//! Single-relay network with PT interference at both sources.
//!
//! The bounded SINR at S1 is `γ̄_R min(X/(Z+Y+c₀), W/(Z+1))` with
//! `c₀ = γ̄_R/γ̄_S + 1`; at S2 the roles `x ↔ w`, `z ↔ v` are exchanged.
//! Both branches of the S1 bound share the interference `Z`, and both
//! directions share `Y`. The `*_decoupled` variants factor the expectation
//! as if those shared variables were independent copies, which is the
//! classical product approximation; the undecorated functions are the exact
//! cdfs of the bounded SINR.

use super::polyexp::{ExpPoly, LinearForm};
use super::{complement, factorial_table, LogSum, SecondaryCdfInputs};
use crate::error::Result;
use crate::num::{pow_ln, Real};
use crate::specfun::LnFactorials;

/// Per-call constants of the S1 direction.
struct Setup<T> {
    lf: LnFactorials<T>,
    /// `m_x Θ / (γ̄_x γ̄_R)`.
    a: T,
    /// `m_w Θ / (γ̄_w γ̄_R)`.
    b: T,
    /// `γ̄_R / γ̄_S`.
    r: T,
    c0: T,
}

impl<T: Real> Setup<T> {
    fn new(i: &SecondaryCdfInputs<T>) -> Self {
        let r = i.power_ratio();
        Self {
            lf: factorial_table(&[&i.x, &i.w, &i.y, &i.z, &i.v]),
            a: i.x.rate() * i.threshold / i.relay,
            b: i.w.rate() * i.threshold / i.relay,
            r,
            c0: r + T::one(),
        }
    }
}

/// `Pr{γ^up_S1 ≥ Θ} = E[Q_X(a(Z+Y+c₀)) Q_W(b(Z+1))]` with `Z` shared.
fn survival_s1<T: Real>(i: &SecondaryCdfInputs<T>) -> T {
    let s = Setup::new(i);
    let (law_y, law_z) = (i.law_y(), i.law_z());
    let lf = &s.lf;
    let (ln_a, ln_b) = (s.a.ln(), s.b.ln());
    let mut sum = LogSum::new();
    let prefactor = -s.a * s.c0 - s.b;
    for n in 0..i.x.m as usize {
        for i1 in 0..=n {
            let m_y = law_y.ln_moment(i1, s.a, lf);
            for i2 in 0..=(n - i1) {
                let head = prefactor + T::of_usize(n) * ln_a - lf.get(n)
                    + lf.ln_binomial(n, i1)
                    + lf.ln_binomial(n - i1, i2)
                    + pow_ln(s.c0, n - i1 - i2)
                    + m_y;
                for k in 0..i.w.m as usize {
                    for k1 in 0..=k {
                        sum.push(
                            head + T::of_usize(k) * ln_b - lf.get(k)
                                + lf.ln_binomial(k, k1)
                                + law_z.ln_moment(i2 + k1, s.a + s.b, lf),
                        );
                    }
                }
            }
        }
    }
    sum.value()
}

/// cdf of the bounded SINR at S1 evaluated at `inputs.threshold`.
pub fn cdf_scenario_a<T: Real>(inputs: &SecondaryCdfInputs<T>) -> Result<T> {
    inputs.validate()?;
    if let Some(f) = inputs.trivial_cdf() {
        return Ok(f);
    }
    complement(survival_s1(inputs), "scenario A cdf")
}

/// `χ₁ = E_{Z,Y}[Q_X(a(Z+Y+c₀))]`, the survival of the first-hop branch.
fn chi1<T: Real>(i: &SecondaryCdfInputs<T>, s: &Setup<T>) -> T {
    let (law_y, law_z) = (i.law_y(), i.law_z());
    let lf = &s.lf;
    let mut sum = LogSum::new();
    for n in 0..i.x.m as usize {
        for i1 in 0..=n {
            for i2 in 0..=(n - i1) {
                sum.push(
                    -s.a * s.c0 + pow_ln(s.a, n) - lf.get(n)
                        + lf.ln_binomial(n, i1)
                        + lf.ln_binomial(n - i1, i2)
                        + pow_ln(s.c0, n - i1 - i2)
                        + law_y.ln_moment(i1, s.a, lf)
                        + law_z.ln_moment(i2, s.a, lf),
                );
            }
        }
    }
    sum.value()
}

/// `χ₂ = E_Z[Q_W(b(Z+1))]`, the survival of the second-hop branch.
fn chi2<T: Real>(i: &SecondaryCdfInputs<T>, s: &Setup<T>) -> T {
    let law_z = i.law_z();
    let lf = &s.lf;
    let mut sum = LogSum::new();
    for k in 0..i.w.m as usize {
        for k1 in 0..=k {
            sum.push(
                -s.b + pow_ln(s.b, k) - lf.get(k)
                    + lf.ln_binomial(k, k1)
                    + law_z.ln_moment(k1, s.b, lf),
            );
        }
    }
    sum.value()
}

/// Product approximation `1 - χ₁ χ₂` of the S1 cdf.
pub fn cdf_scenario_a_decoupled<T: Real>(inputs: &SecondaryCdfInputs<T>) -> Result<T> {
    inputs.validate()?;
    if let Some(f) = inputs.trivial_cdf() {
        return Ok(f);
    }
    let s = Setup::new(inputs);
    complement(chi1(inputs, &s) * chi2(inputs, &s), "scenario A decoupled cdf")
}

/// `(Υ₁, Υ₂)`: the survival `E[Q_X(a·max(Z+Y+c₀, V+1))]` of the S2 → relay
/// → S1 first hop requirement taken jointly over both directions, split
/// over `V ≤ Z+Y+γ̄_R/γ̄_S` (`Υ₁`) and its complement (`Υ₂`).
///
/// `(Υ₃, Υ₄)` are `upsilon_pair(&inputs.swapped())`.
pub fn upsilon_pair<T: Real>(inputs: &SecondaryCdfInputs<T>) -> Result<(T, T)> {
    inputs.validate()?;
    let s = Setup::new(inputs);
    Ok((upsilon1(inputs, &s), upsilon2(inputs, &s)))
}

fn upsilon1<T: Real>(i: &SecondaryCdfInputs<T>, s: &Setup<T>) -> T {
    let (law_y, law_z) = (i.law_y(), i.law_z());
    let lambda_v = i.law_v().rate;
    let lf = &s.lf;
    // E[Q_X(a(Z+Y+c₀)) · Pr{V > Z+Y+r | Z, Y}]
    let kappa = s.a + lambda_v;
    let mut tail = LogSum::new();
    for p in 0..i.v.m as usize {
        for rho in 0..i.x.m as usize {
            let head = -s.a * s.c0 - lambda_v * s.r + pow_ln(lambda_v, p) - lf.get(p)
                + pow_ln(s.a, rho)
                - lf.get(rho);
            for t1 in 0..=p {
                for t2 in 0..=(p - t1) {
                    let v_part =
                        lf.ln_binomial(p, t1) + lf.ln_binomial(p - t1, t2) + pow_ln(s.r, p - t1 - t2);
                    for e1 in 0..=rho {
                        for e2 in 0..=(rho - e1) {
                            tail.push(
                                head + v_part
                                    + lf.ln_binomial(rho, e1)
                                    + lf.ln_binomial(rho - e1, e2)
                                    + pow_ln(s.c0, rho - e1 - e2)
                                    + law_y.ln_moment(t1 + e1, kappa, lf)
                                    + law_z.ln_moment(t2 + e2, kappa, lf),
                            );
                        }
                    }
                }
            }
        }
    }
    (chi1(i, s) - tail.value()).max(T::zero())
}

fn upsilon2<T: Real>(i: &SecondaryCdfInputs<T>, s: &Setup<T>) -> T {
    let (law_y, law_z) = (i.law_y(), i.law_z());
    let law_v = i.law_v();
    let lf = &s.lf;
    let mv = law_v.shape;
    let kappa = law_v.rate + s.a;
    let mut sum = LogSum::new();
    for n in 0..i.x.m as usize {
        let head = -s.a - kappa * s.r + pow_ln(s.a, n) - lf.get(n)
            + T::of_usize(mv) * (law_v.rate / kappa).ln();
        for j in 0..=n {
            let head_j = head + lf.ln_binomial(n, j) + lf.ln_rising(mv, j) - T::of_usize(j) * kappa.ln();
            for k in 0..(mv + j) {
                for k1 in 0..=k {
                    for k2 in 0..=k1 {
                        sum.push(
                            head_j + T::of_usize(k) * kappa.ln() - lf.get(k)
                                + lf.ln_binomial(k, k1)
                                + pow_ln(s.r, k - k1)
                                + lf.ln_binomial(k1, k2)
                                + law_z.ln_moment(k2, kappa, lf)
                                + law_y.ln_moment(k1 - k2, kappa, lf),
                        );
                    }
                }
            }
        }
    }
    sum.value()
}

/// Product approximation `1 - (Υ₁+Υ₂)(Υ₃+Υ₄)` of the end-to-end cdf.
pub fn cdf_scenario_a_e2e_decoupled<T: Real>(inputs: &SecondaryCdfInputs<T>) -> Result<T> {
    inputs.validate()?;
    if let Some(f) = inputs.trivial_cdf() {
        return Ok(f);
    }
    let (u1, u2) = upsilon_pair(inputs)?;
    let (u3, u4) = upsilon_pair(&inputs.swapped())?;
    complement((u1 + u2) * (u3 + u4), "scenario A decoupled end-to-end cdf")
}

/// cdf of `min(γ^up_S1, γ^up_S2)` evaluated at `inputs.threshold`.
///
/// The survival is `E[Q_X(a·max(Z+Y+c₀, V+1)) Q_W(b·max(V+Y+c₀, Z+1))]`.
/// The maxima switch branch on the disjoint regions `V > Z+Y+r` and
/// `Z > V+Y+r`; each region is handled by shifting the dominating variable,
/// which keeps every integrand polynomial × exponential.
pub fn cdf_scenario_a_e2e<T: Real>(inputs: &SecondaryCdfInputs<T>) -> Result<T> {
    inputs.validate()?;
    if let Some(f) = inputs.trivial_cdf() {
        return Ok(f);
    }
    let s = Setup::new(inputs);
    let lf = &s.lf;
    let (mx, mw) = (inputs.x.m as usize, inputs.w.m as usize);
    let lin = |c: [f64; 3], k: T| LinearForm::new(c, k);

    // variables (Z, Y, V), no branch switch
    let base = ExpPoly::one()
        .times_density(&inputs.law_z(), &lin([1.0, 0.0, 0.0], T::zero()), lf)
        .times_density(&inputs.law_y(), &lin([0.0, 1.0, 0.0], T::zero()), lf)
        .times_density(&inputs.law_v(), &lin([0.0, 0.0, 1.0], T::zero()), lf)
        .times_survival(mx, s.a, &lin([1.0, 1.0, 0.0], s.c0), lf)
        .times_survival(mw, s.b, &lin([0.0, 1.0, 1.0], s.c0), lf)
        .integrate(lf)?;
    let survival = base + region_correction(inputs)? + region_correction(&inputs.swapped())?;
    complement(survival, "scenario A end-to-end cdf")
}

/// Contribution of the region `V > Z+Y+r` where the S1-side bound switches
/// to `V+1`: variables `(Z, Y, U)` with `V = Z+Y+U+r`.
fn region_correction<T: Real>(i: &SecondaryCdfInputs<T>) -> Result<T> {
    let s = Setup::new(i);
    let lf = &s.lf;
    let (mx, mw) = (i.x.m as usize, i.w.m as usize);
    let lin = |c: [f64; 3], k: T| LinearForm::new(c, k);
    let density = ExpPoly::one()
        .times_density(&i.law_z(), &lin([1.0, 0.0, 0.0], T::zero()), lf)
        .times_density(&i.law_y(), &lin([0.0, 1.0, 0.0], T::zero()), lf)
        .times_density(&i.law_v(), &lin([1.0, 1.0, 1.0], s.r), lf);
    // V + Y + c₀
    let w_side = lin([1.0, 2.0, 1.0], s.r + s.c0);
    let switched = density
        .clone()
        .times_survival(mx, s.a, &lin([1.0, 1.0, 1.0], s.c0), lf)
        .times_survival(mw, s.b, &w_side, lf)
        .integrate(lf)?;
    let unswitched = density
        .times_survival(mx, s.a, &lin([1.0, 1.0, 0.0], s.c0), lf)
        .times_survival(mw, s.b, &w_side, lf)
        .integrate(lf)?;
    Ok(switched - unswitched)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FadingLink;

    fn unit(theta: f64) -> SecondaryCdfInputs<f64> {
        let l = FadingLink::new(1, 1.0).unwrap();
        SecondaryCdfInputs {
            x: l,
            w: l,
            y: l,
            z: l,
            v: l,
            primary: 10.0,
            source: 10.0,
            relay: 10.0,
            threshold: theta,
        }
    }

    #[test]
    fn saturation_limits() {
        for f in [cdf_scenario_a, cdf_scenario_a_decoupled, cdf_scenario_a_e2e, cdf_scenario_a_e2e_decoupled] {
            assert_eq!(f(&unit(0.0)).unwrap(), 0.0);
            assert_eq!(f(&unit(f64::INFINITY)).unwrap(), 1.0);
            assert!(f(&unit(1e6)).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn rayleigh_closed_form_of_s1_survival() {
        // all m = 1: E[e^{-a(Z+Y+c₀)} e^{-b(Z+1)}] = e^{-a c₀ - b} λy/(λy+a) · λz/(λz+a+b)
        let i = unit(2.0);
        let (a, b, c0) = (0.2f64, 0.2, 2.0);
        let (ly, lz) = (0.1, 0.1);
        let want = (-a * c0 - b).exp() * ly / (ly + a) * lz / (lz + a + b);
        assert!((survival_s1(&i) - want).abs() < 1e-15);
    }

    #[test]
    fn symmetric_upsilon_pairs_agree() {
        let mut i = unit(2.0);
        i.x = FadingLink::new(2, 1.5).unwrap();
        i.w = i.x;
        i.z = FadingLink::new(3, 0.7).unwrap();
        i.v = i.z;
        let (u1, u2) = upsilon_pair(&i).unwrap();
        let (u3, u4) = upsilon_pair(&i.swapped()).unwrap();
        assert_eq!(u1 + u2, u3 + u4);
    }

    #[test]
    fn upsilon_sum_matches_orthant_integral() {
        let mut i = unit(1.5);
        i.x = FadingLink::new(2, 1.3).unwrap();
        i.y = FadingLink::new(2, 0.4).unwrap();
        i.z = FadingLink::new(3, 0.2).unwrap();
        i.v = FadingLink::new(2, 0.3).unwrap();
        i.source = 4.0;
        let (u1, u2) = upsilon_pair(&i).unwrap();
        let s = Setup::new(&i);
        let lf = &s.lf;
        let lin = |c: [f64; 3], k: f64| LinearForm::new(c, k);
        let density = |vform| {
            ExpPoly::one()
                .times_density(&i.law_z(), &lin([1.0, 0.0, 0.0], 0.0), lf)
                .times_density(&i.law_y(), &lin([0.0, 1.0, 0.0], 0.0), lf)
                .times_density(&i.law_v(), &vform, lf)
        };
        let plain = density(lin([0.0, 0.0, 1.0], 0.0))
            .times_survival(2, s.a, &lin([1.0, 1.0, 0.0], s.c0), lf)
            .integrate(lf)
            .unwrap();
        let shifted = |xform| {
            density(lin([1.0, 1.0, 1.0], s.r))
                .times_survival(2, s.a, &xform, lf)
                .integrate(lf)
                .unwrap()
        };
        let want = plain - shifted(lin([1.0, 1.0, 0.0], s.c0)) + shifted(lin([1.0, 1.0, 1.0], s.c0));
        assert!(((u1 + u2) - want).abs() < 1e-13 * want, "{} vs {want}", u1 + u2);
        assert!((u2 - shifted(lin([1.0, 1.0, 1.0], s.c0))).abs() < 1e-13 * u2);
    }

    #[test]
    fn joint_cdf_dominates_decoupled_product() {
        // shared interference makes the branch survivals positively correlated
        let i = unit(2.0);
        assert!(cdf_scenario_a(&i).unwrap() < cdf_scenario_a_decoupled(&i).unwrap());
        assert!(cdf_scenario_a_e2e(&i).unwrap() >= cdf_scenario_a(&i).unwrap());
    }
}
