//! Exact integration of polynomial × exponential integrands over the
//! nonnegative orthant in three variables.
//!
//! Expectations of products of integer-shape Gamma survival functions and
//! densities evaluated at linear forms reduce to sums of
//! `∫ x^i y^j u^k e^{-κ·(x,y,u)} = i! j! k! / (κ₀^{i+1} κ₁^{j+1} κ₂^{k+1})`.

use std::collections::BTreeMap;

use super::GammaLaw;
use crate::error::{Error, Result};
use crate::num::{CompensatedSum, Real};
use crate::specfun::LnFactorials;

pub(crate) const VARS: usize = 3;

type Exponents = [u16; VARS];

/// `coeffs · x + constant`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LinearForm<T> {
    pub coeffs: [T; VARS],
    pub constant: T,
}

impl<T: Real> LinearForm<T> {
    pub fn new(coeffs: [f64; VARS], constant: T) -> Self {
        Self {
            coeffs: coeffs.map(T::of),
            constant,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Poly<T> {
    terms: BTreeMap<Exponents, T>,
}

impl<T: Real> Poly<T> {
    pub fn constant(c: T) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert([0; VARS], c);
        Self { terms }
    }

    pub fn linear(form: &LinearForm<T>) -> Self {
        let mut p = Self::constant(form.constant);
        for (v, &c) in form.coeffs.iter().enumerate() {
            if c != T::zero() {
                let mut e = [0; VARS];
                e[v] = 1;
                p.terms.insert(e, c);
            }
        }
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let mut e = *ea;
                for v in 0..VARS {
                    e[v] += eb[v];
                }
                let slot = terms.entry(e).or_insert_with(T::zero);
                *slot = *slot + ca * cb;
            }
        }
        Self { terms }
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut out = Self::constant(T::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Self, scale: T) {
        for (e, &c) in &other.terms {
            let slot = self.terms.entry(*e).or_insert_with(T::zero);
            *slot = *slot + scale * c;
        }
    }
}

/// `exp(ln_scale) · poly(x) · exp(-decay · x)` on `x ∈ [0, ∞)³`.
#[derive(Debug, Clone)]
pub(crate) struct ExpPoly<T> {
    ln_scale: T,
    poly: Poly<T>,
    decay: [T; VARS],
}

impl<T: Real> ExpPoly<T> {
    pub fn one() -> Self {
        Self {
            ln_scale: T::zero(),
            poly: Poly::constant(T::one()),
            decay: [T::zero(); VARS],
        }
    }

    fn absorb_exponential(&mut self, scale: T, form: &LinearForm<T>) {
        self.ln_scale = self.ln_scale - scale * form.constant;
        for v in 0..VARS {
            self.decay[v] = self.decay[v] + scale * form.coeffs[v];
        }
    }

    /// Multiplies by the density of `law` evaluated at `form`.
    pub fn times_density(mut self, law: &GammaLaw<T>, form: &LinearForm<T>, lf: &LnFactorials<T>) -> Self {
        let m = law.shape;
        self.ln_scale = self.ln_scale + T::of_usize(m) * law.rate.ln() - lf.get(m - 1);
        self.poly = self.poly.mul(&Poly::linear(form).pow(m - 1));
        self.absorb_exponential(law.rate, form);
        self
    }

    /// Multiplies by `Q(shape, scale · form) = e^{-t} Σ_{n<shape} t^n / n!`.
    pub fn times_survival(mut self, shape: usize, scale: T, form: &LinearForm<T>, lf: &LnFactorials<T>) -> Self {
        let base = Poly::linear(form);
        let mut acc = Poly::constant(T::zero());
        let mut power = Poly::constant(T::one());
        for n in 0..shape {
            if n > 0 {
                power = power.mul(&base);
            }
            acc.add_scaled(&power, (T::of_usize(n) * scale.ln() - lf.get(n)).exp());
        }
        self.poly = self.poly.mul(&acc);
        self.absorb_exponential(scale, form);
        self
    }

    /// Integral over the nonnegative orthant.
    pub fn integrate(&self, lf: &LnFactorials<T>) -> Result<T> {
        if self.decay.iter().any(|&d| !(d > T::zero())) {
            return Err(Error::Domain("orthant integral requires positive decay in every variable".into()));
        }
        let ln_decay = self.decay.map(|d| d.ln());
        let mut sum = CompensatedSum::new();
        for (e, &c) in &self.poly.terms {
            let mut ln_w = T::zero();
            for v in 0..VARS {
                let i = e[v] as usize;
                ln_w = ln_w + lf.get(i) - T::of_usize(i + 1) * ln_decay[v];
            }
            sum.add(c * (ln_w + self.ln_scale).exp());
        }
        Ok(sum.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_independent_exponentials() {
        let lf = LnFactorials::<f64>::new(32);
        let law = GammaLaw { shape: 1, rate: 2.0 };
        let f = ExpPoly::one()
            .times_density(&law, &LinearForm::new([1.0, 0.0, 0.0], 0.0), &lf)
            .times_density(&law, &LinearForm::new([0.0, 1.0, 0.0], 0.0), &lf)
            .times_density(&law, &LinearForm::new([0.0, 0.0, 1.0], 0.0), &lf);
        assert!((f.integrate(&lf).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn survival_of_sum_of_gammas() {
        // Pr{E > X + Y}, E ~ Gamma(2, 1), X, Y ~ Exp(1): E[Q(2, X+Y)]
        let lf = LnFactorials::<f64>::new(32);
        let law = GammaLaw { shape: 1, rate: 1.0 };
        let f = ExpPoly::one()
            .times_density(&law, &LinearForm::new([1.0, 0.0, 0.0], 0.0), &lf)
            .times_density(&law, &LinearForm::new([0.0, 1.0, 0.0], 0.0), &lf)
            .times_density(&law, &LinearForm::new([0.0, 0.0, 1.0], 0.0), &lf)
            .times_survival(2, 1.0, &LinearForm::new([1.0, 1.0, 0.0], 0.0), &lf);
        // E[e^{-S}(1+S)], S ~ Gamma(2,1): 1/4 + 2/8
        assert!((f.integrate(&lf).unwrap() - 0.5).abs() < 1e-14);
    }
}
