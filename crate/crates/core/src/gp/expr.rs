use std::ops::{Add, Div, Mul};

use crate::{Error, Result};

/// `c * prod_n z_n^{a_n}` with `c > 0`. Powers are kept sparse, sorted by
/// variable index, with zero exponents removed.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    coefficient: f64,
    powers: Vec<(usize, f64)>,
}

fn normalise(powers: &mut Vec<(usize, f64)>) {
    powers.sort_by_key(|&(v, _)| v);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(powers.len());
    for &(v, e) in powers.iter() {
        match merged.last_mut() {
            Some(last) if last.0 == v => last.1 += e,
            _ => merged.push((v, e)),
        }
    }
    merged.retain(|&(_, e)| e != 0.0);
    *powers = merged;
}

impl Monomial {
    /// A zero coefficient is accepted here so callers can build a
    /// posynomial term by term; [`Posynomial::new`] drops such terms.
    pub fn new(coefficient: f64, powers: &[(usize, f64)]) -> Result<Self> {
        if !(coefficient >= 0.0) || !coefficient.is_finite() {
            return Err(Error::Structural(format!(
                "monomial coefficient must be finite and non-negative, got {coefficient}"
            )));
        }
        if let Some(&(v, e)) = powers.iter().find(|(_, e)| !e.is_finite()) {
            return Err(Error::Structural(format!("exponent of z{v} is {e}")));
        }
        let mut powers = powers.to_vec();
        normalise(&mut powers);
        Ok(Self {
            coefficient,
            powers,
        })
    }

    pub fn constant(coefficient: f64) -> Result<Self> {
        Self::new(coefficient, &[])
    }

    /// The variable `z_index` itself.
    pub fn var(index: usize) -> Self {
        Self {
            coefficient: 1.0,
            powers: vec![(index, 1.0)],
        }
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn powers(&self) -> &[(usize, f64)] {
        &self.powers
    }

    pub fn exponent(&self, var: usize) -> f64 {
        self.powers
            .iter()
            .find(|&&(v, _)| v == var)
            .map_or(0.0, |&(_, e)| e)
    }

    pub fn max_var(&self) -> Option<usize> {
        self.powers.last().map(|&(v, _)| v)
    }

    pub fn pow(&self, p: f64) -> Self {
        let mut powers: Vec<_> = self.powers.iter().map(|&(v, e)| (v, e * p)).collect();
        normalise(&mut powers);
        Self {
            coefficient: self.coefficient.powf(p),
            powers,
        }
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        Self::new(self.coefficient * factor, &self.powers)
    }

    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        check_point(z)?;
        self.check_arity(z.len())?;
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[f64]) -> f64 {
        self.powers
            .iter()
            .fold(self.coefficient, |acc, &(v, e)| acc * z[v].powf(e))
    }

    /// `ln c + sum a_n y_n`: the monomial at `z = exp(y)` in log space.
    pub fn log_eval(&self, y: &[f64]) -> f64 {
        self.powers
            .iter()
            .fold(self.coefficient.ln(), |acc, &(v, e)| acc + e * y[v])
    }

    fn check_arity(&self, n: usize) -> Result<()> {
        match self.max_var() {
            Some(v) if v >= n => Err(Error::domain(format!(
                "monomial references z{v} but the point has {n} coordinates"
            ))),
            _ => Ok(()),
        }
    }
}

fn check_point(z: &[f64]) -> Result<()> {
    match z.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
        Some(i) => Err(Error::domain(format!(
            "coordinate z{i} = {} is not strictly positive",
            z[i]
        ))),
        None => Ok(()),
    }
}

impl Mul for &Monomial {
    type Output = Monomial;

    fn mul(self, rhs: &Monomial) -> Monomial {
        let mut powers: Vec<_> = self.powers.iter().chain(&rhs.powers).copied().collect();
        normalise(&mut powers);
        Monomial {
            coefficient: self.coefficient * rhs.coefficient,
            powers,
        }
    }
}

impl Div for &Monomial {
    type Output = Monomial;

    /// Panics if `rhs` has a zero coefficient.
    fn div(self, rhs: &Monomial) -> Monomial {
        assert!(rhs.coefficient > 0.0, "division by a zero monomial");
        self * &rhs.pow(-1.0)
    }
}

/// A sum of monomials with positive coefficients; never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Posynomial {
    terms: Vec<Monomial>,
}

impl Posynomial {
    pub fn new(terms: Vec<Monomial>) -> Result<Self> {
        let terms: Vec<_> = terms.into_iter().filter(|t| t.coefficient > 0.0).collect();
        if terms.is_empty() {
            return Err(Error::Structural(
                "posynomial has no term with a positive coefficient".into(),
            ));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_var(&self) -> Option<usize> {
        self.terms.iter().filter_map(Monomial::max_var).max()
    }

    pub fn as_monomial(&self) -> Option<&Monomial> {
        match self.terms.as_slice() {
            [only] => Some(only),
            _ => None,
        }
    }

    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        check_point(z)?;
        for t in &self.terms {
            t.check_arity(z.len())?;
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval_unchecked(z)).sum()
    }

    /// `ln p(exp(y))`, evaluated as a shifted log-sum-exp.
    pub fn log_eval(&self, y: &[f64]) -> f64 {
        let logs: Vec<f64> = self.terms.iter().map(|t| t.log_eval(y)).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
    }
}

impl From<Monomial> for Posynomial {
    /// Panics on a zero-coefficient monomial.
    fn from(m: Monomial) -> Self {
        assert!(m.coefficient > 0.0, "zero monomial is not a posynomial");
        Self { terms: vec![m] }
    }
}

impl Add for Posynomial {
    type Output = Posynomial;

    fn add(mut self, rhs: Posynomial) -> Posynomial {
        self.terms.extend(rhs.terms);
        self
    }
}

impl Mul<&Monomial> for &Posynomial {
    type Output = Posynomial;

    fn mul(self, rhs: &Monomial) -> Posynomial {
        Posynomial {
            terms: self.terms.iter().map(|t| t * rhs).collect(),
        }
    }
}

impl Div<&Monomial> for &Posynomial {
    type Output = Posynomial;

    fn div(self, rhs: &Monomial) -> Posynomial {
        self * &rhs.pow(-1.0)
    }
}

/// Single condensation of a posynomial into its AM-GM monomial lower bound
/// around `z_prev`.
///
/// With weights `w_k = mu_k(z_prev) / g(z_prev)` the bound is
/// `prod_k (mu_k(z) / w_k)^{w_k}`: a monomial whose exponent on `z_n` is
/// `sum_k w_k a_{k,n}` and whose coefficient is `prod_k (c_k / w_k)^{w_k}`.
/// It never exceeds `g` on the positive orthant and touches it at `z_prev`.
/// Terms whose weight underflows to zero are left out of the product.
pub fn condense(g: &Posynomial, z_prev: &[f64]) -> Result<Monomial> {
    check_point(z_prev)?;
    for t in &g.terms {
        t.check_arity(z_prev.len())?;
    }
    let y: Vec<f64> = z_prev.iter().map(|z| z.ln()).collect();
    let values: Vec<f64> = g.terms.iter().map(|t| t.log_eval(&y)).collect();
    // Weights from log-values so that wildly scaled terms do not overflow.
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_total = top + values.iter().map(|l| (l - top).exp()).sum::<f64>().ln();

    let mut log_coefficient = 0.0;
    let mut powers = Vec::new();
    for (term, &log_value) in g.terms.iter().zip(&values) {
        let log_weight = log_value - log_total;
        let weight = log_weight.exp();
        if weight == 0.0 {
            continue;
        }
        log_coefficient += weight * (term.coefficient.ln() - log_weight);
        powers.extend(term.powers.iter().map(|&(v, e)| (v, weight * e)));
    }
    Monomial::new(log_coefficient.exp(), &powers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eval_examples() {
        let m = Monomial::new(3.0, &[(0, 2.0), (1, -1.0)]).unwrap();
        assert!((m.eval(&[2.0, 4.0]).unwrap() - 3.0).abs() < 1e-15);
        let g = Posynomial::new(vec![
            Monomial::constant(1.281552).unwrap(),
            Monomial::var(0),
        ])
        .unwrap();
        assert!((g.eval(&[4.0]).unwrap() - 5.281552).abs() < 1e-15);
        let any = Monomial::new(2.5, &[(0, 1.7), (1, -0.3), (2, 4.0)]).unwrap();
        assert_eq!(any.eval(&[1.0, 1.0, 1.0]).unwrap(), 2.5);
    }

    #[test]
    fn eval_domain_errors() {
        let m = Monomial::var(1);
        assert!(m.eval(&[1.0, 0.0]).is_err());
        assert!(m.eval(&[1.0, -2.0]).is_err());
        assert!(m.eval(&[1.0]).is_err());
    }

    #[test]
    fn construction_rules() {
        assert!(Monomial::new(-1.0, &[]).is_err());
        assert!(Monomial::new(f64::NAN, &[]).is_err());
        let m = Monomial::new(2.0, &[(1, 1.0), (0, 2.0), (1, -1.0)]).unwrap();
        assert_eq!(m.powers(), &[(0, 2.0)]);
        let p = Posynomial::new(vec![Monomial::constant(0.0).unwrap(), Monomial::var(0)]).unwrap();
        assert_eq!(p.len(), 1);
        assert!(Posynomial::new(vec![Monomial::constant(0.0).unwrap()]).is_err());
    }

    #[test]
    fn algebra() {
        let a = Monomial::new(2.0, &[(0, 1.0)]).unwrap();
        let b = Monomial::new(4.0, &[(0, 1.0), (1, 0.5)]).unwrap();
        let q = &a / &b;
        assert_eq!(q.coefficient(), 0.5);
        assert_eq!(q.powers(), &[(1, -0.5)]);
        let p = Posynomial::from(a.clone()) + Posynomial::from(b.clone());
        let pd = &p / &a;
        let z = [1.3, 2.1];
        assert!((pd.eval(&z).unwrap() - p.eval(&z).unwrap() / a.eval(&z).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn condensation_examples() {
        let g = Posynomial::new(vec![
            Monomial::constant(1.281552).unwrap(),
            Monomial::var(0),
        ])
        .unwrap();
        let gt = condense(&g, &[4.0]).unwrap();
        // weights (1.281552, 4) / 5.281552 and exponent equal to the variable's weight
        assert!((gt.exponent(0) - 4.0 / 5.281552).abs() < 1e-12);
        assert!((gt.exponent(0) - 0.757353).abs() < 1e-6);
        assert!((gt.eval(&[4.0]).unwrap() - 5.281552).abs() < 1e-12);
        // (1.281552 / w1)^w1 (9 / w2)^w2 evaluated independently
        let (w1, w2) = (1.281552 / 5.281552, 4.0 / 5.281552);
        let oracle = (1.281552f64 / w1).powf(w1) * (9.0f64 / w2).powf(w2);
        let at9 = gt.eval(&[9.0]).unwrap();
        assert!((at9 - oracle).abs() < 1e-12);
        assert!((at9 - 9.760860).abs() < 1e-5);
        assert!(at9 <= 10.281552);

        let single = Posynomial::from(Monomial::new(3.0, &[(0, 2.0), (1, -1.0)]).unwrap());
        let same = condense(&single, &[0.7, 5.0]).unwrap();
        assert!((same.coefficient() - 3.0).abs() < 1e-14);
        assert!((same.exponent(0) - 2.0).abs() < 1e-15);
        assert!((same.exponent(1) + 1.0).abs() < 1e-15);
    }

    fn posynomial_strategy() -> impl Strategy<Value = Posynomial> {
        prop::collection::vec(
            (1e-3f64..10.0, prop::collection::vec(-3.0f64..3.0, 3)),
            1..=5,
        )
        .prop_map(|terms| {
            Posynomial::new(
                terms
                    .into_iter()
                    .map(|(c, e)| {
                        let powers: Vec<_> = e.into_iter().enumerate().collect();
                        Monomial::new(c, &powers).unwrap()
                    })
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn log_eval_is_convex(
            p in posynomial_strategy(),
            a in prop::collection::vec(-2.0f64..2.0, 3),
            b in prop::collection::vec(-2.0f64..2.0, 3),
        ) {
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let lhs = p.log_eval(&mid);
            let rhs = 0.5 * (p.log_eval(&a) + p.log_eval(&b));
            prop_assert!(lhs <= rhs + 1e-9 * rhs.abs().max(1.0));
        }

        #[test]
        fn condensation_lower_bound(
            p in posynomial_strategy(),
            at in prop::collection::vec(0.05f64..20.0, 3),
            z in prop::collection::vec(0.05f64..20.0, 3),
        ) {
            let m = condense(&p, &at).unwrap();
            let (g0, m0) = (p.eval(&at).unwrap(), m.eval(&at).unwrap());
            prop_assert!((g0 - m0).abs() <= 1e-9 * g0);
            let (g, mz) = (p.eval(&z).unwrap(), m.eval(&z).unwrap());
            prop_assert!(mz <= g + 1e-9 * g);
        }
    }
}
