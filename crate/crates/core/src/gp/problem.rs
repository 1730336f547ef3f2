use super::expr::{Monomial, Posynomial};
use crate::{Error, Result};

/// A geometric program in standard form:
///
/// ```text
/// minimise    f0(z)
/// subject to  f_l(z) <= 1   (posynomials)
///             g_k(z)  = 1   (monomials)
///             z > 0
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct GpProblem {
    names: Vec<String>,
    objective: Posynomial,
    inequalities: Vec<Posynomial>,
    labels: Vec<String>,
    equalities: Vec<Monomial>,
    approximate: bool,
}

impl GpProblem {
    pub fn new(names: Vec<String>, objective: Posynomial) -> Result<Self> {
        check_vars(&names, objective.max_var(), "objective")?;
        Ok(Self {
            names,
            objective,
            inequalities: Vec::new(),
            labels: Vec::new(),
            equalities: Vec::new(),
            approximate: false,
        })
    }

    /// Add `p(z) <= 1`.
    pub fn subject_to(&mut self, label: impl Into<String>, p: Posynomial) -> Result<()> {
        let label = label.into();
        check_vars(&self.names, p.max_var(), &label)?;
        self.inequalities.push(p);
        self.labels.push(label);
        Ok(())
    }

    /// Add `m(z) = 1`.
    pub fn equal_one(&mut self, m: Monomial) -> Result<()> {
        if m.coefficient() <= 0.0 {
            return Err(Error::Structural(
                "equality monomial has zero coefficient".into(),
            ));
        }
        check_vars(&self.names, m.max_var(), "equality")?;
        self.equalities.push(m);
        Ok(())
    }

    /// Flag that some constraint is a local (condensed) approximation, so the
    /// optimum of this problem is not the optimum of the original one.
    pub fn mark_approximate(&mut self) {
        self.approximate = true;
    }

    pub fn is_exact(&self) -> bool {
        !self.approximate
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn objective(&self) -> &Posynomial {
        &self.objective
    }

    pub fn inequalities(&self) -> &[Posynomial] {
        &self.inequalities
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn equalities(&self) -> &[Monomial] {
        &self.equalities
    }

    pub fn num_constraints(&self) -> usize {
        self.inequalities.len() + self.equalities.len()
    }

    /// Largest violation over all constraints at `z`: `max(f_l(z) - 1)` and
    /// `|g_k(z) - 1|`. Non-positive means feasible.
    pub fn max_violation(&self, z: &[f64]) -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for p in &self.inequalities {
            worst = worst.max(p.eval(z)? - 1.0);
        }
        for m in &self.equalities {
            worst = worst.max((m.eval(z)? - 1.0).abs());
        }
        Ok(worst)
    }
}

fn check_vars(names: &[String], max_var: Option<usize>, what: &str) -> Result<()> {
    match max_var {
        Some(v) if v >= names.len() => Err(Error::Structural(format!(
            "{what} references z{v} but only {} variables are declared",
            names.len()
        ))),
        _ => Ok(()),
    }
}
