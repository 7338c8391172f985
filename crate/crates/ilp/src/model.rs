use std::collections::HashMap;
use std::fmt;

use crate::IlpError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    /// `None` is minus infinity.
    pub lower: Option<i64>,
    /// `None` is plus infinity.
    pub upper: Option<i64>,
    pub integer: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Comparator {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::Le => "<=",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, i64)>,
    pub cmp: Comparator,
    pub rhs: i64,
}

impl Constraint {
    /// Integer left-hand side under `values`, `None` on overflow.
    pub fn activity(&self, values: &[i64]) -> Option<i64> {
        self.terms.iter().try_fold(0i64, |acc, &(v, c)| {
            c.checked_mul(values[v.0]).and_then(|t| acc.checked_add(t))
        })
    }

    pub fn is_satisfied_by(&self, values: &[i64]) -> bool {
        match self.activity(values) {
            Some(lhs) => match self.cmp {
                Comparator::Le => lhs <= self.rhs,
                Comparator::Ge => lhs >= self.rhs,
                Comparator::Eq => lhs == self.rhs,
            },
            None => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    pub sense: Sense,
    pub terms: Vec<(VarId, i64)>,
    pub constant: i64,
}

impl Objective {
    pub fn minimize(terms: Vec<(VarId, i64)>) -> Self {
        Objective {
            sense: Sense::Minimize,
            terms,
            constant: 0,
        }
    }

    pub fn value(&self, values: &[i64]) -> Option<i64> {
        self.terms.iter().try_fold(self.constant, |acc, &(v, c)| {
            c.checked_mul(values[v.0]).and_then(|t| acc.checked_add(t))
        })
    }
}

/// An integer-linear system: bounded variables, linear rows with integer
/// coefficients and an optional objective.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IlpModel {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Option<Objective>,
    names: HashMap<String, VarId>,
}

impl IlpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: Option<i64>,
        upper: Option<i64>,
        integer: bool,
    ) -> Result<VarId, IlpError> {
        let name = name.into();
        if self.names.contains_key(&name) {
            return Err(IlpError::DuplicateVariable(name));
        }
        if let (Some(l), Some(u)) = (lower, upper) {
            if l > u {
                return Err(IlpError::EmptyDomain(name));
            }
        }
        let id = VarId(self.variables.len());
        self.names.insert(name.clone(), id);
        self.variables.push(Variable {
            name,
            lower,
            upper,
            integer,
        });
        Ok(id)
    }

    pub fn add_integer(
        &mut self,
        name: impl Into<String>,
        lower: i64,
        upper: i64,
    ) -> Result<VarId, IlpError> {
        self.add_variable(name, Some(lower), Some(upper), true)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, IlpError> {
        self.add_variable(name, Some(0), Some(1), true)
    }

    /// Adds a row. Repeated variables are merged and zero coefficients dropped.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, i64)>,
        cmp: Comparator,
        rhs: i64,
    ) -> Result<(), IlpError> {
        let name = name.into();
        let mut merged: Vec<(VarId, i64)> = Vec::new();
        for (v, c) in terms {
            if v.0 >= self.variables.len() {
                return Err(IlpError::UnknownVariable(v.0));
            }
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some(entry) => {
                    entry.1 = entry
                        .1
                        .checked_add(c)
                        .ok_or_else(|| IlpError::Overflow(name.clone()))?
                }
                None => merged.push((v, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0);
        self.constraints.push(Constraint {
            name,
            terms: merged,
            cmp,
            rhs,
        });
        Ok(())
    }

    pub fn set_objective(&mut self, objective: Option<Objective>) -> Result<(), IlpError> {
        if let Some(obj) = &objective {
            if let Some(&(v, _)) = obj.terms.iter().find(|(v, _)| v.0 >= self.variables.len()) {
                return Err(IlpError::UnknownVariable(v.0));
            }
        }
        self.objective = objective;
        Ok(())
    }

    pub fn set_bounds(&mut self, v: VarId, lower: Option<i64>, upper: Option<i64>) {
        let var = &mut self.variables[v.0];
        var.lower = lower;
        var.upper = upper;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> Option<&Objective> {
        self.objective.as_ref()
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.names.get(name).copied()
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Exact integer check of variable bounds and every constraint.
    pub fn is_feasible(&self, values: &[i64]) -> bool {
        values.len() == self.variables.len()
            && self.variables.iter().zip(values).all(|(var, &x)| {
                var.lower.is_none_or(|l| x >= l) && var.upper.is_none_or(|u| x <= u)
            })
            && self.constraints.iter().all(|c| c.is_satisfied_by(values))
    }

    /// Index of the first constraint violated by `values`, if any.
    pub fn first_violation(&self, values: &[i64]) -> Option<&Constraint> {
        self.constraints.iter().find(|c| !c.is_satisfied_by(values))
    }
}
