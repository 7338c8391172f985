use std::fmt::Write;

use crate::model::{Comparator, IlpModel, Sense, VarId};

fn linear(model: &IlpModel, terms: &[(VarId, i64)]) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, &(v, c)) in terms.iter().enumerate() {
        let name = &model.variables()[v.0].name;
        let sign = if c < 0 { "-" } else { "+" };
        if k == 0 {
            if c < 0 {
                out.push_str("- ");
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        let mag = c.unsigned_abs();
        if mag == 1 {
            out.push_str(name);
        } else {
            let _ = write!(out, "{mag} {name}");
        }
    }
    out
}

/// Renders the model in CPLEX LP text format.
pub fn to_lp_format(model: &IlpModel) -> String {
    let mut out = String::new();
    let (sense, terms, constant) = match model.objective() {
        Some(o) => (o.sense, o.terms.as_slice(), o.constant),
        None => (Sense::Minimize, &[][..], 0),
    };
    out.push_str(match sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    let _ = write!(out, " obj: {}", linear(model, terms));
    if constant != 0 {
        let _ = write!(
            out,
            " {} {}",
            if constant < 0 { "-" } else { "+" },
            constant.unsigned_abs()
        );
    }
    out.push_str("\nSubject To\n");
    for (i, c) in model.constraints().iter().enumerate() {
        let name = if c.name.is_empty() {
            format!("c{i}")
        } else {
            c.name.clone()
        };
        let cmp = match c.cmp {
            Comparator::Le => "<=",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
        };
        let _ = writeln!(out, " {name}: {} {cmp} {}", linear(model, &c.terms), c.rhs);
    }
    out.push_str("Bounds\n");
    for v in model.variables() {
        match (v.lower, v.upper) {
            (Some(l), Some(u)) if l == u => {
                let _ = writeln!(out, " {} = {l}", v.name);
            }
            (Some(l), Some(u)) => {
                let _ = writeln!(out, " {l} <= {} <= {u}", v.name);
            }
            (Some(l), None) => {
                let _ = writeln!(out, " {} >= {l}", v.name);
            }
            (None, Some(u)) => {
                let _ = writeln!(out, " -inf <= {} <= {u}", v.name);
            }
            (None, None) => {
                let _ = writeln!(out, " {} free", v.name);
            }
        }
    }
    let ints: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.integer)
        .map(|v| v.name.as_str())
        .collect();
    if !ints.is_empty() {
        out.push_str("General\n");
        for chunk in ints.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}
