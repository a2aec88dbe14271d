use std::fmt::Write;

use super::{LpModel, Relation};

/// Renders `model` in fixed-column MPS style for inspection.
///
/// Variables are named `X<j>`, rows `R<i>`, the objective `COST`. The
/// objective offset is written as a comment since MPS has no field for it.
pub fn to_mps(model: &LpModel, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {name}");
    if model.objective_offset != 0.0 {
        let _ = writeln!(out, "* objective offset {}", model.objective_offset);
    }
    out.push_str("ROWS\n N  COST\n");
    for (i, c) in model.constraints.iter().enumerate() {
        let tag = match c.relation {
            Relation::Le => 'L',
            Relation::Ge => 'G',
            Relation::Eq => 'E',
        };
        let _ = writeln!(out, " {tag}  R{i}");
    }
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (i, c) in model.constraints.iter().enumerate() {
        for &(j, a) in &c.coeffs {
            columns[j].push((i, a));
        }
    }
    out.push_str("COLUMNS\n");
    for (j, col) in columns.iter().enumerate() {
        let var = format!("X{j}");
        if model.objective[j] != 0.0 {
            let _ = writeln!(out, "    {var:<8}  {:<8}  {:>12}", "COST", model.objective[j]);
        }
        for &(i, a) in col {
            let _ = writeln!(out, "    {var:<8}  {:<8}  {a:>12}", format!("R{i}"));
        }
    }
    out.push_str("RHS\n");
    for (i, c) in model.constraints.iter().enumerate() {
        if c.rhs != 0.0 {
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", "RHS", format!("R{i}"), c.rhs);
        }
    }
    out.push_str("BOUNDS\n");
    for j in 0..model.num_vars() {
        let (l, u) = (model.lower[j], model.upper[j]);
        let var = format!("X{j}");
        if l == u {
            let _ = writeln!(out, " FX {:<8}  {var:<8}  {l:>12}", "BND");
            continue;
        }
        if l == f64::NEG_INFINITY {
            let _ = writeln!(out, " MI {:<8}  {var:<8}", "BND");
        } else if l != 0.0 {
            let _ = writeln!(out, " LO {:<8}  {var:<8}  {l:>12}", "BND");
        }
        if u.is_finite() {
            let _ = writeln!(out, " UP {:<8}  {var:<8}  {u:>12}", "BND");
        }
    }
    out.push_str("ENDATA\n");
    out
}
