use std::fmt::Write;

use super::{Sense, SpModel, VarKind};

fn term_list(out: &mut String, model: &SpModel, terms: &[(usize, f64)]) {
    let mut first = true;
    for &(var, coeff) in terms {
        if coeff == 0.0 {
            continue;
        }
        let name = &model.variables[var].name;
        let sign = if coeff < 0.0 { '-' } else { '+' };
        let mag = coeff.abs();
        if first {
            if coeff < 0.0 {
                out.push_str("- ");
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        if mag == 1.0 {
            out.push_str(name);
        } else {
            let _ = write!(out, "{mag} {name}");
        }
        first = false;
    }
    if first {
        out.push('0');
    }
}

pub(super) fn render(model: &SpModel) -> String {
    let mut out = String::new();
    out.push_str("\\ deterministic equivalent\n");
    let _ = writeln!(
        out,
        "\\ per_pair_node_cost={} joint_scenarios={}",
        model.options.per_pair_node_cost, model.options.joint_scenarios
    );
    out.push_str("minimize\n obj: ");
    let obj: Vec<(usize, f64)> = model.objective.iter().copied().enumerate().collect();
    term_list(&mut out, model, &obj);
    out.push_str("\nsubject to\n");
    for row in &model.rows {
        let _ = write!(out, " {}: ", row.name);
        term_list(&mut out, model, &row.terms);
        let sense = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        if row.rhs.is_infinite() {
            let _ = writeln!(out, " {sense} inf");
        } else {
            let _ = writeln!(out, " {sense} {}", row.rhs);
        }
    }
    out.push_str("bounds\n");
    for v in model.variables.iter().filter(|v| v.kind != VarKind::Route) {
        let _ = writeln!(out, " 0 <= {} <= {}", v.name, v.upper);
    }
    out.push_str("binary\n");
    for v in model.variables.iter().filter(|v| v.kind == VarKind::Route) {
        let _ = writeln!(out, " {}", v.name);
    }
    out.push_str("general\n");
    for v in model.variables.iter().filter(|v| v.kind != VarKind::Route) {
        let _ = writeln!(out, " {}", v.name);
    }
    out.push_str("end\n");
    out
}

#[cfg(test)]
mod tests {
    use crate::model::{compile, ModelOptions};
    use crate::net::{builtin_topology, CostParams, EdgeDefaults, NodeId, Request, Scenario};

    #[test]
    fn dump_is_stable_and_complete() {
        let req = Request {
            id: 3,
            source: NodeId(0),
            destination: NodeId(2),
            scenarios: Scenario::certain(0.9),
        };
        let inst = builtin_topology("line(3)")
            .unwrap()
            .into_instance(&EdgeDefaults::default(), vec![req], CostParams::default())
            .unwrap();
        let m = compile(&inst, ModelOptions::default()).unwrap();
        let text = m.dump();
        assert_eq!(text, compile(&inst, ModelOptions::default()).unwrap().dump());
        assert!(text.contains(" flow_src[n0,r3]: x[0,1,r3] - x[1,0,r3] = 1\n"), "{text}");
        assert!(text.contains(" reserve_cap[e0]: yr[e0,r3] <= 10\n"));
        assert!(text.contains(" demand[e1,r3,w0]: ye[e1,r3,w0] + yo[e1,r3,w0] - x[1,2,r3] - x[2,1,r3] >= 0\n"));
        let rows = text.lines().filter(|l| l.contains(": ") && !l.starts_with(" obj")).count();
        assert_eq!(rows, m.rows.len());
        assert!(text.ends_with("end\n"));
    }
}
