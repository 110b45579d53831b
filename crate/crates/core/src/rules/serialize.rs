//! Rule set serialization back to the DSL. Parsing the rendered text yields
//! an equal rule set, so transcribed rules stay auditable as plain text.
//! (JSON export is derived `Serialize` on the types — one way only.)

use super::{Expr, Provenance, RuleKind, RuleSet};
use alloc::format;
use alloc::string::String;
use core::fmt::Write;

impl RuleSet {
    /// Render as DSL text: task, externals, then rules in order with
    /// `provenance` directives where the origin changes.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        if !self.task.is_empty() {
            let _ = writeln!(out, "task \"{}\"", self.task);
        }
        for ext in &self.externals {
            let _ = writeln!(out, "external {} unit \"{}\"", ext.id, ext.unit);
        }
        let mut current = Provenance::Scientific;
        for rule in &self.rules {
            if rule.provenance != current {
                current = rule.provenance;
                let directive = match current {
                    Provenance::Scientific => "scientific",
                    Provenance::DataPattern => "data_pattern",
                };
                let _ = writeln!(out, "provenance {directive}");
            }
            let body = render_expr(&rule.expr, 0);
            match rule.kind {
                RuleKind::Predicate => {
                    let _ = writeln!(out, "rule {}: {}", rule.id, body);
                }
                RuleKind::Numeric => {
                    let _ = writeln!(out, "rule {}: numeric {}", rule.id, body);
                }
            }
        }
        out
    }
}

/// Precedence levels: or = 1, and = 2, not = 3, atoms = 4. A subexpression
/// is parenthesized when its level is below the context's.
fn render_expr(expr: &Expr, context: u8) -> String {
    let (text, level) = match expr {
        Expr::Number(v) => (format!("{v}"), 4),
        Expr::Descriptor(id) | Expr::External(id) => (id.clone(), 4),
        Expr::Substructure(p) => (format!("substructure(\"{p}\")"), 4),
        Expr::Cmp { op, lhs, rhs } => (
            format!(
                "{} {} {}",
                render_expr(lhs, 4),
                op.symbol(),
                render_expr(rhs, 4)
            ),
            4,
        ),
        Expr::Not(inner) => (format!("not {}", render_expr(inner, 3)), 3),
        Expr::And(a, b) => (
            format!("{} and {}", render_expr(a, 2), render_expr(b, 2)),
            2,
        ),
        Expr::Or(a, b) => (format!("{} or {}", render_expr(a, 1), render_expr(b, 1)), 1),
    };
    if level < context {
        format!("({text})")
    } else {
        text
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_rules;

    fn round_trip(src: &str) {
        let first = parse_rules(src).unwrap();
        let rendered = first.to_dsl();
        let second = parse_rules(&rendered).unwrap();
        assert_eq!(
            first, second,
            "round trip changed the rule set:\n{rendered}"
        );
    }

    #[test]
    fn round_trips() {
        round_trip("rule a: molecular_weight <= 450\n");
        round_trip("rule a: numeric hba_count\n");
        round_trip("external logp unit \"1\"\nrule a: logp > 2.5\n");
        round_trip("task \"bbbp\"\nrule a: hbd_count < 3 and hba_count < 8\n");
        round_trip("rule a: not (ring_count == 0 or hbd_count == 0)\n");
        round_trip("rule a: (hbd_count < 1 or hba_count < 2) and ring_count < 3\n");
        round_trip("rule a: substructure(\"C#N\") or substructure(\"C(=O)O\")\n");
        round_trip(
            "rule s: ring_count > 0\nprovenance data_pattern\nrule d: hbd_count < 2\nprovenance scientific\nrule s2: hba_count < 9\n",
        );
        round_trip("rule neg: net_formal_charge == -2\n");
        round_trip("rule frac: molecular_weight < 123.456\n");
    }

    #[test]
    fn rendering_is_stable() {
        let src = "rule a: not ring_count == 0 and (hbd_count < 1 or substructure(\"N\"))\n";
        let once = parse_rules(src).unwrap().to_dsl();
        let twice = parse_rules(&once).unwrap().to_dsl();
        assert_eq!(once, twice);
    }

    #[test]
    fn json_export_is_available() {
        let rs = parse_rules("rule a: hbd_count < 3\n").unwrap();
        let json = serde_json::to_string(&rs).unwrap();
        assert!(json.contains("\"hbd_count\""));
        assert!(json.contains("\"predicate\""));
    }
}
