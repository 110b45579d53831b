//! Rule file parser. Line oriented: each line is a comment, a declaration
//! (`external`, `task`, `provenance`), or a rule. Externals may be declared
//! anywhere in the file; they are collected before rules are resolved.
//! Patterns are compiled and validated here so evaluation cannot fail on
//! malformed SMILES.
//!
//! ```text
//! # comment
//! task "bbbp"
//! external logp unit "1"
//! rule r1: molecular_weight <= 450 and not substructure("C(=O)O")
//! rule r2: numeric logp
//! provenance data_pattern
//! rule r3: hbd_count < 3 or ring_count == 0
//! ```

use super::{CmpOp, Expr, ExternalDecl, Provenance, Rule, RuleKind, RuleSet};
use crate::chem::{self, Molecule};
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum RuleParseError {
    #[error("syntax error at line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("line {line}: unknown descriptor or external `{name}`")]
    UnknownDescriptor { line: usize, name: String },
    #[error("line {line}: rule id `{id}` already declared")]
    DuplicateRuleId { line: usize, id: String },
    #[error("line {line}: external `{id}` already declared")]
    DuplicateExternal { line: usize, id: String },
    #[error("line {line}: external `{id}` shadows a shipped descriptor")]
    ExternalShadowsDescriptor { line: usize, id: String },
    #[error("line {line}: bad pattern {pattern:?}: {reason}")]
    BadPattern {
        line: usize,
        pattern: String,
        reason: String,
    },
}

#[derive(Clone, PartialEq, Debug)]
enum Token {
    Ident(String),
    Number(f64),
    Str(String),
    Colon,
    LParen,
    RParen,
    Cmp(CmpOp),
}

/// Tokens of one line with 1-based column positions. Stops at an unquoted
/// `#`. Strings have no escape sequences: every byte up to the closing quote
/// is literal, so SMILES backslashes survive.
fn tokenize(line: &str, line_no: usize) -> Result<Vec<(Token, usize)>, RuleParseError> {
    let bytes = line.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let syntax = |i: usize, message: String| RuleParseError::Syntax {
        line: line_no,
        col: i + 1,
        message,
    };
    while i < bytes.len() {
        let b = bytes[i];
        let col = i + 1;
        match b {
            b' ' | b'\t' | b'\r' => i += 1,
            b'#' => break,
            b':' => {
                tokens.push((Token::Colon, col));
                i += 1;
            }
            b'(' => {
                tokens.push((Token::LParen, col));
                i += 1;
            }
            b')' => {
                tokens.push((Token::RParen, col));
                i += 1;
            }
            b'<' | b'>' => {
                let (op, step) = if bytes.get(i + 1) == Some(&b'=') {
                    (if b == b'<' { CmpOp::Le } else { CmpOp::Ge }, 2)
                } else {
                    (if b == b'<' { CmpOp::Lt } else { CmpOp::Gt }, 1)
                };
                tokens.push((Token::Cmp(op), col));
                i += step;
            }
            b'=' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    tokens.push((Token::Cmp(CmpOp::Eq), col));
                    i += 2;
                } else {
                    return Err(syntax(i, "expected `==`".to_string()));
                }
            }
            b'"' => {
                let start = i + 1;
                let mut j = start;
                while j < bytes.len() && bytes[j] != b'"' {
                    j += 1;
                }
                if j == bytes.len() {
                    return Err(syntax(i, "unterminated string".to_string()));
                }
                tokens.push((Token::Str(line[start..j].to_string()), col));
                i = j + 1;
            }
            b'0'..=b'9' | b'-' => {
                if b == b'-' && !bytes.get(i + 1).is_some_and(|c| c.is_ascii_digit()) {
                    return Err(syntax(i, "`-` must start a number".to_string()));
                }
                let start = i;
                i += 1;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                let text = &line[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, format!("bad number `{text}`")))?;
                tokens.push((Token::Number(value), col));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push((Token::Ident(line[start..i].to_string()), col));
            }
            _ => {
                return Err(syntax(
                    i,
                    format!("unexpected character `{}`", &line[i..i + 1]),
                ))
            }
        }
    }
    Ok(tokens)
}

struct LineCursor {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl LineCursor {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or(self.end_col)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, message: &str) -> Result<T, RuleParseError> {
        Err(RuleParseError::Syntax {
            line: self.line,
            col: self.col(),
            message: message.to_string(),
        })
    }

    fn expect_ident(&mut self) -> Result<String, RuleParseError> {
        if matches!(self.peek(), Some(Token::Ident(_))) {
            match self.next() {
                Some(Token::Ident(s)) => Ok(s),
                _ => unreachable!("peeked an identifier"),
            }
        } else {
            self.syntax("expected an identifier")
        }
    }

    fn expect(&mut self, token: &Token, what: &str) -> Result<(), RuleParseError> {
        if self.peek() == Some(token) {
            self.pos += 1;
            Ok(())
        } else {
            self.syntax(what)
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token::Ident(s)) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
}

/// Identifier environment shared by expression parsing.
struct Names<'a> {
    externals: &'a BTreeSet<String>,
}

impl Names<'_> {
    fn resolve(&self, name: &str, line: usize) -> Result<Expr, RuleParseError> {
        if chem::DESCRIPTOR_IDS.contains(&name) {
            Ok(Expr::Descriptor(name.to_string()))
        } else if self.externals.contains(name) {
            Ok(Expr::External(name.to_string()))
        } else {
            Err(RuleParseError::UnknownDescriptor {
                line,
                name: name.to_string(),
            })
        }
    }
}

pub fn parse_rules(source: &str) -> Result<RuleSet, RuleParseError> {
    // Pass 1: external declarations, so use may precede declaration.
    let mut externals: Vec<ExternalDecl> = Vec::new();
    let mut external_ids: BTreeSet<String> = BTreeSet::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize(line, line_no)?;
        let mut cursor = LineCursor {
            end_col: line.len() + 1,
            tokens,
            pos: 0,
            line: line_no,
        };
        if !cursor.eat_keyword("external") {
            continue;
        }
        let id = cursor.expect_ident()?;
        if chem::DESCRIPTOR_IDS.contains(&id.as_str()) {
            return Err(RuleParseError::ExternalShadowsDescriptor { line: line_no, id });
        }
        if !external_ids.insert(id.clone()) {
            return Err(RuleParseError::DuplicateExternal { line: line_no, id });
        }
        if !cursor.eat_keyword("unit") {
            return cursor.syntax("expected `unit`");
        }
        let unit = match cursor.next() {
            Some(Token::Str(s)) => s,
            _ => return cursor.syntax("expected a quoted unit"),
        };
        if cursor.peek().is_some() {
            return cursor.syntax("unexpected trailing tokens");
        }
        externals.push(ExternalDecl { id, unit });
    }

    // Pass 2: rules and directives, in order.
    let names = Names {
        externals: &external_ids,
    };
    let mut rules: Vec<Rule> = Vec::new();
    let mut rule_ids: BTreeSet<String> = BTreeSet::new();
    let mut patterns: BTreeMap<String, Molecule> = BTreeMap::new();
    let mut provenance = Provenance::Scientific;
    let mut task = String::new();

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize(line, line_no)?;
        if tokens.is_empty() {
            continue;
        }
        let mut cursor = LineCursor {
            end_col: line.len() + 1,
            tokens,
            pos: 0,
            line: line_no,
        };

        if cursor.eat_keyword("external") {
            continue; // handled in pass 1
        }
        if cursor.eat_keyword("task") {
            task = match cursor.next() {
                Some(Token::Str(s)) => s,
                Some(Token::Ident(s)) => s,
                _ => return cursor.syntax("expected a task name"),
            };
            if cursor.peek().is_some() {
                return cursor.syntax("unexpected trailing tokens");
            }
            continue;
        }
        if cursor.eat_keyword("provenance") {
            let which = cursor.expect_ident()?;
            provenance = match which.as_str() {
                "scientific" => Provenance::Scientific,
                "data_pattern" => Provenance::DataPattern,
                _ => return cursor.syntax("expected `scientific` or `data_pattern`"),
            };
            if cursor.peek().is_some() {
                return cursor.syntax("unexpected trailing tokens");
            }
            continue;
        }
        if !cursor.eat_keyword("rule") {
            return cursor.syntax("expected `rule`, `external`, `task`, or `provenance`");
        }

        let id = cursor.expect_ident()?;
        if !rule_ids.insert(id.clone()) {
            return Err(RuleParseError::DuplicateRuleId { line: line_no, id });
        }
        cursor.expect(&Token::Colon, "expected `:`")?;

        let (kind, expr) = if cursor.eat_keyword("numeric") {
            let expr = parse_operand(&mut cursor, &names)?;
            (RuleKind::Numeric, expr)
        } else {
            let expr = parse_or(&mut cursor, &names, &mut patterns)?;
            (RuleKind::Predicate, expr)
        };
        if cursor.peek().is_some() {
            return cursor.syntax("unexpected trailing tokens");
        }
        rules.push(Rule {
            id,
            kind,
            provenance,
            expr,
        });
    }

    Ok(RuleSet {
        task,
        externals,
        rules,
        patterns,
    })
}

fn parse_or(
    cursor: &mut LineCursor,
    names: &Names,
    patterns: &mut BTreeMap<String, Molecule>,
) -> Result<Expr, RuleParseError> {
    let mut expr = parse_and(cursor, names, patterns)?;
    while cursor.eat_keyword("or") {
        let rhs = parse_and(cursor, names, patterns)?;
        expr = Expr::Or(Box::new(expr), Box::new(rhs));
    }
    Ok(expr)
}

fn parse_and(
    cursor: &mut LineCursor,
    names: &Names,
    patterns: &mut BTreeMap<String, Molecule>,
) -> Result<Expr, RuleParseError> {
    let mut expr = parse_unary(cursor, names, patterns)?;
    while cursor.eat_keyword("and") {
        let rhs = parse_unary(cursor, names, patterns)?;
        expr = Expr::And(Box::new(expr), Box::new(rhs));
    }
    Ok(expr)
}

fn parse_unary(
    cursor: &mut LineCursor,
    names: &Names,
    patterns: &mut BTreeMap<String, Molecule>,
) -> Result<Expr, RuleParseError> {
    if cursor.eat_keyword("not") {
        let inner = parse_unary(cursor, names, patterns)?;
        return Ok(Expr::Not(Box::new(inner)));
    }
    parse_atom(cursor, names, patterns)
}

/// A grouped predicate, a substructure test, or a comparison.
fn parse_atom(
    cursor: &mut LineCursor,
    names: &Names,
    patterns: &mut BTreeMap<String, Molecule>,
) -> Result<Expr, RuleParseError> {
    if cursor.peek() == Some(&Token::LParen) {
        cursor.pos += 1;
        let inner = parse_or(cursor, names, patterns)?;
        cursor.expect(&Token::RParen, "expected `)`")?;
        return Ok(inner);
    }
    if cursor.at_keyword("substructure") {
        let line = cursor.line;
        cursor.pos += 1;
        cursor.expect(&Token::LParen, "expected `(`")?;
        let pattern = match cursor.next() {
            Some(Token::Str(s)) => s,
            _ => return cursor.syntax("expected a quoted SMILES pattern"),
        };
        cursor.expect(&Token::RParen, "expected `)`")?;
        compile_pattern(&pattern, line, patterns)?;
        return Ok(Expr::Substructure(pattern));
    }

    // comparison: operand op operand
    let lhs = parse_operand(cursor, names)?;
    let op = match cursor.peek() {
        Some(&Token::Cmp(op)) => {
            cursor.pos += 1;
            op
        }
        _ => return cursor.syntax("expected a comparison operator"),
    };
    let rhs = parse_operand(cursor, names)?;
    Ok(Expr::Cmp {
        op,
        lhs: Box::new(lhs),
        rhs: Box::new(rhs),
    })
}

fn parse_operand(cursor: &mut LineCursor, names: &Names) -> Result<Expr, RuleParseError> {
    let line = cursor.line;
    match cursor.peek() {
        Some(Token::Number(_)) | Some(Token::Ident(_)) => match cursor.next() {
            Some(Token::Number(v)) => Ok(Expr::Number(v)),
            Some(Token::Ident(name)) => names.resolve(&name, line),
            _ => unreachable!("peeked an operand"),
        },
        _ => cursor.syntax("expected a number or identifier"),
    }
}

/// Parse, perceive, and validate a pattern once; evaluation never re-parses.
fn compile_pattern(
    pattern: &str,
    line: usize,
    patterns: &mut BTreeMap<String, Molecule>,
) -> Result<(), RuleParseError> {
    if patterns.contains_key(pattern) {
        return Ok(());
    }
    let bad = |reason: String| RuleParseError::BadPattern {
        line,
        pattern: pattern.to_string(),
        reason,
    };
    let mol = Molecule::from_smiles(pattern).map_err(|e| bad(format!("{e}")))?;
    let heavy = mol.heavy_atom_indices().count();
    if heavy > chem::MAX_PATTERN_HEAVY_ATOMS {
        return Err(bad(format!(
            "{heavy} heavy atoms exceeds the matcher limit"
        )));
    }
    let (_, components) = mol.components();
    if components != 1 {
        return Err(bad(
            "pattern must be a single connected fragment".to_string()
        ));
    }
    patterns.insert(pattern.to_string(), mol);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{CmpOp, Expr, Provenance, RuleKind};
    use super::*;

    #[test]
    fn parses_a_small_file() {
        let src = r#"
# lipophilicity heuristics
task "bbbp"
external logp unit "1"
rule light: molecular_weight <= 450
rule balanced: hbd_count < 3 and hba_count < 8
rule no_acid: not substructure("C(=O)O")
rule raw_logp: numeric logp
provenance data_pattern
rule ring_or_small: ring_count > 0 or heavy_atom_count < 10
"#;
        let rs = parse_rules(src).unwrap();
        assert_eq!(rs.task, "bbbp");
        assert_eq!(rs.externals.len(), 1);
        assert_eq!(rs.rules.len(), 5);
        assert_eq!(rs.feature_len(), 5);
        assert_eq!(rs.rules[0].kind, RuleKind::Predicate);
        assert_eq!(rs.rules[3].kind, RuleKind::Numeric);
        assert_eq!(rs.rules[3].provenance, Provenance::Scientific);
        assert_eq!(rs.rules[4].provenance, Provenance::DataPattern);
        assert!(rs.patterns.contains_key("C(=O)O"));
    }

    #[test]
    fn externals_may_be_declared_after_use() {
        let src = "rule r: numeric logp\nexternal logp unit \"1\"\n";
        assert!(parse_rules(src).is_ok());
    }

    #[test]
    fn precedence_and_grouping() {
        let rs = parse_rules("rule r: hbd_count < 1 or hba_count < 2 and ring_count < 3").unwrap();
        // `and` binds tighter than `or`.
        match &rs.rules[0].expr {
            Expr::Or(lhs, rhs) => {
                assert!(matches!(**lhs, Expr::Cmp { .. }));
                assert!(matches!(**rhs, Expr::And(..)));
            }
            other => panic!("expected or at the top, got {other:?}"),
        }

        let rs =
            parse_rules("rule r: (hbd_count < 1 or hba_count < 2) and ring_count < 3").unwrap();
        assert!(matches!(&rs.rules[0].expr, Expr::And(..)));
    }

    #[test]
    fn not_binds_tighter_than_and() {
        let rs = parse_rules("rule r: not ring_count == 0 and hbd_count == 0").unwrap();
        match &rs.rules[0].expr {
            Expr::And(lhs, _) => assert!(matches!(**lhs, Expr::Not(..))),
            other => panic!("expected and, got {other:?}"),
        }
    }

    #[test]
    fn comparison_operators() {
        for (text, op) in [
            ("<", CmpOp::Lt),
            ("<=", CmpOp::Le),
            (">", CmpOp::Gt),
            (">=", CmpOp::Ge),
            ("==", CmpOp::Eq),
        ] {
            let rs = parse_rules(&format!("rule r: molecular_weight {text} 100")).unwrap();
            match &rs.rules[0].expr {
                Expr::Cmp { op: got, .. } => assert_eq!(*got, op),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn negative_literals() {
        let rs = parse_rules("rule anion: net_formal_charge == -1").unwrap();
        match &rs.rules[0].expr {
            Expr::Cmp { rhs, .. } => assert_eq!(**rhs, Expr::Number(-1.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_inside_pattern_is_not_a_comment() {
        let rs = parse_rules("rule nitrile: substructure(\"C#N\") # a comment").unwrap();
        assert_eq!(rs.rules[0].expr, Expr::Substructure("C#N".to_string()));
    }

    #[test]
    fn error_positions() {
        match parse_rules("rule r: molecular_weight <") {
            Err(RuleParseError::Syntax { line, col, .. }) => {
                assert_eq!(line, 1);
                assert_eq!(col, 27);
            }
            other => panic!("{other:?}"),
        }
        match parse_rules("rule r molecular_weight < 1") {
            Err(RuleParseError::Syntax { line: 1, col, .. }) => assert_eq!(col, 8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_descriptor() {
        match parse_rules("rule r: logd < 3") {
            Err(RuleParseError::UnknownDescriptor { name, line: 1 }) => assert_eq!(name, "logd"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_rule_id() {
        let src = "rule r: hbd_count < 3\nrule r: hba_count < 4\n";
        assert!(matches!(
            parse_rules(src),
            Err(RuleParseError::DuplicateRuleId { line: 2, .. })
        ));
    }

    #[test]
    fn duplicate_and_shadowing_externals() {
        let src = "external logp unit \"1\"\nexternal logp unit \"1\"\n";
        assert!(matches!(
            parse_rules(src),
            Err(RuleParseError::DuplicateExternal { line: 2, .. })
        ));
        assert!(matches!(
            parse_rules("external ring_count unit \"1\""),
            Err(RuleParseError::ExternalShadowsDescriptor { .. })
        ));
    }

    #[test]
    fn bad_pattern_reports_the_reason() {
        match parse_rules("rule r: substructure(\"C1CC\")") {
            Err(RuleParseError::BadPattern { pattern, .. }) => assert_eq!(pattern, "C1CC"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_rules("rule r: substructure(\"C.C\")"),
            Err(RuleParseError::BadPattern { .. })
        ));
    }

    #[test]
    fn numeric_rules_take_a_single_operand() {
        assert!(parse_rules("rule r: numeric molecular_weight").is_ok());
        assert!(matches!(
            parse_rules("rule r: numeric molecular_weight < 3"),
            Err(RuleParseError::Syntax { .. })
        ));
        // A bare descriptor is not a predicate.
        assert!(matches!(
            parse_rules("rule r: molecular_weight"),
            Err(RuleParseError::Syntax { .. })
        ));
    }

    #[test]
    fn no_arithmetic_operators() {
        assert!(matches!(
            parse_rules("rule r: molecular_weight + 1 < 3"),
            Err(RuleParseError::Syntax { .. })
        ));
    }
}
