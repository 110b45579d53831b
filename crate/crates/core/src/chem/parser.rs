//! Reader for the SMILES subset: organic-subset atoms, bracket atoms with
//! isotope / charge / explicit hydrogens, bond symbols `- = # :`, aromatic
//! lowercase atoms, branches, ring-closure digits (including `%nn`), and
//! dot-separated fragments. Stereo markers (`/ \ @ @@`) are accepted and
//! discarded. Errors carry the byte offset of the offending input.

use super::elements::Element;
use super::{Atom, Bond, BondOrder, Molecule};
use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SmilesErrorKind {
    EmptyInput,
    /// `(` without a preceding atom, `)` without a matching `(`, or an
    /// unclosed `(` at end of input.
    UnbalancedBranch,
    /// A ring-closure digit left open at end of input, or a malformed `%nn`.
    UnclosedRingBond,
    /// Matching ring-closure digits carried contradictory bond symbols.
    RingBondMismatch,
    /// A ring closure repeated an existing bond or bonded an atom to itself.
    DuplicateRingBond,
    UnknownElement,
    MalformedBracketAtom,
    /// A bond symbol with nothing to attach it to.
    DanglingBond,
    /// A character with no meaning in this subset.
    UnexpectedCharacter,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
#[error("SMILES error at byte {offset}: {kind:?} in {source_text:?}")]
pub struct SmilesError {
    pub offset: usize,
    pub kind: SmilesErrorKind,
    pub source_text: String,
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    source: &'a str,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, kind: SmilesErrorKind) -> Result<T, SmilesError> {
        Err(SmilesError {
            offset,
            kind,
            source_text: self.source.to_owned(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    /// Consume a run of ASCII digits; `None` if the next byte is not a digit.
    fn digits(&mut self) -> Option<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        let mut value: u32 = 0;
        for &b in &self.bytes[start..self.pos] {
            value = value.saturating_mul(10).saturating_add((b - b'0') as u32);
        }
        Some(value)
    }
}

/// Open ring closure: atom index, optional bond written at the opening site,
/// and the byte offset of the digit (for error reports).
struct OpenRing {
    atom: usize,
    bond: Option<BondOrder>,
    offset: usize,
}

pub fn parse_smiles(smiles: &str) -> Result<Molecule, SmilesError> {
    let trimmed = smiles.trim();
    let lead = smiles.len() - smiles.trim_start().len();
    let mut p = Parser {
        bytes: trimmed.as_bytes(),
        pos: 0,
        source: smiles,
    };
    if trimmed.is_empty() {
        return p.err(0, SmilesErrorKind::EmptyInput);
    }

    let mut atoms: Vec<Atom> = Vec::new();
    let mut bonds: Vec<Bond> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut pending: Option<(BondOrder, usize)> = None;
    let mut branch_stack: Vec<(Option<usize>, usize)> = Vec::new();
    let mut open_rings: BTreeMap<u32, OpenRing> = BTreeMap::new();

    // Attach a freshly read atom to the growing graph.
    fn attach(
        atoms: &[Atom],
        bonds: &mut Vec<Bond>,
        prev: &mut Option<usize>,
        pending: &mut Option<(BondOrder, usize)>,
        new_idx: usize,
    ) {
        if let Some(from) = *prev {
            let order = match pending.take() {
                Some((order, _)) => order,
                None => {
                    if atoms[from].aromatic && atoms[new_idx].aromatic {
                        BondOrder::Aromatic
                    } else {
                        BondOrder::Single
                    }
                }
            };
            bonds.push(Bond {
                a: from,
                b: new_idx,
                order,
            });
        }
        *prev = Some(new_idx);
    }

    while let Some(byte) = p.peek() {
        let at = lead + p.pos;
        match byte {
            b'[' => {
                p.bump();
                let atom = parse_bracket_atom(&mut p, lead)?;
                atoms.push(atom);
                let idx = atoms.len() - 1;
                attach(&atoms, &mut bonds, &mut prev, &mut pending, idx);
            }
            b'A'..=b'Z' => {
                let atom = parse_organic_atom(&mut p, lead)?;
                atoms.push(atom);
                let idx = atoms.len() - 1;
                attach(&atoms, &mut bonds, &mut prev, &mut pending, idx);
            }
            b'b' | b'c' | b'n' | b'o' | b'p' | b's' => {
                p.bump();
                let element = match byte {
                    b'b' => Element::B,
                    b'c' => Element::C,
                    b'n' => Element::N,
                    b'o' => Element::O,
                    b'p' => Element::P,
                    _ => Element::S,
                };
                let mut atom = Atom::new(element);
                atom.aromatic = true;
                atoms.push(atom);
                let idx = atoms.len() - 1;
                attach(&atoms, &mut bonds, &mut prev, &mut pending, idx);
            }
            b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                p.bump();
                if prev.is_none() || pending.is_some() {
                    return p.err(at, SmilesErrorKind::DanglingBond);
                }
                let order = match byte {
                    b'=' => BondOrder::Double,
                    b'#' => BondOrder::Triple,
                    b':' => BondOrder::Aromatic,
                    // `/` and `\` carry stereo we discard; the bond is single.
                    _ => BondOrder::Single,
                };
                pending = Some((order, at));
            }
            b'(' => {
                p.bump();
                if prev.is_none() {
                    return p.err(at, SmilesErrorKind::UnbalancedBranch);
                }
                branch_stack.push((prev, at));
            }
            b')' => {
                p.bump();
                if let Some((pend_order, pend_at)) = pending {
                    let _ = pend_order;
                    return p.err(pend_at, SmilesErrorKind::DanglingBond);
                }
                match branch_stack.pop() {
                    Some((saved, _)) => prev = saved,
                    None => return p.err(at, SmilesErrorKind::UnbalancedBranch),
                }
            }
            b'0'..=b'9' | b'%' => {
                let number = if byte == b'%' {
                    p.bump();
                    let d1 = p.bump();
                    let d2 = p.bump();
                    match (d1, d2) {
                        (Some(a), Some(b)) if a.is_ascii_digit() && b.is_ascii_digit() => {
                            ((a - b'0') as u32) * 10 + (b - b'0') as u32
                        }
                        _ => return p.err(at, SmilesErrorKind::UnclosedRingBond),
                    }
                } else {
                    p.bump();
                    (byte - b'0') as u32
                };
                let current = match prev {
                    Some(i) => i,
                    None => return p.err(at, SmilesErrorKind::DanglingBond),
                };
                match open_rings.remove(&number) {
                    Some(open) => {
                        if open.atom == current {
                            return p.err(at, SmilesErrorKind::DuplicateRingBond);
                        }
                        if bonds.iter().any(|b| {
                            (b.a == open.atom && b.b == current)
                                || (b.a == current && b.b == open.atom)
                        }) {
                            return p.err(at, SmilesErrorKind::DuplicateRingBond);
                        }
                        let here = pending.take().map(|(o, _)| o);
                        let order = match (open.bond, here) {
                            (Some(a), Some(b)) if a != b => {
                                return p.err(at, SmilesErrorKind::RingBondMismatch)
                            }
                            (Some(a), _) => a,
                            (None, Some(b)) => b,
                            (None, None) => {
                                if atoms[open.atom].aromatic && atoms[current].aromatic {
                                    BondOrder::Aromatic
                                } else {
                                    BondOrder::Single
                                }
                            }
                        };
                        bonds.push(Bond {
                            a: open.atom,
                            b: current,
                            order,
                        });
                    }
                    None => {
                        let bond = pending.take().map(|(o, _)| o);
                        open_rings.insert(
                            number,
                            OpenRing {
                                atom: current,
                                bond,
                                offset: at,
                            },
                        );
                    }
                }
            }
            b'.' => {
                p.bump();
                if pending.is_some() {
                    return p.err(at, SmilesErrorKind::DanglingBond);
                }
                prev = None;
            }
            _ => {
                let kind = if byte.is_ascii_alphabetic() {
                    SmilesErrorKind::UnknownElement
                } else {
                    SmilesErrorKind::UnexpectedCharacter
                };
                return p.err(at, kind);
            }
        }
    }

    if let Some((_, pend_at)) = pending {
        return p.err(pend_at, SmilesErrorKind::DanglingBond);
    }
    if let Some((_, open_at)) = branch_stack.first() {
        return p.err(*open_at, SmilesErrorKind::UnbalancedBranch);
    }
    if let Some(open) = open_rings.values().min_by_key(|o| o.offset) {
        return p.err(open.offset, SmilesErrorKind::UnclosedRingBond);
    }

    Ok(Molecule {
        atoms,
        bonds,
        source_smiles: smiles.to_owned(),
        clamped_valence_atoms: Vec::new(),
    })
}

/// Outside brackets only the organic subset is legal; two-letter symbols are
/// limited to `Cl` and `Br`, which resolves `Sc` as sulfur + aromatic carbon.
fn parse_organic_atom(p: &mut Parser, lead: usize) -> Result<Atom, SmilesError> {
    let at = lead + p.pos;
    let first = p.bump().expect("caller checked");
    let second = p.peek();
    let element = match (first, second) {
        (b'C', Some(b'l')) => {
            p.bump();
            Element::CL
        }
        (b'B', Some(b'r')) => {
            p.bump();
            Element::BR
        }
        (b'B', _) => Element::B,
        (b'C', _) => Element::C,
        (b'N', _) => Element::N,
        (b'O', _) => Element::O,
        (b'P', _) => Element::P,
        (b'S', _) => Element::S,
        (b'F', _) => Element::F,
        (b'I', _) => Element::I,
        _ => return p.err(at, SmilesErrorKind::UnknownElement),
    };
    Ok(Atom::new(element))
}

/// Parse the interior of `[...]`; the opening bracket is already consumed.
fn parse_bracket_atom(p: &mut Parser, lead: usize) -> Result<Atom, SmilesError> {
    let isotope = p.digits().map(|v| v.min(u16::MAX as u32) as u16);

    let sym_at = lead + p.pos;
    let (element, aromatic) = match p.peek() {
        Some(b @ b'a'..=b'z') => {
            // Aromatic bracket atoms: c n o p s b plus two-letter se / as.
            let two = if p.bytes.len() >= p.pos + 2 {
                &p.bytes[p.pos..p.pos + 2]
            } else {
                &[][..]
            };
            if two == b"se" {
                p.pos += 2;
                (Element::from_symbol("Se").unwrap(), true)
            } else if two == b"as" {
                p.pos += 2;
                (Element::from_symbol("As").unwrap(), true)
            } else if matches!(b, b'b' | b'c' | b'n' | b'o' | b'p' | b's') {
                p.bump();
                let sym = [b.to_ascii_uppercase()];
                let sym = core::str::from_utf8(&sym).unwrap();
                (Element::from_symbol(sym).unwrap(), true)
            } else {
                return p.err(sym_at, SmilesErrorKind::UnknownElement);
            }
        }
        Some(b'A'..=b'Z') => {
            // Prefer the two-letter symbol when it names an element ([Co] is
            // cobalt, never carbon + aromatic oxygen).
            let one = core::str::from_utf8(&p.bytes[p.pos..p.pos + 1]).unwrap();
            let two = if p.bytes.len() >= p.pos + 2 && p.bytes[p.pos + 1].is_ascii_lowercase() {
                core::str::from_utf8(&p.bytes[p.pos..p.pos + 2]).ok()
            } else {
                None
            };
            if let Some(e) = two.and_then(Element::from_symbol) {
                p.pos += 2;
                (e, false)
            } else if let Some(e) = Element::from_symbol(one) {
                p.pos += 1;
                (e, false)
            } else {
                return p.err(sym_at, SmilesErrorKind::UnknownElement);
            }
        }
        _ => return p.err(sym_at, SmilesErrorKind::MalformedBracketAtom),
    };

    // Chirality markers are accepted and discarded.
    while p.peek() == Some(b'@') {
        p.bump();
    }

    let mut explicit_h: u32 = 0;
    if p.peek() == Some(b'H') && element != Element::H {
        p.bump();
        explicit_h = p.digits().unwrap_or(1);
    } else if element == Element::H {
        // [H] / [2H]: hydrogen as a graph atom; an H-count may still follow.
        if p.peek() == Some(b'H') {
            p.bump();
            explicit_h = p.digits().unwrap_or(1);
        }
    }

    let mut charge: i32 = 0;
    if let Some(sign @ (b'+' | b'-')) = p.peek() {
        p.bump();
        let unit: i32 = if sign == b'+' { 1 } else { -1 };
        if let Some(n) = p.digits() {
            charge = unit * (n.min(15) as i32);
        } else {
            charge = unit;
            while p.peek() == Some(sign) {
                p.bump();
                charge += unit;
            }
        }
    }

    // Atom-class annotation, discarded.
    if p.peek() == Some(b':') {
        p.bump();
        let at = lead + p.pos;
        if p.digits().is_none() {
            return p.err(at, SmilesErrorKind::MalformedBracketAtom);
        }
    }

    let at = lead + p.pos;
    if p.bump() != Some(b']') {
        return p.err(at, SmilesErrorKind::MalformedBracketAtom);
    }

    let mut atom = Atom::new(element);
    atom.aromatic = aromatic;
    atom.formal_charge = charge;
    atom.isotope = isotope;
    atom.explicit_h = Some(explicit_h);
    atom.implicit_h = explicit_h;
    Ok(atom)
}
