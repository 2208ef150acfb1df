//! Newick reading and canonical writing.
//!
//! Branch lengths, internal node labels and `[...]` comments are accepted
//! and discarded.

use std::sync::Arc;

use super::{Clade, TaxonSet, Tree};
use crate::error::{Error, Result};

/// Parses a single `;`-terminated Newick expression into a binary unrooted
/// tree. Both the trifurcating-top and the rooted-binary conventions are
/// accepted.
pub fn parse_newick(text: &str, taxa: Option<Arc<TaxonSet>>) -> Result<Tree> {
    let clade = parse_clade(text)?;
    if let Clade::Leaf(_) = clade {
        return Err(Error::TooFewTaxa { need: 2, got: 1 });
    }
    Tree::from_clade(&clade, taxa)
}

/// Parses a Newick expression into its rooted form without validation.
pub fn parse_clade(text: &str) -> Result<Clade> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let clade = p.subtree()?;
    p.skip_ws();
    if p.peek() != Some(b';') {
        return Err(p.err("expected `;`"));
    }
    p.pos += 1;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input after `;`"));
    }
    Ok(clade)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => self.pos += 1,
                Some(b'[') => {
                    while let Some(c) = self.peek() {
                        self.pos += 1;
                        if c == b']' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    fn subtree(&mut self) -> Result<Clade> {
        self.skip_ws();
        let clade = if self.peek() == Some(b'(') {
            self.pos += 1;
            let mut children = vec![self.subtree()?];
            loop {
                self.skip_ws();
                match self.peek() {
                    Some(b',') => {
                        self.pos += 1;
                        children.push(self.subtree()?);
                    }
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    None => return Err(self.err("unbalanced parenthesis")),
                    Some(_) => return Err(self.err("expected `,` or `)`")),
                }
            }
            // internal label (support value etc.) is ignored
            self.label();
            Clade::Node(children)
        } else {
            let label = self.label();
            if label.is_empty() {
                return Err(self.err("expected a label or `(`"));
            }
            Clade::Leaf(label)
        };
        self.branch_length()?;
        Ok(clade)
    }

    fn label(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if matches!(c, b'(' | b')' | b',' | b';' | b':' | b'[') || c.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn branch_length(&mut self) -> Result<()> {
        self.skip_ws();
        if self.peek() != Some(b':') {
            return Ok(());
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || matches!(c, b'.' | b'-' | b'+' | b'e' | b'E') {
                self.pos += 1;
            } else {
                break;
            }
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        if s.parse::<f64>().is_err() {
            return Err(Error::Syntax { pos: start, msg: "malformed branch length".into() });
        }
        Ok(())
    }
}

pub(super) fn write_canonical(t: &Tree) -> String {
    let taxa = t.taxa();
    if t.n_taxa() == 2 {
        return format!("({},{});", taxa.label(0), taxa.label(1));
    }
    let top = t.neighbors(0)[0];
    let (s, _) = write_node(t, top, None);
    s + ";"
}

/// Returns the rendering of the subtree and its smallest taxon index.
fn write_node(t: &Tree, node: usize, from: Option<usize>) -> (String, usize) {
    if t.is_leaf(node) {
        return (t.taxa().label(node).to_string(), node);
    }
    let mut parts: Vec<(String, usize)> = t
        .neighbors(node)
        .iter()
        .filter(|&&v| Some(v) != from)
        .map(|&v| write_node(t, v, Some(node)))
        .collect();
    parts.sort_by_key(|p| p.1);
    let min = parts[0].1;
    let body: Vec<String> = parts.into_iter().map(|p| p.0).collect();
    (format!("({})", body.join(",")), min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_conventions_agree() {
        let a = parse_newick("((a,b),(c,d));", None).unwrap();
        let b = parse_newick("(a,b,(c,d));", None).unwrap();
        assert!(a.is_isomorphic(&b));
        assert_eq!(a.to_newick(), "(a,b,(c,d));");
        assert_eq!(parse_newick("((c,d),(b,a));", None).unwrap().to_newick(), "(a,b,(c,d));");
    }

    #[test]
    fn syntax_errors_report_position() {
        match parse_newick("((a,b),(c,d)", None) {
            Err(Error::Syntax { msg, .. }) => assert!(msg.contains("unbalanced")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_newick("(a,b)", None), Err(Error::Syntax { .. })));
        assert!(matches!(parse_newick("(a,,b);", None), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse_newick("(a,b);x", None), Err(Error::Syntax { .. })));
    }

    #[test]
    fn label_errors() {
        let taxa = Arc::new(TaxonSet::new(["a", "b", "c", "d"]).unwrap());
        assert_eq!(
            parse_newick("(a,b,(c,x));", Some(taxa.clone())).unwrap_err(),
            Error::UnknownLabel("x".into())
        );
        assert_eq!(
            parse_newick("(a,b,(c,a));", Some(taxa.clone())).unwrap_err(),
            Error::DuplicateLabel("a".into())
        );
        assert_eq!(
            parse_newick("(a,b,c);", Some(taxa)).unwrap_err(),
            Error::MissingLabel("d".into())
        );
        assert_eq!(
            parse_newick("(a,b,(c,a));", None).unwrap_err(),
            Error::DuplicateLabel("a".into())
        );
    }

    #[test]
    fn non_binary_rejected() {
        assert_eq!(parse_newick("(a,b,c,d);", None).unwrap_err(), Error::NonBinary(4));
        assert_eq!(parse_newick("(a,b,(c,d,e));", None).unwrap_err(), Error::NonBinary(4));
        assert_eq!(parse_newick("(a,b,(c));", None).unwrap_err(), Error::NonBinary(2));
    }

    #[test]
    fn lengths_and_comments_ignored() {
        let t = parse_newick("((a:0.1,b:2)90:1e-3,[note](c:1,d:1));", None).unwrap();
        assert_eq!(t.to_newick(), "(a,b,(c,d));");
    }
}
