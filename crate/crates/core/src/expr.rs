//! Lattice expressions such as `U+U+E8+A1^5`, `U(2)`, `A1(-1)+A1^4`, `<-4>`.
//!
//! Standard bases: `U` uses `e, f` with `e² = f² = 0`, `(e, f) = 1`; ADE
//! lattices use simple roots in Bourbaki order with norm −2.
//! `D_n` forks at `α_{n−2}` (joined to `α_{n−1}` and `α_n`); `E_n` has the
//! chain `α1 − α3 − α4 − … − α_n` with `α2` attached to `α4`.

use crate::error::{LatticeError, Result};
use crate::lattice::{GramLattice, Summand};
use crate::matrix::IntMatrix;

/// Negated Cartan matrix of an ADE type.
pub fn ade_gram(family: char, n: usize) -> Result<IntMatrix> {
    let edges = ade_edges(family, n)?;
    let mut g = IntMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = -2;
    }
    for (a, b) in edges {
        g[(a, b)] = 1;
        g[(b, a)] = 1;
    }
    Ok(g)
}

/// Dynkin edges (0-based) of an ADE diagram.
pub fn ade_edges(family: char, n: usize) -> Result<Vec<(usize, usize)>> {
    match family {
        'A' if n >= 1 => Ok((1..n).map(|i| (i - 1, i)).collect()),
        'D' if n >= 4 => {
            let mut e: Vec<_> = (1..n - 1).map(|i| (i - 1, i)).collect();
            e.push((n - 3, n - 1));
            Ok(e)
        }
        'E' if (6..=8).contains(&n) => {
            let mut e = vec![(0, 2), (1, 3)];
            e.extend((3..n).map(|i| (i - 1, i)));
            Ok(e)
        }
        'E' => Err(LatticeError::Unsupported(format!("E{n}: only E6, E7, E8 exist"))),
        'D' => Err(LatticeError::Unsupported(format!("D{n}: need n >= 4"))),
        'A' => Err(LatticeError::Unsupported("A0".into())),
        _ => Err(LatticeError::Parse(format!("unknown family `{family}`"))),
    }
}

pub fn hyperbolic(m: i64) -> Result<GramLattice> {
    let label = if m == 1 { "U".to_string() } else { format!("U({m})") };
    GramLattice::new(IntMatrix::from_rows(vec![vec![0, m], vec![m, 0]])?, label)
}

pub fn ade(family: char, n: usize) -> Result<GramLattice> {
    GramLattice::new(ade_gram(family, n)?, format!("{family}{n}"))
}

/// Parse and build a lattice expression.
pub fn make_standard(spec: &str) -> Result<GramLattice> {
    let norm = normalize(spec);
    if norm.is_empty() {
        return Err(LatticeError::Parse("empty expression".into()));
    }
    let mut p = Parser { s: norm.as_bytes(), pos: 0 };
    let l = p.sum()?;
    if p.pos != p.s.len() {
        return Err(LatticeError::Parse(format!("unexpected `{}` in `{spec}`", &norm[p.pos..])));
    }
    Ok(l.relabeled(spec.trim()))
}

fn normalize(s: &str) -> String {
    const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    let mut out = String::new();
    let mut in_sup = false;
    for c in s.chars() {
        if let Some(d) = SUP.iter().position(|&x| x == c) {
            if !in_sup {
                out.push('^');
            }
            in_sup = true;
            out.push(char::from(b'0' + d as u8));
            continue;
        }
        in_sup = false;
        match c {
            ' ' | '\t' | '_' => {}
            '⊕' => out.push('+'),
            '−' | '–' => out.push('-'),
            '⟨' => out.push('<'),
            '⟩' => out.push('>'),
            '₀'..='₉' => out.push(char::from(b'0' + (c as u32 - '₀' as u32) as u8)),
            _ => out.push(c),
        }
    }
    out
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<i64> {
        let start = self.pos;
        if matches!(self.peek(), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
        txt.parse().map_err(|_| LatticeError::Parse(format!("expected integer at offset {start}")))
    }

    fn uint(&mut self) -> Result<usize> {
        if !matches!(self.peek(), Some(b'0'..=b'9')) {
            return Err(LatticeError::Parse(format!("expected index at offset {}", self.pos)));
        }
        let v = self.int()?;
        usize::try_from(v).map_err(|_| LatticeError::Parse("index out of range".into()))
    }

    fn sum(&mut self) -> Result<GramLattice> {
        let mut parts = vec![self.term()?];
        while self.eat(b'+') {
            parts.push(self.term()?);
        }
        if parts.len() == 1 {
            return Ok(parts.pop().unwrap());
        }
        let label = parts.iter().map(|p| p.label().to_string()).collect::<Vec<_>>().join("+");
        let refs: Vec<&GramLattice> = parts.iter().collect();
        GramLattice::direct_sum(&refs, label)
    }

    fn term(&mut self) -> Result<GramLattice> {
        let mut l = self.atom()?;
        loop {
            if self.eat(b'(') {
                let a = self.int()?;
                if !self.eat(b')') {
                    return Err(LatticeError::Parse("unclosed rescale".into()));
                }
                let label = format!("{}({a})", wrap(l.label()));
                l = l.rescaled(a)?.relabeled(label);
            } else if self.eat(b'^') {
                let m = self.uint()?;
                if m == 0 {
                    return Err(LatticeError::Parse("power must be positive".into()));
                }
                let copies: Vec<&GramLattice> = std::iter::repeat_n(&l, m).collect();
                let label = format!("{}^{m}", wrap(l.label()));
                l = GramLattice::direct_sum(&copies, label)?;
            } else {
                return Ok(l);
            }
        }
    }

    fn atom(&mut self) -> Result<GramLattice> {
        match self.peek() {
            Some(b'U') => {
                self.pos += 1;
                hyperbolic(1)
            }
            Some(c @ (b'A' | b'D' | b'E')) => {
                self.pos += 1;
                let n = self.uint()?;
                ade(c as char, n)
            }
            Some(b'<') => {
                self.pos += 1;
                let k = self.int()?;
                if !self.eat(b'>') {
                    return Err(LatticeError::Parse("unclosed <k>".into()));
                }
                if k == 0 {
                    return Err(LatticeError::Degenerate);
                }
                GramLattice::new(IntMatrix::diagonal(&[k]), format!("<{k}>"))
            }
            Some(b'(') => {
                self.pos += 1;
                let l = self.sum()?;
                if !self.eat(b')') {
                    return Err(LatticeError::Parse("unbalanced parentheses".into()));
                }
                let label = l.label().to_string();
                let summands = vec![Summand::new(label.clone(), 0, l.rank())];
                GramLattice::with_summands(l.gram().clone(), label, summands)
            }
            Some(c) => Err(LatticeError::Parse(format!("unexpected `{}` at offset {}", c as char, self.pos))),
            None => Err(LatticeError::Parse("unexpected end of expression".into())),
        }
    }
}

fn wrap(label: &str) -> String {
    if label.contains('+') {
        format!("({label})")
    } else {
        label.to_string()
    }
}
