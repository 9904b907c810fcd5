use std::collections::BTreeSet;
use std::fmt::Write;

use super::term::{Kind, Name, Term};

pub(crate) const KEYWORDS: &[&str] = &["Nat", "p1", "p2", "rec", "S", "rand", "fixr", "srand"];

/// Surface syntax using the binder hints, renamed where they would clash.
pub fn print_term(t: &Term) -> String {
    Printer::new(t, false).run(t)
}

/// Surface syntax with binders named by depth; alpha-equivalent terms print
/// identically.
pub fn print_canonical(t: &Term) -> String {
    Printer::new(t, true).run(t)
}

struct Printer {
    canonical: bool,
    free: BTreeSet<Name>,
    scope: Vec<String>,
    out: String,
}

// precedence levels
const TOP: u8 = 0;
const CHOICE_LEFT: u8 = 1;
const FUN: u8 = 2;
const ARG: u8 = 3;

impl Printer {
    fn new(t: &Term, canonical: bool) -> Self {
        Printer { canonical, free: t.free_names(), scope: Vec::new(), out: String::new() }
    }

    fn run(mut self, t: &Term) -> String {
        self.go(t, TOP);
        self.out
    }

    fn fresh(&self, hint: &str) -> String {
        let base: String = if self.canonical {
            "x".to_string()
        } else {
            let cleaned: String =
                hint.chars().filter(|c| c.is_ascii_alphanumeric() || *c == '_' || *c == '\'').collect();
            match cleaned.chars().next() {
                Some(c) if c.is_ascii_alphabetic() || c == '_' => cleaned,
                _ => "x".to_string(),
            }
        };
        let taken = |n: &str| KEYWORDS.contains(&n) || self.free.contains(n) || self.scope.iter().any(|s| s == n);
        if !self.canonical && !taken(&base) {
            return base;
        }
        let mut i = if self.canonical { self.scope.len() } else { 1 };
        loop {
            let cand = format!("{base}{i}");
            if !taken(&cand) {
                return cand;
            }
            i += 1;
        }
    }

    fn go(&mut self, t: &Term, prec: u8) {
        match t.kind() {
            Kind::Bound(i) => {
                let idx = self.scope.len().checked_sub(1 + *i as usize);
                match idx {
                    Some(k) => {
                        let n = self.scope[k].clone();
                        self.out.push_str(&n)
                    }
                    // dangling index: not expressible in the surface syntax
                    None => write!(self.out, "#{i}").unwrap(),
                }
            }
            Kind::Free(n) => self.out.push_str(n),
            Kind::Num(n) => write!(self.out, "{n}").unwrap(),
            Kind::Proj1 => self.out.push_str("p1"),
            Kind::Proj2 => self.out.push_str("p2"),
            Kind::Rec => self.out.push_str("rec"),
            Kind::Succ => self.out.push('S'),
            Kind::Rand => self.out.push_str("rand"),
            Kind::FixRan => self.out.push_str("fixr"),
            Kind::SRand => self.out.push_str("srand"),
            Kind::Lam(hint, ty, body) => {
                let paren = prec != TOP;
                if paren {
                    self.out.push('(');
                }
                let name = self.fresh(hint);
                write!(self.out, "\\{name}:{ty}. ").unwrap();
                self.scope.push(name);
                self.go(body, TOP);
                self.scope.pop();
                if paren {
                    self.out.push(')');
                }
            }
            Kind::App(f, a) => {
                let paren = prec >= ARG;
                if paren {
                    self.out.push('(');
                }
                self.go(f, FUN);
                self.out.push(' ');
                self.go(a, ARG);
                if paren {
                    self.out.push(')');
                }
            }
            Kind::Pair(l, r) => {
                self.out.push('<');
                self.go(l, TOP);
                let mut rest = r;
                while let Kind::Pair(a, b) = rest.kind() {
                    self.out.push_str(", ");
                    self.go(a, TOP);
                    rest = b;
                }
                self.out.push_str(", ");
                self.go(rest, TOP);
                self.out.push('>');
            }
            Kind::Choice(l, r) => {
                let paren = prec != TOP;
                if paren {
                    self.out.push('(');
                }
                self.go(l, CHOICE_LEFT);
                self.out.push_str(" (+) ");
                self.go(r, TOP);
                if paren {
                    self.out.push(')');
                }
            }
        }
    }
}
