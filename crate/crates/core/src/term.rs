//! Named term syntax of the Calculus of Constructions.
//!
//! Terms are immutable and cheaply clonable (`Arc` children). Bound variables
//! carry the name written by the user; every operation that could capture
//! renames binders instead. Comparisons and substitution go through the
//! nameless form in [`crate::db`].

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::db::Db;

/// An identifier. Trailing digits are read as a numeric suffix, so `x13`
/// has base `x` and suffix `13`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: impl AsRef<str>) -> Name {
        Name(Arc::from(s.as_ref()))
    }

    pub fn with_suffix(base: &str, suffix: u64) -> Name {
        Name::new(format!("{base}{suffix}"))
    }

    /// A name no parsed identifier can collide with. Used for variables
    /// opened while traversing binders; these never reach user-visible output.
    pub(crate) fn internal() -> Name {
        static NEXT: AtomicU64 = AtomicU64::new(0);
        Name::new(format!("#{}", NEXT.fetch_add(1, Ordering::Relaxed)))
    }

    /// The anonymous binder produced by `A -> B`.
    pub fn anonymous() -> Name {
        Name::new("_")
    }

    pub fn is_anonymous(&self) -> bool {
        &*self.0 == "_"
    }

    pub(crate) fn is_internal(&self) -> bool {
        self.0.starts_with('#')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn base(&self) -> &str {
        let s: &str = &self.0;
        let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        if cut == 0 {
            s
        } else {
            &s[..cut]
        }
    }

    pub fn suffix(&self) -> Option<u64> {
        let s: &str = &self.0;
        let base = self.base();
        if base.len() == s.len() {
            None
        } else {
            s[base.len()..].parse().ok()
        }
    }

    pub(crate) fn primed(&self) -> Name {
        Name::new(format!("{}'", self.0))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::new(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Prop,
    Type,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Prop => f.write_str("Prop"),
            Sort::Type => f.write_str("Type"),
        }
    }
}

/// Constants and variables share one syntactic form; what a name denotes is
/// decided by the context it is looked up in.
#[derive(Clone, Debug)]
pub enum Term {
    Sort(Sort),
    Var(Name),
    App(Arc<Term>, Arc<Term>),
    Lambda(Name, Arc<Term>, Arc<Term>),
    Product(Name, Arc<Term>, Arc<Term>),
}

impl Term {
    pub fn prop() -> Term {
        Term::Sort(Sort::Prop)
    }

    pub fn type_() -> Term {
        Term::Sort(Sort::Type)
    }

    pub fn var(name: impl Into<Name>) -> Term {
        Term::Var(name.into())
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Arc::new(f), Arc::new(a))
    }

    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn lambda(x: impl Into<Name>, ty: Term, body: Term) -> Term {
        Term::Lambda(x.into(), Arc::new(ty), Arc::new(body))
    }

    pub fn product(x: impl Into<Name>, ty: Term, body: Term) -> Term {
        Term::Product(x.into(), Arc::new(ty), Arc::new(body))
    }

    pub fn arrow(a: Term, b: Term) -> Term {
        Term::product(Name::anonymous(), a, b)
    }

    /// Splits an application spine into head and arguments.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Term::App(f, a) = t {
            args.push(&**a);
            t = f;
        }
        args.reverse();
        (t, args)
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self {
            Term::Var(x) => Some(x),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Term::Sort(_) => {}
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            Term::Lambda(x, ty, body) | Term::Product(x, ty, body) => {
                ty.collect_free(bound, out);
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn occurs_free(&self, x: &Name) -> bool {
        match self {
            Term::Sort(_) => false,
            Term::Var(y) => y == x,
            Term::App(f, a) => f.occurs_free(x) || a.occurs_free(x),
            Term::Lambda(y, ty, body) | Term::Product(y, ty, body) => {
                ty.occurs_free(x) || (y != x && body.occurs_free(x))
            }
        }
    }

    /// `true` for a product whose binder is not used in its body.
    pub fn is_arrow(&self) -> bool {
        match self {
            Term::Product(x, _, body) => !body.occurs_free(x),
            _ => false,
        }
    }

    /// Capture-avoiding substitution of `u` for the free occurrences of `x`.
    pub fn subst(&self, x: &Name, u: &Term) -> Term {
        if !self.occurs_free(x) {
            return self.clone();
        }
        let db = Db::from_term(self).subst_free(x, &Db::from_term(u));
        db.to_term()
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Sort(_) | Term::Var(_) => 1,
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Lambda(_, ty, body) | Term::Product(_, ty, body) => 1 + ty.size() + body.size(),
        }
    }
}

/// Equality up to renaming of bound variables.
pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    fn go(t: &Term, u: &Term, lt: &mut Vec<Name>, lu: &mut Vec<Name>) -> bool {
        match (t, u) {
            (Term::Sort(a), Term::Sort(b)) => a == b,
            (Term::Var(x), Term::Var(y)) => {
                let ix = lt.iter().rposition(|n| n == x);
                let iy = lu.iter().rposition(|n| n == y);
                match (ix, iy) {
                    (Some(i), Some(j)) => lt.len() - i == lu.len() - j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Term::App(f, a), Term::App(g, b)) => go(f, g, lt, lu) && go(a, b, lt, lu),
            (Term::Lambda(x, a, s), Term::Lambda(y, b, r))
            | (Term::Product(x, a, s), Term::Product(y, b, r)) => {
                if !go(a, b, lt, lu) {
                    return false;
                }
                lt.push(x.clone());
                lu.push(y.clone());
                let ok = go(s, r, lt, lu);
                lt.pop();
                lu.pop();
                ok
            }
            _ => false,
        }
    }
    go(t, u, &mut Vec::new(), &mut Vec::new())
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        alpha_eq(self, other)
    }
}

impl Eq for Term {}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Sort(s) => write!(f, "{s}"),
            Term::Var(x) => write!(f, "{x}"),
            Term::App(..) => {
                let (head, args) = self.spine();
                f.write_str("(")?;
                fmt_operand(head, f)?;
                for a in args {
                    f.write_str(" ")?;
                    fmt_operand(a, f)?;
                }
                f.write_str(")")
            }
            Term::Lambda(x, ty, body) => write!(f, "[{x}:{ty}]{body}"),
            Term::Product(x, ty, body) => {
                if self.is_arrow() {
                    fmt_operand(ty, f)?;
                    write!(f, " -> {body}")
                } else if body.is_arrow() {
                    write!(f, "({x}:{ty})({body})")
                } else {
                    write!(f, "({x}:{ty}){body}")
                }
            }
        }
    }
}

fn fmt_operand(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Lambda(..) | Term::Product(..) => write!(f, "({t})"),
        _ => write!(f, "{t}"),
    }
}
