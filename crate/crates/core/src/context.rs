//! Constrained quantified contexts with explicit section markers.
//!
//! A context is a list of items and an index. Names are resolved against a
//! [`Scope`]: the flat view of the context at a position, in which every
//! closed section has been discharged into its exports.

use std::cell::OnceCell;
use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::db::Db;
use crate::error::{Error, Result};
use crate::reduction::{self, Budget, Fuel, Signature};
use crate::term::{Name, Sort, Term};
use crate::typing;
use crate::unify::{self, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Forall => "∀",
            Quantifier::Exists => "∃",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Decl { q: Quantifier, name: Name, ty: Term },
    Def { name: Name, body: Term, ty: Term },
    Constraint(Term, Term),
    Begin(Name),
    End(Name),
}

impl Item {
    pub fn forall(name: impl Into<Name>, ty: Term) -> Item {
        Item::Decl { q: Quantifier::Forall, name: name.into(), ty }
    }

    pub fn exists(name: impl Into<Name>, ty: Term) -> Item {
        Item::Decl { q: Quantifier::Exists, name: name.into(), ty }
    }

    pub fn def(name: impl Into<Name>, body: Term, ty: Term) -> Item {
        Item::Def { name: name.into(), body, ty }
    }

    pub fn name(&self) -> Option<&Name> {
        match self {
            Item::Decl { name, .. } | Item::Def { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn is_existential(&self) -> bool {
        matches!(self, Item::Decl { q: Quantifier::Exists, .. })
    }

    pub fn is_existential_named(&self, x: &Name) -> bool {
        matches!(self, Item::Decl { q: Quantifier::Exists, name, .. } if name == x)
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Decl { q, name, ty } => write!(f, "{q}{name}:{ty}"),
            Item::Def { name, body, ty } => write!(f, "{name} := {body}:{ty}"),
            Item::Constraint(a, b) => write!(f, "{a} = {b}"),
            Item::Begin(_) => f.write_str("Begin"),
            Item::End(_) => f.write_str("End"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context {
    pub items: Vec<Item>,
    /// Splits the items into `items[..index]` (left of the cursor) and the rest.
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Success,
    Failure,
    InProgress,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn from_items(items: Vec<Item>) -> Context {
        let index = items.len();
        Context { items, index }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn insert(&mut self, at: usize, item: Item) {
        self.items.insert(at, item);
        if self.index >= at {
            self.index += 1;
        }
    }

    pub fn remove(&mut self, at: usize) -> Item {
        let it = self.items.remove(at);
        if self.index > at {
            self.index -= 1;
        }
        it
    }

    /// The flat view of `items[..pos]`.
    pub fn scope_at(&self, pos: usize) -> Scope {
        let mut w = Walker::new();
        for (i, it) in self.items[..pos.min(self.items.len())].iter().enumerate() {
            w.step(i, it);
        }
        w.snapshot()
    }

    /// Index of the latest existential declaration of `x`.
    pub fn existential_index(&self, x: &Name) -> Option<usize> {
        self.items.iter().rposition(|it| it.is_existential_named(x))
    }

    /// Index of the latest declaration or definition of `x` before `before`.
    pub fn item_index(&self, x: &Name, before: usize) -> Option<usize> {
        self.items[..before.min(self.items.len())].iter().rposition(|it| it.name() == Some(x))
    }

    pub fn matching_end(&self, begin: usize) -> Option<usize> {
        let mut depth = 0usize;
        for (i, it) in self.items.iter().enumerate().skip(begin) {
            match it {
                Item::Begin(_) => depth += 1,
                Item::End(_) => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i);
                    }
                }
                _ => {}
            }
        }
        None
    }

    /// Begin indices of the sections enclosing position `pos` (i.e. open in
    /// `items[..pos]`), outermost first.
    pub fn open_sections_at(&self, pos: usize) -> Vec<usize> {
        let mut stack = Vec::new();
        for (i, it) in self.items[..pos.min(self.items.len())].iter().enumerate() {
            match it {
                Item::Begin(_) => stack.push(i),
                Item::End(_) => {
                    stack.pop();
                }
                _ => {}
            }
        }
        stack
    }

    /// Sections enclosing item `idx`, outermost first, as `(begin, end)`.
    pub fn enclosing_sections(&self, idx: usize) -> Vec<(usize, Option<usize>)> {
        self.open_sections_at(idx).into_iter().map(|b| (b, self.matching_end(b))).collect()
    }

    pub fn existentials(&self) -> Vec<Name> {
        self.items
            .iter()
            .filter_map(|it| match it {
                Item::Decl { q: Quantifier::Exists, name, .. } => Some(name.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn constraints(&self) -> Vec<(usize, &Term, &Term)> {
        self.items
            .iter()
            .enumerate()
            .filter_map(|(i, it)| match it {
                Item::Constraint(a, b) => Some((i, a, b)),
                _ => None,
            })
            .collect()
    }

    /// Every name occurring in the context: declared, bound or free.
    pub fn used_names(&self) -> HashSet<Name> {
        fn terms(t: &Term, out: &mut HashSet<Name>) {
            match t {
                Term::Sort(_) => {}
                Term::Var(x) => {
                    out.insert(x.clone());
                }
                Term::App(f, a) => {
                    terms(f, out);
                    terms(a, out);
                }
                Term::Lambda(x, a, b) | Term::Product(x, a, b) => {
                    out.insert(x.clone());
                    terms(a, out);
                    terms(b, out);
                }
            }
        }
        let mut out = HashSet::new();
        for it in &self.items {
            match it {
                Item::Decl { name, ty, .. } => {
                    out.insert(name.clone());
                    terms(ty, &mut out);
                }
                Item::Def { name, body, ty } => {
                    out.insert(name.clone());
                    terms(body, &mut out);
                    terms(ty, &mut out);
                }
                Item::Constraint(a, b) => {
                    terms(a, &mut out);
                    terms(b, &mut out);
                }
                Item::Begin(l) | Item::End(l) => {
                    out.insert(l.clone());
                }
            }
        }
        out
    }

    /// `base` itself if unused, otherwise `base` with the smallest unused suffix.
    pub fn fresh_name(&self, base: &str) -> Name {
        let used = self.used_names();
        let n = Name::new(base);
        if !used.contains(&n) {
            return n;
        }
        (1..).map(|k| Name::with_suffix(base, k)).find(|n| !used.contains(n)).expect("unbounded")
    }

    /// `base` followed by a numeric suffix larger than any in use for `base`.
    pub fn fresh_numbered(&self, base: &str) -> Name {
        let used = self.used_names();
        let max = used.iter().filter(|n| n.base() == base).filter_map(Name::suffix).max().unwrap_or(0);
        Name::with_suffix(base, max + 1)
    }

    pub fn check_balanced(&self) -> Result<()> {
        let mut stack: Vec<(usize, &Name)> = Vec::new();
        for (i, it) in self.items.iter().enumerate() {
            match it {
                Item::Begin(l) => stack.push((i, l)),
                Item::End(l) => match stack.pop() {
                    Some((_, open)) if open == l => {}
                    Some((_, open)) => {
                        return Err(Error::IllFormed {
                            item: i,
                            reason: format!("End {l} closes section {open}"),
                        })
                    }
                    None => {
                        return Err(Error::IllFormed { item: i, reason: format!("End {l} without Begin") })
                    }
                },
                _ => {}
            }
        }
        Ok(())
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, it) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{it}")?;
        }
        f.write_str("]")
    }
}

// ----------------------------------------------------------------------------
// Flat scopes

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntryKind {
    Universal,
    Existential,
    Defined(Db),
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub name: Name,
    pub kind: EntryKind,
    pub ty: Db,
    /// Item index the entry comes from.
    pub origin: usize,
    /// Section depth at which the entry is visible (0 = top level).
    pub level: usize,
    /// A constraint precedes this entry in the flat order.
    pub after_constraint: bool,
}

#[derive(Clone, Debug)]
enum Flat {
    Entry(Entry),
    Constraint(Db, Db),
}

/// The flat view of a context prefix.
#[derive(Debug, Default)]
pub struct Scope {
    entries: Vec<Entry>,
    map: HashMap<Name, usize>,
    constraints: Vec<(Db, Db)>,
    delta: OnceCell<Box<Scope>>,
    normal_constraints: OnceCell<Vec<(Db, Db)>>,
    fuel: Option<Fuel>,
}

impl Clone for Scope {
    fn clone(&self) -> Scope {
        Scope {
            entries: self.entries.clone(),
            map: self.map.clone(),
            constraints: self.constraints.clone(),
            delta: OnceCell::new(),
            normal_constraints: OnceCell::new(),
            fuel: self.fuel,
        }
    }
}

impl Scope {
    pub fn new() -> Scope {
        Scope::default()
    }

    pub fn push(&mut self, e: Entry) {
        self.map.insert(e.name.clone(), self.entries.len());
        self.entries.push(e);
        self.delta = OnceCell::new();
    }

    pub fn push_constraint(&mut self, a: Db, b: Db) {
        self.constraints.push((a, b));
        self.delta = OnceCell::new();
        self.normal_constraints = OnceCell::new();
    }

    pub fn lookup(&self, x: &Name) -> Option<&Entry> {
        self.map.get(x).map(|&i| &self.entries[i])
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn constraints(&self) -> &[(Db, Db)] {
        &self.constraints
    }

    pub fn has_constraints(&self) -> bool {
        !self.constraints.is_empty()
    }

    pub fn is_existential(&self, x: &Name) -> bool {
        matches!(self.lookup(x), Some(Entry { kind: EntryKind::Existential, .. }))
    }

    pub fn is_universal(&self, x: &Name) -> bool {
        matches!(self.lookup(x), Some(Entry { kind: EntryKind::Universal, .. }))
    }

    pub fn mentions_existential(&self, t: &Db) -> bool {
        t.free_names().iter().any(|x| self.is_existential(x))
    }

    pub(crate) fn with_fuel(mut self, fuel: Fuel) -> Scope {
        self.fuel = Some(fuel);
        self
    }

    pub(crate) fn fuel(&self) -> Fuel {
        self.fuel.unwrap_or_default()
    }

    /// Constraint sides in beta-delta normal form (left as-is on fuel exhaustion).
    pub(crate) fn normal_constraints(&self) -> &[(Db, Db)] {
        self.normal_constraints.get_or_init(|| {
            let fuel = self.fuel();
            self.constraints
                .iter()
                .map(|(a, b)| {
                    let na = reduction::nf_db(self, a, &mut Budget::new(fuel), true).unwrap_or_else(|_| a.clone());
                    let nb = reduction::nf_db(self, b, &mut Budget::new(fuel), true).unwrap_or_else(|_| b.clone());
                    (na, nb)
                })
                .collect()
        })
    }

    /// The greedy constraint-free subcontext: entries are kept left to right
    /// when they check in the kept prefix without constraints.
    pub fn without_constraints(&self) -> &Scope {
        self.delta.get_or_init(|| {
            let mut d = Scope::new();
            d.fuel = self.fuel;
            for e in &self.entries {
                if !e.after_constraint || entry_checks(&d, e) {
                    d.push(e.clone());
                }
            }
            Box::new(d)
        })
    }
}

fn entry_checks(scope: &Scope, e: &Entry) -> bool {
    let fuel = scope.fuel();
    if typing::infer_sort_db(scope, &e.ty, fuel).is_err() {
        return false;
    }
    match &e.kind {
        EntryKind::Defined(v) => typing::check_db(scope, v, &e.ty, fuel).is_ok(),
        _ => true,
    }
}

impl Signature for Scope {
    fn definition(&self, x: &Name) -> Option<Db> {
        match self.lookup(x) {
            Some(Entry { kind: EntryKind::Defined(v), .. }) => Some(v.clone()),
            _ => None,
        }
    }
    fn type_of(&self, x: &Name) -> Option<Db> {
        self.lookup(x).map(|e| e.ty.clone())
    }
}

/// Incremental left-to-right construction of flat scopes.
pub(crate) struct Walker {
    frames: Vec<Vec<Flat>>,
}

impl Walker {
    pub fn new() -> Walker {
        Walker { frames: vec![Vec::new()] }
    }

    pub fn step(&mut self, idx: usize, it: &Item) {
        let level = self.frames.len() - 1;
        let frame = self.frames.last_mut().expect("root frame");
        match it {
            Item::Begin(_) => self.frames.push(Vec::new()),
            Item::End(_) => {
                if self.frames.len() > 1 {
                    let inner = self.frames.pop().expect("frame");
                    let exported = discharge(inner, level - 1);
                    self.frames.last_mut().expect("frame").extend(exported);
                }
            }
            Item::Decl { q, name, ty } => frame.push(Flat::Entry(Entry {
                name: name.clone(),
                kind: match q {
                    Quantifier::Forall => EntryKind::Universal,
                    Quantifier::Exists => EntryKind::Existential,
                },
                ty: Db::from_term(ty),
                origin: idx,
                level,
                after_constraint: false,
            })),
            Item::Def { name, body, ty } => frame.push(Flat::Entry(Entry {
                name: name.clone(),
                kind: EntryKind::Defined(Db::from_term(body)),
                ty: Db::from_term(ty),
                origin: idx,
                level,
                after_constraint: false,
            })),
            Item::Constraint(a, b) => frame.push(Flat::Constraint(Db::from_term(a), Db::from_term(b))),
        }
    }

    pub fn snapshot(&self) -> Scope {
        let mut s = Scope::new();
        let mut seen_constraint = false;
        for frame in &self.frames {
            for fl in frame {
                match fl {
                    Flat::Entry(e) => {
                        let mut e = e.clone();
                        e.after_constraint = seen_constraint;
                        s.push(e);
                    }
                    Flat::Constraint(a, b) => {
                        seen_constraint = true;
                        s.push_constraint(a.clone(), b.clone());
                    }
                }
            }
        }
        s
    }

    fn into_root(mut self) -> Vec<Flat> {
        while self.frames.len() > 1 {
            let inner = self.frames.pop().expect("frame");
            let level = self.frames.len() - 1;
            let exported = discharge(inner, level);
            self.frames.last_mut().expect("frame").extend(exported);
        }
        self.frames.pop().expect("root")
    }
}

/// Discharges the contents of a closed section: its universal declarations
/// are abstracted out of every later exported item, and references between
/// exported items are re-applied to those locals.
fn discharge(items: Vec<Flat>, level: usize) -> Vec<Flat> {
    let mut locals: Vec<(Name, Db)> = Vec::new();
    let mut renames: HashMap<Name, Db> = HashMap::new();
    let mut out = Vec::new();
    for fl in items {
        match fl {
            Flat::Entry(e) => {
                let ty = e.ty.subst_many(&renames);
                match e.kind {
                    EntryKind::Universal => {
                        renames.remove(&e.name);
                        locals.push((e.name, ty));
                    }
                    EntryKind::Existential | EntryKind::Defined(_) => {
                        let kind = match e.kind {
                            EntryKind::Defined(v) => EntryKind::Defined(Db::lams_over(&locals, v.subst_many(&renames))),
                            k => k,
                        };
                        let applied = Db::apps(Db::free(&e.name), locals.iter().map(|(l, _)| Db::free(l)));
                        out.push(Flat::Entry(Entry {
                            name: e.name.clone(),
                            kind,
                            ty: Db::pis_over(&locals, ty),
                            origin: e.origin,
                            level,
                            after_constraint: false,
                        }));
                        renames.insert(e.name, applied);
                    }
                }
            }
            Flat::Constraint(a, b) => {
                let a = Db::lams_over(&locals, a.subst_many(&renames));
                let b = Db::lams_over(&locals, b.subst_many(&renames));
                out.push(Flat::Constraint(a, b));
            }
        }
    }
    out
}

/// Value and type of `name` as seen from position `at`.
pub fn discharge_view(ctx: &Context, at: usize, name: &Name) -> Result<(Option<Term>, Term)> {
    let scope = ctx.scope_at(at);
    match scope.lookup(name) {
        Some(e) => {
            let value = match &e.kind {
                EntryKind::Defined(v) => Some(v.to_term()),
                _ => None,
            };
            Ok((value, e.ty.to_term()))
        }
        None => Err(Error::OutOfScope(name.clone())),
    }
}

/// Replaces the closed section starting at `begin` by its discharged exports.
pub fn physical_close_at(ctx: &Context, begin: usize) -> Result<Context> {
    let label = match ctx.items.get(begin) {
        Some(Item::Begin(l)) => l.clone(),
        _ => return Err(Error::OutOfBounds),
    };
    let end = ctx.matching_end(begin).ok_or_else(|| Error::NoSuchSection(label.clone()))?;
    if ctx.items[begin + 1..end].iter().any(Item::is_existential) {
        return Err(Error::SectionHasExistentials(label));
    }
    let mut w = Walker::new();
    w.frames.push(Vec::new());
    for (i, it) in ctx.items.iter().enumerate().take(end).skip(begin + 1) {
        w.step(i, it);
    }
    let exported = w.into_root();
    let replacement: Vec<Item> = exported
        .into_iter()
        .filter_map(|fl| match fl {
            Flat::Entry(Entry { name, kind: EntryKind::Defined(v), ty, .. }) => {
                Some(Item::Def { name, body: v.to_term(), ty: ty.to_term() })
            }
            Flat::Constraint(a, b) => Some(Item::Constraint(a.to_term(), b.to_term())),
            Flat::Entry(_) => None,
        })
        .collect();
    let mut out = ctx.clone();
    let n = replacement.len();
    out.items.splice(begin..=end, replacement);
    let removed = end + 1 - begin;
    if out.index > end {
        out.index = out.index + n - removed;
    } else if out.index > begin {
        out.index = begin + n;
    }
    Ok(out)
}

/// Physically closes the last closed section labelled `label`.
pub fn physical_close(ctx: &Context, label: &Name) -> Result<Context> {
    let begin = ctx
        .items
        .iter()
        .enumerate()
        .rev()
        .find(|(i, it)| matches!(it, Item::Begin(l) if l == label) && ctx.matching_end(*i).is_some())
        .map(|(i, _)| i)
        .ok_or_else(|| Error::NoSuchSection(label.clone()))?;
    physical_close_at(ctx, begin)
}

// ----------------------------------------------------------------------------
// Well-formedness, normal forms, classification

pub fn check_well_formed(ctx: &Context, fuel: Fuel) -> Result<()> {
    ctx.check_balanced()?;
    let mut w = Walker::new();
    for (i, it) in ctx.items.iter().enumerate() {
        let needs_check = matches!(it, Item::Decl { .. } | Item::Def { .. } | Item::Constraint(..));
        if needs_check {
            let scope = w.snapshot().with_fuel(fuel);
            check_item(&scope, ctx, it).map_err(|e| Error::IllFormed { item: i, reason: e.to_string() })?;
        }
        w.step(i, it);
    }
    Ok(())
}

fn check_item(scope: &Scope, ctx: &Context, it: &Item) -> Result<()> {
    let fuel = scope.fuel();
    let _ = ctx;
    match it {
        Item::Decl { ty, .. } => {
            typing::infer_sort_db(scope, &Db::from_term(ty), fuel)?;
        }
        Item::Def { body, ty, .. } => {
            let ty = Db::from_term(ty);
            typing::infer_sort_db(scope, &ty, fuel)?;
            typing::check_db(scope, &Db::from_term(body), &ty, fuel)?;
        }
        Item::Constraint(a, b) => {
            let ta = typing::infer_db(scope, &Db::from_term(a), fuel)?;
            let tb = typing::infer_db(scope, &Db::from_term(b), fuel)?;
            if !typing::equiv_db(scope, &ta, &tb, fuel)? {
                return Err(Error::Mismatch { inferred: tb.to_term(), expected: ta.to_term() });
            }
        }
        Item::Begin(_) | Item::End(_) => {}
    }
    Ok(())
}

/// Type of `t` at position `at` in the greedy constraint-free subcontext.
pub fn typable_without_constraints(ctx: &Context, at: usize, t: &Term, fuel: Fuel) -> Option<Term> {
    let scope = ctx.scope_at(at).with_fuel(fuel);
    typing::infer_db(scope.without_constraints(), &Db::from_term(t), fuel).ok().map(|ty| ty.to_term())
}

/// Puts declaration types, definitions and constraint sides that are typable without the
/// constraints into beta-delta normal eta-long form, and drops constraints
/// whose sides become equal.
pub fn normalize_context(ctx: &Context, fuel: Fuel) -> Result<Context> {
    let mut out = Context { items: Vec::with_capacity(ctx.items.len()), index: ctx.index };
    let mut w = Walker::new();
    for (i, it) in ctx.items.iter().enumerate() {
        let new_item = match it {
            Item::Decl { q, name, ty } => {
                let scope = w.snapshot().with_fuel(fuel);
                let delta = scope.without_constraints();
                let ty_db = Db::from_term(ty);
                let ty = match typing::infer_sort_db(delta, &ty_db, fuel) {
                    Ok(_) => reduction::nf_long_db(delta, &ty_db, &Db::Sort(Sort::Type), &mut Budget::new(fuel))?
                        .to_term(),
                    Err(Error::FuelExhausted) => return Err(Error::FuelExhausted),
                    Err(_) => ty.clone(),
                };
                Some(Item::Decl { q: *q, name: name.clone(), ty })
            }
            Item::Def { name, body, ty } => {
                let scope = w.snapshot().with_fuel(fuel);
                let delta = scope.without_constraints();
                let (db_body, db_ty) = (Db::from_term(body), Db::from_term(ty));
                match typing::check_db(delta, &db_body, &db_ty, fuel) {
                    Ok(()) => {
                        let ty = reduction::nf_long_db(delta, &db_ty, &Db::Sort(Sort::Type), &mut Budget::new(fuel))?;
                        let body = reduction::nf_long_db(delta, &db_body, &db_ty, &mut Budget::new(fuel))?;
                        Some(Item::Def { name: name.clone(), body: body.to_term(), ty: ty.to_term() })
                    }
                    Err(Error::FuelExhausted) => return Err(Error::FuelExhausted),
                    Err(_) => Some(it.clone()),
                }
            }
            Item::Constraint(a, b) => {
                let scope = w.snapshot().with_fuel(fuel);
                let delta = scope.without_constraints();
                let (da, db_) = (Db::from_term(a), Db::from_term(b));
                match (typing::infer_db(delta, &da, fuel), typing::infer_db(delta, &db_, fuel)) {
                    (Ok(ta), Ok(tb)) => {
                        let na = reduction::nf_long_db(delta, &da, &ta, &mut Budget::new(fuel))?;
                        let nb = reduction::nf_long_db(delta, &db_, &tb, &mut Budget::new(fuel))?;
                        if reduction::eq_eta(&na, &nb) {
                            None
                        } else {
                            Some(Item::Constraint(na.to_term(), nb.to_term()))
                        }
                    }
                    (Err(Error::FuelExhausted), _) | (_, Err(Error::FuelExhausted)) => {
                        return Err(Error::FuelExhausted)
                    }
                    _ => {
                        let scope_sig: &Scope = &scope;
                        let mut b1 = Budget::new(fuel);
                        if reduction::convertible_db(scope_sig, &da, &db_, &mut b1).unwrap_or(false) {
                            None
                        } else {
                            Some(it.clone())
                        }
                    }
                }
            }
            _ => Some(it.clone()),
        };
        match new_item {
            Some(ni) => {
                w.step(out.items.len(), &ni);
                out.items.push(ni);
            }
            None => {
                if out.index > out.items.len() {
                    out.index -= 1;
                }
            }
        }
        let _ = i;
    }
    out.index = out.index.min(out.items.len());
    Ok(out)
}

/// Classifies a normal context.
pub fn classify(ctx: &Context, fuel: Fuel) -> Classification {
    classify_range(ctx, 0, ctx.items.len(), fuel)
}

/// Classifies the items in `start..end` (the rest of the context only
/// provides scope).
pub fn classify_range(ctx: &Context, start: usize, end: usize, fuel: Fuel) -> Classification {
    let mut has_existential = false;
    let mut live = false;
    let mut w = Walker::new();
    for (i, it) in ctx.items.iter().enumerate() {
        if i >= start && i < end {
            match it {
                Item::Decl { q: Quantifier::Exists, .. } => has_existential = true,
                Item::Constraint(a, b) => {
                    let scope = w.snapshot().with_fuel(fuel);
                    match constraint_status(&scope, &Db::from_term(a), &Db::from_term(b)) {
                        ConstraintStatus::Trivial => {}
                        ConstraintStatus::Failure => return Classification::Failure,
                        ConstraintStatus::Live => live = true,
                    }
                }
                _ => {}
            }
        }
        w.step(i, it);
    }
    if has_existential || live {
        Classification::InProgress
    } else {
        Classification::Success
    }
}

enum ConstraintStatus {
    Trivial,
    Failure,
    Live,
}

fn constraint_status(scope: &Scope, a: &Db, b: &Db) -> ConstraintStatus {
    let fuel = scope.fuel();
    let mut bud = Budget::new(fuel);
    let (na, nb) = match (
        reduction::nf_db(scope, a, &mut bud, true),
        reduction::nf_db(scope, b, &mut Budget::new(fuel), true),
    ) {
        (Ok(x), Ok(y)) => (x, y),
        _ => return ConstraintStatus::Live,
    };
    if reduction::eq_eta(&na, &nb) {
        return ConstraintStatus::Trivial;
    }
    if matches!(unify::simplify_db(scope, a, b, fuel), Ok(Outcome::Clash)) {
        return ConstraintStatus::Failure;
    }
    let ground = !scope.mentions_existential(&na) && !scope.mentions_existential(&nb);
    let delta = scope.without_constraints();
    if ground && typing::infer_db(delta, &na, fuel).is_ok() && typing::infer_db(delta, &nb, fuel).is_ok() {
        return ConstraintStatus::Failure;
    }
    ConstraintStatus::Live
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vernacular::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn section_ctx() -> Context {
        Context::from_items(vec![
            Item::Begin("I".into()),
            Item::forall("P", t("Prop")),
            Item::forall("x", t("P")),
            Item::def("I", t("x"), t("P")),
            Item::End("I".into()),
        ])
    }

    #[test]
    fn well_formed_examples() {
        let fuel = Fuel::default();
        let ctx = Context::from_items(vec![
            Item::forall("A", t("Prop")),
            Item::exists("X", t("Prop")),
            Item::exists("y", t("X -> A")),
        ]);
        check_well_formed(&ctx, fuel).unwrap();
        let bad = Context::from_items(vec![Item::forall("x", t("y"))]);
        assert!(matches!(check_well_formed(&bad, fuel), Err(Error::IllFormed { .. })));
        let bad = Context::from_items(vec![Item::forall("A", t("Prop")), Item::Constraint(t("A"), t("Prop"))]);
        assert!(matches!(check_well_formed(&bad, fuel), Err(Error::IllFormed { item: 1, .. })));
    }

    #[test]
    fn typable_without_constraints_examples() {
        let fuel = Fuel::default();
        let ctx = Context::from_items(vec![
            Item::forall("A", t("Prop")),
            Item::exists("X", t("Prop")),
            Item::exists("y", t("X -> A")),
        ]);
        assert_eq!(typable_without_constraints(&ctx, 3, &t("y"), fuel), Some(t("X -> A")));
        let ctx = Context::from_items(vec![
            Item::forall("A", t("Prop")),
            Item::exists("X", t("Prop")),
            Item::Constraint(t("X"), t("A")),
            Item::exists("z", t("X")),
            Item::def("w", t("z"), t("A")),
        ]);
        // w's body only has type A through the constraint
        assert_eq!(typable_without_constraints(&ctx, 5, &t("w"), fuel), None);
        assert_eq!(typable_without_constraints(&ctx, 5, &t("z"), fuel), Some(t("X")));
    }

    #[test]
    fn discharge_from_outside() {
        let ctx = section_ctx();
        let (v, ty) = discharge_view(&ctx, 5, &"I".into()).unwrap();
        assert_eq!(v.unwrap(), t("[P:Prop][x:P]x"));
        assert_eq!(ty, t("(P:Prop)(P -> P)"));
        assert!(matches!(discharge_view(&ctx, 5, &"P".into()), Err(Error::OutOfScope(_))));
        let (v, _) = discharge_view(&ctx, 4, &"I".into()).unwrap();
        assert_eq!(v.unwrap(), t("x"));
        let top = Context::from_items(vec![Item::forall("A", t("Prop")), Item::def("c", t("A"), t("Prop"))]);
        assert_eq!(discharge_view(&top, 2, &"c".into()).unwrap(), (Some(t("A")), t("Prop")));
    }

    #[test]
    fn discharge_reapplies_section_constants() {
        let ctx = Context::from_items(vec![
            Item::Begin("S".into()),
            Item::forall("P", t("Prop")),
            Item::forall("x", t("P")),
            Item::def("d", t("x"), t("P")),
            Item::def("e", t("d"), t("P")),
            Item::End("S".into()),
        ]);
        let (v, ty) = discharge_view(&ctx, 6, &"e".into()).unwrap();
        assert_eq!(v.unwrap(), t("[P:Prop][x:P](d P x)"));
        assert_eq!(ty, t("(P:Prop)(P -> P)"));
    }

    #[test]
    fn physical_close_examples() {
        let fuel = Fuel::default();
        let ctx = physical_close(&section_ctx(), &"I".into()).unwrap();
        assert_eq!(ctx.items, vec![Item::def("I", t("[P:Prop][x:P]x"), t("(P:Prop)(P -> P)"))]);
        check_well_formed(&ctx, fuel).unwrap();
        let with_ex = Context::from_items(vec![
            Item::Begin("g".into()),
            Item::exists("g", t("Prop")),
            Item::End("g".into()),
        ]);
        assert!(matches!(physical_close(&with_ex, &"g".into()), Err(Error::SectionHasExistentials(_))));
        let empty = Context::from_items(vec![
            Item::Begin("s".into()),
            Item::forall("P", t("Prop")),
            Item::End("s".into()),
        ]);
        assert!(physical_close(&empty, &"s".into()).unwrap().items.is_empty());
    }

    #[test]
    fn normalize_context_examples() {
        let fuel = Fuel::default();
        let ctx = Context::from_items(vec![Item::Constraint(t("(P:Prop)(P -> P)"), t("(Q:Prop)(Q -> Q)"))]);
        assert!(normalize_context(&ctx, fuel).unwrap().items.is_empty());
        let ctx = Context::from_items(vec![
            Item::forall("T", t("Prop")),
            Item::forall("Eq", t("T -> T -> Prop")),
            Item::forall("a", t("T")),
            Item::forall("b", t("T")),
            Item::exists("h1", t("T")),
            Item::exists("h2", t("T")),
            Item::Constraint(t("(Eq h1 h2)"), t("(Eq a b)")),
        ]);
        assert_eq!(normalize_context(&ctx, fuel).unwrap(), ctx);
        assert!(normalize_context(&Context::new(), fuel).unwrap().is_empty());
    }

    #[test]
    fn classify_examples() {
        let fuel = Fuel::default();
        let base = vec![
            Item::forall("T", t("Prop")),
            Item::forall("R", t("T -> T -> Prop")),
            Item::forall("a", t("T")),
            Item::forall("b", t("T")),
        ];
        assert_eq!(classify(&Context::from_items(base.clone()), fuel), Classification::Success);
        let mut fail = base.clone();
        fail.push(Item::Constraint(t("(R a b)"), t("(R b a)")));
        assert_eq!(classify(&Context::from_items(fail), fuel), Classification::Failure);
        let mut prog = base;
        prog.push(Item::exists("h3", t("(R a b)")));
        assert_eq!(classify(&Context::from_items(prog), fuel), Classification::InProgress);
    }
}
