//! Goal-directed proof construction on top of the engine.
//!
//! A goal is an existential variable declared in its own section; the
//! section's universal declarations are the goal's hypotheses. Tactics
//! insert items around the goal and instantiate it.

use std::collections::HashSet;

use crate::context::{self, Classification, EntryKind, Item, Quantifier};
use crate::db::Db;
use crate::engine::{Config, EngineState};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::reduction::{self, Budget};
use crate::term::{Name, Sort, Term};
use crate::typing;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProofKind {
    Theorem,
    Remark,
    Goal,
}

#[derive(Clone, Debug)]
pub struct Proof {
    pub kind: ProofKind,
    pub name: Option<Name>,
    /// Label of the section holding the statement.
    pub label: Name,
    /// The existential standing for the statement, once stated.
    pub goal_var: Option<Name>,
    pub goals: Vec<Name>,
}

#[derive(Clone, Debug)]
pub struct GoalView {
    pub name: Name,
    pub statement: Term,
    /// Most recent first.
    pub hypotheses: Vec<(Name, Term)>,
}

/// What a command changed, for reporting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Declared(Name),
    Defined(Name),
    Saved(Name),
    GoalProved,
}

#[derive(Clone, Debug)]
struct Core {
    engine: EngineState,
    proofs: Vec<Proof>,
    remarks: HashSet<Name>,
    last_saved: Option<Name>,
    events: Vec<Event>,
}

#[derive(Clone, Debug)]
pub struct ProofState {
    core: Core,
    history: Vec<Core>,
}

impl ProofState {
    pub fn new(config: Config) -> ProofState {
        ProofState {
            core: Core {
                engine: EngineState::new(config),
                proofs: Vec::new(),
                remarks: HashSet::new(),
                last_saved: None,
                events: Vec::new(),
            },
            history: Vec::new(),
        }
    }

    pub fn engine(&self) -> &EngineState {
        &self.core.engine
    }

    pub fn config(&self) -> &Config {
        &self.core.engine.config
    }

    pub fn context(&self) -> &context::Context {
        &self.core.engine.context
    }

    pub fn proofs(&self) -> &[Proof] {
        &self.core.proofs
    }

    pub fn in_proof(&self) -> bool {
        !self.core.proofs.is_empty()
    }

    /// Events produced by the last successful command.
    pub fn events(&self) -> &[Event] {
        &self.core.events
    }

    fn run<T>(&mut self, f: impl FnOnce(&mut Core) -> Result<T>) -> Result<T> {
        let mut next = self.core.clone();
        next.events.clear();
        let out = f(&mut next)?;
        next.track_goals();
        next.autosave()?;
        next.park_index();
        let prev = std::mem::replace(&mut self.core, next);
        self.history.push(prev);
        Ok(out)
    }

    pub fn undo(&mut self) -> Result<()> {
        let prev = self.history.pop().ok_or(Error::HistoryEmpty)?;
        self.core = prev;
        self.core.events.clear();
        Ok(())
    }

    pub fn declare(&mut self, q: Quantifier, name: &Name, ty: &Term, hypothesis: bool) -> Result<()> {
        self.run(|c| c.declare(q, name, ty, hypothesis))
    }

    pub fn define(&mut self, name: &Name, body: &Term, ty: Option<&Term>) -> Result<()> {
        self.run(|c| c.define(name, body, ty))
    }

    pub fn open_section(&mut self, label: &Name) -> Result<()> {
        self.run(|c| {
            c.no_proof("Section")?;
            c.engine.open_section(label)
        })
    }

    pub fn close_section(&mut self, label: &Name) -> Result<()> {
        self.run(|c| {
            c.no_proof("End")?;
            c.engine.close_section(label)
        })
    }

    pub fn begin_proof(&mut self, kind: ProofKind, name: Option<&Name>, statement: Option<&Term>) -> Result<()> {
        self.run(|c| {
            c.begin_proof(kind, name)?;
            match statement {
                Some(t) => c.statement(t),
                None => Ok(()),
            }
        })
    }

    pub fn statement(&mut self, ty: &Term) -> Result<()> {
        self.run(|c| c.statement(ty))
    }

    pub fn intro(&mut self, name: Option<&Name>) -> Result<Name> {
        self.run(|c| c.intro(name))
    }

    pub fn apply(&mut self, t: &Term) -> Result<()> {
        self.run(|c| c.apply(t, false))
    }

    pub fn assumption(&mut self, x: &Name) -> Result<()> {
        self.run(|c| c.apply(&Term::Var(x.clone()), true))
    }

    pub fn instantiate(&mut self, x: &Name, t: &Term) -> Result<()> {
        self.run(|c| {
            c.engine.instantiate_named(x, t)?;
            c.apply_renames();
            Ok(())
        })
    }

    pub fn proof_term(&mut self, t: &Term) -> Result<()> {
        self.run(|c| c.proof_term(t))
    }

    pub fn save(&mut self, name: Option<&Name>) -> Result<()> {
        if self.core.proofs.is_empty() {
            // saving a statement that was already saved automatically
            if let Some(last) = &self.core.last_saved {
                if name.is_none_or(|n| n == last) {
                    self.core.events = vec![Event::Saved(last.clone())];
                    return Ok(());
                }
            }
        }
        self.run(|c| c.save(name))
    }

    /// Goals of the innermost open proof, in order.
    pub fn goals(&self) -> Vec<GoalView> {
        self.core.goals()
    }
}

impl Core {
    fn fuel(&self) -> crate::reduction::Fuel {
        self.engine.fuel()
    }

    fn ctx(&self) -> &context::Context {
        &self.engine.context
    }

    fn park_index(&mut self) {
        let n = self.engine.context.len();
        self.engine.context.index = n;
        self.engine.register = None;
    }

    fn no_proof(&self, what: &str) -> Result<()> {
        if self.proofs.is_empty() {
            Ok(())
        } else {
            Err(Error::ModeError(format!("{what} is not allowed inside a proof")))
        }
    }

    fn top(&self) -> Result<&Proof> {
        self.proofs.last().ok_or_else(|| Error::ModeError("no proof in progress".into()))
    }

    fn top_open(&self) -> Result<&Proof> {
        let p = self.top()?;
        if p.goal_var.is_none() {
            return Err(Error::ModeError("the statement has not been given yet".into()));
        }
        Ok(p)
    }

    fn section_span(&self, label: &Name) -> Result<(usize, usize)> {
        let ctx = self.ctx();
        let b = ctx
            .items
            .iter()
            .position(|it| matches!(it, Item::Begin(l) if l == label))
            .ok_or_else(|| Error::NoSuchSection(label.clone()))?;
        let e = ctx.matching_end(b).ok_or_else(|| Error::NoSuchSection(label.clone()))?;
        Ok((b, e))
    }

    fn declare_at(&mut self, pos: usize, q: Quantifier, name: &Name, ty: &Term) -> Result<()> {
        self.engine.move_index(pos)?;
        self.engine.load(ty)?;
        self.engine.declare(q, name)
    }

    /// Position for a new header item of the top proof (just before its End).
    fn header_cursor(&self) -> Result<Option<usize>> {
        match self.proofs.last() {
            Some(p) if p.goal_var.is_none() => Ok(Some(self.section_span(&p.label)?.1)),
            Some(_) => Err(Error::ModeError("declarations are not allowed inside a proof".into())),
            None => Ok(None),
        }
    }

    fn declare(&mut self, q: Quantifier, name: &Name, ty: &Term, hypothesis: bool) -> Result<()> {
        let pos = match self.header_cursor()? {
            Some(c) => c,
            None if hypothesis || q == Quantifier::Exists => self.ctx().len(),
            None => self.ctx().len(),
        };
        self.declare_at(pos, q, name, ty)?;
        self.events.push(Event::Declared(name.clone()));
        Ok(())
    }

    fn define(&mut self, name: &Name, body: &Term, ty: Option<&Term>) -> Result<()> {
        let pos = self.header_cursor()?.unwrap_or(self.ctx().len());
        self.engine.move_index(pos)?;
        self.engine.load(body)?;
        if let Some(ty) = ty {
            let (_, inferred) = self.engine.register.clone().expect("loaded");
            if !typing::equiv_mod_constraints(self.ctx(), pos, &inferred, ty, self.fuel())? {
                return Err(Error::Mismatch { inferred, expected: ty.clone() });
            }
            self.engine.register = Some((body.clone(), ty.clone()));
        }
        self.engine.insert_definition(name)?;
        self.events.push(Event::Defined(name.clone()));
        Ok(())
    }

    fn begin_proof(&mut self, kind: ProofKind, name: Option<&Name>) -> Result<()> {
        let pos = match kind {
            ProofKind::Remark => match self.proofs.last() {
                Some(p) if p.goal_var.is_some() => {
                    let g = p.goals.first().ok_or_else(|| Error::ModeError("no goal left".into()))?;
                    self.ctx().existential_index(g).expect("goal is declared")
                }
                Some(_) => return Err(Error::ModeError("the statement has not been given yet".into())),
                None => self.ctx().len(),
            },
            _ => {
                self.no_proof("Theorem")?;
                self.ctx().len()
            }
        };
        if let Some(n) = name {
            if self.ctx().scope_at(pos).lookup(n).is_some() {
                return Err(Error::NameClash(n.clone()));
            }
        }
        let label = self.ctx().fresh_name(name.map_or("Unnamed_thm", |n| n.as_str()));
        self.engine.move_index(pos)?;
        self.engine.empty_section(&label)?;
        self.proofs.push(Proof { kind, name: name.cloned(), label, goal_var: None, goals: Vec::new() });
        Ok(())
    }

    fn statement(&mut self, ty: &Term) -> Result<()> {
        let p = self.top()?.clone();
        if p.goal_var.is_some() {
            return Err(Error::ModeError("the statement has already been given".into()));
        }
        let (_, e) = self.section_span(&p.label)?;
        let g = match &p.name {
            Some(n) => n.clone(),
            None => self.ctx().fresh_name("Unnamed_thm"),
        };
        self.engine.move_index(e)?;
        self.engine.load(ty)?;
        let (_, sort) = self.engine.register.clone().expect("loaded");
        if !matches!(sort, Term::Sort(_)) {
            return Err(Error::NotASort(sort));
        }
        self.engine.declare(Quantifier::Exists, &g)?;
        let top = self.proofs.last_mut().expect("proof");
        top.goal_var = Some(g.clone());
        top.goals = vec![g];
        Ok(())
    }

    /// Drops solved goals and follows renamings from hoisting.
    fn track_goals(&mut self) {
        self.apply_renames();
        let ctx = &self.engine.context;
        for p in &mut self.proofs {
            p.goals.retain(|g| ctx.existential_index(g).is_some());
        }
    }

    fn apply_renames(&mut self) {
        let renames = std::mem::take(&mut self.engine.renames);
        for r in renames {
            for p in &mut self.proofs {
                for g in &mut p.goals {
                    if *g == r.from {
                        *g = r.to.clone();
                    }
                }
            }
        }
    }

    fn front_goal(&self) -> Result<Name> {
        self.top_open()?.goals.first().cloned().ok_or_else(|| Error::ModeError("no goals left".into()))
    }

    fn intro(&mut self, name: Option<&Name>) -> Result<Name> {
        let g = self.front_goal()?;
        let gi = self.ctx().existential_index(&g).expect("goal is declared");
        let ty = match &self.ctx().items[gi] {
            Item::Decl { ty, .. } => ty.clone(),
            _ => unreachable!(),
        };
        let scope = self.ctx().scope_at(gi);
        let w = reduction::whnf_db(&scope, &Db::from_term(&ty), &mut Budget::new(self.fuel()), true)?;
        let Db::Pi(binder, dom, cod) = w else { return Err(Error::GoalNotProduct(ty)) };
        let visible = |n: &Name| scope.lookup(n).is_some();
        let x = match name {
            Some(n) if visible(n) => return Err(Error::NameClash(n.clone())),
            Some(n) => n.clone(),
            None => {
                let candidate = if cod.uses_bound(0) && !binder.is_anonymous() && !binder.is_internal() {
                    binder.clone()
                } else {
                    Name::new("H")
                };
                if visible(&candidate) {
                    self.ctx().fresh_numbered("x")
                } else {
                    candidate
                }
            }
        };
        let body = cod.open(&Db::free(&x)).to_term();
        let ctx = &mut self.engine.context;
        ctx.insert(gi, Item::forall(x.clone(), dom.to_term()));
        ctx.items[gi + 1] = Item::exists(g, body);
        if self.engine.config.check_invariants {
            self.engine.check_invariants()?;
        }
        Ok(x)
    }

    /// Tries `t` against the goals, first fit; for each goal with as many
    /// new subgoals as the type of `t` allows, then fewer.
    fn apply(&mut self, t: &Term, exact: bool) -> Result<()> {
        let goals = self.top_open()?.goals.clone();
        if goals.is_empty() {
            return Err(Error::ModeError("no goals left".into()));
        }
        let candidates = if self.engine.config.apply_strict { &goals[..1] } else { &goals[..] };
        let mut reason = String::new();
        for g in candidates {
            match self.apply_to(g, t, exact) {
                Ok(c) => {
                    *self = c;
                    return Ok(());
                }
                Err(e) => reason = e.to_string(),
            }
        }
        if exact {
            Err(Error::NotExact(t.clone()))
        } else {
            Err(Error::NoGoalAccepts { head: t.clone(), reason })
        }
    }

    fn apply_to(&self, g: &Name, t: &Term, exact: bool) -> Result<Core> {
        let fuel = self.fuel();
        let gi = self.ctx().existential_index(g).expect("goal is declared");
        let ty_t = typing::infer(self.ctx(), gi, t, fuel)?;
        let max = if exact { 0 } else { telescope_len(&self.ctx().scope_at(gi), &Db::from_term(&ty_t), fuel)? };
        let mut last = None;
        for n in (0..=max).rev() {
            match self.apply_with(g, gi, t, &ty_t, n) {
                Ok(c) => return Ok(c),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn apply_with(&self, g: &Name, gi: usize, t: &Term, ty_t: &Term, n: usize) -> Result<Core> {
        let fuel = self.fuel();
        let mut c = self.clone();
        let mut pos = gi;
        let mut cur = Db::from_term(ty_t);
        let mut args = Vec::new();
        for _ in 0..n {
            let scope = c.ctx().scope_at(pos);
            let Db::Pi(_, dom, cod) = reduction::whnf_db(&scope, &cur, &mut Budget::new(fuel), true)? else {
                return Err(Error::GoalNotProduct(cur.to_term()));
            };
            let h = c.ctx().fresh_numbered("h");
            let ctx = &mut c.engine.context;
            ctx.insert(pos, Item::Begin(h.clone()));
            ctx.insert(pos + 1, Item::exists(h.clone(), dom.to_term()));
            ctx.insert(pos + 2, Item::End(h.clone()));
            pos += 3;
            cur = cod.open(&Db::free(&h));
            args.push(h);
        }
        let head = Term::apps(t.clone(), args.iter().map(|h| Term::Var(h.clone())));
        c.engine.move_index(pos + 1)?;
        c.engine.load(&head)?;
        c.engine.instantiate()?;
        let renames = c.engine.renames.clone();
        let mut new_goals = Vec::new();
        for h in args {
            let h = renames.iter().find(|r| r.from == h).map_or(h.clone(), |r| r.to.clone());
            if let Some(hi) = c.ctx().existential_index(&h) {
                if let Item::Decl { ty, .. } = &c.ctx().items[hi] {
                    if c.engine.sort_of(hi, ty).ok() == Some(Sort::Prop) {
                        new_goals.push(h);
                    }
                }
            }
        }
        let top = c.proofs.last_mut().expect("proof");
        let at = top.goals.iter().position(|x| x == g).expect("goal listed");
        top.goals.splice(at..=at, new_goals);
        Ok(c)
    }

    fn proof_term(&mut self, t: &Term) -> Result<()> {
        let p = self.top_open()?.clone();
        let g = p.goal_var.clone().expect("open");
        if p.goals != [g.clone()] {
            return Err(Error::ModeError("Proof must come right after the statement".into()));
        }
        self.engine.instantiate_named(&g, t)?;
        self.apply_renames();
        let (b, e) = self.section_span(&p.label)?;
        if self.ctx().items[b..e].iter().any(Item::is_existential)
            || context::classify_range(self.ctx(), b, e + 1, self.fuel()) != Classification::Success
        {
            return Err(Error::ModeError(format!("{t} does not complete the proof")));
        }
        Ok(())
    }

    /// Saves finished theorems and remarks.
    fn autosave(&mut self) -> Result<()> {
        while let Some(p) = self.proofs.last() {
            if p.goal_var.is_none() {
                break;
            }
            let (b, e) = self.section_span(&p.label)?;
            let done = !self.ctx().items[b..e].iter().any(Item::is_existential)
                && context::classify_range(self.ctx(), b, e + 1, self.fuel()) == Classification::Success;
            if !done {
                break;
            }
            if p.kind == ProofKind::Goal {
                if !self.events.contains(&Event::GoalProved) {
                    self.events.push(Event::GoalProved);
                }
                break;
            }
            self.save(None)?;
        }
        Ok(())
    }

    fn save(&mut self, name: Option<&Name>) -> Result<()> {
        let p = self.top_open()?.clone();
        let (b, e) = self.section_span(&p.label)?;
        let open = self.ctx().items[b..e].iter().filter(|it| it.is_existential()).count();
        if open > 0 {
            return Err(Error::GoalsRemain(open));
        }
        if context::classify_range(self.ctx(), b, e + 1, self.fuel()) != Classification::Success {
            return Err(Error::GoalsRemain(self.ctx().items[b..e].iter().filter(|i| matches!(i, Item::Constraint(..))).count()));
        }
        let final_name = match (name, &p.name) {
            (Some(n), _) => n.clone(),
            (None, Some(n)) => n.clone(),
            (None, None) => return Err(Error::ModeError("Save needs a name for this goal".into())),
        };
        if p.name.as_ref() != Some(&final_name) && self.ctx().scope_at(b).lookup(&final_name).is_some() {
            return Err(Error::NameClash(final_name));
        }
        let goal_var = p.goal_var.clone().expect("open");
        let closed = context::physical_close_at(self.ctx(), b)?;
        let n_exported = closed.len() + (e + 1 - b) - self.ctx().len();
        let mut unfold = std::collections::HashMap::new();
        let mut result = None;
        for it in &closed.items[b..b + n_exported] {
            if let Item::Def { name, body, ty } = it {
                let body = Db::from_term(body).subst_many(&unfold);
                let ty = Db::from_term(ty).subst_many(&unfold);
                if *name == goal_var {
                    result = Some((body.to_term(), ty.to_term()));
                } else {
                    unfold.insert(name.clone(), body);
                }
            }
        }
        let (body, ty) = result.expect("the statement is exported");
        let body = reduction::nf_db(
            &reduction::EmptySignature,
            &Db::from_term(&body),
            &mut Budget::new(self.fuel()),
            false,
        )
        .map(|d| d.to_term())
        .unwrap_or(body);
        self.extraction_gate(b, &final_name, &body, &ty)?;
        let mut ctx = closed;
        ctx.items.splice(b..b + n_exported, [Item::def(final_name.clone(), body, ty)]);
        ctx.index = ctx.len();
        self.engine.context = ctx;
        if self.engine.config.check_invariants {
            self.engine.check_invariants()?;
        }
        self.proofs.pop();
        if p.kind == ProofKind::Remark {
            self.remarks.insert(final_name.clone());
        }
        self.last_saved = Some(final_name.clone());
        self.events.push(Event::Saved(final_name));
        Ok(())
    }

    /// Re-checks a saved proof in the independent kernel, against the
    /// declarations visible at `at`.
    fn extraction_gate(&self, at: usize, name: &Name, body: &Term, ty: &Term) -> Result<()> {
        let scope = self.ctx().scope_at(at);
        let mut k = Kernel::new();
        for e in scope.entries() {
            if k.contains(&e.name) {
                continue;
            }
            let ety = e.ty.to_term();
            let added = match &e.kind {
                EntryKind::Defined(v) => k.add_definition(&e.name, &v.to_term(), &ety),
                _ => Err(String::new()),
            };
            if added.is_err() {
                k.add_axiom(&e.name, &ety)
                    .map_err(|reason| Error::ExtractionFailed { name: name.clone(), reason })?;
            }
        }
        let check = if k.contains(name) { k.check(body, ty) } else { k.add_definition(name, body, ty) };
        check.map_err(|reason| Error::ExtractionFailed { name: name.clone(), reason })
    }

    fn goals(&self) -> Vec<GoalView> {
        let Some(p) = self.proofs.last() else { return Vec::new() };
        let ctx = self.ctx();
        p.goals
            .iter()
            .filter_map(|g| {
                let gi = ctx.existential_index(g)?;
                let Item::Decl { ty, .. } = &ctx.items[gi] else { return None };
                let scope = ctx.scope_at(gi);
                let hypotheses = scope
                    .entries()
                    .iter()
                    .rev()
                    .filter(|e| {
                        e.level > 0
                            && (matches!(e.kind, EntryKind::Universal) || self.remarks.contains(&e.name))
                            && scope.lookup(&e.name).is_some_and(|v| v.origin == e.origin)
                    })
                    .map(|e| (e.name.clone(), e.ty.to_term()))
                    .collect();
                Some(GoalView { name: g.clone(), statement: ty.clone(), hypotheses })
            })
            .collect()
    }
}

fn telescope_len(scope: &context::Scope, ty: &Db, fuel: crate::reduction::Fuel) -> Result<usize> {
    let mut n = 0;
    let mut cur = ty.clone();
    let mut budget = Budget::new(fuel);
    while let Db::Pi(_, _, cod) = reduction::whnf_db(scope, &cur, &mut budget, true)? {
        cur = cod.open(&Db::free(&Name::internal()));
        n += 1;
    }
    Ok(n)
}
