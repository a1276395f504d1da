//! Second λ evaluator built on environments and closures, where every box
//! declaration gets a globally fresh name, plus a random generator of
//! well-kinded terms.

#![allow(dead_code)]
use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use meaningbank_core::drs::{Condition, Drs};
use meaningbank_core::term::{beta_reduce, normalize, reduce_step, Kind, Term, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// oracle

#[derive(Clone)]
enum Value {
    Ref(String),
    Lam(Var, Rc<Term>, Env),
    Neutral(Neutral),
    Box(Drs<String>),
    Merge(Rc<Value>, Rc<Value>),
    Presup(Rc<Value>, Rc<Value>),
    Neg(Rc<Value>),
}

#[derive(Clone)]
enum Neutral {
    Var(String, Kind),
    App(Rc<Neutral>, Rc<Value>),
}

type Env = Rc<BTreeMap<String, Value>>;

struct Oracle {
    counter: Cell<u32>,
}

impl Oracle {
    fn gensym(&self, stem: &str) -> String {
        let n = self.counter.get() + 1;
        self.counter.set(n);
        format!("{}_{}", stem, n)
    }

    /// Value and the syntactic exports of the term, as original -> fresh.
    fn eval(&self, t: &Term, env: &Env) -> (Value, BTreeMap<String, String>) {
        match t {
            Term::Var(v) => {
                let val = env.get(&v.name).cloned().unwrap_or_else(|| {
                    if v.kind == Kind::Ref {
                        Value::Ref(v.name.clone())
                    } else {
                        Value::Neutral(Neutral::Var(v.name.clone(), v.kind.clone()))
                    }
                });
                (val, BTreeMap::new())
            }
            Term::Lam(v, b) => (Value::Lam(v.clone(), Rc::new((**b).clone()), env.clone()), BTreeMap::new()),
            Term::App(f, a) => {
                let (fv, _) = self.eval(f, env);
                let (av, _) = self.eval(a, env);
                (self.apply(fv, av), BTreeMap::new())
            }
            Term::DrsLit(d) => {
                let mut outer = BTreeMap::new();
                let d2 = self.eval_box(d, env, &BTreeMap::new(), Some(&mut outer));
                (Value::Box(d2), outer)
            }
            Term::Merge(a, b) | Term::Presup(a, b) => {
                let (va, ea) = self.eval(a, env);
                let mut env2 = (**env).clone();
                for (orig, fresh) in &ea {
                    env2.insert(orig.clone(), Value::Ref(fresh.clone()));
                }
                let (vb, eb) = self.eval(b, &Rc::new(env2));
                let mut ex = ea;
                ex.extend(eb);
                let v = if matches!(t, Term::Merge(..)) {
                    Value::Merge(Rc::new(va), Rc::new(vb))
                } else {
                    Value::Presup(Rc::new(va), Rc::new(vb))
                };
                (v, ex)
            }
            Term::Neg(b) => (Value::Neg(Rc::new(self.eval(b, env).0)), BTreeMap::new()),
        }
    }

    fn eval_box(
        &self,
        d: &Drs<String>,
        env: &Env,
        local: &BTreeMap<String, String>,
        exports: Option<&mut BTreeMap<String, String>>,
    ) -> Drs<String> {
        let mut scope = local.clone();
        let mut refs = Vec::new();
        for r in &d.referents {
            let fresh = self.gensym(r);
            scope.insert(r.clone(), fresh.clone());
            refs.push(fresh);
        }
        if let Some(ex) = exports {
            for r in &d.referents {
                ex.insert(r.clone(), scope[r].clone());
            }
        }
        let resolve = |r: &String| -> String {
            if let Some(f) = scope.get(r) {
                return f.clone();
            }
            match env.get(r) {
                Some(Value::Ref(n)) => n.clone(),
                _ => r.clone(),
            }
        };
        let conds = d
            .conditions
            .iter()
            .map(|c| match c {
                Condition::Not(inner) => Condition::Not(self.eval_box(inner, env, &scope, None)),
                other => other.map_refs(&mut |r: &String| resolve(r)),
            })
            .collect();
        Drs::new(refs, conds)
    }

    fn apply(&self, f: Value, a: Value) -> Value {
        match f {
            Value::Lam(v, body, env) => {
                let mut env2 = (*env).clone();
                env2.insert(v.name.clone(), a);
                self.eval(&body, &Rc::new(env2)).0
            }
            Value::Neutral(n) => Value::Neutral(Neutral::App(Rc::new(n), Rc::new(a))),
            _ => panic!("oracle: application of a non-function"),
        }
    }

    fn readback(&self, v: &Value) -> Term {
        match v {
            Value::Ref(n) => Term::var(n, Kind::Ref),
            Value::Lam(var, _, _) => {
                let name = self.gensym("v");
                let arg = if var.kind == Kind::Ref {
                    Value::Ref(name.clone())
                } else {
                    Value::Neutral(Neutral::Var(name.clone(), var.kind.clone()))
                };
                let body = self.apply(v.clone(), arg);
                Term::lam(&name, var.kind.clone(), self.readback(&body))
            }
            Value::Neutral(n) => self.readback_neutral(n),
            Value::Box(d) => Term::DrsLit(d.clone()),
            Value::Merge(a, b) => Term::merge(self.readback(a), self.readback(b)),
            Value::Presup(a, b) => Term::presup(self.readback(a), self.readback(b)),
            Value::Neg(b) => Term::neg(self.readback(b)),
        }
    }

    fn readback_neutral(&self, n: &Neutral) -> Term {
        match n {
            Neutral::Var(name, kind) => Term::var(name, kind.clone()),
            Neutral::App(f, a) => Term::app(self.readback_neutral(f), self.readback(a)),
        }
    }
}

pub fn oracle_normal_form(t: &Term) -> Term {
    let o = Oracle { counter: Cell::new(0) };
    let v = o.eval(t, &Rc::new(BTreeMap::new())).0;
    o.readback(&v)
}

// ---------------------------------------------------------------------------
// generator

struct Gen {
    rng: ChaCha8Rng,
    boxes: u32,
}

type Ctx = Vec<(String, Kind)>;

fn e() -> Kind {
    Kind::Ref
}
fn t() -> Kind {
    Kind::Box
}
fn prop() -> Kind {
    Kind::property()
}

fn free_context() -> Ctx {
    vec![
        ("u".into(), e()),
        ("w".into(), e()),
        ("F".into(), prop()),
        ("Q".into(), Kind::quantifier()),
        ("B".into(), t()),
    ]
}

fn min_depth(k: &Kind) -> usize {
    match k {
        Kind::Ref | Kind::Box => 1,
        Kind::Fun(_, to) => 1 + min_depth(to),
    }
}

impl Gen {
    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.rng.random_range(0..xs.len())]
    }

    fn vars_of(ctx: &Ctx, k: &Kind) -> Vec<String> {
        // innermost binding of each name wins
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (n, kind) in ctx.iter().rev() {
            if seen.insert(n.clone()) && kind == k {
                out.push(n.clone());
            }
        }
        out
    }

    fn lambda_name(&mut self, k: &Kind) -> String {
        let pool: &[&str] = if *k == Kind::Ref { &["x", "y", "u"] } else { &["P", "G", "F"] };
        self.pick(pool).to_string()
    }

    fn drs(&mut self, ctx: &Ctx, budget: usize) -> (Term, Vec<String>) {
        let mut declared = Vec::new();
        for _ in 0..self.rng.random_range(0..3) {
            let name = if self.rng.random_bool(0.2) {
                self.pick(&["x", "u"]).to_string()
            } else {
                self.boxes += 1;
                format!("r{}", self.boxes)
            };
            if !declared.contains(&name) {
                declared.push(name);
            }
        }
        let mut pool = Self::vars_of(ctx, &e());
        pool.extend(declared.iter().cloned());
        let mut conds = Vec::new();
        for _ in 0..self.rng.random_range(0..3) {
            let a = self.pick(&pool).clone();
            let b = self.pick(&pool).clone();
            let c = match self.rng.random_range(0..4) {
                0 => Condition::Pred1(self.pick(&["p", "q"]).to_string(), a),
                1 => Condition::Role("Agent".into(), a, b),
                2 => Condition::Pred2("at".into(), a, b),
                _ if budget > 2 => {
                    self.boxes += 1;
                    let inner = format!("r{}", self.boxes);
                    Condition::Not(Drs::new(vec![inner.clone()], vec![Condition::Role("Theme".into(), inner, a)]))
                }
                _ => Condition::Now(a),
            };
            conds.push(c);
        }
        (Term::DrsLit(Drs::new(declared.clone(), conds)), declared)
    }

    /// A term of kind `k` with depth at most `budget`, and the names it
    /// exports syntactically.
    fn term(&mut self, k: &Kind, ctx: &Ctx, budget: usize) -> (Term, Vec<String>) {
        let vars = Self::vars_of(ctx, k);
        let can_app = budget >= 3;
        match k {
            Kind::Ref => (Term::var(self.pick(&vars), e()), vec![]),
            Kind::Box => {
                let choice = if budget <= 1 { self.rng.random_range(0..2) } else { self.rng.random_range(0..9) };
                match choice {
                    0 if !vars.is_empty() && self.rng.random_bool(0.3) => (Term::var(self.pick(&vars), t()), vec![]),
                    0 | 1 => self.drs(ctx, budget),
                    2 | 3 => {
                        let (a, ea) = if self.rng.random_bool(0.5) { self.drs(ctx, budget - 1) } else { self.term(&t(), ctx, budget - 1) };
                        let mut ctx2 = ctx.clone();
                        ctx2.extend(ea.iter().map(|n| (n.clone(), e())));
                        let (b, eb) = self.term(&t(), &ctx2, budget - 1);
                        let mut ex = ea;
                        ex.extend(eb);
                        if choice == 2 {
                            (Term::merge(a, b), ex)
                        } else {
                            (Term::presup(a, b), ex)
                        }
                    }
                    4 => (Term::neg(self.term(&t(), ctx, budget - 1).0), vec![]),
                    _ if can_app => (self.application(k, ctx, budget), vec![]),
                    _ => self.drs(ctx, budget),
                }
            }
            Kind::Fun(from, to) => {
                let r = self.rng.random_range(0..6);
                if r == 0 && !vars.is_empty() {
                    return (Term::var(self.pick(&vars), k.clone()), vec![]);
                }
                if (r == 1 || r == 2) && can_app && budget > min_depth(k) + 1 {
                    return (self.application(k, ctx, budget), vec![]);
                }
                let name = self.lambda_name(from);
                let mut ctx2 = ctx.clone();
                ctx2.push((name.clone(), (**from).clone()));
                let body = self.term(to, &ctx2, budget - 1).0;
                (Term::lam(&name, (**from).clone(), body), vec![])
            }
        }
    }

    /// `f a` where `f : c -> k` is usually a λ, making a redex.
    fn application(&mut self, k: &Kind, ctx: &Ctx, budget: usize) -> Term {
        let candidates: Vec<Kind> = [e(), t(), prop()]
            .into_iter()
            .filter(|c| min_depth(&Kind::fun(c.clone(), k.clone())) < budget && min_depth(c) < budget)
            .collect();
        let c = self.pick(&candidates).clone();
        let f = self.term(&Kind::fun(c.clone(), k.clone()), ctx, budget - 1).0;
        let a = self.term(&c, ctx, budget - 1).0;
        Term::app(f, a)
    }
}

pub fn random_term(seed: u64) -> Term {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        boxes: 0,
    };
    let kinds = [t(), prop(), Kind::quantifier()];
    let k = g.pick(&kinds).clone();
    let budget = g.rng.random_range(min_depth(&k).max(4)..=6);
    g.term(&k, &free_context(), budget).0
}


/// Every property of the engine for one generated term: well-kinded input,
/// normal form agreeing with the second evaluator, capture-free single
/// steps, idempotent reduction.
pub fn check_term(seed: u64) -> Result<(), String> {
    let term = random_term(seed);
    if term.depth() > 6 || term.kind().is_err() {
        return Err(format!("seed {}: generated {} is not a well-kinded term of depth <= 6", seed, term));
    }
    let theirs = oracle_normal_form(&term);
    let ours = normalize(&term).map_err(|e| format!("seed {}: {}", seed, e))?;
    if !ours.alpha_eq(&theirs) {
        return Err(format!("seed {}: engine {} oracle {}", seed, ours, theirs));
    }
    let mut cur = term.clone();
    let mut steps = 0;
    while let Some(next) = reduce_step(&cur).map_err(|e| e.to_string())? {
        if !next.free_vars().is_subset(&cur.free_vars()) {
            return Err(format!("seed {}: capture in {} -> {}", seed, cur, next));
        }
        cur = next;
        steps += 1;
        if steps > 10_000 {
            return Err(format!("seed {}: no normal form", seed));
        }
    }
    if !cur.alpha_eq(&theirs) {
        return Err(format!("seed {}: stepwise {} oracle {}", seed, cur, theirs));
    }
    let once = beta_reduce(&term).map_err(|e| e.to_string())?;
    let twice = beta_reduce(&once).map_err(|e| e.to_string())?;
    if !once.alpha_eq(&twice) {
        return Err(format!("seed {}: beta_reduce not idempotent", seed));
    }
    Ok(())
}
