//! First-order terms: unification, anti-unification, subsumption and a
//! canonical total order.
//!
//! Variables are plain numeric ids. Terms that come from different rules are
//! kept apart by [`Term::rename`] with an offset obtained from a [`VarGen`].

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::lexer::{SyntaxError, Tok, Tokens};

pub type Atom = Arc<str>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

/// A variable or a functor applied to arguments. Atoms are zero-arity
/// applications.
///
/// The derived `Ord` is total and agrees with syntactic equality: variables
/// sort before compounds, compounds compare by functor name and then by
/// argument list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    App(Atom, Vec<Term>),
}

impl Term {
    pub fn var(id: u32) -> Term {
        Term::Var(Var(id))
    }

    pub fn atom(name: &str) -> Term {
        Term::App(Arc::from(name), Vec::new())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(Arc::from(name), args)
    }

    pub fn functor(&self) -> Option<&str> {
        match self {
            Term::App(f, _) => Some(f),
            Term::Var(_) => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            Term::Var(_) => &[],
        }
    }

    pub fn arity(&self) -> usize {
        self.args().len()
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Variables in depth-first, left-to-right first-occurrence order.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// One past the largest variable id, or 0 for ground terms.
    pub fn var_bound(&self) -> u32 {
        match self {
            Term::Var(Var(n)) => n + 1,
            Term::App(_, args) => args.iter().map(Term::var_bound).max().unwrap_or(0),
        }
    }

    pub fn occurs(&self, v: Var) -> bool {
        match self {
            Term::Var(w) => *w == v,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(*v),
            Term::App(name, args) => {
                Term::App(name.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }

    /// Shifts every variable id by `offset`.
    pub fn rename(&self, offset: u32) -> Term {
        if offset == 0 {
            return self.clone();
        }
        self.map_vars(&mut |Var(n)| Term::var(n + offset))
    }

    /// Renumbers variables 0, 1, ... in first-occurrence order.
    pub fn canonical(&self) -> Term {
        let mut seen: HashMap<Var, u32> = HashMap::new();
        self.map_vars(&mut |v| {
            let next = seen.len() as u32;
            Term::var(*seen.entry(v).or_insert(next))
        })
    }

    /// Equality up to a bijective renaming of variables.
    pub fn is_variant(&self, other: &Term) -> bool {
        self.canonical() == other.canonical()
    }

    /// Reads a term, giving each distinct variable name a fresh id from 0.
    pub fn parse(src: &str) -> Result<Term, SyntaxError> {
        let mut toks = Tokens::new(src)?;
        let mut scope = VarScope::named();
        let t = parse_term(&mut toks, &mut scope)?;
        expect_end(&toks)?;
        Ok(t)
    }

    /// Reads a term printed by `Display`: `_N` denotes variable id N.
    pub fn parse_numbered(src: &str) -> Result<Term, SyntaxError> {
        let mut toks = Tokens::new(src)?;
        let t = parse_term(&mut toks, &mut VarScope::Numbered)?;
        expect_end(&toks)?;
        Ok(t)
    }
}

fn expect_end(toks: &Tokens) -> Result<(), SyntaxError> {
    if toks.is_eof() {
        Ok(())
    } else {
        Err(SyntaxError::new(
            toks.location(),
            format!("unexpected {} after term", toks.peek()),
        ))
    }
}

/// Maps variable names to ids while reading.
pub enum VarScope {
    Named { names: HashMap<String, u32>, next: u32 },
    Numbered,
}

impl VarScope {
    pub fn named() -> Self {
        VarScope::Named {
            names: HashMap::new(),
            next: 0,
        }
    }

    /// Number of ids handed out so far (named scopes only).
    pub fn count(&self) -> u32 {
        match self {
            VarScope::Named { next, .. } => *next,
            VarScope::Numbered => 0,
        }
    }

    pub fn fresh(&mut self) -> Term {
        match self {
            VarScope::Named { next, .. } => {
                *next += 1;
                Term::var(*next - 1)
            }
            VarScope::Numbered => unreachable!("anonymous variables in numbered term text"),
        }
    }

    pub fn lookup(&mut self, name: &str, at: crate::lexer::Location) -> Result<Term, SyntaxError> {
        match self {
            VarScope::Named { names, next } => {
                if name == "_" {
                    *next += 1;
                    return Ok(Term::var(*next - 1));
                }
                let id = *names.entry(name.to_string()).or_insert_with(|| {
                    *next += 1;
                    *next - 1
                });
                Ok(Term::var(id))
            }
            VarScope::Numbered => name
                .strip_prefix('_')
                .and_then(|d| d.parse::<u32>().ok())
                .map(Term::var)
                .ok_or_else(|| SyntaxError::new(at, format!("expected numbered variable, found `{name}`"))),
        }
    }
}

/// Plain term syntax: `f(a, X)`, atoms, variables. No feature sugar.
pub fn parse_term(toks: &mut Tokens, scope: &mut VarScope) -> Result<Term, SyntaxError> {
    let at = toks.location();
    match toks.advance().tok {
        Tok::Var(name) => scope.lookup(&name, at),
        Tok::Atom(name) => {
            let mut args = Vec::new();
            if toks.eat(&Tok::LParen) {
                loop {
                    args.push(parse_term(toks, scope)?);
                    if toks.eat(&Tok::Comma) {
                        continue;
                    }
                    toks.expect(Tok::RParen)?;
                    break;
                }
            }
            Ok(Term::App(Arc::from(name.as_str()), args))
        }
        other => Err(SyntaxError::new(at, format!("expected a term, found {other}"))),
    }
}

pub(crate) fn is_bare_atom(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_lowercase() || c.is_ascii_digit() => {}
        Some('$') => return s.len() > 1 && s[1..].chars().all(|c| c.is_alphanumeric() || c == '_'),
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_')
}

pub(crate) fn write_atom(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    if is_bare_atom(s) {
        f.write_str(s)
    } else {
        f.write_char('\'')?;
        for c in s.chars() {
            if c == '\'' || c == '\\' {
                f.write_char('\\')?;
            }
            f.write_char(c)?;
        }
        f.write_char('\'')
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(Var(n)) => write!(f, "_{n}"),
            Term::App(name, args) => {
                write_atom(f, name)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Term::parse_numbered(&s).map_err(serde::de::Error::custom)
    }
}

/// Hands out blocks of fresh variable ids.
#[derive(Clone, Debug, Default)]
pub struct VarGen {
    next: u32,
}

impl VarGen {
    pub fn starting_at(next: u32) -> Self {
        VarGen { next }
    }

    /// Reserves `count` ids and returns the offset of the block.
    pub fn reserve(&mut self, count: u32) -> u32 {
        let base = self.next;
        self.next += count;
        base
    }

    /// Renames `t` into a freshly reserved block.
    pub fn fresh_copy(&mut self, t: &Term) -> Term {
        let off = self.reserve(t.var_bound());
        t.rename(off)
    }

    pub fn fresh_var(&mut self) -> Term {
        Term::var(self.reserve(1))
    }
}

/// Triangular variable bindings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Substitution {
    map: HashMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.map.get(&v)
    }

    /// Bindings sorted by variable, for stable inspection.
    pub fn bindings(&self) -> Vec<(Var, Term)> {
        let mut v: Vec<_> = self.map.iter().map(|(k, t)| (*k, t.clone())).collect();
        v.sort();
        v
    }

    fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.map.get(v) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    /// Fully resolves `t` under the current bindings.
    pub fn apply(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Var(v) => Term::Var(*v),
            Term::App(name, args) => {
                Term::App(name.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
        }
    }

    fn occurs(&self, v: Var, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(w) => *w == v,
            Term::App(_, args) => args.iter().any(|a| self.occurs(v, a)),
        }
    }

    /// Extends the bindings with a most general unifier of `a` and `b`.
    /// On failure the substitution is left unchanged.
    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let mut trail = Vec::new();
        if self.unify_inner(a, b, &mut trail) {
            true
        } else {
            for v in trail {
                self.map.remove(&v);
            }
            false
        }
    }

    fn unify_inner(&mut self, a: &Term, b: &Term, trail: &mut Vec<Var>) -> bool {
        let a = self.walk(a).clone();
        let b = self.walk(b).clone();
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if self.occurs(*x, t) {
                    return false;
                }
                self.map.insert(*x, t.clone());
                trail.push(*x);
                true
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys).all(|(x, y)| self.unify_inner(x, y, trail))
            }
        }
    }

    /// Element-wise unification of two equally long sequences.
    pub fn unify_all<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a Term, &'a Term)>) -> bool {
        let saved = self.clone();
        for (a, b) in pairs {
            if !self.unify(a, b) {
                *self = saved;
                return false;
            }
        }
        true
    }

    /// Rewrites every binding to its fully resolved form.
    pub fn normalized(&self) -> Substitution {
        Substitution {
            map: self.map.keys().map(|v| (*v, self.apply(&Term::Var(*v)))).collect(),
        }
    }
}

/// Most general unifier of `a` and `b`, with the occurs check.
pub fn unify(a: &Term, b: &Term) -> Option<Substitution> {
    let mut s = Substitution::new();
    s.unify(a, b).then(|| s.normalized())
}

/// Least general generalization (Plotkin). Identical disagreement pairs map
/// to the same variable. The result is canonically numbered.
pub fn anti_unify(a: &Term, b: &Term) -> Term {
    let mut pairs: HashMap<(Term, Term), u32> = HashMap::new();
    let mut next = a.var_bound().max(b.var_bound());
    lgg(a, b, &mut pairs, &mut next).canonical()
}

fn lgg(a: &Term, b: &Term, pairs: &mut HashMap<(Term, Term), u32>, next: &mut u32) -> Term {
    if a == b {
        return a.clone();
    }
    match (a, b) {
        (Term::App(f, xs), Term::App(g, ys)) if f == g && xs.len() == ys.len() => Term::App(
            f.clone(),
            xs.iter().zip(ys).map(|(x, y)| lgg(x, y, pairs, next)).collect(),
        ),
        _ => {
            let id = *pairs.entry((a.clone(), b.clone())).or_insert_with(|| {
                *next += 1;
                *next - 1
            });
            Term::var(id)
        }
    }
}

/// Left fold of [`anti_unify`]; `None` for an empty input.
pub fn anti_unify_all<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Option<Term> {
    let mut it = terms.into_iter();
    let first = it.next()?.canonical();
    Some(it.fold(first, |acc, t| anti_unify(&acc, t)))
}

/// True iff some substitution over the variables of `general` maps it onto
/// `specific`. Variables of `specific` are treated as constants.
pub fn subsumes(general: &Term, specific: &Term) -> bool {
    fn go<'a>(g: &Term, s: &'a Term, bound: &mut HashMap<Var, &'a Term>) -> bool {
        match g {
            Term::Var(v) => match bound.get(v) {
                Some(prev) => *prev == s,
                None => {
                    bound.insert(*v, s);
                    true
                }
            },
            Term::App(f, xs) => match s {
                Term::App(g2, ys) if f == g2 && xs.len() == ys.len() => {
                    xs.iter().zip(ys).all(|(x, y)| go(x, y, bound))
                }
                _ => false,
            },
        }
    }
    go(general, specific, &mut HashMap::new())
}

/// Total order used for every set dump: compare canonical forms, then raw
/// forms so that distinct variants still get a fixed order.
pub fn canonical_order(a: &Term, b: &Term) -> Ordering {
    a.canonical().cmp(&b.canonical()).then_with(|| a.cmp(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str) -> Term {
        Term::parse(s).unwrap()
    }

    #[test]
    fn unify_binds_variable() {
        let s = unify(&t("X"), &t("f(a)")).unwrap();
        assert_eq!(s.apply(&Term::var(0)), t("f(a)"));
    }

    #[test]
    fn unify_decomposes() {
        let a = t("f(X, b)");
        let b = Term::parse("f(a, Y)").unwrap().rename(1);
        let s = unify(&a, &b).unwrap();
        assert_eq!(s.apply(&a), t("f(a,b)"));
        assert_eq!(s.apply(&b), t("f(a,b)"));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn unify_clash() {
        assert!(unify(&t("v(Agr, intran)"), &t("v(Agr2, tran)")).is_none());
    }

    #[test]
    fn occurs_check() {
        assert!(unify(&t("X"), &t("f(X)")).is_none());
        assert!(unify(&t("f(X, Y)"), &t("f(Y, g(X))")).is_none());
    }

    #[test]
    fn failed_unify_leaves_bindings_untouched() {
        let mut s = Substitution::new();
        assert!(s.unify(&t("X"), &t("a")));
        let before = s.clone();
        assert!(!s.unify(&t("f(Y, X)"), &t("f(b, c)")));
        assert_eq!(s, before);
    }

    #[test]
    fn lgg_of_verbs() {
        let g = anti_unify(&t("v(Agr, intran)"), &t("v(Agr, tran)"));
        assert!(g.is_variant(&t("v(A, B)")));
    }

    #[test]
    fn lgg_identity_and_shared_pairs() {
        let x = t("f(X, g(Y, X))");
        assert!(anti_unify(&x, &x).is_variant(&x));
        assert_eq!(anti_unify(&t("f(a, a)"), &t("f(b, b)")), t("f(X, X)"));
        assert_eq!(anti_unify(&t("f(a, a)"), &t("f(b, c)")), t("f(X, Y)"));
    }

    #[test]
    fn subsumption_direction() {
        assert!(subsumes(&t("v(A, S)"), &t("v(A2, intran)")));
        assert!(!subsumes(&t("v(A, intran)"), &t("v(A2, S)")));
        assert!(!subsumes(&t("f(X, X)"), &t("f(a, b)")));
        assert!(subsumes(&t("X"), &t("f(X)")));
    }

    #[test]
    fn ordering_examples() {
        assert_eq!(canonical_order(&t("det"), &t("prep")), Ordering::Less);
        assert_eq!(canonical_order(&t("v(intran)"), &t("v(tran)")), Ordering::Less);
        let mut syms: Vec<Term> = ["v", "prep", "det", "n", "pron", "$end"].iter().map(|s| t(s)).collect();
        syms.sort_by(canonical_order);
        let once = syms.clone();
        syms.sort_by(canonical_order);
        assert_eq!(syms, once);
        assert_eq!(once[0], Term::atom("$end"));
    }

    #[test]
    fn display_round_trip() {
        let x = Term::app("f", vec![Term::var(3), Term::atom("Det"), Term::atom("$end")]);
        assert_eq!(x.to_string(), "f(_3,'Det',$end)");
        assert_eq!(Term::parse_numbered(&x.to_string()).unwrap(), x);
        assert!(Term::parse_numbered("f(X)").is_err());
    }

    #[test]
    fn parse_scoping() {
        let x = t("f(X, _, X, _)");
        assert_eq!(x, Term::app("f", vec![Term::var(0), Term::var(1), Term::var(0), Term::var(2)]));
        assert!(Term::parse("f(a").is_err());
        assert!(Term::parse("f(a) b").is_err());
    }

    pub(crate) fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            (0u32..4).prop_map(Term::var),
            prop_oneof![Just("a"), Just("b")].prop_map(Term::atom),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|x| Term::app("g", vec![x])),
                (inner.clone(), inner).prop_map(|(x, y)| Term::app("f", vec![x, y])),
            ]
        })
    }

    proptest! {
        #[test]
        fn unify_sound_and_symmetric(a in arb_term(), b in arb_term()) {
            let ab = unify(&a, &b);
            let ba = unify(&b, &a);
            prop_assert_eq!(ab.is_some(), ba.is_some());
            if let (Some(s1), Some(s2)) = (ab, ba) {
                prop_assert_eq!(s1.apply(&a), s1.apply(&b));
                prop_assert!(s1.apply(&a).is_variant(&s2.apply(&a)));
                prop_assert!(subsumes(&a, &s1.apply(&a)));
                prop_assert!(subsumes(&b, &s1.apply(&b)));
                // idempotent
                let once = s1.apply(&a);
                prop_assert_eq!(s1.apply(&once), once);
            }
        }

        #[test]
        fn lgg_laws(a in arb_term(), b in arb_term(), c in arb_term()) {
            let g = anti_unify(&a, &b);
            prop_assert!(subsumes(&g, &a));
            prop_assert!(subsumes(&g, &b));
            prop_assert!(g.is_variant(&anti_unify(&b, &a)));
            let left = anti_unify(&anti_unify(&a, &b), &c);
            let right = anti_unify(&a, &anti_unify(&b, &c));
            prop_assert!(left.is_variant(&right));
            // any common generalization subsumes the lgg
            let coarser = anti_unify(&g, &c);
            prop_assert!(subsumes(&coarser, &g));
        }

        #[test]
        fn subsumption_preorder(a in arb_term(), b in arb_term()) {
            prop_assert!(subsumes(&a, &a));
            let sigma = unify(&a.rename(8), &b);
            if let Some(s) = sigma {
                let mid = s.apply(&a.rename(8));
                prop_assert!(subsumes(&a, &mid));
                let lower = mid.map_vars(&mut |_| Term::atom("a"));
                prop_assert!(subsumes(&mid, &lower));
                prop_assert!(subsumes(&a, &lower));
            }
        }
    }
}
