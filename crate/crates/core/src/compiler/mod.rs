//! Compiles a grammar into [`ParseTables`].

pub mod automaton;
mod dump;
pub mod lookahead;
mod serialize;

pub use automaton::{check_ug_rules, closure, Item, State, UgFilter};
pub use dump::dump_states;
pub use serialize::{deserialize_tables, serialize_tables, TableError, FORMAT_VERSION};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::grammar::{Backbone, GapRole, GapTag, Grammar, SymId, AUGMENTED_RULE};
use crate::term::{anti_unify_all, canonical_order, Term};
use automaton::{build_automaton, phrases_at, Automaton};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LookaheadMode {
    Slr,
    Lalr,
}

impl fmt::Display for LookaheadMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LookaheadMode::Slr => "slr",
            LookaheadMode::Lalr => "lalr",
        })
    }
}

impl FromStr for LookaheadMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "slr" => Ok(LookaheadMode::Slr),
            "lalr" => Ok(LookaheadMode::Lalr),
            other => Err(format!("unknown lookahead mode `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Accept,
    Shift(usize),
    Reduce(usize),
}

/// A transition, carrying the generalization of every UG phrase that can
/// stand after the dot on this symbol in the origin state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Goto {
    pub target: usize,
    pub symbol: Term,
}

/// Entering a state with this obligation puts `symbol` on the `tag` gap
/// list, provided one of `prefixes` matches the top of the stack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapObligation {
    pub tag: GapTag,
    pub symbol: SymId,
    /// Generalized moved phrase.
    pub phrase: Term,
    /// `prefix(p1, ..., pn)` terms: the daughters before the gapped one.
    pub prefixes: Vec<Term>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileStats {
    /// Predictions rejected by the UG check during closure.
    pub closure_filtered: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompileOptions {
    pub mode: LookaheadMode,
    /// Check UG rules when predicting non-kernel items.
    pub ug_filter: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            mode: LookaheadMode::Lalr,
            ug_filter: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParseTables {
    pub mode: LookaheadMode,
    pub grammar: Grammar,
    pub backbone: Backbone,
    pub states: Vec<State>,
    /// Per state, per terminal lookahead: the nondeterministic action set.
    pub actions: Vec<BTreeMap<SymId, Vec<Action>>>,
    /// Per state, per symbol (terminals included): successor and symbol.
    pub gotos: Vec<BTreeMap<SymId, Goto>>,
    /// Per state, per reducible CF rule.
    pub reduce_lookaheads: Vec<BTreeMap<usize, BTreeSet<SymId>>>,
    /// Per state: generalized kernel prefixes `prefix(p1, ..., pn)`.
    pub back_check: Vec<Vec<Term>>,
    pub gap_add: Vec<Vec<GapObligation>>,
    pub stats: CompileStats,
}

pub fn compile(g: &Grammar, mode: LookaheadMode) -> ParseTables {
    compile_with(g, CompileOptions { mode, ..Default::default() })
}

pub fn compile_with(g: &Grammar, opts: CompileOptions) -> ParseTables {
    let backbone = Backbone::build(g);
    let filter = UgFilter::new(g, &backbone, opts.ug_filter);
    let automaton = build_automaton(&backbone, &filter);
    let stats = CompileStats {
        closure_filtered: filter.rejected(),
    };
    assemble_tables(g.clone(), backbone, &automaton, opts.mode, stats)
}

fn sorted_terms(mut v: Vec<Term>) -> Vec<Term> {
    v.sort_by(canonical_order);
    v.dedup_by(|a, b| a.is_variant(b));
    v
}

fn prefix_term(phrases: &[Term]) -> Term {
    Term::app("prefix", phrases.to_vec())
}

/// Generalized `prefix(...)` of the daughters before `dot` over the given
/// UG rules, or the augmented rule's prefix.
fn generalized_prefix(g: &Grammar, b: &Backbone, rule: usize, dot: usize, sources: &[usize]) -> Term {
    if rule == AUGMENTED_RULE {
        let p: Vec<Term> = if dot == 0 { vec![] } else { vec![g.top_phrase()] };
        return prefix_term(&p);
    }
    let _ = b;
    let terms: Vec<Term> = sources
        .iter()
        .map(|&u| prefix_term(&g.rules[u].rhs[..dot]))
        .collect();
    anti_unify_all(&terms).expect("at least one source")
}

fn assemble_tables(
    g: Grammar,
    b: Backbone,
    a: &Automaton,
    mode: LookaheadMode,
    stats: CompileStats,
) -> ParseTables {
    let n = a.states.len();
    let end = b.symbols.end();
    let slr = lookahead::slr_lookaheads(&b);
    let lalr = match mode {
        LookaheadMode::Lalr => Some(lookahead::lalr_lookaheads(a, &b)),
        LookaheadMode::Slr => None,
    };

    let mut actions = vec![BTreeMap::<SymId, Vec<Action>>::new(); n];
    let mut gotos = vec![BTreeMap::new(); n];
    let mut reduce_lookaheads = vec![BTreeMap::new(); n];
    let mut back_check = Vec::with_capacity(n);
    let mut gap_add = Vec::with_capacity(n);

    for (s, state) in a.states.iter().enumerate() {
        for (&sym, &target) in &a.transitions[s] {
            let mut phrases = Vec::new();
            for item in &state.items {
                if item.next_symbol(&b) == Some(sym) {
                    phrases.extend(phrases_at(&g, &b, item.rule(), item.dot()));
                }
            }
            let symbol = anti_unify_all(&phrases).expect("a transition has a source item");
            gotos[s].insert(sym, Goto { target, symbol });
            if b.symbols.is_terminal(sym) {
                actions[s].entry(sym).or_default().push(Action::Shift(target));
            }
        }

        for item in state.items.iter().filter(|i| i.is_complete(&b)) {
            if item.rule() == AUGMENTED_RULE {
                actions[s].entry(end).or_default().push(Action::Accept);
                continue;
            }
            let la = match &lalr {
                Some(l) => l.get(&(s, item.rule())).cloned().unwrap_or_default(),
                None => slr[item.rule()].clone(),
            };
            for &t in &la {
                actions[s].entry(t).or_default().push(Action::Reduce(item.rule()));
            }
            reduce_lookaheads[s].insert(item.rule(), la);
        }
        for acts in actions[s].values_mut() {
            acts.sort();
            acts.dedup();
        }

        back_check.push(sorted_terms(
            state
                .kernel
                .iter()
                .map(|k| generalized_prefix(&g, &b, k.rule(), k.dot(), &b.rules[k.rule()].sources))
                .collect(),
        ));

        let mut obligations: BTreeMap<(GapTag, SymId), (Vec<Term>, Vec<Term>)> = BTreeMap::new();
        for item in &state.items {
            if item.rule() == AUGMENTED_RULE {
                continue;
            }
            let adders: Vec<usize> = b.rules[item.rule()]
                .sources
                .iter()
                .copied()
                .filter(|&u| {
                    let r = &g.rules[u];
                    matches!(r.gap, GapRole::Adds { .. }) && item.dot() + 1 == r.rhs.len()
                })
                .collect();
            for &u in &adders {
                let GapRole::Adds { tag, phrase } = &g.rules[u].gap else { unreachable!() };
                let sym = b.symbols.get(&g.map_to_cf(phrase)).unwrap_or_else(|| {
                    panic!("moved phrase of rule {} has no CF symbol", g.rules[u].id)
                });
                let entry = obligations.entry((*tag, sym)).or_default();
                entry.0.push(phrase.clone());
                entry
                    .1
                    .push(generalized_prefix(&g, &b, item.rule(), item.dot(), &[u]));
            }
        }
        gap_add.push(
            obligations
                .into_iter()
                .map(|((tag, symbol), (phrases, prefixes))| GapObligation {
                    tag,
                    symbol,
                    phrase: anti_unify_all(&phrases).unwrap(),
                    prefixes: sorted_terms(prefixes),
                })
                .collect(),
        );
    }

    ParseTables {
        mode,
        grammar: g,
        backbone: b,
        states: a.states.clone(),
        actions,
        gotos,
        reduce_lookaheads,
        back_check,
        gap_add,
        stats,
    }
}

impl ParseTables {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn actions_at(&self, state: usize, sym: SymId) -> &[Action] {
        self.actions[state].get(&sym).map_or(&[], |v| v.as_slice())
    }

    pub fn goto(&self, state: usize, sym: SymId) -> Option<&Goto> {
        self.gotos[state].get(&sym)
    }

    /// Total number of (state, lookahead, reduce) entries.
    pub fn reduce_entry_count(&self) -> usize {
        self.reduce_lookaheads
            .iter()
            .flat_map(|m| m.values())
            .map(BTreeSet::len)
            .sum()
    }

    /// Structural sanity: every referenced state, rule and symbol exists.
    pub(crate) fn validate(&self) -> Result<(), String> {
        let n = self.states.len();
        let rules = self.backbone.rules.len();
        let syms = self.backbone.symbols.len();
        let per_state = [
            self.actions.len(),
            self.gotos.len(),
            self.reduce_lookaheads.len(),
            self.back_check.len(),
            self.gap_add.len(),
        ];
        if n == 0 || per_state.iter().any(|&k| k != n) {
            return Err("per-state sections disagree on the number of states".into());
        }
        for s in 0..n {
            for (sym, acts) in &self.actions[s] {
                if sym.index() >= syms {
                    return Err(format!("state {s}: unknown symbol {}", sym.0));
                }
                for a in acts {
                    match *a {
                        Action::Shift(t) if t >= n => return Err(format!("state {s}: shift to missing state {t}")),
                        Action::Reduce(r) if r >= rules => return Err(format!("state {s}: reduce by missing rule {r}")),
                        _ => {}
                    }
                }
            }
            for (sym, goto) in &self.gotos[s] {
                if sym.index() >= syms || goto.target >= n {
                    return Err(format!("state {s}: goto to missing state {}", goto.target));
                }
            }
            for item in &self.states[s].items {
                let r = self.backbone.rules.get(item.rule()).ok_or_else(|| format!("state {s}: missing rule"))?;
                if item.dot() > r.rhs.len() {
                    return Err(format!("state {s}: dot out of range"));
                }
            }
        }
        for r in &self.backbone.rules {
            if r.sources.iter().any(|&u| u >= self.grammar.rules.len()) {
                return Err("CF rule refers to a missing UG rule".into());
            }
        }
        for lx in &self.backbone.lexemes {
            if lx.sources.iter().any(|&e| e >= self.grammar.lexicon.len()) {
                return Err("lexeme refers to a missing lexical entry".into());
            }
        }
        Ok(())
    }
}
