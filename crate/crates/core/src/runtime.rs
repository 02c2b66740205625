//! Phase one: depth-first backtracking LR parsing over the generalized
//! grammar.
//!
//! A configuration is a stack of states and phrase-carrying frames, the
//! input position, the lookahead constraint and two gap lists. Every
//! applicable action yields a successor configuration; successors are
//! explored depth-first from an explicit agenda, so running out of actions
//! is backtracking.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use thiserror::Error;

use crate::compiler::{Action, ParseTables};
use crate::grammar::{GapRole, GapTag, GeneralizedLexeme, SymId};
use crate::term::{Substitution, Term};
use crate::tree::PhaseOneTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BackCheckMode {
    /// Check kernel prefixes on every state entry.
    All,
    /// Check only before pushing onto a gap list.
    #[default]
    Gaps,
    /// Never check; gap pushes are ungated.
    Off,
}

impl FromStr for BackCheckMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(BackCheckMode::All),
            "gaps" => Ok(BackCheckMode::Gaps),
            "off" => Ok(BackCheckMode::Off),
            other => Err(format!("unknown back-check mode `{other}`")),
        }
    }
}

impl fmt::Display for BackCheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackCheckMode::All => "all",
            BackCheckMode::Gaps => "gaps",
            BackCheckMode::Off => "off",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseOptions {
    pub max_solutions: Option<usize>,
    pub max_steps: usize,
    pub back_check: BackCheckMode,
    /// Pass the intersection of the lookahead set and the reduce lookaheads
    /// on to the next cycle.
    pub intersect: bool,
    /// Use the source UG rules and lexical entries instead of their
    /// generalizations, trying each nondeterministically.
    pub full_ug: bool,
    /// Plain CF parsing: no unification, no gap licensing.
    pub pure_cf: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            max_solutions: None,
            max_steps: 1_000_000,
            back_check: BackCheckMode::Gaps,
            intersect: true,
            full_ug: false,
            pure_cf: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseOutcome {
    /// The search space was exhausted.
    Complete,
    StepLimit,
    SolutionLimit,
}

impl fmt::Display for ParseOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseOutcome::Complete => "complete",
            ParseOutcome::StepLimit => "step-limit",
            ParseOutcome::SolutionLimit => "solution-limit",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseStats {
    /// Configurations taken from the agenda.
    pub steps: usize,
    /// Failed actions plus configurations with no applicable action.
    pub backtracks: usize,
    pub gap_pushes: usize,
    pub gap_pops: usize,
    pub solutions: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unknown word `{word}` at position {position}")]
    UnknownWord { word: String, position: usize },
}

#[derive(Clone, Debug)]
pub struct ParseResult {
    pub trees: Vec<PhaseOneTree>,
    pub stats: ParseStats,
    pub outcome: ParseOutcome,
}

#[derive(Clone)]
struct Frame {
    /// Variables of different frames are disjoint.
    phrase: Term,
    node: Rc<PhaseOneTree>,
}

#[derive(Clone)]
struct Config {
    states: Vec<usize>,
    frames: Vec<Frame>,
    pos: usize,
    lookahead: Rc<BTreeSet<SymId>>,
    gaps: [Vec<SymId>; 2],
    next_var: u32,
}

impl Config {
    fn top(&self) -> usize {
        *self.states.last().expect("stack holds state 0")
    }

    fn fresh(&mut self, count: u32) -> u32 {
        let base = self.next_var;
        self.next_var += count;
        base
    }

    /// Canonical form of `t` moved into a fresh variable block.
    fn adopt(&mut self, t: Term) -> Term {
        let c = t.canonical();
        let off = self.fresh(c.var_bound());
        c.rename(off)
    }
}

pub struct Parser<'t> {
    tables: &'t ParseTables,
    options: ParseOptions,
}

impl<'t> Parser<'t> {
    pub fn new(tables: &'t ParseTables, options: ParseOptions) -> Self {
        Parser { tables, options }
    }

    pub fn tables(&self) -> &'t ParseTables {
        self.tables
    }

    /// Generalized lexemes of a word, one per CF symbol it maps to.
    pub fn lex_all(&self, word: &str) -> &'t [GeneralizedLexeme] {
        self.tables.backbone.lex_all(word)
    }

    /// CF symbols the word at `position` can be read as; `{$end}` past the
    /// last word.
    pub fn lookahead_set(&self, words: &[&str], position: usize) -> BTreeSet<SymId> {
        match words.get(position) {
            Some(w) => self.lex_all(w).iter().map(|l| l.cf).collect(),
            None => BTreeSet::from([self.tables.backbone.symbols.end()]),
        }
    }

    /// Phrases currently on top of the stack match one of `prefixes`
    /// (each a `prefix(p1, ..., pn)` term), renamed apart.
    fn back_check(&self, prefixes: &[Term], c: &Config) -> bool {
        prefixes.iter().any(|p| {
            let d = p.arity();
            if d > c.frames.len() {
                return false;
            }
            let p = p.rename(c.next_var);
            let top = &c.frames[c.frames.len() - d..];
            Substitution::new().unify_all(p.args().iter().zip(top.iter().map(|f| &f.phrase)))
        })
    }

    /// Pushes `state` and handles what entering it implies: the optional
    /// general back-check and gap additions. False if the entry is pruned.
    fn enter(&self, c: &mut Config, state: usize, stats: &mut ParseStats) -> bool {
        c.states.push(state);
        if self.options.pure_cf {
            return true;
        }
        let t = self.tables;
        if self.options.back_check == BackCheckMode::All && !self.back_check(&t.back_check[state], c) {
            return false;
        }
        for ob in &t.gap_add[state] {
            if self.options.back_check == BackCheckMode::Off || self.back_check(&ob.prefixes, c) {
                c.gaps[ob.tag.index()].push(ob.symbol);
                stats.gap_pushes += 1;
            }
        }
        true
    }

    /// Gap lists an empty production of `rule` may consume from.
    fn consumed_tags(&self, rule: usize) -> Vec<GapTag> {
        let g = &self.tables.grammar;
        let mut tags: Vec<GapTag> = self.tables.backbone.rules[rule]
            .sources
            .iter()
            .filter_map(|&u| match g.rules[u].gap {
                GapRole::Consumes { tag } => Some(tag),
                _ => None,
            })
            .collect();
        tags.sort();
        tags.dedup();
        tags
    }

    fn shift(&self, c: &Config, sym: SymId, target: usize, words: &[&str], out: &mut Vec<Config>, stats: &mut ParseStats) {
        let t = self.tables;
        let lexemes = self.lex_all(words[c.pos]);
        let Some(lx) = lexemes.iter().find(|l| l.cf == sym) else { return };
        let lexeme = t.backbone.lexeme_index(lx);
        let phrases: Vec<&Term> = if self.options.full_ug && !self.options.pure_cf {
            lx.sources.iter().map(|&e| &t.grammar.lexicon[e].phrase).collect()
        } else {
            vec![&lx.phrase]
        };
        for phrase in phrases {
            let mut n = c.clone();
            let mut phrase = n.adopt(phrase.clone());
            if !self.options.pure_cf {
                let goto = t.goto(c.top(), sym).expect("shift has a transition");
                let sym_term = goto.symbol.rename(n.fresh(goto.symbol.var_bound()));
                let mut s = Substitution::new();
                if !s.unify(&phrase, &sym_term) {
                    stats.backtracks += 1;
                    continue;
                }
                phrase = s.apply(&phrase);
            }
            n.frames.push(Frame {
                phrase,
                node: Rc::new(PhaseOneTree::Leaf {
                    word: words[c.pos].to_string(),
                    position: c.pos,
                    lexeme,
                }),
            });
            n.pos += 1;
            n.lookahead = Rc::new(self.lookahead_set(words, n.pos));
            if self.enter(&mut n, target, stats) {
                out.push(n);
            } else {
                stats.backtracks += 1;
            }
        }
    }

    fn reduce(&self, c: &Config, rule: usize, out: &mut Vec<Config>, stats: &mut ParseStats) {
        let t = self.tables;
        let cf = &t.backbone.rules[rule];
        let n_rhs = cf.rhs.len();
        let mut base = c.clone();

        let mut consumed = None;
        if n_rhs == 0 && !self.options.pure_cf {
            let tag = self
                .consumed_tags(rule)
                .into_iter()
                .find(|tag| base.gaps[tag.index()].last() == Some(&cf.lhs));
            match tag {
                Some(tag) => consumed = Some(tag),
                None => {
                    stats.backtracks += 1;
                    return;
                }
            }
        }

        let la = &t.reduce_lookaheads[c.top()][&rule];
        if self.options.intersect {
            base.lookahead = Rc::new(c.lookahead.intersection(la).copied().collect());
        }
        let split = base.frames.len() - n_rhs;
        let popped = base.frames.split_off(split);
        base.states.truncate(base.states.len() - n_rhs);
        let uncovered = base.top();
        let Some(goto) = t.goto(uncovered, cf.lhs) else {
            stats.backtracks += 1;
            return;
        };
        if let Some(tag) = consumed {
            base.gaps[tag.index()].clear();
            stats.gap_pops += 1;
        }
        let node = Rc::new(if n_rhs == 0 {
            PhaseOneTree::Gap { rule }
        } else {
            PhaseOneTree::Apply {
                rule,
                children: popped.iter().map(|f| f.node.clone()).collect(),
            }
        });

        // (lhs, rhs, variable count) of each rule version to try
        let versions: Vec<(&Term, &[Term], u32)> = if self.options.pure_cf {
            vec![]
        } else if self.options.full_ug {
            cf.sources
                .iter()
                .map(|&u| {
                    let r = &t.grammar.rules[u];
                    (&r.lhs, r.rhs.as_slice(), r.var_count)
                })
                .collect()
        } else {
            let gr = &t.backbone.generalized[rule];
            vec![(&gr.lhs, gr.rhs.as_slice(), gr.var_count)]
        };

        if self.options.pure_cf {
            let mut n = base;
            n.frames.push(Frame {
                phrase: t.backbone.symbols.term(cf.lhs).clone(),
                node,
            });
            if self.enter(&mut n, goto.target, stats) {
                out.push(n);
            }
            return;
        }

        for (lhs, rhs, var_count) in versions {
            let mut n = base.clone();
            let off = n.fresh(var_count);
            let sym_off = n.fresh(goto.symbol.var_bound());
            let lhs = lhs.rename(off);
            let rhs: Vec<Term> = rhs.iter().map(|p| p.rename(off)).collect();
            let sym_term = goto.symbol.rename(sym_off);
            let mut s = Substitution::new();
            let ok = s.unify_all(rhs.iter().zip(popped.iter().map(|f| &f.phrase))) && s.unify(&lhs, &sym_term);
            if !ok {
                stats.backtracks += 1;
                continue;
            }
            let phrase = n.adopt(s.apply(&lhs));
            n.frames.push(Frame {
                phrase,
                node: node.clone(),
            });
            if self.enter(&mut n, goto.target, stats) {
                out.push(n);
            } else {
                stats.backtracks += 1;
            }
        }
    }

    /// Enumerates phase-one trees depth-first, within the option limits.
    pub fn parse(&self, sentence: &str) -> Result<ParseResult, ParseError> {
        let words: Vec<&str> = sentence.split_whitespace().collect();
        self.parse_words(&words)
    }

    pub fn parse_words(&self, words: &[&str]) -> Result<ParseResult, ParseError> {
        if let Some((position, word)) = words.iter().enumerate().find(|(_, w)| self.lex_all(w).is_empty()) {
            return Err(ParseError::UnknownWord {
                word: word.to_string(),
                position,
            });
        }
        let t = self.tables;
        let end = t.backbone.symbols.end();
        let mut stats = ParseStats::default();
        let mut trees = Vec::new();
        let mut seen = HashSet::new();
        let mut start = Config {
            states: vec![],
            frames: vec![],
            pos: 0,
            lookahead: Rc::new(self.lookahead_set(words, 0)),
            gaps: [vec![], vec![]],
            next_var: 0,
        };
        let mut agenda = Vec::new();
        if self.enter(&mut start, 0, &mut stats) {
            agenda.push(start);
        }

        let mut outcome = ParseOutcome::Complete;
        let mut successors = Vec::new();
        while let Some(c) = agenda.pop() {
            if stats.steps >= self.options.max_steps {
                outcome = ParseOutcome::StepLimit;
                break;
            }
            stats.steps += 1;
            let state = c.top();

            let mut accept = false;
            let mut shifts = BTreeSet::new();
            let mut reduces = BTreeSet::new();
            for &sym in c.lookahead.iter() {
                for a in t.actions_at(state, sym) {
                    match *a {
                        Action::Accept => accept |= sym == end && c.pos == words.len(),
                        Action::Shift(target) => {
                            if c.pos < words.len() {
                                shifts.insert((sym, target));
                            }
                        }
                        Action::Reduce(r) => {
                            reduces.insert(r);
                        }
                    }
                }
            }

            if accept {
                let tree = PhaseOneTree::clone(&c.frames[0].node);
                // with source rules tried separately the same tree can recur
                if !self.options.full_ug || seen.insert(tree.clone()) {
                    trees.push(tree);
                    stats.solutions += 1;
                    if self.options.max_solutions.is_some_and(|m| trees.len() >= m) {
                        outcome = ParseOutcome::SolutionLimit;
                        break;
                    }
                }
            }

            successors.clear();
            for &(sym, target) in &shifts {
                self.shift(&c, sym, target, words, &mut successors, &mut stats);
            }
            for &r in &reduces {
                self.reduce(&c, r, &mut successors, &mut stats);
            }
            if successors.is_empty() && !accept {
                stats.backtracks += 1;
            }
            // first action on top of the agenda
            agenda.extend(successors.drain(..).rev());
        }
        Ok(ParseResult { trees, stats, outcome })
    }
}
