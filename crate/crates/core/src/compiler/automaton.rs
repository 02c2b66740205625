//! LR(0) item sets over the CF backbone. Non-kernel items are predicted
//! only when the unification grammar allows it, and are never instantiated,
//! so the item universe stays finite.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::grammar::{Backbone, Grammar, SymId, AUGMENTED_RULE};
use crate::term::{Substitution, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Item {
    pub rule: u32,
    pub dot: u32,
}

impl Item {
    pub fn new(rule: usize, dot: usize) -> Self {
        Item {
            rule: rule as u32,
            dot: dot as u32,
        }
    }

    pub fn rule(self) -> usize {
        self.rule as usize
    }

    pub fn dot(self) -> usize {
        self.dot as usize
    }

    /// Symbol right after the dot, if any.
    pub fn next_symbol(self, b: &Backbone) -> Option<SymId> {
        b.rules[self.rule()].rhs.get(self.dot()).copied()
    }

    pub fn is_complete(self, b: &Backbone) -> bool {
        self.dot() == b.rules[self.rule()].rhs.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct State {
    /// Sorted, duplicate free. Two states are the same iff kernels are equal.
    pub kernel: Vec<Item>,
    /// Kernel plus non-kernel items, sorted.
    pub items: Vec<Item>,
}

/// UG phrases standing right after the dot of `rule` at `dot`: one per
/// source UG rule, or the most general top phrase for the augmented rule.
pub fn phrases_at(g: &Grammar, b: &Backbone, rule: usize, dot: usize) -> Vec<Term> {
    if rule == AUGMENTED_RULE {
        return vec![g.top_phrase()];
    }
    b.rules[rule]
        .sources
        .iter()
        .map(|&u| g.rules[u].rhs[dot].clone())
        .collect()
}

/// True iff the phrase after the dot in some UG rule of `r1` unifies with
/// the left-hand side of some UG rule of `r2` (renamed apart).
pub fn check_ug_rules(g: &Grammar, b: &Backbone, r1: usize, r2: usize, dot: usize) -> bool {
    let after_dot = phrases_at(g, b, r1, dot);
    after_dot.iter().any(|p| {
        let off = p.var_bound();
        b.rules[r2].sources.iter().any(|&u| {
            let lhs = g.rules[u].lhs.rename(off);
            Substitution::new().unify(p, &lhs)
        })
    })
}

/// Memoizing wrapper around [`check_ug_rules`]; when disabled every
/// prediction whose CF symbols match is accepted.
pub struct UgFilter<'a> {
    grammar: &'a Grammar,
    backbone: &'a Backbone,
    enabled: bool,
    cache: RefCell<HashMap<(usize, usize, usize), bool>>,
}

impl<'a> UgFilter<'a> {
    pub fn new(grammar: &'a Grammar, backbone: &'a Backbone, enabled: bool) -> Self {
        UgFilter {
            grammar,
            backbone,
            enabled,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn allows(&self, r1: usize, r2: usize, dot: usize) -> bool {
        if !self.enabled {
            return true;
        }
        *self
            .cache
            .borrow_mut()
            .entry((r1, r2, dot))
            .or_insert_with(|| check_ug_rules(self.grammar, self.backbone, r1, r2, dot))
    }

    /// Distinct (rule, dot, predicted rule) triples rejected so far.
    pub fn rejected(&self) -> usize {
        self.cache.borrow().values().filter(|ok| !**ok).count()
    }
}

/// Agenda-driven closure: every item taken from the agenda contributes its
/// predicted items, and only the ones not yet in the set go back on the
/// agenda.
pub fn closure(seed: &[Item], b: &Backbone, filter: &UgFilter<'_>) -> Vec<Item> {
    let mut set: BTreeSet<Item> = seed.iter().copied().collect();
    let mut agenda: Vec<Item> = set.iter().copied().collect();
    while let Some(item) = agenda.pop() {
        let Some(sym) = item.next_symbol(b) else { continue };
        if b.symbols.is_terminal(sym) {
            continue;
        }
        for (r2, rule) in b.rules.iter().enumerate() {
            if rule.lhs == sym && filter.allows(item.rule(), r2, item.dot()) {
                let predicted = Item::new(r2, 0);
                if set.insert(predicted) {
                    agenda.push(predicted);
                }
            }
        }
    }
    set.into_iter().collect()
}

pub struct Automaton {
    pub states: Vec<State>,
    /// Per state: symbol → successor state, for terminals and nonterminals.
    pub transitions: Vec<BTreeMap<SymId, usize>>,
}

/// Breadth-first induction from the augmented item. Successors are created
/// in symbol order, so numbering is deterministic.
pub fn build_automaton(b: &Backbone, filter: &UgFilter<'_>) -> Automaton {
    let start = vec![Item::new(AUGMENTED_RULE, 0)];
    let mut states = vec![State {
        items: closure(&start, b, filter),
        kernel: start.clone(),
    }];
    let mut by_kernel: HashMap<Vec<Item>, usize> = HashMap::from([(start, 0)]);
    let mut transitions = vec![BTreeMap::new()];
    let mut queue = VecDeque::from([0usize]);

    while let Some(s) = queue.pop_front() {
        let mut advanced: BTreeMap<SymId, Vec<Item>> = BTreeMap::new();
        for &item in &states[s].items {
            if let Some(sym) = item.next_symbol(b) {
                advanced
                    .entry(sym)
                    .or_default()
                    .push(Item::new(item.rule(), item.dot() + 1));
            }
        }
        for (sym, mut kernel) in advanced {
            kernel.sort();
            kernel.dedup();
            let target = match by_kernel.get(&kernel) {
                Some(&t) => t,
                None => {
                    let t = states.len();
                    states.push(State {
                        items: closure(&kernel, b, filter),
                        kernel: kernel.clone(),
                    });
                    transitions.push(BTreeMap::new());
                    by_kernel.insert(kernel, t);
                    queue.push_back(t);
                    t
                }
            };
            transitions[s].insert(sym, target);
        }
    }
    Automaton { states, transitions }
}
