//! Naive bottom-up unification chart parser, kept small enough to audit by
//! eye. It applies every rule with full unification to every combination of
//! adjacent edges until nothing new appears, and serves as the reference the
//! LR pipeline is compared against.

use std::collections::HashSet;

use crate::grammar::Grammar;
use crate::term::{Substitution, Term};
use crate::tree::Derivation;

#[derive(Clone, Debug)]
struct Edge {
    start: usize,
    end: usize,
    /// Canonically numbered.
    phrase: Term,
    derivation: Derivation,
    /// Round in which the edge was added.
    round: usize,
}

#[derive(Clone, Debug, Default)]
pub struct OracleResult {
    /// Complete derivations of the top category, sorted.
    pub derivations: Vec<Derivation>,
    /// Some derivation with an empty production was cut off by the bound.
    pub possibly_incomplete: bool,
}

/// Default derivation-size bound for a sentence of `n` words.
pub fn default_bound(n: usize) -> usize {
    (4 * n).max(4)
}

/// All derivations of the top category over `words`. Derivations that use
/// empty productions are kept only while their size is within `bound`.
pub fn chart_parse(g: &Grammar, words: &[&str], bound: usize) -> OracleResult {
    let n = words.len();
    let mut edges: Vec<Edge> = Vec::new();
    let mut seen: HashSet<(usize, usize, Derivation)> = HashSet::new();
    let mut incomplete = false;

    let mut add = |edges: &mut Vec<Edge>, e: Edge| {
        if seen.insert((e.start, e.end, e.derivation.clone())) {
            edges.push(e);
        }
    };
    for (i, w) in words.iter().enumerate() {
        for (k, entry) in g.lexicon.iter().enumerate() {
            if entry.word == *w {
                let e = Edge {
                    start: i,
                    end: i + 1,
                    phrase: entry.phrase.canonical(),
                    derivation: Derivation::Lex { entry: k },
                    round: 0,
                };
                add(&mut edges, e);
            }
        }
    }
    for i in 0..=n {
        for (k, rule) in g.rules.iter().enumerate().filter(|(_, r)| r.rhs.is_empty()) {
            let e = Edge {
                start: i,
                end: i,
                phrase: rule.lhs.canonical(),
                derivation: Derivation::Rule { rule: k, children: vec![] },
                round: 0,
            };
            add(&mut edges, e);
        }
    }

    let mut round = 0;
    loop {
        let mut fresh = Vec::new();
        for (k, rule) in g.rules.iter().enumerate().filter(|(_, r)| !r.rhs.is_empty()) {
            for start in 0..=n {
                let mut found = Vec::new();
                extend(&edges, &rule.rhs, 0, start, rule.var_count, Substitution::new(), &mut Vec::new(), &mut found);
                for (end, s, used) in found {
                    // semi-naive: only combinations involving last round's edges
                    if !used.iter().any(|&u| edges[u].round == round) {
                        continue;
                    }
                    let derivation = Derivation::Rule {
                        rule: k,
                        children: used.iter().map(|&u| edges[u].derivation.clone()).collect(),
                    };
                    if derivation.size() > bound && derivation.has_empty_production() {
                        incomplete = true;
                        continue;
                    }
                    fresh.push(Edge {
                        start,
                        end,
                        phrase: s.apply(&rule.lhs).canonical(),
                        derivation,
                        round: round + 1,
                    });
                }
            }
        }
        let before = edges.len();
        for e in fresh {
            add(&mut edges, e);
        }
        if edges.len() == before {
            break;
        }
        round += 1;
    }

    let mut derivations: Vec<Derivation> = edges
        .into_iter()
        .filter(|e| e.start == 0 && e.end == n && e.phrase.functor() == Some(g.top.as_str()))
        .map(|e| e.derivation)
        .collect();
    derivations.sort();
    OracleResult {
        derivations,
        possibly_incomplete: incomplete,
    }
}

/// Matches `rhs[j..]` against adjacent edges from `pos`, collecting the end
/// position, bindings and edges used for every full match.
#[allow(clippy::too_many_arguments)]
fn extend(
    edges: &[Edge],
    rhs: &[Term],
    j: usize,
    pos: usize,
    next_var: u32,
    s: Substitution,
    used: &mut Vec<usize>,
    out: &mut Vec<(usize, Substitution, Vec<usize>)>,
) {
    if j == rhs.len() {
        out.push((pos, s, used.clone()));
        return;
    }
    for (idx, e) in edges.iter().enumerate().filter(|(_, e)| e.start == pos) {
        let mut s2 = s.clone();
        if s2.unify(&rhs[j], &e.phrase.rename(next_var)) {
            used.push(idx);
            extend(edges, rhs, j + 1, e.end, next_var + e.phrase.var_bound(), s2, used, out);
            used.pop();
        }
    }
}
