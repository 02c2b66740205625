//! Phases two and three: the full constraints of the source rules and
//! lexical entries, applied to a phase-one tree by trying every source of
//! every node.

use std::collections::HashSet;

use crate::compiler::ParseTables;
use crate::term::{Substitution, Term};
use crate::tree::{Derivation, PhaseOneTree};

/// One consistent way of applying the source rules to a phase-one tree.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub derivation: Derivation,
    pub binding: Substitution,
    /// Instantiated phrase of the root.
    pub root_phrase: Term,
    /// Root meaning, filled in by phase three when the grammar has semantics.
    pub sem: Option<Term>,
    nodes: Vec<NodeChoice>,
}

impl Analysis {
    /// `tree(p1, ..., pn)` over every node's instantiated phrase, post-order.
    pub fn instantiated(&self) -> Term {
        Term::app("tree", self.nodes.iter().map(|n| self.binding.apply(&n.phrase)).collect())
    }
}

#[derive(Clone, Debug)]
struct NodeChoice {
    /// Rule index for inner nodes, lexicon index for leaves.
    source: usize,
    offset: u32,
    vars: u32,
    phrase: Term,
}

/// Node of the post-order flattening.
struct Flat {
    leaf: bool,
    /// Candidate sources: lexical entries or UG rules.
    sources: Vec<usize>,
    children: Vec<usize>,
}

fn flatten(tree: &PhaseOneTree, t: &ParseTables, out: &mut Vec<Flat>) -> usize {
    let flat = match tree {
        PhaseOneTree::Leaf { lexeme, .. } => Flat {
            leaf: true,
            sources: t.backbone.lexemes[*lexeme].sources.clone(),
            children: vec![],
        },
        PhaseOneTree::Gap { rule } => Flat {
            leaf: false,
            sources: t.backbone.rules[*rule].sources.clone(),
            children: vec![],
        },
        PhaseOneTree::Apply { rule, children } => Flat {
            leaf: false,
            sources: t.backbone.rules[*rule].sources.clone(),
            children: children.iter().map(|c| flatten(c, t, out)).collect(),
        },
    };
    out.push(flat);
    out.len() - 1
}

struct Search<'a> {
    tables: &'a ParseTables,
    flat: Vec<Flat>,
    out: Vec<Analysis>,
}

impl Search<'_> {
    fn go(&mut self, i: usize, s: Substitution, next: u32, chosen: &mut Vec<NodeChoice>) {
        if i == self.flat.len() {
            let root = chosen.last().expect("tree has a root");
            self.out.push(Analysis {
                derivation: build(&self.flat, chosen, i - 1),
                root_phrase: s.apply(&root.phrase),
                binding: s,
                sem: None,
                nodes: chosen.clone(),
            });
            return;
        }
        let g = &self.tables.grammar;
        for k in 0..self.flat[i].sources.len() {
            let source = self.flat[i].sources[k];
            let mut s2 = s.clone();
            let (phrase, count) = if self.flat[i].leaf {
                let e = &g.lexicon[source];
                (e.phrase.rename(next), e.var_count)
            } else {
                let r = &g.rules[source];
                let ok = s2.unify_all(
                    r.rhs
                        .iter()
                        .map(|p| p.rename(next))
                        .collect::<Vec<_>>()
                        .iter()
                        .zip(self.flat[i].children.iter().map(|&c| &chosen[c].phrase)),
                );
                if !ok {
                    continue;
                }
                (r.lhs.rename(next), r.var_count)
            };
            chosen.push(NodeChoice {
                source,
                offset: next,
                vars: count,
                phrase,
            });
            self.go(i + 1, s2, next + count, chosen);
            chosen.pop();
        }
    }
}

fn build(flat: &[Flat], chosen: &[NodeChoice], i: usize) -> Derivation {
    if flat[i].leaf {
        Derivation::Lex {
            entry: chosen[i].source,
        }
    } else {
        Derivation::Rule {
            rule: chosen[i].source,
            children: flat[i].children.iter().map(|&c| build(flat, chosen, c)).collect(),
        }
    }
}

/// Every consistent choice of source rule and lexical entry per node,
/// unified bottom-up, left to right.
pub fn phase_two(tree: &PhaseOneTree, tables: &ParseTables) -> Vec<Analysis> {
    let mut flat = Vec::new();
    flatten(tree, tables, &mut flat);
    let mut search = Search {
        tables,
        flat,
        out: Vec::new(),
    };
    search.go(0, Substitution::new(), 0, &mut Vec::new());
    search.out
}

/// Applies the semantic terms of the chosen rules and entries. A rule's
/// term is `m(Mother, D1, ..., Dn)`; an entry's term is its meaning. Yields
/// the analysis with its root meaning, or nothing on a clash. Grammars
/// without semantics pass analyses through unchanged.
pub fn phase_three(a: &Analysis, tables: &ParseTables) -> Option<Analysis> {
    let g = &tables.grammar;
    if !g.has_semantics() {
        return Some(a.clone());
    }
    let mut flat = Vec::new();
    let tree_root = derivation_shape(&a.derivation, &mut flat);
    debug_assert_eq!(flat.len(), a.nodes.len());
    let base = a.nodes.iter().map(|n| n.offset + n.vars).max().unwrap_or(0);
    let meaning = |i: usize| Term::var(base + i as u32);
    let mut s = a.binding.clone();
    for (i, node) in a.nodes.iter().enumerate() {
        let ok = match &flat[i] {
            Shape::Leaf => match &g.lexicon[node.source].sem {
                Some(sem) => s.unify(&sem.rename(node.offset), &meaning(i)),
                None => true,
            },
            Shape::Rule(children) => match &g.rules[node.source].sem {
                Some(sem) => {
                    let sem = sem.rename(node.offset);
                    let targets: Vec<Term> = std::iter::once(meaning(i))
                        .chain(children.iter().map(|&c| meaning(c)))
                        .collect();
                    s.unify_all(sem.args().iter().zip(targets.iter()))
                }
                None => true,
            },
        };
        if !ok {
            return None;
        }
    }
    let mut out = a.clone();
    out.sem = Some(s.apply(&meaning(tree_root)).canonical());
    out.binding = s;
    Some(out)
}

enum Shape {
    Leaf,
    Rule(Vec<usize>),
}

fn derivation_shape(d: &Derivation, out: &mut Vec<Shape>) -> usize {
    let shape = match d {
        Derivation::Lex { .. } => Shape::Leaf,
        Derivation::Rule { children, .. } => Shape::Rule(children.iter().map(|c| derivation_shape(c, out)).collect()),
    };
    out.push(shape);
    out.len() - 1
}

/// Drops analyses whose instantiated trees are variants of an earlier one.
pub fn dedupe(analyses: Vec<Analysis>) -> Vec<Analysis> {
    let mut seen = HashSet::new();
    analyses
        .into_iter()
        .filter(|a| seen.insert((a.instantiated().canonical(), a.sem.clone())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{compile, LookaheadMode};
    use crate::grammar::Grammar;
    use crate::runtime::{ParseOptions, Parser};

    fn tables(src: &str) -> ParseTables {
        compile(&Grammar::load(src).unwrap(), LookaheadMode::Lalr)
    }

    fn analyses(t: &ParseTables, sentence: &str) -> (usize, Vec<Analysis>) {
        let r = Parser::new(t, ParseOptions::default()).parse(sentence).unwrap();
        let n = r.trees.len();
        (n, r.trees.iter().flat_map(|tree| phase_two(tree, t)).collect())
    }

    #[test]
    fn exact_toy_trees_map_one_to_one() {
        let t = tables(include_str!("../../../grammars/toy.ug"));
        let (n, a) = analyses(&t, "pron v det n prep det n");
        assert_eq!(n, 2);
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].root_phrase, Term::atom("s"));
    }

    #[test]
    fn agreement_clash_survives_phase_one_only() {
        let t = tables(include_str!("../../../grammars/agreement.ug"));
        let (n, a) = analyses(&t, "the dogs walks");
        assert_eq!(n, 1);
        assert!(a.is_empty());
        let (_, a) = analyses(&t, "the dogs walk");
        assert_eq!(a.len(), 1);
        assert_eq!(t.grammar.show(&a[0].root_phrase), "s");
    }

    #[test]
    fn one_consistent_entry_of_two() {
        let t = tables(include_str!("../../../grammars/agreement.ug"));
        // "some" is plural or mass; only the plural reading agrees with "dogs"
        let (_, a) = analyses(&t, "some dogs walk");
        assert_eq!(a.len(), 1);
        let (_, a) = analyses(&t, "some water walks");
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn semantics_compose_to_a_ground_term() {
        let t = tables(include_str!("../../../grammars/semantics.ug"));
        let (_, a) = analyses(&t, "john sees mary");
        assert_eq!(a.len(), 1);
        let out = phase_three(&a[0], &t).unwrap();
        assert_eq!(out.sem.unwrap().to_string(), "app(app(see,mary),ent(john))");
        let (_, a) = analyses(&t, "john sleeps");
        assert_eq!(phase_three(&a[0], &t).unwrap().sem.unwrap().to_string(), "app(sleep,ent(john))");
    }

    #[test]
    fn semantic_clash_yields_nothing() {
        let t = tables(include_str!("../../../grammars/semantics.ug"));
        let (_, a) = analyses(&t, "john sees it");
        assert_eq!(a.len(), 1);
        assert!(phase_three(&a[0], &t).is_none());
    }

    #[test]
    fn no_semantics_is_identity() {
        let t = tables(include_str!("../../../grammars/toy.ug"));
        let (_, a) = analyses(&t, "pron v");
        let out = phase_three(&a[0], &t).unwrap();
        assert!(out.sem.is_none());
        assert_eq!(out.derivation, a[0].derivation);
    }

    #[test]
    fn dedupe_collapses_identical_bindings() {
        let t = tables(
            r#"category s features []. category a features [f].
               top s. rule r1: s => [a:[f=x]]. rule r2: s => [a:[f=_]].
               lex "w": a:[f=x]."#,
        );
        let (n, a) = analyses(&t, "w");
        assert_eq!(n, 1);
        assert_eq!(a.len(), 2);
        assert_eq!(dedupe(a).len(), 1);
    }
}
