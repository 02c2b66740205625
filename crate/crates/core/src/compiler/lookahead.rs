//! Reduce lookaheads. SLR uses FOLLOW sets of the backbone; LALR uses FOLLOW
//! sets of the grammar whose nonterminals are (state, nonterminal)
//! transitions of the automaton, which yields exactly the LALR(1) sets.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::automaton::Automaton;
use crate::grammar::{Backbone, SymId, AUGMENTED_RULE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GSym {
    T(SymId),
    N(usize),
}

struct Cfg {
    nonterminals: usize,
    prods: Vec<(usize, Vec<GSym>)>,
}

struct FirstSets {
    nullable: Vec<bool>,
    first: Vec<BTreeSet<SymId>>,
}

impl FirstSets {
    fn compute(cfg: &Cfg) -> Self {
        let mut fs = FirstSets {
            nullable: vec![false; cfg.nonterminals],
            first: vec![BTreeSet::new(); cfg.nonterminals],
        };
        let mut changed = true;
        while changed {
            changed = false;
            for (lhs, rhs) in &cfg.prods {
                let (first, nullable) = fs.of_sequence(rhs);
                if nullable && !fs.nullable[*lhs] {
                    fs.nullable[*lhs] = true;
                    changed = true;
                }
                let before = fs.first[*lhs].len();
                fs.first[*lhs].extend(first);
                changed |= fs.first[*lhs].len() != before;
            }
        }
        fs
    }

    /// FIRST of a symbol string and whether the whole string is nullable.
    fn of_sequence(&self, seq: &[GSym]) -> (BTreeSet<SymId>, bool) {
        let mut out = BTreeSet::new();
        for s in seq {
            match *s {
                GSym::T(t) => {
                    out.insert(t);
                    return (out, false);
                }
                GSym::N(n) => {
                    out.extend(self.first[n].iter().copied());
                    if !self.nullable[n] {
                        return (out, false);
                    }
                }
            }
        }
        (out, true)
    }
}

fn follow_sets(cfg: &Cfg, start: usize, end: SymId) -> Vec<BTreeSet<SymId>> {
    let fs = FirstSets::compute(cfg);
    let mut follow = vec![BTreeSet::new(); cfg.nonterminals];
    follow[start].insert(end);
    let mut changed = true;
    while changed {
        changed = false;
        for (lhs, rhs) in &cfg.prods {
            for (i, s) in rhs.iter().enumerate() {
                let GSym::N(n) = *s else { continue };
                let (first, nullable) = fs.of_sequence(&rhs[i + 1..]);
                let before = follow[n].len();
                follow[n].extend(first);
                if nullable && *lhs != n {
                    let lhs_follow: Vec<SymId> = follow[*lhs].iter().copied().collect();
                    follow[n].extend(lhs_follow);
                }
                changed |= follow[n].len() != before;
            }
        }
    }
    follow
}

fn backbone_cfg(b: &Backbone) -> Cfg {
    let to_g = |s: SymId| {
        if b.symbols.is_nonterminal(s) {
            GSym::N(s.index())
        } else {
            GSym::T(s)
        }
    };
    Cfg {
        nonterminals: b.symbols.len(),
        prods: b
            .rules
            .iter()
            .map(|r| (r.lhs.index(), r.rhs.iter().map(|s| to_g(*s)).collect()))
            .collect(),
    }
}

/// FOLLOW set of every backbone symbol (empty for terminals).
pub fn follow(b: &Backbone) -> Vec<BTreeSet<SymId>> {
    follow_sets(&backbone_cfg(b), b.symbols.start().index(), b.symbols.end())
}

/// SLR lookaheads: FOLLOW of each rule's left-hand side.
pub fn slr_lookaheads(b: &Backbone) -> Vec<BTreeSet<SymId>> {
    let follow = follow(b);
    b.rules.iter().map(|r| follow[r.lhs.index()].clone()).collect()
}

/// LALR lookaheads keyed by (state, rule), for every complete item.
pub fn lalr_lookaheads(a: &Automaton, b: &Backbone) -> BTreeMap<(usize, usize), BTreeSet<SymId>> {
    let mut ids: HashMap<(usize, SymId), usize> = HashMap::new();
    let mut intern = |state: usize, sym: SymId| {
        let n = ids.len();
        *ids.entry((state, sym)).or_insert(n)
    };
    let start = intern(0, b.symbols.start());
    let mut prods = Vec::new();
    // (final state, rule) ← transition nonterminal whose FOLLOW applies
    let mut reductions: Vec<((usize, usize), usize)> = Vec::new();
    for (p, state) in a.states.iter().enumerate() {
        for item in state.items.iter().filter(|i| i.dot == 0) {
            let rule = &b.rules[item.rule()];
            let lhs = intern(p, rule.lhs);
            let mut q = p;
            let mut rhs = Vec::with_capacity(rule.rhs.len());
            for &sym in &rule.rhs {
                rhs.push(if b.symbols.is_nonterminal(sym) {
                    GSym::N(intern(q, sym))
                } else {
                    GSym::T(sym)
                });
                q = a.transitions[q][&sym];
            }
            prods.push((lhs, rhs));
            if item.rule() != AUGMENTED_RULE {
                reductions.push(((q, item.rule()), lhs));
            }
        }
    }
    let cfg = Cfg {
        nonterminals: ids.len(),
        prods,
    };
    let follow = follow_sets(&cfg, start, b.symbols.end());
    let mut out: BTreeMap<(usize, usize), BTreeSet<SymId>> = BTreeMap::new();
    for (key, nt) in reductions {
        out.entry(key).or_default().extend(follow[nt].iter().copied());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::automaton::{build_automaton, UgFilter};
    use crate::grammar::Grammar;
    use crate::term::Term;

    fn names(b: &Backbone, set: &BTreeSet<SymId>) -> Vec<String> {
        set.iter().map(|s| b.symbols.name(*s)).collect()
    }

    /// Textbook FOLLOW computation straight from the definition, on named
    /// symbols, used as an independent check.
    fn follow_oracle(rules: &[(&str, Vec<&str>)], start: &str) -> BTreeMap<String, BTreeSet<String>> {
        let nts: BTreeSet<&str> = rules.iter().map(|r| r.0).collect();
        let mut first: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        let mut changed = true;
        while changed {
            changed = false;
            for (l, r) in rules {
                let f = r[0];
                let add: BTreeSet<&str> = if nts.contains(f) {
                    first.get(f).cloned().unwrap_or_default()
                } else {
                    [f].into()
                };
                let e = first.entry(l).or_default();
                let n = e.len();
                e.extend(add);
                changed |= e.len() != n;
            }
        }
        let mut follow: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        follow.entry(start.into()).or_default().insert("$end".into());
        let mut changed = true;
        while changed {
            changed = false;
            for (l, r) in rules {
                for i in 0..r.len() {
                    if !nts.contains(r[i]) {
                        continue;
                    }
                    let add: BTreeSet<String> = if i + 1 < r.len() {
                        if nts.contains(r[i + 1]) {
                            first[r[i + 1]].iter().map(|s| s.to_string()).collect()
                        } else {
                            [r[i + 1].to_string()].into()
                        }
                    } else {
                        follow.get(*l).cloned().unwrap_or_default()
                    };
                    let e = follow.entry(r[i].into()).or_default();
                    let n = e.len();
                    e.extend(add);
                    changed |= e.len() != n;
                }
            }
        }
        follow
    }

    #[test]
    fn toy_follow_sets_match_oracle() {
        let g = Grammar::load(include_str!("../../../../grammars/toy.ug")).unwrap();
        let b = Backbone::build(&g);
        let f = follow(&b);
        let sym = |s: &str| b.symbols.get(&Term::atom(s)).unwrap();
        assert_eq!(names(&b, &f[sym("vp").index()]), ["$end", "prep"]);
        assert_eq!(names(&b, &f[sym("np").index()]), ["$end", "det", "prep", "pron", "v"]);

        let rules = vec![
            ("s", vec!["np", "vp"]),
            ("vp", vec!["v"]),
            ("vp", vec!["v", "np"]),
            ("vp", vec!["v", "np", "np"]),
            ("vp", vec!["vp", "pp"]),
            ("np", vec!["det", "n"]),
            ("np", vec!["pron"]),
            ("np", vec!["np", "pp"]),
            ("pp", vec!["prep", "np"]),
        ];
        let oracle = follow_oracle(&rules, "s");
        for (nt, set) in oracle {
            let got: BTreeSet<String> = names(&b, &f[sym(&nt).index()]).into_iter().collect();
            assert_eq!(got, set, "FOLLOW({nt})");
        }
    }

    #[test]
    fn lalr_within_slr() {
        let g = Grammar::load(include_str!("../../../../grammars/toy.ug")).unwrap();
        let b = Backbone::build(&g);
        let a = build_automaton(&b, &UgFilter::new(&g, &b, true));
        let slr = slr_lookaheads(&b);
        for ((_, r), set) in &lalr_lookaheads(&a, &b) {
            assert!(set.is_subset(&slr[*r]));
        }
    }

    #[test]
    fn lalr_removes_the_classic_slr_conflict() {
        // S → L = R | R;  L → * R | id;  R → L
        let g = Grammar::load(
            r#"category s features []. category l features []. category r features [].
               category eq features []. category star features []. category id features [].
               top s.
               rule s1: s => [l, eq, r]. rule s2: s => [r].
               rule l1: l => [star, r]. rule l2: l => [id]. rule r1: r => [l].
               lex "=": eq. lex "*": star. lex "x": id."#,
        )
        .unwrap();
        let b = Backbone::build(&g);
        let a = build_automaton(&b, &UgFilter::new(&g, &b, true));
        let l = b.symbols.get(&Term::atom("l")).unwrap();
        let after_l = a.transitions[0][&l];
        let slr = slr_lookaheads(&b);
        let lalr = lalr_lookaheads(&a, &b);
        assert_eq!(names(&b, &slr[5]), ["$end", "eq"]);
        assert_eq!(names(&b, &lalr[&(after_l, 5)]), ["$end"]);
    }
}
