//! Context-free backbone and the generalized grammar built over it.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::Grammar;
use crate::term::{anti_unify_all, canonical_order, Term};

/// Index into a [`SymbolTable`]. Ids follow the canonical term order, so
/// ordered sets of ids are ordered sets of ground terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymId(pub u32);

impl SymId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub const END_MARKER: &str = "$end";
pub const START_SYMBOL: &str = "$start";
/// `$start → top`, always CF rule 0.
pub const AUGMENTED_RULE: usize = 0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolTable {
    terms: Vec<Term>,
    nonterminal: Vec<bool>,
    #[serde(skip)]
    index: HashMap<Term, SymId>,
}

impl SymbolTable {
    fn new(mut terms: Vec<Term>) -> Self {
        terms.sort_by(canonical_order);
        terms.dedup();
        let mut t = SymbolTable {
            nonterminal: vec![false; terms.len()],
            terms,
            index: HashMap::new(),
        };
        t.reindex();
        t
    }

    pub(crate) fn reindex(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), SymId(i as u32)))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = SymId> {
        (0..self.terms.len() as u32).map(SymId)
    }

    pub fn term(&self, id: SymId) -> &Term {
        &self.terms[id.index()]
    }

    pub fn get(&self, t: &Term) -> Option<SymId> {
        self.index.get(t).copied()
    }

    pub fn is_nonterminal(&self, id: SymId) -> bool {
        self.nonterminal[id.index()]
    }

    pub fn is_terminal(&self, id: SymId) -> bool {
        !self.is_nonterminal(id)
    }

    pub fn end(&self) -> SymId {
        self.get(&Term::atom(END_MARKER)).expect("end marker is interned")
    }

    pub fn start(&self) -> SymId {
        self.get(&Term::atom(START_SYMBOL)).expect("start symbol is interned")
    }

    pub fn name(&self, id: SymId) -> String {
        self.term(id).to_string()
    }
}

/// One rule of the context-free backbone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfRule {
    pub lhs: SymId,
    pub rhs: Vec<SymId>,
    /// Indices of the UG rules mapping onto this rule; empty only for the
    /// augmented rule.
    pub sources: Vec<usize>,
}

/// Anti-unification of all UG rules sharing a CF rule, taken over the whole
/// `rule(lhs, rhs...)` term so variables shared between positions survive
/// when every source shares them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedRule {
    pub lhs: Term,
    pub rhs: Vec<Term>,
    pub exact: bool,
    pub var_count: u32,
}

impl GeneralizedRule {
    fn from_wrapped(t: Term, exact: bool) -> Self {
        let var_count = t.var_bound();
        let mut args = t.args().to_vec();
        let lhs = args.remove(0);
        GeneralizedRule {
            lhs,
            rhs: args,
            exact,
            var_count,
        }
    }
}

/// All analyses of one word that share a CF symbol, folded into one phrase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedLexeme {
    pub word: String,
    pub cf: SymId,
    pub phrase: Term,
    /// Lexicon indices.
    pub sources: Vec<usize>,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Backbone {
    pub symbols: SymbolTable,
    pub rules: Vec<CfRule>,
    pub generalized: Vec<GeneralizedRule>,
    /// Sorted by word, then CF symbol.
    pub lexemes: Vec<GeneralizedLexeme>,
    /// CF rule of every UG rule.
    pub rule_of_ug: Vec<usize>,
    #[serde(skip)]
    by_word: BTreeMap<String, (usize, usize)>,
}

impl Backbone {
    pub fn build(g: &Grammar) -> Backbone {
        let (symbols, rules, rule_of_ug) = build_backbone(g);
        let (generalized, lexemes) = generalize(g, &symbols, &rules);
        let mut b = Backbone {
            symbols,
            rules,
            generalized,
            lexemes,
            rule_of_ug,
            by_word: BTreeMap::new(),
        };
        b.reindex();
        b
    }

    pub(crate) fn reindex(&mut self) {
        self.symbols.reindex();
        self.by_word.clear();
        for (i, lx) in self.lexemes.iter().enumerate() {
            let e = self.by_word.entry(lx.word.clone()).or_insert((i, i));
            e.1 = i + 1;
        }
    }

    /// One generalized lexeme per CF symbol the word maps to.
    pub fn lex_all(&self, word: &str) -> &[GeneralizedLexeme] {
        match self.by_word.get(word) {
            Some(&(a, b)) => &self.lexemes[a..b],
            None => &[],
        }
    }

    /// Index of a lexeme within [`Backbone::lexemes`].
    pub fn lexeme_index(&self, lx: &GeneralizedLexeme) -> usize {
        let (a, b) = self.by_word[&lx.word];
        a + self.lexemes[a..b].iter().position(|l| l.cf == lx.cf).expect("lexeme belongs to table")
    }

    pub fn terminals(&self) -> impl Iterator<Item = SymId> + '_ {
        self.symbols.ids().filter(|s| self.symbols.is_terminal(*s))
    }

    /// Renders a CF rule the way `dump-states` does, with a dot at `dot`.
    pub fn show_item(&self, rule: usize, dot: Option<usize>) -> String {
        let r = &self.rules[rule];
        let mut s = format!("{} →", self.display_symbol(r.lhs));
        for (i, sym) in r.rhs.iter().enumerate() {
            if dot == Some(i) {
                s.push_str(" ·");
            }
            s.push(' ');
            s.push_str(&self.display_symbol(*sym));
        }
        if dot == Some(r.rhs.len()) {
            s.push_str(" ·");
        }
        s
    }

    /// Category names upper-cased (`NP`, `V(tran)`), start symbol as `S'`.
    pub fn display_symbol(&self, id: SymId) -> String {
        let t = self.symbols.term(id);
        if id == self.symbols.start() {
            let top = self.rules[AUGMENTED_RULE].rhs[0];
            return format!("{}'", self.display_symbol(top));
        }
        let f = t.functor().unwrap_or_default().to_uppercase();
        if t.args().is_empty() {
            f
        } else {
            let args: Vec<String> = t.args().iter().map(|a| a.to_string()).collect();
            format!("{f}({})", args.join(","))
        }
    }
}

/// Maps every UG rule to its CF image. CF rules are numbered by the first
/// UG rule producing them, after the augmented rule 0.
fn build_backbone(g: &Grammar) -> (SymbolTable, Vec<CfRule>, Vec<usize>) {
    let images: Vec<(Term, Vec<Term>)> = g
        .rules
        .iter()
        .map(|r| (g.map_to_cf(&r.lhs), r.rhs.iter().map(|p| g.map_to_cf(p)).collect()))
        .collect();
    let top = Term::atom(&g.top);
    let mut terms = vec![Term::atom(END_MARKER), Term::atom(START_SYMBOL), top.clone()];
    for (l, r) in &images {
        terms.push(l.clone());
        terms.extend(r.iter().cloned());
    }
    terms.extend(g.lexicon.iter().map(|e| g.map_to_cf(&e.phrase)));
    let mut symbols = SymbolTable::new(terms);

    let start = symbols.start();
    let mut rules = vec![CfRule {
        lhs: start,
        rhs: vec![symbols.get(&top).unwrap()],
        sources: vec![],
    }];
    let mut seen: HashMap<(SymId, Vec<SymId>), usize> = HashMap::new();
    let mut rule_of_ug = Vec::with_capacity(images.len());
    for (i, (l, r)) in images.iter().enumerate() {
        let key = (
            symbols.get(l).unwrap(),
            r.iter().map(|t| symbols.get(t).unwrap()).collect::<Vec<_>>(),
        );
        let idx = *seen.entry(key.clone()).or_insert_with(|| {
            rules.push(CfRule {
                lhs: key.0,
                rhs: key.1.clone(),
                sources: vec![],
            });
            rules.len() - 1
        });
        rules[idx].sources.push(i);
        rule_of_ug.push(idx);
    }
    for r in &rules {
        symbols.nonterminal[r.lhs.index()] = true;
    }
    (symbols, rules, rule_of_ug)
}

fn generalize(
    g: &Grammar,
    symbols: &SymbolTable,
    rules: &[CfRule],
) -> (Vec<GeneralizedRule>, Vec<GeneralizedLexeme>) {
    let generalized = rules
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if i == AUGMENTED_RULE {
                let t = Term::app("rule", vec![Term::atom(START_SYMBOL), g.top_phrase()]);
                return GeneralizedRule::from_wrapped(t, true);
            }
            let wrapped: Vec<Term> = r.sources.iter().map(|&u| g.rules[u].wrapped()).collect();
            let t = anti_unify_all(&wrapped).expect("CF rules have sources");
            GeneralizedRule::from_wrapped(t, r.sources.len() == 1)
        })
        .collect();

    let mut groups: BTreeMap<(String, SymId), Vec<usize>> = BTreeMap::new();
    for (i, e) in g.lexicon.iter().enumerate() {
        let cf = symbols.get(&g.map_to_cf(&e.phrase)).unwrap();
        groups.entry((e.word.clone(), cf)).or_default().push(i);
    }
    let lexemes = groups
        .into_iter()
        .map(|((word, cf), sources)| {
            let phrase = anti_unify_all(sources.iter().map(|&i| &g.lexicon[i].phrase)).unwrap();
            GeneralizedLexeme {
                word,
                cf,
                phrase,
                exact: sources.len() == 1,
                sources,
            }
        })
        .collect();
    (generalized, lexemes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::subsumes;

    const TOY: &str = include_str!("../../../../grammars/toy.ug");

    #[test]
    fn toy_backbone_follows_source_order() {
        let g = Grammar::load(TOY).unwrap();
        let b = Backbone::build(&g);
        assert_eq!(b.rules.len(), 10);
        let shown: Vec<String> = (1..10).map(|r| b.show_item(r, None)).collect();
        assert_eq!(
            shown,
            [
                "S → NP VP",
                "VP → V",
                "VP → V NP",
                "VP → V NP NP",
                "VP → VP PP",
                "NP → DET N",
                "NP → PRON",
                "NP → NP PP",
                "PP → PREP NP",
            ]
        );
        assert!(b.rules[1..].iter().all(|r| r.sources.len() == 1));
        let terms: Vec<String> = b.terminals().map(|s| b.symbols.name(s)).collect();
        assert_eq!(terms, ["$end", "det", "n", "prep", "pron", "v"]);
    }

    #[test]
    fn same_image_rules_share_a_cf_rule() {
        let g = Grammar::load(
            r#"category s features []. category np features [agr].
               category det features [agr]. category n features [agr].
               top s.
               rule s1: s => [np].
               rule np_sg: np:[agr=sg] => [det:[agr=sg], n:[agr=sg]].
               rule np_pl: np:[agr=pl] => [det:[agr=pl], n:[agr=pl]].
               lex "the": det. lex "dog": n:[agr=sg]. lex "dogs": n:[agr=pl]."#,
        )
        .unwrap();
        let b = Backbone::build(&g);
        assert_eq!(b.rules.len(), 3);
        assert_eq!(b.rules[2].sources, vec![1, 2]);
        let gen = &b.generalized[2];
        assert!(!gen.exact);
        // lgg over the whole rule keeps the three agr positions tied
        assert!(gen.lhs.is_variant(&Term::parse("np(A)").unwrap()));
        let whole = Term::app("rule", [vec![gen.lhs.clone()], gen.rhs.clone()].concat());
        assert!(whole.is_variant(&Term::parse("rule(np(A),det(A),n(A))").unwrap()));
        for &u in &b.rules[2].sources {
            assert!(subsumes(&whole, &g.rules[u].wrapped()));
        }
        assert!(b.generalized[1].exact);
        assert_eq!(b.rule_of_ug, vec![1, 2, 2]);
    }

    #[test]
    fn lexemes_split_by_cf_symbol() {
        let g = Grammar::load(
            r#"category s features []. category v features [agr,sub] distinguish [sub].
               top s. rule s1: s => [v:[sub=intran]]. rule s2: s => [v:[sub=tran]].
               lex "walks": v:[agr=sg,sub=intran]. lex "walks": v:[agr=sg,sub=tran].
               lex "runs": v:[agr=sg,sub=intran]. lex "runs": v:[agr=pl,sub=intran]."#,
        )
        .unwrap();
        let b = Backbone::build(&g);
        let walks = b.lex_all("walks");
        assert_eq!(walks.len(), 2);
        assert!(walks.iter().all(|l| l.exact));
        let names: Vec<String> = walks.iter().map(|l| b.symbols.name(l.cf)).collect();
        assert_eq!(names, ["v(intran)", "v(tran)"]);
        let runs = b.lex_all("runs");
        assert_eq!(runs.len(), 1);
        assert!(!runs[0].exact);
        assert!(runs[0].phrase.is_variant(&Term::parse("v(_, intran)").unwrap()));
        assert!(b.lex_all("flies").is_empty());
        assert_eq!(b.lexeme_index(&runs[0]), 0);
    }
}
