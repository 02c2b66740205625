//! Shared helpers for the integration and acceptance tests.

#![allow(dead_code)]

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use uglr::compiler::ParseTables;
use uglr::constraints::phase_two;
use uglr::grammar::Grammar;
use uglr::oracle::{chart_parse, default_bound};
use uglr::runtime::{ParseOptions, Parser};
use uglr::tree::Derivation;

pub const FIXTURES: [(&str, &str); 6] = [
    ("toy", include_str!("../../../../grammars/toy.ug")),
    ("agreement", include_str!("../../../../grammars/agreement.ug")),
    ("movement", include_str!("../../../../grammars/movement.ug")),
    ("two_filler", include_str!("../../../../grammars/two_filler.ug")),
    ("backcheck", include_str!("../../../../grammars/backcheck.ug")),
    ("semantics", include_str!("../../../../grammars/semantics.ug")),
];

pub fn fixture(name: &str) -> Grammar {
    let src = FIXTURES.iter().find(|f| f.0 == name).expect("known fixture").1;
    Grammar::load(src).unwrap()
}

/// Sentences exercised per fixture, grammatical and not.
pub fn fixture_sentences(name: &str) -> Vec<&'static str> {
    match name {
        "toy" => vec![
            "pron v",
            "pron v det n",
            "pron v det n prep det n",
            "pron v pron det n",
            "det n v det n prep pron prep det n",
            "she saw the man with a telescope",
            "he gave she the park",
            "det det",
            "v pron",
        ],
        "agreement" => vec![
            "the dog walks",
            "the dogs walk",
            "the dogs walks",
            "some water walks",
            "some dogs walk",
            "a dog sees the dogs",
            "some water sees a dog",
            "a dogs walk",
        ],
        "movement" => vec![
            "what does john seek",
            "does john seek",
            "does john seek mary",
            "where does john sleep",
            "where does john sleep in paris",
            "what does john sleep",
            "where does john seek",
            "does john sleep in paris",
            "what does john seek in paris",
        ],
        "two_filler" => vec![
            "what will john buy",
            "will john buy mary",
            "will john sleep",
            "what will john sleep",
            "will john buy",
        ],
        "backcheck" => vec!["runs", "runs fast", "runs fast fast"],
        "semantics" => vec!["john sees mary", "john sleeps", "john sees it", "mary sees"],
        _ => vec![],
    }
}

/// Sorted phase-two derivations of the LR pipeline.
pub fn pipeline(t: &ParseTables, words: &[&str], opts: &ParseOptions) -> Vec<Derivation> {
    let r = Parser::new(t, opts.clone()).parse_words(words).unwrap();
    let mut out: Vec<Derivation> = r.trees.iter().flat_map(|tree| phase_two(tree, t)).map(|a| a.derivation).collect();
    out.sort();
    out
}

pub fn oracle(g: &Grammar, words: &[&str]) -> Vec<Derivation> {
    chart_parse(g, words, default_bound(words.len())).derivations
}

/// A random gap-free unification grammar in surface syntax: at most 15
/// rules, at most 4 features per category, unit rules only towards higher
/// numbered nonterminals (no unit cycles), no empty productions.
pub fn random_grammar(rng: &mut impl Rng) -> String {
    let n_nt = rng.gen_range(2..=4);
    let n_pt = rng.gen_range(2..=4);
    let values = ["a", "b", "c"];
    let mut src = String::new();
    // (name, features, distinguishing first feature)
    let mut cats: Vec<(String, usize, bool)> = Vec::new();
    for i in 0..n_nt {
        let feats = if i == 0 { 0 } else { rng.gen_range(0..=4) };
        cats.push((format!("n{i}"), feats, feats > 0 && rng.gen_bool(0.25)));
    }
    for i in 0..n_pt {
        let feats = rng.gen_range(0..=4);
        cats.push((format!("t{i}"), feats, feats > 0 && rng.gen_bool(0.25)));
    }
    for (name, feats, dist) in &cats {
        let fs: Vec<String> = (0..*feats).map(|k| format!("f{k}")).collect();
        write!(src, "category {name} features [{}]", fs.join(", ")).unwrap();
        if *dist {
            src.push_str(" distinguish [f0]");
        }
        src.push_str(".\n");
    }
    src.push_str("top n0.\n");

    let phrase = |rng: &mut dyn rand::RngCore, cat: &(String, usize, bool), vars: &[&str]| -> String {
        let (name, feats, dist) = cat;
        if *feats == 0 {
            return name.clone();
        }
        let vals: Vec<String> = (0..*feats)
            .map(|k| {
                let v = if k == 0 && *dist {
                    values[rng.gen_range(0..2)].to_string()
                } else {
                    match rng.gen_range(0..4) {
                        0 => values[rng.gen_range(0..3)].to_string(),
                        1 => "_".to_string(),
                        _ => vars[rng.gen_range(0..vars.len())].to_string(),
                    }
                };
                format!("f{k}={v}")
            })
            .collect();
        format!("{name}:[{}]", vals.join(", "))
    };

    let n_rules = rng.gen_range(n_nt..=15);
    for r in 0..n_rules {
        // every nonterminal gets at least one rule
        let lhs = if r < n_nt { r } else { rng.gen_range(0..n_nt) };
        let len = rng.gen_range(1..=3);
        let mut rhs = Vec::new();
        for _ in 0..len {
            let pick = if len == 1 {
                // unit rules only go to higher nonterminals or preterminals
                let higher: Vec<usize> = (lhs + 1..n_nt).chain(n_nt..n_nt + n_pt).collect();
                *higher.choose(rng).unwrap()
            } else if rng.gen_bool(0.5) {
                rng.gen_range(1..n_nt.max(2)).min(n_nt - 1)
            } else {
                rng.gen_range(n_nt..n_nt + n_pt)
            };
            rhs.push(pick);
        }
        let vars = ["X", "Y"];
        let l = phrase(rng, &cats[lhs], &vars);
        let rs: Vec<String> = rhs.iter().map(|&c| phrase(rng, &cats[c], &vars)).collect();
        writeln!(src, "rule r{r}: {l} => [{}].", rs.join(", ")).unwrap();
    }

    let n_words = rng.gen_range(3..=6);
    for w in 0..n_words {
        for _ in 0..rng.gen_range(1..=2) {
            let cat = &cats[rng.gen_range(n_nt..n_nt + n_pt)];
            let mut p = phrase(rng, cat, &["_"]);
            p = p.replace("=X", "=_").replace("=Y", "=_");
            writeln!(src, "lex \"w{w}\": {p}.").unwrap();
        }
    }
    src
}

/// Random sentences of at most `max_len` words: CF expansions of the top
/// category where possible, plus random word strings.
pub fn random_sentences(g: &Grammar, rng: &mut impl Rng, count: usize, max_len: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let words_of = |cat: &str| -> Vec<String> {
        g.lexicon
            .iter()
            .filter(|e| e.phrase.functor() == Some(cat))
            .map(|e| e.word.clone())
            .collect()
    };
    let all_words: Vec<String> = g.lexicon.iter().map(|e| e.word.clone()).collect();
    let mut attempts = 0;
    while out.len() < count && attempts < count * 20 {
        attempts += 1;
        if rng.gen_bool(0.25) {
            let len = rng.gen_range(1..=max_len);
            out.push((0..len).map(|_| all_words.choose(rng).unwrap().clone()).collect());
            continue;
        }
        let mut sentence = Vec::new();
        if expand(g, &g.top, rng, &words_of, &mut sentence, max_len, 0) && !sentence.is_empty() {
            out.push(sentence);
        }
    }
    out
}

fn expand(
    g: &Grammar,
    cat: &str,
    rng: &mut impl Rng,
    words_of: &dyn Fn(&str) -> Vec<String>,
    out: &mut Vec<String>,
    max_len: usize,
    depth: usize,
) -> bool {
    if out.len() > max_len || depth > 12 {
        return false;
    }
    let rules: Vec<_> = g.rules.iter().filter(|r| r.lhs.functor() == Some(cat)).collect();
    if rules.is_empty() {
        let ws = words_of(cat);
        return match ws.choose(rng) {
            Some(w) => {
                out.push(w.clone());
                out.len() <= max_len
            }
            None => false,
        };
    }
    let r = rules.choose(rng).unwrap();
    r.rhs
        .iter()
        .all(|p| expand(g, p.functor().unwrap(), rng, words_of, out, max_len, depth + 1))
}
