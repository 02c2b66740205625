//! Parse trees: unlabeled phase-one trees over CF rules, and derivations
//! labeled with the UG rules and lexical entries actually used.

use std::rc::Rc;

use crate::grammar::{Backbone, Grammar};

/// Output of the LR phase: which CF rules were applied and which
/// generalized lexeme each word was read as. Subtrees are shared between
/// the alternative parses that contain them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseOneTree {
    Leaf {
        word: String,
        position: usize,
        /// Index into [`Backbone::lexemes`].
        lexeme: usize,
    },
    Apply {
        rule: usize,
        children: Vec<Rc<PhaseOneTree>>,
    },
    /// An empty production that filled a gap.
    Gap { rule: usize },
}

// Repeated empty productions make very deep trees; drop them iteratively.
impl Drop for PhaseOneTree {
    fn drop(&mut self) {
        let PhaseOneTree::Apply { children, .. } = self else { return };
        let mut pending = std::mem::take(children);
        while let Some(child) = pending.pop() {
            if let Ok(PhaseOneTree::Apply { children, .. }) = Rc::try_unwrap(child).as_mut() {
                pending.append(children);
            }
        }
    }
}

impl PhaseOneTree {
    pub fn words(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_words(&mut out);
        out
    }

    fn collect_words<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            PhaseOneTree::Leaf { word, .. } => out.push(word),
            PhaseOneTree::Apply { children, .. } => children.iter().for_each(|c| c.collect_words(out)),
            PhaseOneTree::Gap { .. } => {}
        }
    }

    /// Number of gap nodes in the tree.
    pub fn gap_count(&self) -> usize {
        match self {
            PhaseOneTree::Leaf { .. } => 0,
            PhaseOneTree::Gap { .. } => 1,
            PhaseOneTree::Apply { children, .. } => children.iter().map(|c| c.gap_count()).sum(),
        }
    }

    /// `(label child ...)` with leaves `word/cf_symbol`. A CF rule is labeled
    /// by its source rule ids joined with `|`.
    pub fn render(&self, backbone: &Backbone, grammar: &Grammar) -> String {
        let mut s = String::new();
        self.render_into(&mut s, backbone, grammar);
        s
    }

    fn render_into(&self, s: &mut String, b: &Backbone, g: &Grammar) {
        match self {
            PhaseOneTree::Leaf { word, lexeme, .. } => {
                s.push_str(word);
                s.push('/');
                s.push_str(&b.symbols.name(b.lexemes[*lexeme].cf));
            }
            PhaseOneTree::Apply { rule, children } => {
                s.push('(');
                s.push_str(&rule_label(b, g, *rule));
                for c in children {
                    s.push(' ');
                    c.render_into(s, b, g);
                }
                s.push(')');
            }
            PhaseOneTree::Gap { rule } => {
                s.push('(');
                s.push_str(&rule_label(b, g, *rule));
                s.push(')');
            }
        }
    }
}

pub fn rule_label(b: &Backbone, g: &Grammar, rule: usize) -> String {
    let ids: Vec<&str> = b.rules[rule].sources.iter().map(|&u| g.rules[u].id.as_str()).collect();
    ids.join("|")
}

/// A derivation in the original grammar. Empty productions are `Rule`
/// nodes without children.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Derivation {
    /// Index into [`Grammar::lexicon`].
    Lex { entry: usize },
    /// Index into [`Grammar::rules`].
    Rule { rule: usize, children: Vec<Derivation> },
}

impl Derivation {
    pub fn size(&self) -> usize {
        match self {
            Derivation::Lex { .. } => 1,
            Derivation::Rule { children, .. } => 1 + children.iter().map(Derivation::size).sum::<usize>(),
        }
    }

    pub fn has_empty_production(&self) -> bool {
        match self {
            Derivation::Lex { .. } => false,
            Derivation::Rule { children, .. } => {
                children.is_empty() || children.iter().any(Derivation::has_empty_production)
            }
        }
    }

    /// `(rule_id child ...)` with leaves `word/cf_symbol@entry`.
    pub fn render(&self, g: &Grammar) -> String {
        match self {
            Derivation::Lex { entry } => {
                let e = &g.lexicon[*entry];
                format!("{}/{}@{}", e.word, g.map_to_cf(&e.phrase), entry)
            }
            Derivation::Rule { rule, children } => {
                let mut s = format!("({}", g.rules[*rule].id);
                for c in children {
                    s.push(' ');
                    s.push_str(&c.render(g));
                }
                s.push(')');
                s
            }
        }
    }
}
