//! Unification grammars: category declarations, rules, lexicon, and the
//! mapping from phrases to context-free symbols.

mod backbone;
mod syntax;

pub use backbone::{
    Backbone, CfRule, GeneralizedLexeme, GeneralizedRule, SymId, SymbolTable, AUGMENTED_RULE,
    END_MARKER, START_SYMBOL,
};

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexer::{Location, SyntaxError};
use crate::term::{write_atom, Term, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{location}: undeclared category `{name}`")]
    UndeclaredCategory { name: String, location: Location },
    #[error("{location}: category `{category}` has no feature `{feature}`")]
    UnknownFeature {
        category: String,
        feature: String,
        location: Location,
    },
    #[error("{location}: {message}")]
    Malformed { message: String, location: Location },
    #[error("{location}: distinguishing feature `{feature}` not ground in {owner}")]
    NonGroundDistinguishing {
        feature: String,
        owner: String,
        location: Location,
    },
    #[error("{location}: empty production without consumes tag in rule {rule}")]
    EmptyWithoutConsumes { rule: String, location: Location },
    #[error("{location}: rule {rule}: {message}")]
    GapRole {
        rule: String,
        message: String,
        location: Location,
    },
    #[error("{location}: duplicate {what} `{name}`")]
    Duplicate {
        what: &'static str,
        name: String,
        location: Location,
    },
    #[error("grammar has no `top` declaration")]
    MissingTop,
    #[error("top category `{0}`: {1}")]
    BadTop(String, String),
    #[error("category `{0}` is used both in the lexicon and as a rule left-hand side")]
    LexicalAndPhrasal(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryDecl {
    pub name: String,
    pub features: Vec<String>,
    /// Features whose ground values split the category into separate CF symbols.
    pub distinguishing: Vec<String>,
}

impl CategoryDecl {
    pub fn feature_index(&self, feature: &str) -> Option<usize> {
        self.features.iter().position(|f| f == feature)
    }

    pub fn distinguishing_positions(&self) -> Vec<usize> {
        self.features
            .iter()
            .enumerate()
            .filter(|(_, f)| self.distinguishing.contains(f))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Which gap list a moved phrase lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapTag {
    /// (Auxiliary) verbs.
    Verb,
    /// Maximal projections: NPs, PPs, AdjPs, AdvPs.
    MaxProj,
}

impl GapTag {
    pub const ALL: [GapTag; 2] = [GapTag::Verb, GapTag::MaxProj];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            GapTag::Verb => "verb",
            GapTag::MaxProj => "maxproj",
        }
    }

    pub fn from_name(s: &str) -> Option<GapTag> {
        match s {
            "verb" => Some(GapTag::Verb),
            "maxproj" => Some(GapTag::MaxProj),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapRole {
    None,
    /// The rule's last daughter contains a gap; `phrase` is the moved phrase
    /// put on the `tag` list when that daughter is predicted.
    Adds { tag: GapTag, phrase: Term },
    /// An empty production that fills a gap from the `tag` list.
    Consumes { tag: GapTag },
}

/// A unification-grammar rule. Phrases are compound terms whose arguments
/// follow the category's feature order. Variables are numbered from 0 and
/// shared across `lhs`, `rhs`, `sem` and the gap phrase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UgRule {
    pub id: String,
    pub lhs: Term,
    pub rhs: Vec<Term>,
    /// Semantic constraint `m(Mother, D1, ..., Dn)`: argument 0 is the
    /// mother's meaning, argument i the meaning of daughter i.
    pub sem: Option<Term>,
    pub gap: GapRole,
    pub var_count: u32,
}

impl UgRule {
    /// `rule(lhs, rhs...)`, used wherever a rule is handled as one term.
    pub fn wrapped(&self) -> Term {
        let mut args = vec![self.lhs.clone()];
        args.extend(self.rhs.iter().cloned());
        Term::app("rule", args)
    }

    pub fn is_empty_production(&self) -> bool {
        self.rhs.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LexEntry {
    pub word: String,
    pub phrase: Term,
    pub sem: Option<Term>,
    pub var_count: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grammar {
    pub categories: Vec<CategoryDecl>,
    pub top: String,
    pub rules: Vec<UgRule>,
    pub lexicon: Vec<LexEntry>,
}

impl Grammar {
    /// Reads and validates a grammar file.
    pub fn load(source: &str) -> Result<Grammar, GrammarError> {
        syntax::load(source)
    }

    pub fn category(&self, name: &str) -> Option<&CategoryDecl> {
        self.categories.iter().find(|c| c.name == name)
    }

    /// Context-free image of a phrase: the category applied to the values of
    /// its distinguishing features. Stable under further instantiation since
    /// those values are ground.
    pub fn map_to_cf(&self, phrase: &Term) -> Term {
        let name = phrase.functor().expect("phrase is a compound term");
        let decl = self.category(name).expect("phrase category is declared");
        let args = decl
            .distinguishing_positions()
            .into_iter()
            .map(|i| phrase.args()[i].clone())
            .collect();
        Term::app(name, args)
    }

    /// `top(_, ..., _)`: the most general phrase of the top category.
    pub fn top_phrase(&self) -> Term {
        let n = self.category(&self.top).map_or(0, |c| c.features.len());
        Term::app(&self.top, (0..n as u32).map(Term::var).collect())
    }

    pub fn has_semantics(&self) -> bool {
        self.rules.iter().any(|r| r.sem.is_some()) || self.lexicon.iter().any(|e| e.sem.is_some())
    }

    /// Lexicon indices grouped by word.
    pub fn entries_by_word(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, e) in self.lexicon.iter().enumerate() {
            out.entry(e.word.as_str()).or_default().push(i);
        }
        out
    }

    /// Renders a term with `cat:[f=V,...]` sugar for declared categories.
    pub fn show(&self, t: &Term) -> String {
        let mut names = VarNames::for_term(t);
        let mut s = String::new();
        self.write_sugared(&mut s, t, &mut names).unwrap();
        s
    }

    fn write_sugared(&self, out: &mut String, t: &Term, names: &mut VarNames) -> fmt::Result {
        match t {
            Term::Var(v) => out.write_str(&names.name(*v)),
            Term::App(f, args) => {
                if let Some(decl) = self.category(f).filter(|d| d.features.len() == args.len()) {
                    write_atom(out, f)?;
                    if args.is_empty() {
                        return Ok(());
                    }
                    out.write_str(":[")?;
                    for (i, (feat, val)) in decl.features.iter().zip(args).enumerate() {
                        if i > 0 {
                            out.write_char(',')?;
                        }
                        write!(out, "{feat}=")?;
                        self.write_sugared(out, val, names)?;
                    }
                    return out.write_char(']');
                }
                write_atom(out, f)?;
                if !args.is_empty() {
                    out.write_char('(')?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.write_char(',')?;
                        }
                        self.write_sugared(out, a, names)?;
                    }
                    out.write_char(')')?;
                }
                Ok(())
            }
        }
    }
}

/// Prolog-style names for printing: singletons print as `_`, others as
/// `A`, `B`, ... in first-occurrence order.
struct VarNames {
    counts: HashMap<Var, usize>,
    assigned: HashMap<Var, String>,
}

impl VarNames {
    fn for_term(t: &Term) -> Self {
        fn count(t: &Term, counts: &mut HashMap<Var, usize>) {
            match t {
                Term::Var(v) => *counts.entry(*v).or_default() += 1,
                Term::App(_, args) => args.iter().for_each(|a| count(a, counts)),
            }
        }
        let mut counts = HashMap::new();
        count(t, &mut counts);
        VarNames {
            counts,
            assigned: HashMap::new(),
        }
    }

    fn name(&mut self, v: Var) -> String {
        if self.counts.get(&v).copied().unwrap_or(0) <= 1 {
            return "_".into();
        }
        let n = self.assigned.len();
        self.assigned
            .entry(v)
            .or_insert_with(|| {
                let letter = (b'A' + (n % 26) as u8) as char;
                if n < 26 {
                    letter.to_string()
                } else {
                    format!("{letter}{}", n / 26)
                }
            })
            .clone()
    }
}
