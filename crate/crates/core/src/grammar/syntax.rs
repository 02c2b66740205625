//! Reader for the grammar file language.
//!
//! ```text
//! category v features [agr,sub] distinguish [sub].
//! top s.
//! rule r2: vp:[agr=Agr] => [v:[agr=Agr,sub=intran]].
//! rule gap_np: np:[agr=A] => [] consumes maxproj.
//! rule whq: s => [wh, s] adds maxproj np:[agr=_].
//! lex "walks": v:[agr=sg,sub=intran] sem walk.
//! ```
//!
//! Statements are read into raw terms first and desugared once all category
//! declarations are known, so declarations may appear anywhere.

use std::collections::HashSet;

use super::{CategoryDecl, GapRole, GapTag, Grammar, GrammarError, LexEntry, UgRule};
use crate::lexer::{Location, SyntaxError, Tok, Tokens};
use crate::term::{Term, VarScope};

#[derive(Clone, Debug)]
enum Raw {
    Var(String, Location),
    App(String, Vec<Raw>, Location),
    Sugar(String, Vec<(String, Raw)>, Location),
}

impl Raw {
    fn location(&self) -> Location {
        match self {
            Raw::Var(_, l) | Raw::App(_, _, l) | Raw::Sugar(_, _, l) => *l,
        }
    }
}

enum RawGap {
    Adds(GapTag, Raw),
    Consumes(GapTag),
}

enum Stmt {
    Category(CategoryDecl, Location),
    Top(String, Location),
    Rule {
        id: String,
        lhs: Raw,
        rhs: Vec<Raw>,
        gap: Option<RawGap>,
        sem: Option<Raw>,
        location: Location,
    },
    Lex {
        word: String,
        phrase: Raw,
        sem: Option<Raw>,
        location: Location,
    },
}

fn keyword(toks: &mut Tokens) -> Result<(String, Location), SyntaxError> {
    let at = toks.location();
    match toks.advance().tok {
        Tok::Atom(a) => Ok((a, at)),
        other => Err(SyntaxError::new(at, format!("expected a name, found {other}"))),
    }
}

fn name_list(toks: &mut Tokens) -> Result<Vec<String>, SyntaxError> {
    toks.expect(Tok::LBracket)?;
    let mut out = Vec::new();
    if toks.eat(&Tok::RBracket) {
        return Ok(out);
    }
    loop {
        out.push(keyword(toks)?.0);
        if toks.eat(&Tok::Comma) {
            continue;
        }
        toks.expect(Tok::RBracket)?;
        return Ok(out);
    }
}

fn raw_term(toks: &mut Tokens) -> Result<Raw, SyntaxError> {
    let at = toks.location();
    match toks.advance().tok {
        Tok::Var(v) => Ok(Raw::Var(v, at)),
        Tok::Atom(name) => {
            if toks.peek() == &Tok::Colon && toks.peek_at(1) == &Tok::LBracket {
                toks.advance();
                toks.advance();
                let mut feats = Vec::new();
                if !toks.eat(&Tok::RBracket) {
                    loop {
                        let (f, _) = keyword(toks)?;
                        toks.expect(Tok::Equals)?;
                        feats.push((f, raw_term(toks)?));
                        if toks.eat(&Tok::Comma) {
                            continue;
                        }
                        toks.expect(Tok::RBracket)?;
                        break;
                    }
                }
                return Ok(Raw::Sugar(name, feats, at));
            }
            let mut args = Vec::new();
            if toks.eat(&Tok::LParen) {
                loop {
                    args.push(raw_term(toks)?);
                    if toks.eat(&Tok::Comma) {
                        continue;
                    }
                    toks.expect(Tok::RParen)?;
                    break;
                }
            }
            Ok(Raw::App(name, args, at))
        }
        other => Err(SyntaxError::new(at, format!("expected a term, found {other}"))),
    }
}

fn gap_tag(toks: &mut Tokens) -> Result<GapTag, SyntaxError> {
    let (name, at) = keyword(toks)?;
    GapTag::from_name(&name)
        .ok_or_else(|| SyntaxError::new(at, format!("unknown gap list `{name}` (expected verb or maxproj)")))
}

fn statement(toks: &mut Tokens) -> Result<Stmt, SyntaxError> {
    let (kw, location) = keyword(toks)?;
    let stmt = match kw.as_str() {
        "category" => {
            let (name, _) = keyword(toks)?;
            let (f, at) = keyword(toks)?;
            if f != "features" {
                return Err(SyntaxError::new(at, "expected `features`"));
            }
            let features = name_list(toks)?;
            let mut distinguishing = Vec::new();
            if matches!(toks.peek(), Tok::Atom(a) if a == "distinguish") {
                toks.advance();
                distinguishing = name_list(toks)?;
            }
            Stmt::Category(
                CategoryDecl {
                    name,
                    features,
                    distinguishing,
                },
                location,
            )
        }
        "top" => Stmt::Top(keyword(toks)?.0, location),
        "rule" => {
            let (id, _) = keyword(toks)?;
            toks.expect(Tok::Colon)?;
            let lhs = raw_term(toks)?;
            toks.expect(Tok::Arrow)?;
            toks.expect(Tok::LBracket)?;
            let mut rhs = Vec::new();
            if !toks.eat(&Tok::RBracket) {
                loop {
                    rhs.push(raw_term(toks)?);
                    if toks.eat(&Tok::Comma) {
                        continue;
                    }
                    toks.expect(Tok::RBracket)?;
                    break;
                }
            }
            let mut gap = None;
            let mut sem = None;
            loop {
                let at = toks.location();
                match toks.peek().clone() {
                    Tok::Atom(a) if a == "adds" || a == "consumes" => {
                        toks.advance();
                        if gap.is_some() {
                            return Err(SyntaxError::new(at, "a rule has at most one gap role"));
                        }
                        let tag = gap_tag(toks)?;
                        gap = Some(if a == "adds" {
                            RawGap::Adds(tag, raw_term(toks)?)
                        } else {
                            RawGap::Consumes(tag)
                        });
                    }
                    Tok::Atom(a) if a == "sem" => {
                        toks.advance();
                        if sem.is_some() {
                            return Err(SyntaxError::new(at, "duplicate `sem`"));
                        }
                        sem = Some(raw_term(toks)?);
                    }
                    _ => break,
                }
            }
            Stmt::Rule {
                id,
                lhs,
                rhs,
                gap,
                sem,
                location,
            }
        }
        "lex" => {
            let at = toks.location();
            let word = match toks.advance().tok {
                Tok::Str(s) | Tok::Atom(s) => s,
                other => return Err(SyntaxError::new(at, format!("expected a word, found {other}"))),
            };
            toks.expect(Tok::Colon)?;
            let phrase = raw_term(toks)?;
            let mut sem = None;
            if matches!(toks.peek(), Tok::Atom(a) if a == "sem") {
                toks.advance();
                sem = Some(raw_term(toks)?);
            }
            Stmt::Lex {
                word,
                phrase,
                sem,
                location,
            }
        }
        other => {
            return Err(SyntaxError::new(
                location,
                format!("unknown statement `{other}` (expected category, top, rule or lex)"),
            ))
        }
    };
    toks.expect(Tok::Dot)?;
    Ok(stmt)
}

struct Desugar<'a> {
    categories: &'a [CategoryDecl],
}

impl Desugar<'_> {
    fn decl(&self, name: &str, at: Location) -> Result<&CategoryDecl, GrammarError> {
        self.categories
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| GrammarError::UndeclaredCategory {
                name: name.to_string(),
                location: at,
            })
    }

    /// A term in phrase position must denote a declared category.
    fn phrase(&self, raw: &Raw, scope: &mut VarScope) -> Result<Term, GrammarError> {
        match raw {
            Raw::Var(_, at) => Err(GrammarError::Malformed {
                message: "a phrase must name a category".into(),
                location: *at,
            }),
            Raw::App(name, args, at) => {
                let decl = self.decl(name, *at)?;
                if args.is_empty() {
                    let fresh = decl.features.iter().map(|_| scope.fresh()).collect();
                    return Ok(Term::app(name, fresh));
                }
                if args.len() != decl.features.len() {
                    return Err(GrammarError::Malformed {
                        message: format!(
                            "category `{name}` has {} features, found {} arguments",
                            decl.features.len(),
                            args.len()
                        ),
                        location: *at,
                    });
                }
                let args = args
                    .iter()
                    .map(|a| self.value(a, scope))
                    .collect::<Result<_, _>>()?;
                Ok(Term::app(name, args))
            }
            Raw::Sugar(name, feats, at) => {
                let decl = self.decl(name, *at)?;
                let mut slots: Vec<Option<Term>> = vec![None; decl.features.len()];
                for (f, v) in feats {
                    let i = decl.feature_index(f).ok_or_else(|| GrammarError::UnknownFeature {
                        category: name.clone(),
                        feature: f.clone(),
                        location: v.location(),
                    })?;
                    if slots[i].is_some() {
                        return Err(GrammarError::Duplicate {
                            what: "feature",
                            name: f.clone(),
                            location: v.location(),
                        });
                    }
                    slots[i] = Some(self.value(v, scope)?);
                }
                let args = slots
                    .into_iter()
                    .map(|s| s.unwrap_or_else(|| scope.fresh()))
                    .collect();
                Ok(Term::app(name, args))
            }
        }
    }

    /// Feature values and semantic terms: plain terms, sugar allowed inside.
    fn value(&self, raw: &Raw, scope: &mut VarScope) -> Result<Term, GrammarError> {
        match raw {
            Raw::Var(name, at) => Ok(scope.lookup(name, *at)?),
            Raw::App(name, args, _) => {
                let args = args
                    .iter()
                    .map(|a| self.value(a, scope))
                    .collect::<Result<_, _>>()?;
                Ok(Term::app(name, args))
            }
            Raw::Sugar(..) => self.phrase(raw, scope),
        }
    }
}

fn check_distinguishing(
    g_categories: &[CategoryDecl],
    phrase: &Term,
    owner: &str,
    location: Location,
) -> Result<(), GrammarError> {
    let decl = g_categories
        .iter()
        .find(|c| Some(c.name.as_str()) == phrase.functor())
        .expect("desugared phrases have declared categories");
    for i in decl.distinguishing_positions() {
        if !phrase.args()[i].is_ground() {
            return Err(GrammarError::NonGroundDistinguishing {
                feature: decl.features[i].clone(),
                owner: owner.to_string(),
                location,
            });
        }
    }
    Ok(())
}

pub(super) fn load(source: &str) -> Result<Grammar, GrammarError> {
    let mut toks = Tokens::new(source)?;
    let mut stmts = Vec::new();
    while !toks.is_eof() {
        stmts.push(statement(&mut toks)?);
    }

    let mut categories: Vec<CategoryDecl> = Vec::new();
    let mut top = None;
    for s in &stmts {
        match s {
            Stmt::Category(decl, at) => {
                if categories.iter().any(|c| c.name == decl.name) {
                    return Err(GrammarError::Duplicate {
                        what: "category",
                        name: decl.name.clone(),
                        location: *at,
                    });
                }
                let mut seen = HashSet::new();
                for f in &decl.features {
                    if !seen.insert(f) {
                        return Err(GrammarError::Duplicate {
                            what: "feature",
                            name: f.clone(),
                            location: *at,
                        });
                    }
                }
                if let Some(d) = decl.distinguishing.iter().find(|d| !decl.features.contains(d)) {
                    return Err(GrammarError::UnknownFeature {
                        category: decl.name.clone(),
                        feature: d.clone(),
                        location: *at,
                    });
                }
                categories.push(decl.clone());
            }
            Stmt::Top(name, at) => {
                if top.is_some() {
                    return Err(GrammarError::Duplicate {
                        what: "top declaration",
                        name: name.clone(),
                        location: *at,
                    });
                }
                top = Some(name.clone());
            }
            _ => {}
        }
    }

    let ds = Desugar {
        categories: &categories,
    };
    let mut rules: Vec<UgRule> = Vec::new();
    let mut lexicon = Vec::new();
    for s in &stmts {
        match s {
            Stmt::Rule {
                id,
                lhs,
                rhs,
                gap,
                sem,
                location,
            } => {
                if rules.iter().any(|r| &r.id == id) {
                    return Err(GrammarError::Duplicate {
                        what: "rule",
                        name: id.clone(),
                        location: *location,
                    });
                }
                let mut scope = VarScope::named();
                let lhs = ds.phrase(lhs, &mut scope)?;
                let rhs = rhs
                    .iter()
                    .map(|p| ds.phrase(p, &mut scope))
                    .collect::<Result<Vec<_>, _>>()?;
                let gap = match gap {
                    None => GapRole::None,
                    Some(RawGap::Consumes(tag)) => GapRole::Consumes { tag: *tag },
                    Some(RawGap::Adds(tag, p)) => GapRole::Adds {
                        tag: *tag,
                        phrase: ds.phrase(p, &mut scope)?,
                    },
                };
                let sem = sem.as_ref().map(|t| ds.value(t, &mut scope)).transpose()?;
                let owner = format!("rule {id}");
                check_distinguishing(&categories, &lhs, &owner, *location)?;
                for p in &rhs {
                    check_distinguishing(&categories, p, &owner, *location)?;
                }
                match &gap {
                    GapRole::None if rhs.is_empty() => {
                        return Err(GrammarError::EmptyWithoutConsumes {
                            rule: id.clone(),
                            location: *location,
                        })
                    }
                    GapRole::Consumes { .. } if !rhs.is_empty() => {
                        return Err(GrammarError::GapRole {
                            rule: id.clone(),
                            message: "only empty productions may consume a gap".into(),
                            location: *location,
                        })
                    }
                    GapRole::Adds { phrase, .. } => {
                        if rhs.is_empty() {
                            return Err(GrammarError::GapRole {
                                rule: id.clone(),
                                message: "an empty production cannot add a gap".into(),
                                location: *location,
                            });
                        }
                        check_distinguishing(&categories, phrase, &owner, *location)?;
                    }
                    _ => {}
                }
                if let Some(sem) = &sem {
                    if sem.is_var() || sem.arity() != rhs.len() + 1 {
                        return Err(GrammarError::Malformed {
                            message: format!(
                                "rule {id}: sem term must have {} arguments (mother, then each daughter)",
                                rhs.len() + 1
                            ),
                            location: *location,
                        });
                    }
                }
                rules.push(UgRule {
                    id: id.clone(),
                    lhs,
                    rhs,
                    sem,
                    gap,
                    var_count: scope.count(),
                });
            }
            Stmt::Lex {
                word,
                phrase,
                sem,
                location,
            } => {
                let mut scope = VarScope::named();
                let phrase = ds.phrase(phrase, &mut scope)?;
                let sem = sem.as_ref().map(|t| ds.value(t, &mut scope)).transpose()?;
                check_distinguishing(&categories, &phrase, &format!("lex \"{word}\""), *location)?;
                lexicon.push(LexEntry {
                    word: word.clone(),
                    phrase,
                    sem,
                    var_count: scope.count(),
                });
            }
            _ => {}
        }
    }

    let top = top.ok_or(GrammarError::MissingTop)?;
    let decl = categories
        .iter()
        .find(|c| c.name == top)
        .ok_or_else(|| GrammarError::BadTop(top.clone(), "not declared".into()))?;
    if !decl.distinguishing.is_empty() {
        return Err(GrammarError::BadTop(
            top.clone(),
            "the top category cannot have distinguishing features".into(),
        ));
    }
    if !rules.iter().any(|r| r.lhs.functor() == Some(top.as_str())) {
        return Err(GrammarError::BadTop(top.clone(), "no rule has it as left-hand side".into()));
    }
    for e in &lexicon {
        let cat = e.phrase.functor().unwrap_or_default();
        if rules.iter().any(|r| r.lhs.functor() == Some(cat)) {
            return Err(GrammarError::LexicalAndPhrasal(cat.to_string()));
        }
    }

    Ok(Grammar {
        categories,
        top,
        rules,
        lexicon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(src: &str) -> GrammarError {
        Grammar::load(src).unwrap_err()
    }

    const HEADER: &str = "category s features []. category vp features [agr]. \
        category v features [agr,sub] distinguish [sub]. top s. rule top: s => [vp].\n";

    #[test]
    fn desugars_features_in_declared_order() {
        let g = Grammar::load(&format!(
            "{HEADER} rule r2: vp:[agr=Agr] => [v:[sub=intran,agr=Agr]]."
        ))
        .unwrap();
        let r = &g.rules[1];
        assert_eq!(r.wrapped().to_string(), "rule(vp(_0),v(_0,intran))");
        assert_eq!(r.var_count, 1);
    }

    #[test]
    fn bare_category_gets_fresh_features() {
        let g = Grammar::load(&format!("{HEADER} lex \"x\": v:[sub=tran].")).unwrap();
        assert_eq!(g.lexicon[0].phrase.to_string(), "v(_0,tran)");
        let g = Grammar::load(&format!("{HEADER} rule r: vp => [v(a, tran)].")).unwrap();
        assert_eq!(g.rules[1].wrapped().to_string(), "rule(vp(_0),v(a,tran))");
    }

    #[test]
    fn rejects_non_ground_distinguishing_value() {
        match err(&format!("{HEADER}rule bad: vp:[agr=A] => [v:[agr=A,sub=S]].")) {
            GrammarError::NonGroundDistinguishing { feature, owner, location } => {
                assert_eq!(feature, "sub");
                assert_eq!(owner, "rule bad");
                assert_eq!(location.line, 2);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn rejects_undeclared_category_with_location() {
        match err("category s features []. top s.\nrule r: s => [np].") {
            GrammarError::UndeclaredCategory { name, location } => {
                assert_eq!(name, "np");
                assert_eq!(location, Location { line: 2, column: 15 });
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn empty_production_needs_consumes() {
        assert!(matches!(
            err(&format!("{HEADER}rule e: vp => [].")),
            GrammarError::EmptyWithoutConsumes { .. }
        ));
        let g = Grammar::load(&format!("{HEADER}rule e: vp => [] consumes maxproj.")).unwrap();
        assert_eq!(g.rules[1].gap, GapRole::Consumes { tag: GapTag::MaxProj });
        assert!(matches!(
            err(&format!("{HEADER}rule e: vp => [v:[sub=tran]] consumes verb.")),
            GrammarError::GapRole { .. }
        ));
    }

    #[test]
    fn adds_shares_variables_with_rule() {
        let g = Grammar::load(&format!(
            "{HEADER}rule w: s => [vp:[agr=A]] adds maxproj vp:[agr=A] sem m(X, X)."
        ))
        .unwrap();
        let r = &g.rules[1];
        match &r.gap {
            GapRole::Adds { tag, phrase } => {
                assert_eq!(*tag, GapTag::MaxProj);
                assert_eq!(phrase, &r.rhs[0]);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(r.sem.as_ref().unwrap().to_string(), "m(_1,_1)");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match err("category s features [].\ntop s\nrule") {
            GrammarError::Syntax(e) => assert_eq!(e.location.line, 3),
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(err("categry s features []."), GrammarError::Syntax(_)));
    }

    #[test]
    fn top_and_lexical_checks() {
        assert!(matches!(err("category s features []."), GrammarError::MissingTop));
        assert!(matches!(
            err(&format!("{HEADER}rule r: vp => [v:[sub=tran]]. lex \"x\": vp.")),
            GrammarError::LexicalAndPhrasal(_)
        ));
        assert!(matches!(
            err(&format!("{HEADER}rule q: vp => [v:[sub=tran]] sem m(A).")),
            GrammarError::Malformed { .. }
        ));
        assert!(matches!(
            err(&format!("{HEADER}rule q: vp:[agr=a, agr=b] => [v].")),
            GrammarError::Duplicate { .. }
        ));
    }
}
