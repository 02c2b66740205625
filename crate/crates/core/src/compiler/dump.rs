use std::fmt::Write as _;

use super::ParseTables;

/// One block per state: a `State N` header, then its items, kernel first.
pub fn dump_states(t: &ParseTables) -> String {
    let mut out = String::new();
    for (n, state) in t.states.iter().enumerate() {
        writeln!(out, "State {n}").unwrap();
        let rest = state.items.iter().filter(|i| !state.kernel.contains(i));
        for item in state.kernel.iter().chain(rest) {
            writeln!(out, "  {}", t.backbone.show_item(item.rule(), Some(item.dot()))).unwrap();
        }
        for ob in &t.gap_add[n] {
            writeln!(
                out,
                "  gap {} {}",
                ob.tag.name(),
                t.backbone.display_symbol(ob.symbol)
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{compile, LookaheadMode};
    use crate::grammar::Grammar;

    #[test]
    fn toy_dump_has_one_ditransitive_item_after_verb() {
        let g = Grammar::load(include_str!("../../../../grammars/toy.ug")).unwrap();
        let text = dump_states(&compile(&g, LookaheadMode::Slr));
        assert_eq!(text.matches("State ").count(), 14);
        assert_eq!(text.lines().filter(|l| l.trim() == "VP → V · NP NP").count(), 1);
        assert!(text.starts_with("State 0\n  S' → · S\n"));
    }
}
