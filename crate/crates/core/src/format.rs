//! Versioned text format for rule sets.
//!
//! ```text
//! confrule-ruleset 1
//! mode text
//! schema 8c3b5e0f12a4d9e1
//! target "Type"
//! labels "Hate Speech" "NOT Hate Speech"
//! attribute 17 "dumb"
//! rules 1
//! rule "Hate Speech" voc=0.96 accepted=true iteration=1 dictionary=1000
//!   present 17
//! end
//! ```
//!
//! One directive per line; tokens are separated by spaces. Strings are double-quoted with
//! `\\`, `\"`, `\n` and `\t` escapes. Blank lines and lines starting with `#` are ignored.
//! Condition lines are `present <attr>`, `absent <attr>`, `equals <attr> <symbol-id>`,
//! `le <attr> <number>` and `ge <attr> <number>`. Tabular attributes may list their nominal
//! symbols after the name: `attribute 2 "color" symbols "red" "blue"`. Numbers use the
//! shortest representation that reads back to the same `f64`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::dataset::Mode;
use crate::error::{Error, Result};
use crate::rule::{AttributeInfo, AttributeTable, Condition, Rule, RuleSet, ScoredRule, Test};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "confrule-ruleset";

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn serialize(rs: &RuleSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {FORMAT_VERSION}");
    let _ = writeln!(out, "mode {}", rs.mode.as_str());
    let _ = writeln!(out, "schema {:016x}", rs.schema_fingerprint);
    let _ = writeln!(out, "target {}", quote(&rs.target_name));
    out.push_str("labels");
    for l in &rs.labels {
        out.push(' ');
        out.push_str(&quote(l));
    }
    out.push('\n');
    for (idx, info) in &rs.attributes.0 {
        let _ = write!(out, "attribute {idx} {}", quote(&info.name));
        if let Some(symbols) = &info.symbols {
            out.push_str(" symbols");
            for s in symbols {
                out.push(' ');
                out.push_str(&quote(s));
            }
        }
        out.push('\n');
    }
    let _ = writeln!(out, "rules {}", rs.rules.len());
    for sr in &rs.rules {
        let dict = sr.dictionary_size.map_or_else(|| "none".to_string(), |d| d.to_string());
        let _ = writeln!(
            out,
            "rule {} voc={} accepted={} iteration={} dictionary={}",
            quote(&sr.rule.label),
            sr.voc,
            sr.accepted,
            sr.iteration,
            dict
        );
        for c in &sr.rule.conditions {
            let _ = match c.test {
                Test::Present => writeln!(out, "  present {}", c.attribute),
                Test::Absent => writeln!(out, "  absent {}", c.attribute),
                Test::Equals(s) => writeln!(out, "  equals {} {}", c.attribute, s),
                Test::LessEqual(x) => writeln!(out, "  le {} {}", c.attribute, x),
                Test::GreaterEqual(x) => writeln!(out, "  ge {} {}", c.attribute, x),
            };
        }
        out.push_str("end\n");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Str(String),
}

/// Splits one line into tokens tagged with their 1-based column.
fn lex(line: &str, lineno: usize) -> Result<Vec<(usize, Tok)>> {
    let mut toks = Vec::new();
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (byte, c) = chars[i];
        let col = line[..byte].chars().count() + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                let Some(&(_, c)) = chars.get(i) else {
                    return Err(Error::parse(lineno, col, "unterminated string"));
                };
                i += 1;
                match c {
                    '"' => break,
                    '\\' => {
                        let Some(&(_, e)) = chars.get(i) else {
                            return Err(Error::parse(lineno, col, "unterminated escape"));
                        };
                        i += 1;
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            '"' => '"',
                            '\\' => '\\',
                            other => {
                                return Err(Error::parse(lineno, col, format!("unknown escape \\{other}")));
                            }
                        });
                    }
                    c => s.push(c),
                }
            }
            toks.push((col, Tok::Str(s)));
        } else {
            let start = i;
            while i < chars.len() && !chars[i].1.is_whitespace() && chars[i].1 != '"' {
                i += 1;
            }
            let end = chars.get(i).map_or(line.len(), |&(b, _)| b);
            toks.push((col, Tok::Word(line[byte..end].to_string())));
            let _ = start;
        }
    }
    Ok(toks)
}

struct Line {
    no: usize,
    len: usize,
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Line {
    fn err(&self, msg: impl Into<String>) -> Error {
        let col = self.toks.get(self.pos).map_or(self.len + 1, |t| t.0);
        Error::parse(self.no, col, msg)
    }

    fn word(&mut self, what: &str) -> Result<String> {
        match self.toks.get(self.pos) {
            Some((_, Tok::Word(w))) => {
                self.pos += 1;
                Ok(w.clone())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn string(&mut self, what: &str) -> Result<String> {
        match self.toks.get(self.pos) {
            Some((_, Tok::Str(s))) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => Err(self.err(format!("expected quoted {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let w = self.word(kw)?;
        if w == kw {
            Ok(())
        } else {
            self.pos -= 1;
            Err(self.err(format!("expected `{kw}`")))
        }
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let w = self.word(what)?;
        w.parse().map_err(|_| {
            self.pos -= 1;
            self.err(format!("invalid {what} `{w}`"))
        })
    }

    fn field(&mut self, key: &str) -> Result<String> {
        let w = self.word(key)?;
        match w.strip_prefix(key).and_then(|r| r.strip_prefix('=')) {
            Some(v) => Ok(v.to_string()),
            None => {
                self.pos -= 1;
                Err(self.err(format!("expected `{key}=`")))
            }
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn finish(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing token"))
        }
    }
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    last_line: usize,
}

impl Lines<'_> {
    fn next(&mut self) -> Result<Option<Line>> {
        for (i, raw) in self.iter.by_ref() {
            self.last_line = i + 1;
            let trimmed = raw.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Ok(Some(Line { no: i + 1, len: raw.chars().count(), toks: lex(raw, i + 1)?, pos: 0 }));
        }
        Ok(None)
    }

    fn expect(&mut self, what: &str) -> Result<Line> {
        self.next()?
            .ok_or_else(|| Error::parse(self.last_line + 1, 1, format!("unexpected end of document, expected {what}")))
    }
}

pub fn parse(text: &str) -> Result<RuleSet> {
    let mut lines = Lines { iter: text.lines().enumerate(), last_line: 0 };

    let mut l = lines.expect("header")?;
    l.keyword(MAGIC)?;
    let version: u32 = l.number("format version")?;
    if version != FORMAT_VERSION {
        l.pos -= 1;
        return Err(l.err(format!("unsupported format version {version}")));
    }
    l.finish()?;

    let mut l = lines.expect("mode")?;
    l.keyword("mode")?;
    let mode = match l.word("mode")?.as_str() {
        "text" => Mode::Text,
        "tabular" => Mode::Tabular,
        _ => {
            l.pos -= 1;
            return Err(l.err("mode must be `text` or `tabular`"));
        }
    };
    l.finish()?;

    let mut l = lines.expect("schema")?;
    l.keyword("schema")?;
    let hex = l.word("schema fingerprint")?;
    let fingerprint = u64::from_str_radix(&hex, 16).map_err(|_| {
        l.pos -= 1;
        l.err("schema fingerprint must be hexadecimal")
    })?;
    l.finish()?;

    let mut l = lines.expect("target")?;
    l.keyword("target")?;
    let target = l.string("target name")?;
    l.finish()?;

    let mut l = lines.expect("labels")?;
    l.keyword("labels")?;
    let mut labels = Vec::new();
    while !l.at_end() {
        labels.push(l.string("label")?);
    }

    let mut attributes = BTreeMap::new();
    let declared = loop {
        let mut l = lines.expect("`attribute` or `rules`")?;
        match l.word("directive")?.as_str() {
            "attribute" => {
                let idx: usize = l.number("attribute index")?;
                let name = l.string("attribute name")?;
                let symbols = if l.at_end() {
                    None
                } else {
                    l.keyword("symbols")?;
                    let mut s = Vec::new();
                    while !l.at_end() {
                        s.push(l.string("symbol")?);
                    }
                    Some(s)
                };
                attributes.insert(idx, AttributeInfo { name, symbols });
            }
            "rules" => {
                let n: usize = l.number("rule count")?;
                l.finish()?;
                break n;
            }
            _ => {
                l.pos -= 1;
                return Err(l.err("expected `attribute` or `rules`"));
            }
        }
    };

    let mut rules = Vec::with_capacity(declared);
    for _ in 0..declared {
        let mut l = lines.expect("rule")?;
        l.keyword("rule")?;
        let label = l.string("rule label")?;
        if !labels.contains(&label) {
            l.pos -= 1;
            return Err(l.err(format!("rule label {label:?} not in labels")));
        }
        let voc: f64 = l.field("voc")?.parse().map_err(|_| l.err("invalid voc"))?;
        if !(0.0..=1.0).contains(&voc) {
            return Err(l.err("voc must lie in [0, 1]"));
        }
        let accepted = match l.field("accepted")?.as_str() {
            "true" => true,
            "false" => false,
            _ => return Err(l.err("accepted must be true or false")),
        };
        let iteration: usize = l.field("iteration")?.parse().map_err(|_| l.err("invalid iteration"))?;
        let dictionary_size = match l.field("dictionary")?.as_str() {
            "none" => None,
            d => Some(d.parse().map_err(|_| l.err("invalid dictionary size"))?),
        };
        l.finish()?;
        let rule_line = l.no;

        let mut conditions = Vec::new();
        loop {
            let mut l = lines.expect("condition or `end`")?;
            let op = l.word("condition")?;
            let cond = match op.as_str() {
                "end" => {
                    l.finish()?;
                    break;
                }
                "present" => Condition::present(l.number("attribute index")?),
                "absent" => Condition::absent(l.number("attribute index")?),
                "equals" => Condition::equals(l.number("attribute index")?, l.number("symbol id")?),
                "le" => Condition::less_equal(l.number("attribute index")?, l.number("threshold")?),
                "ge" => Condition::greater_equal(l.number("attribute index")?, l.number("threshold")?),
                _ => {
                    l.pos -= 1;
                    return Err(l.err(format!("unknown condition `{op}`")));
                }
            };
            l.finish()?;
            conditions.push(cond);
        }
        let rule = Rule::new(label, conditions).map_err(|e| Error::parse(rule_line, 1, e.to_string()))?;
        rules.push(ScoredRule { rule, voc, accepted, iteration, dictionary_size });
    }
    if let Some(l) = lines.next()? {
        return Err(l.err("content after the last rule"));
    }

    Ok(RuleSet::from_parts(rules, labels, mode, fingerprint, target, AttributeTable(attributes)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"confrule-ruleset 1
mode text
schema 00000000000000ff
target "Type"
labels "neg" "pos"
attribute 3 "bad"
rules 1
rule "neg" voc=0.95 accepted=true iteration=2 dictionary=4
  present 3
end
"#;

    #[test]
    fn parses_minimal_document() {
        let rs = parse(MINIMAL).unwrap();
        assert_eq!(rs.len(), 1);
        assert_eq!(rs.schema_fingerprint(), 0xff);
        assert_eq!(rs.render(0.0), ["IF bad = 1 THEN Type = neg"]);
        assert_eq!(serialize(&rs), MINIMAL);
    }

    #[test]
    fn truncated_document_is_an_error() {
        let cut = &MINIMAL[..MINIMAL.len() - 4];
        match parse(cut) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 10),
            other => panic!("expected parse error, got {other:?}"),
        }
        let no_rules = MINIMAL.lines().take(6).collect::<Vec<_>>().join("\n");
        assert!(matches!(parse(&no_rules), Err(Error::Parse { .. })));
    }

    #[test]
    fn reports_column_of_bad_token() {
        let bad = MINIMAL.replace("present 3", "present x");
        match parse(&bad) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (9, 11)),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_voc = MINIMAL.replace("voc=0.95", "voc=1.5");
        assert!(matches!(parse(&bad_voc), Err(Error::Parse { line: 8, .. })));
    }

    #[test]
    fn escapes_round_trip() {
        let text =
            MINIMAL.replace("\"neg\" \"pos\"", "\"ne\\\"g\" \"pos\"").replace("rule \"neg\"", "rule \"ne\\\"g\"");
        let rs = parse(&text).unwrap();
        assert_eq!(rs.rules()[0].rule.label, "ne\"g");
        assert_eq!(serialize(&rs), text);
    }
}
