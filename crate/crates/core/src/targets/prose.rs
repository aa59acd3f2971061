//! The prose artifact kind: sentence fragments with referent holes,
//! concatenated into a task description.

use crate::instantiate::{parse_hole_ref, ArtifactKind, Filler, HoleRef, HOLE_OPEN};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Piece {
    Text(String),
    Hole(HoleRef<Text>),
}

/// Text with holes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Text(pub Vec<Piece>);

impl Text {
    pub fn plain(s: impl Into<String>) -> Self {
        Text(vec![Piece::Text(s.into())])
    }

    /// The text with holes shown as template markers.
    pub fn render(&self) -> String {
        self.0
            .iter()
            .map(|p| match p {
                Piece::Text(s) => s.clone(),
                Piece::Hole(h) => {
                    let args = h.args.as_ref().map(|a| a.iter().map(Text::render).collect::<Vec<_>>());
                    h.render(args.as_deref())
                }
            })
            .collect()
    }

    pub fn has_holes(&self) -> bool {
        self.0.iter().any(|p| matches!(p, Piece::Hole(_)))
    }
}

/// Parse text with `{hole:...}` markers.
pub fn parse_text(src: &str) -> Result<Text, String> {
    let mut pieces = Vec::new();
    let mut rest = src;
    while let Some(i) = rest.find(HOLE_OPEN) {
        if i > 0 {
            pieces.push(Piece::Text(rest[..i].to_string()));
        }
        let after = &rest[i + HOLE_OPEN.len()..];
        let mut depth = 1;
        let end = after
            .char_indices()
            .find(|&(_, c)| {
                match c {
                    '{' => depth += 1,
                    '}' => depth -= 1,
                    _ => {}
                }
                depth == 0
            })
            .map(|(j, _)| j)
            .ok_or_else(|| format!("unterminated hole in `{src}`"))?;
        pieces.push(Piece::Hole(parse_hole_ref(&after[..end], parse_text)?));
        rest = &after[end + 1..];
    }
    if !rest.is_empty() {
        pieces.push(Piece::Text(rest.to_string()));
    }
    Ok(Text(pieces))
}

/// Split a template into sentences at `.`, `!` or `?` followed by
/// whitespace (outside holes), and at line breaks.
pub fn split_sentences(src: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0;
    let chars: Vec<char> = src.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            _ => {}
        }
        if c == '\n' && depth == 0 {
            out.push(std::mem::take(&mut cur));
            continue;
        }
        cur.push(c);
        let next_ws = chars.get(i + 1).is_none_or(|n| n.is_whitespace());
        if depth == 0 && matches!(c, '.' | '!' | '?') && next_ws {
            out.push(std::mem::take(&mut cur));
        }
    }
    out.push(cur);
    out.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn normalize_space(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// One finished sentence: whitespace normalized, first letter upper-case,
/// terminated by punctuation.
pub fn finish_sentence(s: &str) -> String {
    let s = normalize_space(s);
    let mut chars = s.chars();
    let mut out: String = match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => return String::new(),
    };
    if !out.ends_with(['.', '!', '?']) {
        out.push('.');
    }
    out
}

/// Render sentences as one paragraph; no sentences give empty text.
pub fn render_prose(sentences: &[Text]) -> Result<String, String> {
    let mut parts = Vec::new();
    for s in sentences {
        if s.has_holes() {
            return Err(format!("unfilled hole in `{}`", s.render()));
        }
        let f = finish_sentence(&s.render());
        if !f.is_empty() {
            parts.push(f);
        }
    }
    Ok(parts.join(" "))
}

fn fill_text(t: Text, fill: &mut Filler<'_, Text>) -> Result<Text, String> {
    let mut out = Vec::new();
    for p in t.0 {
        match p {
            Piece::Text(s) => out.push(Piece::Text(s)),
            Piece::Hole(mut h) => {
                if let Some(args) = h.args.take() {
                    h.args = Some(args.into_iter().map(|a| fill_text(a, fill)).collect::<Result<_, _>>()?);
                }
                out.extend(fill(&h)?.0);
            }
        }
    }
    Ok(Text(out))
}

pub struct ProseKind;

impl ArtifactKind for ProseKind {
    type Expr = Text;
    type Fragment = Vec<Text>;
    const NAME: &'static str = "prose";
    const EXTENSION: &'static str = "md";

    fn reserved() -> Vec<String> {
        Vec::new()
    }

    fn identity() -> Vec<Text> {
        Vec::new()
    }

    fn combine(mut a: Vec<Text>, b: Vec<Text>) -> Vec<Text> {
        a.extend(b);
        a
    }

    fn parse_fragment(src: &str) -> Result<Vec<Text>, String> {
        split_sentences(src).iter().map(|s| parse_text(s)).collect()
    }

    fn parse_expr(src: &str) -> Result<Text, String> {
        parse_text(src)
    }

    fn fill_fragment(f: Vec<Text>, fill: &mut Filler<'_, Text>) -> Result<Vec<Text>, String> {
        f.into_iter().map(|t| fill_text(t, fill)).collect()
    }

    fn fill_expr(e: Text, fill: &mut Filler<'_, Text>) -> Result<Text, String> {
        fill_text(e, fill)
    }

    fn subst_params(body: &Text, params: &[String], args: &[Text]) -> Text {
        let map: std::collections::BTreeMap<String, String> =
            params.iter().cloned().zip(args.iter().map(Text::render)).collect();
        Text(
            body.0
                .iter()
                .map(|p| match p {
                    Piece::Text(s) => Piece::Text(crate::instantiate::rename_tokens(s, &map)),
                    h => h.clone(),
                })
                .collect(),
        )
    }

    fn apply(f: Text, args: Vec<Text>) -> Result<Text, String> {
        let mut out = f.0;
        for a in args {
            out.push(Piece::Text(" ".into()));
            out.extend(a.0);
        }
        Ok(Text(out))
    }

    fn tuple(_items: Vec<Text>) -> Option<Text> {
        None
    }

    fn render(f: &Vec<Text>) -> String {
        match render_prose(f) {
            Ok(s) if s.is_empty() => s,
            Ok(s) => format!("{s}\n"),
            Err(e) => format!("<{e}>\n"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentences_are_cased_and_terminated() {
        let s = ProseKind::parse_fragment("read a number.  then print it").unwrap();
        assert_eq!(render_prose(&s).unwrap(), "Read a number. Then print it.");
        assert_eq!(render_prose(&[]).unwrap(), "");
    }

    #[test]
    fn holes_parse_inside_text() {
        let t = parse_text("Read {hole:n} further integers").unwrap();
        assert!(t.has_holes());
        assert_eq!(t.render(), "Read {hole:n} further integers");
        assert!(render_prose(&[t]).is_err());
        assert_eq!(split_sentences("Use {hole:f(a. b)} now. Done"), vec!["Use {hole:f(a. b)} now.", "Done"]);
    }
}
