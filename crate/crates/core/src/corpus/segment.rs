//! Punctuation-based sentence splitter.
//!
//! Line breaks always end a sentence. Inside a line, `.`, `!` or `?`
//! (optionally followed by closing quotes/brackets) ends a sentence when
//! whitespace or end of line follows, unless the word before a `.` is a
//! known abbreviation or a single capital initial.

use super::{tokenize, Document, Sentence};

const ABBREVIATIONS: &[&str] = &[
    "e.g", "i.e", "al", "fig", "figs", "dr", "mr", "mrs", "ms", "prof", "vs", "approx", "no",
    "vol", "ca", "cf", "resp", "incl", "eq", "st", "sr", "jr", "inc", "ltd",
    "ref", "refs", "sec", "tab", "suppl", "dept", "univ", "u.s",
];

/// Splits a document into sentences over [`Document::full_text`]. Tokens
/// carry provisional (lowercased) lemmas.
pub fn split_sentences(doc: &Document) -> Vec<Sentence> {
    let text = doc.full_text();
    split_text(&text)
        .into_iter()
        .enumerate()
        .map(|(index, (start, end))| {
            let sentence_text = text[start..end].to_string();
            let tokens = tokenize(&sentence_text);
            Sentence {
                doc_id: doc.doc_id.clone(),
                index,
                offset: start,
                text: sentence_text,
                tokens,
            }
        })
        .collect()
}

/// Byte spans of the sentences in `text`, trimmed, non-empty, in order.
pub fn split_text(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut line_start = 0;
    for line in text.split_inclusive('\n') {
        split_line(text, line_start, line_start + line.len(), &mut spans);
        line_start += line.len();
    }
    spans
}

fn split_line(text: &str, start: usize, end: usize, spans: &mut Vec<(usize, usize)>) {
    let line = &text[start..end];
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut sentence_start = 0;
    let mut i = 0;
    while i < chars.len() {
        let (off, c) = chars[i];
        if !matches!(c, '.' | '!' | '?') {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && matches!(chars[j].1, '.' | '!' | '?' | '"' | '\'' | ')' | ']' | '”' | '’') {
            j += 1;
        }
        let at_boundary = j >= chars.len() || chars[j].1.is_whitespace();
        if at_boundary && !(c == '.' && is_abbreviation(&line[..off])) {
            let cut = chars.get(j).map_or(line.len(), |&(o, _)| o);
            push_trimmed(start + sentence_start, start + cut, text, spans);
            sentence_start = cut;
        }
        i = j;
    }
    push_trimmed(start + sentence_start, end, text, spans);
}

fn is_abbreviation(before_dot: &str) -> bool {
    let word = before_dot
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(|c: char| !c.is_alphanumeric());
    if word.is_empty() {
        return false;
    }
    let mut chars = word.chars();
    if let (Some(first), None) = (chars.next(), chars.next()) {
        if first.is_uppercase() {
            return true;
        }
    }
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

fn push_trimmed(start: usize, end: usize, text: &str, spans: &mut Vec<(usize, usize)>) {
    let slice = &text[start..end];
    let trimmed_start = start + (slice.len() - slice.trim_start().len());
    let trimmed_end = end - (slice.len() - slice.trim_end().len());
    if trimmed_start < trimmed_end {
        spans.push((trimmed_start, trimmed_end));
    }
}
