//! Rule-based tokenizer.
//!
//! Rules, applied left to right:
//!
//! | input                                   | result                               |
//! |-----------------------------------------|--------------------------------------|
//! | whitespace                              | separator, never emitted             |
//! | run of alphanumerics                    | word token                           |
//! | `-`, `'` or `’` between two alphanumerics | joins into the word (`COVID-19`, `can't`) |
//! | `.` or `,` between two digits           | joins into the number (`1.5`, `10,000`) |
//! | any other character                     | single-character punctuation token   |
//!
//! So `"COVID-19, fever."` yields `COVID-19`, `,`, `fever`, `.`.
//! Tokens carry byte offsets and a provisional lowercase lemma; run them
//! through [`super::Lemmatizer`] to get real lemmas.

use super::Token;

pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if !c.is_alphanumeric() {
            let end = start + c.len_utf8();
            tokens.push(make_token(text, start, end));
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() {
            let c = chars[j].1;
            if c.is_alphanumeric() {
                j += 1;
                continue;
            }
            let prev = chars[j - 1].1;
            let next = chars.get(j + 1).map(|&(_, n)| n);
            let joins = match (c, next) {
                ('-' | '\'' | '’', Some(n)) => prev.is_alphanumeric() && n.is_alphanumeric(),
                ('.' | ',', Some(n)) => prev.is_ascii_digit() && n.is_ascii_digit(),
                _ => false,
            };
            if joins {
                j += 2;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(text.len(), |&(off, _)| off);
        tokens.push(make_token(text, start, end));
        i = j;
    }
    tokens
}

fn make_token(text: &str, start: usize, end: usize) -> Token {
    let surface = &text[start..end];
    Token {
        surface: surface.to_string(),
        lemma: surface.to_lowercase(),
        start,
        end,
        is_stopword: false,
    }
}

/// True when the string has no alphanumeric character.
pub fn is_punctuation(s: &str) -> bool {
    !s.chars().any(char::is_alphanumeric)
}
