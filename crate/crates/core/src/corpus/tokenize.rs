//! Deterministic rule tokenizer used when no external annotation is supplied.
//!
//! Whitespace separates chunks. Opening brackets and quotes are detached from
//! the front of a chunk; commas, semicolons, colons, closing brackets, quotes
//! and sentence-final punctuation from the back. Internal dots are kept, so
//! `11.0.08` and `reg.exe` stay whole, and a trailing `()` stays attached to
//! the name in front of it. Possessive `'s` becomes its own token.

use super::{Sentence, Token, PLACEHOLDER_POS};

const OPENERS: &[char] = &['(', '[', '{', '"', '\'', '`', '“', '‘'];
const CLOSERS: &[char] = &[',', ';', ':', ')', ']', '}', '"', '\'', '”', '’', '.', '!', '?'];
const TERMINALS: &[&str] = &[".", "!", "?"];
const TRAILING_CLOSE: &[&str] = &["\"", "'", ")", "]", "”", "’"];

fn split_chunk(chunk: &str, base: usize, out: &mut Vec<(usize, usize)>) {
    let mut start = 0;
    let mut end = chunk.len();

    while let Some(c) = chunk[start..end].chars().next() {
        if end - start <= c.len_utf8() || !OPENERS.contains(&c) {
            break;
        }
        out.push((base + start, base + start + c.len_utf8()));
        start += c.len_utf8();
    }

    let mut trailing = Vec::new();
    while let Some(c) = chunk[start..end].chars().next_back() {
        let body = &chunk[start..end];
        if body.len() <= c.len_utf8() || body.ends_with("()") || !CLOSERS.contains(&c) {
            break;
        }
        end -= c.len_utf8();
        trailing.push((base + end, base + end + c.len_utf8()));
    }

    let body = &chunk[start..end];
    let possessive = ["'s", "’s", "'S", "’S"]
        .iter()
        .find(|p| body.len() > p.len() && body.ends_with(*p));
    match possessive {
        Some(p) => {
            let cut = end - p.len();
            out.push((base + start, base + cut));
            out.push((base + cut, base + end));
        }
        None if start < end => out.push((base + start, base + end)),
        None => {}
    }
    out.extend(trailing.into_iter().rev());
}

fn token_spans(raw: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut chunk_start: Option<usize> = None;
    for (i, c) in raw.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = chunk_start.take() {
                split_chunk(&raw[s..i], s, &mut spans);
            }
        } else if chunk_start.is_none() {
            chunk_start = Some(i);
        }
    }
    if let Some(s) = chunk_start {
        split_chunk(&raw[s..], s, &mut spans);
    }
    spans
}

/// Splits `raw_text` into sentences of tokens tagged with the placeholder POS.
///
/// A sentence ends at `.`, `!` or `?` (plus any closing quotes or brackets
/// glued to it) when followed by whitespace and an upper-case letter, or by
/// the end of the text.
pub fn tokenize(raw_text: &str) -> Vec<Sentence> {
    let spans = token_spans(raw_text);
    let mut sentences = Vec::new();
    let mut current: Vec<(usize, usize)> = Vec::new();

    let mut i = 0;
    while i < spans.len() {
        current.push(spans[i]);
        let text = &raw_text[spans[i].0..spans[i].1];
        if TERMINALS.contains(&text) {
            let mut j = i + 1;
            while j < spans.len()
                && spans[j].0 == spans[j - 1].1
                && TRAILING_CLOSE.contains(&&raw_text[spans[j].0..spans[j].1])
            {
                current.push(spans[j]);
                j += 1;
            }
            let ends = match spans.get(j) {
                None => true,
                Some(&(next_start, _)) => {
                    let gap = &raw_text[spans[j - 1].1..next_start];
                    !gap.is_empty()
                        && raw_text[next_start..].chars().next().is_some_and(char::is_uppercase)
                }
            };
            if ends {
                sentences.push(std::mem::take(&mut current));
            }
            i = j;
            continue;
        }
        i += 1;
    }
    if !current.is_empty() {
        sentences.push(current);
    }

    sentences
        .into_iter()
        .enumerate()
        .map(|(si, toks)| Sentence {
            index: si,
            tokens: toks
                .into_iter()
                .enumerate()
                .map(|(ti, (s, e))| Token {
                    index: ti,
                    text: raw_text[s..e].to_string(),
                    pos: PLACEHOLDER_POS.to_string(),
                    char_start: s,
                    char_end: e,
                })
                .collect(),
            tree: None,
        })
        .collect()
}

/// Surface words of `text` under the same splitting rules, ignoring sentence
/// boundaries. Used to normalize multi-word gazetteer aliases.
pub fn words(text: &str) -> Vec<&str> {
    token_spans(text).into_iter().map(|(s, e)| &text[s..e]).collect()
}
