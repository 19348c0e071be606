//! Shared text segmentation helpers.
//!
//! One definition of "word" is used across the whole toolkit: a maximal run
//! of non-whitespace characters after Unicode whitespace splitting. Filters,
//! NSL, shingling and the SFT length heuristics all count words this way so
//! their thresholds stay comparable.

use alloc::string::String;
use alloc::vec::Vec;

/// Splits `text` into words: maximal runs of non-whitespace characters.
pub fn words(text: &str) -> impl Iterator<Item = &str> {
    text.split_whitespace()
}

/// Number of words in `text`.
pub fn word_count(text: &str) -> usize {
    words(text).count()
}

/// Non-empty lines of `text`, trimmed of trailing `\r`.
pub fn lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .filter(|l| !l.trim().is_empty())
}

/// Paragraphs of `text`: runs of non-blank lines separated by blank lines.
pub fn paragraphs(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(core::mem::take(&mut current));
            }
        } else {
            if !current.is_empty() {
                current.push('\n');
            }
            current.push_str(line);
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Total characters over all words (whitespace excluded), counted as Unicode
/// scalar values.
pub fn word_char_count(text: &str) -> usize {
    words(text).map(|w| w.chars().count()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn words_split_on_any_whitespace() {
        let ws: Vec<&str> = words("a\tb\nc  d\u{a0}e-f").collect();
        assert_eq!(ws, vec!["a", "b", "c", "d", "e-f"]);
    }

    #[test]
    fn empty_text_has_no_words_or_lines() {
        assert_eq!(word_count(""), 0);
        assert_eq!(lines("").count(), 0);
        assert!(paragraphs("").is_empty());
    }

    #[test]
    fn paragraphs_split_on_blank_lines() {
        let ps = paragraphs("a\nb\n\nc\n\n\nd");
        assert_eq!(ps, vec!["a\nb", "c", "d"]);
    }

    #[test]
    fn lines_skip_blank_and_strip_cr() {
        let ls: Vec<&str> = lines("a\r\n\r\n  \nb").collect();
        assert_eq!(ls, vec!["a", "b"]);
    }
}
