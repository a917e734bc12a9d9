//! Character-level symbol streams.

use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolStream {
    pub vocab: Vec<char>,
    pub ids: Vec<usize>,
}

impl SymbolStream {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// One-hot column for position `i`.
    pub fn one_hot(&self, i: usize) -> Matrix {
        one_hot(self.ids[i], self.vocab.len())
    }

    pub fn decode(&self) -> String {
        self.ids.iter().map(|&i| self.vocab[i]).collect()
    }
}

pub fn one_hot(id: usize, size: usize) -> Matrix {
    let mut m = Matrix::zeros(size, 1);
    m.set(id, 0, 1.0);
    m
}

/// Encodes `text` one symbol per character. Without a vocabulary one is
/// built in first-appearance order; with one, unseen characters are errors.
pub fn encode_char_corpus(text: &str, vocab: Option<&[char]>) -> Result<SymbolStream> {
    match vocab {
        Some(v) => {
            let ids = text
                .chars()
                .enumerate()
                .map(|(offset, ch)| {
                    v.iter()
                        .position(|&c| c == ch)
                        .ok_or(Error::UnknownSymbol { symbol: ch, offset })
                })
                .collect::<Result<_>>()?;
            Ok(SymbolStream {
                vocab: v.to_vec(),
                ids,
            })
        }
        None => {
            let mut vocab = Vec::new();
            let mut index = std::collections::HashMap::new();
            let ids = text
                .chars()
                .map(|ch| {
                    *index.entry(ch).or_insert_with(|| {
                        vocab.push(ch);
                        vocab.len() - 1
                    })
                })
                .collect();
            Ok(SymbolStream { vocab, ids })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_vocab() {
        let s = encode_char_corpus("ab", Some(&['a', 'b'])).unwrap();
        assert_eq!(s.ids, vec![0, 1]);
        assert_eq!(s.one_hot(0), Matrix::column(&[1.0, 0.0]));
        assert_eq!(s.one_hot(1), Matrix::column(&[0.0, 1.0]));
    }

    #[test]
    fn unknown_symbol_reports_offset() {
        let e = encode_char_corpus("aab c", Some(&['a', 'b', 'c'])).unwrap_err();
        assert!(matches!(e, Error::UnknownSymbol { symbol: ' ', offset: 3 }));
    }

    #[test]
    fn empty_text() {
        let s = encode_char_corpus("", None).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.vocab_size(), 0);
    }

    #[test]
    fn first_appearance_order_includes_space() {
        let s = encode_char_corpus("the cat", None).unwrap();
        assert_eq!(s.vocab, vec!['t', 'h', 'e', ' ', 'c', 'a']);
    }

    proptest! {
        #[test]
        fn round_trip_and_one_hot_sums(text in "\\PC{0,64}") {
            let s = encode_char_corpus(&text, None).unwrap();
            prop_assert_eq!(s.decode(), text);
            for i in 0..s.len() {
                prop_assert_eq!(s.one_hot(i).sum(), 1.0);
            }
        }
    }
}
