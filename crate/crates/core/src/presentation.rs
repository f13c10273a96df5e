use std::fmt;

use crate::error::{NpcError, Result};

/// A generator `g` is encoded as `g + 1`, its inverse as `-(g + 1)`.
pub type Letter = i32;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&x| -x).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn is_freely_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != -w[1])
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_freely_reduced() && (self.0.len() < 2 || self.0[0] != -self.0[self.0.len() - 1])
    }

    pub fn free_reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &x in &self.0 {
            if out.last() == Some(&-x) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        Word(out)
    }

    pub fn cyclic_reduce(&self) -> Word {
        let w = self.free_reduce().0;
        let (mut i, mut j) = (0, w.len());
        while j - i >= 2 && w[i] == -w[j - 1] {
            i += 1;
            j -= 1;
        }
        Word(w[i..j].to_vec())
    }

    /// Cyclic shift starting at position `s`.
    pub fn rotate(&self, s: usize) -> Word {
        let n = self.0.len();
        Word((0..n).map(|i| self.0[(s + i) % n]).collect())
    }
}

/// A finite presentation with single-letter lowercase generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    generators: Vec<char>,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(generators: &[&str], relators: &[&str]) -> Result<Self> {
        let mut gens: Vec<char> = Vec::new();
        for g in generators {
            let mut cs = g.chars();
            match (cs.next(), cs.next()) {
                (Some(c), None) if c.is_ascii_lowercase() && !gens.contains(&c) => gens.push(c),
                _ => return Err(parse_err(format!("generator {g:?} must be a distinct lowercase letter"))),
            }
        }
        let mut p = Presentation { generators: gens, relators: Vec::new() };
        for (i, r) in relators.iter().enumerate() {
            let w = p.parse_word(r)?;
            if w.is_empty() {
                return Err(parse_err(format!("relator {i} is empty")));
            }
            if !w.is_cyclically_reduced() {
                return Err(parse_err(format!("relator {i} ({r:?}) is not freely and cyclically reduced")));
            }
            p.relators.push(w);
        }
        Ok(p)
    }

    /// The closed orientable surface group of genus `g ≥ 1`:
    /// `⟨a, b, c, d, … | abAB cdCD …⟩`.
    pub fn surface(genus: usize) -> Result<Self> {
        if genus == 0 || 2 * genus > 26 {
            return Err(NpcError::InvalidSpec(format!("surface genus {genus} out of range 1..=13")));
        }
        let gens: Vec<String> = (0..2 * genus).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
        let rel: String =
            gens.chunks(2).map(|p| format!("{}{}{}{}", p[0], p[1], p[0].to_uppercase(), p[1].to_uppercase())).collect();
        let g: Vec<&str> = gens.iter().map(String::as_str).collect();
        Self::new(&g, &[rel.as_str()])
    }

    pub fn generators(&self) -> &[char] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let mut out = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let low = ch.to_ascii_lowercase();
            let Some(g) = self.generators.iter().position(|&c| c == low) else {
                return Err(parse_err(format!("unknown letter {ch:?} in {s:?}")));
            };
            let x = g as Letter + 1;
            out.push(if ch.is_ascii_uppercase() { -x } else { x });
        }
        Ok(Word(out))
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.0.iter().map(|&x| self.letter_char(x)).collect()
    }

    pub fn letter_char(&self, x: Letter) -> char {
        let c = self.generators[(x.unsigned_abs() - 1) as usize];
        if x < 0 {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn relator_strings(&self) -> Vec<String> {
        self.relators.iter().map(|r| self.format_word(r)).collect()
    }

    /// Exponent-sum vector of a word; equal elements have equal vectors.
    pub fn abelianize(&self, w: &Word) -> Vec<i32> {
        let mut v = vec![0; self.generators.len()];
        for &x in &w.0 {
            v[(x.unsigned_abs() - 1) as usize] += x.signum();
        }
        v
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(|c| c.to_string()).collect();
        write!(f, "<{} | {}>", gens.join(","), self.relator_strings().join(","))
    }
}

fn parse_err(msg: String) -> NpcError {
    NpcError::Parse { line: 0, column: 0, msg }
}
