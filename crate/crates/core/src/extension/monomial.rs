use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExtensionError;

/// Generators z_k of C(S_q^{2ℓ+1}) or y_k of C(S_q^{2ℓ+3}).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Alphabet {
    Z,
    Y,
}

impl Alphabet {
    fn symbol(self) -> char {
        match self {
            Alphabet::Z => 'z',
            Alphabet::Y => 'y',
        }
    }

    /// Number of letters for the given ℓ.
    pub fn letters(self, ell: usize) -> usize {
        match self {
            Alphabet::Z => ell + 1,
            Alphabet::Y => ell + 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub k: usize,
    pub adjoint: bool,
}

/// A word in the generators and their adjoints. The empty word is the unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub alphabet: Alphabet,
    pub letters: Vec<Letter>,
}

impl Monomial {
    pub fn unit(alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            letters: Vec::new(),
        }
    }

    pub fn letter(alphabet: Alphabet, k: usize, adjoint: bool) -> Self {
        Self {
            alphabet,
            letters: vec![Letter { k, adjoint }],
        }
    }

    pub fn is_unit(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Checks every letter index against the alphabet size for `ell`.
    pub fn check_ell(&self, ell: usize) -> Result<(), ExtensionError> {
        let n = self.alphabet.letters(ell);
        match self.letters.iter().find(|l| l.k == 0 || l.k > n) {
            Some(l) => Err(ExtensionError::LetterOutOfRange {
                letter: format!("{}{}", self.alphabet.symbol(), l.k),
                ell,
            }),
            None => Ok(()),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            alphabet: self.alphabet,
            letters: self
                .letters
                .iter()
                .rev()
                .map(|l| Letter {
                    k: l.k,
                    adjoint: !l.adjoint,
                })
                .collect(),
        }
    }

    /// Concatenation `self · rhs`.
    pub fn times(&self, rhs: &Self) -> Result<Self, ExtensionError> {
        let alphabet = match (self.is_unit(), rhs.is_unit()) {
            (true, _) => rhs.alphabet,
            (_, true) => self.alphabet,
            _ if self.alphabet == rhs.alphabet => self.alphabet,
            _ => return Err(ExtensionError::MixedAlphabet),
        };
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&rhs.letters);
        Ok(Self { alphabet, letters })
    }

    /// `(k, adjoint)` pairs, leftmost first.
    pub fn word(&self) -> Vec<(usize, bool)> {
        self.letters.iter().map(|l| (l.k, l.adjoint)).collect()
    }

    /// The same letters read in the other alphabet.
    pub fn relabel(&self, alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            letters: self.letters.clone(),
        }
    }

    pub fn contains(&self, k: usize) -> bool {
        self.letters.iter().any(|l| l.k == k)
    }
}

/// σ_ℓ: y_i ↦ z_i for i ≤ ℓ+1 and y_{ℓ+2} ↦ 0. `None` is the zero element.
pub fn sigma_quotient(m: &Monomial, ell: usize) -> Result<Option<Monomial>, ExtensionError> {
    if m.alphabet != Alphabet::Y && !m.is_unit() {
        return Err(ExtensionError::WrongAlphabet {
            expected: Alphabet::Y,
        });
    }
    m.check_ell(ell)?;
    if m.contains(ell + 2) {
        return Ok(None);
    }
    Ok(Some(m.relabel(Alphabet::Z)))
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", self.alphabet.symbol(), l.k)?;
            if l.adjoint {
                f.write_str("*")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Monomial {
    type Err = ExtensionError;

    /// Accepts tokens like `z1`, `z2*`, `y3`, separated by optional spaces or `·`.
    /// `1` or the empty string is the unit (in the z-alphabet).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| ExtensionError::Parse {
            input: s.to_string(),
            msg: msg.to_string(),
        };
        let t = s.trim();
        if t.is_empty() || t == "1" {
            return Ok(Self::unit(Alphabet::Z));
        }
        let chars: Vec<char> = t.chars().collect();
        let mut alphabet = None;
        let mut letters = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() || c == '·' || c == '.' {
                i += 1;
                continue;
            }
            let a = match c {
                'z' => Alphabet::Z,
                'y' => Alphabet::Y,
                _ => return Err(bad(&format!("unexpected character '{c}'"))),
            };
            if alphabet.is_some_and(|b| b != a) {
                return Err(ExtensionError::MixedAlphabet);
            }
            alphabet = Some(a);
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if start == i {
                return Err(bad("missing generator index"));
            }
            let k: usize = chars[start..i]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| bad("bad generator index"))?;
            if k == 0 {
                return Err(bad("generator indices start at 1"));
            }
            let adjoint = i < chars.len() && chars[i] == '*';
            if adjoint {
                i += 1;
            }
            letters.push(Letter { k, adjoint });
        }
        Ok(Self {
            alphabet: alphabet.unwrap_or(Alphabet::Z),
            letters,
        })
    }
}
