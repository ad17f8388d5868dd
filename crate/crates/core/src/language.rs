//! Controlled English for captions.
//!
//! [`realize`] turns a [`Caption`] into a sentence using a fixed template per
//! caption form, and [`parse`] recognizes exactly that language and maps it
//! back to the caption. Both directions share the closed [`LEXICON`].
//!
//! Templates (singular noun phrases take `a`/`an`, plural ones are bare):
//!
//! ```text
//! There is a blue rectangle.                           existential
//! A red circle is to the left of a cyan semicircle.    relational
//! A square is green.                                   a
//! No shape is a red triangle.                          no
//! The shape is green.                                  the
//! Two blue shapes are pentagons.                       two / most / all
//! Most squares are green and there are some circles which are blue.
//! ```
//!
//! Inside a conjunction the `a` quantifier takes the relative-clause form
//! `there are some <plural> which are <body>`.

use std::fmt;

use thiserror::Error;

use crate::geometry::ShapeKind;
use crate::semantics::{Caption, EntityPredicate, Quantifier, Relation};
use crate::worldgen::Color;

/// Every word form the grammar knows, in vocabulary order.
pub const LEXICON: [&str; 45] = [
    "there", "is", "are", "a", "an", "the", "no", "most", "all", "two", "some", "which", "and", "to", "of",
    "left", "right", "above", "below", "shape", "shapes", "square", "squares", "rectangle", "rectangles",
    "triangle", "triangles", "pentagon", "pentagons", "cross", "crosses", "circle", "circles", "semicircle",
    "semicircles", "ellipse", "ellipses", "red", "green", "blue", "yellow", "magenta", "cyan", "white", ".",
];

/// Token reserved for padding in exported id sequences.
pub const PAD_TOKEN: &str = "<pad>";

/// A word form of the lexicon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token(usize);

impl Token {
    pub fn lookup(form: &str) -> Option<Token> {
        LEXICON.iter().position(|w| *w == form).map(Token)
    }

    pub fn as_str(self) -> &'static str {
        LEXICON[self.0]
    }

    /// Vocabulary id; 0 is the padding id.
    pub fn id(self) -> u32 {
        self.0 as u32 + 1
    }

    pub fn from_id(id: u32) -> Option<Token> {
        let index = (id as usize).checked_sub(1)?;
        (index < LEXICON.len()).then_some(Token(index))
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Vocabulary lines: the padding token followed by the lexicon.
pub fn vocabulary() -> Vec<&'static str> {
    std::iter::once(PAD_TOKEN).chain(LEXICON).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LanguageError {
    #[error("unknown word `{word}` at token {position}")]
    UnknownWord { word: String, position: usize },
    #[error("parse error at token {position}: expected {expected}, found {found}")]
    Parse {
        position: usize,
        expected: String,
        found: String,
    },
}

fn article(next_word: &str) -> &'static str {
    if next_word.starts_with(['a', 'e', 'i', 'o', 'u']) {
        "an"
    } else {
        "a"
    }
}

fn noun_singular(pred: &EntityPredicate) -> &'static str {
    pred.shape.map_or("shape", ShapeKind::name)
}

fn noun_plural(pred: &EntityPredicate) -> &'static str {
    pred.shape.map_or("shapes", ShapeKind::plural)
}

/// `red circle`, `ellipse`, `shape`.
fn bare_singular(pred: &EntityPredicate) -> String {
    match pred.color {
        Some(c) => format!("{} {}", c.name(), noun_singular(pred)),
        None => noun_singular(pred).to_string(),
    }
}

fn bare_plural(pred: &EntityPredicate) -> String {
    match pred.color {
        Some(c) => format!("{} {}", c.name(), noun_plural(pred)),
        None => noun_plural(pred).to_string(),
    }
}

fn indefinite(pred: &EntityPredicate) -> String {
    let np = bare_singular(pred);
    format!("{} {}", article(&np), np)
}

/// Copula complement: a bare adjective when only the color is constrained.
fn body_singular(body: &EntityPredicate) -> String {
    match (body.shape, body.color) {
        (None, Some(c)) => c.name().to_string(),
        _ => indefinite(body),
    }
}

fn body_plural(body: &EntityPredicate) -> String {
    match (body.shape, body.color) {
        (None, Some(c)) => c.name().to_string(),
        _ => bare_plural(body),
    }
}

fn relation_phrase(relation: Relation) -> &'static str {
    match relation {
        Relation::LeftOf => "to the left of",
        Relation::RightOf => "to the right of",
        Relation::Above => "above",
        Relation::Below => "below",
    }
}

/// Lowercase clause without the final period.
fn clause(caption: &Caption, in_conjunction: bool) -> String {
    match caption {
        Caption::Existential { predicate } => format!("there is {}", indefinite(predicate)),
        Caption::Relational {
            subject,
            relation,
            object,
        } => format!("{} is {} {}", indefinite(subject), relation_phrase(*relation), indefinite(object)),
        Caption::Quantified {
            quantifier,
            restrictor,
            body,
        } => match quantifier {
            Quantifier::A if in_conjunction => format!(
                "there are some {} which are {}",
                bare_plural(restrictor),
                body_plural(body)
            ),
            Quantifier::A => format!("{} is {}", indefinite(restrictor), body_singular(body)),
            Quantifier::No | Quantifier::The => format!(
                "{} {} is {}",
                quantifier.name(),
                bare_singular(restrictor),
                body_singular(body)
            ),
            Quantifier::Two | Quantifier::Most | Quantifier::All => format!(
                "{} {} are {}",
                quantifier.name(),
                bare_plural(restrictor),
                body_plural(body)
            ),
        },
        Caption::Conjunction { left, right } => {
            format!("{} and {}", clause(left, true), clause(right, true))
        }
    }
}

/// Deterministic English sentence for a caption.
pub fn realize(caption: &Caption) -> String {
    let text = clause(caption, caption.is_conjunction());
    let mut chars = text.chars();
    let first = chars.next().map(|c| c.to_ascii_uppercase()).unwrap_or_default();
    format!("{first}{}.", chars.as_str())
}

/// Lowercases, splits on whitespace and detaches a trailing period.
pub fn tokenize(text: &str) -> Result<Vec<Token>, LanguageError> {
    let mut forms = Vec::new();
    for word in text.split_whitespace() {
        let word = word.to_lowercase();
        match word.strip_suffix('.') {
            Some(stem) if !stem.is_empty() => {
                forms.push(stem.to_string());
                forms.push(".".to_string());
            }
            _ => forms.push(word),
        }
    }
    forms
        .into_iter()
        .enumerate()
        .map(|(position, word)| Token::lookup(&word).ok_or(LanguageError::UnknownWord { word, position }))
        .collect()
}

struct Parser {
    tokens: Vec<&'static str>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&'static str> {
        self.tokens.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<&'static str> {
        self.tokens.get(self.pos + offset).copied()
    }

    fn error(&self, expected: &str) -> LanguageError {
        LanguageError::Parse {
            position: self.pos,
            expected: expected.to_string(),
            found: self.peek().map_or("end of input".to_string(), |t| format!("`{t}`")),
        }
    }

    fn expect(&mut self, word: &str) -> Result<(), LanguageError> {
        if self.peek() == Some(word) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("`{word}`")))
        }
    }

    fn eat(&mut self, word: &str) -> bool {
        let hit = self.peek() == Some(word);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn color(&mut self) -> Option<Color> {
        let c = self.peek()?.parse().ok()?;
        self.pos += 1;
        Some(c)
    }

    fn article(&mut self) -> Result<(), LanguageError> {
        if self.eat("a") || self.eat("an") {
            Ok(())
        } else {
            Err(self.error("an article"))
        }
    }

    /// `[color] noun` in singular number.
    fn nominal_singular(&mut self) -> Result<EntityPredicate, LanguageError> {
        let color = self.color();
        let shape = match self.peek() {
            Some("shape") => None,
            Some(word) => match word.parse::<ShapeKind>() {
                Ok(s) => Some(s),
                Err(_) => return Err(self.error("a singular noun")),
            },
            None => return Err(self.error("a singular noun")),
        };
        self.pos += 1;
        Ok(EntityPredicate::new(shape, color))
    }

    fn nominal_plural(&mut self) -> Result<EntityPredicate, LanguageError> {
        let color = self.color();
        let shape = match self.peek() {
            Some("shapes") => None,
            Some(word) => match ShapeKind::ALL.into_iter().find(|s| s.plural() == word) {
                Some(s) => Some(s),
                None => return Err(self.error("a plural noun")),
            },
            None => return Err(self.error("a plural noun")),
        };
        self.pos += 1;
        Ok(EntityPredicate::new(shape, color))
    }

    fn indefinite(&mut self) -> Result<EntityPredicate, LanguageError> {
        self.article()?;
        self.nominal_singular()
    }

    fn is_noun_at(&self, offset: usize) -> bool {
        self.peek_at(offset)
            .is_some_and(|w| w == "shape" || w == "shapes" || w.parse::<ShapeKind>().is_ok() || ShapeKind::ALL.iter().any(|s| s.plural() == w))
    }

    fn body_singular(&mut self) -> Result<EntityPredicate, LanguageError> {
        if matches!(self.peek(), Some("a" | "an")) {
            return self.indefinite();
        }
        match self.color() {
            Some(c) => Ok(EntityPredicate::color(c)),
            None => Err(self.error("a color or an indefinite noun phrase")),
        }
    }

    fn body_plural(&mut self) -> Result<EntityPredicate, LanguageError> {
        let color_then_noun = self.peek().is_some_and(|w| w.parse::<Color>().is_ok()) && self.is_noun_at(1);
        if color_then_noun || self.is_noun_at(0) {
            return self.nominal_plural();
        }
        match self.color() {
            Some(c) => Ok(EntityPredicate::color(c)),
            None => Err(self.error("a color or a plural noun phrase")),
        }
    }

    fn relation(&mut self) -> Option<Relation> {
        match (self.peek(), self.peek_at(1), self.peek_at(2), self.peek_at(3)) {
            (Some("above"), ..) => {
                self.pos += 1;
                Some(Relation::Above)
            }
            (Some("below"), ..) => {
                self.pos += 1;
                Some(Relation::Below)
            }
            (Some("to"), Some("the"), Some(side @ ("left" | "right")), Some("of")) => {
                self.pos += 4;
                Some(if side == "left" { Relation::LeftOf } else { Relation::RightOf })
            }
            _ => None,
        }
    }

    fn clause(&mut self) -> Result<Caption, LanguageError> {
        match self.peek() {
            Some("there") => {
                self.pos += 1;
                if self.eat("is") {
                    return Ok(Caption::existential(self.indefinite()?));
                }
                self.expect("are")?;
                self.expect("some")?;
                let restrictor = self.nominal_plural()?;
                self.expect("which")?;
                self.expect("are")?;
                let body = self.body_plural()?;
                Ok(Caption::quantified(Quantifier::A, restrictor, body))
            }
            Some("a" | "an") => {
                let subject = self.indefinite()?;
                self.expect("is")?;
                if let Some(relation) = self.relation() {
                    let object = self.indefinite()?;
                    return Ok(Caption::relational(subject, relation, object));
                }
                let body = self.body_singular()?;
                Ok(Caption::quantified(Quantifier::A, subject, body))
            }
            Some(q @ ("no" | "the")) => {
                self.pos += 1;
                let quantifier = if q == "no" { Quantifier::No } else { Quantifier::The };
                let restrictor = self.nominal_singular()?;
                self.expect("is")?;
                let body = self.body_singular()?;
                Ok(Caption::quantified(quantifier, restrictor, body))
            }
            Some(q @ ("two" | "most" | "all")) => {
                self.pos += 1;
                let quantifier: Quantifier = q.parse().expect("lexicon quantifier");
                let restrictor = self.nominal_plural()?;
                self.expect("are")?;
                let body = self.body_plural()?;
                Ok(Caption::quantified(quantifier, restrictor, body))
            }
            _ => Err(self.error("the start of a clause")),
        }
    }

    fn sentence(&mut self) -> Result<Caption, LanguageError> {
        let first = self.clause()?;
        let caption = if self.eat("and") {
            Caption::conjunction(first, self.sentence_tail()?)
        } else {
            first
        };
        Ok(caption)
    }

    fn sentence_tail(&mut self) -> Result<Caption, LanguageError> {
        let next = self.clause()?;
        if self.eat("and") {
            Ok(Caption::conjunction(next, self.sentence_tail()?))
        } else {
            Ok(next)
        }
    }
}

/// Parses a caption sentence. Chains of `and` associate to the right.
pub fn parse(text: &str) -> Result<Caption, LanguageError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens: tokens.iter().map(|t| t.as_str()).collect(),
        pos: 0,
    };
    let caption = parser.sentence()?;
    parser.expect(".")?;
    if parser.peek().is_some() {
        return Err(parser.error("end of input"));
    }
    Ok(caption)
}
