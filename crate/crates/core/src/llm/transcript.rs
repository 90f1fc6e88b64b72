//! Plain-text transcript format.
//!
//! ```text
//! USER: When did the war end?
//! MODEL: In 1945.
//! It ended in two stages.
//!
//! USER: Next interaction...
//! MODEL: ...
//! ```
//!
//! Lines start with `USER:` or `MODEL:`; an unprefixed line continues the
//! previous turn; a blank line ends an interaction. Turns alternate,
//! starting with the user and ending with the model.

use crate::error::{Error, Result};
use crate::model::Speaker;

pub const USER_PREFIX: &str = "USER:";
pub const MODEL_PREFIX: &str = "MODEL:";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedTurn {
    pub speaker: Speaker,
    pub text: String,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

struct Builder {
    interactions: Vec<Vec<ParsedTurn>>,
    current: Vec<ParsedTurn>,
    last_turn_line: usize,
}

impl Builder {
    fn close(&mut self) -> Result<()> {
        if self.current.is_empty() {
            return Ok(());
        }
        if self.current.len() % 2 == 1 {
            return Err(err(
                self.last_turn_line,
                1,
                "interaction ends with a USER turn that has no MODEL reply",
            ));
        }
        self.interactions.push(std::mem::take(&mut self.current));
        Ok(())
    }
}

/// Parse a transcript document into interactions.
pub fn parse_transcripts(doc: &str) -> Result<Vec<Vec<ParsedTurn>>> {
    let doc = doc.strip_prefix('\u{feff}').unwrap_or(doc);
    let mut b = Builder {
        interactions: Vec::new(),
        current: Vec::new(),
        last_turn_line: 0,
    };
    for (idx, raw) in doc.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            b.close()?;
            continue;
        }
        let tagged = if let Some(rest) = line.strip_prefix(USER_PREFIX) {
            Some((Speaker::User, rest))
        } else {
            line.strip_prefix(MODEL_PREFIX).map(|rest| (Speaker::Model, rest))
        };
        match tagged {
            Some((speaker, rest)) => {
                let expected = if b.current.len() % 2 == 0 {
                    Speaker::User
                } else {
                    Speaker::Model
                };
                if speaker != expected {
                    let msg = if b.current.is_empty() {
                        "interaction must start with a USER turn".to_owned()
                    } else {
                        format!("expected a {expected:?} turn; turns must alternate")
                    };
                    return Err(err(line_no, 1, msg));
                }
                let text = rest.strip_prefix(' ').unwrap_or(rest);
                b.current.push(ParsedTurn {
                    speaker,
                    text: text.to_owned(),
                });
                b.last_turn_line = line_no;
            }
            None => match b.current.last_mut() {
                Some(turn) => {
                    turn.text.push('\n');
                    turn.text.push_str(line);
                }
                None => {
                    let column = line.chars().take_while(|c| c.is_whitespace()).count() + 1;
                    return Err(err(line_no, column, "expected `USER:` or `MODEL:`"));
                }
            },
        }
    }
    b.close()?;
    Ok(b.interactions)
}

/// Inverse of [`parse_transcripts`] for turns without blank lines.
pub fn render_transcripts(interactions: &[Vec<ParsedTurn>]) -> String {
    let mut out = String::new();
    for (i, turns) in interactions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for t in turns {
            let prefix = match t.speaker {
                Speaker::User => USER_PREFIX,
                Speaker::Model => MODEL_PREFIX,
            };
            out.push_str(prefix);
            out.push(' ');
            out.push_str(&t.text);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_two_interactions_with_continuations() {
        let doc = "USER: hi\nMODEL: hello\nsecond line\nUSER: more\nMODEL: ok\n\n\nUSER: b\r\nMODEL: c\r\n";
        let parsed = parse_transcripts(doc).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].len(), 4);
        assert_eq!(parsed[0][1].text, "hello\nsecond line");
        assert_eq!(parsed[1][1].text, "c");
    }

    #[test]
    fn model_first_is_rejected_with_position() {
        let e = parse_transcripts("\nMODEL: hi\nUSER: x\n").unwrap_err();
        match e {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (2, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn repeated_speaker_is_rejected() {
        assert!(parse_transcripts("USER: a\nUSER: b\n").is_err());
    }

    #[test]
    fn unanswered_user_turn_is_rejected() {
        let e = parse_transcripts("USER: a\nMODEL: b\nUSER: c\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn stray_text_reports_column() {
        let e = parse_transcripts("   hello\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, column: 4, .. }));
    }

    #[test]
    fn empty_document_has_no_interactions() {
        assert!(parse_transcripts("").unwrap().is_empty());
        assert!(parse_transcripts("\n\n").unwrap().is_empty());
    }

    fn turn_text() -> impl Strategy<Value = String> {
        // Non-blank lines that cannot be mistaken for a speaker prefix.
        proptest::collection::vec("[a-z0-9 ,.?]{0,12}[a-z0-9]", 1..3)
            .prop_map(|lines| lines.join("\n"))
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(
            pairs in proptest::collection::vec(
                proptest::collection::vec((turn_text(), turn_text()), 1..3), 0..4)
        ) {
            let interactions: Vec<Vec<ParsedTurn>> = pairs
                .into_iter()
                .map(|exchanges| exchanges.into_iter().flat_map(|(u, m)| [
                    ParsedTurn { speaker: Speaker::User, text: u },
                    ParsedTurn { speaker: Speaker::Model, text: m },
                ]).collect())
                .collect();
            let doc = render_transcripts(&interactions);
            prop_assert_eq!(parse_transcripts(&doc).unwrap(), interactions);
        }
    }
}
