//! Line-oriented tokenizer shared by every text grammar in the crate.

use crate::error::{Error, Pos, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub pos: Pos,
}

/// Splits one line into tokens. Brackets and parentheses are always tokens of
/// their own; everything else is whitespace separated. A `#` starts a comment.
pub fn tokenize_line(line: &str, line_no: usize) -> Vec<Token> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0usize;
    for (idx, ch) in line.chars().enumerate() {
        let col = idx + 1;
        if ch == '#' {
            break;
        }
        if ch.is_whitespace() || matches!(ch, '(' | ')' | '[' | ']') {
            if !cur.is_empty() {
                out.push(Token {
                    text: std::mem::take(&mut cur),
                    pos: Pos {
                        line: line_no,
                        col: start,
                    },
                });
            }
            if !ch.is_whitespace() {
                out.push(Token {
                    text: ch.to_string(),
                    pos: Pos {
                        line: line_no,
                        col,
                    },
                });
            }
        } else {
            if cur.is_empty() {
                start = col;
            }
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push(Token {
            text: cur,
            pos: Pos {
                line: line_no,
                col: start,
            },
        });
    }
    out
}

/// Cursor over the tokens of a single line.
#[derive(Debug)]
pub struct Cursor {
    toks: Vec<Token>,
    at: usize,
    end: Pos,
}

impl Cursor {
    pub fn new(line: &str, line_no: usize) -> Self {
        let toks = tokenize_line(line, line_no);
        let end = Pos {
            line: line_no,
            col: line.chars().count() + 1,
        };
        Cursor { toks, at: 0, end }
    }

    pub fn from_tokens(toks: Vec<Token>, end: Pos) -> Self {
        Cursor { toks, at: 0, end }
    }

    pub fn peek(&self) -> Option<&Token> {
        self.toks.get(self.at)
    }

    pub fn peek_text(&self) -> Option<&str> {
        self.peek().map(|t| t.text.as_str())
    }

    pub fn pos(&self) -> Pos {
        self.peek().map(|t| t.pos).unwrap_or(self.end)
    }

    pub fn is_done(&self) -> bool {
        self.at >= self.toks.len()
    }

    pub fn next(&mut self) -> Result<Token> {
        match self.toks.get(self.at) {
            Some(t) => {
                self.at += 1;
                Ok(t.clone())
            }
            None => Err(Error::parse(self.end, "unexpected end of input")),
        }
    }

    pub fn expect(&mut self, word: &str) -> Result<Token> {
        let pos = self.pos();
        let tok = self.next()?;
        if tok.text == word {
            Ok(tok)
        } else {
            Err(Error::parse(
                pos,
                format!("expected `{word}`, found `{}`", tok.text),
            ))
        }
    }

    pub fn next_int<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let tok = self.next()?;
        tok.text
            .parse()
            .map_err(|_| Error::parse(tok.pos, format!("expected {what}, found `{}`", tok.text)))
    }

    pub fn rest_texts(mut self) -> Vec<String> {
        let mut out = Vec::new();
        while let Ok(t) = self.next() {
            out.push(t.text);
        }
        out
    }

    pub fn finish(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(Error::parse(
                t.pos,
                format!("unexpected trailing token `{}`", t.text),
            )),
        }
    }
}

/// Non-blank, non-comment lines with their 1-based line numbers.
pub fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let body = l.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            None
        } else {
            Some((i + 1, l))
        }
    })
}
