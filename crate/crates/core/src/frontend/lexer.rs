use std::fmt;

use crate::error::LexError;

/// Location of a token in source text. Lines and columns are 1-based,
/// byte offsets 0-based and half-open.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub line: usize,
    pub column: usize,
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span {
            end: other.end,
            ..self
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Str(String),
    Keyword(Keyword),
    Symbol(Symbol),
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keyword {
    Def,
    Return,
    If,
    Else,
    For,
    In,
    And,
    Or,
    Not,
    True,
    False,
}

impl Keyword {
    fn from_word(word: &str) -> Option<Keyword> {
        Some(match word {
            "def" => Keyword::Def,
            "return" => Keyword::Return,
            "if" => Keyword::If,
            "else" => Keyword::Else,
            "for" => Keyword::For,
            "in" => Keyword::In,
            "and" => Keyword::And,
            "or" => Keyword::Or,
            "not" => Keyword::Not,
            "True" => Keyword::True,
            "False" => Keyword::False,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Def => "def",
            Keyword::Return => "return",
            Keyword::If => "if",
            Keyword::Else => "else",
            Keyword::For => "for",
            Keyword::In => "in",
            Keyword::And => "and",
            Keyword::Or => "or",
            Keyword::Not => "not",
            Keyword::True => "True",
            Keyword::False => "False",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symbol {
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
}

impl Symbol {
    pub fn as_str(self) -> &'static str {
        match self {
            Symbol::LParen => "(",
            Symbol::RParen => ")",
            Symbol::LBracket => "[",
            Symbol::RBracket => "]",
            Symbol::LBrace => "{",
            Symbol::RBrace => "}",
            Symbol::Comma => ",",
            Symbol::Semi => ";",
            Symbol::Assign => "=",
            Symbol::EqEq => "==",
            Symbol::NotEq => "!=",
            Symbol::Lt => "<",
            Symbol::Le => "<=",
            Symbol::Gt => ">",
            Symbol::Ge => ">=",
            Symbol::Plus => "+",
            Symbol::Minus => "-",
            Symbol::Star => "*",
            Symbol::Slash => "/",
            Symbol::Percent => "%",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(name) => write!(f, "identifier `{name}`"),
            TokenKind::Number(x) => write!(f, "number {x}"),
            TokenKind::Str(s) => write!(f, "string {s:?}"),
            TokenKind::Keyword(k) => write!(f, "`{}`", k.as_str()),
            TokenKind::Symbol(s) => write!(f, "`{}`", s.as_str()),
            TokenKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceToken {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

struct Cursor<'a> {
    source: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.source[self.pos..].chars().next()
    }

    fn peek_second(&self) -> Option<char> {
        let mut chars = self.source[self.pos..].chars();
        chars.next();
        chars.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn here(&self) -> Span {
        Span {
            line: self.line,
            column: self.column,
            start: self.pos,
            end: self.pos,
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Splits source text into tokens, ending with an [`TokenKind::Eof`] token.
pub fn tokenize(source: &str) -> Result<Vec<SourceToken>, LexError> {
    let mut cur = Cursor {
        source,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '#' {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let start = cur.here();
        let Some(c) = cur.bump() else {
            tokens.push(SourceToken {
                kind: TokenKind::Eof,
                text: String::new(),
                span: start,
            });
            return Ok(tokens);
        };
        let kind = if is_ident_start(c) {
            while cur.peek().is_some_and(is_ident_continue) {
                cur.bump();
            }
            let word = &source[start.start..cur.pos];
            match Keyword::from_word(word) {
                Some(k) => TokenKind::Keyword(k),
                None => TokenKind::Ident(word.to_string()),
            }
        } else if c.is_ascii_digit() || (c == '.' && cur.peek().is_some_and(|d| d.is_ascii_digit()))
        {
            while cur.peek().is_some_and(|d| d.is_ascii_digit()) {
                cur.bump();
            }
            if cur.peek() == Some('.') && cur.peek_second().is_some_and(|d| d.is_ascii_digit()) {
                cur.bump();
                while cur.peek().is_some_and(|d| d.is_ascii_digit()) {
                    cur.bump();
                }
            }
            let text = &source[start.start..cur.pos];
            TokenKind::Number(text.parse().map_err(|_| LexError {
                message: format!("malformed number `{text}`"),
                span: Span {
                    end: cur.pos,
                    ..start
                },
            })?)
        } else if c == '"' || c == '\'' {
            lex_string(&mut cur, c, start)?
        } else {
            let two = |cur: &mut Cursor, next: char, yes: Symbol, no: Symbol| {
                if cur.peek() == Some(next) {
                    cur.bump();
                    yes
                } else {
                    no
                }
            };
            TokenKind::Symbol(match c {
                '(' => Symbol::LParen,
                ')' => Symbol::RParen,
                '[' => Symbol::LBracket,
                ']' => Symbol::RBracket,
                '{' => Symbol::LBrace,
                '}' => Symbol::RBrace,
                ',' => Symbol::Comma,
                ';' => Symbol::Semi,
                '+' => Symbol::Plus,
                '-' => Symbol::Minus,
                '*' => Symbol::Star,
                '/' => Symbol::Slash,
                '%' => Symbol::Percent,
                '=' => two(&mut cur, '=', Symbol::EqEq, Symbol::Assign),
                '<' => two(&mut cur, '=', Symbol::Le, Symbol::Lt),
                '>' => two(&mut cur, '=', Symbol::Ge, Symbol::Gt),
                '!' if cur.peek() == Some('=') => {
                    cur.bump();
                    Symbol::NotEq
                }
                other => {
                    return Err(LexError {
                        message: format!("unexpected character {other:?}"),
                        span: Span {
                            end: cur.pos,
                            ..start
                        },
                    })
                }
            })
        };
        let span = Span {
            end: cur.pos,
            ..start
        };
        tokens.push(SourceToken {
            kind,
            text: source[span.start..span.end].to_string(),
            span,
        });
    }
}

fn lex_string(cur: &mut Cursor, quote: char, start: Span) -> Result<TokenKind, LexError> {
    let mut value = String::new();
    loop {
        match cur.bump() {
            None | Some('\n') => {
                return Err(LexError {
                    message: "unterminated string literal".into(),
                    span: Span {
                        end: cur.pos,
                        ..start
                    },
                })
            }
            Some('\\') => match cur.bump() {
                Some(c @ ('\\' | '"' | '\'')) => value.push(c),
                Some('n') => value.push('\n'),
                Some('t') => value.push('\t'),
                _ => {
                    return Err(LexError {
                        message: "unknown escape sequence".into(),
                        span: Span {
                            end: cur.pos,
                            ..start
                        },
                    })
                }
            },
            Some(c) if c == quote => return Ok(TokenKind::Str(value)),
            Some(c) => value.push(c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn keyword_argument_statement() {
        let toks = tokenize("hist = selector_width(same_tok, assume_bos = True);").unwrap();
        assert_eq!(toks.len(), 12);
        assert_eq!(toks[10].kind, TokenKind::Symbol(Symbol::Semi));
        assert_eq!(toks[11].kind, TokenKind::Eof);
    }

    #[test]
    fn comments_are_stripped() {
        assert_eq!(
            kinds("# comment\nx = 1;"),
            vec![
                TokenKind::Ident("x".into()),
                TokenKind::Symbol(Symbol::Assign),
                TokenKind::Number(1.0),
                TokenKind::Symbol(Symbol::Semi),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn string_literals_and_escapes() {
        let k = kinds(r#"pairs = ["()","{}"]; q = "a\"b\\";"#);
        assert!(k.contains(&TokenKind::Str("()".into())));
        assert!(k.contains(&TokenKind::Str("{}".into())));
        assert!(k.contains(&TokenKind::Str("a\"b\\".into())));
        assert!(kinds("x = \"§\";").contains(&TokenKind::Str("§".into())));
    }

    #[test]
    fn two_character_symbols() {
        assert_eq!(
            kinds("<= >= == != < > ="),
            [
                Symbol::Le,
                Symbol::Ge,
                Symbol::EqEq,
                Symbol::NotEq,
                Symbol::Lt,
                Symbol::Gt,
                Symbol::Assign
            ]
            .into_iter()
            .map(TokenKind::Symbol)
            .chain([TokenKind::Eof])
            .collect::<Vec<_>>()
        );
    }

    #[test]
    fn spans_track_lines_and_columns() {
        let toks = tokenize("a =\n  bb;").unwrap();
        assert_eq!((toks[2].span.line, toks[2].span.column), (2, 3));
        assert_eq!(toks[2].text, "bb");
        for pair in toks.windows(2) {
            assert!(pair[0].span.end <= pair[1].span.start);
        }
    }

    #[test]
    fn lex_errors() {
        let err = tokenize("x = \"abc").unwrap_err();
        assert!(err.message.contains("unterminated"));
        let err = tokenize("x = 1 @ 2;").unwrap_err();
        assert_eq!(err.span.column, 7);
    }
}
