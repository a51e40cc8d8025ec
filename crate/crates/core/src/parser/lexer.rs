//! Byte-level tokenizer for PDF syntax.
//!
//! The lexer is a cursor over the file bytes and is `Copy`, so callers can
//! look ahead by cloning it and simply discarding the clone.

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Token<'a> {
    Integer(i64),
    Real(f64),
    Name(String),
    LiteralString { bytes: Vec<u8>, closed: bool },
    HexString { bytes: Vec<u8>, closed: bool },
    ArrayOpen,
    ArrayClose,
    DictOpen,
    DictClose,
    Keyword(&'a [u8]),
}

impl Token<'_> {
    pub(crate) fn is_keyword(&self, kw: &[u8]) -> bool {
        matches!(self, Token::Keyword(k) if *k == kw)
    }
}

pub(crate) fn is_whitespace(b: u8) -> bool {
    matches!(b, b'\0' | b'\t' | b'\n' | b'\x0c' | b'\r' | b' ')
}

pub(crate) fn is_delimiter(b: u8) -> bool {
    matches!(
        b,
        b'(' | b')' | b'<' | b'>' | b'[' | b']' | b'{' | b'}' | b'/' | b'%'
    )
}

fn is_regular(b: u8) -> bool {
    !is_whitespace(b) && !is_delimiter(b)
}

fn hex_value(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Lexer<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    pub(crate) fn new(data: &'a [u8], pos: usize) -> Self {
        Lexer {
            data,
            pos: pos.min(data.len()),
        }
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    pub(crate) fn set_pos(&mut self, pos: usize) {
        self.pos = pos.min(self.data.len());
    }

    pub(crate) fn data(&self) -> &'a [u8] {
        self.data
    }

    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            if is_whitespace(b) {
                self.pos += 1;
            } else if b == b'%' {
                while self.pos < self.data.len()
                    && self.data[self.pos] != b'\n'
                    && self.data[self.pos] != b'\r'
                {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    pub(crate) fn peek(&self) -> Option<(usize, Token<'a>)> {
        let mut probe = *self;
        probe.next_token()
    }

    /// Full tokenization: strings, hex strings and names are decoded.
    pub(crate) fn next_token(&mut self) -> Option<(usize, Token<'a>)> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        let b = *self.data.get(start)?;
        let token = match b {
            b'[' => {
                self.pos += 1;
                Token::ArrayOpen
            }
            b']' => {
                self.pos += 1;
                Token::ArrayClose
            }
            b'<' if self.data.get(start + 1) == Some(&b'<') => {
                self.pos += 2;
                Token::DictOpen
            }
            b'>' if self.data.get(start + 1) == Some(&b'>') => {
                self.pos += 2;
                Token::DictClose
            }
            b'<' => self.lex_hex_string(),
            b'(' => self.lex_literal_string(),
            b'/' => self.lex_name(),
            b')' | b'>' | b'{' | b'}' => {
                self.pos += 1;
                Token::Keyword(&self.data[start..start + 1])
            }
            _ => self.lex_regular(),
        };
        Some((start, token))
    }

    /// Coarse tokenization used when scanning the file body between objects.
    ///
    /// Delimiters are returned as one-byte keywords instead of opening strings,
    /// so stray parentheses in binary junk cannot swallow the objects after them.
    pub(crate) fn next_coarse_token(&mut self) -> Option<(usize, Token<'a>)> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        let b = *self.data.get(start)?;
        if is_delimiter(b) {
            self.pos += 1;
            return Some((start, Token::Keyword(&self.data[start..start + 1])));
        }
        Some((start, self.lex_regular()))
    }

    fn lex_regular(&mut self) -> Token<'a> {
        let start = self.pos;
        while self.pos < self.data.len() && is_regular(self.data[self.pos]) {
            self.pos += 1;
        }
        let word = &self.data[start..self.pos];
        parse_number(word).unwrap_or(Token::Keyword(word))
    }

    fn lex_name(&mut self) -> Token<'a> {
        self.pos += 1;
        let mut out = Vec::new();
        while self.pos < self.data.len() && is_regular(self.data[self.pos]) {
            let b = self.data[self.pos];
            if b == b'#' {
                let hi = self.data.get(self.pos + 1).copied().and_then(hex_value);
                let lo = self.data.get(self.pos + 2).copied().and_then(hex_value);
                if let (Some(hi), Some(lo)) = (hi, lo) {
                    out.push(hi << 4 | lo);
                    self.pos += 3;
                    continue;
                }
            }
            out.push(b);
            self.pos += 1;
        }
        Token::Name(String::from_utf8_lossy(&out).into_owned())
    }

    fn lex_hex_string(&mut self) -> Token<'a> {
        self.pos += 1;
        let mut out = Vec::new();
        let mut pending: Option<u8> = None;
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            self.pos += 1;
            if b == b'>' {
                if let Some(hi) = pending {
                    out.push(hi << 4);
                }
                return Token::HexString {
                    bytes: out,
                    closed: true,
                };
            }
            if let Some(v) = hex_value(b) {
                match pending.take() {
                    Some(hi) => out.push(hi << 4 | v),
                    None => pending = Some(v),
                }
            }
        }
        if let Some(hi) = pending {
            out.push(hi << 4);
        }
        Token::HexString {
            bytes: out,
            closed: false,
        }
    }

    fn lex_literal_string(&mut self) -> Token<'a> {
        self.pos += 1;
        let mut out = Vec::new();
        let mut depth = 1usize;
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            self.pos += 1;
            match b {
                b'(' => {
                    depth += 1;
                    out.push(b);
                }
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Token::LiteralString {
                            bytes: out,
                            closed: true,
                        };
                    }
                    out.push(b);
                }
                b'\\' => self.lex_escape(&mut out),
                _ => out.push(b),
            }
        }
        Token::LiteralString {
            bytes: out,
            closed: false,
        }
    }

    fn lex_escape(&mut self, out: &mut Vec<u8>) {
        let Some(&e) = self.data.get(self.pos) else {
            return;
        };
        self.pos += 1;
        match e {
            b'n' => out.push(b'\n'),
            b'r' => out.push(b'\r'),
            b't' => out.push(b'\t'),
            b'b' => out.push(0x08),
            b'f' => out.push(0x0c),
            b'\r' => {
                if self.data.get(self.pos) == Some(&b'\n') {
                    self.pos += 1;
                }
            }
            b'\n' => {}
            b'0'..=b'7' => {
                let mut value = u32::from(e - b'0');
                for _ in 0..2 {
                    match self.data.get(self.pos) {
                        Some(&d @ b'0'..=b'7') => {
                            value = value * 8 + u32::from(d - b'0');
                            self.pos += 1;
                        }
                        _ => break,
                    }
                }
                out.push((value & 0xff) as u8);
            }
            other => out.push(other),
        }
    }
}

fn parse_number(word: &[u8]) -> Option<Token<'static>> {
    let digits = match word.first()? {
        b'+' | b'-' => &word[1..],
        _ => word,
    };
    if digits.is_empty() {
        return None;
    }
    let mut seen_dot = false;
    let mut seen_digit = false;
    for &b in digits {
        match b {
            b'0'..=b'9' => seen_digit = true,
            b'.' if !seen_dot => seen_dot = true,
            _ => return None,
        }
    }
    if !seen_digit {
        return None;
    }
    // Every byte is ASCII at this point.
    let text = std::str::from_utf8(word).ok()?;
    if !seen_dot {
        if let Ok(v) = text.parse::<i64>() {
            return Some(Token::Integer(v));
        }
    }
    let text = text.strip_prefix('+').unwrap_or(text);
    let normalized;
    let text = if text.ends_with('.') {
        normalized = format!("{text}0");
        normalized.as_str()
    } else {
        text
    };
    text.parse::<f64>().ok().map(Token::Real)
}

/// Finds `needle` in `haystack` starting at `from`.
pub(crate) fn find(haystack: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    if needle.is_empty() || from >= haystack.len() {
        return None;
    }
    haystack[from..]
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|p| p + from)
}

/// Finds the last occurrence of `needle` in `haystack`.
pub(crate) fn rfind(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return None;
    }
    haystack.windows(needle.len()).rposition(|w| w == needle)
}
