//! Lenient value and indirect-object parsing on top of the lexer.

use super::lexer::{find, is_whitespace, Lexer, Token};
use super::object::{Dictionary, ObjectId, PdfString, PdfValue, Stream, StringForm};
use super::{IndirectObject, ParseWarning};

/// Containers nested deeper than this are replaced by `Null`.
pub const MAX_NESTING: usize = 64;

/// Keywords that always terminate the value being parsed.
const STOP_KEYWORDS: [&[u8]; 7] = [
    b"endobj",
    b"stream",
    b"endstream",
    b"xref",
    b"trailer",
    b"startxref",
    b"obj",
];

pub(crate) struct ValueParser<'a, 'w> {
    pub(crate) lex: Lexer<'a>,
    warnings: &'w mut Vec<ParseWarning>,
    truncated_nesting: bool,
}

enum Next {
    Value(PdfValue),
    /// A token that cannot start a value and must not be consumed.
    Stop,
    /// A token that cannot start a value; it has been consumed.
    Junk(usize),
    Eof,
}

impl<'a, 'w> ValueParser<'a, 'w> {
    pub(crate) fn new(lex: Lexer<'a>, warnings: &'w mut Vec<ParseWarning>) -> Self {
        ValueParser {
            lex,
            warnings,
            truncated_nesting: false,
        }
    }

    fn warn(&mut self, offset: usize, message: impl Into<String>) {
        self.warnings.push(ParseWarning {
            offset,
            message: message.into(),
        });
    }

    /// Parses one value; returns `None` (without consuming anything) if the
    /// next token cannot start a value.
    pub(crate) fn parse_value(&mut self) -> Option<PdfValue> {
        let saved = self.lex;
        match self.next_value(0) {
            Next::Value(v) => Some(v),
            _ => {
                self.lex = saved;
                None
            }
        }
    }

    fn is_object_header_ahead(&self) -> bool {
        let mut probe = self.lex;
        matches!(probe.next_token(), Some((_, Token::Integer(_))))
            && matches!(probe.next_token(), Some((_, Token::Integer(_))))
            && matches!(probe.next_token(), Some((_, t)) if t.is_keyword(b"obj"))
    }

    fn next_value(&mut self, depth: usize) -> Next {
        if self.is_object_header_ahead() {
            return Next::Stop;
        }
        let before = self.lex;
        let Some((offset, token)) = self.lex.next_token() else {
            return Next::Eof;
        };
        match token {
            Token::Integer(first) => Next::Value(self.integer_or_reference(offset, first)),
            Token::Real(v) => Next::Value(PdfValue::Number(v)),
            Token::Name(n) => Next::Value(PdfValue::Name(n)),
            Token::LiteralString { bytes, closed } => {
                if !closed {
                    self.warn(offset, "unterminated literal string");
                }
                Next::Value(PdfValue::String(PdfString {
                    bytes,
                    form: StringForm::Literal,
                }))
            }
            Token::HexString { bytes, closed } => {
                if !closed {
                    self.warn(offset, "unterminated hex string");
                }
                Next::Value(PdfValue::String(PdfString {
                    bytes,
                    form: StringForm::Hex,
                }))
            }
            Token::ArrayOpen | Token::DictOpen if depth >= MAX_NESTING => {
                self.lex = before;
                self.skip_balanced();
                if !self.truncated_nesting {
                    self.truncated_nesting = true;
                    self.warn(
                        offset,
                        format!("nesting deeper than {MAX_NESTING} levels truncated"),
                    );
                }
                Next::Value(PdfValue::Null)
            }
            Token::ArrayOpen => Next::Value(self.array(offset, depth + 1)),
            Token::DictOpen => Next::Value(self.dictionary(offset, depth + 1)),
            Token::Keyword(b"true") => Next::Value(PdfValue::Boolean(true)),
            Token::Keyword(b"false") => Next::Value(PdfValue::Boolean(false)),
            Token::Keyword(b"null") => Next::Value(PdfValue::Null),
            Token::Keyword(k) if STOP_KEYWORDS.contains(&k) => {
                self.lex = before;
                Next::Stop
            }
            Token::ArrayClose | Token::DictClose => {
                self.lex = before;
                Next::Stop
            }
            _ => Next::Junk(offset),
        }
    }

    fn integer_or_reference(&mut self, offset: usize, first: i64) -> PdfValue {
        let mut probe = self.lex;
        if let (Some((_, Token::Integer(gen))), Some((_, r))) = (probe.next_token(), probe.next_token()) {
            if r.is_keyword(b"R") {
                self.lex = probe;
                return match (u32::try_from(first), u32::try_from(gen)) {
                    (Ok(number), Ok(generation)) if number > 0 => {
                        PdfValue::Reference(ObjectId::new(number, generation))
                    }
                    _ => {
                        self.warn(offset, format!("invalid reference {first} {gen} R"));
                        PdfValue::Null
                    }
                };
            }
        }
        PdfValue::Number(first as f64)
    }

    fn array(&mut self, offset: usize, depth: usize) -> PdfValue {
        let mut items = Vec::new();
        loop {
            if let Some((_, Token::ArrayClose)) = self.lex.peek() {
                self.lex.next_token();
                break;
            }
            match self.next_value(depth) {
                Next::Value(v) => items.push(v),
                Next::Junk(at) => self.warn(at, "unexpected token in array"),
                Next::Stop => {
                    self.warn(offset, "array not terminated");
                    break;
                }
                Next::Eof => {
                    self.warn(offset, "array not terminated before end of file");
                    break;
                }
            }
        }
        PdfValue::Array(items)
    }

    fn dictionary(&mut self, offset: usize, depth: usize) -> PdfValue {
        let mut dict = Dictionary::new();
        loop {
            if let Some((_, Token::DictClose)) = self.lex.peek() {
                self.lex.next_token();
                break;
            }
            if let Some((_, Token::Name(_))) = self.lex.peek() {
                let Some((_, Token::Name(key))) = self.lex.next_token() else {
                    unreachable!("peeked a name");
                };
                match self.next_value(depth) {
                    Next::Value(v) => dict.insert(key, v),
                    Next::Junk(at) => {
                        self.warn(at, format!("invalid value for key /{key}"));
                        dict.insert(key, PdfValue::Null);
                    }
                    Next::Stop | Next::Eof => {
                        // A closing `>>` right after a key is a missing value.
                        let closes = matches!(self.lex.peek(), Some((_, Token::DictClose)));
                        self.warn(offset, format!("missing value for key /{key}"));
                        dict.insert(key, PdfValue::Null);
                        if !closes {
                            break;
                        }
                    }
                }
                continue;
            }
            match self.next_value(depth) {
                Next::Value(_) | Next::Junk(_) => {
                    self.warn(self.lex.pos(), "dictionary key is not a name");
                }
                Next::Stop => {
                    self.warn(offset, "dictionary not terminated");
                    break;
                }
                Next::Eof => {
                    self.warn(offset, "dictionary not terminated before end of file");
                    break;
                }
            }
        }
        PdfValue::Dictionary(dict)
    }

    /// Skips one container and everything nested in it.
    fn skip_balanced(&mut self) {
        let mut open = 0usize;
        loop {
            let before = self.lex;
            let Some((_, tok)) = self.lex.next_token() else {
                return;
            };
            match tok {
                Token::ArrayOpen | Token::DictOpen => open += 1,
                Token::ArrayClose | Token::DictClose => {
                    open = open.saturating_sub(1);
                    if open == 0 {
                        return;
                    }
                }
                Token::Keyword(k) if STOP_KEYWORDS.contains(&k) => {
                    self.lex = before;
                    return;
                }
                _ => {}
            }
        }
    }
}

/// Parses the object whose header `N G obj` ends at the lexer position.
///
/// On return the lexer sits after `endobj`, or at the token that ended the
/// object when `endobj` is missing.
pub(crate) fn parse_object_body(
    lex: &mut Lexer<'_>,
    id: ObjectId,
    byte_offset: usize,
    warnings: &mut Vec<ParseWarning>,
) -> IndirectObject {
    let mut parser = ValueParser::new(*lex, warnings);
    let mut value = parser.parse_value().unwrap_or(PdfValue::Null);
    *lex = parser.lex;

    if let Some((at, tok)) = lex.peek() {
        if tok.is_keyword(b"stream") {
            lex.next_token();
            let span = skip_stream_body(lex, value.as_dict(), at, warnings);
            match value {
                PdfValue::Dictionary(dict) => {
                    if dict.has_type("ObjStm") {
                        warnings.push(ParseWarning {
                            offset: byte_offset,
                            message: format!("object stream {} not expanded", id.number),
                        });
                    }
                    value = PdfValue::Stream(Stream { dict, span });
                }
                _ => warnings.push(ParseWarning {
                    offset: at,
                    message: "stream without a dictionary".into(),
                }),
            }
        }
    }

    match lex.peek() {
        Some((_, tok)) if tok.is_keyword(b"endobj") => {
            lex.next_token();
        }
        _ => warnings.push(ParseWarning {
            offset: byte_offset,
            message: format!("object {} {} has no endobj", id.number, id.generation),
        }),
    }

    IndirectObject {
        id,
        value,
        byte_offset,
    }
}

/// Skips raw stream data following the `stream` keyword and the `endstream`
/// marker, returning the data span.
fn skip_stream_body(
    lex: &mut Lexer<'_>,
    dict: Option<&Dictionary>,
    keyword_offset: usize,
    warnings: &mut Vec<ParseWarning>,
) -> std::ops::Range<usize> {
    let data = lex.data();
    let mut start = lex.pos();
    if data.get(start) == Some(&b'\r') {
        start += 1;
    }
    if data.get(start) == Some(&b'\n') {
        start += 1;
    }

    let direct_length = dict.and_then(|d| d.get("Length")).and_then(PdfValue::as_count);
    if let Some(len) = direct_length {
        let end = usize::try_from(len).ok().and_then(|l| start.checked_add(l));
        if let Some(end) = end.filter(|&e| e <= data.len()) {
            let mut after = end;
            while after < data.len() && is_whitespace(data[after]) {
                after += 1;
            }
            if data[after..].starts_with(b"endstream") {
                lex.set_pos(after + b"endstream".len());
                return start..end;
            }
        }
        warnings.push(ParseWarning {
            offset: keyword_offset,
            message: format!("stream /Length {len} does not match endstream"),
        });
    }

    match find(data, b"endstream", start) {
        Some(marker) => {
            let mut end = marker;
            if end > start && data[end - 1] == b'\n' {
                end -= 1;
            }
            if end > start && data[end - 1] == b'\r' {
                end -= 1;
            }
            lex.set_pos(marker + b"endstream".len());
            start..end
        }
        None => {
            warnings.push(ParseWarning {
                offset: keyword_offset,
                message: "stream has no endstream".into(),
            });
            lex.set_pos(data.len());
            start..data.len()
        }
    }
}
