//! Lenient PDF object parser.
//!
//! Every indirect object in the file is recovered by a linear scan for
//! `N G obj` headers; a classic cross-reference table, when present and
//! intact, supplies the trailer chain and is cross-checked against the scan.
//! Stream bodies are never decoded.

mod lexer;
mod object;
mod syntax;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use lexer::{rfind, Lexer, Token};
pub use object::{extract_references, Dictionary, ObjectId, PdfString, PdfValue, Stream, StringForm};
pub use syntax::MAX_NESTING;

/// The header must start within this many bytes of the file start.
pub const HEADER_WINDOW: usize = 1024;

const MAX_XREF_SECTIONS: usize = 256;

static NULL: PdfValue = PdfValue::Null;

#[derive(Debug, Clone, PartialEq)]
pub struct IndirectObject {
    pub id: ObjectId,
    pub value: PdfValue,
    pub byte_offset: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trailer {
    pub dictionary: Dictionary,
    pub root: Option<ObjectId>,
    pub prev_offset: Option<u64>,
    pub size: Option<u64>,
}

impl Trailer {
    pub fn from_dictionary(dictionary: Dictionary) -> Self {
        let root = dictionary.get("Root").and_then(PdfValue::as_reference);
        let prev_offset = dictionary.get("Prev").and_then(PdfValue::as_count);
        let size = dictionary.get("Size").and_then(PdfValue::as_count);
        Trailer {
            dictionary,
            root,
            prev_offset,
            size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XrefSource {
    ClassicTable,
    LinearScanFallback,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WARN {} {}", self.offset, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostics {
    pub xref_used: XrefSource,
    pub warnings: Vec<ParseWarning>,
    pub object_count: usize,
    pub trailer_count: usize,
}

impl ParseDiagnostics {
    fn empty() -> Self {
        ParseDiagnostics {
            xref_used: XrefSource::LinearScanFallback,
            warnings: Vec::new(),
            object_count: 0,
            trailer_count: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("no %PDF- header in the first {HEADER_WINDOW} bytes")]
    NoHeader(ParseDiagnostics),
    #[error("no indirect objects recovered")]
    NoObjects(ParseDiagnostics),
}

impl ParseError {
    pub fn diagnostics(&self) -> &ParseDiagnostics {
        match self {
            ParseError::NoHeader(d) | ParseError::NoObjects(d) => d,
        }
    }
}

/// A parsed PDF file. Immutable once built.
#[derive(Debug, Clone)]
pub struct PdfDocument {
    objects: Vec<IndirectObject>,
    trailers: Vec<Trailer>,
    diagnostics: ParseDiagnostics,
    latest: HashMap<u32, usize>,
}

impl PdfDocument {
    /// All recovered objects in file order, including superseded versions.
    pub fn objects(&self) -> &[IndirectObject] {
        &self.objects
    }

    /// Trailers, newest first.
    pub fn trailers(&self) -> &[Trailer] {
        &self.trailers
    }

    pub fn diagnostics(&self) -> &ParseDiagnostics {
        &self.diagnostics
    }

    /// Value of the latest version of object `id.number`, or `Null` when the
    /// object does not exist. Generation numbers are ignored.
    pub fn resolve(&self, id: ObjectId) -> &PdfValue {
        self.latest_object(id.number).map_or(&NULL, |o| &o.value)
    }

    pub fn latest_object(&self, number: u32) -> Option<&IndirectObject> {
        self.latest.get(&number).map(|&i| &self.objects[i])
    }

    /// Distinct object numbers, ascending.
    pub fn object_numbers(&self) -> BTreeSet<u32> {
        self.latest.keys().copied().collect()
    }

    /// Root of the object tree.
    ///
    /// Prefers the newest trailer `/Root` that names an existing object, then
    /// the lowest-numbered `/Type /Catalog` dictionary, then the lowest
    /// object number.
    pub fn locate_root(&self) -> ObjectId {
        if let Some(root) = self
            .trailers
            .iter()
            .filter_map(|t| t.root)
            .find(|r| self.latest.contains_key(&r.number))
        {
            return root;
        }
        let numbers = self.object_numbers();
        let catalog = numbers.iter().find_map(|&n| {
            let obj = self.latest_object(n)?;
            match &obj.value {
                PdfValue::Dictionary(d) if d.has_type("Catalog") => Some(obj.id),
                _ => None,
            }
        });
        catalog.unwrap_or_else(|| {
            let n = *numbers.first().expect("document has at least one object");
            self.latest_object(n).expect("indexed object").id
        })
    }
}

/// Parses a whole PDF file.
pub fn parse_document(bytes: &[u8]) -> Result<PdfDocument, ParseError> {
    let mut diagnostics = ParseDiagnostics::empty();
    let window = &bytes[..bytes.len().min(HEADER_WINDOW + 4)];
    if lexer::find(window, b"%PDF-", 0).is_none_or(|p| p >= HEADER_WINDOW) {
        return Err(ParseError::NoHeader(diagnostics));
    }

    let mut warnings = Vec::new();
    let scan = scan_body(bytes, &mut warnings);
    let mut objects = scan.objects;

    let chain = read_xref_chain(bytes, &mut warnings);
    let trailers = match chain {
        Some(sections) => {
            diagnostics.xref_used = XrefSource::ClassicTable;
            cross_check_xref(bytes, &sections, &mut objects, &mut warnings);
            sections
                .into_iter()
                .map(|s| Trailer::from_dictionary(s.trailer))
                .collect()
        }
        None => {
            warnings.push(ParseWarning {
                offset: 0,
                message: "no usable cross-reference table; objects recovered by linear scan".into(),
            });
            scan.trailers
                .into_iter()
                .rev()
                .map(Trailer::from_dictionary)
                .collect::<Vec<_>>()
        }
    };

    diagnostics.warnings = warnings;
    diagnostics.object_count = objects.len();
    diagnostics.trailer_count = trailers.len();
    if objects.is_empty() {
        return Err(ParseError::NoObjects(diagnostics));
    }

    let mut latest = HashMap::new();
    for (i, obj) in objects.iter().enumerate() {
        latest.insert(obj.id.number, i);
    }
    Ok(PdfDocument {
        objects,
        trailers,
        diagnostics,
        latest,
    })
}

struct ScanResult {
    objects: Vec<IndirectObject>,
    /// Trailer dictionaries in file order.
    trailers: Vec<Dictionary>,
}

/// Walks the file looking for `N G obj` headers and `trailer` dictionaries.
fn scan_body(bytes: &[u8], warnings: &mut Vec<ParseWarning>) -> ScanResult {
    let mut objects = Vec::new();
    let mut trailers = Vec::new();
    let mut lex = Lexer::new(bytes, 0);
    // The two tokens before the current one, if they were integers.
    let mut recent: [Option<(usize, i64)>; 2] = [None, None];

    while let Some((offset, tok)) = lex.next_coarse_token() {
        match tok {
            Token::Keyword(b"obj") => {
                if let [Some((at, number)), Some((_, generation))] = recent {
                    match (u32::try_from(number), u32::try_from(generation)) {
                        (Ok(n), Ok(g)) if n > 0 => {
                            let obj = syntax::parse_object_body(&mut lex, ObjectId::new(n, g), at, warnings);
                            objects.push(obj);
                        }
                        _ => warnings.push(ParseWarning {
                            offset: at,
                            message: format!("ignoring object header {number} {generation} obj"),
                        }),
                    }
                }
                recent = [None, None];
            }
            Token::Keyword(b"trailer") => {
                let mut parser = syntax::ValueParser::new(lex, warnings);
                match parser.parse_value() {
                    Some(PdfValue::Dictionary(d)) => {
                        lex = parser.lex;
                        trailers.push(d);
                    }
                    _ => {
                        lex = parser.lex;
                        warnings.push(ParseWarning {
                            offset,
                            message: "trailer keyword without a dictionary".into(),
                        });
                    }
                }
                recent = [None, None];
            }
            Token::Keyword(b"stream") => {
                // Orphan stream outside any object: skip its payload.
                let next = lexer::find(bytes, b"endstream", lex.pos()).map_or(bytes.len(), |p| p + 9);
                lex.set_pos(next);
                warnings.push(ParseWarning {
                    offset,
                    message: "stream outside of an object skipped".into(),
                });
                recent = [None, None];
            }
            Token::Integer(v) => recent = [recent[1], Some((offset, v))],
            _ => recent = [None, None],
        }
    }
    ScanResult { objects, trailers }
}

struct XrefSection {
    entries: Vec<XrefEntry>,
    trailer: Dictionary,
}

struct XrefEntry {
    number: u64,
    offset: u64,
    in_use: bool,
}

/// Reads the classic xref table named by the last `startxref` and follows
/// its `/Prev` chain. Returns `None` when the newest table is unusable.
fn read_xref_chain(bytes: &[u8], warnings: &mut Vec<ParseWarning>) -> Option<Vec<XrefSection>> {
    let startxref = rfind(bytes, b"startxref")?;
    let mut lex = Lexer::new(bytes, startxref + b"startxref".len());
    let first = match lex.next_token() {
        Some((_, Token::Integer(v))) => v,
        _ => {
            warnings.push(ParseWarning {
                offset: startxref,
                message: "startxref without an offset".into(),
            });
            return None;
        }
    };

    let mut sections: Vec<XrefSection> = Vec::new();
    let mut visited = BTreeSet::new();
    let mut next = Some(first);
    while let Some(offset) = next.take() {
        if sections.len() >= MAX_XREF_SECTIONS || !visited.insert(offset) {
            warnings.push(ParseWarning {
                offset: startxref,
                message: "cyclic or overlong /Prev chain".into(),
            });
            break;
        }
        match read_xref_section(bytes, offset, warnings) {
            Some(section) => {
                next = section
                    .trailer
                    .get("Prev")
                    .and_then(PdfValue::as_count)
                    .and_then(|p| i64::try_from(p).ok());
                sections.push(section);
            }
            None if sections.is_empty() => return None,
            None => {
                warnings.push(ParseWarning {
                    offset: offset.max(0) as usize,
                    message: "/Prev does not point to a cross-reference table".into(),
                });
            }
        }
    }
    Some(sections)
}

fn read_xref_section(bytes: &[u8], offset: i64, warnings: &mut Vec<ParseWarning>) -> Option<XrefSection> {
    let at = usize::try_from(offset).ok().filter(|&o| o < bytes.len());
    let Some(at) = at else {
        warnings.push(ParseWarning {
            offset: 0,
            message: format!("cross-reference offset {offset} out of range"),
        });
        return None;
    };
    let mut lex = Lexer::new(bytes, at);
    match lex.next_token() {
        Some((_, tok)) if tok.is_keyword(b"xref") => {}
        Some((_, Token::Integer(_))) => {
            warnings.push(ParseWarning {
                offset: at,
                message: "cross-reference stream not interpreted".into(),
            });
            return None;
        }
        _ => {
            warnings.push(ParseWarning {
                offset: at,
                message: "startxref does not point to an xref table".into(),
            });
            return None;
        }
    }

    let mut entries = Vec::new();
    loop {
        match lex.next_token() {
            Some((_, tok)) if tok.is_keyword(b"trailer") => break,
            Some((_, Token::Integer(start))) => {
                let Some((_, Token::Integer(count))) = lex.next_token() else {
                    return bad_table(at, warnings);
                };
                if start < 0 || count < 0 {
                    return bad_table(at, warnings);
                }
                for i in 0..count {
                    let (Some((_, Token::Integer(off))), Some((_, Token::Integer(_gen))), Some((_, kind))) =
                        (lex.next_token(), lex.next_token(), lex.next_token())
                    else {
                        return bad_table(at, warnings);
                    };
                    let in_use = match kind {
                        Token::Keyword(b"n") => true,
                        Token::Keyword(b"f") => false,
                        _ => return bad_table(at, warnings),
                    };
                    entries.push(XrefEntry {
                        number: (start as u64).saturating_add(i as u64),
                        offset: off.max(0) as u64,
                        in_use,
                    });
                }
            }
            _ => return bad_table(at, warnings),
        }
    }

    let mut parser = syntax::ValueParser::new(lex, warnings);
    match parser.parse_value() {
        Some(PdfValue::Dictionary(trailer)) => Some(XrefSection { entries, trailer }),
        _ => bad_table(at, warnings),
    }
}

fn bad_table<T>(at: usize, warnings: &mut Vec<ParseWarning>) -> Option<T> {
    warnings.push(ParseWarning {
        offset: at,
        message: "malformed cross-reference table".into(),
    });
    None
}

/// Checks in-use xref entries against the scanned objects, recovering
/// objects that only the table knows about.
fn cross_check_xref(
    bytes: &[u8],
    sections: &[XrefSection],
    objects: &mut Vec<IndirectObject>,
    warnings: &mut Vec<ParseWarning>,
) {
    let known: HashMap<usize, u32> = objects.iter().map(|o| (o.byte_offset, o.id.number)).collect();
    let mut recovered = Vec::new();
    let mut checked = BTreeSet::new();
    for entry in sections.iter().flat_map(|s| &s.entries) {
        if !entry.in_use || entry.number == 0 || !checked.insert((entry.number, entry.offset)) {
            continue;
        }
        let Ok(offset) = usize::try_from(entry.offset) else {
            continue;
        };
        if known.get(&offset).is_some_and(|&n| u64::from(n) == entry.number) {
            continue;
        }
        match object_at(bytes, offset, warnings) {
            Some(obj) if u64::from(obj.id.number) == entry.number && !known.contains_key(&offset) => {
                warnings.push(ParseWarning {
                    offset,
                    message: format!("object {} recovered through the xref table", entry.number),
                });
                recovered.push(obj);
            }
            _ => warnings.push(ParseWarning {
                offset,
                message: format!("xref entry for object {} has no matching object", entry.number),
            }),
        }
    }
    if !recovered.is_empty() {
        objects.extend(recovered);
        objects.sort_by_key(|o| o.byte_offset);
    }
}

fn object_at(bytes: &[u8], offset: usize, warnings: &mut Vec<ParseWarning>) -> Option<IndirectObject> {
    if offset >= bytes.len() {
        return None;
    }
    let mut lex = Lexer::new(bytes, offset);
    let (Some((at, Token::Integer(n))), Some((_, Token::Integer(g))), Some((_, kw))) =
        (lex.next_token(), lex.next_token(), lex.next_token())
    else {
        return None;
    };
    if !kw.is_keyword(b"obj") {
        return None;
    }
    let id = ObjectId::new(u32::try_from(n).ok().filter(|&n| n > 0)?, u32::try_from(g).ok()?);
    Some(syntax::parse_object_body(&mut lex, id, at, warnings))
}
