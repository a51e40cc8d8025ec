use std::fmt;
use std::ops::Range;

/// Object number / generation number pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectId {
    pub number: u32,
    pub generation: u32,
}

impl ObjectId {
    pub const fn new(number: u32, generation: u32) -> Self {
        ObjectId { number, generation }
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} R", self.number, self.generation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StringForm {
    Literal,
    Hex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdfString {
    pub bytes: Vec<u8>,
    pub form: StringForm,
}

/// Dictionary with keys kept in file order.
///
/// Duplicate keys are kept; lookups return the last occurrence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dictionary {
    entries: Vec<(String, PdfValue)>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, value: PdfValue) {
        self.entries.push((key.into(), value));
    }

    pub fn get(&self, key: &str) -> Option<&PdfValue> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &PdfValue)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when `/Type` is the name `ty`.
    pub fn has_type(&self, ty: &str) -> bool {
        matches!(self.get("Type"), Some(PdfValue::Name(n)) if n == ty)
    }
}

impl FromIterator<(String, PdfValue)> for Dictionary {
    fn from_iter<I: IntoIterator<Item = (String, PdfValue)>>(iter: I) -> Self {
        Dictionary {
            entries: iter.into_iter().collect(),
        }
    }
}

/// Stream object: its dictionary plus the byte span of the undecoded body.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub dict: Dictionary,
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PdfValue {
    Null,
    Boolean(bool),
    Number(f64),
    String(PdfString),
    Name(String),
    Array(Vec<PdfValue>),
    Dictionary(Dictionary),
    Stream(Stream),
    Reference(ObjectId),
}

impl PdfValue {
    pub fn as_dict(&self) -> Option<&Dictionary> {
        match self {
            PdfValue::Dictionary(d) => Some(d),
            PdfValue::Stream(s) => Some(&s.dict),
            _ => None,
        }
    }

    pub fn as_reference(&self) -> Option<ObjectId> {
        match self {
            PdfValue::Reference(id) => Some(*id),
            _ => None,
        }
    }

    /// Non-negative integral number, if this is one.
    pub fn as_count(&self) -> Option<u64> {
        match self {
            PdfValue::Number(n) if *n >= 0.0 && n.fract() == 0.0 && *n < 9.0e15 => Some(*n as u64),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, PdfValue::Null)
    }
}

/// Every reference reachable inside `value`, in encounter order, duplicates kept.
pub fn extract_references(value: &PdfValue) -> Vec<ObjectId> {
    let mut out = Vec::new();
    let mut stack = vec![value];
    while let Some(v) = stack.pop() {
        match v {
            PdfValue::Reference(id) => out.push(*id),
            PdfValue::Array(items) => stack.extend(items.iter().rev()),
            PdfValue::Dictionary(d) => stack.extend(d.entries.iter().rev().map(|(_, v)| v)),
            PdfValue::Stream(s) => stack.extend(s.dict.entries.iter().rev().map(|(_, v)| v)),
            _ => {}
        }
    }
    out
}
