//! Hand-built PDF files with known contents.

use std::collections::BTreeSet;

/// One indirect object: number, generation and the text between `obj` and `endobj`.
#[derive(Debug, Clone)]
pub struct Obj {
    pub number: u32,
    pub generation: u32,
    pub body: Vec<u8>,
}

pub fn obj(number: u32, body: &str) -> Obj {
    Obj {
        number,
        generation: 0,
        body: body.as_bytes().to_vec(),
    }
}

/// Stream object with a direct `/Length`.
pub fn stream_obj(number: u32, dict_extra: &str, data: &[u8]) -> Obj {
    let mut body = format!("<< /Length {} {dict_extra} >>\nstream\n", data.len()).into_bytes();
    body.extend_from_slice(data);
    body.extend_from_slice(b"\nendstream");
    Obj {
        number,
        generation: 0,
        body,
    }
}

#[derive(Debug, Clone, Default)]
pub struct Built {
    pub bytes: Vec<u8>,
    /// Offset of every `N G obj` header written.
    pub offsets: Vec<(u32, usize)>,
    /// Offset of each `xref` keyword written, oldest first.
    pub xref_offsets: Vec<usize>,
    /// Offset of each `trailer` keyword written, oldest first.
    pub trailer_offsets: Vec<usize>,
}

impl Built {
    /// Copy with the first classic xref table (from `xref` up to `trailer`) overwritten by zero bytes.
    pub fn with_xref_zeroed(&self) -> Vec<u8> {
        let mut bytes = self.bytes.clone();
        let start = self.xref_offsets[0];
        let end = self.trailer_offsets[0];
        bytes[start..end].iter_mut().for_each(|b| *b = 0);
        bytes
    }
}

fn write_objects(out: &mut Built, objects: &[Obj]) -> Vec<(u32, u32, usize)> {
    let mut entries = Vec::new();
    for o in objects {
        let at = out.bytes.len();
        out.bytes
            .extend_from_slice(format!("{} {} obj\n", o.number, o.generation).as_bytes());
        out.bytes.extend_from_slice(&o.body);
        out.bytes.extend_from_slice(b"\nendobj\n");
        out.offsets.push((o.number, at));
        entries.push((o.number, o.generation, at));
    }
    entries
}

/// Classic xref with one subsection per run of consecutive numbers.
fn write_xref(out: &mut Built, entries: &[(u32, u32, usize)], include_free_head: bool) -> usize {
    let at = out.bytes.len();
    out.xref_offsets.push(at);
    out.bytes.extend_from_slice(b"xref\n");
    let mut rows: Vec<(u32, String)> = entries
        .iter()
        .map(|&(n, g, off)| (n, format!("{off:010} {g:05} n \n")))
        .collect();
    if include_free_head {
        rows.push((0, "0000000000 65535 f \n".to_string()));
    }
    rows.sort_by_key(|r| r.0);
    rows.dedup_by_key(|r| r.0);
    let mut i = 0;
    while i < rows.len() {
        let mut j = i;
        while j + 1 < rows.len() && rows[j + 1].0 == rows[j].0 + 1 {
            j += 1;
        }
        out.bytes
            .extend_from_slice(format!("{} {}\n", rows[i].0, j - i + 1).as_bytes());
        for r in &rows[i..=j] {
            out.bytes.extend_from_slice(r.1.as_bytes());
        }
        i = j + 1;
    }
    at
}

fn write_trailer(out: &mut Built, dict: &str, startxref: usize) {
    out.trailer_offsets.push(out.bytes.len());
    out.bytes
        .extend_from_slice(format!("trailer\n{dict}\nstartxref\n{startxref}\n%%EOF\n").as_bytes());
}

/// Well-formed single-revision file: header, objects, classic xref, trailer.
pub fn build(objects: &[Obj], root: Option<u32>) -> Built {
    let mut out = Built::default();
    out.bytes.extend_from_slice(b"%PDF-1.4\n%\xe2\xe3\xcf\xd3\n");
    let entries = write_objects(&mut out, objects);
    let xref = write_xref(&mut out, &entries, true);
    let size = objects.iter().map(|o| o.number).max().unwrap_or(0) + 1;
    let root = root.map_or(String::new(), |r| format!(" /Root {r} 0 R"));
    write_trailer(&mut out, &format!("<< /Size {size}{root} >>"), xref);
    out
}

/// Appends an incremental update to `base` with its own xref and a trailer whose /Prev points at the previous table.
pub fn append_update(base: &Built, objects: &[Obj], root: u32) -> Built {
    let mut out = base.clone();
    let prev = *base.xref_offsets.last().expect("base has an xref");
    let entries = write_objects(&mut out, objects);
    let xref = write_xref(&mut out, &entries, false);
    let size = out.offsets.iter().map(|o| o.0).max().unwrap_or(0) + 1;
    write_trailer(
        &mut out,
        &format!("<< /Size {size} /Root {root} 0 R /Prev {prev} >>"),
        xref,
    );
    out
}

/// Body only, no xref and no trailer.
pub fn bare(objects: &[Obj]) -> Vec<u8> {
    let mut out = Built::default();
    out.bytes.extend_from_slice(b"%PDF-1.7\n");
    write_objects(&mut out, objects);
    out.bytes
}

/// Catalog 1 -> pages 2 -> page 3 -> contents 4, with a back-reference from the page to the catalog.
pub fn minimal_objects() -> Vec<Obj> {
    vec![
        obj(1, "<< /Type /Catalog /Pages 2 0 R >>"),
        obj(2, "<< /Type /Pages /Kids [3 0 R] /Count 1 >>"),
        obj(3, "<< /Type /Page /Parent 1 0 R /Contents 4 0 R /MediaBox [0 0 612 792] >>"),
        stream_obj(4, "", b"BT /F1 12 Tf (Hello) Tj ET"),
    ]
}

pub fn minimal() -> Built {
    build(&minimal_objects(), Some(1))
}

/// Minimal file plus an update that redefines object 3 and adds object 5.
pub fn incremental() -> Built {
    append_update(
        &minimal(),
        &[
            obj(3, "<< /Type /Page /Parent 1 0 R /Contents 4 0 R /Annots [5 0 R] >>"),
            obj(5, "<< /Type /Annot /Subtype /Link >>"),
        ],
        1,
    )
}

/// Contents stream whose /Length is indirect object 5. The payload contains a
/// fake `endobj` so a parser that ignores the stream boundary would misread it.
pub fn indirect_length() -> Built {
    let data = b"q endobj 9 0 obj Q";
    let mut contents = b"<< /Length 5 0 R >>\nstream\n".to_vec();
    contents.extend_from_slice(data);
    contents.extend_from_slice(b"\nendstream");
    build(
        &[
            obj(1, "<< /Type /Catalog /Pages 2 0 R >>"),
            obj(2, "<< /Type /Pages /Kids [3 0 R] /Count 1 >>"),
            obj(3, "<< /Type /Page /Parent 2 0 R /Contents 4 0 R >>"),
            Obj {
                number: 4,
                generation: 0,
                body: contents,
            },
            obj(5, &data.len().to_string()),
        ],
        Some(1),
    )
}

/// Object 2 references object 9, which does not exist.
pub fn dangling() -> Built {
    build(
        &[
            obj(1, "<< /Type /Catalog /Pages 2 0 R >>"),
            obj(2, "<< /Type /Pages /Kids [3 0 R 9 0 R] /Count 2 >>"),
            obj(3, "<< /Type /Page /Parent 2 0 R >>"),
        ],
        Some(1),
    )
}

/// Object 2 holds arrays nested `levels` deep with a reference at the bottom.
pub fn deep_nesting(levels: usize) -> Built {
    let body = format!("{}3 0 R{}", "[".repeat(levels), "]".repeat(levels));
    build(
        &[
            obj(1, "<< /Type /Catalog /Pages 2 0 R >>"),
            obj(2, &body),
            obj(3, "<< /Type /Page >>"),
        ],
        Some(1),
    )
}

/// Minimal file cut in the middle of object 3.
pub fn truncated() -> Vec<u8> {
    let built = minimal();
    let cut = built.offsets[2].1 + 20;
    built.bytes[..cut].to_vec()
}

/// Objects without any trailer; the catalog is object 3.
pub fn no_trailer_with_catalog() -> Vec<u8> {
    bare(&[
        obj(2, "<< /Type /Pages /Kids [4 0 R] /Count 1 >>"),
        obj(3, "<< /Type /Catalog /Pages 2 0 R >>"),
        obj(4, "<< /Type /Page /Parent 2 0 R >>"),
        obj(7, "<< /Type /Catalog /Pages 2 0 R >>"),
    ])
}

/// No trailer and no catalog.
pub fn no_trailer_no_catalog() -> Vec<u8> {
    bare(&[obj(6, "<< /A 7 0 R >>"), obj(4, "<< /B 6 0 R >>"), obj(7, "(leaf)")])
}

/// File using an xref stream instead of a classic table.
pub fn xref_stream() -> Vec<u8> {
    let mut out = bare(&[
        obj(1, "<< /Type /Catalog /Pages 2 0 R >>"),
        obj(2, "<< /Type /Pages /Kids [] /Count 0 >>"),
    ]);
    let at = out.len();
    let x = stream_obj(3, "/Type /XRef /Size 4 /W [1 2 1] /Root 1 0 R", &[0u8; 16]);
    out.extend_from_slice(b"3 0 obj\n");
    out.extend_from_slice(&x.body);
    out.extend_from_slice(format!("\nendobj\nstartxref\n{at}\n%%EOF\n").as_bytes());
    out
}

/// An object stream, whose contents are not expanded.
pub fn object_stream() -> Built {
    build(
        &[
            obj(1, "<< /Type /Catalog /Pages 2 0 R >>"),
            obj(2, "<< /Type /Pages /Kids [] /Count 0 >>"),
            stream_obj(3, "/Type /ObjStm /N 1 /First 4", b"10 0 << /X 1 >>"),
        ],
        Some(1),
    )
}

/// Object 2 references itself.
pub fn self_reference() -> Built {
    build(
        &[obj(1, "<< /Type /Catalog /Pages 2 0 R >>"), obj(2, "<< /Self 2 0 R /Next 1 0 R >>")],
        Some(1),
    )
}

/// Garbage before the header, within the allowed window.
pub fn junk_prefix() -> Vec<u8> {
    let mut out = vec![b'x'; 200];
    out.push(b'\n');
    out.extend_from_slice(&minimal().bytes);
    out
}

/// A document shaped like an ordinary text file: a 50-page tree, one
/// content stream per page, and a shared resource dictionary naming 97 fonts.
pub fn benign_like() -> Built {
    let pages: Vec<u32> = (3..53).collect();
    let kids: Vec<String> = pages.iter().map(|p| format!("{p} 0 R")).collect();
    let mut objects = vec![
        obj(1, "<< /Type /Catalog /Pages 2 0 R >>"),
        obj(2, &format!("<< /Type /Pages /Kids [{}] /Count 50 >>", kids.join(" "))),
    ];
    for (i, &p) in pages.iter().enumerate() {
        let contents = 54 + i as u32;
        objects.push(obj(
            p,
            &format!("<< /Type /Page /Parent 2 0 R /Resources 53 0 R /Contents {contents} 0 R >>"),
        ));
    }
    let fonts: Vec<String> = (104..201).map(|f| format!("/F{f} {f} 0 R")).collect();
    objects.push(obj(53, &format!("<< /Font << {} >> >>", fonts.join(" "))));
    for i in 0..50u32 {
        objects.push(stream_obj(54 + i, "", b"BT /F104 12 Tf (text) Tj ET"));
    }
    for f in 104..201 {
        objects.push(obj(f, "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>"));
    }
    build(&objects, Some(1))
}

/// References parsed out of an object body by a deliberately naive scan:
/// split on whitespace and delimiters, then look for `int int R`.
/// Only valid for bodies without strings or stream data that contain such triples.
pub fn naive_references(body: &[u8]) -> Vec<(u32, u32)> {
    let text = String::from_utf8_lossy(body);
    let spaced: String = text
        .chars()
        .map(|c| if "[]<>/()".contains(c) { ' ' } else { c })
        .collect();
    let tokens: Vec<&str> = spaced.split_whitespace().collect();
    let mut refs = Vec::new();
    for w in tokens.windows(3) {
        if w[2] == "R" {
            if let (Ok(n), Ok(g)) = (w[0].parse::<u32>(), w[1].parse::<u32>()) {
                refs.push((n, g));
            }
        }
    }
    refs
}

/// Edge set expected for a well-formed file built from `objects`,
/// using the latest definition of each number.
pub fn naive_edges(objects: &[Obj]) -> BTreeSet<(u32, u32)> {
    let mut latest = std::collections::BTreeMap::new();
    for o in objects {
        latest.insert(o.number, o);
    }
    let mut edges = BTreeSet::new();
    for (&n, o) in &latest {
        let body = match o.body.windows(6).position(|w| w == b"stream") {
            Some(p) => &o.body[..p],
            None => &o.body[..],
        };
        for (t, _) in naive_references(body) {
            if t != n && t != 0 {
                edges.insert((n, t));
            }
        }
    }
    edges
}

/// Random well-formed object set: numbers `1..=n`, object 1 a catalog, each
/// body a dictionary with references to random numbers (some dangling),
/// nested arrays, names, numbers and strings without reference-like text.
pub fn random_objects(seed: u64, n: u32) -> Vec<Obj> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut objects = vec![obj(1, "<< /Type /Catalog /Pages 2 0 R >>")];
    for number in 2..=n {
        let mut body = String::from("<<");
        let keys = rng.random_range(0..5);
        for k in 0..keys {
            body.push_str(&format!(" /K{k} "));
            match rng.random_range(0..5) {
                0 => body.push_str(&format!("{} 0 R", rng.random_range(1..n + 3))),
                1 => body.push_str(&format!(
                    "[{} 0 R [{} 0 R /N] 3.5]",
                    rng.random_range(1..n + 3),
                    rng.random_range(1..n + 3)
                )),
                2 => body.push_str("(text \\) more)"),
                3 => body.push_str("<48656C6C6F>"),
                _ => body.push_str(&format!("{}", rng.random_range(-50..50))),
            }
        }
        body.push_str(" >>");
        if rng.random_bool(0.2) {
            let len = rng.random_range(0..40);
            let data: Vec<u8> = (0..len).map(|_| rng.random_range(b'a'..=b'z')).collect();
            let mut o = stream_obj(number, "", &data);
            o.body = [body.trim_end_matches(">>").as_bytes(), &o.body[2..]].concat();
            objects.push(o);
        } else {
            objects.push(obj(number, &body));
        }
    }
    objects
}
