mod common;

use std::collections::BTreeMap;

use common::fixtures::{self, obj};
use pdfgraph::parser::{extract_references, ObjectId, PdfValue};
use pdfgraph::parser::{parse_document, ParseError, PdfDocument, XrefSource};
use proptest::prelude::*;

fn numbers(doc: &PdfDocument) -> Vec<u32> {
    doc.object_numbers().into_iter().collect()
}

fn latest_values(doc: &PdfDocument) -> BTreeMap<u32, PdfValue> {
    doc.object_numbers()
        .into_iter()
        .map(|n| (n, doc.latest_object(n).unwrap().value.clone()))
        .collect()
}

#[test]
fn minimal_file() {
    let doc = parse_document(&fixtures::minimal().bytes).unwrap();
    let d = doc.diagnostics();
    assert_eq!(d.object_count, 4);
    assert_eq!(doc.objects().len(), 4);
    assert_eq!(d.xref_used, XrefSource::ClassicTable);
    assert!(d.warnings.is_empty(), "{:?}", d.warnings);
    assert_eq!(doc.trailers().len(), 1);
    assert_eq!(doc.trailers()[0].root, Some(ObjectId::new(1, 0)));
    assert_eq!(doc.locate_root(), ObjectId::new(1, 0));
    let catalog = doc.resolve(ObjectId::new(1, 0)).as_dict().unwrap();
    assert!(catalog.has_type("Catalog"));
    assert!(doc.resolve(ObjectId::new(99, 0)).is_null());
}

#[test]
fn byte_offsets_point_at_headers() {
    let built = fixtures::minimal();
    let doc = parse_document(&built.bytes).unwrap();
    let offsets: Vec<(u32, usize)> = doc.objects().iter().map(|o| (o.id.number, o.byte_offset)).collect();
    assert_eq!(offsets, built.offsets);
}

#[test]
fn destroyed_xref_falls_back_to_scan() {
    let built = fixtures::minimal();
    let intact = parse_document(&built.bytes).unwrap();
    let doc = parse_document(&built.with_xref_zeroed()).unwrap();
    assert_eq!(doc.diagnostics().object_count, 4);
    assert_eq!(doc.diagnostics().xref_used, XrefSource::LinearScanFallback);
    assert!(!doc.diagnostics().warnings.is_empty());
    assert_eq!(latest_values(&doc), latest_values(&intact));
    assert_eq!(doc.locate_root(), ObjectId::new(1, 0));
}

#[test]
fn empty_input_has_no_header() {
    assert!(matches!(parse_document(b""), Err(ParseError::NoHeader(_))));
    assert!(matches!(parse_document(b"garbage 1 0 obj << >> endobj"), Err(ParseError::NoHeader(_))));
    let late = [vec![b' '; 1100], fixtures::minimal().bytes].concat();
    assert!(matches!(parse_document(&late), Err(ParseError::NoHeader(_))));
}

#[test]
fn header_without_objects() {
    let err = parse_document(b"%PDF-1.4\n%%EOF\n").unwrap_err();
    assert!(matches!(err, ParseError::NoObjects(_)));
    assert_eq!(err.diagnostics().object_count, 0);
}

#[test]
fn junk_before_header_is_tolerated() {
    let doc = parse_document(&fixtures::junk_prefix()).unwrap();
    assert_eq!(numbers(&doc), vec![1, 2, 3, 4]);
    assert_eq!(doc.locate_root(), ObjectId::new(1, 0));
}

#[test]
fn incremental_update() {
    let doc = parse_document(&fixtures::incremental().bytes).unwrap();
    assert_eq!(doc.diagnostics().xref_used, XrefSource::ClassicTable);
    assert_eq!(doc.trailers().len(), 2);
    assert!(doc.trailers()[0].prev_offset.is_some());
    assert!(doc.trailers()[1].prev_offset.is_none());
    assert_eq!(doc.objects().len(), 6);
    assert_eq!(numbers(&doc), vec![1, 2, 3, 4, 5]);
    let page = doc.resolve(ObjectId::new(3, 0)).as_dict().unwrap();
    assert!(page.get("Annots").is_some());
    // The original definition is still kept in file order.
    assert!(doc.objects()[2].value.as_dict().unwrap().get("Annots").is_none());
}

#[test]
fn indirect_length_stream() {
    let doc = parse_document(&fixtures::indirect_length().bytes).unwrap();
    assert_eq!(numbers(&doc), vec![1, 2, 3, 4, 5]);
    let contents = doc.resolve(ObjectId::new(4, 0));
    assert!(matches!(contents, PdfValue::Stream(_)));
    assert_eq!(extract_references(contents), vec![ObjectId::new(5, 0)]);
}

#[test]
fn dangling_reference_resolves_to_null() {
    let doc = parse_document(&fixtures::dangling().bytes).unwrap();
    assert_eq!(numbers(&doc), vec![1, 2, 3]);
    assert!(doc.resolve(ObjectId::new(9, 0)).is_null());
    let kids = extract_references(doc.resolve(ObjectId::new(2, 0)));
    assert_eq!(kids, vec![ObjectId::new(3, 0), ObjectId::new(9, 0)]);
}

#[test]
fn deep_nesting_is_truncated() {
    let doc = parse_document(&fixtures::deep_nesting(200).bytes).unwrap();
    assert_eq!(numbers(&doc), vec![1, 2, 3]);
    assert!(doc.diagnostics().warnings.iter().any(|w| w.message.contains("nesting")));
    assert!(extract_references(doc.resolve(ObjectId::new(2, 0))).is_empty());

    let shallow = parse_document(&fixtures::deep_nesting(60).bytes).unwrap();
    assert_eq!(extract_references(shallow.resolve(ObjectId::new(2, 0))), vec![ObjectId::new(3, 0)]);
}

#[test]
fn truncated_file_keeps_complete_objects() {
    let doc = parse_document(&fixtures::truncated()).unwrap();
    assert_eq!(doc.diagnostics().xref_used, XrefSource::LinearScanFallback);
    let found = numbers(&doc);
    assert!(found.starts_with(&[1, 2]), "{found:?}");
    assert!(!found.contains(&4));
    assert!(doc.trailers().is_empty());
    assert_eq!(doc.locate_root(), ObjectId::new(1, 0));
}

#[test]
fn root_falls_back_to_catalog_then_lowest() {
    let doc = parse_document(&fixtures::no_trailer_with_catalog()).unwrap();
    assert!(doc.trailers().is_empty());
    assert_eq!(doc.locate_root(), ObjectId::new(3, 0));

    let doc = parse_document(&fixtures::no_trailer_no_catalog()).unwrap();
    assert_eq!(doc.locate_root(), ObjectId::new(4, 0));
}

#[test]
fn xref_stream_uses_scan() {
    let doc = parse_document(&fixtures::xref_stream()).unwrap();
    assert_eq!(doc.diagnostics().xref_used, XrefSource::LinearScanFallback);
    assert_eq!(numbers(&doc), vec![1, 2, 3]);
    assert_eq!(doc.locate_root(), ObjectId::new(1, 0));
}

#[test]
fn object_stream_is_not_expanded() {
    let doc = parse_document(&fixtures::object_stream().bytes).unwrap();
    assert_eq!(numbers(&doc), vec![1, 2, 3]);
    assert!(doc.diagnostics().warnings.iter().any(|w| w.message.contains("object stream")));
}

#[test]
fn missing_endobj_ends_at_next_header() {
    let bytes = b"%PDF-1.4\n1 0 obj << /Type /Catalog /Pages 2 0 R >>\n2 0 obj << /Kids [] >>\nendobj\n";
    let doc = parse_document(bytes).unwrap();
    assert_eq!(numbers(&doc), vec![1, 2]);
    assert!(doc.resolve(ObjectId::new(1, 0)).as_dict().unwrap().has_type("Catalog"));
}

#[test]
fn reference_examples() {
    let doc = parse_document(&fixtures::build(&[obj(1, "<< /Kids [2 0 R 3 0 R] /Parent 1 0 R >>"), obj(2, "42")], None).bytes)
        .unwrap();
    assert_eq!(
        extract_references(doc.resolve(ObjectId::new(1, 0))),
        vec![ObjectId::new(2, 0), ObjectId::new(3, 0), ObjectId::new(1, 0)]
    );
    assert!(extract_references(doc.resolve(ObjectId::new(2, 0))).is_empty());
}

#[test]
fn resolve_is_repeatable() {
    let doc = parse_document(&fixtures::incremental().bytes).unwrap();
    for n in 0..8 {
        let id = ObjectId::new(n, 0);
        assert_eq!(doc.resolve(id), doc.resolve(id));
        assert_eq!(doc.resolve(id), doc.resolve(ObjectId::new(n, 7)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recovers_exactly_the_written_ids(seed in any::<u64>(), n in 1u32..30) {
        let objects = fixtures::random_objects(seed, n);
        let doc = parse_document(&fixtures::build(&objects, Some(1)).bytes).unwrap();
        let written: Vec<(u32, u32)> = objects.iter().map(|o| (o.number, o.generation)).collect();
        let read: Vec<(u32, u32)> = doc.objects().iter().map(|o| (o.id.number, o.id.generation)).collect();
        prop_assert_eq!(read, written);
        prop_assert_eq!(doc.diagnostics().xref_used, XrefSource::ClassicTable);
    }

    #[test]
    fn fallback_matches_xref(seed in any::<u64>(), n in 1u32..30) {
        let built = fixtures::build(&fixtures::random_objects(seed, n), Some(1));
        let intact = parse_document(&built.bytes).unwrap();
        let scanned = parse_document(&built.with_xref_zeroed()).unwrap();
        prop_assert_eq!(scanned.diagnostics().xref_used, XrefSource::LinearScanFallback);
        prop_assert_eq!(latest_values(&scanned), latest_values(&intact));
    }

    #[test]
    fn references_match_naive_scan(seed in any::<u64>(), n in 1u32..30) {
        let objects = fixtures::random_objects(seed, n);
        let doc = parse_document(&fixtures::build(&objects, Some(1)).bytes).unwrap();
        for o in &objects {
            let body = match o.body.windows(6).position(|w| w == b"stream") {
                Some(p) => &o.body[..p],
                None => &o.body[..],
            };
            let expected: Vec<ObjectId> = fixtures::naive_references(body)
                .into_iter()
                .map(|(n, g)| ObjectId::new(n, g))
                .collect();
            prop_assert_eq!(extract_references(doc.resolve(ObjectId::new(o.number, 0))), expected);
        }
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..2048)) {
        let _ = parse_document(&bytes);
        let mut with_header = b"%PDF-1.4\n".to_vec();
        with_header.extend_from_slice(&bytes);
        let _ = parse_document(&with_header);
    }

    #[test]
    fn mutated_fixtures_never_panic(seed in any::<u64>(), flips in proptest::collection::vec((any::<prop::sample::Index>(), any::<u8>()), 1..40)) {
        let mut bytes = fixtures::build(&fixtures::random_objects(seed, 12), Some(1)).bytes;
        for (i, b) in flips {
            let at = i.index(bytes.len());
            bytes[at] = b;
        }
        if let Ok(doc) = parse_document(&bytes) {
            let _ = pdfgraph::features::document_features(&doc);
        }
    }
}
