use proptest::prelude::*;
use tactile::flowio::{read_vikf, write_vikf};
use tactile::meta::{load_frame, save_frame, sidecar_path};
use tactile::pgm::{read_pgm, write_pgm, PgmError};
use tactile_core::{FlowField, Frame};

fn frame() -> impl Strategy<Value = Frame> {
    (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<u8>(), w * h).prop_map(move |px| Frame::new(w, h, px).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn frames_survive_encoding(f in frame()) {
        prop_assert_eq!(read_pgm(&write_pgm(&f)).unwrap(), f);
    }

    #[test]
    fn canonical_files_survive_decoding(f in frame()) {
        let bytes = write_pgm(&f);
        prop_assert_eq!(write_pgm(&read_pgm(&bytes).unwrap()), bytes);
    }

    #[test]
    fn loose_headers_decode_to_the_same_frame(f in frame(), sep in prop::sample::select(vec![" ", "\n", "\t", "  \n", "\r\n"])) {
        let mut bytes = format!("P5{sep}# comment{sep}\n{}{sep}{}{sep}255\n", f.width(), f.height()).into_bytes();
        bytes.extend_from_slice(f.pixels());
        prop_assert_eq!(read_pgm(&bytes).unwrap(), f);
    }

    #[test]
    fn truncated_payloads_are_reported(f in frame(), cut in 1usize..8) {
        let bytes = write_pgm(&f);
        let n = f.pixels().len();
        let keep = bytes.len() - cut.min(n);
        let is_truncated = matches!(read_pgm(&bytes[..keep]), Err(PgmError::TruncatedPayload { .. }));
        prop_assert!(is_truncated);
    }

    #[test]
    fn flow_dumps_round_trip(w in 1usize..16, h in 1usize..16, seed in any::<u32>()) {
        let f = FlowField::from_fn(w, h, |x, y| {
            let v = (x * 31 + y * 17) as f32 + seed as f32 * 1e-3;
            [v.sin() * 7.0, -v.cos()]
        });
        prop_assert_eq!(read_vikf(&write_vikf(&f)).unwrap(), f);
    }
}

#[test]
fn unsupported_maxvals() {
    for maxval in [1u32, 15, 254, 256, 65535] {
        let mut b = format!("P5\n1 1\n{maxval}\n").into_bytes();
        b.extend([0, 0]);
        assert_eq!(read_pgm(&b), Err(PgmError::UnsupportedMaxval(maxval)));
    }
    assert!(matches!(read_pgm(b"P5\n1 1\n70000\n\0"), Err(PgmError::MalformedHeader(_))));
}

#[test]
fn sidecar_carries_scale_and_time() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.pgm");
    let f = Frame::new(2, 1, vec![3, 4]).unwrap().with_scale(0.05).with_timestamp(2.5);
    save_frame(&path, &f).unwrap();
    assert_eq!(sidecar_path(&path), dir.path().join("f.meta.json"));
    assert_eq!(load_frame(&path).unwrap(), f);

    std::fs::remove_file(sidecar_path(&path)).unwrap();
    let plain = load_frame(&path).unwrap();
    assert_eq!((plain.scale, plain.timestamp), (0.1, 0.0));

    std::fs::write(sidecar_path(&path), r#"{"timestamp_s": 4.0}"#).unwrap();
    let partial = load_frame(&path).unwrap();
    assert_eq!((partial.scale, partial.timestamp), (0.1, 4.0));
}
