use fncache::formats::{
    curve_csv, curve_json, demands_to_json, parse_demands, read_library, write_library,
};
use fncache_core::analysis::{lower_convex_envelope, worst_case_curve};
use fncache_core::gf::Field;
use fncache_core::linalg::GfMatrix;
use fncache_core::placement::generate_library;
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = (u64, Vec<Vec<u32>>)> {
    (
        prop::sample::select(vec![2u64, 3, 4, 5, 7, 9, 256, 257]),
        1usize..=6,
        1usize..=5,
    )
        .prop_flat_map(|(q, k, n)| {
            (
                Just(q),
                prop::collection::vec(prop::collection::vec(0u32..q as u32, n), k),
            )
        })
}

proptest! {
    #[test]
    fn demand_json_round_trips((q, rows) in matrix()) {
        let f = Field::new(q).unwrap();
        let d = GfMatrix::from_rows(&f, &rows).unwrap();
        let text = demands_to_json(&d);
        prop_assert_eq!(parse_demands(&text).unwrap(), d);
    }

    #[test]
    fn library_bytes_round_trip(q in prop::sample::select(vec![2u64, 16, 251, 256, 257, 65536]), n in 1usize..=4, k in 1usize..=5, seed in any::<u64>()) {
        let t = (seed as usize) % (k + 1);
        let f = Field::new(q).unwrap();
        let b = fncache_core::combinat::choose(k, t) as usize * (1 + (seed as usize >> 8) % 3);
        let lib = generate_library(&f, n, b, k, t, seed).unwrap();
        let mut bytes = Vec::new();
        write_library(&lib, &mut bytes).unwrap();
        let width = if q <= 256 { 1 } else { 2 };
        prop_assert_eq!(bytes.len(), 33 + n * b * width);
        prop_assert_eq!(read_library(bytes.as_slice()).unwrap(), lib);
    }
}

#[test]
fn csv_and_json_agree_on_points() {
    let pts = worst_case_curve(5, 3);
    let env = lower_convex_envelope(&pts).unwrap();
    let csv = curve_csv(&pts);
    let doc: serde_json::Value = serde_json::from_str(&curve_json(&pts, Some(&env))).unwrap();
    let json_points = doc["points"].as_array().unwrap();
    for (line, p) in csv.lines().skip(1).zip(json_points) {
        let f: Vec<&str> = line.split(',').collect();
        let as_text = |num: &str, den: &str| {
            if den == "1" {
                num.to_string()
            } else {
                format!("{num}/{den}")
            }
        };
        assert_eq!(p["memory"], as_text(f[1], f[2]));
        assert_eq!(p["load"], as_text(f[3], f[4]));
    }
    assert_eq!(doc["envelope"].as_array().unwrap().len(), env.len());
}

#[test]
fn demand_json_rejects_unknown_fields_and_negative_entries() {
    assert!(parse_demands(r#"{"q": 2, "matrix": [[1]], "extra": 0}"#).is_err());
    assert!(parse_demands(r#"{"q": 2, "matrix": []}"#).is_err());
    let err = parse_demands(r#"{"q": 5, "matrix": [[-1, 2]]}"#).unwrap_err();
    assert!(err.to_string().contains("(0, 0, -1)"), "{err}");
}
