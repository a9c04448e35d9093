use std::process::Command;

fn cmate(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cmate")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let out = cmate(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn malformed_config_exits_with_two() {
    let dir = std::env::temp_dir().join(format!("cmate-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.cfg");
    std::fs::write(&bad, "depth = twelve\n").unwrap();
    let out = cmate(&["--config", bad.to_str().unwrap(), "centers", "--max-den", "3"]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&bad, "no_such_key = 1\n").unwrap();
    let out = cmate(&["--config", bad.to_str().unwrap(), "centers", "--max-den", "3"]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn cusp_listing() {
    let out = cmate(&["centers", "--max-den", "7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "2/3\tk=2"));
    assert!(text.lines().any(|l| l == "2/7\tk=3"));
}

#[test]
fn centers_and_correspondence() {
    let v = json(&["centers", "--family", "cubic", "--angle", "2/3", "--json"]);
    let a = v["value"].as_array().unwrap();
    assert!((a[0].as_f64().unwrap() - 1.001739727069808).abs() < 1e-9);
    assert!((a[1].as_f64().unwrap() + 0.5193559013447667).abs() < 1e-9);
    let v = json(&["correspond", "--angle", "2/3", "--m", "1", "--json"]);
    let l = v["output"]["value"].as_array().unwrap();
    assert!(l[0].as_f64().unwrap().abs() < 1e-9);
    assert!((l[1].as_f64().unwrap() - 0.3333212872419752).abs() < 1e-9);
}

#[test]
fn itinerary_of_an_angle() {
    let v = json(&["itinerary", "--graph", "dbas", "--angle", "1/3", "--json"]);
    let mut words: Vec<String> = v["words"].as_array().unwrap().iter().map(|w| w.as_str().unwrap().to_string()).collect();
    words.sort();
    assert!(words[0].starts_with("1222") && words[1].starts_with("2111"), "{words:?}");
}

#[test]
fn render_is_reproducible() {
    let dir = std::env::temp_dir().join(format!("cmate-img-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut digests = Vec::new();
    for name in ["a.ppm", "b.ppm"] {
        let path = dir.join(name);
        let out = cmate(&["render-julia", "--family", "dbas", "--size", "48", "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let side: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path.with_extension("json")).unwrap()).unwrap();
        digests.push(side["pixel_sha256"].as_str().unwrap().to_string());
    }
    assert_eq!(digests[0], digests[1]);
    std::fs::remove_dir_all(&dir).ok();
}
