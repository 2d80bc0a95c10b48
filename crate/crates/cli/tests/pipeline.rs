mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use common::*;
use lora_place::commands::{OracleDoc, SelectionDoc};
use lora_place::config::{LoadedConfig, Overrides, RunConfig};
use lora_place::gridio::{decode_pgg, encode_pgg};
use lora_place::render::{parse_pnm_header, site_color, PALETTE, UNCOVERED};
use lora_place::report::{parse_manifest, sha256_hex, SECTIONS};
use lora_place::scene_json::load_scene;
use lora_place_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EMPTY_SCENE: &str = r#"{
    "sites": [{"id": 0, "name": "mast", "position": [3, -4, 25]}],
    "bounds": {"min": [-100, -100], "max": [100, 100]},
    "grid": {"origin": [-97.5, -97.5], "dx": 5, "dy": 5, "nx": 40, "ny": 40}
}"#;

fn minimal_config(dir: &Path, scene: &str, extra: &str) -> std::path::PathBuf {
    write(dir, "scene.json", scene);
    write(
        dir,
        "run.json",
        &format!(r#"{{"scene_path": "scene.json", "budget_k": 2{extra}}}"#),
    )
}

fn code(out: &std::process::Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn empty_scene_pathgain_is_free_space() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = minimal_config(dir.path(), EMPTY_SCENE, "");
    run_ok("pathgain", &cfg, &[]);
    let bytes = fs::read(dir.path().join("output/gain_site0.pgg")).unwrap();
    let scene = load_scene(&dir.path().join("scene.json")).unwrap();
    let grid = scene.grid();
    let map = decode_pgg(&bytes, &grid, 0).unwrap();
    let tx = scene.sites()[0].position;
    for n in 0..grid.cell_count() {
        let d = tx.distance(grid.cell_center(n).unwrap());
        let expected = free_space_path_gain(d, 1e9).unwrap();
        assert_eq!(map.gains_db()[n], expected as f32 as f64, "cell {n}");
    }
}

#[test]
fn manhattan_writes_one_gain_file_per_site_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run_ok(
            "pathgain",
            &manhattan_config(),
            &["--out", out.to_str().unwrap()],
        );
        let stdout = String::from_utf8(o.stdout).unwrap();
        assert_eq!(stdout.lines().count(), 8);
        assert!(stdout.starts_with("site 0: gain min "));
    }
    let ha = tree_hashes(&a);
    let names: Vec<_> = ha.keys().cloned().collect();
    let expected: Vec<_> = (0..8).map(|i| format!("gain_site{i}.pgg")).collect();
    assert_eq!(names, expected);
    assert_eq!(ha, tree_hashes(&b));
}

#[test]
fn manhattan_pipeline_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    full_pipeline(&manhattan_config(), &out);

    let sel: SelectionDoc =
        serde_json::from_str(&fs::read_to_string(out.join("selection.json")).unwrap()).unwrap();
    let raw: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("selection.json")).unwrap()).unwrap();
    let keys: BTreeSet<_> = raw.as_object().unwrap().keys().cloned().collect();
    assert_eq!(
        keys,
        ["budget", "fractions", "marginal_cells", "order"]
            .map(String::from)
            .into()
    );
    assert_eq!(sel.budget, 6);
    assert_eq!(sel.order.len(), 6);
    assert!(sel.marginal_cells.windows(2).all(|w| w[0] >= w[1]));

    // the tower rooftop dominates and is both the first pick and the best standalone site
    assert_eq!(sel.order[0], 2);
    let (header, standalone) = read_csv(&out.join("standalone.csv"));
    assert_eq!(
        header,
        ["rank", "site_id", "name", "coverage_pct", "covered_cells"]
    );
    assert_eq!(standalone.len(), 8);
    assert_eq!(
        (standalone[0][1].as_str(), standalone[0][2].as_str()),
        ("2", "tower")
    );
    let pct: Vec<f64> = standalone.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(pct.windows(2).all(|w| w[0] >= w[1]));

    let oracle: OracleDoc =
        serde_json::from_str(&fs::read_to_string(out.join("oracle.json")).unwrap()).unwrap();
    assert!(oracle.ratio >= 1.0 - (-1.0f64).exp());
    assert!(oracle.greedy_cells <= oracle.optimal_cells);

    let (header, table) = read_csv(&out.join("coverage_table.csv"));
    assert_eq!(header, ["K", "coverage_ge1_pct", "coverage_ge2_pct"]);
    assert_eq!(table.len(), 6);
    assert_eq!(table[0][2], "0.00");
}

/// Coverage table recomputed from the gain files with plain set unions.
#[test]
fn coverage_table_matches_set_union_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    for sub in ["pathgain", "coverage", "place"] {
        run_ok(sub, &manhattan_config(), &["--out", out_s]);
    }
    let scene = load_scene(&fixtures().join("manhattan_3x3.json")).unwrap();
    let grid = scene.grid();
    let lb = LinkBudget::default();
    let min_gain = lb.min_gain_for_threshold(-10.0);

    let cfg = LoadedConfig::load(&manhattan_config(), &Overrides::default()).unwrap();
    let sets: Vec<BTreeSet<usize>> = scene
        .sites()
        .iter()
        .map(|s| {
            let g = compute_path_gain_map(&scene, s, &grid, &cfg.config.propagation()).unwrap();
            // the on-disk file is the same map narrowed to f32
            let disk = decode_pgg(
                &fs::read(out.join(format!("gain_site{}.pgg", s.id))).unwrap(),
                &grid,
                s.id,
            )
            .unwrap();
            assert_eq!(encode_pgg(&g), encode_pgg(&disk));
            (0..grid.cell_count())
                .filter(|&n| g.gains_db()[n] >= min_gain)
                .collect()
        })
        .collect();

    let sel: SelectionDoc =
        serde_json::from_str(&fs::read_to_string(out.join("selection.json")).unwrap()).unwrap();
    let (_, table) = read_csv(&out.join("coverage_table.csv"));
    let total = grid.cell_count() as f64;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, &g) in sel.order.iter().enumerate() {
        for &n in &sets[g] {
            *counts.entry(n).or_default() += 1;
        }
        let ge1 = counts.len() as f64;
        let ge2 = counts.values().filter(|&&c| c >= 2).count() as f64;
        assert_eq!(table[k][0], (k + 1).to_string());
        assert_eq!(table[k][1], format!("{:.2}", 100.0 * ge1 / total));
        assert_eq!(table[k][2], format!("{:.2}", 100.0 * ge2 / total));
    }

    // greedy recomputed from the sets
    let mut covered = BTreeSet::new();
    for (&g, &m) in sel.order.iter().zip(&sel.marginal_cells) {
        let best = (0..sets.len())
            .map(|h| (sets[h].difference(&covered).count(), std::cmp::Reverse(h)))
            .max()
            .unwrap();
        assert_eq!((best.0, best.1 .0), (m, g));
        covered.extend(sets[g].iter().copied());
    }
}

#[test]
fn association_render_uses_one_colour_per_selected_gateway_plus_grey() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    run_ok("coverage", &manhattan_config(), &["--out", out_s]);
    run_ok("place", &manhattan_config(), &["--out", out_s]);
    let sel: SelectionDoc =
        serde_json::from_str(&fs::read_to_string(out.join("selection.json")).unwrap()).unwrap();

    let img = fs::read(out.join("association.ppm")).unwrap();
    let info = parse_pnm_header(&img).unwrap();
    assert_eq!((info.width, info.height), (80, 80));
    let colours: BTreeSet<[u8; 3]> = img[info.data_offset..]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    let mut expected: BTreeSet<[u8; 3]> = sel.order.iter().map(|&g| site_color(g)).collect();
    expected.insert(UNCOVERED);
    assert_eq!(colours, expected);
    assert_eq!(colours.len(), sel.order.len() + 1);
    assert!(colours
        .iter()
        .all(|c| *c == UNCOVERED || PALETTE.contains(c)));
}

#[test]
fn summary_sections_echo_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    full_pipeline(&manhattan_config(), &out);
    let summary = fs::read_to_string(out.join("summary.md")).unwrap();
    let mut last = 0;
    for s in SECTIONS {
        let at = summary.find(s).unwrap_or_else(|| panic!("missing {s}"));
        assert!(at >= last, "{s} out of order");
        last = at;
    }
    assert!(summary.contains("## Exhaustive comparison"));

    let start = summary.find("```json\n").unwrap() + 8;
    let end = start + summary[start..].find("\n```").unwrap();
    let echoed: RunConfig = serde_json::from_str(&summary[start..end]).unwrap();
    let effective = LoadedConfig::load(
        &manhattan_config(),
        &Overrides {
            out: Some(out.clone()),
            ..Overrides::default()
        },
    )
    .unwrap()
    .config;
    assert_eq!(echoed, effective);

    let manifest = parse_manifest(&summary);
    let on_disk = tree_hashes(&out);
    assert_eq!(manifest.len(), on_disk.len() - 1);
    for (name, hash) in &manifest {
        assert_eq!(
            hash,
            &sha256_hex(&fs::read(out.join(name)).unwrap()),
            "{name}"
        );
    }
    assert!(manifest.iter().all(|(n, _)| n != "summary.md"));
}

#[test]
fn k_one_table_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    run_ok(
        "coverage",
        &manhattan_config(),
        &["--out", out.to_str().unwrap(), "--budget", "1"],
    );
    let (_, rows) = read_csv(&out.join("coverage_table.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "1");
    assert_eq!(rows[0][2], "0.00");
}

#[test]
fn threshold_override_changes_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let pct = |gamma: &str| {
        let out = dir.path().join(gamma);
        run_ok(
            "place",
            &manhattan_config(),
            &[
                "--out",
                out.to_str().unwrap(),
                "--threshold-db",
                gamma,
                "--budget",
                "1",
            ],
        );
        let (_, rows) = read_csv(&out.join("standalone.csv"));
        rows[0][3].parse::<f64>().unwrap()
    };
    let robust = pct("-10");
    let edge = pct("-22");
    assert!(edge > robust, "edge {edge} robust {robust}");
}

#[test]
fn excluding_interiors_shrinks_the_denominator() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        &format!(
            r#"{{"scene_path": "{}", "budget_k": 2, "denominator_mode": "exclude_building_interiors",
                "propagation": {{"knife_edge_enabled": true}}}}"#,
            fixtures().join("manhattan_3x3.json").display()
        ),
    );
    run_ok("place", &cfg, &[]);
    let (_, rows) = read_csv(&dir.path().join("output/standalone.csv"));
    // 9 blocks of 12x12 cells are interior out of 80x80
    let outside = 6400 - 9 * 144;
    for r in rows {
        let cells: f64 = r[4].parse().unwrap();
        assert_eq!(r[3], format!("{:.2}", 100.0 * cells / outside as f64));
    }

    // interior cells are never associated or counted as redundant
    run_ok("coverage", &cfg, &[]);
    let scene = load_scene(&fixtures().join("manhattan_3x3.json")).unwrap();
    let grid = scene.grid();
    let (_, assoc) = read_csv(&dir.path().join("output/association.csv"));
    let (_, redundancy) = read_csv(&dir.path().join("output/redundancy.csv"));
    let mut interior = 0;
    for n in 0..grid.cell_count() {
        if scene.is_inside_building(grid.cell_center(n).unwrap().xy()) {
            interior += 1;
            assert_eq!(assoc[n][5], "", "cell {n}");
            assert_eq!(redundancy[n][5], "0", "cell {n}");
        }
    }
    assert_eq!(interior, 9 * 144);
}

#[test]
fn imported_csv_gains() {
    let dir = tempfile::tempdir().unwrap();
    let scene = r#"{
        "sites": [{"id": 0, "name": "a", "position": [0, 0, 20]}, {"id": 1, "name": "b", "position": [5, 0, 20]}],
        "bounds": {"min": [0, 0], "max": [10, 10]},
        "grid": {"origin": [2.5, 2.5], "dx": 5, "dy": 5, "nx": 2, "ny": 2}
    }"#;
    // threshold -10 dB needs gain >= -137.006...
    write(dir.path(), "g0.csv", "-100, -137\nNaN, -137.01\n");
    write(dir.path(), "g1.csv", "-200,-200\n-200,-120\n");
    let cfg = minimal_config(
        dir.path(),
        scene,
        r#", "imported_gain_paths": {"0": "g0.csv", "1": "g1.csv"}"#,
    );
    run_ok("place", &cfg, &[]);
    let sel: SelectionDoc = serde_json::from_str(
        &fs::read_to_string(dir.path().join("output/selection.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(sel.order, vec![0, 1]);
    assert_eq!(sel.marginal_cells, vec![2, 1]);
    assert_eq!(sel.fractions, vec![0.5, 0.75]);

    run_ok("pathgain", &cfg, &[]);
    let grid = load_scene(&dir.path().join("scene.json")).unwrap().grid();
    let g0 = decode_pgg(
        &fs::read(dir.path().join("output/gain_site0.pgg")).unwrap(),
        &grid,
        0,
    )
    .unwrap();
    assert_eq!(g0.gains_db(), &[-100.0, -137.0, NO_PATH, -137.01f32 as f64]);
}

#[test]
fn sensors_csv_and_seeded_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let sensors: Vec<String> = (0..100)
        .map(|k| {
            let (x, y): (f64, f64) = (rng.gen_range(-200.0..200.0), rng.gen_range(-200.0..200.0));
            format!(r#"{{"name": "s{k}", "position": [{x}, {y}]}}"#)
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        &format!(
            r#"{{"scene_path": "{}", "budget_k": 3, "propagation": {{"knife_edge_enabled": true}}, "sensors": [{}]}}"#,
            fixtures().join("manhattan_3x3.json").display(),
            sensors.join(",")
        ),
    );
    let o = run_ok("coverage", &cfg, &[]);
    let out = dir.path().join("output");
    let (header, rows) = read_csv(&out.join("sensors.csv"));
    assert_eq!(header, ["name", "x", "y", "cell", "site_id", "snr_db"]);
    assert_eq!(rows.len(), 100);
    let covered = rows.iter().filter(|r| !r[4].is_empty()).count();

    // each reading agrees with the association raster at the same cell
    let (_, assoc) = read_csv(&out.join("association.csv"));
    for r in &rows {
        let n: usize = r[3].parse().unwrap();
        assert_eq!(assoc[n][5], r[4]);
        assert_eq!(assoc[n][6], r[5]);
    }

    let (_, table) = read_csv(&out.join("coverage_table.csv"));
    let area_pct: f64 = table[2][1].parse().unwrap();
    assert_eq!(covered, 90, "seed-fixed sample regression value");
    assert!(
        (covered as f64 - area_pct).abs() <= 3.0,
        "sensors {covered}% vs area {area_pct}%"
    );
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains(&format!("sensors: {covered} of 100 covered")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    // missing config file: I/O
    assert_eq!(code(&run("place", &d.join("nope.json"), &[])), 3);

    // malformed and invalid configs: validation
    let bad = write(d, "bad.json", "{ nope");
    assert_eq!(code(&run("place", &bad, &[])), 2);
    let zero = write(
        d,
        "zero.json",
        r#"{"scene_path": "scene.json", "budget_k": 0}"#,
    );
    assert_eq!(code(&run("place", &zero, &[])), 2);
    let cfg = minimal_config(d, EMPTY_SCENE, "");
    assert_eq!(code(&run("place", &cfg, &["--budget", "0"])), 2);

    // missing scene: I/O
    let no_scene = write(
        d,
        "noscene.json",
        r#"{"scene_path": "missing.json", "budget_k": 1}"#,
    );
    assert_eq!(code(&run("pathgain", &no_scene, &[])), 3);

    // bad material reference: validation, with the building named
    let bad_scene = EMPTY_SCENE.replacen(
        "\"sites\"",
        r#""buildings": [{"id": 4, "footprint": [[0,0],[9,0],[9,9],[0,9]], "height_m": 10, "material": "conrete"}], "sites""#,
        1,
    );
    write(d, "bad_scene.json", &bad_scene);
    let bs = write(
        d,
        "bs.json",
        r#"{"scene_path": "bad_scene.json", "budget_k": 1}"#,
    );
    let o = run("pathgain", &bs, &[]);
    assert_eq!(code(&o), 2);
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("building 4: unresolved material \"conrete\"")
    );

    // imported gain file missing (I/O) and with the wrong dimensions (validation)
    let imp = write(
        d,
        "imp.json",
        r#"{"scene_path": "scene.json", "budget_k": 1, "imported_gain_paths": {"0": "g.pgg"}}"#,
    );
    assert_eq!(code(&run("coverage", &imp, &[])), 3);
    let small = GridSpec::new(Point2::new(0.0, 0.0), 5.0, 5.0, 3, 3, 1.5).unwrap();
    let wrong = PathGainMap::computed(0, small, vec![-80.0; 9]).unwrap();
    fs::write(d.join("g.pgg"), encode_pgg(&wrong)).unwrap();
    let o = run("coverage", &imp, &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension mismatch"));

    // imported site that is not in the scene
    let ghost = write(
        d,
        "ghost.json",
        r#"{"scene_path": "scene.json", "budget_k": 1, "imported_gain_paths": {"7": "g.pgg"}}"#,
    );
    assert_eq!(code(&run("coverage", &ghost, &[])), 2);

    // report before anything else ran: missing inputs, listed by name
    let fresh = d.join("fresh");
    let o = run("report", &cfg, &["--out", fresh.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr)
        .contains("coverage_table.csv, selection.json, standalone.csv"));

    // exhaustive oracle over too many sites: computation
    let sites: Vec<String> = (0..21)
        .map(|i| {
            format!(
                r#"{{"id": {i}, "name": "s{i}", "position": [{}, 0, 10]}}"#,
                i * 4 - 40
            )
        })
        .collect();
    let many = EMPTY_SCENE.replacen(
        r#"[{"id": 0, "name": "mast", "position": [3, -4, 25]}]"#,
        &format!("[{}]", sites.join(",")),
        1,
    );
    write(d, "many.json", &many);
    let m = write(d, "m.json", r#"{"scene_path": "many.json", "budget_k": 2}"#);
    assert_eq!(code(&run("place", &m, &["--oracle"])), 4);
    assert_eq!(code(&run("place", &m, &[])), 0);

    // unknown flag: usage error
    assert_eq!(code(&run("pathgain", &cfg, &["--oracle"])), 2);
}
