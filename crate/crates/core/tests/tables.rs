use fdsi::models::{DeltaKind, FitTables};
use fdsi::neighborhood::NeighborhoodSpec;
use fdsi::stats::{GammaFitDb, Parametrization};

type Cells = Vec<Option<(f64, f64)>>;

/// Independent plain-text transcription of the published fit tables.
fn fixture() -> Vec<(String, Vec<(String, Cells)>)> {
    let mut sections = Vec::new();
    for line in include_str!("data/fit_tables.txt").lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            sections.push((name.trim_end_matches(']').to_string(), Vec::new()));
            continue;
        }
        let mut fields = line.split('|');
        let label = fields.next().unwrap().to_string();
        let cells = fields
            .map(|f| {
                if f == "---" {
                    return None;
                }
                let inner = f.trim_start_matches('(').trim_end_matches(')');
                let (a, b) = inner.split_once(',').unwrap();
                Some((a.parse().unwrap(), b.parse().unwrap()))
            })
            .collect();
        sections.last_mut().unwrap().1.push((label, cells));
    }
    sections
}

#[test]
fn embedded_tables_match_transcription() {
    let t = FitTables::embedded();
    let sections = fixture();
    assert_eq!(sections.len(), 5);
    let mut cells_checked = 0;
    for (name, rows) in &sections {
        for (label, cells) in rows {
            match name.as_str() {
                "range" | "min" | "max" => {
                    let dphi: u32 = label.parse().unwrap();
                    assert_eq!(cells.len(), 6);
                    for (dtheta, cell) in cells.iter().enumerate() {
                        let spec = NeighborhoodSpec::new(dtheta as u32, dphi);
                        match (name.as_str(), cell) {
                            ("range", None) => assert!(t.range_fit(spec).is_err()),
                            ("range", Some(c)) => assert_eq!(t.range_raw()[&spec], *c),
                            ("min", Some(c)) => {
                                let f = t.min_fit(spec).unwrap();
                                assert_eq!((f.mu_db, f.sigma2_db), *c);
                            }
                            ("max", Some(c)) => {
                                let f = t.max_fit(spec).unwrap();
                                assert_eq!((f.mu_db, f.sigma2_db), *c);
                            }
                            _ => unreachable!(),
                        }
                        cells_checked += 1;
                    }
                }
                "delta_min" | "delta_max" => {
                    let kind = if name == "delta_min" { DeltaKind::Min } else { DeltaKind::Max };
                    let d: u32 = label[1..2].parse().unwrap();
                    assert_eq!(label, &format!("({d},{d})"));
                    assert_eq!(cells.len(), 7);
                    for (k, cell) in cells.iter().enumerate() {
                        let raw = t.delta_table(kind).raw_cell(NeighborhoodSpec::new(d, d), k);
                        assert_eq!(raw, *cell);
                        cells_checked += 1;
                    }
                }
                other => panic!("unknown section {other}"),
            }
        }
    }
    assert_eq!(cells_checked, 36 * 3 + 35 * 2);
    let g = t.global().normal;
    assert_eq!((g.mu_db, g.sigma2_db), (20.32, 70.69));
}

#[test]
fn table_fingerprint() {
    // position-weighted sums over every stored number, frozen at build time
    let t = FitTables::embedded();
    let mut acc = 0.0;
    let mut w = 1.0;
    let mut push = |x: f64| {
        acc += w * x;
        w += 1.0;
    };
    for (a, b) in t.range_raw().values() {
        push(*a);
        push(*b);
    }
    for f in t.min_table().values().chain(t.max_table().values()) {
        push(f.mu_db);
        push(f.sigma2_db);
    }
    for kind in [DeltaKind::Min, DeltaKind::Max] {
        let d = t.delta_table(kind);
        for spec in d.diagonal_specs().collect::<Vec<_>>() {
            for k in 0..d.inr_columns_db().len() {
                let (a, b) = d.raw_cell(spec, k).unwrap();
                push(a);
                push(b);
            }
        }
    }
    assert!((acc - FINGERPRINT).abs() < 1e-6, "{acc}");
}

const FINGERPRINT: f64 = 1_441_196.65;

#[test]
fn only_scale_reading_is_consistent() {
    let scale = FitTables::embedded();
    let rate = scale.with_gamma_parametrization(Parametrization::Rate);
    let spec11 = NeighborhoodSpec::new(1, 1);
    let spec22 = NeighborhoodSpec::new(2, 2);

    // median of the (1,1) range fit should sit near 17 dB
    let median = |f: GammaFitDb| {
        let (mut lo, mut hi) = (0.0, 500.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if f.cdf(m) < 0.5 { lo = m } else { hi = m }
        }
        lo
    };
    let s = scale.range_fit(spec11).unwrap();
    let r = rate.range_fit(spec11).unwrap();
    assert!((s.mean() - 18.532).abs() < 1e-9);
    assert!((median(s) - 17.0).abs() <= 1.5);
    assert!((median(r) - 17.0).abs() > 1.5);

    // composed mean min at (2,2), 20 dB vs the unconditioned (2,2) min mean
    let mu_min = scale.min_fit(spec22).unwrap().mu_db;
    let composed = |t: &FitTables| 20.0 - t.delta_fit_lookup(DeltaKind::Min, spec22, 20.0).unwrap().fit.mean();
    assert!((composed(scale) - (-5.4031)).abs() < 1e-9);
    assert!((composed(scale) - mu_min).abs() <= 5.0);
    assert!((composed(&rate) - mu_min).abs() > 5.0);
}
