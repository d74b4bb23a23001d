use std::collections::BTreeMap;

use ccafactor::panel::*;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn m(s: &str) -> Month {
    s.parse().unwrap()
}

fn random_records(n: usize, seed: u64) -> Vec<LoanRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = m("2007-06");
    (0..n)
        .map(|_| {
            let month = start.offset(rng.random_range(0..60));
            let rate = 5.0 + 20.0 * rng.random::<f64>();
            let grade = Grade::ALL[rng.random_range(0..6)];
            let term = Term::ALL[rng.random_range(0..2)];
            LoanRecord::new(month, rate, grade, term).unwrap()
        })
        .collect()
}

/// Brute-force group-by: one pass per bucket, sum in sorted order.
fn group_by_oracle(records: &[LoanRecord]) -> BTreeMap<(String, Month), f64> {
    let mut groups: BTreeMap<(String, Month), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry((series_name(r.term, r.grade), r.origination_month)).or_default().push(r.rate);
    }
    groups
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by(f64::total_cmp);
            let n = v.len() as f64;
            (k, v.into_iter().sum::<f64>() / n)
        })
        .collect()
}

#[test]
fn aggregation_matches_group_by_oracle() {
    let records = random_records(10_000, 42);
    let panel = aggregate_loans(&records).unwrap();
    let oracle = group_by_oracle(&records);
    let mut seen = 0;
    for (j, key) in panel.columns().iter().enumerate() {
        for (t, month) in panel.months().iter().enumerate() {
            let got = panel.column(j)[t];
            match oracle.get(&(key.name.clone(), *month)) {
                Some(&want) => {
                    assert_eq!(got, Some(want), "{} {}", key.name, month);
                    seen += 1;
                }
                None => assert_eq!(got, None),
            }
        }
    }
    assert_eq!(seen, oracle.len());
}

#[test]
fn two_loans_same_bucket() {
    let recs = [
        LoanRecord::new(m("2012-01"), 10.0, Grade::C, Term::M60).unwrap(),
        LoanRecord::new(m("2012-01"), 12.0, Grade::C, Term::M60).unwrap(),
    ];
    let p = aggregate_loans(&recs).unwrap();
    assert_eq!(p.column(p.column_index("60-C").unwrap()), &[Some(11.0)]);
    assert!(matches!(aggregate_loans(&[]), Err(ccafactor::Error::NoRecords)));
}

fn curve_for(panel: &AlignedPanel, seed: u64) -> Vec<YieldCurvePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &month in panel.months() {
        for maturity in [36, 60] {
            out.push(YieldCurvePoint { month, maturity_months: maturity, yield_pct: 0.5 + 2.0 * rng.random::<f64>() });
        }
    }
    out
}

#[test]
fn spreads_match_elementwise_oracle() {
    let panel = aggregate_loans(&random_records(3_000, 7)).unwrap();
    let curve = curve_for(&panel, 8);
    let lookup: BTreeMap<(Month, u32), f64> = curve.iter().map(|p| ((p.month, p.maturity_months), p.yield_pct)).collect();
    let spreads = to_spreads(&panel, &curve).unwrap();
    for (j, key) in panel.columns().iter().enumerate() {
        let maturity: u32 = key.name[..2].parse().unwrap();
        for (t, month) in panel.months().iter().enumerate() {
            let want = panel.column(j)[t].map(|r| r - lookup[&(*month, maturity)]);
            assert_eq!(spreads.column(j)[t], want);
        }
        assert_eq!(spreads.columns()[j].kind, SeriesKind::SpreadLevel);
    }
}

#[test]
fn spread_examples_and_missing_curve() {
    let recs = [LoanRecord::new(m("2015-12"), 6.37, Grade::A, Term::M36).unwrap()];
    let panel = aggregate_loans(&recs).unwrap();
    let curve = [YieldCurvePoint { month: m("2015-12"), maturity_months: 36, yield_pct: 1.0 }];
    let s = to_spreads(&panel, &curve).unwrap();
    assert!((s.column(0)[0].unwrap() - 5.37).abs() < 1e-12);
    let curve = [YieldCurvePoint { month: m("2015-12"), maturity_months: 36, yield_pct: 6.37 }];
    assert_eq!(to_spreads(&panel, &curve).unwrap().column(0)[0], Some(0.0));

    let recs = [LoanRecord::new(m("2015-11"), 6.0, Grade::A, Term::M60).unwrap()];
    let err = to_spreads(&aggregate_loans(&recs).unwrap(), &curve).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("2015-11") && msg.contains("60"), "{msg}");
}

fn one_column(start: &str, vals: Vec<Option<f64>>) -> AlignedPanel {
    let months = (0..vals.len()).map(|t| m(start).offset(t as i64)).collect();
    AlignedPanel::new(months, vec![SeriesKey::new("36-A", SeriesKind::SpreadLevel)], vec![vals]).unwrap()
}

#[test]
fn first_difference_matches_shift_subtract() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let vals: Vec<f64> = (0..80).map(|_| rng.random::<f64>() * 10.0).collect();
    let d = first_difference(&one_column("2010-05", vals.iter().map(|&v| Some(v)).collect())).unwrap();
    let oracle: Vec<Option<f64>> = vals[1..].iter().zip(&vals[..79]).map(|(b, a)| Some(b - a)).collect();
    assert_eq!(d.column(0), oracle.as_slice());
    assert_eq!(d.start_month(), m("2010-06"));
    assert_eq!(d.columns()[0].kind, SeriesKind::SpreadDiff);

    let d = first_difference(&one_column("2010-05", vec![Some(1.0), Some(3.0), Some(6.0)])).unwrap();
    assert_eq!(d.column(0), &[Some(2.0), Some(3.0)]);
    assert!(first_difference(&one_column("2010-05", vec![Some(1.0), None, Some(2.0)])).is_err());
}

#[test]
fn interpolation_examples() {
    let s = interpolate_quarterly(&[(m("2014-01"), 3.0), (m("2014-04"), 6.0)]).unwrap();
    assert_eq!(s.values, vec![3.0, 4.0, 5.0, 6.0]);
    assert_eq!(s.get(m("2014-05")), None);
    let c = interpolate_quarterly(&[(m("2014-01"), 2.0), (m("2014-04"), 2.0), (m("2014-07"), 2.0)]).unwrap();
    assert!(c.values.iter().all(|&v| v == 2.0));
    assert!(interpolate_quarterly(&[(m("2014-04"), 2.0), (m("2014-01"), 2.0)]).is_err());
}

#[test]
fn intersect_matches_published_span() {
    let a = one_column("2007-06", vec![Some(1.0); m("2007-06").months_until(m("2015-12")) as usize + 1]);
    let mut b = one_column("2010-05", vec![Some(2.0); m("2010-05").months_until(m("2015-12")) as usize + 1]);
    b = AlignedPanel::new(
        b.months().to_vec(),
        vec![SeriesKey::new("60-A", SeriesKind::SpreadLevel)],
        vec![b.column(0).to_vec()],
    )
    .unwrap();
    let out = align(&[a.clone(), b], AlignPolicy::Intersect).unwrap();
    assert_eq!(out.start_month(), m("2010-05"));
    assert_eq!(*out.months().last().unwrap(), m("2015-12"));
    assert!(out.is_contiguous() && out.is_complete());

    let same = align(&[a.clone()], AlignPolicy::Intersect).unwrap();
    assert_eq!(same.months(), a.months());
}

#[test]
fn intersect_matches_row_scan_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 50;
    let months: Vec<Month> = (0..n).map(|t| m("2012-01").offset(t)).collect();
    let cols: Vec<Vec<Option<f64>>> = (0..4)
        .map(|_| (0..n).map(|t| if rng.random::<f64>() < 0.15 { None } else { Some(t as f64) }).collect())
        .collect();
    let keys = (0..4).map(|j| SeriesKey::new(format!("s{j}"), SeriesKind::Macro)).collect();
    let panel = AlignedPanel::new(months.clone(), keys, cols.clone()).unwrap();
    let out = align(&[panel], AlignPolicy::Intersect).unwrap();
    let oracle: Vec<Month> = (0..n as usize).filter(|&t| cols.iter().all(|c| c[t].is_some())).map(|t| months[t]).collect();
    assert_eq!(out.months(), oracle.as_slice());
    assert!(out.is_complete());
}

#[test]
fn union_keeps_missing_markers() {
    let a = one_column("2010-01", vec![Some(1.0), Some(2.0)]);
    let b = AlignedPanel::new(
        vec![m("2010-03")],
        vec![SeriesKey::new("60-A", SeriesKind::SpreadLevel)],
        vec![vec![Some(5.0)]],
    )
    .unwrap();
    let u = align(&[a.clone(), b.clone()], AlignPolicy::Union).unwrap();
    assert_eq!(u.n_rows(), 3);
    assert_eq!(u.column(0), &[Some(1.0), Some(2.0), None]);
    assert_eq!(u.column(1), &[None, None, Some(5.0)]);
    assert!(matches!(align(&[a, b], AlignPolicy::Intersect), Err(ccafactor::Error::EmptyOverlap)));
}

fn record_strategy() -> impl Strategy<Value = Vec<(i64, f64, usize, usize)>> {
    prop::collection::vec((0i64..24, 1.0f64..30.0, 0usize..6, 0usize..2), 1..200)
}

fn to_records(raw: &[(i64, f64, usize, usize)]) -> Vec<LoanRecord> {
    raw.iter()
        .map(|&(o, r, g, t)| LoanRecord::new(m("2011-01").offset(o), r, Grade::ALL[g], Term::ALL[t]).unwrap())
        .collect()
}

proptest! {
    #[test]
    fn aggregation_is_permutation_invariant(raw in record_strategy(), seed in any::<u64>()) {
        let records = to_records(&raw);
        let mut shuffled = records.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        prop_assert_eq!(aggregate_loans(&records).unwrap(), aggregate_loans(&shuffled).unwrap());
    }

    #[test]
    fn spreads_plus_curve_reconstruct_rates(raw in record_strategy(), seed in any::<u64>()) {
        // Quarter-point values keep the subtraction exact.
        let records: Vec<LoanRecord> = to_records(&raw)
            .into_iter()
            .map(|r| LoanRecord { rate: (r.rate * 4.0).round().max(1.0) / 4.0, ..r })
            .collect();
        let panel = aggregate_loans(&records).unwrap();
        let curve: Vec<YieldCurvePoint> = curve_for(&panel, seed)
            .into_iter()
            .map(|p| YieldCurvePoint { yield_pct: (p.yield_pct * 4.0).round() / 4.0, ..p })
            .collect();
        let lookup: BTreeMap<(Month, u32), f64> =
            curve.iter().map(|p| ((p.month, p.maturity_months), p.yield_pct)).collect();
        let spreads = to_spreads(&panel, &curve).unwrap();
        for j in 0..panel.n_cols() {
            let maturity: u32 = panel.columns()[j].name[..2].parse().unwrap();
            for (t, month) in panel.months().iter().enumerate() {
                let back = spreads.column(j)[t].map(|s| s + lookup[&(*month, maturity)]);
                prop_assert_eq!(back, panel.column(j)[t]);
            }
        }
    }

    #[test]
    fn linear_series_differences_are_constant(a in -100i32..100, b in -20i32..20, len in 2usize..60) {
        let vals = (0..len).map(|t| Some(a as f64 + b as f64 * t as f64)).collect();
        let d = first_difference(&one_column("2010-01", vals)).unwrap();
        prop_assert!(d.column(0).iter().all(|&v| v == Some(b as f64)));
    }

    #[test]
    fn interpolation_is_piecewise_linear(
        anchors in prop::collection::vec(-50.0f64..50.0, 2..12),
    ) {
        let points: Vec<(Month, f64)> =
            anchors.iter().enumerate().map(|(i, &v)| (m("2005-01").offset(3 * i as i64), v)).collect();
        let s = interpolate_quarterly(&points).unwrap();
        prop_assert_eq!(s.values.len(), 3 * (anchors.len() - 1) + 1);
        for (month, v) in &points {
            prop_assert_eq!(s.get(*month), Some(*v));
        }
        for q in 0..anchors.len() - 1 {
            let base = 3 * q;
            let second = s.values[base + 2] - 2.0 * s.values[base + 1] + s.values[base];
            prop_assert!(second.abs() < 1e-9);
            let second = s.values[base + 3] - 2.0 * s.values[base + 2] + s.values[base + 1];
            prop_assert!(second.abs() < 1e-9);
        }
    }

    #[test]
    fn intersect_is_contiguous_subgrid(s1 in 0i64..30, l1 in 1i64..40, s2 in 0i64..30, l2 in 1i64..40) {
        let base = m("2009-01");
        let mk = |start: i64, len: i64, name: &str| {
            let months: Vec<Month> = (0..len).map(|t| base.offset(start + t)).collect();
            AlignedPanel::new(months, vec![SeriesKey::new(name, SeriesKind::Macro)], vec![vec![Some(1.0); len as usize]])
                .unwrap()
        };
        let a = mk(s1, l1, "a");
        let b = mk(s2, l2, "b");
        match align(&[a.clone(), b.clone()], AlignPolicy::Intersect) {
            Ok(out) => {
                prop_assert!(out.is_contiguous());
                for p in [&a, &b] {
                    prop_assert!(out.months().iter().all(|mo| p.months().contains(mo)));
                }
            }
            Err(e) => {
                prop_assert!(matches!(e, ccafactor::Error::EmptyOverlap));
                prop_assert!(s1 + l1 <= s2 || s2 + l2 <= s1);
            }
        }
    }
}
