//! Brute-force oracles, fixtures and generators shared by the integration
//! tests. Nothing here calls into the statistics or ranking code under test.

#![allow(dead_code)]

use std::path::PathBuf;

use hue_rank_core::query::QueryImage;
use hue_rank_core::{
    execute, Channel, ChannelSet, FeatureVector, IndexStore, Method, QuerySpec, RankedList, Scope,
};
use proptest::prelude::*;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn load_fixture(name: &str) -> IndexStore {
    hue_rank_core::load(fixture(name)).expect("fixture loads")
}

// ---------------------------------------------------------------------------
// Statistics oracles, on a Vec-of-rows matrix.

pub fn rows_of(width: usize, height: usize, samples: &[f64]) -> Vec<Vec<f64>> {
    (0..height)
        .map(|r| (0..width).map(|c| samples[r * width + c]).collect())
        .collect()
}

pub fn oracle_mean(rows: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for row in rows {
        for v in row {
            total += v;
            count += 1;
        }
    }
    total / count as f64
}

fn oracle_median_of(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n.is_multiple_of(2) {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    } else {
        v[(n - 1) / 2]
    }
}

fn oracle_std_of(values: &[f64]) -> f64 {
    if values.len() <= 1 {
        return 0.0;
    }
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    (values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn columns(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let width = rows[0].len();
    (0..width)
        .map(|c| rows.iter().map(|row| row[c]).collect())
        .collect()
}

pub fn oracle_median_composite(rows: &[Vec<f64>]) -> f64 {
    let meds: Vec<f64> = columns(rows).iter().map(|c| oracle_median_of(c)).collect();
    oracle_median_of(&meds)
}

pub fn oracle_std_composite(rows: &[Vec<f64>]) -> f64 {
    let stds: Vec<f64> = columns(rows).iter().map(|c| oracle_std_of(c)).collect();
    oracle_std_of(&stds)
}

/// Relative closeness; values both below 1e-12 in magnitude count as equal
/// so that zero deviations compare cleanly.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    scale < 1e-12 || (a - b).abs() <= tol * scale
}

// ---------------------------------------------------------------------------
// Ranking oracle: score everything, filter, sort.

pub fn oracle_combo(fv: &FeatureVector, spec: &QuerySpec) -> f64 {
    let table = match spec.method() {
        Method::Pm1 | Method::Pm2 | Method::Pm3 => [fv.mean_r, fv.mean_g, fv.mean_b],
        Method::Pm4 => [fv.median_r, fv.median_g, fv.median_b],
        Method::Pm5 => [fv.std_r, fv.std_g, fv.std_b],
    };
    let picked: Vec<f64> = spec
        .channels()
        .iter()
        .map(|c| match c {
            Channel::R => table[0],
            Channel::G => table[1],
            Channel::B => table[2],
        })
        .collect();
    picked.iter().sum::<f64>() / picked.len() as f64
}

pub fn oracle_execute(store: &IndexStore, query: &str, spec: &QuerySpec) -> Vec<(String, f64)> {
    let q = store.get(query).unwrap();
    let qv = oracle_combo(q, spec);
    let mut all: Vec<(bool, String, f64)> = store
        .entries()
        .filter(|fv| spec.scope() == Scope::Corpus || fv.threshold == q.threshold)
        .map(|fv| (fv.name == query, fv.name.clone(), (qv - oracle_combo(fv, spec)).abs()))
        .filter(|(_, _, s)| *s <= spec.df())
        .collect();
    all.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then(a.2.partial_cmp(&b.2).unwrap())
            .then(a.1.cmp(&b.1))
    });
    all.into_iter().map(|(_, n, s)| (n, s)).collect()
}

pub fn run(store: &IndexStore, query: &str, spec: &QuerySpec) -> RankedList {
    execute(store, &QueryImage::Indexed(query.to_string()), spec).unwrap()
}

// ---------------------------------------------------------------------------
// Generators.

/// A plane as (width, height, samples in 0..=255 with fractional parts).
pub fn plane_strategy(max_side: usize) -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        (
            Just(w),
            Just(h),
            prop::collection::vec(
                prop_oneof![
                    (0u8..=255).prop_map(f64::from),
                    0.0f64..255.0,
                    // few distinct values so medians and deviations tie
                    (0u8..4).prop_map(|v| f64::from(v) * 10.0),
                ],
                w * h,
            ),
        )
    })
}

/// An 8-bit plane of the given maximum side.
pub fn byte_plane_strategy(max_side: usize) -> impl Strategy<Value = (usize, usize, Vec<u8>)> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        (Just(w), Just(h), prop::collection::vec(any::<u8>(), w * h))
    })
}

/// A real value on the feature file's six-decimal grid, drawn so that
/// exact ties are common.
fn stat_value() -> impl Strategy<Value = f64> {
    prop_oneof![
        (0u64..=255_000_000).prop_map(|v| v as f64 / 1e6),
        (0u32..8).prop_map(|v| f64::from(v) * 16.0),
    ]
}

pub fn feature_vector(name: String) -> impl Strategy<Value = FeatureVector> {
    (
        prop::sample::select(vec![(2u32, 2u32), (3, 3), (4, 1), (4, 4)]),
        prop::collection::vec(stat_value(), 9),
    )
        .prop_map(move |((w, h), s)| FeatureVector {
            name: name.clone(),
            width: w,
            height: h,
            threshold: u64::from(w * h),
            mean_r: s[0],
            mean_g: s[1],
            mean_b: s[2],
            median_r: s[3],
            median_g: s[4],
            median_b: s[5],
            std_r: s[6],
            std_g: s[7],
            std_b: s[8],
        })
}

/// A store of 1..=20 images named `img00.png`, `img01.png`, ...
pub fn store_strategy() -> impl Strategy<Value = IndexStore> {
    (1usize..=20).prop_flat_map(|n| {
        (0..n)
            .map(|i| feature_vector(format!("img{i:02}.png")))
            .collect::<Vec<_>>()
            .prop_map(|fvs| IndexStore::from_entries(fvs).unwrap())
    })
}

pub fn spec_strategy() -> impl Strategy<Value = QuerySpec> {
    let sets: Vec<ChannelSet> = ["r", "g", "b", "rg", "rb", "gb", "rgb"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let pairs: Vec<(Method, ChannelSet)> = Method::ALL
        .iter()
        .flat_map(|&m| {
            let (lo, hi) = m.arity();
            sets.iter()
                .filter(move |c| c.len() >= lo && c.len() <= hi)
                .map(move |&c| (m, c))
        })
        .collect();
    (
        prop::sample::select(pairs),
        prop_oneof![0.0f64..100.0, Just(0.0), Just(f64::INFINITY)],
        prop::sample::select(vec![Scope::Group, Scope::Corpus]),
    )
        .prop_map(|((m, c), df, scope)| QuerySpec::new(m, c, df, scope).unwrap())
}

/// A store together with one of its names.
pub fn store_and_query() -> impl Strategy<Value = (IndexStore, String)> {
    store_strategy().prop_flat_map(|store| {
        let names: Vec<String> = store.names().map(String::from).collect();
        (Just(store), prop::sample::select(names))
    })
}

pub mod checks;
