//! Property checks shared by the proptest suites and the acceptance run.

use std::collections::BTreeSet;

use hue_rank_core::features::{channel_mean, channel_median_composite, channel_std_composite, threshold};
use hue_rank_core::query::score;
use hue_rank_core::raster::Plane;
use hue_rank_core::{IndexStore, QuerySpec, RgbRaster};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::*;

pub fn statistics_match_oracle(w: usize, h: usize, samples: &[f64]) -> Result<(), TestCaseError> {
    let plane = Plane::new(w, h, samples.to_vec()).unwrap();
    let rows = rows_of(w, h, samples);
    let pairs = [
        ("mean", channel_mean(&plane).unwrap(), oracle_mean(&rows)),
        (
            "median",
            channel_median_composite(&plane).unwrap(),
            oracle_median_composite(&rows),
        ),
        ("std", channel_std_composite(&plane).unwrap(), oracle_std_composite(&rows)),
    ];
    for (what, got, want) in pairs {
        prop_assert!(rel_close(got, want, 1e-9), "{what} {w}x{h}: got {got}, oracle {want}");
    }
    Ok(())
}

pub fn threshold_is_pixel_count(w: usize, h: usize, rgb: &[u8]) -> Result<(), TestCaseError> {
    let img = RgbRaster::from_rgb(w, h, rgb).unwrap();
    prop_assert_eq!(threshold(&img), (w * h) as u64);
    Ok(())
}

fn names(list: &RankedList) -> BTreeSet<String> {
    list.results.iter().map(|r| r.name.clone()).collect()
}

pub fn df_monotonic(
    store: &IndexStore,
    query: &str,
    spec: &QuerySpec,
    df_a: f64,
    df_b: f64,
) -> Result<(), TestCaseError> {
    let (lo, hi) = if df_a <= df_b { (df_a, df_b) } else { (df_b, df_a) };
    let with = |df| QuerySpec::new(spec.method(), spec.channels(), df, spec.scope()).unwrap();
    let small = names(&run(store, query, &with(lo)));
    let large = names(&run(store, query, &with(hi)));
    prop_assert!(small.is_subset(&large), "df {lo} -> {small:?} not within df {hi} -> {large:?}");
    Ok(())
}

pub fn ranking_is_permutation(store: &IndexStore, query: &str, spec: &QuerySpec) -> Result<(), TestCaseError> {
    let list = run(store, query, spec);
    for (i, item) in list.results.iter().enumerate() {
        prop_assert_eq!(item.rank, i + 1);
        prop_assert!(item.score >= 0.0 && item.score <= spec.df());
    }
    prop_assert_eq!(&list.results[0].name, query);
    prop_assert_eq!(list.results[0].score, 0.0);
    for pair in list.results.windows(2) {
        prop_assert!(pair[0].score <= pair[1].score);
    }
    prop_assert_eq!(names(&list).len(), list.results.len());
    prop_assert_eq!(list.clone(), run(store, query, spec), "not deterministic");

    let oracle = oracle_execute(store, query, spec);
    let got: Vec<(String, f64)> = list.results.iter().map(|r| (r.name.clone(), r.score)).collect();
    prop_assert_eq!(got, oracle);
    Ok(())
}

pub fn score_symmetry(store: &IndexStore, spec: &QuerySpec) -> Result<(), TestCaseError> {
    let fvs: Vec<_> = store.entries().collect();
    for a in &fvs {
        prop_assert_eq!(score(a, a, spec), 0.0);
        for b in &fvs {
            let ab = score(a, b, spec);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, score(b, a, spec));
            for c in &fvs {
                let bound = ab + score(b, c, spec);
                prop_assert!(score(a, c, spec) <= bound + 1e-9 * bound.max(1.0));
            }
        }
    }
    Ok(())
}

pub fn group_within_corpus(store: &IndexStore, query: &str, spec: &QuerySpec) -> Result<(), TestCaseError> {
    let with = |scope| QuerySpec::new(spec.method(), spec.channels(), spec.df(), scope).unwrap();
    let group = run(store, query, &with(Scope::Group));
    let corpus = names(&run(store, query, &with(Scope::Corpus)));
    let members: BTreeSet<String> = store.group_of(query).unwrap().members.into_iter().collect();
    for r in &group.results {
        prop_assert!(corpus.contains(&r.name));
        prop_assert!(members.contains(&r.name));
    }
    Ok(())
}

pub fn save_load_round_trip(store: &IndexStore) -> Result<(), TestCaseError> {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("features.csv");
    hue_rank_core::save(store, &path).unwrap();
    let loaded = hue_rank_core::load(&path).unwrap();
    prop_assert_eq!(&loaded, store);
    let groups: usize = loaded.groups().map(|g| g.members.len()).sum();
    prop_assert_eq!(groups, loaded.len());
    let path2 = dir.path().join("again.csv");
    hue_rank_core::save(&loaded, &path2).unwrap();
    prop_assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    Ok(())
}

/// Writes the images, indexes the directory twice and compares the saved
/// feature files byte for byte.
pub fn reindex_is_deterministic(images: &[(u32, u32, Vec<u8>)]) -> Result<(), TestCaseError> {
    let dir = tempfile::tempdir().unwrap();
    for (i, (w, h, rgb)) in images.iter().enumerate() {
        image::RgbImage::from_raw(*w, *h, rgb.clone())
            .unwrap()
            .save(dir.path().join(format!("im{i:02}.png")))
            .unwrap();
    }
    let opts = hue_rank_core::IndexOptions::default();
    let out = tempfile::tempdir().unwrap();
    let mut saved = Vec::new();
    for k in 0..2 {
        let report = hue_rank_core::build_index(dir.path(), &opts).unwrap();
        prop_assert_eq!(report.store.len(), images.len());
        let p = out.path().join(format!("f{k}.csv"));
        hue_rank_core::save(&report.store, &p).unwrap();
        saved.push(std::fs::read(&p).unwrap());
    }
    prop_assert_eq!(&saved[0], &saved[1]);
    Ok(())
}

pub fn image_set_strategy() -> impl Strategy<Value = Vec<(u32, u32, Vec<u8>)>> {
    prop::collection::vec(
        (1u32..=6, 1u32..=6).prop_flat_map(|(w, h)| {
            (
                Just(w),
                Just(h),
                prop::collection::vec(any::<u8>(), (w * h * 3) as usize),
            )
        }),
        1..=8,
    )
}
