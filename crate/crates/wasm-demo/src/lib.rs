//! Browser bindings for the demo page in `www/`.
//!
//! The page decodes images through a canvas and hands raw RGBA bytes to
//! [`features`]; the working corpus lives on the JS side as feature-file
//! CSV text and is passed back in for [`rank`] and [`rank_matrix`].
//! Every export returns JSON text.

use hue_rank_core::query::{execute_features, QuerySpec};
use hue_rank_core::raster::{histogram, to_gray};
use hue_rank_core::{evaluate, extract_features, FeatureVector, IndexStore, RankColumn, RgbRaster};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Seven-image statistics table bundled as the demo's starting corpus.
const SAMPLE_CORPUS: &str = include_str!("../../core/tests/fixtures/stats_table.csv");

#[derive(Serialize)]
struct FeaturesOut {
    features: FeatureVector,
    gray_histogram: Vec<u64>,
}

#[derive(Serialize)]
struct RankOut {
    query: String,
    results: Vec<hue_rank_core::RankedItem>,
    excluded: usize,
}

fn to_js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

fn json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn features_json(name: &str, width: usize, height: usize, rgba: &[u8]) -> Result<String, String> {
    let img = RgbRaster::from_rgba(width, height, rgba).map_err(|e| e.to_string())?;
    let features = extract_features(&img, name).map_err(|e| e.to_string())?;
    json(&FeaturesOut {
        features,
        gray_histogram: histogram(&to_gray(&img)).bins.to_vec(),
    })
}

/// Appends (or replaces) one image in a corpus CSV.
pub fn corpus_add_csv(corpus_csv: &str, features_json: &str) -> Result<String, String> {
    let added: FeatureVector = match serde_json::from_str::<serde_json::Value>(features_json) {
        Ok(v) if v.get("features").is_some() => serde_json::from_value(v["features"].clone()),
        Ok(v) => serde_json::from_value(v),
        Err(e) => Err(e),
    }
    .map_err(|e| e.to_string())?;
    let store = IndexStore::from_csv_str(corpus_csv).map_err(|e| e.to_string())?;
    let name = added.name.clone();
    let entries = store
        .entries()
        .filter(|fv| fv.name != name)
        .cloned()
        .chain(std::iter::once(added));
    let store = IndexStore::from_entries(entries).map_err(|e| e.to_string())?;
    Ok(store.to_csv_string())
}

pub fn rank_json(
    corpus_csv: &str,
    query_name: &str,
    method: &str,
    channels: &str,
    df: f64,
    scope: &str,
    top: usize,
) -> Result<String, String> {
    let store = IndexStore::from_csv_str(corpus_csv).map_err(|e| e.to_string())?;
    let spec = (|| {
        QuerySpec::new(method.parse()?, channels.parse()?, df, scope.parse()?)
    })()
    .map_err(|e: hue_rank_core::Error| e.to_string())?;
    let qfv = store.require(query_name).map_err(|e| e.to_string())?;
    let mut list = execute_features(&store, qfv, true, &spec).map_err(|e| e.to_string())?;
    list.truncate(top.max(1));
    json(&RankOut {
        query: list.query_name,
        results: list.results,
        excluded: list.excluded,
    })
}

pub fn rank_matrix_json(corpus_csv: &str) -> Result<String, String> {
    let store = IndexStore::from_csv_str(corpus_csv).map_err(|e| e.to_string())?;
    let names: Vec<String> = store.names().map(String::from).collect();
    let m = evaluate(&store, &names, &RankColumn::standard_set()).map_err(|e| e.to_string())?;
    json(&m)
}

/// Feature vector and gray histogram of an RGBA pixel buffer.
#[wasm_bindgen]
pub fn features(name: &str, width: usize, height: usize, rgba: &[u8]) -> Result<String, JsError> {
    to_js(features_json(name, width, height, rgba))
}

#[wasm_bindgen]
pub fn corpus_add(corpus_csv: &str, features_json: &str) -> Result<String, JsError> {
    to_js(corpus_add_csv(corpus_csv, features_json))
}

#[wasm_bindgen]
pub fn rank(
    corpus_csv: &str,
    query_name: &str,
    method: &str,
    channels: &str,
    df: f64,
    scope: &str,
    top: usize,
) -> Result<String, JsError> {
    to_js(rank_json(corpus_csv, query_name, method, channels, df, scope, top))
}

#[wasm_bindgen]
pub fn rank_matrix(corpus_csv: &str) -> Result<String, JsError> {
    to_js(rank_matrix_json(corpus_csv))
}

#[wasm_bindgen]
pub fn sample_corpus() -> String {
    SAMPLE_CORPUS.to_string()
}
