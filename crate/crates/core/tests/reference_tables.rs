mod common;

use common::*;
use hue_rank_core::query::{combo_value, score, stat_of};
use hue_rank_core::{evaluate, Channel, ChannelSet, Method, QuerySpec, RankColumn, Scope};

fn names(store: &hue_rank_core::IndexStore) -> Vec<String> {
    store.names().map(String::from).collect()
}

fn column_ranks(label: &str, fixture_name: &str) -> Vec<(String, usize)> {
    let store = load_fixture(fixture_name);
    let m = evaluate(&store, &names(&store), &RankColumn::standard_set()).unwrap();
    let mut col: Vec<(String, usize)> = m
        .column(label)
        .unwrap()
        .into_iter()
        .map(|(n, r)| (n.to_string(), r))
        .collect();
    col.sort_by_key(|(_, r)| *r);
    col
}

fn order(col: &[(String, usize)]) -> Vec<&str> {
    col.iter().map(|(n, _)| n.trim_end_matches(".jpg")).collect()
}

#[test]
fn stats_table_values_load() {
    let store = load_fixture("stats_table.csv");
    let fv = store.get("818.jpg").unwrap();
    assert_eq!(fv.mean_r, 124.0);
    assert_eq!(stat_of(fv, Method::Pm5, Channel::R), 10.31);
    assert_eq!(stat_of(fv, Method::Pm1, Channel::R), 124.0);
    assert_eq!(store.get("808.jpg").unwrap().std_r, 22.85);
}

#[test]
fn rmean_table_values_load() {
    let store = load_fixture("rmean_table.csv");
    let spec = QuerySpec::new(Method::Pm1, ChannelSet::single(Channel::R), 0.0, Scope::Corpus).unwrap();
    assert_eq!(combo_value(store.get("993.jpg").unwrap(), &spec), 82.29895);
    assert_eq!(store.get("998.jpg").unwrap().mean_r, 63.36859);
    let s = score(store.get("995.jpg").unwrap(), store.get("994.jpg").unwrap(), &spec);
    assert!((s - 35.12834).abs() < 1e-5, "{s}");
}

#[test]
fn rank_table_columns_that_follow_printed_values() {
    // Columns whose printed values fully determine an ascending order.
    let expected = [
        ("mean_r", ["808", "820", "800", "828", "824", "814", "818"]),
        ("mean_b", ["818", "808", "824", "800", "820", "828", "814"]),
        ("median_r", ["808", "820", "800", "828", "824", "814", "818"]),
        ("median_g", ["818", "800", "824", "808", "828", "820", "814"]),
        ("median_b", ["800", "818", "808", "824", "820", "828", "814"]),
        ("std_r", ["818", "824", "800", "828", "814", "820", "808"]),
        ("std_g", ["800", "828", "824", "820", "818", "808", "814"]),
    ];
    for (label, want) in expected {
        assert_eq!(order(&column_ranks(label, "stats_table.csv")), want, "{label}");
    }
}

#[test]
fn rmean_column_matches_table() {
    assert_eq!(
        order(&column_ranks("mean_r", "rmean_table.csv")),
        ["998", "997", "995", "993", "992", "991", "996", "994"]
    );
}

#[test]
fn query_by_lowest_mean_reproduces_rank_order() {
    let store = load_fixture("rmean_table.csv");
    let spec = QuerySpec::new(Method::Pm1, ChannelSet::single(Channel::R), f64::INFINITY, Scope::Corpus).unwrap();
    let list = run(&store, "998.jpg", &spec);
    let got: Vec<&str> = list.results.iter().map(|r| r.name.trim_end_matches(".jpg")).collect();
    assert_eq!(got, ["998", "997", "995", "993", "992", "991", "996", "994"]);
}

#[test]
fn df_zero_keeps_query() {
    let store = load_fixture("stats_table.csv");
    let spec = QuerySpec::new(Method::Pm5, "g".parse().unwrap(), 0.0, Scope::Group).unwrap();
    let list = run(&store, "820.jpg", &spec);
    assert_eq!(list.results.len(), 1);
    assert_eq!((list.results[0].name.as_str(), list.results[0].score), ("820.jpg", 0.0));
    assert_eq!(list.excluded, 6);
}
