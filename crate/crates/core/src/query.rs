//! Query-by-example retrieval over an [`IndexStore`].
//!
//! Each method picks one statistic (mean, composite median or composite
//! standard deviation) on a set of channels. The selected channel values
//! are averaged into a single *combo value*; two images are compared by the
//! absolute difference of their combo values, and the difference factor
//! (`df`) is an inclusive cut-off on that score.

use std::cmp::Ordering;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureVector};
use crate::index::IndexStore;
use crate::raster::decode;

/// The five retrieval methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// One channel mean.
    Pm1,
    /// Two channel means (RG, RB or GB).
    Pm2,
    /// All three channel means.
    Pm3,
    /// All three composite medians.
    Pm4,
    /// Composite standard deviation on one to three channels.
    Pm5,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Pm1, Method::Pm2, Method::Pm3, Method::Pm4, Method::Pm5];

    pub fn stat(self) -> StatKind {
        match self {
            Method::Pm1 | Method::Pm2 | Method::Pm3 => StatKind::Mean,
            Method::Pm4 => StatKind::Median,
            Method::Pm5 => StatKind::Std,
        }
    }

    /// Inclusive range of channel counts the method accepts.
    pub fn arity(self) -> (usize, usize) {
        match self {
            Method::Pm1 => (1, 1),
            Method::Pm2 => (2, 2),
            Method::Pm3 | Method::Pm4 => (3, 3),
            Method::Pm5 => (1, 3),
        }
    }

    fn arity_message(self) -> String {
        match self.arity() {
            (1, 1) => format!("{self} takes exactly one channel"),
            (2, 2) => format!("{self} takes exactly two channels"),
            (3, 3) => format!("{self} takes exactly three channels"),
            (lo, hi) => format!("{self} takes {lo} to {hi} channels"),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = *self as u8 + 1;
        write!(f, "PM{n}")
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pm1" | "1" => Ok(Method::Pm1),
            "pm2" | "2" => Ok(Method::Pm2),
            "pm3" | "3" => Ok(Method::Pm3),
            "pm4" | "4" => Ok(Method::Pm4),
            "pm5" | "5" => Ok(Method::Pm5),
            _ => Err(Error::InvalidSpec(format!(
                "unknown method {s:?} (expected pm1..pm5)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatKind {
    Mean,
    Median,
    Std,
}

impl StatKind {
    pub fn label(self) -> &'static str {
        match self {
            StatKind::Mean => "mean",
            StatKind::Median => "median",
            StatKind::Std => "std",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    R,
    G,
    B,
}

impl Channel {
    pub fn letter(self) -> char {
        match self {
            Channel::R => 'r',
            Channel::G => 'g',
            Channel::B => 'b',
        }
    }
}

/// A non-empty set of channels, kept in R, G, B order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChannelSet {
    bits: u8,
}

impl ChannelSet {
    pub const RGB: ChannelSet = ChannelSet { bits: 0b111 };

    pub fn new(channels: &[Channel]) -> Result<Self> {
        let bits = channels.iter().fold(0u8, |acc, c| acc | 1 << (*c as u8));
        if bits == 0 {
            return Err(Error::InvalidSpec("at least one channel is required".into()));
        }
        if bits.count_ones() as usize != channels.len() {
            return Err(Error::InvalidSpec("channels must not repeat".into()));
        }
        Ok(ChannelSet { bits })
    }

    pub fn single(c: Channel) -> Self {
        ChannelSet { bits: 1 << (c as u8) }
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Channel> {
        [Channel::R, Channel::G, Channel::B]
            .into_iter()
            .filter(move |c| self.bits & (1 << (*c as u8)) != 0)
    }
}

impl fmt::Display for ChannelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.iter() {
            write!(f, "{}", c.letter())?;
        }
        Ok(())
    }
}

impl FromStr for ChannelSet {
    type Err = Error;

    /// Parses letters such as `r`, `gb` or `RGB`.
    fn from_str(s: &str) -> Result<Self> {
        let channels = s
            .chars()
            .filter(|c| !matches!(c, ',' | ' '))
            .map(|c| match c.to_ascii_lowercase() {
                'r' => Ok(Channel::R),
                'g' => Ok(Channel::G),
                'b' => Ok(Channel::B),
                other => Err(Error::InvalidSpec(format!("unknown channel {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        ChannelSet::new(&channels)
    }
}

impl Serialize for ChannelSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ChannelSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Candidate pool for a query: the query's threshold group, or every image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    #[default]
    Group,
    Corpus,
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "group" | "limit" => Ok(Scope::Group),
            "corpus" | "large" => Ok(Scope::Corpus),
            _ => Err(Error::InvalidSpec(format!(
                "unknown scope {s:?} (expected group or corpus)"
            ))),
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::Group => "group",
            Scope::Corpus => "corpus",
        })
    }
}

/// A validated retrieval request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuerySpec {
    method: Method,
    channels: ChannelSet,
    df: f64,
    scope: Scope,
}

impl QuerySpec {
    pub fn new(method: Method, channels: ChannelSet, df: f64, scope: Scope) -> Result<Self> {
        let (lo, hi) = method.arity();
        if channels.len() < lo || channels.len() > hi {
            return Err(Error::InvalidSpec(method.arity_message()));
        }
        if df.is_nan() || df < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "difference factor must be >= 0, got {df}"
            )));
        }
        Ok(QuerySpec {
            method,
            channels,
            df,
            scope,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn channels(&self) -> ChannelSet {
        self.channels
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }
}

pub fn stat_value(fv: &FeatureVector, stat: StatKind, channel: Channel) -> f64 {
    match (stat, channel) {
        (StatKind::Mean, Channel::R) => fv.mean_r,
        (StatKind::Mean, Channel::G) => fv.mean_g,
        (StatKind::Mean, Channel::B) => fv.mean_b,
        (StatKind::Median, Channel::R) => fv.median_r,
        (StatKind::Median, Channel::G) => fv.median_g,
        (StatKind::Median, Channel::B) => fv.median_b,
        (StatKind::Std, Channel::R) => fv.std_r,
        (StatKind::Std, Channel::G) => fv.std_g,
        (StatKind::Std, Channel::B) => fv.std_b,
    }
}

/// The statistic a method reads on one channel.
pub fn stat_of(fv: &FeatureVector, method: Method, channel: Channel) -> f64 {
    stat_value(fv, method.stat(), channel)
}

/// Mean of a statistic over a set of channels.
pub fn combined_stat(fv: &FeatureVector, stat: StatKind, channels: ChannelSet) -> f64 {
    let sum: f64 = channels.iter().map(|c| stat_value(fv, stat, c)).sum();
    sum / channels.len() as f64
}

pub fn combo_value(fv: &FeatureVector, spec: &QuerySpec) -> f64 {
    combined_stat(fv, spec.method.stat(), spec.channels)
}

pub fn score(query: &FeatureVector, target: &FeatureVector, spec: &QuerySpec) -> f64 {
    (combo_value(query, spec) - combo_value(target, spec)).abs()
}

/// Where the query image comes from.
#[derive(Debug, Clone)]
pub enum QueryImage {
    /// An image already in the index.
    Indexed(String),
    /// A file outside the index; its features are computed on the fly.
    External(PathBuf),
    /// Precomputed features of an image outside the index.
    Features(FeatureVector),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedItem {
    pub name: String,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub query_name: String,
    pub results: Vec<RankedItem>,
    /// Candidates inside the scope whose score exceeded `df`.
    pub excluded: usize,
}

impl RankedList {
    pub fn truncate(&mut self, top: usize) {
        self.results.truncate(top);
    }
}

/// Resolves the query's feature vector and whether it lives in the index.
pub fn resolve_query(store: &IndexStore, query: &QueryImage) -> Result<(FeatureVector, bool)> {
    match query {
        QueryImage::Indexed(name) => Ok((store.require(name)?.clone(), true)),
        QueryImage::External(path) => {
            let img = decode(path)?;
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .filter(|n| !n.is_empty())
                .unwrap_or_else(|| "query".to_string());
            Ok((extract_features(&img, &name)?, false))
        }
        QueryImage::Features(fv) => Ok((fv.clone(), false)),
    }
}

/// Runs one retrieval.
///
/// An indexed query image is always placed first (score 0). The remaining
/// results are sorted by ascending score, ties broken by name. External
/// query images never appear in the results.
pub fn execute(store: &IndexStore, query: &QueryImage, spec: &QuerySpec) -> Result<RankedList> {
    let (qfv, indexed) = resolve_query(store, query)?;
    execute_features(store, &qfv, indexed, spec)
}

pub fn execute_features(
    store: &IndexStore,
    qfv: &FeatureVector,
    indexed: bool,
    spec: &QuerySpec,
) -> Result<RankedList> {
    let candidates: Vec<&FeatureVector> = match spec.scope {
        Scope::Corpus => store.entries().collect(),
        Scope::Group => {
            let members = store.members_with_threshold(qfv.threshold);
            if members.is_empty() {
                return Err(Error::EmptyGroup {
                    threshold: qfv.threshold,
                });
            }
            members.iter().filter_map(|n| store.get(n)).collect()
        }
    };

    let query_value = combo_value(qfv, spec);
    let mut excluded = 0;
    let mut hits: Vec<(bool, f64, &str)> = Vec::with_capacity(candidates.len());
    for fv in candidates {
        let is_query = indexed && fv.name == qfv.name;
        let s = if is_query {
            0.0
        } else {
            (query_value - combo_value(fv, spec)).abs()
        };
        if s <= spec.df {
            hits.push((is_query, s, &fv.name));
        } else {
            excluded += 1;
        }
    }
    hits.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then_with(|| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
            .then_with(|| a.2.cmp(b.2))
    });

    Ok(RankedList {
        query_name: qfv.name.clone(),
        results: hits
            .into_iter()
            .enumerate()
            .map(|(i, (_, score, name))| RankedItem {
                name: name.to_string(),
                score,
                rank: i + 1,
            })
            .collect(),
        excluded,
    })
}

/// One column of a rank matrix: a statistic over a channel set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankColumn {
    pub stat: StatKind,
    pub channels: ChannelSet,
}

impl RankColumn {
    pub fn new(stat: StatKind, channels: ChannelSet) -> Self {
        RankColumn { stat, channels }
    }

    /// Column for a method on the given channels. Method arity is not
    /// enforced here so single-channel median columns can be tabulated.
    pub fn for_method(method: Method, channels: ChannelSet) -> Self {
        RankColumn::new(method.stat(), channels)
    }

    /// `mean_r`, `mean_rg`, `std_b`, ...
    pub fn label(&self) -> String {
        format!("{}_{}", self.stat.label(), self.channels)
    }

    /// The thirteen columns of the full comparison table: seven mean
    /// combinations, then single-channel medians and deviations.
    pub fn standard_set() -> Vec<RankColumn> {
        use Channel::*;
        let set = |cs: &[Channel]| ChannelSet::new(cs).expect("static channel sets are valid");
        let mut cols: Vec<RankColumn> = [
            &[R][..],
            &[G],
            &[B],
            &[R, G],
            &[R, B],
            &[G, B],
            &[R, G, B],
        ]
        .iter()
        .map(|cs| RankColumn::new(StatKind::Mean, set(cs)))
        .collect();
        for stat in [StatKind::Median, StatKind::Std] {
            for c in [R, G, B] {
                cols.push(RankColumn::new(stat, ChannelSet::single(c)));
            }
        }
        cols
    }
}

impl FromStr for RankColumn {
    type Err = Error;

    /// Parses `mean_rg`, `median_r`, `std_b` or `pm5:g` style labels.
    fn from_str(s: &str) -> Result<Self> {
        let (head, tail) = s
            .split_once(['_', ':'])
            .ok_or_else(|| Error::InvalidSpec(format!("bad column {s:?}")))?;
        let stat = match head.to_ascii_lowercase().as_str() {
            "mean" => StatKind::Mean,
            "median" => StatKind::Median,
            "std" | "sd" => StatKind::Std,
            other => other.parse::<Method>()?.stat(),
        };
        Ok(RankColumn::new(stat, tail.parse()?))
    }
}

/// Ranks of a fixed image subset under several columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankMatrix {
    pub names: Vec<String>,
    pub columns: Vec<String>,
    /// `ranks[row][col]`, 1-based.
    pub ranks: Vec<Vec<usize>>,
}

impl RankMatrix {
    pub fn column(&self, label: &str) -> Option<Vec<(&str, usize)>> {
        let c = self.columns.iter().position(|l| l == label)?;
        Some(
            self.names
                .iter()
                .zip(&self.ranks)
                .map(|(n, row)| (n.as_str(), row[c]))
                .collect(),
        )
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("name");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (name, row) in self.names.iter().zip(&self.ranks) {
            out.push_str(name);
            for r in row {
                out.push(',');
                out.push_str(&r.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Ranks `names` by ascending raw statistic in every column, ties broken
/// by name. Rows keep the order of `names`.
pub fn evaluate(store: &IndexStore, names: &[String], columns: &[RankColumn]) -> Result<RankMatrix> {
    let fvs: Vec<&FeatureVector> = names
        .iter()
        .map(|n| store.require(n))
        .collect::<Result<_>>()?;
    let mut ranks = vec![vec![0usize; columns.len()]; names.len()];
    for (ci, col) in columns.iter().enumerate() {
        let mut order: Vec<(f64, &str, usize)> = fvs
            .iter()
            .enumerate()
            .map(|(row, fv)| (combined_stat(fv, col.stat, col.channels), fv.name.as_str(), row))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        for (pos, (_, _, row)) in order.into_iter().enumerate() {
            ranks[row][ci] = pos + 1;
        }
    }
    Ok(RankMatrix {
        names: names.to_vec(),
        columns: columns.iter().map(RankColumn::label).collect(),
        ranks,
    })
}
