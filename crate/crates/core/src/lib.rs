//! Color-statistics image retrieval.
//!
//! Images are reduced to a small [`FeatureVector`]: a pixel-count
//! threshold plus per-channel mean, composite median and composite
//! standard deviation. An [`IndexStore`] holds those vectors for a
//! directory, partitioned into threshold groups, and [`query::execute`]
//! ranks the store against a query image with one of five methods and a
//! user-chosen difference factor.

pub mod error;
pub mod features;
pub mod index;
pub mod query;
pub mod raster;

pub use error::{Error, Result};
pub use features::{extract_features, FeatureVector};
pub use index::{build_index, load, save, IndexOptions, IndexStore, ThresholdGroup};
pub use query::{
    evaluate, execute, Channel, ChannelSet, Method, QueryImage, QuerySpec, RankColumn, RankMatrix,
    RankedItem, RankedList, Scope, StatKind,
};
pub use raster::{decode, RgbRaster};
