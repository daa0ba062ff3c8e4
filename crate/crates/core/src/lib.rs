//! Community-aware influence maximization under the Independent Cascade model.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] holds the immutable undirected [`Graph`] and the neighbourhood
//!   queries everything else is built on.
//! * [`community`] provides structural similarities and the agglomerative
//!   clustering that produces a disjoint [`Partition`].
//! * [`diffusion`] simulates Independent Cascade, estimates spread by Monte
//!   Carlo, and contains exact live-edge oracles for small graphs.
//! * [`scoring`] computes the propagator score used to rank singleton nodes.
//! * [`seedsel`] implements the community-based selector together with the
//!   Greedy and CELF baselines.

pub mod community;
pub mod diffusion;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod rng;
pub mod scoring;
pub mod seedsel;

pub use community::{
    hierarchical_clustering, modularity, overlapping_nodes, partition_split, similarity_2s,
    similarity_alpha2s, size_com, Partition, SimilarityKind, SimilaritySpec, StoppingRule,
};
pub use diffusion::{
    brute_force_optimum, estimate_spread, exact_spread, simulate_once, DiffusionParams,
    SpreadEstimate,
};
pub use error::{Error, Result};
pub use graph::{load_edge_list, Distance, Graph, NodeId, NodeSet};
pub use scoring::{min_score_node, propagator_score, PropagatorScores, ScoreConfig};
pub use seedsel::{celf, greedy, select_community_based, Method, SeedSet, SelectionTrace};
