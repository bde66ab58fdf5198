//! Hierarchical stability analysis of finite gene-network dynamics through
//! base-p digit encodings.
//!
//! A network of N genes over p states is encoded into the integers below
//! `p^N`; a gene ordering decides which gene writes which digit. Balls of
//! states sharing their leading digits form a hierarchy, each ball is
//! classified as expanding, isometric, or contracting by comparing its width
//! with its image set's width, and the per-level counts roll up into three
//! exact scores. Minimizing the expanding score over orderings reveals which
//! genes the dynamics treat as most influential.
//!
//! Modules:
//! * [`padic`] — encodings, balls, and truncated p-adic scalars,
//! * [`network`] — the `.grn` file format, boolean rules, transition maps,
//! * [`stability`] — ball classification and scores,
//! * [`fixed_points`] — fixed points, orbits, classification sequences,
//! * [`search`] — exhaustive, branch-and-bound, and genetic ordering search,
//! * [`affine`] — per-ball affine models and their verification.

pub mod affine;
pub mod error;
pub mod fixed_points;
pub mod network;
pub mod padic;
pub mod search;
pub mod stability;

pub use affine::{
    build_affine_model, verify_level, verify_mapping_property, AffineLocalMap, BallVerification,
};
pub use error::{Error, Result};
pub use fixed_points::{
    classification_sequence, find_fixed_points, find_periodic_orbits, fixed_point_report,
    FixedPointReport,
};
pub use network::{
    build_transition_map, builtin_dataset, parse_network, parse_network_file, BooleanExpression,
    BuiltinDataset, NetworkDefinition, Rules, TransitionMap,
};
pub use padic::{
    checked_pow, common_prefix_length, decode, encode, encoded_distance, padic_abs,
    permute_encoding, truncate, unpermute_encoding, BallIndex, Configuration, EncodedState,
    Ordering, PadicScalar,
};
pub use search::{
    branch_and_bound_minimize, branch_and_bound_with, exhaustive_minimize,
    exhaustive_minimize_with_cap, ga_minimize, ga_minimize_with, minimizer_symmetry,
    partial_order_summary, Evaluator, GAConfig, OrderingBlock, SearchBudget, SearchEvent,
    SearchMethod, SearchResult,
};
pub use stability::{
    ball_stats, conjugate_by_ordering, expanding_set, level_counts, level_prefixes,
    permuted_images, scores_via_haar, stability_scores, BallStats, Class, LevelCounts,
    StabilityScores,
};
