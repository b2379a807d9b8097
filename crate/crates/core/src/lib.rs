//! Braid monodromy factorizations of branch curves: exact braid arithmetic,
//! paths in the punctured disk, skeleton propagation, regeneration rules and
//! the degree/forgetting audits used to certify global factorizations.

pub mod arrangement;
pub mod braid;
pub mod disk;
pub mod engine;
pub mod error;
pub mod f222;
pub mod factorization;
pub mod garside;
pub mod notation;
pub mod regeneration;
pub mod verify;

pub use arrangement::{generic_lines, Arrangement, ArrangementError, ArrangementSpec, ParasiticBraid, VertexData, VertexKind};
pub use braid::{block_delta, delta, full_twist, BraidWord, Permutation};
pub use error::BraidError;
pub use garside::NormalForm;
pub use disk::{
    compile_path, embed_below, monotone_half_twist, rewrite_through_branch, Decoration, Direction, DiskError, DiskPath, Fiber, Label,
    Motion, MotionKind, PathExpr, Side, Skeleton,
};
pub use engine::{propagate, DeltaSpec, EngineError, SingularityRecord};
pub use factorization::{Factor, Factorization, Mismatch};
pub use notation::{
    elaborate, parse_document, parse_factorization, parse_items, parse_table, render, render_table, Document, Expr, Item,
    MacroKind, NotationError, Op, Table,
};
pub use regeneration::{
    apply_rule, k_point_chain, k_point_closed_form, k_point_fiber, k_point_items, k_point_step, regenerate, Action,
    DoublingMap, NodeVariant, RegenError, RegenRule, RuleKind, Substitution,
};
pub use verify::{
    forget, forget_degree, hurwitz_equiv_bounded, hurwitz_move, invariance_check, pair_positions, product_check,
    HurwitzOutcome, InvarianceResult, MoveDirection, ProductReport, VerifyError,
};
