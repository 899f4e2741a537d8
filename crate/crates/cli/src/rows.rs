//! Flat report rows emitted by the subcommands.

use almostrep::report::Record;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectRow {
    pub kind: String,
    pub item: String,
    pub defect: f64,
}

impl Record for DefectRow {
    const KIND: &'static str = "defect";
    const COLUMNS: &'static [&'static str] = &["kind", "item", "defect"];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperfiniteRow {
    pub mode: String,
    pub pass: bool,
    pub epsilon_measured: f64,
    pub d_measured: usize,
    pub dimension: usize,
    /// `size x multiplicity` per block, `;`-separated.
    pub blocks: String,
}

impl Record for HyperfiniteRow {
    const KIND: &'static str = "hyperfinite";
    const COLUMNS: &'static [&'static str] =
        &["mode", "pass", "epsilon_measured", "d_measured", "dimension", "blocks"];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub element: String,
    pub residual: f64,
}

impl Record for ResidualRow {
    const KIND: &'static str = "residual";
    const COLUMNS: &'static [&'static str] = &["element", "residual"];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnesRow {
    pub lambda1: f64,
    pub lambda2: f64,
    pub min_overlap: f64,
    pub overlap_bound: f64,
    pub epsilon_measured: f64,
    pub witness_distance: f64,
    pub lambda1_ok: bool,
    pub simple_top: bool,
    pub overlap_ok: bool,
    pub pass: bool,
}

impl Record for ConnesRow {
    const KIND: &'static str = "connes";
    const COLUMNS: &'static [&'static str] = &[
        "lambda1",
        "lambda2",
        "min_overlap",
        "overlap_bound",
        "epsilon_measured",
        "witness_distance",
        "lambda1_ok",
        "simple_top",
        "overlap_ok",
        "pass",
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleRow {
    pub group: String,
    pub cocycle: String,
    pub order: usize,
    pub triples_checked: usize,
    pub max_identity_violation: f64,
    pub max_modulus_violation: f64,
    pub non_coboundary: bool,
    pub twisted_defect: Option<f64>,
}

impl Record for CocycleRow {
    const KIND: &'static str = "cocycle";
    const COLUMNS: &'static [&'static str] = &[
        "group",
        "cocycle",
        "order",
        "triples_checked",
        "max_identity_violation",
        "max_modulus_violation",
        "non_coboundary",
        "twisted_defect",
    ];
}
