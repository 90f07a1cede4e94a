// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Configuration, sweeps, figure experiments and table output for the
//! `ltm` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod sweep;
pub mod table;

pub use error::{CliError, Result};
pub use table::OutputTable;
