//! Command-line front end for `relaynet`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod commands;
pub mod experiment;
pub mod table;
pub mod verify;
