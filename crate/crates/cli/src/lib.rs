//! Command line front end and HTTP service for eralign analysis bundles.

pub mod commands;
pub mod service;
