//! Command implementations and the websocket session server behind the
//! `buildzone` binary.

pub mod commands;
pub mod protocol;
pub mod server;
pub mod session;
