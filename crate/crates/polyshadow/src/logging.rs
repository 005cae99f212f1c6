//! Minimal stderr logger gated by the `SHADOW_LOG` environment variable.
//!
//! Levels are `error` (default), `info`, and `debug`; each level includes the
//! ones above it. The variable is read once per process.

use std::sync::OnceLock;

/// Verbosity levels, ordered so that a comparison decides emission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Error = 0,
    Info = 1,
    Debug = 2,
}

static LEVEL: OnceLock<Level> = OnceLock::new();

/// Current level from `SHADOW_LOG`; unknown values fall back to `error`.
pub fn level() -> Level {
    *LEVEL.get_or_init(|| match std::env::var("SHADOW_LOG").as_deref() {
        Ok("debug") => Level::Debug,
        Ok("info") => Level::Info,
        _ => Level::Error,
    })
}

/// Emit a message to stderr when `at` is enabled.
pub fn log(at: Level, msg: &str) {
    if at <= level() {
        let tag = match at {
            Level::Error => "error",
            Level::Info => "info",
            Level::Debug => "debug",
        };
        eprintln!("[shadow:{tag}] {msg}");
    }
}

/// Convenience wrapper for error-level messages.
pub fn error(msg: &str) {
    log(Level::Error, msg);
}

/// Convenience wrapper for info-level messages.
pub fn info(msg: &str) {
    log(Level::Info, msg);
}

/// Convenience wrapper for debug-level messages.
pub fn debug(msg: &str) {
    log(Level::Debug, msg);
}
