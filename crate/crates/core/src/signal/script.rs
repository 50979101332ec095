//! Script files are TOML:
//!
//! ```toml
//! key = "space"
//!
//! [[segment]]
//! kind = "soft_hold"      # idle | quick_strike | soft_hold | peak
//! duration_ms = 700
//! target_force_n = 0.8
//! rise_ms = 40            # optional, per-kind default otherwise
//!
//! [[segment]]
//! kind = "peak"
//! duration_ms = 400
//! target_force_n = 1.6
//! ```

use super::PressScript;
use crate::error::{Error, Result};

pub fn parse_script(text: &str) -> Result<PressScript> {
    let script: PressScript = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|span| text[..span.start].matches('\n').count() as u64 + 1)
            .unwrap_or(0);
        Error::parse(line, e.message().to_string())
    })?;
    script.validate()?;
    Ok(script)
}

pub fn script_to_toml(script: &PressScript) -> String {
    toml::to_string(script).expect("press scripts always serialize")
}
