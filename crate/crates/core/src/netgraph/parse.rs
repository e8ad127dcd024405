use super::{EdgeMode, Network, NetworkBuilder, TopologyError};
use crate::units::rate_multiplier;

/// Parses a topology document.
///
/// ```text
/// # comments run to end of line
/// mode full-duplex
/// node a b c
/// edge a b 20 Gbps
/// edge b c 10 Gb/s
/// ```
///
/// The `mode` header must precede every `node` and `edge` line. Every edge
/// endpoint must be declared by a `node` line first.
pub fn parse_topology(text: &str) -> Result<Network, TopologyError> {
    let mut builder: Option<NetworkBuilder> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut words = content.split_whitespace();
        let Some(keyword) = words.next() else {
            continue;
        };
        let args: Vec<&str> = words.collect();
        let malformed = |msg: String| TopologyError::Malformed { line, msg };
        match keyword {
            "mode" => {
                if builder.is_some() {
                    return Err(malformed("repeated `mode` header".into()));
                }
                let [mode] = args[..] else {
                    return Err(malformed("expected `mode <edge-mode>`".into()));
                };
                let mode: EdgeMode = mode.parse().map_err(malformed)?;
                builder = Some(NetworkBuilder::new(mode));
            }
            "node" => {
                let b = builder.as_mut().ok_or(TopologyError::MissingMode)?;
                if args.is_empty() {
                    return Err(malformed("expected `node <id> [<id> ...]`".into()));
                }
                for name in args {
                    b.add_node(name, line)?;
                }
            }
            "edge" => {
                let b = builder.as_mut().ok_or(TopologyError::MissingMode)?;
                let [u, v, cap, unit] = args[..] else {
                    return Err(malformed(
                        "expected `edge <u> <v> <capacity> <unit>`".into(),
                    ));
                };
                let value: f64 = cap
                    .parse()
                    .map_err(|_| malformed(format!("invalid capacity `{cap}`")))?;
                let mult = rate_multiplier(unit).map_err(|e| malformed(e.to_string()))?;
                b.add_edge(u, v, value * mult, line)?;
            }
            other => return Err(malformed(format!("unknown directive `{other}`"))),
        }
    }
    builder.ok_or(TopologyError::MissingMode)?.build()
}
