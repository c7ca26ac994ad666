//! CSV rendering. Numbers use Rust's locale-independent formatting and
//! lines end with `\n`.

use std::fmt::Write;

use slicer_core::{MetricsRecord, SimulationConfig};

pub const COLUMNS: &str =
    "cycle,gdm,sdm,messages_sent,useless_messages,unsuccessful_swaps,live_nodes";

/// `#` comment lines echoing every config field, then `extra` lines.
pub fn header(title: &str, config: &SimulationConfig, extra: &[String]) -> String {
    let mut out = format!("# {title}\n");
    for (k, v) in config.pairs() {
        // seed is echoed separately; the config's own value is not what ran.
        if k != "seed" {
            let _ = writeln!(out, "# {k}={v}");
        }
    }
    for line in extra {
        let _ = writeln!(out, "# {line}");
    }
    out
}

pub fn row(r: &MetricsRecord) -> String {
    let gdm = r.gdm.map(|g| g.to_string()).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{}",
        r.cycle,
        gdm,
        r.sdm,
        r.messages_sent,
        r.useless_messages,
        r.unsuccessful_swaps,
        r.live_nodes
    )
}

pub fn table(header: &str, records: &[MetricsRecord]) -> String {
    let mut out = String::with_capacity(header.len() + 64 * (records.len() + 1));
    out.push_str(header);
    out.push_str(COLUMNS);
    out.push('\n');
    for r in records {
        out.push_str(&row(r));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_gdm_for_ranking_rows() {
        let r = MetricsRecord {
            cycle: 3,
            gdm: None,
            sdm: 1.5,
            live_nodes: 10,
            ..Default::default()
        };
        assert_eq!(row(&r), "3,,1.5,0,0,0,10");
        let r = MetricsRecord {
            gdm: Some(0.25),
            ..r
        };
        assert_eq!(row(&r), "3,0.25,1.5,0,0,0,10");
    }

    #[test]
    fn header_echoes_config() {
        let h = header("run x", &SimulationConfig::default(), &["seed=4".into()]);
        assert!(h.lines().all(|l| l.starts_with("# ")));
        assert!(h.contains("# n=1000\n"));
        assert!(h.ends_with("# seed=4\n"));
    }
}
