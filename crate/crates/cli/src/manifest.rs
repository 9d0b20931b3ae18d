use std::fmt::Display;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

/// Resolved inputs of one invocation, written as `# key=value` lines at the
/// top of every emitted file. Re-running with these values reproduces the data.
#[derive(Debug, Clone)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
    started_unix: f64,
    clock: Instant,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        let started_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0.0, |d| d.as_secs_f64());
        let mut m = Self {
            entries: Vec::new(),
            started_unix,
            clock: Instant::now(),
        };
        m.set("tool", "repchain");
        m.set("version", env!("CARGO_PKG_VERSION"));
        m.set("subcommand", subcommand);
        m
    }

    /// Replaces an existing key in place so the order stays stable.
    pub fn set(&mut self, key: &str, value: impl Display) {
        let value = value.to_string().replace('\n', " ");
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    /// Entries followed by the wall-clock fields as of now.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out = self.entries.clone();
        out.push(("started_unix_s".into(), format!("{:.3}", self.started_unix)));
        out.push(("wall_clock_s".into(), format!("{:.3}", self.clock.elapsed().as_secs_f64())));
        out
    }

    pub fn header(&self) -> String {
        self.entries()
            .iter()
            .map(|(k, v)| format!("# {k}={v}\n"))
            .collect()
    }
}

/// Reads `# key=value` lines back from an emitted file.
pub fn read_header(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let mut m = RunManifest::new("simulate");
        m.set("seed", 7);
        m.set("seed", 8);
        let parsed = read_header(&m.header());
        assert_eq!(parsed[0], ("tool".to_string(), "repchain".to_string()));
        assert_eq!(parsed.iter().filter(|(k, _)| k == "seed").count(), 1);
        assert!(parsed.iter().any(|(k, v)| k == "seed" && v == "8"));
        assert!(parsed.iter().any(|(k, _)| k == "wall_clock_s"));
    }
}
