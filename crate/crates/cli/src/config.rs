use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Bad flags, config entries or input files. Maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

/// Flat `key = value` file; keys are normalised to snake_case.
/// Every key must be consumed by the subcommand, so typos are reported.
#[derive(Debug, Default)]
pub struct ConfigFile {
    source: Option<PathBuf>,
    entries: BTreeMap<String, (usize, String)>,
}

fn normalize(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('-', "_").to_ascii_lowercase()
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("reading config {}: {e}", path.display())))?;
        let mut config = Self::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        config.source = Some(path.to_path_buf());
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
            let key = normalize(key);
            if key.is_empty() {
                return Err(format!("line {}: empty key", i + 1));
            }
            if entries.insert(key.clone(), (i + 1, value.trim().to_string())).is_some() {
                return Err(format!("line {}: duplicate key `{key}`", i + 1));
            }
        }
        Ok(Self { source: None, entries })
    }

    pub fn source(&self) -> Option<&Path> {
        self.source.as_deref()
    }

    /// Removes and parses `key`.
    pub fn take<T: FromStr>(&mut self, key: &str) -> anyhow::Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, value)) => value
                .parse()
                .map(Some)
                .map_err(|e| usage(format!("config line {line}: `{key}`: {e}"))),
        }
    }

    /// A flag wins over the file; the file entry is consumed either way.
    pub fn merge<T: FromStr>(&mut self, flag: Option<T>, key: &str) -> anyhow::Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        let from_file = self.take(key)?;
        Ok(flag.or(from_file))
    }

    pub fn finish(self) -> anyhow::Result<()> {
        match self.entries.keys().next() {
            None => Ok(()),
            Some(_) => {
                let keys: Vec<&str> = self.entries.keys().map(String::as_str).collect();
                Err(usage(format!("unknown config keys for this subcommand: {}", keys.join(", "))))
            }
        }
    }
}

/// Seconds, or `inf` for no limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seconds(pub f64);

impl FromStr for Seconds {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = match s.trim() {
            "inf" | "infinity" | "none" => f64::INFINITY,
            other => other.parse::<f64>().map_err(|e| format!("`{other}`: {e}"))?,
        };
        if v.is_nan() || v <= 0.0 {
            return Err(format!("`{s}` must be positive or `inf`"));
        }
        Ok(Seconds(v))
    }
}

/// `r:a` (repeater count and selector), `sites:i,j,k` or `direct`.
#[derive(Debug, Clone, PartialEq)]
pub enum PlacementSpec {
    Selector { r: usize, a: f64 },
    Sites(Vec<usize>),
}

impl FromStr for PlacementSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "direct" {
            return Ok(Self::Selector { r: 0, a: 0.0 });
        }
        if let Some(list) = s.strip_prefix("sites:") {
            let sites = list
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|e| format!("site `{t}`: {e}")))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(Self::Sites(sites));
        }
        let (r, a) = s
            .split_once(':')
            .ok_or_else(|| format!("placement `{s}` is not `r:a`, `sites:i,j,k` or `direct`"))?;
        let r = r.trim().parse().map_err(|e| format!("repeater count `{r}`: {e}"))?;
        let a: f64 = a.trim().parse().map_err(|e| format!("selector `{a}`: {e}"))?;
        if !(0.0..=1.0).contains(&a) {
            return Err(format!("selector {a} outside [0, 1]"));
        }
        Ok(Self::Selector { r, a })
    }
}

impl fmt::Display for PlacementSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Selector { r, a } => write!(f, "{r}:{a}"),
            Self::Sites(sites) => {
                let s: Vec<String> = sites.iter().map(usize::to_string).collect();
                write!(f, "sites:{}", s.join(","))
            }
        }
    }
}

/// `T,n,F,pdet,sq` or `baseline`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamsSpec(pub repchain::HardwareParams);

impl FromStr for ParamsSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "baseline" {
            return Ok(Self(repchain::HardwareParams::baseline()));
        }
        let fields: Vec<&str> = s.split(',').map(str::trim).collect();
        let [t, n, f, pdet, sq] = fields[..] else {
            return Err(format!("expected `T,n,F,pdet,sq`, found {} fields", fields.len()));
        };
        let real = |v: &str, what: &str| -> Result<f64, String> {
            match v {
                "inf" => Ok(f64::INFINITY),
                _ => v.parse().map_err(|e| format!("{what} `{v}`: {e}")),
            }
        };
        let params = repchain::HardwareParams {
            coherence_time: Seconds::from_str(t)?.0,
            num_modes: n.parse().map_err(|e| format!("num_modes `{n}`: {e}"))?,
            link_fidelity: real(f, "link fidelity")?,
            detection_prob: real(pdet, "detection probability")?,
            swap_quality: real(sq, "swap quality")?,
        };
        params.validate().map_err(|e| e.to_string())?;
        Ok(Self(params))
    }
}

impl fmt::Display for ParamsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.0;
        write!(
            f,
            "{},{},{},{},{}",
            p.coherence_time, p.num_modes, p.link_fidelity, p.detection_prob, p.swap_quality
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let mut c = ConfigFile::parse("seed = 5\npath-file = a.csv\n# comment\n").unwrap();
        assert_eq!(c.merge(Some(9u64), "seed").unwrap(), Some(9));
        assert_eq!(c.merge::<String>(None, "path_file").unwrap().as_deref(), Some("a.csv"));
        c.finish().unwrap();
    }

    #[test]
    fn leftover_and_duplicate_keys_are_rejected() {
        let mut c = ConfigFile::parse("seed = 5\nsed = 1").unwrap();
        c.take::<u64>("seed").unwrap();
        assert!(c.finish().is_err());
        assert!(ConfigFile::parse("a=1\na=2").is_err());
        assert!(ConfigFile::parse("novalue").is_err());
    }

    #[test]
    fn placement_specs() {
        assert_eq!("7:0.5".parse::<PlacementSpec>().unwrap(), PlacementSpec::Selector { r: 7, a: 0.5 });
        assert_eq!("sites:3, 5".parse::<PlacementSpec>().unwrap(), PlacementSpec::Sites(vec![3, 5]));
        assert_eq!("direct".parse::<PlacementSpec>().unwrap(), PlacementSpec::Selector { r: 0, a: 0.0 });
        assert!("7:1.5".parse::<PlacementSpec>().is_err());
        assert!("seven".parse::<PlacementSpec>().is_err());
        let s = PlacementSpec::Sites(vec![1, 4]);
        assert_eq!(s.to_string().parse::<PlacementSpec>().unwrap(), s);
    }

    #[test]
    fn params_round_trip() {
        let p: ParamsSpec = "baseline".parse().unwrap();
        assert_eq!(p.0, repchain::HardwareParams::baseline());
        assert_eq!(p.to_string().parse::<ParamsSpec>().unwrap(), p);
        let q: ParamsSpec = "inf,10,1,1,1".parse().unwrap();
        assert!(q.0.coherence_time.is_infinite());
        assert!("1,2,3".parse::<ParamsSpec>().is_err());
        assert!("1,0,0.9,0.5,0.9".parse::<ParamsSpec>().is_err());
    }

    #[test]
    fn seconds() {
        assert_eq!("inf".parse::<Seconds>().unwrap().0, f64::INFINITY);
        assert_eq!("0.25".parse::<Seconds>().unwrap().0, 0.25);
        assert!("0".parse::<Seconds>().is_err());
        assert!("-1".parse::<Seconds>().is_err());
    }
}
