//! Fiber paths, repeater placements and the placement table.
//!
//! A path is an ordered list of fiber segments. The `S = segments - 1`
//! junctions between segments are *sites*, numbered `1..=S`; the end nodes
//! sit at site `0` and site `S + 1`. A placement picks repeater sites such
//! that every pair of neighbouring nodes is at least two segments apart,
//! leaving a free site for the heralding station.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::scalar::{count, lit, to_f64, Scalar};

/// dB per km assumed when a segment line omits its attenuation.
pub const DEFAULT_ATTENUATION_DB_PER_KM: f64 = 0.2341;

/// Plausible attenuation coefficients for deployed telecom fiber.
pub const ATTENUATION_BAND_DB_PER_KM: (f64, f64) = (0.1, 0.5);

/// Repeater sites of the best-found seven-repeater chain on the bundled grid.
pub const CITY_REPEATER_SITES: [usize; 7] = [3, 5, 7, 9, 11, 13, 15];

const BONN_BERLIN_GRID: &str = include_str!("../data/bonn_berlin_grid.csv");
const BONN_BERLIN_LINKS: &str = include_str!("../data/bonn_berlin_links.csv");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("segment {index} has non-positive length {length}")]
    NonPositiveLength { index: usize, length: f64 },
    #[error("segment {index} has negative attenuation {attenuation}")]
    NegativeAttenuation { index: usize, attenuation: f64 },
    #[error("segment {index} has {coefficient:.4} dB/km, outside the sanity band")]
    AttenuationBand { index: usize, coefficient: f64 },
    #[error("segment {index} starts at `{found}` but the previous one ends at `{expected}`")]
    Disconnected {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("fiber path has no segments")]
    Empty,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid placement {sites:?}: {reason}")]
    InvalidPlacement { sites: Vec<usize>, reason: String },
    #[error("chain asymmetry is undefined without repeaters")]
    NoRepeaters,
    #[error("no placement with {0} repeaters")]
    NoConfiguration(usize),
    #[error("asymmetry selector {0} outside [0, 1]")]
    SelectorRange(f64),
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, PathError>;

#[derive(Debug, Clone, PartialEq)]
pub struct FiberSegment<T> {
    pub name_a: String,
    pub name_b: String,
    pub length_km: T,
    pub attenuation_db: T,
}

impl<T: Scalar> FiberSegment<T> {
    pub fn new(name_a: impl Into<String>, name_b: impl Into<String>, length_km: T, attenuation_db: T) -> Self {
        Self {
            name_a: name_a.into(),
            name_b: name_b.into(),
            length_km,
            attenuation_db,
        }
    }

    pub fn attenuation_coefficient(&self) -> T {
        self.attenuation_db / self.length_km
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberPath<T> {
    segments: Vec<FiberSegment<T>>,
}

impl<T: Scalar> FiberPath<T> {
    /// Validates lengths, attenuations and that consecutive segments chain.
    pub fn new(segments: Vec<FiberSegment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(PathError::Empty);
        }
        for (index, seg) in segments.iter().enumerate() {
            if !(seg.length_km > T::zero()) || !seg.length_km.is_finite() {
                return Err(PathError::NonPositiveLength {
                    index,
                    length: to_f64(seg.length_km),
                });
            }
            if !(seg.attenuation_db >= T::zero()) || !seg.attenuation_db.is_finite() {
                return Err(PathError::NegativeAttenuation {
                    index,
                    attenuation: to_f64(seg.attenuation_db),
                });
            }
        }
        for (index, pair) in segments.windows(2).enumerate() {
            if pair[0].name_b != pair[1].name_a {
                return Err(PathError::Disconnected {
                    index: index + 1,
                    expected: pair[0].name_b.clone(),
                    found: pair[1].name_a.clone(),
                });
            }
        }
        Ok(Self { segments })
    }

    /// Rejects segments whose dB/km lies outside [`ATTENUATION_BAND_DB_PER_KM`].
    pub fn check_attenuation_band(&self) -> Result<()> {
        let (lo, hi) = ATTENUATION_BAND_DB_PER_KM;
        for (index, seg) in self.segments.iter().enumerate() {
            let coefficient = to_f64(seg.attenuation_coefficient());
            if !(coefficient > lo && coefficient < hi) {
                return Err(PathError::AttenuationBand { index, coefficient });
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> &[FiberSegment<T>] {
        &self.segments
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    /// Intermediate sites where repeaters or heralding stations may go.
    pub fn num_sites(&self) -> usize {
        self.segments.len() - 1
    }

    pub fn total_length(&self) -> T {
        self.segments.iter().fold(T::zero(), |acc, s| acc + s.length_km)
    }

    pub fn total_attenuation(&self) -> T {
        self.segments.iter().fold(T::zero(), |acc, s| acc + s.attenuation_db)
    }

    /// Label of site `i` (`0` and `S + 1` are the end nodes).
    pub fn site_name(&self, site: usize) -> &str {
        if site == 0 {
            &self.segments[0].name_a
        } else {
            &self.segments[site - 1].name_b
        }
    }

    /// Length and attenuation of the fiber between two sites.
    fn span(&self, from: usize, to: usize) -> ElementaryLink<T> {
        let (length_km, attenuation_db) = self.segments[from..to]
            .iter()
            .fold((T::zero(), T::zero()), |(l, a), s| (l + s.length_km, a + s.attenuation_db));
        ElementaryLink {
            length_km,
            attenuation_db,
        }
    }
}

/// Options for reading fiber path files.
#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    pub check_attenuation_band: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            check_attenuation_band: true,
        }
    }
}

/// Parses `name_a,name_b,length_km[,attenuation_db]` lines; `#` starts a comment line.
pub fn parse_fiber_path<T: Scalar>(source: &str, options: LoadOptions) -> Result<FiberPath<T>> {
    let mut segments = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| PathError::Parse { line: i + 1, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(parse_err(format!("expected 3 or 4 fields, found {}", fields.len())));
        }
        let number = |s: &str, what: &str| -> Result<T> {
            s.parse::<f64>()
                .ok()
                .and_then(T::from_f64)
                .ok_or_else(|| parse_err(format!("{what} `{s}` is not a number")))
        };
        let length = number(fields[2], "length")?;
        let attenuation = match fields.get(3) {
            Some(s) if !s.is_empty() => number(s, "attenuation")?,
            _ => length * lit(DEFAULT_ATTENUATION_DB_PER_KM),
        };
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(parse_err("empty node name".into()));
        }
        segments.push(FiberSegment::new(fields[0], fields[1], length, attenuation));
    }
    let path = FiberPath::new(segments)?;
    if options.check_attenuation_band {
        path.check_attenuation_band()?;
    }
    Ok(path)
}

pub fn load_fiber_path<T: Scalar>(file: &Path, options: LoadOptions) -> Result<FiberPath<T>> {
    let text = std::fs::read_to_string(file).map_err(|e| PathError::Io {
        path: file.display().to_string(),
        message: e.to_string(),
    })?;
    parse_fiber_path(&text, options)
}

/// The bundled 17-segment Bonn - Berlin grid.
pub fn bonn_berlin_grid<T: Scalar>() -> FiberPath<T> {
    parse_fiber_path(BONN_BERLIN_GRID, LoadOptions::default()).expect("bundled grid is valid")
}

/// The eight elementary links of the best-found seven-repeater Bonn - Berlin chain.
pub fn bonn_berlin_links<T: Scalar>() -> FiberPath<T> {
    parse_fiber_path(BONN_BERLIN_LINKS, LoadOptions::default()).expect("bundled links are valid")
}

pub fn bonn_berlin_grid_source() -> &'static str {
    BONN_BERLIN_GRID
}

pub fn bonn_berlin_links_source() -> &'static str {
    BONN_BERLIN_LINKS
}

/// Path with the same totals but `num_repeaters + 1` identical links, each
/// made of two equal segments so that every link has a heralding site.
pub fn symmetrized_path<T: Scalar>(
    total_length: T,
    total_attenuation: T,
    num_repeaters: usize,
) -> Result<FiberPath<T>> {
    if !(total_length > T::zero()) || !(total_attenuation >= T::zero()) {
        return Err(PathError::InvalidInput(format!(
            "length {total_length} km and attenuation {total_attenuation} dB must be positive"
        )));
    }
    let links = count::<T>(num_repeaters + 1);
    let half_length = total_length / links / lit(2.0);
    let half_attenuation = total_attenuation / links / lit(2.0);
    let mut segments = Vec::with_capacity(2 * (num_repeaters + 1));
    for i in 0..=num_repeaters {
        let left = node_label(i, num_repeaters);
        let right = node_label(i + 1, num_repeaters);
        let mid = format!("H{i}");
        segments.push(FiberSegment::new(left, mid.clone(), half_length, half_attenuation));
        segments.push(FiberSegment::new(mid, right, half_length, half_attenuation));
    }
    FiberPath::new(segments)
}

fn node_label(i: usize, num_repeaters: usize) -> String {
    if i == 0 {
        "A".into()
    } else if i == num_repeaters + 1 {
        "B".into()
    } else {
        format!("R{i}")
    }
}

/// Fiber between two neighbouring nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementaryLink<T> {
    pub length_km: T,
    pub attenuation_db: T,
}

impl<T: Scalar> ElementaryLink<T> {
    pub fn new(length_km: T, attenuation_db: T) -> Self {
        Self {
            length_km,
            attenuation_db,
        }
    }
}

/// A choice of repeater sites and the elementary links it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfiguration<T> {
    repeater_sites: Vec<usize>,
    links: Vec<ElementaryLink<T>>,
    asymmetry: T,
}

impl<T: Scalar> ChainConfiguration<T> {
    /// Repeaters at `sites` on `path`; enforces the heralding gap.
    pub fn on_path(path: &FiberPath<T>, sites: &[usize]) -> Result<Self> {
        let last = path.num_segments();
        let invalid = |reason: String| PathError::InvalidPlacement {
            sites: sites.to_vec(),
            reason,
        };
        let mut nodes = Vec::with_capacity(sites.len() + 2);
        nodes.push(0);
        for &s in sites {
            if s == 0 || s >= last {
                return Err(invalid(format!("site {s} outside 1..={}", last - 1)));
            }
            nodes.push(s);
        }
        nodes.push(last);
        for w in nodes.windows(2) {
            if w[1] <= w[0] {
                return Err(invalid("sites must be strictly increasing".into()));
            }
            if w[1] - w[0] < 2 {
                return Err(invalid(format!(
                    "no heralding site between {} and {}",
                    w[0], w[1]
                )));
            }
        }
        let links = nodes.windows(2).map(|w| path.span(w[0], w[1])).collect();
        Ok(Self::build(sites.to_vec(), links))
    }

    /// Direct link between the end nodes, without repeaters.
    pub fn direct(path: &FiberPath<T>) -> Result<Self> {
        Self::on_path(path, &[])
    }

    /// Chain given directly as link lengths and attenuations, detached from
    /// any fiber grid.
    pub fn from_links(links: Vec<ElementaryLink<T>>) -> Result<Self> {
        if links.is_empty() {
            return Err(PathError::Empty);
        }
        for (index, l) in links.iter().enumerate() {
            if !(l.length_km > T::zero()) {
                return Err(PathError::NonPositiveLength {
                    index,
                    length: to_f64(l.length_km),
                });
            }
            if !(l.attenuation_db >= T::zero()) {
                return Err(PathError::NegativeAttenuation {
                    index,
                    attenuation: to_f64(l.attenuation_db),
                });
            }
        }
        Ok(Self::build(Vec::new(), links))
    }

    fn build(repeater_sites: Vec<usize>, links: Vec<ElementaryLink<T>>) -> Self {
        let asymmetry = asymmetry_of(&links).unwrap_or_else(T::zero);
        Self {
            repeater_sites,
            links,
            asymmetry,
        }
    }

    pub fn repeater_sites(&self) -> &[usize] {
        &self.repeater_sites
    }

    pub fn links(&self) -> &[ElementaryLink<T>] {
        &self.links
    }

    pub fn num_repeaters(&self) -> usize {
        self.links.len() - 1
    }

    /// Cached chain asymmetry (0 when there are no repeaters).
    pub fn asymmetry(&self) -> T {
        self.asymmetry
    }

    pub fn total_length(&self) -> T {
        self.links.iter().fold(T::zero(), |acc, l| acc + l.length_km)
    }

    /// Fiber distance of every node from the first end node.
    pub fn node_positions(&self) -> Vec<T> {
        let mut pos = Vec::with_capacity(self.links.len() + 1);
        let mut x = T::zero();
        pos.push(x);
        for l in &self.links {
            x = x + l.length_km;
            pos.push(x);
        }
        pos
    }
}

impl<T: Scalar> fmt::Display for ChainConfiguration<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sites: Vec<String> = self.repeater_sites.iter().map(|s| s.to_string()).collect();
        write!(f, "r={} sites=[{}] A={:.6}", self.num_repeaters(), sites.join(","), self.asymmetry)
    }
}

fn asymmetry_of<T: Scalar>(links: &[ElementaryLink<T>]) -> Option<T> {
    let r = links.len().checked_sub(1).filter(|&r| r > 0)?;
    let sum = links.windows(2).fold(T::zero(), |acc, w| {
        let (l, r) = (w[0].length_km, w[1].length_km);
        acc + (l - r).abs() / (l + r)
    });
    Some(sum / count(r))
}

/// Mean relative imbalance of the two links adjacent to each repeater.
pub fn chain_asymmetry<T: Scalar>(config: &ChainConfiguration<T>) -> Result<T> {
    asymmetry_of(&config.links).ok_or(PathError::NoRepeaters)
}

/// All placements, grouped by repeater count and ordered by asymmetry.
#[derive(Debug, Clone)]
pub struct PlacementTable<T> {
    /// `by_repeaters[r - 1]` holds the placements with `r` repeaters.
    by_repeaters: Vec<Vec<ChainConfiguration<T>>>,
    direct: Option<ChainConfiguration<T>>,
}

impl<T: Scalar> PlacementTable<T> {
    pub fn max_repeaters(&self) -> usize {
        self.by_repeaters.len()
    }

    /// Placements with exactly `r` repeaters (`r >= 1`), most symmetric first.
    pub fn configurations(&self, r: usize) -> &[ChainConfiguration<T>] {
        r.checked_sub(1)
            .and_then(|i| self.by_repeaters.get(i))
            .map_or(&[], Vec::as_slice)
    }

    /// Number of placements `m_r` with `r` repeaters.
    pub fn count(&self, r: usize) -> usize {
        self.configurations(r).len()
    }

    /// Placements over all `r >= 1`.
    pub fn total(&self) -> usize {
        self.by_repeaters.iter().map(Vec::len).sum()
    }

    pub fn direct(&self) -> Option<&ChainConfiguration<T>> {
        self.direct.as_ref()
    }

    /// `(r, n, configuration)` for every entry in table order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &ChainConfiguration<T>)> {
        self.by_repeaters
            .iter()
            .enumerate()
            .flat_map(|(i, confs)| confs.iter().enumerate().map(move |(n, c)| (i + 1, n, c)))
    }
}

/// Largest repeater count that fits on a path with `sites` intermediate sites.
pub fn max_feasible_repeaters(sites: usize) -> usize {
    sites.saturating_sub(1) / 2
}

/// Enumerates every placement with `1..=max_repeaters` repeaters.
///
/// Requests beyond the largest feasible count are truncated with a warning.
pub fn enumerate_placements<T: Scalar>(path: &FiberPath<T>, max_repeaters: usize) -> PlacementTable<T> {
    let sites = path.num_sites();
    let feasible = max_feasible_repeaters(sites);
    let max_r = if max_repeaters > feasible {
        log::warn!(
            "{max_repeaters} repeaters requested but at most {feasible} fit on {sites} sites; truncating"
        );
        feasible
    } else {
        max_repeaters
    };

    let mut by_repeaters = Vec::with_capacity(max_r);
    for r in 1..=max_r {
        let mut configs = Vec::new();
        let mut current = Vec::with_capacity(r);
        place(path, r, 2, &mut current, &mut configs);
        configs.sort_by(|a: &ChainConfiguration<T>, b| {
            a.asymmetry
                .partial_cmp(&b.asymmetry)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.repeater_sites.cmp(&b.repeater_sites))
        });
        by_repeaters.push(configs);
    }
    PlacementTable {
        by_repeaters,
        direct: ChainConfiguration::direct(path).ok(),
    }
}

// Lexicographic generation: `next` is the smallest admissible next site.
fn place<T: Scalar>(
    path: &FiberPath<T>,
    remaining: usize,
    next: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<ChainConfiguration<T>>,
) {
    let last_node = path.num_segments();
    if remaining == 0 {
        out.push(ChainConfiguration::on_path(path, current).expect("generated placement is admissible"));
        return;
    }
    // leave room for `remaining - 1` further repeaters and the final gap
    let highest = last_node.saturating_sub(2 * remaining);
    for site in next..=highest {
        current.push(site);
        place(path, remaining - 1, site + 2, current, out);
        current.pop();
    }
}

/// Placement at rank `round(a * (m_r - 1))` among those with `r` repeaters.
/// `r = 0` yields the direct end-to-end link.
pub fn select_configuration<T: Scalar>(
    table: &PlacementTable<T>,
    r: usize,
    a: T,
) -> Result<&ChainConfiguration<T>> {
    if !(a >= T::zero() && a <= T::one()) {
        return Err(PathError::SelectorRange(to_f64(a)));
    }
    if r == 0 {
        return table.direct().ok_or(PathError::NoConfiguration(0));
    }
    let configs = table.configurations(r);
    if configs.is_empty() {
        return Err(PathError::NoConfiguration(r));
    }
    let n = rank_for_selector(a, configs.len());
    Ok(&configs[n])
}

/// `round(a * (m - 1))`, halves rounded away from zero.
pub fn rank_for_selector<T: Scalar>(a: T, m: usize) -> usize {
    let n = (a * count::<T>(m - 1)).round();
    n.to_usize().unwrap_or(0).min(m - 1)
}

/// Survival probability of one photon over two average segments of `path`.
pub fn baseline_survival_prob<T: Scalar>(path: &FiberPath<T>) -> T {
    let mean_two_segments = lit::<T>(2.0) * path.total_attenuation() / count(path.num_segments());
    lit::<T>(10.0).powf(-mean_two_segments / lit(10.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segs(spec: &[(f64, f64)]) -> FiberPath<f64> {
        let segments = spec
            .iter()
            .enumerate()
            .map(|(i, &(l, a))| FiberSegment::new(format!("n{i}"), format!("n{}", i + 1), l, a))
            .collect();
        FiberPath::new(segments).unwrap()
    }

    #[test]
    fn bundled_paths_totals() {
        for path in [bonn_berlin_grid::<f64>(), bonn_berlin_links::<f64>()] {
            assert!((path.total_length() - 917.1).abs() < 1e-9);
            assert!((path.total_attenuation() - 214.7).abs() < 1e-9);
        }
        assert_eq!(bonn_berlin_grid::<f64>().num_segments(), 17);
        assert_eq!(bonn_berlin_grid::<f64>().num_sites(), 16);
        let links = bonn_berlin_links::<f64>();
        assert_eq!(links.segments()[0].length_km, 138.9);
        assert_eq!(links.segments()[0].attenuation_db, 32.8);
    }

    #[test]
    fn single_segment_has_no_sites() {
        let p = parse_fiber_path::<f64>("A,B,100,20\n", LoadOptions::default()).unwrap();
        assert_eq!(p.num_sites(), 0);
    }

    #[test]
    fn parse_errors() {
        let opts = LoadOptions::default();
        assert!(matches!(
            parse_fiber_path::<f64>("A,B,0,0\n", opts),
            Err(PathError::NonPositiveLength { .. })
        ));
        assert_eq!(parse_fiber_path::<f64>("# nothing\n\n", opts), Err(PathError::Empty));
        assert!(matches!(
            parse_fiber_path::<f64>("A,B,x,1\n", opts),
            Err(PathError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_fiber_path::<f64>("A,B\n", opts),
            Err(PathError::Parse { .. })
        ));
        assert!(matches!(
            parse_fiber_path::<f64>("A,B,10,2\nC,D,10,2\n", opts),
            Err(PathError::Disconnected { index: 1, .. })
        ));
        assert!(matches!(
            parse_fiber_path::<f64>("A,B,10,20\n", opts),
            Err(PathError::AttenuationBand { .. })
        ));
        let lax = LoadOptions {
            check_attenuation_band: false,
        };
        assert!(parse_fiber_path::<f64>("A,B,10,0\n", lax).is_ok());
    }

    #[test]
    fn missing_attenuation_uses_default() {
        let p = parse_fiber_path::<f64>("A,B,100\nB,C,50,\n", LoadOptions::default()).unwrap();
        assert!((p.segments()[0].attenuation_db - 23.41).abs() < 1e-12);
        assert!((p.segments()[1].attenuation_db - 11.705).abs() < 1e-12);
    }

    #[test]
    fn symmetrized_examples() {
        let p = symmetrized_path(917.1f64, 214.7, 6).unwrap();
        let c = ChainConfiguration::on_path(&p, &[2, 4, 6, 8, 10, 12]).unwrap();
        assert_eq!(c.links().len(), 7);
        for l in c.links() {
            assert!((l.length_km - 131.014_285_714_285_7).abs() < 1e-9);
            assert!((l.attenuation_db - 30.671_428_571_428_57).abs() < 1e-9);
        }
        let p0 = symmetrized_path(917.1f64, 214.7, 0).unwrap();
        let c0 = ChainConfiguration::direct(&p0).unwrap();
        assert_eq!(c0.links().len(), 1);
        assert!((c0.links()[0].length_km - 917.1).abs() < 1e-9);

        let p3 = symmetrized_path(100.0f64, 20.0, 3).unwrap();
        let c3 = ChainConfiguration::on_path(&p3, &[2, 4, 6]).unwrap();
        for l in c3.links() {
            assert!((l.length_km - 25.0).abs() < 1e-12);
            assert!((l.attenuation_db - 5.0).abs() < 1e-12);
        }
        assert!(symmetrized_path(-1.0f64, 1.0, 2).is_err());
        assert!(symmetrized_path(1.0f64, -1.0, 2).is_err());
    }

    #[test]
    fn enumeration_small_paths() {
        let three = segs(&[(10.0, 2.0), (10.0, 2.0), (10.0, 2.0)]);
        assert_eq!(enumerate_placements(&three, 1).total(), 0);
        let four = segs(&[(10.0, 2.0); 4]);
        let t = enumerate_placements(&four, 1);
        assert_eq!(t.total(), 1);
        assert_eq!(t.configurations(1)[0].repeater_sites(), &[2]);
    }

    #[test]
    fn enumeration_truncates() {
        let t = enumerate_placements(&bonn_berlin_grid::<f64>(), 12);
        assert_eq!(t.max_repeaters(), 7);
        assert_eq!(t.total(), 986);
    }

    #[test]
    fn placement_validation() {
        let g = bonn_berlin_grid::<f64>();
        assert!(ChainConfiguration::on_path(&g, &[1]).is_err());
        assert!(ChainConfiguration::on_path(&g, &[16]).is_err());
        assert!(ChainConfiguration::on_path(&g, &[3, 4]).is_err());
        assert!(ChainConfiguration::on_path(&g, &[5, 3]).is_err());
        let c = ChainConfiguration::on_path(&g, &CITY_REPEATER_SITES).unwrap();
        let lengths: Vec<f64> = c.links().iter().map(|l| l.length_km).collect();
        let expected = [138.9, 133.2, 126.2, 97.2, 122.0, 115.5, 103.9, 80.2];
        for (a, b) in lengths.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9);
        }
        let att: Vec<f64> = c.links().iter().map(|l| l.attenuation_db).collect();
        assert!((att[0] - 32.8).abs() < 1e-9 && (att[7] - 18.6).abs() < 1e-9);
    }

    #[test]
    fn asymmetry_examples() {
        let one = ChainConfiguration::from_links(vec![
            ElementaryLink::new(100.0f64, 20.0),
            ElementaryLink::new(300.0, 60.0),
        ])
        .unwrap();
        assert!((chain_asymmetry(&one).unwrap() - 0.5).abs() < 1e-15);
        let direct = ChainConfiguration::from_links(vec![ElementaryLink::new(100.0f64, 20.0)]).unwrap();
        assert_eq!(chain_asymmetry(&direct), Err(PathError::NoRepeaters));

        // hand computation over the seven repeaters of the bundled chain
        let g = bonn_berlin_grid::<f64>();
        let c = ChainConfiguration::on_path(&g, &CITY_REPEATER_SITES).unwrap();
        let l: [f64; 8] = [138.9, 133.2, 126.2, 97.2, 122.0, 115.5, 103.9, 80.2];
        let hand: f64 = l.windows(2).map(|w| (w[0] - w[1]).abs() / (w[0] + w[1])).sum::<f64>() / 7.0;
        let got = chain_asymmetry(&c).unwrap();
        assert!((got - hand).abs() < 1e-12);
        assert!(got > 0.0 && got < 1.0);
    }

    #[test]
    fn selector_mapping() {
        let g = bonn_berlin_grid::<f64>();
        let t = enumerate_placements(&g, 7);
        let most_sym = select_configuration(&t, 7, 0.0).unwrap();
        assert!(t.configurations(7).iter().all(|c| c.asymmetry() >= most_sym.asymmetry()));
        let last = select_configuration(&t, 7, 1.0).unwrap();
        assert_eq!(last, &t.configurations(7)[7]);
        let mid = select_configuration(&t, 7, 0.5).unwrap();
        assert_eq!(mid, &t.configurations(7)[4]);
        assert_eq!(rank_for_selector(0.5, 8), 4);
        assert!(select_configuration(&t, 8, 0.5).is_err());
        assert!(select_configuration(&t, 3, 1.5).is_err());
        assert_eq!(select_configuration(&t, 0, 0.3).unwrap().num_repeaters(), 0);
    }

    #[test]
    fn survival_examples() {
        let g = bonn_berlin_grid::<f64>();
        let p = baseline_survival_prob(&g);
        assert!((p - 2.979_323_396_081_235_4e-3).abs() < 1e-15);
        let zero = FiberPath::new(vec![FiberSegment::new("a", "b", 10.0, 0.0)]).unwrap();
        assert_eq!(baseline_survival_prob(&zero), 1.0);
        let two = segs(&[(50.0, 10.0), (50.0, 10.0)]);
        assert!((baseline_survival_prob(&two) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn node_positions_accumulate() {
        let c = ChainConfiguration::from_links(vec![
            ElementaryLink::new(10.0, 2.0),
            ElementaryLink::new(30.0, 6.0),
        ])
        .unwrap();
        assert_eq!(c.node_positions(), vec![0.0, 10.0, 40.0]);
    }
}
