//! Experiment configuration: `key = value` files, command line overrides and
//! validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pwvem::postproc::Evaluation;
use pwvem::Variant;

/// Raised for anything the user can fix by changing the invocation.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Table1,
    VoronoiH,
    Pconv,
    Pollution,
    Singular,
    Patch,
    Infsup,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Table1,
        Experiment::VoronoiH,
        Experiment::Pconv,
        Experiment::Pollution,
        Experiment::Singular,
        Experiment::Patch,
        Experiment::Infsup,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Table1 => "table1",
            Experiment::VoronoiH => "voronoi_h",
            Experiment::Pconv => "pconv",
            Experiment::Pollution => "pollution",
            Experiment::Singular => "singular",
            Experiment::Patch => "patch",
            Experiment::Infsup => "infsup",
        }
    }

    /// Whether successive rows of a series are mesh refinements, so that
    /// convergence rates make sense.
    pub fn is_h_series(self) -> bool {
        matches!(self, Experiment::Table1 | Experiment::VoronoiH)
    }

    fn defaults(self) -> &'static [(&'static str, &'static str)] {
        const VORONOI_FAMILY: &str = "voronoi:8,16,32,64,128,256,512";
        match self {
            Experiment::Table1 => &[
                ("k", "20"),
                ("p", "13"),
                ("mesh", "structured:2,4,8,16"),
                ("variant", "PUM,GRAD,PWVEM"),
                ("evaluation", "exact-basis"),
            ],
            Experiment::VoronoiH => &[("k", "20"), ("p", "13"), ("mesh", VORONOI_FAMILY)],
            Experiment::Pconv => &[
                ("k", "20"),
                ("p", "3,5,7,9,11,13,15,17"),
                ("mesh", "structured:4"),
                ("variant", "PUM,GRAD,PWVEM"),
            ],
            Experiment::Pollution => &[("p", "9"), ("mesh", VORONOI_FAMILY), ("hk", "3")],
            Experiment::Singular => &[
                ("k", "10"),
                ("p", "3,5,7,9,11,13,15,17"),
                ("mesh", "structured:4"),
                ("exact", "singular"),
                ("xi", "2/3,1,3/2"),
            ],
            Experiment::Patch => &[
                ("k", "20"),
                ("p", "13"),
                ("mesh", "structured:4;voronoi:16"),
                ("variant", "PUM,GRAD,PWVEM"),
                ("exact", "planewaves"),
            ],
            Experiment::Infsup => &[("k", "20"), ("p", "13"), ("cells", "20"), ("hk_min", "0.1"), ("hk_max", "1")],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = UsageError;
    fn from_str(s: &str) -> Result<Self, UsageError> {
        Experiment::ALL.into_iter().find(|e| e.name() == s.trim()).ok_or_else(|| {
            let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
            usage(format!("unknown experiment '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

/// Keys accepted in configuration files, in echo order.
pub const KEYS: [&str; 17] = [
    "experiment",
    "k",
    "p",
    "mesh",
    "variant",
    "exact",
    "xi",
    "evaluation",
    "offset",
    "seed",
    "lloyd",
    "hk",
    "hk_min",
    "hk_max",
    "cells",
    "max_condition",
    "out",
];

const COMMON_DEFAULTS: [(&str, &str); 12] = [
    ("variant", "PWVEM"),
    ("exact", "hankel"),
    ("xi", "1"),
    ("evaluation", "auto"),
    ("offset", "0"),
    ("seed", "1"),
    ("lloyd", "20"),
    ("hk", "3"),
    ("hk_min", "0.1"),
    ("hk_max", "1"),
    ("cells", "20"),
    ("max_condition", "1e14"),
];

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected 'key = value', got '{line}'", i + 1)))?;
        let key = key.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(usage(format!("config line {}: unknown key '{key}'", i + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(usage(format!("config line {}: duplicate key '{key}'", i + 1)));
        }
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeshSpec {
    Structured(usize),
    Voronoi { cells: usize, seed: u64, lloyd: usize },
    File(PathBuf),
}

impl fmt::Display for MeshSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshSpec::Structured(n) => write!(f, "structured:{n}"),
            MeshSpec::Voronoi { cells, seed, lloyd } => write!(f, "voronoi:{cells}:seed={seed}:lloyd={lloyd}"),
            MeshSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// `structured:2,4`, `voronoi:16,64` or `file:a.txt,b.txt`; families are
/// separated by `;`. A bare path is read as a mesh file.
pub fn parse_mesh_specs(s: &str, seed: u64, lloyd: usize) -> Result<Vec<MeshSpec>, UsageError> {
    let mut out = vec![];
    for family in s.split(';').map(str::trim).filter(|f| !f.is_empty()) {
        let (kind, args) = family.split_once(':').unwrap_or(("file", family));
        let items = args.split(',').map(str::trim).filter(|a| !a.is_empty());
        for item in items {
            let count = || item.parse::<usize>().map_err(|_| usage(format!("mesh '{family}': '{item}' is not a count")));
            out.push(match kind.trim() {
                "structured" => MeshSpec::Structured(count()?),
                "voronoi" => MeshSpec::Voronoi { cells: count()?, seed, lloyd },
                "file" => MeshSpec::File(PathBuf::from(item)),
                other => return Err(usage(format!("unknown mesh kind '{other}' (structured, voronoi, file)"))),
            });
        }
    }
    if out.is_empty() {
        return Err(usage("no mesh given: set mesh, e.g. mesh = structured:2,4,8"));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactKind {
    Hankel,
    Singular,
    PlaneWave,
    PlaneWaves,
}

impl ExactKind {
    fn name(self) -> &'static str {
        match self {
            ExactKind::Hankel => "hankel",
            ExactKind::Singular => "singular",
            ExactKind::PlaneWave => "planewave",
            ExactKind::PlaneWaves => "planewaves",
        }
    }
}

impl FromStr for ExactKind {
    type Err = UsageError;
    fn from_str(s: &str) -> Result<Self, UsageError> {
        [ExactKind::Hankel, ExactKind::Singular, ExactKind::PlaneWave, ExactKind::PlaneWaves]
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| usage(format!("unknown exact solution '{s}' (hankel, singular, planewave, planewaves)")))
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    pub experiment: Experiment,
    pub k: Option<f64>,
    pub p: Vec<usize>,
    pub meshes: Vec<MeshSpec>,
    pub variants: Vec<Variant>,
    pub exact: ExactKind,
    pub xi: Vec<f64>,
    pub evaluation: Option<Evaluation>,
    pub offset: f64,
    pub seed: u64,
    pub hk: f64,
    pub hk_range: (f64, f64),
    pub cells: usize,
    pub max_condition: f64,
    pub out: PathBuf,
    /// Resolved raw values, echoed to the output directory.
    pub resolved: BTreeMap<String, String>,
}

fn number<T: FromStr>(key: &str, v: &str) -> Result<T, UsageError> {
    v.trim().parse().map_err(|_| usage(format!("{key}: cannot parse '{v}'")))
}

fn list<T>(key: &str, v: &str, f: impl Fn(&str) -> Result<T, UsageError>) -> Result<Vec<T>, UsageError> {
    let items: Vec<T> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(f).collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(usage(format!("{key}: empty list")));
    }
    Ok(items)
}

/// Accepts decimals and fractions such as `2/3`.
fn fraction(key: &str, v: &str) -> Result<f64, UsageError> {
    match v.split_once('/') {
        Some((a, b)) => Ok(number::<f64>(key, a)? / number::<f64>(key, b)?),
        None => number(key, v),
    }
}

fn odd_p(v: &str) -> Result<usize, UsageError> {
    let p: usize = number("p", v)?;
    if p < 3 || p.is_multiple_of(2) {
        return Err(usage(format!("p must be odd and at least 3 (p = 2m+1, m >= 1); got {p}")));
    }
    Ok(p)
}

impl Config {
    /// Layers experiment defaults, then `file`, then `flags`.
    pub fn resolve(file: &BTreeMap<String, String>, flags: &BTreeMap<String, String>) -> Result<Config, UsageError> {
        let experiment: Experiment = flags
            .get("experiment")
            .or_else(|| file.get("experiment"))
            .ok_or_else(|| usage("no experiment given: use --experiment or 'experiment = ...' in the config file"))?
            .parse()?;
        let mut raw: BTreeMap<String, String> = BTreeMap::new();
        raw.insert("out".into(), "./out".into());
        for (k, v) in COMMON_DEFAULTS.iter().chain(experiment.defaults()) {
            raw.insert(k.to_string(), v.to_string());
        }
        for (k, v) in file.iter().chain(flags) {
            if !KEYS.contains(&k.as_str()) {
                return Err(usage(format!("unknown key '{k}'")));
            }
            raw.insert(k.clone(), v.clone());
        }
        raw.insert("experiment".into(), experiment.name().into());
        let get = |key: &str| raw.get(key).map(String::as_str).unwrap_or("");

        let k = match (experiment, raw.get("k")) {
            (Experiment::Pollution, Some(_)) => return Err(usage("pollution derives k from hk and the mesh size; set hk instead of k")),
            (_, Some(v)) => {
                let k: f64 = number("k", v)?;
                if !(k > 0.0 && k.is_finite()) {
                    return Err(usage(format!("k must be positive, got {v}")));
                }
                Some(k)
            }
            (_, None) => None,
        };
        let p = list("p", get("p"), odd_p)?;
        let seed: u64 = number("seed", get("seed"))?;
        let lloyd: usize = number("lloyd", get("lloyd"))?;
        let meshes = if experiment == Experiment::Infsup { vec![] } else { parse_mesh_specs(get("mesh"), seed, lloyd)? };
        let variants = list("variant", get("variant"), |s| s.parse::<Variant>().map_err(|e| usage(e.to_string())))?;
        let exact: ExactKind = get("exact").parse()?;
        if experiment == Experiment::Singular && exact != ExactKind::Singular {
            return Err(usage("the singular experiment needs exact = singular"));
        }
        let xi = list("xi", get("xi"), |s| fraction("xi", s))?;
        if let Some(x) = xi.iter().find(|x| !(**x > 0.0 && **x <= 5.0)) {
            return Err(usage(format!("xi must lie in (0, 5], got {x}")));
        }
        let evaluation = match get("evaluation") {
            "auto" => None,
            v => Some(v.parse::<Evaluation>().map_err(|e| usage(e.to_string()))?),
        };
        let hk: f64 = number("hk", get("hk"))?;
        let hk_range = (number("hk_min", get("hk_min"))?, number("hk_max", get("hk_max"))?);
        if !(hk > 0.0) || !(hk_range.0 > 0.0 && hk_range.0 <= hk_range.1) {
            return Err(usage("hk, hk_min and hk_max must be positive with hk_min <= hk_max"));
        }
        let max_condition: f64 = number("max_condition", get("max_condition"))?;
        if !(max_condition > 1.0) {
            return Err(usage("max_condition must exceed 1"));
        }
        Ok(Config {
            experiment,
            k,
            p,
            meshes,
            variants,
            exact,
            xi,
            evaluation,
            offset: number("offset", get("offset"))?,
            seed,
            hk,
            hk_range,
            cells: number("cells", get("cells"))?,
            max_condition,
            out: PathBuf::from(get("out")),
            resolved: raw,
        })
    }

    /// The resolved configuration in the same format the parser reads.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# resolved configuration\n");
        for key in KEYS {
            if let Some(v) = self.resolved.get(key) {
                s += &format!("{key} = {v}\n");
            }
        }
        s
    }

    pub fn k(&self) -> f64 {
        self.k.expect("k is set for every experiment except pollution")
    }
}
