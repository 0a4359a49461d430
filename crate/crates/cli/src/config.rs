//! Experiment configuration: TOML in, validated model objects out.

use std::fmt;
use std::path::{Path, PathBuf};

use critscat::evolution::DEFAULT_REDUCED_TOL;
use critscat::model::{make_packet, CoefficientSchedule, GridSpec, PacketShape, PacketSide, PotentialSpec, WavePacket};
use critscat::scattering::SweepConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleSection {
    pub sigma: f64,
    pub r0: f64,
    pub mass: f64,
    /// Horizon of the classical solve, as `log t`.
    pub log_t_max: f64,
    pub tol: f64,
    /// Fit window in `log t`.
    pub fit_window: [f64; 2],
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            sigma: 0.25,
            r0: 1.0,
            mass: 1.0,
            log_t_max: 10.0,
            tol: 1e-12,
            fit_window: [5.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub kappa: f64,
    pub amplitude: f64,
    /// `C~`; defaults to `amplitude`.
    #[serde(default)]
    pub amplitude_high: Option<f64>,
    #[serde(default = "plus_one")]
    pub sign: i8,
}

fn plus_one() -> i8 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub kappas: Vec<f64>,
    /// One value for all kappas, or one per kappa.
    pub amplitudes: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            kappas: vec![0.0, 0.5, 0.9, 1.0, 1.5],
            amplitudes: vec![0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub half_width: f64,
    pub points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            half_width: 1024.0,
            points: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketSection {
    pub eps: f64,
    pub outer: f64,
    pub sharpness: f64,
    pub side: PacketSide,
    pub offset: f64,
}

impl Default for PacketSection {
    fn default() -> Self {
        let shape = PacketShape::default();
        Self {
            eps: 0.5,
            outer: 4.0,
            sharpness: shape.sharpness,
            side: shape.side,
            offset: shape.offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionSection {
    pub dtau: f64,
    pub tol: f64,
    pub max_refinements: u32,
    pub aliasing_limit: f64,
    pub tau_max: f64,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self {
            dtau: 0.05,
            tol: DEFAULT_REDUCED_TOL,
            max_refinements: 6,
            aliasing_limit: 1e-6,
            tau_max: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatteringSection {
    pub schedule_taus: Vec<f64>,
    pub slow_schedule_taus: Vec<f64>,
    pub slow_range: [f64; 2],
    pub delta: f64,
    pub cook_window: [f64; 2],
    pub cook_points: usize,
}

impl Default for ScatteringSection {
    fn default() -> Self {
        Self {
            schedule_taus: vec![5.0, 10.0, 20.0, 40.0],
            slow_schedule_taus: vec![7.5, 15.0, 30.0, 60.0],
            slow_range: [1.0, 1.1],
            delta: 1e-3,
            cook_window: [8.0, 30.0],
            cook_points: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub output_dir: PathBuf,
    pub cache: bool,
    pub schedule: ScheduleSection,
    /// Single potential for `cook`; absent means `V = 0`.
    pub potential: Option<PotentialSection>,
    pub sweep: SweepSection,
    pub grid: GridSection,
    pub packet: PacketSection,
    pub evolution: EvolutionSection,
    pub scattering: ScatteringSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            cache: true,
            schedule: ScheduleSection::default(),
            potential: None,
            sweep: SweepSection::default(),
            grid: GridSection::default(),
            packet: PacketSection::default(),
            evolution: EvolutionSection::default(),
            scattering: ScatteringSection::default(),
        }
    }
}

/// One problem found in a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    /// Dotted field path, e.g. `grid.half_width`.
    pub field: String,
    /// 1-based line in the source, when the field appears there.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source_name: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration {}:", self.source_name)?;
        for d in &self.diagnostics {
            write!(f, "\n  {d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Parameter names reported by the core validators and the config fields
/// they come from.
const VALIDATION_FIELDS: [(&str, &str, &str); 7] = [
    ("slow_schedule", "scattering", "slow_schedule_taus"),
    ("schedule", "scattering", "schedule_taus"),
    ("delta", "scattering", "delta"),
    ("cook_points", "scattering", "cook_points"),
    ("dtau", "evolution", "dtau"),
    ("tol", "evolution", "tol"),
    ("aliasing_limit", "evolution", "aliasing_limit"),
];

/// Line of `key` inside table `section` ("" for the root table).
fn locate(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            if key.is_empty() && current == section {
                return Some(i + 1);
            }
            continue;
        }
        if current == section && !key.is_empty() {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

/// Overrides from the command line, applied before validation.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub no_cache: bool,
    pub tau_max: Option<f64>,
    pub grid_points: Option<usize>,
}

/// A validated configuration with the objects it describes.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub hash: String,
    pub schedule: CoefficientSchedule,
    pub grid: GridSpec,
    pub packet: WavePacket,
    pub potential: Option<PotentialSpec>,
    pub sweep: SweepConfig,
}

impl ExperimentConfig {
    pub fn from_toml(src: &str, source_name: &str) -> Result<Self, ConfigError> {
        toml::from_str(src).map_err(|e| {
            let line = e.span().map(|s| src[..s.start.min(src.len())].lines().count().max(1));
            ConfigError {
                source_name: source_name.to_string(),
                diagnostics: vec![Diagnostic {
                    field: "toml".into(),
                    line,
                    message: e.message().to_string(),
                }],
            }
        })
    }

    pub fn load(path: &Path) -> Result<(Self, String), ConfigError> {
        let name = path.display().to_string();
        let src = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source_name: name.clone(),
            diagnostics: vec![Diagnostic {
                field: "config".into(),
                line: None,
                message: e.to_string(),
            }],
        })?;
        Ok((Self::from_toml(&src, &name)?, src))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.output_dir = out.clone();
        }
        if o.no_cache {
            self.cache = false;
        }
        if let Some(t) = o.tau_max {
            self.evolution.tau_max = t;
        }
        if let Some(n) = o.grid_points {
            self.grid.points = n;
        }
    }

    /// SHA-256 of the scientific content: everything except where outputs
    /// go and whether the cache is used.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.cache = true;
        let canonical = serde_json::to_string(&c).expect("config serialises");
        format!("{:x}", Sha256::digest(canonical.as_bytes()))
    }

    /// Cross-validates the whole configuration.  `src` is the TOML text the
    /// config came from, used for line numbers.
    pub fn resolve(&self, src: &str, source_name: &str) -> Result<Resolved, ConfigError> {
        let mut diags = Vec::new();
        let mut push = |section: &str, key: &str, message: String| {
            let line = locate(src, section, key).or_else(|| locate(src, section, ""));
            let field = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            diags.push(Diagnostic { field, line, message });
        };

        let s = &self.schedule;
        let schedule = match CoefficientSchedule::with_mass(s.sigma, s.r0, s.mass) {
            Ok(c) => Some(c),
            Err(e) => {
                let key = if e.to_string().contains("`mass`") {
                    "mass"
                } else if e.to_string().contains("`r0`") {
                    "r0"
                } else {
                    "sigma"
                };
                push("schedule", key, e.to_string());
                None
            }
        };
        if !(s.log_t_max.is_finite() && s.log_t_max > 0.0) {
            push("schedule", "log_t_max", format!("must be positive, got {}", s.log_t_max));
        }
        if !(s.tol > 0.0 && s.tol < 1.0) {
            push("schedule", "tol", format!("must lie in (0, 1), got {}", s.tol));
        }
        let [lo, hi] = s.fit_window;
        if !(lo >= 2.0 + s.r0.ln() && hi >= lo + 2.0 && hi <= s.log_t_max) {
            push(
                "schedule",
                "fit_window",
                format!("need 2 + log r0 <= lo, lo + 2 <= hi <= log_t_max, got [{lo}, {hi}]"),
            );
        }

        let potential = match &self.potential {
            None => None,
            Some(p) => {
                let high = p.amplitude_high.unwrap_or(p.amplitude);
                match PotentialSpec::with_bounds(p.kappa, p.amplitude, high).and_then(|v| v.with_sign(p.sign)) {
                    Ok(v) => Some(v),
                    Err(e) => {
                        push("potential", "kappa", e.to_string());
                        None
                    }
                }
            }
        };

        let sw = &self.sweep;
        if sw.kappas.is_empty() {
            push("sweep", "kappas", "sweep list is empty".into());
        }
        if sw.kappas.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            push("sweep", "kappas", "every kappa must be finite and >= 0".into());
        }
        if !(sw.amplitudes.len() == 1 || sw.amplitudes.len() == sw.kappas.len()) {
            push(
                "sweep",
                "amplitudes",
                format!("give one amplitude or one per kappa ({}), got {}", sw.kappas.len(), sw.amplitudes.len()),
            );
        }
        for (i, &a) in sw.amplitudes.iter().enumerate() {
            if let Err(e) = PotentialSpec::new(sw.kappas.get(i).copied().unwrap_or(0.0).max(0.0), a) {
                push("sweep", "amplitudes", e.to_string());
            }
        }

        let g = &self.grid;
        let grid = match GridSpec::new(g.half_width, g.points) {
            Ok(grid) => Some(grid),
            Err(e) => {
                let key = if e.to_string().contains("`points`") { "points" } else { "half_width" };
                push("grid", key, e.to_string());
                None
            }
        };
        let pk = &self.packet;
        let ev = &self.evolution;
        // Ballistic reduced support tau R must stay well inside the box.
        if g.half_width < 4.0 * pk.outer * ev.tau_max {
            push(
                "grid",
                "half_width",
                format!(
                    "L = {} is below 4 R tau_max = {} (R = {}, tau_max = {})",
                    g.half_width,
                    4.0 * pk.outer * ev.tau_max,
                    pk.outer,
                    ev.tau_max
                ),
            );
        }
        let packet = grid.and_then(|grid| {
            let shape = PacketShape {
                side: pk.side,
                sharpness: pk.sharpness,
                offset: pk.offset,
            };
            match make_packet(pk.eps, pk.outer, grid, shape) {
                Ok(p) => Some(p),
                Err(e) => {
                    let key = match e {
                        critscat::Error::AnnulusTooWide { .. } | critscat::Error::AnnulusEmpty { .. } => "outer",
                        _ => {
                            let msg = e.to_string();
                            ["sharpness", "offset", "eps"].into_iter().find(|k| msg.contains(&format!("`{k}`"))).unwrap_or("eps")
                        }
                    };
                    push("packet", key, e.to_string());
                    None
                }
            }
        });

        let sc = &self.scattering;
        let sweep = grid.map(|grid| {
            let mut c = SweepConfig::new(grid);
            c.dtau = ev.dtau;
            c.tol = ev.tol;
            c.max_refinements = ev.max_refinements;
            c.aliasing_limit = ev.aliasing_limit;
            c.tau_max = ev.tau_max;
            c.schedule = sc.schedule_taus.clone();
            c.slow_schedule = sc.slow_schedule_taus.clone();
            c.slow_range = (sc.slow_range[0], sc.slow_range[1]);
            c.delta = sc.delta;
            c.cook_window = (sc.cook_window[0], sc.cook_window[1]);
            c.cook_points = sc.cook_points;
            c
        });
        if let Some(c) = &sweep {
            if let Err(e) = c.validate() {
                let msg = e.to_string();
                let (section, key) = VALIDATION_FIELDS
                    .iter()
                    .find(|(name, _, _)| msg.contains(&format!("`{name}`")))
                    .map(|&(_, section, key)| (section, key))
                    .unwrap_or(("evolution", "tau_max"));
                push(section, key, msg);
            }
        }
        if !(sc.slow_range[0] <= sc.slow_range[1]) {
            push("scattering", "slow_range", "lower end exceeds upper end".into());
        }
        // Logarithmic divergence needs the longer horizon.
        if let (Some(a), Some(b)) = (sc.slow_schedule_taus.last(), sc.schedule_taus.last()) {
            if a < b {
                push(
                    "scattering",
                    "slow_schedule_taus",
                    format!("must reach at least as far as schedule_taus ({b}), got {a}"),
                );
            }
        }
        let [cw0, cw1] = sc.cook_window;
        if !(cw0 >= 2.0 && cw1 > cw0 && cw1 <= ev.tau_max) {
            push(
                "scattering",
                "cook_window",
                format!("need 2 <= lo < hi <= tau_max = {}, got [{cw0}, {cw1}]", ev.tau_max),
            );
        }

        if !diags.is_empty() {
            return Err(ConfigError {
                source_name: source_name.to_string(),
                diagnostics: diags,
            });
        }
        Ok(Resolved {
            config: self.clone(),
            hash: self.hash(),
            schedule: schedule.unwrap(),
            grid: grid.unwrap(),
            packet: packet.unwrap(),
            potential,
            sweep: sweep.unwrap(),
        })
    }
}
