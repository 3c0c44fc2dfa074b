//! Run configuration, read from a TOML file. Every field is optional; each
//! subcommand fills in its own defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use bergquant::line_fn::LineFunction;
use bergquant::measure_quant::{MeasureSpec, RadonMeasure1D};
use bergquant::weights::{
    linspace, make_test_potential, CurvatureBounds, Profile, RadialWeight, ReinhardtDomain, TestPotentialParams,
    ToricPotential, GRID_HI, GRID_KNOTS, GRID_LO,
};

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand on the command line when present.
    pub subcommand: Option<String>,
    pub seed: Option<u64>,
    pub k_list: Option<Vec<usize>>,
    pub grid: Option<GridSpec>,
    pub potential: Option<PotentialSpec>,
    /// Second potential for the comparison checks.
    pub psi: Option<PotentialSpec>,
    pub measure: Option<MeasureSpec>,
    /// Two-column text file `t F(t)`, an alternative to `measure`.
    pub measure_file: Option<PathBuf>,
    pub functions: Option<Vec<LineFunction>>,
    pub perturbation: Option<LineFunction>,
    pub s: Option<f64>,
    pub a: Option<f64>,
    pub levels: Option<Vec<f64>>,
    pub domain: Option<ReinhardtDomain>,
    pub weight: Option<WeightSpec>,
    pub radii: Option<Vec<f64>>,
    pub a_list: Option<Vec<f64>>,
    pub m_max: Option<u32>,
    pub tolerance: Option<f64>,
    pub samples: Option<usize>,
    pub count: Option<usize>,
    /// Add the non-radial planar weights to the mt-check family.
    pub planar: Option<bool>,
    pub dimension: Option<usize>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub knots: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lo: GRID_LO,
            hi: GRID_HI,
            knots: GRID_KNOTS,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    FubiniStudy,
    /// `(1 − s)φ_FS(t) + s·φ_FS(t − c)`
    Test { s: f64, c: f64 },
    Mixture { terms: Vec<(f64, f64)> },
    LogPole { beta: f64 },
    Spline {
        knots: Vec<f64>,
        slopes: Vec<f64>,
        #[serde(default)]
        value0: f64,
    },
    /// Two-column text file `t φ(t)`.
    SplineFile { path: PathBuf },
    Shifted { base: Box<PotentialSpec>, by: f64 },
    Halved { base: Box<PotentialSpec> },
    Max { a: Box<PotentialSpec>, b: Box<PotentialSpec> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    /// `a|z|²`
    Gaussian { a: f64 },
    /// One profile per coordinate.
    Radial { profiles: Vec<Profile> },
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Schema checks that do not need any computation.
    pub fn validate(&self, subcommand: &str) -> Result<(), CliError> {
        if let Some(s) = &self.subcommand {
            if s != subcommand {
                return Err(CliError::config(format!("config is for `{s}`, not `{subcommand}`")));
            }
        }
        if let Some(ks) = &self.k_list {
            if ks.is_empty() || ks.contains(&0) {
                return Err(CliError::config("k_list must be non-empty with positive entries"));
            }
        }
        if let Some(g) = &self.grid {
            if !(g.lo < g.hi) || g.knots < 2 || !g.lo.is_finite() || !g.hi.is_finite() {
                return Err(CliError::config("grid needs finite lo < hi and at least 2 knots"));
            }
        }
        if self.measure.is_some() && self.measure_file.is_some() {
            return Err(CliError::config("give either `measure` or `measure_file`, not both"));
        }
        if let Some(d) = &self.domain {
            d.validate().map_err(|e| CliError::config(format!("domain: {e}")))?;
        }
        Ok(())
    }

    pub fn k_list(&self, default: &[usize]) -> Vec<usize> {
        self.k_list.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn grid(&self) -> Vec<f64> {
        let g = self.grid.unwrap_or_default();
        linspace(g.lo, g.hi, g.knots)
    }

    pub fn domain(&self) -> ReinhardtDomain {
        self.domain.clone().unwrap_or_else(ReinhardtDomain::unit_disk)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn potential_or(&self, field: Option<&PotentialSpec>, default: PotentialSpec) -> Result<Potential, CliError> {
        let spec = field.cloned().unwrap_or(default);
        self.build_potential(&spec)
    }

    fn build_potential(&self, spec: &PotentialSpec) -> Result<Potential, CliError> {
        let wrap = |e: bergquant::Error| CliError::config(format!("potential {spec:?}: {e}"));
        Ok(match spec {
            PotentialSpec::FubiniStudy => Potential::plain(ToricPotential::fubini_study(), "fubini_study"),
            PotentialSpec::Test { s, c } => {
                let tp = make_test_potential(TestPotentialParams { s: *s, c: *c }).map_err(wrap)?;
                Potential {
                    potential: tp.potential,
                    bounds: Some(tp.bounds),
                    label: format!("test(s={s},c={c})"),
                }
            }
            PotentialSpec::Mixture { terms } => {
                Potential::plain(ToricPotential::mixture(terms.clone()).map_err(wrap)?, "mixture")
            }
            PotentialSpec::LogPole { beta } => {
                Potential::plain(ToricPotential::log_pole(*beta).map_err(wrap)?, &format!("log_pole({beta})"))
            }
            PotentialSpec::Spline { knots, slopes, value0 } => Potential::plain(
                ToricPotential::spline_from_slopes(knots.clone(), slopes.clone(), *value0).map_err(wrap)?,
                "spline",
            ),
            PotentialSpec::SplineFile { path } => {
                let path = self.resolve(path);
                let (t, v) = read_two_columns(&path)?;
                Potential::plain(
                    ToricPotential::spline_from_values(t, v).map_err(wrap)?,
                    &format!("spline_file({})", path.display()),
                )
            }
            PotentialSpec::Shifted { base, by } => {
                let b = self.build_potential(base)?;
                Potential {
                    potential: b.potential.shifted(*by),
                    bounds: b.bounds,
                    label: format!("{}+{by}", b.label),
                }
            }
            PotentialSpec::Halved { base } => {
                let b = self.build_potential(base)?;
                Potential::plain(b.potential.halved(), &format!("half({})", b.label))
            }
            PotentialSpec::Max { a, b } => {
                let (a, b) = (self.build_potential(a)?, self.build_potential(b)?);
                Potential::plain(
                    ToricPotential::max(&a.potential, &b.potential),
                    &format!("max({},{})", a.label, b.label),
                )
            }
        })
    }

    pub fn measure(&self, default: MeasureSpec) -> Result<RadonMeasure1D, CliError> {
        if let Some(p) = &self.measure_file {
            let (t, cdf) = read_two_columns(&self.resolve(p))?;
            return Ok(MeasureSpec::Sampled { t, cdf }.into());
        }
        Ok(self.measure.clone().unwrap_or(default).into())
    }

    pub fn radial_weight(&self, domain: &ReinhardtDomain) -> Result<RadialWeight, CliError> {
        let w = match self.weight.clone().unwrap_or(WeightSpec::Gaussian { a: 1.0 }) {
            WeightSpec::Gaussian { a } => RadialWeight::gaussian(a, domain),
            WeightSpec::Radial { profiles } => RadialWeight::new(profiles, domain),
        };
        w.map_err(|e| CliError::config(format!("weight: {e}")))
    }
}

/// A configured potential with its certified curvature bounds, when known
/// in closed form.
#[derive(Debug, Clone)]
pub struct Potential {
    pub potential: ToricPotential,
    pub bounds: Option<CurvatureBounds>,
    pub label: String,
}

impl Potential {
    fn plain(potential: ToricPotential, label: &str) -> Self {
        Self {
            potential,
            bounds: None,
            label: label.to_string(),
        }
    }
}

/// Whitespace- or comma-separated `x y` pairs; `#` starts a comment.
pub fn read_two_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let parse = |s: &str| s.parse::<f64>().ok();
        match cols.as_slice() {
            [a, b] if parse(a).is_some() && parse(b).is_some() => {
                xs.push(parse(a).unwrap());
                ys.push(parse(b).unwrap());
            }
            _ => {
                return Err(CliError::config(format!(
                    "{}:{}: expected two numbers",
                    path.display(),
                    no + 1
                )))
            }
        }
    }
    if xs.len() < 2 {
        return Err(CliError::config(format!("{}: need at least two rows", path.display())));
    }
    Ok((xs, ys))
}
