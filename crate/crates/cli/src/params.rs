//! Typed parameter sets, shared by the argument parser, the manifest
//! serializer, and the replay loader. Every struct derives both `clap`
//! and `serde` so the command line, the recorded manifest, and a replayed
//! manifest can never disagree about defaults: `Default` pulls straight
//! from the library's config types, clap uses it for flag defaults, and
//! serde uses it for fields a manifest omits.

use clap::Args;
use latref::phantom::PhantomSpec;
use latref::{
    ClipperConfig, FeasibilityBounds, FeasibilityLossConfig, GuoConfig, StencilMode,
    DEFAULT_HISTOGRAM_BINS, DEFAULT_HISTOGRAM_RANGE,
};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// One inclusion, as `center_axial,center_lateral,radius,contrast,softness`
/// (all mm except the dimensionless contrast).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionParam {
    pub center_axial: f64,
    pub center_lateral: f64,
    pub radius: f64,
    pub contrast: f64,
    pub softness: f64,
}

impl FromStr for InclusionParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 5 {
            return Err(format!(
                "expected center_axial,center_lateral,radius,contrast,softness — got {} fields",
                parts.len()
            ));
        }
        let mut v = [0.0; 5];
        for (slot, raw) in v.iter_mut().zip(&parts) {
            *slot = raw.trim().parse::<f64>().map_err(|e| format!("'{raw}': {e}"))?;
        }
        Ok(Self {
            center_axial: v[0],
            center_lateral: v[1],
            radius: v[2],
            contrast: v[3],
            softness: v[4],
        })
    }
}

impl InclusionParam {
    pub fn to_inclusion(self) -> latref::phantom::Inclusion {
        latref::phantom::Inclusion {
            center_axial_mm: self.center_axial,
            center_lateral_mm: self.center_lateral,
            radius_mm: self.radius,
            strain_contrast: self.contrast,
            edge_softness_mm: self.softness,
        }
    }
}

/// `row_start,col_start,rows,cols` in samples.
pub fn parse_roi(s: &str) -> Result<[usize; 4], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected row_start,col_start,rows,cols — got {} fields", parts.len()));
    }
    let mut v = [0_usize; 4];
    for (slot, raw) in v.iter_mut().zip(&parts) {
        *slot = raw.trim().parse::<usize>().map_err(|e| format!("'{raw}': {e}"))?;
    }
    Ok(v)
}

/// `lo,hi` as floats.
pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected lo,hi — got {} fields", parts.len()));
    }
    let lo = parts[0].trim().parse::<f64>().map_err(|e| format!("'{}': {e}", parts[0]))?;
    let hi = parts[1].trim().parse::<f64>().map_err(|e| format!("'{}': {e}", parts[1]))?;
    Ok((lo, hi))
}

/// Stencil variant for the relaxation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StencilChoice {
    /// Symmetric mixed-partial stencil; vanishes on affine fields.
    Corrected,
    /// Asymmetric legacy index pattern, for reproducing historical outputs.
    PaperLiteral,
}

impl StencilChoice {
    pub fn to_mode(self) -> StencilMode {
        match self {
            StencilChoice::Corrected => StencilMode::Corrected,
            StencilChoice::PaperLiteral => StencilMode::PaperLiteral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomParams {
    /// Grid rows (axial samples)
    #[arg(long, default_value_t = PhantomParams::default().rows)]
    pub rows: usize,
    /// Grid columns (lateral samples)
    #[arg(long, default_value_t = PhantomParams::default().cols)]
    pub cols: usize,
    /// Axial sample spacing, mm
    #[arg(long, default_value_t = PhantomParams::default().da)]
    pub da: f64,
    /// Lateral sample spacing, mm
    #[arg(long, default_value_t = PhantomParams::default().dl)]
    pub dl: f64,
    /// Applied axial compression magnitude
    #[arg(long, default_value_t = PhantomParams::default().eps0)]
    pub eps0: f64,
    /// Lateral-to-axial strain ratio of the background
    #[arg(long, default_value_t = PhantomParams::default().nu)]
    pub nu: f64,
    /// Inclusion spec, repeatable: center_axial,center_lateral,radius,contrast,softness
    #[arg(long = "inclusion", value_name = "A,L,R,CONTRAST,SOFT", allow_hyphen_values = true)]
    pub inclusions: Vec<InclusionParam>,
    /// Gaussian noise std on the axial displacement, mm
    #[arg(long, default_value_t = 0.0)]
    pub noise_axial: f64,
    /// Gaussian noise std on the lateral displacement, mm
    #[arg(long, default_value_t = 0.0)]
    pub noise_lateral: f64,
    /// Noise generator seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl Default for PhantomParams {
    fn default() -> Self {
        let s = PhantomSpec::default();
        Self {
            rows: s.geometry.rows(),
            cols: s.geometry.cols(),
            da: s.geometry.axial_spacing(),
            dl: s.geometry.lateral_spacing(),
            eps0: s.applied_axial_strain,
            nu: s.poisson_ratio,
            inclusions: Vec::new(),
            noise_axial: s.noise_std_axial,
            noise_lateral: s.noise_std_lateral,
            seed: s.seed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrainParams {}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EprParams {
    /// Lower feasibility bound on the strain ratio
    #[arg(long, default_value_t = EprParams::default().vmin)]
    pub vmin: f64,
    /// Upper feasibility bound on the strain ratio
    #[arg(long, default_value_t = EprParams::default().vmax)]
    pub vmax: f64,
    /// Axial-strain magnitude below which a pixel counts as degenerate
    #[arg(long, default_value_t = EprParams::default().floor)]
    pub floor: f64,
    /// Lateral-gradient weight inside the smoothness loss
    #[arg(long, default_value_t = EprParams::default().beta)]
    pub beta: f64,
    /// Smoothness weight in the total loss
    #[arg(long, default_value_t = EprParams::default().lambda_vs)]
    pub lambda_vs: f64,
}

impl Default for EprParams {
    fn default() -> Self {
        let l = FeasibilityLossConfig::default();
        Self {
            vmin: l.bounds.v_min(),
            vmax: l.bounds.v_max(),
            floor: l.epr_floor,
            beta: l.beta,
            lambda_vs: l.lambda_vs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClipParams {
    /// Lower feasibility bound on the strain ratio
    #[arg(long, default_value_t = ClipParams::default().vmin)]
    pub vmin: f64,
    /// Upper feasibility bound on the strain ratio
    #[arg(long, default_value_t = ClipParams::default().vmax)]
    pub vmax: f64,
    /// Axial-strain magnitude below which a pixel counts as degenerate
    #[arg(long, default_value_t = ClipParams::default().floor)]
    pub floor: f64,
    /// Clip/re-integrate sweeps
    #[arg(long, default_value_t = ClipParams::default().iterations)]
    pub iterations: usize,
    /// Early stop once the largest update falls below this, mm
    #[arg(long)]
    pub tol: Option<f64>,
    /// Legacy update: flip the re-integration sign and drop the spacing
    #[arg(long, default_value_t = false)]
    pub literal_sign: bool,
}

impl Default for ClipParams {
    fn default() -> Self {
        let c = ClipperConfig::default();
        Self {
            vmin: c.bounds.v_min(),
            vmax: c.bounds.v_max(),
            floor: c.epr_floor,
            iterations: c.iterations,
            tol: c.convergence_tol,
            literal_sign: c.literal_sign,
        }
    }
}

impl ClipParams {
    pub fn to_config(&self) -> latref::Result<ClipperConfig> {
        Ok(ClipperConfig {
            bounds: FeasibilityBounds::new(self.vmin, self.vmax)?,
            iterations: self.iterations,
            epr_floor: self.floor,
            convergence_tol: self.tol,
            literal_sign: self.literal_sign,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuoParams {
    /// Relaxation iterations
    #[arg(long, default_value_t = GuoParams::default().iterations)]
    pub iterations: usize,
    /// Momentum weight on the previous update
    #[arg(long, default_value_t = GuoParams::default().lambda1)]
    pub lambda1: f64,
    /// Step size applied to the correction
    #[arg(long, default_value_t = GuoParams::default().lambda2)]
    pub lambda2: f64,
    /// Per-iteration Gaussian smoothing width, samples (0 disables)
    #[arg(long, default_value_t = GuoParams::default().sigma)]
    pub sigma: f64,
    /// Mixed-partial stencil variant
    #[arg(long, value_enum, default_value_t = StencilChoice::Corrected)]
    pub stencil: StencilChoice,
}

impl Default for GuoParams {
    fn default() -> Self {
        let g = GuoConfig::default();
        Self {
            iterations: g.iterations,
            lambda1: g.lambda1,
            lambda2: g.lambda2,
            sigma: g.gaussian_sigma,
            stencil: StencilChoice::Corrected,
        }
    }
}

impl GuoParams {
    pub fn to_config(&self) -> GuoConfig {
        GuoConfig {
            iterations: self.iterations,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            gaussian_sigma: self.sigma,
            stencil_mode: self.stencil.to_mode(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineParams {
    /// Lower feasibility bound on the strain ratio
    #[arg(long, default_value_t = RefineParams::default().vmin)]
    pub vmin: f64,
    /// Upper feasibility bound on the strain ratio
    #[arg(long, default_value_t = RefineParams::default().vmax)]
    pub vmax: f64,
    /// Axial-strain magnitude below which a pixel counts as degenerate
    #[arg(long, default_value_t = RefineParams::default().floor)]
    pub floor: f64,
    /// Clipper stage: clip/re-integrate sweeps
    #[arg(long, default_value_t = RefineParams::default().iterations)]
    pub iterations: usize,
    /// Clipper stage: early stop once the largest update falls below this, mm
    #[arg(long)]
    pub tol: Option<f64>,
    /// Clipper stage: legacy sign- and spacing-free update
    #[arg(long, default_value_t = false)]
    pub literal_sign: bool,
    /// Relaxation stage: iterations
    #[arg(long, default_value_t = RefineParams::default().guo_iterations)]
    pub guo_iterations: usize,
    /// Relaxation stage: momentum weight
    #[arg(long, default_value_t = RefineParams::default().lambda1)]
    pub lambda1: f64,
    /// Relaxation stage: step size
    #[arg(long, default_value_t = RefineParams::default().lambda2)]
    pub lambda2: f64,
    /// Relaxation stage: per-iteration Gaussian width, samples
    #[arg(long, default_value_t = RefineParams::default().sigma)]
    pub sigma: f64,
    /// Relaxation stage: mixed-partial stencil variant
    #[arg(long, value_enum, default_value_t = StencilChoice::Corrected)]
    pub stencil: StencilChoice,
}

impl Default for RefineParams {
    fn default() -> Self {
        let c = ClipParams::default();
        let g = GuoParams::default();
        Self {
            vmin: c.vmin,
            vmax: c.vmax,
            floor: c.floor,
            iterations: c.iterations,
            tol: c.tol,
            literal_sign: c.literal_sign,
            guo_iterations: g.iterations,
            lambda1: g.lambda1,
            lambda2: g.lambda2,
            sigma: g.sigma,
            stencil: g.stencil,
        }
    }
}

impl RefineParams {
    pub fn clip_config(&self) -> latref::Result<ClipperConfig> {
        ClipParams {
            vmin: self.vmin,
            vmax: self.vmax,
            floor: self.floor,
            iterations: self.iterations,
            tol: self.tol,
            literal_sign: self.literal_sign,
        }
        .to_config()
    }

    pub fn guo_config(&self) -> GuoConfig {
        GuoParams {
            iterations: self.guo_iterations,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            sigma: self.sigma,
            stencil: self.stencil,
        }
        .to_config()
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsParams {
    /// Region of interest, repeatable: first is the target, second the background
    #[arg(
        long = "roi",
        value_name = "R0,C0,ROWS,COLS",
        value_parser = parse_roi,
        allow_hyphen_values = true,
        conflicts_with_all = ["roi_t", "roi_b"]
    )]
    pub roi: Vec<[usize; 4]>,
    /// Target region of interest (alternative to positional --roi order)
    #[arg(long = "roi-t", value_name = "R0,C0,ROWS,COLS", value_parser = parse_roi)]
    #[serde(skip)]
    pub roi_t: Option<[usize; 4]>,
    /// Background region of interest (requires --roi-t)
    #[arg(long = "roi-b", value_name = "R0,C0,ROWS,COLS", value_parser = parse_roi, requires = "roi_t")]
    #[serde(skip)]
    pub roi_b: Option<[usize; 4]>,
    /// Lower feasibility bound on the strain ratio
    #[arg(long, default_value_t = MetricsParams::default().vmin)]
    pub vmin: f64,
    /// Upper feasibility bound on the strain ratio
    #[arg(long, default_value_t = MetricsParams::default().vmax)]
    pub vmax: f64,
    /// Axial-strain magnitude below which a pixel counts as degenerate
    #[arg(long, default_value_t = MetricsParams::default().floor)]
    pub floor: f64,
    /// Lateral-gradient weight inside the smoothness loss
    #[arg(long, default_value_t = MetricsParams::default().beta)]
    pub beta: f64,
    /// Smoothness weight in the total loss
    #[arg(long, default_value_t = MetricsParams::default().lambda_vs)]
    pub lambda_vs: f64,
}

impl Default for MetricsParams {
    fn default() -> Self {
        let l = FeasibilityLossConfig::default();
        Self {
            roi: Vec::new(),
            roi_t: None,
            roi_b: None,
            vmin: l.bounds.v_min(),
            vmax: l.bounds.v_max(),
            floor: l.epr_floor,
            beta: l.beta,
            lambda_vs: l.lambda_vs,
        }
    }
}

impl MetricsParams {
    /// Folds `--roi-t`/`--roi-b` into the ordered `roi` list so manifests
    /// record regions one way only.
    pub fn normalize(mut self) -> Self {
        if let Some(t) = self.roi_t.take() {
            self.roi = vec![t];
            if let Some(b) = self.roi_b.take() {
                self.roi.push(b);
            }
        }
        self.roi_b = None;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistParams {
    /// Number of bins
    #[arg(long, default_value_t = HistParams::default().bins)]
    pub bins: usize,
    /// Bin range as lo,hi
    #[arg(
        long,
        value_name = "LO,HI",
        value_parser = parse_range,
        allow_hyphen_values = true,
        default_value = "-0.5,1.5"
    )]
    pub range: (f64, f64),
    /// Lower feasibility bound on the strain ratio
    #[arg(long, default_value_t = HistParams::default().vmin)]
    pub vmin: f64,
    /// Upper feasibility bound on the strain ratio
    #[arg(long, default_value_t = HistParams::default().vmax)]
    pub vmax: f64,
    /// Axial-strain magnitude below which a pixel counts as degenerate
    #[arg(long, default_value_t = HistParams::default().floor)]
    pub floor: f64,
}

impl Default for HistParams {
    fn default() -> Self {
        let b = FeasibilityBounds::default();
        Self {
            bins: DEFAULT_HISTOGRAM_BINS,
            range: DEFAULT_HISTOGRAM_RANGE,
            vmin: b.v_min(),
            vmax: b.v_max(),
            floor: latref::DEFAULT_EPR_FLOOR,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderParams {
    /// Fixed gray scale as lo,hi (default: stretch the grid's own range)
    #[arg(long, value_name = "LO,HI", value_parser = parse_range, allow_hyphen_values = true)]
    pub range: Option<(f64, f64)>,
}

/// A fully typed pipeline step, reconstructible from a manifest.
#[derive(Debug, Clone, PartialEq)]
pub enum StepParams {
    Phantom(PhantomParams),
    Strain(StrainParams),
    Epr(EprParams),
    Clip(ClipParams),
    Guo(GuoParams),
    Refine(RefineParams),
    Metrics(MetricsParams),
    Hist(HistParams),
    Render(RenderParams),
}

impl StepParams {
    pub fn subcommand(&self) -> &'static str {
        match self {
            StepParams::Phantom(_) => "phantom",
            StepParams::Strain(_) => "strain",
            StepParams::Epr(_) => "epr",
            StepParams::Clip(_) => "clip",
            StepParams::Guo(_) => "guo",
            StepParams::Refine(_) => "refine",
            StepParams::Metrics(_) => "metrics",
            StepParams::Hist(_) => "hist",
            StepParams::Render(_) => "render",
        }
    }

    /// Parameters as they appear under `"parameters"` in a manifest.
    pub fn to_value(&self) -> serde_json::Value {
        let v = match self {
            StepParams::Phantom(p) => serde_json::to_value(p),
            StepParams::Strain(p) => serde_json::to_value(p),
            StepParams::Epr(p) => serde_json::to_value(p),
            StepParams::Clip(p) => serde_json::to_value(p),
            StepParams::Guo(p) => serde_json::to_value(p),
            StepParams::Refine(p) => serde_json::to_value(p),
            StepParams::Metrics(p) => serde_json::to_value(p),
            StepParams::Hist(p) => serde_json::to_value(p),
            StepParams::Render(p) => serde_json::to_value(p),
        };
        v.expect("parameter structs always serialize")
    }

    /// Rebuilds typed parameters from manifest JSON; absent fields take the
    /// same defaults the command line uses. `null` means "all defaults".
    pub fn from_json(subcommand: &str, value: serde_json::Value) -> Result<Self, String> {
        let v = if value.is_null() {
            serde_json::Value::Object(serde_json::Map::new())
        } else {
            value
        };
        let parsed = match subcommand {
            "phantom" => serde_json::from_value(v).map(StepParams::Phantom),
            "strain" => serde_json::from_value(v).map(StepParams::Strain),
            "epr" => serde_json::from_value(v).map(StepParams::Epr),
            "clip" => serde_json::from_value(v).map(StepParams::Clip),
            "guo" => serde_json::from_value(v).map(StepParams::Guo),
            "refine" => serde_json::from_value(v).map(StepParams::Refine),
            "metrics" => serde_json::from_value(v).map(StepParams::Metrics),
            "hist" => serde_json::from_value(v).map(StepParams::Hist),
            "render" => serde_json::from_value(v).map(StepParams::Render),
            other => return Err(format!("unknown subcommand '{other}'")),
        };
        parsed.map_err(|e| format!("bad parameters for '{subcommand}': {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusion_param_round_trips_through_from_str() {
        let p: InclusionParam = "4.9,19.2,4.0,0.5,1.0".parse().unwrap();
        assert_eq!(p.radius, 4.0);
        assert_eq!(p.contrast, 0.5);
        assert!("1,2,3".parse::<InclusionParam>().is_err());
        assert!("a,b,c,d,e".parse::<InclusionParam>().is_err());
    }

    #[test]
    fn roi_and_range_parsers_validate_shape() {
        assert_eq!(parse_roi("88,118,80,20").unwrap(), [88, 118, 80, 20]);
        assert!(parse_roi("1,2,3").is_err());
        assert_eq!(parse_range("-0.5,1.5").unwrap(), (-0.5, 1.5));
        assert!(parse_range("0.5").is_err());
    }

    #[test]
    fn defaults_mirror_the_library_configs() {
        let c = ClipParams::default();
        assert_eq!(c.iterations, ClipperConfig::default().iterations);
        assert_eq!(c.vmin, FeasibilityBounds::default().v_min());
        let g = GuoParams::default();
        assert_eq!(g.iterations, GuoConfig::default().iterations);
        assert_eq!(g.sigma, GuoConfig::default().gaussian_sigma);
        let h = HistParams::default();
        assert_eq!(h.bins, DEFAULT_HISTOGRAM_BINS);
        assert_eq!(h.range, DEFAULT_HISTOGRAM_RANGE);
        // the clap default string must parse to the same range the serde
        // default uses, or CLI runs and replays would disagree
        assert_eq!(parse_range("-0.5,1.5").unwrap(), DEFAULT_HISTOGRAM_RANGE);
    }

    #[test]
    fn partial_manifest_parameters_fill_with_defaults() {
        let v: serde_json::Value = serde_json::json!({"rows": 16, "nu": 0.5});
        match StepParams::from_json("phantom", v).unwrap() {
            StepParams::Phantom(p) => {
                assert_eq!(p.rows, 16);
                assert_eq!(p.nu, 0.5);
                assert_eq!(p.cols, PhantomParams::default().cols);
                assert_eq!(p.seed, 0);
            }
            other => panic!("wrong variant {other:?}"),
        }
        assert!(StepParams::from_json("phantom", serde_json::json!({"rowz": 1})).is_err());
        assert!(StepParams::from_json("bogus", serde_json::Value::Null).is_err());
    }

    #[test]
    fn roi_t_and_roi_b_fold_into_the_ordered_list() {
        let p = MetricsParams {
            roi_t: Some([1, 2, 3, 4]),
            roi_b: Some([5, 6, 7, 8]),
            ..Default::default()
        }
        .normalize();
        assert_eq!(p.roi, vec![[1, 2, 3, 4], [5, 6, 7, 8]]);
        assert_eq!(p.roi_t, None);
        // the alternates never reach the manifest
        let v = serde_json::to_value(&p).unwrap();
        assert!(v.get("roi_t").is_none());
        assert!(v.get("roi_b").is_none());
    }

    #[test]
    fn stencil_choice_serializes_kebab_case() {
        let s = serde_json::to_string(&StencilChoice::PaperLiteral).unwrap();
        assert_eq!(s, "\"paper-literal\"");
        let back: StencilChoice = serde_json::from_str("\"corrected\"").unwrap();
        assert_eq!(back, StencilChoice::Corrected);
    }
}
