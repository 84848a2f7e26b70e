//! TOML analysis configuration and its conversion to library types.
//!
//! Human units at this boundary only: geometry and defect dimensions in
//! micrometers, tip masses in micrograms (`tip_mass_ug`) or nanograms
//! (`tip_mass_ng`), moduli in GPa. Everything downstream is SI.

use cosrod::{
    make_blob_shaped, make_jitter, make_nick_shaped, Boundary, DefectProfile, Material,
    RectangleSection, RodSpec, ShapeKind,
};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub name: Option<String>,
    pub material: Option<MaterialConfig>,
    pub geometry: GeometryConfig,
    #[serde(default, rename = "defect")]
    pub defects: Vec<DefectConfig>,
    #[serde(default, rename = "case")]
    pub cases: Vec<CaseConfig>,
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub youngs_modulus_gpa: Option<f64>,
    pub shear_modulus_gpa: Option<f64>,
    pub poisson_ratio: Option<f64>,
    pub density_kg_m3: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub length_um: f64,
    pub width_um: f64,
    pub height_um: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectConfig {
    pub name: String,
    pub kind: DefectKindConfig,
    pub position_um: Option<f64>,
    pub depth_um: Option<f64>,
    /// Defaults to the depth (isotropic etch error).
    pub extent_um: Option<f64>,
    pub shape: Option<ShapeConfig>,
    /// Jitter moments.
    pub bar_one_um: Option<f64>,
    pub bar_s_um2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefectKindConfig {
    Nick,
    Blob,
    Jitter,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeConfig {
    Indicator,
    RaisedCosine,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub name: String,
    pub fixed_end: FixedEndConfig,
    pub tip_mass_ug: Option<f64>,
    pub tip_mass_ng: Option<f64>,
    #[serde(default)]
    pub defects: Vec<String>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedEndConfig {
    End1,
    End2,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub elements: Vec<usize>,
}

/// Config semantics errors (still exit code 2: the file parsed but does
/// not describe a runnable analysis).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

const UM: f64 = 1e-6;
const UG: f64 = 1e-9;
const NG: f64 = 1e-12;

pub struct ResolvedCase {
    pub name: String,
    pub boundary: Boundary,
    pub tip_mass_kg: f64,
    pub profiles: Vec<DefectProfile>,
}

pub struct ResolvedConfig {
    pub name: String,
    pub rod: RodSpec,
    pub defects: Vec<(String, DefectProfile)>,
    pub cases: Vec<ResolvedCase>,
    pub ladder: Vec<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    fn material(&self) -> Result<Material, ConfigError> {
        let default = Material::silicon();
        let Some(m) = &self.material else {
            return Ok(default);
        };
        let e = m.youngs_modulus_gpa.map(|v| v * 1e9).unwrap_or(default.youngs_modulus);
        let g = match (m.shear_modulus_gpa, m.poisson_ratio) {
            (Some(_), Some(_)) => {
                return Err(ConfigError(
                    "material: give either shear_modulus_gpa or poisson_ratio, not both".into(),
                ))
            }
            (Some(g), None) => g * 1e9,
            (None, Some(nu)) => e / (2.0 * (1.0 + nu)),
            (None, None) => {
                if m.youngs_modulus_gpa.is_some() {
                    // Keep the default Poisson ratio against the new E.
                    e / (2.0 * 1.28)
                } else {
                    default.shear_modulus
                }
            }
        };
        let rho = m.density_kg_m3.unwrap_or(default.density);
        Material::new(e, g, rho).map_err(|err| ConfigError(err.to_string()))
    }

    pub fn resolve(&self) -> Result<ResolvedConfig, ResolveError> {
        let material = self.material().map_err(ResolveError::Config)?;
        let section = RectangleSection::new(self.geometry.width_um * UM, self.geometry.height_um * UM)
            .map_err(ResolveError::Solver)?;
        let rod = RodSpec::new(self.geometry.length_um * UM, material, section)
            .map_err(ResolveError::Solver)?;

        let mut defects = Vec::new();
        for d in &self.defects {
            let profile = resolve_defect(&rod, d)?;
            if defects.iter().any(|(n, _)| n == &d.name) {
                return Err(ResolveError::Config(ConfigError(format!(
                    "duplicate defect name '{}'",
                    d.name
                ))));
            }
            defects.push((d.name.clone(), profile));
        }

        let mut cases = Vec::new();
        for c in &self.cases {
            let boundary = match c.fixed_end {
                FixedEndConfig::End1 => Boundary::CLAMP_END1,
                FixedEndConfig::End2 => Boundary::CLAMP_END2,
            };
            let tip_mass_kg = match (c.tip_mass_ug, c.tip_mass_ng) {
                (Some(_), Some(_)) => {
                    return Err(ResolveError::Config(ConfigError(format!(
                        "case '{}': give tip_mass_ug or tip_mass_ng, not both",
                        c.name
                    ))))
                }
                (Some(ug), None) => ug * UG,
                (None, Some(ng)) => ng * NG,
                (None, None) => 0.0,
            };
            let mut profiles = Vec::new();
            for want in &c.defects {
                let found = defects
                    .iter()
                    .find(|(n, _)| n == want)
                    .ok_or_else(|| {
                        ResolveError::Config(ConfigError(format!(
                            "case '{}' references unknown defect '{}'",
                            c.name, want
                        )))
                    })?;
                profiles.push(found.1.clone());
            }
            cases.push(ResolvedCase {
                name: c.name.clone(),
                boundary,
                tip_mass_kg,
                profiles,
            });
        }

        Ok(ResolvedConfig {
            name: self.name.clone().unwrap_or_else(|| "analysis".into()),
            rod,
            defects,
            cases,
            ladder: self.verify.as_ref().map(|v| v.elements.clone()).unwrap_or_default(),
        })
    }
}

/// Resolution failures split by exit-code family.
pub enum ResolveError {
    /// Exit 2.
    Config(ConfigError),
    /// Exit 3.
    Solver(cosrod::Error),
}

fn require(v: Option<f64>, what: &str, name: &str) -> Result<f64, ResolveError> {
    v.ok_or_else(|| ResolveError::Config(ConfigError(format!("defect '{name}': missing {what}"))))
}

fn resolve_defect(rod: &RodSpec, d: &DefectConfig) -> Result<DefectProfile, ResolveError> {
    let shape = match d.shape {
        Some(ShapeConfig::RaisedCosine) => ShapeKind::RaisedCosine,
        _ => ShapeKind::Indicator,
    };
    match d.kind {
        DefectKindConfig::Nick | DefectKindConfig::Blob => {
            if d.bar_one_um.is_some() || d.bar_s_um2.is_some() {
                return Err(ResolveError::Config(ConfigError(format!(
                    "defect '{}': bar moments are for kind = \"jitter\"",
                    d.name
                ))));
            }
            let s0 = require(d.position_um, "position_um", &d.name)? * UM;
            let depth = require(d.depth_um, "depth_um", &d.name)? * UM;
            let extent = d.extent_um.map(|v| v * UM).unwrap_or(depth);
            let made = if d.kind == DefectKindConfig::Nick {
                make_nick_shaped(rod, s0, extent, depth, shape)
            } else {
                make_blob_shaped(rod, s0, extent, depth, shape)
            };
            made.map_err(ResolveError::Solver)
        }
        DefectKindConfig::Jitter => {
            if d.position_um.is_some() || d.depth_um.is_some() || d.extent_um.is_some() {
                return Err(ResolveError::Config(ConfigError(format!(
                    "defect '{}': jitter takes bar_one_um / bar_s_um2 only",
                    d.name
                ))));
            }
            let bar_one = require(d.bar_one_um, "bar_one_um", &d.name)? * UM;
            let bar_s = require(d.bar_s_um2, "bar_s_um2", &d.name)? * UM * UM;
            make_jitter(rod, bar_one, bar_s).map_err(ResolveError::Solver)
        }
    }
}
