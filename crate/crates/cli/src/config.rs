//! Plan files and flag overrides. A plan is one flat JSON object; every
//! command reads the knobs it needs and rejects what it cannot use at
//! validation time, with the offending field named in the error.

use anyhow::{anyhow, bail, Context, Result};
use jspec_core::params::{self, JacobiFamily, NormalizerKind};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySpec {
    /// Builtin by name: `"hermite"`.
    Name(String),
    /// Builtin with numeric options: `{"name": "meixner", "options": {"c": 0.5, "beta0": 1.0}}`.
    WithOptions {
        name: String,
        #[serde(default)]
        options: BTreeMap<String, f64>,
    },
    /// Entry tables from a separate JSON file: `{"path": "family.json"}`.
    FromFile { path: PathBuf },
}

impl FamilySpec {
    pub fn resolve(&self) -> Result<JacobiFamily> {
        match self {
            FamilySpec::Name(name) => {
                params::builtin_family(name, &BTreeMap::new()).map_err(|e| anyhow!("{e}"))
            }
            FamilySpec::WithOptions { name, options } => {
                params::builtin_family(name, options).map_err(|e| anyhow!("{e}"))
            }
            FamilySpec::FromFile { path } => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading family file {}", path.display()))?;
                JacobiFamily::custom_from_json(&text)
                    .map_err(|e| anyhow!("{}: {e}", path.display()))
            }
        }
    }
}

/// One run: a command plus every knob any command understands. Unknown keys
/// are rejected so typos surface as parse errors instead of silent defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must match the invoked subcommand when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    /// Primary size knob: truncation size (spectrum), depth (cauchy,
    /// levinson, kernel, classify) or samples per interval (stieltjes).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    /// The command's single declared tolerance; meaning documented per
    /// command in --help.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Probe points, written like `"0+1i"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<String>>,
    /// Offsets for the boundary-value extrapolation, strictly decreasing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalizer: Option<NormalizerKind>,
    /// First block of the ratio product (levinson).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_start: Option<usize>,
    /// Index shift `L` for the kernel-measure comparison (kernel).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<usize>,
    /// Probe depth for fitting the limiting density model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_depth: Option<usize>,
    /// gapcount: fail unless counts are constant over the tail of n_grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub require_constant: Option<bool>,
    /// Recorded justification when `tol` is wider than the command default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widened_reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Always true: runs carry no ambient randomness, so equal plans give
    /// byte-equal artifacts.
    #[serde(default = "default_true")]
    pub deterministic: bool,
}

fn default_true() -> bool {
    true
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            family: None,
            n: None,
            n_grid: None,
            tol: None,
            z: None,
            eps: None,
            intervals: None,
            normalizer: None,
            m_start: None,
            shift: None,
            model_depth: None,
            require_constant: None,
            widened_reason: None,
            label: None,
            out: None,
            deterministic: true,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        // serde_json reports line and column; keep them attached to the path.
        serde_json::from_str(&text)
            .map_err(|e| anyhow!("{}: {e}", path.display()))
    }

    /// Flag overrides beat the file; the command name comes from the CLI.
    pub fn apply_overrides(
        &mut self,
        command: &str,
        family: Option<&str>,
        n: Option<usize>,
        z: Option<&str>,
        out: Option<&Path>,
    ) -> Result<()> {
        if let Some(declared) = &self.command {
            if declared != command {
                bail!(
                    "field `command`: plan declares `{declared}` but `{command}` was invoked"
                );
            }
        }
        self.command = Some(command.to_string());
        if let Some(name) = family {
            self.family = Some(FamilySpec::Name(name.to_string()));
        }
        if let Some(n) = n {
            self.n = Some(n);
        }
        if let Some(z) = z {
            parse_complex(z)?; // reject early, with the flag's own text
            self.z = Some(vec![z.to_string()]);
        }
        if let Some(out) = out {
            self.out = Some(out.to_path_buf());
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.deterministic {
            bail!("field `deterministic`: runs are always deterministic; `false` is not supported");
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                bail!("field `tol`: must be positive and finite, got {tol}");
            }
        }
        if let Some(grid) = &self.n_grid {
            if grid.is_empty() {
                bail!("field `n_grid`: must not be empty");
            }
            if !grid.windows(2).all(|w| w[0] < w[1]) {
                bail!("field `n_grid`: must be strictly increasing, got {grid:?}");
            }
        }
        if let Some(eps) = &self.eps {
            if eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
                bail!("field `eps`: all offsets must be positive and finite");
            }
            if !eps.windows(2).all(|w| w[1] < w[0]) {
                bail!("field `eps`: offsets must be strictly decreasing");
            }
        }
        if let Some(intervals) = &self.intervals {
            for &(lo, hi) in intervals {
                if !(lo < hi) {
                    bail!("field `intervals`: ({lo}, {hi}) is empty");
                }
            }
        }
        if let Some(zs) = &self.z {
            for z in zs {
                parse_complex(z)?;
            }
        }
        Ok(())
    }

    pub fn family(&self) -> Result<JacobiFamily> {
        self.family
            .as_ref()
            .ok_or_else(|| anyhow!("field `family`: required (or pass --family)"))?
            .resolve()
    }

    pub fn z_points(&self, default: Complex64) -> Result<Vec<Complex64>> {
        match &self.z {
            None => Ok(vec![default]),
            Some(zs) => zs.iter().map(|s| parse_complex(s)).collect(),
        }
    }

    /// Canonical digest of the effective plan, stable across runs.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("plan serializes");
        format!("fnv1a64:{:016x}", fnv1a64(&bytes))
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Parse `a+bi` style literals: `2`, `i`, `-i`, `2i`, `0+1i`, `1.5-2e-3i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || anyhow!("`{s}`: expected a complex literal like `0+1i`");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| bad());
    };
    // Split before the sign of the imaginary part; signs directly after an
    // exponent marker belong to the exponent.
    let b = body.as_bytes();
    let split = (1..b.len())
        .rev()
        .find(|&k| (b[k] == b'+' || b[k] == b'-') && !matches!(b[k - 1], b'e' | b'E'));
    let (re_txt, im_txt) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re_txt.is_empty() {
        0.0
    } else {
        re_txt.parse::<f64>().map_err(|_| bad())?
    };
    let im = match im_txt {
        "" | "+" => 1.0,
        "-" => -1.0,
        txt => txt.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re, im))
}
