//! Line-delimited JSON files for solved circles and continuation families.
//!
//! A circle file is a single JSON object on one line. A family file starts
//! with a header line followed by one record per line. Floats are written in
//! the shortest form that parses back to the same double, so
//! write-read-write is byte-identical.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_complex::Complex;
use qpcircle::continuation::{ContinuationRecord, FamilyResult, StopReason};
use qpcircle::fourier::{CoeffSeq, FourierCircle};
use qpcircle::solver::{CircleSystem, UnfoldingState};
use qpcircle::{MapFamily, MapSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleCoefficients {
    pub a_re: Vec<f64>,
    pub a_im: Vec<f64>,
    pub b_re: Vec<f64>,
    pub b_im: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<[f64; 2]>,
    pub m_classify: Option<usize>,
    pub m_rho: Option<usize>,
    pub m_coeff: Option<usize>,
    pub created_unix: u64,
    pub tool: String,
}

impl Provenance {
    pub fn now() -> Self {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self { created_unix, tool: concat!("qpcircle ", env!("CARGO_PKG_VERSION")).into(), ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleFile {
    pub schema_version: u32,
    pub map: String,
    pub alpha: f64,
    pub d: usize,
    /// Per-iterate rotation number.
    pub rho: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub beta: f64,
    pub gamma: Vec<f64>,
    pub omega: Vec<f64>,
    /// Coefficients ordered `n = -N..=N`.
    pub circles: Vec<CircleCoefficients>,
    pub final_defect: f64,
    pub provenance: Provenance,
}

fn split(c: &CoeffSeq<f64>) -> (Vec<f64>, Vec<f64>) {
    c.as_slice().iter().map(|z| (z.re, z.im)).unzip()
}

fn join(re: &[f64], im: &[f64], expected: usize) -> Result<CoeffSeq<f64>, CliError> {
    if re.len() != expected || im.len() != expected {
        return Err(CliError::Schema(format!(
            "coefficient arrays have lengths {} and {}, expected {expected}",
            re.len(),
            im.len()
        )));
    }
    let v = re.iter().zip(im).map(|(&r, &i)| Complex::new(r, i)).collect();
    Ok(CoeffSeq::from_vec(v)?)
}

impl CircleFile {
    pub fn from_system(
        spec: &MapSpec<f64>,
        system: &CircleSystem<f64>,
        unfolding: &UnfoldingState<f64>,
        final_defect: f64,
        provenance: Provenance,
    ) -> Self {
        let circles = system
            .circles
            .iter()
            .map(|k| {
                let (a_re, a_im) = split(&k.a);
                let (b_re, b_im) = split(&k.b);
                CircleCoefficients { a_re, a_im, b_re, b_im }
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            map: spec.family.name().into(),
            alpha: spec.alpha,
            d: system.d(),
            rho: system.rho,
            n: system.order(),
            beta: unfolding.beta,
            gamma: unfolding.gamma.clone(),
            omega: unfolding.omega.clone(),
            circles,
            final_defect,
            provenance,
        }
    }

    pub fn spec(&self) -> Result<MapSpec<f64>, CliError> {
        let family: MapFamily = self.map.parse().map_err(|e: qpcircle::Error| CliError::Schema(e.to_string()))?;
        Ok(MapSpec::new(family, self.alpha))
    }

    pub fn system(&self) -> Result<CircleSystem<f64>, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!("unsupported schema_version {}", self.schema_version)));
        }
        if self.circles.len() != self.d || self.d == 0 {
            return Err(CliError::Schema(format!("d = {} but {} circles stored", self.d, self.circles.len())));
        }
        let len = 2 * self.n + 1;
        let circles = self
            .circles
            .iter()
            .map(|c| Ok(FourierCircle::new(join(&c.a_re, &c.a_im, len)?, join(&c.b_re, &c.b_im, len)?)?))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(CircleSystem::new(self.rho, circles)?)
    }

    pub fn unfolding(&self) -> UnfoldingState<f64> {
        UnfoldingState { beta: self.beta, gamma: self.gamma.clone(), omega: self.omega.clone() }
    }

    pub fn to_line(&self) -> Result<String, CliError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_line(line: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(line.trim_end())?)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = self.to_line()?;
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let line = text.lines().find(|l| !l.trim().is_empty()).ok_or_else(|| CliError::Schema("empty circle file".into()))?;
        Self::from_line(line)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyHeader {
    pub schema_version: u32,
    pub kind: String,
    pub map: String,
    pub alpha: f64,
    pub direction: i32,
    pub stop_reason: String,
    pub records: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyRecord {
    /// `[order, norm]` pairs.
    pub sobolev: Vec<[f64; 2]>,
    pub circle: CircleFile,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyFile {
    pub header: FamilyHeader,
    pub records: Vec<FamilyRecord>,
}

pub fn stop_reason_name(r: StopReason) -> &'static str {
    match r {
        StopReason::SobolevBlowup => "sobolev-blowup",
        StopReason::StepUnderflow => "step-underflow",
        StopReason::MaxSteps => "max-steps",
        StopReason::SolverHardFailure => "solver-hard-failure",
    }
}

impl FamilyFile {
    pub fn from_family(spec: &MapSpec<f64>, family: &FamilyResult<f64>, direction: i32, provenance: &Provenance) -> Self {
        let records: Vec<_> = family
            .records
            .iter()
            .map(|r: &ContinuationRecord<f64>| FamilyRecord {
                sobolev: r.sobolev.iter().map(|&(d, v)| [d, v]).collect(),
                circle: CircleFile::from_system(spec, &r.system, &UnfoldingState::default(), r.defect, provenance.clone()),
            })
            .collect();
        let header = FamilyHeader {
            schema_version: SCHEMA_VERSION,
            kind: "family".into(),
            map: spec.family.name().into(),
            alpha: spec.alpha,
            direction,
            stop_reason: stop_reason_name(family.stop_reason).into(),
            records: records.len(),
        };
        Self { header, records }
    }

    pub fn to_text(&self) -> Result<String, CliError> {
        let mut out = serde_json::to_string(&self.header)?;
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        f.write_all(self.to_text()?.as_bytes()).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let f = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        let mut lines = BufReader::new(f).lines().filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let first = lines.next().ok_or_else(|| CliError::Schema("empty family file".into()))?.map_err(|e| CliError::io(path, e))?;
        let header: FamilyHeader = serde_json::from_str(&first)?;
        if header.schema_version != SCHEMA_VERSION || header.kind != "family" {
            return Err(CliError::Schema("not a family file of a supported version".into()));
        }
        let mut records = Vec::new();
        for line in lines {
            let line = line.map_err(|e| CliError::io(path, e))?;
            records.push(serde_json::from_str::<FamilyRecord>(&line)?);
        }
        if records.len() != header.records {
            return Err(CliError::Schema(format!("header lists {} records, found {}", header.records, records.len())));
        }
        Ok(Self { header, records })
    }
}

/// Whether the first line of `path` is a family header.
pub fn is_family_file(path: &Path) -> Result<bool, CliError> {
    let f = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut first = String::new();
    BufReader::new(f).read_line(&mut first).map_err(|e| CliError::io(path, e))?;
    let v: serde_json::Value = serde_json::from_str(first.trim_end())?;
    Ok(v.get("kind").and_then(|k| k.as_str()) == Some("family"))
}
