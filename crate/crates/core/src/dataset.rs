//! Dataset construction: run the reconstruction pipeline over input images,
//! record each result as a quadruplet (input image, geometric attributes,
//! executable code, rendered image), gate entries on the Chamfer distance,
//! and track terminal human review with an append-only audit trail.

use crate::agent::AgentGateway;
use crate::evolve::{reconstruct, PipelineConfig};
use crate::metrics::{measure, standardize, MetricBundle};
use crate::program::parse_program;
use crate::raster::Raster;
use crate::render::render;
use crate::skeleton::GeoSkeleton;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
/// The default acceptance gate on the Chamfer distance, in pixels. The
/// boundary is strict: cd equal to the threshold is rejected.
pub const DEFAULT_CD_THRESHOLD: f64 = 10.0;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("unknown entry `{0}`")]
    UnknownEntry(String),
    #[error("invalid transition for `{id}`: {reason}")]
    InvalidTransition { id: String, reason: String },
    #[error("manifest io: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest format: {0}")]
    Format(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntryStatus {
    Pending,
    AutoAccepted,
    AutoRejected,
    HumanApproved,
    HumanRejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub reviewer: String,
    pub verdict: String,
    pub unix_ts: u64,
}

/// One dataset entry. `rendered_sha256` pins the rendered image to the code
/// that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadruplet {
    pub id: String,
    pub input_image: String,
    pub attributes: GeoSkeleton,
    pub code: String,
    pub rendered_image: String,
    pub rendered_sha256: String,
    pub metrics: Option<MetricBundle>,
    pub status: EntryStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default)]
    pub audit: Vec<AuditRecord>,
    /// Optional judge verdict attached by visual verification; never
    /// overrides the Chamfer gate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub judge: Option<String>,
}

impl Quadruplet {
    pub fn is_failure(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ManifestMeta {
    schema_version: u32,
    threshold_px: f64,
}

/// A JSONL-backed collection of quadruplets: one meta line, one line per
/// entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub schema_version: u32,
    pub threshold_px: f64,
    pub entries: Vec<Quadruplet>,
}

impl Default for Manifest {
    fn default() -> Self {
        Self {
            schema_version: MANIFEST_SCHEMA_VERSION,
            threshold_px: DEFAULT_CD_THRESHOLD,
            entries: Vec::new(),
        }
    }
}

impl Manifest {
    pub fn counts(&self) -> std::collections::BTreeMap<String, usize> {
        let mut out = std::collections::BTreeMap::new();
        for e in &self.entries {
            *out.entry(format!("{:?}", e.status)).or_insert(0) += 1;
        }
        out
    }

    pub fn entry_mut(&mut self, id: &str) -> Option<&mut Quadruplet> {
        self.entries.iter_mut().find(|e| e.id == id)
    }

    pub fn load(path: &Path) -> Result<Manifest, DatasetError> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let meta: ManifestMeta = match lines.next() {
            Some(first) => serde_json::from_str(first)?,
            None => {
                return Ok(Manifest::default());
            }
        };
        let mut entries = Vec::new();
        for line in lines {
            entries.push(serde_json::from_str::<Quadruplet>(line)?);
        }
        Ok(Manifest {
            schema_version: meta.schema_version,
            threshold_px: meta.threshold_px,
            entries,
        })
    }

    /// Write atomically under an exclusive advisory lock (single writer).
    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        let _lock = FileLock::acquire(&lock_path(path))?;
        let mut out = String::new();
        out.push_str(&serde_json::to_string(&ManifestMeta {
            schema_version: self.schema_version,
            threshold_px: self.threshold_px,
        })?);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e)?);
            out.push('\n');
        }
        let tmp = path.with_extension("jsonl.tmp");
        std::fs::write(&tmp, out)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn lock_path(manifest: &Path) -> PathBuf {
    let mut p = manifest.as_os_str().to_owned();
    p.push(".lock");
    PathBuf::from(p)
}

/// Exclusive advisory lock held for the guard's lifetime.
struct FileLock {
    file: std::fs::File,
}

impl FileLock {
    fn acquire(path: &Path) -> Result<FileLock, std::io::Error> {
        let file = std::fs::OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(path)?;
        #[cfg(unix)]
        {
            use std::os::unix::io::AsRawFd;
            let rc = unsafe { libc::flock(file.as_raw_fd(), libc::LOCK_EX) };
            if rc != 0 {
                return Err(std::io::Error::last_os_error());
            }
        }
        Ok(FileLock { file })
    }
}

impl Drop for FileLock {
    fn drop(&mut self) {
        #[cfg(unix)]
        {
            use std::os::unix::io::AsRawFd;
            unsafe {
                libc::flock(self.file.as_raw_fd(), libc::LOCK_UN);
            }
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Run the full pipeline on one input image. Failures are recorded on the
/// entry rather than returned; a blank image yields an empty program with
/// maximal geometric error.
pub fn build_quadruplet(
    input: &Path,
    images_dir: &Path,
    cfg: &PipelineConfig,
    agent: Option<&AgentGateway>,
) -> Quadruplet {
    let input_str = input.display().to_string();
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "entry".to_string());

    let make_failure = |id: String, err: String| Quadruplet {
        id,
        input_image: input_str.clone(),
        attributes: GeoSkeleton::empty(),
        code: String::new(),
        rendered_image: String::new(),
        rendered_sha256: String::new(),
        metrics: None,
        status: EntryStatus::Pending,
        error: Some(err),
        audit: Vec::new(),
        judge: None,
    };

    let bytes = match std::fs::read(input) {
        Ok(b) => b,
        Err(e) => return make_failure(format!("{stem}-unreadable"), e.to_string()),
    };
    let id = format!("{stem}-{}", &sha256_hex(&bytes)[..8]);
    let obs = match Raster::load(input) {
        Ok(r) => standardize(&r),
        Err(e) => return make_failure(id, e.to_string()),
    };

    let (program, _state, skel) = reconstruct(&obs, None, cfg, agent);
    let code = program.to_source();
    let rendered = match render(&program) {
        Ok(r) => r,
        Err(e) => return make_failure(id, e.to_string()),
    };
    let metrics =
        measure(&rendered, &obs, cfg.loop_cfg.objective.edge_threshold).ok();

    let hash = rendered.content_hash();
    let rel = format!("images/{}.png", &hash[..16]);
    let out_path = images_dir.join(format!("{}.png", &hash[..16]));
    if let Some(parent) = out_path.parent() {
        let _ = std::fs::create_dir_all(parent);
    }
    if let Err(e) = rendered.save_png(&out_path) {
        return make_failure(id, e.to_string());
    }

    Quadruplet {
        id,
        input_image: input_str,
        attributes: skel,
        code,
        rendered_image: rel,
        rendered_sha256: hash,
        metrics: Some(if let Some(m) = metrics {
            m
        } else {
            return make_failure("metrics".into(), "metric computation failed".into());
        }),
        status: EntryStatus::Pending,
        error: None,
        audit: Vec::new(),
        judge: None,
    }
}

/// Apply the Chamfer gate: cd < threshold accepts, cd >= threshold rejects
/// (the boundary itself rejects). Human verdicts are never touched; failure
/// entries stay pending.
pub fn filter_manifest(m: &mut Manifest, threshold_px: f64) {
    m.threshold_px = threshold_px;
    for e in &mut m.entries {
        if matches!(e.status, EntryStatus::HumanApproved | EntryStatus::HumanRejected) {
            continue;
        }
        match (&e.metrics, e.is_failure()) {
            (Some(metrics), false) => {
                e.status = if metrics.cd < threshold_px {
                    EntryStatus::AutoAccepted
                } else {
                    EntryStatus::AutoRejected
                };
            }
            _ => e.status = EntryStatus::Pending,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Approve,
    Reject,
}

/// Record a human verdict. Only auto-accepted entries are reviewable and
/// review is terminal.
pub fn review_mark(
    m: &mut Manifest,
    id: &str,
    verdict: Verdict,
    reviewer: &str,
) -> Result<(), DatasetError> {
    let entry = m
        .entry_mut(id)
        .ok_or_else(|| DatasetError::UnknownEntry(id.to_string()))?;
    match entry.status {
        EntryStatus::AutoAccepted => {}
        other => {
            return Err(DatasetError::InvalidTransition {
                id: id.to_string(),
                reason: format!("cannot review an entry in state {other:?}"),
            })
        }
    }
    entry.status = match verdict {
        Verdict::Approve => EntryStatus::HumanApproved,
        Verdict::Reject => EntryStatus::HumanRejected,
    };
    entry.audit.push(AuditRecord {
        reviewer: reviewer.to_string(),
        verdict: match verdict {
            Verdict::Approve => "approve".to_string(),
            Verdict::Reject => "reject".to_string(),
        },
        unix_ts: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    });
    Ok(())
}

/// Re-render an entry's code and check the stored image hash still matches.
pub fn verify_entry(entry: &Quadruplet) -> Result<bool, String> {
    if entry.is_failure() {
        return Err("failure entry has no code".into());
    }
    let program = parse_program(&entry.code).map_err(|e| e.to_string())?;
    let rendered = render(&program).map_err(|e| e.to_string())?;
    Ok(rendered.content_hash() == entry.rendered_sha256)
}
