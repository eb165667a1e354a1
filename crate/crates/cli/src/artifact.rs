//! JSON artifacts with an embedded run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use qrwd::qrcode::QrCodeFamily;

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeIdentity {
    pub p: u64,
    pub code_id: String,
    pub generator_sha256: String,
}

impl CodeIdentity {
    pub fn of(family: &QrCodeFamily) -> Self {
        Self {
            p: family.p,
            code_id: family.code_id(),
            generator_sha256: family.generator_digest(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance block written into every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub code: Option<CodeIdentity>,
    pub tool_version: String,
    pub inputs: Vec<InputDigest>,
}

impl RunManifest {
    pub fn new(code: Option<CodeIdentity>) -> Self {
        let mut command: Vec<String> = std::env::args().skip(1).collect();
        command.insert(0, "qrwd".into());
        Self {
            command,
            code,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            inputs: Vec::new(),
        }
    }
}

#[derive(Debug, Serialize)]
struct Artifact<'a, T> {
    manifest: &'a RunManifest,
    kind: &'a str,
    payload: &'a T,
}

pub fn to_json<T: Serialize>(manifest: &RunManifest, kind: &str, payload: &T) -> String {
    let artifact = Artifact {
        manifest,
        kind,
        payload,
    };
    serde_json::to_string_pretty(&artifact).expect("artifact serializes") + "\n"
}

/// Reads a file and records its digest in the manifest.
pub fn read_input(path: &Path, manifest: &mut RunManifest) -> Result<String, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    manifest.inputs.push(InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    });
    String::from_utf8(bytes).map_err(|_| Failure::Usage(format!("{} is not UTF-8", path.display())))
}

/// A parsed artifact: the payload plus the manifest, if the file had one.
pub struct Loaded<T> {
    pub manifest: Option<RunManifest>,
    pub payload: T,
}

/// Accepts either a wrapped artifact or a bare payload.
pub fn parse<T: DeserializeOwned>(text: &str, what: &str) -> Result<Loaded<T>, Failure> {
    let value: Value = serde_json::from_str(text).map_err(|e| Failure::Usage(format!("{what}: {e}")))?;
    let bad = |e: serde_json::Error| Failure::Usage(format!("{what}: {e}"));
    match value {
        Value::Object(mut map) if map.contains_key("payload") && map.contains_key("manifest") => {
            let manifest = serde_json::from_value(map.remove("manifest").expect("checked")).map_err(bad)?;
            let payload = serde_json::from_value(map.remove("payload").expect("checked")).map_err(bad)?;
            Ok(Loaded {
                manifest: Some(manifest),
                payload,
            })
        }
        other => Ok(Loaded {
            manifest: None,
            payload: serde_json::from_value(other).map_err(bad)?,
        }),
    }
}

/// Refuses artifacts that were produced for a different code.
pub fn check_identity(loaded: Option<&RunManifest>, family: &QrCodeFamily, what: &str) -> Result<(), Failure> {
    let expected = CodeIdentity::of(family);
    match loaded.and_then(|m| m.code.as_ref()) {
        Some(found) if *found != expected => Err(Failure::Check(format!(
            "{what} was produced for {} but --p selects {}",
            found.code_id, expected.code_id
        ))),
        _ => Ok(()),
    }
}

/// Writes `text` to `dir/name` when an output directory is set, otherwise to stdout.
pub fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<Option<PathBuf>, Failure> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            Ok(Some(path))
        }
        None => {
            print!("{text}");
            Ok(None)
        }
    }
}
