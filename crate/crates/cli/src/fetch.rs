//! Getting the raw UCI files: over HTTPS, or from a local mirror.

use std::io::Read;
use std::path::Path;

use ctfi::data::uci::{self, DatasetId, FetchProvenance};
use ctfi::data::DataError;

/// Largest file we accept (Adult's training file is about 4 MB).
const MAX_BYTES: u64 = 64 << 20;

/// `source` is a directory holding the distribution files or a base URL they
/// sit under. Without it the UCI archive is used.
pub fn fetch(id: DatasetId, source: Option<&str>, dest: &Path) -> Result<FetchProvenance, DataError> {
    let locations: Vec<String> = match source {
        None => id.source_urls(),
        Some(base) => id
            .source_files()
            .iter()
            .map(|f| {
                if is_url(base) {
                    format!("{}/{f}", base.trim_end_matches('/'))
                } else {
                    Path::new(base).join(f).display().to_string()
                }
            })
            .collect(),
    };
    let mut files = Vec::with_capacity(locations.len());
    for loc in &locations {
        log::info!("fetching {loc}");
        files.push(if is_url(loc) { download(loc)? } else { read_local(loc)? });
    }
    uci::install(id, &locations, &files, dest)
}

fn is_url(s: &str) -> bool {
    s.starts_with("https://") || s.starts_with("http://")
}

fn read_local(path: &str) -> Result<Vec<u8>, DataError> {
    std::fs::read(path).map_err(|e| DataError::io(path, e))
}

fn download(url: &str) -> Result<Vec<u8>, DataError> {
    let network = |message: String| DataError::Network {
        url: url.to_string(),
        message,
    };
    let response = ureq::get(url).call().map_err(|e| network(e.to_string()))?;
    let mut bytes = Vec::new();
    response
        .into_reader()
        .take(MAX_BYTES)
        .read_to_end(&mut bytes)
        .map_err(|e| network(e.to_string()))?;
    Ok(bytes)
}
