//! Fixture corpus checks shared by the parser and acceptance suites.

#![allow(dead_code)]

use gmwmx::io::{parse_position_file, write_mom, write_pos, FileFormat, ParseOptions, PosComponent};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn format_of(path: &Path) -> FileFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pos") => FileFormat::Pos,
        _ => FileFormat::Mom,
    }
}

/// Parses every valid fixture, writes it back and parses again; returns the
/// number of files checked.
pub fn check_roundtrips() -> Result<usize, String> {
    let mut count = 0;
    let mut entries: Vec<PathBuf> = std::fs::read_dir(fixtures().join("valid"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .collect();
    entries.sort();
    for path in entries {
        let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        let format = format_of(&path);
        let components: &[PosComponent] = match format {
            FileFormat::Mom => &[PosComponent::U],
            FileFormat::Pos => &[PosComponent::N, PosComponent::E, PosComponent::U],
        };
        for &component in components {
            let opts = ParseOptions { component, units: None };
            let first = parse_position_file(&bytes, format, &opts).map_err(|e| format!("{}: {e}", path.display()))?;
            let text = match format {
                FileFormat::Mom => write_mom(&first),
                FileFormat::Pos => write_pos(&first, component),
            };
            let second = parse_position_file(text.as_bytes(), format, &opts)
                .map_err(|e| format!("{} rewritten: {e}", path.display()))?;
            if second != first {
                return Err(format!("{} does not survive a write/read cycle", path.display()));
            }
            let again = match format {
                FileFormat::Mom => write_mom(&second),
                FileFormat::Pos => write_pos(&second, component),
            };
            if again != text {
                return Err(format!("{} is not a fixed point of write/read", path.display()));
            }
        }
        count += 1;
    }
    Ok(count)
}

/// Checks every malformed fixture against its expected error kind; returns
/// the number of files checked.
pub fn check_malformed() -> Result<usize, String> {
    let dir = fixtures().join("malformed");
    let manifest: BTreeMap<String, (String, String)> =
        toml::from_str(&std::fs::read_to_string(dir.join("expected.toml")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let on_disk = std::fs::read_dir(&dir).map_err(|e| e.to_string())?.count() - 1;
    if on_disk != manifest.len() {
        return Err(format!("{on_disk} malformed files but {} manifest entries", manifest.len()));
    }
    for (file, (format, kind)) in &manifest {
        let bytes = std::fs::read(dir.join(file)).map_err(|e| format!("{file}: {e}"))?;
        let format: FileFormat = format.parse()?;
        match parse_position_file(&bytes, format, &ParseOptions::default()) {
            Ok(_) => return Err(format!("{file} parsed but should fail with {kind}")),
            Err(e) if e.kind() != kind => return Err(format!("{file}: expected {kind}, got {} ({e})", e.kind())),
            Err(_) => {}
        }
    }
    Ok(manifest.len())
}
