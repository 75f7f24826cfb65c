//! Manifest CSV reading.
//!
//! A manifest lists one image per row with the header `id,path,irma_code`.
//! Relative paths resolve against the manifest file's directory, so a
//! manifest can travel with its images.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use rbc_core::IrmaCode;

#[derive(Debug, Clone)]
pub struct ManifestRow {
    pub id: String,
    pub path: PathBuf,
    pub code: IrmaCode,
}

pub fn read_manifest(path: &Path) -> anyhow::Result<Vec<ManifestRow>> {
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("cannot open manifest {}", path.display()))?;

    let headers = reader
        .headers()
        .with_context(|| format!("cannot read manifest header in {}", path.display()))?;
    let expected = ["id", "path", "irma_code"];
    if headers.len() != expected.len() || headers.iter().zip(expected).any(|(h, e)| h != e) {
        bail!(
            "manifest {} must have header id,path,irma_code, found {}",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        );
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row_no = i + 1;
        let record =
            record.with_context(|| format!("manifest row {row_no}: malformed CSV record"))?;
        if record.len() != 3 {
            bail!(
                "manifest row {row_no}: expected 3 fields, found {}",
                record.len()
            );
        }
        let id = record[0].trim();
        if id.is_empty() {
            bail!("manifest row {row_no}: empty id");
        }
        let rel = record[1].trim();
        if rel.is_empty() {
            bail!("manifest row {row_no}: empty path");
        }
        let code: IrmaCode = record[2]
            .trim()
            .parse()
            .map_err(|e| anyhow!("manifest row {row_no}: bad irma_code: {e}"))?;
        let path = base.join(rel);
        rows.push(ManifestRow {
            id: id.to_string(),
            path,
            code,
        });
    }
    if rows.is_empty() {
        bail!("manifest {} has no data rows", path.display());
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_manifest(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("manifest.csv");
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn reads_rows_and_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_manifest(
            dir.path(),
            "id,path,irma_code\nimg-0,sub/a.png,1121-4a0-914-700\n",
        );
        let rows = read_manifest(&p).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].id, "img-0");
        assert_eq!(rows[0].path, dir.path().join("sub/a.png"));
        assert_eq!(rows[0].code.to_string(), "1121-4a0-914-700");
    }

    #[test]
    fn absolute_paths_pass_through() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_manifest(dir.path(), "id,path,irma_code\nx,/tmp/abs.png,10-20-30-40\n");
        let rows = read_manifest(&p).unwrap();
        assert_eq!(rows[0].path, PathBuf::from("/tmp/abs.png"));
    }

    #[test]
    fn bad_code_error_cites_data_row_number() {
        let dir = tempfile::tempdir().unwrap();
        let mut body = String::from("id,path,irma_code\n");
        for i in 1..=6 {
            body.push_str(&format!("img-{i},a{i}.png,10-20-30-40\n"));
        }
        body.push_str("img-7,a7.png,NOT_A_CODE\n");
        let p = write_manifest(dir.path(), &body);
        let err = read_manifest(&p).unwrap_err().to_string();
        assert!(err.contains("manifest row 7"), "got: {err}");
    }

    #[test]
    fn rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_manifest(dir.path(), "name,file,code\nx,a.png,10-20-30-40\n");
        let err = read_manifest(&p).unwrap_err().to_string();
        assert!(err.contains("id,path,irma_code"), "got: {err}");
    }

    #[test]
    fn rejects_empty_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_manifest(dir.path(), "id,path,irma_code\n");
        assert!(read_manifest(&p).is_err());
    }
}
