//! JSON benchmark report. The schema shipped at schema/report.schema.json
//! describes this layout; field renames must update both.

use serde::Serialize;

#[derive(Serialize)]
pub struct LshReport {
    pub num_tables: usize,
    pub key_size: usize,
    pub seed: u64,
}

#[derive(Serialize)]
pub struct BenchmarkReport {
    /// "linear" or "lsh".
    pub search_mode: String,
    /// "threshold" or "minmax".
    pub encoder: String,
    pub num_angles: usize,
    pub image_side: usize,
    pub smoothing_window: usize,
    pub corpus_size: usize,
    pub query_count: usize,
    /// Results kept per query: the requested k in linear mode, always 1 in
    /// lsh mode where re-ranking yields a single winner.
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_candidates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lsh: Option<LshReport>,
    pub total_error: f64,
    pub mean_error_per_query: f64,
    /// Queries whose LSH candidate set came back empty and fell back to an
    /// exact scan. Always 0 in linear mode.
    pub failure_count: usize,
    pub failure_rate: f64,
    pub mean_query_seconds: f64,
    pub threads: usize,
    pub index_path: String,
    pub test_manifest: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optional_sections_are_omitted_not_null() {
        let report = BenchmarkReport {
            search_mode: "linear".to_string(),
            encoder: "threshold".to_string(),
            num_angles: 8,
            image_side: 32,
            smoothing_window: 0,
            corpus_size: 10,
            query_count: 2,
            k: 1,
            max_candidates: None,
            lsh: None,
            total_error: 0.5,
            mean_error_per_query: 0.25,
            failure_count: 0,
            failure_rate: 0.0,
            mean_query_seconds: 0.001,
            threads: 4,
            index_path: "x.rbix".to_string(),
            test_manifest: "t.csv".to_string(),
        };
        let json = serde_json::to_string(&report).unwrap();
        assert!(!json.contains("max_candidates"));
        assert!(!json.contains("\"lsh\""));
        assert!(json.contains("\"search_mode\":\"linear\""));
    }
}
