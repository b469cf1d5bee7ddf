//! Merges one document's view across platform services. Each fetcher is
//! a mock backed by a JSONL fixture; label disagreements resolve by
//! majority vote and per-platform engagement lists merge side by side.
//! A fetcher that fails only produces a warning, never a lost package.
//!
//! ```text
//! cargo run --example merge_platforms
//! ```

use std::collections::BTreeMap;
use std::fs;

use verascope::corpus::{DocumentRecord, EngagementItem, EngagementKind, Label};
use verascope::crossplatform::{
    merge_document_package, Fetcher, FileFetcher, FixtureRecord,
};

fn item(id: &str, platform: &str, t: i64) -> EngagementItem {
    EngagementItem {
        item_id: id.to_string(),
        doc_id: "story1".to_string(),
        actor_id: format!("user-{id}"),
        platform: platform.to_string(),
        timestamp: t,
        kind: EngagementKind::Share,
        text: None,
        urls: vec![],
        hashtags: vec![],
        mentions: vec![],
    }
}

fn write_fixture(path: &std::path::Path, record: &FixtureRecord) -> verascope::Result<()> {
    fs::write(path, serde_json::to_string(record).map_err(verascope::Error::from)? + "\n")?;
    Ok(())
}

/// A service that is down; merging must survive it.
struct Offline;

impl Fetcher for Offline {
    fn source_id(&self) -> &str {
        "gamma-api"
    }
    fn platforms(&self) -> Vec<String> {
        vec!["gamma".to_string()]
    }
    fn fetch_label(&self, _doc: &DocumentRecord) -> verascope::Result<Vec<(String, Label)>> {
        Err(verascope::Error::InvalidConfig("connection refused".into()))
    }
    fn fetch_context(
        &self,
        _doc: &DocumentRecord,
        _platform: &str,
    ) -> verascope::Result<Vec<EngagementItem>> {
        Err(verascope::Error::InvalidConfig("connection refused".into()))
    }
}

fn main() -> verascope::Result<()> {
    let dir = std::env::temp_dir().join("verascope-merge-example");
    fs::create_dir_all(&dir)?;

    let alpha_path = dir.join("alpha.jsonl");
    write_fixture(
        &alpha_path,
        &FixtureRecord {
            doc_id: "story1".to_string(),
            labels: vec![("alpha-checkers".to_string(), Label::False)],
            context: BTreeMap::from([(
                "alpha".to_string(),
                vec![item("a1", "alpha", 100), item("a2", "alpha", 160)],
            )]),
        },
    )?;

    let beta_path = dir.join("beta.jsonl");
    write_fixture(
        &beta_path,
        &FixtureRecord {
            doc_id: "story1".to_string(),
            labels: vec![
                ("beta-desk".to_string(), Label::False),
                ("beta-community".to_string(), Label::True),
            ],
            context: BTreeMap::from([("beta".to_string(), vec![item("b1", "beta", 130)])]),
        },
    )?;

    let alpha = FileFetcher::from_path("alpha-api", &alpha_path)?;
    let beta = FileFetcher::from_path("beta-api", &beta_path)?;
    let doc = DocumentRecord {
        doc_id: "story1".to_string(),
        platform_of_origin: "alpha".to_string(),
        publisher_id: "p1".to_string(),
        title: "breaking claim".to_string(),
        body: "details disputed".to_string(),
        publish_time: 50,
        label: Label::Unknown,
    };

    let package = merge_document_package(&doc, &[&alpha, &beta, &Offline]);
    println!(
        "merged `{}`: label {:?} from {} source votes",
        package.document.doc_id,
        package.merged_label,
        package.label_sources.len()
    );
    for (source, label) in &package.label_sources {
        println!("  {source}: {label:?}");
    }
    println!("\nengagements per platform:");
    for (platform, items) in &package.per_platform_engagements {
        println!("  {platform}: {} items", items.len());
    }
    println!("\nwarnings:");
    for warning in &package.warnings {
        println!("  {warning}");
    }

    fs::remove_dir_all(&dir)?;
    Ok(())
}
