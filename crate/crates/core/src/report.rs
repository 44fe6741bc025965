//! Five-section analysis report: assembly, disclaimer enforcement and
//! rendering to JSON, Markdown and HTML.

use std::fmt::Write as _;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consolidation::Authority;
use crate::llm::{verify_citations, CitationCheck, StructuredAnalysis};
use crate::research::ProviderFailure;

pub const DEFAULT_DISCLAIMER: &str = "This report was produced by an automated research assistant. \
It is not legal advice and does not create a lawyer-client relationship. \
Consult a qualified lawyer licensed in your jurisdiction before acting on any of it.";

pub const SECTION_TITLES: [&str; 5] = [
    "Material Facts",
    "Legal Issues",
    "Case Law & Precedents",
    "Recommended Actions",
    "Disclaimer",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error("no disclaimer text is configured")]
    MissingDisclaimerConfig,
    #[error("analysis is not usable: {0}")]
    InvalidAnalysis(String),
    #[error("unsupported report format `{0}`")]
    UnsupportedFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Markdown,
    Html,
}

impl ReportFormat {
    pub fn content_type(self) -> &'static str {
        match self {
            ReportFormat::Json => "application/json",
            ReportFormat::Markdown => "text/markdown; charset=utf-8",
            ReportFormat::Html => "text/html; charset=utf-8",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "md",
            ReportFormat::Html => "html",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "html" => Ok(ReportFormat::Html),
            _ => Err(ReportError::UnsupportedFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub matter_id: String,
    pub material_facts: Vec<String>,
    pub legal_issues: Vec<String>,
    pub authorities: Vec<Authority>,
    /// Analysis hints that matched an authority above.
    pub cited: Vec<CitationCheck>,
    /// Analysis hints that matched nothing.
    pub unverified_references: Vec<String>,
    pub recommended_actions: Vec<String>,
    pub provider_failures: Vec<ProviderFailure>,
    pub disclaimer: String,
    pub generated_at: DateTime<Utc>,
}

/// Builds the report. Authority hints are resolved against `ranked`; the
/// ones that cannot be resolved are kept in `unverified_references`.
pub fn assemble_report(
    analysis: &StructuredAnalysis,
    ranked: &[Authority],
    failures: &[ProviderFailure],
    matter_id: &str,
    disclaimer: Option<&str>,
    generated_at: DateTime<Utc>,
) -> Result<AnalysisReport, ReportError> {
    let checks = verify_citations(analysis, ranked);
    assemble_with_checks(analysis, checks, ranked, failures, matter_id, disclaimer, generated_at)
}

/// As [`assemble_report`] with citation checks computed elsewhere, e.g. by
/// a verifier.
pub fn assemble_with_checks(
    analysis: &StructuredAnalysis,
    checks: Vec<CitationCheck>,
    ranked: &[Authority],
    failures: &[ProviderFailure],
    matter_id: &str,
    disclaimer: Option<&str>,
    generated_at: DateTime<Utc>,
) -> Result<AnalysisReport, ReportError> {
    let disclaimer = disclaimer
        .filter(|d| !d.trim().is_empty())
        .ok_or(ReportError::MissingDisclaimerConfig)?;
    analysis
        .validate()
        .map_err(|e| ReportError::InvalidAnalysis(e.to_string()))?;
    let (cited, unresolved): (Vec<_>, Vec<_>) = checks.into_iter().partition(|c| {
        c.authority_id
            .as_ref()
            .is_some_and(|id| ranked.iter().any(|a| &a.authority_id == id))
    });
    Ok(AnalysisReport {
        matter_id: matter_id.to_string(),
        material_facts: analysis.material_facts.clone(),
        legal_issues: analysis.legal_issues.clone(),
        authorities: ranked.to_vec(),
        cited,
        unverified_references: unresolved.into_iter().map(|c| c.hint).collect(),
        recommended_actions: analysis.recommended_actions.clone(),
        provider_failures: failures.to_vec(),
        disclaimer: disclaimer.to_string(),
        generated_at,
    })
}

pub fn render_report(r: &AnalysisReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(r).expect("report serializes");
            out.push(b'\n');
            out
        }
        ReportFormat::Markdown => render_markdown(r).into_bytes(),
        ReportFormat::Html => render_html(r).into_bytes(),
    }
}

/// Parses a format name and renders.
pub fn render_report_as(r: &AnalysisReport, format: &str) -> Result<Vec<u8>, ReportError> {
    Ok(render_report(r, format.parse()?))
}

fn timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn authority_line(a: &Authority) -> String {
    let mut details = Vec::new();
    if let Some(c) = &a.court {
        details.push(c.clone());
    }
    if let Some(d) = a.date {
        details.push(d.to_string());
    }
    let sources: Vec<String> = a
        .provenance
        .iter()
        .map(|p| format!("{} {}", p.provider_id, p.doc_id))
        .collect();
    let mut line = a.title.clone();
    if !a.citation.is_empty() {
        line.push_str(&format!(", {}", a.citation));
    }
    if !details.is_empty() {
        line.push_str(&format!(" ({})", details.join(", ")));
    }
    format!(
        "{line}. Relevance {:.3}. Sources: {}. [{}]",
        a.relevance,
        sources.join("; "),
        a.authority_id
    )
}

fn failure_line(f: &ProviderFailure) -> String {
    format!("{}: {:?}", f.provider_id, f.reason)
}

fn md_list(out: &mut String, items: &[String]) {
    if items.is_empty() {
        out.push_str("_None._\n");
    }
    for (i, item) in items.iter().enumerate() {
        let _ = writeln!(out, "{}. {}", i + 1, item.replace('\n', " "));
    }
}

fn md_bullets(out: &mut String, items: impl IntoIterator<Item = String>) {
    for item in items {
        let _ = writeln!(out, "- {}", item.replace('\n', " "));
    }
}

fn render_markdown(r: &AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Legal Analysis Report\n");
    let _ = writeln!(out, "Matter: {}  ", r.matter_id);
    let _ = writeln!(out, "Generated: {}\n", timestamp(&r.generated_at));

    let _ = writeln!(out, "## {}\n", SECTION_TITLES[0]);
    md_list(&mut out, &r.material_facts);
    let _ = writeln!(out, "\n## {}\n", SECTION_TITLES[1]);
    md_list(&mut out, &r.legal_issues);
    let _ = writeln!(out, "\n## {}\n", SECTION_TITLES[2]);
    md_list(&mut out, &r.authorities.iter().map(authority_line).collect::<Vec<_>>());
    if !r.cited.is_empty() {
        out.push_str("\n### Cited in Analysis\n\n");
        md_bullets(&mut out, r.cited.iter().map(|c| format!("{} -> {}", c.hint, c.resolution())));
    }
    if !r.unverified_references.is_empty() {
        out.push_str("\n### Unverified References\n\n");
        md_bullets(&mut out, r.unverified_references.iter().cloned());
    }
    if !r.provider_failures.is_empty() {
        out.push_str("\n### Provider Failures\n\n");
        md_bullets(&mut out, r.provider_failures.iter().map(failure_line));
    }
    let _ = writeln!(out, "\n## {}\n", SECTION_TITLES[3]);
    md_list(&mut out, &r.recommended_actions);
    let _ = writeln!(out, "\n## {}\n", SECTION_TITLES[4]);
    out.push_str(&r.disclaimer);
    out.push('\n');
    out
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn html_list(out: &mut String, items: &[String]) {
    if items.is_empty() {
        out.push_str("<p><em>None.</em></p>\n");
        return;
    }
    out.push_str("<ol>\n");
    for item in items {
        let _ = writeln!(out, "<li>{}</li>", esc(item));
    }
    out.push_str("</ol>\n");
}

fn html_bullets(out: &mut String, title: &str, items: Vec<String>) {
    if items.is_empty() {
        return;
    }
    let _ = writeln!(out, "<h3>{}</h3>\n<ul>", esc(title));
    for item in items {
        let _ = writeln!(out, "<li>{}</li>", esc(&item));
    }
    out.push_str("</ul>\n");
}

fn render_html(r: &AnalysisReport) -> String {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(out, "<title>Legal Analysis Report {}</title>", esc(&r.matter_id));
    out.push_str("</head>\n<body>\n<h1>Legal Analysis Report</h1>\n");
    let _ = writeln!(
        out,
        "<p>Matter: {}<br>Generated: {}</p>",
        esc(&r.matter_id),
        timestamp(&r.generated_at)
    );
    let _ = writeln!(out, "<section>\n<h2>{}</h2>", esc(SECTION_TITLES[0]));
    html_list(&mut out, &r.material_facts);
    let _ = writeln!(out, "</section>\n<section>\n<h2>{}</h2>", esc(SECTION_TITLES[1]));
    html_list(&mut out, &r.legal_issues);
    let _ = writeln!(out, "</section>\n<section>\n<h2>{}</h2>", esc(SECTION_TITLES[2]));
    html_list(&mut out, &r.authorities.iter().map(authority_line).collect::<Vec<_>>());
    html_bullets(
        &mut out,
        "Cited in Analysis",
        r.cited.iter().map(|c| format!("{} -> {}", c.hint, c.resolution())).collect(),
    );
    html_bullets(&mut out, "Unverified References", r.unverified_references.clone());
    html_bullets(
        &mut out,
        "Provider Failures",
        r.provider_failures.iter().map(failure_line).collect(),
    );
    let _ = writeln!(out, "</section>\n<section>\n<h2>{}</h2>", esc(SECTION_TITLES[3]));
    html_list(&mut out, &r.recommended_actions);
    let _ = writeln!(
        out,
        "</section>\n<section class=\"disclaimer\">\n<h2>{}</h2>\n<p>{}</p>\n</section>",
        esc(SECTION_TITLES[4]),
        esc(&r.disclaimer)
    );
    out.push_str("</body>\n</html>\n");
    out
}
