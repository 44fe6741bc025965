//! Generic query to provider dialect, and back.

use chrono::NaiveDate;
use url::form_urlencoded;

use super::{DateRange, Dialect, GenericQuery, ProviderQuery, ResearchError};
use crate::domain::{parse_jurisdiction, Jurisdiction};

/// What a connector needs to run a query, recovered from its dialect text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedQuery {
    pub terms: Vec<String>,
    pub jurisdiction: Option<Jurisdiction>,
    pub date_range: Option<DateRange>,
}

fn clean_terms(q: &GenericQuery) -> Vec<String> {
    q.terms
        .iter()
        .map(|t| t.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|t| !t.is_empty())
        .collect()
}

fn boolean_term(term: &str, dialect: Dialect) -> Result<String, ResearchError> {
    if term.contains('"') || term.contains(':') || term == "AND" {
        return Err(ResearchError::UnsupportedDialect(dialect));
    }
    Ok(if term.contains(' ') {
        format!("\"{term}\"")
    } else {
        term.to_string()
    })
}

fn boolean_expr(terms: &[String], dialect: Dialect) -> Result<String, ResearchError> {
    Ok(terms
        .iter()
        .map(|t| boolean_term(t, dialect))
        .collect::<Result<Vec<_>, _>>()?
        .join(" AND "))
}

/// Serializes a generic query for one provider dialect. Output is a pure
/// function of the query.
pub fn translate_query(q: &GenericQuery, dialect: Dialect) -> Result<ProviderQuery, ResearchError> {
    let terms = clean_terms(q);
    if terms.is_empty() {
        return Err(ResearchError::InvalidQuery("terms must be non-empty".into()));
    }
    let text = match dialect {
        Dialect::SimBoolean => {
            let mut s = boolean_expr(&terms, dialect)?;
            s.push_str(&format!(" jurisdiction:{}", q.jurisdiction));
            if let Some(r) = q.date_range {
                s.push_str(&format!(" from:{} to:{}", r.from, r.to));
            }
            s
        }
        Dialect::CanliiRest => {
            let mut ser = form_urlencoded::Serializer::new(String::new());
            ser.append_pair("fullText", &boolean_expr(&terms, dialect)?);
            ser.append_pair("jurisdiction", &q.jurisdiction.code());
            ser.append_pair("resultCount", &q.max_results_per_provider.to_string());
            if let Some(r) = q.date_range {
                ser.append_pair("decisionDateAfter", &r.from.to_string());
                ser.append_pair("decisionDateBefore", &r.to.to_string());
            }
            ser.finish()
        }
        Dialect::Statutory => {
            let mut ser = form_urlencoded::Serializer::new(String::new());
            ser.append_pair("fulltext", &terms.join(" "));
            ser.append_pair("jurisdiction", &q.jurisdiction.code());
            if let Some(r) = q.date_range {
                ser.append_pair("inForceFrom", &r.from.to_string());
                ser.append_pair("inForceTo", &r.to.to_string());
            }
            ser.finish()
        }
    };
    Ok(ProviderQuery {
        dialect,
        text,
        max_results: q.max_results_per_provider,
    })
}

fn bad(pq: &ProviderQuery, why: &str) -> ResearchError {
    ResearchError::InvalidQuery(format!("{:?} query `{}`: {why}", pq.dialect, pq.text))
}

fn parse_date(pq: &ProviderQuery, s: &str) -> Result<NaiveDate, ResearchError> {
    s.parse().map_err(|_| bad(pq, "bad date"))
}

fn split_boolean(pq: &ProviderQuery, expr: &str) -> Result<Vec<String>, ResearchError> {
    expr.split(" AND ")
        .map(|t| {
            let t = t.trim();
            let t = t
                .strip_prefix('"')
                .and_then(|t| t.strip_suffix('"'))
                .unwrap_or(t);
            if t.is_empty() {
                Err(bad(pq, "empty term"))
            } else {
                Ok(t.to_string())
            }
        })
        .collect()
}

fn date_pair(
    pq: &ProviderQuery,
    from: Option<String>,
    to: Option<String>,
) -> Result<Option<DateRange>, ResearchError> {
    match (from, to) {
        (None, None) => Ok(None),
        (Some(f), Some(t)) => Ok(Some(DateRange {
            from: parse_date(pq, &f)?,
            to: parse_date(pq, &t)?,
        })),
        _ => Err(bad(pq, "half-open date range")),
    }
}

/// Inverse of [`translate_query`].
pub fn parse_provider_query(pq: &ProviderQuery) -> Result<ParsedQuery, ResearchError> {
    match pq.dialect {
        Dialect::SimBoolean => {
            let (mut expr, mut jurisdiction, mut from, mut to) = (pq.text.as_str(), None, None, None);
            // Filters trail the boolean expression as ` key:value` pairs.
            while let Some(pos) = expr.rfind(' ') {
                let tail = &expr[pos + 1..];
                let Some((key, value)) = tail.split_once(':') else { break };
                match key {
                    "jurisdiction" => {
                        jurisdiction =
                            Some(parse_jurisdiction(value).map_err(|_| bad(pq, "jurisdiction"))?)
                    }
                    "from" => from = Some(value.to_string()),
                    "to" => to = Some(value.to_string()),
                    _ => break,
                }
                expr = &expr[..pos];
            }
            Ok(ParsedQuery {
                terms: split_boolean(pq, expr)?,
                jurisdiction,
                date_range: date_pair(pq, from, to)?,
            })
        }
        Dialect::CanliiRest | Dialect::Statutory => {
            let (mut text, mut jurisdiction, mut from, mut to) = (None, None, None, None);
            for (k, v) in form_urlencoded::parse(pq.text.as_bytes()) {
                match k.as_ref() {
                    "fullText" | "fulltext" => text = Some(v.into_owned()),
                    "jurisdiction" => {
                        jurisdiction =
                            Some(parse_jurisdiction(&v).map_err(|_| bad(pq, "jurisdiction"))?)
                    }
                    "decisionDateAfter" | "inForceFrom" => from = Some(v.into_owned()),
                    "decisionDateBefore" | "inForceTo" => to = Some(v.into_owned()),
                    _ => {}
                }
            }
            let text = text.ok_or_else(|| bad(pq, "missing full-text parameter"))?;
            let terms = if pq.dialect == Dialect::CanliiRest {
                split_boolean(pq, &text)?
            } else {
                text.split_whitespace().map(str::to_string).collect()
            };
            if terms.is_empty() {
                return Err(bad(pq, "no terms"));
            }
            Ok(ParsedQuery {
                terms,
                jurisdiction,
                date_range: date_pair(pq, from, to)?,
            })
        }
    }
}
