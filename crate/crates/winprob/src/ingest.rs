//! CSV ingestion of benchmark rankings, in the two shapes comparative
//! studies publish.
//!
//! Matrix dialect: header `dataset,<name_1>,...,<name_m>`; each data row
//! holds a dataset id followed by the rank (1..=m) attained by each named
//! algorithm, forming a full permutation.
//!
//! Top-K dialect: header `dataset,rank1,...,rankK`; each data row holds a
//! dataset id followed by the names of the K best algorithms in finishing
//! order. The roster defaults to the names encountered; an explicit roster
//! pins the full algorithm set (including never-top-K entrants) and makes
//! unknown names an error.
//!
//! Both dialects ignore blank lines and `#` comments, so emitted files can
//! carry their generating configuration inline. Ties are rejected: every
//! error names the offending 1-based line.

use crate::error::{Error, ParseError, Result};
use crate::ranking::{BenchmarkSample, RankingObservation};

/// Lines that carry content: skips blanks and `#` comments, keeps 1-based
/// line numbers.
fn content_lines(input: &str) -> impl Iterator<Item = (usize, &str)> {
    input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

/// Parses the matrix dialect into a full-ranking sample.
pub fn parse_matrix_csv(content: &str) -> Result<BenchmarkSample> {
    let mut lines = content_lines(content);
    let (_, header) = lines.next().ok_or(ParseError::Empty)?;
    let fields = split_fields(header);
    if fields.len() < 3 {
        return Err(ParseError::BadHeader(format!(
            "need a dataset column and at least two algorithm names, found {} fields",
            fields.len()
        ))
        .into());
    }
    let names: Vec<String> = fields[1..].iter().map(|s| s.to_string()).collect();
    let m = names.len();
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(ParseError::BadHeader(format!("empty name in column {}", i + 2)).into());
        }
        if names[..i].contains(name) {
            return Err(ParseError::BadHeader(format!("duplicate algorithm name `{name}`")).into());
        }
    }

    let mut observations = Vec::new();
    for (line, text) in lines {
        let cells = split_fields(text);
        if cells.len() != m + 1 {
            return Err(ParseError::RaggedRow {
                line,
                expected: m + 1,
                found: cells.len(),
            }
            .into());
        }
        // ordered[r - 1] = algorithm holding rank r.
        let mut ordered = vec![usize::MAX; m];
        for (alg, cell) in cells[1..].iter().enumerate() {
            let rank: usize = cell.parse().map_err(|_| ParseError::BadRank {
                line,
                value: cell.to_string(),
                reason: "not a positive integer".to_string(),
            })?;
            if rank < 1 || rank > m {
                return Err(ParseError::BadRank {
                    line,
                    value: cell.to_string(),
                    reason: format!("outside 1..={m}"),
                }
                .into());
            }
            if ordered[rank - 1] != usize::MAX {
                return Err(ParseError::TiedRank { line, rank }.into());
            }
            ordered[rank - 1] = alg;
        }
        observations.push(RankingObservation::new(ordered)?);
    }
    if observations.is_empty() {
        return Err(ParseError::Empty.into());
    }
    BenchmarkSample::new(names, observations)
}

/// Parses the top-K dialect. With `roster: None` the algorithm set is the
/// names encountered, in order of first appearance; with an explicit roster
/// every name must be a member and the roster fixes `m` and the index order.
pub fn parse_topk_csv(content: &str, roster: Option<&[String]>) -> Result<BenchmarkSample> {
    if let Some(names) = roster {
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(ParseError::Roster(format!("empty name at entry {}", i + 1)).into());
            }
            if names[..i].contains(name) {
                return Err(ParseError::Roster(format!("duplicate name `{name}`")).into());
            }
        }
    }

    let mut lines = content_lines(content);
    let (_, header) = lines.next().ok_or(ParseError::Empty)?;
    let k = split_fields(header).len().saturating_sub(1);
    if k < 1 {
        return Err(ParseError::BadHeader(
            "need a dataset column and at least one rank column".to_string(),
        )
        .into());
    }

    let mut names: Vec<String> = roster.map(<[String]>::to_vec).unwrap_or_default();
    let mut rows: Vec<(usize, Vec<usize>)> = Vec::new();
    for (line, text) in lines {
        let cells = split_fields(text);
        if cells.len() != k + 1 {
            return Err(ParseError::RaggedRow {
                line,
                expected: k + 1,
                found: cells.len(),
            }
            .into());
        }
        let mut ordered = Vec::with_capacity(k);
        for cell in &cells[1..] {
            if cell.is_empty() {
                return Err(ParseError::EmptyName { line }.into());
            }
            let idx = match names.iter().position(|n| n == cell) {
                Some(idx) => idx,
                None if roster.is_some() => {
                    return Err(ParseError::UnknownAlgorithm {
                        line,
                        name: cell.to_string(),
                    }
                    .into());
                }
                None => {
                    names.push(cell.to_string());
                    names.len() - 1
                }
            };
            if ordered.contains(&idx) {
                return Err(ParseError::RepeatedAlgorithm {
                    line,
                    name: cell.to_string(),
                }
                .into());
            }
            ordered.push(idx);
        }
        rows.push((line, ordered));
    }
    if rows.is_empty() {
        return Err(ParseError::Empty.into());
    }
    let observations = rows
        .into_iter()
        .map(|(_, ordered)| RankingObservation::new(ordered))
        .collect::<Result<_>>()?;
    BenchmarkSample::new(names, observations)
}

/// Roster files list one algorithm name per line; blanks and `#` comments
/// are ignored.
pub fn parse_roster(content: &str) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for (line, text) in content_lines(content) {
        if text.contains(',') {
            return Err(
                ParseError::Roster(format!("line {line}: names may not contain commas")).into(),
            );
        }
        if names.iter().any(|n| n == text) {
            return Err(
                ParseError::Roster(format!("line {line}: duplicate name `{text}`")).into(),
            );
        }
        names.push(text.to_string());
    }
    if names.is_empty() {
        return Err(ParseError::Roster("roster file lists no names".to_string()).into());
    }
    Ok(names)
}

/// Serializes a full-ranking sample in the matrix dialect.
pub fn write_matrix_csv(sample: &BenchmarkSample) -> Result<String> {
    let m = sample.m();
    if sample.observations().iter().any(|o| o.depth() != m) {
        return Err(Error::NeedsFullRankings("matrix serialization"));
    }
    let mut out = String::from("dataset");
    for name in sample.algorithm_names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, obs) in sample.observations().iter().enumerate() {
        let mut rank_of = vec![0usize; m];
        for (pos, &alg) in obs.ranked().iter().enumerate() {
            rank_of[alg] = pos + 1;
        }
        out.push_str(&format!("d{}", i + 1));
        for r in rank_of {
            out.push_str(&format!(",{r}"));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Serializes the top `depth` positions of each observation in the top-K
/// dialect, where `depth` is the sample's effective depth.
pub fn write_topk_csv(sample: &BenchmarkSample) -> String {
    let k = sample.effective_depth();
    let mut out = String::from("dataset");
    for j in 1..=k {
        out.push_str(&format!(",rank{j}"));
    }
    out.push('\n');
    let names = sample.algorithm_names();
    for (i, obs) in sample.observations().iter().enumerate() {
        out.push_str(&format!("d{}", i + 1));
        for &alg in obs.ranked().iter().take(k) {
            out.push(',');
            out.push_str(&names[alg]);
        }
        out.push('\n');
    }
    out
}
