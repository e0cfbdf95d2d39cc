//! Verb-position frequency counts and the report built from them.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The bundled dataset, shipped with the crate.
pub const BUNDLED_CSV: &str = include_str!("../data/verb_position.csv");

/// Stored and recomputed percentages may differ by at most this much.
pub const PERCENT_TOL: f64 = 0.05;

const COLUMNS: [&str; 5] = ["source", "unit", "order_position", "frequency", "percentage"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Languages,
    Families,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Languages => "languages",
            Unit::Families => "families",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypologyRow {
    pub source: String,
    pub unit: Unit,
    /// 1 = verb initial, 2 = verb medial, 3 = verb final.
    pub order_position: u8,
    pub frequency: u64,
    pub percentage: f64,
}

pub fn parse_rows<R: Read>(input: R) -> Result<Vec<TypologyRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    for column in COLUMNS {
        if !headers.iter().any(|h| h == column) {
            return Err(Error::Parse(format!("typology csv: missing column `{column}`")));
        }
    }
    if let Some(extra) = headers.iter().find(|h| !COLUMNS.contains(h)) {
        return Err(Error::Parse(format!("typology csv: unexpected column `{extra}`")));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.deserialize::<TypologyRow>().enumerate() {
        let row = record.map_err(|e| Error::Parse(format!("typology csv record {}: {e}", line + 1)))?;
        if !(1..=3).contains(&row.order_position) {
            return Err(Error::Parse(format!(
                "typology csv record {}: column `order_position` must be 1, 2 or 3, got {}",
                line + 1,
                row.order_position
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn bundled_rows() -> Vec<TypologyRow> {
    parse_rows(BUNDLED_CSV.as_bytes()).expect("bundled typology data parses")
}

#[derive(Clone, Debug, PartialEq)]
pub struct PositionLine {
    pub order_position: u8,
    pub frequency: u64,
    pub recomputed: f64,
    pub published: f64,
}

impl PositionLine {
    pub fn matches_published(&self) -> bool {
        (self.recomputed - self.published).abs() <= PERCENT_TOL
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupReport {
    pub source: String,
    pub unit: Unit,
    pub total: u64,
    /// Ordered by verb position 1, 2, 3.
    pub lines: Vec<PositionLine>,
}

impl GroupReport {
    /// Frequencies strictly increase as the verb moves toward the end.
    pub fn increasing(&self) -> bool {
        self.lines.windows(2).all(|w| w[0].frequency < w[1].frequency)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypologyReport {
    pub groups: Vec<GroupReport>,
}

impl TypologyReport {
    pub fn all_increasing(&self) -> bool {
        self.groups.iter().all(GroupReport::increasing)
    }

    /// Lines whose stored percentage disagrees with the counts.
    pub fn discrepancies(&self) -> Vec<(&GroupReport, &PositionLine)> {
        self.groups
            .iter()
            .flat_map(|g| g.lines.iter().filter(|l| !l.matches_published()).map(move |l| (g, l)))
            .collect()
    }

    pub fn group(&self, source: &str, unit: Unit) -> Option<&GroupReport> {
        self.groups.iter().find(|g| g.source == source && g.unit == unit)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "source",
            "unit",
            "order_position",
            "frequency",
            "total",
            "percentage",
            "published_percentage",
            "matches_published",
            "increasing",
        ])?;
        for g in &self.groups {
            for l in &g.lines {
                w.write_record([
                    g.source.clone(),
                    g.unit.to_string(),
                    l.order_position.to_string(),
                    l.frequency.to_string(),
                    g.total.to_string(),
                    format!("{:.1}", l.recomputed),
                    format!("{:.1}", l.published),
                    l.matches_published().to_string(),
                    g.increasing().to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for TypologyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.groups {
            writeln!(f, "{} / {} (total {})", g.source, g.unit, g.total)?;
            for l in &g.lines {
                let flag = if l.matches_published() { "" } else { "  [published value differs]" };
                writeln!(
                    f,
                    "  verb position {}: {:>5}  {:>5.1}%  (published {:.1}%){flag}",
                    l.order_position, l.frequency, l.recomputed, l.published
                )?;
            }
            writeln!(f, "  increasing toward verb-final: {}", g.increasing())?;
        }
        Ok(())
    }
}

/// Groups rows by `(source, unit)` in order of first appearance and
/// recomputes every percentage from the counts.
pub fn typology_report(rows: &[TypologyRow]) -> Result<TypologyReport> {
    let mut order: Vec<(String, Unit)> = Vec::new();
    let mut groups: BTreeMap<(String, Unit), Vec<&TypologyRow>> = BTreeMap::new();
    for row in rows {
        let key = (row.source.clone(), row.unit);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(row);
    }
    let mut out = Vec::with_capacity(order.len());
    for key in order {
        let mut members = groups.remove(&key).expect("present");
        members.sort_by_key(|r| r.order_position);
        let positions: Vec<u8> = members.iter().map(|r| r.order_position).collect();
        if positions != [1, 2, 3] {
            return Err(Error::Parse(format!(
                "group {} / {}: expected one row per verb position 1..3, found {positions:?}",
                key.0, key.1
            )));
        }
        let total: u64 = members.iter().map(|r| r.frequency).sum();
        if total == 0 {
            return Err(Error::Parse(format!("group {} / {}: all frequencies are zero", key.0, key.1)));
        }
        let lines = members
            .iter()
            .map(|r| PositionLine {
                order_position: r.order_position,
                frequency: r.frequency,
                recomputed: 100.0 * r.frequency as f64 / total as f64,
                published: r.percentage,
            })
            .collect();
        out.push(GroupReport {
            source: key.0,
            unit: key.1,
            total,
            lines,
        });
    }
    Ok(TypologyReport { groups: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_totals_and_wals_percentages() {
        let report = typology_report(&bundled_rows()).unwrap();
        assert_eq!(report.groups.len(), 3);
        let wals = report.group("WALS", Unit::Languages).unwrap();
        assert_eq!(wals.total, 1056);
        let pct: Vec<f64> = wals.lines.iter().map(|l| l.recomputed).collect();
        for (got, want) in pct.iter().zip([10.5, 42.0, 47.4]) {
            assert!((got - want).abs() <= PERCENT_TOL, "{got} vs {want}");
        }
        assert_eq!(report.group("Hammarstrom2016", Unit::Languages).unwrap().total, 5128);
        assert_eq!(report.group("Hammarstrom2016", Unit::Families).unwrap().total, 340);
    }

    #[test]
    fn bundled_groups_increase() {
        let report = typology_report(&bundled_rows()).unwrap();
        assert!(report.all_increasing());
    }

    #[test]
    fn flags_published_values_that_disagree_with_counts() {
        let report = typology_report(&bundled_rows()).unwrap();
        let flagged: Vec<(u64, String)> = report
            .discrepancies()
            .iter()
            .map(|(_, l)| (l.frequency, format!("{:.2}", l.recomputed)))
            .collect();
        // 2157 / 5128 and 58 / 340
        assert_eq!(flagged, vec![(2157, "42.06".to_string()), (58, "17.06".to_string())]);
    }

    #[test]
    fn schema_errors_name_the_column() {
        let err = parse_rows("source,unit,order_position,count,percentage\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("`frequency`"), "{err}");
        let err = parse_rows("source,unit,order_position,frequency,percentage\nX,languages,4,1,1\n".as_bytes())
            .unwrap_err();
        assert!(err.to_string().contains("order_position"), "{err}");
        let bad_unit = "source,unit,order_position,frequency,percentage\nX,words,1,1,1\n";
        assert!(parse_rows(bad_unit.as_bytes()).is_err());
    }

    #[test]
    fn incomplete_group_is_rejected() {
        let text = "source,unit,order_position,frequency,percentage\nX,languages,1,5,50\nX,languages,3,5,50\n";
        assert!(typology_report(&parse_rows(text.as_bytes()).unwrap()).is_err());
    }

    #[test]
    fn report_csv_has_one_line_per_position() {
        let report = typology_report(&bundled_rows()).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert!(text.contains("WALS,languages,1,111,1056,10.5,10.5,true,true"));
    }
}
