//! Comparison of computed country scores with normative (literature)
//! values, and the report/plot artifacts built from it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ocean::{CountryScore, Dimension, OceanScore};

/// Reported mean percentual error of the OCEAN mapping on real videos.
pub const REFERENCE_OCEAN_ERROR_PCT: f64 = 30.0;
/// Reported mean percentual error of the Hofstede-dimension mapping.
pub const REFERENCE_HOFSTEDE_ERROR_PCT: f64 = 53.0;

const BASELINE_HEADER: [&str; 6] = ["country", "O", "C", "E", "A", "N"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteratureBaseline {
    pub country: String,
    #[serde(rename = "O")]
    pub openness: f64,
    #[serde(rename = "C")]
    pub conscientiousness: f64,
    #[serde(rename = "E")]
    pub extraversion: f64,
    #[serde(rename = "A")]
    pub agreeableness: f64,
    #[serde(rename = "N")]
    pub neuroticism: f64,
    pub source: String,
}

impl LiteratureBaseline {
    pub fn values(&self) -> [f64; 5] {
        [
            self.openness,
            self.conscientiousness,
            self.extraversion,
            self.agreeableness,
            self.neuroticism,
        ]
    }
}

/// Parses `country,O,C,E,A,N[,source]`.
pub fn load_baselines(text: &str) -> Result<BTreeMap<String, LiteratureBaseline>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    let has_source = headers.len() == 7 && &headers[6] == "source";
    if headers.iter().take(6).ne(BASELINE_HEADER.iter().copied())
        || !(headers.len() == 6 || has_source)
    {
        return Err(Error::parse(
            1,
            format!("expected header `{}[,source]`", BASELINE_HEADER.join(",")),
        ));
    }

    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record
            .map_err(|e| Error::parse(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(Error::parse(
                line,
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        let country = record[0].to_string();
        if country.len() != 2 || !country.bytes().all(|b| b.is_ascii_uppercase()) {
            return Err(Error::Validation(format!(
                "line {line}: {country:?} is not an ISO alpha-2 code"
            )));
        }
        let mut values = [0.0; 5];
        for (d, value) in values.iter_mut().enumerate() {
            let field = &record[d + 1];
            *value = field.parse().map_err(|_| {
                Error::parse(
                    line,
                    format!("invalid {} value {field:?}", BASELINE_HEADER[d + 1]),
                )
            })?;
            if !(0.0..=1.0).contains(value) {
                return Err(Error::Validation(format!(
                    "line {line}: {country} {} = {value} is outside [0, 1]",
                    BASELINE_HEADER[d + 1]
                )));
            }
        }
        let baseline = LiteratureBaseline {
            country: country.clone(),
            openness: values[0],
            conscientiousness: values[1],
            extraversion: values[2],
            agreeableness: values[3],
            neuroticism: values[4],
            source: if has_source {
                record[6].to_string()
            } else {
                String::new()
            },
        };
        if out.insert(country.clone(), baseline).is_some() {
            return Err(Error::Validation(format!(
                "line {line}: duplicate baseline for {country}"
            )));
        }
    }
    Ok(out)
}

/// Relative absolute difference in percent, per dimension. `None` where the
/// baseline is zero.
pub fn percentual_error(
    computed: &CountryScore,
    baseline: &LiteratureBaseline,
) -> Result<[Option<f64>; 5]> {
    if computed.country != baseline.country {
        return Err(Error::Usage(format!(
            "cannot compare {} scores with the {} baseline",
            computed.country, baseline.country
        )));
    }
    let values = computed.score.values();
    let reference = baseline.values();
    Ok(std::array::from_fn(|d| {
        (reference[d] != 0.0).then(|| 100.0 * (values[d] - reference[d]).abs() / reference[d])
    }))
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryErrors {
    pub country: String,
    pub videos: usize,
    pub computed: OceanScore,
    pub baseline: LiteratureBaseline,
    /// Percent error per dimension; `null` where undefined.
    pub percent_error: BTreeMap<Dimension, Option<f64>>,
    pub mean_percent_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceErrors {
    pub ocean_mean_error_pct: f64,
    pub hofstede_mean_error_pct: f64,
}

impl Default for ReferenceErrors {
    fn default() -> Self {
        Self {
            ocean_mean_error_pct: REFERENCE_OCEAN_ERROR_PCT,
            hofstede_mean_error_pct: REFERENCE_HOFSTEDE_ERROR_PCT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub countries: Vec<CountryErrors>,
    /// Mean over every defined per-dimension error of every country.
    pub overall_mean_percent_error: Option<f64>,
    pub countries_without_baseline: Vec<String>,
    pub reference: ReferenceErrors,
}

pub fn compare(
    countries: &[CountryScore],
    baselines: &BTreeMap<String, LiteratureBaseline>,
) -> Result<ErrorReport> {
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for country in countries {
        let Some(baseline) = baselines.get(&country.country) else {
            missing.push(country.country.clone());
            continue;
        };
        let errors = percentual_error(country, baseline)?;
        rows.push(CountryErrors {
            country: country.country.clone(),
            videos: country.videos,
            computed: country.score,
            baseline: baseline.clone(),
            percent_error: Dimension::ALL
                .iter()
                .map(|&d| (d, errors[d.index()]))
                .collect(),
            mean_percent_error: mean_defined(errors.into_iter()),
        });
    }
    rows.sort_by(|a, b| a.country.cmp(&b.country));
    missing.sort();
    let overall = mean_defined(rows.iter().flat_map(|r| r.percent_error.values().copied()));
    Ok(ErrorReport {
        countries: rows,
        overall_mean_percent_error: overall,
        countries_without_baseline: missing,
        reference: ReferenceErrors::default(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extreme {
    pub country: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionExtremes {
    pub higher: Extreme,
    pub lower: Extreme,
}

/// Highest and lowest country per dimension; ties go to the smaller country
/// code.
pub fn extremes(countries: &[CountryScore]) -> BTreeMap<Dimension, DimensionExtremes> {
    let mut sorted: Vec<&CountryScore> = countries.iter().collect();
    sorted.sort_by(|a, b| a.country.cmp(&b.country));
    let mut out = BTreeMap::new();
    if sorted.is_empty() {
        return out;
    }
    for d in Dimension::ALL {
        let mut higher = sorted[0];
        let mut lower = sorted[0];
        for c in &sorted[1..] {
            if c.score.get(d) > higher.score.get(d) {
                higher = c;
            }
            if c.score.get(d) < lower.score.get(d) {
                lower = c;
            }
        }
        out.insert(
            d,
            DimensionExtremes {
                higher: Extreme {
                    country: higher.country.clone(),
                    value: higher.score.get(d),
                },
                lower: Extreme {
                    country: lower.country.clone(),
                    value: lower.score.get(d),
                },
            },
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub country_scores: Vec<CountryScore>,
    pub extremes: BTreeMap<Dimension, DimensionExtremes>,
    pub errors: ErrorReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportArtifacts {
    pub json: String,
    pub plot_csv: String,
}

pub const PLOT_CSV_HEADER: &str = "series,label,value";

/// JSON report plus a long-format `series,label,value` table for plotting.
pub fn emit_report(errors: &ErrorReport, scores: &[CountryScore]) -> Result<ReportArtifacts> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("no country scores to report".into()));
    }
    let mut country_scores = scores.to_vec();
    country_scores.sort_by(|a, b| a.country.cmp(&b.country));
    let report = Report {
        extremes: extremes(&country_scores),
        country_scores,
        errors: errors.clone(),
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report is always serializable");
    json.push('\n');

    let mut plot = String::from(PLOT_CSV_HEADER);
    plot.push('\n');
    for c in &report.country_scores {
        for d in Dimension::ALL {
            let _ = writeln!(
                plot,
                "computed_{},{},{:.6}",
                d.letter(),
                c.country,
                c.score.get(d)
            );
        }
    }
    for row in &errors.countries {
        let baseline = row.baseline.values();
        for d in Dimension::ALL {
            let _ = writeln!(
                plot,
                "baseline_{},{},{:.6}",
                d.letter(),
                row.country,
                baseline[d.index()]
            );
        }
        for d in Dimension::ALL {
            if let Some(e) = row.percent_error[&d] {
                let _ = writeln!(
                    plot,
                    "percent_error_{},{},{:.6}",
                    d.letter(),
                    row.country,
                    e
                );
            }
        }
        if let Some(m) = row.mean_percent_error {
            let _ = writeln!(plot, "mean_percent_error,{},{:.6}", row.country, m);
        }
    }
    if let Some(m) = errors.overall_mean_percent_error {
        let _ = writeln!(plot, "overall_mean_percent_error,all,{m:.6}");
    }
    let _ = writeln!(
        plot,
        "reference_mean_percent_error,ocean,{:.6}",
        errors.reference.ocean_mean_error_pct
    );
    let _ = writeln!(
        plot,
        "reference_mean_percent_error,hofstede,{:.6}",
        errors.reference.hofstede_mean_error_pct
    );

    Ok(ReportArtifacts {
        json,
        plot_csv: plot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ocean::ScoreLevel;

    fn country(code: &str, values: [f64; 5]) -> CountryScore {
        CountryScore {
            country: code.into(),
            videos: 1,
            score: OceanScore::from_values(values, ScoreLevel::Country),
        }
    }

    #[test]
    fn loads_single_record() {
        let b = load_baselines("country,O,C,E,A,N\nBR,0.5,0.5,0.5,0.5,0.5").unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b["BR"].values(), [0.5; 5]);
        assert_eq!(b["BR"].source, "");

        let b =
            load_baselines("country,O,C,E,A,N,source\nBR,0.5,0.5,0.5,0.5,0.5,example\n").unwrap();
        assert_eq!(b["BR"].source, "example");
    }

    #[test]
    fn rejects_out_of_range_and_duplicates() {
        let err = load_baselines("country,O,C,E,A,N\nBR,1.2,0.5,0.5,0.5,0.5").unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err:?}");
        let err =
            load_baselines("country,O,C,E,A,N\nBR,0.5,0.5,0.5,0.5,0.5\nBR,0.4,0.5,0.5,0.5,0.5")
                .unwrap_err();
        assert!(
            matches!(err, Error::Validation(ref m) if m.contains("duplicate")),
            "{err:?}"
        );
        let err = load_baselines("country,O,C,E\nBR,0.5,0.5,0.5").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err:?}");
    }

    #[test]
    fn percent_error_examples() {
        let base = load_baselines("country,O,C,E,A,N\nCN,0.80,0.5,0.5,0,0.5").unwrap();
        let errors =
            percentual_error(&country("CN", [0.89, 0.5, 0.5, 0.3, 0.5]), &base["CN"]).unwrap();
        assert!((errors[0].unwrap() - 11.25).abs() < 1e-12);
        assert_eq!(errors[1], Some(0.0));
        assert_eq!(errors[3], None);

        let err = percentual_error(&country("BR", [0.5; 5]), &base["CN"]).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn extremes_table() {
        let scores = [
            country("CN", [0.5, 0.5, 0.33, 0.5, 0.5]),
            country("BR", [0.5, 0.5, 0.50, 0.5, 0.5]),
        ];
        let ex = extremes(&scores);
        assert_eq!(ex[&Dimension::Extraversion].higher.country, "BR");
        assert_eq!(ex[&Dimension::Extraversion].lower.country, "CN");
        // tie on O goes to the smaller code both ways
        assert_eq!(ex[&Dimension::Openness].higher.country, "BR");
        assert_eq!(ex[&Dimension::Openness].lower.country, "BR");

        let single = extremes(&scores[..1]);
        assert_eq!(single[&Dimension::Neuroticism].higher.country, "CN");
        assert_eq!(single[&Dimension::Neuroticism].lower.country, "CN");
    }

    #[test]
    fn report_is_deterministic() {
        let scores = vec![
            country("BR", [0.5, 0.4, 0.5, 0.6, 0.4]),
            country("JP", [0.6, 0.3, 0.4, 0.6, 0.42]),
        ];
        let base = load_baselines("country,O,C,E,A,N\nBR,0.6,0.5,0.5,0.5,0.5\n").unwrap();
        let errors = compare(&scores, &base).unwrap();
        assert_eq!(errors.countries_without_baseline, vec!["JP".to_string()]);
        let a = emit_report(&errors, &scores).unwrap();
        let mut reversed = scores.clone();
        reversed.reverse();
        let b = emit_report(&errors, &reversed).unwrap();
        assert_eq!(a, b);
        assert!(a.plot_csv.starts_with(PLOT_CSV_HEADER));
        let json: serde_json::Value = serde_json::from_str(&a.json).unwrap();
        assert_eq!(json["extremes"]["E"]["higher"]["country"], "BR");
        assert!(emit_report(&errors, &[]).is_err());
    }
}
