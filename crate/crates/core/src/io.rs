//! Survey CSV files.
//!
//! Header row, comma separated, UTF-8. Columns:
//!
//! | column           | required | values                    |
//! |------------------|----------|---------------------------|
//! | `respondent_id`  | no       | any string                |
//! | `answer`         | yes      | `DIFFERENT` or `SAME`     |
//! | `subsample`      | yes      | `1` or `2`                |
//! | `control_answer` | no       | `DIFFERENT`, `SAME`, empty|
//! | `control_a_true` | with control answer | `0` or `1`     |
//! | `control_b_prob` | with control answer | `0` or `1`     |
//! | `time_minutes`   | no       | positive decimal or empty |

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::records::{Answer, ControlDesign, ControlResponse, Respondent, Subsample};

pub const COLUMNS: [&str; 7] = [
    "respondent_id",
    "answer",
    "subsample",
    "control_answer",
    "control_a_true",
    "control_b_prob",
    "time_minutes",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyRow {
    pub respondent_id: String,
    pub respondent: Respondent,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SurveyFile {
    pub rows: Vec<SurveyRow>,
    /// The header carried the control columns.
    pub has_control: bool,
    /// The header carried `time_minutes`.
    pub has_time: bool,
}

impl SurveyFile {
    pub fn respondents(&self) -> Vec<Respondent> {
        self.rows.iter().map(|r| r.respondent).collect()
    }
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e.to_string()),
        other => Error::Parse { line, message: format!("{other:?}") },
    }
}

pub fn read_survey<R: Read>(reader: R) -> Result<SurveyFile> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let answer_col = col("answer").ok_or_else(|| Error::MissingColumn("answer".into()))?;
    let subsample_col = col("subsample").ok_or_else(|| Error::MissingColumn("subsample".into()))?;
    let id_col = col("respondent_id");
    let control_col = col("control_answer");
    let a_col = col("control_a_true");
    let b_col = col("control_b_prob");
    let time_col = col("time_minutes");
    if control_col.is_some() {
        if a_col.is_none() {
            return Err(Error::MissingColumn("control_a_true".into()));
        }
        if b_col.is_none() {
            return Err(Error::MissingColumn("control_b_prob".into()));
        }
    }

    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(i as u64 + 2, |p| p.line());
        let bad = |message: String| Error::Parse { line, message };
        let field = |c: Option<usize>| c.and_then(|c| rec.get(c)).unwrap_or("");

        let answer: Answer = field(Some(answer_col)).parse().map_err(bad)?;
        let subsample = match field(Some(subsample_col)) {
            "1" => Subsample::One,
            "2" => Subsample::Two,
            other => return Err(bad(format!("unknown subsample {other:?}, expected 1 or 2"))),
        };
        let mut respondent = Respondent::new(answer, subsample);

        let control_answer = field(control_col);
        if !control_answer.is_empty() {
            let answer: Answer = control_answer.parse().map_err(|m| bad(format!("control_answer: {m}")))?;
            let a_true = match field(a_col) {
                "1" => true,
                "0" => false,
                other => return Err(bad(format!("control_a_true must be 0 or 1, got {other:?}"))),
            };
            let b_prob: u8 = field(b_col)
                .parse()
                .map_err(|_| bad(format!("control_b_prob must be 0 or 1, got {:?}", field(b_col))))?;
            let design = ControlDesign::new(a_true, b_prob)
                .map_err(|e| bad(e.to_string()))?;
            respondent = respondent.with_control(ControlResponse { answer, design });
        }

        let time = field(time_col);
        if !time.is_empty() {
            let t: f64 = time.parse().map_err(|_| bad(format!("time_minutes {time:?} is not a number")))?;
            if !(t.is_finite() && t > 0.0) {
                return Err(bad(format!("time_minutes must be positive, got {t}")));
            }
            respondent = respondent.with_time(t);
        }

        let respondent_id = match id_col {
            Some(c) => rec.get(c).unwrap_or("").to_string(),
            None => (i + 1).to_string(),
        };
        rows.push(SurveyRow { respondent_id, respondent });
    }
    Ok(SurveyFile { rows, has_control: control_col.is_some(), has_time: time_col.is_some() })
}

/// Writes every column of the schema; absent optional values are empty.
/// Times use the shortest representation that parses back to the same value.
pub fn write_survey<W: Write>(writer: W, rows: &[SurveyRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(COLUMNS).map_err(csv_error)?;
    for row in rows {
        let r = &row.respondent;
        let (ctrl, a, b) = match r.control {
            Some(c) => (
                c.answer.as_str().to_string(),
                u8::from(c.design.a_true).to_string(),
                c.design.b_prob().to_string(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        let time = r.time_minutes.map(|t| t.to_string()).unwrap_or_default();
        wtr.write_record([
            row.respondent_id.as_str(),
            r.answer.as_str(),
            &r.subsample.number().to_string(),
            &ctrl,
            &a,
            &b,
            &time,
        ])
        .map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_minimal_file() {
        let data = "answer,subsample\nSAME,1\nDIFFERENT,2\n";
        let f = read_survey(data.as_bytes()).unwrap();
        assert_eq!(f.rows.len(), 2);
        assert!(!f.has_control && !f.has_time);
        assert_eq!(f.rows[1].respondent, Respondent::new(Answer::Different, Subsample::Two));
        assert_eq!(f.rows[1].respondent_id, "2");
    }

    #[test]
    fn missing_column_is_named() {
        let err = read_survey("respondent_id,answer\n1,SAME\n".as_bytes()).unwrap_err();
        assert_eq!(err, Error::MissingColumn("subsample".into()));
        let err = read_survey("answer,subsample,control_answer,control_a_true\n".as_bytes()).unwrap_err();
        assert_eq!(err, Error::MissingColumn("control_b_prob".into()));
    }

    #[test]
    fn unknown_values_report_line() {
        let err = read_survey("answer,subsample\nSAME,1\nYES,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = read_survey("answer,subsample\nSAME,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let data = "answer,subsample,control_answer,control_a_true,control_b_prob\nSAME,1,SAME,1,2\n";
        assert!(matches!(read_survey(data.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let data = "answer,subsample,time_minutes\nSAME,1,-1\n";
        assert!(matches!(read_survey(data.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn round_trip() {
        let rows = vec![
            SurveyRow {
                respondent_id: "a".into(),
                respondent: Respondent::new(Answer::Different, Subsample::One)
                    .with_control(ControlResponse { answer: Answer::Same, design: ControlDesign::new(true, 1).unwrap() })
                    .with_time(std::f64::consts::PI),
            },
            SurveyRow { respondent_id: "b".into(), respondent: Respondent::new(Answer::Same, Subsample::Two) },
        ];
        let mut buf = Vec::new();
        write_survey(&mut buf, &rows).unwrap();
        let back = read_survey(buf.as_slice()).unwrap();
        assert_eq!(back.rows, rows);
        assert!(back.has_control && back.has_time);
    }
}
