use super::table::{Cells, RawColumn, RawTable};
use super::DatasetConfig;
use crate::error::{Error, Result};

pub(crate) fn parse(text: &str, config: &DatasetConfig) -> Result<RawTable> {
    if !config.delimiter.is_ascii() {
        return Err(Error::Config(format!(
            "delimiter `{}` must be a single ASCII character",
            config.delimiter
        )));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(config.delimiter as u8)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Config(format!("cannot read header row: {e}")))?
        .iter()
        .map(str::to_owned)
        .collect();

    let required = [&config.target, &config.sensitive]
        .into_iter()
        .chain(&config.drop)
        .chain(&config.encoding.categorical);
    for name in required {
        if !header.contains(name) {
            return Err(Error::Config(format!("column `{name}` not found in header")));
        }
    }

    let is_textual = |name: &str| {
        name == config.target
            || name == config.sensitive
            || config.drop.iter().any(|c| c == name)
            || config.encoding.categorical.iter().any(|c| c == name)
    };

    let mut raw: Vec<Vec<Option<String>>> = vec![Vec::new(); header.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            row: i + 1,
            column: String::new(),
            message: e.to_string(),
        })?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                row: i + 1,
                column: String::new(),
                message: format!("expected {} cells, found {}", header.len(), record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let missing = config.missing.iter().any(|m| m == cell);
            raw[j].push((!missing).then(|| cell.to_owned()));
        }
    }
    let n_rows = raw.first().map_or(0, Vec::len);

    let mut columns = Vec::with_capacity(header.len());
    for (name, cells) in header.into_iter().zip(raw) {
        let cells = if is_textual(&name) {
            let mut domain: Vec<String> = Vec::new();
            let codes = cells
                .into_iter()
                .map(|c| {
                    c.map(|v| match domain.iter().position(|d| *d == v) {
                        Some(k) => k,
                        None => {
                            domain.push(v);
                            domain.len() - 1
                        }
                    })
                })
                .collect();
            Cells::Nominal { domain, codes }
        } else {
            let mut values = Vec::with_capacity(cells.len());
            for (i, c) in cells.into_iter().enumerate() {
                let v = match c {
                    None => None,
                    Some(s) => Some(parse_number(&s).ok_or_else(|| Error::Parse {
                        row: i + 1,
                        column: name.clone(),
                        message: format!("`{s}` is not a finite number"),
                    })?),
                };
                values.push(v);
            }
            Cells::Numeric(values)
        };
        columns.push(RawColumn { name, cells });
    }
    Ok(RawTable { columns, n_rows })
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use crate::dataset::{load_str, DatasetConfig, DatasetSource, EncodingRules};
    use crate::error::Error;

    fn config() -> DatasetConfig {
        DatasetConfig {
            name: "toy".into(),
            source: DatasetSource::Path("toy.csv".into()),
            target: "y".into(),
            positive: "yes".into(),
            sensitive: "sex".into(),
            protected: "F".into(),
            drop: vec![],
            delimiter: ',',
            missing: vec![String::new()],
            encoding: EncodingRules {
                categorical: vec!["colour".into()],
                ..Default::default()
            },
        }
    }

    #[test]
    fn group_flags_follow_sensitive_column() {
        let text = "age,sex,colour,y\n30,M,red,yes\n41,F,blue,no\n22,F,green,yes\n57,M,red,no\n";
        let loaded = load_str(text, false, &config()).unwrap();
        let d = loaded.dataset;
        assert_eq!(d.group().as_slice(), &[0, 1, 1, 0]);
        assert_eq!(d.labels().as_slice(), &[1, 0, 1, 0]);
        // age + one-hot colour (3 levels); sex is not a feature.
        assert_eq!(d.n_features(), 4);
        assert_eq!(d.feature_names()[0], "age");
        assert_eq!(d.features()[[2, 3]], 1.0);
        assert_eq!(loaded.dropped_rows, 0);
    }

    #[test]
    fn question_mark_in_numeric_feature_names_the_row() {
        let text = "age,sex,colour,y\n30,M,red,yes\n?,F,blue,no\n";
        let err = load_str(text, false, &config()).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "age");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rows_with_empty_cells_are_dropped_and_counted() {
        let text = "age,sex,colour,y\n30,M,red,yes\n,F,blue,no\n22,F,green,yes\n57,M,,no\n";
        let loaded = load_str(text, false, &config()).unwrap();
        assert_eq!(loaded.dataset.len(), 2);
        assert_eq!(loaded.dropped_rows, 2);
        assert_eq!(loaded.source_rows, 4);
    }

    #[test]
    fn non_binary_sensitive_column_is_rejected() {
        let text = "age,sex,colour,y\n30,M,red,yes\n41,F,blue,no\n22,X,green,yes\n";
        let err = load_str(text, false, &config()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err:?}");
    }

    #[test]
    fn missing_column_is_config_error() {
        let text = "age,gender,colour,y\n30,M,red,yes\n";
        let err = load_str(text, false, &config()).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err:?}");
    }

    #[test]
    fn custom_delimiter() {
        let mut cfg = config();
        cfg.delimiter = ';';
        let text = "age;sex;colour;y\n30;M;red;yes\n41;F;blue;no\n";
        let d = load_str(text, false, &cfg).unwrap().dataset;
        assert_eq!(d.len(), 2);
    }
}
