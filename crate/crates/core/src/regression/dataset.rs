use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            data: ColumnData::Numeric(values),
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            data: ColumnData::Categorical(values.into_iter().map(Into::into).collect()),
        }
    }

    /// Distinct levels in lexicographic order; `None` for numeric columns.
    pub fn levels(&self) -> Option<Vec<String>> {
        match &self.data {
            ColumnData::Numeric(_) => None,
            ColumnData::Categorical(values) => {
                let mut levels = values.clone();
                levels.sort();
                levels.dedup();
                Some(levels)
            }
        }
    }
}

/// Typed table of named columns, all of the same length, row order as read.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    n: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let n = columns.first().map_or(0, |c| c.data.len());
        for c in &columns {
            if c.data.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "column '{}' has {} rows, expected {n}",
                    c.name,
                    c.data.len()
                )));
            }
            if let ColumnData::Numeric(values) = &c.data {
                if let Some(row) = values.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteValue {
                        row: row + 2,
                        column: c.name.clone(),
                    });
                }
            }
        }
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::InvalidParameter(format!("duplicate column name '{}'", c.name)));
            }
        }
        Ok(Self { columns, n })
    }

    /// Parses CSV with a header row. Columns whose every cell parses as a
    /// number are numeric; all others are categorical.
    ///
    /// Row numbers in errors are 1-based file line numbers, so the first
    /// data row is row 2.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            Some(rec) => rec?,
            None => return Err(Error::MissingHeader),
        };
        let names: Vec<String> = header.iter().map(str::to_owned).collect();
        if names.iter().all(String::is_empty) {
            return Err(Error::MissingHeader);
        }
        if let Some(i) = names.iter().position(String::is_empty) {
            return Err(Error::Csv(format!("header field {} is empty", i + 1)));
        }

        let mut cells: Vec<Vec<String>> = vec![Vec::new(); names.len()];
        for (i, rec) in records.enumerate() {
            let rec = rec?;
            let row = i + 2;
            if rec.len() == 1 && rec.get(0) == Some("") {
                // blank line
                continue;
            }
            if rec.len() != names.len() {
                return Err(Error::RaggedRow {
                    row,
                    expected: names.len(),
                    found: rec.len(),
                });
            }
            for (j, field) in rec.iter().enumerate() {
                if field.is_empty() {
                    return Err(Error::MissingValue {
                        row,
                        column: names[j].clone(),
                    });
                }
                cells[j].push(field.to_owned());
            }
        }

        let columns = names
            .into_iter()
            .zip(cells)
            .map(|(name, raw)| {
                let parsed: Option<Vec<f64>> = raw.iter().map(|s| s.parse::<f64>().ok()).collect();
                match parsed {
                    Some(values) => Column::numeric(name, values),
                    None => Column::categorical(name, raw),
                }
            })
            .collect();
        Self::new(columns)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        Self::from_csv_reader(text.as_bytes())
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Csv(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    /// Writes the dataset in the format [`from_csv_reader`](Self::from_csv_reader)
    /// reads. Numbers use the shortest representation that round-trips.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in 0..self.n {
            let record: Vec<String> = self
                .columns
                .iter()
                .map(|c| match &c.data {
                    ColumnData::Numeric(v) => v[row].to_string(),
                    ColumnData::Categorical(v) => v[row].clone(),
                })
                .collect();
            wtr.write_record(&record)?;
        }
        wtr.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Csv(e.to_string()))
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_owned()))
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        match &self.column(name)?.data {
            ColumnData::Numeric(v) => Ok(v),
            ColumnData::Categorical(_) => Err(Error::InvalidParameter(format!("column '{name}' is categorical"))),
        }
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                data: match &c.data {
                    ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&i| v[i]).collect()),
                    ColumnData::Categorical(v) => ColumnData::Categorical(rows.iter().map(|&i| v[i].clone()).collect()),
                },
            })
            .collect();
        Self {
            columns,
            n: rows.len(),
        }
    }
}
