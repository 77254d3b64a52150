//! Text output shared by the commands.

use std::io::Write;

/// Scientific notation with 17 significant digits, independent of locale.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// CSV writer with a fixed header.
pub struct Table<W: Write> {
    inner: csv::Writer<W>,
    width: usize,
}

impl<W: Write> Table<W> {
    pub fn new(out: W, header: &[&str]) -> csv::Result<Table<W>> {
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        inner.write_record(header)?;
        Ok(Table { inner, width: header.len() })
    }

    pub fn row(&mut self, cells: &[String]) -> csv::Result<()> {
        debug_assert_eq!(cells.len(), self.width);
        self.inner.write_record(cells)
    }

    pub fn finish(mut self) -> csv::Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}
