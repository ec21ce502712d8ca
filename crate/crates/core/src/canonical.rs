//! Canonical text forms shared by the file formats.
//!
//! Every float written to disk uses a fixed 17-significant-digit scientific
//! representation, and every JSON document is written with keys in sorted
//! order and no insignificant whitespace. Re-serialising a parsed document
//! therefore reproduces it byte for byte.

use std::fmt::Write as _;

/// Render a float with 17 significant digits; round-trips any finite `f64`.
pub fn float_repr(x: f64) -> String {
    format!("{x:.16e}")
}

/// Minimal JSON writer producing canonical output.
///
/// Objects must be emitted with their keys already in sorted order; the
/// writer only handles layout (no whitespace, `,` and `:` separators).
#[derive(Debug, Default)]
pub struct JsonWriter {
    buf: String,
    needs_comma: Vec<bool>,
}

impl JsonWriter {
    /// Fresh writer.
    pub fn new() -> Self {
        Self::default()
    }

    fn separate(&mut self) {
        if let Some(last) = self.needs_comma.last_mut() {
            if *last {
                self.buf.push(',');
            }
            *last = true;
        }
    }

    /// Begin an object value.
    pub fn begin_object(&mut self) -> &mut Self {
        self.separate();
        self.buf.push('{');
        self.needs_comma.push(false);
        self
    }

    /// End the current object.
    pub fn end_object(&mut self) -> &mut Self {
        self.needs_comma.pop();
        self.buf.push('}');
        self
    }

    /// Begin an array value.
    pub fn begin_array(&mut self) -> &mut Self {
        self.separate();
        self.buf.push('[');
        self.needs_comma.push(false);
        self
    }

    /// End the current array.
    pub fn end_array(&mut self) -> &mut Self {
        self.needs_comma.pop();
        self.buf.push(']');
        self
    }

    /// Emit an object key; the next emitted value belongs to it.
    pub fn key(&mut self, k: &str) -> &mut Self {
        self.separate();
        let _ = write!(self.buf, "\"{k}\":");
        // The value following a key must not be preceded by a comma.
        if let Some(last) = self.needs_comma.last_mut() {
            *last = false;
        }
        self
    }

    /// Emit a string value (keys and values here never need escaping).
    pub fn string(&mut self, s: &str) -> &mut Self {
        self.separate();
        let _ = write!(self.buf, "\"{s}\"");
        self
    }

    /// Emit an unsigned integer value.
    pub fn uint(&mut self, v: u64) -> &mut Self {
        self.separate();
        let _ = write!(self.buf, "{v}");
        self
    }

    /// Emit a float value in the canonical 17-digit form.
    pub fn float(&mut self, v: f64) -> &mut Self {
        self.separate();
        self.buf.push_str(&float_repr(v));
        self
    }

    /// Finish and take the document.
    pub fn finish(self) -> String {
        self.buf
    }
}
