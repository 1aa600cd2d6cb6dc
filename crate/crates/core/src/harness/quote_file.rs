//! Quote files.
//!
//! Text form: `#` comments, a header of `key = value` lines (`spot`,
//! `rate`, `dividend`), an optional `maturity,strike,kind,price` column
//! line, then one record per line:
//!
//! ```text
//! spot = 1
//! rate = 0.02
//! maturity,strike,kind,price
//! 0.119047619047619,0.9371,call,0.0731
//! ```
//!
//! A JSON object `{"context": {...}, "quotes": [...]}` with the same
//! fields is accepted interchangeably.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::heston::MarketContext;
use crate::swift::{OptionKind, OptionQuote};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteFile {
    pub context: MarketContext,
    pub quotes: Vec<OptionQuote>,
}

fn parse_error(line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Parse {
        file: "<input>".into(),
        line,
        message: message.into(),
    }
}

fn number(field: &str, what: &str, line: usize) -> Result<f64, HarnessError> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_error(line, format!("{what}: cannot parse '{}'", field.trim())))
}

impl QuoteFile {
    pub fn new(context: MarketContext, quotes: Vec<OptionQuote>) -> Result<Self, HarnessError> {
        let file = Self { context, quotes };
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let c = self.context;
        MarketContext::new(c.spot, c.rate, c.dividend)
            .map_err(|e| HarnessError::Input(e.to_string()))?;
        let mut seen = HashSet::new();
        for (i, q) in self.quotes.iter().enumerate() {
            q.validate()
                .map_err(|e| HarnessError::Input(format!("quote {}: {e}", i + 1)))?;
            if !seen.insert((q.strike.to_bits(), q.maturity.to_bits(), q.kind)) {
                return Err(HarnessError::Input(format!(
                    "duplicate quote {} K={} tau={}",
                    q.kind, q.strike, q.maturity
                )));
            }
        }
        Ok(())
    }

    /// Parses either representation.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        if text.trim_start().starts_with('{') {
            let file: Self =
                serde_json::from_str(text).map_err(|e| parse_error(e.line(), e.to_string()))?;
            file.validate()?;
            return Ok(file);
        }
        Self::parse_text(text)
    }

    fn parse_text(text: &str) -> Result<Self, HarnessError> {
        let (mut spot, mut rate, mut dividend) = (None, 0.0, 0.0);
        let mut quotes = Vec::new();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                if !quotes.is_empty() {
                    return Err(parse_error(line_no, "header line after the first quote"));
                }
                let v = number(value, key.trim(), line_no)?;
                match key.trim().to_ascii_lowercase().as_str() {
                    "spot" => spot = Some(v),
                    "rate" => rate = v,
                    "dividend" => dividend = v,
                    other => {
                        return Err(parse_error(
                            line_no,
                            format!("unknown header key '{other}'"),
                        ))
                    }
                }
                continue;
            }
            if line.to_ascii_lowercase().starts_with("maturity") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if !(3..=4).contains(&fields.len()) {
                return Err(parse_error(
                    line_no,
                    format!(
                        "expected maturity,strike,kind[,price], found {} fields",
                        fields.len()
                    ),
                ));
            }
            let maturity = number(fields[0], "maturity", line_no)?;
            let strike = number(fields[1], "strike", line_no)?;
            let kind: OptionKind = fields[2]
                .parse()
                .map_err(|e: String| parse_error(line_no, e))?;
            let price = match fields.get(3).map(|f| f.trim()) {
                Some("") | None => None,
                Some(p) => Some(number(p, "price", line_no)?),
            };
            let quote = OptionQuote {
                strike,
                maturity,
                price,
                kind,
            };
            quote
                .validate()
                .map_err(|e| parse_error(line_no, e.to_string()))?;
            if !seen.insert((strike.to_bits(), maturity.to_bits(), kind)) {
                return Err(parse_error(
                    line_no,
                    format!("duplicate quote {kind} K={strike} tau={maturity}"),
                ));
            }
            quotes.push(quote);
        }
        let spot = spot.ok_or_else(|| parse_error(0, "missing 'spot = ...' header"))?;
        let context =
            MarketContext::new(spot, rate, dividend).map_err(|e| parse_error(0, e.to_string()))?;
        Ok(Self { context, quotes })
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| e.in_file(path))
    }

    /// Text form; numbers use the shortest representation that parses back
    /// to the same value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.context;
        let _ = writeln!(
            out,
            "spot = {}\nrate = {}\ndividend = {}",
            c.spot, c.rate, c.dividend
        );
        let with_prices = self.quotes.iter().any(|q| q.price.is_some());
        out.push_str(if with_prices {
            "maturity,strike,kind,price\n"
        } else {
            "maturity,strike,kind\n"
        });
        for q in &self.quotes {
            let _ = write!(out, "{},{},{}", q.maturity, q.strike, q.kind);
            if let Some(p) = q.price {
                let _ = write!(out, ",{p}");
            } else if with_prices {
                out.push(',');
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("quote file serialises")
    }

    /// Writes JSON when the extension is `.json`, text otherwise.
    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let body = if path.extension().is_some_and(|e| e == "json") {
            self.to_json()
        } else {
            self.to_text()
        };
        std::fs::write(path, body)
            .map_err(|e| HarnessError::Input(format!("cannot write {}: {e}", path.display())))
    }

    /// Distinct maturities in order of first appearance, each with the
    /// positions of its quotes.
    pub fn maturity_groups(&self) -> Vec<(f64, Vec<usize>)> {
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for (i, q) in self.quotes.iter().enumerate() {
            match groups.iter_mut().find(|(t, _)| *t == q.maturity) {
                Some((_, idx)) => idx.push(i),
                None => groups.push((q.maturity, vec![i])),
            }
        }
        groups
    }
}
