use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::heston::MarketContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    #[default]
    Call,
    Put,
}

impl std::str::FromStr for OptionKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "call" | "c" => Ok(OptionKind::Call),
            "put" | "p" => Ok(OptionKind::Put),
            other => Err(format!("unknown option kind '{other}'")),
        }
    }
}

impl std::fmt::Display for OptionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OptionKind::Call => "call",
            OptionKind::Put => "put",
        })
    }
}

/// A European option, optionally with an observed market price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionQuote {
    pub strike: f64,
    /// Time to expiry in years.
    pub maturity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price: Option<f64>,
    #[serde(default)]
    pub kind: OptionKind,
}

impl OptionQuote {
    pub fn call(strike: f64, maturity: f64) -> Self {
        Self {
            strike,
            maturity,
            price: None,
            kind: OptionKind::Call,
        }
    }

    pub fn put(strike: f64, maturity: f64) -> Self {
        Self {
            kind: OptionKind::Put,
            ..Self::call(strike, maturity)
        }
    }

    pub fn with_price(mut self, price: f64) -> Self {
        self.price = Some(price);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strike.is_finite() && self.strike > 0.0) {
            return Err(PricingError::InvalidInput(format!(
                "strike must be positive, got {}",
                self.strike
            )));
        }
        if !(self.maturity.is_finite() && self.maturity > 0.0) {
            return Err(PricingError::InvalidInput(format!(
                "maturity must be positive, got {}",
                self.maturity
            )));
        }
        // Model-generated prices of far out-of-the-money options can sit a
        // few ulps below zero, so only finiteness is required.
        if let Some(p) = self.price.filter(|p| !p.is_finite()) {
            return Err(PricingError::InvalidInput(format!(
                "observed price must be finite, got {p}"
            )));
        }
        Ok(())
    }
}

/// `S_0 e^{−qτ} − K e^{−rτ}`: call minus put on the same strike and maturity.
pub fn parity_gap(strike: f64, maturity: f64, ctx: &MarketContext) -> f64 {
    ctx.spot * (-ctx.dividend * maturity).exp() - strike * (-ctx.rate * maturity).exp()
}

/// Re-expresses a price of `from` as a price of `to` by put-call parity.
pub fn convert_by_parity(
    price: f64,
    from: OptionKind,
    to: OptionKind,
    strike: f64,
    maturity: f64,
    ctx: &MarketContext,
) -> f64 {
    match (from, to) {
        (OptionKind::Call, OptionKind::Put) => price - parity_gap(strike, maturity, ctx),
        (OptionKind::Put, OptionKind::Call) => price + parity_gap(strike, maturity, ctx),
        _ => price,
    }
}
