//! Exact decimal arithmetic for measures and aggregates.
//!
//! A value is a scaled i128 mantissa. Addition and comparison align scales
//! exactly; the only division is the final one of an average, performed at
//! a fixed extra precision. No floating point is involved, so both query
//! executors produce bit-identical aggregates from equal inputs.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("not a decimal number: {0}")]
pub struct DecimalParseError(pub &'static str);

/// Exact decimal: `mantissa * 10^-scale`, normalized to no trailing zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decimal {
    mantissa: i128,
    scale: u32,
}

fn pow10(exp: u32) -> i128 {
    10i128.checked_pow(exp).expect("decimal exponent out of range")
}

impl Decimal {
    pub fn new(mantissa: i128, scale: u32) -> Self {
        Decimal { mantissa, scale }.normalize()
    }

    pub fn from_u64(v: u64) -> Self {
        Decimal {
            mantissa: v as i128,
            scale: 0,
        }
    }

    pub fn from_i64(v: i64) -> Self {
        Decimal {
            mantissa: v as i128,
            scale: 0,
        }
    }

    fn normalize(mut self) -> Self {
        if self.mantissa == 0 {
            self.scale = 0;
            return self;
        }
        while self.scale > 0 && self.mantissa % 10 == 0 {
            self.mantissa /= 10;
            self.scale -= 1;
        }
        self
    }

    /// Parses a plain decimal: optional sign, digits, optional fraction.
    /// At most 30 significant digits.
    pub fn parse(s: &str) -> Result<Self, DecimalParseError> {
        let s = s.trim();
        let (neg, rest) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        if rest.is_empty() {
            return Err(DecimalParseError("empty input"));
        }
        let (int_part, frac_part) = match rest.split_once('.') {
            Some((i, f)) => (i, f),
            None => (rest, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(DecimalParseError("no digits"));
        }
        if int_part.len() + frac_part.len() > 30 {
            return Err(DecimalParseError("too many digits"));
        }
        let mut mantissa: i128 = 0;
        for b in int_part.bytes().chain(frac_part.bytes()) {
            if !b.is_ascii_digit() {
                return Err(DecimalParseError("unexpected character"));
            }
            mantissa = mantissa * 10 + i128::from(b - b'0');
        }
        if neg {
            mantissa = -mantissa;
        }
        Ok(Decimal {
            mantissa,
            scale: frac_part.len() as u32,
        }
        .normalize())
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    pub fn is_integer(&self) -> bool {
        self.scale == 0
    }

    pub fn abs(&self) -> Decimal {
        Decimal {
            mantissa: self.mantissa.abs(),
            scale: self.scale,
        }
    }

    pub fn checked_add(&self, other: &Decimal) -> Option<Decimal> {
        let scale = self.scale.max(other.scale);
        let a = self.mantissa.checked_mul(pow10(scale - self.scale))?;
        let b = other.mantissa.checked_mul(pow10(scale - other.scale))?;
        Some(Decimal { mantissa: a.checked_add(b)?, scale }.normalize())
    }

    pub fn add(&self, other: &Decimal) -> Decimal {
        self.checked_add(other).expect("decimal addition overflow")
    }

    pub fn sub(&self, other: &Decimal) -> Decimal {
        let negated = Decimal {
            mantissa: -other.mantissa,
            scale: other.scale,
        };
        self.add(&negated)
    }

    /// Divides by a positive integer count with `extra` additional fraction
    /// digits, rounding half away from zero. This is the single final
    /// division of an average.
    pub fn div_by_count(&self, count: u64, extra: u32) -> Decimal {
        assert!(count > 0, "division by zero count");
        let numerator = self
            .mantissa
            .checked_mul(pow10(extra))
            .expect("decimal division overflow");
        let divisor = count as i128;
        let quotient = numerator / divisor;
        let remainder = (numerator % divisor).abs();
        let round_up = remainder * 2 >= divisor;
        let rounded = if round_up {
            quotient + self.mantissa.signum()
        } else {
            quotient
        };
        Decimal {
            mantissa: rounded,
            scale: self.scale + extra,
        }
        .normalize()
    }

    /// Relative closeness: `|a - b| <= max(|a|, |b|) / 10^ppb_exp`.
    /// With `ppb_exp = 9` this is a 1e-9 relative tolerance, computed in
    /// exact integer arithmetic.
    pub fn within_relative(a: &Decimal, b: &Decimal, ppb_exp: u32) -> bool {
        if a == b {
            return true;
        }
        let diff = a.sub(b).abs();
        let bound = a.abs().max(b.abs());
        // diff * 10^ppb_exp <= bound
        let scaled = Decimal {
            mantissa: diff
                .mantissa
                .checked_mul(pow10(ppb_exp))
                .expect("tolerance overflow"),
            scale: diff.scale,
        };
        scaled <= bound
    }

    /// Approximate float view, for reporting only.
    pub fn to_f64(&self) -> f64 {
        let mut v = self.mantissa as f64;
        for _ in 0..self.scale {
            v /= 10.0;
        }
        v
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        let scale = self.scale.max(other.scale);
        let a = self
            .mantissa
            .checked_mul(pow10(scale - self.scale))
            .expect("decimal comparison overflow");
        let b = other
            .mantissa
            .checked_mul(pow10(scale - other.scale))
            .expect("decimal comparison overflow");
        a.cmp(&b)
    }
}

impl core::fmt::Display for Decimal {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.mantissa);
        }
        let sign = if self.mantissa < 0 { "-" } else { "" };
        let abs = self.mantissa.unsigned_abs();
        let divisor = pow10(self.scale) as u128;
        let int_part = abs / divisor;
        let frac_part = abs % divisor;
        write!(
            f,
            "{sign}{int_part}.{frac:0width$}",
            frac = frac_part,
            width = self.scale as usize
        )
    }
}

impl core::str::FromStr for Decimal {
    type Err = DecimalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Decimal::parse(s)
    }
}
