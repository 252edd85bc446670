//! Symbols `f: ℂ → ℂ` and their textual form.
//!
//! Grammar (whitespace allowed between tokens):
//!
//! ```text
//! expr    := "xia" | "poly(" clist ")" | "conj(" expr ")"
//!          | "radial(nu=" int ", g=" gtag ")" | "indicator(" real ")"
//! gtag    := "invr_outside(" real ")" | "power(" real ")" | "indicator(" real ")"
//! clist   := complex ("," complex)*
//! complex := real | real "+" real "i" | real "-" real "i"
//! ```
//!
//! `xia` is `1/z` on `|z| >= 1` and `0` inside the unit disk.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unsupported symbol: {0}")]
    Unsupported(String),
}

/// Radial factor `g(ρ)` of a single-frequency symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialProfile {
    /// `1/ρ` for `ρ >= cut`, else 0.
    InvROutside { cut: f64 },
    /// `ρ^p`, `p >= 0`.
    Power { exponent: f64 },
    /// 1 for `ρ < cut`, else 0.
    Indicator { cut: f64 },
}

impl RadialProfile {
    pub fn eval(&self, rho: f64) -> f64 {
        match *self {
            RadialProfile::InvROutside { cut } => {
                if rho >= cut {
                    1.0 / rho
                } else {
                    0.0
                }
            }
            RadialProfile::Power { exponent } => {
                if exponent == 0.0 {
                    1.0
                } else {
                    rho.powf(exponent)
                }
            }
            RadialProfile::Indicator { cut } => {
                if rho < cut {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `g(ρ) ρ^{-shift}`, with the powers merged before evaluation.
    pub fn eval_shifted(&self, rho: f64, shift: i32) -> f64 {
        let power = |e: f64| if e == 0.0 { 1.0 } else { rho.powf(e) };
        let s = shift as f64;
        match *self {
            RadialProfile::InvROutside { cut } => {
                if rho >= cut {
                    power(-1.0 - s)
                } else {
                    0.0
                }
            }
            RadialProfile::Power { exponent } => power(exponent - s),
            RadialProfile::Indicator { cut } => {
                if rho < cut {
                    power(-s)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn break_radii(&self) -> Vec<f64> {
        match *self {
            RadialProfile::InvROutside { cut } | RadialProfile::Indicator { cut } => vec![cut],
            RadialProfile::Power { .. } => Vec::new(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        match *self {
            RadialProfile::Power { exponent } => exponent == 0.0,
            _ => true,
        }
    }

    /// Polynomial growth rate at infinity.
    pub fn growth(&self) -> f64 {
        match *self {
            RadialProfile::Power { exponent } => exponent,
            _ => 0.0,
        }
    }
}

impl fmt::Display for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialProfile::InvROutside { cut } => write!(f, "invr_outside({cut})"),
            RadialProfile::Power { exponent } => write!(f, "power({exponent})"),
            RadialProfile::Indicator { cut } => write!(f, "indicator({cut})"),
        }
    }
}

pub type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub struct GeneralSymbol {
    pub label: String,
    pub func: ComplexFn,
}

impl fmt::Debug for GeneralSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GeneralSymbol({:?})", self.label)
    }
}

#[derive(Debug, Clone)]
pub enum SymbolKind {
    /// `e^{iνθ} g(ρ)`.
    SingleFrequency {
        nu: i32,
        profile: RadialProfile,
    },
    /// `Σ a_j z^j`.
    Polynomial(Vec<Complex64>),
    Conjugate(Box<Symbol>),
    General(GeneralSymbol),
}

#[derive(Debug, Clone)]
pub struct Symbol {
    kind: SymbolKind,
    break_radii: Vec<f64>,
    bounded: bool,
}

/// `f(ρe^{iθ}) = coeff · e^{iνθ} · g(ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyView {
    pub nu: i32,
    pub coeff: Complex64,
    pub profile: RadialProfile,
}

impl FrequencyView {
    pub fn radial(&self, rho: f64) -> Complex64 {
        self.coeff * self.profile.eval(rho)
    }

    /// `g(ρ) / ρ^ν`.
    pub fn radial_over_frequency(&self, rho: f64) -> Complex64 {
        self.coeff * self.profile.eval_shifted(rho, self.nu)
    }
}

impl Symbol {
    /// `1/z` for `|z| >= 1`, 0 otherwise.
    pub fn xia() -> Self {
        Self::radial(-1, RadialProfile::InvROutside { cut: 1.0 })
    }

    pub fn radial(nu: i32, profile: RadialProfile) -> Self {
        Self {
            kind: SymbolKind::SingleFrequency { nu, profile },
            break_radii: profile.break_radii(),
            bounded: profile.is_bounded(),
        }
    }

    pub fn polynomial(coeffs: Vec<Complex64>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        let bounded = coeffs.len() <= 1;
        Self {
            kind: SymbolKind::Polynomial(coeffs),
            break_radii: Vec::new(),
            bounded,
        }
    }

    /// Arbitrary callable symbol; `break_radii` are origin-centred circles of
    /// non-smoothness.
    pub fn general(
        label: impl Into<String>,
        func: ComplexFn,
        break_radii: Vec<f64>,
        bounded: bool,
    ) -> Self {
        Self {
            kind: SymbolKind::General(GeneralSymbol {
                label: label.into(),
                func,
            }),
            break_radii,
            bounded,
        }
    }

    pub fn constant(value: Complex64) -> Self {
        Self::polynomial(vec![value])
    }

    pub fn conj(&self) -> Self {
        match &self.kind {
            SymbolKind::SingleFrequency { nu, profile } => Self::radial(-nu, *profile),
            SymbolKind::Conjugate(inner) => (**inner).clone(),
            _ => Self {
                kind: SymbolKind::Conjugate(Box::new(self.clone())),
                break_radii: self.break_radii.clone(),
                bounded: self.bounded,
            },
        }
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    pub fn break_radii(&self) -> &[f64] {
        &self.break_radii
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    /// Is this an analytic polynomial (so `H_f = 0`)?
    pub fn is_analytic_polynomial(&self) -> bool {
        matches!(self.kind, SymbolKind::Polynomial(_))
    }

    pub fn polynomial_coeffs(&self) -> Option<&[Complex64]> {
        match &self.kind {
            SymbolKind::Polynomial(c) => Some(c),
            _ => None,
        }
    }

    /// Polynomial growth degree at infinity (0 for bounded symbols).
    pub fn growth_degree(&self) -> usize {
        match &self.kind {
            SymbolKind::SingleFrequency { profile, .. } => profile.growth().ceil() as usize,
            SymbolKind::Polynomial(c) => c.len() - 1,
            SymbolKind::Conjugate(inner) => inner.growth_degree(),
            SymbolKind::General(_) => 0,
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            SymbolKind::SingleFrequency { nu, profile } => {
                let rho = z.norm();
                let g = profile.eval(rho);
                if g == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::new(g, 0.0) * angular_factor(z, rho, *nu)
            }
            SymbolKind::Polynomial(c) => c
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a),
            SymbolKind::Conjugate(inner) => inner.eval(z).conj(),
            SymbolKind::General(g) => (g.func)(z),
        }
    }

    /// Single-frequency structure, if any.
    pub fn frequency_view(&self) -> Option<FrequencyView> {
        match &self.kind {
            SymbolKind::SingleFrequency { nu, profile } => Some(FrequencyView {
                nu: *nu,
                coeff: Complex64::new(1.0, 0.0),
                profile: *profile,
            }),
            SymbolKind::Polynomial(c) => {
                let mut terms = c
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| **a != Complex64::new(0.0, 0.0));
                let (j, a) = terms.next()?;
                if terms.next().is_some() {
                    return None;
                }
                Some(FrequencyView {
                    nu: j as i32,
                    coeff: *a,
                    profile: RadialProfile::Power { exponent: j as f64 },
                })
            }
            SymbolKind::Conjugate(inner) => inner.frequency_view().map(|v| FrequencyView {
                nu: -v.nu,
                coeff: v.coeff.conj(),
                profile: v.profile,
            }),
            SymbolKind::General(_) => None,
        }
    }

    pub fn frequency_of(&self) -> Option<i32> {
        self.frequency_view().map(|v| v.nu)
    }

    pub fn parse(text: &str) -> Result<Self, SymbolError> {
        let mut p = Parser { src: text, pos: 0 };
        let s = p.expr()?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(p.error("trailing input"));
        }
        Ok(s)
    }
}

/// `(z/|z|)^ν`, taken as 1 at the origin.
fn angular_factor(z: Complex64, rho: f64, nu: i32) -> Complex64 {
    if nu == 0 || rho == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let unit = z / rho;
    if nu > 0 {
        unit.powi(nu)
    } else {
        unit.conj().powi(-nu)
    }
}

impl FromStr for Symbol {
    type Err = SymbolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Symbol::parse(s)
    }
}

fn fmt_complex(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.im > 0.0 {
        write!(f, "{}+{}i", c.re, c.im)
    } else {
        write!(f, "{}-{}i", c.re, -c.im)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SymbolKind::SingleFrequency { nu, profile } => {
                let xia_profile = RadialProfile::InvROutside { cut: 1.0 };
                match (*nu, *profile) {
                    (-1, p) if p == xia_profile => write!(f, "xia"),
                    (1, p) if p == xia_profile => write!(f, "conj(xia)"),
                    (0, RadialProfile::Indicator { cut }) => write!(f, "indicator({cut})"),
                    (nu, p) => write!(f, "radial(nu={nu}, g={p})"),
                }
            }
            SymbolKind::Polynomial(c) => {
                write!(f, "poly(")?;
                for (i, a) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    fmt_complex(f, *a)?;
                }
                write!(f, ")")
            }
            SymbolKind::Conjugate(inner) => write!(f, "conj({inner})"),
            SymbolKind::General(g) => write!(f, "<general:{}>", g.label),
        }
    }
}

/// Structural equality; general symbols compare by label.
impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        let kinds = match (&self.kind, &other.kind) {
            (
                SymbolKind::SingleFrequency { nu: a, profile: p },
                SymbolKind::SingleFrequency { nu: b, profile: q },
            ) => a == b && p == q,
            (SymbolKind::Polynomial(a), SymbolKind::Polynomial(b)) => a == b,
            (SymbolKind::Conjugate(a), SymbolKind::Conjugate(b)) => a == b,
            (SymbolKind::General(a), SymbolKind::General(b)) => a.label == b.label,
            _ => false,
        };
        kinds && self.break_radii == other.break_radii && self.bounded == other.bounded
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> SymbolError {
        SymbolError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), SymbolError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.rest().len());
        let id = self.rest()[..len].to_string();
        self.pos += len;
        id
    }

    fn expr(&mut self) -> Result<Symbol, SymbolError> {
        let start = self.pos;
        let id = self.ident();
        match id.as_str() {
            "xia" => Ok(Symbol::xia()),
            "poly" => {
                self.expect("(")?;
                let mut coeffs = vec![self.complex()?];
                while self.eat(",") {
                    coeffs.push(self.complex()?);
                }
                self.expect(")")?;
                Ok(Symbol::polynomial(coeffs))
            }
            "conj" => {
                self.expect("(")?;
                let inner = self.expr()?;
                self.expect(")")?;
                Ok(inner.conj())
            }
            "radial" => {
                self.expect("(")?;
                self.expect("nu")?;
                self.expect("=")?;
                let nu = self.integer()?;
                self.expect(",")?;
                self.expect("g")?;
                self.expect("=")?;
                let profile = self.gtag()?;
                self.expect(")")?;
                Ok(Symbol::radial(nu, profile))
            }
            "indicator" => {
                self.expect("(")?;
                let cut = self.positive_real()?;
                self.expect(")")?;
                Ok(Symbol::radial(0, RadialProfile::Indicator { cut }))
            }
            "" => Err(self.error("expected a symbol expression")),
            other => {
                self.pos = start;
                self.skip_ws();
                Err(self.error(format!("unknown symbol `{other}`")))
            }
        }
    }

    fn gtag(&mut self) -> Result<RadialProfile, SymbolError> {
        let id = self.ident();
        self.expect("(")?;
        let profile = match id.as_str() {
            "invr_outside" => RadialProfile::InvROutside {
                cut: self.positive_real()?,
            },
            "indicator" => RadialProfile::Indicator {
                cut: self.positive_real()?,
            },
            "power" => {
                let exponent = self.real()?;
                if exponent < 0.0 {
                    return Err(SymbolError::Unsupported(format!(
                        "power({exponent}) is not finite at the origin"
                    )));
                }
                RadialProfile::Power { exponent }
            }
            other => {
                return Err(SymbolError::Unsupported(format!(
                    "radial profile `{other}`"
                )))
            }
        };
        self.expect(")")?;
        Ok(profile)
    }

    fn number_span(&mut self) -> Result<&str, SymbolError> {
        self.skip_ws();
        let bytes = self.rest().as_bytes();
        let mut i = 0;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        let digits_start = i;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i == digits_start {
            return Err(self.error("expected a number"));
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            let exp_start = j;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > exp_start {
                i = j;
            }
        }
        let start = self.pos;
        self.pos += i;
        Ok(&self.src[start..start + i])
    }

    fn real(&mut self) -> Result<f64, SymbolError> {
        let start = self.pos;
        let span = self.number_span()?.to_string();
        match span.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                Err(self.error(format!("invalid number `{span}`")))
            }
        }
    }

    fn positive_real(&mut self) -> Result<f64, SymbolError> {
        let start = self.pos;
        let v = self.real()?;
        if v > 0.0 {
            Ok(v)
        } else {
            self.pos = start;
            Err(self.error("expected a positive number"))
        }
    }

    fn integer(&mut self) -> Result<i32, SymbolError> {
        let start = self.pos;
        let span = self.number_span()?.to_string();
        span.parse::<i32>().map_err(|_| {
            self.pos = start;
            self.error(format!("invalid integer `{span}`"))
        })
    }

    fn complex(&mut self) -> Result<Complex64, SymbolError> {
        let re = self.real()?;
        let save = self.pos;
        let sign = if self.rest().starts_with('+') {
            1.0
        } else if self.rest().starts_with('-') {
            -1.0
        } else {
            return Ok(Complex64::new(re, 0.0));
        };
        self.pos += 1;
        let bytes = self.rest().as_bytes();
        if bytes
            .first()
            .is_none_or(|b| !(b.is_ascii_digit() || *b == b'.'))
        {
            self.pos = save;
            return Err(self.error("expected imaginary part"));
        }
        let im = self.real()?;
        if !self.rest().starts_with('i') {
            return Err(self.error("expected `i` after imaginary part"));
        }
        self.pos += 1;
        Ok(Complex64::new(re, sign * im))
    }
}
