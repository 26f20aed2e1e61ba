//! Evaluation of one state and its text, CSV and JSON renderings.

use gaussian_eof::closed_form::eof_of_standard_form;
use gaussian_eof::symplectic::{reduce_to_standard_form, validate_cm};
use gaussian_eof::{CovarianceMatrix, Error, StandardFormParams};
use serde::Serialize;

pub const CSV_HEADER: &str = "n,m,kx,kp,valid,symmetric,separable,delta,r_delta,eof_bits";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Invalid,
    Asymmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    /// Standard form, when known: the input triple, or the reduction of a
    /// valid matrix.
    pub standard_form: Option<StandardFormParams>,
    pub valid: bool,
    pub symmetric: Option<bool>,
    pub separable: Option<bool>,
    pub delta: Option<f64>,
    pub r_delta: Option<f64>,
    pub eof_bits: Option<f64>,
    pub min_eigenvalue: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Evaluation {
    pub fn status(&self) -> Status {
        match (self.valid, self.symmetric) {
            (false, _) => Status::Invalid,
            (true, Some(false)) => Status::Asymmetric,
            _ => Status::Ok,
        }
    }
}

pub fn evaluate_params(params: &StandardFormParams, tol: f64) -> Evaluation {
    let cm = match params.to_cm() {
        Ok(cm) => cm,
        Err(e) => return invalid(Some(*params), f64::NAN, e.to_string()),
    };
    finish(*params, &cm, tol)
}

pub fn evaluate_cm(cm: &CovarianceMatrix, tol: f64) -> Evaluation {
    let validity = validate_cm(cm, tol);
    if !validity.valid {
        return invalid(
            None,
            validity.min_eigenvalue,
            Error::InvalidCovariance {
                min_eigenvalue: validity.min_eigenvalue,
                symmetric: validity.symmetric,
            }
            .to_string(),
        );
    }
    match reduce_to_standard_form(cm, tol) {
        Ok(params) => finish(params, cm, tol),
        Err(e) => invalid(None, validity.min_eigenvalue, e.to_string()),
    }
}

fn finish(params: StandardFormParams, cm: &CovarianceMatrix, tol: f64) -> Evaluation {
    let validity = validate_cm(cm, tol);
    if !validity.valid {
        return invalid(
            Some(params),
            validity.min_eigenvalue,
            format!(
                "not a covariance matrix: min eigenvalue of gamma + i*omega is {:.3e}",
                validity.min_eigenvalue
            ),
        );
    }
    match eof_of_standard_form(&params, tol) {
        Ok(rep) => Evaluation {
            standard_form: Some(params),
            valid: true,
            symmetric: Some(true),
            separable: Some(rep.separable),
            delta: Some(rep.delta.value()),
            r_delta: Some(rep.r_delta),
            eof_bits: Some(rep.eof_bits),
            min_eigenvalue: validity.min_eigenvalue,
            message: None,
        },
        Err(e @ Error::Asymmetric { .. }) => Evaluation {
            standard_form: Some(params),
            valid: true,
            symmetric: Some(false),
            separable: None,
            delta: None,
            r_delta: None,
            eof_bits: None,
            min_eigenvalue: validity.min_eigenvalue,
            message: Some(e.to_string()),
        },
        Err(e) => invalid(Some(params), validity.min_eigenvalue, e.to_string()),
    }
}

fn invalid(params: Option<StandardFormParams>, min_eigenvalue: f64, message: String) -> Evaluation {
    Evaluation {
        standard_form: params,
        valid: false,
        symmetric: params.map(|p| p.is_symmetric(gaussian_eof::DEFAULT_TOL)),
        separable: None,
        delta: None,
        r_delta: None,
        eof_bits: None,
        min_eigenvalue,
        message: Some(message),
    }
}

/// `%.{digits}g`-style formatting: shortest of fixed and scientific
/// notation at `digits` significant digits, trailing zeros removed,
/// independent of locale.
pub fn format_number(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_num(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format_number(x, digits)).unwrap_or_default()
}

fn opt_bool(v: Option<bool>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

pub fn csv_row(e: &Evaluation, digits: usize) -> String {
    let p = e.standard_form;
    [
        opt_num(p.map(|p| p.n), digits),
        opt_num(p.map(|p| p.m), digits),
        opt_num(p.map(|p| p.k_x), digits),
        opt_num(p.map(|p| p.k_p), digits),
        e.valid.to_string(),
        opt_bool(e.symmetric),
        opt_bool(e.separable),
        opt_num(e.delta, digits),
        opt_num(e.r_delta, digits),
        opt_num(e.eof_bits, digits),
    ]
    .join(",")
}

pub fn text_report(e: &Evaluation, digits: usize) -> String {
    let p = e.standard_form;
    let mut lines = vec![
        format!("valid: {}", e.valid),
        format!("symmetric: {}", opt_bool(e.symmetric)),
        format!("separable: {}", opt_bool(e.separable)),
        format!("n: {}", opt_num(p.map(|p| p.n), digits)),
        format!("m: {}", opt_num(p.map(|p| p.m), digits)),
        format!("kx: {}", opt_num(p.map(|p| p.k_x), digits)),
        format!("kp: {}", opt_num(p.map(|p| p.k_p), digits)),
        format!("delta: {}", opt_num(e.delta, digits)),
        format!("r_delta: {}", opt_num(e.r_delta, digits)),
        format!("eof_bits: {}", opt_num(e.eof_bits, digits)),
    ];
    if let Some(m) = &e.message {
        lines.push(format!("note: {m}"));
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}
