//! Text formats for problems `D + U·V*` and for Hessenberg forms, and the
//! seeded random problem generator.
//!
//! Numbers are written in Rust's shortest round-trip decimal form, so a file
//! parses back to bit-identical values. Complex entries are written `re,im`.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, C64};
use crate::reduction::HessenbergForm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt::Write;

pub const PROBLEM_HEADER: &str = "QSHESS 1";
pub const HESSENBERG_HEADER: &str = "QSHESS-HESSENBERG 1";

/// `A = diag(d) + U·V*`.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub d: Vec<f64>,
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    /// Whether the factors are written with imaginary parts.
    pub complex: bool,
}

impl Problem {
    pub fn new(d: Vec<f64>, u: DenseMatrix, v: DenseMatrix, complex: bool) -> Result<Self> {
        let n = d.len();
        if u.rows() != n || v.rows() != n || u.cols() != v.cols() {
            return Err(Error::Dimension(format!(
                "problem with n = {n} and factors {}x{}, {}x{}",
                u.rows(),
                u.cols(),
                v.rows(),
                v.cols()
            )));
        }
        if !complex && u.data().iter().chain(v.data()).any(|z| z.im != 0.0) {
            return Err(Error::Invalid("real problem with complex factors".into()));
        }
        Ok(Self { d, u, v, complex })
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn k(&self) -> usize {
        self.u.cols()
    }

    pub fn dense(&self) -> DenseMatrix {
        DenseMatrix::diag(&self.d).add(&self.u.matmul(&self.v.adjoint()))
    }

    /// Standard normal `D`, `U`, `V` from a ChaCha8 stream seeded with `seed`.
    /// Draw order: `D`, then `U` and `V` row by row, real part before
    /// imaginary part.
    pub fn generate(n: usize, k: usize, seed: u64, complex: bool) -> Result<Self> {
        if k == 0 || n <= k {
            return Err(Error::Invalid(format!("need n > k >= 1, got n = {n}, k = {k}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let factor = |rng: &mut ChaCha8Rng| {
            DenseMatrix::from_fn(n, k, |_, _| {
                let re = rng.sample(StandardNormal);
                let im = if complex { rng.sample(StandardNormal) } else { 0.0 };
                C64::new(re, im)
            })
        };
        let u = factor(&mut rng);
        let v = factor(&mut rng);
        Self::new(d, u, v, complex)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{PROBLEM_HEADER}\n{} {} {}\n", self.n(), self.k(), if self.complex { "complex" } else { "real" });
        for x in &self.d {
            writeln!(out, "{x}").unwrap();
        }
        write_rows(&mut out, &self.u, self.complex);
        write_rows(&mut out, &self.v, self.complex);
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        lines.expect_header(PROBLEM_HEADER)?;
        let (line, fields) = lines.next_fields()?;
        if fields.len() != 3 {
            return Err(parse_err(line, "expected `n k real|complex`"));
        }
        let n = parse_usize(line, fields[0])?;
        let k = parse_usize(line, fields[1])?;
        let complex = match fields[2] {
            "real" => false,
            "complex" => true,
            other => return Err(parse_err(line, format!("unknown field kind `{other}`"))),
        };
        if k == 0 || n <= k {
            return Err(parse_err(line, format!("need n > k >= 1, got n = {n}, k = {k}")));
        }
        let mut d = Vec::with_capacity(n);
        for _ in 0..n {
            let (line, fields) = lines.next_fields()?;
            if fields.len() != 1 {
                return Err(parse_err(line, "expected one real number"));
            }
            d.push(parse_f64(line, fields[0])?);
        }
        let u = read_rows(&mut lines, n, k, complex)?;
        let v = read_rows(&mut lines, n, k, complex)?;
        lines.expect_end()?;
        Self::new(d, u, v, complex)
    }
}

pub fn write_hessenberg(hf: &HessenbergForm) -> String {
    let mut out = format!("{HESSENBERG_HEADER}\n{} {}\n", hf.n(), hf.k());
    for z in hf.d.iter().chain(&hf.s) {
        writeln!(out, "{}", fmt_c64(*z)).unwrap();
    }
    write_rows(&mut out, &hf.u_f, true);
    write_rows(&mut out, &hf.v_f, true);
    out
}

pub fn parse_hessenberg(text: &str) -> Result<HessenbergForm> {
    let mut lines = Lines::new(text);
    lines.expect_header(HESSENBERG_HEADER)?;
    let (line, fields) = lines.next_fields()?;
    if fields.len() != 2 {
        return Err(parse_err(line, "expected `n k`"));
    }
    let n = parse_usize(line, fields[0])?;
    let k = parse_usize(line, fields[1])?;
    if n == 0 {
        return Err(parse_err(line, "empty matrix"));
    }
    let mut scalars = |count: usize| -> Result<Vec<C64>> {
        (0..count)
            .map(|_| {
                let (line, fields) = lines.next_fields()?;
                if fields.len() != 1 {
                    return Err(parse_err(line, "expected one complex number"));
                }
                parse_c64(line, fields[0], true)
            })
            .collect()
    };
    let d = scalars(n)?;
    let s = scalars(n - 1)?;
    let u_f = read_rows(&mut lines, n, k, true)?;
    let v_f = read_rows(&mut lines, n, k, true)?;
    lines.expect_end()?;
    Ok(HessenbergForm { d, s, u_f, v_f, rotations: None })
}

fn fmt_c64(z: C64) -> String {
    format!("{},{}", z.re, z.im)
}

fn write_rows(out: &mut String, m: &DenseMatrix, complex: bool) {
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|z| if complex { fmt_c64(*z) } else { format!("{}", z.re) }).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
}

fn read_rows(lines: &mut Lines<'_>, n: usize, k: usize, complex: bool) -> Result<DenseMatrix> {
    let mut data = Vec::with_capacity(n * k);
    for _ in 0..n {
        let (line, fields) = lines.next_fields()?;
        if fields.len() != k {
            return Err(parse_err(line, format!("expected {k} entries, found {}", fields.len())));
        }
        for f in fields {
            data.push(parse_c64(line, f, complex)?);
        }
    }
    DenseMatrix::from_vec(n, k, data)
}

/// Non-blank lines with their 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> =
            Box::new(text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty()));
        Self { inner: it.peekable(), last: 0 }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i;
                Ok((i, l))
            }
            None => Err(parse_err(self.last + 1, "unexpected end of file")),
        }
    }

    fn next_fields(&mut self) -> Result<(usize, Vec<&'a str>)> {
        let (i, l) = self.next_line()?;
        Ok((i, l.split_whitespace().collect()))
    }

    fn expect_header(&mut self, header: &str) -> Result<()> {
        let (i, l) = self.next_line()?;
        if l != header {
            return Err(parse_err(i, format!("expected header `{header}`")));
        }
        Ok(())
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.inner.next() {
            Some((i, _)) => Err(parse_err(i, "trailing data")),
            None => Ok(()),
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_usize(line: usize, s: &str) -> Result<usize> {
    s.parse().map_err(|_| parse_err(line, format!("`{s}` is not a nonnegative integer")))
}

fn parse_f64(line: usize, s: &str) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(parse_err(line, format!("`{s}` is not a finite number"))),
    }
}

fn parse_c64(line: usize, s: &str, complex: bool) -> Result<C64> {
    match s.split_once(',') {
        Some((re, im)) if complex => Ok(C64::new(parse_f64(line, re)?, parse_f64(line, im)?)),
        Some(_) => Err(parse_err(line, format!("complex entry `{s}` in a real file"))),
        None => Ok(C64::new(parse_f64(line, s)?, 0.0)),
    }
}
