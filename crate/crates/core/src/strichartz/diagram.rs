use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nonnegative rational in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let d = gcd(num, den).max(1);
        Self { num: num / d, den: den / d }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn div(self, other: Ratio) -> Ratio {
        Ratio::new(self.num * other.den, self.den * other.num)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl std::str::FromStr for Ratio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("not a rational: {s}"));
        let (n, d) = s.split_once('/').unwrap_or((s, "1"));
        let num = n.trim().parse().map_err(|_| bad())?;
        let den: u64 = d.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        Ok(Ratio::new(num, den))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagramKind {
    /// Fixed time scale, `1/(2p)` derivative loss.
    Fig1a,
    /// Fixed time scale, `1/p` derivative loss.
    Fig1,
    /// Semiclassical time scale, `1/(2p)` derivative loss.
    Fig3,
}

impl DiagramKind {
    pub const ALL: [DiagramKind; 3] = [DiagramKind::Fig1a, DiagramKind::Fig1, DiagramKind::Fig3];

    pub fn name(self) -> &'static str {
        match self {
            DiagramKind::Fig1a => "fig1a",
            DiagramKind::Fig1 => "fig1",
            DiagramKind::Fig3 => "fig3",
        }
    }
}

impl std::str::FromStr for DiagramKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DiagramKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown diagram kind `{s}` (expected fig1a, fig1 or fig3)")))
    }
}

/// The line `a/p + b/q = c` in the `(1/p, 1/q)` plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramLine {
    pub label: String,
    pub a: Ratio,
    pub b: Ratio,
    pub c: Ratio,
}

impl DiagramLine {
    fn new(label: &str, a: Ratio, b: Ratio, c: Ratio) -> Self {
        Self { label: label.into(), a, b, c }
    }

    /// `1/p` where the line meets `1/q = 0`.
    pub fn p_intercept(&self) -> Ratio {
        self.c.div(self.a)
    }

    /// `1/q` where the line meets `1/p = 0`.
    pub fn q_intercept(&self) -> Ratio {
        self.c.div(self.b)
    }

    /// `a/p + b/q − c`.
    pub fn defect(&self, inv_p: f64, inv_q: f64) -> f64 {
        self.a.value() * inv_p + self.b.value() * inv_q - self.c.value()
    }

    pub fn relation(&self) -> String {
        let term = |r: Ratio, v: &str| if r == Ratio::new(1, 1) { format!("1/{v}") } else { format!("({r})/{v}") };
        format!("{} + {} = {}", term(self.a, "p"), term(self.b, "q"), self.c)
    }
}

/// Line data of the admissibility diagrams.
pub fn admissibility_diagram(kind: DiagramKind) -> Vec<DiagramLine> {
    let r = Ratio::new;
    let half = r(1, 2);
    let one = r(1, 1);
    match kind {
        DiagramKind::Fig1a => vec![
            DiagramLine::new("scaling", r(2, 1), one, half),
            DiagramLine::new("sobolev plus local smoothing", r(2, 1), one, one),
            DiagramLine::new("holder plus energy", half, one, half),
        ],
        DiagramKind::Fig1 => vec![
            DiagramLine::new("fixed-time strichartz", r(2, 1), one, half),
            DiagramLine::new("scaling plus sobolev", r(5, 2), one, half),
            DiagramLine::new("sobolev plus local smoothing", r(5, 2), one, one),
            DiagramLine::new("holder plus energy", one, one, half),
        ],
        DiagramKind::Fig3 => vec![
            DiagramLine::new("semiclassical strichartz and scaling", r(2, 1), one, half),
            DiagramLine::new("sobolev plus local smoothing", r(2, 1), one, one),
            DiagramLine::new("holder plus energy", half, one, half),
        ],
    }
}
