//! Truncated number-basis operators of a lossless LC oscillator and the
//! charge/flux commutators.

use num_complex::Complex64;

use crate::constants::HBAR;
use crate::error::{Error, Result};

pub const MIN_DIMENSION: usize = 4;
pub const MAX_DIMENSION: usize = 256;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    entries: Vec<Complex64>,
    label: String,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize, label: impl Into<String>) -> Self {
        OperatorMatrix {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
            label: label.into(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = OperatorMatrix::zeros(dim, "I");
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// max |M − M†| over entries.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        OperatorMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
            label: self.label.clone(),
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} is {}x{}, {} is {}x{}",
                self.label, self.dim, self.dim, other.label, other.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out = OperatorMatrix::zeros(n, format!("{}{}", self.label, other.label));
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(OperatorMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
            label: format!("{}-{}", self.label, other.label),
        })
    }

    /// [A, B] = AB − BA.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        Ok(ab.sub(&ba)?.with_label(format!("[{},{}]", self.label, other.label)))
    }
}

impl std::ops::Index<(usize, usize)> for OperatorMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for OperatorMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

/// Charge, flux and capacitor-voltage operators of one LC mode.
#[derive(Debug, Clone, PartialEq)]
pub struct LcOperators {
    pub q: OperatorMatrix,
    pub phi: OperatorMatrix,
    pub u: OperatorMatrix,
    pub inductance: f64,
    pub capacitance: f64,
}

impl LcOperators {
    pub fn omega(&self) -> f64 {
        1.0 / (self.inductance * self.capacitance).sqrt()
    }
}

/// Annihilation operator truncated to `dim` number states.
pub fn annihilation(dim: usize) -> OperatorMatrix {
    let mut a = OperatorMatrix::zeros(dim, "a");
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// q = √(ħ/2Lω)(a + a†), Φ = i√(ħLω/2)(a† − a), U = q/C with ω = 1/√(LC).
pub fn build_lc_operators(inductance: f64, capacitance: f64, dim: usize) -> Result<LcOperators> {
    if !(inductance > 0.0 && inductance.is_finite()) {
        return Err(Error::invalid("inductance", "must be positive and finite"));
    }
    if !(capacitance > 0.0 && capacitance.is_finite()) {
        return Err(Error::invalid("capacitance", "must be positive and finite"));
    }
    if !(MIN_DIMENSION..=MAX_DIMENSION).contains(&dim) {
        return Err(Error::Domain(format!(
            "dimension {dim} outside [{MIN_DIMENSION}, {MAX_DIMENSION}]"
        )));
    }
    let omega = 1.0 / (inductance * capacitance).sqrt();
    let q_scale = (HBAR / (2.0 * inductance * omega)).sqrt();
    let phi_scale = (HBAR * inductance * omega / 2.0).sqrt();
    let mut q = OperatorMatrix::zeros(dim, "q");
    let mut phi = OperatorMatrix::zeros(dim, "Φ");
    for n in 1..dim {
        let s = (n as f64).sqrt();
        q[(n - 1, n)] = Complex64::new(q_scale * s, 0.0);
        q[(n, n - 1)] = Complex64::new(q_scale * s, 0.0);
        // i(a† − a): +i below the diagonal, −i above
        phi[(n, n - 1)] = Complex64::new(0.0, phi_scale * s);
        phi[(n - 1, n)] = Complex64::new(0.0, -phi_scale * s);
    }
    let u = q.scaled(Complex64::new(1.0 / capacitance, 0.0)).with_label("U");
    Ok(LcOperators {
        q,
        phi,
        u,
        inductance,
        capacitance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorReport {
    pub dimension: usize,
    /// max |(1/iħ)[q,Φ] − I| over the leading (N−1)×(N−1) block.
    pub max_block_deviation: f64,
    /// max |(1/iħ)[q,Φ]| over entries outside the block and the corner.
    pub max_border_deviation: f64,
    /// (1/iħ)[q,Φ] at (N−1, N−1).
    pub corner: Complex64,
    /// 1 − N, what the truncation leaves in the corner.
    pub expected_corner: f64,
    /// max |C[U,Φ] − [q,Φ]|/ħ over all entries.
    pub max_voltage_deviation: f64,
}

/// Compares (1/iħ)[q,Φ] with I − N|N−1⟩⟨N−1| and C[U,Φ] with [q,Φ].
pub fn verify_commutators(
    q: &OperatorMatrix,
    phi: &OperatorMatrix,
    u: &OperatorMatrix,
    capacitance: f64,
) -> Result<CommutatorReport> {
    q.check_dim(phi)?;
    q.check_dim(u)?;
    let n = q.dim();
    let to_units = Complex64::new(0.0, -1.0 / HBAR);
    let qp = q.commutator(phi)?;
    let normalized = qp.scaled(to_units);
    let up = u.commutator(phi)?.scaled(Complex64::new(capacitance, 0.0));

    let mut block = 0.0f64;
    let mut border = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let z = normalized[(i, j)];
            if i < n - 1 && j < n - 1 {
                let expect = if i == j { 1.0 } else { 0.0 };
                block = block.max((z - expect).norm());
            } else if !(i == n - 1 && j == n - 1) {
                border = border.max(z.norm());
            }
        }
    }
    let voltage = up
        .entries()
        .iter()
        .zip(qp.entries())
        .map(|(a, b)| (a - b).norm() / HBAR)
        .fold(0.0, f64::max);
    Ok(CommutatorReport {
        dimension: n,
        max_block_deviation: block,
        max_border_deviation: border,
        corner: normalized[(n - 1, n - 1)],
        expected_corner: 1.0 - n as f64,
        max_voltage_deviation: voltage,
    })
}
