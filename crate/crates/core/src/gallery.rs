//! Test matrices, built from the closed-form entry definitions of the
//! corresponding MATLAB `gallery` matrices (default parameters).
//!
//! Specs parse from short strings: `moler:16`, `fiedler:88`, `frank:12`,
//! `jordan:50x1.5,50x2.5`, `singdiag:40`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub enum GallerySpec {
    /// Symmetric positive definite, `A = L L^T` with `L` unit lower
    /// triangular and `-1` below the diagonal.
    Moler(usize),
    /// `a_ij = |i - j|`.
    Fiedler(usize),
    /// Upper Hessenberg, `a_ij = n + 1 - max(i, j)` for `j >= i - 1`.
    Frank(usize),
    /// Block diagonal of Jordan blocks, one `(size, eigenvalue)` per block.
    JordanBlocks(Vec<(usize, f64)>),
    /// `diag(0, 1, ..., n-1)`.
    SingularDiag(usize),
}

impl GallerySpec {
    pub fn n(&self) -> usize {
        match self {
            GallerySpec::Moler(n)
            | GallerySpec::Fiedler(n)
            | GallerySpec::Frank(n)
            | GallerySpec::SingularDiag(n) => *n,
            GallerySpec::JordanBlocks(blocks) => blocks.iter().map(|b| b.0).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GallerySpec::JordanBlocks(blocks) => {
                if blocks.is_empty() {
                    return Err(Error::InvalidSpec("jordan needs at least one block".into()));
                }
                for &(size, lambda) in blocks {
                    if size == 0 {
                        return Err(Error::InvalidSpec("jordan block size must be >= 1".into()));
                    }
                    if !lambda.is_finite() {
                        return Err(Error::InvalidSpec(format!("non-finite eigenvalue {lambda}")));
                    }
                }
                Ok(())
            }
            _ if self.n() == 0 => Err(Error::InvalidSpec("dimension must be >= 1".into())),
            _ => Ok(()),
        }
    }

    /// Short name used for output directories.
    pub fn slug(&self) -> String {
        self.to_string().replace([':', ',', '.'], "_")
    }
}

/// Builds the matrix described by `spec`.
pub fn build(spec: &GallerySpec) -> Result<Matrix> {
    spec.validate()?;
    let n = spec.n();
    // 1-based indices in the formulas
    let m = match spec {
        GallerySpec::Moler(_) => Matrix::from_fn(n, |i, j| {
            let (i, j) = (i + 1, j + 1);
            if i == j {
                i as f64
            } else {
                i.min(j) as f64 - 2.0
            }
        }),
        GallerySpec::Fiedler(_) => Matrix::from_fn(n, |i, j| i.abs_diff(j) as f64),
        GallerySpec::Frank(_) => Matrix::from_fn(n, |i, j| {
            let (i, j) = (i + 1, j + 1);
            if j + 1 >= i {
                (n + 1 - i.max(j)) as f64
            } else {
                0.0
            }
        }),
        GallerySpec::JordanBlocks(blocks) => {
            let mut m = Matrix::zeros(n);
            let mut offset = 0;
            for &(size, lambda) in blocks {
                for k in 0..size {
                    m[(offset + k, offset + k)] = lambda;
                    if k + 1 < size {
                        m[(offset + k, offset + k + 1)] = 1.0;
                    }
                }
                offset += size;
            }
            m
        }
        GallerySpec::SingularDiag(_) => {
            Matrix::from_diag(&(0..n).map(|i| i as f64).collect::<Vec<_>>())
        }
    };
    Ok(m)
}

impl FromStr for GallerySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidSpec(format!("expected kind:args, got {s:?}")))?;
        let dim = || -> Result<usize> {
            arg.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidSpec(format!("bad dimension {arg:?}")))
        };
        let spec = match kind.trim() {
            "moler" => GallerySpec::Moler(dim()?),
            "fiedler" => GallerySpec::Fiedler(dim()?),
            "frank" => GallerySpec::Frank(dim()?),
            "singdiag" => GallerySpec::SingularDiag(dim()?),
            "jordan" => {
                let blocks = arg
                    .split(',')
                    .map(|b| {
                        let (size, lambda) = b.trim().split_once('x').ok_or_else(|| {
                            Error::InvalidSpec(format!("jordan block must be SIZExEIG, got {b:?}"))
                        })?;
                        let size = size
                            .parse::<usize>()
                            .map_err(|_| Error::InvalidSpec(format!("bad block size {size:?}")))?;
                        let lambda = lambda
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidSpec(format!("bad eigenvalue {lambda:?}")))?;
                        Ok((size, lambda))
                    })
                    .collect::<Result<Vec<_>>>()?;
                GallerySpec::JordanBlocks(blocks)
            }
            other => return Err(Error::InvalidSpec(format!("unknown matrix kind {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for GallerySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GallerySpec::Moler(n) => write!(f, "moler:{n}"),
            GallerySpec::Fiedler(n) => write!(f, "fiedler:{n}"),
            GallerySpec::Frank(n) => write!(f, "frank:{n}"),
            GallerySpec::SingularDiag(n) => write!(f, "singdiag:{n}"),
            GallerySpec::JordanBlocks(blocks) => {
                write!(f, "jordan:")?;
                for (i, (size, lambda)) in blocks.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{size}x{lambda}")?;
                }
                Ok(())
            }
        }
    }
}
