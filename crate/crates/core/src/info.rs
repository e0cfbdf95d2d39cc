//! Exact entropy and (conditional) mutual information over [`JointTable`]s.
//!
//! All quantities are in nats. Cells with zero probability contribute nothing
//! to any sum (`0 ln 0 = 0`). Conditional mutual information is evaluated
//! slice by slice, `I(X;Y|Z) = sum_z p(z) I(X;Y|Z=z)`, rather than through
//! differences of entropies.

use std::fmt;

use serde::Serialize;

use crate::dist::{projection, JointTable, VarSet};
use crate::error::{Error, Result};

/// Shared absolute tolerance for equality diagnosis, in nats.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Negative rounding residue down to this size is reported as zero.
pub const CLAMP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize)]
pub struct Nats(pub f64);

impl Nats {
    pub const ZERO: Nats = Nats(0.0);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn bits(self) -> f64 {
        self.0 / std::f64::consts::LN_2
    }

    fn clamped(raw: f64) -> Nats {
        if (-CLAMP_TOL..0.0).contains(&raw) {
            Nats(0.0)
        } else {
            Nats(raw)
        }
    }
}

impl fmt::Display for Nats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6} nats", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarkovVerdict {
    pub is_chain: bool,
    /// `I(X;Z|Y)`, which vanishes exactly for a chain `X -> Y -> Z`.
    pub residual: Nats,
}

/// Restriction of `joint` to `keep` plus flat indices of each listed subset
/// for every cell of the restriction.
struct Restricted {
    probs: Vec<f64>,
    maps: Vec<Vec<usize>>,
    sizes: Vec<usize>,
}

fn restrict(joint: &JointTable, keep: &VarSet, subsets: &[&VarSet]) -> Result<Restricted> {
    let table = crate::dist::marginal(joint, keep)?;
    let shape = table.shape();
    let mut maps = Vec::with_capacity(subsets.len());
    let mut sizes = Vec::with_capacity(subsets.len());
    for subset in subsets {
        let axes: Vec<usize> = subset
            .iter()
            .map(|v| table.position(v).expect("subset of keep"))
            .collect();
        sizes.push(axes.iter().map(|&a| shape[a]).product());
        maps.push(projection(&shape, &axes));
    }
    Ok(Restricted {
        probs: table.probabilities().to_vec(),
        maps,
        sizes,
    })
}

fn require_disjoint(a: &VarSet, b: &VarSet) -> Result<()> {
    match a.overlap(b) {
        Some(v) => Err(Error::Overlap(v)),
        None => Ok(()),
    }
}

fn require_nonempty(set: &VarSet, what: &'static str) -> Result<()> {
    if set.is_empty() {
        Err(Error::EmptySet(what))
    } else {
        Ok(())
    }
}

pub fn entropy(joint: &JointTable, x: &VarSet) -> Result<Nats> {
    require_nonempty(x, "entropy argument")?;
    let m = crate::dist::marginal(joint, x)?;
    let h: f64 = m
        .probabilities()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    Ok(Nats(h))
}

/// `I(X;Y)` before clamping of rounding residue. Symmetric bit-for-bit: the
/// pair is put in canonical order before summing.
pub fn mutual_information_raw(joint: &JointTable, x: &VarSet, y: &VarSet) -> Result<f64> {
    require_nonempty(x, "mutual information X")?;
    require_nonempty(y, "mutual information Y")?;
    require_disjoint(x, y)?;
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    let r = restrict(joint, &x.union(y), &[x, y])?;
    let mut px = vec![0.0; r.sizes[0]];
    let mut py = vec![0.0; r.sizes[1]];
    for (i, &p) in r.probs.iter().enumerate() {
        px[r.maps[0][i]] += p;
        py[r.maps[1][i]] += p;
    }
    let mut sum = 0.0;
    for (i, &p) in r.probs.iter().enumerate() {
        if p > 0.0 {
            sum += p * (p / (px[r.maps[0][i]] * py[r.maps[1][i]])).ln();
        }
    }
    Ok(sum)
}

pub fn mutual_information(joint: &JointTable, x: &VarSet, y: &VarSet) -> Result<Nats> {
    mutual_information_raw(joint, x, y).map(Nats::clamped)
}

/// `I(X;Y|Z)` before clamping; `Z` may be empty.
pub fn conditional_mutual_information_raw(
    joint: &JointTable,
    x: &VarSet,
    y: &VarSet,
    z: &VarSet,
) -> Result<f64> {
    require_nonempty(x, "conditional mutual information X")?;
    require_nonempty(y, "conditional mutual information Y")?;
    require_disjoint(x, y)?;
    require_disjoint(x, z)?;
    require_disjoint(y, z)?;
    if z.is_empty() {
        return mutual_information_raw(joint, x, y);
    }
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    let xz = x.union(z);
    let yz = y.union(z);
    let r = restrict(joint, &xz.union(y), &[z, &xz, &yz])?;
    let (zmap, xzmap, yzmap) = (&r.maps[0], &r.maps[1], &r.maps[2]);

    let mut pz = vec![0.0; r.sizes[0]];
    let mut pxz = vec![0.0; r.sizes[1]];
    let mut pyz = vec![0.0; r.sizes[2]];
    for (i, &p) in r.probs.iter().enumerate() {
        pz[zmap[i]] += p;
        pxz[xzmap[i]] += p;
        pyz[yzmap[i]] += p;
    }

    // information within each slice Z = z, on conditional probabilities
    let mut slice_info = vec![0.0; r.sizes[0]];
    for (i, &p) in r.probs.iter().enumerate() {
        if p > 0.0 {
            let zc = pz[zmap[i]];
            let pxy = p / zc;
            let px = pxz[xzmap[i]] / zc;
            let py = pyz[yzmap[i]] / zc;
            slice_info[zmap[i]] += pxy * (pxy / (px * py)).ln();
        }
    }
    Ok(pz.iter().zip(&slice_info).map(|(&w, &s)| w * s).sum())
}

pub fn conditional_mutual_information(
    joint: &JointTable,
    x: &VarSet,
    y: &VarSet,
    z: &VarSet,
) -> Result<Nats> {
    conditional_mutual_information_raw(joint, x, y, z).map(Nats::clamped)
}

/// `|I(X1 u X2; Y) - I(X1; Y) - I(X2; Y | X1)|`, which should be rounding
/// noise on every input.
pub fn chain_rule_residual(joint: &JointTable, x1: &VarSet, x2: &VarSet, y: &VarSet) -> Result<Nats> {
    require_nonempty(x1, "chain rule X1")?;
    require_nonempty(x2, "chain rule X2")?;
    require_disjoint(x1, x2)?;
    let whole = mutual_information_raw(joint, &x1.union(x2), y)?;
    let first = mutual_information_raw(joint, x1, y)?;
    let second = conditional_mutual_information_raw(joint, x2, y, x1)?;
    Ok(Nats((whole - first - second).abs()))
}

/// Tests `X -> Y -> Z` through the residual `I(X;Z|Y)`. Reversing the chain
/// gives the identical verdict.
pub fn is_markov_chain(
    joint: &JointTable,
    x: &VarSet,
    y: &VarSet,
    z: &VarSet,
    tol: f64,
) -> Result<MarkovVerdict> {
    require_nonempty(y, "Markov chain middle")?;
    let residual = conditional_mutual_information(joint, x, z, y)?;
    Ok(MarkovVerdict {
        is_chain: residual.0 <= tol,
        residual,
    })
}

/// `I(X;Y) - I(X;Z)` for a verified chain `X -> Y -> Z`; nonnegative up to
/// rounding, and zero exactly when `I(X;Y|Z)` is.
pub fn data_processing_gap(joint: &JointTable, x: &VarSet, y: &VarSet, z: &VarSet) -> Result<Nats> {
    let verdict = is_markov_chain(joint, x, y, z, DEFAULT_TOL)?;
    if !verdict.is_chain {
        return Err(Error::NotMarkov {
            residual: verdict.residual.0,
            tol: DEFAULT_TOL,
        });
    }
    let near = mutual_information_raw(joint, x, y)?;
    let far = mutual_information_raw(joint, x, z)?;
    Ok(Nats(near - far))
}
