//! Finite signed atomic measures on Rⁿ extended by an isolated reservoir
//! point ◊.
//!
//! Weights are summed with [`fsum`], so every mass figure is the correctly
//! rounded value of the exact sum and does not depend on atom order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{fsum, max_norm_distance};

/// Atoms closer than this in max-norm are the same point.
pub const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("atom {index} has {got} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("atom {index} has a non-finite coordinate or weight")]
    NonFinite { index: usize },
    #[error("reservoir weight is not finite")]
    NonFiniteReservoir,
    #[error("measure must be nonnegative, atom {index} has weight {weight}")]
    Negative { index: usize, weight: f64 },
    #[error("raw measures passed to balancing must have an empty reservoir")]
    ReservoirNotEmpty,
    #[error("map failed at atom {index}: {reason}")]
    MapFailed { index: usize, reason: String },
    #[error("measures live in different dimensions ({0} vs {1})")]
    DimensionClash(usize, usize),
    #[error("masses differ by {diff:e}, beyond tolerance {tol:e}")]
    Unbalanced { diff: f64, tol: f64 },
    #[error("could not balance masses exactly (residual {0:e})")]
    ExactBalance(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub location: Vec<f64>,
    pub weight: f64,
}

impl Atom {
    pub fn new(location: Vec<f64>, weight: f64) -> Self {
        Self { location, weight }
    }
}

/// A finite signed measure Σ wᵢ δ_{xᵢ} + r δ_◊.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicSignedMeasure {
    dimension: usize,
    atoms: Vec<Atom>,
    reservoir: f64,
}

impl AtomicSignedMeasure {
    /// Validates, merges co-located atoms and drops zero weights.
    pub fn new(dimension: usize, atoms: Vec<Atom>, reservoir: f64) -> Result<Self, MeasureError> {
        if dimension == 0 {
            return Err(MeasureError::ZeroDimension);
        }
        for (index, a) in atoms.iter().enumerate() {
            if a.location.len() != dimension {
                return Err(MeasureError::DimensionMismatch {
                    index,
                    expected: dimension,
                    got: a.location.len(),
                });
            }
            if !a.weight.is_finite() || a.location.iter().any(|x| !x.is_finite()) {
                return Err(MeasureError::NonFinite { index });
            }
        }
        if !reservoir.is_finite() {
            return Err(MeasureError::NonFiniteReservoir);
        }
        Ok(Self {
            dimension,
            atoms: merge_atoms(atoms),
            reservoir,
        })
    }

    pub fn zero(dimension: usize) -> Self {
        Self {
            dimension: dimension.max(1),
            atoms: Vec::new(),
            reservoir: 0.0,
        }
    }

    pub fn dirac(location: Vec<f64>, weight: f64) -> Result<Self, MeasureError> {
        Self::new(location.len(), vec![Atom::new(location, weight)], 0.0)
    }

    /// Pure reservoir mass, no atoms.
    pub fn reservoir_only(dimension: usize, reservoir: f64) -> Result<Self, MeasureError> {
        Self::new(dimension, Vec::new(), reservoir)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn reservoir(&self) -> f64 {
        self.reservoir
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.reservoir == 0.0
    }

    pub fn with_reservoir(&self, reservoir: f64) -> Self {
        Self {
            reservoir,
            ..self.clone()
        }
    }

    /// ρ(Rⁿ): the signed mass of the atoms, reservoir excluded.
    pub fn mass(&self) -> f64 {
        fsum(self.atoms.iter().map(|a| a.weight))
    }

    /// ρ(R̂ⁿ): atoms plus reservoir, rounded once.
    pub fn total_mass_including_reservoir(&self) -> f64 {
        fsum(self.atoms.iter().map(|a| a.weight).chain([self.reservoir]))
    }

    /// Σ|wᵢ| + |reservoir|.
    pub fn total_variation(&self) -> f64 {
        fsum(self.atoms.iter().map(|a| a.weight.abs()).chain([self.reservoir.abs()]))
    }

    /// |ρ|(A) for the set of atoms selected by `inside`.
    pub fn variation_where<F: Fn(&[f64]) -> bool>(&self, inside: F) -> f64 {
        fsum(self.atoms.iter().filter(|a| inside(&a.location)).map(|a| a.weight.abs()))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.reservoir >= 0.0 && self.atoms.iter().all(|a| a.weight >= 0.0)
    }

    /// Atom-wise weight scaling; the reservoir is scaled too.
    pub fn scaled(&self, factor: f64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.location.clone(), a.weight * factor))
            .collect();
        Self {
            dimension: self.dimension,
            atoms: merge_atoms(atoms),
            reservoir: self.reservoir * factor,
        }
    }

    /// `self - other`, merging co-located atoms.
    pub fn difference(&self, other: &Self) -> Result<Self, MeasureError> {
        if self.dimension != other.dimension {
            return Err(MeasureError::DimensionClash(self.dimension, other.dimension));
        }
        let atoms = self
            .atoms
            .iter()
            .cloned()
            .chain(other.atoms.iter().map(|a| Atom::new(a.location.clone(), -a.weight)))
            .collect();
        Ok(Self {
            dimension: self.dimension,
            atoms: merge_atoms(atoms),
            reservoir: self.reservoir - other.reservoir,
        })
    }

    /// Largest |x| over the atoms (0 for an atom-free measure).
    pub fn support_radius(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| crate::numeric::norm(&a.location))
            .fold(0.0, f64::max)
    }
}

/// Merges atoms within [`DEDUP_TOL`] in max-norm and drops zero weights.
///
/// Output order follows the first occurrence of each location; a merged
/// atom keeps the location of its earliest member and the correctly
/// rounded sum of the member weights.
fn merge_atoms(atoms: Vec<Atom>) -> Vec<Atom> {
    let n = atoms.len();
    if n == 0 {
        return atoms;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        atoms[a].location[0]
            .total_cmp(&atoms[b].location[0])
            .then(a.cmp(&b))
    });
    // group id per atom; groups formed by sweeping in first-coordinate order
    let mut group_of = vec![usize::MAX; n];
    let mut leaders: Vec<usize> = Vec::new(); // atom index of each group's first swept member
    let mut window_start = 0;
    for &i in &order {
        let xi = &atoms[i].location;
        while window_start < leaders.len() && atoms[leaders[window_start]].location[0] < xi[0] - DEDUP_TOL {
            window_start += 1;
        }
        let hit = leaders[window_start..]
            .iter()
            .position(|&l| max_norm_distance(&atoms[l].location, xi) <= DEDUP_TOL);
        match hit {
            Some(p) => group_of[i] = window_start + p,
            None => {
                group_of[i] = leaders.len();
                leaders.push(i);
            }
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); leaders.len()];
    for i in 0..n {
        members[group_of[i]].push(i);
    }
    // members are in ascending atom index, so members[g][0] is the first occurrence
    members.sort_by_key(|m| m[0]);
    let mut atoms = atoms;
    let mut out = Vec::with_capacity(members.len());
    for m in members {
        let w = if m.len() == 1 {
            atoms[m[0]].weight
        } else {
            fsum(m.iter().map(|&i| atoms[i].weight))
        };
        if w != 0.0 {
            out.push(Atom::new(std::mem::take(&mut atoms[m[0]].location), w));
        }
    }
    out
}

/// Splits `m` into mutually singular nonnegative parts with `m = pos - neg`.
pub fn jordan_decompose(m: &AtomicSignedMeasure) -> (AtomicSignedMeasure, AtomicSignedMeasure) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for a in &m.atoms {
        if a.weight > 0.0 {
            pos.push(a.clone());
        } else if a.weight < 0.0 {
            neg.push(Atom::new(a.location.clone(), -a.weight));
        }
    }
    let (rp, rn) = if m.reservoir >= 0.0 {
        (m.reservoir, 0.0)
    } else {
        (0.0, -m.reservoir)
    };
    // atoms are already merged, so no re-merge is needed
    (
        AtomicSignedMeasure { dimension: m.dimension, atoms: pos, reservoir: rp },
        AtomicSignedMeasure { dimension: m.dimension, atoms: neg, reservoir: rn },
    )
}

pub fn total_variation(m: &AtomicSignedMeasure) -> f64 {
    m.total_variation()
}

/// Image measure under `f`; ◊ is fixed, weights are copied untouched.
pub fn push_forward<F>(m: &AtomicSignedMeasure, mut f: F) -> Result<AtomicSignedMeasure, MeasureError>
where
    F: FnMut(usize, &[f64]) -> Result<Vec<f64>, String>,
{
    let mut atoms = Vec::with_capacity(m.atoms.len());
    for (index, a) in m.atoms.iter().enumerate() {
        let y = f(index, &a.location).map_err(|reason| MeasureError::MapFailed { index, reason })?;
        if y.len() != m.dimension || y.iter().any(|v| !v.is_finite()) {
            return Err(MeasureError::MapFailed {
                index,
                reason: "image is not a finite point of the right dimension".into(),
            });
        }
        atoms.push(Atom::new(y, a.weight));
    }
    Ok(AtomicSignedMeasure {
        dimension: m.dimension,
        atoms: merge_atoms(atoms),
        reservoir: m.reservoir,
    })
}

/// Two nonnegative measures of equal mass on R̂ⁿ, mutually singular on Rⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedPair {
    mu: AtomicSignedMeasure,
    nu: AtomicSignedMeasure,
}

impl BalancedPair {
    /// Cancels shared atoms and shared reservoir mass, then checks that the
    /// masses agree to `1e-12·(1 + mass)`.
    pub fn new(mu: AtomicSignedMeasure, nu: AtomicSignedMeasure) -> Result<Self, MeasureError> {
        let (mu, nu) = cancel_common(mu, nu)?;
        let a = mu.total_mass_including_reservoir();
        let b = nu.total_mass_including_reservoir();
        let tol = 1e-12 * (1.0 + a.abs().max(b.abs()));
        if (a - b).abs() > tol {
            return Err(MeasureError::Unbalanced { diff: a - b, tol });
        }
        Ok(Self { mu, nu })
    }

    pub fn mu(&self) -> &AtomicSignedMeasure {
        &self.mu
    }

    pub fn nu(&self) -> &AtomicSignedMeasure {
        &self.nu
    }

    pub fn dimension(&self) -> usize {
        self.mu.dimension
    }

    pub fn mass(&self) -> f64 {
        self.mu.total_mass_including_reservoir()
    }

    /// Swaps the roles of μ and ν.
    pub fn transposed(&self) -> Self {
        Self { mu: self.nu.clone(), nu: self.mu.clone() }
    }
}

/// Removes mass common to both measures at the same location (and at ◊).
fn cancel_common(
    mu: AtomicSignedMeasure,
    nu: AtomicSignedMeasure,
) -> Result<(AtomicSignedMeasure, AtomicSignedMeasure), MeasureError> {
    if mu.dimension != nu.dimension {
        return Err(MeasureError::DimensionClash(mu.dimension, nu.dimension));
    }
    for m in [&mu, &nu] {
        if m.reservoir < 0.0 {
            return Err(MeasureError::Negative { index: usize::MAX, weight: m.reservoir });
        }
        if let Some((index, a)) = m.atoms.iter().enumerate().find(|(_, a)| a.weight < 0.0) {
            return Err(MeasureError::Negative { index, weight: a.weight });
        }
    }
    let mut mu_atoms = mu.atoms;
    let mut nu_atoms = nu.atoms;
    for a in mu_atoms.iter_mut() {
        for b in nu_atoms.iter_mut() {
            if b.weight > 0.0 && max_norm_distance(&a.location, &b.location) <= DEDUP_TOL {
                let common = a.weight.min(b.weight);
                a.weight -= common;
                b.weight -= common;
            }
            if a.weight == 0.0 {
                break;
            }
        }
    }
    mu_atoms.retain(|a| a.weight > 0.0);
    nu_atoms.retain(|a| a.weight > 0.0);
    let common = mu.reservoir.min(nu.reservoir);
    Ok((
        AtomicSignedMeasure { dimension: mu.dimension, atoms: mu_atoms, reservoir: mu.reservoir - common },
        AtomicSignedMeasure { dimension: nu.dimension, atoms: nu_atoms, reservoir: nu.reservoir - common },
    ))
}

/// Puts the mass deficit of the lighter measure on its reservoir so that
/// both totals agree bit-for-bit.
pub fn balance_with_reservoir(
    mu_raw: &AtomicSignedMeasure,
    nu_raw: &AtomicSignedMeasure,
) -> Result<BalancedPair, MeasureError> {
    if mu_raw.reservoir != 0.0 || nu_raw.reservoir != 0.0 {
        return Err(MeasureError::ReservoirNotEmpty);
    }
    let (mu, nu) = cancel_common(mu_raw.clone(), nu_raw.clone())?;
    let mm = mu.mass();
    let nm = nu.mass();
    let (mu, nu) = if nm >= mm {
        let r = exact_deficit(&mu, nm)?;
        (mu.with_reservoir(r), nu)
    } else {
        let r = exact_deficit(&nu, mm)?;
        (mu, nu.with_reservoir(r))
    };
    Ok(BalancedPair { mu, nu })
}

/// A reservoir `r >= 0` with `fsum(weights ∪ {r}) == target` exactly.
fn exact_deficit(m: &AtomicSignedMeasure, target: f64) -> Result<f64, MeasureError> {
    let total = |r: f64| fsum(m.atoms.iter().map(|a| a.weight).chain([r]));
    let mut r = fsum([target, -m.mass()]).max(0.0);
    if r == 0.0 && total(0.0) == target {
        return Ok(0.0);
    }
    for _ in 0..256 {
        let t = total(r);
        if t == target {
            return Ok(r);
        }
        r = if t < target { next_up(r) } else { next_down(r) };
        if r < 0.0 {
            break;
        }
    }
    Err(MeasureError::ExactBalance(total(r.max(0.0)) - target))
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let b = x.to_bits();
    if x > 0.0 { f64::from_bits(b + 1) } else { f64::from_bits(b - 1) }
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// JSON form: `{"dimension": n, "atoms": [[[x..], w], ...], "reservoir": r}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureDoc {
    pub dimension: usize,
    pub atoms: Vec<(Vec<f64>, f64)>,
    #[serde(default)]
    pub reservoir: f64,
}

impl From<&AtomicSignedMeasure> for MeasureDoc {
    fn from(m: &AtomicSignedMeasure) -> Self {
        Self {
            dimension: m.dimension,
            atoms: m.atoms.iter().map(|a| (a.location.clone(), a.weight)).collect(),
            reservoir: m.reservoir,
        }
    }
}

impl TryFrom<MeasureDoc> for AtomicSignedMeasure {
    type Error = MeasureError;
    fn try_from(d: MeasureDoc) -> Result<Self, MeasureError> {
        let atoms = d.atoms.into_iter().map(|(x, w)| Atom::new(x, w)).collect();
        AtomicSignedMeasure::new(d.dimension, atoms, d.reservoir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1(pts: &[(f64, f64)]) -> AtomicSignedMeasure {
        AtomicSignedMeasure::new(1, pts.iter().map(|&(x, w)| Atom::new(vec![x], w)).collect(), 0.0).unwrap()
    }

    #[test]
    fn jordan_of_separated_measure() {
        let (p, n) = jordan_decompose(&m1(&[(0.0, 1.0), (1.0, -1.0)]));
        assert_eq!(p.atoms(), &[Atom::new(vec![0.0], 1.0)]);
        assert_eq!(n.atoms(), &[Atom::new(vec![1.0], 1.0)]);
    }

    #[test]
    fn colocated_atoms_cancel_before_splitting() {
        let (p, n) = jordan_decompose(&m1(&[(0.0, 2.0), (0.0, -0.5)]));
        assert_eq!(p.atoms(), &[Atom::new(vec![0.0], 1.5)]);
        assert!(n.atoms().is_empty());
    }

    #[test]
    fn merge_respects_tolerance_and_order() {
        let m = m1(&[(3.0, 1.0), (1.0, 1.0), (3.0 + 5e-13, 2.0), (1.0 + 1e-9, 1.0)]);
        let locs: Vec<f64> = m.atoms().iter().map(|a| a.location[0]).collect();
        assert_eq!(locs, vec![3.0, 1.0, 1.0 + 1e-9]);
        assert_eq!(m.atoms()[0].weight, 3.0);
        let zero = m1(&[(0.0, 1.0), (0.0, -1.0)]);
        assert!(zero.atoms().is_empty());
    }

    #[test]
    fn total_variation_examples() {
        assert_eq!(AtomicSignedMeasure::zero(2).total_variation(), 0.0);
        assert_eq!(m1(&[(0.0, 1.0), (1.0, -1.0)]).total_variation(), 2.0);
    }

    #[test]
    fn push_forward_examples() {
        let m = m1(&[(0.0, 1.0), (1.0, -1.0)]);
        assert_eq!(push_forward(&m, |_, x| Ok(x.to_vec())).unwrap(), m);
        let s = push_forward(&m, |_, x| Ok(vec![x[0] + 1.0])).unwrap();
        assert_eq!(s, m1(&[(1.0, 1.0), (2.0, -1.0)]));
        let c = push_forward(&m1(&[(0.0, 0.5), (3.0, 0.5)]), |_, _| Ok(vec![0.0])).unwrap();
        assert_eq!(c, m1(&[(0.0, 1.0)]));
        let e = push_forward(&m, |i, _| if i == 1 { Err("boom".into()) } else { Ok(vec![0.0]) });
        assert!(matches!(e, Err(MeasureError::MapFailed { index: 1, .. })));
    }

    #[test]
    fn balancing_examples() {
        let p = balance_with_reservoir(&m1(&[(0.0, 1.0)]), &m1(&[(1.0, 1.0)])).unwrap();
        assert_eq!((p.mu().reservoir(), p.nu().reservoir()), (0.0, 0.0));
        let p = balance_with_reservoir(&m1(&[(0.0, 0.7)]), &m1(&[(1.0, 1.0)])).unwrap();
        assert!((p.mu().reservoir() - 0.3).abs() < 1e-15);
        assert_eq!(p.nu().reservoir(), 0.0);
        assert_eq!(
            p.mu().total_mass_including_reservoir(),
            p.nu().total_mass_including_reservoir()
        );
    }

    #[test]
    fn balanced_pair_cancels_shared_atoms() {
        let p = BalancedPair::new(m1(&[(0.0, 1.0)]), m1(&[(0.0, 1.0)])).unwrap();
        assert!(p.mu().is_empty() && p.nu().is_empty());
        let bad = BalancedPair::new(m1(&[(0.0, 1.0)]), m1(&[(1.0, 2.0)]));
        assert!(matches!(bad, Err(MeasureError::Unbalanced { .. })));
    }

    #[test]
    fn json_round_trip() {
        let m = AtomicSignedMeasure::new(2, vec![Atom::new(vec![0.5, -1.0], 0.25)], 0.125).unwrap();
        let s = serde_json::to_string(&MeasureDoc::from(&m)).unwrap();
        assert_eq!(s, r#"{"dimension":2,"atoms":[[[0.5,-1.0],0.25]],"reservoir":0.125}"#);
        let back: MeasureDoc = serde_json::from_str(&s).unwrap();
        assert_eq!(AtomicSignedMeasure::try_from(back).unwrap(), m);
    }
}
