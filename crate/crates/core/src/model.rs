//! Potentials, Hamiltonians and field generators for the single-particle and
//! many-body Stark probes.
//!
//! Conventions: hopping/coupling `J` and `hbar` are 1 unless set otherwise, both
//! chains have open boundaries, site `j` runs over `1..=L`. In the many-body
//! sector a set bit is a spin up (`sigma^z = +1`) and site `j` lives in bit `j - 1`.

use crate::error::{invalid, Error, Result};
use crate::matrix::{Operator, SymMatrix, Tridiagonal};
use crate::spectral::{eigendecompose, EigenDecomposition};

/// Shape of the graded potential `V_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialProfile {
    /// `V_j = exp(rate * j)`.
    Exponential { rate: f64 },
    /// `V_j = j^exponent`, the power-law baseline.
    PowerLaw { exponent: f64 },
}

impl PotentialProfile {
    /// A zero rate is accepted and gives the flat profile `V_j = 1`.
    pub fn exponential(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(invalid("a", format!("rate must be finite and >= 0, got {rate}")));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn power_law(exponent: f64) -> Result<Self> {
        if !exponent.is_finite() || exponent <= 0.0 {
            return Err(invalid("gamma", format!("exponent must be > 0, got {exponent}")));
        }
        Ok(Self::PowerLaw { exponent })
    }

    pub fn value(&self, site: usize) -> f64 {
        let j = site as f64;
        match *self {
            Self::Exponential { rate } => (rate * j).exp(),
            Self::PowerLaw { exponent } => j.powf(exponent),
        }
    }

    /// The exponential rate, if this is an exponential profile.
    pub fn rate(&self) -> Option<f64> {
        match *self {
            Self::Exponential { rate } => Some(rate),
            Self::PowerLaw { .. } => None,
        }
    }
}

/// `V_1..V_L` for the given profile.
pub fn potential_values(profile: PotentialProfile, len: usize) -> Result<Vec<f64>> {
    if len == 0 {
        return Err(invalid("L", "chain length must be positive"));
    }
    Ok((1..=len).map(|j| profile.value(j)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProbeClass {
    SingleParticle,
    ManyBody,
}

impl ProbeClass {
    pub fn label(self) -> &'static str {
        match self {
            Self::SingleParticle => "sp",
            Self::ManyBody => "mb",
        }
    }
}

impl std::str::FromStr for ProbeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sp" | "single-particle" | "SingleParticle" => Ok(Self::SingleParticle),
            "mb" | "many-body" | "ManyBody" => Ok(Self::ManyBody),
            other => Err(invalid("probe", format!("unknown probe class `{other}`"))),
        }
    }
}

/// Problem definition for one probe at one field value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSpec {
    pub class: ProbeClass,
    pub len: usize,
    pub hopping: f64,
    pub field: f64,
    pub profile: PotentialProfile,
}

impl ProbeSpec {
    pub fn new(class: ProbeClass, len: usize, hopping: f64, field: f64, profile: PotentialProfile) -> Result<Self> {
        if len < 2 {
            return Err(invalid("L", format!("need at least 2 sites, got {len}")));
        }
        if class == ProbeClass::ManyBody && len % 2 != 0 {
            return Err(invalid("L", format!("many-body probe needs even L for half filling, got {len}")));
        }
        if !(hopping.is_finite() && hopping > 0.0) {
            return Err(invalid("J", format!("hopping must be > 0, got {hopping}")));
        }
        if !field.is_finite() {
            return Err(invalid("h", "field must be finite"));
        }
        Ok(Self {
            class,
            len,
            hopping,
            field,
            profile,
        })
    }

    /// Single-particle probe with `J = 1` and exponential profile.
    pub fn single_particle(len: usize, rate: f64, field: f64) -> Result<Self> {
        Self::new(ProbeClass::SingleParticle, len, 1.0, field, PotentialProfile::exponential(rate)?)
    }

    /// Many-body probe with `J = 1` and exponential profile.
    pub fn many_body(len: usize, rate: f64, field: f64) -> Result<Self> {
        Self::new(ProbeClass::ManyBody, len, 1.0, field, PotentialProfile::exponential(rate)?)
    }

    pub fn with_field(mut self, field: f64) -> Self {
        self.field = field;
        self
    }

    pub fn potential(&self) -> Vec<f64> {
        (1..=self.len).map(|j| self.profile.value(j)).collect()
    }
}

/// Zero-magnetization sector of `L` spins: all patterns with `L/2` set bits, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    len: usize,
    states: Vec<u32>,
}

impl SectorBasis {
    pub fn new(len: usize) -> Result<Self> {
        if len < 2 || len % 2 != 0 {
            return Err(invalid("L", format!("sector basis needs even L >= 2, got {len}")));
        }
        if len > 30 {
            return Err(invalid("L", format!("L = {len} exceeds the 30-site bit budget")));
        }
        let n_up = (len / 2) as u32;
        let states: Vec<u32> = (0u32..(1u32 << len)).filter(|s| s.count_ones() == n_up).collect();
        Ok(Self { len, states })
    }

    pub fn len_sites(&self) -> usize {
        self.len
    }

    pub fn n_up(&self) -> usize {
        self.len / 2
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn state(&self, index: usize) -> u32 {
        self.states[index]
    }

    pub fn index_of(&self, pattern: u32) -> Option<usize> {
        self.states.binary_search(&pattern).ok()
    }

    /// `+1` if site `j` (1-based) is up in `pattern`, else `-1`.
    pub fn spin(pattern: u32, site: usize) -> f64 {
        if pattern >> (site - 1) & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// Pattern with the given 1-based sites up.
    pub fn pattern_from_sites(sites: &[usize]) -> u32 {
        sites.iter().fold(0, |acc, &j| acc | 1 << (j - 1))
    }

    /// Renders a pattern as `1`/`0` characters, site 1 first.
    pub fn render(&self, pattern: u32) -> String {
        (1..=self.len)
            .map(|j| if pattern >> (j - 1) & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    fn check(&self, spec: &ProbeSpec) -> Result<()> {
        if self.len != spec.len {
            return Err(Error::BasisMismatch {
                basis: self.len,
                probe: spec.len,
            });
        }
        Ok(())
    }
}

/// Tight-binding chain `-J sum (|j><j+1| + h.c.) + h sum V_j |j><j|`.
pub fn build_sp_hamiltonian(spec: &ProbeSpec) -> Result<Tridiagonal> {
    if spec.class != ProbeClass::SingleParticle {
        return Err(Error::WrongProbeClass {
            expected: "single-particle",
        });
    }
    let diag = spec.potential().into_iter().map(|v| spec.field * v).collect();
    Tridiagonal::new(diag, vec![-spec.hopping; spec.len - 1])
}

/// Diagonal of the field generator `H_0` (the operator multiplying `h`).
///
/// Single particle: `V_j`. Many body: `sum_j V_j s_j` per sector state.
pub fn build_field_generator(spec: &ProbeSpec, basis: Option<&SectorBasis>) -> Result<Vec<f64>> {
    let v = spec.potential();
    match spec.class {
        ProbeClass::SingleParticle => Ok(v),
        ProbeClass::ManyBody => {
            let basis = basis.ok_or_else(|| invalid("basis", "many-body generator needs a sector basis"))?;
            basis.check(spec)?;
            Ok(basis
                .states()
                .iter()
                .map(|&s| v.iter().enumerate().map(|(i, vj)| vj * SectorBasis::spin(s, i + 1)).sum())
                .collect())
        }
    }
}

/// Sector matrix of `-J sum_j (XX + YY + ZZ)_{j,j+1} + h sum_j V_j Z_j`.
///
/// Off-diagonal entries are all `-2J` and are kept as a bond list; the dense
/// form is available through [`MbHamiltonian::to_dense`].
#[derive(Debug, Clone, PartialEq)]
pub struct MbHamiltonian {
    pub diagonal: Vec<f64>,
    /// Pairs `(i, k)` with `i < k` connected by one adjacent flip-flop.
    pub bonds: Vec<(u32, u32)>,
    pub bond_value: f64,
}

impl MbHamiltonian {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn to_dense(&self) -> SymMatrix {
        let mut m = SymMatrix::diagonal(&self.diagonal);
        for &(i, k) in &self.bonds {
            m.set_sym(i as usize, k as usize, self.bond_value);
        }
        m
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut rows: Vec<f64> = self.diagonal.iter().map(|d| d.abs()).collect();
        for &(i, k) in &self.bonds {
            rows[i as usize] += self.bond_value.abs();
            rows[k as usize] += self.bond_value.abs();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, d), xi) in y.iter_mut().zip(&self.diagonal).zip(x) {
            *yi = d * xi;
        }
        for &(i, k) in &self.bonds {
            let (i, k) = (i as usize, k as usize);
            y[i] += self.bond_value * x[k];
            y[k] += self.bond_value * x[i];
        }
    }
}

fn mb_coupling(spec: &ProbeSpec, basis: &SectorBasis) -> MbHamiltonian {
    let l = spec.len;
    let mut diagonal = Vec::with_capacity(basis.dim());
    let mut bonds = Vec::new();
    for (i, &s) in basis.states().iter().enumerate() {
        let mut zz = 0.0;
        for j in 1..l {
            let (a, b) = (SectorBasis::spin(s, j), SectorBasis::spin(s, j + 1));
            zz += a * b;
            if a != b {
                let flipped = s ^ (0b11 << (j - 1));
                let k = basis.index_of(flipped).expect("flip-flop stays in the sector");
                if i < k {
                    bonds.push((i as u32, k as u32));
                }
            }
        }
        diagonal.push(-spec.hopping * zz);
    }
    bonds.sort_unstable();
    MbHamiltonian {
        diagonal,
        bonds,
        bond_value: -2.0 * spec.hopping,
    }
}

pub fn build_mb_hamiltonian(spec: &ProbeSpec, basis: &SectorBasis) -> Result<MbHamiltonian> {
    if spec.class != ProbeClass::ManyBody {
        return Err(Error::WrongProbeClass { expected: "many-body" });
    }
    basis.check(spec)?;
    let mut h = mb_coupling(spec, basis);
    let gen = build_field_generator(spec, Some(basis))?;
    for (d, g) in h.diagonal.iter_mut().zip(&gen) {
        *d += spec.field * g;
    }
    Ok(h)
}

/// Largest sector dimension for which dense matrices are formed.
pub const DENSE_LIMIT: usize = 4000;

/// Field-independent parts of a probe, cached so `H(h) = H_C + h H_0` is cheap to rebuild.
#[derive(Debug, Clone)]
pub struct ProbeModel {
    spec: ProbeSpec,
    basis: Option<SectorBasis>,
    /// `None` for sectors above [`DENSE_LIMIT`].
    coupling: Option<Operator>,
    bonds: Option<MbHamiltonian>,
    generator: Vec<f64>,
}

impl ProbeModel {
    pub fn new(spec: &ProbeSpec) -> Result<Self> {
        let spec0 = spec.with_field(0.0);
        match spec.class {
            ProbeClass::SingleParticle => {
                let coupling = build_sp_hamiltonian(&spec0)?;
                Ok(Self {
                    spec: *spec,
                    basis: None,
                    generator: build_field_generator(spec, None)?,
                    coupling: Some(coupling.into()),
                    bonds: None,
                })
            }
            ProbeClass::ManyBody => {
                let basis = SectorBasis::new(spec.len)?;
                let mb = build_mb_hamiltonian(&spec0, &basis)?;
                let generator = build_field_generator(spec, Some(&basis))?;
                Ok(Self {
                    spec: *spec,
                    coupling: (basis.dim() <= DENSE_LIMIT).then(|| mb.to_dense().into()),
                    bonds: Some(mb),
                    basis: Some(basis),
                    generator,
                })
            }
        }
    }

    pub fn spec(&self) -> &ProbeSpec {
        &self.spec
    }

    pub fn basis(&self) -> Option<&SectorBasis> {
        self.basis.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.generator.len()
    }

    /// Diagonal of `H_0` in the working basis.
    pub fn generator(&self) -> &[f64] {
        &self.generator
    }

    /// `H(field)` as a matrix. Sectors above [`DENSE_LIMIT`] are densified on every call.
    pub fn hamiltonian(&self, field: f64) -> Operator {
        let mut op = match (&self.coupling, &self.bonds) {
            (Some(c), _) => c.clone(),
            (None, Some(b)) => b.to_dense().into(),
            (None, None) => unreachable!("single-particle models always cache the chain"),
        };
        match &mut op {
            Operator::Tridiagonal(t) => {
                for (d, g) in t.diag.iter_mut().zip(&self.generator) {
                    *d += field * g;
                }
            }
            Operator::Dense(m) => m.add_to_diagonal(&self.generator, field),
        }
        op
    }

    /// Full eigendecomposition of `H(field)`, refused for sectors above [`DENSE_LIMIT`].
    pub fn decompose(&self, field: f64) -> Result<EigenDecomposition> {
        if self.coupling.is_none() {
            return Err(invalid(
                "L",
                format!("sector dimension {} exceeds the dense limit {DENSE_LIMIT}", self.dim()),
            ));
        }
        eigendecompose(&self.hamiltonian(field))
    }

    /// Sparse form of the many-body Hamiltonian at `field`.
    pub fn sparse_hamiltonian(&self, field: f64) -> Option<MbHamiltonian> {
        self.bonds.as_ref().map(|b| {
            let mut h = b.clone();
            for (d, g) in h.diagonal.iter_mut().zip(&self.generator) {
                *d += field * g;
            }
            h
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_examples() {
        let flat = potential_values(PotentialProfile::exponential(0.0).unwrap(), 3).unwrap();
        assert_eq!(flat, vec![1.0, 1.0, 1.0]);
        let pow2 = potential_values(PotentialProfile::exponential(2f64.ln()).unwrap(), 3).unwrap();
        for (x, y) in pow2.iter().zip([2.0, 4.0, 8.0]) {
            assert!((x - y).abs() < 1e-14);
        }
        let linear = potential_values(PotentialProfile::power_law(1.0).unwrap(), 4).unwrap();
        assert_eq!(linear, vec![1.0, 2.0, 3.0, 4.0]);
        assert!(potential_values(PotentialProfile::power_law(1.0).unwrap(), 0).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(PotentialProfile::exponential(-0.1).is_err());
        assert!(PotentialProfile::power_law(0.0).is_err());
        assert!(ProbeSpec::many_body(5, 0.1, 0.0).is_err());
        assert!(ProbeSpec::single_particle(1, 0.1, 0.0).is_err());
        assert!(ProbeSpec::new(
            ProbeClass::SingleParticle,
            4,
            0.0,
            0.0,
            PotentialProfile::exponential(0.1).unwrap()
        )
        .is_err());
    }

    #[test]
    fn sp_hamiltonian_examples() {
        let h = build_sp_hamiltonian(&ProbeSpec::single_particle(2, 0.3, 0.0).unwrap()).unwrap();
        assert_eq!(h.to_dense().as_slice(), &[0.0, -1.0, -1.0, 0.0]);

        let h = build_sp_hamiltonian(&ProbeSpec::single_particle(2, 2f64.ln(), 1.0).unwrap()).unwrap();
        let d = h.to_dense();
        assert!((d.get(0, 0) - 2.0).abs() < 1e-14);
        assert!((d.get(1, 1) - 4.0).abs() < 1e-14);
        assert_eq!(d.get(0, 1), -1.0);

        let mb = ProbeSpec::many_body(4, 0.1, 0.0).unwrap();
        assert!(matches!(build_sp_hamiltonian(&mb), Err(Error::WrongProbeClass { .. })));
    }

    #[test]
    fn sector_basis_ordering_and_index() {
        let b = SectorBasis::new(4).unwrap();
        assert_eq!(b.dim(), 6);
        assert!(b.states().windows(2).all(|w| w[0] < w[1]));
        for (i, &s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(s), Some(i));
        }
        assert_eq!(b.index_of(0b1111), None);
        assert_eq!(SectorBasis::new(14).unwrap().dim(), 3432);
        assert!(SectorBasis::new(7).is_err());
        assert_eq!(b.render(SectorBasis::pattern_from_sites(&[1, 3])), "1010");
    }

    #[test]
    fn field_generator_examples() {
        let a = 2f64.ln();
        let sp = ProbeSpec::single_particle(2, a, 0.0).unwrap();
        let g = build_field_generator(&sp, None).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-14 && (g[1] - 4.0).abs() < 1e-14);

        let a = 0.37;
        let mb = ProbeSpec::many_body(2, a, 0.0).unwrap();
        let basis = SectorBasis::new(2).unwrap();
        let g = build_field_generator(&mb, Some(&basis)).unwrap();
        let up_down = basis.index_of(SectorBasis::pattern_from_sites(&[1])).unwrap();
        assert_eq!(up_down, 0);
        assert!((g[up_down] - (a.exp() - (2.0 * a).exp())).abs() < 1e-14);

        let flat = ProbeSpec::many_body(6, 0.0, 0.0).unwrap();
        let b6 = SectorBasis::new(6).unwrap();
        assert!(build_field_generator(&flat, Some(&b6)).unwrap().iter().all(|&x| x == 0.0));
        assert!(matches!(
            build_field_generator(&flat, Some(&basis)),
            Err(Error::BasisMismatch { .. })
        ));
        assert!(build_field_generator(&flat, None).is_err());
    }

    #[test]
    fn mb_two_site_matrix() {
        let basis = SectorBasis::new(2).unwrap();
        let h = build_mb_hamiltonian(&ProbeSpec::many_body(2, 0.5, 0.0).unwrap(), &basis).unwrap();
        assert_eq!(h.to_dense().as_slice(), &[1.0, -2.0, -2.0, 1.0]);

        let (a, f) = (0.5, 0.3);
        let h = build_mb_hamiltonian(&ProbeSpec::many_body(2, a, f).unwrap(), &basis).unwrap();
        let d = h.to_dense();
        let shift = a.exp() - (2.0 * a).exp();
        assert!((d.get(0, 0) - (1.0 + f * shift)).abs() < 1e-14);
        assert!((d.get(1, 1) - (1.0 - f * shift)).abs() < 1e-14);
        assert_eq!(d.get(0, 1), -2.0);
    }

    #[test]
    fn mb_four_site_trace() {
        // Brute-force trace: sum over the six sector patterns of -sum_j s_j s_{j+1}.
        let mut expected = 0.0;
        for s in 0u32..16 {
            if s.count_ones() != 2 {
                continue;
            }
            for j in 1..4 {
                expected -= SectorBasis::spin(s, j) * SectorBasis::spin(s, j + 1);
            }
        }
        let basis = SectorBasis::new(4).unwrap();
        let h = build_mb_hamiltonian(&ProbeSpec::many_body(4, 0.2, 0.0).unwrap(), &basis).unwrap();
        let trace: f64 = h.diagonal.iter().sum();
        assert_eq!(trace, expected);
        assert_eq!(trace, 6.0);
    }

    #[test]
    fn probe_model_rebuilds_hamiltonian() {
        let spec = ProbeSpec::many_body(6, 0.1, 0.7).unwrap();
        let model = ProbeModel::new(&spec).unwrap();
        let direct = build_mb_hamiltonian(&spec, model.basis().unwrap()).unwrap().to_dense();
        let rebuilt = model.hamiltonian(0.7).to_dense();
        for (x, y) in direct.as_slice().iter().zip(rebuilt.as_slice()) {
            assert!((x - y).abs() < 1e-13);
        }
        let sparse = model.sparse_hamiltonian(0.7).unwrap();
        let x: Vec<f64> = (0..model.dim()).map(|i| (i as f64).sin()).collect();
        let (mut y1, mut y2) = (vec![0.0; x.len()], vec![0.0; x.len()]);
        sparse.apply(&x, &mut y1);
        direct.apply(&x, &mut y2);
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
