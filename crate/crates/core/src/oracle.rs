//! Brute-force reference on the full photon ⊗ spin Hilbert space.
//!
//! Basis index is `k·2^N + mask`, photon number major, with bit `j − 1` of
//! `mask` set when atom `j` is in `|m⟩`. Everything here is deliberately
//! naive: dense vectors, explicit operator actions, no symmetry reduction.

#![allow(clippy::needless_range_loop)]

use nalgebra::Matrix3;
use num_complex::Complex64;
use std::collections::HashMap;
use std::str::FromStr;

use crate::channels::{ChannelKind, ChannelStrength};
use crate::error::{Error, Result};
use crate::model::{CollectiveMoments, ModelParams};
use crate::pairwise::TwoQubitState;
use crate::squeezing::TransverseMoments;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// Largest `(n + 1)·2^N` a state vector may have.
pub const STATE_CAPACITY: usize = 1 << 24;
/// Largest `N` for the three-level Hamiltonian check.
pub const HAMILTONIAN_MAX_ATOMS: u32 = 12;
/// Largest `N` for a dense spin density matrix.
pub const DENSITY_MAX_ATOMS: u32 = 10;
/// Largest `N` for full-density Kraus application.
pub const KRAUS_MAX_ATOMS: u32 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleState {
    atoms: u32,
    n_max: u32,
    amps: Vec<C>,
    raw_norm: f64,
}

impl OracleState {
    pub fn atoms(&self) -> u32 {
        self.atoms
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    fn spin_dim(&self) -> usize {
        1 << self.atoms
    }

    /// Amplitudes with `k` photons.
    pub fn block(&self, k: usize) -> &[C] {
        let d = self.spin_dim();
        &self.amps[k * d..(k + 1) * d]
    }

    /// Norm of `[D†]ⁿ|0⟩/√n!` before normalization; `A` is its reciprocal.
    pub fn raw_norm(&self) -> f64 {
        self.raw_norm
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Every nonzero amplitude satisfies `k + popcount(mask) = n`.
    pub fn conserves_excitations(&self) -> bool {
        let d = self.spin_dim();
        self.amps
            .iter()
            .enumerate()
            .all(|(idx, c)| *c == ZERO || (idx / d) as u32 + (idx % d).count_ones() == self.n_max)
    }

    /// An arbitrary product state `|k⟩ ⊗ |mask⟩`, used for negative checks.
    pub fn basis(atoms: u32, n_max: u32, k: u32, mask: usize) -> Result<Self> {
        let mut s = Self::zeros(atoms, n_max)?;
        if k > n_max || mask >= s.spin_dim() {
            return Err(Error::Index(format!(
                "basis state ({k}, {mask:#b}) out of range"
            )));
        }
        let d = s.spin_dim();
        s.amps[k as usize * d + mask] = C::new(1.0, 0.0);
        s.raw_norm = 1.0;
        Ok(s)
    }

    fn zeros(atoms: u32, n_max: u32) -> Result<Self> {
        let size = (n_max as usize + 1).checked_mul(1usize.checked_shl(atoms).unwrap_or(0));
        match size {
            Some(s) if s > 0 && s <= STATE_CAPACITY && atoms < usize::BITS => Ok(Self {
                atoms,
                n_max,
                amps: vec![ZERO; s],
                raw_norm: 0.0,
            }),
            _ => Err(Error::Capacity(format!(
                "(n+1)·2^N for N = {atoms}, n = {n_max} exceeds {STATE_CAPACITY}"
            ))),
        }
    }
}

/// `|d_n(θ)⟩` from `n` applications of `D† = a† cos θ − C† sin θ` with
/// `C† = N^{−1/2} Σ_j e^{iKj} σ_mg^j`, then normalized.
pub fn build_dark_state(p: &ModelParams) -> Result<OracleState> {
    let (atoms, n) = (p.atoms(), p.excitations());
    let mut state = OracleState::zeros(atoms, n)?;
    let d = state.spin_dim();
    // Same snapping at θ = π/2 as the closed forms, so that case is exact.
    let (cos, sin) = if p.cot2() == 0.0 {
        (0.0, 1.0)
    } else {
        (p.theta().cos(), p.theta().sin())
    };
    let site_phase: Vec<C> = (1..=atoms)
        .map(|j| C::from_polar(-sin / (atoms as f64).sqrt(), p.wave_vector() * j as f64))
        .collect();
    state.amps[0] = C::new(1.0, 0.0);
    for step in 1..=n as usize {
        let mut next = vec![ZERO; state.amps.len()];
        for (idx, &c) in state.amps.iter().enumerate() {
            if c == ZERO {
                continue;
            }
            let (k, mask) = (idx / d, idx % d);
            if k < n as usize {
                next[idx + d] += c * cos * ((k + 1) as f64).sqrt();
            }
            for (j, &ph) in site_phase.iter().enumerate() {
                if mask & (1 << j) == 0 {
                    next[idx | (1 << j)] += c * ph;
                }
            }
        }
        // Fold 1/√n! in one factor at a time.
        let scale = 1.0 / (step as f64).sqrt();
        state.amps = next.into_iter().map(|c| c * scale).collect();
    }
    let norm = state.norm();
    state.raw_norm = norm;
    for c in state.amps.iter_mut() {
        *c /= norm;
    }
    Ok(state)
}

/// `‖H|ψ⟩‖` for the three-level Hamiltonian
/// `H = Σ_j [g e^{iK_ge j} a σ_eg^j + Ω e^{iK_me j} σ_em^j] + h.c.`.
///
/// The state has no `|e⟩` population, so the lowering half of `H`
/// annihilates it and the image lives on configurations with one `|e⟩`.
pub fn hamiltonian_residual(
    state: &OracleState,
    g: f64,
    omega: f64,
    k_ge: f64,
    k_me: f64,
) -> Result<f64> {
    if state.atoms > HAMILTONIAN_MAX_ATOMS {
        return Err(Error::Capacity(format!(
            "Hamiltonian check supports N ≤ {HAMILTONIAN_MAX_ATOMS}, got {}",
            state.atoms
        )));
    }
    let d = state.spin_dim();
    // Key: (photon number, m-mask, site promoted to |e⟩).
    let mut image: HashMap<(usize, usize, u32), C> = HashMap::new();
    for (idx, &c) in state.amps.iter().enumerate() {
        if c == ZERO {
            continue;
        }
        let (k, mask) = (idx / d, idx % d);
        for j in 0..state.atoms {
            let site = (j + 1) as f64;
            let bit = 1usize << j;
            if mask & bit == 0 {
                if k > 0 {
                    // a σ_eg: photon absorbed, g → e.
                    *image.entry((k - 1, mask, j)).or_insert(ZERO) +=
                        c * C::from_polar(g * (k as f64).sqrt(), k_ge * site);
                }
            } else {
                // σ_em: m → e.
                *image.entry((k, mask & !bit, j)).or_insert(ZERO) +=
                    c * C::from_polar(omega, k_me * site);
            }
        }
    }
    Ok(image.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
}

/// Named operators accepted by [`expectation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Jz,
    Jz2,
    J2,
    Jx2,
    Jy2,
    Jm2,
    PhotonNumber,
    PhotonFactorial2,
    SigmaZ1,
    SigmaZ1Z2,
    SigmaPlus1Minus2,
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "Jz" => Observable::Jz,
            "Jz2" => Observable::Jz2,
            "J2" => Observable::J2,
            "Jx2" => Observable::Jx2,
            "Jy2" => Observable::Jy2,
            "Jm2" => Observable::Jm2,
            "n" | "a+a" => Observable::PhotonNumber,
            "n2fact" | "a+a+aa" => Observable::PhotonFactorial2,
            "sz1" => Observable::SigmaZ1,
            "sz1sz2" => Observable::SigmaZ1Z2,
            "sp1sm2" => Observable::SigmaPlus1Minus2,
            _ => return Err(Error::UnknownObservable(s.into())),
        })
    }
}

// Collective moments are assembled from the ladder basis `J₊, J₋, J_z`.
const PLUS: usize = 0;
const MINUS: usize = 1;
const ZED: usize = 2;

/// `J₊ v`, `J₋ v` and `J_z v` on one spin block.
fn ladder_images(atoms: u32, v: &[C]) -> [Vec<C>; 3] {
    let half = 0.5 * atoms as f64;
    let mut plus = vec![ZERO; v.len()];
    let mut minus = vec![ZERO; v.len()];
    let mut z = vec![ZERO; v.len()];
    for (mask, &c) in v.iter().enumerate() {
        if c == ZERO {
            continue;
        }
        z[mask] = c * (mask.count_ones() as f64 - half);
        for j in 0..atoms {
            let bit = 1usize << j;
            if mask & bit == 0 {
                plus[mask | bit] += c;
            } else {
                minus[mask & !bit] += c;
            }
        }
    }
    [plus, minus, z]
}

/// `J₊† = J₋`, `J_z† = J_z`.
fn adjoint(a: usize) -> usize {
    match a {
        PLUS => MINUS,
        MINUS => PLUS,
        _ => ZED,
    }
}

/// Rows give `J_x`, `J_y`, `J_z` in the ladder basis.
const CARTESIAN: [[C; 3]; 3] = [
    [C::new(0.5, 0.0), C::new(0.5, 0.0), ZERO],
    [C::new(0.0, -0.5), C::new(0.0, 0.5), ZERO],
    [ZERO, ZERO, C::new(1.0, 0.0)],
];

/// `⟨J_a⟩` and `⟨J_a J_b⟩` over the ladder basis.
#[derive(Debug, Clone, Copy)]
struct LadderTable {
    first: [C; 3],
    second: [[C; 3]; 3],
}

impl LadderTable {
    fn cart_first(&self, k: usize) -> C {
        (0..3).map(|a| CARTESIAN[k][a] * self.first[a]).sum()
    }

    fn cart_second(&self, k: usize, l: usize) -> C {
        let mut acc = ZERO;
        for a in 0..3 {
            for b in 0..3 {
                acc += CARTESIAN[k][a] * CARTESIAN[l][b] * self.second[a][b];
            }
        }
        acc
    }
}

fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn pure_table(state: &OracleState) -> LadderTable {
    let mut t = LadderTable {
        first: [ZERO; 3],
        second: [[ZERO; 3]; 3],
    };
    for k in 0..=state.n_max as usize {
        let v = state.block(k);
        if v.iter().all(|c| *c == ZERO) {
            continue;
        }
        let img = ladder_images(state.atoms, v);
        for a in 0..3 {
            t.first[a] += inner(v, &img[a]);
            for b in 0..3 {
                t.second[a][b] += inner(&img[adjoint(a)], &img[b]);
            }
        }
    }
    t
}

fn photon_moment(state: &OracleState, f: impl Fn(f64) -> f64) -> f64 {
    (0..=state.n_max as usize)
        .map(|k| f(k as f64) * state.block(k).iter().map(|c| c.norm_sqr()).sum::<f64>())
        .sum()
}

pub fn expectation_complex(state: &OracleState, obs: Observable) -> Result<C> {
    let re = |x: f64| C::new(x, 0.0);
    let spin = || pure_table(state);
    Ok(match obs {
        Observable::Jz => spin().first[ZED],
        Observable::Jz2 => spin().second[ZED][ZED],
        Observable::Jx2 => spin().cart_second(0, 0),
        Observable::Jy2 => spin().cart_second(1, 1),
        Observable::J2 => {
            let t = spin();
            (0..3).map(|k| t.cart_second(k, k)).sum()
        }
        Observable::Jm2 => spin().second[MINUS][MINUS],
        Observable::PhotonNumber => re(photon_moment(state, |k| k)),
        Observable::PhotonFactorial2 => re(photon_moment(state, |k| k * (k - 1.0))),
        Observable::SigmaZ1 | Observable::SigmaZ1Z2 | Observable::SigmaPlus1Minus2 => {
            if state.atoms < 2 && obs != Observable::SigmaZ1 {
                return Err(Error::Index("two-site observable needs N ≥ 2".into()));
            }
            let d = state.spin_dim();
            let mut acc = ZERO;
            for (idx, &c) in state.amps.iter().enumerate() {
                let mask = idx % d;
                let z = |b: usize| if mask & b != 0 { 1.0 } else { -1.0 };
                acc += match obs {
                    Observable::SigmaZ1 => re(c.norm_sqr() * z(1)),
                    Observable::SigmaZ1Z2 => re(c.norm_sqr() * z(1) * z(2)),
                    // σ_mg¹ σ_gm²: excitation hops from atom 2 to atom 1.
                    _ if mask & 1 == 0 && mask & 2 != 0 => state.amps[idx ^ 3].conj() * c,
                    _ => ZERO,
                };
            }
            acc
        }
    })
}

pub fn expectation(state: &OracleState, obs: Observable) -> Result<f64> {
    Ok(expectation_complex(state, obs)?.re)
}

/// All moments the closed forms provide, measured on the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleMoments {
    pub moments: CollectiveMoments,
    pub transverse: TransverseMoments,
    /// `⟨J_k⟩` and `C_kl = Re⟨J_k J_l⟩`, `k, l ∈ {x, y, z}`.
    pub first: [f64; 3],
    pub second: Matrix3<f64>,
}

fn moments_from(t: &LadderTable, n_mean: f64, n2fact_mean: f64) -> OracleMoments {
    let first = [0, 1, 2].map(|k| t.cart_first(k).re);
    let second = Matrix3::from_fn(|k, l| t.cart_second(k, l).re);
    let (jx2, jy2, jz2) = (second[(0, 0)], second[(1, 1)], second[(2, 2)]);
    OracleMoments {
        moments: CollectiveMoments {
            jz_mean: first[2],
            jz2_mean: jz2,
            j2_mean: jx2 + jy2 + jz2,
            n_mean,
            n2fact_mean,
        },
        transverse: TransverseMoments {
            jx2,
            jy2,
            jm2: t.second[MINUS][MINUS],
        },
        first,
        second,
    }
}

pub fn oracle_moments(state: &OracleState) -> OracleMoments {
    moments_from(
        &pure_table(state),
        photon_moment(state, |k| k),
        photon_moment(state, |k| k * (k - 1.0)),
    )
}

fn check_pair(atoms: u32, i: u32, j: u32) -> Result<()> {
    if i == j || i == 0 || j == 0 || i > atoms || j > atoms {
        return Err(Error::Index(format!(
            "sites ({i}, {j}) invalid for N = {atoms}"
        )));
    }
    Ok(())
}

/// Local index in `|11⟩, |10⟩, |01⟩, |00⟩` order.
fn pair_index(mask: usize, bi: usize, bj: usize) -> usize {
    let ei = (mask & bi != 0) as usize;
    let ej = (mask & bj != 0) as usize;
    2 * (1 - ei) + (1 - ej)
}

fn rest_masks(atoms: u32, bi: usize, bj: usize) -> impl Iterator<Item = usize> {
    (0..1usize << atoms).filter(move |m| m & (bi | bj) == 0)
}

fn local_masks(rest: usize, bi: usize, bj: usize) -> [usize; 4] {
    [rest | bi | bj, rest | bi, rest | bj, rest]
}

/// Reduced 4×4 state of atoms `i` and `j` (1-based), photon traced out.
pub fn reduce_two_site(state: &OracleState, i: u32, j: u32) -> Result<[[C; 4]; 4]> {
    check_pair(state.atoms, i, j)?;
    let (bi, bj) = (1usize << (i - 1), 1usize << (j - 1));
    let mut rho = [[ZERO; 4]; 4];
    for k in 0..=state.n_max as usize {
        let b = state.block(k);
        for rest in rest_masks(state.atoms, bi, bj) {
            let v = local_masks(rest, bi, bj).map(|m| b[m]);
            for r in 0..4 {
                for c in 0..4 {
                    rho[r][c] += v[r] * v[c].conj();
                }
            }
        }
    }
    debug_assert!((0..4).all(|r| pair_index(local_masks(0, bi, bj)[r], bi, bj) == r));
    Ok(rho)
}

/// Reads the five X-state elements off a 4×4 reduction.
pub fn x_elements(rho: &[[C; 4]; 4]) -> TwoQubitState {
    TwoQubitState {
        v_plus: rho[0][0].re,
        v_minus: rho[3][3].re,
        w: 0.5 * (rho[1][1].re + rho[2][2].re),
        y: rho[1][2],
        u: rho[0][3],
    }
}

/// Largest modulus among entries outside the X pattern.
pub fn off_x_magnitude(rho: &[[C; 4]; 4]) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            let on_x = r == c || r + c == 3;
            if !on_x {
                worst = worst.max(rho[r][c].norm());
            }
        }
    }
    worst.max((rho[1][1] - rho[2][2]).norm())
}

/// Dense spin density matrix with the photon traced out.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinDensity {
    atoms: u32,
    data: Vec<C>,
}

impl SpinDensity {
    pub fn atoms(&self) -> u32 {
        self.atoms
    }

    fn dim(&self) -> usize {
        1 << self.atoms
    }

    pub fn get(&self, r: usize, c: usize) -> C {
        self.data[r * self.dim() + c]
    }

    pub fn trace(&self) -> C {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    fn column(&self, c: usize) -> Vec<C> {
        (0..self.dim()).map(|r| self.get(r, c)).collect()
    }

    pub fn from_state(state: &OracleState) -> Result<Self> {
        if state.atoms > DENSITY_MAX_ATOMS {
            return Err(Error::Capacity(format!(
                "dense spin density supports N ≤ {DENSITY_MAX_ATOMS}, got {}",
                state.atoms
            )));
        }
        let d = state.spin_dim();
        let mut data = vec![ZERO; d * d];
        for k in 0..=state.n_max as usize {
            let b = state.block(k);
            for r in 0..d {
                if b[r] == ZERO {
                    continue;
                }
                for c in 0..d {
                    data[r * d + c] += b[r] * b[c].conj();
                }
            }
        }
        Ok(Self {
            atoms: state.atoms,
            data,
        })
    }

    /// `Tr(J_a B)` for a dense row-major `B`.
    fn ladder_trace(&self, a: usize, b: &[C]) -> C {
        let d = self.dim();
        let half = 0.5 * self.atoms as f64;
        let mut acc = ZERO;
        for r in 0..d {
            match a {
                ZED => acc += b[r * d + r] * (r.count_ones() as f64 - half),
                _ => {
                    for j in 0..self.atoms {
                        let bit = 1usize << j;
                        match (a, r & bit == 0) {
                            (PLUS, true) => acc += b[r * d + (r | bit)],
                            (MINUS, false) => acc += b[r * d + (r & !bit)],
                            _ => {}
                        }
                    }
                }
            }
        }
        acc
    }

    fn table(&self) -> LadderTable {
        let d = self.dim();
        // Column-wise left action: images[b] = J_b ρ.
        let mut images = [vec![ZERO; d * d], vec![ZERO; d * d], vec![ZERO; d * d]];
        for c in 0..d {
            let img = ladder_images(self.atoms, &self.column(c));
            for (b, col) in img.iter().enumerate() {
                for (r, &v) in col.iter().enumerate() {
                    images[b][r * d + c] = v;
                }
            }
        }
        let mut t = LadderTable {
            first: [ZERO; 3],
            second: [[ZERO; 3]; 3],
        };
        for a in 0..3 {
            t.first[a] = self.ladder_trace(a, &self.data);
            for b in 0..3 {
                t.second[a][b] = self.ladder_trace(a, &images[b]);
            }
        }
        t
    }

    /// Spin moments; photon moments are not carried and read as zero.
    pub fn moments(&self) -> OracleMoments {
        moments_from(&self.table(), 0.0, 0.0)
    }

    pub fn reduce_two_site(&self, i: u32, j: u32) -> Result<[[C; 4]; 4]> {
        check_pair(self.atoms, i, j)?;
        let (bi, bj) = (1usize << (i - 1), 1usize << (j - 1));
        let mut rho = [[ZERO; 4]; 4];
        for rest in rest_masks(self.atoms, bi, bj) {
            let l = local_masks(rest, bi, bj);
            for r in 0..4 {
                for c in 0..4 {
                    rho[r][c] += self.get(l[r], l[c]);
                }
            }
        }
        Ok(rho)
    }

    /// Smallest eigenvalue, for positivity checks.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let m = nalgebra::DMatrix::from_fn(d, d, |r, c| self.get(r, c));
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Single-atom Kraus operators in the `|g⟩ = 0`, `|m⟩ = 1` basis.
pub fn kraus_operators(kind: ChannelKind, strength: ChannelStrength) -> Vec<[[C; 2]; 2]> {
    let (p, s) = (strength.p(), strength.s());
    let r = |x: f64| C::new(x, 0.0);
    let scaled = |k: f64, m: [[C; 2]; 2]| m.map(|row| row.map(|c| c * k));
    let id = [[r(1.0), ZERO], [ZERO, r(1.0)]];
    let x = [[ZERO, r(1.0)], [r(1.0), ZERO]];
    let y = [[ZERO, -I], [I, ZERO]];
    let z = [[r(1.0), ZERO], [ZERO, r(-1.0)]];
    match kind {
        ChannelKind::Adc => vec![
            [[r(1.0), ZERO], [ZERO, r(s.sqrt())]],
            [[ZERO, r(p.sqrt())], [ZERO, ZERO]],
        ],
        ChannelKind::Pdc => vec![
            scaled((1.0 - p / 2.0).sqrt(), id),
            scaled((p / 2.0).sqrt(), z),
        ],
        ChannelKind::Dpc => vec![
            scaled((1.0 - 0.75 * p).max(0.0).sqrt(), id),
            scaled((p / 4.0).sqrt(), x),
            scaled((p / 4.0).sqrt(), y),
            scaled((p / 4.0).sqrt(), z),
        ],
    }
}

/// `Σ_K K ρ K†` on a single 2×2 block.
pub fn apply_single(ops: &[[[C; 2]; 2]], rho: [[C; 2]; 2]) -> [[C; 2]; 2] {
    let mut out = [[ZERO; 2]; 2];
    for k in ops {
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        out[a][d] += k[a][b] * rho[b][c] * k[d][c].conj();
                    }
                }
            }
        }
    }
    out
}

/// Superoperator of a Kraus set: `out[a][d] = Σ_{b,c} S[a][d][b][c] ρ[b][c]`.
fn superoperator(ops: &[[[C; 2]; 2]]) -> [[[[C; 2]; 2]; 2]; 2] {
    let mut s = [[[[ZERO; 2]; 2]; 2]; 2];
    for k in ops {
        for a in 0..2 {
            for d in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        s[a][d][b][c] += k[a][b] * k[d][c].conj();
                    }
                }
            }
        }
    }
    s
}

/// The channel applied independently to every atom.
pub fn apply_kraus(
    rho: &SpinDensity,
    kind: ChannelKind,
    strength: ChannelStrength,
) -> Result<SpinDensity> {
    if rho.atoms > KRAUS_MAX_ATOMS {
        return Err(Error::Capacity(format!(
            "full-density Kraus maps support N ≤ {KRAUS_MAX_ATOMS}, got {}",
            rho.atoms
        )));
    }
    let sup = superoperator(&kraus_operators(kind, strength));
    let d = rho.dim();
    let mut out = rho.clone();
    for j in 0..rho.atoms {
        let bit = 1usize << j;
        for r0 in (0..d).filter(|r| r & bit == 0) {
            for c0 in (0..d).filter(|c| c & bit == 0) {
                let idx = |a: usize, b: usize| (r0 | (a * bit)) * d + (c0 | (b * bit));
                let block = [
                    [out.data[idx(0, 0)], out.data[idx(0, 1)]],
                    [out.data[idx(1, 0)], out.data[idx(1, 1)]],
                ];
                for a in 0..2 {
                    for e in 0..2 {
                        let mut acc = ZERO;
                        for b in 0..2 {
                            for c in 0..2 {
                                acc += sup[a][e][b][c] * block[b][c];
                            }
                        }
                        out.data[idx(a, e)] = acc;
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{collective_moments, normalization_a, photon_weights};
    use crate::pairwise::rho12;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn params(big_n: u32, n: u32, theta: f64) -> ModelParams {
        ModelParams::new(big_n, n, theta).unwrap()
    }

    fn dark(big_n: u32, n: u32, theta: f64, k: f64) -> OracleState {
        build_dark_state(&params(big_n, n, theta).with_wave_vector(k).unwrap()).unwrap()
    }

    #[test]
    fn bell_pair() {
        let s = dark(2, 1, PI / 2.0, 0.0);
        let b = s.block(0);
        assert_relative_eq!(b[1].norm(), 0.5_f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(b[2].norm(), 0.5_f64.sqrt(), epsilon = 1e-15);
        assert!((b[1] - b[2]).norm() < 1e-15);
        let rho = reduce_two_site(&s, 1, 2).unwrap();
        assert_relative_eq!(rho[1][2].re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(rho[1][1].re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn pure_photon_at_zero_angle() {
        let s = dark(4, 1, 0.0, 0.0);
        assert_relative_eq!(s.block(1)[0].norm(), 1.0, epsilon = 1e-15);
        assert!(s.block(0).iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn norm_support_and_marginal() {
        let p = params(8, 3, PI / 3.0).with_wave_vector(0.5).unwrap();
        let s = build_dark_state(&p).unwrap();
        assert_relative_eq!(s.norm(), 1.0, epsilon = 1e-12);
        assert!(s.conserves_excitations());
        let w = photon_weights(&p);
        for k in 0..=3 {
            let marg: f64 = s.block(k).iter().map(|c| c.norm_sqr()).sum();
            assert_relative_eq!(marg, w.weights[k], epsilon = 1e-13);
        }
    }

    #[test]
    fn normalization_matches_raw_norm() {
        for (big_n, n, th) in [(4, 2, PI / 4.0), (6, 2, 0.7), (8, 5, 2.0), (5, 5, PI / 2.0)] {
            let p = params(big_n, n, th);
            let s = build_dark_state(&p).unwrap();
            assert_relative_eq!(
                normalization_a(&p),
                1.0 / s.raw_norm(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn capacity_guard() {
        assert!(matches!(
            build_dark_state(&params(24, 1, 0.5)),
            Err(Error::Capacity(_))
        ));
        let s = dark(13, 1, 1.0, 0.0);
        assert!(matches!(
            hamiltonian_residual(&s, 1.0, 1.0, 0.0, 0.0),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn residual_examples() {
        let theta: f64 = 0.9;
        let big_n = 6;
        let s = dark(big_n, 3, theta, 0.5);
        let (g, omega) = (theta.sin(), (big_n as f64).sqrt() * theta.cos());
        assert!(hamiltonian_residual(&s, g, omega, 0.8, 0.3).unwrap() < 1e-12);
        let bright = OracleState::basis(6, 3, 3, 0).unwrap();
        let th = PI / 4.0;
        let r = hamiltonian_residual(&bright, th.sin(), 6f64.sqrt() * th.cos(), 0.0, 0.0).unwrap();
        assert!(r > 0.1);
        let vac = dark(6, 0, 1.0, 0.0);
        assert_eq!(hamiltonian_residual(&vac, 1.0, 1.0, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn observable_examples() {
        let s = dark(5, 0, 1.0, 0.0);
        assert_relative_eq!(expectation(&s, Observable::Jz).unwrap(), -2.5);
        let s = dark(6, 2, PI / 2.0, 0.0);
        assert_relative_eq!(
            expectation(&s, Observable::J2).unwrap(),
            12.0,
            epsilon = 1e-12
        );
        let p = params(8, 3, PI / 4.0);
        let s = build_dark_state(&p).unwrap();
        assert_relative_eq!(
            expectation(&s, Observable::PhotonNumber).unwrap(),
            collective_moments(&p).n_mean,
            epsilon = 1e-12
        );
        assert!(matches!(
            "Jq".parse::<Observable>(),
            Err(Error::UnknownObservable(_))
        ));
    }

    #[test]
    fn moments_match_closed_forms() {
        for (big_n, n, th, k) in [(6, 3, 1.1, 0.0), (7, 4, PI / 2.0, 0.3), (5, 2, 2.4, PI)] {
            let p = params(big_n, n, th).with_wave_vector(k).unwrap();
            let om = oracle_moments(&build_dark_state(&p).unwrap());
            let cm = collective_moments(&p);
            assert_relative_eq!(om.moments.jz_mean, cm.jz_mean, epsilon = 1e-12);
            assert_relative_eq!(om.moments.jz2_mean, cm.jz2_mean, epsilon = 1e-12);
            assert_relative_eq!(om.moments.j2_mean, cm.j2_mean, epsilon = 1e-12);
            assert_relative_eq!(om.moments.n2fact_mean, cm.n2fact_mean, epsilon = 1e-12);
            assert!(om.transverse.jm2.norm() < 1e-13);
            assert!(om.first[0].abs() < 1e-13 && om.first[1].abs() < 1e-13);
        }
    }

    #[test]
    fn density_moments_match_pure() {
        let s = dark(6, 3, 1.0, 0.4);
        let pure = oracle_moments(&s);
        let dens = SpinDensity::from_state(&s).unwrap().moments();
        assert!((pure.second - dens.second).abs().max() < 1e-12);
        assert_relative_eq!(pure.moments.j2_mean, dens.moments.j2_mean, epsilon = 1e-12);
        assert_relative_eq!(
            expectation(&s, Observable::J2).unwrap(),
            pure.moments.j2_mean,
            epsilon = 1e-12
        );
    }

    #[test]
    fn two_site_matches_closed_form() {
        let s = dark(8, 3, PI / 2.0, 0.0);
        let x = x_elements(&reduce_two_site(&s, 3, 7).unwrap());
        assert_relative_eq!(x.v_plus, 6.0 / 56.0, epsilon = 1e-13);
        assert_relative_eq!(x.v_minus, 20.0 / 56.0, epsilon = 1e-13);
        assert_relative_eq!(x.w, 15.0 / 56.0, epsilon = 1e-13);
        let p = params(8, 3, PI / 3.0).with_wave_vector(0.7).unwrap();
        let s = build_dark_state(&p).unwrap();
        let rho = reduce_two_site(&s, 2, 5).unwrap();
        let closed = rho12(&p.with_pair_sep(3).unwrap()).unwrap();
        let x = x_elements(&rho);
        assert!(off_x_magnitude(&rho) < 1e-13);
        assert!((x.y - closed.y).norm() < 1e-13 && x.u.norm() < 1e-13);
        assert_relative_eq!(x.w, closed.w, epsilon = 1e-13);
        assert!(matches!(reduce_two_site(&s, 2, 2), Err(Error::Index(_))));
        assert!(matches!(reduce_two_site(&s, 0, 2), Err(Error::Index(_))));
    }

    #[test]
    fn single_site_maps_match_definitions() {
        // Generic single-qubit density matrix.
        let rho = [
            [C::new(0.3, 0.0), C::new(0.1, 0.2)],
            [C::new(0.1, -0.2), C::new(0.7, 0.0)],
        ];
        let p = 0.35;
        let st = ChannelStrength::new(p).unwrap();
        let s = 1.0 - p;
        let adc = apply_single(&kraus_operators(ChannelKind::Adc, st), rho);
        assert!((adc[1][1] - rho[1][1] * s).norm() < 1e-15);
        assert!((adc[0][0] - (rho[0][0] + rho[1][1] * p)).norm() < 1e-15);
        assert!((adc[0][1] - rho[0][1] * s.sqrt()).norm() < 1e-15);
        let pdc = apply_single(&kraus_operators(ChannelKind::Pdc, st), rho);
        for a in 0..2 {
            for b in 0..2 {
                let f = if a == b { 1.0 } else { s };
                assert!((pdc[a][b] - rho[a][b] * f).norm() < 1e-15);
                let dpc = apply_single(&kraus_operators(ChannelKind::Dpc, st), rho);
                let mix = if a == b { 0.5 * p } else { 0.0 };
                assert!((dpc[a][b] - (rho[a][b] * s + mix)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn kraus_preserves_trace_and_positivity() {
        let s = dark(6, 2, PI / 2.0, 0.0);
        let rho = SpinDensity::from_state(&s).unwrap();
        for kind in ChannelKind::ALL {
            for p in [0.0, 0.3, 1.0] {
                let out = apply_kraus(&rho, kind, ChannelStrength::new(p).unwrap()).unwrap();
                assert!((out.trace() - 1.0).norm() < 1e-12);
                assert!(out.min_eigenvalue() > -1e-10);
                if p == 0.0 {
                    assert_eq!(out, rho);
                }
            }
        }
        let big = SpinDensity::from_state(&dark(9, 1, 1.0, 0.0)).unwrap();
        assert!(matches!(
            apply_kraus(&big, ChannelKind::Pdc, ChannelStrength::new(0.1).unwrap()),
            Err(Error::Capacity(_))
        ));
    }
}
