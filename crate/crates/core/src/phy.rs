//! Transmitter-side signal generation and the AWGN channel.
//!
//! Active users map payload symbols onto a rotated PSK constellation with an
//! extra zero point, repeat the packet on every slot of their protocol
//! sequence, and the base station sees the superposition in complex AWGN.
//! Frame layout: slot-major, i.e. sample `l * K + k` is symbol slot `k` of
//! time-slot `l`, matching per-symbol sub-vector extraction.

use crate::float::Float;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::path::Path;
use thiserror::Error;

/// Errors from the signal chain.
#[derive(Debug, Error)]
pub enum PhyError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("symbol index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("frame file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Per-user constellation: the zero symbol plus `M` rotated PSK points.
#[derive(Debug, Clone, PartialEq)]
pub struct UserAlphabet<F> {
    user: usize,
    psk_order: usize,
    points: Vec<Complex<F>>,
}

impl<F: Float> UserAlphabet<F> {
    /// 0-based id of the owning user.
    pub fn user(&self) -> usize {
        self.user
    }

    /// PSK order `M`; the alphabet has `M + 1` points.
    pub fn psk_order(&self) -> usize {
        self.psk_order
    }

    /// Point `m`; index 0 is the zero symbol.
    pub fn point(&self, m: usize) -> Complex<F> {
        self.points[m]
    }

    pub fn points(&self) -> &[Complex<F>] {
        &self.points
    }
}

/// Builds user `u`'s alphabet: `points[m] = exp(j(2 pi (m-1)/M + theta_u))`
/// for `m >= 1` and a zero point at index 0.
///
/// The user rotation `theta_u = pi * u / (M * N)` (0-based `u`) spreads the
/// `N` users' constellations evenly over one PSK sector while keeping every
/// nonzero point at unit energy.
pub fn build_alphabet<F: Float>(user: usize, psk_order: usize, users: usize) -> UserAlphabet<F> {
    assert!(psk_order >= 2, "PSK order must be at least 2");
    assert!(user < users, "user id {user} out of range 0..{users}");
    let theta = F::PI() * F::from_usize(user).unwrap()
        / (F::from_usize(psk_order).unwrap() * F::from_usize(users).unwrap());
    let mut points = Vec::with_capacity(psk_order + 1);
    points.push(Complex::new(F::zero(), F::zero()));
    for m in 0..psk_order {
        let phase = F::from_f64_lossy(2.0) * F::PI() * F::from_usize(m).unwrap()
            / F::from_usize(psk_order).unwrap()
            + theta;
        points.push(Complex::new(phase.cos(), phase.sin()));
    }
    UserAlphabet {
        user,
        psk_order,
        points,
    }
}

/// Alphabets for all `N` users.
pub fn build_all_alphabets<F: Float>(psk_order: usize, users: usize) -> Vec<UserAlphabet<F>> {
    (0..users)
        .map(|u| build_alphabet(u, psk_order, users))
        .collect()
}

/// Binary activity vector with an exact number of active users.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityVector {
    active: Vec<bool>,
}

impl ActivityVector {
    pub fn from_flags(active: Vec<bool>) -> Self {
        Self { active }
    }

    pub fn from_active_set(users: usize, set: &[usize]) -> Self {
        let mut active = vec![false; users];
        for &u in set {
            active[u] = true;
        }
        Self { active }
    }

    /// Draws exactly `round(lambda * N)` active users uniformly.
    pub fn draw(users: usize, lambda: f64, rng: &mut impl Rng) -> Self {
        let count = (lambda * users as f64).round() as usize;
        let mut active = vec![false; users];
        for u in rand::seq::index::sample(rng, users, count.min(users)) {
            active[u] = true;
        }
        Self { active }
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn is_active(&self, user: usize) -> bool {
        self.active[user]
    }

    pub fn active_set(&self) -> Vec<usize> {
        (0..self.active.len())
            .filter(|&u| self.active[u])
            .collect()
    }

    pub fn count_active(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }
}

/// Received (or transmitted) sample sequence of one grant-free period.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<F> {
    samples: Vec<Complex<F>>,
    packet_len: usize,
    slots: usize,
    noise_var: F,
}

impl<F: Float> Frame<F> {
    pub fn new(
        samples: Vec<Complex<F>>,
        packet_len: usize,
        slots: usize,
        noise_var: F,
    ) -> Result<Self, PhyError> {
        if samples.len() != packet_len * slots {
            return Err(PhyError::DimensionMismatch(format!(
                "frame has {} samples, expected {} * {}",
                samples.len(),
                packet_len,
                slots
            )));
        }
        Ok(Self {
            samples,
            packet_len,
            slots,
            noise_var,
        })
    }

    pub fn samples(&self) -> &[Complex<F>] {
        &self.samples
    }

    /// Packet length `K` in symbols.
    pub fn packet_len(&self) -> usize {
        self.packet_len
    }

    /// Slot count `L`.
    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Per-sample complex noise variance the frame was generated with.
    pub fn noise_var(&self) -> F {
        self.noise_var
    }

    /// Raw dump as interleaved little-endian real/imag `f64` pairs.
    pub fn write_bin(&self, path: &Path) -> Result<(), PhyError> {
        let mut bytes = Vec::with_capacity(self.samples.len() * 16);
        for s in &self.samples {
            bytes.extend_from_slice(&s.re.to_f64_lossy().to_le_bytes());
            bytes.extend_from_slice(&s.im.to_f64_lossy().to_le_bytes());
        }
        std::fs::write(path, bytes).map_err(|source| PhyError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Reads a frame dumped by [`Frame::write_bin`].
    pub fn read_bin(
        path: &Path,
        packet_len: usize,
        slots: usize,
        noise_var: F,
    ) -> Result<Self, PhyError> {
        let bytes = std::fs::read(path).map_err(|source| PhyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if bytes.len() != packet_len * slots * 16 {
            return Err(PhyError::DimensionMismatch(format!(
                "frame file holds {} bytes, expected {}",
                bytes.len(),
                packet_len * slots * 16
            )));
        }
        let samples = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex::new(F::from_f64_lossy(re), F::from_f64_lossy(im))
            })
            .collect();
        Frame::new(samples, packet_len, slots, noise_var)
    }
}

/// Repeats a `K`-symbol packet on every slot of the protocol sequence.
///
/// `slot_support` lists the slots carrying the packet (the support of the
/// user's spreading-matrix column); all other slots stay zero.
pub fn spread_packet<F: Float>(
    symbols: &[Complex<F>],
    slot_support: &[usize],
    slots: usize,
) -> Result<Vec<Complex<F>>, PhyError> {
    if let Some(&bad) = slot_support.iter().find(|&&l| l >= slots) {
        return Err(PhyError::DimensionMismatch(format!(
            "slot index {bad} out of range 0..{slots}"
        )));
    }
    let packet_len = symbols.len();
    let mut out = vec![Complex::new(F::zero(), F::zero()); packet_len * slots];
    for &l in slot_support {
        out[l * packet_len..(l + 1) * packet_len].copy_from_slice(symbols);
    }
    Ok(out)
}

/// Sums spread packets and adds circularly-symmetric complex Gaussian noise
/// with per-sample variance `noise_var` (each quadrature gets half).
pub fn superpose_with_rng<F: Float>(
    packets: &[Vec<Complex<F>>],
    packet_len: usize,
    slots: usize,
    noise_var: F,
    rng: &mut impl Rng,
) -> Result<Frame<F>, PhyError> {
    let len = packet_len * slots;
    let mut samples = vec![Complex::new(F::zero(), F::zero()); len];
    for packet in packets {
        if packet.len() != len {
            return Err(PhyError::DimensionMismatch(format!(
                "packet has {} samples, expected {len}",
                packet.len()
            )));
        }
        for (s, p) in samples.iter_mut().zip(packet) {
            *s += *p;
        }
    }
    if noise_var > F::zero() {
        let sigma = (noise_var / F::from_f64_lossy(2.0)).sqrt();
        for s in samples.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *s += Complex::new(
                sigma * F::from_f64_lossy(re),
                sigma * F::from_f64_lossy(im),
            );
        }
    }
    Frame::new(samples, packet_len, slots, noise_var)
}

/// Seeded variant of [`superpose_with_rng`]; identical seeds give identical
/// frames.
pub fn superpose_and_add_noise<F: Float>(
    packets: &[Vec<Complex<F>>],
    packet_len: usize,
    slots: usize,
    noise_var: F,
    seed: u64,
) -> Result<Frame<F>, PhyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    superpose_with_rng(packets, packet_len, slots, noise_var, &mut rng)
}

/// Extracts the length-`L` sub-vector of symbol slot `k` (0-based):
/// `y_k[l] = y[l * K + k]`.
pub fn subvector<F: Float>(frame: &Frame<F>, k: usize) -> Result<Vec<Complex<F>>, PhyError> {
    if k >= frame.packet_len {
        return Err(PhyError::IndexOutOfRange {
            index: k,
            len: frame.packet_len,
        });
    }
    Ok((0..frame.slots)
        .map(|l| frame.samples[l * frame.packet_len + k])
        .collect())
}
