//! Clifford ground truth: symplectic tableaus with exact sign tracking,
//! stabilizer measurement with outcome branching, composition, inversion and
//! uniform random sampling.
//!
//! A tableau stores the conjugation images of the generators `X_1..X_n,
//! Z_1..Z_n` as signed Pauli strings. Interpreted as a state it is `U|0…0>`:
//! rows `n..2n` are the stabilizers and rows `0..n` the destabilizers.

use crate::circuit::Gate;
use crate::gf2::{BitMatrix, BitVec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableauError {
    #[error("qubit count mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("forced outcome contradicts a deterministic measurement")]
    ForcedImpossible,
    #[error("measurement outcome is random; a branch choice is required")]
    OutcomeChoiceRequired,
    #[error("matrix is not symplectic")]
    NotSymplectic,
    #[error("invalid tableau text: {0}")]
    Parse(String),
}

/// A signed Pauli string: `(-1)^sign · σ_1 ⊗ … ⊗ σ_n` with
/// `σ_q ∈ {I, X, Y, Z}` encoded by per-qubit x/z bits.
#[derive(Clone, PartialEq, Eq)]
pub struct PauliString {
    n: usize,
    x: BitVec,
    z: BitVec,
    neg: bool,
}

/// Multiplies phase-tracked Paulis: inputs/outputs are `i^phase · X^x Z^z`
/// with `phase` mod 4. Returns the raw (possibly non-Hermitian) phase.
fn mul_raw(
    (x1, z1, p1): (&BitVec, &BitVec, u8),
    (x2, z2, p2): (&BitVec, &BitVec, u8),
) -> (BitVec, BitVec, u8) {
    // X^x1 Z^z1 · X^x2 Z^z2 = (-1)^{z1·x2} X^{x1⊕x2} Z^{z1⊕z2}
    let mut x = x1.clone();
    x.xor_assign(x2);
    let mut z = z1.clone();
    z.xor_assign(z2);
    let swaps = if z1.dot(x2) { 2 } else { 0 };
    (x, z, (p1 + p2 + swaps) % 4)
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self { n, x: BitVec::zeros(n), z: BitVec::zeros(n), neg: false }
    }

    pub fn from_bits(n: usize, x: BitVec, z: BitVec, neg: bool) -> Self {
        assert_eq!(x.len(), n);
        assert_eq!(z.len(), n);
        Self { n, x, z, neg }
    }

    /// Single-generator string `X_q` or (with `z_kind`) `Z_q`.
    pub fn generator(n: usize, q: usize, z_kind: bool) -> Self {
        let mut p = Self::identity(n);
        if z_kind {
            p.z.set(q, true);
        } else {
            p.x.set(q, true);
        }
        p
    }

    /// Parses strings like `XIZY`, `+XX`, `-IZ`.
    pub fn parse(text: &str) -> Result<Self, TableauError> {
        let (neg, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let n = body.chars().count();
        let mut p = Self::identity(n);
        p.neg = neg;
        for (q, c) in body.chars().enumerate() {
            match c.to_ascii_uppercase() {
                'I' => {}
                'X' => p.x.set(q, true),
                'Z' => p.z.set(q, true),
                'Y' => {
                    p.x.set(q, true);
                    p.z.set(q, true);
                }
                other => return Err(TableauError::Parse(format!("bad Pauli letter {other:?}"))),
            }
        }
        Ok(p)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bit(&self, q: usize) -> bool {
        self.x.get(q)
    }

    pub fn z_bit(&self, q: usize) -> bool {
        self.z.get(q)
    }

    pub fn set_x_bit(&mut self, q: usize, v: bool) {
        self.x.set(q, v);
    }

    pub fn set_z_bit(&mut self, q: usize, v: bool) {
        self.z.set(q, v);
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    pub fn set_negative(&mut self, neg: bool) {
        self.neg = neg;
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Qubits where the string acts non-trivially.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x.get(q) || self.z.get(q)).collect()
    }

    /// True when the two strings commute.
    pub fn commutes(&self, other: &Self) -> bool {
        assert_eq!(self.n, other.n);
        !(self.x.dot(&other.z) ^ self.z.dot(&other.x))
    }

    fn y_weight_parity(&self) -> u8 {
        let mut count = 0u8;
        for q in 0..self.n {
            count ^= u8::from(self.x.get(q) && self.z.get(q));
        }
        count
    }

    /// Phase exponent of `i` in the canonical form `i^p X^x Z^z`.
    fn phase_exponent(&self) -> u8 {
        (2 * u8::from(self.neg) + self.y_weight_parity()) % 4
    }

    fn from_raw(n: usize, x: BitVec, z: BitVec, phase: u8) -> Self {
        let mut p = Self { n, x, z, neg: false };
        let e = (4 + phase - p.y_weight_parity()) % 4;
        assert_eq!(e % 2, 0, "non-Hermitian Pauli product");
        p.neg = e == 2;
        p
    }

    /// Hermitian product `self · other`; panics if the factors anticommute.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let (x, z, p) = mul_raw(
            (&self.x, &self.z, self.phase_exponent()),
            (&other.x, &other.z, other.phase_exponent()),
        );
        Self::from_raw(self.n, x, z, p)
    }

    /// `i^k · self · other` for anticommuting factors (k = ±1 mod 4).
    fn mul_with_i(&self, other: &Self, k: u8) -> Self {
        let (x, z, p) = mul_raw(
            (&self.x, &self.z, self.phase_exponent()),
            (&other.x, &other.z, other.phase_exponent()),
        );
        Self::from_raw(self.n, x, z, (p + k) % 4)
    }
}

impl std::fmt::Debug for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", if self.neg { '-' } else { '+' })?;
        for q in 0..self.n {
            let c = match (self.x.get(q), self.z.get(q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// One of the 24 single-qubit Clifford gates, stored as the signed images of
/// X and Z. Image encoding `(x, z, neg)` means `(-1)^neg i^{xz} X^x Z^z`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SingleQubitClifford {
    x_img: (bool, bool, bool),
    z_img: (bool, bool, bool),
}

fn mul1_raw(p: (bool, bool, bool), q: (bool, bool, bool)) -> (bool, bool, u8) {
    let ap = 2 * u8::from(p.2) + u8::from(p.0 && p.1);
    let aq = 2 * u8::from(q.2) + u8::from(q.0 && q.1);
    let swaps = 2 * u8::from(p.1 && q.0);
    ((p.0 ^ q.0), (p.1 ^ q.1), (ap + aq + swaps) % 4)
}

fn canon1(x: bool, z: bool, phase: u8) -> (bool, bool, bool) {
    let e = (4 + phase - u8::from(x && z)) % 4;
    assert_eq!(e % 2, 0, "non-Hermitian single-qubit Pauli");
    (x, z, e == 2)
}

impl SingleQubitClifford {
    pub const IDENTITY: Self =
        Self { x_img: (true, false, false), z_img: (false, true, false) };
    pub const X: Self = Self { x_img: (true, false, false), z_img: (false, true, true) };
    pub const Y: Self = Self { x_img: (true, false, true), z_img: (false, true, true) };
    pub const Z: Self = Self { x_img: (true, false, true), z_img: (false, true, false) };
    pub const H: Self = Self { x_img: (false, true, false), z_img: (true, false, false) };
    pub const S: Self = Self { x_img: (true, true, false), z_img: (false, true, false) };
    pub const SDG: Self = Self { x_img: (true, true, true), z_img: (false, true, false) };
    /// `exp(-iπ/4 X)` up to phase: X→X, Z→Y, Y→-Z.
    pub const SX: Self = Self { x_img: (true, false, false), z_img: (true, true, false) };
    /// `exp(iπ/4 X)` up to phase: X→X, Z→-Y, Y→Z.
    pub const SXDG: Self = Self { x_img: (true, false, false), z_img: (true, true, true) };

    /// All 24 elements.
    pub fn all() -> Vec<Self> {
        let paulis = [(true, false), (false, true), (true, true)];
        let mut out = Vec::with_capacity(24);
        for &(x1, z1) in &paulis {
            for &(x2, z2) in &paulis {
                if (x1, z1) == (x2, z2) {
                    continue;
                }
                for s1 in [false, true] {
                    for s2 in [false, true] {
                        out.push(Self { x_img: (x1, z1, s1), z_img: (x2, z2, s2) });
                    }
                }
            }
        }
        out
    }

    /// Image of the Pauli with bits `(x, z)`; returns `(x', z', sign_flip)`.
    pub fn image_of(&self, x: bool, z: bool) -> (bool, bool, bool) {
        match (x, z) {
            (false, false) => (false, false, false),
            (true, false) => self.x_img,
            (false, true) => self.z_img,
            (true, true) => {
                // Y = i X Z maps to i · x_img · z_img.
                let (px, pz, p) = mul1_raw(
                    (self.x_img.0, self.x_img.1, self.x_img.2),
                    (self.z_img.0, self.z_img.1, self.z_img.2),
                );
                canon1(px, pz, (p + 1) % 4)
            }
        }
    }

    /// Composition: apply `self` first, then `other`.
    pub fn then(&self, other: &Self) -> Self {
        let map = |img: (bool, bool, bool)| {
            let (x, z, neg) = other.image_of(img.0, img.1);
            (x, z, neg ^ img.2)
        };
        Self { x_img: map(self.x_img), z_img: map(self.z_img) }
    }

    pub fn inverse(&self) -> Self {
        Self::all()
            .into_iter()
            .find(|c| self.then(c) == Self::IDENTITY)
            .expect("group is closed under inverses")
    }

    pub fn is_pauli(&self) -> bool {
        self.x_img.0 && !self.x_img.1 && !self.z_img.0 && self.z_img.1
    }

    /// Canonical name: a well-known alias where one exists, else `c<k>` with
    /// `k` the index in [`SingleQubitClifford::all`].
    pub fn name(&self) -> String {
        for (c, name) in Self::named() {
            if c == *self {
                return name.to_string();
            }
        }
        let idx = Self::all().iter().position(|c| c == self).expect("element of the group");
        format!("c{idx}")
    }

    pub fn from_name(name: &str) -> Option<Self> {
        for (c, alias) in Self::named() {
            if alias.eq_ignore_ascii_case(name) {
                return Some(c);
            }
        }
        let idx: usize = name.strip_prefix('c')?.parse().ok()?;
        Self::all().get(idx).copied()
    }

    fn named() -> [(Self, &'static str); 9] {
        [
            (Self::IDENTITY, "id"),
            (Self::X, "x"),
            (Self::Y, "y"),
            (Self::Z, "z"),
            (Self::H, "h"),
            (Self::S, "s"),
            (Self::SDG, "sdg"),
            (Self::SX, "sx"),
            (Self::SXDG, "sxdg"),
        ]
    }
}

impl std::fmt::Debug for SingleQubitClifford {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Outcome of a Pauli measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measurement {
    /// Outcome bit: eigenvalue `(-1)^outcome` of the measured observable.
    pub outcome: bool,
    /// True when the outcome was fixed by the state.
    pub deterministic: bool,
}

/// A Clifford operation on `n` qubits: 2n signed Pauli rows (images of
/// `X_1..X_n` then `Z_1..Z_n`) forming a symplectic matrix with sign bits.
#[derive(Clone, PartialEq, Eq)]
pub struct CliffordTableau {
    n: usize,
    rows: Vec<PauliString>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "tableau needs at least one qubit");
        let rows = (0..n)
            .map(|q| PauliString::generator(n, q, false))
            .chain((0..n).map(|q| PauliString::generator(n, q, true)))
            .collect();
        Self { n, rows }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Image of `X_q` (or `Z_q` with `z_kind`).
    pub fn image(&self, q: usize, z_kind: bool) -> &PauliString {
        &self.rows[q + if z_kind { self.n } else { 0 }]
    }

    /// The 2n×2n symplectic matrix (columns 0..n are X-parts).
    pub fn symplectic_matrix(&self) -> BitMatrix {
        let n = self.n;
        let mut m = BitMatrix::zeros(2 * n, 2 * n);
        for (i, row) in self.rows.iter().enumerate() {
            for q in 0..n {
                m.set(i, q, row.x_bit(q));
                m.set(i, n + q, row.z_bit(q));
            }
        }
        m
    }

    /// Row sign bits, X-image rows first.
    pub fn signs(&self) -> BitVec {
        let mut s = BitVec::zeros(2 * self.n);
        for (i, row) in self.rows.iter().enumerate() {
            s.set(i, row.is_negative());
        }
        s
    }

    pub fn from_symplectic(m: &BitMatrix, signs: &BitVec) -> Result<Self, TableauError> {
        if m.rows() != m.cols() || m.rows() % 2 != 0 || signs.len() != m.rows() {
            return Err(TableauError::NotSymplectic);
        }
        let n = m.rows() / 2;
        let rows = (0..2 * n)
            .map(|i| {
                let mut x = BitVec::zeros(n);
                let mut z = BitVec::zeros(n);
                for q in 0..n {
                    x.set(q, m.get(i, q));
                    z.set(q, m.get(i, n + q));
                }
                PauliString::from_bits(n, x, z, signs.get(i))
            })
            .collect();
        let t = Self { n, rows };
        if !t.is_symplectic() {
            return Err(TableauError::NotSymplectic);
        }
        Ok(t)
    }

    /// Checks the symplectic condition on all row pairs.
    pub fn is_symplectic(&self) -> bool {
        let n = self.n;
        for i in 0..2 * n {
            for j in i + 1..2 * n {
                let want_anticommute = j == i + n;
                if self.rows[i].commutes(&self.rows[j]) == want_anticommute {
                    return false;
                }
            }
        }
        true
    }

    // ----- gate application (conjugation of every row) -----

    pub fn apply_c1(&mut self, q: usize, c: SingleQubitClifford) -> &mut Self {
        assert!(q < self.n);
        for row in &mut self.rows {
            let (x, z, flip) = c.image_of(row.x_bit(q), row.z_bit(q));
            row.set_x_bit(q, x);
            row.set_z_bit(q, z);
            if flip {
                row.neg = !row.neg;
            }
        }
        self
    }

    pub fn apply_h(&mut self, q: usize) -> &mut Self {
        self.apply_c1(q, SingleQubitClifford::H)
    }

    pub fn apply_s(&mut self, q: usize) -> &mut Self {
        self.apply_c1(q, SingleQubitClifford::S)
    }

    pub fn apply_x(&mut self, q: usize) -> &mut Self {
        self.apply_c1(q, SingleQubitClifford::X)
    }

    pub fn apply_z(&mut self, q: usize) -> &mut Self {
        self.apply_c1(q, SingleQubitClifford::Z)
    }

    pub fn apply_cnot(&mut self, c: usize, t: usize) -> &mut Self {
        assert!(c < self.n && t < self.n && c != t);
        for row in &mut self.rows {
            let (xc, zc, xt, zt) =
                (row.x_bit(c), row.z_bit(c), row.x_bit(t), row.z_bit(t));
            if xc && zt && !(xt ^ zc) {
                row.neg = !row.neg;
            }
            row.set_x_bit(t, xt ^ xc);
            row.set_z_bit(c, zc ^ zt);
        }
        self
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> &mut Self {
        assert!(a < self.n && b < self.n && a != b);
        for row in &mut self.rows {
            let (xa, za, xb, zb) =
                (row.x_bit(a), row.z_bit(a), row.x_bit(b), row.z_bit(b));
            if xa && xb && (za ^ zb) {
                row.neg = !row.neg;
            }
            row.set_z_bit(a, za ^ xb);
            row.set_z_bit(b, zb ^ xa);
        }
        self
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) -> &mut Self {
        assert!(a < self.n && b < self.n);
        if a == b {
            return self;
        }
        for row in &mut self.rows {
            let (xa, za) = (row.x_bit(a), row.z_bit(a));
            let (xb, zb) = (row.x_bit(b), row.z_bit(b));
            row.set_x_bit(a, xb);
            row.set_z_bit(a, zb);
            row.set_x_bit(b, xa);
            row.set_z_bit(b, za);
        }
        self
    }

    pub fn apply_fanout(&mut self, control: usize, targets: &[usize]) -> &mut Self {
        for &t in targets {
            self.apply_cnot(control, t);
        }
        self
    }

    /// Conjugation by `exp(i · eighth_turns · π/4 · P)`. Any integer number
    /// of eighth turns is Clifford.
    pub fn apply_rotation(&mut self, axis: &PauliString, eighth_turns: i8) -> &mut Self {
        assert_eq!(axis.num_qubits(), self.n);
        let k = eighth_turns.rem_euclid(8) as u8;
        match k % 4 {
            0 => {}
            2 => {
                // exp(i π/2 P) ∝ P: flip the sign of anticommuting rows.
                for row in &mut self.rows {
                    if !axis.commutes(row) {
                        row.neg = !row.neg;
                    }
                }
            }
            odd => {
                // Q ↦ iPQ for k ≡ 1 (mod 4), Q ↦ -iPQ for k ≡ 3 (mod 4).
                let i_power = if odd == 1 { 1 } else { 3 };
                for row in &mut self.rows {
                    if !axis.commutes(row) {
                        *row = axis.mul_with_i(row, i_power);
                    }
                }
            }
        }
        self
    }

    /// Conjugation by a Pauli layer: anticommuting rows flip sign.
    pub fn apply_pauli(&mut self, p: &PauliString) -> &mut Self {
        assert_eq!(p.num_qubits(), self.n);
        for row in &mut self.rows {
            if !p.commutes(row) {
                row.neg = !row.neg;
            }
        }
        self
    }

    /// Clique flip on `set`: CZ on every pair. Implemented as the Pauli
    /// rotation `exp(-iπ/4 Z⊗…⊗Z)` with an S† correction on each involved
    /// qubit, which is the same operation up to global phase.
    pub fn apply_clique_flip(&mut self, set: &[usize]) -> &mut Self {
        assert!(set.len() >= 2, "clique flips act on at least two qubits");
        let mut axis = PauliString::identity(self.n);
        for &q in set {
            axis.set_z_bit(q, true);
        }
        self.apply_rotation(&axis, -1);
        for &q in set {
            self.apply_c1(q, SingleQubitClifford::SDG);
        }
        self
    }

    /// XCX clique flip: the Hadamard conjugate of a clique flip, applying
    /// `XCX = H⊗H · CZ · H⊗H` on every pair of `set`. Implemented as
    /// `exp(-iπ/4 X⊗…⊗X)` with `H S† H` corrections.
    pub fn apply_xcx_clique_flip(&mut self, set: &[usize]) -> &mut Self {
        assert!(set.len() >= 2, "clique flips act on at least two qubits");
        let mut axis = PauliString::identity(self.n);
        for &q in set {
            axis.set_x_bit(q, true);
        }
        self.apply_rotation(&axis, -1);
        let hsdgh = SingleQubitClifford::H
            .then(&SingleQubitClifford::SDG)
            .then(&SingleQubitClifford::H);
        for &q in set {
            self.apply_c1(q, hsdgh);
        }
        self
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> &mut Self {
        gate.apply_to(self);
        self
    }

    // ----- composition -----

    /// Image of an arbitrary signed Pauli under this tableau.
    pub fn image_of_pauli(&self, p: &PauliString) -> PauliString {
        assert_eq!(p.num_qubits(), self.n);
        let mut x = BitVec::zeros(self.n);
        let mut z = BitVec::zeros(self.n);
        let mut phase = p.phase_exponent();
        for q in 0..self.n {
            if p.x_bit(q) {
                let r = self.image(q, false);
                let (nx, nz, np) =
                    mul_raw((&x, &z, phase), (&r.x, &r.z, r.phase_exponent()));
                x = nx;
                z = nz;
                phase = np;
            }
            if p.z_bit(q) {
                let r = self.image(q, true);
                let (nx, nz, np) =
                    mul_raw((&x, &z, phase), (&r.x, &r.z, r.phase_exponent()));
                x = nx;
                z = nz;
                phase = np;
            }
        }
        PauliString::from_raw(self.n, x, z, phase)
    }

    /// `compose(A, B)`: the operation "apply A, then B".
    pub fn compose(&self, then: &Self) -> Result<Self, TableauError> {
        if self.n != then.n {
            return Err(TableauError::SizeMismatch(self.n, then.n));
        }
        let rows = self.rows.iter().map(|r| then.image_of_pauli(r)).collect();
        Ok(Self { n: self.n, rows })
    }

    pub fn inverse(&self) -> Self {
        let n = self.n;
        // Symplectic inverse: Λ Mᵀ Λ, then fix signs so that mapping each
        // candidate row through `self` reproduces the generator exactly.
        let mt = self.symplectic_matrix().transpose();
        let mut inv = BitMatrix::zeros(2 * n, 2 * n);
        for i in 0..2 * n {
            for j in 0..2 * n {
                inv.set(i, j, mt.get((i + n) % (2 * n), (j + n) % (2 * n)));
            }
        }
        let mut t =
            Self::from_symplectic(&inv, &BitVec::zeros(2 * n)).expect("inverse is symplectic");
        for i in 0..2 * n {
            if self.image_of_pauli(&t.rows[i]).is_negative() {
                t.rows[i].neg = true;
            }
        }
        t
    }

    /// Equality of the symplectic part, optionally ignoring signs.
    pub fn equals(&self, other: &Self, up_to_sign: bool) -> bool {
        if self.n != other.n {
            return false;
        }
        self.rows.iter().zip(&other.rows).all(|(a, b)| {
            a.x == b.x && a.z == b.z && (up_to_sign || a.neg == b.neg)
        })
    }

    /// If `self` and `other` differ by a final Pauli layer, returns the layer
    /// `P` with `compose(self, P-layer) == other` exactly.
    pub fn pauli_difference(&self, other: &Self) -> Option<PauliString> {
        if !self.equals(other, true) {
            return None;
        }
        // P anticommutes with X_q iff it has a Z component at q, which flips
        // the sign of the X_q image; X components flip Z_q images.
        let mut p = PauliString::identity(self.n);
        for q in 0..self.n {
            let flip_x = self.rows[q].is_negative() != other.rows[q].is_negative();
            let flip_z =
                self.rows[q + self.n].is_negative() != other.rows[q + self.n].is_negative();
            p.set_z_bit(q, flip_x);
            p.set_x_bit(q, flip_z);
        }
        let mut check = self.clone();
        check.apply_pauli(&p);
        check.equals(other, false).then_some(p)
    }

    /// Embeds a smaller tableau at `offset` (identity elsewhere).
    pub fn embed(&self, n: usize, offset: usize) -> Self {
        assert!(offset + self.n <= n);
        let mut t = Self::identity(n);
        for (i, row) in self.rows.iter().enumerate() {
            let q = i % self.n;
            let big = q + offset + if i >= self.n { n } else { 0 };
            let mut x = BitVec::zeros(n);
            let mut z = BitVec::zeros(n);
            for s in 0..self.n {
                x.set(s + offset, row.x_bit(s));
                z.set(s + offset, row.z_bit(s));
            }
            t.rows[big] = PauliString::from_bits(n, x, z, row.is_negative());
        }
        t
    }

    // ----- measurement (state semantics: stabilizers are the Z-images) -----

    /// Measures the observable `obs` on the state `U|0…0>`.
    ///
    /// For a deterministic outcome `forced` must agree (or be `None`). For a
    /// random outcome `forced` selects the branch; `None` is an error so that
    /// branch enumeration stays explicit.
    pub fn measure_pauli(
        &mut self,
        obs: &PauliString,
        forced: Option<bool>,
    ) -> Result<Measurement, TableauError> {
        if obs.num_qubits() != self.n {
            return Err(TableauError::SizeMismatch(obs.num_qubits(), self.n));
        }
        let n = self.n;
        let pivot_row = (n..2 * n).find(|&i| !self.rows[i].commutes(obs));
        if let Some(p) = pivot_row {
            let outcome = forced.ok_or(TableauError::OutcomeChoiceRequired)?;
            let pivot = self.rows[p].clone();
            for i in 0..2 * n {
                if i != p && i != p - n && !self.rows[i].commutes(obs) {
                    self.rows[i] = self.rows[i].mul(&pivot);
                }
            }
            self.rows[p - n] = pivot;
            let mut new_stab = obs.clone();
            if outcome {
                new_stab.neg = !new_stab.neg;
            }
            self.rows[p] = new_stab;
            Ok(Measurement { outcome, deterministic: false })
        } else {
            // Deterministic: the stabilizer product indicated by the
            // anticommuting destabilizers equals ±obs.
            let mut acc = PauliString::identity(n);
            for q in 0..n {
                if !self.rows[q].commutes(obs) {
                    acc = acc.mul(&self.rows[q + n]);
                }
            }
            debug_assert!(acc.x == obs.x && acc.z == obs.z, "observable not in the group");
            let outcome = acc.is_negative() != obs.is_negative();
            if let Some(f) = forced {
                if f != outcome {
                    return Err(TableauError::ForcedImpossible);
                }
            }
            Ok(Measurement { outcome, deterministic: true })
        }
    }

    // ----- random sampling -----

    /// A uniformly random Clifford tableau, deterministic per seed.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with_rng(n, &mut rng)
    }

    pub fn random_with_rng(n: usize, rng: &mut impl Rng) -> Self {
        let mut t = Self::random_symplectic(n, rng);
        for row in &mut t.rows {
            row.neg = rng.gen();
        }
        t
    }

    fn random_symplectic(n: usize, rng: &mut impl Rng) -> Self {
        // Sample the images of X_1, Z_1 uniformly (a nonzero Pauli and an
        // anticommuting partner), extend to a Clifford with those images,
        // and recurse on the remaining qubits.
        fn random_pauli(n: usize, rng: &mut impl Rng) -> PauliString {
            let mut p = PauliString::identity(n);
            for q in 0..n {
                p.set_x_bit(q, rng.gen());
                p.set_z_bit(q, rng.gen());
            }
            p
        }
        let v = loop {
            let p = random_pauli(n, rng);
            if !p.is_identity() {
                break p;
            }
        };
        let w = loop {
            let p = random_pauli(n, rng);
            if !p.commutes(&v) {
                break p;
            }
        };
        let c = Self::completion(n, &v, &w);
        if n == 1 {
            return c;
        }
        let inner = Self::random_symplectic(n - 1, rng).embed(n, 1);
        inner.compose(&c).expect("equal sizes")
    }

    /// A Clifford mapping `X_0 ↦ v`, `Z_0 ↦ w` exactly (signs included).
    fn completion(n: usize, v: &PauliString, w: &PauliString) -> Self {
        assert!(!v.is_identity() && !v.commutes(w));
        // Build D with D(v) = X_0 and D(w) = Z_0 as a gate sequence; the
        // completion is D⁻¹.
        let mut d = Self::identity(n);
        let mut v = v.clone();
        let mut w = w.clone();
        let mut apply = |d: &mut Self, v: &mut PauliString, w: &mut PauliString, g: &Gate| {
            d.apply_gate(g);
            let mut step = Self::identity(n);
            step.apply_gate(g);
            *v = step.image_of_pauli(v);
            *w = step.image_of_pauli(w);
        };
        // 1. make v X-only
        for q in 0..n {
            match (v.x_bit(q), v.z_bit(q)) {
                (false, true) => {
                    apply(&mut d, &mut v, &mut w, &Gate::single(q, SingleQubitClifford::H))
                }
                (true, true) => {
                    apply(&mut d, &mut v, &mut w, &Gate::single(q, SingleQubitClifford::SDG))
                }
                _ => {}
            }
        }
        // 2. fold the X support onto its first qubit
        let support: Vec<usize> = (0..n).filter(|&q| v.x_bit(q)).collect();
        let head = support[0];
        for &q in &support[1..] {
            apply(&mut d, &mut v, &mut w, &Gate::Cnot { control: head, target: q });
        }
        // 3. bring it to qubit 0
        if head != 0 {
            apply(&mut d, &mut v, &mut w, &Gate::Swap(head, 0));
        }
        debug_assert!(v.x_bit(0) && !v.z_bit(0));
        // 4. w anticommutes with X_0, so it has a Z component at qubit 0
        if w.x_bit(0) {
            apply(&mut d, &mut v, &mut w, &Gate::single(0, SingleQubitClifford::SXDG));
        }
        // 5. clear w outside qubit 0 with gates that fix X_0
        for q in 1..n {
            match (w.x_bit(q), w.z_bit(q)) {
                (true, false) => {
                    apply(&mut d, &mut v, &mut w, &Gate::single(q, SingleQubitClifford::H))
                }
                (true, true) => {
                    apply(&mut d, &mut v, &mut w, &Gate::single(q, SingleQubitClifford::SXDG))
                }
                _ => {}
            }
        }
        for q in 1..n {
            if w.z_bit(q) {
                apply(&mut d, &mut v, &mut w, &Gate::Cnot { control: q, target: 0 });
            }
        }
        debug_assert!(v.support() == [0] && w.support() == [0]);
        debug_assert!(w.z_bit(0) && !w.x_bit(0));
        // 6. sign fixes
        if v.is_negative() {
            apply(&mut d, &mut v, &mut w, &Gate::single(0, SingleQubitClifford::Z));
        }
        if w.is_negative() {
            apply(&mut d, &mut v, &mut w, &Gate::single(0, SingleQubitClifford::X));
        }
        d.inverse()
    }

    // ----- text format -----

    /// Emits the text form: `n=<k>`, then 2n rows of 2n bits (X-part columns
    /// first, X-image rows first), then one row of 2n sign bits.
    pub fn to_text(&self) -> String {
        let n = self.n;
        let mut out = format!("n={n}\n");
        for row in &self.rows {
            for q in 0..n {
                out.push(if row.x_bit(q) { '1' } else { '0' });
            }
            for q in 0..n {
                out.push(if row.z_bit(q) { '1' } else { '0' });
            }
            out.push('\n');
        }
        for row in &self.rows {
            out.push(if row.is_negative() { '1' } else { '0' });
        }
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self, TableauError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| TableauError::Parse("empty input".into()))?;
        let n: usize = header
            .trim()
            .strip_prefix("n=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| TableauError::Parse(format!("expected n=<k>, got {header:?}")))?;
        let parse_bits = |line: &str, len: usize| -> Result<Vec<bool>, TableauError> {
            let bits: Vec<bool> = line
                .trim()
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(TableauError::Parse(format!("bad bit {other:?}"))),
                })
                .collect::<Result<_, _>>()?;
            if bits.len() != len {
                return Err(TableauError::Parse(format!(
                    "expected {len} bits, got {}",
                    bits.len()
                )));
            }
            Ok(bits)
        };
        let mut m = BitMatrix::zeros(2 * n, 2 * n);
        for i in 0..2 * n {
            let line = lines
                .next()
                .ok_or_else(|| TableauError::Parse(format!("missing row {}", i + 1)))?;
            for (j, bit) in parse_bits(line, 2 * n)?.into_iter().enumerate() {
                m.set(i, j, bit);
            }
        }
        let sign_line =
            lines.next().ok_or_else(|| TableauError::Parse("missing sign row".into()))?;
        let mut signs = BitVec::zeros(2 * n);
        for (i, bit) in parse_bits(sign_line, 2 * n)?.into_iter().enumerate() {
            signs.set(i, bit);
        }
        Self::from_symplectic(&m, &signs)
    }
}

impl std::fmt::Debug for CliffordTableau {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            let label = if i < self.n {
                format!("X{}", i + 1)
            } else {
                format!("Z{}", i - self.n + 1)
            };
            writeln!(f, "{label} -> {row:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    #[test]
    fn identity_images() {
        let t = CliffordTableau::identity(3);
        assert_eq!(t.symplectic_matrix(), BitMatrix::identity(6));
        assert!(t.is_symplectic());
        for q in 0..3 {
            assert_eq!(*t.image(q, false), PauliString::generator(3, q, false));
        }
    }

    #[test]
    fn cz_conjugation_table() {
        let mut t = CliffordTableau::identity(2);
        t.apply_cz(0, 1);
        assert_eq!(format!("{:?}", t.image(0, false)), "+XZ");
        assert_eq!(format!("{:?}", t.image(1, false)), "+ZX");
        assert_eq!(format!("{:?}", t.image(0, true)), "+ZI");
    }

    #[test]
    fn single_qubit_group_closure() {
        let all = SingleQubitClifford::all();
        assert_eq!(all.len(), 24);
        for a in &all {
            for b in &all {
                assert!(all.contains(&a.then(b)));
            }
            assert_eq!(a.then(&a.inverse()), SingleQubitClifford::IDENTITY);
        }
    }

    #[test]
    fn hadamard_y_image() {
        // H: Y -> -Y
        assert_eq!(SingleQubitClifford::H.image_of(true, true), (true, true, true));
    }

    #[test]
    fn clique_flip_equals_pairwise_cz() {
        for size in 2..=5 {
            let set: Vec<usize> = (0..size).collect();
            let mut via_flip = CliffordTableau::identity(size);
            via_flip.apply_clique_flip(&set);
            let mut via_cz = CliffordTableau::identity(size);
            for i in 0..size {
                for j in i + 1..size {
                    via_cz.apply_cz(i, j);
                }
            }
            assert!(via_flip.equals(&via_cz, false), "clique size {size}");
        }
    }

    #[test]
    fn xcx_clique_flip_is_h_conjugated_clique_flip() {
        for size in 2..=5 {
            let set: Vec<usize> = (0..size).collect();
            let mut direct = CliffordTableau::identity(size);
            direct.apply_xcx_clique_flip(&set);
            let mut conj = CliffordTableau::identity(size);
            for q in 0..size {
                conj.apply_h(q);
            }
            conj.apply_clique_flip(&set);
            for q in 0..size {
                conj.apply_h(q);
            }
            assert!(direct.equals(&conj, false), "clique size {size}");
        }
    }

    #[test]
    fn fanout_equals_cnots() {
        let mut a = CliffordTableau::identity(3);
        a.apply_fanout(0, &[1, 2]);
        let mut b = CliffordTableau::identity(3);
        b.apply_cnot(0, 1).apply_cnot(0, 2);
        assert!(a.equals(&b, false));
    }

    #[test]
    fn compose_identity_laws() {
        let t = CliffordTableau::random(4, 7);
        let id = CliffordTableau::identity(4);
        assert!(id.compose(&t).unwrap().equals(&t, false));
        assert!(t.compose(&id).unwrap().equals(&t, false));
    }

    #[test]
    fn cz_self_inverse_and_inverse_involution() {
        let mut cz = CliffordTableau::identity(2);
        cz.apply_cz(0, 1);
        let sq = cz.compose(&cz).unwrap();
        assert!(sq.equals(&CliffordTableau::identity(2), false));

        let t = CliffordTableau::random(3, 99);
        assert!(t.inverse().inverse().equals(&t, false));
        let comp = t.compose(&t.inverse()).unwrap();
        assert!(comp.equals(&CliffordTableau::identity(3), false));
    }

    #[test]
    fn apply_gate_preserves_symplectic_randomly() {
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let mut t = CliffordTableau::random_with_rng(4, &mut rng);
            let gates = [
                Gate::Cnot { control: 0, target: 2 },
                Gate::single(1, SingleQubitClifford::S),
                Gate::CliqueFlip(vec![0, 1, 3]),
                Gate::XcxCliqueFlip(vec![1, 2]),
                Gate::FanOut { control: 2, targets: vec![0, 3] },
                Gate::Swap(0, 3),
                Gate::PauliRotation {
                    axis: PauliString::parse("XZYI").unwrap(),
                    eighth_turns: 1,
                },
            ];
            for g in &gates {
                t.apply_gate(g);
                assert!(t.is_symplectic(), "gate {g:?} broke the form");
            }
        }
    }

    #[test]
    fn measure_z_on_zero_state() {
        let mut t = CliffordTableau::identity(1);
        let m = t.measure_pauli(&PauliString::parse("Z").unwrap(), None).unwrap();
        assert!(m.deterministic);
        assert!(!m.outcome);
    }

    #[test]
    fn measure_x_forced_projects_to_plus() {
        let mut t = CliffordTableau::identity(1);
        let m = t.measure_pauli(&PauliString::parse("X").unwrap(), Some(false)).unwrap();
        assert!(!m.deterministic);
        assert!(!m.outcome);
        // X is now a stabilizer: measuring again is deterministic 0
        let m2 = t.measure_pauli(&PauliString::parse("X").unwrap(), None).unwrap();
        assert!(m2.deterministic);
        assert!(!m2.outcome);
    }

    #[test]
    fn measure_zz_on_plus_plus_has_both_branches() {
        let obs = PauliString::parse("ZZ").unwrap();
        for branch in [false, true] {
            let mut t = CliffordTableau::identity(2);
            t.apply_h(0).apply_h(1);
            let m = t.measure_pauli(&obs, Some(branch)).unwrap();
            assert!(!m.deterministic);
            assert_eq!(m.outcome, branch);
            let again = t.measure_pauli(&obs, None).unwrap();
            assert!(again.deterministic);
            assert_eq!(again.outcome, branch);
        }
    }

    #[test]
    fn forced_impossible_is_rejected() {
        let mut t = CliffordTableau::identity(1);
        let err = t.measure_pauli(&PauliString::parse("Z").unwrap(), Some(true));
        assert_eq!(err, Err(TableauError::ForcedImpossible));
    }

    #[test]
    fn random_clifford_is_deterministic_per_seed() {
        let a = CliffordTableau::random(5, 42);
        let b = CliffordTableau::random(5, 42);
        assert!(a.equals(&b, false));
    }

    #[test]
    fn random_clifford_always_symplectic() {
        for seed in 0..40 {
            let t = CliffordTableau::random(1 + (seed as usize % 6), seed);
            assert!(t.is_symplectic(), "seed {seed}");
        }
    }

    #[test]
    fn random_clifford_n2_covers_all_720_symplectic_classes() {
        use rand_chacha::rand_core::SeedableRng;
        use std::collections::HashSet;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut seen: HashSet<Vec<u8>> = HashSet::new();
        for _ in 0..10_000 {
            let t = CliffordTableau::random_with_rng(2, &mut rng);
            let m = t.symplectic_matrix();
            let key: Vec<u8> = (0..4)
                .flat_map(|r| (0..4).map(move |c| (r, c)))
                .map(|(r, c)| u8::from(m.get(r, c)))
                .collect();
            seen.insert(key);
        }
        assert_eq!(seen.len(), 720);
    }

    #[test]
    fn pauli_difference_roundtrip() {
        let t = CliffordTableau::random(4, 11);
        let mut shifted = t.clone();
        shifted.apply_pauli(&PauliString::parse("XYIZ").unwrap());
        let p = t.pauli_difference(&shifted).expect("same symplectic part");
        let mut fixed = t.clone();
        fixed.apply_pauli(&p);
        assert!(fixed.equals(&shifted, false));
    }

    #[test]
    fn text_roundtrip() {
        let t = CliffordTableau::random(4, 5);
        let back = CliffordTableau::from_text(&t.to_text()).unwrap();
        assert!(t.equals(&back, false));
    }

    #[test]
    fn text_rejects_non_symplectic() {
        let text = "n=1\n11\n11\n00\n";
        assert!(CliffordTableau::from_text(text).is_err());
    }
}
