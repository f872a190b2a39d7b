//! Dirac-representation gamma matrices and the small amount of 4×4 complex
//! linear algebra the solvers need.
//!
//! Matrices are generic over their scalar so the structural identities can be
//! checked in exact Gaussian-integer arithmetic ([`Matrix4Z`]) while the
//! solvers work in double precision ([`Matrix4C`]).

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Gaussian integer.
pub type GaussInt = Complex<i64>;

/// 4×4 matrix over an arbitrary commutative ring.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix4<T> {
    pub entries: [[T; 4]; 4],
}

pub type Matrix4Z = Matrix4<GaussInt>;
pub type Matrix4C = Matrix4<Complex64>;

/// 2×2 Pauli block.
pub type Matrix2Z = [[GaussInt; 2]; 2];

impl<T: fmt::Debug> fmt::Debug for Matrix4<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter()).finish()
    }
}

impl<T> Matrix4<T>
where
    T: Copy + Zero + One + Add<Output = T> + Mul<Output = T> + Neg<Output = T> + Sub<Output = T>,
{
    pub fn zero() -> Self {
        Self { entries: [[T::zero(); 4]; 4] }
    }

    pub fn identity() -> Self {
        Self::from_diagonal([T::one(); 4])
    }

    pub fn from_diagonal(d: [T; 4]) -> Self {
        let mut m = Self::zero();
        for (i, v) in d.into_iter().enumerate() {
            m.entries[i][i] = v;
        }
        m
    }

    /// Assemble from four 2×2 blocks `[[a, b], [c, d]]`.
    pub fn from_blocks(a: [[T; 2]; 2], b: [[T; 2]; 2], c: [[T; 2]; 2], d: [[T; 2]; 2]) -> Self {
        let mut m = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.entries[i][j] = a[i][j];
                m.entries[i][j + 2] = b[i][j];
                m.entries[i + 2][j] = c[i][j];
                m.entries[i + 2][j + 2] = d[i][j];
            }
        }
        m
    }

    pub fn scale(&self, s: T) -> Self {
        let mut m = *self;
        m.entries.iter_mut().flatten().for_each(|e| *e = *e * s);
        m
    }

    pub fn diagonal(&self) -> [T; 4] {
        std::array::from_fn(|i| self.entries[i][i])
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.entries[i][j] = self.entries[j][i];
            }
        }
        m
    }

    pub fn is_diagonal(&self) -> bool
    where
        T: PartialEq,
    {
        (0..4).all(|i| (0..4).all(|j| i == j || self.entries[i][j] == T::zero()))
    }
}

impl<T> Matrix4<Complex<T>>
where
    T: Copy + num_traits::Num + Neg<Output = T>,
{
    pub fn conj_transpose(&self) -> Self {
        let mut m = *self;
        for i in 0..4 {
            for j in 0..4 {
                m.entries[i][j] = self.entries[j][i].conj();
            }
        }
        m
    }
}

impl Matrix4Z {
    pub fn to_complex(&self) -> Matrix4C {
        let mut m = Matrix4C::zero();
        for i in 0..4 {
            for j in 0..4 {
                let e = self.entries[i][j];
                m.entries[i][j] = Complex64::new(e.re as f64, e.im as f64);
            }
        }
        m
    }
}

impl Matrix4C {
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().flatten().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn apply(&self, v: &Spinor) -> Spinor {
        let mut out = [Complex64::zero(); 4];
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..4 {
                *o += self.entries[i][j] * v.0[j];
            }
        }
        Spinor(out)
    }
}

impl<T> Index<(usize, usize)> for Matrix4<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.entries[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix4<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.entries[i][j]
    }
}

impl<T: Copy + Add<Output = T>> Add for Matrix4<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..4 {
            for j in 0..4 {
                self.entries[i][j] = self.entries[i][j] + rhs.entries[i][j];
            }
        }
        self
    }
}

impl<T: Copy + Sub<Output = T>> Sub for Matrix4<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..4 {
            for j in 0..4 {
                self.entries[i][j] = self.entries[i][j] - rhs.entries[i][j];
            }
        }
        self
    }
}

impl<T: Copy + Neg<Output = T>> Neg for Matrix4<T> {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.entries.iter_mut().flatten().for_each(|e| *e = -*e);
        self
    }
}

impl<T> Mul for Matrix4<T>
where
    T: Copy + Zero + Add<Output = T> + Mul<Output = T>,
{
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut entries = [[T::zero(); 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                for k in 0..4 {
                    *e = *e + self.entries[i][k] * rhs.entries[k][j];
                }
            }
        }
        Self { entries }
    }
}

/// Four-component complex spinor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Spinor(pub [Complex64; 4]);

impl Spinor {
    pub const ZERO: Spinor = Spinor([Complex64::new(0.0, 0.0); 4]);

    pub fn new(c0: Complex64, c1: Complex64, c2: Complex64, c3: Complex64) -> Self {
        Spinor([c0, c1, c2, c3])
    }

    pub fn from_real(v: [f64; 4]) -> Self {
        Spinor(v.map(|x| Complex64::new(x, 0.0)))
    }

    /// Unit spinor along component `i`.
    pub fn basis(i: usize) -> Self {
        let mut s = Self::ZERO;
        s.0[i] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        Spinor(self.0.map(|c| c.conj()))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Spinor(self.0.map(|c| c * s))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| *c == Complex64::zero())
    }
}

impl Index<usize> for Spinor {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Spinor {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for Spinor {
    type Output = Spinor;
    fn add(self, rhs: Spinor) -> Spinor {
        Spinor(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl AddAssign for Spinor {
    fn add_assign(&mut self, rhs: Spinor) {
        for i in 0..4 {
            self.0[i] += rhs.0[i];
        }
    }
}

impl Sub for Spinor {
    type Output = Spinor;
    fn sub(self, rhs: Spinor) -> Spinor {
        Spinor(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Neg for Spinor {
    type Output = Spinor;
    fn neg(self) -> Spinor {
        Spinor(self.0.map(|c| -c))
    }
}

impl Mul<f64> for Spinor {
    type Output = Spinor;
    fn mul(self, s: f64) -> Spinor {
        Spinor(self.0.map(|c| c * s))
    }
}

impl Mul<Complex64> for Spinor {
    type Output = Spinor;
    fn mul(self, s: Complex64) -> Spinor {
        self.scale(s)
    }
}

/// Minkowski metric η = diag(1, −1, −1, −1).
pub fn eta(mu: usize, nu: usize) -> i64 {
    match (mu, nu) {
        (0, 0) => 1,
        (a, b) if a == b => -1,
        _ => 0,
    }
}

/// The Dirac-representation gamma matrices with their Pauli blocks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaBasis {
    pub gamma: [Matrix4Z; 4],
    pub pauli: [Matrix2Z; 3],
}

fn gi(re: i64, im: i64) -> GaussInt {
    GaussInt::new(re, im)
}

/// Pauli matrices σ¹, σ², σ³.
pub fn pauli_matrices() -> [Matrix2Z; 3] {
    let (o, l, i) = (gi(0, 0), gi(1, 0), gi(0, 1));
    [[[o, l], [l, o]], [[o, -i], [i, o]], [[l, o], [o, -l]]]
}

/// γ⁰ = diag(I₂, −I₂), γᵏ = [[0, σᵏ], [−σᵏ, 0]].
pub fn standard_basis() -> GammaBasis {
    let pauli = pauli_matrices();
    let (o, l) = (gi(0, 0), gi(1, 0));
    let zero2 = [[o, o], [o, o]];
    let id2 = [[l, o], [o, l]];
    let neg2 = |m: Matrix2Z| m.map(|row| row.map(|e| -e));
    let gamma0 = Matrix4::from_blocks(id2, zero2, zero2, neg2(id2));
    let spatial = pauli.map(|s| Matrix4::from_blocks(zero2, s, neg2(s), zero2));
    GammaBasis { gamma: [gamma0, spatial[0], spatial[1], spatial[2]], pauli }
}

impl GammaBasis {
    pub fn complex(&self) -> [Matrix4C; 4] {
        self.gamma.map(|g| g.to_complex())
    }
}

/// Cached double-precision copy of the standard basis.
pub fn gammas() -> [Matrix4C; 4] {
    standard_basis().complex()
}

pub fn anticommutator<T>(a: &Matrix4<T>, b: &Matrix4<T>) -> Matrix4<T>
where
    T: Copy + Zero + Add<Output = T> + Mul<Output = T>,
{
    *a * *b + *b * *a
}

/// Maximum violation of {γ^μ, γ^ν} = 2η^{μν} I₄ over all sixteen pairs, in
/// exact arithmetic. Returns 0 for a correct basis.
pub fn clifford_defect(basis: &GammaBasis) -> i64 {
    let mut worst = 0;
    for mu in 0..4 {
        for nu in 0..4 {
            let lhs = anticommutator(&basis.gamma[mu], &basis.gamma[nu]);
            let rhs = Matrix4Z::identity().scale(gi(2 * eta(mu, nu), 0));
            let d = lhs - rhs;
            for e in d.entries.iter().flatten() {
                worst = worst.max(e.re.abs().max(e.im.abs()));
            }
        }
    }
    worst
}

/// `[I₄, γ⁰, γ¹γ², −iγ³γ⁰γ¹γ²γ³]`: the diagonal matrices spanning the
/// block-diagonal mass structure.
pub fn diagonal_products(basis: &GammaBasis) -> Vec<Matrix4Z> {
    let [g0, g1, g2, g3] = basis.gamma;
    vec![
        Matrix4Z::identity(),
        g0,
        g1 * g2,
        (g3 * g0 * g1 * g2 * g3).scale(gi(0, -1)),
    ]
}

/// Rank over ℂ of a list of Gaussian-integer row vectors, computed by
/// division-free elimination so the result is exact.
pub fn exact_rank(rows: &[[GaussInt; 4]]) -> usize {
    let mut a: Vec<[GaussInt; 4]> = rows.to_vec();
    let mut rank = 0;
    for col in 0..4 {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let pivot_row = a[rank];
        let pivot = pivot_row[col];
        for row in a.iter_mut().skip(rank + 1) {
            let factor = row[col];
            if factor.is_zero() {
                continue;
            }
            for k in 0..4 {
                row[k] = pivot * row[k] - factor * pivot_row[k];
            }
        }
        rank += 1;
    }
    rank
}
