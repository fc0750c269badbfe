//! The Knizhnik-Zamolodchikov connection for su(2) at level k:
//!
//! ```text
//! dF/dz_i = 1/(k+2) * sum_{j != i} Omega_{ij} / (z_i - z_j) * F
//! ```
//!
//! acting on the classical invariant subspace of a tensor product of spin
//! representations. The module builds the pairwise Casimir exchange
//! operators, parallel-transports along explicit paths of point
//! configurations with an adaptive embedded Runge-Kutta integrator, extracts
//! monodromy matrices of closed loops, and compares their spectra against the
//! quantum-group prediction `{e^{2 pi i w/(k+2)} : w in eig(Omega)}`.
//!
//! Restriction to the invariant subspace is the standard genus-zero
//! reduction: the exchange operators commute with the total su(2) action, so
//! they preserve it, and the connection restricts.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::max_abs_real;

/// Default minimum pairwise distance along a configuration path.
pub const DEFAULT_CLEARANCE: f64 = 1e-3;

/// Relative tolerance of the adaptive integrator.
const ODE_REL_TOL: f64 = 1e-10;
/// Absolute tolerance of the adaptive integrator.
const ODE_ABS_TOL: f64 = 1e-12;
/// Step budget per path.
const ODE_MAX_STEPS: usize = 1_000_000;

/// Largest tensor-product dimension the constructor accepts.
const MAX_PRODUCT_DIM: usize = 4096;

/// A level, a list of spins, and the invariant subspace of their tensor
/// product.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    level: usize,
    /// Doubled spins (2j), so spin-1/2 is stored as 1.
    two_spins: Vec<u32>,
    /// Orthonormal basis of the invariant subspace, one column per basis
    /// vector, in the product basis (dimension: product_dim x invariant_dim).
    invariant_basis: DMatrix<f64>,
}

/// Local spin-j matrices in the basis m = j, j-1, ..., -j.
fn local_sz(two_j: u32) -> DMatrix<f64> {
    let d = two_j as usize + 1;
    DMatrix::from_fn(d, d, |r, c| {
        if r == c {
            (two_j as f64 - 2.0 * r as f64) / 2.0
        } else {
            0.0
        }
    })
}

/// Raising operator: <m+1| S+ |m> = sqrt((j-m)(j+m+1)).
fn local_sp(two_j: u32) -> DMatrix<f64> {
    let d = two_j as usize + 1;
    let j = two_j as f64 / 2.0;
    DMatrix::from_fn(d, d, |r, c| {
        if c == r + 1 {
            let m = j - c as f64;
            ((j - m) * (j + m + 1.0)).sqrt()
        } else {
            0.0
        }
    })
}

/// Number of singlets in the tensor product, by iterated Clebsch-Gordan
/// decomposition over doubled total spins.
fn singlet_count(two_spins: &[u32]) -> u64 {
    // multiplicities[two_J] = how many copies of total spin J so far.
    let mut mult: Vec<u64> = vec![1];
    for &tj in two_spins {
        let tj = tj as usize;
        let mut next = vec![0u64; mult.len() + tj];
        for (tcur, &m) in mult.iter().enumerate() {
            if m == 0 {
                continue;
            }
            let lo = tcur.abs_diff(tj);
            let hi = tcur + tj;
            let mut t = lo;
            while t <= hi {
                next[t] += m;
                t += 2;
            }
        }
        mult = next;
    }
    mult[0]
}

impl SpinSystem {
    /// Build the system and its invariant subspace.
    ///
    /// The subspace is computed as the joint kernel of the total `S^z` and
    /// total `S^+` (a vector killed by both is killed by all of su(2)), and
    /// its dimension is verified against the independent Clebsch-Gordan
    /// singlet count.
    pub fn new(level: usize, two_spins: &[u32]) -> Result<Self> {
        if level == 0 {
            return Err(Error::Domain("level must be positive".into()));
        }
        if two_spins.is_empty() {
            return Err(Error::Domain("at least one spin is required".into()));
        }
        let mut dim: usize = 1;
        for &tj in two_spins {
            dim = dim.saturating_mul(tj as usize + 1);
            if dim > MAX_PRODUCT_DIM {
                return Err(Error::SurfaceCap {
                    what: "tensor product dimension".into(),
                    value: dim,
                    cap: MAX_PRODUCT_DIM,
                });
            }
        }
        let sys_partial = SpinSystem {
            level,
            two_spins: two_spins.to_vec(),
            invariant_basis: DMatrix::zeros(dim, 0),
        };
        let sz_tot = sys_partial.total_operator(local_sz);
        let sp_tot = sys_partial.total_operator(local_sp);
        let mut stacked = DMatrix::zeros(2 * dim, dim);
        stacked.view_mut((0, 0), (dim, dim)).copy_from(&sz_tot);
        stacked.view_mut((dim, 0), (dim, dim)).copy_from(&sp_tot);
        let kernel = crate::linalg::real_nullspace(&stacked, 1e-12);
        let expected = singlet_count(two_spins);
        if kernel.len() as u64 != expected {
            return Err(Error::CheckFailed {
                check: format!(
                    "invariant subspace dimension equals the singlet count {expected}"
                ),
                residual: kernel.len() as f64,
                tol: expected as f64,
            });
        }
        let mut basis = DMatrix::zeros(dim, kernel.len());
        for (c, v) in kernel.iter().enumerate() {
            // Deterministic orientation: first nonzero component positive.
            let sign = v
                .iter()
                .find(|x| x.abs() > 1e-9)
                .map(|x| x.signum())
                .unwrap_or(1.0);
            basis.column_mut(c).copy_from(&(v * sign));
        }
        Ok(SpinSystem {
            level,
            two_spins: two_spins.to_vec(),
            invariant_basis: basis,
        })
    }

    /// The shipped reference configuration: four spin-1/2 legs.
    pub fn four_spin_half(level: usize) -> Result<Self> {
        SpinSystem::new(level, &[1, 1, 1, 1])
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn two_spins(&self) -> &[u32] {
        &self.two_spins
    }

    pub fn legs(&self) -> usize {
        self.two_spins.len()
    }

    pub fn product_dimension(&self) -> usize {
        self.invariant_basis.nrows()
    }

    pub fn invariant_dimension(&self) -> usize {
        self.invariant_basis.ncols()
    }

    pub fn invariant_basis(&self) -> &DMatrix<f64> {
        &self.invariant_basis
    }

    /// Embed a local operator on one leg: I x ... x op x ... x I.
    fn leg_operator(&self, leg: usize, local: impl Fn(u32) -> DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::identity(1, 1);
        for (i, &tj) in self.two_spins.iter().enumerate() {
            let d = tj as usize + 1;
            let factor = if i == leg {
                local(tj)
            } else {
                DMatrix::identity(d, d)
            };
            out = out.kronecker(&factor);
        }
        out
    }

    /// Sum of a local operator over all legs.
    fn total_operator(&self, local: impl Fn(u32) -> DMatrix<f64> + Copy) -> DMatrix<f64> {
        let dim: usize = self.two_spins.iter().map(|&tj| tj as usize + 1).product();
        let mut out = DMatrix::zeros(dim, dim);
        for leg in 0..self.two_spins.len() {
            out += self.leg_operator(leg, local);
        }
        out
    }
}

/// The pairwise Casimir exchange operator `Omega_{ij} = S_i . S_j` restricted
/// to the invariant subspace.
#[derive(Debug, Clone)]
pub struct ExchangeOperator {
    pub i: usize,
    pub j: usize,
    /// Real symmetric matrix on the invariant subspace.
    pub matrix: DMatrix<f64>,
}

/// Build `Omega_{ij}` on the invariant subspace.
///
/// The full-space operator is
/// `Sz_i Sz_j + (S+_i S-_j + S-_i S+_j)/2`; it commutes with the total su(2)
/// action, hence preserves the invariant subspace, and its restriction is
/// verified symmetric and with spectrum inside the Clebsch-Gordan set
/// `{(c(jt) - c(j_i) - c(j_j))/2}` with `c(j) = j(j+1)`.
pub fn casimir_exchange(sys: &SpinSystem, i: usize, j: usize) -> Result<ExchangeOperator> {
    let n = sys.legs();
    if i == j || i >= n || j >= n {
        return Err(Error::Domain(format!(
            "exchange operator needs two distinct legs below {n}, got ({i}, {j})"
        )));
    }
    let sm = |tj: u32| local_sp(tj).transpose();
    let szsz = sys.leg_operator(i, local_sz) * sys.leg_operator(j, local_sz);
    let pm = sys.leg_operator(i, local_sp) * sys.leg_operator(j, sm);
    let mp = sys.leg_operator(i, sm) * sys.leg_operator(j, local_sp);
    let full = szsz + (pm + mp) * 0.5;
    let b = sys.invariant_basis();
    let projected = b.transpose() * &full * b;

    // The restriction must be symmetric (it is the compression of a symmetric
    // operator to an invariant subspace in an orthonormal basis).
    let asym = max_abs_real(&(&projected - projected.transpose()));
    if asym > 1e-10 {
        return Err(Error::CheckFailed {
            check: format!("exchange operator ({i},{j}) is symmetric"),
            residual: asym,
            tol: 1e-10,
        });
    }
    let matrix = (&projected + projected.transpose()) * 0.5;

    // Spectrum check against the allowed pair-channel values.
    let ji = sys.two_spins[i] as f64 / 2.0;
    let jj = sys.two_spins[j] as f64 / 2.0;
    let c = |s: f64| s * (s + 1.0);
    let mut allowed = Vec::new();
    let mut tjt = sys.two_spins[i].abs_diff(sys.two_spins[j]);
    while tjt <= sys.two_spins[i] + sys.two_spins[j] {
        let jt = tjt as f64 / 2.0;
        allowed.push((c(jt) - c(ji) - c(jj)) / 2.0);
        tjt += 2;
    }
    if matrix.nrows() > 0 {
        let eigs = matrix.clone().symmetric_eigen().eigenvalues;
        for &e in eigs.iter() {
            let best = allowed
                .iter()
                .map(|a| (e - a).abs())
                .fold(f64::INFINITY, f64::min);
            if best > 1e-9 {
                return Err(Error::CheckFailed {
                    check: format!(
                        "exchange eigenvalue {e} lies in the pair-channel set {allowed:?}"
                    ),
                    residual: best,
                    tol: 1e-9,
                });
            }
        }
    }
    Ok(ExchangeOperator { i, j, matrix })
}

/// One smooth piece of a configuration path.
#[derive(Debug, Clone)]
pub enum ConfigMove {
    /// Straight-line interpolation of every point to the target configuration.
    LinearTo(Vec<Complex64>),
    /// Rigid rotation of the listed slots about a center by a signed angle
    /// (positive = counterclockwise); all other points stay fixed.
    Rotate {
        slots: Vec<usize>,
        center: Complex64,
        angle: f64,
    },
}

/// A piecewise-smooth path of point configurations, built from named moves.
#[derive(Debug, Clone)]
pub struct ConfigPath {
    start: Vec<Complex64>,
    moves: Vec<ConfigMove>,
    clearance: f64,
}

/// Configuration at the end of one move that starts at `from`.
fn move_endpoint(from: &[Complex64], mv: &ConfigMove) -> Vec<Complex64> {
    match mv {
        ConfigMove::LinearTo(target) => target.clone(),
        ConfigMove::Rotate {
            slots,
            center,
            angle,
        } => {
            let rot = Complex64::from_polar(1.0, *angle);
            let mut out = from.to_vec();
            for &s in slots {
                out[s] = center + (from[s] - center) * rot;
            }
            out
        }
    }
}

/// Position and velocity at parameter `t` in [0, 1] of one move.
fn move_state(from: &[Complex64], mv: &ConfigMove, t: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = from.len();
    match mv {
        ConfigMove::LinearTo(target) => {
            let z = (0..n).map(|i| from[i] + (target[i] - from[i]) * t).collect();
            let zdot = (0..n).map(|i| target[i] - from[i]).collect();
            (z, zdot)
        }
        ConfigMove::Rotate {
            slots,
            center,
            angle,
        } => {
            let mut z: Vec<Complex64> = from.to_vec();
            let mut zdot = vec![Complex64::new(0.0, 0.0); n];
            let rot = Complex64::from_polar(1.0, angle * t);
            for &s in slots {
                let rel = (from[s] - center) * rot;
                z[s] = center + rel;
                zdot[s] = Complex64::new(0.0, 1.0) * *angle * rel;
            }
            (z, zdot)
        }
    }
}

impl ConfigPath {
    pub fn new(start: Vec<Complex64>) -> Self {
        ConfigPath {
            start,
            moves: Vec::new(),
            clearance: DEFAULT_CLEARANCE,
        }
    }

    /// The reference base configuration: z_i = i for n points on the real axis.
    pub fn standard_base(n: usize) -> Vec<Complex64> {
        (0..n).map(|i| Complex64::new(i as f64, 0.0)).collect()
    }

    pub fn with_clearance(mut self, clearance: f64) -> Self {
        self.clearance = clearance;
        self
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    pub fn start(&self) -> &[Complex64] {
        &self.start
    }

    pub fn moves(&self) -> &[ConfigMove] {
        &self.moves
    }

    /// Configuration after all moves.
    pub fn endpoint(&self) -> Vec<Complex64> {
        let mut cur = self.start.clone();
        for mv in &self.moves {
            cur = move_endpoint(&cur, mv);
        }
        cur
    }

    pub fn is_closed(&self) -> bool {
        let end = self.endpoint();
        self.start
            .iter()
            .zip(&end)
            .all(|(a, b)| (a - b).norm() < 1e-9)
    }

    /// Exchange slots `i` and `j` by a counterclockwise half-turn about their
    /// midpoint.
    pub fn swap(mut self, i: usize, j: usize) -> Self {
        let cur = self.endpoint();
        let center = (cur[i] + cur[j]) * 0.5;
        self.moves.push(ConfigMove::Rotate {
            slots: vec![i, j],
            center,
            angle: PI,
        });
        self
    }

    /// The standard braid generator: a counterclockwise half-turn of the two
    /// points currently in positions `i` and `i + 1` of the left-to-right
    /// order (sorted by real part, then imaginary part). Unlike
    /// [`Self::swap`], which acts on fixed slots, this follows the points, so
    /// concatenated generators spell braid words.
    pub fn braid_generator(self, i: usize) -> Self {
        let cur = self.endpoint();
        let mut order: Vec<usize> = (0..cur.len()).collect();
        order.sort_by(|&a, &b| {
            (cur[a].re, cur[a].im)
                .partial_cmp(&(cur[b].re, cur[b].im))
                .unwrap()
        });
        self.swap(order[i], order[i + 1])
    }

    /// Send slot `i` once counterclockwise around the current position of
    /// slot `j`: approach along the connecting line to `radius_fraction`
    /// times their distance, a full circle, and the return leg.
    pub fn encircle_with_radius(mut self, i: usize, j: usize, radius_fraction: f64) -> Self {
        let cur = self.endpoint();
        let target = cur[j];
        let approach = target + (cur[i] - target) * radius_fraction;
        let mut conf = cur.clone();
        conf[i] = approach;
        self.moves.push(ConfigMove::LinearTo(conf));
        self.moves.push(ConfigMove::Rotate {
            slots: vec![i],
            center: target,
            angle: 2.0 * PI,
        });
        let mut back = self.endpoint();
        back[i] = cur[i];
        self.moves.push(ConfigMove::LinearTo(back));
        self
    }

    /// [`Self::encircle_with_radius`] at the reference fraction 0.4.
    pub fn encircle(self, i: usize, j: usize) -> Self {
        self.encircle_with_radius(i, j, 0.4)
    }

    /// Move slot `i` on a circular arc about an arbitrary center.
    pub fn orbit(mut self, i: usize, center: Complex64, angle: f64) -> Self {
        self.moves.push(ConfigMove::Rotate {
            slots: vec![i],
            center,
            angle,
        });
        self
    }

    /// Straight-line move of all points to the target configuration.
    pub fn linear_to(mut self, target: Vec<Complex64>) -> Self {
        self.moves.push(ConfigMove::LinearTo(target));
        self
    }

    /// Piecewise-linear path through explicit sample configurations.
    pub fn through_samples(mut self, samples: &[Vec<Complex64>]) -> Self {
        for s in samples {
            self.moves.push(ConfigMove::LinearTo(s.clone()));
        }
        self
    }

    /// The same path traversed backwards.
    pub fn reversed(&self) -> Self {
        // Record the configuration before each move, then invert in reverse.
        let mut before = Vec::with_capacity(self.moves.len());
        let mut cur = self.start.clone();
        for mv in &self.moves {
            before.push(cur.clone());
            cur = move_endpoint(&cur, mv);
        }
        let mut rev = ConfigPath::new(cur).with_clearance(self.clearance);
        for (mv, pre) in self.moves.iter().zip(&before).rev() {
            match mv {
                ConfigMove::LinearTo(_) => {
                    rev.moves.push(ConfigMove::LinearTo(pre.clone()));
                }
                ConfigMove::Rotate {
                    slots,
                    center,
                    angle,
                } => {
                    rev.moves.push(ConfigMove::Rotate {
                        slots: slots.clone(),
                        center: *center,
                        angle: -angle,
                    });
                }
            }
        }
        rev
    }
}

/// The KZ right-hand side `A(t) y` for one move, with clearance checking at
/// every evaluation point.
struct MoveOde<'a> {
    factor: f64,
    omegas: &'a [ExchangeOperator],
    from: &'a [Complex64],
    mv: &'a ConfigMove,
    clearance: f64,
}

impl MoveOde<'_> {
    fn apply(&self, t: f64, y: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let (z, zdot) = move_state(self.from, self.mv, t);
        let mut out = DVector::from_element(y.len(), Complex64::new(0.0, 0.0));
        for op in self.omegas {
            let (i, j) = (op.i, op.j);
            let diff = z[i] - z[j];
            if diff.norm() < self.clearance {
                return Err(Error::Clearance {
                    point: format!("z_{} = {}", i + 1, z[i]),
                    singular: format!("z_{} = {}", j + 1, z[j]),
                    t,
                    clearance: diff.norm(),
                });
            }
            let coeff = (zdot[i] - zdot[j]) / diff * self.factor;
            if coeff.norm() == 0.0 {
                continue;
            }
            // out += coeff * (Omega y), with Omega real.
            for r in 0..y.len() {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..y.len() {
                    acc += y[c] * op.matrix[(r, c)];
                }
                out[r] += acc * coeff;
            }
        }
        Ok(out)
    }
}

/// Dormand-Prince 5(4) step: returns (5th-order increment, error estimate).
fn rk45_step(
    ode: &MoveOde<'_>,
    t: f64,
    y: &DVector<Complex64>,
    h: f64,
) -> Result<(DVector<Complex64>, f64)> {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    // Difference between the 5th-order weights and the embedded 4th-order ones.
    const E: [f64; 7] = [
        35.0 / 384.0 - 5179.0 / 57600.0,
        0.0,
        500.0 / 1113.0 - 7571.0 / 16695.0,
        125.0 / 192.0 - 393.0 / 640.0,
        -2187.0 / 6784.0 + 92097.0 / 339200.0,
        11.0 / 84.0 - 187.0 / 2100.0,
        -1.0 / 40.0,
    ];

    let mut k: Vec<DVector<Complex64>> = Vec::with_capacity(7);
    k.push(ode.apply(t, y)?);
    for s in 0..6 {
        let mut ys = y.clone();
        for (ki, &a) in k.iter().zip(A[s].iter()) {
            if a != 0.0 {
                ys += ki * Complex64::new(a * h, 0.0);
            }
        }
        k.push(ode.apply(t + C[s] * h, &ys)?);
    }
    // k[6] is the derivative at the 5th-order solution (FSAL structure).
    let mut dy = DVector::from_element(y.len(), Complex64::new(0.0, 0.0));
    for (ki, &b) in k.iter().take(6).zip(A[5].iter()) {
        if b != 0.0 {
            dy += ki * Complex64::new(b * h, 0.0);
        }
    }
    let mut err_vec = DVector::from_element(y.len(), Complex64::new(0.0, 0.0));
    for (ki, &e) in k.iter().zip(E.iter()) {
        if e != 0.0 {
            err_vec += ki * Complex64::new(e * h, 0.0);
        }
    }
    let y_new = y + &dy;
    let mut err = 0.0_f64;
    for r in 0..y.len() {
        let scale = ODE_ABS_TOL + ODE_REL_TOL * y[r].norm().max(y_new[r].norm());
        err = err.max(err_vec[r].norm() / scale);
    }
    Ok((dy, err))
}

/// Parallel transport of `y0` along the path.
pub fn kz_transport(
    sys: &SpinSystem,
    path: &ConfigPath,
    y0: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    let d = sys.invariant_dimension();
    if y0.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "transport vector has length {}, invariant subspace has dimension {d}",
            y0.len()
        )));
    }
    if path.start.len() != sys.legs() {
        return Err(Error::DimensionMismatch(format!(
            "path has {} points, system has {} legs",
            path.start.len(),
            sys.legs()
        )));
    }
    let mut omegas = Vec::new();
    for i in 0..sys.legs() {
        for j in (i + 1)..sys.legs() {
            omegas.push(casimir_exchange(sys, i, j)?);
        }
    }
    let factor = 1.0 / (sys.level as f64 + 2.0);

    let mut y = y0.clone();
    let mut from = path.start.clone();
    let mut steps = 0usize;
    for mv in &path.moves {
        let ode = MoveOde {
            factor,
            omegas: &omegas,
            from: &from,
            mv,
            clearance: path.clearance,
        };
        let mut t = 0.0_f64;
        let mut h = 0.05_f64;
        while t < 1.0 {
            if 1.0 - t < 1e-15 {
                break;
            }
            steps += 1;
            if steps > ODE_MAX_STEPS {
                return Err(Error::Budget {
                    estimate: steps as u128,
                    budget: ODE_MAX_STEPS as u128,
                });
            }
            let h_eff = h.min(1.0 - t);
            let (dy, err) = rk45_step(&ode, t, &y, h_eff)?;
            if err <= 1.0 {
                y += dy;
                t += h_eff;
                let grow = if err > 0.0 {
                    (0.9 * err.powf(-0.2)).min(5.0)
                } else {
                    5.0
                };
                h = (h_eff * grow).min(0.25);
            } else {
                h = h_eff * (0.9 * err.powf(-0.2)).max(0.2);
                if h < 1e-14 {
                    return Err(Error::StepUnderflow {
                        t,
                        context: "error control pushed the step below 1e-14".into(),
                    });
                }
            }
        }
        from = move_endpoint(&from, mv);
    }
    Ok(y)
}

/// Monodromy of a closed loop: columns are the transports of the invariant
/// basis vectors, so `y_end = M y_start`.
pub fn kz_monodromy(sys: &SpinSystem, path: &ConfigPath) -> Result<DMatrix<Complex64>> {
    if !path.is_closed() {
        return Err(Error::Domain(
            "monodromy requires a closed configuration loop".into(),
        ));
    }
    let d = sys.invariant_dimension();
    let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for c in 0..d {
        let mut e = DVector::from_element(d, Complex64::new(0.0, 0.0));
        e[c] = Complex64::new(1.0, 0.0);
        let y = kz_transport(sys, path, &e)?;
        m.column_mut(c).copy_from(&y);
    }
    Ok(m)
}

/// 2-norm condition number of a transport matrix.
pub fn transport_condition(m: &DMatrix<Complex64>) -> f64 {
    let svd = m.clone().svd(false, false);
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    max / min
}

/// Comparison of the KZ loop monodromy spectrum with the quantum-group
/// prediction.
#[derive(Debug, Clone)]
pub struct DrinfeldKohnoReport {
    pub level: usize,
    /// Eigenvalues of the numeric monodromy of the loop where z_2 encircles
    /// z_3, sorted by argument.
    pub kz_eigenvalues: Vec<Complex64>,
    /// Predicted eigenvalues e^{2 pi i w/(k+2)} for w in eig(Omega_23),
    /// sorted the same way.
    pub predicted: Vec<Complex64>,
    /// max |kz - predicted| after sorting.
    pub spectral_residual: f64,
    /// |det M - e^{2 pi i tr(Omega_23)/(k+2)}|.
    pub determinant_residual: f64,
    /// For level 2 only: max distance to the eigenvalues of the four-point
    /// braiding matrix (1/sqrt2) e^{-i pi/8} [[1, i], [i, 1]].
    pub braiding_residual: Option<f64>,
    /// Condition number of the monodromy matrix.
    pub condition: f64,
}

/// Run the spectral Drinfeld-Kohno comparison at level `k` on four spin-1/2.
///
/// Level 1 is excluded: the classical invariant subspace is 2-dimensional
/// but the level-truncated fusion allows a single channel, so the classical
/// KZ monodromy spectrum is not expected to match.
pub fn drinfeld_kohno_check(k: usize) -> Result<DrinfeldKohnoReport> {
    if k < 2 {
        return Err(Error::Domain(format!(
            "level {k} is below 2; the level-1 invariant subspace overcounts the fused channels"
        )));
    }
    let sys = SpinSystem::four_spin_half(k)?;
    let base = ConfigPath::standard_base(4);
    let path = ConfigPath::new(base).encircle(1, 2);
    let m = kz_monodromy(&sys, &path)?;
    let eigs = crate::linalg::eig2(&m);

    let omega = casimir_exchange(&sys, 1, 2)?;
    let evals = omega.matrix.clone().symmetric_eigen().eigenvalues;
    let denom = k as f64 + 2.0;
    let mut predicted: Vec<Complex64> = evals
        .iter()
        .map(|w| Complex64::from_polar(1.0, 2.0 * PI * w / denom))
        .collect();
    predicted.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
    let mut kz_sorted = eigs.to_vec();
    kz_sorted.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
    let spectral_residual = kz_sorted
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    let trace: f64 = evals.iter().sum();
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let determinant_residual =
        (det - Complex64::from_polar(1.0, 2.0 * PI * trace / denom)).norm();

    let braiding_residual = if k == 2 {
        // B = F D F with F the fusing involution and D = diag(e^{i pi/8},
        // e^{-3 i pi/8}); conjugation by the involution preserves spectra.
        let h = Complex64::new(1.0 / 2.0_f64.sqrt(), 0.0);
        let f = DMatrix::from_row_slice(2, 2, &[h, h, h, -h]);
        let dg = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::from_polar(1.0, PI / 8.0),
            Complex64::from_polar(1.0, -3.0 * PI / 8.0),
        ]));
        let b = &f * dg * &f;
        let mut eb = crate::linalg::eig2(&b).to_vec();
        eb.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
        Some(
            kz_sorted
                .iter()
                .zip(&eb)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        )
    } else {
        None
    };

    Ok(DrinfeldKohnoReport {
        level: k,
        kz_eigenvalues: kz_sorted,
        predicted,
        spectral_residual,
        determinant_residual,
        braiding_residual,
        condition: transport_condition(&m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, max_abs_vs_identity};

    fn base4() -> Vec<Complex64> {
        ConfigPath::standard_base(4)
    }

    #[test]
    fn singlet_counts_match_clebsch_gordan() {
        assert_eq!(singlet_count(&[1, 1]), 1);
        assert_eq!(singlet_count(&[1, 1, 1]), 0);
        assert_eq!(singlet_count(&[1, 1, 1, 1]), 2);
        assert_eq!(singlet_count(&[2, 2]), 1);
        assert_eq!(singlet_count(&[2, 2, 2]), 1);
        assert_eq!(singlet_count(&[1, 1, 2]), 1);
        assert_eq!(singlet_count(&[2, 0, 2]), 1);
    }

    #[test]
    fn four_spin_half_invariant_space_is_two_dimensional() {
        let sys = SpinSystem::four_spin_half(2).unwrap();
        assert_eq!(sys.product_dimension(), 16);
        assert_eq!(sys.invariant_dimension(), 2);
        // The basis columns are orthonormal and killed by Sz and S+.
        let b = sys.invariant_basis();
        let gram = b.transpose() * b;
        assert!(max_abs_real(&(&gram - DMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn exchange_eigenvalues_are_quarter_and_minus_three_quarters() {
        let sys = SpinSystem::four_spin_half(2).unwrap();
        for (i, j) in [(0usize, 1usize), (1, 2), (2, 3), (0, 3)] {
            let om = casimir_exchange(&sys, i, j).unwrap();
            let mut eigs: Vec<f64> = om
                .matrix
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .collect();
            eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert!((eigs[0] + 0.75).abs() < 1e-10, "pair ({i},{j})");
            assert!((eigs[1] - 0.25).abs() < 1e-10, "pair ({i},{j})");
        }
    }

    #[test]
    fn exchange_sum_is_the_singlet_casimir_scalar() {
        // Sum over pairs of S_i.S_j = (C_total - sum c(j_i))/2 = -3/2 on
        // singlets of four spin-1/2.
        let sys = SpinSystem::four_spin_half(3).unwrap();
        let mut total = DMatrix::zeros(2, 2);
        for i in 0..4 {
            for j in (i + 1)..4 {
                total += casimir_exchange(&sys, i, j).unwrap().matrix;
            }
        }
        let want = DMatrix::identity(2, 2) * (-1.5);
        assert!(max_abs_real(&(total - want)) < 1e-10);
    }

    #[test]
    fn spin_zero_leg_gives_zero_exchange() {
        let sys = SpinSystem::new(2, &[1, 0, 1]).unwrap();
        let om = casimir_exchange(&sys, 0, 1).unwrap();
        assert!(max_abs_real(&om.matrix) < 1e-12);
    }

    #[test]
    fn constant_and_empty_paths_do_nothing() {
        let sys = SpinSystem::four_spin_half(2).unwrap();
        let y0 = DVector::from_vec(vec![Complex64::new(0.3, 0.1), Complex64::new(-1.0, 0.4)]);
        let empty = ConfigPath::new(base4());
        assert_eq!(kz_transport(&sys, &empty, &y0).unwrap(), y0);
        let constant = ConfigPath::new(base4()).linear_to(base4());
        let y = kz_transport(&sys, &constant, &y0).unwrap();
        assert!((y - &y0).norm() < 1e-12);
    }

    #[test]
    fn reverse_transport_restores_the_vector() {
        let sys = SpinSystem::four_spin_half(2).unwrap();
        let path = ConfigPath::new(base4()).encircle(1, 2);
        let y0 = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.2, -0.5)]);
        let fwd = kz_transport(&sys, &path, &y0).unwrap();
        let back = kz_transport(&sys, &path.reversed(), &fwd).unwrap();
        assert!((back - &y0).norm() < 1e-8);
    }

    #[test]
    fn double_swap_equals_the_encircling_loop() {
        let sys = SpinSystem::four_spin_half(2).unwrap();
        let double_swap = ConfigPath::new(base4()).swap(1, 2).swap(1, 2);
        assert!(double_swap.is_closed());
        let loop23 = ConfigPath::new(base4()).encircle(1, 2);
        assert!(loop23.is_closed());
        let a = kz_monodromy(&sys, &double_swap).unwrap();
        let b = kz_monodromy(&sys, &loop23).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-7, "residual {}", max_abs_diff(&a, &b));
    }

    #[test]
    fn loop_monodromy_has_the_local_exponent_spectrum() {
        for k in [2usize, 6] {
            let sys = SpinSystem::four_spin_half(k).unwrap();
            let path = ConfigPath::new(base4()).encircle(1, 2);
            let m = kz_monodromy(&sys, &path).unwrap();
            let eigs = crate::linalg::eig2(&m);
            let denom = k as f64 + 2.0;
            let mut want = vec![
                Complex64::from_polar(1.0, 2.0 * PI * 0.25 / denom),
                Complex64::from_polar(1.0, -2.0 * PI * 0.75 / denom),
            ];
            want.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
            let mut got = eigs.to_vec();
            got.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).norm() < 1e-6, "level {k}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn contractible_loop_is_identity() {
        let sys = SpinSystem::four_spin_half(2).unwrap();
        let path = ConfigPath::new(base4()).orbit(1, Complex64::new(1.0, -0.3), 2.0 * PI);
        assert!(path.is_closed());
        let m = kz_monodromy(&sys, &path).unwrap();
        assert!(max_abs_vs_identity(&m) < 1e-8);
    }

    #[test]
    fn monodromy_is_homotopy_invariant_across_radii() {
        let sys = SpinSystem::four_spin_half(2).unwrap();
        let a = kz_monodromy(
            &sys,
            &ConfigPath::new(base4()).encircle_with_radius(1, 2, 0.4),
        )
        .unwrap();
        let b = kz_monodromy(
            &sys,
            &ConfigPath::new(base4()).encircle_with_radius(1, 2, 0.25),
        )
        .unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-7);
    }

    #[test]
    fn braid_relation_holds_along_concatenated_moves() {
        // sigma_1 sigma_2 sigma_1 = sigma_2 sigma_1 sigma_2 as transports of
        // concatenated generator moves; both sides end at the same
        // configuration and the paths are homotopic.
        let sys = SpinSystem::four_spin_half(2).unwrap();
        let lhs_path = ConfigPath::new(base4())
            .braid_generator(0)
            .braid_generator(1)
            .braid_generator(0);
        let rhs_path = ConfigPath::new(base4())
            .braid_generator(1)
            .braid_generator(0)
            .braid_generator(1);
        let el = lhs_path.endpoint();
        let er = rhs_path.endpoint();
        for (a, b) in el.iter().zip(&er) {
            assert!((a - b).norm() < 1e-12);
        }
        let d = sys.invariant_dimension();
        let mut ml = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        let mut mr = ml.clone();
        for c in 0..d {
            let mut e = DVector::from_element(d, Complex64::new(0.0, 0.0));
            e[c] = Complex64::new(1.0, 0.0);
            ml.column_mut(c)
                .copy_from(&kz_transport(&sys, &lhs_path, &e).unwrap());
            mr.column_mut(c)
                .copy_from(&kz_transport(&sys, &rhs_path, &e).unwrap());
        }
        assert!(max_abs_diff(&ml, &mr) < 1e-6, "residual {}", max_abs_diff(&ml, &mr));
    }

    #[test]
    fn transports_are_invertible_with_modest_condition() {
        let sys = SpinSystem::four_spin_half(2).unwrap();
        let m = kz_monodromy(&sys, &ConfigPath::new(base4()).encircle(1, 2)).unwrap();
        let cond = transport_condition(&m);
        assert!(cond.is_finite());
        assert!(cond < 50.0, "condition {cond}");
    }

    #[test]
    fn colliding_linear_path_is_rejected() {
        let sys = SpinSystem::four_spin_half(2).unwrap();
        // Straight-line exchange of z_2 and z_3 collides at their midpoint.
        let mut target = base4();
        target.swap(1, 2);
        let path = ConfigPath::new(base4()).linear_to(target);
        let y0 = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert!(matches!(
            kz_transport(&sys, &path, &y0),
            Err(Error::Clearance { .. })
        ));
    }

    #[test]
    fn monodromy_requires_closed_loops() {
        let sys = SpinSystem::four_spin_half(2).unwrap();
        let open = ConfigPath::new(base4()).swap(1, 2);
        assert!(matches!(
            kz_monodromy(&sys, &open),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn drinfeld_kohno_matches_at_levels_two_three_six() {
        let r2 = drinfeld_kohno_check(2).unwrap();
        assert!(r2.spectral_residual < 1e-6, "k=2: {}", r2.spectral_residual);
        assert!(r2.braiding_residual.unwrap() < 1e-6);
        assert!(r2.determinant_residual < 1e-8);

        let r3 = drinfeld_kohno_check(3).unwrap();
        assert!(r3.spectral_residual < 1e-6);
        let mut want = vec![
            Complex64::from_polar(1.0, PI / 10.0),
            Complex64::from_polar(1.0, -3.0 * PI / 10.0),
        ];
        want.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
        for (g, w) in r3.kz_eigenvalues.iter().zip(&want) {
            assert!((g - w).norm() < 1e-6);
        }

        let r6 = drinfeld_kohno_check(6).unwrap();
        assert!(r6.spectral_residual < 1e-6);
        assert!(r6.braiding_residual.is_none());
    }

    #[test]
    fn drinfeld_kohno_excludes_level_one() {
        assert!(matches!(drinfeld_kohno_check(1), Err(Error::Domain(_))));
    }

    #[test]
    fn spin_system_rejects_level_zero_and_oversize_products() {
        assert!(matches!(
            SpinSystem::new(0, &[1, 1]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            SpinSystem::new(2, &[5; 8]),
            Err(Error::SurfaceCap { .. })
        ));
    }
}
