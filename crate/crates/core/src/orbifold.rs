//! Holomorphic-orbifold block counting: enumeration of surface-group
//! homomorphisms into a finite group (flat G-bundles on a genus-g surface),
//! the Frobenius-Mednykh character-degree count as an independent oracle,
//! simultaneous-conjugation classes, and the exact modular-group permutation
//! action on torus classes.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::mcg_reps::{MCGRep, Relation};

/// Default budget on |G|^(2g), the size of the raw enumeration space.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 100_000_000;

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    /// Row-major: table[a * order + b] = a * b.
    table: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    /// Validate a multiplication table: closure, a two-sided identity,
    /// two-sided inverses, and associativity (exhaustive up to order 24,
    /// deterministically sampled above that).
    pub fn from_table(order: usize, table: Vec<usize>) -> Result<Self> {
        if order == 0 {
            return Err(Error::GroupTable("the empty table is not a group".into()));
        }
        if table.len() != order * order {
            return Err(Error::GroupTable(format!(
                "table has {} entries, expected {}",
                table.len(),
                order * order
            )));
        }
        if let Some(&bad) = table.iter().find(|&&x| x >= order) {
            return Err(Error::GroupTable(format!(
                "table entry {bad} is outside 0..{order}"
            )));
        }
        let mul = |a: usize, b: usize| table[a * order + b];
        let identity = (0..order)
            .find(|&e| (0..order).all(|x| mul(e, x) == x && mul(x, e) == x))
            .ok_or_else(|| Error::GroupTable("no two-sided identity".into()))?;
        let mut inverse = vec![usize::MAX; order];
        for a in 0..order {
            inverse[a] = (0..order)
                .find(|&b| mul(a, b) == identity && mul(b, a) == identity)
                .ok_or_else(|| {
                    Error::GroupTable(format!("element {a} has no two-sided inverse"))
                })?;
        }
        if order <= 24 {
            for a in 0..order {
                for b in 0..order {
                    for c in 0..order {
                        if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                            return Err(Error::GroupTable(format!(
                                "associativity fails at ({a}, {b}, {c})"
                            )));
                        }
                    }
                }
            }
        } else {
            // Deterministic sample of order^2 triples.
            let mut state = 0x9e3779b97f4a7c15u64;
            for _ in 0..order * order {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let a = (state >> 33) as usize % order;
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let b = (state >> 33) as usize % order;
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let c = (state >> 33) as usize % order;
                if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                    return Err(Error::GroupTable(format!(
                        "associativity fails at ({a}, {b}, {c})"
                    )));
                }
            }
        }
        Ok(FiniteGroup {
            order,
            table,
            identity,
            inverse,
        })
    }

    /// Parse the text format: first line the order m, then m lines of m
    /// space-separated element ids.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let first = lines
            .next()
            .ok_or_else(|| Error::Parse("empty group-table file".into()))?;
        let order: usize = first
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad order line: {first:?}")))?;
        let mut table = Vec::with_capacity(order * order);
        for _ in 0..order {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("truncated group table".into()))?;
            let row: Vec<usize> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad table entry {tok:?}")))
                })
                .collect::<Result<_>>()?;
            if row.len() != order {
                return Err(Error::Parse(format!(
                    "row has {} entries, expected {order}",
                    row.len()
                )));
            }
            table.extend(row);
        }
        FiniteGroup::from_table(order, table)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    /// a b a^-1 b^-1.
    pub fn commutator(&self, a: usize, b: usize) -> usize {
        self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))
    }

    /// a^n for any integer n.
    pub fn pow(&self, a: usize, n: i64) -> usize {
        let base = if n >= 0 { a } else { self.inv(a) };
        let mut out = self.identity;
        for _ in 0..n.unsigned_abs() {
            out = self.mul(out, base);
        }
        out
    }

    /// The cyclic group of order n.
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a + b) % n))
            .collect();
        FiniteGroup::from_table(n, table).expect("cyclic tables are groups")
    }

    /// Direct product; element ids are a1 * |G2| + a2.
    pub fn direct_product(g1: &FiniteGroup, g2: &FiniteGroup) -> Self {
        let (m1, m2) = (g1.order, g2.order);
        let n = m1 * m2;
        let mut table = vec![0usize; n * n];
        for a1 in 0..m1 {
            for a2 in 0..m2 {
                for b1 in 0..m1 {
                    for b2 in 0..m2 {
                        let a = a1 * m2 + a2;
                        let b = b1 * m2 + b2;
                        table[a * n + b] = g1.mul(a1, b1) * m2 + g2.mul(a2, b2);
                    }
                }
            }
        }
        FiniteGroup::from_table(n, table).expect("products of groups are groups")
    }

    /// Closure of a set of permutations (of 0..n) under composition, as a
    /// group table; elements are sorted lexicographically, so the identity
    /// permutation gets id 0.
    fn from_permutations(n: usize, generators: &[Vec<usize>]) -> Self {
        let compose = |p: &[usize], q: &[usize]| -> Vec<usize> {
            (0..n).map(|x| p[q[x]]).collect()
        };
        let id: Vec<usize> = (0..n).collect();
        let mut elems = vec![id];
        let mut frontier = vec![0usize];
        while let Some(i) = frontier.pop() {
            for g in generators {
                let prod = compose(&elems[i], g);
                if !elems.contains(&prod) {
                    elems.push(prod);
                    frontier.push(elems.len() - 1);
                }
            }
        }
        elems.sort();
        let index: HashMap<&[usize], usize> =
            elems.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
        let m = elems.len();
        let mut table = vec![0usize; m * m];
        for (a, pa) in elems.iter().enumerate() {
            for (b, pb) in elems.iter().enumerate() {
                table[a * m + b] = index[compose(pa, pb).as_slice()];
            }
        }
        FiniteGroup::from_table(m, table).expect("permutation closures are groups")
    }

    /// Symmetric group on three letters (order 6).
    pub fn symmetric_3() -> Self {
        FiniteGroup::from_permutations(3, &[vec![1, 0, 2], vec![0, 2, 1]])
    }

    /// Dihedral group of the square (order 8).
    pub fn dihedral_4() -> Self {
        FiniteGroup::from_permutations(4, &[vec![1, 2, 3, 0], vec![3, 2, 1, 0]])
    }

    /// Alternating group on four letters (order 12).
    pub fn alternating_4() -> Self {
        FiniteGroup::from_permutations(4, &[vec![1, 2, 0, 3], vec![0, 2, 3, 1]])
    }

    /// Quaternion group {±1, ±i, ±j, ±k} (order 8); id = axis * 2 + sign bit.
    pub fn quaternion() -> Self {
        // Axis products: entry [a][b] = (axis, sign flip) for a * b with
        // axes 0 = scalar, 1 = i, 2 = j, 3 = k.
        const AX: [[(usize, bool); 4]; 4] = [
            [(0, false), (1, false), (2, false), (3, false)],
            [(1, false), (0, true), (3, false), (2, true)],
            [(2, false), (3, true), (0, true), (1, false)],
            [(3, false), (2, false), (1, true), (0, true)],
        ];
        let mut table = vec![0usize; 64];
        for a in 0..8 {
            for b in 0..8 {
                let (ax_a, s_a) = (a / 2, a % 2 == 1);
                let (ax_b, s_b) = (b / 2, b % 2 == 1);
                let (ax, flip) = AX[ax_a][ax_b];
                let sign = (s_a ^ s_b) ^ flip;
                table[a * 8 + b] = ax * 2 + usize::from(sign);
            }
        }
        FiniteGroup::from_table(8, table).expect("the quaternion table is a group")
    }
}

/// A shipped group with its name and complex-irreducible character degrees.
pub fn builtin_group(name: &str) -> Result<(FiniteGroup, Vec<u64>)> {
    match name {
        "trivial" => Ok((FiniteGroup::cyclic(1), vec![1])),
        "z2" => Ok((FiniteGroup::cyclic(2), vec![1, 1])),
        "z3" => Ok((FiniteGroup::cyclic(3), vec![1, 1, 1])),
        "z4" => Ok((FiniteGroup::cyclic(4), vec![1, 1, 1, 1])),
        "z2xz2" => Ok((
            FiniteGroup::direct_product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2)),
            vec![1, 1, 1, 1],
        )),
        "s3" => Ok((FiniteGroup::symmetric_3(), vec![1, 1, 2])),
        "d4" => Ok((FiniteGroup::dihedral_4(), vec![1, 1, 1, 1, 2])),
        "q8" => Ok((FiniteGroup::quaternion(), vec![1, 1, 1, 1, 2])),
        "a4" => Ok((FiniteGroup::alternating_4(), vec![1, 1, 1, 3])),
        other => Err(Error::UnknownLabel(format!(
            "unknown group {other:?}; expected one of trivial, z2, z3, z4, z2xz2, s3, d4, q8, a4"
        ))),
    }
}

/// Names accepted by [`builtin_group`].
pub const BUILTIN_GROUP_NAMES: [&str; 9] =
    ["trivial", "z2", "z3", "z4", "z2xz2", "s3", "d4", "q8", "a4"];

/// A surface-group homomorphism: ids (a_1, b_1, ..., a_g, b_g) whose
/// commutators multiply to the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlatTuple {
    pub entries: Vec<usize>,
}

impl FlatTuple {
    pub fn new(group: &FiniteGroup, entries: Vec<usize>) -> Result<Self> {
        if entries.len() % 2 != 0 || entries.is_empty() {
            return Err(Error::Domain(
                "a flat tuple has 2g entries for some positive genus".into(),
            ));
        }
        if let Some(&bad) = entries.iter().find(|&&x| x >= group.order()) {
            return Err(Error::Domain(format!(
                "entry {bad} is outside the group of order {}",
                group.order()
            )));
        }
        let mut prod = group.identity();
        for pair in entries.chunks(2) {
            prod = group.mul(prod, group.commutator(pair[0], pair[1]));
        }
        if prod != group.identity() {
            return Err(Error::Domain(format!(
                "commutator product is element {prod}, not the identity"
            )));
        }
        Ok(FlatTuple { entries })
    }

    pub fn genus(&self) -> usize {
        self.entries.len() / 2
    }
}

/// All flat 2g-tuples, by exhaustive search with exact table arithmetic.
pub fn enumerate_flat(group: &FiniteGroup, genus: usize) -> Result<Vec<FlatTuple>> {
    enumerate_flat_bounded(group, genus, DEFAULT_ENUMERATION_BUDGET)
}

/// [`enumerate_flat`] with an explicit budget on |G|^(2g).
pub fn enumerate_flat_bounded(
    group: &FiniteGroup,
    genus: usize,
    budget: u128,
) -> Result<Vec<FlatTuple>> {
    if genus == 0 {
        return Err(Error::Domain("genus must be positive".into()));
    }
    let m = group.order() as u128;
    let mut estimate: u128 = 1;
    for _ in 0..2 * genus {
        estimate = estimate.checked_mul(m).unwrap_or(u128::MAX);
    }
    if estimate > budget {
        return Err(Error::Budget { estimate, budget });
    }
    let mut out = Vec::new();
    let mut tuple = vec![0usize; 2 * genus];
    loop {
        let mut prod = group.identity();
        for pair in tuple.chunks(2) {
            prod = group.mul(prod, group.commutator(pair[0], pair[1]));
        }
        if prod == group.identity() {
            out.push(FlatTuple {
                entries: tuple.clone(),
            });
        }
        // Odometer increment.
        let mut pos = tuple.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < group.order() {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

/// The Frobenius-Mednykh count of flat tuples:
/// `|G|^(2g-1) * sum over irreducible degrees d of d^(2-2g)`,
/// in exact rational arithmetic; the result must be a nonnegative integer.
pub fn mednykh_count(group: &FiniteGroup, genus: usize, char_degrees: &[u64]) -> Result<BigInt> {
    if genus == 0 {
        return Err(Error::Domain("genus must be positive".into()));
    }
    if char_degrees.iter().any(|&d| d == 0) {
        return Err(Error::Domain("character degrees must be positive".into()));
    }
    let sum_sq: u64 = char_degrees.iter().map(|d| d * d).sum();
    if sum_sq != group.order() as u64 {
        return Err(Error::Domain(format!(
            "degree squares sum to {sum_sq}, expected the group order {}",
            group.order()
        )));
    }
    let mut sum = BigRational::zero();
    for &d in char_degrees {
        // d^(2-2g) = 1 / d^(2g-2).
        let denom = BigInt::from(d).pow(2 * genus as u32 - 2);
        sum += BigRational::new(BigInt::one(), denom);
    }
    let total = BigRational::from(BigInt::from(group.order()).pow(2 * genus as u32 - 1)) * sum;
    if !total.is_integer() || total.is_negative() {
        return Err(Error::NonIntegral {
            what: "Frobenius-Mednykh count".into(),
            value: total.to_f64().unwrap_or(f64::NAN),
            residual: f64::NAN,
        });
    }
    Ok(total.to_integer())
}

/// An orbit of flat tuples under simultaneous conjugation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatClass {
    /// Lexicographically least tuple of the orbit.
    pub representative: FlatTuple,
    pub orbit_size: usize,
}

/// Conjugate every entry: x -> g x g^-1.
fn conjugate_tuple(group: &FiniteGroup, t: &[usize], g: usize) -> Vec<usize> {
    let gi = group.inv(g);
    t.iter()
        .map(|&x| group.mul(group.mul(g, x), gi))
        .collect()
}

/// Partition flat tuples into simultaneous-conjugation orbits, sorted by
/// representative. The input must be closed under conjugation (the full
/// output of [`enumerate_flat`] always is, since conjugates of flat tuples
/// are flat).
pub fn conjugation_classes(group: &FiniteGroup, tuples: &[FlatTuple]) -> Vec<FlatClass> {
    let index: HashMap<&[usize], usize> = tuples
        .iter()
        .enumerate()
        .map(|(i, t)| (t.entries.as_slice(), i))
        .collect();
    let mut assigned = vec![false; tuples.len()];
    let mut classes = Vec::new();
    for (i, t) in tuples.iter().enumerate() {
        if assigned[i] {
            continue;
        }
        let mut orbit = Vec::new();
        for g in 0..group.order() {
            let img = conjugate_tuple(group, &t.entries, g);
            let j = *index
                .get(img.as_slice())
                .expect("input must be closed under conjugation");
            if !assigned[j] {
                assigned[j] = true;
                orbit.push(j);
            }
        }
        let representative = orbit
            .iter()
            .map(|&j| tuples[j].clone())
            .min()
            .expect("orbits are nonempty");
        classes.push(FlatClass {
            representative,
            orbit_size: orbit.len(),
        });
    }
    classes.sort_by(|a, b| a.representative.cmp(&b.representative));
    classes
}

/// Act on a commuting pair by an integer exponent matrix [[p, q], [r, s]]:
/// (a, b) -> (a^p b^r, a^q b^s). Well-defined on commuting pairs.
pub fn exponent_action(
    group: &FiniteGroup,
    mat: [[i64; 2]; 2],
    pair: (usize, usize),
) -> (usize, usize) {
    let (a, b) = pair;
    let first = group.mul(group.pow(a, mat[0][0]), group.pow(b, mat[1][0]));
    let second = group.mul(group.pow(a, mat[0][1]), group.pow(b, mat[1][1]));
    (first, second)
}

/// The exact permutation action of the modular group on torus classes:
/// S: (a, b) -> (b, a^-1), T: (a, b) -> (a, a b), descended to
/// conjugation classes, returned as a verified permutation representation.
pub fn torus_sl2z_action(group: &FiniteGroup) -> Result<MCGRep> {
    let tuples = enumerate_flat(group, 1)?;
    let classes = conjugation_classes(group, &tuples);

    // Map every tuple to its class index.
    let mut class_of: HashMap<Vec<usize>, usize> = HashMap::new();
    for (ci, class) in classes.iter().enumerate() {
        for g in 0..group.order() {
            let img = conjugate_tuple(group, &class.representative.entries, g);
            class_of.insert(img, ci);
        }
    }
    if class_of.len() != tuples.len() {
        return Err(Error::GroupTable(
            "conjugation orbits do not cover the flat tuples".into(),
        ));
    }

    let act = |f: &dyn Fn(usize, usize) -> (usize, usize)| -> Result<Vec<usize>> {
        let mut perm = vec![usize::MAX; classes.len()];
        for (ci, class) in classes.iter().enumerate() {
            let (a, b) = (
                class.representative.entries[0],
                class.representative.entries[1],
            );
            let (x, y) = f(a, b);
            let target = class_of.get(&vec![x, y]).copied().ok_or_else(|| {
                Error::GroupTable(format!(
                    "action sent a flat pair to a non-flat pair ({x}, {y})"
                ))
            })?;
            perm[ci] = target;
        }
        let mut seen = vec![false; classes.len()];
        for &p in &perm {
            if seen[p] {
                return Err(Error::GroupTable(
                    "action does not permute the classes".into(),
                ));
            }
            seen[p] = true;
        }
        Ok(perm)
    };

    let s_perm = act(&|a, b| (b, group.inv(a)))?;
    let t_perm = act(&|a, b| (a, group.mul(a, b)))?;

    let n = classes.len();
    let perm_matrix = |perm: &[usize]| -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (src, &dst) in perm.iter().enumerate() {
            m[(dst, src)] = Complex64::new(1.0, 0.0);
        }
        m
    };
    let one = Complex64::new(1.0, 0.0);
    MCGRep::new(
        vec![perm_matrix(&s_perm), perm_matrix(&t_perm)],
        vec![
            Relation::new("S^4", &[(0, 4)], Some(one), 1e-12),
            Relation::new(
                "(ST)^3 S^-2",
                &[(0, 1), (1, 1), (0, 1), (1, 1), (0, 1), (1, 1), (0, -2)],
                Some(one),
                1e-12,
            ),
            Relation::new(
                "S^2 T S^-2 T^-1",
                &[(0, 2), (1, 1), (0, -2), (1, -1)],
                Some(one),
                1e-12,
            ),
        ],
    )
}

/// The torus classes themselves, for callers that need the labels behind the
/// permutation representation.
pub fn torus_classes(group: &FiniteGroup) -> Result<Vec<FlatClass>> {
    let tuples = enumerate_flat(group, 1)?;
    Ok(conjugation_classes(group, &tuples))
}
