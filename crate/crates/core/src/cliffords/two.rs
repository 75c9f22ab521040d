use std::collections::HashMap;
use std::sync::OnceLock;

use rand::Rng;

use super::gate::GateOp;
use super::matrices::{circuit_unitary, cnot_matrix, embed};
use super::single::{group as single_group, CANONICAL};
use super::tableau::Tableau;
use super::CliffordElement;
use crate::qubits::QubitId;

pub const TWO_QUBIT_ORDER: usize = 11520;

/// Sizes of the single-qubit, CNOT, iSWAP and SWAP-like classes.
pub const CLASS_SIZES: [usize; 4] = [576, 5184, 5184, 576];

const Q0: QubitId = QubitId::D1;
const Q1: QubitId = QubitId::D2;

/// Layered description of one element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassIndex {
    pub class: usize,
    pub c0: usize,
    pub c1: usize,
    pub s0: usize,
    pub s1: usize,
}

impl ClassIndex {
    pub fn from_index(mut i: usize) -> Self {
        assert!(i < TWO_QUBIT_ORDER);
        let mut class = 0;
        while i >= CLASS_SIZES[class] {
            i -= CLASS_SIZES[class];
            class += 1;
        }
        let (s0, s1) = if class == 1 || class == 2 {
            let s = (i % 3, (i / 3) % 3);
            i /= 9;
            (s.1, s.0)
        } else {
            (0, 0)
        };
        Self {
            class,
            c0: i / 24,
            c1: i % 24,
            s0,
            s1,
        }
    }

    pub fn to_index(self) -> usize {
        let offset: usize = CLASS_SIZES[..self.class].iter().sum();
        let base = self.c0 * 24 + self.c1;
        offset
            + if self.class == 1 || self.class == 2 {
                base * 9 + self.s0 * 3 + self.s1
            } else {
                base
            }
    }
}

/// Single-qubit indices of `{I, axis cycle, inverse cycle}`.
fn s1_indices() -> [usize; 3] {
    static S: OnceLock<[usize; 3]> = OnceLock::new();
    *S.get_or_init(|| {
        let g = single_group();
        // Pauli images: X (1) → Y (2) → Z (3) → X, all with positive sign.
        let find = |img: [u8; 3]| {
            g.elements
                .iter()
                .position(|e| e.tableau.image[1..] == img && e.tableau.sign[1..] == [1, 1, 1])
                .expect("axis cycle is Clifford")
        };
        [0, find([2, 3, 1]), find([3, 1, 2])]
    })
}

fn entangler(class: usize) -> Vec<GateOp> {
    let a = GateOp::cnot(Q0, Q1);
    let b = GateOp::cnot(Q1, Q0);
    match class {
        0 => vec![],
        1 => vec![a],
        2 => vec![a, b],
        _ => vec![a.clone(), b, a],
    }
}

fn local(i: usize, q: QubitId) -> Vec<GateOp> {
    single_group().elements[i]
        .decomposition
        .iter()
        .map(|o| o.retarget(|_| q))
        .collect()
}

fn decomposition(ci: ClassIndex) -> Vec<GateOp> {
    let s1 = s1_indices();
    let mut ops = local(ci.c0, Q0);
    ops.extend(local(ci.c1, Q1));
    ops.extend(entangler(ci.class));
    if ci.class == 1 || ci.class == 2 {
        ops.extend(local(s1[ci.s0], Q0));
        ops.extend(local(s1[ci.s1], Q1));
    }
    ops
}

fn tensor(a: &Tableau, b: &Tableau) -> Tableau {
    let mut image = Vec::with_capacity(16);
    let mut sign = Vec::with_capacity(16);
    for k in 0..16 {
        let (p, q) = (k >> 2, k & 3);
        image.push(a.image[p] * 4 + b.image[q]);
        sign.push(a.sign[p] * b.sign[q]);
    }
    Tableau {
        qubits: 2,
        image,
        sign,
    }
}

struct TwoGroup {
    tableaux: Vec<Tableau>,
    lookup: HashMap<Tableau, usize>,
}

fn two_group() -> &'static TwoGroup {
    static G: OnceLock<TwoGroup> = OnceLock::new();
    G.get_or_init(|| {
        let g = single_group();
        let s1 = s1_indices();
        let ent: Vec<Tableau> = (0..4)
            .map(|c| {
                let u = circuit_unitary(&entangler(c), &[Q0, Q1]);
                Tableau::from_unitary(&u).expect("entangler is Clifford")
            })
            .collect();
        let tableaux: Vec<Tableau> = (0..TWO_QUBIT_ORDER)
            .map(|i| {
                let ci = ClassIndex::from_index(i);
                let first = tensor(&g.elements[ci.c0].tableau, &g.elements[ci.c1].tableau);
                let mut t = ent[ci.class].after(&first);
                if ci.class == 1 || ci.class == 2 {
                    let last = tensor(&g.elements[s1[ci.s0]].tableau, &g.elements[s1[ci.s1]].tableau);
                    t = last.after(&t);
                }
                t
            })
            .collect();
        let lookup = tableaux.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        TwoGroup { tableaux, lookup }
    })
}

/// Number of distinct group elements produced by the class construction.
pub fn distinct_two_qubit_elements() -> usize {
    two_group().lookup.len()
}

/// Element `index` of the two-qubit group, written on `(D1, D2)`.
pub fn two_qubit_clifford(index: usize) -> CliffordElement {
    let ci = ClassIndex::from_index(index);
    let decomposition = decomposition(ci);
    let unitary = circuit_unitary(&decomposition, &[Q0, Q1]);
    CliffordElement {
        index,
        unitary,
        decomposition,
        tableau: two_group().tableaux[index].clone(),
    }
}

/// Uniform sample from the two-qubit Clifford group.
pub fn sample_two_qubit_clifford<R: Rng + ?Sized>(rng: &mut R) -> CliffordElement {
    two_qubit_clifford(rng.random_range(0..TWO_QUBIT_ORDER))
}

pub(crate) fn two_qubit_lookup(t: &Tableau) -> Option<usize> {
    two_group().lookup.get(t).copied()
}

/// CNOT on `(D1, D2)` with D1 as control, as a group element.
pub fn cnot_element() -> CliffordElement {
    let t = Tableau::from_unitary(&cnot_matrix()).expect("CNOT is Clifford");
    let idx = two_qubit_lookup(&t).expect("CNOT in group");
    let mut e = two_qubit_clifford(idx);
    e.decomposition = vec![GateOp::cnot(Q0, Q1)];
    e.unitary = embed(&cnot_matrix(), &[0, 1], 2);
    e
}

/// Qubit the single-qubit tables are written on, for retargeting.
pub fn canonical_single_qubit() -> QubitId {
    CANONICAL
}

/// Group element whose action on `(D1, D2)` is `u` up to global phase.
pub fn two_qubit_element(u: &crate::dynamics::CMatrix) -> crate::Result<CliffordElement> {
    let t = Tableau::from_unitary(u)?;
    let idx = two_qubit_lookup(&t).ok_or_else(|| crate::Error::NotInGroup("two-qubit unitary".into()))?;
    Ok(two_qubit_clifford(idx))
}
