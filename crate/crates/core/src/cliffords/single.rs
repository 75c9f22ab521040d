use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use super::gate::{Axis, GateOp, GateTimes};
use super::matrices::{circuit_unitary, phase_overlap};
use super::tableau::Tableau;
use super::CliffordElement;
use crate::dynamics::CMatrix;
use crate::qubits::QubitId;

/// Qubit the tabulated single-qubit decompositions are written on.
pub(crate) const CANONICAL: QubitId = QubitId::D1;

fn words() -> Vec<Vec<GateOp>> {
    let t = GateTimes::default();
    let z = |k: usize| (k > 0).then(|| GateOp::virtual_z(CANONICAL, k as f64 * FRAC_PI_2));
    let x90 = || GateOp::sq(CANONICAL, Axis::X, FRAC_PI_2, &t);
    let mut out = Vec::new();
    for a in 0..4 {
        out.push(z(a).into_iter().collect());
    }
    for a in 0..4 {
        for b in 0..4 {
            let mut w: Vec<GateOp> = z(b).into_iter().collect();
            w.push(x90());
            w.extend(z(a));
            out.push(w);
        }
    }
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut w: Vec<GateOp> = z(c).into_iter().collect();
                w.push(x90());
                w.extend(z(b));
                w.push(x90());
                w.extend(z(a));
                out.push(w);
            }
        }
    }
    // Fewest pulses first, then fewest frame updates.
    out.sort_by_key(|w| {
        let pulses = w.iter().filter(|o| o.is_physical_rotation()).count();
        (pulses, w.len())
    });
    out
}

pub(crate) struct SingleGroup {
    pub elements: Vec<CliffordElement>,
    /// `product[a][b]` = index of `a` applied after `b`.
    pub product: Vec<[u8; 24]>,
    pub inverse: [u8; 24],
}

pub(crate) fn group() -> &'static SingleGroup {
    static G: OnceLock<SingleGroup> = OnceLock::new();
    G.get_or_init(|| {
        let mut elements: Vec<CliffordElement> = Vec::with_capacity(24);
        for w in words() {
            let u = circuit_unitary(&w, &[CANONICAL]);
            let tab = Tableau::from_unitary(&u).expect("Clifford word");
            if elements.iter().all(|e| e.tableau != tab) {
                elements.push(CliffordElement {
                    index: elements.len(),
                    unitary: u,
                    decomposition: w,
                    tableau: tab,
                });
            }
        }
        assert_eq!(elements.len(), 24, "single-qubit Clifford enumeration");
        let find = |t: &Tableau| elements.iter().position(|e| &e.tableau == t).expect("closed group") as u8;
        let product = elements
            .iter()
            .map(|a| {
                let mut row = [0u8; 24];
                for (j, b) in elements.iter().enumerate() {
                    row[j] = find(&a.tableau.after(&b.tableau));
                }
                row
            })
            .collect();
        let mut inverse = [0u8; 24];
        for (i, e) in elements.iter().enumerate() {
            inverse[i] = find(&e.tableau.inverse());
        }
        SingleGroup {
            elements,
            product,
            inverse,
        }
    })
}

/// The 24 single-qubit Cliffords; index 0 is the identity.
pub fn single_qubit_cliffords() -> &'static [CliffordElement] {
    &group().elements
}

/// Index of `u` in the single-qubit group, matched up to global phase.
pub fn single_qubit_index(u: &CMatrix) -> Option<usize> {
    single_qubit_cliffords()
        .iter()
        .position(|e| (phase_overlap(&e.unitary, u) - 1.0).abs() < 1e-9)
}

/// Index of `a` applied after `b`.
pub fn single_qubit_product(a: usize, b: usize) -> usize {
    group().product[a][b] as usize
}

pub fn single_qubit_inverse(a: usize) -> usize {
    group().inverse[a] as usize
}

/// Mean number of physical pulses per single-qubit Clifford.
pub fn mean_physical_pulses() -> f64 {
    let g = single_qubit_cliffords();
    let total: usize = g
        .iter()
        .map(|e| e.decomposition.iter().filter(|o| o.is_physical_rotation()).count())
        .sum();
    total as f64 / g.len() as f64
}
