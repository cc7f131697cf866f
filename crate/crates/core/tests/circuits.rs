use qcnn_toric::circuits::{build_convolution, build_prep_circuit, readout_qubit};
use qcnn_toric::stabilizer_sim::{check_syndrome_map, verify_convolution_identity, ConvolutionOracle};
use qcnn_toric::{LatticeGeometry, Pauli, PauliFrame, StabilizerId};

#[test]
fn identity_holds_on_rectangular_tori() {
    for (l1, l2) in [(3, 3), (4, 4), (3, 5), (5, 3), (6, 4), (7, 5)] {
        let g = LatticeGeometry::build_torus(l1, l2).unwrap();
        let rep = verify_convolution_identity(&g).unwrap();
        assert!(rep.passed(), "{l1}x{l2}: random {:?}, ones {:?}", rep.random, rep.ones);
    }
}

#[test]
fn single_errors_flip_the_readouts_of_their_stabilizers() {
    let g = LatticeGeometry::build_torus(4, 6).unwrap();
    let oracle = ConvolutionOracle::new(&g).unwrap();
    let n = g.n_qubits();
    for q in 0..n {
        // Z anticommutes with the two plaquettes on q, X with the two vertices.
        let cases = [
            (Pauli::Z, g.plaquettes_of(q).map(|c| readout_qubit(&g, StabilizerId::plaquette(c / 4, c % 4)))),
            (Pauli::X, g.vertices_of(q).map(|c| readout_qubit(&g, StabilizerId::vertex(c / 4, c % 4)))),
        ];
        for (p, mut expected) in cases {
            expected.sort_unstable();
            let rep = oracle.syndrome_map(&PauliFrame::single(n, q, p)).unwrap();
            assert!(rep.random.is_empty());
            assert_eq!(rep.flips, expected.to_vec(), "{p:?} on {q}");
        }
    }
}

#[test]
fn stabilizers_and_logicals_are_invisible() {
    let g = LatticeGeometry::build_torus(6, 6).unwrap();
    let n = g.n_qubits();
    let lo = g.logical_operators();
    let mut frames = vec![
        PauliFrame::z_string(n, &lo.z_horizontal),
        PauliFrame::z_string(n, &lo.z_vertical),
        PauliFrame::x_string(n, &lo.x_horizontal),
        PauliFrame::x_string(n, &lo.x_vertical),
    ];
    frames.push(PauliFrame::x_string(n, &g.plaquettes()[7]));
    frames.push(PauliFrame::z_string(n, &g.vertices()[11]));
    for f in &frames {
        let rep = check_syndrome_map(&g, f).unwrap();
        assert!(rep.flips.is_empty() && rep.random.is_empty());
    }
}

#[test]
fn frame_propagation_agrees_with_the_tableau_on_two_qubit_errors() {
    let g = LatticeGeometry::build_torus(3, 3).unwrap();
    let oracle = ConvolutionOracle::new(&g).unwrap();
    let conv = build_convolution(&g).unwrap();
    let n = g.n_qubits();
    for a in 0..n {
        for b in a + 1..n {
            let mut e = PauliFrame::single(n, a, Pauli::Y);
            e.compose(&PauliFrame::single(n, b, Pauli::X));
            let frame: Vec<usize> = e.conjugate_through(&conv).unwrap().measurement_flips().iter_ones().collect();
            assert_eq!(oracle.syndrome_map(&e).unwrap().flips, frame, "Y{a} X{b}");
        }
    }
}

#[test]
fn circuits_size_with_the_lattice() {
    for l in [3, 9] {
        let g = LatticeGeometry::build_torus(l, l).unwrap();
        assert_eq!(build_prep_circuit(&g).unwrap().n_qubits(), g.n_qubits());
        assert_eq!(build_convolution(&g).unwrap().n_qubits(), g.n_qubits());
    }
}
