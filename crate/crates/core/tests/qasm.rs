//! Exported QASM, replayed by a small interpreter, must reproduce the circuit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unisynth::skeletons::{full_skeleton, line_skeleton, star_skeleton_default};
use unisynth::{evaluate, export_qasm, ComplexMatrix, ParamAssignment, Skeleton, C64};

/// Applies a 2x2 gate on `qubit` (qubit 0 is the most significant bit).
fn apply(u: &mut ComplexMatrix, n: usize, qubit: usize, g: [[C64; 2]; 2]) {
    let dim = 1 << n;
    let bit = 1 << (n - 1 - qubit);
    for col in 0..dim {
        for row in 0..dim {
            if row & bit != 0 {
                continue;
            }
            let (a, b) = (u[(row, col)], u[(row | bit, col)]);
            let top = g[0][0] * a + g[0][1] * b;
            let bottom = g[1][0] * a + g[1][1] * b;
            set(u, row, col, top);
            set(u, row | bit, col, bottom);
        }
    }
}

fn set(u: &mut ComplexMatrix, r: usize, c: usize, v: C64) {
    let dim = u.dim();
    u.as_mut_slice()[r * dim + c] = v;
}

fn qubit(arg: &str) -> usize {
    arg.trim().trim_start_matches("q[").trim_end_matches(']').parse().unwrap()
}

fn interpret(text: &str) -> ComplexMatrix {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("OPENQASM 2.0;"));
    assert_eq!(lines.next(), Some("include \"qelib1.inc\";"));
    let decl = lines.next().unwrap();
    let n: usize = decl.trim_start_matches("qreg q[").trim_end_matches("];").parse().unwrap();
    let mut u = ComplexMatrix::identity(1 << n);
    for line in lines {
        let line = line.trim_end_matches(';');
        let (op, args) = line.split_once(' ').unwrap();
        if op == "cx" {
            let (c, t) = args.split_once(',').unwrap();
            let (c, t) = (qubit(c), qubit(t));
            let dim = 1 << n;
            let (cb, tb) = (1 << (n - 1 - c), 1 << (n - 1 - t));
            let mut next = u.clone();
            for row in 0..dim {
                let src = if row & cb != 0 { row ^ tb } else { row };
                for col in 0..dim {
                    set(&mut next, row, col, u[(src, col)]);
                }
            }
            u = next;
            continue;
        }
        let theta: f64 = op.split_once('(').unwrap().1.trim_end_matches(')').parse().unwrap();
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let z = C64::new(0.0, 0.0);
        let g = if op.starts_with("rz") {
            [[C64::from_polar(1.0, -theta / 2.0), z], [z, C64::from_polar(1.0, theta / 2.0)]]
        } else if op.starts_with("ry") {
            [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
        } else {
            panic!("unexpected instruction {line}")
        };
        apply(&mut u, n, qubit(args), g);
    }
    u
}

#[test]
fn replayed_qasm_matches_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let skeletons: Vec<Skeleton> = vec![
        full_skeleton(2).unwrap(),
        line_skeleton(3, 4).unwrap(),
        star_skeleton_default(4, 5).unwrap(),
        full_skeleton(2).unwrap().flipped(),
    ];
    for s in &skeletons {
        for _ in 0..5 {
            let p = ParamAssignment::random(s, &mut rng);
            let text = export_qasm(s, &p).unwrap();
            let replay = interpret(&text);
            let u = evaluate(s, &p).unwrap();
            assert!(replay.max_abs_diff(&u) <= 1e-12, "{}", replay.max_abs_diff(&u));
            assert_eq!(text.lines().filter(|l| l.starts_with("cx")).count(), s.cnot_count());
        }
    }
}
