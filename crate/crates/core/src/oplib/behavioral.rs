//! Behavioral stream models of every operator.
//!
//! Each model maps input bit streams to the exact output bit streams the
//! gate-level fragment produces (values and count, not timing). The
//! equivalence is enforced by tests that drive both forms with the same
//! randomized streams, so either form can stand in for the other: the
//! behavioral models power the token-level simulator and the compiler's
//! reference interpreter, the fragments power gate-level runs.

use super::OperatorKind;

/// Number of output ports of `kind` (matches `port_names().1.len()`).
pub fn output_arity(kind: &OperatorKind) -> usize {
    kind.port_names().1.len()
}

/// Run the stream model. `inputs` follows `port_names().0` order;
/// `source_limit` bounds the emission of source-only operators (the
/// constant ring), which otherwise produce forever.
pub fn behavioral(kind: &OperatorKind, inputs: &[Vec<bool>], source_limit: usize) -> Vec<Vec<bool>> {
    match kind {
        OperatorKind::Register(init) => {
            let mut out: Vec<bool> = init.token().into_iter().collect();
            out.extend_from_slice(&inputs[0]);
            vec![out]
        }
        OperatorKind::ShiftRegister(inits) => {
            let mut out: Vec<bool> = inits.iter().rev().filter_map(|i| i.token()).collect();
            out.extend_from_slice(&inputs[0]);
            vec![out]
        }
        OperatorKind::Fork2 => vec![inputs[0].clone(), inputs[0].clone()],
        OperatorKind::Join2 => {
            let n = inputs[0].len().min(inputs[1].len());
            vec![inputs[0][..n].to_vec(), inputs[1][..n].to_vec()]
        }
        OperatorKind::RSelect => {
            let (sel, a, b) = (&inputs[0], &inputs[1], &inputs[2]);
            let (mut ia, mut ib) = (0usize, 0usize);
            let mut out = Vec::new();
            for &s in sel {
                let src = if s { (a, &mut ia) } else { (b, &mut ib) };
                if *src.1 >= src.0.len() {
                    break;
                }
                out.push(src.0[*src.1]);
                *src.1 += 1;
            }
            vec![out]
        }
        OperatorKind::WSelect => {
            let (mut t, mut f) = (Vec::new(), Vec::new());
            for (&s, &x) in inputs[0].iter().zip(&inputs[1]) {
                if s {
                    t.push(x);
                } else {
                    f.push(x);
                }
            }
            vec![t, f]
        }
        OperatorKind::DimsAdder | OperatorKind::DualRailAdder => {
            let n = inputs.iter().map(Vec::len).min().unwrap_or(0);
            let (mut sum, mut cout) = (Vec::new(), Vec::new());
            for i in 0..n {
                let (a, b, c) = (inputs[0][i], inputs[1][i], inputs[2][i]);
                sum.push(a ^ b ^ c);
                cout.push((a && b) || (a && c) || (b && c));
            }
            vec![sum, cout]
        }
        OperatorKind::FrameGatedDelay { width, init } => {
            // Frame f forwards its first width-1 bits one position late
            // behind the injected frame-initial bit; the frame's last bit
            // is discarded. The next frame's initial bit is released as
            // soon as the current frame's forwards are done — the
            // injection does not wait for the discard to arrive.
            let mut out = vec![*init];
            for (k, &bit) in inputs[0].iter().enumerate() {
                let pos = k % width;
                if pos < width - 1 {
                    out.push(bit);
                    if pos == width - 2 {
                        out.push(*init);
                    }
                }
            }
            vec![out]
        }
        OperatorKind::SerialAdder { width } => {
            let n = inputs[0].len().min(inputs[1].len());
            let mut carry = false;
            let mut sum = Vec::with_capacity(n);
            for k in 0..n {
                let (a, b) = (inputs[0][k], inputs[1][k]);
                sum.push(a ^ b ^ carry);
                carry = (a && b) || (a && carry) || (b && carry);
                if k % width == width - 1 {
                    carry = false;
                }
            }
            vec![sum]
        }
        OperatorKind::ConstRing { bits } => {
            vec![bits.iter().copied().cycle().take(source_limit).collect()]
        }
    }
}
