//! Gate-level netlist fragments for the operator library.
//!
//! Every fragment connects *channels*: the caller creates the channel
//! objects and the fragment adds gates that drive its output rails and
//! its input acknowledges. Composition is by channel sharing, so a chain
//! of operators is built by passing one operator's output channel as the
//! next operator's input.
//!
//! The storage element everywhere is a half-buffer latch:
//!
//! ```text
//!   nack  = NOR(out.ack, out.ack)        (inverter)
//!   out.t = C(in.t, nack)                (preset for ONE_INIT)
//!   out.f = C(in.f, nack)                (preset for ZERO_INIT)
//!   in.ack = OR(out.t, out.f)
//! ```
//!
//! It stores one codeword or a spacer per stage, so a ring of such
//! latches is live only if it has at least `2*tokens + 1` stages: each
//! data token occupies a stage and needs a trailing spacer stage, plus
//! one free stage to move into.

use crate::dualrail::Channel;
use crate::kernel::{GateKind, NetlistBuilder};

/// Power-up state of a register stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegisterInit {
    /// The stage starts empty (spacer).
    Empty,
    /// The stage starts holding a FALSE codeword (bit 0).
    Zero,
    /// The stage starts holding a TRUE codeword (bit 1).
    One,
}

impl RegisterInit {
    pub fn token(self) -> Option<bool> {
        match self {
            RegisterInit::Empty => None,
            RegisterInit::Zero => Some(false),
            RegisterInit::One => Some(true),
        }
    }

    pub fn from_bit(bit: bool) -> RegisterInit {
        if bit {
            RegisterInit::One
        } else {
            RegisterInit::Zero
        }
    }
}

/// One half-buffer register stage between `input` and `output`.
pub fn register(
    b: &mut NetlistBuilder,
    init: RegisterInit,
    input: &Channel,
    output: &Channel,
    prefix: &str,
) {
    let nack = b.net(format!("{prefix}.nack"));
    b.gate(GateKind::Nor2, &[output.ack, output.ack], nack);
    let g_t = b.gate(GateKind::CElement, &[input.t, nack], output.t);
    let g_f = b.gate(GateKind::CElement, &[input.f, nack], output.f);
    b.gate(GateKind::Or2, &[output.t, output.f], input.ack);
    match init {
        RegisterInit::Empty => {}
        RegisterInit::Zero => b.preset(g_f),
        RegisterInit::One => b.preset(g_t),
    }
}

/// A chain of register stages. `inits[0]` is the stage nearest `input`;
/// tokens leave in reverse stage order (the stage nearest `output`
/// first).
pub fn register_chain(
    b: &mut NetlistBuilder,
    inits: &[RegisterInit],
    input: &Channel,
    output: &Channel,
    prefix: &str,
) {
    assert!(!inits.is_empty(), "register chain needs at least one stage");
    let n = inits.len();
    let mut prev = input.clone();
    for (i, &init) in inits.iter().enumerate() {
        let next = if i + 1 == n {
            output.clone()
        } else {
            Channel::new(b, &format!("{prefix}.s{i}"))
        };
        register(b, init, &prev, &next, &format!("{prefix}.r{i}"));
        prev = next;
    }
}

/// A shift register holding `data_inits` tokens, with one empty stage
/// interleaved after every data stage so that a full register can still
/// stream at rate: `k` data stages become `2k` physical stages. Tokens
/// emit in reverse order of `data_inits`.
pub fn shift_register(
    b: &mut NetlistBuilder,
    data_inits: &[RegisterInit],
    input: &Channel,
    output: &Channel,
    prefix: &str,
) {
    let stages: Vec<RegisterInit> = data_inits
        .iter()
        .flat_map(|&d| [d, RegisterInit::Empty])
        .collect();
    register_chain(b, &stages, input, output, prefix);
}

/// Replicate a channel to two consumers. The input is acknowledged when
/// both branches have acknowledged (C-element join of the acks).
pub fn fork2(
    b: &mut NetlistBuilder,
    input: &Channel,
    out0: &Channel,
    out1: &Channel,
    _prefix: &str,
) {
    b.gate(GateKind::Buf, &[input.t], out0.t);
    b.gate(GateKind::Buf, &[input.f], out0.f);
    b.gate(GateKind::Buf, &[input.t], out1.t);
    b.gate(GateKind::Buf, &[input.f], out1.f);
    b.gate(GateKind::CElement, &[out0.ack, out1.ack], input.ack);
}

/// Synchronize two channels into one two-bit handshake. The outputs must
/// share their acknowledge net (see [`Channel::pair_shared_ack`]); each
/// output codeword completes only when *both* inputs have arrived.
pub fn join2(
    b: &mut NetlistBuilder,
    in0: &Channel,
    in1: &Channel,
    out0: &Channel,
    out1: &Channel,
    prefix: &str,
) {
    assert_eq!(
        out0.ack, out1.ack,
        "join outputs share a single acknowledge"
    );
    let done0 = b.net(format!("{prefix}.done0"));
    let done1 = b.net(format!("{prefix}.done1"));
    b.gate(GateKind::Or2, &[in0.t, in0.f], done0);
    b.gate(GateKind::Or2, &[in1.t, in1.f], done1);
    b.gate(GateKind::CElement, &[in0.t, done1], out0.t);
    b.gate(GateKind::CElement, &[in0.f, done1], out0.f);
    b.gate(GateKind::CElement, &[in1.t, done0], out1.t);
    b.gate(GateKind::CElement, &[in1.f, done0], out1.f);
    b.gate(GateKind::Buf, &[out0.ack], in0.ack);
    b.gate(GateKind::Buf, &[out0.ack], in1.ack);
}

/// Read-select: steer one of two input channels to the output, under a
/// dual-rail select token. `sel` TRUE takes from `in_t`, FALSE from
/// `in_f`. The unselected input is left pending — it is neither consumed
/// nor acknowledged.
pub fn rselect(
    b: &mut NetlistBuilder,
    sel: &Channel,
    in_t: &Channel,
    in_f: &Channel,
    out: &Channel,
    prefix: &str,
) {
    let mt_t = b.net(format!("{prefix}.mt_t"));
    let mt_f = b.net(format!("{prefix}.mt_f"));
    let mf_t = b.net(format!("{prefix}.mf_t"));
    let mf_f = b.net(format!("{prefix}.mf_f"));
    b.gate(GateKind::CElement, &[sel.t, in_t.t], mt_t);
    b.gate(GateKind::CElement, &[sel.t, in_t.f], mt_f);
    b.gate(GateKind::CElement, &[sel.f, in_f.t], mf_t);
    b.gate(GateKind::CElement, &[sel.f, in_f.f], mf_f);
    b.gate(GateKind::Or2, &[mt_t, mf_t], out.t);
    b.gate(GateKind::Or2, &[mt_f, mf_f], out.f);
    let done_t = b.net(format!("{prefix}.done_t"));
    let done_f = b.net(format!("{prefix}.done_f"));
    b.gate(GateKind::Or2, &[mt_t, mt_f], done_t);
    b.gate(GateKind::Or2, &[mf_t, mf_f], done_f);
    b.gate(GateKind::And2, &[out.ack, done_t], in_t.ack);
    b.gate(GateKind::And2, &[out.ack, done_f], in_f.ack);
    b.gate(GateKind::Buf, &[out.ack], sel.ack);
}

/// Write-select: steer the input channel to one of two output channels,
/// under a dual-rail select token. `sel` TRUE writes `out_t`, FALSE
/// writes `out_f`.
pub fn wselect(
    b: &mut NetlistBuilder,
    sel: &Channel,
    input: &Channel,
    out_t: &Channel,
    out_f: &Channel,
    prefix: &str,
) {
    b.gate(GateKind::CElement, &[sel.t, input.t], out_t.t);
    b.gate(GateKind::CElement, &[sel.t, input.f], out_t.f);
    b.gate(GateKind::CElement, &[sel.f, input.t], out_f.t);
    b.gate(GateKind::CElement, &[sel.f, input.f], out_f.f);
    let done_t = b.net(format!("{prefix}.done_t"));
    let done_f = b.net(format!("{prefix}.done_f"));
    b.gate(GateKind::Or2, &[out_t.t, out_t.f], done_t);
    b.gate(GateKind::Or2, &[out_f.t, out_f.f], done_f);
    // The per-branch grant must be a C-element, not an AND: the input
    // acknowledge may only fall once the selected consumer's acknowledge
    // has also fallen, otherwise the producer can launch the next
    // codeword while the consumer still holds its acknowledge high.
    let g_t = b.net(format!("{prefix}.g_t"));
    let g_f = b.net(format!("{prefix}.g_f"));
    b.gate(GateKind::CElement, &[out_t.ack, done_t], g_t);
    b.gate(GateKind::CElement, &[out_f.ack, done_f], g_f);
    b.gate(GateKind::Or2, &[g_t, g_f], input.ack);
    b.gate(GateKind::Buf, &[input.ack], sel.ack);
}

/// Consume-and-discard: acknowledges every codeword immediately.
pub fn sink(b: &mut NetlistBuilder, ch: &Channel, _prefix: &str) {
    b.gate(GateKind::Or2, &[ch.t, ch.f], ch.ack);
}

/// DIMS full adder: every input minterm is detected by a three-input
/// C-element, minterms are OR-combined into the sum and carry rails, and
/// the input acknowledge joins both output acknowledges. Strongly
/// indicating, at the cost of nine C-gates.
pub fn dims_adder(
    b: &mut NetlistBuilder,
    a: &Channel,
    bb: &Channel,
    cin: &Channel,
    sum: &Channel,
    cout: &Channel,
    prefix: &str,
) {
    let rails = |ch: &Channel, bit: bool| if bit { ch.t } else { ch.f };
    let mut minterm = [crate::kernel::NetId(0); 8];
    for idx in 0..8usize {
        let (ai, bi, ci) = (idx & 4 != 0, idx & 2 != 0, idx & 1 != 0);
        let m = b.net(format!("{prefix}.m{}{}{}", ai as u8, bi as u8, ci as u8));
        b.gate(
            GateKind::CElement3,
            &[rails(a, ai), rails(bb, bi), rails(cin, ci)],
            m,
        );
        minterm[idx] = m;
    }
    let ones = |n: usize| (n as u32).count_ones();
    let pick = |count: u32| -> Vec<crate::kernel::NetId> {
        (0..8).filter(|&i| ones(i) == count).map(|i| minterm[i]).collect()
    };
    let h1 = b.net(format!("{prefix}.h1"));
    let h2 = b.net(format!("{prefix}.h2"));
    b.gate(GateKind::Or3, &pick(1), h1);
    b.gate(GateKind::Or3, &pick(2), h2);
    b.gate(GateKind::Or2, &[h1, minterm[7]], sum.t);
    b.gate(GateKind::Or2, &[h2, minterm[0]], sum.f);
    b.gate(GateKind::Or2, &[h2, minterm[7]], cout.t);
    b.gate(GateKind::Or2, &[h1, minterm[0]], cout.f);
    adder_ack_join(b, a, bb, cin, sum, cout, prefix);
}

/// Complete dual-rail full adder: the full minterm expansion of both
/// output polarities over the dual-rail inputs, with plain AND gates
/// detecting the minterms. Because input codewords are one-hot per rail
/// pair and rails are monotone within a phase, exactly one minterm fires
/// per evaluation and the set phase is hazard-free. Eliminates the DIMS
/// C-element plane: one C-gate (the acknowledge join) instead of nine.
///
/// The saving buys a *timing assumption*: an AND gate's return-to-zero
/// is not indicated (a minterm can release before its pair term has
/// fallen), so internal transitions must settle within one handshake
/// round trip. Safe under bounded delay jitter; under unbounded per-gate
/// delays a stale pair term can fire a spurious minterm. Use
/// [`dims_adder`] where full delay-insensitivity is required.
pub fn dr_adder(
    b: &mut NetlistBuilder,
    a: &Channel,
    bb: &Channel,
    cin: &Channel,
    sum: &Channel,
    cout: &Channel,
    prefix: &str,
) {
    let rails = |ch: &Channel, bit: bool| if bit { ch.t } else { ch.f };
    // Operand pair plane, then one AND per (a, b, cin) minterm.
    let mut pair = [crate::kernel::NetId(0); 4];
    for idx in 0..4usize {
        let (ai, bi) = (idx & 2 != 0, idx & 1 != 0);
        let p = b.net(format!("{prefix}.p{}{}", ai as u8, bi as u8));
        b.gate(GateKind::And2, &[rails(a, ai), rails(bb, bi)], p);
        pair[idx] = p;
    }
    let mut minterm = [crate::kernel::NetId(0); 8];
    for idx in 0..8usize {
        let (ai, bi, ci) = (idx & 4 != 0, idx & 2 != 0, idx & 1 != 0);
        let m = b.net(format!("{prefix}.m{}{}{}", ai as u8, bi as u8, ci as u8));
        b.gate(GateKind::And2, &[pair[idx >> 1], rails(cin, ci)], m);
        minterm[idx] = m;
    }
    let pick = |count: u32| -> Vec<crate::kernel::NetId> {
        (0..8)
            .filter(|&i: &usize| (i as u32).count_ones() == count)
            .map(|i| minterm[i])
            .collect()
    };
    let h1 = b.net(format!("{prefix}.h1"));
    let h2 = b.net(format!("{prefix}.h2"));
    b.gate(GateKind::Or3, &pick(1), h1);
    b.gate(GateKind::Or3, &pick(2), h2);
    b.gate(GateKind::Or2, &[h1, minterm[7]], sum.t);
    b.gate(GateKind::Or2, &[h2, minterm[0]], sum.f);
    b.gate(GateKind::Or2, &[h2, minterm[7]], cout.t);
    b.gate(GateKind::Or2, &[h1, minterm[0]], cout.f);
    adder_ack_join(b, a, bb, cin, sum, cout, prefix);
}

/// Shared acknowledge plumbing for the full adders: the operand
/// acknowledge rises (falls) once both the sum and carry consumers have
/// acknowledged (released).
fn adder_ack_join(
    b: &mut NetlistBuilder,
    a: &Channel,
    bb: &Channel,
    cin: &Channel,
    sum: &Channel,
    cout: &Channel,
    prefix: &str,
) {
    let ackj = b.net(format!("{prefix}.ackj"));
    b.gate(GateKind::CElement, &[sum.ack, cout.ack], ackj);
    b.gate(GateKind::Buf, &[ackj], a.ack);
    b.gate(GateKind::Buf, &[ackj], bb.ack);
    b.gate(GateKind::Buf, &[ackj], cin.ack);
}

/// A closed self-refilling ring that emits `bits` cyclically on `tap`
/// (bits[0] first). `slack` extra empty stages beyond the one-per-token
/// interleave set the ring's internal bandwidth; `slack >= 1` is required
/// for liveness (`2k+1` stages for `k` tokens), more lets the ring keep
/// up with faster consumers.
pub fn const_ring(
    b: &mut NetlistBuilder,
    bits: &[bool],
    slack: usize,
    tap: &Channel,
    prefix: &str,
) {
    assert!(!bits.is_empty());
    assert!(slack >= 1, "a closed ring needs at least one free stage");
    let mut stages: Vec<RegisterInit> = vec![RegisterInit::Empty; slack];
    for &bit in bits.iter().rev() {
        stages.push(RegisterInit::Empty);
        stages.push(RegisterInit::from_bit(bit));
    }
    let loop_ch = Channel::new(b, &format!("{prefix}.loop"));
    let head = Channel::new(b, &format!("{prefix}.head"));
    register_chain(b, &stages, &loop_ch, &head, &format!("{prefix}.ring"));
    fork2(b, &head, tap, &loop_ch, &format!("{prefix}.fork"));
}

/// Frame-gated single-bit delay: within every `width`-bit frame, the
/// incoming bits are shifted one position later; the frame's first output
/// bit is `init_bit` (power-up token for the first frame, re-injected
/// from a constant ring afterwards) and the frame's last input bit is
/// discarded. This is the storage structure behind both the serial
/// adder's carry loop and initialized sub-word delay registers.
pub fn frame_gated_delay(
    b: &mut NetlistBuilder,
    width: usize,
    init_bit: bool,
    input: &Channel,
    output: &Channel,
    prefix: &str,
) {
    assert!(width >= 2, "frame gating needs at least two bit slots");
    let x1 = Channel::new(b, &format!("{prefix}.x1"));
    let x2 = Channel::new(b, &format!("{prefix}.x2"));
    let x3 = Channel::new(b, &format!("{prefix}.x3"));
    let x4 = Channel::new(b, &format!("{prefix}.x4"));
    let x5 = Channel::new(b, &format!("{prefix}.x5"));
    let discard = Channel::new(b, &format!("{prefix}.discard"));
    let sel_w = Channel::new(b, &format!("{prefix}.sel_w"));
    let sel_r = Channel::new(b, &format!("{prefix}.sel_r"));
    let ctrl = Channel::new(b, &format!("{prefix}.ctrl"));
    let inject = Channel::new(b, &format!("{prefix}.inject"));

    register(b, RegisterInit::Empty, input, &x1, &format!("{prefix}.rin"));
    wselect(b, &sel_w, &x1, &discard, &x2, &format!("{prefix}.wsel"));
    sink(b, &discard, &format!("{prefix}.sink"));
    register(b, RegisterInit::Empty, &x2, &x3, &format!("{prefix}.rmid"));
    rselect(b, &sel_r, &inject, &x3, &x4, &format!("{prefix}.rsel"));
    // A preset latch must be fed by an ack-gated stage: the select's
    // combinational outputs would otherwise present the next token while
    // the power-up token still sits unacknowledged on the output rails,
    // putting both rails of the output channel high. The empty stage
    // holds the successor until the power-up token has fully retired.
    register(b, RegisterInit::Empty, &x4, &x5, &format!("{prefix}.rpre"));
    register(
        b,
        RegisterInit::from_bit(init_bit),
        &x5,
        output,
        &format!("{prefix}.rout"),
    );

    // Select pattern: F for bits 0..width-2, T at the frame boundary
    // (discard the last carry/bit, inject the refill).
    let mut pattern = vec![false; width - 1];
    pattern.push(true);
    const_ring(b, &pattern, width + 1, &ctrl, &format!("{prefix}.ctrlring"));
    fork2(b, &ctrl, &sel_w, &sel_r, &format!("{prefix}.selfork"));
    const_ring(b, &[init_bit], 1, &inject, &format!("{prefix}.injring"));
}

/// Which full-adder cell a serial adder is built around.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AdderCore {
    /// DIMS: fully delay-insensitive, nine C-gates.
    #[default]
    Dims,
    /// Complete dual-rail: one C-gate, bounded-jitter assumption.
    CompleteDualRail,
}

/// Bit-serial word adder: a full-adder core, a sum output latch, and a
/// frame-gated carry loop that feeds the carry back one bit later and
/// restarts it at zero on every `width`-bit frame boundary. Operands
/// arrive LSB first; the carry for bit 0 of the first frame is the carry
/// register's power-up token.
pub fn serial_adder(
    b: &mut NetlistBuilder,
    width: usize,
    core: AdderCore,
    a: &Channel,
    bb: &Channel,
    sum_out: &Channel,
    prefix: &str,
) {
    serial_addsub(b, width, core, false, a, bb, sum_out, prefix);
}

/// Bit-serial word adder/subtractor. Subtraction is two's complement
/// `a + !b + 1` at zero gate cost: the `b` rails are crossed (a wiring
/// view, no hardware) and the carry loop's per-frame refill token is a
/// one instead of a zero.
pub fn serial_addsub(
    b: &mut NetlistBuilder,
    width: usize,
    core: AdderCore,
    subtract: bool,
    a: &Channel,
    bb: &Channel,
    sum_out: &Channel,
    prefix: &str,
) {
    let b_eff = if subtract {
        Channel {
            t: bb.f,
            f: bb.t,
            ack: bb.ack,
        }
    } else {
        bb.clone()
    };
    let cin = Channel::new(b, &format!("{prefix}.cin"));
    let sum_core = Channel::new(b, &format!("{prefix}.sum_core"));
    let cout_core = Channel::new(b, &format!("{prefix}.cout_core"));
    match core {
        AdderCore::Dims => dims_adder(
            b,
            a,
            &b_eff,
            &cin,
            &sum_core,
            &cout_core,
            &format!("{prefix}.fa"),
        ),
        AdderCore::CompleteDualRail => dr_adder(
            b,
            a,
            &b_eff,
            &cin,
            &sum_core,
            &cout_core,
            &format!("{prefix}.fa"),
        ),
    }
    register(
        b,
        RegisterInit::Empty,
        &sum_core,
        sum_out,
        &format!("{prefix}.rsum"),
    );
    frame_gated_delay(
        b,
        width,
        subtract,
        &cout_core,
        &cin,
        &format!("{prefix}.carry"),
    );
}
