use super::encode::Encoded;
use super::FqswError;
use crate::qstate::linalg::{complete_unitary, from_row_major, matmul, select, to_row_major, CMatrix};
use crate::qstate::{maximally_entangled, PureState, Register, SystemLayout, Unitary};

/// Largest padded state (in amplitudes) a decoder is built for.
pub const MAX_DECODER_AMPLITUDES: usize = 1 << 22;

/// Largest receiver dimension for which the decoder is completed to an
/// explicit unitary.
pub const MAX_UNITARY_DIM: usize = 2048;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `target` after a merge: the source renamed `{source}_hat` at the
/// receiver, and the kept register maximally entangled with a receiver
/// register `{source}_ebit`.
pub fn merged_target(psi: &PureState, enc: &Encoded) -> Result<PureState, FqswError> {
    let src = &enc.roles.source;
    let ebits = maximally_entangled(enc.kept_dim(), [&enc.kept(), &format!("{src}_ebit")])?;
    Ok(psi.rename(src, &format!("{src}_hat"))?.tensor(&ebits)?)
}

/// A receiver-side unitary relating two purifications of (ideally) the
/// same outside marginal.
///
/// The receiver's actual registers are padded with `{tag}_pad` and the
/// target's with `{tag}_slack`, both starting in |0>, so the two sides
/// have equal dimension. The decoder is stored as a pair of orthonormal
/// frames: it maps `domain` onto `image`, which is all that is needed to
/// act on the state it was built from; [`Decoder::unitary`] completes it.
#[derive(Clone, Debug)]
pub struct Decoder {
    inputs: Vec<Register>,
    outputs: Vec<Register>,
    domain: CMatrix,
    image: CMatrix,
    predicted_fidelity: f64,
}

impl Decoder {
    /// Padded receiver dimension.
    pub fn dim(&self) -> usize {
        self.domain.nrows()
    }

    pub fn inputs(&self) -> &[Register] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Register] {
        &self.outputs
    }

    /// The largest overlap any receiver unitary can reach, read off the
    /// singular values during construction.
    pub fn predicted_fidelity(&self) -> f64 {
        self.predicted_fidelity
    }

    fn pad(&self) -> &Register {
        self.inputs.last().expect("pad register")
    }

    fn slack(&self) -> &Register {
        self.outputs.last().expect("slack register")
    }

    /// `target` with the slack register appended.
    pub fn padded_target(&self, target: &PureState) -> Result<PureState, FqswError> {
        Ok(target.with_ancilla(&self.slack().name, self.slack().dim)?)
    }

    /// Applies the decoder to the state it was built from (or any state
    /// whose receiver support lies in the same subspace). The output
    /// registers come first in the result.
    pub fn apply(&self, actual: &PureState) -> Result<PureState, FqswError> {
        let padded = actual.with_ancilla(&self.pad().name, self.pad().dim)?;
        let names: Vec<&str> = self.inputs.iter().map(|r| r.name.as_str()).collect();
        let (m, rest) = padded.matrix_with_cols(&names)?;
        let out = matmul(&self.image, &matmul(&self.domain.adjoint(), &m));
        let mut registers = self.outputs.clone();
        for name in rest {
            let dim = padded.layout().dim_of(&name)?;
            registers.push(Register { name, dim });
        }
        let layout = SystemLayout::from_registers(registers)?;
        Ok(PureState::from_parts_unchecked(layout, to_row_major(&out)))
    }

    /// The decoder completed to a unitary on the padded receiver space.
    pub fn unitary(&self) -> Result<Unitary, FqswError> {
        let d = self.dim();
        if d > MAX_UNITARY_DIM {
            return Err(FqswError::DecoderTooLarge { size: d, cap: MAX_UNITARY_DIM });
        }
        let a = complete_unitary(&self.domain);
        let b = complete_unitary(&self.image);
        Ok(Unitary::new(matmul(&b, &a.adjoint()))?)
    }

    /// Applies the completed unitary to the receiver registers of `state`
    /// (padding first).
    pub fn apply_unitary(&self, state: &PureState, v: &Unitary) -> Result<PureState, FqswError> {
        let padded = state.with_ancilla(&self.pad().name, self.pad().dim)?;
        let names: Vec<&str> = self.inputs.iter().map(|r| r.name.as_str()).collect();
        Ok(padded.apply_relabel(&names, v, &self.outputs)?)
    }

    /// Undoes [`Decoder::apply_unitary`]: maps the output registers back to
    /// the inputs, pad included.
    pub fn apply_adjoint(&self, state: &PureState, v: &Unitary) -> Result<PureState, FqswError> {
        let names: Vec<&str> = self.outputs.iter().map(|r| r.name.as_str()).collect();
        Ok(state.apply_relabel(&names, &v.adjoint(), &self.inputs)?)
    }
}

fn receiver_registers(state: &PureState, outside: &[&str]) -> Vec<Register> {
    state
        .layout()
        .registers()
        .iter()
        .filter(|r| !outside.contains(&r.name.as_str()))
        .cloned()
        .collect()
}

/// Builds the decoder maximizing `|<target| V |actual>|` over unitaries on
/// everything outside `outside`.
///
/// With `P` and `S` the receiver-by-outside matrices of the padded states,
/// the optimum is `||P S^dagger||_1`. Writing `P = Q_p R_p`,
/// `S = Q_s R_s` and `R_p R_s^dagger = W Sigma X^dagger`, the decoder maps
/// `Q_p W` onto `Q_s X`.
pub fn build_decoder(
    actual: &PureState,
    target: &PureState,
    outside: &[&str],
    tag: &str,
) -> Result<Decoder, FqswError> {
    for name in outside {
        let (da, dt) = (actual.layout().dim_of(name)?, target.layout().dim_of(name)?);
        if da != dt {
            return Err(FqswError::OutsideMismatch(name.to_string()));
        }
    }
    let recv_a = receiver_registers(actual, outside);
    let recv_t = receiver_registers(target, outside);
    let da: usize = recv_a.iter().map(|r| r.dim).product();
    let dt: usize = recv_t.iter().map(|r| r.dim).product();
    let d_out: usize = outside.iter().map(|n| actual.layout().dim_of(n).unwrap()).product();
    let lcm = (da / gcd(da, dt))
        .checked_mul(dt)
        .ok_or(FqswError::DecoderTooLarge { size: usize::MAX, cap: MAX_DECODER_AMPLITUDES })?;
    let size = lcm.saturating_mul(d_out);
    if size > MAX_DECODER_AMPLITUDES {
        return Err(FqswError::DecoderTooLarge { size, cap: MAX_DECODER_AMPLITUDES });
    }
    let pad = Register::new(format!("{tag}_pad"), lcm / da);
    let slack = Register::new(format!("{tag}_slack"), lcm / dt);

    let mut inputs = recv_a;
    inputs.push(pad.clone());
    let mut outputs = recv_t;
    outputs.push(slack.clone());

    let receiver_matrix = |s: &PureState, regs: &[Register]| -> Result<CMatrix, FqswError> {
        let names: Vec<&str> = regs.iter().map(|r| r.name.as_str()).collect();
        let mut order = names.clone();
        order.extend_from_slice(outside);
        let aligned = s.permuted(&order)?;
        let d: usize = regs.iter().map(|r| r.dim).product();
        Ok(from_row_major(d, d_out, aligned.amplitudes()))
    };
    let p = receiver_matrix(&actual.with_ancilla(&pad.name, pad.dim)?, &inputs)?;
    let s = receiver_matrix(&target.with_ancilla(&slack.name, slack.dim)?, &outputs)?;

    let (rows_p, qp, rp) = nonzero_row_qr(&p);
    let (rows_s, qs, rs) = nonzero_row_qr(&s);
    let svd = matmul(&rp, &rs.adjoint()).svd(true, true);
    let w = svd.u.expect("requested");
    let x = svd.v_t.expect("requested").adjoint();
    let predicted_fidelity = svd.singular_values.iter().sum::<f64>().clamp(0.0, 1.0);
    Ok(Decoder {
        inputs,
        outputs,
        domain: scatter_rows(&matmul(&qp, &w), &rows_p, p.nrows()),
        image: scatter_rows(&matmul(&qs, &x), &rows_s, s.nrows()),
        predicted_fidelity,
    })
}

/// Thin QR of the nonzero rows of `m`. Padding makes most rows of the
/// receiver matrices exactly zero, and dropping them leaves the column
/// space unchanged.
fn nonzero_row_qr(m: &CMatrix) -> (Vec<usize>, CMatrix, CMatrix) {
    let rows: Vec<usize> = (0..m.nrows())
        .filter(|&i| m.row(i).iter().any(|z| z.re != 0.0 || z.im != 0.0))
        .collect();
    let cols: Vec<usize> = (0..m.ncols()).collect();
    let (q, r) = select(m, &rows, &cols).qr().unpack();
    (rows, q, r)
}

fn scatter_rows(m: &CMatrix, rows: &[usize], n: usize) -> CMatrix {
    let mut out = CMatrix::zeros(n, m.ncols());
    for (k, &i) in rows.iter().enumerate() {
        out.row_mut(i).copy_from(&m.row(k));
    }
    out
}

/// `|<a|b>|`.
pub fn overlap(a: &PureState, b: &PureState) -> Result<f64, FqswError> {
    Ok(a.inner(b)?.norm().clamp(0.0, 1.0))
}
