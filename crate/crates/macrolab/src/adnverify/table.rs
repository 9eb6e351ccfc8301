// SPDX-License-Identifier: Apache-2.0

//! Transcribed closed forms for the complementing-condition computation.
//!
//! Every entry is plain text in the syntax of [`crate::symkernel::parse_expr`]
//! with a few textual placeholders expanded before parsing:
//!
//! * `{s}` is `|ξ|²`, `{xn}` is `ξ·n`, `{T}` is `τ − iℓ`;
//! * `{Bjk}` and `{Cjk}` (digits `j, k`) insert the instantiated templates
//!   stored under `B_jk` and `C_jk`, whose index letters `Lj, Lk, nj, nk`
//!   are replaced by the concrete symbols.
//!
//! The table is data, so a single sign can be flipped to test that the
//! verifier notices (see [`Transcription::flip_sign`]).

use crate::error::{MacrolabError, Result};
use crate::symkernel::{parse_expr, SymExpr};

/// Raw transcription entries as `(key, text)`.
pub const TABLE: &[(&str, &str)] = &[
    // Principal symbol of the interior operator.
    ("l[1,1]", "-({s} + xi1^2)"),
    ("l[1,2]", "-(xi1*xi2)"),
    ("l[1,3]", "-(xi1*xi3)"),
    ("l[2,1]", "-(xi1*xi2)"),
    ("l[2,2]", "-({s} + xi2^2)"),
    ("l[2,3]", "-(xi2*xi3)"),
    ("l[3,1]", "-(xi1*xi3)"),
    ("l[3,2]", "-(xi2*xi3)"),
    ("l[3,3]", "-({s} + xi3^2)"),
    ("D", "-2*{s}^3"),
    // Adjoint matrix, with the overall minus sign of the display.
    ("L[1,1]", "-({s}^2 + (xi2^2 + xi3^2)*{s})"),
    ("L[1,2]", "-(-xi1*xi2*{s})"),
    ("L[1,3]", "-(-xi1*xi3*{s})"),
    ("L[2,1]", "-(-xi1*xi2*{s})"),
    ("L[2,2]", "-({s}^2 + (xi1^2 + xi3^2)*{s})"),
    ("L[2,3]", "-(-xi2*xi3*{s})"),
    ("L[3,1]", "-(-xi1*xi3*{s})"),
    ("L[3,2]", "-(-xi2*xi3*{s})"),
    ("L[3,3]", "-({s}^2 + (xi1^2 + xi2^2)*{s})"),
    ("D(L+tau*n)", "-2*(tau^2 + l^2)^3"),
    ("M+", "tau^3 - 3*I*l*tau^2 - 3*l^2*tau + I*l^3"),
    // Boundary symbol.
    ("B[1,1]", "{xn} + xi1*n1 - 2*n1^2*{xn}"),
    ("B[1,2]", "n2*xi1 - 2*n1*n2*{xn}"),
    ("B[1,3]", "n3*xi1 - 2*n1*n3*{xn}"),
    ("B[2,1]", "n1*xi2 - 2*n2*n1*{xn}"),
    ("B[2,2]", "{xn} + xi2*n2 - 2*n2^2*{xn}"),
    ("B[2,3]", "n3*xi2 - 2*n2*n3*{xn}"),
    ("B[3,1]", "n1*xi3 - 2*n3*n1*{xn}"),
    ("B[3,2]", "n2*xi3 - 2*n3*n2*{xn}"),
    ("B[3,3]", "{xn} + xi3*n3 - 2*n3^2*{xn}"),
    ("B[4,1]", "n1"),
    ("B[4,2]", "n2"),
    ("B[4,3]", "n3"),
    ("Btn[1,1]", "tau*(1 - n1^2) + L1*n1"),
    ("Btn[1,2]", "L1*n2 - tau*n1*n2"),
    ("Btn[1,3]", "L1*n3 - tau*n1*n3"),
    ("Btn[2,1]", "L2*n1 - tau*n1*n2"),
    ("Btn[2,2]", "tau*(1 - n2^2) + L2*n2"),
    ("Btn[2,3]", "L2*n3 - tau*n2*n3"),
    ("Btn[3,1]", "L3*n1 - tau*n1*n3"),
    ("Btn[3,2]", "L3*n2 - tau*n2*n3"),
    ("Btn[3,3]", "tau*(1 - n3^2) + L3*n3"),
    ("Btn[4,1]", "n1"),
    ("Btn[4,2]", "n2"),
    ("Btn[4,3]", "n3"),
    ("Btn rank", "0"),
    // First two rows when n3 = 0.
    ("Bn3[1,1]", "tau*n2^2 - L2*n2"),
    ("Bn3[1,2]", "L1*n2 - tau*n1*n2"),
    ("Bn3[1,3]", "0"),
    ("Bn3[2,1]", "L2*n1 - tau*n1*n2"),
    ("Bn3[2,2]", "tau*n1^2 - L1*n1"),
    ("Bn3[2,3]", "0"),
    // Reduced boundary matrix.
    ("fB[1,1]", "tau*(1 - n1^2) + L1*n1"),
    ("fB[1,2]", "L1*n2 - tau*n1*n2"),
    ("fB[1,3]", "L1*n3 - tau*n1*n3"),
    ("fB[2,1]", "L2*n1 - tau*n1*n2"),
    ("fB[2,2]", "tau*(1 - n2^2) + L2*n2"),
    ("fB[2,3]", "L2*n3 - tau*n2*n3"),
    ("fB[3,1]", "n1"),
    ("fB[3,2]", "n2"),
    ("fB[3,3]", "n3"),
    // Remainders modulo (tau - i l)^3.
    ("L_mod_1", "-4*l^2*{T}^2"),
    ("L_mod_1 tau", "-4*I*l^3*{T}^2"),
    (
        "B_jk",
        "(Lj*Lk + 3*I*l*Lj*nk + 3*I*l*Lk*nj - 5*nj*nk*l^2)*tau + I*Lj*Lk*l + nj*Lk*l^2 + Lj*nk*l^2 + 3*I*nj*nk*l^3",
    ),
    (
        "C_jk",
        "(3*I*l*Lj*Lk - 5*nj*Lk*l^2 - 5*Lj*nk*l^2 - 7*I*nj*nk*l^3)*tau + Lj*Lk*l^2 + 3*I*l^3*nj*Lk + 3*I*l^3*Lj*nk - 5*nj*nk*l^4",
    ),
    // Bracket of the adjoint modulo M+, without the factor -(tau - i l).
    ("N[1,1]", "-8*l^2*{T} - {B11}"),
    ("N[1,2]", "-{B12}"),
    ("N[1,3]", "-{B13}"),
    ("N[2,1]", "-{B12}"),
    ("N[2,2]", "-8*l^2*{T} - {B22}"),
    ("N[2,3]", "-{B23}"),
    ("N[3,1]", "-{B13}"),
    ("N[3,2]", "-{B23}"),
    ("N[3,3]", "-8*l^2*{T} - {B33}"),
    // Entries of M: definition line, expanded line, simplified line.
    (
        "M[1,1] def",
        "(1 - n1^2)*(-8*I*l^3*{T} - {C11}) + n1*n2*{C12} + n1*n3*{C13} - 8*L1*n1*l^2*{T} - L1*n1*{B11} - L1*n2*{B12} - L1*n3*{B13}",
    ),
    (
        "M[1,1] expanded",
        "-8*I*l^3*(1 - n1^2)*{T} + (5*n1*L1*l^2 - 3*I*l*L1^2)*tau - L1^2*l^2 - 3*I*n1*L1*l^3 - 8*L1*n1*l^2*{T} - (3*I*l*L1^2 - 5*n1*L1*l^2)*tau - L1^2*l^2 - 3*I*n1*L1*l^3",
    ),
    ("M[1,1]", "-8*I*l^3*(1 - n1^2)*{T} - (6*I*l*L1^2 - 2*n1*L1*l^2)*tau - 2*L1^2*l^2 + 2*I*n1*L1*l^3"),
    (
        "M[1,2] def",
        "-(1 - n1^2)*{C12} + n1*n2*{C22} + n1*n3*{C23} + 8*I*l^3*n1*n2*{T} - 8*L1*n2*l^2*{T} - L1*n1*{B12} - L1*n2*{B22} - L1*n3*{B23}",
    ),
    (
        "M[1,2] expanded",
        "8*I*l^3*n1*n2*{T} + (5*L1*n2*l^2 - 3*I*l*L1*L2)*tau - L1*L2*l^2 - 3*I*l^3*n2*L1 - 8*L1*n2*l^2*{T} - (3*I*l*L1*L2 - 5*n2*L1*l^2)*tau - L1*L2*l^2 - 3*I*n2*L1*l^3",
    ),
    ("M[1,2]", "8*I*l^3*n1*n2*{T} - (6*I*l*L1*L2 - 2*n2*L1*l^2)*tau - 2*L1*L2*l^2 + 2*I*l^3*n2*L1"),
    (
        "M[1,3] def",
        "-(1 - n1^2)*{C13} + n1*n2*{C23} + n1*n3*{C33} + 8*I*l^3*n1*n3*{T} - 8*L1*n3*l^2*{T} - n1*L1*{B13} - L1*n2*{B23} - L1*n3*{B33}",
    ),
    (
        "M[1,3] expanded",
        "8*I*l^3*n1*n3*{T} + (5*L1*n3*l^2 - 3*I*l*L1*L3)*tau - L1*L3*l^2 - 3*I*l^3*n3*L1 - 8*L1*n3*l^2*{T} - (3*I*l*L1*L3 - 5*n3*L1*l^2)*tau - L1*L3*l^2 - 3*I*n3*L1*l^3",
    ),
    ("M[1,3]", "8*I*l^3*n1*n3*{T} - (6*I*l*L1*L3 - 2*n3*L1*l^2)*tau - 2*L1*L3*l^2 + 2*I*l^3*n3*L1"),
    (
        "M[2,1] def",
        "-(1 - n2^2)*{C12} + n1*n2*{C11} + n2*n3*{C13} + 8*I*l^3*n1*n2*{T} - 8*L2*n1*l^2*{T} - L2*n1*{B11} - L2*n2*{B12} - L2*n3*{B13}",
    ),
    (
        "M[2,1] expanded",
        "8*I*l^3*n1*n2*{T} + (5*L2*n1*l^2 - 3*I*l*L1*L2)*tau - L1*L2*l^2 - 3*I*l^3*n1*L2 - 8*L2*n1*l^2*{T} - (3*I*l*L1*L2 - 5*n1*L2*l^2)*tau - L1*L2*l^2 - 3*I*n1*L2*l^3",
    ),
    ("M[2,1]", "8*I*l^3*n1*n2*{T} - (6*I*l*L1*L2 - 2*L2*n1*l^2)*tau - 2*L1*L2*l^2 + 2*I*n1*L2*l^3"),
    (
        "M[2,2] def",
        "(1 - n2^2)*(-8*I*l^3*{T} - {C22}) + n1*n2*{C12} + n2*n3*{C23} - 8*L2*n2*l^2*{T} - L2*n1*{B12} - L2*n2*{B22} - L2*n3*{B23}",
    ),
    (
        "M[2,2] expanded",
        "-8*I*l^3*(1 - n2^2)*{T} + (5*n2*L2*l^2 - 3*I*l*L2^2)*tau - L2^2*l^2 - 3*I*n2*L2*l^3 - 8*L2*n2*l^2*{T} - (3*I*l*L2^2 - 5*n2*L2*l^2)*tau - L2^2*l^2 - 3*I*n2*L2*l^3",
    ),
    ("M[2,2]", "-8*I*l^3*(1 - n2^2)*{T} - (6*I*l*L2^2 - 2*n2*L2*l^2)*tau - 2*L2^2*l^2 + 2*I*n2*L2*l^3"),
    (
        "M[2,3] def",
        "-(1 - n2^2)*{C23} + n1*n2*{C13} + n2*n3*{C33} + 8*I*l^3*n2*n3*{T} - 8*L2*n3*l^2*{T} - L2*n1*{B13} - L2*n2*{B23} - L2*n3*{B33}",
    ),
    (
        "M[2,3] expanded",
        "8*I*l^3*n2*n3*{T} + (5*L2*n3*l^2 - 3*I*l*L3*L2)*tau - L3*L2*l^2 - 3*I*l^3*n3*L2 - 8*L2*n3*l^2*{T} - (3*I*l*L3*L2 - 5*n3*L2*l^2)*tau - L2*L3*l^2 - 3*I*n3*L2*l^3",
    ),
    // Simplified line of M[2,3] with the leading term as carried by the expanded line.
    ("M[2,3]", "8*I*l^3*n2*n3*{T} - (6*I*l*L3*L2 - 2*L2*n3*l^2)*tau - 2*L2*L3*l^2 + 2*I*n3*L2*l^3"),
    // Simplified line of M[2,3] exactly as printed in the source derivation.
    ("M[2,3] printed", "-8*L2*n3*l^2*{T} - (6*I*l*L3*L2 - 2*L2*n3*l^2)*tau - 2*L2*L3*l^2 + 2*I*n3*L2*l^3"),
    // Documented difference printed - correct for the line above.
    ("M[2,3] erratum", "-8*L2*n3*l^2*{T} - 8*I*l^3*n2*n3*{T}"),
    ("M[3,1] def", "-8*n1*l^2*{T} - n1*{B11} - n2*{B12} - n3*{B13}"),
    ("M[3,1]", "-8*n1*l^2*{T} - tau*(3*I*l*L1 - 5*l^2*n1) - L1*l^2 - 3*I*l^3*n1"),
    ("M[3,2] def", "-8*n2*l^2*{T} - n1*{B12} - n2*{B22} - n3*{B23}"),
    ("M[3,2]", "-8*n2*l^2*{T} - tau*(3*I*l*L2 - 5*l^2*n2) - L2*l^2 - 3*I*l^3*n2"),
    ("M[3,3] def", "-8*n3*l^2*{T} - n1*{B13} - n2*{B23} - n3*{B33}"),
    ("M[3,3]", "-8*n3*l^2*{T} - tau*(3*I*l*L3 - 5*l^2*n3) - L3*l^2 - 3*I*l^3*n3"),
    // Expansion of M12 M23 - M22 M13.
    (
        "det:first",
        "l^2*((8*I*l^2*n1*n2*{T} + (2*L1*n2*l - 6*I*L1*L2)*tau - 2*L1*L2*l + 2*I*l^2*n2*L1)*(8*I*l^2*n2*n3*{T} + (2*L2*n3*l - 6*I*L3*L2)*tau - 2*L3*L2*l + 2*I*l^2*n3*L2) - (-8*I*l^2*(1 - n2^2)*{T} + (2*n2*L2*l - 6*I*L2^2)*tau - 2*L2^2*l + 2*I*n2*L2*l^2)*(8*I*l^2*n1*n3*{T} + (2*L1*n3*l - 6*I*L1*L3)*tau - 2*L1*L3*l + 2*I*l^2*n3*L1))",
    ),
    (
        "det:first combined",
        "l^2*(-64*l^4*n1*n3*{T}^2 + 8*I*l^2*L1*n3*{T}*(2*l*tau + 2*I*l^2) + 8*I*l^2*{T}*(-n1*n2*L2*L3 - L1*L2*n2*n3 + n2^2*L1*L3 + n1*n3*L2^2 - L1*L3)*(6*I*tau + 2*l))",
    ),
    // Grouped cancellations, each as `lhs = rhs`.
    ("(1)x(4)", "n1*n2*n2*n3 + (1 - n2^2)*n1*n3 = n1*n3"),
    ("(2)x(5)", "L1*n2*L2*n3 - n2*L2*L1*n3 = 0"),
    ("(3)x(6)", "L1*L2*L3*L2 - L2^2*L1*L3 = 0"),
    ("(2)x(6)+(3)x(5)", "-L1*n2*L3*L2 - L2*n3*L1*L2 + n2*L2*L1*L3 + L1*n3*L2^2 = 0"),
    ("(1)x(5)+(2)x(4)", "n1*n2*L2*n3 + L1*n2*n2*n3 + (1 - n2^2)*L1*n3 - n1*n3*n2*L2 = L1*n3"),
    (
        "(1)x(6)+(3)x(4)",
        "-n1*n2*L3*L2 - L1*L2*n2*n3 - (1 - n2^2)*L1*L3 + n1*n3*L2^2 = -n1*n2*L2*L3 - L1*L2*n2*n3 + n2^2*L1*L3 + n1*n3*L2^2 - L1*L3",
    ),
    (
        "det:1",
        "l^3*(-8*n1*l*{T} - tau*(3*I*L1 - 5*l*n1) - L1*l - 3*I*l^2*n1)*(-64*l^4*n1*n3*{T}^2 + 8*I*l^2*L1*n3*{T}*(2*l*tau + 2*I*l^2) + 8*I*l^2*{T}*(-n1*n2*L2*L3 - L1*L2*n2*n3 + n2^2*L1*L3 + n1*n3*L2^2 - L1*L3)*(6*I*tau + 2*l))",
    ),
    (
        "det:2",
        "l^3*(8*n2*l*{T} + tau*(3*I*L2 - 5*l*n2) + L2*l + 3*I*l^2*n2)*(64*l^4*n2*n3*{T}^2 - 8*I*l^2*L2*n3*{T}*(2*l*tau + 2*I*l^2) + 8*I*l^2*{T}*(-n1^2*L2*L3 - n2*n3*L1^2 + n1*n2*L1*L3 + n1*n3*L1*L2 + L2*L3)*(6*I*tau + 2*l))",
    ),
    (
        "det:3",
        "l^3*(-8*n3*l*{T} - tau*(3*I*L3 - 5*l*n3) - L3*l - 3*I*l^2*n3)*(-64*l^4*(1 - n1^2 - n2^2)*{T}^2 - 8*I*l^2*{T}*(n2*L2 + n1*L1)*(2*l*tau + 2*I*l^2) + 8*I*l^2*{T}*(-n1^2*L2^2 - n2^2*L1^2 + 2*n1*n2*L1*L2 + L1^2 + L2^2)*(6*I*tau + 2*l))",
    ),
    ("[1]x[3]", "n1*n1*n3 + n2*n2*n3 + n3*(1 - n1^2 - n2^2) = n3"),
    ("[1]x[4]", "-n1*L1*n3 - n2*L2*n3 + n3*(n2*L2 + n1*L1) = 0"),
    (
        "[1]x[5]",
        "n1^2*n2*L2*L3 + n1*n2*n3*L1*L2 - n1*n2^2*L1*L3 - n1^2*n3*L2^2 + n1*L1*L3 - n1^2*n2*L2*L3 - n2^2*n3*L1^2 + n1*n2^2*L1*L3 + n1*n2*n3*L1*L2 + n2*L2*L3 + n1^2*n3*L2^2 + n2^2*n3*L1^2 - 2*n1*n2*n3*L1*L2 - n3*L1^2 - n3*L2^2 = -n3*l^2",
    ),
    ("[2]x[3]", "n1*n3*L1 + n2*n3*L2 + (1 - n1^2 - n2^2)*L3 = 0"),
    ("[2]x[4]", "-L1^2*n3 - L2^2*n3 + L3*(n2*L2 + n1*L1) = -n3*l^2"),
    (
        "[2]x[5]",
        "n1*n2*L1*L2*L3 + n2*n3*L1^2*L2 - n2^2*L1^2*L3 - n1*n3*L1*L2^2 + L1^2*L3 - n1^2*L2^2*L3 - n2*n3*L1^2*L2 + n1*n2*L1*L2*L3 + n1*n3*L1*L2^2 + L2^2*L3 + n1^2*L2^2*L3 + n2^2*L1^2*L3 - 2*n1*n2*L1*L2*L3 - L1^2*L3 - L2^2*L3 = 0",
    ),
    (
        "det:final 1",
        "l^3*(64*l^5*n3*{T}^2*(8*{T} - 5*tau + 3*I*l) - 8*I*l^5*n3*{T}*(6*I*tau + 2*l)*(8*{T} - 5*tau + 3*I*l) - 8*I*l^5*n3*{T}*(2*tau + 2*I*l)*(3*tau*I + l))",
    ),
    (
        "det:final 2",
        "8*l^8*n3*{T}*(8*{T}*(3*tau - 5*I*l) + (6*tau - 2*I*l)*(3*tau - 5*I*l) + (2*tau + 2*I*l)*(3*tau - I*l))",
    ),
    ("det:final 3", "64*l^8*n3*{T}*({T}*(3*tau - 5*I*l) + (3*tau - I*l)*{T})"),
    ("det", "384*l^8*n3*{T}^3"),
];

/// An editable copy of [`TABLE`].
#[derive(Clone, Debug)]
pub struct Transcription {
    entries: Vec<(String, String)>,
}

impl Default for Transcription {
    fn default() -> Self {
        Self::new()
    }
}

fn sign_positions(text: &str) -> Vec<usize> {
    text.char_indices().filter(|(_, c)| *c == '+' || *c == '-').map(|(i, _)| i).collect()
}

impl Transcription {
    /// The bundled table.
    pub fn new() -> Self {
        Self { entries: TABLE.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect() }
    }

    /// Raw text of an entry.
    pub fn raw(&self, key: &str) -> Result<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| MacrolabError::MissingData(format!("transcription entry `{key}`")))
    }

    /// All keys in table order.
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    /// Number of `+`/`−` signs in an entry, i.e. the admissible flip indices.
    pub fn sign_count(&self, key: &str) -> Result<usize> {
        Ok(sign_positions(self.raw(key)?).len())
    }

    /// Returns a copy in which the `k`-th `+`/`−` character of `key` is flipped.
    pub fn flip_sign(&self, key: &str, k: usize) -> Result<Transcription> {
        let mut out = self.clone();
        let entry = out
            .entries
            .iter_mut()
            .find(|(kk, _)| kk == key)
            .ok_or_else(|| MacrolabError::MissingData(format!("transcription entry `{key}`")))?;
        let pos = *sign_positions(&entry.1).get(k).ok_or_else(|| {
            MacrolabError::Config(format!("entry `{key}` has fewer than {} signs", k + 1))
        })?;
        let flipped = if entry.1.as_bytes()[pos] == b'+' { "-" } else { "+" };
        entry.1.replace_range(pos..pos + 1, flipped);
        Ok(out)
    }

    fn template(&self, name: &str, j: usize, k: usize) -> Result<String> {
        let t = self.raw(name)?;
        Ok(t.replace("Lj", &format!("L{j}"))
            .replace("Lk", &format!("L{k}"))
            .replace("nj", &format!("n{j}"))
            .replace("nk", &format!("n{k}")))
    }

    /// Expands placeholders in `text`.
    pub fn expand(&self, text: &str) -> Result<String> {
        let mut s = text
            .replace("{s}", "(xi1^2 + xi2^2 + xi3^2)")
            .replace("{xn}", "(xi1*n1 + xi2*n2 + xi3*n3)")
            .replace("{T}", "(tau - I*l)");
        for j in 1..=3 {
            for k in 1..=3 {
                for name in ["B", "C"] {
                    let ph = format!("{{{name}{j}{k}}}");
                    if s.contains(&ph) {
                        let body = self.template(&format!("{name}_jk"), j, k)?;
                        s = s.replace(&ph, &format!("({body})"));
                    }
                }
            }
        }
        Ok(s)
    }

    /// Parses an entry after placeholder expansion.
    pub fn expr(&self, key: &str) -> Result<SymExpr> {
        parse_expr(&self.expand(self.raw(key)?)?)
    }

    /// Parses an instantiated `B_jk`/`C_jk` template (`name` is `"B_jk"` or `"C_jk"`).
    pub fn indexed(&self, name: &str, j: usize, k: usize) -> Result<SymExpr> {
        parse_expr(&self.template(name, j, k)?)
    }

    /// Parses both sides of an `lhs = rhs` entry.
    pub fn equation(&self, key: &str) -> Result<(SymExpr, SymExpr)> {
        let raw = self.expand(self.raw(key)?)?;
        let (l, r) = raw
            .split_once('=')
            .ok_or_else(|| MacrolabError::Config(format!("entry `{key}` is not an equation")))?;
        Ok((parse_expr(l)?, parse_expr(r)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_parses() {
        let t = Transcription::new();
        for key in t.keys() {
            let raw = t.raw(key).unwrap();
            if raw.contains('=') {
                t.equation(key).unwrap();
            } else if key.ends_with("_jk") {
                t.indexed(key, 1, 2).unwrap();
            } else {
                t.expr(key).unwrap_or_else(|e| panic!("{key}: {e}"));
            }
        }
    }

    #[test]
    fn flip_changes_the_parsed_value() {
        let t = Transcription::new();
        let m = t.flip_sign("fB[1,1]", 0).unwrap();
        assert_ne!(t.expr("fB[1,1]").unwrap(), m.expr("fB[1,1]").unwrap());
        assert!(t.flip_sign("fB[1,1]", 99).is_err());
        assert!(t.flip_sign("nope", 0).is_err());
    }
}
