//! Dual systems, dual bases, duality-preserving maps (φ_X, φ_Z), and the
//! trace-form field downgrade.
//!
//! The complements W_X = C_X ⊖ C_Z^⊥ and W_Z = C_Z ⊖ C_X^⊥ are chosen by the
//! deterministic greedy rule over RREF bases, so the φ maps are reproducible
//! across runs; decode outputs are cosets represented through these maps and
//! must be stable.

use crate::css::CssCode;
use crate::error::{Error, Result};
use crate::fqlinalg::{dot, FqMatrix, Subspace};
use crate::gf::{Extension, FqElement};

/// A pair of equal-dimension subspaces on which the canonical bilinear form
/// is non-degenerate.
#[derive(Debug, Clone)]
pub struct DualSystem {
    pub v_space: Subspace,
    pub w_space: Subspace,
}

impl DualSystem {
    pub fn new(v_space: Subspace, w_space: Subspace) -> Result<DualSystem> {
        if v_space.ambient() != w_space.ambient() || v_space.dim() != w_space.dim() {
            return Err(Error::AmbientMismatch(v_space.ambient(), w_space.ambient()));
        }
        let sys = DualSystem { v_space, w_space };
        sys.gram_inverse()?;
        Ok(sys)
    }

    /// Gram matrix of the stored RREF bases under the dot product.
    fn gram(&self) -> FqMatrix {
        let f = self.v_space.field();
        let k = self.v_space.dim();
        let mut g = FqMatrix::zeros(f, k, k);
        for i in 0..k {
            for j in 0..k {
                g.set(i, j, dot(f, self.v_space.basis().row(i), self.w_space.basis().row(j)));
            }
        }
        g
    }

    fn gram_inverse(&self) -> Result<FqMatrix> {
        let g = self.gram();
        let k = g.rows();
        if k == 0 {
            return Ok(g);
        }
        // Invert by solving [G | I] -> [I | G^{-1}]; rank defect means the
        // form is degenerate on the pair.
        let f = self.v_space.field().clone();
        let mut aug = FqMatrix::zeros(&f, k, 2 * k);
        for i in 0..k {
            for j in 0..k {
                aug.set(i, j, g.get(i, j));
            }
            aug.set(i, k + i, f.one());
        }
        let r = aug.rref();
        if r.rows() < k || (0..k).any(|i| (0..k).any(|j| r.get(i, j) != if i == j { f.one() } else { f.zero() })) {
            return Err(Error::Degenerate);
        }
        let mut inv = FqMatrix::zeros(&f, k, k);
        for i in 0..k {
            for j in 0..k {
                inv.set(i, j, r.get(i, k + j));
            }
        }
        Ok(inv)
    }

    /// Bases ({vᵢ}, {wⱼ}) with ⟨vᵢ, wⱼ⟩ = δᵢⱼ: the v side keeps the RREF
    /// basis, the w side is transformed by the inverse-transpose Gram.
    pub fn dual_basis(&self) -> Result<(FqMatrix, FqMatrix)> {
        let ginv = self.gram_inverse()?;
        let w = ginv.transpose().matmul(self.w_space.basis());
        let v = self.v_space.basis().clone();
        debug_assert!({
            let f = v.field();
            (0..v.rows()).all(|i| {
                (0..w.rows()).all(|j| {
                    dot(f, v.row(i), w.row(j)) == if i == j { f.one() } else { f.zero() }
                })
            })
        });
        Ok((v, w))
    }
}

/// Duality-preserving pair φ_X : F_q^k → W_X, φ_Z : F_q^k → W_Z, stored as
/// matrices whose rows are the images of the elementary basis vectors.
#[derive(Debug, Clone)]
pub struct DualityMap {
    phi_x: FqMatrix,
    phi_z: FqMatrix,
}

impl DualityMap {
    /// Source dimension k (= b_out when used as the inner code of a
    /// concatenation).
    pub fn k(&self) -> usize {
        self.phi_x.rows()
    }
    /// Target ambient dimension.
    pub fn n_in(&self) -> usize {
        self.phi_x.cols()
    }
    pub fn phi_x_matrix(&self) -> &FqMatrix {
        &self.phi_x
    }
    pub fn phi_z_matrix(&self) -> &FqMatrix {
        &self.phi_z
    }

    pub fn apply_x(&self, u: &[FqElement]) -> Vec<FqElement> {
        self.apply(&self.phi_x, u)
    }
    pub fn apply_z(&self, u: &[FqElement]) -> Vec<FqElement> {
        self.apply(&self.phi_z, u)
    }

    fn apply(&self, m: &FqMatrix, u: &[FqElement]) -> Vec<FqElement> {
        assert_eq!(u.len(), m.rows());
        let f = m.field();
        let mut out = vec![f.zero(); m.cols()];
        for (i, &c) in u.iter().enumerate() {
            if !f.is_zero(c) {
                for j in 0..m.cols() {
                    out[j] = f.add(out[j], f.mul(c, m.get(i, j)));
                }
            }
        }
        out
    }

    /// Blockwise extension φ̃: applies φ to each consecutive k-block.
    pub fn extend_x(&self, u: &[FqElement]) -> Vec<FqElement> {
        self.extend(&self.phi_x, u)
    }
    pub fn extend_z(&self, u: &[FqElement]) -> Vec<FqElement> {
        self.extend(&self.phi_z, u)
    }

    fn extend(&self, m: &FqMatrix, u: &[FqElement]) -> Vec<FqElement> {
        assert_eq!(u.len() % m.rows(), 0, "input is not a whole number of blocks");
        u.chunks(m.rows()).flat_map(|blk| self.apply(m, blk)).collect()
    }

    /// Two-matrix dump for experiment reproducibility.
    pub fn to_codes(&self) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
        (self.phi_x.to_codes(), self.phi_z.to_codes())
    }
}

/// The duality-preserving maps of an inner CSS code: W_X = C_X ⊖ C_Z^⊥ and
/// W_Z = C_Z ⊖ C_X^⊥ with dual bases, so ⟨φ_X(x), φ_Z(y)⟩ = ⟨x, y⟩.
pub fn complement_dual_maps(inner: &CssCode) -> Result<DualityMap> {
    if inner.k_phys() == 0 {
        return Err(Error::ParameterMismatch("inner code must have k ≥ 1".into()));
    }
    let wx = inner.cx().complement_in(inner.cz_perp())?;
    let wz = inner.cz().complement_in(inner.cx_perp())?;
    // Non-degeneracy is guaranteed for a valid CSS code; failure here is an
    // internal error rather than a user-facing condition.
    let sys = DualSystem::new(wx, wz)?;
    let (v, w) = sys.dual_basis()?;
    Ok(DualityMap { phi_x: v, phi_z: w })
}

/// View a CSS code over F_{q^b} as a vector-space CSS code over F_q with
/// fold b, through the trace dual system. Dimension scales by b (so the
/// folded dimension is unchanged) and the folded distance equals the
/// original distance.
pub fn field_downgrade(code: &CssCode, ext: &Extension) -> Result<CssCode> {
    if code.field() != ext.ext() {
        return Err(Error::IncompatibleFields(
            "code field does not match the extension field".into(),
        ));
    }
    if code.b() != 1 {
        return Err(Error::IncompatibleFields(
            "field downgrade expects an unfolded code over the extension field".into(),
        ));
    }
    let base = ext.base();
    let e_field = ext.ext();
    let b = ext.b();
    let n = code.n_phys();
    let (basis, _) = ext.trace_dual_basis();

    // F_q-generators of an F_{q^b}-subspace: every basis row scaled by every
    // trace-basis scalar, then mapped coordinate-wise.
    let downgrade_space = |space: &Subspace, phi: &dyn Fn(FqElement) -> Vec<FqElement>| {
        let mut gens: Vec<Vec<FqElement>> = vec![];
        for row in space.basis().row_iter() {
            for &scalar in basis {
                let scaled: Vec<FqElement> =
                    row.iter().map(|&x| e_field.mul(scalar, x)).collect();
                let mapped: Vec<FqElement> = scaled.iter().flat_map(|&x| phi(x)).collect();
                gens.push(mapped);
            }
        }
        Subspace::from_generators(base, n * b, &gens)
    };

    let cx = downgrade_space(code.cx(), &|x| ext.phi_x(x));
    let cz = downgrade_space(code.cz(), &|y| ext.phi_z(y));
    let out = CssCode::new(cx, cz, b)?;
    // Unfolded F_q-dimension is b times the original F_{q^b}-dimension.
    assert_eq!(out.k_phys(), b * code.k_phys());
    Ok(out)
}
