//! Global assembly, boundary conditions, the static thermal-prestress
//! solve and the generalized eigensolve.
//!
//! Element matrices may be computed in parallel (feature `parallel`), but
//! the scatter into the global band store always runs in element order,
//! so a given build produces bitwise-identical matrices run to run.

use crate::element::{
    element_geometric_stiffness, element_matrices, gauss_states_template, strains_at, ElementMatrices,
    GaussPointState,
};
use crate::linalg::{largest_generalized, lowest_modes, SymBand};
use crate::material::FgmSpec;
use crate::mesh::Mesh;
use crate::section::SectionProperties;
use crate::{Error, Result, DOF_PER_NODE};
use ndarray::Array1;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Boundary condition flavor on all four edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Hard simple support: (u0, w0, theta_y) on x-edges,
    /// (v0, w0, theta_x) on y-edges.
    Ssss,
    /// Fully clamped: all five dofs on every edge.
    Cccc,
}

impl BoundaryCondition {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ssss" => Ok(Self::Ssss),
            "cccc" => Ok(Self::Cccc),
            other => Err(Error::invalid_input(format!("unknown boundary condition `{other}`"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Ssss => "ssss",
            Self::Cccc => "cccc",
        }
    }
}

/// Frame in which constraints are imposed on the oblique edges of a skew
/// plate. `Global` reproduces the published parametric tables and is the
/// default; `Local` rotates the edge dofs with the nodal transformation
/// first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SkewBcFrame {
    #[default]
    Global,
    Local,
}

/// Assembled global system.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub k: SymBand,
    pub m: SymBand,
    pub kg: Option<SymBand>,
    pub f_th: Vec<f64>,
    pub ndof: usize,
    /// Skew rotation applied to these nodes (angle, node list).
    pub transform: Option<(f64, Vec<usize>)>,
    /// Free dof list once boundary conditions are applied.
    pub free: Option<Vec<usize>>,
}

/// Half-bandwidth of the assembled system for this mesh.
pub fn system_bandwidth(mesh: &Mesh) -> usize {
    let mut span = 0usize;
    for conn in &mesh.elements {
        let lo = conn.iter().copied().min().unwrap();
        let hi = conn.iter().copied().max().unwrap();
        span = span.max(hi - lo);
    }
    DOF_PER_NODE * span + DOF_PER_NODE - 1
}

/// Per-element stiffness/mass/thermal-load bundle, sequential path.
pub fn compute_element_matrices_seq(section: &SectionProperties, mesh: &Mesh) -> Result<Vec<ElementMatrices>> {
    (0..mesh.elements.len())
        .map(|e| element_matrices(section, &mesh.element_coords(e)))
        .collect()
}

/// Per-element bundle computed with rayon. The result order is the
/// element order, so downstream assembly is unaffected by scheduling.
#[cfg(feature = "parallel")]
pub fn compute_element_matrices_par(section: &SectionProperties, mesh: &Mesh) -> Result<Vec<ElementMatrices>> {
    (0..mesh.elements.len())
        .into_par_iter()
        .map(|e| element_matrices(section, &mesh.element_coords(e)))
        .collect()
}

/// Dispatch to the parallel path when the feature is enabled.
pub fn compute_element_matrices(section: &SectionProperties, mesh: &Mesh) -> Result<Vec<ElementMatrices>> {
    #[cfg(feature = "parallel")]
    {
        compute_element_matrices_par(section, mesh)
    }
    #[cfg(not(feature = "parallel"))]
    {
        compute_element_matrices_seq(section, mesh)
    }
}

/// Additive scatter of element matrices into band storage, fixed order.
pub fn assemble(mesh: &Mesh, elements: &[ElementMatrices]) -> Result<GlobalSystem> {
    if elements.len() != mesh.elements.len() {
        return Err(Error::internal("element matrix count does not match the mesh"));
    }
    let ndof = mesh.n_dofs();
    let bw = system_bandwidth(mesh);
    let mut k = SymBand::zeros(ndof, bw);
    let mut m = SymBand::zeros(ndof, bw);
    let mut f = vec![0.0f64; ndof];
    for (conn, em) in mesh.elements.iter().zip(elements.iter()) {
        let dofs = element_dofs(conn);
        for (r, &gr) in dofs.iter().enumerate() {
            f[gr] += em.fe_th[r];
            for (c, &gc) in dofs.iter().enumerate() {
                if gr >= gc {
                    let kv = em.ke[[r, c]];
                    if kv != 0.0 {
                        k.add(gr, gc, kv);
                    }
                    let mv = em.me[[r, c]];
                    if mv != 0.0 {
                        m.add(gr, gc, mv);
                    }
                }
            }
        }
    }
    Ok(GlobalSystem { k, m, kg: None, f_th: f, ndof, transform: None, free: None })
}

fn element_dofs(conn: &[usize; 8]) -> [usize; 40] {
    let mut dofs = [0usize; 40];
    for (i, &n) in conn.iter().enumerate() {
        for d in 0..DOF_PER_NODE {
            dofs[DOF_PER_NODE * i + d] = DOF_PER_NODE * n + d;
        }
    }
    dofs
}

/// The 5x5 nodal rotation of the skew transformation.
pub fn skew_rotation(psi: f64) -> [[f64; 5]; 5] {
    let (s, c) = psi.sin_cos();
    let mut l = [[0.0; 5]; 5];
    l[0][0] = c;
    l[0][1] = s;
    l[1][0] = -s;
    l[1][1] = c;
    l[2][2] = 1.0;
    l[3][3] = c;
    l[3][4] = s;
    l[4][3] = -s;
    l[4][4] = c;
    l
}

fn rotate_node_block(a: &mut SymBand, base: usize, lg: &[[f64; 5]; 5]) {
    let n = a.n;
    let lo = base.saturating_sub(a.bw);
    let hi = (base + DOF_PER_NODE + a.bw).min(n);
    // panel[t][k] = A(t, base + k), all coupled rows t
    let width = hi - lo;
    let mut panel = vec![[0.0f64; 5]; width];
    for (t, row) in panel.iter_mut().enumerate() {
        for (kk, slot) in row.iter_mut().enumerate() {
            *slot = a.get(lo + t, base + kk);
        }
    }
    // right-multiply by Lg
    let mut panel2 = vec![[0.0f64; 5]; width];
    for t in 0..width {
        for c in 0..5 {
            let mut s = 0.0;
            for kk in 0..5 {
                s += panel[t][kk] * lg[kk][c];
            }
            panel2[t][c] = s;
        }
    }
    // left-multiply the node block rows by Lg^T
    let b_off = base - lo;
    let mut block = [[0.0f64; 5]; 5];
    for j in 0..5 {
        for c in 0..5 {
            let mut s = 0.0;
            for kk in 0..5 {
                s += lg[kk][j] * panel2[b_off + kk][c];
            }
            block[j][c] = s;
        }
    }
    // write back: off-block couples then the diagonal block. Rows whose
    // node lies beyond the assembled coupling range stay exactly zero, so
    // only in-band slots ever need writing.
    for t in 0..width {
        let gi = lo + t;
        if gi >= base && gi < base + DOF_PER_NODE {
            continue;
        }
        for c in 0..5 {
            let gj = base + c;
            let dist = gi.abs_diff(gj);
            if dist <= a.bw {
                set_sym(a, gi, gj, panel2[t][c]);
            } else {
                debug_assert_eq!(panel2[t][c], 0.0, "rotation produced an out-of-band entry");
            }
        }
    }
    for j in 0..5 {
        for c in 0..5 {
            set_sym(a, base + j, base + c, block[j][c]);
        }
    }
}

fn set_sym(a: &mut SymBand, i: usize, j: usize, v: f64) {
    let old = a.get(i, j);
    a.add(i, j, v - old);
}

/// Rotate the skew-edge nodes of the system into the local edge frame.
/// Interior nodes keep the identity. Applying the same angle twice with
/// opposite signs restores the original system.
pub fn apply_skew_transform(sys: &mut GlobalSystem, mesh: &Mesh, psi: f64) {
    if psi == 0.0 || mesh.skew_nodes.is_empty() {
        return;
    }
    let lg = skew_rotation(psi);
    for &node in &mesh.skew_nodes {
        let base = DOF_PER_NODE * node;
        rotate_node_block(&mut sys.k, base, &lg);
        rotate_node_block(&mut sys.m, base, &lg);
        if let Some(kg) = sys.kg.as_mut() {
            rotate_node_block(kg, base, &lg);
        }
        // f <- Lg^T f on the block
        let mut fb = [0.0f64; 5];
        for (j, slot) in fb.iter_mut().enumerate() {
            let mut s = 0.0;
            for kk in 0..5 {
                s += lg[kk][j] * sys.f_th[base + kk];
            }
            *slot = s;
        }
        sys.f_th[base..base + 5].copy_from_slice(&fb);
    }
    sys.transform = match sys.transform.take() {
        None => Some((psi, mesh.skew_nodes.clone())),
        Some((prev, nodes)) => {
            let total = prev + psi;
            if total.abs() < 1e-15 {
                None
            } else {
                Some((total, nodes))
            }
        }
    };
}

/// Constrained dof set for the given boundary condition. Constraints on
/// transformed nodes act on the rotated (local) dofs by construction.
fn constrained_dofs(mesh: &Mesh, bc: BoundaryCondition) -> Vec<bool> {
    let mut fixed = vec![false; mesh.n_dofs()];
    let mut clamp = |nodes: &[usize], dofs: &[usize]| {
        for &q in nodes {
            for &d in dofs {
                fixed[DOF_PER_NODE * q + d] = true;
            }
        }
    };
    match bc {
        BoundaryCondition::Ssss => {
            clamp(&mesh.tags.x0, &[0, 2, 4]);
            clamp(&mesh.tags.xa, &[0, 2, 4]);
            clamp(&mesh.tags.y0, &[1, 2, 3]);
            clamp(&mesh.tags.yb, &[1, 2, 3]);
        }
        BoundaryCondition::Cccc => {
            let all = [0, 1, 2, 3, 4];
            clamp(&mesh.tags.x0, &all);
            clamp(&mesh.tags.xa, &all);
            clamp(&mesh.tags.y0, &all);
            clamp(&mesh.tags.yb, &all);
        }
    }
    fixed
}

/// Record the free dof list on the system (elimination happens at solve
/// time by principal-submatrix extraction).
pub fn apply_bcs(sys: &mut GlobalSystem, mesh: &Mesh, bc: BoundaryCondition) -> Result<()> {
    let fixed = constrained_dofs(mesh, bc);
    let free: Vec<usize> = (0..sys.ndof).filter(|&i| !fixed[i]).collect();
    if free.is_empty() {
        return Err(Error::OverConstrained);
    }
    sys.free = Some(free);
    Ok(())
}

/// Leave every dof free (free-plate spectra, rigid-mode audits).
pub fn apply_no_bcs(sys: &mut GlobalSystem) {
    sys.free = Some((0..sys.ndof).collect());
}

/// Per-element Gauss-point membrane resultants from the static thermal
/// pre-solve `K d = f_th`, evaluated as `N = A ep + B eb - NT`.
pub fn solve_prestress(
    sys: &GlobalSystem,
    mesh: &Mesh,
    section: &SectionProperties,
) -> Result<Vec<Vec<GaussPointState>>> {
    let free = sys.free.as_ref().ok_or_else(|| Error::internal("apply_bcs before solve_prestress"))?;
    let kf = sys.k.extract(free);
    let chol = kf
        .cholesky()
        .map_err(|e| Error::solve(format!("static prestress factorization failed: {e}")))?;
    let mut rhs: Vec<f64> = free.iter().map(|&i| sys.f_th[i]).collect();
    chol.solve_in_place(&mut rhs);
    let mut d_full = vec![0.0f64; sys.ndof];
    for (slot, &i) in free.iter().enumerate() {
        d_full[i] = rhs[slot];
    }
    // back to the global frame when a skew transform is in force
    if let Some((psi, nodes)) = &sys.transform {
        let lg = skew_rotation(*psi);
        for &q in nodes {
            let b = DOF_PER_NODE * q;
            let mut g = [0.0f64; 5];
            for (i, slot) in g.iter_mut().enumerate() {
                for (k, &dk) in d_full[b..b + 5].iter().enumerate() {
                    *slot += lg[i][k] * dk;
                }
            }
            d_full[b..b + 5].copy_from_slice(&g);
        }
    }
    gauss_resultants(mesh, section, &d_full)
}

/// Resultants at the 3x3 points of every element for a given global
/// displacement vector.
pub fn gauss_resultants(
    mesh: &Mesh,
    section: &SectionProperties,
    d_global: &[f64],
) -> Result<Vec<Vec<GaussPointState>>> {
    let template = gauss_states_template();
    let mut out = Vec::with_capacity(mesh.elements.len());
    for (e, conn) in mesh.elements.iter().enumerate() {
        let coords = mesh.element_coords(e);
        let dofs = element_dofs(conn);
        let mut de = Array1::<f64>::zeros(40);
        for (r, &g) in dofs.iter().enumerate() {
            de[r] = d_global[g];
        }
        let mut states = template.clone();
        for gp in states.iter_mut() {
            let (ep, eb) = strains_at(&coords, &de, gp.xi, gp.eta)?;
            for r in 0..3 {
                let mut nv = -section.nt[r];
                for c in 0..3 {
                    nv += section.a[[r, c]] * ep[c] + section.b[[r, c]] * eb[c];
                }
                gp.n_th[r] = nv;
            }
        }
        out.push(states);
    }
    Ok(out)
}

/// Assemble the geometric stiffness from per-element Gauss states and
/// store it on the system (skew-rotated to match, when applicable).
pub fn assemble_geometric(
    sys: &mut GlobalSystem,
    mesh: &Mesh,
    section: &SectionProperties,
    states: &[Vec<GaussPointState>],
) -> Result<()> {
    #[cfg(feature = "parallel")]
    let per_elem: Vec<_> = (0..mesh.elements.len())
        .into_par_iter()
        .map(|e| element_geometric_stiffness(&states[e], section, &mesh.element_coords(e)))
        .collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let per_elem: Vec<_> = (0..mesh.elements.len())
        .map(|e| element_geometric_stiffness(&states[e], section, &mesh.element_coords(e)))
        .collect::<Result<_>>()?;

    let mut kg = SymBand::zeros(sys.ndof, sys.k.bw);
    for (conn, kge) in mesh.elements.iter().zip(per_elem.iter()) {
        let dofs = element_dofs(conn);
        for (r, &gr) in dofs.iter().enumerate() {
            for (c, &gc) in dofs.iter().enumerate() {
                if gr >= gc {
                    let v = kge[[r, c]];
                    if v != 0.0 {
                        kg.add(gr, gc, v);
                    }
                }
            }
        }
    }
    if let Some((psi, nodes)) = &sys.transform {
        let lg = skew_rotation(*psi);
        for &q in nodes {
            rotate_node_block(&mut kg, DOF_PER_NODE * q, &lg);
        }
    }
    sys.kg = Some(kg);
    Ok(())
}

/// Modal solution: frequencies plus full-length mode vectors in the
/// global frame, scaled so the largest transverse amplitude is one.
#[derive(Debug, Clone)]
pub struct ModalResult {
    /// Natural frequencies, rad/s, ascending.
    pub omegas: Vec<f64>,
    /// Eigenvalues `omega^2` as returned by the solver.
    pub lambdas: Vec<f64>,
    /// Relative eigen residuals.
    pub residuals: Vec<f64>,
    /// Mode vectors, one per frequency, length `ndof`.
    pub modes: Vec<Vec<f64>>,
}

/// Solve `(K + K_G) phi = omega^2 M phi` for the lowest `n_modes`.
/// A clearly negative smallest eigenvalue reports thermal buckling.
pub fn solve_modes(sys: &GlobalSystem, n_modes: usize) -> Result<ModalResult> {
    let free = sys.free.as_ref().ok_or_else(|| Error::internal("apply_bcs before solve_modes"))?;
    let a_full = match &sys.kg {
        Some(kg) => sys.k.add_scaled(1.0, kg),
        None => sys.k.clone(),
    };
    let a = a_full.extract(free);
    let m = sys.m.extract(free);
    let sol = lowest_modes(&a, &m, n_modes)?;

    // buckling detection: compare against the problem scale
    let mut scale = 0.0f64;
    for i in 0..a.n {
        let mi = m.get(i, i);
        if mi > 0.0 {
            scale = scale.max(a.get(i, i).abs() / mi);
        }
    }
    let tol = 1e-8 * scale.max(1e-300);
    if sol.values[0] < -tol {
        return Err(Error::BucklingExceeded { lambda: sol.values[0] });
    }

    let nf = free.len();
    let mut modes = Vec::with_capacity(n_modes);
    for k in 0..sol.values.len() {
        let xr = &sol.vectors[k * nf..(k + 1) * nf];
        let mut full = vec![0.0f64; sys.ndof];
        for (slot, &i) in free.iter().enumerate() {
            full[i] = xr[slot];
        }
        if let Some((psi, nodes)) = &sys.transform {
            let lg = skew_rotation(*psi);
            for &q in nodes {
                let b = DOF_PER_NODE * q;
                let mut g = [0.0f64; 5];
                for (i, slot) in g.iter_mut().enumerate() {
                    for k2 in 0..5 {
                        *slot += lg[i][k2] * full[b + k2];
                    }
                }
                full[b..b + 5].copy_from_slice(&g);
            }
        }
        // normalize on transverse deflection; fall back to the overall
        // amplitude for purely in-plane modes
        let mut wmax = 0.0f64;
        for node in 0..sys.ndof / DOF_PER_NODE {
            wmax = wmax.max(full[DOF_PER_NODE * node + 2].abs());
        }
        let scale_by = if wmax > 1e-12 {
            wmax
        } else {
            full.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300)
        };
        for v in full.iter_mut() {
            *v /= scale_by;
        }
        modes.push(full);
    }

    let omegas = sol.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(ModalResult { omegas, lambdas: sol.values.clone(), residuals: sol.residuals, modes })
}

/// Load multiplier on the current geometric stiffness at which the plate
/// buckles: smallest `lambda` with `det(K + lambda KG) = 0`.
pub fn buckling_factor(sys: &GlobalSystem) -> Result<f64> {
    let free = sys.free.as_ref().ok_or_else(|| Error::internal("apply_bcs before buckling_factor"))?;
    let kg = sys.kg.as_ref().ok_or_else(|| Error::internal("no geometric stiffness assembled"))?;
    let k = sys.k.extract(free);
    let mut neg = SymBand::zeros(free.len(), kg.bw.min(free.len().saturating_sub(1)));
    let kg_red = kg.extract(free);
    for j in 0..kg_red.n {
        for i in j..=(j + kg_red.bw).min(kg_red.n - 1) {
            let v = kg_red.get(i, j);
            if v != 0.0 {
                neg.add(i, j, -v);
            }
        }
    }
    let (mu, _) = largest_generalized(&neg, &k, 2)?;
    if mu <= 0.0 {
        return Err(Error::solve("geometric stiffness is not destabilizing; no buckling factor"));
    }
    Ok(1.0 / mu)
}

/// Nondimensionalization schemes for reporting frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NondimScheme {
    /// `omega a^2 sqrt(rho_c h / D)` with `D = Ec h^3 / (12 (1 - nu^2))`;
    /// `Ec` is the ceramic base modulus and `rho_c` the ceramic density.
    CeramicRigidity,
    /// `omega h sqrt(rho_m / Em)` with the metal evaluated at 300 K.
    MetalThickness,
    /// `omega (a^2/h) sqrt(rho_m (1 - nu^2) / Em)`, metal at 300 K.
    MetalSlenderness,
}

impl NondimScheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ceramic" => Ok(Self::CeramicRigidity),
            "metal_h" => Ok(Self::MetalThickness),
            "metal_a2h" => Ok(Self::MetalSlenderness),
            other => Err(Error::invalid_input(format!("unknown nondimensional scheme `{other}`"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::CeramicRigidity => "ceramic",
            Self::MetalThickness => "metal_h",
            Self::MetalSlenderness => "metal_a2h",
        }
    }
}

/// Reference constants captured once per material pair.
#[derive(Debug, Clone, Copy)]
pub struct NondimRefs {
    pub ec_base: f64,
    pub rho_c: f64,
    pub em_300: f64,
    pub rho_m: f64,
    pub nu: f64,
}

impl NondimRefs {
    pub fn from_fgm(fgm: &FgmSpec) -> Result<Self> {
        Ok(Self {
            ec_base: fgm.ceramic.e_coeffs.p0,
            rho_c: fgm.ceramic.rho,
            em_300: crate::material::evaluate_property(&fgm.metal.e_coeffs, 300.0)?,
            rho_m: fgm.metal.rho,
            nu: fgm.reference_nu(),
        })
    }
}

/// Scale a dimensional frequency (rad/s) by the requested scheme.
pub fn nondimensionalize(omega: f64, scheme: NondimScheme, a: f64, h: f64, refs: &NondimRefs) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::invalid_input("omega must be non-negative"));
    }
    let v = match scheme {
        NondimScheme::CeramicRigidity => {
            let d = refs.ec_base * h * h * h / (12.0 * (1.0 - refs.nu * refs.nu));
            omega * a * a * (refs.rho_c * h / d).sqrt()
        }
        NondimScheme::MetalThickness => omega * h * (refs.rho_m / refs.em_300).sqrt(),
        NondimScheme::MetalSlenderness => {
            omega * (a * a / h) * (refs.rho_m * (1.0 - refs.nu * refs.nu) / refs.em_300).sqrt()
        }
    };
    Ok(v)
}
