//! QUAD-8 shear-flexible plate element.
//!
//! Five degrees of freedom per node, (u0, v0, w0, theta_x, theta_y), in
//! connectivity order. Field consistency is realized by selective reduced
//! integration: normal membrane/bending strain terms carry the full 3x3
//! rule, while the in-plane shear strain (gamma_xy and its coupling) and
//! the transverse shear energy carry the 2x2 rule. This keeps the element
//! free of shear and membrane locking on rectangular meshes without
//! introducing spurious mechanisms.

use crate::quadrature::gauss_2d;
use crate::section::SectionProperties;
use crate::{Error, Result};
use ndarray::{Array1, Array2};

/// Element matrix size: 8 nodes x 5 dofs.
pub const EDOF: usize = 40;

/// Shape function values and parametric derivatives at one point.
#[derive(Debug, Clone, Copy)]
pub struct ShapeEval {
    pub n: [f64; 8],
    pub dxi: [f64; 8],
    pub deta: [f64; 8],
}

/// Serendipity basis on the biunit square.
pub fn shape_functions(xi: f64, eta: f64) -> ShapeEval {
    let x2 = xi * xi;
    let e2 = eta * eta;
    let n = [
        0.25 * (1.0 - xi) * (1.0 - eta) * (-xi - eta - 1.0),
        0.25 * (1.0 + xi) * (1.0 - eta) * (xi - eta - 1.0),
        0.25 * (1.0 + xi) * (1.0 + eta) * (xi + eta - 1.0),
        0.25 * (1.0 - xi) * (1.0 + eta) * (-xi + eta - 1.0),
        0.5 * (1.0 - x2) * (1.0 - eta),
        0.5 * (1.0 + xi) * (1.0 - e2),
        0.5 * (1.0 - x2) * (1.0 + eta),
        0.5 * (1.0 - xi) * (1.0 - e2),
    ];
    let dxi = [
        0.25 * (1.0 - eta) * (2.0 * xi + eta),
        0.25 * (1.0 - eta) * (2.0 * xi - eta),
        0.25 * (1.0 + eta) * (2.0 * xi + eta),
        0.25 * (1.0 + eta) * (2.0 * xi - eta),
        -xi * (1.0 - eta),
        0.5 * (1.0 - e2),
        -xi * (1.0 + eta),
        -0.5 * (1.0 - e2),
    ];
    let deta = [
        0.25 * (1.0 - xi) * (xi + 2.0 * eta),
        0.25 * (1.0 + xi) * (-xi + 2.0 * eta),
        0.25 * (1.0 + xi) * (xi + 2.0 * eta),
        0.25 * (1.0 - xi) * (-xi + 2.0 * eta),
        -0.5 * (1.0 - x2),
        -(1.0 + xi) * eta,
        0.5 * (1.0 - x2),
        -(1.0 - xi) * eta,
    ];
    ShapeEval { n, dxi, deta }
}

/// Shape values plus Cartesian gradients and the Jacobian determinant.
pub struct MappedShape {
    pub n: [f64; 8],
    pub dx: [f64; 8],
    pub dy: [f64; 8],
    pub det_j: f64,
}

pub fn mapped_shape(coords: &[[f64; 2]; 8], xi: f64, eta: f64) -> Result<MappedShape> {
    let sf = shape_functions(xi, eta);
    let mut j = [[0.0f64; 2]; 2];
    for k in 0..8 {
        j[0][0] += sf.dxi[k] * coords[k][0];
        j[0][1] += sf.dxi[k] * coords[k][1];
        j[1][0] += sf.deta[k] * coords[k][0];
        j[1][1] += sf.deta[k] * coords[k][1];
    }
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if det <= 0.0 || !det.is_finite() {
        return Err(Error::ElementQuality(format!("singular Jacobian (det = {det:.3e})")));
    }
    let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
    let mut dx = [0.0f64; 8];
    let mut dy = [0.0f64; 8];
    for k in 0..8 {
        dx[k] = inv[0][0] * sf.dxi[k] + inv[0][1] * sf.deta[k];
        dy[k] = inv[1][0] * sf.dxi[k] + inv[1][1] * sf.deta[k];
    }
    Ok(MappedShape { n: sf.n, dx, dy, det_j: det })
}

/// Prestress state at one Gauss point of the 3x3 rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussPointState {
    pub xi: f64,
    pub eta: f64,
    pub weight: f64,
    /// In-plane membrane resultants (Nxx, Nyy, Nxy), N/m.
    pub n_th: [f64; 3],
}

/// Full element matrix bundle for one element.
#[derive(Debug, Clone)]
pub struct ElementMatrices {
    pub ke: Array2<f64>,
    pub me: Array2<f64>,
    pub fe_th: Array1<f64>,
}

/// Add `scale * g^T m g` to `out` where `g` has `R` rows over `cols`
/// column positions of the element vector.
fn add_quadratic<const R: usize>(
    out: &mut Array2<f64>,
    g: &[[f64; 8]; R],
    cols: &[usize; R],
    m: &[[f64; R]; R],
    scale: f64,
) {
    for (r1, row1) in g.iter().enumerate() {
        for (r2, row2) in g.iter().enumerate() {
            let c = m[r1][r2] * scale;
            if c == 0.0 {
                continue;
            }
            for (i, &gi) in row1.iter().enumerate() {
                if gi == 0.0 {
                    continue;
                }
                let ii = 5 * i + cols[r1];
                for (k, &gk) in row2.iter().enumerate() {
                    out[[ii, 5 * k + cols[r2]]] += c * gi * gk;
                }
            }
        }
    }
}

/// Stiffness, consistent mass and thermal load of one element.
pub fn element_matrices(section: &SectionProperties, coords: &[[f64; 2]; 8]) -> Result<ElementMatrices> {
    let mut ke = Array2::<f64>::zeros((EDOF, EDOF));
    let mut me = Array2::<f64>::zeros((EDOF, EDOF));
    let mut fe = Array1::<f64>::zeros(EDOF);
    let (a, b, d, es) = (&section.a, &section.b, &section.d, &section.es);

    // normal-strain blocks, mass and thermal load on the full 3x3 rule
    for (xi, eta, w) in gauss_2d(3) {
        let ms = mapped_shape(coords, xi, eta)?;
        let wj = w * ms.det_j;
        // membrane normal rows: eps_xx <- u, eps_yy <- v
        let gp = [ms.dx, ms.dy];
        let cp = [0usize, 1];
        // bending normal rows: kappa_xx <- theta_x, kappa_yy <- theta_y
        let gb = [ms.dx, ms.dy];
        let cb = [3usize, 4];
        let an = [[a[[0, 0]], a[[0, 1]]], [a[[1, 0]], a[[1, 1]]]];
        let bn = [[b[[0, 0]], b[[0, 1]]], [b[[1, 0]], b[[1, 1]]]];
        let dn = [[d[[0, 0]], d[[0, 1]]], [d[[1, 0]], d[[1, 1]]]];
        add_quadratic(&mut ke, &gp, &cp, &an, wj);
        add_quadratic(&mut ke, &gb, &cb, &dn, wj);
        // coupling B appears twice (p-b and b-p); both realized by one
        // asymmetric scatter each
        add_cross(&mut ke, &gp, &cp, &gb, &cb, &bn, wj);
        add_cross(&mut ke, &gb, &cb, &gp, &cp, &bn, wj);

        // consistent mass
        let nn = [ms.n];
        for (dof, inertia) in [(0usize, section.p), (1, section.p), (2, section.p), (3, section.i), (4, section.i)] {
            add_quadratic(&mut me, &nn, &[dof], &[[inertia]], wj);
        }

        // thermal load: Bp' NT + Bb' MT over the normal rows (the shear
        // component of NT/MT is zero for isotropic-in-plane sections)
        for i in 0..8 {
            fe[5 * i] += wj * ms.dx[i] * section.nt[0];
            fe[5 * i + 1] += wj * ms.dy[i] * section.nt[1];
            fe[5 * i + 3] += wj * ms.dx[i] * section.mt[0];
            fe[5 * i + 4] += wj * ms.dy[i] * section.mt[1];
            // gamma_xy / kappa_xy rows of the load (zero for nt[2] = 0)
            fe[5 * i] += wj * ms.dy[i] * section.nt[2];
            fe[5 * i + 1] += wj * ms.dx[i] * section.nt[2];
            fe[5 * i + 3] += wj * ms.dy[i] * section.mt[2];
            fe[5 * i + 4] += wj * ms.dx[i] * section.mt[2];
        }
    }

    // in-plane shear and transverse shear on the reduced 2x2 rule
    for (xi, eta, w) in gauss_2d(2) {
        let ms = mapped_shape(coords, xi, eta)?;
        let wj = w * ms.det_j;
        // gamma_xy row: u,y + v,x ; kappa_xy row: theta_x,y + theta_y,x
        let gs = [ms.dy, ms.dx];
        let cps = [0usize, 1];
        let cbs = [3usize, 4];
        let a66 = [[a[[2, 2]], a[[2, 2]]], [a[[2, 2]], a[[2, 2]]]];
        let b66 = [[b[[2, 2]], b[[2, 2]]], [b[[2, 2]], b[[2, 2]]]];
        let d66 = [[d[[2, 2]], d[[2, 2]]], [d[[2, 2]], d[[2, 2]]]];
        add_quadratic(&mut ke, &gs, &cps, &a66, wj);
        add_quadratic(&mut ke, &gs, &cbs, &d66, wj);
        add_cross(&mut ke, &gs, &cps, &gs, &cbs, &b66, wj);
        add_cross(&mut ke, &gs, &cbs, &gs, &cps, &b66, wj);

        // transverse shear rows: gamma_xz = w,x + theta_x ; gamma_yz = w,y + theta_y
        let esm = [[es[[0, 0]], es[[0, 1]]], [es[[1, 0]], es[[1, 1]]]];
        let rows = [(ms.dx, 3usize), (ms.dy, 4usize)];
        for (r1, &(g1, th1)) in rows.iter().enumerate() {
            for (r2, &(g2, th2)) in rows.iter().enumerate() {
                let c = esm[r1][r2] * wj;
                if c == 0.0 {
                    continue;
                }
                for i in 0..8 {
                    let (gwi, ni) = (g1[i], ms.n[i]);
                    for k in 0..8 {
                        let (gwk, nk) = (g2[k], ms.n[k]);
                        ke[[5 * i + 2, 5 * k + 2]] += c * gwi * gwk;
                        ke[[5 * i + 2, 5 * k + th2]] += c * gwi * nk;
                        ke[[5 * i + th1, 5 * k + 2]] += c * ni * gwk;
                        ke[[5 * i + th1, 5 * k + th2]] += c * ni * nk;
                    }
                }
            }
        }
    }

    symmetrize_checked(&mut ke, "Ke")?;
    symmetrize_checked(&mut me, "Me")?;
    Ok(ElementMatrices { ke, me, fe_th: fe })
}

fn add_cross<const R: usize>(
    out: &mut Array2<f64>,
    g1: &[[f64; 8]; R],
    c1: &[usize; R],
    g2: &[[f64; 8]; R],
    c2: &[usize; R],
    m: &[[f64; R]; R],
    scale: f64,
) {
    for (r1, row1) in g1.iter().enumerate() {
        for (r2, row2) in g2.iter().enumerate() {
            let c = m[r1][r2] * scale;
            if c == 0.0 {
                continue;
            }
            for (i, &gi) in row1.iter().enumerate() {
                if gi == 0.0 {
                    continue;
                }
                let ii = 5 * i + c1[r1];
                for (k, &gk) in row2.iter().enumerate() {
                    out[[ii, 5 * k + c2[r2]]] += c * gi * gk;
                }
            }
        }
    }
}

/// Geometric stiffness from in-plane resultants at the 3x3 Gauss points:
/// transverse-deflection gradients weighted by N, rotation gradients by
/// `h^2/12 N`.
pub fn element_geometric_stiffness(
    states: &[GaussPointState],
    section: &SectionProperties,
    coords: &[[f64; 2]; 8],
) -> Result<Array2<f64>> {
    let mut kg = Array2::<f64>::zeros((EDOF, EDOF));
    let rot = section.h * section.h / 12.0;
    for gp in states {
        let ms = mapped_shape(coords, gp.xi, gp.eta)?;
        let wj = gp.weight * ms.det_j;
        let nh = [[gp.n_th[0], gp.n_th[2]], [gp.n_th[2], gp.n_th[1]]];
        let grads = [ms.dx, ms.dy];
        for (dof, scale) in [(2usize, 1.0), (3, rot), (4, rot)] {
            add_quadratic(&mut kg, &grads, &[dof, dof], &nh, wj * scale);
        }
    }
    symmetrize_checked(&mut kg, "KGe")?;
    Ok(kg)
}

/// The 3x3-rule Gauss point list with unit resultants, used by callers to
/// fill in per-point prestress.
pub fn gauss_states_template() -> Vec<GaussPointState> {
    gauss_2d(3)
        .into_iter()
        .map(|(xi, eta, weight)| GaussPointState { xi, eta, weight, n_th: [0.0; 3] })
        .collect()
}

/// Membrane and bending strains at a point from the element displacement
/// vector: returns (eps_p, eps_b) in Voigt order (xx, yy, xy).
pub fn strains_at(coords: &[[f64; 2]; 8], de: &Array1<f64>, xi: f64, eta: f64) -> Result<([f64; 3], [f64; 3])> {
    let ms = mapped_shape(coords, xi, eta)?;
    let mut ep = [0.0f64; 3];
    let mut eb = [0.0f64; 3];
    for i in 0..8 {
        let (u, v) = (de[5 * i], de[5 * i + 1]);
        let (tx, ty) = (de[5 * i + 3], de[5 * i + 4]);
        ep[0] += ms.dx[i] * u;
        ep[1] += ms.dy[i] * v;
        ep[2] += ms.dy[i] * u + ms.dx[i] * v;
        eb[0] += ms.dx[i] * tx;
        eb[1] += ms.dy[i] * ty;
        eb[2] += ms.dy[i] * tx + ms.dx[i] * ty;
    }
    Ok((ep, eb))
}

/// Symmetrize after quadrature; errors when the pre-symmetrization
/// asymmetry exceeds 1e-9 relative (a coding-error tripwire).
fn symmetrize_checked(m: &mut Array2<f64>, label: &str) -> Result<()> {
    let n = m.nrows();
    let mut scale = 0.0f64;
    for i in 0..n {
        scale = scale.max(m[[i, i]].abs());
    }
    let scale = scale.max(1e-300);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (m[[i, j]], m[[j, i]]);
            worst = worst.max((a - b).abs() / scale);
            let avg = 0.5 * (a + b);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
    if worst > 1e-9 {
        return Err(Error::internal(format!("{label} asymmetry {worst:.3e} exceeds 1e-9")));
    }
    Ok(())
}
