"""Assembly of the global symmetric stiffness/mass pencil K x = lambda M x.

Element contributions are evaluated with a shared quadrature rule and the
compositional integrands from the formulation module, vectorized over
element chunks.  Essential conditions (axis conditions of the chosen
transformation plus the perfectly conducting walls) are applied by
symmetric elimination of rows and columns, so the reduced pencil stays
symmetric with M positive definite.

Element order is fixed, which makes assembled matrices bit-stable from run
to run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .fespace import FeSpacePair
from .formulation import ModeProblem, axis_conditions, curl_n, transformed_to_physical
from .mesh import BoundaryTag
from .quadrature import rule_for_degree

__all__ = [
    "AssembledPencil",
    "assemble",
    "apply_constraints",
    "collect_constraints",
    "dump_matrix",
]


@dataclass
class AssembledPencil:
    """Reduced symmetric pencil with the bookkeeping to undo the reduction.

    Free dofs are ordered as in the full combined numbering (H1 block then
    H(curl) block); n_free_h1 counts how many free dofs are scalar.
    """

    K: sparse.csr_matrix
    M: sparse.csr_matrix
    ndof_full: int
    n_h1: int
    free_to_full: np.ndarray
    full_to_free: np.ndarray
    constrained: np.ndarray
    n_free_h1: int
    K_unconstrained: sparse.csr_matrix | None = None
    M_unconstrained: sparse.csr_matrix | None = None

    @property
    def n_free(self) -> int:
        return self.K.shape[0]

    def expand(self, x: np.ndarray) -> np.ndarray:
        """Embed a free-dof vector into the full numbering (zeros elsewhere)."""
        full = np.zeros(self.ndof_full, dtype=x.dtype)
        full[self.free_to_full] = x
        return full

    def block(self, which: str) -> "AssembledPencil":
        """Extract the scalar ('h1') or vector ('hcurl') diagonal block.

        Meaningful for n = 0, where the two blocks decouple exactly.
        """
        if which == "h1":
            sel = self.free_to_full < self.n_h1
        elif which == "hcurl":
            sel = self.free_to_full >= self.n_h1
        else:
            raise ValueError(f"unknown block {which!r}")
        idx = np.nonzero(sel)[0]
        full_to_free = np.full(self.ndof_full, -1, dtype=int)
        full_to_free[self.free_to_full[idx]] = np.arange(len(idx))
        return AssembledPencil(
            K=self.K[idx][:, idx].tocsr(),
            M=self.M[idx][:, idx].tocsr(),
            ndof_full=self.ndof_full,
            n_h1=self.n_h1,
            free_to_full=self.free_to_full[idx],
            full_to_free=full_to_free,
            constrained=self.constrained,
            n_free_h1=int(np.sum(self.free_to_full[idx] < self.n_h1)),
        )

    def offdiagonal_block(self, which: str = "K") -> np.ndarray:
        """Dense H1-x-H(curl) coupling block (for decoupling checks)."""
        A = self.K if which == "K" else self.M
        nu = self.n_free_h1
        return np.asarray(A[:nu][:, nu:].todense())


def collect_constraints(problem: ModeProblem, pair: FeSpacePair) -> np.ndarray:
    """Constrained combined dofs: axis conditions plus PEC wall conditions."""
    mesh = problem.mesh
    cond = axis_conditions(problem.transformation, problem.n)
    dofs = []
    for e, tag in mesh.boundary_tags.items():
        if tag is BoundaryTag.PEC_WALL:
            dofs.append(pair.h1.edge_trace_dofs[e])
            dofs.append(pair.n_h1 + pair.hcurl.edge_dofs[e])
        else:  # axis
            if cond.h1_dirichlet:
                dofs.append(pair.h1.edge_trace_dofs[e])
            if cond.hcurl_tangential_dirichlet:
                dofs.append(pair.n_h1 + pair.hcurl.edge_dofs[e])
    if not dofs:
        return np.empty(0, dtype=int)
    return np.unique(np.concatenate(dofs))


def apply_constraints(K_full, M_full, constrained, n_h1: int | None = None):
    """Eliminate constrained dofs (homogeneous conditions) symmetrically.

    Returns (K, M, free_to_full, full_to_free).  Raises on duplicate or
    out-of-range constraint indices.
    """
    n = K_full.shape[0]
    constrained = np.asarray(constrained, dtype=int)
    if constrained.size:
        if constrained.min() < 0 or constrained.max() >= n:
            raise ValueError("constraint dof out of range")
        if len(np.unique(constrained)) != len(constrained):
            raise ValueError("duplicate constraint dof")
    mask = np.ones(n, dtype=bool)
    mask[constrained] = False
    free = np.nonzero(mask)[0]
    full_to_free = np.full(n, -1, dtype=int)
    full_to_free[free] = np.arange(len(free))
    K = K_full.tocsr()[free][:, free].tocsr()
    M = M_full.tocsr()[free][:, free].tocsr()
    K.sort_indices()
    M.sort_indices()
    return K, M, free, full_to_free


def _zeros_like_field(shape_scalar, tail):
    return np.zeros((1, 1, 1) + tail)


def assemble(problem: ModeProblem, pair: FeSpacePair, chunk: int = 256) -> AssembledPencil:
    """Assemble and reduce the pencil for the given mode problem."""
    mesh = problem.mesh
    tr, n = problem.transformation, problem.n
    rule = rule_for_degree(problem.quad_degree)
    bary, wq = rule.points, rule.weights

    regions = problem.region_of()
    eps = np.array([problem.materials[i].eps for i in regions])  # (nt, 3)
    inv_mu = np.array([[1.0 / m for m in problem.materials[i].mu] for i in regions])

    verts = mesh.nodes[mesh.triangles]
    dets = np.abs(mesh.triangle_areas() * 2.0)
    ndof = pair.n_total
    cell_dofs = pair.combined_cell_dofs()
    nloc = cell_dofs.shape[1]

    h1_class = pair.h1._class_of
    hc_class = pair.hcurl._class_of
    combo = h1_class.astype(np.int64) * (hc_class.max() + 1) + hc_class
    rows_all, cols_all, kvals_all, mvals_all = [], [], [], []

    zero_u = np.zeros((1, 1, 1))
    zero_du = np.zeros((1, 1, 1, 2))
    zero_d2u = np.zeros((1, 1, 1, 3))
    zero_U = np.zeros((1, 1, 1, 2))
    zero_dU = np.zeros((1, 1, 1, 2, 2))

    for key in np.unique(combo):
        els = np.nonzero(combo == key)[0]
        t0 = els[0]
        h1_elem = pair.h1._elements[h1_class[t0]]
        hc_elem = pair.hcurl._elements[hc_class[t0]]
        offs = pair.h1._offsets[t0]
        uval, ugrad, uhess = h1_elem.eval_bary(bary, offs, nderiv=2)
        Uval, Ujac = hc_elem.eval_bary(bary, offs, deriv=True)

        for start in range(0, len(els), chunk):
            ids = els[start : start + chunk]
            ne = len(ids)
            r_eq = np.einsum("qk,ek->eq", bary, verts[ids, :, 0])[:, :, None]

            bu = transformed_to_physical(
                tr, n, r_eq, uval[None], ugrad[None], uhess[None], zero_U, zero_dU
            )
            bU = transformed_to_physical(
                tr, n, r_eq, zero_u, zero_du, zero_d2u, Uval[None], Ujac[None]
            )

            def cat(fu, fU):
                fu = np.broadcast_to(fu, (ne, len(wq), uval.shape[1]))
                fU = np.broadcast_to(fU, (ne, len(wq), Uval.shape[1]))
                return np.concatenate([fu, fU], axis=2)

            e_phi = cat(bu.e_phi, bU.e_phi)
            e_r = cat(bu.e_r, bU.e_r)
            e_z = cat(bu.e_z, bU.e_z)
            w_r = cat(bu.drephi_dr, bU.drephi_dr)
            w_z = cat(bu.drephi_dz, bU.drephi_dz)
            der_dz = cat(bu.der_dz, bU.der_dz)
            dez_dr = cat(bu.dez_dr, bU.dez_dr)

            r2 = r_eq[:, :, 0][:, :, None]
            c = curl_n(n, r2, e_r, e_phi, e_z, der_dz, dez_dr, w_r, w_z)

            w_el = dets[ids][:, None] * wq[None, :] * r_eq[:, :, 0]  # (ne, nq)
            K_el = np.zeros((ne, nloc, nloc))
            M_el = np.zeros((ne, nloc, nloc))
            for comp in range(3):
                K_el += np.einsum(
                    "eq,eqi,eqj->eij", w_el * inv_mu[ids, comp : comp + 1], c[..., comp], c[..., comp]
                )
            for comp, fld in enumerate((e_r, e_phi, e_z)):
                M_el += np.einsum(
                    "eq,eqi,eqj->eij", w_el * eps[ids, comp : comp + 1], fld, fld
                )
            K_el = 0.5 * (K_el + K_el.transpose(0, 2, 1))
            M_el = 0.5 * (M_el + M_el.transpose(0, 2, 1))

            dofs = cell_dofs[ids]
            rows_all.append(np.repeat(dofs, nloc, axis=1).ravel())
            cols_all.append(np.tile(dofs, (1, nloc)).ravel())
            kvals_all.append(K_el.ravel())
            mvals_all.append(M_el.ravel())

    rows = np.concatenate(rows_all)
    cols = np.concatenate(cols_all)
    K_full = sparse.coo_matrix(
        (np.concatenate(kvals_all), (rows, cols)), shape=(ndof, ndof)
    ).tocsr()
    M_full = sparse.coo_matrix(
        (np.concatenate(mvals_all), (rows, cols)), shape=(ndof, ndof)
    ).tocsr()

    constrained = collect_constraints(problem, pair)
    K, M, free, full_to_free = apply_constraints(K_full, M_full, constrained)
    return AssembledPencil(
        K=K,
        M=M,
        ndof_full=ndof,
        n_h1=pair.n_h1,
        free_to_full=free,
        full_to_free=full_to_free,
        constrained=constrained,
        n_free_h1=int(np.sum(free < pair.n_h1)),
        K_unconstrained=K_full,
        M_unconstrained=M_full,
    )


def dump_matrix(A, path) -> None:
    """Coordinate text dump: one 'i j value' line per stored entry."""
    coo = sparse.coo_matrix(A)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{i} {j} {v:.17g}\n")
