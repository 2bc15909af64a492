import math

import numpy as np
import pytest

from axicav.formulation import Transformation
from axicav.studies import (
    AnalyticTarget,
    ConfigError,
    StudyConfig,
    StudyRow,
    build_study_config,
    fit_slope,
    load_study_config,
    parse_config_file,
    reconstruct_field,
    run_convergence,
    run_spurious_scan,
    write_csv,
)

CSV_HEADER = (
    "study,transform,alpha,beta,n,p,q,D,G,N,free_dofs,mode_id,"
    "omega_numeric,omega_analytic,rel_error,spurious_count,slope"
)


def _cfg(**kw):
    base = dict(
        study="converge",
        transforms=(Transformation("TB"),),
        n=1,
        q=2,
        p=1,
        mesh_ladder=(2, 4),
        quad_degree=None,
        quad_degrees=(),
        target=AnalyticTarget("TE", 1, 1, 1),
        modes=8,
        R=1.0,
        L=1.0,
        output=None,
    )
    base.update(kw)
    return StudyConfig(**base)


def test_fit_slope_exact_power():
    Ns = [2, 4, 8, 16]
    errs = [(1.0 / N) ** 3.5 for N in Ns]
    assert fit_slope(Ns, errs) == pytest.approx(3.5, abs=1e-10)


def test_fit_slope_two_points_quartic():
    assert fit_slope([4, 8], [1e-2, 6.25e-4]) == pytest.approx(4.0, abs=1e-12)


def test_write_csv_header_and_roundtrip(tmp_path):
    path = tmp_path / "out.csv"
    write_csv([], path)
    assert path.read_text().splitlines() == [CSV_HEADER]

    row = StudyRow(
        study="converge", transform="TC", alpha=1.0, beta=2.0, n=0, p=None, q=4,
        D=11, G=49, N=8, free_dofs=992, mode_id="TE022",
        omega_numeric=9.417901788, omega_analytic=9.417901779, rel_error=1.0e-9,
        spurious_count=None, slope=None,
    )
    write_csv([row], path)
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert len(fields) == 17
    assert float(fields[12]) == row.omega_numeric  # 17 significant digits round-trip
    assert fields[5] == ""  # p absent for azimuthal-block rows


def test_parse_config_file(tmp_path):
    path = tmp_path / "s.cfg"
    path.write_text(
        "# comment\nstudy = converge\ntransforms = TB;TC(1,1)\nn = 1\n"
        "q = 3\np = auto\nmesh_ladder = 2,4\ntarget = TE,1,1,1\noutput = out.csv\n"
    )
    cfg = load_study_config(path)
    assert cfg.study == "converge"
    assert len(cfg.transforms) == 2
    assert cfg.transforms[1] == Transformation("TC", 1.0, 1.0)
    assert cfg.p is None
    assert cfg.orders() == (3, 2)


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "s.cfg"
    path.write_text("study = converge\ntransforms = TB\nn = 1\nwhat = 3\n")
    with pytest.raises(ConfigError):
        load_study_config(path)


def test_duplicate_key_rejected(tmp_path):
    path = tmp_path / "s.cfg"
    path.write_text("study = spurious\nstudy = spurious\ntransforms = TB\nn = 1\n")
    with pytest.raises(ConfigError):
        load_study_config(path)


def test_invalid_tc_rejected_at_config_time():
    with pytest.raises(ConfigError):
        build_study_config(
            {
                "study": "converge",
                "transforms": "TC(0.2,1)",
                "n": "1",
                "q": "2",
                "target": "TE,1,1,1",
            }
        )


def test_target_mode_family_mismatch():
    with pytest.raises(ConfigError):
        build_study_config(
            {
                "study": "converge",
                "transforms": "TB",
                "n": "1",
                "q": "2",
                "target": "TE,0,2,2",
            }
        )


def test_mesh_ladder_must_increase():
    with pytest.raises(ConfigError):
        build_study_config(
            {
                "study": "spurious",
                "transforms": "TB",
                "n": "1",
                "q": "2",
                "mesh_ladder": "4,4",
            }
        )


def test_run_convergence_rows_and_slope():
    cfg = _cfg()
    rows, slopes = run_convergence(cfg)
    assert len(rows) == 2
    assert rows[0].slope is None and rows[1].slope is not None
    assert rows[0].rel_error > rows[1].rel_error
    assert slopes["TB"] == pytest.approx(rows[1].slope)
    assert rows[0].mode_id == "TE111"
    # normalized frequencies positive and matching the analytic target scale
    assert 3.0 < rows[0].omega_numeric < 4.5


def test_run_convergence_deterministic(tmp_path):
    cfg = _cfg()
    rows1, _ = run_convergence(cfg)
    rows2, _ = run_convergence(cfg)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(rows1, p1)
    write_csv(rows2, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_run_spurious_scan_small():
    cfg = _cfg(study="spurious", mesh_ladder=(4,), modes=3)
    rows, counts = run_spurious_scan(cfg)
    assert counts[("TB", 4)] == 0
    assert rows[0].spurious_count == 0


def test_reconstruct_field_phi_structure():
    from axicav.assembly import assemble
    from axicav.eigen import solve
    from axicav.fespace import build_pair
    from axicav.formulation import ModeProblem
    from axicav.mesh import build_structured

    mesh = build_structured(1.0, 1.0, 4)
    pair = build_pair(mesh, 2, 1)
    tr = Transformation("TB")
    lam_t = AnalyticTarget("TE", 1, 1, 1).lam(1.0, 1.0)
    prob = ModeProblem(mesh=mesh, n=1, transformation=tr, q=2, p=1, quad_degree=5)
    pen = assemble(prob, pair)
    spec = solve(pen, k=3, hint=lam_t)
    vec = pen.expand(spec.eigenvectors[:, 0])

    # n = 1, phi = pi/2: cos factor kills e_r and e_z
    e = reconstruct_field(pair, tr, 1, vec, 0.4, math.pi / 2, 0.6)
    assert abs(e[0]) < 1e-12 and abs(e[2]) < 1e-12

    with pytest.raises(ValueError):
        reconstruct_field(pair, tr, 1, vec, 0.0, 0.0, 0.5)


def test_reconstruct_field_n0_axisymmetric_tm010_shape():
    from axicav.analytic import bessel_j
    from axicav.assembly import assemble
    from axicav.eigen import solve
    from axicav.fespace import build_pair
    from axicav.formulation import ModeProblem
    from axicav.mesh import build_structured

    mesh = build_structured(1.0, 1.0, 8)
    pair = build_pair(mesh, 2, 2)
    tr = Transformation("TB")
    prob = ModeProblem(mesh=mesh, n=0, transformation=tr, q=2, p=2, quad_degree=7)
    pen = assemble(prob, pair).block("hcurl")
    lam_t = AnalyticTarget("TM", 0, 1, 0).lam(1.0, 1.0)
    spec = solve(pen, k=2, hint=lam_t)
    i = int(np.argmin(np.abs(spec.eigenvalues - lam_t)))
    vec = pen.expand(spec.eigenvectors[:, i])

    # axisymmetric: no phi dependence
    e1 = reconstruct_field(pair, tr, 0, vec, 0.3, 0.0, 0.5)
    e2 = reconstruct_field(pair, tr, 0, vec, 0.3, 1.3, 0.5)
    assert np.allclose(e1, e2)

    # e_z approaches a nonzero constant at the axis, e_r vanishes, and the
    # radial profile follows J_0(j01 * r)
    j01 = math.sqrt(lam_t)
    near = reconstruct_field(pair, tr, 0, vec, 1e-6, 0.0, 0.5)
    assert abs(near[2]) > 1e-3
    assert abs(near[0]) < 1e-4 * abs(near[2])
    for r in (0.25, 0.55, 0.85):
        e = reconstruct_field(pair, tr, 0, vec, r, 0.0, 0.5)
        assert e[2] / near[2] == pytest.approx(bessel_j(0, j01 * r), abs=2e-4)
