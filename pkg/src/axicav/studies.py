"""Study harness: convergence, quadrature sweep, spurious scan, (alpha, beta)
scan, axis-regularity probe, field reconstruction, and CSV emission.

Every study consumes a StudyConfig (parsed from a flat key = value file) and
emits StudyRow records with a fixed 17-column schema, deterministic across
reruns.  The default cavity is the unit pillbox (R = L = 1, c0 = 1): all
reported quantities are relative frequency errors and log-log slopes, which
are dimension independent.

For n = 0 the scalar and vector unknowns decouple exactly: TE targets are
solved on the scalar (azimuthal) block standalone with the in-plane order p
recorded as absent, TM targets on the in-plane block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .analytic import (
    bessel_prime_zero,
    bessel_zero,
    estimate_match_tol,
    match_spectra,
    pillbox_spectrum,
)
from .assembly import assemble
from .eigen import solve, solve_window
from .fespace import build_pair
from .formulation import (
    ModeProblem,
    Transformation,
    convergent_tc_params,
    inverse_substitute,
    polynomial_threshold_degree,
    validate_tc,
)
from .mesh import build_structured
from .quadrature import rule_for_degree

__all__ = [
    "ConfigError",
    "TargetNotMatchedError",
    "IndeterminateProbeError",
    "AnalyticTarget",
    "StudyConfig",
    "StudyRow",
    "CSV_HEADER",
    "parse_config_file",
    "build_study_config",
    "load_study_config",
    "write_csv",
    "fit_slope",
    "run_convergence",
    "run_quadrature_sweep",
    "run_spurious_scan",
    "run_alphabeta_scan",
    "run_regularity",
    "axis_regularity_probe",
    "reconstruct_field",
]


class ConfigError(ValueError):
    """Malformed or inconsistent study configuration."""


class TargetNotMatchedError(RuntimeError):
    """The target analytic mode could not be identified in the spectrum."""


class IndeterminateProbeError(RuntimeError):
    """The axis probe found no usable field magnitude."""


@dataclass(frozen=True)
class AnalyticTarget:
    family: str
    m: int
    nu: int
    pi_idx: int

    def __post_init__(self):
        if self.family not in ("TM", "TE"):
            raise ConfigError(f"unknown mode family {self.family!r}")
        if self.family == "TE" and self.pi_idx < 1:
            raise ConfigError("TE modes require an axial index >= 1")

    def lam(self, R: float, L: float) -> float:
        zero = bessel_zero if self.family == "TM" else bessel_prime_zero
        return (zero(self.m, self.nu) / R) ** 2 + (self.pi_idx * math.pi / L) ** 2

    @property
    def mode_id(self) -> str:
        return f"{self.family}{self.m}{self.nu}{self.pi_idx}"


@dataclass(frozen=True)
class StudyConfig:
    study: str
    transforms: tuple
    n: int
    q: int | None  # None = auto (p + 1)
    p: int | None  # None = auto (q - 1)
    mesh_ladder: tuple
    quad_degree: int | None  # None = auto (polynomial threshold)
    quad_degrees: tuple
    target: AnalyticTarget | None
    modes: int
    R: float
    L: float
    output: str | None
    expect_slope_min: float | None = None
    expect_slope_max: float | None = None
    expect_spurious_max: int | None = None

    def orders(self) -> tuple:
        if self.q is None and self.p is None:
            raise ConfigError("at least one of q, p must be given")
        q = self.q if self.q is not None else self.p + 1
        p = self.p if self.p is not None else max(self.q - 1, 1)
        return q, p


CSV_HEADER = (
    "study,transform,alpha,beta,n,p,q,D,G,N,free_dofs,mode_id,"
    "omega_numeric,omega_analytic,rel_error,spurious_count,slope"
)

_ROW_FIELDS = CSV_HEADER.split(",")


@dataclass
class StudyRow:
    study: str
    transform: str
    alpha: float | None = None
    beta: float | None = None
    n: int | None = None
    p: int | None = None
    q: int | None = None
    D: int | None = None
    G: int | None = None
    N: int | None = None
    free_dofs: int | None = None
    mode_id: str | None = None
    omega_numeric: float | None = None
    omega_analytic: float | None = None
    rel_error: float | None = None
    spurious_count: int | None = None
    slope: float | None = None


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(rows, path) -> None:
    """Fixed 17-column schema; floats carry 17 significant digits."""
    with open(path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(",".join(_fmt(getattr(row, f)) for f in _ROW_FIELDS) + "\n")


def fit_slope(Ns, errors, points: int = 3) -> float:
    """Least-squares slope of log(error) against log(1/N), last `points` entries."""
    Ns = np.asarray(Ns, dtype=float)[-points:]
    errs = np.asarray(errors, dtype=float)[-points:]
    if np.any(errs <= 0):
        raise ValueError("errors must be positive for slope fitting")
    return float(np.polyfit(np.log(1.0 / Ns), np.log(errs), 1)[0])


# ---------------------------------------------------------------------------
# config file handling


def parse_config_file(path) -> dict:
    """Flat 'key = value' lines; '#' starts a comment; blank lines ignored."""
    entries = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{ln}: expected 'key = value'")
            key, value = line.split("=", 1)
            key = key.strip()
            if key in entries:
                raise ConfigError(f"{path}:{ln}: duplicate key {key!r}")
            entries[key] = value.strip()
    return entries


_KNOWN_KEYS = {
    "study", "transforms", "n", "q", "p", "mesh_ladder", "quad_degree",
    "quad_degrees", "target", "modes", "R", "L", "output",
    "expect_slope_min", "expect_slope_max", "expect_spurious_max",
}

_STUDIES = ("converge", "spurious", "quadsweep", "alphabeta", "regularity")


def _parse_int_list(text: str) -> tuple:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def build_study_config(entries: dict) -> StudyConfig:
    unknown = set(entries) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "study" not in entries:
        raise ConfigError("missing required key 'study'")
    study = entries["study"]
    if study not in _STUDIES:
        raise ConfigError(f"study must be one of {_STUDIES}, got {study!r}")
    if "transforms" not in entries:
        raise ConfigError("missing required key 'transforms'")
    try:
        transforms = tuple(
            Transformation.parse(tok) for tok in entries["transforms"].split(";") if tok.strip()
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not transforms:
        raise ConfigError("no transformations given")

    def geti(key, default=None):
        if key not in entries:
            return default
        if entries[key] == "auto":
            return None
        try:
            return int(entries[key])
        except ValueError as exc:
            raise ConfigError(f"bad integer for {key!r}: {entries[key]!r}") from exc

    def getf(key, default=None):
        if key not in entries:
            return default
        try:
            return float(entries[key])
        except ValueError as exc:
            raise ConfigError(f"bad float for {key!r}: {entries[key]!r}") from exc

    n = geti("n")
    if n is None and "n" not in entries:
        raise ConfigError("missing required key 'n'")

    target = None
    if "target" in entries:
        toks = [t.strip() for t in entries["target"].split(",")]
        if len(toks) != 4:
            raise ConfigError("target must be 'family,m,nu,pi_idx'")
        try:
            target = AnalyticTarget(toks[0], int(toks[1]), int(toks[2]), int(toks[3]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    mesh_ladder = _parse_int_list(entries.get("mesh_ladder", "4,8,16,32"))
    if any(b <= a for a, b in zip(mesh_ladder, mesh_ladder[1:])):
        raise ConfigError("mesh_ladder must be strictly increasing")

    cfg = StudyConfig(
        study=study,
        transforms=transforms,
        n=n,
        q=geti("q"),
        p=geti("p"),
        mesh_ladder=mesh_ladder,
        quad_degree=geti("quad_degree"),
        quad_degrees=_parse_int_list(entries.get("quad_degrees", "")),
        target=target,
        modes=geti("modes", 8),
        R=getf("R", 1.0),
        L=getf("L", 1.0),
        output=entries.get("output"),
        expect_slope_min=getf("expect_slope_min"),
        expect_slope_max=getf("expect_slope_max"),
        expect_spurious_max=geti("expect_spurious_max"),
    )
    for tr in cfg.transforms:
        if tr.kind == "TC":
            msg = validate_tc(cfg.n, tr.alpha, tr.beta)
            if msg is not None:
                raise ConfigError(msg)
    if cfg.study in ("converge", "quadsweep", "alphabeta", "regularity") and cfg.target is None:
        raise ConfigError(f"study {cfg.study!r} requires a target mode")
    if cfg.target is not None and cfg.target.m != abs(cfg.n):
        raise ConfigError("target azimuthal index must equal |n|")
    return cfg


def load_study_config(path) -> StudyConfig:
    return build_study_config(parse_config_file(path))


# ---------------------------------------------------------------------------
# solving helpers


def _block_for(cfg: StudyConfig) -> str:
    if cfg.n != 0 or cfg.target is None:
        return "full"
    return "h1" if cfg.target.family == "TE" else "hcurl"


def _quad_degree(cfg: StudyConfig, tr: Transformation, q: int, p: int, block: str) -> int:
    if cfg.quad_degree is not None:
        return cfg.quad_degree
    blk = {"h1": "azimuthal", "hcurl": "inplane", "full": "full"}[block]
    th = polynomial_threshold_degree(tr, cfg.n, q, p, block=blk)
    if th is None:
        raise ConfigError(
            f"{tr.label()} with n={cfg.n} has non-polynomial integrands; "
            "an explicit quad_degree is required"
        )
    return th


def _assemble_pencil(cfg: StudyConfig, tr: Transformation, q: int, p: int,
                     N: int, D: int, block: str):
    mesh = build_structured(cfg.R, cfg.L, N)
    pair = build_pair(mesh, q, p)
    problem = ModeProblem(mesh=mesh, n=cfg.n, transformation=tr, q=q, p=p, quad_degree=D)
    pencil = assemble(problem, pair)
    if block != "full":
        pencil = pencil.block(block)
    return mesh, pair, pencil


def _target_omega(cfg: StudyConfig, tr: Transformation, q: int, p: int,
                  N: int, D: int, block: str):
    """Solve near the target mode; returns (omega, pencil data for reuse)."""
    lam_t = cfg.target.lam(cfg.R, cfg.L)
    mesh, pair, pencil = _assemble_pencil(cfg, tr, q, p, N, D, block)
    families = ("TM", "TE") if block == "full" else (
        ("TE",) if block == "h1" else ("TM",)
    )
    below = [
        md for md in pillbox_spectrum(cfg.R, cfg.L, cfg.n, lam_t * 1.05, families)
        if md.lam > 0.5 * lam_t
    ]
    k = len(below) + 5
    spec = solve(pencil, k=k, hint=lam_t)
    idx = int(np.argmin(np.abs(spec.eigenvalues - lam_t)))
    lam = spec.eigenvalues[idx]
    omega = math.sqrt(lam)
    omega_t = math.sqrt(lam_t)
    if abs(omega - omega_t) > 0.25 * omega_t:
        raise TargetNotMatchedError(
            f"{tr.label()} N={N}: target {cfg.target.mode_id} at omega={omega_t:.6g} "
            f"not matched; nearest computed omega={omega:.6g}, "
            f"window={np.sqrt(spec.eigenvalues).round(4).tolist()}"
        )
    return omega, omega_t, spec, idx, mesh, pair, pencil


def _p_for_csv(cfg: StudyConfig, p: int):
    """The in-plane order is reported as absent for scalar-block-only runs."""
    return None if _block_for(cfg) == "h1" else p


# ---------------------------------------------------------------------------
# studies


def run_convergence(cfg: StudyConfig):
    """Relative eigenfrequency error per mesh plus a fitted slope per transform."""
    q, p = cfg.orders()
    block = _block_for(cfg)
    rows, slopes = [], {}
    for tr in cfg.transforms:
        D = _quad_degree(cfg, tr, q, p, block)
        G = rule_for_degree(D).point_count
        errs = []
        for N in cfg.mesh_ladder:
            omega, omega_t, spec, _, _, _, pencil = _target_omega(
                cfg, tr, q, p, N, D, block
            )
            err = abs(omega - omega_t) / omega_t
            errs.append(err)
            rows.append(
                StudyRow(
                    study=cfg.study, transform=tr.kind, alpha=tr.alpha, beta=tr.beta,
                    n=cfg.n, p=_p_for_csv(cfg, p), q=q, D=D, G=G, N=N,
                    free_dofs=pencil.n_free, mode_id=cfg.target.mode_id,
                    omega_numeric=omega, omega_analytic=omega_t, rel_error=err,
                )
            )
        slope = fit_slope(cfg.mesh_ladder, errs)
        rows[-1].slope = slope
        slopes[tr.label()] = slope
    return rows, slopes


def run_quadrature_sweep(cfg: StudyConfig):
    """Error per quadrature degree at fixed mesh; flags degree-stable transforms."""
    if not cfg.quad_degrees:
        raise ConfigError("quadsweep requires quad_degrees")
    q, p = cfg.orders()
    block = _block_for(cfg)
    N = cfg.mesh_ladder[-1]
    rows, stable, omegas = [], {}, {}
    for tr in cfg.transforms:
        seq = []
        for D in cfg.quad_degrees:
            omega, omega_t, spec, _, _, _, pencil = _target_omega(
                cfg, tr, q, p, N, D, block
            )
            err = abs(omega - omega_t) / omega_t
            seq.append((D, omega))
            rows.append(
                StudyRow(
                    study=cfg.study, transform=tr.kind, alpha=tr.alpha, beta=tr.beta,
                    n=cfg.n, p=_p_for_csv(cfg, p), q=q, D=D,
                    G=rule_for_degree(D).point_count, N=N, free_dofs=pencil.n_free,
                    mode_id=cfg.target.mode_id, omega_numeric=omega,
                    omega_analytic=omega_t, rel_error=err,
                )
            )
        blk = {"h1": "azimuthal", "hcurl": "inplane", "full": "full"}[block]
        threshold = polynomial_threshold_degree(tr, cfg.n, q, p, block=blk)
        flag = False
        if threshold is not None:
            shifts = [
                abs(o2 - o1) / o1
                for (d1, o1), (d2, o2) in zip(seq, seq[1:])
                if d1 >= threshold
            ]
            flag = bool(shifts) and max(shifts) < 1e-12
        stable[tr.label()] = flag
        omegas[tr.label()] = seq
    return rows, stable, omegas


def _first_modes(R: float, L: float, n: int, count: int):
    """At least `count` lowest analytic modes of the n-th block."""
    lam_max = (math.pi / min(R, L)) ** 2 * 4
    for _ in range(12):
        modes = pillbox_spectrum(R, L, n, lam_max)
        if len(modes) >= count:
            return modes
        lam_max *= 2
    raise ConfigError("analytic window exceeds the tabulated Bessel-zero range")


def run_spurious_scan(cfg: StudyConfig):
    """Spurious-mode counts against the first `modes` analytic frequencies."""
    q, p = cfg.orders()
    rows, counts = [], {}
    modes_all = _first_modes(cfg.R, cfg.L, cfg.n, cfg.modes + 1)
    window = modes_all[: cfg.modes]
    lam_cut = 0.5 * (modes_all[cfg.modes - 1].lam + modes_all[cfg.modes].lam)
    for tr in cfg.transforms:
        D = _quad_degree(cfg, tr, q, p, "full") if cfg.quad_degree is None else cfg.quad_degree
        for N in cfg.mesh_ladder:
            mesh, pair, pencil = _assemble_pencil(cfg, tr, q, p, N, D, "full")
            spec = solve_window(
                pencil, lam_cut, 0.02 * modes_all[0].lam, expect=cfg.modes + 8
            )
            tol = estimate_match_tol(spec.eigenvalues, window)
            report = match_spectra(spec.eigenvalues, window, tol)
            counts[(tr.label(), N)] = report.spurious_count
            rows.append(
                StudyRow(
                    study=cfg.study, transform=tr.kind, alpha=tr.alpha, beta=tr.beta,
                    n=cfg.n, p=p, q=q, D=D, G=rule_for_degree(D).point_count, N=N,
                    free_dofs=pencil.n_free, spurious_count=report.spurious_count,
                )
            )
    return rows, counts


def run_alphabeta_scan(cfg: StudyConfig):
    """Convergence rate per admissible TC(alpha, beta) pair.

    A pair is classified full-rate when its slope reaches the eigenvalue
    rate of the discretization minus 0.4: rate 2q for the standalone n = 0
    scalar block, rate 2p for coupled problems.  The classification is
    cross-checked against the table of known full-rate pairs; disagreements
    are reported alongside the result.
    """
    q, p = cfg.orders()
    for tr in cfg.transforms:
        if tr.kind != "TC":
            raise ConfigError("alphabeta scan accepts only TC transformations")
    rows, slopes = [], {}
    for tr in cfg.transforms:
        sub = replace(cfg, transforms=(tr,))
        tr_rows, tr_slopes = run_convergence(sub)
        rows.extend(tr_rows)
        slopes[(tr.alpha, tr.beta)] = tr_slopes[tr.label()]
    scalar_block = _block_for(cfg) == "h1"
    rate = 2 * q if scalar_block else 2 * p
    table = convergent_tc_params(cfg.n)
    expected = {}
    for alpha, beta in slopes:
        if cfg.n == 0:
            expected[(alpha, beta)] = (None, beta) in table
        else:
            expected[(alpha, beta)] = (alpha, beta) in table
    classification = {key: s >= rate - 0.4 for key, s in slopes.items()}
    return rows, slopes, classification, expected


def run_regularity(cfg: StudyConfig):
    """Fitted |U| ~ r^s exponent near the axis for each TC transformation.

    The exponent is written to the slope column of the emitted rows.
    """
    q, p = cfg.orders()
    if cfg.n == 0:
        raise ConfigError("the regularity probe needs a coupled mode (n != 0)")
    rows, exponents = [], {}
    N = cfg.mesh_ladder[-1]
    for tr in cfg.transforms:
        D = _quad_degree(cfg, tr, q, p, "full") if cfg.quad_degree is None else cfg.quad_degree
        omega, omega_t, spec, idx, mesh, pair, pencil = _target_omega(
            cfg, tr, q, p, N, D, "full"
        )
        vec = pencil.expand(spec.eigenvectors[:, idx])
        exponent = axis_regularity_probe(mesh, pair, vec)
        exponents[tr.label()] = exponent
        rows.append(
            StudyRow(
                study=cfg.study, transform=tr.kind, alpha=tr.alpha, beta=tr.beta,
                n=cfg.n, p=p, q=q, D=D, G=rule_for_degree(D).point_count, N=N,
                free_dofs=pencil.n_free, mode_id=cfg.target.mode_id,
                omega_numeric=omega, omega_analytic=omega_t,
                rel_error=abs(omega - omega_t) / omega_t, slope=exponent,
            )
        )
    return rows, exponents


def axis_regularity_probe(mesh, pair, vec_full) -> float:
    """Log-log slope of |U| against r over samples r in {h/8, h/4, h/2, h}.

    Samples sit at a fixed z inside the first element column; h is the
    radial cell width.  The discrete field is piecewise polynomial, so the
    probe reflects the continuous trend only on fine meshes (N >= 16).
    """
    h = mesh.R / mesh.N
    nz = mesh.n_z
    z_s = (nz // 2 + 0.4) * (mesh.L / nz)
    rs = np.array([h / 8, h / 4, h / 2, h])
    pts = np.column_stack([rs, np.full(rs.shape, z_s)])
    U = pair.hcurl.evaluate(vec_full[pair.n_h1:], pts)
    mag = np.linalg.norm(U, axis=1)
    if np.all(mag < 1e-12):
        raise IndeterminateProbeError("field magnitude below 1e-12 at all samples")
    return float(np.polyfit(np.log(rs), np.log(mag), 1)[0])


def reconstruct_field(pair, transformation, n, vec_full, r, phi, z) -> np.ndarray:
    """Physical 3D field (e_r, e_phi, e_z) at a point (r > 0, phi, z).

    Inverse-substitutes the discrete pair at (r, z), then applies the
    azimuthal expansion: (cos, sin, cos) factors of n*phi for n >= 1, the
    complementary (sin, cos, sin) set for n <= -1, no phi dependence at n = 0.
    """
    if r <= 0:
        raise ValueError("reconstruction requires r > 0")
    u_c = vec_full[: pair.n_h1]
    U_c = vec_full[pair.n_h1:]
    pts = np.array([[r, z]])
    uv, ug = pair.h1.evaluate(u_c, pts, nderiv=1)
    Uv = pair.hcurl.evaluate(U_c, pts)
    e_phi, e_rz = inverse_substitute(transformation, n, np.array([r]), uv, ug, Uv)
    e_phi, e_r, e_z = float(e_phi[0]), float(e_rz[0, 0]), float(e_rz[0, 1])
    if n == 0:
        return np.array([e_r, e_phi, e_z])
    m = abs(n) * phi
    if n > 0:
        return np.array([e_r * math.cos(m), e_phi * math.sin(m), e_z * math.cos(m)])
    return np.array([e_r * math.sin(m), e_phi * math.cos(m), e_z * math.sin(m)])
