"""Coupled three-transmon + cavity device model.

Builds the lab-frame Hamiltonian (GHz units)

    H = w_c a^dag a + sum_q [ sum_j w_0j^(q) |j><j|  +  (a + a^dag) sum_jk g_q nbar_jk^(q) |j><k| ]

from flux-dependent transmon levels.  ``nbar_jk = n_jk / n_01`` are charge
matrix elements normalized to the 0-1 element, so the configured ``g`` is
directly the 0-1 vacuum-Rabi coupling: a two-level transmon swept through the
cavity shows a ``2 g`` splitting.  Higher-level couplings then scale like
``sqrt(j)`` as the raw matrix elements dictate.

Eigenstates are labeled by maximum squared overlap with bare product states
``|abc> (x) |d>`` (Q1 most significant, cavity last), with continuity
tie-breaking along flux scans so labels do not swap across narrow crossings.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache, reduce

import numpy as np

from .core import HERMITICITY_ATOL, HilbertSpace, NumericsError, Operator
from .transmon import TransmonParams, ej_of_flux, flux_for_frequency, transmon_spectrum

AMBIGUOUS_OVERLAP = 0.4


class NoCrossingError(ValueError):
    """The tracked branch pair has no interior gap minimum over the scan range."""


@dataclass(frozen=True)
class FluxMap:
    """Linear volts-to-flux map ``phi = crosstalk @ V + offsets`` (flux quanta)."""

    crosstalk: tuple  # 3x3, flux quanta per volt
    offsets: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        mat = np.asarray(self.crosstalk, dtype=float)
        if mat.shape != (3, 3):
            raise ValueError("crosstalk must be 3x3")
        if abs(np.linalg.det(mat)) < 1e-12:
            raise ValueError("crosstalk matrix must be invertible")
        object.__setattr__(self, "crosstalk", tuple(tuple(row) for row in mat))
        object.__setattr__(self, "offsets", tuple(float(x) for x in self.offsets))

    @classmethod
    def diagonal(cls, alpha: float = 1.0) -> "FluxMap":
        return cls(tuple(tuple(alpha if i == j else 0.0 for j in range(3)) for i in range(3)))


def flux_from_voltage(fluxmap: FluxMap, volts) -> np.ndarray:
    return np.asarray(fluxmap.crosstalk, dtype=float) @ np.asarray(volts, dtype=float) + np.asarray(
        fluxmap.offsets
    )


@dataclass(frozen=True)
class DeviceConfig:
    """All device constants: cavity, three transmons, flux map, coherence times."""

    cavity_freq: float  # GHz
    cavity_levels: int
    transmons: tuple  # 3 x TransmonParams
    fluxmap: FluxMap
    t1: tuple  # per-qubit energy relaxation, us
    t2: tuple  # per-qubit dephasing, us
    nominal_flux: tuple  # operating-point flux per qubit, flux quanta
    operating_freqs: tuple = (6.0, 7.0, 7.85)  # informational; used to derive nominal_flux

    def __post_init__(self):
        if len(self.transmons) != 3:
            raise ValueError("exactly three transmons required")
        object.__setattr__(self, "transmons", tuple(self.transmons))
        object.__setattr__(self, "t1", tuple(float(x) for x in self.t1))
        object.__setattr__(self, "t2", tuple(float(x) for x in self.t2))
        object.__setattr__(self, "nominal_flux", tuple(float(x) for x in self.nominal_flux))
        object.__setattr__(self, "operating_freqs", tuple(float(x) for x in self.operating_freqs))
        if self.cavity_levels < 2:
            raise ValueError("cavity needs at least 2 levels")
        if any(t <= 0 for t in self.t1) or any(t <= 0 for t in self.t2):
            raise ValueError("T1 and T2 must be positive")
        for t1q, t2q in zip(self.t1, self.t2):
            if t2q > 2 * t1q + 1e-9:
                raise ValueError(f"T2 = {t2q} exceeds 2*T1 = {2 * t1q}")

    def space(self) -> HilbertSpace:
        dims = tuple(t.levels for t in self.transmons) + (self.cavity_levels,)
        return HilbertSpace(dims, ("Q1", "Q2", "Q3", "Cavity"))

    def with_truncation(self, levels: int, cavity_levels: int) -> "DeviceConfig":
        trans = tuple(replace(t, levels=levels) for t in self.transmons)
        return replace(self, transmons=trans, cavity_levels=cavity_levels)


def parse_state_label(label, n_transmons: int = 3):
    """``"102"`` -> (1,0,2,0); ``"1020"`` includes the cavity photon number."""
    if isinstance(label, (tuple, list)):
        levels = tuple(int(x) for x in label)
    else:
        text = str(label).strip()
        if not text.isdigit():
            raise ValueError(f"malformed state label {label!r}")
        levels = tuple(int(c) for c in text)
    if len(levels) == n_transmons:
        levels = levels + (0,)
    if len(levels) != n_transmons + 1:
        raise ValueError(f"state label {label!r} must have {n_transmons} or {n_transmons + 1} digits")
    return levels


def format_state_label(levels) -> str:
    if levels[-1] == 0:
        return "".join(str(x) for x in levels[:-1])
    return "".join(str(x) for x in levels)


def calibrate_operating_point(
    transmons, targets=(6.0, 7.0, 7.85)
) -> tuple:
    """Per-qubit flux bias putting each bare 0-1 transition at its target frequency."""
    return tuple(flux_for_frequency(t, f) for t, f in zip(transmons, targets))


def default_config(path=None) -> DeviceConfig:
    """Load the bundled (or a user) JSON device file."""
    if path is None:
        from importlib.resources import files

        text = files("triqec.data").joinpath("default_device.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return config_from_dict(json.loads(text))


def config_from_dict(doc: dict) -> DeviceConfig:
    transmons = tuple(
        TransmonParams(
            ec=t["ec_ghz"], ejmax=t["ejmax_ghz"], g=t["g_ghz"], levels=t.get("levels", 4)
        )
        for t in doc["transmons"]
    )
    fm = doc.get("fluxmap", {})
    fluxmap = FluxMap(
        crosstalk=fm.get("crosstalk_phi0_per_volt", FluxMap.diagonal().crosstalk),
        offsets=fm.get("offsets_phi0", (0.0, 0.0, 0.0)),
    )
    targets = tuple(doc.get("operating_freqs_ghz", (6.0, 7.0, 7.85)))
    nominal = doc.get("nominal_flux_phi0")
    if nominal is None:
        nominal = calibrate_operating_point(transmons, targets)
    return DeviceConfig(
        cavity_freq=doc["cavity_freq_ghz"],
        cavity_levels=doc.get("cavity_levels", 2),
        transmons=transmons,
        fluxmap=fluxmap,
        t1=tuple(doc["t1_us"]),
        t2=tuple(doc["t2_us"]),
        nominal_flux=tuple(nominal),
        operating_freqs=targets,
    )


def config_to_dict(cfg: DeviceConfig) -> dict:
    return {
        "cavity_freq_ghz": cfg.cavity_freq,
        "cavity_levels": cfg.cavity_levels,
        "transmons": [
            {"ec_ghz": t.ec, "ejmax_ghz": t.ejmax, "g_ghz": t.g, "levels": t.levels}
            for t in cfg.transmons
        ],
        "fluxmap": {
            "crosstalk_phi0_per_volt": [list(r) for r in cfg.fluxmap.crosstalk],
            "offsets_phi0": list(cfg.fluxmap.offsets),
        },
        "t1_us": list(cfg.t1),
        "t2_us": list(cfg.t2),
        "operating_freqs_ghz": list(cfg.operating_freqs),
        "nominal_flux_phi0": list(cfg.nominal_flux),
    }


# ---------------------------------------------------------------------------
# Hamiltonian assembly


def _flux_key(flux) -> tuple:
    return tuple(round(float(p), 12) for p in flux)


def build_hamiltonian(cfg: DeviceConfig, flux) -> Operator:
    """Lab-frame device Hamiltonian at the given per-qubit flux (GHz)."""
    flux = np.asarray(flux, dtype=float)
    if flux.shape != (3,) or not np.all(np.isfinite(flux)):
        raise ValueError("flux must be a finite 3-vector")
    return Operator(cfg.space(), _ham_matrix(cfg, _flux_key(flux)), hermitian_flag=True)


@lru_cache(maxsize=8192)
def _ham_matrix(cfg: DeviceConfig, flux_key: tuple) -> np.ndarray:
    dims = tuple(t.levels for t in cfg.transmons) + (cfg.cavity_levels,)
    nc = cfg.cavity_levels
    a = np.diag(np.sqrt(np.arange(1, nc)), 1)
    x_cav = a + a.T
    n_cav = np.diag(np.arange(nc, dtype=float))

    def kron_all(mats):
        return reduce(np.kron, mats)

    eyes = [np.eye(d) for d in dims]
    h = cfg.cavity_freq * kron_all(eyes[:3] + [n_cav])
    for q, (params, phi) in enumerate(zip(cfg.transmons, flux_key)):
        ej = ej_of_flux(params.ejmax, phi)
        if ej <= 0:
            raise ValueError(f"flux {phi} puts EJ of Q{q + 1} at zero")
        omega, n_mat = transmon_spectrum(params, ej)
        coupling = params.g * (n_mat / n_mat[0, 1])
        parts_e = list(eyes)
        parts_e[q] = np.diag(omega)
        parts_c = list(eyes)
        parts_c[q] = coupling
        parts_c[3] = x_cav
        h = h + kron_all(parts_e) + kron_all(parts_c)
    h = 0.5 * (h + h.conj().T)
    dev = np.max(np.abs(h - h.conj().T))
    if dev > HERMITICITY_ATOL:
        raise NumericsError(f"assembled Hamiltonian not Hermitian: {dev:.3e}")
    h.flags.writeable = False
    return h


@lru_cache(maxsize=8192)
def _ham_eig(cfg: DeviceConfig, flux_key: tuple):
    evals, vecs = np.linalg.eigh(_ham_matrix(cfg, flux_key))
    evals.flags.writeable = False
    vecs.flags.writeable = False
    return evals, vecs


def hamiltonian_eig(cfg: DeviceConfig, flux):
    """Cached eigendecomposition of the device Hamiltonian at ``flux``."""
    return _ham_eig(cfg, _flux_key(flux))


def dressed_states(cfg: DeviceConfig, flux, labels):
    """Map bare product labels to dressed eigenstates at ``flux``.

    Returns ``{label: (frequency_above_ground, eigenvector)}``, assigning
    eigenvectors greedily by descending bare-state overlap so the assignment
    stays injective.  Frequencies are relative to the global ground state.
    """
    space = cfg.space()
    evals, vecs = hamiltonian_eig(cfg, flux)
    parsed = [parse_state_label(lab) for lab in labels]
    rows = [space.basis_index(lv) for lv in parsed]
    overlaps = np.abs(vecs[rows, :]) ** 2  # (n_labels, dim)
    order = np.argsort(-overlaps.max(axis=1))
    used = set()
    out = {}
    for i in order:
        weights = overlaps[i].copy()
        for u in used:
            weights[u] = -1.0
        j = int(np.argmax(weights))
        used.add(j)
        out[str(labels[i])] = (float(evals[j] - evals[0]), vecs[:, j])
    return {str(lab): out[str(lab)] for lab in labels}


def dressed_ket(cfg: DeviceConfig, flux, label):
    """Dressed eigenvector for one bare label, phase-fixed to the bare component."""
    from .core import Ket

    _, vec = dressed_states(cfg, flux, [label])[str(label)]
    idx = cfg.space().basis_index(parse_state_label(label))
    phase = vec[idx] / abs(vec[idx]) if abs(vec[idx]) > 1e-12 else 1.0
    return Ket(cfg.space(), vec / phase)


# ---------------------------------------------------------------------------
# Spectrum scans


@dataclass(frozen=True)
class LabeledSpectrum:
    """Tracked eigenfrequencies (GHz above ground) along a one-qubit flux scan."""

    cfg: DeviceConfig = field(repr=False)
    vary: int  # qubit index 1..3
    flux_axis: np.ndarray
    labels: tuple
    energies: dict  # label -> array over flux points
    ambiguous: dict  # label -> bool array (best overlap < AMBIGUOUS_OVERLAP)
    vectors: dict = field(repr=False)  # label -> (points, dim) eigenvectors

    def gap(self, branch_a: str, branch_b: str) -> np.ndarray:
        return np.abs(self.energies[str(branch_a)] - self.energies[str(branch_b)])


def _scan_flux_vector(cfg: DeviceConfig, vary: int, phi: float) -> tuple:
    base = list(cfg.nominal_flux)
    base[vary - 1] = phi
    return tuple(base)


def labeled_spectrum_scan(
    cfg: DeviceConfig,
    vary: int,
    flux_range,
    points: int,
    track,
    workers: int | None = None,
) -> LabeledSpectrum:
    """Diagonalize along a flux sweep of one qubit and track labeled branches.

    ``track`` lists bare product labels.  At the first point labels attach by
    bare-state overlap; afterwards by overlap with the previously tracked
    eigenvector, which keeps branch identity through avoided crossings.
    """
    if points < 2:
        raise ValueError("need at least 2 scan points")
    if vary not in (1, 2, 3):
        raise ValueError("vary must be a qubit index 1..3")
    labels = [str(lab) for lab in track]
    parsed = [parse_state_label(lab) for lab in labels]
    space = cfg.space()
    rows = [space.basis_index(lv) for lv in parsed]
    axis = np.linspace(flux_range[0], flux_range[1], points)

    def diag_at(phi):
        return hamiltonian_eig(cfg, _scan_flux_vector(cfg, vary, phi))

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            eigs = list(pool.map(diag_at, axis))
    else:
        eigs = [diag_at(phi) for phi in axis]

    energies = {lab: np.empty(points) for lab in labels}
    ambiguous = {lab: np.zeros(points, dtype=bool) for lab in labels}
    vectors = {lab: np.empty((points, space.dim), dtype=complex) for lab in labels}
    prev_vec = {}
    for k, (evals, vecs) in enumerate(eigs):
        if k == 0:
            overlaps = np.abs(vecs[rows, :]) ** 2
        else:
            ref = np.stack([prev_vec[lab] for lab in labels])
            overlaps = np.abs(ref.conj() @ vecs) ** 2
        order = np.argsort(-overlaps.max(axis=1))
        used = set()
        for i in order:
            weights = overlaps[i].copy()
            for u in used:
                weights[u] = -1.0
            j = int(np.argmax(weights))
            used.add(j)
            lab = labels[i]
            energies[lab][k] = evals[j] - evals[0]
            ambiguous[lab][k] = overlaps[i, j] < AMBIGUOUS_OVERLAP
            vectors[lab][k] = vecs[:, j]
            prev_vec[lab] = vecs[:, j]
    return LabeledSpectrum(
        cfg=cfg,
        vary=vary,
        flux_axis=axis,
        labels=tuple(labels),
        energies=energies,
        ambiguous=ambiguous,
        vectors=vectors,
    )


def find_avoided_crossing(spec: LabeledSpectrum, branch_a, branch_b):
    """Flux location and size of the minimum gap between two tracked branches.

    The grid minimum is refined by golden-section search between the adjacent
    grid points, re-diagonalizing and re-identifying branches by overlap with
    the tracked eigenvectors.  Raises :class:`NoCrossingError` when the gap is
    monotone over the scanned range.
    """
    a, b = str(branch_a), str(branch_b)
    for lab in (a, b):
        if lab not in spec.energies:
            raise KeyError(f"branch {lab!r} was not tracked")
    gaps = spec.gap(a, b)
    k = int(np.argmin(gaps))
    if k == 0 or k == len(gaps) - 1:
        raise NoCrossingError(
            f"gap between {a} and {b} is monotone over the scanned range "
            f"(minimum at the boundary)"
        )

    ref_a = spec.vectors[a][k]
    ref_b = spec.vectors[b][k]

    def gap_at(phi: float) -> float:
        evals, vecs = hamiltonian_eig(spec.cfg, _scan_flux_vector(spec.cfg, spec.vary, phi))
        ia = int(np.argmax(np.abs(ref_a.conj() @ vecs) ** 2))
        wb = np.abs(ref_b.conj() @ vecs) ** 2
        wb[ia] = -1.0
        ib = int(np.argmax(wb))
        return abs(evals[ia] - evals[ib])

    lo, hi = spec.flux_axis[k - 1], spec.flux_axis[k + 1]
    invphi = (np.sqrt(5) - 1) / 2
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = gap_at(x1), gap_at(x2)
    for _ in range(60):
        if hi - lo < 1e-10:
            break
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = gap_at(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = gap_at(x2)
    phi_min = 0.5 * (lo + hi)
    return float(phi_min), float(gap_at(phi_min))
