"""Hamiltonians for the qubit-buffer-qubit system.

Three atoms sit in a row: control qubit ``c``, buffer ``b``, target qubit
``t``.  Only buffer-qubit pairs interact: the pair state |r r'> couples with
strength B to a dipole-coupled pair |q q'> carrying an energy penalty
``delta_q`` (two-channel blockade).  The two qubit atoms share one drive;
the buffer has its own.  States with three or more atoms in the Rydberg
manifold are strongly shifted and are removed from every basis.

Each computational input of a gate evolves inside a small closed set of
states (a branch).  ``build_branch`` returns the reduced, exchange-symmetric
branch system; ``build_full_oracle`` builds the brute-force tensor-product
system used to cross-check the reduction.  All generators have the form

    H(t) = H_static + sum_k f_k(t) * H_k

with real-symmetric matrices and the channel waveforms ``f_k``, in angular
frequency units (rad/us).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .waveform import WaveformKind, WaveformSpec

TWO_PI = 2.0 * math.pi

ATOMS = ("c", "b", "t")

# Per-atom level names.  Primed levels belong to qubit atoms, unprimed to the
# buffer; q/q' is the dipole-coupled pair channel reached only jointly.
_BUFFER_RYDBERG = frozenset({"r", "q"})
_QUBIT_RYDBERG = frozenset({"r'", "q'"})
_RYDBERG = _BUFFER_RYDBERG | _QUBIT_RYDBERG
_MAX_RYDBERG_ATOMS = 2


class Scheme(enum.Enum):
    ONE_PHOTON = "one_photon"
    TWO_PHOTON = "two_photon"


class Modulation(enum.Enum):
    HYBRID = "hybrid"
    AMPLITUDE_ONLY = "amplitude_only"


class ModelError(ValueError):
    """Inconsistent drive/parameter combination."""


@dataclass(frozen=True)
class PhysicalParams:
    """Interaction strengths and static shifts, all in rad/us.

    ``blockade`` is the buffer-qubit pair coupling B, ``forster_penalty`` the
    pair-state energy defect delta_q (zero throughout the reference
    scenarios), ``qubit_shift`` the residual qubit-qubit shift delta_r on
    |r'r'>, and ``one_photon_detuning`` the intermediate-state detuning
    Delta_0 of the two-photon scheme.  ``doppler`` holds per-atom shifts
    (k.v) for atoms (c, b, t), added to Rydberg-state detunings with sign
    ``doppler_sign``.
    """

    blockade: float = TWO_PI * 50.0
    forster_penalty: float = 0.0
    qubit_shift: float = 0.0
    one_photon_detuning: float = 0.0
    doppler: tuple[float, float, float] = (0.0, 0.0, 0.0)
    doppler_sign: int = 1

    def __post_init__(self) -> None:
        if self.blockade < 0:
            raise ModelError(f"blockade must be >= 0, got {self.blockade}")
        if self.doppler_sign not in (1, -1):
            raise ModelError(f"doppler_sign must be +1 or -1, got {self.doppler_sign}")
        if len(self.doppler) != 3 or not all(math.isfinite(v) for v in self.doppler):
            raise ModelError("doppler must be three finite per-atom shifts (c, b, t)")
        object.__setattr__(self, "doppler", tuple(float(v) for v in self.doppler))

    def doppler_for(self, atom: str) -> float:
        return self.doppler[ATOMS.index(atom)] * self.doppler_sign


def apply_doppler(
    params: PhysicalParams, shifts: tuple[float, float, float], sign: int = 1
) -> PhysicalParams:
    """Params with per-atom Doppler shifts (c, b, t) and propagation sign set."""
    return replace(params, doppler=tuple(float(s) for s in shifts), doppler_sign=sign)


@dataclass(frozen=True)
class DriveSet:
    """Per-atom control channels for one transition scheme.

    One-photon drives carry {omega1, delta1} for the buffer and
    {omega2, delta2} for both qubit atoms.  Two-photon drives carry the
    lower/upper leg Rabi channels {omega1p, omega1s} / {omega2p, omega2s}
    plus two-photon detunings {delta1, delta2}; the shared intermediate-state
    detuning Delta_0 lives in :class:`PhysicalParams`.  Amplitude-only
    modulation requires constant detuning channels.
    """

    scheme: Scheme
    modulation: Modulation
    omega1: WaveformSpec | None = None
    delta1: WaveformSpec | None = None
    omega2: WaveformSpec | None = None
    delta2: WaveformSpec | None = None
    omega1p: WaveformSpec | None = None
    omega1s: WaveformSpec | None = None
    omega2p: WaveformSpec | None = None
    omega2s: WaveformSpec | None = None

    def __post_init__(self) -> None:
        required = {
            Scheme.ONE_PHOTON: ("omega1", "delta1", "omega2", "delta2"),
            Scheme.TWO_PHOTON: (
                "omega1p", "omega1s", "delta1",
                "omega2p", "omega2s", "delta2",
            ),
        }[self.scheme]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ModelError(f"{self.scheme.value} drives missing {missing}")
        extras = [
            name
            for name in (
                "omega1", "delta1", "omega2", "delta2",
                "omega1p", "omega1s", "omega2p", "omega2s",
            )
            if name not in required and getattr(self, name) is not None
        ]
        if extras:
            raise ModelError(f"{self.scheme.value} drives must not set {extras}")
        durations = {getattr(self, name).duration for name in required}
        if len(durations) != 1:
            raise ModelError(f"channel durations differ: {sorted(durations)}")
        if self.modulation is Modulation.AMPLITUDE_ONLY:
            for name in ("delta1", "delta2"):
                if getattr(self, name).kind is not WaveformKind.CONSTANT:
                    raise ModelError(
                        "amplitude-only modulation requires constant detunings, "
                        f"but {name} is time-varying"
                    )

    @property
    def duration(self) -> float:
        name = "omega1" if self.scheme is Scheme.ONE_PHOTON else "omega1p"
        return getattr(self, name).duration

    def channels(self) -> dict[str, WaveformSpec]:
        """Active channels keyed by their conventional names."""
        if self.scheme is Scheme.ONE_PHOTON:
            names = ("omega1", "delta1", "omega2", "delta2")
        else:
            names = ("omega1p", "omega1s", "delta1", "omega2p", "omega2s", "delta2")
        return {name: getattr(self, name) for name in names}


@dataclass(frozen=True, eq=False)
class BranchHamiltonian:
    """Time-dependent Hermitian generator on a labeled finite basis.

    ``generator(t) = static + sum_k terms[k][0].value(t) * terms[k][1]``.
    ``components`` maps each basis element to its expansion over full
    tensor-product states (label tuples with weights), which is how reduced
    branches are embedded back into an oracle system.
    """

    labels: tuple[str, ...]
    static: np.ndarray
    terms: tuple[tuple[WaveformSpec, np.ndarray], ...]
    initial_index: int
    duration: float
    components: tuple[tuple[tuple[tuple[str, ...], float], ...], ...]

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise ModelError("basis labels must be unique")
        if not 0 <= self.initial_index < len(self.labels):
            raise ModelError("initial_index outside basis")
        static = np.asarray(self.static, dtype=float)
        static.setflags(write=False)
        object.__setattr__(self, "static", static)
        packed = []
        for spec, mat in self.terms:
            mat = np.asarray(mat, dtype=float)
            mat.setflags(write=False)
            packed.append((spec, mat))
        object.__setattr__(self, "terms", tuple(packed))

    @property
    def dim(self) -> int:
        return len(self.labels)

    def generator(self, t: float) -> np.ndarray:
        """Hermitian matrix at time ``t`` (rad/us)."""
        h = self.static.copy()
        for spec, mat in self.terms:
            h += spec.value(t) * mat
        return h.astype(complex)

    def generator_real(self, t: float) -> np.ndarray:
        """Real-symmetric representation (all couplings in this model are real)."""
        h = self.static.copy()
        for spec, mat in self.terms:
            h += spec.value(t) * mat
        return h

    def initial_state(self) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.initial_index] = 1.0
        return psi


def hermiticity_defect(ham: BranchHamiltonian, samples: int = 64) -> float:
    """Max |H - H^dagger| entry over sampled times."""
    worst = 0.0
    for t in np.linspace(0.0, ham.duration, samples):
        h = ham.generator(t)
        worst = max(worst, float(np.max(np.abs(h - h.conj().T))))
    return worst


# ---------------------------------------------------------------------------
# per-atom drive tables


def _atom_ops(drives: DriveSet, atom: str):
    """(couplings, detunings) for one atom.

    couplings: list of (spec, level_a, level_b) with matrix element value/2.
    detunings: list of (spec, affected levels) adding value on the diagonal.
    """
    is_buffer = atom == "b"
    if drives.scheme is Scheme.ONE_PHOTON:
        if is_buffer:
            return [(drives.omega1, "1", "r")], [(drives.delta1, _BUFFER_RYDBERG)]
        return [(drives.omega2, "1", "r'")], [(drives.delta2, _QUBIT_RYDBERG)]
    if is_buffer:
        return (
            [(drives.omega1p, "1", "e"), (drives.omega1s, "e", "r")],
            [(drives.delta1, _BUFFER_RYDBERG)],
        )
    return (
        [(drives.omega2p, "1", "e'"), (drives.omega2s, "e'", "r'")],
        [(drives.delta2, _QUBIT_RYDBERG)],
    )


def _rydberg_count(state: tuple[str, ...]) -> int:
    return sum(1 for lev in state if lev in _RYDBERG)


def _state_label(state: tuple[str, ...]) -> str:
    return "|" + "".join(state) + ">"


# ---------------------------------------------------------------------------
# full tensor-product oracle


def build_full_oracle(
    occupied, drives: DriveSet, params: PhysicalParams
) -> BranchHamiltonian:
    """Brute-force product-space system for the occupied atoms.

    ``occupied`` is a subset of ``("c", "b", "t")``; every occupied atom
    starts in |1>, the rest sit in |0> and never move.  The basis is the set
    of states reachable from the initial product state through drive
    transitions and pair flips |r r'> <-> |q q'>, minus states with three
    Rydberg-manifold atoms.
    """
    atoms = _ordered_atoms(occupied)
    _validate(drives, params)
    if not atoms:
        return _trivial_branch("|000>", drives.duration)

    per_atom = [_atom_ops(drives, a) for a in atoms]
    pairs = [
        (atoms.index("b"), atoms.index(u))
        for u in ("c", "t")
        if "b" in atoms and u in atoms
    ]

    initial = tuple("1" for _ in atoms)
    states = [initial]
    index = {initial: 0}
    cursor = 0
    while cursor < len(states):
        s = states[cursor]
        cursor += 1
        for moved in _moves(s, per_atom, pairs):
            if _rydberg_count(moved) > _MAX_RYDBERG_ATOMS:
                continue
            if moved not in index:
                index[moved] = len(states)
                states.append(moved)

    dim = len(states)
    static = np.zeros((dim, dim))
    term_map: dict[WaveformSpec, np.ndarray] = {}

    def term(spec: WaveformSpec) -> np.ndarray:
        if spec not in term_map:
            term_map[spec] = np.zeros((dim, dim))
        return term_map[spec]

    for i, s in enumerate(states):
        # diagonal: detunings, intermediate-state Delta_0, Doppler, shifts
        for k, atom in enumerate(atoms):
            for spec, levels in per_atom[k][1]:
                if s[k] in levels:
                    term(spec)[i, i] += 1.0
            if s[k] in ("e", "e'"):
                static[i, i] += params.one_photon_detuning
            if s[k] in _RYDBERG:
                static[i, i] += params.doppler_for(atom)
        for bi, qi in pairs:
            if s[bi] == "q" and s[qi] == "q'":
                static[i, i] += params.forster_penalty
        if _both_qubits_in_r(s, atoms):
            static[i, i] += params.qubit_shift
        # couplings
        for k in range(len(atoms)):
            for spec, la, lb in per_atom[k][0]:
                if s[k] == la:
                    j = index.get(s[:k] + (lb,) + s[k + 1 :])
                    if j is not None and j > i:
                        term(spec)[i, j] += 0.5
                        term(spec)[j, i] += 0.5
        for bi, qi in pairs:
            if s[bi] == "r" and s[qi] == "r'":
                flipped = list(s)
                flipped[bi], flipped[qi] = "q", "q'"
                j = index.get(tuple(flipped))
                if j is not None:
                    static[i, j] += params.blockade
                    static[j, i] += params.blockade

    return BranchHamiltonian(
        labels=tuple(_state_label(s) for s in states),
        static=static,
        terms=tuple(term_map.items()),
        initial_index=0,
        duration=drives.duration,
        components=tuple(((s, 1.0),) for s in states),
    )


def _ordered_atoms(occupied) -> tuple[str, ...]:
    occ = set(occupied)
    unknown = occ - set(ATOMS)
    if unknown:
        raise ModelError(f"unknown atoms {sorted(unknown)}")
    if occ == {"b", "c"} or occ == {"b", "t"}:
        # buffer-qubit pair systems are written buffer-first, as |x_b y_u>
        return ("b", "c") if "c" in occ else ("b", "t")
    return tuple(a for a in ATOMS if a in occ)


def _moves(state, per_atom, pairs):
    for k in range(len(state)):
        for spec, la, lb in per_atom[k][0]:
            if state[k] == la:
                yield state[:k] + (lb,) + state[k + 1 :]
            elif state[k] == lb:
                yield state[:k] + (la,) + state[k + 1 :]
    for bi, qi in pairs:
        if state[bi] == "r" and state[qi] == "r'":
            s = list(state)
            s[bi], s[qi] = "q", "q'"
            yield tuple(s)
        elif state[bi] == "q" and state[qi] == "q'":
            s = list(state)
            s[bi], s[qi] = "r", "r'"
            yield tuple(s)


def _both_qubits_in_r(state, atoms) -> bool:
    qubit_levels = [state[k] for k, a in enumerate(atoms) if a in ("c", "t")]
    return len(qubit_levels) == 2 and all(lev == "r'" for lev in qubit_levels)


def _trivial_branch(label: str, duration: float) -> BranchHamiltonian:
    return BranchHamiltonian(
        labels=(label,),
        static=np.zeros((1, 1)),
        terms=(),
        initial_index=0,
        duration=duration,
        components=((((), 1.0),),),
    )


def _validate(drives: DriveSet, params: PhysicalParams) -> None:
    if drives.scheme is Scheme.TWO_PHOTON and params.one_photon_detuning == 0.0:
        raise ModelError("two-photon scheme requires a nonzero one_photon_detuning")


# ---------------------------------------------------------------------------
# reduced branches


def build_branch(
    branch: str, drives: DriveSet, params: PhysicalParams
) -> BranchHamiltonian:
    """Reduced branch system for one computational input.

    ``branch`` is a two-bit string for a CZ task (buffer implicitly in |1>,
    so ``"xy"`` means the three-body input ``x1y``) or a three-bit string
    (c, b, t) for a CCZ task.  Branches engaging both qubit atoms use the
    exchange-symmetric reduction, which requires equal control/target
    Doppler shifts.
    """
    bits = _branch_bits(branch)
    occupied = tuple(a for a, bit in zip(ATOMS, bits) if bit == "1")
    if occupied == ("c", "b", "t"):
        _require_symmetric_doppler(params)
        if drives.scheme is Scheme.ONE_PHOTON:
            return _three_body_one_photon(drives, params)
        return symmetric_reduction(build_full_oracle(occupied, drives, params))
    return build_full_oracle(occupied, drives, params)


def _branch_bits(branch: str) -> str:
    if not isinstance(branch, str) or set(branch) - {"0", "1"}:
        raise ModelError(f"branch must be a bit string, got {branch!r}")
    if len(branch) == 2:
        return branch[0] + "1" + branch[1]
    if len(branch) == 3:
        return branch
    raise ModelError(f"branch must have 2 or 3 bits, got {branch!r}")


def _require_symmetric_doppler(params: PhysicalParams) -> None:
    if params.doppler[0] != params.doppler[2]:
        raise ModelError(
            "exchange-symmetric reduction needs equal Doppler shifts on the "
            "control and target atoms; use build_full_oracle for asymmetric shifts"
        )


def _three_body_one_photon(
    drives: DriveSet, params: PhysicalParams
) -> BranchHamiltonian:
    """The seven-state |111> branch of the one-photon scheme.

    The two identically driven qubit atoms are folded into symmetric and
    antisymmetric combinations; couplings out of the symmetric
    single-excitation state gain a sqrt(2) enhancement.  The antisymmetric
    combination shares the basis but never couples to the initial state.
    """
    kv_q = params.doppler_for("c")
    kv_b = params.doppler_for("b")
    labels = (
        "|111>",
        "sym(|r'11>)",
        "|1r1>",
        "|r'1r'>",
        "sym(|r'r1>)",
        "sym(|q'q1>)",
        "asym(|r'11>)",
    )
    s2h = math.sqrt(2.0) / 2.0
    omega1 = np.zeros((7, 7))
    omega1[0, 2] = omega1[2, 0] = 0.5
    omega1[1, 4] = omega1[4, 1] = 0.5
    omega2 = np.zeros((7, 7))
    omega2[0, 1] = omega2[1, 0] = s2h
    omega2[1, 3] = omega2[3, 1] = s2h
    omega2[2, 4] = omega2[4, 2] = s2h
    delta1 = np.diag([0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0])
    delta2 = np.diag([0.0, 1.0, 0.0, 2.0, 1.0, 1.0, 1.0])
    static = np.zeros((7, 7))
    static[4, 5] = static[5, 4] = params.blockade
    static[5, 5] += params.forster_penalty
    static[3, 3] += params.qubit_shift
    static += np.diag(
        [
            0.0,
            kv_q,
            kv_b,
            2.0 * kv_q,
            kv_q + kv_b,
            kv_q + kv_b,
            kv_q,
        ]
    )
    inv = 1.0 / math.sqrt(2.0)
    comp = (
        ((("1", "1", "1"), 1.0),),
        ((("r'", "1", "1"), inv), (("1", "1", "r'"), inv)),
        ((("1", "r", "1"), 1.0),),
        ((("r'", "1", "r'"), 1.0),),
        ((("r'", "r", "1"), inv), (("1", "r", "r'"), inv)),
        ((("q'", "q", "1"), inv), (("1", "q", "q'"), inv)),
        ((("r'", "1", "1"), inv), (("1", "1", "r'"), -inv)),
    )
    return BranchHamiltonian(
        labels=labels,
        static=static,
        terms=(
            (drives.omega1, omega1),
            (drives.omega2, omega2),
            (drives.delta1, delta1),
            (drives.delta2, delta2),
        ),
        initial_index=0,
        duration=drives.duration,
        components=comp,
    )


def symmetric_reduction(oracle: BranchHamiltonian) -> BranchHamiltonian:
    """Project a three-atom oracle onto its qubit-exchange-symmetric sector.

    Valid when the two qubit atoms carry identical drives and Doppler
    shifts, which makes the generator commute with the control/target swap;
    the symmetric sector is then invariant and contains the |111> input.
    """
    states = [comp[0][0] for comp in oracle.components]
    if any(len(s) != 3 for s in states):
        raise ModelError("symmetric_reduction expects a three-atom oracle")
    index = {s: i for i, s in enumerate(states)}

    columns = []
    comp = []
    labels = []
    seen = set()
    inv = 1.0 / math.sqrt(2.0)
    for i, s in enumerate(states):
        if i in seen:
            continue
        mirrored = (s[2], s[1], s[0])
        j = index[mirrored]
        col = np.zeros(len(states))
        if j == i:
            col[i] = 1.0
            labels.append(_state_label(s))
            comp.append(((s, 1.0),))
            seen.add(i)
        else:
            col[i] = inv
            col[j] = inv
            labels.append("sym(" + _state_label(s) + ")")
            comp.append(((s, inv), (mirrored, inv)))
            seen.add(i)
            seen.add(j)
        columns.append(col)

    basis = np.column_stack(columns)
    static = basis.T @ oracle.static @ basis
    terms = tuple((spec, basis.T @ mat @ basis) for spec, mat in oracle.terms)
    return BranchHamiltonian(
        labels=tuple(labels),
        static=static,
        terms=terms,
        initial_index=0,
        duration=oracle.duration,
        components=tuple(comp),
    )


def embed_state(
    reduced: BranchHamiltonian, oracle: BranchHamiltonian, psi: np.ndarray
) -> np.ndarray:
    """Expand a reduced-branch state vector in the oracle's product basis."""
    index = {comp[0][0]: i for i, comp in enumerate(oracle.components)}
    out = np.zeros(oracle.dim, dtype=complex)
    for amplitude, parts in zip(psi, reduced.components):
        for state, weight in parts:
            try:
                out[index[state]] += weight * amplitude
            except KeyError:
                raise ModelError(
                    f"reduced component {state} absent from oracle basis"
                ) from None
    return out


# ---------------------------------------------------------------------------
# direct two-atom baseline (no buffer)


def build_two_body_branch(
    branch: str, drives: DriveSet, params: PhysicalParams
) -> BranchHamiltonian:
    """Branch system for two directly blockaded qubit atoms.

    Homogeneous driving with the qubit channel of ``drives`` (one-photon
    only).  The |11> branch reduces to the symmetric ladder
    {|11>, sym(|r1>), |rr>, |qq>} with sqrt(2)-enhanced couplings.
    """
    if drives.scheme is not Scheme.ONE_PHOTON:
        raise ModelError("two-body baseline supports the one-photon scheme only")
    if branch not in ("00", "01", "10", "11"):
        raise ModelError(f"two-body branch must be 2 bits, got {branch!r}")
    if branch == "00":
        return _trivial_branch("|00>", drives.duration)
    if branch in ("01", "10"):
        omega = np.array([[0.0, 0.5], [0.5, 0.0]])
        delta = np.diag([0.0, 1.0])
        return BranchHamiltonian(
            labels=("|1>", "|r>"),
            static=np.zeros((2, 2)),
            terms=((drives.omega2, omega), (drives.delta2, delta)),
            initial_index=0,
            duration=drives.duration,
            components=(((("1",), 1.0),), ((("r",), 1.0),)),
        )
    s2h = math.sqrt(2.0) / 2.0
    omega = np.zeros((4, 4))
    omega[0, 1] = omega[1, 0] = s2h
    omega[1, 2] = omega[2, 1] = s2h
    delta = np.diag([0.0, 1.0, 2.0, 2.0])
    static = np.zeros((4, 4))
    static[2, 3] = static[3, 2] = params.blockade
    static[3, 3] += params.forster_penalty
    inv = 1.0 / math.sqrt(2.0)
    comp = (
        ((("1", "1"), 1.0),),
        ((("r", "1"), inv), (("1", "r"), inv)),
        ((("r", "r"), 1.0),),
        ((("q", "q"), 1.0),),
    )
    return BranchHamiltonian(
        labels=("|11>", "sym(|r1>)", "|rr>", "|qq>"),
        static=static,
        terms=((drives.omega2, omega), (drives.delta2, delta)),
        initial_index=0,
        duration=drives.duration,
        components=comp,
    )
