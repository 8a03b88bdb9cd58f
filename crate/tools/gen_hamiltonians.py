#!/usr/bin/env python3
"""Generate the molecular Hamiltonian fixtures shipped under fixtures/.

Self-contained restricted Hartree-Fock over STO-nG s-type Gaussians, followed
by a Jordan-Wigner mapping of the second-quantized Hamiltonian to Pauli terms.
Only hydrogen chains/clusters are supported (s functions only), which is all
the fixtures need.

Conventions baked into the emitted files (and relied on by the test suite):
  * spin-orbital ordering: interleaved (MO m, spin up) -> 2m, (MO m, down) -> 2m+1,
    then qubit indices are REVERSED (q -> n-1-q) so that the Hartree-Fock
    occupied spin-orbitals sit at the highest qubit indices.  With bitstrings
    read left-to-right as qubit 0..n-1, the HF reference of H2 is "0011" and
    of H4 (4 electrons, 3 active orbitals) is "001111".
  * Jordan-Wigner phase convention: annihilation(p) = Z_0..Z_{p-1} (X_p + i Y_p)/2
    applied in the ordering BEFORE the reversal.
  * coefficients are printed with repr(), i.e. shortest round-trip decimal.

Run from the repository root:  python3 tools/gen_hamiltonians.py
Requires numpy + scipy only.
"""

import itertools
import os
import sys

import numpy as np
from scipy.special import erf

ANGSTROM_TO_BOHR = 1.8897259886
COEFF_FLOOR = 1e-12

# STO-nG expansions of the hydrogen 1s orbital (exponent, contraction), from
# the standard basis-set tables.
STO_3G_H = [
    (3.42525091, 0.15432897),
    (0.62391373, 0.53532814),
    (0.16885540, 0.44463454),
]
STO_6G_H = [
    (35.52322122, 0.00916359628),
    (6.513143725, 0.04936149294),
    (1.822142904, 0.16853830490),
    (0.625955266, 0.37056279970),
    (0.243076747, 0.41649152980),
    (0.100112428, 0.13033408410),
]


def boys0(x):
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    mask = x > 1e-12
    xm = x[mask]
    out[mask] = 0.5 * np.sqrt(np.pi / xm) * erf(np.sqrt(xm))
    return out if out.shape else float(out)


def gauss_norm(alpha):
    return (2.0 * alpha / np.pi) ** 0.75


class Basis:
    """Contracted s-type Gaussians centred on the atoms."""

    def __init__(self, centers_bohr, primitives):
        self.centers = [np.asarray(c, dtype=float) for c in centers_bohr]
        self.prims = [(a, c * gauss_norm(a)) for a, c in primitives]
        self.n = len(self.centers)

    def pairs(self, i, j):
        A, B = self.centers[i], self.centers[j]
        ab2 = float(np.dot(A - B, A - B))
        for a, ca in self.prims:
            for b, cb in self.prims:
                p = a + b
                pref = ca * cb * np.exp(-a * b / p * ab2)
                center = (a * A + b * B) / p
                yield a, b, p, pref, center, ab2


def one_electron_integrals(basis, charges_positions):
    n = basis.n
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            s = t = v = 0.0
            for a, b, p, pref, P, ab2 in basis.pairs(i, j):
                base = pref * (np.pi / p) ** 1.5
                s += base
                t += base * (a * b / p) * (3.0 - 2.0 * a * b / p * ab2)
                for Z, C in charges_positions:
                    pc2 = float(np.dot(P - C, P - C))
                    v += -Z * pref * 2.0 * np.pi / p * boys0(p * pc2)
            S[i, j], T[i, j], V[i, j] = s, t, v
    return S, T, V


def two_electron_integrals(basis):
    """Chemist-notation (ij|kl) over contracted AOs."""
    n = basis.n
    eri = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(n):
            bra = list(basis.pairs(i, j))
            for k in range(n):
                for l in range(n):
                    ket = list(basis.pairs(k, l))
                    val = 0.0
                    for a, b, p, pref1, P, _ in bra:
                        for c, d, q, pref2, Q, _ in ket:
                            pq2 = float(np.dot(P - Q, P - Q))
                            val += (
                                pref1
                                * pref2
                                * 2.0
                                * np.pi ** 2.5
                                / (p * q * np.sqrt(p + q))
                                * boys0(p * q / (p + q) * pq2)
                            )
                    eri[i, j, k, l] = val
    return eri


def nuclear_repulsion(charges_positions):
    e = 0.0
    for (Z1, R1), (Z2, R2) in itertools.combinations(charges_positions, 2):
        e += Z1 * Z2 / np.linalg.norm(R1 - R2)
    return e


def rhf(S, Hcore, eri, n_electrons, max_cycles=500, tol=1e-12):
    n_occ = n_electrons // 2
    evals, evecs = np.linalg.eigh(S)
    X = evecs @ np.diag(evals ** -0.5) @ evecs.T
    F = Hcore.copy()
    D = None
    energy = 0.0
    for cycle in range(max_cycles):
        Fp = X.T @ F @ X
        _, Cp = np.linalg.eigh(Fp)
        C = X @ Cp
        Cocc = C[:, :n_occ]
        D_new = 2.0 * Cocc @ Cocc.T
        if D is not None:
            D_new = 0.5 * (D_new + D)  # damping, plenty for these systems
        D = D_new
        J = np.einsum("pqrs,rs->pq", eri, D)
        K = np.einsum("prqs,rs->pq", eri, D)
        F = Hcore + J - 0.5 * K
        e_new = 0.5 * np.sum(D * (Hcore + F))
        if abs(e_new - energy) < tol and cycle > 3:
            energy = e_new
            break
        energy = e_new
    return energy, C


def mo_integrals(Hcore, eri, C):
    h_mo = C.T @ Hcore @ C
    eri_mo = np.einsum("pi,qj,rk,sl,pqrs->ijkl", C, C, C, C, eri, optimize=True)
    return h_mo, eri_mo


# ---------------------------------------------------------------------------
# Jordan-Wigner over symbolic Pauli strings


PAULI_MUL = {}
for _a, _b, _c, _ph in [
    ("I", "I", "I", 1), ("I", "X", "X", 1), ("I", "Y", "Y", 1), ("I", "Z", "Z", 1),
    ("X", "I", "X", 1), ("Y", "I", "Y", 1), ("Z", "I", "Z", 1),
    ("X", "X", "I", 1), ("Y", "Y", "I", 1), ("Z", "Z", "I", 1),
    ("X", "Y", "Z", 1j), ("Y", "X", "Z", -1j),
    ("Y", "Z", "X", 1j), ("Z", "Y", "X", -1j),
    ("Z", "X", "Y", 1j), ("X", "Z", "Y", -1j),
]:
    PAULI_MUL[(_a, _b)] = (_c, _ph)


def poly_mul(a, b):
    out = {}
    for sa, ca in a.items():
        for sb, cb in b.items():
            phase = 1.0 + 0.0j
            ops = []
            for qa, qb in zip(sa, sb):
                op, ph = PAULI_MUL[(qa, qb)]
                ops.append(op)
                phase *= ph
            key = tuple(ops)
            out[key] = out.get(key, 0.0) + ca * cb * phase
    return {k: v for k, v in out.items() if abs(v) > 1e-16}


def poly_add(dst, src, scale=1.0):
    for k, v in src.items():
        dst[k] = dst.get(k, 0.0) + scale * v


def jw_op(p, n, dagger):
    zs = ["Z"] * p
    x = tuple(zs + ["X"] + ["I"] * (n - p - 1))
    y = tuple(zs + ["Y"] + ["I"] * (n - p - 1))
    sign = -0.5j if dagger else 0.5j
    return {x: 0.5, y: sign}


def jw_hamiltonian(constant, h1, h2, n_so):
    """h1[p,q] a+_p a_q  +  0.5 h2[p,q,r,s] a+_p a+_q a_s a_r  + constant."""
    ham = {tuple(["I"] * n_so): complex(constant)}
    for p in range(n_so):
        for q in range(n_so):
            if abs(h1[p, q]) < 1e-14:
                continue
            term = poly_mul(jw_op(p, n_so, True), jw_op(q, n_so, False))
            poly_add(ham, term, h1[p, q])
    for p in range(n_so):
        for q in range(n_so):
            for r in range(n_so):
                for s in range(n_so):
                    coeff = 0.5 * h2[p, q, r, s]
                    if abs(coeff) < 1e-14:
                        continue
                    term = poly_mul(
                        poly_mul(jw_op(p, n_so, True), jw_op(q, n_so, True)),
                        poly_mul(jw_op(s, n_so, False), jw_op(r, n_so, False)),
                    )
                    poly_add(ham, term, coeff)
    pruned = {}
    for k, v in ham.items():
        if abs(v.imag) > 1e-10:
            raise RuntimeError(f"non-Hermitian JW output: {k} -> {v}")
        if abs(v.real) > COEFF_FLOOR:
            pruned[k] = v.real
    return pruned


def spin_orbital_integrals(h_mo, eri_mo, n_orb):
    """Interleaved spin ordering, physicist two-body tensor <pq|rs>."""
    n_so = 2 * n_orb
    h1 = np.zeros((n_so, n_so))
    h2 = np.zeros((n_so, n_so, n_so, n_so))
    for p in range(n_so):
        for q in range(n_so):
            if p % 2 == q % 2:
                h1[p, q] = h_mo[p // 2, q // 2]
    for p in range(n_so):
        for q in range(n_so):
            for r in range(n_so):
                for s in range(n_so):
                    if p % 2 == r % 2 and q % 2 == s % 2:
                        h2[p, q, r, s] = eri_mo[p // 2, r // 2, q // 2, s // 2]
    return h1, h2


def reverse_qubits(ham, n):
    return {tuple(reversed(k)): v for k, v in ham.items()}


# ---------------------------------------------------------------------------
# Dense cross-checks

PAULI_MAT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_from_pauli(ham, n):
    """Qubit q is the q-th least significant bit of the basis index."""
    dim = 2 ** n
    H = np.zeros((dim, dim), dtype=complex)
    for ops, c in ham.items():
        m = np.eye(1, dtype=complex)
        # kron builds most-significant first, so iterate qubits in reverse
        for q in reversed(range(n)):
            m = np.kron(m, PAULI_MAT[ops[q]])
        H += c * m
    return H


def hf_index(occupied_qubits):
    return sum(1 << q for q in occupied_qubits)


def check_fixture(name, ham, n, occupied_qubits, e_scf, n_electrons):
    H = dense_from_pauli(ham, n)
    assert np.max(np.abs(H - H.conj().T)) < 1e-10, "dense not Hermitian"
    idx = hf_index(occupied_qubits)
    e_hf = H[idx, idx].real
    assert abs(e_hf - e_scf) < 1e-9, f"{name}: <HF|H|HF> {e_hf} != SCF {e_scf}"
    evals = np.linalg.eigvalsh(H)
    sector = [i for i in range(2 ** n) if bin(i).count("1") == n_electrons]
    Hs = H[np.ix_(sector, sector)]
    evals_sector = np.linalg.eigvalsh(Hs)
    print(
        f"{name}: {len(ham)} terms, E_HF={e_scf:.8f}, "
        f"E0(full)={evals[0]:.8f}, E0({n_electrons}e sector)={evals_sector[0]:.8f}, "
        f"sector dim {len(sector)}"
    )
    return evals_sector


def format_term(ops):
    toks = [f"{op}{q}" for q, op in enumerate(ops) if op != "I"]
    return " ".join(toks)


def write_fixture(path, ham, n, metadata):
    lines = ["# Pauli-term Hamiltonian fixture; grammar documented in fixtures/README.md"]
    for k, v in metadata.items():
        lines.append(f"{k} = {v}")
    lines.append("terms:")
    def sort_key(item):
        ops, _ = item
        return (sum(1 for o in ops if o != "I"), format_term(ops))
    for ops, c in sorted(ham.items(), key=sort_key):
        lines.append(f"{repr(float(c))}, {format_term(ops)}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    print(f"  wrote {path}")


def h2_fixture(bond_angstrom, out_dir):
    r = bond_angstrom * ANGSTROM_TO_BOHR
    centers = [np.zeros(3), np.array([0.0, 0.0, r])]
    charges = [(1.0, c) for c in centers]
    basis = Basis(centers, STO_3G_H)
    S, T, V = one_electron_integrals(basis, charges)
    eri = two_electron_integrals(basis)
    e_nuc = nuclear_repulsion(charges)
    e_elec, C = rhf(S, T + V, eri, 2)
    h_mo, eri_mo = mo_integrals(T + V, eri, C)
    h1, h2 = spin_orbital_integrals(h_mo, eri_mo, 2)
    ham = jw_hamiltonian(e_nuc, h1, h2, 4)
    ham = reverse_qubits(ham, 4)
    e_scf = e_elec + e_nuc
    check_fixture(f"H2 @ {bond_angstrom:.3f} A", ham, 4, [2, 3], e_scf, 2)
    write_fixture(
        os.path.join(out_dir, f"h2_sto3g_{bond_angstrom:.2f}.ham"),
        ham,
        4,
        {
            "molecule": "H2",
            "basis": "sto-3g",
            "bond_length": f"{bond_angstrom:.4f}",
            "n_qubits": 4,
            "n_electrons": 2,
            "hf_reference": "0011",
            "jw_note": (
                "qubit q = reversed interleaved spin-orbital (3-q); "
                "occupied spin-orbitals at the highest qubit indices; "
                "bitstrings read left-to-right as qubit 0..n-1"
            ),
        },
    )


def h4_fixture_frozen_core(out_dir, geom_a, tag):
    """Variant: freeze the lowest RHF orbital (2 electrons), keep MOs 1..3."""
    centers = [np.array([x, y, 0.0]) * ANGSTROM_TO_BOHR for x, y in geom_a]
    charges = [(1.0, c) for c in centers]
    basis = Basis(centers, STO_6G_H)
    S, T, V = one_electron_integrals(basis, charges)
    eri = two_electron_integrals(basis)
    e_nuc = nuclear_repulsion(charges)
    e_elec, C = rhf(S, T + V, eri, 4)
    h_mo, eri_mo = mo_integrals(T + V, eri, C)
    # frozen-core folding for core orbital 0
    e_core = 2.0 * h_mo[0, 0] + eri_mo[0, 0, 0, 0]
    act = [1, 2, 3]
    n_act = len(act)
    h_eff = np.zeros((n_act, n_act))
    for i, p in enumerate(act):
        for j, q in enumerate(act):
            h_eff[i, j] = h_mo[p, q] + 2.0 * eri_mo[p, q, 0, 0] - eri_mo[p, 0, 0, q]
    eri_act = eri_mo[np.ix_(act, act, act, act)]
    h1, h2 = spin_orbital_integrals(h_eff, eri_act, n_act)
    ham = jw_hamiltonian(e_nuc + e_core, h1, h2, 6)
    ham = reverse_qubits(ham, 6)
    e_scf = e_elec + e_nuc
    check_fixture(f"H4 frozen-core {tag}", ham, 6, [4, 5], e_scf, 2)
    write_fixture(
        os.path.join(out_dir, f"h4_sto6g_frozen_{tag}.ham"),
        ham,
        6,
        {
            "molecule": "H4",
            "basis": "sto-6g",
            "geometry": f"trapezoid {geom_a} Angstrom",
            "active_space": "2 electrons in RHF orbitals 1-3 (orbital 0 frozen)",
            "n_qubits": 6,
            "n_electrons": 2,
            "hf_reference": "000011",
            "jw_note": (
                "qubit q = reversed interleaved active spin-orbital (5-q); "
                "occupied spin-orbitals at the highest qubit indices; "
                "bitstrings read left-to-right as qubit 0..n-1"
            ),
        },
    )


def h4_fixture(out_dir):
    # Irregular trapezoid in the xy plane (Angstrom): the two horizontal sides
    # are parallel but the mirror symmetry is broken, so no molecular-orbital
    # integrals vanish by symmetry and the full JW term count survives.
    geom_a = [
        (-1.00, 0.00),
        (1.00, 0.00),
        (-0.30, 0.90),
        (0.55, 0.90),
    ]
    centers = [np.array([x, y, 0.0]) * ANGSTROM_TO_BOHR for x, y in geom_a]
    charges = [(1.0, c) for c in centers]
    basis = Basis(centers, STO_6G_H)
    S, T, V = one_electron_integrals(basis, charges)
    eri = two_electron_integrals(basis)
    e_nuc = nuclear_repulsion(charges)
    e_elec, C = rhf(S, T + V, eri, 4)
    h_mo, eri_mo = mo_integrals(T + V, eri, C)
    # Active space: 4 electrons in the 3 lowest MOs (the top virtual is dropped).
    n_act = 3
    h_act = h_mo[:n_act, :n_act]
    eri_act = eri_mo[:n_act, :n_act, :n_act, :n_act]
    h1, h2 = spin_orbital_integrals(h_act, eri_act, n_act)
    ham = jw_hamiltonian(e_nuc, h1, h2, 6)
    ham = reverse_qubits(ham, 6)
    e_scf = e_elec + e_nuc
    check_fixture("H4 trapezoid", ham, 6, [2, 3, 4, 5], e_scf, 4)
    write_fixture(
        os.path.join(out_dir, "h4_sto6g_trapezoid.ham"),
        ham,
        6,
        {
            "molecule": "H4",
            "basis": "sto-6g",
            "geometry": "trapezoid (-1,0),(1,0),(-0.3,0.9),(0.55,0.9) Angstrom",
            "active_space": "4 electrons in 3 lowest RHF orbitals",
            "n_qubits": 6,
            "n_electrons": 4,
            "hf_reference": "001111",
            "jw_note": (
                "qubit q = reversed interleaved active spin-orbital (5-q); "
                "occupied spin-orbitals at the highest qubit indices; "
                "bitstrings read left-to-right as qubit 0..n-1"
            ),
        },
    )


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "fixtures"
    os.makedirs(out_dir, exist_ok=True)
    for bond in [0.50, 0.60, 0.70, 0.80, 0.90, 1.00, 1.20, 1.50, 2.00, 2.50]:
        h2_fixture(bond, out_dir)
    h4_fixture(out_dir)
    if os.environ.get("H4_VARIANTS"):
        h4_fixture_frozen_core(out_dir, [(-1.00, 0.00), (1.00, 0.00), (-0.30, 0.90), (0.55, 0.90)], "a")


if __name__ == "__main__":
    main()
