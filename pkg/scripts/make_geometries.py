"""Regenerate the bundled representative geometries in src/corroqre/data.

The structures are stand-ins with the right composition and cell; only the
cell, atom count and species enter the first-quantized estimators. Atomic
positions are idealized (no relaxation) and only affect the nuclear term of
second-quantized coefficients.
"""

from pathlib import Path

import numpy as np

from corroqre.structures import Atom, CrystalCell, serialize_geometry

OUT = Path(__file__).resolve().parents[1] / "src" / "corroqre" / "data"


def bcc_sites(n, lengths):
    a = np.asarray(lengths, float) / np.asarray(n, float)
    pts = []
    for i in range(n[0]):
        for j in range(n[1]):
            for k in range(n[2]):
                base = np.array([i, j, k], float)
                pts.append(base * a)
                pts.append((base + 0.5) * a)
    return np.array(pts), a


def alloy(counts, n, lengths, seed, oxygen=True, n_keep=None):
    rng = np.random.default_rng(seed)
    sites, a = bcc_sites(n, lengths)
    if n_keep is not None:
        sites = sites[np.sort(rng.choice(len(sites), n_keep, replace=False))]
    species = np.concatenate([[s] * c for s, c in counts])
    assert len(species) == len(sites), (len(species), len(sites))
    species = rng.permutation(species)
    atoms = [Atom(str(s), tuple(float(round(x, 6)) for x in p), 1) for s, p in zip(species, sites)]
    if oxygen:
        # octahedral interstitial at a face centre
        atoms.append(Atom("O", (float(round(0.5 * a[0], 6)), float(round(0.5 * a[1], 6)), 0.0), 1))
    return CrystalCell(tuple(lengths), tuple(atoms))


def mg_dimer():
    L = (12.7, 12.7, 19.9)
    a = L[0] / 4
    atoms = []
    for layer in range(4):
        shift = 0.0 if layer % 2 == 0 else 0.5
        z = 1.5 + 2.6 * layer
        for i in range(4):
            for j in range(4):
                atoms.append(Atom("Mg", (round((i + shift) * a, 6), round((j + shift) * a, 6), round(z, 6)), 1))
    z_o = 1.5 + 2.6 * 3 + 2.2
    for ox, oy in [(a, a), (3 * a, 3 * a)]:
        atoms.append(Atom("O", (ox, oy, round(z_o, 6)), 1))
        atoms.append(Atom("H", (round(ox + 0.757, 6), oy, round(z_o + 0.586, 6)), 1))
        atoms.append(Atom("H", (round(ox - 0.757, 6), oy, round(z_o + 0.586, 6)), 1))
    return CrystalCell(L, tuple(atoms))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    models = {
        "mg_dimer": (mg_dimer(), "representative Mg(0001)-like slab with two water molecules"),
        "nb97_hf3_ti22_zr6_o": (
            alloy([("Nb", 97), ("Hf", 3), ("Ti", 22), ("Zr", 6)], (4, 4, 4), (13.3, 13.3, 13.3), 11),
            "representative BCC 4x4x4 random alloy with one octahedral O"),
        "nb97_ta22_zr3_w6_o": (
            alloy([("Nb", 97), ("Ta", 22), ("Zr", 3), ("W", 6)], (4, 4, 4), (13.3, 13.3, 13.3), 12),
            "representative BCC 4x4x4 random alloy with one octahedral O"),
        "nb42_ti3_hf3_ta3_zr3_o": (
            alloy([("Nb", 42), ("Ti", 3), ("Hf", 3), ("Ta", 3), ("Zr", 3)], (3, 3, 3), (10.0, 10.0, 10.1), 13),
            "representative BCC 3x3x3 random alloy with one octahedral O"),
        "nb65_zr6_hf7_ti4_w3": (
            alloy([("Nb", 65), ("Zr", 6), ("Hf", 7), ("Ti", 4), ("W", 3)], (3, 3, 5), (8.6, 9.8, 14.0), 14,
                  oxygen=False, n_keep=85),
            "representative distorted BCC 3x3x5 cell with 85 of 90 sites occupied"),
    }
    for name, (cell, note) in models.items():
        (OUT / f"{name}.xyz").write_text(serialize_geometry(cell, comment=f'note="{note}"'), encoding="utf-8")
        print(name, cell.n_atoms, cell.formula())


if __name__ == "__main__":
    main()
