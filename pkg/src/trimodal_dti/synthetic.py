"""Deterministic synthetic dataset generation.

Writes a complete raw-data tree (interaction table, per-drug SDF
conformers, per-protein PDB structures, pocket JSON files) built from a
fixed list of parseable SMILES and seeded random protein chains. Labels
follow a simple composition rule — drugs rich in nitrogen/oxygen paired
with charged-residue-rich proteins interact — so a model with working
featurization can fit them quickly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import chem
from .ingest import AMINO_ACIDS

DRUG_SMILES = [
    "CCO", "CCN", "CCC", "CC(C)O", "CC(C)N", "CCCC", "CC(=O)O", "CC(=O)N",
    "CCOC(=O)C", "CCNC(=O)C", "c1ccccc1", "Cc1ccccc1", "Oc1ccccc1",
    "Nc1ccccc1", "Clc1ccccc1", "c1ccncc1", "Cc1ccncc1", "CC(=O)Oc1ccccc1C(=O)O",
    "CN1CCCC1", "C1CCNCC1", "C1CCOCC1", "O=C(O)CCC(=O)O", "NCCO", "OCCO",
    "NCCN", "CC(N)C(=O)O", "CSCC", "CC(C)(C)O", "FC(F)F", "CC(Cl)C",
    "N#CC", "CC#N", "OC(=O)c1ccccc1", "NC(=O)c1ccccc1", "COc1ccccc1",
    "CNc1ccccc1", "CCc1ccc(O)cc1", "CCc1ccc(N)cc1", "OCc1ccncc1", "NCc1ccccn1",
]

CHARGED_RESIDUES = set("KRDE")
POLAR_ATOMS = {"N", "O"}

BOND_LENGTH = 1.5
CA_STEP = 3.8


def synthetic_conformer(mol: chem.Molecule, rng: np.random.Generator) -> np.ndarray:
    """Place heavy atoms with breadth-first chain growth: every bonded pair
    sits ~1.5 apart and non-bonded atoms are pushed apart."""
    n = mol.num_atoms
    coords = np.zeros((n, 3))
    placed = [False] * n
    neighbors = [[] for _ in range(n)]
    for i, j, _ in mol.bonds:
        neighbors[i].append(j)
        neighbors[j].append(i)

    def place(idx, origin):
        queue = [idx]
        coords[idx] = origin
        placed[idx] = True
        while queue:
            current = queue.pop(0)
            for nb in neighbors[current]:
                if placed[nb]:
                    continue
                for _ in range(30):
                    direction = rng.normal(size=3)
                    direction /= np.linalg.norm(direction)
                    candidate = coords[current] + direction * BOND_LENGTH
                    others = coords[[k for k in range(n) if placed[k] and k != current]]
                    if others.size == 0 or np.linalg.norm(others - candidate, axis=1).min() > 0.9:
                        break
                coords[nb] = candidate
                placed[nb] = True
                queue.append(nb)

    component = 0
    for idx in range(n):
        if not placed[idx]:
            place(idx, np.array([8.0 * component, 0.0, 0.0]))
            component += 1
    return coords.round(4)


def molblock(mol: chem.Molecule, coords: np.ndarray, title: str = "synthetic") -> str:
    lines = ["", f"  {title}", ""]
    lines.append(f"{mol.num_atoms:3d}{len(mol.bonds):3d}  0  0  0  0  0  0  0  0999 V2000")
    for atom, (x, y, z) in zip(mol.atoms, coords):
        lines.append(f"{x:10.4f}{y:10.4f}{z:10.4f} {atom.symbol:<3s} 0  0")
    for i, j, _ in mol.bonds:
        lines.append(f"{i + 1:3d}{j + 1:3d}  1  0")
    lines.append("M  END")
    return "\n".join(lines) + "\n"


ONE_TO_THREE = {
    "A": "ALA", "R": "ARG", "N": "ASN", "D": "ASP", "C": "CYS", "Q": "GLN",
    "E": "GLU", "G": "GLY", "H": "HIS", "I": "ILE", "L": "LEU", "K": "LYS",
    "M": "MET", "F": "PHE", "P": "PRO", "S": "SER", "T": "THR", "W": "TRP",
    "Y": "TYR", "V": "VAL",
}

# backbone offsets relative to each residue's CA
BACKBONE = (("N", np.array([-1.2, 0.6, 0.0]), "N"),
            ("CA", np.array([0.0, 0.0, 0.0]), "C"),
            ("C", np.array([1.1, 0.7, 0.0]), "C"),
            ("O", np.array([1.3, 1.9, 0.2]), "O"))


def synthetic_pdb(sequence: str, rng: np.random.Generator) -> str:
    """Backbone-only PDB text: a self-avoiding-ish CA walk with N/C/O atoms
    placed at fixed offsets."""
    ca = np.zeros((len(sequence), 3))
    direction = np.array([1.0, 0.0, 0.0])
    for k in range(1, len(sequence)):
        turn = rng.normal(scale=0.5, size=3)
        direction = direction + turn
        direction /= np.linalg.norm(direction)
        ca[k] = ca[k - 1] + direction * CA_STEP
    lines = []
    serial = 1
    for k, aa in enumerate(sequence):
        res = ONE_TO_THREE.get(aa, "UNK")
        for name, offset, element in BACKBONE:
            x, y, z = (ca[k] + offset).round(3)
            lines.append(
                f"ATOM  {serial:5d}  {name:<3s} {res} A{k + 1:4d}    "
                f"{x:8.3f}{y:8.3f}{z:8.3f}  1.00  0.00          {element:>2s}")
            serial += 1
    lines.append("END")
    return "\n".join(lines) + "\n"


def _drug_polarity(smiles: str) -> float:
    mol = chem.parse_smiles(smiles)
    polar = sum(1 for a in mol.atoms if a.symbol in POLAR_ATOMS)
    return polar / mol.num_atoms


def _protein_charge(sequence: str) -> float:
    return sum(1 for aa in sequence if aa in CHARGED_RESIDUES) / len(sequence)


def write_dataset(out_dir: str | Path, num_drugs: int = 40, num_proteins: int = 20,
                  num_pairs: int = 200, seed: int = 0,
                  pocket_fraction: float = 0.5) -> dict:
    """Generate a raw dataset tree under ``out_dir``.

    Layout: interactions.csv, sdf/<drug_id>.sdf, pdb/<protein_id>.pdb,
    pockets/<protein_id>.json (for a subset of proteins). Fully
    deterministic for a given seed.
    """
    if num_drugs > len(DRUG_SMILES):
        raise ValueError(f"at most {len(DRUG_SMILES)} synthetic drugs available")
    out_dir = Path(out_dir)
    (out_dir / "sdf").mkdir(parents=True, exist_ok=True)
    (out_dir / "pdb").mkdir(exist_ok=True)
    (out_dir / "pockets").mkdir(exist_ok=True)

    rng = np.random.default_rng(seed)
    drugs = {}
    for k in range(num_drugs):
        drug_id = f"D{k + 1:03d}"
        smiles = DRUG_SMILES[k]
        mol = chem.parse_smiles(smiles)
        coords = synthetic_conformer(mol, rng)
        (out_dir / "sdf" / f"{drug_id}.sdf").write_text(
            molblock(mol, coords, title=drug_id), encoding="utf-8")
        drugs[drug_id] = smiles

    proteins = {}
    aa = np.array(list(AMINO_ACIDS))
    for k in range(num_proteins):
        protein_id = f"P{k + 1:03d}"
        length = int(rng.integers(40, 81))
        sequence = "".join(rng.choice(aa, size=length))
        pdb_text = synthetic_pdb(sequence, rng)
        (out_dir / "pdb" / f"{protein_id}.pdb").write_text(pdb_text, encoding="utf-8")
        if k < int(num_proteins * pocket_fraction):
            n_atoms = 4 * length
            start = int(rng.integers(1, max(2, n_atoms - 16)))
            serials = list(range(start, min(start + 12, n_atoms + 1)))
            payload = {"pockets": [{"atom_serials": serials}]}
            (out_dir / "pockets" / f"{protein_id}.json").write_text(
                json.dumps(payload), encoding="utf-8")
        proteins[protein_id] = sequence

    drug_ids = sorted(drugs)
    protein_ids = sorted(proteins)
    grid = num_drugs * num_proteins
    if num_pairs > grid:
        raise ValueError(f"cannot draw {num_pairs} distinct pairs from a "
                         f"{num_drugs}x{num_proteins} grid")
    chosen = rng.choice(grid, size=num_pairs, replace=False)

    scores = []
    pairs = []
    for flat in chosen:
        drug_id = drug_ids[flat // num_proteins]
        protein_id = protein_ids[flat % num_proteins]
        pairs.append((drug_id, protein_id))
        scores.append(2.0 * _drug_polarity(drugs[drug_id])
                      + _protein_charge(proteins[protein_id]))
    order = np.argsort(np.asarray(scores), kind="mergesort")
    labels = np.zeros(num_pairs, dtype=int)
    labels[order[num_pairs // 2:]] = 1  # top half of the composition score

    csv_path = out_dir / "interactions.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("drug_id,smiles,protein_id,sequence,label\n")
        for (drug_id, protein_id), label in zip(pairs, labels):
            fh.write(f"{drug_id},{drugs[drug_id]},{protein_id},"
                     f"{proteins[protein_id]},{label}\n")

    return {
        "interactions": csv_path,
        "sdf_dir": out_dir / "sdf",
        "pdb_dir": out_dir / "pdb",
        "pocket_dir": out_dir / "pockets",
        "num_drugs": num_drugs,
        "num_proteins": num_proteins,
        "num_pairs": num_pairs,
    }
