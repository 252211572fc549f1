"""Parsing of interaction tables, SMILES, SDF mol-blocks, PDB structures and
pocket definitions into validated graph/sequence data structures.

All ingestion is pure and deterministic: parsing the same bytes twice yields
structurally identical records.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import chem
from .errors import IntegrityError, ParseError

# ---------------------------------------------------------------------------
# Feature layouts
# ---------------------------------------------------------------------------

# 44-way atom symbol block of the 75-dim drug atom features (43 named + other).
ATOM_SYMBOLS = (
    "C", "N", "O", "S", "F", "Si", "P", "Cl", "Br", "Mg", "Na", "Ca", "Fe",
    "As", "Al", "I", "B", "V", "K", "Tl", "Yb", "Sb", "Sn", "Ag", "Pd", "Co",
    "Se", "Ti", "Zn", "H", "Li", "Ge", "Cu", "Au", "Ni", "Cd", "In", "Mn",
    "Zr", "Cr", "Pt", "Hg", "Pb",
)
DRUG_ATOM_FEATURES = 75

# 11-way element block shared by pocket atoms and 3D graph node scalars.
POCKET_SYMBOLS = ("C", "N", "O", "S", "F", "P", "Cl", "Br", "I", "H")
POCKET_ATOM_FEATURES = 31

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"
RESIDUE_FEATURES = 21  # 20 amino acids + unknown

AA_THREE_TO_ONE = {
    "ALA": "A", "ARG": "R", "ASN": "N", "ASP": "D", "CYS": "C", "GLN": "Q",
    "GLU": "E", "GLY": "G", "HIS": "H", "ILE": "I", "LEU": "L", "LYS": "K",
    "MET": "M", "PHE": "F", "PRO": "P", "SER": "S", "THR": "T", "TRP": "W",
    "TYR": "Y", "VAL": "V",
}

# Ring atoms of the standard aromatic residues, for the pocket aromatic flag.
AROMATIC_RESIDUE_ATOMS = {
    "PHE": {"CG", "CD1", "CD2", "CE1", "CE2", "CZ"},
    "TYR": {"CG", "CD1", "CD2", "CE1", "CE2", "CZ"},
    "TRP": {"CG", "CD1", "CD2", "NE1", "CE2", "CE3", "CZ2", "CZ3", "CH2"},
    "HIS": {"CG", "ND1", "CD2", "CE1", "NE2"},
}

CONTACT_CUTOFF_3D = 4.5     # strict: edge iff distance < cutoff
CONTACT_CUTOFF_RESIDUE = 8.0  # inclusive: edge iff distance <= cutoff
COVALENT_CUTOFF = 2.0       # pocket adjacency fallback

NODE_RBF_CENTERS = 16
NODE_RBF_RANGE = 10.0
EDGE_RBF_CENTERS = 16


def one_hot(index: int, size: int) -> np.ndarray:
    v = np.zeros(size, dtype=np.float32)
    v[index] = 1.0
    return v


def _clamped_one_hot(value: int, size: int) -> np.ndarray:
    return one_hot(min(max(int(value), 0), size - 1), size)


def _symbol_one_hot(symbol: str, symbols: tuple[str, ...]) -> np.ndarray:
    # final slot is the "other" bucket
    idx = symbols.index(symbol) if symbol in symbols else len(symbols)
    return one_hot(idx, len(symbols) + 1)


def gaussian_rbf(distance: float, centers: np.ndarray, width: float) -> np.ndarray:
    return np.exp(-(((distance - centers) / width) ** 2)).astype(np.float32)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass
class InteractionSample:
    drug_id: str
    protein_id: str
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise IntegrityError(
                f"label must be 0 or 1, got {self.label!r} for "
                f"({self.drug_id}, {self.protein_id})")


@dataclass
class Molecular2DGraph:
    node_features: np.ndarray          # (N, 75)
    adjacency: np.ndarray              # (N, N) binary, symmetric, zero diagonal
    bond_list: list[tuple[int, int]]

    def __post_init__(self):
        n = self.adjacency.shape[0]
        if self.node_features.ndim != 2 or self.node_features.shape != (n, DRUG_ATOM_FEATURES):
            raise IntegrityError(
                f"2D node features must be ({n}, {DRUG_ATOM_FEATURES}), "
                f"got {self.node_features.shape}")
        if self.adjacency.shape != (n, n) or not np.array_equal(self.adjacency, self.adjacency.T):
            raise IntegrityError("adjacency must be square and symmetric")
        if np.any(np.diag(self.adjacency) != 0):
            raise IntegrityError("adjacency diagonal must be zero")
        for i, j in self.bond_list:
            if not (self.adjacency[i, j] == 1 and self.adjacency[j, i] == 1):
                raise IntegrityError(f"bond ({i}, {j}) missing from adjacency")

    @property
    def num_atoms(self) -> int:
        return self.adjacency.shape[0]


@dataclass
class Molecular3DGraph:
    coords: np.ndarray        # (N, 3) angstrom
    node_scalars: np.ndarray  # (N, S)
    node_vectors: np.ndarray  # (N, nu, 3)
    edges: np.ndarray         # (E, 2) directed (src, dst); both directions present
    edge_scalars: np.ndarray  # (E, S_e)
    edge_vectors: np.ndarray  # (E, nu_e, 3)
    cutoff: float = CONTACT_CUTOFF_3D

    def __post_init__(self):
        n = self.coords.shape[0]
        if self.coords.shape != (n, 3):
            raise IntegrityError("coords must be (N, 3)")
        pairs = {(int(s), int(d)) for s, d in self.edges}
        for s, d in pairs:
            if (d, s) not in pairs:
                raise IntegrityError(f"edge ({s}, {d}) has no reverse")
            if not np.linalg.norm(self.coords[s] - self.coords[d]) < self.cutoff:
                raise IntegrityError(f"edge ({s}, {d}) beyond cutoff {self.cutoff}")

    @property
    def num_atoms(self) -> int:
        return self.coords.shape[0]


@dataclass
class PocketGraph:
    node_features: np.ndarray  # (M, 31)
    adjacency: np.ndarray      # (M, M) binary symmetric

    def __post_init__(self):
        m = self.adjacency.shape[0]
        if m < 1:
            raise IntegrityError("pocket must contain at least one atom")
        if self.node_features.shape != (m, POCKET_ATOM_FEATURES):
            raise IntegrityError(
                f"pocket features must be ({m}, {POCKET_ATOM_FEATURES}), "
                f"got {self.node_features.shape}")
        if not np.array_equal(self.adjacency, self.adjacency.T):
            raise IntegrityError("pocket adjacency must be symmetric")

    @property
    def num_atoms(self) -> int:
        return self.adjacency.shape[0]


@dataclass
class ResidueContactGraph:
    residue_onehot: np.ndarray  # (R, 21)
    calpha_coords: np.ndarray   # (R, 3)
    edges: np.ndarray           # (E, 2) directed, both directions present
    cutoff: float = CONTACT_CUTOFF_RESIDUE

    def __post_init__(self):
        r = self.calpha_coords.shape[0]
        if self.residue_onehot.shape != (r, RESIDUE_FEATURES):
            raise IntegrityError(
                f"residue one-hot must be ({r}, {RESIDUE_FEATURES})")
        pairs = {(int(s), int(d)) for s, d in self.edges}
        for s, d in pairs:
            if s == d:
                raise IntegrityError("self edges not allowed")
            if (d, s) not in pairs:
                raise IntegrityError(f"edge ({s}, {d}) has no reverse")
            if not np.linalg.norm(self.calpha_coords[s] - self.calpha_coords[d]) <= self.cutoff:
                raise IntegrityError(f"edge ({s}, {d}) beyond cutoff {self.cutoff}")

    @property
    def num_residues(self) -> int:
        return self.calpha_coords.shape[0]


@dataclass
class DrugRecord:
    drug_id: str
    smiles: str
    graph2d: Molecular2DGraph
    graph3d: Molecular3DGraph | None = None

    def __post_init__(self):
        if not self.smiles:
            raise IntegrityError(f"drug {self.drug_id}: empty SMILES")
        if self.graph2d.num_atoms < 1:
            raise IntegrityError(f"drug {self.drug_id}: empty 2D graph")


@dataclass
class ProteinRecord:
    protein_id: str
    sequence: str
    pockets: list[PocketGraph] = field(default_factory=list)
    residue_graph: ResidueContactGraph | None = None

    def __post_init__(self):
        if not self.sequence:
            raise IntegrityError(f"protein {self.protein_id}: empty sequence")


# ---------------------------------------------------------------------------
# Interaction tables
# ---------------------------------------------------------------------------

REQUIRED_COLUMNS = ("drug_id", "smiles", "protein_id", "sequence", "label")


def _read_rows(path: str | Path, fmt: str | None = None) -> list[dict[str, str]]:
    import csv

    path = Path(path)
    if fmt is None:
        fmt = "tsv" if path.suffix.lower() in (".tsv", ".tab") else "csv"
    if fmt not in ("csv", "tsv"):
        raise ParseError(f"unsupported interaction table format {fmt!r}")
    delim = "\t" if fmt == "tsv" else ","

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=delim)
        if reader.fieldnames is None:
            raise ParseError(f"{path}: no data rows")
        missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ParseError(f"{path}: missing columns {missing}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            row["_lineno"] = str(lineno)
            rows.append(row)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return rows


def _parse_label(raw: str, path: Path | str, lineno: str) -> int:
    try:
        value = float(raw.strip())
    except (ValueError, AttributeError):
        raise ParseError(f"{path}: row {lineno}: bad label {raw!r}") from None
    if value not in (0.0, 1.0):
        raise ParseError(f"{path}: row {lineno}: label must be 0 or 1, got {raw!r}")
    return int(value)


def load_interactions(path: str | Path, fmt: str | None = None) -> list[InteractionSample]:
    """Load labeled drug-protein pairs from a CSV/TSV table.

    Duplicate (drug, protein) pairs are allowed only when their labels agree;
    a conflicting duplicate raises :class:`IntegrityError`.
    """
    samples = []
    seen: dict[tuple[str, str], int] = {}
    for row in _read_rows(path, fmt):
        lineno = row["_lineno"]
        drug_id = row["drug_id"].strip()
        protein_id = row["protein_id"].strip()
        if not drug_id or not protein_id:
            raise ParseError(f"{path}: row {lineno}: empty entity id")
        label = _parse_label(row["label"], path, lineno)
        key = (drug_id, protein_id)
        if key in seen and seen[key] != label:
            raise IntegrityError(
                f"{path}: row {lineno}: conflicting labels for pair {key}")
        seen[key] = label
        samples.append(InteractionSample(drug_id, protein_id, label))
    return samples


def read_entity_tables(path: str | Path, fmt: str | None = None
                       ) -> tuple[list[InteractionSample], dict[str, str], dict[str, str]]:
    """Like :func:`load_interactions` but also returns the SMILES and sequence
    columns keyed by entity id, checking per-id consistency."""
    samples = load_interactions(path, fmt)
    drugs: dict[str, str] = {}
    proteins: dict[str, str] = {}
    for row in _read_rows(path, fmt):
        lineno = row["_lineno"]
        did, smiles = row["drug_id"].strip(), row["smiles"].strip()
        pid, seq = row["protein_id"].strip(), row["sequence"].strip()
        if did in drugs and drugs[did] != smiles:
            raise IntegrityError(f"{path}: row {lineno}: drug {did} has conflicting SMILES")
        if pid in proteins and proteins[pid] != seq:
            raise IntegrityError(f"{path}: row {lineno}: protein {pid} has conflicting sequence")
        drugs[did] = smiles
        proteins[pid] = seq
    return samples, drugs, proteins


# ---------------------------------------------------------------------------
# Drug featurization
# ---------------------------------------------------------------------------

def atom_features_75(atom: chem.Atom) -> np.ndarray:
    """75-dim drug atom feature vector.

    Layout: symbol one-hot over 43 named elements + other [44], degree 0-10
    [11], implicit valence 0-6 [7], formal charge [1], radical electrons [1],
    hybridization one-hot (sp, sp2, sp3, sp3d, sp3d2) [5], aromatic flag [1],
    total hydrogens 0-4 [5]. Out-of-range counts clamp to the last slot.
    """
    hyb = np.zeros(len(chem.HYBRIDIZATIONS), dtype=np.float32)
    if atom.hybridization in chem.HYBRIDIZATIONS:
        hyb[chem.HYBRIDIZATIONS.index(atom.hybridization)] = 1.0
    parts = [
        _symbol_one_hot(atom.symbol, ATOM_SYMBOLS),
        _clamped_one_hot(atom.degree, 11),
        _clamped_one_hot(atom.implicit_valence, 7),
        np.array([atom.formal_charge], dtype=np.float32),
        np.array([atom.radical_electrons], dtype=np.float32),
        hyb,
        np.array([1.0 if atom.aromatic else 0.0], dtype=np.float32),
        _clamped_one_hot(atom.total_hs, 5),
    ]
    return np.concatenate(parts)


def smiles_to_2d_graph(smiles: str) -> Molecular2DGraph:
    """Build the heavy-atom 2D molecular graph with 75-dim atom features."""
    mol = chem.parse_smiles(smiles)
    n = mol.num_atoms
    feats = np.stack([atom_features_75(a) for a in mol.atoms])
    adj = np.zeros((n, n), dtype=np.float32)
    bond_list = []
    for i, j, _ in mol.bonds:
        adj[i, j] = adj[j, i] = 1.0
        bond_list.append((i, j))
    return Molecular2DGraph(node_features=feats, adjacency=adj, bond_list=bond_list)


# ---------------------------------------------------------------------------
# SDF conformers -> 3D graphs
# ---------------------------------------------------------------------------

def _parse_molblock(molblock: str) -> tuple[list[str], np.ndarray, list[tuple[int, int]]]:
    lines = molblock.splitlines()
    if len(lines) < 4:
        raise ParseError("mol-block too short")
    counts = lines[3]
    try:
        n_atoms = int(counts[0:3])
        n_bonds = int(counts[3:6])
    except ValueError:
        raise ParseError(f"bad counts line: {counts!r}") from None
    if len(lines) < 4 + n_atoms + n_bonds:
        raise ParseError("mol-block truncated")

    symbols: list[str] = []
    coords = np.zeros((n_atoms, 3), dtype=np.float64)
    for k in range(n_atoms):
        line = lines[4 + k]
        try:
            coords[k] = [float(line[0:10]), float(line[10:20]), float(line[20:30])]
        except ValueError:
            raise ParseError(f"missing coordinates on atom line {k + 1}") from None
        symbol = line[31:34].strip()
        if not symbol:
            raise ParseError(f"missing element symbol on atom line {k + 1}")
        symbols.append(symbol)

    bonds = []
    for k in range(n_bonds):
        line = lines[4 + n_atoms + k]
        try:
            i, j = int(line[0:3]) - 1, int(line[3:6]) - 1
        except ValueError:
            raise ParseError(f"bad bond line {k + 1}") from None
        if not (0 <= i < n_atoms and 0 <= j < n_atoms):
            raise ParseError(f"bond line {k + 1} references missing atom")
        bonds.append((i, j))
    return symbols, coords, bonds


def sdf_to_3d_graph(molblock: str, cutoff: float = CONTACT_CUTOFF_3D) -> Molecular3DGraph:
    """Build a geometric graph from a V2000 mol-block.

    Hydrogens are dropped; nodes are heavy atoms. Edges connect every atom
    pair closer than ``cutoff`` (strict) and carry an RBF expansion of the
    distance plus a covalent-bond flag from the mol-block bond table.
    """
    symbols, coords, bonds = _parse_molblock(molblock)
    heavy = [k for k, s in enumerate(symbols) if s.upper() != "H"]
    if not heavy:
        raise ParseError("mol-block contains no heavy atoms")
    remap = {old: new for new, old in enumerate(heavy)}
    symbols = [symbols[k] for k in heavy]
    coords = coords[heavy]
    covalent = {(remap[i], remap[j]) for i, j in bonds if i in remap and j in remap}
    covalent |= {(j, i) for i, j in covalent}

    n = len(symbols)
    centroid = coords.mean(axis=0)
    rel = coords - centroid
    dist_c = np.linalg.norm(rel, axis=1)

    node_centers = np.linspace(0.0, NODE_RBF_RANGE, NODE_RBF_CENTERS)
    node_width = node_centers[1] - node_centers[0]
    node_scalars = np.stack([
        np.concatenate([
            _symbol_one_hot(s, POCKET_SYMBOLS),
            gaussian_rbf(dist_c[k], node_centers, node_width),
        ])
        for k, s in enumerate(symbols)
    ])
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(dist_c[:, None] > 1e-9, rel / np.maximum(dist_c[:, None], 1e-9), 0.0)
    node_vectors = unit[:, None, :].astype(np.float32)

    diff = coords[None, :, :] - coords[:, None, :]
    dists = np.linalg.norm(diff, axis=-1)
    edge_centers = np.linspace(0.0, cutoff, EDGE_RBF_CENTERS)
    edge_width = edge_centers[1] - edge_centers[0]

    edges, edge_scalars, edge_vectors = [], [], []
    for src in range(n):
        for dst in range(n):
            if src == dst or not dists[src, dst] < cutoff:
                continue
            edges.append((src, dst))
            rbf = gaussian_rbf(dists[src, dst], edge_centers, edge_width)
            flag = np.array([1.0 if (src, dst) in covalent else 0.0], dtype=np.float32)
            edge_scalars.append(np.concatenate([rbf, flag]))
            v = diff[src, dst] / dists[src, dst]
            edge_vectors.append(v[None, :])

    e = len(edges)
    return Molecular3DGraph(
        coords=coords.astype(np.float64),
        node_scalars=node_scalars.astype(np.float32),
        node_vectors=node_vectors,
        edges=np.array(edges, dtype=np.int64).reshape(e, 2),
        edge_scalars=np.stack(edge_scalars).astype(np.float32) if e else np.zeros((0, EDGE_RBF_CENTERS + 1), np.float32),
        edge_vectors=np.stack(edge_vectors).astype(np.float32) if e else np.zeros((0, 1, 3), np.float32),
        cutoff=cutoff,
    )


def attach_conformer(record: DrugRecord, molblock: str,
                     cutoff: float = CONTACT_CUTOFF_3D) -> DrugRecord:
    """Parse a conformer and attach it, checking atom-count consistency
    against the record's 2D graph."""
    graph3d = sdf_to_3d_graph(molblock, cutoff)
    if graph3d.num_atoms != record.graph2d.num_atoms:
        raise IntegrityError(
            f"drug {record.drug_id}: conformer has {graph3d.num_atoms} heavy atoms "
            f"but 2D graph has {record.graph2d.num_atoms}")
    record.graph3d = graph3d
    return record


# ---------------------------------------------------------------------------
# PDB structures
# ---------------------------------------------------------------------------

@dataclass
class StructureAtom:
    serial: int
    name: str
    element: str
    res_name: str
    res_seq: int
    chain_id: str
    icode: str
    coords: np.ndarray


@dataclass
class ParsedStructure:
    atoms: list[StructureAtom]

    def by_serial(self) -> dict[int, StructureAtom]:
        table = {}
        for a in self.atoms:
            table.setdefault(a.serial, a)
        return table

    def calpha_atoms(self) -> list[StructureAtom]:
        seen: set[tuple[str, int, str]] = set()
        cas = []
        for a in self.atoms:
            if a.name != "CA":
                continue
            key = (a.chain_id, a.res_seq, a.icode)
            if key in seen:
                warnings.warn(
                    f"duplicate residue {key} in structure; keeping first CA")
                continue
            seen.add(key)
            cas.append(a)
        return cas


def _element_from_name(name: str) -> str:
    letters = "".join(c for c in name if c.isalpha())
    if not letters:
        return "X"
    if len(letters) >= 2 and letters[:2].capitalize() in ("Cl", "Br", "Fe", "Zn", "Mg", "Mn", "Na", "Ca", "Se"):
        return letters[:2].capitalize()
    return letters[0].upper()


def parse_pdb(pdb_text: str) -> ParsedStructure:
    """Extract ATOM records (first model, first altloc) from PDB text."""
    atoms: list[StructureAtom] = []
    for line in pdb_text.splitlines():
        if line.startswith("ENDMDL"):
            break
        if not line.startswith("ATOM"):
            continue
        altloc = line[16] if len(line) > 16 else " "
        if altloc not in (" ", "A"):
            continue
        try:
            serial = int(line[6:11])
            name = line[12:16].strip()
            res_name = line[17:20].strip()
            chain_id = line[21] if len(line) > 21 else " "
            res_seq = int(line[22:26])
            icode = line[26] if len(line) > 26 else " "
            coords = np.array(
                [float(line[30:38]), float(line[38:46]), float(line[46:54])],
                dtype=np.float64)
        except (ValueError, IndexError):
            raise ParseError(f"malformed ATOM record: {line!r}") from None
        element = line[76:78].strip() if len(line) >= 78 else ""
        element = element.capitalize() if element else _element_from_name(name)
        atoms.append(StructureAtom(serial, name, element, res_name,
                                   res_seq, chain_id, icode, coords))
    return ParsedStructure(atoms=atoms)


def residue_one_hot(res_name: str) -> np.ndarray:
    one_letter = AA_THREE_TO_ONE.get(res_name.upper(), "X")
    idx = AMINO_ACIDS.index(one_letter) if one_letter in AMINO_ACIDS else 20
    return one_hot(idx, RESIDUE_FEATURES)


def pdb_to_residue_graph(pdb_text: str,
                         cutoff: float = CONTACT_CUTOFF_RESIDUE) -> ResidueContactGraph:
    """Residue contact graph over C-alpha atoms (edge iff distance <= cutoff)."""
    structure = parse_pdb(pdb_text)
    cas = structure.calpha_atoms()
    if not cas:
        raise ParseError("no CA atoms found in PDB text")
    coords = np.stack([a.coords for a in cas])
    onehot = np.stack([residue_one_hot(a.res_name) for a in cas])

    diff = coords[None, :, :] - coords[:, None, :]
    dists = np.linalg.norm(diff, axis=-1)
    edges = [(i, j) for i in range(len(cas)) for j in range(len(cas))
             if i != j and dists[i, j] <= cutoff]
    return ResidueContactGraph(
        residue_onehot=onehot.astype(np.float32),
        calpha_coords=coords,
        edges=np.array(edges, dtype=np.int64).reshape(len(edges), 2),
        cutoff=cutoff,
    )


# ---------------------------------------------------------------------------
# Pocket graphs
# ---------------------------------------------------------------------------

def _pocket_features(atoms: list[StructureAtom], adjacency: np.ndarray) -> np.ndarray:
    """31-dim pocket atom features: element one-hot [11], degree 0-6 [7],
    attached hydrogens 0-5 [6], valence heuristic 0-5 [6], aromatic flag [1]."""
    degrees = adjacency.sum(axis=1).astype(int)
    h_neighbors = np.zeros(len(atoms), dtype=int)
    for i, a in enumerate(atoms):
        for j, b in enumerate(atoms):
            if adjacency[i, j] and b.element == "H":
                h_neighbors[i] += 1
    rows = []
    for i, a in enumerate(atoms):
        typical = chem.TYPICAL_VALENCE.get(a.element, 4)
        valence = max(typical - int(degrees[i]), 0)
        aromatic = 1.0 if a.name in AROMATIC_RESIDUE_ATOMS.get(a.res_name.upper(), ()) else 0.0
        rows.append(np.concatenate([
            _symbol_one_hot(a.element, POCKET_SYMBOLS),
            _clamped_one_hot(degrees[i], 7),
            _clamped_one_hot(h_neighbors[i], 6),
            _clamped_one_hot(valence, 6),
            np.array([aromatic], dtype=np.float32),
        ]))
    return np.stack(rows)


def _pocket_from_atoms(atoms: list[StructureAtom]) -> PocketGraph:
    coords = np.stack([a.coords for a in atoms])
    diff = coords[None, :, :] - coords[:, None, :]
    dists = np.linalg.norm(diff, axis=-1)
    adjacency = ((dists < COVALENT_CUTOFF) & ~np.eye(len(atoms), dtype=bool)).astype(np.float32)
    return PocketGraph(node_features=_pocket_features(atoms, adjacency),
                       adjacency=adjacency)


def load_pockets(protein_id: str, pocket_file: str | Path | None,
                 structure: ParsedStructure,
                 max_fallback_atoms: int = 2000) -> list[PocketGraph]:
    """Build pocket graphs from a pocket JSON file, or fall back to a single
    graph over all heavy atoms of the structure (capped, file order)."""
    if pocket_file is not None and Path(pocket_file).exists():
        with open(pocket_file, encoding="utf-8") as fh:
            try:
                spec = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{pocket_file}: invalid JSON ({exc})") from None
        table = structure.by_serial()
        pockets = []
        for k, entry in enumerate(spec.get("pockets", [])):
            serials = entry.get("atom_serials", [])
            if not serials:
                raise IntegrityError(f"protein {protein_id}: pocket {k} is empty")
            atoms = []
            for serial in serials:
                if serial not in table:
                    raise IntegrityError(
                        f"protein {protein_id}: pocket {k} references atom serial "
                        f"{serial} absent from the structure")
                atoms.append(table[serial])
            pockets.append(_pocket_from_atoms(atoms))
        if not pockets:
            raise IntegrityError(f"protein {protein_id}: pocket file lists no pockets")
        return pockets

    heavy = [a for a in structure.atoms if a.element != "H"][:max_fallback_atoms]
    if not heavy:
        raise IntegrityError(f"protein {protein_id}: structure has no heavy atoms")
    return [_pocket_from_atoms(heavy)]
