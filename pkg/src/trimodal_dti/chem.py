"""Self-contained SMILES reader.

Parses the organic subset, bracket atoms, branches, ring closures (including
%nn), charges, explicit hydrogen counts and aromatic lowercase notation into
a heavy-atom molecular graph with per-atom chemistry attributes. Stereo
markers (/, \\, @) and isotopes are accepted and ignored. Explicit hydrogen
atoms written as bracket nodes are folded into their neighbor's hydrogen
count, so the resulting graph always contains heavy atoms only.

Implicit hydrogen counts follow the OpenSMILES valence rules (aromatic atoms
contribute one extra bonding unit for the delocalized system). Hybridization
is assigned by a bond-pattern heuristic: aromatic or double-bonded atoms are
sp2, atoms with a triple bond or two double bonds are sp, and saturated
atoms are sp3/sp3d/sp3d2 by coordination number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ChemistryError

ORGANIC_SUBSET = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
AROMATIC_ORGANIC = ("b", "c", "n", "o", "p", "s")

# Smallest-first normal valences used to fill implicit hydrogens.
NORMAL_VALENCES = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

# Default valence for radical-electron and pocket-featurization heuristics.
TYPICAL_VALENCE = {
    "H": 1, "B": 3, "C": 4, "N": 3, "O": 2, "F": 1,
    "Si": 4, "P": 3, "S": 2, "Cl": 1, "Br": 1, "I": 1, "Se": 2,
}

PERIODIC_SYMBOLS = frozenset(
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co "
    "Ni Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb "
    "Te I Xe Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re "
    "Os Ir Pt Au Hg Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu".split()
)

BOND_ORDER = {"single": 1.0, "double": 2.0, "triple": 3.0, "aromatic": 1.0}
_BOND_CHARS = {"-": "single", "=": "double", "#": "triple", ":": "aromatic",
               "/": "single", "\\": "single"}

HYBRIDIZATIONS = ("SP", "SP2", "SP3", "SP3D", "SP3D2")


@dataclass
class Atom:
    """One heavy atom with the attributes the featurizers consume."""

    symbol: str
    aromatic: bool = False
    formal_charge: int = 0
    explicit_hs: int = 0           # hydrogens fixed by a bracket (or folded [H] nodes)
    implicit_hs: int = 0           # filled in by finalization for organic-subset atoms
    radical_electrons: int = 0
    degree: int = 0                # heavy-atom neighbors
    hybridization: str = "SP3"
    from_bracket: bool = False
    _neighbors: list[int] = field(default_factory=list, repr=False)

    @property
    def total_hs(self) -> int:
        return self.explicit_hs + self.implicit_hs

    @property
    def implicit_valence(self) -> int:
        return self.implicit_hs


@dataclass
class Molecule:
    """Heavy-atom graph parsed from a SMILES string."""

    atoms: list[Atom]
    bonds: list[tuple[int, int, str]]   # (i, j, order name), i < j

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        ch = self.peek()
        self.pos += 1
        return ch

    def take_digits(self) -> str:
        start = self.pos
        while self.peek().isdigit():
            self.pos += 1
        return self.text[start:self.pos]


def _parse_bracket(cur: _Cursor, smiles: str) -> Atom:
    cur.take_digits()  # isotope, ignored
    ch = cur.peek()
    if ch == "":
        raise ChemistryError("unterminated bracket atom", smiles)

    aromatic = False
    if ch.islower():
        # aromatic symbol: c, n, o, p, s, se, as
        sym = cur.take()
        if sym + cur.peek() in ("se", "as"):
            sym += cur.take()
        symbol = sym.capitalize()
        aromatic = True
    elif ch.isupper():
        symbol = cur.take()
        if cur.peek().islower() and (symbol + cur.peek()) in PERIODIC_SYMBOLS:
            symbol += cur.take()
    else:
        raise ChemistryError(f"bad bracket atom start {ch!r}", smiles)

    while cur.peek() == "@":
        cur.take()
        if cur.peek() in ("T", "A", "S", "O"):  # @TH1 / @AL1 / @SP1 / @OH1 forms
            cur.take()
            cur.take()
            cur.take_digits()

    hs = 0
    if cur.peek() == "H":
        cur.take()
        digits = cur.take_digits()
        hs = int(digits) if digits else 1

    charge = 0
    while cur.peek() in ("+", "-"):
        sign = 1 if cur.take() == "+" else -1
        digits = cur.take_digits()
        charge += sign * (int(digits) if digits else 1)

    if cur.peek() == ":":
        cur.take()
        cur.take_digits()  # atom map, ignored

    if cur.take() != "]":
        raise ChemistryError("unterminated bracket atom", smiles)

    return Atom(symbol=symbol, aromatic=aromatic, formal_charge=charge,
                explicit_hs=hs, from_bracket=True)


def parse_smiles(smiles: str) -> Molecule:
    """Parse a SMILES string into a heavy-atom :class:`Molecule`.

    Raises :class:`ChemistryError` for anything that cannot be interpreted.
    """
    if not smiles or not smiles.strip():
        raise ChemistryError("empty SMILES string", smiles)
    smiles = smiles.strip()

    atoms: list[Atom] = []
    bonds: dict[tuple[int, int], str] = {}
    branch_stack: list[int | None] = []
    ring_open: dict[int, tuple[int, str | None]] = {}
    prev: int | None = None
    pending: str | None = None
    cur = _Cursor(smiles)

    def add_bond(i: int, j: int, order: str | None) -> None:
        if i == j:
            raise ChemistryError("self bond", smiles)
        if order is None:
            order = "aromatic" if atoms[i].aromatic and atoms[j].aromatic else "single"
        key = (min(i, j), max(i, j))
        if key in bonds:
            raise ChemistryError(f"duplicate bond between atoms {i} and {j}", smiles)
        bonds[key] = order

    def add_atom(atom: Atom) -> None:
        nonlocal prev, pending
        atoms.append(atom)
        idx = len(atoms) - 1
        if prev is not None:
            add_bond(prev, idx, pending)
        prev = idx
        pending = None

    while cur.peek():
        ch = cur.peek()
        if ch in _BOND_CHARS:
            cur.take()
            pending = _BOND_CHARS[ch]
        elif ch == "(":
            cur.take()
            if prev is None:
                raise ChemistryError("branch with no preceding atom", smiles)
            branch_stack.append(prev)
        elif ch == ")":
            cur.take()
            if not branch_stack:
                raise ChemistryError("unmatched ')'", smiles)
            prev = branch_stack.pop()
        elif ch == ".":
            cur.take()
            prev = None
            pending = None
        elif ch.isdigit() or ch == "%":
            if prev is None:
                raise ChemistryError("ring closure with no preceding atom", smiles)
            if ch == "%":
                cur.take()
                num = int(cur.take() + cur.take())
            else:
                num = int(cur.take())
            if num in ring_open:
                other, open_bond = ring_open.pop(num)
                order = pending if pending is not None else open_bond
                if pending is not None and open_bond is not None and pending != open_bond:
                    raise ChemistryError(f"conflicting ring-closure bonds for ring {num}", smiles)
                add_bond(other, prev, order)
                pending = None
            else:
                ring_open[num] = (prev, pending)
                pending = None
        elif ch == "[":
            cur.take()
            add_atom(_parse_bracket(cur, smiles))
        elif ch.isupper():
            sym = cur.take()
            if sym + cur.peek() in ORGANIC_SUBSET:
                sym += cur.take()
            if sym not in ORGANIC_SUBSET:
                raise ChemistryError(f"atom {sym!r} needs brackets", smiles)
            add_atom(Atom(symbol=sym))
        elif ch in AROMATIC_ORGANIC:
            cur.take()
            add_atom(Atom(symbol=ch.upper(), aromatic=True))
        else:
            raise ChemistryError(f"unexpected character {ch!r} at position {cur.pos}", smiles)

    if branch_stack:
        raise ChemistryError("unmatched '('", smiles)
    if ring_open:
        raise ChemistryError(f"unclosed ring bond(s): {sorted(ring_open)}", smiles)
    if not atoms:
        raise ChemistryError("no atoms parsed", smiles)

    mol = Molecule(atoms=atoms, bonds=[(i, j, o) for (i, j), o in bonds.items()])
    _fold_explicit_hydrogens(mol, smiles)
    _finalize(mol)
    return mol


def _fold_explicit_hydrogens(mol: Molecule, smiles: str) -> None:
    """Merge [H] atom nodes into the hydrogen count of their neighbor."""
    h_idx = [i for i, a in enumerate(mol.atoms) if a.symbol == "H"]
    if not h_idx:
        return
    neighbor_of: dict[int, int] = {}
    for i, j, order in mol.bonds:
        for h, other in ((i, j), (j, i)):
            if mol.atoms[h].symbol == "H":
                if order != "single" or h in neighbor_of or mol.atoms[other].symbol == "H":
                    raise ChemistryError("unsupported explicit hydrogen topology", smiles)
                neighbor_of[h] = other
    if set(h_idx) != set(neighbor_of):
        raise ChemistryError("isolated explicit hydrogen atom", smiles)

    keep = [i for i in range(len(mol.atoms)) if i not in neighbor_of]
    remap = {old: new for new, old in enumerate(keep)}
    for h, other in neighbor_of.items():
        mol.atoms[other].explicit_hs += 1 + mol.atoms[h].explicit_hs
    mol.atoms = [mol.atoms[i] for i in keep]
    mol.bonds = [(min(remap[i], remap[j]), max(remap[i], remap[j]), o)
                 for i, j, o in mol.bonds
                 if i in remap and j in remap]


def _finalize(mol: Molecule) -> None:
    n = len(mol.atoms)
    bond_sum = [0.0] * n
    double = [0] * n
    triple = [0] * n
    for a in mol.atoms:
        a._neighbors = []
    for i, j, order in mol.bonds:
        mol.atoms[i]._neighbors.append(j)
        mol.atoms[j]._neighbors.append(i)
        for k in (i, j):
            bond_sum[k] += BOND_ORDER[order]
            if order == "double":
                double[k] += 1
            elif order == "triple":
                triple[k] += 1

    for idx, atom in enumerate(mol.atoms):
        atom.degree = len(atom._neighbors)
        # aromatic atoms carry one extra bonding unit for the ring system;
        # hydrogens folded in from explicit [H] atoms count toward valence
        eff = bond_sum[idx] + (1.0 if atom.aromatic else 0.0) + atom.explicit_hs

        if not atom.from_bracket:
            atom.implicit_hs = 0
            for valence in NORMAL_VALENCES.get(atom.symbol, ()):
                if valence >= eff:
                    atom.implicit_hs = int(valence - eff)
                    break
        else:
            atom.implicit_hs = 0
            base = TYPICAL_VALENCE.get(atom.symbol)
            if base is not None:
                adjusted = base + atom.formal_charge
                atom.radical_electrons = max(0, int(adjusted - eff))

        if atom.aromatic:
            atom.hybridization = "SP2"
        elif triple[idx] >= 1 or double[idx] >= 2:
            atom.hybridization = "SP"
        elif double[idx] >= 1:
            atom.hybridization = "SP2"
        else:
            coordination = atom.degree + atom.total_hs
            if coordination > 6:
                atom.hybridization = "SP3D2"
            elif coordination == 6:
                atom.hybridization = "SP3D2"
            elif coordination == 5:
                atom.hybridization = "SP3D"
            elif coordination == 0:
                atom.hybridization = "UNSPECIFIED"
            else:
                atom.hybridization = "SP3"
