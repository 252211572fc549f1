"""Featurize one drug molecule three ways: token sequence, 2D topology
graph, and 3D geometric graph.

Run from the repository root after installing the package:

    python3 demos/01_featurize_molecule.py
"""

import numpy as np

from trimodal_dti import ingest, synthetic
from trimodal_dti.tokenizer import train_vocab, tokenize

ASPIRIN = "CC(=O)Oc1ccccc1C(=O)O"

print("SMILES:", ASPIRIN)

# --- 1D: subword tokens -----------------------------------------------------
# Train the pair-merge vocabulary on a small corpus of drug strings, then
# apply it to a molecule the corpus does not contain verbatim.
vocab = train_vocab(list(synthetic.DRUG_SMILES), target_size=60, min_pair_freq=2)
sequence = tokenize(ASPIRIN, vocab, max_len=64)
print("\n1D token sequence")
print("  vocabulary size:", len(vocab))
print("  tokens:", sequence.tokens)
print("  ids:   ", sequence.token_ids)

# --- 2D: atom/bond topology -------------------------------------------------
graph2d = ingest.smiles_to_2d_graph(ASPIRIN)
print("\n2D topology graph")
print("  atoms:", graph2d.num_atoms)
print("  feature width:", graph2d.node_features.shape[1], "(one-hot slots)")
print("  bonds (undirected):", int(graph2d.adjacency.sum() // 2))
degrees = graph2d.adjacency.sum(axis=1).astype(int)
print("  degree histogram:", np.bincount(degrees).tolist())

# --- 3D: geometric graph from a conformer -----------------------------------
mol = ingest.chem.parse_smiles(ASPIRIN)
coords = synthetic.synthetic_conformer(mol, np.random.default_rng(0))
block = synthetic.molblock(mol, coords, title="aspirin demo")
graph3d = ingest.sdf_to_3d_graph(block)
print("\n3D geometric graph (4.5 angstrom neighborhood)")
print("  heavy atoms:", graph3d.num_atoms)
print("  directed edges:", len(graph3d.edges))
print("  node scalar channels:", graph3d.node_scalars.shape[1],
      "(element one-hot + centroid-distance RBF)")
print("  node vector channels:", graph3d.node_vectors.shape[1])
print("  edge scalar channels:", graph3d.edge_scalars.shape[1],
      "(distance RBF + covalent flag)")
covalent = int(graph3d.edge_scalars[:, -1].sum())
print("  covalent edges:", covalent, "of", len(graph3d.edges))
