"""Tri-modal drug-target interaction prediction.

Drugs and proteins are each encoded in three aligned representations —
subword token sequences, topological graphs, and 3D geometric graphs —
tied together by a contrastive alignment loss and fused for binary
interaction classification.
"""

__version__ = "0.1.0"
