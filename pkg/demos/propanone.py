"""Propanone decomposition: a QSS reduction that cannot be written by radicals.

The QSS equations for the radicals X, Y, Z have no solution by radicals, yet
the lowest order reduction for a slow initiation step k1 is elementary. The
affine search finds the only admissible parameter value, and the singular
perturbation formula u - B A^-1 v gives the reduced field.
"""

from qssr.errors import TfReductionError
from qssr.network import load_model
from qssr.qss import QssSplit, affine_subspace_candidates
from qssr.tf import tf_reduce_affine

odes = load_model("propanone").system()
split = QssSplit.of(odes, "cX,cY,cZ")

res = affine_subspace_candidates(odes, split, nonnegative=True)
print("coordinate subspaces cX, cY, cZ = gamma that can be invariant (all indeterminates >= 0):")
for cand in res.candidates:
    t = cand.text()
    print("  " + " and ".join(t["parameter_conditions"]), t["gamma"])
print(f"  ({len(res.rank_failures)} further candidates fail the rank condition)")

red = tf_reduce_affine(odes, split, {"k1": 0}, {"k1": 1})
print("\nreduced system, coefficient of k1 (slow time):")
for x, f in zip(red.states, red.field):
    print(f"  {x}' = {f}")

try:
    tf_reduce_affine(odes, split, {"k1": 0, "k9": 0}, {"k1": 1})
except TfReductionError as exc:
    print("\nwithout the extra degradation k9:", exc)
