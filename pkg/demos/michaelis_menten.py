"""Michaelis-Menten: when does the classical quasi-steady-state reduction hold?

Small enzyme (e0 -> 0) and slow product formation (k2 -> 0) both make the
complex c "fast", but only the first gives a QSS reduction that agrees with
singular perturbation theory. This script shows the symbolic verdict and then
the numbers behind it.
"""

from qssr.network import load_model
from qssr.numeric import convergence_study
from qssr.qss import QssSplit, explicit_reduce_linear, find_qss_critical
from qssr.tf import consistency_check

mm = load_model("mm_irrev").system()
split = QssSplit.of(mm, "c")

print("full system")
for line in mm.to_text():
    print("  " + line)

red = explicit_reduce_linear(mm, split)
print("\nclassical QSS reduction for c")
print("  s' =", red.field[0])

crit = find_qss_critical(mm, split)
print("\nparameter values where the QSS variety can be invariant:")
for branch in crit.conditions():
    print("  " + " and ".join(branch))

for pstar, rho in (({"e0": 0}, {"e0": 1}), ({"k2": 0}, {"k2": 1})):
    res = consistency_check(mm, split, pstar, rho)
    print(f"\n{list(pstar)[0]} small: QSS and singular perturbation are {res.verdict}")
    for x, w in res.witness.items():
        print(f"  {x}: QSS field {w['qss']}")
        print(f"  {x}: TF field  {w['tf']}")
        if "denominator_shift" in w:
            print(f"  denominator shift {w['denominator_shift']}")

eps = [0.02, 0.01, 0.005, 0.0025]
print("\nsup-norm errors on [0, 20] in slow time, starting on the QSS variety at s = 1")
rep = convergence_study(mm, split, {"e0": 0}, {"e0": 1}, eps, {"s": 1.0}, 20.0)
print(f"  e0 small, QSS: slope {rep.slope:.3f} ({rep.verdict})")
for reduction in ("qss", "tf"):
    rep = convergence_study(mm, split, {"k2": 0}, {"k2": 1}, eps, {"s": 1.0}, 20.0,
                            reduction=reduction)
    rel = ", ".join(f"{r.relative_error:.2e}" for r in rep.rows)
    print(f"  k2 small, {reduction.upper()}: relative errors {rel} ({rep.verdict})")
